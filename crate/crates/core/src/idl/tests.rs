use proptest::prelude::*;

use super::strategies;
use super::*;

fn add_function() -> FunctionDefinition {
    FunctionDefinition {
        parameters: vec![
            ArgDefinition::new("x", MetaFFIType::INT64.into()),
            ArgDefinition::new("y", MetaFFIType::INT64.into()),
        ],
        return_values: vec![ArgDefinition::new("r", MetaFFIType::INT64.into())],
        ..FunctionDefinition::new("add", "callable=add")
    }
}

fn counter_class() -> ClassDefinition {
    let this = || ArgDefinition::new("self", TypeInfo::new(MetaFFIType::HANDLE).with_alias("Counter"));
    ClassDefinition {
        name: "Counter".into(),
        function_path: "class=Counter".into(),
        constructors: vec![ConstructorDefinition {
            function: FunctionDefinition {
                return_values: vec![this()],
                ..FunctionDefinition::new("<init>", "callable=<init>")
            },
            parent: "Counter".into(),
        }],
        methods: vec![MethodDefinition {
            function: FunctionDefinition {
                parameters: vec![this()],
                ..FunctionDefinition::new("inc", "callable=inc,instance_required")
            },
            instance_required: true,
            parent: "Counter".into(),
        }],
        fields: vec![FieldDefinition {
            arg: ArgDefinition::new("value", MetaFFIType::INT64.into()),
            getter: Some(MethodDefinition {
                function: FunctionDefinition {
                    parameters: vec![this()],
                    return_values: vec![ArgDefinition::new("v", MetaFFIType::INT64.into())],
                    ..FunctionDefinition::new("get_value", "field=value,getter")
                },
                instance_required: true,
                parent: "Counter".into(),
            }),
            setter: None,
            parent: "Counter".into(),
        }],
        ..Default::default()
    }
}

fn one_module(m: ModuleDefinition) -> IdlDefinition {
    IdlDefinition {
        modules: vec![m],
        ..IdlDefinition::new("/tmp/counter.tabular")
    }
}

#[test]
fn minimal_document() {
    let text = r#"{"Modules":[{"Name":"m","Functions":[{"Name":"add","FunctionPath":"callable=add",
        "Parameters":[{"Name":"x","Type":{"StringType":"int64"}}]}]}]}"#;
    let def = IdlDefinition::from_json(text).unwrap();
    assert_eq!(def.modules.len(), 1);
    assert_eq!(def.modules[0].functions.len(), 1);
    let p = &def.modules[0].functions[0].parameters[0];
    assert_eq!(p.ty.ty, MetaFFIType::INT64);
    assert_eq!(p.dimensions, 0);
}

#[test]
fn empty_definition_is_canonical() {
    let def = IdlDefinition::from_json(r#"{"Modules":[]}"#).unwrap();
    assert_eq!(def, IdlDefinition::default());
    let text = def.to_json();
    assert_eq!(IdlDefinition::from_json(&text).unwrap(), def);
    assert!(text.contains("\"Modules\": []"));
}

#[test]
fn missing_name_cites_path() {
    let text = r#"{"Modules":[{"Name":"m","Functions":[{"FunctionPath":"callable=add"}]}]}"#;
    let err = IdlError::from(idl_schema().validate(&serde_json::from_str(text).unwrap()).unwrap_err());
    assert_eq!(err.path(), Some("$.Modules[0].Functions[0].Name"));
    assert!(IdlDefinition::from_json(text)
        .unwrap_err()
        .to_string()
        .contains("Modules[0].Functions[0].Name"));
}

#[test]
fn parents_restored_after_round_trip() {
    let mut m = ModuleDefinition::new("counter");
    m.classes.push(counter_class());
    let def = one_module(m);
    let back = IdlDefinition::from_json(&def.to_json()).unwrap();
    assert_eq!(back, def);
    let c = &back.modules[0].classes[0];
    assert!(c.constructors.iter().all(|k| k.parent == "Counter"));
    assert!(c.methods.iter().all(|k| k.parent == "Counter"));
    assert_eq!(c.fields[0].parent, "Counter");
    assert_eq!(c.fields[0].getter.as_ref().unwrap().parent, "Counter");
}

#[test]
fn finalize_merges_class_path() {
    let mut m = ModuleDefinition::new("counter");
    m.classes.push(counter_class());
    let mut def = one_module(m);
    def.finalize_construction().unwrap();
    let c = &def.modules[0].classes[0];
    assert_eq!(c.methods[0].function.function_path, "class=Counter,callable=inc,instance_required");
    assert_eq!(c.constructors[0].function.function_path, "class=Counter,callable=<init>");
    assert_eq!(
        c.fields[0].getter.as_ref().unwrap().function.function_path,
        "class=Counter,field=value,getter,instance_required"
    );
    let once = def.clone();
    def.finalize_construction().unwrap();
    assert_eq!(def, once);
}

#[test]
fn finalize_without_class_path_is_identity() {
    let mut class = counter_class();
    class.function_path.clear();
    class.methods[0].function.function_path = "class=Counter,callable=inc,instance_required".into();
    let mut m = ModuleDefinition::new("counter");
    m.classes.push(class);
    let mut def = one_module(m);
    def.finalize_construction().unwrap();
    assert_eq!(
        def.modules[0].classes[0].methods[0].function.function_path,
        "class=Counter,callable=inc,instance_required"
    );
}

#[test]
fn finalize_rejects_conflicts() {
    let mut class = counter_class();
    class.methods[0].function.function_path = "class=Other,callable=inc".into();
    let mut m = ModuleDefinition::new("counter");
    m.classes.push(class);
    let err = one_module(m).finalize_construction().unwrap_err();
    assert_eq!(err.path(), Some("$.Modules[0].Classes[0].Methods[0].FunctionPath"));
}

#[test]
fn semantic_rules() {
    let mut m = ModuleDefinition::new("m");
    m.functions = vec![add_function(), add_function()];
    let err = one_module(m.clone()).check().unwrap_err();
    assert_eq!(err.path(), Some("$.Modules[0].Functions[1].OverloadIndex"));
    m.functions[1].overload_index = 1;
    one_module(m).check().unwrap();

    let mut m = ModuleDefinition::new("m");
    m.globals.push(GlobalDefinition {
        arg: ArgDefinition::new("total", MetaFFIType::INT64.into()),
        getter: Some(add_function()),
        setter: None,
    });
    let err = one_module(m).check().unwrap_err();
    assert_eq!(err.path(), Some("$.Modules[0].Globals[0].Getter"));

    let mut class = counter_class();
    class.methods[0].function.parameters[0] = ArgDefinition::new("x", MetaFFIType::INT64.into());
    let mut m = ModuleDefinition::new("m");
    m.classes.push(class);
    let err = one_module(m).check().unwrap_err();
    assert_eq!(err.path(), Some("$.Modules[0].Classes[0].Methods[0].Parameters"));

    let mut arg = ArgDefinition::new("a", MetaFFIType::INT64.as_array().into());
    arg.dimensions = 2;
    let mut f = add_function();
    f.parameters[0] = arg;
    let mut m = ModuleDefinition::new("m");
    m.functions.push(f);
    let err = one_module(m).check().unwrap_err();
    assert_eq!(err.path(), Some("$.Modules[0].Functions[0].Parameters[0].Dimensions"));
}

proptest! {
    #[test]
    fn json_round_trip(def in strategies::definition()) {
        def.check().unwrap();
        let back = IdlDefinition::from_json(&def.to_json()).unwrap();
        prop_assert_eq!(back, def);
    }

    #[test]
    fn finalize_is_idempotent(mut def in strategies::definition()) {
        def.finalize_construction().unwrap();
        let once = def.clone();
        def.finalize_construction().unwrap();
        prop_assert_eq!(def, once);
    }
}
