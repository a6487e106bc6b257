//! Manifest to IDL.

use metaffi_core::idl::{
    ArgDefinition, ClassDefinition, ConstructorDefinition, FieldDefinition, FunctionDefinition, GlobalDefinition,
    IdlDefinition, IdlError, MethodDefinition, ModuleDefinition,
};
use metaffi_core::types::TypeInfo;

use crate::manifest::{ClassDecl, FnDecl, Manifest, VarDecl};

/// Module tag naming the runtime plugin that hosts the module.
pub const RUNTIME_TAG: &str = "runtime_plugin";
pub const RUNTIME_NAME: &str = "tabular";
pub const THIS: &str = "this_instance";

fn ret_names(rets: &[TypeInfo]) -> Vec<ArgDefinition> {
    match rets {
        [one] => vec![ArgDefinition::new("result", one.clone())],
        _ => rets
            .iter()
            .enumerate()
            .map(|(i, t)| ArgDefinition::new(format!("result{i}"), t.clone()))
            .collect(),
    }
}

fn function(f: &FnDecl, path: String, this: Option<&ClassDecl>) -> FunctionDefinition {
    let mut def = FunctionDefinition::new(f.name.clone(), path);
    def.parameters = this
        .map(|c| ArgDefinition::new(THIS, c.handle_type()))
        .into_iter()
        .chain(f.params.iter().map(|p| ArgDefinition::new(p.name.clone(), p.ty.clone())))
        .collect();
    def.return_values = ret_names(&f.rets);
    def.overload_index = f.overload_index;
    def
}

fn accessors(v: &VarDecl, path: &str, this: Option<&ClassDecl>) -> (Option<FunctionDefinition>, Option<FunctionDefinition>) {
    let params = |extra: Option<ArgDefinition>| {
        this.map(|c| ArgDefinition::new(THIS, c.handle_type()))
            .into_iter()
            .chain(extra)
            .collect::<Vec<_>>()
    };
    let getter = v.access.readable().then(|| {
        let mut f = FunctionDefinition::new(format!("get_{}", v.name), format!("{path},getter"));
        f.parameters = params(None);
        f.return_values = vec![ArgDefinition::new(v.name.clone(), v.ty.clone())];
        f
    });
    let setter = v.access.writable().then(|| {
        let mut f = FunctionDefinition::new(format!("set_{}", v.name), format!("{path},setter"));
        f.parameters = params(Some(ArgDefinition::new(v.name.clone(), v.ty.clone())));
        f
    });
    (getter, setter)
}

fn class(c: &ClassDecl) -> ClassDefinition {
    let method = |function, instance_required| MethodDefinition {
        function,
        instance_required,
        parent: c.name.clone(),
    };
    ClassDefinition {
        name: c.name.clone(),
        function_path: format!("class={}", c.name),
        constructors: c
            .constructors
            .iter()
            .map(|k| ConstructorDefinition {
                function: function(k, "callable=<init>".into(), None),
                parent: c.name.clone(),
            })
            .collect(),
        methods: c
            .methods
            .iter()
            .map(|m| {
                method(
                    function(&m.decl, format!("callable={}", m.decl.name), m.instance.then_some(c)),
                    m.instance,
                )
            })
            .collect(),
        fields: c
            .fields
            .iter()
            .map(|f| {
                let (g, s) = accessors(f, &format!("field={}", f.name), Some(c));
                FieldDefinition {
                    arg: ArgDefinition::new(f.name.clone(), f.ty.clone()),
                    getter: g.map(|g| method(g, true)),
                    setter: s.map(|s| method(s, true)),
                    parent: c.name.clone(),
                }
            })
            .collect(),
        ..Default::default()
    }
}

/// Builds the IDL for a manifest read from `source`.
pub fn to_idl(manifest: &Manifest, source: &str) -> Result<IdlDefinition, IdlError> {
    let mut def = IdlDefinition::new(source);
    let mut m = ModuleDefinition::new(manifest.module.clone());
    m.idl_full_path = source.to_string();
    m.tags.insert(RUNTIME_TAG.into(), RUNTIME_NAME.into());
    m.functions = manifest
        .functions
        .iter()
        .map(|f| function(f, format!("callable={}", f.name), None))
        .collect();
    m.globals = manifest
        .globals
        .iter()
        .map(|g| {
            let (getter, setter) = accessors(g, &format!("global={}", g.name), None);
            GlobalDefinition {
                arg: ArgDefinition::new(g.name.clone(), g.ty.clone()),
                getter,
                setter,
            }
        })
        .collect();
    m.classes = manifest.classes.iter().map(class).collect();
    def.modules.push(m);
    def.link();
    def.finalize_construction()?;
    def.check()?;
    Ok(def)
}
