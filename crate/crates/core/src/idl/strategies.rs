//! Proptest generators for valid IDL trees covering every entity kind.

use proptest::prelude::*;

use super::*;
use crate::types::{TypeInfo, DYNAMIC_DIMENSIONS, TYPE_TABLE};

fn text() -> impl Strategy<Value = String> {
    "\\PC{0,12}"
}

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_]{0,8}"
}

fn tags() -> impl Strategy<Value = Tags> {
    prop::collection::btree_map("[a-z_]{1,6}", text(), 0..3)
}

pub fn type_info() -> impl Strategy<Value = TypeInfo> {
    let base = prop::sample::select(
        TYPE_TABLE
            .iter()
            .map(|(_, t)| *t)
            .filter(|t| *t != MetaFFIType::ARRAY)
            .collect::<Vec<_>>(),
    );
    (
        base,
        prop_oneof![Just(0i64), 1i64..4, Just(DYNAMIC_DIMENSIONS)],
        prop::option::of("[A-Za-z.]{1,10}"),
    )
        .prop_map(|(ty, dims, alias)| {
            let ty = if dims != 0 { ty.as_array() } else { ty };
            TypeInfo {
                ty,
                alias,
                dimensions: dims,
            }
        })
}

pub fn arg() -> impl Strategy<Value = ArgDefinition> {
    (ident(), type_info(), text(), tags(), any::<bool>()).prop_map(|(name, ty, comment, tags, opt)| {
        ArgDefinition {
            comment,
            tags,
            is_optional: opt,
            ..ArgDefinition::new(name, ty)
        }
    })
}

fn handle_arg(class: &str) -> ArgDefinition {
    ArgDefinition::new("this", TypeInfo::new(MetaFFIType::HANDLE).with_alias(class))
}

fn function_body() -> impl Strategy<Value = FunctionDefinition> {
    (
        ident(),
        text(),
        tags(),
        prop::option::of("[a-z]{1,6}"),
        prop::collection::vec(arg(), 0..3),
        prop::collection::vec(arg(), 0..2),
        0i64..3,
    )
        .prop_map(|(name, comment, tags, tag, parameters, return_values, overload_index)| {
            let mut function_path = format!("callable={name}");
            if let Some(t) = tag {
                function_path.push(',');
                function_path.push_str(&t);
            }
            FunctionDefinition {
                name,
                comment,
                tags,
                function_path,
                parameters,
                return_values,
                overload_index,
            }
        })
}

/// Names are made unique by suffixing the position.
fn distinct<T>(mut items: Vec<T>, name: impl Fn(&mut T) -> &mut String) -> Vec<T> {
    for (i, item) in items.iter_mut().enumerate() {
        let n = name(item);
        n.push_str(&format!("_{i}"));
    }
    items
}

#[derive(Debug, Clone, Copy)]
enum Access {
    Read,
    Write,
    ReadWrite,
}

fn access() -> impl Strategy<Value = Access> {
    prop_oneof![Just(Access::Read), Just(Access::Write), Just(Access::ReadWrite)]
}

fn getter(value: &ArgDefinition, lead: Option<ArgDefinition>) -> FunctionDefinition {
    FunctionDefinition {
        name: format!("get_{}", value.name),
        function_path: format!("callable=get_{},getter", value.name),
        parameters: lead.into_iter().collect(),
        return_values: vec![ArgDefinition::new("value", value.ty.clone())],
        ..Default::default()
    }
}

fn setter(value: &ArgDefinition, lead: Option<ArgDefinition>) -> FunctionDefinition {
    let mut parameters: Vec<_> = lead.into_iter().collect();
    parameters.push(ArgDefinition::new("value", value.ty.clone()));
    FunctionDefinition {
        name: format!("set_{}", value.name),
        function_path: format!("callable=set_{},setter", value.name),
        parameters,
        ..Default::default()
    }
}

pub fn global() -> impl Strategy<Value = GlobalDefinition> {
    (arg(), access()).prop_map(|(arg, access)| {
        let (g, s) = match access {
            Access::Read => (Some(getter(&arg, None)), None),
            Access::Write => (None, Some(setter(&arg, None))),
            Access::ReadWrite => (Some(getter(&arg, None)), Some(setter(&arg, None))),
        };
        GlobalDefinition {
            arg,
            getter: g,
            setter: s,
        }
    })
}

pub fn class() -> impl Strategy<Value = ClassDefinition> {
    (
        ident(),
        text(),
        tags(),
        any::<bool>(),
        prop::collection::vec(function_body(), 0..2),
        prop::collection::vec((function_body(), any::<bool>()), 0..3),
        prop::collection::vec((arg(), access(), any::<bool>()), 0..3),
    )
        .prop_map(|(name, comment, tags, with_path, ctors, methods, fields)| {
            let constructors = distinct(ctors, |f| &mut f.name)
                .into_iter()
                .map(|mut f| {
                    f.return_values.insert(0, handle_arg(&name));
                    ConstructorDefinition {
                        function: f,
                        parent: name.clone(),
                    }
                })
                .collect();
            let methods = distinct(methods, |(f, _)| &mut f.name)
                .into_iter()
                .map(|(mut f, instance)| {
                    if instance {
                        f.parameters.insert(0, handle_arg(&name));
                    }
                    MethodDefinition {
                        function: f,
                        instance_required: instance,
                        parent: name.clone(),
                    }
                })
                .collect();
            let fields = distinct(fields, |(a, _, _)| &mut a.name)
                .into_iter()
                .map(|(arg, access, instance)| {
                    let lead = || instance.then(|| handle_arg(&name));
                    let wrap = |f: FunctionDefinition| MethodDefinition {
                        function: f,
                        instance_required: instance,
                        parent: name.clone(),
                    };
                    let (g, s) = match access {
                        Access::Read => (Some(getter(&arg, lead())), None),
                        Access::Write => (None, Some(setter(&arg, lead()))),
                        Access::ReadWrite => {
                            (Some(getter(&arg, lead())), Some(setter(&arg, lead())))
                        }
                    };
                    FieldDefinition {
                        arg,
                        getter: g.map(wrap),
                        setter: s.map(wrap),
                        parent: name.clone(),
                    }
                })
                .collect();
            ClassDefinition {
                function_path: if with_path {
                    format!("class={name}")
                } else {
                    String::new()
                },
                name,
                comment,
                tags,
                constructors,
                methods,
                fields,
            }
        })
}

pub fn module() -> impl Strategy<Value = ModuleDefinition> {
    (
        ident(),
        text(),
        tags(),
        text(),
        prop::collection::vec(function_body(), 0..4),
        prop::collection::vec(class(), 0..3),
        prop::collection::vec(global(), 0..3),
        prop::collection::vec(text(), 0..3),
    )
        .prop_map(
            |(name, comment, tags, path, functions, classes, globals, external_resources)| {
                ModuleDefinition {
                    name,
                    comment,
                    tags,
                    idl_full_path: path,
                    functions: distinct(functions, |f| &mut f.name),
                    classes: distinct(classes, |c| &mut c.name)
                        .into_iter()
                        .map(|mut c| {
                            // Keep parent names and aliases in step with the suffixed name.
                            if let Some((old, _)) = c.name.clone().rsplit_once('_') {
                                rename_handles(&mut c, old);
                            }
                            c
                        })
                        .collect(),
                    globals: distinct(globals, |g| &mut g.arg.name),
                    external_resources,
                }
            },
        )
}

fn rename_handles(c: &mut ClassDefinition, old: &str) {
    let new = c.name.clone();
    let fix = |a: &mut ArgDefinition| {
        if a.is_handle() && a.ty.alias.as_deref() == Some(old) {
            a.ty.alias = Some(new.clone());
        }
    };
    let fix_fn = |f: &mut FunctionDefinition| {
        f.parameters.iter_mut().chain(&mut f.return_values).for_each(fix);
    };
    if c.function_path == format!("class={old}") {
        c.function_path = format!("class={new}");
    }
    c.constructors.iter_mut().for_each(|k| {
        k.parent = new.clone();
        fix_fn(&mut k.function)
    });
    c.methods.iter_mut().for_each(|m| {
        m.parent = new.clone();
        fix_fn(&mut m.function)
    });
    for f in &mut c.fields {
        f.parent = new.clone();
        for m in f.getter.iter_mut().chain(&mut f.setter) {
            m.parent = new.clone();
            fix_fn(&mut m.function);
        }
    }
}

pub fn definition() -> impl Strategy<Value = IdlDefinition> {
    (
        text(),
        text(),
        text(),
        text(),
        text(),
        prop::collection::vec(module(), 0..3),
    )
        .prop_map(|(src, ext, file, full, lib, modules)| IdlDefinition {
            idl_source: src,
            idl_extension: ext,
            idl_filename_with_extension: file,
            idl_full_path: full,
            metaffi_guest_lib: lib,
            modules,
        })
}
