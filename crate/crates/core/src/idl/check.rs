use std::collections::HashSet;

use super::*;
use crate::function_path::FunctionPath;

pub(super) fn check(def: &IdlDefinition) -> Result<(), IdlError> {
    for (mi, m) in def.modules.iter().enumerate() {
        let mp = format!("$.Modules[{mi}]");
        check_overloads(m.functions.iter(), &format!("{mp}.Functions"))?;
        for (fi, f) in m.functions.iter().enumerate() {
            check_function(f, &format!("{mp}.Functions[{fi}]"))?;
        }
        unique_names(m.classes.iter().map(|c| c.name.as_str()), &format!("{mp}.Classes"))?;
        unique_names(m.globals.iter().map(|g| g.arg.name.as_str()), &format!("{mp}.Globals"))?;
        for (gi, g) in m.globals.iter().enumerate() {
            let gp = format!("{mp}.Globals[{gi}]");
            check_arg(&g.arg, &gp)?;
            check_accessors(&g.arg, g.getter.as_ref(), g.setter.as_ref(), 0, 0, &gp)?;
            for (acc, name) in [(&g.getter, "Getter"), (&g.setter, "Setter")] {
                if let Some(f) = acc {
                    check_function(f, &format!("{gp}.{name}"))?;
                }
            }
        }
        for (ci, c) in m.classes.iter().enumerate() {
            check_class(c, &format!("{mp}.Classes[{ci}]"))?;
        }
    }
    Ok(())
}

fn unique_names<'a>(names: impl Iterator<Item = &'a str>, path: &str) -> Result<(), IdlError> {
    let mut seen = HashSet::new();
    for (i, n) in names.enumerate() {
        if !seen.insert(n) {
            return Err(IdlError::invalid(format!("{path}[{i}].Name"), format!("duplicate name '{n}'")));
        }
    }
    Ok(())
}

fn check_overloads<'a>(
    fns: impl Iterator<Item = &'a FunctionDefinition>,
    path: &str,
) -> Result<(), IdlError> {
    let mut seen = HashSet::new();
    for (i, f) in fns.enumerate() {
        if !seen.insert((f.name.as_str(), f.overload_index)) {
            return Err(IdlError::invalid(
                format!("{path}[{i}].OverloadIndex"),
                format!("'{}' overload {} is defined twice", f.name, f.overload_index),
            ));
        }
    }
    Ok(())
}

fn check_arg(a: &ArgDefinition, path: &str) -> Result<(), IdlError> {
    if a.dimensions != a.ty.dimensions {
        return Err(IdlError::invalid(
            format!("{path}.Dimensions"),
            format!("{} differs from Type.Dimensions {}", a.dimensions, a.ty.dimensions),
        ));
    }
    Ok(())
}

fn check_function(f: &FunctionDefinition, path: &str) -> Result<(), IdlError> {
    if f.overload_index < 0 {
        return Err(IdlError::invalid(format!("{path}.OverloadIndex"), "must be >= 0"));
    }
    FunctionPath::parse(&f.function_path)
        .map_err(|e| IdlError::invalid(format!("{path}.FunctionPath"), e))?;
    for (i, a) in f.parameters.iter().enumerate() {
        check_arg(a, &format!("{path}.Parameters[{i}]"))?;
    }
    for (i, a) in f.return_values.iter().enumerate() {
        check_arg(a, &format!("{path}.ReturnValues[{i}]"))?;
    }
    Ok(())
}

fn check_method(m: &MethodDefinition, class: &str, path: &str) -> Result<(), IdlError> {
    check_function(&m.function, path)?;
    if m.instance_required {
        let first = m.function.parameters.first();
        let ok = first.is_some_and(|p| {
            p.is_handle() && p.ty.alias.as_deref().is_none_or(|alias| alias == class)
        });
        if !ok {
            return Err(IdlError::invalid(
                format!("{path}.Parameters"),
                format!("instance method must take a '{class}' handle first"),
            ));
        }
    }
    Ok(())
}

/// Getter: `instance` params, one return of the value type. Setter: `instance`
/// params plus the value, no returns.
fn check_accessors<F>(
    value: &ArgDefinition,
    getter: Option<&F>,
    setter: Option<&F>,
    getter_instance: usize,
    setter_instance: usize,
    path: &str,
) -> Result<(), IdlError>
where
    F: AsRef<FunctionDefinition>,
{
    if getter.is_none() && setter.is_none() {
        return Err(IdlError::invalid(path, "needs a Getter or a Setter"));
    }
    let same = |a: &ArgDefinition| a.ty.ty == value.ty.ty && a.ty.dimensions == value.ty.dimensions;
    if let Some(g) = getter.map(AsRef::as_ref) {
        let ok = g.parameters.len() == getter_instance
            && g.return_values.len() == 1
            && same(&g.return_values[0]);
        if !ok {
            return Err(IdlError::invalid(
                format!("{path}.Getter"),
                format!(
                    "getter must take {getter_instance} parameter(s) and return one {}",
                    value.ty
                ),
            ));
        }
    }
    if let Some(s) = setter.map(AsRef::as_ref) {
        let ok = s.parameters.len() == setter_instance + 1
            && s.return_values.is_empty()
            && same(&s.parameters[setter_instance]);
        if !ok {
            return Err(IdlError::invalid(
                format!("{path}.Setter"),
                format!("setter must take a {} and return nothing", value.ty),
            ));
        }
    }
    Ok(())
}

impl AsRef<FunctionDefinition> for FunctionDefinition {
    fn as_ref(&self) -> &FunctionDefinition {
        self
    }
}

impl AsRef<FunctionDefinition> for MethodDefinition {
    fn as_ref(&self) -> &FunctionDefinition {
        &self.function
    }
}

fn check_class(c: &ClassDefinition, path: &str) -> Result<(), IdlError> {
    FunctionPath::parse(&c.function_path)
        .map_err(|e| IdlError::invalid(format!("{path}.FunctionPath"), e))?;
    check_overloads(c.constructors.iter().map(|k| &k.function), &format!("{path}.Constructors"))?;
    check_overloads(c.methods.iter().map(|k| &k.function), &format!("{path}.Methods"))?;
    unique_names(c.fields.iter().map(|f| f.arg.name.as_str()), &format!("{path}.Fields"))?;
    for (i, k) in c.constructors.iter().enumerate() {
        let kp = format!("{path}.Constructors[{i}]");
        check_function(&k.function, &kp)?;
        if !k.function.return_values.iter().any(ArgDefinition::is_handle) {
            return Err(IdlError::invalid(
                format!("{kp}.ReturnValues"),
                format!("constructor must return a '{}' handle", c.name),
            ));
        }
    }
    for (i, m) in c.methods.iter().enumerate() {
        check_method(m, &c.name, &format!("{path}.Methods[{i}]"))?;
    }
    for (i, f) in c.fields.iter().enumerate() {
        let fp = format!("{path}.Fields[{i}]");
        check_arg(&f.arg, &fp)?;
        let inst = |m: &Option<MethodDefinition>| m.as_ref().map_or(0, |m| m.instance_required as usize);
        check_accessors(
            &f.arg,
            f.getter.as_ref(),
            f.setter.as_ref(),
            inst(&f.getter),
            inst(&f.setter),
            &fp,
        )?;
        for (acc, name) in [(&f.getter, "Getter"), (&f.setter, "Setter")] {
            if let Some(m) = acc {
                check_method(m, &c.name, &format!("{fp}.{name}"))?;
            }
        }
    }
    Ok(())
}
