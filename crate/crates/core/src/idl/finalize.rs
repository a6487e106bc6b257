use super::*;
use crate::function_path::{FunctionPath, PathEntry};

pub const INSTANCE_REQUIRED: &str = "instance_required";

/// Class entries go first, then the member's own. Entries already present
/// with the same value are skipped, so running twice changes nothing.
fn merge(class: &FunctionPath, member: &str, instance: bool, path: &str) -> Result<String, IdlError> {
    let own = FunctionPath::parse(member)
        .map_err(|e| IdlError::invalid(format!("{path}.FunctionPath"), e))?;
    let mut merged = FunctionPath::new();
    let err = |e| IdlError::invalid(format!("{path}.FunctionPath"), e);
    for entry in class.entries() {
        match entry {
            PathEntry::Pair(k, v) => match own.get(k) {
                Some(mine) if mine == v => {}
                Some(mine) => {
                    return Err(IdlError::invalid(
                        format!("{path}.FunctionPath"),
                        format!("'{k}={mine}' conflicts with class entry '{k}={v}'"),
                    ))
                }
                None => merged = merged.with_pair(k, v).map_err(err)?,
            },
            PathEntry::Tag(t) if !own.has_tag(t) => merged = merged.with_tag(t).map_err(err)?,
            PathEntry::Tag(_) => {}
        }
    }
    for entry in own.entries() {
        merged = match entry {
            PathEntry::Pair(k, v) => merged.with_pair(k, v),
            PathEntry::Tag(t) => merged.with_tag(t),
        }
        .map_err(err)?;
    }
    if instance && !merged.has_tag(INSTANCE_REQUIRED) {
        merged = merged.with_tag(INSTANCE_REQUIRED).map_err(err)?;
    }
    Ok(merged.to_string())
}

pub(super) fn finalize(def: &mut IdlDefinition) -> Result<(), IdlError> {
    for (mi, m) in def.modules.iter_mut().enumerate() {
        for (ci, c) in m.classes.iter_mut().enumerate() {
            let cp = format!("$.Modules[{mi}].Classes[{ci}]");
            let class = FunctionPath::parse(&c.function_path)
                .map_err(|e| IdlError::invalid(format!("{cp}.FunctionPath"), e))?;
            for (i, k) in c.constructors.iter_mut().enumerate() {
                let p = format!("{cp}.Constructors[{i}]");
                k.function.function_path = merge(&class, &k.function.function_path, false, &p)?;
            }
            for (i, m) in c.methods.iter_mut().enumerate() {
                let p = format!("{cp}.Methods[{i}]");
                m.function.function_path =
                    merge(&class, &m.function.function_path, m.instance_required, &p)?;
            }
            for (i, f) in c.fields.iter_mut().enumerate() {
                for (acc, name) in [(&mut f.getter, "Getter"), (&mut f.setter, "Setter")] {
                    if let Some(m) = acc {
                        let p = format!("{cp}.Fields[{i}].{name}");
                        m.function.function_path =
                            merge(&class, &m.function.function_path, m.instance_required, &p)?;
                    }
                }
            }
        }
    }
    Ok(())
}
