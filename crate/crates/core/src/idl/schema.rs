//! A small JSON Schema interpreter for the shipped IDL schema.
//!
//! Supports the keywords the schema uses: `$ref` into `$defs`, `anyOf`,
//! `type`, `properties`, `required`, `additionalProperties`, `items`,
//! `minLength`, `minimum`, plus `x-metaffi-type-info`, which checks that a
//! type descriptor names a known type consistently.

use std::sync::OnceLock;

use serde_json::{Map, Value};
use thiserror::Error;

const IDL_SCHEMA: &str = include_str!("../../schema/idl.schema.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaViolation {
    pub path: String,
    pub message: String,
}

pub struct Schema {
    root: Value,
}

/// The IDL schema document as shipped.
pub fn idl_schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| Schema::parse(IDL_SCHEMA).expect("bundled schema is valid JSON"))
}

pub fn idl_schema_text() -> &'static str {
    IDL_SCHEMA
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn violation(path: &str, message: impl Into<String>) -> SchemaViolation {
    SchemaViolation {
        path: path.to_string(),
        message: message.into(),
    }
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema, serde_json::Error> {
        Ok(Schema {
            root: serde_json::from_str(text)?,
        })
    }

    pub fn validate(&self, doc: &Value) -> Result<(), SchemaViolation> {
        self.check(&self.root, doc, "$")
    }

    fn resolve(&self, reference: &str) -> Option<&Value> {
        let name = reference.strip_prefix("#/$defs/")?;
        self.root.get("$defs")?.get(name)
    }

    fn check(&self, schema: &Value, v: &Value, path: &str) -> Result<(), SchemaViolation> {
        let Some(s) = schema.as_object() else {
            return Ok(());
        };
        if let Some(r) = s.get("$ref").and_then(Value::as_str) {
            let target = self
                .resolve(r)
                .ok_or_else(|| violation(path, format!("schema reference {r} not found")))?;
            self.check(target, v, path)?;
        }
        if let Some(branches) = s.get("anyOf").and_then(Value::as_array) {
            self.check_any_of(branches, v, path)?;
        }
        if let Some(t) = s.get("type") {
            let actual = type_name(v);
            let ok = match t {
                Value::String(expected) => type_matches(expected, actual),
                Value::Array(options) => options
                    .iter()
                    .filter_map(Value::as_str)
                    .any(|e| type_matches(e, actual)),
                _ => true,
            };
            if !ok {
                return Err(violation(path, format!("expected {t}, found {actual}")));
            }
        }
        match v {
            Value::Object(obj) => self.check_object(s, obj, path)?,
            Value::Array(items) => {
                if let Some(item_schema) = s.get("items") {
                    for (i, item) in items.iter().enumerate() {
                        self.check(item_schema, item, &format!("{path}[{i}]"))?;
                    }
                }
            }
            Value::String(text) => {
                if let Some(min) = s.get("minLength").and_then(Value::as_u64) {
                    if (text.chars().count() as u64) < min {
                        return Err(violation(path, format!("shorter than {min} characters")));
                    }
                }
            }
            Value::Number(n) => {
                if let Some(min) = s.get("minimum").and_then(Value::as_i64) {
                    let below = match (n.as_i64(), n.as_u64()) {
                        (Some(x), _) => x < min,
                        (None, Some(_)) => false,
                        _ => n.as_f64().is_some_and(|x| x < min as f64),
                    };
                    if below {
                        return Err(violation(path, format!("{n} is below the minimum {min}")));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn check_any_of(&self, branches: &[Value], v: &Value, path: &str) -> Result<(), SchemaViolation> {
        let mut best: Option<SchemaViolation> = None;
        for branch in branches {
            match self.check(branch, v, path) {
                Ok(()) => return Ok(()),
                Err(e) => {
                    // Report the branch that got furthest into the value.
                    if best.as_ref().is_none_or(|b| e.path.len() > b.path.len()) {
                        best = Some(e);
                    }
                }
            }
        }
        match best {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    fn check_object(
        &self,
        s: &Map<String, Value>,
        obj: &Map<String, Value>,
        path: &str,
    ) -> Result<(), SchemaViolation> {
        if let Some(required) = s.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(violation(
                        &format!("{path}.{key}"),
                        "missing required property",
                    ));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (key, value) in obj {
            let child = format!("{path}.{key}");
            match props.and_then(|p| p.get(key)) {
                Some(prop_schema) => self.check(prop_schema, value, &child)?,
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => {
                        return Err(violation(&child, "unknown property"));
                    }
                    Some(extra @ Value::Object(_)) => self.check(extra, value, &child)?,
                    _ => {}
                },
            }
        }
        if s.get("x-metaffi-type-info").and_then(Value::as_bool) == Some(true) {
            check_type_info(obj, path)?;
        }
        Ok(())
    }
}

fn type_matches(expected: &str, actual: &str) -> bool {
    expected == actual || (expected == "number" && actual == "integer")
}

fn check_type_info(obj: &Map<String, Value>, path: &str) -> Result<(), SchemaViolation> {
    let string_type = obj.get("StringType").and_then(Value::as_str).unwrap_or_default();
    let word = obj.get("Type").and_then(Value::as_u64);
    let alias = obj.get("Alias").and_then(Value::as_str).map(str::to_string);
    let dims = obj.get("Dimensions").and_then(Value::as_i64);
    super::type_info_from_parts(string_type, word, alias, dims)
        .map(|_| ())
        .map_err(|(field, msg)| violation(&format!("{path}.{field}"), msg))
}
