//! The IDL entity tree and its JSON form.
//!
//! Documents are checked in two passes: structurally against the schema
//! shipped in `schema/idl.schema.json`, then semantically (overload
//! uniqueness, getter/setter arity, instance parameters). Both report the
//! JSON path of the offending node.

mod check;
mod finalize;
pub mod schema;
#[cfg(any(test, feature = "strategies"))]
pub mod strategies;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{MetaFFIType, TypeInfo};

pub use schema::{idl_schema, Schema, SchemaViolation};

pub type Tags = BTreeMap<String, String>;

/// Marks `Dimensions` as absent in the document; filled from the type on load.
const UNSET_DIMENSIONS: i64 = i64::MIN;

fn unset_dimensions() -> i64 {
    UNSET_DIMENSIONS
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdlError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Schema(#[from] SchemaViolation),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl IdlError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl fmt::Display) -> IdlError {
        IdlError::Invalid {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// JSON path of the offending node, if known.
    pub fn path(&self) -> Option<&str> {
        match self {
            IdlError::Json(_) => None,
            IdlError::Schema(v) => Some(&v.path),
            IdlError::Invalid { path, .. } => Some(path),
        }
    }
}

mod type_info_json {
    use super::*;
    use crate::types::type_name_to_constant;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        #[serde(rename = "StringType")]
        string_type: String,
        #[serde(rename = "Type", default)]
        ty: Option<u64>,
        #[serde(rename = "Alias", default, skip_serializing_if = "Option::is_none")]
        alias: Option<String>,
        #[serde(rename = "Dimensions", default)]
        dimensions: Option<i64>,
    }

    pub fn serialize<S: Serializer>(t: &TypeInfo, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            string_type: t.ty.name(),
            ty: Some(t.ty.0),
            alias: t.alias.clone(),
            dimensions: Some(t.dimensions),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TypeInfo, D::Error> {
        let r = Repr::deserialize(d)?;
        let info = from_parts(&r.string_type, r.ty, r.alias, r.dimensions)
            .map_err(|(field, msg)| D::Error::custom(format!("{field}: {msg}")))?;
        Ok(info)
    }

    /// Shared by the deserializer and the schema checker.
    pub(crate) fn from_parts(
        string_type: &str,
        word: Option<u64>,
        alias: Option<String>,
        dimensions: Option<i64>,
    ) -> Result<TypeInfo, (&'static str, String)> {
        let ty = type_name_to_constant(string_type).map_err(|e| ("StringType", e.to_string()))?;
        if let Some(bits) = word {
            if bits != ty.0 {
                return Err((
                    "Type",
                    format!("type word {bits:#x} does not match StringType '{string_type}'"),
                ));
            }
        }
        let info = TypeInfo {
            ty,
            alias,
            dimensions: dimensions.unwrap_or(if ty.is_array() { 1 } else { 0 }),
        };
        info.validate().map_err(|e| ("Dimensions", e.to_string()))?;
        Ok(info)
    }
}

pub(crate) use type_info_json::from_parts as type_info_from_parts;

/// Root of an IDL document.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IdlDefinition {
    #[serde(rename = "IDLSource", default)]
    pub idl_source: String,
    #[serde(rename = "IDLExtension", default)]
    pub idl_extension: String,
    #[serde(rename = "IDLFileNameWithExtension", default)]
    pub idl_filename_with_extension: String,
    #[serde(rename = "IDLFullPath", default)]
    pub idl_full_path: String,
    #[serde(rename = "MetaFFIGuestLib", default)]
    pub metaffi_guest_lib: String,
    #[serde(rename = "Modules")]
    pub modules: Vec<ModuleDefinition>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct ModuleDefinition {
    pub name: String,
    #[serde(default)]
    pub comment: String,
    #[serde(default)]
    pub tags: Tags,
    #[serde(rename = "IDLFullPath", default)]
    pub idl_full_path: String,
    #[serde(default)]
    pub functions: Vec<FunctionDefinition>,
    #[serde(default)]
    pub classes: Vec<ClassDefinition>,
    #[serde(default)]
    pub globals: Vec<GlobalDefinition>,
    #[serde(default)]
    pub external_resources: Vec<String>,
}

/// A global, field, parameter or return value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct ArgDefinition {
    pub name: String,
    #[serde(rename = "Type", with = "type_info_json")]
    pub ty: TypeInfo,
    #[serde(default)]
    pub comment: String,
    #[serde(default)]
    pub tags: Tags,
    #[serde(default = "unset_dimensions")]
    pub dimensions: i64,
    #[serde(default)]
    pub is_optional: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct FunctionDefinition {
    pub name: String,
    #[serde(default)]
    pub comment: String,
    #[serde(default)]
    pub tags: Tags,
    #[serde(default)]
    pub function_path: String,
    #[serde(default)]
    pub parameters: Vec<ArgDefinition>,
    #[serde(default)]
    pub return_values: Vec<ArgDefinition>,
    #[serde(default)]
    pub overload_index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct GlobalDefinition {
    #[serde(flatten)]
    pub arg: ArgDefinition,
    #[serde(default)]
    pub getter: Option<FunctionDefinition>,
    #[serde(default)]
    pub setter: Option<FunctionDefinition>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct ClassDefinition {
    pub name: String,
    #[serde(default)]
    pub comment: String,
    #[serde(default)]
    pub tags: Tags,
    /// Shared prefix of member paths, merged in by [`IdlDefinition::finalize_construction`].
    #[serde(default)]
    pub function_path: String,
    #[serde(default)]
    pub constructors: Vec<ConstructorDefinition>,
    #[serde(default)]
    pub methods: Vec<MethodDefinition>,
    #[serde(default)]
    pub fields: Vec<FieldDefinition>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConstructorDefinition {
    #[serde(flatten)]
    pub function: FunctionDefinition,
    /// Name of the owning class. Not serialized; restored on load.
    #[serde(skip)]
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct MethodDefinition {
    #[serde(flatten)]
    pub function: FunctionDefinition,
    #[serde(default)]
    pub instance_required: bool,
    #[serde(skip)]
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "PascalCase")]
pub struct FieldDefinition {
    #[serde(flatten)]
    pub arg: ArgDefinition,
    #[serde(default)]
    pub getter: Option<MethodDefinition>,
    #[serde(default)]
    pub setter: Option<MethodDefinition>,
    #[serde(skip)]
    pub parent: String,
}

impl IdlDefinition {
    pub fn new(source: impl Into<String>) -> IdlDefinition {
        let source = source.into();
        let path = std::path::Path::new(&source);
        IdlDefinition {
            idl_extension: path
                .extension()
                .map(|e| format!(".{}", e.to_string_lossy()))
                .unwrap_or_default(),
            idl_filename_with_extension: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            idl_full_path: source.clone(),
            metaffi_guest_lib: path
                .file_stem()
                .map(|s| format!("{}_MetaFFIGuest", s.to_string_lossy()))
                .unwrap_or_default(),
            idl_source: source,
            modules: Vec::new(),
        }
    }

    /// Parses, validates and links a document.
    pub fn from_json(text: &str) -> Result<IdlDefinition, IdlError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| IdlError::Json(e.to_string()))?;
        idl_schema().validate(&doc)?;
        let mut def: IdlDefinition =
            serde_json::from_value(doc).map_err(|e| IdlError::invalid("$", e))?;
        def.link();
        def.check()?;
        Ok(def)
    }

    /// Pretty JSON with a fixed key order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("IDL trees always serialize")
    }

    /// Fills defaulted dimensions and parent references.
    pub fn link(&mut self) {
        fn fill(arg: &mut ArgDefinition) {
            if arg.dimensions == UNSET_DIMENSIONS {
                arg.dimensions = arg.ty.dimensions;
            }
        }
        fn fill_fn(f: &mut FunctionDefinition) {
            f.parameters.iter_mut().chain(&mut f.return_values).for_each(fill);
        }
        for m in &mut self.modules {
            m.functions.iter_mut().for_each(fill_fn);
            for g in &mut m.globals {
                fill(&mut g.arg);
                g.getter.iter_mut().chain(&mut g.setter).for_each(fill_fn);
            }
            for c in &mut m.classes {
                let parent = c.name.clone();
                for ctor in &mut c.constructors {
                    ctor.parent = parent.clone();
                    fill_fn(&mut ctor.function);
                }
                for meth in &mut c.methods {
                    meth.parent = parent.clone();
                    fill_fn(&mut meth.function);
                }
                for field in &mut c.fields {
                    field.parent = parent.clone();
                    fill(&mut field.arg);
                    for acc in field.getter.iter_mut().chain(&mut field.setter) {
                        acc.parent = parent.clone();
                        fill_fn(&mut acc.function);
                    }
                }
            }
        }
    }

    /// Semantic validation of an already-parsed tree.
    pub fn check(&self) -> Result<(), IdlError> {
        check::check(self)
    }

    /// Merges each class `FunctionPath` into its members' paths and tags
    /// instance members with `instance_required`. Idempotent.
    pub fn finalize_construction(&mut self) -> Result<(), IdlError> {
        finalize::finalize(self)
    }

    pub fn module(&self, name: &str) -> Option<&ModuleDefinition> {
        self.modules.iter().find(|m| m.name == name)
    }
}

impl ModuleDefinition {
    pub fn new(name: impl Into<String>) -> ModuleDefinition {
        ModuleDefinition {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn class(&self, name: &str) -> Option<&ClassDefinition> {
        self.classes.iter().find(|c| c.name == name)
    }
}

impl ArgDefinition {
    pub fn new(name: impl Into<String>, ty: TypeInfo) -> ArgDefinition {
        ArgDefinition {
            name: name.into(),
            dimensions: ty.dimensions,
            ty,
            comment: String::new(),
            tags: Tags::new(),
            is_optional: false,
        }
    }

    pub fn is_handle(&self) -> bool {
        self.ty.ty == MetaFFIType::HANDLE
    }
}

impl FunctionDefinition {
    pub fn new(name: impl Into<String>, function_path: impl Into<String>) -> FunctionDefinition {
        FunctionDefinition {
            name: name.into(),
            function_path: function_path.into(),
            ..Default::default()
        }
    }

    pub fn param_types(&self) -> Vec<TypeInfo> {
        self.parameters.iter().map(|a| a.ty.clone()).collect()
    }

    pub fn return_types(&self) -> Vec<TypeInfo> {
        self.return_values.iter().map(|a| a.ty.clone()).collect()
    }
}

#[cfg(test)]
mod tests;
