//! MetaFFI type constants and signature type descriptors.
//!
//! Every base type occupies one bit of a 64-bit word. Arrays are the base
//! type OR'd with [`MetaFFIType::ARRAY`], so `int64_array` is
//! `INT64 | ARRAY`. The bare `ARRAY` constant names an array whose element
//! type is left open.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// 64-bit MetaFFI type word (`metaffi_type`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(transparent)]
pub struct MetaFFIType(pub u64);

/// `metaffi_size`.
pub type MetaFFISize = u64;

macro_rules! type_table {
    ($($konst:ident = $bit:expr, $name:literal;)*) => {
        impl MetaFFIType {
            $(pub const $konst: MetaFFIType = MetaFFIType(1u64 << $bit);)*
        }

        /// The 24 base names in table order together with their constants.
        pub const TYPE_TABLE: &[(&str, MetaFFIType)] = &[$(($name, MetaFFIType::$konst)),*];
    };
}

type_table! {
    FLOAT64 = 0, "float64";
    FLOAT32 = 1, "float32";
    INT8 = 2, "int8";
    INT16 = 3, "int16";
    INT32 = 4, "int32";
    INT64 = 5, "int64";
    UINT8 = 6, "uint8";
    UINT16 = 7, "uint16";
    UINT32 = 8, "uint32";
    UINT64 = 9, "uint64";
    BOOL = 10, "bool";
    CHAR8 = 11, "char8";
    STRING8 = 12, "string8";
    CHAR16 = 13, "char16";
    STRING16 = 14, "string16";
    CHAR32 = 15, "char32";
    STRING32 = 16, "string32";
    HANDLE = 17, "handle";
    CALLABLE = 18, "callable";
    ANY = 19, "any";
    NULL = 20, "null";
    SIZE = 21, "size";
    TYPE = 22, "type";
    ARRAY = 63, "array";
}

const ARRAY_SUFFIX: &str = "_array";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unknown MetaFFI type name '{0}'")]
    UnknownName(String),
    #[error("invalid MetaFFI type word {0:#x}")]
    InvalidWord(u64),
    #[error("type info: {0}")]
    InvalidInfo(String),
}

impl MetaFFIType {
    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn is_array(self) -> bool {
        self.0 & Self::ARRAY.0 != 0
    }

    /// The type with the array flag cleared. For the bare `ARRAY` constant this
    /// is the empty word.
    pub const fn base(self) -> MetaFFIType {
        MetaFFIType(self.0 & !Self::ARRAY.0)
    }

    pub const fn as_array(self) -> MetaFFIType {
        MetaFFIType(self.0 | Self::ARRAY.0)
    }

    /// Exactly one base bit, optionally with the array flag; or the bare array flag.
    pub fn is_valid(self) -> bool {
        let base = self.base().0;
        if base == 0 {
            return self.is_array();
        }
        base.count_ones() == 1 && (base >> 23) == 0
    }

    pub fn is_numeric(self) -> bool {
        matches!(
            self,
            Self::FLOAT64
                | Self::FLOAT32
                | Self::INT8
                | Self::INT16
                | Self::INT32
                | Self::INT64
                | Self::UINT8
                | Self::UINT16
                | Self::UINT32
                | Self::UINT64
        )
    }

    pub fn is_string(self) -> bool {
        matches!(self, Self::STRING8 | Self::STRING16 | Self::STRING32)
    }

    pub fn from_bits(bits: u64) -> Result<MetaFFIType, TypeError> {
        let ty = MetaFFIType(bits);
        if ty.is_valid() {
            Ok(ty)
        } else {
            Err(TypeError::InvalidWord(bits))
        }
    }

    /// Canonical text form, the inverse of [`type_name_to_constant`].
    pub fn name(self) -> String {
        if self == Self::ARRAY {
            return "array".to_string();
        }
        let base = TYPE_TABLE
            .iter()
            .find(|(_, t)| *t == self.base())
            .map(|(n, _)| *n)
            .unwrap_or("invalid");
        if self.is_array() {
            format!("{base}{ARRAY_SUFFIX}")
        } else {
            base.to_string()
        }
    }
}

impl fmt::Debug for MetaFFIType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "MetaFFIType({})", self.name())
        } else {
            write!(f, "MetaFFIType({:#x})", self.0)
        }
    }
}

impl fmt::Display for MetaFFIType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for MetaFFIType {
    type Err = TypeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        type_name_to_constant(s)
    }
}

/// Maps a type name such as `"float32"` or `"int64_array"` to its constant.
pub fn type_name_to_constant(name: &str) -> Result<MetaFFIType, TypeError> {
    let lookup = |n: &str| TYPE_TABLE.iter().find(|(tn, _)| *tn == n).map(|(_, t)| *t);
    if let Some(ty) = lookup(name) {
        return Ok(ty);
    }
    if let Some(base) = name.strip_suffix(ARRAY_SUFFIX) {
        if let Some(ty) = lookup(base).filter(|t| *t != MetaFFIType::ARRAY) {
            return Ok(ty.as_array());
        }
    }
    Err(TypeError::UnknownName(name.to_string()))
}

/// A type as declared in an entity signature (`metaffi_type_info`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeInfo {
    pub ty: MetaFFIType,
    pub alias: Option<String>,
    /// 0 = scalar, n > 0 = array of depth n, -1 = dynamic or mixed depth.
    pub dimensions: i64,
}

pub const DYNAMIC_DIMENSIONS: i64 = -1;

impl TypeInfo {
    pub fn new(ty: MetaFFIType) -> TypeInfo {
        let dimensions = if ty.is_array() { 1 } else { 0 };
        TypeInfo {
            ty,
            alias: None,
            dimensions,
        }
    }

    pub fn with_alias(mut self, alias: impl Into<String>) -> TypeInfo {
        self.alias = Some(alias.into());
        self
    }

    pub fn with_dimensions(mut self, dimensions: i64) -> TypeInfo {
        self.dimensions = dimensions;
        self
    }

    pub fn validate(&self) -> Result<(), TypeError> {
        if !self.ty.is_valid() {
            return Err(TypeError::InvalidWord(self.ty.0));
        }
        if self.dimensions < DYNAMIC_DIMENSIONS {
            return Err(TypeError::InvalidInfo(format!(
                "dimensions must be >= -1, got {}",
                self.dimensions
            )));
        }
        if self.dimensions != 0 && !self.ty.is_array() {
            return Err(TypeError::InvalidInfo(format!(
                "dimensions {} on non-array type {}",
                self.dimensions, self.ty
            )));
        }
        if matches!(self.alias.as_deref(), Some("")) {
            return Err(TypeError::InvalidInfo("alias must not be empty".into()));
        }
        Ok(())
    }
}

impl From<MetaFFIType> for TypeInfo {
    fn from(ty: MetaFFIType) -> Self {
        TypeInfo::new(ty)
    }
}

impl fmt::Display for TypeInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ty)?;
        if let Some(alias) = &self.alias {
            write!(f, "<{alias}>")?;
        }
        if self.ty.is_array() && self.dimensions != 1 {
            write!(f, "[{}]", self.dimensions)?;
        }
        Ok(())
    }
}
