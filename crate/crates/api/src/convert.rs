//! Native Rust values to and from [`Value`].

use metaffi_core::cdt::{ArrayValue, CallableValue, HandleValue, Value};
use metaffi_core::types::MetaFFIType;

use crate::ApiError;

pub trait IntoValue {
    fn into_value(self) -> Value;
}

pub trait FromValue: Sized {
    fn from_value(v: Value) -> Result<Self, ApiError>;
}

fn mismatch<T>(expected: &'static str, got: &Value) -> Result<T, ApiError> {
    Err(ApiError::Conversion {
        expected,
        got: got.type_tag().to_string(),
    })
}

macro_rules! scalar {
    ($($t:ty => $variant:ident),* $(,)?) => {$(
        impl IntoValue for $t {
            fn into_value(self) -> Value {
                Value::$variant(self)
            }
        }

        impl FromValue for $t {
            fn from_value(v: Value) -> Result<Self, ApiError> {
                match v {
                    Value::$variant(x) => Ok(x),
                    other => mismatch(stringify!($t), &other),
                }
            }
        }
    )*};
}

scalar! {
    f64 => Float64,
    f32 => Float32,
    i8 => Int8,
    i16 => Int16,
    i32 => Int32,
    i64 => Int64,
    u8 => UInt8,
    u16 => UInt16,
    u32 => UInt32,
    u64 => UInt64,
    bool => Bool,
    String => String8,
    HandleValue => Handle,
    CallableValue => Callable,
}

impl IntoValue for &str {
    fn into_value(self) -> Value {
        Value::String8(self.to_string())
    }
}

impl IntoValue for Value {
    fn into_value(self) -> Value {
        self
    }
}

impl FromValue for Value {
    fn from_value(v: Value) -> Result<Self, ApiError> {
        Ok(v)
    }
}

impl FromValue for () {
    fn from_value(v: Value) -> Result<Self, ApiError> {
        match v {
            Value::Null => Ok(()),
            other => mismatch("()", &other),
        }
    }
}

/// Element type tag used when building arrays from Rust vectors.
pub trait ElementType {
    const TYPE: MetaFFIType;
}

macro_rules! element {
    ($($t:ty => $c:ident),* $(,)?) => {$(
        impl ElementType for $t {
            const TYPE: MetaFFIType = MetaFFIType::$c;
        }
    )*};
}

element! {
    f64 => FLOAT64, f32 => FLOAT32, i8 => INT8, i16 => INT16, i32 => INT32, i64 => INT64,
    u8 => UINT8, u16 => UINT16, u32 => UINT32, u64 => UINT64, bool => BOOL, String => STRING8,
    HandleValue => HANDLE, CallableValue => CALLABLE, Value => ANY,
}

impl<T: ElementType> ElementType for Vec<T> {
    const TYPE: MetaFFIType = T::TYPE;
}

impl<T: IntoValue + ElementType> IntoValue for Vec<T> {
    fn into_value(self) -> Value {
        Value::Array(ArrayValue::new(T::TYPE, self.into_iter().map(IntoValue::into_value).collect()))
    }
}

impl<T: FromValue> FromValue for Vec<T> {
    fn from_value(v: Value) -> Result<Self, ApiError> {
        match v {
            Value::Array(a) => a.items.into_iter().map(T::from_value).collect(),
            other => mismatch("array", &other),
        }
    }
}
