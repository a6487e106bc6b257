//! Common Data Types.
//!
//! [`Cdt`] and [`Cdts`] are the `#[repr(C)]` cells exchanged across the
//! plugin ABI. [`Value`] is the owned Rust view of a cell tree; [`encode`] and
//! [`decode`] convert between the two. Storage referenced by a cell with
//! `free_required` set belongs to the XLLR allocator and is released by
//! [`deep_free_cdt`].

use std::ffi::c_void;
use std::fmt;
use std::mem::size_of;
use std::ptr;

use thiserror::Error;

use crate::memory::{self, terminated_len, xllr_alloc, xllr_free};
use crate::types::{MetaFFIType, TypeInfo};
use crate::xcall::XCall;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(C)]
pub struct MetaffiChar8 {
    pub c: [u8; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(C)]
pub struct MetaffiChar16 {
    pub c: [u16; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(C)]
pub struct MetaffiChar32 {
    pub c: u32,
}

/// `void (*)(cdt_metaffi_handle*)`
pub type ReleaseFn = unsafe extern "C" fn(*mut CdtHandle);

#[derive(Debug)]
#[repr(C)]
pub struct CdtHandle {
    pub handle: *mut c_void,
    pub runtime_id: u64,
    pub release: Option<ReleaseFn>,
}

#[derive(Debug)]
#[repr(C)]
pub struct CdtCallable {
    pub val: *mut XCall,
    pub parameters_types: *mut MetaFFIType,
    pub params_types_length: i8,
    pub retval_types: *mut MetaFFIType,
    pub retval_types_length: i8,
}

#[derive(Clone, Copy)]
#[repr(C)]
pub union CdtVal {
    pub float32_val: f32,
    pub float64_val: f64,
    pub int8_val: i8,
    pub uint8_val: u8,
    pub int16_val: i16,
    pub uint16_val: u16,
    pub int32_val: i32,
    pub uint32_val: u32,
    pub int64_val: i64,
    pub uint64_val: u64,
    pub bool_val: u8,
    pub char8_val: MetaffiChar8,
    pub string8_val: *mut u8,
    pub char16_val: MetaffiChar16,
    pub string16_val: *mut u16,
    pub char32_val: MetaffiChar32,
    pub string32_val: *mut u32,
    pub handle_val: *mut CdtHandle,
    pub callable_val: *mut CdtCallable,
    pub array_val: *mut Cdts,
}

/// One tagged cell.
#[repr(C)]
pub struct Cdt {
    pub type_: MetaFFIType,
    pub free_required: u8,
    pub val: CdtVal,
}

/// A counted sequence of cells.
#[derive(Debug)]
#[repr(C)]
pub struct Cdts {
    pub arr: *mut Cdt,
    pub length: u64,
    pub allocated_on_heap: u8,
}

const _: () = assert!(size_of::<CdtVal>() == 8);
const _: () = assert!(size_of::<Cdt>() == 24);
const _: () = assert!(std::mem::offset_of!(Cdt, free_required) == 8);
const _: () = assert!(std::mem::offset_of!(Cdt, val) == 16);
const _: () = assert!(size_of::<Cdts>() == 24);
const _: () = assert!(size_of::<CdtHandle>() == 24);
const _: () = assert!(size_of::<CdtCallable>() == 40);

impl Cdt {
    /// An unset cell (type word 0, nothing owned).
    pub const EMPTY: Cdt = Cdt {
        type_: MetaFFIType(0),
        free_required: 0,
        val: CdtVal { uint64_val: 0 },
    };

    pub fn is_empty(&self) -> bool {
        self.type_.0 == 0
    }

    /// Moves the cell out, leaving an empty one behind.
    pub fn take(&mut self) -> Cdt {
        std::mem::replace(self, Cdt::EMPTY)
    }

    pub fn from_value(value: &Value) -> Result<Cdt, CdtError> {
        let mut cdt = Cdt::EMPTY;
        encode(&mut cdt, value)?;
        Ok(cdt)
    }
}

impl Default for Cdt {
    fn default() -> Self {
        Cdt::EMPTY
    }
}

impl fmt::Debug for Cdt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Cdt")
            .field("type", &self.type_)
            .field("free_required", &self.free_required)
            .field("raw", &unsafe { self.val.uint64_val })
            .finish()
    }
}

impl Cdts {
    pub const EMPTY: Cdts = Cdts {
        arr: ptr::null_mut(),
        length: 0,
        allocated_on_heap: 0,
    };

    pub fn len(&self) -> usize {
        self.length as usize
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    /// # Safety
    /// `arr` must be valid for `length` cells.
    pub unsafe fn cells(&self) -> &[Cdt] {
        if self.length == 0 || self.arr.is_null() {
            &[]
        } else {
            std::slice::from_raw_parts(self.arr, self.len())
        }
    }

    /// # Safety
    /// `arr` must be valid for `length` cells and not aliased.
    pub unsafe fn cells_mut(&mut self) -> &mut [Cdt] {
        if self.length == 0 || self.arr.is_null() {
            &mut []
        } else {
            std::slice::from_raw_parts_mut(self.arr, self.len())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CdtError {
    #[error("type tag {tag} does not match payload {payload}")]
    TagMismatch { tag: MetaFFIType, payload: MetaFFIType },
    #[error("{0} is not a scalar primitive type")]
    NotPrimitive(MetaFFIType),
    #[error("XLLR allocator returned null")]
    OutOfMemory,
    #[error("invalid {0} payload")]
    InvalidPayload(MetaFFIType),
    #[error("unknown CDT type word {0:#x}")]
    UnknownType(u64),
    #[error("null type cannot occupy a CDTS slot")]
    NullInSlot,
    #[error("callable signature longer than 127 types")]
    SignatureTooLong,
}

/// Opaque handle to an object owned by some runtime.
#[derive(Clone, Copy)]
pub struct HandleValue {
    pub handle: *mut c_void,
    pub runtime_id: u64,
    pub release: Option<ReleaseFn>,
}

unsafe impl Send for HandleValue {}
unsafe impl Sync for HandleValue {}

impl HandleValue {
    /// Invokes the originating runtime's release entrypoint, if any.
    pub fn release(&self) {
        if let Some(release) = self.release {
            let mut rec = self.to_record();
            unsafe { release(&mut rec) };
        }
    }

    pub fn to_record(&self) -> CdtHandle {
        CdtHandle {
            handle: self.handle,
            runtime_id: self.runtime_id,
            release: self.release,
        }
    }

    pub fn from_record(rec: &CdtHandle) -> HandleValue {
        HandleValue {
            handle: rec.handle,
            runtime_id: rec.runtime_id,
            release: rec.release,
        }
    }

    fn release_addr(&self) -> usize {
        self.release.map_or(0, |f| f as usize)
    }
}

impl PartialEq for HandleValue {
    fn eq(&self, other: &Self) -> bool {
        self.handle == other.handle
            && self.runtime_id == other.runtime_id
            && self.release_addr() == other.release_addr()
    }
}

impl fmt::Debug for HandleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HandleValue")
            .field("handle", &self.handle)
            .field("runtime_id", &format_args!("{:#018x}", self.runtime_id))
            .field("release", &(self.release_addr() as *const c_void))
            .finish()
    }
}

/// An XCall passed as data, with its declared signature.
#[derive(Debug, Clone, PartialEq)]
pub struct CallableValue {
    pub xcall: XCall,
    pub parameter_types: Vec<MetaFFIType>,
    pub retval_types: Vec<MetaFFIType>,
}

/// A (possibly ragged or mixed-depth) array. `element_type` is the base type
/// of the leaves, or `ANY` when they differ.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayValue {
    pub element_type: MetaFFIType,
    pub items: Vec<Value>,
}

impl ArrayValue {
    pub fn new(element_type: MetaFFIType, items: Vec<Value>) -> ArrayValue {
        ArrayValue {
            element_type: element_type.base(),
            items,
        }
    }

    /// Builds an array whose element type is inferred from the items.
    pub fn inferred(items: Vec<Value>) -> ArrayValue {
        let element_type = infer_element_type(items.iter().map(|v| v.type_tag()));
        ArrayValue {
            element_type,
            items,
        }
    }

    /// Nesting depth if every leaf sits at the same depth, otherwise `None`.
    pub fn uniform_depth(&self) -> Option<i64> {
        let mut depth = None;
        for item in &self.items {
            let d = match item {
                Value::Array(inner) => inner.uniform_depth()? + 1,
                _ => 1,
            };
            match depth {
                None => depth = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
        Some(depth.unwrap_or(1))
    }

    fn leaves_match(&self, base: MetaFFIType) -> bool {
        self.items.iter().all(|item| match item {
            Value::Array(inner) => {
                (inner.element_type == base || inner.element_type == MetaFFIType::ANY)
                    && inner.leaves_match(base)
            }
            other => other.type_tag() == base,
        })
    }
}

fn infer_element_type(tags: impl Iterator<Item = MetaFFIType>) -> MetaFFIType {
    let mut common: Option<MetaFFIType> = None;
    for tag in tags {
        let base = match tag.base() {
            MetaFFIType(0) => MetaFFIType::ANY,
            b => b,
        };
        match common {
            None => common = Some(base),
            Some(c) if c != base => return MetaFFIType::ANY,
            _ => {}
        }
    }
    common.unwrap_or(MetaFFIType::ANY)
}

/// Owned value of a CDT tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float64(f64),
    Float32(f32),
    Int8(i8),
    Int16(i16),
    Int32(i32),
    Int64(i64),
    UInt8(u8),
    UInt16(u16),
    UInt32(u32),
    UInt64(u64),
    Bool(bool),
    Char8(char),
    String8(String),
    Char16(char),
    String16(String),
    Char32(char),
    String32(String),
    Handle(HandleValue),
    Callable(CallableValue),
    Array(ArrayValue),
    Null,
    Size(u64),
    Type(MetaFFIType),
}

impl Value {
    pub fn type_tag(&self) -> MetaFFIType {
        use MetaFFIType as T;
        match self {
            Value::Float64(_) => T::FLOAT64,
            Value::Float32(_) => T::FLOAT32,
            Value::Int8(_) => T::INT8,
            Value::Int16(_) => T::INT16,
            Value::Int32(_) => T::INT32,
            Value::Int64(_) => T::INT64,
            Value::UInt8(_) => T::UINT8,
            Value::UInt16(_) => T::UINT16,
            Value::UInt32(_) => T::UINT32,
            Value::UInt64(_) => T::UINT64,
            Value::Bool(_) => T::BOOL,
            Value::Char8(_) => T::CHAR8,
            Value::String8(_) => T::STRING8,
            Value::Char16(_) => T::CHAR16,
            Value::String16(_) => T::STRING16,
            Value::Char32(_) => T::CHAR32,
            Value::String32(_) => T::STRING32,
            Value::Handle(_) => T::HANDLE,
            Value::Callable(_) => T::CALLABLE,
            Value::Array(a) => a.element_type.as_array(),
            Value::Null => T::NULL,
            Value::Size(_) => T::SIZE,
            Value::Type(_) => T::TYPE,
        }
    }

    /// Whether this value may be passed where `decl` is declared.
    pub fn matches(&self, decl: &TypeInfo) -> bool {
        let ty = decl.ty;
        if ty == MetaFFIType::ANY {
            return true;
        }
        if ty.is_array() {
            let Value::Array(arr) = self else {
                return false;
            };
            if decl.dimensions > 0 && arr.uniform_depth() != Some(decl.dimensions) {
                return false;
            }
            let base = ty.base();
            return base.0 == 0
                || base == MetaFFIType::ANY
                || arr.element_type == base
                || (arr.element_type == MetaFFIType::ANY && arr.leaves_match(base));
        }
        self.type_tag() == ty
    }

    pub fn as_i64(&self) -> Option<i64> {
        match *self {
            Value::Int8(v) => Some(v as i64),
            Value::Int16(v) => Some(v as i64),
            Value::Int32(v) => Some(v as i64),
            Value::Int64(v) => Some(v),
            Value::UInt8(v) => Some(v as i64),
            Value::UInt16(v) => Some(v as i64),
            Value::UInt32(v) => Some(v as i64),
            Value::UInt64(v) => i64::try_from(v).ok(),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String8(s) | Value::String16(s) | Value::String32(s) => Some(s),
            _ => None,
        }
    }
}

macro_rules! value_from {
    ($($t:ty => $v:ident),*) => {
        $(impl From<$t> for Value {
            fn from(x: $t) -> Value { Value::$v(x) }
        })*
    };
}

value_from!(f64 => Float64, f32 => Float32, i8 => Int8, i16 => Int16, i32 => Int32,
    i64 => Int64, u8 => UInt8, u16 => UInt16, u32 => UInt32, u64 => UInt64, bool => Bool,
    String => String8, HandleValue => Handle, CallableValue => Callable, ArrayValue => Array);

impl From<&str> for Value {
    fn from(s: &str) -> Value {
        Value::String8(s.to_string())
    }
}

fn owned_storage<T>(p: *mut T) -> Result<*mut T, CdtError> {
    if p.is_null() {
        Err(CdtError::OutOfMemory)
    } else {
        Ok(p)
    }
}

/// Allocates an array block: a CDTS header followed by `len` empty cells.
fn alloc_array_block(len: usize) -> Result<*mut Cdts, CdtError> {
    let bytes = size_of::<Cdts>() + len * size_of::<Cdt>();
    let header = owned_storage(xllr_alloc(bytes as u64) as *mut Cdts)?;
    unsafe {
        let arr = header.add(1) as *mut Cdt;
        for i in 0..len {
            arr.add(i).write(Cdt::EMPTY);
        }
        header.write(Cdts {
            arr,
            length: len as u64,
            allocated_on_heap: 1,
        });
    }
    Ok(header)
}

fn char8_units(c: char) -> MetaffiChar8 {
    let mut out = MetaffiChar8::default();
    c.encode_utf8(&mut out.c);
    out
}

fn char16_units(c: char) -> MetaffiChar16 {
    let mut out = MetaffiChar16::default();
    c.encode_utf16(&mut out.c);
    out
}

/// Writes `value` into an empty cell, allocating owned storage as needed.
///
/// On error the cell is left empty and nothing is leaked.
pub fn encode(cdt: &mut Cdt, value: &Value) -> Result<(), CdtError> {
    debug_assert!(cdt.free_required == 0, "encoding over an owning cell");
    cdt.type_ = value.type_tag();
    cdt.free_required = 0;
    cdt.val = CdtVal { uint64_val: 0 };
    let val = &mut cdt.val;
    match value {
        Value::Float64(v) => val.float64_val = *v,
        Value::Float32(v) => val.float32_val = *v,
        Value::Int8(v) => val.int8_val = *v,
        Value::Int16(v) => val.int16_val = *v,
        Value::Int32(v) => val.int32_val = *v,
        Value::Int64(v) => val.int64_val = *v,
        Value::UInt8(v) => val.uint8_val = *v,
        Value::UInt16(v) => val.uint16_val = *v,
        Value::UInt32(v) => val.uint32_val = *v,
        Value::UInt64(v) | Value::Size(v) => val.uint64_val = *v,
        Value::Type(t) => val.uint64_val = t.0,
        Value::Bool(v) => val.bool_val = *v as u8,
        Value::Char8(c) => val.char8_val = char8_units(*c),
        Value::Char16(c) => val.char16_val = char16_units(*c),
        Value::Char32(c) => val.char32_val = MetaffiChar32 { c: *c as u32 },
        Value::Null => {}
        Value::String8(s) => {
            val.string8_val = owned_storage(memory::alloc_string8(s.as_bytes()))?;
            cdt.free_required = 1;
        }
        Value::String16(s) => {
            let units: Vec<u16> = s.encode_utf16().collect();
            val.string16_val = owned_storage(memory::alloc_string16(&units))?;
            cdt.free_required = 1;
        }
        Value::String32(s) => {
            let units: Vec<u32> = s.chars().map(|c| c as u32).collect();
            val.string32_val = owned_storage(memory::alloc_string32(&units))?;
            cdt.free_required = 1;
        }
        Value::Handle(h) => {
            let rec = owned_storage(xllr_alloc(size_of::<CdtHandle>() as u64) as *mut CdtHandle)?;
            unsafe { rec.write(h.to_record()) };
            val.handle_val = rec;
            cdt.free_required = 1;
        }
        Value::Callable(c) => {
            val.callable_val = encode_callable(c)?;
            cdt.free_required = 1;
        }
        Value::Array(arr) => {
            let header = alloc_array_block(arr.items.len())?;
            cdt.val.array_val = header;
            cdt.free_required = 1;
            for (i, item) in arr.items.iter().enumerate() {
                let result = if matches!(item, Value::Null) {
                    Err(CdtError::NullInSlot)
                } else {
                    unsafe { encode(&mut *(*header).arr.add(i), item) }
                };
                if let Err(e) = result {
                    unsafe { deep_free_cdt(cdt) };
                    *cdt = Cdt::EMPTY;
                    return Err(e);
                }
            }
        }
    }
    Ok(())
}

/// One allocation: the callable record, a copy of the XCall, then both type lists.
fn encode_callable(c: &CallableValue) -> Result<*mut CdtCallable, CdtError> {
    let np = c.parameter_types.len();
    let nr = c.retval_types.len();
    if np > i8::MAX as usize || nr > i8::MAX as usize {
        return Err(CdtError::SignatureTooLong);
    }
    let bytes = size_of::<CdtCallable>() + size_of::<XCall>() + (np + nr) * size_of::<u64>();
    let block = owned_storage(xllr_alloc(bytes as u64) as *mut CdtCallable)?;
    unsafe {
        let xcall = block.add(1) as *mut XCall;
        xcall.write(c.xcall);
        let params = xcall.add(1) as *mut MetaFFIType;
        ptr::copy_nonoverlapping(c.parameter_types.as_ptr(), params, np);
        let rets = params.add(np);
        ptr::copy_nonoverlapping(c.retval_types.as_ptr(), rets, nr);
        block.write(CdtCallable {
            val: xcall,
            parameters_types: params,
            params_types_length: np as i8,
            retval_types: rets,
            retval_types_length: nr as i8,
        });
    }
    Ok(block)
}

/// Reads a cell into an owned [`Value`]. The cell is left untouched.
///
/// # Safety
/// Pointers in the cell must be valid for the type it is tagged with.
pub unsafe fn decode(cdt: &Cdt) -> Result<Value, CdtError> {
    use MetaFFIType as T;
    let ty = cdt.type_;
    let val = &cdt.val;
    if ty.is_array() {
        let header = val.array_val;
        if header.is_null() {
            return Err(CdtError::InvalidPayload(ty));
        }
        let items = (*header)
            .cells()
            .iter()
            .map(|c| decode(c))
            .collect::<Result<Vec<_>, _>>()?;
        let element_type = match ty.base() {
            MetaFFIType(0) => T::ANY,
            b => b,
        };
        return Ok(Value::Array(ArrayValue {
            element_type,
            items,
        }));
    }
    Ok(match ty {
        T::FLOAT64 => Value::Float64(val.float64_val),
        T::FLOAT32 => Value::Float32(val.float32_val),
        T::INT8 => Value::Int8(val.int8_val),
        T::INT16 => Value::Int16(val.int16_val),
        T::INT32 => Value::Int32(val.int32_val),
        T::INT64 => Value::Int64(val.int64_val),
        T::UINT8 => Value::UInt8(val.uint8_val),
        T::UINT16 => Value::UInt16(val.uint16_val),
        T::UINT32 => Value::UInt32(val.uint32_val),
        T::UINT64 => Value::UInt64(val.uint64_val),
        T::SIZE => Value::Size(val.uint64_val),
        T::TYPE => Value::Type(MetaFFIType(val.uint64_val)),
        T::BOOL => Value::Bool(val.bool_val != 0),
        T::NULL => Value::Null,
        T::CHAR8 => {
            let units = val.char8_val.c;
            let len = units.iter().position(|b| *b == 0).unwrap_or(4).max(1);
            let s = std::str::from_utf8(&units[..len]).map_err(|_| CdtError::InvalidPayload(ty))?;
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Value::Char8(c),
                _ => return Err(CdtError::InvalidPayload(ty)),
            }
        }
        T::CHAR16 => {
            let units = val.char16_val.c;
            let len = if units[1] == 0 { 1 } else { 2 };
            let mut it = char::decode_utf16(units[..len].iter().copied());
            match (it.next(), it.next()) {
                (Some(Ok(c)), None) => Value::Char16(c),
                _ => return Err(CdtError::InvalidPayload(ty)),
            }
        }
        T::CHAR32 => {
            Value::Char32(char::from_u32(val.char32_val.c).ok_or(CdtError::InvalidPayload(ty))?)
        }
        T::STRING8 => {
            let p = val.string8_val;
            if p.is_null() {
                return Err(CdtError::InvalidPayload(ty));
            }
            let bytes = std::slice::from_raw_parts(p, terminated_len(p));
            Value::String8(
                String::from_utf8(bytes.to_vec()).map_err(|_| CdtError::InvalidPayload(ty))?,
            )
        }
        T::STRING16 => {
            let p = val.string16_val;
            if p.is_null() {
                return Err(CdtError::InvalidPayload(ty));
            }
            let units = std::slice::from_raw_parts(p, terminated_len(p));
            Value::String16(String::from_utf16(units).map_err(|_| CdtError::InvalidPayload(ty))?)
        }
        T::STRING32 => {
            let p = val.string32_val;
            if p.is_null() {
                return Err(CdtError::InvalidPayload(ty));
            }
            let units = std::slice::from_raw_parts(p, terminated_len(p));
            Value::String32(
                units
                    .iter()
                    .map(|u| char::from_u32(*u))
                    .collect::<Option<String>>()
                    .ok_or(CdtError::InvalidPayload(ty))?,
            )
        }
        T::HANDLE => {
            let rec = val.handle_val;
            if rec.is_null() {
                return Err(CdtError::InvalidPayload(ty));
            }
            Value::Handle(HandleValue::from_record(&*rec))
        }
        T::CALLABLE => {
            let rec = val.callable_val;
            if rec.is_null() || (*rec).val.is_null() {
                return Err(CdtError::InvalidPayload(ty));
            }
            let rec = &*rec;
            let slice = |p: *mut MetaFFIType, n: i8| -> Vec<MetaFFIType> {
                if p.is_null() || n <= 0 {
                    Vec::new()
                } else {
                    std::slice::from_raw_parts(p, n as usize).to_vec()
                }
            };
            Value::Callable(CallableValue {
                xcall: *rec.val,
                parameter_types: slice(rec.parameters_types, rec.params_types_length),
                retval_types: slice(rec.retval_types, rec.retval_types_length),
            })
        }
        other => return Err(CdtError::UnknownType(other.0)),
    })
}

/// Builds a scalar cell of `ty` from a matching payload.
pub fn make_primitive_cdt(ty: MetaFFIType, value: &Value) -> Result<Cdt, CdtError> {
    use MetaFFIType as T;
    let primitive = ty.is_numeric()
        || matches!(
            ty,
            T::BOOL
                | T::CHAR8
                | T::CHAR16
                | T::CHAR32
                | T::STRING8
                | T::STRING16
                | T::STRING32
                | T::SIZE
                | T::TYPE
                | T::NULL
        );
    if !primitive {
        return Err(CdtError::NotPrimitive(ty));
    }
    if value.type_tag() != ty {
        return Err(CdtError::TagMismatch {
            tag: ty,
            payload: value.type_tag(),
        });
    }
    Cdt::from_value(value)
}

/// Wraps already-built cells into an array cell, taking ownership of them.
///
/// Elements may themselves be arrays of any depth. The element type is the
/// common base type of the elements, or `ANY` when they differ.
pub fn make_array_cdt(elements: Vec<Cdt>) -> Result<Cdt, CdtError> {
    let element_type = infer_element_type(elements.iter().map(|c| c.type_));
    let header = alloc_array_block(elements.len())?;
    unsafe {
        for (i, cell) in elements.into_iter().enumerate() {
            (*header).arr.add(i).write(cell);
        }
    }
    Ok(Cdt {
        type_: element_type.as_array(),
        free_required: 1,
        val: CdtVal { array_val: header },
    })
}

/// Releases every allocator-owned payload in the tree rooted at `cdt`.
///
/// Handles are not released: only the handle record is freed, the object's
/// lifetime stays with whoever holds the handle.
///
/// # Safety
/// The cell must have been produced by this module or a conforming plugin and
/// must not be freed twice.
pub unsafe fn deep_free_cdt(cdt: &mut Cdt) {
    if cdt.free_required == 0 {
        return;
    }
    let ty = cdt.type_;
    let val = cdt.val;
    if ty.is_array() {
        let header = val.array_val;
        if !header.is_null() {
            for cell in (*header).cells_mut() {
                deep_free_cdt(cell);
            }
            xllr_free(header as *mut c_void);
        }
    } else {
        let owned: *mut c_void = match ty {
            MetaFFIType::STRING8 => val.string8_val as *mut c_void,
            MetaFFIType::STRING16 => val.string16_val as *mut c_void,
            MetaFFIType::STRING32 => val.string32_val as *mut c_void,
            MetaFFIType::HANDLE => val.handle_val as *mut c_void,
            MetaFFIType::CALLABLE => val.callable_val as *mut c_void,
            _ => ptr::null_mut(),
        };
        xllr_free(owned);
    }
    cdt.free_required = 0;
    cdt.val = CdtVal { uint64_val: 0 };
}

/// Frees every cell of a CDTS (not the CDTS storage itself).
///
/// # Safety
/// See [`deep_free_cdt`].
pub unsafe fn deep_free_cells(cdts: &mut Cdts) {
    for cell in cdts.cells_mut() {
        deep_free_cdt(cell);
    }
}

/// Decodes every cell of a CDTS.
///
/// # Safety
/// See [`decode`].
pub unsafe fn decode_all(cdts: &Cdts) -> Result<Vec<Value>, CdtError> {
    cdts.cells().iter().map(|c| decode(c)).collect()
}

/// Encodes `values` into the cells of a CDTS slot-by-slot.
///
/// # Safety
/// `cdts` must have exactly `values.len()` empty cells.
pub unsafe fn encode_all(cdts: &mut Cdts, values: &[Value]) -> Result<(), CdtError> {
    debug_assert_eq!(cdts.len(), values.len());
    for (cell, value) in cdts.cells_mut().iter_mut().zip(values) {
        if matches!(value, Value::Null) {
            return Err(CdtError::NullInSlot);
        }
        encode(cell, value)?;
    }
    Ok(())
}
