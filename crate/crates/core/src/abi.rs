//! C-level structures shared by XLLR, plugins and hosts, and the rendered
//! `metaffi_abi.h` header that documents them.

use std::ffi::{c_char, c_int, CStr, CString};
use std::fmt::Write as _;
use std::ptr;

use crate::types::{MetaFFIType, TypeInfo, TYPE_TABLE};

/// `metaffi_type_info`: a declared parameter or return type.
#[derive(Debug, Clone, Copy)]
#[repr(C)]
pub struct MetaffiTypeInfo {
    pub type_: MetaFFIType,
    /// Null-terminated UTF-8, or null when there is no alias.
    pub alias: *const c_char,
    pub dimensions: i64,
}

const _: () = assert!(std::mem::size_of::<MetaffiTypeInfo>() == 24);

/// `idl_input_type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(C)]
pub enum IdlInputType {
    SourceCode = 0,
    Path = 1,
}

impl IdlInputType {
    pub fn from_raw(raw: c_int) -> Option<IdlInputType> {
        match raw {
            0 => Some(IdlInputType::SourceCode),
            1 => Some(IdlInputType::Path),
            _ => None,
        }
    }
}

/// Owns the C view of a type-info list for the duration of a call.
pub struct TypeInfoArray {
    raw: Vec<MetaffiTypeInfo>,
    _aliases: Vec<CString>,
}

impl TypeInfoArray {
    pub fn new(infos: &[TypeInfo]) -> Result<TypeInfoArray, String> {
        let mut aliases = Vec::new();
        let mut raw = Vec::with_capacity(infos.len());
        for info in infos {
            let alias = match &info.alias {
                Some(a) => {
                    let c = CString::new(a.as_str()).map_err(|_| format!("alias '{a}' contains NUL"))?;
                    let p = c.as_ptr();
                    aliases.push(c);
                    p
                }
                None => ptr::null(),
            };
            raw.push(MetaffiTypeInfo {
                type_: info.ty,
                alias,
                dimensions: info.dimensions,
            });
        }
        Ok(TypeInfoArray {
            raw,
            _aliases: aliases,
        })
    }

    pub fn as_ptr(&self) -> *const MetaffiTypeInfo {
        if self.raw.is_empty() {
            ptr::null()
        } else {
            self.raw.as_ptr()
        }
    }

    /// Count as the ABI's `int8_t`.
    pub fn count(&self) -> Result<i8, String> {
        i8::try_from(self.raw.len()).map_err(|_| format!("{} types exceed the limit of 127", self.raw.len()))
    }
}

/// Reads a C type-info list.
///
/// # Safety
/// `ptr` must be valid for `count` entries (or null with `count == 0`) and
/// every alias must be null or a valid C string.
pub unsafe fn type_infos_from_raw(ptr: *const MetaffiTypeInfo, count: i8) -> Result<Vec<TypeInfo>, String> {
    if count < 0 {
        return Err(format!("negative type count {count}"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err("null type list with non-zero count".into());
    }
    std::slice::from_raw_parts(ptr, count as usize)
        .iter()
        .map(|raw| {
            let alias = if raw.alias.is_null() {
                None
            } else {
                Some(
                    CStr::from_ptr(raw.alias)
                        .to_str()
                        .map_err(|_| "type alias is not UTF-8".to_string())?
                        .to_string(),
                )
            };
            let info = TypeInfo {
                ty: raw.type_,
                alias,
                dimensions: raw.dimensions,
            };
            info.validate().map_err(|e| e.to_string())?;
            Ok(info)
        })
        .collect()
}

/// Borrowed view of a C string argument.
///
/// # Safety
/// `p` must be null or a valid null-terminated string.
pub unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, String> {
    if p.is_null() {
        return Err(format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| format!("{what} is not valid UTF-8"))
}

/// `metaffi_abi.h` as it should be checked in.
pub fn c_header() -> String {
    let mut h = String::new();
    h.push_str(HEADER_PRELUDE);
    h.push_str("/* type constants */\n");
    for (name, ty) in TYPE_TABLE {
        let _ = writeln!(h, "#define metaffi_{name}_type {:#018x}ULL", ty.0);
    }
    h.push('\n');
    for (name, ty) in TYPE_TABLE.iter().filter(|(_, t)| *t != MetaFFIType::ARRAY) {
        let _ = writeln!(h, "#define metaffi_{name}_array_type {:#018x}ULL", ty.as_array().0);
    }
    h.push_str(HEADER_BODY);
    h
}

const HEADER_PRELUDE: &str = "\
/* Generated by metaffi-core. Regenerate with METAFFI_BLESS=1 cargo test -p metaffi-core. */
#ifndef METAFFI_ABI_H
#define METAFFI_ABI_H

#include <stdint.h>

#ifdef __cplusplus
extern \"C\" {
#endif

typedef uint64_t metaffi_type;
typedef uint64_t metaffi_size;

";

const HEADER_BODY: &str = "
typedef struct metaffi_char8 { uint8_t c[4]; } metaffi_char8;
typedef struct metaffi_char16 { uint16_t c[2]; } metaffi_char16;
typedef struct metaffi_char32 { uint32_t c; } metaffi_char32;

struct cdt;
struct cdts;

typedef struct xcall {
\tvoid* pxcall_and_context[2];
} xcall;

typedef struct cdt_metaffi_handle {
\tvoid* handle;
\tuint64_t runtime_id;
\tvoid (*release)(struct cdt_metaffi_handle*);
} cdt_metaffi_handle;

typedef struct cdt_metaffi_callable {
\txcall* val;
\tmetaffi_type* parameters_types;
\tint8_t params_types_length;
\tmetaffi_type* retval_types;
\tint8_t retval_types_length;
} cdt_metaffi_callable;

union cdt_types {
\tfloat float32_val;
\tdouble float64_val;
\tint8_t int8_val;
\tuint8_t uint8_val;
\tint16_t int16_val;
\tuint16_t uint16_val;
\tint32_t int32_val;
\tuint32_t uint32_val;
\tint64_t int64_val;
\tuint64_t uint64_val;
\tuint8_t bool_val;
\tmetaffi_char8 char8_val;
\tuint8_t* string8_val;
\tmetaffi_char16 char16_val;
\tuint16_t* string16_val;
\tmetaffi_char32 char32_val;
\tuint32_t* string32_val;
\tcdt_metaffi_handle* handle_val;
\tcdt_metaffi_callable* callable_val;
\tstruct cdts* array_val;
};

struct cdt {
\tmetaffi_type type;
\tuint8_t free_required;
\tunion cdt_types cdt_val;
};

struct cdts {
\tstruct cdt* arr;
\tmetaffi_size length;
\tuint8_t allocated_on_heap;
};

typedef struct metaffi_type_info {
\tmetaffi_type type;
\tconst char* alias;
\tint64_t dimensions;
} metaffi_type_info;

typedef enum idl_input_type { source_code = 0, path = 1 } idl_input_type;

_Static_assert(sizeof(struct cdt) == 24, \"cdt is 24 bytes\");
_Static_assert(sizeof(struct cdts) == 24, \"cdts is 24 bytes\");
_Static_assert(sizeof(cdt_metaffi_handle) == 24, \"handle record is 24 bytes\");
_Static_assert(sizeof(cdt_metaffi_callable) == 40, \"callable record is 40 bytes\");
_Static_assert(sizeof(metaffi_type_info) == 24, \"type info is 24 bytes\");

/* XCall entrypoints */
typedef void (*xcall_params_fn)(void* context, struct cdts* pcdts, char** out_err);
typedef void (*xcall_no_params_fn)(void* context, char** out_err);

/* XLLR */
void load_runtime_plugin(const char* runtime_plugin_name, char** err);
void free_runtime_plugin(const char* runtime_plugin_name, char** err);
xcall* load_function(const char* runtime_plugin_name, const char* module_path, const char* function_path,
\tmetaffi_type_info* params_types, int8_t params_count,
\tmetaffi_type_info* retvals_types, int8_t retval_count, char** err);
xcall* make_callable(const char* runtime_plugin_name, void* make_callable_context,
\tmetaffi_type_info* params_types, int8_t params_count,
\tmetaffi_type_info* retvals_types, int8_t retval_count, char** err);
void free_xcall(const char* runtime_plugin_name, xcall* pxcall, char** err);
struct cdts* alloc_cdts_buffer(metaffi_size params_count, metaffi_size ret_count);
void free_cdts_buffer(struct cdts* pcdts);
void* xllr_alloc(uint64_t size);
void xllr_free(void* ptr);
void* metaffi_alloc(uint64_t size);
void metaffi_free(void* ptr);
char* alloc_string(const char* s, uint64_t length);
uint8_t* alloc_string8(const uint8_t* s, uint64_t length);
uint16_t* alloc_string16(const uint16_t* s, uint64_t length);
uint32_t* alloc_string32(const uint32_t* s, uint64_t length);
void free_string(void* s);

/* Runtime plugin (xllr.<name>) */
uint64_t runtime_id(void);
void load_runtime(char** err);
void free_runtime(char** err);
xcall* load_entity(const char* module_path, const char* function_path,
\tmetaffi_type_info* params_types, int8_t params_count,
\tmetaffi_type_info* retvals_types, int8_t retval_count, char** err);
/* make_callable and free_xcall as above, without the runtime_plugin_name argument */

/* IDL plugin (metaffi.idl.<name>) */
void init(void);
char* parse_idl(idl_input_type input_type, const char* data, char** out_err);

/* Compiler plugin (metaffi.compiler.<name>) */
void compile_to_guest(const char* idl_def_json, const char* output_path, const char* guest_options, char** out_err);
void compile_from_host(const char* idl_def_json, const char* output_path, const char* host_options, char** out_err);

#ifdef __cplusplus
}
#endif

#endif /* METAFFI_ABI_H */
";
