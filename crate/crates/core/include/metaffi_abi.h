/* Generated by metaffi-core. Regenerate with METAFFI_BLESS=1 cargo test -p metaffi-core. */
#ifndef METAFFI_ABI_H
#define METAFFI_ABI_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef uint64_t metaffi_type;
typedef uint64_t metaffi_size;

/* type constants */
#define metaffi_float64_type 0x0000000000000001ULL
#define metaffi_float32_type 0x0000000000000002ULL
#define metaffi_int8_type 0x0000000000000004ULL
#define metaffi_int16_type 0x0000000000000008ULL
#define metaffi_int32_type 0x0000000000000010ULL
#define metaffi_int64_type 0x0000000000000020ULL
#define metaffi_uint8_type 0x0000000000000040ULL
#define metaffi_uint16_type 0x0000000000000080ULL
#define metaffi_uint32_type 0x0000000000000100ULL
#define metaffi_uint64_type 0x0000000000000200ULL
#define metaffi_bool_type 0x0000000000000400ULL
#define metaffi_char8_type 0x0000000000000800ULL
#define metaffi_string8_type 0x0000000000001000ULL
#define metaffi_char16_type 0x0000000000002000ULL
#define metaffi_string16_type 0x0000000000004000ULL
#define metaffi_char32_type 0x0000000000008000ULL
#define metaffi_string32_type 0x0000000000010000ULL
#define metaffi_handle_type 0x0000000000020000ULL
#define metaffi_callable_type 0x0000000000040000ULL
#define metaffi_any_type 0x0000000000080000ULL
#define metaffi_null_type 0x0000000000100000ULL
#define metaffi_size_type 0x0000000000200000ULL
#define metaffi_type_type 0x0000000000400000ULL
#define metaffi_array_type 0x8000000000000000ULL

#define metaffi_float64_array_type 0x8000000000000001ULL
#define metaffi_float32_array_type 0x8000000000000002ULL
#define metaffi_int8_array_type 0x8000000000000004ULL
#define metaffi_int16_array_type 0x8000000000000008ULL
#define metaffi_int32_array_type 0x8000000000000010ULL
#define metaffi_int64_array_type 0x8000000000000020ULL
#define metaffi_uint8_array_type 0x8000000000000040ULL
#define metaffi_uint16_array_type 0x8000000000000080ULL
#define metaffi_uint32_array_type 0x8000000000000100ULL
#define metaffi_uint64_array_type 0x8000000000000200ULL
#define metaffi_bool_array_type 0x8000000000000400ULL
#define metaffi_char8_array_type 0x8000000000000800ULL
#define metaffi_string8_array_type 0x8000000000001000ULL
#define metaffi_char16_array_type 0x8000000000002000ULL
#define metaffi_string16_array_type 0x8000000000004000ULL
#define metaffi_char32_array_type 0x8000000000008000ULL
#define metaffi_string32_array_type 0x8000000000010000ULL
#define metaffi_handle_array_type 0x8000000000020000ULL
#define metaffi_callable_array_type 0x8000000000040000ULL
#define metaffi_any_array_type 0x8000000000080000ULL
#define metaffi_null_array_type 0x8000000000100000ULL
#define metaffi_size_array_type 0x8000000000200000ULL
#define metaffi_type_array_type 0x8000000000400000ULL

typedef struct metaffi_char8 { uint8_t c[4]; } metaffi_char8;
typedef struct metaffi_char16 { uint16_t c[2]; } metaffi_char16;
typedef struct metaffi_char32 { uint32_t c; } metaffi_char32;

struct cdt;
struct cdts;

typedef struct xcall {
	void* pxcall_and_context[2];
} xcall;

typedef struct cdt_metaffi_handle {
	void* handle;
	uint64_t runtime_id;
	void (*release)(struct cdt_metaffi_handle*);
} cdt_metaffi_handle;

typedef struct cdt_metaffi_callable {
	xcall* val;
	metaffi_type* parameters_types;
	int8_t params_types_length;
	metaffi_type* retval_types;
	int8_t retval_types_length;
} cdt_metaffi_callable;

union cdt_types {
	float float32_val;
	double float64_val;
	int8_t int8_val;
	uint8_t uint8_val;
	int16_t int16_val;
	uint16_t uint16_val;
	int32_t int32_val;
	uint32_t uint32_val;
	int64_t int64_val;
	uint64_t uint64_val;
	uint8_t bool_val;
	metaffi_char8 char8_val;
	uint8_t* string8_val;
	metaffi_char16 char16_val;
	uint16_t* string16_val;
	metaffi_char32 char32_val;
	uint32_t* string32_val;
	cdt_metaffi_handle* handle_val;
	cdt_metaffi_callable* callable_val;
	struct cdts* array_val;
};

struct cdt {
	metaffi_type type;
	uint8_t free_required;
	union cdt_types cdt_val;
};

struct cdts {
	struct cdt* arr;
	metaffi_size length;
	uint8_t allocated_on_heap;
};

typedef struct metaffi_type_info {
	metaffi_type type;
	const char* alias;
	int64_t dimensions;
} metaffi_type_info;

typedef enum idl_input_type { source_code = 0, path = 1 } idl_input_type;

_Static_assert(sizeof(struct cdt) == 24, "cdt is 24 bytes");
_Static_assert(sizeof(struct cdts) == 24, "cdts is 24 bytes");
_Static_assert(sizeof(cdt_metaffi_handle) == 24, "handle record is 24 bytes");
_Static_assert(sizeof(cdt_metaffi_callable) == 40, "callable record is 40 bytes");
_Static_assert(sizeof(metaffi_type_info) == 24, "type info is 24 bytes");

/* XCall entrypoints */
typedef void (*xcall_params_fn)(void* context, struct cdts* pcdts, char** out_err);
typedef void (*xcall_no_params_fn)(void* context, char** out_err);

/* XLLR */
void load_runtime_plugin(const char* runtime_plugin_name, char** err);
void free_runtime_plugin(const char* runtime_plugin_name, char** err);
xcall* load_function(const char* runtime_plugin_name, const char* module_path, const char* function_path,
	metaffi_type_info* params_types, int8_t params_count,
	metaffi_type_info* retvals_types, int8_t retval_count, char** err);
xcall* make_callable(const char* runtime_plugin_name, void* make_callable_context,
	metaffi_type_info* params_types, int8_t params_count,
	metaffi_type_info* retvals_types, int8_t retval_count, char** err);
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
	metaffi_type_info* params_types, int8_t params_count,
	metaffi_type_info* retvals_types, int8_t retval_count, char** err);
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
