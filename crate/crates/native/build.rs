use std::fmt::Write;

include!("shapes.rs");

fn fn_type(shape: &str, ret: char) -> String {
    let params: Vec<&str> = shape.chars().map(rust_type).collect();
    let ret = if ret == 'n' { String::new() } else { format!(" -> {}", rust_type(ret)) };
    format!("unsafe extern \"C\" fn({}){ret}", params.join(", "))
}

fn trampolines() -> String {
    let mut out = String::new();
    let mut table = String::from("pub(crate) static TRAMPOLINES: &[(&str, char, Trampoline)] = &[\n");
    for shape in param_shapes() {
        for ret in RETURN_KINDS {
            let name = format!("t_{shape}_{ret}");
            let args: Vec<String> = shape
                .chars()
                .enumerate()
                .map(|(i, k)| format!("a[{i}].{k}()"))
                .collect();
            let call = format!("f({})", args.join(", "));
            let wrapped = match ret {
                'n' => format!("{{ {call}; Ret::N }}"),
                'i' => format!("Ret::I({call})"),
                'f' => format!("Ret::F({call})"),
                _ => format!("Ret::S({call})"),
            };
            writeln!(
                out,
                "unsafe fn {name}(p: *const ::std::ffi::c_void, a: &[Arg]) -> Ret {{\n    let f: {} = ::std::mem::transmute(p);\n    {wrapped}\n}}",
                fn_type(&shape, ret)
            )
            .unwrap();
            writeln!(table, "    (\"{shape}\", '{ret}', {name}),").unwrap();
        }
    }
    table.push_str("];\n");
    out + &table
}

fn direct_calls() -> String {
    let mut out = String::from(
        "/// Calls `shape_<shape>_<ret>` in `lib` directly with native values.\n\
         ///\n\
         /// # Safety\n\
         /// `lib` must export the shape symbols with their declared signatures.\n\
         pub unsafe fn direct(lib: &::libloading::Library, shape: &str, ret: char, a: &[Value]) -> Value {\n    match (shape, ret) {\n",
    );
    for shape in param_shapes() {
        for ret in RETURN_KINDS {
            let mut prep = String::new();
            let mut args = Vec::new();
            for (i, k) in shape.chars().enumerate() {
                match k {
                    'i' => args.push(format!("int(&a[{i}])")),
                    'f' => args.push(format!("float(&a[{i}])")),
                    _ => {
                        write!(prep, "let c{i} = cstring(&a[{i}]); ").unwrap();
                        args.push(format!("c{i}.as_ptr()"));
                    }
                }
            }
            let call = format!("f({})", args.join(", "));
            let result = match ret {
                'n' => format!("{{ {call}; Value::Null }}"),
                'i' => format!("Value::Int64({call})"),
                'f' => format!("Value::Float64({call})"),
                _ => format!("owned({call})"),
            };
            writeln!(
                out,
                "        (\"{shape}\", '{ret}') => {{ {prep}let f: ::libloading::Symbol<{}> = lib.get(b\"{}\\0\").unwrap(); {result} }}",
                fn_type(&shape, ret),
                symbol(&shape, ret)
            )
            .unwrap();
        }
    }
    out.push_str("        _ => panic!(\"no shape {shape}_{ret}\"),\n    }\n}\n");
    out
}

fn main() {
    println!("cargo:rerun-if-changed=shapes.rs");
    let dir = std::path::PathBuf::from(std::env::var("OUT_DIR").unwrap());
    std::fs::write(dir.join("trampolines.rs"), trampolines()).unwrap();
    std::fs::write(dir.join("direct.rs"), direct_calls()).unwrap();
}
