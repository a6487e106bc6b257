use std::fmt::Write;

include!("../native/shapes.rs");

fn main() {
    println!("cargo:rerun-if-changed=../native/shapes.rs");
    let mut out = String::new();
    for shape in param_shapes() {
        for ret in RETURN_KINDS {
            let params: Vec<String> = shape
                .chars()
                .enumerate()
                .map(|(i, k)| format!("a{i}: {}", rust_type(k)))
                .collect();
            let feed: String = shape
                .chars()
                .enumerate()
                .map(|(i, k)| match k {
                    'i' => format!("m.int(a{i}); "),
                    'f' => format!("m.float(a{i}); "),
                    _ => format!("m.string(a{i}); "),
                })
                .collect();
            let (sig, finish) = match ret {
                'n' => (String::new(), "m.finish_none()"),
                'i' => (" -> i64".to_string(), "m.finish_int()"),
                'f' => (" -> f64".to_string(), "m.finish_float()"),
                _ => (format!(" -> {}", rust_type('s')), "m.finish_string()"),
            };
            writeln!(
                out,
                "#[no_mangle]\npub unsafe extern \"C\" fn {}({}){sig} {{\n    let mut m = Mix::default();\n    {feed}\n    {finish}\n}}",
                symbol(&shape, ret),
                params.join(", ")
            )
            .unwrap();
        }
    }
    let dir = std::path::PathBuf::from(std::env::var("OUT_DIR").unwrap());
    std::fs::write(dir.join("shapes_gen.rs"), out).unwrap();
}
