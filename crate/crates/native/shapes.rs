// Signature shapes that get a trampoline. Parameter kinds are written as one
// letter each: i = int64, f = float64, s = string8. Return kinds add n = none.
// Every mix of up to three parameters is covered, plus uniform lists up to
// eight.

pub const MAX_ARITY: usize = 8;
pub const PARAM_KINDS: [char; 3] = ['i', 'f', 's'];
pub const RETURN_KINDS: [char; 4] = ['n', 'i', 'f', 's'];

pub fn param_shapes() -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..3 {
        layer = layer
            .iter()
            .flat_map(|p| PARAM_KINDS.iter().map(move |k| format!("{p}{k}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    for n in 4..=MAX_ARITY {
        for k in PARAM_KINDS {
            out.push(k.to_string().repeat(n));
        }
    }
    out
}

pub fn rust_type(kind: char) -> &'static str {
    match kind {
        'i' => "i64",
        'f' => "f64",
        's' => "*const ::std::ffi::c_char",
        _ => unreachable!("unknown kind {kind}"),
    }
}

pub fn symbol(shape: &str, ret: char) -> String {
    format!("shape_{shape}_{ret}")
}
