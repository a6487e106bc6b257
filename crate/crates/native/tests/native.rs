use std::ffi::{c_char, CStr, CString};
use std::sync::{Mutex, MutexGuard, OnceLock};

use libloading::Library;
use metaffi_core::cdt::Value;
use metaffi_core::plugin::{RuntimePlugin, XCallPtr};
use metaffi_core::types::{MetaFFIType as T, TypeInfo};
use metaffi_core::xcall::call_values;
use metaffi_native::{param_shapes, NativeRuntime, RETURN_KINDS};
use proptest::prelude::*;

fn int(v: &Value) -> i64 {
    match v {
        Value::Int64(x) => *x,
        other => panic!("{other:?}"),
    }
}

fn float(v: &Value) -> f64 {
    match v {
        Value::Float64(x) => *x,
        other => panic!("{other:?}"),
    }
}

fn cstring(v: &Value) -> CString {
    CString::new(v.as_str().expect("string")).unwrap()
}

unsafe fn owned(p: *const c_char) -> Value {
    Value::String8(CStr::from_ptr(p).to_string_lossy().into_owned())
}

include!(concat!(env!("OUT_DIR"), "/direct.rs"));

fn fixture() -> String {
    metaffi_testkit::fixture_library().display().to_string()
}

fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(|| unsafe { Library::new(fixture()) }.unwrap())
}

fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    let g = LOCK.lock().unwrap_or_else(|p| p.into_inner());
    NativeRuntime.load_runtime().unwrap();
    g
}

fn type_of(kind: char) -> TypeInfo {
    TypeInfo::new(match kind {
        'i' => T::INT64,
        'f' => T::FLOAT64,
        _ => T::STRING8,
    })
}

fn signature(shape: &str, ret: char) -> (Vec<TypeInfo>, Vec<TypeInfo>) {
    let params = shape.chars().map(type_of).collect();
    let rets = if ret == 'n' { vec![] } else { vec![type_of(ret)] };
    (params, rets)
}

fn load(symbol: &str, params: &[TypeInfo], rets: &[TypeInfo]) -> Result<XCallPtr, String> {
    NativeRuntime
        .load_entity(&fixture(), &format!("callable={symbol}"), params, rets)
        .map_err(|e| e.0)
}

fn last() -> i64 {
    unsafe { library().get::<unsafe extern "C" fn() -> i64>(b"fixture_last\0").unwrap()() }
}

/// Calls one shape both ways and compares.
fn compare(shape: &str, ret: char, args: &[Value]) -> Result<(), String> {
    let (params, rets) = signature(shape, ret);
    let x = load(&format!("shape_{shape}_{ret}"), &params, &rets)?;
    let via_xcall = unsafe { call_values(&x.get(), args, rets.len()) }.map_err(|e| e.to_string());
    let xcall_last = last();
    NativeRuntime.free_xcall(x).map_err(|e| e.0)?;
    let via_xcall = via_xcall?;
    let direct = unsafe { direct(library(), shape, ret, args) };
    match (ret, via_xcall.as_slice()) {
        ('n', []) => {
            if xcall_last != last() {
                return Err(format!("{shape}_n: checksum {xcall_last} vs {}", last()));
            }
        }
        ('f', [Value::Float64(a)]) => {
            if a.to_bits() != float(&direct).to_bits() {
                return Err(format!("{shape}_f: {a} vs {direct:?}"));
            }
        }
        (_, [v]) if *v == direct => {}
        (_, got) => return Err(format!("{shape}_{ret}: {got:?} vs {direct:?}")),
    }
    Ok(())
}

fn args_for(shape: &str, ints: &[i64], floats: &[f64], strings: &[String]) -> Vec<Value> {
    shape
        .chars()
        .enumerate()
        .map(|(i, k)| match k {
            'i' => Value::Int64(ints[i]),
            'f' => Value::Float64(floats[i]),
            _ => Value::String8(strings[i].clone()),
        })
        .collect()
}

#[test]
fn add_and_greet() {
    let _g = serial();
    let i = TypeInfo::new(T::INT64);
    let add = load("add_i64", &[i.clone(), i.clone()], &[i]).unwrap();
    let out = unsafe { call_values(&add.get(), &[Value::Int64(1), Value::Int64(2)], 1) }.unwrap();
    assert_eq!(out, [Value::Int64(3)]);
    let s = TypeInfo::new(T::STRING8);
    let greet = load("greet", std::slice::from_ref(&s), std::slice::from_ref(&s)).unwrap();
    let out = unsafe { call_values(&greet.get(), &[Value::String8("wörld".into())], 1) }.unwrap();
    assert_eq!(out, [Value::String8("hello, wörld".into())]);
    NativeRuntime.free_xcall(add).unwrap();
    NativeRuntime.free_xcall(greet).unwrap();
}

#[test]
fn unsupported_requests_are_rejected() {
    let _g = serial();
    let i = TypeInfo::new(T::INT64);
    assert_eq!(
        load("no_such_symbol", &[], &[]).unwrap_err(),
        format!("symbol not found: no_such_symbol in {}", fixture())
    );
    let nine = vec![i.clone(); 9];
    let e = load("add_i64", &nine, &[]).unwrap_err();
    assert_eq!(e, "unsupported signature: arity 9 exceeds the maximum of 8");
    let e = load("add_i64", &[TypeInfo::new(T::INT32)], &[]).unwrap_err();
    assert!(e.contains("parameter 0 has type int32"), "{e}");
    let e = load("add_i64", &[i.clone(), TypeInfo::new(T::FLOAT64), i.clone(), i.clone()], &[]).unwrap_err();
    assert!(e.contains("has no trampoline"), "{e}");
    let e = NativeRuntime.load_entity("/no/such/lib.so", "callable=f", &[], &[]).unwrap_err();
    assert!(e.0.starts_with("cannot load /no/such/lib.so"), "{e}");
    let e = NativeRuntime.make_callable(std::ptr::null_mut(), &[], &[]).unwrap_err();
    assert!(e.0.contains("does not support make_callable"));
}

#[test]
fn every_shape_matches_direct_calls() {
    let _g = serial();
    let ints = [1, -2, 3, i64::MAX, i64::MIN, 0, 7, 8];
    let floats = [0.5, -1.25, 1e300, 3.0, -0.0, 6.5, 7.75, 8.0];
    let strings: Vec<String> = ["a", "", "héllo", "x y", "5", "six", "7", "8"].map(String::from).to_vec();
    for shape in param_shapes() {
        for ret in RETURN_KINDS {
            compare(&shape, ret, &args_for(&shape, &ints, &floats, &strings)).unwrap();
        }
    }
}

fn all_shapes() -> Vec<(String, char)> {
    param_shapes()
        .into_iter()
        .flat_map(|s| RETURN_KINDS.map(|r| (s.clone(), r)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn randomized_inputs_match_direct_calls(
        pick in any::<prop::sample::Index>(),
        ints in prop::array::uniform8(any::<i64>()),
        floats in prop::array::uniform8(-1e12f64..1e12),
        strings in prop::collection::vec("[^\u{0}]{0,12}", 8),
    ) {
        let _g = serial();
        let shapes = all_shapes();
        let (shape, ret) = &shapes[pick.index(shapes.len())];
        let args = args_for(shape, &ints, &floats, &strings);
        prop_assert_eq!(compare(shape, *ret, &args), Ok(()));
    }
}
