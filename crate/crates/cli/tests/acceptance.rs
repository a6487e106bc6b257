//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::collections::HashMap;
use std::ffi::{c_char, CString};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use libloading::Library;
use metaffi_api::{ArrayValue, HandleValue, HostFunction, MetaFFIEntity, MetaFFIRuntime, MetaFFIType as T, TypeInfo, Value};
use metaffi_core::cdt::{decode, deep_free_cdt, Cdt};
use metaffi_core::function_path::{FunctionPath, PathEntry};
use metaffi_core::idl::{strategies, IdlDefinition, IdlError};
use metaffi_core::memory::{take_error, AllocStats};
use metaffi_core::xcall::{call_values, CdtsBuffer};
use metaffi_native::{oracle, param_shapes, RETURN_KINDS};
use metaffi_testkit::{corpus, fixture_library, home, workspace_root, xllr};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn i() -> TypeInfo {
    TypeInfo::new(T::INT64)
}

fn counter_class() -> TypeInfo {
    TypeInfo::new(T::HANDLE).with_alias("Counter")
}

fn counter_path() -> String {
    corpus("counter.tabular").display().to_string()
}

fn int(v: i64) -> Value {
    Value::Int64(v)
}

fn ints(xs: &[i64]) -> Value {
    Value::Array(ArrayValue::new(T::INT64, xs.iter().copied().map(int).collect()))
}

fn tabular_library() -> Library {
    let path = home().join(format!("xllr.tabular{}", std::env::consts::DLL_SUFFIX));
    unsafe { Library::new(path) }.expect("open tabular plugin")
}

fn call_and_callback() -> Outcome {
    let start = Instant::now();
    let rt = MetaFFIRuntime::new("tabular").map_err(e)?;
    let m = rt.load_module(&counter_path());
    let add = m.load_entity("callable=add", &[i(), i()], &[i()]).map_err(e)?;
    let out = add.call(&[int(1), int(2)]).map_err(e)?;
    ensure!(out == [int(3)], "add(1, 2) returned {out:?}");

    let host_add = HostFunction::new(&[T::INT64, T::INT64], &[T::INT64], |a| {
        Ok(vec![int(a[0].as_i64().unwrap_or(0) + a[1].as_i64().unwrap_or(0))])
    });
    let wrapped = host_add.wrap(&rt).map_err(e)?;
    let cb = m
        .load_entity("callable=call_callback_binary_op", &[TypeInfo::new(T::CALLABLE), i(), i()], &[i()])
        .map_err(e)?;
    let out = cb.call(&[Value::Callable(wrapped.as_callable()), int(1), int(2)]).map_err(e)?;
    ensure!(out == [int(3)], "callback returned {out:?}");
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(1), "took {took:?}");
    Ok(())
}

fn deep_binding() -> Outcome {
    let lib = tabular_library();
    let count = unsafe { lib.get::<unsafe extern "C" fn() -> u64>(b"tabular_handle_count\0") }.map_err(e)?;
    type Inspect = unsafe extern "C" fn(u64, *const c_char, *mut Cdt, *mut *mut c_char);
    let inspect = unsafe { lib.get::<Inspect>(b"tabular_inspect_field\0") }.map_err(e)?;
    let read = |h: &HandleValue| -> Result<Value, String> {
        let field = CString::new("value").unwrap();
        let mut cdt = Cdt::default();
        let mut err: *mut c_char = std::ptr::null_mut();
        unsafe {
            inspect(h.handle as u64, field.as_ptr(), &mut cdt, &mut err);
            if let Some(msg) = take_error(err) {
                return Err(msg);
            }
            let v = decode(&cdt).map_err(e);
            deep_free_cdt(&mut cdt);
            v
        }
    };

    let rt = MetaFFIRuntime::new("tabular").map_err(e)?;
    let m = rt.load_module(&counter_path());
    let this = counter_class();
    let ctor = m.load_entity("class=Counter,callable=<init>", &[i()], std::slice::from_ref(&this)).map_err(e)?;
    let inc = m
        .load_entity("class=Counter,callable=inc,instance_required", std::slice::from_ref(&this), &[])
        .map_err(e)?;
    let get = m
        .load_entity("class=Counter,field=value,getter,instance_required", std::slice::from_ref(&this), &[i()])
        .map_err(e)?;
    ensure!(
        m.load_entity("class=Counter,callable=inc", std::slice::from_ref(&this), &[]).is_err(),
        "method loaded without instance_required"
    );

    let baseline = unsafe { count() };
    let h = match ctor.call(&[int(5)]).map_err(e)?.pop() {
        Some(Value::Handle(h)) => h,
        other => return Err(format!("constructor returned {other:?}")),
    };
    ensure!(h.runtime_id == metaffi_tabular::RUNTIME_ID, "runtime id {:#x}", h.runtime_id);
    ensure!(unsafe { count() } == baseline + 1, "handle not pinned");
    inc.call(&[Value::Handle(h)]).map_err(e)?;
    inc.call(&[Value::Handle(h)]).map_err(e)?;
    let v = get.call(&[Value::Handle(h)]).map_err(e)?;
    ensure!(v == [int(7)], "getter returned {v:?}");
    ensure!(read(&h)? == int(7), "table holds a different value");

    h.release();
    ensure!(unsafe { count() } == baseline, "table size {} after release, baseline {baseline}", unsafe { count() });
    ensure!(inc.call(&[Value::Handle(h)]).is_err(), "stale handle accepted by a method");
    ensure!(read(&h).is_err(), "stale handle resolved");
    Ok(())
}

fn cdts_cache() -> Outcome {
    let x = xllr();
    let rt = MetaFFIRuntime::new("tabular").map_err(e)?;
    let m = rt.load_module(&counter_path());
    let add = m.load_entity("callable=add", &[i(), i()], &[i()]).map_err(e)?;
    let answer = m.load_entity("callable=answer", &[], &[i()]).map_err(e)?;
    let noop = m.load_entity("callable=noop", &[], &[]).map_err(e)?;
    let wide = HostFunction::new(&[T::INT64; 25], &[T::INT64; 25], Ok);
    let tall = HostFunction::new(&[T::INT64; 49], &[T::INT64], |a| Ok(vec![a[48].clone()]));
    let wide_args: Vec<Value> = (0..25).map(int).collect();
    let tall_args: Vec<Value> = (0..49).map(int).collect();

    let indices = x.cache_indices();
    let before = x.alloc_stats();
    for k in 0..10_000i64 {
        let ok = match k % 5 {
            0 => add.call(&[int(k), int(1)]).map_err(e)? == [int(k + 1)],
            1 => answer.call(&[]).map_err(e)? == [int(42)],
            2 => noop.call(&[]).map_err(e)?.is_empty(),
            3 => unsafe { call_values(&wide.xcall(), &wide_args, 25) }.map_err(e)? == wide_args,
            _ => unsafe { call_values(&tall.xcall(), &tall_args, 1) }.map_err(e)? == [int(48)],
        };
        ensure!(ok, "call {k} returned a wrong value");
    }
    let delta = x.alloc_stats().since(before);
    ensure!(delta == AllocStats::default(), "10000 cached calls hit the allocator: {delta:?}");
    ensure!(x.cache_indices() == indices, "indices drifted");

    let full = CdtsBuffer::new(25, 25).map_err(e)?;
    ensure!(full.from_cache(), "50 CDTs not served from the cache");
    drop(full);
    let before = x.alloc_stats();
    let over = CdtsBuffer::new(26, 25).map_err(e)?;
    ensure!(!over.from_cache(), "51 CDTs served from the cache");
    ensure!(x.alloc_stats().since(before).allocs > 0, "heap path did not allocate");
    drop(over);
    ensure!(x.alloc_stats().since(before).outstanding() == 0, "heap buffer leaked");

    let i0 = x.cache_indices();
    let a = CdtsBuffer::new(3, 2).map_err(e)?;
    let i1 = x.cache_indices();
    let b = CdtsBuffer::new(10, 10).map_err(e)?;
    let i2 = x.cache_indices();
    let c = CdtsBuffer::new(40, 40).map_err(e)?;
    ensure!(i0.cdts < i1.cdts && i1.cdts < i2.cdts && i0.cdt < i1.cdt && i1.cdt < i2.cdt, "indices did not advance");
    ensure!(x.cache_indices() == i2, "heap buffer moved cache indices");
    drop(c);
    ensure!(x.cache_indices() == i2, "heap free moved cache indices");
    drop(b);
    ensure!(x.cache_indices() == i1, "inner free did not restore indices");
    drop(a);
    ensure!(x.cache_indices() == i0, "outer free did not restore indices");

    let inside = std::sync::Arc::new(std::sync::Mutex::new(None));
    let seen = inside.clone();
    let probe = HostFunction::new(&[T::INT64, T::INT64], &[T::INT64], move |a| {
        *seen.lock().unwrap() = Some(xllr().cache_indices());
        Ok(vec![a[0].clone()])
    });
    let cb = m
        .load_entity("callable=call_callback_binary_op", &[TypeInfo::new(T::CALLABLE), i(), i()], &[i()])
        .map_err(e)?;
    cb.call(&[Value::Callable(probe.callable()), int(1), int(2)]).map_err(e)?;
    let nested = inside.lock().unwrap().ok_or("callback not called")?;
    ensure!(nested.cdts >= i0.cdts + 2, "nested call did not stack: {nested:?} vs {i0:?}");
    ensure!(x.cache_indices() == i0, "nested call left indices at {:?}", x.cache_indices());
    Ok(())
}

fn mixed_dimensions() -> Outcome {
    let value = Value::Array(ArrayValue::inferred(vec![
        int(1),
        ints(&[2, 3]),
        Value::Array(ArrayValue::new(T::INT64, vec![ints(&[4, 5]), ints(&[6, 7])])),
    ]));
    let mut cdt = Cdt::from_value(&value).map_err(e)?;
    let direct = unsafe { decode(&cdt) }.map_err(e);
    unsafe { deep_free_cdt(&mut cdt) };
    ensure!(direct? == value, "encode/decode changed the value");

    let rt = MetaFFIRuntime::new("tabular").map_err(e)?;
    let any = TypeInfo::new(T::ANY);
    let echo = rt.load_module(&counter_path()).load_entity("callable=echo", std::slice::from_ref(&any), std::slice::from_ref(&any)).map_err(e)?;
    let out = echo.call(std::slice::from_ref(&value)).map_err(e)?;
    ensure!(out == [value.clone()], "echo returned {out:?}");
    let Value::Array(a) = &out[0] else { return Err("not an array".into()) };
    let depths: Vec<usize> = a.items.iter().map(depth).collect();
    ensure!(depths == [0, 1, 2], "element depths {depths:?}");
    Ok(())
}

fn depth(v: &Value) -> usize {
    match v {
        Value::Array(a) => 1 + a.items.iter().map(depth).max().unwrap_or(0),
        _ => 0,
    }
}

/// Naive reference: split on commas, then on the first equals sign.
fn naive_split(text: &str) -> Vec<(String, Option<String>)> {
    if text.is_empty() {
        return vec![];
    }
    text.split(',')
        .map(|seg| match seg.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (seg.to_string(), None),
        })
        .collect()
}

fn entries(fp: &FunctionPath) -> Vec<(String, Option<String>)> {
    fp.entries()
        .iter()
        .map(|en| match en {
            PathEntry::Pair(k, v) => (k.clone(), Some(v.clone())),
            PathEntry::Tag(t) => (t.clone(), None),
        })
        .collect()
}

fn function_paths() -> Outcome {
    let fp = FunctionPath::parse("class=org.apache.logging.log4j.LogManager,callable=getLogger").map_err(e)?;
    ensure!(
        fp.get("class") == Some("org.apache.logging.log4j.LogManager") && fp.get("callable") == Some("getLogger"),
        "{fp:?}"
    );
    ensure!(fp.tags().count() == 0, "{fp:?}");
    let fp = FunctionPath::parse("class=org.apache.logging.log4j.Logger,callable=error,instance_required").map_err(e)?;
    ensure!(
        fp.get("class") == Some("org.apache.logging.log4j.Logger")
            && fp.get("callable") == Some("error")
            && fp.has_tag("instance_required")
            && fp.pairs().count() == 2,
        "{fp:?}"
    );

    let entry = ("[a-z_][a-z0-9_.<>]{0,8}", prop::option::of("[A-Za-z0-9_.<>= ]{0,10}"));
    let path = prop::collection::vec(entry, 0..8).prop_map(|es| {
        let mut seen = std::collections::HashSet::new();
        es.into_iter()
            .filter(|(k, _)| seen.insert(k.clone()))
            .map(|(k, v)| match v {
                Some(v) => format!("{k}={v}"),
                None => k,
            })
            .collect::<Vec<_>>()
            .join(",")
    });
    runner(10_000)
        .run(&path, |text| {
            let fp = FunctionPath::parse(&text).map_err(|err| TestCaseError::fail(format!("{text:?}: {err}")))?;
            prop_assert_eq!(entries(&fp), naive_split(&text));
            prop_assert_eq!(fp.to_string(), text.clone());
            prop_assert_eq!(FunctionPath::parse(&fp.to_string()).unwrap(), fp);
            Ok(())
        })
        .map_err(e)
}

fn idl() -> Outcome {
    runner(1_000)
        .run(&strategies::definition(), |def| {
            let back = IdlDefinition::from_json(&def.to_json()).map_err(|err| TestCaseError::fail(err.to_string()))?;
            prop_assert_eq!(&back, &def);
            let mut once = def.clone();
            once.finalize_construction().map_err(|err| TestCaseError::fail(err.to_string()))?;
            let mut twice = once.clone();
            twice.finalize_construction().map_err(|err| TestCaseError::fail(err.to_string()))?;
            prop_assert_eq!(twice, once);
            Ok(())
        })
        .map_err(e)?;

    let dir = workspace_root().join("crates/core/tests/fixtures/idl/invalid");
    let expected = fs::read_to_string(dir.join("EXPECTED")).map_err(e)?;
    let mut rejected = 0;
    for line in expected.lines().filter(|l| !l.trim().is_empty()) {
        let (file, path) = line.split_once('\t').ok_or("malformed EXPECTED")?;
        let text = fs::read_to_string(dir.join(file)).map_err(e)?;
        match IdlDefinition::from_json(&text) {
            Ok(_) => return Err(format!("{file} accepted")),
            Err(err @ IdlError::Schema(_)) => {
                ensure!(err.path() == Some(path) && err.to_string().starts_with(path), "{file}: {err}, want {path}");
            }
            Err(err) => return Err(format!("{file}: not a schema error: {err}")),
        }
        rejected += 1;
    }
    ensure!(rejected == 10, "{rejected} fixtures");
    Ok(())
}

fn codegen() -> Outcome {
    let x = xllr();
    for name in ["counter", "log4j"] {
        let src = corpus(&format!("{name}.tabular")).display().to_string();
        let file = format!("{name}_MetaFFIHost.rs");
        let want = common::golden(&file);
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(e)?;
            let (code, err) = common::metaffi(&["-c", "--idl", &src, "-h"], dir.path());
            ensure!(code == 0, "exit {code}: {err}");
            let got = fs::read_to_string(dir.path().join(&file)).map_err(e)?;
            ensure!(got == want, "{file} differs from the golden file");
        }
    }
    common::counter_differential();
    common::log4j_differential();

    let dir = tempfile::tempdir().map_err(e)?;
    let src = counter_path();
    let before = x.alloc_stats();
    let (code, err) = common::metaffi(&["-c", "--idl", &src, "-g"], dir.path());
    let delta = x.alloc_stats().since(before);
    ensure!(code == 2 && err.contains("Not Implemented"), "exit {code}: {err}");
    ensure!(delta.outstanding() == 0, "-g left {} allocations: {delta:?}", delta.outstanding());
    Ok(())
}

fn fixture_last(lib: &Library) -> i64 {
    unsafe { lib.get::<unsafe extern "C" fn() -> i64>(b"fixture_last\0").expect("fixture_last")() }
}

fn native_case(ents: &HashMap<(String, char), MetaFFIEntity>, lib: &Library, shape: &str, ret: char, args: &[Value]) -> Outcome {
    let ent = &ents[&(shape.to_string(), ret)];
    let got = ent.call(args).map_err(e)?;
    let got_last = fixture_last(lib);
    let want = unsafe { oracle::direct(lib, shape, ret, args) };
    let same = match (ret, got.as_slice()) {
        ('n', []) => got_last == fixture_last(lib),
        ('f', [Value::Float64(a)]) => matches!(want, Value::Float64(b) if a.to_bits() == b.to_bits()),
        (_, [v]) => *v == want,
        _ => false,
    };
    ensure!(same, "{shape}->{ret}: xcall {got:?} (checksum {got_last}), direct {want:?}");
    Ok(())
}

fn args_for(shape: &str, ints: &[i64], floats: &[f64], strings: &[String]) -> Vec<Value> {
    shape
        .chars()
        .enumerate()
        .map(|(n, k)| match k {
            'i' => int(ints[n]),
            'f' => Value::Float64(floats[n]),
            _ => Value::String8(strings[n].clone()),
        })
        .collect()
}

fn native() -> Outcome {
    let fixture = fixture_library();
    let lib = unsafe { Library::new(&fixture) }.map_err(e)?;
    let rt = MetaFFIRuntime::new("native").map_err(e)?;
    let module = rt.load_module(&fixture.display().to_string());
    let kind = |c: char| match c {
        'i' => TypeInfo::new(T::INT64),
        'f' => TypeInfo::new(T::FLOAT64),
        _ => TypeInfo::new(T::STRING8),
    };
    let mut ents = HashMap::new();
    let mut shapes = Vec::new();
    for shape in param_shapes() {
        for ret in RETURN_KINDS {
            let params: Vec<TypeInfo> = shape.chars().map(kind).collect();
            let rets: Vec<TypeInfo> = if ret == 'n' { vec![] } else { vec![kind(ret)] };
            let ent = module
                .load_entity(&format!("callable=shape_{shape}_{ret}"), &params, &rets)
                .map_err(e)?;
            ents.insert((shape.clone(), ret), ent);
            shapes.push((shape.clone(), ret));
        }
    }
    let fixed_ints = [1, -2, 3, i64::MAX, i64::MIN, 0, 7, 8];
    let fixed_floats = [0.5, -1.25, 1e300, 3.0, -0.0, 6.5, 7.75, 8.0];
    let fixed_strings: Vec<String> = ["a", "", "héllo", "x y", "5", "six", "7", "8"].map(String::from).to_vec();
    for (shape, ret) in &shapes {
        native_case(&ents, &lib, shape, *ret, &args_for(shape, &fixed_ints, &fixed_floats, &fixed_strings))?;
    }
    let inputs = (
        any::<prop::sample::Index>(),
        prop::array::uniform8(any::<i64>()),
        prop::array::uniform8(-1e12f64..1e12),
        prop::collection::vec("[^\u{0}]{0,12}", 8),
    );
    runner(1_000)
        .run(&inputs, |(pick, ints, floats, strings)| {
            let (shape, ret) = &shapes[pick.index(shapes.len())];
            native_case(&ents, &lib, shape, *ret, &args_for(shape, &ints, &floats, &strings)).map_err(TestCaseError::fail)
        })
        .map_err(e)?;
    ensure!(shapes.len() == 220, "{} shapes", shapes.len());
    Ok(())
}

fn main() {
    let x = xllr();
    let start = x.alloc_stats();
    let criteria: [Criterion; 8] = [
        ("foreign call and host callback: add(1,2) and callback both give 3", call_and_callback),
        ("deep binding: construct, method, field, release, stale", deep_binding),
        ("CDTS cache: 10000 cached calls, 51-CDT heap path, LIFO indices", cdts_cache),
        ("mixed-dimension array round trip through echo", mixed_dimensions),
        ("function paths: 10000-case differential and round trip", function_paths),
        ("IDL: 1000-tree round trip, finalize idempotence, 10 invalid fixtures", idl),
        ("codegen: golden wrapper, wrapper equals raw xcalls, -g balance", codegen),
        ("native plugin: 220 shapes and 1000 random inputs match direct calls", native),
    ];
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(()) => println!("PASS  {name}"),
        Err(msg) => {
            failed += 1;
            println!("FAIL  {name}: {msg}");
        }
    };
    for (name, f) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        report(name, outcome);
    }
    let leak = x.alloc_stats().since(start);
    report(
        "leak discipline: XLLR allocations equal frees over the whole run",
        if leak.outstanding() == 0 && leak.allocs > 0 {
            Ok(())
        } else {
            Err(format!("{leak:?}"))
        },
    );
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
