//! Shared by the integration tests: the generated wrappers compiled in, and
//! a driver for the command line.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeSet;

use metaffi_api::{ApiError, ArrayValue, HandleValue, HostFunction, MetaFFIRuntime, MetaFFIType as T, TypeInfo, Value};
use std::path::Path;

use metaffi_testkit::{corpus, xllr};

include!("../golden/counter_MetaFFIHost.rs");
include!("../golden/log4j_MetaFFIHost.rs");

struct Raw {
    runtime: MetaFFIRuntime,
    path: String,
    seen: RefCell<BTreeSet<(String, String)>>,
}

fn key(fp: &str, params: &[TypeInfo]) -> (String, String) {
    let sig: Vec<String> = params.iter().map(|t| t.to_string()).collect();
    (fp.to_string(), sig.join(","))
}

impl Raw {
    fn new(name: &str) -> Raw {
        let path = corpus(&format!("{name}.tabular")).display().to_string();
        Raw {
            runtime: MetaFFIRuntime::new("tabular").unwrap(),
            path,
            seen: RefCell::default(),
        }
    }

    fn call(&self, fp: &str, params: &[TypeInfo], rets: &[TypeInfo], args: Vec<Value>) -> Result<Vec<Value>, ApiError> {
        self.seen.borrow_mut().insert(key(fp, params));
        let e = self.runtime.load_module(&self.path).load_entity(fp, params, rets)?;
        e.call(&args)
    }

    fn one(&self, fp: &str, params: &[TypeInfo], rets: &[TypeInfo], args: Vec<Value>) -> Value {
        self.call(fp, params, rets, args).unwrap().remove(0)
    }

    /// Every entity of the module's IDL was exercised.
    fn assert_covered(&self, name: &str) {
        let text = std::fs::read_to_string(&self.path).unwrap();
        let def = metaffi_tabular::to_idl(&metaffi_tabular::parse(&text).unwrap(), &self.path).unwrap();
        let mut all = BTreeSet::new();
        for m in &def.modules {
            let mut add = |f: &metaffi_core::idl::FunctionDefinition| {
                all.insert(key(&f.function_path, &f.param_types()));
            };
            m.functions.iter().for_each(&mut add);
            for g in &m.globals {
                g.getter.iter().chain(&g.setter).for_each(&mut add);
            }
            for c in &m.classes {
                c.constructors.iter().for_each(|k| add(&k.function));
                c.methods.iter().for_each(|k| add(&k.function));
                for f in &c.fields {
                    f.getter.iter().chain(&f.setter).for_each(|k| add(&k.function));
                }
            }
        }
        assert_eq!(*self.seen.borrow(), all, "{name}");
    }
}

fn i() -> TypeInfo {
    TypeInfo::new(T::INT64)
}
fn f() -> TypeInfo {
    TypeInfo::new(T::FLOAT64)
}
fn s() -> TypeInfo {
    TypeInfo::new(T::STRING8)
}
fn h(class: &str) -> TypeInfo {
    TypeInfo::new(T::HANDLE).with_alias(class)
}

fn handle(v: Value) -> HandleValue {
    match v {
        Value::Handle(h) => h,
        other => panic!("{other:?}"),
    }
}

/// Runs `metaffi <args>` in-process with `out` as the working directory.
pub fn metaffi(args: &[&str], out: &Path) -> (i32, String) {
    xllr();
    let mut err = Vec::new();
    let argv = std::iter::once("metaffi").chain(args.iter().copied());
    let code = metaffi_cli::run(argv, out, &mut err);
    (code, String::from_utf8(err).unwrap())
}

pub fn golden(file: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file)).unwrap()
}

/// Every counter entity through its wrapper and as a raw call. Panics on
/// the first difference.
pub fn counter_differential() {
    xllr();
    let raw = Raw::new("counter");
    counter::bind(&raw.path).unwrap();
    let one = |fp: &str, p: &[TypeInfo], r: &[TypeInfo], a: Vec<Value>| raw.one(fp, p, r, a);

    assert_eq!(Value::Int64(counter::add(1, 2).unwrap()), one("callable=add", &[i(), i()], &[i()], vec![Value::Int64(1), Value::Int64(2)]));
    assert_eq!(
        Value::Float64(counter::add_1(0.5, 2.25).unwrap()),
        one("callable=add", &[f(), f()], &[f()], vec![Value::Float64(0.5), Value::Float64(2.25)])
    );
    assert_eq!(Value::Int64(counter::sub(i64::MIN, 1).unwrap()), one("callable=sub", &[i(), i()], &[i()], vec![Value::Int64(i64::MIN), Value::Int64(1)]));
    assert_eq!(Value::Float64(counter::div(1.0, 4.0).unwrap()), one("callable=div", &[f(), f()], &[f()], vec![Value::Float64(1.0), Value::Float64(4.0)]));
    assert_eq!(
        counter::div(1.0, 0.0).unwrap_err(),
        raw.call("callable=div", &[f(), f()], &[f()], vec![Value::Float64(1.0), Value::Float64(0.0)]).unwrap_err()
    );
    assert_eq!(
        Value::String8(counter::concat("ab", "cd").unwrap()),
        one("callable=concat", &[s(), s()], &[s()], vec!["ab".into(), "cd".into()])
    );

    let mul = HostFunction::new(&[T::INT64, T::INT64], &[T::INT64], |a| Ok(vec![Value::Int64(a[0].as_i64().unwrap() * a[1].as_i64().unwrap())]));
    let c = TypeInfo::new(T::CALLABLE);
    assert_eq!(
        Value::Int64(counter::call_callback_binary_op(mul.callable(), 6, 7).unwrap()),
        one("callable=call_callback_binary_op", &[c.clone(), i(), i()], &[i()], vec![Value::Callable(mul.callable()), Value::Int64(6), Value::Int64(7)])
    );

    let mixed = Value::Array(ArrayValue::inferred(vec![
        Value::Int64(1),
        Value::Array(ArrayValue::new(T::INT64, vec![Value::Int64(2), Value::Int64(3)])),
    ]));
    let any = TypeInfo::new(T::ANY);
    assert_eq!(counter::echo(mixed.clone()).unwrap(), one("callable=echo", std::slice::from_ref(&any), std::slice::from_ref(&any), vec![mixed.clone()]));
    assert_eq!(counter::echo(mixed.clone()).unwrap(), mixed);

    let a = counter::lookup("add").unwrap();
    let b = handle(one("callable=lookup", &[s()], &[TypeInfo::new(T::HANDLE)], vec!["add".into()]));
    assert_eq!((a.runtime_id, b.runtime_id), (metaffi_tabular::RUNTIME_ID, metaffi_tabular::RUNTIME_ID));
    a.release();
    b.release();
    assert_eq!(
        counter::lookup("nope").unwrap_err(),
        raw.call("callable=lookup", &[s()], &[TypeInfo::new(T::HANDLE)], vec!["nope".into()]).unwrap_err()
    );

    let xs = vec![1i64, 2, 3, 40];
    let arr = Value::Array(ArrayValue::new(T::INT64, xs.iter().map(|x| Value::Int64(*x)).collect()));
    assert_eq!(Value::Int64(counter::sum(xs).unwrap()), one("callable=sum", &[TypeInfo::new(T::INT64.as_array())], &[i()], vec![arr]));
    assert_eq!(Value::Int64(counter::length("wörld").unwrap()), one("callable=length", &[s()], &[i()], vec!["wörld".into()]));
    assert_eq!(Value::Int64(counter::answer().unwrap()), one("callable=answer", &[], &[i()], vec![]));
    counter::noop().unwrap();
    assert!(raw.call("callable=noop", &[], &[], vec![]).unwrap().is_empty());
    assert_eq!(counter::broken().unwrap_err(), raw.call("callable=broken", &[], &[], vec![]).unwrap_err());

    counter::set_total(7).unwrap();
    assert_eq!(one("global=total,getter", &[], &[i()], vec![]), Value::Int64(7));
    raw.call("global=total,setter", &[i()], &[], vec![Value::Int64(9)]).unwrap();
    assert_eq!(counter::get_total().unwrap(), 9);
    assert_eq!(Value::String8(counter::get_version().unwrap()), one("global=version,getter", &[], &[s()], vec![]));
    counter::set_sink(1).unwrap();
    raw.call("global=sink,setter", &[i()], &[], vec![Value::Int64(2)]).unwrap();

    let ctr = h("Counter");
    let get = |hv: &HandleValue| one("class=Counter,field=value,getter,instance_required", std::slice::from_ref(&ctr), &[i()], vec![Value::Handle(*hv)]);
    let w = counter::Counter::new(5).unwrap();
    w.inc().unwrap();
    assert_eq!(Value::Int64(w.get_value().unwrap()), get(w.handle()));
    raw.call("class=Counter,callable=inc,instance_required", std::slice::from_ref(&ctr), &[], vec![Value::Handle(*w.handle())]).unwrap();
    assert_eq!(w.get_value().unwrap(), 7);
    assert_eq!(
        Value::Int64(w.add(3).unwrap()),
        one("class=Counter,callable=add,instance_required", &[ctr.clone(), i()], &[i()], vec![Value::Handle(*w.handle()), Value::Int64(0)])
    );
    raw.call("class=Counter,callable=reset,instance_required", &[ctr.clone(), i()], &[], vec![Value::Handle(*w.handle()), Value::Int64(1)]).unwrap();
    w.reset(2).unwrap();
    assert_eq!(get(w.handle()), Value::Int64(2));
    raw.call("class=Counter,field=value,setter,instance_required", &[ctr.clone(), i()], &[], vec![Value::Handle(*w.handle()), Value::Int64(11)]).unwrap();
    assert_eq!(w.get_value().unwrap(), 11);
    w.set_value(12).unwrap();
    assert_eq!(get(w.handle()), Value::Int64(12));
    w.set_label("mine").unwrap();
    assert_eq!(
        Value::String8(w.get_label().unwrap()),
        one("class=Counter,field=label,getter,instance_required", std::slice::from_ref(&ctr), &[s()], vec![Value::Handle(*w.handle())])
    );
    raw.call("class=Counter,field=label,setter,instance_required", &[ctr.clone(), s()], &[], vec![Value::Handle(*w.handle()), "theirs".into()]).unwrap();
    assert_eq!(w.get_label().unwrap(), "theirs");

    let r = counter::Counter::from_handle(handle(one("class=Counter,callable=<init>", &[], std::slice::from_ref(&ctr), vec![])));
    assert_eq!(r.get_value().unwrap(), counter::Counter::new_1().unwrap().get_value().unwrap());
    let r5 = counter::Counter::from_handle(handle(one("class=Counter,callable=<init>", &[i()], std::slice::from_ref(&ctr), vec![Value::Int64(5)])));
    assert_eq!(r5.get_value().unwrap(), 5);
    let z = counter::Counter::from_handle(handle(one("class=Counter,callable=zero", &[], std::slice::from_ref(&ctr), vec![])));
    assert_eq!(z.get_value().unwrap(), counter::Counter::zero().unwrap().get_value().unwrap());

    raw.assert_covered("counter");
}

pub fn log4j_differential() {
    xllr();
    let raw = Raw::new("log4j");
    log4j::bind(&raw.path).unwrap();
    let logger = "org.apache.logging.log4j.Logger";
    let w = log4j::LogManager::getLogger("app").unwrap();
    let r = handle(raw.one(
        "class=org.apache.logging.log4j.LogManager,callable=getLogger",
        &[s()],
        &[h(logger)],
        vec!["app".into()],
    ));
    let r = log4j::Logger::from_handle(r);
    assert_eq!(w.getName().unwrap(), r.getName().unwrap());
    assert_eq!(
        Value::String8(w.get_name().unwrap()),
        raw.one("class=org.apache.logging.log4j.Logger,callable=getName,instance_required", &[h(logger)], &[s()], vec![Value::Handle(*r.handle())])
    );
    assert_eq!(
        Value::String8(r.get_name().unwrap()),
        raw.one("class=org.apache.logging.log4j.Logger,field=name,getter,instance_required", &[h(logger)], &[s()], vec![Value::Handle(*w.handle())])
    );
    raw.assert_covered("log4j");
}
