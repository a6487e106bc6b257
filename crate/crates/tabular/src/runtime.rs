//! The tabular runtime plugin.

use std::collections::{HashMap, HashSet};
use std::ffi::{c_char, c_void};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use metaffi_core::cdt::{decode, decode_all, encode_all, ArrayValue, CallableValue, Cdt, CdtHandle, Cdts, HandleValue, Value};
use metaffi_core::function_path::FunctionPath;
use metaffi_core::plugin::{GuestError, GuestResult, RuntimePlugin, XCallPtr};
use metaffi_core::types::{MetaFFIType, TypeInfo};
use metaffi_core::xcall::{call_values, invoke_xcall, pair_parts, select_entrypoint, set_error, EntrypointKind, XCall};

use crate::handles::HandleTable;
use crate::manifest::{self, coerce, type_text, ClassDecl, FnDecl, Manifest, Op, VarDecl};

/// Stamped into every handle this runtime emits.
pub const RUNTIME_ID: u64 = 0x7A3B_9C41_E5D2_0F68;

/// Seeds the handle-key generator when set to a u64.
pub const SEED_ENV: &str = "METAFFI_TABULAR_SEED";

pub struct Module {
    pub path: PathBuf,
    pub manifest: Manifest,
    globals: Mutex<HashMap<String, Value>>,
}

impl Module {
    fn new(path: PathBuf, manifest: Manifest) -> Module {
        let globals = manifest
            .globals
            .iter()
            .map(|g| (g.name.clone(), g.init.clone()))
            .collect();
        Module {
            path,
            manifest,
            globals: Mutex::new(globals),
        }
    }

    pub fn global_value(&self, name: &str) -> Option<Value> {
        self.globals.lock().unwrap_or_else(|p| p.into_inner()).get(name).cloned()
    }
}

pub struct Instance {
    pub class: String,
    fields: Mutex<HashMap<String, Value>>,
}

impl Instance {
    fn new(class: &ClassDecl) -> Instance {
        Instance {
            class: class.name.clone(),
            fields: Mutex::new(class.fields.iter().map(|f| (f.name.clone(), f.init.clone())).collect()),
        }
    }

    pub fn field(&self, name: &str) -> Option<Value> {
        self.fields.lock().unwrap_or_else(|p| p.into_inner()).get(name).cloned()
    }

    fn set(&self, name: &str, v: Value) {
        self.fields.lock().unwrap_or_else(|p| p.into_inner()).insert(name.to_string(), v);
    }
}

/// What a tabular handle refers to.
pub enum Object {
    Instance(Instance),
    /// A module function, usable as a `make_callable` token.
    Function { module: Arc<Module>, index: usize },
}

#[derive(Clone)]
enum Target {
    Function(Arc<Module>, usize),
    Constructor(Arc<Module>, usize, usize),
    Method(Arc<Module>, usize, usize),
    FieldGet(Arc<Module>, usize, usize),
    FieldSet(Arc<Module>, usize, usize),
    GlobalGet(Arc<Module>, usize),
    GlobalSet(Arc<Module>, usize),
    /// A callable from another runtime, re-wrapped as-is.
    Forward(XCall),
}

struct Context {
    target: Target,
    params: Vec<TypeInfo>,
    rets: Vec<TypeInfo>,
}

struct State {
    loaded: AtomicBool,
    modules: Mutex<HashMap<PathBuf, Arc<Module>>>,
    handles: HandleTable<Object>,
    live: Mutex<HashSet<usize>>,
    retired: Mutex<HashSet<usize>>,
    inits: AtomicU64,
    teardowns: AtomicU64,
}

fn seed() -> Option<u64> {
    std::env::var(SEED_ENV).ok()?.parse().ok()
}

fn state() -> &'static State {
    static S: OnceLock<State> = OnceLock::new();
    S.get_or_init(|| State {
        loaded: AtomicBool::new(false),
        modules: Mutex::new(HashMap::new()),
        handles: HandleTable::new(RUNTIME_ID, seed()),
        live: Mutex::new(HashSet::new()),
        retired: Mutex::new(HashSet::new()),
        inits: AtomicU64::new(0),
        teardowns: AtomicU64::new(0),
    })
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

/// Number of pinned objects.
pub fn handle_count() -> usize {
    state().handles.len()
}

/// Number of XCalls created and not yet freed.
pub fn context_count() -> usize {
    lock(&state().live).len()
}

/// How often the runtime was initialized and torn down.
pub fn lifecycle_counts() -> (u64, u64) {
    let s = state();
    (s.inits.load(Ordering::SeqCst), s.teardowns.load(Ordering::SeqCst))
}

/// Reads an instance field directly, bypassing the XCall path.
pub fn read_field(key: u64, field: &str) -> Result<Value, String> {
    let obj = state().handles.resolve(key, RUNTIME_ID).map_err(|e| e.to_string())?;
    match &*obj {
        Object::Instance(i) => i.field(field).ok_or_else(|| format!("no field '{field}' on {}", i.class)),
        Object::Function { .. } => Err("handle refers to a function".into()),
    }
}

/// Pins `obj` and returns a handle to it.
pub fn register(obj: Arc<Object>) -> HandleValue {
    let key = state().handles.register(obj);
    HandleValue {
        handle: key as usize as *mut c_void,
        runtime_id: RUNTIME_ID,
        release: Some(release_handle),
    }
}

pub fn resolve(h: &HandleValue) -> Result<Arc<Object>, String> {
    state()
        .handles
        .resolve(h.handle as usize as u64, h.runtime_id)
        .map_err(|e| e.to_string())
}

/// Release entrypoint stored in every emitted handle. It has no error
/// channel, so failures are logged.
///
/// # Safety
/// `rec` must be null or point to a readable handle record.
pub unsafe extern "C" fn release_handle(rec: *mut CdtHandle) {
    if rec.is_null() {
        return;
    }
    let (key, id) = ((*rec).handle as usize as u64, (*rec).runtime_id);
    if let Err(e) = state().handles.release(key, id) {
        log::warn!("tabular release_handle: {e}");
    }
}

fn load_module(path: &str) -> GuestResult<Arc<Module>> {
    let canonical = Path::new(path)
        .canonicalize()
        .map_err(|_| GuestError(format!("module not found: {path}")))?;
    let mut modules = lock(&state().modules);
    if let Some(m) = modules.get(&canonical) {
        return Ok(m.clone());
    }
    let text = std::fs::read_to_string(&canonical).map_err(|e| GuestError(format!("{path}: {e}")))?;
    let manifest = manifest::parse(&text).map_err(|e| GuestError(format!("{path}: {e}")))?;
    let m = Arc::new(Module::new(canonical.clone(), manifest));
    modules.insert(canonical, m.clone());
    Ok(m)
}

fn compatible(req: &TypeInfo, decl: &TypeInfo) -> bool {
    let alias_ok = match (&req.alias, &decl.alias) {
        (Some(a), Some(b)) => a == b,
        _ => true,
    };
    req.ty == decl.ty && req.dimensions == decl.dimensions && alias_ok
}

fn signature_matches(req: (&[TypeInfo], &[TypeInfo]), decl: (&[TypeInfo], &[TypeInfo])) -> bool {
    req.0.len() == decl.0.len()
        && req.1.len() == decl.1.len()
        && req.0.iter().zip(decl.0).all(|(r, d)| compatible(r, d))
        && req.1.iter().zip(decl.1).all(|(r, d)| compatible(r, d))
}

fn signature_text(params: &[TypeInfo], rets: &[TypeInfo]) -> String {
    let list = |ts: &[TypeInfo]| ts.iter().map(type_text).collect::<Vec<_>>().join(", ");
    format!("({}) -> ({})", list(params), list(rets))
}

fn fn_params(f: &FnDecl, this: Option<&ClassDecl>) -> Vec<TypeInfo> {
    this.map(|c| c.handle_type())
        .into_iter()
        .chain(f.params.iter().map(|p| p.ty.clone()))
        .collect()
}

/// Picks the overload whose declared signature matches the request.
fn pick<'a>(
    name: &str,
    candidates: impl Iterator<Item = (usize, Vec<TypeInfo>, &'a [TypeInfo])>,
    params: &[TypeInfo],
    rets: &[TypeInfo],
) -> GuestResult<usize> {
    let mut declared = Vec::new();
    for (i, p, r) in candidates {
        if signature_matches((params, rets), (&p, r)) {
            return Ok(i);
        }
        declared.push(signature_text(&p, r));
    }
    if declared.is_empty() {
        return Err(GuestError(format!("entity not found: {name}")));
    }
    Err(GuestError(format!(
        "signature mismatch for {name}: requested {}, declared {}",
        signature_text(params, rets),
        declared.join(" or ")
    )))
}

fn accessor(fp: &FunctionPath) -> GuestResult<bool> {
    match (fp.has_tag("getter"), fp.has_tag("setter")) {
        (true, false) => Ok(true),
        (false, true) => Ok(false),
        _ => Err(GuestError("a field or global path needs exactly one of 'getter' and 'setter'".into())),
    }
}

fn var_accessor(
    v: &VarDecl,
    getter: bool,
    this: Option<&ClassDecl>,
    params: &[TypeInfo],
    rets: &[TypeInfo],
) -> GuestResult<()> {
    if getter && !v.access.readable() {
        return Err(GuestError(format!("'{}' is write-only", v.name)));
    }
    if !getter && !v.access.writable() {
        return Err(GuestError(format!("'{}' is read-only", v.name)));
    }
    let mut p: Vec<TypeInfo> = this.map(|c| c.handle_type()).into_iter().collect();
    let mut r = Vec::new();
    if getter {
        r.push(v.ty.clone());
    } else {
        p.push(v.ty.clone());
    }
    if signature_matches((params, rets), (&p, &r)) {
        Ok(())
    } else {
        Err(GuestError(format!(
            "signature mismatch for {}: requested {}, declared {}",
            v.name,
            signature_text(params, rets),
            signature_text(&p, &r)
        )))
    }
}

fn resolve_target(m: &Arc<Module>, function_path: &str, params: &[TypeInfo], rets: &[TypeInfo]) -> GuestResult<Target> {
    let fp = FunctionPath::parse(function_path).map_err(|e| GuestError(e.to_string()))?;
    let man = &m.manifest;
    if let Some(g) = fp.get("global") {
        let idx = man
            .globals
            .iter()
            .position(|v| v.name == g)
            .ok_or_else(|| GuestError(format!("entity not found: {g}")))?;
        let getter = accessor(&fp)?;
        var_accessor(&man.globals[idx], getter, None, params, rets)?;
        return Ok(if getter {
            Target::GlobalGet(m.clone(), idx)
        } else {
            Target::GlobalSet(m.clone(), idx)
        });
    }
    if let Some(class) = fp.get("class") {
        let ci = man
            .classes
            .iter()
            .position(|c| c.name == class)
            .ok_or_else(|| GuestError(format!("entity not found: {class}")))?;
        let cls = &man.classes[ci];
        let instance = fp.has_tag("instance_required");
        if let Some(field) = fp.get("field") {
            let fi = cls
                .fields
                .iter()
                .position(|f| f.name == field)
                .ok_or_else(|| GuestError(format!("entity not found: {class}.{field}")))?;
            if !instance {
                return Err(GuestError(format!("field {class}.{field} requires the instance_required tag")));
            }
            let getter = accessor(&fp)?;
            var_accessor(&cls.fields[fi], getter, Some(cls), params, rets)?;
            return Ok(if getter {
                Target::FieldGet(m.clone(), ci, fi)
            } else {
                Target::FieldSet(m.clone(), ci, fi)
            });
        }
        let name = fp
            .get("callable")
            .ok_or_else(|| GuestError("class path needs a 'callable' or 'field' entry".into()))?;
        if name == "<init>" || name == "new" {
            let k = pick(
                &format!("{class}.{name}"),
                cls.constructors.iter().enumerate().map(|(i, k)| (i, fn_params(k, None), k.rets.as_slice())),
                params,
                rets,
            )?;
            return Ok(Target::Constructor(m.clone(), ci, k));
        }
        let matching: Vec<usize> = (0..cls.methods.len()).filter(|i| cls.methods[*i].decl.name == name).collect();
        if let Some(&first) = matching.first() {
            if cls.methods[first].instance != instance {
                return Err(GuestError(if instance {
                    format!("{class}.{name} is static; drop the instance_required tag")
                } else {
                    format!("{class}.{name} is an instance method and requires the instance_required tag")
                }));
            }
        }
        let mi = pick(
            &format!("{class}.{name}"),
            matching.iter().map(|&i| {
                let md = &cls.methods[i];
                (i, fn_params(&md.decl, md.instance.then_some(cls)), md.decl.rets.as_slice())
            }),
            params,
            rets,
        )?;
        return Ok(Target::Method(m.clone(), ci, mi));
    }
    let name = fp
        .get("callable")
        .ok_or_else(|| GuestError(format!("function path '{function_path}' names no entity")))?;
    let i = pick(
        name,
        man.functions
            .iter()
            .enumerate()
            .filter(|(_, f)| f.name == name)
            .map(|(i, f)| (i, fn_params(f, None), f.rets.as_slice())),
        params,
        rets,
    )?;
    Ok(Target::Function(m.clone(), i))
}

unsafe extern "C" fn xcall_params_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_params_no_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_no_params_ret(ctx: *mut c_void, pcdts: *mut Cdts, err: *mut *mut c_char) {
    dispatch(ctx, Some(pcdts), err)
}

unsafe extern "C" fn xcall_no_params_no_ret(ctx: *mut c_void, err: *mut *mut c_char) {
    dispatch(ctx, None, err)
}

unsafe fn dispatch(ctx: *mut c_void, pcdts: Option<*mut Cdts>, err: *mut *mut c_char) {
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        if ctx.is_null() {
            return Err("null tabular context".to_string());
        }
        run(&*(ctx as *const Context), pcdts)
    }))
    .unwrap_or_else(|_| Err("tabular runtime panicked".to_string()));
    if let Err(msg) = result {
        set_error(err, &msg);
    }
}

unsafe fn run(ctx: &Context, pcdts: Option<*mut Cdts>) -> Result<(), String> {
    if let Target::Forward(inner) = &ctx.target {
        return invoke_xcall(inner, pcdts).map_err(|e| e.to_string());
    }
    let (args, rets_cdts) = match pcdts {
        Some(p) if !p.is_null() => {
            let (params, rets) = pair_parts(p);
            (decode_all(params).map_err(|e| e.to_string())?, Some(rets))
        }
        Some(_) => return Err("null CDTS buffer".into()),
        None => (Vec::new(), None),
    };
    if args.len() != ctx.params.len() {
        return Err(format!("expected {} arguments, got {}", ctx.params.len(), args.len()));
    }
    for (i, (a, t)) in args.iter().zip(&ctx.params).enumerate() {
        if !a.matches(t) {
            return Err(format!("argument {i}: expected {}, got {}", type_text(t), a.type_tag()));
        }
    }
    let out = execute(&ctx.target, args)?;
    if out.len() != ctx.rets.len() {
        return Err(format!("produced {} values, {} declared", out.len(), ctx.rets.len()));
    }
    if let Some(rets) = rets_cdts {
        if rets.len() != out.len() {
            return Err(format!("return buffer holds {} values, {} declared", rets.len(), out.len()));
        }
        encode_all(rets, &out).map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn instance(v: &Value, class: &str) -> Result<Arc<Object>, String> {
    let wrong = || format!("instance_required: first argument must be a {class} handle");
    let Value::Handle(h) = v else {
        return Err(wrong());
    };
    if h.runtime_id != RUNTIME_ID {
        return Err(format!("{}: handle is from runtime {:#018x}", wrong(), h.runtime_id));
    }
    let obj = resolve(h)?;
    match &*obj {
        Object::Instance(i) if i.class == class => Ok(obj),
        _ => Err(wrong()),
    }
}

fn as_instance(obj: &Object) -> &Instance {
    match obj {
        Object::Instance(i) => i,
        Object::Function { .. } => unreachable!("checked by instance()"),
    }
}

fn construct(class: &ClassDecl, f: &FnDecl, args: &[Value]) -> Value {
    let inst = Instance::new(class);
    for (p, v) in f.params.iter().zip(args) {
        inst.set(&p.name, v.clone());
    }
    Value::Handle(register(Arc::new(Object::Instance(inst))))
}

fn execute(target: &Target, mut args: Vec<Value>) -> Result<Vec<Value>, String> {
    match target {
        Target::Function(m, i) => apply(m, &m.manifest.functions[*i], None, args),
        Target::Constructor(m, ci, k) => {
            let cls = &m.manifest.classes[*ci];
            Ok(vec![construct(cls, &cls.constructors[*k], &args)])
        }
        Target::Method(m, ci, mi) => {
            let cls = &m.manifest.classes[*ci];
            let md = &cls.methods[*mi];
            let this = if md.instance {
                let obj = instance(&args[0], &cls.name)?;
                args.remove(0);
                Some(obj)
            } else {
                None
            };
            apply(m, &md.decl, this.as_deref().map(as_instance), args)
        }
        Target::FieldGet(m, ci, fi) => {
            let cls = &m.manifest.classes[*ci];
            let obj = instance(&args[0], &cls.name)?;
            let name = &cls.fields[*fi].name;
            Ok(vec![as_instance(&obj).field(name).expect("declared field")])
        }
        Target::FieldSet(m, ci, fi) => {
            let cls = &m.manifest.classes[*ci];
            let obj = instance(&args[0], &cls.name)?;
            as_instance(&obj).set(&cls.fields[*fi].name, args.pop().expect("value"));
            Ok(Vec::new())
        }
        Target::GlobalGet(m, gi) => {
            let name = &m.manifest.globals[*gi].name;
            Ok(vec![m.global_value(name).expect("declared global")])
        }
        Target::GlobalSet(m, gi) => {
            let name = m.manifest.globals[*gi].name.clone();
            lock(&m.globals).insert(name, args.pop().expect("value"));
            Ok(Vec::new())
        }
        Target::Forward(_) => unreachable!("forwarded before decoding"),
    }
}

macro_rules! arith {
    ($args:expr, $int:ident, $float:tt) => {{
        let mut it = $args.into_iter();
        let first = it.next().ok_or("no operands")?;
        it.try_fold(first, |acc, v| -> Result<Value, String> {
            Ok(match (acc, v) {
                (Value::Int64(a), Value::Int64(b)) => Value::Int64(a.$int(b)),
                (Value::Int32(a), Value::Int32(b)) => Value::Int32(a.$int(b)),
                (Value::UInt64(a), Value::UInt64(b)) => Value::UInt64(a.$int(b)),
                (Value::Float64(a), Value::Float64(b)) => Value::Float64(a $float b),
                (Value::Float32(a), Value::Float32(b)) => Value::Float32(a $float b),
                (a, b) => return Err(format!("cannot combine {} and {}", a.type_tag(), b.type_tag())),
            })
        })
        .map(|v| vec![v])
    }};
}

fn is_zero(v: &Value) -> bool {
    match v {
        Value::Int64(0) | Value::Int32(0) | Value::UInt64(0) => true,
        Value::Float64(f) => *f == 0.0,
        Value::Float32(f) => *f == 0.0,
        _ => false,
    }
}

fn apply(m: &Module, f: &FnDecl, this: Option<&Instance>, args: Vec<Value>) -> Result<Vec<Value>, String> {
    let ret = f.rets.first();
    match &f.op {
        Op::Add => {
            if let Some(Value::String8(_)) = args.first() {
                let s: String = args.iter().filter_map(|a| a.as_str()).collect();
                return Ok(vec![Value::String8(s)]);
            }
            arith!(args, wrapping_add, +)
        }
        Op::Sub => arith!(args, wrapping_sub, -),
        Op::Mul => arith!(args, wrapping_mul, *),
        Op::Div => {
            if args.iter().skip(1).any(is_zero) {
                return Err("division by zero".into());
            }
            arith!(args, wrapping_div, /)
        }
        Op::Neg => Ok(vec![match &args[0] {
            Value::Int64(a) => Value::Int64(a.wrapping_neg()),
            Value::Int32(a) => Value::Int32(a.wrapping_neg()),
            Value::Float64(a) => Value::Float64(-a),
            Value::Float32(a) => Value::Float32(-a),
            other => return Err(format!("cannot negate {}", other.type_tag())),
        }]),
        Op::Echo => Ok(args),
        Op::Call => {
            let mut it = args.into_iter();
            let Some(Value::Callable(c)) = it.next() else {
                return Err("first argument must be a callable".into());
            };
            let rest: Vec<Value> = it.collect();
            unsafe { call_values(&c.xcall, &rest, f.rets.len()) }.map_err(|e| e.to_string())
        }
        Op::Lookup => {
            let name = args[0].as_str().unwrap_or_default();
            let index = m
                .manifest
                .functions
                .iter()
                .position(|g| g.name == name)
                .ok_or_else(|| format!("entity not found: {name}"))?;
            let module = state()
                .modules
                .lock()
                .unwrap_or_else(|p| p.into_inner())
                .get(&m.path)
                .cloned()
                .ok_or("module unloaded")?;
            Ok(vec![Value::Handle(register(Arc::new(Object::Function { module, index })))])
        }
        Op::Len => Ok(vec![Value::Int64(match &args[0] {
            Value::Array(a) => a.items.len() as i64,
            v => v.as_str().map_or(0, |s| s.chars().count() as i64),
        })]),
        Op::Sum => {
            let Value::Array(ArrayValue { items, .. }) = &args[0] else {
                return Err("sum takes an array".into());
            };
            let total = items.iter().try_fold(0i64, |acc, v| {
                v.as_i64().map(|x| acc.wrapping_add(x)).ok_or("sum takes int64 elements")
            })?;
            Ok(vec![Value::Int64(total)])
        }
        Op::Const(v) => {
            let r = ret.ok_or("const without a return type")?;
            Ok(vec![coerce(v.clone(), r, f.line).map_err(|e| e.message)?])
        }
        Op::Fail(msg) => Err(msg.clone()),
        Op::Make => {
            let alias = ret.and_then(|r| r.alias.as_deref()).ok_or("make needs a handle<Class> result")?;
            let cls = m.manifest.class(alias).ok_or_else(|| format!("unknown class {alias}"))?;
            Ok(vec![construct(cls, f, &args)])
        }
        Op::Get(field) => {
            let this = this.ok_or("get needs an instance")?;
            Ok(vec![this.field(field).ok_or_else(|| format!("no field {field}"))?])
        }
        Op::Set(field) => {
            let this = this.ok_or("set needs an instance")?;
            this.set(field, args.into_iter().next().ok_or("set needs a value")?);
            Ok(Vec::new())
        }
        Op::Incr(field, by) => {
            let this = this.ok_or("incr needs an instance")?;
            let step = match by {
                Some(_) => args[0].as_i64().ok_or("incr step must be int64")?,
                None => 1,
            };
            let mut fields = lock(&this.fields);
            let slot = fields.get_mut(field).ok_or_else(|| format!("no field {field}"))?;
            let Value::Int64(v) = slot else {
                return Err(format!("field {field} is not int64"));
            };
            *v = v.wrapping_add(step);
            let new = *v;
            Ok(if f.rets.is_empty() { Vec::new() } else { vec![Value::Int64(new)] })
        }
    }
}

fn new_xcall(target: Target, params: &[TypeInfo], rets: &[TypeInfo]) -> XCallPtr {
    let ctx = Box::into_raw(Box::new(Context {
        target,
        params: params.to_vec(),
        rets: rets.to_vec(),
    })) as *mut c_void;
    let xcall = match select_entrypoint(params.len(), rets.len()) {
        EntrypointKind::ParamsRet => XCall::with_params(xcall_params_ret, ctx),
        EntrypointKind::ParamsNoRet => XCall::with_params(xcall_params_no_ret, ctx),
        EntrypointKind::NoParamsRet => XCall::with_params(xcall_no_params_ret, ctx),
        EntrypointKind::NoParamsNoRet => XCall::without_params(xcall_no_params_no_ret, ctx),
    };
    let p = Box::into_raw(Box::new(xcall));
    let s = state();
    lock(&s.retired).remove(&(p as usize));
    lock(&s.live).insert(p as usize);
    XCallPtr(p)
}

unsafe fn drop_xcall(p: *mut XCall) {
    let x = Box::from_raw(p);
    if !x.context().is_null() {
        drop(Box::from_raw(x.context() as *mut Context));
    }
}

/// The tabular runtime. All instances share one process-wide state.
#[derive(Debug, Default, Clone, Copy)]
pub struct TabularRuntime;

impl TabularRuntime {
    pub fn new() -> TabularRuntime {
        TabularRuntime
    }

    fn ensure_loaded(&self) -> GuestResult<()> {
        if state().loaded.load(Ordering::SeqCst) {
            Ok(())
        } else {
            Err(GuestError("tabular runtime is not loaded".into()))
        }
    }
}

impl RuntimePlugin for TabularRuntime {
    fn runtime_id(&self) -> u64 {
        RUNTIME_ID
    }

    fn load_runtime(&self) -> GuestResult<()> {
        let s = state();
        if !s.loaded.swap(true, Ordering::SeqCst) {
            s.inits.fetch_add(1, Ordering::SeqCst);
        }
        Ok(())
    }

    fn free_runtime(&self) -> GuestResult<()> {
        let s = state();
        if !s.loaded.swap(false, Ordering::SeqCst) {
            return Err(GuestError("tabular runtime is not loaded".into()));
        }
        lock(&s.modules).clear();
        s.handles.clear();
        let live: Vec<usize> = lock(&s.live).drain().collect();
        for p in live {
            unsafe { drop_xcall(p as *mut XCall) };
            lock(&s.retired).insert(p);
        }
        s.teardowns.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn load_entity(
        &self,
        module_path: &str,
        function_path: &str,
        params: &[TypeInfo],
        rets: &[TypeInfo],
    ) -> GuestResult<XCallPtr> {
        self.ensure_loaded()?;
        let m = load_module(module_path)?;
        let target = resolve_target(&m, function_path, params, rets)?;
        Ok(new_xcall(target, params, rets))
    }

    fn make_callable(&self, token: *mut c_void, params: &[TypeInfo], rets: &[TypeInfo]) -> GuestResult<XCallPtr> {
        self.ensure_loaded()?;
        if token.is_null() {
            return Err(GuestError("null callable token".into()));
        }
        let cdt = unsafe { &*(token as *const Cdt) };
        let value = unsafe { decode(cdt) }.map_err(|e| GuestError(format!("invalid callable token: {e}")))?;
        match value {
            Value::Handle(h) => {
                if h.runtime_id != RUNTIME_ID {
                    return Err(GuestError(format!(
                        "foreign callable token from runtime {:#018x}",
                        h.runtime_id
                    )));
                }
                let obj = resolve(&h).map_err(GuestError)?;
                let Object::Function { module, index } = &*obj else {
                    return Err(GuestError("handle does not refer to a function".into()));
                };
                let f = &module.manifest.functions[*index];
                let declared = fn_params(f, None);
                if !signature_matches((params, rets), (&declared, &f.rets)) {
                    return Err(GuestError(format!(
                        "signature mismatch for {}: requested {}, declared {}",
                        f.name,
                        signature_text(params, rets),
                        signature_text(&declared, &f.rets)
                    )));
                }
                Ok(new_xcall(Target::Function(module.clone(), *index), params, rets))
            }
            Value::Callable(CallableValue {
                xcall,
                parameter_types,
                retval_types,
            }) => {
                let base = |ts: &[TypeInfo]| ts.iter().map(|t| t.ty).collect::<Vec<MetaFFIType>>();
                if base(params) != parameter_types || base(rets) != retval_types {
                    return Err(GuestError("signature does not match the callable's declared types".into()));
                }
                if xcall.is_null() {
                    return Err(GuestError("callable token has a null entrypoint".into()));
                }
                Ok(new_xcall(Target::Forward(xcall), params, rets))
            }
            other => Err(GuestError(format!(
                "invalid callable token: expected a handle or callable, got {}",
                other.type_tag()
            ))),
        }
    }

    fn free_xcall(&self, xcall: XCallPtr) -> GuestResult<()> {
        let s = state();
        let addr = xcall.0 as usize;
        if xcall.is_null() {
            return Ok(());
        }
        if lock(&s.live).remove(&addr) {
            unsafe { drop_xcall(xcall.0) };
            lock(&s.retired).insert(addr);
            return Ok(());
        }
        if lock(&s.retired).contains(&addr) {
            return Err(GuestError("xcall already freed".into()));
        }
        if unsafe { (*xcall.0).context() }.is_null() {
            return Ok(());
        }
        Err(GuestError("xcall was not created by the tabular runtime".into()))
    }
}
