//! The tabular manifest format (version 1).
//!
//! A manifest is a line-oriented text file declaring one module:
//!
//! ```text
//! tabular 1
//! module counter
//!
//! fn add(x: int64, y: int64) -> int64 = add
//! global total: int64 = 0
//! global version: string8 = "1.0" readonly
//!
//! class Counter
//!   new(value: int64)
//!   method inc() = incr value
//!   static method zero() -> handle<Counter> = make
//!   field value: int64 = 0
//! end
//! ```
//!
//! The full grammar lives in `docs/manifest.md`.

use std::collections::HashSet;
use std::fmt;

use metaffi_core::cdt::{ArrayValue, Value};
use metaffi_core::types::{type_name_to_constant, MetaFFIType, TypeInfo, DYNAMIC_DIMENSIONS};
use thiserror::Error;

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ManifestError> {
    Err(ManifestError {
        line,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    ReadWrite,
    ReadOnly,
    WriteOnly,
}

impl Access {
    pub fn readable(self) -> bool {
        self != Access::WriteOnly
    }

    pub fn writable(self) -> bool {
        self != Access::ReadOnly
    }
}

/// The built-in behaviour behind a declared function or method.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    /// Sum of the arguments (numbers), or their concatenation (strings).
    Add,
    Sub,
    Mul,
    /// Fails with "division by zero" on a zero divisor.
    Div,
    Neg,
    /// Returns the arguments unchanged.
    Echo,
    /// Invokes the first argument (a callable) with the rest.
    Call,
    /// Returns a handle to the module function with the given name.
    Lookup,
    /// Length of a string or array.
    Len,
    /// Sum of an int64 array.
    Sum,
    Const(Value),
    /// Always fails with the given message.
    Fail(String),
    /// Constructs a new instance (constructors and `make`).
    Make,
    Get(String),
    Set(String),
    /// `incr field` or `incr field by param`.
    Incr(String, Option<String>),
}

impl Op {
    fn uses_fields(&self) -> bool {
        matches!(self, Op::Get(_) | Op::Set(_) | Op::Incr(..))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub rets: Vec<TypeInfo>,
    pub op: Op,
    pub overload_index: i64,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: TypeInfo,
    pub init: Value,
    pub access: Access,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub decl: FnDecl,
    /// Instance methods receive the object handle as an implicit first parameter.
    pub instance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub constructors: Vec<FnDecl>,
    pub methods: Vec<MethodDecl>,
    pub fields: Vec<VarDecl>,
    pub line: usize,
}

impl ClassDecl {
    pub fn field(&self, name: &str) -> Option<&VarDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    /// The handle type of this class's instances.
    pub fn handle_type(&self) -> TypeInfo {
        TypeInfo::new(MetaFFIType::HANDLE).with_alias(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    pub module: String,
    pub functions: Vec<FnDecl>,
    pub globals: Vec<VarDecl>,
    pub classes: Vec<ClassDecl>,
}

impl Manifest {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&VarDecl> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn functions_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a FnDecl> + 'a {
        self.functions.iter().filter(move |f| f.name == name)
    }
}

/// Canonical text of a declared type, the inverse of the type syntax.
pub fn type_text(t: &TypeInfo) -> String {
    let base = t.ty.base();
    let mut s = if base.0 == 0 { "array".to_string() } else { base.name() };
    if let Some(a) = &t.alias {
        s.push_str(&format!("<{a}>"));
    }
    if t.ty.is_array() && base.0 != 0 {
        if t.dimensions == DYNAMIC_DIMENSIONS {
            s.push_str("[*]");
        } else {
            for _ in 0..t.dimensions.max(1) {
                s.push_str("[]");
            }
        }
    }
    s
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str, line: usize) -> Self {
        Cursor { s, pos: 0, line }
    }

    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let r = self.rest();
        self.pos += r.len() - r.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), ManifestError> {
        if self.eat(tok) {
            Ok(())
        } else {
            err(self.line, format!("expected '{tok}' at '{}'", self.rest().trim()))
        }
    }

    fn ident(&mut self) -> Result<&'a str, ManifestError> {
        self.skip_ws();
        let r = self.rest();
        let n = r
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '.'))
            .map_or(r.len(), |(i, _)| i);
        if n == 0 || r.as_bytes()[0].is_ascii_digit() {
            return err(self.line, format!("expected a name at '{}'", r.trim()));
        }
        self.pos += n;
        Ok(&r[..n])
    }

    fn keyword(&mut self, kw: &str) -> bool {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with(kw)
            && !r[kw.len()..]
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn ty(&mut self) -> Result<TypeInfo, ManifestError> {
        let line = self.line;
        let name = self.ident()?;
        let base = if name == "array" {
            MetaFFIType::ARRAY
        } else {
            type_name_to_constant(name).map_err(|e| ManifestError {
                line,
                message: e.to_string(),
            })?
        };
        let mut info = TypeInfo::new(base);
        if self.eat("<") {
            let alias = self.ident()?;
            self.expect(">")?;
            info.alias = Some(alias.to_string());
        }
        let mut dims = 0;
        loop {
            if self.eat("[]") {
                dims += 1;
            } else if self.eat("[*]") {
                if dims != 0 {
                    return err(line, "'[*]' cannot be combined with '[]'");
                }
                dims = DYNAMIC_DIMENSIONS;
                break;
            } else {
                break;
            }
        }
        if dims != 0 {
            if base.is_array() {
                return err(line, format!("'{name}' is already an array type"));
            }
            let alias = info.alias.take();
            info = TypeInfo::new(base.as_array()).with_dimensions(dims);
            info.alias = alias;
        }
        Ok(info)
    }

    fn literal(&mut self) -> Result<Value, ManifestError> {
        self.skip_ws();
        let line = self.line;
        let r = self.rest();
        if r.starts_with('"') {
            let mut de = serde_json::Deserializer::from_str(r).into_iter::<String>();
            let s = de
                .next()
                .ok_or_else(|| ManifestError { line, message: "unterminated string".into() })?
                .map_err(|e| ManifestError {
                    line,
                    message: format!("bad string literal: {e}"),
                })?;
            self.pos += de.byte_offset();
            return Ok(Value::String8(s));
        }
        if self.keyword("true") {
            return Ok(Value::Bool(true));
        }
        if self.keyword("false") {
            return Ok(Value::Bool(false));
        }
        let n = r
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || matches!(c, '-' | '+' | '.')))
            .map_or(r.len(), |(i, _)| i);
        let text = &r[..n];
        self.pos += n;
        if let Ok(i) = text.parse::<i64>() {
            return Ok(Value::Int64(i));
        }
        if let Ok(f) = text.parse::<f64>() {
            return Ok(Value::Float64(f));
        }
        err(line, format!("expected a literal at '{}'", r.trim()))
    }
}

/// Converts a literal to the declared type.
pub(crate) fn coerce(lit: Value, ty: &TypeInfo, line: usize) -> Result<Value, ManifestError> {
    let range = |i: i64, ty: &str| ManifestError {
        line,
        message: format!("{i} out of range for {ty}"),
    };
    let out = match (&lit, ty.ty) {
        (_, MetaFFIType::ANY) => lit,
        (Value::Int64(i), MetaFFIType::INT64) => Value::Int64(*i),
        (Value::Int64(i), MetaFFIType::INT32) => {
            Value::Int32(i32::try_from(*i).map_err(|_| range(*i, "int32"))?)
        }
        (Value::Int64(i), MetaFFIType::UINT64) => {
            Value::UInt64(u64::try_from(*i).map_err(|_| range(*i, "uint64"))?)
        }
        (Value::Int64(i), MetaFFIType::FLOAT64) => Value::Float64(*i as f64),
        (Value::Float64(f), MetaFFIType::FLOAT64) => Value::Float64(*f),
        (Value::Float64(f), MetaFFIType::FLOAT32) => Value::Float32(*f as f32),
        (Value::Int64(i), MetaFFIType::FLOAT32) => Value::Float32(*i as f32),
        (Value::Bool(b), MetaFFIType::BOOL) => Value::Bool(*b),
        (Value::String8(s), MetaFFIType::STRING8) => Value::String8(s.clone()),
        _ => return err(line, format!("literal {lit:?} does not fit type {}", type_text(ty))),
    };
    Ok(out)
}

/// Zero value of a type, used when a declaration has no initializer.
pub fn default_value(ty: &TypeInfo) -> Option<Value> {
    let v = match ty.ty {
        t if t.is_array() => Value::Array(ArrayValue::new(t.base(), Vec::new())),
        MetaFFIType::INT64 => Value::Int64(0),
        MetaFFIType::INT32 => Value::Int32(0),
        MetaFFIType::UINT64 => Value::UInt64(0),
        MetaFFIType::FLOAT64 => Value::Float64(0.0),
        MetaFFIType::FLOAT32 => Value::Float32(0.0),
        MetaFFIType::BOOL => Value::Bool(false),
        MetaFFIType::STRING8 => Value::String8(String::new()),
        _ => return None,
    };
    Some(v)
}

fn params(c: &mut Cursor<'_>) -> Result<Vec<Param>, ManifestError> {
    c.expect("(")?;
    let mut out: Vec<Param> = Vec::new();
    if c.eat(")") {
        return Ok(out);
    }
    loop {
        let name = c.ident()?.to_string();
        c.expect(":")?;
        let ty = c.ty()?;
        if out.iter().any(|p| p.name == name) {
            return err(c.line, format!("duplicate parameter '{name}'"));
        }
        out.push(Param { name, ty });
        if c.eat(")") {
            return Ok(out);
        }
        c.expect(",")?;
    }
}

fn rets(c: &mut Cursor<'_>) -> Result<Vec<TypeInfo>, ManifestError> {
    if !c.eat("->") {
        return Ok(Vec::new());
    }
    if c.eat("(") {
        let mut out = Vec::new();
        if c.eat(")") {
            return Ok(out);
        }
        loop {
            out.push(c.ty()?);
            if c.eat(")") {
                return Ok(out);
            }
            c.expect(",")?;
        }
    }
    Ok(vec![c.ty()?])
}

fn op(c: &mut Cursor<'_>) -> Result<Op, ManifestError> {
    let line = c.line;
    let name = c.ident()?;
    let op = match name {
        "add" => Op::Add,
        "sub" => Op::Sub,
        "mul" => Op::Mul,
        "div" => Op::Div,
        "neg" => Op::Neg,
        "echo" => Op::Echo,
        "call" => Op::Call,
        "lookup" => Op::Lookup,
        "len" => Op::Len,
        "sum" => Op::Sum,
        "make" => Op::Make,
        "const" => Op::Const(c.literal()?),
        "fail" => match c.literal()? {
            Value::String8(s) => Op::Fail(s),
            _ => return err(line, "fail takes a string literal"),
        },
        "get" => Op::Get(c.ident()?.to_string()),
        "set" => Op::Set(c.ident()?.to_string()),
        "incr" => {
            let field = c.ident()?.to_string();
            let by = if c.keyword("by") { Some(c.ident()?.to_string()) } else { None };
            Op::Incr(field, by)
        }
        other => return err(line, format!("unknown operation '{other}'")),
    };
    Ok(op)
}

fn var(c: &mut Cursor<'_>) -> Result<VarDecl, ManifestError> {
    let line = c.line;
    let name = c.ident()?.to_string();
    c.expect(":")?;
    let ty = c.ty()?;
    let init = if c.eat("=") {
        coerce(c.literal()?, &ty, line)?
    } else {
        default_value(&ty).ok_or_else(|| ManifestError {
            line,
            message: format!("'{name}' of type {} needs an initializer", type_text(&ty)),
        })?
    };
    let access = if c.keyword("readonly") {
        Access::ReadOnly
    } else if c.keyword("writeonly") {
        Access::WriteOnly
    } else {
        Access::ReadWrite
    };
    Ok(VarDecl {
        name,
        ty,
        init,
        access,
        line,
    })
}

fn function(c: &mut Cursor<'_>, name: String) -> Result<FnDecl, ManifestError> {
    let line = c.line;
    let params = params(c)?;
    let rets = rets(c)?;
    c.expect("=")?;
    let op = op(c)?;
    Ok(FnDecl {
        name,
        params,
        rets,
        op,
        overload_index: 0,
        line,
    })
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '\\' if in_str => escaped = !escaped,
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => escaped = false,
        }
        if ch != '\\' {
            escaped = false;
        }
    }
    line
}

/// Parses and checks a manifest.
pub fn parse(text: &str) -> Result<Manifest, ManifestError> {
    let mut m = Manifest::default();
    let mut seen_header = false;
    let mut class: Option<ClassDecl> = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let mut c = Cursor::new(body, line);
        if !seen_header {
            if !c.keyword("tabular") {
                return err(line, "manifest must start with 'tabular <version>'");
            }
            let v = c.rest().split_whitespace().next().and_then(|v| v.parse::<u32>().ok());
            c.pos = c.s.len();
            match v {
                Some(VERSION) => {}
                Some(v) => return err(line, format!("unsupported manifest version {v}")),
                None => return err(line, "expected a version number after 'tabular'"),
            }
            seen_header = true;
        } else if let Some(cls) = class.as_mut() {
            if c.keyword("end") {
                m.classes.push(class.take().expect("open class"));
            } else if c.keyword("new") {
                let mut f = function_without_op(&mut c, "new".into())?;
                f.op = Op::Make;
                f.rets = vec![cls.handle_type()];
                cls.constructors.push(f);
            } else if c.keyword("static") {
                if !c.keyword("method") {
                    return err(line, "expected 'method' after 'static'");
                }
                let name = c.ident()?.to_string();
                let decl = function(&mut c, name)?;
                cls.methods.push(MethodDecl { decl, instance: false });
            } else if c.keyword("method") {
                let name = c.ident()?.to_string();
                let decl = function(&mut c, name)?;
                cls.methods.push(MethodDecl { decl, instance: true });
            } else if c.keyword("field") {
                cls.fields.push(var(&mut c)?);
            } else {
                return err(line, format!("unexpected '{body}' inside class {}", cls.name));
            }
        } else if c.keyword("module") {
            if !m.module.is_empty() {
                return err(line, "module declared twice");
            }
            m.module = c.ident()?.to_string();
        } else if c.keyword("fn") {
            let name = c.ident()?.to_string();
            m.functions.push(function(&mut c, name)?);
        } else if c.keyword("global") {
            m.globals.push(var(&mut c)?);
        } else if c.keyword("class") {
            let name = c.ident()?.to_string();
            class = Some(ClassDecl {
                name,
                constructors: Vec::new(),
                methods: Vec::new(),
                fields: Vec::new(),
                line,
            });
        } else if c.keyword("end") {
            return err(line, "'end' without an open class");
        } else {
            return err(line, format!("unknown declaration '{body}'"));
        }
        if !c.at_end() {
            return err(line, format!("unexpected trailing text '{}'", c.rest()));
        }
    }
    if !seen_header {
        return err(last_line.max(1), "empty manifest");
    }
    if let Some(cls) = class {
        return err(cls.line, format!("class {} is missing 'end'", cls.name));
    }
    if m.module.is_empty() {
        return err(1, "missing 'module' declaration");
    }
    check(&mut m)?;
    Ok(m)
}

fn function_without_op(c: &mut Cursor<'_>, name: String) -> Result<FnDecl, ManifestError> {
    let line = c.line;
    let params = params(c)?;
    Ok(FnDecl {
        name,
        params,
        rets: Vec::new(),
        op: Op::Make,
        overload_index: 0,
        line,
    })
}

fn same_signature(a: &FnDecl, b: &FnDecl) -> bool {
    a.params.iter().map(|p| &p.ty).eq(b.params.iter().map(|p| &p.ty)) && a.rets == b.rets
}

/// Numbers overloads and checks every declaration against its operation.
fn check(m: &mut Manifest) -> Result<(), ManifestError> {
    number_overloads(&mut m.functions)?;
    unique(m.globals.iter().map(|g| (g.name.as_str(), g.line)), "global")?;
    unique(m.classes.iter().map(|c| (c.name.as_str(), c.line)), "class")?;
    for f in &m.functions {
        check_op(f, None, &m.classes)?;
    }
    for g in &m.globals {
        check_var(g)?;
    }
    let classes = m.classes.clone();
    for cls in &mut m.classes {
        unique(cls.fields.iter().map(|f| (f.name.as_str(), f.line)), "field")?;
        for f in &cls.fields {
            check_var(f)?;
        }
        number_overloads(&mut cls.constructors)?;
        for k in &cls.constructors {
            for p in &k.params {
                match cls.fields.iter().find(|f| f.name == p.name) {
                    Some(f) if f.ty == p.ty => {}
                    Some(f) => {
                        return err(
                            k.line,
                            format!(
                                "parameter '{}' is {} but field '{}' is {}",
                                p.name,
                                type_text(&p.ty),
                                f.name,
                                type_text(&f.ty)
                            ),
                        )
                    }
                    None => {
                        return err(k.line, format!("constructor parameter '{}' names no field", p.name))
                    }
                }
            }
        }
        let mut decls: Vec<FnDecl> = cls.methods.iter().map(|m| m.decl.clone()).collect();
        number_overloads(&mut decls)?;
        for (m, d) in cls.methods.iter_mut().zip(decls) {
            m.decl.overload_index = d.overload_index;
        }
        let snapshot = cls.clone();
        for md in &cls.methods {
            if !md.instance && md.decl.op.uses_fields() {
                return err(md.decl.line, "static methods cannot access fields");
            }
            check_op(&md.decl, Some(&snapshot), &classes)?;
        }
    }
    Ok(())
}

fn unique<'a>(names: impl Iterator<Item = (&'a str, usize)>, kind: &str) -> Result<(), ManifestError> {
    let mut seen = HashSet::new();
    for (n, line) in names {
        if !seen.insert(n) {
            return err(line, format!("duplicate {kind} '{n}'"));
        }
    }
    Ok(())
}

fn number_overloads(fns: &mut [FnDecl]) -> Result<(), ManifestError> {
    for i in 0..fns.len() {
        let earlier: Vec<&FnDecl> = fns[..i].iter().filter(|f| f.name == fns[i].name).collect();
        if let Some(dup) = earlier.iter().find(|f| same_signature(f, &fns[i])) {
            return err(
                fns[i].line,
                format!("'{}' redeclared with the signature from line {}", fns[i].name, dup.line),
            );
        }
        fns[i].overload_index = earlier.len() as i64;
    }
    Ok(())
}

fn check_var(v: &VarDecl) -> Result<(), ManifestError> {
    v.ty.validate().map_err(|e| ManifestError {
        line: v.line,
        message: e.to_string(),
    })
}

struct Sig<'a> {
    f: &'a FnDecl,
}

impl Sig<'_> {
    fn fail<T>(&self, msg: impl fmt::Display) -> Result<T, ManifestError> {
        err(self.f.line, format!("{}: {msg}", self.f.name))
    }

    fn param_types(&self) -> Vec<MetaFFIType> {
        self.f.params.iter().map(|p| p.ty.ty).collect()
    }

    fn one_ret(&self) -> Result<&TypeInfo, ManifestError> {
        match self.f.rets.as_slice() {
            [r] => Ok(r),
            _ => self.fail("expects exactly one return value"),
        }
    }
}

fn check_op(f: &FnDecl, class: Option<&ClassDecl>, classes: &[ClassDecl]) -> Result<(), ManifestError> {
    for t in f.params.iter().map(|p| &p.ty).chain(&f.rets) {
        t.validate().map_err(|e| ManifestError {
            line: f.line,
            message: e.to_string(),
        })?;
        if let (MetaFFIType::HANDLE, Some(alias)) = (t.ty, &t.alias) {
            if !classes.iter().any(|c| &c.name == alias) {
                return err(f.line, format!("{}: handle alias '{alias}' names no class", f.name));
            }
        }
    }
    let s = Sig { f };
    let types = s.param_types();
    let field = |name: &str| -> Result<&VarDecl, ManifestError> {
        class
            .and_then(|c| c.field(name))
            .ok_or_else(|| ManifestError {
                line: f.line,
                message: format!("{}: unknown field '{name}'", f.name),
            })
    };
    match &f.op {
        Op::Add | Op::Sub | Op::Mul | Op::Div => {
            let r = s.one_ret()?.ty;
            if types.is_empty() || types.iter().any(|t| *t != r) {
                return s.fail(format!("all parameters and the result must share one type, got {types:?} -> {r}"));
            }
            let strings_ok = f.op == Op::Add && r.is_string();
            if !(r.is_numeric() || strings_ok) {
                return s.fail(format!("{r} is not a numeric type"));
            }
        }
        Op::Neg => {
            let r = s.one_ret()?.ty;
            if types != [r] || !r.is_numeric() {
                return s.fail("neg takes one number and returns the same type");
            }
        }
        Op::Echo => {
            if f.params.len() != f.rets.len() {
                return s.fail("echo returns as many values as it takes");
            }
        }
        Op::Call => {
            if types.first() != Some(&MetaFFIType::CALLABLE) {
                return s.fail("call takes a callable as its first parameter");
            }
        }
        Op::Lookup => {
            if types != [MetaFFIType::STRING8] || s.one_ret()?.ty != MetaFFIType::HANDLE {
                return s.fail("lookup takes a string8 name and returns a handle");
            }
        }
        Op::Len => {
            let ok = types.len() == 1 && (types[0].is_string() || types[0].is_array());
            if !ok || s.one_ret()?.ty != MetaFFIType::INT64 {
                return s.fail("len takes one string or array and returns int64");
            }
        }
        Op::Sum => {
            if types != [MetaFFIType::INT64.as_array()] || s.one_ret()?.ty != MetaFFIType::INT64 {
                return s.fail("sum takes an int64 array and returns int64");
            }
        }
        Op::Const(v) => {
            coerce(v.clone(), s.one_ret()?, f.line)?;
        }
        Op::Fail(_) => {}
        Op::Make => {
            let r = s.one_ret()?;
            let target = match (r.ty, &r.alias) {
                (MetaFFIType::HANDLE, Some(a)) => classes.iter().find(|c| &c.name == a),
                _ => None,
            };
            let Some(target) = target else {
                return s.fail("make returns handle<Class>");
            };
            for p in &f.params {
                if target.field(&p.name).map(|fd| &fd.ty) != Some(&p.ty) {
                    return s.fail(format!(
                        "parameter '{}' must name a field of {} with the same type",
                        p.name, target.name
                    ));
                }
            }
        }
        Op::Get(name) => {
            let fd = field(name)?;
            if !f.params.is_empty() || f.rets != [fd.ty.clone()] {
                return s.fail(format!("get {name} takes nothing and returns {}", type_text(&fd.ty)));
            }
        }
        Op::Set(name) => {
            let fd = field(name)?;
            if f.params.len() != 1 || f.params[0].ty != fd.ty || !f.rets.is_empty() {
                return s.fail(format!("set {name} takes one {} and returns nothing", type_text(&fd.ty)));
            }
        }
        Op::Incr(name, by) => {
            let fd = field(name)?;
            if fd.ty.ty != MetaFFIType::INT64 {
                return s.fail(format!("incr needs an int64 field, '{name}' is {}", type_text(&fd.ty)));
            }
            match by {
                Some(p) => {
                    if f.params.len() != 1 || &f.params[0].name != p || f.params[0].ty.ty != MetaFFIType::INT64 {
                        return s.fail(format!("incr {name} by {p} needs exactly one int64 parameter '{p}'"));
                    }
                }
                None if !f.params.is_empty() => return s.fail("incr without 'by' takes no parameters"),
                None => {}
            }
            if !(f.rets.is_empty() || f.rets == [fd.ty.clone()]) {
                return s.fail("incr returns nothing or the new int64 value");
            }
        }
    }
    Ok(())
}
