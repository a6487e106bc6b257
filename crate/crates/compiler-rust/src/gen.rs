//! IDL to Rust host wrapper source.

use std::collections::{HashMap, HashSet};

use metaffi_core::idl::{ArgDefinition, ClassDefinition, FunctionDefinition, IdlDefinition, ModuleDefinition};
use metaffi_core::types::{MetaFFIType, TypeInfo};
use minijinja::Environment;
use serde::Serialize;

pub const RUNTIME_TAG: &str = "runtime_plugin";

#[derive(Debug, Default, Clone)]
pub struct Options {
    /// Runtime plugin name; overrides the module's `runtime_plugin` tag.
    pub runtime: Option<String>,
    /// Module path embedded in the wrapper; defaults to the IDL file name.
    pub module_path: Option<String>,
}

impl Options {
    pub fn from_map(map: &HashMap<String, String>) -> Result<Options, String> {
        let mut o = Options::default();
        for (k, v) in map {
            match k.as_str() {
                "runtime" => o.runtime = Some(v.clone()),
                "module_path" => o.module_path = Some(v.clone()),
                other => return Err(format!("unknown host option '{other}'")),
            }
        }
        Ok(o)
    }
}

#[derive(Serialize)]
struct FnView {
    ident: String,
    signature: String,
    function_path: String,
    params_decl: String,
    param_specs: String,
    ret_specs: String,
    args: String,
    ret_type: String,
    ret_expr: String,
    ret_count: usize,
}

#[derive(Serialize)]
struct ClassView {
    name: String,
    ident: String,
    members: Vec<FnView>,
}

#[derive(Serialize)]
struct ModuleView {
    ident: String,
    runtime: String,
    module_path: String,
    functions: Vec<FnView>,
    classes: Vec<ClassView>,
}

#[derive(Serialize)]
struct FileView {
    source: String,
    modules: Vec<ModuleView>,
}

const KEYWORDS: &[&str] = &[
    "as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum", "extern", "false", "fn", "for",
    "if", "impl", "in", "let", "loop", "match", "mod", "move", "mut", "pub", "ref", "return", "self", "Self", "static",
    "struct", "super", "trait", "true", "type", "unsafe", "use", "where", "while", "yield", "box", "try", "macro",
];

/// A valid Rust identifier for `name`.
pub fn ident(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    if KEYWORDS.contains(&s.as_str()) {
        s.push('_');
    }
    s
}

fn rust_str(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

struct Types<'a> {
    /// Class name to wrapper struct.
    classes: &'a HashMap<String, String>,
}

fn scalar(ty: MetaFFIType) -> Option<&'static str> {
    Some(match ty {
        MetaFFIType::FLOAT64 => "f64",
        MetaFFIType::FLOAT32 => "f32",
        MetaFFIType::INT8 => "i8",
        MetaFFIType::INT16 => "i16",
        MetaFFIType::INT32 => "i32",
        MetaFFIType::INT64 => "i64",
        MetaFFIType::UINT8 => "u8",
        MetaFFIType::UINT16 => "u16",
        MetaFFIType::UINT32 => "u32",
        MetaFFIType::UINT64 => "u64",
        MetaFFIType::BOOL => "bool",
        MetaFFIType::STRING8 => "String",
        _ => return None,
    })
}

impl Types<'_> {
    fn class_of(&self, t: &TypeInfo) -> Option<&str> {
        if t.ty != MetaFFIType::HANDLE {
            return None;
        }
        t.alias.as_ref().and_then(|a| self.classes.get(a)).map(String::as_str)
    }

    /// Owned Rust type of a value.
    fn owned(&self, t: &TypeInfo) -> String {
        if let Some(c) = self.class_of(t) {
            return c.to_string();
        }
        if t.ty.is_array() {
            return match scalar(t.ty.base()) {
                Some(s) if t.dimensions > 0 => "Vec<".repeat(t.dimensions as usize) + s + &">".repeat(t.dimensions as usize),
                _ => "Value".into(),
            };
        }
        match t.ty {
            MetaFFIType::HANDLE => "HandleValue".into(),
            MetaFFIType::CALLABLE => "CallableValue".into(),
            ty => scalar(ty).unwrap_or("Value").into(),
        }
    }

    fn param(&self, t: &TypeInfo) -> String {
        if let Some(c) = self.class_of(t) {
            return format!("&{c}");
        }
        match self.owned(t).as_str() {
            "String" => "&str".into(),
            other => other.into(),
        }
    }

    fn value_expr(&self, t: &TypeInfo, name: &str) -> String {
        if self.class_of(t).is_some() {
            format!("Value::Handle(*{name}.handle())")
        } else {
            format!("{name}.into_value()")
        }
    }

    fn decode_expr(&self, t: &TypeInfo, expr: &str) -> String {
        if let Some(c) = self.class_of(t) {
            return format!("{c}::from_handle(HandleValue::from_value({expr})?)");
        }
        let owned = self.owned(t);
        if owned.starts_with("Vec<") {
            format!("{}::from_value({expr})?", owned.replacen("Vec<", "Vec::<", 1))
        } else {
            format!("{owned}::from_value({expr})?")
        }
    }
}

fn spec(t: &TypeInfo) -> String {
    let base = t.ty.base();
    let konst = if base.0 == 0 {
        "MetaFFIType::ARRAY".to_string()
    } else {
        format!("MetaFFIType::{}", base.name().to_uppercase())
    };
    let ty = if t.ty.is_array() && base.0 != 0 {
        format!("{konst}.as_array().0")
    } else {
        format!("{konst}.0")
    };
    let alias = match &t.alias {
        Some(a) => format!("Some(\"{}\")", rust_str(a)),
        None => "None".into(),
    };
    format!("TypeSpec::new({ty}, {alias}, {})", t.dimensions)
}

fn type_text(t: &TypeInfo) -> String {
    match &t.alias {
        Some(a) => format!("{}<{a}>", t.ty),
        None => t.ty.to_string(),
    }
}

fn signature(f: &FunctionDefinition) -> String {
    let list = |args: &[ArgDefinition]| {
        args.iter()
            .map(|a| format!("{}: {}", a.name, type_text(&a.ty)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    format!("{}({}) -> ({})", f.name, list(&f.parameters), list(&f.return_values))
}

/// Wrapper name with the overload suffix.
fn wrapper_name(name: &str, overload_index: i64) -> String {
    if overload_index > 0 {
        ident(&format!("{name}_{overload_index}"))
    } else {
        ident(name)
    }
}

fn function(types: &Types, f: &FunctionDefinition, name: String, instance: bool) -> FnView {
    let own_params = if instance { &f.parameters[1..] } else { &f.parameters[..] };
    let mut used = HashSet::new();
    let names: Vec<String> = own_params
        .iter()
        .map(|a| {
            let mut n = ident(&a.name);
            if n == "self_" || n == "out" || n == "next" {
                n.push('_');
            }
            while !used.insert(n.clone()) {
                n.push('_');
            }
            n
        })
        .collect();
    let mut decl: Vec<String> = names
        .iter()
        .zip(own_params)
        .map(|(n, a)| format!("{n}: {}", types.param(&a.ty)))
        .collect();
    let mut args: Vec<String> = names.iter().zip(own_params).map(|(n, a)| types.value_expr(&a.ty, n)).collect();
    if instance {
        decl.insert(0, "&self".into());
        args.insert(0, "Value::Handle(self.handle)".into());
    }
    let rets = &f.return_values;
    let (ret_type, ret_expr) = match rets.len() {
        0 => ("()".to_string(), "()".to_string()),
        1 => (types.owned(&rets[0].ty), types.decode_expr(&rets[0].ty, "next()")),
        _ => (
            format!("({})", rets.iter().map(|r| types.owned(&r.ty)).collect::<Vec<_>>().join(", ")),
            format!(
                "({})",
                rets.iter().map(|r| types.decode_expr(&r.ty, "next()")).collect::<Vec<_>>().join(", ")
            ),
        ),
    };
    FnView {
        ident: name,
        signature: signature(f),
        function_path: rust_str(&f.function_path),
        params_decl: decl.join(", "),
        param_specs: f.parameters.iter().map(|a| spec(&a.ty)).collect::<Vec<_>>().join(", "),
        ret_specs: rets.iter().map(|a| spec(&a.ty)).collect::<Vec<_>>().join(", "),
        args: args.join(", "),
        ret_type,
        ret_expr,
        ret_count: rets.len(),
    }
}

fn class_idents(classes: &[ClassDefinition]) -> HashMap<String, String> {
    let mut taken = HashSet::new();
    classes
        .iter()
        .map(|c| {
            let short = c.name.rsplit('.').next().unwrap_or(&c.name);
            let mut id = ident(short);
            let mut n = 1;
            while !taken.insert(id.clone()) {
                n += 1;
                id = ident(&format!("{short}{n}"));
            }
            (c.name.clone(), id)
        })
        .collect()
}

fn class(types: &Types, c: &ClassDefinition) -> ClassView {
    let mut members = Vec::new();
    for k in &c.constructors {
        let name = wrapper_name("new", k.function.overload_index);
        members.push(function(types, &k.function, name, false));
    }
    for m in &c.methods {
        let name = wrapper_name(&m.function.name, m.function.overload_index);
        members.push(function(types, &m.function, name, m.instance_required));
    }
    for f in &c.fields {
        for acc in f.getter.iter().chain(&f.setter) {
            members.push(function(types, &acc.function, ident(&acc.function.name), acc.instance_required));
        }
    }
    ClassView {
        name: c.name.clone(),
        ident: types.classes[&c.name].clone(),
        members,
    }
}

fn module(m: &ModuleDefinition, default_path: &str, opts: &Options) -> Result<ModuleView, String> {
    let runtime = opts
        .runtime
        .clone()
        .or_else(|| m.tags.get(RUNTIME_TAG).cloned())
        .ok_or_else(|| {
            format!("module '{}' names no runtime plugin: tag it '{RUNTIME_TAG}' or pass the host option 'runtime'", m.name)
        })?;
    let classes = class_idents(&m.classes);
    let types = Types { classes: &classes };
    let mut functions = Vec::new();
    for f in &m.functions {
        functions.push(function(&types, f, wrapper_name(&f.name, f.overload_index), false));
    }
    for g in &m.globals {
        for acc in g.getter.iter().chain(&g.setter) {
            functions.push(function(&types, acc, ident(&acc.name), false));
        }
    }
    Ok(ModuleView {
        ident: ident(&m.name),
        runtime: rust_str(&runtime),
        module_path: rust_str(opts.module_path.as_deref().unwrap_or(default_path)),
        functions,
        classes: m.classes.iter().map(|c| class(&types, c)).collect(),
    })
}

fn environment() -> Environment<'static> {
    let mut env = Environment::new();
    env.set_trim_blocks(true);
    env.set_lstrip_blocks(true);
    env.set_auto_escape_callback(|_| minijinja::AutoEscape::None);
    env.add_template("entity.rs.j2", include_str!("../templates/entity.rs.j2"))
        .expect("entity template");
    env.add_template("module.rs.j2", include_str!("../templates/module.rs.j2"))
        .expect("module template");
    env
}

/// The wrapper file name for an IDL.
pub fn output_file_name(idl: &IdlDefinition) -> String {
    let stem = std::path::Path::new(&idl.idl_filename_with_extension)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "metaffi".into());
    format!("{stem}_MetaFFIHost.rs")
}

pub fn generate(idl: &IdlDefinition, opts: &Options) -> Result<String, String> {
    let source = if idl.idl_filename_with_extension.is_empty() {
        "<unnamed>".to_string()
    } else {
        idl.idl_filename_with_extension.clone()
    };
    let mut seen = HashSet::new();
    let mut modules = Vec::new();
    for m in &idl.modules {
        let view = module(m, &idl.idl_filename_with_extension, opts)?;
        if !seen.insert(view.ident.clone()) {
            return Err(format!("two modules map to the Rust module name '{}'", view.ident));
        }
        modules.push(view);
    }
    let file = FileView { source, modules };
    environment()
        .get_template("module.rs.j2")
        .and_then(|t| t.render(&file))
        .map_err(|e| format!("template error: {e}"))
}
