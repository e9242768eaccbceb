//! Experiment configuration: named symbols and sequences plus an ordered
//! task list. Structural typing is left to serde; cross references, grids
//! and matrix files are checked by [`validate`].

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use glt_core::distribution::TestFunc;
use glt_core::symbol::TrigPolyJson;
use serde::Deserialize;
use serde_json::Value;

use crate::diag::{ConfigError, ErrorClass, SourceMap};
use crate::matfile;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Default seed for `random` sequences without their own.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub symbols: BTreeMap<String, Value>,
    #[serde(default)]
    pub sequences: BTreeMap<String, SeqSpec>,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BlockCount {
    Fixed(usize),
    /// Only `"sqrt"`: `m(n) = ⌊√n⌋`.
    Schedule(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default = "one")]
    pub a: String,
    pub f: TrigPolyJson,
}

fn one() -> String {
    "1".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeqSpec {
    Toeplitz { f: TrigPolyJson },
    Diag { a: String },
    Lt { a: String, f: TrigPolyJson, m: BlockCount },
    Glt { terms: Vec<TermSpec> },
    LeadingOnes { m: usize },
    Identity,
    Zero,
    Random { seed: Option<u64>, scale: Option<f64> },
    /// Canonical `Σ D_n(a) T_n(f)` sequence of a named symbol.
    Symbol { symbol: String },
    /// Expression tree over named sequences.
    Algebra { expr: Value },
    /// Matrix file or `{n}` pattern, relative to the config file.
    File { path: String },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub approx: Option<f64>,
    pub tol: Option<f64>,
}

impl Range {
    pub fn contains(&self, v: f64) -> bool {
        let lo = self.min.is_none_or(|m| v >= m);
        let hi = self.max.is_none_or(|m| v <= m);
        let near = self.approx.is_none_or(|a| (v - a).abs() <= self.tol.unwrap_or(0.0));
        v.is_finite() && lo && hi && near
    }
}

impl std::fmt::Display for Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(a) = self.approx {
            parts.push(format!("{a} ± {}", self.tol.unwrap_or(0.0)));
        }
        if let Some(m) = self.min {
            parts.push(format!(">= {m}"));
        }
        if let Some(m) = self.max {
            parts.push(format!("<= {m}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

/// Optional assertions; which keys apply depends on the task.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    pub headline: Option<Range>,
    pub values: Option<Range>,
    pub label: Option<String>,
    pub labels: Option<Vec<String>>,
    pub frobenius: Option<String>,
    pub uniform: Option<bool>,
    pub pass: Option<bool>,
    pub max_residual: Option<f64>,
    pub max_relative_gap: Option<f64>,
    pub refused: Option<bool>,
}

impl Expect {
    fn used(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let mut mark = |k: &'static str, on: bool| {
            if on {
                keys.push(k)
            }
        };
        mark("headline", self.headline.is_some());
        mark("values", self.values.is_some());
        mark("label", self.label.is_some());
        mark("labels", self.labels.is_some());
        mark("frobenius", self.frobenius.is_some());
        mark("uniform", self.uniform.is_some());
        mark("pass", self.pass.is_some());
        mark("max_residual", self.max_residual.is_some());
        mark("max_relative_gap", self.max_relative_gap.is_some());
        mark("refused", self.refused.is_some());
        keys
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PSpec {
    Finite(f64),
    /// Only `"inf"`.
    Named(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub symbol: String,
    pub seq: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub name: String,
    pub word: Value,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    Pa {
        name: Option<String>,
        seq: String,
        dims: Vec<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Dacs {
        name: Option<String>,
        x: String,
        y: String,
        dims: Vec<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Qw {
        name: Option<String>,
        seq: String,
        dims: Vec<usize>,
        deltas: Option<Vec<f64>>,
        #[serde(default)]
        expect: Expect,
    },
    Qwp {
        name: Option<String>,
        seq: String,
        dims: Vec<usize>,
        deltas: Option<Vec<f64>>,
        p: f64,
        #[serde(default)]
        expect: Expect,
    },
    Cluster {
        name: Option<String>,
        seq: String,
        /// `Δ_n = seq_n - minus_n` when given.
        minus: Option<String>,
        dims: Vec<usize>,
        eps: Vec<f64>,
        weak_tol: Option<f64>,
        strong_cap: Option<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Distribution {
        name: Option<String>,
        seq: String,
        symbol: String,
        dims: Vec<usize>,
        funcs: Option<Vec<TestFunc<f64>>>,
        grid: Option<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Isometry {
        name: Option<String>,
        seq: String,
        symbol: String,
        p: PSpec,
        dims: Vec<usize>,
        deltas: Option<Vec<f64>>,
        grid: Option<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Precond {
        name: Option<String>,
        seq: String,
        unitary: Value,
        dims: Vec<usize>,
        eps: Vec<f64>,
        weak_tol: Option<f64>,
        strong_cap: Option<usize>,
        #[serde(default)]
        expect: Expect,
    },
    Korovkin {
        name: Option<String>,
        generators: Vec<GeneratorSpec>,
        #[serde(default)]
        elements: Vec<ElementSpec>,
        unitary: Value,
        dims: Vec<usize>,
        eps: Vec<f64>,
        bound: Option<f64>,
        weak_tol: Option<f64>,
        strong_cap: Option<usize>,
        #[serde(default)]
        expect: Expect,
    },
}

pub const DEFAULT_DELTAS: [f64; 4] = [0.1, 0.05, 0.02, 0.01];

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Pa { .. } => "pa",
            TaskSpec::Dacs { .. } => "dacs",
            TaskSpec::Qw { .. } => "qw",
            TaskSpec::Qwp { .. } => "qwp",
            TaskSpec::Cluster { .. } => "cluster",
            TaskSpec::Distribution { .. } => "distribution",
            TaskSpec::Isometry { .. } => "isometry",
            TaskSpec::Precond { .. } => "precond",
            TaskSpec::Korovkin { .. } => "korovkin",
        }
    }

    fn explicit_name(&self) -> Option<&String> {
        match self {
            TaskSpec::Pa { name, .. }
            | TaskSpec::Dacs { name, .. }
            | TaskSpec::Qw { name, .. }
            | TaskSpec::Qwp { name, .. }
            | TaskSpec::Cluster { name, .. }
            | TaskSpec::Distribution { name, .. }
            | TaskSpec::Isometry { name, .. }
            | TaskSpec::Precond { name, .. }
            | TaskSpec::Korovkin { name, .. } => name.as_ref(),
        }
    }

    /// Output stem: the declared name or `<index>_<kind>`.
    pub fn name(&self, idx: usize) -> String {
        self.explicit_name().cloned().unwrap_or_else(|| format!("{:02}_{}", idx + 1, self.kind()))
    }

    pub fn dims(&self) -> &[usize] {
        match self {
            TaskSpec::Pa { dims, .. }
            | TaskSpec::Dacs { dims, .. }
            | TaskSpec::Qw { dims, .. }
            | TaskSpec::Qwp { dims, .. }
            | TaskSpec::Cluster { dims, .. }
            | TaskSpec::Distribution { dims, .. }
            | TaskSpec::Isometry { dims, .. }
            | TaskSpec::Precond { dims, .. }
            | TaskSpec::Korovkin { dims, .. } => dims,
        }
    }

    pub fn expect(&self) -> &Expect {
        match self {
            TaskSpec::Pa { expect, .. }
            | TaskSpec::Dacs { expect, .. }
            | TaskSpec::Qw { expect, .. }
            | TaskSpec::Qwp { expect, .. }
            | TaskSpec::Cluster { expect, .. }
            | TaskSpec::Distribution { expect, .. }
            | TaskSpec::Isometry { expect, .. }
            | TaskSpec::Precond { expect, .. }
            | TaskSpec::Korovkin { expect, .. } => expect,
        }
    }

    fn min_dims(&self) -> usize {
        match self {
            TaskSpec::Dacs { .. } => 3,
            TaskSpec::Distribution { .. } => 4,
            TaskSpec::Korovkin { .. } => 2,
            _ => 1,
        }
    }

    fn allowed_expect(&self) -> &'static [&'static str] {
        match self {
            TaskSpec::Pa { .. } | TaskSpec::Dacs { .. } | TaskSpec::Qw { .. } | TaskSpec::Qwp { .. } => {
                &["headline", "values"]
            }
            TaskSpec::Cluster { .. } => &["label", "labels", "frobenius", "uniform"],
            TaskSpec::Distribution { .. } => &["pass", "max_residual"],
            TaskSpec::Isometry { .. } => &["headline", "max_relative_gap"],
            TaskSpec::Precond { .. } => &["label", "pass", "frobenius"],
            TaskSpec::Korovkin { .. } => &["label", "pass", "refused"],
        }
    }

    /// Sequence names referenced directly.
    fn seq_refs(&self) -> Vec<&str> {
        match self {
            TaskSpec::Pa { seq, .. }
            | TaskSpec::Qw { seq, .. }
            | TaskSpec::Qwp { seq, .. }
            | TaskSpec::Distribution { seq, .. }
            | TaskSpec::Isometry { seq, .. }
            | TaskSpec::Precond { seq, .. } => vec![seq],
            TaskSpec::Dacs { x, y, .. } => vec![x, y],
            TaskSpec::Cluster { seq, minus, .. } => std::iter::once(seq.as_str()).chain(minus.as_deref()).collect(),
            TaskSpec::Korovkin { generators, .. } => generators.iter().map(|g| g.seq.as_str()).collect(),
        }
    }

    fn symbol_refs(&self) -> Vec<&str> {
        match self {
            TaskSpec::Distribution { symbol, .. } | TaskSpec::Isometry { symbol, .. } => vec![symbol],
            TaskSpec::Korovkin { generators, .. } => generators.iter().map(|g| g.symbol.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

pub const LABELS: [&str; 4] = ["strong", "weak", "none", "inconclusive"];
pub const FROB_LABELS: [&str; 4] = ["strong_evidence", "weak_evidence", "no_evidence", "inconclusive"];

/// A parsed config together with its location, for relative paths and
/// error context.
pub struct Loaded {
    pub path: PathBuf,
    pub text: String,
    pub config: Config,
}

impl Loaded {
    pub fn base_dir(&self) -> PathBuf {
        self.path.parent().map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn source(&self) -> SourceMap<'_> {
        SourceMap::new(&self.text)
    }

    pub fn err(&self, class: ErrorClass, msg: impl Into<String>, line: Option<usize>) -> ConfigError {
        ConfigError::new(class, msg, &self.path, line)
    }

    pub fn matrix_path(&self, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }
}

pub fn load(path: &Path) -> Result<Loaded, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(ErrorClass::Io, format!("cannot read config: {e}"), path, None))?;
    let config: Config = serde_json::from_str(&text)
        .map_err(|e| ConfigError::new(ErrorClass::Parse, e.to_string(), path, Some(e.line())))?;
    Ok(Loaded { path: path.to_path_buf(), text, config })
}

/// Names referenced by an algebra expression tree.
pub fn expr_refs(v: &Value, out: &mut Vec<String>) -> Result<(), String> {
    match v {
        Value::String(s) => {
            out.push(s.clone());
            Ok(())
        }
        Value::Object(m) => {
            let op = m.get("op").and_then(Value::as_str).ok_or("expression node needs an `op`")?;
            match op {
                "add" | "sub" | "mul" => {
                    let args = m.get("args").and_then(Value::as_array).ok_or(format!("`{op}` needs `args`"))?;
                    if args.len() < 2 {
                        return Err(format!("`{op}` needs at least two args"));
                    }
                    args.iter().try_for_each(|a| expr_refs(a, out))
                }
                "adjoint" | "scale" => {
                    check_scale(op, v)?;
                    expr_refs(m.get("arg").ok_or(format!("`{op}` needs `arg`"))?, out)
                }
                other => Err(format!("unknown expression op `{other}`")),
            }
        }
        _ => Err("expression must be a sequence name or an op node".into()),
    }
}

fn check_scale(op: &str, v: &Value) -> Result<(), String> {
    if op != "scale" {
        return Ok(());
    }
    match v.get("c").and_then(Value::as_array) {
        Some(c) if c.len() == 2 && c.iter().all(|x| x.as_f64().is_some_and(f64::is_finite)) => Ok(()),
        _ => Err("`scale` needs `c`: [re, im]".into()),
    }
}

/// Generator names referenced by a Korovkin word.
pub fn word_refs(v: &Value, out: &mut Vec<String>) -> Result<(), String> {
    match v {
        Value::String(s) if s == "one" => Ok(()),
        Value::Object(m) if m.contains_key("gen") => {
            out.push(m["gen"].as_str().ok_or("`gen` must be a generator name")?.to_owned());
            Ok(())
        }
        Value::Object(m) => {
            let op = m.get("op").and_then(Value::as_str).ok_or("word node needs `op` or `gen`")?;
            match op {
                "add" | "mul" => {
                    let args = m.get("args").and_then(Value::as_array).ok_or(format!("`{op}` needs `args`"))?;
                    if args.len() < 2 {
                        return Err(format!("`{op}` needs at least two args"));
                    }
                    args.iter().try_for_each(|a| word_refs(a, out))
                }
                "adjoint" | "scale" => {
                    check_scale(op, v)?;
                    word_refs(m.get("arg").ok_or(format!("`{op}` needs `arg`"))?, out)
                }
                other => Err(format!("unknown word op `{other}`")),
            }
        }
        _ => Err("word must be \"one\", {\"gen\": name} or an op node".into()),
    }
}

pub fn check_unitary_spec(v: &Value) -> Result<(), String> {
    match v {
        Value::String(s) if s == "fourier" => Ok(()),
        Value::Object(m) if m.len() == 1 => match (m.keys().next().map(String::as_str), m.values().next()) {
            (Some("block_fourier"), Some(Value::Number(k))) if k.as_u64().is_some_and(|k| k >= 1) => Ok(()),
            (Some("block_fourier"), Some(Value::String(s))) if s == "sqrt" => Ok(()),
            (Some("explicit"), Some(Value::String(_))) => Ok(()),
            _ => Err(format!("unsupported unitary family {v}")),
        },
        _ => Err(format!("unsupported unitary family {v}")),
    }
}

fn check_dims(dims: &[usize], min: usize) -> Result<(), String> {
    if dims.len() < min {
        return Err(format!("needs at least {min} dimensions, got {}", dims.len()));
    }
    if dims.contains(&0) {
        return Err("dimensions must be positive".into());
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("dimensions must be strictly increasing: {dims:?}"));
    }
    Ok(())
}

fn check_deltas(deltas: &[f64]) -> Result<(), String> {
    if deltas.is_empty() {
        return Err("deltas must be non-empty".into());
    }
    match deltas.iter().find(|d| !(**d >= 0.0 && **d <= 0.5)) {
        Some(d) => Err(format!("delta {d} outside [0, 1/2]")),
        None => Ok(()),
    }
}

fn check_eps(eps: &[f64]) -> Result<(), String> {
    if eps.is_empty() {
        return Err("eps must be non-empty".into());
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(format!("eps values must be positive: {eps:?}"));
    }
    if eps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("eps must be strictly increasing: {eps:?}"));
    }
    Ok(())
}

/// Sequence names a sequence depends on.
fn seq_deps(spec: &SeqSpec) -> Result<Vec<String>, String> {
    match spec {
        SeqSpec::Algebra { expr } => {
            let mut out = Vec::new();
            expr_refs(expr, &mut out)?;
            Ok(out)
        }
        _ => Ok(Vec::new()),
    }
}

/// Checks everything that can be checked without computing: references,
/// grids, parameters, expectation keys and matrix-file shapes.
pub fn validate(ld: &Loaded) -> Result<(), ConfigError> {
    let cfg = &ld.config;
    let src = ld.source();
    let invalid = |msg: String, line: Option<usize>| ld.err(ErrorClass::InvalidConfig, msg, line);

    for (name, v) in &cfg.symbols {
        glt_core::SymbolExpr64::from_json(v).map_err(|e| invalid(format!("symbol `{name}`: {e}"), src.definition(name)))?;
    }
    for (name, spec) in &cfg.sequences {
        let line = src.definition(name);
        let deps = seq_deps(spec).map_err(|e| invalid(format!("sequence `{name}`: {e}"), line))?;
        for d in deps {
            if !cfg.sequences.contains_key(&d) {
                return Err(ld.err(ErrorClass::UnknownName, format!("sequence `{name}` references unknown sequence `{d}`"), src.reference(&d).or(line)));
            }
        }
        match spec {
            SeqSpec::Symbol { symbol } if !cfg.symbols.contains_key(symbol) => {
                return Err(ld.err(ErrorClass::UnknownName, format!("sequence `{name}` references unknown symbol `{symbol}`"), src.reference(symbol).or(line)));
            }
            SeqSpec::Diag { a } | SeqSpec::Lt { a, .. } => {
                glt_core::ScalarFunc::parse(a).map_err(|e| invalid(format!("sequence `{name}`: {e}"), line))?;
            }
            SeqSpec::Glt { terms } => {
                if terms.is_empty() {
                    return Err(invalid(format!("sequence `{name}`: empty term list"), line));
                }
                for t in terms {
                    glt_core::ScalarFunc::parse(&t.a).map_err(|e| invalid(format!("sequence `{name}`: {e}"), line))?;
                }
            }
            SeqSpec::LeadingOnes { m: 0 } => return Err(invalid(format!("sequence `{name}`: m must be >= 1"), line)),
            SeqSpec::Random { scale: Some(s), .. } if !(s.is_finite() && *s > 0.0) => {
                return Err(invalid(format!("sequence `{name}`: scale must be positive"), line));
            }
            _ => {}
        }
        if let SeqSpec::Lt { m, .. } = spec {
            match m {
                BlockCount::Fixed(0) => return Err(invalid(format!("sequence `{name}`: m must be >= 1"), line)),
                BlockCount::Schedule(s) if s != "sqrt" => {
                    return Err(invalid(format!("sequence `{name}`: block schedule must be a count or \"sqrt\""), line));
                }
                _ => {}
            }
        }
    }
    detect_cycles(ld)?;

    let mut names = BTreeSet::new();
    for (idx, task) in cfg.tasks.iter().enumerate() {
        let tline = src.task_line(idx);
        let tname = task.name(idx);
        if tname.is_empty() || !tname.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) || tname.starts_with('.') {
            return Err(invalid(format!("task name `{tname}` must be non-empty and use only [A-Za-z0-9_.-]"), tline));
        }
        if tname == "summary" || !names.insert(tname.clone()) {
            return Err(invalid(format!("task name `{tname}` is reserved or already used"), tline));
        }
        for s in task.seq_refs() {
            if !cfg.sequences.contains_key(s) {
                return Err(ld.err(ErrorClass::UnknownName, format!("task `{tname}`: unknown sequence `{s}`"), src.in_task(idx, &format!("\"{s}\""))));
            }
        }
        for s in task.symbol_refs() {
            if !cfg.symbols.contains_key(s) {
                return Err(ld.err(ErrorClass::UnknownName, format!("task `{tname}`: unknown symbol `{s}`"), src.in_task(idx, &format!("\"{s}\""))));
            }
        }
        check_dims(task.dims(), task.min_dims())
            .map_err(|e| ld.err(ErrorClass::InvalidDims, format!("task `{tname}`: {e}"), src.in_task(idx, "\"dims\"")))?;
        let allowed = task.allowed_expect();
        if let Some(k) = task.expect().used().into_iter().find(|k| !allowed.contains(k)) {
            return Err(invalid(format!("task `{tname}`: expectation `{k}` does not apply to {} tasks", task.kind()), src.in_task(idx, &format!("\"{k}\""))));
        }
        check_labels(task.expect()).map_err(|e| invalid(format!("task `{tname}`: {e}"), src.in_task(idx, "\"expect\"")))?;
        check_task_params(task).map_err(|e| invalid(format!("task `{tname}`: {e}"), tline))?;
        if let TaskSpec::Korovkin { generators, elements, .. } = task {
            let names: BTreeSet<&str> = generators.iter().map(|g| g.name.as_str()).collect();
            for el in elements {
                let mut refs = Vec::new();
                word_refs(&el.word, &mut refs).map_err(|e| invalid(format!("task `{tname}` element `{}`: {e}", el.name), src.in_task(idx, &format!("\"{}\"", el.name))))?;
                if let Some(r) = refs.iter().find(|r| !names.contains(r.as_str())) {
                    return Err(ld.err(ErrorClass::UnknownName, format!("task `{tname}` element `{}`: unknown generator `{r}`", el.name), src.in_task(idx, &format!("\"{r}\""))));
                }
            }
        }
    }
    check_matrix_files(ld)
}

fn check_labels(e: &Expect) -> Result<(), String> {
    let mut all: Vec<&String> = e.label.iter().collect();
    all.extend(e.labels.iter().flatten());
    if let Some(bad) = all.iter().find(|l| !LABELS.contains(&l.as_str())) {
        return Err(format!("unknown cluster label `{bad}`"));
    }
    if let Some(f) = &e.frobenius {
        if !FROB_LABELS.contains(&f.as_str()) {
            return Err(format!("unknown frobenius label `{f}`"));
        }
    }
    Ok(())
}

fn check_task_params(task: &TaskSpec) -> Result<(), String> {
    match task {
        TaskSpec::Qw { deltas, .. } => deltas.as_deref().map_or(Ok(()), check_deltas),
        TaskSpec::Qwp { deltas, p, .. } => {
            if !(*p >= 1.0 && p.is_finite()) {
                return Err(format!("exponent p = {p} must be finite and >= 1"));
            }
            deltas.as_deref().map_or(Ok(()), check_deltas)
        }
        TaskSpec::Cluster { eps, weak_tol, .. } | TaskSpec::Precond { eps, weak_tol, .. } => {
            check_eps(eps)?;
            check_tol(*weak_tol)
        }
        TaskSpec::Distribution { funcs, grid, .. } => {
            if let Some(fs) = funcs {
                if fs.len() < 3 {
                    return Err(format!("needs at least 3 test functions, got {}", fs.len()));
                }
                for f in fs {
                    f.validated().map_err(|e| e.to_string())?;
                }
            }
            check_grid(*grid, glt_core::distribution::MIN_DIST_GRID)
        }
        TaskSpec::Isometry { p, deltas, grid, .. } => {
            match p {
                PSpec::Finite(v) if !(*v >= 1.0 && v.is_finite()) => return Err(format!("exponent p = {v} must be >= 1")),
                PSpec::Named(s) if s != "inf" => return Err(format!("exponent `{s}` must be a number or \"inf\"")),
                _ => {}
            }
            deltas.as_deref().map_or(Ok(()), check_deltas)?;
            check_grid(*grid, glt_core::symbol::MIN_QUAD_GRID)
        }
        TaskSpec::Korovkin { generators, eps, unitary, bound, weak_tol, .. } => {
            if generators.is_empty() {
                return Err("at least one generator is required".into());
            }
            if let Some(b) = bound {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(format!("bound {b} must be positive"));
                }
            }
            check_unitary_spec(unitary)?;
            check_eps(eps)?;
            check_tol(*weak_tol)
        }
        _ => Ok(()),
    }?;
    if let TaskSpec::Precond { unitary, .. } = task {
        check_unitary_spec(unitary)?;
    }
    Ok(())
}

fn check_tol(t: Option<f64>) -> Result<(), String> {
    match t {
        Some(v) if !(v >= 0.0 && v.is_finite()) => Err(format!("weak_tol {v} must be nonnegative")),
        _ => Ok(()),
    }
}

fn check_grid(g: Option<usize>, min: usize) -> Result<(), String> {
    match g {
        Some(v) if v < min => Err(format!("grid {v} below minimum {min}")),
        _ => Ok(()),
    }
}

fn detect_cycles(ld: &Loaded) -> Result<(), ConfigError> {
    fn visit<'a>(
        name: &'a str,
        seqs: &'a BTreeMap<String, SeqSpec>,
        stack: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Result<(), String> {
        if done.contains(name) {
            return Ok(());
        }
        if stack.contains(&name) {
            return Err(format!("sequence definitions form a cycle through `{name}`"));
        }
        stack.push(name);
        let (key, spec) = seqs.get_key_value(name).expect("checked");
        for d in seq_deps(spec)? {
            let (dk, _) = seqs.get_key_value(&d).expect("checked");
            visit(dk, seqs, stack, done)?;
        }
        stack.pop();
        done.insert(key);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for name in ld.config.sequences.keys() {
        visit(name, &ld.config.sequences, &mut Vec::new(), &mut done)
            .map_err(|e| ld.err(ErrorClass::InvalidConfig, e, ld.source().definition(name)))?;
    }
    Ok(())
}

/// Path of an explicit unitary family, if that is what `v` names.
pub fn explicit_unitary(v: &Value) -> Option<&str> {
    v.get("explicit").and_then(Value::as_str)
}

/// Every sequence a task depends on, directly or through expressions.
pub fn reached(cfg: &Config, task: &TaskSpec) -> BTreeSet<String> {
    let mut pending: Vec<String> = task.seq_refs().into_iter().map(str::to_owned).collect();
    let mut seen = BTreeSet::new();
    while let Some(s) = pending.pop() {
        if seen.insert(s.clone()) {
            if let Some(spec) = cfg.sequences.get(&s) {
                pending.extend(seq_deps(spec).unwrap_or_default());
            }
        }
    }
    seen
}

/// `(owner, file pattern, dims)` for every matrix file a task reaches.
fn file_uses(ld: &Loaded) -> Vec<(String, String, Vec<usize>)> {
    let cfg = &ld.config;
    let mut uses = Vec::new();
    for (idx, task) in cfg.tasks.iter().enumerate() {
        if let TaskSpec::Precond { unitary, .. } | TaskSpec::Korovkin { unitary, .. } = task {
            if let Some(p) = explicit_unitary(unitary) {
                uses.push((task.name(idx), p.to_owned(), task.dims().to_vec()));
            }
        }
        for s in reached(cfg, task) {
            if let Some(SeqSpec::File { path }) = cfg.sequences.get(&s) {
                uses.push((s.clone(), path.clone(), task.dims().to_vec()));
            }
        }
    }
    uses
}

fn check_matrix_files(ld: &Loaded) -> Result<(), ConfigError> {
    let mut checked = BTreeSet::new();
    for (name, rel, dims) in file_uses(ld) {
        let pattern = ld.matrix_path(&rel);
        if !matfile::is_pattern(&pattern) && dims.len() > 1 {
            return Err(ld.err(
                ErrorClass::MatrixFileShape,
                format!("`{name}` is a single file but is used at dimensions {dims:?}; use a `{{n}}` pattern"),
                ld.source().definition(&name).or_else(|| ld.source().reference(&rel)),
            ));
        }
        for n in dims {
            if checked.insert((pattern.clone(), n)) {
                matfile::load_matrix(&pattern, n)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn range_bounds() {
        let r = Range { approx: Some(1.0), tol: Some(1e-9), ..Range::default() };
        assert!(r.contains(1.0 + 5e-10));
        assert!(!r.contains(1.0 + 2e-9));
        assert!(!r.contains(f64::NAN));
        let r = Range { min: Some(2.95), max: Some(3.0), ..Range::default() };
        assert!(r.contains(2.99) && !r.contains(3.01));
        assert_eq!(r.to_string(), ">= 2.95, <= 3");
    }

    #[test]
    fn expression_references() {
        let mut out = Vec::new();
        let e = json!({"op": "sub", "args": ["A", {"op": "scale", "c": [2, 0], "arg": {"op": "adjoint", "arg": "B"}}]});
        expr_refs(&e, &mut out).unwrap();
        assert_eq!(out, ["A", "B"]);
        assert!(expr_refs(&json!({"op": "scale", "arg": "A"}), &mut out).is_err());
        assert!(expr_refs(&json!({"op": "add", "args": ["A"]}), &mut out).is_err());
        assert!(expr_refs(&json!(3), &mut out).is_err());
    }

    #[test]
    fn word_references() {
        let mut out = Vec::new();
        word_refs(&json!({"op": "add", "args": ["one", {"gen": "g"}]}), &mut out).unwrap();
        assert_eq!(out, ["g"]);
        assert!(word_refs(&json!("two"), &mut out).is_err());
    }

    #[test]
    fn unitary_specs() {
        for ok in [json!("fourier"), json!({"block_fourier": 4}), json!({"block_fourier": "sqrt"}), json!({"explicit": "u.csv"})] {
            assert!(check_unitary_spec(&ok).is_ok(), "{ok}");
        }
        for bad in [json!("haar"), json!({"block_fourier": 0}), json!({"block_fourier": "cbrt"})] {
            assert!(check_unitary_spec(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn default_task_names() {
        let t: TaskSpec = serde_json::from_value(json!({"task": "qw", "seq": "A", "dims": [4]})).unwrap();
        assert_eq!(t.name(2), "03_qw");
        assert!(check_dims(&[4, 8], 1).is_ok());
        assert!(check_dims(&[8, 4], 1).is_err());
        assert!(check_dims(&[4, 8], 3).is_err());
        assert!(check_eps(&[0.5, 0.1]).is_err());
        assert!(check_deltas(&[0.0, 0.5]).is_ok());
    }
}
