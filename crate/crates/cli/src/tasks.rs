//! Task execution, expectation checks and artifact writing.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use glt_core::acs;
use glt_core::cluster::{self, ClusterLabel, ClusterThresholds};
use glt_core::distribution::{self, TestFunc};
use glt_core::plotdata::{fmt_float, PlotData};
use glt_core::precond::{self, Generator, KorovkinSpec, PrecondReport, StageEntry};
use glt_core::symbol::DEFAULT_QUAD_GRID;
use glt_core::{ClusterReport64, Exponent, GltError, SeminormEstimate64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::build::{self, Builder};
use crate::config::{self, Expect, Loaded, PSpec, Range, TaskSpec, DEFAULT_DELTAS};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub what: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub name: String,
    pub kind: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.status == Status::Ok && self.checks.iter().all(|c| c.pass)
    }

    pub fn skipped(name: String, kind: &'static str) -> Self {
        Self { name, kind, status: Status::Skipped, error: None, checks: Vec::new() }
    }
}

/// What a successful task leaves behind.
struct Artifacts {
    report: Value,
    metadata: Value,
    /// `(file suffix, csv text)`; the empty suffix is the main `<name>.csv`.
    csv: Vec<(String, String)>,
    checks: Vec<Check>,
}

impl Artifacts {
    fn new(report: Value, metadata: Value, csv: String) -> Self {
        Self { report, metadata, csv: vec![(String::new(), csv)], checks: Vec::new() }
    }
}

fn obs(v: Option<f64>) -> String {
    v.map_or_else(|| "absent".into(), fmt_float)
}

fn range_check(what: &str, r: &Range, v: Option<f64>) -> Check {
    Check { what: what.into(), expected: r.to_string(), observed: obs(v), pass: v.is_some_and(|v| r.contains(v)) }
}

fn eq_check(what: &str, expected: &str, observed: &str) -> Check {
    Check { what: what.into(), expected: expected.into(), observed: observed.into(), pass: expected == observed }
}

fn le_check(what: &str, bound: f64, v: Option<f64>) -> Check {
    Check { what: what.into(), expected: format!("<= {bound}"), observed: obs(v), pass: v.is_some_and(|v| v <= bound) }
}

fn label_str(labels: &[ClusterLabel]) -> String {
    labels.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(",")
}

/// `label`: the same label at every sampled `eps`; `labels`: the exact list.
fn label_checks(what: &str, e: &Expect, labels: &[ClusterLabel], out: &mut Vec<Check>) {
    if let Some(l) = &e.label {
        let all_eq = !labels.is_empty() && labels.iter().all(|x| x.as_str() == l);
        out.push(Check { what: format!("{what}label"), expected: format!("{l} at every eps"), observed: label_str(labels), pass: all_eq });
    }
    if let Some(ls) = &e.labels {
        out.push(eq_check(&format!("{what}labels"), &ls.join(","), &label_str(labels)));
    }
}

fn frob_str(r: &ClusterReport64) -> String {
    serde_json::to_value(r.frobenius).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn thresholds(weak_tol: Option<f64>, strong_cap: Option<usize>) -> ClusterThresholds {
    let d = ClusterThresholds::default();
    ClusterThresholds { weak_tol: weak_tol.unwrap_or(d.weak_tol), strong_cap: strong_cap.unwrap_or(d.strong_cap) }
}

fn estimate_checks(e: &Expect, est: &SeminormEstimate64) -> Vec<Check> {
    let mut out = Vec::new();
    if let Some(r) = &e.headline {
        out.push(range_check("headline", r, est.headline));
    }
    if let Some(r) = &e.values {
        for (i, n) in est.dims.iter().enumerate() {
            for (j, v) in est.table[i].iter().enumerate() {
                let what = match est.deltas.get(j) {
                    Some(d) => format!("value[n={n},delta={d}]"),
                    None => format!("value[n={n}]"),
                };
                out.push(range_check(&what, r, *v));
            }
        }
    }
    out
}

fn estimate_artifacts(e: &Expect, est: SeminormEstimate64, meta: Value) -> Result<Artifacts> {
    let mut a = Artifacts::new(serde_json::to_value(&est)?, meta, est.to_csv());
    a.checks = estimate_checks(e, &est);
    Ok(a)
}

/// File-safe form of a stage name.
fn stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "_-".contains(c) { c } else { '_' }).collect()
}

fn stages(r: &PrecondReport<f64>) -> impl Iterator<Item = (&'static str, &StageEntry<f64>)> {
    let h = r.hypotheses.iter().map(|s| ("hypothesis", s));
    let e = r.elements.iter().map(|s| ("element", s));
    h.chain(e).chain(r.extracted.iter().map(|s| ("extracted", s)))
}

fn stage_artifacts(r: &PrecondReport<f64>) -> Vec<(String, String)> {
    let mut summary = String::from("stage,role,eps,label,frobenius\n");
    let mut files = Vec::new();
    for (role, st) in stages(r) {
        for (eps, label) in st.report.eps_grid.iter().zip(&st.report.labels) {
            summary.push_str(&format!("{},{role},{},{},{}\n", st.name, fmt_float(*eps), label.as_str(), frob_str(&st.report)));
        }
        files.push((format!(".{}", stem(&st.name)), st.report.to_csv()));
    }
    files.insert(0, (String::new(), summary));
    files
}

pub struct Runner<'a> {
    pub ld: &'a Loaded,
    pub builder: Builder<'a>,
    pub out_dir: PathBuf,
}

impl<'a> Runner<'a> {
    pub fn new(ld: &'a Loaded, seed: Option<u64>, out_dir: &Path) -> Self {
        Self { ld, builder: Builder::new(ld, seed), out_dir: out_dir.to_path_buf() }
    }

    fn metadata(&self, task: &TaskSpec, extra: Value) -> Value {
        let seeds: serde_json::Map<String, Value> = config::reached(&self.ld.config, task)
            .into_iter()
            .filter_map(|s| self.builder.seeds.get(&s).map(|v| (s, json!(v))))
            .collect();
        let mut m = json!({ "seed": self.builder.base_seed(), "random_seeds": seeds, "dims": task.dims() });
        if let (Value::Object(m), Value::Object(x)) = (&mut m, extra) {
            m.extend(x);
        }
        m
    }

    /// Runs one task and writes its artifacts; numeric failures become an
    /// `error` outcome instead of aborting.
    pub fn run(&mut self, idx: usize, task: &TaskSpec) -> Result<Outcome> {
        let name = task.name(idx);
        let (outcome, body) = match self.execute(task) {
            Ok(a) => {
                for (suffix, text) in &a.csv {
                    let path = self.out_dir.join(format!("{name}{suffix}.csv"));
                    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                }
                let o = Outcome { name: name.clone(), kind: task.kind(), status: Status::Ok, error: None, checks: a.checks };
                let body = json!({ "task": name, "kind": task.kind(), "status": o.status, "metadata": a.metadata, "report": a.report, "checks": o.checks });
                (o, body)
            }
            Err(e) => {
                let msg = format!("{e:#}");
                let o = Outcome { name: name.clone(), kind: task.kind(), status: Status::Error, error: Some(msg.clone()), checks: Vec::new() };
                let body = json!({ "task": name, "kind": task.kind(), "status": o.status, "metadata": self.metadata(task, json!({})), "error": msg });
                (o, body)
            }
        };
        let path = self.out_dir.join(format!("{name}.json"));
        std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(&body)?))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(outcome)
    }

    fn execute(&mut self, task: &TaskSpec) -> Result<Artifacts> {
        let e = task.expect();
        match task {
            TaskSpec::Pa { seq, dims, .. } => {
                let s = self.builder.seq(seq)?;
                let est = acs::p_estimate(&s, dims)?;
                estimate_artifacts(e, est, self.metadata(task, json!({})))
            }
            TaskSpec::Dacs { x, y, dims, .. } => {
                let (x, y) = (self.builder.seq(x)?, self.builder.seq(y)?);
                let est = acs::dacs_estimate(&x, &y, dims)?;
                estimate_artifacts(e, est, self.metadata(task, json!({})))
            }
            TaskSpec::Qw { seq, dims, deltas, .. } => {
                let s = self.builder.seq(seq)?;
                let deltas = deltas.clone().unwrap_or(DEFAULT_DELTAS.to_vec());
                let est = acs::qw_estimate(&s, dims, &deltas)?;
                estimate_artifacts(e, est, self.metadata(task, json!({ "deltas": deltas })))
            }
            TaskSpec::Qwp { seq, dims, deltas, p, .. } => {
                let s = self.builder.seq(seq)?;
                let deltas = deltas.clone().unwrap_or(DEFAULT_DELTAS.to_vec());
                let est = acs::qwp_estimate(&s, dims, &deltas, *p)?;
                estimate_artifacts(e, est, self.metadata(task, json!({ "deltas": deltas, "p": p })))
            }
            TaskSpec::Cluster { seq, minus, dims, eps, weak_tol, strong_cap, .. } => {
                let mut delta = self.builder.seq(seq)?;
                if let Some(m) = minus {
                    delta = delta.sub(&self.builder.seq(m)?);
                }
                let thr = thresholds(*weak_tol, *strong_cap);
                let r = cluster::outlier_counts(&delta, dims, eps, thr)?;
                let meta = self.metadata(task, json!({ "thresholds": thr, "eps": eps }));
                let mut a = Artifacts::new(serde_json::to_value(&r)?, meta, r.to_csv());
                label_checks("", e, &r.labels, &mut a.checks);
                if let Some(f) = &e.frobenius {
                    a.checks.push(eq_check("frobenius", f, &frob_str(&r)));
                }
                if let Some(u) = e.uniform {
                    a.checks.push(eq_check("uniform", &u.to_string(), &r.uniform.to_string()));
                }
                Ok(a)
            }
            TaskSpec::Distribution { seq, symbol, dims, funcs, grid, .. } => {
                let s = self.builder.seq(seq)?;
                let sym = self.builder.symbol(symbol)?;
                let grid = grid.unwrap_or(DEFAULT_QUAD_GRID);
                let funcs = match funcs {
                    Some(f) => f.clone(),
                    None => TestFunc::default_family(1.25 * sym.grid_max_modulus(grid)?.max(f64::EPSILON))?,
                };
                let r = distribution::distribution_check(&s, &sym, &funcs, dims, grid)?;
                let meta = self.metadata(task, json!({ "family": r.family(), "grid": grid }));
                let mut a = Artifacts::new(serde_json::to_value(&r)?, meta, r.to_csv());
                if let Some(p) = e.pass {
                    a.checks.push(eq_check("pass", &p.to_string(), &r.all_pass().to_string()));
                }
                if let Some(m) = e.max_residual {
                    let last = r.residual.last().map(|row| row.iter().fold(0.0f64, |a, &b| a.max(b)));
                    a.checks.push(le_check("max_residual at largest n", m, last));
                }
                Ok(a)
            }
            TaskSpec::Isometry { seq, symbol, p, dims, deltas, grid, .. } => {
                let s = self.builder.seq(seq)?;
                let sym = self.builder.symbol(symbol)?;
                let grid = grid.unwrap_or(DEFAULT_QUAD_GRID);
                let deltas = deltas.clone().unwrap_or(DEFAULT_DELTAS.to_vec());
                let exp = match p {
                    PSpec::Finite(v) => Exponent::finite(*v)?,
                    PSpec::Named(_) => Exponent::Infinity,
                };
                let r = distribution::isometry_check(&s, &sym, exp, dims, &deltas, grid)?;
                let family = r.evidence.as_ref().map(|d| d.family());
                let meta = self.metadata(task, json!({ "deltas": deltas, "grid": grid, "family": family }));
                let mut a = Artifacts::new(serde_json::to_value(&r)?, meta, r.estimate.to_csv());
                if let Some(ev) = &r.evidence {
                    a.csv.push((".distribution".into(), ev.to_csv()));
                }
                if let Some(h) = &e.headline {
                    a.checks.push(range_check("headline", h, r.headline));
                }
                if let Some(m) = e.max_relative_gap {
                    a.checks.push(le_check("relative_gap", m, r.relative_gap));
                }
                Ok(a)
            }
            TaskSpec::Precond { seq, unitary, dims, eps, weak_tol, strong_cap, .. } => {
                let s = self.builder.seq(seq)?;
                let fam = self.builder.unitary(unitary)?;
                let thr = thresholds(*weak_tol, *strong_cap);
                let r = precond::precond_diagnostics(seq, &s, &fam, dims, eps, thr)?;
                let meta = self.metadata(task, json!({ "family": fam.id(), "thresholds": thr, "eps": eps }));
                let mut a = Artifacts { report: serde_json::to_value(&r)?, metadata: meta, csv: stage_artifacts(&r), checks: Vec::new() };
                let entry = &r.elements[0];
                label_checks("", e, &entry.report.labels, &mut a.checks);
                if let Some(f) = &e.frobenius {
                    a.checks.push(eq_check("frobenius", f, &frob_str(&entry.report)));
                }
                if let Some(p) = e.pass {
                    a.checks.push(eq_check("pass", &p.to_string(), &r.pass.to_string()));
                }
                Ok(a)
            }
            TaskSpec::Korovkin { generators, elements, unitary, dims, eps, bound, weak_tol, strong_cap, .. } => {
                let gens = generators
                    .iter()
                    .map(|g| Ok(Generator::new(&g.name, self.builder.symbol(&g.symbol)?, self.builder.seq(&g.seq)?)))
                    .collect::<Result<Vec<_>>>()?;
                let words = elements
                    .iter()
                    .map(|el| Ok((el.name.clone(), build::word(&el.word, &gens)?)))
                    .collect::<Result<Vec<_>>>()?;
                let fam = self.builder.unitary(unitary)?;
                let thr = thresholds(*weak_tol, *strong_cap);
                let meta = self.metadata(task, json!({ "family": fam.id(), "thresholds": thr, "eps": eps, "declared_bound": bound }));
                let spec = KorovkinSpec {
                    generators: gens,
                    elements: words,
                    family: fam,
                    dims: dims.clone(),
                    eps_grid: eps.clone(),
                    bound: *bound,
                    thresholds: thr,
                    extraction: None,
                };
                match precond::korovkin_run(&spec) {
                    Err(GltError::Unbounded { name, observed, bound }) if e.refused.is_some() => {
                        let report = json!({ "refused": true, "generator": name, "observed": observed, "bound": bound });
                        let csv = format!("generator,observed,bound\n{name},{},{}\n", fmt_float(observed), fmt_float(bound));
                        let mut a = Artifacts::new(report, meta, csv);
                        a.checks.push(eq_check("refused", &e.refused.unwrap_or(false).to_string(), "true"));
                        Ok(a)
                    }
                    Err(err) => Err(err.into()),
                    Ok(r) => {
                        let mut a = Artifacts { report: serde_json::to_value(&r)?, metadata: meta, csv: stage_artifacts(&r), checks: Vec::new() };
                        if let Some(rf) = e.refused {
                            a.checks.push(eq_check("refused", &rf.to_string(), "false"));
                        }
                        let target: Vec<&StageEntry<f64>> =
                            if r.elements.is_empty() { r.hypotheses.iter().collect() } else { r.elements.iter().collect() };
                        for st in target {
                            label_checks(&format!("{}.", st.name), e, &st.report.labels, &mut a.checks);
                        }
                        if let Some(p) = e.pass {
                            a.checks.push(eq_check("pass", &p.to_string(), &r.pass.to_string()));
                        }
                        Ok(a)
                    }
                }
            }
        }
    }
}
