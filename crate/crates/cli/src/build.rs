//! Turns validated sequence descriptors into [`MatrixSeq64`] values.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, Context, Result};
use glt_core::precond::{AlgebraWord, Generator, UnitaryFamily};
use glt_core::structured::{self, BlockSchedule};
use glt_core::{Complex64, GltError, MatrixSeq64, ScalarFunc, SymbolExpr64, TrigPoly64};
use serde_json::Value;

use crate::config::{BlockCount, Loaded, SeqSpec};
use crate::matfile;

pub struct Builder<'a> {
    ld: &'a Loaded,
    base_seed: u64,
    cache: BTreeMap<String, MatrixSeq64>,
    /// Seeds actually used by `random` sequences, for output metadata.
    pub seeds: BTreeMap<String, u64>,
}

fn schedule(m: &BlockCount) -> BlockSchedule {
    match m {
        BlockCount::Fixed(k) => BlockSchedule::Fixed(*k),
        BlockCount::Schedule(_) => BlockSchedule::Sqrt,
    }
}

fn complex(c: &Value) -> Result<Complex64> {
    let pair = c.as_array().filter(|a| a.len() == 2).ok_or_else(|| anyhow!("scale `c` must be [re, im]"))?;
    let re = pair[0].as_f64().ok_or_else(|| anyhow!("scale `c` must be numeric"))?;
    let im = pair[1].as_f64().ok_or_else(|| anyhow!("scale `c` must be numeric"))?;
    Ok(Complex64::new(re, im))
}

impl<'a> Builder<'a> {
    pub fn new(ld: &'a Loaded, seed_override: Option<u64>) -> Self {
        let base_seed = seed_override.or(ld.config.seed).unwrap_or(0);
        Self { ld, base_seed, cache: BTreeMap::new(), seeds: BTreeMap::new() }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn symbol(&self, name: &str) -> Result<SymbolExpr64> {
        let v = self.ld.config.symbols.get(name).ok_or_else(|| anyhow!("unknown symbol `{name}`"))?;
        Ok(SymbolExpr64::from_json(v)?)
    }

    pub fn seq(&mut self, name: &str) -> Result<MatrixSeq64> {
        if let Some(s) = self.cache.get(name) {
            return Ok(s.clone());
        }
        let spec = self.ld.config.sequences.get(name).ok_or_else(|| anyhow!("unknown sequence `{name}`"))?.clone();
        let seq = self.build(name, &spec).with_context(|| format!("building sequence `{name}`"))?;
        let seq = seq.with_label(name);
        self.cache.insert(name.to_owned(), seq.clone());
        Ok(seq)
    }

    fn build(&mut self, name: &str, spec: &SeqSpec) -> Result<MatrixSeq64> {
        Ok(match spec {
            SeqSpec::Toeplitz { f } => structured::toeplitz_seq(f.clone().into_trigpoly()?),
            SeqSpec::Diag { a } => structured::diag_seq(ScalarFunc::parse(a)?),
            SeqSpec::Lt { a, f, m } => structured::lt_seq(ScalarFunc::parse(a)?, f.clone().into_trigpoly()?, schedule(m)),
            SeqSpec::Glt { terms } => {
                let terms: Vec<(ScalarFunc, TrigPoly64)> = terms
                    .iter()
                    .map(|t| Ok((ScalarFunc::parse(&t.a)?, t.f.clone().into_trigpoly()?)))
                    .collect::<Result<_, GltError>>()?;
                structured::glt_seq(terms)
            }
            SeqSpec::LeadingOnes { m } => structured::leading_ones_seq(*m),
            SeqSpec::Identity => MatrixSeq64::identity(),
            SeqSpec::Zero => MatrixSeq64::zeros(),
            SeqSpec::Random { seed, scale } => {
                let s = seed.unwrap_or(self.base_seed);
                self.seeds.insert(name.to_owned(), s);
                structured::random_seq(s, scale.unwrap_or(1.0))
            }
            SeqSpec::Symbol { symbol } => structured::symbol_seq(&self.symbol(symbol)?),
            SeqSpec::Algebra { expr } => self.expr(expr)?,
            SeqSpec::File { path } => {
                let pattern = self.ld.matrix_path(path);
                MatrixSeq64::new(path.clone(), move |n| {
                    matfile::load_matrix(&pattern, n).map_err(|e| GltError::Invalid(e.to_string()))
                })
            }
        })
    }

    fn expr(&mut self, v: &Value) -> Result<MatrixSeq64> {
        if let Some(name) = v.as_str() {
            return self.seq(name);
        }
        let op = v.get("op").and_then(Value::as_str).ok_or_else(|| anyhow!("expression node needs `op`"))?;
        match op {
            "add" | "sub" | "mul" => {
                let args = v.get("args").and_then(Value::as_array).ok_or_else(|| anyhow!("`{op}` needs `args`"))?;
                let mut parts = args.iter().map(|a| self.expr(a)).collect::<Result<Vec<_>>>()?.into_iter();
                let first = parts.next().ok_or_else(|| anyhow!("`{op}` needs arguments"))?;
                Ok(parts.fold(first, |acc, x| match op {
                    "add" => acc.add(&x),
                    "sub" => acc.sub(&x),
                    _ => acc.mul(&x),
                }))
            }
            "adjoint" => Ok(self.expr(&v["arg"])?.adjoint()),
            "scale" => Ok(self.expr(&v["arg"])?.scale(complex(&v["c"])?)),
            other => bail!("unknown expression op `{other}`"),
        }
    }

    pub fn unitary(&self, v: &Value) -> Result<UnitaryFamily<f64>> {
        if v.as_str() == Some("fourier") {
            return Ok(UnitaryFamily::fourier());
        }
        if let Some(m) = v.get("block_fourier") {
            let sched = match m.as_u64() {
                Some(k) => BlockSchedule::Fixed(usize::try_from(k)?),
                None => BlockSchedule::Sqrt,
            };
            return Ok(UnitaryFamily::block_fourier(sched));
        }
        if let Some(rel) = v.get("explicit").and_then(Value::as_str) {
            let pattern = self.ld.matrix_path(rel);
            return Ok(UnitaryFamily::explicit(rel, move |n| {
                matfile::load_matrix(&pattern, n).map_err(|e| GltError::Invalid(e.to_string()))
            }));
        }
        bail!("unsupported unitary family {v}")
    }
}

/// Word over the generators, with generators referenced by name.
pub fn word(v: &Value, gens: &[Generator<f64>]) -> Result<AlgebraWord<f64>> {
    if v.as_str() == Some("one") {
        return Ok(AlgebraWord::One);
    }
    if let Some(g) = v.get("gen").and_then(Value::as_str) {
        let i = gens.iter().position(|x| x.name == g).ok_or_else(|| anyhow!("unknown generator `{g}`"))?;
        return Ok(AlgebraWord::gen(i));
    }
    let op = v.get("op").and_then(Value::as_str).ok_or_else(|| anyhow!("word node needs `op` or `gen`"))?;
    match op {
        "add" | "mul" => {
            let args = v.get("args").and_then(Value::as_array).ok_or_else(|| anyhow!("`{op}` needs `args`"))?;
            let mut parts = args.iter().map(|a| word(a, gens)).collect::<Result<Vec<_>>>()?.into_iter();
            let first = parts.next().ok_or_else(|| anyhow!("`{op}` needs arguments"))?;
            Ok(parts.fold(first, |acc, x| if op == "add" { acc.add(x) } else { acc.mul(x) }))
        }
        "adjoint" => Ok(word(&v["arg"], gens)?.adjoint()),
        "scale" => Ok(word(&v["arg"], gens)?.scale(complex(&v["c"])?)),
        other => bail!("unknown word op `{other}`"),
    }
}
