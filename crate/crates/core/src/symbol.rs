//! Symbols `κ: [0,1] × [-π,π] -> C` built from separable atoms `a ⊗ f`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::ComplexField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::ScalarFunc;
use crate::scalar::{cplx, creal, Exponent, Real, C};
use crate::trigpoly::TrigPoly;
use crate::{GltError, Result};

/// Default points per axis for midpoint quadrature over the symbol domain.
pub const DEFAULT_QUAD_GRID: usize = 512;
pub const MIN_QUAD_GRID: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolExpr<T: Real> {
    Atom { a: ScalarFunc, f: TrigPoly<T> },
    Add(Box<SymbolExpr<T>>, Box<SymbolExpr<T>>),
    Mul(Box<SymbolExpr<T>>, Box<SymbolExpr<T>>),
    Conj(Box<SymbolExpr<T>>),
    Scale(C<T>, Box<SymbolExpr<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymbolOp<T> {
    Add,
    Mul,
    Conj,
    Scale(C<T>),
}

impl<T: Real> fmt::Display for SymbolExpr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolExpr::Atom { a, f: g } => write!(f, "[{a}]⊗[{g}]"),
            SymbolExpr::Add(l, r) => write!(f, "({l} + {r})"),
            SymbolExpr::Mul(l, r) => write!(f, "({l} · {r})"),
            SymbolExpr::Conj(s) => write!(f, "conj({s})"),
            SymbolExpr::Scale(c, s) => write!(f, "({c})·{s}"),
        }
    }
}

impl<T: Real> SymbolExpr<T> {
    pub fn atom(a: ScalarFunc, f: TrigPoly<T>) -> Self {
        SymbolExpr::Atom { a, f }
    }

    /// `1 ⊗ f`.
    pub fn toeplitz(f: TrigPoly<T>) -> Self {
        Self::atom(ScalarFunc::one(), f)
    }

    /// `a ⊗ 1`.
    pub fn spatial(a: ScalarFunc) -> Self {
        Self::atom(a, TrigPoly::one())
    }

    pub fn one() -> Self {
        Self::atom(ScalarFunc::one(), TrigPoly::one())
    }

    pub fn add(self, other: Self) -> Self {
        SymbolExpr::Add(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Self) -> Self {
        SymbolExpr::Mul(Box::new(self), Box::new(other))
    }

    pub fn conj(self) -> Self {
        SymbolExpr::Conj(Box::new(self))
    }

    pub fn scale(self, c: C<T>) -> Self {
        SymbolExpr::Scale(c, Box::new(self))
    }

    /// Structural composition; binary ops take two operands, unary ops one.
    pub fn apply(op: SymbolOp<T>, operands: &[&SymbolExpr<T>]) -> Result<Self> {
        let arity = match op {
            SymbolOp::Add | SymbolOp::Mul => 2,
            SymbolOp::Conj | SymbolOp::Scale(_) => 1,
        };
        if operands.len() != arity {
            return Err(GltError::Invalid(format!(
                "{op:?} expects {arity} operand(s), got {}",
                operands.len()
            )));
        }
        let o = |i: usize| operands[i].clone();
        Ok(match op {
            SymbolOp::Add => o(0).add(o(1)),
            SymbolOp::Mul => o(0).mul(o(1)),
            SymbolOp::Conj => o(0).conj(),
            SymbolOp::Scale(c) => o(0).scale(c),
        })
    }

    pub fn eval(&self, x: T, theta: T) -> Result<C<T>> {
        let pi = T::pi();
        if !(x >= T::zero() && x <= T::one() && theta >= -pi && theta <= pi) {
            return Err(GltError::Invalid(format!("({x}, {theta}) outside [0,1]x[-pi,pi]")));
        }
        self.eval_unchecked(x, theta)
    }

    fn eval_unchecked(&self, x: T, theta: T) -> Result<C<T>> {
        match self {
            SymbolExpr::Atom { a, f } => {
                let av = a.eval(x).map_err(|e| match e {
                    GltError::NonFiniteValue { what, value, .. } => GltError::NonFiniteValue {
                        what,
                        value,
                        location: format!("(x, θ) = ({x}, {theta})"),
                    },
                    other => other,
                })?;
                let v = f.eval(theta) * creal(av);
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(GltError::NonFiniteValue {
                        what: self.to_string(),
                        location: format!("(x, θ) = ({x}, {theta})"),
                        value: format!("{v}"),
                    });
                }
                Ok(v)
            }
            SymbolExpr::Add(l, r) => Ok(l.eval_unchecked(x, theta)? + r.eval_unchecked(x, theta)?),
            SymbolExpr::Mul(l, r) => Ok(l.eval_unchecked(x, theta)? * r.eval_unchecked(x, theta)?),
            SymbolExpr::Conj(s) => Ok(s.eval_unchecked(x, theta)?.conj()),
            SymbolExpr::Scale(c, s) => Ok(*c * s.eval_unchecked(x, theta)?),
        }
    }

    /// Midpoint-rule integral of `F(|κ|)` over `D` (not normalized).
    pub fn integrate_modulus(&self, grid: usize, f: impl Fn(T) -> T + Sync) -> Result<T> {
        check_grid(grid)?;
        let (xs, thetas) = midpoints::<T>(grid);
        let area = T::two_pi() / (T::from_usize_lossy(grid) * T::from_usize_lossy(grid));
        let rows: Vec<T> = xs
            .par_iter()
            .map(|&x| -> Result<T> {
                let mut acc = T::zero();
                for &t in &thetas {
                    acc += f(self.eval_unchecked(x, t)?.modulus());
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().fold(T::zero(), |a, b| a + b) * area)
    }

    /// Maximum of `|κ|` over the midpoint grid; a lower bound for the
    /// essential supremum.
    pub fn grid_max_modulus(&self, grid: usize) -> Result<T> {
        check_grid(grid)?;
        let (xs, thetas) = midpoints::<T>(grid);
        let rows: Vec<T> = xs
            .par_iter()
            .map(|&x| -> Result<T> {
                let mut m = T::zero();
                for &t in &thetas {
                    m = m.max(self.eval_unchecked(x, t)?.modulus());
                }
                Ok(m)
            })
            .collect::<Result<_>>()?;
        Ok(rows.into_iter().fold(T::zero(), |a, b| a.max(b)))
    }

    /// Unnormalized `||κ||_{L^p(D)}`; grid max of `|κ|` for `p = ∞`.
    pub fn lp_norm(&self, p: Exponent<T>, grid: usize) -> Result<T> {
        match p {
            Exponent::Infinity => self.grid_max_modulus(grid),
            Exponent::Finite(p) => {
                if !(p >= T::one()) {
                    return Err(GltError::InvalidExponent(p.to_f64_lossy()));
                }
                let integral = self.integrate_modulus(grid, |m| m.powf(p))?;
                Ok(integral.powf(T::one() / p))
            }
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let raw: SymbolJson =
            serde_json::from_value(value.clone()).map_err(|e| GltError::SymbolJson(e.to_string()))?;
        raw.into_symbol()
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            SymbolExpr::Atom { a, f } => serde_json::json!({
                "a": a.source(),
                "f": trigpoly_to_json(f),
            }),
            SymbolExpr::Add(l, r) => serde_json::json!({"op": "add", "args": [l.to_json(), r.to_json()]}),
            SymbolExpr::Mul(l, r) => serde_json::json!({"op": "mul", "args": [l.to_json(), r.to_json()]}),
            SymbolExpr::Conj(s) => serde_json::json!({"op": "conj", "arg": s.to_json()}),
            SymbolExpr::Scale(c, s) => serde_json::json!({
                "op": "scale",
                "c": [c.re.to_f64_lossy(), c.im.to_f64_lossy()],
                "arg": s.to_json()
            }),
        }
    }
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < MIN_QUAD_GRID {
        return Err(GltError::GridTooCoarse { got: grid, min: MIN_QUAD_GRID });
    }
    Ok(())
}

fn midpoints<T: Real>(grid: usize) -> (Vec<T>, Vec<T>) {
    let g = T::from_usize_lossy(grid);
    let half = T::cst(0.5);
    let xs = (0..grid).map(|i| (T::from_usize_lossy(i) + half) / g).collect();
    let thetas = (0..grid)
        .map(|j| -T::pi() + (T::from_usize_lossy(j) + half) * T::two_pi() / g)
        .collect();
    (xs, thetas)
}

/// Wire form of [`TrigPoly`]: `{"coeffs": {"k": [re, im], ...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPolyJson {
    pub coeffs: BTreeMap<String, [f64; 2]>,
}

impl TrigPolyJson {
    pub fn into_trigpoly<T: Real>(self) -> Result<TrigPoly<T>> {
        let mut pairs = Vec::with_capacity(self.coeffs.len());
        for (k, [re, im]) in self.coeffs {
            let idx: i64 = k
                .trim()
                .parse()
                .map_err(|_| GltError::SymbolJson(format!("coefficient index `{k}` is not an integer")))?;
            if !(re.is_finite() && im.is_finite()) {
                return Err(GltError::SymbolJson(format!("coefficient {k} is not finite")));
            }
            pairs.push((idx, cplx(T::cst(re), T::cst(im))));
        }
        Ok(TrigPoly::from_pairs(pairs))
    }
}

pub fn trigpoly_to_json<T: Real>(f: &TrigPoly<T>) -> serde_json::Value {
    let coeffs: serde_json::Map<String, serde_json::Value> = f
        .coeffs()
        .map(|(k, c)| (k.to_string(), serde_json::json!([c.re.to_f64_lossy(), c.im.to_f64_lossy()])))
        .collect();
    serde_json::json!({ "coeffs": coeffs })
}

fn default_one() -> String {
    "1".into()
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SymbolJson {
    Atom {
        #[serde(default = "default_one")]
        a: String,
        f: TrigPolyJson,
    },
    Node(NodeJson),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase", deny_unknown_fields)]
enum NodeJson {
    Add { args: Vec<SymbolJson> },
    Mul { args: Vec<SymbolJson> },
    Conj { arg: Box<SymbolJson> },
    Scale { c: [f64; 2], arg: Box<SymbolJson> },
}

impl SymbolJson {
    fn into_symbol<T: Real>(self) -> Result<SymbolExpr<T>> {
        match self {
            SymbolJson::Atom { a, f } => Ok(SymbolExpr::atom(ScalarFunc::parse(&a)?, f.into_trigpoly()?)),
            SymbolJson::Node(NodeJson::Add { args }) => fold_args(args, SymbolExpr::add),
            SymbolJson::Node(NodeJson::Mul { args }) => fold_args(args, SymbolExpr::mul),
            SymbolJson::Node(NodeJson::Conj { arg }) => Ok(arg.into_symbol()?.conj()),
            SymbolJson::Node(NodeJson::Scale { c, arg }) => {
                Ok(arg.into_symbol()?.scale(cplx(T::cst(c[0]), T::cst(c[1]))))
            }
        }
    }
}

fn fold_args<T: Real>(
    args: Vec<SymbolJson>,
    op: fn(SymbolExpr<T>, SymbolExpr<T>) -> SymbolExpr<T>,
) -> Result<SymbolExpr<T>> {
    let mut it = args.into_iter();
    let first = it
        .next()
        .ok_or_else(|| GltError::SymbolJson("add/mul need at least one argument".into()))?
        .into_symbol()?;
    it.try_fold(first, |acc, s| Ok(op(acc, s.into_symbol()?)))
}
