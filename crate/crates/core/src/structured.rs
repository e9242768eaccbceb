//! Structured matrices from symbols: Toeplitz `T_n(f)`, sampling diagonals
//! `D_n(a)`, locally Toeplitz blocks `LT_n^m(a, f)` and finite GLT sums.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::expr::ScalarFunc;
use crate::matrix::{DenseMatrix, MatrixSeq};
use crate::scalar::{cplx, creal, Real, C};
use crate::symbol::SymbolExpr;
use crate::trigpoly::TrigPoly;
use crate::{GltError, Result};

/// `T_n(f)` with `(j, k)` entry `f̂_{j-k}`.
pub fn toeplitz<T: Real>(f: &TrigPoly<T>, n: usize) -> Result<DenseMatrix<T>> {
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    let mut m = nalgebra::DMatrix::<C<T>>::zeros(n, n);
    let span = n as i64;
    for (k, c) in f.coeffs() {
        if k.abs() >= span {
            continue;
        }
        // row - col = k
        for col in 0..n {
            let row = col as i64 + k;
            if (0..span).contains(&row) {
                m[(row as usize, col)] = c;
            }
        }
    }
    DenseMatrix::from_dmatrix(m)
}

/// `a(i/n)` for `i = 1..n`; `a(0)` is never sampled.
pub fn sample_points<T: Real>(a: &ScalarFunc, n: usize) -> Result<Vec<T>> {
    let nf = T::from_usize_lossy(n);
    (1..=n).map(|i| a.eval(T::from_usize_lossy(i) / nf)).collect()
}

/// `D_n(a) = diag(a(1/n), ..., a(n/n))`.
pub fn diag_sample<T: Real>(a: &ScalarFunc, n: usize) -> Result<DenseMatrix<T>> {
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    DenseMatrix::from_real_diagonal(&sample_points(a, n)?)
}

/// `B_{n,m}`: diagonal with the first `⌊n/m⌋` entries equal to one.
pub fn leading_ones<T: Real>(m: usize, n: usize) -> Result<DenseMatrix<T>> {
    if m == 0 {
        return Err(GltError::ZeroBlockCount);
    }
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    let k = n / m;
    let d: Vec<T> = (0..n).map(|i| if i < k { T::one() } else { T::zero() }).collect();
    DenseMatrix::from_real_diagonal(&d)
}

/// Parameters of `LT_n^m(a, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtDescriptor<T: Real> {
    pub a: ScalarFunc,
    pub f: TrigPoly<T>,
    pub m: usize,
}

impl<T: Real> LtDescriptor<T> {
    pub fn new(a: ScalarFunc, f: TrigPoly<T>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(GltError::ZeroBlockCount);
        }
        Ok(Self { a, f, m })
    }

    /// Block size `⌊n/m⌋` and trailing zero-block size `n mod m`.
    pub fn layout(&self, n: usize) -> (usize, usize) {
        (n / self.m, n % self.m)
    }
}

/// How the block count `m` is chosen for each dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSchedule {
    Fixed(usize),
    /// `m(n) = ⌊√n⌋`, the fastest growth keeping `n >= m²`.
    Sqrt,
}

impl BlockSchedule {
    pub fn blocks(&self, n: usize) -> usize {
        match *self {
            BlockSchedule::Fixed(m) => m,
            BlockSchedule::Sqrt => isqrt(n).max(1),
        }
    }
}

pub(crate) fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `diag_{i=1..m}[a(i/m) T_{⌊n/m⌋}(f)] ⊕ O_{n mod m}`.
pub fn lt_block<T: Real>(d: &LtDescriptor<T>, n: usize) -> Result<DenseMatrix<T>> {
    if d.m == 0 {
        return Err(GltError::ZeroBlockCount);
    }
    if n < d.m {
        return Err(GltError::NoCompleteBlock { n, m: d.m });
    }
    let (k, rest) = d.layout(n);
    let t = toeplitz(&d.f, k)?;
    let mf = T::from_usize_lossy(d.m);
    let mut blocks = Vec::with_capacity(d.m + 1);
    for i in 1..=d.m {
        let w = d.a.eval(T::from_usize_lossy(i) / mf)?;
        blocks.push(t.scale(creal(w))?);
    }
    blocks.push(DenseMatrix::zeros(rest));
    let refs: Vec<&DenseMatrix<T>> = blocks.iter().collect();
    Ok(DenseMatrix::block_diag(&refs))
}

/// `Σ_i D_n(a_i) T_n(f_i)`.
pub fn glt_build<T: Real>(terms: &[(ScalarFunc, TrigPoly<T>)], n: usize) -> Result<DenseMatrix<T>> {
    if terms.is_empty() {
        return Err(GltError::EmptyTerms);
    }
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    let mut acc = nalgebra::DMatrix::<C<T>>::zeros(n, n);
    for (a, f) in terms {
        let t = toeplitz(f, n)?;
        let w = sample_points::<T>(a, n)?;
        for col in 0..n {
            for row in 0..n {
                acc[(row, col)] += t.get(row, col) * creal(w[row]);
            }
        }
    }
    DenseMatrix::from_dmatrix(acc)
}

pub fn toeplitz_seq<T: Real>(f: TrigPoly<T>) -> MatrixSeq<T> {
    MatrixSeq::new(format!("T[{f}]"), move |n| toeplitz(&f, n))
}

pub fn diag_seq<T: Real>(a: ScalarFunc) -> MatrixSeq<T> {
    MatrixSeq::new(format!("D[{a}]"), move |n| diag_sample(&a, n))
}

pub fn leading_ones_seq<T: Real>(m: usize) -> MatrixSeq<T> {
    MatrixSeq::new(format!("B[m={m}]"), move |n| leading_ones(m, n))
}

/// `n -> LT_n^{m(n)}(a, f)`.
pub fn lt_seq<T: Real>(a: ScalarFunc, f: TrigPoly<T>, schedule: BlockSchedule) -> MatrixSeq<T> {
    MatrixSeq::new(format!("LT[{a}, {f}, {schedule:?}]"), move |n| {
        let d = LtDescriptor::new(a.clone(), f.clone(), schedule.blocks(n))?;
        lt_block(&d, n)
    })
}

pub fn glt_seq<T: Real>(terms: Vec<(ScalarFunc, TrigPoly<T>)>) -> MatrixSeq<T> {
    let label = terms.iter().map(|(a, f)| format!("D[{a}]T[{f}]")).collect::<Vec<_>>().join(" + ");
    MatrixSeq::new(label, move |n| glt_build(&terms, n))
}

/// Canonical sequence for a symbol: atoms map to `D_n(a) T_n(f)` and the
/// tree nodes to the matching sequence algebra (conj becomes adjoint).
pub fn symbol_seq<T: Real>(s: &SymbolExpr<T>) -> MatrixSeq<T> {
    match s {
        SymbolExpr::Atom { a, f } => glt_seq(vec![(a.clone(), f.clone())]),
        SymbolExpr::Add(l, r) => symbol_seq(l).add(&symbol_seq(r)),
        SymbolExpr::Mul(l, r) => symbol_seq(l).mul(&symbol_seq(r)),
        SymbolExpr::Conj(x) => symbol_seq(x).adjoint(),
        SymbolExpr::Scale(c, x) => symbol_seq(x).scale(*c),
    }
}

/// Complex Gaussian entries (unit variance per component), scaled by `scale`.
/// Deterministic in `(seed, n)`.
pub fn random_gaussian<T: Real>(seed: u64, n: usize, scale: f64) -> Result<DenseMatrix<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        entries.push(cplx(T::cst(re * scale), T::cst(im * scale)));
    }
    DenseMatrix::from_row_major(n, &entries)
}

pub fn random_seq<T: Real>(seed: u64, scale: f64) -> MatrixSeq<T> {
    MatrixSeq::new(format!("Rand[seed={seed}]"), move |n| random_gaussian(seed, n, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SeqOp;

    fn cos2() -> TrigPoly<f64> {
        TrigPoly::cosine(2.0, 1.0)
    }

    fn real_matrix(rows: &[&[f64]]) -> DenseMatrix<f64> {
        let n = rows.len();
        DenseMatrix::from_fn(n, |j, k| creal(rows[j][k])).unwrap()
    }

    const TOL: f64 = 1e-12;

    #[test]
    fn toeplitz_examples() {
        let t = toeplitz(&cos2(), 2).unwrap();
        assert!(t.approx_eq(&real_matrix(&[&[2.0, 0.5], &[0.5, 2.0]]), TOL));
        assert!(toeplitz(&TrigPoly::<f64>::one(), 5).unwrap().approx_eq(&DenseMatrix::identity(5), 0.0));
        let shift = toeplitz(&TrigPoly::monomial(1, creal(1.0)), 3).unwrap();
        let lower = real_matrix(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert!(shift.approx_eq(&lower, 0.0));
        assert_eq!(toeplitz(&cos2(), 0).unwrap_err(), GltError::ZeroDimension);
    }

    #[test]
    fn toeplitz_is_constant_along_diagonals() {
        let f = TrigPoly::from_pairs([(-2, cplx(1.0, 1.0)), (0, creal(3.0)), (3, cplx(0.0, -2.0))]);
        let t = toeplitz(&f, 7).unwrap();
        for j in 0..7 {
            for k in 0..7 {
                assert_eq!(t.get(j, k), f.coeff(j as i64 - k as i64));
            }
        }
    }

    #[test]
    fn toeplitz_hermitian_for_real_symbol() {
        for n in [4, 16, 64] {
            assert!(toeplitz(&cos2(), n).unwrap().is_hermitian(0.0));
        }
        let f = TrigPoly::from_pairs([(1, creal(1.0))]);
        assert!(!toeplitz(&f, 4).unwrap().is_hermitian(1e-12));
    }

    #[test]
    fn diag_examples() {
        let d = diag_sample::<f64>(&ScalarFunc::x(), 4).unwrap();
        assert!(d.approx_eq(&DenseMatrix::from_real_diagonal(&[0.25, 0.5, 0.75, 1.0]).unwrap(), 0.0));
        assert!(diag_sample::<f64>(&ScalarFunc::one(), 5).unwrap().approx_eq(&DenseMatrix::identity(5), 0.0));
        let s = diag_sample::<f64>(&ScalarFunc::parse("1/sqrt(x)").unwrap(), 3).unwrap();
        let expect = DenseMatrix::from_real_diagonal(&[3f64.sqrt(), 1.5f64.sqrt(), 1.0]).unwrap();
        assert!(s.approx_eq(&expect, TOL));
    }

    #[test]
    fn diag_reports_failing_sample() {
        let err = diag_sample::<f64>(&ScalarFunc::parse("1/(x - 0.5)").unwrap(), 4).unwrap_err();
        match err {
            GltError::NonFiniteValue { location, .. } => assert_eq!(location, "x = 0.5"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lt_block_examples() {
        let d = LtDescriptor::new(ScalarFunc::x(), cos2(), 2).unwrap();
        let got = lt_block(&d, 4).unwrap();
        let expect = real_matrix(&[
            &[1.0, 0.25, 0.0, 0.0],
            &[0.25, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 2.0, 0.5],
            &[0.0, 0.0, 0.5, 2.0],
        ]);
        assert!(got.approx_eq(&expect, TOL));

        let ones = LtDescriptor::new(ScalarFunc::one(), TrigPoly::one(), 3).unwrap();
        let mut id = vec![1.0; 6];
        id.push(0.0);
        assert!(lt_block(&ones, 7).unwrap().approx_eq(&DenseMatrix::from_real_diagonal(&id).unwrap(), 0.0));

        let d3 = LtDescriptor::new(ScalarFunc::x(), cos2(), 3).unwrap();
        let got = lt_block(&d3, 7).unwrap();
        let t2 = real_matrix(&[&[2.0, 0.5], &[0.5, 2.0]]);
        let blocks: Vec<DenseMatrix<f64>> =
            [1.0 / 3.0, 2.0 / 3.0, 1.0].iter().map(|w| t2.scale(creal(*w)).unwrap()).collect();
        let z = DenseMatrix::zeros(1);
        let expect = DenseMatrix::block_diag(&[&blocks[0], &blocks[1], &blocks[2], &z]);
        assert!(got.approx_eq(&expect, TOL));
    }

    #[test]
    fn lt_block_rejects_small_n() {
        let d = LtDescriptor::new(ScalarFunc::x(), cos2(), 5).unwrap();
        assert_eq!(lt_block(&d, 4).unwrap_err(), GltError::NoCompleteBlock { n: 4, m: 5 });
        assert!(LtDescriptor::new(ScalarFunc::x(), cos2(), 0).is_err());
    }

    #[test]
    fn glt_build_examples() {
        let one = glt_build(&[(ScalarFunc::one(), cos2())], 2).unwrap();
        assert!(one.approx_eq(&real_matrix(&[&[2.0, 0.5], &[0.5, 2.0]]), TOL));
        let diag = glt_build(&[(ScalarFunc::x(), TrigPoly::one())], 4).unwrap();
        assert!(diag.approx_eq(&DenseMatrix::from_real_diagonal(&[0.25, 0.5, 0.75, 1.0]).unwrap(), TOL));
        let tri = glt_build(
            &[
                (ScalarFunc::one(), TrigPoly::monomial(1, creal(1.0))),
                (ScalarFunc::one(), TrigPoly::monomial(-1, creal(1.0))),
            ],
            3,
        )
        .unwrap();
        let expect = real_matrix(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        assert!(tri.approx_eq(&expect, TOL));
        assert_eq!(glt_build::<f64>(&[], 3).unwrap_err(), GltError::EmptyTerms);
    }

    #[test]
    fn glt_build_reduces_to_primitives() {
        let a = ScalarFunc::parse("exp(x) - 1").unwrap();
        let f = TrigPoly::from_pairs([(0, creal(1.0)), (2, cplx(0.3, -0.2))]);
        for n in [1, 5, 12] {
            let t = glt_build(&[(ScalarFunc::one(), f.clone())], n).unwrap();
            assert!(t.approx_eq(&toeplitz(&f, n).unwrap(), TOL));
            let d = glt_build(&[(a.clone(), TrigPoly::one())], n).unwrap();
            assert!(d.approx_eq(&diag_sample(&a, n).unwrap(), TOL));
        }
    }

    #[test]
    fn lt_block_singular_values_are_scaled_toeplitz_ones() {
        use crate::acs::svd_profile;
        let d = LtDescriptor::new(ScalarFunc::parse("1 - 2*x").unwrap(), cos2(), 3).unwrap();
        let n = 14;
        let (k, _) = d.layout(n);
        let st = svd_profile(&toeplitz(&cos2(), k).unwrap()).unwrap();
        let mut expect: Vec<f64> = (1..=3)
            .flat_map(|i| {
                let w = (1.0 - 2.0 * i as f64 / 3.0).abs();
                st.sigma().iter().map(move |s| w * s).collect::<Vec<_>>()
            })
            .collect();
        expect.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let got = svd_profile(&lt_block(&d, n).unwrap()).unwrap();
        let rank = got.sigma().iter().filter(|&&s| s > 0.0).count();
        assert!(rank <= 3 * k);
        for (g, e) in got.sigma().iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn sequence_algebra_examples() {
        let e = toeplitz_seq(TrigPoly::<f64>::monomial(1, creal(1.0)));
        let em = toeplitz_seq(TrigPoly::<f64>::monomial(-1, creal(1.0)));
        let up = e.adjoint().eval(3).unwrap();
        let upper = real_matrix(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        assert!(up.approx_eq(&upper, 0.0));
        let p = MatrixSeq::apply(SeqOp::Mul, &[&e, &em]).unwrap().eval(3).unwrap();
        assert!(p.approx_eq(&DenseMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]).unwrap(), TOL));
    }

    #[test]
    fn double_adjoint_is_identity_map() {
        let x = glt_seq(vec![(
            ScalarFunc::parse("x + 1").unwrap(),
            TrigPoly::from_pairs([(1, cplx(1.0, 2.0)), (-1, cplx(0.0, 1.0))]),
        )]);
        let xx = x.adjoint().adjoint();
        for n in [1, 3, 8, 17] {
            assert!(xx.eval(n).unwrap().approx_eq(&x.eval(n).unwrap(), 0.0));
        }
    }

    #[test]
    fn builders_are_deterministic() {
        let r = random_seq::<f64>(7, 1.0);
        assert_eq!(r.eval(9).unwrap(), r.eval(9).unwrap());
        assert_ne!(r.eval(9).unwrap(), random_seq::<f64>(8, 1.0).eval(9).unwrap());
    }

    #[test]
    fn leading_ones_layout() {
        let b = leading_ones::<f64>(8, 20).unwrap();
        let d: Vec<f64> = b.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d.iter().filter(|&&v| v == 1.0).count(), 2);
        assert_eq!(d[0], 1.0);
        assert_eq!(d[2], 0.0);
    }

    #[test]
    fn symbol_seq_matches_structure() {
        let s = SymbolExpr::spatial(ScalarFunc::x()).mul(SymbolExpr::toeplitz(cos2())).conj();
        let m = symbol_seq(&s).eval(5).unwrap();
        let expect = diag_sample::<f64>(&ScalarFunc::x(), 5)
            .unwrap()
            .mul(&toeplitz(&cos2(), 5).unwrap())
            .unwrap()
            .adjoint();
        assert!(m.approx_eq(&expect, TOL));
    }

    #[test]
    fn sqrt_schedule() {
        assert_eq!(BlockSchedule::Sqrt.blocks(64), 8);
        assert_eq!(BlockSchedule::Sqrt.blocks(512), 22);
        assert_eq!(BlockSchedule::Sqrt.blocks(1023), 31);
        assert_eq!(BlockSchedule::Sqrt.blocks(1), 1);
    }
}
