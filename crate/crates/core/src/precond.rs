//! Unitary-algebra projections `P_U(A) = U diag(U*AU) U*`, circulant and
//! block-Fourier preconditioners, and the Korovkin-type harness.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::acs::{spectral_norm, validate_dims};
use crate::cluster::{outlier_counts, ClusterReport, ClusterThresholds};
use crate::matrix::{DenseMatrix, MatrixSeq};
use crate::scalar::{cplx, creal, Real, C};
use crate::structured::{isqrt, lt_block, BlockSchedule, LtDescriptor};
use crate::symbol::SymbolExpr;
use crate::{GltError, Result};

/// `F_n(j, l) = e^{2πijl/n} / √n`.
pub fn fourier_matrix<T: Real>(n: usize) -> Result<DenseMatrix<T>> {
    if n == 0 {
        return Err(GltError::ZeroDimension);
    }
    let nf = T::from_usize_lossy(n);
    let norm = T::one() / nf.sqrt();
    DenseMatrix::from_fn(n, |j, l| {
        // reduce jl mod n first so the angle stays accurate at large n
        let ang = T::two_pi() * T::from_usize_lossy((j * l) % n) / nf;
        cplx(ang.cos() * norm, ang.sin() * norm)
    })
}

/// Block sizes of the block-Fourier unitary: `m` blocks of `⌊n/m⌋` and a
/// trailing `n mod m` block when nonzero.
pub fn block_sizes(n: usize, m: usize) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(GltError::ZeroBlockCount);
    }
    if n < m {
        return Err(GltError::NoCompleteBlock { n, m });
    }
    let mut sizes = vec![n / m; m];
    if !n.is_multiple_of(m) {
        sizes.push(n % m);
    }
    Ok(sizes)
}

/// `F_{⌊n/m⌋} ⊕ ... ⊕ F_{⌊n/m⌋} ⊕ F_{n mod m}` (`m` copies).
pub fn block_fourier<T: Real>(n: usize, m: usize) -> Result<DenseMatrix<T>> {
    let sizes = block_sizes(n, m)?;
    let mut cache: HashMap<usize, DenseMatrix<T>> = HashMap::new();
    for &k in &sizes {
        if let std::collections::hash_map::Entry::Vacant(e) = cache.entry(k) {
            e.insert(fourier_matrix(k)?);
        }
    }
    let blocks: Vec<&DenseMatrix<T>> = sizes.iter().map(|k| &cache[k]).collect();
    Ok(DenseMatrix::block_diag(&blocks))
}

/// `U diag(U*AU) U*`, the Frobenius-orthogonal projection onto the algebra
/// of matrices diagonalized by `U`.
pub fn project_unitary<T: Real>(a: &DenseMatrix<T>, u: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = a.dim();
    if u.dim() != n {
        return Err(GltError::DimensionMismatch { left: n, right: u.dim() });
    }
    let defect = u.unitarity_defect();
    if !(defect <= T::unitary_tol() * T::from_usize_lossy(n).sqrt()) {
        return Err(GltError::NotUnitary { residual: defect.to_f64_lossy() });
    }
    let um = u.as_matrix();
    let au = a.as_matrix() * um;
    // d_k = u_k^* A u_k
    let d: Vec<C<T>> = (0..n).map(|k| um.column(k).dotc(&au.column(k))).collect();
    let mut scaled = um.clone();
    for (k, dk) in d.iter().enumerate() {
        for z in scaled.column_mut(k).iter_mut() {
            *z *= *dk;
        }
    }
    DenseMatrix::from_dmatrix(scaled * um.adjoint())
}

/// First column of the Frobenius-optimal circulant: `c_k` is the mean of the
/// `k`-th wrapped diagonal `A[(j+k) mod n, j]`.
pub fn circulant_column<T: Real>(a: &DenseMatrix<T>) -> Vec<C<T>> {
    let n = a.dim();
    let m = a.as_matrix();
    let inv = creal(T::one() / T::from_usize_lossy(n));
    (0..n)
        .map(|k| (0..n).fold(creal(T::zero()), |acc, j| acc + m[((j + k) % n, j)]) * inv)
        .collect()
}

pub fn circulant_from_column<T: Real>(c: &[C<T>]) -> Result<DenseMatrix<T>> {
    let n = c.len();
    DenseMatrix::from_fn(n, |r, s| c[(r + n - s) % n])
}

/// Circulant preconditioner: `P_{F_n}(A)` by wrapped-diagonal averaging.
pub fn circulant_project<T: Real>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    circulant_from_column(&circulant_column(a))
}

/// `P_U(A)` for block-Fourier `U` with the given block sizes: circulant
/// projection of each diagonal block, off-diagonal blocks dropped.
pub fn blockwise_circulant_project<T: Real>(a: &DenseMatrix<T>, sizes: &[usize]) -> Result<DenseMatrix<T>> {
    let n = a.dim();
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(GltError::DimensionMismatch { left: n, right: total });
    }
    let m = a.as_matrix();
    let mut out = DMatrix::<C<T>>::zeros(n, n);
    let mut off = 0;
    for &k in sizes {
        let block = DenseMatrix::from_dmatrix(m.view((off, off), (k, k)).into_owned())?;
        let c = circulant_project(&block)?;
        out.view_mut((off, off), (k, k)).copy_from(c.as_matrix());
        off += k;
    }
    DenseMatrix::from_dmatrix(out)
}

type UnitaryFn<T> = dyn Fn(usize) -> Result<DenseMatrix<T>> + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryKind {
    Fourier,
    BlockFourier(BlockSchedule),
    Explicit,
}

/// Rule `n -> U_n` with a per-family cache of generated unitaries.
#[derive(Clone)]
pub struct UnitaryFamily<T: Real> {
    kind: UnitaryKind,
    label: String,
    explicit: Option<Arc<UnitaryFn<T>>>,
    cache: Arc<RwLock<HashMap<usize, Arc<DenseMatrix<T>>>>>,
}

impl<T: Real> fmt::Debug for UnitaryFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryFamily").field("kind", &self.kind).field("label", &self.label).finish()
    }
}

impl<T: Real> UnitaryFamily<T> {
    fn with(kind: UnitaryKind, label: String, explicit: Option<Arc<UnitaryFn<T>>>) -> Self {
        Self { kind, label, explicit, cache: Arc::default() }
    }

    pub fn fourier() -> Self {
        Self::with(UnitaryKind::Fourier, "fourier".into(), None)
    }

    pub fn block_fourier(schedule: BlockSchedule) -> Self {
        let label = match schedule {
            BlockSchedule::Fixed(m) => format!("block_fourier(m={m})"),
            BlockSchedule::Sqrt => "block_fourier(m=floor_sqrt_n)".into(),
        };
        Self::with(UnitaryKind::BlockFourier(schedule), label, None)
    }

    /// Unitaries from an arbitrary rule; each is checked on first use.
    pub fn explicit(
        label: impl Into<String>,
        rule: impl Fn(usize) -> Result<DenseMatrix<T>> + Send + Sync + 'static,
    ) -> Self {
        Self::with(UnitaryKind::Explicit, format!("explicit({})", label.into()), Some(Arc::new(rule)))
    }

    pub fn kind(&self) -> UnitaryKind {
        self.kind
    }

    pub fn id(&self) -> &str {
        &self.label
    }

    pub fn unitary(&self, n: usize) -> Result<Arc<DenseMatrix<T>>> {
        if let Some(u) = self.cache.read().expect("cache lock").get(&n) {
            return Ok(Arc::clone(u));
        }
        let u = match self.kind {
            UnitaryKind::Fourier => fourier_matrix(n)?,
            UnitaryKind::BlockFourier(s) => block_fourier(n, s.blocks(n))?,
            UnitaryKind::Explicit => {
                let rule = self.explicit.as_ref().expect("explicit family carries a rule");
                let u = rule(n)?;
                if u.dim() != n {
                    return Err(GltError::DimensionMismatch { left: n, right: u.dim() });
                }
                let defect = u.unitarity_defect();
                if !(defect <= T::unitary_tol() * T::from_usize_lossy(n).sqrt()) {
                    return Err(GltError::NotUnitary { residual: defect.to_f64_lossy() });
                }
                u
            }
        };
        let u = Arc::new(u);
        self.cache.write().expect("cache lock").entry(n).or_insert_with(|| Arc::clone(&u));
        Ok(u)
    }

    /// `P_{U_n}(A)` with `n = dim A`, using the structured fast paths.
    pub fn project(&self, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let n = a.dim();
        match self.kind {
            UnitaryKind::Fourier => circulant_project(a),
            UnitaryKind::BlockFourier(s) => blockwise_circulant_project(a, &block_sizes(n, s.blocks(n))?),
            UnitaryKind::Explicit => project_unitary(a, &*self.unitary(n)?),
        }
    }

    pub fn project_seq(&self, seq: &MatrixSeq<T>) -> MatrixSeq<T> {
        let fam = self.clone();
        let s = seq.clone();
        MatrixSeq::new(format!("P[{}]({})", self.id(), seq.label()), move |n| fam.project(&s.eval(n)?))
    }

    /// `n -> P_{U_n}(A_n) - A_n`.
    pub fn delta_seq(&self, seq: &MatrixSeq<T>) -> MatrixSeq<T> {
        let fam = self.clone();
        let s = seq.clone();
        MatrixSeq::new(format!("P[{}]({0}) - {0}", seq.label()), move |n| {
            let a = s.eval(n)?;
            fam.project(&a)?.sub(&a)
        })
    }
}

/// `(P_{U_n}(Ã_n), P_{U_n}(Ã_n) - Ã_n)` with `Ã_n = LT_n^m(a, f)` and block-Fourier `U_n`.
pub fn lt_precondition<T: Real>(d: &LtDescriptor<T>, n: usize) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let a = lt_block(d, n)?;
    let p = blockwise_circulant_project(&a, &block_sizes(n, d.m)?)?;
    let delta = p.sub(&a)?;
    Ok((p, delta))
}

/// `n -> P_{U_n}(Ã_n) - Ã_n` with `m = m(n)` from the schedule.
pub fn lt_delta_seq<T: Real>(a: crate::ScalarFunc, f: crate::TrigPoly<T>, schedule: BlockSchedule) -> MatrixSeq<T> {
    MatrixSeq::new(format!("LTdelta[{a}, {f}, {schedule:?}]"), move |n| {
        let d = LtDescriptor::new(a.clone(), f.clone(), schedule.blocks(n))?;
        Ok(lt_precondition(&d, n)?.1)
    })
}

/// `U J U*` with `J` the all-ones matrix: a perturbation of norm `n` whose
/// projection defect never clusters.
pub fn ones_rotation<T: Real>(u: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = u.dim();
    let um = u.as_matrix();
    let ones = DMatrix::<C<T>>::from_element(n, n, creal(T::one()));
    DenseMatrix::from_dmatrix(um * ones * um.adjoint())
}

pub fn ones_rotation_seq<T: Real>(family: &UnitaryFamily<T>) -> MatrixSeq<T> {
    let fam = family.clone();
    MatrixSeq::new(format!("Z[{}]", family.id()), move |n| ones_rotation(&*fam.unitary(n)?))
}

/// Finite word over the generators under `+`, `×`, `*` and scalars.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraWord<T> {
    Gen(usize),
    One,
    Add(Box<AlgebraWord<T>>, Box<AlgebraWord<T>>),
    Mul(Box<AlgebraWord<T>>, Box<AlgebraWord<T>>),
    Adjoint(Box<AlgebraWord<T>>),
    Scale(C<T>, Box<AlgebraWord<T>>),
}

impl<T: Real> AlgebraWord<T> {
    pub fn gen(i: usize) -> Self {
        AlgebraWord::Gen(i)
    }

    pub fn add(self, other: Self) -> Self {
        AlgebraWord::Add(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: Self) -> Self {
        AlgebraWord::Mul(Box::new(self), Box::new(other))
    }

    pub fn adjoint(self) -> Self {
        AlgebraWord::Adjoint(Box::new(self))
    }

    pub fn scale(self, c: C<T>) -> Self {
        AlgebraWord::Scale(c, Box::new(self))
    }

    fn check(&self, k: usize) -> Result<()> {
        match self {
            AlgebraWord::Gen(i) if *i >= k => {
                Err(GltError::Invalid(format!("word references generator {i} but only {k} are declared")))
            }
            AlgebraWord::Gen(_) | AlgebraWord::One => Ok(()),
            AlgebraWord::Add(l, r) | AlgebraWord::Mul(l, r) => l.check(k).and_then(|_| r.check(k)),
            AlgebraWord::Adjoint(x) | AlgebraWord::Scale(_, x) => x.check(k),
        }
    }

    pub fn to_seq(&self, gens: &[Generator<T>]) -> Result<MatrixSeq<T>> {
        self.check(gens.len())?;
        Ok(self.seq_unchecked(gens))
    }

    fn seq_unchecked(&self, gens: &[Generator<T>]) -> MatrixSeq<T> {
        match self {
            AlgebraWord::Gen(i) => gens[*i].seq.clone(),
            AlgebraWord::One => MatrixSeq::identity(),
            AlgebraWord::Add(l, r) => l.seq_unchecked(gens).add(&r.seq_unchecked(gens)),
            AlgebraWord::Mul(l, r) => l.seq_unchecked(gens).mul(&r.seq_unchecked(gens)),
            AlgebraWord::Adjoint(x) => x.seq_unchecked(gens).adjoint(),
            AlgebraWord::Scale(c, x) => x.seq_unchecked(gens).scale(*c),
        }
    }

    pub fn to_symbol(&self, gens: &[Generator<T>]) -> Result<SymbolExpr<T>> {
        self.check(gens.len())?;
        Ok(self.symbol_unchecked(gens))
    }

    fn symbol_unchecked(&self, gens: &[Generator<T>]) -> SymbolExpr<T> {
        match self {
            AlgebraWord::Gen(i) => gens[*i].symbol.clone(),
            AlgebraWord::One => SymbolExpr::one(),
            AlgebraWord::Add(l, r) => l.symbol_unchecked(gens).add(r.symbol_unchecked(gens)),
            AlgebraWord::Mul(l, r) => l.symbol_unchecked(gens).mul(r.symbol_unchecked(gens)),
            AlgebraWord::Adjoint(x) => x.symbol_unchecked(gens).conj(),
            AlgebraWord::Scale(c, x) => x.symbol_unchecked(gens).scale(*c),
        }
    }
}

impl<T: Real> fmt::Display for AlgebraWord<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraWord::Gen(i) => write!(f, "g{i}"),
            AlgebraWord::One => write!(f, "1"),
            AlgebraWord::Add(l, r) => write!(f, "({l} + {r})"),
            AlgebraWord::Mul(l, r) => write!(f, "({l} {r})"),
            AlgebraWord::Adjoint(x) => write!(f, "{x}*"),
            AlgebraWord::Scale(c, x) => write!(f, "({c}) {x}"),
        }
    }
}

/// A symbol together with the sequence chosen to represent it.
#[derive(Debug, Clone)]
pub struct Generator<T: Real> {
    pub name: String,
    pub symbol: SymbolExpr<T>,
    pub seq: MatrixSeq<T>,
}

impl<T: Real> Generator<T> {
    pub fn new(name: impl Into<String>, symbol: SymbolExpr<T>, seq: MatrixSeq<T>) -> Self {
        Self { name: name.into(), symbol, seq }
    }
}

type FamilyFn<T> = dyn Fn(usize) -> Result<MatrixSeq<T>> + Send + Sync;

/// A family `m -> {A_n(h_m)}` of sequences approximating `target`, from
/// which the single sequence `n -> P_{U_n}(A_n(h_{m(n)}))` is extracted with
/// `m(n) = ⌊√n⌋`.
#[derive(Clone)]
pub struct Extraction<T: Real> {
    pub name: String,
    pub family: Arc<FamilyFn<T>>,
    pub target: MatrixSeq<T>,
}

impl<T: Real> fmt::Debug for Extraction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Extraction").field("name", &self.name).field("target", &self.target).finish()
    }
}

/// `n -> P_{U_n}(A_n(h_{⌊√n⌋}))`.
pub fn extract_preconditioner<T: Real>(family: Arc<FamilyFn<T>>, unitary: &UnitaryFamily<T>) -> MatrixSeq<T> {
    let u = unitary.clone();
    MatrixSeq::new(format!("extract[{}]", unitary.id()), move |n| {
        let seq = family(isqrt(n).max(1))?;
        u.project(&seq.eval(n)?)
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct StageEntry<T> {
    pub name: String,
    pub symbol: Option<serde_json::Value>,
    pub report: ClusterReport<T>,
}

impl<T: Real> StageEntry<T> {
    /// All labels weak or strong.
    pub fn weak_or_stronger(&self) -> bool {
        !self.report.labels.is_empty() && self.report.labels.iter().all(|l| l.is_weak_or_stronger())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRecord<T> {
    pub name: String,
    pub norms: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrecondReport<T> {
    pub family: String,
    pub dims: Vec<usize>,
    pub bound: Option<T>,
    pub generator_norms: Vec<NormRecord<T>>,
    /// Stage 1: generators and `Σ g g*`.
    pub hypotheses: Vec<StageEntry<T>>,
    /// Stage 2: requested algebra elements.
    pub elements: Vec<StageEntry<T>>,
    pub extracted: Option<StageEntry<T>>,
    /// Every hypothesis weak or stronger at every sampled `ε`.
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct KorovkinSpec<T: Real> {
    pub generators: Vec<Generator<T>>,
    pub elements: Vec<(String, AlgebraWord<T>)>,
    pub family: UnitaryFamily<T>,
    pub dims: Vec<usize>,
    pub eps_grid: Vec<T>,
    /// Declared norm bound `M`; defaults to twice the largest generator norm
    /// over the two smallest dimensions.
    pub bound: Option<T>,
    pub thresholds: ClusterThresholds,
    pub extraction: Option<Extraction<T>>,
}

fn stage<T: Real>(
    name: String,
    symbol: Option<&SymbolExpr<T>>,
    delta: &MatrixSeq<T>,
    dims: &[usize],
    eps: &[T],
    thr: ClusterThresholds,
) -> Result<StageEntry<T>> {
    Ok(StageEntry { name, symbol: symbol.map(SymbolExpr::to_json), report: outlier_counts(delta, dims, eps, thr)? })
}

pub fn korovkin_run<T: Real>(spec: &KorovkinSpec<T>) -> Result<PrecondReport<T>> {
    validate_dims(&spec.dims, 2)?;
    if spec.generators.is_empty() {
        return Err(GltError::Invalid("at least one generator is required".into()));
    }
    let generator_norms: Vec<NormRecord<T>> = spec
        .generators
        .iter()
        .map(|g| {
            let norms = spec.dims.par_iter().map(|&n| spectral_norm(&g.seq.eval(n)?)).collect::<Result<_>>()?;
            Ok(NormRecord { name: g.name.clone(), norms })
        })
        .collect::<Result<_>>()?;
    let bound = match spec.bound {
        Some(b) => b,
        None => {
            let early = generator_norms.iter().flat_map(|r| r.norms[..2].iter().copied());
            T::cst(2.0) * early.fold(T::zero(), |a, b| a.max(b))
        }
    };
    let slack = T::cst(1e-9) * bound.max(T::one());
    for r in &generator_norms {
        let observed = r.norms.iter().fold(T::zero(), |a, &b| a.max(b));
        if observed > bound + slack {
            return Err(GltError::Unbounded {
                name: r.name.clone(),
                observed: observed.to_f64_lossy(),
                bound: bound.to_f64_lossy(),
            });
        }
    }
    for (name, w) in &spec.elements {
        w.check(spec.generators.len()).map_err(|e| GltError::Invalid(format!("element `{name}`: {e}")))?;
    }

    let (dims, eps, thr, fam) = (&spec.dims, &spec.eps_grid, spec.thresholds, &spec.family);
    let mut hypotheses = Vec::with_capacity(spec.generators.len() + 1);
    for g in &spec.generators {
        hypotheses.push(stage(g.name.clone(), Some(&g.symbol), &fam.delta_seq(&g.seq), dims, eps, thr)?);
    }
    let mut sum_seq = spec.generators[0].seq.mul(&spec.generators[0].seq.adjoint());
    let mut sum_sym = spec.generators[0].symbol.clone().mul(spec.generators[0].symbol.clone().conj());
    for g in &spec.generators[1..] {
        sum_seq = sum_seq.add(&g.seq.mul(&g.seq.adjoint()));
        sum_sym = sum_sym.add(g.symbol.clone().mul(g.symbol.clone().conj()));
    }
    hypotheses.push(stage("sum_ggstar".into(), Some(&sum_sym), &fam.delta_seq(&sum_seq), dims, eps, thr)?);

    let mut elements = Vec::with_capacity(spec.elements.len());
    for (name, w) in &spec.elements {
        let seq = w.to_seq(&spec.generators)?;
        let sym = w.to_symbol(&spec.generators)?;
        elements.push(stage(name.clone(), Some(&sym), &fam.delta_seq(&seq), dims, eps, thr)?);
    }

    let extracted = match &spec.extraction {
        Some(ex) => {
            let pre = extract_preconditioner(Arc::clone(&ex.family), fam);
            Some(stage(ex.name.clone(), None, &pre.sub(&ex.target), dims, eps, thr)?)
        }
        None => None,
    };

    let pass = hypotheses.iter().all(StageEntry::weak_or_stronger);
    Ok(PrecondReport {
        family: fam.id().to_owned(),
        dims: dims.clone(),
        bound: Some(bound),
        generator_norms,
        hypotheses,
        elements,
        extracted,
        pass,
    })
}

/// Cluster diagnostics of `P_{U_n}(A_n) - A_n` for a single sequence.
pub fn precond_diagnostics<T: Real>(
    name: &str,
    seq: &MatrixSeq<T>,
    family: &UnitaryFamily<T>,
    dims: &[usize],
    eps_grid: &[T],
    thresholds: ClusterThresholds,
) -> Result<PrecondReport<T>> {
    let entry = stage(name.to_owned(), None, &family.delta_seq(seq), dims, eps_grid, thresholds)?;
    let pass = entry.weak_or_stronger();
    Ok(PrecondReport {
        family: family.id().to_owned(),
        dims: dims.to_vec(),
        bound: None,
        generator_norms: Vec::new(),
        hypotheses: Vec::new(),
        elements: vec![entry],
        extracted: None,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterLabel;
    use crate::structured::{random_gaussian, toeplitz, toeplitz_seq};
    use crate::{ScalarFunc, TrigPoly};

    fn f() -> TrigPoly<f64> {
        TrigPoly::cosine(2.0, 1.0)
    }

    fn c(re: f64) -> C<f64> {
        creal(re)
    }

    #[test]
    fn fourier_is_unitary() {
        for n in [1, 2, 5, 16, 33] {
            let u = fourier_matrix::<f64>(n).unwrap();
            assert!(u.unitarity_defect() <= 1e-10 * (n as f64).sqrt());
        }
        let f2 = fourier_matrix::<f64>(2).unwrap();
        let s = 0.5f64.sqrt();
        assert!((f2.get(1, 1) - c(-s)).norm() < 1e-15);
    }

    #[test]
    fn block_fourier_layouts() {
        let u = block_fourier::<f64>(4, 2).unwrap();
        let f2 = fourier_matrix::<f64>(2).unwrap();
        assert!(u.approx_eq(&DenseMatrix::block_diag(&[&f2, &f2]), 0.0));
        assert!(block_fourier::<f64>(5, 5).unwrap().approx_eq(&DenseMatrix::identity(5), 1e-15));
        let u = block_fourier::<f64>(7, 3).unwrap();
        let f1 = fourier_matrix::<f64>(1).unwrap();
        assert!(u.approx_eq(&DenseMatrix::block_diag(&[&f2, &f2, &f2, &f1]), 0.0));
        assert_eq!(block_sizes(7, 3).unwrap(), vec![2, 2, 2, 1]);
        assert_eq!(block_sizes(6, 3).unwrap(), vec![2, 2, 2]);
        assert!(block_fourier::<f64>(2, 3).is_err());
    }

    #[test]
    fn circulant_examples() {
        let t4 = toeplitz(&f(), 4).unwrap();
        let col = circulant_column(&t4);
        let expect = [2.0, 0.375, 0.0, 0.375];
        for (z, e) in col.iter().zip(expect) {
            assert!((z - c(e)).norm() < 1e-15);
        }
        // wrapped-diagonal oracle c_k = ((n-k) t_k + k t_{k-n}) / n
        let t = |k: i64| f().coeff(k);
        for k in 0..4i64 {
            let oracle = (t(k) * c((4 - k) as f64) + t(k - 4) * c(k as f64)) / c(4.0);
            assert!((col[k as usize] - oracle).norm() < 1e-15);
        }
        let via_u = project_unitary(&t4, &fourier_matrix(4).unwrap()).unwrap();
        assert!(via_u.approx_eq(&circulant_project(&t4).unwrap(), 1e-10));

        let e = DenseMatrix::<f64>::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p = circulant_project(&e).unwrap();
        assert!(p.approx_eq(&DenseMatrix::identity(4).scale(c(0.25)).unwrap(), 1e-15));

        let circ = circulant_from_column(&[c(1.0), cplx(2.0, -1.0), c(0.5)]).unwrap();
        assert!(circulant_project(&circ).unwrap().approx_eq(&circ, 1e-15));
    }

    #[test]
    fn projection_fixes_the_algebra() {
        let n = 12;
        let u = random_unitary(n, 3);
        let d: Vec<C<f64>> = (0..n).map(|k| cplx(k as f64 - 3.0, 0.5 * k as f64)).collect();
        let a = DenseMatrix::from_dmatrix(
            u.as_matrix() * DenseMatrix::from_diagonal(&d).unwrap().as_matrix() * u.as_matrix().adjoint(),
        )
        .unwrap();
        assert!(project_unitary(&a, &u).unwrap().approx_eq(&a, 1e-10));
        let id = DenseMatrix::identity(n);
        assert!(project_unitary(&id, &u).unwrap().approx_eq(&id, 1e-10));
    }

    fn random_unitary(n: usize, seed: u64) -> DenseMatrix<f64> {
        let g = random_gaussian::<f64>(seed, n, 1.0).unwrap();
        let q = g.into_matrix().qr().q();
        DenseMatrix::from_dmatrix(q).unwrap()
    }

    #[test]
    fn project_unitary_errors() {
        let a = DenseMatrix::<f64>::identity(3);
        assert!(matches!(project_unitary(&a, &DenseMatrix::identity(4)), Err(GltError::DimensionMismatch { .. })));
        let bad = DenseMatrix::identity(3).scale(c(1.01)).unwrap();
        assert!(matches!(project_unitary(&a, &bad), Err(GltError::NotUnitary { .. })));
        let fam = UnitaryFamily::explicit("scaled", |n| DenseMatrix::<f64>::identity(n).scale(creal(2.0)));
        assert!(matches!(fam.unitary(3), Err(GltError::NotUnitary { .. })));
    }

    #[test]
    fn fast_paths_match_explicit_projection() {
        let a = random_gaussian::<f64>(11, 10, 1.0).unwrap();
        let fam = UnitaryFamily::block_fourier(BlockSchedule::Fixed(3));
        let fast = fam.project(&a).unwrap();
        let slow = project_unitary(&a, &fam.unitary(10).unwrap()).unwrap();
        assert!(fast.approx_eq(&slow, 1e-10));
        let fam = UnitaryFamily::<f64>::fourier();
        assert!(fam.project(&a).unwrap().approx_eq(&project_unitary(&a, &fam.unitary(10).unwrap()).unwrap(), 1e-10));
        let cached = fam.unitary(10).unwrap();
        assert!(Arc::ptr_eq(&cached, &fam.unitary(10).unwrap()));
    }

    #[test]
    fn lt_trivial_and_blockwise() {
        let d = LtDescriptor::<f64>::new(ScalarFunc::one(), TrigPoly::one(), 3).unwrap();
        for n in [3, 7, 10] {
            let (_, delta) = lt_precondition(&d, n).unwrap();
            assert!(delta.frobenius() < 1e-14);
        }
        let d = LtDescriptor::new(ScalarFunc::x(), f(), 2).unwrap();
        let (_, delta) = lt_precondition(&d, 4).unwrap();
        let t2 = toeplitz(&f(), 2).unwrap();
        let blk = circulant_project(&t2).unwrap().sub(&t2).unwrap();
        let expect = DenseMatrix::block_diag(&[&blk.scale(c(0.5)).unwrap(), &blk]);
        assert!(delta.approx_eq(&expect, 1e-14));
    }

    #[test]
    fn algebra_words() {
        let gens = vec![
            Generator::new("e+", SymbolExpr::toeplitz(TrigPoly::monomial(1, c(1.0))), toeplitz_seq(TrigPoly::monomial(1, c(1.0)))),
            Generator::new("e-", SymbolExpr::toeplitz(TrigPoly::monomial(-1, c(1.0))), toeplitz_seq(TrigPoly::monomial(-1, c(1.0)))),
        ];
        let w = AlgebraWord::One.scale(c(2.0)).add(AlgebraWord::gen(0).add(AlgebraWord::gen(1)).scale(c(0.5)));
        let s = w.to_symbol(&gens).unwrap();
        assert!((s.eval(0.3, 0.7).unwrap() - c(2.0 + 0.7f64.cos())).norm() < 1e-14);
        let a = w.to_seq(&gens).unwrap().eval(6).unwrap();
        assert!(a.approx_eq(&toeplitz(&f(), 6).unwrap(), 1e-15));
        assert!(AlgebraWord::<f64>::gen(2).to_seq(&gens).is_err());
        assert_eq!(w.adjoint().to_string(), "((2+0i) 1 + (0.5+0i) (g0 + g1))*");
    }

    #[test]
    fn korovkin_identity_generator() {
        let spec = KorovkinSpec {
            generators: vec![Generator::new("one", SymbolExpr::one(), MatrixSeq::identity())],
            elements: vec![("3one".into(), AlgebraWord::gen(0).scale(c(3.0)))],
            family: UnitaryFamily::fourier(),
            dims: vec![8, 16, 32, 64],
            eps_grid: vec![0.1],
            bound: None,
            thresholds: ClusterThresholds::default(),
            extraction: None,
        };
        let r = korovkin_run(&spec).unwrap();
        assert!(r.pass);
        assert_eq!(r.bound, Some(2.0));
        for e in r.hypotheses.iter().chain(&r.elements) {
            assert_eq!(e.report.labels, vec![ClusterLabel::Strong]);
            assert!(e.report.frob2.iter().all(|v| *v < 1e-20));
        }
    }

    #[test]
    fn korovkin_refuses_unbounded_generator() {
        let fam = UnitaryFamily::<f64>::fourier();
        let shift = toeplitz_seq(TrigPoly::monomial(1, c(1.0)));
        let spec = KorovkinSpec {
            generators: vec![Generator::new(
                "e+ perturbed",
                SymbolExpr::toeplitz(TrigPoly::monomial(1, c(1.0))),
                shift.add(&ones_rotation_seq(&fam)),
            )],
            elements: vec![],
            family: fam,
            dims: vec![4, 8, 16, 32],
            eps_grid: vec![0.1],
            bound: None,
            thresholds: ClusterThresholds::default(),
            extraction: None,
        };
        match korovkin_run(&spec) {
            Err(GltError::Unbounded { observed, bound, .. }) => assert!(observed > bound),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn ones_rotation_has_norm_n() {
        for n in [4, 9] {
            let z = ones_rotation(&fourier_matrix::<f64>(n).unwrap()).unwrap();
            assert!((spectral_norm(&z).unwrap() - n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn precond_diagnostics_on_circulant_is_strong() {
        let circ = MatrixSeq::new("circ", |n| circulant_from_column(&vec![creal(1.0f64); n]));
        let r = precond_diagnostics("circ", &circ, &UnitaryFamily::fourier(), &[4, 8, 16, 32], &[0.1], ClusterThresholds::default())
            .unwrap();
        assert!(r.pass);
        assert_eq!(r.elements[0].report.labels, vec![ClusterLabel::Strong]);
    }

    #[test]
    fn extraction_uses_sqrt_schedule() {
        let fam = UnitaryFamily::<f64>::fourier();
        let family: Arc<FamilyFn<f64>> =
            Arc::new(|m| Ok(toeplitz_seq(TrigPoly::cosine(2.0, 1.0 - 1.0 / m as f64))));
        let pre = extract_preconditioner(family, &fam);
        let got = pre.eval(16).unwrap();
        let expect = circulant_project(&toeplitz(&TrigPoly::cosine(2.0, 0.75), 16).unwrap()).unwrap();
        assert!(got.approx_eq(&expect, 1e-14));
    }
}
