//! Cross-module checks on a small golden set of difference sequences.

use glt_core::acs::qw_estimate;
use glt_core::cluster::{outlier_counts, ClusterLabel, ClusterThresholds, FrobeniusLabel};
use glt_core::precond::{lt_delta_seq, UnitaryFamily};
use glt_core::structured::{leading_ones_seq, toeplitz_seq, BlockSchedule};
use glt_core::{MatrixSeq64, ScalarFunc, SymbolExpr64, TrigPoly64};

// five points: the top half must span more than a doubling for the Frobenius
// boundedness rule to separate O(1) from linear growth
const DIMS: [usize; 5] = [16, 32, 64, 128, 256];
const EPS: [f64; 3] = [0.1, 0.25, 0.5];
const DELTAS: [f64; 3] = [0.1, 0.05, 0.02];

fn cosine() -> TrigPoly64 {
    TrigPoly64::cosine(2.0, 1.0)
}

fn golden() -> Vec<(&'static str, MatrixSeq64)> {
    let fam = UnitaryFamily::fourier();
    vec![
        ("zero", MatrixSeq64::zeros()),
        ("circulant delta", fam.delta_seq(&toeplitz_seq(cosine()))),
        ("circulant delta squared symbol", fam.delta_seq(&toeplitz_seq(cosine().mul(&cosine())))),
        ("leading ones", leading_ones_seq(8)),
    ]
}

fn lt_delta() -> MatrixSeq64 {
    lt_delta_seq(ScalarFunc::x(), cosine(), BlockSchedule::Sqrt)
}

#[test]
fn frobenius_evidence_never_contradicts_classification() {
    for (name, seq) in golden() {
        let r = outlier_counts(&seq, &DIMS, &EPS, ClusterThresholds::default()).unwrap();
        if r.frobenius == FrobeniusLabel::StrongEvidence {
            assert!(r.labels.iter().all(|l| *l != ClusterLabel::None), "{name}: {:?}", r.labels);
        }
    }
}

#[test]
fn frobenius_rule_reads_sqrt_growth_as_bounded() {
    // ||Δ_n||_F^2 grows like √n here, a factor of 2 across a top half spanning
    // 4x in n, which the max <= 2 min + cap rule accepts; the counts disagree.
    let r = outlier_counts(&lt_delta(), &DIMS, &EPS[..1], ClusterThresholds::default()).unwrap();
    let top = &r.frob2[2..];
    assert!(top[2] > 1.8 * top[0]);
    assert_eq!(r.frobenius, FrobeniusLabel::StrongEvidence);
    assert_eq!(r.labels[0], ClusterLabel::None);
}

#[test]
fn weak_clusters_have_small_qw_and_persistent_ones_do_not() {
    for (name, seq) in golden() {
        let r = outlier_counts(&seq, &DIMS, &EPS, ClusterThresholds::default()).unwrap();
        let q = qw_estimate(&seq, &DIMS, &DELTAS).unwrap();
        let h = q.headline.unwrap();
        if r.labels[0].is_weak_or_stronger() {
            assert!(h <= 2.0 * EPS[0], "{name}: headline {h}");
        }
        // persistent outlier fraction: c/n stays above the weak tolerance everywhere
        for (j, &e) in EPS.iter().enumerate() {
            let persistent = (0..DIMS.len()).all(|i| r.fraction(i, j) > 0.1);
            if r.labels[j] == ClusterLabel::None && persistent {
                assert!(h >= e, "{name}: headline {h} below persistent ε = {e}");
            }
        }
    }
}

#[test]
fn projection_inherits_frobenius_evidence() {
    let fam = UnitaryFamily::<f64>::fourier();
    let thr = ClusterThresholds::default();
    for (name, seq) in golden() {
        let projected = fam.project_seq(&seq);
        for &n in &DIMS {
            let d = seq.eval(n).unwrap();
            let p = projected.eval(n).unwrap();
            assert!(p.frobenius_sq() <= d.frobenius_sq() * (1.0 + 1e-12) + 1e-24, "{name} n={n}");
        }
        let r = outlier_counts(&seq, &DIMS, &EPS, thr).unwrap();
        if !r.labels[0].is_weak_or_stronger() {
            continue;
        }
        let half: Vec<f64> = EPS.iter().map(|e| e / 2.0).collect();
        let rd = outlier_counts(&seq, &DIMS, &half, thr).unwrap();
        let rp = outlier_counts(&projected, &DIMS, &EPS, thr).unwrap();
        for i in 0..DIMS.len() {
            for j in 0..EPS.len() {
                assert!(rp.fraction(i, j) <= rd.fraction(i, j) + thr.weak_tol, "{name} n={} ε={}", DIMS[i], EPS[j]);
            }
        }
    }
}

#[test]
fn toeplitz_qw_bounded_by_symbol_sup() {
    for f in [cosine(), cosine().mul(&cosine())] {
        let sup = SymbolExpr64::toeplitz(f.clone()).grid_max_modulus(512).unwrap();
        let q = qw_estimate(&toeplitz_seq(f), &[32, 64, 128, 256], &[0.1, 0.01, 0.0]).unwrap();
        for v in q.table.iter().flatten() {
            assert!(v.unwrap() <= sup + 1e-6);
        }
    }
}

#[test]
fn circulant_counts_stay_under_cap() {
    let fam = UnitaryFamily::<f64>::fourier();
    let r = outlier_counts(&fam.delta_seq(&toeplitz_seq(cosine())), &DIMS, &EPS, ClusterThresholds::default()).unwrap();
    assert!(r.uniform);
    assert_eq!(r.frobenius, FrobeniusLabel::StrongEvidence);
}
