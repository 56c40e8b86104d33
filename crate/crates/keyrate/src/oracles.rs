//! Independent reference implementations used to cross-check the
//! closed-form production code.
//!
//! Everything here goes through dense eigenvalue decompositions of real
//! symmetric matrices, a completely different computational path from the
//! characteristic-polynomial and closed-form expressions in [`crate::leakage`]
//! and [`crate::keyrate_engine`].  Complex Hermitian operators are handled
//! through the standard real embedding
//!
//! ```text
//! A + iB  ↦  [ A  −B ]
//!            [ B   A ]
//! ```
//!
//! which is a *-homomorphism: products, adjoints, and spectral functions
//! commute with it, and every eigenvalue of the complex matrix appears
//! exactly twice in the embedding.  Spectral sums computed in the embedding
//! are therefore halved before returning.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::leakage::coherent_overlap;

fn embed_hermitian(a: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = a.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let (i, j) = (r % n, c % n);
        match (r / n, c / n) {
            (0, 0) | (1, 1) => a[(i, j)].re,
            (0, 1) => -a[(i, j)].im,
            _ => a[(i, j)].im,
        }
    })
}

/// Spectral square root with eigenvalues below `floor_rel`·λ_max zeroed.
///
/// The floor matters only for operators with genuinely deficient rank
/// (the two-state leak mixtures): their zero eigenvalues come back from
/// the eigensolver as ±1e−16 residue whose square roots (~1e−8) would
/// otherwise dominate every spectral sum downstream.  Operators whose
/// small eigenvalues carry real structure — Gram matrices of nearly
/// parallel states — must pass `floor_rel = 0`.
fn sym_sqrt(m: &DMatrix<f64>, floor_rel: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let floor = floor_rel * eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let roots = eig
        .eigenvalues
        .map(|l| if l > floor { l.sqrt() } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose()
}

/// Trace distance ½·tr|Δ| of the three-coherent-state claim operator
/// Δ = P(α_1) − p·P(α_2) − (1−p)·P(α_3), with α_k = √(b2[k])·e^{iθ[k]},
/// computed from the spectrum of G^{1/2} C G^{1/2} in the 6×6 real
/// embedding (G the Gram matrix, C = diag(1, −p, −(1−p))).
///
/// Δ acts on the ≤3-dimensional span of the states and its nonzero
/// spectrum equals that of G^{1/2} C G^{1/2}, so this evaluates the same
/// quantity as [`crate::leakage::d3_coherent`] without sharing any of its
/// algebra.
pub fn gram_embedding_trace_distance(b2: [f64; 3], theta: [f64; 3], p: f64) -> f64 {
    assert!(b2.iter().all(|v| v.is_finite() && *v >= 0.0));
    assert!((0.0..=1.0).contains(&p));
    let alphas: Vec<Complex64> = (0..3)
        .map(|k| Complex64::from_polar(b2[k].sqrt(), theta[k]))
        .collect();
    let gram = DMatrix::from_fn(3, 3, |j, k| coherent_overlap(alphas[j], alphas[k]));
    let weights = [1.0, -p, -(1.0 - p)];

    let g6 = embed_hermitian(&gram);
    let s6 = sym_sqrt(&g6, 0.0);
    let c6 = DMatrix::from_fn(6, 6, |r, c| if r == c { weights[r % 3] } else { 0.0 });
    let m6 = &s6 * c6 * &s6;
    let eig = SymmetricEigen::new(m6);
    let doubled_abs_sum: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
    (0.25 * doubled_abs_sum).min(1.0)
}

fn coherent_fock_vector(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let norm = (-alpha.norm_sqr() / 2.0).exp();
    let mut out = Vec::with_capacity(dim);
    let mut term = Complex64::new(norm, 0.0);
    out.push(term);
    for n in 1..dim {
        term *= alpha / (n as f64).sqrt();
        out.push(term);
    }
    out
}

fn mixture_density(alphas: &[Complex64], dim: usize) -> DMatrix<Complex64> {
    let weight = 1.0 / alphas.len() as f64;
    let mut rho = DMatrix::zeros(dim, dim);
    for alpha in alphas {
        let v = coherent_fock_vector(*alpha, dim);
        for m in 0..dim {
            for n in 0..dim {
                rho[(m, n)] += weight * v[m] * v[n].conj();
            }
        }
    }
    rho
}

/// Uhlmann fidelity tr√(√ρ_Z ρ_X √ρ_Z) between the basis-conditioned
/// phase-modulator leak mixtures ρ_Z = ½[P(β) + P(−β)] and
/// ρ_X = ½[P(iβ) + P(−iβ)], β = √`i_max_pm`, evaluated numerically in a
/// `dim`-level Fock truncation.
///
/// Cross-checks the closed form [`crate::keyrate_engine::pm_fidelity`];
/// the truncation error is below the Poisson tail past `dim` photons, so
/// `dim ≥ 14` is ample for intensities up to ~0.3.
pub fn fock_pm_fidelity(i_max_pm: f64, dim: usize) -> f64 {
    assert!(i_max_pm.is_finite() && i_max_pm >= 0.0);
    assert!(dim >= 2);
    let beta = i_max_pm.sqrt();
    let rho_z = mixture_density(
        &[Complex64::new(beta, 0.0), Complex64::new(-beta, 0.0)],
        dim,
    );
    let rho_x = mixture_density(
        &[Complex64::new(0.0, beta), Complex64::new(0.0, -beta)],
        dim,
    );
    let z_emb = embed_hermitian(&rho_z);
    let x_emb = embed_hermitian(&rho_x);
    let root_z = sym_sqrt(&z_emb, 1e-12);
    let inner = &root_z * x_emb * &root_z;
    let eig = SymmetricEigen::new(sym_sqrt(&inner, 1e-12));
    let doubled_trace: f64 = eig.eigenvalues.iter().sum();
    (doubled_trace / 2.0).min(1.0)
}
