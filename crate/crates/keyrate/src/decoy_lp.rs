//! Leakage-aware decoy-state linear programs.
//!
//! Alice announces gains Q^γ and error rates E^γ for each intensity
//! setting.  In the standard decoy method those observations pin the
//! photon-number yields Y_n through Q^γ = Σ_n P_n(γ)·Y_n.  When the
//! settings leak, an eavesdropper may condition her attack on the leaked
//! state, so the per-setting yields need not coincide; each gain equation
//! acquires a deviation term, and the deviations are constrained by the
//! trace distances of [`crate::leakage`].
//!
//! Concretely, with yields truncated at `s_cut` and the tail closed by
//! Γ^γ = 1 − Σ_{n ≤ s_cut} P_n(γ):
//!
//! * gain bands — for each setting, Σ_n P_n(γ)·Y_n (+ Δ terms for the decoy
//!   settings) lies in [Q^γ − Γ^γ, Q^γ];
//! * deviation boxes — |Δ_ws| ≤ d_ws, |Δ_vw| ≤ d_vw;
//! * three-setting inequalities — for every photon number n, each of the
//!   three orderings bounds a fixed linear combination of the two Δ

//!   variables by its three-state distance D_n.
//!
//! Minimizing Y_0 and Y_1 over this polytope gives certified lower bounds;
//! maximizing the single-photon error weight ω_1 (via the E·Q analogue of
//! the gain bands) gives the certified upper bound e1_U = ω1_max / Y1_L.
//! With all distances zero the Δ variables collapse and the program reduces
//! to the familiar no-leakage decoy LP.

mod simplex;

use crate::channel_model::{BasisStats, ObservedStats};
use crate::leakage::{
    poisson_pmf_raw, q_cond_raw, IntensityConfig, LeakageDistances, LeakageError, Setting,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("observed statistics out of range: {0}")]
    InvalidStats(String),
    #[error("distance vectors must have s_cut+1 = {expected} entries, got {got}")]
    DistanceLengthMismatch { expected: usize, got: usize },
    #[error("distance entries must lie in [0, 1], got {0}")]
    InvalidDistances(f64),
    #[error("estimator config invalid: {0}")]
    InvalidConfig(String),
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex failed to terminate within its iteration cap")]
    SolverStall,
    #[error("simplex basis went numerically bad: returned point violates a row by {violation:e}")]
    NumericalAudit { violation: f64 },
    #[error("decoy LP reported unbounded, which a box-bounded program cannot be")]
    UnexpectedUnbounded,
    #[error(transparent)]
    Leakage(#[from] LeakageError),
}

/// Truncation and solver settings for the decoy estimator.
/// Invariants: `s_cut ≥ 2` (the program must at least resolve Y_0 and Y_1
/// against a higher-order term), `lp_tolerance ∈ (0, 1e-6]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub s_cut: u32,
    pub lp_tolerance: f64,
}

impl EstimatorConfig {
    pub fn new(s_cut: u32, lp_tolerance: f64) -> Result<Self, LpError> {
        if s_cut < 2 {
            return Err(LpError::InvalidConfig(format!(
                "s_cut must be at least 2, got {s_cut}"
            )));
        }
        if !(lp_tolerance > 0.0 && lp_tolerance <= 1e-6) {
            return Err(LpError::InvalidConfig(format!(
                "lp_tolerance must lie in (0, 1e-6], got {lp_tolerance}"
            )));
        }
        Ok(Self {
            s_cut,
            lp_tolerance,
        })
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            s_cut: 10,
            lp_tolerance: 1e-9,
        }
    }
}

/// Which certified quantity the program extremizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Minimize the vacuum yield Y_0.
    Y0,
    /// Minimize the single-photon yield Y_1.
    Y1,
    /// Maximize the single-photon error weight ω_1 (posed as min −ω_1, with
    /// the gain targets replaced by Q·E).
    OmegaOne,
}

/// One inequality row: `coeffs · x ≤ rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpConstraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// A box-bounded linear program, `min objective·x` subject to the
/// constraint rows and per-variable bounds (upper bounds may be +∞).
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
    pub bounds: Vec<(f64, f64)>,
    pub tolerance: f64,
}

/// Solver verdict for a linear program.
#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// Certified decoy bounds.  When any of the three programs is infeasible
/// the bounds are vacuous — (Y0_L, Y1_L, e1_U) = (0, 0, 1) — and
/// `infeasible` is set so callers can surface the condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds {
    pub y0_l: f64,
    pub y1_l: f64,
    pub e1_u: f64,
    pub infeasible: bool,
}

/// Poisson tail mass above the truncation order:
/// Γ^γ = max(0, 1 − Σ_{n ≤ s_cut} P_n(γ)).
///
/// Evaluated exactly as written so the tail band matches the row
/// coefficients it closes; the clamp absorbs the last-ulp overshoot of the
/// partial sums when the true tail is below f64 resolution.
pub fn gamma_tail(gamma: f64, s_cut: u32) -> f64 {
    assert!(gamma.is_finite() && gamma >= 0.0);
    let mut sum = 0.0;
    for n in 0..=s_cut {
        sum += poisson_pmf_raw(gamma, n);
    }
    (1.0 - sum).max(0.0)
}

/// Assemble the decoy program for one objective from observed statistics
/// and leakage distances.
///
/// Variables are [Y_0 … Y_{s_cut}, Δ_ws, Δ_vw] (the ω program reuses the
/// same layout with ω_n in place of Y_n).  When both pairwise distances are
/// exactly zero the Δ variables are pinned and every three-setting row is
/// trivially satisfied, so the program is emitted without them — the
/// standard no-leakage decoy LP.
///
/// # Errors
/// `InvalidStats` / `InvalidDistances` / `DistanceLengthMismatch` on
/// out-of-range inputs.
pub fn build_lp(
    objective: Objective,
    stats: &BasisStats,
    dist: &LeakageDistances,
    cfg: &IntensityConfig,
    est: &EstimatorConfig,
) -> Result<LpProblem, LpError> {
    let s_cut = est.s_cut;
    let n_yields = s_cut as usize + 1;
    for lengths in [dist.d_svw.len(), dist.d_vsw.len(), dist.d_wsv.len()] {
        if lengths != n_yields {
            return Err(LpError::DistanceLengthMismatch {
                expected: n_yields,
                got: lengths,
            });
        }
    }
    for &d in [dist.d_ws, dist.d_vw]
        .iter()
        .chain(dist.d_svw.iter())
        .chain(dist.d_vsw.iter())
        .chain(dist.d_wsv.iter())
    {
        if !d.is_finite() || !(0.0..=1.0).contains(&d) {
            return Err(LpError::InvalidDistances(d));
        }
    }
    for setting in [Setting::S, Setting::V, Setting::W] {
        let ge = stats.get(setting);
        for v in [ge.gain, ge.qber] {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(LpError::InvalidStats(format!(
                    "gain/qber for setting {setting:?} out of [0,1]: {v}"
                )));
            }
        }
    }

    let reduced = dist.d_ws == 0.0 && dist.d_vw == 0.0;
    let n_vars = if reduced { n_yields } else { n_yields + 2 };

    let mut constraints =
        Vec::with_capacity(6 + if reduced { 0 } else { 6 * n_yields });
    let dels: [(Setting, &[usize]); 3] = [
        (Setting::S, &[]),
        (Setting::V, &[0, 1]),
        (Setting::W, &[0]),
    ];
    for (setting, deltas) in dels {
        let gamma = cfg.gamma(setting);
        let ge = stats.get(setting);
        let mut row = vec![0.0; n_vars];
        for (n, slot) in row.iter_mut().take(n_yields).enumerate() {
            *slot = poisson_pmf_raw(gamma, n as u32);
        }
        if !reduced {
            for &i in deltas {
                row[n_yields + i] = 1.0;
            }
        }
        let tail = gamma_tail(gamma, s_cut);
        let target = match objective {
            Objective::OmegaOne => ge.gain * ge.qber,
            _ => ge.gain,
        };
        constraints.push(LpConstraint {
            coeffs: row.iter().map(|a| -a).collect(),
            rhs: -(target - tail),
        });
        constraints.push(LpConstraint {
            coeffs: row,
            rhs: target,
        });
    }
    if !reduced {
        for n in 0..=s_cut {
            let q_vw = q_cond_raw(n, cfg.gamma_v, cfg.gamma_w, cfg.p_v, cfg.p_w)?;
            let q_sw = q_cond_raw(n, cfg.gamma_s, cfg.gamma_w, cfg.p_s, cfg.p_w)?;
            let q_sv = q_cond_raw(n, cfg.gamma_s, cfg.gamma_v, cfg.p_s, cfg.p_v)?;
            let trios = [
                (1.0, q_vw, dist.d_svw[n as usize]),
                (q_sw, 1.0, dist.d_vsw[n as usize]),
                (q_sv, -(1.0 - q_sv), dist.d_wsv[n as usize]),
            ];
            for (c1, c2, d) in trios {
                let mut row = vec![0.0; n_vars];
                row[n_yields] = c1;
                row[n_yields + 1] = c2;
                constraints.push(LpConstraint {
                    coeffs: row.iter().map(|a| -a).collect(),
                    rhs: d,
                });
                constraints.push(LpConstraint { coeffs: row, rhs: d });
            }
        }
    }

    let mut bounds = vec![(0.0, 1.0); n_yields];
    if !reduced {
        bounds.push((-dist.d_ws, dist.d_ws));
        bounds.push((-dist.d_vw, dist.d_vw));
    }
    let mut obj = vec![0.0; n_vars];
    match objective {
        Objective::Y0 => obj[0] = 1.0,
        Objective::Y1 => obj[1] = 1.0,
        Objective::OmegaOne => obj[1] = -1.0,
    }
    Ok(LpProblem {
        objective: obj,
        constraints,
        bounds,
        tolerance: est.lp_tolerance,
    })
}

/// Solve a box-bounded linear program with a dense two-phase simplex.
///
/// Returns the certified optimum (value and a witness assignment), or
/// `Infeasible` / `Unbounded`.  Feasibility is judged at the problem's
/// tolerance, so programs whose constraints are consistent up to rounding
/// noise — which the tail-closed decoy bands can produce — solve cleanly.
///
/// # Errors
/// `Malformed` for inconsistent dimensions or non-finite data,
/// `SolverStall` if the iteration cap is hit (not expected in practice;
/// Bland's rule guarantees termination once engaged).
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution, LpError> {
    let n = problem.objective.len();
    if problem.bounds.len() != n {
        return Err(LpError::Malformed(format!(
            "{} objective coefficients vs {} bounds",
            n,
            problem.bounds.len()
        )));
    }
    if !(problem.tolerance > 0.0 && problem.tolerance <= 1e-6) {
        return Err(LpError::Malformed(format!(
            "tolerance {} outside (0, 1e-6]",
            problem.tolerance
        )));
    }
    for (lo, hi) in &problem.bounds {
        if !lo.is_finite() || hi.is_nan() || lo > hi {
            return Err(LpError::Malformed(format!("bad bound [{lo}, {hi}]")));
        }
    }
    for c in &problem.constraints {
        if c.coeffs.len() != n {
            return Err(LpError::Malformed(format!(
                "constraint has {} coefficients, expected {n}",
                c.coeffs.len()
            )));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
            return Err(LpError::Malformed("non-finite constraint data".into()));
        }
    }
    Ok(match simplex::solve(problem)? {
        simplex::Outcome::Optimal { value, x } => LpSolution::Optimal { value, x },
        simplex::Outcome::Infeasible => LpSolution::Infeasible,
        simplex::Outcome::Unbounded => LpSolution::Unbounded,
    })
}

/// Certified decoy bounds from observed statistics and leakage distances.
///
/// Solves min Y_0 and min Y_1 on the Z-basis statistics and max ω_1 on the
/// X-basis statistics, then forms e1_U = ω1_max / Y1_L(X).  When the X and
/// Z blocks are identical (as in the symmetric channel model) the Y_1
/// program is solved once and reused.  Infeasibility of any program yields
/// the vacuous bounds rather than an error: upstream observed statistics
/// are data, and inconsistent data is a reportable condition, not a bug.
pub fn estimate_bounds(
    stats: &ObservedStats,
    dist: &LeakageDistances,
    cfg: &IntensityConfig,
    est: &EstimatorConfig,
) -> Result<DecoyBounds, LpError> {
    const VACUOUS: DecoyBounds = DecoyBounds {
        y0_l: 0.0,
        y1_l: 0.0,
        e1_u: 1.0,
        infeasible: true,
    };
    let solve_for = |objective: Objective, basis: &BasisStats| -> Result<Option<f64>, LpError> {
        let lp = build_lp(objective, basis, dist, cfg, est)?;
        match solve_lp(&lp)? {
            LpSolution::Optimal { value, .. } => Ok(Some(value)),
            LpSolution::Infeasible => Ok(None),
            LpSolution::Unbounded => Err(LpError::UnexpectedUnbounded),
        }
    };

    let Some(y0) = solve_for(Objective::Y0, &stats.z)? else {
        return Ok(VACUOUS);
    };
    let Some(y1_z) = solve_for(Objective::Y1, &stats.z)? else {
        return Ok(VACUOUS);
    };
    let y1_x = if stats.x == stats.z {
        y1_z
    } else {
        match solve_for(Objective::Y1, &stats.x)? {
            Some(v) => v,
            None => return Ok(VACUOUS),
        }
    };
    let Some(neg_omega1) = solve_for(Objective::OmegaOne, &stats.x)? else {
        return Ok(VACUOUS);
    };

    let e1_u = if y1_x <= 0.0 {
        1.0
    } else {
        (-neg_omega1 / y1_x).clamp(0.0, 1.0)
    };
    Ok(DecoyBounds {
        y0_l: y0.clamp(0.0, 1.0),
        y1_l: y1_z.clamp(0.0, 1.0),
        e1_u,
        infeasible: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_model::{simulate_observations, ChannelParams, GainError};
    use crate::leakage::{distances_for_model, LeakageModel, ThaCase};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn zero_distances(s_cut: u32) -> LeakageDistances {
        let zeros = vec![0.0; s_cut as usize + 1];
        LeakageDistances {
            d_ws: 0.0,
            d_vw: 0.0,
            d_svw: zeros.clone(),
            d_vsw: zeros.clone(),
            d_wsv: zeros,
        }
    }

    #[test]
    fn gamma_tail_matches_reference_values() {
        // True tail at (0.5, 10) is 7.7408407392282496e-12 (50-digit sum);
        // the as-written form is cancellation-limited near 1e-15 absolute,
        // which is the band actually applied to the LP rows.
        assert_abs_diff_eq!(
            gamma_tail(0.5, 10),
            7.7408407392282496e-12,
            epsilon = 5e-15
        );
        assert_eq!(gamma_tail(5e-4, 10), 0.0);
        assert_eq!(gamma_tail(0.0, 3), 0.0);
        assert!(gamma_tail(1.0, 4) > gamma_tail(1.0, 8));
    }

    #[test]
    fn build_lp_has_documented_shape() {
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let model = LeakageModel::new(ThaCase::ModulatedCoherent, 1e-6, 2.1, 4.2, 40).unwrap();
        let dist = distances_for_model(&cfg, &model, est.s_cut).unwrap();
        let stats = simulate_observations(&ChannelParams::reference(50.0), &cfg);
        let lp = build_lp(Objective::Y1, &stats.z, &dist, &cfg, &est).unwrap();
        // 11 yields + 2 deviations; 6 gain rows + 2 * 3 * 11 three-setting rows.
        assert_eq!(lp.objective.len(), 13);
        assert_eq!(lp.constraints.len(), 6 + 66);
        assert_eq!(lp.bounds.len(), 13);
        assert_eq!(&lp.bounds[..11], &[(0.0, 1.0); 11]);
        assert_eq!(lp.bounds[11], (-dist.d_ws, dist.d_ws));
        assert_eq!(lp.bounds[12], (-dist.d_vw, dist.d_vw));
    }

    #[test]
    fn build_lp_collapses_without_leakage() {
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let stats = simulate_observations(&ChannelParams::reference(50.0), &cfg);
        let lp = build_lp(Objective::Y0, &stats.z, &zero_distances(est.s_cut), &cfg, &est).unwrap();
        assert_eq!(lp.objective.len(), 11);
        assert_eq!(lp.constraints.len(), 6);
    }

    #[test]
    fn solve_lp_handles_textbook_instances() {
        // min x over x in [0.25, 1]
        let lp = LpProblem {
            objective: vec![1.0],
            constraints: vec![],
            bounds: vec![(0.25, 1.0)],
            tolerance: 1e-9,
        };
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, x } => {
                assert_abs_diff_eq!(value, 0.25, epsilon = 1e-12);
                assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-12);
            }
            other => panic!("expected optimal, got {other:?}"),
        }

        // min x + y subject to x + y >= 0.3
        let lp = LpProblem {
            objective: vec![1.0, 1.0],
            constraints: vec![LpConstraint {
                coeffs: vec![-1.0, -1.0],
                rhs: -0.3,
            }],
            bounds: vec![(0.0, 1.0), (0.0, 1.0)],
            tolerance: 1e-9,
        };
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, .. } => assert_abs_diff_eq!(value, 0.3, epsilon = 1e-10),
            other => panic!("expected optimal, got {other:?}"),
        }

        // max x (min -x) capped by a row at 0.6
        let lp = LpProblem {
            objective: vec![-1.0],
            constraints: vec![LpConstraint {
                coeffs: vec![1.0],
                rhs: 0.6,
            }],
            bounds: vec![(0.0, 1.0)],
            tolerance: 1e-9,
        };
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, x } => {
                assert_abs_diff_eq!(value, -0.6, epsilon = 1e-12);
                assert_abs_diff_eq!(x[0], 0.6, epsilon = 1e-12);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn solve_lp_detects_infeasible_and_unbounded() {
        let lp = LpProblem {
            objective: vec![1.0],
            constraints: vec![LpConstraint {
                coeffs: vec![1.0],
                rhs: -1.0,
            }],
            bounds: vec![(0.0, 1.0)],
            tolerance: 1e-9,
        };
        assert_eq!(solve_lp(&lp).unwrap(), LpSolution::Infeasible);

        let lp = LpProblem {
            objective: vec![-1.0],
            constraints: vec![],
            bounds: vec![(0.0, f64::INFINITY)],
            tolerance: 1e-9,
        };
        assert_eq!(solve_lp(&lp).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn solve_lp_rejects_malformed_programs() {
        let lp = LpProblem {
            objective: vec![1.0, 0.0],
            constraints: vec![],
            bounds: vec![(0.0, 1.0)],
            tolerance: 1e-9,
        };
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));

        let lp = LpProblem {
            objective: vec![1.0],
            constraints: vec![],
            bounds: vec![(1.0, 0.0)],
            tolerance: 1e-9,
        };
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
    }

    fn bounds_for(
        case: ThaCase,
        gamma_s: f64,
        gamma_v: f64,
        i_max: f64,
        theta_v: f64,
        theta_w: f64,
        distance_km: f64,
    ) -> DecoyBounds {
        let cfg = IntensityConfig::with_default_probabilities(gamma_s, gamma_v, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let model = LeakageModel::new(case, i_max, theta_v, theta_w, 40).unwrap();
        let dist = distances_for_model(&cfg, &model, est.s_cut).unwrap();
        let stats = simulate_observations(&ChannelParams::reference(distance_km), &cfg);
        estimate_bounds(&stats, &dist, &cfg, &est).unwrap()
    }

    #[test]
    fn estimate_bounds_matches_reference_fixed_coherent() {
        let b = bounds_for(ThaCase::FixedCoherent, 0.5, 0.1, 1e-6, 1.0, 4.0, 20.0);
        assert!(!b.infeasible);
        assert_abs_diff_eq!(b.y0_l, 0.0, epsilon = 1e-9);
        assert_relative_eq!(b.y1_l, 0.022803983065601635, max_relative = 1e-7);
        assert_relative_eq!(b.e1_u, 0.036250584505869585, max_relative = 1e-7);
    }

    #[test]
    fn estimate_bounds_matches_reference_modulated_coherent() {
        let b = bounds_for(ThaCase::ModulatedCoherent, 0.5, 0.1, 1e-6, 2.1, 4.2, 50.0);
        assert!(!b.infeasible);
        assert_abs_diff_eq!(b.y0_l, 0.0, epsilon = 1e-9);
        assert_relative_eq!(b.y1_l, 0.005656026108117564, max_relative = 1e-7);
        assert_relative_eq!(b.e1_u, 0.03922946852999224, max_relative = 1e-7);
    }

    #[test]
    fn estimate_bounds_matches_reference_phase_randomized() {
        let b = bounds_for(ThaCase::PhaseRandomized, 0.7, 0.56, 1e-2, 0.0, 0.0, 60.0);
        assert!(!b.infeasible);
        assert_abs_diff_eq!(b.y0_l, 0.0, epsilon = 1e-9);
        assert_relative_eq!(b.y1_l, 0.00456905536535767, max_relative = 1e-7);
        assert_relative_eq!(b.e1_u, 0.037804379579875313, max_relative = 1e-7);
    }

    // Reference values certified in exact rational arithmetic: the optimal
    // active set of each program was re-solved over the f64 row data in
    // `Fraction`s and its optimality confirmed with a nonnegative dual
    // certificate.  (An off-the-shelf solver at default tolerances differs
    // in the 7th digit of e1_u — its vertex buys the gap with a 1.8e-11
    // row violation.)
    #[test]
    fn estimate_bounds_matches_reference_without_leakage() {
        let b = bounds_for(ThaCase::FixedCoherent, 0.5, 0.1, 0.0, 0.0, 0.0, 50.0);
        assert!(!b.infeasible);
        assert_relative_eq!(b.y0_l, 9.38892211596832e-06, max_relative = 1e-9);
        assert_relative_eq!(b.y1_l, 0.012128829264284467, max_relative = 1e-9);
        assert_relative_eq!(b.e1_u, 0.011814878191091753, max_relative = 1e-9);
    }

    #[test]
    fn no_leakage_bounds_sandwich_true_values_tightly() {
        // With a weak decoy near vacuum the D=0 program pins all three
        // certified quantities within 1e-4 of the true channel values.
        let params = ChannelParams::reference(50.0);
        let b = bounds_for(ThaCase::FixedCoherent, 0.3, 0.005, 0.0, 0.0, 0.0, 50.0);
        assert!(!b.infeasible);
        assert_relative_eq!(b.y0_l, 9.9692983636385532e-06, max_relative = 1e-6);
        assert_relative_eq!(b.y1_l, 0.012498560232042351, max_relative = 1e-7);
        assert_relative_eq!(b.e1_u, 0.010454534561498566, max_relative = 1e-7);
        let y0_true = crate::channel_model::n_photon_yield(&params, 0);
        let y1_true = crate::channel_model::n_photon_yield(&params, 1);
        let e1_true = crate::channel_model::n_photon_error_rate(&params, 1);
        assert!(b.y0_l <= y0_true && y0_true - b.y0_l <= 1e-4);
        assert!(b.y1_l <= y1_true && y1_true - b.y1_l <= 1e-4);
        assert!(b.e1_u >= e1_true && b.e1_u - e1_true <= 1e-4);
    }

    #[test]
    fn lossless_channel_pins_single_photon_yield() {
        // Unit transmittance, no dark counts: every multi-photon pulse
        // clicks, so the gain bands force Y_1 to (numerically) one.  The
        // bands here are consistent only up to rounding noise — the tails
        // clamp to zero — so this doubles as a regression test that
        // feasibility is judged at the solver tolerance rather than exactly.
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let params = ChannelParams::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.01).unwrap();
        let stats = simulate_observations(&params, &cfg);
        let b = estimate_bounds(&stats, &zero_distances(est.s_cut), &cfg, &est).unwrap();
        assert!(!b.infeasible);
        assert!(b.y1_l >= 1.0 - 1e-6, "y1_l = {}", b.y1_l);
        assert!(b.y0_l <= 1e-6, "y0_l = {}", b.y0_l);
    }

    #[test]
    fn contradictory_statistics_flag_infeasible() {
        // A near-vacuum setting cannot click half the time while the signal
        // setting stays almost dark.
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let z = BasisStats {
            s: GainError {
                gain: 0.01,
                qber: 0.01,
            },
            v: GainError {
                gain: 0.2,
                qber: 0.01,
            },
            w: GainError {
                gain: 0.5,
                qber: 0.01,
            },
        };
        let stats = ObservedStats { z, x: z };
        let b = estimate_bounds(&stats, &zero_distances(est.s_cut), &cfg, &est).unwrap();
        assert!(b.infeasible);
        assert_eq!((b.y0_l, b.y1_l, b.e1_u), (0.0, 0.0, 1.0));
    }

    #[test]
    fn widening_distances_never_tightens_bounds() {
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let est = EstimatorConfig::default();
        let stats = simulate_observations(&ChannelParams::reference(40.0), &cfg);
        let model = LeakageModel::new(ThaCase::ModulatedCoherent, 1e-6, 2.1, 4.2, 40).unwrap();
        let narrow = distances_for_model(&cfg, &model, est.s_cut).unwrap();
        let mut wide = narrow.clone();
        wide.d_ws = (wide.d_ws * 3.0).min(1.0);
        wide.d_vw = (wide.d_vw * 3.0).min(1.0);
        for v in wide
            .d_svw
            .iter_mut()
            .chain(wide.d_vsw.iter_mut())
            .chain(wide.d_wsv.iter_mut())
        {
            *v = (*v * 3.0).min(1.0);
        }
        let tight = estimate_bounds(&stats, &narrow, &cfg, &est).unwrap();
        let loose = estimate_bounds(&stats, &wide, &cfg, &est).unwrap();
        assert!(loose.y0_l <= tight.y0_l + 1e-12);
        assert!(loose.y1_l <= tight.y1_l + 1e-12);
        assert!(loose.e1_u >= tight.e1_u - 1e-12);
    }

    #[test]
    fn estimator_config_rejects_bad_inputs() {
        assert!(EstimatorConfig::new(1, 1e-9).is_err());
        assert!(EstimatorConfig::new(10, 0.0).is_err());
        assert!(EstimatorConfig::new(10, 1e-3).is_err());
        assert!(EstimatorConfig::new(2, 1e-6).is_ok());
    }
}
