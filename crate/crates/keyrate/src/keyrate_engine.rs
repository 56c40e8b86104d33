//! Key-rate assembly and the nested max–min search.
//!
//! The asymptotic secret-key rate distilled from the signal setting is
//!
//! ```text
//! R = q · { p_0 Y0_L + p_1 Y1_L [1 − h(e_ph)] − f_ec · Q^s · h(E^s) }
//! ```
//!
//! with p_n the signal Poisson weights and h the binary entropy.  Without
//! phase-modulator leakage the phase-error rate e_ph is the decoy bound
//! e1_U directly; with it, the basis choice leaks through a second probe
//! and e_ph comes from a quantum-coin argument ([`phase_error_upper`])
//! seeded with the fidelity of the basis-tagged leak states.
//!
//! [`optimize_key_rate`] wraps the rate in the adversarial search: Alice
//! maximizes over (γ_s, γ_v) on a deterministic grid with one local
//! refinement pass, and for every Alice point Eve minimizes over the probe
//! phases (θ_v, θ_w).  A no-leakage evaluation upper-bounds every leaky
//! one (extra deviation freedom can only loosen the LP, and the coin
//! correction only raises e_ph), so candidates are scanned in decreasing
//! order of that bound and the scan stops as soon as the bound falls to
//! the incumbent — an exact pruning, not a heuristic.

use crate::channel_model::{
    simulate_observations, ChannelError, ChannelParams, ObservedStats,
};
use crate::decoy_lp::{estimate_bounds, DecoyBounds, EstimatorConfig, LpError};
use crate::leakage::{
    d2_coherent, distances_for_model, IntensityConfig, LeakageError, LeakageModel, ThaCase,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("entropy argument {0} outside [0, 1]")]
    EntropyDomain(f64),
    #[error("missing Z-basis bounds for bit value {0}")]
    MissingZBasisBounds(u8),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Leakage(#[from] LeakageError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Protocol-level efficiencies.  `q_eff` is the sifting/protocol
/// efficiency multiplying the whole rate; `f_ec` the error-correction
/// inefficiency (≥ 1) multiplying the leaked syndrome information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub q_eff: f64,
    pub f_ec: f64,
}

impl ProtocolParams {
    pub fn new(q_eff: f64, f_ec: f64) -> Result<Self, EngineError> {
        if !(q_eff > 0.0 && q_eff <= 1.0) {
            return Err(EngineError::InvalidParameter(format!(
                "q_eff must lie in (0, 1], got {q_eff}"
            )));
        }
        if !(f_ec.is_finite() && f_ec >= 1.0) {
            return Err(EngineError::InvalidParameter(format!(
                "f_ec must be at least 1, got {f_ec}"
            )));
        }
        Ok(Self { q_eff, f_ec })
    }
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            q_eff: 1.0,
            f_ec: 1.2,
        }
    }
}

/// Phase-modulator leakage switch.  When enabled, the eavesdropper also
/// probes the phase modulator and receives `i_max_pm` photons per pulse of
/// basis-tagged back-reflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmLeakage {
    pub enabled: bool,
    pub i_max_pm: f64,
}

impl PmLeakage {
    pub fn off() -> Self {
        Self {
            enabled: false,
            i_max_pm: 0.0,
        }
    }

    pub fn on(i_max_pm: f64) -> Result<Self, EngineError> {
        if !(i_max_pm.is_finite() && i_max_pm >= 0.0) {
            return Err(EngineError::InvalidParameter(format!(
                "i_max_pm must be finite and nonnegative, got {i_max_pm}"
            )));
        }
        Ok(Self {
            enabled: true,
            i_max_pm,
        })
    }
}

/// Inputs to the quantum-coin phase-error bound.
///
/// Invariants (checked by [`PhaseErrorInputs::new`]): `fidelity`,
/// `dx_given_x` ∈ [0,1]; `frac_x + frac_z = 1` with both in [0,1];
/// `n_over_click ≥ 1` (total emissions per detected event).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseErrorInputs {
    pub fidelity: f64,
    pub dx_given_x: f64,
    pub frac_x: f64,
    pub frac_z: f64,
    pub n_over_click: f64,
}

impl PhaseErrorInputs {
    pub fn new(
        fidelity: f64,
        dx_given_x: f64,
        frac_x: f64,
        frac_z: f64,
        n_over_click: f64,
    ) -> Result<Self, EngineError> {
        for (name, v) in [("fidelity", fidelity), ("dx_given_x", dx_given_x)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        for (name, v) in [("frac_x", frac_x), ("frac_z", frac_z)] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if (frac_x + frac_z - 1.0).abs() > 1e-12 {
            return Err(EngineError::InvalidParameter(format!(
                "basis fractions must sum to 1, got {frac_x} + {frac_z}"
            )));
        }
        if !(n_over_click.is_finite() && n_over_click >= 1.0) {
            return Err(EngineError::InvalidParameter(format!(
                "n_over_click must be at least 1, got {n_over_click}"
            )));
        }
        Ok(Self {
            fidelity,
            dx_given_x,
            frac_x,
            frac_z,
            n_over_click,
        })
    }
}

/// Measurement basis label for correlated-leakage bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Z,
}

/// Per-(bit, basis) emission weights and certified yields for the
/// correlated-leakage rate of [`key_rate_correlated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BitBasisBounds {
    pub p_0: f64,
    pub p_1: f64,
    pub y0_l: f64,
    pub y1_l: f64,
}

/// Binary Shannon entropy in bits, with 0·log 0 := 0.
///
/// # Errors
/// [`EngineError::EntropyDomain`] when `x` is outside [0, 1].
pub fn binary_entropy(x: f64) -> Result<f64, EngineError> {
    if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
        return Err(EngineError::EntropyDomain(x));
    }
    Ok(binary_entropy_raw(x))
}

pub(crate) fn binary_entropy_raw(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Fidelity between the two basis-conditioned phase-modulator leak
/// mixtures, ρ_Z = ½[P(|β⟩)+P(|−β⟩)] and ρ_X = ½[P(|iβ⟩)+P(|−iβ⟩)] with
/// β² = `i_max_pm`: F = e^{−I}(cos I + sin I), obtained by diagonalizing
/// both mixtures in the 4-state span (they commute, sharing the
/// cat-state eigenbasis).  Exactly 1 at zero leakage.
///
/// Precondition (asserted): `i_max_pm` finite and ≥ 0.
pub fn pm_fidelity(i_max_pm: f64) -> f64 {
    assert!(
        i_max_pm.is_finite() && i_max_pm >= 0.0,
        "i_max_pm must be finite and nonnegative"
    );
    if i_max_pm == 0.0 {
        return 1.0;
    }
    (-i_max_pm).exp() * (i_max_pm.cos() + i_max_pm.sin())
}

/// Largest Z-basis phase-error rate δ_Z ∈ [0, 1] consistent with the
/// quantum-coin constraint
///
/// ```text
/// 1 − n_over_click·(1 − F) ≤ 2√(f_x·δ_X·f_z·δ_Z) + 2√(f_x(1−δ_X)·f_z(1−δ_Z))
/// ```
///
/// The right side is concave in δ_Z with its peak at δ_Z = δ_X (balanced
/// case), so the feasible set is an interval and its upper edge is found
/// by bisection (80 halvings, far below rate-scale resolution).  Returns
/// 1 whenever the constraint excludes nothing — a saturating, always-safe
/// upper bound.
pub fn phase_error_upper(inp: &PhaseErrorInputs) -> f64 {
    let lhs = 1.0 - inp.n_over_click * (1.0 - inp.fidelity);
    if lhs <= 0.0 {
        return 1.0;
    }
    let a = inp.frac_x * inp.dx_given_x * inp.frac_z;
    let b = inp.frac_x * (1.0 - inp.dx_given_x) * inp.frac_z;
    let rhs = |dz: f64| 2.0 * (a * dz).sqrt() + 2.0 * (b * (1.0 - dz)).sqrt();
    if rhs(1.0) >= lhs {
        return 1.0;
    }
    let mut lo = if a + b > 0.0 { a / (a + b) } else { 0.0 };
    if rhs(lo) < lhs {
        return 1.0;
    }
    let mut hi = 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if rhs(mid) >= lhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Azuma tail bound for `n` bounded-difference trials: 2·e^{−n·δ²/2}.
///
/// Preconditions (asserted): `n ≥ 1`, `δ ∈ (0, 1)`.
pub fn azuma_deviation_bound(n: f64, delta: f64) -> f64 {
    assert!(n.is_finite() && n >= 1.0, "n must be at least 1");
    assert!(
        delta > 0.0 && delta < 1.0,
        "delta must lie strictly inside (0, 1)"
    );
    2.0 * (-(n * (delta * delta)) / 2.0).exp()
}

/// Raw (possibly negative) asymptotic key rate from certified bounds.
///
/// `phase_err` is the caller's single-photon phase-error bound: e1_U when
/// only the intensity modulator leaks, or the coin-corrected value when
/// the phase modulator leaks too.  The entropy argument is capped at 1/2 —
/// beyond that the single-photon term is already worthless, and the cap
/// keeps a vacuous phase-error bound from re-inflating the rate.
///
/// # Errors
/// `InvalidParameter` when `phase_err` is outside [0, 1].
pub fn key_rate_point_raw(
    bounds: &DecoyBounds,
    stats: &ObservedStats,
    cfg: &IntensityConfig,
    proto: &ProtocolParams,
    phase_err: f64,
) -> Result<f64, EngineError> {
    if !(phase_err.is_finite() && (0.0..=1.0).contains(&phase_err)) {
        return Err(EngineError::InvalidParameter(format!(
            "phase_err must lie in [0, 1], got {phase_err}"
        )));
    }
    let p0 = (-cfg.gamma_s).exp();
    let p1 = cfg.gamma_s * (-cfg.gamma_s).exp();
    let signal = stats.z.s;
    Ok(proto.q_eff
        * (p0 * bounds.y0_l + p1 * bounds.y1_l * (1.0 - binary_entropy_raw(phase_err.min(0.5)))
            - proto.f_ec * signal.gain * binary_entropy_raw(signal.qber)))
}

/// Asymptotic key rate floored at zero for reporting.
///
/// # Errors
/// As [`key_rate_point_raw`].
pub fn key_rate_point(
    bounds: &DecoyBounds,
    stats: &ObservedStats,
    cfg: &IntensityConfig,
    proto: &ProtocolParams,
    phase_err: f64,
) -> Result<f64, EngineError> {
    Ok(key_rate_point_raw(bounds, stats, cfg, proto, phase_err)?.max(0.0))
}

/// Key rate when the leak is correlated with the encoded bit: the signal
/// emission splits into per-(bit, basis) subprocesses, each with its own
/// Poisson weights and certified yields, and the single-photon terms are
/// summed over the two Z-basis bit values:
///
/// ```text
/// R = Σ_{i∈{0,1}} q·{ p_0^{i,Z} Y0_L^{i,Z} + p_1^{i,Z} Y1_L^{i,Z}[1 − h(e_ph,Z)] }
///     − q·f_ec·Q^s·h(E^s)
/// ```
///
/// floored at zero.  Only the (0, Z) and (1, Z) entries are consumed;
/// entries for other (bit, basis) pairs may be present and are ignored.
///
/// # Errors
/// `MissingZBasisBounds` when either Z-basis bit entry is absent;
/// `InvalidParameter` for out-of-range probabilities or bounds.
pub fn key_rate_correlated(
    per_setting: &[((u8, Basis), BitBasisBounds)],
    phase_err_z: f64,
    stats: &ObservedStats,
    proto: &ProtocolParams,
) -> Result<f64, EngineError> {
    if !(phase_err_z.is_finite() && (0.0..=1.0).contains(&phase_err_z)) {
        return Err(EngineError::InvalidParameter(format!(
            "phase_err_z must lie in [0, 1], got {phase_err_z}"
        )));
    }
    let z_entry = |bit: u8| -> Result<BitBasisBounds, EngineError> {
        per_setting
            .iter()
            .find(|((b, basis), _)| *b == bit && *basis == Basis::Z)
            .map(|(_, v)| *v)
            .ok_or(EngineError::MissingZBasisBounds(bit))
    };
    let branches = [z_entry(0)?, z_entry(1)?];
    for bb in &branches {
        for (name, v) in [
            ("p_0", bb.p_0),
            ("p_1", bb.p_1),
            ("y0_l", bb.y0_l),
            ("y1_l", bb.y1_l),
        ] {
            if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
    }
    let pa_factor = 1.0 - binary_entropy_raw(phase_err_z.min(0.5));
    let signal = stats.z.s;
    let mut rate = 0.0;
    for bb in &branches {
        rate += proto.q_eff * (bb.p_0 * bb.y0_l + bb.p_1 * bb.y1_l * pa_factor);
    }
    rate -= proto.q_eff * proto.f_ec * signal.gain * binary_entropy_raw(signal.qber);
    Ok(rate.max(0.0))
}

/// Deterministic search grids for [`optimize_key_rate`].
///
/// Alice's signal intensity runs over `n_gamma_s` log-spaced points in
/// [`gamma_s_min`, `gamma_s_max`], the decoy over `n_gamma_v` linear
/// points in [`gamma_w`, γ_s]; Eve's phases over an `n_theta` × `n_theta`
/// triangle grid on [0, 2π].  One local refinement pass with
/// `2·refine_factor + 1` points per axis at coarse-cell resolution runs
/// around each incumbent (`refine_factor = 0` disables refinement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerGrid {
    pub gamma_s_min: f64,
    pub gamma_s_max: f64,
    pub n_gamma_s: u32,
    pub n_gamma_v: u32,
    pub n_theta: u32,
    pub refine_factor: u32,
    pub gamma_w: f64,
    pub p_s: f64,
    pub p_v: f64,
    pub p_w: f64,
    pub p_cut: u32,
}

impl Default for OptimizerGrid {
    fn default() -> Self {
        Self {
            gamma_s_min: 0.05,
            gamma_s_max: 1.0,
            n_gamma_s: 24,
            n_gamma_v: 16,
            n_theta: 24,
            refine_factor: 8,
            gamma_w: 5e-4,
            p_s: 0.8,
            p_v: 0.1,
            p_w: 0.1,
            p_cut: 40,
        }
    }
}

impl OptimizerGrid {
    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.gamma_s_min > 0.0
            && self.gamma_s_min.is_finite()
            && self.gamma_s_max.is_finite()
            && self.gamma_s_min <= self.gamma_s_max)
        {
            return Err(EngineError::InvalidParameter(format!(
                "gamma_s range [{}, {}] must be positive and ordered",
                self.gamma_s_min, self.gamma_s_max
            )));
        }
        if !(self.gamma_w.is_finite() && self.gamma_w >= 0.0 && self.gamma_w <= self.gamma_s_min)
        {
            return Err(EngineError::InvalidParameter(format!(
                "gamma_w must lie in [0, gamma_s_min], got {}",
                self.gamma_w
            )));
        }
        if self.n_gamma_s < 2 || self.n_gamma_v < 2 || self.n_theta < 2 {
            return Err(EngineError::InvalidParameter(
                "grid point counts must be at least 2".into(),
            ));
        }
        if self.p_cut < 1 {
            return Err(EngineError::InvalidParameter(
                "p_cut must be at least 1".into(),
            ));
        }
        for (name, p) in [("p_s", self.p_s), ("p_v", self.p_v), ("p_w", self.p_w)] {
            if !(p > 0.0 && p < 1.0) {
                return Err(EngineError::InvalidParameter(format!(
                    "{name} must lie in (0, 1), got {p}"
                )));
            }
        }
        if (self.p_s + self.p_v + self.p_w - 1.0).abs() > 1e-12 {
            return Err(EngineError::InvalidParameter(
                "setting probabilities must sum to 1".into(),
            ));
        }
        Ok(())
    }
}

/// `n` evenly spaced points from `a` to `b` inclusive, endpoints exact.
pub(crate) fn linspace(a: f64, b: f64, n: u32) -> Vec<f64> {
    assert!(n >= 2);
    let div = (n - 1) as f64;
    let delta = b - a;
    let mut out: Vec<f64> = (0..n).map(|i| a + (i as f64) * delta / div).collect();
    out[0] = a;
    *out.last_mut().expect("n >= 2") = b;
    out
}

/// `n` log-spaced points from `a` to `b` inclusive, endpoints exact.
pub(crate) fn geomspace(a: f64, b: f64, n: u32) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0 && n >= 2);
    let mut out: Vec<f64> = linspace(a.log10(), b.log10(), n)
        .into_iter()
        .map(|x| 10f64.powf(x))
        .collect();
    out[0] = a;
    *out.last_mut().expect("n >= 2") = b;
    out
}

/// One full pipeline evaluation at a fixed transmitter/eavesdropper
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RatePoint {
    pub raw: f64,
    pub bounds: DecoyBounds,
    pub phase_err: f64,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn rate_for_point(
    case: ThaCase,
    i_max: f64,
    gamma_s: f64,
    gamma_v: f64,
    theta_v: f64,
    theta_w: f64,
    chan: &ChannelParams,
    est: &EstimatorConfig,
    proto: &ProtocolParams,
    pm: &PmLeakage,
    grid: &OptimizerGrid,
) -> Result<RatePoint, EngineError> {
    let cfg = IntensityConfig::new(
        gamma_s,
        gamma_v,
        grid.gamma_w,
        grid.p_s,
        grid.p_v,
        grid.p_w,
    )?;
    let model = LeakageModel::new(case, i_max, theta_v, theta_w, grid.p_cut)?;
    let dist = distances_for_model(&cfg, &model, est.s_cut)?;
    let stats = simulate_observations(chan, &cfg);
    let bounds = estimate_bounds(&stats, &dist, &cfg, est)?;

    let phase_err = if pm.enabled && pm.i_max_pm > 0.0 {
        if bounds.y1_l > 0.0 {
            let p1 = cfg.gamma_s * (-cfg.gamma_s).exp();
            let inp = PhaseErrorInputs {
                fidelity: (-pm.i_max_pm).exp(),
                dx_given_x: bounds.e1_u,
                frac_x: 0.5,
                frac_z: 0.5,
                n_over_click: 1.0 / (p1 * bounds.y1_l),
            };
            phase_error_upper(&inp)
        } else {
            1.0
        }
    } else {
        bounds.e1_u
    };
    let raw = key_rate_point_raw(&bounds, &stats, &cfg, proto, phase_err)?;
    Ok(RatePoint {
        raw,
        bounds,
        phase_err,
    })
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EveOutcome {
    pub raw: f64,
    pub theta_v: f64,
    pub theta_w: f64,
    pub bounds: DecoyBounds,
    pub phase_err: f64,
}

/// Scan Eve's phase grid for the worst (minimum) rate at a fixed Alice
/// point.  Candidates are visited in decreasing order of a pairwise
/// trace-distance proxy so damaging phases are found early, and the scan
/// stops once the running minimum reaches `abort_below` — by then the
/// caller's decision about this Alice point can no longer change.
#[allow(clippy::too_many_arguments)]
pub(crate) fn eve_scan(
    case: ThaCase,
    i_max: f64,
    gamma_s: f64,
    gamma_v: f64,
    chan: &ChannelParams,
    est: &EstimatorConfig,
    proto: &ProtocolParams,
    pm: &PmLeakage,
    grid: &OptimizerGrid,
    refine: bool,
    abort_below: f64,
) -> Result<EveOutcome, EngineError> {
    let eval = |theta_v: f64, theta_w: f64| -> Result<EveOutcome, EngineError> {
        let pt = rate_for_point(
            case, i_max, gamma_s, gamma_v, theta_v, theta_w, chan, est, proto, pm, grid,
        )?;
        Ok(EveOutcome {
            raw: pt.raw,
            theta_v,
            theta_w,
            bounds: pt.bounds,
            phase_err: pt.phase_err,
        })
    };

    if i_max == 0.0 || case == ThaCase::PhaseRandomized {
        return eval(0.0, 0.0);
    }

    let two_pi = 2.0 * std::f64::consts::PI;
    let proxy_for = |theta_v: f64, theta_w: f64| -> Result<f64, EngineError> {
        let (b2s, b2v, b2w) = match case {
            ThaCase::FixedCoherent => (i_max, i_max, i_max),
            _ => (
                i_max,
                gamma_v / gamma_s * i_max,
                grid.gamma_w / gamma_s * i_max,
            ),
        };
        Ok(d2_coherent(b2w, theta_w, b2s, 0.0)? + d2_coherent(b2v, theta_v, b2w, theta_w)?)
    };

    let mut cands: Vec<(f64, f64, f64)> = Vec::new();
    for &theta_v in &linspace(0.0, two_pi, grid.n_theta) {
        for &theta_w in &linspace(theta_v, two_pi, grid.n_theta) {
            cands.push((proxy_for(theta_v, theta_w)?, theta_v, theta_w));
        }
    }
    cands.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite proxies"));

    let mut best: Option<EveOutcome> = None;
    for &(_, theta_v, theta_w) in &cands {
        let out = eval(theta_v, theta_w)?;
        if best.map_or(true, |b| out.raw < b.raw) {
            best = Some(out);
        }
        if best.expect("just set").raw <= abort_below {
            return Ok(best.expect("just set"));
        }
    }
    let mut best = best.expect("theta grid is nonempty");

    if refine && grid.refine_factor > 0 {
        let n_pts = 2 * grid.refine_factor + 1;
        let step = (grid.n_theta - 1) as f64;
        let h_v = two_pi / step;
        let h_w = (two_pi - best.theta_v) / step;
        let (arg_v, arg_w) = (best.theta_v, best.theta_w);
        for &theta_v in &linspace(
            (arg_v - h_v).max(0.0),
            (arg_v + h_v).min(two_pi),
            n_pts,
        ) {
            let lo_w = theta_v.max(arg_w - h_w);
            let hi_w = two_pi.min(arg_w + h_w);
            if hi_w < lo_w {
                continue;
            }
            for &theta_w in &linspace(lo_w, hi_w, n_pts) {
                let out = eval(theta_v, theta_w)?;
                if out.raw < best.raw {
                    best = out;
                }
                if best.raw <= abort_below {
                    return Ok(best);
                }
            }
        }
    }
    Ok(best)
}

/// Worst-case (Eve-minimized) raw rate at a fixed Alice point: the full
/// phase scan with local refinement and no early exit.  Cases without
/// phase freedom (zero leakage, phase-randomized probes) evaluate a
/// single point.
#[allow(clippy::too_many_arguments)]
pub fn eve_worst_case(
    case: ThaCase,
    i_max: f64,
    gamma_s: f64,
    gamma_v: f64,
    chan: &ChannelParams,
    est: &EstimatorConfig,
    proto: &ProtocolParams,
    pm: &PmLeakage,
    grid: &OptimizerGrid,
) -> Result<f64, EngineError> {
    grid.validate()?;
    Ok(eve_scan(
        case,
        i_max,
        gamma_s,
        gamma_v,
        chan,
        est,
        proto,
        pm,
        grid,
        true,
        f64::NEG_INFINITY,
    )?
    .raw)
}

/// Disposition of an optimized point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    /// Positive certified rate at the reported point.
    Ok,
    /// The search ran but no Alice point survived Eve's minimization with
    /// a positive rate; the reported point is the most promising
    /// candidate's stopping configuration.
    ZeroRate,
    /// The decoy program at the reported point was infeasible.
    LpInfeasible,
    /// Even without leakage no grid point had a positive rate; the
    /// reported diagnostics come from the best no-leakage bound.
    GridAllZero,
}

/// Result of the max–min search at one (distance, case, i_max) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPoint {
    pub rate: f64,
    pub raw_rate: f64,
    pub gamma_s: f64,
    pub gamma_v: f64,
    pub theta_v: f64,
    pub theta_w: f64,
    pub bounds: DecoyBounds,
    pub phase_err: f64,
    pub status: PointStatus,
}

/// Max–min optimized key rate: Alice's (γ_s, γ_v) grid with one local
/// refinement pass, Eve's phase minimization inside.  Every candidate is
/// first scored with its no-leakage rate — a certified upper bound on the
/// leaky rate — and candidates are examined in decreasing bound order
/// with an exact cutoff at the incumbent, so pruning never changes the
/// result.  The returned point re-evaluates to `raw_rate` exactly through
/// [`eve_worst_case`]'s pipeline.
#[allow(clippy::too_many_arguments)]
pub fn optimize_key_rate(
    distance_km: f64,
    case: ThaCase,
    i_max: f64,
    chan_template: &ChannelParams,
    est: &EstimatorConfig,
    proto: &ProtocolParams,
    pm: &PmLeakage,
    grid: &OptimizerGrid,
) -> Result<OptimalPoint, EngineError> {
    grid.validate()?;
    if !(distance_km.is_finite() && distance_km >= 0.0) {
        return Err(EngineError::InvalidParameter(format!(
            "distance_km must be finite and nonnegative, got {distance_km}"
        )));
    }
    let chan = chan_template.with_distance(distance_km);
    let no_leak = PmLeakage::off();

    let bound_at = |gs: f64, gv: f64| -> Result<RatePoint, EngineError> {
        rate_for_point(
            case, 0.0, gs, gv, 0.0, 0.0, &chan, est, proto, &no_leak, grid,
        )
    };

    struct Incumbent {
        raw: f64,
        gamma_s: f64,
        gamma_v: f64,
        eve: EveOutcome,
    }

    // Scan candidates in decreasing no-leakage-bound order; first_probe
    // keeps the top candidate's Eve outcome for diagnostics when nothing
    // ends up positive.
    let scan = |points: &[(f64, f64)],
                    mut best: f64,
                    mut incumbent: Option<Incumbent>,
                    first_probe: &mut Option<(f64, f64, EveOutcome)>|
     -> Result<(f64, Option<Incumbent>), EngineError> {
        let mut cands: Vec<(f64, f64, f64)> = Vec::with_capacity(points.len());
        for &(gs, gv) in points {
            cands.push((bound_at(gs, gv)?.raw, gs, gv));
        }
        cands.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite bounds"));
        for &(bound, gs, gv) in &cands {
            if bound <= best {
                break;
            }
            let eve = eve_scan(
                case,
                i_max,
                gs,
                gv,
                &chan,
                est,
                proto,
                pm,
                grid,
                true,
                best.max(0.0),
            )?;
            if first_probe.is_none() {
                *first_probe = Some((gs, gv, eve));
            }
            if eve.raw > best {
                best = eve.raw;
                incumbent = Some(Incumbent {
                    raw: eve.raw,
                    gamma_s: gs,
                    gamma_v: gv,
                    eve,
                });
            }
        }
        Ok((best, incumbent))
    };

    let gs_grid = geomspace(grid.gamma_s_min, grid.gamma_s_max, grid.n_gamma_s);
    let mut coarse: Vec<(f64, f64)> = Vec::new();
    for &gs in &gs_grid {
        for &gv in &linspace(grid.gamma_w, gs, grid.n_gamma_v) {
            coarse.push((gs, gv));
        }
    }

    let mut first_probe: Option<(f64, f64, EveOutcome)> = None;
    let (mut best, mut incumbent) = scan(&coarse, 0.0, None, &mut first_probe)?;

    if incumbent.is_none() {
        // No positive rate anywhere.  Report the strongest candidate's
        // diagnostics: its Eve stopping point if any bound was positive,
        // otherwise the best no-leakage bound itself.
        if let Some((gs, gv, eve)) = first_probe {
            let status = if eve.bounds.infeasible {
                PointStatus::LpInfeasible
            } else {
                PointStatus::ZeroRate
            };
            return Ok(OptimalPoint {
                rate: 0.0,
                raw_rate: eve.raw,
                gamma_s: gs,
                gamma_v: gv,
                theta_v: eve.theta_v,
                theta_w: eve.theta_w,
                bounds: eve.bounds,
                phase_err: eve.phase_err,
                status,
            });
        }
        let (mut top_bound, mut top_gs, mut top_gv) = (f64::NEG_INFINITY, 0.0, 0.0);
        for &(gs, gv) in &coarse {
            let b = bound_at(gs, gv)?;
            if b.raw > top_bound {
                (top_bound, top_gs, top_gv) = (b.raw, gs, gv);
            }
        }
        let diag = bound_at(top_gs, top_gv)?;
        return Ok(OptimalPoint {
            rate: 0.0,
            raw_rate: diag.raw,
            gamma_s: top_gs,
            gamma_v: top_gv,
            theta_v: 0.0,
            theta_w: 0.0,
            bounds: diag.bounds,
            phase_err: diag.phase_err,
            status: PointStatus::GridAllZero,
        });
    }

    if grid.refine_factor > 0 {
        let inc = incumbent.as_ref().expect("incumbent exists");
        let (gs0, gv0) = (inc.gamma_s, inc.gamma_v);
        let r_gs = (grid.gamma_s_max / grid.gamma_s_min)
            .powf(1.0 / (grid.n_gamma_s - 1) as f64);
        let h_v = (gs0 - grid.gamma_w) / (grid.n_gamma_v - 1) as f64;
        let n_pts = 2 * grid.refine_factor + 1;
        let mut refined: Vec<(f64, f64)> = Vec::new();
        for &gs in &geomspace(
            (gs0 / r_gs).max(grid.gamma_s_min),
            (gs0 * r_gs).min(grid.gamma_s_max),
            n_pts,
        ) {
            for &gv in &linspace(
                (gv0 - h_v).max(grid.gamma_w),
                (gv0 + h_v).min(gs),
                n_pts,
            ) {
                if gv > gs {
                    continue;
                }
                refined.push((gs, gv));
            }
        }
        let mut unused = None;
        (best, incumbent) = scan(&refined, best, incumbent, &mut unused)?;
    }

    let inc = incumbent.expect("incumbent survives refinement");
    let status = if inc.eve.bounds.infeasible {
        PointStatus::LpInfeasible
    } else {
        PointStatus::Ok
    };
    Ok(OptimalPoint {
        rate: best.max(0.0),
        raw_rate: inc.raw,
        gamma_s: inc.gamma_s,
        gamma_v: inc.gamma_v,
        theta_v: inc.eve.theta_v,
        theta_w: inc.eve.theta_w,
        bounds: inc.eve.bounds,
        phase_err: inc.eve.phase_err,
        status,
    })
}

impl std::fmt::Display for PointStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PointStatus::Ok => "ok",
            PointStatus::ZeroRate => "zero_rate",
            PointStatus::LpInfeasible => "lp_infeasible",
            PointStatus::GridAllZero => "grid_all_zero",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn binary_entropy_reference_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 50-digit evaluation: 0.49991595816452799564
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            0.49991595816452799564,
            max_relative = 1e-12
        );
        assert!(matches!(
            binary_entropy(-0.1),
            Err(EngineError::EntropyDomain(_))
        ));
        assert!(matches!(
            binary_entropy(1.1),
            Err(EngineError::EntropyDomain(_))
        ));
    }

    #[test]
    fn pm_fidelity_matches_fock_references() {
        // 60-digit Fock-basis fidelities of the two leak mixtures.
        assert_eq!(pm_fidelity(0.0), 1.0);
        assert_relative_eq!(
            pm_fidelity(1e-6),
            0.99999999999900000067,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pm_fidelity(1e-3),
            0.99999900066650000001,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pm_fidelity(1e-2),
            0.9999006650000110794,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pm_fidelity(0.1),
            0.99065001079761818168,
            max_relative = 1e-12
        );
        let grid = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.3, 0.6];
        for pair in grid.windows(2) {
            assert!(pm_fidelity(pair[1]) < pm_fidelity(pair[0]));
        }
    }

    #[test]
    #[should_panic(expected = "nonnegative")]
    fn pm_fidelity_rejects_negative_intensity() {
        pm_fidelity(-1e-3);
    }

    fn peu(f: f64, dx: f64, noc: f64) -> f64 {
        phase_error_upper(&PhaseErrorInputs::new(f, dx, 0.5, 0.5, noc).unwrap())
    }

    #[test]
    fn phase_error_upper_reference_values() {
        assert_relative_eq!(
            peu(1.0 - 1e-6, 0.02, 20.0),
            0.02180923083399183,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            peu(1.0, 0.02, 20.0),
            0.020000003238756555,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            peu((-1e-3f64).exp(), 0.03, 650.0),
            0.966583709077697,
            max_relative = 1e-9
        );
        // Unit fidelity pins the phase error to the observed X error.
        assert_abs_diff_eq!(peu(1.0, 0.07, 3.0), 0.07, epsilon = 1e-6);
        // A fidelity low enough to void the constraint saturates the bound.
        assert_eq!(peu(0.5, 0.02, 20.0), 1.0);
    }

    #[test]
    fn phase_error_upper_agrees_with_dense_scan() {
        let inp = PhaseErrorInputs::new(1.0 - 1e-6, 0.02, 0.5, 0.5, 20.0).unwrap();
        let got = phase_error_upper(&inp);
        let lhs = 1.0 - inp.n_over_click * (1.0 - inp.fidelity);
        let a = inp.frac_x * inp.dx_given_x * inp.frac_z;
        let b = inp.frac_x * (1.0 - inp.dx_given_x) * inp.frac_z;
        let mut scanned = 1.0;
        let n = 1_000_000;
        for k in (0..=n).rev() {
            let dz = k as f64 / n as f64;
            if 2.0 * (a * dz).sqrt() + 2.0 * (b * (1.0 - dz)).sqrt() >= lhs {
                scanned = dz;
                break;
            }
        }
        assert_abs_diff_eq!(got, scanned, epsilon = 1e-6);
    }

    #[test]
    fn phase_error_upper_monotone_in_fidelity() {
        let mut last = 0.0;
        for f in [1.0, 1.0 - 1e-8, 1.0 - 1e-6, 1.0 - 1e-5, 1.0 - 1e-4] {
            let pe = peu(f, 0.02, 20.0);
            assert!(pe >= last - 1e-15, "F={f} gave {pe} < {last}");
            last = pe;
        }
    }

    #[test]
    fn azuma_bound_matches_closed_form() {
        // 2·e^{−50} = 3.857499695927835566e-22 (50-digit value).
        assert_relative_eq!(
            azuma_deviation_bound(1e6, 0.01),
            3.857499695927835566e-22,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(azuma_deviation_bound(1.0, 1e-12), 2.0, epsilon = 1e-9);
        assert!(azuma_deviation_bound(2e6, 0.01) < azuma_deviation_bound(1e6, 0.01));
        assert!(azuma_deviation_bound(1e6, 0.02) < azuma_deviation_bound(1e6, 0.01));
    }

    #[test]
    #[should_panic(expected = "delta")]
    fn azuma_bound_rejects_zero_delta() {
        azuma_deviation_bound(1e6, 0.0);
    }

    fn reference_inputs() -> (ObservedStats, IntensityConfig, ProtocolParams) {
        let cfg = IntensityConfig::with_default_probabilities(0.5, 0.1, 5e-4).unwrap();
        let stats = simulate_observations(&ChannelParams::reference(50.0), &cfg);
        (stats, cfg, ProtocolParams::default())
    }

    #[test]
    fn key_rate_point_matches_reference_value() {
        let (stats, cfg, proto) = reference_inputs();
        let bounds = DecoyBounds {
            y0_l: 3e-5,
            y1_l: 0.005,
            e1_u: 0.03,
            infeasible: false,
        };
        let raw = key_rate_point_raw(&bounds, &stats, &cfg, &proto, bounds.e1_u).unwrap();
        assert_relative_eq!(raw, 0.0005962040484740786, max_relative = 1e-10);
        assert_eq!(
            key_rate_point(&bounds, &stats, &cfg, &proto, bounds.e1_u).unwrap(),
            raw.max(0.0)
        );
    }

    #[test]
    fn key_rate_point_floors_and_caps() {
        let (stats, cfg, proto) = reference_inputs();
        let none = DecoyBounds {
            y0_l: 0.0,
            y1_l: 0.0,
            e1_u: 1.0,
            infeasible: false,
        };
        let raw = key_rate_point_raw(&none, &stats, &cfg, &proto, 1.0).unwrap();
        assert!(raw < 0.0);
        assert_eq!(key_rate_point(&none, &stats, &cfg, &proto, 1.0).unwrap(), 0.0);

        // Entropy cap: a vacuous phase-error bound (1.0) must cost exactly
        // as much as a coin flip (0.5), never less.
        let some = DecoyBounds {
            y0_l: 1e-5,
            y1_l: 0.01,
            e1_u: 1.0,
            infeasible: false,
        };
        let at_one = key_rate_point_raw(&some, &stats, &cfg, &proto, 1.0).unwrap();
        let at_half = key_rate_point_raw(&some, &stats, &cfg, &proto, 0.5).unwrap();
        assert_eq!(at_one, at_half);
    }

    #[test]
    fn golden_pipeline_rate_modulated_coherent() {
        let pt = rate_for_point(
            ThaCase::ModulatedCoherent,
            1e-6,
            0.5,
            0.1,
            2.1,
            4.2,
            &ChannelParams::reference(30.0),
            &EstimatorConfig::default(),
            &ProtocolParams::default(),
            &PmLeakage::off(),
            &OptimizerGrid::default(),
        )
        .unwrap();
        assert_relative_eq!(pt.raw, 0.004614558461640725, max_relative = 1e-6);
    }

    #[test]
    fn golden_pipeline_rate_phase_randomized_with_pm() {
        let pt = rate_for_point(
            ThaCase::PhaseRandomized,
            1e-2,
            0.7,
            0.56,
            0.0,
            0.0,
            &ChannelParams::reference(60.0),
            &EstimatorConfig::default(),
            &ProtocolParams::default(),
            &PmLeakage::on(1e-2).unwrap(),
            &OptimizerGrid::default(),
        )
        .unwrap();
        assert_relative_eq!(pt.raw, -0.0005732544285175488, max_relative = 1e-6);
        assert!(pt.raw < 0.0);
    }

    #[test]
    fn correlated_rate_reduces_to_pointwise_rate() {
        let (stats, cfg, proto) = reference_inputs();
        let bounds = DecoyBounds {
            y0_l: 2e-5,
            y1_l: 0.008,
            e1_u: 0.025,
            infeasible: false,
        };
        let p0 = (-cfg.gamma_s).exp();
        let p1 = cfg.gamma_s * (-cfg.gamma_s).exp();
        let half = BitBasisBounds {
            p_0: p0 / 2.0,
            p_1: p1 / 2.0,
            y0_l: bounds.y0_l,
            y1_l: bounds.y1_l,
        };
        let per_setting = [((0u8, Basis::Z), half), ((1u8, Basis::Z), half)];
        let corr = key_rate_correlated(&per_setting, bounds.e1_u, &stats, &proto).unwrap();
        let point = key_rate_point(&bounds, &stats, &cfg, &proto, bounds.e1_u).unwrap();
        assert_abs_diff_eq!(corr, point, epsilon = 1e-12);
    }

    #[test]
    fn correlated_rate_expands_asymmetric_branches() {
        let (stats, _, proto) = reference_inputs();
        let b0 = BitBasisBounds {
            p_0: 0.31,
            p_1: 0.17,
            y0_l: 1e-5,
            y1_l: 0.011,
        };
        let b1 = BitBasisBounds {
            p_0: 0.28,
            p_1: 0.21,
            y0_l: 3e-5,
            y1_l: 0.009,
        };
        let pe_z = 0.04;
        let per_setting = [
            ((1u8, Basis::Z), b1),
            ((0u8, Basis::X), b0),
            ((0u8, Basis::Z), b0),
        ];
        let got = key_rate_correlated(&per_setting, pe_z, &stats, &proto).unwrap();
        let pa = 1.0 - binary_entropy(pe_z).unwrap();
        let signal = stats.z.s;
        let expected = (b0.p_0 * b0.y0_l + b0.p_1 * b0.y1_l * pa)
            + (b1.p_0 * b1.y0_l + b1.p_1 * b1.y1_l * pa)
            - 1.2 * signal.gain * binary_entropy(signal.qber).unwrap();
        assert_abs_diff_eq!(got, expected.max(0.0), epsilon = 1e-12);
    }

    #[test]
    fn correlated_rate_requires_both_z_entries() {
        let (stats, _, proto) = reference_inputs();
        let bb = BitBasisBounds {
            p_0: 0.3,
            p_1: 0.15,
            y0_l: 1e-5,
            y1_l: 0.01,
        };
        let missing_one = [((0u8, Basis::Z), bb), ((1u8, Basis::X), bb)];
        assert!(matches!(
            key_rate_correlated(&missing_one, 0.02, &stats, &proto),
            Err(EngineError::MissingZBasisBounds(1))
        ));
    }

    #[test]
    fn correlated_rate_drops_privacy_term_at_half() {
        let (stats, _, proto) = reference_inputs();
        let bb = BitBasisBounds {
            p_0: 0.3,
            p_1: 0.15,
            y0_l: 1e-5,
            y1_l: 0.01,
        };
        let per_setting = [((0u8, Basis::Z), bb), ((1u8, Basis::Z), bb)];
        let got = key_rate_correlated(&per_setting, 0.5, &stats, &proto).unwrap();
        let signal = stats.z.s;
        let expected =
            2.0 * (bb.p_0 * bb.y0_l) - 1.2 * signal.gain * binary_entropy(signal.qber).unwrap();
        assert_abs_diff_eq!(got, expected.max(0.0), epsilon = 1e-15);
    }

    #[test]
    fn grids_pin_endpoints_and_stay_monotone() {
        let lin = linspace(0.3, 0.9, 7);
        assert_eq!(lin.len(), 7);
        assert_eq!(lin[0], 0.3);
        assert_eq!(lin[6], 0.9);
        assert!(lin.windows(2).all(|w| w[1] > w[0]));
        let geo = geomspace(0.05, 1.0, 24);
        assert_eq!(geo[0], 0.05);
        assert_eq!(geo[23], 1.0);
        assert!(geo.windows(2).all(|w| w[1] > w[0]));
        let ratio = geo[1] / geo[0];
        for w in geo.windows(2) {
            assert_relative_eq!(w[1] / w[0], ratio, max_relative = 1e-12);
        }
    }

    #[test]
    fn eve_refinement_is_self_consistent() {
        let grid = OptimizerGrid::default();
        let args = (
            ThaCase::FixedCoherent,
            1e-6,
            0.5,
            0.1,
            ChannelParams::reference(10.0),
            EstimatorConfig::default(),
            ProtocolParams::default(),
            PmLeakage::off(),
        );
        let coarse = eve_scan(
            args.0,
            args.1,
            args.2,
            args.3,
            &args.4,
            &args.5,
            &args.6,
            &args.7,
            &grid,
            false,
            f64::NEG_INFINITY,
        )
        .unwrap()
        .raw;
        let refined = eve_scan(
            args.0,
            args.1,
            args.2,
            args.3,
            &args.4,
            &args.5,
            &args.6,
            &args.7,
            &grid,
            true,
            f64::NEG_INFINITY,
        )
        .unwrap()
        .raw;
        assert!(refined <= coarse + 1e-15, "refinement must not raise the minimum");
        assert!(
            (coarse - refined).abs() <= 0.02 * coarse.abs(),
            "coarse {coarse} vs refined {refined}"
        );
    }

    #[test]
    fn eve_scan_without_phase_freedom_is_single_point() {
        let grid = OptimizerGrid::default();
        let chan = ChannelParams::reference(20.0);
        let est = EstimatorConfig::default();
        let proto = ProtocolParams::default();
        let pm = PmLeakage::off();
        let out = eve_scan(
            ThaCase::ModulatedCoherent,
            0.0,
            0.5,
            0.1,
            &chan,
            &est,
            &proto,
            &pm,
            &grid,
            true,
            f64::NEG_INFINITY,
        )
        .unwrap();
        assert_eq!((out.theta_v, out.theta_w), (0.0, 0.0));
        let direct = rate_for_point(
            ThaCase::ModulatedCoherent,
            0.0,
            0.5,
            0.1,
            0.0,
            0.0,
            &chan,
            &est,
            &proto,
            &pm,
            &grid,
        )
        .unwrap();
        assert_eq!(out.raw, direct.raw);
    }

    #[test]
    fn optimizer_smoke_small_grid() {
        let grid = OptimizerGrid {
            n_gamma_s: 6,
            n_gamma_v: 4,
            n_theta: 6,
            refine_factor: 2,
            ..OptimizerGrid::default()
        };
        let opt = optimize_key_rate(
            20.0,
            ThaCase::FixedCoherent,
            1e-6,
            &ChannelParams::reference(0.0),
            &EstimatorConfig::default(),
            &ProtocolParams::default(),
            &PmLeakage::off(),
            &grid,
        )
        .unwrap();
        assert_eq!(opt.status, PointStatus::Ok);
        assert!(opt.rate > 0.0);
        assert_eq!(opt.rate, opt.raw_rate);
        assert!(opt.gamma_s >= grid.gamma_s_min && opt.gamma_s <= grid.gamma_s_max);
        assert!(opt.gamma_v >= grid.gamma_w && opt.gamma_v <= opt.gamma_s);
        assert!(!opt.bounds.infeasible);

        // The reported point reproduces through the pipeline exactly.
        let re = rate_for_point(
            ThaCase::FixedCoherent,
            1e-6,
            opt.gamma_s,
            opt.gamma_v,
            opt.theta_v,
            opt.theta_w,
            &ChannelParams::reference(20.0),
            &EstimatorConfig::default(),
            &ProtocolParams::default(),
            &PmLeakage::off(),
            &grid,
        )
        .unwrap();
        assert_eq!(re.raw, opt.raw_rate);
    }

    #[test]
    fn optimizer_reports_grid_all_zero_when_hopeless() {
        let grid = OptimizerGrid {
            n_gamma_s: 4,
            n_gamma_v: 3,
            n_theta: 4,
            refine_factor: 1,
            ..OptimizerGrid::default()
        };
        let opt = optimize_key_rate(
            400.0,
            ThaCase::FixedCoherent,
            0.0,
            &ChannelParams::reference(0.0),
            &EstimatorConfig::default(),
            &ProtocolParams::default(),
            &PmLeakage::off(),
            &grid,
        )
        .unwrap();
        assert_eq!(opt.status, PointStatus::GridAllZero);
        assert_eq!(opt.rate, 0.0);
        assert!(opt.raw_rate <= 0.0);
    }

    #[test]
    fn parameter_validation_rejects_bad_inputs() {
        assert!(ProtocolParams::new(0.0, 1.2).is_err());
        assert!(ProtocolParams::new(1.1, 1.2).is_err());
        assert!(ProtocolParams::new(1.0, 0.9).is_err());
        assert!(PmLeakage::on(-1.0).is_err());
        assert!(PhaseErrorInputs::new(1.0, 0.02, 0.6, 0.5, 20.0).is_err());
        assert!(PhaseErrorInputs::new(1.0, 0.02, 0.5, 0.5, 0.5).is_err());
        let bad = OptimizerGrid {
            gamma_s_min: 0.0,
            ..OptimizerGrid::default()
        };
        assert!(bad.validate().is_err());
        let bad = OptimizerGrid {
            gamma_w: 0.2,
            ..OptimizerGrid::default()
        };
        assert!(bad.validate().is_err());
    }
}
