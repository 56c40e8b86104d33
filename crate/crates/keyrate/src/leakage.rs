//! Trace-distance bounds on intensity-setting leakage from a Trojan-horse
//! probe of the transmitter.
//!
//! Alice prepares phase-randomized weak coherent pulses at one of three
//! intensities γ_s > γ_v > γ_w (signal and two decoys).  An eavesdropper who
//! injects light into her source and collects the back-reflection holds, for
//! each pulse, a leaked state that depends on the chosen setting.  How well
//! the settings can be told apart is measured by trace distances between the
//! leaked states, and those distances feed the decoy-state linear programs
//! as widened constraint bands.
//!
//! Three models of the leaked light are supported ([`ThaCase`]):
//!
//! * [`ThaCase::FixedCoherent`] — the back-reflection is a coherent state of
//!   fixed intensity `i_max` whose phase θ_j may depend on the setting; the
//!   eavesdropper picks the phases.  This is the most pessimistic model.
//! * [`ThaCase::ModulatedCoherent`] — the back-reflection passes through the
//!   intensity modulator, so its intensity scales with the setting:
//!   β_j² = (γ_j/γ_s)·i_max, again with adversarial phases.
//! * [`ThaCase::PhaseRandomized`] — same intensities as the modulated case,
//!   but the leaked light shares the pulse's phase randomization, leaving
//!   only its photon-number distribution observable.  Valid for
//!   `i_max ≤ ln 2`.
//!
//! Two-state distances are exact closed forms.  Three-state distances bound
//! ‖ρ_1 − (p·ρ_2 + (1−p)·ρ_3)‖₁/2, the distinguishability of one setting
//! from the best claimed mixture of the other two, which is what the
//! conditional-probability structure of the decoy constraints requires.  For
//! the phase-randomized case the sums over photon number are truncated at
//! `p_cut` and closed from above, so every returned value is a valid upper
//! bound; exact-summation variants are provided for the test suites.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;
use thiserror::Error;

/// Largest Trojan-horse intensity for which the phase-randomized
/// trace-distance bounds hold (`ln 2`).
pub const MAX_PHASE_RANDOMIZED_INTENSITY: f64 = LN_2;

/// Imaginary parts of the claim-matrix characteristic coefficients beyond
/// this magnitude indicate corrupted input rather than rounding noise.
const SPECTRUM_IMAG_TOL: f64 = 1e-10;

/// Relative slack when checking `i_max ≤ ln 2`, so that an intensity set to
/// the boundary by a caller survives the round trip through decimal text.
const LN2_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LeakageError {
    #[error("mean photon number must be finite and nonnegative, got {0}")]
    NegativeIntensity(f64),
    #[error("intensities must satisfy gamma_s >= gamma_v >= gamma_w >= 0, got ({gamma_s}, {gamma_v}, {gamma_w})")]
    UnorderedIntensities {
        gamma_s: f64,
        gamma_v: f64,
        gamma_w: f64,
    },
    #[error("selection probabilities must lie in (0,1) and sum to 1, got ({p_s}, {p_v}, {p_w})")]
    InvalidProbabilities { p_s: f64, p_v: f64, p_w: f64 },
    #[error("phases must satisfy 0 <= theta_v <= 2*pi and theta_v <= theta_w <= 2*pi, got ({theta_v}, {theta_w})")]
    InvalidPhases { theta_v: f64, theta_w: f64 },
    #[error("phase-randomized leakage bounds require i_max <= ln 2, got {0}")]
    IntensityAboveLn2(f64),
    #[error("conditional setting probability is degenerate: both Poisson weights vanish at n={n} for gamma=({gamma_k}, {gamma_l})")]
    DegenerateConditional { n: u32, gamma_k: f64, gamma_l: f64 },
    #[error("claim-matrix spectrum is not real: characteristic coefficients have imaginary part {max_imag:.3e}")]
    NonRealSpectrum { max_imag: f64 },
    #[error("mixing weight must lie in [0, 1], got {0}")]
    InvalidMixingWeight(f64),
    #[error("truncation order p_cut must be at least 1")]
    ZeroTruncationOrder,
}

/// One of Alice's three intensity settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setting {
    /// Signal intensity γ_s.
    S,
    /// Stronger decoy intensity γ_v.
    V,
    /// Weaker decoy intensity γ_w.
    W,
}

/// Alice's intensity choices and the probabilities with which she selects
/// them.  Invariants: γ_s ≥ γ_v ≥ γ_w ≥ 0, each probability in (0,1), and
/// the probabilities sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityConfig {
    pub gamma_s: f64,
    pub gamma_v: f64,
    pub gamma_w: f64,
    pub p_s: f64,
    pub p_v: f64,
    pub p_w: f64,
}

impl IntensityConfig {
    pub fn new(
        gamma_s: f64,
        gamma_v: f64,
        gamma_w: f64,
        p_s: f64,
        p_v: f64,
        p_w: f64,
    ) -> Result<Self, LeakageError> {
        for g in [gamma_s, gamma_v, gamma_w] {
            if !g.is_finite() || g < 0.0 {
                return Err(LeakageError::NegativeIntensity(g));
            }
        }
        if !(gamma_s >= gamma_v && gamma_v >= gamma_w) {
            return Err(LeakageError::UnorderedIntensities {
                gamma_s,
                gamma_v,
                gamma_w,
            });
        }
        let in_range = |p: f64| p.is_finite() && p > 0.0 && p < 1.0;
        if !(in_range(p_s) && in_range(p_v) && in_range(p_w))
            || ((p_s + p_v + p_w) - 1.0).abs() > 1e-12
        {
            return Err(LeakageError::InvalidProbabilities { p_s, p_v, p_w });
        }
        Ok(Self {
            gamma_s,
            gamma_v,
            gamma_w,
            p_s,
            p_v,
            p_w,
        })
    }

    /// Intensities with the calibrated default selection probabilities
    /// (0.8, 0.1, 0.1): the signal setting dominates so that the signal gain
    /// carries most of the raw key, while both decoys stay frequent enough
    /// to pin the yield constraints.
    pub fn with_default_probabilities(
        gamma_s: f64,
        gamma_v: f64,
        gamma_w: f64,
    ) -> Result<Self, LeakageError> {
        Self::new(gamma_s, gamma_v, gamma_w, 0.8, 0.1, 0.1)
    }

    pub fn gamma(&self, s: Setting) -> f64 {
        match s {
            Setting::S => self.gamma_s,
            Setting::V => self.gamma_v,
            Setting::W => self.gamma_w,
        }
    }

    pub fn prob(&self, s: Setting) -> f64 {
        match s {
            Setting::S => self.p_s,
            Setting::V => self.p_v,
            Setting::W => self.p_w,
        }
    }
}

/// Which physical model generates the leaked states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThaCase {
    /// Coherent back-reflection of fixed intensity `i_max` for every
    /// setting; only the phase may depend on the setting.
    FixedCoherent,
    /// Coherent back-reflection attenuated by the intensity modulator:
    /// β_j² = (γ_j/γ_s)·i_max.
    ModulatedCoherent,
    /// Modulated back-reflection that inherits the pulse's phase
    /// randomization; only photon-number statistics leak.
    PhaseRandomized,
}

/// A concrete leakage scenario: the model, the Trojan-horse intensity
/// budget, the eavesdropper's phase choices, and the truncation order for
/// the phase-randomized sums.
///
/// Invariants: `i_max ≥ 0`, `0 ≤ theta_v ≤ 2π`, `theta_v ≤ theta_w ≤ 2π`,
/// `p_cut ≥ 1`, and for [`ThaCase::PhaseRandomized`] additionally
/// `i_max ≤ ln 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageModel {
    pub case: ThaCase,
    pub i_max: f64,
    pub theta_v: f64,
    pub theta_w: f64,
    pub p_cut: u32,
}

impl LeakageModel {
    pub fn new(
        case: ThaCase,
        i_max: f64,
        theta_v: f64,
        theta_w: f64,
        p_cut: u32,
    ) -> Result<Self, LeakageError> {
        if !i_max.is_finite() || i_max < 0.0 {
            return Err(LeakageError::NegativeIntensity(i_max));
        }
        if case == ThaCase::PhaseRandomized
            && i_max > MAX_PHASE_RANDOMIZED_INTENSITY * (1.0 + LN2_SLACK)
        {
            return Err(LeakageError::IntensityAboveLn2(i_max));
        }
        let two_pi = 2.0 * PI;
        if !theta_v.is_finite()
            || !theta_w.is_finite()
            || theta_v < 0.0
            || theta_v > two_pi
            || theta_w < theta_v
            || theta_w > two_pi
        {
            return Err(LeakageError::InvalidPhases { theta_v, theta_w });
        }
        if p_cut == 0 {
            return Err(LeakageError::ZeroTruncationOrder);
        }
        Ok(Self {
            case,
            i_max,
            theta_v,
            theta_w,
            p_cut,
        })
    }
}

/// Trace-distance inputs for the decoy linear program.
///
/// `d_ws` and `d_vw` bound the pairwise distinguishability of the (w,s) and
/// (v,w) leaked-state pairs; the three vectors, indexed by photon number
/// `n = 0..=s_cut`, bound the setting-vs-claimed-mixture distances for the
/// three orderings.  Every entry lies in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageDistances {
    pub d_ws: f64,
    pub d_vw: f64,
    pub d_svw: Vec<f64>,
    pub d_vsw: Vec<f64>,
    pub d_wsv: Vec<f64>,
}

/// Which setting plays the "singled out" role in a three-state distance:
/// `Svw` bounds s against a mixture of (v,w), and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeStateOrdering {
    Svw,
    Vsw,
    Wsv,
}

const LN_FACTORIAL_TABLE_LEN: usize = 4096;

fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE_LEN);
        t.push(0.0);
        for k in 1..LN_FACTORIAL_TABLE_LEN as u64 {
            let prev = t[(k - 1) as usize];
            t.push(prev + (k as f64).ln());
        }
        t
    });
    if (n as usize) < table.len() {
        table[n as usize]
    } else {
        let mut acc = *table.last().unwrap();
        for k in table.len() as u64..=u64::from(n) {
            acc += (k as f64).ln();
        }
        acc
    }
}

/// Poisson probability e^{−μ} μ^n / n!, evaluated in log space so that large
/// n underflows cleanly to zero instead of overflowing n!.
///
/// # Errors
/// `NegativeIntensity` if μ is negative or non-finite.
pub fn poisson_pmf(mu: f64, n: u32) -> Result<f64, LeakageError> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(LeakageError::NegativeIntensity(mu));
    }
    Ok(poisson_pmf_raw(mu, n))
}

pub(crate) fn poisson_pmf_raw(mu: f64, n: u32) -> f64 {
    if mu == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    (-mu + f64::from(n) * mu.ln() - ln_factorial(n)).exp()
}

/// Probability that the setting was `k` rather than `l`, given that the
/// pulse carried `n` photons:
/// q = p_k·p_n(γ_k) / (p_k·p_n(γ_k) + p_l·p_n(γ_l)), computed in log space.
///
/// # Errors
/// `DegenerateConditional` if both Poisson weights vanish (zero intensities
/// with n ≥ 1), leaving the conditional undefined.
pub fn q_cond(
    n: u32,
    k: Setting,
    l: Setting,
    cfg: &IntensityConfig,
) -> Result<f64, LeakageError> {
    q_cond_raw(n, cfg.gamma(k), cfg.gamma(l), cfg.prob(k), cfg.prob(l))
}

pub(crate) fn q_cond_raw(
    n: u32,
    gamma_k: f64,
    gamma_l: f64,
    p_k: f64,
    p_l: f64,
) -> Result<f64, LeakageError> {
    let log_weight = |p: f64, g: f64| -> f64 {
        if g == 0.0 {
            if n == 0 {
                p.ln()
            } else {
                f64::NEG_INFINITY
            }
        } else {
            p.ln() - g + f64::from(n) * g.ln() - ln_factorial(n)
        }
    };
    let a = log_weight(p_k, gamma_k);
    let b = log_weight(p_l, gamma_l);
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return Err(LeakageError::DegenerateConditional {
            n,
            gamma_k,
            gamma_l,
        });
    }
    if a == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if b == f64::NEG_INFINITY {
        return Ok(1.0);
    }
    Ok(1.0 / (1.0 + (b - a).exp()))
}

/// Overlap ⟨α|β⟩ = exp(−(|α|² + |β|²)/2 + α*·β) of two coherent states.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    let exponent = Complex64::new(-(alpha.norm_sqr() + beta.norm_sqr()) / 2.0, 0.0)
        + alpha.conj() * beta;
    exponent.exp()
}

/// Trace distance between two coherent states given as (intensity, phase)
/// pairs: sqrt(1 − |⟨α_j|α_k⟩|²).
///
/// The exponent is assembled as −(β_j − β_k)² − 4·β_j·β_k·sin²(Δθ/2), which
/// is exact and avoids the cancellation the naive −β_j² − β_k² + 2β_jβ_k·cosΔθ
/// form suffers at small intensities; the outer 1 − e^x goes through
/// `expm1` for the same reason.
///
/// # Errors
/// `NegativeIntensity` if either intensity is negative or non-finite.
pub fn d2_coherent(
    beta2_j: f64,
    theta_j: f64,
    beta2_k: f64,
    theta_k: f64,
) -> Result<f64, LeakageError> {
    for b2 in [beta2_j, beta2_k] {
        if !b2.is_finite() || b2 < 0.0 {
            return Err(LeakageError::NegativeIntensity(b2));
        }
    }
    let bj = beta2_j.sqrt();
    let bk = beta2_k.sqrt();
    let s = (0.5 * (theta_k - theta_j)).sin();
    let exponent = -(bj - bk) * (bj - bk) - 4.0 * bj * bk * s * s;
    Ok((-exponent.exp_m1()).max(0.0).sqrt().min(1.0))
}

/// Eigenvalues of the claim matrix A = C·G, where G is the Gram matrix of
/// the three coherent states and C = diag(1, −p, −(1−p)).
///
/// A is similar to a Hermitian matrix (C·G ~ G^{1/2}·C·G^{1/2}), so its
/// spectrum is real; the characteristic coefficients are computed from A
/// directly and their imaginary parts checked against rounding noise.  The
/// real cubic is then solved in closed trigonometric form.
///
/// # Errors
/// `NonRealSpectrum` if the characteristic coefficients carry imaginary
/// parts above 1e-10, `InvalidMixingWeight` if p is outside [0, 1].
pub fn d3_coherent_eigenvalues(
    alpha1: Complex64,
    alpha2: Complex64,
    alpha3: Complex64,
    p: f64,
) -> Result<[f64; 3], LeakageError> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(LeakageError::InvalidMixingWeight(p));
    }
    let states = [alpha1, alpha2, alpha3];
    let weights = [1.0, -p, -(1.0 - p)];
    let mut a = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (i, w) in weights.iter().enumerate() {
        for j in 0..3 {
            a[i][j] = Complex64::new(*w, 0.0) * coherent_overlap(states[i], states[j]);
        }
    }
    let e1 = a[0][0] + a[1][1] + a[2][2];
    let e2 = (a[0][0] * a[1][1] - a[0][1] * a[1][0])
        + (a[0][0] * a[2][2] - a[0][2] * a[2][0])
        + (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
    let e3 = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let max_imag = e1.im.abs().max(e2.im.abs()).max(e3.im.abs());
    if max_imag > SPECTRUM_IMAG_TOL {
        return Err(LeakageError::NonRealSpectrum { max_imag });
    }
    Ok(solve_real_cubic(-e1.re, e2.re, -e3.re))
}

/// Real roots of x³ + a·x² + b·x + c, assuming all roots are real, via the
/// trigonometric form of Cardano's method.  The depressed cubic's p is
/// clamped to ≤ 0 and the acos argument to [−1, 1]; both only bind when
/// rounding noise pushes a repeated root marginally complex.
fn solve_real_cubic(a: f64, b: f64, c: f64) -> [f64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let m = 2.0 * (-p / 3.0).max(0.0).sqrt();
    if m == 0.0 {
        return [-shift; 3];
    }
    let phi = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
    let root = |k: f64| m * (phi - k * 2.0 * PI / 3.0).cos() - shift;
    [root(0.0), root(1.0), root(2.0)]
}

/// Trace distance ‖ρ_1 − (p·ρ_2 + (1−p)·ρ_3)‖₁ / 2 between a coherent state
/// and a claimed mixture of two others: half the sum of the absolute
/// eigenvalues of the claim matrix.
pub fn d3_coherent(
    alpha1: Complex64,
    alpha2: Complex64,
    alpha3: Complex64,
    p: f64,
) -> Result<f64, LeakageError> {
    let roots = d3_coherent_eigenvalues(alpha1, alpha2, alpha3, p)?;
    Ok((0.5 * (roots[0].abs() + roots[1].abs() + roots[2].abs())).min(1.0))
}

/// Upper bound on the trace distance between two phase-randomized coherent
/// states (Poisson photon-number mixtures), truncating the sum at `p_cut`
/// and closing the tail from above:
///
/// d ≤ (1/2)·{1 − Σ_{n ≤ p_cut} P_n(a)·(1 − |1 − e^{a−b}(b/a)^n|)},
///
/// with a = max(β²), b = min(β²).  Valid for a ≤ ln 2 (which keeps every
/// summand's inner factor within [0, 1]).
///
/// # Errors
/// `IntensityAboveLn2` if max(β²) > ln 2, `NegativeIntensity`,
/// `ZeroTruncationOrder`.
pub fn d2_phase_randomized(beta2_j: f64, beta2_k: f64, p_cut: u32) -> Result<f64, LeakageError> {
    for b2 in [beta2_j, beta2_k] {
        if !b2.is_finite() || b2 < 0.0 {
            return Err(LeakageError::NegativeIntensity(b2));
        }
    }
    if p_cut == 0 {
        return Err(LeakageError::ZeroTruncationOrder);
    }
    let a = beta2_j.max(beta2_k);
    let b = beta2_j.min(beta2_k);
    if a > MAX_PHASE_RANDOMIZED_INTENSITY * (1.0 + LN2_SLACK) {
        return Err(LeakageError::IntensityAboveLn2(a));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    let log_ratio = if b == 0.0 { f64::NEG_INFINITY } else { (b / a).ln() };
    let mut captured = 0.0;
    for n in 0..=p_cut {
        let inner = if b == 0.0 && n > 0 {
            1.0
        } else {
            let exponent = (a - b) + if n == 0 { 0.0 } else { f64::from(n) * log_ratio };
            (-exponent.exp_m1()).abs()
        };
        captured += poisson_pmf_raw(a, n) * (1.0 - inner);
    }
    Ok((0.5 * (1.0 - captured)).max(0.0))
}

/// Exact trace distance between two phase-randomized coherent states,
/// (1/2)·Σ_n |P_n(β_j²) − P_n(β_k²)|, summed to convergence.  Reference
/// implementation for the truncated bound; no ln 2 restriction.
pub fn d2_phase_randomized_exact(beta2_j: f64, beta2_k: f64) -> Result<f64, LeakageError> {
    for b2 in [beta2_j, beta2_k] {
        if !b2.is_finite() || b2 < 0.0 {
            return Err(LeakageError::NegativeIntensity(b2));
        }
    }
    let a = beta2_j.max(beta2_k);
    let b = beta2_j.min(beta2_k);
    let mut sum = 0.0;
    let mut n = 0u32;
    loop {
        let pa = poisson_pmf_raw(a, n);
        let pb = poisson_pmf_raw(b, n);
        sum += (pa - pb).abs();
        if n > 5 && pa < 1e-18 && pb < 1e-18 && f64::from(n) > 10.0 * a.max(b).max(1.0) {
            break;
        }
        n += 1;
    }
    Ok(0.5 * sum)
}

fn three_state_parts(
    cfg: &IntensityConfig,
    n: u32,
    ordering: ThreeStateOrdering,
) -> Result<f64, LeakageError> {
    match ordering {
        ThreeStateOrdering::Svw => q_cond_raw(n, cfg.gamma_v, cfg.gamma_w, cfg.p_v, cfg.p_w),
        ThreeStateOrdering::Vsw => q_cond_raw(n, cfg.gamma_s, cfg.gamma_w, cfg.p_s, cfg.p_w),
        ThreeStateOrdering::Wsv => q_cond_raw(n, cfg.gamma_s, cfg.gamma_v, cfg.p_s, cfg.p_v),
    }
}

/// Upper bound on the three-state distance for phase-randomized leakage:
/// the singled-out setting's Poisson mixture against the claimed mixture of
/// the other two, truncated at `p_cut` with the tail closed from above.
/// The claim weight is `q_cond(n, ·, ·)` for the pair named by `ordering`,
/// conditioned on the pulse's photon number `n`.
///
/// Returns 0 when `i_max = 0` or γ_s = 0 (no leaked light at all).
///
/// # Errors
/// `IntensityAboveLn2` if `i_max > ln 2`, `ZeroTruncationOrder`, and any
/// conditional-probability error.
pub fn d3_phase_randomized(
    cfg: &IntensityConfig,
    i_max: f64,
    n: u32,
    ordering: ThreeStateOrdering,
    p_cut: u32,
) -> Result<f64, LeakageError> {
    if !i_max.is_finite() || i_max < 0.0 {
        return Err(LeakageError::NegativeIntensity(i_max));
    }
    if p_cut == 0 {
        return Err(LeakageError::ZeroTruncationOrder);
    }
    if i_max == 0.0 || cfg.gamma_s == 0.0 {
        return Ok(0.0);
    }
    if i_max > MAX_PHASE_RANDOMIZED_INTENSITY * (1.0 + LN2_SLACK) {
        return Err(LeakageError::IntensityAboveLn2(i_max));
    }
    let rv = cfg.gamma_v / cfg.gamma_s;
    let rw = cfg.gamma_w / cfg.gamma_s;
    let tv = |m: u32| (i_max * (1.0 - rv)).exp() * rv.powi(m as i32);
    let tw = |m: u32| (i_max * (1.0 - rw)).exp() * rw.powi(m as i32);
    let q = three_state_parts(cfg, n, ordering)?;
    let envelope = match ordering {
        ThreeStateOrdering::Svw => 1.0,
        _ => q + (1.0 - q) * i_max.exp(),
    };
    let mut captured = 0.0;
    for m in 0..=p_cut {
        let inner = match ordering {
            ThreeStateOrdering::Svw => (1.0 - q * tv(m) - (1.0 - q) * tw(m)).abs(),
            ThreeStateOrdering::Vsw => (tv(m) - q - (1.0 - q) * tw(m)).abs(),
            ThreeStateOrdering::Wsv => (tw(m) - q - (1.0 - q) * tv(m)).abs(),
        };
        captured += poisson_pmf_raw(i_max, m) * (envelope - inner);
    }
    Ok((0.5 * (envelope - captured)).clamp(0.0, 1.0))
}

/// Exact three-state distance for phase-randomized leakage, summed far past
/// any mass the distributions carry.  Reference implementation for the
/// truncated bound.
pub fn d3_phase_randomized_exact(
    cfg: &IntensityConfig,
    i_max: f64,
    n: u32,
    ordering: ThreeStateOrdering,
) -> Result<f64, LeakageError> {
    if !i_max.is_finite() || i_max < 0.0 {
        return Err(LeakageError::NegativeIntensity(i_max));
    }
    if i_max == 0.0 || cfg.gamma_s == 0.0 {
        return Ok(0.0);
    }
    let b2s = i_max;
    let b2v = cfg.gamma_v / cfg.gamma_s * i_max;
    let b2w = cfg.gamma_w / cfg.gamma_s * i_max;
    let (t0, t1, t2) = match ordering {
        ThreeStateOrdering::Svw => (b2s, b2v, b2w),
        ThreeStateOrdering::Vsw => (b2v, b2s, b2w),
        ThreeStateOrdering::Wsv => (b2w, b2s, b2v),
    };
    let q = three_state_parts(cfg, n, ordering)?;
    let mut sum = 0.0;
    for m in 0..300u32 {
        sum += (poisson_pmf_raw(t0, m)
            - q * poisson_pmf_raw(t1, m)
            - (1.0 - q) * poisson_pmf_raw(t2, m))
        .abs();
    }
    Ok(0.5 * sum)
}

/// Worst-case trace distance between the photon-number distribution of an
/// n-photon Fock leak and its Poisson surrogate after transmission through
/// loss η: bounded by 2η.
///
/// # Errors
/// `InvalidMixingWeight` if η is outside [0, 1].
pub fn fock_vs_poisson_bound(eta: f64) -> Result<f64, LeakageError> {
    if !eta.is_finite() || !(0.0..=1.0).contains(&eta) {
        return Err(LeakageError::InvalidMixingWeight(eta));
    }
    Ok(2.0 * eta)
}

/// All trace-distance inputs the decoy LP needs for one leakage scenario:
/// the two pairwise distances and, for each photon number n = 0..=s_cut,
/// the three ordering-specific three-state distances.
pub fn distances_for_model(
    cfg: &IntensityConfig,
    model: &LeakageModel,
    s_cut: u32,
) -> Result<LeakageDistances, LeakageError> {
    let i = model.i_max;
    let b2 = match model.case {
        ThaCase::FixedCoherent => [i, i, i],
        ThaCase::ModulatedCoherent | ThaCase::PhaseRandomized => {
            if cfg.gamma_s > 0.0 {
                [
                    i,
                    cfg.gamma_v / cfg.gamma_s * i,
                    cfg.gamma_w / cfg.gamma_s * i,
                ]
            } else {
                [i, 0.0, 0.0]
            }
        }
    };
    let th = [0.0, model.theta_v, model.theta_w];
    let n_entries = s_cut as usize + 1;
    let mut d_svw = Vec::with_capacity(n_entries);
    let mut d_vsw = Vec::with_capacity(n_entries);
    let mut d_wsv = Vec::with_capacity(n_entries);

    match model.case {
        ThaCase::FixedCoherent | ThaCase::ModulatedCoherent => {
            let d_ws = d2_coherent(b2[2], th[2], b2[0], th[0])?;
            let d_vw = d2_coherent(b2[1], th[1], b2[2], th[2])?;
            let amp =
                |k: usize| Complex64::from_polar(b2[k].sqrt(), th[k]);
            for n in 0..=s_cut {
                d_svw.push(d3_coherent(
                    amp(0),
                    amp(1),
                    amp(2),
                    q_cond_raw(n, cfg.gamma_v, cfg.gamma_w, cfg.p_v, cfg.p_w)?,
                )?);
                d_vsw.push(d3_coherent(
                    amp(1),
                    amp(0),
                    amp(2),
                    q_cond_raw(n, cfg.gamma_s, cfg.gamma_w, cfg.p_s, cfg.p_w)?,
                )?);
                d_wsv.push(d3_coherent(
                    amp(2),
                    amp(0),
                    amp(1),
                    q_cond_raw(n, cfg.gamma_s, cfg.gamma_v, cfg.p_s, cfg.p_v)?,
                )?);
            }
            Ok(LeakageDistances {
                d_ws,
                d_vw,
                d_svw,
                d_vsw,
                d_wsv,
            })
        }
        ThaCase::PhaseRandomized => {
            let d_ws = d2_phase_randomized(b2[2], b2[0], model.p_cut)?;
            let d_vw = d2_phase_randomized(b2[1], b2[2], model.p_cut)?;
            for n in 0..=s_cut {
                d_svw.push(d3_phase_randomized(
                    cfg,
                    i,
                    n,
                    ThreeStateOrdering::Svw,
                    model.p_cut,
                )?);
                d_vsw.push(d3_phase_randomized(
                    cfg,
                    i,
                    n,
                    ThreeStateOrdering::Vsw,
                    model.p_cut,
                )?);
                d_wsv.push(d3_phase_randomized(
                    cfg,
                    i,
                    n,
                    ThreeStateOrdering::Wsv,
                    model.p_cut,
                )?);
            }
            Ok(LeakageDistances {
                d_ws,
                d_vw,
                d_svw,
                d_vsw,
                d_wsv,
            })
        }
    }
}
