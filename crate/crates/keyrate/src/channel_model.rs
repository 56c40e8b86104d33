//! Lossy-fiber channel with threshold detectors: the simulation that
//! generates Bob's observed gains and error rates, and the closed-form
//! per-photon-number yields used as ground truth in tests.
//!
//! The channel is characterized by fiber loss α (dB/km), receiver and
//! detector efficiencies η_B and η_det, dark-count probability p_d per
//! pulse, and misalignment error e_d.  For a phase-randomized coherent
//! pulse of mean photon number γ the overall gain and error rate have the
//! standard closed forms
//!
//! * Q(γ) = 1 − (1−p_d)²·e^{−γη},
//! * E(γ)·Q(γ) = Q(γ)/2 + (1−p_d)/2·[e^{−γη(1−e_d)} − e^{−γη·e_d}],
//!
//! with η = 10^{−αd/10}·η_B·η_det the end-to-end transmittance.  Both are
//! evaluated through `expm1`/`ln_1p` so that the deep-loss regime
//! (γη ~ 1e-7) keeps full relative precision.  The Z and X bases behave
//! identically in this model.

use crate::leakage::{IntensityConfig, Setting};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("channel parameter {name} = {value} is outside its physical range")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Physical channel and detector parameters.
///
/// Invariants: α ≥ 0, d ≥ 0, η_B and η_det in [0, 1], p_d in [0, 1),
/// e_d in [0, 1/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub alpha_db_per_km: f64,
    pub distance_km: f64,
    pub eta_b: f64,
    pub eta_det: f64,
    pub p_d: f64,
    pub e_d: f64,
}

impl ChannelParams {
    pub fn new(
        alpha_db_per_km: f64,
        distance_km: f64,
        eta_b: f64,
        eta_det: f64,
        p_d: f64,
        e_d: f64,
    ) -> Result<Self, ChannelError> {
        let check = |name: &'static str, value: f64, lo: f64, hi: f64| {
            if value.is_finite() && (lo..=hi).contains(&value) {
                Ok(value)
            } else {
                Err(ChannelError::InvalidParameter { name, value })
            }
        };
        Ok(Self {
            alpha_db_per_km: check("alpha_db_per_km", alpha_db_per_km, 0.0, f64::INFINITY)?,
            distance_km: check("distance_km", distance_km, 0.0, f64::INFINITY)?,
            eta_b: check("eta_b", eta_b, 0.0, 1.0)?,
            eta_det: check("eta_det", eta_det, 0.0, 1.0)?,
            p_d: check("p_d", p_d, 0.0, 1.0 - f64::EPSILON)?,
            e_d: check("e_d", e_d, 0.0, 0.5)?,
        })
    }

    /// The reference parameter set used throughout the sweeps: α = 0.2 dB/km,
    /// η_B = 0.5, η_det = 0.25, p_d = 5e-6, e_d = 1%.
    pub fn reference(distance_km: f64) -> Self {
        Self {
            alpha_db_per_km: 0.2,
            distance_km,
            eta_b: 0.5,
            eta_det: 0.25,
            p_d: 5e-6,
            e_d: 0.01,
        }
    }

    /// Same channel moved to a different fiber length.
    pub fn with_distance(&self, distance_km: f64) -> Self {
        Self {
            distance_km,
            ..*self
        }
    }

    /// End-to-end transmittance η = 10^{−αd/10}·η_B·η_det.
    pub fn transmittance(&self) -> f64 {
        10f64.powf(-self.alpha_db_per_km * self.distance_km / 10.0) * self.eta_b * self.eta_det
    }
}

/// Observed gain Q and quantum bit error rate E for one intensity setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainError {
    pub gain: f64,
    pub qber: f64,
}

/// Per-setting statistics within one measurement basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisStats {
    pub s: GainError,
    pub v: GainError,
    pub w: GainError,
}

impl BasisStats {
    pub fn get(&self, setting: Setting) -> GainError {
        match setting {
            Setting::S => self.s,
            Setting::V => self.v,
            Setting::W => self.w,
        }
    }
}

/// Everything Bob publishes: gains and error rates per setting and basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedStats {
    pub z: BasisStats,
    pub x: BasisStats,
}

/// Gain and QBER of a phase-randomized coherent pulse with mean photon
/// number γ.  When the gain vanishes (η = 0 with p_d = 0) the error rate is
/// reported as 1/2: no clicks means every recorded bit is a coin flip.
pub fn gain_and_qber(params: &ChannelParams, gamma: f64) -> GainError {
    debug_assert!(gamma >= 0.0);
    let eta = params.transmittance();
    let mu = gamma * eta;
    // 1 - (1-p_d)^2 e^{-mu} = -expm1(2 ln(1-p_d) - mu)
    let gain = -(2.0 * (-params.p_d).ln_1p() - mu).exp_m1();
    if gain <= 0.0 {
        return GainError {
            gain: 0.0,
            qber: 0.5,
        };
    }
    // e^{-mu(1-e_d)} - e^{-mu e_d} = e^{-mu e_d} expm1(-mu (1-2 e_d))
    let bracket = (-mu * params.e_d).exp() * (-mu * (1.0 - 2.0 * params.e_d)).exp_m1();
    let qber = 0.5 + (1.0 - params.p_d) * bracket / (2.0 * gain);
    GainError { gain, qber }
}

/// Observed statistics for all three settings.  This channel has no
/// basis dependence, so the Z and X blocks are identical.
pub fn simulate_observations(params: &ChannelParams, cfg: &IntensityConfig) -> ObservedStats {
    let basis = BasisStats {
        s: gain_and_qber(params, cfg.gamma_s),
        v: gain_and_qber(params, cfg.gamma_v),
        w: gain_and_qber(params, cfg.gamma_w),
    };
    ObservedStats { z: basis, x: basis }
}

/// True yield of an n-photon pulse: Y_n = 1 − (1−p_d)²(1−η)ⁿ.
pub fn n_photon_yield(params: &ChannelParams, n: u32) -> f64 {
    let eta = params.transmittance();
    1.0 - (1.0 - params.p_d).powi(2) * (1.0 - eta).powi(n as i32)
}

/// True error rate of an n-photon pulse, from
/// e_n·Y_n = Y_n/2 + (1−p_d)/2·[(1−η(1−e_d))ⁿ − (1−η·e_d)ⁿ].
pub fn n_photon_error_rate(params: &ChannelParams, n: u32) -> f64 {
    let eta = params.transmittance();
    let y_n = n_photon_yield(params, n);
    let bracket = (1.0 - eta * (1.0 - params.e_d)).powi(n as i32)
        - (1.0 - eta * params.e_d).powi(n as i32);
    (0.5 * y_n + 0.5 * (1.0 - params.p_d) * bracket) / y_n
}
