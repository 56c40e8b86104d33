//! Asymptotic secret-key rates for decoy-state BB84 with an imperfectly
//! isolated transmitter.
//!
//! An eavesdropper who shines bright light into Alice's source and collects
//! the back-reflection learns something about each pulse's intensity and
//! phase setting.  This crate certifies how much key survives that leak:
//!
//! * [`leakage`] — trace-distance bounds on how distinguishable the leaked
//!   states make Alice's three intensity settings, for three physical models
//!   of the out-going light.
//! * [`decoy_lp`] — linear programs that turn observed gains and error rates
//!   into bounds on the vacuum yield, single-photon yield, and single-photon
//!   error rate, with the leakage distances widening the usual decoy-state
//!   constraints.
//! * [`channel_model`] — a lossy fiber + threshold-detector channel used to
//!   generate the observed statistics and to provide ground truth in tests.
//! * [`keyrate_engine`] — the key-rate formula, the phase-error penalty for
//!   phase-modulator leakage, the worst-case search over the eavesdropper's
//!   free phases, and the optimization over Alice's intensities.
//! * [`oracles`] — independent reference implementations (eigenvalue
//!   embeddings, truncated-sum references) used by the test suites.
//!
//! All rates are asymptotic (infinite-key) and floored at zero for
//! reporting; diagnostic raw values are kept alongside.

pub mod channel_model;
pub mod decoy_lp;
pub mod keyrate_engine;
pub mod leakage;
pub mod oracles;

pub use channel_model::{BasisStats, ChannelParams, GainError, ObservedStats};
pub use decoy_lp::{DecoyBounds, EstimatorConfig, LpError, LpProblem, LpSolution, Objective};
pub use keyrate_engine::{
    EngineError, OptimalPoint, OptimizerGrid, PhaseErrorInputs, PmLeakage, PointStatus,
    ProtocolParams,
};
pub use leakage::{
    IntensityConfig, LeakageDistances, LeakageError, LeakageModel, Setting, ThaCase,
    ThreeStateOrdering,
};
