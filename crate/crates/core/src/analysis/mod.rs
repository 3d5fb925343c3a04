//! Summability diagnostics, derivative audits, ergodic averages and the
//! parameter classifier.

mod audit;
mod classify;
mod ergodic;
mod summability;

pub use audit::{mane_estimate, prop31_audit, EnvelopePoint, ManeEstimate, Prop31Audit, ReturnRecord};
pub use classify::{
    classify, detect_periodic_attractor, detect_renormalization, ClassLabel, Classification, ClassifyBudget,
    PeriodicAttractor, Renormalization, MAX_ATTRACTOR_PERIOD,
};
pub use ergodic::{invariant_density, lyapunov, DensityEstimate};
pub use summability::{
    a_constant, rho, scaling_summability, summability, ScalingSummability, SummabilityReport, Verdict,
    CONVERGENT_TAIL, SCALING_CONVERGENT_RATIO, SCALING_DIVERGENT_RATIO,
};
