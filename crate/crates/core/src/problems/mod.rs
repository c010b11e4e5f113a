//! Test objectives, stochastic gradient oracles and assumption probes.

mod noise;
mod objective;
mod probes;

pub use noise::{stoch_grad, NoiseKind, NoiseModel};
pub use objective::{
    double_well_lipschitz, regularized_exp_lipschitz, LogisticData, Objective, ObjectiveKind,
    DOUBLE_WELL_BOX,
};
pub use probes::{
    gradient_domination, probe_affine_variance, probe_nonflatness, probe_sharpness,
    probe_smoothness, AffineVarianceReport, NonflatnessReport, RadiusMinimum, SharpnessReport,
    SharpnessViolation, SmoothnessReport, SmoothnessViolation,
};
