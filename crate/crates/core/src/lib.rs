//! Canonical (exponentially tilted) approximations of conditional laws.
//!
//! The crate computes the law of `X` given `X + Y ∈ I` exactly or by
//! rejection sampling, builds tilted approximations `∝ f(x) e^{-λx}`,
//! derives `λ` from bath interval probabilities, Cramér rate functions or
//! a maximum-entropy constraint, and measures the gap with KL, total
//! variation and sup distances.
//!
//! Everything here is `no_std` with `alloc`; file formats, the CLI and the
//! threaded sweep driver live in the `canon-tilt` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conditioning;
pub mod dist;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod interval;
pub mod ldp;
pub mod quad;
pub mod roots;
pub mod special;
pub mod tilting;

pub use conditioning::{
    canonical_approx, canonical_approx_field, condition_exact, condition_exact_bath, condition_exact_dependent,
    condition_mc, finite_n_conditional, mc_agreement, Bath, ConditionalBath, ConditionalLaw, LawKind, Method,
};
pub use dist::{BathFamily, ContinuousDist, DiscreteDist, Dist};
pub use divergence::{divergence_report, kl, scaled_divergence, sup_distance, total_variation, DivergenceReport, Law};
pub use error::{Error, Result};
pub use experiments::{ConvergenceReport, Executor, ExperimentSpec, Row, Sequential, Verdict};
pub use fit::{fit_loglog, LogLogFit};
pub use interval::{Interval, ScalingScheme};
pub use ldp::{ldp_tilt_param, maxent_lambda, rate_function, MaxEntSolution, RateFunction};
pub use tilting::{
    bath_slope_param, corrected_param, tilt, tilt_field, tilt_lambda, InteractionModel, Provenance, Tilt, TiltField,
    TiltParam, TiltedDist,
};
