//! Renewal theory for random walks built on the Kendall generalized
//! convolution.
//!
//! Steps of the walk follow `S_{n+1} = S_n ▵ X_{n+1}`, where `▵` is the
//! Kendall convolution of order `α`. The renewal function, moments and law of
//! the number of renewals all have closed forms in terms of the Williamson
//! transform `G` and the truncated moment `H` of the unit step. This crate
//! evaluates those forms, cross-checks them against series, quadrature and
//! Monte Carlo, and probes the regular-variation limit theorems.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases below fix `f64`, which is what the checks and the CLI use.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod asymptotics;
pub mod catalog;
pub mod error;
pub mod grid;
pub mod measure;
pub mod quadrature;
pub mod renewal;
pub mod scalar;
pub mod stats;
pub mod verify;
pub mod walk;
pub mod williamson;

pub use algebra::{ConvolutionKernel, FamilyId, KernelFamily};
pub use asymptotics::{AsymptoticsReport, MixtureGammaLaw};
pub use catalog::{catalog_lookup, StepDistribution, StepLaw, CATALOG};
pub use error::{Error, Result};
pub use grid::{Grid, Spacing};
pub use measure::Measure;
pub use renewal::{RenewalEval, RenewalMeasure};
pub use scalar::Real;
pub use verify::{Suite, SuiteReport};
pub use walk::{WalkConfig, WalkPath};

pub type StepDistribution64 = StepDistribution<f64>;
pub type StepDistribution32 = StepDistribution<f32>;
pub type ConvolutionKernel64 = ConvolutionKernel<f64>;
pub type WalkConfig64 = WalkConfig<f64>;
pub type WalkPath64 = WalkPath<f64>;
pub type RenewalEval64 = RenewalEval<f64>;
pub type AsymptoticsReport64 = AsymptoticsReport<f64>;
pub type MixtureGammaLaw64 = MixtureGammaLaw<f64>;
