//! Proper negative definite length functions on finitely generated groups of
//! polynomial growth, built from normalized ball overlaps and checked with
//! exact arithmetic.

pub mod ball;
pub mod certified;
pub mod config;
pub mod construct;
pub mod error;
pub mod group;
pub mod growth;
pub mod pipeline;
pub mod rng;
pub mod spectral;
pub mod verify;

pub use ball::{enumerate_balls, enumerate_balls_with, BallTable, EnumOptions};
pub use construct::{
    combined_ell, omega, properness_threshold, select_k, select_parameters, ConstructionParams,
    KChoice, LengthContext, LengthValue,
};
pub use error::{Error, Result};
pub use group::{make_group, Element, GroupHandle, GroupSpec};
pub use growth::{alpha_sequence, classify_indices, density_report, fit_growth_exponent, GrowthFit};
