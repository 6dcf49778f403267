//! Dyadic Haar multipliers, paraproducts and A2 weights on finite grids.
//!
//! Everything lives on `[0,1)^d` truncated at depth `L`: functions are
//! piecewise constant on the `2^(dL)` finest cells and the Haar system is
//! Wilson's laminar system on levels `0..L` plus an explicit mean term.
//! The math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file fix `f64`, which is what the tolerances assume.

pub mod audit;
pub mod error;
pub mod grid;
pub mod haar;
pub mod laminar;
pub mod linalg;
pub mod operator;
pub mod paraproduct;
pub mod scalar;
pub mod spectral;
pub mod step;
pub mod symbol;
pub mod verify;
pub mod weight;
pub mod wilson;

pub use error::{Error, Result};
pub use grid::{Cube, GridSpec};
pub use haar::{analyze, synthesize, CubeSumCache, HaarSpectrum};
pub use scalar::Scalar;
pub use step::{weighted_inner_product, StepFunction};
pub use wilson::{AlphaIndex, Region};

pub type StepFunction64 = StepFunction<f64>;
pub type HaarSpectrum64 = HaarSpectrum<f64>;
pub type CubeSumCache64 = CubeSumCache<f64>;
pub type StepFunction32 = StepFunction<f32>;
