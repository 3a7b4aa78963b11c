//! Generalized Caputo and Riemann-Liouville operators viewed as generators
//! of jump processes interrupted, stopped or killed at a boundary.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the usual double-precision instantiation.

pub mod error;
pub mod fracops;
pub mod function;
pub mod generators;
pub mod montecarlo;
pub mod quad;
pub mod scalar;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use scalar::Real;

pub type GeneratorSpec = generators::GeneratorSpec<f64>;
pub type JumpKernel = generators::JumpKernel<f64>;
pub type Region = generators::Region<f64>;
pub type ScalarFunction = function::ScalarFunction<f64>;
pub type SimParams = montecarlo::SimParams<f64>;

pub type GeneratorSpec32 = generators::GeneratorSpec<f32>;
pub type JumpKernel32 = generators::JumpKernel<f32>;
pub type Region32 = generators::Region<f32>;
pub type ScalarFunction32 = function::ScalarFunction<f32>;
pub type SimParams32 = montecarlo::SimParams<f32>;
