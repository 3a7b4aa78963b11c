//! Lévy-type generator specifications, regions, and the boundary-modified
//! (interrupted, check-point, killed, regularized) operators built on them.

pub(crate) mod conditions;
mod kernel;
pub(crate) mod operators;
mod region;

use std::fmt;
use std::sync::Arc;

pub use conditions::{check_kernel_conditions, ConditionEntry, ConditionReport, Probe, Status};
pub use kernel::{Direction, JumpKernel, PowerTerm};
pub use operators::{
    apply_checkpoint, apply_interrupted, apply_interrupted_multi, apply_interrupted_order2, apply_killed,
};
pub use region::{project_ray, ray_length, Region};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Integrability class of a jump kernel near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderClass {
    /// `sup_x ∫ min(1,|y|) ν(x,y) dy < ∞`: generators of order at most one.
    BoundedVariation,
    /// Finite second moment near zero, divergent first absolute moment:
    /// the compensator `f'(x) z χ(z)` is required.
    Compensated,
}

/// Cutoff `χ` used inside the compensator of [`OrderClass::Compensated`]
/// kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mollifier {
    /// `1{|z| ≤ 1}`
    #[default]
    Indicator,
    /// `1 / (1 + z²)`
    Cauchy,
    /// `χ ≡ 1`; admissible when `∫_{|z|>1} |z| ν < ∞`, which gives the
    /// compensated one-sided stable generators their textbook form.
    Full,
}

impl Mollifier {
    #[inline]
    pub fn weight<T: Real>(self, z: T) -> T {
        match self {
            Mollifier::Indicator => {
                if z.abs() <= T::one() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Mollifier::Cauchy => T::one() / (T::one() + z * z),
            Mollifier::Full => T::one(),
        }
    }
}

type Field<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;
type ScalarField<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// Drift coefficient `γ(x)`.
#[derive(Clone, Default)]
pub enum Drift<T> {
    #[default]
    Zero,
    Constant(Vec<T>),
    Field(Field<T>),
}

impl<T: Real> fmt::Debug for Drift<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Zero => write!(f, "Zero"),
            Drift::Constant(v) => write!(f, "Constant({v:?})"),
            Drift::Field(_) => write!(f, "Field(..)"),
        }
    }
}

impl<T: Real> Drift<T> {
    /// Scalar drift field for one-dimensional problems.
    pub fn scalar(g: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Drift::Field(Arc::new(move |x: &[T]| vec![g(x[0])]))
    }

    pub fn at(&self, x: &[T]) -> Vec<T> {
        match self {
            Drift::Zero => vec![T::zero(); x.len()],
            Drift::Constant(v) => v.clone(),
            Drift::Field(g) => g(x),
        }
    }

    #[inline]
    pub fn at_1d(&self, x: T) -> T {
        match self {
            Drift::Zero => T::zero(),
            Drift::Constant(v) => v[0],
            Drift::Field(g) => g(&[x])[0],
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Drift::Zero)
    }

    pub fn is_constant(&self) -> bool {
        !matches!(self, Drift::Field(_))
    }
}

/// Full description of a free jump process: drift, optional diffusion
/// coefficient, jump kernel and mollifier.
#[derive(Clone)]
pub struct GeneratorSpec<T> {
    pub drift: Drift<T>,
    pub diffusion: Option<ScalarField<T>>,
    pub kernel: JumpKernel<T>,
    pub mollifier: Mollifier,
}

impl<T: Real> fmt::Debug for GeneratorSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSpec")
            .field("drift", &self.drift)
            .field("diffusion", &self.diffusion.is_some())
            .field("kernel", &self.kernel)
            .field("mollifier", &self.mollifier)
            .finish()
    }
}

impl<T: Real> GeneratorSpec<T> {
    pub fn new(kernel: JumpKernel<T>) -> Self {
        Self { drift: Drift::Zero, diffusion: None, kernel, mollifier: Mollifier::default() }
    }

    pub fn with_drift(mut self, drift: Drift<T>) -> Self {
        self.drift = drift;
        self
    }

    pub fn with_diffusion(mut self, g: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        self.diffusion = Some(Arc::new(g));
        self
    }

    pub fn with_mollifier(mut self, mollifier: Mollifier) -> Self {
        self.mollifier = mollifier;
        self
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn order_class(&self) -> OrderClass {
        self.kernel.order_class()
    }

    pub(crate) fn require_class(&self, expected: OrderClass) -> Result<()> {
        let got = self.order_class();
        if got != expected {
            return Err(Error::OrderClass { expected, got });
        }
        Ok(())
    }

    pub(crate) fn diffusion_at(&self, x: &[T]) -> T {
        self.diffusion.as_ref().map_or(T::zero(), |g| g(x))
    }
}
