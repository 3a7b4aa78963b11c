//! Boundary value problems `(A - λ) f = g` on an interval with
//! `f(a) = f_a`, `f(b) = f_b`, where `A` is an interrupted (Caputo type) or
//! killed (Riemann-Liouville type) jump generator. Solutions come from the
//! probabilistic representation, from a piecewise-linear collocation, or,
//! for the symmetric stable kernel on `[-1, 1]`, from closed forms.

mod collocation;
mod mc;
mod regularity;

use std::fmt;

use crate::error::{Error, Result};
use crate::function::{ScalarFunction, Smoothness};
use crate::generators::{apply_interrupted, GeneratorSpec, Region};
use crate::quad;
use crate::scalar::{lit, Real};
use crate::specfun::{mittag_leffler, stable_exit_prob, stable_occupation_density};

pub use collocation::{graded_mesh, DEFAULT_GRADING, solve_bvp_collocation, solve_bvp_collocation_on};
pub use mc::solve_bvp_mc;
pub use regularity::{regularity_probe, Endpoint, RegularityReport, Verdict};

/// Boundary behaviour of the generator in a [`BvpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryOperator {
    /// Jumps across the boundary are stopped at it (Caputo type).
    Interrupted,
    /// The process is killed on leaving (Riemann-Liouville type); the
    /// boundary values are zero.
    Killed,
}

/// `(A - λ) f = g` on `(a, b)`, `f(a) = f_a`, `f(b) = f_b`.
#[derive(Clone)]
pub struct BvpProblem<T> {
    pub spec: GeneratorSpec<T>,
    pub region: Region<T>,
    pub f_a: T,
    pub f_b: T,
    pub g: ScalarFunction<T>,
    pub lambda: T,
    pub operator: BoundaryOperator,
}

impl<T: Real> fmt::Debug for BvpProblem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BvpProblem")
            .field("spec", &self.spec)
            .field("region", &self.region)
            .field("f_a", &self.f_a)
            .field("f_b", &self.f_b)
            .field("lambda", &self.lambda)
            .field("operator", &self.operator)
            .finish()
    }
}

impl<T: Real> BvpProblem<T> {
    pub fn new(spec: GeneratorSpec<T>, a: T, b: T, f_a: T, f_b: T, g: ScalarFunction<T>, lambda: T) -> Result<Self> {
        let problem = Self {
            spec,
            region: Region::interval(a, b)?,
            f_a,
            f_b,
            g,
            lambda,
            operator: BoundaryOperator::Interrupted,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_operator(mut self, operator: BoundaryOperator) -> Self {
        self.operator = operator;
        self
    }

    pub fn bounds(&self) -> (T, T) {
        match self.region {
            Region::Interval { a, b } => (a, b),
            _ => (T::nan(), T::nan()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let Region::Interval { a, b } = self.region else {
            return Err(Error::InvalidParameter("boundary value problems are posed on an interval".into()));
        };
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!("need a finite interval, got [{a}, {b}]")));
        }
        if self.spec.dim() != 1 {
            return Err(Error::InvalidParameter("boundary value problems need a one-dimensional kernel".into()));
        }
        if self.spec.diffusion.is_some() {
            return Err(Error::InvalidParameter("a diffusion component is not supported".into()));
        }
        if !(self.lambda >= T::zero() && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("λ must be nonnegative, got {}", self.lambda)));
        }
        if self.operator == BoundaryOperator::Killed && (self.f_a != T::zero() || self.f_b != T::zero()) {
            return Err(Error::InvalidParameter("killed problems have zero boundary values".into()));
        }
        Ok(())
    }

    /// Boundary value attained on exit through the lower or upper end.
    pub(crate) fn boundary_values(&self) -> (T, T) {
        match self.operator {
            BoundaryOperator::Interrupted => (self.f_a, self.f_b),
            BoundaryOperator::Killed => (T::zero(), T::zero()),
        }
    }
}

/// Route that produced a [`SolutionTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MonteCarlo,
    Collocation,
    ClosedForm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::MonteCarlo => "mc",
            Method::Collocation => "collocation",
            Method::ClosedForm => "closed-form",
        })
    }
}

/// Solution values on a grid, with standard errors (zero for the
/// deterministic routes).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTable<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub se: Vec<T>,
    pub method: Method,
    /// Max-norm residual of the linear system (collocation only).
    pub residual: T,
}

impl<T: Real> SolutionTable<T> {
    /// Piecewise-linear interpolation of the values; `x` must lie within
    /// the grid.
    pub fn interpolate(&self, x: T) -> Result<T> {
        let n = self.grid.len();
        if n == 0 || !(x >= self.grid[0] && x <= self.grid[n - 1]) {
            return Err(Error::Domain { what: "interpolation point outside the grid", value: x.to_f64_lossy() });
        }
        let i = self.grid.partition_point(|&g| g < x);
        if i == 0 {
            return Ok(self.values[0]);
        }
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let w = (x - x0) / (x1 - x0);
        Ok(self.values[i - 1] + (self.values[i] - self.values[i - 1]) * w)
    }

    /// Largest violation of `f ≥ min(f_a, f_b)`, zero when the bound
    /// holds everywhere. For `g ≤ 0` and `λ = 0` the representation forces
    /// the bound.
    pub fn minimum_violation(&self, f_a: T, f_b: T) -> T {
        let floor = f_a.min(f_b);
        self.values.iter().fold(T::zero(), |m, &v| m.max(floor - v))
    }
}

/// Closed-form solution for the symmetric `β`-stable kernel
/// (characteristic exponent `|k|^β`) on `[-1, 1]` with `λ = 0`:
/// `f(x) = f_a (1 - p(x)) + f_b p(x) - ∫ g(y) H(x, y) dy`.
pub fn solve_bvp_closed_form<T: Real>(
    beta: T,
    f_a: T,
    f_b: T,
    g: &ScalarFunction<T>,
    grid: &[T],
) -> Result<SolutionTable<T>> {
    let mut values = Vec::with_capacity(grid.len());
    for &x in grid {
        if !(x.abs() <= T::one()) {
            return Err(Error::Domain { what: "closed forms are stated on [-1, 1]", value: x.to_f64_lossy() });
        }
        let v = if x == -T::one() {
            f_a
        } else if x == T::one() {
            f_b
        } else {
            let p = stable_exit_prob(beta, x)?;
            f_a * (T::one() - p) + f_b * p - occupation_integral(beta, g, x)?
        };
        values.push(v);
    }
    Ok(SolutionTable {
        grid: grid.to_vec(),
        se: vec![T::zero(); grid.len()],
        values,
        method: Method::ClosedForm,
        residual: T::zero(),
    })
}

/// `∫_{-1}^{1} g(y) H(x, y) dy`, each side of `x` integrated in the
/// variable `w` with `|y - x| = w^p`, which removes the `|x-y|^{β-1}`
/// (or logarithmic) singularity.
fn occupation_integral<T: Real>(beta: T, g: &ScalarFunction<T>, x: T) -> Result<T> {
    let p: T = if beta < T::one() { T::one() / beta } else { lit(2.0) };
    let failure = std::cell::RefCell::new(None);
    let mut total = T::zero();
    for (s, span) in [(-T::one(), x + T::one()), (T::one(), T::one() - x)] {
        if span <= T::zero() {
            continue;
        }
        let integrand = |w: T| {
            if w <= T::zero() {
                return T::zero();
            }
            let u = w.powf(p);
            let y = (x + s * u).max(-T::one()).min(T::one());
            match stable_occupation_density(beta, x, y) {
                Ok(h) => g.eval(y) * h * p * w.powf(p - T::one()),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    T::zero()
                }
            }
        };
        total = total + quad::adaptive(integrand, T::zero(), span.powf(T::one() / p), lit(1e-13), lit(1e-11)).value;
    }
    match failure.into_inner() {
        Some(e) if !matches!(e, Error::Singularity) => Err(e),
        _ => Ok(total),
    }
}

/// Classical solution `f_a E_β(-λ (x-a)^β)` of the relaxation equation
/// `D^β_{a+⋆} f = -λ f`, `f(a) = f_a`, for `β ∈ (0, 1)`.
pub fn relaxation_solution<T: Real>(beta: T, lambda: T, a: T, f_a: T, x: T) -> Result<T> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(Error::InvalidParameter(format!("relaxation order must lie in (0, 1), got {beta}")));
    }
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
    }
    if !(x >= a) {
        return Err(Error::Domain { what: "relaxation solution needs x ≥ a", value: x.to_f64_lossy() });
    }
    Ok(f_a * mittag_leffler(beta, -lambda * (x - a).powf(beta))?)
}

/// Rewrites the interrupted problem for `f` as the killed problem for
/// `φ = f - v`: zero boundary values and source `g + λ v - A⋆ v`, where
/// `v` matches the boundary data.
pub fn reduce_caputo_to_rl<T: Real>(problem: &BvpProblem<T>, v: &ScalarFunction<T>) -> Result<BvpProblem<T>> {
    problem.validate()?;
    let (a, b) = problem.bounds();
    let tol: T = lit(1e-12);
    for (x, want) in [(a, problem.f_a), (b, problem.f_b)] {
        let got = v.eval(x);
        if !((got - want).abs() <= tol * T::one().max(want.abs())) {
            return Err(Error::BoundaryMismatch(format!("v({x}) = {got}, boundary value {want}")));
        }
    }
    // fail early rather than inside the source closure
    apply_interrupted(&problem.spec, &problem.region, v, (a + b) * lit(0.5))?;
    let (spec, region, g, v) = (problem.spec.clone(), problem.region.clone(), problem.g.clone(), v.clone());
    let lambda = problem.lambda;
    let source = move |x: T| {
        let av = apply_interrupted(&spec, &region, &v, x).unwrap_or_else(|_| T::nan());
        g.eval(x) + lambda * v.eval(x) - av
    };
    Ok(BvpProblem {
        spec: problem.spec.clone(),
        region: problem.region.clone(),
        f_a: T::zero(),
        f_b: T::zero(),
        g: ScalarFunction::new(source, Smoothness::Continuous),
        lambda,
        operator: BoundaryOperator::Killed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::JumpKernel;
    use crate::specfun::stable_mean_exit_time;

    #[test]
    fn closed_form_mean_exit_time() {
        let g = ScalarFunction::constant(1.0f64);
        for beta in [0.5, 1.0, 1.5] {
            let t = solve_bvp_closed_form(beta, 0.0, 0.0, &g, &[-0.7, 0.0, 0.3, 0.95]).unwrap();
            for (x, v) in t.grid.iter().zip(&t.values) {
                let exact = stable_mean_exit_time(beta, *x).unwrap();
                assert!((v + exact).abs() < 1e-8, "β={beta} x={x}: {v} vs {}", -exact);
            }
        }
    }

    #[test]
    fn closed_form_boundary_values() {
        let g = ScalarFunction::constant(0.0f64);
        let t = solve_bvp_closed_form(0.5, 2.0, -1.0, &g, &[-1.0, 0.0, 1.0]).unwrap();
        assert_eq!(t.values[0], 2.0);
        assert_eq!(t.values[2], -1.0);
        assert!((t.values[1] - 0.5).abs() < 1e-12);
        assert!(solve_bvp_closed_form(0.5, 0.0, 0.0, &g, &[1.5]).is_err());
    }

    #[test]
    fn relaxation_limits() {
        assert_eq!(relaxation_solution(0.5, 1.0, 0.0, 3.0, 0.0).unwrap(), 3.0);
        let v = relaxation_solution(0.999, 1.0, 0.0, 1.0, 0.7).unwrap();
        assert!((v - (-0.7f64).exp()).abs() < 1e-2);
        assert!(relaxation_solution(1.0, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(relaxation_solution(0.5, 1.0, 0.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn reduction_checks_boundary_data() {
        let spec = GeneratorSpec::new(JumpKernel::stable_symmetric(0.5f64, 1).unwrap());
        let p = BvpProblem::new(spec, 0.0, 1.0, 1.0, 2.0, ScalarFunction::constant(0.0), 0.0).unwrap();
        let bad = ScalarFunction::smooth(|x: f64| 1.0 + x * 0.5);
        assert!(matches!(reduce_caputo_to_rl(&p, &bad), Err(Error::BoundaryMismatch(_))));
        let good = ScalarFunction::smooth(|x: f64| 1.0 + x).with_derivative(|_| 1.0).with_second_derivative(|_| 0.0);
        let r = reduce_caputo_to_rl(&p, &good).unwrap();
        assert_eq!(r.operator, BoundaryOperator::Killed);
        assert_eq!((r.f_a, r.f_b), (0.0, 0.0));
    }
}
