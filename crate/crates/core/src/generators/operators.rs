use super::kernel::JumpKernel;
use super::region::{ray_length, Region};
use super::{GeneratorSpec, Mollifier, OrderClass};
use crate::error::{Error, Result};
use crate::function::{PointFunction, ScalarFunction, Smoothness};
use crate::quad;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Boundary {
    Interrupted,
    Killed,
}

/// `∫_lo^∞ z χ(z) ν(x, s z) dz`.
pub(crate) fn mollified_first_moment<T: Real>(kernel: &JumpKernel<T>, mollifier: Mollifier, x: T, s: T, lo: T) -> T {
    match mollifier {
        Mollifier::Full => kernel.side_moment(x, s, 1, lo, T::infinity()),
        Mollifier::Indicator => {
            if lo < T::one() {
                kernel.side_moment(x, s, 1, lo, T::one())
            } else {
                T::zero()
            }
        }
        Mollifier::Cauchy => kernel.radial_integral(&[x], &[s], lo, T::infinity(), |z| z / (T::one() + z * z)),
    }
}

/// Jump part of the one-dimensional interval operators from one side of
/// `x`: jumps in direction `s` over a distance `span` to the boundary.
#[allow(clippy::too_many_arguments)]
fn side_contribution<T: Real>(
    spec: &GeneratorSpec<T>,
    f: &ScalarFunction<T>,
    x: T,
    s: T,
    span: T,
    boundary: Boundary,
    regularize: bool,
    d1: T,
) -> T {
    let kernel = &spec.kernel;
    if !kernel.charges_side(s) || span == T::zero() {
        return T::zero();
    }
    let compensated = kernel.order_class() == OrderClass::Compensated;
    let chi = spec.mollifier;
    let fx = f.eval(x);
    let base: T = if compensated { lit(1e-4) } else { lit(1e-5) };
    let z0 = if span.is_finite() { base.min(span * lit(0.1)) } else { base };

    let mut head = T::zero();
    if !compensated {
        head = s * d1 * kernel.side_moment(x, s, 1, T::zero(), z0);
    }
    if f.smoothness() >= Smoothness::C2 {
        head = head + f.second_derivative(x) * lit(0.5) * kernel.side_moment(x, s, 2, T::zero(), z0);
    }
    let body = kernel.radial_integral(&[x], &[s], z0, span, |z| {
        let mut v = f.eval(x + s * z) - fx;
        if compensated {
            v = v - d1 * s * z * chi.weight(z);
        }
        v
    });
    let mut total = head + body;
    if span.is_finite() {
        let bdry = x + s * span;
        let f_b = match boundary {
            Boundary::Interrupted => f.eval(bdry),
            Boundary::Killed => T::zero(),
        };
        let escape = kernel.side_moment(x, s, 0, span, T::infinity());
        total = total + (f_b - fx) * escape;
        if compensated {
            let m1 = mollified_first_moment(kernel, chi, x, s, span);
            total = total - d1 * s * m1;
            if regularize {
                total = total - f.derivative(bdry) * s * (span * escape - m1);
            }
        }
    }
    total
}

fn interval_operator<T: Real>(
    spec: &GeneratorSpec<T>,
    a: T,
    b: T,
    f: &ScalarFunction<T>,
    x: T,
    boundary: Boundary,
    regularize: bool,
) -> Result<T> {
    if spec.dim() != 1 {
        return Err(Error::InvalidParameter("interval operators need a one-dimensional kernel".into()));
    }
    let needed = match spec.order_class() {
        OrderClass::BoundedVariation => Smoothness::C1,
        OrderClass::Compensated => Smoothness::C2,
    };
    if f.smoothness() < needed {
        return Err(Error::Smoothness(f.smoothness()));
    }
    let inside = match boundary {
        Boundary::Interrupted => x >= a && x <= b,
        Boundary::Killed => x > a && x < b,
    };
    if !inside || !x.is_finite() {
        return Err(Error::Domain { what: "evaluation point outside the interval", value: x.to_f64_lossy() });
    }
    let d1 = f.derivative(x);
    let mut value = spec.drift.at_1d(x) * d1;
    let g = spec.diffusion_at(&[x]);
    if g != T::zero() {
        value = value + g * f.second_derivative(x);
    }
    for (s, span) in [(-T::one(), x - a), (T::one(), b - x)] {
        value = value + side_contribution(spec, f, x, s, span, boundary, regularize, d1);
    }
    if !value.is_finite() {
        return Err(Error::NonConvergence(format!("interval operator at x = {x} is not finite")));
    }
    Ok(value)
}

/// Generator of the process whose jumps are interrupted on an attempt to
/// cross the boundary of an interval (or of the enclosing checkpoints):
///
/// `γ f'(x) + ∫_{a-x}^{b-x} (f(x+y) - f(x)) ν(x,y) dy
///  + (f(b) - f(x)) ∫_{b-x}^∞ ν + (f(a) - f(x)) ∫_{-∞}^{a-x} ν`.
pub fn apply_interrupted<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    f: &ScalarFunction<T>,
    x: T,
) -> Result<T> {
    spec.require_class(OrderClass::BoundedVariation)?;
    let (a, b) = region
        .enclosing_interval(x)
        .ok_or_else(|| Error::InvalidParameter("use apply_interrupted_multi for multidimensional regions".into()))?;
    interval_operator(spec, a, b, f, x, Boundary::Interrupted, false)
}

/// Check-point generator: jumps crossing a road block are stopped at the
/// first block crossed.
pub fn apply_checkpoint<T: Real>(
    spec: &GeneratorSpec<T>,
    blocks: &Region<T>,
    f: &ScalarFunction<T>,
    x: T,
) -> Result<T> {
    if !matches!(blocks, Region::Checkpoints(_)) {
        return Err(Error::InvalidParameter("apply_checkpoint needs a checkpoint set".into()));
    }
    apply_interrupted(spec, blocks, f, x)
}

/// Generator of the process killed on the first jump leaving `[a, b]`.
/// For compensated kernels the compensator of the escaping jumps is kept.
pub fn apply_killed<T: Real>(spec: &GeneratorSpec<T>, region: &Region<T>, f: &ScalarFunction<T>, x: T) -> Result<T> {
    let Region::Interval { a, b } = *region else {
        return Err(Error::InvalidParameter("killed operator is defined on intervals".into()));
    };
    interval_operator(spec, a, b, f, x, Boundary::Killed, false)
}

/// Interrupted operator for compensated kernels. Unregularized, this is
/// `Ã`, which blows up at an endpoint where `f'` does not vanish; the
/// regularized form subtracts the `f'(a)`, `f'(b)` terms and stays finite.
pub fn apply_interrupted_order2<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    f: &ScalarFunction<T>,
    x: T,
    regularized: bool,
) -> Result<T> {
    spec.require_class(OrderClass::Compensated)?;
    let Region::Interval { a, b } = *region else {
        return Err(Error::InvalidParameter("order-two operator is defined on intervals".into()));
    };
    if !(x > a && x < b) {
        return Err(Error::Domain { what: "evaluation point must be interior", value: x.to_f64_lossy() });
    }
    interval_operator(spec, a, b, f, x, Boundary::Interrupted, regularized)
}

/// Interrupted generator on a half-space, band or ball in `R^2` or `R^3`:
/// `(γ, ∇f) + ∫ [f(R(x,y)) - f(x)] ν(x,y) dy` with `R` the ray projection.
/// The jump integral is computed in polar coordinates, each ray split at
/// its boundary distance so that the boundary atom is integrated exactly.
pub fn apply_interrupted_multi<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    f: &PointFunction<T>,
    x: &[T],
) -> Result<T> {
    spec.require_class(OrderClass::BoundedVariation)?;
    let n = region.dimension();
    if n < 2 || matches!(region, Region::Interval { .. } | Region::Checkpoints(_)) {
        return Err(Error::InvalidParameter("use apply_interrupted for one-dimensional regions".into()));
    }
    if n > 3 {
        return Err(Error::InvalidParameter("deterministic evaluation is limited to dimension 3".into()));
    }
    if spec.dim() != n || f.dim() != n || x.len() != n {
        return Err(Error::InvalidParameter("dimension mismatch between kernel, function, region and point".into()));
    }
    if !region.contains_closed(x) {
        return Err(Error::Domain { what: "point outside the closed region", value: x[0].to_f64_lossy() });
    }
    let kernel = &spec.kernel;
    let fx = f.eval(x);
    let grad = f.gradient(x);
    let drift = spec.drift.at(x);
    let drift_term = drift.iter().zip(&grad).fold(T::zero(), |s, (&g, &d)| s + g * d);

    let along = |e: &[T]| -> T {
        let ell = ray_length(region, x, e);
        if ell == T::zero() {
            return T::zero();
        }
        let z0 = lit::<T>(1e-5).min(ell * lit(0.1));
        let de = grad.iter().zip(e).fold(T::zero(), |s, (&g, &ei)| s + g * ei);
        let head = de * kernel.radial_moment(x, e, 1, T::zero(), z0);
        let point = |rho: T| -> Vec<T> { x.iter().zip(e).map(|(&xi, &ei)| xi + rho * ei).collect() };
        let body = kernel.radial_integral(x, e, z0, ell, |rho| f.eval(&point(rho)) - fx);
        let mut total = head + body;
        if ell.is_finite() {
            let mut p = point(ell);
            snap_to_boundary(region, &mut p, e);
            total = total + (f.eval(&p) - fx) * kernel.radial_moment(x, e, 0, ell, T::infinity());
        }
        total
    };

    let tol: T = lit(1e-10);
    let pi = T::PI();
    let half_pi = pi * lit(0.5);
    let jump = if n == 2 {
        let g = |theta: T| along(&[theta.cos(), theta.sin()]);
        (0..4)
            .map(|k| {
                let lo = half_pi * lit(k as f64);
                quad::adaptive(&g, lo, lo + half_pi, tol, tol).value
            })
            .fold(T::zero(), |s, v| s + v)
    } else {
        let shell = |phi: T| {
            let (sp, cp) = phi.sin_cos();
            let ring = |psi: T| {
                let (ss, cs) = psi.sin_cos();
                along(&[cp, sp * cs, sp * ss])
            };
            let inner = quad::adaptive(&ring, T::zero(), pi, tol, lit(1e-8)).value
                + quad::adaptive(&ring, pi, pi + pi, tol, lit(1e-8)).value;
            inner * sp
        };
        quad::adaptive(&shell, T::zero(), half_pi, tol, lit(1e-8)).value
            + quad::adaptive(&shell, half_pi, pi, tol, lit(1e-8)).value
    };
    let value = drift_term + jump;
    if !value.is_finite() {
        return Err(Error::NonConvergence("multidimensional jump integral is not finite".into()));
    }
    Ok(value)
}

fn snap_to_boundary<T: Real>(region: &Region<T>, p: &mut [T], e: &[T]) {
    match region {
        Region::HalfSpace { b, .. } => p[0] = *b,
        Region::Band { a, b, .. } => p[0] = if e[0] > T::zero() { *b } else { *a },
        Region::Ball { radius, .. } => {
            let r = super::kernel::norm(p);
            if r > T::zero() {
                p.iter_mut().for_each(|v| *v = *v * (*radius / r));
            }
        }
        _ => {}
    }
}
