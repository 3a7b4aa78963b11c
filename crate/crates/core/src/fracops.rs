//! Fractional integrals and the Riemann-Liouville / Caputo derivatives of
//! order `β ∈ (0,1) ∪ (1,2)`, right- and left-sided, evaluated through their
//! singular-integral (difference quotient) representations.
//!
//! With `L = |x - anchor|` and `s = -1` for the right derivative (anchor
//! below `x`), `s = +1` for the left one, every derivative is
//!
//! ```text
//! 1/Γ(-β) ∫_0^L [f(x+sz) - f(x) - s f'(x) z 1{β>1}] z^{-1-β} dz + boundary terms
//! ```
//!
//! The integral is split at a tiny radius `z0`: below it the numerator is
//! replaced by its second-order Taylor polynomial and integrated exactly,
//! above it a geometric mesh graded towards `z0` is used.

use crate::error::{Error, Result};
use crate::function::{ScalarFunction, Smoothness};
use crate::quad;
use crate::scalar::{lit, Real};
use crate::specfun::gamma;

/// Order of a fractional derivative: `β ∈ (0,1) ∪ (1,2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FracOrder<T>(T);

impl<T: Real> FracOrder<T> {
    pub fn new(beta: T) -> Result<Self> {
        if beta > T::zero() && beta < lit(2.0) && beta != T::one() {
            Ok(Self(beta))
        } else {
            Err(Error::Domain { what: "fractional order must lie in (0,1) ∪ (1,2)", value: beta.to_f64_lossy() })
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    #[inline]
    pub fn below_one(self) -> bool {
        self.0 < T::one()
    }
}

/// Side of a one-sided operator. `Right` is anchored below the evaluation
/// point (`D_{a+}`, `x > a`); `Left` is anchored above it (`D_{b-}`, `x < b`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    /// Direction in which the difference quotient looks: `-1` or `+1`.
    fn direction<T: Real>(self) -> T {
        match self {
            Side::Right => -T::one(),
            Side::Left => T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    RiemannLiouville,
    Caputo,
}

/// One term `ω D^β f` of a mixed operator, `β ∈ (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedTerm<T> {
    pub weight: T,
    pub order: FracOrder<T>,
    pub side: Side,
    pub anchor: T,
}

impl<T: Real> MixedTerm<T> {
    pub fn new(weight: T, beta: T, side: Side, anchor: T) -> Result<Self> {
        let order = FracOrder::new(beta)?;
        if !order.below_one() {
            return Err(Error::InvalidParameter(format!("mixed terms need β < 1, got {beta}")));
        }
        if !(weight > T::zero()) {
            return Err(Error::InvalidParameter(format!("mixed term weight must be positive, got {weight}")));
        }
        Ok(Self { weight, order, side, anchor })
    }
}

const QUAD_TOL: f64 = 1e-11;

/// `∫_0^{z0} [s f' z 1{β<1} + f'' z²/2 + s f''' z³/6] z^{-1-β} dz`.
fn taylor_head<T: Real>(beta: T, s: T, d1: T, d2: Option<T>, d3: Option<T>, z0: T) -> T {
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let mut head = T::zero();
    if beta < T::one() {
        head = head + s * d1 * z0.powf(T::one() - beta) / (T::one() - beta);
    }
    if let Some(d2) = d2 {
        head = head + d2 * z0.powf(two - beta) / (two * (two - beta));
    }
    if let Some(d3) = d3 {
        head = head + s * d3 * z0.powf(three - beta) / (lit::<T>(6.0) * (three - beta));
    }
    head
}

/// `∫_0^L [f(x+sz) - f(x) - s f'(x) z 1{β>1}] z^{-1-β} dz` for finite `L`.
///
/// Below a radius `z0` the numerator is replaced by its Taylor polynomial.
/// `z0` balances round-off in the difference quotient against the Taylor
/// remainder; for `β > 1` a third-order term is kept and `z0` is larger.
fn difference_integral<T: Real>(f: &ScalarFunction<T>, beta: T, x: T, s: T, span: T) -> T {
    let fx = f.eval(x);
    let d1 = f.derivative(x);
    let second_order = f.smoothness() >= Smoothness::C2;
    let compensate = beta > T::one();
    let d2 = second_order.then(|| f.second_derivative(x));
    let d3 = (second_order && compensate).then(|| f.third_derivative(x));
    let base: T = match (second_order, compensate) {
        (true, true) => lit(1e-3),
        (true, false) => lit(1e-5),
        _ => lit(1e-8),
    };
    let z0 = base.min(span * lit(0.1));
    let numerator = |z: T| {
        let mut n = f.eval(x + s * z) - fx;
        if compensate {
            n = n - s * d1 * z;
        }
        n * z.powf(-T::one() - beta)
    };
    taylor_head(beta, s, d1, d2, d3, z0) + quad::graded_towards_lower(numerator, z0, span, lit(QUAD_TOL))
}

/// Riemann-Liouville fractional integral `I^β_{a+} f(x)`, `β > 0`.
pub fn frac_integral<T: Real>(f: &ScalarFunction<T>, a: T, beta: T, x: T) -> Result<T> {
    if !(x > a) {
        return Err(Error::Domain { what: "fractional integral needs x > a", value: x.to_f64_lossy() });
    }
    if !(beta > T::zero()) {
        return Err(Error::Domain { what: "integration order must be positive", value: beta.to_f64_lossy() });
    }
    let span = x - a;
    // (1/Γ(β)) ∫_0^L s^{β-1} f(x-s) ds, graded towards the weight's singularity
    let s0 = span * lit(1e-14);
    let head = f.eval(x) * s0.powf(beta) / beta;
    let body = quad::graded_towards_lower(|s: T| s.powf(beta - T::one()) * f.eval(x - s), s0, span, lit(1e-13));
    Ok((head + body) / gamma(beta)?)
}

fn check_side<T: Real>(anchor: T, x: T, side: Side) -> Result<T> {
    let span = match side {
        Side::Right => x - anchor,
        Side::Left => anchor - x,
    };
    if !(span > T::zero()) || !span.is_finite() {
        return Err(Error::Domain {
            what: match side {
                Side::Right => "right derivative needs x > anchor",
                Side::Left => "left derivative needs x < anchor",
            },
            value: x.to_f64_lossy(),
        });
    }
    Ok(span)
}

fn check_smoothness<T: Real>(f: &ScalarFunction<T>, order: FracOrder<T>) -> Result<()> {
    let needed = if order.below_one() { Smoothness::C1 } else { Smoothness::C2 };
    if f.smoothness() < needed {
        return Err(Error::Smoothness(f.smoothness()));
    }
    Ok(())
}

/// Riemann-Liouville or Caputo derivative of order `β` anchored at
/// `anchor`, on the given side, at `x`.
pub fn frac_derivative<T: Real>(
    f: &ScalarFunction<T>,
    anchor: T,
    order: FracOrder<T>,
    x: T,
    kind: Kind,
    side: Side,
) -> Result<T> {
    let span = check_side(anchor, x, side)?;
    check_smoothness(f, order)?;
    let beta = order.value();
    let s: T = side.direction();
    let integral = difference_integral(f, beta, x, s, span) / gamma(-beta)?;

    let fx = f.eval(x);
    let f_anchor = match kind {
        Kind::RiemannLiouville => T::zero(),
        Kind::Caputo => f.eval(anchor),
    };
    let mut value = integral + (fx - f_anchor) * span.powf(-beta) / gamma(T::one() - beta)?;
    if !order.below_one() {
        let d_anchor = match kind {
            Kind::RiemannLiouville => T::zero(),
            Kind::Caputo => f.derivative(anchor),
        };
        value = value - s * (beta * f.derivative(x) - d_anchor) * span.powf(T::one() - beta) / gamma(lit::<T>(2.0) - beta)?;
    }
    Ok(value)
}

/// Whole-line derivative in generator form: `d^β/dx^β` (`Side::Right`) or
/// `d^β/d(-x)^β` (`Side::Left`), the common value of the RL and Caputo
/// derivatives with the anchor sent to `∓∞`.
pub fn generator_derivative<T: Real>(f: &ScalarFunction<T>, order: FracOrder<T>, x: T, side: Side) -> Result<T> {
    check_smoothness(f, order)?;
    let beta = order.value();
    let s: T = side.direction();
    let one = T::one();
    // [0, 1] with the singular treatment, then (f(x+sz) - f(x)) z^{-1-β} on
    // [1, R] in the variable u = ln z, then f taken constant beyond R.
    let core = difference_integral(f, beta, x, s, one);
    let fx = f.eval(x);
    let radius: T = lit(1e9);
    let far = quad::adaptive(
        |u: T| (f.eval(x + s * u.exp()) - fx) * (-beta * u).exp(),
        T::zero(),
        radius.ln(),
        lit(1e-11),
        lit(1e-11),
    )
    .value;
    let mut comp = T::zero();
    if beta > one {
        comp = -s * f.derivative(x) / (beta - one);
    }
    let f_far = f.eval(x + s * radius);
    let tail = (f_far - fx) * radius.powf(-beta) / beta;
    let drift = (f_far - f.eval(x + s * radius * lit(0.125))).abs() * radius.powf(-beta) / beta;
    if !(drift < lit(1e-9)) {
        return Err(Error::NonConvergence(format!("generator-form tail does not settle: variation {drift} beyond {radius}")));
    }
    Ok((core + far + comp + tail) / gamma(-beta)?)
}

/// `-Σ ω_j D^{β_j}_{a_j+⋆} f(x) - Σ γ_j D^{β_j}_{b_j-⋆} f(x)`, the left-hand
/// side of the mixed two-sided Caputo problem.
pub fn mixed_operator<T: Real>(f: &ScalarFunction<T>, terms: &[MixedTerm<T>], x: T) -> Result<T> {
    terms.iter().try_fold(T::zero(), |acc, term| {
        let d = frac_derivative(f, term.anchor, term.order, x, Kind::Caputo, term.side)?;
        Ok(acc - term.weight * d)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(b: f64) -> FracOrder<f64> {
        FracOrder::new(b).unwrap()
    }

    #[test]
    fn order_rejects_integers_and_out_of_range() {
        for b in [0.0, 1.0, 2.0, -0.5, 2.5] {
            assert!(FracOrder::new(b).is_err());
        }
    }

    #[test]
    fn integral_of_constant_and_monomial() {
        let one = ScalarFunction::constant(1.0f64);
        let v = frac_integral(&one, 0.0, 0.5, 1.0).unwrap();
        assert!((v - 1.128_379_167_095_512_6).abs() < 1e-10);
        let v = frac_integral(&one, 0.0, 1.0, 2.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(frac_integral(&one, 1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let c = ScalarFunction::constant(3.5);
        for b in [0.3, 0.7, 1.2, 1.8] {
            for side in [Side::Right, Side::Left] {
                let anchor = if side == Side::Right { -1.0 } else { 2.0 };
                let v = frac_derivative(&c, anchor, order(b), 0.4, Kind::Caputo, side).unwrap();
                assert!(v.abs() < 1e-12, "beta={b} side={side:?}: {v}");
            }
        }
    }

    #[test]
    fn rl_of_constant_is_power() {
        let c = 2.0;
        let f = ScalarFunction::constant(c);
        for b in [0.25, 0.5, 0.9] {
            let v = frac_derivative(&f, 0.0, order(b), 1.7, Kind::RiemannLiouville, Side::Right).unwrap();
            let expect = c / (gamma(1.0 - b).unwrap() * 1.7f64.powf(b));
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn caputo_of_linear_function() {
        let f = ScalarFunction::smooth(|x: f64| x);
        let v = frac_derivative(&f, 0.0, order(0.5), 1.0, Kind::Caputo, Side::Right).unwrap();
        assert!((v - 1.128_379_167_095_512_6).abs() < 1e-9);
    }

    #[test]
    fn wrong_side_and_smoothness_errors() {
        let f = ScalarFunction::smooth(|x: f64| x);
        assert!(frac_derivative(&f, 1.0, order(0.5), 0.5, Kind::Caputo, Side::Right).is_err());
        assert!(frac_derivative(&f, 0.0, order(0.5), 0.5, Kind::Caputo, Side::Left).is_err());
        let c1 = ScalarFunction::new(|x: f64| x.abs().powf(1.5), Smoothness::C1);
        assert_eq!(
            frac_derivative(&c1, 0.0, order(1.5), 0.5, Kind::Caputo, Side::Right),
            Err(Error::Smoothness(Smoothness::C1))
        );
        assert!(frac_derivative(&c1, 0.0, order(0.5), 0.5, Kind::Caputo, Side::Right).is_ok());
    }

    #[test]
    fn generator_form_of_constant_vanishes() {
        let c = ScalarFunction::constant(1.0);
        for b in [0.5, 1.5] {
            for side in [Side::Right, Side::Left] {
                let v = generator_derivative(&c, order(b), 0.3, side).unwrap();
                assert!(v.abs() < 1e-10, "beta={b}: {v}");
            }
        }
    }

    #[test]
    fn generator_form_rejects_non_decaying_tail() {
        let f = ScalarFunction::smooth(|x: f64| x * x * x);
        assert!(generator_derivative(&f, order(0.5), 0.0, Side::Right).is_err());
    }

    #[test]
    fn mixed_operator_single_term_and_constant() {
        let f = ScalarFunction::smooth(|x: f64| (x * 0.8).sin());
        let term = MixedTerm::new(1.0, 0.5, Side::Right, -1.0).unwrap();
        let m = mixed_operator(&f, &[term], 0.2).unwrap();
        let d = frac_derivative(&f, -1.0, order(0.5), 0.2, Kind::Caputo, Side::Right).unwrap();
        assert_eq!(m, -d);
        let c = ScalarFunction::constant(4.0);
        let terms = [term, MixedTerm::new(2.0, 0.3, Side::Left, 1.0).unwrap()];
        assert!(mixed_operator(&c, &terms, 0.0).unwrap().abs() < 1e-12);
        assert!(MixedTerm::new(1.0, 1.5, Side::Left, 1.0).is_err());
        assert!(MixedTerm::new(0.0, 0.5, Side::Left, 1.0).is_err());
    }

    #[test]
    fn mixed_operator_symmetric_terms_on_even_function() {
        let f = ScalarFunction::smooth(|x: f64| (-x * x).exp());
        let right = MixedTerm::new(1.0, 0.5, Side::Right, -1.0).unwrap();
        let left = MixedTerm::new(1.0, 0.5, Side::Left, 1.0).unwrap();
        let both = mixed_operator(&f, &[right, left], 0.0).unwrap();
        let one = mixed_operator(&f, &[right], 0.0).unwrap();
        let other = mixed_operator(&f, &[left], 0.0).unwrap();
        assert!((one - other).abs() < 1e-12);
        assert!((both - 2.0 * one).abs() < 1e-12);
    }
}
