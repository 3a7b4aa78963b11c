//! Special functions: Gamma, the one-parameter Mittag-Leffler function, and
//! the closed-form exit law and occupation density of the symmetric stable
//! process on `[-1, 1]`.

use crate::error::{Error, Result};
use crate::quad;
use crate::scalar::{lit, Real};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi x)` with exact zeros at the integers.
fn sin_pi<T: Real>(x: T) -> T {
    let two: T = lit(2.0);
    let mut r = x % two;
    if r < T::zero() {
        r = r + two;
    }
    // r in [0, 2)
    if r == T::zero() || r == T::one() {
        return T::zero();
    }
    let (s, r) = if r > T::one() { (-T::one(), r - T::one()) } else { (T::one(), r) };
    let r = if r > lit(0.5) { T::one() - r } else { r };
    s * (T::PI() * r).sin()
}

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.floor()
}

fn lanczos_sum<T: Real>(xm1: T) -> T {
    let mut a: T = lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + lit::<T>(c) / (xm1 + T::from_usize_lossy(i));
    }
    a
}

/// Euler's Gamma function.
///
/// Lanczos approximation for `x >= 1/2`, reflection below.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if x.is_nan() {
        return Err(Error::Domain { what: "gamma of NaN", value: f64::NAN });
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x.to_f64_lossy()));
    }
    if x < lit(0.5) {
        let g = gamma(T::one() - x)?;
        return Ok(T::PI() / (sin_pi(x) * g));
    }
    let xm1 = x - T::one();
    let t = xm1 + lit(LANCZOS_G + 0.5);
    let sqrt_2pi: T = lit((2.0 * std::f64::consts::PI).sqrt());
    // split the power to postpone overflow for large x
    let half_pow = t.powf((xm1 + lit(0.5)) * lit(0.5));
    Ok(sqrt_2pi * half_pow * ((-t).exp() * half_pow) * lanczos_sum(xm1))
}

/// `ln |Γ(x)|`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x.to_f64_lossy()));
    }
    if x < lit(0.5) {
        let lg = ln_gamma(T::one() - x)?;
        return Ok(T::PI().ln() - sin_pi(x).abs().ln() - lg);
    }
    let xm1 = x - T::one();
    let t = xm1 + lit(LANCZOS_G + 0.5);
    let half_ln_2pi: T = lit(0.5 * (2.0 * std::f64::consts::PI).ln());
    Ok(half_ln_2pi + (xm1 + lit(0.5)) * t.ln() - t + lanczos_sum(xm1).ln())
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn recip_gamma<T: Real>(x: T) -> T {
    gamma(x).map(|g| T::one() / g).unwrap_or_else(|_| T::zero())
}

fn check_ml_order<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero() && beta <= lit(2.0)) {
        return Err(Error::Domain { what: "Mittag-Leffler order must lie in (0, 2]", value: beta.to_f64_lossy() });
    }
    Ok(())
}

/// Largest term magnitude (log) of the Mittag-Leffler series at `|z|`.
fn ml_peak_log_term<T: Real>(beta: T, r: T) -> Result<T> {
    let lr = r.ln();
    let mut best = T::zero();
    let mut k = 1usize;
    loop {
        let kf = T::from_usize_lossy(k);
        let lt = kf * lr - ln_gamma(beta * kf + T::one())?;
        if lt > best {
            best = lt;
        } else if k > 8 && lt < best - lit(5.0) {
            return Ok(best);
        }
        k += 1;
        if k > 200_000 {
            return Ok(best);
        }
    }
}

fn ml_series<T: Real>(beta: T, z: T) -> Result<T> {
    // Kahan-compensated summation of z^k / Γ(βk + 1)
    let r = z.abs();
    let lr = r.ln();
    let negative = z < T::zero();
    let mut sum = T::one();
    let mut comp = T::zero();
    let mut past_peak = false;
    let mut prev = T::zero();
    for k in 1..200_000usize {
        let kf = T::from_usize_lossy(k);
        let lt = kf * lr - ln_gamma(beta * kf + T::one())?;
        let mag = lt.exp();
        if !mag.is_finite() {
            return Err(Error::NonConvergence(format!("Mittag-Leffler series overflow at z = {z}")));
        }
        let term = if negative && k % 2 == 1 { -mag } else { mag };
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if k > 2 && lt < prev {
            past_peak = true;
        }
        prev = lt;
        if past_peak && mag <= T::epsilon() * lit(1e-3) * sum.abs().max(lit(1e-300)) {
            return Ok(sum);
        }
        if past_peak && mag == T::zero() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence(format!("Mittag-Leffler series at z = {z}")))
}

/// `E_β(-x)` for `x > 0` from the Laplace-type integral representation,
/// plus the two oscillating pole contributions when `β > 1`.
///
/// With `t = x^{1/β}` and `u = r^β` the integral reads
/// `sin βπ / (πβ) ∫_0^∞ e^{-t u^{1/β}} / (u² + 2u cos βπ + 1) du`,
/// whose integrand is bounded at the origin for every `β`.
fn ml_negative_integral<T: Real>(beta: T, x: T) -> Result<T> {
    let t = x.powf(T::one() / beta);
    let pi = T::PI();
    let (sb, cb) = ((beta * pi).sin(), (beta * pi).cos());
    let p = T::one() / beta;
    let kernel = |u: T| (-(t * u.powf(p))).exp() / (u * u + lit::<T>(2.0) * u * cb + T::one());
    // the exponential has decayed by e^{-60} beyond u = (60/t)^β
    let upper = (lit::<T>(60.0) / t).powf(beta);
    let scale = T::one() / x;
    let mut breaks = vec![T::zero()];
    let mut b = scale * lit(1e-6);
    while b < upper {
        breaks.push(b);
        b = b * lit(4.0);
    }
    if upper > T::one() {
        // near-resonant denominator when β is close to 1
        breaks.push(T::one());
    }
    breaks.push(upper);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let mut body = T::zero();
    let mut err = T::zero();
    for w in breaks.windows(2) {
        let r = quad::adaptive(&kernel, w[0], w[1], lit(1e-16), lit(1e-14));
        body = body + r.value;
        err = err + r.error;
    }
    let mut value = sb / (pi * beta) * body;
    err = err * (sb / (pi * beta)).abs();
    if err > lit(1e-11) {
        return Err(Error::NonConvergence(format!("Mittag-Leffler integral at z = -{x}: error {err}")));
    }
    if beta > T::one() {
        let (sp, cp) = ((pi / beta).sin(), (pi / beta).cos());
        value = value + lit::<T>(2.0) / beta * (t * cp).exp() * (t * sp).cos();
    }
    Ok(value)
}

/// One-parameter Mittag-Leffler function `E_β(z) = Σ z^k / Γ(βk + 1)` for
/// real `z` and `β ∈ (0, 2]`.
///
/// Positive arguments and small negative ones use the power series; large
/// negative arguments, where the alternating series cancels, switch to an
/// integral representation.
pub fn mittag_leffler<T: Real>(beta: T, z: T) -> Result<T> {
    check_ml_order(beta)?;
    if z == T::zero() {
        return Ok(T::one());
    }
    if !z.is_finite() {
        return Err(Error::Domain { what: "Mittag-Leffler argument must be finite", value: z.to_f64_lossy() });
    }
    if z > T::zero() {
        return ml_series(beta, z);
    }
    if beta == T::one() {
        return Ok(z.exp());
    }
    if beta == lit(2.0) {
        return Ok((-z).sqrt().cos());
    }
    // cancellation loses about log10(peak term) digits
    let peak = ml_peak_log_term(beta, -z)?;
    if peak < lit(1e3_f64.ln()) {
        ml_series(beta, z)
    } else {
        ml_negative_integral(beta, -z)
    }
}

fn check_stable_order<T: Real>(beta: T) -> Result<()> {
    if !(beta > T::zero() && beta < lit(2.0)) {
        return Err(Error::Domain { what: "stable index must lie in (0, 2)", value: beta.to_f64_lossy() });
    }
    Ok(())
}

/// `∫_{-1}^{x} (1-u²)^{β/2-1} du` for `x ≤ 0`, after `1+u = w^{2/β}` which
/// turns the endpoint singularity into a smooth integrand.
fn exit_integral_left<T: Real>(beta: T, x: T) -> T {
    let two: T = lit(2.0);
    let p = two / beta;
    let upper = (T::one() + x).max(T::zero()).powf(beta / two);
    let integrand = |w: T| (two - w.powf(p)).powf(beta / two - T::one());
    p * quad::adaptive(integrand, T::zero(), upper, lit(1e-15), lit(1e-14)).value
}

/// Probability that the symmetric `β`-stable process started at `x` leaves
/// `[-1, 1]` to the right.
pub fn stable_exit_prob<T: Real>(beta: T, x: T) -> Result<T> {
    check_stable_order(beta)?;
    if !(x.abs() <= T::one()) {
        return Err(Error::Domain { what: "start point must lie in [-1, 1]", value: x.to_f64_lossy() });
    }
    let two: T = lit(2.0);
    let norm = two.powf(T::one() - beta) * gamma(beta)? / gamma(beta / two)?.powi(2);
    let p = if x <= T::zero() {
        norm * exit_integral_left(beta, x)
    } else {
        T::one() - norm * exit_integral_left(beta, -x)
    };
    Ok(p.max(T::zero()).min(T::one()))
}

/// `∫_0^z (u+1)^{-1/2} u^{β/2-1} du`.
fn occupation_inner<T: Real>(beta: T, z: T) -> T {
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    let p = two / beta;
    // [0, min(z,1)] with u = w^{2/β}
    let head_upper = z.min(T::one()).powf(beta / two);
    let head = p * quad::adaptive(
        |w: T| (T::one() + w.powf(p)).powf(-half),
        T::zero(),
        head_upper,
        lit(1e-15),
        lit(1e-14),
    )
    .value;
    if z <= T::one() {
        return head;
    }
    // [1, z] with u = e^s
    let tail = quad::adaptive(
        |s: T| (s * (beta / two - half)).exp() * (T::one() + (-s).exp()).powf(-half),
        T::zero(),
        z.ln(),
        lit(1e-15),
        lit(1e-14),
    )
    .value;
    head + tail
}

/// Density `H(x, y)` of the occupation-till-exit measure of the symmetric
/// `β`-stable process (characteristic exponent `|k|^β`) killed on leaving
/// `(-1, 1)`.
pub fn stable_occupation_density<T: Real>(beta: T, x: T, y: T) -> Result<T> {
    check_stable_order(beta)?;
    for v in [x, y] {
        if !(v.abs() <= T::one()) {
            return Err(Error::Domain { what: "occupation density arguments must lie in [-1, 1]", value: v.to_f64_lossy() });
        }
    }
    if x == y {
        return Err(Error::Singularity);
    }
    let two: T = lit(2.0);
    let d = (x - y).abs();
    let z = (T::one() - x * x) * (T::one() - y * y) / (d * d);
    if z <= T::zero() {
        return Ok(T::zero());
    }
    let c = two.powf(-beta) * T::PI().powf(lit(-0.5)) * gamma(lit::<T>(0.5))? / gamma(beta / two)?.powi(2);
    Ok(c * d.powf(beta - T::one()) * occupation_inner(beta, z))
}

/// Mean exit time of the standard symmetric stable process from `(-1, 1)`:
/// `(1 - x²)^{β/2} / Γ(1 + β)`.
pub fn stable_mean_exit_time<T: Real>(beta: T, x: T) -> Result<T> {
    check_stable_order(beta)?;
    if !(x.abs() <= T::one()) {
        return Err(Error::Domain { what: "start point must lie in [-1, 1]", value: x.to_f64_lossy() });
    }
    Ok((T::one() - x * x).powf(beta / lit(2.0)) / gamma(T::one() + beta)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT_PI: f64 = 1.772_453_850_905_516;

    #[test]
    fn gamma_classical_values() {
        assert!((gamma(0.5f64).unwrap() - SQRT_PI).abs() < 1e-14);
        assert!((gamma(-0.5f64).unwrap() + 2.0 * SQRT_PI).abs() < 1e-13);
        assert!((gamma(5.0f64).unwrap() - 24.0).abs() < 1e-12);
        assert!((gamma(1.5f64).unwrap() - SQRT_PI / 2.0).abs() < 1e-14);
        // 29! relative accuracy
        let f29: f64 = (1..=29).map(|k| k as f64).product();
        assert!((gamma(30.0f64).unwrap() / f29 - 1.0).abs() < 1e-12);
        // Γ(-29.5) = π / (sin(-29.5π) Γ(30.5))
        let g = gamma(-29.5f64).unwrap();
        let expect = std::f64::consts::PI / (-(29.5f64 * std::f64::consts::PI).sin() * gamma(30.5f64).unwrap());
        assert!((g / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_poles_are_errors() {
        for x in [0.0f64, -1.0, -7.0] {
            assert_eq!(gamma(x), Err(Error::Pole(x)));
        }
        assert_eq!(recip_gamma(-3.0f64), 0.0);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.1f64, 0.7, 3.3, 12.0, -1.5, -0.2] {
            assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().abs().ln()).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn mittag_leffler_exponential_cases() {
        for z in [-3.0f64, -1.0, 0.5, 1.0, 4.0] {
            assert!((mittag_leffler(1.0, z).unwrap() - z.exp()).abs() < 1e-12 * z.exp().max(1.0));
        }
        assert!((mittag_leffler(1.0f64, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-13);
        for w in [0.3f64, 1.0, 2.0] {
            assert!((mittag_leffler(2.0, w * w).unwrap() - w.cosh()).abs() < 1e-12 * w.cosh());
            assert!((mittag_leffler(2.0, -w * w).unwrap() - w.cos()).abs() < 1e-11);
        }
        assert!((mittag_leffler(2.0f64, 1.0).unwrap() - 1.543_080_634_815_243_7).abs() < 1e-13);
        assert_eq!(mittag_leffler(0.7f64, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn mittag_leffler_rejects_bad_order() {
        assert!(mittag_leffler(0.0f64, 1.0).is_err());
        assert!(mittag_leffler(2.5f64, 1.0).is_err());
    }

    #[test]
    fn exit_prob_endpoints_and_center() {
        for b in [0.3f64, 0.5, 1.0, 1.5, 1.9] {
            assert!((stable_exit_prob(b, 0.0).unwrap() - 0.5).abs() < 1e-12, "beta={b}");
            assert_eq!(stable_exit_prob(b, 1.0).unwrap(), 1.0);
            assert_eq!(stable_exit_prob(b, -1.0).unwrap(), 0.0);
        }
        assert!(stable_exit_prob(0.5f64, 1.01).is_err());
    }

    #[test]
    fn exit_prob_cauchy_closed_form() {
        // β = 1: P = 1/2 + asin(x)/π
        for x in [-0.9f64, -0.3, 0.2, 0.77] {
            let p = stable_exit_prob(1.0, x).unwrap();
            assert!((p - (0.5 + x.asin() / std::f64::consts::PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn exit_prob_monotone_on_grid() {
        for b in [0.5f64, 1.5] {
            let mut prev = -1.0;
            for i in 0..=100 {
                let x = -1.0 + 0.02 * i as f64;
                let p = stable_exit_prob(b, x).unwrap();
                assert!(p >= prev, "beta={b} x={x}");
                prev = p;
            }
        }
    }

    #[test]
    fn occupation_density_symmetry_and_boundary() {
        let a = stable_occupation_density(0.5f64, 0.3, -0.4).unwrap();
        let b = stable_occupation_density(0.5f64, -0.3, 0.4).unwrap();
        assert!((a - b).abs() < 1e-14 * a);
        // H(x, y) vanishes like (1 - y)^{β/2} at the boundary
        let near = stable_occupation_density(0.5f64, 0.2, 1.0 - 1e-4).unwrap();
        let nearer = stable_occupation_density(0.5f64, 0.2, 1.0 - 1e-8).unwrap();
        assert!((nearer / near - 0.1).abs() < 1e-3, "{near} {nearer}");
        assert_eq!(stable_occupation_density(0.5f64, 0.2, 1.0).unwrap(), 0.0);
        assert_eq!(stable_occupation_density(0.5f64, 0.2, 0.2), Err(Error::Singularity));
    }

    #[test]
    fn occupation_density_integrates_to_mean_exit_time() {
        // ∫ H(x, y) dy = (1-x²)^{β/2} / Γ(1+β)
        for (b, x) in [(0.5f64, 0.0f64), (1.5, 0.3), (0.8, -0.6)] {
            let h = |y: f64| stable_occupation_density(b, x, y).unwrap();
            // H ~ |x-y|^{β-1} near the diagonal: exact head below s0
            let s0 = 1e-12;
            let head = (h(x - s0) + h(x + s0)) * s0 / b;
            let left = quad::graded_towards_lower(|s| h(x - s), s0, 1.0 + x, 1e-12);
            let right = quad::graded_towards_lower(|s| h(x + s), s0, 1.0 - x, 1e-12);
            let m = stable_mean_exit_time(b, x).unwrap();
            assert!((head + left + right - m).abs() < 1e-7 * m, "beta={b} x={x}: {} vs {m}", head + left + right);
        }
    }

    proptest! {
        #[test]
        fn gamma_recursion(x in -10.0f64..10.0) {
            prop_assume!((x - x.round()).abs() > 1e-3 && (x + 1.0 - (x + 1.0).round()).abs() > 1e-3);
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs());
        }

        #[test]
        fn mittag_leffler_at_zero_is_one(beta in 0.01f64..1.99) {
            prop_assert_eq!(mittag_leffler(beta, 0.0).unwrap(), 1.0);
        }

        #[test]
        fn exit_prob_symmetry(beta in 0.05f64..1.95, x in -1.0f64..1.0) {
            let s = stable_exit_prob(beta, x).unwrap() + stable_exit_prob(beta, -x).unwrap();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }
    }
}
