//! Quadrature rules shared by the operator evaluators and the solvers.
//!
//! Everything here is generic over [`Real`]; node tables are computed or
//! stored in `f64` and converted on use.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_GL_ORDER: usize = 64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton's
/// method on the three-term recurrence and memoized per order.
pub fn gauss_legendre_f64(n: usize) -> &'static [(f64, f64)] {
    static RULES: [OnceLock<Vec<(f64, f64)>>; MAX_GL_ORDER + 1] =
        [const { OnceLock::new() }; MAX_GL_ORDER + 1];
    assert!((1..=MAX_GL_ORDER).contains(&n), "Gauss-Legendre order {n} unsupported");
    RULES[n].get_or_init(|| compute_gauss_legendre(n))
}

fn compute_gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

/// Fixed-order Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    gauss_legendre_f64(n)
        .iter()
        .map(|&(x, w)| lit::<T>(w) * f(mid + half * lit(x)))
        .fold(T::zero(), |acc, v| acc + v)
        * half
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
}

fn gk15<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let fc = f(mid);
    let mut kron = fc * lit(WGK[7]);
    let mut gauss = fc * lit(WG[3]);
    for j in 0..7 {
        let dx = half * lit(XGK[j]);
        let pair = f(mid - dx) + f(mid + dx);
        kron = kron + pair * lit(WGK[j]);
        if j % 2 == 1 {
            gauss = gauss + pair * lit(WG[j / 2]);
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration.
///
/// Stops when the summed error estimate falls below
/// `max(abs_tol, rel_tol * |value|)` or the interval budget is exhausted;
/// in the latter case the best estimate is still returned with its error.
pub fn adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, abs_tol: T, rel_tol: T) -> QuadResult<T> {
    if a == b {
        return QuadResult { value: T::zero(), error: T::zero() };
    }
    const MAX_INTERVALS: usize = 4000;
    let (v0, e0) = gk15(&f, a, b);
    let mut parts: Vec<(T, T, T, T)> = vec![(a, b, v0, e0)];
    let mut value = v0;
    let mut error = e0;
    while parts.len() < MAX_INTERVALS {
        if error <= abs_tol.max(rel_tol * value.abs()) {
            break;
        }
        let (idx, _) = parts
            .iter()
            .enumerate()
            .fold((0, -T::one()), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, v, e) = parts.swap_remove(idx);
        let mid = (lo + hi) * lit(0.5);
        if mid <= lo || mid >= hi {
            // interval exhausted at machine resolution
            parts.push((lo, hi, v, T::zero()));
            error = error - e;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        value = value - v + v1 + v2;
        error = error - e + e1 + e2;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value = parts.iter().map(|p| p.2).fold(T::zero(), |s, v| s + v);
    let error = parts.iter().map(|p| p.3).fold(T::zero(), |s, v| s + v);
    QuadResult { value, error }
}

/// [`adaptive`] that reports non-convergence as an error.
pub fn adaptive_checked<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
    what: &str,
) -> Result<T> {
    let r = adaptive(f, a, b, abs_tol, rel_tol);
    let budget = (abs_tol.max(rel_tol * r.value.abs())) * lit(100.0);
    if !r.value.is_finite() || r.error > budget {
        return Err(Error::NonConvergence(format!(
            "{what}: estimate {} with error {}",
            r.value, r.error
        )));
    }
    Ok(r.value)
}

/// Integrates `f` over `[lo, hi]` on a geometric mesh refined towards `lo`,
/// which is where `f` is allowed to be (integrably) singular. `lo` must be
/// strictly positive; each geometric cell `[z, 2z]` is integrated adaptively.
pub fn graded_towards_lower<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T, abs_tol: T) -> T {
    if hi <= lo {
        return T::zero();
    }
    let two: T = lit(2.0);
    let mut cells = Vec::new();
    let mut left = lo;
    while left * two < hi {
        cells.push((left, left * two));
        left = left * two;
    }
    cells.push((left, hi));
    let per_cell = abs_tol / T::from_usize_lossy(cells.len());
    cells
        .into_iter()
        .map(|(a, b)| adaptive(&f, a, b, per_cell, lit(1e-12)).value)
        .fold(T::zero(), |s, v| s + v)
}

/// Integrates `f` over `[a, ∞)` by doubling cells until a cell contributes
/// less than `abs_tol` twice in a row. Returns the sum and the last cell's
/// right end.
pub fn to_infinity<T: Real>(f: impl Fn(T) -> T, a: T, first_width: T, abs_tol: T, max_right: T) -> (T, T) {
    let mut left = a;
    let mut width = first_width;
    let mut total = T::zero();
    let mut quiet = 0;
    while left < max_right {
        let right = (left + width).min(max_right);
        let part = adaptive(&f, left, right, abs_tol * lit(0.1), lit(1e-12)).value;
        total = total + part;
        left = right;
        width = width * lit(2.0);
        if part.abs() < abs_tol {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    (total, left)
}
