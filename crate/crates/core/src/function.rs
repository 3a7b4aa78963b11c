use std::fmt;
use std::sync::Arc;

use crate::scalar::{lit, Real};

type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Declared smoothness of a caller-supplied function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Smoothness {
    Continuous,
    C1,
    C2,
}

/// A real function of one real variable, optionally with exact first and
/// second derivatives. Missing derivatives are approximated by
/// Richardson-extrapolated central differences.
#[derive(Clone)]
pub struct ScalarFunction<T> {
    eval: Eval<T>,
    first: Option<Eval<T>>,
    second: Option<Eval<T>>,
    smoothness: Smoothness,
    scale: T,
}

impl<T: Real> fmt::Debug for ScalarFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("smoothness", &self.smoothness)
            .field("exact_first", &self.first.is_some())
            .field("exact_second", &self.second.is_some())
            .finish()
    }
}

impl<T: Real> ScalarFunction<T> {
    pub fn new(eval: impl Fn(T) -> T + Send + Sync + 'static, smoothness: Smoothness) -> Self {
        Self { eval: Arc::new(eval), first: None, second: None, smoothness, scale: T::one() }
    }

    /// Smooth (C²) function.
    pub fn smooth(eval: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(eval, Smoothness::C2)
    }

    pub fn constant(c: T) -> Self {
        Self::smooth(move |_| c).with_derivative(|_| T::zero()).with_second_derivative(|_| T::zero())
    }

    pub fn with_derivative(mut self, df: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.first = Some(Arc::new(df));
        self
    }

    pub fn with_second_derivative(mut self, d2f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.second = Some(Arc::new(d2f));
        self
    }

    /// Length scale used for finite-difference steps (default 1).
    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn has_exact_derivative(&self) -> bool {
        self.first.is_some()
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        (self.eval)(x)
    }

    pub fn derivative(&self, x: T) -> T {
        if let Some(df) = &self.first {
            return df(x);
        }
        // D(h) = (f(x+h) - f(x-h)) / 2h,  f' ≈ (4 D(h/2) - D(h)) / 3
        let h = self.step(x, 1.0 / 5.0);
        let d = |h: T| (self.eval(x + h) - self.eval(x - h)) / (h + h);
        (d(h * lit(0.5)) * lit(4.0) - d(h)) / lit(3.0)
    }

    pub fn second_derivative(&self, x: T) -> T {
        if let Some(d2f) = &self.second {
            return d2f(x);
        }
        if let Some(df) = &self.first {
            let h = self.step(x, 1.0 / 5.0);
            let d = |h: T| (df(x + h) - df(x - h)) / (h + h);
            return (d(h * lit(0.5)) * lit(4.0) - d(h)) / lit(3.0);
        }
        // fourth-order five-point stencil
        let h = self.step(x, 1.0 / 6.0);
        let f = |k: f64| self.eval(x + h * lit(k));
        (-f(2.0) + f(1.0) * lit(16.0) - f(0.0) * lit(30.0) + f(-1.0) * lit(16.0) - f(-2.0)) / (h * h * lit(12.0))
    }

    pub fn third_derivative(&self, x: T) -> T {
        if let Some(d2f) = &self.second {
            let h = self.step(x, 1.0 / 5.0);
            let d = |h: T| (d2f(x + h) - d2f(x - h)) / (h + h);
            return (d(h * lit(0.5)) * lit(4.0) - d(h)) / lit(3.0);
        }
        if let Some(df) = &self.first {
            let h = self.step(x, 1.0 / 4.0);
            return (df(x + h) - df(x) * lit(2.0) + df(x - h)) / (h * h);
        }
        let h = self.step(x, 1.0 / 5.0) * lit(2.0);
        let f = |k: f64| self.eval(x + h * lit(k));
        (f(2.0) - f(1.0) * lit(2.0) + f(-1.0) * lit(2.0) - f(-2.0)) / (h * h * h * lit(2.0))
    }

    fn step(&self, x: T, power: f64) -> T {
        let eps = T::epsilon().powf(lit(power));
        let h = eps * self.scale.max(x.abs() * lit(0.1)).max(self.scale * lit(1e-3));
        // make the step exactly representable around x
        let t = x + h;
        t - x
    }
}

type EvalN<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

/// A real function on `R^n`, used by the multidimensional boundary operators.
#[derive(Clone)]
pub struct PointFunction<T> {
    eval: EvalN<T>,
    dim: usize,
    scale: T,
}

impl<T: Real> fmt::Debug for PointFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointFunction").field("dim", &self.dim).finish()
    }
}

impl<T: Real> PointFunction<T> {
    pub fn new(dim: usize, eval: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { eval: Arc::new(eval), dim, scale: T::one() }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::new(dim, move |_| c)
    }

    pub fn with_scale(mut self, scale: T) -> Self {
        self.scale = scale;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    /// Derivative along the unit vector `e`, by Richardson-extrapolated
    /// central differences.
    pub fn directional_derivative(&self, x: &[T], e: &[T]) -> T {
        let norm = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let h = T::epsilon().powf(lit(0.2)) * self.scale.max(norm * lit(0.1));
        let mut buf = vec![T::zero(); self.dim];
        let mut at = |t: T| {
            for ((b, &xi), &ei) in buf.iter_mut().zip(x).zip(e) {
                *b = xi + t * ei;
            }
            self.eval(&buf)
        };
        let mut d = |h: T| (at(h) - at(-h)) / (h + h);
        (d(h * lit(0.5)) * lit(4.0) - d(h)) / lit(3.0)
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut e = vec![T::zero(); self.dim];
        (0..self.dim)
            .map(|i| {
                e.iter_mut().for_each(|v| *v = T::zero());
                e[i] = T::one();
                self.directional_derivative(x, &e)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_derivatives_are_accurate() {
        let f = ScalarFunction::smooth(|x: f64| (0.7 * x).sin() * x.exp());
        for x in [-1.5f64, 0.0, 0.3, 2.0] {
            let d1 = 0.7 * (0.7 * x).cos() * x.exp() + (0.7 * x).sin() * x.exp();
            let d2 = -0.49 * (0.7 * x).sin() * x.exp() + 1.4 * (0.7 * x).cos() * x.exp() + (0.7 * x).sin() * x.exp();
            assert!((f.derivative(x) - d1).abs() < 1e-10, "x={x}");
            assert!((f.second_derivative(x) - d2).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn exact_derivatives_take_precedence() {
        let f = ScalarFunction::smooth(|x: f64| x * x).with_derivative(|_| 42.0);
        assert_eq!(f.derivative(1.0), 42.0);
        assert_eq!(ScalarFunction::constant(3.0f64).second_derivative(0.2), 0.0);
    }

    #[test]
    fn point_function_gradient() {
        let f = PointFunction::new(2, |x: &[f64]| x[0] * x[0] + (2.0 * x[1]).sin());
        let g = f.gradient(&[0.3, 0.1]);
        assert!((g[0] - 0.6).abs() < 1e-10);
        assert!((g[1] - 2.0 * 0.2f64.cos()).abs() < 1e-10);
    }
}
