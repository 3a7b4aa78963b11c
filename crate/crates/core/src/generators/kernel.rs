use std::fmt;
use std::sync::Arc;

use super::OrderClass;
use crate::error::{Error, Result};
use crate::fracops::{MixedTerm, Side};
use crate::quad;
use crate::scalar::{lit, Real};
use crate::specfun::gamma;

type Density<T> = Arc<dyn Fn(&[T], &[T]) -> T + Send + Sync>;
type Modulation<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type Tail<T> = Arc<dyn Fn(&[T], &[T], T) -> T + Send + Sync>;

/// Set of jump directions a power-law term charges. In one dimension
/// `Negative` and `Positive` select a half-line and `Radial` both; in higher
/// dimensions only `Radial` is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Negative,
    Positive,
    Radial,
}

impl Direction {
    #[inline]
    fn admits<T: Real>(self, e0: T) -> bool {
        match self {
            Direction::Negative => e0 < T::zero(),
            Direction::Positive => e0 > T::zero(),
            Direction::Radial => true,
        }
    }
}

/// `c · a(x) · |y|^{-n-α} · e^{-θ|y|}` restricted to a set of directions,
/// `n` being the dimension of the kernel.
#[derive(Clone)]
pub struct PowerTerm<T> {
    pub direction: Direction,
    pub coeff: T,
    pub alpha: T,
    pub tempering: T,
    modulation: Option<(Modulation<T>, T)>,
}

impl<T: Real> fmt::Debug for PowerTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PowerTerm")
            .field("direction", &self.direction)
            .field("coeff", &self.coeff)
            .field("alpha", &self.alpha)
            .field("tempering", &self.tempering)
            .field("modulated", &self.modulation.is_some())
            .finish()
    }
}

impl<T: Real> PowerTerm<T> {
    pub fn new(direction: Direction, coeff: T, alpha: T) -> Self {
        Self { direction, coeff, alpha, tempering: T::zero(), modulation: None }
    }

    pub fn tempered(mut self, theta: T) -> Self {
        self.tempering = theta;
        self
    }

    /// Multiplies the term by a state-dependent factor `0 ≤ a(x) ≤ a_max`.
    pub fn modulated(mut self, a: impl Fn(&[T]) -> T + Send + Sync + 'static, a_max: T) -> Self {
        self.modulation = Some((Arc::new(a), a_max));
        self
    }

    pub fn is_modulated(&self) -> bool {
        self.modulation.is_some()
    }

    #[inline]
    fn factor(&self, x: &[T]) -> T {
        match &self.modulation {
            Some((a, _)) => self.coeff * a(x),
            None => self.coeff,
        }
    }

    /// The state-independent pure power law dominating this term.
    pub fn envelope(&self) -> PowerTerm<T> {
        let c = match &self.modulation {
            Some((_, a_max)) => self.coeff * *a_max,
            None => self.coeff,
        };
        PowerTerm::new(self.direction, c, self.alpha)
    }

    /// Area of the admitted set of unit directions in `R^n`.
    pub fn surface(&self, n: usize) -> T {
        match (self.direction, n) {
            (Direction::Radial, n) => sphere_area(n),
            _ => T::one(),
        }
    }

    /// Density along the ray `ρ e`.
    #[inline]
    fn along(&self, x: &[T], e0: T, rho: T, n: usize) -> T {
        if !self.direction.admits(e0) {
            return T::zero();
        }
        let mut v = self.factor(x) * rho.powf(-T::from_usize_lossy(n) - self.alpha);
        if self.tempering > T::zero() {
            v = v * (-self.tempering * rho).exp();
        }
        v
    }

    /// `∫_lo^hi ρ^{n-1+k} (term along e) dρ`.
    fn radial_moment(&self, x: &[T], e0: T, k: i32, lo: T, hi: T, n: usize) -> T {
        if !self.direction.admits(e0) || hi <= lo {
            return T::zero();
        }
        let c = self.factor(x);
        if self.tempering > T::zero() {
            let g = |rho: T| self.along(x, e0, rho, n) * rho.powi(n as i32 - 1 + k);
            return radial_quad(g, lo, hi);
        }
        c * power_integral(lit::<T>(f64::from(k)) - self.alpha, lo, hi)
    }
}

/// `∫_lo^hi ρ^{s-1} dρ`, possibly infinite.
fn power_integral<T: Real>(s: T, lo: T, hi: T) -> T {
    if s == T::zero() {
        return (hi / lo).ln();
    }
    if hi.is_infinite() {
        return if s < T::zero() { -lo.powf(s) / s } else { T::infinity() };
    }
    if lo == T::zero() {
        return if s > T::zero() { hi.powf(s) / s } else { T::infinity() };
    }
    (hi.powf(s) - lo.powf(s)) / s
}

pub(crate) fn sphere_area<T: Real>(n: usize) -> T {
    match n {
        1 => lit(2.0),
        2 => T::TAU(),
        3 => lit::<T>(4.0) * T::PI(),
        _ => {
            let half: T = lit::<T>(n as f64) * lit(0.5);
            lit::<T>(2.0) * T::PI().powf(half) / gamma(half).unwrap_or(T::one())
        }
    }
}

/// `∫_lo^hi g`, `0 ≤ lo < hi ≤ ∞`, for integrands with a power-type
/// behaviour at `0` and decay at infinity. Below a tiny radius the
/// integrand is extrapolated as a power law and integrated exactly.
pub(crate) fn radial_quad<T: Real>(g: impl Fn(T) -> T, lo: T, hi: T) -> T {
    if !(hi > lo) {
        return T::zero();
    }
    let tol: T = lit(1e-14);
    let mut total = T::zero();
    let mut start = lo;
    if lo == T::zero() {
        let t = lit::<T>(1e-12) * hi.min(T::one());
        let (g1, g2) = (g(t), g(t + t));
        if g1 != T::zero() {
            let p = (g2 / g1).abs().log2();
            if !(p > -T::one()) {
                return T::infinity();
            }
            total = g1 * t / (p + T::one());
        }
        start = t;
    }
    if hi.is_finite() {
        return total + quad::graded_towards_lower(&g, start, hi, tol);
    }
    let mid = T::one().max(start + start);
    total = total + quad::graded_towards_lower(&g, start, mid, tol);
    // doubling cells; once the cell ratio settles, the remaining cells form a
    // geometric series (power-law or faster decay)
    let mut left = mid;
    let mut prev: Option<(T, T)> = None;
    for _ in 0..200 {
        let part = quad::adaptive(&g, left, left + left, tol, lit(1e-13)).value;
        total = total + part;
        left = left + left;
        if part == T::zero() {
            break;
        }
        if let Some((p, r_prev)) = prev {
            let r = part / p;
            if r > T::zero() && r < lit(0.95) && (r - r_prev).abs() < lit::<T>(1e-4) * r {
                return total + part * r / (T::one() - r);
            }
            if part.abs() < tol * total.abs() {
                break;
            }
            prev = Some((part, r));
        } else {
            prev = Some((part, T::zero()));
        }
    }
    total
}

#[derive(Clone)]
enum Source<T> {
    Terms(Vec<PowerTerm<T>>),
    Custom { density: Density<T>, state_independent: bool, tail: Option<Tail<T>> },
}

/// Jump intensity `ν(x, y)` on `R^n` together with a state-independent
/// majorant made of pure power laws, used for thinning and rejection.
#[derive(Clone)]
pub struct JumpKernel<T> {
    dim: usize,
    class: OrderClass,
    source: Source<T>,
    majorant: Vec<PowerTerm<T>>,
    name: String,
}

impl<T: Real> fmt::Debug for JumpKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JumpKernel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("class", &self.class)
            .field("majorant", &self.majorant)
            .finish()
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < lit(2.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("power-law exponent must lie in (0,2), got {alpha}")))
    }
}

fn class_of<T: Real>(alphas: impl Iterator<Item = T>) -> OrderClass {
    let mut class = OrderClass::BoundedVariation;
    for a in alphas {
        if a >= T::one() {
            class = OrderClass::Compensated;
        }
    }
    class
}

impl<T: Real> JumpKernel<T> {
    /// Kernel made of power-law terms. The order class is inferred from
    /// the largest exponent.
    pub fn from_terms(dim: usize, terms: Vec<PowerTerm<T>>, name: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("kernel dimension must be positive".into()));
        }
        for t in &terms {
            check_alpha(t.alpha)?;
            if !(t.coeff >= T::zero()) || !(t.tempering >= T::zero()) {
                return Err(Error::InvalidParameter("power-law coefficients must be nonnegative".into()));
            }
            if dim > 1 && t.direction != Direction::Radial {
                return Err(Error::InvalidParameter("half-line directions are one-dimensional only".into()));
            }
        }
        let class = class_of(terms.iter().map(|t| t.alpha));
        let majorant = terms.iter().map(PowerTerm::envelope).collect();
        Ok(Self { dim, class, source: Source::Terms(terms), majorant, name: name.into() })
    }

    /// No jumps at all.
    pub fn zero(dim: usize) -> Self {
        Self::from_terms(dim, Vec::new(), "zero").expect("valid")
    }

    /// `w / |Γ(-β)| · |y|^{-1-β}` on one half-line: the kernel of the
    /// one-sided fractional derivatives. Negative jumps correspond to the
    /// right derivative `D_{a+}`, positive jumps to the left one.
    pub fn stable_one_sided(beta: T, direction: Direction, weight: T) -> Result<Self> {
        if direction == Direction::Radial {
            return Err(Error::InvalidParameter("one-sided kernel needs a half-line direction".into()));
        }
        let coeff = weight / gamma(-beta)?.abs();
        Self::from_terms(1, vec![PowerTerm::new(direction, coeff, beta)], "stable-one-sided")
    }

    /// Rotationally symmetric `β`-stable kernel `c |y|^{-n-β}` normalized
    /// so that the characteristic exponent is `|k|^β`.
    pub fn stable_symmetric(beta: T, dim: usize) -> Result<Self> {
        check_alpha(beta)?;
        let n: T = lit(dim as f64);
        let two: T = lit(2.0);
        let coeff = beta * two.powf(beta - T::one()) * gamma((n + beta) / two)?
            / (T::PI().powf(n / two) * gamma(T::one() - beta / two)?);
        Self::from_terms(dim, vec![PowerTerm::new(Direction::Radial, coeff, beta)], "stable-symmetric")
    }

    /// Kernel of `-Σ ω_j D^{β_j}_{a+⋆} - Σ γ_j D^{β_j}_{b-⋆}` (orders below one).
    pub fn fractional_mixed(terms: &[MixedTerm<T>]) -> Result<Self> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let beta = t.order.value();
            let dir = match t.side {
                Side::Right => Direction::Negative,
                Side::Left => Direction::Positive,
            };
            out.push(PowerTerm::new(dir, t.weight / gamma(-beta)?.abs(), beta));
        }
        Self::from_terms(1, out, "fractional-mixed")
    }

    /// Stable-like kernel `a(x) / |y|^{n+β}` with `0 ≤ a(x) ≤ a_max`.
    pub fn stable_like(
        dim: usize,
        beta: T,
        a: impl Fn(&[T]) -> T + Send + Sync + 'static,
        a_max: T,
    ) -> Result<Self> {
        let term = PowerTerm::new(Direction::Radial, T::one(), beta).modulated(a, a_max);
        Self::from_terms(dim, vec![term], "stable-like")
    }

    /// One-dimensional tempered stable kernel
    /// `c_∓ e^{-θ|y|} |y|^{-1-β}` on the negative / positive half-lines.
    pub fn tempered_stable(beta: T, theta: T, c_neg: T, c_pos: T) -> Result<Self> {
        let mut terms = Vec::new();
        if c_neg > T::zero() {
            terms.push(PowerTerm::new(Direction::Negative, c_neg, beta).tempered(theta));
        }
        if c_pos > T::zero() {
            terms.push(PowerTerm::new(Direction::Positive, c_pos, beta).tempered(theta));
        }
        Self::from_terms(1, terms, "tempered-stable")
    }

    /// Caller-supplied density with an explicit power-law majorant.
    pub fn custom(
        dim: usize,
        class: OrderClass,
        density: impl Fn(&[T], &[T]) -> T + Send + Sync + 'static,
        majorant: Vec<PowerTerm<T>>,
        state_independent: bool,
    ) -> Result<Self> {
        for t in &majorant {
            check_alpha(t.alpha)?;
            if t.is_modulated() || t.tempering > T::zero() {
                return Err(Error::InvalidParameter("majorant terms must be pure power laws".into()));
            }
        }
        Ok(Self {
            dim,
            class,
            source: Source::Custom { density: Arc::new(density), state_independent, tail: None },
            majorant,
            name: "custom".into(),
        })
    }

    /// Closed form for `∫_r^∞ ρ^{n-1} ν(x, ρe) dρ` on a custom kernel.
    pub fn with_tail_integral(mut self, tail: impl Fn(&[T], &[T], T) -> T + Send + Sync + 'static) -> Self {
        if let Source::Custom { tail: slot, .. } = &mut self.source {
            *slot = Some(Arc::new(tail));
        }
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order_class(&self) -> OrderClass {
        self.class
    }

    pub fn majorant_terms(&self) -> &[PowerTerm<T>] {
        &self.majorant
    }

    pub fn power_terms(&self) -> Option<&[PowerTerm<T>]> {
        match &self.source {
            Source::Terms(t) => Some(t),
            Source::Custom { .. } => None,
        }
    }

    pub fn is_state_independent(&self) -> bool {
        match &self.source {
            Source::Terms(t) => t.iter().all(|t| !t.is_modulated()),
            Source::Custom { state_independent, .. } => *state_independent,
        }
    }

    /// True when the density coincides with its majorant, so that
    /// rejection sampling always accepts.
    pub fn majorant_is_exact(&self) -> bool {
        match &self.source {
            Source::Terms(t) => t.iter().all(|t| !t.is_modulated() && t.tempering == T::zero()),
            Source::Custom { .. } => false,
        }
    }

    /// Whether any mass sits on the given one-dimensional side.
    pub fn charges_side(&self, sign: T) -> bool {
        match &self.source {
            Source::Terms(t) => t.iter().any(|t| t.direction.admits(sign) && t.coeff > T::zero()),
            Source::Custom { .. } => true,
        }
    }

    /// `ν(x, y)`.
    pub fn density(&self, x: &[T], y: &[T]) -> T {
        match &self.source {
            Source::Terms(terms) => {
                let rho = norm(y);
                let e0 = y[0];
                terms.iter().map(|t| t.along(x, e0, rho, self.dim)).fold(T::zero(), |s, v| s + v)
            }
            Source::Custom { density, .. } => density(x, y),
        }
    }

    #[inline]
    pub fn density_1d(&self, x: T, y: T) -> T {
        self.density(&[x], &[y])
    }

    /// Value of the majorant at `y`.
    pub fn majorant_density(&self, y: &[T]) -> T {
        let rho = norm(y);
        self.majorant.iter().map(|t| t.along(&[], y[0], rho, self.dim)).fold(T::zero(), |s, v| s + v)
    }

    /// `∫_lo^hi ρ^{n-1+k} ν(x, ρe) dρ` along the unit direction `e`.
    pub fn radial_moment(&self, x: &[T], e: &[T], k: i32, lo: T, hi: T) -> T {
        if !(hi > lo) {
            return T::zero();
        }
        match &self.source {
            Source::Terms(terms) => {
                terms.iter().map(|t| t.radial_moment(x, e[0], k, lo, hi, self.dim)).fold(T::zero(), |s, v| s + v)
            }
            Source::Custom { tail, .. } => {
                if k == 0 && hi.is_infinite() && lo > T::zero() {
                    if let Some(tail) = tail {
                        return tail(x, e, lo);
                    }
                }
                self.radial_integral(x, e, lo, hi, |rho| rho.powi(k))
            }
        }
    }

    /// `∫_lo^hi ρ^{n-1} w(ρ) ν(x, ρe) dρ` by quadrature.
    pub fn radial_integral(&self, x: &[T], e: &[T], lo: T, hi: T, w: impl Fn(T) -> T) -> T {
        let n = self.dim;
        let g = |rho: T| {
            let y: Vec<T> = e.iter().map(|&ei| rho * ei).collect();
            rho.powi(n as i32 - 1) * w(rho) * self.density(x, &y)
        };
        radial_quad(g, lo, hi)
    }

    /// One-dimensional shorthand: `∫_lo^hi z^k ν(x, s z) dz`, `s = ±1`.
    #[inline]
    pub fn side_moment(&self, x: T, sign: T, k: i32, lo: T, hi: T) -> T {
        self.radial_moment(&[x], &[sign], k, lo, hi)
    }
}

#[inline]
pub(crate) fn norm<T: Real>(y: &[T]) -> T {
    if y.len() == 1 {
        return y[0].abs();
    }
    y.iter().fold(T::zero(), |s, &v| s + v * v).sqrt()
}
