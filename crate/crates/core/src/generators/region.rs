use crate::error::{Error, Result};
use crate::scalar::Real;

use super::kernel::norm;

/// Domain on which jumps are interrupted. Multidimensional regions use the
/// first coordinate as the normal direction of half-spaces and bands; the
/// ball is centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<T> {
    /// `[a, b]`, either end possibly infinite.
    Interval { a: T, b: T },
    /// Road blocks `b_1 < … < b_k` on the line.
    Checkpoints(Vec<T>),
    /// `{x : x_1 < b}` in `R^dim`.
    HalfSpace { b: T, dim: usize },
    /// `{x : a < x_1 < b}` in `R^dim`.
    Band { a: T, b: T, dim: usize },
    /// `{x : |x| < radius}` in `R^dim`.
    Ball { radius: T, dim: usize },
}

impl<T: Real> Region<T> {
    pub fn interval(a: T, b: T) -> Result<Self> {
        if !(a < b) || a.is_nan() || b.is_nan() {
            return Err(Error::InvalidParameter(format!("interval needs a < b, got [{a}, {b}]")));
        }
        Ok(Region::Interval { a, b })
    }

    pub fn checkpoints(mut points: Vec<T>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("checkpoint set must be nonempty and finite".into()));
        }
        points.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("checkpoints must be distinct".into()));
        }
        Ok(Region::Checkpoints(points))
    }

    pub fn half_space(b: T, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Region::HalfSpace { b, dim })
    }

    pub fn band(a: T, b: T, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("band needs a < b, got ({a}, {b})")));
        }
        Ok(Region::Band { a, b, dim })
    }

    pub fn ball(radius: T, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(radius > T::zero()) {
            return Err(Error::InvalidParameter(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Region::Ball { radius, dim })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Region::Interval { .. } | Region::Checkpoints(_) => 1,
            Region::HalfSpace { dim, .. } | Region::Band { dim, .. } | Region::Ball { dim, .. } => *dim,
        }
    }

    /// The interval between the nearest checkpoints strictly left and right
    /// of `x`; for an interval region, the region itself.
    pub fn enclosing_interval(&self, x: T) -> Option<(T, T)> {
        match self {
            Region::Interval { a, b } => Some((*a, *b)),
            Region::Checkpoints(points) => {
                let lo = points.iter().rev().find(|&&p| p < x).copied().unwrap_or(T::neg_infinity());
                let hi = points.iter().find(|&&p| p > x).copied().unwrap_or(T::infinity());
                Some((lo, hi))
            }
            _ => None,
        }
    }

    /// Whether `x` lies in the closed region.
    pub fn contains_closed(&self, x: &[T]) -> bool {
        match self {
            Region::Interval { a, b } => x[0] >= *a && x[0] <= *b,
            Region::Checkpoints(_) => true,
            Region::HalfSpace { b, .. } => x[0] <= *b,
            Region::Band { a, b, .. } => x[0] >= *a && x[0] <= *b,
            Region::Ball { radius, .. } => norm(x) <= *radius,
        }
    }

    /// Whether `x` lies in the open region (not on the boundary).
    pub fn contains_open(&self, x: &[T]) -> bool {
        match self {
            Region::Interval { a, b } => x[0] > *a && x[0] < *b,
            Region::Checkpoints(points) => !points.contains(&x[0]),
            Region::HalfSpace { b, .. } => x[0] < *b,
            Region::Band { a, b, .. } => x[0] > *a && x[0] < *b,
            Region::Ball { radius, .. } => norm(x) < *radius,
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidParameter("multidimensional regions need dim ≥ 2".into()));
    }
    Ok(())
}

/// Distance from `x` to the boundary along the unit direction `e`
/// (`+∞` if the ray never meets it). Only for multidimensional regions
/// and intervals (where `e = ±1`).
pub fn ray_length<T: Real>(region: &Region<T>, x: &[T], e: &[T]) -> T {
    let slab = |lo: T, hi: T| {
        if e[0] > T::zero() {
            ((hi - x[0]) / e[0]).max(T::zero())
        } else if e[0] < T::zero() {
            ((lo - x[0]) / e[0]).max(T::zero())
        } else {
            T::infinity()
        }
    };
    match region {
        Region::Interval { a, b } => slab(*a, *b),
        Region::Checkpoints(_) => {
            let (a, b) = region.enclosing_interval(x[0]).expect("one-dimensional");
            slab(a, b)
        }
        Region::HalfSpace { b, .. } => slab(T::neg_infinity(), *b),
        Region::Band { a, b, .. } => slab(*a, *b),
        Region::Ball { radius, .. } => {
            let xe = x.iter().zip(e).fold(T::zero(), |s, (&xi, &ei)| s + xi * ei);
            let xx = x.iter().fold(T::zero(), |s, &xi| s + xi * xi);
            let disc = (xe * xe + *radius * *radius - xx).max(T::zero());
            (disc.sqrt() - xe).max(T::zero())
        }
    }
}

/// Restriction of the jump `x → x + y` to the closed region along the jump
/// ray: `x + y` if it stays inside, else the first boundary point on the
/// segment. On the line this is clamping (to the enclosing checkpoints for
/// a checkpoint set).
pub fn project_ray<T: Real>(region: &Region<T>, x: &[T], y: &[T]) -> Result<Vec<T>> {
    let len = norm(y);
    if len == T::zero() {
        return Err(Error::DegenerateJump);
    }
    if let Some((a, b)) = region.enclosing_interval(x[0]) {
        return Ok(vec![(x[0] + y[0]).min(b).max(a)]);
    }
    let e: Vec<T> = y.iter().map(|&v| v / len).collect();
    let lambda = ray_length(region, x, &e);
    if len <= lambda {
        return Ok(x.iter().zip(y).map(|(&xi, &yi)| xi + yi).collect());
    }
    let mut p: Vec<T> = x.iter().zip(&e).map(|(&xi, &ei)| xi + lambda * ei).collect();
    // land exactly on the boundary
    match region {
        Region::HalfSpace { b, .. } => p[0] = *b,
        Region::Band { a, b, .. } => p[0] = if y[0] > T::zero() { *b } else { *a },
        Region::Ball { radius, .. } => {
            let r = norm(&p);
            if r > T::zero() {
                p.iter_mut().for_each(|v| *v = *v * (*radius / r));
            }
        }
        _ => {}
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_from_centre_lands_on_unit_sphere() {
        let ball = Region::ball(1.0f64, 2).unwrap();
        let p = project_ray(&ball, &[0.0, 0.0], &[1.2, -1.6]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn band_projection_point() {
        let band = Region::band(-1.0f64, 1.0, 2).unwrap();
        let p = project_ray(&band, &[0.5, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.5]);
        let p = project_ray(&band, &[0.5, 0.0], &[-3.0, 1.5]).unwrap();
        assert_eq!(p[0], -1.0);
        assert!((p[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn interior_jumps_unchanged_and_zero_jump_rejected() {
        let hs = Region::half_space(1.0, 2).unwrap();
        assert_eq!(project_ray(&hs, &[0.0, 0.0], &[1.0, 5.0]).unwrap(), vec![1.0, 5.0]);
        assert_eq!(project_ray(&hs, &[0.0, 0.0], &[0.0, 0.0]), Err(Error::DegenerateJump));
    }

    #[test]
    fn interval_clamps_and_checkpoints_use_neighbours() {
        let iv = Region::interval(0.0, 1.0).unwrap();
        assert_eq!(project_ray(&iv, &[0.5], &[0.7]).unwrap(), vec![1.0]);
        let cp = Region::checkpoints(vec![2.0, 0.0, 1.0]).unwrap();
        assert_eq!(project_ray(&cp, &[0.5], &[-3.0]).unwrap(), vec![0.0]);
        assert_eq!(project_ray(&cp, &[1.0], &[5.0]).unwrap(), vec![2.0]);
        assert_eq!(project_ray(&cp, &[3.0], &[5.0]).unwrap(), vec![8.0]);
        assert!(Region::checkpoints(vec![1.0, 1.0]).is_err());
    }
}
