//! Path engine shared by all simulation routines: thinning against the
//! power-law majorant, drift flow between jump epochs, and boundary
//! handling per mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{Mode, Outcome, SimParams};
use crate::error::{Error, Result};
use crate::generators::operators::mollified_first_moment;
use crate::generators::{project_ray, ray_length, Direction, Drift, GeneratorSpec, OrderClass, Region};
use crate::scalar::{lit, Real};

/// Maximal dimension of simulated state spaces.
pub(crate) const MAX_DIM: usize = 3;

pub(crate) type Point<T> = [T; MAX_DIM];

/// A piece of trajectory on which the state moves linearly from `x0` to
/// `x1` during `[t0, t1]` (constant when no drift acts).
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment<T> {
    pub t0: T,
    pub t1: T,
    pub x0: Point<T>,
    pub x1: Point<T>,
}

/// Result of one walk.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Walk<T> {
    /// First boundary contact, or the time cap.
    pub tau: T,
    pub outcome: Outcome,
    /// Position at `tau` (the landing point beyond the boundary for
    /// killed paths).
    pub location: Point<T>,
    /// Position when the walk ended.
    pub last: Point<T>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    direction: Direction,
    alpha: T,
    cumulative: T,
}

pub(crate) struct Engine<'a, T: Real> {
    spec: &'a GeneratorSpec<T>,
    region: Option<&'a Region<T>>,
    mode: Mode,
    dim: usize,
    h: T,
    t_max: T,
    candidates: Vec<Candidate<T>>,
    rate: T,
    exact: bool,
    order2: bool,
    small_jumps: bool,
    gaussian: bool,
    /// Small-jump drift and variance when they do not depend on the state.
    cached: Option<(T, T)>,
    stop_at_contact: bool,
}

impl<'a, T: Real> Engine<'a, T> {
    pub(crate) fn new(
        spec: &'a GeneratorSpec<T>,
        region: &'a Region<T>,
        mode: Mode,
        params: &SimParams<T>,
        stop_at_contact: bool,
    ) -> Result<Self> {
        params.validate()?;
        let dim = spec.dim();
        if dim > MAX_DIM {
            return Err(Error::InvalidParameter(format!("simulation supports dimension ≤ {MAX_DIM}, got {dim}")));
        }
        if region.dimension() != dim {
            return Err(Error::InvalidParameter(format!(
                "region dimension {} does not match kernel dimension {dim}",
                region.dimension()
            )));
        }
        if spec.diffusion.is_some() {
            return Err(Error::InvalidParameter("the simulator supports pure-jump generators only".into()));
        }
        let order2 = spec.order_class() == OrderClass::Compensated;
        if order2 {
            if dim != 1 || !matches!(region, Region::Interval { .. }) {
                return Err(Error::InvalidParameter("compensated kernels are simulated on intervals only".into()));
            }
            if mode == Mode::Killed {
                return Err(Error::InvalidParameter("compensated kernels are simulated in stopped mode".into()));
            }
        }
        let h = params.h;
        let mut candidates = Vec::new();
        let mut rate = T::zero();
        for term in spec.kernel.majorant_terms() {
            let r = term.coeff * term.surface(dim) * h.powf(-term.alpha) / term.alpha;
            if r > T::zero() {
                rate = rate + r;
                candidates.push(Candidate { direction: term.direction, alpha: term.alpha, cumulative: rate });
            }
        }
        let mut engine = Self {
            spec,
            region: (mode != Mode::Free).then_some(region),
            mode,
            dim,
            h,
            t_max: params.t_max,
            candidates,
            rate,
            exact: spec.kernel.majorant_is_exact(),
            order2,
            small_jumps: params.small_jump_drift && dim == 1,
            gaussian: order2 && params.gaussian_correction,
            cached: None,
            stop_at_contact: stop_at_contact || order2,
        };
        if spec.kernel.is_state_independent() {
            let (d, v) = engine.small_jump_terms(T::zero());
            engine.cached = Some((d, v));
        }
        Ok(engine)
    }

    /// Drift and variance standing in for the removed jumps `|y| ≤ h`
    /// (one-dimensional kernels).
    fn small_jump_terms(&self, x: T) -> (T, T) {
        let kernel = &self.spec.kernel;
        let mut drift = T::zero();
        let mut var = T::zero();
        if !self.small_jumps && !self.order2 {
            return (drift, var);
        }
        for s in [-T::one(), T::one()] {
            if !kernel.charges_side(s) {
                continue;
            }
            if self.order2 {
                drift = drift - s * mollified_first_moment(kernel, self.spec.mollifier, x, s, self.h);
                if self.spec.mollifier == crate::generators::Mollifier::Cauchy {
                    drift = drift
                        + s * kernel.radial_integral(&[x], &[s], T::zero(), self.h, |z| z * z * z / (T::one() + z * z));
                }
                if self.gaussian {
                    var = var + kernel.side_moment(x, s, 2, T::zero(), self.h);
                }
            } else if self.small_jumps {
                drift = drift + s * kernel.side_moment(x, s, 1, T::zero(), self.h);
            }
        }
        (drift, var)
    }

    #[inline]
    fn jump_terms_at(&self, x: &Point<T>) -> (T, T) {
        match self.cached {
            Some(c) => c,
            None if self.dim == 1 => self.small_jump_terms(x[0]),
            None => (T::zero(), T::zero()),
        }
    }

    /// Total velocity at `x`.
    fn velocity(&self, x: &Point<T>) -> Point<T> {
        let mut v = [T::zero(); MAX_DIM];
        match &self.spec.drift {
            Drift::Zero => {}
            Drift::Constant(c) => v[..self.dim].copy_from_slice(&c[..self.dim]),
            Drift::Field(g) => {
                let out = g(&x[..self.dim]);
                v[..self.dim].copy_from_slice(&out[..self.dim]);
            }
        }
        v[0] = v[0] + self.jump_terms_at(x).0;
        v
    }

    fn velocity_is_constant(&self) -> bool {
        self.spec.drift.is_constant() && (self.cached.is_some() || self.dim > 1)
    }

    pub(crate) fn rng(params: &SimParams<T>, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(stream);
        rng
    }

    fn initial_contact(&self, x: &Point<T>) -> Option<Outcome> {
        let region = self.region?;
        if region.contains_open(&x[..self.dim]) {
            return None;
        }
        Some(self.side_of(region, x, x))
    }

    /// Side of the boundary reached from `from` when landing at `at`.
    fn side_of(&self, region: &Region<T>, from: &Point<T>, at: &Point<T>) -> Outcome {
        match region {
            Region::Interval { .. } | Region::Checkpoints(_) => {
                if let Some((lo, hi)) = region.enclosing_interval(from[0]) {
                    if at[0] <= lo {
                        return Outcome::Left;
                    }
                    if at[0] >= hi {
                        return Outcome::Right;
                    }
                }
                Outcome::Boundary
            }
            Region::HalfSpace { .. } => Outcome::Right,
            Region::Band { a, b, .. } => {
                if (at[0] - *a).abs() < (at[0] - *b).abs() {
                    Outcome::Left
                } else {
                    Outcome::Right
                }
            }
            Region::Ball { .. } => Outcome::Boundary,
        }
    }

    fn outside(&self, region: &Region<T>, from: &Point<T>, p: &Point<T>) -> bool {
        match region.enclosing_interval(from[0]) {
            Some((lo, hi)) if self.dim == 1 => !(p[0] > lo && p[0] < hi),
            _ => !region.contains_open(&p[..self.dim]),
        }
    }

    fn clamp_into(&self, region: &Region<T>, from: &Point<T>, to: &Point<T>) -> Point<T> {
        let mut y = [T::zero(); MAX_DIM];
        for i in 0..self.dim {
            y[i] = to[i] - from[i];
        }
        let mut out = *from;
        if y[..self.dim].iter().all(|v| *v == T::zero()) {
            return out;
        }
        let p = project_ray(region, &from[..self.dim], &y[..self.dim]).expect("nonzero displacement");
        out[..self.dim].copy_from_slice(&p);
        out
    }

    /// Samples a proposal from the truncated majorant.
    #[inline]
    fn propose(&self, rng: &mut ChaCha8Rng) -> Point<T> {
        let c = if self.candidates.len() == 1 {
            self.candidates[0]
        } else {
            let u: T = lit::<T>(rng.random::<f64>()) * self.rate;
            *self.candidates.iter().find(|c| u < c.cumulative).unwrap_or(self.candidates.last().expect("nonempty"))
        };
        let e: f64 = Exp1.sample(rng);
        let r = self.h * (lit::<T>(e) / c.alpha).exp();
        let mut y = [T::zero(); MAX_DIM];
        match (c.direction, self.dim) {
            (Direction::Negative, _) => y[0] = -r,
            (Direction::Positive, _) => y[0] = r,
            (Direction::Radial, 1) => y[0] = if rng.random::<bool>() { r } else { -r },
            (Direction::Radial, n) => {
                let mut g = [0.0f64; MAX_DIM];
                let mut s = 0.0;
                while s == 0.0 {
                    s = 0.0;
                    for v in g.iter_mut().take(n) {
                        *v = StandardNormal.sample(rng);
                        s += *v * *v;
                    }
                }
                let s = s.sqrt();
                for i in 0..n {
                    y[i] = r * lit::<T>(g[i] / s);
                }
            }
        }
        y
    }

    #[inline]
    fn accept(&self, x: &Point<T>, y: &Point<T>, rng: &mut ChaCha8Rng) -> Result<bool> {
        if self.exact {
            return Ok(true);
        }
        self.thin(x, y, rng)
    }

    #[inline(never)]
    fn thin(&self, x: &Point<T>, y: &Point<T>, rng: &mut ChaCha8Rng) -> Result<bool> {
        let kernel = &self.spec.kernel;
        let nu = kernel.density(&x[..self.dim], &y[..self.dim]);
        let m = kernel.majorant_density(&y[..self.dim]);
        if nu > m * lit(1.0 + 1e-9) || nu < T::zero() || nu.is_nan() {
            return Err(Error::MajorantViolation {
                state: x[0].to_f64_lossy(),
                jump: y[0].to_f64_lossy(),
                density: nu.to_f64_lossy(),
                majorant: m.to_f64_lossy(),
            });
        }
        Ok(lit::<T>(rng.random::<f64>()) * m < nu)
    }

    /// Runs one path. `observe` receives every piece of trajectory up to
    /// the end of the walk.
    pub(crate) fn walk(
        &self,
        x0: &[T],
        rng: &mut ChaCha8Rng,
        mut observe: impl FnMut(&Segment<T>),
    ) -> Result<Walk<T>> {
        if x0.len() != self.dim {
            return Err(Error::InvalidParameter(format!("start point has dimension {}, expected {}", x0.len(), self.dim)));
        }
        let mut x = [T::zero(); MAX_DIM];
        x[..self.dim].copy_from_slice(x0);
        if let Some(region) = self.region {
            if !region.contains_closed(x0) {
                return Err(Error::Domain { what: "start point outside the closed region", value: x0[0].to_f64_lossy() });
            }
        }
        let mut contact: Option<(T, Outcome, Point<T>)> = None;
        if let Some(side) = self.initial_contact(&x) {
            contact = Some((T::zero(), side, x));
            if self.stop_at_contact || self.mode == Mode::Killed {
                return Ok(Walk { tau: T::zero(), outcome: side, location: x, last: x });
            }
        }
        let mut t = T::zero();
        loop {
            let e: f64 = Exp1.sample(rng);
            let epoch = if self.rate > T::zero() { t + lit::<T>(e) / self.rate } else { T::infinity() };
            let t1 = epoch.min(self.t_max);
            if let Some((tc, side)) = self.flow(&mut x, t, t1, rng, contact.is_some(), &mut observe) {
                if contact.is_none() {
                    contact = Some((tc, side, x));
                }
                if self.stop_at_contact || self.mode == Mode::Killed {
                    return Ok(Walk { tau: tc, outcome: side, location: x, last: x });
                }
            }
            t = t1;
            if t >= self.t_max {
                break;
            }
            let y = self.propose(rng);
            if !self.accept(&x, &y, rng)? {
                continue;
            }
            let mut target = x;
            for i in 0..self.dim {
                target[i] = x[i] + y[i];
            }
            let Some(region) = self.region else {
                x = target;
                continue;
            };
            if !self.outside(region, &x, &target) {
                x = target;
                continue;
            }
            let side = self.side_of(region, &x, &target);
            if self.mode == Mode::Killed {
                return Ok(Walk { tau: t, outcome: side, location: target, last: target });
            }
            x = self.clamp_into(region, &x, &target);
            if contact.is_none() {
                contact = Some((t, side, x));
            }
            if self.stop_at_contact {
                return Ok(Walk { tau: t, outcome: side, location: x, last: x });
            }
        }
        Ok(match contact {
            Some((tc, side, at)) => Walk { tau: tc, outcome: side, location: at, last: x },
            None => Walk { tau: self.t_max, outcome: Outcome::Censored, location: x, last: x },
        })
    }

    /// Whether one sequence of increments can drive paths from several
    /// starting points: a state-independent one-dimensional kernel with
    /// constant drift on an interval, walks ending at first contact.
    pub(crate) fn shares_paths(&self) -> bool {
        self.dim == 1
            && self.spec.drift.is_constant()
            && self.cached.is_some()
            && self.stop_at_contact
            && matches!(self.region, Some(Region::Interval { .. }))
    }

    /// Runs paths from all `starts` on a common increment sequence
    /// (requires [`Self::shares_paths`]). Each start sees an exact path of
    /// the process; only the dependence between starts is shared. Since
    /// the paths are translates of each other, the starts still inside
    /// always form a contiguous range of the sorted starts and only its
    /// two ends need checking.
    ///
    /// With `defer`, Gaussian increments far from the boundary are summed
    /// and drawn only once the nearest start comes within eight standard
    /// deviations of an endpoint. Exit statistics are unaffected (up to an
    /// excursion probability below `e^{-32}`), but intermediate positions
    /// are not reported, so `observe` is not called.
    pub(crate) fn walk_many(
        &self,
        starts: &[T],
        rng: &mut ChaCha8Rng,
        defer: bool,
        mut observe: impl FnMut(usize, &Segment<T>),
    ) -> Result<Vec<Walk<T>>> {
        let (a, b) = match self.region {
            Some(&Region::Interval { a, b }) => (a, b),
            _ => return Err(Error::InvalidParameter("shared paths need an interval".into())),
        };
        let point = |v: T| {
            let mut p = [T::zero(); MAX_DIM];
            p[0] = v;
            p
        };
        if let Some(&s) = starts.iter().find(|&&s| !(s >= a && s <= b)) {
            return Err(Error::Domain { what: "start point outside the closed region", value: s.to_f64_lossy() });
        }
        let mut order: Vec<usize> = (0..starts.len()).collect();
        order.sort_by(|&i, &j| starts[i].partial_cmp(&starts[j]).expect("finite starts"));
        let sorted: Vec<T> = order.iter().map(|&i| starts[i]).collect();
        let mut done: Vec<Option<Walk<T>>> = vec![None; starts.len()];
        let (mut lo, mut hi) = (0, sorted.len());
        let mut finish = |k: usize, tau: T, outcome: Outcome, at: T| {
            done[order[k]] = Some(Walk { tau, outcome, location: point(at), last: point(at) });
        };
        while lo < hi && sorted[lo] <= a {
            finish(lo, T::zero(), Outcome::Left, sorted[lo]);
            lo += 1;
        }
        while hi > lo && sorted[hi - 1] >= b {
            finish(hi - 1, T::zero(), Outcome::Right, sorted[hi - 1]);
            hi -= 1;
        }
        let (mu, var) = match self.cached {
            Some((d, v)) => (self.spec.drift.at_1d(T::zero()) + d, v),
            None => return Err(Error::InvalidParameter("shared paths need a state-independent kernel".into())),
        };
        let diffusive = self.gaussian && var > T::zero();
        let killed = self.mode == Mode::Killed;
        let two: T = lit(2.0);
        let reach: T = lit(40.0);
        let defer = defer && diffusive;
        let k2: T = lit(64.0);
        let mut pending = T::zero();
        let mut shift = T::zero();
        let mut t = T::zero();
        // draws the deferred Gaussian part; exits it causes are dated `t`
        macro_rules! realize {
            () => {
                if pending > T::zero() {
                    let z: f64 = StandardNormal.sample(rng);
                    shift = shift + pending.sqrt() * lit(z);
                    pending = T::zero();
                    while lo < hi && sorted[lo] + shift <= a {
                        finish(lo, t, Outcome::Left, a);
                        lo += 1;
                    }
                    while hi > lo && sorted[hi - 1] + shift >= b {
                        finish(hi - 1, t, Outcome::Right, b);
                        hi -= 1;
                    }
                }
            };
        }
        while lo < hi {
            let e: f64 = Exp1.sample(rng);
            let epoch = if self.rate > T::zero() { t + lit::<T>(e) / self.rate } else { T::infinity() };
            let t1 = epoch.min(self.t_max);
            let dt = t1 - t;
            if defer && dt > T::zero() {
                let v = pending + var * dt;
                let moved = shift + mu * dt;
                let gap = (sorted[lo] + moved - a).min(b - (sorted[hi - 1] + moved));
                if gap > T::zero() && gap * gap > k2 * v {
                    pending = v;
                    shift = moved;
                    t = t1;
                    if t >= self.t_max {
                        break;
                    }
                    let y = self.propose(rng);
                    if !self.accept(&point(sorted[lo] + shift), &y, rng)? {
                        continue;
                    }
                    let y = y[0];
                    let gap = if y < T::zero() { sorted[lo] + shift + y - a } else { b - (sorted[hi - 1] + shift + y) };
                    if !(gap > T::zero() && gap * gap > k2 * pending) {
                        realize!();
                    }
                    if y < T::zero() {
                        while lo < hi && sorted[lo] + shift + y <= a {
                            let target = sorted[lo] + shift + y;
                            finish(lo, t, Outcome::Left, if killed { target } else { a });
                            lo += 1;
                        }
                    } else {
                        while hi > lo && sorted[hi - 1] + shift + y >= b {
                            let target = sorted[hi - 1] + shift + y;
                            finish(hi - 1, t, Outcome::Right, if killed { target } else { b });
                            hi -= 1;
                        }
                    }
                    shift = shift + y;
                    continue;
                }
                realize!();
                if lo >= hi {
                    break;
                }
            }
            if dt > T::zero() && (mu != T::zero() || diffusive) {
                let s2 = var * dt;
                let mut dl = mu * dt;
                if diffusive {
                    let z: f64 = StandardNormal.sample(rng);
                    dl = dl + s2.sqrt() * lit(z);
                }
                // exits at the end of the step
                while lo < hi && sorted[lo] + shift + dl <= a {
                    let x0 = sorted[lo] + shift;
                    let tc = t + dt * ((x0 - a) / -dl).min(T::one());
                    observe(order[lo], &Segment { t0: t, t1: tc, x0: point(x0), x1: point(a) });
                    finish(lo, tc, Outcome::Left, a);
                    lo += 1;
                }
                while hi > lo && sorted[hi - 1] + shift + dl >= b {
                    let x0 = sorted[hi - 1] + shift;
                    let tc = t + dt * ((b - x0) / dl).min(T::one());
                    observe(order[hi - 1], &Segment { t0: t, t1: tc, x0: point(x0), x1: point(b) });
                    finish(hi - 1, tc, Outcome::Right, b);
                    hi -= 1;
                }
                // excursions inside the step, from the running extremes of the bridge
                if diffusive && lo < hi {
                    let tc = t + dt * lit(0.5);
                    let d0 = sorted[lo] + shift - a;
                    if a.is_finite() && two * d0 * (d0 + dl) <= reach * s2 {
                        let u: f64 = rng.random();
                        let m = (dl - (dl * dl - two * s2 * lit::<T>(u.ln())).sqrt()) * lit(0.5);
                        while lo < hi && sorted[lo] + shift + m <= a {
                            let x0 = sorted[lo] + shift;
                            observe(order[lo], &Segment { t0: t, t1: tc, x0: point(x0), x1: point(a) });
                            finish(lo, tc, Outcome::Left, a);
                            lo += 1;
                        }
                    }
                    if lo < hi {
                        let d0 = b - (sorted[hi - 1] + shift);
                        if b.is_finite() && two * d0 * (d0 - dl) <= reach * s2 {
                            let u: f64 = rng.random();
                            let m = (dl + (dl * dl - two * s2 * lit::<T>(u.ln())).sqrt()) * lit(0.5);
                            while hi > lo && sorted[hi - 1] + shift + m >= b {
                                let x0 = sorted[hi - 1] + shift;
                                observe(order[hi - 1], &Segment { t0: t, t1: tc, x0: point(x0), x1: point(b) });
                                finish(hi - 1, tc, Outcome::Right, b);
                                hi -= 1;
                            }
                        }
                    }
                }
                for k in lo..hi {
                    let x0 = sorted[k] + shift;
                    observe(order[k], &Segment { t0: t, t1, x0: point(x0), x1: point(x0 + dl) });
                }
                shift = shift + dl;
            } else if dt > T::zero() {
                for k in lo..hi {
                    let x = point(sorted[k] + shift);
                    observe(order[k], &Segment { t0: t, t1, x0: x, x1: x });
                }
            }
            t = t1;
            if t >= self.t_max || lo >= hi {
                break;
            }
            let y = self.propose(rng);
            if !self.accept(&point(sorted[lo] + shift), &y, rng)? {
                continue;
            }
            let y = y[0];
            if y < T::zero() {
                while lo < hi && sorted[lo] + shift + y <= a {
                    let target = sorted[lo] + shift + y;
                    finish(lo, t, Outcome::Left, if killed { target } else { a });
                    lo += 1;
                }
            } else {
                while hi > lo && sorted[hi - 1] + shift + y >= b {
                    let target = sorted[hi - 1] + shift + y;
                    finish(hi - 1, t, Outcome::Right, if killed { target } else { b });
                    hi -= 1;
                }
            }
            shift = shift + y;
        }
        for k in lo..hi {
            finish(k, self.t_max, Outcome::Censored, sorted[k] + shift);
        }
        Ok(done.into_iter().map(|w| w.expect("every start resolved")).collect())
    }

    /// Moves `x` along the drift (and Gaussian correction) from `t0` to
    /// `t1`. Returns the first boundary contact, if any, with `x` left on
    /// the boundary.
    fn flow(
        &self,
        x: &mut Point<T>,
        t0: T,
        t1: T,
        rng: &mut ChaCha8Rng,
        already_touched: bool,
        observe: &mut impl FnMut(&Segment<T>),
    ) -> Option<(T, Outcome)> {
        if !(t1 > t0) {
            return None;
        }
        if self.gaussian {
            return self.diffuse(x, t0, t1, rng, observe);
        }
        if self.velocity_is_constant() {
            let v = self.velocity(x);
            return self.linear(x, v, t0, t1, already_touched, observe);
        }
        self.integrate(x, t0, t1, already_touched, observe)
    }

    fn linear(
        &self,
        x: &mut Point<T>,
        v: Point<T>,
        t0: T,
        t1: T,
        already_touched: bool,
        observe: &mut impl FnMut(&Segment<T>),
    ) -> Option<(T, Outcome)> {
        let speed = v[..self.dim].iter().fold(T::zero(), |s, &c| s + c * c).sqrt();
        let start = *x;
        let dt = t1 - t0;
        let mut end = start;
        for i in 0..self.dim {
            end[i] = start[i] + v[i] * dt;
        }
        let Some(region) = self.region else {
            observe(&Segment { t0, t1, x0: start, x1: end });
            *x = end;
            return None;
        };
        if speed == T::zero() || !self.outside(region, &start, &end) {
            observe(&Segment { t0, t1, x0: start, x1: end });
            *x = end;
            return None;
        }
        let mut e = [T::zero(); MAX_DIM];
        for i in 0..self.dim {
            e[i] = v[i] / speed;
        }
        let reach = ray_length(region, &start[..self.dim], &e[..self.dim]) / speed;
        let tc = (t0 + reach).min(t1);
        let hit = self.clamp_into(region, &start, &end);
        observe(&Segment { t0, t1: tc, x0: start, x1: hit });
        if tc < t1 {
            // the drift keeps pushing outwards; the state rests on the boundary
            observe(&Segment { t0: tc, t1, x0: hit, x1: hit });
        }
        *x = hit;
        if already_touched {
            return None;
        }
        Some((tc, self.side_of(region, &start, &hit)))
    }

    /// Classical fourth-order integration of a state-dependent drift.
    fn integrate(
        &self,
        x: &mut Point<T>,
        t0: T,
        t1: T,
        already_touched: bool,
        observe: &mut impl FnMut(&Segment<T>),
    ) -> Option<(T, Outcome)> {
        let max_step: T = lit(1e-2);
        let span = t1 - t0;
        let steps = (span / max_step).ceil().to_usize().unwrap_or(usize::MAX).clamp(16, 1 << 24);
        let dt = span / T::from_usize_lossy(steps);
        let mut contact = None;
        for k in 0..steps {
            let ta = t0 + dt * T::from_usize_lossy(k);
            let tb = if k + 1 == steps { t1 } else { ta + dt };
            let h = tb - ta;
            let start = *x;
            let end = self.rk4(&start, h);
            match self.region {
                Some(region) if self.outside(region, &start, &end) => {
                    // bisect on the step length for the contact time
                    let (mut lo, mut hi) = (T::zero(), h);
                    for _ in 0..60 {
                        let mid = (lo + hi) * lit(0.5);
                        if self.outside(region, &start, &self.rk4(&start, mid)) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    let hit = self.clamp_into(region, &start, &self.rk4(&start, hi));
                    let tc = ta + hi;
                    observe(&Segment { t0: ta, t1: tc, x0: start, x1: hit });
                    observe(&Segment { t0: tc, t1: tb, x0: hit, x1: hit });
                    *x = hit;
                    if contact.is_none() && !already_touched {
                        contact = Some((tc, self.side_of(region, &start, &hit)));
                        if self.stop_at_contact || self.mode == Mode::Killed {
                            return contact;
                        }
                    }
                }
                _ => {
                    observe(&Segment { t0: ta, t1: tb, x0: start, x1: end });
                    *x = end;
                }
            }
        }
        contact
    }

    fn rk4(&self, x: &Point<T>, h: T) -> Point<T> {
        let half: T = lit(0.5);
        let shift = |p: &Point<T>, v: &Point<T>, c: T| {
            let mut q = *p;
            for i in 0..self.dim {
                q[i] = p[i] + v[i] * c;
            }
            q
        };
        let k1 = self.velocity(x);
        let k2 = self.velocity(&shift(x, &k1, h * half));
        let k3 = self.velocity(&shift(x, &k2, h * half));
        let k4 = self.velocity(&shift(x, &k3, h));
        let mut end = *x;
        for i in 0..self.dim {
            end[i] = x[i] + h * lit(1.0 / 6.0) * (k1[i] + (k2[i] + k3[i]) * lit(2.0) + k4[i]);
        }
        end
    }

    /// Fraction of the chord `start → end` at which the boundary is met,
    /// and the boundary point itself.
    fn locate(&self, region: &Region<T>, start: &Point<T>, end: &Point<T>) -> (T, Point<T>) {
        let hit = self.clamp_into(region, start, end);
        let num = (0..self.dim).fold(T::zero(), |s, i| s + (hit[i] - start[i]).powi(2)).sqrt();
        let den = (0..self.dim).fold(T::zero(), |s, i| s + (end[i] - start[i]).powi(2)).sqrt();
        let frac = if den > T::zero() { (num / den).min(T::one()) } else { T::zero() };
        (frac, hit)
    }

    /// Drift plus Gaussian increment matched to the truncated second
    /// moment, with a Brownian-bridge check for excursions across the
    /// boundary inside the step.
    fn diffuse(
        &self,
        x: &mut Point<T>,
        t0: T,
        t1: T,
        rng: &mut ChaCha8Rng,
        observe: &mut impl FnMut(&Segment<T>),
    ) -> Option<(T, Outcome)> {
        let (comp, var) = self.jump_terms_at(x);
        let mu = self.spec.drift.at_1d(x[0]) + comp;
        let dt = t1 - t0;
        let z: f64 = StandardNormal.sample(rng);
        let start = *x;
        let mut end = start;
        end[0] = start[0] + mu * dt + (var * dt).sqrt() * lit(z);
        let Some(region) = self.region else {
            observe(&Segment { t0, t1, x0: start, x1: end });
            *x = end;
            return None;
        };
        let (lo, hi) = region.enclosing_interval(start[0]).expect("interval");
        if self.outside(region, &start, &end) {
            let (frac, hit) = self.locate(region, &start, &end);
            let tc = t0 + dt * frac;
            observe(&Segment { t0, t1: tc, x0: start, x1: hit });
            *x = hit;
            return Some((tc, self.side_of(region, &start, &hit)));
        }
        if var > T::zero() {
            let s2 = var * dt;
            for (bound, side) in [(lo, Outcome::Left), (hi, Outcome::Right)] {
                if !bound.is_finite() {
                    continue;
                }
                let q = lit::<T>(2.0) * (start[0] - bound).abs() * (end[0] - bound).abs() / s2;
                if q > lit(40.0) {
                    continue;
                }
                if lit::<T>(rng.random::<f64>()) < (-q).exp() {
                    let tc = t0 + dt * lit(0.5);
                    let mut hit = start;
                    hit[0] = bound;
                    observe(&Segment { t0, t1: tc, x0: start, x1: hit });
                    *x = hit;
                    return Some((tc, side));
                }
            }
        }
        observe(&Segment { t0, t1, x0: start, x1: end });
        *x = end;
        None
    }
}
