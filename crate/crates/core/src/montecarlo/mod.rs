//! Simulation of the ν_h-truncated jump processes, free or modified at a
//! boundary, with exit statistics and occupation-till-exit histograms.
//!
//! Every path draws its randomness from a ChaCha8 generator keyed by the
//! seed and a per-path stream, and sums are reduced block by block in a
//! fixed order, so results do not depend on the number of threads.

mod engine;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, OrderClass, Region};
use crate::scalar::{lit, Real};

pub(crate) use engine::{Engine, Segment};

const BLOCK: usize = 1024;

/// Numerical parameters of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams<T> {
    /// Jumps shorter than `h` are removed from the kernel.
    pub h: T,
    pub n_paths: usize,
    /// Paths still running at `t_max` are censored.
    pub t_max: T,
    pub seed: u64,
    /// Discount rate for the transforms `E[e^{-λτ}; ·]`.
    pub lambda: T,
    /// Replace the removed jumps of bounded-variation kernels by their
    /// mean drift `∫_{|y|≤h} y ν(x,y) dy`.
    pub small_jump_drift: bool,
    /// Add a Gaussian increment matched to `∫_{|y|≤h} y² ν` for
    /// compensated kernels.
    pub gaussian_correction: bool,
}

impl<T: Real> SimParams<T> {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self {
            h: lit(1e-3),
            n_paths,
            t_max: lit(1e3),
            seed,
            lambda: T::zero(),
            small_jump_drift: true,
            gaussian_correction: true,
        }
    }

    pub fn with_h(mut self, h: T) -> Self {
        self.h = h;
        self
    }

    pub fn with_t_max(mut self, t_max: T) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_lambda(mut self, lambda: T) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > T::zero()) {
            return Err(Error::InvalidParameter(format!("truncation h must be positive, got {}", self.h)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("path count must be positive".into()));
        }
        if !(self.t_max > T::zero()) {
            return Err(Error::InvalidParameter(format!("time cap must be positive, got {}", self.t_max)));
        }
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("discount must be nonnegative, got {}", self.lambda)));
        }
        Ok(())
    }
}

/// Boundary behaviour of the simulated process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Crossing jumps are clamped to the boundary and the path goes on.
    Interrupted,
    /// Crossing jumps are clamped to the boundary and the path freezes.
    Stopped,
    /// The path ends with the first crossing jump.
    Killed,
    /// The region is ignored.
    Free,
}

/// How a path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Exit through the lower end (the lower face of a band).
    Left,
    /// Exit through the upper end (a half-space face, the upper face of a band).
    Right,
    /// Exit through a boundary without orientation (ball, checkpoint start).
    Boundary,
    /// Still inside at the time cap; always the outcome of free paths.
    Censored,
}

/// One simulated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord<T> {
    /// First boundary contact, or `t_max` when censored.
    pub exit_time: T,
    pub outcome: Outcome,
    /// Boundary point reached at `exit_time`; for killed paths the landing
    /// point of the fatal jump.
    pub exit_location: Vec<T>,
    /// States visited, each with its holding time. For interrupted paths
    /// the record continues after the first contact up to `t_max`.
    pub states: Vec<(Vec<T>, T)>,
    pub final_state: Vec<T>,
}

impl<T> PathRecord<T> {
    pub fn censored(&self) -> bool {
        self.outcome == Outcome::Censored
    }
}

fn record_path<T: Real>(engine: &Engine<'_, T>, x0: &[T], params: &SimParams<T>, stream: u64) -> Result<PathRecord<T>> {
    let dim = x0.len();
    let mut rng = Engine::rng(params, stream);
    let mut states = Vec::new();
    let walk = engine.walk(x0, &mut rng, |s| {
        if s.t1 > s.t0 {
            states.push((s.x0[..dim].to_vec(), s.t1 - s.t0));
        }
    })?;
    Ok(PathRecord {
        exit_time: walk.tau,
        outcome: walk.outcome,
        exit_location: walk.location[..dim].to_vec(),
        states,
        final_state: walk.last[..dim].to_vec(),
    })
}

/// Simulates one path of the truncated bounded-variation process.
pub fn simulate_path<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    mode: Mode,
    x0: &[T],
    params: &SimParams<T>,
    stream: u64,
) -> Result<PathRecord<T>> {
    spec.require_class(OrderClass::BoundedVariation)?;
    let engine = Engine::new(spec, region, mode, params, mode != Mode::Interrupted)?;
    record_path(&engine, x0, params, stream)
}

/// Simulates one path of the compensated-truncation scheme for kernels
/// of order in `(1,2)`: large jumps as compound Poisson, small ones
/// replaced by their compensating drift and a matched Gaussian increment.
/// The path is stopped at the boundary.
pub fn simulate_path_order2<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    x0: T,
    params: &SimParams<T>,
    stream: u64,
) -> Result<PathRecord<T>> {
    spec.require_class(OrderClass::Compensated)?;
    let engine = Engine::new(spec, region, Mode::Stopped, params, true)?;
    record_path(&engine, &[x0], params, stream)
}

/// Runs `n` paths in blocks, in parallel, and folds the block accumulators
/// in index order.
pub(crate) fn run_paths<A: Send>(
    n: usize,
    make: impl Fn() -> A + Sync,
    path: impl Fn(&mut A, u64) -> Result<()> + Sync,
    merge: impl Fn(&mut A, A),
) -> Result<A> {
    let blocks = n.div_ceil(BLOCK);
    let parts: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = make();
            for p in b * BLOCK..((b + 1) * BLOCK).min(n) {
                path(&mut acc, p as u64)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = make();
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

/// Sample mean with its standard error `sd/√N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub se: T,
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Moments {
    pub n: f64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.n += 1.0;
        self.sum += v;
        self.sum_sq += v * v;
    }

    pub fn merge(&mut self, o: &Moments) {
        self.n += o.n;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n
    }

    pub fn se(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        let m = self.mean();
        let var = ((self.sum_sq - self.n * m * m) / (self.n - 1.0)).max(0.0);
        (var / self.n).sqrt()
    }

    pub fn estimate<T: Real>(&self) -> Estimate<T> {
        Estimate { value: lit(self.mean()), se: lit(self.se()) }
    }
}

/// Monte Carlo summary of the exit behaviour from one starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitStatistics<T> {
    pub n_paths: usize,
    pub p_left: Estimate<T>,
    pub p_right: Estimate<T>,
    pub p_boundary: Estimate<T>,
    pub p_censored: Estimate<T>,
    /// `E[τ ∧ t_max]`.
    pub mean_exit_time: Estimate<T>,
    /// `E[e^{-λτ}; left]`.
    pub discounted_left: Estimate<T>,
    /// `E[e^{-λτ}; right]`.
    pub discounted_right: Estimate<T>,
    /// More than 1% of the paths hit the time cap.
    pub censoring_warning: bool,
}

#[derive(Debug, Clone, Copy, Default)]
struct ExitAcc {
    left: Moments,
    right: Moments,
    boundary: Moments,
    censored: Moments,
    tau: Moments,
    disc_left: Moments,
    disc_right: Moments,
}

impl ExitAcc {
    fn push(&mut self, outcome: Outcome, tau: f64, lambda: f64) {
        let ind = |o: Outcome| if outcome == o { 1.0 } else { 0.0 };
        let d = (-lambda * tau).exp();
        self.left.push(ind(Outcome::Left));
        self.right.push(ind(Outcome::Right));
        self.boundary.push(ind(Outcome::Boundary));
        self.censored.push(ind(Outcome::Censored));
        self.tau.push(tau);
        self.disc_left.push(d * ind(Outcome::Left));
        self.disc_right.push(d * ind(Outcome::Right));
    }

    fn merge(&mut self, o: ExitAcc) {
        for (a, b) in [
            (&mut self.left, &o.left),
            (&mut self.right, &o.right),
            (&mut self.boundary, &o.boundary),
            (&mut self.censored, &o.censored),
            (&mut self.tau, &o.tau),
            (&mut self.disc_left, &o.disc_left),
            (&mut self.disc_right, &o.disc_right),
        ] {
            a.merge(b);
        }
    }

    fn finish<T: Real>(&self, n: usize) -> ExitStatistics<T> {
        let total = self.left.sum + self.right.sum + self.boundary.sum;
        // the censored share is the exact complement of the counted exits
        let censored = Moments { n: self.censored.n, sum: n as f64 - total, sum_sq: n as f64 - total };
        let p_censored = censored.estimate();
        ExitStatistics {
            n_paths: n,
            p_left: self.left.estimate(),
            p_right: self.right.estimate(),
            p_boundary: self.boundary.estimate(),
            censoring_warning: censored.mean() > 0.01,
            p_censored,
            mean_exit_time: self.tau.estimate(),
            discounted_left: self.disc_left.estimate(),
            discounted_right: self.disc_right.estimate(),
        }
    }
}

pub(crate) fn engine_for<'a, T: Real>(
    spec: &'a GeneratorSpec<T>,
    region: &'a Region<T>,
    mode: Mode,
    params: &SimParams<T>,
) -> Result<Engine<'a, T>> {
    if spec.order_class() == OrderClass::Compensated && mode == Mode::Killed {
        return Err(Error::OrderClass { expected: OrderClass::BoundedVariation, got: OrderClass::Compensated });
    }
    Engine::new(spec, region, mode, params, true)
}

/// Exit probabilities, mean exit time and discounted exit transforms from
/// `N = params.n_paths` independent paths. Compensated kernels are run
/// with the order-two scheme (stopped at the boundary).
pub fn exit_statistics<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    mode: Mode,
    x0: &[T],
    params: &SimParams<T>,
) -> Result<ExitStatistics<T>> {
    exit_statistics_streams(spec, region, mode, x0, params, 0)
}

pub(crate) fn exit_statistics_streams<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    mode: Mode,
    x0: &[T],
    params: &SimParams<T>,
    stream_base: u64,
) -> Result<ExitStatistics<T>> {
    let engine = engine_for(spec, region, mode, params)?;
    let lambda = params.lambda.to_f64_lossy();
    let acc = run_paths(
        params.n_paths,
        ExitAcc::default,
        |acc, p| {
            let mut rng = Engine::rng(params, stream_base + p);
            let w = engine.walk(x0, &mut rng, |_| {})?;
            acc.push(w.outcome, w.tau.to_f64_lossy(), lambda);
            Ok(())
        },
        ExitAcc::merge,
    )?;
    Ok(acc.finish(params.n_paths))
}

/// Offset between the stream ranges of independently simulated starts.
pub(crate) const STREAM_STRIDE: u64 = 1 << 40;

/// [`exit_statistics`] for several one-dimensional starting points. For
/// translation-invariant generators (state-independent kernel, constant
/// drift, interval region) all starts are driven by the same increments,
/// which keeps each estimate exact while sharing the simulation cost;
/// otherwise every start gets its own streams.
pub fn exit_statistics_many<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    mode: Mode,
    starts: &[T],
    params: &SimParams<T>,
) -> Result<Vec<ExitStatistics<T>>> {
    let engine = engine_for(spec, region, mode, params)?;
    if !engine.shares_paths() {
        return starts
            .iter()
            .enumerate()
            .map(|(i, &x)| exit_statistics_streams(spec, region, mode, &[x], params, i as u64 * STREAM_STRIDE))
            .collect();
    }
    let lambda = params.lambda.to_f64_lossy();
    let k = starts.len();
    let accs = run_paths(
        params.n_paths,
        || vec![ExitAcc::default(); k],
        |accs, p| {
            let mut rng = Engine::rng(params, p);
            let walks = engine.walk_many(starts, &mut rng, true, |_, _| {})?;
            for (acc, w) in accs.iter_mut().zip(walks) {
                acc.push(w.outcome, w.tau.to_f64_lossy(), lambda);
            }
            Ok(())
        },
        |t, o| t.iter_mut().zip(o).for_each(|(a, b)| a.merge(b)),
    )?;
    Ok(accs.iter().map(|a| a.finish(params.n_paths)).collect())
}

/// Binned estimate of the occupation-till-exit measure
/// `H(x, B) = E ∫_0^τ e^{-λs} 1_B(X_s) ds` (undiscounted when `λ = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationHistogram<T> {
    pub edges: Vec<T>,
    pub mass: Vec<Estimate<T>>,
    /// Sum over bins, path by path.
    pub total: Estimate<T>,
    /// `E[τ ∧ t_max]` from the same paths.
    pub mean_exit_time: Estimate<T>,
}

impl<T: Real> OccupationHistogram<T> {
    pub fn centres(&self) -> Vec<T> {
        self.edges.windows(2).map(|w| (w[0] + w[1]) * lit(0.5)).collect()
    }
}

/// `∫_{ta}^{tb} e^{-λs} ds`.
#[inline]
pub(crate) fn discounted_length(lambda: f64, ta: f64, tb: f64) -> f64 {
    if lambda == 0.0 {
        tb - ta
    } else {
        (-lambda * ta).exp() * -(-lambda * (tb - ta)).exp_m1() / lambda
    }
}

/// Adds the time a linear segment spends in each of the uniform bins on
/// `[lo, lo + width·bins]`.
fn deposit(seg: &Segment<impl Real>, lo: f64, width: f64, lambda: f64, out: &mut [f64]) {
    let (t0, t1) = (seg.t0.to_f64_lossy(), seg.t1.to_f64_lossy());
    if !(t1 > t0) {
        return;
    }
    let (x0, x1) = (seg.x0[0].to_f64_lossy(), seg.x1[0].to_f64_lossy());
    let last = out.len() - 1;
    let bin = |x: f64| (((x - lo) / width).floor().max(0.0) as usize).min(last);
    if x0 == x1 {
        let w = discounted_length(lambda, t0, t1);
        let k = (x0 - lo) / width;
        let edge = k.round();
        if k == edge && edge >= 1.0 && (edge as usize) <= last {
            // a state resting on an interior edge belongs to both bins
            out[edge as usize - 1] += 0.5 * w;
            out[edge as usize] += 0.5 * w;
        } else {
            out[bin(x0)] += w;
        }
        return;
    }
    let (b0, b1) = (bin(x0), bin(x1));
    if b0 == b1 {
        out[b0] += discounted_length(lambda, t0, t1);
        return;
    }
    // split the time interval at the crossed bin edges
    let speed = (x1 - x0) / (t1 - t0);
    let step: isize = if b1 > b0 { 1 } else { -1 };
    let mut b = b0 as isize;
    let mut ta = t0;
    while b != b1 as isize {
        let edge = if step > 0 { lo + width * (b + 1) as f64 } else { lo + width * b as f64 };
        let tb = (t0 + (edge - x0) / speed).clamp(ta, t1);
        out[b as usize] += discounted_length(lambda, ta, tb);
        ta = tb;
        b += step;
    }
    out[b1] += discounted_length(lambda, ta, t1);
}

/// Occupation histogram over `bins` equal bins of a finite interval.
pub fn occupation_histogram<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    mode: Mode,
    x0: T,
    params: &SimParams<T>,
    bins: usize,
) -> Result<OccupationHistogram<T>> {
    let Region::Interval { a, b } = *region else {
        return Err(Error::InvalidParameter("occupation histograms need an interval region".into()));
    };
    if bins == 0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter("occupation histograms need bins ≥ 1 and a finite interval".into()));
    }
    if mode == Mode::Free {
        return Err(Error::InvalidParameter("free paths have no exit time".into()));
    }
    let engine = engine_for(spec, region, mode, params)?;
    let lambda = params.lambda.to_f64_lossy();
    let (lo, hi) = (a.to_f64_lossy(), b.to_f64_lossy());
    let width = (hi - lo) / bins as f64;

    struct Acc {
        bins: Vec<Moments>,
        total: Moments,
        tau: Moments,
        scratch: Vec<f64>,
    }
    let make = || Acc { bins: vec![Moments::default(); bins], total: Moments::default(), tau: Moments::default(), scratch: vec![0.0; bins] };
    let acc = run_paths(
        params.n_paths,
        make,
        |acc, p| {
            let mut rng = Engine::rng(params, p);
            acc.scratch.iter_mut().for_each(|v| *v = 0.0);
            let scratch = &mut acc.scratch;
            let w = engine.walk(&[x0], &mut rng, |s| deposit(s, lo, width, lambda, scratch))?;
            let mut sum = 0.0;
            for (m, v) in acc.bins.iter_mut().zip(scratch.iter()) {
                m.push(*v);
                sum += v;
            }
            acc.total.push(sum);
            acc.tau.push(w.tau.to_f64_lossy());
            Ok(())
        },
        |t, o| {
            for (a, b) in t.bins.iter_mut().zip(&o.bins) {
                a.merge(b);
            }
            t.total.merge(&o.total);
            t.tau.merge(&o.tau);
        },
    )?;
    let edges = (0..=bins).map(|k| if k == bins { b } else { a + (b - a) * T::from_usize_lossy(k) / T::from_usize_lossy(bins) }).collect();
    Ok(OccupationHistogram {
        edges,
        mass: acc.bins.iter().map(Moments::estimate).collect(),
        total: acc.total.estimate(),
        mean_exit_time: acc.tau.estimate(),
    })
}
