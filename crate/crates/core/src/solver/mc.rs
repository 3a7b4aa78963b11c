use super::{BoundaryOperator, BvpProblem, Method, SolutionTable};
use crate::error::{Error, Result};
use crate::montecarlo::{discounted_length, engine_for, run_paths, Engine, Mode, Moments, Outcome, Segment, SimParams, STREAM_STRIDE};
use crate::quad::gauss_legendre_f64;
use crate::scalar::{lit, Real};

const CENSORING_LIMIT: f64 = 0.01;

/// `∫_{t0}^{t1} e^{-λs} g(X_s) ds` along one linear segment.
fn segment_source<T: Real>(problem: &BvpProblem<T>, lambda: f64, s: &Segment<T>) -> f64 {
    let (t0, t1) = (s.t0.to_f64_lossy(), s.t1.to_f64_lossy());
    if !(t1 > t0) {
        return 0.0;
    }
    if s.x0[0] == s.x1[0] {
        return problem.g.eval(s.x0[0]).to_f64_lossy() * discounted_length(lambda, t0, t1);
    }
    let (x0, x1) = (s.x0[0].to_f64_lossy(), s.x1[0].to_f64_lossy());
    let half = 0.5 * (t1 - t0);
    gauss_legendre_f64(4)
        .iter()
        .map(|&(u, w)| {
            let t = t0 + half * (u + 1.0);
            let x = x0 + (x1 - x0) * 0.5 * (u + 1.0);
            w * half * (-lambda * t).exp() * problem.g.eval(lit(x)).to_f64_lossy()
        })
        .sum()
}

#[derive(Clone, Default)]
struct PointAcc {
    value: Moments,
    censored: f64,
}

/// Solves the problem by the probabilistic representation
/// `f(x) = f_a E[e^{-λτ}; left] + f_b E[e^{-λτ}; right] - E ∫_0^τ e^{-λs} g(X_s) ds`,
/// averaging the combined functional path by path, so the standard error
/// accounts for the correlation between its three parts. `params.lambda`
/// is ignored in favour of the problem's `λ`.
pub fn solve_bvp_mc<T: Real>(problem: &BvpProblem<T>, params: &SimParams<T>, grid: &[T]) -> Result<SolutionTable<T>> {
    problem.validate()?;
    params.validate()?;
    let (a, b) = problem.bounds();
    if let Some(&x) = grid.iter().find(|&&x| !(x >= a && x <= b)) {
        return Err(Error::Domain { what: "grid point outside the interval", value: x.to_f64_lossy() });
    }
    let params = SimParams { lambda: problem.lambda, ..*params };
    let mode = match problem.operator {
        BoundaryOperator::Interrupted => Mode::Stopped,
        BoundaryOperator::Killed => Mode::Killed,
    };
    let engine = engine_for(&problem.spec, &problem.region, mode, &params)?;
    let lambda = problem.lambda.to_f64_lossy();
    let (f_a, f_b) = problem.boundary_values();
    let (f_a, f_b) = (f_a.to_f64_lossy(), f_b.to_f64_lossy());
    let exit_value = |outcome: Outcome, tau: f64| -> (f64, f64) {
        let d = (-lambda * tau).exp();
        match outcome {
            Outcome::Left => (f_a * d, 0.0),
            Outcome::Right => (f_b * d, 0.0),
            Outcome::Boundary => (0.0, 0.0),
            Outcome::Censored => (0.0, 1.0),
        }
    };

    let interior: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] > a && grid[i] < b).collect();
    let starts: Vec<T> = interior.iter().map(|&i| grid[i]).collect();
    let k = starts.len();
    let accs: Vec<PointAcc> = if engine.shares_paths() {
        run_paths(
            params.n_paths,
            || (vec![PointAcc::default(); k], vec![0.0; k]),
            |(accs, source), p| {
                source.iter_mut().for_each(|v| *v = 0.0);
                let mut rng = Engine::rng(&params, p);
                let walks = engine.walk_many(&starts, &mut rng, false, |i, s| source[i] += segment_source(problem, lambda, s))?;
                for ((acc, w), g) in accs.iter_mut().zip(walks).zip(source.iter()) {
                    let (v, c) = exit_value(w.outcome, w.tau.to_f64_lossy());
                    acc.value.push(v - g);
                    acc.censored += c;
                }
                Ok(())
            },
            |t, o| {
                for (x, y) in t.0.iter_mut().zip(o.0) {
                    x.value.merge(&y.value);
                    x.censored += y.censored;
                }
            },
        )?
        .0
    } else {
        starts
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                run_paths(
                    params.n_paths,
                    PointAcc::default,
                    |acc, p| {
                        let mut rng = Engine::rng(&params, j as u64 * STREAM_STRIDE + p);
                        let mut g = 0.0;
                        let w = engine.walk(&[x], &mut rng, |s| g += segment_source(problem, lambda, s))?;
                        let (v, c) = exit_value(w.outcome, w.tau.to_f64_lossy());
                        acc.value.push(v - g);
                        acc.censored += c;
                        Ok(())
                    },
                    |t, o| {
                        t.value.merge(&o.value);
                        t.censored += o.censored;
                    },
                )
            })
            .collect::<Result<_>>()?
    };

    let n = params.n_paths as f64;
    let mut values = vec![T::zero(); grid.len()];
    let mut se = vec![T::zero(); grid.len()];
    for (i, &x) in grid.iter().enumerate() {
        if x == a {
            values[i] = problem.f_a;
        } else if x == b {
            values[i] = problem.f_b;
        }
    }
    for (&i, acc) in interior.iter().zip(&accs) {
        let fraction = acc.censored / n;
        if fraction > CENSORING_LIMIT {
            return Err(Error::Censored { fraction, threshold: CENSORING_LIMIT });
        }
        let e = acc.value.estimate::<T>();
        values[i] = e.value;
        se[i] = e.se;
    }
    Ok(SolutionTable { grid: grid.to_vec(), values, se, method: Method::MonteCarlo, residual: T::zero() })
}
