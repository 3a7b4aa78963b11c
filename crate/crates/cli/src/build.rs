//! Turns configuration sections into library objects.

use fracjump::fracops::{MixedTerm, Side};
use fracjump::function::ScalarFunction;
use fracjump::generators::{Direction, Drift, GeneratorSpec, JumpKernel, Mollifier, OrderClass, PowerTerm, Region};
use fracjump::montecarlo::SimParams;

use crate::config::{JumpSide, KernelClass, KernelConfig, MixedTermConfig, MollifierName, RegionConfig, RunConfig, SideName};
use crate::expr::Expr;
use crate::CliError;

/// A function of `x` given by an expression.
pub fn function(src: &str) -> Result<ScalarFunction<f64>, CliError> {
    let e = Expr::parse(src, &["x"])?;
    Ok(match e.constant() {
        Some(c) => ScalarFunction::constant(c),
        None => ScalarFunction::smooth(move |x| e.eval(&[x])),
    })
}

pub fn side(s: SideName) -> Side {
    match s {
        SideName::Right => Side::Right,
        SideName::Left => Side::Left,
    }
}

pub fn mixed_terms(terms: &[MixedTermConfig]) -> Result<Vec<MixedTerm<f64>>, CliError> {
    if terms.is_empty() {
        return Err(CliError::Config("mixed operator needs at least one term".into()));
    }
    Ok(terms.iter().map(|t| MixedTerm::new(t.weight, t.beta, side(t.side), t.anchor)).collect::<Result<_, _>>()?)
}

pub fn kernel(cfg: &KernelConfig) -> Result<JumpKernel<f64>, CliError> {
    Ok(match cfg {
        KernelConfig::StableOneSided { beta, direction, weight } => {
            let dir = match direction {
                JumpSide::Negative => Direction::Negative,
                JumpSide::Positive => Direction::Positive,
            };
            JumpKernel::stable_one_sided(*beta, dir, *weight)?
        }
        KernelConfig::StableSymmetric { beta, dim } => JumpKernel::stable_symmetric(*beta, *dim)?,
        KernelConfig::StableLike { beta, dim, a, a_max } => {
            let names: &[&str] = &["x", "x1", "x2", "x3"];
            let e = Expr::parse(a, names)?;
            let modulation = move |x: &[f64]| {
                let mut v = [0.0; 4];
                v[0] = x[0];
                for (slot, xi) in v[1..].iter_mut().zip(x) {
                    *slot = *xi;
                }
                e.eval(&v)
            };
            JumpKernel::stable_like(*dim, *beta, modulation, *a_max)?
        }
        KernelConfig::TemperedStable { beta, theta, c_neg, c_pos } => {
            JumpKernel::tempered_stable(*beta, *theta, *c_neg, *c_pos)?
        }
        KernelConfig::Mixed { terms } => JumpKernel::fractional_mixed(&mixed_terms(terms)?)?,
        KernelConfig::Expression { density, class, majorant_beta, majorant_coeff, state_independent } => {
            let e = Expr::parse(density, &["x", "y"])?;
            let class = match class {
                KernelClass::BoundedVariation => OrderClass::BoundedVariation,
                KernelClass::Compensated => OrderClass::Compensated,
            };
            let majorant = vec![PowerTerm::new(Direction::Radial, *majorant_coeff, *majorant_beta)];
            JumpKernel::custom(1, class, move |x: &[f64], y: &[f64]| e.eval(&[x[0], y[0]]), majorant, *state_independent)?
        }
    })
}

pub fn spec(cfg: &RunConfig) -> Result<GeneratorSpec<f64>, CliError> {
    let mut spec = GeneratorSpec::new(kernel(cfg.section(&cfg.kernel, "kernel")?)?);
    if let Some(src) = &cfg.drift {
        let e = Expr::parse(src, &["x"])?;
        let dim = spec.dim();
        spec = spec.with_drift(match e.constant() {
            Some(0.0) => Drift::Zero,
            Some(c) => {
                let mut v = vec![0.0; dim];
                v[0] = c;
                Drift::Constant(v)
            }
            None if dim == 1 => Drift::scalar(move |x| e.eval(&[x])),
            None => return Err(CliError::Config("state-dependent drift is one-dimensional only".into())),
        });
    }
    Ok(spec.with_mollifier(match cfg.mollifier {
        MollifierName::Indicator => Mollifier::Indicator,
        MollifierName::Cauchy => Mollifier::Cauchy,
        MollifierName::Full => Mollifier::Full,
    }))
}

pub fn region(cfg: &RunConfig) -> Result<Region<f64>, CliError> {
    Ok(match cfg.section(&cfg.region, "region")? {
        RegionConfig::Interval { a, b } => Region::interval(*a, *b)?,
        RegionConfig::Checkpoints { points } => Region::checkpoints(points.clone())?,
    })
}

pub fn interval(cfg: &RunConfig) -> Result<(f64, f64), CliError> {
    match region(cfg)? {
        Region::Interval { a, b } => Ok((a, b)),
        _ => Err(CliError::Config("this command needs an interval region".into())),
    }
}

pub fn sim_params(cfg: &RunConfig, lambda: f64) -> SimParams<f64> {
    let n = &cfg.numerics;
    SimParams::new(n.paths, cfg.seed).with_h(n.truncation).with_t_max(n.t_max).with_lambda(lambda)
}

pub fn grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    cfg.section(&cfg.grid, "grid")?.points()
}
