//! Command dispatch.

use std::path::Path;
use std::time::Instant;

use fracjump::fracops::{frac_derivative, frac_integral, generator_derivative, mixed_operator, FracOrder, Kind};
use fracjump::generators::{
    apply_checkpoint, apply_interrupted, apply_interrupted_order2, apply_killed, check_kernel_conditions, Probe, Region,
    Status,
};
use fracjump::montecarlo::{exit_statistics_many, occupation_histogram, Mode};
use fracjump::solver::{
    regularity_probe, solve_bvp_closed_form, solve_bvp_collocation, solve_bvp_mc, BoundaryOperator, BvpProblem, Endpoint,
    SolutionTable, Verdict,
};
use serde_json::json;

use crate::build;
use crate::config::{
    BoundaryName, Command, EndpointName, KernelConfig, KindName, MethodName, ModeName, Operation, OperatorName, Quantity,
    RunConfig,
};
use crate::output::{self, Cell, Table};
use crate::CliError;

/// Result of a command: the table and, when paths were censored, a
/// warning that turns into a nonzero exit status after the files are
/// written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub censoring: Option<String>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self { table, censoring: None }
    }
}

/// Evaluates the command without touching the file system.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    if let Some(c) = cfg.command {
        if c != command {
            return Err(CliError::Config(format!("config is for `{c}` but `{command}` was requested")));
        }
    }
    match command {
        Command::Deriv => deriv(cfg).map(Report::from),
        Command::Apply => apply(cfg).map(Report::from),
        Command::Simulate => simulate(cfg),
        Command::Solve => solve(cfg).map(Report::from),
        Command::Check => check(cfg).map(Report::from),
    }
}

/// Runs the command and writes `out` and its metadata record. The record
/// holds the normalized config, from which the run can be repeated.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut echo = cfg.clone();
    echo.command = Some(command);
    let report = execute(command, &echo)?;
    output::write(out, &report.table.to_csv())?;
    let meta = json!({
        "tool": "fracjump",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.to_string(),
        "seed": cfg.seed,
        "paths": cfg.numerics.paths,
        "truncation": cfg.numerics.truncation,
        "config": echo.to_toml(),
        "csv": out.file_name().map(|n| n.to_string_lossy().into_owned()),
        "rows": report.table.rows.len(),
        "threads": rayon::current_num_threads(),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "censoring": report.censoring,
    });
    let text = serde_json::to_string_pretty(&meta).expect("json values serialize");
    output::write(&output::metadata_path(out), &(text + "\n"))?;
    Ok(report)
}

fn deriv(cfg: &RunConfig) -> Result<Table, CliError> {
    let fc = cfg.section(&cfg.function, "function")?;
    let f = build::function(&fc.f)?;
    let grid = build::grid(cfg)?;
    let beta = || fc.beta.ok_or_else(|| CliError::Config("[function] needs beta".into()));
    let kind = match fc.kind {
        KindName::Caputo => Kind::Caputo,
        KindName::Rl => Kind::RiemannLiouville,
    };
    let side = build::side(fc.side);
    let terms = if fc.operation == Operation::Mixed { build::mixed_terms(&fc.terms)? } else { Vec::new() };
    let mut t = Table::new(vec!["x", "value"]);
    for &x in &grid {
        let v = match fc.operation {
            Operation::Integral => frac_integral(&f, fc.anchor, beta()?, x)?,
            Operation::Derivative => frac_derivative(&f, fc.anchor, FracOrder::new(beta()?)?, x, kind, side)?,
            Operation::Generator => generator_derivative(&f, FracOrder::new(beta()?)?, x, side)?,
            Operation::Mixed => mixed_operator(&f, &terms, x)?,
        };
        t.push(vec![x.into(), v.into()]);
    }
    Ok(t)
}

fn apply(cfg: &RunConfig) -> Result<Table, CliError> {
    let ac = cfg.section(&cfg.apply, "apply")?;
    let spec = build::spec(cfg)?;
    let region = build::region(cfg)?;
    let f = build::function(&ac.f)?;
    let mut t = Table::new(vec!["x", "value"]);
    for x in build::grid(cfg)? {
        let v = match ac.operator {
            OperatorName::Interrupted => apply_interrupted(&spec, &region, &f, x)?,
            OperatorName::Checkpoint => apply_checkpoint(&spec, &region, &f, x)?,
            OperatorName::Killed => apply_killed(&spec, &region, &f, x)?,
            OperatorName::Regularized => apply_interrupted_order2(&spec, &region, &f, x, true)?,
            OperatorName::Unregularized => apply_interrupted_order2(&spec, &region, &f, x, false)?,
        };
        t.push(vec![x.into(), v.into()]);
    }
    Ok(t)
}

fn simulate(cfg: &RunConfig) -> Result<Report, CliError> {
    let sc = cfg.section(&cfg.simulate, "simulate")?;
    let spec = build::spec(cfg)?;
    let region = build::region(cfg)?;
    let params = build::sim_params(cfg, sc.lambda);
    let mode = match sc.mode {
        ModeName::Interrupted => Mode::Interrupted,
        ModeName::Stopped => Mode::Stopped,
        ModeName::Killed => Mode::Killed,
        ModeName::Free => Mode::Free,
    };
    match sc.quantity {
        Quantity::Exit => {
            let starts = build::grid(cfg)?;
            let stats = exit_statistics_many(&spec, &region, mode, &starts, &params)?;
            let mut t = Table::new(vec![
                "x",
                "p_left",
                "p_left_se",
                "p_right",
                "p_right_se",
                "p_censored",
                "mean_exit_time",
                "mean_exit_time_se",
                "discounted_left",
                "discounted_left_se",
                "discounted_right",
                "discounted_right_se",
            ]);
            let mut censored = Vec::new();
            for (&x, s) in starts.iter().zip(&stats) {
                if s.censoring_warning && mode != Mode::Free {
                    censored.push(format!("{x} ({:.3}%)", 100.0 * s.p_censored.value));
                }
                t.push(vec![
                    x.into(),
                    s.p_left.value.into(),
                    s.p_left.se.into(),
                    s.p_right.value.into(),
                    s.p_right.se.into(),
                    s.p_censored.value.into(),
                    s.mean_exit_time.value.into(),
                    s.mean_exit_time.se.into(),
                    s.discounted_left.value.into(),
                    s.discounted_left.se.into(),
                    s.discounted_right.value.into(),
                    s.discounted_right.se.into(),
                ]);
            }
            let censoring = (!censored.is_empty())
                .then(|| format!("more than 1% of the paths hit the time cap from x = {}", censored.join(", ")));
            Ok(Report { table: t, censoring })
        }
        Quantity::Occupation => {
            let x0 = sc.start.ok_or_else(|| CliError::Config("occupation histograms need [simulate] start".into()))?;
            let h = occupation_histogram(&spec, &region, mode, x0, &params, sc.bins)?;
            let mut t = Table::new(vec!["lo", "hi", "centre", "mass", "se"]);
            for ((w, c), m) in h.edges.windows(2).zip(h.centres()).zip(&h.mass) {
                t.push(vec![w[0].into(), w[1].into(), c.into(), m.value.into(), m.se.into()]);
            }
            Ok(t.into())
        }
    }
}

fn solve(cfg: &RunConfig) -> Result<Table, CliError> {
    let pc = cfg.section(&cfg.problem, "problem")?;
    let (a, b) = build::interval(cfg)?;
    let g = build::function(&pc.source)?;
    let grid = || -> Result<Vec<f64>, CliError> {
        match &cfg.grid {
            Some(gc) => gc.points(),
            None if a.is_finite() && b.is_finite() => Ok((0..11).map(|k| a + (b - a) * k as f64 / 10.0).collect()),
            None => Err(CliError::Config("a [grid] is required on infinite intervals".into())),
        }
    };
    let table: SolutionTable<f64> = match pc.method {
        MethodName::ClosedForm => {
            let beta = match cfg.section(&cfg.kernel, "kernel")? {
                KernelConfig::StableSymmetric { beta, dim: 1 } => *beta,
                _ => return Err(CliError::Config("closed forms need the one-dimensional stable-symmetric kernel".into())),
            };
            if (a, b) != (-1.0, 1.0) || pc.lambda != 0.0 || pc.operator != BoundaryName::Interrupted || cfg.drift.is_some()
            {
                return Err(CliError::Config(
                    "closed forms need the interval [-1, 1], lambda = 0, no drift and the interrupted operator".into(),
                ));
            }
            solve_bvp_closed_form(beta, pc.f_a, pc.f_b, &g, &grid()?)?
        }
        method => {
            let operator = match pc.operator {
                BoundaryName::Interrupted => BoundaryOperator::Interrupted,
                BoundaryName::Killed => BoundaryOperator::Killed,
            };
            let problem = BvpProblem::new(build::spec(cfg)?, a, b, pc.f_a, pc.f_b, g, pc.lambda)?.with_operator(operator);
            if method == MethodName::Mc {
                solve_bvp_mc(&problem, &build::sim_params(cfg, pc.lambda), &grid()?)?
            } else {
                let mesh = solve_bvp_collocation(&problem, pc.nodes)?;
                match &cfg.grid {
                    None => mesh,
                    Some(gc) => {
                        let pts = gc.points()?;
                        let values = pts.iter().map(|&x| mesh.interpolate(x)).collect::<Result<Vec<_>, _>>()?;
                        SolutionTable { se: vec![0.0; pts.len()], grid: pts, values, ..mesh }
                    }
                }
            }
        }
    };
    let mut t = Table::new(vec!["x", "value", "se"]);
    for ((x, v), s) in table.grid.iter().zip(&table.values).zip(&table.se) {
        t.push(vec![(*x).into(), (*v).into(), (*s).into()]);
    }
    Ok(t)
}

fn check(cfg: &RunConfig) -> Result<Table, CliError> {
    let cc = cfg.section(&cfg.check, "check")?;
    let spec = build::spec(cfg)?;
    let states = cc.states.points();
    if states.is_empty() || states.iter().any(|s| s.len() != spec.dim()) {
        return Err(CliError::Config(format!("probe states must be nonempty points of dimension {}", spec.dim())));
    }
    let region = cfg.region.as_ref().map(|_| build::region(cfg)).transpose()?;
    let endpoints = match region {
        Some(Region::Interval { a, b }) => Some((a, b)),
        _ => None,
    };
    let probe = Probe { states, radii: cc.radii.clone(), endpoints };
    let report = check_kernel_conditions(&spec, &probe);
    let opt = |v: Option<f64>| v.map_or(Cell::Text(String::new()), Cell::Num);
    let mut t = Table::new(vec!["condition", "status", "constant", "exponent", "detail"]);
    for e in &report.entries {
        let status = match e.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "n/a",
        };
        t.push(vec![e.name.into(), status.into(), opt(e.constant), opt(e.exponent), e.detail.clone().into()]);
    }
    if let Some(which) = cc.probe {
        let region = region.ok_or_else(|| CliError::Config("regularity probes need an interval region".into()))?;
        let endpoint = match which {
            EndpointName::Lower => Endpoint::Lower,
            EndpointName::Upper => Endpoint::Upper,
        };
        let r = regularity_probe(&spec, &region, endpoint, &cc.radii, &build::sim_params(cfg, 0.0))?;
        let name = match which {
            EndpointName::Lower => "probe_lower",
            EndpointName::Upper => "probe_upper",
        };
        let verdict = match r.verdict {
            Verdict::Regular => "regular",
            Verdict::NotRegular => "not-regular",
        };
        let detail: Vec<String> =
            r.radii.iter().zip(&r.mean_exit_time).map(|(r, e)| format!("r={r:e}: {:.6e}±{:.2e}", e.value, e.se)).collect();
        t.push(vec![name.into(), verdict.into(), opt(r.prefactor), opt(r.exponent), detail.join("; ").into()]);
    }
    Ok(t)
}
