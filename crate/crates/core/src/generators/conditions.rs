use std::fmt;

use super::{GeneratorSpec, OrderClass};
use crate::quad;
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of one numerically checked hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub name: &'static str,
    pub status: Status,
    /// Fitted or extremal constant (bound, `C` of a power law, ...).
    pub constant: Option<f64>,
    /// Fitted exponent where a power law is involved.
    pub exponent: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// No entry failed.
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            write!(f, "{:<22} {:?}", e.name, e.status)?;
            if let Some(c) = e.constant {
                write!(f, "  C={c:.6e}")?;
            }
            if let Some(r) = e.exponent {
                write!(f, "  r={r:.4}")?;
            }
            writeln!(f, "  {}", e.detail)?;
        }
        Ok(())
    }
}

/// States and radii at which the hypotheses are evaluated. `endpoints`
/// enables the boundary entries (regularity, sign conditions) for
/// one-dimensional kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe<T> {
    pub states: Vec<Vec<T>>,
    pub radii: Vec<T>,
    pub endpoints: Option<(T, T)>,
}

impl<T: Real> Probe<T> {
    pub fn one_dimensional(states: &[T], radii: &[T], endpoints: Option<(T, T)>) -> Self {
        Self { states: states.iter().map(|&x| vec![x]).collect(), radii: radii.to_vec(), endpoints }
    }
}

/// Least-squares slope and intercept of `log v` against `log r`.
pub(crate) fn fit_power_law(r: &[f64], v: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> =
        r.iter().zip(v).filter(|(r, v)| **r > 0.0 && **v > 0.0).map(|(r, v)| (r.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn entry(name: &'static str, status: Status, detail: impl Into<String>) -> ConditionEntry {
    ConditionEntry { name, status, constant: None, exponent: None, detail: detail.into() }
}

/// Integral over unit directions `e ∈ R^n` (`n = 2, 3`) whose angle with
/// the first axis is at most `phi_max`.
fn cap_integral<T: Real>(n: usize, phi_max: T, g: impl Fn(&[T]) -> T) -> T {
    let tol: T = lit(1e-10);
    let rel: T = lit(1e-8);
    if n == 2 {
        return quad::adaptive(|t: T| g(&[t.cos(), t.sin()]), -phi_max, T::zero(), tol, rel).value
            + quad::adaptive(|t: T| g(&[t.cos(), t.sin()]), T::zero(), phi_max, tol, rel).value;
    }
    let pi = T::PI();
    let shell = |phi: T| {
        let (sp, cp) = phi.sin_cos();
        let ring = |psi: T| {
            let (ss, cs) = psi.sin_cos();
            g(&[cp, sp * cs, sp * ss])
        };
        sp * (quad::adaptive(&ring, T::zero(), pi, tol, rel).value + quad::adaptive(&ring, pi, pi + pi, tol, rel).value)
    };
    quad::adaptive(shell, T::zero(), phi_max, tol, rel).value
}

/// Numerically evaluates the hypotheses used for well-posedness and
/// boundary regularity on the probe grid. Failures are reported, never
/// raised.
pub fn check_kernel_conditions<T: Real>(spec: &GeneratorSpec<T>, probe: &Probe<T>) -> ConditionReport {
    let mut report = ConditionReport::default();
    let kernel = &spec.kernel;
    let n = kernel.dim();
    let bv = kernel.order_class() == OrderClass::BoundedVariation;
    let mut radii: Vec<T> = probe.radii.iter().copied().filter(|r| *r > T::zero()).collect();
    radii.sort_by(|a, b| b.partial_cmp(a).expect("finite radii"));
    let radii_f: Vec<f64> = radii.iter().map(|r| r.to_f64_lossy()).collect();
    let one = T::one();
    let inf = T::infinity();
    let signs = [-one, one];

    // ∫ min(1,|y|) ν (or ∫ min(1,|y|²) ν for compensated kernels) per state
    let k_small = if bv { 1 } else { 2 };
    let moment = |x: &[T], e: &[T]| kernel.radial_moment(x, e, k_small, T::zero(), one) + kernel.radial_moment(x, e, 0, one, inf);
    let over_directions = |x: &[T], g: &dyn Fn(&[T], &[T]) -> T| -> T {
        if n == 1 {
            signs.iter().map(|&s| g(x, &[s])).fold(T::zero(), |a, b| a + b)
        } else {
            cap_integral(n, T::PI(), |e| g(x, e))
        }
    };
    let bounds: Vec<f64> = probe.states.iter().map(|x| over_directions(x, &moment).to_f64_lossy()).collect();
    let sup = bounds.iter().copied().fold(0.0, f64::max);
    let finite = bounds.iter().all(|b| b.is_finite());
    report.entries.push(ConditionEntry {
        constant: Some(sup),
        ..entry(
            "moment_bound",
            if finite { Status::Pass } else { Status::Fail },
            if bv { "sup_x ∫min(1,|y|)ν" } else { "sup_x ∫min(1,|y|²)ν" },
        )
    });

    // tightness: sup_x ∫_{|y|≤δ} |y|^k ν → 0
    if radii.len() >= 2 {
        let vals: Vec<f64> = radii
            .iter()
            .map(|&d| {
                let small = |x: &[T], e: &[T]| kernel.radial_moment(x, e, k_small, T::zero(), d);
                probe.states.iter().map(|x| over_directions(x, &small).to_f64_lossy()).fold(0.0, f64::max)
            })
            .collect();
        let fit = fit_power_law(&radii_f, &vals);
        let ok = vals.iter().all(|v| v.is_finite()) && fit.is_some_and(|(s, _)| s > 0.0);
        report.entries.push(ConditionEntry {
            constant: vals.last().copied(),
            exponent: fit.map(|f| f.0),
            ..entry("tightness", if ok { Status::Pass } else { Status::Fail }, "sup_x ∫_{|y|≤δ}|y|^k ν as δ→0")
        });
        // δ ∫_{|y|>δ} ν → 0
        let vals: Vec<f64> = radii
            .iter()
            .map(|&d| {
                let tail = |x: &[T], e: &[T]| kernel.radial_moment(x, e, 0, d, inf);
                probe.states.iter().map(|x| (d * over_directions(x, &tail)).to_f64_lossy()).fold(0.0, f64::max)
            })
            .collect();
        let fit = fit_power_law(&radii_f, &vals);
        let ok = !bv || fit.is_some_and(|(s, _)| s > 0.0);
        report.entries.push(ConditionEntry {
            exponent: fit.map(|f| f.0),
            ..entry(
                "boundary_limit",
                if bv {
                    if ok {
                        Status::Pass
                    } else {
                        Status::Fail
                    }
                } else {
                    Status::NotApplicable
                },
                "δ ∫_{|y|>δ} ν → 0",
            )
        });
    }

    if n == 1 {
        one_dimensional_entries(spec, probe, &radii, &radii_f, &mut report);
    } else {
        report.entries.push(ugly_condition(spec, probe, &radii, &radii_f));
    }
    report
}

fn one_dimensional_entries<T: Real>(
    spec: &GeneratorSpec<T>,
    probe: &Probe<T>,
    radii: &[T],
    radii_f: &[f64],
    report: &mut ConditionReport,
) {
    let kernel = &spec.kernel;
    let bv = kernel.order_class() == OrderClass::BoundedVariation;
    let inf = T::infinity();

    // monotonicity of the tails in the state variable
    let mut states: Vec<T> = probe.states.iter().map(|x| x[0]).collect();
    states.sort_by(|a, b| a.partial_cmp(b).expect("finite states"));
    let mut worst = 0.0f64;
    for &r in radii {
        let right: Vec<f64> = states.iter().map(|&x| kernel.side_moment(x, T::one(), 0, r, inf).to_f64_lossy()).collect();
        let left: Vec<f64> = states.iter().map(|&x| kernel.side_moment(x, -T::one(), 0, r, inf).to_f64_lossy()).collect();
        for w in right.windows(2) {
            worst = worst.max((w[0] - w[1]) / w[0].abs().max(1e-300));
        }
        for w in left.windows(2) {
            worst = worst.max((w[1] - w[0]) / w[1].abs().max(1e-300));
        }
    }
    report.entries.push(ConditionEntry {
        constant: Some(worst.max(0.0)),
        ..entry(
            "monotonicity",
            if worst <= 1e-10 { Status::Pass } else { Status::Fail },
            "∫_r^∞ν(x,·) nondecreasing, ∫_{-∞}^{-r}ν(x,·) nonincreasing in x",
        )
    });

    let Some((a, b)) = probe.endpoints else {
        return;
    };
    for (name, point, s) in [("regularity_a", a, -T::one()), ("regularity_b", b, T::one())] {
        if !bv {
            report.entries.push(entry(name, Status::NotApplicable, "bounded-variation kernels only"));
            continue;
        }
        if !point.is_finite() || radii.len() < 2 {
            report.entries.push(entry(name, Status::NotApplicable, "infinite endpoint or too few radii"));
            continue;
        }
        // ∫ min(|y|, ε) ν(point, y) dy over jumps towards the boundary
        let vals: Vec<f64> = radii
            .iter()
            .map(|&eps| {
                (kernel.side_moment(point, s, 1, T::zero(), eps) + eps * kernel.side_moment(point, s, 0, eps, inf))
                    .to_f64_lossy()
            })
            .collect();
        match fit_power_law(radii_f, &vals) {
            Some((r, _)) if r > 0.0 && r < 1.0 && vals.iter().all(|v| v.is_finite()) => {
                let c = radii_f.iter().zip(&vals).map(|(e, v)| v / e.powf(r)).fold(f64::INFINITY, f64::min);
                report.entries.push(ConditionEntry {
                    constant: Some(c),
                    exponent: Some(r),
                    ..entry(name, Status::Pass, "∫min(|y|,ε)ν > Cε^r with r in (0,1)")
                });
            }
            fit => report.entries.push(ConditionEntry {
                exponent: fit.map(|f| f.0),
                ..entry(name, Status::Fail, "no power-law lower bound with r in (0,1)")
            }),
        }
    }
    let (ga, gb) = (spec.drift.at_1d(a), spec.drift.at_1d(b));
    let ok = !(ga < T::zero()) && !(gb > T::zero());
    report.entries.push(entry(
        "sign_conditions",
        if ok { Status::Pass } else { Status::Fail },
        format!("γ(a) = {ga} ≥ 0, γ(b) = {gb} ≤ 0 (reported, not enforced)"),
    ));
}

/// `Ω(ε,x) ≤ C ω(ε,x)` for multidimensional kernels, with
/// `Ω = ε ∫_{y_1≥ε, |y|≤1} ν |y_2|²/y_1²` and `ω = ∫_{y_1≥ε} ν`.
fn ugly_condition<T: Real>(spec: &GeneratorSpec<T>, probe: &Probe<T>, radii: &[T], radii_f: &[f64]) -> ConditionEntry {
    let kernel = &spec.kernel;
    let n = kernel.dim();
    if n > 3 || radii.is_empty() {
        return entry("ugly_condition", Status::NotApplicable, "dimension above 3 or no radii");
    }
    let inf = T::infinity();
    let mut ratios = Vec::with_capacity(radii.len());
    for &eps in radii {
        let mut worst = 0.0f64;
        for x in &probe.states {
            let big_omega = eps
                * cap_integral(n, eps.acos(), |e| {
                    let c = e[0];
                    let tan2 = (T::one() - c * c) / (c * c);
                    tan2 * kernel.radial_moment(x, e, 0, eps / c, T::one())
                });
            let small_omega = cap_integral(n, T::PI() * lit(0.5), |e| {
                if e[0] <= T::zero() {
                    return T::zero();
                }
                kernel.radial_moment(x, e, 0, eps / e[0], inf)
            });
            worst = worst.max((big_omega / small_omega).to_f64_lossy());
        }
        ratios.push(worst);
    }
    let finite = ratios.iter().all(|r| r.is_finite());
    let c = ratios.iter().copied().fold(0.0, f64::max);
    let slope = fit_power_law(radii_f, &ratios).map(|f| f.0);
    // bounded as ε → 0 means the ratio does not grow along the grid
    let ok = finite && slope.is_some_and(|s| s >= -0.1);
    ConditionEntry {
        name: "ugly_condition",
        status: if ok { Status::Pass } else { Status::Fail },
        constant: Some(c),
        exponent: slope,
        detail: "Ω(ε,x) ≤ C ω(ε,x) over the ε grid".into(),
    }
}
