use crate::error::{Error, Result};
use crate::generators::{check_kernel_conditions, ConditionReport, GeneratorSpec, Probe, Region};
use crate::generators::conditions::fit_power_law;
use crate::montecarlo::{exit_statistics_many, Estimate, Mode, SimParams};
use crate::scalar::{lit, Real};

/// Endpoint of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `E τ` decays to zero like a positive power of the distance.
    Regular,
    /// No clear decay of `E τ` towards the endpoint.
    NotRegular,
}

/// Mean exit times near an endpoint and the verdict drawn from them.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport<T> {
    pub endpoint: Endpoint,
    pub radii: Vec<T>,
    pub starts: Vec<T>,
    pub mean_exit_time: Vec<Estimate<T>>,
    /// Slope of `log E τ` against `log r`.
    pub exponent: Option<T>,
    /// `E τ ≈ prefactor · r^exponent`.
    pub prefactor: Option<T>,
    pub verdict: Verdict,
    pub censoring_warning: bool,
    /// Kernel hypotheses, including the Lyapunov integrand conditions
    /// `regularity_a`, `regularity_b`, on the same radii.
    pub conditions: ConditionReport,
}

/// Smallest fitted exponent accepted as decay.
const MIN_EXPONENT: f64 = 0.1;

/// Estimates `E τ(x)` at `x = endpoint ± r` (inside the interval) for the
/// process stopped at the boundary, fits a power law in `r`, and reports
/// the kernel conditions at the same radii. The verdict is
/// [`Verdict::Regular`] when the fitted exponent is at least 0.1 and the
/// exit time at the smallest radius is below the one at the largest by
/// more than three combined standard errors.
pub fn regularity_probe<T: Real>(
    spec: &GeneratorSpec<T>,
    region: &Region<T>,
    endpoint: Endpoint,
    radii: &[T],
    params: &SimParams<T>,
) -> Result<RegularityReport<T>> {
    let Region::Interval { a, b } = *region else {
        return Err(Error::InvalidParameter("regularity probes need an interval".into()));
    };
    if radii.len() < 2 || radii.iter().any(|r| !(*r > T::zero())) || radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("radii must be positive and strictly decreasing".into()));
    }
    let (point, s) = match endpoint {
        Endpoint::Lower => (a, T::one()),
        Endpoint::Upper => (b, -T::one()),
    };
    if !point.is_finite() {
        return Err(Error::InvalidParameter("the probed endpoint must be finite".into()));
    }
    let starts: Vec<T> = radii.iter().map(|&r| point + s * r).collect();
    if let Some(&x) = starts.iter().find(|&&x| !(x > a && x < b)) {
        return Err(Error::Domain { what: "probe start outside the interval", value: x.to_f64_lossy() });
    }
    let stats = exit_statistics_many(spec, region, Mode::Stopped, &starts, params)?;
    let mean_exit_time: Vec<Estimate<T>> = stats.iter().map(|s| s.mean_exit_time).collect();
    let censoring_warning = stats.iter().any(|s| s.censoring_warning);

    let r: Vec<f64> = radii.iter().map(|v| v.to_f64_lossy()).collect();
    let v: Vec<f64> = mean_exit_time.iter().map(|e| e.value.to_f64_lossy()).collect();
    let fit = fit_power_law(&r, &v);
    let (first, last) = (mean_exit_time[0], mean_exit_time[mean_exit_time.len() - 1]);
    let gap = first.value - last.value;
    let comb = (first.se * first.se + last.se * last.se).sqrt();
    let decays = gap > lit::<T>(3.0) * comb;
    let verdict = match fit {
        Some((slope, _)) if slope >= MIN_EXPONENT && decays && !censoring_warning => Verdict::Regular,
        _ => Verdict::NotRegular,
    };
    let probe = Probe::one_dimensional(&starts, radii, Some((a, b)));
    Ok(RegularityReport {
        endpoint,
        radii: radii.to_vec(),
        starts,
        mean_exit_time,
        exponent: fit.map(|f| lit(f.0)),
        prefactor: fit.map(|f| lit(f.1.exp())),
        verdict,
        censoring_warning,
        conditions: check_kernel_conditions(spec, &probe),
    })
}
