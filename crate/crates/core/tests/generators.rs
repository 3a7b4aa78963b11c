use fracjump::function::{PointFunction, ScalarFunction};
use fracjump::generators::{
    apply_checkpoint, apply_interrupted, apply_interrupted_multi, apply_interrupted_order2, apply_killed,
    check_kernel_conditions, project_ray, Direction, GeneratorSpec, JumpKernel, Mollifier, Probe, Region, Status,
};
use proptest::prelude::*;

fn symmetric(beta: f64) -> GeneratorSpec<f64> {
    GeneratorSpec::new(JumpKernel::stable_symmetric(beta, 1).unwrap())
}

fn bump() -> ScalarFunction<f64> {
    ScalarFunction::smooth(|x: f64| (1.0 + x * x).ln() * (0.7 * x).cos() + 0.2 * x)
}

/// Five-point Gauss-Legendre on `n` equal panels of `[lo, hi]`.
fn composite_gauss(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let h = (hi - lo) / n as f64;
    (0..n)
        .map(|k| {
            let c = lo + (k as f64 + 0.5) * h;
            NODES.iter().map(|&(u, w)| w * f(c + 0.5 * h * u)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[test]
fn interval_and_checkpoint_operators_coincide_inside() {
    for spec in [symmetric(0.5), GeneratorSpec::new(JumpKernel::tempered_stable(0.7, 2.0, 1.0, 0.4).unwrap())] {
        let interval = Region::interval(-1.0, 1.5).unwrap();
        let blocks = Region::checkpoints(vec![-1.0, 1.5]).unwrap();
        let f = bump();
        for x in [-0.9, -0.2, 0.4, 1.45] {
            let p = apply_interrupted(&spec, &interval, &f, x).unwrap();
            let q = apply_checkpoint(&spec, &blocks, &f, x).unwrap();
            assert!((p - q).abs() < 1e-9, "x={x}: {p} vs {q}");
        }
    }
}

#[test]
fn checkpoint_operator_uses_the_neighbouring_blocks() {
    let spec = symmetric(0.6);
    let blocks = Region::checkpoints(vec![-2.0, 0.0, 1.0, 3.0]).unwrap();
    let f = bump();
    for (x, a, b) in [(0.5, 0.0, 1.0), (-1.0, -2.0, 0.0), (2.0, 1.0, 3.0)] {
        let p = apply_checkpoint(&spec, &blocks, &f, x).unwrap();
        let q = apply_interrupted(&spec, &Region::interval(a, b).unwrap(), &f, x).unwrap();
        assert!((p - q).abs() < 1e-12, "x={x}");
    }
}

#[test]
fn single_checkpoint_with_odd_function_leaves_only_the_clamped_part() {
    // f odd about x = 0.5 and ν symmetric: the unclamped integral over the
    // whole line vanishes, so the operator reduces to jumps below -0.5,
    // ∫_{-∞}^{-0.5} (f(0) - f(0.5 + y)) ν(y) dy.
    let beta = 0.5;
    let spec = symmetric(beta);
    let blocks = Region::checkpoints(vec![0.0]).unwrap();
    let f = ScalarFunction::smooth(|x: f64| (x - 0.5).tanh());
    let got = apply_checkpoint(&spec, &blocks, &f, 0.5).unwrap();

    // |y| = 1/v² - 1/2 turns the tail into a smooth integral over (0, 1)
    let c = spec.kernel.density_1d(0.0, 1.0);
    let oracle = composite_gauss(
        |v| {
            let y = 1.0 / (v * v) - 0.5;
            let diff = (-0.5f64).tanh() - (-y).tanh();
            diff * c * 2.0 * (1.0 - 0.5 * v * v).powf(-1.0 - beta) * v.powf(2.0 * beta - 1.0)
        },
        0.0,
        1.0,
        400,
    );
    assert!((got - oracle).abs() < 1e-7 * oracle.abs(), "{got} vs {oracle}");
}

#[test]
fn killed_operator_subtracts_boundary_values_times_tail_mass() {
    let spec = GeneratorSpec::new(JumpKernel::tempered_stable(0.4, 1.0, 0.8, 1.3).unwrap());
    let region = Region::interval(0.0, 2.0).unwrap();
    let f = bump();
    for x in [0.1, 0.9, 1.8] {
        let killed = apply_killed(&spec, &region, &f, x).unwrap();
        let interrupted = apply_interrupted(&spec, &region, &f, x).unwrap();
        let left = spec.kernel.side_moment(x, -1.0, 0, x, f64::INFINITY);
        let right = spec.kernel.side_moment(x, 1.0, 0, 2.0 - x, f64::INFINITY);
        let want = interrupted - f.eval(0.0) * left - f.eval(2.0) * right;
        assert!((killed - want).abs() < 1e-9, "x={x}: {killed} vs {want}");
    }
}

#[test]
fn killed_constant_loses_the_escaping_mass() {
    let spec = symmetric(0.5);
    let region = Region::interval(-1.0, 1.0).unwrap();
    let x = 0.3;
    let got = apply_killed(&spec, &region, &ScalarFunction::constant(2.0), x).unwrap();
    let escape = spec.kernel.side_moment(x, -1.0, 0, 1.3, f64::INFINITY) + spec.kernel.side_moment(x, 1.0, 0, 0.7, f64::INFINITY);
    assert!(got < 0.0);
    assert!((got + 2.0 * escape).abs() < 1e-12);
}

#[test]
fn constants_are_annihilated_everywhere() {
    let one = ScalarFunction::constant(1.0);
    let region = Region::interval(-1.0, 1.0).unwrap();
    assert_eq!(apply_interrupted(&symmetric(0.3), &region, &one, 0.2).unwrap(), 0.0);
    let comp = symmetric(1.4);
    for flag in [false, true] {
        assert!(apply_interrupted_order2(&comp, &region, &one, 0.2, flag).unwrap().abs() < 1e-12);
    }
    let spec2 = GeneratorSpec::new(JumpKernel::stable_symmetric(0.5f64, 2).unwrap());
    let c = PointFunction::constant(2, 3.0f64);
    for region in [Region::half_space(1.0, 2).unwrap(), Region::band(-1.0, 1.0, 2).unwrap(), Region::ball(1.0, 2).unwrap()] {
        assert!(apply_interrupted_multi(&spec2, &region, &c, &[0.2, 0.1]).unwrap().abs() < 1e-12);
    }
}

#[test]
fn half_space_and_band_reduce_to_the_line_for_functions_of_the_normal_coordinate() {
    // Marginals of the rotationally symmetric kernel are the symmetric
    // one-dimensional kernel, and the ray projection keeps x_1 clamped.
    let beta = 0.5;
    let spec2 = GeneratorSpec::new(JumpKernel::stable_symmetric(beta, 2).unwrap());
    let g = |t: f64| (-(t - 0.2) * (t - 0.2)).exp();
    let f2 = PointFunction::new(2, move |x: &[f64]| g(x[0]));
    let f1 = ScalarFunction::smooth(g);
    let cases = [
        (Region::half_space(1.0, 2).unwrap(), Region::interval(f64::NEG_INFINITY, 1.0).unwrap()),
        (Region::band(-0.5, 1.0, 2).unwrap(), Region::interval(-0.5, 1.0).unwrap()),
    ];
    for (multi, line) in cases {
        for x1 in [-0.3, 0.4, 0.9] {
            let m = apply_interrupted_multi(&spec2, &multi, &f2, &[x1, 0.7]).unwrap();
            let l = apply_interrupted(&symmetric(beta), &line, &f1, x1).unwrap();
            assert!((m - l).abs() < 1e-5 * (1.0 + l.abs()), "{multi:?} x1={x1}: {m} vs {l}");
        }
    }
}

#[test]
fn ball_operator_is_rotation_invariant() {
    let spec = GeneratorSpec::new(JumpKernel::stable_symmetric(0.6, 2).unwrap());
    let ball = Region::ball(1.0, 2).unwrap();
    let f = PointFunction::new(2, |x: &[f64]| 1.0 - x[0] * x[0] - x[1] * x[1]);
    let r = 0.45f64;
    let v: Vec<f64> = [0.0, 0.8, 2.1]
        .iter()
        .map(|t: &f64| apply_interrupted_multi(&spec, &ball, &f, &[r * t.cos(), r * t.sin()]).unwrap())
        .collect();
    assert!((v[0] - v[1]).abs() < 1e-6 && (v[0] - v[2]).abs() < 1e-6, "{v:?}");
    assert!(v[0] < 0.0);
}

#[test]
fn order_two_flags_agree_when_the_boundary_slopes_vanish() {
    let spec = symmetric(1.5);
    let region = Region::interval(0.0, 1.0).unwrap();
    let f = ScalarFunction::smooth(|x: f64| (std::f64::consts::PI * x).cos())
        .with_derivative(|x: f64| -std::f64::consts::PI * (std::f64::consts::PI * x).sin());
    for x in [0.05, 0.3, 0.5, 0.77, 0.99] {
        let raw = apply_interrupted_order2(&spec, &region, &f, x, false).unwrap();
        let reg = apply_interrupted_order2(&spec, &region, &f, x, true).unwrap();
        assert!((raw - reg).abs() < 1e-9, "x={x}: {raw} vs {reg}");
    }
}

#[test]
fn regularized_operator_vanishes_at_the_lower_endpoint() {
    let spec = GeneratorSpec::new(JumpKernel::stable_one_sided(1.5, Direction::Negative, 1.0).unwrap())
        .with_mollifier(Mollifier::Full);
    let region = Region::interval(0.0, 2.0).unwrap();
    let f = ScalarFunction::smooth(|x: f64| (1.3 * x).sin() + 0.5 * x * x);
    let at = |d: f64, flag: bool| apply_interrupted_order2(&spec, &region, &f, d, flag).unwrap();
    let v: Vec<f64> = [1e-1, 1e-2, 1e-3].iter().map(|&d| at(d, true).abs()).collect();
    assert!(v[0] > v[1] && v[1] > v[2] && v[2] < 0.05, "{v:?}");
    // the unregularized operator blows up unless f'(a) = 0
    assert!(at(1e-3, false).abs() > 10.0);
    let flat = ScalarFunction::smooth(|x: f64| (1.3 * x).cos() + 0.5 * x * x);
    let w: Vec<f64> = [1e-1, 1e-2, 1e-3]
        .iter()
        .map(|&d| apply_interrupted_order2(&spec, &region, &flat, d, false).unwrap().abs())
        .collect();
    assert!(w[0] > w[1] && w[1] > w[2] && w[2] < 0.05, "{w:?}");
}

#[test]
fn stable_like_kernel_passes_the_ugly_condition() {
    let spec = GeneratorSpec::new(
        JumpKernel::stable_like(2, 0.7, |x: &[f64]| 1.0 + 0.5 * x[0].sin() * x[1].cos(), 1.5).unwrap(),
    );
    let probe = Probe {
        states: vec![vec![0.0, 0.0], vec![0.3, -0.4]],
        radii: vec![1e-1, 1e-2, 1e-3, 1e-4],
        endpoints: None,
    };
    let report = check_kernel_conditions(&spec, &probe);
    let ugly = report.get("ugly_condition").unwrap();
    assert_eq!(ugly.status, Status::Pass, "{report}");
    assert!(ugly.constant.unwrap().is_finite());
}

#[test]
fn symmetric_kernel_tails_are_monotone_and_one_sided_bound_is_a_power() {
    let probe = Probe::one_dimensional(&[-0.5, 0.0, 0.5], &[1e-1, 1e-2, 1e-3, 1e-4], Some((-1.0, 1.0)));
    let report = check_kernel_conditions(&symmetric(0.5), &probe);
    assert_eq!(report.get("monotonicity").unwrap().status, Status::Pass);
    assert_eq!(report.get("moment_bound").unwrap().status, Status::Pass);

    // ∫min(|y|,ε)ν = ε^{1-β} (1/(1-β) + 1/β) / |Γ(-β)| in closed form
    let beta = 0.3;
    let spec = GeneratorSpec::new(JumpKernel::stable_one_sided(beta, Direction::Negative, 1.0).unwrap());
    let report = check_kernel_conditions(&spec, &probe);
    let reg = report.get("regularity_a").unwrap();
    assert!((reg.exponent.unwrap() - (1.0 - beta)).abs() < 1e-9);
    let c = (1.0 / (1.0 - beta) + 1.0 / beta) / fracjump::specfun::gamma(-beta).unwrap().abs();
    assert!((reg.constant.unwrap() - c).abs() < 1e-8 * c);
}

#[test]
fn drift_sign_conditions_are_reported_not_enforced() {
    let spec = symmetric(0.5).with_drift(fracjump::generators::Drift::Constant(vec![-1.0]));
    let probe = Probe::one_dimensional(&[0.0], &[1e-1, 1e-2], Some((-1.0, 1.0)));
    let report = check_kernel_conditions(&spec, &probe);
    assert_eq!(report.get("sign_conditions").unwrap().status, Status::Fail);
}

fn region_strategy() -> impl Strategy<Value = Region<f64>> {
    prop_oneof![
        (0.1f64..3.0).prop_map(|r| Region::ball(r, 2).unwrap()),
        (-1.0f64..1.0).prop_map(|b| Region::half_space(b, 2).unwrap()),
        (-2.0f64..0.0, 0.1f64..2.0).prop_map(|(a, w)| Region::band(a, a + w, 2).unwrap()),
    ]
}

proptest! {
    #[test]
    fn projection_lands_in_the_closed_region(region in region_strategy(), u in 0.0f64..1.0, t in 0.0f64..6.3, y in prop::array::uniform2(-5.0f64..5.0)) {
        // a start point inside: shrink a direction towards an interior point
        let x = match region {
            Region::Ball { radius, .. } => vec![0.99 * u * radius * t.cos(), 0.99 * u * radius * t.sin()],
            Region::HalfSpace { b, .. } => vec![b - 3.0 * u, t],
            Region::Band { a, b, .. } => vec![a + u * (b - a), t],
            _ => unreachable!(),
        };
        prop_assume!(y[0] != 0.0 || y[1] != 0.0);
        let p = project_ray(&region, &x, &y).unwrap();
        // rounding may leave the landing point a few ulps outside
        let pulled: Vec<f64> = p.iter().map(|v| v * (1.0 - 1e-12)).collect();
        let inside = region.contains_closed(&p) || region.contains_closed(&pulled);
        prop_assert!(inside, "{p:?} from {x:?} + {y:?}");
        let target = [x[0] + y[0], x[1] + y[1]];
        if region.contains_closed(&target) {
            prop_assert_eq!(p, target.to_vec());
        }
    }

    #[test]
    fn interval_projection_is_clamping(a in -5.0f64..0.0, w in 0.1f64..5.0, u in 0.0f64..1.0, y in -10.0f64..10.0) {
        prop_assume!(y != 0.0);
        let b = a + w;
        let x = a + u * w;
        let p = project_ray(&Region::interval(a, b).unwrap(), &[x], &[y]).unwrap();
        prop_assert_eq!(p[0], (x + y).min(b).max(a));
    }
}
