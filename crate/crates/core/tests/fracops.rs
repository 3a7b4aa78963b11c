use fracjump::fracops::{frac_derivative, frac_integral, generator_derivative, FracOrder, Kind, Side};
use fracjump::function::ScalarFunction;
use fracjump::quad;
use fracjump::specfun::gamma;

/// Smooth test functions with exact first and second derivatives.
pub fn test_functions() -> Vec<(&'static str, ScalarFunction<f64>)> {
    vec![
        (
            "sin",
            ScalarFunction::smooth(|x: f64| (1.3 * x).sin())
                .with_derivative(|x| 1.3 * (1.3 * x).cos())
                .with_second_derivative(|x| -1.69 * (1.3 * x).sin()),
        ),
        (
            "exp",
            ScalarFunction::smooth(|x: f64| (0.5 * x).exp())
                .with_derivative(|x| 0.5 * (0.5 * x).exp())
                .with_second_derivative(|x| 0.25 * (0.5 * x).exp()),
        ),
        (
            "cubic",
            ScalarFunction::smooth(|x: f64| x * x * x - 2.0 * x + 0.5)
                .with_derivative(|x| 3.0 * x * x - 2.0)
                .with_second_derivative(|x| 6.0 * x),
        ),
        (
            "gauss",
            ScalarFunction::smooth(|x: f64| (-x * x).exp())
                .with_derivative(|x| -2.0 * x * (-x * x).exp())
                .with_second_derivative(|x| (4.0 * x * x - 2.0) * (-x * x).exp()),
        ),
        (
            "lorentz",
            ScalarFunction::smooth(|x: f64| 1.0 / (1.0 + x * x))
                .with_derivative(|x| -2.0 * x / (1.0 + x * x).powi(2))
                .with_second_derivative(|x| (6.0 * x * x - 2.0) / (1.0 + x * x).powi(3)),
        ),
    ]
}

fn order(b: f64) -> FracOrder<f64> {
    FracOrder::new(b).unwrap()
}

/// Caputo derivative from its definition: fractional integral of `f'`
/// (β < 1) or `f''` (β > 1), with the endpoint singularity removed by the
/// substitution `x - t = u^{1/(n-β)}`.
fn definitional_caputo(f: &ScalarFunction<f64>, anchor: f64, beta: f64, x: f64, side: Side) -> f64 {
    let (n, sign) = if beta < 1.0 { (1, 1.0) } else { (2, 1.0) };
    let p = n as f64 - beta;
    let span = (x - anchor).abs();
    let deriv = |t: f64| if n == 1 { f.derivative(t) } else { f.second_derivative(t) };
    let dir = if side == Side::Right { -1.0 } else { 1.0 };
    // ∫_0^span s^{p-1} g(x + dir s) ds = (1/p) ∫_0^{span^p} g(x + dir u^{1/p}) du
    let v = quad::adaptive(|u: f64| deriv(x + dir * u.powf(1.0 / p)), 0.0, span.powf(p), 1e-13, 1e-13).value / p;
    // the left derivative of order below one carries a minus sign
    let left_sign = if side == Side::Left && n == 1 { -1.0 } else { 1.0 };
    sign * left_sign * v / gamma(p).unwrap()
}

#[test]
fn rl_caputo_relation_below_one() {
    for beta in [0.3, 0.5, 0.7] {
        for (name, f) in test_functions() {
            for k in 0..21 {
                let x = 0.05 + 0.1 * k as f64;
                let rl = frac_derivative(&f, 0.0, order(beta), x, Kind::RiemannLiouville, Side::Right).unwrap();
                let c = frac_derivative(&f, 0.0, order(beta), x, Kind::Caputo, Side::Right).unwrap();
                let expect = f.eval(0.0) / (gamma(1.0 - beta).unwrap() * x.powf(beta));
                assert!((rl - c - expect).abs() < 1e-7, "{name} beta={beta} x={x}");
            }
        }
    }
}

#[test]
fn rl_caputo_relation_above_one() {
    for beta in [1.3, 1.5, 1.7] {
        for (name, f) in test_functions() {
            for k in 0..21 {
                let x = 0.05 + 0.1 * k as f64;
                let rl = frac_derivative(&f, 0.0, order(beta), x, Kind::RiemannLiouville, Side::Right).unwrap();
                let c = frac_derivative(&f, 0.0, order(beta), x, Kind::Caputo, Side::Right).unwrap();
                let expect = f.eval(0.0) * x.powf(-beta) / gamma(1.0 - beta).unwrap()
                    + f.derivative(0.0) * x.powf(1.0 - beta) / gamma(2.0 - beta).unwrap();
                assert!((rl - c - expect).abs() < 1e-7, "{name} beta={beta} x={x}");
            }
        }
    }
}

#[test]
fn singular_form_matches_definitional_form() {
    for beta in [0.3, 0.5, 0.7, 1.3, 1.5, 1.7] {
        for (name, f) in test_functions() {
            for x in [0.1, 0.6, 1.3, 2.0] {
                let c = frac_derivative(&f, 0.0, order(beta), x, Kind::Caputo, Side::Right).unwrap();
                let d = definitional_caputo(&f, 0.0, beta, x, Side::Right);
                assert!((c - d).abs() < 1e-6, "{name} right beta={beta} x={x}: {c} vs {d}");
                let c = frac_derivative(&f, 2.2, order(beta), x, Kind::Caputo, Side::Left).unwrap();
                let d = definitional_caputo(&f, 2.2, beta, x, Side::Left);
                assert!((c - d).abs() < 1e-6, "{name} left beta={beta} x={x}: {c} vs {d}");
            }
        }
    }
}

#[test]
fn mirror_relates_right_and_left_derivatives() {
    for beta in [0.4, 1.6] {
        for (name, f) in test_functions() {
            let g = {
                let f = f.clone();
                ScalarFunction::smooth(move |x: f64| f.eval(-x))
            };
            for kind in [Kind::Caputo, Kind::RiemannLiouville] {
                for x in [0.2, 0.9] {
                    let r = frac_derivative(&f, -0.5, order(beta), x, kind, Side::Right).unwrap();
                    let l = frac_derivative(&g, 0.5, order(beta), -x, kind, Side::Left).unwrap();
                    assert!((r - l).abs() < 1e-9 * (1.0 + r.abs()), "{name} {kind:?} beta={beta}: {r} vs {l}");
                }
            }
        }
    }
}

#[test]
fn fractional_integral_of_identity() {
    let f = ScalarFunction::smooth(|t: f64| t);
    let v = frac_integral(&f, 0.0, 0.5, 1.0).unwrap();
    // Γ(2)/Γ(2.5), extended precision
    assert!((v - 0.752_252_778_063_675_05).abs() < 1e-8);
}

#[test]
fn fractional_integral_matches_substitution_quadrature() {
    for (name, f) in test_functions() {
        for beta in [0.3, 0.8, 1.6] {
            let x = 1.4;
            let v = frac_integral(&f, -0.2, beta, x).unwrap();
            let span: f64 = x + 0.2;
            let w = quad::adaptive(|u: f64| f.eval(x - u.powf(1.0 / beta)), 0.0, span.powf(beta), 1e-14, 1e-14).value
                / (beta * gamma(beta).unwrap());
            assert!((v - w).abs() < 1e-8, "{name} beta={beta}: {v} vs {w}");
        }
    }
}

#[test]
fn generator_form_is_far_anchor_limit() {
    let f = ScalarFunction::smooth(|x: f64| (-x * x).exp());
    let g = generator_derivative(&f, order(0.5), 0.0, Side::Right).unwrap();
    let d = frac_derivative(&f, -50.0, order(0.5), 0.0, Kind::RiemannLiouville, Side::Right).unwrap();
    assert!((g - d).abs() < 1e-6, "{g} vs {d}");
}

#[test]
fn generator_forms_are_dual() {
    let f = ScalarFunction::smooth(|x: f64| (-(x - 0.3) * (x - 0.3)).exp());
    let g = ScalarFunction::smooth(|x: f64| (-2.0 * (x + 0.2) * (x + 0.2)).exp());
    for beta in [0.5, 1.5] {
        let lhs = quad::adaptive(
            |x: f64| generator_derivative(&f, order(beta), x, Side::Right).unwrap() * g.eval(x),
            -7.0,
            7.0,
            1e-10,
            1e-10,
        )
        .value;
        let rhs = quad::adaptive(
            |x: f64| f.eval(x) * generator_derivative(&g, order(beta), x, Side::Left).unwrap(),
            -7.0,
            7.0,
            1e-10,
            1e-10,
        )
        .value;
        assert!((lhs - rhs).abs() < 1e-6, "beta={beta}: {lhs} vs {rhs}");
    }
}

#[test]
fn evaluation_leaves_function_untouched() {
    let f = ScalarFunction::smooth(|x: f64| x.sin());
    let before: Vec<f64> = (0..5).map(|k| f.eval(k as f64)).collect();
    for kind in [Kind::Caputo, Kind::RiemannLiouville] {
        for side in [Side::Right, Side::Left] {
            let anchor = if side == Side::Right { -1.0 } else { 5.0 };
            frac_derivative(&f, anchor, order(0.5), 0.5, kind, side).unwrap();
        }
    }
    let after: Vec<f64> = (0..5).map(|k| f.eval(k as f64)).collect();
    assert_eq!(before, after);
}
