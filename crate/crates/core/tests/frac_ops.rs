use fracalc_core::frac_ops::*;
use fracalc_core::quad::gauss_legendre;

fn q(t: f64) -> QuadratureSpec {
    QuadratureSpec::for_point(t)
}

fn sampled(t0: f64, dt: f64, n: usize, f: impl Fn(f64) -> f64) -> HistoryFunction {
    HistoryFunction::GridSampled {
        t0,
        dt,
        values: (0..=n).map(|i| f(t0 + i as f64 * dt)).collect(),
        tail: TailModel::ZeroBefore { t_start: t0 },
    }
}

// Gauss-Legendre on every cell of width h in [a, b].
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    let (x, w) = gauss_legendre(4);
    let cells = ((b - a) / h).round() as usize;
    let mut s = 0.0;
    for c in 0..cells {
        let (lo, hi) = (a + c as f64 * h, a + (c + 1) as f64 * h);
        let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in x.iter().zip(&w) {
            s += r * wi * f(m + r * xi);
        }
    }
    s
}

#[test]
fn left_and_right_derivatives_are_adjoint() {
    use std::f64::consts::PI;
    let bump_u = |t: f64| if (0.0..=2.0).contains(&t) { (PI * t / 2.0).sin().powi(2) } else { 0.0 };
    let bump_phi =
        |t: f64| if (0.5..=3.0).contains(&t) { (PI * (t - 0.5) / 2.5).sin().powi(2) } else { 0.0 };
    let h = 0.01;
    let u = sampled(0.0, h, 350, bump_u);
    let phi = Mirrored(sampled(-3.5, h, 400, |s| bump_phi(-s)));
    for alpha in [0.3, 0.7] {
        let lhs = integrate(
            |t| marchaud_derivative(&u, alpha, t, &q(t)).unwrap().value * bump_phi(t),
            0.5,
            3.0,
            h,
        );
        let rhs = integrate(
            |t| bump_u(t) * right_derivative(&phi, alpha, t, &q(t)).unwrap().value,
            0.0,
            2.0,
            h,
        );
        assert!((lhs - rhs).abs() <= 1e-4 * lhs.abs().max(rhs.abs()), "{alpha}: {lhs} vs {rhs}");
    }
}

#[test]
fn right_derivative_of_constant_vanishes() {
    let c = Mirrored(HistoryFunction::Constant { c: 3.0 });
    assert_eq!(right_derivative(&c, 0.4, 1.0, &q(1.0)).unwrap().value, 0.0);
}

fn capture(u: &HistoryFunction, alpha: f64, lo: f64, t: f64, h: f64) -> HistoryFunction {
    let n = ((t - lo) / h).round() as usize;
    sampled(lo, h, n, |s| marchaud_derivative(u, alpha, s, &q(s)).unwrap().value)
}

#[test]
fn orders_compose() {
    let lambda = 1.5;
    let u = HistoryFunction::Exponential { lambda };
    let t = 0.5;
    let lo = t - 36.0 / lambda;
    // total below one
    let inner = capture(&u, 0.4, lo, t, 0.004);
    let outer = marchaud_derivative(&inner, 0.3, t, &q(t)).unwrap().value;
    let direct = marchaud_derivative(&u, 0.7, t, &q(t)).unwrap().value;
    assert!((outer / direct - 1.0).abs() < 1e-4, "{outer} vs {direct}");
    // total above one
    let inner = capture(&u, 0.7, lo, t, 0.001);
    let outer = marchaud_derivative(&inner, 0.6, t, &q(t)).unwrap().value;
    let direct = composite_derivative(&u, FracOrder::new(1, 0.3).unwrap(), t, &q(t)).unwrap().value;
    assert!((outer / direct - 1.0).abs() < 1e-4, "{outer} vs {direct}");
    assert!((direct / (lambda.powf(1.3) * (lambda * t).exp()) - 1.0).abs() < 1e-7);
}

#[test]
fn fundamental_theorem_roundtrips() {
    let (r, u) = ftfc_roundtrip(&HistoryFunction::Exponential { lambda: 1.0 }, 0.5, 0.0, &q(0.0)).unwrap();
    assert!((r - u).abs() < 1e-3, "{r} vs {u}");
    let b = HistoryFunction::box_indicator(0.0, 1.0, 2.0, 0.01).unwrap();
    for t in [0.3, 0.5, 0.7, 1.5] {
        let (r, u) = ftfc_roundtrip(&b, 0.3, t, &q(t)).unwrap();
        assert!((r - u).abs() < 5e-3, "box at {t}: {r} vs {u}");
    }
    let (r, u) = ftfc_roundtrip(&HistoryFunction::PowerPlus { beta: 1.5 }, 0.7, 2.0, &q(2.0)).unwrap();
    assert!((r - 2f64.powf(1.5)).abs() < 1e-3 && (u - 2f64.powf(1.5)).abs() < 1e-15, "{r}");
}

#[test]
fn roundtrip_needs_a_decaying_past() {
    assert!(ftfc_roundtrip(&HistoryFunction::Constant { c: 1.0 }, 0.5, 1.0, &q(1.0)).is_err());
}

#[test]
fn order_one_limit_is_the_classical_derivative() {
    let cases = [
        (HistoryFunction::PowerPlus { beta: 2.0 }, 1.0, 2.0),
        (HistoryFunction::Exponential { lambda: 1.0 }, 0.5, 0.5f64.exp()),
        (HistoryFunction::ModifiedPower { beta: 2.0 }, 2.0, 4.0),
    ];
    for (u, t, du) in cases {
        let seq = consistency_limit_probe(&u, t, LimitDirection::ToOne, &q(t)).unwrap();
        let (a, last) = seq[2];
        assert_eq!(a, 0.999);
        assert!((last / du - 1.0).abs() < 0.01, "{u:?}: {last} vs {du}");
        let errs: Vec<f64> = seq.iter().map(|(_, v)| (v - du).abs()).collect();
        assert!(errs[2] < errs[0]);
    }
}

#[test]
fn order_zero_limits() {
    let seq = consistency_limit_probe(&HistoryFunction::PowerPlus { beta: 2.0 }, 1.0, LimitDirection::ToZero, &q(1.0))
        .unwrap();
    assert!((seq[2].1 - 1.0).abs() < 0.01);
    // The modified power is 1 on the whole past; its order-zero limit is
    // u(t) - u(-inf) = t^beta - 1.
    let t = 2.0;
    let seq = consistency_limit_probe(&HistoryFunction::ModifiedPower { beta: 2.0 }, t, LimitDirection::ToZero, &q(t))
        .unwrap();
    assert!((seq[2].1 - 3.0).abs() < 0.01 * 3.0, "{:?}", seq);
}
