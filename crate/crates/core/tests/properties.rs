use fracalc_core::fitting::{fit_exponential, fit_fractional, TimeSeries};
use fracalc_core::frac_ops::{marchaud_derivative, HistoryFunction, QuadratureSpec, TailModel};
use fracalc_core::special_fn::{gamma, mittag_leffler, ml1, rgamma, EvalPolicy, MLParams};
use fracalc_core::visco::{superposition_integral, superposition_sum, Material, PastRule, StrainProgram};
use proptest::prelude::*;

fn q(t: f64) -> QuadratureSpec {
    QuadratureSpec::for_point(t)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn off_pole() -> impl Strategy<Value = f64> {
    (-10.0..60.0f64).prop_filter("pole", |x| (x - x.round()).abs() > 1e-3 || *x > 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_recurrence(x in off_pole()) {
        let (a, b) = (gamma(x + 1.0).unwrap(), x * gamma(x).unwrap());
        prop_assert!(rel(a, b) < 1e-12, "{x}: {a} vs {b}");
    }

    #[test]
    fn gamma_reciprocal_is_consistent(x in off_pole()) {
        prop_assert!(rel(rgamma(x), 1.0 / gamma(x).unwrap()) < 1e-13);
    }

    #[test]
    fn ml_at_zero_is_reciprocal_gamma(alpha in 0.05..3.0f64, beta in 0.05..5.0f64) {
        let p = MLParams::new(alpha, beta).unwrap();
        prop_assert_eq!(mittag_leffler(p, 0.0, &EvalPolicy::default()).unwrap(), rgamma(beta));
    }

    #[test]
    fn ml_order_one_is_exp(t in -5.0..5.0f64) {
        prop_assert!(rel(ml1(1.0, t).unwrap(), t.exp()) < 1e-12);
    }

    #[test]
    fn ml_decays_monotonically_on_negative_axis(alpha in 0.2..0.95f64, x in 0.0..100.0f64, dx in 0.01..10.0f64) {
        let a = ml1(alpha, -x).unwrap();
        let b = ml1(alpha, -(x + dx)).unwrap();
        prop_assert!(b > 0.0);
        prop_assert!(b < a, "alpha {alpha}: E(-{x}) = {a}, E(-{}) = {b}", x + dx);
    }

    #[test]
    fn constants_are_annihilated(c in -10.0..10.0f64, alpha in 0.05..0.95f64, t in -5.0..20.0f64) {
        let d = marchaud_derivative(&HistoryFunction::Constant { c }, alpha, t, &q(t)).unwrap();
        prop_assert!(d.value.abs() <= q(t).abs_tol);
    }

    #[test]
    fn power_rule(alpha in 0.1..0.9f64, extra in 0.05..2.5f64, t in 0.2..5.0f64) {
        let beta = alpha + extra;
        let d = marchaud_derivative(&HistoryFunction::PowerPlus { beta }, alpha, t, &q(t)).unwrap();
        let exact = beta * gamma(beta).unwrap() / gamma(1.0 + beta - alpha).unwrap() * t.powf(beta - alpha);
        prop_assert!(rel(d.value, exact) < 1e-6, "{} vs {exact}", d.value);
    }

    #[test]
    fn exponential_is_an_eigenfunction(alpha in 0.05..0.95f64, lambda in 0.2..3.0f64, t in -1.0..2.0f64) {
        let d = marchaud_derivative(&HistoryFunction::Exponential { lambda }, alpha, t, &q(t)).unwrap();
        prop_assert!(rel(d.value, lambda.powf(alpha) * (lambda * t).exp()) < 1e-7);
    }
}

fn grid(values: Vec<f64>) -> HistoryFunction {
    HistoryFunction::GridSampled {
        t0: 0.0,
        dt: 0.25,
        values,
        tail: TailModel::ZeroBefore { t_start: 0.0 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_is_linear(
        u in prop::collection::vec(-2.0..2.0f64, 9),
        v in prop::collection::vec(-2.0..2.0f64, 9),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        alpha in 0.1..0.9f64,
        t in 0.1..2.0f64,
    ) {
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let d = |f: Vec<f64>| marchaud_derivative(&grid(f), alpha, t, &q(t)).unwrap().value;
        let (du, dv, dw) = (d(u), d(v), d(w));
        let scale = (a * du).abs() + (b * dv).abs() + 1.0;
        prop_assert!((dw - a * du - b * dv).abs() <= 1e-8 * scale);
    }

    #[test]
    fn stress_is_linear_in_strain(
        incr in prop::collection::vec(-1.0..1.0f64, 1..5),
        c in -4.0..4.0f64,
        alpha in 0.1..0.9f64,
        zero_past in any::<bool>(),
    ) {
        let mut pts = vec![(0.0, 0.2)];
        for (i, d) in incr.iter().enumerate() {
            let last = pts[i].1;
            pts.push((0.5 * (i + 1) as f64, last + d));
        }
        let rule = if zero_past { PastRule::ZeroPast } else { PastRule::ConstantPast };
        let s = StrainProgram::new(pts, rule).unwrap();
        let m = Material::new(1.5, alpha).unwrap();
        let t = 0.5 * incr.len() as f64 + 0.3;
        let one = superposition_sum(&m, &s, t, 256).unwrap();
        let scaled = superposition_sum(&m, &s.scaled(c), t, 256).unwrap();
        prop_assert!((scaled - c * one).abs() <= 1e-12 * (1.0 + (c * one).abs()));
        let one = superposition_integral(&m, &s, t).unwrap();
        let scaled = superposition_integral(&m, &s.scaled(c), t).unwrap();
        prop_assert!((scaled - c * one).abs() <= 1e-9 * (1.0 + (c * one).abs()));
    }

    #[test]
    fn fractional_fit_never_loses_to_exponential(
        values in prop::collection::vec(0.1..10.0f64, 5..12),
        start in 0.0..100.0f64,
    ) {
        let times: Vec<f64> = (0..values.len()).map(|i| start + i as f64).collect();
        let d = TimeSeries::new(times, values).unwrap();
        let (e, f) = (fit_exponential(&d).unwrap(), fit_fractional(&d).unwrap());
        prop_assert!(f.rmse <= e.rmse);
    }
}
