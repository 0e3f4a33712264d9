use fracalc_core::frac_ops::QuadratureSpec;
use fracalc_core::visco::*;

fn corpus() -> Vec<(&'static str, StrainProgram)> {
    let p = |b: Vec<(f64, f64)>| StrainProgram::new(b, PastRule::ConstantPast).unwrap();
    vec![
        ("ramp", p(vec![(0.0, 0.0), (1.0, 1.0)])),
        ("ramp_hold", p(vec![(0.0, 0.1), (0.5, 0.6), (3.0, 0.6)])),
        ("two_segment", p(vec![(0.0, 0.0), (0.4, 0.8), (1.2, 0.2), (5.0, 0.2)])),
    ]
}

#[test]
fn fractional_form_equals_boltzmann_integral() {
    for alpha in [FLOUR_DOUGH_ALPHA, 0.5, 0.8] {
        let m = Material::new(2.0, alpha).unwrap();
        for (name, s) in corpus() {
            for t in [0.7, 1.0, 2.5] {
                let exact = superposition_integral(&m, &s, t).unwrap();
                let f = fractional_form(&m, &s, t, &QuadratureSpec::for_point(t)).unwrap();
                let rel = ((f - exact) / exact).abs();
                assert!(rel < 1e-4, "{name} alpha={alpha} t={t}: {f} vs {exact}");
            }
        }
    }
}

#[test]
fn discrete_sum_converges_to_integral() {
    let m = Material::new(1.0, FLOUR_DOUGH_ALPHA).unwrap();
    for (name, s) in corpus() {
        let t = 2.0;
        let exact = superposition_integral(&m, &s, t).unwrap();
        let e64 = (superposition_sum(&m, &s, t, 64).unwrap() - exact).abs();
        let e4096 = (superposition_sum(&m, &s, t, 4096).unwrap() - exact).abs();
        let order = (e64 / e4096).ln() / 64f64.ln();
        eprintln!("{name}: err(64)={e64:.3e} err(4096)={e4096:.3e} order={order:.3}");
        assert!(e4096 < e64);
        assert!(order > 0.9, "{name}: order {order}");
    }
}

#[test]
fn stress_is_linear_in_strain() {
    let m = Material::new(1.3, 0.45).unwrap();
    for (_, s) in corpus() {
        let d = s.scaled(2.0);
        for t in [0.5, 1.5] {
            let a = superposition_integral(&m, &s, t).unwrap();
            assert_eq!(superposition_integral(&m, &d, t).unwrap(), 2.0 * a);
            let a = superposition_sum(&m, &s, t, 100).unwrap();
            assert_eq!(superposition_sum(&m, &d, t, 100).unwrap(), 2.0 * a);
        }
    }
}
