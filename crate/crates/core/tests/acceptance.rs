//! Acceptance run: one line per criterion.
//!
//! Criteria listed in `KNOWN_DEFECTS` compare against a closed form that does
//! not hold (see README). They are evaluated and reported like the others,
//! but only failures outside that list make the run exit non-zero.

use std::process::ExitCode;
use std::time::Instant;

use fracalc_core::ctrw::{compare_to_fundamental, msd_slope, run_ensemble, WalkConfig};
use fracalc_core::diffusion::{
    fundamental_solution, gaussian, invert, moments, DiffusionParams, SpectralGrid,
};
use fracalc_core::extension::{solve_extension, weighted_trace, ExtensionSpec};
use fracalc_core::fitting::{fit_exponential, fit_fractional, TimeSeries};
use fracalc_core::frac_ops::{
    consistency_limit_probe, ftfc_roundtrip, marchaud_derivative, HistoryFunction, LimitDirection,
    QuadratureSpec,
};
use fracalc_core::relaxation::{solve_constant_history, solve_marching, RelaxationProblem};
use fracalc_core::special_fn::{gamma, ml1, ml_derivative_check};
use fracalc_core::visco::{
    fractional_form, superposition_integral, superposition_sum, Material, PastRule, StrainProgram,
    FLOUR_DOUGH_ALPHA,
};

const KNOWN_DEFECTS: &[usize] = &[1, 4];

type Check = Result<(bool, String), String>;

fn q(t: f64) -> QuadratureSpec {
    QuadratureSpec::for_point(t)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn d(u: &HistoryFunction, alpha: f64, t: f64) -> Result<f64, String> {
    marchaud_derivative(u, alpha, t, &q(t)).map(|e| e.value).map_err(err)
}

fn g(x: f64) -> f64 {
    gamma(x).unwrap()
}

fn identities() -> Check {
    let alphas = [0.25f64, 0.5, 0.75];
    let (mut n, mut worst_pow, mut worst_exp, mut worst_const) = (0, 0.0f64, 0.0f64, 0.0f64);
    for &a in &alphas {
        for beta in [0.6f64, 1.0, 1.5, 2.0] {
            if beta <= a {
                continue;
            }
            for t in [0.5f64, 1.0, 3.0] {
                let exact = beta * g(beta) / g(1.0 + beta - a) * t.powf(beta - a);
                worst_pow = worst_pow.max(rel(d(&HistoryFunction::PowerPlus { beta }, a, t)?, exact));
                n += 1;
            }
        }
        for lambda in [0.5f64, 1.0, 2.0] {
            for t in [-1.0, 0.0, 1.0, 2.0] {
                let exact = lambda.powf(a) * (lambda * t).exp();
                worst_exp = worst_exp.max(rel(d(&HistoryFunction::Exponential { lambda }, a, t)?, exact));
                n += 1;
            }
        }
        for c in [-1.0, 0.0, 7.0] {
            for t in [-1.0, 0.0, 10.0] {
                worst_const = worst_const.max(d(&HistoryFunction::Constant { c }, a, t)?.abs());
                n += 1;
            }
        }
    }
    // Modified power against the printed closed form
    // bG(b)/G(1+b-a) t^{b-a} + (t^{b-a} - t^{-a})/G(1-a).
    let (mut worst_mod, mut worst_mod_at) = (0.0f64, (0.0, 0.0, 0.0));
    let mut mod_pass = true;
    for &a in &alphas {
        for beta in [1.5f64, 2.0] {
            for t in [0.05f64, 1.0, 2.0] {
                let printed = beta * g(beta) / g(1.0 + beta - a) * t.powf(beta - a)
                    + (t.powf(beta - a) - t.powf(-a)) / g(1.0 - a);
                let e = rel(d(&HistoryFunction::ModifiedPower { beta }, a, t)?, printed);
                let tol = if t < 0.1 { 1e-4 } else { 1e-6 };
                mod_pass &= e <= tol;
                if e > worst_mod {
                    worst_mod = e;
                    worst_mod_at = (beta, a, t);
                }
                n += 1;
            }
        }
    }
    let pass = n >= 36 && worst_pow <= 1e-6 && worst_exp <= 1e-6 && worst_const <= 1e-12 && mod_pass;
    Ok((
        pass,
        format!(
            "{n} combos; power {worst_pow:.1e}, exponential {worst_exp:.1e}, constant |D| {worst_const:.1e}, \
             modified power vs printed formula {worst_mod:.2} at (beta, a, t) = {worst_mod_at:?}"
        ),
    ))
}

fn mittag_leffler() -> Check {
    let mut worst_exp = 0.0f64;
    for i in 0..=1000 {
        let t = -5.0 + 0.01 * i as f64;
        worst_exp = worst_exp.max(rel(ml1(1.0, t).map_err(err)?, t.exp()));
    }
    let mut worst_eig = 0.0f64;
    for (a, lambda) in [(0.3, 0.5), (0.3, 2.0), (0.5, 1.0), (0.5, 3.0), (0.8, 0.7), (0.8, 1.5)] {
        for t in [0.5, 1.0, 2.0] {
            let (lhs, rhs) = ml_derivative_check(a, lambda, t).map_err(err)?;
            worst_eig = worst_eig.max(rel(lhs, rhs));
        }
    }
    Ok((
        worst_exp <= 1e-12 && worst_eig <= 1e-4,
        format!("E_1,1 vs exp {worst_exp:.1e}; eigen relation {worst_eig:.1e} over 6 (a, lambda) pairs"),
    ))
}

fn ftfc() -> Check {
    let mut worst = 0.0f64;
    let mut check = |u: &HistoryFunction, a: f64, t: f64, expect: f64| -> Result<(), String> {
        let (r, _) = ftfc_roundtrip(u, a, t, &q(t)).map_err(err)?;
        worst = worst.max((r - expect).abs());
        Ok(())
    };
    check(&HistoryFunction::Exponential { lambda: 1.0 }, 0.5, 0.0, 1.0)?;
    let b = HistoryFunction::box_indicator(0.0, 1.0, 2.0, 0.01).map_err(err)?;
    for (t, v) in [(0.3, 1.0), (0.5, 1.0), (0.7, 1.0), (1.5, 0.0)] {
        check(&b, 0.3, t, v)?;
    }
    check(&HistoryFunction::PowerPlus { beta: 1.5 }, 0.7, 2.0, 2f64.powf(1.5))?;
    Ok((worst <= 5e-3, format!("max roundtrip error {worst:.1e} over exponential, box, power")))
}

fn limits() -> Check {
    let mut worst_one = 0.0f64;
    for (u, t, du) in [
        (HistoryFunction::PowerPlus { beta: 2.0 }, 1.0, 2.0),
        (HistoryFunction::Exponential { lambda: 1.0 }, 0.5, 0.5f64.exp()),
        (HistoryFunction::ModifiedPower { beta: 2.0 }, 2.0, 4.0),
    ] {
        let seq = consistency_limit_probe(&u, t, LimitDirection::ToOne, &q(t)).map_err(err)?;
        worst_one = worst_one.max(rel(seq[2].1, du));
    }
    let skinny = consistency_limit_probe(
        &HistoryFunction::PowerPlus { beta: 2.0 },
        2.0,
        LimitDirection::ToZero,
        &q(2.0),
    )
    .map_err(err)?[2]
        .1;
    let fat = consistency_limit_probe(
        &HistoryFunction::ModifiedPower { beta: 2.0 },
        2.0,
        LimitDirection::ToZero,
        &q(2.0),
    )
    .map_err(err)?[2]
        .1;
    let paradox = 2.0 * 4.0 - 1.0;
    let pass = worst_one <= 0.01 && rel(skinny, 4.0) <= 0.01 && rel(fat, paradox) <= 0.01;
    Ok((
        pass,
        format!(
            "a=0.999 vs classical {worst_one:.1e}; a=0.001: (t_+)^2 -> {skinny:.4} (expect 4), \
             modified power -> {fat:.4} (printed paradox value {paradox})"
        ),
    ))
}

fn relaxation() -> Check {
    let mut worst = 0.0f64;
    let mut min_factor = f64::INFINITY;
    for (a, lambda) in [(0.5, -1.0), (0.8, -1.0), (0.5, 1.0)] {
        let max_err = |dt: f64| -> Result<f64, String> {
            let p = RelaxationProblem {
                alpha: a,
                lambda,
                history: HistoryFunction::Constant { c: 1.0 },
                t_end: 1.0,
                dt,
            };
            let num = solve_marching(&p).map_err(err)?;
            let exact = solve_constant_history(a, lambda, 1.0, 1.0, dt).map_err(err)?;
            Ok(num
                .values
                .iter()
                .zip(&exact.values)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max))
        };
        let (e1, e2) = (max_err(2e-3)?, max_err(1e-3)?);
        worst = worst.max(e2);
        min_factor = min_factor.min(e1 / e2);
    }
    Ok((
        worst <= 5e-3 && min_factor >= 1.7,
        format!("max error at dt=1e-3 {worst:.1e}; smallest halving factor {min_factor:.2}"),
    ))
}

fn fitting() -> Check {
    let mut inputs = Vec::new();
    let times: Vec<f64> = (0..25).map(|i| 0.2 * i as f64).collect();
    for a in [0.4, 0.7] {
        let v = times.iter().map(|t| 2.0 * ml1(a, 0.8 * t.powf(a)).unwrap()).collect();
        inputs.push((Some(a), TimeSeries::new(times.clone(), v).map_err(err)?));
    }
    let v = times.iter().map(|t| 1.5 * (0.6 * t).exp()).collect();
    inputs.push((None, TimeSeries::new(times.clone(), v).map_err(err)?));
    // deterministic irregular data
    let mut state = 0x2545_f491_4f6c_dd1d_u64;
    for _ in 0..5 {
        let v = times
            .iter()
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                0.5 + (state >> 11) as f64 / (1u64 << 53) as f64 * 5.0
            })
            .collect();
        inputs.push((None, TimeSeries::new(times.clone(), v).map_err(err)?));
    }
    let (mut nested, mut worst_alpha) = (true, 0.0f64);
    for (truth, data) in &inputs {
        let e = fit_exponential(data).map_err(err)?;
        let f = fit_fractional(data).map_err(err)?;
        nested &= f.rmse <= e.rmse;
        if let Some(a) = truth {
            worst_alpha = worst_alpha.max((f.alpha - a).abs());
        }
    }
    Ok((
        nested && worst_alpha <= 0.02,
        format!("nesting held on {} inputs: {nested}; alpha recovery error {worst_alpha:.1e}", inputs.len()),
    ))
}

fn visco() -> Check {
    let p = |b: Vec<(f64, f64)>| StrainProgram::new(b, PastRule::ConstantPast).map_err(err);
    let corpus = [
        p(vec![(0.0, 0.0), (1.0, 1.0)])?,
        p(vec![(0.0, 0.1), (0.5, 0.6), (3.0, 0.6)])?,
        p(vec![(0.0, 0.0), (0.4, 0.8), (1.2, 0.2), (5.0, 0.2)])?,
    ];
    let mut worst = 0.0f64;
    for a in [FLOUR_DOUGH_ALPHA, 0.5, 0.8] {
        let m = Material::new(2.0, a).map_err(err)?;
        for s in &corpus {
            for t in [0.7, 1.0, 2.5] {
                let exact = superposition_integral(&m, s, t).map_err(err)?;
                worst = worst.max(rel(fractional_form(&m, s, t, &q(t)).map_err(err)?, exact));
            }
        }
    }
    let m = Material::new(1.0, FLOUR_DOUGH_ALPHA).map_err(err)?;
    let mut min_order = f64::INFINITY;
    let mut shrinks = true;
    for s in &corpus {
        let exact = superposition_integral(&m, s, 2.0).map_err(err)?;
        let e64 = (superposition_sum(&m, s, 2.0, 64).map_err(err)? - exact).abs();
        let e4096 = (superposition_sum(&m, s, 2.0, 4096).map_err(err)? - exact).abs();
        shrinks &= e4096 < e64;
        min_order = min_order.min((e64 / e4096).ln() / 64f64.ln());
    }
    Ok((
        worst <= 1e-4 && shrinks && min_order >= 0.9,
        format!("equivalence {worst:.1e}; sum order between N=64 and 4096 at least {min_order:.2}"),
    ))
}

fn ctrw() -> Check {
    let mut notes = Vec::new();
    let mut pass = true;
    for (a, t, slope_tol, disc_tol) in [(1.0, 100.0, 0.05, 0.02), (0.5, 1e6, 0.05, 0.05)] {
        let cfg = WalkConfig::new(a, 100_000, t, 2024);
        let s = run_ensemble(&cfg).map_err(err)?;
        let slope = msd_slope(&s).map_err(err)?;
        let p = DiffusionParams {
            alpha: a,
            k_alpha: cfg.k_alpha(),
            t: s.t_end,
        };
        let c = compare_to_fundamental(&s, |x| fundamental_solution(&p, x, &SpectralGrid::default()))
            .map_err(err)?;
        pass &= (slope - a).abs() <= slope_tol && c.sup_density <= disc_tol;
        notes.push(format!(
            "a={a}: slope {slope:.4}, sup discrepancy {:.1e} (KS {:.1e})",
            c.sup_density, c.ks
        ));
    }
    let small = WalkConfig::new(0.5, 2000, 1e4, 9);
    let same = run_ensemble(&small).map_err(err)? == run_ensemble(&small).map_err(err)?;
    pass &= same;
    notes.push(format!("seed reproducible: {same}"));
    Ok((pass, notes.join("; ")))
}

fn diffusion() -> Check {
    let grid = SpectralGrid::default();
    let heat = DiffusionParams {
        alpha: 1.0,
        k_alpha: 1.0,
        t: 1.0,
    };
    let x: Vec<f64> = (0..=200).map(|i| -8.0 + 0.08 * i as f64).collect();
    let num = invert(&heat, &x, &grid).map_err(err)?;
    let gauss_err = x
        .iter()
        .zip(&num)
        .map(|(&x, v)| (v - gaussian(1.0, 1.0, x)).abs())
        .fold(0.0, f64::max);
    let (mut worst_norm, mut worst_ratio, mut worst_exact) = (0.0f64, 0.0f64, 0.0f64);
    for a in [0.3f64, 0.5, 0.8] {
        let p = DiffusionParams {
            alpha: a,
            k_alpha: 1.0,
            t: 1.0,
        };
        let m1 = moments(&p, &grid).map_err(err)?;
        let m2 = moments(&DiffusionParams { t: 2.0, ..p }, &grid).map_err(err)?;
        worst_norm = worst_norm.max((m1.normalization - 1.0).abs());
        worst_exact = worst_exact.max(rel(m1.msd, m1.msd_exact));
        let r = m2.msd / m1.msd;
        worst_ratio = worst_ratio.max(rel(r, 2f64.powf(a)));
    }
    Ok((
        gauss_err <= 1e-8 && worst_norm <= 1e-6 && worst_ratio <= 1e-3,
        format!(
            "a=1 inversion vs Gaussian {gauss_err:.1e}; normalization {worst_norm:.1e}; msd ratio {worst_ratio:.1e} (absolute msd {worst_exact:.1e})"
        ),
    ))
}

fn extension() -> Check {
    let a = 0.5;
    let spec = ExtensionSpec::new(1.0, 3.0);
    let mut ests = Vec::new();
    let mut worst_shape = 0.0f64;
    for u in [
        HistoryFunction::Exponential { lambda: 0.5 },
        HistoryFunction::Exponential { lambda: 1.0 },
        HistoryFunction::Exponential { lambda: 2.0 },
        HistoryFunction::PowerPlus { beta: 1.0 },
    ] {
        let tr = weighted_trace(&solve_extension(&u, a, &spec).map_err(err)?).map_err(err)?;
        let est = tr.d_alpha_est.ok_or("vanishing oracle")?;
        for (v, o) in tr.trace.iter().zip(&tr.oracle) {
            worst_shape = worst_shape.max(rel(v / o, est));
        }
        ests.push(est);
    }
    let mx = ests.iter().cloned().fold(f64::MIN, f64::max);
    let mn = ests.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (mx - mn) / mn;
    let c = weighted_trace(&solve_extension(&HistoryFunction::Constant { c: 3.0 }, a, &spec).map_err(err)?)
        .map_err(err)?;
    let const_trace = c.trace.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((
        spread <= 0.02 && worst_shape <= 0.02 && const_trace <= 1e-8,
        format!(
            "d_a estimates {ests:.5?} (spread {spread:.1e}, within-operand {worst_shape:.1e}); constant trace {const_trace:.1e}"
        ),
    ))
}

type Criterion = (&'static str, f64, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form identities", 10.0, identities),
        ("Mittag-Leffler", 30.0, mittag_leffler),
        ("FTFC roundtrip", 60.0, ftfc),
        ("consistency limits", 60.0, limits),
        ("relaxation solver", 60.0, relaxation),
        ("fitting", 60.0, fitting),
        ("viscoelastic equivalence", 60.0, visco),
        ("CTRW", 300.0, ctrw),
        ("diffusion solver", 120.0, diffusion),
        ("extension problem", 120.0, extension),
    ];
    let mut unexpected = Vec::new();
    let mut known = Vec::new();
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs <= *budget, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {n:2} {name} ({secs:.1} s, budget {budget:.0} s): {detail}");
        if !pass {
            if KNOWN_DEFECTS.contains(&n) {
                known.push(n);
            } else {
                unexpected.push(n);
            }
        }
    }
    if !known.is_empty() {
        println!("known failures against printed closed forms: {known:?}");
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
