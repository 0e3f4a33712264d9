//! Subcommand implementations. Each returns an [`Outcome`] holding both the
//! JSON and the tabular form of its result.

use serde_json::{json, Map, Value};

use fracalc_core::ctrw::{run_ensemble, WalkConfig};
use fracalc_core::diffusion::{fundamental_solution, moments, support_radius, DiffusionParams, SpectralGrid};
use fracalc_core::extension::{solve_extension, weighted_trace, ExtensionSpec};
use fracalc_core::fitting::{fit_exponential, fit_fractional, FitResult, TimeSeries};
use fracalc_core::frac_ops::{
    composite_derivative, weyl_integral, FracOrder, HistoryFunction, QuadratureSpec,
};
use fracalc_core::io::{history_from_json, visco_input_from_json};
use fracalc_core::relaxation::{solve_constant_history, solve_marching, RelaxationProblem, Trajectory};
use fracalc_core::special_fn::{mittag_leffler, EvalPolicy, MLParams};
use fracalc_core::visco::{fractional_form, superposition_integral, superposition_sum};

use crate::config::overlay;
use crate::output::{num, Outcome, Table};
use crate::{
    read_file, CliError, Command, CtrwArgs, DiffusionArgs, ExtensionArgs, FitArgs, FitModel, FracOp,
    FracopArgs, Global, MlArgs, OperandArgs, OperandKind, RelaxArgs, RelaxMethod, ViscoArgs,
    ViscoMethod,
};

pub fn execute(
    cmd: &Command,
    section: Option<&Map<String, Value>>,
    g: &Global,
) -> Result<Outcome, CliError> {
    match cmd {
        Command::Ml(a) => ml(&overlay(a, section)?),
        Command::Fracop(a) => fracop(&overlay(a, section)?),
        Command::Relax(a) => relax(&overlay(a, section)?),
        Command::Fit(a) => fit(&overlay(a, section)?),
        Command::Visco(a) => visco(&overlay(a, section)?),
        Command::Ctrw(a) => ctrw(&overlay(a, section)?, g),
        Command::Diffusion(a) => diffusion(&overlay(a, section)?),
        Command::Extension(a) => extension(&overlay(a, section)?),
    }
}

fn scalar_table(name: &str, fields: &[(&'static str, f64)]) -> Table {
    let mut t = Table::new(name, fields.iter().map(|f| f.0).collect());
    t.push_nums(&fields.iter().map(|f| f.1).collect::<Vec<_>>());
    t
}

fn ml(a: &MlArgs) -> Result<Outcome, CliError> {
    let v = mittag_leffler(MLParams::new(a.alpha, a.beta)?, a.t, &EvalPolicy::default())?;
    Ok(Outcome {
        name: "ml",
        json: json!({"alpha": a.alpha, "beta": a.beta, "t": a.t, "value": v}),
        tables: vec![scalar_table("ml", &[("alpha", a.alpha), ("beta", a.beta), ("t", a.t), ("value", v)])],
    })
}

fn need(v: Option<f64>, flag: &str, kind: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::invalid(format!("--kind {kind} needs --{flag}")))
}

fn operand(o: &OperandArgs, alpha: f64) -> Result<HistoryFunction, CliError> {
    if let Some(p) = &o.history {
        return Ok(history_from_json(&read_file(p)?)?);
    }
    let kind = o
        .kind
        .ok_or_else(|| CliError::invalid("an operand is required: --kind or --history"))?;
    let h = match kind {
        OperandKind::Constant => HistoryFunction::Constant {
            c: need(o.c, "c", "constant")?,
        },
        OperandKind::Power => HistoryFunction::PowerPlus {
            beta: need(o.beta, "beta", "power")?,
        },
        OperandKind::ModifiedPower => HistoryFunction::ModifiedPower {
            beta: need(o.beta, "beta", "modified-power")?,
        },
        OperandKind::Exponential => HistoryFunction::Exponential {
            lambda: need(o.lambda, "lambda", "exponential")?,
        },
        OperandKind::MlPower => HistoryFunction::MittagLefflerPower {
            alpha,
            lambda: need(o.lambda, "lambda", "ml-power")?,
        },
    };
    fracalc_core::frac_ops::Operand::validate(&h)?;
    Ok(h)
}

fn fracop(a: &FracopArgs) -> Result<Outcome, CliError> {
    let u = operand(&a.operand, a.alpha)?;
    let q = QuadratureSpec::for_point(a.t);
    let e = match a.op {
        FracOp::Derivative => composite_derivative(&u, FracOrder::new(a.n, a.alpha)?, a.t, &q)?,
        FracOp::Integral => {
            if a.n != 0 {
                return Err(CliError::invalid("--n applies to derivatives only"));
            }
            weyl_integral(&u, a.alpha, a.t, &q)?
        }
    };
    Ok(Outcome {
        name: "fracop",
        json: json!({"value": e.value, "est_error": e.est_error}),
        tables: vec![scalar_table("fracop", &[("value", e.value), ("est_error", e.est_error)])],
    })
}

fn trajectory(name: &str, tr: &Trajectory) -> Outcome {
    let mut t = Table::new(name, vec!["t", "u"]);
    for (x, y) in tr.times.iter().zip(&tr.values) {
        t.push_nums(&[*x, *y]);
    }
    Outcome {
        name: "relax",
        json: json!({"t": tr.times, "u": tr.values}),
        tables: vec![t],
    }
}

fn relax(a: &RelaxArgs) -> Result<Outcome, CliError> {
    let method = a.method.unwrap_or(if a.history.is_some() {
        RelaxMethod::Marching
    } else {
        RelaxMethod::ClosedForm
    });
    let tr = match method {
        RelaxMethod::ClosedForm => {
            if a.history.is_some() {
                return Err(CliError::invalid("the closed form needs a constant history; use --c"));
            }
            solve_constant_history(a.alpha, a.lambda, a.c, a.t_end, a.dt)?
        }
        RelaxMethod::Marching => {
            let history = match &a.history {
                Some(p) => history_from_json(&read_file(p)?)?,
                None => HistoryFunction::Constant { c: a.c },
            };
            solve_marching(&RelaxationProblem {
                alpha: a.alpha,
                lambda: a.lambda,
                history,
                t_end: a.t_end,
                dt: a.dt,
            })?
        }
    };
    Ok(trajectory("relax", &tr))
}

fn fit(a: &FitArgs) -> Result<Outcome, CliError> {
    let data = TimeSeries::from_csv_str(&read_file(&a.input)?)?;
    let mut fits: Vec<FitResult> = Vec::new();
    if matches!(a.model, FitModel::Exponential | FitModel::Both) {
        fits.push(fit_exponential(&data)?);
    }
    if matches!(a.model, FitModel::Fractional | FitModel::Both) {
        fits.push(fit_fractional(&data)?);
    }
    let mut t = Table::new("fit", vec!["model", "alpha", "lambda", "C", "rmse", "t0"]);
    let mut obj = Map::new();
    for f in &fits {
        let model = serde_json::to_value(f.model).map_err(CliError::internal)?;
        let key = model.as_str().unwrap_or("model").to_string();
        let mut row = vec![key.clone()];
        row.extend([f.alpha, f.lambda, f.c, f.rmse, f.t0].map(num));
        t.push(row);
        obj.insert(key, serde_json::to_value(f).map_err(CliError::internal)?);
    }
    Ok(Outcome {
        name: "fit",
        json: Value::Object(obj),
        tables: vec![t],
    })
}

fn visco(a: &ViscoArgs) -> Result<Outcome, CliError> {
    let input = visco_input_from_json(&read_file(&a.input)?)?;
    let (m, s) = (&input.material, &input.strain);
    let t0 = s.origin();
    if !(a.t_end > t0) || !a.t_end.is_finite() {
        return Err(CliError::invalid(format!("--t-end must exceed the loading origin {t0}")));
    }
    if a.points == 0 || a.points > 1_000_000 {
        return Err(CliError::invalid("--points must lie in [1, 1e6]"));
    }
    let mut t = Table::new("visco", vec!["t", "strain", "stress"]);
    let (mut ts, mut es, mut ss) = (Vec::new(), Vec::new(), Vec::new());
    for i in 1..=a.points {
        let time = t0 + (a.t_end - t0) * i as f64 / a.points as f64;
        let stress = match a.method {
            ViscoMethod::Integral => superposition_integral(m, s, time)?,
            ViscoMethod::Sum => superposition_sum(m, s, time, a.n)?,
            ViscoMethod::Fractional => {
                fractional_form(m, s, time, &QuadratureSpec::for_point(time))?
            }
        };
        let strain = s.strain(time);
        t.push_nums(&[time, strain, stress]);
        ts.push(time);
        es.push(strain);
        ss.push(stress);
    }
    Ok(Outcome {
        name: "visco",
        json: json!({"t": ts, "strain": es, "stress": ss}),
        tables: vec![t],
    })
}

fn ctrw(a: &CtrwArgs, g: &Global) -> Result<Outcome, CliError> {
    let mut cfg = WalkConfig::new(a.alpha, a.walkers, a.t_end, g.seed);
    cfg.dx = a.dx;
    cfg.dtau = a.dtau;
    cfg.n_times = a.n_times;
    cfg.bin_sites = a.bin_sites;
    cfg.threads = g.threads;
    cfg.validate()?;
    let s = run_ensemble(&cfg)?;
    let mut msd = Table::new("ctrw_msd", vec!["t", "msd", "mean", "theory_msd"]);
    for i in 0..s.times.len() {
        msd.push_nums(&[s.times[i], s.msd[i], s.mean[i], cfg.theory_msd(s.times[i])]);
    }
    let mut hist = Table::new("ctrw_histogram", vec!["left", "right", "count", "density"]);
    let n = s.n_walkers as f64;
    for (i, &c) in s.histogram.counts.iter().enumerate() {
        let (l, r) = (s.histogram.edges[i], s.histogram.edges[i + 1]);
        let mut row = vec![num(l), num(r), c.to_string()];
        row.push(num(c as f64 / (n * (r - l))));
        hist.push(row);
    }
    let mut json = serde_json::to_value(&s).map_err(CliError::internal)?;
    json["k_alpha"] = json!(cfg.k_alpha());
    Ok(Outcome {
        name: "ctrw",
        json,
        tables: vec![msd, hist],
    })
}

fn diffusion(a: &DiffusionArgs) -> Result<Outcome, CliError> {
    let p = DiffusionParams {
        alpha: a.alpha,
        k_alpha: a.k,
        t: a.t,
    };
    p.validate()?;
    let grid = SpectralGrid::default();
    if a.moments {
        let m = moments(&p, &grid)?;
        let t = scalar_table(
            "diffusion_moments",
            &[
                ("normalization", m.normalization),
                ("msd", m.msd),
                ("msd_exact", m.msd_exact),
            ],
        );
        return Ok(Outcome {
            name: "diffusion",
            json: serde_json::to_value(m).map_err(CliError::internal)?,
            tables: vec![t],
        });
    }
    if a.points < 2 || a.points > 1_000_000 {
        return Err(CliError::invalid("--points must lie in [2, 1e6]"));
    }
    let x_max = a.x_max.unwrap_or_else(|| support_radius(a.alpha) * p.scale());
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(CliError::invalid("--x-max must be positive"));
    }
    let x: Vec<f64> = (0..a.points)
        .map(|i| -x_max + 2.0 * x_max * i as f64 / (a.points - 1) as f64)
        .collect();
    let u = fundamental_solution(&p, &x, &grid)?;
    let mut t = Table::new("diffusion", vec!["x", "u"]);
    for (x, u) in x.iter().zip(&u) {
        t.push_nums(&[*x, *u]);
    }
    Ok(Outcome {
        name: "diffusion",
        json: json!({"x": x, "u": u}),
        tables: vec![t],
    })
}

fn extension(a: &ExtensionArgs) -> Result<Outcome, CliError> {
    let u = operand(&a.operand, a.alpha)?;
    let spec = ExtensionSpec {
        t_lo: a.t_lo,
        t_hi: a.t_hi,
        dt: a.dt,
        out_every: a.out_every,
        y_max: a.y_max,
        n_y: a.n_y,
        grading: a.grading,
    };
    let tr = weighted_trace(&solve_extension(&u, a.alpha, &spec)?)?;
    let mut t = Table::new("extension", vec!["t", "trace", "oracle", "ratio"]);
    for i in 0..tr.t_points.len() {
        let ratio = tr.trace[i] / tr.oracle[i];
        let mut row = vec![num(tr.t_points[i]), num(tr.trace[i]), num(tr.oracle[i])];
        row.push(if ratio.is_finite() { num(ratio) } else { String::new() });
        t.push(row);
    }
    Ok(Outcome {
        name: "extension",
        json: serde_json::to_value(&tr).map_err(CliError::internal)?,
        tables: vec![t],
    })
}
