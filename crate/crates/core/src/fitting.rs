//! Least-squares fits of the memory growth model `C E_a(lambda tau^a)` and
//! of the exponential `C e^{lambda tau}`, with `tau` the time elapsed since
//! the first sample.
//!
//! `C` enters linearly and is profiled out in closed form. For the
//! exponential the remaining rate is found by golden section around the
//! log-linear estimate. The fractional fit scans a grid of orders, solves
//! the one-dimensional rate problem at each, then polishes the best grid
//! point with Nelder-Mead in `(a, lambda T^a)`. The exponential optimum is
//! always among its candidates, so it can never fit worse.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::ml1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
struct Row {
    t: f64,
    value: f64,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let d = TimeSeries { times, values };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.values.len() {
            return Err(Error::param("values", "times and values differ in length"));
        }
        if self.times.len() < 4 {
            return Err(Error::param("times", "need at least 4 samples"));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("times", "must be finite"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        if self.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::param("values", "must be positive and finite"));
        }
        Ok(())
    }

    /// Reads CSV with header `t,value`.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "value" {
            return Err(Error::Parse(format!(
                "expected header `t,value`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            times.push(row.t);
            values.push(row.value);
        }
        TimeSeries::new(times, values)
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        TimeSeries::read_csv(s.as_bytes())
    }

    fn elapsed(&self) -> Vec<f64> {
        let t0 = self.times[0];
        self.times.iter().map(|t| t - t0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Fractional,
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub alpha: f64,
    pub lambda: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub rmse: f64,
    /// Time of the first sample; the model clock starts there.
    pub t0: f64,
    /// Set when the data carry no rate information (all values equal).
    pub degenerate: bool,
}

// Shape of the model at elapsed times `tau`, parameterised by the order and
// z = lambda * T^a with T the data span.
fn shape(alpha: f64, z: f64, tau: &[f64], span: f64) -> Option<Vec<f64>> {
    tau.iter()
        .map(|&s| {
            let x = s / span;
            let v = if alpha >= 1.0 {
                (z * x).exp()
            } else {
                ml1(alpha, z * x.powf(alpha)).ok()?
            };
            v.is_finite().then_some(v)
        })
        .collect()
}

// Optimal C and the resulting rmse for a fixed shape.
fn profile(f: &[f64], y: &[f64]) -> (f64, f64) {
    let ff: f64 = f.iter().map(|v| v * v).sum();
    let fy: f64 = f.iter().zip(y).map(|(a, b)| a * b).sum();
    if !(ff > 0.0 && ff.is_finite()) {
        return (f64::NAN, f64::INFINITY);
    }
    let c = fy / ff;
    let sse: f64 = f.iter().zip(y).map(|(a, b)| (c * a - b).powi(2)).sum();
    let rmse = (sse / y.len() as f64).sqrt();
    (c, if rmse.is_finite() { rmse } else { f64::INFINITY })
}

struct Problem<'a> {
    tau: Vec<f64>,
    y: &'a [f64],
    span: f64,
}

impl Problem<'_> {
    fn rmse(&self, alpha: f64, z: f64) -> f64 {
        shape(alpha, z, &self.tau, self.span).map_or(f64::INFINITY, |f| profile(&f, self.y).1)
    }

    fn result(&self, model: Model, alpha: f64, z: f64, t0: f64) -> FitResult {
        let f = shape(alpha, z, &self.tau, self.span);
        let (c, rmse) = f.map_or((f64::NAN, f64::INFINITY), |f| profile(&f, self.y));
        FitResult {
            model,
            alpha,
            lambda: z / self.span.powf(alpha),
            c,
            rmse,
            t0,
            degenerate: false,
        }
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Minimises `f` on `[a, b]` by golden section.
fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
        if (b - a).abs() <= 1e-14 * (a.abs() + b.abs()).max(1e-300) {
            break;
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

// Scan z over a symmetric log grid, then refine between the neighbours of
// the best scan point.
fn best_rate(p: &Problem, alpha: f64) -> (f64, f64) {
    // keep E_a(z) finite: its growth is roughly exp(z^{1/a})
    let z_pos = 600f64.powf(alpha).min(1e4);
    let z_neg: f64 = 1e4;
    let mut grid = vec![0.0];
    let mut e = -3.0;
    while 10f64.powf(e) <= z_neg.max(z_pos) {
        let z = 10f64.powf(e);
        if z <= z_pos {
            grid.push(z);
        }
        grid.push(-z);
        e += 0.125;
    }
    grid.sort_by(f64::total_cmp);
    let vals: Vec<f64> = grid.iter().map(|&z| p.rmse(alpha, z)).collect();
    let i = (0..grid.len())
        .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
        .expect("grid is nonempty");
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (z, r) = golden(|z| p.rmse(alpha, z), lo, hi, 200);
    if r <= vals[i] {
        (z, r)
    } else {
        (grid[i], vals[i])
    }
}

/// Nelder-Mead on `(alpha, z)` with alpha clamped to `(0, 1]`.
fn polish(p: &Problem, start: (f64, f64)) -> (f64, f64, f64) {
    let clamp = |a: f64| a.clamp(1e-3, 1.0);
    let f = |x: [f64; 2]| p.rmse(clamp(x[0]), x[1]);
    let mut s = [
        [start.0, start.1],
        [start.0 - 0.03, start.1],
        [start.0, start.1 * 1.05 + 0.02],
    ];
    let mut fv = [f(s[0]), f(s[1]), f(s[2])];
    for _ in 0..400 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        s = [s[idx[0]], s[idx[1]], s[idx[2]]];
        fv = [fv[idx[0]], fv[idx[1]], fv[idx[2]]];
        let size = (s[1][0] - s[0][0]).abs().max((s[2][0] - s[0][0]).abs())
            + ((s[1][1] - s[0][1]).abs().max((s[2][1] - s[0][1]).abs())) / (1.0 + s[0][1].abs());
        if size < 1e-10 || (fv[2] - fv[0]).abs() <= 1e-15 * fv[0].max(1e-300) {
            break;
        }
        let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let at = |k: f64| [c[0] + k * (s[2][0] - c[0]), c[1] + k * (s[2][1] - c[1])];
        let xr = at(-1.0);
        let fr = f(xr);
        if fr < fv[0] {
            let xe = at(-2.0);
            let fe = f(xe);
            if fe < fr {
                s[2] = xe;
                fv[2] = fe;
            } else {
                s[2] = xr;
                fv[2] = fr;
            }
        } else if fr < fv[1] {
            s[2] = xr;
            fv[2] = fr;
        } else {
            let xc = if fr < fv[2] { at(-0.5) } else { at(0.5) };
            let fc = f(xc);
            if fc < fv[2].min(fr) {
                s[2] = xc;
                fv[2] = fc;
            } else {
                for k in 1..3 {
                    s[k] = [(s[k][0] + s[0][0]) / 2.0, (s[k][1] + s[0][1]) / 2.0];
                    fv[k] = f(s[k]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap();
    (clamp(s[best][0]), s[best][1], fv[best])
}

fn degenerate(d: &TimeSeries) -> Option<FitResult> {
    let first = d.values[0];
    d.values.iter().all(|&v| v == first).then(|| FitResult {
        model: Model::Exponential,
        alpha: 1.0,
        lambda: 0.0,
        c: first,
        rmse: 0.0,
        t0: d.times[0],
        degenerate: true,
    })
}

fn problem(d: &TimeSeries) -> Problem<'_> {
    let tau = d.elapsed();
    let span = tau[tau.len() - 1];
    Problem {
        tau,
        y: &d.values,
        span,
    }
}

/// Least-squares `C e^{lambda (t - t0)}`.
pub fn fit_exponential(d: &TimeSeries) -> Result<FitResult> {
    d.validate()?;
    if let Some(r) = degenerate(d) {
        return Ok(r);
    }
    let p = problem(d);
    // log-linear start, in units of the span
    let x: Vec<f64> = p.tau.iter().map(|t| t / p.span).collect();
    let ly: Vec<f64> = d.values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let z0 = sxy / sxx;
    let mut w = 0.5 * z0.abs().max(1.0);
    let f = |z: f64| p.rmse(1.0, z);
    let (mut z, mut r) = golden(f, z0 - w, z0 + w, 200);
    // widen until the optimum is interior
    for _ in 0..20 {
        if (z - z0).abs() < 0.99 * w {
            break;
        }
        w *= 4.0;
        (z, r) = golden(f, z0 - w, z0 + w, 200);
    }
    if f(z0) < r {
        z = z0;
    }
    let res = p.result(Model::Exponential, 1.0, z, d.times[0]);
    if !res.rmse.is_finite() {
        return Err(Error::OptimizerFailure {
            reason: "no finite exponential fit".into(),
            best_rmse: res.rmse,
        });
    }
    Ok(res)
}

/// Orders scanned before local refinement.
pub fn alpha_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

/// Least-squares `C E_a(lambda (t - t0)^a)` over `0 < a <= 1`.
pub fn fit_fractional(d: &TimeSeries) -> Result<FitResult> {
    d.validate()?;
    if let Some(mut r) = degenerate(d) {
        r.model = Model::Fractional;
        return Ok(r);
    }
    let p = problem(d);
    let exp = fit_exponential(d)?;

    let scans: Vec<(f64, f64, f64)> = alpha_grid()
        .into_par_iter()
        .map(|a| {
            let (z, r) = best_rate(&p, a);
            (a, z, r)
        })
        .collect();
    let &(a0, z0, r0) = scans
        .iter()
        .min_by(|x, y| x.2.total_cmp(&y.2).then(x.0.total_cmp(&y.0)))
        .expect("grid is nonempty");
    if !r0.is_finite() {
        return Err(Error::OptimizerFailure {
            reason: "no finite candidate on the order grid".into(),
            best_rmse: exp.rmse,
        });
    }
    let (a1, z1, _) = polish(&p, (a0, z0));

    // The exponential optimum itself, so nesting holds to the last bit.
    let candidates = [
        p.result(Model::Fractional, a1, z1, d.times[0]),
        p.result(Model::Fractional, a0, z0, d.times[0]),
        FitResult {
            model: Model::Fractional,
            ..exp
        },
    ];
    let best = candidates
        .iter()
        .filter(|c| c.rmse.is_finite())
        .min_by(|x, y| x.rmse.total_cmp(&y.rmse).then(x.alpha.total_cmp(&y.alpha)))
        .copied()
        .ok_or(Error::OptimizerFailure {
            reason: "refinement produced no finite fit".into(),
            best_rmse: r0,
        })?;
    Ok(best)
}
