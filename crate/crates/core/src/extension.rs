//! Local extension of the left-sided fractional derivative.
//!
//! `U(t, y)` solves `U_t = y^{2a-1} (y^{1-2a} U_y)_y` for `y > 0` with
//! `U(t, 0) = u(t)`, and the weighted flux `-y^{1-2a} U_y` at `y = 0` is
//! `d_a D^a u(t)` for one constant `d_a` independent of `u`.
//!
//! In `y` the equation is discretised by finite volumes on a graded mesh.
//! Between neighbouring nodes the flux `y^{1-2a} U_y` is taken constant, which
//! makes the conductance `2a / (y_{j+1}^{2a} - y_j^{2a})` exact for the
//! singular weight. In `t` it is marched by implicit Euler, upwind in the
//! direction of the left-sided derivative. The tridiagonal matrix does not
//! change between steps and is factored once.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_order, check_positive, Error, Result};
use crate::frac_ops::{self, HistoryFunction, Operand, Past, QuadratureSpec};

/// Largest number of stored values `rows * n_y`.
pub const STORAGE_CAP: usize = 50_000_000;

/// Discretisation of the strip `[t_lo, t_hi] x [y_min, y_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub dt: f64,
    /// Store every `out_every`-th time step of the window.
    pub out_every: usize,
    /// Chosen from the operand when absent.
    pub y_max: Option<f64>,
    pub n_y: usize,
    /// `y_j = Y (j / n_y)^grading`
    pub grading: f64,
}

impl ExtensionSpec {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        ExtensionSpec {
            t_lo,
            t_hi,
            dt: 1e-3,
            out_every: 100,
            y_max: None,
            n_y: 400,
            grading: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("t_lo", self.t_lo)?;
        check_finite("t_hi", self.t_hi)?;
        check_positive("dt", self.dt)?;
        if self.t_hi <= self.t_lo {
            return Err(Error::param("t_hi", "must exceed t_lo"));
        }
        if let Some(y) = self.y_max {
            check_positive("y_max", y)?;
        }
        if self.n_y < 8 {
            return Err(Error::param("n_y", "need at least 8 levels"));
        }
        if !(self.grading >= 2.0 && self.grading <= 8.0) {
            return Err(Error::param("grading", "must lie in [2, 8]"));
        }
        if self.out_every == 0 {
            return Err(Error::param("out_every", "must be positive"));
        }
        let steps = self.window_steps()?;
        if steps % self.out_every != 0 {
            return Err(Error::param(
                "out_every",
                "must divide the number of steps in the window",
            ));
        }
        Ok(())
    }

    fn window_steps(&self) -> Result<usize> {
        let n = ((self.t_hi - self.t_lo) / self.dt).round();
        if (n * self.dt - (self.t_hi - self.t_lo)).abs() > 1e-9 * (self.t_hi - self.t_lo) {
            return Err(Error::param("dt", "window must be a whole number of steps"));
        }
        if n > 1e8 {
            return Err(Error::param("dt", "more than 1e8 steps requested"));
        }
        Ok(n as usize)
    }
}

/// Solved strip. Row `i` of `u` holds `U(t_grid[i], y_grid[..])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionGrid {
    pub alpha: f64,
    pub t_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// The operand, kept for the oracle in [`weighted_trace`].
    pub operand: HistoryFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceResult {
    pub t_points: Vec<f64>,
    pub trace: Vec<f64>,
    /// `D^a u` at `t_points`.
    pub oracle: Vec<f64>,
    /// Least-squares ratio of trace to oracle; `None` when the oracle vanishes.
    pub d_alpha_est: Option<f64>,
}

// How the strip is entered: time to start marching, the state there and
// the value held at the far edge.
struct Inflow {
    start: f64,
    initial: f64,
    far: f64,
}

fn inflow(u: &HistoryFunction, spec: &ExtensionSpec) -> Result<Inflow> {
    match u.past() {
        Past::Constant { from, value } => Ok(Inflow {
            start: from.min(spec.t_lo),
            initial: value,
            far: value,
        }),
        Past::Exponential { rate, .. } => Ok(Inflow {
            start: spec.t_lo - 30.0 / rate,
            initial: 0.0,
            far: 0.0,
        }),
        Past::PowerDecay { .. } => Err(Error::Unsupported(
            "no inflow rule for a power-decay past".into(),
        )),
    }
}

fn default_y_max(u: &HistoryFunction, spec: &ExtensionSpec, start: f64) -> f64 {
    match u.past() {
        // exp(-sqrt(rate) y) < 1e-8
        Past::Exponential { rate, .. } => 18.5 / rate.sqrt(),
        // exp(-y^2 / 4 t) < 1e-8 over the marched interval
        _ => 8.6 * (spec.t_hi - start).max(1.0).sqrt(),
    }
}

struct Mesh {
    y: Vec<f64>,
    mass: Vec<f64>,
    cond: Vec<f64>,
}

impl Mesh {
    fn new(alpha: f64, y_max: f64, n: usize, grading: f64) -> Self {
        let y: Vec<f64> = (1..=n)
            .map(|j| y_max * (j as f64 / n as f64).powf(grading))
            .collect();
        let p = 2.0 * alpha;
        let cond = y
            .windows(2)
            .map(|w| p / (w[1].powf(p) - w[0].powf(p)))
            .collect();
        let q = 2.0 - 2.0 * alpha;
        let mut mass = vec![0.0; n];
        for j in 1..n - 1 {
            let a = 0.5 * (y[j - 1] + y[j]);
            let b = 0.5 * (y[j] + y[j + 1]);
            mass[j] = (b.powf(q) - a.powf(q)) / q;
        }
        Mesh { y, mass, cond }
    }
}

// LU factors of the constant implicit matrix on the interior nodes.
struct Factored {
    lower: Vec<f64>,
    pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Factored {
    fn new(m: &Mesh, dt: f64) -> Self {
        let n = m.y.len();
        let k = n - 2;
        let mut lower = vec![0.0; k];
        let mut pivot = vec![0.0; k];
        let mut upper = vec![0.0; k];
        for i in 0..k {
            let j = i + 1;
            let diag = m.mass[j] / dt + m.cond[j - 1] + m.cond[j];
            upper[i] = -m.cond[j];
            if i == 0 {
                pivot[i] = diag;
            } else {
                lower[i] = -m.cond[j - 1] / pivot[i - 1];
                pivot[i] = diag - lower[i] * upper[i - 1];
            }
        }
        Factored {
            lower,
            pivot,
            upper,
        }
    }

    // Advances `row` one step with boundary values `left` and `right`.
    fn step(&self, m: &Mesh, dt: f64, row: &mut [f64], left: f64, right: f64, work: &mut [f64]) {
        let n = row.len();
        let k = n - 2;
        for (i, w) in work[..k].iter_mut().enumerate() {
            *w = m.mass[i + 1] / dt * row[i + 1];
        }
        work[0] += m.cond[0] * left;
        work[k - 1] += m.cond[n - 2] * right;
        for i in 1..k {
            work[i] -= self.lower[i] * work[i - 1];
        }
        work[k - 1] /= self.pivot[k - 1];
        for i in (0..k - 1).rev() {
            work[i] = (work[i] - self.upper[i] * work[i + 1]) / self.pivot[i];
        }
        row[0] = left;
        row[n - 1] = right;
        row[1..n - 1].copy_from_slice(&work[..k]);
    }
}

/// Solves the extension problem for `u` on the strip described by `spec`.
pub fn solve_extension(
    u: &HistoryFunction,
    alpha: f64,
    spec: &ExtensionSpec,
) -> Result<ExtensionGrid> {
    check_order(alpha)?;
    spec.validate()?;
    u.validate()?;
    HistoryFunction::check_tail_order(u.past(), alpha)?;
    let inflow = inflow(u, spec)?;
    let y_max = spec
        .y_max
        .unwrap_or_else(|| default_y_max(u, spec, inflow.start));

    let window = spec.window_steps()?;
    let rows = window / spec.out_every + 1;
    let requested = rows.saturating_mul(spec.n_y);
    if requested > STORAGE_CAP {
        return Err(Error::MemoryBudget {
            requested: requested as u64 * 8,
            cap: STORAGE_CAP as u64 * 8,
        });
    }
    let lead = ((spec.t_lo - inflow.start) / spec.dt).ceil().max(0.0) as usize;
    let t0 = spec.t_lo - lead as f64 * spec.dt;

    let mesh = Mesh::new(alpha, y_max, spec.n_y, spec.grading);
    let lu = Factored::new(&mesh, spec.dt);
    // March the deviation from the far-field value so constants stay exact.
    let mut row = vec![inflow.initial - inflow.far; spec.n_y];
    let shift = |r: &[f64]| r.iter().map(|v| v + inflow.far).collect::<Vec<_>>();
    let mut work = vec![0.0; spec.n_y];
    let mut t_grid = Vec::with_capacity(rows);
    let mut stored = Vec::with_capacity(rows);
    if lead == 0 {
        row[0] = u.value(t0)? - inflow.far;
        t_grid.push(t0);
        stored.push(shift(&row));
    }
    for m in 1..=lead + window {
        let t = t0 + m as f64 * spec.dt;
        let left = u.value(t)? - inflow.far;
        lu.step(&mesh, spec.dt, &mut row, left, 0.0, &mut work);
        if m >= lead && (m - lead).is_multiple_of(spec.out_every) {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Unstable(format!("non-finite state at t = {t}")));
            }
            t_grid.push(spec.t_lo + (m - lead) as f64 * spec.dt);
            stored.push(shift(&row));
        }
    }
    Ok(ExtensionGrid {
        alpha,
        t_grid,
        y_grid: mesh.y,
        u: stored,
        operand: u.clone(),
    })
}

// Flux -y^{1-2a} U_y on the three smallest cells, extrapolated to y = 0
// with the model F0 - c y^{2-2a}. The pairs (0,1) and (1,2) give two
// estimates of F0.
fn extrapolate(alpha: f64, y: &[f64], row: &[f64], floor: f64) -> Result<f64> {
    let p = 2.0 * alpha;
    let mut f = [0.0; 3];
    let mut s = [0.0; 3];
    for k in 0..3 {
        let dp = y[k + 1].powf(p) - y[k].powf(p);
        f[k] = p * (row[k] - row[k + 1]) / dp;
        s[k] = alpha * (y[k + 1] * y[k + 1] - y[k] * y[k]) / dp;
    }
    let pair = |a: usize, b: usize| (f[a] * s[b] - f[b] * s[a]) / (s[b] - s[a]);
    let (e01, e12) = (pair(0, 1), pair(1, 2));
    let scale = e01.abs().max(e12.abs());
    if scale > floor && (e01 - e12).abs() > 0.1 * scale {
        return Err(Error::Extrapolation(format!(
            "level estimates {e01} and {e12} disagree"
        )));
    }
    Ok(e01)
}

/// Weighted Neumann trace of a solved strip, with the Marchaud derivative of
/// the operand at the same times and the fitted constant.
pub fn weighted_trace(g: &ExtensionGrid) -> Result<TraceResult> {
    let alpha = g.alpha;
    let scale = g
        .u
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = 1e-10 * scale.max(1e-300);
    let mut trace = Vec::with_capacity(g.t_grid.len());
    let mut oracle = Vec::with_capacity(g.t_grid.len());
    for (&t, row) in g.t_grid.iter().zip(&g.u) {
        let v = extrapolate(alpha, &g.y_grid, row, floor)?;
        if !v.is_finite() {
            return Err(Error::Extrapolation(format!("non-finite trace at t = {t}")));
        }
        trace.push(v);
        let d = frac_ops::marchaud_derivative_of(
            &g.operand,
            alpha,
            t,
            &QuadratureSpec::for_point(t),
        )?;
        oracle.push(d.value);
    }
    let den: f64 = oracle.iter().map(|o| o * o).sum();
    let num: f64 = oracle.iter().zip(&trace).map(|(o, v)| o * v).sum();
    let d_alpha_est = if den > 0.0 { Some(num / den) } else { None };
    Ok(TraceResult {
        t_points: g.t_grid.clone(),
        trace,
        oracle,
        d_alpha_est,
    })
}
