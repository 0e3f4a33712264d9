//! Fractional relaxation `D^a u = lambda u` for `t > 0` with a prescribed
//! history `u = C` on `(-inf, 0]`.
//!
//! For constant history the solution is `C E_a(lambda t^a)`. For general
//! history the equation is marched on a uniform grid. With `v = u - u(0)`
//! on `t > 0`, the memory integral over `[0, t_m]` is discretised by product
//! integration of the piecewise-linear interpolant of `v`, the part over
//! `(-inf, 0]` splits into an exact `v_m t_m^{-a}/a` term and a history
//! forcing evaluated by quadrature. One starting-weight correction, exact
//! for `t^a`, removes the leading error from the `t^a` singularity of the
//! solution at the origin. Each step is a scalar linear solve.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_order, check_positive, Error, Result};
use crate::frac_ops::{self, HistoryFunction, Operand, Past, QuadratureSpec};
use crate::special_fn::{gamma_unchecked, ml1};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationProblem {
    pub alpha: f64,
    pub lambda: f64,
    /// Only values on `(-inf, 0]` are used.
    pub history: HistoryFunction,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    check_positive("t_end", t_end)?;
    check_positive("dt", dt)?;
    if dt >= t_end {
        return Err(Error::param("dt", "must be smaller than t_end"));
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() > 1e-9 * t_end {
        return Err(Error::param("dt", "t_end must be a whole number of steps"));
    }
    if n > 1e7 {
        return Err(Error::param("dt", "more than 1e7 steps requested"));
    }
    Ok(n as usize)
}

/// Samples `c E_{a,1}(lambda t^a)` on `0, dt, ..., t_end`. `alpha = 1` gives
/// the exponential.
pub fn solve_constant_history(
    alpha: f64,
    lambda: f64,
    c: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    check_finite("lambda", lambda)?;
    check_finite("c", c)?;
    let n = step_count(t_end, dt)?;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let values = times
        .iter()
        .map(|&t| {
            if alpha == 1.0 {
                Ok(c * (lambda * t).exp())
            } else {
                ml1(alpha, lambda * t.powf(alpha)).map(|e| c * e)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times, values })
}

/// Largest admissible `|lambda| dt^a`; beyond it the implicit diagonal can
/// vanish for growing solutions.
pub fn stability_bound(alpha: f64) -> f64 {
    0.5 / gamma_unchecked(2.0 - alpha)
}

// The history frozen at its value at 0 for positive times. Its Marchaud
// derivative at t > 0 is exactly the forcing of the past on the present.
struct FrozenHistory<'a> {
    h: &'a HistoryFunction,
    u0: f64,
}

impl Operand for FrozenHistory<'_> {
    fn value(&self, tau: f64) -> Result<f64> {
        if tau >= 0.0 {
            Ok(self.u0)
        } else {
            self.h.value(tau)
        }
    }

    fn left_slope(&self, tau: f64) -> Result<f64> {
        if tau > 0.0 {
            Ok(0.0)
        } else {
            self.h.left_slope(tau)
        }
    }

    fn past(&self) -> Past {
        self.h.past()
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b = self.h.breakpoints(lo, hi.min(0.0));
        if lo < 0.0 && hi > 0.0 && b.last() != Some(&0.0) {
            b.push(0.0);
        }
        b
    }
}

fn history_is_constant(h: &HistoryFunction, u0: f64) -> bool {
    match h {
        HistoryFunction::Constant { .. }
        | HistoryFunction::PowerPlus { .. }
        | HistoryFunction::ModifiedPower { .. }
        | HistoryFunction::MittagLefflerPower { .. } => true,
        HistoryFunction::Exponential { .. } => false,
        HistoryFunction::GridSampled {
            t0,
            dt,
            values,
            tail,
        } => {
            let tail_ok = match *tail {
                frac_ops::TailModel::ConstantBefore { c, .. } => c == u0,
                frac_ops::TailModel::ZeroBefore { .. } => u0 == 0.0,
                frac_ops::TailModel::PowerDecay { .. } => false,
            };
            // samples past 0 are ignored
            let past_samples_ok = values
                .iter()
                .enumerate()
                .all(|(i, &v)| v == u0 || *t0 + i as f64 * *dt > 0.0);
            tail_ok && past_samples_ok
        }
    }
}

// Product-integration weights for the piecewise-linear memory integral,
// in units of dt^{-a}: cell j covers s in [j, j+1] (grid units).
struct Weights {
    a0: Vec<f64>,
    b: Vec<f64>,
}

impl Weights {
    fn new(alpha: f64, m: usize) -> Self {
        let mut a0 = Vec::with_capacity(m + 1);
        let mut b = Vec::with_capacity(m + 1);
        a0.push(0.0);
        b.push(0.0);
        for j in 1..=m {
            let jf = j as f64;
            let a = (jf.powf(-alpha) - (jf + 1.0).powf(-alpha)) / alpha;
            let a1 = ((jf + 1.0).powf(1.0 - alpha) - jf.powf(1.0 - alpha)) / (1.0 - alpha);
            a0.push(a);
            b.push(a1 - jf * a);
        }
        Weights { a0, b }
    }

    // Discrete memory integral at node m for values v (v[0] = 0), scaled by
    // dt^a, including the zero-past tail.
    fn apply(&self, alpha: f64, v: &[f64], m: usize) -> f64 {
        let mut s = (v[m] - v[m - 1]) / (1.0 - alpha);
        for j in 1..m {
            s += (v[m] - v[m - j]) * self.a0[j] - (v[m - j - 1] - v[m - j]) * self.b[j];
        }
        s + v[m] * (m as f64).powf(-alpha) / alpha
    }
}

/// Marches the history problem on `0, dt, ..., t_end`.
pub fn solve_marching(p: &RelaxationProblem) -> Result<Trajectory> {
    let alpha = p.alpha;
    check_order(alpha)?;
    check_finite("lambda", p.lambda)?;
    let n = step_count(p.t_end, p.dt)?;
    p.history.validate()?;
    HistoryFunction::check_tail_order(p.history.past(), alpha)?;
    if p.lambda.abs() * p.dt.powf(alpha) > stability_bound(alpha) {
        return Err(Error::Unstable(format!(
            "|lambda| dt^alpha = {} exceeds {}",
            p.lambda.abs() * p.dt.powf(alpha),
            stability_bound(alpha)
        )));
    }
    let u0 = p.history.value(0.0)?;
    let h = p.dt;
    let ha = h.powf(alpha);
    let c_alpha = frac_ops::marchaud_constant(alpha);
    let w = Weights::new(alpha, n);

    // Starting weight: exact for (t_+)^a, whose scaled grid values are j^a.
    let f: Vec<f64> = (0..=n).map(|j| (j as f64).powf(alpha)).collect();
    let exact = gamma_unchecked(1.0 + alpha) / c_alpha;
    let diag = 1.0 / (1.0 - alpha) + 1.0 / alpha;

    let constant_past = history_is_constant(&p.history, u0);
    let frozen = FrozenHistory { h: &p.history, u0 };

    let mut v = vec![0.0; n + 1];
    for m in 1..=n {
        let t_m = m as f64 * h;
        let forcing = if constant_past {
            0.0
        } else {
            frac_ops::marchaud_derivative_of(&frozen, alpha, t_m, &QuadratureSpec::for_point(t_m))?
                .value
        };
        let corr = exact - w.apply(alpha, &f, m);
        // Known part of the memory sum: evaluate with v_m = 0.
        let known = w.apply(alpha, &v, m);
        let mut coeff = diag;
        let mut rhs = p.lambda * u0 - forcing - c_alpha / ha * known;
        if m == 1 {
            coeff += corr;
        } else {
            rhs -= c_alpha / ha * corr * v[1];
        }
        let denom = c_alpha / ha * coeff - p.lambda;
        if denom <= 0.0 || !denom.is_finite() {
            return Err(Error::Unstable(format!("step {m}: singular implicit equation")));
        }
        v[m] = rhs / denom;
    }
    Ok(Trajectory {
        times: (0..=n).map(|i| i as f64 * h).collect(),
        values: v.into_iter().map(|x| x + u0).collect(),
    })
}
