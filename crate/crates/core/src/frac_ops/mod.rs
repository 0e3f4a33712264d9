//! Left- and right-sided fractional derivatives and integrals of order
//! `0 < alpha < 1`, evaluated pointwise by quadrature.
//!
//! The left derivative is the Marchaud form
//!
//! ```text
//! D^a u(t) = a / Gamma(1 - a) * int_0^inf (u(t) - u(t - s)) s^{-1-a} ds
//! ```
//!
//! and the left integral is `D^{-a} u(t) = 1/Gamma(a) int_0^inf u(t - s) s^{a-1} ds`.
//! The prefactor `a / Gamma(1 - a) = -1 / Gamma(-a)` is positive, so that
//! `D^a e^{lt} = l^a e^{lt}` and the power rule come out with positive signs.
//!
//! Each integral is split in three: `[0, eps]` is closed with a first-order
//! Taylor expansion of `u` at `t`, `[eps, S]` is integrated adaptively on
//! geometrically growing pieces (plus the operand's kinks), and `[S, inf)`
//! is closed analytically from the operand's [`Past`] model.

mod history;

pub use history::{HistoryFunction, Mirrored, Operand, Past, TailModel};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_order, Error, Result};
use crate::quad::{self, Integral};
use crate::special_fn::gamma_unchecked;

/// Controls for the singular-integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Split point below which the integrand is Taylor-expanded.
    pub eps: f64,
    /// Truncation distance for operands without an exact tail closure.
    pub horizon: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Panel budget per integration piece.
    pub max_subdiv: usize,
}

impl QuadratureSpec {
    /// Defaults scaled to `|t| + 1`.
    pub fn for_point(t: f64) -> Self {
        let scale = t.abs() + 1.0;
        QuadratureSpec {
            eps: 1e-6 * scale,
            horizon: 1e4 * scale,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdiv: 60,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::check_positive;
        check_positive("eps", self.eps)?;
        check_positive("horizon", self.horizon)?;
        check_positive("rel_tol", self.rel_tol)?;
        check_positive("abs_tol", self.abs_tol)?;
        if self.eps >= self.horizon {
            return Err(Error::param("eps", "must be smaller than horizon"));
        }
        if self.max_subdiv == 0 {
            return Err(Error::param("max_subdiv", "must be at least 1"));
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::for_point(0.0)
    }
}

/// Order `n + alpha` with `n` classical derivatives applied first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    pub n: u32,
    pub alpha: f64,
}

impl FracOrder {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        Ok(FracOrder { n, alpha })
    }

    pub fn total(&self) -> f64 {
        self.n as f64 + self.alpha
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitDirection {
    ToZero,
    ToOne,
}

impl LimitDirection {
    pub fn orders(self) -> [f64; 3] {
        match self {
            LimitDirection::ToZero => [0.1, 0.01, 0.001],
            LimitDirection::ToOne => [0.9, 0.99, 0.999],
        }
    }
}

/// `a / Gamma(1 - a)`, the positive Marchaud prefactor.
pub fn marchaud_constant(alpha: f64) -> f64 {
    alpha / gamma_unchecked(1.0 - alpha)
}

// Pieces for [eps, s_max] in the memory variable s = t - tau.
fn memory_points<O: Operand + ?Sized>(u: &O, t: f64, eps: f64, s_max: f64) -> Vec<f64> {
    let mut pts = vec![eps];
    let mut s = eps * 4.0;
    while s < s_max {
        pts.push(s);
        s *= 4.0;
    }
    pts.push(s_max);
    pts.extend(
        u.breakpoints(t - s_max, t - eps)
            .into_iter()
            .map(|tau| t - tau)
            .filter(|&s| s > eps && s < s_max),
    );
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

// Largest usable Taylor split: never straddle a kink of the operand.
fn split_point<O: Operand + ?Sized>(u: &O, t: f64, eps: f64, s_max: f64) -> f64 {
    let mut e = eps.min(0.25 * s_max);
    let lo = t - e.max(1e-300) * 2.0;
    if let Some(&kink) = u.breakpoints(lo, t).last() {
        e = e.min(t - kink);
    }
    e
}

fn integrate_memory<F: Fn(f64) -> f64>(f: F, pts: &[f64], q: &QuadratureSpec) -> Result<Integral> {
    let r = quad::integrate_pieces(&f, pts, q.abs_tol, q.rel_tol, q.max_subdiv);
    if r.value.is_nan() {
        return Err(Error::QuadratureNonConvergence {
            value: r.value,
            error: r.error,
        });
    }
    Ok(r)
}

fn accept(total: f64, err: f64, converged: bool, q: &QuadratureSpec) -> Result<Evaluation> {
    if !converged && err > q.rel_tol.sqrt() * total.abs() + q.abs_tol.sqrt() {
        return Err(Error::QuadratureNonConvergence {
            value: total,
            error: err,
        });
    }
    Ok(Evaluation {
        value: total,
        est_error: err,
    })
}

/// Marchaud derivative of any [`Operand`].
pub fn marchaud_derivative_of<O: Operand + ?Sized>(
    u: &O,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    check_order(alpha)?;
    check_finite("t", t)?;
    q.validate()?;
    u.validate()?;
    let past = u.past();
    HistoryFunction::check_tail_order(past, alpha)?;
    let ut = u.value(t)?;
    let c_alpha = marchaud_constant(alpha);

    let (s_max, tail) = match past {
        Past::Constant { from, value } => {
            if t < from || (t == from && ut == value) {
                return Ok(Evaluation {
                    value: 0.0,
                    est_error: 0.0,
                });
            }
            if t == from {
                return Err(Error::Unsupported(format!(
                    "derivative at the jump t = {t} is infinite"
                )));
            }
            let s = t - from;
            (s, (ut - value) * s.powf(-alpha) / alpha)
        }
        Past::PowerDecay { from, c, p } => {
            if t <= from {
                return Err(Error::Unsupported(
                    "evaluation point inside the power-decay tail".into(),
                ));
            }
            let s = t - from;
            let j = quad::integrate(
                |w: f64| w.powf(p + alpha - 1.0) * (s - t * w).powf(-p),
                0.0,
                1.0,
                q.abs_tol,
                q.rel_tol,
                q.max_subdiv,
            );
            (s, ut * s.powf(-alpha) / alpha - c * s.powf(-alpha) * j.value)
        }
        Past::Exponential { rate, .. } => {
            let a = q.horizon.min(60.0 / rate).max(4.0 * q.eps);
            // int_a^inf (u(t) - u(t-s)) s^{-1-a} ds with u(t-s) = u(t) e^{-rate s};
            // the second part is the leading term of an incomplete Gamma.
            let decay = (-rate * a).exp() * a.powf(-1.0 - alpha) / rate
                * (1.0 - (1.0 + alpha) / (rate * a));
            (a, ut * (a.powf(-alpha) / alpha - decay))
        }
    };

    let eps = split_point(u, t, q.eps, s_max);
    let slope = u.left_slope(t)?;
    let near = slope * eps.powf(1.0 - alpha) / (1.0 - alpha);
    let pts = memory_points(u, t, eps, s_max);
    let mid = integrate_memory(
        |s: f64| (ut - u.value(t - s).unwrap_or(f64::NAN)) * s.powf(-1.0 - alpha),
        &pts,
        q,
    )?;
    let total = c_alpha * (near + mid.value + tail);
    accept(total, c_alpha * mid.error, mid.converged, q)
}

/// Left-sided (Marchaud-Weyl) fractional derivative `D^alpha u(t)`.
pub fn marchaud_derivative(
    u: &HistoryFunction,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    marchaud_derivative_of(u, alpha, t, q)
}

/// Weyl fractional integral of any [`Operand`].
pub fn weyl_integral_of<O: Operand + ?Sized>(
    u: &O,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    check_order(alpha)?;
    check_finite("t", t)?;
    q.validate()?;
    u.validate()?;
    let past = u.past();
    HistoryFunction::check_tail_order(past, alpha)?;
    let inv_gamma = 1.0 / gamma_unchecked(alpha);

    let (s_max, tail) = match past {
        Past::Constant { from, value } => {
            if value != 0.0 {
                return Err(Error::DivergentTail(format!(
                    "constant past value {value} makes the fractional integral diverge"
                )));
            }
            if t <= from {
                return Ok(Evaluation {
                    value: 0.0,
                    est_error: 0.0,
                });
            }
            (t - from, 0.0)
        }
        Past::PowerDecay { from, c, p } => {
            if t <= from {
                return Err(Error::Unsupported(
                    "evaluation point inside the power-decay tail".into(),
                ));
            }
            let s = t - from;
            let j = quad::integrate(
                |w: f64| w.powf(p - 1.0 - alpha) * (s - t * w).powf(-p),
                0.0,
                1.0,
                q.abs_tol,
                q.rel_tol,
                q.max_subdiv,
            );
            (s, c * s.powf(alpha) * j.value)
        }
        Past::Exponential { rate, scale } => {
            let a = q.horizon.min(60.0 / rate).max(4.0 * q.eps);
            let tail = scale * (rate * (t - a)).exp() * a.powf(alpha - 1.0) / rate;
            (a, tail)
        }
    };

    let ut = u.value(t)?;
    let eps = split_point(u, t, q.eps, s_max);
    let slope = u.left_slope(t)?;
    let near = ut * eps.powf(alpha) / alpha - slope * eps.powf(1.0 + alpha) / (1.0 + alpha);
    let pts = memory_points(u, t, eps, s_max);
    let mid = integrate_memory(
        |s: f64| u.value(t - s).unwrap_or(f64::NAN) * s.powf(alpha - 1.0),
        &pts,
        q,
    )?;
    let total = inv_gamma * (near + mid.value + tail);
    accept(total, inv_gamma * mid.error, mid.converged, q)
}

/// Left-sided Weyl fractional integral `D^{-alpha} u(t)`.
pub fn weyl_integral(
    u: &HistoryFunction,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    weyl_integral_of(u, alpha, t, q)
}

/// Right-sided derivative of `phi(t) = u.0(-t)`: it looks only at `phi` on `[t, inf)`.
pub fn right_derivative(
    u: &Mirrored,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    marchaud_derivative(&u.0, alpha, -t, q)
}

/// `n`-th classical derivative, returned as `factor * operand`.
pub fn classical_derivative(u: &HistoryFunction, n: u32) -> Result<(f64, HistoryFunction)> {
    if n == 0 {
        return Ok((1.0, u.clone()));
    }
    let falling = |beta: f64| (0..n).fold(1.0, |acc, k| acc * (beta - k as f64));
    match u {
        HistoryFunction::Constant { .. } => Ok((1.0, HistoryFunction::Constant { c: 0.0 })),
        HistoryFunction::PowerPlus { beta } | HistoryFunction::ModifiedPower { beta } => {
            let reduced = beta - n as f64;
            if reduced <= 0.0 {
                return Err(Error::Unsupported(format!(
                    "derivative {n} of a power with exponent {beta} is not a positive power"
                )));
            }
            Ok((falling(*beta), HistoryFunction::PowerPlus { beta: reduced }))
        }
        HistoryFunction::Exponential { lambda } => Ok((
            lambda.powi(n as i32),
            HistoryFunction::Exponential { lambda: *lambda },
        )),
        HistoryFunction::MittagLefflerPower { .. } => Err(Error::Unsupported(
            "classical derivatives of Mittag-Leffler operands".into(),
        )),
        HistoryFunction::GridSampled {
            t0,
            dt,
            values,
            tail,
        } => {
            if values.len() < 3 {
                return Err(Error::param("values", "need three samples to differentiate"));
            }
            let mut vals = values.clone();
            let mut tl = tail.clone();
            for _ in 0..n {
                vals = central_difference(&vals, *dt);
                tl = match tl {
                    TailModel::ZeroBefore { t_start } | TailModel::ConstantBefore { t_start, .. } => {
                        TailModel::ZeroBefore { t_start }
                    }
                    TailModel::PowerDecay { c, p, t_start } => TailModel::PowerDecay {
                        c: c * p,
                        p: p + 1.0,
                        t_start,
                    },
                };
            }
            Ok((
                1.0,
                HistoryFunction::GridSampled {
                    t0: *t0,
                    dt: *dt,
                    values: vals,
                    tail: tl,
                },
            ))
        }
    }
}

fn central_difference(v: &[f64], dt: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| match i {
            0 => (v[1] - v[0]) / dt,
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / dt,
            _ => (v[i + 1] - v[i - 1]) / (2.0 * dt),
        })
        .collect()
}

/// `D^{n + alpha} u(t) = D^alpha (d^n u / dt^n)(t)`.
pub fn composite_derivative(
    u: &HistoryFunction,
    ord: FracOrder,
    t: f64,
    q: &QuadratureSpec,
) -> Result<Evaluation> {
    check_order(ord.alpha)?;
    let (factor, du) = classical_derivative(u, ord.n)?;
    let e = marchaud_derivative(&du, ord.alpha, t, q)?;
    Ok(Evaluation {
        value: factor * e.value,
        est_error: factor.abs() * e.est_error,
    })
}

/// Numerical `D^alpha (D^{-alpha} u)(t)`; returns `(roundtrip, u(t))`.
///
/// The fractional integral is sampled on a uniform grid ending at `t`, and
/// the derivative is taken of that piecewise-linear capture. The grid step
/// is `rel_tol^(1/3) * (|t| + 1)`.
pub fn ftfc_roundtrip(
    u: &HistoryFunction,
    alpha: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_order(alpha)?;
    u.validate()?;
    let ut = u.value(t)?;
    let (left, tail_kind) = match u.past() {
        Past::Constant { from, value } => {
            if value != 0.0 {
                return Err(Error::DivergentTail(
                    "fractional integral of a non-decaying past".into(),
                ));
            }
            if from >= t {
                return Ok((0.0, ut));
            }
            (from, None)
        }
        Past::Exponential { rate, .. } => (t - 36.0 / rate, None),
        Past::PowerDecay { from, p, .. } => {
            if p - alpha <= alpha {
                return Err(Error::Unsupported(
                    "tail too heavy for a roundtrip through the fractional integral".into(),
                ));
            }
            (from, Some(p - alpha))
        }
    };
    let scale = t.abs() + 1.0;
    let target = q.rel_tol.cbrt() * scale;
    let n = (((t - left) / target).ceil() as usize).clamp(64, 400_000);
    let h = (t - left) / n as f64;
    let wq = QuadratureSpec {
        eps: q.eps.min(0.25 * h),
        ..*q
    };
    let samples: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let tau = left + i as f64 * h;
            weyl_integral(u, alpha, tau, &QuadratureSpec { ..wq }).map(|e| e.value)
        })
        .collect::<Result<_>>()?;
    let tail = match tail_kind {
        None => TailModel::ZeroBefore { t_start: left },
        Some(decay) => TailModel::PowerDecay {
            c: samples[0] * (-left).powf(decay),
            p: decay,
            t_start: left,
        },
    };
    let captured = HistoryFunction::GridSampled {
        t0: left,
        dt: h,
        values: samples,
        tail,
    };
    let d = marchaud_derivative(&captured, alpha, t, &wq)?;
    Ok((d.value, ut))
}

/// `D^alpha u(t)` along a sequence of orders approaching 0 or 1.
pub fn consistency_limit_probe(
    u: &HistoryFunction,
    t: f64,
    direction: LimitDirection,
    q: &QuadratureSpec,
) -> Result<Vec<(f64, f64)>> {
    direction
        .orders()
        .iter()
        .map(|&a| marchaud_derivative(u, a, t, q).map(|e| (a, e.value)))
        .collect()
}
