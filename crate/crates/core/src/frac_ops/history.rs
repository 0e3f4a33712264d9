use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn;

/// Behaviour of a sampled function to the left of `t_start`.
///
/// Between `t_start` and the first grid sample the function is interpolated
/// linearly from the tail value to the first sample. With `t_start` equal
/// to the grid origin the splice is a jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailModel {
    ZeroBefore { t_start: f64 },
    ConstantBefore { c: f64, t_start: f64 },
    /// `u(tau) = c * (-tau)^(-p)` for `tau <= t_start < 0`.
    PowerDecay { c: f64, p: f64, t_start: f64 },
}

impl TailModel {
    pub fn t_start(&self) -> f64 {
        match *self {
            TailModel::ZeroBefore { t_start }
            | TailModel::ConstantBefore { t_start, .. }
            | TailModel::PowerDecay { t_start, .. } => t_start,
        }
    }

    fn value(&self, tau: f64) -> f64 {
        match *self {
            TailModel::ZeroBefore { .. } => 0.0,
            TailModel::ConstantBefore { c, .. } => c,
            TailModel::PowerDecay { c, p, .. } => c * (-tau).powf(-p),
        }
    }

    fn slope(&self, tau: f64) -> f64 {
        match *self {
            TailModel::PowerDecay { c, p, .. } => c * p * (-tau).powf(-p - 1.0),
            _ => 0.0,
        }
    }

    fn validate(&self, t0: f64) -> Result<()> {
        let ts = self.t_start();
        crate::error::check_finite("t_start", ts)?;
        if ts > t0 {
            return Err(Error::param(
                "t_start",
                format!("tail must start at or before the first sample ({ts} > {t0})"),
            ));
        }
        match *self {
            TailModel::ConstantBefore { c, .. } => crate::error::check_finite("c", c),
            TailModel::PowerDecay { c, p, t_start } => {
                crate::error::check_finite("c", c)?;
                crate::error::check_positive("p", p)?;
                if t_start >= 0.0 {
                    return Err(Error::param("t_start", "power-decay tail needs t_start < 0"));
                }
                Ok(())
            }
            TailModel::ZeroBefore { .. } => Ok(()),
        }
    }
}

/// A real function on `(-inf, T]`: the operand of every fractional operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistoryFunction {
    Constant {
        c: f64,
    },
    /// `(t_+)^beta`
    PowerPlus {
        beta: f64,
    },
    /// `t^beta` for `t > 0`, `1` for `t <= 0`.
    ModifiedPower {
        beta: f64,
    },
    /// `exp(lambda t)`, `lambda > 0`.
    Exponential {
        lambda: f64,
    },
    /// `E_{alpha,1}(lambda (t_+)^alpha)`
    MittagLefflerPower {
        alpha: f64,
        lambda: f64,
    },
    /// Piecewise-linear interpolant of `values` at `t0 + i dt`.
    GridSampled {
        t0: f64,
        dt: f64,
        values: Vec<f64>,
        tail: TailModel,
    },
}

/// What an operand looks like far in the past, used to close the memory
/// integrals analytically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Past {
    /// `u(tau) = value` for `tau < from`.
    Constant { from: f64, value: f64 },
    /// `u(tau) = c (-tau)^(-p)` for `tau <= from < 0`.
    PowerDecay { from: f64, c: f64, p: f64 },
    /// `u(tau) = scale * exp(rate tau)` everywhere.
    Exponential { rate: f64, scale: f64 },
}

/// Anything the Marchaud and Weyl quadratures can be applied to.
pub trait Operand {
    fn value(&self, tau: f64) -> Result<f64>;
    /// Derivative from the left.
    fn left_slope(&self, tau: f64) -> Result<f64>;
    fn past(&self) -> Past;
    /// Points in `(lo, hi)` where the function is not smooth, ascending.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64>;
    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

impl HistoryFunction {
    pub fn box_indicator(a: f64, b: f64, t_end: f64, dt: f64) -> Result<HistoryFunction> {
        if !(a < b && b <= t_end) {
            return Err(Error::param("box", "need a < b <= t_end"));
        }
        crate::error::check_positive("dt", dt)?;
        let n = ((t_end - a) / dt).round() as usize + 1;
        let values = (0..n)
            .map(|i| if a + i as f64 * dt <= b + 1e-9 * dt { 1.0 } else { 0.0 })
            .collect();
        Ok(HistoryFunction::GridSampled {
            t0: a,
            dt,
            values,
            tail: TailModel::ZeroBefore { t_start: a },
        })
    }

    /// Samples `f` on `[t0, t0 + (n-1) dt]`.
    pub fn sample<F: Fn(f64) -> f64>(
        f: F,
        t0: f64,
        dt: f64,
        n: usize,
        tail: TailModel,
    ) -> HistoryFunction {
        let values = (0..n).map(|i| f(t0 + i as f64 * dt)).collect();
        HistoryFunction::GridSampled {
            t0,
            dt,
            values,
            tail,
        }
    }

    fn grid_index(t0: f64, dt: f64, len: usize, tau: f64) -> (usize, f64) {
        let x = (tau - t0) / dt;
        let i = (x.floor().max(0.0) as usize).min(len - 2);
        (i, x - i as f64)
    }

    /// Tail-order precondition for operators of order `alpha`.
    pub(crate) fn check_tail_order(past: Past, alpha: f64) -> Result<()> {
        if let Past::PowerDecay { p, .. } = past {
            if p <= alpha {
                return Err(Error::DivergentTail(format!(
                    "power-decay exponent p = {p} must exceed alpha = {alpha}"
                )));
            }
        }
        Ok(())
    }
}

impl Operand for HistoryFunction {
    fn value(&self, tau: f64) -> Result<f64> {
        Ok(match self {
            HistoryFunction::Constant { c } => *c,
            HistoryFunction::PowerPlus { beta } => {
                if tau > 0.0 {
                    tau.powf(*beta)
                } else {
                    0.0
                }
            }
            HistoryFunction::ModifiedPower { beta } => {
                if tau > 0.0 {
                    tau.powf(*beta)
                } else {
                    1.0
                }
            }
            HistoryFunction::Exponential { lambda } => (lambda * tau).exp(),
            HistoryFunction::MittagLefflerPower { alpha, lambda } => {
                if tau > 0.0 {
                    special_fn::ml1(*alpha, lambda * tau.powf(*alpha))?
                } else {
                    1.0
                }
            }
            HistoryFunction::GridSampled {
                t0,
                dt,
                values,
                tail,
            } => {
                let hi = t0 + dt * (values.len() - 1) as f64;
                if tau > hi + 1e-9 * dt {
                    return Err(Error::OutOfRange {
                        t: tau,
                        lo: *t0,
                        hi,
                    });
                }
                let ts = tail.t_start();
                if tau < ts {
                    tail.value(tau)
                } else if tau < *t0 {
                    let w = (tau - ts) / (t0 - ts);
                    tail.value(ts) * (1.0 - w) + values[0] * w
                } else {
                    let (i, w) = Self::grid_index(*t0, *dt, values.len(), tau);
                    values[i] * (1.0 - w) + values[i + 1] * w
                }
            }
        })
    }

    fn left_slope(&self, tau: f64) -> Result<f64> {
        Ok(match self {
            HistoryFunction::Constant { .. } => 0.0,
            HistoryFunction::PowerPlus { beta } | HistoryFunction::ModifiedPower { beta } => {
                if tau > 0.0 {
                    beta * tau.powf(beta - 1.0)
                } else {
                    0.0
                }
            }
            HistoryFunction::Exponential { lambda } => lambda * (lambda * tau).exp(),
            HistoryFunction::MittagLefflerPower { alpha, lambda } => {
                special_fn::ml_power_derivative(*alpha, *lambda, tau)?
            }
            HistoryFunction::GridSampled {
                t0,
                dt,
                values,
                tail,
            } => {
                let hi = t0 + dt * (values.len() - 1) as f64;
                if tau > hi + 1e-9 * dt {
                    return Err(Error::OutOfRange {
                        t: tau,
                        lo: *t0,
                        hi,
                    });
                }
                let ts = tail.t_start();
                if tau <= ts {
                    tail.slope(tau)
                } else if tau <= *t0 {
                    (values[0] - tail.value(ts)) / (t0 - ts)
                } else {
                    // segment ending at or after tau, so a node counts as its left segment
                    let x = (tau - t0) / dt;
                    let i = ((x.ceil() as usize).max(1) - 1).min(values.len() - 2);
                    (values[i + 1] - values[i]) / dt
                }
            }
        })
    }

    fn past(&self) -> Past {
        match self {
            HistoryFunction::Constant { c } => Past::Constant {
                from: f64::INFINITY,
                value: *c,
            },
            HistoryFunction::PowerPlus { .. } => Past::Constant {
                from: 0.0,
                value: 0.0,
            },
            HistoryFunction::ModifiedPower { .. } | HistoryFunction::MittagLefflerPower { .. } => {
                Past::Constant {
                    from: 0.0,
                    value: 1.0,
                }
            }
            HistoryFunction::Exponential { lambda } => Past::Exponential {
                rate: *lambda,
                scale: 1.0,
            },
            HistoryFunction::GridSampled { tail, .. } => match *tail {
                TailModel::ZeroBefore { t_start } => Past::Constant {
                    from: t_start,
                    value: 0.0,
                },
                TailModel::ConstantBefore { c, t_start } => Past::Constant {
                    from: t_start,
                    value: c,
                },
                TailModel::PowerDecay { c, p, t_start } => Past::PowerDecay {
                    from: t_start,
                    c,
                    p,
                },
            },
        }
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self {
            HistoryFunction::GridSampled {
                t0,
                dt,
                values,
                tail,
            } => {
                let mut pts = Vec::new();
                let ts = tail.t_start();
                if ts > lo && ts < hi {
                    pts.push(ts);
                }
                let first = (((lo - t0) / dt).floor().max(0.0)) as usize;
                for i in first..values.len() {
                    let p = t0 + i as f64 * dt;
                    if p >= hi {
                        break;
                    }
                    if p > lo && pts.last().is_none_or(|&l| p > l) {
                        pts.push(p);
                    }
                }
                pts
            }
            HistoryFunction::Constant { .. } | HistoryFunction::Exponential { .. } => Vec::new(),
            _ => {
                if lo < 0.0 && hi > 0.0 {
                    vec![0.0]
                } else {
                    Vec::new()
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        use crate::error::{check_finite, check_positive};
        match self {
            HistoryFunction::Constant { c } => check_finite("c", *c),
            HistoryFunction::PowerPlus { beta } | HistoryFunction::ModifiedPower { beta } => {
                check_positive("beta", *beta)
            }
            HistoryFunction::Exponential { lambda } => check_positive("lambda", *lambda),
            HistoryFunction::MittagLefflerPower { alpha, lambda } => {
                crate::error::check_order(*alpha).or_else(|e| {
                    if *alpha == 1.0 {
                        Ok(())
                    } else {
                        Err(e)
                    }
                })?;
                check_finite("lambda", *lambda)
            }
            HistoryFunction::GridSampled {
                t0,
                dt,
                values,
                tail,
            } => {
                check_finite("t0", *t0)?;
                check_positive("dt", *dt)?;
                if values.len() < 2 {
                    return Err(Error::param("values", "need at least two samples"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("values", "samples must be finite"));
                }
                tail.validate(*t0)
            }
        }
    }
}

/// A function `phi` stored through its reflection: `phi(t) = inner(-t)`.
///
/// Right-sided operators act on `phi`; they are evaluated by applying the
/// left-sided operator to `inner` at `-t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mirrored(pub HistoryFunction);

impl Mirrored {
    pub fn value(&self, t: f64) -> Result<f64> {
        self.0.value(-t)
    }
}
