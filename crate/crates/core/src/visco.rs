//! Linear viscoelastic stress under a power-law relaxation modulus
//! `G(t) = k t^{-a}`.
//!
//! Strain programs are piecewise linear through their breakpoints and held
//! constant after the last one. Loading starts at the first breakpoint
//! `t_a`; every formula below measures elapsed time from there, so
//! `eps(0)` in the usual notation is `eps(t_a)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_order, check_positive, Error, Result};
use crate::frac_ops::{self, Operand, Past, QuadratureSpec};
use crate::special_fn::gamma_unchecked;

/// Relaxation exponent reported for flour dough.
pub const FLOUR_DOUGH_ALPHA: f64 = 0.36;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    /// Modulus scale, stress units times time^alpha.
    pub k: f64,
    pub alpha: f64,
}

impl Material {
    pub fn new(k: f64, alpha: f64) -> Result<Self> {
        let m = Material { k, alpha };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("k", self.k)?;
        check_order(self.alpha)
    }

    /// `G(t) = k t^{-alpha}` for `t > 0`.
    pub fn modulus(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("modulus needs t > 0, got {t}")));
        }
        Ok(self.k * t.powf(-self.alpha))
    }

    /// Constant in front of the fractional derivative:
    /// `k Gamma(1 - a) = a k |Gamma(-a)|`.
    pub fn fractional_constant(&self) -> f64 {
        self.k * gamma_unchecked(1.0 - self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PastRule {
    /// Strain before the first breakpoint equals its value there.
    #[default]
    ConstantPast,
    /// Strain before the first breakpoint is zero.
    ZeroPast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrainProgram {
    /// `(time, strain)` pairs with strictly increasing times.
    pub breakpoints: Vec<(f64, f64)>,
    #[serde(default)]
    pub past_rule: PastRule,
}

impl StrainProgram {
    pub fn new(breakpoints: Vec<(f64, f64)>, past_rule: PastRule) -> Result<Self> {
        let s = StrainProgram {
            breakpoints,
            past_rule,
        };
        s.validate()?;
        Ok(s)
    }

    /// A single step of size `eps0` at time 0.
    pub fn step(eps0: f64) -> Self {
        StrainProgram {
            breakpoints: vec![(0.0, eps0)],
            past_rule: PastRule::ConstantPast,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.is_empty() {
            return Err(Error::param("breakpoints", "need at least one breakpoint"));
        }
        for &(t, e) in &self.breakpoints {
            check_finite("breakpoint time", t)?;
            check_finite("strain", e)?;
        }
        if self.breakpoints.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::param("breakpoints", "times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn origin(&self) -> f64 {
        self.breakpoints[0].0
    }

    /// Strain at `t >= origin`.
    pub fn strain(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        if t <= bp[0].0 {
            return bp[0].1;
        }
        let i = bp.partition_point(|&(tb, _)| tb < t);
        if i == bp.len() {
            return bp[bp.len() - 1].1;
        }
        let (t0, e0) = bp[i - 1];
        let (t1, e1) = bp[i];
        e0 + (e1 - e0) * (t - t0) / (t1 - t0)
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .map(|w| (w[0].0, w[1].0, (w[1].1 - w[0].1) / (w[1].0 - w[0].0)))
    }

    /// Multiplies every strain by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        StrainProgram {
            breakpoints: self.breakpoints.iter().map(|&(t, e)| (t, c * e)).collect(),
            past_rule: self.past_rule,
        }
    }
}

fn elapsed(s: &StrainProgram, t: f64) -> Result<f64> {
    check_finite("t", t)?;
    let d = t - s.origin();
    if d <= 0.0 {
        return Err(Error::param(
            "t",
            format!("stress needs t after the loading origin {}", s.origin()),
        ));
    }
    Ok(d)
}

/// Stress relaxation test: `eps0 G(t)`.
pub fn relaxation_test(m: &Material, eps0: f64, t: f64) -> Result<f64> {
    m.validate()?;
    check_finite("eps0", eps0)?;
    Ok(eps0 * m.modulus(t)?)
}

/// Discrete Boltzmann sum with `N` increments of width `(t - t_a)/(N + 1)`.
pub fn superposition_sum(m: &Material, s: &StrainProgram, t: f64, n: usize) -> Result<f64> {
    m.validate()?;
    s.validate()?;
    if n == 0 {
        return Err(Error::param("N", "need at least one increment"));
    }
    let span = elapsed(s, t)?;
    let ta = s.origin();
    let d = span / (n as f64 + 1.0);
    let mut sigma = s.strain(ta) * m.modulus(span)?;
    let mut prev = s.strain(ta);
    for i in 1..=n {
        let cur = s.strain(ta + i as f64 * d);
        sigma += (cur - prev) * m.modulus(span - i as f64 * d)?;
        prev = cur;
    }
    Ok(sigma)
}

/// Continuum limit `eps(t_a) G(t - t_a) + int eps'(tau) G(t - tau) dtau`,
/// integrated exactly segment by segment.
pub fn superposition_integral(m: &Material, s: &StrainProgram, t: f64) -> Result<f64> {
    m.validate()?;
    s.validate()?;
    let span = elapsed(s, t)?;
    let e = 1.0 - m.alpha;
    let mut sigma = s.strain(s.origin()) * m.modulus(span)?;
    for (a, b, slope) in s.segments() {
        if a >= t {
            break;
        }
        let b = b.min(t);
        sigma += slope * m.k * ((t - a).powf(e) - (t - b).powf(e)) / e;
    }
    Ok(sigma)
}

impl Operand for StrainProgram {
    fn value(&self, tau: f64) -> Result<f64> {
        Ok(self.strain(tau))
    }

    fn left_slope(&self, tau: f64) -> Result<f64> {
        Ok(self
            .segments()
            .find(|&(a, b, _)| tau > a && tau <= b)
            .map_or(0.0, |(_, _, m)| m))
    }

    fn past(&self) -> Past {
        Past::Constant {
            from: self.origin(),
            value: self.breakpoints[0].1,
        }
    }

    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.breakpoints
            .iter()
            .map(|&(t, _)| t)
            .filter(|&t| t > lo && t < hi)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        StrainProgram::validate(self)
    }
}

/// `eps(t_a) G(t - t_a) + k Gamma(1 - a) D^a eps(t)` with the strain held
/// at `eps(t_a)` before loading.
pub fn fractional_form(
    m: &Material,
    s: &StrainProgram,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    m.validate()?;
    s.validate()?;
    if s.past_rule != PastRule::ConstantPast {
        return Err(Error::Unsupported(
            "the fractional form needs the constant-past strain extension".into(),
        ));
    }
    let span = elapsed(s, t)?;
    let d = frac_ops::marchaud_derivative_of(s, m.alpha, t, q)?;
    Ok(s.strain(s.origin()) * m.modulus(span)? + m.fractional_constant() * d.value)
}
