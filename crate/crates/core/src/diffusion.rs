//! Fundamental solutions of `D^a_t u = (k/2) u_xx` by Fourier inversion.
//!
//! In Fourier space `u_hat(w, t) = E_a(-(k/2) w^2 t^a)`. With the length
//! scale `s = (k t^a / 2)^{1/2}` and `nu = s w`,
//!
//! ```text
//! u(x, t) = H_a(|x| / s) / s,   H_a(r) = (1/pi) int_0^inf cos(nu r) E_a(-nu^2) dnu.
//! ```
//!
//! `E_a(-nu^2)` decays only like `nu^{-2}` for `a < 1`, so the slowly
//! decaying part `h(nu) = 1/(Gamma(1-a)(1+nu^2))` is subtracted and
//! transformed exactly (`e^{-r}/(2 Gamma(1-a))`); the remainder decays like
//! `nu^{-4}` and is integrated by composite 16-point Gauss-Legendre on
//! `[0, nu_max]`, with `nu_max` the point where the remainder falls below
//! the grid's tail tolerance.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::quad::gauss_legendre;
use crate::special_fn::{gamma_unchecked, ml1, rgamma};

const PANEL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    /// In (0, 1]; 1 is the heat equation.
    pub alpha: f64,
    pub k_alpha: f64,
    pub t: f64,
}

impl DiffusionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        check_positive("k_alpha", self.k_alpha)?;
        check_positive("t", self.t)
    }

    /// Similarity length `s = (k t^a / 2)^{1/2}`.
    pub fn scale(&self) -> f64 {
        (0.5 * self.k_alpha * self.t.powf(self.alpha)).sqrt()
    }

    /// Exact second moment `k t^a / Gamma(1 + a)`.
    pub fn exact_msd(&self) -> f64 {
        self.k_alpha * self.t.powf(self.alpha) / gamma_unchecked(1.0 + self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    /// Minimum number of quadrature nodes on `[0, nu_max]`; a power of two,
    /// at least 256. More are used when the evaluation points need them.
    pub n_omega: usize,
    /// `nu_max` is where the subtracted integrand drops below this.
    pub tail_tol: f64,
    /// Largest admissible `nu_max`.
    pub nu_cap: f64,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        SpectralGrid {
            n_omega: 256,
            tail_tol: 1e-12,
            nu_cap: 1e5,
        }
    }
}

impl SpectralGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_omega < 256 || !self.n_omega.is_power_of_two() {
            return Err(Error::param("n_omega", "must be a power of two >= 256"));
        }
        check_positive("tail_tol", self.tail_tol)?;
        check_positive("nu_cap", self.nu_cap)
    }
}

/// `E_a(-nu^2)` minus its subtracted part, tabulated on the quadrature
/// nodes.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub alpha: f64,
    /// Truncation point in the scaled variable `nu`.
    pub nu_max: f64,
    /// Largest `r` the node spacing resolves.
    pub r_max: f64,
    h_coef: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    residual: Vec<f64>,
}

fn residual(alpha: f64, h_coef: f64, nu: f64) -> Result<f64> {
    let e = if alpha == 1.0 {
        (-nu * nu).exp()
    } else {
        ml1(alpha, -nu * nu)?
    };
    Ok(e - h_coef / (1.0 + nu * nu))
}

impl Spectrum {
    pub fn new(alpha: f64, r_max: f64, grid: &SpectralGrid) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        check_positive("r_max", r_max)?;
        grid.validate()?;
        let h_coef = rgamma(1.0 - alpha);
        let small = |nu: f64| residual(alpha, h_coef, nu).map(|g| g.abs() < grid.tail_tol);

        // bracket, then bisect the point where the remainder gets small
        let mut hi = 1.0;
        while !(small(hi)? && small(2.0 * hi)?) {
            hi *= 2.0;
            if hi > grid.nu_cap {
                return Err(Error::Resolution(format!(
                    "spectral tail still above {} at nu = {}",
                    grid.tail_tol, grid.nu_cap
                )));
            }
        }
        let mut lo = hi / 2.0;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if small(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let nu_max = hi;

        // about two periods of cos(nu r_max) per panel
        let width = (4.0 * PI / (r_max + 1.0)).min(0.5);
        let panels = ((nu_max / width).ceil() as usize).max(grid.n_omega / PANEL_NODES);
        let width = nu_max / panels as f64;
        let (gx, gw) = gauss_legendre(PANEL_NODES);
        let mut nodes = Vec::with_capacity(panels * PANEL_NODES);
        let mut weights = Vec::with_capacity(panels * PANEL_NODES);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w / PI);
            }
        }
        let residual = nodes
            .par_iter()
            .map(|&nu| residual(alpha, h_coef, nu))
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum {
            alpha,
            nu_max,
            r_max,
            h_coef,
            nodes,
            weights,
            residual,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.residual)
            .map(|((nu, w), g)| w * g * (nu * r).cos())
            .sum();
        0.5 * self.h_coef * (-r).exp() + sum
    }

    /// `H_a` at the given points (|r| used).
    pub fn profile(&self, r: &[f64]) -> Result<Vec<f64>> {
        if let Some(&bad) = r.iter().find(|v| !(v.abs() <= self.r_max)) {
            return Err(Error::Resolution(format!(
                "r = {bad} beyond the resolved range {}",
                self.r_max
            )));
        }
        Ok(r.par_iter().map(|&v| self.eval(v)).collect())
    }
}

/// Closed-form `H_1(r) = e^{-r^2/4} / (2 sqrt(pi))`.
pub fn gaussian_profile(r: f64) -> f64 {
    (-0.25 * r * r).exp() / (2.0 * PI.sqrt())
}

/// Heat kernel `(2 pi k t)^{-1/2} exp(-x^2 / (2 k t))`.
pub fn gaussian(k: f64, t: f64, x: f64) -> f64 {
    (-x * x / (2.0 * k * t)).exp() / (2.0 * PI * k * t).sqrt()
}

/// `H_a(r)` for `r >= 0`.
pub fn self_similar_profile(alpha: f64, r: &[f64], g: &SpectralGrid) -> Result<Vec<f64>> {
    if let Some(&bad) = r.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::param("r", format!("must be finite and >= 0, got {bad}")));
    }
    let r_max = r.iter().copied().fold(1.0, f64::max);
    Spectrum::new(alpha, r_max, g)?.profile(r)
}

/// `u(x, t)` by numerical inversion, whatever the order.
pub fn invert(p: &DiffusionParams, x: &[f64], g: &SpectralGrid) -> Result<Vec<f64>> {
    p.validate()?;
    let s = p.scale();
    let r: Vec<f64> = x.iter().map(|v| (v / s).abs()).collect();
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("x", "must be finite"));
    }
    let h = self_similar_profile(p.alpha, &r, g)?;
    Ok(h.into_iter().map(|v| v / s).collect())
}

/// `u(x, t)`: the heat kernel for `alpha = 1`, numerical inversion otherwise.
pub fn fundamental_solution(p: &DiffusionParams, x: &[f64], g: &SpectralGrid) -> Result<Vec<f64>> {
    p.validate()?;
    g.validate()?;
    if p.alpha == 1.0 {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("x", "must be finite"));
        }
        return Ok(x.iter().map(|&v| gaussian(p.k_alpha, p.t, v)).collect());
    }
    invert(p, x, g)
}

/// Radius in `r` beyond which `H_a` is below about `1e-13`, from the
/// stretched-exponential decay `exp(-(1-b) b^{b/(1-b)} r^{1/(1-b)})`,
/// `b = a/2`, with a safety margin.
pub fn support_radius(alpha: f64) -> f64 {
    let b = 0.5 * alpha;
    let c = (1.0 - b) * b.powf(b / (1.0 - b));
    1.25 * (32.0 / c).powf(1.0 - b) + 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    /// `int u dx`.
    pub normalization: f64,
    /// `int x^2 u dx`.
    pub msd: f64,
    /// `k t^a / Gamma(1 + a)`.
    pub msd_exact: f64,
    /// Half-width of the x range integrated over.
    pub x_max: f64,
    /// `omega_max = nu_max / s` used by the inversion.
    pub omega_max: f64,
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let inner: f64 = f[1..n]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (f[0] + inner + f[n])
}

/// Zeroth and second moments of `u(., t)` by Simpson's rule on `[0, L]`,
/// doubled by symmetry. Fails if halving the spacing moves either moment
/// by more than `1e-4` relative.
pub fn moments(p: &DiffusionParams, g: &SpectralGrid) -> Result<Moments> {
    p.validate()?;
    g.validate()?;
    let mut big_r = support_radius(p.alpha);
    let spec = loop {
        let spec = Spectrum::new(p.alpha, big_r, g)?;
        let edge = spec.profile(&[big_r])?[0].abs();
        let centre = spec.profile(&[0.0])?[0];
        if edge <= 1e-11 * centre {
            break spec;
        }
        big_r *= 2.0;
        if big_r > 1e4 {
            return Err(Error::Resolution("profile does not decay".into()));
        }
    };
    let s = p.scale();
    let at = |n: usize| -> Result<(f64, f64)> {
        let h = big_r / n as f64;
        let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let hv = if p.alpha == 1.0 {
            r.iter().map(|&v| gaussian_profile(v)).collect()
        } else {
            spec.profile(&r)?
        };
        let m0 = 2.0 * simpson(&hv, h);
        let r2: Vec<f64> = hv.iter().zip(&r).map(|(v, r)| v * r * r).collect();
        Ok((m0, 2.0 * simpson(&r2, h) * s * s))
    };
    let (m0, m2) = at(2048)?;
    let (c0, c2) = at(1024)?;
    if ((m0 - c0) / m0).abs() > 1e-4 || ((m2 - c2) / m2).abs() > 1e-4 {
        return Err(Error::Resolution(format!(
            "moments not converged: {c0} -> {m0}, {c2} -> {m2}"
        )));
    }
    Ok(Moments {
        normalization: m0,
        msd: m2,
        msd_exact: p.exact_msd(),
        x_max: big_r * s,
        omega_max: spec.nu_max / s,
    })
}

/// Second moment `int x^2 u(x, t) dx`.
pub fn msd_check(p: &DiffusionParams, g: &SpectralGrid) -> Result<f64> {
    moments(p, g).map(|m| m.msd)
}
