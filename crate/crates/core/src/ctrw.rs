//! Continuous-time random walks on the lattice `dx Z`.
//!
//! A walker waits `n` ticks of length `dtau`, then jumps one site left or
//! right with equal probability. With `alpha = 1` every wait is one tick
//! (the classical walk); otherwise waits follow the discrete Pareto law
//! `P(n) = d_a n^{-1-a}`, `n >= 1`, whose infinite mean produces
//! subdiffusion `<x^2> ~ k_a t^a / Gamma(1+a)` with
//! `k_a = dx^2 / (d_a dtau^a |Gamma(-a)|)`.
//!
//! Every walker owns a ChaCha stream selected by its index, and all
//! ensemble sums are exact integers, so results do not depend on the
//! number of threads or on scheduling.
//!
//! The histogram records where walkers are at `t_end` (occupation). That is
//! what the diffusion density describes in the limit; it is not the
//! density of walkers that have just arrived.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::special_fn::gamma_unchecked;

const TABLE_SIZE: usize = 1 << 16;
const ZETA_TERMS: u64 = 1_000_000;
const CHUNK: u64 = 512;

/// `sum_{n >= 1} n^{-s}` for `s > 1`: a direct sum to 1e6 plus an
/// Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    let n = ZETA_TERMS as f64;
    // smallest terms first
    let head: f64 = (1..=ZETA_TERMS).rev().map(|k| (k as f64).powf(-s)).sum();
    let tail = n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0;
    head + tail
}

/// Discrete Pareto waiting-time law with exponent `alpha` in (0, 1).
#[derive(Debug, Clone)]
pub struct WaitingDist {
    pub alpha: f64,
    /// Normalisation `1 / zeta(1 + alpha)`.
    pub d_alpha: f64,
    cdf: Vec<f64>,
}

impl WaitingDist {
    pub fn new(alpha: f64) -> Result<Self> {
        crate::error::check_order(alpha)?;
        let d_alpha = 1.0 / zeta(1.0 + alpha);
        let mut dist = WaitingDist {
            alpha,
            d_alpha,
            cdf: vec![0.0; TABLE_SIZE],
        };
        // cdf(n) = 1 - P(N > n), with the survival sum built from the far end
        let mut survival = dist.table_tail_mass();
        for n in (1..=TABLE_SIZE).rev() {
            dist.cdf[n - 1] = 1.0 - survival;
            survival += dist.pmf(n as u64);
        }
        Ok(dist)
    }

    /// `P(n)`.
    pub fn pmf(&self, n: u64) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.d_alpha * (n as f64).powf(-1.0 - self.alpha)
        }
    }

    /// Mass beyond the tabulated range, from the Euler-Maclaurin tail.
    pub fn table_tail_mass(&self) -> f64 {
        let n = TABLE_SIZE as f64;
        let s = 1.0 + self.alpha;
        self.d_alpha
            * (n.powf(1.0 - s) / (s - 1.0) - 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.gen();
        let last = self.cdf[TABLE_SIZE - 1];
        if u < last {
            return self.cdf.partition_point(|&c| c <= u) as u64 + 1;
        }
        // Beyond the table P(N > n) ~ d_a (n + 1/2)^{-a} / a.
        let tail = (1.0 - u).max(f64::MIN_POSITIVE);
        let n = (self.d_alpha / (self.alpha * tail)).powf(1.0 / self.alpha) - 0.5;
        let n = n.ceil().max(TABLE_SIZE as f64 + 1.0);
        if n >= 4e18 {
            u64::MAX / 4
        } else {
            n as u64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub dx: f64,
    pub dtau: f64,
    /// In (0, 1), or exactly 1 for unit waits.
    pub alpha: f64,
    pub n_walkers: u64,
    pub t_end: f64,
    pub seed: u64,
    /// Number of log-spaced observation times.
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    /// Upper bound on `n_walkers * n_times`.
    #[serde(default = "default_cap")]
    pub memory_cap: u64,
    /// Histogram bin width in lattice sites (even). `None` picks one from
    /// the spread.
    #[serde(default)]
    pub bin_sites: Option<u64>,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_n_times() -> usize {
    40
}

fn default_cap() -> u64 {
    4_000_000_000
}

impl WalkConfig {
    pub fn new(alpha: f64, n_walkers: u64, t_end: f64, seed: u64) -> Self {
        WalkConfig {
            dx: 1.0,
            dtau: 1.0,
            alpha,
            n_walkers,
            t_end,
            seed,
            n_times: default_n_times(),
            memory_cap: default_cap(),
            bin_sites: None,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("dx", self.dx)?;
        check_positive("dtau", self.dtau)?;
        check_positive("t_end", self.t_end)?;
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if self.n_walkers == 0 {
            return Err(Error::param("n_walkers", "need at least one walker"));
        }
        if self.n_times == 0 {
            return Err(Error::param("n_times", "need at least one observation time"));
        }
        if self.t_end / self.dtau > 1e18 {
            return Err(Error::param("t_end", "more than 1e18 ticks"));
        }
        if let Some(b) = self.bin_sites {
            if b == 0 || b % 2 == 1 {
                return Err(Error::param("bin_sites", "must be a positive even number"));
            }
        }
        let cells = self.n_walkers.saturating_mul(self.n_times as u64);
        if cells > self.memory_cap {
            return Err(Error::MemoryBudget {
                requested: cells,
                cap: self.memory_cap,
            });
        }
        Ok(())
    }

    /// Diffusivity of the limit equation: `dx^2/dtau` for unit waits,
    /// `dx^2 / (d_a dtau^a |Gamma(-a)|)` otherwise.
    pub fn k_alpha(&self) -> f64 {
        if self.alpha == 1.0 {
            self.dx * self.dx / self.dtau
        } else {
            let d = 1.0 / zeta(1.0 + self.alpha);
            let g = (gamma_unchecked(-self.alpha)).abs();
            self.dx * self.dx / (d * self.dtau.powf(self.alpha) * g)
        }
    }

    /// Limit mean square displacement `k_a t^a / Gamma(1 + a)`.
    pub fn theory_msd(&self, t: f64) -> f64 {
        self.k_alpha() * t.powf(self.alpha) / gamma_unchecked(1.0 + self.alpha)
    }

    fn end_tick(&self) -> u64 {
        (self.t_end / self.dtau * (1.0 + 1e-12)).floor() as u64
    }

    fn observation_ticks(&self) -> Vec<u64> {
        let end = self.end_tick();
        if end == 0 {
            return vec![0];
        }
        let n = self.n_times;
        let mut ticks: Vec<u64> = (0..n)
            .map(|i| {
                if n == 1 {
                    end
                } else {
                    let f = i as f64 / (n - 1) as f64;
                    ((end as f64).powf(f)).round() as u64
                }
            })
            .collect();
        ticks.push(end);
        ticks.sort_unstable();
        ticks.dedup();
        ticks
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Bin edges in physical units; bins are `[edges[i], edges[i+1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
    /// Ensemble mean position at each observation time.
    pub mean: Vec<f64>,
    pub histogram: Histogram,
    pub n_walkers: u64,
    pub t_end: f64,
}

#[derive(Clone)]
struct Partial {
    sum_x: Vec<i128>,
    sum_x2: Vec<u128>,
}

impl Partial {
    fn zero(n: usize) -> Self {
        Partial {
            sum_x: vec![0; n],
            sum_x2: vec![0; n],
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.sum_x.iter_mut().zip(other.sum_x) {
            *a += b;
        }
        for (a, b) in self.sum_x2.iter_mut().zip(other.sum_x2) {
            *a += b;
        }
        self
    }
}

/// The RNG stream of walker `id`.
pub fn walker_rng(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Lattice positions of one walker at the given ticks.
pub fn walk(
    dist: Option<&WaitingDist>,
    rng: &mut ChaCha8Rng,
    obs_ticks: &[u64],
) -> Vec<i64> {
    let mut out = Vec::with_capacity(obs_ticks.len());
    let mut tick: u64 = 0;
    let mut x: i64 = 0;
    while out.len() < obs_ticks.len() {
        let wait = dist.map_or(1, |d| d.sample(rng));
        let next = tick.saturating_add(wait);
        while out.len() < obs_ticks.len() && obs_ticks[out.len()] < next {
            out.push(x);
        }
        tick = next;
        x += if rng.gen::<bool>() { 1 } else { -1 };
    }
    out
}

fn bin_width_sites(cfg: &WalkConfig) -> u64 {
    if let Some(b) = cfg.bin_sites {
        return b;
    }
    let sd_sites = cfg.theory_msd(cfg.end_tick() as f64 * cfg.dtau).sqrt() / cfg.dx;
    // about 40 bins per standard deviation pair, never below one pair of sites
    let pairs = (sd_sites / 20.0).round().max(1.0) as u64;
    2 * pairs
}

fn histogram(cfg: &WalkConfig, finals: &[i64]) -> Histogram {
    let w = bin_width_sites(cfg) as i64;
    let half = w / 2;
    // Bins are [o + j w, o + (j+1) w) in site units. With mixed parity the
    // edges sit at half-integers. Unit waits leave one sublattice empty at
    // any given tick; then the edges sit on the empty sublattice so each
    // bin is centred on the occupied sites it holds.
    let origin = if cfg.alpha == 1.0 {
        let mut o = -half;
        if (o - cfg.end_tick() as i64).rem_euclid(2) == 0 {
            o -= 1;
        }
        o as f64
    } else {
        -(half as f64) - 0.5
    };
    let index = |x: i64| ((x as f64 - origin) / w as f64).floor() as i64;
    let lo = *finals.iter().min().expect("at least one walker");
    let hi = *finals.iter().max().expect("at least one walker");
    let (first, last) = (index(lo), index(hi));
    let mut counts = vec![0u64; (last - first + 1) as usize];
    for &x in finals {
        counts[(index(x) - first) as usize] += 1;
    }
    let edges = (first..=last + 1)
        .map(|j| (origin + (j * w) as f64) * cfg.dx)
        .collect();
    Histogram { edges, counts }
}

/// Simulates the ensemble and collects statistics.
pub fn run_ensemble(cfg: &WalkConfig) -> Result<EnsembleStats> {
    cfg.validate()?;
    let dist = if cfg.alpha < 1.0 {
        Some(WaitingDist::new(cfg.alpha)?)
    } else {
        None
    };
    let obs = cfg.observation_ticks();
    let n_obs = obs.len();
    let n = cfg.n_walkers;
    let chunks = n.div_ceil(CHUNK);
    let pool = crate::parallel::pool(cfg.threads)?;
    let results: Vec<(Partial, Vec<i64>)> = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut part = Partial::zero(n_obs);
                let mut finals = Vec::with_capacity(CHUNK as usize);
                for id in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let mut rng = walker_rng(cfg.seed, id);
                    let path = walk(dist.as_ref(), &mut rng, &obs);
                    for (k, &x) in path.iter().enumerate() {
                        part.sum_x[k] += x as i128;
                        part.sum_x2[k] += (x as i128 * x as i128) as u128;
                    }
                    finals.push(path[n_obs - 1]);
                }
                (part, finals)
            })
            .collect()
    });
    let mut total = Partial::zero(n_obs);
    let mut finals = Vec::with_capacity(n as usize);
    for (p, f) in results {
        total = total.merge(p);
        finals.extend(f);
    }
    let nf = n as f64;
    let dx2 = cfg.dx * cfg.dx;
    Ok(EnsembleStats {
        times: obs.iter().map(|&t| t as f64 * cfg.dtau).collect(),
        msd: total.sum_x2.iter().map(|&s| s as f64 / nf * dx2).collect(),
        mean: total.sum_x.iter().map(|&s| s as f64 / nf * cfg.dx).collect(),
        histogram: histogram(cfg, &finals),
        n_walkers: n,
        t_end: *obs.last().expect("nonempty") as f64 * cfg.dtau,
    })
}

/// Least-squares slope of `log msd` against `log t` over the last decade of
/// positive observation times.
pub fn msd_slope(stats: &EnsembleStats) -> Result<f64> {
    let t_max = stats.times.last().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = stats
        .times
        .iter()
        .zip(&stats.msd)
        .filter(|(&t, &m)| t >= t_max / 10.0 && t > 0.0 && m > 0.0)
        .map(|(t, m)| (t.ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Resolution("fewer than two points in the last decade".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Sup-norm distance between the empirical density (counts per walker
    /// per unit length) and the bin-averaged limit density.
    pub sup_density: f64,
    /// `sup_density` divided by the largest bin-averaged limit density.
    pub sup_relative: f64,
    /// Kolmogorov distance between the two distributions at the bin edges.
    pub ks: f64,
    /// Limit mass covered by the histogram range.
    pub covered_mass: f64,
}

/// Compares the final histogram against a limit density evaluated by
/// `density` at arbitrary points (one call with all nodes).
pub fn compare_to_fundamental<F>(stats: &EnsembleStats, density: F) -> Result<Comparison>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let h = &stats.histogram;
    if h.edges.len() != h.counts.len() + 1 || h.counts.is_empty() {
        return Err(Error::param("histogram", "edges and counts do not match"));
    }
    if h.edges.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("histogram", "edges must increase"));
    }
    let total: u64 = h.counts.iter().sum();
    if total != stats.n_walkers {
        return Err(Error::param("histogram", "counts do not sum to the walker count"));
    }
    let (gx, gw) = crate::quad::gauss_legendre(8);
    // bin-averaged densities by 8-point Gauss on each bin, split at 0
    let mut pieces = Vec::new();
    for (i, w) in h.edges.windows(2).enumerate() {
        if w[0] < 0.0 && w[1] > 0.0 {
            pieces.push((i, w[0], 0.0));
            pieces.push((i, 0.0, w[1]));
        } else {
            pieces.push((i, w[0], w[1]));
        }
    }
    let nodes: Vec<f64> = pieces
        .iter()
        .flat_map(|&(_, a, b)| gx.iter().map(move |&x| 0.5 * (a + b) + 0.5 * (b - a) * x))
        .collect();
    let vals = density(&nodes)?;
    if vals.len() != nodes.len() {
        return Err(Error::param("density", "returned the wrong number of values"));
    }
    let mut mass = vec![0.0; h.counts.len()];
    for (p, &(i, a, b)) in pieces.iter().enumerate() {
        let v: f64 = gw
            .iter()
            .zip(&vals[p * gx.len()..(p + 1) * gx.len()])
            .map(|(w, f)| w * f)
            .sum();
        mass[i] += 0.5 * (b - a) * v;
    }
    let n = total as f64;
    let mut sup = 0.0f64;
    let mut peak = 0.0f64;
    let mut ks = 0.0f64;
    let (mut ce, mut ct) = (0.0, 0.0);
    for (i, w) in h.edges.windows(2).enumerate() {
        let width = w[1] - w[0];
        let emp = h.counts[i] as f64 / n;
        sup = sup.max((emp - mass[i]).abs() / width);
        peak = peak.max(mass[i] / width);
        ce += emp;
        ct += mass[i];
        ks = ks.max((ce - ct).abs());
    }
    Ok(Comparison {
        sup_density: sup,
        sup_relative: if peak > 0.0 { sup / peak } else { f64::INFINITY },
        ks,
        covered_mass: ct,
    })
}
