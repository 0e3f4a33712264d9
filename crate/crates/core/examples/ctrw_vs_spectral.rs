//! Random-walk ensembles against the spectral fundamental solution.
//!
//! `cargo run --release --example ctrw_vs_spectral`

use fracalc_core::ctrw::{compare_to_fundamental, msd_slope, run_ensemble, WalkConfig};
use fracalc_core::diffusion::{fundamental_solution, DiffusionParams, SpectralGrid};

fn main() -> fracalc_core::Result<()> {
    for (alpha, t_end) in [(1.0, 100.0), (0.5, 1e6)] {
        let cfg = WalkConfig::new(alpha, 100_000, t_end, 42);
        let start = std::time::Instant::now();
        let stats = run_ensemble(&cfg)?;
        let p = DiffusionParams {
            alpha,
            k_alpha: cfg.k_alpha(),
            t: stats.t_end,
        };
        let c = compare_to_fundamental(&stats, |x| fundamental_solution(&p, x, &SpectralGrid::default()))?;
        println!(
            "alpha {alpha}: msd slope {:.4}, msd {:.1} (theory {:.1}), sup density error {:.1e}, KS {:.1e}, {:.1?}",
            msd_slope(&stats)?,
            stats.msd.last().unwrap(),
            cfg.theory_msd(stats.t_end),
            c.sup_density,
            c.ks,
            start.elapsed()
        );
    }
    Ok(())
}
