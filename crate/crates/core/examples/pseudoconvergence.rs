//! Constructed pseudoconvergence: one point of a hard20 sweep is stopped
//! after 20 power iterations. Its λ looks plausible on its own but sits
//! off the smooth λ(ε) curve, which the smoothness check picks up. The
//! flagged point is then re-solved with the 2×2 scheme.
//!
//! cargo run --release --example pseudoconvergence [-- <index> <max_iter>]

use std::collections::BTreeMap;

use waxman::model::Fixture;
use waxman::sweep::{
    detect_pseudoconvergence, run_sweep_with, solve_at, SweepOptions, DEFAULT_SMOOTHNESS_THRESHOLD,
};
use waxman::{fixture, Scheme, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let index: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let max_iter: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20);

    let problem = fixture("hard20")?;
    let grid = Fixture::Hard20.standard_grid();
    let cfg = SolverConfig::default();
    let opts = SweepOptions {
        max_iter_at: BTreeMap::from([(index, max_iter)]),
        ..SweepOptions::default()
    };

    let mut sweep = run_sweep_with(&problem, &grid, Scheme::Power, &cfg, &opts)?;
    let report = detect_pseudoconvergence(&sweep.points, DEFAULT_SMOOTHNESS_THRESHOLD)?;
    sweep.apply_flags(&report);
    print!("{}", sweep.to_csv(true));
    print!("\n{}", report.to_text());

    for f in &report.flags {
        let again = solve_at(&problem, f.epsilon, Scheme::Modified, &cfg)?;
        println!(
            "rerun index {} with 2x2: lambda={:.10} (fit {:.10}) in {} iterations",
            f.index, again.lambda_final, f.lambda_fit, again.iterations
        );
    }
    Ok(())
}
