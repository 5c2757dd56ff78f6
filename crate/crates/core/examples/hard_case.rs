//! The clustered fixture: the start vector sits almost on the wrong member
//! of a nearly degenerate pair, so the power scheme needs hundreds of
//! iterations. The 2×2 scheme needs well under half.
//!
//! cargo run --release --example hard_case

use waxman::model::Fixture;
use waxman::sweep::compare_schemes;
use waxman::{fixture, make_green, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = fixture("hard20")?;
    let cfg = SolverConfig::default();
    let grid = Fixture::Hard20.standard_grid();
    let cmp = compare_schemes(&problem, &grid, &cfg)?;

    println!(
        "{:>5} {:>9} {:>9} {:>12} {:>12}",
        "eps", "iter_pow", "iter_2x2", "err_pow", "err_2x2"
    );
    for p in &cmp.points {
        let exact = make_green(&problem, p.epsilon)?.lambda_exact(cfg.branch)?;
        let rel = |l: f64| (l - exact).abs() / exact.abs();
        println!(
            "{:>5} {:>9} {:>9} {:>12.2e} {:>12.2e}",
            p.epsilon,
            p.power.iterations,
            p.modified.iterations,
            rel(p.power.lambda),
            rel(p.modified.lambda)
        );
    }
    println!("{}", cmp.summary());

    // the first few steps show the slow drift off the subdominant direction
    let eps = grid[grid.len() - 1];
    if let Some(trace) = cmp.power_traces.last().and_then(|(_, t)| t.as_ref()) {
        println!("\npower scheme at epsilon={eps}, every 50th step:");
        for s in trace.steps.iter().filter(|s| s.n == 1 || s.n % 50 == 0) {
            println!("  n={:>4} lambda={:.10}", s.n, s.lambda);
        }
    }
    Ok(())
}
