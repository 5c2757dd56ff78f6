//! Convergence histories of both schemes on the well-separated fixture,
//! then iteration counts over its standard ε grid.
//!
//! cargo run --example power_vs_2x2 [-- <epsilon>]

use waxman::model::Fixture;
use waxman::sweep::compare_schemes;
use waxman::{fixture, make_green, modified_solve, power_solve, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(6.0);
    let problem = fixture("easy20")?;
    let g = make_green(&problem, eps)?;
    let cfg = SolverConfig::default();
    let exact = g.lambda_exact(cfg.branch)?;

    let power = power_solve(&g, &cfg)?;
    let modified = modified_solve(&g, &cfg)?;
    println!("easy20 at epsilon={eps}: exact lambda = {exact:.12}");
    println!(
        "{:>4} {:>22} {:>22}",
        "n", "|lambda-exact| power", "|lambda-exact| 2x2"
    );
    let rows = power.trace.steps.len().max(modified.trace.steps.len());
    for n in 0..rows {
        let err = |steps: &[waxman::solver::TraceStep]| {
            steps
                .get(n)
                .map(|s| format!("{:.3e}", (s.lambda - exact).abs()))
                .unwrap_or_default()
        };
        println!(
            "{:>4} {:>22} {:>22}",
            n + 1,
            err(&power.trace.steps),
            err(&modified.trace.steps)
        );
    }

    let cmp = compare_schemes(&problem, &Fixture::Easy20.standard_grid(), &cfg)?;
    println!(
        "\n{:>6} {:>10} {:>8} {:>10} {:>8}",
        "eps", "iter_pow", "iter_2x2", "apps_pow", "apps_2x2"
    );
    for p in &cmp.points {
        println!(
            "{:>6} {:>10} {:>8} {:>10} {:>8}",
            p.epsilon,
            p.power.iterations,
            p.modified.iterations,
            p.power.op_applications,
            p.modified.op_applications
        );
    }
    println!("{}", cmp.summary());
    Ok(())
}
