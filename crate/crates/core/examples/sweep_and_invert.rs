//! λ(ε) over a grid, then the inverse problem: which ε gives a chosen λ?
//! The interpolated ε is checked by solving again at that energy.
//!
//! cargo run --example sweep_and_invert [-- <lambda>]

use waxman::sweep::{interpolate_eps_of_lambda, parse_grid, run_sweep, solve_at};
use waxman::{fixture, Scheme, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problem = fixture("easy20")?;
    let cfg = SolverConfig::default();
    let grid = parse_grid("2:9:15")?;
    let sweep = run_sweep(&problem, &grid, Scheme::Modified, &cfg)?;
    print!("{}", sweep.to_plot());

    let lambdas: Vec<f64> = sweep.points.iter().map(|p| p.lambda).collect();
    let mid = 0.5 * (lambdas[0] + lambdas[lambdas.len() - 1]);
    let target: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(mid);

    let eps = interpolate_eps_of_lambda(&sweep.points, target)?;
    let check = solve_at(&problem, eps, Scheme::Modified, &cfg)?;
    println!("target lambda={target:.10} -> epsilon={eps:.10}");
    println!(
        "re-solved lambda={:.10} (relative miss {:.2e})",
        check.lambda_final,
        (check.lambda_final - target).abs() / target.abs()
    );
    Ok(())
}
