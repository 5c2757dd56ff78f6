//! Both schemes against a dense eigen-decomposition on random problems,
//! for both branches of the spectrum.
//!
//! cargo run --release --example oracle_check [-- <count>]

use waxman::{
    generate, make_green, modified_solve, power_solve, Branch, ModelSpec, SolverConfig, Status,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(20);
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let dim = [5, 10, 20, 64][(k % 4) as usize];
        let problem = generate(&ModelSpec::evenly_spaced(
            dim,
            10.0,
            1.0,
            1.0,
            100 + k,
            format!("random{k}"),
        ))?;
        let g = make_green(&problem, problem.t_min() - 1.0)?;
        for branch in [Branch::Highest, Branch::Lowest] {
            let cfg = SolverConfig {
                branch,
                ..SolverConfig::default()
            };
            let exact = g.lambda_exact(branch)?;
            let p = power_solve(&g, &cfg)?;
            let m = modified_solve(&g, &cfg)?;
            let rel = |l: f64| (l - exact).abs() / exact.abs();
            worst = worst.max(rel(p.lambda_final)).max(rel(m.lambda_final));
            let ok = p.status == Status::Converged && m.status == Status::Converged;
            println!(
                "{:<9} dim={dim:<3} {branch:<8} exact={exact:>+.8e} power {:>4} it {:.1e}  2x2 {:>4} it {:.1e}{}",
                problem.label,
                p.iterations,
                rel(p.lambda_final),
                m.iterations,
                rel(m.lambda_final),
                if ok { "" } else { "  NOT CONVERGED" }
            );
        }
    }
    println!("worst relative error {worst:.2e}");
    Ok(())
}
