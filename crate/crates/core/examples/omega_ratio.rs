// Time the half-edge chain spends in inconsistent states: the empirical
// `H2/H0` against its exact value and the analytic bound.

use std::error::Error;

use linegraph_ising::estimator::{measure_omega_ratio, OmegaConfig};
use linegraph_ising::graph::{cycle, star};
use linegraph_ising::oracle::exact_summary;
use linegraph_ising::signature::ModelParams;

pub fn run() -> Result<(), Box<dyn Error>> {
    println!("{:<6} {:>5} {:>5} {:>10} {:>10} {:>8} {:>12}", "graph", "beta", "nu", "measured", "exact", "stderr", "bound");
    for (name, g) in [("C_4", cycle(4)?), ("K_1,3", star(3)), ("K_1,5", star(5))] {
        for (beta, nu) in [(0.0, 0.0), (0.5, 1.0), (1.5, -1.0)] {
            let params = ModelParams::uniform(beta, nu);
            let exact = exact_summary(&g, &params)?.omega_ratio();
            let r = measure_omega_ratio(&g, &params, &OmegaConfig::new(200_000, 4))?;
            println!(
                "{name:<6} {beta:>5} {nu:>5} {:>10.4} {exact:>10.4} {:>8.4} {:>12.1}",
                r.ratio, r.stderr, r.bound
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
