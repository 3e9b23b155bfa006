// Samples the Gibbs distribution on `L(C_4) = C_4` with both chains and
// compares against exact enumeration.

use std::error::Error;

use linegraph_ising::chains::{draw_samples, ChainKind, SampleConfig};
use linegraph_ising::graph::{cycle, star};
use linegraph_ising::oracle::{empirical_distribution, exact_gibbs, tv_distance};
use linegraph_ising::signature::ModelParams;

pub fn run() -> Result<(), Box<dyn Error>> {
    let params = ModelParams::uniform(0.5, 0.0);
    for (name, g) in [("C_4", cycle(4)?), ("K_1,3", star(3))] {
        let exact = exact_gibbs(&g, &params)?;
        for kind in [ChainKind::Glauber, ChainKind::HalfEdge] {
            let cfg = SampleConfig {
                kind,
                samples: 50_000,
                spacing: g.edge_count() as u64,
                burn_in: 1_000,
                seed: 1,
            };
            let run = draw_samples(&g, &params, &cfg)?;
            let tv = tv_distance(&empirical_distribution(g.edge_count(), &run.samples), &exact)?;
            println!(
                "{name} {kind:>9}: TV {tv:.4}, acceptance {:.3}, time in consistent states {:.3}",
                run.acceptance_rate, run.omega0_fraction
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
