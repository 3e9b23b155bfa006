// Telescoping-product estimates of `log Z` against exact enumeration.

use std::error::Error;

use linegraph_ising::estimator::{estimate_z, EstimatorConfig};
use linegraph_ising::graph::{cycle, hex_torus};
use linegraph_ising::oracle::exact_h0;
use linegraph_ising::signature::ModelParams;

pub fn run() -> Result<(), Box<dyn Error>> {
    let fixtures = [
        ("C_6", cycle(6)?, ModelParams::uniform(1.0, 0.5)),
        ("hex:2", hex_torus(2)?, ModelParams::uniform(0.7, 0.0)),
        ("hex:2 with field", hex_torus(2)?, ModelParams::uniform(1.2, -0.4)),
    ];
    for (name, g, params) in fixtures {
        let exact = exact_h0(&g, &params)?;
        let report = estimate_z(&g, &params, 0.1, &EstimatorConfig::new(7))?;
        println!(
            "{name}: estimate {:.5}, exact {exact:.5}, error {:+.5} ({} levels x {} samples, {} steps, {:.2}s)",
            report.log_z,
            report.log_z - exact,
            report.levels.len(),
            report.samples_per_level,
            report.total_steps,
            report.wall_time_secs
        );
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
