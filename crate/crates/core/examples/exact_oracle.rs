// Exact references: the holant identity, the field gadget, and the
// stationary distributions of the explicit transition matrices.

use std::error::Error;

use linegraph_ising::chains::ChainKind;
use linegraph_ising::graph::{cycle, line_graph, path};
use linegraph_ising::oracle::{
    exact_h0_subdivided, exact_h2, exact_h2_raw, exact_stationary, exact_summary, exact_z_vertex_model, tv_distance,
    weight_distribution,
};
use linegraph_ising::signature::ModelParams;

pub fn run() -> Result<(), Box<dyn Error>> {
    let g = cycle(5)?;
    let params = ModelParams::per_edge(0.9, vec![0.5, -0.5, 1.0, 0.0, 0.25]);
    let summary = exact_summary(&g, &params)?;
    println!("{}", serde_json::to_string(&summary)?);
    let fields: Vec<f64> = (0..g.edge_count()).map(|e| params.nu(e)).collect();
    let direct = exact_z_vertex_model(&line_graph(&g), params.beta, &fields)?;
    println!("vertex model on L(G): {direct:.12}");
    println!("subdivided holant:    {:.12}", exact_h0_subdivided(&g, &params)?);
    println!(
        "H2 structured {:.12}, raw {:.12}",
        exact_h2(&g, &params)?,
        exact_h2_raw(&g, &params)?
    );

    let g = path(3);
    let params = ModelParams::uniform(1.0, 0.3);
    for kind in [ChainKind::HalfEdge, ChainKind::Glauber] {
        let st = exact_stationary(&g, &params, kind)?;
        let target = weight_distribution(&g, &params, &st.states);
        println!(
            "P_3 {kind}: {} states, power iteration {} rounds, TV to weights {:.1e}",
            st.states.len(),
            st.iterations,
            tv_distance(&st.probabilities, &target)?
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
