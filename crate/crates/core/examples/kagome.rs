// Builds the kagome lattice as the line graph of a periodic hexagonal patch
// and prints a few structural checks.

use std::error::Error;

use linegraph_ising::graph::{hex_torus, line_graph, serialize_edge_list};

pub fn run() -> Result<(), Box<dyn Error>> {
    for l in 2..=4 {
        let hex = hex_torus(l)?;
        let kagome = line_graph(&hex);
        let degrees: Vec<usize> = (0..kagome.vertex_count()).map(|v| kagome.degree(v)).collect();
        let regular = degrees.iter().all(|&d| d == 4);
        println!(
            "L={l}: hexagonal {} vertices / {} edges, kagome {} sites / {} bonds, 4-regular: {regular}",
            hex.vertex_count(),
            hex.edge_count(),
            kagome.vertex_count(),
            kagome.edge_count(),
        );
    }
    // every site of the kagome lattice lies in exactly two triangles, one per
    // endpoint of the underlying hexagonal edge
    let kagome = line_graph(&hex_torus(3)?);
    let triangles_at = |v: usize| {
        let nbrs: Vec<usize> = kagome.neighbors(v).collect();
        let mut count = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if kagome.neighbors(a).any(|x| x == b) {
                    count += 1;
                }
            }
        }
        count
    };
    let all_two = (0..kagome.vertex_count()).all(|v| triangles_at(v) == 2);
    println!("L=3: every site in two triangles: {all_two}");
    let text = serialize_edge_list(&hex_torus(2)?);
    println!("hex:2 as an edge list ({} lines), first lines:", text.lines().count());
    for line in text.lines().take(4) {
        println!("  {line}");
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
