//! Simple undirected graphs with a fixed half-edge enumeration.
//!
//! Edge `e = {u, v}` owns two half-edges with global indices `2e` (owned by
//! the first stored endpoint) and `2e + 1` (owned by the second). Every chain,
//! oracle and weight function in the crate uses this enumeration.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("hexagonal torus needs L >= 2 (got {0}); smaller tori have parallel edges")]
    TorusTooSmall(usize),
    #[error("unknown graph generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid size {size} for generator `{name}`")]
    InvalidSize { name: String, size: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One half of an edge, attached to `owner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfEdge {
    pub edge: usize,
    pub side: u8,
    pub owner: usize,
}

impl HalfEdge {
    /// Global index `2 * edge + side`.
    #[inline]
    pub fn index(&self) -> usize {
        2 * self.edge + self.side as usize
    }
}

/// Undirected simple graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    // incident half-edge indices per vertex
    incident: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, repeated edges and out-of-range
    /// endpoints. Edge order (and endpoint order) is kept as given.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut incident = vec![Vec::new(); n];
        for (e, &(u, v)) in edges.iter().enumerate() {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            incident[u].push(2 * e);
            incident[v].push(2 * e + 1);
        }
        Ok(Self { n, edges, incident })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            incident: vec![Vec::new(); n],
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn half_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    #[inline]
    pub fn degree(&self, k: usize) -> usize {
        self.incident[k].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Global half-edge indices incident at `k`.
    #[inline]
    pub fn half_edges_at(&self, k: usize) -> &[usize] {
        &self.incident[k]
    }

    /// Edge indices incident at `k`, in incidence order.
    pub fn edges_at(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[k].iter().map(|h| h / 2)
    }

    #[inline]
    pub fn half_edge(&self, index: usize) -> HalfEdge {
        let edge = index / 2;
        let side = (index % 2) as u8;
        let (u, v) = self.edges[edge];
        HalfEdge {
            edge,
            side,
            owner: if side == 0 { u } else { v },
        }
    }

    #[inline]
    pub fn owner(&self, half_edge: usize) -> usize {
        let (u, v) = self.edges[half_edge / 2];
        if half_edge % 2 == 0 {
            u
        } else {
            v
        }
    }

    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = usize> + '_ {
        self.incident[k].iter().map(move |&h| self.owner(h ^ 1))
    }

    /// Copy with endpoints sorted inside each edge and edges sorted.
    pub fn canonical(&self) -> Self {
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        edges.sort_unstable();
        Self::new(self.n, edges).expect("canonical form of a simple graph is simple")
    }

    /// Two-colouring if one exists.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let mut colour = vec![u8::MAX; self.n];
        let mut stack = Vec::new();
        for start in 0..self.n {
            if colour[start] != u8::MAX {
                continue;
            }
            colour[start] = 0;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for w in self.neighbors(u) {
                    if colour[w] == u8::MAX {
                        colour[w] = 1 - colour[u];
                        stack.push(w);
                    } else if colour[w] == colour[u] {
                        return None;
                    }
                }
            }
        }
        Some(colour)
    }
}

/// Line graph: one vertex per edge of `g`, adjacent when the edges share an
/// endpoint. Vertex `e` of the result is edge `e` of `g`.
pub fn line_graph(g: &Graph) -> Graph {
    let mut edges = Vec::new();
    for k in 0..g.vertex_count() {
        let at: Vec<usize> = g.edges_at(k).collect();
        for (i, &e) in at.iter().enumerate() {
            for &f in &at[i + 1..] {
                edges.push((e.min(f), e.max(f)));
            }
        }
    }
    Graph::new(g.edge_count(), edges).expect("line graph of a simple graph is simple")
}

/// Periodic honeycomb lattice with `L x L` unit cells, two vertices per cell.
/// Its line graph is the `L x L` kagome torus.
pub fn hex_torus(l: usize) -> Result<Graph, GraphError> {
    if l < 2 {
        return Err(GraphError::TorusTooSmall(l));
    }
    // A(i,j) = 2*(i*l + j), B(i,j) = A(i,j) + 1
    let a = |i: usize, j: usize| 2 * ((i % l) * l + (j % l));
    let b = |i: usize, j: usize| a(i, j) + 1;
    let mut edges = Vec::with_capacity(3 * l * l);
    for i in 0..l {
        for j in 0..l {
            edges.push((a(i, j), b(i, j)));
            edges.push((a(i, j), b(i + l - 1, j)));
            edges.push((a(i, j), b(i, j + l - 1)));
        }
    }
    Graph::new(2 * l * l, edges)
}

pub fn path(k: usize) -> Graph {
    let edges = (1..k).map(|i| (i - 1, i)).collect();
    Graph::new(k, edges).unwrap()
}

pub fn cycle(k: usize) -> Result<Graph, GraphError> {
    if k < 3 {
        return Err(GraphError::InvalidSize {
            name: "cycle".into(),
            size: k,
        });
    }
    let edges = (0..k).map(|i| (i, (i + 1) % k)).collect();
    Graph::new(k, edges)
}

/// `K_{1,d}` with the centre at vertex 0.
pub fn star(d: usize) -> Graph {
    let edges = (1..=d).map(|i| (0, i)).collect();
    Graph::new(d + 1, edges).unwrap()
}

pub fn complete(k: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..k {
        for v in u + 1..k {
            edges.push((u, v));
        }
    }
    Graph::new(k, edges).unwrap()
}

/// Named fixture: `path`, `cycle`, `star`, `complete`, `hex`.
pub fn named_graph(name: &str, size: usize) -> Result<Graph, GraphError> {
    match name {
        "path" => {
            if size == 0 {
                return Err(GraphError::InvalidSize {
                    name: name.into(),
                    size,
                });
            }
            Ok(path(size))
        }
        "cycle" => cycle(size),
        "star" => {
            if size == 0 {
                return Err(GraphError::InvalidSize {
                    name: name.into(),
                    size,
                });
            }
            Ok(star(size))
        }
        "complete" => Ok(complete(size)),
        "hex" => hex_torus(size),
        other => Err(GraphError::UnknownGenerator(other.to_string())),
    }
}

/// Parses generator specs such as `cycle:6`, `hex:2`, `star_4` or `path_3`.
pub fn parse_generator(spec: &str) -> Result<Graph, GraphError> {
    let (name, size) = spec
        .split_once(':')
        .or_else(|| spec.rsplit_once('_'))
        .ok_or_else(|| GraphError::UnknownGenerator(spec.to_string()))?;
    let size: usize = size
        .trim()
        .parse()
        .map_err(|_| GraphError::UnknownGenerator(spec.to_string()))?;
    named_graph(name.trim(), size)
}

/// Reads `u v` lines with an optional `p <n> <m>` header; `#` starts a
/// comment. Without a header the vertex count is one past the largest index.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: &str| GraphError::Parse {
            line: line_no,
            msg: msg.to_string(),
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "p" {
            if header.is_some() || !edges.is_empty() {
                return Err(parse_err("header must be the first non-comment line"));
            }
            if tokens.len() != 3 {
                return Err(parse_err("expected `p <n> <m>`"));
            }
            let n = tokens[1].parse().map_err(|_| parse_err("bad vertex count"))?;
            let m = tokens[2].parse().map_err(|_| parse_err("bad edge count"))?;
            header = Some((n, m));
            continue;
        }
        if tokens.len() != 2 {
            return Err(parse_err("expected `u v`"));
        }
        let u: usize = tokens[0].parse().map_err(|_| parse_err("bad vertex index"))?;
        let v: usize = tokens[1].parse().map_err(|_| parse_err("bad vertex index"))?;
        edges.push((u, v));
    }
    let n = match header {
        Some((n, m)) => {
            if m != edges.len() {
                return Err(GraphError::Parse {
                    line: 0,
                    msg: format!("header declares {m} edges, found {}", edges.len()),
                });
            }
            n
        }
        None => edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0),
    };
    Graph::new(n, edges)
}

/// Writes the header and one `u v` line per edge, in edge order.
pub fn serialize_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "p {} {}", g.vertex_count(), g.edge_count()).unwrap();
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom2(d: usize) -> usize {
        d * d.saturating_sub(1) / 2
    }

    #[test]
    fn line_graph_of_path_is_one_edge() {
        let lg = line_graph(&path(3));
        assert_eq!(lg.vertex_count(), 2);
        assert_eq!(lg.edges(), &[(0, 1)]);
    }

    #[test]
    fn line_graph_of_claw_is_triangle() {
        let lg = line_graph(&star(3));
        assert_eq!(lg.vertex_count(), 3);
        assert_eq!(lg.edge_count(), 3);
        assert!((0..3).all(|k| lg.degree(k) == 2));
    }

    #[test]
    fn line_graph_of_empty_graph() {
        let lg = line_graph(&Graph::empty(4));
        assert_eq!(lg.vertex_count(), 0);
        assert_eq!(lg.edge_count(), 0);
    }

    #[test]
    fn kagome_patch_counts() {
        let hex = hex_torus(2).unwrap();
        let kag = line_graph(&hex);
        assert_eq!(kag.vertex_count(), 12);
        assert_eq!(kag.edge_count(), 24);
        // every kagome site has four neighbours
        assert!((0..12).all(|k| kag.degree(k) == 4));
        // each site lies in exactly two triangles
        for e in 0..12 {
            let nb: Vec<_> = kag.neighbors(e).collect();
            let mut tri = 0;
            for (i, &x) in nb.iter().enumerate() {
                for &y in &nb[i + 1..] {
                    if kag.neighbors(x).any(|z| z == y) {
                        tri += 1;
                    }
                }
            }
            assert_eq!(tri, 2, "site {e}");
        }
    }

    #[test]
    fn hex_torus_sizes() {
        for l in 2..=6 {
            let g = hex_torus(l).unwrap();
            assert_eq!(g.vertex_count(), 2 * l * l);
            assert_eq!(g.edge_count(), 3 * l * l);
            assert!((0..g.vertex_count()).all(|k| g.degree(k) == 3));
            assert!(g.bipartition().is_some());
        }
        assert_eq!(hex_torus(1), Err(GraphError::TorusTooSmall(1)));
        assert!(hex_torus(0).is_err());
    }

    #[test]
    fn named_fixtures() {
        let c3 = named_graph("cycle", 3).unwrap();
        assert_eq!(c3.canonical(), complete(3));
        let s4 = named_graph("star", 4).unwrap();
        assert_eq!(s4.degree(0), 4);
        assert_eq!(s4.edge_count(), 4);
        let p2 = named_graph("path", 2).unwrap();
        assert_eq!(p2.edges(), &[(0, 1)]);
        assert!(matches!(
            named_graph("wheel", 5),
            Err(GraphError::UnknownGenerator(_))
        ));
        assert_eq!(parse_generator("hex:2").unwrap().edge_count(), 12);
        assert_eq!(parse_generator("star_4").unwrap(), s4);
    }

    #[test]
    fn star_line_graph_is_complete() {
        for d in 2..=7 {
            assert_eq!(line_graph(&star(d)).canonical(), complete(d));
        }
    }

    #[test]
    fn parse_examples() {
        let g = parse_edge_list("p 3 2\n0 1\n1 2").unwrap();
        assert_eq!(g, path(3));
        assert_eq!(parse_edge_list("0 0"), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            parse_edge_list("0 1\n1 0"),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            parse_edge_list("p 2 1\n0 2"),
            Err(GraphError::VertexOutOfRange { vertex: 2, n: 2 })
        );
        let g = parse_edge_list("# comment\n2 1 # trailing\n\n0 2\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(
            serialize_edge_list(&g.canonical()),
            "p 3 2\n0 2\n1 2\n"
        );
    }

    #[test]
    fn half_edges_partition_by_vertex() {
        let g = hex_torus(3).unwrap();
        let mut owned = vec![0usize; g.vertex_count()];
        for h in 0..g.half_edge_count() {
            let he = g.half_edge(h);
            assert_eq!(he.index(), h);
            owned[he.owner] += 1;
            assert_ne!(g.owner(h), g.owner(h ^ 1));
        }
        for k in 0..g.vertex_count() {
            assert_eq!(owned[k], g.degree(k));
        }
        let total: usize = (0..g.vertex_count()).map(|k| g.degree(k)).sum();
        assert_eq!(total, 2 * g.edge_count());
        let lg = line_graph(&g);
        let expected: usize = (0..g.vertex_count()).map(|k| binom2(g.degree(k))).sum();
        assert_eq!(lg.edge_count(), expected);
    }
}
