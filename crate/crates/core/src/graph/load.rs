//! Graph file formats.
//!
//! Line format, whitespace separated, `#` starts a comment:
//!
//! ```text
//! v <id> <nu>
//! e <id1> <id2> <mu>
//! ```
//!
//! Each undirected edge appears once. The structured format is JSON with
//! `vertices: [{id, nu}]` and `edges: [{a, b, mu}]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GraphBuilder, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: String,
    pub nu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub a: String,
    pub b: String,
    pub mu: f64,
}

impl GraphDocument {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        GraphDocument {
            vertices: (0..g.len())
                .map(|x| VertexRecord {
                    id: g.id(x).to_string(),
                    nu: g.nu(x),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    a: g.id(e.a).to_string(),
                    b: g.id(e.b).to_string(),
                    mu: e.mu,
                })
                .collect(),
        }
    }

    pub fn build(&self) -> Result<WeightedGraph> {
        let mut b = GraphBuilder::default();
        for v in &self.vertices {
            b.add_vertex(v.id.clone(), v.nu)?;
        }
        for e in &self.edges {
            b.add_edge(&e.a, &e.b, e.mu)?;
        }
        b.build()
    }

    /// Render in the line format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("v {} {}\n", v.id, v.nu));
        }
        for e in &self.edges {
            out.push_str(&format!("e {} {} {}\n", e.a, e.b, e.mu));
        }
        out
    }
}

/// Parse either format; a leading `{` selects JSON.
pub fn load_graph(source: &str) -> Result<WeightedGraph> {
    if source.trim_start().starts_with('{') {
        parse_json(source)
    } else {
        parse_text(source)
    }
}

pub fn load_graph_file(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let text = std::fs::read_to_string(path)?;
    load_graph(&text)
}

pub fn parse_json(source: &str) -> Result<WeightedGraph> {
    let doc: GraphDocument =
        serde_json::from_str(source).map_err(|e| Error::Structured(e.to_string()))?;
    doc.build()
}

pub fn parse_text(source: &str) -> Result<WeightedGraph> {
    let mut b = GraphBuilder::default();
    let mut edges = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["v", id, nu] => {
                b.add_vertex(*id, number(nu, line)?)?;
            }
            ["e", a, c, mu] => edges.push((line, a.to_string(), c.to_string(), number(mu, line)?)),
            ["v", ..] => return Err(parse_err(line, "expected `v <id> <nu>`")),
            ["e", ..] => return Err(parse_err(line, "expected `e <id1> <id2> <mu>`")),
            [tag, ..] => return Err(parse_err(line, format!("unknown record type `{tag}`"))),
        }
    }
    for (line, a, c, mu) in edges {
        b.add_edge(&a, &c, mu).map_err(|e| match e {
            Error::UnknownVertex(id) => parse_err(line, format!("edge refers to undeclared vertex `{id}`")),
            other => other,
        })?;
    }
    b.build()
}

fn number(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{s}` is not a number")))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_connected_graph() {
        let g = load_graph("v a 1\nv b 1\ne a b 1\n").unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.nus(), &[1.0, 1.0]);
        assert_eq!(g.mu(0, 1), Some(1.0));
    }

    #[test]
    fn duplicate_edge_reversed() {
        let err = load_graph("v a 1\nv b 1\ne a b 1\ne b a 2\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge(..)), "{err}");
    }

    #[test]
    fn path_degree_sequence_by_traversal() {
        let g = load_graph("# P3\nv x 1\nv y 2 # middle\nv z 1\ne x y 1\ne y z 1\n").unwrap();
        // oracle: count neighbours discovered by a BFS from each vertex
        let degrees: Vec<usize> = (0..g.len())
            .map(|x| {
                g.hop_distances(x)
                    .iter()
                    .filter(|d| **d == Some(1))
                    .count()
            })
            .collect();
        assert_eq!(degrees, vec![1, 2, 1]);
        assert_eq!(g.nus(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match load_graph("v a 1\nv b x\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match load_graph("v a 1\n\nq b\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        match load_graph("v a 1\ne a b 1\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_positive_and_disconnected() {
        assert!(matches!(
            load_graph("v a 1\nv b 1\ne a b 0\n"),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            load_graph("v a 1\nv b 1\n"),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let g = load_graph("v a 1\nv b 2.5\nv c 1\ne a b 1\ne b c 0.5\n").unwrap();
        let json = serde_json::to_string(&GraphDocument::from_graph(&g)).unwrap();
        let h = load_graph(&json).unwrap();
        assert_eq!(g.nus(), h.nus());
        assert_eq!(g.edges(), h.edges());
        let again = load_graph(&GraphDocument::from_graph(&h).to_text()).unwrap();
        assert_eq!(again.edges(), g.edges());
    }
}
