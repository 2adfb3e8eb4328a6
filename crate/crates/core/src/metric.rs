//! Adapted metrics.
//!
//! A metric `d` on the vertices is *adapted* when every edge has
//! `d(x, y) <= 1` and every vertex satisfies
//!
//! ```text
//! (1 / nu_x) * sum_{y ~ x} d(x, y)^2 * mu_xy <= 1.
//! ```
//!
//! The default construction assigns each edge the length
//! `min{1, sqrt(nu_x / mu_x), sqrt(nu_y / mu_y)}` and takes shortest paths.
//! Shortest-path distances never exceed the edge length, so the quadratic
//! constraint at `x` is at most `(1/nu_x) sum_y (nu_x/mu_x) mu_xy = 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};

/// Additive tolerance for the adapted-metric constraints.
pub const ADAPTED_TOL: f64 = 1e-12;

/// One length per edge, indexed like [`WeightedGraph::edges`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EdgeLengths(pub Vec<f64>);

impl EdgeLengths {
    pub fn uniform(g: &WeightedGraph, len: f64) -> Self {
        EdgeLengths(vec![len; g.edge_count()])
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }
}

pub fn default_edge_lengths(g: &WeightedGraph) -> EdgeLengths {
    let cap: Vec<f64> = (0..g.len())
        .map(|x| (g.nu(x) / g.mu_sum(x)).sqrt())
        .collect();
    EdgeLengths(
        g.edges()
            .iter()
            .map(|e| 1f64.min(cap[e.a]).min(cap[e.b]))
            .collect(),
    )
}

/// Apply `l <id1> <id2> <length>` overrides on top of `base`.
pub fn parse_length_overrides(g: &WeightedGraph, base: EdgeLengths, text: &str) -> Result<EdgeLengths> {
    let mut lengths = base;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            ["l", a, b, len] => {
                let len: f64 = len.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("`{len}` is not a number"),
                })?;
                let (x, y) = (g.index_of(a)?, g.index_of(b)?);
                let e = g
                    .edge_index(x, y)
                    .ok_or_else(|| Error::NotAnEdge(a.to_string(), b.to_string()))?;
                lengths.0[e] = len;
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: "expected `l <id1> <id2> <length>`".into(),
                })
            }
        }
    }
    Ok(lengths)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn check_lengths(g: &WeightedGraph, lengths: &EdgeLengths) -> Result<()> {
    if lengths.0.len() != g.edge_count() {
        return Err(invalid(format!(
            "{} edge lengths for {} edges",
            lengths.0.len(),
            g.edge_count()
        )));
    }
    if let Some((i, l)) = lengths
        .0
        .iter()
        .enumerate()
        .find(|(_, l)| !(**l > 0.0 && l.is_finite()))
    {
        let e = g.edges()[i];
        return Err(Error::NonPositiveWeight {
            what: format!("length of edge {} -- {}", g.id(e.a), g.id(e.b)),
            value: *l,
        });
    }
    Ok(())
}

/// Dijkstra from `source` over positive edge lengths.
pub fn single_source(g: &WeightedGraph, lengths: &EdgeLengths, source: usize) -> Result<Vec<f64>> {
    g.check_vertex(source)?;
    check_lengths(g, lengths)?;
    Ok(dijkstra(g, lengths, source))
}

fn dijkstra(g: &WeightedGraph, lengths: &EdgeLengths, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.len()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        dist: 0.0,
        vertex: source,
    });
    while let Some(HeapEntry { dist: d, vertex: x }) = heap.pop() {
        if d > dist[x] {
            continue;
        }
        for &(y, _, e) in g.incident(x) {
            let nd = d + lengths.get(e);
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(HeapEntry { dist: nd, vertex: y });
            }
        }
    }
    dist
}

/// Per-vertex value of the quadratic constraint, and the largest edge distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdaptedReport {
    /// `(1/nu_x) sum_y d(x,y)^2 mu_xy`
    #[serde(skip)]
    pub vertex_values: Vec<f64>,
    /// `1 - vertex_values[x]`
    pub vertex_slacks: Vec<f64>,
    pub max_edge_dist: f64,
    pub pass: bool,
}

impl AdaptedReport {
    pub fn worst_vertex(&self) -> usize {
        self.vertex_values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(x, _)| x)
            .unwrap_or(0)
    }
}

/// Shortest-path metric with its compliance certificate.
#[derive(Debug, Clone)]
pub struct AdaptedMetric {
    n: usize,
    edge_length: EdgeLengths,
    dist: Vec<f64>,
    certificate: AdaptedReport,
}

impl AdaptedMetric {
    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn edge_lengths(&self) -> &EdgeLengths {
        &self.edge_length
    }

    /// Certificate computed at construction time; also see [`verify_adapted`].
    pub fn certificate(&self) -> &AdaptedReport {
        &self.certificate
    }

    pub fn is_adapted(&self) -> bool {
        self.certificate.pass
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `max_y d(o, y)`
    pub fn eccentricity(&self, o: usize) -> f64 {
        self.row(o).iter().copied().fold(0.0, f64::max)
    }

    /// Indicator of the open ball `B_R = {z : d(o, z) < R}`.
    pub fn ball(&self, o: usize, radius: f64) -> Vec<bool> {
        self.row(o).iter().map(|d| *d < radius).collect()
    }

    /// `d(o, ·)` as a vertex function.
    pub fn distance_function(&self, o: usize) -> VertexFunction {
        VertexFunction(self.row(o).to_vec())
    }
}

pub fn shortest_path_metric(g: &WeightedGraph, lengths: EdgeLengths) -> Result<AdaptedMetric> {
    check_lengths(g, &lengths)?;
    let n = g.len();
    let mut dist = Vec::with_capacity(n * n);
    for x in 0..n {
        dist.extend(dijkstra(g, &lengths, x));
    }
    // path sums accumulate in different orders from each end
    for x in 0..n {
        for y in (x + 1)..n {
            let d = dist[x * n + y].min(dist[y * n + x]);
            dist[x * n + y] = d;
            dist[y * n + x] = d;
        }
    }
    let mut metric = AdaptedMetric {
        n,
        edge_length: lengths,
        dist,
        certificate: AdaptedReport {
            vertex_values: Vec::new(),
            vertex_slacks: Vec::new(),
            max_edge_dist: 0.0,
            pass: false,
        },
    };
    metric.certificate = verify_adapted(g, &metric)?;
    Ok(metric)
}

/// Default adapted metric of `g`.
pub fn default_metric(g: &WeightedGraph) -> AdaptedMetric {
    shortest_path_metric(g, default_edge_lengths(g)).expect("default lengths are positive")
}

pub fn verify_adapted(g: &WeightedGraph, m: &AdaptedMetric) -> Result<AdaptedReport> {
    if m.len() != g.len() {
        return Err(Error::Unbound {
            expected: g.len(),
            got: m.len(),
        });
    }
    let vertex_values: Vec<f64> = (0..g.len())
        .map(|x| {
            let s: f64 = g
                .neighbors(x)
                .map(|(y, mu)| m.dist(x, y).powi(2) * mu)
                .sum();
            s / g.nu(x)
        })
        .collect();
    let max_edge_dist = g
        .edges()
        .iter()
        .map(|e| m.dist(e.a, e.b))
        .fold(0.0, f64::max);
    let pass = max_edge_dist <= 1.0 + ADAPTED_TOL
        && vertex_values.iter().all(|v| *v <= 1.0 + ADAPTED_TOL);
    Ok(AdaptedReport {
        vertex_slacks: vertex_values.iter().map(|v| 1.0 - v).collect(),
        vertex_values,
        max_edge_dist,
        pass,
    })
}
