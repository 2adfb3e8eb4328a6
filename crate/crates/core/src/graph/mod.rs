//! Weighted graphs, the walk generator and the vertex-measure inner product.
//!
//! A [`WeightedGraph`] carries a positive vertex measure `nu` and symmetric
//! positive edge weights `mu`. The random walk it drives has generator
//!
//! ```text
//! (L f)(x) = (1 / nu_x) * sum_y (f(y) - f(x)) * mu_xy
//! ```
//!
//! and is self-adjoint with respect to `<f, g> = sum_x f(x) g(x) nu_x`.
//! Vertex ids are opaque strings; every numeric routine works on the dense
//! index assigned at construction time.

mod load;

pub use load::{load_graph, load_graph_file, parse_json, parse_text, GraphDocument};

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

/// An undirected edge stored once, with `a < b` as dense indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub mu: f64,
}

/// Connected, finite weighted graph. Immutable once built.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    nu: Vec<f64>,
    edges: Vec<Edge>,
    // (neighbour, mu, edge index), sorted by neighbour
    adjacency: Vec<Vec<(usize, f64, usize)>>,
}

impl WeightedGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn id(&self, x: usize) -> &str {
        &self.ids[x]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn nu(&self, x: usize) -> f64 {
        self.nu[x]
    }

    pub fn nus(&self) -> &[f64] {
        &self.nu
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `x` as `(y, mu_xy)` pairs.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[x].iter().map(|&(y, mu, _)| (y, mu))
    }

    /// Neighbours of `x` as `(y, mu_xy, edge index)`.
    pub fn incident(&self, x: usize) -> &[(usize, f64, usize)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    pub fn mu(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(z, _, _)| z)
            .ok()
            .map(|i| self.adjacency[x][i].1)
    }

    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(z, _, _)| z)
            .ok()
            .map(|i| self.adjacency[x][i].2)
    }

    /// Total incident weight `mu_x = sum_y mu_xy`.
    pub fn mu_sum(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, mu, _)| mu).sum()
    }

    /// Total jump rate `mu_x / nu_x` out of `x`.
    pub fn rate(&self, x: usize) -> f64 {
        self.mu_sum(x) / self.nu[x]
    }

    pub fn max_rate(&self) -> f64 {
        (0..self.len()).map(|x| self.rate(x)).fold(0.0, f64::max)
    }

    pub fn total_nu(&self) -> f64 {
        self.nu.iter().sum()
    }

    /// Same edge weights with `nu_x := mu_x`, so every vertex holds for an
    /// Exp(1) time (the constant speed random walk).
    pub fn csrw(&self) -> WeightedGraph {
        let mut g = self.clone();
        g.nu = (0..self.len()).map(|x| self.mu_sum(x)).collect();
        g
    }

    /// Same edge weights with `nu ≡ 1` (the variable speed random walk).
    pub fn vsrw(&self) -> WeightedGraph {
        let mut g = self.clone();
        g.nu = vec![1.0; self.len()];
        g
    }

    /// Multiply every `mu` and `nu` by `c`. Transition probabilities do not
    /// change.
    pub fn scaled(&self, c: f64) -> Result<WeightedGraph> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(crate::error::invalid(format!("scale factor {c} must be positive")));
        }
        let mut g = self.clone();
        g.nu.iter_mut().for_each(|v| *v *= c);
        g.edges.iter_mut().for_each(|e| e.mu *= c);
        for list in &mut g.adjacency {
            for entry in list.iter_mut() {
                entry.1 *= c;
            }
        }
        Ok(g)
    }

    /// Hop distances from `root` (breadth-first).
    pub fn hop_distances(&self, root: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.len()];
        let mut queue = VecDeque::new();
        dist[root] = Some(0);
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap_or(0);
            for (y, _) in self.neighbors(x) {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    fn check_bound(&self, f: &VertexFunction) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Unbound {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    pub fn check_vertex(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::VertexIndex(x))
        }
    }
}

/// A real function on the vertices of a graph, indexed densely.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction(vec![c; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        VertexFunction(v)
    }
}

impl std::ops::Index<usize> for VertexFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `(L f)(x) = (1/nu_x) sum_y (f(y) - f(x)) mu_xy`.
pub fn apply_generator(g: &WeightedGraph, f: &VertexFunction) -> Result<VertexFunction> {
    g.check_bound(f)?;
    let out = (0..g.len())
        .map(|x| {
            let s: f64 = g.neighbors(x).map(|(y, mu)| (f[y] - f[x]) * mu).sum();
            s / g.nu(x)
        })
        .collect();
    Ok(VertexFunction(out))
}

/// `<f1, f2> = sum_x f1(x) f2(x) nu_x`.
pub fn inner_product(g: &WeightedGraph, f1: &VertexFunction, f2: &VertexFunction) -> Result<f64> {
    g.check_bound(f1)?;
    g.check_bound(f2)?;
    Ok(f1
        .0
        .iter()
        .zip(&f2.0)
        .zip(g.nus())
        .map(|((a, b), nu)| a * b * nu)
        .sum())
}

pub fn norm(g: &WeightedGraph, f: &VertexFunction) -> Result<f64> {
    inner_product(g, f, f).map(f64::sqrt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexRate {
    /// `mu_x = sum_y mu_xy`
    pub mu_x: f64,
    /// Holding-time parameter `mu_x / nu_x`.
    pub rate: f64,
}

pub fn vertex_rates(g: &WeightedGraph) -> Vec<VertexRate> {
    (0..g.len())
        .map(|x| {
            let mu_x = g.mu_sum(x);
            VertexRate {
                mu_x,
                rate: mu_x / g.nu(x),
            }
        })
        .collect()
}

/// Incremental construction with validation on [`GraphBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    nu: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    seen: HashMap<(usize, usize), ()>,
}

impl GraphBuilder {
    pub fn vertex(mut self, id: impl Into<String>, nu: f64) -> Result<Self> {
        self.add_vertex(id, nu)?;
        Ok(self)
    }

    pub fn edge(mut self, a: &str, b: &str, mu: f64) -> Result<Self> {
        self.add_edge(a, b, mu)?;
        Ok(self)
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, nu: f64) -> Result<usize> {
        let id = id.into();
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::NonPositiveWeight {
                what: format!("vertex {id}"),
                value: nu,
            });
        }
        if self.index.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        let x = self.ids.len();
        self.index.insert(id.clone(), x);
        self.ids.push(id);
        self.nu.push(nu);
        Ok(x)
    }

    pub fn add_edge(&mut self, a: &str, b: &str, mu: f64) -> Result<()> {
        let x = *self
            .index
            .get(a)
            .ok_or_else(|| Error::UnknownVertex(a.to_string()))?;
        let y = *self
            .index
            .get(b)
            .ok_or_else(|| Error::UnknownVertex(b.to_string()))?;
        self.add_edge_index(x, y, mu)
    }

    pub fn add_edge_index(&mut self, x: usize, y: usize, mu: f64) -> Result<()> {
        if x >= self.ids.len() {
            return Err(Error::VertexIndex(x));
        }
        if y >= self.ids.len() {
            return Err(Error::VertexIndex(y));
        }
        if x == y {
            return Err(Error::SelfLoop(self.ids[x].clone()));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::NonPositiveWeight {
                what: format!("edge {} -- {}", self.ids[x], self.ids[y]),
                value: mu,
            });
        }
        let key = (x.min(y), x.max(y));
        if self.seen.insert(key, ()).is_some() {
            return Err(Error::DuplicateEdge(self.ids[x].clone(), self.ids[y].clone()));
        }
        self.edges.push((key.0, key.1, mu));
        Ok(())
    }

    /// Validate connectivity and freeze.
    pub fn build(self) -> Result<WeightedGraph> {
        if self.ids.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let n = self.ids.len();
        let mut edges: Vec<Edge> = self
            .edges
            .into_iter()
            .map(|(a, b, mu)| Edge { a, b, mu })
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push((e.b, e.mu, i));
            adjacency[e.b].push((e.a, e.mu, i));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(y, _, _)| y);
        }
        let g = WeightedGraph {
            ids: self.ids,
            index: self.index,
            nu: self.nu,
            edges,
            adjacency,
        };
        let unreached = g.hop_distances(0).iter().filter(|d| d.is_none()).count();
        if unreached > 0 {
            return Err(Error::Disconnected {
                root: g.ids[0].clone(),
                unreached,
                total: n,
            });
        }
        Ok(g)
    }
}
