//! Standard graph families and seeded random connected graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::graph::{GraphBuilder, WeightedGraph};

/// Distribution for random vertex measures or edge weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    Constant(f64),
    Uniform { lo: f64, hi: f64 },
    LogUniform { lo: f64, hi: f64 },
    /// Integers in `lo..=hi`; scaling by powers of ten stays exact.
    Integer { lo: u32, hi: u32 },
}

impl WeightLaw {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightLaw::Constant(c) => c,
            WeightLaw::Uniform { lo, hi } => rng.random_range(lo..=hi),
            WeightLaw::LogUniform { lo, hi } => rng.random_range(lo.ln()..=hi.ln()).exp(),
            WeightLaw::Integer { lo, hi } => rng.random_range(lo..=hi) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomGraphSpec {
    pub n: usize,
    /// Probability of each non-tree edge.
    pub extra_edge_prob: f64,
    pub nu: WeightLaw,
    pub mu: WeightLaw,
}

impl RandomGraphSpec {
    pub fn new(n: usize) -> Self {
        RandomGraphSpec {
            n,
            extra_edge_prob: 0.15,
            nu: WeightLaw::LogUniform { lo: 0.1, hi: 10.0 },
            mu: WeightLaw::LogUniform { lo: 0.1, hi: 10.0 },
        }
    }

    pub fn weights(mut self, nu: WeightLaw, mu: WeightLaw) -> Self {
        self.nu = nu;
        self.mu = mu;
        self
    }

    pub fn density(mut self, p: f64) -> Self {
        self.extra_edge_prob = p;
        self
    }
}

/// Random connected graph: a random recursive tree plus independent extra
/// edges. Vertex ids are `"0"`, `"1"`, ...
pub fn random_connected(spec: &RandomGraphSpec, seed: u64) -> Result<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = GraphBuilder::default();
    for x in 0..spec.n {
        b.add_vertex(x.to_string(), spec.nu.sample(&mut rng))?;
    }
    let mut present = vec![vec![false; spec.n]; spec.n];
    for x in 1..spec.n {
        let parent = rng.random_range(0..x);
        present[parent][x] = true;
    }
    for x in 0..spec.n {
        for y in (x + 1)..spec.n {
            if !present[x][y] && rng.random::<f64>() < spec.extra_edge_prob {
                present[x][y] = true;
            }
        }
    }
    for x in 0..spec.n {
        for y in (x + 1)..spec.n {
            if present[x][y] {
                b.add_edge_index(x, y, spec.mu.sample(&mut rng))?;
            }
        }
    }
    b.build()
}

fn unit_vertices(n: usize) -> Result<GraphBuilder> {
    let mut b = GraphBuilder::default();
    for x in 0..n {
        b.add_vertex(x.to_string(), 1.0)?;
    }
    Ok(b)
}

/// Path `0 - 1 - ... - (n-1)` with unit weights.
pub fn path(n: usize) -> Result<WeightedGraph> {
    let mut b = unit_vertices(n)?;
    for x in 1..n {
        b.add_edge_index(x - 1, x, 1.0)?;
    }
    b.build()
}

/// Complete graph with unit weights.
pub fn complete(n: usize) -> Result<WeightedGraph> {
    let mut b = unit_vertices(n)?;
    for x in 0..n {
        for y in (x + 1)..n {
            b.add_edge_index(x, y, 1.0)?;
        }
    }
    b.build()
}

/// Star with centre `0` and `leaves` leaves, unit weights.
pub fn star(leaves: usize) -> Result<WeightedGraph> {
    let mut b = unit_vertices(leaves + 1)?;
    for x in 1..=leaves {
        b.add_edge_index(0, x, 1.0)?;
    }
    b.build()
}

/// Cycle with unit weights.
pub fn cycle(n: usize) -> Result<WeightedGraph> {
    let mut b = unit_vertices(n)?;
    for x in 0..n {
        b.add_edge_index(x, (x + 1) % n, 1.0)?;
    }
    b.build()
}

/// Two vertices `a`, `b` joined by one edge.
pub fn two_vertex(nu_a: f64, nu_b: f64, mu: f64) -> Result<WeightedGraph> {
    WeightedGraph::builder()
        .vertex("a", nu_a)?
        .vertex("b", nu_b)?
        .edge("a", "b", mu)?
        .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graphs_are_connected_and_reproducible() {
        for seed in 0..20 {
            let spec = RandomGraphSpec::new(2 + seed as usize);
            let g = random_connected(&spec, seed).unwrap();
            let h = random_connected(&spec, seed).unwrap();
            assert_eq!(g.edges(), h.edges());
            assert_eq!(g.nus(), h.nus());
            assert!(g.edge_count() >= g.len() - 1);
        }
    }

    #[test]
    fn families() {
        assert_eq!(path(5).unwrap().edge_count(), 4);
        assert_eq!(complete(4).unwrap().edge_count(), 6);
        assert_eq!(star(4).unwrap().degree(0), 4);
        assert_eq!(cycle(6).unwrap().edge_count(), 6);
    }

    #[test]
    fn log_uniform_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let law = WeightLaw::LogUniform { lo: 1e-3, hi: 1e3 };
        for _ in 0..1000 {
            let v = law.sample(&mut rng);
            assert!((1e-3..=1e3).contains(&v));
        }
    }
}
