//! Monte Carlo paths of the walk.
//!
//! The walk holds at `x` for an exponential time of rate `mu_x / nu_x` and
//! then jumps to `y` with probability `mu_xy / mu_x`. Path `i` of a run with
//! seed `s` draws from `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`,
//! so results do not depend on how paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Jump times, strictly increasing, all `<= t_max`.
    pub times: Vec<f64>,
    /// `states[0]` is the start; `states[i + 1]` is entered at `times[i]`.
    pub states: Vec<usize>,
    /// The jump cap was reached before `t_max`.
    pub exploded: bool,
}

impl Trajectory {
    pub fn position(&self) -> usize {
        *self.states.last().expect("trajectory has a start")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub source: usize,
    pub t_max: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub jump_cap: u64,
    pub counts: Vec<u64>,
    pub empirical: Vec<f64>,
    pub exploded: u64,
    pub exploded_fraction: f64,
}

struct JumpTable {
    rate: Vec<f64>,
    cumulative: Vec<Vec<f64>>,
    targets: Vec<Vec<usize>>,
}

impl JumpTable {
    fn new(g: &WeightedGraph) -> Self {
        let mut cumulative = Vec::with_capacity(g.len());
        let mut targets = Vec::with_capacity(g.len());
        for x in 0..g.len() {
            let mut acc = 0.0;
            let (c, t): (Vec<f64>, Vec<usize>) = g
                .neighbors(x)
                .map(|(y, mu)| {
                    acc += mu;
                    (acc, y)
                })
                .unzip();
            cumulative.push(c);
            targets.push(t);
        }
        JumpTable {
            rate: (0..g.len()).map(|x| g.rate(x)).collect(),
            cumulative,
            targets,
        }
    }

    fn next<R: Rng>(&self, x: usize, rng: &mut R) -> usize {
        let c = &self.cumulative[x];
        let u = rng.random::<f64>() * c[c.len() - 1];
        let i = c.partition_point(|v| *v <= u).min(c.len() - 1);
        self.targets[x][i]
    }

    /// Walk until `t_max` or `jump_cap` jumps; `record` sees every jump.
    fn walk<R: Rng>(
        &self,
        source: usize,
        t_max: f64,
        jump_cap: u64,
        rng: &mut R,
        mut record: impl FnMut(f64, usize),
    ) -> (usize, bool) {
        let mut x = source;
        let mut now = 0.0;
        let mut jumps = 0;
        loop {
            let rate = self.rate[x];
            if rate == 0.0 {
                return (x, false);
            }
            let hold = -(1.0 - rng.random::<f64>()).ln() / rate;
            now += hold;
            if now > t_max {
                return (x, false);
            }
            x = self.next(x, rng);
            jumps += 1;
            record(now, x);
            if jumps >= jump_cap {
                return (x, true);
            }
        }
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

fn check(g: &WeightedGraph, source: usize, t_max: f64, jump_cap: u64) -> Result<()> {
    g.check_vertex(source)?;
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(invalid(format!("t_max {t_max} must be finite and non-negative")));
    }
    if jump_cap == 0 {
        return Err(invalid("jump cap must be at least 1"));
    }
    Ok(())
}

/// One recorded path (path index `path` of seed `seed`).
pub fn simulate_trajectory(
    g: &WeightedGraph,
    source: usize,
    t_max: f64,
    jump_cap: u64,
    seed: u64,
    path: u64,
) -> Result<Trajectory> {
    check(g, source, t_max, jump_cap)?;
    let table = JumpTable::new(g);
    let mut rng = path_rng(seed, path);
    let mut times = Vec::new();
    let mut states = vec![source];
    let (_, exploded) = table.walk(source, t_max, jump_cap, &mut rng, |t, y| {
        times.push(t);
        states.push(y);
    });
    Ok(Trajectory {
        times,
        states,
        exploded,
    })
}

/// Empirical distribution of `X_{t_max}` over `n_paths` independent paths.
/// Paths that hit `jump_cap` stop where they are and count as exploded.
pub fn simulate(
    g: &WeightedGraph,
    source: usize,
    t_max: f64,
    n_paths: u64,
    seed: u64,
    jump_cap: u64,
) -> Result<SimulationResult> {
    check(g, source, t_max, jump_cap)?;
    if n_paths == 0 {
        return Err(invalid("need at least one path"));
    }
    let table = JumpTable::new(g);
    let n = g.len();
    let (counts, exploded) = (0..n_paths)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], 0u64),
            |(mut counts, mut exploded), i| {
                let mut rng = path_rng(seed, i);
                let (end, hit_cap) = table.walk(source, t_max, jump_cap, &mut rng, |_, _| {});
                counts[end] += 1;
                exploded += hit_cap as u64;
                (counts, exploded)
            },
        )
        .reduce(
            || (vec![0u64; n], 0u64),
            |(mut a, ea), (b, eb)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, ea + eb)
            },
        );
    let total = n_paths as f64;
    Ok(SimulationResult {
        source,
        t_max,
        n_paths,
        seed,
        jump_cap,
        empirical: counts.iter().map(|c| *c as f64 / total).collect(),
        counts,
        exploded,
        exploded_fraction: exploded as f64 / total,
    })
}
