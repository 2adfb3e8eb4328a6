//! Transition probabilities `P_x(X_t = y)` on finite graphs.
//!
//! The default solver is uniformization. With `Λ = max_x mu_x / nu_x` and the
//! jump chain `Π = I + Q / Λ`,
//!
//! ```text
//! P(t) = sum_k  e^{-Λt} (Λt)^k / k!  Π^k
//! ```
//!
//! The series is cut once the Poisson tails on both sides are provably below
//! the requested tolerance. `err_bound` bounds the `l1` error from that cut
//! plus a floating-point rounding allowance that grows linearly in `Λt`, so
//! for large `Λt` it can exceed the requested tolerance. Killed kernels use the same series with the generator restricted
//! to the domain `B`, which makes `Π` sub-stochastic.

mod ode;
mod simulate;

pub use simulate::{simulate, simulate_trajectory, SimulationResult, Trajectory};

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;

pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SeriesUniformization,
    Ode,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::SeriesUniformization => "series-uniformization",
            Method::Ode => "ode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatKernelResult {
    pub source: usize,
    pub time: f64,
    pub probs: Vec<f64>,
    pub method: Method,
    pub err_bound: f64,
}

impl HeatKernelResult {
    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Kernel of the walk killed on leaving `domain`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KilledKernel {
    pub origin: usize,
    pub time: f64,
    pub domain: Vec<bool>,
    /// `P_o(X_t = z, exit time > t)`
    pub probs: Vec<f64>,
    /// Either `probs` or, when `normalized`, `(nu_o^{1/2} / nu_z) probs`.
    pub values: Vec<f64>,
    pub normalized: bool,
    pub method: Method,
    pub err_bound: f64,
}

impl KilledKernel {
    /// Surviving mass; falls short of one by the killed mass.
    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn check_time(t: f64, tol: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time {t} must be finite and non-negative")));
    }
    if !(tol > 0.0) {
        return Err(invalid(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Precomputed jump chain of the (possibly killed) walk.
pub(crate) struct JumpChain {
    lambda: f64,
    stay: Vec<f64>,
    // (target, weight) with weight = mu_xy / (nu_x Λ), targets inside the domain only
    out: Vec<Vec<(usize, f64)>>,
    domain: Option<Vec<bool>>,
    max_degree: usize,
}

impl JumpChain {
    pub(crate) fn new(g: &WeightedGraph, domain: Option<&[bool]>) -> Self {
        let inside = |x: usize| domain.is_none_or(|d| d[x]);
        let lambda = (0..g.len())
            .filter(|&x| inside(x))
            .map(|x| g.rate(x))
            .fold(0.0, f64::max);
        let mut stay = vec![0.0; g.len()];
        let mut out = vec![Vec::new(); g.len()];
        if lambda > 0.0 {
            for x in (0..g.len()).filter(|&x| inside(x)) {
                stay[x] = 1.0 - g.rate(x) / lambda;
                out[x] = g
                    .neighbors(x)
                    .filter(|&(y, _)| inside(y))
                    .map(|(y, mu)| (y, mu / (g.nu(x) * lambda)))
                    .collect();
            }
        } else {
            stay.iter_mut().for_each(|s| *s = 1.0);
        }
        let max_degree = out.iter().map(Vec::len).max().unwrap_or(0);
        JumpChain {
            max_degree,
            lambda,
            stay,
            out,
            domain: domain.map(<[bool]>::to_vec),
        }
    }

    fn step(&self, v: &[f64], next: &mut [f64]) {
        for (y, slot) in next.iter_mut().enumerate() {
            *slot = v[y] * self.stay[y];
        }
        for (x, targets) in self.out.iter().enumerate() {
            let vx = v[x];
            if vx != 0.0 {
                for &(y, w) in targets {
                    next[y] += vx * w;
                }
            }
        }
    }

    /// Row vector `init` evolved for time `t`; returns `(v, err_bound)`.
    ///
    /// Poisson weights come from the ratio recurrence outward from the mode,
    /// normalised over the kept window. Summing logs from `k = 0` instead
    /// drifts by about `u Λt` and is visible once `Λt` reaches the hundreds.
    pub(crate) fn evolve(&self, init: &[f64], t: f64, tol: f64) -> (Vec<f64>, f64) {
        let mut v: Vec<f64> = init.to_vec();
        if let Some(d) = &self.domain {
            v.iter_mut().zip(d).filter(|(_, inside)| !**inside).for_each(|(x, _)| *x = 0.0);
        }
        let mass: f64 = v.iter().map(|x| x.abs()).sum();
        let lt = self.lambda * t;
        if lt == 0.0 || mass == 0.0 {
            return (v, 0.0);
        }
        let (first, weights, dropped) = poisson_window(lt, tol / (2.0 * mass));
        let last = first + weights.len() - 1;

        let mut acc = vec![0.0; v.len()];
        let mut next = vec![0.0; v.len()];
        for k in 0..=last {
            if k > 0 {
                self.step(&v, &mut next);
                std::mem::swap(&mut v, &mut next);
            }
            if k >= first {
                let w = weights[k - first];
                for (a, x) in acc.iter_mut().zip(&v) {
                    *a += w * x;
                }
            }
        }
        // Truncation: the kept weights are inflated by at most the dropped
        // fraction, which is also the mass that is missing.
        let truncation = 2.0 * dropped * mass;
        // Rounding: each step costs (degree + 2) ulps of l1 mass and does not
        // amplify earlier errors; every accumulation and weight adds a few more.
        let steps = last as f64;
        let ulps = steps * (self.max_degree as f64 + 2.0) + 4.0 * weights.len() as f64 + 2.0 * steps;
        let rounding = 1.01 * ulps * f64::EPSILON * mass;
        (acc, truncation + rounding)
    }
}

/// Normalised Poisson(`lt`) weights on a window `[first, first + len)` whose
/// complement has relative mass at most `2 * target`. Returns the window
/// start, the weights, and a bound on the dropped fraction.
fn poisson_window(lt: f64, target: f64) -> (usize, Vec<f64>, f64) {
    let mode = lt.floor();
    // unnormalised, with the mode term equal to one
    let mut right = vec![1.0];
    let mut sum = 1.0;
    let mut k = mode;
    let right_tail = loop {
        // sum_{j>k} w_j <= w_{k+1} / (1 - lt/(k+2)) since k+2 > lt past the mode
        let w_next = right.last().unwrap() * lt / (k + 1.0);
        let tail = w_next / (1.0 - lt / (k + 2.0));
        if tail <= target * sum || w_next == 0.0 {
            break tail;
        }
        right.push(w_next);
        sum += w_next;
        k += 1.0;
    };
    let mut left = Vec::new();
    let mut k = mode;
    let mut w = 1.0;
    let left_tail = loop {
        if k == 0.0 {
            break 0.0;
        }
        // sum_{j<k} w_j <= w_{k-1} / (1 - (k-1)/lt)
        let w_prev = w * k / lt;
        let tail = w_prev / (1.0 - (k - 1.0) / lt);
        if tail <= target * sum || w_prev == 0.0 {
            break tail;
        }
        left.push(w_prev);
        sum += w_prev;
        w = w_prev;
        k -= 1.0;
    };
    let first = mode as usize - left.len();
    let weights: Vec<f64> = left.iter().rev().chain(&right).map(|w| w / sum).collect();
    (first, weights, (left_tail + right_tail) / sum)
}

fn point_mass(n: usize, x: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[x] = 1.0;
    v
}

/// `P_source(X_t = ·)` by uniformization.
pub fn heat_kernel(g: &WeightedGraph, source: usize, t: f64, tol: f64) -> Result<HeatKernelResult> {
    heat_kernel_with(g, source, t, tol, Method::SeriesUniformization)
}

pub fn heat_kernel_with(
    g: &WeightedGraph,
    source: usize,
    t: f64,
    tol: f64,
    method: Method,
) -> Result<HeatKernelResult> {
    g.check_vertex(source)?;
    check_time(t, tol)?;
    let init = point_mass(g.len(), source);
    let (probs, err_bound) = match method {
        Method::SeriesUniformization => JumpChain::new(g, None).evolve(&init, t, tol),
        Method::Ode => ode::integrate(g, &init, t, tol),
    };
    Ok(HeatKernelResult {
        source,
        time: t,
        probs,
        method,
        err_bound,
    })
}

/// Kernels from `source` at every time in `times` (any order), propagating
/// incrementally through the sorted times. The tolerance is split evenly
/// across the steps, so every returned vector is within `tol` in `l1`.
pub fn heat_kernel_path(
    g: &WeightedGraph,
    source: usize,
    times: &[f64],
    tol: f64,
) -> Result<Vec<HeatKernelResult>> {
    g.check_vertex(source)?;
    let rows = evolve_path(g, None, &point_mass(g.len(), source), times, tol)?;
    Ok(rows
        .into_iter()
        .zip(times)
        .map(|((probs, err_bound), &t)| HeatKernelResult {
            source,
            time: t,
            probs,
            method: Method::SeriesUniformization,
            err_bound,
        })
        .collect())
}

pub(crate) fn evolve_path(
    g: &WeightedGraph,
    domain: Option<&[bool]>,
    init: &[f64],
    times: &[f64],
    tol: f64,
) -> Result<Vec<(Vec<f64>, f64)>> {
    for &t in times {
        check_time(t, tol)?;
    }
    let chain = JumpChain::new(g, domain);
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let step_tol = tol / times.len().max(1) as f64;
    let mut out = vec![(Vec::new(), 0.0); times.len()];
    let mut current = init.to_vec();
    let mut now = 0.0;
    let mut err = 0.0;
    for i in order {
        let dt = times[i] - now;
        let (v, e) = chain.evolve(&current, dt, step_tol);
        current = v;
        err += e;
        now = times[i];
        out[i] = (current.clone(), err);
    }
    Ok(out)
}

/// Full transition matrix at time `t`, row `x` = `P_x(X_t = ·)`.
pub fn transition_matrix(g: &WeightedGraph, t: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
    check_time(t, tol)?;
    let chain = JumpChain::new(g, None);
    Ok((0..g.len())
        .map(|x| chain.evolve(&point_mass(g.len(), x), t, tol).0)
        .collect())
}

/// Kernel of the walk started at `origin` and killed on its first exit from
/// `domain`.
pub fn killed_kernel(
    g: &WeightedGraph,
    domain: &[bool],
    origin: usize,
    t: f64,
    tol: f64,
    normalized: bool,
) -> Result<KilledKernel> {
    Ok(killed_kernel_path(g, domain, origin, &[t], tol, normalized)?.remove(0))
}

pub fn killed_kernel_path(
    g: &WeightedGraph,
    domain: &[bool],
    origin: usize,
    times: &[f64],
    tol: f64,
    normalized: bool,
) -> Result<Vec<KilledKernel>> {
    g.check_vertex(origin)?;
    if domain.len() != g.len() {
        return Err(Error::Unbound {
            expected: g.len(),
            got: domain.len(),
        });
    }
    if !domain[origin] {
        return Err(invalid(format!(
            "origin {} is not in the killing domain",
            g.id(origin)
        )));
    }
    let rows = evolve_path(g, Some(domain), &point_mass(g.len(), origin), times, tol)?;
    Ok(rows
        .into_iter()
        .zip(times)
        .map(|((probs, err_bound), &t)| {
            let values = if normalized {
                normalize(g, origin, &probs)
            } else {
                probs.clone()
            };
            KilledKernel {
                origin,
                time: t,
                domain: domain.to_vec(),
                probs,
                values,
                normalized,
                method: Method::SeriesUniformization,
                err_bound,
            }
        })
        .collect())
}

/// `u(z) = (nu_o^{1/2} / nu_z) P_o(X_t = z)`.
pub fn normalize(g: &WeightedGraph, origin: usize, probs: &[f64]) -> Vec<f64> {
    let s = g.nu(origin).sqrt();
    probs
        .iter()
        .enumerate()
        .map(|(z, p)| s * p / g.nu(z))
        .collect()
}

/// `<u^2, w> = sum_z u(z)^2 w(z) nu_z` for the normalized `u` built from
/// `probs`, evaluated as `sum_z P(z)^2 (nu_o / nu_z) w(z)` so that only
/// measure ratios enter.
pub fn normalized_sq_sum(
    g: &WeightedGraph,
    origin: usize,
    probs: &[f64],
    weight: impl Fn(usize) -> f64,
) -> f64 {
    let nu_o = g.nu(origin);
    probs
        .iter()
        .enumerate()
        .map(|(z, p)| p * p * (nu_o / g.nu(z)) * weight(z))
        .sum()
}

/// Which solution of the heat equation to follow from a point mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evolution {
    /// The walk on the whole graph.
    Full,
    /// The walk killed on leaving the given vertex set.
    Killed(Vec<bool>),
}

impl Evolution {
    pub fn label(&self) -> &'static str {
        match self {
            Evolution::Full => "full",
            Evolution::Killed(_) => "killed",
        }
    }
}

/// `(P_o(X_t = ·), err_bound)` at every time, for the chosen evolution.
pub fn evolution_path(
    g: &WeightedGraph,
    origin: usize,
    times: &[f64],
    tol: f64,
    evolution: &Evolution,
) -> Result<Vec<(Vec<f64>, f64)>> {
    g.check_vertex(origin)?;
    match evolution {
        Evolution::Full => evolve_path(g, None, &point_mass(g.len(), origin), times, tol),
        Evolution::Killed(domain) => Ok(killed_kernel_path(g, domain, origin, times, tol, false)?
            .into_iter()
            .map(|k| (k.probs, k.err_bound))
            .collect()),
    }
}

/// `(t, P_x(X_t = x))` for every `t` in `times`.
pub fn on_diagonal_curve(g: &WeightedGraph, x: usize, times: &[f64], tol: f64) -> Result<Vec<(f64, f64)>> {
    Ok(heat_kernel_path(g, x, times, tol)?
        .into_iter()
        .map(|r| (r.time, r.probs[x]))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{path, random_connected, two_vertex, RandomGraphSpec};

    fn two_state(t: f64) -> f64 {
        (1.0 + (-2.0 * t).exp()) / 2.0
    }

    #[test]
    fn zero_time_is_point_mass() {
        let g = path(4).unwrap();
        let r = heat_kernel(&g, 2, 0.0, DEFAULT_TOL).unwrap();
        assert_eq!(r.probs, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(r.err_bound, 0.0);
    }

    #[test]
    fn two_state_closed_form() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let r = heat_kernel(&g, 0, 1.0, DEFAULT_TOL).unwrap();
        assert!((r.probs[0] - 0.567_667_641_618_306_3).abs() < 1e-10);
        assert!(r.err_bound <= DEFAULT_TOL);
        for m in [Method::Ode, Method::SeriesUniformization] {
            let r = heat_kernel_with(&g, 0, 2.5, 1e-10, m).unwrap();
            assert!((r.probs[0] - two_state(2.5)).abs() < 1e-8, "{m:?}");
        }
    }

    #[test]
    fn conservation() {
        let g = random_connected(&RandomGraphSpec::new(15), 1).unwrap();
        let r = heat_kernel(&g, 3, 5.0, DEFAULT_TOL).unwrap();
        assert!((r.mass() - 1.0).abs() <= r.err_bound + 1e-13);
        assert!(r.probs.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn large_intensity_does_not_underflow() {
        // Λt = 4000: e^{-Λt} underflows, log-space weights do not
        let g = two_vertex(1.0, 1.0, 20.0).unwrap();
        let r = heat_kernel(&g, 0, 100.0, DEFAULT_TOL).unwrap();
        assert!((r.probs[0] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn killed_single_vertex_survival() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        for t in [0.0, 0.3, 1.0, 4.0] {
            let k = killed_kernel(&g, &[true, false], 0, t, 1e-12, false).unwrap();
            assert!((k.probs[0] - (-t).exp()).abs() < 1e-12);
            assert_eq!(k.probs[1], 0.0);
        }
    }

    #[test]
    fn killed_on_everything_is_full_kernel() {
        let g = random_connected(&RandomGraphSpec::new(8), 5).unwrap();
        let full = heat_kernel(&g, 2, 1.7, 1e-12).unwrap();
        let k = killed_kernel(&g, &[true; 8], 2, 1.7, 1e-12, true).unwrap();
        let expect = normalize(&g, 2, &full.probs);
        for z in 0..8 {
            assert!((k.probs[z] - full.probs[z]).abs() < 1e-12);
            assert!((k.values[z] - expect[z]).abs() < 1e-11);
        }
    }

    #[test]
    fn killed_rejects_origin_outside() {
        let g = path(3).unwrap();
        assert!(killed_kernel(&g, &[false, true, true], 0, 1.0, 1e-10, true).is_err());
    }

    #[test]
    fn bad_arguments() {
        let g = path(3).unwrap();
        assert!(heat_kernel(&g, 0, -1.0, 1e-10).is_err());
        assert!(heat_kernel(&g, 0, 1.0, 0.0).is_err());
        assert!(heat_kernel(&g, 7, 1.0, 1e-10).is_err());
    }

    #[test]
    fn path_matches_independent_evaluation() {
        let g = random_connected(&RandomGraphSpec::new(9), 2).unwrap();
        let times = [3.0, 0.5, 0.0, 1.25];
        let path = heat_kernel_path(&g, 4, &times, 1e-11).unwrap();
        for (r, &t) in path.iter().zip(&times) {
            let direct = heat_kernel(&g, 4, t, 1e-12).unwrap();
            for z in 0..g.len() {
                assert!((r.probs[z] - direct.probs[z]).abs() < 1e-10);
            }
            assert_eq!(r.time, t);
        }
    }

    #[test]
    fn on_diagonal_two_state_grid() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let times: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let curve = on_diagonal_curve(&g, 0, &times, 1e-11).unwrap();
        assert_eq!(curve[0].1, 1.0);
        for (t, p) in curve {
            assert!((p - two_state(t)).abs() < 1e-10);
        }
    }
}
