use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{GClassFunction, TestFunction};
use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;
use crate::kernel::{evolution_path, normalized_sq_sum, Evolution};
use crate::metric::AdaptedMetric;
use crate::report::fmt_num;

/// Relative tolerance of the membership inequalities.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Base relative tolerance of the J-monotonicity check.
pub const J_BASE_TOL: f64 = 1e-8;
/// Coupled J tolerances above this are refused rather than reported as passes.
pub const J_TOL_LIMIT: f64 = 1e-3;

fn sinh2_half(b: f64) -> f64 {
    let s = (b / 2.0).sinh();
    s * s
}

fn rel_slack(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

fn check_times(h: &TestFunction, times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (lo, hi) = h.interval();
    for &t in times {
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
    }
    Ok(())
}

fn log_values(h: &TestFunction, t: f64) -> Result<Vec<f64>> {
    (0..h.len())
        .map(|x| {
            let v = h.log_eval(t, x);
            // +inf would make h infinite, −inf or NaN non-positive
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonPositiveTestFunction { t, vertex: x })
            }
        })
        .collect()
}

fn check_len(g: &WeightedGraph, h: &TestFunction) -> Result<()> {
    if h.len() != g.len() {
        return Err(Error::Unbound {
            expected: g.len(),
            got: h.len(),
        });
    }
    Ok(())
}

/// Worst edge inequality at one time: `(slack, (x, y), lhs, rhs)` where the
/// time derivative is taken at `y`.
fn edge_worst(
    g: &WeightedGraph,
    metric: &AdaptedMetric,
    h: &TestFunction,
    t: f64,
) -> Result<(f64, (usize, usize), f64, f64)> {
    let logs = log_values(h, t)?;
    let mut worst = (f64::INFINITY, (0, 0), 0.0, 0.0);
    for e in g.edges() {
        let lhs = sinh2_half(logs[e.a] - logs[e.b]);
        let d = metric.dist(e.a, e.b);
        for (x, y) in [(e.a, e.b), (e.b, e.a)] {
            let rhs = -d * d * h.dlog_dt(t, y);
            let s = rel_slack(lhs, rhs);
            if s < worst.0 {
                worst = (s, (x, y), lhs, rhs);
            }
        }
    }
    if worst.0 == f64::INFINITY {
        // a single vertex has no edges
        worst.0 = 0.0;
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub label: String,
    pub pass: bool,
    pub points: usize,
    /// Smallest relative slack `(rhs − lhs) / max(|lhs|, |rhs|)`.
    pub worst_slack: f64,
    pub worst_t: f64,
    /// Oriented edge `(x, y)`; the time derivative is taken at `y`.
    pub worst_edge: (usize, usize),
    pub worst_lhs: f64,
    pub worst_rhs: f64,
    /// A numerical pass on a finite grid, not a proof.
    pub evidence: &'static str,
}

/// Edge-wise membership test on every grid time.
pub fn is_in_f(g: &WeightedGraph, metric: &AdaptedMetric, h: &TestFunction, times: &[f64]) -> Result<MembershipReport> {
    check_len(g, h)?;
    check_times(h, times)?;
    let per_time: Vec<_> = times
        .par_iter()
        .map(|&t| edge_worst(g, metric, h, t).map(|w| (t, w)))
        .collect::<Result<_>>()?;
    let (t, (slack, edge, lhs, rhs)) = per_time
        .into_iter()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .expect("non-empty grid");
    Ok(MembershipReport {
        label: h.label(),
        pass: slack >= -MEMBERSHIP_TOL,
        points: times.len() * g.edge_count() * 2,
        worst_slack: slack,
        worst_t: t,
        worst_edge: edge,
        worst_lhs: lhs,
        worst_rhs: rhs,
        evidence: "numerical grid check",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub label: String,
    pub pass: bool,
    pub points: usize,
    pub worst_slack: f64,
    pub worst_t: f64,
    pub worst_vertex: usize,
    pub worst_lhs: f64,
    pub worst_rhs: f64,
}

/// Vertex-aggregated form:
/// `(1/ν_y) Σ_x sinh²((log h(x) − log h(y))/2) μ_xy <= −∂_t log h(t, y)`.
pub fn check_condition_2_2(g: &WeightedGraph, h: &TestFunction, times: &[f64]) -> Result<ConditionReport> {
    check_len(g, h)?;
    check_times(h, times)?;
    let per_time: Vec<_> = times
        .par_iter()
        .map(|&t| -> Result<_> {
            let logs = log_values(h, t)?;
            let mut worst = (f64::INFINITY, 0, 0.0, 0.0);
            for y in 0..g.len() {
                let lhs: f64 = g
                    .neighbors(y)
                    .map(|(x, mu)| sinh2_half(logs[x] - logs[y]) * mu)
                    .sum::<f64>()
                    / g.nu(y);
                let rhs = -h.dlog_dt(t, y);
                let s = rel_slack(lhs, rhs);
                if s < worst.0 {
                    worst = (s, y, lhs, rhs);
                }
            }
            Ok((t, worst))
        })
        .collect::<Result<_>>()?;
    let (t, (slack, y, lhs, rhs)) = per_time
        .into_iter()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .expect("non-empty grid");
    Ok(ConditionReport {
        label: h.label(),
        pass: slack >= -MEMBERSHIP_TOL,
        points: times.len() * g.len(),
        worst_slack: slack,
        worst_t: t,
        worst_vertex: y,
        worst_lhs: lhs,
        worst_rhs: rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JPoint {
    pub t: f64,
    pub j: f64,
    pub err_bound: f64,
    pub worst_edge: (usize, usize),
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JReport {
    pub label: String,
    pub evolution: &'static str,
    pub pass: bool,
    pub tol: f64,
    /// Largest `J(t_{i+1}) / J(t_i) − 1` over consecutive grid times.
    pub max_relative_increase: f64,
    pub worst_step: Option<usize>,
    pub membership: MembershipReport,
    pub curve: Vec<JPoint>,
}

/// `J(t) = <u(t)², h(t)>` along the grid for the normalized solution from a
/// point mass at `origin`.
///
/// The tolerance is `1e-8 + 10·err / min J` where `err` bounds the kernel
/// error propagated into `J`; a grid whose coupled tolerance exceeds
/// [`J_TOL_LIMIT`] is refused with [`Error::ToleranceTooLoose`].
#[allow(clippy::too_many_arguments)]
pub fn check_j_monotone(
    g: &WeightedGraph,
    metric: &AdaptedMetric,
    origin: usize,
    evolution: &Evolution,
    h: &TestFunction,
    times: &[f64],
    tol: f64,
) -> Result<JReport> {
    check_len(g, h)?;
    check_times(h, times)?;
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("J grid must be strictly increasing"));
    }
    let paths = evolution_path(g, origin, times, tol, evolution)?;
    let nu_o = g.nu(origin);
    let max_ratio = (0..g.len()).map(|z| nu_o / g.nu(z)).fold(0.0, f64::max);

    let curve: Vec<JPoint> = times
        .par_iter()
        .zip(&paths)
        .map(|(&t, (probs, err))| -> Result<JPoint> {
            let logs = log_values(h, t)?;
            let j = normalized_sq_sum(g, origin, probs, |z| logs[z].exp());
            let h_max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
            let (slack, edge, _, _) = edge_worst(g, metric, h, t)?;
            Ok(JPoint {
                t,
                j,
                err_bound: err * (2.0 + err) * max_ratio * h_max,
                worst_edge: edge,
                slack,
            })
        })
        .collect::<Result<_>>()?;

    let min_j = curve.iter().map(|p| p.j).fold(f64::INFINITY, f64::min);
    let max_err = curve.iter().map(|p| p.err_bound).fold(0.0, f64::max);
    let j_tol = J_BASE_TOL + 10.0 * max_err / min_j;
    if !(j_tol <= J_TOL_LIMIT) {
        return Err(Error::ToleranceTooLoose(j_tol));
    }

    let mut max_inc = f64::NEG_INFINITY;
    let mut worst_step = None;
    for (i, w) in curve.windows(2).enumerate() {
        let inc = w[1].j / w[0].j - 1.0;
        if inc > max_inc {
            max_inc = inc;
            worst_step = Some(i);
        }
    }
    let membership = is_in_f(g, metric, h, times)?;
    Ok(JReport {
        label: h.label(),
        evolution: evolution.label(),
        pass: curve.windows(2).all(|w| w[1].j <= w[0].j * (1.0 + j_tol)),
        tol: j_tol,
        max_relative_increase: if worst_step.is_some() { max_inc } else { 0.0 },
        worst_step,
        membership,
        curve,
    })
}

/// Columns `t,J,worst_edge,slack`; the edge is written `x->y` with vertex ids.
pub fn write_j_curve_csv<W: Write>(g: &WeightedGraph, report: &JReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "J", "worst_edge", "slack"])?;
    for p in &report.curve {
        let edge = if g.edge_count() == 0 {
            String::new()
        } else {
            format!("{}->{}", g.id(p.worst_edge.0), g.id(p.worst_edge.1))
        };
        w.write_record([fmt_num(p.t), fmt_num(p.j), edge, fmt_num(p.slack)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyLemmaReport {
    pub tau: f64,
    pub t_end: f64,
    pub r: f64,
    pub radius: f64,
    /// `<u(T)², 1 − 1_{B_R}>`.
    pub lhs: f64,
    /// `‖u(τ)‖²`.
    pub norm_sq: f64,
    /// `<u(τ)², 1 − 1_{B_r}>`.
    pub inner_tail: f64,
    /// `g(τ, r) / g(T, R)`.
    pub ratio_inner: f64,
    /// `g(τ, R) / g(T, R)`.
    pub ratio_outer: f64,
    pub rhs: f64,
    pub err_bound: f64,
    pub pass: bool,
    pub membership: MembershipReport,
}

/// Number of times in the membership grid on `[τ, T]`.
const KEY_LEMMA_GRID: usize = 65;

/// Tail mass at `T` against the two-term bound built from `u(τ)` and a
/// monotone radial `g`, with `R` taken from `g`'s cap.
///
/// `g` must be non-decreasing in `r` and `g(·, d(o, ·) ∧ R)` must pass the
/// membership test on `[τ, T]`; otherwise [`Error::NotAdmissible`].
#[allow(clippy::too_many_arguments)]
pub fn check_key_lemma(
    g: &WeightedGraph,
    metric: &AdaptedMetric,
    evolution: &Evolution,
    gclass: &GClassFunction,
    tau: f64,
    t_end: f64,
    r: f64,
    tol: f64,
) -> Result<KeyLemmaReport> {
    let radius = gclass.cap;
    let o = gclass.origin;
    g.check_vertex(o)?;
    if !(tau >= 0.0 && t_end >= tau && t_end.is_finite()) {
        return Err(invalid(format!("need T >= tau >= 0, got tau = {tau}, T = {t_end}")));
    }
    if !(r >= 0.0 && radius >= r) {
        return Err(invalid(format!("need R >= r >= 0, got r = {r}, R = {radius}")));
    }
    let (lo, hi) = gclass.family.interval();
    if tau < lo || t_end > hi {
        return Err(Error::OutOfRange { t: t_end, lo, hi });
    }

    let dist = metric.row(o);
    let mut radii: Vec<f64> = dist.iter().map(|d| d.min(radius)).chain([0.0, r, radius]).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let grid: Vec<f64> = (0..KEY_LEMMA_GRID)
        .map(|i| tau + (t_end - tau) * i as f64 / (KEY_LEMMA_GRID - 1) as f64)
        .collect();
    let defect = gclass.monotonicity_defect(&grid, &radii);
    if defect > MEMBERSHIP_TOL {
        return Err(Error::NotAdmissible(format!(
            "g(t, .) decreases by {defect:e} in log along the radii"
        )));
    }
    let h = gclass.test_function(g, metric)?;
    let membership = is_in_f(g, metric, &h, &grid)?;
    if !membership.pass {
        return Err(Error::NotAdmissible(format!(
            "membership fails at t = {} on edge {}->{} (slack {:e})",
            membership.worst_t,
            g.id(membership.worst_edge.0),
            g.id(membership.worst_edge.1),
            membership.worst_slack
        )));
    }

    let paths = evolution_path(g, o, &[tau, t_end], tol, evolution)?;
    let nu_o = g.nu(o);
    let max_ratio = (0..g.len()).map(|z| nu_o / g.nu(z)).fold(0.0, f64::max);
    let (p_tau, e_tau) = &paths[0];
    let (p_end, e_end) = &paths[1];
    let outside = |cut: f64| move |z: usize| if dist[z] >= cut { 1.0 } else { 0.0 };
    let lhs = normalized_sq_sum(g, o, p_end, outside(radius));
    let norm_sq = normalized_sq_sum(g, o, p_tau, |_| 1.0);
    let inner_tail = normalized_sq_sum(g, o, p_tau, outside(r));

    let ln_end = gclass.log_g(t_end, radius);
    let ratio_inner = (gclass.log_g(tau, r) - ln_end).exp();
    let ratio_outer = (gclass.log_g(tau, radius) - ln_end).exp();
    let rhs = ratio_inner * norm_sq + ratio_outer * inner_tail;
    let sq = |e: f64| e * (2.0 + e) * max_ratio;
    let err_bound = sq(*e_end) + (ratio_inner + ratio_outer) * sq(*e_tau);
    Ok(KeyLemmaReport {
        tau,
        t_end,
        r,
        radius,
        lhs,
        norm_sq,
        inner_tail,
        ratio_inner,
        ratio_outer,
        rhs,
        err_bound,
        pass: lhs <= rhs * (1.0 + 1e-12) + err_bound,
        membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, path, two_vertex};
    use crate::graph::VertexFunction;
    use crate::imp::{make_drift, make_gaussian, make_lemma23, make_rho, RadialFamily, RhoVariant};
    use crate::metric::default_metric;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn constant_one_is_member_with_equality() {
        let g = path(4).unwrap();
        let m = default_metric(&g);
        let h = make_drift(0.0, VertexFunction::zeros(4)).unwrap();
        let r = is_in_f(&g, &m, &h, &[0.0, 1.0]).unwrap();
        assert!(r.pass);
        assert_eq!(r.worst_slack, 0.0);
        let c = check_condition_2_2(&g, &h, &[0.0, 1.0]).unwrap();
        assert!(c.pass && c.worst_lhs == 0.0 && c.worst_rhs == 0.0);
    }

    #[test]
    fn increasing_in_time_is_not_member() {
        let g = path(3).unwrap();
        let m = default_metric(&g);
        let h = TestFunction::custom("exp(t)", 3, (0.0, f64::INFINITY), |t, _| t, |_, _| 1.0);
        let r = is_in_f(&g, &m, &h, &[0.5]).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_rhs, -m.dist(0, 1).powi(2));
        assert!(!check_condition_2_2(&g, &h, &[0.5]).unwrap().pass);
    }

    #[test]
    fn drift_on_two_vertices_closed_form() {
        let g = two_vertex(1.0, 1.0, 4.0).unwrap();
        let m = crate::metric::shortest_path_metric(&g, crate::metric::EdgeLengths(vec![0.5])).unwrap();
        assert!(m.is_adapted());
        let rho = make_rho(&m, &g, 0, 1.0, RhoVariant::CappedDist).unwrap();
        let h = make_drift(0.25, rho).unwrap();
        let r = is_in_f(&g, &m, &h, &[0.0, 2.0]).unwrap();
        // b = aρ(b) = 1/8, lhs = (e^b + e^{-b} − 2)/4, rhs = d² a²/2
        let b: f64 = 0.125;
        let lhs = (b.exp() + (-b).exp() - 2.0) / 4.0;
        let rhs = 0.25 * 0.0625 / 2.0;
        assert!((r.worst_lhs - lhs).abs() < 1e-15);
        assert!((r.worst_rhs - rhs).abs() < 1e-15);
        assert!(r.pass);
    }

    #[test]
    fn lemma23_member_on_complete_four() {
        let g = complete(4).unwrap().csrw();
        let m = default_metric(&g);
        let times = grid(0.0, 20.0, 201);
        for tau in [0.1, 1.0, 10.0] {
            for cap in [0.5, 1.0, 3.0] {
                let rho = make_rho(&m, &g, 0, cap, RhoVariant::CappedDist).unwrap();
                let h = make_lemma23(tau, rho).unwrap();
                let r = is_in_f(&g, &m, &h, &times).unwrap();
                assert!(r.pass, "tau {tau} cap {cap}: {r:?}");
                assert!(check_condition_2_2(&g, &h, &times).unwrap().pass);
            }
        }
    }

    #[test]
    fn gaussian_boundary_parameters_on_path_three() {
        let g = path(3).unwrap();
        let m = default_metric(&g);
        let rho = make_rho(&m, &g, 0, 1.0, RhoVariant::Reflected).unwrap();
        let h = make_gaussian(5.0, 1.0, 24.0 / 5.0, 1.0, rho).unwrap();
        assert!(is_in_f(&g, &m, &h, &grid(0.0, 1.0, 51)).unwrap().pass);
        assert!(matches!(
            is_in_f(&g, &m, &h, &[1.5]),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn j_for_constant_h_is_squared_norm() {
        let g = path(5).unwrap();
        let m = default_metric(&g);
        let h = make_drift(0.0, VertexFunction::zeros(5)).unwrap();
        let times = grid(0.0, 4.0, 41);
        let rep = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &times, 1e-12).unwrap();
        assert!(rep.pass);
        // ‖u(t)‖² = P_o(X_{2t} = o)
        let ret = crate::kernel::heat_kernel(&g, 0, 2.0 * times[10], 1e-13).unwrap().probs[0];
        assert!((rep.curve[10].j - ret).abs() < 1e-10);
    }

    #[test]
    fn j_monotone_drift_two_vertex() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let m = default_metric(&g);
        let rho = make_rho(&m, &g, 0, 10.0, RhoVariant::CappedDist).unwrap();
        let h = make_drift(0.25, rho).unwrap();
        let rep = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &grid(0.0, 5.0, 101), 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.membership.pass);
    }

    #[test]
    fn j_monotone_killed_lemma23_path_five() {
        let g = path(5).unwrap();
        let m = default_metric(&g);
        let domain = vec![true, true, true, false, false];
        let rho = make_rho(&m, &g, 0, 4.0, RhoVariant::CappedDist).unwrap();
        let h = make_lemma23(1.0, rho).unwrap();
        let rep = check_j_monotone(&g, &m, 0, &Evolution::Killed(domain), &h, &grid(0.0, 5.0, 51), 1e-12).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.evolution, "killed");
    }

    #[test]
    fn loose_kernel_tolerance_is_refused() {
        let g = path(3).unwrap();
        let m = default_metric(&g);
        let h = make_drift(0.0, VertexFunction::zeros(3)).unwrap();
        let err = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &grid(0.0, 50.0, 5), 1e-2).unwrap_err();
        assert!(matches!(err, Error::ToleranceTooLoose(_)));
    }

    #[test]
    fn increasing_h_breaks_j() {
        // e^{t} h-weight grows faster than ‖u‖² decays on a two-state chain
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let m = default_metric(&g);
        let h = TestFunction::custom("exp(t)", 2, (0.0, f64::INFINITY), |t, _| t, |_, _| 1.0);
        let rep = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &grid(0.0, 3.0, 31), 1e-12).unwrap();
        assert!(!rep.pass);
        assert!(!rep.membership.pass);
    }

    #[test]
    fn key_lemma_path_five() {
        let g = path(5).unwrap().csrw();
        let m = default_metric(&g);
        let gc = GClassFunction::new(RadialFamily::Lemma23 { tau: 1.0 }, RhoVariant::CappedDist, 0, 1.5).unwrap();
        let rep = check_key_lemma(&g, &m, &Evolution::Full, &gc, 0.0, 1.0, 0.5, 1e-12).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!((rep.norm_sq - 1.0).abs() < 1e-15);
        assert_eq!(rep.inner_tail, 0.0);

        // r = R and τ = T collapse cases
        let same = check_key_lemma(&g, &m, &Evolution::Full, &gc, 0.5, 0.5, 1.5, 1e-12).unwrap();
        assert!(same.pass);
        assert!(same.ratio_inner <= 1.0 + 1e-15);
    }

    #[test]
    fn key_lemma_rejects_non_member() {
        let g = path(3).unwrap();
        let m = default_metric(&g);
        // drift a = 1/4 scaled up by a large cap is fine; reflected drift decreases in r
        let gc = GClassFunction::new(RadialFamily::Drift { a: 0.25 }, RhoVariant::Reflected, 0, 2.0).unwrap();
        assert!(matches!(
            check_key_lemma(&g, &m, &Evolution::Full, &gc, 0.0, 1.0, 0.5, 1e-12),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn j_curve_csv() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let m = default_metric(&g);
        let h = make_drift(0.0, VertexFunction::zeros(2)).unwrap();
        let rep = check_j_monotone(&g, &m, 0, &Evolution::Full, &h, &[0.0, 1.0], 1e-12).unwrap();
        let mut buf = Vec::new();
        write_j_curve_csv(&g, &rep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,J,worst_edge,slack\n0,1.00000000000e0,"));
        assert_eq!(text.lines().count(), 3);
    }
}
