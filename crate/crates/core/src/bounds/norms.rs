//! Weighted `l²` estimates for the normalized solution
//! `u(t, z) = ν_o^{1/2} P_o(X_t = z) / ν_z` started from a point mass.

use serde::Serialize;

use super::{
    ln_far_tail_bound, ln_weighted_norm_bound, passes, tail_mass_bound, ConstantLedger,
    DomainFlag, FittedProfile,
};
use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use crate::kernel::{evolution_path, normalized_sq_sum, Evolution};
use crate::metric::AdaptedMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormCheck {
    /// `<u², 1 − 1_{B_R}>` against the two-branch Gaussian tail.
    #[serde(rename = "prop2.6")]
    TailMass,
    /// `<u², exp(θ₂ (d ∧ 2t)²/t)> <= C1 A^β / f(2αt)`.
    #[serde(rename = "prop3.1")]
    WeightedNorm,
    /// `<u², 1 − 1_{B_R}> <= C0 A^β / f(2αt) · e^{−θ₁R²/t}`, `t >= R >= 10³`.
    #[serde(rename = "prop3.4")]
    FarTail,
}

impl NormCheck {
    pub fn tag(self) -> &'static str {
        match self {
            NormCheck::TailMass => "prop2.6",
            NormCheck::WeightedNorm => "prop3.1",
            NormCheck::FarTail => "prop3.4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormRow {
    pub check: NormCheck,
    pub t: f64,
    pub radius: f64,
    pub lhs: f64,
    pub err_bound: f64,
    pub log_rhs: f64,
    pub log_ratio: f64,
    pub pass: bool,
    pub domain: DomainFlag,
}

/// Regularity data for the profile at the origin.
#[derive(Debug, Clone, Copy)]
pub struct RegularityInput<'a> {
    pub profile: &'a FittedProfile,
    pub alpha: f64,
    pub beta: u32,
}

/// Exact left-hand sides on the finite graph against the right-hand sides.
///
/// The ball estimate is always checked; the weighted-norm and far-tail
/// estimates need `regularity` (a fitted profile at `origin`).
#[allow(clippy::too_many_arguments)]
pub fn norm_tail_bound_check(
    g: &WeightedGraph,
    metric: &AdaptedMetric,
    origin: usize,
    radius: f64,
    times: &[f64],
    evolution: &Evolution,
    regularity: Option<RegularityInput<'_>>,
    constants: &ConstantLedger,
    tol: f64,
) -> Result<Vec<NormRow>> {
    g.check_vertex(origin)?;
    if !(radius >= 0.0) {
        return Err(invalid(format!("radius {radius} must be non-negative")));
    }
    if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid("times must be positive"));
    }
    if let Some(r) = regularity {
        if r.profile.vertex != origin {
            return Err(invalid("the fitted profile must belong to the origin"));
        }
    }
    let paths = evolution_path(g, origin, times, tol, evolution)?;
    let nu_o = g.nu(origin);
    let max_ratio = (0..g.len()).map(|z| nu_o / g.nu(z)).fold(0.0, f64::max);
    let dist = metric.row(origin);
    let outside = |z: usize| if dist[z] >= radius { 1.0 } else { 0.0 };

    let ln_f = match regularity {
        Some(r) => Some(r.profile.ln_f(&times.iter().map(|t| 2.0 * r.alpha * t).collect::<Vec<_>>())?),
        None => None,
    };

    let mut rows = Vec::new();
    for (i, (&t, (probs, err))) in times.iter().zip(&paths).enumerate() {
        let sq_err = err * (2.0 + err) * max_ratio;
        let tail = normalized_sq_sum(g, origin, probs, outside);

        let (log_rhs, domain) = if radius > 0.0 {
            (tail_mass_bound(radius, t)?.min(), DomainFlag::InDomain)
        } else {
            (0.0, DomainFlag::OutOfDomain)
        };
        rows.push(row(NormCheck::TailMass, t, radius, tail, sq_err, log_rhs, domain));

        if let (Some(r), Some(ln_f)) = (regularity, ln_f.as_ref()) {
            let weight = |z: usize| {
                let rho = dist[z].min(2.0 * t);
                (constants.theta2 * rho * rho / t).exp()
            };
            let weighted = normalized_sq_sum(g, origin, probs, weight);
            let w_max = (constants.theta2 * 4.0 * t).exp();
            let log_rhs = ln_weighted_norm_bound(ln_f[i], r.profile.a, r.beta, constants);
            rows.push(row(
                NormCheck::WeightedNorm,
                t,
                radius,
                weighted,
                sq_err * w_max,
                log_rhs,
                DomainFlag::InDomain,
            ));
            let far = ln_far_tail_bound(ln_f[i], r.profile.a, r.beta, radius, t, constants);
            rows.push(row(NormCheck::FarTail, t, radius, tail, sq_err, far.log_bound, far.domain));
        }
    }
    Ok(rows)
}

fn row(check: NormCheck, t: f64, radius: f64, lhs: f64, err: f64, log_rhs: f64, domain: DomainFlag) -> NormRow {
    NormRow {
        check,
        t,
        radius,
        lhs,
        err_bound: err,
        log_rhs,
        log_ratio: lhs.ln() - log_rhs,
        pass: passes(lhs, err, log_rhs),
        domain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::fit_profile;
    use crate::generators::{path, two_vertex};
    use crate::regularity::{derived_constants, Interval, RegularityOptions};

    #[test]
    fn radius_beyond_graph_gives_zero() {
        let g = path(4).unwrap();
        let m = crate::metric::default_metric(&g);
        let rows = norm_tail_bound_check(
            &g,
            &m,
            0,
            m.eccentricity(0) + 1.0,
            &[0.5, 5.0],
            &Evolution::Full,
            None,
            &ConstantLedger::paper(),
            1e-12,
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.lhs == 0.0 && r.pass));
    }

    #[test]
    fn two_state_tail_long_branch() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let m = crate::metric::default_metric(&g);
        let r = m.dist(0, 1);
        let times: Vec<f64> = (0..20).map(|k| r * (1.0 + k as f64)).collect();
        let rows = norm_tail_bound_check(&g, &m, 0, r, &times, &Evolution::Full, None, &ConstantLedger::paper(), 1e-12)
            .unwrap();
        for (row, t) in rows.iter().zip(&times) {
            // tail is u(b)^2 ν_b = P(X_t = b)^2 with P = (1 − e^{−2t})/2
            let p = (1.0 - (-2.0 * t).exp()) / 2.0;
            assert!((row.lhs - p * p).abs() < 1e-10);
            assert!((row.log_rhs + r * r / (8.0 * t)).abs() < 1e-15);
            assert!(row.pass);
        }
    }

    #[test]
    fn weighted_norm_on_path_five() {
        let g = path(5).unwrap().csrw();
        let m = crate::metric::default_metric(&g);
        let iv = Interval::new(1e-3, 200.0).unwrap();
        let opts = RegularityOptions {
            per_decade: 32,
            ..Default::default()
        };
        let prof = fit_profile(&g, 0, 2.0, 1.0, iv, &opts, 1e-12).unwrap();
        let c = derived_constants(2.0, 1.0).unwrap();
        let reg = RegularityInput {
            profile: &prof,
            alpha: c.alpha,
            beta: c.beta,
        };
        let rows = norm_tail_bound_check(
            &g,
            &m,
            0,
            2.0,
            &[0.5, 1.0, 4.0, 16.0],
            &Evolution::Full,
            Some(reg),
            &ConstantLedger::paper(),
            1e-12,
        )
        .unwrap();
        assert_eq!(rows.len(), 12);
        assert!(rows.iter().all(|r| r.pass));
        // radius 2 < 10³: far-tail rows are flagged
        assert!(rows
            .iter()
            .filter(|r| r.check == NormCheck::FarTail)
            .all(|r| r.domain == DomainFlag::OutOfDomain));
    }
}
