//! Space-time test functions `h(t, x)` for the integral maximum principle
//! and numerical checks of their defining inequalities.
//!
//! A positive `h` belongs to the admissible class on an interval when, on
//! every edge `x ~ y` and in both orientations,
//! `|h(t,x) − h(t,y)|² / (4 h(t,x) h(t,y)) <= −d(x,y)² ∂_t log h(t,y)`.
//! For such `h` and any solution `u` of the heat equation,
//! `J(t) = <u(t)², h(t)>` is non-increasing.

mod checks;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use checks::{
    check_condition_2_2, check_j_monotone, check_key_lemma, is_in_f, write_j_curve_csv,
    ConditionReport, JPoint, JReport, KeyLemmaReport, MembershipReport, J_BASE_TOL, J_TOL_LIMIT,
    MEMBERSHIP_TOL,
};

use crate::error::{invalid, Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};
use crate::metric::AdaptedMetric;

/// How the weight `ρ` is built from the distance to an origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoVariant {
    /// `ρ = d(o, ·) ∧ R`.
    CappedDist,
    /// `ρ = (R − d(o, ·)) ∨ 1`.
    Reflected,
}

impl RhoVariant {
    /// `ρ` as a function of the distance `r`.
    pub fn apply(self, r: f64, cap: f64) -> f64 {
        match self {
            RhoVariant::CappedDist => r.min(cap),
            RhoVariant::Reflected => (cap - r).max(1.0),
        }
    }
}

/// Smallest `d(x, y) − |ρ(x) − ρ(y)|` over edges.
pub fn rho_lipschitz_slack(g: &WeightedGraph, metric: &AdaptedMetric, rho: &VertexFunction) -> f64 {
    g.edges()
        .iter()
        .map(|e| metric.dist(e.a, e.b) - (rho[e.a] - rho[e.b]).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn make_rho(metric: &AdaptedMetric, g: &WeightedGraph, o: usize, cap: f64, variant: RhoVariant) -> Result<VertexFunction> {
    g.check_vertex(o)?;
    if !(cap >= 0.0 && cap.is_finite()) {
        return Err(invalid(format!("cap R = {cap} must be finite and non-negative")));
    }
    let rho = VertexFunction(metric.row(o).iter().map(|&r| variant.apply(r, cap)).collect());
    let slack = rho_lipschitz_slack(g, metric, &rho);
    if slack < -1e-12 {
        return Err(Error::NotAdmissible(format!(
            "rho is not 1-Lipschitz for the metric (slack {slack})"
        )));
    }
    Ok(rho)
}

/// Radial profiles `g(t, ρ)` given by `log g` and `∂_t log g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialFamily {
    /// `log g = (ρ − c) log(1 ∨ ρ/c) − t/τ` with `c = e(t + τ)/4`.
    Lemma23 { tau: f64 },
    /// `log g = aρ − a²t/2`.
    Drift { a: f64 },
    /// `log g = −ρ² / (D(s − t + Δ))` on `[0, s]`.
    Gaussian {
        #[serde(rename = "D")]
        d: f64,
        #[serde(rename = "R")]
        r_cap: f64,
        delta: f64,
        s: f64,
    },
}

impl RadialFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialFamily::Lemma23 { tau } if !(tau > 0.0 && tau.is_finite()) => {
                Err(invalid(format!("tau = {tau} must be positive")))
            }
            RadialFamily::Drift { a } if !(0.0..=0.25).contains(&a) => {
                Err(invalid(format!("drift a = {a} must lie in [0, 1/4]")))
            }
            RadialFamily::Gaussian { d, r_cap, delta, s } => {
                if !(d >= 5.0 && r_cap >= 1.0 && s > 0.0 && d.is_finite() && r_cap.is_finite() && s.is_finite()) {
                    return Err(invalid(format!(
                        "gaussian needs D >= 5, R >= 1, s > 0; got D = {d}, R = {r_cap}, s = {s}"
                    )));
                }
                // relative slack so that Δ = 24R/D computed in floats is accepted
                if delta < 24.0 * r_cap / d * (1.0 - 1e-12) {
                    return Err(invalid(format!(
                        "gaussian needs Delta >= 24R/D = {}, got {delta}",
                        24.0 * r_cap / d
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Time interval on which the profile is admissible.
    pub fn interval(&self) -> (f64, f64) {
        match *self {
            RadialFamily::Gaussian { s, .. } => (0.0, s),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn log_g(&self, t: f64, rho: f64) -> f64 {
        match *self {
            RadialFamily::Lemma23 { tau } => {
                let c = std::f64::consts::E * (t + tau) / 4.0;
                // the max inside the log is taken first, so ρ <= c gives 0
                let l = (rho / c).max(1.0).ln();
                (rho - c) * l - t / tau
            }
            RadialFamily::Drift { a } => a * rho - a * a * t / 2.0,
            RadialFamily::Gaussian { d, delta, s, .. } => -rho * rho / (d * (s - t + delta)),
        }
    }

    pub fn dlog_dt(&self, t: f64, rho: f64) -> f64 {
        match *self {
            RadialFamily::Lemma23 { tau } => {
                let c = std::f64::consts::E * (t + tau) / 4.0;
                let l = (rho / c).max(1.0).ln();
                -1.0 / tau - std::f64::consts::E / 4.0 * l - (rho - c).max(0.0) / (t + tau)
            }
            RadialFamily::Drift { a } => -a * a / 2.0,
            RadialFamily::Gaussian { d, delta, s, .. } => {
                let w = s - t + delta;
                -rho * rho / (d * w * w)
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            RadialFamily::Lemma23 { tau } => format!("lemma23(tau={tau})"),
            RadialFamily::Drift { a } => format!("drift(a={a})"),
            RadialFamily::Gaussian { d, r_cap, delta, s } => {
                format!("gaussian(D={d},R={r_cap},Delta={delta},s={s})")
            }
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Radial(RadialFamily),
    Custom {
        name: String,
        log_h: ScalarFn,
        dlog_dt: ScalarFn,
        interval: (f64, f64),
    },
}

/// A test function `h(t, x)`, stored through `log h` and its analytic time
/// derivative.
#[derive(Clone)]
pub struct TestFunction {
    kind: Kind,
    rho: VertexFunction,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label())
            .field("rho", &self.rho)
            .finish()
    }
}

impl TestFunction {
    pub fn radial(family: RadialFamily, rho: VertexFunction) -> Result<Self> {
        family.validate()?;
        if rho.values().iter().any(|r| !r.is_finite()) {
            return Err(invalid("rho must be finite"));
        }
        if let RadialFamily::Gaussian { r_cap, .. } = family {
            if let Some(bad) = rho.values().iter().find(|r| !(**r >= 1.0 - 1e-12 && **r <= r_cap + 1e-12)) {
                return Err(invalid(format!("gaussian needs 1 <= rho <= R, found rho = {bad}")));
            }
        }
        Ok(TestFunction {
            kind: Kind::Radial(family),
            rho,
        })
    }

    /// User-defined `h` through `log h(t, x)` and `∂_t log h(t, x)`.
    pub fn custom(
        name: impl Into<String>,
        n: usize,
        interval: (f64, f64),
        log_h: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
        dlog_dt: impl Fn(f64, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        TestFunction {
            kind: Kind::Custom {
                name: name.into(),
                log_h: Arc::new(log_h),
                dlog_dt: Arc::new(dlog_dt),
                interval,
            },
            rho: VertexFunction::zeros(n),
        }
    }

    pub fn family(&self) -> Option<RadialFamily> {
        match &self.kind {
            Kind::Radial(f) => Some(*f),
            Kind::Custom { .. } => None,
        }
    }

    pub fn rho(&self) -> &VertexFunction {
        &self.rho
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Radial(f) => f.interval(),
            Kind::Custom { interval, .. } => *interval,
        }
    }

    pub fn log_eval(&self, t: f64, x: usize) -> f64 {
        match &self.kind {
            Kind::Radial(f) => f.log_g(t, self.rho[x]),
            Kind::Custom { log_h, .. } => log_h(t, x),
        }
    }

    pub fn eval(&self, t: f64, x: usize) -> f64 {
        self.log_eval(t, x).exp()
    }

    pub fn dlog_dt(&self, t: f64, x: usize) -> f64 {
        match &self.kind {
            Kind::Radial(f) => f.dlog_dt(t, self.rho[x]),
            Kind::Custom { dlog_dt, .. } => dlog_dt(t, x),
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Radial(f) => f.label(),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    /// Centered difference of `log h` in `t`.
    pub fn finite_difference_dlog_dt(&self, t: f64, x: usize, step: f64) -> f64 {
        (self.log_eval(t + step, x) - self.log_eval(t - step, x)) / (2.0 * step)
    }
}

/// `h(t, z) = exp{(ρ − c) log(1 ∨ ρ/c) − t/τ}`, `c = e(t + τ)/4`.
pub fn make_lemma23(tau: f64, rho: VertexFunction) -> Result<TestFunction> {
    TestFunction::radial(RadialFamily::Lemma23 { tau }, rho)
}

/// `h(t, x) = e^{aρ(x) − a²t/2}`, `a ∈ [0, 1/4]`.
pub fn make_drift(a: f64, rho: VertexFunction) -> Result<TestFunction> {
    TestFunction::radial(RadialFamily::Drift { a }, rho)
}

/// `h(t, x) = exp(−ρ(x)² / (D(s − t + Δ)))` on `[0, s]`.
pub fn make_gaussian(d: f64, r_cap: f64, delta: f64, s: f64, rho: VertexFunction) -> Result<TestFunction> {
    TestFunction::radial(
        RadialFamily::Gaussian {
            d,
            r_cap,
            delta,
            s,
        },
        rho,
    )
}

/// Radial `g(t, r)` composed with a distance transform, non-decreasing in
/// `r` for the families used with it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GClassFunction {
    pub family: RadialFamily,
    pub variant: RhoVariant,
    pub origin: usize,
    pub cap: f64,
}

impl GClassFunction {
    pub fn new(family: RadialFamily, variant: RhoVariant, origin: usize, cap: f64) -> Result<Self> {
        family.validate()?;
        if !(cap >= 0.0 && cap.is_finite()) {
            return Err(invalid(format!("cap R = {cap} must be finite and non-negative")));
        }
        Ok(GClassFunction {
            family,
            variant,
            origin,
            cap,
        })
    }

    pub fn log_g(&self, t: f64, r: f64) -> f64 {
        self.family.log_g(t, self.variant.apply(r, self.cap))
    }

    pub fn g(&self, t: f64, r: f64) -> f64 {
        self.log_g(t, r).exp()
    }

    /// `h(t, x) = g(t, d(o, x) ∧ R)`.
    pub fn test_function(&self, g: &WeightedGraph, metric: &AdaptedMetric) -> Result<TestFunction> {
        let rho = make_rho(metric, g, self.origin, self.cap, self.variant)?;
        TestFunction::radial(self.family, rho)
    }

    /// Largest decrease of `log g(t, ·)` along a sorted grid of radii.
    pub fn monotonicity_defect(&self, times: &[f64], radii: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for &t in times {
            for w in radii.windows(2) {
                worst = worst.max(self.log_g(t, w[0]) - self.log_g(t, w[1]));
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{path, two_vertex};
    use crate::metric::default_metric;

    #[test]
    fn rho_examples() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let m = crate::metric::shortest_path_metric(&g, crate::metric::EdgeLengths(vec![0.5])).unwrap();
        let rho = make_rho(&m, &g, 0, 1.0, RhoVariant::CappedDist).unwrap();
        assert_eq!(rho.values(), &[0.0, 0.5]);
        let zero = make_rho(&default_metric(&g), &g, 0, 0.0, RhoVariant::CappedDist).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));

        let p = path(5).unwrap().csrw();
        let pm = default_metric(&p);
        let refl = make_rho(&pm, &p, 0, 2.0, RhoVariant::Reflected).unwrap();
        // distances 0,1,2,3,4 → (2 − d) ∨ 1
        assert_eq!(refl.values(), &[2.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn lemma23_at_origin_time_zero() {
        let f = RadialFamily::Lemma23 { tau: 0.7 };
        assert_eq!(f.log_g(0.0, 0.0), 0.0);
        // Drift with a = 0 is identically one
        let d = RadialFamily::Drift { a: 0.0 };
        assert_eq!(d.log_g(3.0, 5.0), 0.0);
        assert_eq!(d.dlog_dt(3.0, 5.0), 0.0);
    }

    #[test]
    fn parameter_domains() {
        let rho = VertexFunction(vec![1.0, 1.0]);
        assert!(make_drift(0.3, rho.clone()).is_err());
        assert!(make_lemma23(0.0, rho.clone()).is_err());
        assert!(make_gaussian(5.0, 1.0, 24.0 / 5.0, 1.0, rho.clone()).is_ok());
        assert!(make_gaussian(5.0, 1.0, 4.0, 1.0, rho.clone()).is_err());
        assert!(make_gaussian(4.0, 1.0, 10.0, 1.0, rho.clone()).is_err());
        assert!(make_gaussian(5.0, 1.0, 5.0, 1.0, VertexFunction(vec![0.5, 1.0])).is_err());
    }

    #[test]
    fn analytic_derivative_matches_differences() {
        let rho = VertexFunction(vec![0.0, 0.3, 1.7, 4.0, 9.0]);
        let fams = [
            RadialFamily::Lemma23 { tau: 0.1 },
            RadialFamily::Lemma23 { tau: 10.0 },
            RadialFamily::Drift { a: 0.25 },
        ];
        for f in fams {
            let h = TestFunction::radial(f, rho.clone()).unwrap();
            for x in 0..5 {
                for t in [0.05, 0.9, 3.3, 12.0] {
                    let a = h.dlog_dt(t, x);
                    let n = h.finite_difference_dlog_dt(t, x, 1e-5);
                    assert!((a - n).abs() <= 1e-6 * a.abs().max(1e-3), "{} x={x} t={t}: {a} vs {n}", f.label());
                }
            }
        }
    }

    #[test]
    fn g_class_monotone_in_r() {
        let radii: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let times = [0.0, 0.5, 1.0];
        let g = GClassFunction::new(RadialFamily::Lemma23 { tau: 1.0 }, RhoVariant::CappedDist, 0, 1.5).unwrap();
        assert_eq!(g.monotonicity_defect(&times, &radii), 0.0);
        let gauss = RadialFamily::Gaussian {
            d: 5.0,
            r_cap: 3.0,
            delta: 24.0 * 3.0 / 5.0,
            s: 1.0,
        };
        let g = GClassFunction::new(gauss, RhoVariant::Reflected, 0, 3.0).unwrap();
        assert_eq!(g.monotonicity_defect(&times, &radii), 0.0);
    }
}
