//! Off-diagonal upper bounds for transition probabilities, evaluated in log
//! space, and their verification against exact kernels.
//!
//! Every `ln_*` function returns the natural log of the bound. The explicit
//! constants contain a `2e^{123}` term, so nothing here is exponentiated.

mod elementary;
mod norms;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use elementary::{elementary_inequalities, ElementaryReport};
pub use norms::{norm_tail_bound_check, NormCheck, NormRow, RegularityInput};
pub use sweep::{
    bound_sweep, fit_empirical_constant, fit_profile, write_bound_csv, BoundConfig, BoundReport,
    BoundRow, BoundSummary, FittedProfile, FormulaSummary, ProfileSummary, BOUND_CSV_HEADER,
};

use crate::error::{invalid, Error, Result};

pub const THETA1: f64 = 1e-6;
pub const THETA2: f64 = THETA1 / 5.0;
/// Gaussian exponent constant, `θ = θ₂ / 2 = 10⁻⁷`.
pub const THETA: f64 = THETA2 / 2.0;
/// Threshold on `R` below which the far-tail estimate is not claimed.
pub const FAR_TAIL_MIN_RADIUS: f64 = 1e3;

/// `ln(sum exp(x_i))`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Assembled from the explicit constants in the proofs.
    PaperExplicit,
    /// Least constant making the bound hold on the evaluated grid.
    EmpiricalFit,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::PaperExplicit => "paper-explicit",
            Provenance::EmpiricalFit => "empirical-fit",
        }
    }
}

/// Which constants a sweep should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstantChoice {
    #[default]
    Paper,
    Empirical,
}

impl FromStr for ConstantChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ConstantChoice::Paper),
            "empirical" => Ok(ConstantChoice::Empirical),
            other => Err(invalid(format!("unknown constants `{other}` (paper|empirical)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantLedger {
    pub theta1: f64,
    pub theta2: f64,
    pub theta: f64,
    pub ln_c0: f64,
    pub ln_c1: f64,
    pub provenance: Provenance,
}

impl ConstantLedger {
    /// `C0 = e^{θ₁+0.01} + e^{-θ₁}(1 - e^{-θ₁})⁻¹ + 2e^{123}` and
    /// `C1 = e^{4·10⁶ θ₂} + C0 Σ_{j>=1} e^{-θ₂ 4^{j-1}} + C0`.
    pub fn paper() -> Self {
        let ln_c0 = log_sum_exp(&[
            THETA1 + 0.01,
            -THETA1 - (-(-THETA1).exp_m1()).ln(),
            2f64.ln() + 123.0,
        ]);
        let mut series = 0.0;
        let mut j = 0;
        loop {
            let term = (-THETA2 * 4f64.powi(j)).exp();
            series += term;
            if term < 1e-18 * series {
                break;
            }
            j += 1;
        }
        let ln_c1 = log_sum_exp(&[4e6 * THETA2, ln_c0 + series.ln(), ln_c0]);
        ConstantLedger {
            theta1: THETA1,
            theta2: THETA2,
            theta: THETA,
            ln_c0,
            ln_c1,
            provenance: Provenance::PaperExplicit,
        }
    }

    /// Ledger whose `C0` and `C1` are both the given fitted value.
    pub fn empirical(ln_c: f64) -> Self {
        ConstantLedger {
            ln_c0: ln_c,
            ln_c1: ln_c,
            provenance: Provenance::EmpiricalFit,
            ..Self::paper()
        }
    }
}

/// Bound formulas. Serialized tags are the stable names used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formula {
    /// Global regularity with exponential growth, `t >= d`.
    #[serde(rename = "thm1.1")]
    Global,
    /// Regularity on a window `[T1, T2)`.
    #[serde(rename = "thm1.3")]
    Windowed,
    /// Stretched-exponential growth, `f` at `t / (2γ)`.
    #[serde(rename = "thm5.1")]
    SubExponential,
    /// Polynomial growth, `f` at `t / (2γ)`.
    #[serde(rename = "thm5.2")]
    Polynomial,
    /// Point bound without regularity input, `t >= r`.
    #[serde(rename = "cor2.7-long")]
    PointLong,
    /// Point bound without regularity input, `t <= r`.
    #[serde(rename = "cor2.7-short")]
    PointShort,
    /// Mass outside a ball.
    #[serde(rename = "prop2.6")]
    TailMass,
}

impl Formula {
    pub const ALL: [Formula; 7] = [
        Formula::Global,
        Formula::Windowed,
        Formula::SubExponential,
        Formula::Polynomial,
        Formula::PointLong,
        Formula::PointShort,
        Formula::TailMass,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Formula::Global => "thm1.1",
            Formula::Windowed => "thm1.3",
            Formula::SubExponential => "thm5.1",
            Formula::Polynomial => "thm5.2",
            Formula::PointLong => "cor2.7-long",
            Formula::PointShort => "cor2.7-short",
            Formula::TailMass => "prop2.6",
        }
    }

    /// Whether the statement carries an unspecified constant `C1`.
    pub fn has_free_constant(self) -> bool {
        matches!(
            self,
            Formula::Global | Formula::Windowed | Formula::SubExponential | Formula::Polynomial
        )
    }

    /// Comma-separated tags; `cor2.7` selects both branches, `all` everything.
    pub fn parse_selection(s: &str) -> Result<Vec<Formula>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "all" => out.extend(Formula::ALL),
                "cor2.7" => out.extend([Formula::PointLong, Formula::PointShort]),
                tag => out.push(tag.parse()?),
            }
        }
        if out.is_empty() {
            return Err(invalid("no formula selected"));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formula::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| invalid(format!("unknown formula `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainFlag {
    InDomain,
    OutOfDomain,
}

impl DomainFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainFlag::InDomain => "in-domain",
            DomainFlag::OutOfDomain => "out-of-domain",
        }
    }

    pub fn from_bool(inside: bool) -> Self {
        if inside {
            DomainFlag::InDomain
        } else {
            DomainFlag::OutOfDomain
        }
    }
}

/// Time window `[start, end)` in which a formula is claimed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn flag(&self, t: f64) -> DomainFlag {
        DomainFlag::from_bool(t >= self.start && t < self.end)
    }
}

/// `t >= d`.
pub fn global_window(d: f64) -> Window {
    Window {
        start: d,
        end: f64::INFINITY,
    }
}

/// `[max(8 α⁻² T1², d), T2)`.
pub fn interval_window(alpha: f64, t1: f64, t2: f64, d: f64) -> Result<Window> {
    check_window(t1, t2)?;
    if !(alpha > 0.0) {
        return Err(invalid(format!("alpha = {alpha} must be positive")));
    }
    Ok(Window {
        start: (8.0 * t1 * t1 / (alpha * alpha)).max(d),
        end: t2,
    })
}

/// `[max(2⁹ δ T1^{1+ε}, d), T2)`.
pub fn subexp_window(delta: f64, epsilon: f64, t1: f64, t2: f64, d: f64) -> Result<Window> {
    check_window(t1, t2)?;
    if !(delta >= 0.0 && (0.0..1.0).contains(&epsilon)) {
        return Err(invalid(format!(
            "need delta >= 0 and epsilon in [0, 1), got ({delta}, {epsilon})"
        )));
    }
    Ok(Window {
        start: (512.0 * delta * t1.powf(1.0 + epsilon)).max(d),
        end: t2,
    })
}

/// `[max(2¹⁰ ε T1 ln(T1 ∨ 1), d), T2)`.
pub fn poly_window(epsilon: f64, t1: f64, t2: f64, d: f64) -> Result<Window> {
    check_window(t1, t2)?;
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon = {epsilon} must be non-negative")));
    }
    Ok(Window {
        start: (1024.0 * epsilon * t1 * t1.max(1.0).ln()).max(d),
        end: t2,
    })
}

fn check_window(t1: f64, t2: f64) -> Result<()> {
    if !(t1 >= 0.0 && t2 > t1) {
        return Err(invalid(format!("bad window [{t1}, {t2})")));
    }
    Ok(())
}

/// Inputs shared by the Gaussian-type formulas. `ln_f1`, `ln_f2` are the
/// profiles already evaluated at the formula's time argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianInputs {
    pub ln_f1: f64,
    pub ln_f2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub d: f64,
    pub t: f64,
}

impl GaussianInputs {
    fn validate(&self) -> Result<()> {
        if !(self.nu1 > 0.0 && self.nu2 > 0.0 && self.t > 0.0 && self.d >= 0.0) {
            return Err(invalid("bound inputs need positive measures, t > 0 and d >= 0"));
        }
        Ok(())
    }
}

/// `ln C + ½ ln(ν₂/ν₁) − ½(ln f₁ + ln f₂) − θ d²/t`, where `ln_prefactor`
/// is `ln C` plus any `β ln A` term.
pub fn ln_gaussian(inp: &GaussianInputs, ln_prefactor: f64, theta: f64) -> f64 {
    ln_prefactor + 0.5 * (inp.nu2 / inp.nu1).ln()
        - 0.5 * (inp.ln_f1 + inp.ln_f2)
        - theta * inp.d * inp.d / inp.t
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluated {
    pub log_bound: f64,
    pub window: Window,
    pub domain: DomainFlag,
}

/// Global form: `C1 A^β (ν₂/ν₁)^{1/2} / √(f₁(αt) f₂(αt)) · e^{−θd²/t}` for
/// `t >= d`. Out-of-domain times are still evaluated and flagged.
pub fn bound_main(
    inp: &GaussianInputs,
    a: f64,
    beta: u32,
    constants: &ConstantLedger,
) -> Result<Evaluated> {
    inp.validate()?;
    let window = global_window(inp.d);
    Ok(Evaluated {
        log_bound: ln_gaussian(inp, constants.ln_c1 + beta as f64 * a.ln(), constants.theta),
        window,
        domain: window.flag(inp.t),
    })
}

/// Same display as [`bound_main`], claimed on `[max(8α⁻²T1², d), T2)`.
pub fn bound_interval(
    inp: &GaussianInputs,
    a: f64,
    beta: u32,
    constants: &ConstantLedger,
    alpha: f64,
    t1: f64,
    t2: f64,
) -> Result<Evaluated> {
    inp.validate()?;
    let window = interval_window(alpha, t1, t2, inp.d)?;
    Ok(Evaluated {
        log_bound: ln_gaussian(inp, constants.ln_c1 + beta as f64 * a.ln(), constants.theta),
        window,
        domain: window.flag(inp.t),
    })
}

/// Stretched-exponential growth; `inp` carries `f` at `t/(2γ)` and there is
/// no `A^β` factor (the constant absorbs it).
pub fn bound_subexp(
    inp: &GaussianInputs,
    constants: &ConstantLedger,
    delta: f64,
    epsilon: f64,
    t1: f64,
    t2: f64,
) -> Result<Evaluated> {
    inp.validate()?;
    let window = subexp_window(delta, epsilon, t1, t2, inp.d)?;
    Ok(Evaluated {
        log_bound: ln_gaussian(inp, constants.ln_c1, constants.theta),
        window,
        domain: window.flag(inp.t),
    })
}

/// Polynomial growth; `inp` carries `f` at `t/(2γ)`.
pub fn bound_poly(
    inp: &GaussianInputs,
    constants: &ConstantLedger,
    epsilon: f64,
    t1: f64,
    t2: f64,
) -> Result<Evaluated> {
    inp.validate()?;
    let window = poly_window(epsilon, t1, t2, inp.d)?;
    Ok(Evaluated {
        log_bound: ln_gaussian(inp, constants.ln_c1, constants.theta),
        window,
        domain: window.flag(inp.t),
    })
}

/// Two-branch bound; a branch is present when its time range applies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Branches {
    /// `t >= r`.
    pub long: Option<f64>,
    /// `t <= r`.
    pub short: Option<f64>,
}

impl Branches {
    /// The tighter of the applicable branches.
    pub fn min(&self) -> f64 {
        match (self.long, self.short) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!("at least one branch applies"),
        }
    }
}

fn check_rt(r: f64, t: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!(
            "radius {r} must be positive; use the on-diagonal profile at distance 0"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid(format!("time {t} must be positive")));
    }
    Ok(())
}

/// `P_o(X_t = z)` bound with `r = d(o, z)`:
/// `½ ln(ν_z/ν_o) − r²/(16t)` for `t >= r`, and
/// `½ ln(ν_z/ν_o) − (r/2) ln(1.01 r/t) + 60` for `r >= t`.
pub fn bound_short_long(nu_o: f64, nu_z: f64, r: f64, t: f64) -> Result<Branches> {
    check_rt(r, t)?;
    if !(nu_o > 0.0 && nu_z > 0.0) {
        return Err(invalid("measures must be positive"));
    }
    let base = 0.5 * (nu_z / nu_o).ln();
    Ok(Branches {
        long: (t >= r).then(|| base - r * r / (16.0 * t)),
        short: (r >= t).then(|| base - 0.5 * r * (1.01 * r / t).ln() + 60.0),
    })
}

/// Mass outside `B_R`: `−R²/(8t)` for `t >= R`, `−R ln(1.01R/t) + 120`
/// for `t <= R`.
pub fn tail_mass_bound(radius: f64, t: f64) -> Result<Branches> {
    check_rt(radius, t)?;
    Ok(Branches {
        long: (t >= radius).then(|| -radius * radius / (8.0 * t)),
        short: (radius >= t).then(|| -radius * (1.01 * radius / t).ln() + 120.0),
    })
}

/// `ln(C1 A^β / f(2αt))` given `ln f(2αt)`.
pub fn ln_weighted_norm_bound(ln_f_2alpha_t: f64, a: f64, beta: u32, constants: &ConstantLedger) -> f64 {
    constants.ln_c1 + beta as f64 * a.ln() - ln_f_2alpha_t
}

/// `ln(C0 A^β / f(2αt) · e^{−θ₁R²/t})`, claimed for `t >= R >= 10³`.
pub fn ln_far_tail_bound(
    ln_f_2alpha_t: f64,
    a: f64,
    beta: u32,
    radius: f64,
    t: f64,
    constants: &ConstantLedger,
) -> Evaluated {
    Evaluated {
        log_bound: constants.ln_c0 + beta as f64 * a.ln() - ln_f_2alpha_t
            - constants.theta1 * radius * radius / t,
        window: Window {
            start: radius,
            end: f64::INFINITY,
        },
        domain: DomainFlag::from_bool(t >= radius && radius >= FAR_TAIL_MIN_RADIUS),
    }
}

/// `p` against `exp(log_bound)`, allowing for a kernel error of `err`:
/// passes when `p − err <= exp(log_bound)`.
pub fn passes(p: f64, err: f64, log_bound: f64) -> bool {
    let lower = p - err;
    lower <= 0.0 || lower.ln() <= log_bound + 1e-12 * (1.0 + log_bound.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_chain() {
        let c = ConstantLedger::paper();
        assert_eq!(c.theta, 1e-7);
        assert_eq!(c.theta2, c.theta1 / 5.0);
        assert_eq!(c.theta, c.theta2 / 2.0);
    }

    #[test]
    fn paper_constants_in_log_space() {
        let c = ConstantLedger::paper();
        // the 2e^{123} term dominates C0
        assert!((c.ln_c0 - (2f64.ln() + 123.0)).abs() < 1e-12);
        // Σ_j e^{-θ₂ 4^{j-1}}: terms are ~1 until 4^{j-1} ~ 1/θ₂
        let direct: f64 = (0..60).map(|j| (-THETA2 * 4f64.powi(j)).exp()).sum();
        let expect = log_sum_exp(&[0.8, c.ln_c0 + direct.ln(), c.ln_c0]);
        assert!((c.ln_c1 - expect).abs() < 1e-12);
        assert!(c.ln_c1 > c.ln_c0 + 2.0);
    }

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.1, -2.0, 3.5];
        let direct: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    fn inputs(d: f64, t: f64) -> GaussianInputs {
        GaussianInputs {
            ln_f1: 0.3,
            ln_f2: 0.7,
            nu1: 2.0,
            nu2: 3.0,
            d,
            t,
        }
    }

    #[test]
    fn main_bound_algebra() {
        let c = ConstantLedger::paper();
        let zero = bound_main(&inputs(0.0, 1.0), 1.0, 1, &c).unwrap();
        let expect = c.ln_c1 + 0.5 * (1.5f64).ln() - 0.5;
        assert!((zero.log_bound - expect).abs() < 1e-12);
        // doubling d adds −3θd²/t
        let (d, t) = (5.0, 40.0);
        let b1 = bound_main(&inputs(d, t), 2.0, 3, &c).unwrap().log_bound;
        let b2 = bound_main(&inputs(2.0 * d, t), 2.0, 3, &c).unwrap().log_bound;
        assert!((b2 - b1 + 3.0 * THETA * d * d / t).abs() < 1e-12);
        assert_eq!(bound_main(&inputs(5.0, 4.0), 1.0, 1, &c).unwrap().domain, DomainFlag::OutOfDomain);
        assert_eq!(bound_main(&inputs(5.0, 5.0), 1.0, 1, &c).unwrap().domain, DomainFlag::InDomain);
    }

    #[test]
    fn windows() {
        let w = interval_window(1.0 / 64.0, 0.0, f64::INFINITY, 3.0).unwrap();
        assert_eq!(w.start, 3.0);
        let w = interval_window(1.0 / 64.0, 2.0, f64::INFINITY, 3.0).unwrap();
        assert_eq!(w.start, 131072.0);
        let w = subexp_window(1.0, 0.5, 4.0, f64::INFINITY, 3.0).unwrap();
        assert_eq!(w.start, 4096.0);
        assert!(subexp_window(1.0, 1.0, 4.0, f64::INFINITY, 3.0).is_err());
        let w = poly_window(3.0, 0.5, f64::INFINITY, 3.0).unwrap();
        assert_eq!(w.start, 3.0);
        let e = std::f64::consts::E;
        let w = poly_window(3.0, e, f64::INFINITY, 3.0).unwrap();
        assert!((w.start - 1024.0 * 3.0 * e).abs() < 1e-9);
        assert!((w.start - 8350.6).abs() < 0.1);
        assert_eq!(w.flag(1e4), DomainFlag::InDomain);
        let w = poly_window(3.0, 1.0, 10.0, 3.0).unwrap();
        assert_eq!(w.flag(10.0), DomainFlag::OutOfDomain);
    }

    #[test]
    fn short_long_substitution() {
        let b = bound_short_long(1.0, 1.0, 16.0, 16.0).unwrap();
        // r²/(16t) at t = r = 16 is 1
        assert!((b.long.unwrap() + 1.0).abs() < 1e-15);
        assert!((b.short.unwrap() - (-8.0 * 1.01f64.ln() + 60.0)).abs() < 1e-12);
        assert_eq!(b.min(), -1.0);
        let long_only = bound_short_long(1.0, 4.0, 2.0, 8.0).unwrap();
        assert!(long_only.short.is_none());
        assert!((long_only.long.unwrap() - (2f64.ln() - 4.0 / 128.0)).abs() < 1e-15);
        assert!(bound_short_long(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn short_branch_tightens_as_t_shrinks() {
        let r = 5.0;
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let t = r * 0.8f64.powi(k);
            let b = bound_short_long(1.0, 1.0, r, t).unwrap().short.unwrap();
            assert!(b < prev);
            prev = b;
        }
        assert!(prev < -40.0);
    }

    #[test]
    fn tail_branches() {
        let b = tail_mass_bound(2.0, 4.0).unwrap();
        assert_eq!(b.long, Some(-0.125));
        assert!(b.short.is_none());
        let b = tail_mass_bound(2.0, 2.0).unwrap();
        assert_eq!(b.min(), -0.25);
    }

    #[test]
    fn formula_tags_round_trip() {
        for f in Formula::ALL {
            assert_eq!(f.tag().parse::<Formula>().unwrap(), f);
            assert_eq!(serde_json::to_string(&f).unwrap(), format!("\"{}\"", f.tag()));
        }
        assert_eq!(
            Formula::parse_selection("cor2.7").unwrap(),
            vec![Formula::PointLong, Formula::PointShort]
        );
        assert_eq!(Formula::parse_selection("all").unwrap().len(), 7);
        assert!(Formula::parse_selection("thm9").is_err());
    }

    #[test]
    fn pass_rule() {
        assert!(passes(0.5, 0.0, 0.5f64.ln()));
        assert!(!passes(0.5, 0.0, 0.4f64.ln()));
        assert!(passes(1e-12, 1e-10, -1000.0));
    }
}
