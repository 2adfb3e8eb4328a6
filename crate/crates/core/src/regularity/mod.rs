//! `(A, γ)`-regularity of decay profiles, growth envelopes and the derived
//! constants `α`, `β`.
//!
//! A non-decreasing `f` is `(A, γ)`-regular on `[a, b)` when
//! `f(γs)/f(s) <= A f(γt)/f(t)` for all `a <= s < t < b/γ`. Suprema are taken
//! over finite grids: the sample points of a table, or a log-spaced grid for
//! everything else.

mod profile;

use serde::Serialize;

pub use profile::{ClosedForm, DecayProfile, FnProfile, OnDiagonalProfile, TableProfile};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    /// May be `f64::INFINITY` only for checks that do not sweep a grid.
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Result<Self> {
        if !(start >= 0.0 && end > start) {
            return Err(invalid(format!("bad interval [{start}, {end})")));
        }
        Ok(Interval { start, end })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityOptions {
    /// Log-spaced grid density for profiles without sample points.
    pub per_decade: usize,
    /// Grids start at `max(a, floor)`, so `a = 0` is usable.
    pub floor: f64,
    /// Additive slack in log space for envelope and halving checks.
    pub log_tol: f64,
}

impl Default for RegularityOptions {
    fn default() -> Self {
        RegularityOptions {
            per_decade: 512,
            floor: 1e-6,
            log_tol: 1e-9,
        }
    }
}

/// Points `lo * 10^{k / per_decade}` in `[lo, hi)`.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let step = 10f64.powf(1.0 / per_decade.max(1) as f64);
    let mut out = Vec::new();
    let mut k = 0i32;
    loop {
        let t = lo * step.powi(k);
        if t >= hi || !t.is_finite() {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

fn sweep_points<P: DecayProfile + ?Sized>(
    f: &P,
    lo: f64,
    hi: f64,
    opts: &RegularityOptions,
) -> Result<Vec<f64>> {
    if !hi.is_finite() {
        return Err(invalid("grid sweeps need a finite interval end"));
    }
    let lo = lo.max(opts.floor);
    let pts = match f.native_grid() {
        Some(grid) => grid.iter().copied().filter(|t| *t >= lo && *t < hi).collect(),
        None => log_grid(lo, hi, opts.per_decade),
    };
    Ok(pts)
}

fn ln_values<P: DecayProfile + ?Sized>(f: &P, ts: &[f64]) -> Result<Vec<f64>> {
    let vals = f.eval_many(ts)?;
    for (t, v) in ts.iter().zip(&vals) {
        if !(*v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("profile value {v} at t = {t} is not positive")));
        }
    }
    Ok(vals.into_iter().map(f64::ln).collect())
}

fn check_monotone(ts: &[f64], ln_f: &[f64]) -> Result<()> {
    for i in 1..ts.len() {
        // tolerate round-off between nearly equal samples
        if ln_f[i] < ln_f[i - 1] - 1e-12 {
            return Err(Error::NonMonotone {
                t: ts[i - 1],
                f: ln_f[i - 1].exp(),
                t_next: ts[i],
                f_next: ln_f[i].exp(),
            });
        }
    }
    Ok(())
}

/// Result of a regularity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityFit {
    /// Least admissible constant, clamped below at 1.
    pub a: f64,
    /// The supremum before clamping.
    pub raw_sup: f64,
    /// Pair `(s, t)` attaining the supremum.
    pub witness: (f64, f64),
    pub gamma: f64,
    pub interval: Interval,
    pub points: usize,
    /// `None` when the profile's own sample points were used.
    pub per_decade: Option<usize>,
}

/// Least `A` such that `f` is `(A, γ)`-regular on the grid over `interval`.
pub fn fit_regularity<P: DecayProfile + ?Sized>(
    f: &P,
    gamma: f64,
    interval: Interval,
    opts: &RegularityOptions,
) -> Result<RegularityFit> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma = {gamma} must exceed 1")));
    }
    let ss = sweep_points(f, interval.start, interval.end / gamma, opts)?;
    if ss.len() < 2 {
        return Err(Error::EmptyGrid);
    }
    // evaluate s and γs in one batch so on-diagonal profiles share a path
    let all: Vec<f64> = ss.iter().copied().chain(ss.iter().map(|s| gamma * s)).collect();
    let m = ss.len();
    let ln_all = ln_values(f, &all)?;
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&i, &j| all[i].total_cmp(&all[j]));
    let sorted_t: Vec<f64> = order.iter().map(|&i| all[i]).collect();
    let sorted_f: Vec<f64> = order.iter().map(|&i| ln_all[i]).collect();
    check_monotone(&sorted_t, &sorted_f)?;

    let ratio: Vec<f64> = (0..m).map(|i| ln_all[m + i] - ln_all[i]).collect();
    let mut best_prefix = ratio[0];
    let mut best_index = 0;
    let mut sup = f64::NEG_INFINITY;
    let mut witness = (ss[0], ss[1]);
    for j in 1..m {
        let cand = best_prefix - ratio[j];
        if cand > sup {
            sup = cand;
            witness = (ss[best_index], ss[j]);
        }
        if ratio[j] > best_prefix {
            best_prefix = ratio[j];
            best_index = j;
        }
    }
    let raw = sup.exp();
    Ok(RegularityFit {
        a: raw.max(1.0),
        raw_sup: raw,
        witness,
        gamma,
        interval,
        points: m,
        per_decade: f.native_grid().is_none().then_some(opts.per_decade),
    })
}

/// Least `A >= 1` such that `f` is `(A, γ)`-regular on the default grid.
pub fn minimal_regularity_constant<P: DecayProfile + ?Sized>(
    f: &P,
    gamma: f64,
    interval: Interval,
) -> Result<f64> {
    Ok(fit_regularity(f, gamma, interval, &RegularityOptions::default())?.a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityCheck {
    pub holds: bool,
    pub minimal_a: f64,
    /// Violating pair `(s, t)` when the check fails.
    pub witness: Option<(f64, f64)>,
}

pub fn check_regular<P: DecayProfile + ?Sized>(
    f: &P,
    a: f64,
    gamma: f64,
    interval: Interval,
    opts: &RegularityOptions,
) -> Result<RegularityCheck> {
    let fit = fit_regularity(f, gamma, interval, opts)?;
    // compare against the unclamped supremum; A < 1 can never hold since
    // the ratio at s = t^- is 1
    let needed = fit.raw_sup.max(1.0);
    let holds = needed <= a * (1.0 + 1e-12);
    Ok(RegularityCheck {
        holds,
        minimal_a: fit.a,
        witness: (!holds).then_some(fit.witness),
    })
}

/// Growth envelopes bounding `f` from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Envelope {
    /// `A e^{δt}`, `δ >= 1`.
    Exp { delta: f64 },
    /// `A e^{δ t^ε}`, `δ >= 0`, `ε ∈ [0, 1)`.
    Stretched { delta: f64, epsilon: f64 },
    /// `A t^ε`, `ε >= 0`.
    Poly { epsilon: f64 },
}

impl Envelope {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Envelope::Exp { delta } if !(delta >= 1.0 && delta.is_finite()) => {
                Err(invalid(format!("exponential envelope needs delta >= 1, got {delta}")))
            }
            Envelope::Stretched { delta, epsilon }
                if !(delta >= 0.0 && delta.is_finite() && (0.0..1.0).contains(&epsilon)) =>
            {
                Err(invalid(format!(
                    "stretched envelope needs delta >= 0 and epsilon in [0, 1), got ({delta}, {epsilon})"
                )))
            }
            Envelope::Poly { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(invalid(format!("polynomial envelope needs epsilon >= 0, got {epsilon}")))
            }
            _ => Ok(()),
        }
    }

    /// `ln` of the envelope with constant `A` at time `t`.
    pub fn ln_bound(&self, a: f64, t: f64) -> f64 {
        a.ln()
            + match *self {
                Envelope::Exp { delta } => delta * t,
                Envelope::Stretched { delta, epsilon } => delta * t.powf(epsilon),
                Envelope::Poly { epsilon } => epsilon * t.ln(),
            }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    pub holds: bool,
    /// Time where `ln f - ln envelope` is largest.
    pub worst_t: f64,
    /// `ln f(worst_t) - ln envelope(worst_t)`; positive means violated.
    pub worst_log_excess: f64,
    /// Least constant that would make the envelope hold on the grid.
    pub minimal_a: f64,
    pub points: usize,
}

pub fn check_envelope<P: DecayProfile + ?Sized>(
    f: &P,
    envelope: Envelope,
    a: f64,
    interval: Interval,
    opts: &RegularityOptions,
) -> Result<EnvelopeCheck> {
    envelope.validate()?;
    if !(a > 0.0) {
        return Err(invalid(format!("envelope constant {a} must be positive")));
    }
    let ts = sweep_points(f, interval.start, interval.end, opts)?;
    if ts.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let ln_f = ln_values(f, &ts)?;
    let (mut worst_t, mut worst) = (ts[0], f64::NEG_INFINITY);
    for (t, lf) in ts.iter().zip(&ln_f) {
        let excess = lf - envelope.ln_bound(a, *t);
        if excess > worst {
            worst = excess;
            worst_t = *t;
        }
    }
    Ok(EnvelopeCheck {
        holds: worst <= opts.log_tol,
        worst_t,
        worst_log_excess: worst,
        minimal_a: a * worst.exp(),
        points: ts.len(),
    })
}

/// Smallest `A` with `C t^p <= A e^{δ t^ε}` for all `t > 0` (`p, δ, ε > 0`).
pub fn stretched_envelope_constant(coef: f64, power: f64, delta: f64, epsilon: f64) -> Result<f64> {
    if !(coef > 0.0 && power > 0.0 && delta > 0.0 && epsilon > 0.0) {
        return Err(invalid("stretched envelope constant needs positive inputs"));
    }
    // maximum of p ln t - δ t^ε sits at t^ε = p / (δ ε)
    let u = power / (delta * epsilon);
    Ok(coef * (u / std::f64::consts::E).powf(power / epsilon))
}

/// How `β` is computed from `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaConvention {
    /// `⌈ln 2 / ln γ⌉`, the least `β` with `γ^β >= 2`.
    #[default]
    LogTwoOverLogGamma,
    /// `⌈ln γ / ln 2⌉`.
    LogGammaOverLogTwo,
}

impl BetaConvention {
    pub fn beta(self, gamma: f64) -> u32 {
        let x = match self {
            BetaConvention::LogTwoOverLogGamma => 2f64.ln() / gamma.ln(),
            BetaConvention::LogGammaOverLogTwo => gamma.ln() / 2f64.ln(),
        };
        // absorb round-off so that e.g. γ = √2 gives exactly 2
        ((x - 1e-12).ceil() as u32).max(1)
    }

    pub fn other(self) -> Self {
        match self {
            BetaConvention::LogTwoOverLogGamma => BetaConvention::LogGammaOverLogTwo,
            BetaConvention::LogGammaOverLogTwo => BetaConvention::LogTwoOverLogGamma,
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            BetaConvention::LogTwoOverLogGamma => "ceil(ln 2 / ln gamma)",
            BetaConvention::LogGammaOverLogTwo => "ceil(ln gamma / ln 2)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub alpha: f64,
    pub beta: u32,
}

/// `α = min{1/(2γ), 1/(64δ)}` and `β` under the default convention.
pub fn derived_constants(gamma: f64, delta: f64) -> Result<DerivedConstants> {
    derived_constants_with(gamma, delta, BetaConvention::default())
}

pub fn derived_constants_with(
    gamma: f64,
    delta: f64,
    convention: BetaConvention,
) -> Result<DerivedConstants> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(invalid(format!("gamma = {gamma} must exceed 1")));
    }
    if !(delta >= 1.0 && delta.is_finite()) {
        return Err(invalid(format!("delta = {delta} must be at least 1")));
    }
    Ok(DerivedConstants {
        alpha: (1.0 / (2.0 * gamma)).min(1.0 / (64.0 * delta)),
        beta: convention.beta(gamma),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalvingCheck {
    pub holds: bool,
    pub beta: u32,
    /// Smallest `ln f(2^{-k} t) - ln rhs_k` over `k = 1..=k_max`.
    pub worst_log_slack: f64,
    pub worst_k: Option<u32>,
}

/// Checks `f(2^{-k} t) >= (A^β f(t) / f(γ^{-β} t))^{-k} f(t)` for
/// `k = 1..=k_max`. `k_max = 0` is vacuous.
pub fn check_halving_lemma<P: DecayProfile + ?Sized>(
    f: &P,
    a: f64,
    gamma: f64,
    t: f64,
    k_max: u32,
    convention: BetaConvention,
) -> Result<HalvingCheck> {
    if !(gamma > 1.0 && a >= 1.0 && t > 0.0) {
        return Err(invalid("halving check needs gamma > 1, A >= 1, t > 0"));
    }
    let beta = convention.beta(gamma);
    if k_max == 0 {
        return Ok(HalvingCheck {
            holds: true,
            beta,
            worst_log_slack: f64::INFINITY,
            worst_k: None,
        });
    }
    let mut ts = vec![t, gamma.powi(-(beta as i32)) * t];
    ts.extend((1..=k_max).map(|k| t * 0.5f64.powi(k as i32)));
    let ln_f = ln_values(f, &ts)?;
    let step = beta as f64 * a.ln() + ln_f[0] - ln_f[1];
    let mut worst = f64::INFINITY;
    let mut worst_k = None;
    for k in 1..=k_max {
        let rhs = ln_f[0] - k as f64 * step;
        let slack = ln_f[1 + k as usize] - rhs;
        if slack < worst {
            worst = slack;
            worst_k = Some(k);
        }
    }
    Ok(HalvingCheck {
        holds: worst >= -1e-12 * (1.0 + ln_f[0].abs() + k_max as f64 * step.abs()),
        beta,
        worst_log_slack: worst,
        worst_k,
    })
}

/// Everything the bound formulas need to know about a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityProfile {
    pub a: f64,
    pub gamma: f64,
    pub interval: Interval,
    pub envelope: Option<Envelope>,
    pub alpha: f64,
    pub beta: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub description: String,
    pub profile: RegularityProfile,
    pub fit: RegularityFit,
    pub envelope_check: Option<EnvelopeCheck>,
    pub beta_convention: BetaConvention,
    pub beta_alternative: u32,
    pub notes: Vec<String>,
}

impl RegularityReport {
    pub fn pass(&self) -> bool {
        self.envelope_check.as_ref().is_none_or(|c| c.holds)
    }
}

/// Inputs for [`regularity_report`].
#[derive(Debug, Clone, Copy)]
pub struct ReportRequest {
    pub gamma: f64,
    pub interval: Interval,
    /// Envelope to check with the fitted constant (or `envelope_a`).
    pub envelope: Option<Envelope>,
    pub envelope_a: Option<f64>,
    pub convention: BetaConvention,
}

/// Fit `A`, check the envelope and compute `α`, `β`.
///
/// `α` is defined for exponential envelopes; other envelopes (or none) use
/// `δ = 1`, which gives the same value as the smallest admissible `δ`.
pub fn regularity_report<P: DecayProfile + ?Sized>(
    f: &P,
    req: &ReportRequest,
    opts: &RegularityOptions,
) -> Result<RegularityReport> {
    let fit = fit_regularity(f, req.gamma, req.interval, opts)?;
    let envelope_check = match req.envelope {
        Some(env) => Some(check_envelope(
            f,
            env,
            req.envelope_a.unwrap_or(fit.a),
            req.interval,
            opts,
        )?),
        None => None,
    };
    let delta = match req.envelope {
        Some(Envelope::Exp { delta }) => delta,
        _ => 1.0,
    };
    let derived = derived_constants_with(req.gamma, delta, req.convention)?;
    let other = req.convention.other();
    let beta_alternative = other.beta(req.gamma);
    let notes = vec![format!(
        "beta convention: {} = {} is used (it is the least beta with gamma^beta >= 2, which the \
         halving argument needs); the other reading {} gives {}",
        req.convention.formula(),
        derived.beta,
        other.formula(),
        beta_alternative
    )];
    Ok(RegularityReport {
        description: f.describe(),
        profile: RegularityProfile {
            a: fit.a,
            gamma: req.gamma,
            interval: req.interval,
            envelope: req.envelope,
            alpha: derived.alpha,
            beta: derived.beta,
        },
        fit,
        envelope_check,
        beta_convention: req.convention,
        beta_alternative,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// O(N²) sweep over all grid pairs.
    fn brute_force<P: DecayProfile>(f: &P, gamma: f64, iv: Interval, per_decade: usize) -> f64 {
        let ss = log_grid(iv.start, iv.end / gamma, per_decade);
        let r: Vec<f64> = ss
            .iter()
            .map(|s| f.eval(gamma * s).unwrap() / f.eval(*s).unwrap())
            .collect();
        let mut sup: f64 = 1.0;
        for i in 0..r.len() {
            for j in i + 1..r.len() {
                sup = sup.max(r[i] / r[j]);
            }
        }
        sup
    }

    fn opts(per_decade: usize) -> RegularityOptions {
        RegularityOptions {
            per_decade,
            ..Default::default()
        }
    }

    #[test]
    fn power_and_exp_are_one_two_regular() {
        let iv = Interval::new(0.01, 100.0).unwrap();
        for d in [1.0, 2.0, 3.0] {
            let a = minimal_regularity_constant(&ClosedForm::power_law(d), 2.0, iv).unwrap();
            assert!((a - 1.0).abs() < 1e-12);
        }
        let e = ClosedForm::Exp { coef: 1.0, rate: 1.0 };
        assert_eq!(minimal_regularity_constant(&e, 2.0, iv).unwrap(), 1.0);
    }

    #[test]
    fn square_then_one_is_one_regular() {
        // ratio f(2s)/f(s) is 1, then 4s^2, then 4: non-decreasing, so A = 1
        let f = FnProfile::new("1 then t^2", |t: f64| if t <= 1.0 { 1.0 } else { t * t });
        let iv = Interval::new(0.1, 10.0).unwrap();
        let fit = fit_regularity(&f, 2.0, iv, &opts(64)).unwrap();
        assert!((fit.a - 1.0).abs() < 1e-12);
        assert!((brute_force(&f, 2.0, iv, 64) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn square_then_root_needs_two_root_two() {
        let f = FnProfile::new("t^2 then t^1/2", |t: f64| if t <= 1.0 { t * t } else { t.sqrt() });
        let iv = Interval::new(0.1, 10.0).unwrap();
        let fit = fit_regularity(&f, 2.0, iv, &opts(64)).unwrap();
        assert!((fit.a - brute_force(&f, 2.0, iv, 64)).abs() < 1e-12);
        assert!((fit.a - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let (s, t) = fit.witness;
        assert!(s < 0.5 && t >= 1.0);
        let chk = check_regular(&f, 2.0, 2.0, iv, &opts(64)).unwrap();
        assert!(!chk.holds);
        assert_eq!(chk.witness, Some((s, t)));
    }

    #[test]
    fn a_below_one_fails() {
        let f = ClosedForm::power_law(4.0);
        let iv = Interval::new(0.1, 10.0).unwrap();
        assert!(check_regular(&f, 1.0, 2.0, iv, &opts(64)).unwrap().holds);
        let bad = check_regular(&f, 0.5, 2.0, iv, &opts(64)).unwrap();
        assert!(!bad.holds && bad.witness.is_some());
    }

    #[test]
    fn non_monotone_rejected() {
        let f = FnProfile::new("decreasing", |t: f64| 1.0 / t);
        let iv = Interval::new(0.1, 10.0).unwrap();
        assert!(matches!(
            fit_regularity(&f, 2.0, iv, &opts(16)),
            Err(Error::NonMonotone { .. })
        ));
        let tiny = Interval::new(1.0, 1.001).unwrap();
        assert!(matches!(
            fit_regularity(&ClosedForm::power_law(2.0), 2.0, tiny, &opts(16)),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn table_uses_own_points() {
        let ts: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        let fs: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let tab = TableProfile::new(ts, fs).unwrap();
        let fit = fit_regularity(&tab, 2.0, Interval::new(0.25, 10.0).unwrap(), &opts(512)).unwrap();
        assert_eq!(fit.per_decade, None);
        assert_eq!(fit.points, 19);
        assert!((fit.a - 1.0).abs() < 1e-9);
    }

    #[test]
    fn envelopes() {
        let iv = Interval::new(0.0, 20.0).unwrap();
        let o = RegularityOptions::default();
        let e2 = ClosedForm::Exp { coef: 1.0, rate: 2.0 };
        let bad = check_envelope(&e2, Envelope::Exp { delta: 1.0 }, 1.0, iv, &o).unwrap();
        assert!(!bad.holds);
        assert!((bad.worst_t - 20.0).abs() < 0.1);
        let ok = check_envelope(&e2, Envelope::Exp { delta: 2.0 }, 1.0, iv, &o).unwrap();
        assert!(ok.holds);
        assert!(check_envelope(&e2, Envelope::Exp { delta: 0.5 }, 1.0, iv, &o).is_err());
        assert!(check_envelope(&e2, Envelope::Stretched { delta: 1.0, epsilon: 1.0 }, 1.0, iv, &o).is_err());
        assert!(check_envelope(&e2, Envelope::Poly { epsilon: -1.0 }, 1.0, iv, &o).is_err());
    }

    #[test]
    fn stretched_envelope_from_construction() {
        // t^{κ + d/2} / κ against A exp(2^-9 t^ε)
        let (kappa, d, eps) = (2.0, 1.0, 0.5);
        let delta = 2f64.powi(-9);
        let p = kappa + d / 2.0;
        let f = ClosedForm::Power {
            coef: 1.0 / kappa,
            exponent: p,
        };
        let a = stretched_envelope_constant(1.0 / kappa, p, delta, eps).unwrap();
        let iv = Interval::new(1e-3, 1e12).unwrap();
        let env = Envelope::Stretched { delta, epsilon: eps };
        let chk = check_envelope(&f, env, a, iv, &opts(64)).unwrap();
        assert!(chk.holds);
        // and it is tight: the grid maximum sits at the analytic one
        assert!(chk.worst_log_excess > -1e-4);
        let t_star = (p / (delta * eps)).powf(1.0 / eps);
        assert!((chk.worst_t / t_star - 1.0).abs() < 0.05);
    }

    #[test]
    fn derived() {
        let c = derived_constants(2.0, 1.0).unwrap();
        assert_eq!(c.alpha, 1.0 / 64.0);
        assert_eq!(c.beta, 1);
        assert_eq!(derived_constants(1.5, 1.0).unwrap().beta, 2);
        let c = derived_constants(4.0, 2.0).unwrap();
        assert_eq!((c.alpha, c.beta), (1.0 / 128.0, 1));
        assert_eq!(derived_constants(2f64.sqrt(), 1.0).unwrap().beta, 2);
        assert_eq!(BetaConvention::LogGammaOverLogTwo.beta(4.0), 2);
        assert_eq!(BetaConvention::LogGammaOverLogTwo.beta(1.5), 1);
        assert!(derived_constants(1.0, 1.0).is_err());
        assert!(derived_constants(2.0, 0.5).is_err());
    }

    #[test]
    fn halving_chain() {
        let f = ClosedForm::power_law(3.0);
        for t in [0.5, 1.0, 7.0] {
            let c = check_halving_lemma(&f, 1.0, 2.0, t, 10, BetaConvention::default()).unwrap();
            assert!(c.holds);
            // γ^β = 2 makes the chain exact
            assert!(c.worst_log_slack.abs() < 1e-9);
        }
        let c = check_halving_lemma(&f, 1.0, 1.5, 3.0, 10, BetaConvention::default()).unwrap();
        assert!(c.holds && c.worst_log_slack > 0.0);
        let c = check_halving_lemma(&f, 1.0, 2.0, 1.0, 0, BetaConvention::default()).unwrap();
        assert!(c.holds && c.worst_k.is_none());
        let tab = TableProfile::new(vec![0.5, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            check_halving_lemma(&tab, 1.0, 2.0, 1.0, 3, BetaConvention::default()),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn report_has_one_beta_note() {
        let req = ReportRequest {
            gamma: 1.5,
            interval: Interval::new(0.1, 10.0).unwrap(),
            envelope: Some(Envelope::Exp { delta: 1.0 }),
            envelope_a: Some(1.0),
            convention: BetaConvention::default(),
        };
        let f = ClosedForm::power_law(2.0);
        let r = regularity_report(&f, &req, &opts(32)).unwrap();
        assert_eq!(r.notes.iter().filter(|n| n.contains("beta convention")).count(), 1);
        assert_eq!(r.profile.beta, 2);
        assert_eq!(r.beta_alternative, 1);
        assert!(r.pass());
    }
}
