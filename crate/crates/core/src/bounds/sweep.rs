//! Bound reports over a time grid for one vertex pair.

use std::io::Write;

use serde::Serialize;

use super::{
    bound_interval, bound_main, bound_poly, bound_short_long, bound_subexp, passes,
    tail_mass_bound, ConstantChoice, ConstantLedger, DomainFlag, Evaluated, Formula,
    GaussianInputs, Provenance,
};
use crate::error::{invalid, Result};
use crate::graph::WeightedGraph;
use crate::kernel::{heat_kernel_path, normalized_sq_sum, DEFAULT_TOL};
use crate::metric::AdaptedMetric;
use crate::regularity::{
    check_envelope, derived_constants_with, fit_regularity, BetaConvention, DecayProfile,
    Envelope, EnvelopeCheck, Interval, OnDiagonalProfile, RegularityFit, RegularityOptions,
};
use crate::report::fmt_num;

/// `f(t) = 1/P_x(X_t = x)` with its fitted regularity and growth constants.
#[derive(Debug, Clone)]
pub struct FittedProfile {
    pub vertex: usize,
    pub fit: RegularityFit,
    /// Exponential envelope checked with `A = 1`; its `minimal_a` is the
    /// least constant for the envelope.
    pub envelope: EnvelopeCheck,
    /// `max(A_regularity, A_envelope, 1)`.
    pub a: f64,
    pub profile: OnDiagonalProfile,
}

impl FittedProfile {
    pub fn ln_f(&self, ts: &[f64]) -> Result<Vec<f64>> {
        Ok(self.profile.eval_many(ts)?.into_iter().map(f64::ln).collect())
    }
}

/// Fit `A` for the on-diagonal profile at `x` on `interval`, both for
/// `(A, γ)`-regularity and for the envelope `A e^{δt}`.
pub fn fit_profile(
    g: &WeightedGraph,
    x: usize,
    gamma: f64,
    delta: f64,
    interval: Interval,
    opts: &RegularityOptions,
    tol: f64,
) -> Result<FittedProfile> {
    let profile = OnDiagonalProfile::new(g, x, tol)?;
    let fit = fit_regularity(&profile, gamma, interval, opts)?;
    let envelope = check_envelope(&profile, Envelope::Exp { delta }, 1.0, interval, opts)?;
    let a = fit.a.max(envelope.minimal_a).max(1.0);
    Ok(FittedProfile {
        vertex: x,
        fit,
        envelope,
        a,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub x1: usize,
    pub x2: usize,
    pub times: Vec<f64>,
    pub formulas: Vec<Formula>,
    pub constants: ConstantChoice,
    pub gamma: f64,
    /// Exponential growth rate (`>= 1`); also the `δ` of the stretched form.
    pub delta: f64,
    /// Stretched-exponential exponent (`[0, 1)`) and polynomial exponent.
    pub epsilon: f64,
    pub t1: f64,
    pub t2: f64,
    pub tol: f64,
    pub convention: BetaConvention,
    /// Grid density for fitting the profiles.
    pub per_decade: usize,
}

impl BoundConfig {
    pub fn new(x1: usize, x2: usize, times: Vec<f64>) -> Self {
        BoundConfig {
            x1,
            x2,
            times,
            formulas: Formula::ALL.to_vec(),
            constants: ConstantChoice::Paper,
            gamma: 2.0,
            delta: 1.0,
            epsilon: 0.5,
            t1: 0.0,
            t2: f64::INFINITY,
            tol: DEFAULT_TOL,
            convention: BetaConvention::default(),
            per_decade: 64,
        }
    }

    pub fn with_formulas(mut self, formulas: Vec<Formula>) -> Self {
        self.formulas = formulas;
        self
    }

    pub fn with_constants(mut self, constants: ConstantChoice) -> Self {
        self.constants = constants;
        self
    }

    pub fn with_window(mut self, t1: f64, t2: f64) -> Self {
        self.t1 = t1;
        self.t2 = t2;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub formula: Formula,
    pub x1: String,
    pub x2: String,
    pub t: f64,
    pub d_nu: f64,
    pub p_computed: f64,
    pub err_bound: f64,
    pub log_bound: f64,
    pub log_ratio: f64,
    pub constants_provenance: Provenance,
    pub pass: bool,
    pub domain_flag: DomainFlag,
    /// `ln f₁`, `ln f₂` at the formula's time argument (Gaussian forms only).
    pub ln_f1: Option<f64>,
    pub ln_f2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSummary {
    pub vertex: String,
    pub a_regularity: f64,
    pub a_envelope: f64,
    pub a: f64,
    pub witness: (f64, f64),
    pub interval: Interval,
    pub points: usize,
    pub per_decade: Option<usize>,
}

impl ProfileSummary {
    fn new(g: &WeightedGraph, p: &FittedProfile) -> Self {
        ProfileSummary {
            vertex: g.id(p.vertex).to_string(),
            a_regularity: p.fit.a,
            a_envelope: p.envelope.minimal_a,
            a: p.a,
            witness: p.fit.witness,
            interval: p.fit.interval,
            points: p.fit.points,
            per_decade: p.fit.per_decade,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaSummary {
    pub formula: Formula,
    pub rows: usize,
    pub in_domain: usize,
    /// In-domain rows that fail.
    pub failures: usize,
    /// Out-of-domain rows that fail (informational).
    pub out_of_domain_failures: usize,
    pub worst_log_ratio: Option<f64>,
    pub provenance: Provenance,
    /// `ln` of the constant used in the rows (absent for formulas without a
    /// free constant).
    pub ln_constant: Option<f64>,
    /// `ln` of the least constant making every in-domain row hold.
    pub ln_fitted_constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub x1: String,
    pub x2: String,
    pub d_nu: f64,
    pub times: usize,
    pub gamma: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub t1: f64,
    pub t2: f64,
    pub alpha: f64,
    pub beta: u32,
    pub beta_alternative: u32,
    pub a_global: Option<f64>,
    pub a_window: Option<f64>,
    pub profiles: Vec<ProfileSummary>,
    pub constants: ConstantLedger,
    pub formulas: Vec<FormulaSummary>,
    pub rows: usize,
    pub failures: usize,
    pub pass: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
    pub summary: BoundSummary,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn rows_for(&self, formula: Formula) -> impl Iterator<Item = &BoundRow> {
        self.rows.iter().filter(move |r| r.formula == formula)
    }
}

/// A row before the free constant is chosen.
struct Draft {
    t: f64,
    p: f64,
    err: f64,
    /// Log bound with `ln C = 0` for formulas with a free constant.
    shape: f64,
    domain: DomainFlag,
    ln_f: Option<(f64, f64)>,
}

fn draft(t: f64, p: f64, err: f64, e: Evaluated, ln_f: Option<(f64, f64)>) -> Draft {
    Draft {
        t,
        p,
        err,
        shape: e.log_bound,
        domain: e.domain,
        ln_f,
    }
}

fn validate(g: &WeightedGraph, cfg: &BoundConfig) -> Result<()> {
    g.check_vertex(cfg.x1)?;
    g.check_vertex(cfg.x2)?;
    if cfg.times.is_empty() {
        return Err(crate::error::Error::EmptyGrid);
    }
    if cfg.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(invalid("bound times must be positive and finite"));
    }
    if cfg.formulas.is_empty() {
        return Err(invalid("no formula selected"));
    }
    Ok(())
}

/// Evaluate every selected formula at every time and compare with the exact
/// `P_{x1}(X_t = x2)` (or the exact tail mass for the ball formula).
///
/// Rows are ordered by formula, then by the order of `cfg.times`.
pub fn bound_sweep(g: &WeightedGraph, metric: &AdaptedMetric, cfg: &BoundConfig) -> Result<BoundReport> {
    validate(g, cfg)?;
    let derived = derived_constants_with(cfg.gamma, cfg.delta, cfg.convention)?;
    let (alpha, beta) = (derived.alpha, derived.beta);
    let paper = ConstantLedger::paper();
    let (x1, x2) = (cfg.x1, cfg.x2);
    let d = metric.dist(x1, x2);
    let times = &cfg.times;
    let mut notes = vec![format!(
        "beta convention: {} = {} is used; {} would give {}",
        cfg.convention.formula(),
        beta,
        cfg.convention.other().formula(),
        cfg.convention.other().beta(cfg.gamma)
    )];

    let needs_profiles = cfg.formulas.iter().any(|f| f.has_free_constant());
    let needs_window = cfg.formulas.contains(&Formula::Windowed);

    // profiles are evaluated at αt and t/(2γ); fit with margin on both sides
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let lo = alpha.min(1.0 / (2.0 * cfg.gamma)) * t_min / 4.0;
    let hi = 4.0 * cfg.gamma * t_max;
    let opts = RegularityOptions {
        per_decade: cfg.per_decade,
        ..Default::default()
    };

    let mut profiles = Vec::new();
    let mut a_global = None;
    let mut a_window = None;
    let mut ln_f_alpha = vec![(0.0, 0.0); times.len()];
    let mut ln_f_half = vec![(0.0, 0.0); times.len()];
    if needs_profiles {
        let global = Interval::new(lo, hi)?;
        let p1 = fit_profile(g, x1, cfg.gamma, cfg.delta, global, &opts, cfg.tol)?;
        let p2 = if x2 == x1 {
            p1.clone()
        } else {
            fit_profile(g, x2, cfg.gamma, cfg.delta, global, &opts, cfg.tol)?
        };
        a_global = Some(p1.a.max(p2.a));
        if needs_window {
            if cfg.t1 > 0.0 || cfg.t2.is_finite() {
                let window = Interval::new(cfg.t1.max(lo), cfg.t2.min(hi)).map_err(|_| {
                    invalid(format!(
                        "window [{}, {}) does not meet the fitting range [{lo}, {hi})",
                        cfg.t1, cfg.t2
                    ))
                })?;
                let w1 = fit_profile(g, x1, cfg.gamma, cfg.delta, window, &opts, cfg.tol)?;
                let w2 = fit_profile(g, x2, cfg.gamma, cfg.delta, window, &opts, cfg.tol)?;
                a_window = Some(w1.a.max(w2.a));
            } else {
                a_window = a_global;
            }
        }
        let args: Vec<f64> = times
            .iter()
            .map(|t| alpha * t)
            .chain(times.iter().map(|t| t / (2.0 * cfg.gamma)))
            .collect();
        let f1 = p1.ln_f(&args)?;
        let f2 = p2.ln_f(&args)?;
        let n = times.len();
        for i in 0..n {
            ln_f_alpha[i] = (f1[i], f2[i]);
            ln_f_half[i] = (f1[n + i], f2[n + i]);
        }
        profiles.push(ProfileSummary::new(g, &p1));
        if x2 != x1 {
            profiles.push(ProfileSummary::new(g, &p2));
        }
    }

    let kernels = heat_kernel_path(g, x1, times, cfg.tol)?;
    let (nu1, nu2) = (g.nu(x1), g.nu(x2));
    let max_ratio = (0..g.len()).map(|z| nu1 / g.nu(z)).fold(0.0, f64::max);

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &formula in &cfg.formulas {
        let mut drafts = Vec::new();
        for (i, (&t, k)) in times.iter().zip(&kernels).enumerate() {
            let p = k.probs[x2];
            let err = k.err_bound;
            let gauss = |(ln_f1, ln_f2): (f64, f64)| GaussianInputs {
                ln_f1,
                ln_f2,
                nu1,
                nu2,
                d,
                t,
            };
            let unit = ConstantLedger {
                ln_c1: 0.0,
                ..paper
            };
            match formula {
                Formula::Global => {
                    let a = a_global.expect("profiles fitted");
                    let e = bound_main(&gauss(ln_f_alpha[i]), a, beta, &unit)?;
                    drafts.push(draft(t, p, err, e, Some(ln_f_alpha[i])));
                }
                Formula::Windowed => {
                    let a = a_window.expect("window fitted");
                    let e = bound_interval(&gauss(ln_f_alpha[i]), a, beta, &unit, alpha, cfg.t1, cfg.t2)?;
                    drafts.push(draft(t, p, err, e, Some(ln_f_alpha[i])));
                }
                Formula::SubExponential => {
                    let e = bound_subexp(&gauss(ln_f_half[i]), &unit, cfg.delta, cfg.epsilon, cfg.t1, cfg.t2)?;
                    drafts.push(draft(t, p, err, e, Some(ln_f_half[i])));
                }
                Formula::Polynomial => {
                    let e = bound_poly(&gauss(ln_f_half[i]), &unit, cfg.epsilon, cfg.t1, cfg.t2)?;
                    drafts.push(draft(t, p, err, e, Some(ln_f_half[i])));
                }
                Formula::PointLong | Formula::PointShort => {
                    if d == 0.0 {
                        continue;
                    }
                    let b = bound_short_long(nu1, nu2, d, t)?;
                    let branch = if formula == Formula::PointLong { b.long } else { b.short };
                    if let Some(lb) = branch {
                        drafts.push(Draft {
                            t,
                            p,
                            err,
                            shape: lb,
                            domain: DomainFlag::InDomain,
                            ln_f: None,
                        });
                    }
                }
                Formula::TailMass => {
                    let tail = normalized_sq_sum(g, x1, &k.probs, |z| {
                        if metric.dist(x1, z) >= d {
                            1.0
                        } else {
                            0.0
                        }
                    });
                    let tail_err = err * (2.0 + err) * max_ratio;
                    // the statement needs R > 0; at R = 0 evaluate the
                    // long branch (bound 1) and flag it
                    let (lb, domain) = if d > 0.0 {
                        (tail_mass_bound(d, t)?.min(), DomainFlag::InDomain)
                    } else {
                        (0.0, DomainFlag::OutOfDomain)
                    };
                    drafts.push(Draft {
                        t,
                        p: tail,
                        err: tail_err,
                        shape: lb,
                        domain,
                        ln_f: None,
                    });
                }
            }
        }
        if drafts.is_empty() && matches!(formula, Formula::PointLong | Formula::PointShort) {
            if d == 0.0 {
                notes.push(format!(
                    "{} skipped: the pair is at distance 0, where only on-diagonal bounds apply",
                    formula.tag()
                ));
            }
            continue;
        }

        let ln_fitted = drafts
            .iter()
            .filter(|r| r.domain == DomainFlag::InDomain)
            .map(|r| r.p.ln() - r.shape)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
        let (ln_c, provenance) = if !formula.has_free_constant() {
            (None, Provenance::PaperExplicit)
        } else {
            let explicit = matches!(formula, Formula::Global | Formula::Windowed);
            if explicit && cfg.constants == ConstantChoice::Paper {
                (Some(paper.ln_c1), Provenance::PaperExplicit)
            } else {
                (Some(ln_fitted.unwrap_or(0.0)), Provenance::EmpiricalFit)
            }
        };
        if formula.has_free_constant() && ln_fitted.is_none() {
            notes.push(format!(
                "{}: no in-domain time, the constant could not be fitted",
                formula.tag()
            ));
        }

        let mut fs = FormulaSummary {
            formula,
            rows: drafts.len(),
            in_domain: 0,
            failures: 0,
            out_of_domain_failures: 0,
            worst_log_ratio: None,
            provenance,
            ln_constant: ln_c,
            ln_fitted_constant: ln_fitted,
        };
        for dr in drafts {
            let log_bound = dr.shape + ln_c.unwrap_or(0.0);
            let pass = passes(dr.p, dr.err, log_bound);
            let log_ratio = dr.p.ln() - log_bound;
            if dr.domain == DomainFlag::InDomain {
                fs.in_domain += 1;
                fs.failures += !pass as usize;
                fs.worst_log_ratio = Some(fs.worst_log_ratio.map_or(log_ratio, |w: f64| w.max(log_ratio)));
            } else {
                fs.out_of_domain_failures += !pass as usize;
            }
            rows.push(BoundRow {
                formula,
                x1: g.id(x1).to_string(),
                x2: g.id(x2).to_string(),
                t: dr.t,
                d_nu: d,
                p_computed: dr.p,
                err_bound: dr.err,
                log_bound,
                log_ratio,
                constants_provenance: provenance,
                pass,
                domain_flag: dr.domain,
                ln_f1: dr.ln_f.map(|f| f.0),
                ln_f2: dr.ln_f.map(|f| f.1),
            });
        }
        summaries.push(fs);
    }

    let failures = summaries.iter().map(|s| s.failures).sum();
    let summary = BoundSummary {
        x1: g.id(x1).to_string(),
        x2: g.id(x2).to_string(),
        d_nu: d,
        times: times.len(),
        gamma: cfg.gamma,
        delta: cfg.delta,
        epsilon: cfg.epsilon,
        t1: cfg.t1,
        t2: cfg.t2,
        alpha,
        beta,
        beta_alternative: cfg.convention.other().beta(cfg.gamma),
        a_global,
        a_window,
        profiles,
        constants: paper,
        formulas: summaries,
        rows: rows.len(),
        failures,
        pass: failures == 0,
        notes,
    };
    Ok(BoundReport { rows, summary })
}

/// Least constant making `formula` hold at every in-domain grid time:
/// the maximum of `p / bound(C = 1)`.
pub fn fit_empirical_constant(
    g: &WeightedGraph,
    metric: &AdaptedMetric,
    base: &BoundConfig,
    formula: Formula,
) -> Result<f64> {
    let cfg = BoundConfig {
        formulas: vec![formula],
        constants: ConstantChoice::Empirical,
        ..base.clone()
    };
    let report = bound_sweep(g, metric, &cfg)?;
    report
        .summary
        .formulas
        .first()
        .and_then(|s| {
            if formula.has_free_constant() {
                s.ln_fitted_constant
            } else {
                // formulas without a free constant: ratio to the printed bound
                s.worst_log_ratio
            }
        })
        .map(f64::exp)
        .ok_or_else(|| invalid(format!("no in-domain time for {}", formula.tag())))
}

pub const BOUND_CSV_HEADER: [&str; 11] = [
    "formula",
    "x1",
    "x2",
    "t",
    "d_nu",
    "p_computed",
    "log_bound",
    "log_ratio",
    "constants_provenance",
    "pass",
    "domain_flag",
];

pub fn write_bound_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BOUND_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.formula.tag(),
            &r.x1,
            &r.x2,
            &fmt_num(r.t),
            &fmt_num(r.d_nu),
            &fmt_num(r.p_computed),
            &fmt_num(r.log_bound),
            &fmt_num(r.log_ratio),
            r.constants_provenance.as_str(),
            if r.pass { "true" } else { "false" },
            r.domain_flag.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
