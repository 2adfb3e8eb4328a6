//! Decay profiles `f`: positive, non-decreasing functions of time.

use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;
use crate::kernel::heat_kernel_path;

pub trait DecayProfile {
    fn eval(&self, t: f64) -> Result<f64>;

    fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval(t)).collect()
    }

    fn ln_eval(&self, t: f64) -> Result<f64> {
        self.eval(t).map(f64::ln)
    }

    /// Tables are only checked at their own sample points.
    fn native_grid(&self) -> Option<&[f64]> {
        None
    }

    fn describe(&self) -> String;
}

/// Closed-form profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClosedForm {
    /// `coef * t^exponent`
    Power { coef: f64, exponent: f64 },
    /// `coef * e^{rate t}`
    Exp { coef: f64, rate: f64 },
    /// `coef * e^{rate t^exponent}`
    StretchedExp { coef: f64, rate: f64, exponent: f64 },
}

impl ClosedForm {
    /// `t^{d/2}`
    pub fn power_law(d: f64) -> Self {
        ClosedForm::Power {
            coef: 1.0,
            exponent: d / 2.0,
        }
    }

    pub fn ln_value(&self, t: f64) -> f64 {
        match *self {
            ClosedForm::Power { coef, exponent } => coef.ln() + exponent * t.ln(),
            ClosedForm::Exp { coef, rate } => coef.ln() + rate * t,
            ClosedForm::StretchedExp {
                coef,
                rate,
                exponent,
            } => coef.ln() + rate * t.powf(exponent),
        }
    }
}

impl DecayProfile for ClosedForm {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.ln_value(t).exp())
    }

    fn ln_eval(&self, t: f64) -> Result<f64> {
        Ok(self.ln_value(t))
    }

    fn describe(&self) -> String {
        match *self {
            ClosedForm::Power { coef, exponent } => format!("{coef} * t^{exponent}"),
            ClosedForm::Exp { coef, rate } => format!("{coef} * exp({rate} t)"),
            ClosedForm::StretchedExp {
                coef,
                rate,
                exponent,
            } => format!("{coef} * exp({rate} t^{exponent})"),
        }
    }
}

/// Profile given by a closure.
pub struct FnProfile<F> {
    f: F,
    name: String,
}

impl<F: Fn(f64) -> f64> FnProfile<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnProfile {
            f,
            name: name.into(),
        }
    }
}

impl<F: Fn(f64) -> f64> DecayProfile for FnProfile<F> {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok((self.f)(t))
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Sampled profile with log-log linear interpolation between samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableProfile {
    ts: Vec<f64>,
    fs: Vec<f64>,
}

impl TableProfile {
    /// Strictly increasing positive times, positive non-decreasing values.
    pub fn new(ts: Vec<f64>, fs: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&ts, &fs)?;
        for i in 1..fs.len() {
            if fs[i] < fs[i - 1] {
                return Err(Error::NonMonotone {
                    t: ts[i - 1],
                    f: fs[i - 1],
                    t_next: ts[i],
                    f_next: fs[i],
                });
            }
        }
        Ok(TableProfile { ts, fs })
    }

    /// Replace values by the largest non-decreasing function below them
    /// (running minimum from the right) before building.
    pub fn monotone_minorant(ts: Vec<f64>, mut fs: Vec<f64>) -> Result<Self> {
        Self::validate_shape(&ts, &fs)?;
        for i in (0..fs.len().saturating_sub(1)).rev() {
            fs[i] = fs[i].min(fs[i + 1]);
        }
        Ok(TableProfile { ts, fs })
    }

    fn validate_shape(ts: &[f64], fs: &[f64]) -> Result<()> {
        if ts.len() != fs.len() || ts.is_empty() {
            return Err(invalid("profile table needs matching, non-empty columns"));
        }
        if ts.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(invalid("profile times must be positive"));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("profile times must be strictly increasing"));
        }
        if fs.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return Err(invalid("profile values must be positive"));
        }
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.fs
    }

    /// Two-column `t,f` CSV; a non-numeric first row is taken as a header.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut ts = Vec::new();
        let mut fs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "expected two columns `t,f`".into(),
                });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(f)) => {
                    ts.push(t);
                    fs.push(f);
                }
                _ if i == 0 => {}
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("non-numeric row `{},{}`", &rec[0], &rec[1]),
                    })
                }
            }
        }
        Self::new(ts, fs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }
}

impl DecayProfile for TableProfile {
    fn eval(&self, t: f64) -> Result<f64> {
        // sample points return the stored value exactly
        match self.ts.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => Ok(self.fs[i]),
            Err(_) => self.ln_eval(t).map(f64::exp),
        }
    }

    fn ln_eval(&self, t: f64) -> Result<f64> {
        let (lo, hi) = (self.ts[0], self.ts[self.ts.len() - 1]);
        let slack = 1e-12 * hi;
        if !(t >= lo - slack && t <= hi + slack) {
            return Err(Error::OutOfRange { t, lo, hi });
        }
        let i = self.ts.partition_point(|s| *s < t);
        if i < self.ts.len() && (self.ts[i] - t).abs() <= slack {
            return Ok(self.fs[i].ln());
        }
        if i == 0 {
            return Ok(self.fs[0].ln());
        }
        if i >= self.ts.len() {
            return Ok(self.fs[self.fs.len() - 1].ln());
        }
        let (t0, t1) = (self.ts[i - 1].ln(), self.ts[i].ln());
        let (f0, f1) = (self.fs[i - 1].ln(), self.fs[i].ln());
        let w = (t.ln() - t0) / (t1 - t0);
        Ok(f0 + w * (f1 - f0))
    }

    fn native_grid(&self) -> Option<&[f64]> {
        Some(&self.ts)
    }

    fn describe(&self) -> String {
        format!("table with {} samples", self.ts.len())
    }
}

/// `f(t) = 1 / P_x(X_t = x)`, computed from exact heat kernels.
///
/// Batched evaluation returns the largest non-decreasing minorant of the raw
/// values over the requested times, so `P_x(X_t = x) <= 1 / f(t)` still holds.
/// For reversible walks the raw curve is already non-decreasing and this only
/// removes round-off.
#[derive(Debug, Clone)]
pub struct OnDiagonalProfile {
    graph: WeightedGraph,
    vertex: usize,
    tol: f64,
}

impl OnDiagonalProfile {
    pub fn new(graph: &WeightedGraph, vertex: usize, tol: f64) -> Result<Self> {
        graph.check_vertex(vertex)?;
        Ok(OnDiagonalProfile {
            graph: graph.clone(),
            vertex,
            tol,
        })
    }

    pub fn vertex(&self) -> usize {
        self.vertex
    }

    /// Sample into a table on `times`.
    pub fn to_table(&self, times: &[f64]) -> Result<TableProfile> {
        let fs = self.eval_many(times)?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
        let ts = order.iter().map(|&i| times[i]).collect();
        TableProfile::monotone_minorant(ts, order.iter().map(|&i| fs[i]).collect())
    }
}

impl DecayProfile for OnDiagonalProfile {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(self.eval_many(&[t])?[0])
    }

    fn eval_many(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let rows = heat_kernel_path(&self.graph, self.vertex, ts, self.tol)?;
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        let mut out = vec![0.0; ts.len()];
        let mut running = f64::INFINITY;
        for &i in order.iter().rev() {
            running = running.min(1.0 / rows[i].probs[self.vertex]);
            out[i] = running;
        }
        Ok(out)
    }

    fn describe(&self) -> String {
        format!("1 / P_x(X_t = x) at {}", self.graph.id(self.vertex))
    }
}
