//! Time grids.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(invalid(format!("unknown spacing `{other}` (linear|log)"))),
        }
    }
}

/// `count` points from `start` to `stop`, both included.
///
/// Point `i` depends only on `i / (count - 1)`, so a grid with
/// `2 * count - 1` points contains every point of the original.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let g = TimeGrid {
            start,
            stop,
            count,
            spacing,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn log(start: f64, stop: f64, count: usize) -> Result<Self> {
        Self::new(start, stop, count, Spacing::Log)
    }

    pub fn linear(start: f64, stop: f64, count: usize) -> Result<Self> {
        Self::new(start, stop, count, Spacing::Linear)
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start >= 0.0) {
            return Err(invalid("grid endpoints must be finite and non-negative"));
        }
        if self.stop < self.start || (self.count > 1 && self.stop == self.start) {
            return Err(invalid(format!(
                "grid stop {} must exceed start {}",
                self.stop, self.start
            )));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(invalid("log grids need a positive start"));
        }
        Ok(())
    }

    /// Same endpoints, every gap halved.
    pub fn refined(&self) -> Self {
        TimeGrid {
            count: 2 * self.count - 1,
            ..*self
        }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == self.count - 1 {
                    return self.stop;
                }
                let frac = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + frac * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + frac * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}
