//! CSV writers for kernel and simulation output.
//!
//! Floating-point columns use [`fmt_num`]: twelve significant digits in
//! exponent form, so files are stable across platforms and diff cleanly.

use std::io::Write;

use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::kernel::{HeatKernelResult, SimulationResult};

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // fold -0 into 0
        return "0".to_string();
    }
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

/// Columns `source,target,t,prob,method,err_bound`, one row per target.
pub fn write_kernel_csv<W: Write>(g: &WeightedGraph, rows: &[HeatKernelResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "t", "prob", "method", "err_bound"])?;
    for r in rows {
        for (y, p) in r.probs.iter().enumerate() {
            w.write_record([
                g.id(r.source),
                g.id(y),
                &fmt_num(r.time),
                &fmt_num(*p),
                r.method.as_str(),
                &fmt_num(r.err_bound),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `source,target,t,count,empirical,std_err`.
pub fn write_simulation_csv<W: Write>(g: &WeightedGraph, r: &SimulationResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "t", "count", "empirical", "std_err"])?;
    let n = r.n_paths as f64;
    for (y, (c, p)) in r.counts.iter().zip(&r.empirical).enumerate() {
        w.write_record([
            g.id(r.source),
            g.id(y),
            &fmt_num(r.t_max),
            &c.to_string(),
            &fmt_num(*p),
            &fmt_num((p * (1.0 - p) / n).sqrt()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::two_vertex;
    use crate::kernel::heat_kernel;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.5), "5.00000000000e-1");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_num(123456.789), "1.23456789000e5");
    }

    #[test]
    fn kernel_csv_shape() {
        let g = two_vertex(1.0, 1.0, 1.0).unwrap();
        let r = heat_kernel(&g, 0, 1.0, 1e-12).unwrap();
        let mut buf = Vec::new();
        write_kernel_csv(&g, &[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,a,1.00000000000e0,5.67667641618e-1,"));
    }
}
