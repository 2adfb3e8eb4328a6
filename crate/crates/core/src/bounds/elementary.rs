//! The two scalar inequalities behind the test-function estimates:
//! `e^{εx} + e^{−εx} − 2 <= ε²(e^x + e^{−x} − 2)` and
//! `1 − e^{−εx} >= ε(1 − e^{−x})` for `ε ∈ [0, 1]`, `x >= 0`.
//!
//! Both are evaluated in cancellation-free forms: `e^y + e^{−y} − 2` as
//! `4 sinh²(y/2)` and `1 − e^{−y}` as `−expm1(−y)`.

use serde::Serialize;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementaryReport {
    pub points: usize,
    /// Smallest relative slack of the `cosh` form, with its `(ε, x)`.
    pub worst_cosh: (f64, f64, f64),
    /// Smallest relative slack of the `1 − e^{−x}` form, with its `(ε, x)`.
    pub worst_expm1: (f64, f64, f64),
    pub pass: bool,
}

fn rel(slack: f64, a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        slack / scale
    }
}

/// Both inequalities on an `n_eps × n_x` grid over `[0, 1] × [0, x_max]`;
/// `pass` iff every relative slack is `>= −tol`.
pub fn elementary_inequalities(n_eps: usize, n_x: usize, x_max: f64, tol: f64) -> Result<ElementaryReport> {
    if n_eps < 2 || n_x < 2 || !(x_max > 0.0) {
        return Err(invalid("need at least a 2x2 grid and x_max > 0"));
    }
    let sinh2 = |y: f64| {
        let s = (y / 2.0).sinh();
        4.0 * s * s
    };
    let mut worst_cosh = (f64::INFINITY, 0.0, 0.0);
    let mut worst_expm1 = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n_eps {
        let eps = i as f64 / (n_eps - 1) as f64;
        for j in 0..n_x {
            let x = x_max * j as f64 / (n_x - 1) as f64;
            let lhs = sinh2(eps * x);
            let rhs = eps * eps * sinh2(x);
            let s = rel(rhs - lhs, lhs, rhs);
            if s < worst_cosh.0 {
                worst_cosh = (s, eps, x);
            }
            let lhs = -(-eps * x).exp_m1();
            let rhs = -eps * (-x).exp_m1();
            let s = rel(lhs - rhs, lhs, rhs);
            if s < worst_expm1.0 {
                worst_expm1 = (s, eps, x);
            }
        }
    }
    Ok(ElementaryReport {
        points: n_eps * n_x,
        worst_cosh,
        worst_expm1,
        pass: worst_cosh.0 >= -tol && worst_expm1.0 >= -tol,
    })
}
