//! Dormand–Prince 5(4) integration of `du/dt = u Q`, used as a cross-check
//! on the uniformization series.

use crate::graph::WeightedGraph;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Autonomous system, so the nodes c_i are not needed. The 5th order weights
// are the last row of A; these are the embedded 4th order ones.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(g: &WeightedGraph, u: &[f64], out: &mut [f64]) {
    for (y, o) in out.iter_mut().enumerate() {
        *o = -u[y] * g.rate(y);
    }
    for x in 0..g.len() {
        let ux = u[x];
        if ux != 0.0 {
            let nu = g.nu(x);
            for (y, mu) in g.neighbors(x) {
                out[y] += ux * mu / nu;
            }
        }
    }
}

/// Returns the state at `t` and the accumulated local error estimate.
pub(super) fn integrate(g: &WeightedGraph, init: &[f64], t: f64, tol: f64) -> (Vec<f64>, f64) {
    let n = init.len();
    let mut u = init.to_vec();
    if t == 0.0 {
        return (u, 0.0);
    }
    let lambda = g.max_rate().max(1e-300);
    let mut h = (0.1 / lambda).min(t);
    let mut now = 0.0;
    let mut err_sum = 0.0;
    let mut k = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut next = vec![0.0; n];
    while now < t {
        if now + h > t {
            h = t - now;
        }
        rhs(g, &u, &mut k[0]);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = u[i];
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += h * a * k[j][i];
                }
                stage[i] = acc;
            }
            rhs(g, &stage, &mut k[s]);
        }
        // 5th order solution is the last stage input (FSAL)
        next.copy_from_slice(&stage);
        let mut err = 0.0;
        for i in 0..n {
            let mut low = u[i];
            for (j, b) in B4.iter().enumerate() {
                low += h * b * k[j][i];
            }
            err += (next[i] - low).abs();
        }
        if err <= tol * h / t || h < 1e-14 * t {
            now += h;
            err_sum += err;
            std::mem::swap(&mut u, &mut next);
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (tol * h / t / err).powf(0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }
    (u, err_sum)
}
