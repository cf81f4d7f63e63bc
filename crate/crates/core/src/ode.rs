//! Adaptive Dormand-Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-12,
            abs: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const N: usize> = [f64; N];

fn axpy<const N: usize>(y: &State<N>, h: f64, terms: &[(f64, &State<N>)]) -> State<N> {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `(x0, y0)` and record `y` at every point of
/// `outputs` (which must be increasing and `>= x0`). Steps are clipped so
/// that each output is hit exactly.
pub fn integrate_to<const N: usize, F>(
    f: F,
    x0: f64,
    y0: State<N>,
    outputs: &[f64],
    tol: Tolerance,
) -> Result<Vec<State<N>>>
where
    F: Fn(f64, &State<N>) -> State<N>,
{
    let mut out = Vec::with_capacity(outputs.len());
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = 1e-3f64;
    let mut steps = 0usize;
    let fail = |x: f64, detail: &str| Error::Numerical {
        op: "ode::integrate_to",
        lambda: f64::NAN,
        s: x,
        detail: detail.to_string(),
    };
    for &target in outputs {
        if target < x {
            return Err(fail(x, "output points must be increasing"));
        }
        while x < target {
            if steps >= tol.max_steps {
                return Err(fail(x, "step budget exhausted"));
            }
            let last = target - x <= h;
            let step = if last { target - x } else { h };
            let k2 = f(x + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
            let k3 = f(x + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                x + C5 * step,
                &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                x + step,
                &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if last { target } else { x + step };
            let k7 = f(x_new, &y_new);
            let mut err = 0.0f64;
            for i in 0..N {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            steps += 1;
            if !err.is_finite() {
                return Err(fail(x, "non-finite error estimate"));
            }
            if err <= 1.0 {
                x = x_new;
                y = y_new;
                k1 = k7;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Only grow the nominal step from a full (unclipped) step.
            if !(last && err <= 1.0 && factor > 1.0) {
                h = step * factor;
            }
            if h < 1e-14 * x.abs().max(1.0) {
                return Err(fail(x, "step size underflow"));
            }
        }
        out.push(y);
    }
    Ok(out)
}
