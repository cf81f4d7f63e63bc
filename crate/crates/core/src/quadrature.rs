//! Gauss-Legendre panel grids and an adaptive Gauss-Kronrod integrator.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Default panel order used throughout the crate.
pub const PANEL_ORDER: usize = 16;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// A one-dimensional quadrature rule: strictly increasing nodes with weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(Error::domain("QuadratureGrid", "nodes and weights differ in length"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("QuadratureGrid", "nodes must be strictly increasing"));
        }
        Ok(QuadratureGrid { nodes, weights })
    }

    /// Composite Gauss-Legendre rule with one panel between consecutive breakpoints.
    pub fn gauss_panels(breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain(
                "QuadratureGrid::gauss_panels",
                "need at least two strictly increasing breakpoints",
            ));
        }
        let (x, w) = panel_rule();
        let mut nodes = Vec::with_capacity((breaks.len() - 1) * x.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in breaks.windows(2) {
            let half = 0.5 * (pair[1] - pair[0]);
            let mid = 0.5 * (pair[1] + pair[0]);
            for (xi, wi) in x.iter().zip(w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        Ok(QuadratureGrid { nodes, weights })
    }

    /// `[a, b]` split into panels no wider than `max_width`.
    pub fn gauss_uniform(a: f64, b: f64, max_width: f64) -> Result<Self> {
        Self::gauss_panels(&panel_breaks(a, b, max_width))
    }

    /// Composite trapezoid weights on arbitrary increasing nodes.
    pub fn trapezoid(nodes: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for i in 0..n.saturating_sub(1) {
            let h = 0.5 * (nodes[i + 1] - nodes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        Self::new(nodes, weights)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(values).map(|(w, v)| v * w).sum()
    }
}

/// Breakpoints splitting `[a, b]` into equal panels no wider than `max_width`.
pub fn panel_breaks(a: f64, b: f64, max_width: f64) -> Vec<f64> {
    let panels = (((b - a) / max_width).ceil() as usize).max(1);
    let h = (b - a) / panels as f64;
    let mut breaks: Vec<f64> = (0..panels).map(|k| a + h * k as f64).collect();
    breaks.push(b);
    breaks
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let estimate = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    (estimate, error)
}

struct Interval {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    seq: usize,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Adaptive {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss-Kronrod 7/15 integration of a complex integrand.
///
/// Bisects the interval with the largest error estimate until the summed
/// estimate is below `max(abs_tol, rel_tol |I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<Adaptive> {
    if a == b {
        return Ok(Adaptive {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval {
        a,
        b,
        value,
        error,
        seq: 0,
    });
    let mut seq = 1;
    let mut total = value;
    let mut total_err = error;
    let mut evaluations = 15;
    loop {
        if total_err <= abs_tol.max(rel_tol * total.norm()) {
            break;
        }
        if heap.len() >= max_intervals {
            return Err(Error::accuracy(
                "integrate_adaptive",
                format!("error estimate {total_err:.3e} after {max_intervals} intervals on [{a}, {b}]"),
            ));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        evaluations += 30;
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Interval {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
            seq,
        });
        heap.push(Interval {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
            seq: seq + 1,
        });
        seq += 2;
    }
    // Re-sum in interval order so the result does not depend on heap history.
    let mut parts: Vec<Interval> = heap.into_vec();
    parts.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = parts.iter().map(|p| p.value).sum();
    let error = parts.iter().map(|p| p.error).sum();
    Ok(Adaptive {
        value,
        error,
        evaluations,
    })
}
