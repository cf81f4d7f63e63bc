//! Spherical functions: the reference ODE solver, the two leading-term
//! expansions (Bessel near the origin, Harish-Chandra far out) and tables
//! over `(lambda, s)` grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::h3::phi_h3;
use crate::ode::{integrate_to, Tolerance};
use crate::space::SpaceParams;
use crate::specfun::normalized_bessel;

/// Default switch between the small-radius and large-radius expansions.
pub const DEFAULT_R0: f64 = 1.5;

/// Smallest `|lambda|` accepted by the large-radius expansion.
pub const MIN_HC_LAMBDA: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Ode,
    #[serde(rename = "bessel")]
    BesselLeading,
    #[serde(rename = "hc")]
    HcLeading,
    #[serde(rename = "closed")]
    ClosedFormH3,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Ode => "ode",
            Backend::BesselLeading => "bessel",
            Backend::HcLeading => "hc",
            Backend::ClosedFormH3 => "closed",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ode" => Ok(Backend::Ode),
            "bessel" => Ok(Backend::BesselLeading),
            "hc" => Ok(Backend::HcLeading),
            "closed" => Ok(Backend::ClosedFormH3),
            other => Err(Error::domain("Backend", format!("unknown backend {other:?}"))),
        }
    }
}

/// One evaluated sample of a spherical function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiEvaluation {
    pub lambda: f64,
    pub s: f64,
    pub value: f64,
    pub backend: Backend,
    pub residual_estimate: f64,
}

fn ode_tolerance() -> Tolerance {
    Tolerance {
        rel: 1e-12,
        abs: 1e-15,
        ..Tolerance::default()
    }
}

/// Series start `1 + a2 s^2 + a4 s^4` of the regular solution and the point
/// where integration takes over.
struct SeriesStart {
    a2: f64,
    a4: f64,
    s0: f64,
}

impl SeriesStart {
    fn new(params: &SpaceParams, k: f64) -> Self {
        let n = params.n() as f64;
        let b = params.log_density_linear_coefficient();
        let a2 = -k / (2.0 * n);
        let a4 = -a2 * (2.0 * b + k) / (4.0 * (n + 2.0));
        let s0 = 1e-3f64.min(0.05 / k.sqrt());
        SeriesStart { a2, a4, s0 }
    }

    fn value(&self, s: f64) -> f64 {
        let s2 = s * s;
        1.0 + s2 * (self.a2 + self.a4 * s2)
    }

    fn derivative(&self, s: f64) -> f64 {
        let s2 = s * s;
        s * (2.0 * self.a2 + 4.0 * self.a4 * s2)
    }
}

/// `phi_lambda` at every radius in `s_nodes` (any order, `s >= 0`) from the
/// radial eigenvalue equation `u'' + (A'/A) u' + (lambda^2 + Q^2/4) u = 0`.
pub fn phi_ode_profile_with(params: &SpaceParams, lambda: f64, s_nodes: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    if let Some(&bad) = s_nodes.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
        return Err(Error::domain(
            "phi_ode",
            format!("radius {bad} must be finite and >= 0"),
        ));
    }
    let k = lambda * lambda + params.spectral_gap();
    let start = SeriesStart::new(params, k);
    let mut order: Vec<usize> = (0..s_nodes.len()).collect();
    order.sort_by(|&a, &b| s_nodes[a].total_cmp(&s_nodes[b]));
    let mut out = vec![0.0; s_nodes.len()];
    let split = order.partition_point(|&i| s_nodes[i] <= start.s0);
    for &i in &order[..split] {
        out[i] = start.value(s_nodes[i]);
    }
    if split == order.len() {
        return Ok(out);
    }
    let targets: Vec<f64> = order[split..].iter().map(|&i| s_nodes[i]).collect();
    let rhs = |s: f64, y: &[f64; 2]| [y[1], -params.log_density_derivative(s) * y[1] - k * y[0]];
    let y0 = [start.value(start.s0), start.derivative(start.s0)];
    let ys = integrate_to(rhs, start.s0, y0, &targets, tol).map_err(|e| match e {
        Error::Numerical { s, detail, .. } => Error::Numerical {
            op: "phi_ode",
            lambda,
            s,
            detail,
        },
        other => other,
    })?;
    for (&i, y) in order[split..].iter().zip(ys) {
        out[i] = y[0];
    }
    Ok(out)
}

pub fn phi_ode_profile(params: &SpaceParams, lambda: f64, s_nodes: &[f64]) -> Result<Vec<f64>> {
    phi_ode_profile_with(params, lambda, s_nodes, ode_tolerance())
}

/// Reference value of `phi_lambda(s)` from the ODE.
pub fn phi_ode(params: &SpaceParams, lambda: f64, s: f64) -> Result<f64> {
    Ok(phi_ode_profile(params, lambda, &[s])?[0])
}

/// Best available value: the closed form on hyperbolic 3-space, the ODE
/// otherwise.
pub fn phi(params: &SpaceParams, lambda: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain("phi", format!("radius {s} must be >= 0")));
    }
    if params.is_h3() {
        Ok(phi_h3(lambda, s))
    } else {
        phi_ode(params, lambda, s)
    }
}

/// Leading term of an expansion with its measured defect and the envelope
/// that the defect is expected to scale like.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadingTerm {
    pub value: f64,
    /// `|phi_ode - value|`.
    pub defect: f64,
    pub envelope: f64,
}

impl LeadingTerm {
    /// Whether `defect <= c * envelope`.
    pub fn within(&self, c: f64) -> bool {
        self.defect <= c * self.envelope
    }
}

/// Smallest `C` with `defect <= C * envelope` for every term.
pub fn fit_envelope_constant(terms: &[LeadingTerm]) -> f64 {
    terms
        .iter()
        .filter(|t| t.envelope > 0.0)
        .map(|t| t.defect / t.envelope)
        .fold(0.0, f64::max)
}

/// `(s^{n-1} / A(s))^{1/2}`.
pub fn radial_jacobian_ratio(params: &SpaceParams, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(1.0);
    }
    let n = params.n() as f64;
    Ok((0.5 * ((n - 1.0) * s.ln() - params.log_density(s)?)).exp())
}

/// Bessel leading term `(s^{n-1}/A(s))^{1/2} J_{(n-2)/2}(lambda s)` with the
/// unit-normalized Bessel function, valid for `0 < s <= r0 < 2`.
pub fn phi_bessel_leading(params: &SpaceParams, lambda: f64, s: f64, r0: f64) -> Result<LeadingTerm> {
    if !(r0 > 0.0 && r0 < 2.0) {
        return Err(Error::domain(
            "phi_bessel_leading",
            format!("r0 = {r0} must lie in (0, 2)"),
        ));
    }
    if !(s > 0.0 && s <= r0) {
        return Err(Error::domain(
            "phi_bessel_leading",
            format!("radius {s} outside (0, {r0}]"),
        ));
    }
    let value = radial_jacobian_ratio(params, s)? * normalized_bessel(params.bessel_order(), lambda * s)?;
    let reference = phi(params, lambda, s)?;
    let z = (lambda * s).abs();
    let envelope = if z <= 1.0 {
        s * s
    } else {
        let n = params.n() as f64;
        s * s * z.powf(-(0.5 * (n - 1.0) + 1.0))
    };
    Ok(LeadingTerm {
        value,
        defect: (reference - value).abs(),
        envelope,
    })
}

/// Two-term large-radius expansion `k A(s)^{-1/2} 2 Re(c(lambda) e^{i lambda s})`.
pub fn hc_leading_value(params: &SpaceParams, lambda: f64, s: f64) -> Result<f64> {
    if lambda.abs() < MIN_HC_LAMBDA {
        return Err(Error::Pole {
            op: "phi_hc_leading",
            at: format!("lambda = {lambda}"),
        });
    }
    let c = params.c_function(lambda)?;
    let phase = num_complex::Complex64::from_polar(1.0, lambda * s);
    let amp = (-0.5 * params.log_density(s)?).exp();
    Ok(params.hc_prefactor() * amp * 2.0 * (c * phase).re)
}

/// Large-radius leading term for `s >= r0`; the envelope is
/// `A(s)^{-1/2} |c(lambda)| / (1 + |lambda|)`.
pub fn phi_hc_leading(params: &SpaceParams, lambda: f64, s: f64, r0: f64) -> Result<LeadingTerm> {
    if !(s >= r0) {
        return Err(Error::domain("phi_hc_leading", format!("radius {s} below r0 = {r0}")));
    }
    let value = hc_leading_value(params, lambda, s)?;
    let reference = phi(params, lambda, s)?;
    Ok(LeadingTerm {
        value,
        defect: (reference - value).abs(),
        envelope: hc_envelope(params, lambda, s)?,
    })
}

fn hc_envelope(params: &SpaceParams, lambda: f64, s: f64) -> Result<f64> {
    Ok((-0.5 * params.log_density(s)?).exp() * params.c_function(lambda)?.norm() / (1.0 + lambda.abs()))
}

/// Largest of `values` over `|x - x_i| <= half_width`, at every sorted `x_i`.
pub fn windowed_sup(xs: &[f64], values: &[f64], half_width: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let (mut lo, mut hi) = (0, 0);
    for &x in xs {
        while xs[lo] < x - half_width {
            lo += 1;
        }
        while hi + 1 < xs.len() && xs[hi + 1] <= x + half_width {
            hi += 1;
        }
        out.push(values[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    }
    out
}

/// Spread of the scaled large-radius defect `|phi - HC| / envelope` across
/// frequencies at one radius.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualSpread {
    pub s: f64,
    /// `max / median` of the scaled defect sampled pointwise.
    pub pointwise: f64,
    /// `max / median` of its upper envelope: the sup over one oscillation
    /// period `2 pi / s` around each frequency.
    pub enveloped: f64,
}

fn max_over_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    let median = if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    };
    v[v.len() - 1] / median
}

/// [`ResidualSpread`] at each radius `s >= r0` over sorted `lambdas`.
pub fn hc_residual_spreads(
    params: &SpaceParams,
    lambdas: &[f64],
    radii: &[f64],
    r0: f64,
) -> Result<Vec<ResidualSpread>> {
    if lambdas.len() < 2 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain(
            "hc_residual_spreads",
            "need at least two increasing frequencies",
        ));
    }
    if let Some(&s) = radii.iter().find(|&&s| !(s >= r0)) {
        return Err(Error::domain(
            "hc_residual_spreads",
            format!("radius {s} below r0 = {r0}"),
        ));
    }
    let table = PhiTable::new(params, lambdas, radii)?;
    radii
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let scaled = lambdas
                .iter()
                .zip(table.row(i))
                .map(|(&l, &phi)| Ok((phi - hc_leading_value(params, l, s)?).abs() / hc_envelope(params, l, s)?))
                .collect::<Result<Vec<f64>>>()?;
            let env = windowed_sup(lambdas, &scaled, std::f64::consts::PI / s);
            Ok(ResidualSpread {
                s,
                pointwise: max_over_median(&scaled),
                enveloped: max_over_median(&env),
            })
        })
        .collect()
}

/// Reference run for the ODE residual estimate.
const LOOSE_TOLERANCE: Tolerance = Tolerance {
    rel: 1e-10,
    abs: 1e-13,
    max_steps: 2_000_000,
};

/// Evaluate one sample with the chosen backend.
///
/// The residual estimate is the change under a 100x looser ODE tolerance for
/// the ODE backend, the defect against the reference for the expansions, and
/// 0 for the closed form.
pub fn evaluate(params: &SpaceParams, lambda: f64, s: f64, backend: Backend, r0: f64) -> Result<PhiEvaluation> {
    let (value, residual_estimate) = match backend {
        Backend::Ode => {
            let fine = phi_ode(params, lambda, s)?;
            let coarse = phi_ode_profile_with(params, lambda, &[s], LOOSE_TOLERANCE)?[0];
            (fine, (fine - coarse).abs())
        }
        Backend::BesselLeading => {
            let t = phi_bessel_leading(params, lambda, s, r0)?;
            (t.value, t.defect)
        }
        Backend::HcLeading => {
            let t = phi_hc_leading(params, lambda, s, r0)?;
            (t.value, t.defect)
        }
        Backend::ClosedFormH3 => {
            if !params.is_h3() {
                return Err(Error::domain(
                    "evaluate",
                    "the closed form exists only on hyperbolic 3-space",
                ));
            }
            if !(s >= 0.0) {
                return Err(Error::domain("evaluate", format!("radius {s} must be >= 0")));
            }
            (phi_h3(lambda, s), 0.0)
        }
    };
    Ok(PhiEvaluation {
        lambda,
        s,
        value,
        backend,
        residual_estimate,
    })
}

/// [`evaluate`] at several radii; the ODE backend integrates each tolerance
/// once across all of them.
pub fn evaluate_radii(
    params: &SpaceParams,
    lambda: f64,
    radii: &[f64],
    backend: Backend,
    r0: f64,
) -> Result<Vec<PhiEvaluation>> {
    if backend != Backend::Ode {
        return radii
            .iter()
            .map(|&s| evaluate(params, lambda, s, backend, r0))
            .collect();
    }
    let fine = phi_ode_profile(params, lambda, radii)?;
    let coarse = phi_ode_profile_with(params, lambda, radii, LOOSE_TOLERANCE)?;
    Ok(radii
        .iter()
        .zip(fine.iter().zip(coarse))
        .map(|(&s, (&f, c))| PhiEvaluation {
            lambda,
            s,
            value: f,
            backend,
            residual_estimate: (f - c).abs(),
        })
        .collect())
}

/// `phi_lambda(s)` on a product grid, stored row-major with one row per radius
/// so that a row is a vector over `lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTable {
    lambdas: Vec<f64>,
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl PhiTable {
    /// Tabulate with the best available backend. ODE solves run in parallel
    /// over `lambda`; the result does not depend on the schedule.
    pub fn new(params: &SpaceParams, lambdas: &[f64], radii: &[f64]) -> Result<Self> {
        let columns: Vec<Vec<f64>> = if params.is_h3() {
            lambdas
                .iter()
                .map(|&l| radii.iter().map(|&s| phi_h3(l, s)).collect())
                .collect()
        } else {
            lambdas
                .par_iter()
                .map(|&l| phi_ode_profile(params, l, radii))
                .collect::<Result<_>>()?
        };
        let (nl, ns) = (lambdas.len(), radii.len());
        let mut values = vec![0.0; nl * ns];
        for (j, col) in columns.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                values[i * nl + j] = *v;
            }
        }
        Ok(PhiTable {
            lambdas: lambdas.to_vec(),
            radii: radii.to_vec(),
            values,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Values at radius index `i` across all `lambda`.
    pub fn row(&self, i: usize) -> &[f64] {
        let nl = self.lambdas.len();
        &self.values[i * nl..(i + 1) * nl]
    }

    pub fn get(&self, lambda_index: usize, radius_index: usize) -> f64 {
        self.values[radius_index * self.lambdas.len() + lambda_index]
    }

    /// Row-major `radii x lambdas` matrix.
    pub fn as_matrix(&self) -> &[f64] {
        &self.values
    }
}
