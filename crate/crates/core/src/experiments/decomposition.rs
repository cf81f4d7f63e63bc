//! Splitting the linearized maximal operator `Tf(s) = S_{t(s)} f(s)` at the
//! frequency `B/s`, and the scaling of the expansion errors that control the
//! high-frequency piece.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{panel_breaks, QuadratureGrid};
use crate::space::SpaceParams;
use crate::specfun::{bessel_leading_oscillation, ln_gamma_real};
use crate::spherical::{hc_leading_value, radial_jacobian_ratio, PhiTable};
use crate::transform::{sobolev_norm, PropagatorSpec, Resolution, SobolevIndex, SpectralShape, SphericalTransform};

/// Low- and high-frequency parts of `Tf(s)` at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecompositionRow {
    pub s: f64,
    pub t: f64,
    pub cut: f64,
    pub total: Complex64,
    pub low: Complex64,
    pub high: Complex64,
    /// `|low + high - total|`.
    pub additivity_defect: f64,
    /// Cauchy-Schwarz bound `C ||f||_{H^{1/4}} (int_0^{B/s} w^{-1/4} |c|^{-2})^{1/2}` on `|low|`.
    pub low_bound: f64,
}

impl DecompositionRow {
    pub fn low_within_bound(&self) -> bool {
        self.low.norm() <= self.low_bound * (1.0 + 1e-12)
    }
}

/// `C int_grid phi_lambda(s) e^{i t d(lambda)} f^(lambda) |c|^{-2} dlambda` at one radius.
fn linearized_piece(
    transform: &SphericalTransform,
    shape: &SpectralShape,
    grid: &QuadratureGrid,
    s: f64,
    t: f64,
    spec: PropagatorSpec,
) -> Result<Complex64> {
    let params = transform.params();
    let table = PhiTable::new(params, grid.nodes(), &[s])?;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((&l, w), phi) in grid.nodes().iter().zip(grid.weights()).zip(table.row(0)) {
        acc += spec.multiplier(params, l, t) * (w * phi * shape.value(l) * params.plancherel_density(l));
    }
    Ok(acc * transform.constant()?)
}

fn grid_on(a: f64, b: f64, width: f64) -> Result<Option<QuadratureGrid>> {
    if b <= a {
        return Ok(None);
    }
    Ok(Some(QuadratureGrid::gauss_panels(&panel_breaks(a, b, width))?))
}

/// For each radius `s` with time `t(s)`, evaluate `Tf(s)` on the standard
/// spectral grid and its parts on `[0, B/s]` and `[B/s, lambda_max]` on
/// separate grids.
pub fn decomposition_residuals(
    transform: &SphericalTransform,
    shape: &SpectralShape,
    radii: &[f64],
    times: &[f64],
    bn: f64,
    spec: PropagatorSpec,
) -> Result<Vec<DecompositionRow>> {
    if radii.len() != times.len() {
        return Err(Error::domain(
            "decomposition_residuals",
            "one time per radius is required",
        ));
    }
    if matches!(shape, SpectralShape::Band { .. }) {
        return Err(Error::domain("decomposition_residuals", "expects Schwartz-class data"));
    }
    let params = *transform.params();
    let s_max = radii.iter().cloned().fold(0.0, f64::max);
    let t_max = times.iter().map(|t| t.abs()).fold(0.0, f64::max);
    let res = Resolution::new(s_max, t_max).with_propagator(spec);
    let fhat = shape.profile(&params, &res)?;
    let lambda_max = shape.support(&params).1;
    let width = res.panel_width(&params, lambda_max);
    let norm = sobolev_norm(&params, &fhat, SobolevIndex::new(0.25, false)?)?;
    let c = transform.constant()?;
    let zero = Complex64::new(0.0, 0.0);
    radii
        .iter()
        .zip(times)
        .map(|(&s, &t)| {
            if !(s > 0.0) {
                return Err(Error::domain("decomposition_residuals", "radii must be > 0"));
            }
            let cut = bn / s;
            let total = linearized_piece(transform, shape, fhat.grid(), s, t, spec)?;
            let low = match grid_on(0.0, cut.min(lambda_max), width)? {
                Some(g) => linearized_piece(transform, shape, &g, s, t, spec)?,
                None => zero,
            };
            let high = match grid_on(cut, lambda_max, width)? {
                Some(g) => linearized_piece(transform, shape, &g, s, t, spec)?,
                None => zero,
            };
            let dual = low_frequency_dual_norm(&params, cut)?;
            Ok(DecompositionRow {
                s,
                t,
                cut,
                total,
                low,
                high,
                additivity_defect: (low + high - total).norm(),
                low_bound: c * norm * dual,
            })
        })
        .collect()
}

/// `(int_0^{cut} (lambda^2 + Q^2/4)^{-1/4} |c(lambda)|^{-2} dlambda)^{1/2}`.
pub fn low_frequency_dual_norm(params: &SpaceParams, cut: f64) -> Result<f64> {
    let grid = QuadratureGrid::gauss_uniform(0.0, cut, 0.5)?;
    let vals: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&l| (l * l + params.spectral_gap()).powf(-0.25) * params.plancherel_density(l))
        .collect();
    Ok(grid.integrate(&vals).sqrt())
}

/// Which end of the radius range a power-law bound is meant to control.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRegime {
    /// `s -> 0`: the residual may not blow up faster than predicted.
    SmallRadius,
    /// `s -> infinity`: the residual may not grow faster than predicted.
    LargeRadius,
}

/// Least-squares slope of `ln y` against `ln s`, next to the predicted slope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub predicted: f64,
    pub regime: BoundRegime,
    pub samples: Vec<(f64, f64)>,
}

impl ExponentFit {
    pub fn deviation(&self) -> f64 {
        (self.exponent - self.predicted).abs()
    }

    /// Whether the fitted power is no worse than predicted, up to `slack`,
    /// in the direction the bound controls.
    pub fn respects_bound(&self, slack: f64) -> bool {
        match self.regime {
            BoundRegime::SmallRadius => self.exponent >= self.predicted - slack,
            BoundRegime::LargeRadius => self.exponent <= self.predicted + slack,
        }
    }
}

/// Least-squares slope of `ln y` on `ln x`, skipping nonpositive `y`.
pub fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Upper end of `lambda s` in the small-radius dual norm.
const BESSEL_SCALED_CUT: f64 = 100.0;
/// Upper end of `lambda` in the large-radius dual norm.
const FAR_LAMBDA_CUT: f64 = 100.0;

/// Error of the small-radius expansion once the Bessel function is replaced
/// by its leading oscillation: `phi - (s^{n-1}/A)^{1/2} 2^mu Gamma(mu+1)
/// main_mu(lambda s) / (lambda s)^mu`.
fn bessel_regime_error(params: &SpaceParams, lambda: f64, s: f64, phi: f64) -> Result<f64> {
    let mu = params.bessel_order().value();
    let x = lambda * s;
    let scale = (mu * std::f64::consts::LN_2 + ln_gamma_real(mu + 1.0)? - mu * x.ln()).exp();
    Ok(phi - radial_jacobian_ratio(params, s)? * scale * bessel_leading_oscillation(mu, x))
}

/// `(int_{B/s}^inf w^{-1/4} |E_1(lambda, s)|^2 |c|^{-2} dlambda)^{1/2}` for
/// the small-radius expansion error `E_1`, integrated in `x = lambda s` up
/// to `x = 100`.
pub fn bessel_error_dual_norm(params: &SpaceParams, s: f64, bn: f64) -> Result<f64> {
    if !(s > 0.0) || bn >= BESSEL_SCALED_CUT {
        return Err(Error::domain(
            "bessel_error_dual_norm",
            "need s > 0 and B below the cut",
        ));
    }
    let xs = QuadratureGrid::gauss_uniform(bn, BESSEL_SCALED_CUT, 1.0)?;
    let lambdas: Vec<f64> = xs.nodes().iter().map(|x| x / s).collect();
    let table = PhiTable::new(params, &lambdas, &[s])?;
    let vals: Vec<f64> = lambdas
        .iter()
        .zip(table.row(0))
        .map(|(&l, &phi)| {
            let e = bessel_regime_error(params, l, s, phi)?;
            Ok((l * l + params.spectral_gap()).powf(-0.25) * e * e * params.plancherel_density(l) / s)
        })
        .collect::<Result<_>>()?;
    Ok(xs.integrate(&vals).sqrt())
}

/// `(int_{B/s}^{100} w^{-1/4} |E_2(lambda, s)|^2 |c|^{-2} dlambda)^{1/2}` at
/// every radius, for the large-radius expansion error `E_2`. One ODE solve
/// per frequency covers all radii.
pub fn far_error_dual_norms(params: &SpaceParams, radii: &[f64], bn: f64) -> Result<Vec<f64>> {
    let s_max = radii.iter().cloned().fold(0.0, f64::max);
    if radii.iter().any(|&s| !(s > 0.0) || bn / s >= FAR_LAMBDA_CUT) {
        return Err(Error::domain(
            "far_error_dual_norms",
            "radii must be > 0 with B/s below the cut",
        ));
    }
    let width = (0.5f64).min(std::f64::consts::PI / s_max);
    let mut cuts: Vec<f64> = radii.iter().map(|s| bn / s).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut breaks = Vec::new();
    for (k, &c) in cuts.iter().enumerate() {
        let next = cuts.get(k + 1).copied().unwrap_or(FAR_LAMBDA_CUT);
        let mut b = panel_breaks(c, next, width);
        b.pop();
        breaks.extend(b);
    }
    breaks.push(FAR_LAMBDA_CUT);
    let grid = QuadratureGrid::gauss_panels(&breaks)?;
    let table = PhiTable::new(params, grid.nodes(), radii)?;
    radii
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let cut = bn / s;
            let mut acc = 0.0;
            for ((&l, w), &phi) in grid.nodes().iter().zip(grid.weights()).zip(table.row(i)) {
                if l < cut {
                    continue;
                }
                let e = phi - hc_leading_value(params, l, s)?;
                acc += w * (l * l + params.spectral_gap()).powf(-0.25) * e * e * params.plancherel_density(l);
            }
            Ok(acc.sqrt())
        })
        .collect()
}

/// Slope of the small-radius dual norm in `s`; predicted `-(2n - 1)/4`.
pub fn bessel_error_scaling(params: &SpaceParams, radii: &[f64], bn: f64) -> Result<ExponentFit> {
    let samples = radii
        .iter()
        .map(|&s| Ok((s, bessel_error_dual_norm(params, s, bn)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentFit {
        exponent: log_log_slope(&samples),
        predicted: -(2.0 * params.n() as f64 - 1.0) / 4.0,
        regime: BoundRegime::SmallRadius,
        samples,
    })
}

/// Slope of `A(s)^{1/2}` times the large-radius dual norm in `s`; predicted 3/4.
pub fn far_error_scaling(params: &SpaceParams, radii: &[f64], bn: f64) -> Result<ExponentFit> {
    let norms = far_error_dual_norms(params, radii, bn)?;
    let samples = radii
        .iter()
        .zip(norms)
        .map(|(&s, n)| Ok((s, n * params.density(s)?.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExponentFit {
        exponent: log_log_slope(&samples),
        predicted: 0.75,
        regime: BoundRegime::LargeRadius,
        samples,
    })
}
