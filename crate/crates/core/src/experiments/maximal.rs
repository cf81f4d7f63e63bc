//! Discrete Schrödinger maximal function and the `L^1(B_R)` / Sobolev ratio.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;
use crate::transform::{
    for_each_time_block, sobolev_norm, PropagatorSpec, SobolevIndex, SpectralProfile, SphericalTransform,
    SynthesisKernel,
};

/// Largest phase difference allowed between neighbouring times across the
/// spectral support.
const TIME_PHASE_STEP: f64 = std::f64::consts::PI / 8.0;

/// Times in the open window `(0, 4/Q^2)`: geometric nodes `T 2^{-k/4}`,
/// `k >= 1`, each gap subdivided so that neighbouring multipliers differ in
/// phase by at most pi/8 across a support of dispersion spread `span`.
/// The geometric part stops once the whole support turns by less than pi/8.
pub fn dyadic_time_grid(window: f64, span: f64) -> Result<Vec<f64>> {
    if !(window > 0.0) || !(span >= 0.0) {
        return Err(Error::domain("dyadic_time_grid", "window and span must be positive"));
    }
    let ratio = 2f64.powf(-0.25);
    let mut geometric = vec![window * ratio];
    while geometric.len() < 4 || geometric[geometric.len() - 1] * span > TIME_PHASE_STEP {
        let next = geometric[geometric.len() - 1] * ratio;
        geometric.push(next);
        if geometric.len() > 4000 {
            break;
        }
    }
    geometric.reverse();
    let mut times = vec![geometric[0]];
    for pair in geometric.windows(2) {
        let gap = pair[1] - pair[0];
        let pieces = ((gap * span / TIME_PHASE_STEP).ceil() as usize).max(1);
        for k in 1..=pieces {
            times.push(pair[0] + gap * k as f64 / pieces as f64);
        }
    }
    *times.last_mut().expect("non-empty") = geometric[geometric.len() - 1];
    Ok(times)
}

/// Spread of the dispersion relation over the support of `fhat`.
pub fn dispersion_span(transform: &SphericalTransform, fhat: &SpectralProfile, spec: PropagatorSpec) -> f64 {
    let params = transform.params();
    let lo = fhat.lambdas()[0];
    let hi = fhat.lambda_max();
    let lo = if matches!(fhat.decay(), crate::transform::DecayClass::BandLimited { .. }) {
        lo
    } else {
        0.0
    };
    spec.dispersion(params, hi) - spec.dispersion(params, lo)
}

/// `max_t |S_t f(s)|` over a time grid, with the maximizing time.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalValues {
    pub values: Vec<f64>,
    pub argmax_t: Vec<f64>,
}

/// Discrete maximal function on `radii`. Ties go to the earliest time in
/// grid order.
pub fn maximal_function(
    transform: &SphericalTransform,
    fhat: &SpectralProfile,
    radii: &[f64],
    times: &[f64],
    spec: PropagatorSpec,
) -> Result<MaximalValues> {
    if times.is_empty() {
        return Err(Error::domain("maximal_function", "empty time grid"));
    }
    let params = transform.params();
    let kernel = SynthesisKernel::new(params, fhat.grid(), radii, transform.constant()?)?;
    let mut values = vec![f64::NEG_INFINITY; radii.len()];
    let mut argmax_t = vec![f64::NAN; radii.len()];
    for_each_time_block(params, fhat, times, spec, &kernel, |_, ts, ure, uim| {
        let nt = ts.len();
        for i in 0..radii.len() {
            for (j, &t) in ts.iter().enumerate() {
                let m = ure[i * nt + j].hypot(uim[i * nt + j]);
                if m > values[i] {
                    values[i] = m;
                    argmax_t[i] = t;
                }
            }
        }
    });
    Ok(MaximalValues { values, argmax_t })
}

/// `||S^* f||_{L^1(B_R)} / ||f||_{H^alpha}` for one `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaximalReport {
    pub alpha: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub l1_norm_maximal: f64,
    pub sobolev_norm: f64,
    pub ratio: f64,
    pub t_grid_size: usize,
    pub argmax_t: Vec<f64>,
}

/// Grids for a maximal-function run on the ball of radius `r`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaximalGrids {
    pub r: f64,
    pub radii: QuadratureGrid,
    pub times: Vec<f64>,
}

impl MaximalGrids {
    /// Gauss-Legendre radii on `[0, r]` resolving oscillations up to
    /// `lambda_max`, and the dyadic time grid for the support of `fhat`.
    pub fn for_profile(
        transform: &SphericalTransform,
        fhat: &SpectralProfile,
        r: f64,
        spec: PropagatorSpec,
    ) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain("MaximalGrids", format!("radius {r} must be > 0")));
        }
        let width = (r / 8.0).min(2.0 * std::f64::consts::PI / fhat.lambda_max().max(1.0));
        let radii = QuadratureGrid::gauss_uniform(0.0, r, width)?;
        let times = dyadic_time_grid(transform.params().time_window(), dispersion_span(transform, fhat, spec))?;
        Ok(MaximalGrids { r, radii, times })
    }
}

/// One report per `alpha`; the maximal function is computed once.
pub fn maximal_ratios(
    transform: &SphericalTransform,
    fhat: &SpectralProfile,
    alphas: &[f64],
    grids: &MaximalGrids,
    spec: PropagatorSpec,
) -> Result<Vec<MaximalReport>> {
    let params = transform.params();
    let max = maximal_function(transform, fhat, grids.radii.nodes(), &grids.times, spec)?;
    let weighted: Vec<f64> = grids
        .radii
        .nodes()
        .iter()
        .zip(&max.values)
        .map(|(&s, v)| Ok(v * params.density(s)?))
        .collect::<Result<_>>()?;
    let l1 = grids.radii.integrate(&weighted);
    alphas
        .iter()
        .map(|&alpha| {
            let norm = sobolev_norm(params, fhat, SobolevIndex::new(alpha, false)?)?;
            if norm == 0.0 {
                return Err(Error::domain("maximal_ratio", "Sobolev norm of the data is zero"));
            }
            Ok(MaximalReport {
                alpha,
                r: grids.r,
                l1_norm_maximal: l1,
                sobolev_norm: norm,
                ratio: l1 / norm,
                t_grid_size: grids.times.len(),
                argmax_t: max.argmax_t.clone(),
            })
        })
        .collect()
}

pub fn maximal_ratio(
    transform: &SphericalTransform,
    fhat: &SpectralProfile,
    alpha: f64,
    grids: &MaximalGrids,
    spec: PropagatorSpec,
) -> Result<MaximalReport> {
    Ok(maximal_ratios(transform, fhat, &[alpha], grids, spec)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{Resolution, SpectralShape};
    use crate::SpaceParams;
    use num_complex::Complex64;

    fn h3() -> SphericalTransform {
        SphericalTransform::with_constant(SpaceParams::h3(), 2.0 / std::f64::consts::PI)
    }

    #[test]
    fn time_grid_is_inside_window() {
        let times = dyadic_time_grid(1.0, 300.0).unwrap();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!(times[0] > 0.0 && *times.last().unwrap() < 1.0);
        assert!(times
            .windows(2)
            .all(|w| (w[1] - w[0]) * 300.0 <= TIME_PHASE_STEP * (1.0 + 1e-12)));
        assert!(times[0] * 300.0 <= TIME_PHASE_STEP);
    }

    #[test]
    fn sup_dominates_each_time() {
        let t = h3();
        let fhat = SpectralShape::gaussian()
            .profile(t.params(), &Resolution::new(2.0, 1.0))
            .unwrap();
        let spec = PropagatorSpec::default();
        let grids = MaximalGrids::for_profile(&t, &fhat, 2.0, spec).unwrap();
        let radii = grids.radii.nodes();
        let max = maximal_function(&t, &fhat, radii, &grids.times, spec).unwrap();
        let evo = t.evolve(&fhat, &grids.times, spec, radii).unwrap();
        for i in 0..radii.len() {
            let mut best = 0.0f64;
            for j in 0..grids.times.len() {
                let v = evo.get(i, j).norm();
                assert!(v <= max.values[i]);
                best = best.max(v);
            }
            assert_eq!(best, max.values[i]);
            let at = grids.times.iter().position(|&x| x == max.argmax_t[i]).unwrap();
            assert_eq!(evo.get(i, at).norm(), max.values[i]);
        }
    }

    #[test]
    fn zero_data_and_scaling() {
        let t = h3();
        let fhat = SpectralShape::gaussian()
            .profile(t.params(), &Resolution::new(2.0, 1.0))
            .unwrap();
        let spec = PropagatorSpec::default();
        let grids = MaximalGrids::for_profile(&t, &fhat, 2.0, spec).unwrap();
        let zero = fhat.scaled(Complex64::new(0.0, 0.0));
        let m = maximal_function(&t, &zero, grids.radii.nodes(), &grids.times, spec).unwrap();
        assert!(m.values.iter().all(|v| *v == 0.0));
        assert!(maximal_ratio(&t, &zero, 0.25, &grids, spec).is_err());
        let a = maximal_ratio(&t, &fhat, 0.25, &grids, spec).unwrap();
        let b = maximal_ratio(&t, &fhat.scaled(Complex64::new(7.0, 0.0)), 0.25, &grids, spec).unwrap();
        assert!((a.ratio - b.ratio).abs() <= 1e-12 * a.ratio);
        assert!(a.argmax_t.iter().all(|&x| x > 0.0 && x < 1.0));
        assert!(maximal_function(&t, &fhat, &[0.5], &[], spec).is_err());
    }
}
