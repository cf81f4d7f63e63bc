//! Maximal-function ratios for band-limited data `[N, N + sqrt N]` on H^3,
//! as the band moves out.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::maximal::{maximal_ratios, MaximalGrids};
use crate::transform::{PropagatorSpec, Resolution, SpectralShape, SphericalTransform};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub alpha: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub ratio: f64,
    pub l1_norm_maximal: f64,
    pub sobolev_norm: f64,
    pub t_grid_size: usize,
}

/// Ratios `||S^* f_N||_{L^1(B_R)} / ||f_N||_{H^alpha}` for mollified bands
/// `f_N`, sorted by `(alpha, N)`. Bands run in parallel.
pub fn sharpness_sweep(
    transform: &SphericalTransform,
    alphas: &[f64],
    ns: &[f64],
    r: f64,
) -> Result<Vec<SharpnessRow>> {
    if !transform.params().is_h3() {
        return Err(Error::domain("sharpness_sweep", "defined on H^3 only"));
    }
    if alphas.is_empty() || ns.iter().any(|&n| !(n >= 1.0)) {
        return Err(Error::domain("sharpness_sweep", "need alphas and band starts N >= 1"));
    }
    let spec = PropagatorSpec::default();
    let per_band: Vec<Vec<SharpnessRow>> = ns
        .par_iter()
        .map(|&n| {
            let shape = SpectralShape::dyadic_band(n);
            let res = Resolution::new(r, transform.params().time_window()).with_propagator(spec);
            let fhat = shape.profile(transform.params(), &res)?;
            let grids = MaximalGrids::for_profile(transform, &fhat, r, spec)?;
            let reports = maximal_ratios(transform, &fhat, alphas, &grids, spec)?;
            Ok(reports
                .into_iter()
                .map(|m| SharpnessRow {
                    alpha: m.alpha,
                    n,
                    ratio: m.ratio,
                    l1_norm_maximal: m.l1_norm_maximal,
                    sobolev_norm: m.sobolev_norm,
                    t_grid_size: m.t_grid_size,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SharpnessRow> = per_band.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.n.total_cmp(&b.n)));
    Ok(rows)
}

/// Ratios at one `alpha`, in increasing `N`.
pub fn ratios_at(rows: &[SharpnessRow], alpha: f64) -> Vec<f64> {
    let mut sel: Vec<&SharpnessRow> = rows.iter().filter(|r| r.alpha == alpha).collect();
    sel.sort_by(|a, b| a.n.total_cmp(&b.n));
    sel.iter().map(|r| r.ratio).collect()
}

pub fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0])
}

/// `max / min` of positive values.
pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SpaceParams;

    #[test]
    fn rejects_damek_ricci() {
        let t = SphericalTransform::with_constant(SpaceParams::damek_ricci(2, 1).unwrap(), 1.0);
        assert!(sharpness_sweep(&t, &[0.25], &[16.0], 2.0).is_err());
    }

    #[test]
    fn small_sweep_is_sorted_and_positive() {
        let t = SphericalTransform::with_constant(SpaceParams::h3(), 2.0 / std::f64::consts::PI);
        let rows = sharpness_sweep(&t, &[0.3, 0.1], &[8.0, 4.0], 1.0).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].alpha, rows[0].n), (0.1, 4.0));
        assert_eq!((rows[3].alpha, rows[3].n), (0.3, 8.0));
        assert!(rows.iter().all(|r| r.ratio > 0.0));
        assert_eq!(ratios_at(&rows, 0.1).len(), 2);
    }

    #[test]
    fn trend_helpers() {
        assert!(strictly_increasing(&[1.0, 2.0, 3.0]));
        assert!(!strictly_increasing(&[1.0, 1.0]));
        assert_eq!(spread(&[2.0, 4.0, 3.0]), 2.0);
    }
}
