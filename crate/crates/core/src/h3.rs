//! Closed forms on real hyperbolic 3-space and the bridge to the radial
//! Euclidean propagator on R^3.
//!
//! On H^3 the spherical transform of `f` and the radial Fourier transform on
//! R^3 of its Abel transform are the same function of `lambda`, so the
//! Euclidean side here consumes the hyperbolic spectral data directly.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;
use crate::transform::{
    calibration_profile, sobolev_norm, PropagatorSpec, RadialProfile, SobolevIndex, SpectralProfile, SphericalTransform,
};

/// `sin(lambda s) / (lambda sinh s)`, with the removable singularities at
/// `lambda s = 0` and `s = 0` filled in.
pub fn phi_h3(lambda: f64, s: f64) -> f64 {
    let s = s.abs();
    if s == 0.0 {
        return 1.0;
    }
    sinc(lambda * s) * (s / s.sinh())
}

/// `sin(x) / x` with the series near 0.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// Radial Fourier analysis on R^3: `f^(lambda) = int f(s) sinc(lambda s) s^2 ds`
/// and `f(s) = C_E int f^(lambda) sinc(lambda s) lambda^2 dlambda`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanR3 {
    constant: f64,
}

impl EuclideanR3 {
    pub fn with_constant(constant: f64) -> Self {
        EuclideanR3 { constant }
    }

    /// Least-squares fit of `C_E` on `e^{-s^2}`, as for the hyperbolic side.
    pub fn calibrate() -> Result<Self> {
        let radii = QuadratureGrid::gauss_uniform(0.0, 7.5, 0.25)?;
        let lambdas = QuadratureGrid::gauss_uniform(0.0, 24.0, 0.25)?;
        let f: Vec<f64> = radii.nodes().iter().map(|&s| calibration_profile(s)).collect();
        let fhat: Vec<f64> = lambdas
            .nodes()
            .iter()
            .map(|&l| {
                let vals: Vec<f64> = radii
                    .nodes()
                    .iter()
                    .zip(&f)
                    .map(|(&s, v)| v * sinc(l * s) * s * s)
                    .collect();
                radii.integrate(&vals)
            })
            .collect();
        let g: Vec<f64> = radii
            .nodes()
            .iter()
            .map(|&s| {
                let vals: Vec<f64> = lambdas
                    .nodes()
                    .iter()
                    .zip(&fhat)
                    .map(|(&l, v)| v * sinc(l * s) * l * l)
                    .collect();
                lambdas.integrate(&vals)
            })
            .collect();
        let inner = |a: &[f64], b: &[f64]| {
            let vals: Vec<f64> = radii
                .nodes()
                .iter()
                .zip(a.iter().zip(b))
                .map(|(&s, (x, y))| x * y * s * s)
                .collect();
            radii.integrate(&vals)
        };
        let den = inner(&g, &g);
        if !(den > 0.0) {
            return Err(Error::Numerical {
                op: "EuclideanR3::calibrate",
                lambda: f64::NAN,
                s: f64::NAN,
                detail: "degenerate reference inverse".into(),
            });
        }
        Ok(Self::with_constant(inner(&f, &g) / den))
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `S~_t g(s) = C_E int sinc(lambda s) e^{i t lambda^2} f^(lambda) lambda^2 dlambda`
    /// for every `(s, t)`, row-major in `s`.
    pub fn evolve(&self, fhat: &SpectralProfile, times: &[f64], radii: &[f64]) -> Vec<Complex64> {
        let w: Vec<Complex64> = fhat
            .lambdas()
            .iter()
            .zip(fhat.grid().weights())
            .zip(fhat.values())
            .map(|((&l, &wt), v)| v * (wt * l * l * self.constant))
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); radii.len() * times.len()];
        for (j, &t) in times.iter().enumerate() {
            let m: Vec<Complex64> = fhat
                .lambdas()
                .iter()
                .zip(&w)
                .map(|(&l, v)| Complex64::from_polar(1.0, t * l * l) * v)
                .collect();
            for (i, &s) in radii.iter().enumerate() {
                out[i * times.len() + j] = fhat.lambdas().iter().zip(&m).map(|(&l, v)| v * sinc(l * s)).sum();
            }
        }
        out
    }

    pub fn propagate(&self, fhat: &SpectralProfile, t: f64, radii: &QuadratureGrid) -> Result<RadialProfile> {
        RadialProfile::new(radii.clone(), self.evolve(fhat, &[t], radii.nodes()))
    }

    pub fn inverse(&self, fhat: &SpectralProfile, radii: &QuadratureGrid) -> Result<RadialProfile> {
        self.propagate(fhat, 0.0, radii)
    }

    /// `max_t |S~_t g(s)|` over the time grid.
    pub fn maximal_function(&self, fhat: &SpectralProfile, radii: &[f64], times: &[f64]) -> Vec<f64> {
        let u = self.evolve(fhat, times, radii);
        u.chunks(times.len().max(1))
            .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect()
    }

    /// `(C_E int (1 + lambda^2)^beta |f^|^2 lambda^2 dlambda)^{1/2}`.
    pub fn sobolev_norm(&self, fhat: &SpectralProfile, beta: f64) -> f64 {
        let vals: Vec<f64> = fhat
            .lambdas()
            .iter()
            .zip(fhat.values())
            .map(|(&l, v)| (1.0 + l * l).powf(beta) * v.norm_sqr() * l * l)
            .collect();
        (self.constant * fhat.grid().integrate(&vals)).sqrt()
    }
}

fn require_h3(h3: &SphericalTransform, op: &'static str) -> Result<()> {
    if h3.params().is_h3() {
        Ok(())
    } else {
        Err(Error::domain(op, "needs the H^3 transform"))
    }
}

/// `|S_t f(s) - e^{it} (s / sinh s) S~_t f(s)|` on H^3 with the propagator
/// `e^{it(lambda^2 + 1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AbelDefect {
    pub s: f64,
    pub t: f64,
    pub hyperbolic: Complex64,
    pub euclidean: Complex64,
    pub defect: f64,
}

pub fn abel_identity_defects(
    h3: &SphericalTransform,
    euclid: &EuclideanR3,
    fhat: &SpectralProfile,
    times: &[f64],
    radii: &[f64],
) -> Result<Vec<AbelDefect>> {
    require_h3(h3, "abel_identity_defects")?;
    let hyp = h3.evolve(fhat, times, PropagatorSpec::default(), radii)?;
    let euc = euclid.evolve(fhat, times, radii);
    let mut rows = Vec::with_capacity(radii.len() * times.len());
    for (i, &s) in radii.iter().enumerate() {
        let ratio = if s == 0.0 { 1.0 } else { s / s.sinh() };
        for (j, &t) in times.iter().enumerate() {
            let h = hyp.get(i, j);
            let e = euc[i * times.len() + j];
            rows.push(AbelDefect {
                s,
                t,
                hyperbolic: h,
                euclidean: e,
                defect: (h - Complex64::from_polar(ratio, t) * e).norm(),
            });
        }
    }
    Ok(rows)
}

/// Largest Abel-identity defect over `radii` at time `t`.
pub fn abel_identity_defect(
    h3: &SphericalTransform,
    euclid: &EuclideanR3,
    fhat: &SpectralProfile,
    t: f64,
    radii: &[f64],
) -> Result<f64> {
    Ok(abel_identity_defects(h3, euclid, fhat, &[t], radii)?
        .iter()
        .map(|r| r.defect)
        .fold(0.0, f64::max))
}

/// `||f||_{H^beta(H^3)} / ||g||_{H^beta(R^3)}` for the same spectral data,
/// each norm including its own inversion constant.
pub fn sobolev_bridge_ratio(
    h3: &SphericalTransform,
    euclid: &EuclideanR3,
    fhat: &SpectralProfile,
    beta: f64,
) -> Result<f64> {
    require_h3(h3, "sobolev_bridge_ratio")?;
    let hyp = sobolev_norm(h3.params(), fhat, SobolevIndex::new(beta, false)?)? * h3.constant()?.sqrt();
    Ok(hyp / euclid.sobolev_norm(fhat, beta))
}

/// `int_0^R sup_t |S_t f| sinh^2 s ds` against `int_0^R sup_t |S~_t g| s^2 ds`,
/// with the interval `[1, sinh R / R]` their ratio must lie in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormComparison {
    pub hyperbolic: f64,
    pub euclidean: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
}

impl NormComparison {
    pub fn within(&self) -> bool {
        self.ratio >= self.lower * (1.0 - 1e-9) && self.ratio <= self.upper * (1.0 + 1e-9)
    }
}

pub fn norm_comparability(
    h3: &SphericalTransform,
    euclid: &EuclideanR3,
    fhat: &SpectralProfile,
    radii: &QuadratureGrid,
    times: &[f64],
) -> Result<NormComparison> {
    require_h3(h3, "norm_comparability")?;
    let r = radii.nodes().last().copied().unwrap_or(0.0);
    if !(r > 0.0) {
        return Err(Error::domain("norm_comparability", "empty radial grid"));
    }
    let hyp = crate::experiments::maximal::maximal_function(h3, fhat, radii.nodes(), times, PropagatorSpec::default())?;
    let euc = euclid.maximal_function(fhat, radii.nodes(), times);
    let weighted = |vals: &[f64], hyperbolic: bool| {
        let v: Vec<f64> = radii
            .nodes()
            .iter()
            .zip(vals)
            .map(|(&s, m)| m * if hyperbolic { s.sinh().powi(2) } else { s * s })
            .collect();
        radii.integrate(&v)
    };
    let hyperbolic = weighted(&hyp.values, true);
    let euclidean = weighted(&euc, false);
    Ok(NormComparison {
        hyperbolic,
        euclidean,
        ratio: hyperbolic / euclidean,
        lower: 1.0,
        upper: r.sinh() / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{Resolution, SpectralShape};

    #[test]
    fn closed_form_values() {
        assert!((phi_h3(1.0, 1.0) - 0.71602291536043387133).abs() < 1e-15);
        assert!((phi_h3(0.0, 2.0) - 0.55144112954356641552).abs() < 1e-15);
        assert_eq!(phi_h3(3.0, 0.0), 1.0);
        assert!((phi_h3(1e-9, 2.0) - phi_h3(0.0, 2.0)).abs() < 1e-15);
        assert_eq!(phi_h3(-2.5, 1.3), phi_h3(2.5, 1.3));
    }

    fn setup() -> (SphericalTransform, EuclideanR3) {
        (
            SphericalTransform::calibrate(crate::SpaceParams::h3()).unwrap(),
            EuclideanR3::calibrate().unwrap(),
        )
    }

    #[test]
    fn euclidean_constant_is_two_over_pi() {
        let e = EuclideanR3::calibrate().unwrap();
        assert!((e.constant() - 2.0 / std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn abel_identity_holds_for_gaussian() {
        let (h, e) = setup();
        let fhat = SpectralShape::gaussian()
            .profile(h.params(), &Resolution::new(3.0, 1.0))
            .unwrap();
        let radii: Vec<f64> = (0..40).map(|k| 0.075 * k as f64).collect();
        for t in [0.0, 0.3, 0.9] {
            assert!(abel_identity_defect(&h, &e, &fhat, t, &radii).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn bridge_ratio_is_constant_in_beta() {
        let (h, e) = setup();
        let fhat = SpectralShape::gaussian()
            .profile(h.params(), &Resolution::new(3.0, 1.0))
            .unwrap();
        let r: Vec<f64> = [0.1, 0.25, 0.5]
            .iter()
            .map(|&b| sobolev_bridge_ratio(&h, &e, &fhat, b).unwrap())
            .collect();
        assert!((r[0] - r[1]).abs() < 1e-8 && (r[1] - r[2]).abs() < 1e-8);
    }

    #[test]
    fn norms_are_comparable() {
        let (h, e) = setup();
        let fhat = SpectralShape::gaussian()
            .profile(h.params(), &Resolution::new(2.0, 1.0))
            .unwrap();
        let radii = QuadratureGrid::gauss_uniform(0.0, 2.0, 0.25).unwrap();
        let times: Vec<f64> = (1..64).map(|k| k as f64 / 64.0).collect();
        let cmp = norm_comparability(&h, &e, &fhat, &radii, &times).unwrap();
        assert!(cmp.within(), "{cmp:?}");
    }

    #[test]
    fn rejects_damek_ricci() {
        let h = SphericalTransform::with_constant(crate::SpaceParams::damek_ricci(2, 1).unwrap(), 1.0);
        let e = EuclideanR3::with_constant(1.0);
        let fhat = SpectralShape::gaussian()
            .profile(h.params(), &Resolution::new(1.0, 1.0))
            .unwrap();
        assert!(abel_identity_defect(&h, &e, &fhat, 0.1, &[0.5]).is_err());
    }
}
