//! Radial geometry of Damek-Ricci spaces and of real hyperbolic 3-space.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{fit_asymptotic_constants, ln_gamma, ln_gamma_real, BesselOrder};

/// Which family a [`SpaceParams`] belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    DamekRicci,
    HyperbolicH3,
}

/// Validated geometry parameters.
///
/// Damek-Ricci spaces are determined radially by `m_v` (even, `>= 2`) and
/// `m_z` (`>= 1`). Hyperbolic 3-space is a separate kind with curvature
/// normalized so that `A(s) = sinh^2 s` and `Q = 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub struct SpaceParams {
    kind: SpaceKind,
    m_v: u32,
    m_z: u32,
}

/// Wire format: `{"kind":"damek_ricci","m_v":2,"m_z":1}` or `{"kind":"h3"}`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceSpec {
    DamekRicci { m_v: u32, m_z: u32 },
    H3,
}

impl TryFrom<SpaceSpec> for SpaceParams {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::DamekRicci { m_v, m_z } => SpaceParams::damek_ricci(m_v, m_z),
            SpaceSpec::H3 => Ok(SpaceParams::h3()),
        }
    }
}

impl From<SpaceParams> for SpaceSpec {
    fn from(p: SpaceParams) -> Self {
        match p.kind {
            SpaceKind::DamekRicci => SpaceSpec::DamekRicci { m_v: p.m_v, m_z: p.m_z },
            SpaceKind::HyperbolicH3 => SpaceSpec::H3,
        }
    }
}

impl SpaceParams {
    pub fn damek_ricci(m_v: u32, m_z: u32) -> Result<Self> {
        if m_v < 2 || !m_v.is_multiple_of(2) {
            return Err(Error::domain(
                "SpaceParams",
                format!("m_v = {m_v} must be even and at least 2"),
            ));
        }
        if m_z < 1 {
            return Err(Error::domain("SpaceParams", "m_z must be at least 1"));
        }
        Ok(SpaceParams {
            kind: SpaceKind::DamekRicci,
            m_v,
            m_z,
        })
    }

    pub fn h3() -> Self {
        SpaceParams {
            kind: SpaceKind::HyperbolicH3,
            m_v: 0,
            m_z: 0,
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn is_h3(&self) -> bool {
        self.kind == SpaceKind::HyperbolicH3
    }

    /// `(m_v, m_z)`, or `None` for hyperbolic 3-space.
    pub fn dimensions(&self) -> Option<(u32, u32)> {
        match self.kind {
            SpaceKind::DamekRicci => Some((self.m_v, self.m_z)),
            SpaceKind::HyperbolicH3 => None,
        }
    }

    /// Topological dimension.
    pub fn n(&self) -> u32 {
        match self.kind {
            SpaceKind::DamekRicci => self.m_v + self.m_z + 1,
            SpaceKind::HyperbolicH3 => 3,
        }
    }

    /// Homogeneous dimension.
    pub fn q(&self) -> f64 {
        match self.kind {
            SpaceKind::DamekRicci => self.m_v as f64 / 2.0 + self.m_z as f64,
            SpaceKind::HyperbolicH3 => 2.0,
        }
    }

    /// Bottom of the L^2 spectrum of minus the Laplacian, `Q^2 / 4`.
    pub fn spectral_gap(&self) -> f64 {
        0.25 * self.q() * self.q()
    }

    /// Upper end `4 / Q^2` of the time window of the maximal function.
    pub fn time_window(&self) -> f64 {
        4.0 / (self.q() * self.q())
    }

    /// Order `(n - 2) / 2` of the Bessel function governing small radii.
    pub fn bessel_order(&self) -> BesselOrder {
        BesselOrder::for_dimension(self.n())
    }

    /// Radial volume density `A(s)`.
    pub fn density(&self, s: f64) -> Result<f64> {
        Ok(self.log_density(s)?.exp())
    }

    /// `ln A(s)`; `-inf` at `s = 0`.
    pub fn log_density(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain("density", format!("radius {s} must be >= 0")));
        }
        if s == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(match self.kind {
            SpaceKind::DamekRicci => {
                let p = (self.m_v + self.m_z) as f64;
                let q = self.m_z as f64;
                p * LN_2 + p * ln_sinh(0.5 * s) + q * ln_cosh(0.5 * s)
            }
            SpaceKind::HyperbolicH3 => 2.0 * ln_sinh(s),
        })
    }

    /// Logarithmic derivative `A'(s) / A(s)` for `s > 0`.
    pub fn log_density_derivative(&self, s: f64) -> f64 {
        match self.kind {
            SpaceKind::DamekRicci => {
                let p = (self.m_v + self.m_z) as f64;
                let q = self.m_z as f64;
                let h = 0.5 * s;
                0.5 * p / h.tanh() + 0.5 * q * h.tanh()
            }
            SpaceKind::HyperbolicH3 => 2.0 / s.tanh(),
        }
    }

    /// Coefficient `b` in `A'(s)/A(s) = (n - 1)/s + b s + O(s^3)`.
    pub fn log_density_linear_coefficient(&self) -> f64 {
        match self.kind {
            SpaceKind::DamekRicci => (self.m_v + self.m_z) as f64 / 12.0 + self.m_z as f64 / 4.0,
            SpaceKind::HyperbolicH3 => 2.0 / 3.0,
        }
    }

    /// Harish-Chandra c-function.
    ///
    /// For hyperbolic 3-space this is `1 / (i lambda)`, which makes
    /// `|c|^{-2} = lambda^2` and the two-term large-radius expansion exact.
    pub fn c_function(&self, lambda: f64) -> Result<Complex64> {
        if lambda == 0.0 {
            return Err(Error::Pole {
                op: "c_function",
                at: "lambda = 0".into(),
            });
        }
        match self.kind {
            SpaceKind::DamekRicci => Ok(self.ln_c_function(lambda)?.exp()),
            SpaceKind::HyperbolicH3 => Ok(Complex64::new(0.0, -1.0 / lambda)),
        }
    }

    fn ln_c_function(&self, lambda: f64) -> Result<Complex64> {
        let q = self.q();
        let n = self.n() as f64;
        let il = Complex64::new(0.0, lambda);
        let mv = self.m_v as f64;
        Ok((q - 2.0 * il) * LN_2 + ln_gamma(2.0 * il)? + ln_gamma_real(0.5 * n)?
            - ln_gamma(0.5 * (q + 2.0 * il))?
            - ln_gamma(Complex64::new(0.25 * (mv + 2.0), 0.0) + il)?)
    }

    /// Plancherel density `|c(lambda)|^{-2}`, extended by 0 at `lambda = 0`.
    pub fn plancherel_density(&self, lambda: f64) -> f64 {
        let l = lambda.abs();
        if l == 0.0 {
            return 0.0;
        }
        match self.kind {
            SpaceKind::DamekRicci => {
                let ln_c = self
                    .ln_c_function(l)
                    .expect("Gamma arguments are off the pole set for lambda != 0");
                (-2.0 * ln_c.re).exp()
            }
            SpaceKind::HyperbolicH3 => l * l,
        }
    }

    /// Constant in front of `A^{-1/2} (c(l) e^{ils} + c(-l) e^{-ils})` in the
    /// large-radius expansion of the spherical function.
    pub fn hc_prefactor(&self) -> f64 {
        match self.kind {
            SpaceKind::DamekRicci => 2f64.powf(-0.5 * self.m_z as f64),
            SpaceKind::HyperbolicH3 => 0.5,
        }
    }

    /// `2^{m_z} pi^{-1/2} Gamma(n/2) / Gamma((n-1)/2)`, the Gamma-quotient
    /// constant that multiplies the `pi^{1/2} Gamma(mu + 1/2)`-normalized
    /// Bessel function. For hyperbolic 3-space `m_z` is taken as 0.
    pub fn bessel_series_constant(&self) -> f64 {
        let n = self.n() as f64;
        let mz = match self.kind {
            SpaceKind::DamekRicci => self.m_z as f64,
            SpaceKind::HyperbolicH3 => 0.0,
        };
        let ln = mz * LN_2 - 0.5 * PI.ln() + ln_gamma_real(0.5 * n).unwrap() - ln_gamma_real(0.5 * (n - 1.0)).unwrap();
        ln.exp()
    }

    /// Low-frequency cut constant: `max(r0, A_{(n-2)/2})` with the Bessel
    /// threshold measured by [`fit_asymptotic_constants`].
    pub fn bn_constant(&self, r0: f64) -> Result<f64> {
        if !(r0 > 0.0 && r0 < 2.0) {
            return Err(Error::domain("bn_constant", format!("r0 = {r0} must lie in (0, 2)")));
        }
        let fit = fit_asymptotic_constants(self.bessel_order())?;
        Ok(r0.max(fit.a_mu))
    }
}

fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-2.0 * x).exp().ln_1p()
    } else {
        x.sinh().ln()
    }
}

fn ln_cosh(x: f64) -> f64 {
    if x > 20.0 {
        x - LN_2 + (-2.0 * x).exp().ln_1p()
    } else {
        x.cosh().ln()
    }
}

/// Extremes of `|c(l)|^{-2} / (l^2 (1 + l)^{n-3})` over a log grid on `[lo, hi]`.
pub fn plancherel_growth_bounds(params: &SpaceParams, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let n = params.n() as f64;
    let step = (hi / lo).ln() / (points.max(2) - 1) as f64;
    let mut bounds = (f64::INFINITY, 0.0f64);
    for k in 0..points.max(2) {
        let l = lo * (step * k as f64).exp();
        let r = params.plancherel_density(l) / (l * l * (1.0 + l).powf(n - 3.0));
        bounds.0 = bounds.0.min(r);
        bounds.1 = bounds.1.max(r);
    }
    bounds
}
