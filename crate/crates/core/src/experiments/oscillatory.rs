//! The two-radius oscillatory integral
//! `int_L^inf e^{i (lambda (s - s') + (t(s) - t(s')) (lambda^2 + Q^2/4))} (lambda^2 + Q^2/4)^{-1/4} dlambda`
//! and its `|s - s'|^{-1/2}` bound.
//!
//! The integrand is analytic in `Re lambda > 0`, so the half-line is deformed
//! into the complex plane: a steepest-descent ray when the phase has no
//! stationary point beyond `L`, otherwise a vertical segment followed by the
//! line through the saddle. On both paths the integrand decays exponentially
//! and plain adaptive quadrature converges.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::space::SpaceParams;

/// Paths are cut where the exponential factor drops below `e^{-CUTOFF}`.
const CUTOFF: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatoryTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for OscillatoryTolerance {
    fn default() -> Self {
        OscillatoryTolerance {
            abs: 1e-12,
            rel: 1e-11,
            max_intervals: 20_000,
        }
    }
}

impl OscillatoryTolerance {
    /// Same budget with both tolerances divided by `factor`.
    pub fn tightened(self, factor: f64) -> Self {
        OscillatoryTolerance {
            abs: self.abs / factor,
            rel: self.rel / factor,
            max_intervals: self.max_intervals,
        }
    }
}

/// `int_L^inf e^{i (a lambda + b lambda^2)} (lambda^2 + kappa2)^{-1/4} dlambda`
/// for `L > 0`, `a != 0` or `b != 0`.
pub fn phase_integral(kappa2: f64, a: f64, b: f64, lower: f64, tol: OscillatoryTolerance) -> Result<Complex64> {
    if !(lower > 0.0) {
        return Err(Error::domain(
            "phase_integral",
            format!("lower limit {lower} must be > 0"),
        ));
    }
    if a == 0.0 && b == 0.0 {
        return Err(Error::Divergent {
            op: "phase_integral",
            detail: "the phase is constant".into(),
        });
    }
    let integrand = |z: Complex64| {
        let phase = Complex64::i() * (a * z + b * z * z);
        phase.exp() * (z * z + kappa2).powf(-0.25)
    };
    let path = |origin: Complex64, dir: Complex64, r0: f64, r1: f64| {
        integrate_adaptive(
            |r| integrand(origin + dir * r) * dir,
            r0,
            r1,
            tol.abs,
            tol.rel,
            tol.max_intervals,
        )
        .map(|q| q.value)
    };
    let saddle = if b != 0.0 { -a / (2.0 * b) } else { f64::NEG_INFINITY };
    if saddle >= lower {
        // Vertical segment down the side where the phase decays, then the
        // saddle line lambda* + r e^{i sgn(b) pi/4}.
        let d = saddle - lower;
        let sb = b.signum();
        let vertical = Complex64::new(0.0, -sb);
        let decay = 2.0 * b.abs() * d;
        let y_end = if decay > 0.0 { d.min(CUTOFF / decay) } else { d };
        let segment = path(Complex64::new(lower, 0.0), vertical, 0.0, y_end)?;
        let dir = Complex64::from_polar(1.0, sb * FRAC_PI_4);
        let r_cut = (CUTOFF / b.abs()).sqrt();
        let r_start = (-std::f64::consts::SQRT_2 * d).max(-r_cut);
        let line = path(Complex64::new(saddle, 0.0), dir, r_start, r_cut)?;
        Ok(segment + line)
    } else {
        // Monotone phase on [L, inf): steepest-descent ray from L.
        let slope = a + 2.0 * b * lower;
        let sigma = slope.signum();
        let theta = if b != 0.0 { sigma * FRAC_PI_4 } else { sigma * FRAC_PI_2 };
        let dir = Complex64::from_polar(1.0, theta);
        // Solve |slope| r sin|theta| + |b| r^2 sin(2|theta|) = CUTOFF.
        let lin = slope.abs() * theta.abs().sin();
        let quad = b.abs() * (2.0 * theta.abs()).sin();
        let r_cut = if quad > 0.0 {
            (-lin + (lin * lin + 4.0 * quad * CUTOFF).sqrt()) / (2.0 * quad)
        } else {
            CUTOFF / lin
        };
        path(Complex64::new(lower, 0.0), dir, 0.0, r_cut)
    }
}

/// Radii and times entering one evaluation of the two-radius integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusPair {
    pub s: f64,
    pub s_prime: f64,
    pub t_s: f64,
    pub t_s_prime: f64,
}

impl RadiusPair {
    pub fn validate(&self, params: &SpaceParams) -> Result<()> {
        if self.s == self.s_prime {
            return Err(Error::Divergent {
                op: "oscillatory_integral",
                detail: format!("equal radii s = s' = {}", self.s),
            });
        }
        if !(self.s > 0.0 && self.s_prime > 0.0) {
            return Err(Error::domain("oscillatory_integral", "radii must be > 0"));
        }
        let w = params.time_window();
        for t in [self.t_s, self.t_s_prime] {
            if !(t > 0.0 && t < w) {
                return Err(Error::domain(
                    "oscillatory_integral",
                    format!("time {t} outside (0, {w})"),
                ));
            }
        }
        Ok(())
    }

    /// `max(B/s, B/s')`.
    pub fn default_cut(&self, bn: f64) -> f64 {
        (bn / self.s).max(bn / self.s_prime)
    }

    pub fn swapped(&self) -> Self {
        RadiusPair {
            s: self.s_prime,
            s_prime: self.s,
            t_s: self.t_s_prime,
            t_s_prime: self.t_s,
        }
    }
}

/// The two-radius integral with lower limit `lower_cut`.
pub fn oscillatory_integral(
    params: &SpaceParams,
    pair: &RadiusPair,
    lower_cut: f64,
    tol: OscillatoryTolerance,
) -> Result<Complex64> {
    pair.validate(params)?;
    let gap = params.spectral_gap();
    let dt = pair.t_s - pair.t_s_prime;
    let core = phase_integral(gap, pair.s - pair.s_prime, dt, lower_cut, tol)?;
    Ok(Complex64::from_polar(1.0, dt * gap) * core)
}

/// Difference between the integral as defined and after rescaling
/// `lambda = beta r` with `beta = Q/2`, which turns the amplitude into
/// `(r^2 + 1)^{-1/4}`, the radii into `beta s`, the times into
/// `beta^2 t(s)` and the cut into `B/(beta s)`.
pub fn oscillatory_substitution_check(
    params: &SpaceParams,
    pair: &RadiusPair,
    bn: f64,
    tol: OscillatoryTolerance,
) -> Result<f64> {
    pair.validate(params)?;
    let direct = oscillatory_integral(params, pair, pair.default_cut(bn), tol)?;
    let beta = 0.5 * params.q();
    let (u, u_prime) = (beta * pair.s, beta * pair.s_prime);
    let (tu, tu_prime) = (beta * beta * pair.t_s, beta * beta * pair.t_s_prime);
    let cut = (bn / u).max(bn / u_prime);
    let dt = pair.t_s - pair.t_s_prime;
    let rescaled = beta.sqrt()
        * Complex64::from_polar(1.0, dt * params.spectral_gap())
        * phase_integral(1.0, u - u_prime, tu - tu_prime, cut, tol)?;
    Ok((direct - rescaled).norm())
}

/// One evaluated draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillatoryRow {
    pub s: f64,
    pub s_prime: f64,
    pub t_s: f64,
    pub t_s_prime: f64,
    pub re_integral: f64,
    pub im_integral: f64,
    pub abs_integral: f64,
    /// `|I| |s - s'|^{1/2}`.
    pub scaled_bound: f64,
}

pub fn evaluate_pair(
    params: &SpaceParams,
    pair: &RadiusPair,
    bn: f64,
    tol: OscillatoryTolerance,
) -> Result<OscillatoryRow> {
    let value = oscillatory_integral(params, pair, pair.default_cut(bn), tol)?;
    Ok(OscillatoryRow {
        s: pair.s,
        s_prime: pair.s_prime,
        t_s: pair.t_s,
        t_s_prime: pair.t_s_prime,
        re_integral: value.re,
        im_integral: value.im,
        abs_integral: value.norm(),
        scaled_bound: value.norm() * (pair.s - pair.s_prime).abs().sqrt(),
    })
}

/// `count` seeded draws with radii in `(0, s_max]` and times in `(0, 4/Q^2)`.
pub fn random_pairs(params: &SpaceParams, count: usize, s_max: f64, seed: u64) -> Vec<RadiusPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = params.time_window();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // gen::<f64>() is in [0, 1); map to (0, 1].
        let s = s_max * (1.0 - rng.gen::<f64>());
        let s_prime = s_max * (1.0 - rng.gen::<f64>());
        let t_s = w * (1.0 - rng.gen::<f64>()) * (1.0 - 1e-12);
        let t_s_prime = w * (1.0 - rng.gen::<f64>()) * (1.0 - 1e-12);
        if s != s_prime {
            out.push(RadiusPair {
                s,
                s_prime,
                t_s,
                t_s_prime,
            });
        }
    }
    out
}

/// `sup |I| |s - s'|^{1/2}` over the rows.
pub fn fitted_bound(rows: &[OscillatoryRow]) -> f64 {
    rows.iter().map(|r| r.scaled_bound).fold(0.0, f64::max)
}
