//! Scalar special functions: complex Gamma, Bessel `J_mu` of real order, the
//! unit-normalized Bessel function and the leading oscillatory split of `J_mu`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative real order of a Bessel function.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::domain(
                "BesselOrder",
                format!("order {mu} must be finite and >= 0"),
            ));
        }
        Ok(BesselOrder(mu))
    }

    /// Order `(n - 2) / 2` attached to a space of dimension `n`.
    pub fn for_dimension(n: u32) -> Self {
        BesselOrder((n as f64 - 2.0) / 2.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_half_integer(self) -> bool {
        let twice = 2.0 * self.0;
        (twice - twice.round()).abs() < 1e-12
    }
}

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

fn is_gamma_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// `ln Gamma(z)` on some branch; `exp` of the result is `Gamma(z)`.
///
/// The argument is shifted to `Re z >= 15` with the recurrence and the
/// Stirling series is summed there, so the same code covers the whole plane.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("ln_gamma", format!("non-finite argument {z}")));
    }
    if is_gamma_pole(z) {
        return Err(Error::Pole {
            op: "complex_gamma",
            at: format!("{}", z.re),
        });
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut power = inv;
    for coeff in STIRLING {
        series += power * coeff;
        power *= inv2;
    }
    Ok((w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift)
}

/// `Gamma(z)` for complex `z` off the nonpositive integers.
pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    ln_gamma(z).map(|l| l.exp())
}

/// `ln |Gamma(x)|` for real `x` off the poles.
pub fn ln_gamma_real(x: f64) -> Result<f64> {
    ln_gamma(Complex64::new(x, 0.0)).map(|l| l.re)
}

/// `Gamma(x)` for real `x` off the poles.
pub fn gamma(x: f64) -> Result<f64> {
    complex_gamma(Complex64::new(x, 0.0)).map(|g| g.re)
}

/// Argument below which `J_mu` is summed from its power series.
pub const SERIES_SWITCH: f64 = 12.0;

/// Bessel function of the first kind `J_mu(x)`, `x > 0`.
///
/// Power series for `x <= 12`. Above that the Hankel asymptotic expansion when
/// it converges to full precision (`x` large against `mu^2`), otherwise the
/// Steed / Barnett continued fractions (CF1 for `J'/J`, CF2 for
/// `(J' + iY')/(J + iY)`) with the Wronskian fixing the normalization.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "bessel_j",
            format!("argument {x} must be finite and > 0"),
        ));
    }
    if x <= SERIES_SWITCH {
        bessel_j_series(order.0, x)
    } else {
        bessel_j_large(order.0, x)
    }
}

fn bessel_j_large(mu: f64, x: f64) -> Result<f64> {
    match bessel_j_hankel(mu, x) {
        Some(j) => Ok(j),
        None => bessel_j_steed(mu, x),
    }
}

/// Hankel expansion `sqrt(2/(pi x)) (P cos chi - Q sin chi)`; `None` unless
/// the smallest term drops below double precision.
fn bessel_j_hankel(mu: f64, x: f64) -> Option<f64> {
    if x < 25.0 {
        return None;
    }
    let m4 = 4.0 * mu * mu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0f64;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = term * (m4 - odd * odd) / (8.0 * kf * x);
        if next.abs() > term.abs() {
            return None;
        }
        term = next;
        // Signs follow (+P0, +Q1, -P2, -Q3, +P4, ...).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            let chi = x - (0.5 * mu + 0.25) * PI;
            return Some((2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin()));
        }
    }
    None
}

fn bessel_j_series(mu: f64, x: f64) -> Result<f64> {
    let ln_prefactor = mu * (0.5 * x).ln() - ln_gamma_real(mu + 1.0)?;
    Ok(ln_prefactor.exp() * unit_series(mu, x))
}

/// `sum_k (-x^2/4)^k Gamma(mu + 1) / (k! Gamma(mu + k + 1))`, i.e. the
/// power series of `Gamma(mu+1) (2/x)^mu J_mu(x)`.
fn unit_series(mu: f64, x: f64) -> f64 {
    let y = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= y / (k * (mu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > 0.5 * x.abs() {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    sum
}

fn bessel_j_steed(nu: f64, x: f64) -> Result<f64> {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = f64::MIN_POSITIVE / EPS;
    const MAXIT: usize = 1_000_000;
    let fail = |detail: &str| Error::Numerical {
        op: "bessel_j",
        lambda: nu,
        s: x,
        detail: detail.to_string(),
    };

    let nl = if nu - x + 1.5 > 0.0 {
        (nu - x + 1.5).floor() as usize
    } else {
        0
    };
    let xmu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1: J'_nu / J_nu by the modified Lentz method.
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail("CF1 did not converge"));
    }

    // Downward recurrence to order xmu.
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    // CF2: p + iq = (J' + iY') / (J + iY) at order xmu.
    let mut a = 0.25 - xmu * xmu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..MAXIT {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(fail("CF2 did not converge"));
    }

    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    Ok(rjl1 * (rjmu / rjl))
}

/// Unit-normalized Bessel function `2^mu Gamma(mu + 1) J_mu(z) / z^mu`.
///
/// Equals 1 at `z = 0`, is even in `z`, and reduces to `sin z / z` for
/// `mu = 1/2`.
pub fn normalized_bessel(order: BesselOrder, z: f64) -> Result<f64> {
    let mu = order.0;
    let z = z.abs();
    if z <= SERIES_SWITCH {
        return Ok(unit_series(mu, z));
    }
    let ln_scale = mu * 2f64.ln() + ln_gamma_real(mu + 1.0)? - mu * z.ln();
    Ok(ln_scale.exp() * bessel_j_large(mu, z)?)
}

/// `J_mu(s)` split as `sqrt(2/(pi s)) cos(s - pi mu/2 - pi/4)` plus a residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticSplit {
    pub main: f64,
    pub residual: f64,
}

pub fn bessel_leading_oscillation(mu: f64, s: f64) -> f64 {
    (2.0 / (PI * s)).sqrt() * (s - 0.5 * PI * mu - 0.25 * PI).cos()
}

pub fn bessel_asymptotic_split(order: BesselOrder, s: f64) -> Result<AsymptoticSplit> {
    if !order.is_half_integer() {
        return Err(Error::domain(
            "bessel_asymptotic_split",
            format!("order {} is not a half-integer", order.0),
        ));
    }
    let main = bessel_leading_oscillation(order.0, s);
    if order.0 == 0.5 {
        // cos(s - pi/2) = sin(s): the split is exact.
        return Ok(AsymptoticSplit { main, residual: 0.0 });
    }
    let j = bessel_j(order, s)?;
    Ok(AsymptoticSplit {
        main,
        residual: j - main,
    })
}

/// Measured constants for `|J_mu(s) - main(s)| <= c_mu s^{-3/2}, s >= A_mu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticFit {
    pub order: f64,
    /// `sup |residual| s^{3/2}` over the asymptotic window `[5, 500]`.
    pub c_mu: f64,
    /// Smallest sample point beyond which the scaled residual never exceeds `c_mu`.
    pub a_mu: f64,
}

/// Fit `c_mu` and `A_mu` on a logarithmic grid over `[0.01, 500]`.
pub fn fit_asymptotic_constants(order: BesselOrder) -> Result<AsymptoticFit> {
    const POINTS: usize = 4000;
    let (lo, hi) = (0.01f64, 500.0f64);
    let ratio = (hi / lo).ln() / (POINTS - 1) as f64;
    let mut samples = Vec::with_capacity(POINTS);
    for k in 0..POINTS {
        let s = lo * (ratio * k as f64).exp();
        let split = bessel_asymptotic_split(order, s)?;
        samples.push((s, split.residual.abs() * s.powf(1.5)));
    }
    let c_mu = samples
        .iter()
        .filter(|(s, _)| *s >= 5.0)
        .map(|&(_, g)| g)
        .fold(0.0, f64::max);
    if c_mu < 1e-14 {
        return Ok(AsymptoticFit {
            order: order.0,
            c_mu: 0.0,
            a_mu: 0.0,
        });
    }
    // Walk down from the top while the scaled residual stays under c_mu.
    let mut a_mu = samples[POINTS - 1].0;
    for &(s, g) in samples.iter().rev() {
        if g > c_mu {
            break;
        }
        a_mu = s;
    }
    Ok(AsymptoticFit {
        order: order.0,
        c_mu,
        a_mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(mu: f64) -> BesselOrder {
        BesselOrder::new(mu).unwrap()
    }

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(6.0).unwrap(), 120.0, max_relative = 1e-13);
        let gi = complex_gamma(Complex64::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(gi.norm_sqr(), PI / PI.sinh(), max_relative = 1e-13);
    }

    #[test]
    fn gamma_matches_mpmath() {
        let cases = [
            (
                Complex64::new(0.5, 30.0),
                Complex64::new(-8.373647696713258e-21, 1.866537652294492e-21),
            ),
            (
                Complex64::new(-3.7, 2.2),
                Complex64::new(-0.0006119087203837204, 0.0003466363064900241),
            ),
            (
                Complex64::new(20.25, -7.5),
                Complex64::new(-54086604800844563.73, 33620787983488105.81),
            ),
        ];
        for (z, want) in cases {
            let got = complex_gamma(z).unwrap();
            assert!((got - want).norm() / want.norm() < 1e-12, "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_poles_are_rejected() {
        for x in [0.0, -1.0, -7.0] {
            let err = complex_gamma(Complex64::new(x, 0.0)).unwrap_err();
            assert!(matches!(err, Error::Pole { .. }));
        }
        assert!(complex_gamma(Complex64::new(-1.0, 1e-9)).is_ok());
    }

    #[test]
    fn bessel_half_integer_closed_form() {
        let x = 2.0;
        let want = (2.0 / (PI * x)).sqrt() * x.sin();
        assert_relative_eq!(bessel_j(order(0.5), x).unwrap(), want, epsilon = 1e-14);
        assert_relative_eq!(want, 0.5130161365618278, epsilon = 1e-15);
        for x in [0.3, 5.0, 11.9, 12.1, 40.0, 900.0] {
            let closed = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(order(1.5), x).unwrap() - closed).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn bessel_small_argument_leading_term() {
        let x = 1e-4;
        let j = bessel_j(order(1.0), x).unwrap();
        assert_relative_eq!(j, 5e-5, max_relative = 1e-8);
    }

    #[test]
    fn bessel_matches_mpmath() {
        let cases = [
            (1.0, 20.0, 0.06683312417585004558),
            (0.0, 12.0, 0.04768931079683353662),
            (0.0, 12.5, 0.14688405470042110231),
            (2.5, 37.3, 0.04097671166479658495),
            (7.0, 3.0, 0.002547294451804693759),
            (12.5, 30.0, 0.14354962331059691231),
            (25.0, 13.0, 2.531513829722415829e-6),
            (50.0, 10.0, 1.784513607871595306e-30),
            (50.0, 60.0, -0.13798273148535212047),
            (50.0, 120.0, 0.04232026344022007524),
            (3.0, 1000.0, -0.004827420825203947900),
            (1.5, 9999.5, 0.007836484444837740351),
            (40.0, 10000.0, -0.007365007799604915852),
            (0.0, 0.001, 0.99999975000001562500),
            (3.5, 80.0, -0.003177167559112905329),
        ];
        for (mu, x, want) in cases {
            let got = bessel_j(order(mu), x).unwrap();
            assert!((got - want).abs() < 1e-12, "J_{mu}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn bessel_rejects_nonpositive_argument() {
        assert!(bessel_j(order(1.0), 0.0).is_err());
        assert!(bessel_j(order(1.0), -2.0).is_err());
        assert!(BesselOrder::new(-0.5).is_err());
    }

    #[test]
    fn normalized_bessel_limits() {
        for mu in [0.0, 0.5, 1.0, 3.5, 20.0] {
            assert_eq!(normalized_bessel(order(mu), 0.0).unwrap(), 1.0);
        }
        assert!(normalized_bessel(order(0.5), PI).unwrap().abs() < 1e-15);
        for z in [0.5, 3.0, 13.0, 250.0] {
            assert_relative_eq!(normalized_bessel(order(0.5), z).unwrap(), z.sin() / z, epsilon = 1e-14);
        }
        // mu = 1: 2 Gamma(2) J_1(z) / z.
        let z = 2.0;
        let want = 2.0 * bessel_j(order(1.0), z).unwrap() / z;
        assert_relative_eq!(normalized_bessel(order(1.0), z).unwrap(), want, epsilon = 1e-15);
        assert_relative_eq!(normalized_bessel(order(1.0), -z).unwrap(), want, epsilon = 1e-15);
    }

    #[test]
    fn asymptotic_split() {
        for s in [0.1, 1.0, 10.0, 400.0] {
            assert_eq!(bessel_asymptotic_split(order(0.5), s).unwrap().residual, 0.0);
        }
        let split = bessel_asymptotic_split(order(1.5), 10.0).unwrap();
        let j = bessel_j(order(1.5), 10.0).unwrap();
        assert!((split.main + split.residual - j).abs() < 1e-14);
        assert!(bessel_asymptotic_split(order(0.3), 10.0).is_err());
    }

    #[test]
    fn asymptotic_fit_constants() {
        let half = fit_asymptotic_constants(order(0.5)).unwrap();
        assert_eq!((half.c_mu, half.a_mu), (0.0, 0.0));
        let one = fit_asymptotic_constants(order(1.0)).unwrap();
        assert!(one.c_mu.is_finite() && one.c_mu > 0.0);
        let split = bessel_asymptotic_split(order(1.0), 50.0).unwrap();
        assert!(split.residual.abs() * 50f64.powf(1.5) <= one.c_mu);
        // First correction of the Hankel expansion: (4 mu^2 - 1)/8 sqrt(2/pi).
        let leading = 3.0 / 8.0 * (2.0 / PI).sqrt();
        assert!((one.c_mu - leading).abs() < 0.05 * leading, "{one:?}");
    }
}
