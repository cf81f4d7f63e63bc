use drspec::specfun::{bessel_asymptotic_split, bessel_j, complex_gamma, BesselOrder};
use num_complex::Complex64;
use proptest::prelude::*;

fn order(mu: f64) -> BesselOrder {
    BesselOrder::new(mu).unwrap()
}

fn off_poles(z: Complex64) -> bool {
    z.norm() <= 50.0 && (z.im.abs() > 0.05 || z.re > 0.05 || (z.re - z.re.round()).abs() > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(re in -49.0f64..49.0, im in -49.0f64..49.0) {
        let z = Complex64::new(re, im);
        prop_assume!(off_poles(z) && off_poles(z + 1.0));
        let lhs = complex_gamma(z + 1.0).unwrap();
        let rhs = z * complex_gamma(z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm(), "z = {z}: {lhs} vs {rhs}");
    }

    #[test]
    fn gamma_conjugate_symmetry(re in 0.1f64..30.0, im in -40.0f64..40.0) {
        let z = Complex64::new(re, im);
        let a = complex_gamma(z.conj()).unwrap();
        let b = complex_gamma(z).unwrap().conj();
        prop_assert!((a - b).norm() <= 1e-13 * a.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bessel_three_term_recurrence(mu in 1.0f64..30.0, x in 0.05f64..300.0) {
        let lhs = bessel_j(order(mu - 1.0), x).unwrap() + bessel_j(order(mu + 1.0), x).unwrap();
        let rhs = 2.0 * mu / x * bessel_j(order(mu), x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8, "mu {mu}, x {x}: {lhs} vs {rhs}");
    }
}

#[test]
fn half_integer_residual_decays_like_s_to_minus_three_halves() {
    for k in 1..=4 {
        let mu = k as f64 + 0.5;
        let scaled = |s: f64| bessel_asymptotic_split(order(mu), s).unwrap().residual.abs() * s.powf(1.5);
        let grid: Vec<f64> = (0..600).map(|i| 5.0 * 100f64.powf(i as f64 / 599.0)).collect();
        let sup = grid.iter().map(|&s| scaled(s)).fold(0.0, f64::max);
        let late = grid
            .iter()
            .filter(|&&s| s >= 100.0)
            .map(|&s| scaled(s))
            .fold(0.0, f64::max);
        // The first correction is (4 mu^2 - 1)/(8 s) sqrt(2/(pi s)) sin(...).
        let predicted = (4.0 * mu * mu - 1.0) / 8.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!(sup.is_finite() && late <= sup);
        assert!((late / predicted - 1.0).abs() < 0.1, "mu {mu}: {late} vs {predicted}");
    }
}
