mod common;

use callrate_core::autoregress::{
    fit_ar1, fit_ar2, forecast_ar1, forecast_ar2, impulse_response, Ar1Fit, Ar2Fit, ArModel, CharacteristicRoots,
};
use callrate_core::series::{RateSeries, Units, YearMonth};
use common::{lagged_ols, simulate_ar1, simulate_ar2};
use proptest::prelude::*;

fn reference_ar1() -> Ar1Fit {
    Ar1Fit::from_mean_form(3.943, 0.597, 2.362).unwrap()
}

fn reference_ar2() -> Ar2Fit {
    Ar2Fit::from_coefficients(1.215, 0.456, 0.235, 2.297).unwrap()
}

fn series(values: Vec<f64>) -> RateSeries {
    RateSeries::from_values(
        "synthetic",
        Units::ContinuousPercent,
        YearMonth::new(1900, 1).unwrap(),
        values,
    )
    .unwrap()
}

#[test]
fn ols_matches_nalgebra_oracle() {
    for seed in 0..5 {
        let y = simulate_ar2(1.215, 0.456, 0.235, 2.297, 300, seed);
        let (b1, se1) = lagged_ols(&y, 1);
        let f1 = Ar1Fit::estimate(&y).unwrap();
        let st = f1.stats.as_ref().unwrap();
        assert!((f1.alpha - b1[0]).abs() < 1e-9 && (f1.rho - b1[1]).abs() < 1e-9);
        for (a, b) in st.std_errors.iter().zip(&se1) {
            assert!((a - b).abs() < 1e-9);
        }

        let (b2, se2) = lagged_ols(&y, 2);
        let f2 = Ar2Fit::estimate(&y).unwrap();
        for (a, b) in [f2.c, f2.phi1, f2.phi2].iter().zip(&b2) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in f2.stats.as_ref().unwrap().std_errors.iter().zip(&se2) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}

#[test]
fn ar1_recovers_parameters_on_a_long_sample() {
    let truth = reference_ar1();
    let y = simulate_ar1(truth.alpha, truth.rho, truth.sigma, 100_000, 5);
    let fit = fit_ar1(&series(y)).unwrap();
    let se = &fit.stats.as_ref().unwrap().std_errors;
    assert!((fit.alpha - truth.alpha).abs() < 3.0 * se[0]);
    assert!((fit.rho - truth.rho).abs() < 3.0 * se[1]);
    assert!((fit.sigma - truth.sigma).abs() < 0.02);
}

#[test]
fn ar2_recovers_parameters_and_nests_ar1() {
    let y = simulate_ar2(1.215, 0.456, 0.235, 2.297, 100_000, 6);
    let fit = fit_ar2(&series(y)).unwrap();
    let se = &fit.stats.as_ref().unwrap().std_errors;
    assert!((fit.phi1 - 0.456).abs() < 3.0 * se[1]);
    assert!((fit.phi2 - 0.235).abs() < 3.0 * se[2]);

    let t2 = reference_ar1();
    let y = simulate_ar1(t2.alpha, t2.rho, t2.sigma, 100_000, 7);
    let nested = fit_ar2(&series(y)).unwrap();
    let se = &nested.stats.as_ref().unwrap().std_errors;
    assert!(nested.phi2.abs() < 3.0 * se[2], "phi2 = {}", nested.phi2);
}

#[test]
fn ar2_has_smaller_residuals_on_ar2_data() {
    let y = simulate_ar2(1.215, 0.456, 0.235, 2.297, 1367, 8);
    let s = series(y);
    let (a1, a2) = (fit_ar1(&s).unwrap(), fit_ar2(&s).unwrap());
    assert!(a2.sigma < a1.sigma);
    assert!(a2.stats.unwrap().r_squared > a1.stats.unwrap().r_squared);
}

#[test]
fn fitting_guards() {
    let short = series(vec![1.0; 10]);
    assert!(fit_ar1(&short).is_err());
    let nominal = RateSeries::from_values(
        "n",
        Units::NominalPercent,
        YearMonth::new(2000, 1).unwrap(),
        vec![1.0; 40],
    )
    .unwrap();
    assert!(fit_ar1(&nominal).is_err());
    assert!(fit_ar2(&nominal).is_err());
}

#[test]
fn ar1_rmse_is_monotone_and_reaches_s() {
    let f = reference_ar1();
    let fc = forecast_ar1(&f, 4.25, 50).unwrap();
    assert!(fc.windows(2).all(|w| w[1].rmse >= w[0].rmse));
    assert!((fc[49].rmse - f.s()).abs() < 1e-6);
    assert!((fc[0].rmse - f.sigma).abs() < 1e-12);
}

#[test]
fn ar2_with_zero_phi2_reduces_to_ar1() {
    let a1 = reference_ar1();
    let a2 = Ar2Fit::from_coefficients(a1.alpha, a1.rho, 0.0, a1.sigma).unwrap();
    let f1 = forecast_ar1(&a1, 4.25, 24).unwrap();
    let f2 = forecast_ar2(&a2, 1.0, 4.25, 24).unwrap();
    for (x, y) in f1.iter().zip(&f2) {
        assert!((x.point - y.point).abs() < 1e-9);
        assert!((x.rmse - y.rmse).abs() < 1e-9);
    }
    assert!((a2.s() - a1.s()).abs() < 1e-12);
}

#[test]
fn reference_ar2_impulse_and_roots() {
    let f = reference_ar2();
    let CharacteristicRoots::Real { first, second } = f.roots() else {
        panic!("expected real roots")
    };
    assert!((first - 0.764).abs() < 1e-3 && (second + 0.308).abs() < 1e-3);
    let ir = impulse_response(&f, 12).unwrap();
    assert!((ir[6].1 - 14.0).abs() < 1.0);
    assert!((ir[12].1 - 3.0).abs() < 1.0);
    assert_eq!(ir[0], (0, 100.0));
}

#[test]
fn impulse_weights_follow_the_recursion() {
    let f = reference_ar2();
    let psi = f.psi_weights(30);
    for j in 2..=30 {
        assert!((psi[j] - f.phi1 * psi[j - 1] - f.phi2 * psi[j - 2]).abs() < 1e-14);
    }
    let ar1 = impulse_response(&reference_ar1(), 5).unwrap();
    for (t, v) in ar1 {
        assert!((v - 100.0 * 0.597f64.powi(t as i32)).abs() < 1e-9);
    }
}

fn recursion(f: &Ar2Fit, y0: f64, y1: f64, h: u32) -> Vec<f64> {
    let (mut prev, mut last) = (y0, y1);
    (0..h)
        .map(|_| {
            let next = f.c + f.phi1 * last + f.phi2 * prev;
            (prev, last) = (last, next);
            next
        })
        .collect()
}

proptest! {
    #[test]
    fn closed_form_matches_recursion(phi1 in -1.9f64..1.9, phi2 in -0.95f64..0.95, c in -2.0f64..2.0,
                                     y0 in -10.0f64..10.0, y1 in -10.0f64..10.0) {
        prop_assume!(phi2 + phi1 < 0.99 && phi2 - phi1 < 0.99);
        let f = Ar2Fit::from_coefficients(c, phi1, phi2, 1.0).unwrap();
        let fc = forecast_ar2(&f, y0, y1, 60).unwrap();
        for (a, b) in fc.iter().zip(recursion(&f, y0, y1, 60)) {
            prop_assert!((a.point - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
        prop_assert!(fc.windows(2).all(|w| w[1].rmse >= w[0].rmse));
    }

    #[test]
    fn ar1_forecast_tends_to_mean(mu in -5.0f64..10.0, rho in -0.9f64..0.9, y0 in -10.0f64..20.0) {
        let f = Ar1Fit::from_mean_form(mu, rho, 1.0).unwrap();
        let fc = forecast_ar1(&f, y0, 400).unwrap();
        prop_assert!((fc[399].point - mu).abs() < 1e-9 * (1.0 + mu.abs()));
    }
}

#[test]
fn repeated_and_complex_roots_match_recursion() {
    // phi1^2 + 4 phi2 = 0 gives a double root at phi1 / 2.
    for (phi1, phi2) in [(1.0, -0.25), (-0.8, -0.16), (0.5, -0.6), (1.2, -0.9)] {
        let f = Ar2Fit::from_coefficients(0.5, phi1, phi2, 1.0).unwrap();
        let fc = forecast_ar2(&f, 3.0, -2.0, 60).unwrap();
        for (a, b) in fc.iter().zip(recursion(&f, 3.0, -2.0, 60)) {
            assert!((a.point - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn nonstationary_coefficients_are_rejected() {
    assert!(Ar2Fit::from_coefficients(0.0, 0.6, 0.5, 1.0).is_err());
    assert!(Ar2Fit::from_coefficients(0.0, 0.0, -1.0, 1.0).is_err());
}
