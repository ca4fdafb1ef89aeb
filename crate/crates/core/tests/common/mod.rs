#![allow(dead_code)]

use callrate_core::rng::NormalStream;
use nalgebra::{DMatrix, DVector};

/// `y_t = c + phi1 y_{t-1} + phi2 y_{t-2} + sigma e_t`, started at the mean
/// with a burn-in of 500 draws.
pub fn simulate_ar2(c: f64, phi1: f64, phi2: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    let mu = c / (1.0 - phi1 - phi2);
    let mut z = NormalStream::with_stream(seed, 7);
    let (mut prev, mut last) = (mu, mu);
    let mut out = Vec::with_capacity(n);
    for i in 0..n + 500 {
        let next = c + phi1 * last + phi2 * prev + sigma * z.next_normal();
        (prev, last) = (last, next);
        if i >= 500 {
            out.push(next);
        }
    }
    out
}

pub fn simulate_ar1(alpha: f64, rho: f64, sigma: f64, n: usize, seed: u64) -> Vec<f64> {
    simulate_ar2(alpha, rho, 0.0, sigma, n, seed)
}

/// Least squares by QR in nalgebra: returns coefficients (intercept first)
/// and their conventional standard errors with an `n - k` divisor.
pub fn lagged_ols(y: &[f64], lags: usize) -> (Vec<f64>, Vec<f64>) {
    let n = y.len() - lags;
    let k = lags + 1;
    let x = DMatrix::from_fn(n, k, |i, j| if j == 0 { 1.0 } else { y[lags + i - j] });
    let target = DVector::from_fn(n, |i, _| y[lags + i]);
    let xtx = x.transpose() * &x;
    let inv = xtx.clone().try_inverse().unwrap();
    let beta = &inv * x.transpose() * &target;
    let resid = &target - &x * &beta;
    let s2 = resid.norm_squared() / (n - k) as f64;
    let se = (0..k).map(|j| (s2 * inv[(j, j)]).sqrt()).collect();
    (beta.iter().copied().collect(), se)
}
