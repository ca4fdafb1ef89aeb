//! Least squares for tall, narrow designs via modified Gram-Schmidt QR.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub(crate) struct Ols<const K: usize> {
    pub coef: [f64; K],
    /// `(X'X)^{-1}`, to be scaled by the residual variance.
    pub xtx_inv: [[f64; K]; K],
    pub residuals: Vec<f64>,
}

impl<const K: usize> Ols<K> {
    pub fn ssr(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum()
    }

    /// Classical homoskedastic standard errors, `s^2 = SSR / (n - K)`.
    pub fn std_errors(&self) -> [f64; K] {
        let dof = (self.residuals.len() - K) as f64;
        let s2 = self.ssr() / dof;
        core::array::from_fn(|j| libm::sqrt(s2 * self.xtx_inv[j][j]))
    }
}

/// Regresses `y` on the columns of `x`. All columns must have `y.len()` rows.
pub(crate) fn ols<const K: usize>(x: [&[f64]; K], y: &[f64]) -> Result<Ols<K>> {
    let n = y.len();
    debug_assert!(x.iter().all(|c| c.len() == n));
    if n <= K {
        return Err(Error::TooShort {
            required: K + 1,
            actual: n,
        });
    }

    let mut q: [Vec<f64>; K] = core::array::from_fn(|j| x[j].to_vec());
    let mut r = [[0.0; K]; K];
    for j in 0..K {
        let original = norm(x[j]);
        for i in 0..j {
            let proj = dot(&q[i], &q[j]);
            r[i][j] = proj;
            let (qi, qj) = pair_mut(&mut q, i, j);
            for (a, b) in qj.iter_mut().zip(qi.iter()) {
                *a -= proj * b;
            }
        }
        let len = norm(&q[j]);
        if !(len > 1e-10 * original) || len == 0.0 {
            return Err(Error::DegenerateRegressor);
        }
        r[j][j] = len;
        q[j].iter_mut().for_each(|v| *v /= len);
    }

    // Back substitution R b = Q'y, then R^{-1} for the covariance.
    let qty: [f64; K] = core::array::from_fn(|j| dot(&q[j], y));
    let mut coef = [0.0; K];
    for j in (0..K).rev() {
        let tail: f64 = (j + 1..K).map(|k| r[j][k] * coef[k]).sum();
        coef[j] = (qty[j] - tail) / r[j][j];
    }

    let mut r_inv = [[0.0; K]; K];
    #[allow(clippy::needless_range_loop)]
    for col in 0..K {
        for row in (0..=col).rev() {
            let unit = if row == col { 1.0 } else { 0.0 };
            let tail: f64 = (row + 1..=col).map(|k| r[row][k] * r_inv[k][col]).sum();
            r_inv[row][col] = (unit - tail) / r[row][row];
        }
    }
    let xtx_inv = core::array::from_fn(|a| core::array::from_fn(|b| (0..K).map(|k| r_inv[a][k] * r_inv[b][k]).sum()));

    let mut residuals = vec![0.0; n];
    for (t, e) in residuals.iter_mut().enumerate() {
        *e = y[t] - (0..K).map(|j| coef[j] * x[j][t]).sum::<f64>();
    }
    Ok(Ols {
        coef,
        xtx_inv,
        residuals,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn pair_mut<T>(s: &mut [T], i: usize, j: usize) -> (&T, &mut T) {
    debug_assert!(i < j);
    let (lo, hi) = s.split_at_mut(j);
    (&lo[i], &mut hi[0])
}
