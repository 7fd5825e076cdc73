//! Tridiagonal matrices and the Thomas algorithm.

use crate::error::{Error, Result};

/// Square tridiagonal matrix. `lower[0]` and `upper[n-1]` are unused and kept at zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal { lower: vec![0.0; n], diag: vec![0.0; n], upper: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * v[k];
                if k > 0 {
                    s += self.lower[k] * v[k - 1];
                }
                if k + 1 < n {
                    s += self.upper[k] * v[k + 1];
                }
                s
            })
            .collect()
    }

    /// Row `k` is strictly diagonally dominant with negative diagonal and
    /// nonnegative off-diagonals.
    pub fn is_negated_m_row(&self, k: usize) -> bool {
        let off = self.lower[k] + self.upper[k];
        self.lower[k] >= 0.0 && self.upper[k] >= 0.0 && self.diag[k] < 0.0 && -self.diag[k] > off
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        solve(&self.lower, &self.diag, &self.upper, rhs)
    }
}

/// Thomas algorithm without pivoting. Stable for diagonally dominant systems.
pub fn solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularSystem { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for k in 1..n {
        pivot = diag[k] - lower[k] * c[k - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: k });
        }
        c[k] = if k + 1 < n { upper[k] / pivot } else { 0.0 };
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / pivot;
    }
    for k in (0..n - 1).rev() {
        d[k] -= c[k] * d[k + 1];
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_poisson_like() {
        let n = 6;
        let mut a = Tridiagonal::zeros(n);
        for k in 0..n {
            a.diag[k] = -2.5;
            if k > 0 {
                a.lower[k] = 1.0;
            }
            if k + 1 < n {
                a.upper[k] = 1.0;
            }
        }
        let x: Vec<f64> = (0..n).map(|k| (k as f64).sin() + 0.3).collect();
        let b = a.apply(&x);
        let y = a.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_rows() {
        let a = Tridiagonal { lower: vec![0.0; 3], diag: vec![-1.0; 3], upper: vec![0.0; 3] };
        assert_eq!(a.solve(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, -2.0, -3.0]);
    }

    #[test]
    fn zero_pivot() {
        let a = Tridiagonal { lower: vec![0.0, 1.0], diag: vec![1.0, 1.0], upper: vec![1.0, 0.0] };
        assert!(matches!(a.solve(&[1.0, 1.0]), Err(Error::SingularSystem { row: 1 })));
    }
}
