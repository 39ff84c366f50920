//! Gaussian discriminant analysis with a trace-scaled diagonal ridge.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::matrix::Matrix;
use crate::error::LearnError;

fn class_means(x: &Matrix, y: &[usize]) -> ([DVector<f64>; 2], [usize; 2]) {
    let p = x.cols();
    let mut sums = [DVector::zeros(p), DVector::zeros(p)];
    let mut counts = [0usize; 2];
    for (row, &c) in x.iter_rows().zip(y) {
        counts[c] += 1;
        for (j, v) in row.iter().enumerate() {
            sums[c][j] += v;
        }
    }
    for c in 0..2 {
        sums[c] /= counts[c].max(1) as f64;
    }
    (sums, counts)
}

fn scatter(x: &Matrix, y: &[usize], class: Option<usize>, means: &[DVector<f64>; 2]) -> DMatrix<f64> {
    let p = x.cols();
    let mut s = DMatrix::zeros(p, p);
    for (row, &c) in x.iter_rows().zip(y) {
        if class.is_some_and(|k| k != c) {
            continue;
        }
        let d = DVector::from_iterator(p, row.iter().zip(means[c].iter()).map(|(a, m)| a - m));
        s.ger(1.0, &d, &d, 1.0);
    }
    s
}

/// Adds `shrinkage * trace/p` to the diagonal and factorises.
fn regularized_cholesky(
    mut cov: DMatrix<f64>,
    shrinkage: f64,
    model: &'static str,
) -> Result<Cholesky<f64, Dyn>, LearnError> {
    let p = cov.nrows();
    if p == 0 {
        return Err(LearnError::SingularCovariance { model });
    }
    let ridge = shrinkage * cov.trace() / p as f64;
    for j in 0..p {
        cov[(j, j)] += ridge;
    }
    cov.cholesky().ok_or(LearnError::SingularCovariance { model })
}

#[derive(Debug, Clone)]
pub struct Lda {
    coef: [DVector<f64>; 2],
    intercept: [f64; 2],
}

impl Lda {
    pub fn fit(x: &Matrix, y: &[usize], shrinkage: f64) -> Result<Self, LearnError> {
        let n = x.rows();
        let (means, counts) = class_means(x, y);
        let dof = if n > 2 { n - 2 } else { n };
        let cov = scatter(x, y, None, &means) / dof as f64;
        let chol = regularized_cholesky(cov, shrinkage, "LDA")?;
        let mut coef = [DVector::zeros(0), DVector::zeros(0)];
        let mut intercept = [0.0; 2];
        for c in 0..2 {
            let a = chol.solve(&means[c]);
            intercept[c] = -0.5 * means[c].dot(&a) + (counts[c] as f64 / n as f64).ln();
            coef[c] = a;
        }
        Ok(Self { coef, intercept })
    }

    fn score(&self, row: &[f64], c: usize) -> f64 {
        self.coef[c].iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + self.intercept[c]
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.score(row, 1) > self.score(row, 0))
    }
}

#[derive(Debug, Clone)]
pub struct Qda {
    means: [DVector<f64>; 2],
    chol: [Cholesky<f64, Dyn>; 2],
    offset: [f64; 2],
}

impl Qda {
    pub fn fit(x: &Matrix, y: &[usize], shrinkage: f64) -> Result<Self, LearnError> {
        let n = x.rows();
        let (means, counts) = class_means(x, y);
        let mut factors = Vec::with_capacity(2);
        let mut offset = [0.0; 2];
        for c in 0..2 {
            let dof = if counts[c] > 1 { counts[c] - 1 } else { 1 };
            let cov = scatter(x, y, Some(c), &means) / dof as f64;
            let chol = regularized_cholesky(cov, shrinkage, "QDA")?;
            let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
            offset[c] = -0.5 * log_det + (counts[c] as f64 / n as f64).ln();
            factors.push(chol);
        }
        let second = factors.pop().expect("two classes");
        let first = factors.pop().expect("two classes");
        Ok(Self {
            means,
            chol: [first, second],
            offset,
        })
    }

    fn score(&self, row: &[f64], c: usize) -> f64 {
        let p = row.len();
        let d = DVector::from_iterator(p, row.iter().zip(self.means[c].iter()).map(|(a, m)| a - m));
        // |L^-1 d|^2 = d^T S^-1 d
        let z = self.chol[c]
            .l_dirty()
            .solve_lower_triangular(&d)
            .expect("cholesky factor has a positive diagonal");
        self.offset[c] - 0.5 * z.norm_squared()
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.score(row, 1) > self.score(row, 0))
    }
}
