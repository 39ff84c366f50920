//! Linear decision functions: logistic regression, ridge classifier, and a
//! hinge-loss SGD classifier. All predict class 1 when `w·x + b > 0`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::matrix::{dot, Matrix};
use crate::error::LearnError;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn decision(&self, row: &[f64]) -> f64 {
        dot(&self.weights, row) + self.bias
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        usize::from(self.decision(row) > 0.0)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean log-loss plus `lambda/2 * |w|^2` (intercept unpenalised).
pub fn logistic_loss(model: &LinearModel, x: &Matrix, y: &[usize], lambda: f64) -> f64 {
    let n = x.rows() as f64;
    let data: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(row, &t)| {
            let z = model.decision(row);
            softplus(z) - t as f64 * z
        })
        .sum::<f64>()
        / n;
    data + 0.5 * lambda * dot(&model.weights, &model.weights)
}

/// Largest eigenvalue of `[X 1]^T [X 1] / n`, by power iteration capped at the trace.
fn gram_spectral_bound(x: &Matrix) -> f64 {
    let n = x.rows() as f64;
    let p = x.cols() + 1;
    let trace: f64 = x.iter_rows().map(|r| dot(r, r) + 1.0).sum::<f64>() / n;
    let mut v = vec![1.0 / (p as f64).sqrt(); p];
    let mut estimate = 0.0;
    for _ in 0..100 {
        let mut next = vec![0.0; p];
        for row in x.iter_rows() {
            let s = dot(&v[..p - 1], row) + v[p - 1];
            for (acc, xi) in next[..p - 1].iter_mut().zip(row) {
                *acc += s * xi;
            }
            next[p - 1] += s;
        }
        next.iter_mut().for_each(|e| *e /= n);
        let norm = dot(&next, &next).sqrt();
        if norm == 0.0 {
            return trace.max(1e-12);
        }
        estimate = norm;
        v = next.into_iter().map(|e| e / norm).collect();
    }
    (1.1 * estimate).min(trace).max(1e-12)
}

/// Full-batch gradient descent on the L2-regularised log-loss with step
/// `1/L`, where `L` bounds the gradient's Lipschitz constant. That step makes
/// the loss non-increasing. Weights start at small seeded Gaussian values.
///
/// Returns the model and the loss after every iteration (index 0 is the
/// starting loss).
pub fn fit_logistic(
    x: &Matrix,
    y: &[usize],
    lambda: f64,
    iterations: usize,
    seed: u64,
) -> (LinearModel, Vec<f64>) {
    let p = x.cols();
    let n = x.rows() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = Normal::new(0.0, 0.01).expect("valid normal");
    let mut model = LinearModel {
        weights: (0..p).map(|_| init.sample(&mut rng)).collect(),
        bias: 0.0,
    };
    let lipschitz = 0.25 * gram_spectral_bound(x) + lambda;
    let step = 1.0 / lipschitz;

    let mut losses = Vec::with_capacity(iterations + 1);
    losses.push(logistic_loss(&model, x, y, lambda));
    let mut grad = vec![0.0; p];
    for _ in 0..iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (row, &t) in x.iter_rows().zip(y) {
            let r = sigmoid(model.decision(row)) - t as f64;
            for (g, xi) in grad.iter_mut().zip(row) {
                *g += r * xi;
            }
            grad_b += r;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= step * (g / n + lambda * *w);
        }
        model.bias -= step * grad_b / n;
        losses.push(logistic_loss(&model, x, y, lambda));
    }
    (model, losses)
}

/// Closed-form ridge regression on ±1 targets with an unpenalised intercept.
pub fn fit_ridge(x: &Matrix, y: &[usize], lambda: f64) -> Result<LinearModel, LearnError> {
    let n = x.rows();
    let p = x.cols();
    let t: Vec<f64> = y.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect();
    let t_mean = t.iter().sum::<f64>() / n as f64;
    let mut x_mean = vec![0.0; p];
    for row in x.iter_rows() {
        for (m, v) in x_mean.iter_mut().zip(row) {
            *m += v / n as f64;
        }
    }
    let xc = DMatrix::from_fn(n, p, |i, j| x.get(i, j) - x_mean[j]);
    let yc = DVector::from_iterator(n, t.iter().map(|v| v - t_mean));
    let mut gram = xc.transpose() * &xc;
    for j in 0..p {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.transpose() * yc;
    let w = gram
        .cholesky()
        .ok_or(LearnError::SingularCovariance { model: "RC" })?
        .solve(&rhs);
    let weights: Vec<f64> = w.iter().copied().collect();
    let bias = t_mean - dot(&x_mean, &weights);
    Ok(LinearModel { weights, bias })
}

/// Hinge-loss SGD with constant learning rate, L2 penalty `alpha`, and a
/// seeded shuffle of the training order each epoch.
pub fn fit_sgd(
    x: &Matrix,
    y: &[usize],
    learning_rate: f64,
    epochs: usize,
    alpha: f64,
    seed: u64,
) -> LinearModel {
    let p = x.cols();
    let mut model = LinearModel {
        weights: vec![0.0; p],
        bias: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let row = x.row(i);
            let t = if y[i] == 1 { 1.0 } else { -1.0 };
            let margin = t * model.decision(row);
            let shrink = 1.0 - learning_rate * alpha;
            model.weights.iter_mut().for_each(|w| *w *= shrink);
            if margin < 1.0 {
                for (w, xi) in model.weights.iter_mut().zip(row) {
                    *w += learning_rate * t * xi;
                }
                model.bias += learning_rate * t;
            }
        }
    }
    model
}
