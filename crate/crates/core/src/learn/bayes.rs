use super::matrix::Matrix;

/// Gaussian naive Bayes with variance smoothing relative to the largest
/// feature variance.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: [f64; 2],
    mean: [Vec<f64>; 2],
    var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[usize], var_smoothing: f64) -> Self {
        let p = x.cols();
        let n = x.rows() as f64;

        let mut overall_mean = vec![0.0; p];
        for row in x.iter_rows() {
            for (m, v) in overall_mean.iter_mut().zip(row) {
                *m += v / n;
            }
        }
        let mut max_var: f64 = 0.0;
        for j in 0..p {
            let var = x.iter_rows().map(|r| (r[j] - overall_mean[j]).powi(2)).sum::<f64>() / n;
            max_var = max_var.max(var);
        }
        let epsilon = (var_smoothing * max_var).max(1e-300);

        let mut count = [0usize; 2];
        let mut mean = [vec![0.0; p], vec![0.0; p]];
        for (row, &c) in x.iter_rows().zip(y) {
            count[c] += 1;
            for (m, v) in mean[c].iter_mut().zip(row) {
                *m += v;
            }
        }
        for c in 0..2 {
            let k = count[c].max(1) as f64;
            mean[c].iter_mut().for_each(|m| *m /= k);
        }
        let mut var = [vec![0.0; p], vec![0.0; p]];
        for (row, &c) in x.iter_rows().zip(y) {
            for j in 0..p {
                var[c][j] += (row[j] - mean[c][j]).powi(2);
            }
        }
        for c in 0..2 {
            let k = count[c].max(1) as f64;
            var[c].iter_mut().for_each(|v| *v = *v / k + epsilon);
        }
        let log_prior = [
            (count[0] as f64 / n).ln(),
            (count[1] as f64 / n).ln(),
        ];
        Self {
            log_prior,
            mean,
            var,
        }
    }

    fn joint_log_likelihood(&self, row: &[f64]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, jll) in out.iter_mut().enumerate() {
            let mut s = self.log_prior[c];
            for ((x, m), v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
                s -= 0.5 * (2.0 * std::f64::consts::PI * v).ln() + (x - m).powi(2) / (2.0 * v);
            }
            *jll = s;
        }
        out
    }

    /// Posterior class probabilities, normalised with log-sum-exp.
    pub fn predict_proba(&self, row: &[f64]) -> [f64; 2] {
        let jll = self.joint_log_likelihood(row);
        let max = jll[0].max(jll[1]);
        let e = [(jll[0] - max).exp(), (jll[1] - max).exp()];
        let z = e[0] + e[1];
        [e[0] / z, e[1] / z]
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        let jll = self.joint_log_likelihood(row);
        usize::from(jll[1] > jll[0])
    }
}
