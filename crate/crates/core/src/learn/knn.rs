use std::cmp::Ordering;

use super::matrix::Matrix;

/// Brute-force k-nearest neighbours with Euclidean distance.
#[derive(Debug, Clone)]
pub struct Knn {
    k: usize,
    x: Matrix,
    y: Vec<usize>,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], k: usize) -> Self {
        Self {
            k: k.max(1),
            x: x.clone(),
            y: y.to_vec(),
        }
    }

    /// Majority vote among the k nearest training rows. Distance ties are
    /// broken by training order; vote ties go to the class of the nearest row.
    pub fn predict(&self, row: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .map(|(i, r)| {
                let d: f64 = r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
        };
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance);
        }
        let nearest = &mut dist[..k];
        nearest.sort_unstable_by(by_distance);
        let mut votes = [0usize; 2];
        for &(_, i) in nearest.iter() {
            votes[self.y[i]] += 1;
        }
        match votes[1].cmp(&votes[0]) {
            Ordering::Greater => 1,
            Ordering::Less => 0,
            Ordering::Equal => self.y[nearest[0].1],
        }
    }
}
