use serde::{Deserialize, Serialize};

/// Weighted sufficient statistics of a normal component: total weight,
/// weighted sum and weighted sum of outer products (row-major `dim × dim`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuffStats {
    dim: usize,
    weight: f64,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl SuffStats {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            weight: 0.0,
            sum: vec![0.0; dim],
            outer: vec![0.0; dim * dim],
        }
    }

    pub fn from_rows<'a, I: IntoIterator<Item = &'a [f64]>>(dim: usize, rows: I) -> Self {
        let mut stats = Self::new(dim);
        for y in rows {
            stats.add(y, 1.0);
        }
        stats
    }

    pub fn add(&mut self, y: &[f64], w: f64) {
        debug_assert_eq!(y.len(), self.dim);
        self.weight += w;
        for (s, v) in self.sum.iter_mut().zip(y) {
            *s += w * v;
        }
        for r in 0..self.dim {
            for c in 0..self.dim {
                self.outer[r * self.dim + c] += w * y[r] * y[c];
            }
        }
    }

    pub fn remove(&mut self, y: &[f64], w: f64) {
        self.add(y, -w);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    pub fn outer(&self) -> &[f64] {
        &self.outer
    }

    pub(crate) fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = (self.weight - other.weight).abs();
        self.sum
            .iter()
            .chain(&self.outer)
            .zip(other.sum.iter().chain(&other.outer))
            .map(|(a, b)| (a - b).abs())
            .fold(d, f64::max)
    }
}
