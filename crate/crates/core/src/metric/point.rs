use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the phase space ℝᵈ.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidCurve("point must have dimension >= 1".into()));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidCurve(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    /// One-dimensional point. Panics on a non-finite value.
    pub fn scalar(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite coordinate {x}");
        Point(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// First coordinate; the natural accessor for 1-D scenarios.
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `(1 - lambda) * self + lambda * other`, coordinate-wise.
    pub fn lerp(&self, other: &Point, lambda: f64) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| if lambda == 0.0 { *a } else if lambda == 1.0 { *b } else { a + lambda * (b - a) })
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn with_coord(&self, i: usize, value: f64) -> Point {
        let mut coords = self.0.clone();
        coords[i] = value;
        Point(coords)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Euclidean ℝᵈ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSpace {
    dim: usize,
}

impl MetricSpace {
    pub fn euclidean(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        MetricSpace { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        debug_assert_eq!(p.dim(), self.dim);
        debug_assert_eq!(q.dim(), self.dim);
        p.0.iter()
            .zip(&q.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Point equality at tolerance `eps_d`.
    pub fn close(&self, p: &Point, q: &Point, eps_d: f64) -> bool {
        self.distance(p, q) <= eps_d
    }

    /// Distance from `x` to the segment `[p, q]`, together with the segment parameter of the
    /// closest point (the smallest one when the segment is degenerate).
    pub fn segment_projection(&self, p: &Point, q: &Point, x: &Point) -> (f64, f64) {
        let mut pq2 = 0.0;
        let mut dot = 0.0;
        for i in 0..self.dim {
            let e = q.0[i] - p.0[i];
            pq2 += e * e;
            dot += (x.0[i] - p.0[i]) * e;
        }
        let lambda = if pq2 > 0.0 { (dot / pq2).clamp(0.0, 1.0) } else { 0.0 };
        (self.distance(&p.lerp(q, lambda), x), lambda)
    }
}
