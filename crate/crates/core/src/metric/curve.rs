use serde::{Deserialize, Serialize};

use super::point::{MetricSpace, Point};
use crate::error::{Error, Result};

/// A curve `[0, H] → ℝᵈ` given by its values on a strictly increasing time grid, linearly
/// interpolated between nodes. The horizon `H` is the last grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    times: Vec<f64>,
    points: Vec<Point>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<Point>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidCurve(format!("need at least 2 nodes, got {}", times.len())));
        }
        if times.len() != points.len() {
            return Err(Error::InvalidCurve(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidCurve(format!("times[0] = {} (must be 0)", times[0])));
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidCurve(format!(
                    "times not strictly increasing at index {}: {} -> {}",
                    i, w[0], w[1]
                )));
            }
        }
        let dim = points[0].dim();
        if let Some(i) = points.iter().position(|p| p.dim() != dim) {
            return Err(Error::InvalidCurve(format!("point {i} has dimension {} != {dim}", points[i].dim())));
        }
        Ok(SampledCurve { times, points })
    }

    /// Samples `f` on the given grid.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> Point) -> Result<Self> {
        let points = grid.iter().map(|&t| f(t)).collect();
        SampledCurve::new(grid, points)
    }

    /// The constant curve at `p` on `[0, horizon]` with two nodes.
    pub fn constant(p: Point, horizon: f64) -> Result<Self> {
        SampledCurve::new(vec![0.0, horizon], vec![p.clone(), p])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn first(&self) -> &Point {
        &self.points[0]
    }

    pub fn last(&self) -> &Point {
        self.points.last().unwrap()
    }

    /// Largest grid step.
    pub fn max_step(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Value at time `t` by linear interpolation. Exact node values on grid times.
    pub fn interp(&self, t: f64) -> Result<Point> {
        if !(0.0..=self.horizon()).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.horizon())));
        }
        Ok(self.eval_clamped(t))
    }

    /// Like [`interp`](Self::interp) but extended by the constant end values outside `[0, H]`.
    pub fn eval_clamped(&self, t: f64) -> Point {
        if t <= 0.0 {
            return self.points[0].clone();
        }
        if t >= self.horizon() {
            return self.last().clone();
        }
        // first index with times[i] > t
        let i = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        if t == t0 {
            return self.points[i - 1].clone();
        }
        self.points[i - 1].lerp(&self.points[i], (t - t0) / (t1 - t0))
    }

    /// Resamples onto `grid` (which must start at 0 and lie within the horizon).
    pub fn resample(&self, grid: &[f64]) -> Result<SampledCurve> {
        let points = grid.iter().map(|&t| self.interp(t)).collect::<Result<Vec<_>>>()?;
        SampledCurve::new(grid.to_vec(), points)
    }

    /// Copy of the curve with `t` inserted as a grid node (no-op if already present).
    pub fn with_node(&self, t: f64) -> Result<SampledCurve> {
        let p = self.interp(t)?;
        let i = self.times.partition_point(|&s| s < t);
        if i < self.times.len() && self.times[i] == t {
            return Ok(self.clone());
        }
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        times.insert(i, t);
        points.insert(i, p);
        SampledCurve::new(times, points)
    }

    /// The restriction to `[0, T]`, with `T` added as the final node.
    pub fn restrict(&self, horizon: f64) -> Result<SampledCurve> {
        if !(horizon > 0.0 && horizon <= self.horizon()) {
            return Err(Error::Domain(format!("restriction horizon {horizon} outside (0, {}]", self.horizon())));
        }
        let c = self.with_node(horizon)?;
        let n = c.times.partition_point(|&s| s <= horizon);
        SampledCurve::new(c.times[..n].to_vec(), c.points[..n].to_vec())
    }

    /// Sup over the union grid of the pointwise distance, each curve extended by its end value.
    pub fn sup_distance(&self, other: &SampledCurve, space: &MetricSpace) -> f64 {
        merge_grids(&self.times, &other.times)
            .into_iter()
            .map(|t| space.distance(&self.eval_clamped(t), &other.eval_clamped(t)))
            .fold(0.0, f64::max)
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> SampledCurve {
        SampledCurve {
            times: self.times.clone(),
            points: self.points.iter().map(f).collect(),
        }
    }

    /// Deconstructs into `(times, points)`.
    pub fn into_parts(self) -> (Vec<f64>, Vec<Point>) {
        (self.times, self.points)
    }
}

/// Union of two grids, sorted and deduplicated.
pub fn merge_grids(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

/// `{0, dt, 2 dt, …}` up to `horizon`, with `horizon` itself as the last node.
pub fn uniform_grid(horizon: f64, dt: f64) -> Vec<f64> {
    assert!(horizon > 0.0 && dt > 0.0, "horizon and dt must be positive");
    let n = (horizon / dt).round() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| i as f64 * dt).filter(|&t| t < horizon).collect();
    // drop a node that would sit within 1e-9 dt of the horizon
    while grid.len() > 1 && horizon - grid.last().unwrap() < 1e-9 * dt {
        grid.pop();
    }
    grid.push(horizon);
    grid
}

/// File representation: `{"dim": d, "times": [...], "points": [[...], ...]}`.
#[derive(Serialize, Deserialize)]
struct CurveFile {
    dim: usize,
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl Serialize for SampledCurve {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CurveFile {
            dim: self.dim(),
            times: self.times.clone(),
            points: self.points.iter().map(|p| p.coords().to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SampledCurve {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = CurveFile::deserialize(deserializer)?;
        let points = file
            .points
            .into_iter()
            .map(Point::new)
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        if points.iter().any(|p| p.dim() != file.dim) {
            return Err(D::Error::custom(format!("point dimension differs from dim = {}", file.dim)));
        }
        SampledCurve::new(file.times, points).map_err(D::Error::custom)
    }
}
