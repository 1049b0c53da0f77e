use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled nondecreasing map of time, linearly interpolated between grid nodes.
///
/// The container only enforces structure (grid starts at 0 and strictly increases, values are
/// finite). Monotonicity and the 1-Lipschitz bound are checked where the math needs them, since
/// an arc-length map is monotone but steeper than 1 in general.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeReparam {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TimeReparam {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::InvalidReparam(format!(
                "need >= 2 nodes with matching lengths, got {} grid / {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid[0] != 0.0 {
            return Err(Error::InvalidReparam(format!("grid[0] = {} (must be 0)", grid[0])));
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidReparam(format!("grid not strictly increasing at index {i}")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidReparam(format!("non-finite value {v}")));
        }
        Ok(TimeReparam { grid, values })
    }

    pub fn identity(grid: Vec<f64>) -> Result<Self> {
        let values = grid.clone();
        TimeReparam::new(grid, values)
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        TimeReparam::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.domain_end()).contains(&t) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.domain_end())));
        }
        let i = self.grid.partition_point(|&s| s <= t);
        if i == self.grid.len() || self.grid[i - 1] == t {
            return Ok(self.values[i - 1]);
        }
        let (t0, t1) = (self.grid[i - 1], self.grid[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        Ok(v0 + (t - t0) / (t1 - t0) * (v1 - v0))
    }

    /// True when no increment is below `-tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] - w[0] >= -tol)
    }

    /// Sup over the grid of `|self(t) - f(t)|`.
    pub fn sup_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&t, &v)| (v - f(t)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct ReparamFile {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl Serialize for TimeReparam {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ReparamFile { grid: self.grid.clone(), values: self.values.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TimeReparam {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = ReparamFile::deserialize(deserializer)?;
        TimeReparam::new(file.grid, file.values).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_interpolates() {
        let m = TimeReparam::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.eval(1.5).unwrap(), 0.5);
        assert_eq!(m.eval(2.0).unwrap(), 1.0);
        assert!(m.eval(2.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = TimeReparam::from_fn(vec![0.0, 0.1, 0.7], |t| (t * 0.3f64).sin()).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.starts_with("{\"grid\":"));
        let back: TimeReparam = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(TimeReparam::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(TimeReparam::new(vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
        assert!(TimeReparam::new(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
    }
}
