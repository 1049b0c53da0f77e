//! Energies, upper gradients and the scenario catalog.

mod cantor;
mod catalog;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, Point, SampledCurve};

pub use cantor::{cantor_function, cantor_scenario, crossing_time_truncated, CantorGeometry, CantorSetup, CANTOR_EPS_D, CANTOR_RESOLUTION};
pub use catalog::{degenerate_power_scenario, quadratic_scenario, x_tau};

/// A pointwise map into the extended reals; `f64::INFINITY` marks points outside the domain.
pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Closed-form flow map `(x0, t) -> u(t)` when the scenario has one.
pub type ExactFlow = Arc<dyn Fn(&Point, f64) -> Option<Point> + Send + Sync>;

/// An energy `phi` with a candidate strong upper gradient `g`, coercivity data and thresholds.
#[derive(Clone)]
pub struct FlowProblem {
    pub space: MetricSpace,
    phi: ScalarField,
    g: ScalarField,
    /// Coercivity: `phi(x) >= -a - b d²(x, x_star)`.
    pub a: f64,
    pub b: f64,
    pub x_star: Point,
    /// `g <= eps_g` counts as a critical point.
    pub eps_g: f64,
    /// Point equality tolerance.
    pub eps_d: f64,
}

impl fmt::Debug for FlowProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlowProblem")
            .field("space", &self.space)
            .field("a", &self.a)
            .field("b", &self.b)
            .field("x_star", &self.x_star)
            .field("eps_g", &self.eps_g)
            .field("eps_d", &self.eps_d)
            .finish_non_exhaustive()
    }
}

impl FlowProblem {
    /// Problem with `a = b = 1`, `x_star = 0`, `eps_g = 1e-8`, `eps_d = 1e-6`.
    pub fn new(space: MetricSpace, phi: ScalarField, g: ScalarField) -> Self {
        let x_star = Point::zeros(space.dim());
        FlowProblem { space, phi, g, a: 1.0, b: 1.0, x_star, eps_g: 1e-8, eps_d: 1e-6 }
    }

    pub fn with_coercivity(mut self, a: f64, b: f64, x_star: Point) -> Self {
        self.a = a;
        self.b = b;
        self.x_star = x_star;
        self
    }

    pub fn with_thresholds(mut self, eps_g: f64, eps_d: f64) -> Self {
        self.eps_g = eps_g;
        self.eps_d = eps_d;
        self
    }

    /// Same problem with `phi` shifted by a constant; `a` grows to keep the coercivity bound.
    pub fn with_phi_offset(&self, offset: f64) -> Self {
        let phi = self.phi.clone();
        let mut p = self.clone();
        p.phi = Arc::new(move |x| phi(x) + offset);
        p.a += (-offset).max(0.0);
        p
    }

    /// Same energy with a different gradient candidate.
    pub fn with_g(&self, g: ScalarField) -> Self {
        FlowProblem { g, ..self.clone() }
    }

    pub fn phi(&self, x: &Point) -> f64 {
        (self.phi)(x)
    }

    pub fn g(&self, x: &Point) -> f64 {
        (self.g)(x)
    }

    /// `phi(x)`, checked against the coercivity bound. `+∞` is returned as is.
    pub fn phi_checked(&self, x: &Point) -> Result<f64> {
        let v = self.phi(x);
        if v.is_nan() {
            return Err(Error::Domain(format!("phi is NaN at {x:?}")));
        }
        let bound = self.coercivity_floor(x);
        if v < bound - 1e-12 * (1.0 + bound.abs()) {
            return Err(Error::Coercivity { point: x.coords().to_vec(), phi: v, bound });
        }
        Ok(v)
    }

    /// `-a - b d²(x, x_star)`.
    pub fn coercivity_floor(&self, x: &Point) -> f64 {
        let d = self.space.distance(x, &self.x_star);
        -self.a - self.b * d * d
    }

    /// `phi` at every node of `c`; errors on coercivity violations or a `+∞` initial value.
    pub fn phi_along(&self, c: &SampledCurve) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(c.len());
        for (t, x) in c.times().iter().zip(c.points()) {
            let v = self.phi_checked(x)?;
            if v == f64::INFINITY {
                return Err(Error::OutsideDomain { time: *t });
            }
            out.push(v);
        }
        Ok(out)
    }

    pub fn g_along(&self, c: &SampledCurve) -> Vec<f64> {
        c.points()
            .iter()
            .map(|x| {
                let v = self.g(x);
                debug_assert!(v >= 0.0, "negative g at {x:?}");
                v
            })
            .collect()
    }
}

/// A labelled sample solution of a scenario.
#[derive(Clone, Debug)]
pub struct AnalyticSolution {
    pub label: String,
    pub curve: SampledCurve,
}

/// A problem together with its oracle solutions and parameters.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub problem: FlowProblem,
    pub params: BTreeMap<String, serde_json::Value>,
    pub solutions: Vec<AnalyticSolution>,
    pub default_x0: Point,
    pub exact: Option<ExactFlow>,
    pub cantor: Option<Arc<CantorSetup>>,
}

impl fmt::Debug for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scenario")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("solutions", &self.solutions.iter().map(|s| &s.label).collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl Scenario {
    pub fn solution(&self, label: &str) -> Option<&SampledCurve> {
        self.solutions.iter().find(|s| s.label == label).map(|s| &s.curve)
    }

    pub fn curves(&self) -> Vec<SampledCurve> {
        self.solutions.iter().map(|s| s.curve.clone()).collect()
    }

    /// Closed-form value of the flow from `x0` at time `t`, if known.
    pub fn exact_at(&self, x0: &Point, t: f64) -> Option<Point> {
        self.exact.as_ref().and_then(|f| f(x0, t))
    }
}

/// `{"name": ..., "params": {...}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticParams {
    #[serde(default = "one")]
    dim: usize,
    #[serde(default = "dt_default")]
    dt: f64,
    #[serde(default = "one_f")]
    horizon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DegenerateParams {
    #[serde(default = "taus_default")]
    taus: Vec<f64>,
    #[serde(default = "two_f")]
    horizon: f64,
    #[serde(default = "dt_default")]
    dt: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CantorParams {
    #[serde(default = "depth_default")]
    depth: u32,
    #[serde(default = "dt_default")]
    ds: f64,
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn two_f() -> f64 {
    2.0
}
fn dt_default() -> f64 {
    1e-3
}
fn depth_default() -> u32 {
    6
}
fn taus_default() -> Vec<f64> {
    vec![0.0, 0.1, 0.25, 0.5]
}

/// Scenario names accepted by [`ScenarioConfig::build`].
pub const SCENARIO_NAMES: [&str; 3] = ["quadratic", "degenerate-power", "cantor"];

impl ScenarioConfig {
    pub fn named(name: &str) -> Self {
        ScenarioConfig { name: name.to_string(), params: Default::default() }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn build(&self) -> Result<Scenario> {
        let params = serde_json::Value::Object(self.params.clone());
        let bad = |e: serde_json::Error| Error::Config(format!("scenario {}: {e}", self.name));
        match self.name.as_str() {
            "quadratic" => {
                let p: QuadraticParams = serde_json::from_value(params).map_err(bad)?;
                catalog::quadratic_scenario_with(p.dim, p.dt, p.horizon)
            }
            "degenerate-power" => {
                let p: DegenerateParams = serde_json::from_value(params).map_err(bad)?;
                catalog::degenerate_power_scenario_with(&p.taus, p.horizon, p.dt)
            }
            "cantor" => {
                let p: CantorParams = serde_json::from_value(params).map_err(bad)?;
                cantor::cantor_scenario_with(p.depth, p.ds)
            }
            other => Err(Error::Config(format!(
                "unknown scenario {other:?} (expected one of {})",
                SCENARIO_NAMES.join(", ")
            ))),
        }
    }
}

/// Sampled local slope: the smallest-radius value together with every radius it was computed at.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub value: f64,
    pub per_radius: Vec<(f64, f64)>,
    /// Change of the estimate between the last two radii.
    pub trend: f64,
}

/// Estimates the local slope `limsup (phi(x) - phi(y))⁺ / d(x, y)` by probing spheres of the given
/// decreasing radii along the coordinate axes and the radial direction.
pub fn local_slope_estimate(p: &FlowProblem, x: &Point, radii: &[f64]) -> Result<SlopeEstimate> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("radii must be positive and strictly decreasing".into()));
    }
    let fx = p.phi(x);
    let d = x.dim();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
    }
    if x.norm() > 0.0 && d > 1 {
        let n = x.norm();
        for s in [1.0, -1.0] {
            dirs.push(x.coords().iter().map(|c| s * c / n).collect());
        }
    }
    let per_radius: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            let best = dirs
                .iter()
                .map(|e| {
                    let y = Point::new(x.coords().iter().zip(e).map(|(c, ei)| c + r * ei).collect())
                        .expect("finite probe");
                    let fy = p.phi(&y);
                    if fy.is_finite() {
                        (fx - fy).max(0.0) / r
                    } else {
                        0.0
                    }
                })
                .fold(0.0, f64::max);
            (r, best)
        })
        .collect();
    let value = per_radius.last().unwrap().1;
    let trend = if per_radius.len() >= 2 { value - per_radius[per_radius.len() - 2].1 } else { 0.0 };
    Ok(SlopeEstimate { value, per_radius, trend })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn slope_of_quadratic_and_degenerate() {
        let radii = [1e-2, 1e-3, 1e-5];
        let q = quadratic_scenario(1).unwrap();
        let s = local_slope_estimate(&q.problem, &Point::scalar(1.0), &radii).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-4);
        let s = local_slope_estimate(&q.problem, &Point::scalar(0.0), &radii).unwrap();
        assert!(s.value < 1e-4);
        let dp = degenerate_power_scenario(&[0.0], 2.0).unwrap();
        let s = local_slope_estimate(&dp.problem, &Point::scalar(1.0), &radii).unwrap();
        assert_abs_diff_eq!(s.value, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn slope_rejects_bad_radii() {
        let q = quadratic_scenario(1).unwrap();
        assert!(local_slope_estimate(&q.problem, &Point::scalar(1.0), &[1e-3, 1e-2]).is_err());
        assert!(local_slope_estimate(&q.problem, &Point::scalar(1.0), &[]).is_err());
    }

    #[test]
    fn config_dispatch() {
        let s = ScenarioConfig::named("quadratic").with_param("dim", 2).build().unwrap();
        assert_eq!(s.problem.space.dim(), 2);
        assert!(matches!(ScenarioConfig::named("nope").build(), Err(Error::Config(_))));
        assert!(matches!(
            ScenarioConfig::named("cantor").with_param("depth", 21).build(),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::named("quadratic").with_param("bogus", 1).build(),
            Err(Error::Config(_))
        ));
        let cfg: ScenarioConfig = serde_json::from_str(r#"{"name":"degenerate-power","params":{"taus":[0.0,0.2]}}"#).unwrap();
        assert_eq!(cfg.build().unwrap().solutions.len(), 2);
    }

    #[test]
    fn coercivity_is_enforced() {
        let q = quadratic_scenario(1).unwrap();
        let p = q.problem.with_phi_offset(-10.0).with_coercivity(1.0, 0.0, Point::scalar(0.0));
        assert!(matches!(p.phi_checked(&Point::scalar(0.0)), Err(Error::Coercivity { .. })));
    }
}
