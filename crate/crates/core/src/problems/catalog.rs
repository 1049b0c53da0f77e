use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::{AnalyticSolution, FlowProblem, Scenario};
use crate::error::{Error, Result};
use crate::metric::{uniform_grid, MetricSpace, Point, SampledCurve};

/// `phi(x) = |x|²/2`, `g(x) = |x|`, flow `u(t) = u0 e^{-t}`.
pub fn quadratic_scenario(dim: usize) -> Result<Scenario> {
    quadratic_scenario_with(dim, 1e-3, 1.0)
}

pub(super) fn quadratic_scenario_with(dim: usize, dt: f64, horizon: f64) -> Result<Scenario> {
    if dim == 0 {
        return Err(Error::Config("quadratic scenario needs dim >= 1".into()));
    }
    check_grid(dt, horizon)?;
    let space = MetricSpace::euclidean(dim);
    let problem = FlowProblem::new(
        space,
        Arc::new(|x: &Point| 0.5 * x.norm() * x.norm()),
        Arc::new(|x: &Point| x.norm()),
    );
    let exact = |x0: &Point, t: f64| Some(x0.scaled((-t).exp()));
    let grid = uniform_grid(horizon, dt);
    let starts: Vec<(String, Point)> = if dim == 1 {
        vec![
            ("x0=1".into(), Point::scalar(1.0)),
            ("x0=-0.5".into(), Point::scalar(-0.5)),
            ("x0=2".into(), Point::scalar(2.0)),
            ("x0=0".into(), Point::scalar(0.0)),
        ]
    } else {
        let ones = Point::new(vec![1.0; dim])?;
        let e1 = Point::zeros(dim).with_coord(0, -1.5);
        vec![("x0=ones".into(), ones), ("x0=-1.5e1".into(), e1), ("x0=0".into(), Point::zeros(dim))]
    };
    let solutions = starts
        .iter()
        .map(|(label, x0)| {
            Ok(AnalyticSolution {
                label: label.clone(),
                curve: SampledCurve::from_fn(grid.clone(), |t| exact(x0, t).unwrap())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = finish(problem, &solutions)?;
    let default_x0 = starts[0].1.clone();
    Ok(Scenario {
        name: "quadratic".into(),
        problem,
        params: BTreeMap::from([
            ("dim".into(), json!(dim)),
            ("dt".into(), json!(dt)),
            ("horizon".into(), json!(horizon)),
        ]),
        solutions,
        default_x0,
        exact: Some(Arc::new(exact)),
        cantor: None,
    })
}

/// The wait-then-depart solution `((2/3)(t - tau)₊)^{3/2}`.
pub fn x_tau(tau: f64, t: f64) -> f64 {
    (2.0 / 3.0 * (t - tau).max(0.0)).powf(1.5)
}

/// `phi(x) = -(3/4) x^{4/3}` on `x >= 0` (`+∞` below), `g(x) = |x|^{1/3}`.
///
/// Every `x_tau` solves the flow from 0. Each member is sampled on `[0, tau + W]` with
/// `W = horizon - max tau`, so the whole family shares the range `[0, x_0(W)]`.
pub fn degenerate_power_scenario(taus: &[f64], horizon: f64) -> Result<Scenario> {
    degenerate_power_scenario_with(taus, horizon, 1e-3)
}

pub(super) fn degenerate_power_scenario_with(taus: &[f64], horizon: f64, dt: f64) -> Result<Scenario> {
    check_grid(dt, horizon)?;
    if taus.is_empty() || taus.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::Config("wait times must be a nonempty list of nonnegative numbers".into()));
    }
    let max_tau = taus.iter().cloned().fold(0.0, f64::max);
    if !(horizon > max_tau) {
        return Err(Error::Config(format!("horizon {horizon} must exceed max wait time {max_tau}")));
    }
    let window = horizon - max_tau;
    let problem = FlowProblem::new(
        MetricSpace::euclidean(1),
        Arc::new(|x: &Point| if x.x() >= 0.0 { -0.75 * x.x().powf(4.0 / 3.0) } else { f64::INFINITY }),
        Arc::new(|x: &Point| x.x().abs().cbrt()),
    );
    let solutions = taus
        .iter()
        .map(|&tau| {
            Ok(AnalyticSolution {
                label: format!("tau={tau}"),
                curve: SampledCurve::from_fn(uniform_grid(tau + window, dt), |t| Point::scalar(x_tau(tau, t)))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = finish(problem, &solutions)?;
    // from x0 >= 0 the departing branch is ((2/3) t + x0^{2/3})^{3/2}
    let exact = |x0: &Point, t: f64| {
        (x0.x() >= 0.0).then(|| Point::scalar((2.0 / 3.0 * t + x0.x().powf(2.0 / 3.0)).powf(1.5)))
    };
    Ok(Scenario {
        name: "degenerate-power".into(),
        problem,
        params: BTreeMap::from([
            ("taus".into(), json!(taus)),
            ("horizon".into(), json!(horizon)),
            ("dt".into(), json!(dt)),
        ]),
        solutions,
        default_x0: Point::scalar(0.0),
        exact: Some(Arc::new(exact)),
        cantor: None,
    })
}

fn check_grid(dt: f64, horizon: f64) -> Result<()> {
    if !(dt > 0.0 && horizon > 0.0 && dt <= horizon) {
        return Err(Error::Config(format!("need 0 < dt <= horizon, got dt = {dt}, horizon = {horizon}")));
    }
    Ok(())
}

/// Sets `a = 1 + max phi⁻`, `b = 1`, `x_star = 0` from the sampled solutions and
/// `eps_g = 1e-8 max g`, `eps_d = 1e-6 scale`.
pub(super) fn finish(problem: FlowProblem, solutions: &[AnalyticSolution]) -> Result<FlowProblem> {
    let mut neg: f64 = 0.0;
    let mut gmax: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in solutions {
        for x in s.curve.points() {
            let v = problem.phi(x);
            if v.is_finite() {
                neg = neg.max(-v);
            }
            gmax = gmax.max(problem.g(x));
            scale = scale.max(x.norm());
        }
    }
    let dim = problem.space.dim();
    let eps_g = if gmax > 0.0 { 1e-8 * gmax } else { 1e-8 };
    let eps_d = 1e-6 * scale.max(1.0);
    Ok(problem.with_coercivity(1.0 + neg, 1.0, Point::zeros(dim)).with_thresholds(eps_g, eps_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn quadratic_energy_at_one() {
        let s = quadratic_scenario(1).unwrap();
        let u1 = s.solution("x0=1").unwrap().interp(1.0).unwrap();
        assert_abs_diff_eq!(s.problem.phi(&u1), (-2.0f64).exp() / 2.0, epsilon = 1e-15);
        let zero = s.solution("x0=0").unwrap();
        assert!(zero.points().iter().all(|p| p.x() == 0.0));
    }

    #[test]
    fn degenerate_examples() {
        assert_abs_diff_eq!(x_tau(0.0, 1.5), 1.0, epsilon = 1e-15);
        assert_eq!(x_tau(0.5, 0.25), 0.0);
        let s = degenerate_power_scenario(&[0.0, 0.5], 2.0).unwrap();
        assert_eq!(s.solution("tau=0.5").unwrap().horizon(), 2.0);
        assert_abs_diff_eq!(s.solution("tau=0").unwrap().horizon(), 1.5, epsilon = 1e-12);
        assert_eq!(s.problem.phi(&Point::scalar(-0.1)), f64::INFINITY);
    }

    #[test]
    fn degenerate_gradient_identity() {
        // g(x_tau(t)) = ((2/3)(t - tau)₊)^{1/2}
        let s = degenerate_power_scenario(&[0.0, 0.1, 0.25, 0.5], 2.0).unwrap();
        for (sol, tau) in s.solutions.iter().zip([0.0, 0.1, 0.25, 0.5]) {
            for (t, x) in sol.curve.times().iter().zip(sol.curve.points()) {
                let want = (2.0 / 3.0 * (t - tau).max(0.0)).sqrt();
                assert_abs_diff_eq!(s.problem.g(x), want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_speed_matches_gradient() {
        let s = degenerate_power_scenario(&[0.25], 2.0).unwrap();
        let c = s.solution("tau=0.25").unwrap();
        let speeds = crate::metric::metric_speed(c, &s.problem.space);
        for ((&v, &t), x) in speeds.iter().zip(c.times()).zip(c.points()) {
            if t > 0.25 + 0.01 {
                assert!((v - s.problem.g(x)).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn samples_respect_coercivity_and_sign() {
        for s in [quadratic_scenario(2).unwrap(), degenerate_power_scenario(&[0.0, 0.3], 1.0).unwrap()] {
            for c in s.curves() {
                for x in c.points() {
                    assert!(s.problem.phi_checked(x).is_ok());
                    assert!(s.problem.g(x) >= 0.0);
                }
            }
        }
    }
}
