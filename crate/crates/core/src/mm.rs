//! Minimizing movements: the proximal scheme `x_{k+1} ∈ argmin phi(y) + d²(y, x_k) / (2 tau)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{uniform_grid, Point, SampledCurve};
use crate::problems::FlowProblem;

/// Scheme parameters. The inner solver is a bracketed grid search followed by golden-section
/// refinement, run coordinate by coordinate in more than one dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmConfig {
    pub tau: f64,
    pub horizon: f64,
    pub x0: Point,
    /// Grid points per side of the search window.
    pub grid_half_points: usize,
    pub golden_tol: f64,
    pub max_sweeps: usize,
}

impl MmConfig {
    pub fn new(tau: f64, horizon: f64, x0: Point) -> Self {
        MmConfig { tau, horizon, x0, grid_half_points: 200, golden_tol: 1e-10, max_sweeps: 50 }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!("step tau = {} must be positive", self.tau)));
        }
        if !(self.horizon >= self.tau && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon {} must be at least tau = {}", self.horizon, self.tau)));
        }
        if self.grid_half_points < 2 || !(self.golden_tol > 0.0) || self.max_sweeps == 0 {
            return Err(Error::Config("inner solver parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one proximal step.
#[derive(Clone, Debug, PartialEq)]
pub struct MmStep {
    pub point: Point,
    /// The solver found nothing strictly better than staying at `x`.
    pub stationary: bool,
    /// `phi(y) + d²(y, x) / (2 tau)` at the returned point.
    pub objective: f64,
}

fn objective(p: &FlowProblem, x: &Point, y: &Point, tau: f64) -> f64 {
    let d = p.space.distance(x, y);
    p.phi(y) + d * d / (2.0 * tau)
}

/// Minimizes `f` over `[center - r, center + r]`: two nested grid searches, then golden section.
fn minimize_1d(f: &dyn Fn(f64) -> f64, center: f64, r: f64, half: usize, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (center - r, center + r);
    let mut best = (center, f(center));
    for _ in 0..2 {
        let n = 2 * half;
        let h = (hi - lo) / n as f64;
        for k in 0..=n {
            let y = lo + k as f64 * h;
            let v = f(y);
            if v < best.1 {
                best = (y, v);
            }
        }
        (lo, hi) = (best.0 - h, best.0 + h);
    }
    // golden section on the final bracket
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    for (y, v) in [(c, fc), (d, fd)] {
        if v < best.1 {
            best = (y, v);
        }
    }
    best
}

fn step_with(p: &FlowProblem, x: &Point, tau: f64, cfg: &MmConfig) -> Result<MmStep> {
    let fx = p.phi(x);
    if !fx.is_finite() {
        return Err(Error::Precondition(format!("phi(x) = {fx} at {x:?}; a proximal step needs finite energy")));
    }
    let mut y = x.clone();
    let mut fy = fx;
    for _ in 0..cfg.max_sweeps {
        let before = y.clone();
        for i in 0..x.dim() {
            let line = |s: f64| objective(p, x, &y.with_coord(i, s), tau);
            // window from the energy range seen around the current coordinate
            let r0 = 10.0 * (2.0 * tau).sqrt();
            let n = 2 * cfg.grid_half_points;
            let inf = (0..=n)
                .map(|k| p.phi(&y.with_coord(i, y[i] - r0 + 2.0 * r0 * k as f64 / n as f64)))
                .fold(f64::INFINITY, f64::min);
            let r = 10.0 * (2.0 * tau * (p.phi(&y) - inf).max(1.0)).sqrt();
            let (s, v) = minimize_1d(&line, y[i], r, cfg.grid_half_points, cfg.golden_tol);
            if v < fy {
                y = y.with_coord(i, s);
                fy = v;
            }
        }
        if p.space.distance(&before, &y) <= 1e-14 * (1.0 + y.norm()) {
            break;
        }
    }
    let stay = objective(p, x, x, tau);
    if fy < stay {
        Ok(MmStep { point: y, stationary: false, objective: fy })
    } else {
        Ok(MmStep { point: x.clone(), stationary: true, objective: stay })
    }
}

/// One proximal step from `x`. Never worse than staying put: when the solver finds no strict
/// improvement it returns `x` with `stationary` set.
pub fn mm_step(p: &FlowProblem, x: &Point, tau: f64) -> Result<MmStep> {
    let cfg = MmConfig::new(tau, tau, x.clone());
    cfg.validate()?;
    step_with(p, x, tau, &cfg)
}

/// Piecewise-linear interpolation of the proximal sequence on `{0, tau, 2 tau, …, horizon}`.
/// A shorter last step is taken with its own length.
pub fn mm_curve(p: &FlowProblem, cfg: &MmConfig) -> Result<SampledCurve> {
    cfg.validate()?;
    let grid = uniform_grid(cfg.horizon, cfg.tau);
    let mut points = Vec::with_capacity(grid.len());
    points.push(cfg.x0.clone());
    for w in grid.windows(2) {
        let x = points.last().unwrap();
        points.push(step_with(p, x, w[1] - w[0], cfg)?.point);
    }
    SampledCurve::new(grid, points)
}

/// Sup-errors against an exact solution at `tau, tau/2, …` and their consecutive ratios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub taus: Vec<f64>,
    pub errors: Vec<f64>,
    pub ratios: Vec<f64>,
}

pub fn mm_convergence_study(
    p: &FlowProblem,
    cfg: &MmConfig,
    levels: usize,
    exact: &dyn Fn(f64) -> Point,
) -> Result<ConvergenceTable> {
    if levels == 0 {
        return Err(Error::Config("need at least one level".into()));
    }
    let mut taus = Vec::with_capacity(levels);
    let mut errors = Vec::with_capacity(levels);
    for k in 0..levels {
        let tau = cfg.tau / (1u64 << k) as f64;
        let c = mm_curve(p, &MmConfig { tau, ..cfg.clone() })?;
        let err = c
            .times()
            .iter()
            .zip(c.points())
            .map(|(&t, x)| p.space.distance(x, &exact(t)))
            .fold(0.0, f64::max);
        taus.push(tau);
        errors.push(err);
    }
    let ratios = errors
        .windows(2)
        .map(|w| if w[1] > 0.0 { w[0] / w[1] } else if w[0] == 0.0 { 1.0 } else { f64::INFINITY })
        .collect();
    Ok(ConvergenceTable { taus, errors, ratios })
}
