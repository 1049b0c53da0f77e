//! Membership checks for the solution class: energy dissipation residuals, the upper-gradient
//! inequality, continuity of the energy along a curve and the Gronwall a priori bound.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::csv_f64;
use crate::metric::{metric_speed, SampledCurve};
use crate::problems::FlowProblem;

/// Residual of one grid interval `[s, t]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdiInterval {
    pub s: f64,
    pub t: f64,
    pub residual: f64,
}

/// Energy dissipation residuals of a sampled curve.
///
/// `residual(s, t) = ½∫ₛᵗ g² + ½∫ₛᵗ |u'|² − (phi(u(s)) − phi(u(t)))`. A solution has every
/// residual `<= 0` up to quadrature error; negative values are dissipation slack. Residuals are
/// additive, so every grid pair is available from the per-node cumulative sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdiReport {
    pub intervals: Vec<EdiInterval>,
    /// `cumulative[i] = residual(0, t_i)`.
    pub cumulative: Vec<f64>,
    /// Maximum over grid pairs `s <= t`, hence never below 0.
    pub max_residual: f64,
    pub worst_pair: (f64, f64),
    /// Minimum over grid pairs; large negative values mean a lot of slack.
    pub min_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Every pair residual lies within `±tolerance`: the curve is a curve of maximal slope
    /// with equality in the dissipation balance.
    pub maximal_slope_tight: bool,
}

impl EdiReport {
    /// `residual(t_i, t_j)` for grid indices `i <= j`.
    pub fn residual(&self, i: usize, j: usize) -> f64 {
        self.cumulative[j] - self.cumulative[i]
    }

    /// Rows `s,t,residual`: every grid interval, then every pair `(0, t)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,t,residual\n");
        for iv in &self.intervals {
            out.push_str(&format!("{},{},{}\n", csv_f64(iv.s), csv_f64(iv.t), csv_f64(iv.residual)));
        }
        for (iv, r) in self.intervals.iter().zip(&self.cumulative[1..]) {
            out.push_str(&format!("{},{},{}\n", csv_f64(0.0), csv_f64(iv.t), csv_f64(*r)));
        }
        out
    }
}

struct Residuals {
    intervals: Vec<EdiInterval>,
    cumulative: Vec<f64>,
}

fn residuals(p: &FlowProblem, c: &SampledCurve) -> Result<Residuals> {
    let phi = p.phi_along(c)?;
    let g = p.g_along(c);
    let speed = metric_speed(c, &p.space);
    let t = c.times();
    let mut intervals = Vec::with_capacity(c.len() - 1);
    let mut cumulative = Vec::with_capacity(c.len());
    cumulative.push(0.0);
    for i in 0..c.len() - 1 {
        let dt = t[i + 1] - t[i];
        let residual = 0.25 * dt * (g[i] * g[i] + g[i + 1] * g[i + 1]) + 0.5 * speed[i] * speed[i] * dt
            - (phi[i] - phi[i + 1]);
        intervals.push(EdiInterval { s: t[i], t: t[i + 1], residual });
        cumulative.push(cumulative[i] + residual);
    }
    Ok(Residuals { intervals, cumulative })
}

/// Largest rise `max_{i <= j} (v[j] - v[i])` with its index pair.
fn max_rise(v: &[f64]) -> (f64, usize, usize) {
    let (mut best, mut bi, mut bj) = (0.0, 0, 0);
    let mut arg_min = 0;
    for j in 1..v.len() {
        if v[j] < v[arg_min] {
            arg_min = j;
        }
        let rise = v[j] - v[arg_min];
        if rise > best {
            (best, bi, bj) = (rise, arg_min, j);
        }
    }
    (best, bi, bj)
}

fn max_pair_residual(p: &FlowProblem, c: &SampledCurve) -> Result<f64> {
    Ok(max_rise(&residuals(p, c)?.cumulative).0)
}

/// Every other node of `c`, always keeping the last.
pub fn coarsen(c: &SampledCurve) -> Option<SampledCurve> {
    if c.len() < 3 {
        return None;
    }
    let mut idx: Vec<usize> = (0..c.len()).step_by(2).collect();
    if *idx.last().unwrap() != c.len() - 1 {
        idx.push(c.len() - 1);
    }
    let times = idx.iter().map(|&i| c.times()[i]).collect();
    let points = idx.iter().map(|&i| c.points()[i].clone()).collect();
    SampledCurve::new(times, points).ok()
}

/// Ten times the change of the maximal pair residual between the curve and its twice-coarser
/// subsample (a Richardson-style quadrature error estimate), floored at `1e-12`.
pub fn default_tolerance(p: &FlowProblem, c: &SampledCurve) -> Result<f64> {
    let fine = max_pair_residual(p, c)?;
    let est = match coarsen(c) {
        Some(coarse) => (fine - max_pair_residual(p, &coarse)?).abs(),
        None => 0.0,
    };
    Ok((10.0 * est).max(1e-12))
}

/// Residuals with the default tolerance.
pub fn edi_residuals(p: &FlowProblem, c: &SampledCurve) -> Result<EdiReport> {
    let tol = default_tolerance(p, c)?;
    edi_residuals_with(p, c, tol)
}

/// Residuals with verdict `max_residual <= tol`.
pub fn edi_residuals_with(p: &FlowProblem, c: &SampledCurve, tol: f64) -> Result<EdiReport> {
    let Residuals { intervals, cumulative } = residuals(p, c)?;
    let (max_residual, i, j) = max_rise(&cumulative);
    let neg: Vec<f64> = cumulative.iter().map(|v| -v).collect();
    let min_residual = -max_rise(&neg).0;
    let t = c.times();
    Ok(EdiReport {
        intervals,
        cumulative,
        max_residual,
        worst_pair: (t[i], t[j]),
        min_residual,
        tolerance: tol,
        passed: max_residual <= tol,
        maximal_slope_tight: max_residual <= tol && min_residual >= -tol,
    })
}

/// Whether `c` satisfies the energy dissipation inequality on all grid pairs. `None` uses
/// [`default_tolerance`]. A `+∞` energy on the curve is an error, not a failed verdict.
pub fn is_solution(p: &FlowProblem, c: &SampledCurve, tol: Option<f64>) -> Result<(bool, EdiReport)> {
    let report = match tol {
        Some(tol) => edi_residuals_with(p, c, tol)?,
        None => edi_residuals(p, c)?,
    };
    Ok((report.passed, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SugReport {
    pub passed: bool,
    /// `max (|Δphi| − ∫ g |u'|)` over grid pairs.
    pub max_violation: f64,
    pub worst_pair: (f64, f64),
    pub tolerance: f64,
}

/// Falsification test for `|phi(u(t)) − phi(u(s))| <= ∫ₛᵗ g(u)|u'|` on all grid pairs.
pub fn sug_check(p: &FlowProblem, c: &SampledCurve, tol: f64) -> Result<SugReport> {
    let phi = p.phi_along(c)?;
    let g = p.g_along(c);
    let speed = metric_speed(c, &p.space);
    let t = c.times();
    let mut cum_g = vec![0.0];
    for i in 0..c.len() - 1 {
        cum_g.push(cum_g[i] + 0.5 * (g[i] + g[i + 1]) * speed[i] * (t[i + 1] - t[i]));
    }
    let up: Vec<f64> = phi.iter().zip(&cum_g).map(|(f, g)| f - g).collect();
    let down: Vec<f64> = phi.iter().zip(&cum_g).map(|(f, g)| -f - g).collect();
    let (a, ai, aj) = max_rise(&up);
    let (b, bi, bj) = max_rise(&down);
    let (max_violation, i, j) = if a >= b { (a, ai, aj) } else { (b, bi, bj) };
    Ok(SugReport { passed: max_violation <= tol, max_violation, worst_pair: (t[i], t[j]), tolerance: tol })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub passed: bool,
    /// `max_t xi(t) / (xi(0)(1 + 8Bt e^{8Bt}))`.
    pub max_ratio: f64,
    pub worst_time: f64,
    /// `min_t` of bound minus `xi(t)`; negative on failure.
    pub margin: f64,
    /// `max_t xi(t) / (xi(0)(1 + 8B theta e^{8B theta}))`.
    pub theta_ratio: f64,
    pub theta: f64,
}

/// Checks `xi(t) <= xi(0)(1 + 8Bt e^{8Bt})` at every node, with
/// `xi = phi(u) + 2B d²(u, x_star) + A`. The uniform-in-`theta` version is reported as well.
pub fn gronwall_bound(p: &FlowProblem, c: &SampledCurve, theta: f64) -> Result<GronwallReport> {
    let phi = p.phi_along(c)?;
    let xi: Vec<f64> = phi
        .iter()
        .zip(c.points())
        .map(|(f, x)| {
            let d = p.space.distance(x, &p.x_star);
            f + 2.0 * p.b * d * d + p.a
        })
        .collect();
    let growth = |t: f64| 1.0 + 8.0 * p.b * t * (8.0 * p.b * t).exp();
    let mut max_ratio = f64::NEG_INFINITY;
    let mut worst_time = 0.0;
    let mut margin = f64::INFINITY;
    let mut passed = true;
    for (&t, &x) in c.times().iter().zip(&xi) {
        let bound = xi[0] * growth(t);
        let ratio = if bound > 0.0 { x / bound } else if x <= 0.0 { 0.0 } else { f64::INFINITY };
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_time = t;
        }
        margin = margin.min(bound - x);
        if x > bound + 1e-12 * (1.0 + bound.abs()) {
            passed = false;
        }
    }
    let theta_bound = xi[0] * growth(theta);
    let theta_ratio = xi.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / theta_bound;
    Ok(GronwallReport { passed, max_ratio, worst_time, margin, theta_ratio, theta })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub passed: bool,
    /// Constant `C` of the modulus `C √Δt`.
    pub constant: f64,
    /// Largest `|Δphi| / modulus(Δt)` over grid intervals.
    pub worst_ratio: f64,
    pub worst_interval: (f64, f64),
}

/// `|phi(u(t_{i+1})) − phi(u(t_i))| <= C √Δt + tol` with `C = max g · √(2 (phi(u(0)) − min phi))`,
/// the Cauchy–Schwarz bound implied by the dissipation inequality.
pub fn phi_continuity_check(p: &FlowProblem, c: &SampledCurve, tol: f64) -> Result<ContinuityReport> {
    let phi = p.phi_along(c)?;
    let gmax = p.g_along(c).into_iter().fold(0.0, f64::max);
    let drop = phi[0] - phi.iter().cloned().fold(f64::INFINITY, f64::min);
    let constant = gmax * (2.0 * drop).sqrt();
    phi_continuity_check_with(p, c, tol, constant, |dt| constant * dt.sqrt())
}

/// Continuity check against an arbitrary modulus.
pub fn phi_continuity_check_with(
    p: &FlowProblem,
    c: &SampledCurve,
    tol: f64,
    constant: f64,
    modulus: impl Fn(f64) -> f64,
) -> Result<ContinuityReport> {
    let phi = p.phi_along(c)?;
    let t = c.times();
    let mut passed = true;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_interval = (t[0], t[1]);
    for i in 0..c.len() - 1 {
        let jump = (phi[i + 1] - phi[i]).abs();
        let m = modulus(t[i + 1] - t[i]);
        if jump > m + tol {
            passed = false;
        }
        let ratio = if m > 0.0 { jump / m } else if jump > tol { f64::INFINITY } else { 0.0 };
        if ratio > worst_ratio {
            worst_ratio = ratio;
            worst_interval = (t[i], t[i + 1]);
        }
    }
    Ok(ContinuityReport { passed, constant, worst_ratio, worst_interval })
}
