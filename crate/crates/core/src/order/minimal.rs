use serde::{Deserialize, Serialize};

use crate::dissipation::{is_solution, sug_check, EdiReport};
use crate::error::{Error, Result};
use crate::metric::{metric_speed, t_star, SampledCurve, TimeReparam};
use crate::problems::FlowProblem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Minimal,
    NotMinimal,
    Inconclusive,
}

/// Critical dwell time of a curve and the resulting minimality verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalityReport {
    /// Freeze time at resolution `eps_d`.
    pub t_star: f64,
    /// Total length of grid intervals before `t_star` on which `g <= eps_g` at both ends.
    pub critical_measure: f64,
    /// Maximal runs of the remaining intervals before `t_star`.
    pub omega: Vec<(f64, f64)>,
    pub omega_length: f64,
    pub verdict: Verdict,
    /// Measure threshold used for the verdict.
    pub tolerance: f64,
    pub eps_g: f64,
    pub eps_d: f64,
    /// Length of intervals where the speed-based and the `g`-based critical sets disagree.
    pub omega_disagreement: f64,
    /// Disagreement within two grid cells.
    pub omega_consistent: bool,
    /// Outcome of the upper-gradient falsification test the criterion relies on; `None` if it
    /// was not run.
    pub upper_gradient_checked: Option<bool>,
    pub notes: Vec<String>,
}

/// Per-interval classification shared by the measure and the extraction.
struct Classification {
    t_star: f64,
    /// Interval `i` lies before `t_star` and is critical.
    critical: Vec<bool>,
    /// Interval `i` lies before `t_star`.
    active: Vec<bool>,
    report: MinimalityReport,
}

fn classify(p: &FlowProblem, c: &SampledCurve, tol: Option<f64>) -> Classification {
    let ts = t_star(c, &p.space, p.eps_d);
    let g = p.g_along(c);
    let speed = metric_speed(c, &p.space);
    let t = c.times();
    let n = c.len() - 1;
    let mut critical = vec![false; n];
    let mut active = vec![false; n];
    let mut measure = 0.0;
    let mut omega: Vec<(f64, f64)> = Vec::new();
    let mut disagreement = 0.0;
    let mut max_dt: f64 = 0.0;
    let mut max_moving_dt: f64 = 0.0;
    for i in 0..n {
        if t[i + 1] > ts {
            break;
        }
        let dt = t[i + 1] - t[i];
        max_dt = max_dt.max(dt);
        active[i] = true;
        critical[i] = g[i] <= p.eps_g && g[i + 1] <= p.eps_g;
        if critical[i] {
            measure += dt;
        } else {
            max_moving_dt = max_moving_dt.max(dt);
            match omega.last_mut() {
                Some(last) if last.1 == t[i] => last.1 = t[i + 1],
                _ => omega.push((t[i], t[i + 1])),
            }
        }
        if critical[i] != (speed[i] <= p.eps_g) {
            disagreement += dt;
        }
    }
    let omega_length = omega.iter().map(|(a, b)| b - a).sum();
    // Resolution is set by the steps bordering the moving part; a dilated curve can carry a
    // handful of very long critical steps that must not inflate the tolerance.
    let step = if max_moving_dt > 0.0 { max_moving_dt } else { c.max_step() };
    let tolerance = tol.unwrap_or(2.0 * step);
    let omega_consistent = disagreement <= 2.0 * max_dt;
    let verdict = if !omega_consistent {
        Verdict::Inconclusive
    } else if measure <= tolerance {
        Verdict::Minimal
    } else {
        Verdict::NotMinimal
    };
    let notes = vec![
        format!("t_star measured at eps_d = {:e}; the final node stands in for the limit point", p.eps_d),
        format!("critical set thresholded at eps_g = {:e}", p.eps_g),
        "criterion assumes g is a strong upper gradient".to_string(),
    ];
    let report = MinimalityReport {
        t_star: ts,
        critical_measure: measure,
        omega,
        omega_length,
        verdict,
        tolerance,
        eps_g: p.eps_g,
        eps_d: p.eps_d,
        omega_disagreement: disagreement,
        omega_consistent,
        upper_gradient_checked: None,
        notes,
    };
    Classification { t_star: ts, critical, active, report }
}

/// Critical dwell time before the freeze time, with verdict at twice the longest non-critical step.
pub fn critical_time_measure(p: &FlowProblem, c: &SampledCurve) -> MinimalityReport {
    classify(p, c, None).report
}

fn require_solution(p: &FlowProblem, c: &SampledCurve) -> Result<EdiReport> {
    let (ok, report) = is_solution(p, c, None)?;
    if !ok {
        return Err(Error::NotASolution(Box::new(report)));
    }
    Ok(report)
}

/// Minimality verdict at measure tolerance `tol` (default: twice the longest non-critical step). The input must be a
/// solution. The upper-gradient falsification test is run alongside and recorded.
pub fn is_minimal(p: &FlowProblem, c: &SampledCurve, tol: Option<f64>) -> Result<MinimalityReport> {
    let edi = require_solution(p, c)?;
    let mut report = classify(p, c, tol).report;
    let sug = sug_check(p, c, edi.tolerance.max(1e-9))?;
    report.upper_gradient_checked = Some(sug.passed);
    if !sug.passed {
        report.notes.push(format!(
            "upper-gradient inequality violated by {:e}; verdict not backed by the criterion",
            sug.max_violation
        ));
    }
    Ok(report)
}

/// Output of [`extract_minimal`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub curve: SampledCurve,
    /// `z` on the input grid: slope 1 off the critical set, 0 on it and after the freeze time.
    pub reparam: TimeReparam,
    pub report: MinimalityReport,
}

/// Deletes critical dwell time: `z(t) = |[0, t] ∩ Ω|`, `w(z(t)) = c(t)` with left-most
/// preimages. When the input freezes before its horizon, `w` is held at its final value up to
/// the same horizon. The input must be a solution.
pub fn extract_minimal(p: &FlowProblem, c: &SampledCurve) -> Result<Extraction> {
    require_solution(p, c)?;
    Ok(extract_unchecked(p, c))
}

/// [`extract_minimal`] without the solution precondition.
pub fn extract_unchecked(p: &FlowProblem, c: &SampledCurve) -> Extraction {
    let Classification { t_star, critical, active, report } = classify(p, c, None);
    let t = c.times();
    let mut z = Vec::with_capacity(c.len());
    z.push(0.0);
    let mut deleted = 0.0;
    for i in 0..c.len() - 1 {
        if active[i] && !critical[i] {
            let next = t[i + 1] - deleted;
            if next > z[i] {
                z.push(next);
                continue;
            }
        }
        z.push(z[i]);
        deleted = t[i + 1] - z[i];
    }
    let mut times = vec![0.0];
    let mut points = vec![c.first().clone()];
    for i in 1..c.len() {
        if z[i] > z[i - 1] {
            times.push(z[i]);
            points.push(c.points()[i].clone());
        }
    }
    if t_star < c.horizon() && *times.last().unwrap() < c.horizon() {
        let last = points.last().unwrap().clone();
        times.push(c.horizon());
        points.push(last);
    }
    if times.len() == 1 {
        // nothing but dwell time: the constant curve
        times.push(c.horizon());
        points.push(points[0].clone());
    }
    let curve = SampledCurve::new(times, points).expect("extracted grid is strictly increasing");
    let reparam = TimeReparam::new(t.to_vec(), z).expect("extraction map on a valid grid");
    Extraction { curve, reparam, report }
}

/// `u = w ∘ beta⁻¹`: the nodes of `w` placed at the times `beta(s)`. `beta` must live on the grid
/// of `w`, start at 0 and have increments at least the grid increments, so `beta⁻¹` is
/// 1-Lipschitz and `u ≻ w`.
pub fn singular_dilate(w: &SampledCurve, beta: &TimeReparam) -> Result<SampledCurve> {
    if beta.grid() != w.times() {
        return Err(Error::InvalidReparam("dilation must be sampled on the grid of the curve".into()));
    }
    if beta.values()[0] != 0.0 {
        return Err(Error::InvalidReparam(format!("dilation starts at {} (must be 0)", beta.values()[0])));
    }
    let (g, v) = (beta.grid(), beta.values());
    for i in 0..beta.len() - 1 {
        let (db, ds) = (v[i + 1] - v[i], g[i + 1] - g[i]);
        if !(db > 0.0) {
            return Err(Error::InvalidReparam(format!("dilation not strictly increasing at s = {}", g[i])));
        }
        // rounding of s + M F(s) scales with the value, not with the step
        if db < ds - 1e-12 * (1.0 + v[i + 1].abs()) {
            return Err(Error::InvalidReparam(format!(
                "dilation increment {db} below grid increment {ds} at s = {}",
                g[i]
            )));
        }
    }
    SampledCurve::new(v.to_vec(), w.points().to_vec())
}
