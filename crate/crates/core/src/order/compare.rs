use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{check_one_lipschitz, merge_grids, MetricSpace, Point, RangeSample, SampledCurve, TimeReparam};
use crate::problems::FlowProblem;

/// Slack allowed on `z(0) = 0` and on the increments of a witness, relative to the horizon.
pub const WITNESS_TIME_TOL: f64 = 1e-9;

/// Left-most time `s` at which `v` passes within `eps_d` of `x`: the closest point of the first
/// segment of `v` that enters the `eps_d`-ball around `x`.
pub fn first_passage(v: &SampledCurve, space: &MetricSpace, x: &Point, eps_d: f64) -> Option<f64> {
    let (t, p) = (v.times(), v.points());
    if space.distance(&p[0], x) <= eps_d {
        return Some(t[0]);
    }
    for k in 0..v.len() - 1 {
        let (d, lambda) = space.segment_projection(&p[k], &p[k + 1], x);
        if d <= eps_d {
            return Some(segment_time(t, k, lambda));
        }
    }
    None
}

/// A time in `[lo, hi]` at which `v` is within `eps_d` of `x`, as late as cheaply possible:
/// `hi` itself if it matches, otherwise the closest point of the last matching segment.
fn windowed_match(
    v: &SampledCurve,
    space: &MetricSpace,
    x: &Point,
    (lo, hi): (f64, f64),
    snap: f64,
    eps_d: f64,
) -> Option<f64> {
    let (t, p) = (v.times(), v.points());
    let (lo, hi) = (lo.max(0.0), hi.min(v.horizon()));
    if lo > hi {
        return None;
    }
    // snap to a node of v when rounding put `hi` next to one
    let k = t.partition_point(|&s| s < hi);
    let end = [k.saturating_sub(1), k.min(v.len() - 1)]
        .into_iter()
        .map(|j| t[j])
        .filter(|&s| (s - hi).abs() <= snap && s >= lo)
        .fold(hi, |best, s| if (s - hi).abs() < (best - hi).abs() || best == hi { s } else { best });
    if space.distance(&v.eval_clamped(end), x) <= eps_d {
        return Some(end);
    }
    // segments [t_k, t_{k+1}] meeting the window, scanned from the right
    let first = t.partition_point(|&s| s <= lo).saturating_sub(1);
    let last = t.partition_point(|&s| s < hi).min(v.len() - 1);
    for k in (first..last).rev() {
        let span = t[k + 1] - t[k];
        let a = ((lo - t[k]) / span).clamp(0.0, 1.0);
        let b = ((hi - t[k]) / span).clamp(0.0, 1.0);
        let (_, lambda) = space.segment_projection(&p[k], &p[k + 1], x);
        let lambda = lambda.clamp(a, b);
        let q = p[k].lerp(&p[k + 1], lambda);
        if space.distance(&q, x) <= eps_d {
            return Some(segment_time(t, k, lambda));
        }
    }
    None
}

fn segment_time(t: &[f64], k: usize, lambda: f64) -> f64 {
    if lambda == 0.0 {
        t[k]
    } else if lambda == 1.0 {
        t[k + 1]
    } else {
        t[k] + lambda * (t[k + 1] - t[k])
    }
}

/// Why a candidate witness was rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MatchFailure {
    /// `u(t)` is not within `eps_d` of the range of `v`.
    Unmatched { t: f64 },
    /// `u(0)` only matches `v` at a positive time.
    NonzeroStart { z0: f64 },
    /// The nearest admissible match of `u(t + dt)` lies `dz` after the match of `u(t)`, outside
    /// `[0, dt]`.
    NotOneLipschitz { t: f64, dz: f64, dt: f64 },
    /// A node of `v` lies outside the `eps_d`-neighbourhood of the range of `u`.
    RangeExcess { excess: f64 },
}

/// Builds a map `z` with `u(t) = v(z(t))` at `eps_d` node by node, each match searched in
/// `[z(t_i), z(t_i) + Δt]` and taken as late as possible there, and validates it as a witness
/// of `u ≻ v`: total, `z(0) = 0`, increasing and 1-Lipschitz, and `R[v] ⊂ closure R[u]`.
pub fn match_reparam_detailed(
    u: &SampledCurve,
    v: &SampledCurve,
    space: &MetricSpace,
    eps_d: f64,
) -> std::result::Result<TimeReparam, MatchFailure> {
    let tol = WITNESS_TIME_TOL * (1.0 + u.horizon());
    let (ut, up) = (u.times(), u.points());
    if space.distance(&up[0], v.first()) > eps_d {
        return Err(match first_passage(v, space, &up[0], eps_d) {
            Some(z0) => MatchFailure::NonzeroStart { z0 },
            None => MatchFailure::Unmatched { t: ut[0] },
        });
    }
    let mut values = Vec::with_capacity(u.len());
    values.push(0.0);
    for i in 0..u.len() - 1 {
        let (z, dt) = (values[i], ut[i + 1] - ut[i]);
        match windowed_match(v, space, &up[i + 1], (z, z + dt + tol), 2.0 * tol, eps_d) {
            Some(s) => values.push(s.max(z)),
            None => {
                return Err(match first_passage(v, space, &up[i + 1], eps_d) {
                    Some(s) => MatchFailure::NotOneLipschitz { t: ut[i], dz: s - z, dt },
                    None => MatchFailure::Unmatched { t: ut[i + 1] },
                })
            }
        }
    }
    let z = TimeReparam::new(ut.to_vec(), values).expect("matched times are finite");
    debug_assert!(check_one_lipschitz(&z, 2.0 * tol));
    let excess = RangeSample::of(u).excess_of(&RangeSample::of(v), space);
    if excess > eps_d {
        return Err(MatchFailure::RangeExcess { excess });
    }
    Ok(z)
}

pub fn match_reparam(u: &SampledCurve, v: &SampledCurve, space: &MetricSpace, eps_d: f64) -> Option<TimeReparam> {
    match_reparam_detailed(u, v, space, eps_d).ok()
}

/// `u ≻ v`: `u` is a slowed-down copy of `v`.
pub fn precedes(u: &SampledCurve, v: &SampledCurve, space: &MetricSpace, eps_d: f64) -> bool {
    match_reparam(u, v, space, eps_d).is_some()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiComparison {
    pub holds: bool,
    pub first_violation: Option<f64>,
    /// `max_t phi(u(t)) - phi(v(t))` over the merged grid.
    pub max_excess: f64,
}

/// Checks `phi(u(t)) <= phi(v(t)) + tol` on the merged grid, each curve held at its final value
/// beyond its horizon. The ranges must agree at `eps_d`.
pub fn psi_compare(p: &FlowProblem, u: &SampledCurve, v: &SampledCurve, tol: f64) -> Result<PsiComparison> {
    let (ru, rv) = (RangeSample::of(u), RangeSample::of(v));
    if !ru.matches(&rv, &p.space, p.eps_d) {
        return Err(Error::Precondition(format!(
            "ranges differ at eps_d = {}: excess {} / {}",
            p.eps_d,
            ru.excess_of(&rv, &p.space),
            rv.excess_of(&ru, &p.space)
        )));
    }
    let mut first_violation = None;
    let mut max_excess = f64::NEG_INFINITY;
    for t in merge_grids(u.times(), v.times()) {
        let diff = p.phi(&u.eval_clamped(t)) - p.phi(&v.eval_clamped(t));
        max_excess = max_excess.max(diff);
        if diff > tol && first_violation.is_none() {
            first_violation = Some(t);
        }
    }
    Ok(PsiComparison { holds: first_violation.is_none(), first_violation, max_excess })
}

/// A pair of times `s < t` with `u(s) = u(t)` at `eps_d` although `u` moves in between.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityViolation {
    pub s: f64,
    pub t: f64,
    /// Largest excursion from `u(s)` on `[s, t]`.
    pub excursion: f64,
}

/// Checks on the grid that `u(s) = u(t)` forces `u` to be constant on `[s, t]`, all at `eps_d`.
pub fn stationarity_check(c: &SampledCurve, space: &MetricSpace, eps_d: f64) -> Option<StationarityViolation> {
    let (t, p) = (c.times(), c.points());
    for i in 0..c.len() {
        let mut excursion: f64 = 0.0;
        for j in i + 1..c.len() {
            let d = space.distance(&p[i], &p[j]);
            if d <= eps_d && excursion > eps_d {
                return Some(StationarityViolation { s: t[i], t: t[j], excursion });
            }
            excursion = excursion.max(d);
        }
    }
    None
}
