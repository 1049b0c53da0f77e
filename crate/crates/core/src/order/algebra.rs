use crate::error::{Error, Result};
use crate::metric::{MetricSpace, SampledCurve};

/// `t ↦ c(t + tau)` on `[0, horizon - tau]`; the nodes are the shifted nodes of `c` past `tau`.
pub fn translate(c: &SampledCurve, tau: f64) -> Result<SampledCurve> {
    if !(tau >= 0.0 && tau < c.horizon()) {
        return Err(Error::Domain(format!("shift {tau} outside [0, {})", c.horizon())));
    }
    if tau == 0.0 {
        return Ok(c.clone());
    }
    let c = c.with_node(tau)?;
    let start = c.times().partition_point(|&t| t < tau);
    let times = c.times()[start..].iter().map(|t| t - tau).collect();
    SampledCurve::new(times, c.points()[start..].to_vec())
}

/// `u` up to `t_bar`, followed by `v(· - t_bar)`. The junction point is `u(t_bar)`.
pub fn concatenate(
    u: &SampledCurve,
    v: &SampledCurve,
    t_bar: f64,
    space: &MetricSpace,
    eps_d: f64,
) -> Result<SampledCurve> {
    let join = u.interp(t_bar)?;
    let gap = space.distance(&join, v.first());
    if gap > eps_d {
        return Err(Error::ConcatenationGap { gap, eps_d });
    }
    if t_bar == 0.0 {
        return Ok(v.clone());
    }
    let head = u.restrict(t_bar)?;
    let (mut times, mut points) = head.into_parts();
    times.extend(v.times()[1..].iter().map(|t| t_bar + t));
    points.extend(v.points()[1..].iter().cloned());
    SampledCurve::new(times, points)
}

/// `c(t ∧ T)` on the grid of `c` (with `T` added as a node): frozen after `T`.
pub fn truncate(c: &SampledCurve, t_cut: f64) -> Result<SampledCurve> {
    if !(0.0..=c.horizon()).contains(&t_cut) {
        return Err(Error::Domain(format!("truncation time {t_cut} outside [0, {}]", c.horizon())));
    }
    let c = if t_cut > 0.0 { c.with_node(t_cut)? } else { c.clone() };
    let frozen = c.interp(t_cut)?;
    let points = c
        .times()
        .iter()
        .zip(c.points())
        .map(|(&t, p)| if t <= t_cut { p.clone() } else { frozen.clone() })
        .collect();
    SampledCurve::new(c.times().to_vec(), points)
}

/// `c` on `[0, T]`.
pub fn restrict(c: &SampledCurve, t_cut: f64) -> Result<SampledCurve> {
    c.restrict(t_cut)
}

/// `c` continued by its final value up to `horizon`.
pub fn extend_constant(c: &SampledCurve, horizon: f64) -> Result<SampledCurve> {
    if horizon < c.horizon() {
        return Err(Error::Domain(format!("extension horizon {horizon} below {}", c.horizon())));
    }
    if horizon == c.horizon() {
        return Ok(c.clone());
    }
    let (mut times, mut points) = c.clone().into_parts();
    times.push(horizon);
    points.push(c.last().clone());
    SampledCurve::new(times, points)
}
