//! Phase-space and curve primitives.

mod curve;
mod point;
mod reparam;

pub use curve::{merge_grids, uniform_grid, SampledCurve};
pub use point::{MetricSpace, Point};
pub use reparam::TimeReparam;

use crate::error::{Error, Result};

/// Per-interval chord speeds `d(p_i, p_{i+1}) / (t_{i+1} - t_i)`.
pub fn metric_speed(c: &SampledCurve, space: &MetricSpace) -> Vec<f64> {
    let (t, p) = (c.times(), c.points());
    (0..c.len() - 1)
        .map(|i| space.distance(&p[i], &p[i + 1]) / (t[i + 1] - t[i]))
        .collect()
}

/// Cumulative chord length sampled on the curve grid. Monotone, but not 1-Lipschitz in general.
pub fn arc_length(c: &SampledCurve, space: &MetricSpace) -> TimeReparam {
    let p = c.points();
    let mut values = Vec::with_capacity(c.len());
    let mut acc = 0.0;
    values.push(0.0);
    for i in 0..c.len() - 1 {
        acc += space.distance(&p[i], &p[i + 1]);
        values.push(acc);
    }
    TimeReparam::new(c.times().to_vec(), values).expect("curve grid is a valid reparam grid")
}

/// Freeze time: the smallest grid time `s` with `d(c(t), c(s)) <= eps_d` for every grid `t >= s`.
/// Equals the horizon when the curve never freezes before it.
pub fn t_star(c: &SampledCurve, space: &MetricSpace, eps_d: f64) -> f64 {
    let p = c.points();
    let last = c.last();
    for i in 0..c.len() {
        if space.distance(&p[i], last) > eps_d {
            continue;
        }
        if p[i + 1..].iter().all(|q| space.distance(&p[i], q) <= eps_d) {
            return c.times()[i];
        }
    }
    c.horizon()
}

/// Freeze time of a truncated curve; the same computation as [`t_star`].
pub fn rho(c: &SampledCurve, space: &MetricSpace, eps_d: f64) -> f64 {
    t_star(c, space, eps_d)
}

/// Left-most time `t` with `m(t) >= query` (right-continuous generalized inverse).
pub fn monotone_inverse(m: &TimeReparam, query: f64) -> Result<f64> {
    let (g, v) = (m.grid(), m.values());
    if !(v[0]..=m.final_value()).contains(&query) {
        return Err(Error::Domain(format!(
            "query {query} outside [{}, {}]",
            v[0],
            m.final_value()
        )));
    }
    let i = v.partition_point(|&x| x < query);
    if i == 0 {
        return Ok(g[0]);
    }
    if v[i] == query {
        return Ok(g[i]);
    }
    Ok(g[i - 1] + (query - v[i - 1]) / (v[i] - v[i - 1]) * (g[i] - g[i - 1]))
}

/// Every increment lies in `[-tol, dt + tol]`.
pub fn check_one_lipschitz(m: &TimeReparam, tol: f64) -> bool {
    let (g, v) = (m.grid(), m.values());
    (0..m.len() - 1).all(|i| {
        let dz = v[i + 1] - v[i];
        dz >= -tol && dz <= g[i + 1] - g[i] + tol
    })
}

/// The visited range of a curve in traversal order, with its closure point.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeSample {
    pub trace: Vec<Point>,
    pub limit: Option<Point>,
}

impl RangeSample {
    /// The range of `c`; the final node stands in for the limit point.
    pub fn of(c: &SampledCurve) -> Self {
        RangeSample { trace: c.points().to_vec(), limit: Some(c.last().clone()) }
    }

    /// Distance from `x` to the polyline through the trace (plus the limit point).
    pub fn distance_to(&self, space: &MetricSpace, x: &Point) -> f64 {
        let mut best = self.limit.as_ref().map_or(f64::INFINITY, |l| space.distance(l, x));
        if self.trace.len() == 1 {
            return best.min(space.distance(&self.trace[0], x));
        }
        if space.dim() == 1 {
            // a continuous 1-D path covers exactly the interval between its extremes
            let (lo, hi) = self.bounds_1d();
            return best.min((lo - x.x()).max(x.x() - hi).max(0.0));
        }
        for w in self.trace.windows(2) {
            best = best.min(space.segment_projection(&w[0], &w[1], x).0);
        }
        best
    }

    /// Largest distance from a point of `other`'s trace to this range.
    pub fn excess_of(&self, other: &RangeSample, space: &MetricSpace) -> f64 {
        other.trace.iter().map(|x| self.distance_to(space, x)).fold(0.0, f64::max)
    }

    /// Two-sided check: each trace lies within `eps_d` of the other range.
    pub fn matches(&self, other: &RangeSample, space: &MetricSpace, eps_d: f64) -> bool {
        self.excess_of(other, space) <= eps_d && other.excess_of(self, space) <= eps_d
    }

    fn bounds_1d(&self) -> (f64, f64) {
        self.trace
            .iter()
            .map(Point::x)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn sp1() -> MetricSpace {
        MetricSpace::euclidean(1)
    }

    fn exp_curve(dt: f64, horizon: f64) -> SampledCurve {
        SampledCurve::from_fn(uniform_grid(horizon, dt), |t| Point::scalar((-t).exp())).unwrap()
    }

    fn frozen_after_one() -> SampledCurve {
        SampledCurve::from_fn(uniform_grid(2.0, 0.01), |t| Point::scalar(t.min(1.0))).unwrap()
    }

    #[test]
    fn speed_of_unit_line_and_constant() {
        let line = SampledCurve::from_fn(vec![0.0, 1.0, 2.0], |t| Point::new(vec![t, 0.0]).unwrap()).unwrap();
        assert_eq!(metric_speed(&line, &MetricSpace::euclidean(2)), vec![1.0, 1.0]);
        let c = SampledCurve::constant(Point::scalar(4.0), 3.0).unwrap();
        assert!(metric_speed(&c, &sp1()).iter().all(|&s| s == 0.0));
    }

    #[test]
    fn speed_of_exponential() {
        let c = exp_curve(1e-3, 1.0);
        for (i, s) in metric_speed(&c, &sp1()).iter().enumerate() {
            assert!((s - (-c.times()[i]).exp()).abs() <= 1e-3);
        }
    }

    #[test]
    fn arc_length_examples() {
        let line = SampledCurve::from_fn(uniform_grid(2.0, 0.25), Point::scalar).unwrap();
        let x = arc_length(&line, &sp1());
        assert_eq!(x.values(), line.times());
        let c = SampledCurve::constant(Point::scalar(1.0), 2.0).unwrap();
        assert!(arc_length(&c, &sp1()).values().iter().all(|&v| v == 0.0));
        let x = arc_length(&exp_curve(1e-3, 1.0), &sp1());
        assert_abs_diff_eq!(x.final_value(), 1.0 - (-1.0f64).exp(), epsilon = 1e-3);
    }

    #[test]
    fn t_star_examples() {
        let c = SampledCurve::constant(Point::scalar(1.0), 2.0).unwrap();
        assert_eq!(t_star(&c, &sp1(), 1e-9), 0.0);
        assert_abs_diff_eq!(t_star(&frozen_after_one(), &sp1(), 1e-9), 1.0, epsilon = 1e-12);
        let moving = exp_curve(0.01, 1.0);
        assert_eq!(t_star(&moving, &sp1(), 1e-9), 1.0);
        assert_eq!(rho(&c, &sp1(), 1e-9), 0.0);
    }

    #[test]
    fn inverse_examples() {
        let id = TimeReparam::identity(uniform_grid(1.0, 0.1)).unwrap();
        assert_abs_diff_eq!(monotone_inverse(&id, 0.3).unwrap(), 0.3, epsilon = 1e-15);
        let plateau = TimeReparam::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(monotone_inverse(&plateau, 1.0).unwrap(), 1.0);
        let half = TimeReparam::from_fn(vec![0.0, 2.0], |t| t / 2.0).unwrap();
        assert_eq!(monotone_inverse(&half, 0.5).unwrap(), 1.0);
        assert!(matches!(monotone_inverse(&half, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn lipschitz_examples() {
        let g = uniform_grid(1.0, 0.05);
        assert!(check_one_lipschitz(&TimeReparam::identity(g.clone()).unwrap(), 1e-12));
        assert!(!check_one_lipschitz(&TimeReparam::from_fn(g.clone(), |t| 2.0 * t).unwrap(), 1e-12));
        assert!(check_one_lipschitz(&TimeReparam::from_fn(g, |t| (t - 0.5f64).max(0.0)).unwrap(), 1e-12));
    }

    #[test]
    fn range_distance_planar() {
        let c = SampledCurve::from_fn(vec![0.0, 1.0, 2.0], |t| {
            Point::new(vec![t.min(1.0), (t - 1.0).max(0.0)]).unwrap()
        })
        .unwrap();
        let r = RangeSample::of(&c);
        let sp = MetricSpace::euclidean(2);
        assert_abs_diff_eq!(r.distance_to(&sp, &Point::new(vec![0.5, -0.5]).unwrap()), 0.5, epsilon = 1e-15);
        assert_eq!(r.distance_to(&sp, &Point::new(vec![1.0, 0.5]).unwrap()), 0.0);
    }

    proptest! {
        #[test]
        fn arc_length_is_additive(xs in prop::collection::vec(-5.0f64..5.0, 3..40), cut in 1usize..38) {
            let n = xs.len();
            let cut = cut.min(n - 2);
            let grid: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
            let c = SampledCurve::new(grid.clone(), xs.iter().map(|&x| Point::scalar(x)).collect()).unwrap();
            let whole = arc_length(&c, &sp1());
            prop_assert!(whole.is_monotone(0.0));
            let head = SampledCurve::new(grid[..=cut].to_vec(), c.points()[..=cut].to_vec()).unwrap();
            let tail_grid: Vec<f64> = grid[cut..].iter().map(|t| t - grid[cut]).collect();
            let tail = SampledCurve::new(tail_grid, c.points()[cut..].to_vec()).unwrap();
            let sum = arc_length(&head, &sp1()).final_value() + arc_length(&tail, &sp1()).final_value();
            prop_assert!((whole.final_value() - sum).abs() <= 1e-12 * (1.0 + sum));
        }

        #[test]
        fn inverse_is_exact_on_strict_grid(incs in prop::collection::vec(0.01f64..2.0, 2..30), k in 0usize..30) {
            let grid: Vec<f64> = (0..=incs.len()).map(|i| i as f64 * 0.5).collect();
            let mut vals = vec![0.0];
            for d in &incs { vals.push(vals.last().unwrap() + d); }
            let m = TimeReparam::new(grid.clone(), vals.clone()).unwrap();
            let k = k.min(incs.len());
            prop_assert_eq!(monotone_inverse(&m, vals[k]).unwrap(), grid[k]);
        }

        #[test]
        fn reparametrized_speed_contracts(xs in prop::collection::vec(-3.0f64..3.0, 3..20), slopes in prop::collection::vec(0.0f64..1.0, 2..19)) {
            // c∘z with z 1-Lipschitz: chord speed of c∘z on [t_i, t_{i+1}] is at most the max
            // speed of c over the matched interval [z(t_i), z(t_{i+1})].
            let n = xs.len();
            let grid: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let c = SampledCurve::new(grid.clone(), xs.iter().map(|&x| Point::scalar(x)).collect()).unwrap();
            let mut z = vec![0.0];
            for i in 0..n - 1 { z.push(z[i] + slopes.get(i).copied().unwrap_or(0.5)); }
            let cz = SampledCurve::new(grid.clone(), z.iter().map(|&s| c.eval_clamped(s)).collect()).unwrap();
            let sc = metric_speed(&c, &sp1());
            let scz = metric_speed(&cz, &sp1());
            for i in 0..n - 1 {
                let lo = z[i].floor() as usize;
                let hi = (z[i + 1].ceil() as usize).min(n - 1).max(lo + 1);
                let bound = sc[lo..hi].iter().cloned().fold(0.0, f64::max);
                prop_assert!(scz[i] <= bound + 1e-9);
            }
        }
    }
}
