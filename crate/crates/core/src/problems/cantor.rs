//! The middle-thirds scenario.
//!
//! The zero set of `g` is the endpoint set `E` of the level-`R` middle-thirds construction, with
//! `R = CANTOR_RESOLUTION`, and `g(x) = dist(x, E)^{1/4}`. Because `E` is finite, a curve can cross
//! it with strictly decreasing energy. The crossing time `t(x) = ∫₀ˣ ds / g(s)` and the energy
//! `phi(x) = -∫₀ˣ g(s) ds` are evaluated exactly through the self-similar structure of `E`:
//! on a gap of half-width `h` the integral of `dist^{e-1}` is `2 c h^e`, and a level-`j` interval
//! contributes `3^{-je}` times the normalized value `T(R - j)` with
//! `T(0) = 2c 2^{-e}`, `T(m) = 2·3^{-e} T(m-1) + 2c 6^{-e}`.
//!
//! The time integral converges because `1/4 < 1 - log 2 / log 3 ≈ 0.369`: the total time
//! `T(R)` is a geometric sum with ratio `2·3^{-3/4} ≈ 0.877`, bounded as `R` grows.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde_json::json;

use super::catalog::finish;
use super::{AnalyticSolution, FlowProblem, Scenario};
use crate::error::{Error, Result};
use crate::metric::{uniform_grid, MetricSpace, Point, SampledCurve, TimeReparam};

/// Resolution of the endpoint set used by the scenario's `g`.
pub const CANTOR_RESOLUTION: usize = 24;

/// Level at which the dilation's crossing intervals are taken (each is the left-most level-22
/// sub-interval of a level-`depth` interval).
const CROSSING_LEVEL: usize = 22;

#[derive(Clone, Debug)]
struct SelfSimilarIntegral {
    c: f64,
    e: f64,
    /// `full[j]`: integral over one level-`j` interval.
    full: Vec<f64>,
    /// `gap[j]`: integral over one level-`j` gap.
    gap: Vec<f64>,
    leaf_half: f64,
}

impl SelfSimilarIntegral {
    fn new(c: f64, e: f64, p: &[f64]) -> Self {
        let res = p.len() - 1;
        let mut normalized = vec![2.0 * c * 0.5f64.powf(e)];
        for m in 1..=res {
            let prev = normalized[m - 1];
            normalized.push(2.0 * 3f64.powf(-e) * prev + 2.0 * c * (1.0f64 / 6.0).powf(e));
        }
        let full = (0..=res).map(|j| p[j].powf(e) * normalized[res - j]).collect();
        let gap = (0..=res).map(|j| 2.0 * c * (p[j] / 2.0).powf(e)).collect();
        SelfSimilarIntegral { c, e, full, gap, leaf_half: c * (p[res] / 2.0).powf(e) }
    }
}

/// Endpoint geometry at a fixed resolution.
#[derive(Clone, Debug)]
pub struct CantorGeometry {
    /// `p[j] = 3^{-j}`.
    p: Vec<f64>,
    time: SelfSimilarIntegral,
    energy: SelfSimilarIntegral,
}

impl CantorGeometry {
    pub fn new(resolution: usize) -> Self {
        assert!(resolution >= 1, "resolution must be positive");
        let mut p = vec![1.0];
        for j in 1..=resolution {
            p.push(p[j - 1] / 3.0);
        }
        let time = SelfSimilarIntegral::new(4.0 / 3.0, 0.75, &p);
        let energy = SelfSimilarIntegral::new(0.8, 1.25, &p);
        CantorGeometry { p, time, energy }
    }

    pub fn resolution(&self) -> usize {
        self.p.len() - 1
    }

    /// Length of a level-`j` interval.
    pub fn scale(&self, level: usize) -> f64 {
        self.p[level]
    }

    /// Descends to the nearest level-`R` interval; returns its left end and the accumulated
    /// integral of `integrand` over `[0, left end]`.
    fn descend(&self, x: f64, integrand: Option<&SelfSimilarIntegral>) -> (f64, f64) {
        let mut lo = 0.0;
        let mut acc = 0.0;
        for j in 1..=self.resolution() {
            let pj = self.p[j];
            if x > lo + 1.5 * pj {
                if let Some(f) = integrand {
                    acc += f.full[j] + f.gap[j];
                }
                lo += 2.0 * pj;
            }
        }
        (lo, acc)
    }

    /// Distance from `x` to the endpoint set.
    pub fn dist(&self, x: f64) -> f64 {
        let (a, _) = self.descend(x, None);
        let b = a + self.p[self.resolution()];
        (x - a).abs().min((x - b).abs())
    }

    pub fn g(&self, x: f64) -> f64 {
        self.dist(x).powf(0.25)
    }

    fn integral(&self, x: f64, f: &SelfSimilarIntegral) -> f64 {
        let (a, acc) = self.descend(x, Some(f));
        let b = a + self.p[self.resolution()];
        let leaf = if x <= a {
            -f.c * (a - x).powf(f.e)
        } else if x - a <= b - x {
            f.c * (x - a).powf(f.e)
        } else if x <= b {
            2.0 * f.leaf_half - f.c * (b - x).powf(f.e)
        } else {
            2.0 * f.leaf_half + f.c * (x - b).powf(f.e)
        };
        acc + leaf
    }

    /// `∫₀ˣ ds / g(s)`.
    pub fn crossing_time(&self, x: f64) -> f64 {
        self.integral(x, &self.time)
    }

    /// `phi(x) = -∫₀ˣ g(s) ds`.
    pub fn energy(&self, x: f64) -> f64 {
        -self.integral(x, &self.energy)
    }

    /// The `x` in `[0, 1]` with `crossing_time(x) = s`, by bisection.
    pub fn inverse_crossing_time(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.crossing_time(1.0) {
            return 1.0;
        }
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.crossing_time(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if s - self.crossing_time(lo) <= self.crossing_time(hi) - s {
            lo
        } else {
            hi
        }
    }

    /// Endpoint reached by taking the right child at the levels where `path` is true (levels
    /// beyond the path go left), then the right end of the leaf if `right_end`. Evaluated in the
    /// same order as the descent, so `dist` vanishes exactly at the result.
    pub fn canonical_point(&self, path: &[bool], right_end: bool) -> f64 {
        assert!(path.len() <= self.resolution());
        let mut lo = 0.0;
        for (j, &right) in path.iter().enumerate() {
            if right {
                lo += 2.0 * self.p[j + 1];
            }
        }
        if right_end {
            lo + self.p[self.resolution()]
        } else {
            lo
        }
    }

    /// `(a, b)`: the left end of the `k`-th level-`level` interval and the right end of its
    /// left-most level-`sub_level` sub-interval.
    fn sub_interval(&self, level: usize, k: usize, sub_level: usize) -> (f64, f64) {
        let res = self.resolution();
        let mut path: Vec<bool> = (0..level).map(|j| (k >> (level - 1 - j)) & 1 == 1).collect();
        let a = self.canonical_point(&path, false);
        path.resize(sub_level, false);
        path.resize(res, true);
        (a, self.canonical_point(&path, true))
    }
}

/// Crossing time `t(x)` with the endpoint set truncated at `depth`; increasing in `depth` and
/// bounded, the oracle for convergence of the scenario's time integral.
pub fn crossing_time_truncated(x: f64, depth: usize) -> f64 {
    CantorGeometry::new(depth).crossing_time(x)
}

/// Depth-truncated devil's staircase: exact on removed gaps up to `depth`, linear on the
/// remaining level-`depth` intervals.
pub fn cantor_function(x: f64, depth: u32) -> f64 {
    let x = x.clamp(0.0, 1.0);
    let mut lo = 0.0;
    let mut p = 1.0;
    let mut value = 0.0;
    let mut weight = 0.5;
    for _ in 0..depth {
        p /= 3.0;
        if x <= lo + p {
            // left child
        } else if x < lo + 2.0 * p {
            return value + weight;
        } else {
            value += weight;
            lo += 2.0 * p;
        }
        weight *= 0.5;
    }
    value + 2.0 * weight * ((x - lo) / p).clamp(0.0, 1.0)
}

/// The minimal crossing curve of the scenario and the data for its singular dilation.
#[derive(Clone, Debug)]
pub struct CantorSetup {
    pub depth: u32,
    pub geometry: Arc<CantorGeometry>,
    /// Minimal solution `w(s) = t⁻¹(s)` on `[0, t(1)]`.
    pub w: SampledCurve,
    /// Index pairs `(i, i + 1)` of `w` spanning the crossing of each level-`depth` interval's
    /// left-most level-22 sub-interval, one per interval, left to right.
    pub crossings: Vec<(usize, usize)>,
}

impl CantorSetup {
    /// Singular mass injected by [`dilation`](Self::dilation): the horizon of `w`.
    pub fn singular_mass(&self) -> f64 {
        self.w.horizon()
    }

    /// `beta(s) = s + M F(s)` on the grid of `w`, where `F` is the depth-`n` Cantor measure of
    /// `[0, w(s)]` concentrated on the crossing intervals: it jumps by the Cantor-function
    /// increment of each level-`n` interval across that interval's crossing.
    pub fn dilation(&self) -> TimeReparam {
        let mass = self.singular_mass();
        let n = self.depth;
        let grid = self.w.times().to_vec();
        let mut values = Vec::with_capacity(grid.len());
        let mut next = 0;
        let mut f = 0.0;
        for (i, &s) in grid.iter().enumerate() {
            if next < self.crossings.len() && self.crossings[next].1 == i {
                let (a, b) = (self.w.points()[self.crossings[next].0].x(), self.w.points()[i].x());
                let level = self.geometry.scale(n as usize);
                // C_n rises by 2^{-n} across the level-n interval containing [a, b]
                f += cantor_function(a + level, n) - cantor_function(a, n);
                debug_assert!(b - a < level);
                next += 1;
            }
            values.push(s + mass * f);
        }
        TimeReparam::new(grid, values).expect("dilation of a valid grid")
    }
}

/// The middle-thirds scenario at Cantor depth `depth` with time step `1e-3`.
pub fn cantor_scenario(depth: u32) -> Result<Scenario> {
    cantor_scenario_with(depth, 1e-3)
}

/// Distance resolution of the Cantor scenario.
pub const CANTOR_EPS_D: f64 = 1e-13;

pub(super) fn cantor_scenario_with(depth: u32, ds: f64) -> Result<Scenario> {
    if !(1..=20).contains(&depth) {
        return Err(Error::Config(format!("cantor depth {depth} outside 1..=20")));
    }
    if !(ds > 0.0 && ds < 0.1) {
        return Err(Error::Config(format!("cantor time step {ds} outside (0, 0.1)")));
    }
    let geometry = Arc::new(CantorGeometry::new(CANTOR_RESOLUTION));
    let horizon = geometry.crossing_time(1.0);

    let mut inserted: Vec<(f64, f64)> = Vec::with_capacity(2 << depth);
    for k in 0..(1usize << depth) {
        let (a, b) = geometry.sub_interval(depth as usize, k, CROSSING_LEVEL);
        inserted.push((geometry.crossing_time(a), a));
        inserted.push((geometry.crossing_time(b), b));
    }
    let mut nodes: Vec<(f64, f64)> = inserted.clone();
    let mut j = 0;
    for s in uniform_grid(horizon, ds) {
        while j + 1 < inserted.len() && inserted[j + 1].0 <= s {
            j += 1;
        }
        let near = |k: usize| inserted.get(k).is_some_and(|&(t, _)| (t - s).abs() < ds / 2.0);
        if s == horizon {
            nodes.push((s, 1.0));
        } else if !(near(j) || near(j + 1)) {
            nodes.push((s, geometry.inverse_crossing_time(s)));
        }
    }
    nodes.sort_by(|l, r| l.0.total_cmp(&r.0));
    nodes.dedup_by(|l, r| l.0 == r.0);

    let crossings = inserted
        .chunks(2)
        .map(|pair| {
            let i = nodes.partition_point(|n| n.0 < pair[0].0);
            debug_assert_eq!(nodes[i + 1].0, pair[1].0);
            (i, i + 1)
        })
        .collect();
    let (times, xs): (Vec<f64>, Vec<f64>) = nodes.into_iter().unzip();
    let w = SampledCurve::new(times, xs.into_iter().map(Point::scalar).collect())?;

    let (ge, gg) = (geometry.clone(), geometry.clone());
    let problem = FlowProblem::new(
        MetricSpace::euclidean(1),
        Arc::new(move |x: &Point| ge.energy(x.x())),
        Arc::new(move |x: &Point| gg.g(x.x())),
    );
    let solutions = vec![AnalyticSolution { label: "w".into(), curve: w.clone() }];
    // crossing pairs sit 3^-22 apart, so distances are resolved far below the default
    let problem = finish(problem, &solutions)?;
    let problem = { let eps_g = problem.eps_g; problem.with_thresholds(eps_g, CANTOR_EPS_D) };
    let setup = CantorSetup { depth, geometry, w, crossings };
    Ok(Scenario {
        name: "cantor".into(),
        problem,
        params: BTreeMap::from([("depth".into(), json!(depth)), ("ds".into(), json!(ds))]),
        solutions,
        default_x0: Point::scalar(0.0),
        exact: None,
        cantor: Some(Arc::new(setup)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `∫₀ˣ dist^{-1/4}` summed panel by panel over the explicit sorted endpoint list. On a
    /// panel `[a, b]` the distance is `min(s - a, b - s)`, integrated exactly half by half.
    fn panel_crossing_time(x: f64, depth: usize) -> f64 {
        let g = CantorGeometry::new(depth);
        let mut ends = Vec::new();
        for k in 0..(1usize << depth) {
            let path: Vec<bool> = (0..depth).map(|j| (k >> (depth - 1 - j)) & 1 == 1).collect();
            ends.push(g.canonical_point(&path, false));
            ends.push(g.canonical_point(&path, true));
        }
        ends.sort_by(f64::total_cmp);
        let prim = |y: f64| 4.0 / 3.0 * y.powf(0.75);
        let mut total = 0.0;
        for w in ends.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= x {
                break;
            }
            let m = 0.5 * (a + b);
            let y = x.min(b);
            total += if y <= m { prim(y - a) } else { 2.0 * prim(m - a) - prim(b - y) };
        }
        total
    }

    #[test]
    fn gradient_values() {
        let g = CantorGeometry::new(CANTOR_RESOLUTION);
        assert_abs_diff_eq!(g.g(0.5), (1.0f64 / 6.0).powf(0.25), epsilon = 1e-15);
        assert_abs_diff_eq!(g.g(0.5), 0.6389, epsilon = 1e-4);
        for depth in [1usize, 3, 6] {
            for k in 0..(1usize << depth) {
                let path: Vec<bool> = (0..depth).map(|j| (k >> (depth - 1 - j)) & 1 == 1).collect();
                let mut full = path.clone();
                full.resize(CANTOR_RESOLUTION, true);
                assert_eq!(g.g(g.canonical_point(&path, false)), 0.0);
                assert_eq!(g.g(g.canonical_point(&full, true)), 0.0);
            }
        }
    }

    #[test]
    fn crossing_time_matches_panel_quadrature() {
        for depth in [1usize, 2, 4] {
            for x in [0.2, 0.5, 0.77, 1.0] {
                assert_abs_diff_eq!(
                    crossing_time_truncated(x, depth),
                    panel_crossing_time(x, depth),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn crossing_time_converges_monotonically() {
        let seq: Vec<f64> = (1..=CANTOR_RESOLUTION).map(|d| crossing_time_truncated(1.0, d)).collect();
        assert!(seq.windows(2).all(|w| w[1] > w[0]));
        let limit = 2.0 * (4.0 / 3.0) * (1.0f64 / 6.0).powf(0.75) / (1.0 - 2.0 * 3f64.powf(-0.75));
        assert!(seq.iter().all(|&t| t < limit + 2.0 * (4.0 / 3.0) * 0.5f64.powf(0.75)));
        assert!(seq[CANTOR_RESOLUTION - 1] - seq[CANTOR_RESOLUTION - 2] < 0.15);
    }

    #[test]
    fn energy_is_antiderivative_of_gradient() {
        let g = CantorGeometry::new(CANTOR_RESOLUTION);
        for x in [0.2, 0.4, 0.5, 0.85] {
            let h = 1e-6;
            let slope = (g.energy(x + h) - g.energy(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(slope, -g.g(x), epsilon = 1e-6);
            let slope = (g.crossing_time(x + h) - g.crossing_time(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(slope, 1.0 / g.g(x), epsilon = 1e-5);
        }
    }

    #[test]
    fn inverse_crossing_time_round_trips() {
        let g = CantorGeometry::new(CANTOR_RESOLUTION);
        for x in [0.0, 0.05, 0.3333, 0.5, 0.999, 1.0] {
            let s = g.crossing_time(x);
            assert_abs_diff_eq!(g.inverse_crossing_time(s), x, epsilon = 1e-12);
        }
    }

    #[test]
    fn staircase_values() {
        for depth in [1, 5, 12] {
            assert_eq!(cantor_function(0.0, depth), 0.0);
            assert_eq!(cantor_function(1.0, depth), 1.0);
            assert_abs_diff_eq!(cantor_function(1.0 / 3.0, depth), 0.5, epsilon = 1e-15);
            assert!((cantor_function(0.25, depth) - 1.0 / 3.0).abs() <= 0.5f64.powi(depth as i32));
        }
    }

    #[test]
    fn staircase_is_monotone() {
        let xs: Vec<f64> = (0..=3000).map(|i| i as f64 / 3000.0).collect();
        for depth in [1, 4, 9] {
            assert!(xs.windows(2).all(|w| cantor_function(w[1], depth) >= cantor_function(w[0], depth)));
        }
    }

    #[test]
    fn scenario_structure() {
        let s = cantor_scenario(3).unwrap();
        let setup = s.cantor.as_ref().unwrap();
        assert_eq!(setup.crossings.len(), 8);
        let w = &setup.w;
        assert_eq!(w.last().x(), 1.0);
        for &(i, j) in &setup.crossings {
            assert_eq!(s.problem.g(&w.points()[i]), 0.0);
            assert_eq!(s.problem.g(&w.points()[j]), 0.0);
            assert!(s.problem.phi(&w.points()[j]) < s.problem.phi(&w.points()[i]));
        }
        let beta = setup.dilation();
        assert_abs_diff_eq!(beta.final_value() - w.horizon(), setup.singular_mass(), epsilon = 1e-9);
        assert!(matches!(cantor_scenario(0), Err(Error::Config(_))));
        assert!(matches!(cantor_scenario(21), Err(Error::Config(_))));
    }
}
