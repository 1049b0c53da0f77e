//! Sampled curves, their metric speed and arc length, the generalized inverse of a monotone
//! map, and the JSON curve format.
//!
//! `cargo run --example sampled_curves`

use lambdaflow::io::{read_json, write_json};
use lambdaflow::metric::{
    arc_length, metric_speed, monotone_inverse, t_star, uniform_grid, MetricSpace, Point, SampledCurve,
};

pub fn run() -> lambdaflow::Result<()> {
    let space = MetricSpace::euclidean(2);
    // a quarter circle, then a rest
    let curve = SampledCurve::from_fn(uniform_grid(2.0, 0.01), |t| {
        let a = t.min(1.0) * std::f64::consts::FRAC_PI_2;
        Point::new(vec![a.cos(), a.sin()]).unwrap()
    })?;
    let speed = metric_speed(&curve, &space);
    println!("nodes {}, speed on the arc {:.6}, at rest {:.1}", curve.len(), speed[0], speed[150]);

    let length = arc_length(&curve, &space);
    println!("arc length {:.6} (exact {:.6})", length.final_value(), std::f64::consts::FRAC_PI_2);

    // left-most time at which half the length has been covered
    let half = monotone_inverse(&length, 0.5 * length.final_value())?;
    println!("half the length after t = {half:.4}");
    println!("freeze time {:.4}", t_star(&curve, &space, 1e-9));

    let dir = std::env::temp_dir().join("lambdaflow-sampled-curves");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("quarter.json");
    write_json(&path, &curve)?;
    let back: SampledCurve = read_json(&path)?;
    println!("JSON round trip exact: {}", back == curve);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
