//! The order `u ≻ v` ("u is v slowed down") with its witness map, the energy comparison that
//! comes with it, and the stationarity test that rules out periodic motion.
//!
//! `cargo run --example reparametrization_order`

use lambdaflow::metric::{MetricSpace, Point, SampledCurve};
use lambdaflow::order::{match_reparam_detailed, precedes, psi_compare, stationarity_check};
use lambdaflow::problems::degenerate_power_scenario;

pub fn run() -> lambdaflow::Result<()> {
    let s = degenerate_power_scenario(&[0.0, 0.5], 2.0)?;
    let (p, eps) = (&s.problem, s.problem.eps_d);
    let fast = s.solution("tau=0").expect("member");
    let slow = s.solution("tau=0.5").expect("member");

    let z = match_reparam_detailed(slow, fast, &p.space, eps).expect("the waiting curve is slower");
    let dev = z.sup_error(|t| (t - 0.5).max(0.0));
    println!("x_0.5 ≻ x_0 with witness (t - 0.5)+ up to {dev:.1e}");
    match match_reparam_detailed(fast, slow, &p.space, eps) {
        Ok(_) => println!("unexpected: x_0 ≻ x_0.5"),
        Err(why) => println!("x_0 ≻ x_0.5 fails: {why:?}"),
    }
    println!("reflexive: {}", precedes(slow, slow, &p.space, eps));

    let energy = psi_compare(p, fast, slow, 1e-12)?;
    println!("phi(x_0(t)) <= phi(x_0.5(t)) everywhere: {}", energy.holds);

    let space = MetricSpace::euclidean(2);
    let dt = 2.0 * std::f64::consts::PI / 400.0;
    let grid: Vec<f64> = (0..500).map(|k| k as f64 * dt).collect();
    let circle = SampledCurve::from_fn(grid, |t| Point::new(vec![t.cos(), t.sin()]).unwrap())?;
    if let Some(v) = stationarity_check(&circle, &space, 1e-9) {
        println!("circle returns at t = {:.4} to its value at s = {} without resting", v.t, v.s);
    }
    println!("waiting curve passes the stationarity test: {}", stationarity_check(slow, &p.space, eps).is_none());
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
