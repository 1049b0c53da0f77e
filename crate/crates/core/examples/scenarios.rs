//! The built-in scenarios, configured by name and parameters, and the sampled local slope
//! compared with the slope function each scenario uses.
//!
//! `cargo run --example scenarios`

use lambdaflow::metric::Point;
use lambdaflow::problems::{local_slope_estimate, ScenarioConfig, SCENARIO_NAMES};

pub fn run() -> lambdaflow::Result<()> {
    for name in SCENARIO_NAMES {
        let cfg = if name == "cantor" { ScenarioConfig::named(name).with_param("depth", 3) } else { ScenarioConfig::named(name) };
        let s = cfg.build()?;
        let labels: Vec<&str> = s.solutions.iter().map(|m| m.label.as_str()).collect();
        println!("{name}: eps_g {:.1e}, eps_d {:.1e}, members {labels:?}", s.problem.eps_g, s.problem.eps_d);
        let x = Point::scalar(0.5);
        let est = local_slope_estimate(&s.problem, &x, &[1e-2, 1e-3, 1e-4])?;
        println!("  slope at 0.5: sampled {:.5}, g {:.5}", est.value, s.problem.g(&x));
    }
    let bad = ScenarioConfig::named("quadratic").with_param("dimension", 2).build();
    println!("unknown parameter rejected: {}", bad.is_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
