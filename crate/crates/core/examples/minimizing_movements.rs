//! Implicit time stepping `x_{k+1} ∈ argmin phi(y) + d²(y, x_k) / 2τ`, its first-order
//! convergence to the exact flow, and the stationary start of the non-unique degenerate flow.
//!
//! `cargo run --example minimizing_movements`

use lambdaflow::dissipation::is_solution;
use lambdaflow::metric::Point;
use lambdaflow::mm::{mm_convergence_study, mm_curve, mm_step, MmConfig};
use lambdaflow::problems::{degenerate_power_scenario, quadratic_scenario, x_tau};

pub fn run() -> lambdaflow::Result<()> {
    let q = quadratic_scenario(1)?;
    let cfg = MmConfig::new(4e-3, 1.0, Point::scalar(1.0));
    let table = mm_convergence_study(&q.problem, &cfg, 3, &|t| Point::scalar((-t).exp()))?;
    println!("quadratic, x0 = 1");
    for (tau, err) in table.taus.iter().zip(&table.errors) {
        println!("  tau {tau:.1e}  sup error {err:.3e}");
    }
    println!("  error ratios {:?}", table.ratios);

    let d = degenerate_power_scenario(&[0.0], 1.0)?;
    let step = mm_step(&d.problem, &Point::scalar(0.0), 1e-2)?;
    // the scheme picks the departing branch, not the rest at the equilibrium
    println!("degenerate flow from its equilibrium leaves it: {} (first step to {:.2e})", !step.stationary, step.point.x());
    let start = Point::scalar(x_tau(0.0, 0.2));
    let curve = mm_curve(&d.problem, &MmConfig::new(1e-3, 0.8, start))?;
    let exact = x_tau(0.0, 1.0);
    println!("degenerate flow from x_0(0.2): end {:.5} vs exact {:.5}", curve.last().x(), exact);
    println!("scheme output is a solution: {}", is_solution(&d.problem, &curve, None)?.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
