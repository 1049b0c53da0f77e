//! Membership in the solution class: the dissipation residual of an exact gradient-flow
//! trajectory, of the same path run backwards, the upper-gradient inequality and the Gronwall
//! bound.
//!
//! `cargo run --example dissipation_checks`

use lambdaflow::dissipation::{gronwall_bound, is_solution, phi_continuity_check, sug_check};
use lambdaflow::metric::{uniform_grid, Point, SampledCurve};
use lambdaflow::problems::quadratic_scenario;

pub fn run() -> lambdaflow::Result<()> {
    let s = quadratic_scenario(1)?;
    let p = &s.problem;
    let exact = s.solution("x0=1").expect("quadratic family has x0=1");

    let (ok, report) = is_solution(p, exact, None)?;
    println!(
        "e^-t: solution {ok}, max residual {:.2e} (tolerance {:.2e}), equality case {}",
        report.max_residual, report.tolerance, report.maximal_slope_tight
    );

    let backwards = SampledCurve::from_fn(uniform_grid(1.0, 1e-3), |t| Point::scalar((t - 1.0).exp()))?;
    let (ok, report) = is_solution(p, &backwards, None)?;
    println!("e^(t-1): solution {ok}, worst pair {:?} with residual {:.3}", report.worst_pair, report.max_residual);

    let sug = sug_check(p, exact, 1e-9)?;
    println!("upper-gradient inequality holds: {} (violation {:.1e})", sug.passed, sug.max_violation);
    let cont = phi_continuity_check(p, exact, 1e-12)?;
    println!("energy continuity modulus C = {:.4}, passed {}", cont.constant, cont.passed);
    let gron = gronwall_bound(p, exact, exact.horizon())?;
    println!("Gronwall bound passed {}, worst ratio {:.4}, margin {:.4}", gron.passed, gron.max_ratio, gron.margin);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
