//! Translation, concatenation and truncation of solutions, and closure of minimality under the
//! first two.
//!
//! `cargo run --example solution_algebra`

use lambdaflow::dissipation::is_solution;
use lambdaflow::error::Error;
use lambdaflow::metric::{rho, Point, SampledCurve};
use lambdaflow::order::{concatenate, is_minimal, translate, truncate};
use lambdaflow::problems::degenerate_power_scenario;

pub fn run() -> lambdaflow::Result<()> {
    let s = degenerate_power_scenario(&[0.0], 2.0)?;
    let p = &s.problem;
    let x0 = s.solution("tau=0").expect("member");

    let shifted = translate(x0, 0.3)?;
    println!("translate by 0.3: horizon {}, verdict {:?}", shifted.horizon(), is_minimal(p, &shifted, None)?.verdict);

    let head = x0.restrict(1.0)?;
    let tail = translate(x0, 1.0)?;
    let joined = concatenate(&head, &tail, 1.0, &p.space, p.eps_d)?;
    println!("concatenation reproduces x_0: {:.1e} apart", joined.sup_distance(x0, &p.space));
    println!("and is minimal: {:?}", is_minimal(p, &joined, None)?.verdict);

    let far = SampledCurve::constant(Point::scalar(5.0), 1.0)?;
    if let Err(Error::ConcatenationGap { gap, .. }) = concatenate(x0, &far, 1.0, &p.space, p.eps_d) {
        println!("cannot glue across a gap of {gap:.3}");
    }

    let cut = truncate(x0, 0.5)?;
    // frozen away from a critical point, so the dissipation balance breaks at the cut
    println!(
        "truncated at 0.5: freeze time {:.3}, solution {}",
        rho(&cut, &p.space, p.eps_d),
        is_solution(p, &cut, None)?.0
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
