//! Minimality by critical dwell time, and the fastest representative of a solution's range
//! recovered by deleting the time spent at critical points.
//!
//! `cargo run --example plateau_deletion`

use lambdaflow::order::{extract_minimal, is_minimal};
use lambdaflow::problems::degenerate_power_scenario;

pub fn run() -> lambdaflow::Result<()> {
    let s = degenerate_power_scenario(&[0.0, 0.1, 0.25, 0.5], 2.0)?;
    let p = &s.problem;
    let reference = s.solution("tau=0").expect("member");
    for member in &s.solutions {
        let report = is_minimal(p, &member.curve, None)?;
        let e = extract_minimal(p, &member.curve)?;
        println!(
            "{:9} critical time {:.4}  verdict {:?}  extracted horizon {:.3}  distance to x_0 {:.1e}",
            member.label,
            report.critical_measure,
            report.verdict,
            e.curve.horizon(),
            e.curve.sup_distance(reference, &p.space),
        );
    }
    let slow = s.solution("tau=0.5").expect("member");
    let e = extract_minimal(p, slow)?;
    println!("z(0.3) = {:.3}, z(1.0) = {:.3}", e.reparam.eval(0.3)?, e.reparam.eval(1.0)?);
    let again = extract_minimal(p, &e.curve)?;
    println!("idempotent: {}", again.curve == e.curve);
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
