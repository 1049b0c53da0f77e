//! Seeded property suites over a scenario family, and replay of a stored counterexample.
//!
//! `cargo run --release --example axiom_suite`

use lambdaflow::harness::{adversarial_family, run_adversarial, run_scenario_suite, HarnessContext};
use lambdaflow::problems::ScenarioConfig;

pub fn run() -> lambdaflow::Result<()> {
    let s = ScenarioConfig::named("degenerate-power").build()?;
    let result = run_scenario_suite(&s, 20, 0)?;
    for (name, sub) in &result.subtests {
        println!("{name:34} passed {:3} failed {:2} skipped {:3}{}", sub.passed, sub.failed, sub.skipped, if sub.expect_failure { "  (adversarial)" } else { "" });
    }
    println!("all sub-tests ok: {}", result.all_ok());

    let adversarial = run_adversarial(0)?;
    let (p, members) = adversarial_family(2.0 * std::f64::consts::PI + 1.0)?;
    let ctx = HarnessContext::new(&p, &members);
    let ce = &adversarial.subtests["adversarial/H3-stationarity"].counterexamples[0];
    println!("stored counterexample: {}", serde_json::to_string(&ce.check)?);
    println!("  {}", ce.detail);
    println!("  replays: {}", ctx.replay(ce));
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
