//! A solution whose energy decreases strictly at every step and which is still not minimal:
//! the minimal crossing of the middle-thirds set, slowed down by a singular time change that
//! spends positive time on the zero set of the slope.
//!
//! `cargo run --release --example cantor_dilation`

use lambdaflow::dissipation::is_solution;
use lambdaflow::order::{extract_minimal, is_minimal, precedes, singular_dilate};
use lambdaflow::problems::cantor_scenario;

pub fn run() -> lambdaflow::Result<()> {
    let s = cantor_scenario(6)?;
    let p = &s.problem;
    let setup = s.cantor.as_ref().expect("cantor scenario carries its construction");
    let w = &setup.w;
    let u = singular_dilate(w, &setup.dilation())?;
    println!("crossing time of [0, 1]: {:.6}; injected singular mass {:.6}", w.horizon(), setup.singular_mass());

    for (name, c) in [("w", w), ("u", &u)] {
        let (ok, edi) = is_solution(p, c, None)?;
        let phi = p.phi_along(c)?;
        let strict = phi.windows(2).all(|f| f[1] < f[0]);
        let m = is_minimal(p, c, None)?;
        println!(
            "{name}: horizon {:.4}, solution {ok} (residual {:.1e}), energy strictly decreasing {strict}, \
             critical time {:.4}, verdict {:?}",
            c.horizon(),
            edi.max_residual,
            m.critical_measure,
            m.verdict
        );
    }
    println!("u ≻ w: {}, w ≻ u: {}", precedes(&u, w, &p.space, p.eps_d), precedes(w, &u, &p.space, p.eps_d));
    let recovered = extract_minimal(p, &u)?;
    println!("extraction of u lies {:.1e} from w", recovered.curve.sup_distance(w, &p.space));
    Ok(())
}

#[allow(dead_code)]
fn main() -> lambdaflow::Result<()> {
    run()
}
