//! The odd pseudo-gradient flow as a globaliser: it contracts errors
//! transverse to the branch ray (where the sign-flipped gradient is a
//! descent direction), so a strongly perturbed init flows back toward the
//! saddle before Newton takes over.
//!
//! Along the amplitude ray itself the stationary state is a maximum of the
//! action, so the flow deliberately runs away from overshoots; that is what
//! the divergence guard is for.
//!
//! Run:
//!   cargo run --example saddle_flow_descent --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::{residual, ProblemParams, SpinorState};
use diracdisk::solver::{branch_init, newton_solve, saddle_flow, SolverOptions};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn main() {
    let basis = build_basis(
        Domain::unit(),
        LatticeParameter::one(),
        Truncation::default(),
    )
    .unwrap();
    let params = ProblemParams::default();

    // perturb the branch-3 init transversally: noise on every other mode
    let clean = branch_init(&basis, &params, 3).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(31);
    let scale = 0.25 * clean.norm();
    let coeffs: Vec<Complex64> = clean
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            if idx == 2 {
                *c
            } else {
                c + Complex64::new(
                    scale * rng.gen_range(-1.0..1.0),
                    scale * rng.gen_range(-1.0..1.0),
                ) / (basis.dirac_modes().len() as f64).sqrt()
            }
        })
        .collect();
    let noisy = SpinorState::from_coeffs(&basis, coeffs).unwrap();
    let start_res = residual(&basis, &noisy, &params).unwrap().norm();
    eprintln!("transversally perturbed init: residual {start_res:.4e}");

    let mut one = SolverOptions::default();
    one.flow_max_steps = 1;
    let mut state = noisy.clone();
    println!("# step\tresidual");
    println!("0\t{start_res:.6e}");
    for step in 1..=60 {
        state = saddle_flow(&basis, &state, &params, &one).unwrap();
        if step % 6 == 0 {
            let res = residual(&basis, &state, &params).unwrap().norm();
            println!("{step}\t{res:.6e}");
        }
    }

    let sol = newton_solve(&basis, &state, &params, &SolverOptions::default()).unwrap();
    eprintln!(
        "Newton finish: {} iterations to residual {:.3e}, action {:.9}",
        sol.iterations, sol.residual_norm, sol.action
    );
    let reference = newton_solve(
        &basis,
        &clean,
        &params,
        &SolverOptions::default(),
    )
    .unwrap();
    eprintln!(
        "distance to the clean branch-3 solution: {:.3e}",
        sol.state.aligned_distance(&reference.state)
    );

    // the runaway direction: overshooting the amplitude makes the flow grow
    // the state until the guard trips
    let overshoot = clean.scaled(Complex64::new(1.6, 0.0));
    let mut runaway = SolverOptions::default();
    runaway.flow_max_steps = 2000;
    match saddle_flow(&basis, &overshoot, &params, &runaway) {
        Ok(out) => eprintln!(
            "overshot init: flow stalled at residual {:.3e} (best state kept)",
            residual(&basis, &out, &params).unwrap().norm()
        ),
        Err(err) => eprintln!("overshot init: {err}"),
    }
}
