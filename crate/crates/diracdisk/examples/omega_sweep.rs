//! Branch-1 solutions across frequencies inside the spectral gap: action,
//! amplitude and the splitting norms as functions of omega.
//!
//! Run:
//!   cargo run --example omega_sweep --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::ProblemParams;
use diracdisk::solver::{branch_init, newton_solve, SolverOptions};

fn main() {
    let basis = build_basis(
        Domain::unit(),
        LatticeParameter::one(),
        Truncation::default(),
    )
    .unwrap();
    let options = SolverOptions::default();
    let lambda1 = basis.min_abs_eigenvalue();
    eprintln!("sweeping omega inside the gap (-{lambda1:.4}, {lambda1:.4})");

    println!("# omega\taction\t||psi||\tX+^2\tX-^2\titers");
    for step in -8i32..=8 {
        let omega = 0.1375 * step as f64 * lambda1 / 1.1;
        let params = ProblemParams::new(omega, -1.0);
        if params.validate(&basis).is_err() {
            continue;
        }
        let init = match branch_init(&basis, &params, 1) {
            Ok(init) => init,
            Err(err) => {
                eprintln!("omega = {omega:+.4}: {err}");
                continue;
            }
        };
        match newton_solve(&basis, &init, &params, &options) {
            Ok(sol) => println!(
                "{omega:+.6}\t{:.9}\t{:.6}\t{:.6}\t{:.6}\t{}",
                sol.action,
                sol.state.norm(),
                sol.x_norm_plus * sol.x_norm_plus,
                sol.x_norm_minus * sol.x_norm_minus,
                sol.iterations
            ),
            Err(err) => eprintln!("omega = {omega:+.4}: {err}"),
        }
    }
}
