//! Solve the lowest branch of the Dirac-Hartree equation at omega = 0,
//! kappa = -1 and inspect the converged state.
//!
//! Run:
//!   cargo run --example ground_branch --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::{density, hartree_potential, residual, ProblemParams};
use diracdisk::solver::{branch_init, newton_solve, SolverOptions};

fn main() {
    let basis = build_basis(
        Domain::unit(),
        LatticeParameter::one(),
        Truncation::default(),
    )
    .unwrap();
    let params = ProblemParams::default();
    let options = SolverOptions::default();

    let init = branch_init(&basis, &params, 1).unwrap();
    eprintln!(
        "branch 1 init: |psi| = {:.6} on the lambda = {:.6} mode",
        init.norm(),
        basis.dirac_modes()[0].eigenvalue
    );

    let sol = newton_solve(&basis, &init, &params, &options).unwrap();
    eprintln!(
        "converged in {} iterations ({} damped), residual {:.3e}",
        sol.iterations, sol.damped_steps, sol.residual_norm
    );
    println!("action           = {:.12}", sol.action);
    println!("quartic form Q   = {:.12}", sol.q_value);
    println!("identity I - Q/4 = {:.3e} (relative)", sol.nehari_defect);
    println!("X-norm (+/-)     = {:.6} / {:.6}", sol.x_norm_plus, sol.x_norm_minus);
    println!("gauge defect     = {:.3e}", sol.gauge_defect);

    // independent residual recomputation
    let f = residual(&basis, &sol.state, &params).unwrap();
    println!("recomputed ||F|| = {:.3e}", f.norm());

    // radial profile of the density and the self-consistent potential
    // (the branch-1 state is rotation invariant, so one ray suffices)
    let d = density(&basis, &sol.state).unwrap();
    let v = hartree_potential(&basis, &sol.state).unwrap();
    let nt = basis.grid().angular_count();
    println!("\n# r\tdensity\tpotential");
    for (i, &r) in basis.grid().radial().iter().enumerate().step_by(4) {
        println!("{r:.6}\t{:.9}\t{:.9}", d[i * nt], v.values()[i * nt]);
    }
}
