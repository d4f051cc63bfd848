//! The multiplicity ladder: distinct stationary solutions, one per eligible
//! eigenmode branch, with their action values.
//!
//! Run:
//!   cargo run --example solution_ladder --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::{q_form, ProblemParams, SpinorState};
use diracdisk::solver::{ladder, SolverOptions};
use std::time::Instant;

fn main() {
    let basis = build_basis(
        Domain::unit(),
        LatticeParameter::one(),
        Truncation::default(),
    )
    .unwrap();
    let params = ProblemParams::default();

    let started = Instant::now();
    let records = ladder(&basis, &params, 5, &SolverOptions::default()).unwrap();
    eprintln!("ladder of 5 branches in {:?}", started.elapsed());

    println!("# branch\tm\tlambda\taction\tresidual\titers");
    for record in &records {
        let mode = &basis.dirac_modes()[record.branch - 1];
        match &record.outcome {
            Ok(sol) => println!(
                "{}\t{}\t{:.9}\t{:.9}\t{:.2e}\t{}",
                record.branch, mode.m, record.lambda, sol.action, sol.residual_norm, sol.iterations
            ),
            Err(err) => println!("{}\t{}\t{:.9}\tfailed: {err}", record.branch, mode.m, record.lambda),
        }
    }
    println!("# branch indices follow the linear eigenmode ordering (heuristic level labels)");

    // weak-coupling estimate of the first action: the scalar reduction on a
    // single mode predicts I ~ (lambda - omega)^2 / (4 Q(psi_k)); reported
    // for orientation, not asserted
    let unit = SpinorState::unit_mode(&basis, 0).unwrap();
    let q1 = q_form(&basis, &unit).unwrap();
    let lambda1 = basis.dirac_modes()[0].eigenvalue;
    let estimate = 0.25 * (lambda1 - params.omega).powi(2) / q1;
    if let Ok(sol) = &records[0].outcome {
        eprintln!(
            "branch 1: single-mode estimate {estimate:.6} vs solved action {:.6} ({:+.1}%)",
            sol.action,
            100.0 * (sol.action - estimate) / estimate
        );
    }

    // pairwise distinctness after phase alignment
    let solutions: Vec<_> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let mut min_dist = f64::INFINITY;
    for a in 0..solutions.len() {
        for b in 0..a {
            min_dist = min_dist.min(solutions[a].state.aligned_distance(&solutions[b].state));
        }
    }
    eprintln!("minimum pairwise aligned distance: {min_dist:.6}");
}
