//! Run the full verification suite in-process and print the report table.
//!
//! Run:
//!   cargo run --example verify_claims --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::ProblemParams;
use diracdisk::solver::SolverOptions;
use diracdisk::verify::{render_table, run_all, VerifyConfig};
use std::time::Instant;

fn main() {
    let basis = build_basis(
        Domain::unit(),
        LatticeParameter::one(),
        Truncation::default(),
    )
    .unwrap();
    let cfg = VerifyConfig {
        seed: 7,
        branches: 3,
        ..VerifyConfig::default()
    };

    let started = Instant::now();
    let report = run_all(
        &basis,
        &ProblemParams::default(),
        &SolverOptions::default(),
        &cfg,
    )
    .unwrap();
    print!("{}", render_table(&report));
    eprintln!("suite wall time {:?}", started.elapsed());
    std::process::exit(if report.overall_pass { 0 } else { 1 });
}
