//! Solve one branch and export its density, potential and spinor components
//! as CSV grids under `out/`.
//!
//! Run:
//!   cargo run --example export_fields --release

use diracdisk::basis::build_basis;
use diracdisk::config::Config;
use diracdisk::io::{export_csv, solution_file, write_solution, ExportKind};
use diracdisk::solver::{branch_init, newton_solve};
use std::path::Path;

fn main() {
    let config = Config::default();
    let basis = build_basis(
        config.domain().unwrap(),
        config.lattice().unwrap(),
        config.truncation(),
    )
    .unwrap();
    let params = config.params();
    let options = config.solver_options();

    let init = branch_init(&basis, &params, 1).unwrap();
    let sol = newton_solve(&basis, &init, &params, &options).unwrap();
    eprintln!(
        "branch 1 converged: action {:.9}, residual {:.3e}",
        sol.action, sol.residual_norm
    );

    let out = Path::new(&config.run.output_dir);
    let solution_path = out.join("solution-branch-1.json");
    write_solution(&solution_path, &solution_file(&sol, &config)).unwrap();
    eprintln!("wrote {}", solution_path.display());

    for (kind, name) in [
        (ExportKind::Density, "density.csv"),
        (ExportKind::Potential, "potential.csv"),
        (ExportKind::Spinor, "spinor.csv"),
    ] {
        let path = out.join(name);
        export_csv(&path, &basis, &sol.state, kind, &config).unwrap();
        eprintln!("wrote {}", path.display());
    }
    println!("fields exported for config hash {}", config.hash());
}
