//! The self-consistent potential: smoothing, positivity, and the discrete
//! half-Laplacian identity it satisfies by construction.
//!
//! Run:
//!   cargo run --example hartree_smoothing --release

use diracdisk::basis::{build_basis, Domain, LatticeParameter, Truncation};
use diracdisk::operators::{
    density, hartree_from_density, hartree_potential, SpinorState,
};
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

    // the potential of the lowest Dirichlet eigenfunction taken as density
    // is exactly that eigenfunction divided by sqrt(mu_1)
    let mut e1 = vec![0.0; basis.dirichlet_modes().len()];
    e1[0] = 1.0;
    let e1_grid = basis.synth_scalar(&e1).unwrap();
    let v1 = hartree_from_density(&basis, &e1_grid).unwrap();
    let mu1 = basis.dirichlet_modes()[0].eigenvalue;
    println!("mu_1 = {mu1:.12} (= j_{{0,1}}^2)");
    println!(
        "V[e_1] coefficient on e_1 = {:.12}, expected mu_1^(-1/2) = {:.12}",
        v1.coeffs()[0],
        1.0 / mu1.sqrt()
    );
    println!(
        "V[e_1] min/max on the grid = {:.3e} / {:.3e}\n",
        v1.min_value(),
        v1.max_value()
    );

    // random band-limited states: positivity and the projection identity
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let mut worst_undershoot = 0.0_f64;
    let mut worst_identity = 0.0_f64;
    for _ in 0..50 {
        let coeffs: Vec<Complex64> = (0..basis.dirac_modes().len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = SpinorState::from_coeffs(&basis, coeffs).unwrap();
        let v = hartree_potential(&basis, &psi).unwrap();
        worst_undershoot = worst_undershoot.max(-v.min_value() / v.max_value().max(1e-30));

        let d = density(&basis, &psi).unwrap();
        let p = basis.analyze_scalar(&d).unwrap();
        let scale = p.iter().fold(0.0_f64, |a, x| a.max(x.abs())).max(1.0);
        for ((c, mode), pn) in v.coeffs().iter().zip(basis.dirichlet_modes()).zip(&p) {
            worst_identity = worst_identity.max((mode.eigenvalue.sqrt() * c - pn).abs() / scale);
        }
    }
    println!("50 random states:");
    println!("  worst relative undershoot of V: {worst_undershoot:.3e}");
    println!("  worst defect of sqrt(mu_n) v_n = <|psi|^2, e_n>: {worst_identity:.3e}");
}
