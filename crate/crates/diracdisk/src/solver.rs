//! Stationary-state solver: branch initialisation from scaled eigenspinors,
//! damped Newton iteration with gauge fixing, an optional pseudo-gradient
//! saddle flow used as a globaliser, and the branch ladder that mirrors the
//! increasing sequence of critical levels.
//!
//! Multiplicity is realised as a ladder indexed by linear eigenmodes, not as
//! a literal min-max over deformation classes: each eligible mode seeds one
//! branch, and the branch/level correspondence is a heuristic labelling.
//! The gauge freedom `psi -> e^{i theta} psi` is removed by a bordered
//! linear system (constraint `Im <psi_init, psi> = 0`), which is
//! basis-independent and keeps the Newton matrix invertible at solutions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::basis::BasisSet;
use crate::operators::{
    self, q_form, spectral_split, x_norm, OperatorError, ProblemParams, SpinorState,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(
        "branch {branch} unavailable: needs kappa*(lambda-omega) < 0, got lambda = {lambda}, \
         omega = {omega}, kappa = {kappa}"
    )]
    BranchUnavailable {
        branch: usize,
        lambda: f64,
        omega: f64,
        kappa: f64,
    },
    #[error("branch index {branch} out of range 1..={count}")]
    BranchOutOfRange { branch: usize, count: usize },
    #[error("quartic form of the branch mode is not positive: Q = {q:e}")]
    NonpositiveQuarticForm { q: f64 },
    #[error("no convergence after {iterations} iterations; last residual {residual:e}")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(
        "bordered Newton system numerically singular (pivot ratio {pivot_ratio:e}); \
         consider the flow mode or a different branch"
    )]
    SingularSystem { pivot_ratio: f64 },
    #[error("saddle flow diverged: state norm grew {growth:.1}x over the initial")]
    FlowDiverged { growth: f64 },
    #[error("all {0} requested ladder branches failed")]
    AllBranchesFailed(usize),
    #[error("invalid solver option: {0}")]
    InvalidOptions(String),
}

/// Tunables of the Newton/flow machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Residual tolerance, relative to `max(1, ||psi||)`.
    pub tolerance: f64,
    pub backtrack_factor: f64,
    pub min_step: f64,
    /// Run the saddle flow before Newton.
    pub flow_enabled: bool,
    pub flow_step: f64,
    pub flow_max_steps: usize,
    /// Shift of the deflation factors; `None` disables deflation.
    pub deflation_shift: Option<f64>,
    /// Seed of the deterministic restart perturbations.
    pub perturb_seed: u64,
    pub max_restarts: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-10,
            backtrack_factor: 0.5,
            min_step: (2.0_f64).powi(-20),
            flow_enabled: false,
            flow_step: 0.05,
            flow_max_steps: 2000,
            deflation_shift: None,
            perturb_seed: 0x5eed_d15c,
            max_restarts: 3,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > 0.0) {
            return Err(SolverError::InvalidOptions("tolerance must be > 0".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(SolverError::InvalidOptions(
                "backtrack factor must lie in (0, 1)".into(),
            ));
        }
        if !(self.min_step > 0.0 && self.min_step < 1.0) {
            return Err(SolverError::InvalidOptions(
                "minimum step must lie in (0, 1)".into(),
            ));
        }
        if !(self.flow_step > 0.0) {
            return Err(SolverError::InvalidOptions("flow step must be > 0".into()));
        }
        if let Some(shift) = self.deflation_shift {
            if !(shift >= 0.0) {
                return Err(SolverError::InvalidOptions(
                    "deflation shift must be >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One converged stationary state with its diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub state: SpinorState,
    pub params: ProblemParams,
    /// 1-based index of the seeding mode in the basis ordering; absent for
    /// solves not started from a branch.
    pub branch: Option<usize>,
    pub lambda: Option<f64>,
    pub action: f64,
    pub q_value: f64,
    pub residual_norm: f64,
    pub x_norm: f64,
    pub x_norm_plus: f64,
    pub x_norm_minus: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `|Im <psi_init, psi>|` at the accepted state.
    pub gauge_defect: f64,
    /// `|I - Q/4| / |I|`, the critical-point identity defect.
    pub nehari_defect: f64,
    pub restarts: u32,
    pub damped_steps: usize,
}

impl Solution {
    fn assemble(
        basis: &BasisSet,
        state: SpinorState,
        params: ProblemParams,
        branch: Option<usize>,
        iterations: usize,
        restarts: u32,
        damped_steps: usize,
        gauge_defect: f64,
        residual_norm: f64,
    ) -> Result<Self, SolverError> {
        let action = operators::action(basis, &state, &params)?;
        let q_value = q_form(basis, &state)?;
        let (plus, minus) = spectral_split(basis, &state, &params)?;
        // Pairing the gradient with psi at a critical point gives
        // <(D-omega)psi, psi> = -kappa Q, hence I = -kappa Q / 4.
        let nehari_defect =
            (action + 0.25 * params.kappa * q_value).abs() / action.abs().max(1e-300);
        Ok(Self {
            lambda: branch.map(|b| basis.dirac_modes()[b - 1].eigenvalue),
            x_norm: x_norm(basis, &state, &params, false)?,
            x_norm_plus: x_norm(basis, &plus, &params, false)?,
            x_norm_minus: x_norm(basis, &minus, &params, false)?,
            state,
            params,
            branch,
            action,
            q_value,
            residual_norm,
            iterations,
            converged: true,
            gauge_defect,
            nehari_defect,
            restarts,
            damped_steps,
        })
    }
}

/// 1-based indices of the modes that admit a real balance amplitude, i.e.
/// `kappa (lambda_k - omega) < 0`, in the deterministic basis order.
pub fn eligible_branches(basis: &BasisSet, params: &ProblemParams) -> Vec<usize> {
    basis
        .dirac_modes()
        .iter()
        .enumerate()
        .filter(|(_, mode)| params.kappa * (mode.eigenvalue - params.omega) < 0.0)
        .map(|(idx, _)| idx + 1)
        .collect()
}

/// Scaled eigenspinor `t psi_k` with the amplitude balancing the quadratic
/// against the quartic term: `t^2 = -(lambda_k - omega) / (kappa Q(psi_k))`.
pub fn branch_init(
    basis: &BasisSet,
    params: &ProblemParams,
    branch: usize,
) -> Result<SpinorState, SolverError> {
    let modes = basis.dirac_modes();
    if branch == 0 || branch > modes.len() {
        return Err(SolverError::BranchOutOfRange {
            branch,
            count: modes.len(),
        });
    }
    let lambda = modes[branch - 1].eigenvalue;
    if params.kappa * (lambda - params.omega) >= 0.0 {
        return Err(SolverError::BranchUnavailable {
            branch,
            lambda,
            omega: params.omega,
            kappa: params.kappa,
        });
    }
    let unit = SpinorState::unit_mode(basis, branch - 1)?;
    let q = q_form(basis, &unit)?;
    if q <= 0.0 {
        return Err(SolverError::NonpositiveQuarticForm { q });
    }
    let t = (-(lambda - params.omega) / (params.kappa * q)).sqrt();
    Ok(unit.scaled(Complex64::new(t, 0.0)))
}

/// Newton iteration with phase gauge fixed against the initial state.
pub fn newton_solve(
    basis: &BasisSet,
    init: &SpinorState,
    params: &ProblemParams,
    options: &SolverOptions,
) -> Result<Solution, SolverError> {
    newton_solve_deflated(basis, init, params, options, &[], None)
}

/// Same as [`newton_solve`] but with the residual deflated against already
/// known solutions, `F -> F * prod_i (1 / ||psi - psi_i||^2 + shift)`, so
/// the iteration cannot settle on a state it has been deflated against.
pub fn newton_solve_deflated(
    basis: &BasisSet,
    init: &SpinorState,
    params: &ProblemParams,
    options: &SolverOptions,
    known: &[SpinorState],
    branch_label: Option<usize>,
) -> Result<Solution, SolverError> {
    options.validate()?;
    init.check(basis)?;
    if init.norm() == 0.0 {
        return Err(SolverError::InvalidOptions(
            "Newton needs a nonzero initial state".into(),
        ));
    }
    let n = basis.dirac_modes().len();
    let deflate = options.deflation_shift.filter(|_| !known.is_empty());

    let mut restarts = 0u32;
    let mut current = init.clone();
    loop {
        match newton_attempt(
            basis,
            &current,
            init,
            params,
            options,
            known,
            deflate,
            branch_label,
            restarts,
        ) {
            Ok(solution) => return Ok(solution),
            Err(err @ (SolverError::SingularSystem { .. } | SolverError::NonConvergence { .. }))
                if restarts < options.max_restarts =>
            {
                // Deterministic recovery: restart from a perturbed init
                // (seeded, 1e-3 relative noise).
                restarts += 1;
                let _ = err;
                let mut rng = ChaCha12Rng::seed_from_u64(
                    options.perturb_seed
                        ^ branch_label.unwrap_or(0) as u64
                        ^ ((restarts as u64) << 32),
                );
                let scale = 1e-3
                    * init
                        .coeffs()
                        .iter()
                        .map(|c| c.norm())
                        .fold(0.0_f64, f64::max);
                let coeffs: Vec<Complex64> = init
                    .coeffs()
                    .iter()
                    .map(|c| {
                        c + Complex64::new(
                            scale * rng.gen_range(-1.0..1.0),
                            scale * rng.gen_range(-1.0..1.0),
                        )
                    })
                    .collect();
                current = SpinorState::from_coeffs(basis, coeffs)?;
                debug_assert_eq!(current.coeffs().len(), n);
            }
            Err(err) => return Err(err),
        }
    }
}

/// Deflation factor and its gradient in real coordinates.
fn deflation_factor(
    state: &SpinorState,
    known: &[SpinorState],
    shift: f64,
) -> (f64, Vec<f64>) {
    let dim = 2 * state.coeffs().len();
    let mut m = 1.0_f64;
    let mut grad = vec![0.0_f64; dim];
    let x = state.to_real();
    for other in known {
        let y = other.to_real();
        let dist_sq: f64 = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .max(1e-300);
        let factor = 1.0 / dist_sq + shift;
        m *= factor;
        let coeff = -2.0 / (dist_sq * dist_sq) / factor;
        for i in 0..dim {
            grad[i] += coeff * (x[i] - y[i]);
        }
    }
    for g in &mut grad {
        *g *= m;
    }
    (m, grad)
}

#[allow(clippy::too_many_arguments)]
fn newton_attempt(
    basis: &BasisSet,
    start: &SpinorState,
    gauge_ref: &SpinorState,
    params: &ProblemParams,
    options: &SolverOptions,
    known: &[SpinorState],
    deflate: Option<f64>,
    branch_label: Option<usize>,
    restarts: u32,
) -> Result<Solution, SolverError> {
    let n = basis.dirac_modes().len();
    let dim = 2 * n;
    // Gradient of the gauge constraint Im <ref, psi> is the real view of
    // i * ref; the constraint itself is linear, so once zero it stays zero.
    let gauge_grad = gauge_ref.scaled(Complex64::new(0.0, 1.0)).to_real();

    let mut state = start.clone();
    let mut damped_steps = 0usize;
    let mut f = operators::residual(basis, &state, params)?;
    let mut res_norm = f.norm();

    for iteration in 0..=options.max_iterations {
        if res_norm <= options.tolerance * state.norm().max(1.0) {
            let gauge_defect = gauge_ref.inner(&state).im.abs();
            return Solution::assemble(
                basis,
                state,
                *params,
                branch_label,
                iteration,
                restarts,
                damped_steps,
                gauge_defect,
                res_norm,
            );
        }
        if iteration == options.max_iterations {
            break;
        }

        let mut jac = operators::jacobian_matrix(basis, &state, params)?;
        let mut f_real = f.to_real();
        let mut merit = res_norm;
        if let Some(shift) = deflate {
            let (m, grad_m) = deflation_factor(&state, known, shift);
            let fv = DVector::from_vec(f_real.clone());
            let gv = DVector::from_vec(grad_m);
            jac *= m;
            jac.ger(1.0, &fv, &gv, 1.0);
            for v in &mut f_real {
                *v *= m;
            }
            merit = res_norm * m;
        }

        // Bordered system: [J g; g^T 0] [delta; nu] = [-F; -C].
        let mut bordered = DMatrix::<f64>::zeros(dim + 1, dim + 1);
        bordered.view_mut((0, 0), (dim, dim)).copy_from(&jac);
        for i in 0..dim {
            bordered[(i, dim)] = gauge_grad[i];
            bordered[(dim, i)] = gauge_grad[i];
        }
        let mut rhs = DVector::<f64>::zeros(dim + 1);
        for i in 0..dim {
            rhs[i] = -f_real[i];
        }
        rhs[dim] = -gauge_ref.inner(&state).im;

        let lu = bordered.lu();
        let diag = lu.u().diagonal();
        let (mut dmin, mut dmax) = (f64::INFINITY, 0.0_f64);
        for v in diag.iter() {
            dmin = dmin.min(v.abs());
            dmax = dmax.max(v.abs());
        }
        let pivot_ratio = if dmax > 0.0 { dmin / dmax } else { 0.0 };
        if pivot_ratio < 1e-12 {
            return Err(SolverError::SingularSystem { pivot_ratio });
        }
        let update = lu
            .solve(&rhs)
            .ok_or(SolverError::SingularSystem { pivot_ratio })?;

        let delta = SpinorState::from_real(basis, update.as_slice().split_at(dim).0)?;
        let mut step = 1.0_f64;
        let mut accepted = false;
        while step >= options.min_step {
            let candidate = state.add_scaled(&delta, Complex64::new(step, 0.0));
            let f_candidate = operators::residual(basis, &candidate, params)?;
            let mut candidate_merit = f_candidate.norm();
            if let Some(shift) = deflate {
                let (m, _) = deflation_factor(&candidate, known, shift);
                candidate_merit *= m;
            }
            if candidate_merit < merit {
                if step < 1.0 {
                    damped_steps += 1;
                }
                state = candidate;
                res_norm = f_candidate.norm();
                f = f_candidate;
                accepted = true;
                break;
            }
            step *= options.backtrack_factor;
        }
        if !accepted {
            return Err(SolverError::NonConvergence {
                iterations: iteration + 1,
                residual: res_norm,
            });
        }
    }
    Err(SolverError::NonConvergence {
        iterations: options.max_iterations,
        residual: res_norm,
    })
}

/// Discrete odd pseudo-gradient flow `psi <- psi - tau (P+ - P-) grad I`,
/// used to pull an initial guess toward the saddle before Newton. Returns
/// the lowest-residual state encountered.
pub fn saddle_flow(
    basis: &BasisSet,
    init: &SpinorState,
    params: &ProblemParams,
    options: &SolverOptions,
) -> Result<SpinorState, SolverError> {
    options.validate()?;
    init.check(basis)?;
    let signs: Vec<f64> = basis
        .dirac_modes()
        .iter()
        .map(|mode| if mode.eigenvalue > params.omega { 1.0 } else { -1.0 })
        .collect();
    let initial_norm = init.norm().max(1e-300);
    let mut state = init.clone();
    let mut best = state.clone();
    let mut best_res = operators::residual(basis, &state, params)?.norm();
    for _ in 0..options.flow_max_steps {
        let f = operators::residual(basis, &state, params)?;
        let coeffs: Vec<Complex64> = state
            .coeffs()
            .iter()
            .zip(f.coeffs())
            .zip(&signs)
            .map(|((c, fk), s)| c - options.flow_step * s * fk)
            .collect();
        state = SpinorState::from_coeffs(basis, coeffs)?;
        let growth = state.norm() / initial_norm;
        if growth > 1e3 {
            return Err(SolverError::FlowDiverged { growth });
        }
        let res = operators::residual(basis, &state, params)?.norm();
        if res < best_res {
            best_res = res;
            best = state.clone();
        }
        if res <= options.tolerance * state.norm().max(1.0) {
            return Ok(state);
        }
    }
    Ok(best)
}

/// Outcome of one ladder branch.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// 1-based mode index seeding this branch.
    pub branch: usize,
    pub lambda: f64,
    pub outcome: Result<Solution, SolverError>,
}

/// Stationary solutions over the first `count` eligible branches, in basis
/// order. Branches run independently (and in parallel); per-branch failures
/// are recorded without aborting the ladder. With deflation enabled in the
/// options, branches that collapse onto an earlier solution are retried
/// deflated against everything already found.
pub fn ladder(
    basis: &BasisSet,
    params: &ProblemParams,
    count: usize,
    options: &SolverOptions,
) -> Result<Vec<BranchRecord>, SolverError> {
    options.validate()?;
    if count == 0 {
        return Err(SolverError::InvalidOptions(
            "ladder needs count >= 1".into(),
        ));
    }
    let branches: Vec<usize> = eligible_branches(basis, params)
        .into_iter()
        .take(count)
        .collect();
    let mut records: Vec<BranchRecord> = branches
        .par_iter()
        .map(|&branch| {
            let lambda = basis.dirac_modes()[branch - 1].eigenvalue;
            let outcome = solve_branch(basis, params, branch, options, &[]);
            BranchRecord {
                branch,
                lambda,
                outcome,
            }
        })
        .collect();

    // Distinctness sweep: with deflation on, re-solve duplicates against the
    // states already accepted.
    if options.deflation_shift.is_some() {
        let mut accepted: Vec<SpinorState> = Vec::new();
        for idx in 0..records.len() {
            let duplicate = match &records[idx].outcome {
                Ok(sol) => accepted
                    .iter()
                    .any(|prev| sol.state.aligned_distance(prev) <= 1e-6),
                Err(_) => false,
            };
            if duplicate {
                let branch = records[idx].branch;
                records[idx].outcome = solve_branch(basis, params, branch, options, &accepted);
            }
            if let Ok(sol) = &records[idx].outcome {
                accepted.push(sol.state.clone());
            }
        }
    }

    if records.iter().all(|r| r.outcome.is_err()) {
        return Err(SolverError::AllBranchesFailed(records.len()));
    }
    Ok(records)
}

fn solve_branch(
    basis: &BasisSet,
    params: &ProblemParams,
    branch: usize,
    options: &SolverOptions,
    deflate_against: &[SpinorState],
) -> Result<Solution, SolverError> {
    let mut init = branch_init(basis, params, branch)?;
    if options.flow_enabled {
        init = saddle_flow(basis, &init, params, options)?;
    }
    newton_solve_deflated(basis, &init, params, options, deflate_against, Some(branch))
}
