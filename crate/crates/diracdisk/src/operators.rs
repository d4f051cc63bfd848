//! The Dirac operator, the self-consistent Hartree potential, the action
//! functional and its derivatives, realised over a fixed [`BasisSet`].
//!
//! States are complex coefficient vectors over the Dirac modes, so the
//! linear operator is diagonal; the nonlinearity is formed pseudo-spectrally
//! (pointwise on the quadrature grid, projected back by quadrature). All
//! derivative objects use the real coordinates `(Re c_k, Im c_k)`: the
//! action is real-valued and only real-differentiable. With the convention
//! used here the gradient is exactly `(Re F_k, Im F_k)` where `F` is the
//! residual map, i.e. the directional derivative of the action along `h`
//! equals `Re <F, h>` with no extra factor; the finite-difference checks in
//! the test suite pin this bookkeeping down.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{BasisError, BasisId, BasisSet, SpinorGrid};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Finite-basis proxy margin for "omega is not an eigenvalue".
pub const OMEGA_SPECTRUM_MARGIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("omega = {omega} is within {distance:e} of the spectrum (needs > {margin:e})")]
    OmegaInSpectrum {
        omega: f64,
        distance: f64,
        margin: f64,
    },
    #[error("invalid problem parameters: {0}")]
    InvalidParams(String),
}

/// Frequency and coupling of the stationary problem
/// `(D - omega) psi + kappa V(psi) psi = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub omega: f64,
    pub kappa: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            omega: 0.0,
            kappa: -1.0,
        }
    }
}

impl ProblemParams {
    pub fn new(omega: f64, kappa: f64) -> Self {
        Self { omega, kappa }
    }

    /// Checks finiteness, a nonzero coupling, and that `omega` keeps a
    /// margin from every eigenvalue of the truncated operator.
    pub fn validate(&self, basis: &BasisSet) -> Result<(), OperatorError> {
        if !self.omega.is_finite() || !self.kappa.is_finite() {
            return Err(OperatorError::InvalidParams(format!(
                "omega = {}, kappa = {} must be finite",
                self.omega, self.kappa
            )));
        }
        if self.kappa == 0.0 {
            return Err(OperatorError::InvalidParams("kappa must be nonzero".into()));
        }
        let distance = basis
            .eigenvalues()
            .map(|ev| (ev - self.omega).abs())
            .fold(f64::INFINITY, f64::min);
        if distance <= OMEGA_SPECTRUM_MARGIN {
            return Err(OperatorError::OmegaInSpectrum {
                omega: self.omega,
                distance,
                margin: OMEGA_SPECTRUM_MARGIN,
            });
        }
        Ok(())
    }
}

/// Complex coefficient vector of a spinor over the Dirac modes of one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorState {
    coeffs: Vec<Complex64>,
    basis: BasisId,
}

impl SpinorState {
    pub fn zero(basis: &BasisSet) -> Self {
        Self {
            coeffs: vec![ZERO; basis.dirac_modes().len()],
            basis: basis.id(),
        }
    }

    pub fn from_coeffs(basis: &BasisSet, coeffs: Vec<Complex64>) -> Result<Self, OperatorError> {
        if coeffs.len() != basis.dirac_modes().len() {
            return Err(BasisError::LengthMismatch {
                expected: basis.dirac_modes().len(),
                got: coeffs.len(),
            }
            .into());
        }
        Ok(Self {
            coeffs,
            basis: basis.id(),
        })
    }

    /// Unit coefficient on a single mode.
    pub fn unit_mode(basis: &BasisSet, index: usize) -> Result<Self, OperatorError> {
        let mut state = Self::zero(basis);
        if index >= state.coeffs.len() {
            return Err(BasisError::LengthMismatch {
                expected: state.coeffs.len(),
                got: index,
            }
            .into());
        }
        state.coeffs[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn basis_id(&self) -> BasisId {
        self.basis
    }

    pub(crate) fn check(&self, basis: &BasisSet) -> Result<(), OperatorError> {
        if self.basis != basis.id() || self.coeffs.len() != basis.dirac_modes().len() {
            return Err(BasisError::BasisMismatch.into());
        }
        Ok(())
    }

    /// L2 norm; the modes are orthonormal, so this is the coefficient norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            basis: self.basis,
        }
    }

    pub fn add_scaled(&self, other: &Self, factor: Complex64) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + factor * b)
                .collect(),
            basis: self.basis,
        }
    }

    /// Distance to `other` minimised over a global phase.
    pub fn aligned_distance(&self, other: &Self) -> f64 {
        let na = self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let nb = other.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>();
        let cross = self.inner(other).norm();
        (na + nb - 2.0 * cross).max(0.0).sqrt()
    }

    /// Real view `[Re c_0.., Im c_0..]`.
    pub fn to_real(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; 2 * n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] = c.re;
            out[n + k] = c.im;
        }
        out
    }

    pub fn from_real(basis: &BasisSet, real: &[f64]) -> Result<Self, OperatorError> {
        let n = basis.dirac_modes().len();
        if real.len() != 2 * n {
            return Err(BasisError::LengthMismatch {
                expected: 2 * n,
                got: real.len(),
            }
            .into());
        }
        let coeffs = (0..n)
            .map(|k| Complex64::new(real[k], real[n + k]))
            .collect();
        Ok(Self {
            coeffs,
            basis: basis.id(),
        })
    }
}

/// Real scalar field stored as Dirichlet coefficients with cached grid
/// values; the cache always equals the synthesis of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    coeffs: Vec<f64>,
    values: Vec<f64>,
    basis: BasisId,
}

impl ScalarField {
    pub fn from_coeffs(basis: &BasisSet, coeffs: Vec<f64>) -> Result<Self, OperatorError> {
        let values = basis.synth_scalar(&coeffs)?;
        Ok(Self {
            coeffs,
            values,
            basis: basis.id(),
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Cached pointwise values on the quadrature grid.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn basis_id(&self) -> BasisId {
        self.basis
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `D psi`: the operator is diagonal on its eigenbasis.
pub fn apply_dirac(basis: &BasisSet, state: &SpinorState) -> Result<SpinorState, OperatorError> {
    state.check(basis)?;
    let coeffs = state
        .coeffs()
        .iter()
        .zip(basis.dirac_modes())
        .map(|(c, mode)| c * mode.eigenvalue)
        .collect();
    SpinorState::from_coeffs(basis, coeffs)
}

/// Pointwise density `|psi|^2` on the grid.
pub fn density(basis: &BasisSet, state: &SpinorState) -> Result<Vec<f64>, OperatorError> {
    state.check(basis)?;
    let grid = basis.synth_spinor(state.coeffs())?;
    Ok(density_of(&grid))
}

fn density_of(grid: &SpinorGrid) -> Vec<f64> {
    grid.up
        .iter()
        .zip(&grid.dn)
        .map(|(u, d)| u.norm_sqr() + d.norm_sqr())
        .collect()
}

/// Applies the inverse square root of the Dirichlet Laplacian to a density
/// sampled on the grid: project by quadrature, damp each coefficient by
/// `mu^(-1/2)`, resynthesize. Public so tests can feed synthetic densities.
pub fn hartree_from_density(
    basis: &BasisSet,
    density_values: &[f64],
) -> Result<ScalarField, OperatorError> {
    let projections = basis.analyze_scalar(density_values)?;
    let coeffs = projections
        .iter()
        .zip(basis.dirichlet_modes())
        .map(|(p, mode)| p / mode.eigenvalue.sqrt())
        .collect();
    ScalarField::from_coeffs(basis, coeffs)
}

/// Self-consistent potential `V(psi) = (-Delta)^(-1/2) |psi|^2`.
pub fn hartree_potential(
    basis: &BasisSet,
    state: &SpinorState,
) -> Result<ScalarField, OperatorError> {
    let d = density(basis, state)?;
    hartree_from_density(basis, &d)
}

/// Quartic form `Q(psi) = integral V(psi) |psi|^2`. In the retained basis
/// this equals `sum_n mu_n^(-1/2) <|psi|^2, e_n>^2 >= 0`.
pub fn q_form(basis: &BasisSet, state: &SpinorState) -> Result<f64, OperatorError> {
    let d = density(basis, state)?;
    let v = hartree_from_density(basis, &d)?;
    let product: Vec<f64> = v.values().iter().zip(&d).map(|(a, b)| a * b).collect();
    Ok(basis.grid().integrate(&product))
}

/// Action whose critical points solve the stationary equation:
/// `I(psi) = 1/2 sum (lambda_k - omega) |c_k|^2 + (kappa/4) Q(psi)`.
pub fn action(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
) -> Result<f64, OperatorError> {
    state.check(basis)?;
    let quadratic: f64 = state
        .coeffs()
        .iter()
        .zip(basis.dirac_modes())
        .map(|(c, mode)| (mode.eigenvalue - params.omega) * c.norm_sqr())
        .sum();
    let q = q_form(basis, state)?;
    Ok(0.5 * quadratic + 0.25 * params.kappa * q)
}

/// Residual map `F(psi) = (D - omega) psi + kappa V(psi) psi` in the Dirac
/// basis; the product `V psi` is formed on the grid and analysed back.
pub fn residual(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
) -> Result<SpinorState, OperatorError> {
    state.check(basis)?;
    let grid = basis.synth_spinor(state.coeffs())?;
    let d = density_of(&grid);
    let v = hartree_from_density(basis, &d)?;
    let nonlinear = basis.analyze_spinor(&scale_grid(&grid, v.values()))?;
    let coeffs = state
        .coeffs()
        .iter()
        .zip(basis.dirac_modes())
        .zip(&nonlinear)
        .map(|((c, mode), nl)| (mode.eigenvalue - params.omega) * c + params.kappa * nl)
        .collect();
    SpinorState::from_coeffs(basis, coeffs)
}

fn scale_grid(grid: &SpinorGrid, weights: &[f64]) -> SpinorGrid {
    SpinorGrid {
        up: grid.up.iter().zip(weights).map(|(v, w)| v * w).collect(),
        dn: grid.dn.iter().zip(weights).map(|(v, w)| v * w).collect(),
    }
}

/// Gradient of the action with respect to `(Re c_k, Im c_k)`: exactly
/// `(Re F_k, Im F_k)`.
pub fn action_gradient(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
) -> Result<Vec<f64>, OperatorError> {
    Ok(residual(basis, state, params)?.to_real())
}

/// Real-linearisation of the residual applied to a direction:
/// `J[h] = (D - omega) h + kappa V(psi) h
///        + kappa [(-Delta)^(-1/2) (2 Re <psi, h>_pointwise)] psi`.
pub fn jacobian_apply(
    basis: &BasisSet,
    state: &SpinorState,
    direction: &SpinorState,
    params: &ProblemParams,
) -> Result<SpinorState, OperatorError> {
    state.check(basis)?;
    direction.check(basis)?;
    let psi = basis.synth_spinor(state.coeffs())?;
    let h = basis.synth_spinor(direction.coeffs())?;
    let v = hartree_from_density(basis, &density_of(&psi))?;

    // 2 Re(psi^dagger h) pointwise, through the Riesz smoothing.
    let cross: Vec<f64> = psi
        .up
        .iter()
        .zip(&psi.dn)
        .zip(h.up.iter().zip(&h.dn))
        .map(|((pu, pd), (hu, hd))| 2.0 * (pu.conj() * hu + pd.conj() * hd).re)
        .collect();
    let w = hartree_from_density(basis, &cross)?;

    let vh = basis.analyze_spinor(&scale_grid(&h, v.values()))?;
    let wpsi = basis.analyze_spinor(&scale_grid(&psi, w.values()))?;
    let coeffs = direction
        .coeffs()
        .iter()
        .zip(basis.dirac_modes())
        .zip(vh.iter().zip(&wpsi))
        .map(|((hc, mode), (a, b))| (mode.eigenvalue - params.omega) * hc + params.kappa * (a + b))
        .collect();
    SpinorState::from_coeffs(basis, coeffs)
}

/// Dense symmetric matrix of [`jacobian_apply`] in the real coordinates.
/// Every matrix element reduces to a radial quadrature because each factor
/// is a single angular harmonic, which keeps the assembly at
/// `O(n^2 N_r + n n_d N_r)` instead of full grid products.
pub fn jacobian_matrix(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
) -> Result<DMatrix<f64>, OperatorError> {
    state.check(basis)?;
    let modes = basis.dirac_modes();
    let n = modes.len();
    let nr = basis.grid().radial_count();
    let w = basis.grid().radial_weight();
    let tau = 2.0 * std::f64::consts::PI;

    let v = hartree_potential(basis, state)?;
    let wharm = basis.scalar_complex_harmonics(v.coeffs())?;
    let l_max = basis.truncation().dirichlet_angular_max() as i32;

    let mut jac = DMatrix::<f64>::zeros(2 * n, 2 * n);

    // Complex-linear block: diag(lambda - omega) + kappa <psi_j, V psi_k>.
    for j in 0..n {
        for k in 0..=j {
            let dm = modes[j].m - modes[k].m;
            debug_assert!(dm.abs() <= l_max);
            let row = &wharm[(dm + l_max) as usize];
            let ss = modes[j].sign.factor() * modes[k].sign.factor();
            let (ru_j, rd_j) = (modes[j].radial_up(), modes[j].radial_dn());
            let (ru_k, rd_k) = (modes[k].radial_up(), modes[k].radial_dn());
            let mut acc = ZERO;
            for i in 0..nr {
                acc += w[i] * (ru_j[i] * ru_k[i] + ss * rd_j[i] * rd_k[i]) * row[i];
            }
            let mut a = acc * tau * params.kappa;
            if j == k {
                a += modes[j].eigenvalue - params.omega;
            }
            // [[Re, -Im], [Im, Re]] blocks; A is Hermitian so the mirror
            // entry is the conjugate.
            jac[(j, k)] = a.re;
            jac[(j + n, k + n)] = a.re;
            jac[(j + n, k)] = a.im;
            jac[(j, k + n)] = -a.im;
            if j != k {
                jac[(k, j)] = a.re;
                jac[(k + n, j + n)] = a.re;
                jac[(k + n, j)] = -a.im;
                jac[(k, j + n)] = a.im;
            }
        }
    }

    // Rank part: 2 kappa Ur D Ur^T with U_{k,q} = <psi_k, e_q psi> and
    // D = diag(mu_q^(-1/2)).
    let prof = basis.spinor_coeff_harmonics(state.coeffs())?;
    let dirichlet = basis.dirichlet_modes();
    let nq = dirichlet.len();
    let mut ur = DMatrix::<f64>::zeros(2 * n, nq);
    let mut shifted = crate::basis::HarmonicProfiles::shell(prof.offset, prof.up.len(), nr);
    for (q, dmode) in dirichlet.iter().enumerate() {
        shifted.fill_product(&prof, dmode);
        for (k, mode) in modes.iter().enumerate() {
            let gu = &shifted.up[shifted.index(mode.m)];
            let gd = &shifted.dn[shifted.index(mode.m + 1)];
            let chi = basis.dn_phase(k).conj();
            let (ru, rd) = (mode.radial_up(), mode.radial_dn());
            let mut acc = ZERO;
            for i in 0..nr {
                acc += w[i] * (ru[i] * gu[i]) + w[i] * rd[i] * gd[i] * chi;
            }
            acc *= tau;
            ur[(k, q)] = acc.re;
            ur[(k + n, q)] = acc.im;
        }
    }
    let mut ud = ur.clone();
    for (q, dmode) in dirichlet.iter().enumerate() {
        let damp = 1.0 / dmode.eigenvalue.sqrt();
        for k in 0..2 * n {
            ud[(k, q)] *= damp;
        }
    }
    jac.gemm(2.0 * params.kappa, &ud, &ur.transpose(), 1.0);
    Ok(jac)
}

/// Positive/negative spectral split relative to `omega`: coefficient masks
/// `lambda_k > omega` and `lambda_k < omega`; the parts sum back exactly.
pub fn spectral_split(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
) -> Result<(SpinorState, SpinorState), OperatorError> {
    state.check(basis)?;
    let mut plus = vec![ZERO; state.coeffs().len()];
    let mut minus = vec![ZERO; state.coeffs().len()];
    for (k, (c, mode)) in state.coeffs().iter().zip(basis.dirac_modes()).enumerate() {
        if mode.eigenvalue > params.omega {
            plus[k] = *c;
        } else {
            minus[k] = *c;
        }
    }
    Ok((
        SpinorState::from_coeffs(basis, plus)?,
        SpinorState::from_coeffs(basis, minus)?,
    ))
}

/// Norm of the splitting space: `(sum |lambda_k - omega| |c_k|^2)^(1/2)`;
/// with `include_l2` the plain L2 term is added, as in the full scalar
/// product of the space.
pub fn x_norm(
    basis: &BasisSet,
    state: &SpinorState,
    params: &ProblemParams,
    include_l2: bool,
) -> Result<f64, OperatorError> {
    state.check(basis)?;
    let extra = if include_l2 { 1.0 } else { 0.0 };
    Ok(state
        .coeffs()
        .iter()
        .zip(basis.dirac_modes())
        .map(|(c, mode)| ((mode.eigenvalue - params.omega).abs() + extra) * c.norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, BasisSet, Domain, LatticeParameter, Truncation};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::sync::OnceLock;

    fn fixture() -> &'static BasisSet {
        static BASIS: OnceLock<BasisSet> = OnceLock::new();
        BASIS.get_or_init(|| {
            build_basis(
                Domain::unit(),
                LatticeParameter::one(),
                Truncation {
                    m_max: 2,
                    n_radial: 3,
                    dirichlet_radial: 8,
                    radial_nodes: 40,
                    angular_nodes: 16,
                },
            )
            .unwrap()
        })
    }

    fn random_state(basis: &BasisSet, seed: u64) -> SpinorState {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let coeffs = (0..basis.dirac_modes().len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpinorState::from_coeffs(basis, coeffs).unwrap()
    }

    #[test]
    fn dirac_is_diagonal_and_hermitian() {
        let basis = fixture();
        for k in [0usize, 3, 7] {
            let unit = SpinorState::unit_mode(basis, k).unwrap();
            let out = apply_dirac(basis, &unit).unwrap();
            for (idx, c) in out.coeffs().iter().enumerate() {
                let expect = if idx == k {
                    basis.dirac_modes()[k].eigenvalue
                } else {
                    0.0
                };
                assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-14);
            }
        }
        let psi = random_state(basis, 1);
        let dpsi = apply_dirac(basis, &psi).unwrap();
        let pairing = psi.inner(&dpsi);
        assert!(pairing.im.abs() <= 1e-12 * pairing.re.abs().max(1.0));
        // linearity
        let phi = random_state(basis, 2);
        let combo = psi.add_scaled(&phi, Complex64::new(0.3, -0.8));
        let lhs = apply_dirac(basis, &combo).unwrap();
        let rhs = dpsi.add_scaled(
            &apply_dirac(basis, &phi).unwrap(),
            Complex64::new(0.3, -0.8),
        );
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
        }
    }

    #[test]
    fn hartree_of_lowest_dirichlet_density() {
        // Feeding the density e_1 (lowest Dirichlet mode) through the test
        // hook must return mu_1^(-1/2) e_1 with mu_1 = j_{0,1}^2.
        let basis = fixture();
        let n = basis.dirichlet_modes().len();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let density = basis.synth_scalar(&e1).unwrap();
        let v = hartree_from_density(basis, &density).unwrap();
        let mu1 = basis.dirichlet_modes()[0].eigenvalue;
        assert!((mu1 - 5.783185962946785).abs() < 1e-12);
        for (idx, &c) in v.coeffs().iter().enumerate() {
            let expect = if idx == 0 { 1.0 / mu1.sqrt() } else { 0.0 };
            assert!((c - expect).abs() <= 1e-9, "coeff {idx}: {c}");
        }
    }

    #[test]
    fn hartree_scales_quadratically() {
        let basis = fixture();
        let psi = random_state(basis, 3);
        let v1 = hartree_potential(basis, &psi).unwrap();
        let t = 1.7;
        let v2 = hartree_potential(basis, &psi.scaled(Complex64::new(t, 0.0))).unwrap();
        for (a, b) in v1.coeffs().iter().zip(v2.coeffs()) {
            assert!((t * t * a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn hartree_projection_identity() {
        // mu_n^(1/2) * (n-th coefficient of V) recovers <|psi|^2, e_n>; the
        // right-hand side is recomputed independently from the raw density.
        let basis = fixture();
        for seed in [4u64, 5, 6] {
            let psi = random_state(basis, seed);
            let d = density(basis, &psi).unwrap();
            let v = hartree_potential(basis, &psi).unwrap();
            let projections = basis.analyze_scalar(&d).unwrap();
            let scale = projections
                .iter()
                .fold(0.0_f64, |acc, p| acc.max(p.abs()))
                .max(1.0);
            for ((coeff, mode), p) in v
                .coeffs()
                .iter()
                .zip(basis.dirichlet_modes())
                .zip(&projections)
            {
                let defect = (mode.eigenvalue.sqrt() * coeff - p).abs();
                assert!(defect <= 1e-12 * scale, "defect {defect:e}");
            }
        }
    }

    #[test]
    fn scalar_field_cache_matches_synthesis() {
        let basis = fixture();
        let psi = random_state(basis, 7);
        let v = hartree_potential(basis, &psi).unwrap();
        let resynth = basis.synth_scalar(v.coeffs()).unwrap();
        for (a, b) in v.values().iter().zip(&resynth) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn q_form_positive_and_consistent() {
        let basis = fixture();
        assert_eq!(q_form(basis, &SpinorState::zero(basis)).unwrap(), 0.0);
        for seed in 0..20u64 {
            let psi = random_state(basis, 100 + seed);
            let q = q_form(basis, &psi).unwrap();
            assert!(q >= -1e-10 * q.abs().max(1.0), "q = {q}");
            // grid quadrature route vs spectral route
            let d = density(basis, &psi).unwrap();
            let p = basis.analyze_scalar(&d).unwrap();
            let spectral: f64 = p
                .iter()
                .zip(basis.dirichlet_modes())
                .map(|(pn, mode)| pn * pn / mode.eigenvalue.sqrt())
                .sum();
            assert!((q - spectral).abs() <= 1e-12 * spectral.max(1e-30));
        }
    }

    #[test]
    fn action_on_a_single_mode() {
        let basis = fixture();
        let params = ProblemParams::new(0.3, -1.0);
        assert_eq!(
            action(basis, &SpinorState::zero(basis), &params).unwrap(),
            0.0
        );
        let k = 2usize;
        let unit = SpinorState::unit_mode(basis, k).unwrap();
        let qk = q_form(basis, &unit).unwrap();
        let lambda = basis.dirac_modes()[k].eigenvalue;
        for t in [0.5, 1.0, 2.3] {
            let scaled = unit.scaled(Complex64::new(t, 0.0));
            let i = action(basis, &scaled, &params).unwrap();
            let expect = 0.5 * t * t * (lambda - params.omega) - 0.25 * t.powi(4) * qk;
            assert!((i - expect).abs() <= 1e-10 * expect.abs().max(1.0));
            // kappa = +1 flips the quartic sign
            let plus = ProblemParams::new(params.omega, 1.0);
            let ip = action(basis, &scaled, &plus).unwrap();
            let expect_p = 0.5 * t * t * (lambda - params.omega) + 0.25 * t.powi(4) * qk;
            assert!((ip - expect_p).abs() <= 1e-10 * expect_p.abs().max(1.0));
        }
    }

    #[test]
    fn action_splitting_form() {
        let basis = fixture();
        let params = ProblemParams::new(0.2, -1.0);
        for seed in [11u64, 12] {
            let psi = random_state(basis, seed);
            let (plus, minus) = spectral_split(basis, &psi, &params).unwrap();
            let np = x_norm(basis, &plus, &params, false).unwrap();
            let nm = x_norm(basis, &minus, &params, false).unwrap();
            let quartic = 0.25 * q_form(basis, &psi).unwrap();
            let i = action(basis, &psi, &params).unwrap();
            let split_form = 0.5 * (np * np - nm * nm) - quartic;
            assert!((i - split_form).abs() <= 1e-10 * i.abs().max(1.0));
        }
    }

    #[test]
    fn gauge_invariance_of_action() {
        let basis = fixture();
        let params = ProblemParams::default();
        let psi = random_state(basis, 13);
        let i0 = action(basis, &psi, &params).unwrap();
        for theta in [std::f64::consts::PI / 7.0, 1.0, std::f64::consts::PI] {
            let rotated = psi.scaled(Complex64::from_polar(1.0, theta));
            let i1 = action(basis, &rotated, &params).unwrap();
            assert!((i0 - i1).abs() <= 1e-12 * i0.abs().max(1.0));
        }
    }

    #[test]
    fn residual_zero_state_and_single_mode_balance() {
        let basis = fixture();
        let params = ProblemParams::default();
        let zero = residual(basis, &SpinorState::zero(basis), &params).unwrap();
        assert!(zero.norm() == 0.0);

        // first positive mode, balance amplitude t^2 = lambda / Q(psi_k)
        let (k, lambda) = basis
            .dirac_modes()
            .iter()
            .enumerate()
            .find(|(_, m)| m.eigenvalue > 0.0)
            .map(|(k, m)| (k, m.eigenvalue))
            .unwrap();
        let unit = SpinorState::unit_mode(basis, k).unwrap();
        let q = q_form(basis, &unit).unwrap();
        let t = ((lambda - params.omega) / q).sqrt();
        let state = unit.scaled(Complex64::new(t, 0.0));
        let f = residual(basis, &state, &params).unwrap();
        assert!(
            f.coeffs()[k].norm() <= 1e-10 * t.max(1.0),
            "on-mode residual {:e}",
            f.coeffs()[k].norm()
        );
    }

    #[test]
    fn self_adjointness_of_potential_multiplication() {
        let basis = fixture();
        let psi = random_state(basis, 17);
        let phi = random_state(basis, 18);
        let chi = random_state(basis, 19);
        let v = hartree_potential(basis, &chi).unwrap();
        let vpsi = basis
            .analyze_spinor(&scale_grid(
                &basis.synth_spinor(psi.coeffs()).unwrap(),
                v.values(),
            ))
            .unwrap();
        let vphi = basis
            .analyze_spinor(&scale_grid(
                &basis.synth_spinor(phi.coeffs()).unwrap(),
                v.values(),
            ))
            .unwrap();
        let vpsi = SpinorState::from_coeffs(basis, vpsi).unwrap();
        let vphi = SpinorState::from_coeffs(basis, vphi).unwrap();
        let lhs = vpsi.inner(&phi); // <V psi, phi>
        let rhs = psi.inner(&vphi); // <psi, V phi>
        assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
    }

    #[test]
    fn gradient_matches_central_differences() {
        let basis = fixture();
        let params = ProblemParams::new(0.1, -1.0);
        let n = basis.dirac_modes().len();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for _ in 0..4 {
            let psi = random_state(basis, rng.gen());
            let grad = action_gradient(basis, &psi, &params).unwrap();
            let h: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let analytic: f64 = grad.iter().zip(&h).map(|(g, d)| g * d).sum();
            let eps = 1e-6;
            let mut fwd = psi.to_real();
            let mut bwd = psi.to_real();
            for i in 0..2 * n {
                fwd[i] += eps * h[i];
                bwd[i] -= eps * h[i];
            }
            let ip = action(basis, &SpinorState::from_real(basis, &fwd).unwrap(), &params).unwrap();
            let im = action(basis, &SpinorState::from_real(basis, &bwd).unwrap(), &params).unwrap();
            let fd = (ip - im) / (2.0 * eps);
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "fd {fd} vs analytic {analytic}"
            );
        }
    }

    #[test]
    fn gradient_vanishes_along_the_gauge_orbit() {
        let basis = fixture();
        let params = ProblemParams::default();
        let psi = random_state(basis, 29);
        let grad = action_gradient(basis, &psi, &params).unwrap();
        let gauge = psi.scaled(Complex64::new(0.0, 1.0)).to_real();
        let derivative: f64 = grad.iter().zip(&gauge).map(|(g, d)| g * d).sum();
        let scale = grad.iter().map(|g| g * g).sum::<f64>().sqrt() * psi.norm();
        assert!(derivative.abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn jacobian_at_zero_is_the_linear_operator() {
        let basis = fixture();
        let params = ProblemParams::new(0.4, -1.0);
        let h = random_state(basis, 31);
        let out = jacobian_apply(basis, &SpinorState::zero(basis), &h, &params).unwrap();
        for ((o, c), mode) in out
            .coeffs()
            .iter()
            .zip(h.coeffs())
            .zip(basis.dirac_modes())
        {
            let expect = (mode.eigenvalue - params.omega) * c;
            assert!((o - expect).norm() <= 1e-12 * expect.norm().max(1.0));
        }
    }

    #[test]
    fn jacobian_matches_forward_differences() {
        let basis = fixture();
        let params = ProblemParams::default();
        let psi = random_state(basis, 37);
        let h = random_state(basis, 38);
        let h = h.scaled(Complex64::new(1.0 / h.norm(), 0.0));
        let jh = jacobian_apply(basis, &psi, &h, &params).unwrap();
        let eps = 1e-6;
        let f0 = residual(basis, &psi, &params).unwrap();
        let f1 = residual(basis, &psi.add_scaled(&h, Complex64::new(eps, 0.0)), &params).unwrap();
        let mut defect = 0.0_f64;
        for ((a, b), j) in f1.coeffs().iter().zip(f0.coeffs()).zip(jh.coeffs()) {
            defect += ((a - b) / eps - j).norm_sqr();
        }
        let defect = defect.sqrt();
        assert!(defect <= 1e-5, "jacobian fd defect {defect:e}");
    }

    #[test]
    fn jacobian_matrix_is_symmetric_and_matches_apply() {
        let basis = fixture();
        let params = ProblemParams::new(0.15, -1.0);
        let psi = random_state(basis, 41);
        let n = basis.dirac_modes().len();
        let jac = jacobian_matrix(basis, &psi, &params).unwrap();
        let scale = jac.amax();
        for j in 0..2 * n {
            for k in 0..j {
                assert!(
                    (jac[(j, k)] - jac[(k, j)]).abs() <= 1e-11 * scale,
                    "asymmetry at ({j},{k})"
                );
            }
        }
        let mut rng = ChaCha12Rng::seed_from_u64(43);
        for _ in 0..5 {
            let h = random_state(basis, rng.gen());
            let via_apply = jacobian_apply(basis, &psi, &h, &params).unwrap().to_real();
            let hr = nalgebra::DVector::from_vec(h.to_real());
            let via_matrix = &jac * hr;
            for (a, b) in via_apply.iter().zip(via_matrix.iter()) {
                assert!((a - b).abs() <= 1e-11 * scale.max(1.0), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn split_reconstructs_and_is_orthogonal() {
        let basis = fixture();
        let params = ProblemParams::default();
        let psi = random_state(basis, 47);
        let (plus, minus) = spectral_split(basis, &psi, &params).unwrap();
        for ((p, m), c) in plus.coeffs().iter().zip(minus.coeffs()).zip(psi.coeffs()) {
            assert_eq!(p + m, *c);
        }
        assert_eq!(plus.inner(&minus), ZERO);
        for (k, mode) in basis.dirac_modes().iter().enumerate() {
            if mode.eigenvalue > 0.0 {
                assert_eq!(minus.coeffs()[k], ZERO);
            } else {
                assert_eq!(plus.coeffs()[k], ZERO);
            }
        }
    }

    #[test]
    fn x_norm_of_unit_mode_and_pythagoras() {
        let basis = fixture();
        let params = ProblemParams::new(0.25, -1.0);
        let k = 4usize;
        let unit = SpinorState::unit_mode(basis, k).unwrap();
        let expect = (basis.dirac_modes()[k].eigenvalue - params.omega)
            .abs()
            .sqrt();
        assert!((x_norm(basis, &unit, &params, false).unwrap() - expect).abs() < 1e-13);

        let psi = random_state(basis, 53);
        let (plus, minus) = spectral_split(basis, &psi, &params).unwrap();
        let total = x_norm(basis, &psi, &params, false).unwrap();
        let np = x_norm(basis, &plus, &params, false).unwrap();
        let nm = x_norm(basis, &minus, &params, false).unwrap();
        assert!((total * total - np * np - nm * nm).abs() <= 1e-12 * total * total);
    }

    #[test]
    fn hartree_positivity_on_random_states() {
        let basis = fixture();
        for seed in 0..50u64 {
            let psi = random_state(basis, 1000 + seed);
            let v = hartree_potential(basis, &psi).unwrap();
            let (min, max) = (v.min_value(), v.max_value());
            assert!(
                min >= -1e-6 * max.max(1e-30),
                "seed {seed}: min {min:e}, max {max:e}"
            );
        }
    }

    #[test]
    fn omega_validation_rejects_spectrum_hits() {
        let basis = fixture();
        let lambda = basis.min_abs_eigenvalue();
        assert!(ProblemParams::new(lambda, -1.0).validate(basis).is_err());
        assert!(ProblemParams::new(0.0, -1.0).validate(basis).is_ok());
        assert!(ProblemParams::new(0.0, 0.0).validate(basis).is_err());
    }

    #[test]
    fn basis_mismatch_is_detected() {
        let basis = fixture();
        let other = build_basis(
            Domain::unit(),
            LatticeParameter::one(),
            Truncation::coarse(),
        )
        .unwrap();
        let psi = SpinorState::zero(&other);
        assert!(matches!(
            apply_dirac(basis, &psi),
            Err(OperatorError::Basis(BasisError::BasisMismatch))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn q_form_is_4_homogeneous(seed in 0u64..1000, t in 0.05f64..3.0) {
            let basis = fixture();
            let psi = random_state(basis, seed);
            let q1 = q_form(basis, &psi).unwrap();
            let q2 = q_form(basis, &psi.scaled(Complex64::new(t, 0.0))).unwrap();
            prop_assert!((q2 - t.powi(4) * q1).abs() <= 1e-10 * q2.abs().max(1e-12));
        }

        #[test]
        fn split_preserves_x_norm(seed in 0u64..1000, omega in -1.0f64..1.0) {
            let basis = fixture();
            let params = ProblemParams::new(omega, -1.0);
            let psi = random_state(basis, seed);
            let (plus, minus) = spectral_split(basis, &psi, &params).unwrap();
            let total = x_norm(basis, &psi, &params, true).unwrap();
            let np = x_norm(basis, &plus, &params, true).unwrap();
            let nm = x_norm(basis, &minus, &params, true).unwrap();
            prop_assert!((total * total - np * np - nm * nm).abs() <= 1e-12 * total * total);
        }
    }
}
