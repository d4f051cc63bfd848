//! Truncated eigenbases of the Dirac and Dirichlet-Laplacian operators on a
//! disk, the quadrature grid they share, and the coefficient/grid transforms.
//!
//! The disk decouples into angular momentum channels: the Dirac eigenspinor
//! of channel `m`, radial root `k` and energy sign `s` is
//!
//! ```text
//! psi(r, theta) = N * ( J_m(k r / R) e^{i m theta},
//!                       i s u J_{m+1}(k r / R) e^{i (m+1) theta} ),
//! ```
//!
//! with eigenvalue `s |lambda| k / R` and `u = lambda / |lambda|` the phase
//! of the lattice parameter. The boundary condition collapses to the secular
//! equation `J_m(k) = s J_{m+1}(k)`. Dirichlet modes are the classical
//! `J_l(j_{l,n} r / R) {cos, sin}(l theta)` with eigenvalue `(j_{l,n}/R)^2`.
//! None of these conventions are trusted on paper: the eigenmode-residual
//! check at the bottom of this module differentiates the synthesized modes
//! numerically and compares against `lambda * psi`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::specialfun::{
    bessel_j_signed, dirac_secular_roots, dirichlet_roots, SecularSign, SpecialFunError,
};

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BasisError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Roots(#[from] SpecialFunError),
    #[error("coefficient/grid length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state was built against a different basis")]
    BasisMismatch,
}

/// Disk domain; the only geometry this crate supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    radius: f64,
}

impl Domain {
    pub fn new(radius: f64) -> Result<Self, BasisError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(BasisError::Config(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    pub fn unit() -> Self {
        Self { radius: 1.0 }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

/// The constant of the lattice matrix entering the Dirac operator. The core
/// always computes with the value 1; a general parameter scales every
/// eigenvalue by its modulus and rotates the second spinor component by its
/// phase, which is applied where modes are synthesized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParameter {
    value: Complex64,
}

impl LatticeParameter {
    pub fn new(value: Complex64) -> Result<Self, BasisError> {
        if !(value.norm() > 0.0 && value.re.is_finite() && value.im.is_finite()) {
            return Err(BasisError::Config(format!(
                "lattice parameter must be finite and nonzero, got {value}"
            )));
        }
        Ok(Self { value })
    }

    pub fn one() -> Self {
        Self {
            value: Complex64::new(1.0, 0.0),
        }
    }

    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    /// Unit phase `lambda / |lambda|` carried by the second spinor component.
    pub fn phase(&self) -> Complex64 {
        self.value / self.value.norm()
    }
}

/// Truncation parameters of a [`BasisSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    /// Largest angular channel `M`; channels span `-M..=M`.
    pub m_max: usize,
    /// Radial roots per channel and energy sign.
    pub n_radial: usize,
    /// Radial Dirichlet modes per angular order.
    pub dirichlet_radial: usize,
    /// Radial quadrature nodes.
    pub radial_nodes: usize,
    /// Angular quadrature nodes.
    pub angular_nodes: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            m_max: 8,
            n_radial: 12,
            dirichlet_radial: 24,
            radial_nodes: 64,
            angular_nodes: 48,
        }
    }
}

impl Truncation {
    /// Small truncation for cheap smoke runs.
    pub fn coarse() -> Self {
        Self {
            m_max: 2,
            n_radial: 4,
            dirichlet_radial: 8,
            radial_nodes: 32,
            angular_nodes: 16,
        }
    }

    /// Dirichlet angular order ceiling `L = 2M + 2`, the selection rule that
    /// keeps every harmonic of `|psi|^2` inside the retained scalar basis.
    pub fn dirichlet_angular_max(&self) -> usize {
        2 * self.m_max + 2
    }

    pub fn validate(&self) -> Result<(), BasisError> {
        if self.n_radial == 0 || self.dirichlet_radial == 0 {
            return Err(BasisError::Config(
                "radial mode counts must be at least 1".into(),
            ));
        }
        if self.radial_nodes < 8 {
            return Err(BasisError::Config(format!(
                "need at least 8 radial quadrature nodes, got {}",
                self.radial_nodes
            )));
        }
        // Anti-aliasing: |psi|^2 carries angular harmonics up to 2M+2, so the
        // products analysed back onto the bases reach 4M+4.
        let needed = 4 * self.m_max + 8;
        if self.angular_nodes < needed {
            return Err(BasisError::Config(format!(
                "angular nodes {} below anti-aliasing requirement {} (4M+8)",
                self.angular_nodes, needed
            )));
        }
        if self.dirichlet_angular_max() > crate::specialfun::MAX_ORDER as usize {
            return Err(BasisError::Config(format!(
                "angular channel cap {} exceeds supported Bessel order {}",
                self.m_max,
                crate::specialfun::MAX_ORDER
            )));
        }
        Ok(())
    }

    /// Counts of the modes a basis with this truncation will hold.
    pub fn dirac_mode_count(&self) -> usize {
        (2 * self.m_max + 1) * 2 * self.n_radial
    }

    pub fn dirichlet_mode_count(&self) -> usize {
        (2 * self.dirichlet_angular_max() + 1) * self.dirichlet_radial
    }
}

/// Product quadrature: Gauss-Legendre in radius (mapped to `[0, R]`, weights
/// carrying the Jacobian factor `r`), uniform trapezoidal nodes in angle.
/// Node `(i, j)` lives at flat index `i * angular_nodes + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadGrid {
    radius: f64,
    radial: Vec<f64>,
    radial_weight: Vec<f64>,
    theta: Vec<f64>,
}

impl QuadGrid {
    pub fn new(radius: f64, radial_nodes: usize, angular_nodes: usize) -> Self {
        let (nodes, weights) = gauss_legendre(radial_nodes);
        let mut radial = Vec::with_capacity(radial_nodes);
        let mut radial_weight = Vec::with_capacity(radial_nodes);
        for (t, w) in nodes.iter().zip(&weights) {
            let r = 0.5 * radius * (t + 1.0);
            radial.push(r);
            radial_weight.push(0.5 * radius * w * r);
        }
        let theta = (0..angular_nodes)
            .map(|j| TAU * j as f64 / angular_nodes as f64)
            .collect();
        Self {
            radius,
            radial,
            radial_weight,
            theta,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    /// Gauss-Legendre weight times the Jacobian `r`, per radial node.
    pub fn radial_weight(&self) -> &[f64] {
        &self.radial_weight
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn radial_count(&self) -> usize {
        self.radial.len()
    }

    pub fn angular_count(&self) -> usize {
        self.theta.len()
    }

    pub fn node_count(&self) -> usize {
        self.radial.len() * self.theta.len()
    }

    /// Full area weight of every node in radial row `i`.
    pub fn area_weight(&self, i: usize) -> f64 {
        self.radial_weight[i] * TAU / self.theta.len() as f64
    }

    pub fn total_area(&self) -> f64 {
        self.radial_weight.iter().sum::<f64>() * TAU
    }

    /// Integrate a real function sampled on the grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let nt = self.theta.len();
        let mut sum = 0.0;
        for (i, &w) in self.radial_weight.iter().enumerate() {
            let mut row = 0.0;
            for j in 0..nt {
                row += values[i * nt + j];
            }
            sum += w * row;
        }
        sum * TAU / nt as f64
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Energy sign of a Dirac mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EnergySign {
    Plus,
    Minus,
}

impl EnergySign {
    pub fn factor(self) -> f64 {
        match self {
            EnergySign::Plus => 1.0,
            EnergySign::Minus => -1.0,
        }
    }

    pub fn secular(self) -> SecularSign {
        match self {
            EnergySign::Plus => SecularSign::Plus,
            EnergySign::Minus => SecularSign::Minus,
        }
    }
}

/// One eigenpair of the Dirac operator on the disk.
#[derive(Debug, Clone)]
pub struct DiracMode {
    /// Angular channel of the first spinor component.
    pub m: i32,
    /// Radial root index, 1-based.
    pub n: usize,
    pub sign: EnergySign,
    /// Secular root; the radial wavenumber is `k / R`.
    pub k: f64,
    /// `sign * |lambda| * k / R`.
    pub eigenvalue: f64,
    /// L2 normalization constant.
    pub norm: f64,
    secular_residual: f64,
    radial_up: Vec<f64>,
    radial_dn: Vec<f64>,
}

impl DiracMode {
    pub fn secular_residual(&self) -> f64 {
        self.secular_residual
    }

    pub(crate) fn radial_up(&self) -> &[f64] {
        &self.radial_up
    }

    pub(crate) fn radial_dn(&self) -> &[f64] {
        &self.radial_dn
    }
}

/// Angular factor of a real Dirichlet mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AngularKind {
    Cos,
    Sin,
}

/// One eigenpair of the Dirichlet Laplacian on the disk.
#[derive(Debug, Clone)]
pub struct DirichletMode {
    pub l: u32,
    pub kind: AngularKind,
    /// Radial root index, 1-based.
    pub n: usize,
    /// Zero `j_{l,n}` of `J_l`.
    pub root: f64,
    /// `(j_{l,n} / R)^2`.
    pub eigenvalue: f64,
    pub norm: f64,
    radial: Vec<f64>,
}

impl DirichletMode {
    pub(crate) fn radial(&self) -> &[f64] {
        &self.radial
    }
}

/// Identity token tying states to the basis they were expanded in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisId(pub u64);

fn fold_bits(acc: u64, bits: u64) -> u64 {
    // FNV-1a over 64-bit words; deterministic across runs and platforms.
    let mut acc = acc;
    let mut b = bits;
    for _ in 0..8 {
        acc = (acc ^ (b & 0xff)).wrapping_mul(0x100000001b3);
        b >>= 8;
    }
    acc
}

/// Complex spinor values on the quadrature grid, one pair per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorGrid {
    pub up: Vec<Complex64>,
    pub dn: Vec<Complex64>,
}

impl SpinorGrid {
    pub fn zeros(nodes: usize) -> Self {
        Self {
            up: vec![Complex64::new(0.0, 0.0); nodes],
            dn: vec![Complex64::new(0.0, 0.0); nodes],
        }
    }
}

/// Radial profiles per angular harmonic; harmonic `h` lives at index
/// `h + offset`.
#[derive(Debug, Clone)]
pub(crate) struct HarmonicProfiles {
    pub offset: i32,
    pub up: Vec<Vec<Complex64>>,
    pub dn: Vec<Vec<Complex64>>,
}

impl HarmonicProfiles {
    fn zeros(offset: i32, harmonics: usize, radial: usize) -> Self {
        Self {
            offset,
            up: vec![vec![Complex64::new(0.0, 0.0); radial]; harmonics],
            dn: vec![vec![Complex64::new(0.0, 0.0); radial]; harmonics],
        }
    }

    /// Reusable zeroed profile with the same shape as another.
    pub(crate) fn shell(offset: i32, harmonics: usize, radial: usize) -> Self {
        Self::zeros(offset, harmonics, radial)
    }

    pub fn index(&self, h: i32) -> usize {
        (h + self.offset) as usize
    }

    /// Overwrite `self` with the harmonic profiles of `e * psi`, where `e`
    /// is one real Dirichlet mode: multiplying by `cos(l theta)` or
    /// `sin(l theta)` shifts every harmonic of `psi` by `+/- l`, so
    ///
    /// ```text
    /// cos: G[h] =      RT(r)/2 * (H[h-l] + H[h+l])
    /// sin: G[h] = -i * RT(r)/2 * (H[h-l] - H[h+l])
    /// ```
    ///
    /// Harmonics of the product outside the stored band are dropped; they
    /// cannot couple back to any retained Dirac mode.
    pub(crate) fn fill_product(&mut self, psi: &HarmonicProfiles, mode: &DirichletMode) {
        debug_assert_eq!(self.offset, psi.offset);
        let count = self.up.len() as i32;
        let l = mode.l as i32;
        let rt = mode.radial();
        let nr = rt.len();
        let factor = match mode.kind {
            AngularKind::Cos => Complex64::new(0.5, 0.0),
            AngularKind::Sin => Complex64::new(0.0, -0.5),
        };
        let sign = match mode.kind {
            AngularKind::Cos => 1.0,
            AngularKind::Sin => -1.0,
        };
        for hi in 0..count {
            let lo_idx = hi - l;
            let hi_idx = hi + l;
            for (dst, src) in [
                (&mut self.up[hi as usize], &psi.up),
                (&mut self.dn[hi as usize], &psi.dn),
            ] {
                let low = (lo_idx >= 0).then(|| &src[lo_idx as usize]);
                let high = (hi_idx < count).then(|| &src[hi_idx as usize]);
                for i in 0..nr {
                    let mut v = Complex64::new(0.0, 0.0);
                    if let Some(row) = low {
                        v += row[i];
                    }
                    if let Some(row) = high {
                        v += sign * row[i];
                    }
                    dst[i] = factor * rt[i] * v;
                }
            }
        }
    }
}

/// Cos/sin radial profiles of a real scalar field, `l` from 0 to `L`.
#[derive(Debug, Clone)]
pub(crate) struct ScalarHarmonics {
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
}

impl ScalarHarmonics {
    fn zeros(orders: usize, radial: usize) -> Self {
        Self {
            cos: vec![vec![0.0; radial]; orders],
            sin: vec![vec![0.0; radial]; orders],
        }
    }
}

/// A truncated pair of eigenbases over one disk and grid.
#[derive(Debug, Clone)]
pub struct BasisSet {
    domain: Domain,
    lattice: LatticeParameter,
    trunc: Truncation,
    grid: QuadGrid,
    dirac: Vec<DiracMode>,
    dirichlet: Vec<DirichletMode>,
    /// `i * s * u` per Dirac mode, the constant phase of the lower component.
    dn_phase: Vec<Complex64>,
    cos_tab: Vec<Vec<f64>>,
    sin_tab: Vec<Vec<f64>>,
    id: BasisId,
}

/// Builds the truncated bases: every Dirac channel `m in -M..=M` with both
/// energy signs and `N` radial roots, every Dirichlet order `l in 0..=2M+2`
/// with `N_d` radial roots. Mode lists are sorted deterministically.
pub fn build_basis(
    domain: Domain,
    lattice: LatticeParameter,
    trunc: Truncation,
) -> Result<BasisSet, BasisError> {
    trunc.validate()?;
    let grid = QuadGrid::new(domain.radius(), trunc.radial_nodes, trunc.angular_nodes);
    let radius = domain.radius();
    let scale = lattice.modulus();

    let mut dirac = Vec::with_capacity(trunc.dirac_mode_count());
    let m_max = trunc.m_max as i32;
    // One positive/negative pair of channels per m: the positive modes of
    // channel m and their antiunitary partners, the negative modes of channel
    // -(m+1). The two secular functions agree up to an overall sign, so the
    // truncated eigenvalue multiset is symmetric to the bit.
    for pair in -m_max..=m_max {
        for sign in [EnergySign::Plus, EnergySign::Minus] {
            let m = match sign {
                EnergySign::Plus => pair,
                EnergySign::Minus => -(pair + 1),
            };
            let table = dirac_secular_roots(m, sign.secular(), trunc.n_radial)?;
            for (idx, (&k, &res)) in table.roots().iter().zip(table.residuals()).enumerate() {
                let mut radial_up = Vec::with_capacity(grid.radial_count());
                let mut radial_dn = Vec::with_capacity(grid.radial_count());
                for &r in grid.radial() {
                    let x = k * r / radius;
                    radial_up.push(bessel_j_signed(m, x)?);
                    radial_dn.push(bessel_j_signed(m + 1, x)?);
                }
                let mut norm_sq = 0.0;
                for (i, &w) in grid.radial_weight().iter().enumerate() {
                    norm_sq += w * (radial_up[i] * radial_up[i] + radial_dn[i] * radial_dn[i]);
                }
                norm_sq *= TAU;
                let norm = 1.0 / norm_sq.sqrt();
                for v in radial_up.iter_mut().chain(radial_dn.iter_mut()) {
                    *v *= norm;
                }
                dirac.push(DiracMode {
                    m,
                    n: idx + 1,
                    sign,
                    k,
                    eigenvalue: sign.factor() * scale * k / radius,
                    norm,
                    secular_residual: res,
                    radial_up,
                    radial_dn,
                });
            }
        }
    }
    dirac.sort_by(|a, b| {
        a.eigenvalue
            .abs()
            .total_cmp(&b.eigenvalue.abs())
            .then_with(|| a.sign.cmp(&b.sign))
            .then_with(|| a.m.cmp(&b.m))
            .then_with(|| a.n.cmp(&b.n))
    });

    let l_max = trunc.dirichlet_angular_max() as u32;
    let mut dirichlet = Vec::with_capacity(trunc.dirichlet_mode_count());
    for l in 0..=l_max {
        let table = dirichlet_roots(l, trunc.dirichlet_radial)?;
        for (idx, &j) in table.roots().iter().enumerate() {
            let mut radial = Vec::with_capacity(grid.radial_count());
            for &r in grid.radial() {
                radial.push(bessel_j_signed(l as i32, j * r / radius)?);
            }
            let mut radial_sq = 0.0;
            for (i, &w) in grid.radial_weight().iter().enumerate() {
                radial_sq += w * radial[i] * radial[i];
            }
            let angular_sq = if l == 0 { TAU } else { PI };
            let norm = 1.0 / (radial_sq * angular_sq).sqrt();
            let radial: Vec<f64> = radial.iter().map(|v| v * norm).collect();
            let kinds: &[AngularKind] = if l == 0 {
                &[AngularKind::Cos]
            } else {
                &[AngularKind::Cos, AngularKind::Sin]
            };
            for &kind in kinds {
                dirichlet.push(DirichletMode {
                    l,
                    kind,
                    n: idx + 1,
                    root: j,
                    eigenvalue: (j / radius) * (j / radius),
                    norm,
                    radial: radial.clone(),
                });
            }
        }
    }
    dirichlet.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then_with(|| a.l.cmp(&b.l))
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| a.n.cmp(&b.n))
    });

    let phase = lattice.phase();
    let dn_phase = dirac
        .iter()
        .map(|mode| Complex64::new(0.0, mode.sign.factor()) * phase)
        .collect();

    let table_orders = l_max as usize;
    let mut cos_tab = Vec::with_capacity(table_orders + 1);
    let mut sin_tab = Vec::with_capacity(table_orders + 1);
    for l in 0..=table_orders {
        let cos_row = grid.theta().iter().map(|t| (l as f64 * t).cos()).collect();
        let sin_row = grid.theta().iter().map(|t| (l as f64 * t).sin()).collect();
        cos_tab.push(cos_row);
        sin_tab.push(sin_row);
    }

    let mut id = 0xcbf29ce484222325_u64;
    for bits in [
        domain.radius().to_bits(),
        lattice.value().re.to_bits(),
        lattice.value().im.to_bits(),
        trunc.m_max as u64,
        trunc.n_radial as u64,
        trunc.dirichlet_radial as u64,
        trunc.radial_nodes as u64,
        trunc.angular_nodes as u64,
    ] {
        id = fold_bits(id, bits);
    }

    Ok(BasisSet {
        domain,
        lattice,
        trunc,
        grid,
        dirac,
        dirichlet,
        dn_phase,
        cos_tab,
        sin_tab,
        id: BasisId(id),
    })
}

impl BasisSet {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn lattice(&self) -> LatticeParameter {
        self.lattice
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn grid(&self) -> &QuadGrid {
        &self.grid
    }

    pub fn dirac_modes(&self) -> &[DiracMode] {
        &self.dirac
    }

    pub fn dirichlet_modes(&self) -> &[DirichletMode] {
        &self.dirichlet
    }

    pub fn id(&self) -> BasisId {
        self.id
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.dirac.iter().map(|m| m.eigenvalue)
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        // Modes are sorted by |eigenvalue|.
        self.dirac.first().map(|m| m.eigenvalue.abs()).unwrap_or(0.0)
    }

    pub(crate) fn dn_phase(&self, mode_index: usize) -> Complex64 {
        self.dn_phase[mode_index]
    }

    /// Pointwise boundary-condition defect of one mode: the absolute value
    /// of the secular function at its root, which on the disk is the
    /// angle-independent magnitude of the boundary projector applied to the
    /// mode (up to normalization).
    pub fn boundary_residual(&self, mode: &DiracMode) -> f64 {
        self.boundary_residual_at(mode, mode.k)
    }

    /// Same defect evaluated at an arbitrary radial parameter; used to probe
    /// off-root behaviour.
    pub fn boundary_residual_at(&self, mode: &DiracMode, k: f64) -> f64 {
        let jm = bessel_j_signed(mode.m, k).expect("mode order within range");
        let jm1 = bessel_j_signed(mode.m + 1, k).expect("mode order within range");
        (jm - mode.sign.factor() * jm1).abs()
    }

    fn check_dirac_len(&self, len: usize) -> Result<(), BasisError> {
        if len != self.dirac.len() {
            return Err(BasisError::LengthMismatch {
                expected: self.dirac.len(),
                got: len,
            });
        }
        Ok(())
    }

    fn check_dirichlet_len(&self, len: usize) -> Result<(), BasisError> {
        if len != self.dirichlet.len() {
            return Err(BasisError::LengthMismatch {
                expected: self.dirichlet.len(),
                got: len,
            });
        }
        Ok(())
    }

    fn check_nodes(&self, len: usize) -> Result<(), BasisError> {
        if len != self.grid.node_count() {
            return Err(BasisError::LengthMismatch {
                expected: self.grid.node_count(),
                got: len,
            });
        }
        Ok(())
    }

    fn harmonic_extent(&self) -> (i32, usize) {
        let m = self.trunc.m_max as i32;
        (m + 1, (2 * m + 3) as usize)
    }

    /// Unit phase `e^{i h theta_j}`.
    fn phase(&self, h: i32, j: usize) -> Complex64 {
        let l = h.unsigned_abs() as usize;
        let s = if h >= 0 { 1.0 } else { -1.0 };
        Complex64::new(self.cos_tab[l][j], s * self.sin_tab[l][j])
    }

    /// Radial harmonic profiles of the spinor with the given coefficients.
    pub(crate) fn spinor_coeff_harmonics(
        &self,
        coeffs: &[Complex64],
    ) -> Result<HarmonicProfiles, BasisError> {
        self.check_dirac_len(coeffs.len())?;
        let (offset, count) = self.harmonic_extent();
        let mut prof = HarmonicProfiles::zeros(offset, count, self.grid.radial_count());
        for (idx, mode) in self.dirac.iter().enumerate() {
            let c = coeffs[idx];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let up_row = &mut prof.up[(mode.m + offset) as usize];
            for (i, &v) in mode.radial_up.iter().enumerate() {
                up_row[i] += c * v;
            }
            let cd = c * self.dn_phase[idx];
            let dn_row = &mut prof.dn[(mode.m + 1 + offset) as usize];
            for (i, &v) in mode.radial_dn.iter().enumerate() {
                dn_row[i] += cd * v;
            }
        }
        Ok(prof)
    }

    pub(crate) fn spinor_grid_from_harmonics(&self, prof: &HarmonicProfiles) -> SpinorGrid {
        let nr = self.grid.radial_count();
        let nt = self.grid.angular_count();
        let mut out = SpinorGrid::zeros(nr * nt);
        for (hi, (up_row, dn_row)) in prof.up.iter().zip(&prof.dn).enumerate() {
            let h = hi as i32 - prof.offset;
            let up_live = up_row.iter().any(|v| *v != Complex64::new(0.0, 0.0));
            let dn_live = dn_row.iter().any(|v| *v != Complex64::new(0.0, 0.0));
            if !up_live && !dn_live {
                continue;
            }
            for j in 0..nt {
                let ph = self.phase(h, j);
                for i in 0..nr {
                    let node = i * nt + j;
                    if up_live {
                        out.up[node] += up_row[i] * ph;
                    }
                    if dn_live {
                        out.dn[node] += dn_row[i] * ph;
                    }
                }
            }
        }
        out
    }

    /// Angular Fourier sums `sum_j f(i, j) e^{-i h theta_j}` of grid values,
    /// for every harmonic a Dirac coefficient can see.
    fn spinor_grid_harmonics(&self, values: &SpinorGrid) -> Result<HarmonicProfiles, BasisError> {
        self.check_nodes(values.up.len())?;
        self.check_nodes(values.dn.len())?;
        let (offset, count) = self.harmonic_extent();
        let nr = self.grid.radial_count();
        let nt = self.grid.angular_count();
        let mut prof = HarmonicProfiles::zeros(offset, count, nr);
        for hi in 0..count {
            let h = hi as i32 - offset;
            for j in 0..nt {
                let ph = self.phase(-h, j);
                for i in 0..nr {
                    let node = i * nt + j;
                    prof.up[hi][i] += values.up[node] * ph;
                    prof.dn[hi][i] += values.dn[node] * ph;
                }
            }
        }
        Ok(prof)
    }

    /// Contract Fourier sums (as produced by [`Self::spinor_grid_harmonics`])
    /// against the mode tables; `scale` folds in the angular quadrature
    /// weight.
    fn contract_dirac(&self, prof: &HarmonicProfiles, scale: f64) -> Vec<Complex64> {
        let w = self.grid.radial_weight();
        let mut coeffs = Vec::with_capacity(self.dirac.len());
        for (idx, mode) in self.dirac.iter().enumerate() {
            let up_row = &prof.up[prof.index(mode.m)];
            let dn_row = &prof.dn[prof.index(mode.m + 1)];
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..w.len() {
                acc += w[i] * (mode.radial_up[i] * up_row[i])
                    + w[i] * mode.radial_dn[i] * dn_row[i] * self.dn_phase[idx].conj();
            }
            coeffs.push(acc * scale);
        }
        coeffs
    }

    /// Pointwise values of `sum_k c_k psi_k` on the grid.
    pub fn synth_spinor(&self, coeffs: &[Complex64]) -> Result<SpinorGrid, BasisError> {
        let prof = self.spinor_coeff_harmonics(coeffs)?;
        Ok(self.spinor_grid_from_harmonics(&prof))
    }

    /// Quadrature projections `<psi_k, f>` of grid values.
    pub fn analyze_spinor(&self, values: &SpinorGrid) -> Result<Vec<Complex64>, BasisError> {
        let prof = self.spinor_grid_harmonics(values)?;
        Ok(self.contract_dirac(&prof, TAU / self.grid.angular_count() as f64))
    }

    pub(crate) fn scalar_coeff_harmonics(
        &self,
        coeffs: &[f64],
    ) -> Result<ScalarHarmonics, BasisError> {
        self.check_dirichlet_len(coeffs.len())?;
        let orders = self.trunc.dirichlet_angular_max() + 1;
        let mut prof = ScalarHarmonics::zeros(orders, self.grid.radial_count());
        for (idx, mode) in self.dirichlet.iter().enumerate() {
            let v = coeffs[idx];
            if v == 0.0 {
                continue;
            }
            let row = match mode.kind {
                AngularKind::Cos => &mut prof.cos[mode.l as usize],
                AngularKind::Sin => &mut prof.sin[mode.l as usize],
            };
            for (i, &t) in mode.radial.iter().enumerate() {
                row[i] += v * t;
            }
        }
        Ok(prof)
    }

    pub(crate) fn scalar_grid_from_harmonics(&self, prof: &ScalarHarmonics) -> Vec<f64> {
        let nr = self.grid.radial_count();
        let nt = self.grid.angular_count();
        let mut out = vec![0.0; nr * nt];
        for l in 0..prof.cos.len() {
            let cos_live = prof.cos[l].iter().any(|v| *v != 0.0);
            let sin_live = l > 0 && prof.sin[l].iter().any(|v| *v != 0.0);
            if !cos_live && !sin_live {
                continue;
            }
            for j in 0..nt {
                let (c, s) = (self.cos_tab[l][j], self.sin_tab[l][j]);
                for i in 0..nr {
                    let node = i * nt + j;
                    if cos_live {
                        out[node] += prof.cos[l][i] * c;
                    }
                    if sin_live {
                        out[node] += prof.sin[l][i] * s;
                    }
                }
            }
        }
        out
    }

    fn scalar_grid_harmonics(&self, values: &[f64]) -> Result<ScalarHarmonics, BasisError> {
        self.check_nodes(values.len())?;
        let orders = self.trunc.dirichlet_angular_max() + 1;
        let nr = self.grid.radial_count();
        let nt = self.grid.angular_count();
        let mut prof = ScalarHarmonics::zeros(orders, nr);
        for l in 0..orders {
            for j in 0..nt {
                let (c, s) = (self.cos_tab[l][j], self.sin_tab[l][j]);
                for i in 0..nr {
                    let v = values[i * nt + j];
                    prof.cos[l][i] += v * c;
                    if l > 0 {
                        prof.sin[l][i] += v * s;
                    }
                }
            }
        }
        Ok(prof)
    }

    /// Pointwise values of a real field from its Dirichlet coefficients.
    pub fn synth_scalar(&self, coeffs: &[f64]) -> Result<Vec<f64>, BasisError> {
        let prof = self.scalar_coeff_harmonics(coeffs)?;
        Ok(self.scalar_grid_from_harmonics(&prof))
    }

    /// Quadrature projections `<e_n, f>` of real grid values.
    pub fn analyze_scalar(&self, values: &[f64]) -> Result<Vec<f64>, BasisError> {
        let prof = self.scalar_grid_harmonics(values)?;
        let w = self.grid.radial_weight();
        let scale = TAU / self.grid.angular_count() as f64;
        let mut coeffs = Vec::with_capacity(self.dirichlet.len());
        for mode in &self.dirichlet {
            let row = match mode.kind {
                AngularKind::Cos => &prof.cos[mode.l as usize],
                AngularKind::Sin => &prof.sin[mode.l as usize],
            };
            let mut acc = 0.0;
            for i in 0..w.len() {
                acc += w[i] * mode.radial[i] * row[i];
            }
            coeffs.push(acc * scale);
        }
        Ok(coeffs)
    }

    /// Complex angular harmonics `W_h(r)` of a real scalar field, stored for
    /// `h` in `-L..=L` at index `h + L`; satisfies `W_{-h} = conj(W_h)`.
    pub(crate) fn scalar_complex_harmonics(
        &self,
        coeffs: &[f64],
    ) -> Result<Vec<Vec<Complex64>>, BasisError> {
        let prof = self.scalar_coeff_harmonics(coeffs)?;
        let l_max = self.trunc.dirichlet_angular_max();
        let nr = self.grid.radial_count();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); nr]; 2 * l_max + 1];
        for i in 0..nr {
            out[l_max][i] = Complex64::new(prof.cos[0][i], 0.0);
        }
        for l in 1..=l_max {
            for i in 0..nr {
                let w = Complex64::new(0.5 * prof.cos[l][i], -0.5 * prof.sin[l][i]);
                out[l_max + l][i] = w;
                out[l_max - l][i] = w.conj();
            }
        }
        Ok(out)
    }
}

/// How the radial derivative is formed in the eigenmode-residual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialDerivative {
    /// Global barycentric collocation derivative through all radial nodes.
    Spectral,
    /// 6th-order finite differences on 7-point sliding stencils.
    FiniteDifference6,
}

/// Relative defects `||D psi_k - lambda_k psi_k|| / ||lambda_k psi_k||`,
/// measured on the grid away from collars at the center and rim.
#[derive(Debug, Clone)]
pub struct EigenResidualReport {
    pub per_mode: Vec<f64>,
    pub max: f64,
}

/// Fraction of the radius excluded at each end when measuring eigenmode
/// residuals.
pub const COLLAR_FRACTION: f64 = 0.05;

impl BasisSet {
    /// Differentiates every synthesized mode on the grid (spectrally in the
    /// angle, with the requested radial scheme) and applies the Dirac
    /// operator; guards the sign and phase conventions of the disk ansatz.
    pub fn eigenmode_residuals(&self, scheme: RadialDerivative) -> EigenResidualReport {
        let nr = self.grid.radial_count();
        let r = self.grid.radial();
        let w = self.grid.radial_weight();
        let deriv = match scheme {
            RadialDerivative::Spectral => spectral_derivative_matrix(r),
            RadialDerivative::FiniteDifference6 => fd6_derivative_matrix(r),
        };
        let radius = self.grid.radius();
        let lo = COLLAR_FRACTION * radius;
        let hi = (1.0 - COLLAR_FRACTION) * radius;
        let mask: Vec<bool> = r.iter().map(|&ri| ri > lo && ri < hi).collect();
        let scale = self.lattice.modulus();
        let phase = self.lattice.phase();

        let mut per_mode = Vec::with_capacity(self.dirac.len());
        let mut max = 0.0_f64;
        for (idx, mode) in self.dirac.iter().enumerate() {
            // Harmonic content of the mode: up in channel m, dn in m+1.
            let up = &mode.radial_up;
            let dn_c: Vec<Complex64> = mode
                .radial_dn
                .iter()
                .map(|&v| self.dn_phase[idx] * v)
                .collect();

            // (D psi)_up, harmonic m:    -i |lambda| (d/dr + (m+1)/r) [conj(u) dn]
            // (D psi)_dn, harmonic m+1:  -i |lambda| u (d/dr - m/r) up
            let b = (mode.m + 1) as f64;
            let a = mode.m as f64;
            let stripped = phase.conj();
            let lambda = mode.eigenvalue;
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..nr {
                if !mask[i] {
                    continue;
                }
                let mut ddn = Complex64::new(0.0, 0.0);
                let mut dup = 0.0;
                for q in 0..nr {
                    ddn += deriv[i][q] * dn_c[q];
                    dup += deriv[i][q] * up[q];
                }
                let dpsi_up =
                    Complex64::new(0.0, -scale) * stripped * (ddn + b / r[i] * dn_c[i]);
                let dpsi_dn = Complex64::new(0.0, -scale) * phase * (dup - a / r[i] * up[i]);
                let ref_up = Complex64::new(lambda * up[i], 0.0);
                let ref_dn = lambda * dn_c[i];
                num += w[i] * ((dpsi_up - ref_up).norm_sqr() + (dpsi_dn - ref_dn).norm_sqr());
                den += w[i] * (ref_up.norm_sqr() + ref_dn.norm_sqr());
            }
            let rel = (num / den).sqrt();
            per_mode.push(rel);
            max = max.max(rel);
        }
        EigenResidualReport { per_mode, max }
    }
}

/// Barycentric first-derivative matrix through arbitrary distinct nodes.
fn spectral_derivative_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    // log-magnitude barycentric weights, normalised to dodge under/overflow
    let mut logw = vec![0.0_f64; n];
    let mut sign = vec![1.0_f64; n];
    for i in 0..n {
        let mut acc = 0.0;
        let mut s = 1.0;
        for q in 0..n {
            if q != i {
                let d = x[i] - x[q];
                acc -= d.abs().ln();
                if d < 0.0 {
                    s = -s;
                }
            }
        }
        logw[i] = acc;
        sign[i] = s;
    }
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for q in 0..n {
            if q == i {
                continue;
            }
            let v = sign[q] / sign[i] * (logw[q] - logw[i]).exp() / (x[i] - x[q]);
            d[i][q] = v;
            diag -= v;
        }
        d[i][i] = diag;
    }
    d
}

/// Sliding 7-point (6th-order) finite-difference first derivative on a
/// nonuniform grid, stencil weights by the Fornberg recursion.
fn fd6_derivative_matrix(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let width = 7.min(n);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let lo = i.saturating_sub(width / 2).min(n - width);
        let stencil = &x[lo..lo + width];
        let weights = fornberg_first_derivative(x[i], stencil);
        for (s, &wgt) in weights.iter().enumerate() {
            d[i][lo + s] = wgt;
        }
    }
    d
}

/// Fornberg weights for the first derivative at `x0` on the given nodes.
fn fornberg_first_derivative(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let m = 1usize; // derivative order
    let mut c = vec![vec![0.0_f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}
