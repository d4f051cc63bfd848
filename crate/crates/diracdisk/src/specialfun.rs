//! Bessel functions of the first kind and the root tables built from them.
//!
//! Everything in this module is self-contained: integer-order `J_m` is
//! evaluated from its ascending power series where the series is
//! cancellation-free, and by Miller's backward recurrence (normalised with
//! the identity `J_0 + 2*sum_k J_{2k} = 1`) elsewhere. Roots of the secular
//! functions are bracketed by a uniform scan and refined by bisection plus
//! one secant polish. The rest of the crate treats these routines as its
//! semi-analytic oracle, so they carry the tightest tests.

use thiserror::Error;

/// Largest supported Bessel order for the public entry points.
pub const MAX_ORDER: u32 = 64;
/// Largest supported argument for the public entry points.
pub const MAX_ARGUMENT: f64 = 200.0;

/// Bisection width at which root refinement stops.
const BISECT_TOL: f64 = 1e-14;
/// Uniform bracketing scan step.
const SCAN_STEP: f64 = 0.1;
/// Residual bound every returned root must satisfy.
pub const ROOT_RESIDUAL_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFunError {
    #[error("Bessel order {order} outside supported range 0..={max}")]
    OrderOutOfRange { order: i64, max: u32 },
    #[error("Bessel argument {argument} outside supported range [0, {max}]")]
    ArgumentOutOfRange { argument: f64, max: f64 },
    #[error("no bracket for root {index} of {family} before x = {limit} (scan step {step})")]
    BracketingFailure {
        family: String,
        index: usize,
        limit: f64,
        step: f64,
    },
    #[error("root {root} of {family} has residual {residual:e}, above {bound:e}")]
    ResidualTooLarge {
        family: String,
        root: f64,
        residual: f64,
        bound: f64,
    },
}

/// Which secular function a [`RootTable`] holds the roots of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootFamily {
    /// Zeros of `J_m`, i.e. Dirichlet-Laplacian eigenvalue parameters.
    Dirichlet { order: u32 },
    /// Roots of `J_m(k) - J_{m+1}(k)`, positive-energy boundary channels.
    DiracPlus { channel: i32 },
    /// Roots of `J_m(k) + J_{m+1}(k)`, negative-energy boundary channels.
    DiracMinus { channel: i32 },
}

impl std::fmt::Display for RootFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootFamily::Dirichlet { order } => write!(f, "J_{order}"),
            RootFamily::DiracPlus { channel } => write!(f, "J_{channel} - J_{}", channel + 1),
            RootFamily::DiracMinus { channel } => write!(f, "J_{channel} + J_{}", channel + 1),
        }
    }
}

/// Sign of the boundary secular function `J_m(k) -/+ J_{m+1}(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecularSign {
    Plus,
    Minus,
}

impl SecularSign {
    pub fn factor(self) -> f64 {
        match self {
            SecularSign::Plus => 1.0,
            SecularSign::Minus => -1.0,
        }
    }
}

/// Ascending positive roots of one secular function, each paired with the
/// residual `|f(root)|` actually measured after refinement.
#[derive(Debug, Clone)]
pub struct RootTable {
    family: RootFamily,
    roots: Vec<f64>,
    residuals: Vec<f64>,
}

impl RootTable {
    fn new(family: RootFamily, roots: Vec<f64>, residuals: Vec<f64>) -> Result<Self, SpecialFunError> {
        debug_assert_eq!(roots.len(), residuals.len());
        for (&root, &residual) in roots.iter().zip(&residuals) {
            if !(root > 0.0) || residual > ROOT_RESIDUAL_BOUND {
                return Err(SpecialFunError::ResidualTooLarge {
                    family: family.to_string(),
                    root,
                    residual,
                    bound: ROOT_RESIDUAL_BOUND,
                });
            }
        }
        debug_assert!(roots.windows(2).all(|w| w[0] < w[1]));
        Ok(Self {
            family,
            roots,
            residuals,
        })
    }

    pub fn family(&self) -> RootFamily {
        self.family
    }

    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

fn check_range(m: u32, x: f64) -> Result<(), SpecialFunError> {
    if m > MAX_ORDER {
        return Err(SpecialFunError::OrderOutOfRange {
            order: m as i64,
            max: MAX_ORDER,
        });
    }
    if !(0.0..=MAX_ARGUMENT).contains(&x) || !x.is_finite() {
        return Err(SpecialFunError::ArgumentOutOfRange {
            argument: x,
            max: MAX_ARGUMENT,
        });
    }
    Ok(())
}

/// Bessel function of the first kind of non-negative integer order.
pub fn bessel_j(m: u32, x: f64) -> Result<f64, SpecialFunError> {
    check_range(m, x)?;
    Ok(bessel_j_raw(m, x))
}

/// `J_m` for any integer order, via the reflection `J_{-m} = (-1)^m J_m`.
pub fn bessel_j_signed(m: i32, x: f64) -> Result<f64, SpecialFunError> {
    let order = m.unsigned_abs();
    let value = bessel_j(order, x)?;
    if m < 0 && order % 2 == 1 {
        Ok(-value)
    } else {
        Ok(value)
    }
}

/// Unchecked core evaluation; callers guarantee `x >= 0`. Orders up to
/// `MAX_ORDER + 1` are accepted so that secular functions can form `J_{m+1}`.
pub(crate) fn bessel_j_raw(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    // The ascending series is used only where its terms decay monotonically
    // from the first one, i.e. (x/2)^2 < m+1; there it is cancellation-free
    // and accurate to a few ulps. Everywhere else backward recurrence wins.
    if x <= 2.0 * ((m as f64) + 1.0).sqrt() {
        series_j(m, x)
    } else {
        miller_j(m, x)
    }
}

/// Ascending power series, valid (and monotone) for x <= 2*sqrt(m+1).
fn series_j(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    let ratio = -half * half;
    for j in 1..400 {
        term *= ratio / (j as f64 * (m as f64 + j as f64));
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
    }
    sum
}

/// Miller backward recurrence, normalised with `J_0(x) + 2 sum J_{2k}(x) = 1`.
fn miller_j(m: u32, x: f64) -> f64 {
    let start = miller_start(m, x);
    let mut f_up = 0.0_f64; // f_{k+1}
    let mut f = 1e-300_f64; // f_k
    let mut norm = 0.0_f64; // running J_0 + 2*sum_{even k >= 2} J_k
    let mut target = 0.0_f64;
    for k in (0..=start).rev() {
        let f_down = (2.0 * (k as f64 + 1.0) / x) * f - f_up;
        f_up = f;
        f = f_down;
        // f now approximates c * J_k(x).
        if k > 0 && k % 2 == 0 {
            norm += 2.0 * f;
        } else if k == 0 {
            norm += f;
        }
        if k == m as usize {
            target = f;
        }
        if f.abs() > 1e250 {
            f /= 1e250;
            f_up /= 1e250;
            norm /= 1e250;
            target /= 1e250;
        }
    }
    target / norm
}

/// Smallest safe starting index for the backward recurrence. Both the
/// contaminating second solution (damped like exp(-2 eta)) and the truncated
/// tail of the normalisation sum (damped like exp(-eta)) must fall below
/// 1e-19, with eta the Debye decay exponent of `J_nu(x)` for `nu > x`.
fn miller_start(m: u32, x: f64) -> usize {
    let base = (m as f64).max(x).ceil() as usize + 10;
    let mut nu = base;
    loop {
        let z = x / nu as f64;
        let w = (1.0 - z * z).max(0.0).sqrt();
        let eta = nu as f64 * (((1.0 + w) / z).ln() - w);
        if eta >= 45.0 {
            return nu;
        }
        nu += 4;
    }
}

/// First `count` positive zeros of `J_m`.
pub fn dirichlet_roots(m: u32, count: usize) -> Result<RootTable, SpecialFunError> {
    check_range(m, 0.0)?;
    let family = RootFamily::Dirichlet { order: m };
    let f = |x: f64| bessel_j_raw(m, x);
    let (roots, residuals) = scan_roots(&f, count, family)?;
    RootTable::new(family, roots, residuals)
}

/// Boundary secular function `J_m(k) - sign * J_{m+1}(k)` for any integer
/// channel `m`; negative channels go through the reflection formula.
pub fn dirac_secular(m: i32, sign: SecularSign, k: f64) -> Result<f64, SpecialFunError> {
    check_range(m.unsigned_abs(), k)?;
    Ok(dirac_secular_raw(m, sign, k))
}

fn dirac_secular_raw(m: i32, sign: SecularSign, k: f64) -> f64 {
    let jm = signed_raw(m, k);
    let jm1 = signed_raw(m + 1, k);
    jm - sign.factor() * jm1
}

fn signed_raw(m: i32, x: f64) -> f64 {
    let order = m.unsigned_abs();
    let value = bessel_j_raw(order, x);
    if m < 0 && order % 2 == 1 {
        -value
    } else {
        value
    }
}

/// First `count` positive roots of the boundary secular function for
/// angular channel `m`. These are the eigenvalue parameters of the Dirac
/// operator on the unit disk: positive-energy channels use the `-` branch
/// of the sign convention below, negative-energy ones the `+`.
pub fn dirac_secular_roots(
    m: i32,
    sign: SecularSign,
    count: usize,
) -> Result<RootTable, SpecialFunError> {
    check_range(m.unsigned_abs(), 0.0)?;
    check_range(m.unsigned_abs() + 1, 0.0).map_err(|_| SpecialFunError::OrderOutOfRange {
        order: m as i64 + 1,
        max: MAX_ORDER,
    })?;
    let family = match sign {
        SecularSign::Plus => RootFamily::DiracPlus { channel: m },
        SecularSign::Minus => RootFamily::DiracMinus { channel: m },
    };
    let f = |k: f64| dirac_secular_raw(m, sign, k);
    let (roots, residuals) = scan_roots(&f, count, family)?;
    RootTable::new(family, roots, residuals)
}

/// Uniform scan from the origin, bisection refinement, one secant polish.
fn scan_roots<F: Fn(f64) -> f64>(
    f: &F,
    count: usize,
    family: RootFamily,
) -> Result<(Vec<f64>, Vec<f64>), SpecialFunError> {
    let mut roots = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut a = 0.0_f64;
    let mut fa = f(a);
    while roots.len() < count {
        let b = a + SCAN_STEP;
        if b > MAX_ARGUMENT {
            return Err(SpecialFunError::BracketingFailure {
                family: family.to_string(),
                index: roots.len() + 1,
                limit: MAX_ARGUMENT,
                step: SCAN_STEP,
            });
        }
        let fb = f(b);
        if fa == 0.0 && a > 0.0 {
            roots.push(a);
            residuals.push(0.0);
        } else if fa * fb < 0.0 {
            let root = refine_root(f, a, b, fa, fb);
            let residual = f(root).abs();
            roots.push(root);
            residuals.push(residual);
        }
        a = b;
        fa = fb;
    }
    Ok((roots, residuals))
}

fn refine_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
    while b - a > BISECT_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fa * fm < 0.0 {
            b = mid;
            fb = fm;
        } else {
            a = mid;
            fa = fm;
        }
    }
    // One secant step inside the final bracket.
    if fb != fa {
        let candidate = b - fb * (b - a) / (fb - fa);
        if candidate > a && candidate < b {
            return candidate;
        }
    }
    0.5 * (a + b)
}
