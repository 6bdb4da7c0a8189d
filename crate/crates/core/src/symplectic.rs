//! Real symplectic linear algebra on quadrature phase space.
//!
//! Every phase-space vector uses the ordering `(x_0, …, x_{m-1}, p_0, …, p_{m-1})`
//! with `x = a + a†` and `p = -i(a - a†)`, so the vacuum covariance is the
//! identity and `⟨a⟩ = (⟨x⟩ + i⟨p⟩) / 2`.
//!
//! A [`SymplecticMatrix`] `S` is the Heisenberg action of a Gaussian unitary
//! `U` on the quadrature operators, `U† β U = S β`; states transform as
//! `V → S V Sᵗ` and `mean → S mean`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on `‖S Ω Sᵗ − Ω‖_max` for a matrix to count as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

/// Index of `x_mode` in the `(x…, p…)` layout.
#[inline]
pub fn x_index(mode: usize) -> usize {
    mode
}

/// Index of `p_mode` in the `(x…, p…)` layout of `m` modes.
#[inline]
pub fn p_index(mode: usize, m: usize) -> usize {
    m + mode
}

/// The standard symplectic form `Ω = [[0, I], [-I, 0]]` on `m` modes.
pub fn symplectic_form(m: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        omega[(i, m + i)] = 1.0;
        omega[(m + i, i)] = -1.0;
    }
    omega
}

/// `‖S Ω Sᵗ − Ω‖_max`; zero for an exactly symplectic matrix.
pub fn symplecticity_error(s: &DMatrix<f64>) -> f64 {
    if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) {
        return f64::INFINITY;
    }
    let omega = symplectic_form(s.nrows() / 2);
    (s * &omega * s.transpose() - omega).amax()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix(DMatrix<f64>);

impl SymplecticMatrix {
    /// Wraps `matrix` after checking symplecticity against [`SYMPLECTIC_TOL`].
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let err = symplecticity_error(&matrix);
        if err > SYMPLECTIC_TOL {
            return Err(Error::NumericalFailure(format!(
                "matrix is not symplectic (error {err:e})"
            )));
        }
        Ok(Self(matrix))
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<f64>) -> Self {
        Self(matrix)
    }

    pub fn identity(m: usize) -> Self {
        Self(DMatrix::identity(2 * m, 2 * m))
    }

    pub fn modes(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn symplecticity_error(&self) -> f64 {
        symplecticity_error(&self.0)
    }

    /// `S⁻¹ = -Ω Sᵗ Ω`, exact for symplectic `S`.
    pub fn inverse(&self) -> Self {
        let omega = symplectic_form(self.modes());
        Self(-(&omega * self.0.transpose() * &omega))
    }

    /// The composition `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &SymplecticMatrix) -> Self {
        Self(&self.0 * &first.0)
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        let n = self.0.nrows();
        (self.0.transpose() * &self.0 - DMatrix::<f64>::identity(n, n)).amax() <= tol
    }
}

/// A Gaussian circuit element. Squeezing parameters are dimensionless,
/// angles in radians, displacements in quadrature (shot-noise) units.
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitElement {
    /// `exp[r (a_i a_j − a_i† a_j†) / 2]`.
    TwoModeSqueezer { i: usize, j: usize, r: f64 },
    /// `exp[r (a² − a†²) / 2]`; `x → e^{-r} x`, `p → e^{r} p`.
    SingleModeSqueezer { mode: usize, r: f64 },
    /// `exp[θ (a_i† a_j − a_i a_j†)]`.
    BeamSplitter { i: usize, j: usize, theta: f64 },
    /// `exp[i w x_i x_j / 2]`; `p_i → p_i + w x_j`, `p_j → p_j + w x_i`.
    Cz { i: usize, j: usize, weight: f64 },
    /// Phase-space shift by `d ∈ ℝ^{2m}`.
    Displacement(DVector<f64>),
}

impl CircuitElement {
    /// Displacement of a single mode by the complex ladder amplitude `alpha`.
    pub fn displace_mode(mode: usize, alpha: Complex64, m: usize) -> Result<Self> {
        check_mode(mode, m)?;
        let mut d = DVector::zeros(2 * m);
        d[x_index(mode)] = 2.0 * alpha.re;
        d[p_index(mode, m)] = 2.0 * alpha.im;
        Ok(CircuitElement::Displacement(d))
    }

    pub(crate) fn validate(&self, m: usize) -> Result<()> {
        match *self {
            CircuitElement::TwoModeSqueezer { i, j, .. }
            | CircuitElement::BeamSplitter { i, j, .. }
            | CircuitElement::Cz { i, j, .. } => {
                check_mode(i, m)?;
                check_mode(j, m)?;
                if i == j {
                    return Err(Error::RepeatedMode(i));
                }
                Ok(())
            }
            CircuitElement::SingleModeSqueezer { mode, .. } => check_mode(mode, m),
            CircuitElement::Displacement(ref d) => {
                if d.len() != 2 * m {
                    return Err(Error::DimensionMismatch { expected: 2 * m, got: d.len() });
                }
                Ok(())
            }
        }
    }
}

pub(crate) fn check_mode(mode: usize, m: usize) -> Result<()> {
    if mode >= m {
        Err(Error::IndexOutOfRange { index: mode, modes: m })
    } else {
        Ok(())
    }
}

/// Quadrature map of a single element together with its mean shift.
pub fn element_to_symplectic(
    elem: &CircuitElement,
    m: usize,
) -> Result<(SymplecticMatrix, DVector<f64>)> {
    elem.validate(m)?;
    let mut s = DMatrix::<f64>::identity(2 * m, 2 * m);
    let shift = DVector::zeros(2 * m);
    match *elem {
        CircuitElement::TwoModeSqueezer { i, j, r } => {
            let (ch, sh) = ((r / 2.0).cosh(), (r / 2.0).sinh());
            let (xi, xj, pi, pj) = (x_index(i), x_index(j), p_index(i, m), p_index(j, m));
            s[(xi, xi)] = ch;
            s[(xi, xj)] = -sh;
            s[(xj, xj)] = ch;
            s[(xj, xi)] = -sh;
            s[(pi, pi)] = ch;
            s[(pi, pj)] = sh;
            s[(pj, pj)] = ch;
            s[(pj, pi)] = sh;
        }
        CircuitElement::SingleModeSqueezer { mode, r } => {
            s[(x_index(mode), x_index(mode))] = (-r).exp();
            s[(p_index(mode, m), p_index(mode, m))] = r.exp();
        }
        CircuitElement::BeamSplitter { i, j, theta } => {
            let (c, sn) = (theta.cos(), theta.sin());
            for (a, b) in [(x_index(i), x_index(j)), (p_index(i, m), p_index(j, m))] {
                s[(a, a)] = c;
                s[(a, b)] = sn;
                s[(b, b)] = c;
                s[(b, a)] = -sn;
            }
        }
        CircuitElement::Cz { i, j, weight } => {
            s[(p_index(i, m), x_index(j))] = weight;
            s[(p_index(j, m), x_index(i))] = weight;
        }
        CircuitElement::Displacement(ref d) => {
            return Ok((SymplecticMatrix::identity(m), d.clone()));
        }
    }
    Ok((SymplecticMatrix::new_unchecked(s), shift))
}

/// Composes `elements` in temporal order (first element acts first).
///
/// Returns `(S, d)` such that the circuit maps `mean → S mean + d`.
pub fn compose(elements: &[CircuitElement], m: usize) -> Result<(SymplecticMatrix, DVector<f64>)> {
    let mut total = DMatrix::<f64>::identity(2 * m, 2 * m);
    let mut shift = DVector::<f64>::zeros(2 * m);
    for elem in elements {
        let (s, d) = element_to_symplectic(elem, m)?;
        total = s.matrix() * total;
        shift = s.matrix() * shift + d;
    }
    Ok((SymplecticMatrix::new_unchecked(total), shift))
}

/// Haar-random unitary on `m` modes, embedded as an orthogonal symplectic
/// matrix `[[Re U, -Im U], [Im U, Re U]]`.
pub fn random_passive<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymplecticMatrix {
    let z = DMatrix::<Complex64>::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    // fix the phase freedom of QR so the distribution is Haar
    for k in 0..m {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..m {
            q[(row, k)] *= phase;
        }
    }
    passive_from_unitary(&q)
}

/// Orthogonal symplectic matrix of the passive unitary `a → U a`.
pub fn passive_from_unitary(u: &DMatrix<Complex64>) -> SymplecticMatrix {
    let m = u.nrows();
    let mut s = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = u[(i, j)];
            s[(i, j)] = z.re;
            s[(i, m + j)] = -z.im;
            s[(m + i, j)] = z.im;
            s[(m + i, m + j)] = z.re;
        }
    }
    SymplecticMatrix::new_unchecked(s)
}

/// Random symplectic matrix `O₁ · diag(e^{-s}, e^{s}) · O₂` with passive
/// `O₁, O₂` and log-squeezings `s_i` uniform in `[-bound, bound]`.
pub fn random_symplectic_with<R: Rng + ?Sized>(
    m: usize,
    squeeze_bound: f64,
    rng: &mut R,
) -> SymplecticMatrix {
    let left = random_passive(m, rng);
    let right = random_passive(m, rng);
    let mut squeeze = DMatrix::<f64>::identity(2 * m, 2 * m);
    for i in 0..m {
        let s = if squeeze_bound > 0.0 { rng.random_range(-squeeze_bound..=squeeze_bound) } else { 0.0 };
        squeeze[(i, i)] = (-s).exp();
        squeeze[(m + i, m + i)] = s.exp();
    }
    SymplecticMatrix::new_unchecked(left.matrix() * squeeze * right.matrix())
}

/// Deterministic random symplectic matrix for a given seed.
pub fn random_symplectic(m: usize, seed: u64, squeeze_bound: f64) -> Result<SymplecticMatrix> {
    if !(squeeze_bound >= 0.0) || !squeeze_bound.is_finite() {
        return Err(Error::Config(format!("squeeze bound must be non-negative, got {squeeze_bound}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_symplectic_with(m, squeeze_bound, &mut rng))
}
