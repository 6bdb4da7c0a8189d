//! Single-photon subtraction and addition on Gaussian states.
//!
//! Two independent routes to the purity of the photon-subtracted marginal
//! `ρ⁻_𝒜 = a_g ρ_𝒜 a_g† / tr(a_g† a_g ρ_𝒜)`:
//!
//! * [`subtract_reduced_wigner`] builds the Wigner function of `ρ⁻_𝒜` as a
//!   quadratic polynomial times the Gaussian marginal; its purity
//!   `(4π)^{m_𝒜} ∫ |W⁻|²` reduces to Gaussian moments over `V_𝒜 / 2`.
//! * [`relative_purity_closed_form`] evaluates `μ⁻_𝒜 / μ_𝒜` from the thermal
//!   occupations and one Bogoliubov row of the Williamson decomposition.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{bogoliubov_row, BogoliubovRow, GaussianState, Subsystem, WilliamsonDecomposition, PURE_TOL};
use crate::moments::QuadraticForm;
use crate::symplectic::check_mode;

/// Below this, `tr(a_g† a_g ρ)` (in quadrature units) counts as zero.
pub const VACUUM_TOL: f64 = 1e-10;
/// Largest accepted condition number of `V_𝒜` for the Wigner route.
pub const MAX_CONDITION: f64 = 1e12;
/// Slack on `ΔE ≤ log 2`.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhotonOp {
    Subtract,
    Add,
}

impl fmt::Display for PhotonOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhotonOp::Subtract => "subtract",
            PhotonOp::Add => "add",
        })
    }
}

impl std::str::FromStr for PhotonOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subtract" => Ok(PhotonOp::Subtract),
            "add" => Ok(PhotonOp::Add),
            other => Err(Error::Config(format!("unknown kind {other:?} (expected subtract|add)"))),
        }
    }
}

/// Wigner function `W⁻(β) = p(β − α_𝒜) / norm × W^G_𝒜(β)` of a
/// photon-subtracted marginal, with `p` quadratic.
#[derive(Clone, Debug)]
pub struct SubtractedReducedState {
    base: GaussianState,
    poly: QuadraticForm,
    norm: f64,
}

impl SubtractedReducedState {
    /// The Gaussian marginal before subtraction.
    pub fn base(&self) -> &GaussianState {
        &self.base
    }

    pub fn polynomial(&self) -> &QuadraticForm {
        &self.poly
    }

    /// `‖α_g‖² + tr V_g − 2`, i.e. four times the mean photon number of mode g.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// Wigner function value at the phase-space point `beta` of the subsystem.
    pub fn wigner(&self, beta: &DVector<f64>) -> Result<f64> {
        let n = self.base.cov().nrows();
        if beta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
        }
        let y = beta - self.base.mean();
        let inv = self.base.cov().clone().try_inverse().ok_or(Error::SingularCovariance { condition: f64::INFINITY })?;
        let expo = -0.5 * (y.transpose() * inv * &y)[(0, 0)];
        let m = n / 2;
        let det = self.base.cov().determinant();
        let gaussian = expo.exp() / ((2.0 * PI).powi(m as i32) * det.sqrt());
        Ok(self.poly.eval(&y) / self.norm * gaussian)
    }

    /// `∫ W⁻`, one for a correctly normalised state.
    pub fn normalization(&self) -> f64 {
        self.poly.expectation(self.base.cov()) / self.norm
    }

    /// Quadrature mean of the subtracted marginal.
    pub fn mean(&self) -> DVector<f64> {
        self.base.mean() + self.poly.first_moment(self.base.cov()) / self.norm
    }

    /// `(4π)^{m_𝒜} ∫ |W⁻|² = μ(V_𝒜) · E_{V_𝒜/2}[p²] / norm²`.
    pub fn purity(&self) -> Result<f64> {
        let gaussian = self.base.purity()?;
        let half = self.base.cov() * 0.5;
        Ok(gaussian * self.poly.second_moment(&half) / (self.norm * self.norm))
    }
}

/// Wigner representation of `a_g ρ_𝒜 a_g†` (normalised) for `g ∈ 𝒜`.
///
/// With `X = Gᵗ(V − 𝟙)A`, `M = X V_𝒜⁻¹` and `y = β − α_𝒜` the polynomial is
/// `‖M y + α_g‖² + tr(V_g − M Xᵗ) − 2`.
pub fn subtract_reduced_wigner(
    global: &GaussianState,
    g: usize,
    subsystem: &Subsystem,
) -> Result<SubtractedReducedState> {
    let m = global.modes();
    check_mode(g, m)?;
    if !subsystem.contains(g) {
        return Err(Error::ModeNotInSubsystem { mode: g });
    }
    let base = global.reduce(subsystem)?;
    let cov = global.cov();
    let mean = global.mean();
    let alpha_g = DVector::from_vec(vec![mean[g], mean[m + g]]);
    let v_g_trace = cov[(g, g)] + cov[(m + g, m + g)];
    let norm = alpha_g.norm_squared() + v_g_trace - 2.0;
    if norm <= VACUUM_TOL {
        return Err(Error::VacuumModeSubtraction { weight: norm });
    }

    let idx = subsystem.quadrature_indices();
    let rows = [g, m + g];
    let x = DMatrix::from_fn(2, idx.len(), |r, c| {
        let (i, j) = (rows[r], idx[c]);
        cov[(i, j)] - if i == j { 1.0 } else { 0.0 }
    });

    let eig = SymmetricEigen::new(base.cov().clone());
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::SingularCovariance { condition: if lo > 0.0 { hi / lo } else { f64::INFINITY } });
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v));
    let v_inv = &eig.eigenvectors * inv_diag * eig.eigenvectors.transpose();

    let mm = &x * v_inv;
    let quad = mm.transpose() * &mm;
    let quad = (&quad + quad.transpose()) * 0.5;
    let lin = mm.transpose() * &alpha_g * 2.0;
    let constant = alpha_g.norm_squared() + v_g_trace - (&mm * x.transpose()).trace() - 2.0;

    Ok(SubtractedReducedState { base, poly: QuadraticForm { quad, lin, constant }, norm })
}

/// Photon addition acts like subtraction with `k → l*`, `l → k*`, `α_g → α_g*`
/// (the Bogoliubov row of `a_g†`).
pub fn addition_row(row: &BogoliubovRow) -> BogoliubovRow {
    BogoliubovRow {
        k: row.l.iter().map(|z| z.conj()).collect(),
        l: row.k.iter().map(|z| z.conj()).collect(),
        alpha_g: row.alpha_g.conj(),
    }
}

/// `μ^∓_𝒜 / μ_𝒜` from thermal occupations `ν` and a Bogoliubov row:
///
/// `1/2 + [½(Σ Ñ_i/n_i)² + ½|α|⁴ + |Z|² + 2 Re(α*² Z) + |α|² Σ N_i] / (Σ N_i + |α|²)²`
///
/// with `N_i = |k_i|²(n_i+1)/2 + |l_i|²(n_i−1)/2`,
/// `Ñ_i = |k_i|²(n_i+1)/2 − |l_i|²(n_i−1)/2` and
/// `Z = Σ k_i l_i (n_i² − 1)/(2n_i)`.
pub fn relative_purity_closed_form(
    decomp: &WilliamsonDecomposition,
    row: &BogoliubovRow,
    kind: PhotonOp,
) -> Result<f64> {
    if row.k.len() != decomp.nu.len() || row.l.len() != decomp.nu.len() {
        return Err(Error::DimensionMismatch { expected: decomp.nu.len(), got: row.k.len() });
    }
    let swapped;
    let row = match kind {
        PhotonOp::Subtract => row,
        PhotonOp::Add => {
            swapped = addition_row(row);
            &swapped
        }
    };
    let mut sum_n = 0.0;
    let mut sum_tilde = 0.0;
    let mut z = Complex64::new(0.0, 0.0);
    for ((k, l), &n) in row.k.iter().zip(&row.l).zip(&decomp.nu) {
        let (k2, l2) = (k.norm_sqr(), l.norm_sqr());
        let up = k2 * (n + 1.0) / 2.0;
        let down = l2 * (n - 1.0) / 2.0;
        sum_n += up + down;
        sum_tilde += (up - down) / n;
        z += k * l * ((n * n - 1.0) / (2.0 * n));
    }
    let alpha = row.alpha_g;
    let a2 = alpha.norm_sqr();
    let denom = sum_n + a2;
    if denom <= VACUUM_TOL {
        return Err(Error::VacuumModeSubtraction { weight: denom });
    }
    let numer = 0.5 * sum_tilde * sum_tilde
        + 0.5 * a2 * a2
        + z.norm_sqr()
        + 2.0 * (alpha.conj() * alpha.conj() * z).re
        + a2 * sum_n;
    Ok(0.5 + numer / (denom * denom))
}

/// Rényi-2 entanglement before and after the photon operation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementChange {
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

/// Relative purity `μ^∓_𝒜 / μ_𝒜` of the marginal on `subsystem` (which must contain `g`).
///
/// Subtraction uses the Wigner route and falls back to the closed form when
/// `V_𝒜` is too ill-conditioned; addition uses the closed form.
pub fn relative_purity(global: &GaussianState, subsystem: &Subsystem, g: usize, kind: PhotonOp) -> Result<f64> {
    let reduced = global.reduce(subsystem)?;
    let base = reduced.purity()?;
    if kind == PhotonOp::Subtract {
        match subtract_reduced_wigner(global, g, subsystem) {
            Ok(state) => return Ok(state.purity()? / base),
            Err(Error::SingularCovariance { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let local = subsystem.local_index(g).ok_or(Error::ModeNotInSubsystem { mode: g })?;
    let decomp = reduced.williamson()?;
    relative_purity_closed_form(&decomp, &bogoliubov_row(&decomp, local)?, kind)
}

/// `ΔE_R = log μ_𝒜 − log μ^∓_𝒜` across the bipartition `(𝒜, complement)` of
/// a pure global state.
///
/// When `g ∉ 𝒜` the complement is used; both sides carry the same
/// entanglement because the global state stays pure.
pub fn entanglement_increase(
    global: &GaussianState,
    subsystem: &Subsystem,
    g: usize,
    kind: PhotonOp,
) -> Result<EntanglementChange> {
    check_mode(g, global.modes())?;
    let purity = global.purity()?;
    if purity < 1.0 - PURE_TOL {
        return Err(Error::GlobalStateNotPure { purity });
    }
    let side = if subsystem.contains(g) {
        subsystem.clone()
    } else {
        subsystem.complement().ok_or(Error::ModeNotInSubsystem { mode: g })?
    };
    if kind == PhotonOp::Subtract {
        let weight = 4.0 * global.mean_photon_number(g)?;
        if weight <= VACUUM_TOL {
            return Err(Error::VacuumModeSubtraction { weight });
        }
    }
    let mu = global.reduce(&side)?.purity()?;
    let ratio = relative_purity(global, &side, g, kind)?;
    let before = -mu.ln();
    let after = -(mu * ratio).ln();
    Ok(EntanglementChange { before, after, delta: after - before })
}

/// `ΔE ≤ log 2 + BOUND_TOL`.
pub fn within_entanglement_bound(delta: f64) -> bool {
    delta <= LN_2 + BOUND_TOL
}

/// The eight single-mode thermal traces entering the relative-purity formula,
/// for `V = diag(n, n)` and `ρ` the thermal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalTraceSet {
    pub n: f64,
    /// `tr(a ρ a†)`
    pub t1: f64,
    /// `tr(a† ρ a)`
    pub t2: f64,
    /// `tr(a ρ a† a ρ a†)`
    pub t3: f64,
    /// `tr(a† ρ a a† ρ a)`
    pub t4: f64,
    /// `tr(a† ρ a a ρ a†)`
    pub t5: f64,
    /// `tr(ρ² a† a)`
    pub t6: f64,
    /// `tr(ρ² a a†)`
    pub t7: f64,
    /// `tr(ρ a† ρ a)`
    pub t8: f64,
}

impl ThermalTraceSet {
    pub fn values(&self) -> [f64; 8] {
        [self.t1, self.t2, self.t3, self.t4, self.t5, self.t6, self.t7, self.t8]
    }
}

pub fn thermal_traces(n: f64) -> Result<ThermalTraceSet> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::InvalidOccupation(n));
    }
    let n2 = n * n;
    let n3 = n2 * n;
    let sub = (n - 1.0) / 2.0;
    let add = (n + 1.0) / 2.0;
    let purity_factor = (1.0 + n2) / (2.0 * n3);
    Ok(ThermalTraceSet {
        n,
        t1: sub,
        t2: add,
        t3: purity_factor * sub * sub,
        t4: purity_factor * add * add,
        t5: (n2 - 1.0).powi(2) / (8.0 * n3),
        t6: (n - 1.0).powi(2) / (4.0 * n2),
        t7: (n + 1.0).powi(2) / (4.0 * n2),
        t8: (n + 1.0) * (n - 1.0) / (4.0 * n2),
    })
}
