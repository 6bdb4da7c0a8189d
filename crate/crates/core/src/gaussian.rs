//! Gaussian states: covariance/mean representation, marginals, purity,
//! the thermal (Williamson) decomposition and the Bogoliubov coefficients
//! of a single ladder operator.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{check_mode, compose, symplectic_form, CircuitElement, SymplecticMatrix};

/// Symmetry tolerance on the covariance matrix, relative to its largest entry.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Symplectic eigenvalues may dip this far below one and still count as physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// A global state is pure when its purity is at least `1 - PURE_TOL`.
pub const PURE_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Builds a state from a quadrature mean and covariance in `(x…, p…)` order.
    ///
    /// Only shape and symmetry are checked here; physicality is checked by the
    /// operations that depend on it.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 || !n.is_multiple_of(2) || cov.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: cov.ncols() });
        }
        if mean.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: mean.len() });
        }
        let scale = cov.amax().max(1.0);
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::AsymmetricCovariance(asym));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean, cov })
    }

    pub fn vacuum(m: usize) -> Self {
        Self { mean: DVector::zeros(2 * m), cov: DMatrix::identity(2 * m, 2 * m) }
    }

    /// Product of thermal modes with `V_i = diag(n_i, n_i)`.
    pub fn thermal(nu: &[f64]) -> Result<Self> {
        let m = nu.len();
        let mut cov = DMatrix::zeros(2 * m, 2 * m);
        for (i, &n) in nu.iter().enumerate() {
            if !(n >= 1.0 - PHYSICALITY_TOL) {
                return Err(Error::InvalidOccupation(n));
            }
            cov[(i, i)] = n;
            cov[(m + i, m + i)] = n;
        }
        Ok(Self { mean: DVector::zeros(2 * m), cov })
    }

    pub fn modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// `V → S V Sᵗ`, `mean → S mean + shift`.
    pub fn transform(&self, s: &SymplecticMatrix, shift: &DVector<f64>) -> Result<Self> {
        let n = self.cov.nrows();
        if s.matrix().nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: s.matrix().nrows() });
        }
        if shift.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: shift.len() });
        }
        let sm = s.matrix();
        let cov = sm * &self.cov * sm.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(Self { mean: sm * &self.mean + shift, cov })
    }

    /// Applies a circuit, elements acting in list order.
    pub fn apply(&self, elements: &[CircuitElement]) -> Result<Self> {
        let (s, shift) = compose(elements, self.modes())?;
        self.transform(&s, &shift)
    }

    /// The marginal `V_𝒜 = AᵗVA`, `mean_𝒜 = Aᵗ mean`.
    pub fn reduce(&self, subsystem: &Subsystem) -> Result<Self> {
        if subsystem.total_modes() != self.modes() {
            return Err(Error::DimensionMismatch { expected: self.modes(), got: subsystem.total_modes() });
        }
        let idx = subsystem.quadrature_indices();
        let k = idx.len();
        let cov = DMatrix::from_fn(k, k, |r, c| self.cov[(idx[r], idx[c])]);
        let mean = DVector::from_fn(k, |r, _| self.mean[idx[r]]);
        Ok(Self { mean, cov })
    }

    /// Symplectic eigenvalues in descending order.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        let (_, pairs) = self.symplectic_eigen()?;
        Ok(pairs.into_iter().map(|(nu, _)| nu).collect())
    }

    /// Minimal symplectic eigenvalue is at least `1 − PHYSICALITY_TOL`.
    pub fn check_physical(&self) -> Result<()> {
        let spectrum = self.symplectic_spectrum()?;
        let min_nu = spectrum.last().copied().unwrap_or(1.0);
        if min_nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::UnphysicalState { min_nu });
        }
        Ok(())
    }

    /// `tr ρ² = 1/√det V`.
    pub fn purity(&self) -> Result<f64> {
        self.check_physical()?;
        let det = self.cov.clone().determinant();
        if !(det > 0.0) {
            return Err(Error::NumericalFailure(format!("non-positive covariance determinant {det}")));
        }
        Ok(1.0 / det.sqrt())
    }

    pub fn is_pure(&self) -> Result<bool> {
        Ok(self.purity()? >= 1.0 - PURE_TOL)
    }

    /// `⟨a_g⟩ = (⟨x_g⟩ + i⟨p_g⟩) / 2`.
    pub fn ladder_mean(&self, g: usize) -> Result<Complex64> {
        let m = self.modes();
        check_mode(g, m)?;
        Ok(Complex64::new(self.mean[g], self.mean[m + g]) * 0.5)
    }

    /// `⟨a_g† a_g⟩ = (‖mean_g‖² + tr V_g − 2) / 4`.
    pub fn mean_photon_number(&self, g: usize) -> Result<f64> {
        let m = self.modes();
        check_mode(g, m)?;
        let weight = self.mean[g].powi(2) + self.mean[m + g].powi(2) + self.cov[(g, g)]
            + self.cov[(m + g, m + g)]
            - 2.0;
        Ok(weight / 4.0)
    }

    /// Thermal decomposition `V = S diag(ν, ν) Sᵗ` with `ν` descending.
    pub fn williamson(&self) -> Result<WilliamsonDecomposition> {
        let (sqrt_v, pairs) = self.symplectic_eigen()?;
        let m = self.modes();
        let min_nu = pairs.last().map(|p| p.0).unwrap_or(1.0);
        if min_nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::UnphysicalState { min_nu });
        }
        // W = V^{1/2} Ω V^{1/2}; for iW u = ν u with u = a + ib we have
        // W a = ν b, W b = −ν a, so O = √2 [b…, a…] brings W to
        // [[0, N], [−N, 0]] and S = V^{1/2} O N^{-1/2}.
        let mut o = DMatrix::<f64>::zeros(2 * m, 2 * m);
        let mut nu = Vec::with_capacity(m);
        for (k, (value, u)) in pairs.iter().enumerate() {
            for r in 0..2 * m {
                o[(r, k)] = std::f64::consts::SQRT_2 * u[r].im;
                o[(r, m + k)] = std::f64::consts::SQRT_2 * u[r].re;
            }
            nu.push(*value);
        }
        let mut scale = DMatrix::<f64>::zeros(2 * m, 2 * m);
        for (k, &n) in nu.iter().enumerate() {
            scale[(k, k)] = 1.0 / n.sqrt();
            scale[(m + k, m + k)] = 1.0 / n.sqrt();
        }
        let s = sqrt_v * o * scale;
        let symplectic = SymplecticMatrix::new(s).map_err(|_| {
            Error::NumericalFailure("Williamson transform lost symplecticity".into())
        })?;
        Ok(WilliamsonDecomposition { symplectic, nu, mean: self.mean.clone() })
    }

    /// Returns `V^{1/2}` and the `m` positive eigenpairs of `i V^{1/2} Ω V^{1/2}`
    /// sorted by descending eigenvalue.
    fn symplectic_eigen(&self) -> Result<(DMatrix<f64>, Vec<(f64, DVector<Complex64>)>)> {
        let m = self.modes();
        let eig = SymmetricEigen::new(self.cov.clone());
        let min_eig = eig.eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::UnphysicalState { min_nu: min_eig });
        }
        let sqrt_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let sqrt_v = &eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
        let sqrt_v = (&sqrt_v + sqrt_v.transpose()) * 0.5;
        let w = &sqrt_v * symplectic_form(m) * &sqrt_v;
        let h = w.map(|v| Complex64::new(0.0, v));
        let heig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..2 * m).collect();
        order.sort_by(|&a, &b| heig.eigenvalues[b].total_cmp(&heig.eigenvalues[a]));
        let pairs: Vec<_> = order
            .into_iter()
            .take(m)
            .map(|k| (heig.eigenvalues[k], heig.eigenvectors.column(k).into_owned()))
            .collect();
        if pairs.iter().any(|(v, _)| !v.is_finite() || *v <= 0.0) {
            return Err(Error::NumericalFailure("symplectic eigenvalue breakdown".into()));
        }
        Ok((sqrt_v, pairs))
    }

    pub fn to_snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            m: self.modes(),
            mean: self.mean.iter().copied().collect(),
            cov: self.cov.transpose().iter().copied().collect(),
        }
    }

    pub fn from_snapshot(snapshot: &StateSnapshot) -> Result<Self> {
        let n = 2 * snapshot.m;
        if snapshot.cov.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: snapshot.cov.len() });
        }
        Self::new(
            DVector::from_column_slice(&snapshot.mean),
            DMatrix::from_row_slice(n, n, &snapshot.cov),
        )
    }
}

/// JSON form of a state: `{m, mean: [2m], cov: row-major [4m²]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub m: usize,
    pub mean: Vec<f64>,
    pub cov: Vec<f64>,
}

/// A sorted, nonempty set of modes out of `total`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subsystem {
    total: usize,
    modes: Vec<usize>,
}

impl Subsystem {
    pub fn new(total: usize, modes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut modes: Vec<usize> = modes.into_iter().collect();
        modes.sort_unstable();
        modes.dedup();
        if modes.is_empty() {
            return Err(Error::EmptySubsystem);
        }
        if let Some(&bad) = modes.iter().find(|&&k| k >= total) {
            return Err(Error::IndexOutOfRange { index: bad, modes: total });
        }
        Ok(Self { total, modes })
    }

    pub fn full(total: usize) -> Self {
        Self { total, modes: (0..total).collect() }
    }

    /// Bit `i` of `mask` set means mode `i` belongs to the subsystem.
    pub fn from_mask(total: usize, mask: u64) -> Result<Self> {
        if total < 64 && mask >> total != 0 {
            return Err(Error::IndexOutOfRange { index: 63 - mask.leading_zeros() as usize, modes: total });
        }
        Self::new(total, (0..total).filter(|&i| mask >> i & 1 == 1))
    }

    pub fn mask(&self) -> u64 {
        self.modes.iter().fold(0, |acc, &k| acc | 1 << k)
    }

    pub fn total_modes(&self) -> usize {
        self.total
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn contains(&self, mode: usize) -> bool {
        self.modes.binary_search(&mode).is_ok()
    }

    /// Position of `mode` inside the subsystem.
    pub fn local_index(&self, mode: usize) -> Option<usize> {
        self.modes.binary_search(&mode).ok()
    }

    /// `None` when the subsystem is already the whole system.
    pub fn complement(&self) -> Option<Self> {
        let rest: Vec<usize> = (0..self.total).filter(|k| !self.contains(*k)).collect();
        if rest.is_empty() {
            None
        } else {
            Some(Self { total: self.total, modes: rest })
        }
    }

    /// Global quadrature indices `(x_{a_1}…x_{a_k}, p_{a_1}…p_{a_k})`.
    pub fn quadrature_indices(&self) -> Vec<usize> {
        self.modes.iter().copied().chain(self.modes.iter().map(|&k| self.total + k)).collect()
    }

    /// The `2m × 2m_𝒜` column-selection matrix `A`.
    pub fn selection_matrix(&self) -> DMatrix<f64> {
        let idx = self.quadrature_indices();
        let mut a = DMatrix::zeros(2 * self.total, idx.len());
        for (c, &r) in idx.iter().enumerate() {
            a[(r, c)] = 1.0;
        }
        a
    }
}

/// The `2m × 2` matrix `G` whose columns select `x_g` and `p_g`.
pub fn mode_selection(total: usize, g: usize) -> Result<DMatrix<f64>> {
    check_mode(g, total)?;
    let mut gm = DMatrix::zeros(2 * total, 2);
    gm[(g, 0)] = 1.0;
    gm[(total + g, 1)] = 1.0;
    Ok(gm)
}

#[derive(Clone, Debug)]
pub struct WilliamsonDecomposition {
    pub symplectic: SymplecticMatrix,
    /// Thermal occupations in shot-noise units, descending.
    pub nu: Vec<f64>,
    pub mean: DVector<f64>,
}

impl WilliamsonDecomposition {
    pub fn modes(&self) -> usize {
        self.nu.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let m = self.modes();
        let mut d = DMatrix::zeros(2 * m, 2 * m);
        for (k, &n) in self.nu.iter().enumerate() {
            d[(k, k)] = n;
            d[(m + k, m + k)] = n;
        }
        let s = self.symplectic.matrix();
        s * d * s.transpose()
    }

    /// `‖S diag(ν,ν) Sᵗ − V‖_F / ‖V‖_F`.
    pub fn reconstruction_error(&self, cov: &DMatrix<f64>) -> f64 {
        (self.reconstruct() - cov).norm() / cov.norm()
    }

    pub fn purity(&self) -> f64 {
        1.0 / self.nu.iter().product::<f64>()
    }
}

/// Row `g` of `U†D† a D U = K a† + L a + ⟨a⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct BogoliubovRow {
    pub k: Vec<Complex64>,
    pub l: Vec<Complex64>,
    pub alpha_g: Complex64,
}

impl BogoliubovRow {
    /// `Σ|l|² − Σ|k|²`, equal to one for a canonical transformation.
    pub fn commutator(&self) -> f64 {
        self.l.iter().map(|z| z.norm_sqr()).sum::<f64>() - self.k.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// Bogoliubov row of `a_g` for the quadrature map `S` and mean `mean`.
///
/// With `S = [[A, B], [C, D]]` and `x = a + a†`, `p = −i(a − a†)`:
/// `L = (A + D + i(C − B)) / 2`, `K = (A − D + i(C + B)) / 2`.
pub fn bogoliubov_row_from_symplectic(
    s: &SymplecticMatrix,
    mean: &DVector<f64>,
    g: usize,
) -> Result<BogoliubovRow> {
    let m = s.modes();
    check_mode(g, m)?;
    if mean.len() != 2 * m {
        return Err(Error::DimensionMismatch { expected: 2 * m, got: mean.len() });
    }
    let sm = s.matrix();
    let mut k = Vec::with_capacity(m);
    let mut l = Vec::with_capacity(m);
    for j in 0..m {
        let a = sm[(g, j)];
        let b = sm[(g, m + j)];
        let c = sm[(m + g, j)];
        let d = sm[(m + g, m + j)];
        l.push(Complex64::new(a + d, c - b) * 0.5);
        k.push(Complex64::new(a - d, c + b) * 0.5);
    }
    Ok(BogoliubovRow { k, l, alpha_g: Complex64::new(mean[g], mean[m + g]) * 0.5 })
}

pub fn bogoliubov_row(decomp: &WilliamsonDecomposition, g: usize) -> Result<BogoliubovRow> {
    bogoliubov_row_from_symplectic(&decomp.symplectic, &decomp.mean, g)
}

/// `−ln μ(ρ_𝒜)` of a pure global Gaussian state.
pub fn renyi2_entanglement_pure(global: &GaussianState, subsystem: &Subsystem) -> Result<f64> {
    let purity = global.purity()?;
    if purity < 1.0 - PURE_TOL {
        return Err(Error::GlobalStateNotPure { purity });
    }
    Ok(-global.reduce(subsystem)?.purity()?.ln())
}
