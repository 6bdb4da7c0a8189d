//! Brute-force truncated Fock-space simulator.
//!
//! Used as an independent check on the phase-space formulas: gates are applied
//! as exponentials of their ladder-operator generators, photon subtraction is
//! a literal `a_g`, and purities are literal `tr ρ²`.
//!
//! Basis index of `|n_0, …, n_{m-1}⟩` is `Σ n_i d^{m−1−i}` (mode 0 most
//! significant). Gates are evaluated on a padded register and then truncated
//! back to the cutoff; the discarded norm is accumulated as the leakage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::Subsystem;
use crate::symplectic::CircuitElement;

/// Default tolerance on accumulated cutoff leakage.
pub const DEFAULT_LEAK_TOL: f64 = 1e-8;
/// Largest supported register.
pub const MAX_MODES: usize = 4;
/// Norm² below which a ladder operation counts as annihilating the state.
const ZERO_NORM_TOL: f64 = 1e-14;

type C64 = Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum FockRepr {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockArray {
    modes: usize,
    cutoff: usize,
    repr: FockRepr,
    leakage: f64,
    leak_tol: f64,
}

/// Ladder operator acting on one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ladder {
    Lower(usize),
    Raise(usize),
}

/// `Σ c · (op_1 op_2 …)`, operators written left to right.
type Generator = Vec<(C64, Vec<Ladder>)>;

/// Cutoff rule of thumb: `max(20, ⌈10(⟨n⟩ + 1)⌉)`.
pub fn suggested_cutoff(mean_photons: f64) -> usize {
    20usize.max((10.0 * (mean_photons.max(0.0) + 1.0)).ceil() as usize)
}

/// Cutoff at which the discarded tail of a thermal state with occupation `n`
/// (shot-noise units) is below `1e-20`.
pub fn thermal_cutoff(n: f64) -> usize {
    let nbar = ((n - 1.0) / 2.0).max(0.0);
    if nbar == 0.0 {
        return 2;
    }
    let q = nbar / (nbar + 1.0);
    ((1e-20f64).ln() / q.ln()).ceil() as usize + 1
}

fn check_register(modes: usize, cutoff: usize) -> Result<()> {
    if modes == 0 || modes > MAX_MODES {
        return Err(Error::TooManyModes { modes, limit: MAX_MODES });
    }
    if cutoff < 2 {
        return Err(Error::Config(format!("Fock cutoff must be at least 2, got {cutoff}")));
    }
    Ok(())
}

fn stride(modes: usize, cutoff: usize, mode: usize) -> usize {
    cutoff.pow((modes - 1 - mode) as u32)
}

fn digits(mut idx: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    let mut out = vec![0; modes];
    for k in (0..modes).rev() {
        out[k] = idx % cutoff;
        idx /= cutoff;
    }
    out
}

fn ladder(psi: &DVector<C64>, modes: usize, cutoff: usize, op: Ladder) -> DVector<C64> {
    let mut out = DVector::zeros(psi.len());
    match op {
        Ladder::Lower(mode) => {
            let st = stride(modes, cutoff, mode);
            for (idx, amp) in psi.iter().enumerate() {
                let n = (idx / st) % cutoff;
                if n > 0 {
                    out[idx - st] += amp * (n as f64).sqrt();
                }
            }
        }
        Ladder::Raise(mode) => {
            let st = stride(modes, cutoff, mode);
            for (idx, amp) in psi.iter().enumerate() {
                let n = (idx / st) % cutoff;
                if n + 1 < cutoff {
                    out[idx + st] += amp * ((n + 1) as f64).sqrt();
                }
            }
        }
    }
    out
}

fn apply_generator(gen: &Generator, psi: &DVector<C64>, modes: usize, cutoff: usize) -> DVector<C64> {
    let mut out = DVector::zeros(psi.len());
    for (c, ops) in gen {
        let mut v = psi.clone();
        for &op in ops.iter().rev() {
            v = ladder(&v, modes, cutoff, op);
        }
        out += v * *c;
    }
    out
}

/// `exp(G) ψ` by a stepped Taylor series.
fn expm_apply(gen: &Generator, psi: &DVector<C64>, modes: usize, cutoff: usize) -> DVector<C64> {
    let root = (cutoff as f64).sqrt();
    let bound: f64 = gen.iter().map(|(c, ops)| c.norm() * root.powi(ops.len() as i32)).sum();
    let steps = (bound / 0.5).ceil().max(1.0) as usize;
    let scale = 1.0 / steps as f64;
    let mut state = psi.clone();
    for _ in 0..steps {
        let mut term = state.clone();
        let mut sum = state.clone();
        for k in 1..=80 {
            term = apply_generator(gen, &term, modes, cutoff) * C64::new(scale / k as f64, 0.0);
            sum += &term;
            if term.norm() <= 1e-18 * sum.norm() {
                break;
            }
        }
        state = sum;
    }
    state
}

/// Copies amplitudes into a register with a different cutoff, returning the
/// norm² of the amplitudes that did not fit.
fn resize(psi: &DVector<C64>, modes: usize, from: usize, to: usize) -> (DVector<C64>, f64) {
    let mut out = DVector::zeros(to.pow(modes as u32));
    let mut lost = 0.0;
    for (idx, amp) in psi.iter().enumerate() {
        let ds = digits(idx, modes, from);
        if ds.iter().all(|&n| n < to) {
            let new = ds.iter().fold(0, |acc, &n| acc * to + n);
            out[new] = *amp;
        } else {
            lost += amp.norm_sqr();
        }
    }
    (out, lost)
}

fn resize_density(rho: &DMatrix<C64>, modes: usize, from: usize, to: usize) -> (DMatrix<C64>, f64) {
    let dim = to.pow(modes as u32);
    let map: Vec<Option<usize>> = (0..rho.nrows())
        .map(|idx| {
            let ds = digits(idx, modes, from);
            ds.iter().all(|&n| n < to).then(|| ds.iter().fold(0, |acc, &n| acc * to + n))
        })
        .collect();
    let mut out = DMatrix::zeros(dim, dim);
    let mut lost = 0.0;
    for r in 0..rho.nrows() {
        match map[r] {
            Some(nr) => {
                for c in 0..rho.ncols() {
                    if let Some(nc) = map[c] {
                        out[(nr, nc)] = rho[(r, c)];
                    }
                }
            }
            None => lost += rho[(r, r)].re,
        }
    }
    (out, lost)
}

fn generator(elem: &CircuitElement, modes: usize) -> Result<Generator> {
    elem.validate(modes)?;
    let c = |re: f64, im: f64| C64::new(re, im);
    use Ladder::{Lower, Raise};
    Ok(match *elem {
        CircuitElement::TwoModeSqueezer { i, j, r } => {
            vec![(c(r / 2.0, 0.0), vec![Lower(i), Lower(j)]), (c(-r / 2.0, 0.0), vec![Raise(i), Raise(j)])]
        }
        CircuitElement::SingleModeSqueezer { mode, r } => {
            vec![(c(r / 2.0, 0.0), vec![Lower(mode), Lower(mode)]), (c(-r / 2.0, 0.0), vec![Raise(mode), Raise(mode)])]
        }
        CircuitElement::BeamSplitter { i, j, theta } => {
            vec![(c(theta, 0.0), vec![Raise(i), Lower(j)]), (c(-theta, 0.0), vec![Lower(i), Raise(j)])]
        }
        CircuitElement::Cz { i, j, weight } => {
            let w = c(0.0, weight / 2.0);
            vec![
                (w, vec![Lower(i), Lower(j)]),
                (w, vec![Lower(i), Raise(j)]),
                (w, vec![Raise(i), Lower(j)]),
                (w, vec![Raise(i), Raise(j)]),
            ]
        }
        CircuitElement::Displacement(ref d) => {
            let mut gen = Vec::new();
            for k in 0..modes {
                let alpha = c(d[k], d[modes + k]) * 0.5;
                if alpha.norm() > 0.0 {
                    gen.push((alpha, vec![Raise(k)]));
                    gen.push((-alpha.conj(), vec![Lower(k)]));
                }
            }
            gen
        }
    })
}

impl FockArray {
    pub fn vacuum(modes: usize, cutoff: usize) -> Result<Self> {
        check_register(modes, cutoff)?;
        let mut psi = DVector::zeros(cutoff.pow(modes as u32));
        psi[0] = C64::new(1.0, 0.0);
        Ok(Self { modes, cutoff, repr: FockRepr::Pure(psi), leakage: 0.0, leak_tol: DEFAULT_LEAK_TOL })
    }

    /// Product Fock state `|n_0, …, n_{m−1}⟩`.
    pub fn number_state(occupations: &[usize], cutoff: usize) -> Result<Self> {
        let modes = occupations.len();
        check_register(modes, cutoff)?;
        if let Some(&n) = occupations.iter().find(|&&n| n >= cutoff) {
            return Err(Error::Config(format!("occupation {n} exceeds cutoff {cutoff}")));
        }
        let mut psi = DVector::zeros(cutoff.pow(modes as u32));
        psi[occupations.iter().fold(0, |acc, &n| acc * cutoff + n)] = C64::new(1.0, 0.0);
        Ok(Self { modes, cutoff, repr: FockRepr::Pure(psi), leakage: 0.0, leak_tol: DEFAULT_LEAK_TOL })
    }

    pub fn from_amplitudes(modes: usize, cutoff: usize, amplitudes: DVector<C64>) -> Result<Self> {
        check_register(modes, cutoff)?;
        let dim = cutoff.pow(modes as u32);
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: amplitudes.len() });
        }
        Ok(Self { modes, cutoff, repr: FockRepr::Pure(amplitudes), leakage: 0.0, leak_tol: DEFAULT_LEAK_TOL })
    }

    pub fn from_density(modes: usize, cutoff: usize, density: DMatrix<C64>) -> Result<Self> {
        check_register(modes, cutoff)?;
        let dim = cutoff.pow(modes as u32);
        if density.nrows() != dim || density.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: density.nrows() });
        }
        Ok(Self { modes, cutoff, repr: FockRepr::Density(density), leakage: 0.0, leak_tol: DEFAULT_LEAK_TOL })
    }

    /// Pure state produced by `elements` acting on the vacuum.
    pub fn from_circuit(modes: usize, cutoff: usize, elements: &[CircuitElement], leak_tol: f64) -> Result<Self> {
        let mut state = Self::vacuum(modes, cutoff)?.with_leak_tolerance(leak_tol);
        for e in elements {
            state = state.apply_gate(e)?;
        }
        Ok(state)
    }

    pub fn with_leak_tolerance(mut self, tol: f64) -> Self {
        self.leak_tol = tol;
        self
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn repr(&self) -> &FockRepr {
        &self.repr
    }

    /// Norm² discarded at the cutoff so far.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn is_pure_repr(&self) -> bool {
        matches!(self.repr, FockRepr::Pure(_))
    }

    /// `‖ψ‖²` or `tr ρ`.
    pub fn norm_sqr(&self) -> f64 {
        match &self.repr {
            FockRepr::Pure(psi) => psi.norm_squared(),
            FockRepr::Density(rho) => rho.trace().re,
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > ZERO_NORM_TOL) {
            return Err(Error::ZeroNorm);
        }
        let repr = match &self.repr {
            FockRepr::Pure(psi) => FockRepr::Pure(psi / C64::new(n.sqrt(), 0.0)),
            FockRepr::Density(rho) => FockRepr::Density(rho / C64::new(n, 0.0)),
        };
        Ok(Self { repr, ..self.clone() })
    }

    pub fn density(&self) -> DMatrix<C64> {
        match &self.repr {
            FockRepr::Pure(psi) => psi * psi.adjoint(),
            FockRepr::Density(rho) => rho.clone(),
        }
    }

    fn map_vectors<F: Fn(&DVector<C64>) -> DVector<C64>>(&self, f: F) -> FockRepr {
        match &self.repr {
            FockRepr::Pure(psi) => FockRepr::Pure(f(psi)),
            FockRepr::Density(rho) => {
                // ρ → O ρ O† column by column, twice
                let half = DMatrix::from_columns(&rho.column_iter().map(|c| f(&c.into_owned())).collect::<Vec<_>>());
                let adj = half.adjoint();
                FockRepr::Density(DMatrix::from_columns(
                    &adj.column_iter().map(|c| f(&c.into_owned())).collect::<Vec<_>>(),
                ))
            }
        }
    }

    /// Applies the unitary generated by `elem`, evaluated with padding and
    /// truncated back; fails when the accumulated leakage exceeds tolerance.
    pub fn apply_gate(&self, elem: &CircuitElement) -> Result<Self> {
        let gen = generator(elem, self.modes)?;
        let padded = self.cutoff + (self.cutoff / 2).max(8);
        let (modes, cutoff) = (self.modes, self.cutoff);
        let (repr, lost) = match &self.repr {
            FockRepr::Pure(psi) => {
                let (big, _) = resize(psi, modes, cutoff, padded);
                let out = expm_apply(&gen, &big, modes, padded);
                let (small, lost) = resize(&out, modes, padded, cutoff);
                (FockRepr::Pure(small), lost)
            }
            FockRepr::Density(rho) => {
                let (big, _) = resize_density(rho, modes, cutoff, padded);
                let tmp = Self { repr: FockRepr::Density(big), cutoff: padded, ..self.clone() };
                let out = match tmp.map_vectors(|v| expm_apply(&gen, v, modes, padded)) {
                    FockRepr::Density(d) => d,
                    FockRepr::Pure(_) => unreachable!(),
                };
                let (small, lost) = resize_density(&out, modes, padded, cutoff);
                (FockRepr::Density(small), lost)
            }
        };
        let leakage = self.leakage + lost;
        if leakage > self.leak_tol {
            return Err(Error::CutoffTooSmall { leakage, tolerance: self.leak_tol });
        }
        Self { repr, leakage, ..self.clone() }.normalized()
    }

    fn ladder_op(&self, g: usize, op: Ladder) -> Result<Self> {
        crate::symplectic::check_mode(g, self.modes)?;
        let (modes, cutoff) = (self.modes, self.cutoff);
        let out = Self { repr: self.map_vectors(|v| ladder(v, modes, cutoff, op)), ..self.clone() };
        if out.norm_sqr() <= ZERO_NORM_TOL {
            return Err(Error::ZeroNorm);
        }
        Ok(out)
    }

    /// `a_g ψ` (or `a_g ρ a_g†`), unnormalised; its norm² is `⟨a_g† a_g⟩`.
    pub fn annihilate(&self, g: usize) -> Result<Self> {
        self.ladder_op(g, Ladder::Lower(g))
    }

    /// `a_g† ψ` (or `a_g† ρ a_g`), unnormalised, on a register one level larger.
    pub fn create(&self, g: usize) -> Result<Self> {
        self.resized(self.cutoff + 1).ladder_op(g, Ladder::Raise(g))
    }

    /// The same state on a register with another cutoff; the dropped norm is added to the leakage.
    pub fn resized(&self, cutoff: usize) -> Self {
        let (repr, lost) = match &self.repr {
            FockRepr::Pure(psi) => {
                let (v, l) = resize(psi, self.modes, self.cutoff, cutoff);
                (FockRepr::Pure(v), l)
            }
            FockRepr::Density(rho) => {
                let (d, l) = resize_density(rho, self.modes, self.cutoff, cutoff);
                (FockRepr::Density(d), l)
            }
        };
        Self { repr, cutoff, leakage: self.leakage + lost, ..self.clone() }
    }

    /// Partial trace onto `subsystem`; the result is a density on its modes.
    pub fn reduce_density(&self, subsystem: &Subsystem) -> Result<Self> {
        if subsystem.total_modes() != self.modes {
            return Err(Error::DimensionMismatch { expected: self.modes, got: subsystem.total_modes() });
        }
        let keep = subsystem.modes();
        let rest: Vec<usize> = (0..self.modes).filter(|k| !subsystem.contains(*k)).collect();
        let d = self.cutoff;
        let dim_a = d.pow(keep.len() as u32);
        let dim_b = d.pow(rest.len() as u32);
        let split = |idx: usize| {
            let ds = digits(idx, self.modes, d);
            let a = keep.iter().fold(0, |acc, &k| acc * d + ds[k]);
            let b = rest.iter().fold(0, |acc, &k| acc * d + ds[k]);
            (a, b)
        };
        let rho = match &self.repr {
            FockRepr::Pure(psi) => {
                let mut mat = DMatrix::<C64>::zeros(dim_a, dim_b);
                for (idx, amp) in psi.iter().enumerate() {
                    let (a, b) = split(idx);
                    mat[(a, b)] = *amp;
                }
                &mat * mat.adjoint()
            }
            FockRepr::Density(full) => {
                let parts: Vec<(usize, usize)> = (0..full.nrows()).map(split).collect();
                let mut out = DMatrix::<C64>::zeros(dim_a, dim_a);
                for (r, &(ar, br)) in parts.iter().enumerate() {
                    for (c, &(ac, bc)) in parts.iter().enumerate() {
                        if br == bc {
                            out[(ar, ac)] += full[(r, c)];
                        }
                    }
                }
                out
            }
        };
        Ok(Self {
            modes: keep.len(),
            cutoff: d,
            repr: FockRepr::Density(rho),
            leakage: self.leakage,
            leak_tol: self.leak_tol,
        })
    }

    /// `tr ρ² / (tr ρ)²`.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            FockRepr::Pure(_) => 1.0,
            FockRepr::Density(rho) => {
                let tr = rho.trace().re;
                rho.iter().map(|z| z.norm_sqr()).sum::<f64>() / (tr * tr)
            }
        }
    }

    /// `−ln tr ρ²`.
    pub fn renyi2(&self) -> f64 {
        -self.purity().ln()
    }

    /// Purity of the marginal on `subsystem` of a pure state, computed on the
    /// smaller side of the cut.
    pub fn reduced_purity(&self, subsystem: &Subsystem) -> Result<f64> {
        match (&self.repr, subsystem.complement()) {
            (FockRepr::Pure(_), None) => Ok(1.0),
            (FockRepr::Pure(_), Some(other)) if other.len() < subsystem.len() => {
                Ok(self.reduce_density(&other)?.purity())
            }
            _ => Ok(self.reduce_density(subsystem)?.purity()),
        }
    }

    /// `⟨a_g⟩` of the normalised state.
    pub fn ladder_mean(&self, g: usize) -> Result<C64> {
        crate::symplectic::check_mode(g, self.modes)?;
        let rho = self.density();
        let tr = rho.trace().re;
        let (modes, cutoff) = (self.modes, self.cutoff);
        let mut total = C64::new(0.0, 0.0);
        for c in 0..rho.ncols() {
            let col = ladder(&rho.column(c).into_owned(), modes, cutoff, Ladder::Lower(g));
            total += col[c];
        }
        Ok(total / tr)
    }

    /// `⟨a_g† a_g⟩` of the normalised state.
    pub fn mean_photon_number(&self, g: usize) -> Result<f64> {
        Ok(self.annihilate(g).map(|s| s.norm_sqr()).or_else(|e| match e {
            Error::ZeroNorm => Ok(0.0),
            other => Err(other),
        })? / self.norm_sqr())
    }

    /// Quadrature mean and symmetrised covariance of a pure state, in the
    /// `(x…, p…)` layout with `x = a + a†`, `p = −i(a − a†)`.
    pub fn quadrature_moments(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let big = self.normalized()?.resized(self.cutoff + 2);
        let psi = match &big.repr {
            FockRepr::Pure(psi) => psi.clone(),
            FockRepr::Density(_) => {
                return Err(Error::Config("quadrature moments need a pure state".into()));
            }
        };
        let (m, d) = (self.modes, big.cutoff);
        let mut vecs = Vec::with_capacity(2 * m);
        for k in 0..m {
            let lo = ladder(&psi, m, d, Ladder::Lower(k));
            let hi = ladder(&psi, m, d, Ladder::Raise(k));
            vecs.push((&lo + &hi, k));
        }
        for k in 0..m {
            let lo = ladder(&psi, m, d, Ladder::Lower(k));
            let hi = ladder(&psi, m, d, Ladder::Raise(k));
            vecs.push(((lo - hi) * C64::new(0.0, -1.0), m + k));
        }
        let mean = DVector::from_fn(2 * m, |r, _| psi.dotc(&vecs[r].0).re);
        let cov = DMatrix::from_fn(2 * m, 2 * m, |r, c| vecs[r].0.dotc(&vecs[c].0).re - mean[r] * mean[c]);
        Ok((mean, cov))
    }
}

/// Thermal state with `V = diag(n, n)`: geometric populations with mean
/// photon number `(n − 1)/2`, truncated at `cutoff` and renormalised.
pub fn thermal_density(n: f64, cutoff: usize) -> Result<FockArray> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::InvalidOccupation(n));
    }
    check_register(1, cutoff)?;
    let nbar = (n - 1.0) / 2.0;
    let q = nbar / (nbar + 1.0);
    let pops: Vec<f64> = (0..cutoff).map(|k| if k == 0 { 1.0 } else { q.powi(k as i32) }).collect();
    let total: f64 = pops.iter().sum();
    let rho = DMatrix::from_fn(cutoff, cutoff, |r, c| if r == c { C64::new(pops[r] / total, 0.0) } else { C64::new(0.0, 0.0) });
    let mut out = FockArray::from_density(1, cutoff, rho)?;
    out.leakage = q.powi(cutoff as i32);
    Ok(out)
}

/// The eight traces `tr(aρa†)`, `tr(a†ρa)`, `tr(aρa†aρa†)`, `tr(a†ρaa†ρa)`,
/// `tr(a†ρaaρa†)`, `tr(ρ²a†a)`, `tr(ρ²aa†)`, `tr(ρa†ρa)` of a single-mode
/// density, by dense matrix products on a register padded by two levels.
pub fn single_mode_traces(state: &FockArray) -> Result<[f64; 8]> {
    if state.modes != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: state.modes });
    }
    let padded = state.normalized()?.resized(state.cutoff + 2);
    let rho = padded.density();
    let d = padded.cutoff;
    let a = DMatrix::from_fn(d, d, |r, c| if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
    let ad = a.adjoint();
    let tr = |m: DMatrix<C64>| m.trace().re;
    let sub = &a * &rho * &ad;
    let add = &ad * &rho * &a;
    let rho2 = &rho * &rho;
    Ok([
        tr(sub.clone()),
        tr(add.clone()),
        tr(&sub * &sub),
        tr(&add * &add),
        tr(&add * &sub),
        tr(&rho2 * &ad * &a),
        tr(&rho2 * &a * &ad),
        tr(&rho * &ad * &rho * &a),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_squeezing_is_identity() {
        let v = FockArray::vacuum(2, 10).unwrap();
        let out = v.apply_gate(&CircuitElement::TwoModeSqueezer { i: 0, j: 1, r: 0.0 }).unwrap();
        assert_eq!(out.repr(), v.repr());
    }

    #[test]
    fn coherent_state_mean() {
        let alpha = C64::new(0.6, -0.7);
        let d = CircuitElement::displace_mode(0, alpha, 1).unwrap();
        let st = FockArray::vacuum(1, 30).unwrap().apply_gate(&d).unwrap();
        assert!((st.ladder_mean(0).unwrap() - alpha).norm() < 1e-9);
        assert!((st.mean_photon_number(0).unwrap() - alpha.norm_sqr()).abs() < 1e-9);
        assert!(st.leakage() < 1e-12);
    }

    #[test]
    fn tmsv_photon_number() {
        let st = FockArray::vacuum(2, 30)
            .unwrap()
            .apply_gate(&CircuitElement::TwoModeSqueezer { i: 0, j: 1, r: 1.0 })
            .unwrap();
        let want = 0.5f64.sinh().powi(2);
        assert!((st.mean_photon_number(0).unwrap() - want).abs() < 1e-10);
        assert!((st.mean_photon_number(1).unwrap() - want).abs() < 1e-10);
        let red = st.reduce_density(&Subsystem::new(2, [0]).unwrap()).unwrap();
        // reduced state is thermal: diagonal with geometric populations
        let rho = red.density();
        let q = 0.5f64.tanh().powi(2);
        for k in 0..10 {
            assert!((rho[(k, k)].re - (1.0 - q) * q.powi(k as i32)).abs() < 1e-10);
            assert!(rho[(k, k + 1)].norm() < 1e-12);
        }
        assert!((red.purity() - 1.0 / 1f64.cosh()).abs() < 1e-10);
    }

    #[test]
    fn ladder_actions() {
        let vac = FockArray::vacuum(1, 5).unwrap();
        assert_eq!(vac.annihilate(0).unwrap_err(), Error::ZeroNorm);
        let two = FockArray::number_state(&[2], 5).unwrap();
        let out = two.annihilate(0).unwrap();
        let expected = FockArray::number_state(&[1], 5).unwrap();
        match (out.repr(), expected.repr()) {
            (FockRepr::Pure(a), FockRepr::Pure(b)) => assert!((a - b * c(2f64.sqrt())).norm() < 1e-15),
            _ => unreachable!(),
        }
        let up = FockArray::number_state(&[4], 5).unwrap().create(0).unwrap();
        assert_eq!(up.cutoff(), 6);
        assert!((up.norm_sqr() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn partial_traces() {
        let prod = FockArray::number_state(&[1, 0], 3).unwrap();
        let red = prod.reduce_density(&Subsystem::new(2, [0]).unwrap()).unwrap();
        let want = DMatrix::from_fn(3, 3, |r, cc| if r == 1 && cc == 1 { c(1.0) } else { c(0.0) });
        assert_eq!(red.density(), want);

        let mut psi = DVector::zeros(9);
        psi[3] = c(std::f64::consts::FRAC_1_SQRT_2); // |10⟩
        psi[1] = c(std::f64::consts::FRAC_1_SQRT_2); // |01⟩
        let bell = FockArray::from_amplitudes(2, 3, psi).unwrap();
        let red = bell.reduce_density(&Subsystem::new(2, [0]).unwrap()).unwrap();
        let rho = red.density();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15 && (rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((red.purity() - 0.5).abs() < 1e-15);
        assert!((red.renyi2() - LN_2).abs() < 1e-15);
        assert!((red.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(bell.purity(), 1.0);
        assert_eq!(bell.renyi2(), 0.0);
        // the same marginal from the density form
        let dens = FockArray::from_density(2, 3, bell.density()).unwrap();
        let red2 = dens.reduce_density(&Subsystem::new(2, [0]).unwrap()).unwrap();
        assert!((red2.density() - rho).norm() < 1e-15);
    }

    #[test]
    fn thermal_state_purity_and_traces() {
        let v = thermal_density(1.0, 4).unwrap();
        assert_eq!(v.density()[(0, 0)], c(1.0));
        let t = thermal_density(2.0, 60).unwrap();
        assert!((t.purity() - 0.5).abs() < 1e-8);
        let tr = single_mode_traces(&t).unwrap();
        assert!((tr[0] - 0.5).abs() < 1e-8);
        assert!((tr[4] - 9.0 / 64.0).abs() < 1e-8);
        assert!(matches!(thermal_density(0.5, 10), Err(Error::InvalidOccupation(_))));
    }

    #[test]
    fn density_gate_matches_pure_gate() {
        let elem = CircuitElement::BeamSplitter { i: 0, j: 1, theta: 0.3 };
        let pure = FockArray::number_state(&[1, 0], 4).unwrap();
        let dens = FockArray::from_density(2, 4, pure.density()).unwrap();
        let a = pure.apply_gate(&elem).unwrap().density();
        let b = dens.apply_gate(&elem).unwrap().density();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn leakage_is_reported() {
        let st = FockArray::vacuum(1, 4).unwrap();
        let err = st.apply_gate(&CircuitElement::SingleModeSqueezer { mode: 0, r: 1.5 }).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { .. }));
    }

    #[test]
    fn register_limits() {
        assert!(matches!(FockArray::vacuum(5, 3), Err(Error::TooManyModes { .. })));
        assert_eq!(suggested_cutoff(0.1), 20);
        assert_eq!(suggested_cutoff(4.0), 50);
        assert!(thermal_cutoff(5.0) > 100);
    }
}
