//! The two example networks: a linear chain of two-mode squeezers and a CZ
//! graph state built from squeezed vacua.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::GaussianState;
use crate::symplectic::{check_mode, CircuitElement};

/// `m` vacuum modes, squeezers `S(0,1), S(1,2), …` with parameter `r`, then a
/// displacement `alpha_g` on mode `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    pub modes: usize,
    pub r: f64,
    pub g: usize,
    pub alpha_g: Complex64,
}

impl ChainSpec {
    /// Chain with `g` at the (0-based) middle mode `⌈m/2⌉ − 1`.
    pub fn new(modes: usize, r: f64, alpha_g: Complex64) -> Self {
        Self { modes, r, g: default_chain_mode(modes), alpha_g }
    }
}

pub fn default_chain_mode(modes: usize) -> usize {
    modes.div_ceil(2).saturating_sub(1)
}

/// Squeezed vacua `V₀ = diag(s…, 1/s…)` with `s = 10^{dB/10}` (p squeezed),
/// entangled by CZ gates with weights from `adjacency`, then a displacement
/// `alpha_g` on mode `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphSpec {
    pub adjacency: DMatrix<f64>,
    pub squeezing_db: f64,
    pub g: usize,
    pub alpha_g: Complex64,
}

impl GraphSpec {
    pub fn modes(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let a = &self.adjacency;
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(Error::InvalidAdjacency(format!("matrix is {}x{}", a.nrows(), a.ncols())));
        }
        if (a - a.transpose()).amax() > 0.0 {
            return Err(Error::InvalidAdjacency("matrix is not symmetric".into()));
        }
        if a.diagonal().amax() != 0.0 {
            return Err(Error::InvalidAdjacency("diagonal must be zero".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAdjacency("non-finite weight".into()));
        }
        if !(self.squeezing_db >= 0.0) || !self.squeezing_db.is_finite() {
            return Err(Error::InvalidNetwork(format!("squeezing must be >= 0 dB, got {}", self.squeezing_db)));
        }
        check_mode(self.g, a.nrows())
    }
}

pub fn chain_elements(spec: &ChainSpec) -> Result<Vec<CircuitElement>> {
    if spec.modes < 2 {
        return Err(Error::InvalidNetwork(format!("a chain needs at least 2 modes, got {}", spec.modes)));
    }
    check_mode(spec.g, spec.modes)?;
    let mut elems: Vec<CircuitElement> = (0..spec.modes - 1)
        .map(|i| CircuitElement::TwoModeSqueezer { i, j: i + 1, r: spec.r })
        .collect();
    elems.push(CircuitElement::displace_mode(spec.g, spec.alpha_g, spec.modes)?);
    Ok(elems)
}

pub fn build_chain(spec: &ChainSpec) -> Result<GaussianState> {
    GaussianState::vacuum(spec.modes).apply(&chain_elements(spec)?)
}

/// CZ gates for every edge `i < j` with nonzero weight, in row-major order.
pub fn graph_elements(spec: &GraphSpec) -> Result<Vec<CircuitElement>> {
    spec.validate()?;
    let m = spec.modes();
    let mut elems = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = spec.adjacency[(i, j)];
            if w != 0.0 {
                elems.push(CircuitElement::Cz { i, j, weight: w });
            }
        }
    }
    elems.push(CircuitElement::displace_mode(spec.g, spec.alpha_g, m)?);
    Ok(elems)
}

/// Initial covariance `diag(s, …, s, 1/s, …, 1/s)`.
pub fn squeezed_vacua(modes: usize, squeezing_db: f64) -> GaussianState {
    let s = 10f64.powf(squeezing_db / 10.0);
    let diag = DVector::from_fn(2 * modes, |k, _| if k < modes { s } else { 1.0 / s });
    GaussianState::new(DVector::zeros(2 * modes), DMatrix::from_diagonal(&diag))
        .expect("diagonal covariance is symmetric")
}

pub fn build_graph(spec: &GraphSpec) -> Result<GaussianState> {
    let elems = graph_elements(spec)?;
    squeezed_vacua(spec.modes(), spec.squeezing_db).apply(&elems)
}

/// Nearest-neighbour grid with unit weights; mode `(r, c)` has index `r·cols + c`.
pub fn grid_adjacency(rows: usize, cols: usize) -> DMatrix<f64> {
    let m = rows * cols;
    let mut a = DMatrix::zeros(m, m);
    for r in 0..rows {
        for c in 0..cols {
            let k = r * cols + c;
            if c + 1 < cols {
                a[(k, k + 1)] = 1.0;
                a[(k + 1, k)] = 1.0;
            }
            if r + 1 < rows {
                a[(k, k + cols)] = 1.0;
                a[(k + cols, k)] = 1.0;
            }
        }
    }
    a
}

/// Lowest-index neighbour of `g`, if any.
pub fn first_neighbour(adjacency: &DMatrix<f64>, g: usize) -> Option<usize> {
    (0..adjacency.ncols()).find(|&j| j != g && adjacency[(g, j)] != 0.0)
}

/// Adjacency of the linear chain `0 – 1 – … – (m−1)`.
pub fn chain_adjacency(modes: usize) -> DMatrix<f64> {
    grid_adjacency(1, modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(a: &DMatrix<f64>) -> usize {
        a.iter().filter(|&&v| v != 0.0).count() / 2
    }

    #[test]
    fn grid_edge_counts() {
        assert_eq!(grid_adjacency(1, 2), DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(edges(&grid_adjacency(3, 3)), 12);
        assert_eq!(edges(&grid_adjacency(2, 2)), 4);
        for (r, c) in [(1, 5), (4, 3), (2, 7)] {
            assert_eq!(edges(&grid_adjacency(r, c)), 2 * r * c - r - c);
        }
    }

    #[test]
    fn trivial_chain_is_vacuum() {
        let st = build_chain(&ChainSpec::new(2, 0.0, Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(st, GaussianState::vacuum(2));
    }

    #[test]
    fn ten_mode_chain_is_pure() {
        let spec = ChainSpec::new(10, 1.0, Complex64::new(0.5, 0.0));
        assert_eq!(spec.g, 4);
        let st = build_chain(&spec).unwrap();
        assert_eq!(st.cov().shape(), (20, 20));
        assert!((st.cov().determinant() - 1.0).abs() < 1e-8);
        assert!((st.mean()[4] - 1.0).abs() < 1e-15);
        assert!(st.mean().iter().enumerate().all(|(k, v)| k == 4 || *v == 0.0));
    }

    #[test]
    fn chain_validation() {
        assert!(matches!(build_chain(&ChainSpec::new(1, 1.0, Complex64::new(0.0, 0.0))), Err(Error::InvalidNetwork(_))));
        let bad = ChainSpec { modes: 3, r: 1.0, g: 3, alpha_g: Complex64::new(0.0, 0.0) };
        assert!(matches!(build_chain(&bad), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn empty_graph_zero_db_is_vacuum() {
        let spec = GraphSpec { adjacency: DMatrix::zeros(3, 3), squeezing_db: 0.0, g: 0, alpha_g: Complex64::new(0.0, 0.0) };
        assert_eq!(build_graph(&spec).unwrap(), GaussianState::vacuum(3));
    }

    #[test]
    fn cz_keeps_x_block() {
        let spec = GraphSpec { adjacency: grid_adjacency(1, 2), squeezing_db: 10.0, g: 0, alpha_g: Complex64::new(0.0, 0.0) };
        let st = build_graph(&spec).unwrap();
        let v0 = squeezed_vacua(2, 10.0);
        assert!((st.cov().view((0, 0), (2, 2)) - v0.cov().view((0, 0), (2, 2))).amax() < 1e-15);
        assert!((st.cov().determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn graph_nullifiers_carry_squeezed_variance() {
        let adjacency = grid_adjacency(3, 3);
        let spec = GraphSpec { adjacency: adjacency.clone(), squeezing_db: 10.0, g: 1, alpha_g: Complex64::new(0.5, 0.0) };
        let st = build_graph(&spec).unwrap();
        assert!((st.cov().determinant() - 1.0).abs() < 1e-8);
        // nullifier δ = p − 𝔸x, i.e. rows of [−𝔸, I]
        let mut n = DMatrix::zeros(9, 18);
        n.view_mut((0, 0), (9, 9)).copy_from(&(-&adjacency));
        n.view_mut((0, 9), (9, 9)).fill_with_identity();
        let var = &n * st.cov() * n.transpose();
        for i in 0..9 {
            assert!((var[(i, i)] - 0.1).abs() < 1e-9);
        }
    }

    #[test]
    fn adjacency_validation() {
        let mut a = grid_adjacency(2, 2);
        a[(0, 1)] = 2.0;
        let spec = GraphSpec { adjacency: a, squeezing_db: 1.0, g: 0, alpha_g: Complex64::new(0.0, 0.0) };
        assert!(matches!(build_graph(&spec), Err(Error::InvalidAdjacency(_))));
        let mut a = grid_adjacency(2, 2);
        a[(1, 1)] = 1.0;
        let spec = GraphSpec { adjacency: a, squeezing_db: 1.0, g: 0, alpha_g: Complex64::new(0.0, 0.0) };
        assert!(matches!(build_graph(&spec), Err(Error::InvalidAdjacency(_))));
    }

    #[test]
    fn neighbours() {
        let a = grid_adjacency(3, 3);
        assert_eq!(first_neighbour(&a, 1), Some(0));
        assert_eq!(first_neighbour(&a, 4), Some(1));
        assert_eq!(first_neighbour(&DMatrix::zeros(2, 2), 0), None);
    }
}
