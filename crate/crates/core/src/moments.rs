//! Moments of zero-mean Gaussian vectors.
//!
//! [`isserlis_moment`] is the literal pairing sum `E[y_{i1}…y_{ik}] = Σ_pairings Π Σ_ab`;
//! the quadratic-form helpers are its matrix-level collapse and are what the
//! photon-subtraction purity uses in practice.

use nalgebra::{DMatrix, DVector};

/// `E[y_{i_1} ⋯ y_{i_k}]` for `y ~ N(0, cov)` by recursive Wick pairing.
///
/// Cost grows like `(k−1)!!`, so this is meant for low orders.
pub fn isserlis_moment(cov: &DMatrix<f64>, indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 1.0;
    }
    if indices.len() % 2 == 1 {
        return 0.0;
    }
    let first = indices[0];
    let rest = &indices[1..];
    let mut total = 0.0;
    for (pos, &partner) in rest.iter().enumerate() {
        let c = cov[(first, partner)];
        if c == 0.0 {
            continue;
        }
        let remaining: Vec<usize> =
            rest.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &v)| v).collect();
        total += c * isserlis_moment(cov, &remaining);
    }
    total
}

/// A quadratic polynomial `yᵗQy + qᵗy + c` in a centred phase-space variable.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    pub quad: DMatrix<f64>,
    pub lin: DVector<f64>,
    pub constant: f64,
}

impl QuadraticForm {
    pub fn eval(&self, y: &DVector<f64>) -> f64 {
        (y.transpose() * &self.quad * y)[(0, 0)] + self.lin.dot(y) + self.constant
    }

    /// `E[p(y)]` for `y ~ N(0, cov)`.
    pub fn expectation(&self, cov: &DMatrix<f64>) -> f64 {
        (&self.quad * cov).trace() + self.constant
    }

    /// `E[p(y)²]` for `y ~ N(0, cov)`:
    /// `(tr QΣ)² + 2 tr(QΣQΣ) + qᵗΣq + c² + 2c tr QΣ`.
    pub fn second_moment(&self, cov: &DMatrix<f64>) -> f64 {
        let qs = &self.quad * cov;
        let t = qs.trace();
        let tt = (&qs * &qs).trace();
        let lin = (self.lin.transpose() * cov * &self.lin)[(0, 0)];
        t * t + 2.0 * tt + lin + self.constant * self.constant + 2.0 * self.constant * t
    }

    /// `E[y p(y)] = Σ q` for `y ~ N(0, cov)`.
    pub fn first_moment(&self, cov: &DMatrix<f64>) -> DVector<f64> {
        cov * &self.lin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cov() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.4, 0.3, 1.0, 0.2, -0.4, 0.2, 1.5])
    }

    #[test]
    fn low_order_moments() {
        let c = sample_cov();
        assert_eq!(isserlis_moment(&c, &[]), 1.0);
        assert_eq!(isserlis_moment(&c, &[1]), 0.0);
        assert_eq!(isserlis_moment(&c, &[0, 2]), -0.4);
        // E[y0^4] = 3 σ^4
        assert!((isserlis_moment(&c, &[0, 0, 0, 0]) - 12.0).abs() < 1e-14);
        // E[y0 y1 y2 y2] = Σ01 Σ22 + 2 Σ02 Σ12
        let want = 0.3 * 1.5 + 2.0 * (-0.4) * 0.2;
        assert!((isserlis_moment(&c, &[0, 1, 2, 2]) - want).abs() < 1e-14);
    }

    #[test]
    fn quadratic_form_moments_match_pairings() {
        let c = sample_cov();
        let q = QuadraticForm {
            quad: DMatrix::from_row_slice(3, 3, &[1.0, 0.5, 0.0, 0.5, -2.0, 0.25, 0.0, 0.25, 0.7]),
            lin: DVector::from_vec(vec![0.3, -1.1, 0.4]),
            constant: -0.6,
        };
        let mut second = q.constant * q.constant;
        let mut first = q.constant;
        for a in 0..3 {
            first += (0..3).map(|b| q.quad[(a, b)] * c[(a, b)]).sum::<f64>();
            for b in 0..3 {
                second += q.lin[a] * q.lin[b] * isserlis_moment(&c, &[a, b]);
                second += 2.0 * q.constant * q.quad[(a, b)] * isserlis_moment(&c, &[a, b]);
                for d in 0..3 {
                    for e in 0..3 {
                        second += q.quad[(a, b)] * q.quad[(d, e)] * isserlis_moment(&c, &[a, b, d, e]);
                    }
                }
            }
        }
        assert!((q.expectation(&c) - first).abs() < 1e-12);
        assert!((q.second_moment(&c) - second).abs() < 1e-12);
    }
}
