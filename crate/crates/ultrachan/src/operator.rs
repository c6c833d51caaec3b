//! Dense complex linear algebra for finite-dimensional Hilbert spaces:
//! states, observables, projectors, norms, and the pairing ⟨ρ, A⟩.
//!
//! The inner product is linear in the *second* argument throughout, as in
//! quantum mechanics, so ⟨ρ, A⟩ is realized as `trace(ρ·A)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

/// Construction tolerance for entrywise invariants (Hermiticity, trace one).
pub const TOL_CONSTRUCT: f64 = 1e-12;
/// Tolerance for spectral quantities (eigenvalue positivity, projector law).
pub const TOL_SPECTRAL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is not 1 (got {0})")]
    NotUnitTrace(f64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NegativeEigenvalue(f64),
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("not a projector (deviation {0:.3e})")]
    NotProjector(f64),
    #[error("non-negligible imaginary part {0:.3e} in a real pairing")]
    NonNegligibleImaginaryPart(f64),
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    (m - adj).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix, ascending. Rejects non-Hermitian input
/// so we never touch non-normal spectral territory.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>, OperatorError> {
    let dev = hermitian_deviation(m);
    if dev > 1e-9 {
        return Err(OperatorError::NotHermitian(dev));
    }
    // Symmetrize to scrub roundoff before the solver.
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

pub fn frobenius_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A bounded observable: a Hermitian matrix on ℂ^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    pub fn new(mat: CMatrix) -> Result<Self, OperatorError> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(OperatorError::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        let dev = hermitian_deviation(&mat);
        if dev > TOL_CONSTRUCT {
            return Err(OperatorError::NotHermitian(dev));
        }
        Ok(Self { mat })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim, dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut mat = CMatrix::zeros(dim, dim);
        for (i, v) in values.iter().enumerate() {
            mat[(i, i)] = Complex64::new(*v, 0.0);
        }
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        let vals = hermitian_eigenvalues(&self.mat).expect("validated at construction");
        vals.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    mat: CMatrix,
}

impl DensityState {
    pub fn new(mat: CMatrix) -> Result<Self, OperatorError> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(OperatorError::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        let dev = hermitian_deviation(&mat);
        if dev > TOL_CONSTRUCT {
            return Err(OperatorError::NotHermitian(dev));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TOL_CONSTRUCT || tr.im.abs() > TOL_CONSTRUCT {
            return Err(OperatorError::NotUnitTrace(tr.re));
        }
        let vals = hermitian_eigenvalues(&mat)?;
        if let Some(min) = vals.first() {
            if *min < -TOL_SPECTRAL {
                return Err(OperatorError::NegativeEigenvalue(*min));
            }
        }
        Ok(Self { mat })
    }

    /// The outer product u u† of a unit vector: a rank-1 state.
    pub fn vector_state(u: &CVector) -> Result<Self, OperatorError> {
        let norm = u.norm();
        if (norm - 1.0).abs() > TOL_CONSTRUCT {
            return Err(OperatorError::NotNormalized(norm));
        }
        let mat = u * u.adjoint();
        Ok(Self { mat })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mat = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self { mat }
    }

    /// Convex combination of states. Weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, DensityState)]) -> Result<Self, OperatorError> {
        let dim = parts.first().map(|(_, s)| s.dim()).unwrap_or(0);
        let mut mat = CMatrix::zeros(dim, dim);
        for (w, s) in parts {
            if s.dim() != dim {
                return Err(OperatorError::DimensionMismatch(dim, s.dim()));
            }
            mat += s.mat.scale(*w);
        }
        Self::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// trace(ρ²); equals 1 (within spectral tolerance) iff the state is rank 1.
    pub fn purity_degree(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }
}

/// An orthogonal projector: P² = P, P† = P.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    mat: CMatrix,
}

impl Projector {
    pub fn new(mat: CMatrix) -> Result<Self, OperatorError> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(OperatorError::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        let herm_dev = frobenius_distance(&mat, &mat.adjoint());
        let idem_dev = frobenius_distance(&(&mat * &mat), &mat);
        let dev = herm_dev.max(idem_dev);
        if dev > TOL_SPECTRAL {
            return Err(OperatorError::NotProjector(dev));
        }
        Ok(Self { mat })
    }

    /// Rank-1 projector 𝐏_u onto the span of a unit vector.
    pub fn onto(u: &CVector) -> Result<Self, OperatorError> {
        let norm = u.norm();
        if (norm - 1.0).abs() > TOL_CONSTRUCT {
            return Err(OperatorError::NotNormalized(norm));
        }
        Ok(Self { mat: u * u.adjoint() })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn as_observable(&self) -> HermitianOperator {
        HermitianOperator::new(self.mat.clone()).expect("projectors are Hermitian")
    }
}

/// The pairing ⟨ρ, A⟩ = trace(ρA), validated to be real.
pub fn expect(state: &DensityState, obs: &HermitianOperator) -> Result<f64, OperatorError> {
    if state.dim() != obs.dim() {
        return Err(OperatorError::DimensionMismatch(state.dim(), obs.dim()));
    }
    let tr = (state.matrix() * obs.matrix()).trace();
    if tr.im.abs() > TOL_SPECTRAL {
        return Err(OperatorError::NonNegligibleImaginaryPart(tr.im));
    }
    Ok(tr.re)
}

/// Trace pairing extended to an arbitrary (not necessarily Hermitian) matrix.
/// Used where products like P⊥A appear inside inequalities.
pub fn expect_raw(state: &DensityState, op: &CMatrix) -> Result<Complex64, OperatorError> {
    if state.dim() != op.nrows() {
        return Err(OperatorError::DimensionMismatch(state.dim(), op.nrows()));
    }
    Ok((state.matrix() * op).trace())
}

/// (1/2)·Σ|eigenvalues(a − b)|; zero iff the states coincide.
pub fn trace_distance(a: &DensityState, b: &DensityState) -> Result<f64, OperatorError> {
    if a.dim() != b.dim() {
        return Err(OperatorError::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = a.matrix() - b.matrix();
    let vals = hermitian_eigenvalues(&diff)?;
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn basis_vector(dim: usize, k: usize) -> CVector {
        let mut v = CVector::zeros(dim);
        v[k] = c(1.0, 0.0);
        v
    }

    fn plus_state() -> CVector {
        let s = 1.0 / 2.0_f64.sqrt();
        CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)])
    }

    #[test]
    fn expect_identity_is_one() {
        let rho = DensityState::vector_state(&plus_state()).unwrap();
        let id = HermitianOperator::identity(2);
        assert!((expect(&rho, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expect_plus_state_on_diag10_is_half() {
        let rho = DensityState::vector_state(&plus_state()).unwrap();
        let a = HermitianOperator::diagonal(&[1.0, 0.0]);
        assert!((expect(&rho, &a).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn expect_matches_double_loop_trace_oracle() {
        // Independent oracle: trace(ρA) = Σ_{ij} ρ_ij A_ji by two explicit loops.
        let u = {
            let mut v = CVector::from_vec(vec![c(0.3, 0.4), c(0.5, -0.2), c(0.1, 0.6)]);
            let n = v.norm();
            v /= c(n, 0.0);
            v
        };
        let rho = DensityState::vector_state(&u).unwrap();
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 1)] = c(-2.0, 0.0);
        m[(2, 2)] = c(0.5, 0.0);
        m[(0, 1)] = c(0.3, 0.7);
        m[(1, 0)] = c(0.3, -0.7);
        m[(1, 2)] = c(-0.1, 0.2);
        m[(2, 1)] = c(-0.1, -0.2);
        let a = HermitianOperator::new(m).unwrap();
        let mut oracle = c(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                oracle += rho.matrix()[(i, j)] * a.matrix()[(j, i)];
            }
        }
        let got = expect(&rho, &a).unwrap();
        assert!((got - oracle.re).abs() < 1e-12);
        assert!(oracle.im.abs() < 1e-12);
    }

    #[test]
    fn vector_state_basis_and_superpositions() {
        let e0 = DensityState::vector_state(&basis_vector(2, 0)).unwrap();
        assert!(frobenius_distance(e0.matrix(), &CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]))) < 1e-12);

        let plus = DensityState::vector_state(&plus_state()).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((plus.matrix()[(i, j)] - c(0.5, 0.0)).norm() < 1e-12);
            }
        }

        let s = 1.0 / 2.0_f64.sqrt();
        let u = CVector::from_vec(vec![c(s, 0.0), c(0.0, s)]);
        let rho = DensityState::vector_state(&u).unwrap();
        assert!((rho.matrix()[(0, 0)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((rho.matrix()[(0, 1)] - c(0.0, -0.5)).norm() < 1e-12);
        assert!((rho.matrix()[(1, 0)] - c(0.0, 0.5)).norm() < 1e-12);
        assert!((rho.matrix()[(1, 1)] - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vector_state_rejects_unnormalized() {
        let v = CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            DensityState::vector_state(&v),
            Err(OperatorError::NotNormalized(_))
        ));
    }

    #[test]
    fn projector_onto_basis_vector() {
        let p = Projector::onto(&basis_vector(3, 1)).unwrap();
        let expected = HermitianOperator::diagonal(&[0.0, 1.0, 0.0]);
        assert!(frobenius_distance(p.matrix(), expected.matrix()) < 1e-12);
    }

    #[test]
    fn projector_overlap_squared() {
        // (v, P_u v) = |(u,v)|² with v = e_0, u = (1,1)/√2.
        let p = Projector::onto(&plus_state()).unwrap();
        let v = basis_vector(2, 0);
        let val = (v.adjoint() * p.matrix() * &v)[(0, 0)];
        assert!((val.re - 0.5).abs() < 1e-12);
        assert!(val.im.abs() < 1e-12);
    }

    #[test]
    fn projector_idempotent_on_random_vector() {
        let p = Projector::onto(&plus_state()).unwrap();
        let v = CVector::from_vec(vec![c(0.2, 0.9), c(-0.4, 0.1)]);
        let once = p.matrix() * &v;
        let twice = p.matrix() * &once;
        assert!((once - twice).norm() < 1e-12);
        let pp = p.matrix() * p.matrix();
        assert!(frobenius_distance(&pp, p.matrix()) < 1e-12);
    }

    #[test]
    fn operator_norm_examples() {
        // diag(1,0) − 0.5·I has eigenvalues ±0.5.
        let a = HermitianOperator::diagonal(&[0.5, -0.5]);
        assert!((a.operator_norm() - 0.5).abs() < 1e-12);

        let z = HermitianOperator::new(CMatrix::zeros(2, 2)).unwrap();
        assert!(z.operator_norm() < 1e-15);

        let d = HermitianOperator::diagonal(&[3.0, -7.0]);
        assert!((d.operator_norm() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn purity_degree_examples() {
        let pure = DensityState::vector_state(&plus_state()).unwrap();
        assert!((pure.purity_degree() - 1.0).abs() < 1e-10);

        let mixed = DensityState::maximally_mixed(2);
        assert!((mixed.purity_degree() - 0.5).abs() < 1e-12);

        let e0 = DensityState::vector_state(&basis_vector(2, 0)).unwrap();
        let e1 = DensityState::vector_state(&basis_vector(2, 1)).unwrap();
        let m = DensityState::mixture(&[(0.3, e0), (0.7, e1)]).unwrap();
        assert!((m.purity_degree() - 0.58).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = DensityState::vector_state(&plus_state()).unwrap();
        assert!(trace_distance(&rho, &rho).unwrap() < 1e-12);

        let e0 = DensityState::vector_state(&basis_vector(2, 0)).unwrap();
        let e1 = DensityState::vector_state(&basis_vector(2, 1)).unwrap();
        assert!((trace_distance(&e0, &e1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_matches_spectral_oracle() {
        let u1 = {
            let mut v = CVector::from_vec(vec![c(0.6, 0.1), c(0.2, -0.5), c(0.3, 0.3)]);
            let n = v.norm();
            v /= c(n, 0.0);
            v
        };
        let u2 = {
            let mut v = CVector::from_vec(vec![c(0.1, -0.2), c(0.8, 0.0), c(0.0, 0.4)]);
            let n = v.norm();
            v /= c(n, 0.0);
            v
        };
        let a = DensityState::vector_state(&u1).unwrap();
        let b = DensityState::vector_state(&u2).unwrap();
        // Brute-force eigenvalue sum via the library's Hermitian solver applied
        // to the explicit difference matrix (independent of trace_distance's path).
        let diff = a.matrix() - b.matrix();
        let eig = diff.clone().symmetric_eigen();
        let oracle: f64 = 0.5 * eig.eigenvalues.iter().map(|v| v.abs()).sum::<f64>();
        assert!((trace_distance(&a, &b).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn density_rejects_bad_input() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.1, 0.0); // not Hermitian vs (1,0)=0
        assert!(DensityState::new(m).is_err());

        let m2 = CMatrix::identity(2, 2); // trace 2
        assert!(matches!(DensityState::new(m2), Err(OperatorError::NotUnitTrace(_))));

        let m3 = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5, 0.0), c(-0.5, 0.0)]));
        assert!(matches!(
            DensityState::new(m3),
            Err(OperatorError::NegativeEigenvalue(_))
        ));
    }

    #[test]
    fn expect_dimension_mismatch() {
        let rho = DensityState::maximally_mixed(2);
        let a = HermitianOperator::identity(3);
        assert!(matches!(
            expect(&rho, &a),
            Err(OperatorError::DimensionMismatch(2, 3))
        ));
    }
}
