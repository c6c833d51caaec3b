//! Finite groups, finitely-additive probability measures on them,
//! convolution, shifts, and left-invariance diagnostics.
//!
//! On a finite group a finitely-additive probability measure is exactly a
//! vector of point masses; the set function μ(E) is recovered as the sum of
//! the weights over E. Group elements are dense indices 0..order−1.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::operator::{frobenius_distance, CMatrix};

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("multiplication table is not {0}×{0}")]
    MalformedTable(usize),
    #[error("associativity fails at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("identity {0} is inconsistent with the table")]
    BadIdentity(usize),
    #[error("inverse table inconsistent at element {0}")]
    BadInverse(usize),
    #[error("measures/representations live on different groups")]
    GroupMismatch,
    #[error("weights are not a probability vector (sum {0})")]
    NotProbability(f64),
    #[error("negative weight {1} at element {0}")]
    NegativeWeight(usize, f64),
    #[error("image of element {0} is not unitary (deviation {1:.3e})")]
    NotUnitary(usize, f64),
    #[error("homomorphism fails at pair ({0}, {1}) (deviation {2:.3e})")]
    NotHomomorphism(usize, usize, f64),
    #[error("element index {0} out of range for group of order {1}")]
    BadElement(usize, usize),
}

/// A finite group given by its full multiplication table.
#[derive(Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    mul: Vec<usize>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    /// Builds a group from a multiplication table, checking associativity
    /// exhaustively (orders up to 64 keep this cheap).
    pub fn from_table(mul: Vec<Vec<usize>>) -> Result<Arc<Self>, GroupError> {
        let order = mul.len();
        if order == 0 || mul.iter().any(|row| row.len() != order) {
            return Err(GroupError::MalformedTable(order));
        }
        let flat: Vec<usize> = mul.iter().flatten().cloned().collect();
        if flat.iter().any(|&x| x >= order) {
            return Err(GroupError::MalformedTable(order));
        }
        let at = |a: usize, b: usize| flat[a * order + b];
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if at(at(a, b), c) != at(a, at(b, c)) {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or(GroupError::BadIdentity(0))?;
        let mut inverse = vec![0usize; order];
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or(GroupError::BadInverse(a))?;
            inverse[a] = inv;
        }
        Ok(Arc::new(Self { order, mul: flat, identity, inverse }))
    }

    /// The cyclic group ℤ_n.
    pub fn cyclic(n: usize) -> Arc<Self> {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(mul).expect("cyclic table is a group")
    }

    /// Direct product of two groups; element (a, b) has index a·|H| + b.
    pub fn product(g: &Arc<FiniteGroup>, h: &Arc<FiniteGroup>) -> Arc<Self> {
        let n = g.order * h.order;
        let mut mul = vec![vec![0usize; n]; n];
        for a1 in 0..g.order {
            for b1 in 0..h.order {
                for a2 in 0..g.order {
                    for b2 in 0..h.order {
                        let x = a1 * h.order + b1;
                        let y = a2 * h.order + b2;
                        mul[x][y] = g.mul_elem(a1, a2) * h.order + h.mul_elem(b1, b2);
                    }
                }
            }
        }
        Self::from_table(mul).expect("product table is a group")
    }

    /// The symmetric group S₃ (non-abelian, order 6). Elements are the
    /// permutations of {0,1,2} in lexicographic one-line order.
    pub fn symmetric_3() -> Arc<Self> {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let compose = |p: &[usize; 3], q: &[usize; 3]| [p[q[0]], p[q[1]], p[q[2]]];
        let index = |r: &[usize; 3]| perms.iter().position(|p| p == r).unwrap();
        let mul = perms
            .iter()
            .map(|p| perms.iter().map(|q| index(&compose(p, q))).collect())
            .collect();
        Self::from_table(mul).expect("S3 table is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul_elem(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul_elem(a, b) == self.mul_elem(b, a)))
    }
}

/// A finitely-additive probability measure on a finite group, stored as
/// point masses.
#[derive(Debug, Clone)]
pub struct GroupMeasure {
    group: Arc<FiniteGroup>,
    weights: Vec<f64>,
}

impl GroupMeasure {
    pub fn new(group: Arc<FiniteGroup>, weights: Vec<f64>) -> Result<Self, GroupError> {
        if weights.len() != group.order() {
            return Err(GroupError::MalformedTable(weights.len()));
        }
        for (g, &w) in weights.iter().enumerate() {
            if w < 0.0 {
                return Err(GroupError::NegativeWeight(g, w));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(GroupError::NotProbability(sum));
        }
        Ok(Self { group, weights })
    }

    /// Point mass at g.
    pub fn delta(group: Arc<FiniteGroup>, g: usize) -> Result<Self, GroupError> {
        if g >= group.order() {
            return Err(GroupError::BadElement(g, group.order()));
        }
        let mut weights = vec![0.0; group.order()];
        weights[g] = 1.0;
        Ok(Self { group, weights })
    }

    /// The normalized counting measure; the left-invariant measure on a
    /// finite group.
    pub fn haar_uniform(group: Arc<FiniteGroup>) -> Self {
        let order = group.order();
        Self { group, weights: vec![1.0 / order as f64; order] }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, g: usize) -> f64 {
        self.weights[g]
    }

    /// μ(E) = Σ_{g∈E} weights[g].
    pub fn measure_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&g| self.weights[g]).sum()
    }

    fn same_group(&self, other: &GroupMeasure) -> Result<(), GroupError> {
        if self.group != other.group {
            return Err(GroupError::GroupMismatch);
        }
        Ok(())
    }

    /// (μ*ν)(t) = Σ_{gh=t} μ(g)ν(h).
    pub fn convolve(&self, other: &GroupMeasure) -> Result<Self, GroupError> {
        self.same_group(other)?;
        let order = self.group.order();
        let mut weights = vec![0.0; order];
        for g in 0..order {
            if self.weights[g] == 0.0 {
                continue;
            }
            for h in 0..order {
                weights[self.group.mul_elem(g, h)] += self.weights[g] * other.weights[h];
            }
        }
        Ok(Self { group: self.group.clone(), weights })
    }

    /// n-fold convolution power μ^{*n}, n ≥ 1.
    pub fn convolution_power(&self, n: usize) -> Self {
        assert!(n >= 1, "convolution power requires n >= 1");
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.convolve(self).expect("same group");
        }
        acc
    }

    /// (L_hμ)(g) = μ(h·g).
    pub fn left_shift(&self, h: usize) -> Result<Self, GroupError> {
        if h >= self.group.order() {
            return Err(GroupError::BadElement(h, self.group.order()));
        }
        let order = self.group.order();
        let mut weights = vec![0.0; order];
        for g in 0..order {
            weights[g] = self.weights[self.group.mul_elem(h, g)];
        }
        Ok(Self { group: self.group.clone(), weights })
    }

    /// (1/2)·Σ_g |μ(g) − ν(g)|.
    pub fn total_variation(&self, other: &GroupMeasure) -> Result<f64, GroupError> {
        self.same_group(other)?;
        Ok(0.5
            * self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// True iff μ = L_hμ for every h, up to total variation 1e-12.
    pub fn is_left_invariant(&self) -> bool {
        (0..self.group.order()).all(|h| {
            let shifted = self.left_shift(h).expect("valid element");
            self.total_variation(&shifted).expect("same group") < 1e-12
        })
    }
}

/// A unitary representation π: G → 𝒰(ℂ^dim), stored as explicit matrices.
#[derive(Debug, Clone)]
pub struct UnitaryRepresentation {
    group: Arc<FiniteGroup>,
    dim: usize,
    images: Vec<CMatrix>,
}

impl UnitaryRepresentation {
    pub fn new(group: Arc<FiniteGroup>, images: Vec<CMatrix>) -> Result<Self, GroupError> {
        let order = group.order();
        if images.len() != order {
            return Err(GroupError::MalformedTable(images.len()));
        }
        let dim = images[0].nrows();
        let id = CMatrix::identity(dim, dim);
        for (g, u) in images.iter().enumerate() {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(GroupError::MalformedTable(g));
            }
            let dev = frobenius_distance(&(u.adjoint() * u), &id);
            if dev > 1e-10 {
                return Err(GroupError::NotUnitary(g, dev));
            }
        }
        for g in 0..order {
            for h in 0..order {
                let dev = frobenius_distance(&(&images[g] * &images[h]), &images[group.mul_elem(g, h)]);
                if dev > 1e-10 {
                    return Err(GroupError::NotHomomorphism(g, h, dev));
                }
            }
        }
        Ok(Self { group, dim, images })
    }

    /// Diagonal phase representation of ℤ_n: π(k) = diag(ω^{k·m_j}) with
    /// ω = e^{2πi/n}, optionally conjugated by a fixed unitary.
    pub fn cyclic_phases(
        group: Arc<FiniteGroup>,
        exponents: &[i64],
        conjugator: Option<&CMatrix>,
    ) -> Result<Self, GroupError> {
        let n = group.order();
        let dim = exponents.len();
        let omega = 2.0 * std::f64::consts::PI / n as f64;
        let images = (0..n)
            .map(|k| {
                let mut m = CMatrix::zeros(dim, dim);
                for (j, &e) in exponents.iter().enumerate() {
                    let phase = omega * (k as f64) * (e as f64);
                    m[(j, j)] = Complex64::from_polar(1.0, phase);
                }
                match conjugator {
                    Some(v) => v * m * v.adjoint(),
                    None => m,
                }
            })
            .collect();
        Self::new(group, images)
    }

    /// Sign-character representation of ℤ₂ × … (order-2 factors):
    /// element index is interpreted in mixed radix over the factors.
    /// For ℤ₂ the classic {I, X} swap representation is `swap_z2`.
    pub fn swap_z2(group: Arc<FiniteGroup>) -> Result<Self, GroupError> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let id = CMatrix::identity(2, 2);
        let x = CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
        Self::new(group, vec![id, x])
    }

    /// Character representation of ℤ₂×ℤ₂: π(a,b) = diag((−1)^a, (−1)^b).
    pub fn signs_z2z2(group: Arc<FiniteGroup>) -> Result<Self, GroupError> {
        let sign = |s: usize| Complex64::new(if s == 0 { 1.0 } else { -1.0 }, 0.0);
        let images = (0..4)
            .map(|k| {
                let (a, b) = (k / 2, k % 2);
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = sign(a);
                m[(1, 1)] = sign(b);
                m
            })
            .collect();
        Self::new(group, images)
    }

    /// The 2-dimensional standard representation of S₃ realized by the
    /// symmetries of an equilateral triangle (rotations and reflections).
    pub fn s3_standard(group: Arc<FiniteGroup>) -> Result<Self, GroupError> {
        // Permutation matrices of S3 acting on ℂ³ restricted to the plane
        // orthogonal to (1,1,1), expressed in an orthonormal basis of it.
        let b1 = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
        let b2 = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let images = perms
            .iter()
            .map(|p| {
                // Matrix of v ↦ v∘p⁻¹ in the basis (b1, b2).
                let apply = |v: &[f64; 3]| {
                    let mut out = [0.0; 3];
                    for i in 0..3 {
                        out[p[i]] = v[i];
                    }
                    out
                };
                let pb1 = apply(&b1);
                let pb2 = apply(&b2);
                let dot = |x: &[f64; 3], y: &[f64; 3]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
                let mut m = CMatrix::zeros(2, 2);
                m[(0, 0)] = Complex64::new(dot(&b1, &pb1), 0.0);
                m[(0, 1)] = Complex64::new(dot(&b1, &pb2), 0.0);
                m[(1, 0)] = Complex64::new(dot(&b2, &pb1), 0.0);
                m[(1, 1)] = Complex64::new(dot(&b2, &pb2), 0.0);
                m
            })
            .collect();
        Self::new(group, images)
    }

    /// Left regular representation: permutation matrices on ℂ^{|G|}.
    pub fn regular(group: Arc<FiniteGroup>) -> Self {
        let order = group.order();
        let images = (0..order)
            .map(|g| {
                let mut m: DMatrix<Complex64> = CMatrix::zeros(order, order);
                for h in 0..order {
                    m[(group.mul_elem(g, h), h)] = Complex64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        Self::new(group.clone(), images).expect("regular representation is unitary")
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, g: usize) -> &CMatrix {
        &self.images[g]
    }
}
