//! Group-averaged quantum channels, their composition, Cesàro averaging,
//! and convergence diagnostics.
//!
//! Channels constructed here are convex combinations of unitary conjugations
//! (random-unitary channels). Cesàro limits, which need not admit a finite
//! unitary Kraus family, are carried in superoperator form behind the same
//! interface; see `cesaro_limit` for the convergence scheme.

use thiserror::Error;

use crate::group::{GroupMeasure, UnitaryRepresentation};
use crate::operator::{frobenius_distance, hermitian_eigenvalues, CMatrix, DensityState, OperatorError};
use num_complex::Complex64;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("representation and measure live on different groups")]
    GroupMismatch,
    #[error("weights are not a probability vector (sum {0})")]
    BadWeights(f64),
    #[error("Kraus unitary {0} is not unitary (deviation {1:.3e})")]
    NotUnitary(usize, f64),
    #[error("Cesàro averages did not converge within horizon {max_n} (last residual {last_residual:.3e})")]
    NoConvergence {
        max_n: usize,
        last_residual: f64,
        residuals: Vec<f64>,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Weight below which a Kraus term is dropped (and the rest renormalized).
const WEIGHT_FLOOR: f64 = 1e-15;
/// Unitaries closer than this (entrywise) are merged into one term.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Repr {
    /// Convex combination of unitary conjugations: ρ ↦ Σ w_i U_i ρ U_i†.
    MixedUnitary(Vec<(f64, CMatrix)>),
    /// dim²×dim² matrix acting on vec(ρ) (column-major).
    Superoperator(CMatrix),
}

/// A completely positive trace-preserving map on dim×dim density matrices.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    dim: usize,
    repr: Repr,
}

/// Choi encoding C = Σ_ij E_ij ⊗ Φ(E_ij); trace(C) = dim.
#[derive(Debug, Clone)]
pub struct ChoiMatrix {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl ChoiMatrix {
    /// Minimum eigenvalue; complete positivity means this is ≥ −1e-9.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix)
            .expect("Choi matrices of channels are Hermitian")
            .first()
            .cloned()
            .unwrap_or(0.0)
    }

    /// Partial trace over the output factor; equals I for trace-preserving maps.
    pub fn input_marginal(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut s = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    s += self.matrix[(i * d + a, j * d + a)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }
}

fn merge_terms(mut terms: Vec<(f64, CMatrix)>) -> Vec<(f64, CMatrix)> {
    let mut merged: Vec<(f64, CMatrix)> = Vec::new();
    for (w, u) in terms.drain(..) {
        if let Some((mw, _)) = merged
            .iter_mut()
            .find(|(_, mu)| mu.iter().zip(u.iter()).all(|(a, b)| (a - b).norm() < MERGE_TOL))
        {
            *mw += w;
        } else {
            merged.push((w, u));
        }
    }
    merged.retain(|(w, _)| *w >= WEIGHT_FLOOR);
    let total: f64 = merged.iter().map(|(w, _)| w).sum();
    for (w, _) in &mut merged {
        *w /= total;
    }
    merged
}

impl QuantumChannel {
    /// Builds a random-unitary channel from explicit weighted unitaries.
    pub fn mixed_unitary(terms: Vec<(f64, CMatrix)>) -> Result<Self, ChannelError> {
        let dim = terms.first().map(|(_, u)| u.nrows()).unwrap_or(0);
        if dim == 0 {
            return Err(ChannelError::DimensionMismatch(0, 0));
        }
        let sum: f64 = terms.iter().map(|(w, _)| w).sum();
        if (sum - 1.0).abs() > 1e-12 || terms.iter().any(|(w, _)| *w < 0.0) {
            return Err(ChannelError::BadWeights(sum));
        }
        let id = CMatrix::identity(dim, dim);
        for (i, (_, u)) in terms.iter().enumerate() {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(ChannelError::DimensionMismatch(dim, u.nrows()));
            }
            let dev = frobenius_distance(&(u.adjoint() * u), &id);
            if dev > 1e-10 {
                return Err(ChannelError::NotUnitary(i, dev));
            }
        }
        Ok(Self { dim, repr: Repr::MixedUnitary(merge_terms(terms)) })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            repr: Repr::MixedUnitary(vec![(1.0, CMatrix::identity(dim, dim))]),
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: CMatrix) -> Result<Self, ChannelError> {
        Self::mixed_unitary(vec![(1.0, u)])
    }

    /// The group-averaged channel ρ ↦ Σ_g μ(g) π(g) ρ π(g)†.
    pub fn group_average(
        rep: &UnitaryRepresentation,
        mu: &GroupMeasure,
    ) -> Result<Self, ChannelError> {
        if rep.group() != mu.group() {
            return Err(ChannelError::GroupMismatch);
        }
        let terms: Vec<(f64, CMatrix)> = (0..rep.group().order())
            .filter(|&g| mu.weight(g) > 0.0)
            .map(|g| (mu.weight(g), rep.image(g).clone()))
            .collect();
        Self::mixed_unitary(terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The weighted unitary family, when the channel carries one.
    /// Cesàro limits may only exist in superoperator form.
    pub fn kraus_terms(&self) -> Option<&[(f64, CMatrix)]> {
        match &self.repr {
            Repr::MixedUnitary(terms) => Some(terms),
            Repr::Superoperator(_) => None,
        }
    }

    /// Action on an arbitrary matrix (not just states).
    pub fn apply_matrix(&self, m: &CMatrix) -> CMatrix {
        match &self.repr {
            Repr::MixedUnitary(terms) => {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for (w, u) in terms {
                    out += (u * m * u.adjoint()).scale(*w);
                }
                out
            }
            Repr::Superoperator(t) => {
                let mut v = CMatrix::zeros(self.dim * self.dim, 1);
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        v[(j * self.dim + i, 0)] = m[(i, j)];
                    }
                }
                let w = t * v;
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        out[(i, j)] = w[(j * self.dim + i, 0)];
                    }
                }
                out
            }
        }
    }

    pub fn apply(&self, state: &DensityState) -> Result<DensityState, ChannelError> {
        if state.dim() != self.dim {
            return Err(ChannelError::DimensionMismatch(state.dim(), self.dim));
        }
        let out = self.apply_matrix(state.matrix());
        // Scrub roundoff so the output satisfies the construction invariants.
        let herm = (&out + out.adjoint()).scale(0.5);
        Ok(DensityState::new(herm)?)
    }

    /// The dim²×dim² matrix T with vec(Φ(ρ)) = T·vec(ρ), column-major.
    pub fn superoperator(&self) -> CMatrix {
        match &self.repr {
            Repr::MixedUnitary(terms) => {
                let d2 = self.dim * self.dim;
                let mut t = CMatrix::zeros(d2, d2);
                for (w, u) in terms {
                    t += u.conjugate().kronecker(u).scale(*w);
                }
                t
            }
            Repr::Superoperator(t) => t.clone(),
        }
    }

    fn from_superoperator(dim: usize, t: CMatrix) -> Self {
        Self { dim, repr: Repr::Superoperator(t) }
    }

    /// Composition a∘b: apply b first, then a.
    pub fn compose(&self, other: &QuantumChannel) -> Result<QuantumChannel, ChannelError> {
        if self.dim != other.dim {
            return Err(ChannelError::DimensionMismatch(self.dim, other.dim));
        }
        match (&self.repr, &other.repr) {
            (Repr::MixedUnitary(a), Repr::MixedUnitary(b)) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for (wa, ua) in a {
                    for (wb, ub) in b {
                        terms.push((wa * wb, ua * ub));
                    }
                }
                Ok(QuantumChannel {
                    dim: self.dim,
                    repr: Repr::MixedUnitary(merge_terms(terms)),
                })
            }
            _ => Ok(QuantumChannel::from_superoperator(
                self.dim,
                self.superoperator() * other.superoperator(),
            )),
        }
    }

    /// n-fold composition power.
    pub fn power(&self, n: usize) -> QuantumChannel {
        assert!(n >= 1);
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.compose(self).expect("same dim");
        }
        acc
    }

    /// The Choi matrix Σ_ij E_ij ⊗ Φ(E_ij).
    pub fn choi(&self) -> ChoiMatrix {
        let d = self.dim;
        let mut c = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let mut eij = CMatrix::zeros(d, d);
                eij[(i, j)] = Complex64::new(1.0, 0.0);
                let img = self.apply_matrix(&eij);
                for a in 0..d {
                    for b in 0..d {
                        c[(i * d + a, j * d + b)] = img[(a, b)];
                    }
                }
            }
        }
        ChoiMatrix { dim: d, matrix: c }
    }

    /// Frobenius distance between Choi matrices. On a fixed finite dimension
    /// this dominates all the operator topologies in play.
    pub fn distance(&self, other: &QuantumChannel) -> Result<f64, ChannelError> {
        if self.dim != other.dim {
            return Err(ChannelError::DimensionMismatch(self.dim, other.dim));
        }
        Ok(frobenius_distance(&self.choi().matrix, &other.choi().matrix))
    }

    /// (1/n)·(Φ + Φ² + … + Φⁿ) as an explicit convex combination.
    pub fn cesaro_average(&self, n: usize) -> QuantumChannel {
        assert!(n >= 1);
        match &self.repr {
            Repr::MixedUnitary(_) => {
                let mut union: Vec<(f64, CMatrix)> = Vec::new();
                let mut power = self.clone();
                for k in 1..=n {
                    if let Repr::MixedUnitary(terms) = &power.repr {
                        for (w, u) in terms {
                            union.push((w / n as f64, u.clone()));
                        }
                    }
                    if k < n {
                        power = power.compose(self).expect("same dim");
                    }
                }
                QuantumChannel {
                    dim: self.dim,
                    repr: Repr::MixedUnitary(merge_terms(union)),
                }
            }
            Repr::Superoperator(t) => {
                let d2 = self.dim * self.dim;
                let mut sum = CMatrix::zeros(d2, d2);
                let mut p = CMatrix::identity(d2, d2);
                for _ in 1..=n {
                    p = t * &p;
                    sum += &p;
                }
                QuantumChannel::from_superoperator(self.dim, sum.scale(1.0 / n as f64))
            }
        }
    }
}

/// Convergence trace of `cesaro_limit`.
#[derive(Debug, Clone)]
pub struct CesaroDiagnostics {
    /// Choi-Frobenius residuals between successive estimates.
    pub residuals: Vec<f64>,
    /// Power horizon n the final estimate is equivalent to.
    pub effective_horizon: usize,
}

/// Computes the Cesàro limit Φ̄ of Φ, Φ², Φ³, ….
///
/// Successive partial averages of a rotating unitary part shrink only like
/// 1/n, so iterating them literally cannot reach tight tolerances. Instead we
/// iterate the half-averaged map R = (I + T)/2 by repeated squaring: R^n
/// converges geometrically to the same limit (the eigenprojection onto the
/// fixed space of T, which is exactly the Cesàro limit for a contraction),
/// and squaring reaches horizon n = 2^k after k steps. `max_n` bounds the
/// horizon; `tol` bounds the Choi-Frobenius residual between successive
/// estimates.
pub fn cesaro_limit(
    phi: &QuantumChannel,
    tol: f64,
    max_n: usize,
) -> Result<(QuantumChannel, CesaroDiagnostics), ChannelError> {
    assert!(tol > 0.0);
    let d2 = phi.dim() * phi.dim();
    let t = phi.superoperator();
    let mut r = (CMatrix::identity(d2, d2) + &t).scale(0.5);
    let mut residuals = Vec::new();
    let mut horizon = 1usize;
    loop {
        let next = &r * &r;
        // Choi is an entrywise rearrangement of the superoperator, so the
        // Choi-Frobenius residual equals the superoperator Frobenius residual.
        let res = frobenius_distance(&next, &r);
        residuals.push(res);
        r = next;
        horizon = horizon.saturating_mul(2);
        if res < tol {
            break;
        }
        if horizon > max_n {
            let last = *residuals.last().unwrap();
            return Err(ChannelError::NoConvergence {
                max_n,
                last_residual: last,
                residuals,
            });
        }
    }
    let limit = QuantumChannel::from_superoperator(phi.dim(), r);
    Ok((limit, CesaroDiagnostics { residuals, effective_horizon: horizon }))
}

/// Sequence d_n = max_h TV(μ^{*n}, L_h μ^{*n}) for n = 1..max_n. Total
/// variation dominates the weak seminorms induced by matrix coefficients on a
/// finite group, so d_n → 0 certifies convergence toward left-invariance.
pub fn invariance_diagnostic(
    rep: &UnitaryRepresentation,
    mu: &GroupMeasure,
    max_n: usize,
) -> Result<Vec<f64>, ChannelError> {
    if rep.group() != mu.group() {
        return Err(ChannelError::GroupMismatch);
    }
    let order = mu.group().order();
    let mut out = Vec::with_capacity(max_n);
    let mut power = mu.clone();
    for n in 1..=max_n {
        let d = (0..order)
            .map(|h| {
                let shifted = power.left_shift(h).expect("valid element");
                power.total_variation(&shifted).expect("same group")
            })
            .fold(0.0, f64::max);
        out.push(d);
        if n < max_n {
            power = power.convolve(mu).expect("same group");
        }
    }
    Ok(out)
}

/// Least-squares fit of a (signed) weight vector w over the representation
/// images so that Σ_g w_g π(g)·π(g)† best matches the given channel; reports
/// the weights and the Choi-Frobenius residual. A small residual suggests the
/// channel may itself be a group average; no conclusion is drawn.
pub fn fit_group_measure(
    rep: &UnitaryRepresentation,
    phi: &QuantumChannel,
) -> Result<(Vec<f64>, f64), ChannelError> {
    if rep.dim() != phi.dim() {
        return Err(ChannelError::DimensionMismatch(rep.dim(), phi.dim()));
    }
    let order = rep.group().order();
    let t = phi.superoperator();
    let kernels: Vec<CMatrix> = (0..order)
        .map(|g| {
            let u = rep.image(g);
            u.conjugate().kronecker(u)
        })
        .collect();
    let inner = |a: &CMatrix, b: &CMatrix| -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
    };
    let mut gram = nalgebra::DMatrix::<f64>::zeros(order, order);
    let mut rhs = nalgebra::DVector::<f64>::zeros(order);
    for g in 0..order {
        for h in 0..order {
            gram[(g, h)] = inner(&kernels[g], &kernels[h]);
        }
        rhs[g] = inner(&kernels[g], &t);
    }
    let svd = gram.svd(true, true);
    let w = svd.solve(&rhs, 1e-12).map_err(|_| ChannelError::BadWeights(f64::NAN))?;
    let mut fitted = CMatrix::zeros(t.nrows(), t.ncols());
    for g in 0..order {
        fitted += kernels[g].scale(w[g]);
    }
    let residual = frobenius_distance(&fitted, &t);
    Ok((w.iter().cloned().collect(), residual))
}
