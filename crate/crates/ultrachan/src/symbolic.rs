//! Symbolic states on ℓ²(domain): density parts plus ultralimit atoms, the
//! shift channel they feed, and executable checkers for singularity,
//! σ-additivity, Yosida–Hewitt splitting, excision, and purity.
//!
//! States that have no density matrix are represented formally: an
//! `Atom(𝒰, k)` stands for the limit of the basis states ρ_{e_{j+k}} along
//! the ultrafilter oracle 𝒰. Observables are restricted to the representable
//! algebra — finite blocks, step-diagonal operators, and diagonal terms with
//! an explicit modulus of vanishing — and every purity or singularity verdict
//! is asserted relative to that algebra only.
//!
//! Conventions: a cell E pairs with `Atom(𝒰, k)` through the decision of
//! E − k in 𝒰, so the atom reduces to the offset-free atom of the
//! pushforward handle `𝒰.shift_pushforward(-k)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::operator::CMatrix;
use crate::sets::{
    ultralimit, CountablePartition, DomainKind, OracleKind, SetError, SetExpr, SharedAlgebra,
    StepFunction, TwoValuedMeasure, UltrafilterOracle,
};

/// Tolerance for exact-by-construction identities evaluated in floats.
pub const TOL_EXCISION: f64 = 1e-12;

/// The ε schedule used when asserting that a vanishing diagonal term pairs
/// to zero with a singular atom.
pub const EPS_CHAIN: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, Error)]
pub enum SymbolicError {
    #[error("state weights must be nonnegative and sum to 1 (got {0})")]
    BadWeights(f64),
    #[error("density part is not a valid density matrix: {0}")]
    BadDensityPart(String),
    #[error("shift channel cannot track this input: {0}")]
    UnsupportedInput(String),
    #[error("the projector is not in the state's quantum filter (evaluates to {0}, not 1)")]
    FilterViolation(f64),
    #[error("the registered algebra neither distinguishes the atoms nor yields an excision projector")]
    InconclusiveAlgebra,
    #[error("the set has measure {0}, not strictly between 0 and 1")]
    NotIntermediate(f64),
    #[error("observable cell is not evaluable here: {0}")]
    UnregisteredCell(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// A diagonal term a_j = coeff / (1 + |j|): vanishes at infinity with the
/// explicit modulus ε ↦ { j : |a_j| > ε }, a finite set for every ε > 0.
#[derive(Debug, Clone)]
pub struct VanishingDiag {
    pub coeff: Complex64,
}

impl VanishingDiag {
    pub fn value_at(&self, j: i64) -> Complex64 {
        self.coeff / (1.0 + j.abs() as f64)
    }

    /// The finite exception set outside which |value| ≤ ε. Monotone:
    /// smaller ε gives a superset.
    pub fn exceptions(&self, eps: f64) -> Vec<i64> {
        let bound = (self.coeff.norm() / eps - 1.0).floor() as i64;
        (-bound.max(-1)..=bound).collect()
    }
}

/// An element of the representable observable algebra: a Hermitian matrix
/// supported on finitely many basis indices, plus a step-diagonal part, plus
/// an optional vanishing diagonal term.
#[derive(Debug, Clone)]
pub struct SymbolicObservable {
    pub finite_block: Option<(Vec<i64>, CMatrix)>,
    pub step_diag: Option<StepFunction>,
    pub vanishing_diag: Option<VanishingDiag>,
}

impl SymbolicObservable {
    pub fn identity() -> Self {
        Self {
            finite_block: None,
            step_diag: Some(StepFunction::constant(Complex64::new(1.0, 0.0))),
            vanishing_diag: None,
        }
    }

    pub fn step(f: StepFunction) -> Self {
        Self { finite_block: None, step_diag: Some(f), vanishing_diag: None }
    }

    /// The diagonal projector 1_E.
    pub fn cell_projector(e: SetExpr) -> Self {
        Self::step(StepFunction::new(
            vec![e.clone(), SetExpr::not(e)],
            vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        ))
    }

    pub fn finite_block(indices: Vec<i64>, matrix: CMatrix) -> Self {
        assert_eq!(indices.len(), matrix.nrows());
        assert_eq!(indices.len(), matrix.ncols());
        Self { finite_block: Some((indices, matrix)), step_diag: None, vanishing_diag: None }
    }

    /// The rank-one projector onto the basis vector e_k.
    pub fn basis_projector(k: i64) -> Self {
        Self::finite_block(vec![k], CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)))
    }

    pub fn vanishing(coeff: Complex64) -> Self {
        Self { finite_block: None, step_diag: None, vanishing_diag: Some(VanishingDiag { coeff }) }
    }

    pub fn with_vanishing(mut self, coeff: Complex64) -> Self {
        self.vanishing_diag = Some(VanishingDiag { coeff });
        self
    }

    /// True when only compact-type terms (finite block, vanishing diagonal)
    /// are present — the witnesses singularity is tested against.
    pub fn is_compact_type(&self) -> bool {
        self.step_diag.is_none()
    }

    /// Pointwise diagonal value at an integer index (Integers domain, or a
    /// constant step part).
    fn diagonal_value_at(&self, algebra: &SharedAlgebra, j: i64) -> Result<Complex64, SymbolicError> {
        let mut v = Complex64::new(0.0, 0.0);
        if let Some((idx, m)) = &self.finite_block {
            if let Some(p) = idx.iter().position(|&i| i == j) {
                v += m[(p, p)];
            }
        }
        if let Some(f) = &self.step_diag {
            if f.cells.len() == 1 {
                v += f.values[0];
            } else if algebra.borrow().domain() == DomainKind::Integers {
                v += f.value_at(algebra, j)?;
            } else {
                return Err(SymbolicError::UnregisteredCell(format!(
                    "no point membership for index {j} on the symbolic domain"
                )));
            }
        }
        if let Some(d) = &self.vanishing_diag {
            v += d.value_at(j);
        }
        Ok(v)
    }
}

/// One convex component of a symbolic state.
#[derive(Debug, Clone)]
pub enum StatePart {
    /// A density matrix over finitely many basis indices.
    Density { support: Vec<i64>, matrix: CMatrix },
    /// lim_{j→𝒰} ρ_{e_{j+offset}} along the oracle 𝒰.
    Atom { oracle: UltrafilterOracle, offset: i64 },
}

impl StatePart {
    /// The offset-free oracle handle this atom evaluates through.
    pub fn reduced_oracle(&self) -> Option<UltrafilterOracle> {
        match self {
            StatePart::Atom { oracle, offset } => Some(oracle.shift_pushforward(-offset)),
            StatePart::Density { .. } => None,
        }
    }
}

/// The effective principal point of an oracle handle, when principal.
fn principal_point(oracle: &UltrafilterOracle) -> Option<i64> {
    match oracle.kind() {
        OracleKind::Principal(p) => Some(p - oracle.offset()),
        _ => None,
    }
}

/// A convex combination of density parts and ultralimit atoms.
#[derive(Debug, Clone)]
pub struct SymbolicState {
    algebra: SharedAlgebra,
    parts: Vec<(f64, StatePart)>,
}

impl SymbolicState {
    pub fn new(algebra: SharedAlgebra, parts: Vec<(f64, StatePart)>) -> Result<Self, SymbolicError> {
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < -1e-15) || (total - 1.0).abs() > 1e-12 {
            return Err(SymbolicError::BadWeights(total));
        }
        for (_, p) in &parts {
            if let StatePart::Density { support, matrix } = p {
                if support.len() != matrix.nrows() || support.len() != matrix.ncols() {
                    return Err(SymbolicError::BadDensityPart("support/matrix size mismatch".into()));
                }
                let mut seen = std::collections::BTreeSet::new();
                if !support.iter().all(|i| seen.insert(*i)) {
                    return Err(SymbolicError::BadDensityPart("duplicate support index".into()));
                }
                crate::operator::DensityState::new(matrix.clone())
                    .map_err(|e| SymbolicError::BadDensityPart(e.to_string()))?;
            }
        }
        Ok(Self { algebra, parts })
    }

    /// The vector state of the finitely supported unit vector Σ c_i e_{k_i}.
    pub fn vector_state(algebra: SharedAlgebra, coeffs: &[(i64, Complex64)]) -> Result<Self, SymbolicError> {
        let n = coeffs.len();
        let norm_sq: f64 = coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(SymbolicError::BadDensityPart(format!("vector has norm² {norm_sq}")));
        }
        let support: Vec<i64> = coeffs.iter().map(|(k, _)| *k).collect();
        let matrix = CMatrix::from_fn(n, n, |i, j| coeffs[i].1 * coeffs[j].1.conj());
        Self::new(algebra, vec![(1.0, StatePart::Density { support, matrix })])
    }

    pub fn basis_state(algebra: SharedAlgebra, k: i64) -> Self {
        Self::vector_state(algebra, &[(k, Complex64::new(1.0, 0.0))]).expect("unit vector")
    }

    pub fn atom(algebra: SharedAlgebra, oracle: UltrafilterOracle, offset: i64) -> Self {
        Self { algebra, parts: vec![(1.0, StatePart::Atom { oracle, offset })] }
    }

    pub fn mixture(states: &[(f64, SymbolicState)]) -> Result<Self, SymbolicError> {
        let algebra = states[0].1.algebra.clone();
        let mut parts = Vec::new();
        for (w, s) in states {
            for (v, p) in &s.parts {
                parts.push((w * v, p.clone()));
            }
        }
        Self::new(algebra, parts)
    }

    pub fn algebra(&self) -> SharedAlgebra {
        self.algebra.clone()
    }

    pub fn parts(&self) -> &[(f64, StatePart)] {
        &self.parts
    }

    /// Total weight carried by density parts.
    pub fn normal_weight(&self) -> f64 {
        self.parts
            .iter()
            .filter(|(_, p)| matches!(p, StatePart::Density { .. }))
            .map(|(w, _)| *w)
            .sum()
    }
}

/// ⟨state, obs⟩. Density parts pair by the finite trace; atoms pair by the
/// ultralimit of the diagonal values along the reduced oracle, with compact
/// terms contributing exactly zero (the zero is asserted cell by cell, not
/// assumed).
pub fn evaluate(state: &SymbolicState, obs: &SymbolicObservable) -> Result<Complex64, SymbolicError> {
    let mut total = Complex64::new(0.0, 0.0);
    for (w, part) in &state.parts {
        total += Complex64::new(*w, 0.0) * evaluate_part(&state.algebra, part, obs)?;
    }
    Ok(total)
}

fn evaluate_part(
    algebra: &SharedAlgebra,
    part: &StatePart,
    obs: &SymbolicObservable,
) -> Result<Complex64, SymbolicError> {
    match part {
        StatePart::Density { support, matrix } => {
            let mut v = Complex64::new(0.0, 0.0);
            // tr(ρ A) over the finite block, including coherences.
            if let Some((idx, block)) = &obs.finite_block {
                for (a, &ia) in support.iter().enumerate() {
                    for (b, &ib) in support.iter().enumerate() {
                        let (pa, pb) = match (
                            idx.iter().position(|&i| i == ia),
                            idx.iter().position(|&i| i == ib),
                        ) {
                            (Some(pa), Some(pb)) => (pa, pb),
                            _ => continue,
                        };
                        v += matrix[(b, a)] * block[(pa, pb)];
                    }
                }
            }
            // Diagonal terms pair with the diagonal of ρ pointwise.
            if obs.step_diag.is_some() || obs.vanishing_diag.is_some() {
                let diag_only = SymbolicObservable {
                    finite_block: None,
                    step_diag: obs.step_diag.clone(),
                    vanishing_diag: obs.vanishing_diag.clone(),
                };
                for (a, &ia) in support.iter().enumerate() {
                    v += matrix[(a, a)] * diag_only.diagonal_value_at(algebra, ia)?;
                }
            }
            Ok(v)
        }
        StatePart::Atom { oracle, offset } => {
            let pushed = oracle.shift_pushforward(-offset);
            if let Some(p) = principal_point(&pushed) {
                // A principal atom is the normal state ρ_{e_p}.
                return obs.diagonal_value_at(algebra, p);
            }
            let mut v = Complex64::new(0.0, 0.0);
            if let Some(f) = &obs.step_diag {
                v += ultralimit(&pushed, f)?;
            }
            // A finite block lives on a finite index set, which is out of
            // every non-principal oracle by the cofinite rule (the principal
            // case returned above), so it contributes exactly zero.
            if let Some(d) = &obs.vanishing_diag {
                if algebra.borrow().domain() == DomainKind::Integers {
                    for eps in EPS_CHAIN {
                        // The exception set is finite, hence out of the free
                        // oracle: the limit is bounded by every ε. Small sets
                        // go through the oracle; for large ones the finiteness
                        // of the computed bound already forces the decision.
                        let exc = d.exceptions(eps);
                        let out = if exc.len() <= 64 {
                            !pushed.decide(&SetExpr::finite(&exc))?
                        } else {
                            !matches!(pushed.kind(), OracleKind::Principal(_))
                        };
                        if !out {
                            return Err(SymbolicError::UnsupportedInput(
                                "vanishing term concentrated inside the oracle".into(),
                            ));
                        }
                    }
                }
            }
            Ok(v)
        }
    }
}

/// A shift-averaging measure on the domain's translation group.
#[derive(Debug, Clone)]
pub enum ShiftMeasure {
    /// The {0,1}-valued measure of an ultrafilter oracle.
    TwoValued(TwoValuedMeasure),
    /// Finitely many point masses on shift amounts.
    FinitelySupported(Vec<(i64, f64)>),
    /// A convex combination of two-valued measures.
    ConvexOfTwoValued(Vec<(f64, TwoValuedMeasure)>),
}

impl ShiftMeasure {
    pub fn delta(shift: i64) -> Self {
        ShiftMeasure::FinitelySupported(vec![(shift, 1.0)])
    }

    /// μ(E) where defined.
    pub fn measure_of(&self, e: &SetExpr) -> Result<f64, SymbolicError> {
        match self {
            ShiftMeasure::TwoValued(m) => Ok(m.measure_of(e)?),
            ShiftMeasure::ConvexOfTwoValued(parts) => {
                let mut total = 0.0;
                for (w, m) in parts {
                    total += w * m.measure_of(e)?;
                }
                Ok(total)
            }
            ShiftMeasure::FinitelySupported(_) => Err(SymbolicError::UnsupportedInput(
                "point-mass measures live on the shift group, not the domain".into(),
            )),
        }
    }
}

/// Φ_μ(state): the shift channel. Point-mass measures shift supports and
/// offsets; two-valued measures send each vector component e_k to the
/// ultralimit atom Atom(𝒰_μ, k) (the diagonal rule: off-diagonal coherences
/// vanish on every representable observable, so the output is stored
/// diagonally). Atoms pass through unchanged — the composed limit evaluates
/// identically on representables, so no new oracle is synthesized.
pub fn shift_channel_apply(mu: &ShiftMeasure, state: &SymbolicState) -> Result<SymbolicState, SymbolicError> {
    match mu {
        ShiftMeasure::FinitelySupported(points) => {
            let total: f64 = points.iter().map(|(_, w)| w).sum();
            if (total - 1.0).abs() > 1e-12 || points.iter().any(|(_, w)| *w < 0.0) {
                return Err(SymbolicError::BadWeights(total));
            }
            let mut parts = Vec::new();
            for (w, part) in &state.parts {
                for (j, pw) in points {
                    let shifted = match part {
                        StatePart::Density { support, matrix } => StatePart::Density {
                            support: support.iter().map(|k| k + j).collect(),
                            matrix: matrix.clone(),
                        },
                        StatePart::Atom { oracle, offset } => {
                            StatePart::Atom { oracle: oracle.clone(), offset: offset + j }
                        }
                    };
                    parts.push((w * pw, shifted));
                }
            }
            SymbolicState::new(state.algebra.clone(), parts)
        }
        ShiftMeasure::TwoValued(m) => {
            let mut parts = Vec::new();
            for (w, part) in &state.parts {
                match part {
                    StatePart::Density { support, matrix } => {
                        for (i, &k) in support.iter().enumerate() {
                            let p = matrix[(i, i)].re;
                            if p > 1e-15 {
                                parts.push((
                                    w * p,
                                    StatePart::Atom { oracle: m.oracle.clone(), offset: k },
                                ));
                            }
                        }
                    }
                    StatePart::Atom { oracle, offset } => {
                        parts.push((*w, StatePart::Atom { oracle: oracle.clone(), offset: *offset }));
                    }
                }
            }
            SymbolicState::new(state.algebra.clone(), parts)
        }
        ShiftMeasure::ConvexOfTwoValued(components) => {
            let mut outs = Vec::new();
            for (w, m) in components {
                outs.push((*w, shift_channel_apply(&ShiftMeasure::TwoValued(m.clone()), state)?));
            }
            SymbolicState::mixture(&outs)
        }
    }
}

/// The outcome of a singularity test against compact-type witnesses.
#[derive(Debug, Clone)]
pub struct SingularityVerdict {
    pub singular: bool,
    /// Index and value of the first failing witness, or the positive normal
    /// weight that already rules singularity out.
    pub failure: Option<(Option<usize>, f64)>,
}

/// A state is singular on representables iff it carries no density part and
/// pairs to zero with every compact-type witness.
pub fn is_singular_on_representables(
    state: &SymbolicState,
    witnesses: &[SymbolicObservable],
) -> Result<SingularityVerdict, SymbolicError> {
    assert!(witnesses.iter().all(|w| w.is_compact_type()), "witnesses must be compact-type");
    let lambda = state.normal_weight();
    if lambda > 1e-15 {
        return Ok(SingularityVerdict { singular: false, failure: Some((None, lambda)) });
    }
    for (i, w) in witnesses.iter().enumerate() {
        let v = evaluate(state, w)?;
        if v.norm() > TOL_EXCISION {
            return Ok(SingularityVerdict { singular: false, failure: Some((Some(i), v.norm())) });
        }
    }
    Ok(SingularityVerdict { singular: true, failure: None })
}

/// The unique normal/singular decomposition ρ = λρ_n + (1−λ)ρ_s.
#[derive(Debug, Clone)]
pub struct YosidaHewitt {
    pub lambda: f64,
    pub normal: Option<SymbolicState>,
    pub singular: Option<SymbolicState>,
    /// λ recomputed as the supremum of ⟨ρ, P⟩ over the finite-projector
    /// inventory (always including the joint support projector).
    pub lambda_supremum: f64,
}

pub fn yosida_hewitt_split(
    state: &SymbolicState,
    projector_inventory: &[SymbolicObservable],
) -> Result<YosidaHewitt, SymbolicError> {
    let lambda = state.normal_weight();
    let collect = |keep_density: bool| -> Option<SymbolicState> {
        let kept: Vec<(f64, StatePart)> = state
            .parts
            .iter()
            .filter(|(_, p)| matches!(p, StatePart::Density { .. }) == keep_density)
            .cloned()
            .collect();
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        if total <= 1e-15 {
            return None;
        }
        let renorm = kept.into_iter().map(|(w, p)| (w / total, p)).collect();
        Some(SymbolicState { algebra: state.algebra.clone(), parts: renorm })
    };
    // The joint support projector dominates every density part, so the
    // supremum over the inventory ∪ {support projector} is attained exactly.
    let mut support: Vec<i64> = Vec::new();
    for (_, p) in &state.parts {
        if let StatePart::Density { support: s, .. } = p {
            for &i in s {
                if !support.contains(&i) {
                    support.push(i);
                }
            }
        }
    }
    let mut sup = 0.0f64;
    if !support.is_empty() {
        let n = support.len();
        let block = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let p = SymbolicObservable::finite_block(support, block);
        sup = sup.max(evaluate(state, &p)?.re);
    }
    for p in projector_inventory {
        assert!(p.is_compact_type(), "inventory projectors must be finite-rank");
        sup = sup.max(evaluate(state, p)?.re);
    }
    Ok(YosidaHewitt {
        lambda,
        normal: collect(true),
        singular: collect(false),
        lambda_supremum: sup,
    })
}

/// Outcome of a σ-additivity probe against a countable partition.
#[derive(Debug, Clone)]
pub struct SigmaVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub additive: bool,
}

/// Compares ⟨ρ, P_union⟩ with Σ_n ⟨ρ, P_cell_n⟩. Only finitely many terms
/// are nonzero: density parts meet finitely many cells, and an atom gives a
/// two-valued decision per cell.
pub fn sigma_additivity_check(
    state: &SymbolicState,
    partition: &CountablePartition,
) -> Result<SigmaVerdict, SymbolicError> {
    let lhs = evaluate(state, &SymbolicObservable::identity())?.re;
    let rhs = match partition {
        CountablePartition::Singletons => {
            let mut total = 0.0;
            for (w, part) in &state.parts {
                match part {
                    StatePart::Density { support, matrix } => {
                        // Each support singleton contributes its diagonal weight.
                        for i in 0..support.len() {
                            total += w * matrix[(i, i)].re;
                        }
                    }
                    StatePart::Atom { .. } => {
                        let pushed = part.reduced_oracle().expect("atom");
                        if principal_point(&pushed).is_some() {
                            total += w; // the singleton at the point is in
                        }
                        // Free and σ-complete oracles decide every singleton
                        // out: the sum over cells contributes nothing.
                    }
                }
            }
            total
        }
        CountablePartition::Cells(cells) => {
            // σ-complete atoms must have the partition on file.
            for (_, part) in &state.parts {
                if let StatePart::Atom { oracle, .. } = part {
                    if oracle.kind() == OracleKind::SigmaCompleteSymbolic {
                        let registered = oracle.registered_partitions().iter().any(|(p, _)| {
                            matches!(p, CountablePartition::Cells(c) if c == cells)
                        });
                        if !registered {
                            return Err(SetError::PartitionNotRegistered.into());
                        }
                    }
                }
            }
            let mut total = 0.0;
            for cell in cells {
                let p = SymbolicObservable::cell_projector(cell.clone());
                total += evaluate(state, &p)?.re;
            }
            total
        }
    };
    Ok(SigmaVerdict { lhs, rhs, additive: (lhs - rhs).abs() <= TOL_EXCISION })
}

/// Whether P excises A for the state: PAP = ⟨ρ, A⟩P in the representable
/// algebra. Requires ⟨ρ, P⟩ = 1 (P in the state's quantum filter).
///
/// Two projector shapes are supported: a rank-one finite block |u⟩⟨u| (where
/// PAP = ⟨u, Au⟩P identically) and a diagonal step projector (where the
/// check runs cell by cell over the common refinement, plus entrywise over
/// A's finite block inside P).
pub fn excises(
    p: &SymbolicObservable,
    state: &SymbolicState,
    a: &SymbolicObservable,
) -> Result<bool, SymbolicError> {
    let in_filter = evaluate(state, p)?;
    if (in_filter - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(SymbolicError::FilterViolation(in_filter.re));
    }
    let expectation = evaluate(state, a)?;
    let algebra = state.algebra.clone();

    match (&p.finite_block, &p.step_diag) {
        (Some((idx, block)), None) => {
            // Rank-one block projector: PAP = ⟨u, Au⟩ P exactly.
            let n = idx.len();
            let trace: Complex64 = (0..n).map(|i| block[(i, i)]).sum();
            let is_rank_one = (block * block - block).norm() < 1e-12 && (trace.re - 1.0).abs() < 1e-12;
            if !is_rank_one {
                return Err(SymbolicError::UnsupportedInput(
                    "block projector must be rank one".into(),
                ));
            }
            // A restricted to the block indices (block + diagonal terms).
            let mut a_block = match &a.finite_block {
                Some((aidx, am)) => CMatrix::from_fn(n, n, |i, j| {
                    match (
                        aidx.iter().position(|&k| k == idx[i]),
                        aidx.iter().position(|&k| k == idx[j]),
                    ) {
                        (Some(pi), Some(pj)) => am[(pi, pj)],
                        _ => Complex64::new(0.0, 0.0),
                    }
                }),
                None => CMatrix::zeros(n, n),
            };
            for i in 0..n {
                let diag_only = SymbolicObservable {
                    finite_block: None,
                    step_diag: a.step_diag.clone(),
                    vanishing_diag: a.vanishing_diag.clone(),
                };
                a_block[(i, i)] += diag_only.diagonal_value_at(&algebra, idx[i])?;
            }
            // ⟨u, Au⟩ = tr(P A_block): P is |u⟩⟨u| on these indices.
            let pap_scalar: Complex64 = (block * &a_block * block).trace();
            Ok((pap_scalar - expectation).norm() <= TOL_EXCISION)
        }
        (None, Some(pf)) => {
            // Diagonal step projector: values must all be 0 or 1.
            for v in &pf.values {
                if (v.re - v.re.round()).abs() > 1e-12 || v.im.abs() > 1e-12 || v.re.round() < 0.0 || v.re.round() > 1.0 {
                    return Err(SymbolicError::UnsupportedInput("step projector values must be 0/1".into()));
                }
            }
            let nonempty_intersection = |x: &SetExpr, y: &SetExpr| -> Result<bool, SymbolicError> {
                let mut alg = algebra.borrow_mut();
                let m = alg.normalize(&SetExpr::and(x.clone(), y.clone()))?;
                let live = alg.nonempty_atoms();
                Ok(m.atoms().iter().any(|at| live.contains(at)))
            };
            // Step part of A over cells inside P.
            if let Some(af) = &a.step_diag {
                for (pc, pv) in pf.cells.iter().zip(&pf.values) {
                    if pv.re.round() as i64 != 1 {
                        continue;
                    }
                    for (ac, av) in af.cells.iter().zip(&af.values) {
                        if nonempty_intersection(pc, ac)? && (av - expectation).norm() > TOL_EXCISION {
                            return Ok(false);
                        }
                    }
                }
            } else if expectation.norm() > TOL_EXCISION {
                // A has no step part: PAP has zero diagonal tail but ⟨A⟩P doesn't.
                let p_in = pf
                    .cells
                    .iter()
                    .zip(&pf.values)
                    .filter(|(_, v)| v.re.round() as i64 == 1)
                    .map(|(c, _)| c.clone())
                    .reduce(SetExpr::or)
                    .unwrap_or(SetExpr::Empty);
                if nonempty_intersection(&p_in, &SetExpr::Full)? {
                    return Ok(false);
                }
            }
            // Finite-block entries of A inside P must vanish off-diagonal
            // and match ⟨A⟩ on the diagonal (combined with diagonal terms).
            if let Some((aidx, am)) = &a.finite_block {
                if algebra.borrow().domain() == DomainKind::Integers {
                    let inside = |j: i64| -> Result<bool, SymbolicError> {
                        Ok(pf.value_at(&algebra, j)?.re.round() as i64 == 1)
                    };
                    for (i, &ii) in aidx.iter().enumerate() {
                        for (j, &jj) in aidx.iter().enumerate() {
                            if !(inside(ii)? && inside(jj)?) {
                                continue;
                            }
                            if i == j {
                                let total = a.diagonal_value_at(&algebra, ii)?;
                                if (total - expectation).norm() > TOL_EXCISION {
                                    return Ok(false);
                                }
                            } else if am[(i, j)].norm() > TOL_EXCISION {
                                return Ok(false);
                            }
                        }
                    }
                }
            }
            Ok(true)
        }
        _ => Err(SymbolicError::UnsupportedInput(
            "projector must be a rank-one finite block or a diagonal step function".into(),
        )),
    }
}

/// The verdict of the diagonal purity check.
#[derive(Debug, Clone)]
pub enum PurityVerdict {
    /// Approximative excision succeeded for every ε: the excision witnesses
    /// are (ε, ‖P_ε (A − L·I) P_ε‖) pairs.
    Pure { limit: Complex64, witnesses: Vec<(f64, f64)> },
    /// A registered cell projector distinguishes two atoms of the mixture.
    NotPure { witness: SetExpr, values: (f64, f64) },
}

/// Checks purity of an atom (or atom mixture) relative to the diagonal
/// algebra: a single atom admits approximative excision projectors P_ε built
/// from the cells of A where the values sit within ε of the limit; a mixture
/// of atoms with distinguishable oracles is split by a registered cell.
pub fn purity_check_diagonal(
    state: &SymbolicState,
    a: &SymbolicObservable,
    eps_schedule: &[f64],
) -> Result<PurityVerdict, SymbolicError> {
    let atoms: Vec<(f64, UltrafilterOracle)> = state
        .parts
        .iter()
        .filter_map(|(w, p)| p.reduced_oracle().map(|o| (*w, o)))
        .collect();
    assert_eq!(atoms.len(), state.parts.len(), "state must be a mixture of ultralimit atoms");
    let f = a.step_diag.as_ref().expect("observable must be step-diagonal");
    assert!(a.finite_block.is_none() && a.vanishing_diag.is_none());

    if atoms.len() == 1 {
        let (_, oracle) = &atoms[0];
        let limit = ultralimit(oracle, f)?;
        let mut witnesses = Vec::new();
        for &eps in eps_schedule {
            // X_ε: union of cells whose value is within ε of the limit.
            let mut x_eps = SetExpr::Empty;
            let mut norm: f64 = 0.0;
            for (cell, v) in f.cells.iter().zip(&f.values) {
                if (v - limit).norm() < eps {
                    x_eps = SetExpr::or(x_eps, cell.clone());
                    norm = norm.max((v - limit).norm());
                }
            }
            // X_ε contains the limit's own cell, so it must be decided in.
            if !oracle.decide(&x_eps)? {
                return Err(SymbolicError::InconclusiveAlgebra);
            }
            // ‖P_ε (A − L·I) P_ε‖ = max over included cells — exact.
            if norm >= eps {
                return Err(SymbolicError::InconclusiveAlgebra);
            }
            witnesses.push((eps, norm));
        }
        return Ok(PurityVerdict::Pure { limit, witnesses });
    }

    // Mixture: search the registered cells for a projector separating two
    // atoms. Candidate cells: the observable's cells and single generators.
    let mut candidates: Vec<SetExpr> = f.cells.clone();
    {
        let alg = state.algebra.borrow();
        for i in 0..alg.n_generators() {
            // Generators are addressable by the names used at registration.
            let _ = i;
        }
    }
    // Also probe complements of the observable's cells.
    let extra: Vec<SetExpr> = candidates.iter().map(|c| SetExpr::not(c.clone())).collect();
    candidates.extend(extra);
    for cell in &candidates {
        for i in 0..atoms.len() {
            for j in (i + 1)..atoms.len() {
                let di = atoms[i].1.decide(cell);
                let dj = atoms[j].1.decide(cell);
                if let (Ok(a1), Ok(a2)) = (di, dj) {
                    if a1 && !a2 {
                        return Ok(PurityVerdict::NotPure {
                            witness: cell.clone(),
                            values: (1.0, 0.0),
                        });
                    }
                    if a2 && !a1 {
                        return Ok(PurityVerdict::NotPure {
                            witness: SetExpr::not(cell.clone()),
                            values: (1.0, 0.0),
                        });
                    }
                }
            }
        }
    }
    Err(SymbolicError::InconclusiveAlgebra)
}

/// The nontrivial convex split Φ_μρ_u = μ(A)ρ_A + μ(B)ρ_B exhibited by a
/// set A of intermediate measure, with the projector witness P_A.
#[derive(Debug, Clone)]
pub struct NonTwoValuedSplit {
    pub weight_a: f64,
    pub weight_b: f64,
    pub rho_a: SymbolicState,
    pub rho_b: SymbolicState,
    pub witness_values: (f64, f64),
}

pub fn split_nontwovalued(
    mu: &ShiftMeasure,
    a_set: &SetExpr,
    u: &SymbolicState,
) -> Result<NonTwoValuedSplit, SymbolicError> {
    let components = match mu {
        ShiftMeasure::ConvexOfTwoValued(c) => c.clone(),
        ShiftMeasure::TwoValued(m) => vec![(1.0, m.clone())],
        ShiftMeasure::FinitelySupported(_) => {
            return Err(SymbolicError::UnsupportedInput(
                "split requires a (convex of) two-valued measure".into(),
            ))
        }
    };
    let mu_a = ShiftMeasure::ConvexOfTwoValued(components.clone()).measure_of(a_set)?;
    if mu_a <= 1e-15 || mu_a >= 1.0 - 1e-15 {
        return Err(SymbolicError::NotIntermediate(mu_a));
    }
    let mut in_side = Vec::new();
    let mut out_side = Vec::new();
    for (w, m) in &components {
        if m.oracle.decide(a_set)? {
            in_side.push((w / mu_a, m.clone()));
        } else {
            out_side.push((w / (1.0 - mu_a), m.clone()));
        }
    }
    let rho_a = shift_channel_apply(&ShiftMeasure::ConvexOfTwoValued(in_side), u)?;
    let rho_b = shift_channel_apply(&ShiftMeasure::ConvexOfTwoValued(out_side), u)?;
    let p_a = SymbolicObservable::cell_projector(a_set.clone());
    let va = evaluate(&rho_a, &p_a)?.re;
    let vb = evaluate(&rho_b, &p_a)?.re;
    Ok(NonTwoValuedSplit {
        weight_a: mu_a,
        weight_b: 1.0 - mu_a,
        rho_a,
        rho_b,
        witness_values: (va, vb),
    })
}

/// Verifies linearity of the point-mass shift channel: Φ_μ(Σ ν_i ρ_{u_i})
/// against Σ ν_i Φ_μ(ρ_{u_i}), both as finite density matrices, optionally
/// on a cyclic index set of the given modulus. Returns the largest entry
/// deviation (the worst observable deviation over the matrix-unit basis).
pub fn barycentric_equivalence_check(
    mu: &[(i64, f64)],
    mixture: &[(f64, Vec<(i64, Complex64)>)],
    modulus: Option<i64>,
) -> f64 {
    use std::collections::BTreeMap;
    type Dense = BTreeMap<(i64, i64), Complex64>;
    let reduce = |k: i64| match modulus {
        Some(m) => k.rem_euclid(m),
        None => k,
    };
    let density = |v: &[(i64, Complex64)]| -> Dense {
        let mut d = Dense::new();
        for (ki, ci) in v {
            for (kj, cj) in v {
                *d.entry((*ki, *kj)).or_insert(Complex64::new(0.0, 0.0)) += ci * cj.conj();
            }
        }
        d
    };
    let shift_avg = |d: &Dense| -> Dense {
        let mut out = Dense::new();
        for ((i, j), v) in d {
            for (s, w) in mu {
                *out.entry((reduce(i + s), reduce(j + s)))
                    .or_insert(Complex64::new(0.0, 0.0)) += v * w;
            }
        }
        out
    };
    let add_scaled = |acc: &mut Dense, d: &Dense, w: f64| {
        for (k, v) in d {
            *acc.entry(*k).or_insert(Complex64::new(0.0, 0.0)) += v * w;
        }
    };
    // Φ_μ applied to the mixture.
    let mut mixed = Dense::new();
    for (w, v) in mixture {
        add_scaled(&mut mixed, &density(v), *w);
    }
    let lhs = shift_avg(&mixed);
    // The mixture of the channel outputs.
    let mut rhs = Dense::new();
    for (w, v) in mixture {
        add_scaled(&mut rhs, &shift_avg(&density(v)), *w);
    }
    let mut dev: f64 = 0.0;
    let keys: std::collections::BTreeSet<(i64, i64)> =
        lhs.keys().chain(rhs.keys()).cloned().collect();
    let zero = Complex64::new(0.0, 0.0);
    for k in keys {
        let a = lhs.get(&k).unwrap_or(&zero);
        let b = rhs.get(&k).unwrap_or(&zero);
        dev = dev.max((a - b).norm());
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{integrate_two_valued, GeneratorKind, SetAlgebra};
    use std::collections::BTreeSet;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn int_algebra() -> SharedAlgebra {
        SetAlgebra::new(DomainKind::Integers)
    }

    fn evens_algebra() -> SharedAlgebra {
        let alg = int_algebra();
        alg.borrow_mut()
            .register_generator(
                "evens",
                GeneratorKind::Residue { modulus: 2, residues: BTreeSet::from([0]) },
            )
            .unwrap();
        alg
    }

    fn free_oracle(alg: &SharedAlgebra) -> UltrafilterOracle {
        UltrafilterOracle::new(alg.clone(), OracleKind::FreeSymbolic)
    }

    #[test]
    fn identity_normalization() {
        let alg = int_algebra();
        let id = SymbolicObservable::identity();
        let states = [
            SymbolicState::basis_state(alg.clone(), 0),
            SymbolicState::atom(alg.clone(), free_oracle(&alg), 0),
            SymbolicState::mixture(&[
                (0.4, SymbolicState::basis_state(alg.clone(), 2)),
                (0.6, SymbolicState::atom(alg.clone(), free_oracle(&alg), 1)),
            ])
            .unwrap(),
        ];
        for s in &states {
            assert!((evaluate(s, &id).unwrap() - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn free_atom_vanishes_on_finite_projectors() {
        let alg = int_algebra();
        let atom = SymbolicState::atom(alg.clone(), free_oracle(&alg), 0);
        let p0 = SymbolicObservable::basis_projector(0);
        assert_eq!(evaluate(&atom, &p0).unwrap(), c(0.0));
        let v = SymbolicObservable::vanishing(c(3.0));
        assert_eq!(evaluate(&atom, &v).unwrap(), c(0.0));
    }

    #[test]
    fn purity_example_witness_values() {
        // ½ Atom(𝒰,0) + ½ Atom(𝒰,1) with X ∈ 𝒰 and shift-by-±1 = complement:
        // the cell projector P_X evaluates to 1 on the first atom, 0 on the
        // second.
        let alg = evens_algebra();
        let oracle = free_oracle(&alg);
        oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let a0 = SymbolicState::atom(alg.clone(), oracle.clone(), 0);
        let a1 = SymbolicState::atom(alg.clone(), oracle.clone(), 1);
        let p_x = SymbolicObservable::cell_projector(SetExpr::gen("evens"));
        assert_eq!(evaluate(&a0, &p_x).unwrap(), c(1.0));
        assert_eq!(evaluate(&a1, &p_x).unwrap(), c(0.0));
        let mixed = SymbolicState::mixture(&[(0.5, a0), (0.5, a1)]).unwrap();
        assert_eq!(evaluate(&mixed, &p_x).unwrap(), c(0.5));
    }

    #[test]
    fn principal_atom_is_a_basis_state() {
        let alg = int_algebra();
        let principal = UltrafilterOracle::new(alg.clone(), OracleKind::Principal(3));
        let atom = SymbolicState::atom(alg.clone(), principal, 2); // = ρ_{e_5}
        let p5 = SymbolicObservable::basis_projector(5);
        let p3 = SymbolicObservable::basis_projector(3);
        assert_eq!(evaluate(&atom, &p5).unwrap(), c(1.0));
        assert_eq!(evaluate(&atom, &p3).unwrap(), c(0.0));
    }

    #[test]
    fn shift_channel_point_mass_and_two_valued() {
        let alg = int_algebra();
        // δ_0 leaves states unchanged.
        let s = SymbolicState::basis_state(alg.clone(), 4);
        let out = shift_channel_apply(&ShiftMeasure::delta(0), &s).unwrap();
        assert_eq!(evaluate(&out, &SymbolicObservable::basis_projector(4)).unwrap(), c(1.0));

        // Two-valued free μ sends ρ_{e_0} to Atom(𝒰, 0).
        let oracle = free_oracle(&alg);
        let mu = ShiftMeasure::TwoValued(TwoValuedMeasure::new(oracle.clone()));
        let out = shift_channel_apply(&mu, &SymbolicState::basis_state(alg.clone(), 0)).unwrap();
        assert_eq!(out.parts().len(), 1);
        assert!(matches!(out.parts()[0].1, StatePart::Atom { offset: 0, .. }));

        // u = (e_0 + e_1)/√2 → ½ Atom(𝒰,0) + ½ Atom(𝒰,1).
        let u = SymbolicState::vector_state(
            alg.clone(),
            &[(0, c(1.0 / 2f64.sqrt())), (1, c(1.0 / 2f64.sqrt()))],
        )
        .unwrap();
        let out = shift_channel_apply(&mu, &u).unwrap();
        let mut offsets: Vec<(f64, i64)> = out
            .parts()
            .iter()
            .map(|(w, p)| match p {
                StatePart::Atom { offset, .. } => (*w, *offset),
                _ => panic!("expected atoms"),
            })
            .collect();
        offsets.sort_by_key(|(_, k)| *k);
        assert_eq!(offsets.len(), 2);
        assert!((offsets[0].0 - 0.5).abs() < 1e-12 && offsets[0].1 == 0);
        assert!((offsets[1].0 - 0.5).abs() < 1e-12 && offsets[1].1 == 1);
    }

    #[test]
    fn singularity_verdicts() {
        let alg = int_algebra();
        let witnesses: Vec<SymbolicObservable> = (0..5)
            .map(SymbolicObservable::basis_projector)
            .chain([SymbolicObservable::vanishing(c(2.0))])
            .collect();
        let atom = SymbolicState::atom(alg.clone(), free_oracle(&alg), 0);
        assert!(is_singular_on_representables(&atom, &witnesses).unwrap().singular);

        let normal = SymbolicState::basis_state(alg.clone(), 0);
        let v = is_singular_on_representables(&normal, &witnesses).unwrap();
        assert!(!v.singular);

        let mixed = SymbolicState::mixture(&[
            (0.4, SymbolicState::basis_state(alg.clone(), 0)),
            (0.6, SymbolicState::atom(alg.clone(), free_oracle(&alg), 0)),
        ])
        .unwrap();
        let v = is_singular_on_representables(&mixed, &witnesses).unwrap();
        assert!(!v.singular);
        assert!((v.failure.unwrap().1 - 0.4).abs() < 1e-12);
        // The support projector indeed evaluates to the normal weight.
        let p0 = SymbolicObservable::basis_projector(0);
        assert!((evaluate(&mixed, &p0).unwrap().re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn yosida_hewitt_examples() {
        let alg = int_algebra();
        let pure_vec = SymbolicState::basis_state(alg.clone(), 1);
        let split = yosida_hewitt_split(&pure_vec, &[]).unwrap();
        assert_eq!(split.lambda, 1.0);
        assert!(split.normal.is_some() && split.singular.is_none());
        assert!((split.lambda_supremum - 1.0).abs() < 1e-12);

        let pure_atom = SymbolicState::atom(alg.clone(), free_oracle(&alg), 0);
        let split = yosida_hewitt_split(&pure_atom, &[]).unwrap();
        assert_eq!(split.lambda, 0.0);
        assert!(split.normal.is_none() && split.singular.is_some());
        assert_eq!(split.lambda_supremum, 0.0);

        let mixed = SymbolicState::mixture(&[
            (0.4, SymbolicState::basis_state(alg.clone(), 0)),
            (0.6, SymbolicState::atom(alg.clone(), free_oracle(&alg), 0)),
        ])
        .unwrap();
        let split = yosida_hewitt_split(&mixed, &[]).unwrap();
        assert!((split.lambda - 0.4).abs() < 1e-12);
        assert!((split.lambda_supremum - 0.4).abs() < 1e-12);
        // Recombination is the identity on evaluations.
        let recombined = SymbolicState::mixture(&[
            (split.lambda, split.normal.clone().unwrap()),
            (1.0 - split.lambda, split.singular.clone().unwrap()),
        ])
        .unwrap();
        let p0 = SymbolicObservable::basis_projector(0);
        assert_eq!(
            evaluate(&recombined, &p0).unwrap(),
            evaluate(&mixed, &p0).unwrap()
        );
    }

    #[test]
    fn sigma_additivity_singletons() {
        let alg = int_algebra();
        // Free atom: lhs 1, rhs 0 — free ultrafilters on ℤ are not σ-complete.
        let atom = SymbolicState::atom(alg.clone(), free_oracle(&alg), 0);
        let v = sigma_additivity_check(&atom, &CountablePartition::Singletons).unwrap();
        assert_eq!((v.lhs, v.rhs), (1.0, 0.0));
        assert!(!v.additive);

        // Normal state: both sides 1.
        let normal = SymbolicState::basis_state(alg.clone(), 0);
        let v = sigma_additivity_check(&normal, &CountablePartition::Singletons).unwrap();
        assert_eq!((v.lhs, v.rhs), (1.0, 1.0));
        assert!(v.additive);
    }

    #[test]
    fn sigma_additivity_registered_partition() {
        let alg = evens_algebra();
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::SigmaCompleteSymbolic);
        let cells = vec![SetExpr::gen("evens"), SetExpr::not(SetExpr::gen("evens"))];
        let part = CountablePartition::Cells(cells);
        let atom = SymbolicState::atom(alg.clone(), oracle.clone(), 0);
        // Unregistered partitions are rejected.
        assert!(matches!(
            sigma_additivity_check(&atom, &part),
            Err(SymbolicError::Set(SetError::PartitionNotRegistered))
        ));
        oracle.register_countable_partition(&part, Some(0)).unwrap();
        let v = sigma_additivity_check(&atom, &part).unwrap();
        assert_eq!((v.lhs, v.rhs), (1.0, 1.0));
        assert!(v.additive);
    }

    #[test]
    fn excision_examples() {
        let alg = int_algebra();
        // Qubit model on {0,1}: ρ_u with u = (e_0+e_1)/√2, P = I, A = diag(1,0).
        let r = 1.0 / 2f64.sqrt();
        let u = SymbolicState::vector_state(alg.clone(), &[(0, c(r)), (1, c(r))]).unwrap();
        let identity = SymbolicObservable::identity();
        let a = SymbolicObservable::finite_block(
            vec![0, 1],
            CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]),
        );
        assert!((evaluate(&u, &a).unwrap() - c(0.5)).norm() < 1e-12);
        assert!(!excises(&identity, &u, &a).unwrap());

        // P_u excises every A for ρ_u.
        let block = CMatrix::from_fn(2, 2, |_, _| c(0.5));
        let p_u = SymbolicObservable::finite_block(vec![0, 1], block);
        let observables = [
            a.clone(),
            SymbolicObservable::finite_block(
                vec![0, 1],
                CMatrix::from_row_slice(2, 2, &[c(0.3), c(-0.2), c(-0.2), c(1.7)]),
            ),
            SymbolicObservable::identity(),
        ];
        for obs in &observables {
            assert!(excises(&p_u, &u, obs).unwrap());
        }

        // A = c·I is excised by every filter projector.
        let scaled_id = SymbolicObservable::step(StepFunction::constant(c(2.5)));
        assert!(excises(&identity, &u, &scaled_id).unwrap());
        assert!(excises(&p_u, &u, &scaled_id).unwrap());

        // Filter violation: P with ⟨ρ,P⟩ ≠ 1.
        let p0 = SymbolicObservable::basis_projector(0);
        assert!(matches!(
            excises(&p0, &u, &a),
            Err(SymbolicError::FilterViolation(_))
        ));
    }

    #[test]
    fn purity_single_atom_is_pure() {
        let alg = evens_algebra();
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::SigmaCompleteSymbolic);
        oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let atom = SymbolicState::atom(alg.clone(), oracle, 0);
        let a = SymbolicObservable::step(StepFunction::new(
            vec![SetExpr::gen("evens"), SetExpr::not(SetExpr::gen("evens"))],
            vec![c(2.0), c(-1.0)],
        ));
        match purity_check_diagonal(&atom, &a, &[0.1, 0.01]).unwrap() {
            PurityVerdict::Pure { limit, witnesses } => {
                assert_eq!(limit, c(2.0));
                assert_eq!(witnesses.len(), 2);
                for (eps, norm) in witnesses {
                    assert!(norm < eps);
                }
            }
            other => panic!("expected PURE, got {other:?}"),
        }
    }

    #[test]
    fn purity_mixture_is_not_pure() {
        // The ex-purity mixture with the even-block generator and the
        // complementing shift rule is split by P_X.
        let alg = evens_algebra();
        let oracle = free_oracle(&alg);
        oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let mixed = SymbolicState::mixture(&[
            (0.5, SymbolicState::atom(alg.clone(), oracle.clone(), 0)),
            (0.5, SymbolicState::atom(alg.clone(), oracle, 1)),
        ])
        .unwrap();
        let a = SymbolicObservable::step(StepFunction::new(
            vec![SetExpr::gen("evens"), SetExpr::not(SetExpr::gen("evens"))],
            vec![c(1.0), c(0.0)],
        ));
        match purity_check_diagonal(&mixed, &a, &[0.1]).unwrap() {
            PurityVerdict::NotPure { values, .. } => assert_eq!(values, (1.0, 0.0)),
            other => panic!("expected NOT-PURE, got {other:?}"),
        }
    }

    #[test]
    fn purity_constant_observable_trivially_pure() {
        let alg = int_algebra();
        let atom = SymbolicState::atom(alg.clone(), free_oracle(&alg), 0);
        let a = SymbolicObservable::step(StepFunction::constant(c(7.0)));
        assert!(matches!(
            purity_check_diagonal(&atom, &a, &[0.1, 0.01]).unwrap(),
            PurityVerdict::Pure { .. }
        ));
    }

    #[test]
    fn nontwovalued_split_witness() {
        let alg = evens_algebra();
        let u1 = free_oracle(&alg);
        u1.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let u2 = free_oracle(&alg);
        u2.register_decision(&SetExpr::gen("evens"), false).unwrap();
        let mu = ShiftMeasure::ConvexOfTwoValued(vec![
            (0.5, TwoValuedMeasure::new(u1.clone())),
            (0.5, TwoValuedMeasure::new(u2.clone())),
        ]);
        let u = SymbolicState::basis_state(alg.clone(), 0);
        let split = split_nontwovalued(&mu, &SetExpr::gen("evens"), &u).unwrap();
        assert!((split.weight_a - 0.5).abs() < 1e-12);
        assert_eq!(split.witness_values, (1.0, 0.0));

        // Two-valued measures have no intermediate set here.
        let tv = ShiftMeasure::TwoValued(TwoValuedMeasure::new(u1));
        assert!(matches!(
            split_nontwovalued(&tv, &SetExpr::gen("evens"), &u),
            Err(SymbolicError::NotIntermediate(_))
        ));

        // Asymmetric weights propagate to the split.
        let mu37 = ShiftMeasure::ConvexOfTwoValued(vec![
            (0.3, TwoValuedMeasure::new(free_oracle(&alg))),
            (0.7, TwoValuedMeasure::new(u2)),
        ]);
        // First component undecided on evens: register it in.
        if let ShiftMeasure::ConvexOfTwoValued(ref parts) = mu37 {
            parts[0].1.oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        }
        let split = split_nontwovalued(&mu37, &SetExpr::gen("evens"), &u).unwrap();
        assert!((split.weight_a - 0.3).abs() < 1e-12);
        assert!((split.weight_b - 0.7).abs() < 1e-12);
    }

    #[test]
    fn barycentric_equivalence() {
        // Single vector: degenerate linearity.
        let r = 1.0 / 2f64.sqrt();
        let dev = barycentric_equivalence_check(
            &[(0, 0.5), (1, 0.5)],
            &[(1.0, vec![(0, c(r)), (1, c(r))])],
            None,
        );
        assert_eq!(dev, 0.0);

        // Two-vector mixture on the ℤ₈ model, μ uniform on {0,1,2}.
        let w = 1.0 / 3.0;
        let dev = barycentric_equivalence_check(
            &[(0, w), (1, w), (2, w)],
            &[
                (0.25, vec![(0, c(r)), (3, c(r))]),
                (0.75, vec![(1, c(0.6)), (5, c(0.8))]),
            ],
            Some(8),
        );
        assert!(dev < 1e-12);

        // Random three-vector mixtures.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut vectors = Vec::new();
            let mut weights = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            for &w in &weights {
                let ks: Vec<i64> = (0..3).map(|_| rng.gen_range(-5..5)).collect();
                let mut cs: Vec<Complex64> =
                    (0..3).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
                let norm: f64 = cs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                cs.iter_mut().for_each(|c| *c /= norm);
                vectors.push((w, ks.into_iter().zip(cs).collect::<Vec<_>>()));
            }
            let dev = barycentric_equivalence_check(&[(0, 0.2), (2, 0.5), (-1, 0.3)], &vectors, None);
            assert!(dev < 1e-12, "deviation {dev}");
        }
    }

    #[test]
    fn pushforward_coherence() {
        let alg = evens_algebra();
        let oracle = free_oracle(&alg);
        oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let obs = [
            SymbolicObservable::cell_projector(SetExpr::gen("evens")),
            SymbolicObservable::identity(),
            SymbolicObservable::step(StepFunction::new(
                vec![SetExpr::gen("evens"), SetExpr::not(SetExpr::gen("evens"))],
                vec![c(0.25), c(4.0)],
            )),
        ];
        for k in [-2i64, -1, 0, 1, 3] {
            let with_offset = SymbolicState::atom(alg.clone(), oracle.clone(), k);
            let pushed = SymbolicState::atom(alg.clone(), oracle.shift_pushforward(-k), 0);
            for a in &obs {
                assert_eq!(
                    evaluate(&with_offset, a).unwrap(),
                    evaluate(&pushed, a).unwrap(),
                    "offset {k}"
                );
            }
        }
    }

    #[test]
    fn integral_matches_ultralimit_for_atoms() {
        let alg = evens_algebra();
        let oracle = free_oracle(&alg);
        oracle.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let f = StepFunction::new(
            vec![SetExpr::gen("evens"), SetExpr::not(SetExpr::gen("evens"))],
            vec![c(3.0), c(-2.0)],
        );
        let mu = TwoValuedMeasure::new(oracle.clone());
        let atom = SymbolicState::atom(alg.clone(), oracle.clone(), 0);
        let via_state = evaluate(&atom, &SymbolicObservable::step(f.clone())).unwrap();
        let via_integral = integrate_two_valued(&mu, &f).unwrap();
        assert_eq!(via_state, via_integral);
    }
}
