//! Singularization: averaging a vector state over a free two-valued shift
//! measure produces a state supported "at infinity". The result pairs to
//! zero with every finite-rank observable, fails σ-additivity against the
//! singleton partition, and sits in the singular leg of the
//! Yosida–Hewitt decomposition.

use num_complex::Complex64;
use ultrachan::sets::{
    DomainKind, OracleKind, SetAlgebra, TwoValuedMeasure, UltrafilterOracle,
};
use ultrachan::symbolic::{
    evaluate, is_singular_on_representables, shift_channel_apply, sigma_additivity_check,
    yosida_hewitt_split, ShiftMeasure, SymbolicObservable, SymbolicState,
};
use ultrachan::sets::CountablePartition;

fn main() {
    let algebra = SetAlgebra::new(DomainKind::Integers);
    let oracle = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    let mu = ShiftMeasure::TwoValued(TwoValuedMeasure::new(oracle));

    // |u⟩ = (e₀ + e₅)/√2, a perfectly ordinary normal state.
    let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let u = SymbolicState::vector_state(algebra.clone(), &[(0, c), (5, c)]).unwrap();
    println!("⟨u, P₀ u⟩ = {}", evaluate(&u, &SymbolicObservable::basis_projector(0)).unwrap().re);

    // Φ_μ(|u⟩⟨u|): each component e_k becomes the ultralimit atom at
    // offset k; the output annihilates every basis projector.
    let rho = shift_channel_apply(&mu, &u).unwrap();
    for k in [0i64, 5] {
        let v = evaluate(&rho, &SymbolicObservable::basis_projector(k)).unwrap();
        println!("⟨Φ_μ(u), P_{k}⟩ = {}", v.re);
    }

    let witnesses: Vec<SymbolicObservable> =
        (-10..=10).map(SymbolicObservable::basis_projector).collect();
    let verdict = is_singular_on_representables(&rho, &witnesses).unwrap();
    println!("singular on representables: {}", verdict.singular);

    // σ-additivity against singletons fails: ⟨ρ, 1⟩ = 1 but every singleton
    // carries zero weight.
    let sigma = sigma_additivity_check(&rho, &CountablePartition::Singletons).unwrap();
    println!(
        "σ-additivity: ⟨ρ, 1⟩ = {}  vs  Σₙ ⟨ρ, Pₙ⟩ = {}  → additive: {}",
        sigma.lhs, sigma.rhs, sigma.additive
    );

    // Mix the singular output back with a normal state and split it again.
    let mixed = SymbolicState::mixture(&[
        (0.3, SymbolicState::basis_state(algebra.clone(), 2)),
        (0.7, rho),
    ])
    .unwrap();
    let split = yosida_hewitt_split(&mixed, &[]).unwrap();
    println!(
        "\nYosida–Hewitt: λ = {} (supremum over finite projectors: {})",
        split.lambda, split.lambda_supremum
    );
    println!("normal part present: {}", split.normal.is_some());
    println!("singular part present: {}", split.singular.is_some());
}
