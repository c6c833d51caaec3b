//! Two-valuedness is what forces purity: averaging over a strictly convex
//! combination of two-valued measures yields a state that splits along any
//! set of intermediate measure, with a projector witness separating the
//! two legs.

use ultrachan::sets::{
    DomainKind, GeneratorKind, OracleKind, SetAlgebra, SetExpr, TwoValuedMeasure,
    UltrafilterOracle,
};
use ultrachan::symbolic::{shift_channel_apply, split_nontwovalued, ShiftMeasure, SymbolicState};

fn main() {
    let algebra = SetAlgebra::new(DomainKind::Integers);
    algebra
        .borrow_mut()
        .register_generator(
            "evens",
            GeneratorKind::Residue {
                modulus: 2,
                residues: std::collections::BTreeSet::from([0]),
            },
        )
        .unwrap();
    let evens = SetExpr::gen("evens");

    // Two free ultrafilters disagreeing about the evens.
    let u1 = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    u1.register_decision(&evens, true).unwrap();
    let u2 = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    u2.register_decision(&evens, false).unwrap();

    // μ = 0.3·μ₁ + 0.7·μ₂ is not two-valued: μ(evens) = 0.3.
    let mu = ShiftMeasure::ConvexOfTwoValued(vec![
        (0.3, TwoValuedMeasure::new(u1)),
        (0.7, TwoValuedMeasure::new(u2)),
    ]);
    println!("μ(evens) = {}", mu.measure_of(&evens).unwrap());

    let u = SymbolicState::basis_state(algebra.clone(), 0);
    let rho = shift_channel_apply(&mu, &u).unwrap();
    println!("averaged state has {} components", rho.parts().len());

    let split = split_nontwovalued(&mu, &evens, &u).unwrap();
    println!(
        "\nΦ_μ(ρ_u) = {}·ρ_A + {}·ρ_B along A = evens",
        split.weight_a, split.weight_b
    );
    println!(
        "witness P_A: ⟨ρ_A, P_A⟩ = {}, ⟨ρ_B, P_A⟩ = {}",
        split.witness_values.0, split.witness_values.1
    );

    // A set the convex measure cannot separate gives no split.
    let full = SetExpr::or(evens.clone(), SetExpr::not(evens));
    match split_nontwovalued(&mu, &full, &u) {
        Err(e) => println!("\nfull-measure set rejected: {e}"),
        Ok(_) => unreachable!(),
    }
}
