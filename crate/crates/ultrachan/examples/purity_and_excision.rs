//! Purity relative to the diagonal algebra, via approximative excision:
//! a single ultralimit atom admits projectors P_ε with ‖P_ε(A − L)P_ε‖ < ε
//! for every registered ε, while a genuine mixture of distinguishable
//! atoms is split by a cell projector.

use std::collections::BTreeSet;

use num_complex::Complex64;
use ultrachan::sets::{
    DomainKind, GeneratorKind, OracleKind, SetAlgebra, SetExpr, StepFunction, UltrafilterOracle,
};
use ultrachan::symbolic::{
    excises, purity_check_diagonal, PurityVerdict, SymbolicObservable, SymbolicState,
};

fn main() {
    let algebra = SetAlgebra::new(DomainKind::Integers);
    algebra
        .borrow_mut()
        .register_generator(
            "evens",
            GeneratorKind::Residue { modulus: 2, residues: BTreeSet::from([0]) },
        )
        .unwrap();
    let evens = SetExpr::gen("evens");

    // A step observable: value 2 on evens, −1 on odds.
    let a = SymbolicObservable::step(StepFunction::new(
        vec![evens.clone(), SetExpr::not(evens.clone())],
        vec![Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.0)],
    ));
    let eps = [1e-1, 1e-3, 1e-6];

    // One atom over a free ultrafilter with evens decided in: pure, A has
    // the sharp value 2.
    let in_oracle = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    in_oracle.register_decision(&evens, true).unwrap();
    let atom = SymbolicState::atom(algebra.clone(), in_oracle.clone(), 0);
    match purity_check_diagonal(&atom, &a, &eps).unwrap() {
        PurityVerdict::Pure { limit, witnesses } => {
            println!("single atom: pure, lim_𝒰 A = {}", limit.re);
            for (e, norm) in witnesses {
                println!("  ε = {e:>7.0e}: ‖P_ε(A − L)P_ε‖ = {norm}");
            }
        }
        v => println!("unexpected: {v:?}"),
    }

    // A half-and-half mixture with an evens-out atom: some cell projector
    // tells the two components apart, so the state is not pure.
    let out_oracle = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    out_oracle.register_decision(&evens, false).unwrap();
    let mixture = SymbolicState::mixture(&[
        (0.5, SymbolicState::atom(algebra.clone(), in_oracle, 0)),
        (0.5, SymbolicState::atom(algebra.clone(), out_oracle, 0)),
    ])
    .unwrap();
    match purity_check_diagonal(&mixture, &a, &eps).unwrap() {
        PurityVerdict::NotPure { witness, values } => {
            println!("\nmixture: not pure");
            println!("  distinguishing cell {witness:?}: component values {values:?}");
        }
        v => println!("unexpected: {v:?}"),
    }

    // Exact excision for a rank-one projector: P = |e₃⟩⟨e₃| excises any
    // finite-block observable for the basis state at 3.
    let state = SymbolicState::basis_state(algebra.clone(), 3);
    let p = SymbolicObservable::basis_projector(3);
    let block = SymbolicObservable::finite_block(
        vec![2, 3],
        ultrachan::operator::CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.7, 0.0),
                Complex64::new(0.1, 0.2),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.3, 0.0),
            ],
        ),
    );
    println!("\nrank-one excision PAP = ⟨ρ,A⟩P holds: {}", excises(&p, &state, &block).unwrap());
}
