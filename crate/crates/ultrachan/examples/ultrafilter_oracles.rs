//! Ultrafilter decision oracles over a finitely generated algebra of
//! integer sets: principal oracles recompute membership of their point,
//! free oracles answer only what their registered decisions force, and
//! integration against the induced {0,1}-measure is the ultralimit.

use std::collections::BTreeSet;

use num_complex::Complex64;
use ultrachan::sets::{
    integrate_two_valued, ultralimit, DomainKind, GeneratorKind, OracleKind, SetAlgebra, SetExpr,
    StepFunction, TwoValuedMeasure, UltrafilterOracle,
};

fn main() {
    let algebra = SetAlgebra::new(DomainKind::Integers);
    {
        let mut a = algebra.borrow_mut();
        a.register_generator(
            "evens",
            GeneratorKind::Residue { modulus: 2, residues: BTreeSet::from([0]) },
        )
        .unwrap();
        a.register_generator(
            "mod3",
            GeneratorKind::Residue { modulus: 3, residues: BTreeSet::from([0]) },
        )
        .unwrap();
    }
    let evens = SetExpr::gen("evens");
    let mod3 = SetExpr::gen("mod3");

    // A principal oracle just checks its point.
    let at_nine = UltrafilterOracle::new(algebra.clone(), OracleKind::Principal(9));
    println!("principal at 9: evens ∈ 𝒰? {}", at_nine.decide(&evens).unwrap());
    println!("principal at 9: mod3  ∈ 𝒰? {}", at_nine.decide(&mod3).unwrap());

    // A free oracle refuses unforced questions until decisions are
    // registered; forced consequences then follow from the filter laws.
    let free = UltrafilterOracle::new(algebra.clone(), OracleKind::FreeSymbolic);
    match free.decide(&evens) {
        Err(e) => println!("\nfree oracle, no decisions yet: {e}"),
        Ok(_) => unreachable!(),
    }
    free.register_decision(&evens, true).unwrap();
    free.register_decision(&mod3, false).unwrap();
    let meet = SetExpr::and(evens.clone(), SetExpr::not(mod3.clone()));
    println!("after registering: evens ∖ mod3 ∈ 𝒰? {}", free.decide(&meet).unwrap());
    println!("finite sets are always out: {}", free.decide(&SetExpr::finite(&[1, 2, 3])).unwrap());

    // Registering a contradiction is rejected.
    match free.register_decision(&meet, false) {
        Err(e) => println!("contradictory decision rejected: {e}"),
        Ok(_) => unreachable!(),
    }

    // ∫ f dμ_𝒰 = lim_𝒰 f for step functions over the algebra.
    let f = StepFunction::new(
        vec![
            SetExpr::and(evens.clone(), mod3.clone()),
            SetExpr::and(evens.clone(), SetExpr::not(mod3.clone())),
            SetExpr::not(evens),
        ],
        vec![Complex64::new(6.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.5)],
    );
    let mu = TwoValuedMeasure::new(free.clone());
    println!(
        "\nlim_𝒰 f = {}   ∫ f dμ_𝒰 = {}",
        ultralimit(&free, &f).unwrap(),
        integrate_two_valued(&mu, &f).unwrap()
    );

    // Pushforward under translation: the shifted oracle answers about E+k.
    let shifted = at_nine.shift_pushforward(1);
    println!(
        "\npushforward of principal(9) by +1 decides evens: {} (it is principal at 8)",
        shifted.decide(&SetExpr::gen("evens")).unwrap()
    );
}
