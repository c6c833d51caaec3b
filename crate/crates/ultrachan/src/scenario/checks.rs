//! Named checks a scenario can invoke, and their execution.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use crate::channel::{cesaro_limit, invariance_diagnostic, QuantumChannel};
use crate::group::GroupMeasure;
use crate::operator::CMatrix;
use crate::sets::{integrate_two_valued, ultralimit, SetExpr, StepFunction, TwoValuedMeasure};
use crate::symbolic::{
    barycentric_equivalence_check, evaluate, excises, is_singular_on_representables,
    purity_check_diagonal, shift_channel_apply, split_nontwovalued, yosida_hewitt_split,
    PurityVerdict, SymbolicError, SymbolicObservable,
};

use super::{matrix_from_rows, CNum, CoeffDecl, Environment, PointMassDecl, ValueMap, Verdict};

fn d_tol12() -> f64 {
    1e-12
}
fn d_tol10() -> f64 {
    1e-10
}
fn d_tol8() -> f64 {
    1e-8
}
fn d_tol7() -> f64 {
    1e-7
}
fn d_tol6() -> f64 {
    1e-6
}
fn d_trials20() -> usize {
    20
}
fn d_trials10() -> usize {
    10
}
fn d_trials50() -> usize {
    50
}
fn d_power5() -> usize {
    5
}
fn d_maxn5000() -> usize {
    5000
}
fn d_maxn200() -> usize {
    200
}
fn d_dim4() -> usize {
    4
}
fn d_radius25() -> i64 {
    25
}
fn d_floor() -> f64 {
    -1e-9
}

#[derive(Debug, Deserialize)]
pub struct CheckSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: CheckKind,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// ⟨state, observable⟩ equals `expect` within `tol`.
    Evaluate {
        state: String,
        observable: String,
        expect: CNum,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// excises(projector, state, observable) returns `expect`.
    Excises {
        projector: String,
        state: String,
        observable: String,
        expect: bool,
    },
    /// Purity of a density state relative to a projector inventory: the
    /// state is pure iff some filter projector excises the observable.
    ExcisionPurity {
        state: String,
        observable: String,
        projectors: Vec<String>,
        expect: String, // "pure" | "not_pure"
    },
    /// purity_check_diagonal verdict for an atom (mixture).
    Purity {
        state: String,
        observable: String,
        eps_schedule: Vec<f64>,
        expect: String, // "pure" | "not_pure"
    },
    /// distance(Q_μ ∘ Q_μ, Q_μ) < tol.
    Idempotence {
        representation: String,
        measure: String,
        #[serde(default = "d_tol10")]
        tol: f64,
    },
    /// distance(Q_μⁿ, Q_{μ^{*n}}) < tol for random measures μ.
    ConvolutionPowerRandom {
        representation: String,
        #[serde(default = "d_trials20")]
        trials: usize,
        #[serde(default = "d_power5")]
        max_power: usize,
        #[serde(default = "d_tol10")]
        tol: f64,
    },
    /// Cesàro limit of conjugation by a fixed unitary; optionally compared
    /// against the full dephasing channel.
    CesaroUnitary {
        unitary: Vec<Vec<CNum>>,
        #[serde(default = "d_tol8")]
        tol_convergence: f64,
        #[serde(default = "d_maxn5000")]
        max_n: usize,
        #[serde(default)]
        expect_dephasing: bool,
        #[serde(default = "d_tol6")]
        tol_limit: f64,
        #[serde(default = "d_tol7")]
        tol_projection: f64,
    },
    /// Cesàro limits of random mixed-unitary channels satisfy the
    /// projection laws Φ̄Φ = ΦΦ̄ = Φ̄² = Φ̄.
    CesaroRandom {
        #[serde(default = "d_trials10")]
        trials: usize,
        #[serde(default = "d_dim4")]
        max_dim: usize,
        #[serde(default = "d_tol8")]
        tol_convergence: f64,
        #[serde(default = "d_maxn5000")]
        max_n: usize,
        #[serde(default = "d_tol7")]
        tol_projection: f64,
    },
    /// d_n = max_h TV(μ^{*n}, L_h μ^{*n}): either drops below `threshold`
    /// by n = max_n ("converges") or stays exactly 1 ("constant_one").
    Invariance {
        representation: String,
        measure: String,
        #[serde(default = "d_maxn200")]
        max_n: usize,
        #[serde(default = "d_tol6")]
        threshold: f64,
        expect: String,
    },
    /// integrate_two_valued equals ultralimit bitwise on random step
    /// functions over the atoms of the named generators.
    UltralimitIntegral {
        oracles: Vec<String>,
        generators: Vec<String>,
        #[serde(default = "d_trials50")]
        trials: usize,
    },
    /// The shift-channel output of every listed state is singular on the
    /// compact witness inventory and has Yosida–Hewitt λ = 0.
    Singularization {
        measure: String,
        states: Vec<String>,
        #[serde(default = "d_radius25")]
        basis_radius: i64,
        #[serde(default)]
        vanishing_coeffs: Vec<f64>,
    },
    /// sigma_additivity_check verdict and both side values.
    SigmaAdditivity {
        state: String,
        partition: String,
        expect_additive: bool,
        #[serde(default)]
        expect_lhs: Option<f64>,
        #[serde(default)]
        expect_rhs: Option<f64>,
    },
    /// split_nontwovalued weights and the exact (1, 0) witness.
    SplitNonTwoValued {
        measure: String,
        set: String,
        state: String,
        expect_weight_a: f64,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// Linearity of point-mass shift averaging on an explicit mixture.
    BarycentricFixed {
        points: Vec<PointMassDecl>,
        mixture: Vec<BarycentricComponent>,
        #[serde(default)]
        modulus: Option<i64>,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// Linearity of point-mass shift averaging on random mixtures.
    BarycentricRandom {
        #[serde(default = "d_trials20")]
        trials: usize,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// Random channels preserve the trace of random density matrices.
    TracePreservationRandom {
        #[serde(default = "d_trials20")]
        trials: usize,
        #[serde(default = "d_dim4")]
        max_dim: usize,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// Choi matrices of random channels are PSD down to the floor.
    ChoiPsdRandom {
        #[serde(default = "d_trials20")]
        trials: usize,
        #[serde(default = "d_dim4")]
        max_dim: usize,
        #[serde(default = "d_floor")]
        floor: f64,
    },
    /// Convolution of random measures is associative.
    ConvolutionAssocRandom {
        group: String,
        #[serde(default = "d_trials20")]
        trials: usize,
        #[serde(default = "d_tol12")]
        tol: f64,
    },
    /// Ultrafilter dichotomy on random representable sets: exactly one of
    /// X, ¬X is in, and decided-in sets are closed under intersection.
    FipDichotomyRandom {
        oracle: String,
        generators: Vec<String>,
        #[serde(default = "d_trials50")]
        trials: usize,
    },
    /// Yosida–Hewitt split and recombination is the identity on
    /// evaluations.
    YhRecombination {
        states: Vec<String>,
        #[serde(default = "d_radius25")]
        basis_radius: i64,
    },
}

#[derive(Debug, Deserialize)]
pub struct BarycentricComponent {
    pub weight: f64,
    pub coeffs: Vec<CoeffDecl>,
}

/// A Haar-ish random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub(crate) fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let gauss = |rng: &mut ChaCha8Rng| {
        // Box-Muller from uniform draws.
        let u1: f64 = rng.gen_range(1e-12..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| (0..dim).map(|_| Complex64::new(gauss(rng), gauss(rng))).collect())
        .collect();
    for i in 0..dim {
        for j in 0..i {
            let proj: Complex64 = (0..dim).map(|k| cols[j][k].conj() * cols[i][k]).sum();
            for k in 0..dim {
                let sub = proj * cols[j][k];
                cols[i][k] -= sub;
            }
        }
        let norm: f64 = cols[i].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..dim {
            cols[i][k] /= norm;
        }
    }
    CMatrix::from_fn(dim, dim, |r, c| cols[c][r])
}

fn random_mixed_unitary(dim: usize, terms: usize, rng: &mut ChaCha8Rng) -> QuantumChannel {
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let parts = weights
        .into_iter()
        .map(|w| (w, random_unitary(dim, rng)))
        .collect();
    QuantumChannel::mixed_unitary(parts).expect("valid random channel")
}

fn random_measure(group: &std::sync::Arc<crate::group::FiniteGroup>, rng: &mut ChaCha8Rng) -> GroupMeasure {
    let mut weights: Vec<f64> = (0..group.order()).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    GroupMeasure::new(group.clone(), weights).expect("valid random measure")
}

fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    // ρ = G G† / tr(G G†) for Gaussian-ish G: positive with unit trace.
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let p = &g * g.adjoint();
    let trace = p.trace().re;
    p.scale(1.0 / trace)
}

/// A random Boolean combination of the named generators, depth ≤ 3.
fn random_expr(generators: &[String], rng: &mut ChaCha8Rng, depth: usize) -> SetExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        let g = &generators[rng.gen_range(0..generators.len())];
        return SetExpr::gen(g);
    }
    match rng.gen_range(0..3) {
        0 => SetExpr::not(random_expr(generators, rng, depth - 1)),
        1 => SetExpr::and(
            random_expr(generators, rng, depth - 1),
            random_expr(generators, rng, depth - 1),
        ),
        _ => SetExpr::or(
            random_expr(generators, rng, depth - 1),
            random_expr(generators, rng, depth - 1),
        ),
    }
}

/// The atom expression with the given in/out sign pattern over `generators`.
fn atom_expr(generators: &[String], pattern: u32) -> SetExpr {
    let mut e = SetExpr::Full;
    for (i, g) in generators.iter().enumerate() {
        let lit = if pattern >> i & 1 == 1 {
            SetExpr::gen(g)
        } else {
            SetExpr::not(SetExpr::gen(g))
        };
        e = SetExpr::and(e, lit);
    }
    e
}

type Outcome = Result<(Verdict, ValueMap, ValueMap), String>;

fn pass(values: ValueMap) -> Outcome {
    Ok((Verdict::Pass, values, ValueMap::new()))
}

fn fail(values: ValueMap, witness: ValueMap) -> Outcome {
    Ok((Verdict::Fail, values, witness))
}

pub(super) fn execute(check: &CheckSpec, env: &Environment, rng: &mut ChaCha8Rng) -> Outcome {
    let e = |msg: String| -> String { msg };
    match &check.kind {
        CheckKind::Evaluate { state, observable, expect, tol } => {
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let o = Environment::lookup(&env.observables, observable, "observable")
                .map_err(|x| x.to_string())?;
            let v = evaluate(s, o).map_err(|x| x.to_string())?;
            let want = expect.value();
            let dev = (v - want).norm();
            let mut values = ValueMap::new();
            values.insert("value_re".into(), json!(v.re));
            values.insert("value_im".into(), json!(v.im));
            values.insert("expected_re".into(), json!(want.re));
            values.insert("deviation".into(), json!(dev));
            if dev <= *tol {
                pass(values)
            } else {
                let mut w = ValueMap::new();
                w.insert("observable".into(), json!(observable));
                fail(values, w)
            }
        }
        CheckKind::Excises { projector, state, observable, expect } => {
            let p = Environment::lookup(&env.observables, projector, "observable")
                .map_err(|x| x.to_string())?;
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let a = Environment::lookup(&env.observables, observable, "observable")
                .map_err(|x| x.to_string())?;
            let got = excises(p, s, a).map_err(|x| x.to_string())?;
            let mut values = ValueMap::new();
            values.insert("excises".into(), json!(got));
            values.insert("expected".into(), json!(expect));
            if got == *expect {
                pass(values)
            } else {
                let mut w = ValueMap::new();
                w.insert("projector".into(), json!(projector));
                w.insert("observable".into(), json!(observable));
                fail(values, w)
            }
        }
        CheckKind::ExcisionPurity { state, observable, projectors, expect } => {
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let a = Environment::lookup(&env.observables, observable, "observable")
                .map_err(|x| x.to_string())?;
            let mut excising: Option<&str> = None;
            let mut tried = 0usize;
            for name in projectors {
                let p = Environment::lookup(&env.observables, name, "observable")
                    .map_err(|x| x.to_string())?;
                match excises(p, s, a) {
                    Ok(true) => {
                        excising = Some(name);
                        tried += 1;
                        break;
                    }
                    Ok(false) => tried += 1,
                    Err(SymbolicError::FilterViolation(_)) => continue,
                    Err(other) => return Err(e(other.to_string())),
                }
            }
            let verdict_pure = excising.is_some();
            let want_pure = expect == "pure";
            let mut values = ValueMap::new();
            values.insert("filter_projectors_tried".into(), json!(tried));
            values.insert("purity".into(), json!(if verdict_pure { "pure" } else { "not_pure" }));
            let mut w = ValueMap::new();
            if let Some(p) = excising {
                w.insert("excising_projector".into(), json!(p));
            } else {
                w.insert("observable".into(), json!(observable));
            }
            if verdict_pure == want_pure {
                Ok((Verdict::Pass, values, w))
            } else {
                fail(values, w)
            }
        }
        CheckKind::Purity { state, observable, eps_schedule, expect } => {
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let a = Environment::lookup(&env.observables, observable, "observable")
                .map_err(|x| x.to_string())?;
            let verdict = match purity_check_diagonal(s, a, eps_schedule) {
                Ok(v) => v,
                Err(SymbolicError::InconclusiveAlgebra) => {
                    let mut values = ValueMap::new();
                    values.insert("purity".into(), json!("inconclusive"));
                    return Ok((Verdict::Inconclusive, values, ValueMap::new()));
                }
                Err(other) => return Err(e(other.to_string())),
            };
            let mut values = ValueMap::new();
            let mut w = ValueMap::new();
            let (got, ok) = match &verdict {
                PurityVerdict::Pure { limit, witnesses } => {
                    values.insert("limit_re".into(), json!(limit.re));
                    for (eps, norm) in witnesses {
                        w.insert(format!("excision_norm_at_{eps:e}"), json!(norm));
                    }
                    ("pure", expect == "pure")
                }
                PurityVerdict::NotPure { witness, values: (v1, v2) } => {
                    w.insert("distinguishing_projector".into(), json!(witness.to_string()));
                    w.insert("values".into(), json!([v1, v2]));
                    ("not_pure", expect == "not_pure")
                }
            };
            values.insert("purity".into(), json!(got));
            if ok {
                Ok((Verdict::Pass, values, w))
            } else {
                fail(values, w)
            }
        }
        CheckKind::Idempotence { representation, measure, tol } => {
            let rep = Environment::lookup(&env.representations, representation, "representation")
                .map_err(|x| x.to_string())?;
            let mu = Environment::lookup(&env.measures, measure, "measure")
                .map_err(|x| x.to_string())?;
            let q = QuantumChannel::group_average(rep, mu).map_err(|x| x.to_string())?;
            let qq = q.compose(&q).map_err(|x| x.to_string())?;
            let d = qq.distance(&q).map_err(|x| x.to_string())?;
            let mut values = ValueMap::new();
            values.insert("distance".into(), json!(d));
            values.insert("tol".into(), json!(tol));
            if d < *tol {
                pass(values)
            } else {
                let mut w = ValueMap::new();
                w.insert("representation".into(), json!(representation));
                fail(values, w)
            }
        }
        CheckKind::ConvolutionPowerRandom { representation, trials, max_power, tol } => {
            let rep = Environment::lookup(&env.representations, representation, "representation")
                .map_err(|x| x.to_string())?;
            let mut worst: f64 = 0.0;
            for _ in 0..*trials {
                let mu = random_measure(rep.group(), rng);
                let q = QuantumChannel::group_average(rep, &mu).map_err(|x| x.to_string())?;
                for n in 1..=*max_power {
                    let lhs = q.power(n);
                    let rhs = QuantumChannel::group_average(rep, &mu.convolution_power(n))
                        .map_err(|x| x.to_string())?;
                    worst = worst.max(lhs.distance(&rhs).map_err(|x| x.to_string())?);
                }
            }
            let mut values = ValueMap::new();
            values.insert("max_distance".into(), json!(worst));
            values.insert("trials".into(), json!(trials));
            if worst < *tol {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::CesaroUnitary {
            unitary,
            tol_convergence,
            max_n,
            expect_dephasing,
            tol_limit,
            tol_projection,
        } => {
            let u = matrix_from_rows(unitary).map_err(|x| x.to_string())?;
            let phi = QuantumChannel::unitary(u.clone()).map_err(|x| x.to_string())?;
            let (limit, diag) =
                cesaro_limit(&phi, *tol_convergence, *max_n).map_err(|x| x.to_string())?;
            let mut values = ValueMap::new();
            values.insert("effective_horizon".into(), json!(diag.effective_horizon));
            values.insert(
                "final_residual".into(),
                json!(diag.residuals.last().cloned().unwrap_or(0.0)),
            );
            let p_laws = projection_law_deviation(&phi, &limit)?;
            values.insert("projection_law_deviation".into(), json!(p_laws));
            let mut ok = p_laws < *tol_projection;
            if *expect_dephasing {
                let dim = phi.dim();
                // Full dephasing: average over conjugations by all diagonal
                // sign patterns kills every off-diagonal entry.
                let mut terms = Vec::new();
                let count = 1usize << dim;
                for bits in 0..count {
                    let d = CMatrix::from_fn(dim, dim, |i, j| {
                        if i == j {
                            Complex64::new(if bits >> i & 1 == 1 { -1.0 } else { 1.0 }, 0.0)
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    });
                    terms.push((1.0 / count as f64, d));
                }
                let dephasing = QuantumChannel::mixed_unitary(terms).map_err(|x| x.to_string())?;
                let d = limit.distance(&dephasing).map_err(|x| x.to_string())?;
                values.insert("distance_to_dephasing".into(), json!(d));
                ok &= d < *tol_limit;
            }
            if ok {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::CesaroRandom { trials, max_dim, tol_convergence, max_n, tol_projection } => {
            let mut worst: f64 = 0.0;
            for t in 0..*trials {
                let dim = 2 + t % (max_dim - 1);
                let phi = random_mixed_unitary(dim, 2 + t % 2, rng);
                let (limit, _) =
                    cesaro_limit(&phi, *tol_convergence, *max_n).map_err(|x| x.to_string())?;
                worst = worst.max(projection_law_deviation(&phi, &limit)?);
            }
            let mut values = ValueMap::new();
            values.insert("max_projection_law_deviation".into(), json!(worst));
            values.insert("trials".into(), json!(trials));
            if worst < *tol_projection {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::Invariance { representation, measure, max_n, threshold, expect } => {
            let rep = Environment::lookup(&env.representations, representation, "representation")
                .map_err(|x| x.to_string())?;
            let mu = Environment::lookup(&env.measures, measure, "measure")
                .map_err(|x| x.to_string())?;
            let d = invariance_diagnostic(rep, mu, *max_n).map_err(|x| x.to_string())?;
            let last = *d.last().unwrap();
            let first_below = d.iter().position(|&x| x < *threshold).map(|i| i + 1);
            let mut values = ValueMap::new();
            values.insert("final_d".into(), json!(last));
            if let Some(n) = first_below {
                values.insert("first_n_below_threshold".into(), json!(n));
            }
            let ok = match expect.as_str() {
                "converges" => last < *threshold,
                "constant_one" => d.iter().all(|&x| (x - 1.0).abs() < 1e-12),
                other => return Err(e(format!("unknown invariance expectation `{other}`"))),
            };
            if ok {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::UltralimitIntegral { oracles, generators, trials } => {
            let n_atoms = 1usize << generators.len();
            let mut checked = 0usize;
            for _ in 0..*trials {
                // A random partition of the atoms into 2–4 cells.
                let n_cells = rng.gen_range(2..=4usize);
                let assignment: Vec<usize> =
                    (0..n_atoms).map(|_| rng.gen_range(0..n_cells)).collect();
                let mut cells = Vec::new();
                let mut cell_values = Vec::new();
                for c in 0..n_cells {
                    let cell = (0..n_atoms)
                        .filter(|&a| assignment[a] == c)
                        .map(|a| atom_expr(generators, a as u32))
                        .fold(SetExpr::Empty, SetExpr::or);
                    cells.push(cell);
                    cell_values.push(Complex64::new(
                        rng.gen::<f64>() * 10.0 - 5.0,
                        rng.gen::<f64>() * 10.0 - 5.0,
                    ));
                }
                let f = StepFunction::new(cells, cell_values);
                for name in oracles {
                    let oracle = Environment::lookup(&env.oracles, name, "oracle")
                        .map_err(|x| x.to_string())?;
                    let mu = TwoValuedMeasure::new(oracle.clone());
                    let via_limit = ultralimit(oracle, &f).map_err(|x| x.to_string())?;
                    let via_integral =
                        integrate_two_valued(&mu, &f).map_err(|x| x.to_string())?;
                    if via_limit != via_integral {
                        let mut values = ValueMap::new();
                        values.insert("checked".into(), json!(checked));
                        let mut w = ValueMap::new();
                        w.insert("oracle".into(), json!(name));
                        w.insert("ultralimit".into(), json!([via_limit.re, via_limit.im]));
                        w.insert("integral".into(), json!([via_integral.re, via_integral.im]));
                        return fail(values, w);
                    }
                    checked += 1;
                }
            }
            let mut values = ValueMap::new();
            values.insert("comparisons".into(), json!(checked));
            values.insert("bitwise_equal".into(), json!(true));
            pass(values)
        }
        CheckKind::Singularization { measure, states, basis_radius, vanishing_coeffs } => {
            let mu = Environment::lookup(&env.shift_measures, measure, "shift measure")
                .map_err(|x| x.to_string())?;
            let mut witnesses: Vec<SymbolicObservable> = (-basis_radius..=*basis_radius)
                .map(SymbolicObservable::basis_projector)
                .collect();
            for &c in vanishing_coeffs {
                witnesses.push(SymbolicObservable::vanishing(Complex64::new(c, 0.0)));
            }
            for name in states {
                let s = Environment::lookup(&env.states, name, "state")
                    .map_err(|x| x.to_string())?;
                let out = shift_channel_apply(mu, s).map_err(|x| x.to_string())?;
                let verdict =
                    is_singular_on_representables(&out, &witnesses).map_err(|x| x.to_string())?;
                let split = yosida_hewitt_split(&out, &[]).map_err(|x| x.to_string())?;
                if !verdict.singular || split.lambda != 0.0 {
                    let mut values = ValueMap::new();
                    values.insert("lambda".into(), json!(split.lambda));
                    let mut w = ValueMap::new();
                    w.insert("state".into(), json!(name));
                    if let Some((idx, v)) = verdict.failure {
                        w.insert("witness_index".into(), json!(idx));
                        w.insert("witness_value".into(), json!(v));
                    }
                    return fail(values, w);
                }
            }
            let mut values = ValueMap::new();
            values.insert("states_checked".into(), json!(states.len()));
            values.insert("witness_count".into(), json!(witnesses.len()));
            values.insert("lambda".into(), json!(0.0));
            pass(values)
        }
        CheckKind::SigmaAdditivity { state, partition, expect_additive, expect_lhs, expect_rhs } => {
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let part = Environment::lookup(&env.partitions, partition, "partition")
                .map_err(|x| x.to_string())?;
            let v = crate::symbolic::sigma_additivity_check(s, part).map_err(|x| x.to_string())?;
            let mut values = ValueMap::new();
            values.insert("lhs".into(), json!(v.lhs));
            values.insert("rhs".into(), json!(v.rhs));
            values.insert("additive".into(), json!(v.additive));
            let mut ok = v.additive == *expect_additive;
            if let Some(lhs) = expect_lhs {
                ok &= (v.lhs - lhs).abs() < 1e-12;
            }
            if let Some(rhs) = expect_rhs {
                ok &= (v.rhs - rhs).abs() < 1e-12;
            }
            if ok {
                pass(values)
            } else {
                let mut w = ValueMap::new();
                w.insert("partition".into(), json!(partition));
                fail(values, w)
            }
        }
        CheckKind::SplitNonTwoValued { measure, set, state, expect_weight_a, tol } => {
            let mu = Environment::lookup(&env.shift_measures, measure, "shift measure")
                .map_err(|x| x.to_string())?;
            let a = env.parse_expr(set).map_err(|x| x.to_string())?;
            let s = Environment::lookup(&env.states, state, "state").map_err(|x| x.to_string())?;
            let split = split_nontwovalued(mu, &a, s).map_err(|x| x.to_string())?;
            let mut values = ValueMap::new();
            values.insert("weight_a".into(), json!(split.weight_a));
            values.insert("weight_b".into(), json!(split.weight_b));
            values.insert("witness_on_a".into(), json!(split.witness_values.0));
            values.insert("witness_on_b".into(), json!(split.witness_values.1));
            let ok = (split.weight_a - expect_weight_a).abs() <= *tol
                && split.witness_values == (1.0, 0.0);
            if ok {
                pass(values)
            } else {
                let mut w = ValueMap::new();
                w.insert("set".into(), json!(set));
                fail(values, w)
            }
        }
        CheckKind::BarycentricFixed { points, mixture, modulus, tol } => {
            let mu: Vec<(i64, f64)> = points.iter().map(|p| (p.shift, p.weight)).collect();
            let mix: Vec<(f64, Vec<(i64, Complex64)>)> = mixture
                .iter()
                .map(|m| {
                    (
                        m.weight,
                        m.coeffs.iter().map(|c| (c.index, c.value.value())).collect(),
                    )
                })
                .collect();
            let dev = barycentric_equivalence_check(&mu, &mix, *modulus);
            let mut values = ValueMap::new();
            values.insert("deviation".into(), json!(dev));
            if dev < *tol {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::BarycentricRandom { trials, tol } => {
            let mut worst: f64 = 0.0;
            for _ in 0..*trials {
                let n_shifts = rng.gen_range(2..=4usize);
                let mut shift_weights: Vec<f64> =
                    (0..n_shifts).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = shift_weights.iter().sum();
                shift_weights.iter_mut().for_each(|w| *w /= total);
                let mu: Vec<(i64, f64)> = shift_weights
                    .into_iter()
                    .map(|w| (rng.gen_range(-4..=4i64), w))
                    .collect();
                let n_vecs = rng.gen_range(2..=3usize);
                let mut vec_weights: Vec<f64> =
                    (0..n_vecs).map(|_| rng.gen_range(0.1..1.0)).collect();
                let total: f64 = vec_weights.iter().sum();
                vec_weights.iter_mut().for_each(|w| *w /= total);
                let mixture: Vec<(f64, Vec<(i64, Complex64)>)> = vec_weights
                    .into_iter()
                    .map(|w| {
                        let support = rng.gen_range(1..=3usize);
                        let mut cs: Vec<(i64, Complex64)> = (0..support)
                            .map(|_| {
                                (
                                    rng.gen_range(-6..=6i64),
                                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                                )
                            })
                            .collect();
                        let norm: f64 =
                            cs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
                        cs.iter_mut().for_each(|(_, c)| *c /= norm);
                        (w, cs)
                    })
                    .collect();
                worst = worst.max(barycentric_equivalence_check(&mu, &mixture, None));
            }
            let mut values = ValueMap::new();
            values.insert("max_deviation".into(), json!(worst));
            values.insert("trials".into(), json!(trials));
            if worst < *tol {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::TracePreservationRandom { trials, max_dim, tol } => {
            let mut worst: f64 = 0.0;
            for t in 0..*trials {
                let dim = 2 + t % (max_dim - 1);
                let phi = random_mixed_unitary(dim, 2 + t % 3, rng);
                let rho = random_density(dim, rng);
                let out = phi.apply_matrix(&rho);
                worst = worst.max((out.trace().re - 1.0).abs());
                worst = worst.max(out.trace().im.abs());
            }
            let mut values = ValueMap::new();
            values.insert("max_trace_deviation".into(), json!(worst));
            if worst < *tol {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::ChoiPsdRandom { trials, max_dim, floor } => {
            let mut worst = f64::INFINITY;
            for t in 0..*trials {
                let dim = 2 + t % (max_dim - 1);
                let phi = random_mixed_unitary(dim, 2 + t % 3, rng);
                worst = worst.min(phi.choi().min_eigenvalue());
            }
            let mut values = ValueMap::new();
            values.insert("min_choi_eigenvalue".into(), json!(worst));
            values.insert("floor".into(), json!(floor));
            if worst >= *floor {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::ConvolutionAssocRandom { group, trials, tol } => {
            let g = Environment::lookup(&env.groups, group, "group").map_err(|x| x.to_string())?;
            let mut worst: f64 = 0.0;
            for _ in 0..*trials {
                let a = random_measure(g, rng);
                let b = random_measure(g, rng);
                let c = random_measure(g, rng);
                let lhs = a
                    .convolve(&b)
                    .and_then(|ab| ab.convolve(&c))
                    .map_err(|x| x.to_string())?;
                let rhs = b
                    .convolve(&c)
                    .and_then(|bc| a.convolve(&bc))
                    .map_err(|x| x.to_string())?;
                worst = worst.max(lhs.total_variation(&rhs).map_err(|x| x.to_string())?);
            }
            let mut values = ValueMap::new();
            values.insert("max_tv".into(), json!(worst));
            if worst < *tol {
                pass(values)
            } else {
                fail(values, ValueMap::new())
            }
        }
        CheckKind::FipDichotomyRandom { oracle, generators, trials } => {
            let o = Environment::lookup(&env.oracles, oracle, "oracle").map_err(|x| x.to_string())?;
            let mut in_sets: Vec<SetExpr> = Vec::new();
            for _ in 0..*trials {
                let x = random_expr(generators, rng, 3);
                let dx = o.decide(&x).map_err(|x| x.to_string())?;
                let dnx = o.decide(&SetExpr::not(x.clone())).map_err(|x| x.to_string())?;
                if dx == dnx {
                    let mut w = ValueMap::new();
                    w.insert("set".into(), json!(x.to_string()));
                    return fail(ValueMap::new(), w);
                }
                if dx {
                    // Decided-in sets are a filter: intersections stay in.
                    if let Some(y) = in_sets.last() {
                        let meet = SetExpr::and(x.clone(), y.clone());
                        if !o.decide(&meet).map_err(|x| x.to_string())? {
                            let mut w = ValueMap::new();
                            w.insert("set".into(), json!(meet.to_string()));
                            return fail(ValueMap::new(), w);
                        }
                    }
                    in_sets.push(x);
                }
            }
            let mut values = ValueMap::new();
            values.insert("trials".into(), json!(trials));
            values.insert("in_sets_seen".into(), json!(in_sets.len()));
            pass(values)
        }
        CheckKind::YhRecombination { states, basis_radius } => {
            let probes: Vec<SymbolicObservable> = std::iter::once(SymbolicObservable::identity())
                .chain((-basis_radius..=*basis_radius).map(SymbolicObservable::basis_projector))
                .collect();
            for name in states {
                let s = Environment::lookup(&env.states, name, "state")
                    .map_err(|x| x.to_string())?;
                let split = yosida_hewitt_split(s, &[]).map_err(|x| x.to_string())?;
                if (split.lambda - split.lambda_supremum).abs() > 1e-12 {
                    let mut w = ValueMap::new();
                    w.insert("state".into(), json!(name));
                    w.insert("lambda".into(), json!(split.lambda));
                    w.insert("lambda_supremum".into(), json!(split.lambda_supremum));
                    return fail(ValueMap::new(), w);
                }
                let mut parts = Vec::new();
                if let Some(n) = &split.normal {
                    parts.push((split.lambda, n.clone()));
                }
                if let Some(sg) = &split.singular {
                    parts.push((1.0 - split.lambda, sg.clone()));
                }
                let recombined =
                    crate::symbolic::SymbolicState::mixture(&parts).map_err(|x| x.to_string())?;
                for probe in &probes {
                    let a = evaluate(s, probe).map_err(|x| x.to_string())?;
                    let b = evaluate(&recombined, probe).map_err(|x| x.to_string())?;
                    if (a - b).norm() > 1e-12 {
                        let mut w = ValueMap::new();
                        w.insert("state".into(), json!(name));
                        w.insert("original".into(), json!(a.re));
                        w.insert("recombined".into(), json!(b.re));
                        return fail(ValueMap::new(), w);
                    }
                }
            }
            let mut values = ValueMap::new();
            values.insert("states_checked".into(), json!(states.len()));
            pass(values)
        }
    }
}

/// max of ‖Φ̄Φ − Φ̄‖, ‖ΦΦ̄ − Φ̄‖, ‖Φ̄² − Φ̄‖ in Choi-Frobenius distance.
fn projection_law_deviation(phi: &QuantumChannel, limit: &QuantumChannel) -> Result<f64, String> {
    let a = limit
        .compose(phi)
        .and_then(|c| c.distance(limit))
        .map_err(|x| x.to_string())?;
    let b = phi
        .compose(limit)
        .and_then(|c| c.distance(limit))
        .map_err(|x| x.to_string())?;
    let c = limit
        .compose(limit)
        .and_then(|c| c.distance(limit))
        .map_err(|x| x.to_string())?;
    Ok(a.max(b).max(c))
}
