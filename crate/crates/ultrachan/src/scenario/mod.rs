//! Declarative scenario files and the check runner behind them.
//!
//! A scenario is one TOML file with sections mirroring the library types —
//! groups, representations, measures, set generators, oracles, partitions,
//! states, observables — followed by a list of named checks. The runner
//! builds the declared environment, executes the checks sequentially (the
//! oracle log is single-writer), and emits a deterministic report: maps are
//! ordered, randomness comes from one seeded generator, and a fixed-clock
//! option zeroes the per-check timings so reruns are byte-identical.

mod checks;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::group::{FiniteGroup, GroupMeasure, UnitaryRepresentation};
use crate::operator::CMatrix;
use crate::sets::{
    CountablePartition, DomainKind, GeneratorKind, OracleKind, SetAlgebra, SetExpr, SharedAlgebra,
    StepFunction, TwoValuedMeasure, UltrafilterOracle,
};
use crate::symbolic::{shift_channel_apply, ShiftMeasure, SymbolicObservable, SymbolicState, VanishingDiag};

pub use checks::CheckSpec;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// A complex number written either as a bare float or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum CNum {
    Real(f64),
    Pair([f64; 2]),
}

impl CNum {
    pub fn value(self) -> Complex64 {
        match self {
            CNum::Real(re) => Complex64::new(re, 0.0),
            CNum::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn matrix_from_rows(rows: &[Vec<CNum>]) -> Result<CMatrix, ScenarioError> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(ScenarioError::Validation("matrix rows must be square".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].value()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub domain: Option<DomainDecl>,
    #[serde(default)]
    pub generators: Vec<GeneratorDecl>,
    #[serde(default)]
    pub shift_rules: Vec<ShiftRuleDecl>,
    #[serde(default)]
    pub oracles: Vec<OracleDecl>,
    #[serde(default)]
    pub partitions: Vec<PartitionDecl>,
    #[serde(default)]
    pub groups: Vec<GroupDecl>,
    #[serde(default)]
    pub representations: Vec<RepresentationDecl>,
    #[serde(default)]
    pub measures: Vec<MeasureDecl>,
    #[serde(default)]
    pub shift_measures: Vec<ShiftMeasureDecl>,
    #[serde(default)]
    pub states: Vec<StateDecl>,
    #[serde(default)]
    pub observables: Vec<ObservableDecl>,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDecl {
    pub kind: String, // "integers" | "symbolic"
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDecl {
    pub name: String,
    pub kind: String, // "finite" | "residue" | "symbolic"
    #[serde(default)]
    pub elements: Vec<i64>,
    #[serde(default)]
    pub modulus: Option<i64>,
    #[serde(default)]
    pub residues: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftRuleDecl {
    pub generator: String,
    pub shift: i64,
    pub image: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleDecl {
    pub name: String,
    pub kind: String, // "principal" | "free" | "sigma"
    #[serde(default)]
    pub point: Option<i64>,
    #[serde(default)]
    pub decisions: Vec<DecisionDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionDecl {
    pub set: String,
    pub decide: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionDecl {
    pub name: String,
    pub kind: String, // "cells" | "singletons"
    #[serde(default)]
    pub cells: Vec<String>,
    /// Oracles to register the partition with, each with its selected cell.
    #[serde(default)]
    pub register: Vec<PartitionRegistration>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionRegistration {
    pub oracle: String,
    pub selected: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDecl {
    pub name: String,
    pub kind: String, // "cyclic" | "product_cyclic" | "s3"
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub orders: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDecl {
    pub name: String,
    pub group: String,
    pub kind: String, // "phases" | "swap" | "signs" | "s3_standard" | "regular"
    #[serde(default)]
    pub exponents: Vec<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDecl {
    pub name: String,
    pub group: String,
    pub kind: String, // "haar" | "delta" | "weights"
    #[serde(default)]
    pub element: Option<usize>,
    #[serde(default)]
    pub weights: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftMeasureDecl {
    pub name: String,
    pub kind: String, // "two_valued" | "point_masses" | "convex"
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default)]
    pub points: Vec<PointMassDecl>,
    #[serde(default)]
    pub components: Vec<ConvexComponentDecl>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassDecl {
    pub shift: i64,
    pub weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexComponentDecl {
    pub weight: f64,
    pub oracle: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateDecl {
    pub name: String,
    pub kind: String, // "vector" | "basis" | "atom" | "mixture" | "channel_output"
    #[serde(default)]
    pub coeffs: Vec<CoeffDecl>,
    #[serde(default)]
    pub index: Option<i64>,
    #[serde(default)]
    pub oracle: Option<String>,
    #[serde(default)]
    pub offset: Option<i64>,
    #[serde(default)]
    pub components: Vec<MixtureComponentDecl>,
    #[serde(default)]
    pub measure: Option<String>,
    #[serde(default)]
    pub input: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffDecl {
    pub index: i64,
    pub value: CNum,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponentDecl {
    pub weight: f64,
    pub state: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableDecl {
    pub name: String,
    pub kind: String, // "step" | "block" | "cell_projector" | "basis_projector" | "identity" | "vanishing"
    #[serde(default)]
    pub cells: Vec<String>,
    #[serde(default)]
    pub values: Vec<CNum>,
    #[serde(default)]
    pub indices: Vec<i64>,
    #[serde(default)]
    pub matrix: Vec<Vec<CNum>>,
    #[serde(default)]
    pub cell: Option<String>,
    #[serde(default)]
    pub index: Option<i64>,
    #[serde(default)]
    pub coeff: Option<CNum>,
}

/// The fully constructed environment of a scenario: every declared object
/// resolved and validated, ready for checks.
pub struct Environment {
    pub algebra: SharedAlgebra,
    pub oracles: BTreeMap<String, UltrafilterOracle>,
    pub partitions: BTreeMap<String, CountablePartition>,
    pub groups: BTreeMap<String, Arc<FiniteGroup>>,
    pub representations: BTreeMap<String, UnitaryRepresentation>,
    pub measures: BTreeMap<String, GroupMeasure>,
    pub shift_measures: BTreeMap<String, ShiftMeasure>,
    pub states: BTreeMap<String, SymbolicState>,
    pub observables: BTreeMap<String, SymbolicObservable>,
}

impl Environment {
    pub fn lookup<'a, T>(
        map: &'a BTreeMap<String, T>,
        name: &str,
        what: &str,
    ) -> Result<&'a T, ScenarioError> {
        map.get(name)
            .ok_or_else(|| ScenarioError::Validation(format!("unknown {what} `{name}`")))
    }

    pub fn parse_expr(&self, s: &str) -> Result<SetExpr, ScenarioError> {
        SetExpr::parse(s).map_err(|e| ScenarioError::Validation(e.to_string()))
    }
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Resolves every declaration, running oracle registrations eagerly so
    /// inconsistent scenarios fail at load time.
    pub fn build(&self) -> Result<Environment, ScenarioError> {
        let bad = |m: String| ScenarioError::Validation(m);
        let domain = match self.domain.as_ref().map(|d| d.kind.as_str()) {
            None | Some("integers") => DomainKind::Integers,
            Some("symbolic") => DomainKind::SymbolicKappa,
            Some(other) => return Err(bad(format!("unknown domain kind `{other}`"))),
        };
        let algebra = SetAlgebra::new(domain);
        for g in &self.generators {
            let kind = match g.kind.as_str() {
                "finite" => GeneratorKind::Finite(g.elements.iter().cloned().collect()),
                "residue" => GeneratorKind::Residue {
                    modulus: g
                        .modulus
                        .ok_or_else(|| bad(format!("generator `{}` needs a modulus", g.name)))?,
                    residues: g.residues.iter().cloned().collect(),
                },
                "symbolic" => GeneratorKind::Symbolic,
                other => return Err(bad(format!("unknown generator kind `{other}`"))),
            };
            algebra
                .borrow_mut()
                .register_generator(&g.name, kind)
                .map_err(|e| bad(e.to_string()))?;
        }
        for r in &self.shift_rules {
            let image = SetExpr::parse(&r.image).map_err(|e| bad(e.to_string()))?;
            algebra
                .borrow_mut()
                .register_shift_rule(&r.generator, r.shift, image)
                .map_err(|e| bad(e.to_string()))?;
        }

        let mut oracles = BTreeMap::new();
        for o in &self.oracles {
            let kind = match o.kind.as_str() {
                "principal" => OracleKind::Principal(
                    o.point
                        .ok_or_else(|| bad(format!("oracle `{}` needs a point", o.name)))?,
                ),
                "free" => OracleKind::FreeSymbolic,
                "sigma" => OracleKind::SigmaCompleteSymbolic,
                other => return Err(bad(format!("unknown oracle kind `{other}`"))),
            };
            let oracle = UltrafilterOracle::new(algebra.clone(), kind);
            for d in &o.decisions {
                let e = SetExpr::parse(&d.set).map_err(|e| bad(e.to_string()))?;
                oracle
                    .register_decision(&e, d.decide)
                    .map_err(|e| bad(format!("oracle `{}`: {e}", o.name)))?;
            }
            if oracles.insert(o.name.clone(), oracle).is_some() {
                return Err(bad(format!("duplicate oracle `{}`", o.name)));
            }
        }

        let mut partitions = BTreeMap::new();
        for p in &self.partitions {
            let part = match p.kind.as_str() {
                "singletons" => CountablePartition::Singletons,
                "cells" => {
                    let cells: Vec<SetExpr> = p
                        .cells
                        .iter()
                        .map(|c| SetExpr::parse(c).map_err(|e| bad(e.to_string())))
                        .collect::<Result<_, _>>()?;
                    CountablePartition::Cells(cells)
                }
                other => return Err(bad(format!("unknown partition kind `{other}`"))),
            };
            for reg in &p.register {
                let oracle = Environment::lookup(&oracles, &reg.oracle, "oracle")?;
                oracle
                    .register_countable_partition(&part, Some(reg.selected))
                    .map_err(|e| bad(format!("partition `{}`: {e}", p.name)))?;
            }
            partitions.insert(p.name.clone(), part);
        }

        let mut groups = BTreeMap::new();
        for g in &self.groups {
            let group = match g.kind.as_str() {
                "cyclic" => FiniteGroup::cyclic(
                    g.order
                        .ok_or_else(|| bad(format!("group `{}` needs an order", g.name)))?,
                ),
                "product_cyclic" => {
                    let mut parts = g.orders.iter();
                    let first = parts
                        .next()
                        .ok_or_else(|| bad(format!("group `{}` needs orders", g.name)))?;
                    let mut acc = FiniteGroup::cyclic(*first);
                    for n in parts {
                        acc = FiniteGroup::product(&acc, &FiniteGroup::cyclic(*n));
                    }
                    acc
                }
                "s3" => FiniteGroup::symmetric_3(),
                other => return Err(bad(format!("unknown group kind `{other}`"))),
            };
            groups.insert(g.name.clone(), group);
        }

        let mut representations = BTreeMap::new();
        for r in &self.representations {
            let group = Environment::lookup(&groups, &r.group, "group")?.clone();
            let rep = match r.kind.as_str() {
                "phases" => UnitaryRepresentation::cyclic_phases(group, &r.exponents, None),
                "swap" => UnitaryRepresentation::swap_z2(group),
                "signs" => UnitaryRepresentation::signs_z2z2(group),
                "s3_standard" => UnitaryRepresentation::s3_standard(group),
                "regular" => Ok(UnitaryRepresentation::regular(group)),
                other => return Err(bad(format!("unknown representation kind `{other}`"))),
            }
            .map_err(|e| bad(format!("representation `{}`: {e}", r.name)))?;
            representations.insert(r.name.clone(), rep);
        }

        let mut measures = BTreeMap::new();
        for m in &self.measures {
            let group = Environment::lookup(&groups, &m.group, "group")?.clone();
            let measure = match m.kind.as_str() {
                "haar" => Ok(GroupMeasure::haar_uniform(group)),
                "delta" => GroupMeasure::delta(
                    group,
                    m.element
                        .ok_or_else(|| bad(format!("measure `{}` needs an element", m.name)))?,
                ),
                "weights" => GroupMeasure::new(group, m.weights.clone()),
                other => return Err(bad(format!("unknown measure kind `{other}`"))),
            }
            .map_err(|e| bad(format!("measure `{}`: {e}", m.name)))?;
            measures.insert(m.name.clone(), measure);
        }

        let mut shift_measures = BTreeMap::new();
        for m in &self.shift_measures {
            let built = match m.kind.as_str() {
                "two_valued" => {
                    let name = m
                        .oracle
                        .as_ref()
                        .ok_or_else(|| bad(format!("shift measure `{}` needs an oracle", m.name)))?;
                    let oracle = Environment::lookup(&oracles, name, "oracle")?.clone();
                    ShiftMeasure::TwoValued(TwoValuedMeasure::new(oracle))
                }
                "point_masses" => ShiftMeasure::FinitelySupported(
                    m.points.iter().map(|p| (p.shift, p.weight)).collect(),
                ),
                "convex" => {
                    let mut parts = Vec::new();
                    for c in &m.components {
                        let oracle = Environment::lookup(&oracles, &c.oracle, "oracle")?.clone();
                        parts.push((c.weight, TwoValuedMeasure::new(oracle)));
                    }
                    ShiftMeasure::ConvexOfTwoValued(parts)
                }
                other => return Err(bad(format!("unknown shift measure kind `{other}`"))),
            };
            shift_measures.insert(m.name.clone(), built);
        }

        let mut states: BTreeMap<String, SymbolicState> = BTreeMap::new();
        for s in &self.states {
            let built = match s.kind.as_str() {
                "vector" => {
                    let coeffs: Vec<(i64, Complex64)> =
                        s.coeffs.iter().map(|c| (c.index, c.value.value())).collect();
                    SymbolicState::vector_state(algebra.clone(), &coeffs)
                        .map_err(|e| bad(format!("state `{}`: {e}", s.name)))?
                }
                "basis" => SymbolicState::basis_state(
                    algebra.clone(),
                    s.index
                        .ok_or_else(|| bad(format!("state `{}` needs an index", s.name)))?,
                ),
                "atom" => {
                    let name = s
                        .oracle
                        .as_ref()
                        .ok_or_else(|| bad(format!("state `{}` needs an oracle", s.name)))?;
                    let oracle = Environment::lookup(&oracles, name, "oracle")?.clone();
                    SymbolicState::atom(algebra.clone(), oracle, s.offset.unwrap_or(0))
                }
                "mixture" => {
                    let mut parts = Vec::new();
                    for c in &s.components {
                        let inner = states
                            .get(&c.state)
                            .ok_or_else(|| bad(format!("unknown state `{}`", c.state)))?;
                        parts.push((c.weight, inner.clone()));
                    }
                    SymbolicState::mixture(&parts)
                        .map_err(|e| bad(format!("state `{}`: {e}", s.name)))?
                }
                "channel_output" => {
                    let mu = Environment::lookup(
                        &shift_measures,
                        s.measure
                            .as_ref()
                            .ok_or_else(|| bad(format!("state `{}` needs a measure", s.name)))?,
                        "shift measure",
                    )?;
                    let input = states
                        .get(
                            s.input
                                .as_ref()
                                .ok_or_else(|| bad(format!("state `{}` needs an input", s.name)))?,
                        )
                        .ok_or_else(|| bad(format!("unknown state `{:?}`", s.input)))?;
                    shift_channel_apply(mu, input)
                        .map_err(|e| bad(format!("state `{}`: {e}", s.name)))?
                }
                other => return Err(bad(format!("unknown state kind `{other}`"))),
            };
            states.insert(s.name.clone(), built);
        }

        let mut observables = BTreeMap::new();
        for o in &self.observables {
            let built = match o.kind.as_str() {
                "identity" => SymbolicObservable::identity(),
                "step" => {
                    let cells: Vec<SetExpr> = o
                        .cells
                        .iter()
                        .map(|c| SetExpr::parse(c).map_err(|e| bad(e.to_string())))
                        .collect::<Result<_, _>>()?;
                    let values: Vec<Complex64> = o.values.iter().map(|v| v.value()).collect();
                    if cells.len() != values.len() {
                        return Err(bad(format!("observable `{}`: cells/values mismatch", o.name)));
                    }
                    SymbolicObservable::step(StepFunction::new(cells, values))
                }
                "block" => SymbolicObservable::finite_block(
                    o.indices.clone(),
                    matrix_from_rows(&o.matrix)?,
                ),
                "cell_projector" => {
                    let cell = o
                        .cell
                        .as_ref()
                        .ok_or_else(|| bad(format!("observable `{}` needs a cell", o.name)))?;
                    SymbolicObservable::cell_projector(
                        SetExpr::parse(cell).map_err(|e| bad(e.to_string()))?,
                    )
                }
                "basis_projector" => SymbolicObservable::basis_projector(
                    o.index
                        .ok_or_else(|| bad(format!("observable `{}` needs an index", o.name)))?,
                ),
                "vanishing" => SymbolicObservable {
                    finite_block: None,
                    step_diag: None,
                    vanishing_diag: Some(VanishingDiag {
                        coeff: o
                            .coeff
                            .ok_or_else(|| bad(format!("observable `{}` needs a coeff", o.name)))?
                            .value(),
                    }),
                },
                other => return Err(bad(format!("unknown observable kind `{other}`"))),
            };
            observables.insert(o.name.clone(), built);
        }

        Ok(Environment {
            algebra,
            oracles,
            partitions,
            groups,
            representations,
            measures,
            shift_measures,
            states,
            observables,
        })
    }

    /// Builds the environment and executes every check.
    pub fn run(&self, seed: u64, fixed_clock: bool) -> Result<Report, ScenarioError> {
        let env = self.build()?;
        if self.checks.is_empty() {
            eprintln!("warning: scenario `{}` declares no checks", self.name);
        }
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut records = Vec::new();
        for check in &self.checks {
            let start = std::time::Instant::now();
            let outcome = checks::execute(check, &env, &mut rng);
            let ms = if fixed_clock { 0 } else { start.elapsed().as_millis() as u64 };
            let record = match outcome {
                Ok((verdict, values, witness)) => Record {
                    id: check.id.clone(),
                    verdict,
                    values,
                    witness,
                    ms,
                },
                Err(e) => return Err(ScenarioError::Validation(format!("check `{}`: {e}", check.id))),
            };
            records.push(record);
        }
        let pass = records.iter().all(|r| r.verdict == Verdict::Pass);
        Ok(Report { scenario: self.name.clone(), records, pass })
    }
}

/// Check outcome; INCONCLUSIVE marks verdicts the algebra cannot settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// Measured values and witnesses attached to a record; ordered for
/// deterministic serialization.
pub type ValueMap = BTreeMap<String, serde_json::Value>;

#[derive(Debug)]
pub struct Record {
    pub id: String,
    pub verdict: Verdict,
    pub values: ValueMap,
    pub witness: ValueMap,
    pub ms: u64,
}

#[derive(Debug)]
pub struct Report {
    pub scenario: String,
    pub records: Vec<Record>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let records: Vec<serde_json::Value> = self
            .records
            .iter()
            .map(|r| {
                serde_json::json!({
                    "id": r.id,
                    "verdict": r.verdict.as_str(),
                    "values": r.values,
                    "witness": r.witness,
                    "ms": r.ms,
                })
            })
            .collect();
        let report = serde_json::json!({
            "scenario": self.scenario,
            "records": records,
            "pass": self.pass,
        });
        serde_json::to_string_pretty(&report).expect("serializable report")
    }

    /// One row per record; value keys are flattened into columns (union over
    /// records, sorted), empty where a record has no such value.
    pub fn to_csv(&self) -> String {
        let mut keys: Vec<String> = self
            .records
            .iter()
            .flat_map(|r| r.values.keys().cloned())
            .collect();
        keys.sort();
        keys.dedup();
        let mut out = String::new();
        out.push_str("id,verdict,ms");
        for k in &keys {
            let _ = write!(out, ",{k}");
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{},{}", r.id, r.verdict.as_str(), r.ms);
            for k in &keys {
                out.push(',');
                if let Some(v) = r.values.get(k) {
                    let text = match v {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = write!(out, "{}", text.replace(',', ";"));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// The bundled scenario suite: (id, description, TOML source).
pub fn bundled_scenarios() -> Vec<(&'static str, &'static str, &'static str)> {
    vec![
        (
            "example-vec-non-pure",
            "Qubit vector state fails diagonal excision: the uniform superposition is not pure on the diagonal algebra",
            include_str!("../../scenarios/example-vec-non-pure.toml"),
        ),
        (
            "haar-idempotence",
            "Haar-averaged channels are idempotent across cyclic, product, and non-abelian groups",
            include_str!("../../scenarios/haar-idempotence.toml"),
        ),
        (
            "convolution-powers",
            "Channel powers of a group average equal the channel of the convolution power",
            include_str!("../../scenarios/convolution-powers.toml"),
        ),
        (
            "cesaro-limits",
            "Cesàro averages of channel iterates converge to idempotent limit channels",
            include_str!("../../scenarios/cesaro-limits.toml"),
        ),
        (
            "invariance-diagnostic",
            "Convolution powers drift toward left-invariance for spread measures and stall for point masses",
            include_str!("../../scenarios/invariance-diagnostic.toml"),
        ),
        (
            "ultralimit-integral",
            "Integration against a two-valued measure coincides bitwise with the ultralimit",
            include_str!("../../scenarios/ultralimit-integral.toml"),
        ),
        (
            "singularization",
            "Two-valued shift averaging maps every vector state to a singular state",
            include_str!("../../scenarios/singularization.toml"),
        ),
        (
            "sigma-additivity",
            "σ-complete oracles preserve σ-additivity; free oracles on the integers break it on singletons",
            include_str!("../../scenarios/sigma-additivity.toml"),
        ),
        (
            "diagonal-purity",
            "Basis-vector outputs stay pure on the diagonal algebra; superposition outputs split",
            include_str!("../../scenarios/diagonal-purity.toml"),
        ),
        (
            "non-two-valued-split",
            "A measure with an intermediate set splits every vector-state output nontrivially",
            include_str!("../../scenarios/non-two-valued-split.toml"),
        ),
        (
            "barycentric-lemma",
            "Point-mass shift averaging commutes with convex mixing of vector states",
            include_str!("../../scenarios/barycentric-lemma.toml"),
        ),
        (
            "structural-suite",
            "Randomized structural invariants: trace preservation, Choi positivity, convolution laws, oracle dichotomy, split recombination",
            include_str!("../../scenarios/structural-suite.toml"),
        ),
    ]
}

/// Looks up a bundled scenario by id.
pub fn bundled(id: &str) -> Option<ScenarioFile> {
    bundled_scenarios()
        .into_iter()
        .find(|(name, _, _)| *name == id)
        .map(|(_, _, text)| ScenarioFile::from_toml(text).expect("bundled scenario parses"))
}
