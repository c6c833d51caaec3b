//! Set algebras over index domains, filters, ultrafilter decision oracles,
//! two-valued measures, and ultralimit evaluation.
//!
//! Non-principal ultrafilters are non-constructive, so they are modeled as
//! decision oracles over a finitely generated Boolean algebra: every query is
//! answered consistently with the finite-intersection property, unforced
//! decisions must be pre-registered, and all decisions are logged. Theorems
//! about such ultrafilters become conditional properties "given any
//! consistent oracle".
//!
//! Two concrete domains are supported: the integers ℤ (whose additive group
//! provides a total shift action, and where every generator carries a
//! decidable point-membership predicate) and a symbolic uncountable domain
//! whose shift action is given by an explicit finite table.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use num_complex::Complex64;
use thiserror::Error;

const MAX_GENERATORS: usize = 14;

#[derive(Debug, Error)]
pub enum SetError {
    #[error("unregistered generator `{0}`")]
    UnregisteredGenerator(String),
    #[error("no shift action registered for generator `{0}` and shift {1}")]
    UnregisteredShift(String, i64),
    #[error("too many generators (limit {MAX_GENERATORS})")]
    TooManyGenerators,
    #[error("oracle decision would violate the finite intersection property: {0}")]
    InconsistentOracle(String),
    #[error("free extension rule cannot decide `{0}`: the set is neither forced in nor forced out; pre-register a decision")]
    UndecidableInFreeRule(String),
    #[error("more than one selected cell in a registered partition")]
    MultipleSelected,
    #[error("cells do not form a partition of the domain: {0}")]
    NotAPartition(String),
    #[error("partition is not registered with the oracle")]
    PartitionNotRegistered,
    #[error("parse error in set expression: {0}")]
    Parse(String),
}

/// The index domain carrying the basis vectors and the shift group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    /// ℤ with its additive shift action.
    Integers,
    /// A symbolic uncountable domain; shifts act through a registered table.
    SymbolicKappa,
}

/// A primitive set generating the Boolean algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorKind {
    /// An explicit finite set of integers.
    Finite(BTreeSet<i64>),
    /// A union of residue classes modulo `modulus`.
    Residue { modulus: i64, residues: BTreeSet<i64> },
    /// A purely formal set on the symbolic domain.
    Symbolic,
}

impl GeneratorKind {
    fn contains(&self, x: i64) -> bool {
        match self {
            GeneratorKind::Finite(s) => s.contains(&x),
            GeneratorKind::Residue { modulus, residues } => {
                residues.contains(&x.rem_euclid(*modulus))
            }
            GeneratorKind::Symbolic => panic!("symbolic generators have no point membership"),
        }
    }

    /// The translated set { x + k : x ∈ self } for integer generators.
    fn translate(&self, k: i64) -> GeneratorKind {
        match self {
            GeneratorKind::Finite(s) => GeneratorKind::Finite(s.iter().map(|x| x + k).collect()),
            GeneratorKind::Residue { modulus, residues } => GeneratorKind::Residue {
                modulus: *modulus,
                residues: residues.iter().map(|r| (r + k).rem_euclid(*modulus)).collect(),
            },
            GeneratorKind::Symbolic => panic!("symbolic generators translate through the table"),
        }
    }
}

/// A set expression over the generated algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetExpr {
    Empty,
    Full,
    Gen(String),
    Not(Box<SetExpr>),
    And(Box<SetExpr>, Box<SetExpr>),
    Or(Box<SetExpr>, Box<SetExpr>),
    /// The translate { x + k : x ∈ e }.
    Shift(i64, Box<SetExpr>),
}

impl SetExpr {
    pub fn gen(name: &str) -> Self {
        SetExpr::Gen(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: SetExpr) -> Self {
        SetExpr::Not(Box::new(e))
    }

    pub fn and(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: SetExpr, b: SetExpr) -> Self {
        SetExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn shift(k: i64, e: SetExpr) -> Self {
        SetExpr::Shift(k, Box::new(e))
    }

    pub fn finite(elems: &[i64]) -> Self {
        let set: BTreeSet<i64> = elems.iter().cloned().collect();
        let name = format!(
            "{{{}}}",
            set.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        );
        // Carried by name; the algebra resolves or auto-registers it.
        SetExpr::Gen(name)
    }

    /// Parses `a & (b | !c) + 1`, `{0,1,2}`, `empty`, `full`. `+k`/`-k`
    /// translate the preceding factor; `!` is complement.
    pub fn parse(input: &str) -> Result<Self, SetError> {
        let mut p = Parser { chars: input.chars().collect(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(SetError::Parse(format!("trailing input at {}", p.pos)));
        }
        Ok(e)
    }
}

impl fmt::Display for SetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetExpr::Empty => write!(f, "empty"),
            SetExpr::Full => write!(f, "full"),
            SetExpr::Gen(n) => write!(f, "{n}"),
            SetExpr::Not(e) => write!(f, "!({e})"),
            SetExpr::And(a, b) => write!(f, "({a} & {b})"),
            SetExpr::Or(a, b) => write!(f, "({a} | {b})"),
            SetExpr::Shift(k, e) => write!(f, "({e} + {k})"),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).cloned()
    }

    fn expr(&mut self) -> Result<SetExpr, SetError> {
        let mut e = self.term()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            e = SetExpr::or(e, self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<SetExpr, SetError> {
        let mut e = self.factor()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            e = SetExpr::and(e, self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<SetExpr, SetError> {
        let mut e = match self.peek() {
            Some('!') => {
                self.pos += 1;
                SetExpr::not(self.factor()?)
            }
            _ => self.primary()?,
        };
        loop {
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    let k = self.integer()?;
                    e = SetExpr::shift(k, e);
                }
                Some('-') => {
                    self.pos += 1;
                    let k = self.integer()?;
                    e = SetExpr::shift(-k, e);
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<SetExpr, SetError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(SetError::Parse("expected ')'".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('{') => {
                self.pos += 1;
                let mut elems = Vec::new();
                loop {
                    elems.push(self.integer()?);
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some('}') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(SetError::Parse("expected ',' or '}'".into())),
                    }
                }
                Ok(SetExpr::finite(&elems))
            }
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while self.pos < self.chars.len()
                    && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
                {
                    self.pos += 1;
                }
                let word: String = self.chars[start..self.pos].iter().collect();
                match word.as_str() {
                    "empty" => Ok(SetExpr::Empty),
                    "full" => Ok(SetExpr::Full),
                    _ => Ok(SetExpr::Gen(word)),
                }
            }
            other => Err(SetError::Parse(format!("unexpected {other:?}"))),
        }
    }

    fn integer(&mut self) -> Result<i64, SetError> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| SetError::Parse(format!("bad integer `{s}`")))
    }
}

/// Which points an atom of the generated algebra contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomInfo {
    Empty,
    Finite(BTreeSet<i64>),
    Infinite,
}

/// A normalized set: the disjunction of a subset of the algebra's atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomMask {
    n_atoms: usize,
    atoms: BTreeSet<u32>,
}

impl AtomMask {
    pub fn atoms(&self) -> &BTreeSet<u32> {
        &self.atoms
    }

    pub fn complement(&self) -> AtomMask {
        AtomMask {
            n_atoms: self.n_atoms,
            atoms: (0..self.n_atoms as u32).filter(|a| !self.atoms.contains(a)).collect(),
        }
    }

    pub fn intersect(&self, other: &AtomMask) -> AtomMask {
        AtomMask {
            n_atoms: self.n_atoms,
            atoms: self.atoms.intersection(&other.atoms).cloned().collect(),
        }
    }

    pub fn union(&self, other: &AtomMask) -> AtomMask {
        AtomMask {
            n_atoms: self.n_atoms,
            atoms: self.atoms.union(&other.atoms).cloned().collect(),
        }
    }
}

/// The finitely generated Boolean algebra of sets over a domain.
#[derive(Debug)]
pub struct SetAlgebra {
    domain: DomainKind,
    names: Vec<String>,
    kinds: Vec<GeneratorKind>,
    by_name: BTreeMap<String, usize>,
    /// Symbolic shift action: (generator, shift) ↦ expression.
    shift_table: BTreeMap<(usize, i64), SetExpr>,
}

pub type SharedAlgebra = Rc<RefCell<SetAlgebra>>;

impl SetAlgebra {
    pub fn new(domain: DomainKind) -> SharedAlgebra {
        Rc::new(RefCell::new(Self {
            domain,
            names: Vec::new(),
            kinds: Vec::new(),
            by_name: BTreeMap::new(),
            shift_table: BTreeMap::new(),
        }))
    }

    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    pub fn n_generators(&self) -> usize {
        self.names.len()
    }

    pub fn n_atoms(&self) -> usize {
        1usize << self.names.len()
    }

    pub fn register_generator(&mut self, name: &str, kind: GeneratorKind) -> Result<usize, SetError> {
        if let Some(&i) = self.by_name.get(name) {
            return Ok(i);
        }
        // Structural dedup for integer generators so translated copies
        // of the same set never split atoms twice.
        if !matches!(kind, GeneratorKind::Symbolic) {
            if let Some(i) = self.kinds.iter().position(|k| *k == kind) {
                self.by_name.insert(name.to_string(), i);
                return Ok(i);
            }
        }
        if self.names.len() >= MAX_GENERATORS {
            return Err(SetError::TooManyGenerators);
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.by_name.insert(name.to_string(), i);
        Ok(i)
    }

    /// Registers a symbolic shift rule: the translate of `generator` by
    /// `shift` equals `image`.
    pub fn register_shift_rule(&mut self, generator: &str, shift: i64, image: SetExpr) -> Result<(), SetError> {
        let i = self
            .by_name
            .get(generator)
            .cloned()
            .ok_or_else(|| SetError::UnregisteredGenerator(generator.to_string()))?;
        self.shift_table.insert((i, shift), image);
        Ok(())
    }

    fn lookup(&self, name: &str) -> Result<usize, SetError> {
        self.by_name
            .get(name)
            .cloned()
            .ok_or_else(|| SetError::UnregisteredGenerator(name.to_string()))
    }

    /// Rewrites an expression into shift-free form, registering translated
    /// integer generators (and resolving finite-set literals) as needed.
    fn close_shifts(&mut self, e: &SetExpr, shift: i64) -> Result<SetExpr, SetError> {
        match e {
            SetExpr::Empty => Ok(SetExpr::Empty),
            SetExpr::Full => Ok(SetExpr::Full),
            SetExpr::Not(inner) => Ok(SetExpr::not(self.close_shifts(inner, shift)?)),
            SetExpr::And(a, b) => Ok(SetExpr::and(
                self.close_shifts(a, shift)?,
                self.close_shifts(b, shift)?,
            )),
            SetExpr::Or(a, b) => Ok(SetExpr::or(
                self.close_shifts(a, shift)?,
                self.close_shifts(b, shift)?,
            )),
            SetExpr::Shift(k, inner) => self.close_shifts(inner, shift + k),
            SetExpr::Gen(name) => {
                // Finite-set literals self-describe their contents.
                let idx = match self.by_name.get(name) {
                    Some(&i) => i,
                    None if name.starts_with('{') && self.domain == DomainKind::Integers => {
                        let inner = name.trim_start_matches('{').trim_end_matches('}');
                        let elems: BTreeSet<i64> = if inner.is_empty() {
                            BTreeSet::new()
                        } else {
                            inner
                                .split(',')
                                .map(|s| s.trim().parse().map_err(|_| SetError::Parse(name.clone())))
                                .collect::<Result<_, _>>()?
                        };
                        self.register_generator(name, GeneratorKind::Finite(elems))?
                    }
                    None => return Err(SetError::UnregisteredGenerator(name.clone())),
                };
                if shift == 0 {
                    return Ok(SetExpr::Gen(self.names[idx].clone()));
                }
                match self.domain {
                    DomainKind::Integers => {
                        let translated = self.kinds[idx].translate(shift);
                        let new_name = format!("{}+{}", self.names[idx], shift);
                        let j = self.register_generator(&new_name, translated)?;
                        Ok(SetExpr::Gen(self.names[j].clone()))
                    }
                    DomainKind::SymbolicKappa => {
                        let image = self
                            .shift_table
                            .get(&(idx, shift))
                            .cloned()
                            .ok_or_else(|| SetError::UnregisteredShift(name.clone(), shift))?;
                        // The rule's image may itself contain shifts.
                        self.close_shifts(&image, 0)
                    }
                }
            }
        }
    }

    /// Canonical form: the disjunction of atoms of the generated algebra.
    pub fn normalize(&mut self, e: &SetExpr) -> Result<AtomMask, SetError> {
        let flat = self.close_shifts(e, 0)?;
        let n = self.n_atoms();
        Ok(self.eval_mask(&flat, n))
    }

    fn eval_mask(&self, e: &SetExpr, n_atoms: usize) -> AtomMask {
        match e {
            SetExpr::Empty => AtomMask { n_atoms, atoms: BTreeSet::new() },
            SetExpr::Full => AtomMask { n_atoms, atoms: (0..n_atoms as u32).collect() },
            SetExpr::Gen(name) => {
                let i = self.lookup(name).expect("closed expression");
                AtomMask {
                    n_atoms,
                    atoms: (0..n_atoms as u32).filter(|a| a >> i & 1 == 1).collect(),
                }
            }
            SetExpr::Not(inner) => self.eval_mask(inner, n_atoms).complement(),
            SetExpr::And(a, b) => self.eval_mask(a, n_atoms).intersect(&self.eval_mask(b, n_atoms)),
            SetExpr::Or(a, b) => self.eval_mask(a, n_atoms).union(&self.eval_mask(b, n_atoms)),
            SetExpr::Shift(..) => unreachable!("shifts are closed before evaluation"),
        }
    }

    /// The expression form of a mask (used for idempotence checks and logs).
    pub fn mask_to_expr(&self, mask: &AtomMask) -> SetExpr {
        let mut out = SetExpr::Empty;
        for &a in &mask.atoms {
            let mut atom_expr = SetExpr::Full;
            for i in 0..self.names.len() {
                let g = SetExpr::gen(&self.names[i]);
                let lit = if a >> i & 1 == 1 { g } else { SetExpr::not(g) };
                atom_expr = SetExpr::and(atom_expr, lit);
            }
            out = SetExpr::or(out, atom_expr);
        }
        out
    }

    /// What the atom with the given sign pattern contains.
    pub fn atom_info(&self, atom: u32) -> AtomInfo {
        match self.domain {
            DomainKind::SymbolicKappa => AtomInfo::Infinite,
            DomainKind::Integers => {
                // A positive finite constraint pins the atom inside a finite set.
                for i in 0..self.kinds.len() {
                    if atom >> i & 1 == 1 {
                        if let GeneratorKind::Finite(s) = &self.kinds[i] {
                            let pts: BTreeSet<i64> = s
                                .iter()
                                .cloned()
                                .filter(|&x| self.atom_contains(atom, x))
                                .collect();
                            return if pts.is_empty() { AtomInfo::Empty } else { AtomInfo::Finite(pts) };
                        }
                    }
                }
                // Otherwise the atom is an intersection of residue classes,
                // their complements, and cofinite sets: take the lcm of the
                // moduli and see which residues survive.
                let mut modulus: i64 = 1;
                for k in &self.kinds {
                    if let GeneratorKind::Residue { modulus: m, .. } = k {
                        modulus = lcm(modulus, *m);
                    }
                }
                let residue_ok = |r: i64| {
                    (0..self.kinds.len()).all(|i| match &self.kinds[i] {
                        GeneratorKind::Residue { modulus: m, residues } => {
                            let inside = residues.contains(&(r.rem_euclid(*m)));
                            inside == (atom >> i & 1 == 1)
                        }
                        _ => true,
                    })
                };
                let survivors = (0..modulus).filter(|&r| residue_ok(r)).count();
                if survivors == 0 {
                    // Negative finite constraints only remove points, so the
                    // residue part being empty decides it; check no positive
                    // finite constraint pattern allows points (handled above).
                    AtomInfo::Empty
                } else {
                    AtomInfo::Infinite
                }
            }
        }
    }

    /// Point membership of x in the atom with the given sign pattern.
    pub fn atom_contains(&self, atom: u32, x: i64) -> bool {
        (0..self.kinds.len()).all(|i| self.kinds[i].contains(x) == (atom >> i & 1 == 1))
    }

    /// The atom containing the integer x.
    pub fn atom_of_point(&self, x: i64) -> u32 {
        let mut a = 0u32;
        for i in 0..self.kinds.len() {
            if self.kinds[i].contains(x) {
                a |= 1 << i;
            }
        }
        a
    }

    /// Point membership for a normalized set (Integers domain).
    pub fn mask_contains(&self, mask: &AtomMask, x: i64) -> bool {
        mask.atoms.contains(&self.atom_of_point(x))
    }

    /// Atoms that actually contain points.
    pub fn nonempty_atoms(&self) -> BTreeSet<u32> {
        (0..self.n_atoms() as u32)
            .filter(|&a| self.atom_info(a) != AtomInfo::Empty)
            .collect()
    }

    fn infinite_atoms(&self) -> BTreeSet<u32> {
        (0..self.n_atoms() as u32)
            .filter(|&a| self.atom_info(a) == AtomInfo::Infinite)
            .collect()
    }

    /// Checks that the masks are pairwise disjoint and cover the domain
    /// (both modulo empty atoms).
    pub fn validate_partition(&self, masks: &[AtomMask]) -> Result<(), SetError> {
        let nonempty = self.nonempty_atoms();
        let mut seen: BTreeSet<u32> = BTreeSet::new();
        for (i, m) in masks.iter().enumerate() {
            for &a in &m.atoms {
                if !nonempty.contains(&a) {
                    continue;
                }
                if !seen.insert(a) {
                    return Err(SetError::NotAPartition(format!("cell {i} overlaps an earlier cell")));
                }
            }
        }
        if seen != nonempty {
            return Err(SetError::NotAPartition("cells do not cover the domain".into()));
        }
        Ok(())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// The completeness level of an ultrafilter oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Concentrated at an integer point.
    Principal(i64),
    /// Free: contains every cofinite set, no finite set; unforced decisions
    /// must be pre-registered.
    FreeSymbolic,
    /// Additionally honors registered countable partitions with a declared
    /// selected cell.
    SigmaCompleteSymbolic,
}

/// A countable partition of the domain, usable as a σ-additivity probe.
#[derive(Debug, Clone)]
pub enum CountablePartition {
    /// The partition of ℤ into singletons.
    Singletons,
    /// A finite list of cells covering the domain.
    Cells(Vec<SetExpr>),
}

#[derive(Debug)]
struct OracleCore {
    kind: OracleKind,
    algebra: SharedAlgebra,
    gens_seen: usize,
    /// Atoms still eligible to be the oracle's selected atom. A set is
    /// decided in iff it contains all candidates, out iff it misses all.
    candidates: BTreeSet<u32>,
    log: Vec<(String, bool)>,
    partitions: Vec<(CountablePartition, Option<usize>)>,
}

impl OracleCore {
    /// Refines the candidate set after the algebra gained generators.
    fn sync(&mut self) {
        let alg = self.algebra.borrow();
        let n_now = alg.n_generators();
        if n_now == self.gens_seen {
            return;
        }
        match self.kind {
            OracleKind::Principal(p) => {
                self.candidates = BTreeSet::from([alg.atom_of_point(p)]);
            }
            OracleKind::FreeSymbolic | OracleKind::SigmaCompleteSymbolic => {
                let extra = n_now - self.gens_seen;
                let mut next = BTreeSet::new();
                for &old in &self.candidates {
                    for high in 0..(1u32 << extra) {
                        let child = old | high << self.gens_seen;
                        if alg.atom_info(child) == AtomInfo::Infinite {
                            next.insert(child);
                        }
                    }
                }
                self.candidates = next;
            }
        }
        self.gens_seen = n_now;
    }

    fn decide_mask(&mut self, mask: &AtomMask, origin: &str) -> Result<bool, SetError> {
        self.sync();
        if let OracleKind::Principal(p) = self.kind {
            let alg = self.algebra.borrow();
            return Ok(alg.mask_contains(mask, p));
        }
        if self.candidates.is_subset(mask.atoms()) {
            return Ok(true);
        }
        if self.candidates.is_disjoint(mask.atoms()) {
            return Ok(false);
        }
        Err(SetError::UndecidableInFreeRule(origin.to_string()))
    }

    fn register_mask(&mut self, mask: &AtomMask, decision: bool, origin: &str) -> Result<(), SetError> {
        self.sync();
        if let OracleKind::Principal(p) = self.kind {
            let actual = self.algebra.borrow().mask_contains(mask, p);
            if actual != decision {
                return Err(SetError::InconsistentOracle(format!(
                    "principal point contradicts registration of `{origin}`"
                )));
            }
            return Ok(());
        }
        let narrowed: BTreeSet<u32> = if decision {
            self.candidates.intersection(mask.atoms()).cloned().collect()
        } else {
            self.candidates.difference(mask.atoms()).cloned().collect()
        };
        if narrowed.is_empty() {
            return Err(SetError::InconsistentOracle(format!(
                "registering `{origin}` as {} leaves no consistent atom",
                if decision { "in" } else { "out" }
            )));
        }
        self.candidates = narrowed;
        self.log.push((origin.to_string(), decision));
        Ok(())
    }
}

/// A decision procedure for set membership in an ultrafilter, possibly
/// composed with a shift of the domain: `decide(X)` of a handle with offset
/// k answers whether X + k belongs to the underlying ultrafilter.
#[derive(Debug, Clone)]
pub struct UltrafilterOracle {
    core: Rc<RefCell<OracleCore>>,
    offset: i64,
}

impl UltrafilterOracle {
    pub fn new(algebra: SharedAlgebra, kind: OracleKind) -> Self {
        let candidates = match kind {
            OracleKind::Principal(p) => BTreeSet::from([algebra.borrow().atom_of_point(p)]),
            _ => algebra.borrow().infinite_atoms(),
        };
        let gens_seen = algebra.borrow().n_generators();
        Self {
            core: Rc::new(RefCell::new(OracleCore {
                kind,
                algebra,
                gens_seen,
                candidates,
                log: Vec::new(),
                partitions: Vec::new(),
            })),
            offset: 0,
        }
    }

    pub fn kind(&self) -> OracleKind {
        self.core.borrow().kind
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn algebra(&self) -> SharedAlgebra {
        self.core.borrow().algebra.clone()
    }

    /// True iff both handles answer through the same underlying decision log.
    pub fn same_core(&self, other: &UltrafilterOracle) -> bool {
        Rc::ptr_eq(&self.core, &other.core)
    }

    fn effective(&self, e: &SetExpr) -> SetExpr {
        if self.offset == 0 { e.clone() } else { SetExpr::shift(self.offset, e.clone()) }
    }

    /// Membership of the set in the ultrafilter.
    pub fn decide(&self, e: &SetExpr) -> Result<bool, SetError> {
        let eff = self.effective(e);
        let mask = {
            let algebra = self.algebra();
            let mut alg = algebra.borrow_mut();
            alg.normalize(&eff)?
        };
        self.core.borrow_mut().decide_mask(&mask, &eff.to_string())
    }

    /// Pre-registers an unforced decision, narrowing the oracle.
    pub fn register_decision(&self, e: &SetExpr, decision: bool) -> Result<(), SetError> {
        let eff = self.effective(e);
        let mask = {
            let algebra = self.algebra();
            let mut alg = algebra.borrow_mut();
            alg.normalize(&eff)?
        };
        self.core.borrow_mut().register_mask(&mask, decision, &eff.to_string())
    }

    /// The pushforward along the shift by k: decide'(X) = decide(X + k).
    pub fn shift_pushforward(&self, k: i64) -> UltrafilterOracle {
        UltrafilterOracle { core: self.core.clone(), offset: self.offset + k }
    }

    /// Registers a countable partition with its selected cell (σ-complete
    /// oracles only honor one cell as in; every other cell becomes out).
    pub fn register_countable_partition(
        &self,
        partition: &CountablePartition,
        selected: Option<usize>,
    ) -> Result<(), SetError> {
        match partition {
            CountablePartition::Singletons => {
                // All cells are finite, hence out of any non-principal
                // oracle: no cell may be selected.
                match self.kind() {
                    OracleKind::Principal(_) => {
                        self.core
                            .borrow_mut()
                            .partitions
                            .push((partition.clone(), selected));
                        Ok(())
                    }
                    _ => Err(SetError::InconsistentOracle(
                        "every singleton cell is out of a non-principal oracle; no cell may be selected"
                            .into(),
                    )),
                }
            }
            CountablePartition::Cells(cells) => {
                let sel = selected.ok_or(SetError::MultipleSelected)?;
                if sel >= cells.len() {
                    return Err(SetError::MultipleSelected);
                }
                let masks = {
                    let algebra = self.algebra();
                    let mut alg = algebra.borrow_mut();
                    let masks: Vec<AtomMask> = cells
                        .iter()
                        .map(|c| alg.normalize(&self.effective(c)))
                        .collect::<Result<_, _>>()?;
                    alg.validate_partition(&masks)?;
                    masks
                };
                let mut core = self.core.borrow_mut();
                core.register_mask(&masks[sel], true, &format!("partition cell {sel}"))?;
                core.partitions.push((partition.clone(), Some(sel)));
                Ok(())
            }
        }
    }

    pub fn registered_partitions(&self) -> Vec<(CountablePartition, Option<usize>)> {
        self.core.borrow().partitions.clone()
    }

    pub fn decision_log(&self) -> Vec<(String, bool)> {
        self.core.borrow().log.clone()
    }
}

/// The {0,1}-valued measure of an ultrafilter oracle.
#[derive(Debug, Clone)]
pub struct TwoValuedMeasure {
    pub oracle: UltrafilterOracle,
}

impl TwoValuedMeasure {
    pub fn new(oracle: UltrafilterOracle) -> Self {
        Self { oracle }
    }

    pub fn measure_of(&self, e: &SetExpr) -> Result<f64, SetError> {
        Ok(if self.oracle.decide(e)? { 1.0 } else { 0.0 })
    }
}

/// A function taking finitely many values, constant on each cell of a
/// partition of the domain.
#[derive(Debug, Clone)]
pub struct StepFunction {
    pub cells: Vec<SetExpr>,
    pub values: Vec<Complex64>,
}

impl StepFunction {
    pub fn new(cells: Vec<SetExpr>, values: Vec<Complex64>) -> Self {
        assert_eq!(cells.len(), values.len());
        Self { cells, values }
    }

    pub fn constant(value: Complex64) -> Self {
        Self { cells: vec![SetExpr::Full], values: vec![value] }
    }

    pub fn validate(&self, algebra: &SharedAlgebra) -> Result<(), SetError> {
        let mut alg = algebra.borrow_mut();
        let masks: Vec<AtomMask> = self
            .cells
            .iter()
            .map(|c| alg.normalize(c))
            .collect::<Result<_, _>>()?;
        alg.validate_partition(&masks)
    }

    /// Pointwise value at an integer (Integers domain only).
    pub fn value_at(&self, algebra: &SharedAlgebra, x: i64) -> Result<Complex64, SetError> {
        let mut alg = algebra.borrow_mut();
        for (cell, v) in self.cells.iter().zip(&self.values) {
            let mask = alg.normalize(cell)?;
            if alg.mask_contains(&mask, x) {
                return Ok(*v);
            }
        }
        Err(SetError::NotAPartition(format!("no cell contains {x}")))
    }
}

/// lim_{j→𝒰} f(j): the value of the unique cell the oracle decides in.
pub fn ultralimit(oracle: &UltrafilterOracle, f: &StepFunction) -> Result<Complex64, SetError> {
    let mut chosen: Option<usize> = None;
    for (i, cell) in f.cells.iter().enumerate() {
        if oracle.decide(cell)? {
            if chosen.is_some() {
                return Err(SetError::InconsistentOracle(
                    "two partition cells decided in".into(),
                ));
            }
            chosen = Some(i);
        }
    }
    match chosen {
        Some(i) => Ok(f.values[i]),
        None => Err(SetError::InconsistentOracle("no partition cell decided in".into())),
    }
}

/// ∫ f dμ for a two-valued μ: the weighted sum over cells, each weighted by
/// its 0/1 measure. Must coincide with the ultralimit along 𝒰_μ.
pub fn integrate_two_valued(mu: &TwoValuedMeasure, f: &StepFunction) -> Result<Complex64, SetError> {
    let mut total = Complex64::new(0.0, 0.0);
    for (cell, v) in f.cells.iter().zip(&f.values) {
        total += v * mu.measure_of(cell)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn int_algebra_with_evens() -> SharedAlgebra {
        let alg = SetAlgebra::new(DomainKind::Integers);
        alg.borrow_mut()
            .register_generator(
                "evens",
                GeneratorKind::Residue { modulus: 2, residues: BTreeSet::from([0]) },
            )
            .unwrap();
        alg
    }

    #[test]
    fn principal_decides_by_membership() {
        let alg = int_algebra_with_evens();
        let oracle = UltrafilterOracle::new(alg, OracleKind::Principal(5));
        assert!(!oracle.decide(&SetExpr::gen("evens")).unwrap());
        assert!(oracle.decide(&SetExpr::not(SetExpr::gen("evens"))).unwrap());
    }

    #[test]
    fn free_oracle_cofinite_rule() {
        let alg = SetAlgebra::new(DomainKind::Integers);
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        let first_ten = SetExpr::finite(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]);
        assert!(oracle.decide(&SetExpr::not(first_ten.clone())).unwrap());
        assert!(!oracle.decide(&first_ten).unwrap());
    }

    #[test]
    fn free_oracle_forced_complement_on_blocks() {
        // Even/odd residue blocks on ℤ: deciding the evens in forces the
        // translate (the odds) out.
        let alg = int_algebra_with_evens();
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        let x = SetExpr::gen("evens");
        oracle.register_decision(&x, true).unwrap();
        assert!(oracle.decide(&x).unwrap());
        assert!(!oracle.decide(&SetExpr::shift(1, x.clone())).unwrap());
    }

    #[test]
    fn undecidable_without_registration() {
        let alg = int_algebra_with_evens();
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        assert!(matches!(
            oracle.decide(&SetExpr::gen("evens")),
            Err(SetError::UndecidableInFreeRule(_))
        ));
    }

    #[test]
    fn inconsistent_registration_rejected() {
        let alg = int_algebra_with_evens();
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        let x = SetExpr::gen("evens");
        oracle.register_decision(&x, true).unwrap();
        assert!(matches!(
            oracle.register_decision(&SetExpr::not(x), true),
            Err(SetError::InconsistentOracle(_))
        ));
    }

    #[test]
    fn normalize_examples() {
        let alg = int_algebra_with_evens();
        let mut a = alg.borrow_mut();
        let x = SetExpr::gen("evens");
        let full = a.normalize(&SetExpr::or(x.clone(), SetExpr::not(x.clone()))).unwrap();
        assert_eq!(full, a.normalize(&SetExpr::Full).unwrap());

        // X ∩ (X+1) is empty for the mod-2 block set.
        let meet = a.normalize(&SetExpr::and(x.clone(), SetExpr::shift(1, x.clone()))).unwrap();
        let nonempty = a.nonempty_atoms();
        assert!(meet.atoms().iter().all(|at| !nonempty.contains(at)));

        // Idempotence through the expression form of the mask.
        let e = SetExpr::or(SetExpr::not(x.clone()), SetExpr::shift(2, x));
        let m1 = a.normalize(&e).unwrap();
        let back = a.mask_to_expr(&m1);
        let m2 = a.normalize(&back).unwrap();
        assert_eq!(m1, m2);
    }

    #[test]
    fn de_morgan_agrees_with_pointwise_membership() {
        let alg = SetAlgebra::new(DomainKind::Integers);
        {
            let mut a = alg.borrow_mut();
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
            a.register_generator("small", GeneratorKind::Finite(BTreeSet::from([0, 1, 2, 5])))
                .unwrap();
        }
        let x = SetExpr::gen("evens");
        let y = SetExpr::gen("mod3");
        let z = SetExpr::gen("small");
        let lhs = SetExpr::not(SetExpr::and(x.clone(), SetExpr::or(y.clone(), z.clone())));
        let rhs = SetExpr::or(
            SetExpr::not(x.clone()),
            SetExpr::and(SetExpr::not(y.clone()), SetExpr::not(z.clone())),
        );
        let mut a = alg.borrow_mut();
        let ml = a.normalize(&lhs).unwrap();
        let mr = a.normalize(&rhs).unwrap();
        assert_eq!(ml, mr);
        // Sampled points agree with a direct membership oracle.
        for p in -500..500i64 {
            let direct = !( (p.rem_euclid(2)==0) && ((p.rem_euclid(3)==0) || [0,1,2,5].contains(&p)) );
            assert_eq!(a.mask_contains(&ml, p), direct, "point {p}");
        }
    }

    #[test]
    fn ultralimit_examples() {
        let alg = SetAlgebra::new(DomainKind::Integers);
        let small = SetExpr::finite(&[0, 1, 2]);
        let f = StepFunction::new(
            vec![SetExpr::not(small.clone()), small.clone()],
            vec![c(3.0), c(7.0)],
        );
        let free = UltrafilterOracle::new(alg.clone(), OracleKind::FreeSymbolic);
        assert_eq!(ultralimit(&free, &f).unwrap(), c(3.0));

        let principal = UltrafilterOracle::new(alg.clone(), OracleKind::Principal(1));
        assert_eq!(ultralimit(&principal, &f).unwrap(), c(7.0));

        let g = StepFunction::constant(c(4.25));
        assert_eq!(ultralimit(&free, &g).unwrap(), c(4.25));
        assert_eq!(ultralimit(&principal, &g).unwrap(), c(4.25));
    }

    #[test]
    fn integral_equals_ultralimit() {
        let alg = SetAlgebra::new(DomainKind::Integers);
        let small = SetExpr::finite(&[10, 20]);
        let f = StepFunction::new(
            vec![SetExpr::not(small.clone()), small],
            vec![c(-1.5), c(9.0)],
        );
        for oracle in [
            UltrafilterOracle::new(alg.clone(), OracleKind::FreeSymbolic),
            UltrafilterOracle::new(alg.clone(), OracleKind::Principal(20)),
        ] {
            let mu = TwoValuedMeasure::new(oracle.clone());
            let lhs = ultralimit(&oracle, &f).unwrap();
            let rhs = integrate_two_valued(&mu, &f).unwrap();
            assert_eq!(lhs, rhs); // exact, not approximate
        }
    }

    #[test]
    fn pushforward_conventions() {
        let alg = int_algebra_with_evens();
        // Principal(n) pushed by k behaves as Principal(n−k).
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::Principal(4));
        let pushed = oracle.shift_pushforward(1); // acts like Principal(3)
        assert!(!pushed.decide(&SetExpr::gen("evens")).unwrap());
        let direct = UltrafilterOracle::new(alg.clone(), OracleKind::Principal(3));
        assert_eq!(
            pushed.decide(&SetExpr::gen("evens")).unwrap(),
            direct.decide(&SetExpr::gen("evens")).unwrap()
        );

        // Identity shift changes nothing; k then −k round-trips.
        let free = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        free.register_decision(&SetExpr::gen("evens"), true).unwrap();
        let same = free.shift_pushforward(0);
        assert!(same.decide(&SetExpr::gen("evens")).unwrap());
        let round = free.shift_pushforward(3).shift_pushforward(-3);
        assert!(round.decide(&SetExpr::gen("evens")).unwrap());

        // Even/odd blocks: pushing by 1 flips the decision.
        let flipped = free.shift_pushforward(1);
        assert!(!flipped.decide(&SetExpr::gen("evens")).unwrap());
    }

    #[test]
    fn symbolic_shift_table() {
        // Single generator X with X+1 = complement(X), X−1 = complement(X):
        // the structure of interleaved blocks of an uncountable line.
        let alg = SetAlgebra::new(DomainKind::SymbolicKappa);
        {
            let mut a = alg.borrow_mut();
            a.register_generator("X", GeneratorKind::Symbolic).unwrap();
            a.register_shift_rule("X", 1, SetExpr::not(SetExpr::gen("X"))).unwrap();
            a.register_shift_rule("X", -1, SetExpr::not(SetExpr::gen("X"))).unwrap();
        }
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::SigmaCompleteSymbolic);
        oracle.register_decision(&SetExpr::gen("X"), true).unwrap();
        assert!(oracle.decide(&SetExpr::gen("X")).unwrap());
        assert!(!oracle.decide(&SetExpr::shift(1, SetExpr::gen("X"))).unwrap());
        let shifted = oracle.shift_pushforward(-1);
        assert!(!shifted.decide(&SetExpr::gen("X")).unwrap());

        // Unregistered shift amount errors.
        assert!(matches!(
            oracle.decide(&SetExpr::shift(2, SetExpr::gen("X"))),
            Err(SetError::UnregisteredShift(..))
        ));
    }

    #[test]
    fn countable_partition_registration() {
        // {X, ¬X} with X already in: selecting ¬X is inconsistent.
        let alg = SetAlgebra::new(DomainKind::SymbolicKappa);
        alg.borrow_mut().register_generator("X", GeneratorKind::Symbolic).unwrap();
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::SigmaCompleteSymbolic);
        oracle.register_decision(&SetExpr::gen("X"), true).unwrap();
        let part = CountablePartition::Cells(vec![
            SetExpr::gen("X"),
            SetExpr::not(SetExpr::gen("X")),
        ]);
        assert!(oracle.register_countable_partition(&part, Some(1)).is_err());
        oracle.register_countable_partition(&part, Some(0)).unwrap();
        assert_eq!(oracle.registered_partitions().len(), 1);

        // Singleton partition of ℤ under a free oracle: rejected.
        let zalg = SetAlgebra::new(DomainKind::Integers);
        let free = UltrafilterOracle::new(zalg, OracleKind::FreeSymbolic);
        assert!(matches!(
            free.register_countable_partition(&CountablePartition::Singletons, Some(0)),
            Err(SetError::InconsistentOracle(_))
        ));

        // Fresh 3-cell symbolic partition: select cell 2, later queries agree.
        let kalg = SetAlgebra::new(DomainKind::SymbolicKappa);
        {
            let mut a = kalg.borrow_mut();
            a.register_generator("A", GeneratorKind::Symbolic).unwrap();
            a.register_generator("B", GeneratorKind::Symbolic).unwrap();
        }
        let a = SetExpr::gen("A");
        let b = SetExpr::gen("B");
        let cells = vec![
            SetExpr::and(a.clone(), SetExpr::not(b.clone())),
            SetExpr::and(SetExpr::not(a.clone()), b.clone()),
            SetExpr::or(
                SetExpr::and(a.clone(), b.clone()),
                SetExpr::and(SetExpr::not(a.clone()), SetExpr::not(b.clone())),
            ),
        ];
        let sigma = UltrafilterOracle::new(kalg, OracleKind::SigmaCompleteSymbolic);
        sigma
            .register_countable_partition(&CountablePartition::Cells(cells.clone()), Some(2))
            .unwrap();
        assert!(!sigma.decide(&cells[0]).unwrap());
        assert!(!sigma.decide(&cells[1]).unwrap());
        assert!(sigma.decide(&cells[2]).unwrap());
    }

    #[test]
    fn complement_and_monotonicity() {
        let alg = int_algebra_with_evens();
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        let x = SetExpr::gen("evens");
        oracle.register_decision(&x, true).unwrap();
        // Complement flips.
        assert_eq!(
            oracle.decide(&x).unwrap(),
            !oracle.decide(&SetExpr::not(x.clone())).unwrap()
        );
        // Monotone: evens ⊆ evens ∪ {1} and the superset is in.
        let bigger = SetExpr::or(x.clone(), SetExpr::finite(&[1]));
        assert!(oracle.decide(&bigger).unwrap());
    }

    #[test]
    fn parser_round_trips() {
        let e = SetExpr::parse("!(evens & mod3) | {0,1,2} + 5").unwrap();
        match &e {
            SetExpr::Or(_, rhs) => assert!(matches!(**rhs, SetExpr::Shift(5, _))),
            other => panic!("unexpected parse {other:?}"),
        }
        assert_eq!(SetExpr::parse("empty").unwrap(), SetExpr::Empty);
        assert_eq!(SetExpr::parse("full").unwrap(), SetExpr::Full);
        assert!(SetExpr::parse("a &").is_err());
    }

    #[test]
    fn free_oracle_never_contains_finite_sets() {
        let alg = SetAlgebra::new(DomainKind::Integers);
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        for set in [
            SetExpr::finite(&[0]),
            SetExpr::finite(&[-3, 7, 100]),
            SetExpr::and(SetExpr::finite(&[1, 2]), SetExpr::Full),
        ] {
            assert!(!oracle.decide(&set).unwrap());
        }
    }
}
