//! Finite descriptions of which measure vectors admit models of a theory.
//!
//! A theory is compiled to a disjunction of shape clauses. Each clause
//! constrains the measure vector (per-sort cardinalities, fixed-point count
//! of `s`) through a small constraint language and imposes one structural
//! requirement on `s`. Membership, dominance queries and minimal elements
//! are all decided against this representation; comparisons that bottom out
//! in the undecided tail of the growth function come back `Unknown`.

use crate::formula::{Signature, SortId};
use crate::interp::Interp;
use crate::oracle::{GrowthOracle, MinImage, SigmaValue};
use crate::three::ThreeVal;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A cardinality: finite or countably infinite. Infinite cardinals are
/// collapsed to one top element; satisfiability never distinguishes them
/// here (downward Löwenheim–Skolem keeps everything countable).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Card {
    #[serde(rename = "fin")]
    Fin(u64),
    #[serde(rename = "inf")]
    Inf,
}

impl Card {
    pub fn fin(self) -> Option<u64> {
        match self {
            Card::Fin(n) => Some(n),
            Card::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        self == Card::Inf
    }

    pub fn ge(self, other: Card) -> bool {
        self >= other
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Card::Fin(n) => write!(f, "{n}"),
            Card::Inf => write!(f, "w"),
        }
    }
}

/// Measure of an interpretation: per-sort cardinalities plus, when `s` is
/// present, the number of fixed points and non-fixed points. For finite
/// measures `nonfp = card[0] - fp`; at infinite cardinalities the split is
/// genuine extra information.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct MeasureVector {
    pub card: Vec<Card>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fp: Option<Card>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nonfp: Option<Card>,
}

impl MeasureVector {
    pub fn cards_only(card: Vec<Card>) -> MeasureVector {
        MeasureVector { card, fp: None, nonfp: None }
    }

    pub fn with_fp(card: Vec<Card>, fp: Card, nonfp: Card) -> MeasureVector {
        MeasureVector { card, fp: Some(fp), nonfp: Some(nonfp) }
    }

    /// Pointwise dominance on all tracked dimensions.
    pub fn dominates(&self, other: &MeasureVector) -> bool {
        if self.card.len() != other.card.len() {
            return false;
        }
        let cards = self.card.iter().zip(&other.card).all(|(a, b)| a >= b);
        let fp_ok = match (self.fp, other.fp) {
            (Some(a), Some(b)) => a >= b,
            _ => true,
        };
        let nonfp_ok = match (self.nonfp, other.nonfp) {
            (Some(a), Some(b)) => a >= b,
            _ => true,
        };
        cards && fp_ok && nonfp_ok
    }

    pub fn all_finite(&self) -> bool {
        self.card.iter().all(|c| !c.is_inf())
    }

    pub fn all_infinite_cards(&self) -> bool {
        self.card.iter().all(|c| c.is_inf())
    }
}

impl fmt::Display for MeasureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.card.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        if let Some(fp) = self.fp {
            write!(f, "; fp={fp}")?;
        }
        write!(f, ")")
    }
}

/// Which measure a constraint talks about. Serialized by sort name
/// (`sigma`, `sigma2`, `sigma3`) or `fp`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MeasureSel {
    Card(SortId),
    Fp,
}

impl Serialize for MeasureSel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let name = match self {
            MeasureSel::Card(0) => "sigma",
            MeasureSel::Card(1) => "sigma2",
            MeasureSel::Card(2) => "sigma3",
            MeasureSel::Card(_) => return Err(serde::ser::Error::custom("sort out of range")),
            MeasureSel::Fp => "fp",
        };
        s.serialize_str(name)
    }
}

impl<'de> Deserialize<'de> for MeasureSel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "sigma" => Ok(MeasureSel::Card(0)),
            "sigma2" => Ok(MeasureSel::Card(1)),
            "sigma3" => Ok(MeasureSel::Card(2)),
            "fp" => Ok(MeasureSel::Fp),
            other => Err(serde::de::Error::custom(format!("unknown measure `{other}`"))),
        }
    }
}

impl fmt::Display for MeasureSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSel::Card(s) => write!(f, "card{s}"),
            MeasureSel::Fp => write!(f, "fp"),
        }
    }
}

/// The clause constraint language. `InSigmaImage`, `GeSigmaOf` and
/// `EqSigmaInv` consult the growth oracle; `BitCountOf` couples the
/// fixed-point count to a pluggable balanced bit function.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureConstraint {
    EqConst { measure: MeasureSel, n: u64 },
    GeConst { measure: MeasureSel, n: u64 },
    LeConst { measure: MeasureSel, n: u64 },
    Infinite { measure: MeasureSel },
    EqMeasure { measure: MeasureSel, other: MeasureSel },
    /// measure is sigma(k) for some k >= min_arg, or infinite
    InSigmaImage { measure: MeasureSel, min_arg: u64 },
    /// measure >= sigma(of)
    GeSigmaOf { measure: MeasureSel, of: MeasureSel },
    /// measure = sigma_inv(of)
    EqSigmaInv { measure: MeasureSel, of: MeasureSel },
    /// finite values must have this parity; infinite passes
    FiniteParity { measure: MeasureSel, odd: bool },
    /// measure = number of ones of the bit function below `of` (both
    /// infinite when `of` is infinite)
    BitCountOf { measure: MeasureSel, of: MeasureSel },
}

/// Structural requirement on `s` beyond what the fixed-point count records.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SMode {
    Any,
    IdentityEverywhere,
    FixpointFree,
    PsiVee,
    PsiVeeFree,
}

impl SMode {
    /// Exact structural check on a concrete interpretation.
    pub fn holds_structurally(self, a: &Interp) -> bool {
        match self {
            SMode::Any => true,
            SMode::IdentityEverywhere => a.count_non_fixed_points().unwrap_or(1) == 0,
            SMode::FixpointFree => a.count_fixed_points().unwrap_or(1) == 0,
            SMode::PsiVee => a.satisfies_psi_vee().unwrap_or(false),
            SMode::PsiVeeFree => {
                a.satisfies_psi_vee().unwrap_or(false) && a.count_fixed_points().unwrap_or(1) == 0
            }
        }
    }

    /// Can a map with the given measure satisfy this mode? Finite counts
    /// must sum to the cardinality (checked elsewhere); here only the
    /// mode-specific shape conditions.
    pub fn measure_feasible(self, c1: Card, fp: Card, nonfp: Card) -> bool {
        // a single element is always its own image
        let fp_free_possible = match (c1, fp) {
            (Card::Fin(1), Card::Fin(0)) => false,
            _ => true,
        };
        match self {
            SMode::Any => fp_free_possible || fp != Card::Fin(0),
            SMode::IdentityEverywhere => nonfp == Card::Fin(0),
            SMode::FixpointFree => fp == Card::Fin(0) && fp_free_possible,
            SMode::PsiVee => {
                // components are fixed points with direct children, or
                // detached 2-cycles
                match fp {
                    Card::Inf => true,
                    Card::Fin(n) if n >= 1 => true,
                    _ => match nonfp {
                        Card::Inf => true,
                        Card::Fin(m) => m % 2 == 0 && m != 0 || c1 == Card::Fin(0),
                    },
                }
            }
            SMode::PsiVeeFree => {
                fp == Card::Fin(0)
                    && match nonfp {
                        Card::Inf => true,
                        Card::Fin(m) => m % 2 == 0 && m != 0,
                    }
            }
        }
    }
}

impl fmt::Display for SMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SMode::Any => "any",
            SMode::IdentityEverywhere => "identity_everywhere",
            SMode::FixpointFree => "fixpoint_free",
            SMode::PsiVee => "psi_vee",
            SMode::PsiVeeFree => "psi_vee_free",
        };
        write!(f, "{s}")
    }
}

/// One disjunct of a compiled axiomatization.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ShapeClause {
    pub constraints: Vec<MeasureConstraint>,
    pub s_mode: SMode,
}

impl ShapeClause {
    pub fn new(constraints: Vec<MeasureConstraint>) -> ShapeClause {
        ShapeClause { constraints, s_mode: SMode::Any }
    }

    pub fn with_mode(constraints: Vec<MeasureConstraint>, s_mode: SMode) -> ShapeClause {
        ShapeClause { constraints, s_mode }
    }
}

/// A balanced 0/1 function on the positive integers standing in for the
/// non-computable bit function: in every dyadic block it maps exactly half
/// the numbers to 1, pseudo-randomly from a documented seed.
#[derive(Clone, Debug)]
pub struct BitFn {
    seed: u64,
    bits: Vec<bool>,
    prefix_ones: Vec<u64>,
}

impl PartialEq for BitFn {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.bits.len() == other.bits.len()
    }
}
impl Eq for BitFn {}

impl BitFn {
    pub fn balanced(seed: u64, len: usize) -> BitFn {
        let len = len.next_power_of_two().max(4);
        let mut bits = vec![false; len + 1]; // 1-indexed
        bits[1] = true;
        bits[2] = false;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lo = 2usize;
        while lo < len {
            let hi = lo * 2; // block (lo, hi]
            let mut idx: Vec<usize> = (lo + 1..=hi).collect();
            idx.shuffle(&mut rng);
            for (i, &p) in idx.iter().enumerate() {
                bits[p] = i < idx.len() / 2;
            }
            lo = hi;
        }
        let mut prefix_ones = vec![0u64; len + 1];
        for i in 1..=len {
            prefix_ones[i] = prefix_ones[i - 1] + bits[i] as u64;
        }
        BitFn { seed, bits, prefix_ones }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> u64 {
        (self.bits.len() - 1) as u64
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: u64) -> Option<bool> {
        self.bits.get(i as usize).copied()
    }

    /// f1(k): how many of 1..=k map to 1.
    pub fn ones_upto(&self, k: u64) -> Option<u64> {
        self.prefix_ones.get(k as usize).copied()
    }

    /// f0(k) = k - f1(k).
    pub fn zeros_upto(&self, k: u64) -> Option<u64> {
        self.ones_upto(k).map(|o| k - o)
    }

    /// Smallest k >= at_least with f1(k) >= ones and f0(k) >= zeros.
    pub fn first_reaching(&self, ones: u64, zeros: u64, at_least: u64) -> Option<u64> {
        (at_least.max(1)..=self.len())
            .find(|&k| self.prefix_ones[k as usize] >= ones && k - self.prefix_ones[k as usize] >= zeros)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SpectrumError {
    #[error("measure has {got} sorts, theory signature {sig} has {want}")]
    SignatureMismatch { sig: &'static str, got: usize, want: usize },
    #[error("mixed arities in minimal_elements input: {0} vs {1}")]
    MixedArity(usize, usize),
    #[error("invalid theory spec: {0}")]
    Invalid(String),
}

/// A theory as a signature plus a disjunction of shape clauses over a
/// pinned growth oracle.
#[derive(Clone, Debug)]
pub struct TheorySpec {
    pub name: String,
    pub sig: Signature,
    pub clauses: Vec<ShapeClause>,
    pub oracle: Arc<GrowthOracle>,
    pub bits: Option<Arc<BitFn>>,
}

impl TheorySpec {
    pub fn new(
        name: impl Into<String>,
        sig: Signature,
        clauses: Vec<ShapeClause>,
        oracle: Arc<GrowthOracle>,
    ) -> TheorySpec {
        assert!(!clauses.is_empty(), "theory needs at least one clause");
        TheorySpec { name: name.into(), sig, clauses, oracle, bits: None }
    }

    pub fn with_bits(mut self, bits: Arc<BitFn>) -> TheorySpec {
        self.bits = Some(bits);
        self
    }

    /// The theory of all structures over `sig`: a single unconstrained
    /// clause.
    pub fn all_structures(sig: Signature, oracle: Arc<GrowthOracle>) -> TheorySpec {
        TheorySpec::new(format!("T_any_{}", sig.name()), sig, vec![ShapeClause::new(vec![])], oracle)
    }

    /// Serializes to the published theory-spec JSON format.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("name".into(), self.name.clone().into());
        obj.insert("signature".into(), self.sig.name().into());
        obj.insert(
            "clauses".into(),
            serde_json::to_value(&self.clauses).expect("clauses serialize"),
        );
        obj.insert("oracle".into(), "default".into());
        if let Some(bits) = &self.bits {
            obj.insert(
                "bits".into(),
                serde_json::json!({ "seed": bits.seed(), "len": bits.len() }),
            );
        }
        obj.into()
    }

    /// Parses the published theory-spec JSON format against a growth
    /// oracle. Clauses are validated for internal consistency and sort
    /// range.
    pub fn from_json(src: &str, oracle: &Arc<GrowthOracle>) -> Result<TheorySpec, SpectrumError> {
        #[derive(Deserialize)]
        struct File {
            name: String,
            signature: String,
            clauses: Vec<ShapeClause>,
            #[serde(default)]
            bits: Option<BitsFile>,
        }
        #[derive(Deserialize)]
        struct BitsFile {
            seed: u64,
            len: u64,
        }
        let file: File =
            serde_json::from_str(src).map_err(|e| SpectrumError::Invalid(e.to_string()))?;
        let sig = crate::formula::Signature::by_name(&file.signature)
            .map_err(|e| SpectrumError::Invalid(e.to_string()))?;
        if file.clauses.is_empty() {
            return Err(SpectrumError::Invalid("theory needs at least one clause".into()));
        }
        let needs_bits = file.clauses.iter().any(|c| {
            c.constraints.iter().any(|x| matches!(x, MeasureConstraint::BitCountOf { .. }))
        });
        for clause in &file.clauses {
            if clause.s_mode != SMode::Any && !sig.has_s() {
                return Err(SpectrumError::Invalid(format!(
                    "s_mode {} needs an s-signature",
                    clause.s_mode
                )));
            }
            for c in &clause.constraints {
                let sels: Vec<MeasureSel> = match c {
                    MeasureConstraint::EqConst { measure, .. }
                    | MeasureConstraint::GeConst { measure, .. }
                    | MeasureConstraint::LeConst { measure, .. }
                    | MeasureConstraint::Infinite { measure }
                    | MeasureConstraint::InSigmaImage { measure, .. }
                    | MeasureConstraint::FiniteParity { measure, .. } => vec![*measure],
                    MeasureConstraint::EqMeasure { measure, other } => vec![*measure, *other],
                    MeasureConstraint::GeSigmaOf { measure, of }
                    | MeasureConstraint::EqSigmaInv { measure, of }
                    | MeasureConstraint::BitCountOf { measure, of } => vec![*measure, *of],
                };
                for sel in sels {
                    match sel {
                        MeasureSel::Card(i) if i >= sig.sort_count() => {
                            return Err(SpectrumError::Invalid(format!(
                                "sort index {i} outside {}",
                                sig.name()
                            )))
                        }
                        MeasureSel::Fp if !sig.has_s() => {
                            return Err(SpectrumError::Invalid(
                                "fp measure needs an s-signature".into(),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        let mut spec = TheorySpec::new(file.name, sig, file.clauses, Arc::clone(oracle));
        if let Some(b) = file.bits {
            spec = spec.with_bits(Arc::new(BitFn::balanced(b.seed, b.len as usize)));
        } else if needs_bits {
            spec = spec.with_bits(crate::catalog::default_bits());
        }
        Ok(spec)
    }

    fn check_measure(&self, m: &MeasureVector) -> Result<(), SpectrumError> {
        if m.card.len() != self.sig.sort_count() {
            return Err(SpectrumError::SignatureMismatch {
                sig: self.sig.name(),
                got: m.card.len(),
                want: self.sig.sort_count(),
            });
        }
        Ok(())
    }

    /// Do the clause's constraints hold of this measure? Structural `s`
    /// requirements are NOT included (callers either check them on a
    /// concrete interpretation or via `SMode::measure_feasible`).
    pub fn clause_admits(&self, clause: &ShapeClause, m: &MeasureVector) -> ThreeVal {
        let nonfp = m.nonfp.or_else(|| derive_nonfp(m));
        let sel = |s: MeasureSel| -> Card {
            match s {
                MeasureSel::Card(i) => m.card[i],
                MeasureSel::Fp => m.fp.expect("fp measure for s-signature"),
            }
        };
        let mut acc = ThreeVal::True;
        for c in &clause.constraints {
            let v = self.eval_constraint(c, &sel, nonfp);
            acc = acc.and(v);
            if acc.is_false() {
                return acc;
            }
        }
        acc
    }

    fn eval_constraint(
        &self,
        c: &MeasureConstraint,
        sel: &dyn Fn(MeasureSel) -> Card,
        nonfp: Option<Card>,
    ) -> ThreeVal {
        use MeasureConstraint::*;
        match c {
            EqConst { measure, n } => ThreeVal::from_bool(sel(*measure) == Card::Fin(*n)),
            GeConst { measure, n } => ThreeVal::from_bool(sel(*measure) >= Card::Fin(*n)),
            LeConst { measure, n } => ThreeVal::from_bool(sel(*measure) <= Card::Fin(*n)),
            Infinite { measure } => ThreeVal::from_bool(sel(*measure).is_inf()),
            EqMeasure { measure, other } => ThreeVal::from_bool(sel(*measure) == sel(*other)),
            InSigmaImage { measure, min_arg } => match sel(*measure) {
                Card::Inf => ThreeVal::True,
                Card::Fin(v) => self.oracle.in_image(v, *min_arg),
            },
            GeSigmaOf { measure, of } => match sel(*of) {
                Card::Inf => ThreeVal::from_bool(sel(*measure).is_inf()),
                Card::Fin(k) => match self.oracle.sigma(k) {
                    SigmaValue::Value(v) => ThreeVal::from_bool(sel(*measure) >= Card::Fin(v)),
                    SigmaValue::Unknown { lower_bound } => match sel(*measure) {
                        Card::Inf => ThreeVal::True,
                        Card::Fin(w) if w < lower_bound => ThreeVal::False,
                        Card::Fin(_) => ThreeVal::Unknown,
                    },
                },
            },
            EqSigmaInv { measure, of } => match sel(*of) {
                Card::Inf => ThreeVal::from_bool(sel(*measure).is_inf()),
                Card::Fin(k) => match self.oracle.sigma_inv(k) {
                    Some(v) => ThreeVal::from_bool(sel(*measure) == Card::Fin(v)),
                    None => match sel(*measure) {
                        Card::Inf => ThreeVal::False,
                        // sigma_inv is non-decreasing, so beyond the
                        // decidable range it is at least its last value
                        Card::Fin(w) if w < self.oracle.sigma_inv(self.oracle.max_decidable_inv()).unwrap_or(0) => {
                            ThreeVal::False
                        }
                        Card::Fin(_) => ThreeVal::Unknown,
                    },
                },
            },
            FiniteParity { measure, odd } => match sel(*measure) {
                Card::Inf => ThreeVal::True,
                Card::Fin(v) => ThreeVal::from_bool((v % 2 == 1) == *odd),
            },
            BitCountOf { measure, of } => {
                let bits = self.bits.as_ref().expect("bit function for BitCountOf");
                match sel(*of) {
                    Card::Inf => ThreeVal::from_bool(
                        sel(*measure).is_inf() && nonfp == Some(Card::Inf),
                    ),
                    Card::Fin(k) => match bits.ones_upto(k) {
                        Some(ones) => ThreeVal::from_bool(sel(*measure) == Card::Fin(ones)),
                        None => ThreeVal::Unknown,
                    },
                }
            }
        }
    }

    /// Is this measure realized by some model of the theory? When the
    /// measure omits the nonfp split, any completion counts.
    pub fn member(&self, m: &MeasureVector) -> Result<ThreeVal, SpectrumError> {
        self.check_measure(m)?;
        if self.sig.has_s() && m.fp.is_none() {
            return Err(SpectrumError::Invalid(
                "measure for an s-signature needs a fixed-point count".into(),
            ));
        }
        let completions = measure_completions(self.sig, m);
        let mut acc = ThreeVal::False;
        for mm in &completions {
            for clause in &self.clauses {
                let mode_ok = if self.sig.has_s() {
                    clause.s_mode.measure_feasible(
                        mm.card[0],
                        mm.fp.unwrap(),
                        mm.nonfp.unwrap(),
                    )
                } else {
                    true
                };
                if !mode_ok {
                    continue;
                }
                acc = acc.or(self.clause_admits(clause, mm));
                if acc.is_true() {
                    return Ok(acc);
                }
            }
        }
        Ok(acc)
    }
}

fn derive_nonfp(m: &MeasureVector) -> Option<Card> {
    match (m.card.first(), m.fp) {
        (Some(Card::Fin(c)), Some(Card::Fin(f))) if f <= *c => Some(Card::Fin(c - f)),
        _ => None,
    }
}

/// All coherent (fp, nonfp) completions of a measure: finite cardinality
/// splits exactly; an infinite first sort needs at least one infinite side.
fn measure_completions(sig: Signature, m: &MeasureVector) -> Vec<MeasureVector> {
    if !sig.has_s() {
        return vec![MeasureVector::cards_only(m.card.clone())];
    }
    let fp = m.fp.expect("fp measure");
    match (m.card[0], fp, m.nonfp) {
        (Card::Fin(c), Card::Fin(f), given) => {
            if f > c {
                return Vec::new();
            }
            let nonfp = Card::Fin(c - f);
            if let Some(g) = given {
                if g != nonfp {
                    return Vec::new();
                }
            }
            vec![MeasureVector::with_fp(m.card.clone(), fp, nonfp)]
        }
        (Card::Fin(_), Card::Inf, _) => Vec::new(),
        (Card::Inf, fp, Some(nonfp)) => {
            if fp != Card::Inf && nonfp != Card::Inf {
                return Vec::new();
            }
            vec![MeasureVector::with_fp(m.card.clone(), fp, nonfp)]
        }
        (Card::Inf, Card::Inf, None) => {
            // nonfp genuinely free: infinite, or any finite value. The
            // finite case is represented by 0 and 1 plus "many": constraint
            // evaluation only ever needs parity and zero-ness of nonfp.
            let mut out = Vec::new();
            for nf in [Card::Inf, Card::Fin(0), Card::Fin(1), Card::Fin(2), Card::Fin(3)] {
                out.push(MeasureVector::with_fp(m.card.clone(), Card::Inf, nf));
            }
            out
        }
        (Card::Inf, Card::Fin(f), None) => {
            vec![MeasureVector::with_fp(m.card.clone(), Card::Fin(f), Card::Inf)]
        }
    }
}

// ---------------------------------------------------------------------------
// Minimal elements
// ---------------------------------------------------------------------------

/// The minimal elements of a finite subset of N^k under pointwise order.
/// Every input tuple dominates some output tuple; outputs are pairwise
/// incomparable.
pub fn minimal_elements(points: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, SpectrumError> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let arity = points[0].len();
    for p in points {
        if p.len() != arity {
            return Err(SpectrumError::MixedArity(arity, p.len()));
        }
    }
    let mut sorted: Vec<&Vec<u64>> = points.iter().collect();
    sorted.sort_by_key(|p| (p.iter().sum::<u64>(), (*p).clone()));
    let mut kept: Vec<Vec<u64>> = Vec::new();
    'outer: for p in sorted {
        for q in &kept {
            if q.iter().zip(p.iter()).all(|(a, b)| a <= b) {
                continue 'outer;
            }
        }
        kept.push(p.clone());
    }
    kept.sort();
    kept.dedup();
    Ok(kept)
}

// ---------------------------------------------------------------------------
// Feasibility queries against a clause
// ---------------------------------------------------------------------------

/// Finiteness requirement on one query dimension.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum FinReq {
    #[default]
    Any,
    Fin,
    Inf,
}

/// Interval-style requirement on one measure dimension.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct DimQuery {
    pub lo: u64,
    pub hi: Option<u64>,
    pub fin: FinReq,
}

impl DimQuery {
    pub fn at_least(lo: u64) -> DimQuery {
        DimQuery { lo, hi: None, fin: FinReq::Any }
    }

    pub fn exactly(v: u64) -> DimQuery {
        DimQuery { lo: v, hi: Some(v), fin: FinReq::Fin }
    }

    pub fn infinite() -> DimQuery {
        DimQuery { lo: 0, hi: None, fin: FinReq::Inf }
    }

    pub fn finite_at_least(lo: u64) -> DimQuery {
        DimQuery { lo, hi: None, fin: FinReq::Fin }
    }

    fn admits_inf(&self) -> bool {
        self.hi.is_none() && self.fin != FinReq::Fin
    }

    fn admits_fin(&self) -> bool {
        self.fin != FinReq::Inf
    }
}

/// Lower-bound/pin query over a theory's measure space. `fp`/`nonfp` are
/// ignored for empty signatures.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Query {
    pub card: Vec<DimQuery>,
    pub fp: DimQuery,
    pub nonfp: DimQuery,
}

impl Query {
    pub fn tautology(sig: Signature) -> Query {
        Query {
            card: vec![DimQuery::default(); sig.sort_count()],
            fp: DimQuery::default(),
            nonfp: DimQuery::default(),
        }
    }

    /// The up-set query: some measure at least these lower bounds.
    pub fn dominating(card_lo: &[Card], fp_lo: Card, nonfp_lo: Card) -> Query {
        let dim = |c: Card| match c {
            Card::Fin(n) => DimQuery::at_least(n),
            Card::Inf => DimQuery::infinite(),
        };
        Query {
            card: card_lo.iter().map(|&c| dim(c)).collect(),
            fp: dim(fp_lo),
            nonfp: dim(nonfp_lo),
        }
    }
}

/// Symbolic stand-in for "an arbitrarily large finite value". Used when a
/// dimension has no finite upper bound: the growth function is total, so
/// such values exist even where the oracle cannot name them.
const LARGE: u64 = u64::MAX;

/// Probe span for explicit small candidates; clause constants and desk
/// queries stay far below this.
const SPAN: u64 = 24;

pub fn dominated_sat(t: &TheorySpec, q: &Query) -> Result<ThreeVal, SpectrumError> {
    if q.card.len() != t.sig.sort_count() {
        return Err(SpectrumError::SignatureMismatch {
            sig: t.sig.name(),
            got: q.card.len(),
            want: t.sig.sort_count(),
        });
    }
    let mut acc = ThreeVal::False;
    for clause in &t.clauses {
        acc = acc.or(solve_clause(t, clause, q));
        if acc.is_true() {
            break;
        }
    }
    Ok(acc)
}

/// Feasibility of one clause against a query (structural mode conditions
/// included as measure conditions).
pub fn dominated_sat_clause(t: &TheorySpec, clause: &ShapeClause, q: &Query) -> ThreeVal {
    solve_clause(t, clause, q)
}

/// Per-dimension working state while solving one clause.
#[derive(Clone, Debug)]
struct DimState {
    lo: u64,
    hi: Option<u64>, // finite upper bound
    inf_required: bool,
    fin_required: bool,
    parity: Option<bool>, // Some(odd)
    image_min_arg: Option<u64>,
    group: usize, // EqMeasure union id
}

impl DimState {
    fn from_query(q: &DimQuery, group: usize, min_lo: u64) -> DimState {
        DimState {
            lo: q.lo.max(min_lo),
            hi: q.hi,
            inf_required: q.fin == FinReq::Inf,
            fin_required: q.fin == FinReq::Fin,
            parity: None,
            image_min_arg: None,
            group,
        }
    }
}

/// Dimension ids inside the solver: cards 0..n, then fp, then nonfp.
fn solve_clause(t: &TheorySpec, clause: &ShapeClause, q: &Query) -> ThreeVal {
    // mode variants turn the structural requirement into measure conditions
    let variants: Vec<(DimQuery, DimQuery, bool)> = if t.sig.has_s() {
        mode_variants(clause.s_mode, q)
    } else {
        vec![(DimQuery::default(), DimQuery::default(), false)]
    };
    let mut acc = ThreeVal::False;
    for (fpq, nonfpq, nonfp_even) in variants {
        acc = acc.or(solve_clause_conj(t, clause, q, fpq, nonfpq, nonfp_even));
        if acc.is_true() {
            break;
        }
    }
    acc
}

/// Intersects the caller's fp/nonfp query with a mode variant.
fn mode_variants(mode: SMode, q: &Query) -> Vec<(DimQuery, DimQuery, bool)> {
    let meet = |a: DimQuery, b: DimQuery| -> Option<DimQuery> {
        let lo = a.lo.max(b.lo);
        let hi = match (a.hi, b.hi) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        };
        if let Some(h) = hi {
            if lo > h {
                return None;
            }
        }
        let fin = match (a.fin, b.fin) {
            (FinReq::Any, f) | (f, FinReq::Any) => f,
            (FinReq::Fin, FinReq::Fin) => FinReq::Fin,
            (FinReq::Inf, FinReq::Inf) => FinReq::Inf,
            _ => return None,
        };
        Some(DimQuery { lo, hi, fin })
    };
    let zero = DimQuery { lo: 0, hi: Some(0), fin: FinReq::Fin };
    let one_up = DimQuery::at_least(1);
    let mut out = Vec::new();
    match mode {
        SMode::Any => out.push(Some((q.fp, q.nonfp, false))),
        SMode::IdentityEverywhere => {
            out.push(meet(q.nonfp, zero).map(|nf| (q.fp, nf, false)));
        }
        SMode::FixpointFree => {
            out.push(meet(q.fp, zero).map(|f| (f, q.nonfp, false)));
        }
        SMode::PsiVee => {
            out.push(meet(q.fp, one_up).map(|f| (f, q.nonfp, false)));
            out.push(meet(q.fp, zero).map(|f| (f, q.nonfp, true)));
        }
        SMode::PsiVeeFree => {
            out.push(meet(q.fp, zero).map(|f| (f, q.nonfp, true)));
        }
    }
    out.into_iter().flatten().collect()
}

#[allow(clippy::too_many_arguments)]
fn solve_clause_conj(
    t: &TheorySpec,
    clause: &ShapeClause,
    q: &Query,
    fpq: DimQuery,
    nonfpq: DimQuery,
    nonfp_even: bool,
) -> ThreeVal {
    let n_sorts = t.sig.sort_count();
    let has_s = t.sig.has_s();
    let fp_dim = n_sorts;
    let nonfp_dim = n_sorts + 1;
    let n_dims = if has_s { n_sorts + 2 } else { n_sorts };

    let dim_of = |sel: MeasureSel| -> usize {
        match sel {
            MeasureSel::Card(i) => i,
            MeasureSel::Fp => fp_dim,
        }
    };

    // 1. initial states from the query
    let mut dims: Vec<DimState> = Vec::with_capacity(n_dims);
    for (i, dq) in q.card.iter().enumerate() {
        dims.push(DimState::from_query(dq, i, 1));
    }
    if has_s {
        dims.push(DimState::from_query(&fpq, fp_dim, 0));
        let mut nf = DimState::from_query(&nonfpq, nonfp_dim, 0);
        if nonfp_even {
            nf.parity = Some(false);
        }
        dims.push(nf);
    }

    // 2. interval constraints and union groups
    let mut couplings: Vec<&MeasureConstraint> = Vec::new();
    for c in &clause.constraints {
        use MeasureConstraint::*;
        match c {
            EqConst { measure, n } => {
                let d = &mut dims[dim_of(*measure)];
                d.lo = d.lo.max(*n);
                d.hi = Some(d.hi.map_or(*n, |h| h.min(*n)));
                d.fin_required = true;
            }
            GeConst { measure, n } => {
                let d = &mut dims[dim_of(*measure)];
                d.lo = d.lo.max(*n);
            }
            LeConst { measure, n } => {
                let d = &mut dims[dim_of(*measure)];
                d.hi = Some(d.hi.map_or(*n, |h| h.min(*n)));
                d.fin_required = true;
            }
            Infinite { measure } => {
                dims[dim_of(*measure)].inf_required = true;
            }
            FiniteParity { measure, odd } => {
                let d = &mut dims[dim_of(*measure)];
                match d.parity {
                    None => d.parity = Some(*odd),
                    Some(p) if p == *odd => {}
                    Some(_) => return ThreeVal::False,
                }
            }
            InSigmaImage { measure, min_arg } => {
                let d = &mut dims[dim_of(*measure)];
                d.image_min_arg = Some(d.image_min_arg.map_or(*min_arg, |m| m.max(*min_arg)));
            }
            EqMeasure { measure, other } => {
                let (a, b) = (dim_of(*measure), dim_of(*other));
                let ga = dims[a].group;
                let gb = dims[b].group;
                for d in dims.iter_mut() {
                    if d.group == gb {
                        d.group = ga;
                    }
                }
            }
            GeSigmaOf { .. } | EqSigmaInv { .. } | BitCountOf { .. } => couplings.push(c),
        }
    }

    // merge interval data within EqMeasure groups
    for g in 0..n_dims {
        let members: Vec<usize> = (0..n_dims).filter(|&i| dims[i].group == g).collect();
        if members.len() < 2 {
            continue;
        }
        let mut merged = dims[members[0]].clone();
        for &i in &members[1..] {
            let d = &dims[i];
            merged.lo = merged.lo.max(d.lo);
            merged.hi = match (merged.hi, d.hi) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            };
            merged.inf_required |= d.inf_required;
            merged.fin_required |= d.fin_required;
            match (merged.parity, d.parity) {
                (Some(p), Some(q2)) if p != q2 => return ThreeVal::False,
                (None, p) => merged.parity = p,
                _ => {}
            }
            merged.image_min_arg = match (merged.image_min_arg, d.image_min_arg) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, None) => x,
                (None, y) => y,
            };
        }
        for &i in &members {
            let group = dims[i].group;
            dims[i] = merged.clone();
            dims[i].group = group;
        }
    }

    for d in &dims {
        if d.inf_required && d.fin_required {
            return ThreeVal::False;
        }
        if d.inf_required && d.hi.is_some() {
            return ThreeVal::False;
        }
        if let Some(h) = d.hi {
            if d.lo > h {
                return ThreeVal::False;
            }
        }
    }

    // 3. enumerate finiteness patterns for the coupled dimensions
    if !has_s {
        return solve_free_dims(t, &dims, n_dims);
    }

    let mut acc = ThreeVal::False;
    // patterns: (c1, fp, nonfp) finiteness; other card dims are free
    for c1_inf in [false, true] {
        let c1 = &dims[0];
        if c1_inf && !(c1.hi.is_none() && !c1.fin_required) {
            continue;
        }
        if !c1_inf && c1.inf_required {
            continue;
        }
        let splits: &[(bool, bool)] =
            if c1_inf { &[(false, true), (true, false), (true, true)] } else { &[(false, false)] };
        for &(fp_inf, nonfp_inf) in splits {
            let fpd = &dims[fp_dim];
            let nfd = &dims[nonfp_dim];
            if fp_inf && (fpd.hi.is_some() || fpd.fin_required) {
                continue;
            }
            if !fp_inf && fpd.inf_required {
                continue;
            }
            if nonfp_inf && (nfd.hi.is_some() || nfd.fin_required) {
                continue;
            }
            if !nonfp_inf && nfd.inf_required {
                continue;
            }
            acc = acc.or(solve_s_pattern(t, &dims, &couplings, c1_inf, fp_inf, nonfp_inf));
            if acc.is_true() {
                return acc;
            }
        }
    }
    acc
}

/// Empty-signature case: dimensions are independent up to EqMeasure groups.
fn solve_free_dims(t: &TheorySpec, dims: &[DimState], n_dims: usize) -> ThreeVal {
    let mut seen = vec![false; n_dims];
    let mut acc = ThreeVal::True;
    for i in 0..n_dims {
        if seen[i] {
            continue;
        }
        for (j, s) in seen.iter_mut().enumerate() {
            if dims[j].group == dims[i].group {
                *s = true;
            }
        }
        acc = acc.and(dim_feasible(t, &dims[i]));
        if acc.is_false() {
            return acc;
        }
    }
    acc
}

/// Is some value admitted by this single dimension's state? Infinite counts
/// unless finiteness is required; finite values must fit the interval,
/// parity and image requirements.
fn dim_feasible(t: &TheorySpec, d: &DimState) -> ThreeVal {
    if d.inf_required {
        // infinity passes parity and image requirements
        return ThreeVal::True;
    }
    let fin = dim_min_value(t, d);
    match fin {
        DimMin::Value(_) => ThreeVal::True,
        DimMin::Infeasible => {
            if !d.fin_required && d.hi.is_none() {
                ThreeVal::True // satisfied by infinity
            } else {
                ThreeVal::False
            }
        }
        DimMin::Unknown => {
            if d.hi.is_none() {
                // the sigma image is unbounded, so a large enough finite
                // value exists even though the oracle cannot name it
                ThreeVal::True
            } else {
                ThreeVal::Unknown
            }
        }
    }
}

enum DimMin {
    Value(u64),
    Infeasible,
    Unknown,
}

/// Least finite value admitted by a dimension state, if it can be named.
fn dim_min_value(t: &TheorySpec, d: &DimState) -> DimMin {
    let mut lo = d.lo;
    if let Some(min_arg) = d.image_min_arg {
        match t.oracle.min_image_value_at_least(lo, min_arg) {
            MinImage::Known(v) => {
                if let Some(p) = d.parity {
                    // walk known image values until parity matches
                    let mut cur = v;
                    loop {
                        if (cur % 2 == 1) == p {
                            break;
                        }
                        match t.oracle.min_image_value_at_least(cur + 1, min_arg) {
                            MinImage::Known(next) => cur = next,
                            MinImage::UnknownBeyond { .. } => return DimMin::Unknown,
                        }
                    }
                    lo = cur;
                } else {
                    lo = v;
                }
            }
            MinImage::UnknownBeyond { .. } => return DimMin::Unknown,
        }
        match d.hi {
            Some(h) if lo > h => DimMin::Infeasible,
            _ => DimMin::Value(lo),
        }
    } else {
        if let Some(p) = d.parity {
            if (lo % 2 == 1) != p {
                lo += 1;
            }
        }
        match d.hi {
            Some(h) if lo > h => DimMin::Infeasible,
            _ => DimMin::Value(lo),
        }
    }
}

/// Solves one finiteness pattern of an s-signature clause: candidate values
/// for the first sort drive the fixed-point split and the growth couplings.
fn solve_s_pattern(
    t: &TheorySpec,
    dims: &[DimState],
    couplings: &[&MeasureConstraint],
    c1_inf: bool,
    fp_inf: bool,
    nonfp_inf: bool,
) -> ThreeVal {
    let n_sorts = t.sig.sort_count();
    let fp_dim = n_sorts;
    let nonfp_dim = n_sorts + 1;
    let c1d = &dims[0];
    let fpd = &dims[fp_dim];
    let nfd = &dims[nonfp_dim];

    // groups tying the first sort to another card dim (EqMeasure)
    let partner: Option<usize> = (1..n_sorts).find(|&i| dims[i].group == dims[0].group);

    if c1_inf {
        return solve_s_infinite_c1(t, dims, couplings, fp_inf, nonfp_inf, partner);
    }

    // finite c1: enumerate explicit candidates plus the symbolic tail
    let mut candidates: Vec<u64> = Vec::new();
    let lo = c1d.lo.max(1);
    let hi_window = match c1d.hi {
        Some(h) => h.min(lo + SPAN),
        None => lo + SPAN,
    };
    for v in lo..=hi_window {
        candidates.push(v);
    }
    if c1d.image_min_arg.is_some() {
        // image values are sparse; add the known ones directly
        let mut start = lo;
        while let MinImage::Known(v) =
            t.oracle.min_image_value_at_least(start, c1d.image_min_arg.unwrap())
        {
            if let Some(h) = c1d.hi {
                if v > h {
                    break;
                }
            }
            candidates.push(v);
            start = v + 1;
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut unknown_seen = false;
    for &c1 in &candidates {
        match try_c1_value(t, dims, couplings, c1, partner) {
            ThreeVal::True => return ThreeVal::True,
            ThreeVal::Unknown => unknown_seen = true,
            ThreeVal::False => {}
        }
    }

    // symbolic tail: c1 an arbitrarily large finite value
    if c1d.hi.is_none() {
        let tail = try_c1_large(t, dims, couplings, partner, fpd, nfd);
        if tail.is_true() {
            return ThreeVal::True;
        }
        if tail.is_unknown() {
            unknown_seen = true;
        }
    }
    if unknown_seen {
        ThreeVal::Unknown
    } else {
        ThreeVal::False
    }
}

/// Checks one concrete finite value of the first sort.
fn try_c1_value(
    t: &TheorySpec,
    dims: &[DimState],
    couplings: &[&MeasureConstraint],
    c1: u64,
    partner: Option<usize>,
) -> ThreeVal {
    let n_sorts = t.sig.sort_count();
    let fp_dim = n_sorts;
    let nonfp_dim = n_sorts + 1;
    let c1d = &dims[0];
    let fpd = &dims[fp_dim];
    let nfd = &dims[nonfp_dim];

    if let Some(h) = c1d.hi {
        if c1 > h {
            return ThreeVal::False;
        }
    }
    if c1 < c1d.lo.max(1) {
        return ThreeVal::False;
    }
    if let Some(p) = c1d.parity {
        if (c1 % 2 == 1) != p {
            return ThreeVal::False;
        }
    }
    if let Some(min_arg) = c1d.image_min_arg {
        match t.oracle.in_image(c1, min_arg) {
            ThreeVal::False => return ThreeVal::False,
            ThreeVal::Unknown => return ThreeVal::Unknown,
            ThreeVal::True => {}
        }
    }

    // fp range from interval data and the sum coupling fp + nonfp = c1
    let mut fp_lo = fpd.lo;
    let mut fp_hi = fpd.hi.unwrap_or(c1).min(c1);
    // nonfp = c1 - fp within its own interval
    if let Some(nh) = nfd.hi {
        fp_lo = fp_lo.max(c1.saturating_sub(nh));
    }
    fp_hi = fp_hi.min(c1.saturating_sub(nfd.lo));
    if nfd.lo > c1 {
        return ThreeVal::False;
    }

    // exact fp couplings
    let mut fp_exact: Option<ThreeVal> = None;
    let mut fp_value: Option<u64> = None;
    for c in couplings {
        match c {
            MeasureConstraint::EqSigmaInv { of, .. } => {
                debug_assert!(matches!(of, MeasureSel::Card(0)));
                match t.oracle.sigma_inv(c1) {
                    Some(v) => fp_value = Some(v),
                    None => fp_exact = Some(ThreeVal::Unknown),
                }
            }
            MeasureConstraint::BitCountOf { of, .. } => {
                debug_assert!(matches!(of, MeasureSel::Card(0)));
                match t.bits.as_ref().and_then(|b| b.ones_upto(c1)) {
                    Some(v) => fp_value = Some(v),
                    None => fp_exact = Some(ThreeVal::Unknown),
                }
            }
            MeasureConstraint::GeSigmaOf { .. } => {}
            _ => unreachable!(),
        }
    }
    if let Some(u) = fp_exact {
        return u;
    }

    // candidate fp values: the pinned one, or the minimal in range with a
    // parity sibling (larger fp only tightens downstream growth couplings)
    let fp_candidates: Vec<u64> = match fp_value {
        Some(v) => {
            if v < fp_lo || v > fp_hi {
                return ThreeVal::False;
            }
            vec![v]
        }
        None => {
            if fp_lo > fp_hi {
                return ThreeVal::False;
            }
            if fp_lo + 1 <= fp_hi {
                vec![fp_lo, fp_lo + 1]
            } else {
                vec![fp_lo]
            }
        }
    };

    let mut acc = ThreeVal::False;
    'fp: for &fp in &fp_candidates {
        let nonfp = c1 - fp;
        if let Some(p) = nfd.parity {
            if (nonfp % 2 == 1) != p {
                continue;
            }
        }
        // a lone element is always a fixed point
        if c1 == 1 && fp == 0 {
            continue;
        }
        // remaining card dims: partner pinned to c1, others free
        let mut this = ThreeVal::True;
        for i in 1..n_sorts {
            let d = &dims[i];
            if Some(i) == partner {
                if d.inf_required {
                    continue 'fp;
                }
                let mut dv = d.clone();
                dv.lo = dv.lo.max(c1);
                dv.hi = Some(dv.hi.map_or(c1, |h| h.min(c1)));
                if dv.lo > c1 {
                    continue 'fp;
                }
                this = this.and(check_pinned_dim(t, &dv, c1));
            } else {
                this = this.and(dim_feasible_with_growth(t, d, couplings, i, Card::Fin(fp)));
            }
            if this.is_false() {
                continue 'fp;
            }
        }
        // growth couplings targeting fp-agnostic dims were handled above;
        // leftover: GeSigmaOf where the measure is the first sort itself
        for c in couplings {
            if let MeasureConstraint::GeSigmaOf { measure, of } = c {
                if matches!(measure, MeasureSel::Card(0)) {
                    let of_card = match of {
                        MeasureSel::Fp => Card::Fin(fp),
                        MeasureSel::Card(i) => {
                            if *i == 0 {
                                Card::Fin(c1)
                            } else {
                                // not used by any catalog clause; treat as
                                // unsupported rather than guessing
                                return ThreeVal::Unknown;
                            }
                        }
                    };
                    this = this.and(ge_sigma_value(t, Card::Fin(c1), of_card));
                }
            }
        }
        // fp/nonfp dims satisfied by construction
        debug_assert!(fp >= fp_lo && fp <= fp_hi);
        debug_assert!(nonfp >= nfd.lo);
        acc = acc.or(this);
        if acc.is_true() {
            return acc;
        }
    }
    acc
}

/// `value >= sigma(of)` for concrete cards.
fn ge_sigma_value(t: &TheorySpec, value: Card, of: Card) -> ThreeVal {
    match of {
        Card::Inf => ThreeVal::from_bool(value.is_inf()),
        Card::Fin(k) => match t.oracle.sigma(k) {
            SigmaValue::Value(v) => ThreeVal::from_bool(value >= Card::Fin(v)),
            SigmaValue::Unknown { lower_bound } => match value {
                Card::Inf => ThreeVal::True,
                Card::Fin(w) if w < lower_bound => ThreeVal::False,
                Card::Fin(_) => ThreeVal::Unknown,
            },
        },
    }
}

/// Feasibility of a non-first card dimension, including growth couplings
/// that lower-bound it by sigma(fp).
fn dim_feasible_with_growth(
    t: &TheorySpec,
    d: &DimState,
    couplings: &[&MeasureConstraint],
    dim_index: usize,
    fp: Card,
) -> ThreeVal {
    let mut d = d.clone();
    for c in couplings {
        if let MeasureConstraint::GeSigmaOf { measure, of } = c {
            if *measure == MeasureSel::Card(dim_index) {
                debug_assert!(matches!(of, MeasureSel::Fp));
                match fp {
                    Card::Inf => {
                        d.inf_required = true;
                    }
                    Card::Fin(k) => match t.oracle.sigma(k) {
                        SigmaValue::Value(v) => d.lo = d.lo.max(v),
                        SigmaValue::Unknown { lower_bound } => {
                            // the threshold is a finite value the oracle
                            // cannot name: an unbounded dimension can always
                            // clear it, a bounded one only when the bound
                            // might reach it
                            return match d.hi {
                                Some(h) if h < lower_bound => ThreeVal::False,
                                Some(_) => ThreeVal::Unknown,
                                None => ThreeVal::True,
                            };
                        }
                    },
                }
            }
        }
    }
    dim_feasible(t, &d)
}

/// A dimension pinned to an exact value.
fn check_pinned_dim(t: &TheorySpec, d: &DimState, v: u64) -> ThreeVal {
    if let Some(p) = d.parity {
        if (v % 2 == 1) != p {
            return ThreeVal::False;
        }
    }
    if let Some(min_arg) = d.image_min_arg {
        return t.oracle.in_image(v, min_arg);
    }
    ThreeVal::True
}

/// The symbolic large-finite tail for the first sort: feasible when the
/// dimension is unbounded and every coupling tolerates arbitrarily large
/// values. Uses that sigma, sigma_inv, the non-fixed residue k - sigma_inv(k)
/// and the balanced bit counts are all unbounded and non-decreasing.
fn try_c1_large(
    t: &TheorySpec,
    dims: &[DimState],
    couplings: &[&MeasureConstraint],
    partner: Option<usize>,
    fpd: &DimState,
    nfd: &DimState,
) -> ThreeVal {
    let c1d = &dims[0];
    if c1d.hi.is_some() {
        return ThreeVal::False;
    }
    // image-constrained first sort: the image is unbounded, so large values
    // exist; parity can also be matched eventually only if witnessed by the
    // known table, otherwise unknown
    if c1d.image_min_arg.is_some() && c1d.parity.is_some() {
        return ThreeVal::Unknown;
    }

    // fixed-point split at large c1
    let mut fp_pinned_growth = false;
    for c in couplings {
        match c {
            MeasureConstraint::EqSigmaInv { .. } | MeasureConstraint::BitCountOf { .. } => {
                fp_pinned_growth = true;
            }
            _ => {}
        }
    }
    if fp_pinned_growth {
        // fp and nonfp both grow without bound with c1
        if fpd.hi.is_some() || nfd.hi.is_some() {
            return ThreeVal::False;
        }
    } else {
        // fp free: need some split with fp >= fp.lo, nonfp >= nonfp.lo,
        // summing to an arbitrarily large value
        if fpd.hi.is_some() && nfd.hi.is_some() {
            return ThreeVal::False;
        }
        if let Some(p) = nfd.parity {
            // with one side bounded the parity of the other follows c1;
            // large c1 of either parity is available unless the first sort
            // is image-constrained (sparse), handled above
            let _ = p;
        }
    }

    // partner dim must allow equally large (finite) values
    if let Some(i) = partner {
        if dims[i].hi.is_some() {
            return ThreeVal::False;
        }
    }

    // other card dims with GeSigmaOf over an unbounded fp must themselves be
    // unbounded or infinite
    for c in couplings {
        if let MeasureConstraint::GeSigmaOf { measure, of } = c {
            debug_assert!(matches!(of, MeasureSel::Fp));
            if let MeasureSel::Card(i) = measure {
                let d = &dims[*i];
                if fp_pinned_growth || nfd.hi.is_some() {
                    // fp grows with c1: pinned to a growth coupling, or
                    // forced because nonfp cannot absorb the growth
                    if d.hi.is_some() {
                        return ThreeVal::False;
                    }
                } else {
                    // fp can stay at its lower bound while nonfp absorbs c1
                    let sigma_lo = match t.oracle.sigma(fpd.lo) {
                        SigmaValue::Value(v) => v,
                        SigmaValue::Unknown { lower_bound } => {
                            if d.hi.map_or(false, |h| h < lower_bound) {
                                return ThreeVal::False;
                            }
                            if d.hi.is_some() {
                                return ThreeVal::Unknown;
                            }
                            lower_bound
                        }
                    };
                    if d.hi.map_or(false, |h| h < sigma_lo.max(d.lo)) {
                        return ThreeVal::False;
                    }
                }
            }
        }
    }

    // remaining free dims
    let n_sorts = t.sig.sort_count();
    let mut acc = ThreeVal::True;
    for i in 1..n_sorts {
        if Some(i) == partner {
            // pinned to large c1: image on partner is fine (image of large
            // values exists since c1 itself ranges over all large values;
            // when the partner is image-constrained the shared group already
            // carries the flag on dims[0], treated above)
            continue;
        }
        if couplings.iter().any(
            |c| matches!(c, MeasureConstraint::GeSigmaOf { measure, .. } if *measure == MeasureSel::Card(i)),
        ) {
            continue; // handled above
        }
        acc = acc.and(dim_feasible(t, &dims[i]));
    }
    acc
}

/// Dominance with all first-sort structure infinite: separate entry point
/// because couplings behave differently at infinity.
fn solve_s_infinite_c1(
    t: &TheorySpec,
    dims: &[DimState],
    couplings: &[&MeasureConstraint],
    fp_inf: bool,
    nonfp_inf: bool,
    partner: Option<usize>,
) -> ThreeVal {
    let n_sorts = t.sig.sort_count();
    let fp_dim = n_sorts;
    let nonfp_dim = n_sorts + 1;
    let fpd = &dims[fp_dim];
    let nfd = &dims[nonfp_dim];

    let fp: Card = if fp_inf { Card::Inf } else { Card::Fin(fpd.lo) };
    // finite fp still has interval/parity conditions
    if !fp_inf {
        if let Some(p) = fpd.parity {
            if (fpd.lo % 2 == 1) != p && fpd.hi.map_or(false, |h| h <= fpd.lo) {
                return ThreeVal::False;
            }
        }
        if let Some(h) = fpd.hi {
            if fpd.lo > h {
                return ThreeVal::False;
            }
        }
    }
    if !nonfp_inf {
        if let Some(h) = nfd.hi {
            if nfd.lo > h {
                return ThreeVal::False;
            }
        }
        if let Some(p) = nfd.parity {
            let mut v = nfd.lo;
            if (v % 2 == 1) != p {
                v += 1;
            }
            if nfd.hi.map_or(false, |h| v > h) {
                return ThreeVal::False;
            }
        }
    }

    let mut acc = ThreeVal::True;
    for c in couplings {
        use MeasureConstraint::*;
        match c {
            EqSigmaInv { .. } => {
                // sigma_inv(inf) = inf
                if !fp_inf {
                    return ThreeVal::False;
                }
            }
            BitCountOf { .. } => {
                if !(fp_inf && nonfp_inf) {
                    return ThreeVal::False;
                }
            }
            GeSigmaOf { measure, .. } => {
                if let MeasureSel::Card(i) = measure {
                    let d = &dims[*i];
                    match fp {
                        Card::Inf => {
                            // target must be infinite
                            if d.hi.is_some() || d.fin_required {
                                return ThreeVal::False;
                            }
                        }
                        Card::Fin(k) => {
                            acc = acc.and(match t.oracle.sigma(k) {
                                SigmaValue::Value(v) => {
                                    let mut dv = d.clone();
                                    dv.lo = dv.lo.max(v);
                                    dim_feasible(t, &dv)
                                }
                                SigmaValue::Unknown { lower_bound } => {
                                    if d.hi.map_or(false, |h| h < lower_bound) {
                                        ThreeVal::False
                                    } else if d.hi.is_some() || d.fin_required {
                                        ThreeVal::Unknown
                                    } else {
                                        ThreeVal::True
                                    }
                                }
                            });
                        }
                    }
                } else {
                    // first sort >= sigma(fp): infinite first sort passes
                }
            }
            _ => unreachable!(),
        }
        if acc.is_false() {
            return acc;
        }
    }

    // partner card must be infinite too
    if let Some(i) = partner {
        let d = &dims[i];
        if d.hi.is_some() || d.fin_required {
            return ThreeVal::False;
        }
    }

    for i in 1..n_sorts {
        if Some(i) == partner {
            continue;
        }
        if couplings.iter().any(
            |c| matches!(c, MeasureConstraint::GeSigmaOf { measure, .. } if *measure == MeasureSel::Card(i)),
        ) {
            continue;
        }
        acc = acc.and(dim_feasible(t, &dims[i]));
        if acc.is_false() {
            return acc;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Minimal admitted points
// ---------------------------------------------------------------------------

/// Result of a minimal-point search: the minimal finite spectrum points
/// dominating the query that the oracle can name, plus a flag when an
/// undecidable region might contain smaller (or the only) points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinPoints {
    pub points: Vec<MeasureVector>,
    pub unknown_tail: bool,
}

/// Minimal all-finite measure points of the theory dominating `q`.
pub fn minimal_points(t: &TheorySpec, q: &Query) -> Result<MinPoints, SpectrumError> {
    if q.card.len() != t.sig.sort_count() {
        return Err(SpectrumError::SignatureMismatch {
            sig: t.sig.name(),
            got: q.card.len(),
            want: t.sig.sort_count(),
        });
    }
    let mut fin_q = q.clone();
    for d in fin_q.card.iter_mut() {
        if d.fin == FinReq::Inf {
            return Ok(MinPoints { points: Vec::new(), unknown_tail: false });
        }
        d.fin = FinReq::Fin;
    }
    let mut pts: Vec<Vec<u64>> = Vec::new();
    let mut unknown_tail = false;
    // per clause, walk candidate first-sort / per-dim minimal combinations
    for clause in &t.clauses {
        let scan = minimal_points_clause(t, clause, &fin_q);
        unknown_tail |= scan.unknown_tail;
        for p in scan.points {
            pts.push(flatten_point(t, &p));
        }
    }
    let minima = minimal_elements(&pts)?;
    let points = minima.into_iter().map(|p| unflatten_point(t, &p)).collect();
    Ok(MinPoints { points, unknown_tail })
}

fn flatten_point(t: &TheorySpec, p: &MeasureVector) -> Vec<u64> {
    let n = t.sig.sort_count();
    let mut out: Vec<u64> = p.card.iter().map(|c| c.fin().expect("finite point")).collect();
    debug_assert_eq!(out.len(), n);
    if t.sig.has_s() {
        out.push(p.fp.and_then(|c| c.fin()).unwrap_or(0));
        out.push(p.nonfp.and_then(|c| c.fin()).unwrap_or(0));
    }
    out
}

fn unflatten_point(t: &TheorySpec, p: &[u64]) -> MeasureVector {
    let n = t.sig.sort_count();
    let card = p[..n].iter().map(|&v| Card::Fin(v)).collect();
    if t.sig.has_s() {
        MeasureVector::with_fp(card, Card::Fin(p[n]), Card::Fin(p[n + 1]))
    } else {
        MeasureVector::cards_only(card)
    }
}

/// Minimal all-finite points of a single clause dominating the query.
pub fn minimal_points_clause(t: &TheorySpec, clause: &ShapeClause, q: &Query) -> MinPoints {
    let mut fin_q = q.clone();
    for d in fin_q.card.iter_mut() {
        if d.fin == FinReq::Inf {
            return MinPoints { points: Vec::new(), unknown_tail: false };
        }
        d.fin = FinReq::Fin;
    }
    let (found, saw_unknown) = clause_min_scan(t, clause, &fin_q);
    let mut unknown_tail = saw_unknown && !found.is_empty();
    if found.is_empty() && !solve_clause_fin(t, clause, &fin_q).is_false() {
        // finitely satisfiable beyond the probe window: points exist that
        // the oracle cannot name
        unknown_tail = true;
    }
    let minima = minimal_elements(&found).unwrap_or_default();
    MinPoints {
        points: minima.into_iter().map(|p| unflatten_point(t, &p)).collect(),
        unknown_tail,
    }
}

/// Enumerates small candidate points of one clause dominating the query.
/// Returns the points found in the probe window and whether any probe came
/// back undecided.
fn clause_min_scan(t: &TheorySpec, clause: &ShapeClause, q: &Query) -> (Vec<Vec<u64>>, bool) {
    let n = t.sig.sort_count();
    let has_s = t.sig.has_s();
    // candidate generation: reuse the solver by probing exact values per
    // dimension, seeded from minimal feasible scans
    let mut out: Vec<Vec<u64>> = Vec::new();
    // feasible probes the window could not complete into named points; they
    // only matter when no named point dominates them
    let mut pending: Vec<Vec<u64>> = Vec::new();

    // probe the first sort over a window plus known image values
    let lo0 = q.card[0].lo.max(1);
    let mut c0_candidates: Vec<u64> = (lo0..=lo0 + SPAN).collect();
    let mut start = lo0;
    while let MinImage::Known(v) = t.oracle.min_image_value_at_least(start, 0) {
        c0_candidates.push(v);
        start = v + 1;
    }
    c0_candidates.sort();
    c0_candidates.dedup();

    if !has_s {
        // empty signature: per-dim minimization is independent except for
        // EqMeasure partners; probe pairs of exact values on sort 0 and
        // derive the rest
        for &c0 in &c0_candidates {
            let mut qq = q.clone();
            qq.card[0] = DimQuery::exactly(c0);
            match solve_clause_fin(t, clause, &qq) {
                ThreeVal::True | ThreeVal::Unknown => {}
                ThreeVal::False => continue,
            }
            // minimize remaining dims greedily (they are independent given
            // sort 0 fixed; EqMeasure partners get pinned to c0)
            let mut point = vec![c0];
            let mut ok = true;
            for i in 1..n {
                let mut found = None;
                let lo_i = q.card[i].lo.max(1);
                let mut cands: Vec<u64> = (lo_i..=lo_i + SPAN).collect();
                cands.push(c0);
                let mut st = lo_i;
                while let MinImage::Known(v) = t.oracle.min_image_value_at_least(st, 0) {
                    cands.push(v);
                    st = v + 1;
                }
                cands.sort();
                cands.dedup();
                for &ci in &cands {
                    let mut q2 = qq.clone();
                    q2.card[i] = DimQuery::exactly(ci);
                    // keep earlier pins
                    for (j, pj) in point.iter().enumerate() {
                        q2.card[j] = DimQuery::exactly(*pj);
                    }
                    if solve_clause_fin(t, clause, &q2).is_true() {
                        found = Some(ci);
                        break;
                    }
                }
                match found {
                    Some(ci) => point.push(ci),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.push(point);
            } else {
                let mut p = point;
                p.resize(n, u64::MAX);
                pending.push(p);
            }
        }
    } else {
        // s-signature: probe (c0, fp) pairs
        for &c0 in &c0_candidates {
            for fp in q.fp.lo..=c0.min(q.fp.lo + SPAN) {
                if fp > c0 {
                    break;
                }
                let nonfp = c0 - fp;
                if nonfp < q.nonfp.lo {
                    continue;
                }
                let mut qq = q.clone();
                qq.card[0] = DimQuery::exactly(c0);
                qq.fp = DimQuery::exactly(fp);
                qq.nonfp = DimQuery::exactly(nonfp);
                match solve_clause_fin(t, clause, &qq) {
                    ThreeVal::True | ThreeVal::Unknown => {}
                    ThreeVal::False => continue,
                }
                let mut point = vec![c0];
                let mut ok = true;
                for i in 1..n {
                    let lo_i = q.card[i].lo.max(1);
                    let mut cands: Vec<u64> = (lo_i..=lo_i + SPAN).collect();
                    cands.push(c0);
                    let mut st = lo_i;
                    while let MinImage::Known(v) = t.oracle.min_image_value_at_least(st, 0) {
                        cands.push(v);
                        st = v + 1;
                    }
                    // growth-coupled dims may need sigma(fp)
                    if let SigmaValue::Value(v) = t.oracle.sigma(fp) {
                        cands.push(v.max(lo_i));
                    }
                    cands.sort();
                    cands.dedup();
                    let mut found = None;
                    for &ci in &cands {
                        let mut q2 = qq.clone();
                        for (j, pj) in point.iter().enumerate() {
                            q2.card[j] = DimQuery::exactly(*pj);
                        }
                        q2.card[i] = DimQuery::exactly(ci);
                        if solve_clause_fin(t, clause, &q2).is_true() {
                            found = Some(ci);
                            break;
                        }
                    }
                    match found {
                        Some(ci) => point.push(ci),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    point.push(fp);
                    point.push(nonfp);
                    out.push(point);
                } else {
                    let mut p = point;
                    p.resize(n, u64::MAX);
                    p.push(fp);
                    p.push(nonfp);
                    pending.push(p);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    // unresolved probes only make the scan inconclusive when no named point
    // dominates them
    let saw_unknown = pending
        .iter()
        .any(|p| !out.iter().any(|o| o.iter().zip(p.iter()).all(|(a, b)| a <= b)));
    (out, saw_unknown)
}

/// Clause feasibility restricted to all-finite measures.
fn solve_clause_fin(t: &TheorySpec, clause: &ShapeClause, q: &Query) -> ThreeVal {
    let mut qq = q.clone();
    for d in qq.card.iter_mut() {
        if d.fin == FinReq::Inf {
            return ThreeVal::False;
        }
        d.fin = FinReq::Fin;
    }
    solve_clause(t, clause, &qq)
}

// ---------------------------------------------------------------------------
// Minimal models of a theory within a box
// ---------------------------------------------------------------------------

/// Minimal elements of the finite part of the spectrum intersected with
/// `[1, box]^sorts` (fixed-point split included for s-signatures), plus a
/// flag telling whether the result is exact: true when every finite
/// spectrum point dominates some returned minimum.
pub fn minimal_models(
    t: &TheorySpec,
    box_bound: u64,
) -> Result<(Vec<MeasureVector>, bool), SpectrumError> {
    assert!(box_bound >= 1);
    let n = t.sig.sort_count();
    let has_s = t.sig.has_s();
    let mut pts: Vec<Vec<u64>> = Vec::new();
    let mut sizes = vec![1u64; n];
    loop {
        if has_s {
            for fp in 0..=sizes[0] {
                let m = MeasureVector::with_fp(
                    sizes.iter().map(|&v| Card::Fin(v)).collect(),
                    Card::Fin(fp),
                    Card::Fin(sizes[0] - fp),
                );
                if t.member(&m)?.is_true() {
                    let mut p = sizes.clone();
                    p.push(fp);
                    p.push(sizes[0] - fp);
                    pts.push(p);
                }
            }
        } else {
            let m = MeasureVector::cards_only(sizes.iter().map(|&v| Card::Fin(v)).collect());
            if t.member(&m)?.is_true() {
                pts.push(sizes.clone());
            }
        }
        // advance sizes
        let mut i = n;
        loop {
            if i == 0 {
                let minima = minimal_elements(&pts)?;
                // exact iff the unrestricted minimal-point scan stayed inside
                // the box
                let scan = minimal_points(t, &Query::tautology(t.sig))?;
                let exact = !scan.unknown_tail
                    && scan
                        .points
                        .iter()
                        .all(|p| p.card.iter().all(|c| c.fin().is_some_and(|v| v <= box_bound)));
                let out = minima
                    .into_iter()
                    .map(|p| {
                        let card = p[..n].iter().map(|&v| Card::Fin(v)).collect();
                        if has_s {
                            MeasureVector::with_fp(card, Card::Fin(p[n]), Card::Fin(p[n + 1]))
                        } else {
                            MeasureVector::cards_only(card)
                        }
                    })
                    .collect();
                return Ok((out, exact));
            }
            i -= 1;
            if sizes[i] < box_bound {
                sizes[i] += 1;
                for s in sizes.iter_mut().skip(i + 1) {
                    *s = 1;
                }
                break;
            }
            sizes[i] = 1;
        }
    }
}
