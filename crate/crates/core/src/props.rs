//! The seven combination properties: vectors, the implication lattice, and
//! checkers (exact at the spectrum level, corpus-based as the independent
//! second route).

use crate::corpus::Corpus;
use crate::decide::{self, Bounds};
use crate::formula::{QfFormula, Signature, Var};
use crate::spectrum::{
    dominated_sat, dominated_sat_clause, minimal_points, Card, DimQuery, FinReq, MeasureVector,
    Query, TheorySpec,
};
use crate::three::ThreeVal;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Property {
    Si,
    Sm,
    Fw,
    Sw,
    Cv,
    Fm,
    Sf,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Si,
        Property::Sm,
        Property::Fw,
        Property::Sw,
        Property::Cv,
        Property::Fm,
        Property::Sf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Si => "SI",
            Property::Sm => "SM",
            Property::Fw => "FW",
            Property::Sw => "SW",
            Property::Cv => "CV",
            Property::Fm => "FM",
            Property::Sf => "SF",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Truth values for the seven properties of one theory.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PropertyVector {
    pub si: ThreeVal,
    pub sm: ThreeVal,
    pub fw: ThreeVal,
    pub sw: ThreeVal,
    pub cv: ThreeVal,
    pub fm: ThreeVal,
    pub sf: ThreeVal,
}

impl PropertyVector {
    pub fn from_bools(v: [bool; 7]) -> PropertyVector {
        PropertyVector {
            si: v[0].into(),
            sm: v[1].into(),
            fw: v[2].into(),
            sw: v[3].into(),
            cv: v[4].into(),
            fm: v[5].into(),
            sf: v[6].into(),
        }
    }

    pub fn get(&self, p: Property) -> ThreeVal {
        match p {
            Property::Si => self.si,
            Property::Sm => self.sm,
            Property::Fw => self.fw,
            Property::Sw => self.sw,
            Property::Cv => self.cv,
            Property::Fm => self.fm,
            Property::Sf => self.sf,
        }
    }

    pub fn set(&mut self, p: Property, v: ThreeVal) {
        match p {
            Property::Si => self.si = v,
            Property::Sm => self.sm = v,
            Property::Fw => self.fw = v,
            Property::Sw => self.sw = v,
            Property::Cv => self.cv = v,
            Property::Fm => self.fm = v,
            Property::Sf => self.sf = v,
        }
    }
}

impl fmt::Display for PropertyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in Property::ALL.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.get(*p))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Implication lattice
// ---------------------------------------------------------------------------

/// Signature metadata an implication may be gated on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SigMeta {
    pub sort_count: usize,
    pub empty_signature: bool,
}

impl SigMeta {
    pub fn of(sig: Signature) -> SigMeta {
        SigMeta { sort_count: sig.sort_count(), empty_signature: sig.is_empty() }
    }
}

/// Where an implication rule comes from: the core results established here,
/// or inherited results cited from earlier work on the first five
/// properties.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleSource {
    Core,
    Prior,
}

#[derive(Clone, Copy, Debug)]
pub struct ImplicationRule {
    pub id: &'static str,
    pub source: RuleSource,
    pub statement: &'static str,
    gate: fn(SigMeta) -> bool,
    antecedent: fn(&PropertyVector) -> ThreeVal,
    consequent: fn(&PropertyVector) -> ThreeVal,
}

impl ImplicationRule {
    /// A rule is violated when its gate holds, its antecedent is true and
    /// its consequent false.
    pub fn violated(&self, v: &PropertyVector, meta: SigMeta) -> bool {
        (self.gate)(meta) && (self.antecedent)(v).is_true() && (self.consequent)(v).is_false()
    }
}

fn always(_: SigMeta) -> bool {
    true
}
fn one_sorted(m: SigMeta) -> bool {
    m.sort_count == 1
}
fn empty_sig(m: SigMeta) -> bool {
    m.empty_signature
}
fn one_sorted_empty(m: SigMeta) -> bool {
    m.sort_count == 1 && m.empty_signature
}
fn le_two_sorted_empty(m: SigMeta) -> bool {
    m.sort_count <= 2 && m.empty_signature
}

pub const RULES: &[ImplicationRule] = &[
    ImplicationRule {
        id: "sf_implies_fm",
        source: RuleSource::Core,
        statement: "a stably finite theory has the finite model property",
        gate: always,
        antecedent: |v| v.sf,
        consequent: |v| v.fm,
    },
    ImplicationRule {
        id: "fw_implies_fm",
        source: RuleSource::Core,
        statement: "a finitely witnessable theory has the finite model property",
        gate: always,
        antecedent: |v| v.fw,
        consequent: |v| v.fm,
    },
    ImplicationRule {
        id: "sw_implies_sf",
        source: RuleSource::Core,
        statement: "a strongly finitely witnessable theory is stably finite",
        gate: always,
        antecedent: |v| v.sw,
        consequent: |v| v.sf,
    },
    ImplicationRule {
        id: "sm_implies_si",
        source: RuleSource::Core,
        statement: "a smooth theory is stably infinite",
        gate: always,
        antecedent: |v| v.sm,
        consequent: |v| v.si,
    },
    ImplicationRule {
        id: "sw_implies_fw",
        source: RuleSource::Core,
        statement: "strong finite witnessability implies finite witnessability",
        gate: always,
        antecedent: |v| v.sw,
        consequent: |v| v.fw,
    },
    ImplicationRule {
        id: "one_sorted_fm_implies_sf",
        source: RuleSource::Core,
        statement: "over a single sort, the finite model property implies stable finiteness",
        gate: one_sorted,
        antecedent: |v| v.fm,
        consequent: |v| v.sf,
    },
    ImplicationRule {
        id: "empty_smooth_fm_implies_fw",
        source: RuleSource::Core,
        statement:
            "over an empty signature, a smooth theory with the finite model property is finitely witnessable",
        gate: empty_sig,
        antecedent: |v| v.sm.and(v.fm),
        consequent: |v| v.fw,
    },
    ImplicationRule {
        id: "empty_smooth_sf_implies_sw",
        source: RuleSource::Core,
        statement:
            "over an empty signature, a smooth stably finite theory is strongly finitely witnessable",
        gate: empty_sig,
        antecedent: |v| v.sm.and(v.sf),
        consequent: |v| v.sw,
    },
    ImplicationRule {
        id: "two_sorted_empty_needs_nonconvex",
        source: RuleSource::Core,
        statement:
            "over an empty signature with at most two sorts, a convex theory with the finite model property is stably infinite or stably finite",
        gate: le_two_sorted_empty,
        antecedent: |v| v.si.not().and(v.sf.not()).and(v.fm),
        consequent: |v| v.cv.not(),
    },
    ImplicationRule {
        id: "empty_si_implies_cv",
        source: RuleSource::Prior,
        statement: "a stably infinite theory over an empty signature is convex",
        gate: empty_sig,
        antecedent: |v| v.si,
        consequent: |v| v.cv,
    },
    ImplicationRule {
        id: "one_sorted_empty_not_si_implies_fw",
        source: RuleSource::Prior,
        statement:
            "a one-sorted empty-signature theory that is not stably infinite is finitely witnessable",
        gate: one_sorted_empty,
        antecedent: |v| v.si.not(),
        consequent: |v| v.fw,
    },
    ImplicationRule {
        id: "one_sorted_empty_not_si_fw_cv_implies_sw",
        source: RuleSource::Prior,
        statement:
            "a one-sorted empty-signature theory that is convex and finitely witnessable but not stably infinite is strongly finitely witnessable",
        gate: one_sorted_empty,
        antecedent: |v| v.si.not().and(v.fw).and(v.cv),
        consequent: |v| v.sw,
    },
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: String,
    pub statement: String,
    pub source: RuleSource,
}

/// Violated implications for a property vector under the given signature
/// metadata. Unknown entries never trigger a violation.
pub fn check_implications(v: &PropertyVector, meta: SigMeta) -> Vec<Violation> {
    RULES
        .iter()
        .filter(|r| r.violated(v, meta))
        .map(|r| Violation {
            rule: r.id.to_string(),
            statement: r.statement.to_string(),
            source: r.source,
        })
        .collect()
}

/// Only the core rules (the erased-row computation uses these).
pub fn check_core_implications(v: &PropertyVector, meta: SigMeta) -> Vec<Violation> {
    check_implications(v, meta)
        .into_iter()
        .filter(|viol| viol.source == RuleSource::Core)
        .collect()
}

// ---------------------------------------------------------------------------
// Property checking
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    ExactSpectrum,
    Corpus,
}

/// Outcome of one property check; `False` verdicts carry re-verifiable
/// evidence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub theory: String,
    pub property: Property,
    pub verdict: ThreeVal,
    pub mode: CheckMode,
    pub evidence: Option<String>,
}

impl CheckReport {
    fn ok(theory: &str, property: Property, mode: CheckMode) -> CheckReport {
        CheckReport { theory: theory.into(), property, verdict: ThreeVal::True, mode, evidence: None }
    }

    fn fail(theory: &str, property: Property, mode: CheckMode, evidence: String) -> CheckReport {
        CheckReport {
            theory: theory.into(),
            property,
            verdict: ThreeVal::False,
            mode,
            evidence: Some(evidence),
        }
    }

    fn unknown(theory: &str, property: Property, mode: CheckMode, note: String) -> CheckReport {
        CheckReport {
            theory: theory.into(),
            property,
            verdict: ThreeVal::Unknown,
            mode,
            evidence: Some(note),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.theory, self.property, self.verdict)?;
        if let Some(e) = &self.evidence {
            write!(f, " ({e})")?;
        }
        Ok(())
    }
}

/// Checks one of SI, SM, FM, SF for the theory, with respect to its entire
/// sort set.
pub fn check_property(
    t: &TheorySpec,
    prop: Property,
    mode: CheckMode,
    bounds: &Bounds,
) -> CheckReport {
    match mode {
        CheckMode::ExactSpectrum => match prop {
            Property::Si => exact_si(t),
            Property::Sm => exact_sm(t),
            Property::Fm => exact_fm(t),
            Property::Sf => exact_sf(t),
            _ => CheckReport::unknown(
                &t.name,
                prop,
                mode,
                "exact mode covers SI, SM, FM, SF".into(),
            ),
        },
        CheckMode::Corpus => {
            let corpus = Corpus::default_for(t);
            match prop {
                Property::Si => corpus_si(t, &corpus, bounds),
                Property::Sm => corpus_sm(t, &corpus, bounds),
                Property::Fm => corpus_fm(t, &corpus, bounds),
                Property::Sf => corpus_sf(t, &corpus, bounds),
                Property::Cv => corpus_cv(t, &corpus, bounds),
                _ => CheckReport::unknown(
                    &t.name,
                    prop,
                    mode,
                    "witnessability verdicts come from witness verification".into(),
                ),
            }
        }
    }
}

// --- exact-spectrum checkers ------------------------------------------------

/// Probe value strictly above every constant a catalog clause mentions, so
/// that feasibility beyond it is governed by the monotone tails only.
const OMEGA_PROBE: u64 = 17;

/// Realizable spectrum point shapes of the theory: the minimal finite
/// points, a minimal shape per clause for every infinite-coordinate
/// pattern, and single-dimension bumped variants snapped back onto the
/// spectrum. These are the shapes on which the universally quantified
/// property definitions can fail first; everything beyond them follows the
/// clause tails, which are monotone past the probe value.
fn representative_points(t: &TheorySpec) -> Vec<MeasureVector> {
    let n = t.sig.sort_count();
    let has_s = t.sig.has_s();
    let mut out: Vec<MeasureVector> = Vec::new();
    let mut push = |m: MeasureVector, out: &mut Vec<MeasureVector>| {
        if !out.contains(&m) {
            out.push(m);
        }
    };

    // finite minimal points, plus per-dimension bumped snaps
    let mut finite_demands: Vec<Query> = vec![Query::tautology(t.sig)];
    if let Ok(scan) = minimal_points(t, &Query::tautology(t.sig)) {
        for p in &scan.points {
            for d in 0..n {
                for bump in [1, OMEGA_PROBE] {
                    let mut q = Query::tautology(t.sig);
                    for (i, c) in p.card.iter().enumerate() {
                        q.card[i].lo = c.fin().unwrap_or(0);
                    }
                    q.card[d].lo += bump;
                    finite_demands.push(q);
                }
            }
            if has_s {
                for (dfp, dnonfp) in [(1, 0), (OMEGA_PROBE, 0), (0, 1), (0, OMEGA_PROBE), (2, 2)]
                {
                    let mut q = Query::tautology(t.sig);
                    q.fp.lo = p.fp.and_then(|c| c.fin()).unwrap_or(0) + dfp;
                    q.nonfp.lo = p.nonfp.and_then(|c| c.fin()).unwrap_or(0) + dnonfp;
                    finite_demands.push(q);
                }
            }
        }
    }
    for q in &finite_demands {
        if let Ok(scan) = minimal_points(t, q) {
            for p in scan.points {
                push(p, &mut out);
            }
        }
    }

    // per-clause infinite patterns with minimized finite coordinates
    for clause in &t.clauses {
        for mask in 1..(1u32 << n) {
            let splits: &[(FinReq, FinReq)] = if !has_s {
                &[(FinReq::Any, FinReq::Any)]
            } else if mask & 1 != 0 {
                &[(FinReq::Inf, FinReq::Fin), (FinReq::Fin, FinReq::Inf), (FinReq::Inf, FinReq::Inf)]
            } else {
                &[(FinReq::Fin, FinReq::Fin)]
            };
            for &(fp_req, nonfp_req) in splits {
                for point in clause_pattern_points(t, clause, mask, fp_req, nonfp_req) {
                    push(point, &mut out);
                }
            }
        }
    }
    out
}

/// Minimal named shapes of one clause under an infinite-coordinate mask,
/// with single-dimension bumps. Returns nothing when the pattern is
/// infeasible or its finite coordinates cannot be named.
fn clause_pattern_points(
    t: &TheorySpec,
    clause: &crate::spectrum::ShapeClause,
    mask: u32,
    fp_req: FinReq,
    nonfp_req: FinReq,
) -> Vec<MeasureVector> {
    let n = t.sig.sort_count();
    let has_s = t.sig.has_s();
    let base_query = |bumps: &[(usize, u64)], fp_bump: u64, nonfp_bump: u64| -> Query {
        let mut q = Query::tautology(t.sig);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                q.card[i] = DimQuery::infinite();
            } else {
                q.card[i] = DimQuery { lo: 1, hi: None, fin: FinReq::Fin };
            }
        }
        for &(d, b) in bumps {
            q.card[d].lo += b;
        }
        if has_s {
            q.fp = match fp_req {
                FinReq::Inf => DimQuery::infinite(),
                _ => DimQuery { lo: fp_bump, hi: None, fin: FinReq::Fin },
            };
            q.nonfp = match nonfp_req {
                FinReq::Inf => DimQuery::infinite(),
                _ => DimQuery { lo: nonfp_bump, hi: None, fin: FinReq::Fin },
            };
        }
        q
    };
    let mut bump_sets: Vec<(Vec<(usize, u64)>, u64, u64)> = vec![(Vec::new(), 0, 0)];
    for d in 0..n {
        if mask & (1 << d) == 0 {
            bump_sets.push((vec![(d, 1)], 0, 0));
            bump_sets.push((vec![(d, OMEGA_PROBE)], 0, 0));
        }
    }
    if has_s && fp_req != FinReq::Inf {
        bump_sets.push((Vec::new(), 1, 0));
        bump_sets.push((Vec::new(), OMEGA_PROBE, 0));
    }
    if has_s && nonfp_req != FinReq::Inf {
        bump_sets.push((Vec::new(), 0, 1));
        bump_sets.push((Vec::new(), 0, OMEGA_PROBE));
    }

    let mut out = Vec::new();
    'bumps: for (bumps, fp_bump, nonfp_bump) in bump_sets {
        let q0 = base_query(&bumps, fp_bump, nonfp_bump);
        if dominated_sat_clause(t, clause, &q0).is_false() {
            continue;
        }
        // name the finite coordinates greedily, smallest first
        let mut q = q0.clone();
        let mut cards: Vec<Card> = Vec::with_capacity(n);
        for i in 0..n {
            if mask & (1 << i) != 0 {
                cards.push(Card::Inf);
                continue;
            }
            match name_min(t, clause, &mut q, Dim::Card(i)) {
                Some(v) => cards.push(Card::Fin(v)),
                None => continue 'bumps,
            }
        }
        let (fp, nonfp) = if !has_s {
            (None, None)
        } else {
            let fp = match fp_req {
                FinReq::Inf => Card::Inf,
                _ => match name_min(t, clause, &mut q, Dim::Fp) {
                    Some(v) => Card::Fin(v),
                    None => continue 'bumps,
                },
            };
            let nonfp = match nonfp_req {
                FinReq::Inf => Card::Inf,
                _ => match name_min(t, clause, &mut q, Dim::Nonfp) {
                    Some(v) => Card::Fin(v),
                    None => continue 'bumps,
                },
            };
            (Some(fp), Some(nonfp))
        };
        let m = MeasureVector { card: cards, fp, nonfp };
        if t.member(&m).map(|v| v.is_true()).unwrap_or(false) && !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

enum Dim {
    Card(usize),
    Fp,
    Nonfp,
}

/// Pins one dimension to its least feasible named value within the query.
fn name_min(
    t: &TheorySpec,
    clause: &crate::spectrum::ShapeClause,
    q: &mut Query,
    dim: Dim,
) -> Option<u64> {
    let lo = match &dim {
        Dim::Card(i) => q.card[*i].lo.max(1),
        Dim::Fp => q.fp.lo,
        Dim::Nonfp => q.nonfp.lo,
    };
    let mut candidates: Vec<u64> = (lo..=lo + 26).collect();
    let mut st = lo;
    while let crate::oracle::MinImage::Known(v) = t.oracle.min_image_value_at_least(st, 0) {
        candidates.push(v.max(lo));
        st = v + 1;
    }
    candidates.sort();
    candidates.dedup();
    for v in candidates {
        let mut q2 = q.clone();
        match &dim {
            Dim::Card(i) => q2.card[*i] = DimQuery::exactly(v),
            Dim::Fp => q2.fp = DimQuery::exactly(v),
            Dim::Nonfp => q2.nonfp = DimQuery::exactly(v),
        }
        if dominated_sat_clause(t, clause, &q2).is_true() {
            *q = q2;
            return Some(v);
        }
    }
    None
}

/// The worst demand profile a satisfiable formula can force against a
/// point: its finite coordinates exactly, its infinite ones up to the
/// probe value.
fn point_demand(p: &MeasureVector) -> (Vec<u64>, u64, u64) {
    let dem = |c: Card| match c {
        Card::Fin(v) => v,
        Card::Inf => OMEGA_PROBE,
    };
    let cards = p.card.iter().map(|&c| dem(c)).collect();
    let fp = p.fp.map_or(0, dem);
    let nonfp = p.nonfp.map_or(0, dem);
    (cards, fp, nonfp)
}

fn describe_point(t: &TheorySpec, p: &MeasureVector) -> String {
    let mut parts = Vec::new();
    for (i, c) in p.card.iter().enumerate() {
        parts.push(format!("|{}| = {}", t.sig.sort_name(i), c));
    }
    if let (Some(fp), Some(nonfp)) = (p.fp, p.nonfp) {
        parts.push(format!("fp = {fp}"));
        parts.push(format!("nonfp = {nonfp}"));
    }
    parts.join(", ")
}

/// SI: every demand realizable through some point is also dominated by a
/// spectrum point with all sorts infinite.
fn exact_si(t: &TheorySpec) -> CheckReport {
    let mode = CheckMode::ExactSpectrum;
    let mut unknown = None;
    for p in representative_points(t) {
        let (cards, fp, nonfp) = point_demand(&p);
        let q = Query {
            card: cards.iter().map(|&v| DimQuery { lo: v, hi: None, fin: FinReq::Inf }).collect(),
            fp: DimQuery::at_least(fp),
            nonfp: DimQuery::at_least(nonfp),
        };
        match dominated_sat(t, &q) {
            Ok(ThreeVal::True) => {}
            Ok(ThreeVal::False) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Si,
                    mode,
                    format!(
                        "a formula forcing the shape of {} has no all-infinite model",
                        describe_point(t, &p)
                    ),
                );
            }
            Ok(ThreeVal::Unknown) => unknown = Some(describe_point(t, &p)),
            Err(e) => return CheckReport::unknown(&t.name, Property::Si, mode, e.to_string()),
        }
    }
    match unknown {
        None => CheckReport::ok(&t.name, Property::Si, mode),
        Some(d) => CheckReport::unknown(&t.name, Property::Si, mode, format!("undecided at {d}")),
    }
}

/// FM: every demand realizable through some point is also dominated by an
/// all-finite spectrum point.
fn exact_fm(t: &TheorySpec) -> CheckReport {
    let mode = CheckMode::ExactSpectrum;
    let mut unknown = None;
    for p in representative_points(t) {
        let (cards, fp, nonfp) = point_demand(&p);
        let q = Query {
            card: cards.iter().map(|&v| DimQuery::finite_at_least(v)).collect(),
            fp: DimQuery::finite_at_least(fp),
            nonfp: DimQuery::finite_at_least(nonfp),
        };
        match dominated_sat(t, &q) {
            Ok(ThreeVal::True) => {}
            Ok(ThreeVal::False) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Fm,
                    mode,
                    format!(
                        "a formula forcing the shape of {} has no all-finite model",
                        describe_point(t, &p)
                    ),
                );
            }
            Ok(ThreeVal::Unknown) => unknown = Some(describe_point(t, &p)),
            Err(e) => return CheckReport::unknown(&t.name, Property::Fm, mode, e.to_string()),
        }
    }
    match unknown {
        None => CheckReport::ok(&t.name, Property::Fm, mode),
        Some(d) => CheckReport::unknown(&t.name, Property::Fm, mode, format!("undecided at {d}")),
    }
}

/// SM: from every point, every pointwise-larger cardinality target in the
/// lattice is realized compatibly with the demands the point supports.
fn exact_sm(t: &TheorySpec) -> CheckReport {
    let mode = CheckMode::ExactSpectrum;
    let n = t.sig.sort_count();
    let mut unknown = None;
    for p in representative_points(t) {
        let (_, fp_dem, nonfp_dem) = point_demand(&p);
        // target patterns per dimension
        let mut choices: Vec<Vec<DimQuery>> = Vec::with_capacity(n);
        for &c in &p.card {
            let opts = match c {
                Card::Fin(v) => vec![
                    DimQuery::exactly(v),
                    DimQuery::exactly(v + 1),
                    DimQuery { lo: v + OMEGA_PROBE, hi: None, fin: FinReq::Fin },
                    DimQuery::infinite(),
                ],
                Card::Inf => vec![DimQuery::infinite()],
            };
            choices.push(opts);
        }
        let mut idx = vec![0usize; n];
        'targets: loop {
            let q = Query {
                card: (0..n).map(|i| choices[i][idx[i]]).collect(),
                fp: DimQuery::at_least(fp_dem),
                nonfp: DimQuery::at_least(nonfp_dem),
            };
            match dominated_sat(t, &q) {
                Ok(ThreeVal::True) => {}
                Ok(ThreeVal::False) => {
                    let target: Vec<String> = q
                        .card
                        .iter()
                        .map(|d| match d.fin {
                            FinReq::Inf => "w".to_string(),
                            _ if d.hi.is_some() => format!("{}", d.lo),
                            _ => format!(">= {}", d.lo),
                        })
                        .collect();
                    return CheckReport::fail(
                        &t.name,
                        Property::Sm,
                        mode,
                        format!(
                            "a model of shape {} cannot be raised to cardinalities ({})",
                            describe_point(t, &p),
                            target.join(", ")
                        ),
                    );
                }
                Ok(ThreeVal::Unknown) => unknown = Some(describe_point(t, &p)),
                Err(e) => {
                    return CheckReport::unknown(&t.name, Property::Sm, mode, e.to_string())
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'targets;
                }
                i -= 1;
                if idx[i] + 1 < choices[i].len() {
                    idx[i] += 1;
                    for x in idx.iter_mut().skip(i + 1) {
                        *x = 0;
                    }
                    continue 'targets;
                }
                idx[i] = 0;
            }
        }
    }
    match unknown {
        None => CheckReport::ok(&t.name, Property::Sm, mode),
        Some(d) => CheckReport::unknown(&t.name, Property::Sm, mode, format!("undecided at {d}")),
    }
}

/// SF: every point with an infinite coordinate admits an all-finite point
/// between the demands it supports and the point itself. Fully finite
/// points shrink to themselves.
fn exact_sf(t: &TheorySpec) -> CheckReport {
    let mode = CheckMode::ExactSpectrum;
    let mut unknown = None;
    for p in representative_points(t) {
        if p.card.iter().all(|c| !c.is_inf()) {
            continue;
        }
        let (_, fp_dem, nonfp_dem) = point_demand(&p);
        let q = Query {
            card: p
                .card
                .iter()
                .map(|&c| match c {
                    Card::Fin(v) => DimQuery::exactly(v),
                    Card::Inf => DimQuery { lo: OMEGA_PROBE, hi: None, fin: FinReq::Fin },
                })
                .collect(),
            fp: DimQuery::finite_at_least(fp_dem.min(OMEGA_PROBE)),
            nonfp: DimQuery::finite_at_least(nonfp_dem.min(OMEGA_PROBE)),
        };
        match dominated_sat(t, &q) {
            Ok(ThreeVal::True) => {}
            Ok(ThreeVal::False) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Sf,
                    mode,
                    format!(
                        "a model of shape {} admits no finite model below it",
                        describe_point(t, &p)
                    ),
                );
            }
            Ok(ThreeVal::Unknown) => unknown = Some(describe_point(t, &p)),
            Err(e) => return CheckReport::unknown(&t.name, Property::Sf, mode, e.to_string()),
        }
    }
    match unknown {
        None => CheckReport::ok(&t.name, Property::Sf, mode),
        Some(d) => CheckReport::unknown(&t.name, Property::Sf, mode, format!("undecided at {d}")),
    }
}
// --- corpus checkers ---------------------------------------------------------

fn corpus_si(t: &TheorySpec, corpus: &Corpus, bounds: &Bounds) -> CheckReport {
    let mode = CheckMode::Corpus;
    for phi in &corpus.formulas {
        match decide::has_model_with(t, phi, bounds, FinReq::Inf) {
            Ok(Some(true)) | Ok(None) => {}
            Ok(Some(false)) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Si,
                    mode,
                    format!("satisfiable formula without all-infinite model: {phi}"),
                );
            }
            Err(e) => return CheckReport::unknown(&t.name, Property::Si, mode, e.to_string()),
        }
    }
    CheckReport::ok(&t.name, Property::Si, mode)
}

fn corpus_fm(t: &TheorySpec, corpus: &Corpus, bounds: &Bounds) -> CheckReport {
    let mode = CheckMode::Corpus;
    for phi in &corpus.formulas {
        match decide::has_model_with(t, phi, bounds, FinReq::Fin) {
            Ok(Some(true)) | Ok(None) => {}
            Ok(Some(false)) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Fm,
                    mode,
                    format!("satisfiable formula without all-finite model: {phi}"),
                );
            }
            Err(e) => return CheckReport::unknown(&t.name, Property::Fm, mode, e.to_string()),
        }
    }
    CheckReport::ok(&t.name, Property::Fm, mode)
}

fn corpus_sm(t: &TheorySpec, corpus: &Corpus, bounds: &Bounds) -> CheckReport {
    let mode = CheckMode::Corpus;
    for phi in &corpus.formulas {
        match decide::smooth_counterexample(t, phi, bounds) {
            Ok(None) => {}
            Ok(Some(evidence)) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Sm,
                    mode,
                    format!("{evidence} (formula {phi})"),
                );
            }
            Err(e) => return CheckReport::unknown(&t.name, Property::Sm, mode, e.to_string()),
        }
    }
    CheckReport::ok(&t.name, Property::Sm, mode)
}

fn corpus_sf(t: &TheorySpec, corpus: &Corpus, bounds: &Bounds) -> CheckReport {
    let mode = CheckMode::Corpus;
    for phi in &corpus.formulas {
        match decide::stably_finite_counterexample(t, phi, bounds) {
            Ok(None) => {}
            Ok(Some(evidence)) => {
                return CheckReport::fail(
                    &t.name,
                    Property::Sf,
                    mode,
                    format!("{evidence} (formula {phi})"),
                );
            }
            Err(e) => return CheckReport::unknown(&t.name, Property::Sf, mode, e.to_string()),
        }
    }
    CheckReport::ok(&t.name, Property::Sf, mode)
}

fn corpus_cv(t: &TheorySpec, corpus: &Corpus, bounds: &Bounds) -> CheckReport {
    let mode = CheckMode::Corpus;
    let mut unknown = None;
    for (cube, pairs) in &corpus.convexity_instances {
        match decide::check_convexity_instance(t, cube, pairs, bounds) {
            Ok(decide::ConvexityOutcome::Counterexample { .. }) => {
                let pair_list: Vec<String> =
                    pairs.iter().map(|(a, b)| format!("{a}={b}")).collect();
                return CheckReport::fail(
                    &t.name,
                    Property::Cv,
                    mode,
                    format!("cube {cube} entails ({}) but no single disjunct", pair_list.join(" | ")),
                );
            }
            Ok(_) => {}
            Err(decide::DecideError::Undecided(reason)) => unknown = Some(reason),
            Err(e) => return CheckReport::unknown(&t.name, Property::Cv, mode, e.to_string()),
        }
    }
    match unknown {
        None => CheckReport::ok(&t.name, Property::Cv, mode),
        Some(r) => CheckReport::unknown(&t.name, Property::Cv, mode, r),
    }
}

/// Computes the full desk-checkable vector: SI/SM/FM/SF exactly, CV on the
/// corpus. FW/SW are not decided here (negative witnessability is not
/// falsifiable by search); callers combine witness verification results.
pub fn compute_vector(t: &TheorySpec, bounds: &Bounds) -> PropertyVector {
    let mut v = PropertyVector {
        si: ThreeVal::Unknown,
        sm: ThreeVal::Unknown,
        fw: ThreeVal::Unknown,
        sw: ThreeVal::Unknown,
        cv: ThreeVal::Unknown,
        fm: ThreeVal::Unknown,
        sf: ThreeVal::Unknown,
    };
    v.si = check_property(t, Property::Si, CheckMode::ExactSpectrum, bounds).verdict;
    v.sm = check_property(t, Property::Sm, CheckMode::ExactSpectrum, bounds).verdict;
    v.fm = check_property(t, Property::Fm, CheckMode::ExactSpectrum, bounds).verdict;
    v.sf = check_property(t, Property::Sf, CheckMode::ExactSpectrum, bounds).verdict;
    v.cv = check_property(t, Property::Cv, CheckMode::Corpus, bounds).verdict;
    v
}

// ---------------------------------------------------------------------------

/// Variables named for evidence formulas.
pub fn fresh_vars(prefix: &str, sort: usize, count: u64) -> Vec<Var> {
    (1..=count).map(|i| Var::new(format!("{prefix}{i}"), sort)).collect()
}

/// A formula forcing the given finite demand profile: per-sort distinct
/// variables plus fixed-point and non-fixed-point literals.
pub fn demand_formula(sig: Signature, cards: &[u64], fp: u64, nonfp: u64) -> QfFormula {
    let mut parts = Vec::new();
    for (i, &c) in cards.iter().enumerate() {
        let vars = fresh_vars(&format!("d{i}_"), i, c);
        if !vars.is_empty() {
            parts.push(QfFormula::all_distinct(&vars));
        }
    }
    if sig.has_s() {
        let fps = fresh_vars("p", 0, fp);
        for v in &fps {
            parts.push(QfFormula::eq(
                crate::formula::Term::SApp { depth: 1, var: v.clone() },
                crate::formula::Term::Var(v.clone()),
            ));
        }
        if !fps.is_empty() {
            parts.push(QfFormula::all_distinct(&fps));
        }
        let nfps = fresh_vars("q", 0, nonfp);
        for v in &nfps {
            parts.push(QfFormula::neq(
                crate::formula::Term::SApp { depth: 1, var: v.clone() },
                crate::formula::Term::Var(v.clone()),
            ));
        }
        if !nfps.is_empty() {
            parts.push(QfFormula::all_distinct(&nfps));
        }
    }
    QfFormula::And(parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(b: [bool; 7]) -> PropertyVector {
        PropertyVector::from_bools(b)
    }

    #[test]
    fn implications_flag_violations() {
        let meta1 = SigMeta { sort_count: 1, empty_signature: true };
        let all_true = tf([true; 7]);
        assert!(check_implications(&all_true, meta1).is_empty());

        // SW without SF
        let mut v = all_true.clone();
        v.sw = ThreeVal::True;
        v.sf = ThreeVal::False;
        let viols = check_implications(&v, meta1);
        assert!(viols.iter().any(|x| x.rule == "sw_implies_sf"));

        // one-sorted FM without SF
        let v = tf([true, true, true, false, true, true, false]);
        let viols = check_implications(&v, meta1);
        assert!(viols.iter().any(|x| x.rule == "one_sorted_fm_implies_sf"));

        // the same vector is fine over a non-empty two-sorted signature
        let meta2 = SigMeta { sort_count: 2, empty_signature: false };
        assert!(check_implications(&v, meta2).is_empty());
    }

    #[test]
    fn erased_rows_survivors() {
        // enumerating all 128 vectors and keeping those consistent with the
        // core rules at the most permissive metadata leaves exactly the 36
        // row families of the taxonomy table
        let meta = SigMeta { sort_count: 2, empty_signature: false };
        let mut survivors = 0;
        for bits in 0..128u32 {
            let v = tf([
                bits & 64 != 0,
                bits & 32 != 0,
                bits & 16 != 0,
                bits & 8 != 0,
                bits & 4 != 0,
                bits & 2 != 0,
                bits & 1 != 0,
            ]);
            if check_core_implications(&v, meta).is_empty() {
                survivors += 1;
            }
        }
        assert_eq!(survivors, 36);
    }
}
