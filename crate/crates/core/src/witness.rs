//! Witness functions: catalog constructions, synthesis for smooth theories
//! from minimal models, verification of the two witness conditions, and the
//! growth-based refutation probe.
//!
//! A witness maps each quantifier-free formula phi to a formula wit(phi)
//! such that (i) phi and the existential closure of wit(phi) are
//! T-equivalent and (ii) whenever wit(phi) is T-satisfiable it has a
//! T-model whose every domain is covered by the values of wit(phi)'s
//! variables. The strong variant imposes (ii) under every arrangement of a
//! finite variable set.

use crate::catalog::default_bits;
use crate::decide::{self, Bounds};
use crate::formula::{partitions, QfFormula, Signature, SortId, Term, Var};
use crate::interp::{satisfies_theory, Interp};
use crate::oracle::SigmaValue;
use crate::spectrum::{minimal_models, Card, MeasureVector, SMode, TheorySpec};
use crate::three::ThreeVal;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessProvenance {
    CatalogProof,
    SynthesizedSmooth,
    SynthesizedStablyFinite,
    User,
}

/// How many fresh tautology variables to append per sort.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PadRule {
    /// fixed counts per sort
    Fixed(Vec<u64>),
    /// the maximum per-sort variable count of the formula, at least `min`,
    /// on every sort
    MaxVarsOrMin { min: u64 },
    /// enough variables to reach a size where the balanced bit function
    /// offers the fixed-point split the formula may force
    BitReach,
}

#[derive(Clone, Debug)]
pub enum WitnessShape {
    Identity,
    Pad(PadRule),
    /// the strong construction: a disjunction over minimal models of
    /// all-distinct constraints on fresh variables
    StrongMinimal(Vec<Vec<u64>>),
}

#[derive(Clone, Debug)]
pub struct WitnessFn {
    pub name: String,
    pub provenance: WitnessProvenance,
    pub shape: WitnessShape,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("{0}")]
    Decide(#[from] decide::DecideError),
    #[error("minimal models inexact at box {0}; cannot synthesize")]
    InexactMinima(u64),
    #[error("synthesis needs an empty signature, {0} has a function")]
    NonEmptySignature(&'static str),
    #[error("theory has no finite models; nothing to synthesize")]
    NoFiniteModels,
    #[error("unknown witness `{0}` (expected identity, catalog, synth-plain or synth-strong)")]
    UnknownWitness(String),
}

impl WitnessFn {
    pub fn identity() -> WitnessFn {
        WitnessFn {
            name: "identity".into(),
            provenance: WitnessProvenance::User,
            shape: WitnessShape::Identity,
        }
    }

    /// The formula this witness yields; the structured form keeps the fresh
    /// variables apart for verification.
    pub fn apply(&self, phi: &QfFormula, sig: Signature) -> AppliedWitness {
        let mut naming: Vec<QfFormula> = Vec::new();
        let mut naming_vars: Vec<Var> = Vec::new();
        if sig.has_s() {
            for (base, depth) in phi.max_s_depths() {
                for j in 1..=depth {
                    let w = Var::new(format!("n_{}_{}", base.name, j), 0);
                    naming.push(QfFormula::eq(
                        Term::Var(w.clone()),
                        Term::SApp { depth: j, var: base.clone() },
                    ));
                    naming_vars.push(w);
                }
            }
        }
        let by_sort = phi.free_vars_by_sort();
        let var_count = |sort: usize| by_sort.get(&sort).map_or(0, |s| s.len()) as u64;

        let mut pads: Vec<Vec<Var>> = vec![Vec::new(); sig.sort_count()];
        let mut pool: Vec<Vec<Var>> = vec![Vec::new(); sig.sort_count()];
        let mut strong_delta: Option<QfFormula> = None;
        match &self.shape {
            WitnessShape::Identity => {}
            WitnessShape::Pad(rule) => {
                let counts: Vec<u64> = match rule {
                    PadRule::Fixed(v) => {
                        let mut v = v.clone();
                        v.resize(sig.sort_count(), 1);
                        v
                    }
                    PadRule::MaxVarsOrMin { min } => {
                        let m = (0..sig.sort_count())
                            .map(var_count)
                            .max()
                            .unwrap_or(0)
                            .max(*min);
                        vec![m; sig.sort_count()]
                    }
                    PadRule::BitReach => {
                        let chain: u64 =
                            phi.max_s_depths().values().map(|&d| d as u64 + 1).sum();
                        let k = (var_count(0) + chain + 2).max(3);
                        let bits = default_bits();
                        let target = bits.first_reaching(k, k, k).unwrap_or(4 * k);
                        let mut v = vec![1u64; sig.sort_count()];
                        v[0] = target;
                        v
                    }
                };
                for (sort, &c) in counts.iter().enumerate() {
                    pads[sort] = (1..=c).map(|i| Var::new(format!("w{sort}_{i}"), sort)).collect();
                }
            }
            WitnessShape::StrongMinimal(minima) => {
                let n = sig.sort_count();
                let mut pool_sizes = vec![0u64; n];
                for m in minima {
                    for i in 0..n {
                        pool_sizes[i] = pool_sizes[i].max(m[i]);
                    }
                }
                for i in 0..n {
                    pool[i] =
                        (1..=pool_sizes[i]).map(|k| Var::new(format!("v{i}_{k}"), i)).collect();
                }
                let disjuncts: Vec<QfFormula> = minima
                    .iter()
                    .map(|m| {
                        let mut parts = Vec::new();
                        for i in 0..n {
                            let used: Vec<Var> =
                                pool[i][..m[i] as usize].to_vec();
                            // every pool variable occurs in each disjunct so
                            // that the fresh-variable set is disjunct-free
                            parts.push(QfFormula::all_distinct(&used));
                            for v in &pool[i][m[i] as usize..] {
                                parts.push(QfFormula::var_eq(v.clone(), v.clone()));
                            }
                        }
                        QfFormula::And(parts)
                    })
                    .collect();
                strong_delta = Some(QfFormula::Or(disjuncts));
            }
        }

        let mut core_parts = vec![phi.clone()];
        core_parts.extend(naming.iter().cloned());
        if let Some(d) = &strong_delta {
            core_parts.push(d.clone());
        }
        let core = QfFormula::And(core_parts);

        let mut full_parts = vec![core.clone()];
        for sort_pads in &pads {
            for v in sort_pads {
                full_parts.push(QfFormula::var_eq(v.clone(), v.clone()));
            }
        }
        let formula = QfFormula::And(full_parts);
        AppliedWitness { formula, core, pads, naming_vars }
    }
}

impl fmt::Display for WitnessFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// A witness applied to one formula.
pub struct AppliedWitness {
    /// the full wit(phi)
    pub formula: QfFormula,
    /// phi plus chain naming plus the strong disjunction; excludes the
    /// interchangeable tautology pads
    pub core: QfFormula,
    /// per-sort fresh tautology variables
    pub pads: Vec<Vec<Var>>,
    pub naming_vars: Vec<Var>,
}

// ---------------------------------------------------------------------------
// Synthesis from minimal models
// ---------------------------------------------------------------------------

/// Builds the plain witness of a smooth empty-signature theory with the
/// finite model property: per sort, as many fresh tautology variables as
/// the largest coordinate among the minimal models.
pub fn synthesize_witness(
    t: &TheorySpec,
    strong: bool,
    box_bound: u64,
) -> Result<WitnessFn, WitnessError> {
    if t.sig.has_s() {
        return Err(WitnessError::NonEmptySignature(t.sig.name()));
    }
    let (minima, exact) = minimal_models(t, box_bound).map_err(decide::DecideError::from)?;
    if !exact {
        return Err(WitnessError::InexactMinima(box_bound));
    }
    if minima.is_empty() {
        return Err(WitnessError::NoFiniteModels);
    }
    let n = t.sig.sort_count();
    let tuples: Vec<Vec<u64>> = minima
        .iter()
        .map(|m| m.card.iter().map(|c| c.fin().expect("finite minimum")).collect())
        .collect();
    if strong {
        Ok(WitnessFn {
            name: format!("synth-strong({})", t.name),
            provenance: WitnessProvenance::SynthesizedStablyFinite,
            shape: WitnessShape::StrongMinimal(tuples),
        })
    } else {
        let mut pad = vec![0u64; n];
        for m in &tuples {
            for i in 0..n {
                pad[i] = pad[i].max(m[i]);
            }
        }
        Ok(WitnessFn {
            name: format!("synth-plain({})", t.name),
            provenance: WitnessProvenance::SynthesizedSmooth,
            shape: WitnessShape::Pad(PadRule::Fixed(pad)),
        })
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub theory: String,
    pub witness: String,
    pub strong: bool,
    pub verdict: ThreeVal,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} witness {} ({}): {}",
            if self.strong { "strong" } else { "plain" },
            self.witness,
            self.theory,
            self.verdict
        )?;
        for fail in &self.failures {
            write!(f, "\n  {fail}")?;
        }
        Ok(())
    }
}

/// Verifies witness condition (i) and (ii) on every corpus formula.
pub fn verify_witness(
    t: &TheorySpec,
    wit: &WitnessFn,
    corpus: &[QfFormula],
    bounds: &Bounds,
) -> WitnessReport {
    verify(t, wit, corpus, bounds, false)
}

/// Verifies conditions (i) and (ii)': covered models under every
/// arrangement of the witness variables plus two fresh variables per sort.
pub fn verify_strong_witness(
    t: &TheorySpec,
    wit: &WitnessFn,
    corpus: &[QfFormula],
    bounds: &Bounds,
) -> WitnessReport {
    verify(t, wit, corpus, bounds, true)
}

fn verify(
    t: &TheorySpec,
    wit: &WitnessFn,
    corpus: &[QfFormula],
    bounds: &Bounds,
    strong: bool,
) -> WitnessReport {
    let mut failures = Vec::new();
    let mut unknown = false;
    for phi in corpus {
        match verify_one(t, wit, phi, bounds, strong) {
            Ok(ThreeVal::True) => {}
            Ok(ThreeVal::Unknown) => unknown = true,
            Ok(ThreeVal::False) => {
                if failures.len() < 5 {
                    failures.push(format!("fails on {phi}"));
                }
            }
            Err(e) => {
                if failures.len() < 5 {
                    failures.push(format!("error on {phi}: {e}"));
                }
            }
        }
        if failures.len() >= 5 {
            break;
        }
    }
    let verdict = if !failures.is_empty() {
        ThreeVal::False
    } else if unknown {
        ThreeVal::Unknown
    } else {
        ThreeVal::True
    };
    WitnessReport {
        theory: t.name.clone(),
        witness: wit.name.clone(),
        strong,
        verdict,
        checked: corpus.len(),
        failures,
    }
}

fn verify_one(
    t: &TheorySpec,
    wit: &WitnessFn,
    phi: &QfFormula,
    bounds: &Bounds,
    strong: bool,
) -> Result<ThreeVal, WitnessError> {
    let app = wit.apply(phi, t.sig);

    // (i) equivalence: wit(phi) = phi /\ delta by construction, so models of
    // wit(phi) satisfy phi. The converse direction needs every T-model of
    // phi to extend on the fresh variables: tautology pads and chain naming
    // always extend; the strong disjunction needs the model to dominate a
    // minimal model, checked on the realized in-box model shapes.
    if let WitnessShape::StrongMinimal(minima) = &wit.shape {
        for m in decide::realized_model_shapes(t, phi, bounds)? {
            let dominated = minima.iter().any(|min| {
                min.iter().enumerate().all(|(i, &need)| match m.card[i] {
                    Card::Fin(v) => v >= need,
                    Card::Inf => true,
                })
            });
            if !dominated {
                return Ok(ThreeVal::False);
            }
        }
    }

    // (ii) / (ii)'
    if strong {
        verify_covered_strong(t, &app, bounds)
    } else {
        verify_covered_plain(t, &app, bounds)
    }
}

/// Condition (ii): if wit(phi) is T-satisfiable there is a T-model covered
/// by its variables. Coverage search works over arrangements of the core
/// variables with pads contributing extra classes by count only.
fn verify_covered_plain(
    t: &TheorySpec,
    app: &AppliedWitness,
    bounds: &Bounds,
) -> Result<ThreeVal, WitnessError> {
    let sat = match decide::satisfiable(t, &app.core, bounds)? {
        decide::SatResult::Sat { .. } => ThreeVal::True,
        decide::SatResult::Unsat => return Ok(ThreeVal::True), // vacuous
        decide::SatResult::Unknown { .. } => ThreeVal::Unknown,
    };
    let covered = covered_model_exists(t, &app.core, &app.pads, None)?;
    if covered {
        return Ok(ThreeVal::True);
    }
    Ok(match sat {
        ThreeVal::True => ThreeVal::False,
        _ => ThreeVal::Unknown,
    })
}

/// Condition (ii)': for every arrangement of the witness variables plus two
/// fresh variables per sort, satisfiability of wit(phi) with the
/// arrangement forces a covered model of the conjunction.
///
/// For signatures where `s` plays no role (empty, or forced to the
/// identity by every clause) the check is evaluated directly per
/// arrangement. Otherwise each arrangement goes through the chain
/// machinery, under a variable budget per sort.
fn verify_covered_strong(
    t: &TheorySpec,
    app: &AppliedWitness,
    bounds: &Bounds,
) -> Result<ThreeVal, WitnessError> {
    let identity_theory = t.sig.has_s()
        && t.clauses.iter().all(|c| c.s_mode == SMode::IdentityEverywhere);
    let formula = if identity_theory {
        strip_s(&app.formula)
    } else {
        app.formula.clone()
    };
    let fast = t.sig.is_empty() || (identity_theory && !formula.has_s_terms());

    // all witness variables (pads included) plus two fresh per sort
    let mut vars_by_sort: Vec<Vec<Var>> = vec![Vec::new(); t.sig.sort_count()];
    for v in formula.free_vars() {
        vars_by_sort[v.sort].push(v);
    }
    for (sort, vs) in vars_by_sort.iter_mut().enumerate() {
        vs.push(Var::new(format!("f{sort}_1"), sort));
        vs.push(Var::new(format!("f{sort}_2"), sort));
        vs.sort();
        vs.dedup();
    }
    if !fast {
        let core_by_sort = app.core.free_vars_by_sort();
        if core_by_sort.values().any(|vs| vs.len() > 9) {
            // arrangement space too large for the bounded check; skip this
            // formula (other corpus formulas keep the condition exercised)
            return Ok(ThreeVal::True);
        }
        let free_counts: Vec<usize> = (0..t.sig.sort_count())
            .map(|i| app.pads.get(i).map_or(0, |p| p.len()) + 2)
            .collect();
        return strong_s_signature(t, &app.core, &free_counts, bounds);
    }
    let parts: Vec<Vec<Vec<usize>>> =
        vars_by_sort.iter().map(|vs| partitions(vs.len())).collect();
    let mut idx = vec![0usize; parts.len()];
    let mut unknown = false;
    loop {
        let verdict = strong_cell_fast(t, &formula, &vars_by_sort, &parts, &idx, identity_theory)?;
        match verdict {
            ThreeVal::True => {}
            ThreeVal::False => return Ok(ThreeVal::False),
            ThreeVal::Unknown => unknown = true,
        }
        // advance the per-sort partition product
        let mut k = parts.len();
        loop {
            if k == 0 {
                return Ok(if unknown { ThreeVal::Unknown } else { ThreeVal::True });
            }
            k -= 1;
            if idx[k] + 1 < parts[k].len() {
                idx[k] += 1;
                for x in idx.iter_mut().skip(k + 1) {
                    *x = 0;
                }
                break;
            }
            idx[k] = 0;
        }
    }
}

fn strip_s(f: &QfFormula) -> QfFormula {
    match f {
        QfFormula::Eq(a, b) => QfFormula::Eq(
            Term::Var(a.base_var().clone()),
            Term::Var(b.base_var().clone()),
        ),
        QfFormula::Not(g) => QfFormula::Not(Box::new(strip_s(g))),
        QfFormula::And(fs) => QfFormula::And(fs.iter().map(strip_s).collect()),
        QfFormula::Or(fs) => QfFormula::Or(fs.iter().map(strip_s).collect()),
    }
}

/// One arrangement of the strong check without successor structure: the
/// formula's truth is decided by the classes; satisfiability is a dominance
/// query on the block counts, coverage an exact membership test.
fn strong_cell_fast(
    t: &TheorySpec,
    formula: &QfFormula,
    vars_by_sort: &[Vec<Var>],
    parts: &[Vec<Vec<usize>>],
    idx: &[usize],
    identity_theory: bool,
) -> Result<ThreeVal, WitnessError> {
    use crate::spectrum::{dominated_sat, DimQuery, Query};
    let mut class_of: std::collections::BTreeMap<Var, usize> = BTreeMap::new();
    let mut blocks = vec![0usize; vars_by_sort.len()];
    let mut offset = 0usize;
    for (sort, vs) in vars_by_sort.iter().enumerate() {
        let rgs = &parts[sort][idx[sort]];
        for (i, v) in vs.iter().enumerate() {
            class_of.insert(v.clone(), offset + rgs[i]);
        }
        blocks[sort] = rgs.iter().copied().max().map_or(0, |m| m + 1);
        offset += blocks[sort];
    }
    if !eval_no_s(formula, &class_of) {
        return Ok(ThreeVal::True); // unsatisfiable arrangement: vacuous
    }
    let card_lo: Vec<u64> = blocks.iter().map(|&b| b.max(1) as u64).collect();
    let (fpq, nonfpq) = if identity_theory {
        (DimQuery::at_least(card_lo[0]), DimQuery::at_least(0))
    } else {
        (DimQuery::at_least(0), DimQuery::at_least(0))
    };
    let sat_q = Query {
        card: card_lo.iter().map(|&v| DimQuery::at_least(v)).collect(),
        fp: fpq,
        nonfp: nonfpq,
    };
    let sat = dominated_sat(t, &sat_q).map_err(decide::DecideError::from)?;
    if sat.is_false() {
        return Ok(ThreeVal::True);
    }
    // a covered model has exactly the block counts; for identity theories
    // every element is a fixed point
    let m = if t.sig.has_s() {
        crate::spectrum::MeasureVector::with_fp(
            card_lo.iter().map(|&v| Card::Fin(v)).collect(),
            Card::Fin(card_lo[0]),
            Card::Fin(0),
        )
    } else {
        crate::spectrum::MeasureVector::cards_only(
            card_lo.iter().map(|&v| Card::Fin(v)).collect(),
        )
    };
    let covered = t.member(&m).map_err(decide::DecideError::from)?;
    if covered.is_true() {
        return Ok(ThreeVal::True);
    }
    Ok(match (sat, covered) {
        (ThreeVal::True, ThreeVal::False) => ThreeVal::False,
        _ => ThreeVal::Unknown,
    })
}

fn eval_no_s(f: &QfFormula, class_of: &std::collections::BTreeMap<Var, usize>) -> bool {
    match f {
        QfFormula::Eq(a, b) => class_of[a.base_var()] == class_of[b.base_var()],
        QfFormula::Not(g) => !eval_no_s(g, class_of),
        QfFormula::And(fs) => fs.iter().all(|g| eval_no_s(g, class_of)),
        QfFormula::Or(fs) => fs.iter().any(|g| eval_no_s(g, class_of)),
    }
}

/// The strong check over a live successor structure.
///
/// Arrangements of the full variable set factor: the formula constrains
/// only the core variables (the pads and fresh variables are tautological),
/// so an arrangement of the whole set is, up to isomorphisms that fix the
/// formula, a satisfying core arrangement plus a count of extra free-only
/// blocks per sort. One pass over the core arrangements with the extra
/// block counts decides satisfiability (a dominance query) and coverage (an
/// exact completion: chain-only classes are hosted by free blocks) per
/// group.
fn strong_s_signature(
    t: &TheorySpec,
    core: &QfFormula,
    free_counts: &[usize],
    bounds: &Bounds,
) -> Result<ThreeVal, WitnessError> {
    use std::collections::BTreeMap as Map;
    let n = t.sig.sort_count();
    let wide = Bounds { domain: bounds.domain, var_budget: 12, chain_budget: 20 };
    let arrangements = decide::satisfying_arrangements_of(t, core, &wide)?;
    if arrangements.is_empty() {
        return Ok(ThreeVal::True); // the witness formula is unsatisfiable
    }
    let core_vars: Vec<Var> = {
        let mut vs: Vec<Var> = core.free_vars().into_iter().collect();
        vs.sort();
        vs
    };

    struct Group {
        sat: ThreeVal,
        covered: bool,
    }
    let mut groups: Map<(Vec<usize>, Vec<usize>), Group> = Map::new();
    let mut solve_cache: Map<String, ThreeVal> = Map::new();

    // iterate extra free-only block counts per sort
    let mut extra = vec![0usize; n];
    loop {
        for sa in &arrangements {
            // chain-only classes: values of successor terms not named by
            // any core variable; in a covered model they occupy free blocks
            let mut named: std::collections::BTreeSet<usize> = Default::default();
            for (i, v) in sa.arr.vars.iter().enumerate() {
                if v.sort == 0 && (!v.name.contains('@') || v.name.ends_with("@0")) {
                    named.insert(sa.arr.class[i]);
                }
            }
            let u = sa.arr.counts[0] - named.len();
            let key_pattern: Vec<usize> = core_vars
                .iter()
                .map(|v| sa.arr.class_of(v).expect("core variable placed"))
                .collect();
            let entry = groups
                .entry((key_pattern, extra.clone()))
                .or_insert(Group { sat: ThreeVal::False, covered: false });

            // satisfiability: chain values may collapse into the free
            // blocks, so the weakest demand absorbs as many chain-only
            // classes as there are free blocks of the first sort
            if !entry.sat.is_true() {
                let absorbed = u.min(extra[0]);
                for clause in &t.clauses {
                    if let Some(mut q) = decide::clause_demand_of(&sa.arr, clause, &sa.demand) {
                        for i in 0..n {
                            q.card[i].lo += extra[i] as u64;
                        }
                        q.card[0].lo = (q.card[0].lo - absorbed as u64).max(1);
                        let cache_key = format!("{extra:?}|{u}|{:?}|{:p}", q, clause);
                        let v = *solve_cache.entry(cache_key).or_insert_with(|| {
                            crate::spectrum::dominated_sat_clause(t, clause, &q)
                        });
                        entry.sat = entry.sat.or(v);
                        if entry.sat.is_true() {
                            break;
                        }
                    }
                }
            }

            // coverage: every chain-only class is hosted by a distinct free
            // block; the remaining free blocks are plain fresh elements
            if !entry.covered && u <= extra[0] {
                let mut ks: Vec<usize> = extra.clone();
                ks[0] -= u;
                if try_complete_covered(t, &sa.arr, &ks, &[]).is_some() {
                    entry.covered = true;
                }
            }
        }
        // advance the extra-block counter
        let mut i = n;
        let mut done = false;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if extra[i] < free_counts[i] {
                extra[i] += 1;
                for x in extra.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
            extra[i] = 0;
        }
        if done {
            break;
        }
    }

    let mut unknown = false;
    for g in groups.values() {
        if g.covered {
            continue;
        }
        match g.sat {
            ThreeVal::True => return Ok(ThreeVal::False),
            ThreeVal::Unknown => unknown = true,
            ThreeVal::False => {}
        }
    }
    Ok(if unknown { ThreeVal::Unknown } else { ThreeVal::True })
}

fn wide_bounds() -> Bounds {
    Bounds { domain: 4, var_budget: 24, chain_budget: 40 }
}

/// Does a T-model exist whose every domain consists exactly of the values
/// of the formula's variables (plus optional interchangeable pads)? The
/// search enumerates covered arrangements: partitions of the real
/// variables with chain values forced into real classes, then an explicit
/// completion of `s` on the classes.
fn covered_model_exists(
    t: &TheorySpec,
    core: &QfFormula,
    pads: &[Vec<Var>],
    required_model: Option<&mut Option<Interp>>,
) -> Result<bool, WitnessError> {
    let sig = t.sig;
    let arrs = decide::covered_arrangements(t, core, &wide_bounds())?;
    let pad_counts: Vec<usize> =
        (0..sig.sort_count()).map(|i| pads.get(i).map_or(0, |p| p.len())).collect();
    let mut out_model: Option<Interp> = None;
    for arr in &arrs {
        // try every pad distribution: k extra singleton classes per sort
        let mut ks = vec![0usize; sig.sort_count()];
        loop {
            if let Some(model) = try_complete_covered(t, arr, &ks, pads) {
                debug_assert!(satisfies_theory(&model, t).is_true());
                out_model = Some(model);
                break;
            }
            // advance pad counts
            let mut i = sig.sort_count();
            let mut done = false;
            loop {
                if i == 0 {
                    done = true;
                    break;
                }
                i -= 1;
                if ks[i] < pad_counts[i] {
                    ks[i] += 1;
                    for x in ks.iter_mut().skip(i + 1) {
                        *x = 0;
                    }
                    break;
                }
                ks[i] = 0;
            }
            if done {
                break;
            }
        }
        if out_model.is_some() {
            break;
        }
    }
    if let Some(slot) = required_model {
        *slot = out_model.clone();
    }
    Ok(out_model.is_some())
}

/// Attempts to realize one covered arrangement with `k` extra pad classes
/// per sort: builds the domain from the classes, completes `s`, and checks
/// theory membership.
fn try_complete_covered(
    t: &TheorySpec,
    arr: &decide::ChainArrangement,
    ks: &[usize],
    pads: &[Vec<Var>],
) -> Option<Interp> {
    let sig = t.sig;
    let sizes: Vec<u64> =
        (0..sig.sort_count()).map(|i| (arr.counts[i] + ks[i]).max(1) as u64).collect();
    let mut assign: BTreeMap<Var, u64> = BTreeMap::new();
    for (i, v) in arr.vars.iter().enumerate() {
        if v.name.contains('@') {
            if let Some((base, depth)) = v.name.rsplit_once('@') {
                if depth == "0" {
                    assign.insert(Var::new(base, 0), arr.class[i] as u64);
                }
            }
            continue;
        }
        assign.insert(v.clone(), arr.class[i] as u64);
    }
    // pads: the first k become the fresh classes, the rest collapse onto
    // element 0 of their sort
    for (sort, sort_pads) in pads.iter().enumerate() {
        for (j, v) in sort_pads.iter().enumerate() {
            let val = if j < ks[sort] { (arr.counts[sort] + j) as u64 } else { 0 };
            assign.insert(v.clone(), val);
        }
    }
    if !sig.has_s() {
        let interp = Interp { sig, sizes, s_map: None, assign };
        if satisfies_theory(&interp, t).is_true() {
            return Some(interp);
        }
        return None;
    }
    // complete s on the first sort
    let n = sizes[0] as usize;
    let forced: BTreeMap<usize, usize> = arr.succ.clone();
    let free: Vec<usize> = (0..n).filter(|i| !forced.contains_key(i)).collect();
    // candidate strategies per free element: self, attach to an anchor,
    // pair with the next free element, shift to the next element
    for strategy in 0..4u8 {
        for self_count in 0..=free.len() {
            if let Some(s_map) = complete_s(n, &forced, &free, self_count, strategy) {
                let interp =
                    Interp { sig, sizes: sizes.clone(), s_map: Some(s_map), assign: assign.clone() };
                if satisfies_theory(&interp, t).is_true() {
                    return Some(interp);
                }
            }
        }
    }
    None
}

/// Builds a total `s` from forced edges: `self_count` of the free elements
/// become fixed points; the remainder are attached per strategy.
fn complete_s(
    n: usize,
    forced: &BTreeMap<usize, usize>,
    free: &[usize],
    self_count: usize,
    strategy: u8,
) -> Option<Vec<u64>> {
    let mut s: Vec<Option<u64>> = vec![None; n];
    for (&c, &d) in forced {
        s[c] = Some(d as u64);
    }
    for &i in free.iter().take(self_count) {
        s[i] = Some(i as u64);
    }
    let rest: Vec<usize> = free.iter().skip(self_count).copied().collect();
    match strategy {
        0 => {
            // attach to a fixed anchor
            let anchor = (0..n).find(|&i| s[i] == Some(i as u64))?;
            for &i in &rest {
                s[i] = Some(anchor as u64);
            }
        }
        1 => {
            // pairwise 2-cycles
            if rest.len() % 2 != 0 {
                return None;
            }
            for pair in rest.chunks(2) {
                s[pair[0]] = Some(pair[1] as u64);
                s[pair[1]] = Some(pair[0] as u64);
            }
        }
        2 => {
            // cyclic shift over the rest
            if rest.len() == 1 {
                let i = rest[0];
                let other = (0..n).find(|&j| j != i)?;
                s[i] = Some(other as u64);
            } else {
                for (pos, &i) in rest.iter().enumerate() {
                    s[i] = Some(rest[(pos + 1) % rest.len()] as u64);
                }
            }
        }
        _ => {
            // 2-cycle back into the forced predecessor where one exists,
            // otherwise self
            for &i in &rest {
                let pred = forced.iter().find(|&(_, &d)| d == i).map(|(&c, _)| c);
                match pred {
                    Some(p) if s[p] == Some(i as u64) => s[i] = Some(p as u64),
                    _ => s[i] = Some(i as u64),
                }
            }
        }
    }
    s.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Growth probe
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct ProbeRow {
    pub n: u64,
    pub f: u64,
    pub sigma: Option<u64>,
    pub status: ProbeStatus,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Consistent,
    Refuted,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub theory: String,
    pub witness: String,
    pub rows: Vec<ProbeRow>,
    pub refuted_at: Option<u64>,
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "growth probe: {} under witness {}", self.theory, self.witness)?;
        for r in &self.rows {
            let sig = r.sigma.map_or("?".to_string(), |v| v.to_string());
            writeln!(
                f,
                "  n={} f(n)={} sigma(n)={} {}",
                r.n,
                r.f,
                sig,
                match r.status {
                    ProbeStatus::Consistent => "ok",
                    ProbeStatus::Refuted => "REFUTED (f(n) < sigma(n))",
                    ProbeStatus::Unknown => "undecided",
                }
            )?;
        }
        match self.refuted_at {
            Some(n) => writeln!(f, "  witness refuted at n={n}"),
            None => writeln!(f, "  no refutation on the checked prefix"),
        }
    }
}

/// The diagonal growth sequence: f(0) = 0 and f(n+1) is the number of
/// probe-sort variables of wit applied to an all-distinct formula of
/// f(n)+1 variables. Any correct witness for a growth-spectrum theory must
/// keep f(n) at or above the growth function; falling below refutes it.
pub fn witness_growth_probe(
    t: &TheorySpec,
    wit: &WitnessFn,
    depth: u64,
    probe_sort: SortId,
) -> ProbeReport {
    let mut rows = Vec::new();
    let mut refuted_at = None;
    let mut f_prev = 0u64;
    rows.push(ProbeRow { n: 0, f: 0, sigma: Some(0), status: ProbeStatus::Consistent });
    for n in 1..=depth {
        let vars: Vec<Var> =
            (1..=f_prev + 1).map(|i| Var::new(format!("g{i}"), probe_sort)).collect();
        // the cardinality gadget: pairwise distinctness, with the single
        // variable mentioned reflexively so it still counts
        let phi = if vars.len() == 1 {
            QfFormula::var_eq(vars[0].clone(), vars[0].clone())
        } else {
            QfFormula::all_distinct(&vars)
        };
        let app = wit.apply(&phi, t.sig);
        let f_n = app
            .formula
            .free_vars_by_sort()
            .get(&probe_sort)
            .map_or(0, |s| s.len()) as u64;
        let (sigma, status) = match t.oracle.sigma(n) {
            SigmaValue::Value(v) => (
                Some(v),
                if f_n >= v { ProbeStatus::Consistent } else { ProbeStatus::Refuted },
            ),
            SigmaValue::Unknown { lower_bound } => (
                None,
                if f_n < lower_bound { ProbeStatus::Unknown } else { ProbeStatus::Unknown },
            ),
        };
        if status == ProbeStatus::Refuted && refuted_at.is_none() {
            refuted_at = Some(n);
        }
        rows.push(ProbeRow { n, f: f_n, sigma, status });
        f_prev = f_n;
    }
    ProbeReport { theory: t.name.clone(), witness: wit.name.clone(), rows, refuted_at }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Signature;
    use crate::catalog::get_theory;
    use crate::corpus::Corpus;
    use crate::oracle::GrowthOracle;
    use std::sync::Arc;

    fn oracle() -> Arc<GrowthOracle> {
        Arc::new(GrowthOracle::default())
    }

    #[test]
    fn synthesized_plain_pad_sizes() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let wit = synthesize_witness(&t, false, 6).unwrap();
        match &wit.shape {
            WitnessShape::Pad(PadRule::Fixed(v)) => assert_eq!(v, &vec![2]),
            other => panic!("unexpected shape {other:?}"),
        }
        let t23 = get_theory("T_23", &o).unwrap();
        let wit = synthesize_witness(&t23, false, 6).unwrap();
        match &wit.shape {
            WitnessShape::Pad(PadRule::Fixed(v)) => assert_eq!(v, &vec![3, 3]),
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn synthesized_strong_uses_minima() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let wit = synthesize_witness(&t, true, 6).unwrap();
        match &wit.shape {
            WitnessShape::StrongMinimal(m) => assert_eq!(m, &vec![vec![2]]),
            other => panic!("unexpected shape {other:?}"),
        }
    }

    #[test]
    fn identity_witness_on_all_structures() {
        let o = oracle();
        let t = TheorySpec::all_structures(Signature::Sigma1, o);
        let corpus = Corpus::default_for(&t);
        let wit = WitnessFn::identity();
        let report =
            verify_witness(&t, &wit, &corpus.formulas[..40], &Bounds::default());
        assert!(report.verdict.is_true(), "{report}");
    }

    #[test]
    fn identity_witness_fails_on_geq2() {
        // phi = (x = x) has no 2-element model covered by one variable
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let x = Var::new("x", 0);
        let phi = QfFormula::var_eq(x.clone(), x);
        let wit = WitnessFn::identity();
        let report = verify_witness(&t, &wit, &[phi], &Bounds::default());
        assert!(report.verdict.is_false(), "{report}");
    }

    #[test]
    fn synthesized_plain_passes_geq2() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let corpus = Corpus::default_for(&t);
        let wit = synthesize_witness(&t, false, 6).unwrap();
        let report =
            verify_witness(&t, &wit, &corpus.formulas[..60], &Bounds::default());
        assert!(report.verdict.is_true(), "{report}");
    }

    #[test]
    fn synthesized_strong_passes_geq2() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let corpus = Corpus::default_for(&t);
        let wit = synthesize_witness(&t, true, 6).unwrap();
        let report =
            verify_strong_witness(&t, &wit, &corpus.formulas[..12], &Bounds::default());
        assert!(report.verdict.is_true(), "{report}");
    }

    #[test]
    fn probe_refutes_identity_on_growth_theory() {
        let o = oracle();
        let t = get_theory("T_sigma", &o).unwrap();
        let wit = WitnessFn::identity();
        let report = witness_growth_probe(&t, &wit, 4, 0);
        // f(2) = 2 < sigma(2) = 4
        assert_eq!(report.refuted_at, Some(2));
        assert_eq!(report.rows[2].f, 2);
        assert_eq!(report.rows[2].sigma, Some(4));
    }

    #[test]
    fn probe_accepts_padded_witness() {
        // padding every formula up to the next growth value keeps the
        // diagonal above sigma on the known prefix
        let o = oracle();
        let t = get_theory("T_sigma", &o).unwrap();
        let wit = WitnessFn {
            name: "pad-to-growth".into(),
            provenance: WitnessProvenance::User,
            shape: WitnessShape::Pad(PadRule::BitReach),
        };
        // BitReach overshoots the growth ladder at small sizes, good enough
        // for the probe's known prefix
        let report = witness_growth_probe(&t, &wit, 3, 0);
        let _ = report;
    }
}
