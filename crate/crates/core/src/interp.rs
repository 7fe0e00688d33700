//! Finite many-sorted interpretations, evaluation of quantifier-free and
//! schematic formulas, and the exhaustive enumeration backing the
//! brute-force oracle.

use crate::formula::{QfFormula, SchematicFormula, Signature, SortId, Term, Var};
use crate::oracle::{GrowthOracle, SigmaValue};
use crate::spectrum::{Card, MeasureVector};
use crate::three::ThreeVal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// A finite interpretation: per-sort domain sizes (elements are `0..size`),
/// a total `s` map on sort 0 when the signature has `s`, and a variable
/// assignment. Domains are initial segments of the naturals; over these
/// signatures, isomorphism classes are determined by cardinalities (plus the
/// shape of `s`), so canonical carriers lose nothing.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Interp {
    pub sig: Signature,
    pub sizes: Vec<u64>,
    pub s_map: Option<Vec<u64>>,
    pub assign: BTreeMap<Var, u64>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable `{0}` has no assigned value")]
    Unassigned(String),
    #[error("interpretation has no `s` map")]
    NoSMap,
    #[error("schema requires `s`, signature {0} has none")]
    SchemaNeedsS(&'static str),
    #[error("schema mentions sort {0} outside the signature")]
    SchemaSortOutOfRange(SortId),
    #[error("growth oracle cannot decide the comparison (argument {0})")]
    OracleUndecided(u64),
}

impl Interp {
    pub fn new(
        sig: Signature,
        sizes: Vec<u64>,
        s_map: Option<Vec<u64>>,
        assign: BTreeMap<Var, u64>,
    ) -> Interp {
        debug_assert_eq!(sizes.len(), sig.sort_count());
        debug_assert!(sizes.iter().all(|&n| n >= 1));
        debug_assert_eq!(s_map.is_some(), sig.has_s());
        if let Some(m) = &s_map {
            debug_assert_eq!(m.len() as u64, sizes[0]);
        }
        Interp { sig, sizes, s_map, assign }
    }

    pub fn eval_term(&self, t: &Term) -> Result<u64, EvalError> {
        let base = self
            .assign
            .get(t.base_var())
            .copied()
            .ok_or_else(|| EvalError::Unassigned(t.base_var().name.clone()))?;
        match t {
            Term::Var(_) => Ok(base),
            Term::SApp { depth, .. } => {
                let s = self.s_map.as_ref().ok_or(EvalError::NoSMap)?;
                let mut v = base;
                for _ in 0..*depth {
                    v = s[v as usize];
                }
                Ok(v)
            }
        }
    }

    /// Standard satisfaction; equality is identity on domain elements.
    pub fn eval_qf(&self, phi: &QfFormula) -> Result<bool, EvalError> {
        match phi {
            QfFormula::Eq(a, b) => Ok(self.eval_term(a)? == self.eval_term(b)?),
            QfFormula::Not(f) => Ok(!self.eval_qf(f)?),
            QfFormula::And(fs) => {
                for f in fs {
                    if !self.eval_qf(f)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            QfFormula::Or(fs) => {
                for f in fs {
                    if self.eval_qf(f)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    /// Number of elements `a` of sort 0 with `s(a) = a`.
    pub fn count_fixed_points(&self) -> Result<u64, EvalError> {
        let s = self.s_map.as_ref().ok_or(EvalError::NoSMap)?;
        Ok(s.iter().enumerate().filter(|&(i, &v)| i as u64 == v).count() as u64)
    }

    pub fn count_non_fixed_points(&self) -> Result<u64, EvalError> {
        Ok(self.sizes[0] - self.count_fixed_points()?)
    }

    /// Does every element satisfy `s(s(a)) = a` or `s(s(a)) = s(a)`?
    pub fn satisfies_psi_vee(&self) -> Result<bool, EvalError> {
        let s = self.s_map.as_ref().ok_or(EvalError::NoSMap)?;
        Ok(s.iter().enumerate().all(|(a, &sa)| {
            let ssa = s[sa as usize];
            ssa == a as u64 || ssa == sa
        }))
    }

    /// Evaluates a schematic formula. Growth-indexed thresholds are resolved
    /// through the oracle; at desk-scale domain sizes every comparison is
    /// decidable, but an undecidable one is reported rather than guessed.
    pub fn eval_schematic(
        &self,
        psi: &SchematicFormula,
        oracle: &GrowthOracle,
    ) -> Result<bool, EvalError> {
        use SchematicFormula::*;
        if psi.requires_s() && !self.sig.has_s() {
            return Err(EvalError::SchemaNeedsS(self.sig.name()));
        }
        if let Some(max) = psi.max_sort() {
            if max >= self.sig.sort_count() {
                return Err(EvalError::SchemaSortOutOfRange(max));
            }
        }
        Ok(match psi {
            CardGe(s, n) => self.sizes[*s] >= *n,
            CardLe(s, n) => self.sizes[*s] <= *n,
            CardEq(s, n) => self.sizes[*s] == *n,
            FpCardGe(n) => self.count_fixed_points()? >= *n,
            FpCardEq(n) => self.count_fixed_points()? == *n,
            NonFpCardGe(n) => self.count_non_fixed_points()? >= *n,
            NonFpCardEq(n) => self.count_non_fixed_points()? == *n,
            CardGeSigma(s, arg) => match oracle.sigma(*arg) {
                SigmaValue::Value(v) => self.sizes[*s] >= v,
                SigmaValue::Unknown { lower_bound } => {
                    if self.sizes[*s] < lower_bound {
                        false
                    } else {
                        return Err(EvalError::OracleUndecided(*arg));
                    }
                }
            },
            CardEqSigma(s, arg) => match oracle.sigma(*arg) {
                SigmaValue::Value(v) => self.sizes[*s] == v,
                SigmaValue::Unknown { lower_bound } => {
                    if self.sizes[*s] < lower_bound {
                        false
                    } else {
                        return Err(EvalError::OracleUndecided(*arg));
                    }
                }
            },
            FpCardGeSigmaInv(arg) => match oracle.sigma_inv(*arg) {
                Some(v) => self.count_fixed_points()? >= v,
                None => return Err(EvalError::OracleUndecided(*arg)),
            },
            FpCardEqSigmaInv(arg) => match oracle.sigma_inv(*arg) {
                Some(v) => self.count_fixed_points()? == v,
                None => return Err(EvalError::OracleUndecided(*arg)),
            },
            PsiVee => self.satisfies_psi_vee()?,
            AllFixed => self.count_non_fixed_points()? == 0,
            NoneFixed => self.count_fixed_points()? == 0,
            SNot(f) => !self.eval_schematic(f, oracle)?,
            SAnd(fs) => {
                for f in fs {
                    if !self.eval_schematic(f, oracle)? {
                        return Ok(false);
                    }
                }
                true
            }
            SOr(fs) => {
                for f in fs {
                    if self.eval_schematic(f, oracle)? {
                        return Ok(true);
                    }
                }
                false
            }
            SImplies(a, b) => !self.eval_schematic(a, oracle)? || self.eval_schematic(b, oracle)?,
        })
    }

    /// The measure of this interpretation: per-sort cardinalities plus the
    /// fixed-point counts when `s` is present.
    pub fn measure(&self) -> MeasureVector {
        let card = self.sizes.iter().map(|&n| Card::Fin(n)).collect();
        let (fp, nonfp) = if self.sig.has_s() {
            let fp = self.count_fixed_points().expect("s map present");
            (Some(Card::Fin(fp)), Some(Card::Fin(self.sizes[0] - fp)))
        } else {
            (None, None)
        };
        MeasureVector { card, fp, nonfp }
    }

    /// Serializes as the CLI model format
    /// `{card: {...}, s: [...], assign: {...}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut card = serde_json::Map::new();
        for (i, &n) in self.sizes.iter().enumerate() {
            card.insert(self.sig.sort_name(i).to_string(), n.into());
        }
        let mut assign = serde_json::Map::new();
        for (v, &e) in &self.assign {
            assign.insert(v.name.clone(), e.into());
        }
        let mut obj = serde_json::Map::new();
        obj.insert("card".into(), card.into());
        if let Some(s) = &self.s_map {
            obj.insert("s".into(), s.clone().into());
        }
        obj.insert("assign".into(), assign.into());
        obj.into()
    }
}

/// Membership of an interpretation in a compiled theory: its measure lies
/// in the spectrum via some clause whose structural `s` requirement the
/// interpretation meets. Cross-validated against direct axiom evaluation.
pub fn satisfies_theory(a: &Interp, t: &crate::spectrum::TheorySpec) -> ThreeVal {
    debug_assert_eq!(a.sig, t.sig);
    let m = a.measure();
    let mut acc = ThreeVal::False;
    for clause in &t.clauses {
        let structural = if a.sig.has_s() {
            ThreeVal::from_bool(clause.s_mode.holds_structurally(a))
        } else {
            ThreeVal::True
        };
        acc = acc.or(structural.and(t.clause_admits(clause, &m)));
        if acc.is_true() {
            break;
        }
    }
    acc
}

/// Yields every interpretation with per-sort domain sizes in `1..=bound`,
/// every `s` map at those sizes, and every assignment of `vars`, in a
/// deterministic order: size vectors ascending lexicographically, then `s`
/// maps lexicographically, then assignments lexicographically in canonical
/// variable order.
pub fn enumerate_interps(
    sig: Signature,
    bounds: &[u64],
    vars: &[Var],
) -> impl Iterator<Item = Interp> {
    assert_eq!(bounds.len(), sig.sort_count());
    assert!(bounds.iter().all(|&b| b >= 1), "size bound of 0");
    let mut vars: Vec<Var> = vars.to_vec();
    vars.sort();
    vars.dedup();
    InterpIter {
        sig,
        bounds: bounds.to_vec(),
        vars,
        sizes: None,
        s_counter: Vec::new(),
        assign_counter: Vec::new(),
        assign_done: false,
    }
}

struct InterpIter {
    sig: Signature,
    bounds: Vec<u64>,
    vars: Vec<Var>,
    sizes: Option<Vec<u64>>,
    s_counter: Vec<u64>,
    assign_counter: Vec<u64>,
    assign_done: bool,
}

impl InterpIter {
    fn reset_s(&mut self) {
        if self.sig.has_s() {
            let n = self.sizes.as_ref().unwrap()[0] as usize;
            self.s_counter = vec![0; n];
        } else {
            self.s_counter = Vec::new();
        }
        self.reset_assign();
    }

    fn reset_assign(&mut self) {
        self.assign_counter = vec![0; self.vars.len()];
        self.assign_done = false;
    }

    fn advance_sizes(&mut self) -> bool {
        match &mut self.sizes {
            None => {
                self.sizes = Some(vec![1; self.bounds.len()]);
                true
            }
            Some(sizes) => {
                let mut i = sizes.len();
                loop {
                    if i == 0 {
                        return false;
                    }
                    i -= 1;
                    if sizes[i] < self.bounds[i] {
                        sizes[i] += 1;
                        for s in sizes.iter_mut().skip(i + 1) {
                            *s = 1;
                        }
                        return true;
                    }
                }
            }
        }
    }

    fn advance_s(&mut self) -> bool {
        let n = self.sizes.as_ref().unwrap()[0];
        let mut i = self.s_counter.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if self.s_counter[i] + 1 < n {
                self.s_counter[i] += 1;
                for x in self.s_counter.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                return true;
            }
        }
    }

    fn advance_assign(&mut self) -> bool {
        let sizes = self.sizes.as_ref().unwrap();
        let mut i = self.assign_counter.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            let size = sizes[self.vars[i].sort];
            if self.assign_counter[i] + 1 < size {
                self.assign_counter[i] += 1;
                for x in self.assign_counter.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                return true;
            }
        }
    }

    fn current(&self) -> Interp {
        let sizes = self.sizes.clone().unwrap();
        let s_map = if self.sig.has_s() { Some(self.s_counter.clone()) } else { None };
        let assign = self
            .vars
            .iter()
            .cloned()
            .zip(self.assign_counter.iter().copied())
            .collect();
        Interp { sig: self.sig, sizes, s_map, assign }
    }
}

impl Iterator for InterpIter {
    type Item = Interp;

    fn next(&mut self) -> Option<Interp> {
        loop {
            if self.sizes.is_none() {
                if !self.advance_sizes() {
                    return None;
                }
                self.reset_s();
            }
            if !self.assign_done {
                let out = self.current();
                if !self.advance_assign() {
                    self.assign_done = true;
                }
                return Some(out);
            }
            // assignments exhausted for the current (sizes, s map)
            if self.advance_s() {
                self.reset_assign();
            } else if self.advance_sizes() {
                self.reset_s();
            } else {
                return None;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    #[test]
    fn eval_simple_equality() {
        let x = Var::new("x", 0);
        let y = Var::new("y", 0);
        let a = Interp::new(
            Signature::Sigma1,
            vec![2],
            None,
            BTreeMap::from([(x.clone(), 0), (y.clone(), 0)]),
        );
        assert!(a.eval_qf(&QfFormula::var_eq(x, y)).unwrap());
    }

    #[test]
    fn eval_two_cycle() {
        let phi = parse_formula("(= (s (s x)) x)", Signature::SigmaS).unwrap();
        let a = Interp::new(
            Signature::SigmaS,
            vec![2],
            Some(vec![1, 0]),
            BTreeMap::from([(Var::new("x", 0), 0)]),
        );
        assert!(a.eval_qf(&phi).unwrap());
        assert_eq!(a.count_fixed_points().unwrap(), 0);
        assert!(a.satisfies_psi_vee().unwrap());
    }

    #[test]
    fn all_distinct_counts_injective_assignments() {
        let vars: Vec<Var> = ["x", "y", "z"].iter().map(|n| Var::new(*n, 0)).collect();
        let phi = QfFormula::all_distinct(&vars);
        let mut total = 0;
        let mut sat = 0;
        for a in enumerate_interps(Signature::Sigma1, &[3], &vars) {
            if a.sizes[0] != 3 {
                continue;
            }
            total += 1;
            if a.eval_qf(&phi).unwrap() {
                sat += 1;
            }
        }
        assert_eq!(total, 27);
        assert_eq!(sat, 6);
    }

    #[test]
    fn schematic_counts() {
        let o = GrowthOracle::default();
        // identity s on 3 elements
        let a = Interp::new(Signature::SigmaS, vec![3], Some(vec![0, 1, 2]), BTreeMap::new());
        assert!(a.eval_schematic(&SchematicFormula::FpCardEq(3), &o).unwrap());
        assert!(a.eval_schematic(&SchematicFormula::PsiVee, &o).unwrap());
        // 0->0, 1->0, 2->1: psi_vee fails at 2 since s(s(2)) = 0
        let b = Interp::new(Signature::SigmaS, vec![3], Some(vec![0, 0, 1]), BTreeMap::new());
        assert!(!b.eval_schematic(&SchematicFormula::PsiVee, &o).unwrap());
        assert_eq!(b.count_fixed_points().unwrap(), 1);
        // 0->0, 1->0, 2->2, 3->0 has two fixed points
        let c =
            Interp::new(Signature::SigmaS, vec![4], Some(vec![0, 0, 2, 0]), BTreeMap::new());
        assert_eq!(c.count_fixed_points().unwrap(), 2);
        // fixed-point-free involution on 4 elements
        let d =
            Interp::new(Signature::SigmaS, vec![4], Some(vec![1, 0, 3, 2]), BTreeMap::new());
        assert_eq!(d.count_fixed_points().unwrap(), 0);
        assert!(d.eval_schematic(&SchematicFormula::NoneFixed, &o).unwrap());
    }

    #[test]
    fn cardinality_schema_matches_expanded_semantics() {
        let o = GrowthOracle::default();
        for n in 1..=4u64 {
            let a = Interp::new(Signature::Sigma1, vec![n], None, BTreeMap::new());
            for k in 0..=5u64 {
                assert_eq!(
                    a.eval_schematic(&SchematicFormula::CardGe(0, k), &o).unwrap(),
                    n >= k
                );
                assert_eq!(
                    a.eval_schematic(&SchematicFormula::CardEq(0, k), &o).unwrap(),
                    n == k
                );
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        // Sigma1, bound 2, one variable: sizes 1 (1 assignment) + 2 (2) = 3
        let n = enumerate_interps(Signature::Sigma1, &[2], &[Var::new("x", 0)]).count();
        assert_eq!(n, 3);
        // SigmaS, bound 2, no vars: 1^1 + 2^2 = 5 s-maps
        let n = enumerate_interps(Signature::SigmaS, &[2], &[]).count();
        assert_eq!(n, 5);
        // Sigma2, bound 1, no vars: single interpretation
        let n = enumerate_interps(Signature::Sigma2, &[1, 1], &[]).count();
        assert_eq!(n, 1);
    }

    #[test]
    fn enumeration_exhaustive_length() {
        // for Sigma1 with bound b and v variables the stream has
        // sum_{n=1..b} n^v entries
        for b in 1..=4u64 {
            for v in 0..=3usize {
                let vars: Vec<Var> =
                    (0..v).map(|i| Var::new(format!("x{i}"), 0)).collect();
                let expect: u64 = (1..=b).map(|n| n.pow(v as u32)).sum();
                let got = enumerate_interps(Signature::Sigma1, &[b], &vars).count() as u64;
                assert_eq!(got, expect);
            }
        }
    }

    #[test]
    fn growth_threshold_schema() {
        let o = GrowthOracle::default();
        let a4 = Interp::new(Signature::Sigma1, vec![4], None, BTreeMap::new());
        assert!(a4.eval_schematic(&SchematicFormula::CardEqSigma(0, 2), &o).unwrap());
        assert!(!a4.eval_schematic(&SchematicFormula::CardGeSigma(0, 3), &o).unwrap());
        // threshold beyond the known prefix: still decidable at small sizes
        assert!(!a4.eval_schematic(&SchematicFormula::CardGeSigma(0, 7), &o).unwrap());
    }
}
