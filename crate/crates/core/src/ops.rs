//! The three theory operators: add a free sort, add a unary function forced
//! to the identity, add the psi-vee closure axiom. All act on compiled
//! specs; each preserves all seven combination properties in both
//! directions, so the predicted vector is the input vector.

use crate::props::PropertyVector;
use crate::spectrum::{SMode, TheorySpec};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum TheoryOp {
    /// a new unconstrained sort (one-sorted theories only)
    AddSort,
    /// a unary function `s` with `s(x) = x` everywhere (function-free only)
    AddTrivialFunction,
    /// the axiom `s(s(x)) = x or s(s(x)) = s(x)` (function-free only)
    AddPsiVee,
}

impl TheoryOp {
    pub fn by_name(name: &str) -> Option<TheoryOp> {
        match name {
            "add_sort" | "sort" => Some(TheoryOp::AddSort),
            "add_trivial_function" | "add_fn" | "fn" => Some(TheoryOp::AddTrivialFunction),
            "add_psi_vee" | "add_vee" | "vee" => Some(TheoryOp::AddPsiVee),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TheoryOp::AddSort => "add_sort",
            TheoryOp::AddTrivialFunction => "add_trivial_function",
            TheoryOp::AddPsiVee => "add_psi_vee",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            TheoryOp::AddSort => "sort",
            TheoryOp::AddTrivialFunction => "fn",
            TheoryOp::AddPsiVee => "vee",
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error("add_sort needs a one-sorted theory, `{theory}` is over {sig}")]
    NotOneSorted { theory: String, sig: &'static str },
    #[error("{op} needs a function-free theory, `{theory}` is over {sig}")]
    NotFunctionFree { op: &'static str, theory: String, sig: &'static str },
    #[error("cannot extend signature {0} (at most two sorts may carry `s`, at most three sorts total)")]
    SignatureFull(&'static str),
}

/// Appends a fresh unconstrained sort. Clauses are untouched: the new sort
/// never appears in a constraint, so its cardinality is free.
pub fn add_sort(t: &TheorySpec) -> Result<TheorySpec, OpError> {
    if t.sig.sort_count() != 1 {
        return Err(OpError::NotOneSorted { theory: t.name.clone(), sig: t.sig.name() });
    }
    let sig = t.sig.with_extra_sort().ok_or(OpError::SignatureFull(t.sig.name()))?;
    let mut out = t.clone();
    out.sig = sig;
    out.name = format!("add_sort({})", t.name);
    Ok(out)
}

/// Adds `s : sigma -> sigma` together with the axiom forcing it to the
/// identity: cardinality clauses are unchanged, every clause requires the
/// identity structurally (so the fixed-point count equals the first sort).
pub fn add_trivial_function(t: &TheorySpec) -> Result<TheorySpec, OpError> {
    let sig = function_free_target(t, "add_trivial_function")?;
    let mut out = t.clone();
    out.sig = sig;
    for c in out.clauses.iter_mut() {
        c.s_mode = SMode::IdentityEverywhere;
    }
    out.name = format!("add_trivial_function({})", t.name);
    Ok(out)
}

/// Adds `s` constrained only by the psi-vee closure: every point of the
/// original cardinality spectrum survives (the identity satisfies the
/// closure), with the structural requirement recorded per clause.
pub fn add_psi_vee(t: &TheorySpec) -> Result<TheorySpec, OpError> {
    let sig = function_free_target(t, "add_psi_vee")?;
    let mut out = t.clone();
    out.sig = sig;
    for c in out.clauses.iter_mut() {
        c.s_mode = SMode::PsiVee;
    }
    out.name = format!("add_psi_vee({})", t.name);
    Ok(out)
}

fn function_free_target(
    t: &TheorySpec,
    op: &'static str,
) -> Result<crate::formula::Signature, OpError> {
    if t.sig.has_s() {
        return Err(OpError::NotFunctionFree { op, theory: t.name.clone(), sig: t.sig.name() });
    }
    t.sig.with_s().ok_or(OpError::SignatureFull(t.sig.name()))
}

pub fn apply(op: TheoryOp, t: &TheorySpec) -> Result<TheorySpec, OpError> {
    match op {
        TheoryOp::AddSort => add_sort(t),
        TheoryOp::AddTrivialFunction => add_trivial_function(t),
        TheoryOp::AddPsiVee => add_psi_vee(t),
    }
}

pub fn apply_chain(ops: &[TheoryOp], t: &TheorySpec) -> Result<TheorySpec, OpError> {
    let mut cur = t.clone();
    for &op in ops {
        cur = apply(op, &cur)?;
    }
    Ok(cur)
}

/// The operators preserve every one of the seven properties in both
/// directions, so prediction is the identity on vectors.
pub fn predict_vector(v: &PropertyVector, _op: TheoryOp) -> PropertyVector {
    v.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_theory;
    use crate::formula::Signature;
    use crate::oracle::GrowthOracle;
    use crate::spectrum::{Card, MeasureVector};
    use std::sync::Arc;

    fn oracle() -> Arc<GrowthOracle> {
        Arc::new(GrowthOracle::default())
    }

    #[test]
    fn add_sort_leaves_second_sort_free() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let t2 = add_sort(&t).unwrap();
        assert_eq!(t2.sig, Signature::Sigma2);
        let m = |a, b| MeasureVector::cards_only(vec![a, b]);
        assert!(t2.member(&m(Card::Fin(2), Card::Fin(1))).unwrap().is_true());
        assert!(t2.member(&m(Card::Fin(1), Card::Fin(9))).unwrap().is_false());
        assert!(t2.member(&m(Card::Fin(4), Card::Inf)).unwrap().is_true());
    }

    #[test]
    fn add_sort_keeps_s() {
        let o = oracle();
        let t = get_theory("T_f", &o).unwrap();
        let t2 = add_sort(&t).unwrap();
        assert_eq!(t2.sig, Signature::SigmaS2);
        let t3 = get_theory("T_23", &o).unwrap();
        assert!(add_sort(&t3).is_err());
    }

    #[test]
    fn trivial_function_forces_identity() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let ts = add_trivial_function(&t).unwrap();
        assert_eq!(ts.sig, Signature::SigmaS);
        let m = |c, fp| MeasureVector { card: vec![c], fp: Some(fp), nonfp: None };
        assert!(ts.member(&m(Card::Fin(3), Card::Fin(3))).unwrap().is_true());
        assert!(ts.member(&m(Card::Fin(3), Card::Fin(2))).unwrap().is_false());
        assert!(add_trivial_function(&ts).is_err());
    }

    #[test]
    fn psi_vee_admits_two_cycles() {
        let o = oracle();
        let t = get_theory("T_geq:2", &o).unwrap();
        let tv = add_psi_vee(&t).unwrap();
        let m = |c, fp| MeasureVector { card: vec![c], fp: Some(fp), nonfp: None };
        // a 2-cycle on 2 elements
        assert!(tv.member(&m(Card::Fin(2), Card::Fin(0))).unwrap().is_true());
        // a 3-cycle would be the only fp-free shape on 3 elements and it
        // violates the closure
        assert!(tv.member(&m(Card::Fin(3), Card::Fin(0))).unwrap().is_false());
        assert!(tv.member(&m(Card::Fin(3), Card::Fin(1))).unwrap().is_true());
    }

    #[test]
    fn psi_vee_preserves_cardinality_spectrum() {
        let o = oracle();
        for name in ["T_geq:2", "T_mn:5,2", "T_even_inf", "T_23"] {
            let t = get_theory(name, &o).unwrap();
            let tv = add_psi_vee(&t).unwrap();
            let sorts = t.sig.sort_count();
            let mut sizes = vec![1u64; sorts];
            loop {
                let base =
                    MeasureVector::cards_only(sizes.iter().map(|&v| Card::Fin(v)).collect());
                let lifted_any_fp = (0..=sizes[0]).any(|fp| {
                    let m = MeasureVector {
                        card: sizes.iter().map(|&v| Card::Fin(v)).collect(),
                        fp: Some(Card::Fin(fp)),
                        nonfp: None,
                    };
                    tv.member(&m).unwrap().is_true()
                });
                assert_eq!(
                    t.member(&base).unwrap().is_true(),
                    lifted_any_fp,
                    "{name} at {sizes:?}"
                );
                let mut i = sorts;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if sizes[i] < 5 {
                        sizes[i] += 1;
                        for s in sizes.iter_mut().skip(i + 1) {
                            *s = 1;
                        }
                        break;
                    }
                    sizes[i] = 1;
                }
                if sizes.iter().all(|&v| v == 1) {
                    break;
                }
            }
        }
    }
}
