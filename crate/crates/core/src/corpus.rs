//! Seeded formula corpora: deterministic random quantifier-free formulas
//! per theory, plus the hand-pinned cubes the property arguments actually
//! turn on (pigeonhole instances, successor-chain gadgets).

use crate::catalog::TheoryInstance;
use crate::formula::{partitions, QfFormula, Signature, Term, Var};
use crate::spectrum::TheorySpec;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_SIZE: usize = 200;

#[derive(Clone, Copy, Debug)]
pub struct CorpusParams {
    pub seed: u64,
    pub size: usize,
    pub max_vars_per_sort: usize,
    pub max_depth: u32,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams { seed: DEFAULT_SEED, size: DEFAULT_SIZE, max_vars_per_sort: 3, max_depth: 2 }
    }
}

/// A deterministic formula corpus over one signature, together with the
/// convexity instances derived from it.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub params: CorpusParams,
    pub formulas: Vec<QfFormula>,
    pub convexity_instances: Vec<(QfFormula, Vec<(Var, Var)>)>,
}

impl Corpus {
    pub fn default_for(t: &TheorySpec) -> Corpus {
        Corpus::generate(t, CorpusParams::default())
    }

    pub fn generate(t: &TheorySpec, params: CorpusParams) -> Corpus {
        let sig = t.sig;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut formulas = pinned_formulas(sig);
        while formulas.len() < params.size {
            formulas.push(random_formula(sig, &params, &mut rng));
        }
        formulas.truncate(params.size);
        let mut convexity_instances = pinned_convexity(t);
        let mut cube_rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x9E3779B97F4A7C15);
        for _ in 0..40 {
            if let Some(inst) = random_convexity_instance(sig, &params, &mut cube_rng) {
                convexity_instances.push(inst);
            }
        }
        Corpus { params, formulas, convexity_instances }
    }
}

fn sort_vars(sig: Signature, sort: usize, count: usize) -> Vec<Var> {
    let prefix = match sort {
        0 => "x",
        1 => "u",
        _ => "t",
    };
    let _ = sig;
    (1..=count).map(|i| Var::new(format!("{prefix}{i}"), sort)).collect()
}

/// Hand-pinned formulas every corpus contains: the gadgets the paper's
/// arguments revolve around.
fn pinned_formulas(sig: Signature) -> Vec<QfFormula> {
    let mut out = Vec::new();
    let xs = sort_vars(sig, 0, 3);
    let x = || Term::Var(xs[0].clone());
    let y = || Term::Var(xs[1].clone());

    // reflexivity, a single equality, a single disequality
    out.push(QfFormula::eq(x(), x()));
    out.push(QfFormula::eq(x(), y()));
    out.push(QfFormula::neq(x(), y()));
    // distinct triples
    out.push(QfFormula::all_distinct(&xs));
    if sig.sort_count() >= 2 {
        let us = sort_vars(sig, 1, 3);
        out.push(QfFormula::all_distinct(&us));
        out.push(QfFormula::And(vec![
            QfFormula::neq(x(), y()),
            QfFormula::all_distinct(&us),
        ]));
        out.push(QfFormula::eq(Term::Var(us[0].clone()), Term::Var(us[1].clone())));
    }
    if sig.sort_count() >= 3 {
        let ts = sort_vars(sig, 2, 2);
        out.push(QfFormula::neq(Term::Var(ts[0].clone()), Term::Var(ts[1].clone())));
        out.push(QfFormula::eq(Term::Var(ts[0].clone()), Term::Var(ts[1].clone())));
    }
    if sig.has_s() {
        let sx = |d| Term::SApp { depth: d, var: xs[0].clone() };
        let sy = |d| Term::SApp { depth: d, var: xs[1].clone() };
        // fixed point, no fixed point, 2-cycle, successor chains
        out.push(QfFormula::eq(sx(1), x()));
        out.push(QfFormula::neq(sx(1), x()));
        out.push(QfFormula::eq(sx(2), x()));
        out.push(QfFormula::And(vec![
            QfFormula::eq(sx(2), x()),
            QfFormula::neq(sx(1), x()),
        ]));
        out.push(QfFormula::And(vec![
            QfFormula::eq(sx(1), x()),
            QfFormula::neq(sy(1), y()),
        ]));
        out.push(QfFormula::And(vec![
            QfFormula::eq(y(), sx(1)),
            QfFormula::eq(Term::Var(xs[2].clone()), sy(1)),
        ]));
        out.push(QfFormula::And(vec![
            QfFormula::eq(sx(1), x()),
            QfFormula::eq(sy(1), y()),
            QfFormula::neq(x(), y()),
        ]));
    }
    out
}

fn random_formula(sig: Signature, params: &CorpusParams, rng: &mut ChaCha8Rng) -> QfFormula {
    match rng.gen_range(0..4u8) {
        0 => random_arrangement_fragment(sig, params, rng),
        1 => random_cube(sig, params, rng),
        2 => QfFormula::Or(vec![
            random_cube(sig, params, rng),
            random_cube(sig, params, rng),
        ]),
        _ => random_tree(sig, params, rng, 2),
    }
}

/// A random partition of a random variable subset, emitted as its
/// arrangement formula (possibly on several sorts).
fn random_arrangement_fragment(
    sig: Signature,
    params: &CorpusParams,
    rng: &mut ChaCha8Rng,
) -> QfFormula {
    let mut parts = Vec::new();
    for sort in 0..sig.sort_count() {
        if sort > 0 && rng.gen_bool(0.5) {
            continue;
        }
        let n = rng.gen_range(1..=params.max_vars_per_sort);
        let vars = sort_vars(sig, sort, n);
        let all = partitions(n);
        let chosen = &all[rng.gen_range(0..all.len())];
        let blocks = rgs_blocks(&vars, chosen);
        for block in &blocks {
            for pair in block.windows(2) {
                parts.push(QfFormula::var_eq(pair[0].clone(), pair[1].clone()));
            }
        }
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                parts.push(QfFormula::neq(
                    Term::Var(blocks[i][0].clone()),
                    Term::Var(blocks[j][0].clone()),
                ));
            }
        }
    }
    if parts.is_empty() {
        let v = sort_vars(sig, 0, 1);
        return QfFormula::var_eq(v[0].clone(), v[0].clone());
    }
    QfFormula::And(parts)
}

fn rgs_blocks(vars: &[Var], rgs: &[usize]) -> Vec<Vec<Var>> {
    let nblocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
    let mut blocks = vec![Vec::new(); nblocks];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b].push(vars[i].clone());
    }
    blocks
}

fn random_term(sig: Signature, params: &CorpusParams, sort: usize, rng: &mut ChaCha8Rng) -> Term {
    let vars = sort_vars(sig, sort, params.max_vars_per_sort);
    let v = vars[rng.gen_range(0..vars.len())].clone();
    if sort == 0 && sig.has_s() && rng.gen_bool(0.4) {
        // keep total chain length small: at most two distinct deep variables
        let depth = rng.gen_range(1..=params.max_depth);
        let shallow = Var::new(if rng.gen_bool(0.5) { "x1" } else { "x2" }, 0);
        return Term::SApp { depth, var: shallow };
    }
    Term::Var(v)
}

fn random_literal(sig: Signature, params: &CorpusParams, rng: &mut ChaCha8Rng) -> QfFormula {
    let sort = if sig.sort_count() > 1 && rng.gen_bool(0.4) {
        rng.gen_range(1..sig.sort_count())
    } else {
        0
    };
    let a = random_term(sig, params, sort, rng);
    let b = random_term(sig, params, sort, rng);
    let eq = QfFormula::eq(a, b);
    if rng.gen_bool(0.5) {
        QfFormula::not(eq)
    } else {
        eq
    }
}

fn random_cube(sig: Signature, params: &CorpusParams, rng: &mut ChaCha8Rng) -> QfFormula {
    let k = rng.gen_range(1..=4);
    QfFormula::And((0..k).map(|_| random_literal(sig, params, rng)).collect())
}

fn random_tree(
    sig: Signature,
    params: &CorpusParams,
    rng: &mut ChaCha8Rng,
    depth: u32,
) -> QfFormula {
    if depth == 0 {
        return random_literal(sig, params, rng);
    }
    match rng.gen_range(0..3u8) {
        0 => QfFormula::And(
            (0..rng.gen_range(1..=3)).map(|_| random_tree(sig, params, rng, depth - 1)).collect(),
        ),
        1 => QfFormula::Or(
            (0..rng.gen_range(1..=3)).map(|_| random_tree(sig, params, rng, depth - 1)).collect(),
        ),
        _ => QfFormula::not(random_tree(sig, params, rng, depth - 1)),
    }
}

/// The paper-pinned convexity instances for the theory, by family, plus the
/// generic pigeonhole probes every signature gets.
fn pinned_convexity(t: &TheorySpec) -> Vec<(QfFormula, Vec<(Var, Var)>)> {
    let sig = t.sig;
    let mut out = Vec::new();

    // (x = y) |- x = y : sanity instance
    let xs = sort_vars(sig, 0, 3);
    out.push((
        QfFormula::var_eq(xs[0].clone(), xs[1].clone()),
        vec![(xs[0].clone(), xs[1].clone())],
    ));
    // empty cube, all pairs of three variables: catches spectra bounded by 2
    out.push((
        QfFormula::truth(),
        vec![
            (xs[0].clone(), xs[1].clone()),
            (xs[0].clone(), xs[2].clone()),
            (xs[1].clone(), xs[2].clone()),
        ],
    ));

    // pigeonhole at the parameter bound: distinct(x1..xk), all pairs with a
    // fresh variable
    let instance = TheoryInstance::parse(&t.name).ok();
    if let Some(inst) = &instance {
        let k = match inst.family {
            crate::catalog::Family::MnInf | crate::catalog::Family::Mn | crate::catalog::Family::MnBB => {
                Some(inst.params.iter().copied().max().unwrap_or(2))
            }
            crate::catalog::Family::NSigma | crate::catalog::Family::NInf | crate::catalog::Family::Leq => {
                Some(inst.params[0])
            }
            crate::catalog::Family::T23 | crate::catalog::Family::T233 => Some(3),
            crate::catalog::Family::TwoInf => Some(2),
            _ => None,
        };
        if let Some(k) = k {
            let k = k.min(6) as usize;
            let vars: Vec<Var> =
                (1..=k).map(|i| Var::new(format!("ph{i}"), 0)).collect();
            let fresh = Var::new("ph0", 0);
            let cube = QfFormula::all_distinct(&vars);
            let pairs: Vec<(Var, Var)> =
                vars.iter().map(|v| (v.clone(), fresh.clone())).collect();
            out.push((cube, pairs));
        }
    }

    if sig.has_s() {
        let x = Var::new("x1", 0);
        let y = Var::new("x2", 0);
        let z = Var::new("x3", 0);
        let w = Var::new("x4", 0);
        // the successor-chain cube: (y = s(x)) /\ (z = s(y)) vs x=z | y=z
        out.push((
            QfFormula::And(vec![
                QfFormula::eq(Term::Var(y.clone()), Term::SApp { depth: 1, var: x.clone() }),
                QfFormula::eq(Term::Var(z.clone()), Term::SApp { depth: 1, var: y.clone() }),
            ]),
            vec![(x.clone(), z.clone()), (y.clone(), z.clone())],
        ));
        // a (non-)fixed-point literal plus a disequality: spectra where the
        // literal bounds the cardinality entail a pigeonhole disjunction
        out.push((
            QfFormula::And(vec![
                QfFormula::neq(Term::SApp { depth: 1, var: x.clone() }, Term::Var(x.clone())),
                QfFormula::neq(Term::Var(y.clone()), Term::Var(w.clone())),
            ]),
            vec![(y.clone(), z.clone()), (w.clone(), z.clone())],
        ));
        out.push((
            QfFormula::And(vec![
                QfFormula::eq(Term::SApp { depth: 1, var: x.clone() }, Term::Var(x.clone())),
                QfFormula::neq(Term::Var(y.clone()), Term::Var(w.clone())),
            ]),
            vec![(y.clone(), z.clone()), (w.clone(), z.clone())],
        ));
    }
    out
}

fn random_convexity_instance(
    sig: Signature,
    params: &CorpusParams,
    rng: &mut ChaCha8Rng,
) -> Option<(QfFormula, Vec<(Var, Var)>)> {
    let cube = random_cube(sig, params, rng);
    cube.as_cube()?;
    let sort = if sig.sort_count() > 1 && rng.gen_bool(0.3) {
        rng.gen_range(1..sig.sort_count())
    } else {
        0
    };
    let vars = sort_vars(sig, sort, params.max_vars_per_sort.max(2));
    let k = rng.gen_range(1..=2.min(vars.len() - 1));
    let mut pairs = Vec::new();
    for _ in 0..k {
        let a = vars[rng.gen_range(0..vars.len())].clone();
        let b = vars[rng.gen_range(0..vars.len())].clone();
        if a != b {
            pairs.push((a, b));
        }
    }
    if pairs.is_empty() {
        return None;
    }
    Some((cube, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::get_theory;
    use crate::oracle::GrowthOracle;
    use std::sync::Arc;

    #[test]
    fn corpus_is_deterministic() {
        let o = Arc::new(GrowthOracle::default());
        let t = get_theory("T_BB_s", &o).unwrap();
        let a = Corpus::generate(&t, CorpusParams::default());
        let b = Corpus::generate(&t, CorpusParams::default());
        assert_eq!(a.formulas, b.formulas);
        assert_eq!(a.formulas.len(), DEFAULT_SIZE);
        let c = Corpus::generate(&t, CorpusParams { seed: 7, ..CorpusParams::default() });
        assert_ne!(a.formulas, c.formulas);
    }

    #[test]
    fn corpus_respects_budgets() {
        let o = Arc::new(GrowthOracle::default());
        for name in ["T_geq:2", "T_23", "T_BB_vee", "T_BB_eq", "T_23_3"] {
            let t = get_theory(name, &o).unwrap();
            let corpus = Corpus::default_for(&t);
            for phi in &corpus.formulas {
                assert!(phi.well_sorted(t.sig).is_ok(), "{name}: {phi}");
                for (_, vs) in phi.free_vars_by_sort() {
                    assert!(vs.len() <= 6);
                }
                let chain: usize = phi.max_s_depths().values().map(|&d| d as usize + 3).sum();
                assert!(chain <= 14, "{name}: chain budget {chain} for {phi}");
            }
        }
    }
}
