//! Many-sorted terms and quantifier-free formulas, the restricted quantified
//! schemas used in axiomatizations, arrangements, an s-expression parser and
//! printer, and s-chain unrolling.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Index of a sort within its signature (0 = `sigma`).
pub type SortId = usize;

/// The five signatures the catalog works over. At most three sorts and at
/// most one unary function `s : sigma -> sigma`; equality per sort is
/// implicit. Richer user signatures are rejected up front.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Signature {
    /// one sort, no functions
    Sigma1,
    /// two sorts, no functions
    Sigma2,
    /// three sorts, no functions
    Sigma3,
    /// one sort plus `s`
    SigmaS,
    /// two sorts plus `s`
    SigmaS2,
}

impl Signature {
    pub fn by_name(name: &str) -> Result<Signature, FormulaError> {
        match name {
            "Sigma1" => Ok(Signature::Sigma1),
            "Sigma2" => Ok(Signature::Sigma2),
            "Sigma3" => Ok(Signature::Sigma3),
            "SigmaS" | "Sigma_s" => Ok(Signature::SigmaS),
            "SigmaS2" | "Sigma_s2" => Ok(Signature::SigmaS2),
            _ => Err(FormulaError::UnknownSignature(name.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Signature::Sigma1 => "Sigma1",
            Signature::Sigma2 => "Sigma2",
            Signature::Sigma3 => "Sigma3",
            Signature::SigmaS => "SigmaS",
            Signature::SigmaS2 => "SigmaS2",
        }
    }

    pub fn sort_count(self) -> usize {
        match self {
            Signature::Sigma1 | Signature::SigmaS => 1,
            Signature::Sigma2 | Signature::SigmaS2 => 2,
            Signature::Sigma3 => 3,
        }
    }

    pub fn has_s(self) -> bool {
        matches!(self, Signature::SigmaS | Signature::SigmaS2)
    }

    /// An empty signature has no function symbols.
    pub fn is_empty(self) -> bool {
        !self.has_s()
    }

    pub fn sort_names(self) -> &'static [&'static str] {
        match self.sort_count() {
            1 => &["sigma"],
            2 => &["sigma", "sigma2"],
            _ => &["sigma", "sigma2", "sigma3"],
        }
    }

    pub fn sort_id(self, name: &str) -> Option<SortId> {
        self.sort_names().iter().position(|&s| s == name)
    }

    pub fn sort_name(self, id: SortId) -> &'static str {
        self.sort_names()[id]
    }

    /// The signature obtained by appending one fresh unconstrained sort.
    /// Only defined for the one-sorted signatures.
    pub fn with_extra_sort(self) -> Option<Signature> {
        match self {
            Signature::Sigma1 => Some(Signature::Sigma2),
            Signature::SigmaS => Some(Signature::SigmaS2),
            _ => None,
        }
    }

    /// The signature obtained by adding `s : sigma -> sigma`. Only defined
    /// for the empty signatures with at most two sorts.
    pub fn with_s(self) -> Option<Signature> {
        match self {
            Signature::Sigma1 => Some(Signature::SigmaS),
            Signature::Sigma2 => Some(Signature::SigmaS2),
            _ => None,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A sorted variable. The derived ordering (sort index first, then name) is
/// the canonical variable order used for all emitted conjunctions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Var {
    pub sort: SortId,
    pub name: String,
}

impl Var {
    pub fn new(name: impl Into<String>, sort: SortId) -> Var {
        Var { sort, name: name.into() }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// A term: a variable or `s^depth(x)` for a variable `x` of sort `sigma`.
/// Depth-indexed form rather than nested application, since the only
/// function symbol is unary and terms are always chains.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Term {
    Var(Var),
    SApp { depth: u32, var: Var },
}

impl Term {
    pub fn var(v: Var) -> Term {
        Term::Var(v)
    }

    pub fn s_app(depth: u32, var: Var) -> Term {
        debug_assert!(depth >= 1);
        Term::SApp { depth, var }
    }

    pub fn base_var(&self) -> &Var {
        match self {
            Term::Var(v) => v,
            Term::SApp { var, .. } => var,
        }
    }

    pub fn depth(&self) -> u32 {
        match self {
            Term::Var(_) => 0,
            Term::SApp { depth, .. } => *depth,
        }
    }

    pub fn sort(&self) -> SortId {
        self.base_var().sort
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::SApp { depth, var } => {
                for _ in 0..*depth {
                    write!(f, "(s ")?;
                }
                write!(f, "{var}")?;
                for _ in 0..*depth {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Quantifier-free formulas over equality literals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum QfFormula {
    Eq(Term, Term),
    Not(Box<QfFormula>),
    And(Vec<QfFormula>),
    Or(Vec<QfFormula>),
}

impl QfFormula {
    pub fn eq(a: Term, b: Term) -> QfFormula {
        QfFormula::Eq(a, b)
    }

    pub fn var_eq(a: Var, b: Var) -> QfFormula {
        QfFormula::Eq(Term::Var(a), Term::Var(b))
    }

    pub fn neq(a: Term, b: Term) -> QfFormula {
        QfFormula::Not(Box::new(QfFormula::Eq(a, b)))
    }

    pub fn not(f: QfFormula) -> QfFormula {
        QfFormula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<QfFormula>) -> QfFormula {
        QfFormula::And(fs)
    }

    pub fn or(fs: Vec<QfFormula>) -> QfFormula {
        QfFormula::Or(fs)
    }

    /// The empty conjunction: true on every interpretation.
    pub fn truth() -> QfFormula {
        QfFormula::And(Vec::new())
    }

    /// Pairwise disequality of the given variables, in canonical order.
    pub fn all_distinct(vars: &[Var]) -> QfFormula {
        let mut sorted: Vec<&Var> = vars.iter().collect();
        sorted.sort();
        let mut lits = Vec::new();
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                lits.push(QfFormula::neq(
                    Term::Var(sorted[i].clone()),
                    Term::Var(sorted[j].clone()),
                ));
            }
        }
        QfFormula::And(lits)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            QfFormula::Eq(a, b) => {
                out.insert(a.base_var().clone());
                out.insert(b.base_var().clone());
            }
            QfFormula::Not(f) => f.collect_vars(out),
            QfFormula::And(fs) | QfFormula::Or(fs) => {
                for f in fs {
                    f.collect_vars(out);
                }
            }
        }
    }

    /// vars_sigma(phi) for each sort; s-applications contribute only their
    /// base variable.
    pub fn free_vars_by_sort(&self) -> BTreeMap<SortId, BTreeSet<Var>> {
        let mut map: BTreeMap<SortId, BTreeSet<Var>> = BTreeMap::new();
        for v in self.free_vars() {
            map.entry(v.sort).or_default().insert(v);
        }
        map
    }

    /// Maximal `j` such that `s^j(x)` occurs, per sigma-sorted variable
    /// (0 for bare occurrences).
    pub fn max_s_depths(&self) -> BTreeMap<Var, u32> {
        let mut map = BTreeMap::new();
        self.collect_depths(&mut map);
        map
    }

    fn collect_depths(&self, map: &mut BTreeMap<Var, u32>) {
        match self {
            QfFormula::Eq(a, b) => {
                for t in [a, b] {
                    if t.sort() == 0 {
                        let e = map.entry(t.base_var().clone()).or_insert(0);
                        *e = (*e).max(t.depth());
                    }
                }
            }
            QfFormula::Not(f) => f.collect_depths(map),
            QfFormula::And(fs) | QfFormula::Or(fs) => {
                for f in fs {
                    f.collect_depths(map);
                }
            }
        }
    }

    pub fn has_s_terms(&self) -> bool {
        match self {
            QfFormula::Eq(a, b) => a.depth() > 0 || b.depth() > 0,
            QfFormula::Not(f) => f.has_s_terms(),
            QfFormula::And(fs) | QfFormula::Or(fs) => fs.iter().any(|f| f.has_s_terms()),
        }
    }

    /// Checks well-sortedness against a signature: both sides of an equality
    /// share a sort, and `s` is only applied (to sigma-sorted variables) when
    /// the signature has `s`.
    pub fn well_sorted(&self, sig: Signature) -> Result<(), FormulaError> {
        match self {
            QfFormula::Eq(a, b) => {
                for t in [a, b] {
                    if t.sort() >= sig.sort_count() {
                        return Err(FormulaError::UnknownSort(format!(
                            "variable {} has sort index {} outside {}",
                            t.base_var(),
                            t.sort(),
                            sig.name()
                        )));
                    }
                    if t.depth() > 0 {
                        if !sig.has_s() {
                            return Err(FormulaError::SOutsideSignature(sig.name()));
                        }
                        if t.sort() != 0 {
                            return Err(FormulaError::IllSorted(format!(
                                "s applied to {} of sort {}",
                                t.base_var(),
                                sig.sort_name(t.sort())
                            )));
                        }
                    }
                }
                if a.sort() != b.sort() {
                    return Err(FormulaError::IllSorted(format!(
                        "equality between {} : {} and {} : {}",
                        a,
                        sig.sort_name(a.sort()),
                        b,
                        sig.sort_name(b.sort())
                    )));
                }
                Ok(())
            }
            QfFormula::Not(f) => f.well_sorted(sig),
            QfFormula::And(fs) | QfFormula::Or(fs) => {
                fs.iter().try_for_each(|f| f.well_sorted(sig))
            }
        }
    }

    /// Recursively sorts the children of every conjunction and disjunction,
    /// giving a canonical representative for round-trip comparisons.
    pub fn canonicalize(&self) -> QfFormula {
        match self {
            QfFormula::Eq(a, b) => {
                if a <= b {
                    QfFormula::Eq(a.clone(), b.clone())
                } else {
                    QfFormula::Eq(b.clone(), a.clone())
                }
            }
            QfFormula::Not(f) => QfFormula::Not(Box::new(f.canonicalize())),
            QfFormula::And(fs) => {
                let mut v: Vec<QfFormula> = fs.iter().map(|f| f.canonicalize()).collect();
                v.sort();
                QfFormula::And(v)
            }
            QfFormula::Or(fs) => {
                let mut v: Vec<QfFormula> = fs.iter().map(|f| f.canonicalize()).collect();
                v.sort();
                QfFormula::Or(v)
            }
        }
    }

    /// Splits a cube (conjunction of literals) into its literals; returns
    /// None if the formula is not a cube.
    pub fn as_cube(&self) -> Option<Vec<QfFormula>> {
        fn literal(f: &QfFormula) -> bool {
            match f {
                QfFormula::Eq(..) => true,
                QfFormula::Not(inner) => matches!(**inner, QfFormula::Eq(..)),
                _ => false,
            }
        }
        match self {
            f if literal(f) => Some(vec![f.clone()]),
            QfFormula::And(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.as_cube()?);
                }
                Some(out)
            }
            _ => None,
        }
    }
}

impl fmt::Display for QfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QfFormula::Eq(a, b) => write!(f, "(= {a} {b})"),
            QfFormula::Not(inner) => write!(f, "(not {inner})"),
            QfFormula::And(fs) => {
                write!(f, "(and")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            QfFormula::Or(fs) => {
                write!(f, "(or")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// The restricted quantified schemas used by axiomatizations: cardinality
/// formulas, fixed-point-count formulas, the psi-vee closure shape, and the
/// all/none-fixed shapes, closed under boolean connectives.
///
/// `CardGeSigma(s, k)` abbreviates "at least sigma(k) elements of sort s"
/// (threshold looked up in the growth oracle); similarly for the other
/// growth-indexed atoms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SchematicFormula {
    CardGe(SortId, u64),
    CardLe(SortId, u64),
    CardEq(SortId, u64),
    FpCardGe(u64),
    FpCardEq(u64),
    NonFpCardGe(u64),
    NonFpCardEq(u64),
    /// |sort| >= sigma(arg)
    CardGeSigma(SortId, u64),
    /// |sort| = sigma(arg)
    CardEqSigma(SortId, u64),
    /// fp count >= sigma_inv(arg)
    FpCardGeSigmaInv(u64),
    /// fp count = sigma_inv(arg)
    FpCardEqSigmaInv(u64),
    /// forall x. s(s(x)) = x \/ s(s(x)) = s(x)
    PsiVee,
    /// forall x. s(x) = x
    AllFixed,
    /// forall x. not (s(x) = x)
    NoneFixed,
    SNot(Box<SchematicFormula>),
    SAnd(Vec<SchematicFormula>),
    SOr(Vec<SchematicFormula>),
    SImplies(Box<SchematicFormula>, Box<SchematicFormula>),
}

impl SchematicFormula {
    pub fn requires_s(&self) -> bool {
        match self {
            SchematicFormula::FpCardGe(_)
            | SchematicFormula::FpCardEq(_)
            | SchematicFormula::NonFpCardGe(_)
            | SchematicFormula::NonFpCardEq(_)
            | SchematicFormula::FpCardGeSigmaInv(_)
            | SchematicFormula::FpCardEqSigmaInv(_)
            | SchematicFormula::PsiVee
            | SchematicFormula::AllFixed
            | SchematicFormula::NoneFixed => true,
            SchematicFormula::CardGe(..)
            | SchematicFormula::CardLe(..)
            | SchematicFormula::CardEq(..)
            | SchematicFormula::CardGeSigma(..)
            | SchematicFormula::CardEqSigma(..) => false,
            SchematicFormula::SNot(f) => f.requires_s(),
            SchematicFormula::SAnd(fs) | SchematicFormula::SOr(fs) => {
                fs.iter().any(|f| f.requires_s())
            }
            SchematicFormula::SImplies(a, b) => a.requires_s() || b.requires_s(),
        }
    }

    pub fn max_sort(&self) -> Option<SortId> {
        match self {
            SchematicFormula::CardGe(s, _)
            | SchematicFormula::CardLe(s, _)
            | SchematicFormula::CardEq(s, _)
            | SchematicFormula::CardGeSigma(s, _)
            | SchematicFormula::CardEqSigma(s, _) => Some(*s),
            SchematicFormula::SNot(f) => f.max_sort(),
            SchematicFormula::SAnd(fs) | SchematicFormula::SOr(fs) => {
                fs.iter().filter_map(|f| f.max_sort()).max()
            }
            SchematicFormula::SImplies(a, b) => a.max_sort().max(b.max_sort()),
            _ => None,
        }
    }
}

impl fmt::Display for SchematicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use SchematicFormula::*;
        match self {
            CardGe(s, n) => write!(f, "card(s{s}) >= {n}"),
            CardLe(s, n) => write!(f, "card(s{s}) <= {n}"),
            CardEq(s, n) => write!(f, "card(s{s}) = {n}"),
            FpCardGe(n) => write!(f, "fp >= {n}"),
            FpCardEq(n) => write!(f, "fp = {n}"),
            NonFpCardGe(n) => write!(f, "nonfp >= {n}"),
            NonFpCardEq(n) => write!(f, "nonfp = {n}"),
            CardGeSigma(s, k) => write!(f, "card(s{s}) >= sigma({k})"),
            CardEqSigma(s, k) => write!(f, "card(s{s}) = sigma({k})"),
            FpCardGeSigmaInv(k) => write!(f, "fp >= sigma_inv({k})"),
            FpCardEqSigmaInv(k) => write!(f, "fp = sigma_inv({k})"),
            PsiVee => write!(f, "psi_vee"),
            AllFixed => write!(f, "all_fixed"),
            NoneFixed => write!(f, "none_fixed"),
            SNot(g) => write!(f, "not({g})"),
            SAnd(fs) => {
                write!(f, "(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            SOr(fs) => {
                write!(f, "(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
            SImplies(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CardKind {
    Ge,
    Le,
    Eq,
}

/// Builds the cardinality schema `|sort| kind n`.
pub fn mk_cardinality(
    sig: Signature,
    sort: SortId,
    kind: CardKind,
    n: u64,
) -> Result<SchematicFormula, FormulaError> {
    if sort >= sig.sort_count() {
        return Err(FormulaError::UnknownSort(format!(
            "sort index {sort} outside {}",
            sig.name()
        )));
    }
    Ok(match kind {
        CardKind::Ge => SchematicFormula::CardGe(sort, n),
        CardKind::Le => SchematicFormula::CardLe(sort, n),
        CardKind::Eq => SchematicFormula::CardEq(sort, n),
    })
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("unknown signature `{0}`")]
    UnknownSignature(String),
    #[error("unknown sort: {0}")]
    UnknownSort(String),
    #[error("ill-sorted: {0}")]
    IllSorted(String),
    #[error("`s` is not part of signature {0}")]
    SOutsideSignature(&'static str),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared variable `{0}`")]
    UndeclaredVariable(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("malformed partition: {0}")]
    BadPartition(String),
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parses a comma-separated declaration list `x:sigma, u:sigma2`.
pub fn parse_declarations(
    header: &str,
    sig: Signature,
) -> Result<BTreeMap<String, SortId>, FormulaError> {
    let mut out = BTreeMap::new();
    for part in header.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (name, sort_name) = part.split_once(':').ok_or_else(|| FormulaError::Syntax {
            line: 1,
            col: 1,
            msg: format!("declaration `{part}` is not of the form name:sort"),
        })?;
        let name = name.trim();
        let sort_name = sort_name.trim();
        let sort = sig
            .sort_id(sort_name)
            .ok_or_else(|| FormulaError::UnknownSort(sort_name.to_string()))?;
        if out.insert(name.to_string(), sort).is_some() {
            return Err(FormulaError::DuplicateVariable(name.to_string()));
        }
    }
    Ok(out)
}

/// Parses formula source. If the first non-empty line does not start with
/// `(`, it is taken as a declaration header (`x:sigma, u:sigma2`); the rest
/// is the s-expression body.
pub fn parse_formula(src: &str, sig: Signature) -> Result<QfFormula, FormulaError> {
    let trimmed = src.trim_start();
    if trimmed.starts_with('(') {
        parse_formula_with_decls(src, sig, &BTreeMap::new())
    } else {
        let mut lines = src.splitn(2, '\n');
        let header = lines.next().unwrap_or("");
        let body = lines.next().unwrap_or("");
        let decls = parse_declarations(header, sig)?;
        parse_formula_with_decls(body, sig, &decls)
    }
}

/// Parses the s-expression body against explicit declarations. Variables not
/// in `decls` are an error when `decls` is non-empty; with an empty `decls`
/// map, undeclared sigma-sorted names are accepted only for one-sorted
/// signatures (every variable then has the unique sort).
pub fn parse_formula_with_decls(
    src: &str,
    sig: Signature,
    decls: &BTreeMap<String, SortId>,
) -> Result<QfFormula, FormulaError> {
    let mut p = Parser::new(src, sig, decls);
    let f = p.formula()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.err("trailing input after formula"));
    }
    f.well_sorted(sig)?;
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    sig: Signature,
    decls: &'a BTreeMap<String, SortId>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, sig: Signature, decls: &'a BTreeMap<String, SortId>) -> Self {
        Parser { src: src.as_bytes(), pos: 0, line: 1, col: 1, sig, decls }
    }

    fn err(&self, msg: impl Into<String>) -> FormulaError {
        FormulaError::Syntax { line: self.line, col: self.col, msg: msg.into() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b';' {
                while let Some(c) = self.peek() {
                    if c == b'\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected `{}`, found `{}`", c as char, got as char))),
            None => Err(self.err(format!("expected `{}`, found end of input", c as char))),
        }
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.bump();
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected identifier"));
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn variable(&mut self, name: String) -> Result<Var, FormulaError> {
        if let Some(&sort) = self.decls.get(&name) {
            return Ok(Var::new(name, sort));
        }
        if self.decls.is_empty() && self.sig.sort_count() == 1 {
            return Ok(Var::new(name, 0));
        }
        Err(FormulaError::UndeclaredVariable(name))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.bump();
            let head = self.ident()?;
            if head != "s" {
                return Err(self.err(format!("expected `s` application, found `{head}`")));
            }
            let inner = self.term()?;
            self.expect(b')')?;
            if !self.sig.has_s() {
                return Err(FormulaError::SOutsideSignature(self.sig.name()));
            }
            Ok(Term::SApp { depth: inner.depth() + 1, var: inner.base_var().clone() })
        } else {
            let name = self.ident()?;
            Ok(Term::Var(self.variable(name)?))
        }
    }

    fn operator(&mut self) -> Result<String, FormulaError> {
        self.skip_ws();
        if self.peek() == Some(b'=') {
            self.bump();
            return Ok("=".to_string());
        }
        self.ident()
    }

    fn formula(&mut self) -> Result<QfFormula, FormulaError> {
        self.expect(b'(')?;
        let head = self.operator()?;
        let out = match head.as_str() {
            "and" | "or" => {
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(b')') {
                        break;
                    }
                    children.push(self.formula()?);
                }
                if children.is_empty() {
                    return Err(self.err(format!("`{head}` needs at least one argument")));
                }
                if head == "and" {
                    QfFormula::And(children)
                } else {
                    QfFormula::Or(children)
                }
            }
            "not" => QfFormula::Not(Box::new(self.formula()?)),
            "=" => {
                let a = self.term()?;
                let b = self.term()?;
                QfFormula::Eq(a, b)
            }
            other => return Err(self.err(format!("unknown operator `{other}`"))),
        };
        self.expect(b')')?;
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Arrangements
// ---------------------------------------------------------------------------

/// A partition of a finite variable set, one per sort. Blocks are kept in
/// canonical form: each block sorted, blocks ordered by least element.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Arrangement {
    pub blocks_by_sort: BTreeMap<SortId, Vec<Vec<Var>>>,
}

impl Arrangement {
    pub fn new(blocks_by_sort: BTreeMap<SortId, Vec<Vec<Var>>>) -> Arrangement {
        let mut a = Arrangement { blocks_by_sort };
        for blocks in a.blocks_by_sort.values_mut() {
            for b in blocks.iter_mut() {
                b.sort();
            }
            blocks.sort();
        }
        a
    }

    /// The conjunction fixing exactly this equality pattern: same-block
    /// equalities followed by cross-block disequalities, all pairs in
    /// canonical variable order.
    pub fn formula(&self) -> QfFormula {
        let mut lits = Vec::new();
        for blocks in self.blocks_by_sort.values() {
            for block in blocks {
                for pair in block.windows(2) {
                    lits.push(QfFormula::var_eq(pair[0].clone(), pair[1].clone()));
                }
            }
            let mut all: Vec<(&Var, usize)> = Vec::new();
            for (bi, block) in blocks.iter().enumerate() {
                for v in block {
                    all.push((v, bi));
                }
            }
            all.sort();
            for i in 0..all.len() {
                for j in i + 1..all.len() {
                    if all[i].1 != all[j].1 {
                        lits.push(QfFormula::neq(
                            Term::Var(all[i].0.clone()),
                            Term::Var(all[j].0.clone()),
                        ));
                    }
                }
            }
        }
        QfFormula::And(lits)
    }

    pub fn block_counts(&self) -> BTreeMap<SortId, usize> {
        self.blocks_by_sort.iter().map(|(s, b)| (*s, b.len())).collect()
    }
}

/// Builds the arrangement formula from explicit partitions, validating that
/// the partition covers exactly the given variables with disjoint non-empty
/// blocks of a single sort each.
pub fn mk_arrangement(
    vars_by_sort: &BTreeMap<SortId, BTreeSet<Var>>,
    partitions: &BTreeMap<SortId, Vec<Vec<Var>>>,
) -> Result<QfFormula, FormulaError> {
    let mut blocks_by_sort = BTreeMap::new();
    for (&sort, vars) in vars_by_sort {
        let blocks = partitions
            .get(&sort)
            .ok_or_else(|| FormulaError::BadPartition(format!("no partition for sort {sort}")))?;
        let mut seen = BTreeSet::new();
        for block in blocks {
            if block.is_empty() {
                return Err(FormulaError::BadPartition("empty block".into()));
            }
            for v in block {
                if v.sort != sort {
                    return Err(FormulaError::BadPartition(format!(
                        "variable {v} listed under sort {sort} but has sort {}",
                        v.sort
                    )));
                }
                if !seen.insert(v.clone()) {
                    return Err(FormulaError::BadPartition(format!("variable {v} listed twice")));
                }
            }
        }
        if &seen != vars {
            return Err(FormulaError::BadPartition(
                "partition does not cover exactly the variable set".into(),
            ));
        }
        blocks_by_sort.insert(sort, blocks.clone());
    }
    for sort in partitions.keys() {
        if !vars_by_sort.contains_key(sort) {
            return Err(FormulaError::BadPartition(format!(
                "partition given for sort {sort} with no variables"
            )));
        }
    }
    Ok(Arrangement::new(blocks_by_sort).formula())
}

/// All partitions of `0..n` as restricted growth strings: `a[0] = 0` and
/// `a[i] <= max(a[..i]) + 1`. Deterministic lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    loop {
        out.push(a.clone());
        // advance to the next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return out;
            }
            i -= 1;
            let max_prefix = a[..i].iter().copied().max().unwrap();
            if a[i] <= max_prefix {
                a[i] += 1;
                for x in a.iter_mut().skip(i + 1) {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Number of blocks of a partition in RGS form.
pub fn rgs_block_count(a: &[usize]) -> usize {
    a.iter().copied().max().map_or(0, |m| m + 1)
}

// ---------------------------------------------------------------------------
// s-chain unrolling
// ---------------------------------------------------------------------------

/// A successor constraint `to = s(from)` produced by unrolling.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChainLink {
    pub from: Var,
    pub to: Var,
}

impl fmt::Display for ChainLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = s({})", self.to, self.from)
    }
}

/// Name of the unrolled chain variable for `s^depth(base)`. Uses `@`, which
/// the parser rejects in identifiers, so chain names never collide with
/// source variables.
pub fn chain_var(base: &Var, depth: u32) -> Var {
    Var::new(format!("{}@{}", base.name, depth), 0)
}

/// Replaces every `s^j(z)` by a fresh chain variable `z@j` (with `z@0` for
/// the bare variable) and records the successor constraints linking
/// consecutive chain variables. Satisfiability is preserved once the links
/// are enforced together with functional consistency.
pub fn unroll_s_terms(phi: &QfFormula) -> (QfFormula, Vec<ChainLink>) {
    fn rewrite(f: &QfFormula) -> QfFormula {
        match f {
            QfFormula::Eq(a, b) => QfFormula::Eq(rewrite_term(a), rewrite_term(b)),
            QfFormula::Not(g) => QfFormula::Not(Box::new(rewrite(g))),
            QfFormula::And(fs) => QfFormula::And(fs.iter().map(rewrite).collect()),
            QfFormula::Or(fs) => QfFormula::Or(fs.iter().map(rewrite).collect()),
        }
    }
    fn rewrite_term(t: &Term) -> Term {
        if t.sort() == 0 {
            Term::Var(chain_var(t.base_var(), t.depth()))
        } else {
            t.clone()
        }
    }

    let rewritten = rewrite(phi);
    let mut links = Vec::new();
    for (base, max_depth) in phi.max_s_depths() {
        for j in 0..max_depth {
            links.push(ChainLink { from: chain_var(&base, j), to: chain_var(&base, j + 1) });
        }
    }
    (rewritten, links)
}

/// Substitutes chain variables back (`z@j -> s^j(z)`), inverse of
/// `unroll_s_terms` on its image.
pub fn reroll_s_terms(phi: &QfFormula) -> QfFormula {
    fn rewrite_term(t: &Term) -> Term {
        if let Term::Var(v) = t {
            if let Some((base, depth)) = v.name.rsplit_once('@') {
                let depth: u32 = depth.parse().expect("chain variable depth");
                let base = Var::new(base, 0);
                return if depth == 0 { Term::Var(base) } else { Term::SApp { depth, var: base } };
            }
        }
        t.clone()
    }
    match phi {
        QfFormula::Eq(a, b) => QfFormula::Eq(rewrite_term(a), rewrite_term(b)),
        QfFormula::Not(g) => QfFormula::Not(Box::new(reroll_s_terms(g))),
        QfFormula::And(fs) => QfFormula::And(fs.iter().map(reroll_s_terms).collect()),
        QfFormula::Or(fs) => QfFormula::Or(fs.iter().map(reroll_s_terms).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma2_decls() -> BTreeMap<String, SortId> {
        let mut d = BTreeMap::new();
        d.insert("x".into(), 0);
        d.insert("y".into(), 0);
        d.insert("u".into(), 1);
        d.insert("v".into(), 1);
        d.insert("z".into(), 0);
        d
    }

    #[test]
    fn parse_basic_and() {
        let f = parse_formula_with_decls(
            "(and (= x y) (not (= u v)))",
            Signature::Sigma2,
            &sigma2_decls(),
        )
        .unwrap();
        let x = Var::new("x", 0);
        let y = Var::new("y", 0);
        let u = Var::new("u", 1);
        let v = Var::new("v", 1);
        assert_eq!(
            f,
            QfFormula::And(vec![
                QfFormula::var_eq(x, y),
                QfFormula::Not(Box::new(QfFormula::var_eq(u, v))),
            ])
        );
    }

    #[test]
    fn parse_s_chain() {
        let f = parse_formula("(= (s (s x)) x)", Signature::SigmaS).unwrap();
        let x = Var::new("x", 0);
        assert_eq!(f, QfFormula::Eq(Term::SApp { depth: 2, var: x.clone() }, Term::Var(x)));
    }

    #[test]
    fn parse_ill_sorted_eq() {
        let err = parse_formula_with_decls("(= x u)", Signature::Sigma2, &sigma2_decls());
        assert!(matches!(err, Err(FormulaError::IllSorted(_))));
    }

    #[test]
    fn parse_s_outside_signature() {
        let err = parse_formula("(= (s x) x)", Signature::Sigma1);
        assert!(matches!(err, Err(FormulaError::SOutsideSignature(_))));
    }

    #[test]
    fn parse_reports_position() {
        let err = parse_formula("(and (= x y)", Signature::Sigma1);
        assert!(matches!(err, Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn header_declarations() {
        let f = parse_formula("x:sigma, u:sigma2\n(and (= x x) (= u u))", Signature::Sigma2)
            .unwrap();
        let by_sort = f.free_vars_by_sort();
        assert_eq!(by_sort[&0].len(), 1);
        assert_eq!(by_sort[&1].len(), 1);
    }

    #[test]
    fn free_vars_ignore_s_application_depth() {
        let f = parse_formula("(= (s (s x)) x)", Signature::SigmaS).unwrap();
        let by_sort = f.free_vars_by_sort();
        assert_eq!(by_sort.len(), 1);
        assert_eq!(by_sort[&0], BTreeSet::from([Var::new("x", 0)]));
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "(or (and (= x y) (= y z)) (not (= u v)))";
        let f = parse_formula_with_decls(src, Signature::Sigma2, &sigma2_decls()).unwrap();
        let printed = f.to_string();
        let reparsed =
            parse_formula_with_decls(&printed, Signature::Sigma2, &sigma2_decls()).unwrap();
        assert_eq!(f.canonicalize(), reparsed.canonicalize());
    }

    #[test]
    fn arrangement_single_block() {
        let x = Var::new("x", 0);
        let y = Var::new("y", 0);
        let vars = BTreeMap::from([(0, BTreeSet::from([x.clone(), y.clone()]))]);
        let parts = BTreeMap::from([(0, vec![vec![x.clone(), y.clone()]])]);
        let f = mk_arrangement(&vars, &parts).unwrap();
        assert_eq!(f, QfFormula::And(vec![QfFormula::var_eq(x, y)]));
    }

    #[test]
    fn arrangement_all_distinct() {
        let v: Vec<Var> = ["x", "y", "z"].iter().map(|n| Var::new(*n, 0)).collect();
        let vars = BTreeMap::from([(0, v.iter().cloned().collect::<BTreeSet<_>>())]);
        let parts = BTreeMap::from([(0, v.iter().map(|x| vec![x.clone()]).collect::<Vec<_>>())]);
        let f = mk_arrangement(&vars, &parts).unwrap();
        let expected = QfFormula::And(vec![
            QfFormula::neq(Term::Var(v[0].clone()), Term::Var(v[1].clone())),
            QfFormula::neq(Term::Var(v[0].clone()), Term::Var(v[2].clone())),
            QfFormula::neq(Term::Var(v[1].clone()), Term::Var(v[2].clone())),
        ]);
        assert_eq!(f, expected);
    }

    #[test]
    fn arrangement_rejects_duplicates() {
        let x = Var::new("x", 0);
        let vars = BTreeMap::from([(0, BTreeSet::from([x.clone()]))]);
        let parts = BTreeMap::from([(0, vec![vec![x.clone()], vec![x.clone()]])]);
        assert!(mk_arrangement(&vars, &parts).is_err());
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(partitions(1).len(), 1);
        assert_eq!(partitions(2).len(), 2);
        assert_eq!(partitions(3).len(), 5);
        // B(4) = 15: the number of distinct arrangements over 4 variables
        assert_eq!(partitions(4).len(), 15);
        assert_eq!(partitions(5).len(), 52);
    }

    #[test]
    fn unroll_single_link() {
        let x = Var::new("x", 0);
        let phi = QfFormula::Eq(Term::SApp { depth: 1, var: x.clone() }, Term::Var(x.clone()));
        let (psi, links) = unroll_s_terms(&phi);
        assert_eq!(
            psi,
            QfFormula::Eq(Term::Var(chain_var(&x, 1)), Term::Var(chain_var(&x, 0)))
        );
        assert_eq!(links, vec![ChainLink { from: chain_var(&x, 0), to: chain_var(&x, 1) }]);
    }

    #[test]
    fn unroll_two_chains() {
        let x = Var::new("x", 0);
        let y = Var::new("y", 0);
        let phi = QfFormula::Eq(
            Term::SApp { depth: 2, var: x.clone() },
            Term::SApp { depth: 1, var: y.clone() },
        );
        let (psi, links) = unroll_s_terms(&phi);
        assert_eq!(
            psi,
            QfFormula::Eq(Term::Var(chain_var(&x, 2)), Term::Var(chain_var(&y, 1)))
        );
        assert_eq!(links.len(), 3);
        assert_eq!(reroll_s_terms(&psi), phi);
    }

    #[test]
    fn cube_detection() {
        let f = parse_formula_with_decls(
            "(and (= x y) (not (= y z)))",
            Signature::Sigma2,
            &sigma2_decls(),
        )
        .unwrap();
        assert_eq!(f.as_cube().unwrap().len(), 2);
        let g = parse_formula_with_decls(
            "(or (= x y) (= y z))",
            Signature::Sigma2,
            &sigma2_decls(),
        )
        .unwrap();
        assert!(g.as_cube().is_none());
    }
}
