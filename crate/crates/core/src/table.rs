//! The taxonomy table: one row per consistent property vector, one column
//! per signature class. The expectations are data (a checked-in
//! transcription); the runner recomputes every desk-checkable cell and
//! confirms every impossibility citation, so the run compares two
//! independent sources.

use crate::catalog::{compile, Family, TheoryInstance};
use crate::corpus::Corpus;
use crate::decide::Bounds;
use crate::ops::{apply_chain, TheoryOp};
use crate::oracle::GrowthOracle;
use crate::props::{
    check_implications, check_property, CheckMode, Property, PropertyVector, SigMeta,
};
use crate::spectrum::{minimal_models, TheorySpec};
use crate::three::ThreeVal;
use crate::witness::{
    synthesize_witness, verify_strong_witness, verify_witness, PadRule, WitnessFn, WitnessProvenance,
    WitnessShape,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigClass {
    EmptyOneSorted,
    EmptyManySorted,
    NonEmptyOneSorted,
    NonEmptyManySorted,
}

impl SigClass {
    pub const ALL: [SigClass; 4] = [
        SigClass::EmptyOneSorted,
        SigClass::EmptyManySorted,
        SigClass::NonEmptyOneSorted,
        SigClass::NonEmptyManySorted,
    ];

    pub fn by_name(name: &str) -> Option<SigClass> {
        match name {
            "empty-one-sorted" | "empty_one" | "e1" => Some(SigClass::EmptyOneSorted),
            "empty-many-sorted" | "empty_many" | "em" => Some(SigClass::EmptyManySorted),
            "nonempty-one-sorted" | "nonempty_one" | "n1" => Some(SigClass::NonEmptyOneSorted),
            "nonempty-many-sorted" | "nonempty_many" | "nm" => Some(SigClass::NonEmptyManySorted),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SigClass::EmptyOneSorted => "empty-one-sorted",
            SigClass::EmptyManySorted => "empty-many-sorted",
            SigClass::NonEmptyOneSorted => "nonempty-one-sorted",
            SigClass::NonEmptyManySorted => "nonempty-many-sorted",
        }
    }

    /// Metadata used to evaluate the implication rules for impossibility
    /// cells of this column.
    pub fn meta(self) -> SigMeta {
        match self {
            SigClass::EmptyOneSorted => SigMeta { sort_count: 1, empty_signature: true },
            SigClass::EmptyManySorted => SigMeta { sort_count: 2, empty_signature: true },
            SigClass::NonEmptyOneSorted => SigMeta { sort_count: 1, empty_signature: false },
            SigClass::NonEmptyManySorted => SigMeta { sort_count: 2, empty_signature: false },
        }
    }

    fn index(self) -> usize {
        SigClass::ALL.iter().position(|&c| c == self).unwrap()
    }
}

impl fmt::Display for SigClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// One cell of the expectations table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellContent {
    Theory {
        theory: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        ops: Vec<String>,
    },
    Impossible { impossible: String },
    Open { open: bool },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableRow {
    pub row: u8,
    /// SI SM FW SW CV FM SF as T/F characters
    pub vector: String,
    pub cells: [CellContent; 4],
}

impl TableRow {
    pub fn expected_vector(&self) -> PropertyVector {
        let bits: Vec<bool> = self.vector.chars().map(|c| c == 'T').collect();
        PropertyVector::from_bools([
            bits[0], bits[1], bits[2], bits[3], bits[4], bits[5], bits[6],
        ])
    }
}

#[derive(Clone, Debug, Deserialize)]
struct TableFile {
    rows: Vec<TableRow>,
}

/// The checked-in transcription of the taxonomy table.
pub fn table() -> &'static [TableRow] {
    static TABLE: OnceLock<Vec<TableRow>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let file: TableFile = serde_json::from_str(include_str!("../data/table1.json"))
            .expect("embedded table data parses");
        assert_eq!(file.rows.len(), 36);
        file.rows
    })
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("row {0} out of range (1..=36)")]
    RowOutOfRange(u8),
    #[error("{0}")]
    Catalog(#[from] crate::catalog::CatalogError),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("{0}")]
    Op(#[from] crate::ops::OpError),
    #[error("no catalog witness for `{0}`")]
    NoWitness(String),
}

/// Builds the compiled theory for a table cell.
pub fn build_cell_theory(
    theory: &str,
    ops: &[String],
    oracle: &Arc<GrowthOracle>,
) -> Result<TheorySpec, TableError> {
    let inst = TheoryInstance::parse(theory)?;
    let base = compile(&inst, oracle)?;
    let chain: Result<Vec<TheoryOp>, TableError> = ops
        .iter()
        .map(|o| TheoryOp::by_name(o).ok_or_else(|| TableError::UnknownOp(o.clone())))
        .collect();
    Ok(apply_chain(&chain?, &base)?)
}

/// The witness used to certify a positive FW entry for a cell theory:
/// each finitely witnessable family carries a construction in the style of
/// its witnessability proof, lifted through the operators by padding the
/// fresh sorts.
pub fn cell_witness(
    theory: &str,
    spec: &TheorySpec,
    strong: bool,
) -> Result<WitnessFn, TableError> {
    let inst = TheoryInstance::parse(theory)?;
    let shape = if strong {
        match inst.family {
            Family::Geq => {
                let (minima, _exact) =
                    minimal_models(spec, 6).map_err(|e| TableError::NoWitness(e.to_string()))?;
                let tuples: Vec<Vec<u64>> = minima
                    .iter()
                    .map(|m| m.card.iter().map(|c| c.fin().unwrap_or(1)).collect())
                    .collect();
                let mut dedup = tuples;
                dedup.sort();
                dedup.dedup();
                WitnessShape::StrongMinimal(dedup)
            }
            Family::Leq => WitnessShape::Pad(PadRule::Fixed(vec![1])),
            _ => return Err(TableError::NoWitness(format!("{} (strong)", spec.name))),
        }
    } else {
        let p = |i: usize| inst.params[i];
        match inst.family {
            Family::Geq => WitnessShape::Pad(PadRule::Fixed(vec![p(0)])),
            Family::EvenInf => WitnessShape::Pad(PadRule::Fixed(vec![2])),
            Family::Leq => WitnessShape::Pad(PadRule::Fixed(vec![1])),
            Family::Mn => WitnessShape::Pad(PadRule::Fixed(vec![p(0).max(p(1))])),
            Family::T23 => WitnessShape::Pad(PadRule::Fixed(vec![3, 3])),
            Family::T233 => WitnessShape::Pad(PadRule::Fixed(vec![3, 3, 1])),
            Family::OneOdd => WitnessShape::Pad(PadRule::Fixed(vec![1, 1])),
            Family::UpInf => WitnessShape::Pad(PadRule::MaxVarsOrMin { min: 2 }),
            Family::MnInf => WitnessShape::Pad(PadRule::Fixed(vec![p(0).max(p(1)), 1])),
            Family::InfNeq => WitnessShape::Pad(PadRule::MaxVarsOrMin { min: 2 }),
            Family::F | Family::FS => WitnessShape::Pad(PadRule::BitReach),
            Family::NeqOdd => WitnessShape::Pad(PadRule::Fixed(vec![3])),
            _ => return Err(TableError::NoWitness(spec.name.clone())),
        }
    };
    Ok(WitnessFn {
        name: format!("catalog({})", spec.name),
        provenance: WitnessProvenance::CatalogProof,
        shape,
    })
}

// ---------------------------------------------------------------------------
// Table reproduction
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct TableRunParams {
    pub bounds: Bounds,
    pub seed: u64,
    /// formulas per theory fed to the witness verifier
    pub witness_corpus: usize,
    /// formulas per theory fed to the strong witness verifier (each is
    /// checked under every arrangement of its variable superset)
    pub strong_witness_corpus: usize,
}

impl Default for TableRunParams {
    fn default() -> Self {
        TableRunParams {
            bounds: Bounds::default(),
            seed: crate::corpus::DEFAULT_SEED,
            witness_corpus: 120,
            strong_witness_corpus: 24,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CellReport {
    pub row: u8,
    pub class: SigClass,
    pub content: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub seed: u64,
    pub cells: Vec<CellReport>,
    pub theory_cells: usize,
    pub distinct_theories: usize,
    pub impossible_cells: usize,
    pub open_rows: Vec<u8>,
    pub pass: bool,
}

impl TableReport {
    pub fn failures(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter(|c| !c.ok)
    }

    /// Text rendering mirroring the table's layout.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(
            "row | SI SM FW SW CV FM SF | empty 1-sorted        | empty many-sorted     | non-empty 1-sorted    | non-empty many-sorted\n",
        );
        out.push_str(&"-".repeat(140));
        out.push('\n');
        for row in table() {
            let v = row.expected_vector();
            let mut line = format!(
                "{:>3} | {}  {}  {}  {}  {}  {}  {} |",
                row.row, v.si, v.sm, v.fw, v.sw, v.cv, v.fm, v.sf
            );
            for class in SigClass::ALL {
                let cell = self
                    .cells
                    .iter()
                    .find(|c| c.row == row.row && c.class == class)
                    .expect("cell present");
                let mark = if cell.ok { "" } else { " [FAIL]" };
                line.push_str(&format!(" {:<21}|", format!("{}{}", cell.content, mark)));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str(&format!(
            "\n{} theory cells ({} distinct theories), {} impossibility cells confirmed, rows {:?} open: {}\n",
            self.theory_cells,
            self.distinct_theories,
            self.impossible_cells,
            self.open_rows,
            if self.pass { "PASS" } else { "FAIL" }
        ));
        for cell in self.failures() {
            out.push_str(&format!(
                "FAIL row {} {}: {}\n",
                cell.row,
                cell.class,
                cell.detail.clone().unwrap_or_default()
            ));
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("row,class,content,expected,computed,ok,detail\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                c.row,
                c.class.label(),
                c.content,
                c.expected.clone().unwrap_or_default(),
                c.computed.clone().unwrap_or_default(),
                c.ok,
                c.detail.clone().unwrap_or_default().replace(',', ";")
            ));
        }
        out
    }
}

/// Recomputes every cell of the table and compares against the
/// transcription: theory cells get their desk-checkable properties
/// recomputed (SI/SM/FM/SF exactly, CV on the seeded corpus, positive
/// FW/SW via witness verification); impossibility cells must violate
/// their cited rule; open rows are reported as such.
pub fn reproduce_table(oracle: &Arc<GrowthOracle>, params: &TableRunParams) -> TableReport {
    let mut work: Vec<(u8, SigClass, CellContent, PropertyVector)> = Vec::new();
    for row in table() {
        for class in SigClass::ALL {
            work.push((
                row.row,
                class,
                row.cells[class.index()].clone(),
                row.expected_vector(),
            ));
        }
    }
    let cells: Vec<CellReport> = work
        .par_iter()
        .map(|(row, class, content, expected)| check_cell(*row, *class, content, expected, oracle, params))
        .collect();

    let mut distinct: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
    let mut theory_cells = 0;
    let mut impossible_cells = 0;
    let mut open_rows: BTreeSet<u8> = BTreeSet::new();
    for row in table() {
        for class in SigClass::ALL {
            match &row.cells[class.index()] {
                CellContent::Theory { theory, ops } => {
                    theory_cells += 1;
                    let family = theory.split(':').next().unwrap_or(theory).to_string();
                    distinct.insert((family, ops.clone()));
                }
                CellContent::Impossible { .. } => impossible_cells += 1,
                CellContent::Open { .. } => {
                    open_rows.insert(row.row);
                }
            }
        }
    }
    let pass = cells.iter().all(|c| c.ok);
    TableReport {
        seed: params.seed,
        cells,
        theory_cells,
        distinct_theories: distinct.len(),
        impossible_cells,
        open_rows: open_rows.into_iter().collect(),
        pass,
    }
}

fn check_cell(
    row: u8,
    class: SigClass,
    content: &CellContent,
    expected: &PropertyVector,
    oracle: &Arc<GrowthOracle>,
    params: &TableRunParams,
) -> CellReport {
    match content {
        CellContent::Open { .. } => CellReport {
            row,
            class,
            content: "open".into(),
            ok: true,
            expected: None,
            computed: None,
            detail: Some("open problem; no theory known and no refutation".into()),
        },
        CellContent::Impossible { impossible } => {
            let viols = check_implications(expected, class.meta());
            let ok = viols.iter().any(|v| v.rule == *impossible);
            CellReport {
                row,
                class,
                content: format!("[{impossible}]"),
                ok,
                expected: Some(expected.to_string()),
                computed: None,
                detail: if ok {
                    None
                } else {
                    Some(format!(
                        "cited rule {impossible} not violated by the row vector here (violations: {:?})",
                        viols.iter().map(|v| v.rule.clone()).collect::<Vec<_>>()
                    ))
                },
            }
        }
        CellContent::Theory { theory, ops } => {
            check_theory_cell(row, class, theory, ops, expected, oracle, params)
        }
    }
}

fn display_name(theory: &str, ops: &[String]) -> String {
    let mut name = theory.to_string();
    for op in ops {
        name = format!("{name}+{op}");
    }
    name
}

fn check_theory_cell(
    row: u8,
    class: SigClass,
    theory: &str,
    ops: &[String],
    expected: &PropertyVector,
    oracle: &Arc<GrowthOracle>,
    params: &TableRunParams,
) -> CellReport {
    let name = display_name(theory, ops);
    let spec = match build_cell_theory(theory, ops, oracle) {
        Ok(s) => s,
        Err(e) => {
            return CellReport {
                row,
                class,
                content: name,
                ok: false,
                expected: Some(expected.to_string()),
                computed: None,
                detail: Some(format!("cannot build theory: {e}")),
            }
        }
    };
    let mut mismatches: Vec<String> = Vec::new();

    // the expected vector must be consistent with every implication rule
    let meta = SigMeta::of(spec.sig);
    let viols = check_implications(expected, meta);
    if !viols.is_empty() {
        mismatches.push(format!(
            "expected vector violates {:?}",
            viols.iter().map(|v| v.rule.clone()).collect::<Vec<_>>()
        ));
    }

    // recompute the desk-checkable properties
    let mut computed = expected.clone();
    for (prop, mode) in [
        (Property::Si, CheckMode::ExactSpectrum),
        (Property::Sm, CheckMode::ExactSpectrum),
        (Property::Fm, CheckMode::ExactSpectrum),
        (Property::Sf, CheckMode::ExactSpectrum),
        (Property::Cv, CheckMode::Corpus),
    ] {
        let report = check_property(&spec, prop, mode, &params.bounds);
        computed.set(prop, report.verdict);
        if report.verdict != expected.get(prop) {
            mismatches.push(format!(
                "{prop}: expected {}, computed {}{}",
                expected.get(prop),
                report.verdict,
                report.evidence.map(|e| format!(" ({e})")).unwrap_or_default()
            ));
        }
    }

    // positive witnessability entries are certified by witness verification
    let corpus = Corpus::default_for(&spec);
    if expected.fw.is_true() {
        match cell_witness(theory, &spec, false) {
            Ok(wit) => {
                let n = params.witness_corpus.min(corpus.formulas.len());
                let report = verify_witness(&spec, &wit, &corpus.formulas[..n], &params.bounds);
                computed.fw = report.verdict;
                if !report.verdict.is_true() {
                    mismatches.push(format!("FW witness {}: {}", wit.name, report));
                }
            }
            Err(e) => mismatches.push(format!("FW: {e}")),
        }
    }
    if expected.sw.is_true() {
        match cell_witness(theory, &spec, true) {
            Ok(wit) => {
                let n = params.strong_witness_corpus.min(corpus.formulas.len());
                let report =
                    verify_strong_witness(&spec, &wit, &corpus.formulas[..n], &params.bounds);
                computed.sw = report.verdict;
                if !report.verdict.is_true() {
                    mismatches.push(format!("SW witness {}: {}", wit.name, report));
                }
            }
            Err(e) => mismatches.push(format!("SW: {e}")),
        }
    }
    // negative FW/SW verdicts are not falsifiable by bounded search; they
    // are carried from the table itself

    // the synthesized constructions must hold whenever their preconditions
    // do: smooth + FM over an empty signature gives a plain witness,
    // smooth + SF a strong one
    if spec.sig.is_empty() && expected.sm.is_true() && expected.fm.is_true() {
        match synthesize_witness(&spec, false, 6) {
            Ok(wit) => {
                let n = params.witness_corpus.min(corpus.formulas.len());
                let report = verify_witness(&spec, &wit, &corpus.formulas[..n], &params.bounds);
                if !report.verdict.is_true() {
                    mismatches.push(format!("synthesized plain witness fails: {report}"));
                }
            }
            Err(e) => mismatches.push(format!("plain synthesis: {e}")),
        }
    }
    if spec.sig.is_empty() && expected.sm.is_true() && expected.sf.is_true() {
        match synthesize_witness(&spec, true, 6) {
            Ok(wit) => {
                let n = params.strong_witness_corpus.min(corpus.formulas.len());
                let report =
                    verify_strong_witness(&spec, &wit, &corpus.formulas[..n], &params.bounds);
                if !report.verdict.is_true() {
                    mismatches.push(format!("synthesized strong witness fails: {report}"));
                }
            }
            Err(e) => mismatches.push(format!("strong synthesis: {e}")),
        }
    }

    CellReport {
        row,
        class,
        content: name,
        ok: mismatches.is_empty(),
        expected: Some(expected.to_string()),
        computed: Some(computed.to_string()),
        detail: if mismatches.is_empty() { None } else { Some(mismatches.join("; ")) },
    }
}

// ---------------------------------------------------------------------------
// Cell explanation
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct CellExplanation {
    pub row: u8,
    pub class: SigClass,
    pub vector: String,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axioms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clauses: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statement: Option<String>,
}

impl fmt::Display for CellExplanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "row {} ({}), properties SI SM FW SW CV FM SF = {}",
            self.row, self.class, self.vector
        )?;
        match self.kind.as_str() {
            "theory" => {
                writeln!(f, "theory: {}", self.theory.as_deref().unwrap_or("?"))?;
                if let Some(ax) = &self.axioms {
                    writeln!(f, "axiom instances (k = 0, 1, 2):")?;
                    for a in ax {
                        writeln!(f, "  {a}")?;
                    }
                }
                if let Some(cs) = &self.clauses {
                    writeln!(f, "compiled shape clauses:")?;
                    for c in cs {
                        writeln!(f, "  {c}")?;
                    }
                }
            }
            "impossible" => {
                writeln!(
                    f,
                    "impossible: {}",
                    self.statement.as_deref().unwrap_or("cited rule")
                )?;
                writeln!(f, "rule id: {}", self.rule.as_deref().unwrap_or("?"))?;
            }
            _ => {
                writeln!(f, "open problem: no example known, no impossibility proof")?;
            }
        }
        Ok(())
    }
}

/// Explains one cell: the theory with its axiomatization, the violated
/// implication rule, or the open-problem note.
pub fn explain_cell(
    row: u8,
    class: SigClass,
    oracle: &Arc<GrowthOracle>,
) -> Result<CellExplanation, TableError> {
    let table_row = table()
        .iter()
        .find(|r| r.row == row)
        .ok_or(TableError::RowOutOfRange(row))?;
    let content = &table_row.cells[class.index()];
    let base = CellExplanation {
        row,
        class,
        vector: table_row.vector.clone(),
        kind: String::new(),
        theory: None,
        axioms: None,
        clauses: None,
        rule: None,
        statement: None,
    };
    Ok(match content {
        CellContent::Open { .. } => CellExplanation { kind: "open".into(), ..base },
        CellContent::Impossible { impossible } => {
            let statement = crate::props::RULES
                .iter()
                .find(|r| r.id == impossible)
                .map(|r| r.statement.to_string());
            CellExplanation {
                kind: "impossible".into(),
                rule: Some(impossible.clone()),
                statement,
                ..base
            }
        }
        CellContent::Theory { theory, ops } => {
            let spec = build_cell_theory(theory, ops, oracle)?;
            let inst = TheoryInstance::parse(theory)?;
            let mut axioms = Vec::new();
            for k in 0..=2u64 {
                for ax in crate::catalog::axiom_instances(&inst, k) {
                    axioms.push(format!("k={k}: {ax}"));
                }
            }
            if !ops.is_empty() {
                axioms.push(format!(
                    "plus the operator axioms of {:?} (free sort / identity function / double-successor closure)",
                    ops
                ));
            }
            let clauses = spec
                .clauses
                .iter()
                .map(|c| {
                    let cons: Vec<String> =
                        c.constraints.iter().map(|x| format!("{x:?}")).collect();
                    format!("[{}] s_mode={}", cons.join(", "), c.s_mode)
                })
                .collect();
            CellExplanation {
                kind: "theory".into(),
                theory: Some(display_name(theory, ops)),
                axioms: Some(axioms),
                clauses: Some(clauses),
                ..base
            }
        }
    })
}

/// Enumerates all 128 property vectors and filters through the core
/// implication rules at permissive metadata: the survivors are exactly the
/// table's row vectors.
pub fn surviving_vectors() -> Vec<PropertyVector> {
    let meta = SigMeta { sort_count: 2, empty_signature: false };
    let mut out = Vec::new();
    for bits in 0..128u32 {
        let v = PropertyVector::from_bools([
            bits & 64 != 0,
            bits & 32 != 0,
            bits & 16 != 0,
            bits & 8 != 0,
            bits & 4 != 0,
            bits & 2 != 0,
            bits & 1 != 0,
        ]);
        if crate::props::check_core_implications(&v, meta).is_empty() {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_parses_and_counts() {
        let rows = table();
        assert_eq!(rows.len(), 36);
        let mut distinct: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
        let mut theory_cells = 0;
        for row in rows {
            assert_eq!(row.vector.len(), 7);
            for cell in &row.cells {
                if let CellContent::Theory { theory, ops } = cell {
                    theory_cells += 1;
                    let family = theory.split(':').next().unwrap().to_string();
                    distinct.insert((family, ops.clone()));
                }
            }
        }
        assert_eq!(theory_cells, 84);
        assert_eq!(distinct.len(), 78);
    }

    #[test]
    fn survivors_match_rows() {
        let survivors = surviving_vectors();
        assert_eq!(survivors.len(), 36);
        let row_vectors: BTreeSet<String> =
            table().iter().map(|r| r.vector.clone()).collect();
        assert_eq!(row_vectors.len(), 36);
        for v in survivors {
            let key: String = [v.si, v.sm, v.fw, v.sw, v.cv, v.fm, v.sf]
                .iter()
                .map(|x| if x.is_true() { 'T' } else { 'F' })
                .collect();
            assert!(row_vectors.contains(&key), "survivor {key} not a table row");
        }
    }

    #[test]
    fn every_theory_cell_builds() {
        let oracle = Arc::new(GrowthOracle::default());
        for row in table() {
            for (ci, cell) in row.cells.iter().enumerate() {
                if let CellContent::Theory { theory, ops } = cell {
                    let spec = build_cell_theory(theory, ops, &oracle)
                        .unwrap_or_else(|e| panic!("row {} cell {ci}: {e}", row.row));
                    // signature class must match the column
                    let class = SigClass::ALL[ci];
                    let meta = SigMeta::of(spec.sig);
                    match class {
                        SigClass::EmptyOneSorted => {
                            assert!(meta.empty_signature && meta.sort_count == 1)
                        }
                        SigClass::EmptyManySorted => {
                            assert!(meta.empty_signature && meta.sort_count >= 2)
                        }
                        SigClass::NonEmptyOneSorted => {
                            assert!(!meta.empty_signature && meta.sort_count == 1)
                        }
                        SigClass::NonEmptyManySorted => {
                            assert!(!meta.empty_signature && meta.sort_count >= 2)
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn impossible_cells_all_violate_their_rule() {
        for row in table() {
            let v = row.expected_vector();
            for (ci, cell) in row.cells.iter().enumerate() {
                if let CellContent::Impossible { impossible } = cell {
                    let meta = SigClass::ALL[ci].meta();
                    let viols = check_implications(&v, meta);
                    assert!(
                        viols.iter().any(|x| x.rule == *impossible),
                        "row {} col {}: rule {} not violated",
                        row.row,
                        ci,
                        impossible
                    );
                }
            }
        }
    }

    #[test]
    fn explain_sample_cells() {
        let oracle = Arc::new(GrowthOracle::default());
        let e = explain_cell(3, SigClass::EmptyOneSorted, &oracle).unwrap();
        assert_eq!(e.kind, "impossible");
        assert_eq!(e.rule.as_deref(), Some("empty_smooth_sf_implies_sw"));
        let e = explain_cell(19, SigClass::NonEmptyOneSorted, &oracle).unwrap();
        assert_eq!(e.kind, "theory");
        assert_eq!(e.theory.as_deref(), Some("T_sigma+fn"));
        let e = explain_cell(13, SigClass::EmptyManySorted, &oracle).unwrap();
        assert_eq!(e.kind, "open");
        assert!(explain_cell(40, SigClass::EmptyManySorted, &oracle).is_err());
    }
}
