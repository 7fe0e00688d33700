//! Command-line front end: satisfiability, minimal cardinalities,
//! convexity instances, property checks, witness verification and
//! synthesis, the growth probe, theory operators, the catalog, and the
//! full taxonomy table.

use clap::{Args, Parser, Subcommand};
use combicheck::catalog::{self, TheoryInstance};
use combicheck::corpus::Corpus;
use combicheck::decide::{self, Bounds, MincardResult, SatResult};
use combicheck::formula::{parse_declarations, parse_formula_with_decls, QfFormula, Var};
use combicheck::oracle::GrowthOracle;
use combicheck::props::{check_property, CheckMode, Property};
use combicheck::spectrum::TheorySpec;
use combicheck::table::{self, SigClass, TableRunParams};
use combicheck::witness::{
    synthesize_witness, verify_strong_witness, verify_witness, witness_growth_probe, WitnessFn,
};
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "combicheck",
    about = "workbench for cardinality-spectrum theories and their combination properties",
    version
)]
struct Cli {
    /// JSON file extending the growth oracle with further known values
    #[arg(long, global = true)]
    oracle: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the taxonomy table and compare against expectations
    Table(TableArgs),
    /// Explain one table cell
    Cell {
        row: u8,
        /// empty-one-sorted | empty-many-sorted | nonempty-one-sorted | nonempty-many-sorted
        class: String,
        #[arg(long)]
        json: bool,
    },
    /// Decide satisfiability of a formula in a theory
    Sat(FormulaArgs),
    /// Minimal domain sizes over all models of a formula
    Mincard(FormulaArgs),
    /// Check one convexity instance
    Convex(ConvexArgs),
    /// Check combination properties of a theory
    Props(PropsArgs),
    /// Verify or synthesize witness functions
    Witness(WitnessArgs),
    /// Run the growth-function refutation probe against a witness
    Probe(ProbeArgs),
    /// Apply theory operators
    Ops(OpsArgs),
    /// List or show catalog theories
    Catalog(CatalogArgs),
}

#[derive(Args)]
struct TableArgs {
    /// brute-force domain bound
    #[arg(long, default_value_t = 4)]
    bounds: u64,
    /// corpus seed
    #[arg(long, default_value_t = combicheck::corpus::DEFAULT_SEED)]
    seed: u64,
    /// output format: text, csv or json
    #[arg(long, default_value = "text")]
    out: String,
}

#[derive(Args)]
struct FormulaArgs {
    /// theory name, optionally with operators: T_geq:2, T_23+fn, ...
    #[arg(long)]
    theory: String,
    /// formula file: optional declaration header line, then an s-expression
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = 4)]
    bounds: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ConvexArgs {
    #[arg(long)]
    theory: String,
    /// cube file (conjunction of literals)
    #[arg(long)]
    cube: String,
    /// semicolon-separated equalities, e.g. "x=z;y=z"
    #[arg(long)]
    pairs: String,
    #[arg(long, default_value_t = 4)]
    bounds: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PropsArgs {
    #[arg(long)]
    theory: String,
    /// exact or corpus
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value_t = 4)]
    bounds: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(subcommand)]
    action: WitnessAction,
}

#[derive(Subcommand)]
enum WitnessAction {
    /// Verify a witness on the seeded corpus
    Verify {
        #[arg(long)]
        theory: String,
        /// catalog | identity | synth-plain | synth-strong
        #[arg(long, default_value = "catalog")]
        wit: String,
        #[arg(long)]
        strong: bool,
        #[arg(long, default_value_t = 60)]
        corpus: usize,
        #[arg(long, default_value_t = 4)]
        bounds: u64,
        #[arg(long)]
        json: bool,
    },
    /// Synthesize a witness from minimal models
    Synth {
        #[arg(long)]
        theory: String,
        /// plain or strong
        #[arg(long, default_value = "plain")]
        strength: String,
        #[arg(long, default_value_t = 6)]
        r#box: u64,
    },
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    theory: String,
    #[arg(long, default_value = "identity")]
    wit: String,
    #[arg(long, default_value_t = 4)]
    depth: u64,
    /// probe-sort index (growth ladders on the second sort use 1)
    #[arg(long, default_value_t = 0)]
    sort: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OpsArgs {
    #[command(subcommand)]
    action: OpsAction,
}

#[derive(Subcommand)]
enum OpsAction {
    /// Apply an operator to a theory and print the result
    Apply {
        /// add_sort | add_trivial_function | add_psi_vee
        #[arg(long)]
        op: String,
        #[arg(long)]
        theory: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CatalogArgs {
    #[command(subcommand)]
    action: CatalogAction,
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List the base theory families
    List,
    /// Show one theory: axioms, compiled clauses, expected properties
    Show {
        name: String,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let oracle = match &cli.oracle {
        None => Arc::new(GrowthOracle::default()),
        Some(path) => match std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|src| GrowthOracle::from_json(&src).map_err(|e| e.to_string()))
        {
            Ok(o) => Arc::new(o),
            Err(e) => {
                eprintln!("error: cannot load oracle {path}: {e}");
                return ExitCode::from(3);
            }
        },
    };
    match run(cli.command, &oracle) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

/// Resolves `T_name:params+op+op` into a compiled theory.
fn resolve_theory(expr: &str, oracle: &Arc<GrowthOracle>) -> Result<TheorySpec, String> {
    let mut parts = expr.split('+');
    let base = parts.next().unwrap();
    let ops: Vec<String> = parts.map(|s| s.to_string()).collect();
    table::build_cell_theory(base, &ops, oracle).map_err(|e| e.to_string())
}

/// Loads a formula file: optional `x:sigma, u:sigma2` header, then the
/// s-expression body. Returns the formula and the declarations.
fn load_formula(
    path: &str,
    spec: &TheorySpec,
) -> Result<(QfFormula, BTreeMap<String, usize>), String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    let trimmed = src.trim_start();
    let (decls, body) = if trimmed.starts_with('(') {
        (BTreeMap::new(), src.clone())
    } else {
        let mut lines = src.splitn(2, '\n');
        let header = lines.next().unwrap_or("");
        let body = lines.next().unwrap_or("").to_string();
        let decls = parse_declarations(header, spec.sig).map_err(|e| e.to_string())?;
        (decls, body)
    };
    let phi = parse_formula_with_decls(&body, spec.sig, &decls).map_err(|e| e.to_string())?;
    Ok((phi, decls))
}

fn parse_pairs(
    spec: &str,
    decls: &BTreeMap<String, usize>,
    sig: combicheck::formula::Signature,
) -> Result<Vec<(Var, Var)>, String> {
    let mut out = Vec::new();
    for part in spec.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (a, b) = part
            .split_once('=')
            .ok_or_else(|| format!("pair `{part}` is not of the form x=y"))?;
        let mk = |name: &str| -> Result<Var, String> {
            let name = name.trim();
            match decls.get(name) {
                Some(&sort) => Ok(Var::new(name, sort)),
                None if sig.sort_count() == 1 => Ok(Var::new(name, 0)),
                None => Err(format!("undeclared variable `{name}` in pair list")),
            }
        };
        out.push((mk(a)?, mk(b)?));
    }
    if out.is_empty() {
        return Err("empty pair list".into());
    }
    Ok(out)
}

fn witness_by_name(
    name: &str,
    theory_expr: &str,
    spec: &TheorySpec,
    strong: bool,
) -> Result<WitnessFn, String> {
    let base = theory_expr.split('+').next().unwrap();
    match name {
        "identity" => Ok(WitnessFn::identity()),
        "catalog" => table::cell_witness(base, spec, strong).map_err(|e| e.to_string()),
        "synth-plain" => synthesize_witness(spec, false, 6).map_err(|e| e.to_string()),
        "synth-strong" => synthesize_witness(spec, true, 6).map_err(|e| e.to_string()),
        other => Err(format!("unknown witness `{other}`")),
    }
}

fn run(cmd: Command, oracle: &Arc<GrowthOracle>) -> Result<ExitCode, String> {
    match cmd {
        Command::Table(args) => {
            let params = TableRunParams {
                bounds: Bounds { domain: args.bounds, ..Bounds::default() },
                seed: args.seed,
                ..TableRunParams::default()
            };
            let report = table::reproduce_table(oracle, &params);
            match args.out.as_str() {
                "json" => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
                ),
                "csv" => print!("{}", report.render_csv()),
                _ => print!("{}", report.render_text()),
            }
            Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Cell { row, class, json } => {
            let class = SigClass::by_name(&class)
                .ok_or_else(|| format!("unknown signature class `{class}`"))?;
            let explanation =
                table::explain_cell(row, class, oracle).map_err(|e| e.to_string())?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&explanation).map_err(|e| e.to_string())?
                );
            } else {
                print!("{explanation}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sat(args) => {
            let spec = resolve_theory(&args.theory, oracle)?;
            let (phi, _) = load_formula(&args.formula, &spec)?;
            let bounds = Bounds { domain: args.bounds, ..Bounds::default() };
            let result = decide::satisfiable(&spec, &phi, &bounds).map_err(|e| e.to_string())?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?
                );
            } else {
                println!("{result}");
                if let SatResult::Sat { model: Some(m), .. } = &result {
                    println!("model: {}", m.to_json());
                }
            }
            Ok(match result {
                SatResult::Sat { .. } => ExitCode::SUCCESS,
                SatResult::Unsat => ExitCode::from(1),
                SatResult::Unknown { .. } => ExitCode::from(2),
            })
        }
        Command::Mincard(args) => {
            let spec = resolve_theory(&args.theory, oracle)?;
            let (phi, _) = load_formula(&args.formula, &spec)?;
            let bounds = Bounds { domain: args.bounds, ..Bounds::default() };
            let result = decide::mincard(&spec, &phi, &bounds).map_err(|e| e.to_string())?;
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&result).map_err(|e| e.to_string())?
                );
            } else {
                println!("{result}");
            }
            Ok(match result {
                MincardResult::Vectors(_) => ExitCode::SUCCESS,
                MincardResult::Unsat => ExitCode::from(1),
                MincardResult::Unknown { .. } => ExitCode::from(2),
            })
        }
        Command::Convex(args) => {
            let spec = resolve_theory(&args.theory, oracle)?;
            let (cube, decls) = load_formula(&args.cube, &spec)?;
            let pairs = parse_pairs(&args.pairs, &decls, spec.sig)?;
            let bounds = Bounds { domain: args.bounds, ..Bounds::default() };
            match decide::check_convexity_instance(&spec, &cube, &pairs, &bounds) {
                Ok(outcome) => {
                    if args.json {
                        println!(
                            "{}",
                            serde_json::to_string_pretty(&outcome).map_err(|e| e.to_string())?
                        );
                    } else {
                        match &outcome {
                            decide::ConvexityOutcome::HoldsVia(i) => {
                                println!("holds via disjunct {i}")
                            }
                            decide::ConvexityOutcome::NotEntailed => {
                                println!("the disjunction is not entailed")
                            }
                            decide::ConvexityOutcome::Counterexample { models } => {
                                println!("counterexample to convexity:");
                                for (i, m) in models {
                                    match m {
                                        Some(m) => println!(
                                            "  disjunct {i} refuted by {}",
                                            m.to_json()
                                        ),
                                        None => println!(
                                            "  disjunct {i} refuted (model beyond bounds)"
                                        ),
                                    }
                                }
                            }
                        }
                    }
                    Ok(match outcome {
                        decide::ConvexityOutcome::HoldsVia(_) => ExitCode::SUCCESS,
                        _ => ExitCode::from(1),
                    })
                }
                Err(decide::DecideError::Undecided(reason)) => {
                    println!("unknown: {reason}");
                    Ok(ExitCode::from(2))
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Props(args) => {
            let spec = resolve_theory(&args.theory, oracle)?;
            let bounds = Bounds { domain: args.bounds, ..Bounds::default() };
            let mode = match args.mode.as_str() {
                "exact" => CheckMode::ExactSpectrum,
                "corpus" => CheckMode::Corpus,
                other => return Err(format!("unknown mode `{other}`")),
            };
            let props = match mode {
                CheckMode::ExactSpectrum => {
                    vec![Property::Si, Property::Sm, Property::Fm, Property::Sf]
                }
                CheckMode::Corpus => vec![
                    Property::Si,
                    Property::Sm,
                    Property::Cv,
                    Property::Fm,
                    Property::Sf,
                ],
            };
            let mut reports = Vec::new();
            for p in props {
                reports.push(check_property(&spec, p, mode, &bounds));
            }
            if mode == CheckMode::ExactSpectrum {
                // convexity is corpus-based in either mode
                reports.push(check_property(&spec, Property::Cv, CheckMode::Corpus, &bounds));
            }
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&reports).map_err(|e| e.to_string())?
                );
            } else {
                for r in &reports {
                    println!("{r}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Witness(args) => match args.action {
            WitnessAction::Verify { theory, wit, strong, corpus, bounds, json } => {
                let spec = resolve_theory(&theory, oracle)?;
                let w = witness_by_name(&wit, &theory, &spec, strong)?;
                let bounds = Bounds { domain: bounds, ..Bounds::default() };
                let formulas = Corpus::default_for(&spec).formulas;
                let n = corpus.min(formulas.len());
                let report = if strong {
                    verify_strong_witness(&spec, &w, &formulas[..n], &bounds)
                } else {
                    verify_witness(&spec, &w, &formulas[..n], &bounds)
                };
                if json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
                    );
                } else {
                    println!("{report}");
                }
                Ok(if report.verdict.is_true() {
                    ExitCode::SUCCESS
                } else if report.verdict.is_false() {
                    ExitCode::from(1)
                } else {
                    ExitCode::from(2)
                })
            }
            WitnessAction::Synth { theory, strength, r#box } => {
                let spec = resolve_theory(&theory, oracle)?;
                let strong = match strength.as_str() {
                    "plain" => false,
                    "strong" => true,
                    other => return Err(format!("unknown strength `{other}`")),
                };
                let wit = synthesize_witness(&spec, strong, r#box).map_err(|e| e.to_string())?;
                println!("synthesized {}", wit.name);
                let x = Var::new("x", 0);
                let sample = QfFormula::var_eq(x.clone(), x);
                let applied = wit.apply(&sample, spec.sig);
                println!("wit((= x x)) = {}", applied.formula);
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Probe(args) => {
            let spec = resolve_theory(&args.theory, oracle)?;
            let wit = witness_by_name(&args.wit, &args.theory, &spec, false)?;
            let report = witness_growth_probe(&spec, &wit, args.depth, args.sort);
            if args.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?
                );
            } else {
                print!("{report}");
            }
            Ok(if report.refuted_at.is_some() { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Ops(args) => match args.action {
            OpsAction::Apply { op, theory, json } => {
                let spec = resolve_theory(&theory, oracle)?;
                let op = combicheck::ops::TheoryOp::by_name(&op)
                    .ok_or_else(|| format!("unknown operator `{op}`"))?;
                let out = combicheck::ops::apply(op, &spec).map_err(|e| e.to_string())?;
                if json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&out.to_json())
                            .map_err(|e| e.to_string())?
                    );
                } else {
                    println!("{} over {}", out.name, out.sig);
                    println!("{}", serde_json::to_string_pretty(&out.to_json()).unwrap());
                }
                Ok(ExitCode::SUCCESS)
            }
        },
        Command::Catalog(args) => match args.action {
            CatalogAction::List => {
                println!("{:<16} {:<9} {:>6}  description", "name", "signature", "params");
                for info in catalog::list_families() {
                    println!(
                        "{:<16} {:<9} {:>6}  {}",
                        info.alias,
                        info.signature.name(),
                        info.params,
                        info.description
                    );
                }
                Ok(ExitCode::SUCCESS)
            }
            CatalogAction::Show { name, json } => {
                let spec = resolve_theory(&name, oracle)?;
                if json {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&spec.to_json())
                            .map_err(|e| e.to_string())?
                    );
                    return Ok(ExitCode::SUCCESS);
                }
                println!("{} over {}", spec.name, spec.sig);
                if let Ok(inst) = TheoryInstance::parse(name.split('+').next().unwrap()) {
                    if name.split('+').count() == 1 {
                        println!("axiom instances:");
                        for k in 0..=2u64 {
                            for ax in catalog::axiom_instances(&inst, k) {
                                println!("  k={k}: {ax}");
                            }
                        }
                    }
                }
                println!("compiled spec:");
                println!("{}", serde_json::to_string_pretty(&spec.to_json()).unwrap());
                if let Some(expected) = expected_vector_for(&name) {
                    println!("expected properties (SI SM FW SW CV FM SF): {expected}");
                }
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

/// Looks up the theory's expected property vector from the taxonomy table.
fn expected_vector_for(expr: &str) -> Option<String> {
    let mut parts = expr.split('+');
    let base = parts.next().unwrap().to_string();
    let ops: Vec<String> = parts.map(|s| s.to_string()).collect();
    for row in table::table() {
        for cell in &row.cells {
            if let table::CellContent::Theory { theory, ops: cell_ops } = cell {
                if *theory == base && *cell_ops == ops {
                    return Some(row.vector.clone());
                }
            }
        }
    }
    None
}
