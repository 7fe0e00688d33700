use combicheck::oracle::GrowthOracle;
use combicheck::table::{build_cell_theory, cell_witness};
use combicheck::corpus::Corpus;
use combicheck::decide::Bounds;
use combicheck::witness::{verify_strong_witness, verify_witness};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let oracle = Arc::new(GrowthOracle::default());
    let args: Vec<String> = std::env::args().collect();
    let expr = args.get(1).cloned().unwrap_or_else(|| "T_geq:2+vee".into());
    let strong = args.get(2).map(|s| s == "strong").unwrap_or(false);
    let n: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(24);
    let mut parts = expr.split('+');
    let base = parts.next().unwrap().to_string();
    let ops: Vec<String> = parts.map(|s| s.to_string()).collect();
    let spec = build_cell_theory(&base, &ops, &oracle).unwrap();
    let wit = cell_witness(&base, &spec, strong).unwrap();
    let corpus = Corpus::default_for(&spec);
    let bounds = Bounds::default();
    let start = Instant::now();
    let report = if strong {
        verify_strong_witness(&spec, &wit, &corpus.formulas[..n.min(corpus.formulas.len())], &bounds)
    } else {
        verify_witness(&spec, &wit, &corpus.formulas[..n.min(corpus.formulas.len())], &bounds)
    };
    println!("{:?} {}", start.elapsed(), report);
}
