use combicheck::oracle::GrowthOracle;
use combicheck::table::{reproduce_table, TableRunParams};
use std::sync::Arc;
use std::time::Instant;

fn main() {
    let oracle = Arc::new(GrowthOracle::default());
    let start = Instant::now();
    let report = reproduce_table(&oracle, &TableRunParams::default());
    println!("elapsed: {:?}", start.elapsed());
    println!(
        "theory cells {} distinct {} impossible {} open {:?} pass {}",
        report.theory_cells,
        report.distinct_theories,
        report.impossible_cells,
        report.open_rows,
        report.pass
    );
    for f in report.failures() {
        println!("FAIL r{} {}: {}", f.row, f.class, f.detail.clone().unwrap_or_default());
    }
}
