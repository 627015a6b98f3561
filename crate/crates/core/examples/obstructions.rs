//! The Euler class and its higher differentials d_r(e).

use ce_formality::fixtures;
use ce_formality::formality::{default_r_max, linf_obstructions};
use ce_formality::linf::derived_brackets;

fn main() -> Result<(), ce_formality::error::Error> {
    let (g, sub, d) = fixtures::voronov_data();
    let v = derived_brackets(&g, &sub, &d, 5)?.algebra;
    let columns = 5;
    let report = linf_obstructions(&v, columns, default_r_max(columns))?;
    println!("Euler class at ({}, {}), zero: {}", report.euler.p, report.euler.q, report.euler.is_zero());
    for step in &report.steps {
        println!("  d_{}(e) in E^{:?}: {:?}", step.r, step.cell, step.coordinates);
    }
    Ok(())
}
