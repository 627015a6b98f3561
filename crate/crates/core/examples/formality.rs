//! Formality verdicts: an obstruction, a vanishing Euler class and a gauge-trivial example.

use ce_formality::fixtures;
use ce_formality::formality::{formality_verdict, FormalityInput, FormalityVerdict};
use ce_formality::linf::derived_brackets;

fn main() -> Result<(), ce_formality::error::Error> {
    let (g, sub, d) = fixtures::voronov_data();
    let voronov = derived_brackets(&g, &sub, &d, 5)?.algebra;
    let ideal = fixtures::hom_uu_ideal();
    let twisted = fixtures::gauge_formal(5);
    let inputs = [
        ("voronov", FormalityInput::Linf(&voronov)),
        ("hom_uu_ideal", FormalityInput::Dgla(&ideal)),
        ("gauge_formal", FormalityInput::Linf(&twisted)),
    ];
    for (name, input) in inputs {
        let report = formality_verdict(input, 5, 5)?;
        match &report.verdict {
            FormalityVerdict::NotFormal { witness } => println!("{name}: NotFormal, d_{}(e) != 0 at {:?}", witness.r, witness.cell),
            v => println!("{name}: {} after {} gauge steps", v.name(), report.gauge.steps.len()),
        }
    }
    Ok(())
}
