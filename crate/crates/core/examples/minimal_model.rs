//! Homotopy transfer to a minimal L-infinity model.

use ce_formality::fixtures;
use ce_formality::formality::minimal_model;
use ce_formality::linf::decalage;

fn main() -> Result<(), ce_formality::error::Error> {
    for (name, l) in [("transfer_example", fixtures::transfer_example()), ("hom_uu_ideal", fixtures::hom_uu_ideal())] {
        let v = decalage(&l, 4);
        let mm = minimal_model(&v)?;
        assert!(mm.projection.validate().passed() && mm.inclusion.validate().passed());
        let arities: Vec<usize> = mm.model.taylor().keys().copied().collect();
        println!("{name}: dim V = {}, dim H = {}, nonzero q_n for n in {arities:?}", v.space().dim(), mm.model.space().dim());
    }
    Ok(())
}
