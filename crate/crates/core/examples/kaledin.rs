//! The Kaledin class of a minimal structure and its defining identities.

use ce_formality::fixtures;
use ce_formality::formality::kaledin_class;
use ce_formality::linf::derived_brackets;

fn main() -> Result<(), ce_formality::error::Error> {
    let (g, sub, d) = fixtures::voronov_data();
    let voronov = derived_brackets(&g, &sub, &d, 5)?.algebra;
    for (name, v) in [("voronov", voronov), ("gauge_formal", fixtures::gauge_formal(5))] {
        let k = kaledin_class(&v, 3)?;
        for id in &k.identities {
            println!("{name}: {} {}", id.name, if id.holds { "holds" } else { "fails" });
        }
        println!("{name}: class {:?}, primitive found: {}", k.class_coordinates, k.primitive.is_some());
    }
    Ok(())
}
