//! Cohomology of a DG-Lie algebra with its induced bracket.

use ce_formality::dgla::cohomology_lie;
use ce_formality::fixtures;

fn main() -> Result<(), ce_formality::error::Error> {
    let l = fixtures::hom_uu_ideal();
    let (h, contraction) = cohomology_lie(&l)?;
    contraction.verify()?;
    println!("dim L = {}, dims of H by degree: {:?}", l.dim(), h.space().graded_dims());
    for (&(i, j), v) in h.bracket_table() {
        println!("  [{}, {}] = {}", h.space().label(i), h.space().label(j), h.space().format_vector(v));
    }
    Ok(())
}
