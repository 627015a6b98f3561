//! Transferring formality along a morphism through injectivity on E_2.

use ce_formality::fixtures;
use ce_formality::formality::transfer_criterion;

fn main() -> Result<(), ce_formality::error::Error> {
    for (name, f, declared) in [
        ("ideal_inclusion", fixtures::ideal_inclusion(), Some(true)),
        ("abelian_inclusion", fixtures::abelian_inclusion(), None),
    ] {
        let r = transfer_criterion(&f, 5, declared, 5)?;
        let bad = r.rows.iter().filter(|row| !row.injective).count();
        println!("{name}: H(f) injective {}, M formal {}, {bad} non-injective cells, {:?}", r.cohomology_injective, r.m_formal, r.conclusion);
    }
    Ok(())
}
