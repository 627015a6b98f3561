//! Pages of the column spectral sequence of CE(L, L) and the abutment check.

use ce_formality::ce::{build_ce, ce_first_page_check};
use ce_formality::dgla::DgModule;
use ce_formality::fixtures;
use ce_formality::specseq::SpectralSequence;

fn main() -> Result<(), ce_formality::error::Error> {
    let l = fixtures::hom_uu();
    let module = DgModule::adjoint(&l);
    let columns = 4;
    let ce = build_ce(&module, columns)?;
    ce.check_identities()?;
    ce_first_page_check(&module, columns)?;
    let ss = SpectralSequence::new(ce.filtered())?;
    for page in ss.pages() {
        let dims: Vec<String> = page.dims().iter().filter(|(_, d)| **d > 0).map(|((p, q), d)| format!("({p},{q}):{d}")).collect();
        println!("E_{}  {}", page.r, dims.join(" "));
    }
    let ab = ss.abutment_check()?;
    println!("total cohomology {:?}", ab.cohomology);
    Ok(())
}
