//! Maurer-Cartan elements: checking, gauge action and order-by-order lifting.

use ce_formality::fixtures;
use ce_formality::linalg::SparseVec;
use ce_formality::mc::{gauge_act, lift_to_order, mc_check, TruncatedElement};
use ce_formality::rational::Rational;

fn main() -> Result<(), ce_formality::error::Error> {
    let l = fixtures::two_dim_odd();
    let (h, e) = (SparseVec::unit(0), SparseVec::unit(1));
    let x = TruncatedElement::linear(4, e.clone())?;
    let a = TruncatedElement::linear(4, h)?;
    let y = gauge_act(&l, &a, &x)?;
    println!("e^(t h) * (t e) has coefficients {:?}", y.coefficients().iter().map(|c| l.space().format_vector(c)).collect::<Vec<_>>());
    println!("still Maurer-Cartan: {}", mc_check(&l, &y)?.is_solution());

    let m = fixtures::mc_lattice();
    for (a, b) in [(1, 1), (1, 2)] {
        let x1 = SparseVec::from_terms([(0, Rational::from_int(a)), (1, Rational::from_int(b))]);
        let start = TruncatedElement::linear(2, x1.clone())?;
        let verdict = match lift_to_order(&m, &start, 4)? {
            Ok(_) => "lifts to t^4".to_string(),
            Err(ob) => format!("obstructed at t^{}: {}", ob.target_order - 1, m.space().format_vector(&ob.obstruction)),
        };
        println!("x1 = {}: {verdict}", m.space().format_vector(&x1));
    }
    Ok(())
}
