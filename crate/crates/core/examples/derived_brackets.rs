//! Higher derived brackets of x^3 dy acting on polynomial vector fields.

use ce_formality::fixtures;
use ce_formality::linf::derived_brackets;

fn main() -> Result<(), ce_formality::error::Error> {
    let (g, sub, d) = fixtures::voronov_data();
    let data = derived_brackets(&g, &sub, &d, 4)?;
    let sp = g.space();
    let u = data.complement.iter().position(|&i| sp.label(i) == "u").expect("u in the complement");
    for n in 1..=3 {
        let args = vec![u; n];
        println!("[..[d, u]..], {n} times = {}", sp.format_vector(&data.iterated_bracket(&args)));
    }
    let v = &data.algebra;
    for (n, q) in v.taylor() {
        for (t, val) in q.values() {
            let labels: Vec<&str> = t.iter().map(|&i| v.space().label(i)).collect();
            println!("q_{n}({}) = {}", labels.join(", "), v.space().format_vector(val));
        }
    }
    Ok(())
}
