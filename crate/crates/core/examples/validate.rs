//! Axiom checks with witnesses on a valid and a broken DG-Lie algebra.

use ce_formality::fixtures;

fn main() {
    for (name, l) in [("transfer_example", fixtures::transfer_example()), ("bad", fixtures::bad_leibniz())] {
        let report = l.validate();
        println!("{name}: {}", if report.passed() { "valid" } else { "invalid" });
        for c in &report.checks {
            match (&c.witness, &c.residual) {
                (Some(w), Some(r)) => println!("  {:<20} fails at {w}, residual {r}", c.axiom),
                _ => println!("  {:<20} holds", c.axiom),
            }
        }
    }
}
