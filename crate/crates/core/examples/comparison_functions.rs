//! Builds the sub- and super-solution attached to alpha2, verifies their
//! differential inequalities on the default space-time grid and prints the
//! margins.
//!
//! Usage: `comparison_functions [r b h eps]`.

use bzwave::subsuper::{certify, Kind};
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let a: Vec<f64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let p = if a.len() == 4 { ModelParams::new(a[0], a[1], a[2], a[3])? } else { ModelParams::new(2.0, 2.0, 0.5, 0.25)? };
    for kind in [Kind::Sub, Kind::Super] {
        match certify(&p, kind) {
            Ok(c) => {
                let r = &c.report;
                println!("{} solution: certified after {} halvings on {} points", kind.name(), c.halvings, r.points);
                println!("  parameters: {}", serde_json::to_string(&r.params)?);
                println!("  worst D1 = {:.3e} at (t, x) = ({}, {:.4e})", r.d1.value, r.d1.t, r.d1.x);
                println!("  worst D2 = {:.3e} at (t, x) = ({}, {:.4e})", r.d2.value, r.d2.t, r.d2.x);
                println!("  splice mismatch {:.2e}", r.splice_mismatch);
            }
            Err(e) => println!("{} solution: {e}", kind.name()),
        }
    }
    Ok(())
}
