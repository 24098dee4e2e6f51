//! Solves one wave profile and prints the itemised front checks.
use bzwave::profile::{collocation_defect, integral_residual, solve_from_scratch, verify_front, ProfileOptions};
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (r, b, h, eps) = match args[..] {
        [r, b, h, e] => (r, b, h, e),
        _ => (2.0, 2.0, 0.0, 0.05),
    };
    let p = ModelParams::new(r, b, h, eps)?;
    let t = std::time::Instant::now();
    let w = solve_from_scratch(&p, &ProfileOptions::default())?;
    println!("c = {:.10}  residual {:.2e}  iterations {}  L = {}  ({:.2?})", w.c, w.residual, w.iterations, w.l, t.elapsed());
    let rep = verify_front(&w, &p)?;
    println!("monotone {}  min(psi - phi) {:.3e}  c in (0, 2): {}", rep.monotone_ok, rep.min_gap, rep.speed_ok);
    for tail in &rep.tails {
        println!("  {:<10} fitted {:+.5} expected {:+.5} ({} samples)", tail.name, tail.fitted, tail.expected, tail.samples);
    }
    println!("integral identity defect {:.3e}", integral_residual(&w, &p)?);
    println!("collocation defect       {:.3e}", collocation_defect(&w, &p)?);
    Ok(())
}
