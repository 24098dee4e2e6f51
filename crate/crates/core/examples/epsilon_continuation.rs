//! Continues the wave profile down a geometric eps schedule and
//! extrapolates the speed of the degenerate problem.
use bzwave::profile::continue_in_epsilon;
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let h: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0.0);
    let p = ModelParams::new(2.0, 2.0, h, 0.2)?;
    let run = continue_in_epsilon(&p, 0.2, 0.00625, 0.5)?;
    println!("{:>10}  {:>14}  {:>10}", "eps", "c", "residual");
    for s in &run.steps {
        println!("{:>10.5}  {:>14.10}  {:>10.2e}", s.epsilon, s.c, s.residual);
    }
    println!("differences {:?}", run.differences);
    println!("strictly decreasing over the last four: {}", run.differences_decreasing);
    println!("extrapolated c = {:?}, eps = 0 solve c = {:?}", run.c_star_extrapolated, run.c_limit);
    if let Some(msg) = &run.aborted {
        println!("aborted: {msg}");
    }
    Ok(())
}
