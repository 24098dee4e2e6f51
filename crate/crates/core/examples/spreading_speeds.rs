//! Measures the four monostable spreading speeds at r = 2, b = 2, h = 0.5,
//! eps = 0.25, plus the bistable front speed at eps = 0.
use bzwave::rdsim::{bistable_front_speed, spreading_speed_experiment, GridSpec, SpreadingKind};
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let p = ModelParams::new(2.0, 2.0, 0.5, 0.25)?;
    for kind in SpreadingKind::ALL {
        let rep = spreading_speed_experiment(kind, &p, None)?;
        let expected = rep.expected.map_or("-".to_string(), |e| format!("{e:.4}"));
        println!(
            "{:<13} {:>9} speed {:+.4}  expected {expected}  r2 {:.6}",
            kind.name(),
            rep.direction,
            rep.speed,
            rep.r2
        );
    }
    let q = p.with_epsilon(0.0);
    let g = GridSpec::with_dx(-100.0, 60.0, 0.1, 0.01, 80.0);
    let est = bistable_front_speed(&q, &g, [40.0, 80.0])?;
    println!("bistable front (eps = 0): leftward speed {:.4}", est.c);
    Ok(())
}
