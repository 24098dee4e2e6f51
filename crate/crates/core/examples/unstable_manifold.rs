//! Fixed points of the unstable-manifold operator near the origin, with
//! contraction factor, ODE defect, envelope and translation checks.
//!
//! Usage: `unstable_manifold [eps] [c]`.

use bzwave::manifold::{
    contraction_estimate, default_tolerance, envelope_check, fixed_point, manifold_constants, ode_defect,
    translation_identity_check,
};
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let eps = args.first().copied().unwrap_or(0.05);
    let c = args.get(1).copied().unwrap_or(1.0);
    let p = ModelParams::new(2.0, 2.0, 0.5, eps)?;
    let cfg = manifold_constants(&p, 1.0)?;
    println!(
        "C1 = {:.4}  C2 = {:.4}  C3 = {:.4}  C4 = {:.4}  rho = {:.4e}  disk = {:.4e}  T = {}",
        cfg.c1, cfg.c2, cfg.c3, cfg.c4, cfg.rho, cfg.disk_radius, cfg.t_max
    );
    println!("contraction ratio over 20 random pairs: {:.4}", contraction_estimate(&cfg, &p, c, 20)?);
    let half = cfg.with_rho(0.5 * cfg.rho)?;
    println!("  at rho/2: {:.4}", contraction_estimate(&half, &p, c, 20)?);

    let (alpha, beta) = (0.6 * cfg.disk_radius, 0.3 * cfg.disk_radius);
    let fp = fixed_point(alpha, beta, &cfg, &p, c, default_tolerance(&cfg))?;
    println!(
        "fixed point from ({alpha:.3e}, {beta:.3e}): {} iterations, last difference {:.2e}, norm {:.3e}",
        fp.iterations, fp.last_difference, fp.iterate.norm
    );
    println!("ODE defect: {:.3e}", ode_defect(&fp.iterate, &cfg, &p, c));
    for step in [0.02, 0.01, 0.005] {
        let g = cfg.with_step(step)?;
        let f = fixed_point(alpha, beta, &g, &p, c, default_tolerance(&g))?;
        println!("  step {step}: defect {:.3e}", ode_defect(&f.iterate, &g, &p, c));
    }
    let env = envelope_check(&fp.iterate, &cfg);
    println!("envelope ratios: phi {:.3e}  psi {:.3e}", env.phi_ratio, env.psi_ratio);
    for tau in [0.0, -1.0, -0.5 * cfg.t_max] {
        let rep = translation_identity_check(&fp.iterate, &cfg, &p, c, tau)?;
        match rep.notice {
            Some(n) => println!("tau = {:.2}: skipped ({n})", rep.tau),
            None => println!(
                "tau = {:.2}: relative difference {:.2e}, norm ratio {:.3}",
                rep.tau, rep.relative_difference, rep.norm_ratio
            ),
        }
    }
    Ok(())
}
