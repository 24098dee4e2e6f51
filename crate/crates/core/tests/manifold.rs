use bzwave::manifold::{
    apply_operator, default_tolerance, envelope_check, fixed_point, manifold_constants, random_iterate,
    translation_identity_check, ManifoldConfig,
};
use bzwave::ModelParams;

fn setup(eps: f64) -> (ModelParams, ManifoldConfig) {
    let p = ModelParams::new(2.0, 2.0, 0.5, eps).unwrap();
    let cfg = manifold_constants(&p, 1.0).unwrap();
    (p, cfg)
}

#[test]
fn operator_maps_the_ball_into_itself() {
    let (p, cfg) = setup(0.05);
    for seed in 0..30 {
        let it = random_iterate(&cfg, seed);
        assert!(it.norm <= cfg.rho);
        for c in [0.75, 1.0, 1.9] {
            let next = apply_operator(&it, &cfg, &p, c).unwrap();
            assert!(next.norm <= cfg.rho, "seed {seed}, c {c}: norm {:e} > rho {:e}", next.norm, cfg.rho);
        }
    }
}

#[test]
fn fixed_points_depend_lipschitz_on_eps_and_c() {
    let (p, cfg) = setup(0.05);
    let (alpha, beta) = (0.5 * cfg.disk_radius, -0.4 * cfg.disk_radius);
    let solve = |eps: f64, c: f64| {
        let q = p.with_epsilon(eps);
        fixed_point(alpha, beta, &cfg, &q, c, default_tolerance(&cfg)).unwrap().iterate
    };
    let base = solve(0.05, 1.0);
    for (de, dc) in [(1e-3, 0.0), (0.0, 1e-3), (1e-3, 1e-3)] {
        let near = base.distance(&solve(0.05 + de, 1.0 + dc), &cfg);
        let far = base.distance(&solve(0.05 + 2.0 * de, 1.0 + 2.0 * dc), &cfg);
        assert!(near > 0.0, "perturbation ({de}, {dc}) had no effect");
        let ratio = far / near;
        assert!((1.6..=2.4).contains(&ratio), "({de}, {dc}): {near:e} -> {far:e}");
    }
}

#[test]
fn translates_of_fixed_points_are_fixed_points() {
    let (p, cfg) = setup(0.05);
    let fp = fixed_point(0.6 * cfg.disk_radius, 0.3 * cfg.disk_radius, &cfg, &p, 1.0, default_tolerance(&cfg)).unwrap();
    for tau in [-1.0, -0.5 * cfg.t_max] {
        let rep = translation_identity_check(&fp.iterate, &cfg, &p, 1.0, tau).unwrap();
        assert!(rep.skipped || rep.passed, "tau {tau}: {rep:?}");
    }
}

#[test]
fn fixed_points_obey_the_exponential_envelope() {
    let (p, cfg) = setup(0.05);
    for k in 0..8 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
        let (alpha, beta) = (0.9 * cfg.disk_radius * a.cos(), 0.9 * cfg.disk_radius * a.sin());
        let fp = fixed_point(alpha, beta, &cfg, &p, 1.2, default_tolerance(&cfg)).unwrap();
        let env = envelope_check(&fp.iterate, &cfg);
        assert!(env.holds(), "angle {a}: {env:?}");
    }
}
