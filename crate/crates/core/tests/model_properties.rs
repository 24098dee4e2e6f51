use bzwave::model::rest_point_scales;
use bzwave::{equilibria, kernel_mass, profile_char_roots, reaction_terms, KernelSpec, ModelParams};
use proptest::prelude::*;

fn bistable() -> impl Strategy<Value = ModelParams> {
    (1.05f64..10.0, 0.2f64..8.0, 0.0f64..2.0, 0.0f64..1.0)
        .prop_map(|(r, b, h, t)| ModelParams::new(r, b, h, t * 0.999 * r * b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reaction_vanishes_at_equilibria(p in bistable()) {
        for q in equilibria(&p).unwrap().as_array() {
            let (f, g) = reaction_terms(&p, q.u, q.v, q.v).unwrap();
            // Relative to the cancelling terms, which grow without bound as eps -> rb.
            let (su, sv) = rest_point_scales(&p, q);
            prop_assert!(f.abs() <= 1e-14 * su && g.abs() <= 1e-14 * sv, "{q:?}: {f} {g}");
        }
    }

    #[test]
    // alpha22 = b (r - 1) / (rb - eps) is below 1 exactly when eps < b.
    fn alpha1_alpha2_unordered(p in bistable().prop_filter("0 < eps < b", |p| p.epsilon > 1e-9 && p.epsilon < p.b)) {
        let e = equilibria(&p).unwrap();
        prop_assert!(e.alpha2.u > e.alpha1.u && e.alpha2.v < e.alpha1.v);
    }

    #[test]
    fn root_products(c in 0.0f64..2.0, p in bistable()) {
        let s = profile_char_roots(c, &p).unwrap();
        prop_assert!((s.lambda1 * s.lambda2 + (p.r - 1.0)).abs() < 1e-12 * p.r.max(1.0));
        prop_assert!((s.mu1 * s.mu2 + p.epsilon).abs() < 1e-12);
    }

    #[test]
    fn kernel_mass_is_reciprocal(c in 0.0f64..2.0, r in 1.05f64..10.0) {
        let k = KernelSpec::new(c, r).unwrap();
        prop_assert!((k.quadrature_mass() - 1.0 / (r - 1.0)).abs() < 1e-10);
        prop_assert!((kernel_mass(c, r).unwrap() - 1.0 / (r - 1.0)).abs() < 1e-10);
    }
}
