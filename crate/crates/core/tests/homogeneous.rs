use bzwave::dde::{integrate_dde, stability_box_experiment, HistorySegment};
use bzwave::ModelParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn box_is_invariant(phi in 0.0f64..=1.0, psi in 0.0f64..=1.0, a in 0.0f64..1.0, w in 0.1f64..5.0) {
        let p = ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap();
        let init = HistorySegment::from_fn(p.h, |s| {
            let m = 0.5 * (1.0 + (w * s).sin());
            (phi * (1.0 - a) + a * m * phi, psi * (1.0 - a * m))
        });
        let tr = integrate_dde(&p, &init, 20.0, 0.01).unwrap();
        for (&u, &v) in tr.phi.iter().zip(&tr.psi) {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&u) && (-1e-9..=1.0 + 1e-9).contains(&v));
        }
    }

    #[test]
    fn ordered_constant_histories_stay_ordered(a in prop::array::uniform4(0.0f64..=1.0)) {
        let p = ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap();
        let lo = HistorySegment::constant(p.h, a[0].min(a[1]), a[2].min(a[3]));
        let hi = HistorySegment::constant(p.h, a[0].max(a[1]), a[2].max(a[3]));
        let (x, y) = (integrate_dde(&p, &lo, 50.0, 0.01).unwrap(), integrate_dde(&p, &hi, 50.0, 0.01).unwrap());
        for i in 0..x.phi.len().min(y.phi.len()) {
            prop_assert!(y.phi[i] - x.phi[i] >= -1e-9 && y.psi[i] - x.psi[i] >= -1e-9, "t = {}", x.t[i]);
        }
    }
}

#[test]
fn halving_the_step_reduces_error_eightfold() {
    let p = ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap();
    let init = HistorySegment::from_fn(p.h, |s| (0.3 + 0.1 * s, 0.2 - 0.1 * s));
    let t_end = 4.0;
    let last = |dt: f64| integrate_dde(&p, &init, t_end, dt).unwrap().last();
    let reference = last(0.125 / 64.0);
    let e1 = last(0.125).dist(&reference);
    let e2 = last(0.0625).dist(&reference);
    assert!(e1 / e2 >= 8.0, "error ratio {} ({e1:e} -> {e2:e})", e1 / e2);
}

#[test]
fn small_box_trajectory_is_monotone_in_each_component() {
    let p = ModelParams::new(2.0, 2.0, 0.5, 0.0).unwrap();
    let rep = stability_box_experiment(&p, 0.01, 40.0).unwrap();
    assert!(rep.bound_ok && rep.phi_nonincreasing && rep.psi_nondecreasing, "{rep:?}");
}
