use bzwave::rdsim::{step_imex, FieldState, GridSpec, Stepper};
use bzwave::ModelParams;
use proptest::prelude::*;

fn params() -> ModelParams {
    ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap()
}

fn grid() -> GridSpec {
    GridSpec::with_dx(-20.0, 20.0, 0.1, 0.01, 5.0)
}

/// Nondecreasing logistic ramp from `lo` to `hi` centred at `a`.
fn ramp(lo: f64, hi: f64, a: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |x| lo + (hi - lo) / (1.0 + (-(x - a) / w).exp())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ordered_data_stay_ordered_and_in_the_box(
        a in -8.0f64..8.0, w in 0.3f64..4.0, gap in 0.0f64..0.4, shift in 0.0f64..6.0,
        lo in 0.0f64..0.3, hi in 0.6f64..1.0,
    ) {
        let (p, g) = (params(), grid());
        let (u, v) = (ramp(lo, hi, a, w), ramp(lo, hi, a + 1.0, w));
        let mut below = FieldState::from_profile(&g, p.h, |x| (u(x), v(x)));
        let mut above = FieldState::from_profile(&g, p.h, |x| ((u(x + shift) + gap).min(1.0), (v(x + shift) + gap).min(1.0)));
        let mut st = Stepper::new(&p, &g).unwrap();
        for _ in 0..g.steps() {
            st.step(&mut below).unwrap();
            st.step(&mut above).unwrap();
            for i in 0..g.n {
                prop_assert!(above.u[i] - below.u[i] >= -1e-8 && above.v[i] - below.v[i] >= -1e-8);
                for x in [below.u[i], below.v[i], above.u[i], above.v[i]] {
                    prop_assert!((-1e-9..=1.0 + 1e-9).contains(&x));
                }
            }
        }
    }
}

#[test]
fn shifting_initial_data_shifts_the_solution_exactly() {
    let p = params();
    let g = GridSpec::with_dx(-40.0, 40.0, 0.1, 0.01, 2.0);
    let k = 7;
    // Exactly flat outside [-3, 3], so the padded shift is itself the
    // shifted grid function.
    let u = |x: f64| bzwave::numerics::smoothstep5((x + 3.0) / 6.0).0;
    let mut a = FieldState::from_profile(&g, p.h, |x| (u(x), u(x + 0.5)));
    let mut b = a.shifted(k);
    let mut st = Stepper::new(&p, &g).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..g.steps() {
        st.step(&mut a).unwrap();
        st.step(&mut b).unwrap();
        for i in k..g.n {
            worst = worst.max((b.u[i] - a.u[i - k]).abs()).max((b.v[i] - a.v[i - k]).abs());
        }
    }
    assert!(worst < 1e-13, "shift defect {worst:e}");
}

#[test]
fn splitting_converges_at_second_order_in_time() {
    // dt / dx^2 <= 1 keeps the diffusion step at Crank-Nicolson.
    let p = params();
    let u = ramp(0.0, 1.0, 0.0, 1.5);
    let state = |dt: f64| {
        let g = GridSpec::with_dx(-20.0, 20.0, 0.1, dt, 1.0);
        let mut s = FieldState::from_profile(&g, p.h, |x| (u(x), u(x - 1.0)));
        let mut st = Stepper::new(&p, &g).unwrap();
        for _ in 0..g.steps() {
            st.step(&mut s).unwrap();
        }
        s
    };
    let reference = state(0.01 / 32.0);
    let err = |s: &FieldState| {
        s.u.iter().zip(&reference.u).chain(s.v.iter().zip(&reference.v)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(&state(0.01)), err(&state(0.005)));
    assert!(e1 / e2 > 3.0, "error ratio {} ({e1:e} -> {e2:e})", e1 / e2);
}

#[test]
fn single_step_matches_fine_reference() {
    let p = params();
    let g = GridSpec::with_dx(-20.0, 20.0, 0.1, 0.01, 0.01);
    let u = ramp(0.1, 0.9, 0.0, 1.0);
    let s = FieldState::from_profile(&g, p.h, |x| (u(x), u(x - 0.5)));
    let coarse = step_imex(&s, &p, &g).unwrap();
    let fine_g = GridSpec { dt: 0.01 / 16.0, ..g };
    let mut fine = FieldState::from_profile(&fine_g, p.h, |x| (u(x), u(x - 0.5)));
    let mut st = Stepper::new(&p, &fine_g).unwrap();
    for _ in 0..16 {
        st.step(&mut fine).unwrap();
    }
    let d = coarse.u.iter().zip(&fine.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-6, "one-step difference {d:e}");
}
