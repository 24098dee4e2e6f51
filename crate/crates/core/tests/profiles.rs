use bzwave::numerics::cubic_sample;
use bzwave::profile::{solve_from_scratch, solve_profile_with, verify_front, ProfileOptions};
use bzwave::rdsim::{run, FieldState, GridSpec, RunOptions};
use bzwave::{ModelParams, WaveProfile};

fn params() -> ModelParams {
    ModelParams::new(2.0, 2.0, 0.5, 0.05).unwrap()
}

fn fixed_domain() -> ProfileOptions {
    ProfileOptions { auto_extend: false, ..ProfileOptions::default() }
}

fn sample(w: &WaveProfile, x: f64) -> (f64, f64) {
    if x <= -w.l {
        return (w.phi[0], w.psi[0]);
    }
    if x >= w.l {
        return (w.phi[w.n() - 1], w.psi[w.n() - 1]);
    }
    let pos = (x + w.l) / w.d_xi;
    (cubic_sample(&w.phi, pos), cubic_sample(&w.psi, pos))
}

#[test]
fn converged_front_is_admissible() {
    let p = params();
    let w = solve_from_scratch(&p, &ProfileOptions::default()).unwrap();
    assert!(w.c > 0.0 && w.c < 2.0, "c = {}", w.c);
    let rep = verify_front(&w, &p).unwrap();
    assert!(rep.passed(), "{:?}", rep.failures);
    assert!(rep.tails.iter().all(|t| t.ok), "{:?}", rep.tails);
}

#[test]
fn shifted_profile_resolves_to_the_same_front() {
    let p = params();
    let w = solve_profile_with(WaveProfile::default_guess(p.epsilon), &p, &fixed_domain()).unwrap();
    for k in [-40, 25] {
        let again = solve_profile_with(w.shifted(k), &p, &fixed_domain()).unwrap();
        assert!((again.c - w.c).abs() < 1e-12, "shift {k}: {} vs {}", again.c, w.c);
        let d = w.phi.iter().zip(&again.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-8, "shift {k}: profiles differ by {d:e}");
    }
}

#[test]
fn speed_does_not_depend_on_the_normalisation() {
    let p = params();
    let speed = |delta: f64| {
        let guess = WaveProfile::initial_guess(60.0, 0.05, delta, p.epsilon);
        let w = solve_profile_with(guess, &p, &fixed_domain()).unwrap();
        assert!((w.phi[w.mid()] - delta).abs() < 1e-12);
        w.c
    };
    let (a, b, c) = (speed(0.3), speed(0.5), speed(0.7));
    assert!((a - b).abs() < 1e-6 && (c - b).abs() < 1e-6, "{a} {b} {c}");
}

#[test]
fn speed_converges_at_second_order_in_the_mesh() {
    let p = params();
    let speed = |d_xi: f64| {
        let guess = WaveProfile::initial_guess(60.0, d_xi, 0.5, p.epsilon);
        solve_profile_with(guess, &p, &fixed_domain()).unwrap().c
    };
    let (c1, c2, c3) = (speed(0.2), speed(0.1), speed(0.05));
    let ratio = (c1 - c2) / (c2 - c3);
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio} from {c1} {c2} {c3}");
}

#[test]
fn profile_translates_rigidly_under_the_pde() {
    let p = params();
    let w = solve_from_scratch(&p, &ProfileOptions::default()).unwrap();
    let g = GridSpec::with_dx(-50.0, 50.0, 0.05, 0.0125, 20.0);
    let init = FieldState::from_history(&g, p.h, |s, x| sample(&w, x + w.c * s));
    let opts = RunOptions { snapshot_every: Some(20.0), ..RunOptions::default() };
    let res = run(&p, &g, init, &opts).unwrap();
    let front = |k: usize| res.track.x[k];
    let steps = res.track.x.len() - 1;
    let speed = -(front(steps) - front(steps / 2)) / (res.track.t[steps] - res.track.t[steps / 2]);
    assert!((speed - w.c).abs() <= 0.02 * w.c, "PDE speed {speed} vs profile speed {}", w.c);

    // Co-moving comparison away from the walls.
    let last = &res.last;
    let mut worst = 0.0f64;
    for i in 0..g.n {
        let x = g.x(i);
        if x.abs() > 35.0 {
            continue;
        }
        let (phi, psi) = sample(&w, x + w.c * last.t);
        worst = worst.max((last.u[i] - phi).abs()).max((last.v[i] - psi).abs());
    }
    assert!(worst < 1e-3, "shape change {worst:e}");
}
