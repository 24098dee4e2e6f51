use bzwave::rdsim::{FieldState, GridSpec, Stepper};
use bzwave::subsuper::{feasibility, margins, ComparisonSolution, Kind, Proposal, VerifyGrid};
use bzwave::{equilibria, ModelParams};

fn params() -> ModelParams {
    ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap()
}

fn build(kind: Kind) -> ComparisonSolution {
    let p = params();
    ComparisonSolution::build(&p, &feasibility(&p, kind).unwrap()).unwrap()
}

/// Runs the PDE from the clipped comparison function and returns the worst
/// violation of the expected order over every step.
fn ordering_defect(cs: &ComparisonSolution, g: &GridSpec) -> f64 {
    let p = params();
    let sign = match cs.kind() {
        Kind::Sub => 1.0,
        Kind::Super => -1.0,
    };
    let mut s = FieldState::from_history(g, p.h, |t, x| cs.clipped(t, x));
    let mut st = Stepper::new(&p, g).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..g.steps() {
        st.step(&mut s).unwrap();
        for i in 0..g.n {
            let (u, v) = cs.clipped(s.t, g.x(i));
            worst = worst.max(sign * (u - s.u[i])).max(sign * (v - s.v[i]));
        }
    }
    worst
}

#[test]
fn clipped_subsolution_stays_below_the_solution() {
    let cs = build(Kind::Sub);
    let g = GridSpec::with_dx(-100.0, 1200.0, 0.25, 0.05, 20.0);
    let d = ordering_defect(&cs, &g);
    assert!(d <= 1e-6, "sub-solution exceeds the solution by {d:e}");
}

#[test]
fn clipped_supersolution_stays_above_the_solution() {
    let cs = build(Kind::Super);
    let g = GridSpec::with_dx(-300.0, 100.0, 0.1, 0.02, 20.0);
    let d = ordering_defect(&cs, &g);
    assert!(d <= 1e-6, "solution exceeds the super-solution by {d:e}");
}

#[test]
fn subsolution_tends_to_beta_along_the_half_speed_ray() {
    let cs = build(Kind::Sub);
    let Proposal::Sub(sp) = cs.proposal() else { unreachable!() };
    let beta = equilibria(&params()).unwrap().beta;
    let dist = |n: f64| {
        let (u, v) = cs.value(n, -0.5 * n * sp.c);
        (u - beta.u).abs().max((v - beta.v).abs())
    };
    let ds: Vec<f64> = [1e4, 1e5, 1e6, 1e7].iter().map(|&n| dist(n)).collect();
    assert!(ds.windows(2).all(|w| w[1] < w[0]), "{ds:?}");
    assert!(ds[3] < 1e-6, "{ds:?}");
}

#[test]
fn supersolution_tends_to_the_origin_far_left() {
    let cs = build(Kind::Super);
    let Proposal::Super(sp) = cs.proposal() else { unreachable!() };
    let dist = |k: f64| {
        let (u, v) = cs.value(0.0, sp.x_star - k / sp.lambda);
        u.abs().max(v.abs())
    };
    let ds: Vec<f64> = [1.0, 10.0, 100.0, 390.0].iter().map(|&k| dist(k)).collect();
    // The profile bottoms out at the mu correction, so ties are allowed.
    assert!(ds.windows(2).all(|w| w[1] <= w[0]), "{ds:?}");
    assert!(ds[3] < 1e-6, "{ds:?}");
}

fn coarse(cs: &ComparisonSolution) -> VerifyGrid {
    VerifyGrid { n_s: 4001, n_t: 6, t_max: 10.0, ..VerifyGrid::default_for(cs) }
}

#[test]
fn margins_move_within_their_finite_difference_sensitivity() {
    let p = params();
    for kind in [Kind::Sub, Kind::Super] {
        let base = feasibility(&p, kind).unwrap();
        let with = |f: f64, g: f64| {
            let prop = match base {
                Proposal::Sub(sp) => Proposal::Sub(bzwave::subsuper::SubSolutionParams { mu: sp.mu * f, delta: sp.delta * g, ..sp }),
                Proposal::Super(sp) => Proposal::Super(bzwave::subsuper::SuperSolutionParams { mu: sp.mu * f, delta: sp.delta * g, ..sp }),
            };
            let cs = ComparisonSolution::build(&p, &prop).unwrap();
            margins(&cs, &coarse(&cs)).margin
        };
        let m0 = with(1.0, 1.0);
        for (f, g) in [(0.5, 1.0), (1.0, 0.5)] {
            // Secant slope near the base point, scaled up to the halving step.
            let h = 1e-3;
            let slope = ((with(1.0 - h * (1.0 - f), 1.0 - h * (1.0 - g)) - m0) / h).abs();
            let change = (with(f, g) - m0).abs();
            assert!(
                change <= 2.0 * slope + 1e-15 * m0.abs().max(1e-300),
                "{kind:?} halving ({f}, {g}): change {change:e}, sensitivity bound {:e}",
                2.0 * slope
            );
        }
    }
}
