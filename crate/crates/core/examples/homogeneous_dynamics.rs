//! Spatially uniform dynamics: a few constant histories integrated to their
//! limits, and the small-box experiment near the origin.
use bzwave::dde::{integrate_dde, stability_box_experiment, HistorySegment};
use bzwave::ModelParams;

fn main() -> bzwave::Result<()> {
    let p = ModelParams::new(2.0, 2.0, 0.5, 0.05)?;
    for (phi, psi) in [(0.05, 0.05), (0.2, 0.9), (0.9, 0.1), (0.5, 0.5)] {
        let tr = integrate_dde(&p, &HistorySegment::constant(p.h, phi, psi), 200.0, 0.01)?;
        let end = tr.last();
        println!(
            "from ({phi}, {psi}): ({:.5}, {:.5}) at t = 200, limit {}",
            end.u,
            end.v,
            tr.converged_to().unwrap_or("none")
        );
    }

    let q = p.with_epsilon(0.0);
    let rep = stability_box_experiment(&q, 0.01, 40.0)?;
    println!(
        "small box, delta = 0.01: max psi {:.4e} (bound {}), phi envelope ratio {:.3}, with the M delta rate {:.3}",
        rep.psi_max,
        if rep.bound_ok { "holds" } else { "fails" },
        rep.max_phi_ratio,
        rep.max_phi_ratio_corrected
    );
    Ok(())
}
