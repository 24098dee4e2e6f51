//! Rest points, their linear type and the profile tail exponents for a few
//! parameter sets.
use bzwave::dde::classify_equilibria;
use bzwave::{kernel_mass, profile_char_roots, ModelParams};

fn main() -> bzwave::Result<()> {
    for (r, b, eps) in [(2.0, 2.0, 0.0), (2.0, 2.0, 0.25), (5.0, 2.5, 0.1), (0.5, 2.0, 0.0)] {
        let p = ModelParams::new(r, b, 0.5, eps)?;
        let cl = classify_equilibria(&p)?;
        println!("r = {r}, b = {b}, eps = {eps}: bistable {}", cl.bistable);
        for e in &cl.equilibria {
            println!(
                "  {:<7} ({:.4}, {:.4})  Re = [{:+.4}, {:+.4}]  {:?}",
                e.name, e.point.u, e.point.v, e.eigen_re[0], e.eigen_re[1], e.stability
            );
        }
        if r > 1.0 {
            let s = profile_char_roots(0.5, &p)?;
            println!(
                "  at c = 0.5: lambda = ({:+.4}, {:+.4}), mu = ({:+.4}, {:+.4}), kernel mass {:.6}",
                s.lambda1,
                s.lambda2,
                s.mu1,
                s.mu2,
                kernel_mass(0.5, r)?
            );
        }
    }
    Ok(())
}
