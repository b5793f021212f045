//! Tabulates ΔV_eff for a few warp profiles and couplings, and checks the
//! b-form against the entropy form at every point.

use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{delta_v_eff, delta_v_eff_via_entropy};

fn main() -> veff::Result<()> {
    let profiles = [
        (
            "bump 1+0.5e^{-x^2}",
            Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -3.0, 3.0)?,
        ),
        ("cosh x", Profile::cosh(1.0, 1.0, -3.0, 3.0)?),
        ("plane b=x", Profile::power_law(1.0, 1.0, 0.5, 3.0)?),
    ];
    let fibers = [
        ("S^1", FiberSpace::Circle),
        ("T^2", FiberSpace::flat_torus(vec![1.0, 1.0])?),
    ];
    // minimal coupling, ξ = 1/4 (no b″ term), and one in between
    let couplings = [0.0, 0.25, 0.1875];

    let mut worst: f64 = 0.0;
    for (pname, profile) in &profiles {
        let (lo, hi) = profile.domain();
        for (fname, fiber) in &fibers {
            for &xi in &couplings {
                let params = QuantumParams::new(1.0, 1.0, xi)?;
                print!("{pname:<20} {fname} xi={xi:<6}");
                for i in 0..5 {
                    let x = lo + (hi - lo) * (i as f64 + 0.5) / 5.0;
                    let dv = delta_v_eff(profile, fiber, &params, x)?;
                    let via_s = delta_v_eff_via_entropy(profile, fiber, &params, x, 1.0)?;
                    worst = worst.max((dv - via_s).abs());
                    print!(" {dv:>+10.5}");
                }
                println!();
            }
        }
    }
    println!("max |b-form - entropy form| = {worst:.1e}");
    Ok(())
}
