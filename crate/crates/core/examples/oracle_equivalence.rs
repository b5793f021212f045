//! The reduced Schrödinger equation with V_qu against the full-space mode
//! evolution on a Gaussian-bump tube, at two grid refinements.

use veff::comparison::{mode_components, observed_order, Packet, Refinement, Setup};
use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{BasePotential, ModeLabel};
use veff::quantum::Grid1D;

fn main() -> veff::Result<()> {
    let params = QuantumParams::new(1.0, 1.0, 0.2)?;
    let fiber = FiberSpace::Circle;
    let setup = Setup {
        profile: Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -8.0, 8.0)?,
        modes: mode_components(&fiber, &[ModeLabel::Circle(3)], None, &params)?,
        fiber,
        params,
        base: BasePotential::Zero,
        grid: Grid1D::new(-8.0, 8.0, 2048)?,
    };
    let packet = Packet {
        x0: -3.0,
        sigma: 0.5,
        p0: 2.0,
    };
    let r = Refinement::run(&setup, &packet, 1e-3, 2000, 100)?;
    for (label, c) in [("coarse", &r.coarse), ("fine", &r.fine)] {
        println!(
            "{label:<6} |lift(chi) - Psi| = {:.3e}   naive gap = {:.3e}   <x>(T) = {:.6}",
            c.oracle_discrepancy,
            c.naive_discrepancy,
            c.final_mean_x()
        );
    }
    println!(
        "discrepancy ratio {:.4} (order {:.3}); naive gap ratio {:.4}",
        r.oracle_ratio(),
        observed_order(r.oracle_ratio()),
        r.naive_ratio()
    );
    Ok(())
}
