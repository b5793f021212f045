//! Ehrenfest residuals for the tube packet: with the naive potential the
//! residual r0 is as large as ⟨ΔV'⟩, with V_qu it vanishes under refinement.

use veff::comparison::{mode_components, run_comparison, Packet, Setup};
use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{BasePotential, ModeLabel};
use veff::quantum::Grid1D;

fn main() -> veff::Result<()> {
    let params = QuantumParams::new(1.0, 1.0, 0.2)?;
    let fiber = FiberSpace::Circle;
    // wide enough for the packet tail to stay off the walls
    let setup = Setup {
        profile: Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -24.0, 24.0)?,
        modes: mode_components(&fiber, &[ModeLabel::Circle(3)], None, &params)?,
        fiber,
        params,
        base: BasePotential::Zero,
        grid: Grid1D::new(-24.0, 24.0, 6142)?,
    };
    let packet = Packet {
        x0: -3.0,
        sigma: 0.5,
        p0: 2.0,
    };
    let c = run_comparison(&setup, &packet, 1e-3, 2000, 1)?;
    let rep = &c.report;

    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "t", "<x>", "r0", "r1", "<dV'>"
    );
    for i in (0..rep.len()).step_by(200) {
        println!(
            "{:>6.2} {:>12.6} {:>+12.3e} {:>+12.3e} {:>+12.3e}",
            rep.times[i],
            rep.mean_x[i],
            rep.naive_residual[i],
            rep.corrected_residual[i],
            rep.exp_grad_dveff[i]
        );
    }
    println!(
        "max|r0| = {:.3e}, max|r1| = {:.3e}, max|<dV'>| = {:.3e}, wall amplitude {:.1e}",
        rep.max_r0, rep.max_r1, rep.max_grad_dveff, c.max_boundary_amplitude
    );
    Ok(())
}
