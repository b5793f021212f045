//! Quantum ⟨x⟩(t) against the classical trajectory in V_cl and the
//! semiclassical one in V_qu, for packets of decreasing width.

use veff::comparison::{mode_components, run_comparison, Packet, Setup};
use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{BasePotential, ModeLabel};
use veff::quantum::Grid1D;

fn main() -> veff::Result<()> {
    let params = QuantumParams::new(1.0, 1.0, 0.2)?;
    let fiber = FiberSpace::Circle;
    let setup = Setup {
        profile: Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -48.0, 48.0)?,
        modes: mode_components(&fiber, &[ModeLabel::Circle(3)], None, &params)?,
        fiber,
        params,
        base: BasePotential::Zero,
        grid: Grid1D::new(-48.0, 48.0, 12_283)?,
    };
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "sigma", "<x>(T)", "x_sc(T)", "x_cl(T)", "gap"
    );
    for sigma in [0.8, 0.4, 0.2] {
        let packet = Packet {
            x0: -3.0,
            sigma,
            p0: 2.0,
        };
        let c = run_comparison(&setup, &packet, 1e-3, 2000, 100)?;
        let (q, sc, cl) = (
            c.final_mean_x(),
            c.semiclassical.last().x,
            c.classical.last().x,
        );
        println!(
            "{sigma:>6} {q:>10.5} {sc:>10.5} {cl:>10.5} {:>10.5}",
            (q - sc).abs()
        );
    }
    Ok(())
}
