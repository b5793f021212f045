//! Norm conservation of Crank–Nicolson in the weighted (full-mode) and flat
//! (reduced) measures, and the lift χ ↦ b^{d/2} χ between them.

use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{fiber_mode_energy, BasePotential, ModeLabel};
use veff::quantum::{
    build_full_mode_hamiltonian, build_reduced_hamiltonian, crank_nicolson_evolve, gaussian_packet,
    lift_to_reduced, Grid1D, Schedule,
};

fn main() -> veff::Result<()> {
    let params = QuantumParams::new(1.0, 1.0, 0.2)?;
    let fiber = FiberSpace::Circle;
    let profile = Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -8.0, 8.0)?;
    let grid = Grid1D::new(-8.0, 8.0, 2048)?;
    let mode = fiber_mode_energy(&fiber, &ModeLabel::Circle(3), &params)?;
    let base = BasePotential::Zero;

    let full = build_full_mode_hamiltonian(&grid, &profile, &fiber, &mode, &params, &base)?;
    let reduced = build_reduced_hamiltonian(&grid, &profile, &fiber, &mode, &params, &base)?;
    let chi = gaussian_packet(&grid, -3.0, 0.5, 2.0, 1.0, full.measure.clone(), None)?;
    let other = gaussian_packet(&grid, 1.0, 0.8, -1.0, 1.0, full.measure.clone(), None)?;
    let psi = lift_to_reduced(&chi)?;
    println!(
        "adjointness defect: full {:.1e}, reduced {:.1e}",
        full.adjointness_defect(&chi, &other)?,
        reduced.adjointness_defect(&psi, &lift_to_reduced(&other)?)?
    );
    println!(
        "norms: weighted chi {:.15}, lifted flat {:.15}",
        chi.norm(),
        psi.norm()
    );

    let sched = Schedule::observables_only(1000);
    let a = crank_nicolson_evolve(&full, &chi, 1e-3, 10_000, sched)?;
    let b = crank_nicolson_evolve(&reduced, &psi, 1e-3, 10_000, sched)?;
    println!(
        "norm drift over 1e4 steps: weighted {:.1e}, flat {:.1e}",
        a.observables.max_norm_drift(),
        b.observables.max_norm_drift()
    );
    Ok(())
}
