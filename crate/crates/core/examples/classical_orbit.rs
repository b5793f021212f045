//! Planar motion in polar coordinates (b = x, harmonic V0) integrated on the
//! full space and in the reduced radial problem with the centrifugal V_cl.

use veff::classical::{integrate_full, integrate_reduced, ClassicalState};
use veff::geometry::{FiberSpace, Profile};
use veff::potentials::{BasePotential, EffectivePotential};

fn main() -> veff::Result<()> {
    let plane = Profile::power_law(1.0, 1.0, 0.05, 20.0)?;
    let base = BasePotential::Harmonic {
        k: 1.0,
        center: 0.0,
    };
    let (mass, p_phi, dt, t_end) = (1.0, 1.0, 1e-4, 10.0);
    let v_cl = EffectivePotential::classical(&base, &plane, 1, p_phi * p_phi / (2.0 * mass));

    let start = ClassicalState::new(1.5, 0.3, vec![p_phi]);
    let full = integrate_full(&plane, &FiberSpace::Circle, &base, mass, &start, dt, t_end)?;
    let reduced = integrate_reduced(&v_cl, mass, start.x, start.xdot, dt, t_end)?;

    println!(
        "{:>6} {:>14} {:>14} {:>10}",
        "t", "x full", "x reduced", "|dx|"
    );
    for (a, b) in full.records.iter().zip(&reduced.records).step_by(10_000) {
        println!(
            "{:>6.2} {:>14.10} {:>14.10} {:>10.1e}",
            a.t,
            a.x,
            b.x,
            (a.x - b.x).abs()
        );
    }
    println!(
        "energy drift {:.1e}, p_phi drift {:.1e}",
        full.max_energy_drift(),
        full.max_pphi_drift()
    );
    Ok(())
}
