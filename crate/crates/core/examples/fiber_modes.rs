//! Lowest fiber eigenvalues E_φ for the circle, a flat torus and round spheres.

use veff::geometry::{FiberSpace, QuantumParams};
use veff::potentials::{fiber_mode_energy, ModeLabel};

fn main() -> veff::Result<()> {
    let params = QuantumParams::new(1.0, 1.0, 0.0)?;
    let conformal = QuantumParams::new(1.0, 1.0, 1.0 / 6.0)?;

    for k in 0..4 {
        let e = fiber_mode_energy(&FiberSpace::Circle, &ModeLabel::Circle(k), &params)?;
        println!("S^1 {:<10} E = {}", e.label.to_string(), e.value);
    }
    let torus = FiberSpace::flat_torus(vec![1.0, 2.0])?;
    for ks in [[0, 0], [1, 0], [0, 1], [1, 2]] {
        let e = fiber_mode_energy(&torus, &ModeLabel::Torus(ks.to_vec()), &params)?;
        println!("T^2(1,2) {:<10} E = {}", e.label.to_string(), e.value);
    }
    for d in [2, 3] {
        let sphere = FiberSpace::round_sphere(d)?;
        for l in 0..3 {
            let min = fiber_mode_energy(&sphere, &ModeLabel::Sphere(l), &params)?;
            let conf = fiber_mode_energy(&sphere, &ModeLabel::Sphere(l), &conformal)?;
            println!(
                "S^{d} {:<10} E = {:<8} (xi = 1/6: {:.6})",
                min.label.to_string(),
                min.value,
                conf.value
            );
        }
    }
    Ok(())
}
