//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.
//!
//! Scenario 2 is the Gaussian-bump tube b(x) = 1 + 0.5 exp(-x^2) with a
//! circle fiber in mode k = 3, xi = 0.2, hbar = m = 1, V0 = 0, and the packet
//! (x0 = -3, sigma = 0.5, p0 = 2) evolved to T = 2 with dt = 1e-3 on
//! [-8, 8] x 2048 nodes.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veff::classical::{integrate_full, integrate_reduced, ClassicalState};
use veff::comparison::{mode_components, observed_order, Comparison, Packet, Refinement, Setup};
use veff::geometry::{FiberSpace, Profile, QuantumParams};
use veff::potentials::{
    delta_v_eff, delta_v_eff_via_entropy, fiber_mode_energy, v_cl, BasePotential,
    EffectivePotential, ModeLabel,
};
use veff::quantum::{
    build_full_mode_hamiltonian, build_reduced_hamiltonian, crank_nicolson_evolve, gaussian_packet,
    Grid1D, Measure, Schedule,
};
use veff::reducibility::{check_factorization, split_potential, SampledFiberMetric};

const DT: f64 = 1e-3;
const STEPS: usize = 2000;
// [-8, 8] with 2048 nodes
const SPAN: f64 = 16.0;
const NODES: usize = 2048;

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(v: &Verdict, started: Instant) {
    println!(
        "{} {:>2} {}: {} [{:.1}s]",
        if v.pass { "PASS" } else { "FAIL" },
        v.id,
        v.name,
        v.detail,
        started.elapsed().as_secs_f64()
    );
}

fn scenario2_params() -> QuantumParams {
    QuantumParams::new(1.0, 1.0, 0.2).unwrap()
}

const PACKET: Packet = Packet {
    x0: -3.0,
    sigma: 0.5,
    p0: 2.0,
};

/// Scenario-2 tube on `[-half, half]` at the scenario spacing.
fn tube(fiber: FiberSpace, label: ModeLabel, half: f64) -> Setup {
    let params = scenario2_params();
    let intervals = (NODES - 1) as f64 * 2.0 * half / SPAN;
    assert_eq!(
        intervals.fract(),
        0.0,
        "domain must keep the scenario spacing"
    );
    Setup {
        profile: Profile::gaussian_bump(1.0, 0.5, 0.0, 1.0, -half, half).unwrap(),
        modes: mode_components(&fiber, &[label], None, &params).unwrap(),
        fiber,
        params,
        base: BasePotential::Zero,
        grid: Grid1D::new(-half, half, intervals as usize + 1).unwrap(),
    }
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    let mut worst_plain: f64 = 0.0;
    for _ in 0..1000 {
        let (profile, lo, hi) = match rng.gen_range(0..3) {
            0 => {
                let (lo, hi) = (0.5, 5.0);
                (
                    Profile::power_law(rng.gen_range(0.5..2.0), rng.gen_range(-2.0..3.0), lo, hi),
                    lo,
                    hi,
                )
            }
            1 => {
                let (lo, hi) = (-3.0, 3.0);
                (
                    Profile::cosh(rng.gen_range(0.5..2.0), rng.gen_range(0.3..3.0), lo, hi),
                    lo,
                    hi,
                )
            }
            _ => {
                let (lo, hi) = (-4.0, 4.0);
                let b0 = rng.gen_range(0.5..2.0);
                let a = b0 * rng.gen_range(-0.4..1.0);
                let bump = Profile::gaussian_bump(
                    b0,
                    a,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.3..2.0),
                    lo,
                    hi,
                );
                (bump, lo, hi)
            }
        };
        let profile = profile.unwrap();
        let x = rng.gen_range(lo..hi);
        let xi = rng.gen_range(-2.0..2.0);
        let d: usize = rng.gen_range(1..=5);
        let fiber = if d == 1 {
            FiberSpace::Circle
        } else {
            FiberSpace::flat_torus(vec![1.0; d]).unwrap()
        };
        let params = QuantumParams::new(1.0, 1.0, xi).unwrap();
        let b_form = delta_v_eff(&profile, &fiber, &params, x).unwrap();
        let s_form = delta_v_eff_via_entropy(&profile, &fiber, &params, x, 1.0).unwrap();

        // scale of the individual terms, from the analytic jet
        let jet = profile.jet(x);
        let (u, w) = (jet.db / jet.b, jet.d2b / jet.b);
        let df = d as f64;
        let k = params.kinetic_scale() * df;
        let scale = k * (((df - 2.0) / 4.0 + xi * (1.0 - df)) * u * u).abs()
            + k * ((1.0 - 4.0 * xi) / 2.0 * w).abs();
        let err = (b_form - s_form).abs();
        if scale > 0.0 {
            worst = worst.max(err / scale);
        }
        if b_form.abs() > 1e-6 {
            worst_plain = worst_plain.max(err / b_form.abs());
        }
    }
    Verdict {
        id: 1,
        name: "formula equivalence (b-form vs entropy form)",
        pass: worst <= 1e-12,
        detail: format!(
            "max error / term scale = {worst:.2e} over 1000 samples (tol 1e-12); max plain relative error where |dV| > 1e-6: {worst_plain:.2e}"
        ),
    }
}

fn refinement_line(label: &str, r: &Refinement) -> (bool, bool, String) {
    let ratio = r.oracle_ratio();
    let ok = r.coarse.oracle_discrepancy <= 1e-4 && (3.5..=4.5).contains(&ratio);
    let naive_ratio = r.naive_ratio();
    let gap_ok = (0.8..=1.2).contains(&naive_ratio);
    let text = format!(
        "{label}: |lift(chi)-Psi| = {:.3e} -> {:.3e}, ratio {:.4} (order {:.3}); naive gap {:.3e} -> {:.3e}, ratio {:.4}",
        r.coarse.oracle_discrepancy,
        r.fine.oracle_discrepancy,
        ratio,
        observed_order(ratio),
        r.coarse.naive_discrepancy,
        r.fine.naive_discrepancy,
        naive_ratio
    );
    (ok, gap_ok, text)
}

fn criteria_2_and_3() -> (Verdict, Verdict, Comparison) {
    let runs = [
        (
            "circle k=3",
            tube(FiberSpace::Circle, ModeLabel::Circle(3), 8.0),
        ),
        (
            "torus d=2 (1,2)",
            tube(
                FiberSpace::flat_torus(vec![1.0, 1.0]).unwrap(),
                ModeLabel::Torus(vec![1, 2]),
                8.0,
            ),
        ),
        (
            "torus d=3 (1,2,1)",
            tube(
                FiberSpace::flat_torus(vec![1.0, 1.0, 1.0]).unwrap(),
                ModeLabel::Torus(vec![1, 2, 1]),
                8.0,
            ),
        ),
    ];
    let mut pass2 = true;
    let mut pass3 = true;
    let mut lines = Vec::new();
    let mut first = None;
    for (label, setup) in runs {
        let r = Refinement::run(&setup, &PACKET, DT, STEPS, 1).unwrap();
        let (ok, gap_ok, text) = refinement_line(label, &r);
        pass2 &= ok;
        pass3 &= gap_ok;
        lines.push(text);
        first.get_or_insert(r.coarse);
    }
    let detail = lines.join("\n          ");
    (
        Verdict {
            id: 2,
            name: "oracle equivalence (tol 1e-4, ratio in [3.5, 4.5])",
            pass: pass2,
            detail: detail.clone(),
        },
        Verdict {
            id: 3,
            name: "naive-quantization gap persists (ratio in [0.8, 1.2])",
            pass: pass3,
            detail,
        },
        first.unwrap(),
    )
}

fn criterion_4(narrow: &Comparison) -> Verdict {
    // the stated [-8, 8] grid lets the packet tail reach the walls, so the
    // relation is checked on [-24, 24] at the same dx and dt
    let wide = tube(FiberSpace::Circle, ModeLabel::Circle(3), 24.0);
    let r = Refinement::run(&wide, &PACKET, DT, STEPS, 1).unwrap();
    let rep = &r.coarse.report;
    let pass = rep.max_r1 <= 0.05 * rep.max_grad_dveff
        && rep.identity_defect <= 1e-12
        && rep.max_grad_dveff > 0.0
        && (rep.max_r0 / rep.max_grad_dveff - 1.0).abs() <= 0.05;
    let n = &narrow.report;
    Verdict {
        id: 4,
        name: "Ehrenfest relation",
        pass,
        detail: format!(
            "[-24,24]x{}: max|r1| = {:.3e} <= 0.05 max|<dV'>| = {:.3e}; identity defect max|r0 + <dV'> - r1| = {:.1e}; max|r0| = {:.3e} ({:.1}% off max|<dV'>|); r1 ratio under refinement {:.3} (order {:.2}); wall amplitude {:.1e}\n          \
             info, stated [-8,8] grid: max|r1| = {:.3e}, wall amplitude {:.1e}",
            wide.grid.len(),
            rep.max_r1,
            0.05 * rep.max_grad_dveff,
            rep.identity_defect,
            rep.max_r0,
            100.0 * (rep.max_r0 / rep.max_grad_dveff - 1.0).abs(),
            r.r1_ratio(),
            observed_order(r.r1_ratio()),
            r.coarse.max_boundary_amplitude,
            n.max_r1,
            narrow.max_boundary_amplitude,
        ),
    }
}

fn criterion_5() -> Verdict {
    let setup = tube(FiberSpace::Circle, ModeLabel::Circle(3), 8.0);
    let mode = &setup.modes[0].energy;
    let a = (
        &setup.grid,
        &setup.profile,
        &setup.fiber,
        mode,
        &setup.params,
        &setup.base,
    );
    let full = build_full_mode_hamiltonian(a.0, a.1, a.2, a.3, a.4, a.5).unwrap();
    let reduced = build_reduced_hamiltonian(a.0, a.1, a.2, a.3, a.4, a.5).unwrap();
    let chi =
        gaussian_packet(&setup.grid, -3.0, 0.5, 2.0, 1.0, full.measure.clone(), None).unwrap();
    let psi = gaussian_packet(&setup.grid, -3.0, 0.5, 2.0, 1.0, Measure::Flat, None).unwrap();
    let sched = Schedule::observables_only(100);
    let df = crank_nicolson_evolve(&full, &chi, DT, 10_000, sched)
        .unwrap()
        .observables
        .max_norm_drift();
    let dr = crank_nicolson_evolve(&reduced, &psi, DT, 10_000, sched)
        .unwrap()
        .observables
        .max_norm_drift();
    Verdict {
        id: 5,
        name: "unitarity over 1e4 Crank-Nicolson steps",
        pass: df <= 1e-10 && dr <= 1e-10,
        detail: format!("norm drift weighted {df:.2e}, flat {dr:.2e} (tol 1e-10)"),
    }
}

fn criterion_6() -> Verdict {
    let plane = Profile::power_law(1.0, 1.0, 0.05, 20.0).unwrap();
    let base = BasePotential::Harmonic {
        k: 1.0,
        center: 0.0,
    };
    let (mass, p_phi, dt, t_end) = (1.0, 1.0, 1e-4, 10.0);
    let e_phi = p_phi * p_phi / (2.0 * mass);
    let v_cl = EffectivePotential::classical(&base, &plane, 1, e_phi);
    let mut worst_dx: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let mut parts = Vec::new();
    for (x0, v0) in [(1.0, 0.0), (1.5, 0.3), (0.8, -0.4)] {
        let full = integrate_full(
            &plane,
            &FiberSpace::Circle,
            &base,
            mass,
            &ClassicalState::new(x0, v0, vec![p_phi]),
            dt,
            t_end,
        )
        .unwrap();
        let red = integrate_reduced(&v_cl, mass, x0, v0, dt, t_end).unwrap();
        assert!(full.is_complete() && red.is_complete());
        let dx = full
            .records
            .iter()
            .zip(&red.records)
            .map(|(a, b)| (a.x - b.x).abs())
            .fold(0.0, f64::max);
        worst_dx = worst_dx.max(dx);
        worst_drift = worst_drift.max(full.max_pphi_drift());
        parts.push(format!("({x0}, {v0}): max|dx| {dx:.1e}"));
    }
    Verdict {
        id: 6,
        name: "classical reduction exactness",
        pass: worst_dx <= 1e-8 && worst_drift <= 1e-10,
        detail: format!(
            "{}; max p_phi drift {worst_drift:.1e} (tol 1e-8, 1e-10)",
            parts.join(", ")
        ),
    }
}

fn criterion_7() -> Verdict {
    let plane = Profile::power_law(1.0, 1.0, 0.5, 5.0).unwrap();
    let base = BasePotential::Harmonic {
        k: 1.0,
        center: 0.0,
    };
    let params = QuantumParams::new(0.7, 1.3, 0.0).unwrap();
    let k = 2;
    let p_phi = params.hbar * k as f64;
    let e_phi = fiber_mode_energy(&FiberSpace::Circle, &ModeLabel::Circle(k), &params)
        .unwrap()
        .value;
    let grid = Grid1D::new(0.5, 5.0, 2048).unwrap();
    let worst = grid
        .nodes()
        .into_iter()
        .map(|x| {
            let centrifugal = v_cl(&base, &plane, e_phi, x).unwrap() - base.value(x);
            (centrifugal - p_phi * p_phi / (2.0 * params.mass * x * x)).abs()
        })
        .fold(0.0, f64::max);
    Verdict {
        id: 7,
        name: "centrifugal special case",
        pass: worst <= 1e-14,
        detail: format!("max |V_cl - V0 - p^2/2mx^2| = {worst:.1e} over 2048 nodes (tol 1e-14)"),
    }
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut identical = true;
    let mut samples = 0;
    for d in 1..=4 {
        let fiber = if d == 1 {
            FiberSpace::Circle
        } else {
            FiberSpace::flat_torus(vec![1.0; d]).unwrap()
        };
        let profiles = [
            Profile::cosh(1.2, 0.8, -3.0, 3.0).unwrap(),
            Profile::gaussian_bump(1.0, 0.5, 0.2, 1.0, -3.0, 3.0).unwrap(),
            Profile::power_law(0.9, 1.7, 0.5, 3.0).unwrap(),
        ];
        for profile in &profiles {
            let (lo, hi) = profile.domain();
            for _ in 0..50 {
                let x = rng.gen_range(lo..hi);
                let params = QuantumParams::new(1.0, 1.0, rng.gen_range(-2.0..2.0)).unwrap();
                let values: Vec<u64> = [1e-3, 1.0, 1e3]
                    .iter()
                    .map(|&cell| {
                        delta_v_eff_via_entropy(profile, &fiber, &params, x, cell)
                            .unwrap()
                            .to_bits()
                    })
                    .collect();
                identical &= values.windows(2).all(|w| w[0] == w[1]);
                samples += 1;
            }
        }
    }
    Verdict {
        id: 8,
        name: "independence of the cell size",
        pass: identical,
        detail: format!("cells 1e-3, 1, 1e3 bitwise identical at {samples} points: {identical}"),
    }
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let d = 3;
    let fiber: Vec<nalgebra::DMatrix<f64>> = (0..6)
        .map(|_| {
            let a = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
            &a * a.transpose() + nalgebra::DMatrix::identity(d, d) * 0.5
        })
        .collect();
    let profile = Profile::cosh(1.0, 1.0, -2.0, 2.0).unwrap();
    let xs: Vec<f64> = (0..11).map(|i| -2.0 + 0.4 * i as f64).collect();
    let x0 = 5;
    let m = SampledFiberMetric::warped(&profile, xs.clone(), &fiber).unwrap();
    let v = check_factorization(&m, x0, 1e-10).unwrap();
    let b_err = xs
        .iter()
        .zip(&v.b)
        .map(|(x, b)| (b - x.cosh() / xs[x0].cosh()).abs())
        .fold(0.0, f64::max);
    let accepted = v.reducible && v.residual <= 1e-10 && b_err <= 1e-10;

    let s: Vec<f64> = (0..fiber.len()).map(|j| (1.3 * j as f64).sin()).collect();
    // at most 1% on [-2, 2], and not of the form β(x) g(φ)
    let mut bent = Vec::new();
    for &x in &xs {
        let b = profile.value(x);
        for (j, g) in fiber.iter().enumerate() {
            bent.push(g * ((1.0 + 0.01 * (x / 2.0) * s[j]) / (b * b)));
        }
    }
    let bent = SampledFiberMetric::new(xs.clone(), fiber.len(), bent, None).unwrap();
    let vb = check_factorization(&bent, x0, 1e-3).unwrap();

    let phis: Vec<f64> = (0..7).map(|j| j as f64 * 0.9).collect();
    let mut v0 = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        for p in &phis {
            v0.push(x.sin() + p.cos() / (v.b[i] * v.b[i]));
        }
    }
    let split = split_potential(&v0, xs.len(), phis.len(), &v.b, 1e-10).unwrap();
    Verdict {
        id: 9,
        name: "reducibility checker",
        pass: accepted && !vb.reducible && split.separable && split.residual <= 1e-10,
        detail: format!(
            "product: reducible {} residual {:.1e}, b error {:.1e}; perturbed: reducible {} residual {:.2e}; split residual {:.1e}",
            v.reducible, v.residual, b_err, vb.reducible, vb.residual, split.residual
        ),
    }
}

fn criterion_10() -> Verdict {
    // wide enough that even the sigma = 0.1 packet (spread ~10 at T) stays
    // off the walls; same dx, which keeps sigma > 4 dx for all widths
    let setup = tube(FiberSpace::Circle, ModeLabel::Circle(3), 96.0);
    let mut gaps = Vec::new();
    let mut parts = Vec::new();
    for sigma in [0.4, 0.2, 0.1] {
        assert!(sigma > 4.0 * setup.grid.dx());
        let packet = Packet { sigma, ..PACKET };
        let c = veff::comparison::run_comparison(&setup, &packet, DT, STEPS, 100).unwrap();
        let gap = (c.final_mean_x() - c.semiclassical.last().x).abs();
        parts.push(format!(
            "sigma {sigma}: <x>(T) {:.4}, x_sc(T) {:.4}, gap {gap:.4}, wall {:.0e}",
            c.final_mean_x(),
            c.semiclassical.last().x,
            c.max_boundary_amplitude
        ));
        gaps.push(gap);
    }
    let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
    Verdict {
        id: 10,
        name: "semiclassical tracking as sigma shrinks",
        pass: monotone,
        detail: parts.join("; "),
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut verdicts = Vec::new();
    let mut emit = |v: Verdict| {
        report(&v, started);
        verdicts.push(v.pass);
    };
    emit(criterion_1());
    let (v2, v3, narrow) = criteria_2_and_3();
    emit(v2);
    emit(v3);
    emit(criterion_4(&narrow));
    emit(criterion_5());
    emit(criterion_6());
    emit(criterion_7());
    emit(criterion_8());
    emit(criterion_9());
    emit(criterion_10());
    let failed = verdicts.iter().filter(|p| !**p).count();
    println!(
        "{} of {} criteria passed",
        verdicts.len() - failed,
        verdicts.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
