mod support;

use qkr_core::{
    boltzmann_ensemble, classical_energy_trace, classical_free, classical_kick, ClassicalEnsemble,
    ClassicalSampling, ClassicalState, MoleculeSpec,
};
use support::r_squared_linear;

fn step(theta: f64, l: f64, strength: f64, tau: f64) -> (f64, f64) {
    let s = classical_free(classical_kick(ClassicalState::new(theta, l), strength), tau);
    (s.theta(), s.l)
}

#[test]
fn kick_then_rotate_preserves_area() {
    let (p, tau, h) = (3.8, 1.66, 1e-6);
    for &(theta, l) in &[(0.3, 1.0), (1.2, -4.5), (2.9, 12.0), (0.05, 0.0)] {
        let dth_p = step(theta + h, l, p, tau);
        let dth_m = step(theta - h, l, p, tau);
        let dl_p = step(theta, l + h, p, tau);
        let dl_m = step(theta, l - h, p, tau);
        // Unwrap θ differences across the mod-π cut.
        let wrap = |d: f64| d - std::f64::consts::PI * (d / std::f64::consts::PI).round();
        let j11 = wrap(dth_p.0 - dth_m.0) / (2.0 * h);
        let j21 = (dth_p.1 - dth_m.1) / (2.0 * h);
        let j12 = wrap(dl_p.0 - dl_m.0) / (2.0 * h);
        let j22 = (dl_p.1 - dl_m.1) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        assert!((det - 1.0).abs() < 1e-6, "({theta}, {l}): det = {det}");
    }
}

#[test]
fn zero_kick_conserves_energy() {
    let sampling = ClassicalSampling::level(5);
    let mut ens = ClassicalEnsemble::sample(500, &sampling, 3).unwrap();
    let e0 = ens.mean_energy();
    for _ in 0..20 {
        ens.kick(0.0);
        ens.free(1.3);
    }
    assert_eq!(ens.mean_energy(), e0);
    assert!((e0 - 30.0).abs() < 1e-12);
}

#[test]
fn seeds_agree_within_statistical_error() {
    let ens = boltzmann_ensemble(&MoleculeSpec::oxygen(), 25.0, 1e-6).unwrap();
    let sampling = ClassicalSampling::from_ensemble(&ens).unwrap();
    let a = classical_energy_trace(20_000, &sampling, 3.8, 1.66, 20, 1).unwrap();
    let b = classical_energy_trace(20_000, &sampling, 3.8, 1.66, 20, 2).unwrap();
    for k in [0, 5, 10, 20] {
        let (ea, eb) = (a.trace.energies()[k], b.trace.energies()[k]);
        let se = (a.std_error[k].powi(2) + b.std_error[k].powi(2)).sqrt();
        assert!(
            (ea - eb).abs() < 3.0 * se,
            "kick {k}: {ea} vs {eb} (se {se})"
        );
    }
}

#[test]
fn chaotic_map_diffuses_linearly() {
    // K = τP ≈ 6.3.
    let ens = boltzmann_ensemble(&MoleculeSpec::oxygen(), 25.0, 1e-6).unwrap();
    let sampling = ClassicalSampling::from_ensemble(&ens).unwrap();
    let trace = classical_energy_trace(20_000, &sampling, 3.8, 1.66, 50, 0).unwrap();
    let e = trace.trace.energies();
    let x: Vec<f64> = (10..=50).map(|k| k as f64).collect();
    let y: Vec<f64> = (10..=50).map(|k| e[k]).collect();
    let r2 = r_squared_linear(&x, &y);
    assert!(r2 > 0.95, "R² = {r2}");
    assert!(e[50] > 3.0 * e[10]);
}

#[test]
fn trace_is_independent_of_worker_count() {
    let sampling = ClassicalSampling::level(3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| classical_energy_trace(5000, &sampling, 3.8, 1.66, 10, 9).unwrap())
    };
    assert_eq!(run(1), run(4));
}
