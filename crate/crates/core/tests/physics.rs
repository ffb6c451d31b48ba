mod support;

use qkr_core::ensembles::gaussian_field_squared_integral;
use qkr_core::{
    boltzmann_ensemble, kick_operator, kick_strength_from_pulse, propagate_delta_train,
    propagate_finite_pulse, MoleculeSpec, Parity, PropagationOptions, PulseSpec, PulseTrain,
    RotorBasis, TwoStageTrain, WavePacket,
};
use support::polyfit;

#[test]
fn kicks_at_full_revival_grow_quadratically() {
    let basis = RotorBasis::new(60, Parity::Even, 0).unwrap();
    let ground = WavePacket::basis_state(basis.clone(), 0).unwrap();
    let train = PulseTrain::periodic(10, 1.0, 1.0).unwrap();
    let traj = propagate_delta_train(&ground, &train, &PropagationOptions::default()).unwrap();

    let n: Vec<f64> = (0..traj.len()).map(|k| k as f64).collect();
    let e: Vec<f64> = traj.iter().map(|s| s.state.energy()).collect();
    let (coef, resid) = polyfit(&n, &e, 2);
    let scale = e.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let worst = resid.iter().fold(0.0f64, |a, r| a.max(r.abs())) / scale;
    assert!(worst < 1e-6, "relative residual {worst:.2e}");
    // From |J=0⟩ a kick of strength P gives ⟨J(J+1)⟩ = P²⟨sin²2θ⟩ = 8P²/15.
    assert!((coef[2] - 8.0 / 15.0).abs() < 1e-9, "{coef:?}");

    for (k, snap) in traj.iter().enumerate().skip(1) {
        let mut single = ground.clone();
        kick_operator(&basis, k as f64).unwrap().apply(&mut single);
        let diff = max_modulus_diff(&snap.state, &single);
        assert!(diff < 1e-10, "kick {k}: {diff:.2e}");
    }
}

fn max_modulus_diff(a: &WavePacket, b: &WavePacket) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes().iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn finite_vs_delta(j0: u32, m: i32, strength: f64, fwhm: f64) -> f64 {
    let parity = Parity::of(j0);
    let basis = RotorBasis::new(40, parity, m).unwrap();
    let start = WavePacket::basis_state(basis.clone(), j0).unwrap();
    let mut delta = start.clone();
    kick_operator(&basis, strength).unwrap().apply(&mut delta);
    let out = propagate_finite_pulse(&start, &PulseSpec::finite(0.0, strength, fwhm), fwhm / 20.0)
        .unwrap();
    max_modulus_diff(&out, &delta)
}

#[test]
fn finite_pulses_approach_the_impulsive_limit() {
    let errors: Vec<f64> = [1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&f| finite_vs_delta(3, 1, 3.8, f))
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn finite_width_correction_is_linear_in_fwhm() {
    // For a symmetric envelope the first surviving correction to the δ-kick
    // is the second-order Magnus term, proportional to the pulse width.
    let a = finite_vs_delta(1, 0, 3.8, 1e-4);
    let b = finite_vs_delta(1, 0, 3.8, 1e-5);
    assert!((a / b - 10.0).abs() < 0.05, "{a:.3e} / {b:.3e}");
}

#[test]
fn finite_pulse_matches_delta_kick_at_1e_5() {
    let err = finite_vs_delta(1, 0, 3.8, 1e-5);
    assert!(err < 1e-6, "max amplitude deviation {err:.3e}");
}

#[test]
fn basis_truncation_converges() {
    let train = TwoStageTrain {
        n_pre: 3,
        period_pre: 0.237,
        strength_pre: 3.8,
        delay: 0.243,
        n_loc: 12,
        period_loc: 0.267,
        strength_loc: 3.8,
    }
    .build()
    .unwrap();
    let energy = |j_max: u32| {
        let basis = RotorBasis::new(j_max, Parity::Odd, 0).unwrap();
        let start = WavePacket::basis_state(basis, 1).unwrap();
        let traj = propagate_delta_train(&start, &train, &PropagationOptions::default()).unwrap();
        traj.last().unwrap().state.energy()
    };
    let (a, b) = (energy(50), energy(60));
    assert!(((a - b) / b).abs() < 1e-8, "{a} vs {b}");
}

#[test]
fn oxygen_weights_match_golden_table() {
    let golden = include_str!("golden/o2_25k_weights.csv");
    let expected: Vec<(u32, f64)> = golden
        .lines()
        .skip(1)
        .map(|l| {
            let (j, w) = l.split_once(',').unwrap();
            (j.parse().unwrap(), w.parse().unwrap())
        })
        .collect();
    let ens = boltzmann_ensemble(&MoleculeSpec::oxygen(), 25.0, 1e-6).unwrap();
    let got = ens.level_weights();
    assert_eq!(got.len(), expected.len());
    for ((j, w), (je, we)) in got.iter().zip(&expected) {
        assert_eq!(j, je);
        assert!(((w - we) / we).abs() < 1e-12, "J={j}: {w} vs {we}");
    }
    assert_eq!(ens.most_populated_level(), 3);
}

#[test]
fn oxygen_ground_state_and_spin_statistics() {
    let cold = boltzmann_ensemble(&MoleculeSpec::oxygen(), 0.0, 1e-6).unwrap();
    assert_eq!(cold.len(), 3);
    for m in cold.members() {
        assert_eq!(m.j0, 1);
        assert!((m.weight - 1.0 / 3.0).abs() < 1e-15);
    }
    for t in [5.0, 25.0, 300.0] {
        let ens = boltzmann_ensemble(&MoleculeSpec::oxygen(), t, 1e-6).unwrap();
        assert!(ens.members().iter().all(|m| m.j0 % 2 == 1));
    }
}

#[test]
fn level_entropy_grows_with_temperature() {
    for mol in [MoleculeSpec::oxygen(), MoleculeSpec::nitrogen()] {
        let entropies: Vec<f64> = (0..=60)
            .map(|k| {
                boltzmann_ensemble(&mol, 5.0 * k as f64, 1e-6)
                    .unwrap()
                    .level_entropy()
            })
            .collect();
        for w in entropies.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} {:?}", mol.name, w);
        }
    }
}

#[test]
fn oxygen_pulse_gives_expected_kick_strength() {
    let o2 = MoleculeSpec::oxygen();
    let fluence = gaussian_field_squared_integral(1e13, 130e-15);
    let p = kick_strength_from_pulse(o2.polarizability_anisotropy.unwrap(), fluence).unwrap();
    assert!(p > 3.8 / 2.0 && p < 3.8 * 2.0, "P = {p}");
    // 130 fs in units of the O2 revival period.
    assert!((o2.to_revivals(130e-15) - 0.011207).abs() < 5e-6);
}
