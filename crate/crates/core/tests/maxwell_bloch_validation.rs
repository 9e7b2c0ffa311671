use num_complex::Complex64;
use tripod::model::{DetuningProfile, PulseSpec};
use tripod::pde::maxwell_bloch::{nominal_delay, polaritons, pulse_delay, MbValidation};
use tripod::pde::{project_to_polaritons, solve_maxwell_bloch, MbConfig};

fn small() -> MbValidation {
    MbValidation {
        optical_density: 100.0,
        k_p: 50.0,
        n_z: 60,
        reduced_n_tau: 2048,
        ..Default::default()
    }
}

#[test]
fn spin_polariton_is_decoupled_without_detuning() {
    let v = small();
    let m = v.medium();
    let tau_p = v.k_p / m.eit_window();
    let pulse = PulseSpec::gaussian_difference(1.0, tau_p, 3.0, false);
    let e_in = |t: f64| pulse.envelope(t);
    let cfg = MbConfig::matched(&m, v.n_z, pulse.support_end() + nominal_delay(&m));
    let run = solve_maxwell_bloch(&m, e_in, &DetuningProfile::Constant(0.0), cfg).unwrap();
    let (_, ups) = project_to_polaritons(&run.final_state, &m);
    let worst = ups.iter().map(|u| u.norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
    for p in &run.probe {
        assert!(polaritons(&m, p.e, p.f_1, p.f_2).1.norm() < 1e-12);
    }
}

#[test]
fn slow_light_regime_matches_reduced_model() {
    let r = small().run().unwrap();
    assert!(r.delay_rel_error < 0.05, "{r:?}");
    assert!(r.psi_max_deviation < 0.05, "{r:?}");
    assert!(r.window_ratio > 0.5 && r.window_ratio < 2.0, "{r:?}");
    assert!(r.balance_residual < 1e-4, "{r:?}");
    assert!(r.transmitted_fraction > 0.9, "{r:?}");
}

#[test]
fn delay_scales_with_optical_density() {
    let delays: Vec<f64> = [50.0, 100.0]
        .iter()
        .map(|&od| {
            let v = MbValidation {
                optical_density: od,
                ..small()
            };
            let m = v.medium();
            let tau_p = v.k_p / m.eit_window();
            let pulse = PulseSpec::gaussian_difference(1.0, tau_p, 3.0, false);
            let e_in = |t: f64| Complex64::from(pulse.envelope(t).re);
            let cfg = MbConfig::matched(&m, v.n_z, pulse.support_end() + 1.5 * nominal_delay(&m));
            let run = solve_maxwell_bloch(&m, e_in, &DetuningProfile::Constant(0.0), cfg).unwrap();
            pulse_delay(&run, e_in).unwrap() / nominal_delay(&m)
        })
        .collect();
    for d in &delays {
        assert!((d - 1.0).abs() < 0.05, "{delays:?}");
    }
}

#[test]
fn leaving_the_slow_light_regime_is_detected() {
    // a pulse much shorter than the inverse EIT window is distorted and absorbed
    let v = MbValidation {
        k_p: 2.0,
        ..small()
    };
    let r = v.run().unwrap();
    assert!(r.transmitted_fraction < 0.9 || r.psi_max_deviation > 0.05, "{r:?}");
}
