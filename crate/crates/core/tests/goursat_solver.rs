use std::f64::consts::PI;

use tripod::analysis::{conservation_residual, goursat_convergence, upsilon_norm};
use tripod::analytic::{ClosedForm, ConvolutionQuadrature};
use tripod::model::{DetuningProfile, Grid, PulseSpec};
use tripod::pde::{solve_goursat, GoursatScheme, SchemeOrder};
use tripod::protocol::switch_line_analytic;

const BETA: f64 = PI / 4.0;

#[test]
fn ladder_is_second_order_for_detuned_pulse() {
    let p = PulseSpec::default().with_detuned_carrier(true);
    let base = Grid::new(0.5, 8.0, 16, 64).unwrap();
    let ladder = goursat_convergence(&p, 3.0, BETA, base, 4, ConvolutionQuadrature::default()).unwrap();
    for r in &ladder.rungs[1..] {
        let o = r.order.unwrap();
        assert!((o - 2.0).abs() < 0.1, "{ladder:?}");
    }
}

#[test]
fn trapezoid_box_is_also_second_order() {
    let p = PulseSpec::default();
    let cf = ClosedForm::new(&p, 2.0, BETA, ConvolutionQuadrature::default()).unwrap();
    let scheme = GoursatScheme {
        order: SchemeOrder::BoxTrapezoid2,
        richardson: false,
    };
    let mut errs = Vec::new();
    for f in [1usize, 2, 4] {
        let g = Grid::new(1.0, 6.0, 16 * f, 48 * f).unwrap();
        let s = solve_goursat(&p, &DetuningProfile::Constant(2.0), BETA, g, scheme).unwrap();
        let mut e: f64 = 0.0;
        for i in 0..=16 {
            for j in (0..=48).step_by(4) {
                e = e.max((s.upsilon[[i * f, j * f]] - cf.upsilon(g.zeta(i * f), g.tau(j * f)).unwrap()).norm());
            }
        }
        errs.push(e);
    }
    for w in errs.windows(2) {
        assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.15, "{errs:?}");
    }
}

#[test]
fn richardson_beats_plain_scheme() {
    let p = PulseSpec::default();
    let cf = ClosedForm::new(&p, 5.0, BETA, ConvolutionQuadrature::default()).unwrap();
    let g = Grid::new(1.0, 6.0, 32, 96).unwrap();
    let nu = DetuningProfile::Constant(5.0);
    let err = |scheme| {
        let s = solve_goursat(&p, &nu, BETA, g, scheme).unwrap();
        (0..=32)
            .step_by(4)
            .flat_map(|i| (0..=96).step_by(8).map(move |j| (i, j)))
            .map(|(i, j)| (s.psi[[i, j]] - cf.psi(g.zeta(i), g.tau(j)).unwrap()).norm())
            .fold(0.0, f64::max)
    };
    let plain = err(GoursatScheme::default());
    let rich = err(GoursatScheme {
        richardson: true,
        ..Default::default()
    });
    assert!(rich < 0.1 * plain, "{rich} vs {plain}");
}

#[test]
fn grid_conservation_for_each_length() {
    let p = PulseSpec::default();
    for zl in [1.0, 0.5, 0.25, 0.1] {
        let g = Grid::new(zl, 10.0, 256, 1024).unwrap();
        let s = solve_goursat(&p, &DetuningProfile::Constant(5.0), BETA, g, GoursatScheme::default()).unwrap();
        for j in [256, 512, 1024] {
            let r = conservation_residual(&s, &p, g.tau(j)).unwrap();
            assert!(r < 1e-3, "zl={zl} j={j}: {r}");
        }
    }
}

#[test]
fn detuning_switch_freezes_spin_on_the_lab_time_line() {
    let p = PulseSpec::default().with_detuned_carrier(true);
    let (nu0, zl, t_s) = (5.0, 1.0, 4.0);
    let g = Grid::new(zl, 10.0, 256, 2560).unwrap();
    let nu = DetuningProfile::switched_off_at(nu0, t_s).unwrap();
    let s = solve_goursat(&p, &nu, BETA, g, GoursatScheme::default()).unwrap();

    let cf = ClosedForm::new(&p, nu0, BETA, ConvolutionQuadrature::default()).unwrap();
    let (zeta, _, ups) = switch_line_analytic(&cf, zl, t_s, 257).unwrap();
    for (k, (&z, u)) in zeta.iter().zip(&ups).enumerate() {
        assert!((z - g.zeta(k)).abs() < 1e-12);
        let frozen = s.upsilon[[k, 2560]];
        assert!((frozen - u).norm() < 2e-3, "zeta={z}: {frozen} vs {u}");
    }
    // after the switch the stored norm no longer changes
    let a = upsilon_norm(&s, 7.0).unwrap();
    let b = upsilon_norm(&s, 10.0).unwrap();
    assert!((a - b).abs() < 1e-12 * a);
}
