use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};

use ionghz_core::engines::{
    closed_form_rho_eq9, evolve_eigenbasis, evolve_ode, evolve_poisson, evolve_unitary, DensityMatrix, EngineControls,
};
use ionghz_core::experiments::{linear_grid, System};
use ionghz_core::linalg::{Mat4, C64};
use ionghz_core::observables::{closed_form_pghz, eigenbasis_coherences, ghz_state, p_ghz, populations, purity};
use ionghz_core::{GhzSign, ModeIndices};
use proptest::prelude::*;

fn system(alpha: f64) -> System {
    System::from_ratio(8.95e6, alpha, ModeIndices::GROUND, 0.05, 0.05).unwrap()
}

fn eigen(sys: &System, r: f64, t: f64) -> DensityMatrix {
    evolve_eigenbasis(&sys.spectrum, &sys.request(r, t, EngineControls::default())).unwrap()
}

#[test]
fn populations_and_purity_along_a_trajectory() {
    let sys = system(4.0);
    let mut last_purity = f64::INFINITY;
    let mut last_coh = [f64::INFINITY; 6];
    let initial_pops = eigenbasis_coherences(&DensityMatrix::lower_ground(ModeIndices::GROUND), &sys.spectrum).unwrap();
    assert!(initial_pops.iter().all(|x| *x > 0.0));
    for t in linear_grid(2.0 * PI, 200) {
        let rho = eigen(&sys, 0.01, t);
        let p = purity(&rho);
        assert!(p <= last_purity + 1e-12);
        assert!((0.25..=1.0 + 1e-12).contains(&p));
        last_purity = p;

        let coh = eigenbasis_coherences(&rho, &sys.spectrum).unwrap();
        for k in 0..6 {
            assert!(coh[k] <= last_coh[k] + 1e-14);
        }
        last_coh = coh;

        let pops: f64 = populations(&rho).iter().sum();
        assert!((pops - 1.0).abs() < 1e-12);
    }
}

#[test]
fn decoherence_free_state_is_ghz() {
    let sys = system(4.0);
    let rho = eigen(&sys, 0.0, FRAC_PI_4);
    let pops = populations(&rho);
    assert!((pops[1] - 0.5).abs() < 1e-9 && (pops[2] - 0.5).abs() < 1e-9);
    assert!((purity(&rho) - 1.0).abs() < 1e-12);
}

#[test]
fn closed_form_probability_matches_engine() {
    for alpha in [2.0, 4.0, 8.0] {
        let sys = system(alpha);
        for r in [0.0, 0.001, 0.01, 0.1] {
            for t in linear_grid(2.0 * PI, 64) {
                let rho = eigen(&sys, r, t);
                for sign in GhzSign::BOTH {
                    let engine = p_ghz(&rho, &ghz_state(sign, 0)).unwrap().raw;
                    assert!((closed_form_pghz(t, alpha, r, sign) - engine).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn ode_agrees_with_reference() {
    let sys = system(4.0);
    for &(r, t) in &[(0.0, FRAC_PI_4), (0.01, 1.7), (0.1, PI)] {
        let req = sys.request(r, t, EngineControls::default());
        let ode = evolve_ode(&sys.block, &req).unwrap();
        let d = ode.diagnostics().unwrap();
        assert!(d.within(1e-12, 1e-9, -1e-7), "{d:?}");
        assert!(ode.max_abs_diff(&eigen(&sys, r, t)) <= 1e-6);
    }
}

#[test]
fn poisson_holds_eigenbasis_populations() {
    let sys = system(4.0);
    let rho0 = DensityMatrix::lower_ground(ModeIndices::GROUND);
    let before = sys.spectrum.to_eigenbasis(&rho0.entries);
    for t in linear_grid(PI, 17) {
        let out = evolve_poisson(&sys.block, &sys.spectrum, &sys.request(0.1, t, EngineControls::default())).unwrap();
        let after = sys.spectrum.to_eigenbasis(&out.entries);
        for p in 0..4 {
            assert!((after[(p, p)] - before[(p, p)]).norm() <= 1e-10);
        }
    }
}

// The printed closed-form ρ(t) is compared with the reference engine. Under
// the model's sign convention (first significant eigenvector component
// nonnegative) it does not agree; negating Φ1 alone reconciles the two. Both
// observations are pinned here.
#[test]
fn printed_density_matrix_audit() {
    let sys = system(4.0);
    let mut reversed = sys.spectrum;
    let v0 = -reversed.vector(0);
    reversed.eigenvectors.set_column(0, &v0);

    let unitary =
        |t: f64| evolve_unitary(&sys.spectrum, &DensityMatrix::lower_ground(ModeIndices::GROUND), t / sys.a()).unwrap();
    let literal = |spec, r, t: f64| {
        let req = sys.request(r, t, EngineControls::default());
        closed_form_rho_eq9(&sys.couplings, spec, req.t, req.gamma)
    };

    for t in [FRAC_PI_8, FRAC_PI_4, FRAC_PI_2] {
        assert!(literal(&reversed, 0.0, t).max_abs_diff(&unitary(t)) <= 1e-9);
        assert!(literal(&sys.spectrum, 0.0, t).max_abs_diff(&unitary(t)) > 0.1);
    }
    let reference = eigen(&sys, 0.01, FRAC_PI_4);
    assert!(literal(&reversed, 0.01, FRAC_PI_4).max_abs_diff(&reference) <= 1e-9);
    let residual = literal(&sys.spectrum, 0.01, FRAC_PI_4).max_abs_diff(&reference);
    assert!((residual - 0.598296).abs() < 1e-5, "residual {residual}");

    // t = 0: trace is exactly (A+B)² + (A−B)² = 1 under either convention
    assert!((literal(&sys.spectrum, 0.01, 0.0).trace().re - 1.0).abs() < 1e-15);
}

fn random_state(re: &[f64; 16], im: &[f64; 16]) -> DensityMatrix {
    let m = Mat4::from_fn(|i, j| C64::new(re[4 * i + j], im[4 * i + j]));
    let rho = m * m.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(rho / tr, ionghz_core::BasisOrder::new(ModeIndices::GROUND))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engine_outputs_are_states(alpha in 1.5f64..9.0, r in 0.0f64..0.2, t in 0.0f64..6.3) {
        let sys = system(alpha);
        let req = sys.request(r, t, EngineControls::default());
        let outputs = [
            evolve_eigenbasis(&sys.spectrum, &req).unwrap(),
            evolve_poisson(&sys.block, &sys.spectrum, &req).unwrap(),
        ];
        for rho in outputs {
            let d = rho.diagnostics().unwrap();
            prop_assert!(d.within(1e-12, 1e-12, -1e-10), "{:?}", d);
        }
    }

    #[test]
    fn ghz_targets_share_at_most_unit_probability(re in proptest::array::uniform16(-1.0f64..1.0), im in proptest::array::uniform16(-1.0f64..1.0)) {
        let rho = random_state(&re, &im);
        let m = p_ghz(&rho, &ghz_state(GhzSign::Minus, 0)).unwrap().raw;
        let p = p_ghz(&rho, &ghz_state(GhzSign::Plus, 0)).unwrap().raw;
        prop_assert!(m + p <= 1.0 + 1e-10);
        prop_assert!(m >= -1e-10 && p >= -1e-10);
        let pur = purity(&rho);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&pur));
    }

    #[test]
    fn eigenbasis_populations_conserved(r in 0.0f64..0.2, t in 0.0f64..6.3, re in proptest::array::uniform16(-1.0f64..1.0), im in proptest::array::uniform16(-1.0f64..1.0)) {
        let sys = system(4.0);
        let rho0 = random_state(&re, &im);
        let mut req = sys.request(r, t, EngineControls::default());
        req.initial = rho0;
        let out = evolve_eigenbasis(&sys.spectrum, &req).unwrap();
        let before = sys.spectrum.to_eigenbasis(&rho0.entries);
        let after = sys.spectrum.to_eigenbasis(&out.entries);
        for p in 0..4 {
            prop_assert!((after[(p, p)] - before[(p, p)]).norm() <= 1e-10);
        }
    }
}
