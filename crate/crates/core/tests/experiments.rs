use ionghz_core::experiments::{
    audit, degree_grid, find_peaks, physical_units, sweep, table1, Engine, SweepSpec, OMEGA_EXPERIMENT,
};
use ionghz_core::GhzSign;

fn spec(r_values: Vec<f64>, engine: Engine, max_deg: f64, step: f64) -> SweepSpec {
    SweepSpec { r_values, t_grid: degree_grid(0.0, max_deg, step), engine, ..Default::default() }
}

#[test]
fn decoherence_free_peaks() {
    let series = sweep(&spec(vec![0.0], Engine::Eigenbasis, 360.0, 0.25)).unwrap();
    let peaks = find_peaks(&series);
    let full = |sign| -> Vec<f64> {
        peaks.iter().filter(|p| p.target == sign && p.value > 1.0 - 1e-6).map(|p| p.t_peak.to_degrees()).collect()
    };
    for (sign, want) in [(GhzSign::Minus, [45.0, 225.0]), (GhzSign::Plus, [135.0, 315.0])] {
        let got = full(sign);
        assert_eq!(got.len(), 2, "{sign}: {got:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 0.05);
        }
    }
    assert!(peaks.iter().all(|p| p.value <= 1.0 + 1e-9));
}

#[test]
fn ode_sweep_agrees_with_reference() {
    let a = sweep(&spec(vec![0.0, 0.01], Engine::Eigenbasis, 90.0, 5.0)).unwrap();
    let b = sweep(&spec(vec![0.0, 0.01], Engine::Ode, 90.0, 5.0)).unwrap();
    for (ca, cb) in a.columns.iter().zip(&b.columns) {
        for (x, y) in ca.values.iter().zip(&cb.values) {
            assert!((x - y).abs() <= 1e-6);
        }
    }
}

#[test]
fn sweep_is_order_independent() {
    let s = spec(vec![0.1, 0.001], Engine::Eigenbasis, 180.0, 2.0);
    let mut rev = s.clone();
    rev.r_values.reverse();
    let a = sweep(&s).unwrap();
    let b = sweep(&rev).unwrap();
    for (ka, kb) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
        assert_eq!(a.columns[ka], b.columns[kb]);
    }
}

#[test]
fn monte_carlo_sweep_requires_finite_gamma() {
    let mut s = spec(vec![0.0], Engine::MonteCarlo, 10.0, 5.0);
    s.controls.n_traj = 10;
    assert!(sweep(&s).is_err());
}

#[test]
fn table_rows() {
    let rows = table1(OMEGA_EXPERIMENT, 4.0).unwrap();
    assert_eq!(rows.len(), 5);
    assert!((rows[0].p_minus_quarter - 1.0).abs() < 1e-9);
    assert!((rows[0].p_plus_three_quarter - 1.0).abs() < 1e-9);
    for row in &rows[1..] {
        assert!(row.dev_quarter().abs() <= 0.01, "{row:?}");
        assert!((row.inv_gamma_ns - row.published_inv_gamma_ns.unwrap()).abs() <= 0.2);
    }
    assert!((rows[1].inv_gamma_ns - 0.43).abs() <= 0.01);
    assert!((rows[4].inv_gamma_ns - 43.2).abs() <= 0.1);
    assert!((rows[1].p_minus_quarter - 0.988).abs() <= 1e-3);
    assert!((rows[3].p_minus_quarter - 0.896).abs() <= 1e-3);
    assert!((rows[4].p_minus_quarter - 0.534).abs() <= 1e-3);
}

#[test]
fn units_example() {
    let u = physical_units(OMEGA_EXPERIMENT, 4.0, &[0.001, 0.1]).unwrap();
    assert!((u.inv_gamma_ns[0] - 0.433).abs() < 1e-3);
    assert!((u.inv_gamma_ns[1] - 43.3).abs() < 0.2);
    assert!((u.t_quarter_us - 0.340).abs() < 1e-3);
}

#[test]
fn audit_report() {
    let report = audit().unwrap();
    assert!((report.printed[0].value - 1.234375).abs() < 1e-9);
    assert!((report.printed[1].value + 0.234375).abs() < 1e-9);
    assert!(report.printed.iter().all(|p| p.out_of_bounds && p.contradicts_table));

    assert!(report.rho_closed_form.max_residual > 0.1);
    assert!(report.rho_closed_form_phi1_reversed.max_residual <= 1e-9);

    // computed plus-target values at T = 3π/4 (eigenbasis engine; independently
    // reproduced with a dense numpy propagation)
    let computed = [0.965952, 0.852310, 0.748932, 0.414864];
    for (row, want) in report.three_quarter.iter().zip(computed) {
        assert!((row.computed_plus - want).abs() < 1e-6, "{row:?}");
        assert!((0.02..=0.11).contains(&row.deviation().abs()));
    }
}
