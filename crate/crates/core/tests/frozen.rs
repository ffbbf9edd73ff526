//! Frozen reference values across modules.

use phasequant_core::cornell::{cornell_quantize_numeric, cornell_spectrum_closed_form, CornellParams};
use phasequant_core::oracle::{schrodinger_levels, DEFAULT_STEP};
use phasequant_core::wavefunction::build_classical_wf;
use phasequant_core::{action, parse, quantize_2tp, Potential, QuantProblem};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn funnel_closed_form_values() {
    let p = CornellParams::new(0.0, 0.5, 0.2, 0).unwrap();
    // 8 * 0.2 * (1 + sqrt(0.5) - 0.5)
    let e0 = cornell_spectrum_closed_form(&p, 0).unwrap();
    assert!(close(e0.e_squared, 1.931_370_849_898_476_2, 1e-15), "{}", e0.e_squared);
    let e3 = cornell_spectrum_closed_form(&p.with_l(2), 3).unwrap();
    // 1.6 * (7 + sqrt(6.5) - 0.5)
    assert!(close(e3.e_squared, 14.479_215_610_874_23, 1e-14), "{}", e3.e_squared);
    let num = cornell_quantize_numeric(&p.with_l(2), 3).unwrap();
    assert!(close(num.e_squared, e3.e_squared, 1e-9));
}

#[test]
fn harmonic_action_is_pi_e_over_omega() {
    let p = QuantProblem::new(Potential::harmonic(1.0, 2.0).unwrap(), 1.0, 1.0).unwrap();
    let a = action(&p, 3.0).unwrap();
    assert!(close(a.value, std::f64::consts::PI * 3.0 / 2.0, 1e-10), "{}", a.value);
}

#[test]
fn custom_quartic_levels() {
    let p = QuantProblem::new(Potential::custom(parse("x^4").unwrap()), 1.0, 1.0)
        .unwrap()
        .with_window(-8.0, 8.0)
        .unwrap();
    // Semiclassical x^4 levels with m = hbar = 1 (V = x^4, so 2mV = 2x^4).
    let e0 = quantize_2tp(&p, 0).unwrap().energy;
    let e5 = quantize_2tp(&p, 5).unwrap().energy;
    let oracle = schrodinger_levels(&p, 5, DEFAULT_STEP).unwrap();
    assert!(close(e0, 0.546_267_6, 1e-6), "{e0}");
    assert!(close(oracle[0].energy, 0.667_986_3, 1e-6), "{}", oracle[0].energy);
    // The semiclassical error shrinks with n.
    let gap = |e: f64, o: f64| (e - o).abs() / o;
    assert!(gap(e5, oracle[5].energy) < 2e-3, "{e5} vs {}", oracle[5].energy);
    assert!(gap(e5, oracle[5].energy) < gap(e0, oracle[0].energy));
}

#[test]
fn coulomb_wavefunction_nodes() {
    let p = QuantProblem::new(Potential::coulomb(1.0).unwrap(), 1.0, 1.0)
        .unwrap()
        .with_angular(1);
    let entry = quantize_2tp(&p, 2).unwrap();
    assert!(close(entry.energy, -1.0 / 32.0, 1e-9));
    let wf = build_classical_wf(&p, &entry).unwrap();
    assert_eq!(wf.node_count(), 2);
}
