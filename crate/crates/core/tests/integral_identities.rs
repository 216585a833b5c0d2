//! Quadrature verification of the closed-form integral identities of the
//! quantum dilogarithm at seeded pseudo-random in-domain points.  These
//! identities underpin the exact evaluations used by the state-integral
//! examples, so this battery is the oracle the rest of the suite leans on.

use tqft_core::integral_identities::{ramanujan_battery, saalschuetz_battery};
use tqft_core::qdl::ModularParameter;
use tqft_core::state_integral::EvalConfig;

const SEED: u64 = 2024;
const POINTS: usize = 5;
const TOL: f64 = 1e-6;

fn cfg() -> EvalConfig {
    EvalConfig { tol_abs: 1e-9, tol_rel: 1e-8, max_panels: 1500, radius: 3.0 }
}

fn assert_report_passes(rep: &tqft_core::integral_identities::IdentityReport) {
    for line in rep.failures() {
        eprintln!("FAIL {line}");
    }
    assert!(
        rep.pass,
        "suite '{}' failed: max rel err {:.3e} over {} checks",
        rep.suite,
        rep.max_rel_err,
        rep.checks.len()
    );
}

#[test]
fn ramanujan_fourier_identities_hold_at_seeded_points() {
    let mp = ModularParameter::new(0.8).unwrap();
    let rep = ramanujan_battery(&mp, SEED, POINTS, &cfg(), TOL).unwrap();
    assert!(rep.checks.len() >= 4 * POINTS);
    assert_report_passes(&rep);
}

#[test]
fn saalschuetz_euler_heine_identities_hold_at_seeded_points() {
    let mp = ModularParameter::new(0.8).unwrap();
    let rep = saalschuetz_battery(&mp, SEED, POINTS, &cfg(), TOL).unwrap();
    assert!(rep.checks.len() >= 3 * POINTS);
    assert_report_passes(&rep);
}

#[test]
fn identity_batteries_hold_at_a_second_modular_parameter() {
    let mp = ModularParameter::new(0.6).unwrap();
    let rep = ramanujan_battery(&mp, SEED + 1, 3, &cfg(), TOL).unwrap();
    assert_report_passes(&rep);
    let rep = saalschuetz_battery(&mp, SEED + 1, 3, &cfg(), TOL).unwrap();
    assert_report_passes(&rep);
}
