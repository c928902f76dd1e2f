//! Benchmark-level invariants on miniature cases.

use ismg_core::bench::{run_case, setup_jet, setup_shear_cavity, BenchmarkCase};
use ismg_core::coarsening::Scheme;
use ismg_core::field::MacVelocity;

fn final_velocity(case: &BenchmarkCase, scheme: Scheme, tile_or_depth: usize) -> MacVelocity<f64> {
    let out = run_case::<f64>(case, case.cycle_config(scheme, tile_or_depth, 1e-5), |_, _| {}).unwrap();
    assert_eq!(out.capped_steps, 0, "{scheme}");
    assert!(!out.aborted);
    out.state.vel
}

#[test]
fn schemes_agree_on_the_trajectory() {
    let mut case = setup_shear_cavity(32).unwrap();
    case.steps = 40;
    case.window = 0..40;
    let runs = [
        (Scheme::PlainGs, 8),
        (Scheme::Ismg, 4),
        (Scheme::Ismg, 8),
        (Scheme::Gmg, 8),
        (Scheme::Acm, 3),
        (Scheme::Acm, 4),
    ]
    .map(|(s, t)| (s, final_velocity(&case, s, t)));
    for (a, va) in &runs {
        for (b, vb) in &runs {
            let d = va.max_diff(vb);
            assert!(d < 100.0 * case.tol_fine, "{a} vs {b}: {d:e}");
        }
    }
}

#[test]
fn jet_energy_stays_finite() {
    let mut case = setup_jet(32, 64).unwrap();
    case.steps = 300;
    case.window = 0..300;
    let mut energies = Vec::new();
    let out = run_case::<f64>(&case, case.cycle_config(Scheme::Ismg, 8, 1e-5), |s, _| {
        energies.push(s.vel.kinetic_energy(&case.spec));
    })
    .unwrap();
    assert!(!out.aborted);
    assert!(energies.iter().all(|e| e.is_finite()));
    // the inflow keeps feeding energy, but boundedly
    let bound = 0.5 * case.v0 * case.v0 * (32 * 64) as f64 * 10.0;
    assert!(energies.iter().all(|&e| e < bound), "{:?}", energies.last());
    assert!(*energies.last().unwrap() > 0.0);
}

#[test]
fn quasi_steady_steps_skip_levels() {
    let case = setup_shear_cavity(64).unwrap();
    assert_eq!(case.steps, 1000);
    let out = run_case::<f64>(&case, case.cycle_config(Scheme::Ismg, 8, 1e-5), |_, _| {}).unwrap();
    let rows = out.metrics.rows();
    let skipped = rows.iter().filter(|r| r.i_c == 0 || r.i_f == 0).count();
    assert!(skipped > 0, "no step skipped a level in {} steps", rows.len());
}
