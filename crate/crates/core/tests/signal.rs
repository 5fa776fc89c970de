use gdopsel::measurement::tdoa_from_toa;
use gdopsel::prs::{simulate_toa_signal, SignalConfig};
use gdopsel::scenario::{centroid, distance, gen_ioo, IooParams};
use gdopsel::selection::{quarter_bounds_offsets, select_gdop};
use gdopsel::solver::{solve_with_restarts, SolverConfig};

#[test]
fn noiseless_all_los_signal_fix_in_ioo() {
    let solver = SolverConfig::default();
    for seed in 0..4 {
        let scenario = gen_ioo(seed, &IooParams { n_scatterers: 0, n_los: 12 }).unwrap();
        let toas = simulate_toa_signal(&scenario, &SignalConfig::default(), seed).unwrap();
        assert_eq!(toas.len(), 12);
        let sel = select_gdop(&scenario, &toas, 4, &solver).unwrap();
        let system = tdoa_from_toa(&toas, sel.reference_id, &sel.ordered_ids).unwrap().system(&scenario).unwrap();
        let start = centroid(&system.positions()).unwrap();
        let fix = solve_with_restarts(&system, start, &quarter_bounds_offsets(&scenario.bounds), &solver).unwrap();
        let err = distance(fix.estimate.x_hat, scenario.ue);
        assert!(err < 0.5, "seed {seed}: {err} m");
    }
}
