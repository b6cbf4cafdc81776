//! Ignored probe: normalized-L medians for the rotated cube across N.

use conelab::experiment::{run_general_experiment, BodyFamily, ExperimentConfig, ScheduleEntry};

#[test]
#[ignore]
fn probe_rotated_cube_stability() {
    let config = ExperimentConfig {
        family: BodyFamily::RotatedCube { rotation_seed: 2024 },
        dims: vec![4],
        n_schedule: vec![
            ScheduleEntry::Fixed(8),
            ScheduleEntry::Fixed(16),
            ScheduleEntry::Fixed(64),
        ],
        trials: 100,
        master_seed: 31,
        exact: true,
        mc_samples: 2048,
        subset_budget: 500,
        threads: 0,
    };
    let report = run_general_experiment(&config).unwrap();
    for c in &report.cells {
        println!(
            "N={}: median L = {:.4}, median L_norm = {:.4}, p99 L_norm = {:.4}",
            c.big_n, c.median_l, c.median_l_normalized, c.p99_l_normalized
        );
    }
}
