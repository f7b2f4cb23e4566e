//! Localization efficiency: users located per unit energy per unit error.
//! Using every antenna wastes energy; the optimizer finds the subset size
//! that balances accuracy against the energy bill. For the far-block rule
//! under the exhaustive-search estimator the optimum is F = K + 1.
//!
//! Run with: cargo run --example efficiency_sweep

use aoa_lab::config::{Experiment, Params};
use aoa_lab::energy::{energy_ml, le_ml, optimize_num_antennas};
use aoa_lab::montecarlo::run_le_sweep;
use aoa_lab::selection::SelectionRule;

fn main() {
    let params = Params::defaults_for(Experiment::LeSweep);

    // Energy split for one configuration: transmit, processing, hardware.
    let breakdown = energy_ml(3, 10, &params.energy).unwrap();
    let (tr, pr, hw) = (
        breakdown.log_transmit.exp(),
        breakdown.log_processing.exp(),
        breakdown.log_hardware.exp(),
    );
    println!("K=3 F=10 energy: transmit {tr:.3e} J, processing {pr:.3e} J, hardware {hw:.3e} J");
    assert!(hw > tr, "chain power dominates pilot power here");

    // The full sweep, three selection rules, K = 2..10 on an 80-antenna array.
    let mut p = params.clone();
    p.k_min = 2;
    p.k_max = 10;
    let table = run_le_sweep(&p).unwrap();
    println!("{:>4} {:>10} {:>6} {:>14}", "K", "rule", "F*", "ln LE");
    for row in 0..table.rows.len() {
        let k = table.float(row, "k") as usize;
        let rule = table.cell(row, "selection").to_string();
        let f_star = table.float(row, "f_star") as usize;
        let log_le = table.float(row, "log_le");
        println!("{k:>4} {rule:>10} {f_star:>6} {log_le:>14.4}");
        if rule == "furthest" {
            assert_eq!(f_star, k + 1, "far-block optimum sits just above K");
        }
    }

    // The optimizer agrees with a manual scan at one point.
    let scenario = {
        use aoa_lab::array_model::{ArrayGeometry, Scenario, UserTerminal};
        use num_complex::Complex64;
        let users = aoa_lab::montecarlo::equispaced_angles(4, p.exclusion)
            .into_iter()
            .map(|angle| UserTerminal {
                angle,
                pilot: Complex64::new(p.energy.pilot_psd.sqrt(), 0.0),
                path_loss: 1.0,
                dominant_gain: Complex64::new(0.0, 0.0),
            })
            .collect();
        Scenario::new(ArrayGeometry::new(80, 0.5).unwrap(), users, p.noise_psd, 0.5).unwrap()
    };
    let (f_star, best) = optimize_num_antennas(
        |f| le_ml(&scenario, f, SelectionRule::Furthest, &p.energy).map(|r| r.log_le),
        4,
        80,
    )
    .unwrap();
    let mut manual_best = f64::NEG_INFINITY;
    let mut manual_f = 0;
    for f in 5..=80 {
        let v = le_ml(&scenario, f, SelectionRule::Furthest, &p.energy)
            .unwrap()
            .log_le;
        if v > manual_best {
            manual_best = v;
            manual_f = f;
        }
    }
    println!("optimizer: F* = {f_star} (ln LE {best:.4}); manual scan agrees: {manual_f}");
    assert_eq!(f_star, manual_f);
}
