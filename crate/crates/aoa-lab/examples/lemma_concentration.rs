//! The averaging effects behind the deterministic limit: an oscillating
//! index sum that dies off for any nonzero frequency, and quadratic forms
//! in random vectors that concentrate around their means as the array grows.
//!
//! Run with: cargo run --example lemma_concentration

use aoa_lab::config::{Experiment, Params};
use aoa_lab::montecarlo::run_lemma_diagnostics;

fn main() {
    let mut params = Params::defaults_for(Experiment::LemmaDiagnostics);
    params.num_trials = 101; // lighter than the full run, still stable medians
    let table = run_lemma_diagnostics(&params).unwrap();

    // Rows are grouped per array size; collect the two headline quantities.
    println!(
        "{:>6} {:>14} {:>14} {:>14} {:>14}",
        "M", "cos gamma=0", "cos gamma=1", "quad_self", "hat_residual"
    );
    let mut v_gamma1 = Vec::new();
    let mut quad = Vec::new();
    for &m in &[64u64, 256, 1024, 4096] {
        let mut cos0 = f64::NAN;
        let mut cos1 = f64::NAN;
        let mut qs = f64::NAN;
        let mut hat = f64::NAN;
        for row in 0..table.rows.len() {
            if table.float(row, "m") as u64 != m {
                continue;
            }
            let quantity = table.cell(row, "quantity").to_string();
            let value = table.float(row, "value");
            match quantity.as_str() {
                "cosine_weight" => {
                    let gamma = table.float(row, "gamma");
                    if gamma == 0.0 {
                        cos0 = value;
                    } else if gamma == 1.0 {
                        cos1 = value;
                    }
                }
                "quad_self" => qs = value,
                "hat_residual" => hat = value,
                _ => {}
            }
        }
        println!("{m:>6} {cos0:>14.6} {cos1:>14.6e} {qs:>14.6e} {hat:>14.6e}");
        v_gamma1.push(cos1.abs());
        quad.push(qs);
    }

    // gamma = 0 keeps the full weight (about 1/3); gamma = 1 collapses.
    assert!(*v_gamma1.last().unwrap() < 1e-2);
    // The random quadratic form concentrates: the median residual shrinks.
    assert!(*quad.last().unwrap() < *quad.first().unwrap());
    println!("oscillation and concentration both decay with M");
}
