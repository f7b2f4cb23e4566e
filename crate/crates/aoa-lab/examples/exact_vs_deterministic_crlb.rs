//! Per-realization exact error bound against its deterministic large-array
//! limit. The Monte Carlo mean of the exact trace approaches the closed-form
//! value as the array grows.
//!
//! Run with: cargo run --example exact_vs_deterministic_crlb

use aoa_lab::array_model::{draw_channel, ChannelLaw, Scenario, UserTerminal};
use aoa_lab::fisher::{deterministic_crlb, exact_crlb, SubsetSpec};
use aoa_lab::montecarlo::equispaced_angles;
use aoa_lab::rng::stream_seed;
use num_complex::Complex64;

fn scenario(m: usize, k: usize) -> Scenario {
    let users = equispaced_angles(k, std::f64::consts::PI / 10.0)
        .into_iter()
        .map(|angle| UserTerminal {
            angle,
            pilot: Complex64::new(1e-19f64.sqrt(), 0.0),
            path_loss: 1.0,
            dominant_gain: Complex64::new(0.0, 0.0),
        })
        .collect();
    Scenario::new(
        aoa_lab::array_model::ArrayGeometry::new(m, 0.5).unwrap(),
        users,
        1e-20,
        0.5,
    )
    .unwrap()
}

fn main() {
    let k = 3;
    let trials = 200u64;
    println!("K = {k} users, {trials} channel draws per array size");
    println!("{:>6} {:>14} {:>14} {:>10}", "M", "mc mean", "limit", "rel gap");

    let mut gaps = Vec::new();
    for m in [16usize, 32, 64, 128, 256] {
        let sc = scenario(m, k);
        let spec = SubsetSpec::Full;
        let subset = spec.resolve(m).unwrap();
        let det = deterministic_crlb(&sc, &spec).unwrap();
        let mut acc = 0.0;
        for t in 0..trials {
            let seed = stream_seed(11, &format!("demo-crlb/m={m}"), t);
            let channel = draw_channel(&sc, ChannelLaw::ComplexGaussian, seed);
            acc += exact_crlb(&sc, &channel, &subset).unwrap().trace;
        }
        let mean = acc / trials as f64;
        let gap = (mean - det.trace).abs() / det.trace;
        gaps.push(gap);
        println!("{m:>6} {mean:>14.6e} {:>14.6e} {gap:>10.4}", det.trace);
    }
    assert!(
        *gaps.last().unwrap() < 0.1,
        "largest array should sit near the limit"
    );

    // Subset bounds in closed form: keeping the far block of F antennas
    // beats the near block by the ratio of their squared-index sums.
    let sc = scenario(16, 1);
    let far = deterministic_crlb(&sc, &SubsetSpec::Furthest(6)).unwrap();
    let near = deterministic_crlb(&sc, &SubsetSpec::First(6)).unwrap();
    println!(
        "M=16 F=6: furthest {:.6e}, first {:.6e}, ratio {:.4} (= 55/955)",
        far.trace,
        near.trace,
        far.trace / near.trace
    );
    assert!((far.trace / near.trace - 55.0 / 955.0).abs() < 1e-12);
}
