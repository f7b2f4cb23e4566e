//! Grid-search least-squares angle estimation against the deterministic
//! bound. A small Monte Carlo run compares the estimator variance on the
//! far-block subset with the closed-form prediction, and shows the far
//! block beating the near block.
//!
//! Run with: cargo run --example ml_estimation

use aoa_lab::array_model::{
    compose_g, draw_channel, AntennaSubset, ArrayGeometry, ChannelLaw, Scenario, UserTerminal,
};
use aoa_lab::estimators::ml_estimate;
use aoa_lab::fisher::{deterministic_crlb, SubsetSpec};
use aoa_lab::rng;
use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

fn main() {
    let m = 16;
    let f = 6;
    let theta = std::f64::consts::FRAC_PI_6;
    let sc = Scenario::new(
        ArrayGeometry::new(m, 0.5).unwrap(),
        vec![UserTerminal {
            angle: theta,
            pilot: Complex64::new(1e-19f64.sqrt(), 0.0),
            path_loss: 1.0,
            dominant_gain: Complex64::new(0.0, 0.0),
        }],
        1e-20,
        0.5,
    )
    .unwrap();

    let far = AntennaSubset::furthest(m, f).unwrap();
    let near = AntennaSubset::first(f).unwrap();
    let det_far = deterministic_crlb(&sc, &SubsetSpec::Furthest(f)).unwrap().trace;
    let det_near = deterministic_crlb(&sc, &SubsetSpec::First(f)).unwrap().trace;
    println!("predicted variance: far {det_far:.4e}, near {det_near:.4e}");
    println!("predicted ratio far/near = {:.4}", det_far / det_near);

    // Local search window of +-5 predicted standard deviations per subset.
    let window = |trace: f64| {
        let s = trace.sqrt();
        let q = 400;
        (0..q)
            .map(|i| theta - 5.0 * s + 10.0 * s * i as f64 / (q - 1) as f64)
            .collect::<Vec<f64>>()
    };
    let grid_far = window(det_far);
    let grid_near = window(det_near);

    let trials = 2000u64;
    let noise = Normal::new(0.0, (sc.noise_psd / 2.0).sqrt()).unwrap();
    let mut est_far = Vec::new();
    let mut est_near = Vec::new();
    for t in 0..trials {
        let channel = draw_channel(&sc, ChannelLaw::ComplexGaussian, rng::stream_seed(5, "demo-ml/h", t));
        let mut stream = rng::stream(5, "demo-ml/noise", t);
        let n: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(noise.sample(&mut stream), noise.sample(&mut stream)))
            .collect();
        for (subset, grid, out) in [
            (&far, &grid_far, &mut est_far),
            (&near, &grid_near, &mut est_near),
        ] {
            let g = compose_g(&sc, &channel, subset).unwrap();
            let y: Vec<Complex64> = subset
                .indices()
                .iter()
                .enumerate()
                .map(|(i, &x)| g.at(i, 0) * sc.users[0].pilot + n[x])
                .collect();
            out.push(ml_estimate(&y, &sc, &channel, subset, grid).unwrap()[0]);
        }
    }

    let var = |xs: &[f64]| {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64
    };
    let v_far = var(&est_far);
    let v_near = var(&est_near);
    println!("measured variance over {trials} trials: far {v_far:.4e}, near {v_near:.4e}");
    println!(
        "efficiency vs bound: far {:.3}, near {:.3}",
        v_far / det_far,
        v_near / det_near
    );
    assert!(v_far < v_near, "the far block must estimate more accurately");
    assert!(v_far / det_far > 0.8 && v_far / det_far < 2.0);
}
