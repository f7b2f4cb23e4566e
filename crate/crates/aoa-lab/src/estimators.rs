//! Angle estimators: a subspace spectral scanner (noise-subspace projection
//! over a uniform angle grid) and an exhaustive grid-search least-squares
//! estimator with local parabolic refinement, plus the shared ingredients:
//! sample covariance, a complex Jacobi eigensolver, and the Monte Carlo MSE
//! aggregator.

use num_complex::Complex64;
use thiserror::Error;

use crate::array_model::{
    steering_vector, AntennaSubset, ChannelRealization, ModelError, Scenario,
};
use crate::linalg::CMatrix;

const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no snapshots provided")]
    NoSnapshots,
    #[error("snapshot {index} has {len} entries, expected {expected}")]
    RaggedSnapshots {
        index: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is not Hermitian (relative defect {0:.3e} exceeds 1e-10)")]
    NotHermitian(f64),
    #[error("eigendecomposition did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix must be square, got {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("no noise subspace: need more antennas than sources, got F = {f} for K = {k}")]
    NoNoiseSubspace { f: usize, k: usize },
    #[error("angle grid needs at least {min} points, got {got}")]
    GridTooSmall { min: usize, got: usize },
    #[error("grid exclusion must lie in [0, pi/2), got {0}")]
    BadExclusion(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no trials to aggregate")]
    NoTrials,
}

/// Sample covariance `(1/N) sum y y^H`, symmetrized as `(R + R^H) / 2` so the
/// result is Hermitian to the last bit.
pub fn sample_covariance(snapshots: &[Vec<Complex64>]) -> Result<CMatrix, EstimateError> {
    if snapshots.is_empty() {
        return Err(EstimateError::NoSnapshots);
    }
    let f = snapshots[0].len();
    if f == 0 {
        return Err(EstimateError::DimensionMismatch(
            "snapshots have zero length".into(),
        ));
    }
    for (index, y) in snapshots.iter().enumerate() {
        if y.len() != f {
            return Err(EstimateError::RaggedSnapshots {
                index,
                len: y.len(),
                expected: f,
            });
        }
    }
    let scale = 1.0 / snapshots.len() as f64;
    let mut r = CMatrix::zeros(f, f);
    for y in snapshots {
        for i in 0..f {
            for j in 0..f {
                let v = r.at(i, j) + y[i] * y[j].conj();
                r.set(i, j, v);
            }
        }
    }
    let mut out = CMatrix::zeros(f, f);
    for i in 0..f {
        for j in 0..f {
            let v = (r.at(i, j) + r.at(j, i).conj()) * 0.5 * scale;
            out.set(i, j, v);
        }
    }
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix: `eigenvalues` descending, column
/// `j` of `vectors` is the unit eigenvector of `eigenvalues[j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Evd {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

fn offdiag_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            acc += a.at(p, q).norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices. Each rotation
/// zeroes one off-diagonal pair with a unitary plane rotation
/// `[[c, s u], [-s conj(u), c]]` (`u` the phase of the pivot entry); sweeps
/// repeat until the off-diagonal Frobenius mass falls below `1e-12` of the
/// matrix norm. Inputs must be Hermitian within `1e-10` relative defect.
pub fn hermitian_evd(r: &CMatrix) -> Result<Evd, EstimateError> {
    let n = r.rows();
    if r.cols() != n {
        return Err(EstimateError::NotSquare {
            rows: r.rows(),
            cols: r.cols(),
        });
    }
    let defect = r.hermitian_defect();
    if defect > 1e-10 {
        return Err(EstimateError::NotHermitian(defect));
    }
    // Work on an exactly Hermitian copy.
    let mut a = CMatrix::zeros(n, n);
    for i in 0..n {
        a.set(i, i, Complex64::new(r.at(i, i).re, 0.0));
        for j in (i + 1)..n {
            let v = (r.at(i, j) + r.at(j, i).conj()) * 0.5;
            a.set(i, j, v);
            a.set(j, i, v.conj());
        }
    }
    let mut v = CMatrix::identity(n);
    let norm = a.frobenius();
    if norm == 0.0 || n == 1 {
        let eigenvalues = (0..n).map(|i| a.at(i, i).re).collect();
        return Ok(Evd {
            eigenvalues,
            vectors: v,
        });
    }
    let tol = 1e-12 * norm;
    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if offdiag_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a.at(p, q);
                let r_abs = apq.norm();
                if r_abs == 0.0 {
                    continue;
                }
                let u = apq / r_abs;
                let app = a.at(p, p).re;
                let aqq = a.at(q, q).re;
                let tau = (aqq - app) / (2.0 * r_abs);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a.at(i, p);
                    let aiq = a.at(i, q);
                    let new_ip = c * aip - s * u.conj() * aiq;
                    let new_iq = s * u * aip + c * aiq;
                    a.set(i, p, new_ip);
                    a.set(p, i, new_ip.conj());
                    a.set(i, q, new_iq);
                    a.set(q, i, new_iq.conj());
                }
                let new_pp = c * c * app - 2.0 * c * s * r_abs + s * s * aqq;
                let new_qq = s * s * app + 2.0 * c * s * r_abs + c * c * aqq;
                a.set(p, p, Complex64::new(new_pp, 0.0));
                a.set(q, q, Complex64::new(new_qq, 0.0));
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));

                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    v.set(i, p, c * vip - s * u.conj() * viq);
                    v.set(i, q, s * u * vip + c * viq);
                }
            }
        }
    }
    if !converged && offdiag_norm(&a) > tol {
        return Err(EstimateError::NoConvergence(MAX_JACOBI_SWEEPS));
    }
    // Sort descending; ties keep the lower original index first.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.at(j, j)
            .re
            .partial_cmp(&a.at(i, i).re)
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.at(i, i).re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, new_col, v.at(row, old_col));
        }
    }
    Ok(Evd {
        eigenvalues,
        vectors,
    })
}

/// Uniform scan grid on `(0, pi)` with a symmetric exclusion margin:
/// `q` points from `exclusion` to `pi - exclusion` inclusive.
pub fn angle_grid(exclusion: f64, q: usize) -> Result<Vec<f64>, EstimateError> {
    if !(exclusion.is_finite() && (0.0..std::f64::consts::FRAC_PI_2).contains(&exclusion)) {
        return Err(EstimateError::BadExclusion(exclusion));
    }
    if q < 2 {
        return Err(EstimateError::GridTooSmall { min: 2, got: q });
    }
    let step = (std::f64::consts::PI - 2.0 * exclusion) / (q as f64 - 1.0);
    Ok((0..q).map(|i| exclusion + step * i as f64).collect())
}

/// Subspace scan plan: which antennas, how many sources, and the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct MusicConfig {
    pub subset: AntennaSubset,
    pub num_sources: usize,
    pub grid_size: usize,
    pub exclusion: f64,
}

/// Output of one estimation run.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    /// Estimated angles, ascending.
    pub angles: Vec<f64>,
    /// Scan grid (empty for estimators that do not scan a fixed grid).
    pub grid: Vec<f64>,
    /// Spectrum value at each grid point.
    pub spectrum: Vec<f64>,
    /// Summed squared angle error of this run against the scenario's true
    /// angles (ascending pairing). Averaging this across trials gives the
    /// Monte Carlo mean squared error.
    pub mse: f64,
}

/// Summed squared error between two angle sets, paired by ascending sort.
pub fn paired_sse(truth: &[f64], estimates: &[f64]) -> f64 {
    let mut t = truth.to_vec();
    let mut e = estimates.to_vec();
    t.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    e.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    t.iter()
        .zip(e.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Scan the noise-subspace spectrum `1 / ||E_n^H g(theta)||^2` over the grid
/// and return the `K` strongest peaks as angle estimates.
///
/// Peak picking: a grid point is a peak when its spectrum value strictly
/// exceeds both neighbours (endpoints compare against their single
/// neighbour); the `K` highest peaks win, ties broken toward the smaller
/// angle; if fewer than `K` peaks exist, the `K` largest spectrum values are
/// taken instead. Estimates are not refined between grid points.
pub fn music_estimate(
    snapshots: &[Vec<Complex64>],
    config: &MusicConfig,
    scenario: &Scenario,
) -> Result<EstimateResult, EstimateError> {
    let f = config.subset.len();
    let k = config.num_sources;
    if f <= k {
        return Err(EstimateError::NoNoiseSubspace { f, k });
    }
    if k != scenario.num_users() {
        return Err(EstimateError::DimensionMismatch(format!(
            "config expects {k} sources but the scenario has {} users",
            scenario.num_users()
        )));
    }
    config.subset.validate_for(scenario.geometry.num_antennas)?;
    let r = sample_covariance(snapshots)?;
    if r.rows() != f {
        return Err(EstimateError::DimensionMismatch(format!(
            "snapshots have {} entries but the subset keeps {f} antennas",
            r.rows()
        )));
    }
    let evd = hermitian_evd(&r)?;
    let grid = angle_grid(config.exclusion, config.grid_size)?;

    let mut spectrum = Vec::with_capacity(grid.len());
    for &theta in &grid {
        let g = steering_vector(&scenario.geometry, theta, &config.subset)?;
        let mut denom = 0.0;
        for col in k..f {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, gi) in g.iter().enumerate() {
                acc += evd.vectors.at(i, col).conj() * gi;
            }
            denom += acc.norm_sqr();
        }
        spectrum.push(1.0 / denom.max(f64::MIN_POSITIVE));
    }

    let q = grid.len();
    let mut peaks: Vec<usize> = Vec::new();
    for i in 0..q {
        let left_ok = i == 0 || spectrum[i] > spectrum[i - 1];
        let right_ok = i == q - 1 || spectrum[i] > spectrum[i + 1];
        if left_ok && right_ok {
            peaks.push(i);
        }
    }
    let by_height = |a: &usize, b: &usize| {
        spectrum[*b]
            .partial_cmp(&spectrum[*a])
            .expect("finite spectrum")
            .then(a.cmp(b))
    };
    let selected: Vec<usize> = if peaks.len() >= k {
        let mut p = peaks;
        p.sort_by(by_height);
        p.truncate(k);
        p
    } else {
        let mut all: Vec<usize> = (0..q).collect();
        all.sort_by(by_height);
        all.truncate(k);
        all
    };
    let mut angles: Vec<f64> = selected.iter().map(|&i| grid[i]).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));

    let truth: Vec<f64> = scenario.users.iter().map(|u| u.angle).collect();
    let mse = paired_sse(&truth, &angles);
    Ok(EstimateResult {
        angles,
        grid,
        spectrum,
        mse,
    })
}

/// Noiseless snapshot contribution of user `k` at angle `theta`, over the
/// subset: `sqrt(l_k) H[x_i][k] exp(-j x_i beta cos theta) s_k / sqrt(F)`.
fn user_component(
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
    user: usize,
    theta: f64,
) -> Vec<Complex64> {
    let beta = scenario.geometry.beta();
    let scale = 1.0 / (subset.len() as f64).sqrt();
    let amp = scenario.users[user].path_loss.sqrt();
    let pilot = scenario.users[user].pilot;
    let cos_t = theta.cos();
    subset
        .indices()
        .iter()
        .map(|&x| {
            let steer = Complex64::from_polar(scale, -(x as f64) * beta * cos_t);
            amp * channel.entries.at(x, user) * steer * pilot
        })
        .collect()
}

fn residual_norm_sqr(residual: &[Complex64], component: &[Complex64]) -> f64 {
    residual
        .iter()
        .zip(component.iter())
        .map(|(r, c)| (r - c).norm_sqr())
        .sum()
}

/// Least-squares grid search for the arrival angles given a known channel
/// draw: minimizes `||y - sum_k w_k(theta_k)||^2`. One user is scanned
/// directly; several users are fit by greedy initialization followed by
/// cyclic coordinate descent until no coordinate moves. The winning grid
/// point of each user is refined by fitting a parabola through the objective
/// at the point and its two neighbours (skipped at grid edges, for
/// non-convex triples, or when the vertex leaves the step interval).
/// Estimates are returned in user order.
pub fn ml_estimate(
    y: &[Complex64],
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
    grid: &[f64],
) -> Result<Vec<f64>, EstimateError> {
    subset.validate_for(scenario.geometry.num_antennas)?;
    let f = subset.len();
    if y.len() != f {
        return Err(EstimateError::DimensionMismatch(format!(
            "snapshot has {} entries but the subset keeps {f} antennas",
            y.len()
        )));
    }
    if grid.is_empty() {
        return Err(EstimateError::GridTooSmall { min: 1, got: 0 });
    }
    let k = scenario.num_users();
    let q = grid.len();

    // Precompute every user's component at every grid point.
    let table: Vec<Vec<Vec<Complex64>>> = (0..k)
        .map(|user| {
            grid.iter()
                .map(|&theta| user_component(scenario, channel, subset, user, theta))
                .collect()
        })
        .collect();

    let best_index = |target: &[Complex64], user: usize| -> usize {
        let mut best = 0usize;
        let mut best_val = f64::INFINITY;
        for (i, comp) in table[user].iter().enumerate() {
            let val = residual_norm_sqr(target, comp);
            if val < best_val {
                best_val = val;
                best = i;
            }
        }
        best
    };

    // Greedy initialization on successive residuals.
    let mut chosen = vec![0usize; k];
    let mut residual: Vec<Complex64> = y.to_vec();
    for user in 0..k {
        let idx = best_index(&residual, user);
        chosen[user] = idx;
        for (r, c) in residual.iter_mut().zip(table[user][idx].iter()) {
            *r -= c;
        }
    }

    // Cyclic coordinate descent on the joint objective.
    if k > 1 {
        for _round in 0..50 {
            let mut moved = false;
            for user in 0..k {
                // Target for this user: y minus everyone else's component.
                let mut target = residual.clone();
                for (t, c) in target.iter_mut().zip(table[user][chosen[user]].iter()) {
                    *t += c;
                }
                let idx = best_index(&target, user);
                if idx != chosen[user] {
                    moved = true;
                    for (r, (old, new)) in residual
                        .iter_mut()
                        .zip(table[user][chosen[user]].iter().zip(table[user][idx].iter()))
                    {
                        *r = *r + old - new;
                    }
                    chosen[user] = idx;
                }
            }
            if !moved {
                break;
            }
        }
    }

    // Parabolic refinement per user on the final objective slice.
    let mut angles = Vec::with_capacity(k);
    for user in 0..k {
        let idx = chosen[user];
        let mut target = residual.clone();
        for (t, c) in target.iter_mut().zip(table[user][idx].iter()) {
            *t += c;
        }
        let mut theta = grid[idx];
        if idx > 0 && idx + 1 < q {
            let fm = residual_norm_sqr(&target, &table[user][idx - 1]);
            let f0 = residual_norm_sqr(&target, &table[user][idx]);
            let fp = residual_norm_sqr(&target, &table[user][idx + 1]);
            let den = fm - 2.0 * f0 + fp;
            if den > 0.0 {
                let dx = 0.5 * (fm - fp) / den;
                if dx.abs() <= 1.0 {
                    let step = (grid[idx + 1] - grid[idx - 1]) / 2.0;
                    theta += dx * step;
                }
            }
        }
        angles.push(theta);
    }
    Ok(angles)
}

/// Monte Carlo mean squared error: the average over trials of the summed
/// squared angle error, with truth and estimates paired by ascending sort
/// within each trial.
pub fn mse(true_angles: &[f64], trials: &[Vec<f64>]) -> Result<f64, EstimateError> {
    if trials.is_empty() {
        return Err(EstimateError::NoTrials);
    }
    for (i, t) in trials.iter().enumerate() {
        if t.len() != true_angles.len() {
            return Err(EstimateError::DimensionMismatch(format!(
                "trial {i} has {} estimates for {} users",
                t.len(),
                true_angles.len()
            )));
        }
    }
    let total: f64 = trials.iter().map(|t| paired_sse(true_angles, t)).sum();
    Ok(total / trials.len() as f64)
}
