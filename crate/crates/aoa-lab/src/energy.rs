//! Energy accounting and localization efficiency.
//!
//! A positioning round spends energy three ways: pilot transmission by the
//! user terminals, baseband processing at the base station, and powered-on RF
//! chains. Efficiency is the number of located users per joule, per radian of
//! root-mean-square angle error. Totals span hundreds of orders of magnitude
//! once the grid-search estimator's `K^F` hypothesis count enters, so all
//! bookkeeping is carried in natural logarithms and exponentiated only on
//! demand.

use thiserror::Error;

use crate::array_model::Scenario;
use crate::fisher::{deterministic_crlb, FisherError};
use crate::selection::SelectionRule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("invalid energy parameter: {0}")]
    InvalidParams(String),
    #[error("need more antennas than users, got F = {f} for K = {k}")]
    TooFewAntennas { f: usize, k: usize },
    #[error("mean squared error must be nonnegative and finite, got {0}")]
    InvalidMse(f64),
    #[error("no antenna count to optimize over: K + 1 = {lower} exceeds M = {upper}")]
    EmptyDomain { lower: usize, upper: usize },
    #[error(transparent)]
    Fisher(#[from] FisherError),
    #[error("internal accounting inconsistency: {0}")]
    Internal(String),
}

/// System-level energy parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    /// Pilot bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Pilot duration in seconds.
    pub pilot_duration_s: f64,
    /// Pilot power spectral density of each user, W/Hz.
    pub pilot_psd: f64,
    /// Baseband compute efficiency, floating-point operations per joule.
    pub compute_efficiency: f64,
    /// Power of one base-station RF chain, W.
    pub bs_chain_power: f64,
    /// Power of one user-terminal RF chain, W.
    pub ut_chain_power: f64,
    /// Fixed overhead power, W.
    pub fixed_power: f64,
    /// Power-amplifier efficiency in (0, 1].
    pub amp_efficiency: f64,
}

impl Default for EnergyParams {
    /// Reference operating point: 50 kHz pilots of 0.5 ms, pilot density
    /// 1e-19 W/Hz, 30 GFLOP/J compute, 1 W / 0.3 W / 0.5 W chain and overhead
    /// powers, ideal amplifier.
    fn default() -> Self {
        EnergyParams {
            bandwidth_hz: 50e3,
            pilot_duration_s: 0.5e-3,
            pilot_psd: 1e-19,
            compute_efficiency: 30e9,
            bs_chain_power: 1.0,
            ut_chain_power: 0.3,
            fixed_power: 0.5,
            amp_efficiency: 1.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<(), EnergyError> {
        let positive = [
            (self.bandwidth_hz, "bandwidth_hz"),
            (self.pilot_duration_s, "pilot_duration_s"),
            (self.pilot_psd, "pilot_psd"),
            (self.compute_efficiency, "compute_efficiency"),
        ];
        for (v, name) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(EnergyError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        let nonnegative = [
            (self.bs_chain_power, "bs_chain_power"),
            (self.ut_chain_power, "ut_chain_power"),
            (self.fixed_power, "fixed_power"),
        ];
        for (v, name) in nonnegative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(EnergyError::InvalidParams(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
        }
        if !(self.amp_efficiency.is_finite()
            && self.amp_efficiency > 0.0
            && self.amp_efficiency <= 1.0)
        {
            return Err(EnergyError::InvalidParams(format!(
                "amp_efficiency must lie in (0, 1], got {}",
                self.amp_efficiency
            )));
        }
        Ok(())
    }
}

/// Energy totals of one positioning round, in natural logs of joules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub log_transmit: f64,
    pub log_processing: f64,
    pub log_hardware: f64,
    pub log_total: f64,
}

impl EnergyBreakdown {
    /// Linear-domain values `(transmit, processing, hardware, total)`; the
    /// processing term can overflow to infinity for large grid searches.
    pub fn linear(&self) -> (f64, f64, f64, f64) {
        (
            self.log_transmit.exp(),
            self.log_processing.exp(),
            self.log_hardware.exp(),
            self.log_total.exp(),
        )
    }
}

/// `log(sum(exp(t)))` computed stably.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + sum.ln()
}

fn hardware_log(
    f_used: usize,
    k: usize,
    params: &EnergyParams,
) -> Result<f64, EnergyError> {
    let power = (f_used as f64) * params.bs_chain_power
        + (k as f64) * params.ut_chain_power
        + params.fixed_power;
    if power <= 0.0 {
        return Err(EnergyError::InvalidParams(
            "total hardware power is zero; no chain or overhead draws power".into(),
        ));
    }
    Ok((params.pilot_duration_s * power).ln())
}

/// Energy of one round under the exhaustive grid-search estimator, whose
/// hypothesis count `K^F` makes the processing term exponential in the number
/// of antennas used.
pub fn energy_ml(
    k: usize,
    f_used: usize,
    params: &EnergyParams,
) -> Result<EnergyBreakdown, EnergyError> {
    params.validate()?;
    if k == 0 || f_used == 0 {
        return Err(EnergyError::InvalidParams(
            "user and antenna counts must be positive".into(),
        ));
    }
    let w_zeta = params.bandwidth_hz * params.pilot_duration_s;
    let log_transmit =
        (w_zeta * (k as f64) * params.pilot_psd / params.amp_efficiency).ln();
    let log_processing =
        (f_used as f64) * (k as f64).ln() + (w_zeta / params.compute_efficiency).ln();
    let log_hardware = hardware_log(f_used, k, params)?;
    let log_total = log_sum_exp(&[log_transmit, log_processing, log_hardware]);
    Ok(EnergyBreakdown {
        log_transmit,
        log_processing,
        log_hardware,
        log_total,
    })
}

/// Exact operation count of the subspace spectral estimator, split by stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MusicOpCount {
    /// Sample covariance from `N` snapshots: `(2N + 1) F^2`.
    pub covariance: u128,
    /// Eigendecomposition: `F^3`.
    pub evd: u128,
    /// Spectrum scan over `Q` grid points:
    /// `Q (2 F^2 (F - K) + F^2 + F - 1)`.
    pub spectrum: u128,
    pub total: u128,
}

/// Count the operations of the subspace estimator and verify the polynomial
/// form `(2Q+1) F^3 + (2N + Q(1-2K) + 1) F^2 + Q F - Q` against the stage
/// sums in exact integer arithmetic.
pub fn music_op_count(
    f: usize,
    k: usize,
    n_snapshots: usize,
    grid_size: usize,
) -> Result<MusicOpCount, EnergyError> {
    if f <= k {
        return Err(EnergyError::TooFewAntennas { f, k });
    }
    if n_snapshots == 0 || grid_size == 0 {
        return Err(EnergyError::InvalidParams(
            "snapshot count and grid size must be positive".into(),
        ));
    }
    let (f_u, k_u, n_u, q_u) = (f as u128, k as u128, n_snapshots as u128, grid_size as u128);
    let covariance = (2 * n_u + 1) * f_u * f_u;
    let evd = f_u * f_u * f_u;
    let spectrum = q_u * (2 * f_u * f_u * (f_u - k_u) + f_u * f_u + f_u - 1);
    let total = covariance + evd + spectrum;

    // Polynomial form; the F^2 coefficient can be negative, so use i128.
    let (f_i, k_i, n_i, q_i) = (f as i128, k as i128, n_snapshots as i128, grid_size as i128);
    let poly = (2 * q_i + 1) * f_i * f_i * f_i
        + (2 * n_i + q_i * (1 - 2 * k_i) + 1) * f_i * f_i
        + q_i * f_i
        - q_i;
    if poly != total as i128 {
        return Err(EnergyError::Internal(format!(
            "operation-count routes disagree: stages {total}, polynomial {poly}"
        )));
    }
    Ok(MusicOpCount {
        covariance,
        evd,
        spectrum,
        total,
    })
}

/// Energy of one round under the subspace estimator, with the operation count
/// and the cubic-in-`F` energy polynomial coefficients used for cross-checks.
#[derive(Clone, Debug, PartialEq)]
pub struct MusicEnergy {
    pub breakdown: EnergyBreakdown,
    pub ops: MusicOpCount,
    /// `[c0, c1, c2, c3]` such that the total energy equals
    /// `c3 F^3 + c2 F^2 + c1 F + c0`.
    pub poly: [f64; 4],
}

/// Energy of one subspace-estimator round: `N` snapshots of pilots, the
/// counted processing load, and `F` powered chains.
pub fn energy_music(
    f: usize,
    k: usize,
    n_snapshots: usize,
    grid_size: usize,
    params: &EnergyParams,
) -> Result<MusicEnergy, EnergyError> {
    params.validate()?;
    let ops = music_op_count(f, k, n_snapshots, grid_size)?;
    let w_zeta = params.bandwidth_hz * params.pilot_duration_s;
    let log_transmit = ((n_snapshots as f64)
        * (k as f64)
        * w_zeta
        * params.pilot_psd
        / params.amp_efficiency)
        .ln();
    let log_processing = (ops.total as f64).ln() + (w_zeta / params.compute_efficiency).ln();
    let log_hardware = hardware_log(f, k, params)?;
    let log_total = log_sum_exp(&[log_transmit, log_processing, log_hardware]);

    let per_op = w_zeta / params.compute_efficiency;
    let (n_f, k_f, q_f) = (n_snapshots as f64, k as f64, grid_size as f64);
    let c3 = per_op * (2.0 * q_f + 1.0);
    let c2 = per_op * ((2 * n_snapshots as i128 + (grid_size as i128) * (1 - 2 * k as i128) + 1) as f64);
    let c1 = params.pilot_duration_s * params.bs_chain_power + per_op * q_f;
    let c0 = n_f * k_f * w_zeta * params.pilot_psd / params.amp_efficiency - per_op * q_f
        + params.pilot_duration_s * (k_f * params.ut_chain_power + params.fixed_power);

    Ok(MusicEnergy {
        breakdown: EnergyBreakdown {
            log_transmit,
            log_processing,
            log_hardware,
            log_total,
        },
        ops,
        poly: [c0, c1, c2, c3],
    })
}

/// Localization efficiency of the deterministic bound route: users per joule
/// per radian of root-mean-square bound.
#[derive(Clone, Debug, PartialEq)]
pub struct LeReport {
    pub num_antennas_used: usize,
    pub energy: EnergyBreakdown,
    pub trace_crlb: f64,
    /// `1 / sqrt(trace)`.
    pub accuracy: f64,
    /// `ln(K) - ln(E_total) - ln(sqrt(trace))`.
    pub log_le: f64,
}

/// Localization efficiency under the grid-search estimator for `f_used`
/// antennas chosen by `rule` from the scenario's array. `rule = All` requires
/// `f_used` to equal the full array size.
pub fn le_ml(
    scenario: &Scenario,
    f_used: usize,
    rule: SelectionRule,
    params: &EnergyParams,
) -> Result<LeReport, EnergyError> {
    let k = scenario.num_users();
    let m = scenario.geometry.num_antennas;
    if f_used <= k {
        return Err(EnergyError::TooFewAntennas { f: f_used, k });
    }
    if rule == SelectionRule::All && f_used != m {
        return Err(EnergyError::InvalidParams(format!(
            "rule 'all' uses every antenna; got f_used = {f_used} for M = {m}"
        )));
    }
    let report = deterministic_crlb(scenario, &rule.spec(f_used))?;
    let energy = energy_ml(k, f_used, params)?;
    let log_le = (k as f64).ln() - energy.log_total - 0.5 * report.trace.ln();
    Ok(LeReport {
        num_antennas_used: f_used,
        energy,
        trace_crlb: report.trace,
        accuracy: report.trace.sqrt().recip(),
        log_le,
    })
}

/// Localization efficiency computed from a measured mean squared error. A
/// zero error (every estimate exact, possible on a coarse grid) has no finite
/// efficiency and is reported as `Perfect`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MusicLe {
    Finite { log_le: f64 },
    Perfect,
}

impl MusicLe {
    pub fn log_le(&self) -> Option<f64> {
        match self {
            MusicLe::Finite { log_le } => Some(*log_le),
            MusicLe::Perfect => None,
        }
    }

    pub fn linear(&self) -> f64 {
        match self {
            MusicLe::Finite { log_le } => log_le.exp(),
            MusicLe::Perfect => f64::INFINITY,
        }
    }
}

/// `K / (E_total sqrt(mse))` in log form, from a log-domain total energy.
pub fn le_music(k: usize, log_e_total: f64, mse: f64) -> Result<MusicLe, EnergyError> {
    if k == 0 {
        return Err(EnergyError::InvalidParams("user count must be positive".into()));
    }
    if !(mse.is_finite() && mse >= 0.0) {
        return Err(EnergyError::InvalidMse(mse));
    }
    if mse == 0.0 {
        return Ok(MusicLe::Perfect);
    }
    Ok(MusicLe::Finite {
        log_le: (k as f64).ln() - log_e_total - 0.5 * mse.ln(),
    })
}

/// Maximize a log-efficiency function over the admissible antenna counts
/// `K+1 ..= M`, scanning upward and keeping the smallest argmax on ties.
/// Returns `(F*, best_log_le)`.
pub fn optimize_num_antennas(
    mut log_le: impl FnMut(usize) -> Result<f64, EnergyError>,
    k: usize,
    m: usize,
) -> Result<(usize, f64), EnergyError> {
    if k + 1 > m {
        return Err(EnergyError::EmptyDomain { lower: k + 1, upper: m });
    }
    let mut best: Option<(usize, f64)> = None;
    for f in (k + 1)..=m {
        let value = log_le(f)?;
        let better = match best {
            None => true,
            Some((_, b)) => value > b,
        };
        if better {
            best = Some((f, value));
        }
    }
    Ok(best.expect("domain is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{ArrayGeometry, UserTerminal};
    use num_complex::Complex64;

    fn toy_scenario(m: usize, k: usize) -> Scenario {
        let users = (1..=k)
            .map(|i| UserTerminal {
                angle: std::f64::consts::PI * (i as f64) / (k as f64 + 1.0),
                pilot: Complex64::new((10.0 * 1e-20f64).sqrt(), 0.0),
                path_loss: 1.0,
                dominant_gain: Complex64::new(0.0, 0.0),
            })
            .collect();
        Scenario::new(ArrayGeometry::new(m, 0.5).unwrap(), users, 1e-20, 0.5).unwrap()
    }

    #[test]
    fn hardware_energy_spot_value() {
        let params = EnergyParams::default();
        let b = energy_ml(3, 80, &params).unwrap();
        let expect = 0.5e-3 * (80.0 * 1.0 + 3.0 * 0.3 + 0.5);
        assert!((b.log_hardware.exp() - expect).abs() < 1e-15);
    }

    #[test]
    fn transmit_and_processing_spot_values() {
        let params = EnergyParams::default();
        let b = energy_ml(2, 10, &params).unwrap();
        let w_zeta: f64 = 50e3 * 0.5e-3;
        assert!((b.log_transmit - (w_zeta * 2.0 * 1e-19).ln()).abs() < 1e-12);
        // K^F = 2^10 hypotheses.
        assert!((b.log_processing - (1024.0 * w_zeta / 30e9).ln()).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_linear_sum() {
        let vals: [f64; 3] = [0.7, 1.3, 0.02];
        let logs: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
        let direct: f64 = vals.iter().sum();
        assert!((log_sum_exp(&logs).exp() - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn log_sum_exp_survives_extreme_scales() {
        let total = log_sum_exp(&[-900.0, 800.0, 0.0]);
        assert!((total - 800.0).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 1.0]), 1.0);
    }

    #[test]
    fn op_count_spot_value_and_stage_split() {
        let ops = music_op_count(8, 2, 100, 180).unwrap();
        assert_eq!(ops.covariance, 201 * 64);
        assert_eq!(ops.evd, 512);
        assert_eq!(ops.spectrum, 180 * (2 * 64 * 6 + 64 + 8 - 1));
        assert_eq!(ops.total, 164_396);
    }

    #[test]
    fn op_count_rejects_too_few_antennas() {
        assert!(matches!(
            music_op_count(4, 4, 10, 10),
            Err(EnergyError::TooFewAntennas { .. })
        ));
    }

    #[test]
    fn music_energy_polynomial_matches_breakdown() {
        let params = EnergyParams::default();
        for &(f, k, n, q) in &[(8usize, 2usize, 100usize, 180usize), (23, 4, 100, 900), (55, 20, 64, 333)] {
            let e = energy_music(f, k, n, q, &params).unwrap();
            let f_f = f as f64;
            let poly = ((e.poly[3] * f_f + e.poly[2]) * f_f + e.poly[1]) * f_f + e.poly[0];
            let total = e.breakdown.log_total.exp();
            assert!(
                (poly - total).abs() <= 1e-12 * total,
                "F={f}: poly {poly} vs total {total}"
            );
        }
    }

    #[test]
    fn le_ml_prefers_furthest_over_first() {
        let sc = toy_scenario(40, 3);
        let params = EnergyParams::default();
        let fur = le_ml(&sc, 8, SelectionRule::Furthest, &params).unwrap();
        let first = le_ml(&sc, 8, SelectionRule::First, &params).unwrap();
        // Identical energy, smaller bound, higher efficiency.
        assert_eq!(fur.energy.log_total, first.energy.log_total);
        assert!(fur.trace_crlb < first.trace_crlb);
        assert!(fur.log_le > first.log_le);
    }

    #[test]
    fn le_ml_validates_antenna_counts() {
        let sc = toy_scenario(16, 3);
        let params = EnergyParams::default();
        assert!(matches!(
            le_ml(&sc, 3, SelectionRule::Furthest, &params),
            Err(EnergyError::TooFewAntennas { .. })
        ));
        assert!(matches!(
            le_ml(&sc, 8, SelectionRule::All, &params),
            Err(EnergyError::InvalidParams(_))
        ));
        assert!(le_ml(&sc, 16, SelectionRule::All, &params).is_ok());
    }

    #[test]
    fn le_music_handles_zero_mse() {
        assert_eq!(le_music(3, 0.0, 0.0).unwrap(), MusicLe::Perfect);
        assert!(matches!(le_music(3, 0.0, -1.0), Err(EnergyError::InvalidMse(_))));
        let le = le_music(2, 1.0f64.ln(), 0.25).unwrap();
        // K=2, E=1, sqrt(mse)=0.5 -> LE = 4.
        assert!((le.linear() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_scans_and_breaks_ties_low() {
        // Unimodal profile peaks at F = 7.
        let (f_star, best) =
            optimize_num_antennas(|f| Ok(-((f as f64) - 7.0).powi(2)), 4, 12).unwrap();
        assert_eq!(f_star, 7);
        assert_eq!(best, 0.0);
        // Flat profile keeps the smallest F.
        let (f_flat, _) = optimize_num_antennas(|_| Ok(1.0), 4, 12).unwrap();
        assert_eq!(f_flat, 5);
        // Empty domain errors.
        assert!(matches!(
            optimize_num_antennas(|_| Ok(0.0), 12, 12),
            Err(EnergyError::EmptyDomain { .. })
        ));
    }

    #[test]
    fn parameter_validation_catches_bad_values() {
        let p = EnergyParams {
            bs_chain_power: -1.0,
            ..EnergyParams::default()
        };
        assert!(p.validate().is_err());
        let q = EnergyParams {
            amp_efficiency: 1.5,
            ..EnergyParams::default()
        };
        assert!(q.validate().is_err());
        let r = EnergyParams {
            bandwidth_hz: 0.0,
            ..EnergyParams::default()
        };
        assert!(r.validate().is_err());
    }
}
