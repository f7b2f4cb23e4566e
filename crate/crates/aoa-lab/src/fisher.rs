//! Fisher information and Cramer-Rao lower bounds for the arrival angles.
//!
//! Two routes are provided. `exact_crlb` differentiates the noiseless snapshot
//! with respect to each angle for one concrete channel draw, assembles the
//! information matrix, and inverts it. `deterministic_crlb` evaluates the
//! closed-form limit that the exact bound concentrates around as the array
//! grows: a per-user bound proportional to `F / (2 beta^2 sum x^2)` where the
//! sum runs over the squared absolute indices of the retained antennas. Every
//! subset specialization (full array, first antennas, furthest antennas, or an
//! arbitrary index set) is evaluated through that one formula with an exact
//! integer index sum, so algebraically equal subsets give bit-identical
//! results.

use num_complex::Complex64;
use thiserror::Error;

use crate::array_model::{
    compose_g, AntennaSubset, ChannelRealization, ModelError, Scenario,
};
use crate::linalg::{invert_real, CMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FisherError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("information matrix is numerically singular (pivot below 1e-12 of the largest entry)")]
    SingularFim,
    #[error("deterministic bound diverges for user {user}: {reason}")]
    DivergentBound { user: usize, reason: String },
    #[error("first-antenna subset needs at least 2 elements for a finite bound, got {0}")]
    DegenerateFirstSubset(usize),
    #[error("subset [{0}] has zero squared-index sum, so it carries no angular information")]
    ZeroAperture(String),
}

/// Which route produced a `CrlbReport`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrlbMode {
    /// Inverse of the information matrix of one channel realization.
    Exact,
    /// Closed-form deterministic limit.
    Deterministic,
}

/// Bound evaluation result: per-user variances, their sum, and the `K x K`
/// information matrix that was inverted (for the deterministic route this is
/// the implied diagonal matrix).
#[derive(Clone, Debug, PartialEq)]
pub struct CrlbReport {
    pub mode: CrlbMode,
    pub crlb_diag: Vec<f64>,
    pub trace: f64,
    /// Row-major `K x K` information matrix.
    pub fim: Vec<f64>,
}

/// Antenna selection rule for the deterministic bound.
#[derive(Clone, Debug, PartialEq)]
pub enum SubsetSpec {
    /// All `M` antennas.
    Full,
    /// Indices `0..f` (nearest the origin).
    First(usize),
    /// Indices `m-f..m` (furthest from the origin).
    Furthest(usize),
    /// Any explicit index set.
    General(AntennaSubset),
}

impl SubsetSpec {
    /// Materialize the index set for an `m`-antenna array.
    pub fn resolve(&self, m: usize) -> Result<AntennaSubset, FisherError> {
        let subset = match self {
            SubsetSpec::Full => AntennaSubset::full(m)?,
            SubsetSpec::First(f) => {
                let s = AntennaSubset::first(*f)?;
                s.validate_for(m)?;
                s
            }
            SubsetSpec::Furthest(f) => AntennaSubset::furthest(m, *f)?,
            SubsetSpec::General(s) => {
                s.validate_for(m)?;
                s.clone()
            }
        };
        Ok(subset)
    }

    pub fn label(&self) -> String {
        match self {
            SubsetSpec::Full => "full".into(),
            SubsetSpec::First(f) => format!("first({f})"),
            SubsetSpec::Furthest(f) => format!("furthest({f})"),
            SubsetSpec::General(s) => format!("general({})", s.label()),
        }
    }
}

/// Derivative of the noiseless snapshot with respect to each angle: an
/// `F x K` matrix with entry
/// `(i, k) = j beta x_i sin(theta_k) g_{ik} s_k`,
/// where `g` is the effective gain matrix of the subset.
pub fn sensitivity_matrix(
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
) -> Result<CMatrix, FisherError> {
    let g = compose_g(scenario, channel, subset)?;
    let beta = scenario.geometry.beta();
    let f = subset.len();
    let k = scenario.num_users();
    let mut x_mat = CMatrix::zeros(f, k);
    for (i, &x) in subset.indices().iter().enumerate() {
        for (col, user) in scenario.users.iter().enumerate() {
            let slope = beta * (x as f64) * user.angle.sin();
            let v = Complex64::new(0.0, slope) * g.at(i, col) * user.pilot;
            x_mat.set(i, col, v);
        }
    }
    Ok(x_mat)
}

/// Assemble and invert the exact information matrix for one channel draw:
/// `J = (2 / noise_psd) Re(X^H X)` with `X` the sensitivity matrix. Errors
/// with `SingularFim` when the matrix cannot be inverted, which happens for
/// genuinely unidentifiable geometry (e.g. two users whose columns are
/// parallel).
pub fn exact_crlb(
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
) -> Result<CrlbReport, FisherError> {
    let x_mat = sensitivity_matrix(scenario, channel, subset)?;
    let k = scenario.num_users();
    let f = subset.len();
    let scale = 2.0 / scenario.noise_psd;
    let mut fim = vec![0.0f64; k * k];
    for a in 0..k {
        for b in a..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..f {
                acc += x_mat.at(i, a).conj() * x_mat.at(i, b);
            }
            let v = scale * acc.re;
            fim[a * k + b] = v;
            fim[b * k + a] = v;
        }
    }
    let inv = invert_real(&fim, k).ok_or(FisherError::SingularFim)?;
    let crlb_diag: Vec<f64> = (0..k).map(|i| inv[i * k + i]).collect();
    let trace = crlb_diag.iter().sum();
    Ok(CrlbReport {
        mode: CrlbMode::Exact,
        crlb_diag,
        trace,
        fim,
    })
}

/// Per-user scale factors of the deterministic bound: entry `k` is
/// `1 / ((|h_bar_k|^2 + 2 v) rho_k sin^2 theta_k)` with `v` the per-part
/// multipath variance and `rho_k` the user SNR. Each factor must be finite
/// and positive for the bound to exist.
pub fn s_matrix(scenario: &Scenario) -> Result<Vec<f64>, FisherError> {
    let v = scenario.multipath_var;
    scenario
        .users
        .iter()
        .enumerate()
        .map(|(k, user)| {
            let gain_power = user.dominant_gain.norm_sqr() + 2.0 * v;
            if gain_power <= 0.0 {
                return Err(FisherError::DivergentBound {
                    user: k,
                    reason: "channel has zero mean power and zero deviation power".into(),
                });
            }
            let rho = scenario.snr_rho(k);
            if !(rho.is_finite() && rho > 0.0) {
                return Err(FisherError::DivergentBound {
                    user: k,
                    reason: format!("nonpositive or non-finite SNR {rho}"),
                });
            }
            let sin_t = user.angle.sin();
            let denom = gain_power * rho * sin_t * sin_t;
            if !(denom.is_finite() && denom > 0.0) {
                return Err(FisherError::DivergentBound {
                    user: k,
                    reason: format!("angle {} has no angular sensitivity", user.angle),
                });
            }
            Ok(1.0 / denom)
        })
        .collect()
}

/// Closed-form deterministic bound for the requested subset: user `k` gets
/// `F / (2 beta^2 sum_{x in S} x^2) * s_k` with the index sum computed in
/// exact integer arithmetic. The report's information matrix is the implied
/// diagonal `diag(1 / crlb_k)`.
pub fn deterministic_crlb(
    scenario: &Scenario,
    spec: &SubsetSpec,
) -> Result<CrlbReport, FisherError> {
    if let SubsetSpec::First(f) = spec {
        if *f < 2 {
            return Err(FisherError::DegenerateFirstSubset(*f));
        }
    }
    let subset = spec.resolve(scenario.geometry.num_antennas)?;
    let sum_sq = subset.sum_sq_indices();
    if sum_sq == 0 {
        return Err(FisherError::ZeroAperture(subset.label()));
    }
    let s = s_matrix(scenario)?;
    let beta = scenario.geometry.beta();
    let coef = (subset.len() as f64) / (2.0 * beta * beta * (sum_sq as f64));
    let k = scenario.num_users();
    let crlb_diag: Vec<f64> = s.iter().map(|&sk| coef * sk).collect();
    let trace = crlb_diag.iter().sum();
    let mut fim = vec![0.0f64; k * k];
    for i in 0..k {
        fim[i * k + i] = 1.0 / crlb_diag[i];
    }
    Ok(CrlbReport {
        mode: CrlbMode::Deterministic,
        crlb_diag,
        trace,
        fim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{draw_channel, ArrayGeometry, ChannelLaw, UserTerminal};

    fn scenario(
        m: usize,
        angles: &[f64],
        multipath_var: f64,
        dominant: Complex64,
    ) -> Scenario {
        let users = angles
            .iter()
            .map(|&a| UserTerminal {
                angle: a,
                pilot: Complex64::new(10.0f64.sqrt(), 0.0),
                path_loss: 1.0,
                dominant_gain: dominant,
            })
            .collect();
        Scenario::new(
            ArrayGeometry::new(m, 0.5).unwrap(),
            users,
            1.0,
            multipath_var,
        )
        .unwrap()
    }

    #[test]
    fn scalar_full_array_closed_form() {
        // One user at broadside, SNR 10, unit gain power: the full-array bound
        // reduces to 3 / (beta^2 (M-1)(2M-1)) / 10.
        let sc = scenario(100, &[std::f64::consts::FRAC_PI_2], 0.5, Complex64::new(0.0, 0.0));
        let report = deterministic_crlb(&sc, &SubsetSpec::Full).unwrap();
        let beta = std::f64::consts::PI;
        let expect = 3.0 / (beta * beta * 99.0 * 199.0) / 10.0;
        assert!((report.crlb_diag[0] - expect).abs() < 1e-18);
        assert!((report.trace - expect).abs() < 1e-18);
        assert_eq!(report.mode, CrlbMode::Deterministic);
    }

    #[test]
    fn specializations_agree_with_general_route_bitwise() {
        let sc = scenario(24, &[0.7, 1.9], 0.5, Complex64::new(0.3, -0.1));
        let cases = [
            (SubsetSpec::Full, AntennaSubset::full(24).unwrap()),
            (SubsetSpec::First(9), AntennaSubset::first(9).unwrap()),
            (
                SubsetSpec::Furthest(5),
                AntennaSubset::furthest(24, 5).unwrap(),
            ),
        ];
        for (spec, subset) in cases {
            let a = deterministic_crlb(&sc, &spec).unwrap();
            let b = deterministic_crlb(&sc, &SubsetSpec::General(subset)).unwrap();
            assert_eq!(a.crlb_diag, b.crlb_diag, "{}", spec.label());
            assert_eq!(a.trace, b.trace);
        }
    }

    #[test]
    fn exact_bound_matches_deterministic_for_frozen_scalar_channel() {
        // One user, zero multipath variance, unit dominant gain: the exact
        // information matrix is a deterministic scalar and both routes agree
        // to rounding error.
        let sc = scenario(64, &[1.0], 0.0, Complex64::new(1.0, 0.0));
        let channel = draw_channel(&sc, ChannelLaw::ComplexGaussian, 3);
        for spec in [SubsetSpec::Full, SubsetSpec::First(16), SubsetSpec::Furthest(16)] {
            let subset = spec.resolve(64).unwrap();
            let exact = exact_crlb(&sc, &channel, &subset).unwrap();
            let det = deterministic_crlb(&sc, &spec).unwrap();
            let rel = (exact.crlb_diag[0] - det.crlb_diag[0]).abs() / det.crlb_diag[0];
            assert!(rel < 1e-12, "{}: rel {rel}", spec.label());
        }
    }

    #[test]
    fn multiuser_cross_terms_vanish_with_array_size() {
        // With several users the frozen-channel exact bound differs from the
        // deterministic limit by oscillatory cross terms that decay as the
        // array grows.
        let mut gaps = Vec::new();
        for &m in &[32usize, 128, 512] {
            let sc = scenario(m, &[1.0, 2.2], 0.0, Complex64::new(1.0, 0.0));
            let channel = draw_channel(&sc, ChannelLaw::ComplexGaussian, 3);
            let subset = AntennaSubset::full(m).unwrap();
            let exact = exact_crlb(&sc, &channel, &subset).unwrap();
            let det = deterministic_crlb(&sc, &SubsetSpec::Full).unwrap();
            gaps.push((exact.trace - det.trace).abs() / det.trace);
        }
        assert!(gaps[2] < gaps[0], "gaps {gaps:?}");
        assert!(gaps[2] < 0.02, "gaps {gaps:?}");
    }

    #[test]
    fn fim_is_bitwise_symmetric() {
        let sc = scenario(32, &[0.5, 1.3, 2.4], 0.5, Complex64::new(0.0, 0.0));
        let channel = draw_channel(&sc, ChannelLaw::Uniform, 17);
        let subset = AntennaSubset::full(32).unwrap();
        let report = exact_crlb(&sc, &channel, &subset).unwrap();
        let k = 3;
        for a in 0..k {
            for b in 0..k {
                assert_eq!(report.fim[a * k + b], report.fim[b * k + a]);
            }
        }
    }

    #[test]
    fn parallel_columns_give_singular_fim() {
        // Two users at the same angle with identical deterministic channels
        // make the sensitivity columns parallel.
        let geo = ArrayGeometry::new(8, 0.5).unwrap();
        let user = UserTerminal {
            angle: 1.0,
            pilot: Complex64::new(1.0, 0.0),
            path_loss: 1.0,
            dominant_gain: Complex64::new(1.0, 0.0),
        };
        let sc = Scenario::new_unchecked(geo, vec![user, user], 1.0, 0.0);
        let channel = draw_channel(&sc, ChannelLaw::ComplexGaussian, 1);
        let subset = AntennaSubset::full(8).unwrap();
        assert_eq!(
            exact_crlb(&sc, &channel, &subset),
            Err(FisherError::SingularFim)
        );
    }

    #[test]
    fn s_matrix_values_and_divergence() {
        let sc = scenario(16, &[std::f64::consts::FRAC_PI_2], 0.5, Complex64::new(0.0, 0.0));
        // gain power 1, rho 10, sin 1 -> 0.1
        assert!((s_matrix(&sc).unwrap()[0] - 0.1).abs() < 1e-15);

        // Zero channel power diverges.
        let dead = scenario(16, &[1.0], 0.0, Complex64::new(0.0, 0.0));
        assert!(matches!(
            s_matrix(&dead),
            Err(FisherError::DivergentBound { .. })
        ));

        // Endline angle diverges (constructed without validation).
        let geo = ArrayGeometry::new(16, 0.5).unwrap();
        let endfire = Scenario::new_unchecked(
            geo,
            vec![UserTerminal {
                angle: 0.0,
                pilot: Complex64::new(1.0, 0.0),
                path_loss: 1.0,
                dominant_gain: Complex64::new(1.0, 0.0),
            }],
            1.0,
            0.5,
        );
        assert!(matches!(
            s_matrix(&endfire),
            Err(FisherError::DivergentBound { .. })
        ));
    }

    #[test]
    fn degenerate_subsets_are_rejected() {
        let sc = scenario(16, &[1.0], 0.5, Complex64::new(0.0, 0.0));
        assert_eq!(
            deterministic_crlb(&sc, &SubsetSpec::First(1)),
            Err(FisherError::DegenerateFirstSubset(1))
        );
        assert_eq!(
            deterministic_crlb(&sc, &SubsetSpec::First(0)),
            Err(FisherError::DegenerateFirstSubset(0))
        );
        let origin_only = AntennaSubset::new(vec![0]).unwrap();
        assert!(matches!(
            deterministic_crlb(&sc, &SubsetSpec::General(origin_only)),
            Err(FisherError::ZeroAperture(_))
        ));
        // Furthest single antenna still has aperture (index M-1 != 0).
        assert!(deterministic_crlb(&sc, &SubsetSpec::Furthest(1)).is_ok());
    }

    #[test]
    fn furthest_to_first_trace_ratio_is_exact() {
        // M = 16, F = 6: integer index sums 955 and 55 give the ratio 55/955.
        let sc = scenario(16, &[1.0, 2.0], 0.5, Complex64::new(0.0, 0.0));
        let fur = deterministic_crlb(&sc, &SubsetSpec::Furthest(6)).unwrap();
        let first = deterministic_crlb(&sc, &SubsetSpec::First(6)).unwrap();
        let ratio = fur.trace / first.trace;
        assert!((ratio - 55.0 / 955.0).abs() < 1e-15 * (55.0 / 955.0));
    }
}
