//! Experiment parameters and the `key = value` configuration grammar.
//!
//! Every experiment starts from its own documented defaults; values are then
//! layered in increasing precedence: the `AOA_LAB_SEED` environment variable,
//! a config file, `--set key=value` overrides, and finally `--seed`.

use num_complex::Complex64;
use thiserror::Error;

use crate::array_model::ChannelLaw;
use crate::energy::EnergyParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config line {line}: expected 'key = value', got '{content}'")]
    BadLine { line: usize, content: String },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for key '{key}': expected {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(
        "unknown experiment '{0}' (expected crlb-convergence, ml-variance, le-sweep, \
         music-le, lemma-diagnostics, or subset-oracle)"
    )]
    UnknownExperiment(String),
}

/// The experiments the tool can run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// Exact bound converging to its deterministic limit as the array grows.
    CrlbConvergence,
    /// Grid-search estimator variance on furthest vs first subsets.
    MlVariance,
    /// Localization efficiency across user counts with optimized subset size.
    LeSweep,
    /// Subspace-estimator efficiency across subset sizes.
    MusicLe,
    /// Concentration diagnostics behind the deterministic limit.
    LemmaDiagnostics,
    /// Exhaustive check that the furthest subset maximizes the objective.
    SubsetOracle,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::CrlbConvergence,
        Experiment::MlVariance,
        Experiment::LeSweep,
        Experiment::MusicLe,
        Experiment::LemmaDiagnostics,
        Experiment::SubsetOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CrlbConvergence => "crlb-convergence",
            Experiment::MlVariance => "ml-variance",
            Experiment::LeSweep => "le-sweep",
            Experiment::MusicLe => "music-le",
            Experiment::LemmaDiagnostics => "lemma-diagnostics",
            Experiment::SubsetOracle => "subset-oracle",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .iter()
            .find(|e| e.name() == s)
            .copied()
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// All tunable knobs. Field defaults depend on the experiment; see
/// [`Params::defaults_for`].
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub energy: EnergyParams,
    /// Noise power spectral density per antenna, W/Hz.
    pub noise_psd: f64,
    /// Element pitch over wavelength.
    pub spacing_wavelengths: f64,
    /// Per-real-part multipath variance.
    pub multipath_var: f64,
    /// Dominant channel gain shared by all users.
    pub dominant_gain: Complex64,
    /// Large-scale path loss `l` (power attenuation).
    pub path_loss: f64,
    pub law: ChannelLaw,
    /// Array size `M`.
    pub num_antennas: usize,
    /// User count `K`.
    pub num_users: usize,
    /// Subset size `F` for experiments that fix one.
    pub subset_size: usize,
    /// Snapshots `N` per covariance estimate.
    pub num_snapshots: usize,
    /// Scan grid size `Q`.
    pub grid_size: usize,
    /// Grid/user-placement exclusion margin from the array ends, radians.
    pub exclusion: f64,
    /// Monte Carlo trials.
    pub num_trials: usize,
    pub seed: u64,
    /// Worker threads; 0 means the runtime default.
    pub threads: usize,
    /// Share pilot/noise draws between the compared subsets.
    pub paired: bool,
    /// True arrival angle for single-user experiments.
    pub theta: f64,
    /// User-count range for the efficiency sweep.
    pub k_min: usize,
    pub k_max: usize,
    /// Whether M (resp. K) was set explicitly rather than defaulted; the
    /// subspace experiment falls back to its standard points otherwise.
    pub m_overridden: bool,
    pub k_overridden: bool,
}

impl Params {
    /// Experiment-specific defaults. Shared baseline: half-wavelength pitch,
    /// noise density 1e-20 W/Hz, pilot density 1e-19 W/Hz (SNR 10), unit path
    /// loss, Gaussian multipath with per-part variance 0.5 around a zero
    /// dominant gain, seed 1, runtime-default threads.
    pub fn defaults_for(experiment: Experiment) -> Params {
        let base = Params {
            energy: EnergyParams::default(),
            noise_psd: 1e-20,
            spacing_wavelengths: 0.5,
            multipath_var: 0.5,
            dominant_gain: Complex64::new(0.0, 0.0),
            path_loss: 1.0,
            law: ChannelLaw::ComplexGaussian,
            num_antennas: 128,
            num_users: 5,
            subset_size: 6,
            num_snapshots: 100,
            grid_size: 1800,
            exclusion: std::f64::consts::PI / 10.0,
            num_trials: 100,
            seed: 1,
            threads: 0,
            paired: true,
            theta: std::f64::consts::PI / 6.0,
            k_min: 2,
            k_max: 10,
            m_overridden: false,
            k_overridden: false,
        };
        match experiment {
            Experiment::CrlbConvergence => base,
            Experiment::MlVariance => Params {
                num_antennas: 16,
                num_users: 1,
                num_trials: 10_000,
                ..base
            },
            Experiment::LeSweep => Params {
                num_antennas: 80,
                ..base
            },
            Experiment::MusicLe => Params {
                num_antennas: 22,
                num_users: 4,
                // Deterministic unit channel: the subspace model identifies
                // angles through the steering manifold alone.
                multipath_var: 0.0,
                dominant_gain: Complex64::new(1.0, 0.0),
                grid_size: 900,
                exclusion: std::f64::consts::PI / 7.0,
                num_trials: 200,
                ..base
            },
            Experiment::LemmaDiagnostics => Params {
                num_users: 4,
                num_trials: 1001,
                ..base
            },
            Experiment::SubsetOracle => Params {
                num_antennas: 12,
                ..base
            },
        }
    }

    /// Apply one `key = value` assignment. Unknown keys are rejected by name.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn f64_of(key: &str, value: &str) -> Result<f64, ConfigError> {
            value.parse::<f64>().map_err(|_| ConfigError::BadValue {
                key: key.into(),
                value: value.into(),
                expected: "a real number".into(),
            })
        }
        fn usize_of(key: &str, value: &str) -> Result<usize, ConfigError> {
            value.parse::<usize>().map_err(|_| ConfigError::BadValue {
                key: key.into(),
                value: value.into(),
                expected: "a nonnegative integer".into(),
            })
        }
        match key {
            "W" => self.energy.bandwidth_hz = f64_of(key, value)?,
            "zeta" => self.energy.pilot_duration_s = f64_of(key, value)?,
            "p" => self.energy.pilot_psd = f64_of(key, value)?,
            "L_BS" => self.energy.compute_efficiency = f64_of(key, value)?,
            "P_BS" => self.energy.bs_chain_power = f64_of(key, value)?,
            "P_UT" => self.energy.ut_chain_power = f64_of(key, value)?,
            "P_fix" => self.energy.fixed_power = f64_of(key, value)?,
            "omega" => self.energy.amp_efficiency = f64_of(key, value)?,
            "sigma_n2" => self.noise_psd = f64_of(key, value)?,
            "sigma_h2" => self.multipath_var = f64_of(key, value)?,
            "h_d_re" => self.dominant_gain.re = f64_of(key, value)?,
            "h_d_im" => self.dominant_gain.im = f64_of(key, value)?,
            "l" => self.path_loss = f64_of(key, value)?,
            "d_lambda" => self.spacing_wavelengths = f64_of(key, value)?,
            "law" => {
                self.law = value.parse().map_err(|e: String| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                    expected: e,
                })?
            }
            "M" => {
                self.num_antennas = usize_of(key, value)?;
                self.m_overridden = true;
            }
            "K" => {
                self.num_users = usize_of(key, value)?;
                self.k_overridden = true;
            }
            "F" => self.subset_size = usize_of(key, value)?,
            "N" => self.num_snapshots = usize_of(key, value)?,
            "Q" => self.grid_size = usize_of(key, value)?,
            "N_MC" => self.num_trials = usize_of(key, value)?,
            "exclusion" => self.exclusion = f64_of(key, value)?,
            "theta" => self.theta = f64_of(key, value)?,
            "paired" => {
                self.paired = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(ConfigError::BadValue {
                            key: key.into(),
                            value: value.into(),
                            expected: "true or false".into(),
                        })
                    }
                }
            }
            "K_min" => self.k_min = usize_of(key, value)?,
            "K_max" => self.k_max = usize_of(key, value)?,
            "seed" => {
                self.seed = value.parse::<u64>().map_err(|_| ConfigError::BadValue {
                    key: key.into(),
                    value: value.into(),
                    expected: "an unsigned 64-bit integer".into(),
                })?
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Cross-field validation, run after all assignments.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.energy
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.num_antennas < 2 {
            return Err(ConfigError::Invalid(format!(
                "M must be at least 2, got {}",
                self.num_antennas
            )));
        }
        if self.num_users == 0 {
            return Err(ConfigError::Invalid("K must be positive".into()));
        }
        if self.num_users >= self.num_antennas {
            return Err(ConfigError::Invalid(format!(
                "K must be smaller than M, got K = {} for M = {}",
                self.num_users, self.num_antennas
            )));
        }
        if !(self.noise_psd.is_finite() && self.noise_psd > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "sigma_n2 must be positive, got {}",
                self.noise_psd
            )));
        }
        if !(self.multipath_var.is_finite() && self.multipath_var >= 0.0) {
            return Err(ConfigError::Invalid(format!(
                "sigma_h2 must be nonnegative, got {}",
                self.multipath_var
            )));
        }
        if !(self.path_loss.is_finite() && self.path_loss > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "l must be positive, got {}",
                self.path_loss
            )));
        }
        if !(self.spacing_wavelengths.is_finite() && self.spacing_wavelengths > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "d_lambda must be positive, got {}",
                self.spacing_wavelengths
            )));
        }
        if !(self.exclusion.is_finite()
            && (0.0..std::f64::consts::FRAC_PI_2).contains(&self.exclusion))
        {
            return Err(ConfigError::Invalid(format!(
                "exclusion must lie in [0, pi/2), got {}",
                self.exclusion
            )));
        }
        if !(self.theta.is_finite() && self.theta > 0.0 && self.theta < std::f64::consts::PI) {
            return Err(ConfigError::Invalid(format!(
                "theta must lie in (0, pi), got {}",
                self.theta
            )));
        }
        if self.grid_size < 2 {
            return Err(ConfigError::Invalid(format!(
                "Q must be at least 2, got {}",
                self.grid_size
            )));
        }
        if self.num_snapshots == 0 {
            return Err(ConfigError::Invalid("N must be positive".into()));
        }
        if self.num_trials == 0 {
            return Err(ConfigError::Invalid("N_MC must be positive".into()));
        }
        if self.subset_size == 0 {
            return Err(ConfigError::Invalid("F must be positive".into()));
        }
        if self.subset_size > self.num_antennas {
            return Err(ConfigError::Invalid(format!(
                "F must not exceed M, got F = {} for M = {}",
                self.subset_size, self.num_antennas
            )));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(ConfigError::Invalid(format!(
                "need 1 <= K_min <= K_max, got K_min = {}, K_max = {}",
                self.k_min, self.k_max
            )));
        }
        Ok(())
    }

    /// The user-count sweep range only constrains the experiments that use
    /// it, so its interaction with M is checked per run rather than in
    /// [`Params::validate`].
    pub fn validate_k_range(&self) -> Result<(), ConfigError> {
        if self.k_max >= self.num_antennas {
            return Err(ConfigError::Invalid(format!(
                "K_max must be smaller than M, got K_max = {} for M = {}",
                self.k_max, self.num_antennas
            )));
        }
        Ok(())
    }
}

/// Parse config text: one `key = value` per line, `#` starts a comment, blank
/// lines are skipped. Returns assignments in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::BadLine {
                line: idx + 1,
                content: raw.trim().to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::BadLine {
                line: idx + 1,
                content: raw.trim().to_string(),
            });
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}
