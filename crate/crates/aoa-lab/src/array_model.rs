//! Uniform linear array model: geometry, user terminals, random channel draws,
//! steering vectors over antenna subsets, and snapshot synthesis.
//!
//! Conventions used throughout the crate:
//! * antenna `x` sits at position `x * spacing` along the line, `x = 0..M-1`;
//! * a subset keeps the absolute phase index of each retained antenna, so the
//!   steering entry for antenna `x` is `exp(-j x beta cos theta) / sqrt(F)`
//!   with `beta = 2 pi spacing / wavelength` and `F` the subset size;
//! * channel entries are i.i.d. around a per-user dominant gain, with the same
//!   deviation variance on the real and imaginary parts.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::linalg::CMatrix;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("array needs at least 2 antennas, got {0}")]
    TooFewAntennas(usize),
    #[error("antenna spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
    #[error("scenario needs at least one user terminal")]
    NoUsers,
    #[error("scenario needs fewer users than antennas ({users} users, {antennas} antennas)")]
    TooManyUsers { users: usize, antennas: usize },
    #[error("user angle must lie strictly inside (0, pi), got {0}")]
    AngleOutOfRange(f64),
    #[error("user angles must be pairwise distinct (users {0} and {1} coincide)")]
    DuplicateAngles(usize, usize),
    #[error("path loss must be positive and finite, got {0}")]
    BadPathLoss(f64),
    #[error("pilot symbol must be nonzero and finite")]
    BadPilot,
    #[error("noise power spectral density must be positive and finite, got {0}")]
    BadNoisePsd(f64),
    #[error("multipath variance must be nonnegative and finite, got {0}")]
    BadMultipathVar(f64),
    #[error("antenna subset is empty")]
    EmptySubset,
    #[error("antenna subset repeats index {0}")]
    DuplicateIndex(usize),
    #[error("antenna index {index} out of range for an array of {antennas}")]
    IndexOutOfRange { index: usize, antennas: usize },
    #[error("subset size {size} exceeds array size {antennas}")]
    SubsetTooLarge { size: usize, antennas: usize },
    #[error("angle must be finite, got {0}")]
    NonFiniteAngle(f64),
}

/// Uniform linear array: `num_antennas` elements at pitch `spacing_wavelengths`
/// (element separation divided by carrier wavelength).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArrayGeometry {
    pub num_antennas: usize,
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(num_antennas: usize, spacing_wavelengths: f64) -> Result<Self, ModelError> {
        if num_antennas < 2 {
            return Err(ModelError::TooFewAntennas(num_antennas));
        }
        if !(spacing_wavelengths.is_finite() && spacing_wavelengths > 0.0) {
            return Err(ModelError::BadSpacing(spacing_wavelengths));
        }
        Ok(ArrayGeometry {
            num_antennas,
            spacing_wavelengths,
        })
    }

    /// Phase slope `beta = 2 pi spacing / wavelength`; half-wavelength pitch
    /// gives `beta = pi`.
    #[inline]
    pub fn beta(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.spacing_wavelengths
    }
}

/// One transmitting user: arrival angle, pilot symbol, large-scale path loss
/// (power attenuation `l`), and the dominant channel gain shared by all
/// antennas.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UserTerminal {
    pub angle: f64,
    pub pilot: Complex64,
    pub path_loss: f64,
    pub dominant_gain: Complex64,
}

/// Distribution of the i.i.d. channel deviations around the dominant gain.
/// Each law has per-real-part variance `multipath_var`, so the total deviation
/// power per complex entry is `2 * multipath_var`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelLaw {
    /// Independent zero-mean Gaussian real and imaginary parts.
    ComplexGaussian,
    /// Independent uniform parts on `[-sqrt(3 v), sqrt(3 v)]`.
    Uniform,
    /// Independent signs: each part is `+/- sqrt(v)`.
    Rademacher,
}

impl ChannelLaw {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelLaw::ComplexGaussian => "complex-gaussian",
            ChannelLaw::Uniform => "uniform",
            ChannelLaw::Rademacher => "rademacher",
        }
    }

    pub const ALL: [ChannelLaw; 3] = [
        ChannelLaw::ComplexGaussian,
        ChannelLaw::Uniform,
        ChannelLaw::Rademacher,
    ];
}

impl std::str::FromStr for ChannelLaw {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complex-gaussian" | "gaussian" => Ok(ChannelLaw::ComplexGaussian),
            "uniform" => Ok(ChannelLaw::Uniform),
            "rademacher" => Ok(ChannelLaw::Rademacher),
            other => Err(format!(
                "unknown channel law '{other}' (expected complex-gaussian, uniform, or rademacher)"
            )),
        }
    }
}

impl std::fmt::Display for ChannelLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A full problem instance: the array, the users, and the channel statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub users: Vec<UserTerminal>,
    /// Noise power spectral density per antenna (variance of one complex
    /// noise sample).
    pub noise_psd: f64,
    /// Per-real-part variance of the channel deviations.
    pub multipath_var: f64,
}

impl Scenario {
    pub fn new(
        geometry: ArrayGeometry,
        users: Vec<UserTerminal>,
        noise_psd: f64,
        multipath_var: f64,
    ) -> Result<Self, ModelError> {
        if users.is_empty() {
            return Err(ModelError::NoUsers);
        }
        if users.len() >= geometry.num_antennas {
            return Err(ModelError::TooManyUsers {
                users: users.len(),
                antennas: geometry.num_antennas,
            });
        }
        for u in &users {
            if !(u.angle.is_finite() && u.angle > 0.0 && u.angle < std::f64::consts::PI) {
                return Err(ModelError::AngleOutOfRange(u.angle));
            }
            if !(u.path_loss.is_finite() && u.path_loss > 0.0) {
                return Err(ModelError::BadPathLoss(u.path_loss));
            }
            if !(u.pilot.re.is_finite() && u.pilot.im.is_finite()) || u.pilot.norm_sqr() == 0.0 {
                return Err(ModelError::BadPilot);
            }
        }
        for i in 0..users.len() {
            for j in (i + 1)..users.len() {
                if users[i].angle == users[j].angle {
                    return Err(ModelError::DuplicateAngles(i, j));
                }
            }
        }
        if !(noise_psd.is_finite() && noise_psd > 0.0) {
            return Err(ModelError::BadNoisePsd(noise_psd));
        }
        if !(multipath_var.is_finite() && multipath_var >= 0.0) {
            return Err(ModelError::BadMultipathVar(multipath_var));
        }
        Ok(Scenario {
            geometry,
            users,
            noise_psd,
            multipath_var,
        })
    }

    /// Build a scenario without the validity checks. Intended for tests that
    /// deliberately construct degenerate geometry (coinciding users, boundary
    /// angles).
    pub fn new_unchecked(
        geometry: ArrayGeometry,
        users: Vec<UserTerminal>,
        noise_psd: f64,
        multipath_var: f64,
    ) -> Self {
        Scenario {
            geometry,
            users,
            noise_psd,
            multipath_var,
        }
    }

    #[inline]
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Post-despreading SNR of user `k`: pilot power times path loss over the
    /// noise density.
    pub fn snr_rho(&self, k: usize) -> f64 {
        let u = &self.users[k];
        u.pilot.norm_sqr() * u.path_loss / self.noise_psd
    }
}

/// A set of retained antennas, stored as strictly increasing absolute indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AntennaSubset {
    indices: Vec<usize>,
}

impl AntennaSubset {
    /// Build from arbitrary indices; sorts and rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self, ModelError> {
        if indices.is_empty() {
            return Err(ModelError::EmptySubset);
        }
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(ModelError::DuplicateIndex(w[0]));
            }
        }
        Ok(AntennaSubset { indices })
    }

    /// All antennas of an `m`-element array.
    pub fn full(m: usize) -> Result<Self, ModelError> {
        AntennaSubset::new((0..m).collect())
    }

    /// The `f` antennas nearest the array origin: indices `0..f`.
    pub fn first(f: usize) -> Result<Self, ModelError> {
        AntennaSubset::new((0..f).collect())
    }

    /// The `f` antennas furthest from the origin of an `m`-element array:
    /// indices `m-f..m`.
    pub fn furthest(m: usize, f: usize) -> Result<Self, ModelError> {
        if f > m {
            return Err(ModelError::SubsetTooLarge {
                size: f,
                antennas: m,
            });
        }
        AntennaSubset::new((m - f..m).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().expect("subset is never empty")
    }

    /// Check that every index fits an `m`-element array.
    pub fn validate_for(&self, m: usize) -> Result<(), ModelError> {
        if self.max_index() >= m {
            return Err(ModelError::IndexOutOfRange {
                index: self.max_index(),
                antennas: m,
            });
        }
        Ok(())
    }

    /// Exact integer sum of squared indices, the quantity that drives angular
    /// sensitivity.
    pub fn sum_sq_indices(&self) -> u128 {
        self.indices.iter().map(|&x| (x as u128) * (x as u128)).sum()
    }

    /// Compact label for CSV cells, e.g. `"10;11;12"`.
    pub fn label(&self) -> String {
        self.indices
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// One draw of the channel matrix: `entries` is `M x K` over the full array,
/// tagged with the law and seed that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    pub entries: CMatrix,
    pub law: ChannelLaw,
    pub seed: u64,
}

fn draw_part(rng: &mut ChaCha8Rng, law: ChannelLaw, std_dev: f64) -> f64 {
    match law {
        ChannelLaw::ComplexGaussian => {
            let n = Normal::new(0.0, std_dev).expect("positive standard deviation");
            n.sample(rng)
        }
        ChannelLaw::Uniform => {
            // Same per-part variance as the Gaussian law: half-width sqrt(3) sigma.
            let half_width = std_dev * 3.0f64.sqrt();
            let u: f64 = rng.gen();
            half_width * (2.0 * u - 1.0)
        }
        ChannelLaw::Rademacher => {
            let u: f64 = rng.gen();
            if u < 0.5 {
                -std_dev
            } else {
                std_dev
            }
        }
    }
}

/// Draw the full `M x K` channel matrix. Entry `(m, k)` is the dominant gain
/// of user `k` plus an i.i.d. deviation with per-part variance
/// `scenario.multipath_var` under the requested law. The same `(law, seed)`
/// always reproduces the same matrix; a zero variance short-circuits to the
/// dominant gains without consuming randomness.
pub fn draw_channel(scenario: &Scenario, law: ChannelLaw, seed: u64) -> ChannelRealization {
    let m = scenario.geometry.num_antennas;
    let k = scenario.num_users();
    let mut entries = CMatrix::zeros(m, k);
    if scenario.multipath_var == 0.0 {
        for row in 0..m {
            for col in 0..k {
                entries.set(row, col, scenario.users[col].dominant_gain);
            }
        }
        return ChannelRealization { entries, law, seed };
    }
    let std_dev = scenario.multipath_var.sqrt();
    let mut stream = rng::stream(seed, "channel", 0);
    for row in 0..m {
        for col in 0..k {
            let re = draw_part(&mut stream, law, std_dev);
            let im = draw_part(&mut stream, law, std_dev);
            entries.set(
                row,
                col,
                scenario.users[col].dominant_gain + Complex64::new(re, im),
            );
        }
    }
    ChannelRealization { entries, law, seed }
}

/// Steering vector of the subset at angle `theta`: entry `i` is
/// `exp(-j x_i beta cos theta) / sqrt(F)` where `x_i` is the absolute index of
/// the `i`-th retained antenna. The vector has unit Euclidean norm for every
/// subset size.
pub fn steering_vector(
    geometry: &ArrayGeometry,
    theta: f64,
    subset: &AntennaSubset,
) -> Result<Vec<Complex64>, ModelError> {
    if !theta.is_finite() {
        return Err(ModelError::NonFiniteAngle(theta));
    }
    subset.validate_for(geometry.num_antennas)?;
    let beta = geometry.beta();
    let cos_t = theta.cos();
    let scale = 1.0 / (subset.len() as f64).sqrt();
    Ok(subset
        .indices()
        .iter()
        .map(|&x| {
            let phase = -(x as f64) * beta * cos_t;
            Complex64::from_polar(scale, phase)
        })
        .collect())
}

/// Effective gain matrix of the retained antennas: `F x K` with entry
/// `(i, k) = sqrt(l_k) H[x_i][k] exp(-j x_i beta cos theta_k) / sqrt(F)`.
/// Combines steering, the channel draw, and the path-loss amplitude.
pub fn compose_g(
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
) -> Result<CMatrix, ModelError> {
    subset.validate_for(scenario.geometry.num_antennas)?;
    debug_assert_eq!(channel.entries.rows(), scenario.geometry.num_antennas);
    debug_assert_eq!(channel.entries.cols(), scenario.num_users());
    let f = subset.len();
    let k = scenario.num_users();
    let beta = scenario.geometry.beta();
    let scale = 1.0 / (f as f64).sqrt();
    let mut g = CMatrix::zeros(f, k);
    for (i, &x) in subset.indices().iter().enumerate() {
        for (col, user) in scenario.users.iter().enumerate() {
            let phase = -(x as f64) * beta * user.angle.cos();
            let steer = Complex64::from_polar(scale, phase);
            let amp = user.path_loss.sqrt();
            g.set(i, col, amp * channel.entries.at(x, col) * steer);
        }
    }
    Ok(g)
}

/// One noisy snapshot over the subset: `y = G s + n` with i.i.d. complex
/// Gaussian noise of total per-entry variance `noise_psd`.
pub fn synthesize_snapshot(
    scenario: &Scenario,
    channel: &ChannelRealization,
    subset: &AntennaSubset,
    seed: u64,
) -> Result<Vec<Complex64>, ModelError> {
    let g = compose_g(scenario, channel, subset)?;
    let f = subset.len();
    let mut y = vec![Complex64::new(0.0, 0.0); f];
    for (i, sample) in y.iter_mut().enumerate() {
        for (col, user) in scenario.users.iter().enumerate() {
            *sample += g.at(i, col) * user.pilot;
        }
    }
    let part_std = (scenario.noise_psd / 2.0).sqrt();
    let normal = Normal::new(0.0, part_std).expect("positive noise std");
    let mut stream = rng::stream(seed, "snapshot-noise", 0);
    for sample in y.iter_mut() {
        let re: f64 = normal.sample(&mut stream);
        let im: f64 = normal.sample(&mut stream);
        *sample += Complex64::new(re, im);
    }
    Ok(y)
}
