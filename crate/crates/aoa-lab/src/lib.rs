//! Angle-of-arrival estimation lab for uniform linear arrays under a diffuse
//! multipath channel.
//!
//! The crate models a base station that localizes `K` single-antenna users
//! with a subset of its `M` antennas. It provides:
//!
//! - the array/channel model and seeded snapshot synthesis ([`array_model`]);
//! - the exact Fisher information for one channel realization and the
//!   deterministic large-array error bound ([`fisher`]);
//! - antenna-subset selection, including an exhaustive oracle
//!   ([`selection`]);
//! - pilot energy accounting and the localization-efficiency objective with
//!   an antenna-count optimizer ([`energy`]);
//! - subspace (spectral) and grid-search maximum-likelihood estimators built
//!   on a dependency-free Hermitian eigensolver ([`estimators`]);
//! - reproducible Monte Carlo experiment drivers ([`montecarlo`]) with CSV
//!   ([`table`]) and SVG ([`plot`]) output, configured through [`config`]
//!   and exposed by the `aoa-lab` binary ([`cli`]).
//!
//! Every random quantity is drawn from a counter-addressed stream keyed by
//! `(master seed, purpose string, index)`, so results are bit-identical
//! across runs and thread counts.
//!
//! ```
//! use aoa_lab::array_model::{ArrayGeometry, Scenario, UserTerminal};
//! use aoa_lab::fisher::{deterministic_crlb, SubsetSpec};
//! use num_complex::Complex64;
//!
//! let geometry = ArrayGeometry::new(64, 0.5).unwrap();
//! let user = UserTerminal {
//!     angle: std::f64::consts::FRAC_PI_3,
//!     pilot: Complex64::new(1e-9, 0.0),
//!     path_loss: 1.0,
//!     dominant_gain: Complex64::new(0.0, 0.0),
//! };
//! let sc = Scenario::new(geometry, vec![user], 1e-20, 0.5).unwrap();
//! let furthest = deterministic_crlb(&sc, &SubsetSpec::Furthest(8)).unwrap();
//! let first = deterministic_crlb(&sc, &SubsetSpec::First(8)).unwrap();
//! assert!(furthest.trace < first.trace);
//! ```
//!
//! Command line: `aoa-lab <experiment> [-c config] [--set key=value]...
//! [--seed N] [--threads N] [-o out.csv] [--plot]`, with experiments
//! `crlb-convergence`, `ml-variance`, `le-sweep`, `music-le`,
//! `lemma-diagnostics`, and `subset-oracle`.

pub mod array_model;
pub mod cli;
pub mod config;
pub mod energy;
pub mod estimators;
pub mod fisher;
pub mod linalg;
pub mod montecarlo;
pub mod plot;
pub mod rng;
pub mod selection;
pub mod table;
