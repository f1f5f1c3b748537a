//! Simulation and maximum-likelihood fitting of the temporal-dependent hub
//! model for grouped observations.
//!
//! Each observed group is gathered by one latent leader. Leaders follow a
//! Markov chain with a persistence bonus `α`; when the new leader was part
//! of the previous group, previous members stay with log-odds shifted by
//! `β` and previous outsiders join with log-odds shifted by `γ`. Fitting is
//! by EM with an exact O(T n²) forward-backward E-step.
//!
//! ```
//! use hubnet::inference::{fit_em, FitConfig};
//! use hubnet::simulate::{replicate_rng, sample_parameters, simulate_trajectory, SimConfig};
//!
//! let mut cfg = SimConfig::new(6, 150);
//! cfg.alpha = 1.5;
//! cfg.beta = 2.0;
//! cfg.gamma = -1.0;
//! let mut rng = replicate_rng(7, 0);
//! let truth = sample_parameters(&cfg, &mut rng).unwrap();
//! let (_, groups) = simulate_trajectory(&truth, cfg.n_groups, &mut rng).unwrap();
//! let fit = fit_em(&groups, &FitConfig::default()).unwrap();
//! assert!(fit.log_marginal() >= fit.loglik_trace[0]);
//! ```

pub mod analysis;
pub mod error;
pub mod inference;
pub(crate) mod math;
pub mod model;
pub mod simulate;

pub use error::{Error, Result};
