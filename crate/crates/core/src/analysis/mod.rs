//! Descriptive association measures, preprocessing of raw multi-group
//! records, accuracy metrics and parametric bootstrap.

mod association;
mod bootstrap;
mod metrics;
mod preprocess;

pub use association::{co_occurrence, half_weight_index, jaccard};
pub use bootstrap::{bootstrap_from_params, parametric_bootstrap, quantile_sorted, BootstrapConfig, BootstrapResult};
pub use metrics::{graph_density, rmse};
pub use preprocess::{preprocess, Preprocessed, RawEvent, RawRecords};
