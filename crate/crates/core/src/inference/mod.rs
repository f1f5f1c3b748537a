//! EM fitting: exact forward-backward E-step, coordinate-ascent M-step,
//! initialization and leader decoding.

mod decode;
mod em;
mod forward_backward;
mod mstep;
mod stats;

pub use decode::{decode_leaders, segments_for, Decoded, Segment};
pub use em::{fit_em, fit_em_from, initialize, FitConfig, FitResult};
pub use forward_backward::{forward_backward, forward_backward_with, FbOptions, Posteriors};
pub use mstep::m_step;
pub use stats::{q_derivatives, q_value, sufficient_stats, Param, SufficientStats};
