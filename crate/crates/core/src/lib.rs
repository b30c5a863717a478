//! Joint relay beamforming and power-splitting optimization for a full-duplex,
//! two-way amplify-and-forward relay that harvests energy from its input
//! (SWIPT).
//!
//! The relay amplification matrix is decomposed as `W = w_t w_r^H`:
//!
//! - [`rx`] parameterizes the receive beamformer `w_r` by a scalar `alpha`
//!   and searches over it,
//! - [`ps`] computes the power-splitting ratio `rho` in closed form,
//! - [`dc`] optimizes the transmit beamformer `w_t` by difference-of-concave
//!   programming inside the null space of the self-interference loop,
//! - [`joint`] alternates the `rho` and `w_t` updates and wraps the `alpha`
//!   search.
//!
//! [`channel`] and [`metrics`] provide the channel model and closed-form
//! link quantities shared by all of the above.

// `!(x > 0.0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod dc;
pub mod error;
pub mod joint;
pub mod metrics;
pub mod ps;
pub mod rx;
pub mod subproblem;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Complex column vector.
pub type CVector = DVector<Complex64>;
/// Complex dense matrix.
pub type CMatrix = DMatrix<Complex64>;

pub use channel::{sample_channels, ChannelRealization, SystemParams};
pub use error::{Constraint, Error, Result};
pub use joint::{solve_fixed_alpha, solve_joint, JointConfig, JointSolution};
pub use metrics::{BeamformingSolution, LinkReport};
pub use rx::AlphaGrid;
