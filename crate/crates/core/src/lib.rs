//! Steady state of the GI/Geo/N discrete-time queue.
//!
//! The customer count X evolves as X_{k+1} = X_k + A_k − D_k with i.i.d.
//! arrivals A_k and D_k ~ Binomial(X_k ∧ N, μ). This crate computes its
//! stationary law exactly ([`markov`]), approximates the scaled count
//! (X − R)/√R by the stationary density of a diffusion ([`diffusion`]),
//! cross-checks both by simulation ([`sim`]) and sweeps load regimes into
//! tables ([`experiments`]).

pub mod config;
pub mod diffusion;
pub mod error;
pub mod experiments;
pub mod markov;
pub mod metrics;
pub mod model;
pub mod pmf;
pub mod sim;

pub use error::{GeoqError, Result};
pub use metrics::{MetricKind, Metrics};
pub use model::{ArrivalKind, ArrivalModel, QueueParams, Regime, RegimeSpec};
