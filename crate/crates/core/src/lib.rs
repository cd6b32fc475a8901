//! Kernel measures of marginal and conditional dependence between scalar
//! samples.
//!
//! * [`measures::hsic`] is the Hilbert-Schmidt independence criterion,
//!   `trace(P K P Q) / (L - 1)^2`.
//! * [`measures::chsic`] is its conditional counterpart: the same quantity
//!   estimated as an incomplete U-statistic over sample pairs, where only the
//!   `K` pairs with the smallest confounder differences `|z(l) - z(l')|` are
//!   kept. Each entry of the pair-level Gram matrices involves four samples.
//!   No matrix inversion is involved and the cost is `O(L^2)` for `K = O(L)`.
//!
//! [`feature_map`] contains the finite-dimensional steering-vector feature map
//! whose sample covariances converge to both measures; it is a numerical
//! oracle, not a production path. [`synth`] and [`harness`] generate the two
//! synthetic confounder models and run seeded Monte-Carlo sweeps over them.
//!
//! With the default `parallel` feature the inner loops run on rayon. Results
//! are bit-identical with the feature disabled.

pub mod error;
pub mod feature_map;
pub mod harness;
pub mod kernels;
pub mod measures;
pub mod pairs;
mod par;
pub mod seed;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
pub use kernels::{GramMatrix, KernelSpec};
pub use measures::{chsic, chsic_naive, hsic, MeasureKind, MeasureResult};
pub use pairs::{PairSelection, SelectionMode};
pub use synth::{Dataset, Model, ModelConfig};
