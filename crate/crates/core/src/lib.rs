//! Implicit online mirror descent.
//!
//! This crate implements online learners whose update minimizes the actual
//! loss plus a Bregman proximity term (the *implicit* or proximal update),
//! together with the instrumentation needed to check their regret
//! guarantees on concrete runs:
//!
//! - [`losses`]: hinge, absolute, square, 1-D quadratic and linear losses,
//!   subgradients and the pairwise temporal-variability term.
//! - [`geometry`]: Euclidean mirror map, Bregman divergence, balls.
//! - [`prox`]: closed-form implicit updates, including the ball-constrained
//!   case via a one-dimensional search on the constraint multiplier.
//! - [`learners`]: OGD, AdaOGD, implicit OMD (decaying and constant rate),
//!   AdaImplicit and implicit OMD with a doubling trick.
//! - [`metrics`]: regret, temporal variability and bound certificates.
//! - [`data`]: LIBSVM ingestion, preprocessing and sequence generators.

pub mod data;
pub mod error;
pub mod geometry;
pub mod learners;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod prox;

pub use data::{Dataset, SparseRow, Task};
pub use error::{Error, Result};
pub use geometry::{Domain, MirrorMap, MirrorSetup};
pub use learners::{Algorithm, Learner, LearnerConfig, LearnerState, StepRecord, Trace};
pub use losses::Loss;
pub use metrics::{BoundCertificate, CertificateStatus};
pub use prox::ProxResult;
