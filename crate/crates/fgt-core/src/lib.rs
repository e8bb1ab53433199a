//! Operator learning with function graph transformers at desk scale.
//!
//! Functions are carried as empirical graph measures (weighted atom clouds in
//! `R^{d+n}`), transformer layers act on those measures by graph-preserving
//! push-forwards, and the surrounding toolkit supplies everything needed to
//! train and probe such models: exact Wasserstein-1 distances, mollifier
//! encoders and decoders, a Dirichlet sine-basis spectral regularizer,
//! product-measure cross-attention, a minimal reverse-mode tape, a fixed
//! random Fourier teacher operator, and a training/evaluation harness.

pub mod attention;
pub mod diff;
pub mod encode;
pub mod error;
pub mod measure;
pub mod product;
pub mod spectral;
pub mod teacher;
pub mod training;
pub mod transport;

pub use error::{Error, Result};
pub use measure::{Atom, DiscreteMeasure, Factor, Point, TransportPlan};
