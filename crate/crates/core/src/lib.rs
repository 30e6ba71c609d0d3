//! Reconstruction of finite metric spaces from truncated spectral triples.
//!
//! The pipeline: build a truncated triple ([`geometries`]), generate
//! localized vector states ([`localization`], [`pointforge`]), measure the
//! Connes distance between them by semidefinite programming ([`connes`]),
//! and embed the resulting metric graph in Euclidean space ([`mds_embed`]).

pub mod analysis;
pub mod connes;
pub mod error;
pub mod geometries;
pub mod linalg;
pub mod localization;
pub mod mds_embed;
pub mod pointforge;
pub mod registry;
pub mod triple_model;
pub mod wigner;

pub use error::{Error, Result};
pub use triple_model::{
    state_expectation, DistanceMatrix, HermitianMatrix, Manifold, MetricGraph, TruncatedTriple, VectorState,
};
