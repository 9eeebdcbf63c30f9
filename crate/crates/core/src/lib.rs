//! Representation Topology Divergence (RTD).
//!
//! RTD compares the multi-scale topology of two point clouds whose rows are
//! in one-to-one correspondence. It is the total length of the bars of the
//! R-Cross-Barcode, the persistence barcode of a Vietoris-Rips filtration on
//! a doubled vertex set whose edge weights interleave both clouds' distance
//! matrices. The crate computes the barcode, differentiates RTD with respect
//! to both clouds and uses it as a loss, both for direct point-cloud
//! optimization and inside a small fully-connected autoencoder.

pub mod datasets;
pub mod error;
pub mod geometry;
pub mod grad;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod persistence;
pub mod rcross;

pub use error::{Result, RtdError};
pub use geometry::{combine_max, combine_min, pairwise_distances, DistanceMatrix, PointCloud};
pub use grad::{rtd_subgradient, smooth_gradients, GradientField, Neighborhood};
pub use metrics::{
    bottleneck_distance, evaluate, linear_correlation, topoae_loss, triplet_accuracy, wasserstein_h0, EvalOptions,
    EvalReport,
};

pub use persistence::{
    build_filtration, compute_barcode, low_degree_barcode, rips_barcode, total_persistence, Bar, Barcode, FilteredSimplex,
    Filtration,
};
pub use rcross::{assemble_cross_matrix, rcross_barcode, rtd, rtd_k, CrossWeightMatrix, Variant};
