//! Spectral toolkit for anisotropic Besov-type norms on periodic lattices.
//!
//! The crate samples functions on a cubic lattice, splits them into dyadic frequency bands,
//! restricts them to graph leaves transversal to an unstable cone and evaluates the resulting
//! leafwise and anisotropic norms. The [`lab`] module turns these into resolution sweeps.

pub mod aniso;
pub mod error;
mod fft;
pub mod grid_spectral;
pub mod lab;
pub mod leaves;
pub mod norms;
pub mod paraproduct;

pub use aniso::{aniso_norm, aniso_tables, leafwise_besov_norm, AnisoNormReport, AnisoTables};
pub use error::{Error, Result};
pub use grid_spectral::{
    apply_multiplier, chi, dft_forward, dft_inverse, lp_block, lp_blocks, lp_partial_sum, make_dyadic_window, make_grid,
    psi, psi_support, GridFunction, GridSpec, LatticeSymbol, RawSpectrum, SampledSymbol, SpectralWindow, SpectrumFunction,
    CHI_EDGE, MIN_BANDS,
};
pub use leaves::{
    chart_spec, leaf_besov, leaf_weights, make_cone, make_graph_leaf, restrict_to_leaf, sample_leaf_family,
    AdmissibleLeaf, FamilyMember, LeafBounds, LeafFamily, LeafFamilyConfig, LeafFunction, LeafKind, LeafShape,
    LeafStack, UnstableCone, CONE_MARGIN,
};
pub use norms::{
    besov_norm, band_norms, conjugate, lp_norm, nikolskij_ratio, partition_sum, sobolev_norm, BesovReport, NormParams,
    BAND_LIMIT_TOL,
};
pub use paraproduct::{
    calibrate_separation, convolve, coordinate_variation, envelope, first_coordinate_profile, kernel_decay,
    leafwise_young_check, paraproduct_split, product_inequality_ratio, single_coordinate_deviation, support_check,
    wave_packet_kernel, KernelDecay, KernelProbe, ParaproductTerms, ProductProbe, SupportFact, KERNEL_FLOOR,
    KERNEL_ZERO,
};
