//! Hybrid joint diagonalization (HJD) of complex matrix sets.
//!
//! Given two sets of n×n complex matrices, one diagonalized by Hermitian
//! congruence (M ↦ VᴴMV) and one by transpose congruence (N ↦ VᴴNV*),
//! this crate provides Jacobi-like solvers built from Givens and
//! hyperbolic rotations:
//!
//! * [`orthogonal::co_hjd`] — complex Givens rotations, unitary diagonalizer
//! * [`orthogonal::ro_hjd`] — Takagi-based transform followed by real Givens rotations
//! * [`aro::aro_hjd`] — paired real Givens rotations on augmented 2n×2n real statistics
//! * [`hcjdi::h_cjdi`] — combined Givens + hyperbolic rotations for non-unitary mixing
//!
//! plus problem generators ([`scenarios`]), quality metrics ([`metrics`]),
//! brute-force reference oracles ([`oracles`]) and a Monte Carlo experiment
//! harness ([`experiment`]) driving the `hjd` binary.

pub mod aro;
pub mod experiment;
pub mod hcjdi;
pub mod kernels;
pub mod metrics;
pub mod oracles;
pub mod orthogonal;
pub mod rotations;
pub mod scenarios;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HjdError {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("matrix not symmetric within tolerance")]
    NotSymmetric,
    #[error("degenerate pencil: no usable generalized eigenvector")]
    DegeneratePencil,
    #[error("rank-deficient input (smallest/largest singular value = {0:.3e})")]
    RankDeficient(f64),
    #[error("diagonalizer diverged (||V||_F = {0:.3e})")]
    Diverged(f64),
    #[error("performance index undefined: zero row or column")]
    UndefinedPi,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariance rank {found} below requested {wanted} sources")]
    CovarianceRank { found: usize, wanted: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("config parse error: {0}")]
    TomlParse(#[from] toml::de::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HjdError>;

/// Centralized numeric tolerances.
pub mod tol {
    /// Eigenvector / pencil residual bound relative to ‖Q‖_F.
    pub const EIG_RESIDUAL: f64 = 1e-9;
    /// Eigenvalue tie detection (relative).
    pub const EIG_TIE: f64 = 1e-12;
    /// Takagi reconstruction bound relative to ‖T‖_F.
    pub const TAKAGI_RECON: f64 = 1e-8;
    /// Unitarity bound ‖UᴴU − I‖_F for small kernels.
    pub const UNITARITY: f64 = 1e-10;
    /// Symmetry precondition for Takagi input, relative to ‖T‖_F.
    pub const TAKAGI_SYM: f64 = 1e-8;
    /// Imaginary-part test for "real" pencil eigenvalues: |Im λ| ≤ EIG_IMAG·(1+|λ|).
    pub const PENCIL_IMAG: f64 = 1e-9;
    /// Negativity slack for "non-negative" pencil eigenvalues.
    pub const PENCIL_NEG: f64 = -1e-12;
    /// Hyperbolic norm floor: wᵀJw below this is degenerate.
    pub const PENCIL_JNORM: f64 = 1e-12;
    /// Relative rank threshold (smallest/largest singular value).
    pub const RANK: f64 = 1e-10;
    /// Default sweep-convergence threshold on rotation magnitude.
    pub const SWEEP_TAU: f64 = 1e-8;
    /// Hyperbolic parameter clamp: |y| ≤ Y_CLAMP per rotation.
    pub const Y_CLAMP: f64 = 5.0;
    /// Divergence guard on ‖V‖_F for non-orthogonal sweeps.
    pub const V_DIVERGENCE: f64 = 1e8;
    /// Ingestion symmetry requirement for transpose-congruence targets.
    pub const N_SYMMETRY: f64 = 1e-8;
    /// Eigen-thresholding for whitening, relative to the largest eigenvalue.
    pub const WHITEN_EIG: f64 = 1e-10;
}
