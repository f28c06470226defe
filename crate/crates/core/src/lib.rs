//! Multilayer collaborative low-rank representation (DeepLRR).
//!
//! Each layer decomposes its input `A` as `A = A Z + P A + E` with
//! Frobenius-regularised coefficients `Z`, projection `P` and an l1-sparse
//! error `E`, solved by inexact ALM. The bilinear reconstruction `P A Z` of
//! one layer is fed to the next. Learned coefficients drive spectral
//! clustering; the [`synth`] and [`metrics`] modules provide the benchmark
//! data and evaluation.
//!
//! Matrices are features x samples throughout (`n x N`).

pub mod config;
pub mod error;
pub mod io;
pub mod labels;
pub mod linalg;
pub mod matrix;
pub mod metrics;
pub mod network;
pub mod solver;
pub mod spectral;
pub mod synth;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use io::{read_labels, read_matrix, write_labels, write_matrix, MatrixFormat};
pub use labels::LabelVector;
pub use matrix::{matrix_norms, DataMatrix, Matrix, MatrixNorms};
pub use metrics::{accuracy, evaluate, f_score, nmi, MetricReport};
pub use network::{lambda_schedule, train, Layer, NetworkModel};
pub use solver::{solve_layer, AlmState, LayerParams};
pub use spectral::{build_affinity, kmeans, ncut_cluster, ncut_from_affinity, spectral_embed, Affinity, ClusterResult};
pub use synth::{block_diagonal_score, generate_subspaces, CorruptionSpec, SynthSpec};
