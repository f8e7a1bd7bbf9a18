//! Computational laboratory for the geometry of pseudocharacters on
//! finitely presented groups.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`group`]: words, generating sets, word-problem oracles (free, free
//!   abelian, finite, `PSL(2,Z)`), triangular presentations and Cayley balls;
//! * [`pseudochar`]: quasicharacter evaluation, homogenization, defect and
//!   `epsilon` estimation, and the scaling normalization that makes level
//!   sets transverse to half-integers;
//! * [`slab`]: cutting a Cayley 2-complex along `f^{-1}(Z + 1/2)` into
//!   vertex spaces and tracks, assembled into a finite-radius slab tree with
//!   its level map;
//! * [`ends`]: finite-radius certificates about the ends of a group
//!   relative to a pseudocharacter: sign, uniform/unipotent/bushy
//!   classification, separated triples and ping-pong pairs;
//! * [`metric`] / [`bottleneck`]: exact bottleneck constants of finite
//!   metric graphs;
//! * [`treeapprox`]: the constructive bottleneck-to-tree approximation with
//!   its measured quasi-isometry window;
//! * [`xgraph`]: the quasi-tree `X` built from group translates of tracks,
//!   with coboundedness, separation and Gromov-product diagnostics, plus the
//!   quasi-action-to-action conversion graph;
//! * [`farey`]: the Farey graph, its `PSL(2,Z)` action and bottleneck
//!   stability;
//! * [`config`] / [`export`]: experiment configuration and JSON/DOT/CSV
//!   artifacts.

pub mod bottleneck;
pub mod config;
pub mod ends;
pub mod export;
pub mod farey;
pub mod group;
pub mod metric;
pub mod pseudochar;
pub mod rat;
pub mod slab;
pub mod treeapprox;
pub mod xgraph;

mod error;

pub use error::Error;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Configure the global worker pool used by parallel sweeps. Call once,
/// before any parallel computation; later calls are ignored.
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
