//! Gaussian blurring mean shift on the Poincaré ball.
//!
//! HypeGBMS embeds data in the Poincaré ball of curvature `c < 0`, then
//! repeatedly replaces every point by a Möbius weighted mean of all points
//! under Gaussian weights on hyperbolic distance. Clusters collapse toward
//! modes of the hyperbolic kernel density; connected components of the
//! final `d <= delta` graph are the clusters. The Euclidean GBMS baseline
//! runs the same loop with ordinary means.
//!
//! ```
//! use hypegbms::clustering::{run_hypegbms, RunConfig};
//! use hypegbms::data::{make_hierarchical, HierarchySpec};
//! use hypegbms::geometry::Curvature;
//! use hypegbms::metrics::ari;
//!
//! let ds = make_hierarchical(&HierarchySpec { points_per_leaf: 20, ..Default::default() })?;
//! let cfg = RunConfig::new(0.2).with_curvature(Curvature::new(-1.0)?);
//! let result = run_hypegbms(&ds.features, &cfg)?;
//! assert_eq!(result.num_clusters, 4);
//! assert_eq!(ari(&result.labels, ds.labels.as_ref().unwrap())?, 1.0);
//! # Ok::<(), hypegbms::Error>(())
//! ```
//!
//! Modules:
//!
//! - [`geometry`]: Möbius operations, distances, exp/log maps, weighted means.
//! - [`kernel`]: Gaussian weight matrices, kernel density and its gradient.
//! - [`clustering`]: the iteration loops, stopping rules, cluster extraction.
//! - [`metrics`]: ARI and NMI.
//! - [`data`]: CSV I/O, preprocessing, synthetic hierarchies.
//! - [`validate`]: numerical self-checks backing `hypegbms validate`.

pub mod clustering;
pub mod data;
mod error;
pub mod geometry;
pub mod kernel;
pub mod metrics;
pub mod validate;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/poincare-ball.md")]
    mod poincare_ball {}
    #[doc = include_str!("../../../book/src/means.md")]
    mod means {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/algorithm.md")]
    mod algorithm {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}
