//! Self-aligned double patterning aware standard-cell placement toolkit.
//!
//! The crate models mandrel/trim mask decomposition for standard cells,
//! precomputes pairwise abutment compatibility tables, and legalizes
//! placements by flipping and spreading cells until every adjacent pair
//! admits a joint decomposition.

pub mod audit;
pub mod coloring;
pub mod dplut;
pub mod format;
pub mod generate;
pub mod geometry;
pub mod legalize;
pub mod library;
pub mod placement;
pub mod profile;
pub mod render;
