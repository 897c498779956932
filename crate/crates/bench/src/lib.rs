//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use hypersieve::{GridSpec, HyperbolicGrid};

/// A moderate grid that keeps each benchmark iteration short.
pub fn bench_grid() -> Arc<HyperbolicGrid> {
    hypersieve::hyperbolic::make_grid(GridSpec::new(-16.0, 16.0, 512, 1.0 / 32.0, 32.0, 128)).expect("valid grid")
}
