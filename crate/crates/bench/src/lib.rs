//! Placeholder library; the crate only carries the `engines` benchmark.
