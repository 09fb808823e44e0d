//! Criterion benchmarks of the spinon-core kernels; see `benches/`.
