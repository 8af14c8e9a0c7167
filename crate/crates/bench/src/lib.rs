//! Inputs shared by the benchmarks.

use venice_core::BranchedIntervalMap;

/// `n + 1` equally spaced targets on the space of `map`.
pub fn grid_targets(map: &BranchedIntervalMap, n: usize) -> Vec<f64> {
    (0..=n).map(|i| map.to_external(i as f64 / n as f64)).collect()
}
