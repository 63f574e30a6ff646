//! Solution report emitted by `solve`: the collected points, their classes
//! under the intermediate map, and the run's counters.

use serde::{Deserialize, Serialize};

use monodromy_core::{C64, RunStats};

pub type ComplexPair = [f64; 2];

pub fn pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

pub fn pair_vec(zs: &[C64]) -> Vec<ComplexPair> {
    zs.iter().copied().map(pair).collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LineReport {
    pub base: Vec<ComplexPair>,
    pub direction: Vec<ComplexPair>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SolutionReport {
    pub problem: String,
    pub mode: String,
    /// The parameter line u(t) = base + t * direction.
    pub line: LineReport,
    /// Fiber location on the line.
    pub base_t: ComplexPair,
    /// Collected witness points, one coordinate array each.
    pub points: Vec<Vec<ComplexPair>>,
    /// Partition of point indices by intermediate-map image; absent when
    /// the problem has no map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<Vec<usize>>>,
    /// Factor degrees (a, b) with a * b = degree, reported once the
    /// collection is complete enough to certify them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_degrees: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub known_classes: Option<usize>,
    /// Whether the collection reached the known count; absent when no count
    /// is known. An incomplete run still exits successfully.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complete: Option<bool>,
    pub stats: RunStats,
}
