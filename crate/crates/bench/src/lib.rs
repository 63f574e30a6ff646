//! Shared builders for the benchmark targets: deterministic instances and
//! fibers so every iteration measures the same work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use monodromy_core::monodromy::StoppingCriterion;
use monodromy_core::problems::{cyclic_system, power_curve, power_curve_roots};
use monodromy_core::{C64, MonodromyOptions, ProblemInstance};

pub fn power_instance(n: u32) -> ProblemInstance {
    power_curve(n).expect("built-in power curve")
}

pub fn power_fiber(n: u32, t: C64) -> Vec<Vec<C64>> {
    power_curve_roots(n, t).expect("closed-form fiber")
}

pub fn cyclic_instance(n: usize, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cyclic_system(n, &mut rng).expect("built-in cyclic system")
}

/// Collection settings bounded enough for repeated timing.
pub fn collection_options(p: &ProblemInstance, max_loops: usize) -> MonodromyOptions {
    let mut opts = p.monodromy_options();
    opts.stopping = StoppingCriterion {
        max_loops: Some(max_loops),
        target_count: p.known_degree,
        stabilization: Some(10),
    };
    opts
}
