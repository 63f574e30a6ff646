//! Monodromy loops in the parameter line: random loop construction, tracking
//! a fiber around a loop, permutation extraction, and the two collection
//! drivers (full fiber, and one representative per symmetry class).

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{C64, CurveSystem};
use crate::error::{Error, Result};
use crate::tracking::{newton_refine, track_segment, FailureReason, TrackerConfig};
use crate::witness::{
    classify_endpoint, points_equal, AlphaFactor, AlphaMap, BetaFactor, EndpointAction,
    PointRegistry, WitnessSet,
};

const ENDPOINT_REFINE_ITERS: usize = 20;

/// Closed path in the parameter line, tracked linearly between consecutive
/// waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopSpec {
    waypoints: Vec<C64>,
}

impl LoopSpec {
    /// Waypoints must start and end at the same parameter value and no two
    /// consecutive waypoints may coincide.
    pub fn new(waypoints: Vec<C64>) -> Result<Self> {
        if waypoints.len() < 3 {
            return Err(Error::InvalidInput(
                "a loop needs at least three waypoints".into(),
            ));
        }
        let first = waypoints[0];
        let last = *waypoints.last().unwrap();
        if (first - last).norm() > 1e-9 * f64::max(1.0, first.norm()) {
            return Err(Error::InvalidInput(
                "loop waypoints must close up at the base point".into(),
            ));
        }
        for pair in waypoints.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::InvalidInput(
                    "consecutive loop waypoints coincide".into(),
                ));
            }
        }
        Ok(Self { waypoints })
    }

    pub fn base(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn waypoints(&self) -> &[C64] {
        &self.waypoints
    }

    /// Consecutive waypoint pairs, in tracking order.
    pub fn segments(&self) -> impl Iterator<Item = (C64, C64)> + '_ {
        self.waypoints.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Random triangle through `base`: two more vertices drawn uniformly from the
/// disk of radius `radius` around `base`, resampled until all three corners
/// are pairwise separated by at least a thousandth of the radius.
pub fn random_loop<R: Rng + ?Sized>(base: C64, radius: f64, rng: &mut R) -> Result<LoopSpec> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "loop radius must be positive and finite, got {radius}"
        )));
    }
    let min_sep = 1e-3 * radius;
    let sample = |rng: &mut R| {
        let r = radius * rng.gen::<f64>().sqrt();
        let theta = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
        base + C64::from_polar(r, theta)
    };
    loop {
        let a = sample(rng);
        let b = sample(rng);
        if (a - base).norm() >= min_sep
            && (b - base).norm() >= min_sep
            && (a - b).norm() >= min_sep
        {
            return LoopSpec::new(vec![base, a, b, base]);
        }
    }
}

/// When to stop looping. Conditions compose with OR: the run ends as soon as
/// any enabled condition is met. `target_count` watches the number of points
/// (full collection) or class representatives (decomposable collection);
/// `stabilization` is a count of consecutive loops without growth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingCriterion {
    pub max_loops: Option<usize>,
    pub target_count: Option<usize>,
    pub stabilization: Option<usize>,
}

impl Default for StoppingCriterion {
    fn default() -> Self {
        Self {
            max_loops: Some(200),
            target_count: None,
            stabilization: Some(10),
        }
    }
}

impl StoppingCriterion {
    pub fn validate(&self) -> Result<()> {
        if self.max_loops.is_none() && self.target_count.is_none() && self.stabilization.is_none()
        {
            return Err(Error::InvalidConfig(
                "at least one stopping condition must be set".into(),
            ));
        }
        for (name, v) in [
            ("max_loops", self.max_loops),
            ("target_count", self.target_count),
            ("stabilization", self.stabilization),
        ] {
            if v == Some(0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn should_stop(&self, loops_taken: usize, count: usize, no_growth_streak: usize) -> bool {
        if let Some(m) = self.max_loops {
            if loops_taken >= m {
                return true;
            }
        }
        if let Some(t) = self.target_count {
            if count >= t {
                return true;
            }
        }
        if let Some(s) = self.stabilization {
            if no_growth_streak >= s {
                return true;
            }
        }
        false
    }
}

/// Endpoint admission filter applied after refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PointFilter {
    /// Keep every refined endpoint.
    All,
    /// Discard points whose coordinate product has modulus below
    /// `min_product`: paths that drifted onto a coordinate hyperplane.
    Torus { min_product: f64 },
}

impl PointFilter {
    pub fn admits(&self, p: &[C64]) -> bool {
        match self {
            PointFilter::All => true,
            PointFilter::Torus { min_product } => {
                let prod: f64 = p.iter().map(|z| z.norm()).product();
                prod >= *min_product
            }
        }
    }
}

/// Knobs shared by the collection drivers.
#[derive(Debug, Clone)]
pub struct MonodromyOptions {
    pub tracker: TrackerConfig,
    /// Coordinatewise tolerance deciding when two fiber points are equal.
    pub point_eps: f64,
    /// Residual bound endpoints are refined to before comparison.
    pub refine_tol: f64,
    /// Radius of the disk random loop vertices are drawn from.
    pub loop_radius: f64,
    pub filter: PointFilter,
    pub stopping: StoppingCriterion,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self {
            tracker: TrackerConfig::default(),
            point_eps: 1e-6,
            refine_tol: 1e-9,
            loop_radius: 1.0,
            filter: PointFilter::All,
            stopping: StoppingCriterion::default(),
        }
    }
}

impl MonodromyOptions {
    /// Defaults with the loop radius matched to the base point's magnitude.
    pub fn for_base(base: C64) -> Self {
        Self {
            loop_radius: f64::max(1.0, base.norm()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tracker.validate()?;
        self.stopping.validate()?;
        if !(self.point_eps > 0.0) || !(self.refine_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.loop_radius > 0.0) || !self.loop_radius.is_finite() {
            return Err(Error::InvalidConfig("loop radius must be positive".into()));
        }
        Ok(())
    }
}

/// Where one tracked point ended up after a loop.
#[derive(Debug, Clone, PartialEq)]
pub enum EndpointStatus {
    /// Refined back into the fiber over the base point.
    Point(Vec<C64>),
    /// Tracking aborted mid-loop.
    TrackingFailed(FailureReason),
    /// Tracking finished but the endpoint would not refine at the base.
    RefineFailed,
    /// Refined fine but rejected by the admission filter.
    Filtered,
}

impl EndpointStatus {
    pub fn point(&self) -> Option<&[C64]> {
        match self {
            EndpointStatus::Point(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(
            self,
            EndpointStatus::TrackingFailed(_) | EndpointStatus::RefineFailed
        )
    }
}

/// Per-loop bookkeeping.
#[derive(Debug, Clone)]
pub struct LoopResult {
    /// One entry per start point, in input order.
    pub endpoints: Vec<EndpointStatus>,
    pub paths_tracked: usize,
    pub failures: usize,
}

/// Carry every point of `points` around `spec` and refine the survivors back
/// into the fiber over the loop's base. Paths run in parallel; each path
/// tracks the loop's segments in order.
pub fn monodromy_loop(
    curve: &CurveSystem,
    points: &[Vec<C64>],
    spec: &LoopSpec,
    opts: &MonodromyOptions,
) -> Result<LoopResult> {
    opts.validate()?;
    for p in points {
        if p.len() != curve.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: curve.n_vars(),
                got: p.len(),
            });
        }
    }
    let base = spec.base();
    let endpoints: Vec<EndpointStatus> = points
        .par_iter()
        .map(|start| {
            let mut x = start.clone();
            for (t_a, t_b) in spec.segments() {
                let res = track_segment(curve, &x, t_a, t_b, &opts.tracker);
                match res.endpoint() {
                    Some(e) => x = e.to_vec(),
                    None => {
                        return EndpointStatus::TrackingFailed(res.failure_reason().unwrap());
                    }
                }
            }
            match newton_refine(curve, &x, base, opts.refine_tol, ENDPOINT_REFINE_ITERS) {
                Ok(refined) => {
                    if opts.filter.admits(&refined) {
                        EndpointStatus::Point(refined)
                    } else {
                        EndpointStatus::Filtered
                    }
                }
                Err(_) => EndpointStatus::RefineFailed,
            }
        })
        .collect();
    let failures = endpoints.iter().filter(|e| e.is_failure()).count();
    Ok(LoopResult {
        paths_tracked: points.len(),
        failures,
        endpoints,
    })
}

/// Bijection on fiber indices induced by one loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &i in &map {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput(
                    "index map is not a bijection".into(),
                ));
            }
            seen[i] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Apply `self`, then `other`.
    pub fn then(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Permutation {
            map: self.map.iter().map(|&i| other.map[i]).collect(),
        })
    }

    /// Cycles of the permutation, each cycle sorted by its smallest element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut orbit = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                orbit.push(i);
                i = self.map[i];
            }
            orbits.push(orbit);
        }
        orbits
    }
}

/// Match loop endpoints back to the start points: `Some` only when every
/// endpoint refined and landed on a distinct start point.
fn match_endpoints(
    starts: &[Vec<C64>],
    endpoints: &[EndpointStatus],
    eps: f64,
) -> Option<Permutation> {
    let mut map = Vec::with_capacity(starts.len());
    for e in endpoints {
        let p = e.point()?;
        let idx = starts.iter().position(|s| points_equal(s, p, eps))?;
        map.push(idx);
    }
    Permutation::new(map).ok()
}

/// Track the witness points around one loop and read off the induced
/// permutation; `None` when a path failed, was filtered, left the known
/// fiber, or the matching was not a bijection.
pub fn loop_permutation(
    w: &WitnessSet,
    spec: &LoopSpec,
    opts: &MonodromyOptions,
) -> Result<Option<Permutation>> {
    let result = monodromy_loop(w.curve(), w.points(), spec, opts)?;
    Ok(match_endpoints(w.points(), &result.endpoints, opts.point_eps))
}

/// Run `n_loops` random loops on a fixed witness set and keep the loops that
/// induce genuine permutations.
pub fn collect_generators<R: Rng + ?Sized>(
    w: &WitnessSet,
    n_loops: usize,
    opts: &MonodromyOptions,
    rng: &mut R,
) -> Result<Vec<Permutation>> {
    opts.validate()?;
    let mut generators = Vec::new();
    for _ in 0..n_loops {
        let spec = random_loop(w.base(), opts.loop_radius, rng)?;
        if let Some(p) = loop_permutation(w, &spec, opts)? {
            generators.push(p);
        }
    }
    Ok(generators)
}

/// Counters for one collection run. The drivers fill everything except
/// `problem` and `seed`, which identify the run and are set by the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub problem: String,
    pub mode: String,
    pub seed: u64,
    pub loops_taken: usize,
    pub paths_tracked: usize,
    pub path_failures: usize,
    pub points_found: usize,
    pub classes_found: usize,
    pub wall_ms: f64,
}

impl RunStats {
    fn new(mode: &str) -> Self {
        Self {
            problem: String::new(),
            mode: mode.into(),
            seed: 0,
            loops_taken: 0,
            paths_tracked: 0,
            path_failures: 0,
            points_found: 0,
            classes_found: 0,
            wall_ms: 0.0,
        }
    }

    pub fn csv_header() -> &'static str {
        "problem,mode,seed,loops_taken,paths_tracked,path_failures,points_found,classes_found,wall_ms"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.3}",
            self.problem,
            self.mode,
            self.seed,
            self.loops_taken,
            self.paths_tracked,
            self.path_failures,
            self.points_found,
            self.classes_found,
            self.wall_ms
        )
    }
}

fn refine_seeds(
    curve: &CurveSystem,
    seeds: &[Vec<C64>],
    base: C64,
    opts: &MonodromyOptions,
) -> Result<Vec<Vec<C64>>> {
    seeds
        .iter()
        .map(|s| newton_refine(curve, s, base, opts.refine_tol, ENDPOINT_REFINE_ITERS))
        .collect()
}

/// Grow a witness set by looping: every admitted endpoint joins the fiber,
/// and the loop stream stops per `opts.stopping`. Returns the witness set
/// over `base` together with run counters.
pub fn standard_monodromy<R: Rng + ?Sized>(
    curve: &CurveSystem,
    base: C64,
    seeds: &[Vec<C64>],
    opts: &MonodromyOptions,
    rng: &mut R,
) -> Result<(WitnessSet, RunStats)> {
    opts.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidInput(
            "collection needs at least one seed point".into(),
        ));
    }
    let start = Instant::now();
    let mut stats = RunStats::new("standard");

    let mut registry = PointRegistry::new(curve.n_vars(), opts.point_eps, rng);
    for s in refine_seeds(curve, seeds, base, opts)? {
        registry.insert(s)?;
    }

    let mut no_growth = 0usize;
    while !opts
        .stopping
        .should_stop(stats.loops_taken, registry.len(), no_growth)
    {
        let spec = random_loop(base, opts.loop_radius, rng)?;
        let snapshot = registry.points().to_vec();
        let result = monodromy_loop(curve, &snapshot, &spec, opts)?;
        stats.loops_taken += 1;
        stats.paths_tracked += result.paths_tracked;
        stats.path_failures += result.failures;

        let before = registry.len();
        for e in &result.endpoints {
            if let Some(p) = e.point() {
                registry.insert(p.to_vec())?;
            }
        }
        if registry.len() == before {
            no_growth += 1;
        } else {
            no_growth = 0;
        }
    }

    let points = registry.points().to_vec();
    stats.points_found = points.len();
    stats.classes_found = points.len();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let w = WitnessSet::new(
        curve.clone(),
        base,
        points,
        10.0 * opts.refine_tol,
        opts.point_eps,
    )?;
    Ok((w, stats))
}

fn contains_point(set: &[Vec<C64>], p: &[C64], eps: f64) -> bool {
    set.iter().any(|q| points_equal(q, p, eps))
}

/// Collection restricted by an intermediate map: the alpha factor gathers
/// points over one image, the beta factor keeps one representative per
/// image. Tracks the deduplicated union of both factors each loop and
/// classifies endpoints with the collection rule. A factor seeded empty
/// stays empty; `target_count` watches the beta factor.
pub fn decomposable_monodromy<R: Rng + ?Sized>(
    curve: &CurveSystem,
    base: C64,
    seed_a: &[Vec<C64>],
    seed_b: &[Vec<C64>],
    alpha: &AlphaMap,
    opts: &MonodromyOptions,
    rng: &mut R,
) -> Result<(AlphaFactor, BetaFactor, RunStats)> {
    opts.validate()?;
    if alpha.arity() != curve.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: curve.n_vars(),
            got: alpha.arity(),
        });
    }
    if seed_a.is_empty() && seed_b.is_empty() {
        return Err(Error::InvalidInput(
            "collection needs at least one seed point".into(),
        ));
    }
    let start = Instant::now();
    let mut stats = RunStats::new("decomposable");

    let a = AlphaFactor::new(refine_seeds(curve, seed_a, base, opts)?);
    let b = BetaFactor::new(refine_seeds(curve, seed_b, base, opts)?);
    a.verify(alpha, opts.point_eps)?;
    b.verify(alpha, opts.point_eps)?;
    let (mut a, mut b) = (a, b);
    let a_rep = a.points.first().cloned();

    let mut no_growth = 0usize;
    loop {
        let held = a.points.len() + b.points.len();
        if opts
            .stopping
            .should_stop(stats.loops_taken, b.points.len(), no_growth)
        {
            break;
        }

        let mut tracked: Vec<Vec<C64>> = Vec::new();
        for p in a.points.iter().chain(b.points.iter()) {
            if !contains_point(&tracked, p, opts.point_eps) {
                tracked.push(p.clone());
            }
        }

        let spec = random_loop(base, opts.loop_radius, rng)?;
        let result = monodromy_loop(curve, &tracked, &spec, opts)?;
        stats.loops_taken += 1;
        stats.paths_tracked += result.paths_tracked;
        stats.path_failures += result.failures;

        for e in &result.endpoints {
            let Some(p) = e.point() else { continue };
            let action =
                classify_endpoint(p, &a, &b, a_rep.as_deref(), alpha, opts.point_eps)?;
            match action {
                EndpointAction::AppendToA => a.points.push(p.to_vec()),
                EndpointAction::AppendToB => b.points.push(p.to_vec()),
                EndpointAction::AppendToBoth => {
                    a.points.push(p.to_vec());
                    b.points.push(p.to_vec());
                }
                EndpointAction::Discard => {}
            }
        }

        if a.points.len() + b.points.len() == held {
            no_growth += 1;
        } else {
            no_growth = 0;
        }
    }

    let mut distinct: Vec<Vec<C64>> = Vec::new();
    for p in a.points.iter().chain(b.points.iter()) {
        if !contains_point(&distinct, p, opts.point_eps) {
            distinct.push(p.clone());
        }
    }
    stats.points_found = distinct.len();
    stats.classes_found = b.points.len();
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((a, b, stats))
}
