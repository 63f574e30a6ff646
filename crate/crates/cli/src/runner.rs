//! Drives one collection run and assembles the report.

use anyhow::{bail, Context, Result};
use rand_chacha::ChaCha8Rng;

use monodromy_core::monodromy::{decomposable_monodromy, standard_monodromy};
use monodromy_core::witness::{decomposition_degrees, partition_by_alpha, points_equal};
use monodromy_core::{
    C64, Error, MonodromyOptions, ProblemInstance, RunStats, StoppingCriterion, WitnessSet,
};

use crate::report::{pair, pair_vec, LineReport, SolutionReport};
use crate::{Mode, RunArgs};

fn options(instance: &ProblemInstance, args: &RunArgs) -> MonodromyOptions {
    let mut opts = instance.monodromy_options();
    opts.point_eps = args.tol;
    opts.refine_tol = args.tracker_tol;
    opts.tracker.corrector_tol = args.tracker_tol;
    let default_target = match args.mode {
        Mode::Decomposable => instance.known_classes,
        _ => instance.known_degree,
    };
    opts.stopping = StoppingCriterion {
        max_loops: Some(args.max_loops.unwrap_or(500)),
        stabilization: Some(args.stabilization.unwrap_or(50)),
        target_count: args.target_count.or(default_target),
    };
    opts
}

pub fn solve(
    instance: &ProblemInstance,
    args: &RunArgs,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<SolutionReport> {
    let opts = options(instance, args);
    let alpha = instance.alpha.as_ref();
    let q = instance.seed_t;

    let (points, mut stats) = match args.mode {
        Mode::Standard => {
            let (w, stats) =
                standard_monodromy(&instance.curve, q, &[instance.seed_x.clone()], &opts, rng)?;
            (w.points().to_vec(), stats)
        }
        Mode::Decomposable => {
            let Some(alpha) = alpha else {
                bail!("decomposable mode needs an intermediate map; this problem has none");
            };
            let seeds = [instance.seed_x.clone()];
            let (a, b, stats) =
                decomposable_monodromy(&instance.curve, q, &seeds, &seeds, alpha, &opts, rng)?;
            let mut points = a.points.clone();
            for p in &b.points {
                if !points.iter().any(|r| points_equal(r, p, opts.point_eps)) {
                    points.push(p.clone());
                }
            }
            (points, stats)
        }
        Mode::Both => bail!("--mode both is for bench; solve runs one mode"),
    };
    stats.problem = instance.name.clone();
    stats.seed = seed;

    verify_points(instance, &points, q, args.tol)?;

    // Class data needs a map; degree certification additionally needs the
    // collected set to partition evenly and, when a count is known, to
    // actually be complete.
    let (classes, degrees) = match alpha {
        None => (None, None),
        Some(alpha) => {
            let w = WitnessSet::new(
                instance.curve.clone(),
                q,
                points.clone(),
                10.0 * args.tracker_tol,
                opts.point_eps,
            )?;
            let classes = partition_by_alpha(&w, alpha, opts.point_eps)?;
            let degrees = match decomposition_degrees(&w, alpha, opts.point_eps) {
                Ok((a, b)) => {
                    let certified = match args.mode {
                        Mode::Decomposable => instance
                            .known_degree
                            .map(|d| a * b == d)
                            .unwrap_or(false),
                        _ => instance
                            .known_degree
                            .map(|d| w.len() == d)
                            .unwrap_or(true),
                    };
                    certified.then_some((a, b))
                }
                Err(Error::NonUniformPartition(_)) => None,
                Err(e) => return Err(e.into()),
            };
            (Some(classes), degrees)
        }
    };

    let complete = match args.mode {
        Mode::Decomposable => instance.known_classes.map(|c| stats.classes_found == c),
        _ => instance.known_degree.map(|d| stats.points_found == d),
    };

    Ok(SolutionReport {
        problem: instance.name.clone(),
        mode: args.mode.label().to_string(),
        line: LineReport {
            base: pair_vec(&instance.line_base),
            direction: pair_vec(&instance.line_direction),
        },
        base_t: pair(q),
        points: points.iter().map(|p| pair_vec(p)).collect(),
        classes,
        decomposition_degrees: degrees,
        known_degree: instance.known_degree,
        known_classes: instance.known_classes,
        complete,
        stats,
    })
}

/// Independent residual pass over everything the report will claim.
fn verify_points(
    instance: &ProblemInstance,
    points: &[Vec<C64>],
    q: C64,
    tol: f64,
) -> Result<()> {
    for (i, p) in points.iter().enumerate() {
        let r = instance.curve.residual_norm(p, q);
        if !(r < tol) {
            bail!("point {i} fails verification: residual {r:.3e} at tolerance {tol:.3e}");
        }
    }
    Ok(())
}

pub fn solve_stats(
    instance: &ProblemInstance,
    args: &RunArgs,
    mode: Mode,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<RunStats> {
    let mut mode_args = args.clone();
    mode_args.mode = mode;
    let report = solve(instance, &mode_args, seed, rng)
        .with_context(|| format!("{} run with seed {seed}", mode.label()))?;
    Ok(report.stats)
}
