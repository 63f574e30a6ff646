//! Repeated-run benchmarking: per-run stats rows plus best, average,
//! median, and worst aggregates per mode.

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use monodromy_core::RunStats;

use crate::{runner, Mode, RunArgs};

pub fn run(args: &RunArgs, repeats: usize) -> Result<String> {
    let modes: &[Mode] = match args.mode {
        Mode::Both => &[Mode::Standard, Mode::Decomposable],
        Mode::Standard => &[Mode::Standard],
        Mode::Decomposable => &[Mode::Decomposable],
    };

    let mut csv = RunStats::csv_header().to_string();
    csv.push('\n');
    for &mode in modes {
        let mut rows = Vec::with_capacity(repeats);
        for i in 0..repeats {
            // Run i re-instantiates from its own seed, so the whole row set
            // is reproducible from the base seed alone.
            let seed = args.rng_seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let instance = args.instantiate(&mut rng)?;
            let stats = runner::solve_stats(&instance, args, mode, seed, &mut rng)?;
            csv.push_str(&stats.csv_row());
            csv.push('\n');
            rows.push(stats);
        }
        for line in aggregate_rows(&rows) {
            csv.push_str(&line);
            csv.push('\n');
        }
    }
    Ok(csv)
}

/// Column-wise summaries in the run-row layout, with the aggregate's name
/// in the seed column. "Best" means fewest loops, paths, and failures and
/// the shortest wall time, but the most points and classes.
fn aggregate_rows(rows: &[RunStats]) -> Vec<String> {
    let problem = &rows[0].problem;
    let mode = &rows[0].mode;
    let col = |f: fn(&RunStats) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let loops = col(|r| r.loops_taken as f64);
    let paths = col(|r| r.paths_tracked as f64);
    let failures = col(|r| r.path_failures as f64);
    let points = col(|r| r.points_found as f64);
    let classes = col(|r| r.classes_found as f64);
    let wall = col(|r| r.wall_ms);

    let int = |v: f64| format!("{v:.0}");
    let frac = |v: f64| format!("{v:.1}");
    let row = |label: &str, stat: &dyn Fn(&[f64], bool) -> f64, fmt: &dyn Fn(f64) -> String| {
        format!(
            "{problem},{mode},{label},{},{},{},{},{},{:.3}",
            fmt(stat(&loops, false)),
            fmt(stat(&paths, false)),
            fmt(stat(&failures, false)),
            fmt(stat(&points, true)),
            fmt(stat(&classes, true)),
            stat(&wall, false)
        )
    };

    let best = |xs: &[f64], more_is_better: bool| -> f64 {
        let it = xs.iter().copied();
        if more_is_better {
            it.fold(f64::MIN, f64::max)
        } else {
            it.fold(f64::MAX, f64::min)
        }
    };
    let worst = |xs: &[f64], more_is_better: bool| best(xs, !more_is_better);
    let mean = |xs: &[f64], _: bool| xs.iter().sum::<f64>() / xs.len() as f64;
    let median = |xs: &[f64], _: bool| -> f64 {
        let mut v = xs.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        }
    };

    vec![
        row("best", &best, &int),
        row("average", &mean, &frac),
        row("median", &median, &frac),
        row("worst", &worst, &int),
    ]
}
