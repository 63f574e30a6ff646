//! Homotopy path tracking along the parameter line: a fourth-order
//! Runge-Kutta predictor on the Davidenko system with a Newton corrector and
//! multiplicative step control.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::algebra::{all_finite, inf_norm, C64, CurveSystem};
use crate::error::{Error, Result};

/// Knobs for the predictor-corrector tracker. Steps are taken in the scaled
/// arclength `s` of the segment, so all step bounds live in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub corrector_tol: f64,
    pub newton_max_iters: usize,
    pub step_shrink: f64,
    pub step_grow: f64,
    pub grow_after: usize,
    pub max_steps: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-7,
            max_step: 0.1,
            corrector_tol: 1e-9,
            newton_max_iters: 3,
            step_shrink: 0.5,
            step_grow: 2.0,
            grow_after: 5,
            max_steps: 100_000,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.min_step > 0.0
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step <= 1.0
            && self.corrector_tol > 0.0
            && self.newton_max_iters >= 1
            && self.step_shrink > 0.0
            && self.step_shrink < 1.0
            && self.step_grow >= 1.0
            && self.grow_after >= 1
            && self.max_steps >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureReason {
    MinStepUnderflow,
    MaxSteps,
    CorrectorDivergence,
    NonFiniteValue,
}

#[derive(Debug, Clone)]
pub enum PathOutcome {
    Success(Vec<C64>),
    Failure(FailureReason),
}

/// Outcome of tracking one solution path across one segment.
#[derive(Debug, Clone)]
pub struct PathResult {
    pub outcome: PathOutcome,
    pub steps_taken: usize,
}

impl PathResult {
    pub fn endpoint(&self) -> Option<&[C64]> {
        match &self.outcome {
            PathOutcome::Success(x) => Some(x),
            PathOutcome::Failure(_) => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self.outcome, PathOutcome::Success(_))
    }

    pub fn failure_reason(&self) -> Option<FailureReason> {
        match &self.outcome {
            PathOutcome::Failure(r) => Some(*r),
            PathOutcome::Success(_) => None,
        }
    }
}

const INITIAL_REFINE_ITERS: usize = 8;

enum NewtonOutcome {
    Converged(Vec<C64>),
    Diverged,
    Singular,
    NonFinite,
}

fn matrix_finite(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Newton iteration at fixed `t`. With `require_small_step` both the last
/// correction norm and the residual must drop below `tol`; otherwise the
/// residual alone decides, which is the plain root-polishing contract.
fn newton_iterate(
    curve: &CurveSystem,
    x0: &[C64],
    t: C64,
    tol: f64,
    max_iters: usize,
    require_small_step: bool,
) -> NewtonOutcome {
    let n = curve.n_vars();
    let mut x = x0.to_vec();
    if !all_finite(&x) {
        return NewtonOutcome::NonFinite;
    }
    for _ in 0..max_iters {
        let r = curve.residual(&x, t);
        if !all_finite(&r) {
            return NewtonOutcome::NonFinite;
        }
        let j = curve.jac_at(&x, t);
        if !matrix_finite(&j) {
            return NewtonOutcome::NonFinite;
        }
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let delta = match j.lu().solve(&rhs) {
            Some(d) => d,
            None => return NewtonOutcome::Singular,
        };
        let step_norm = delta.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !step_norm.is_finite() {
            return NewtonOutcome::NonFinite;
        }
        for (xi, di) in x.iter_mut().zip(delta.iter()) {
            *xi += di;
        }
        if !all_finite(&x) {
            return NewtonOutcome::NonFinite;
        }
        let r2 = curve.residual(&x, t);
        if !all_finite(&r2) {
            return NewtonOutcome::NonFinite;
        }
        if inf_norm(&r2) < tol && (!require_small_step || step_norm < tol) {
            return NewtonOutcome::Converged(x);
        }
    }
    NewtonOutcome::Diverged
}

/// Polish an approximate root at fixed `t` until the residual drops below
/// `tol`. An exact root is returned unchanged up to one iteration of noise.
pub fn newton_refine(
    curve: &CurveSystem,
    x: &[C64],
    t: C64,
    tol: f64,
    max_iters: usize,
) -> Result<Vec<C64>> {
    if x.len() != curve.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: curve.n_vars(),
            got: x.len(),
        });
    }
    match newton_iterate(curve, x, t, tol, max_iters, false) {
        NewtonOutcome::Converged(x) => Ok(x),
        NewtonOutcome::Diverged => Err(Error::NewtonDivergence(max_iters)),
        NewtonOutcome::Singular => Err(Error::SingularJacobian),
        NewtonOutcome::NonFinite => Err(Error::NonFinite("newton iterate")),
    }
}

enum Stage {
    Velocity(Vec<C64>),
    Reject,
    NonFinite,
}

// dx/ds = -J_x^{-1} dF/dt * (t_b - t_a), evaluated at (x, t).
fn davidenko_velocity(curve: &CurveSystem, x: &[C64], t: C64, t_span: C64) -> Stage {
    if !all_finite(x) {
        return Stage::NonFinite;
    }
    let f_t = curve.dt_at(x, t);
    if !all_finite(&f_t) {
        return Stage::NonFinite;
    }
    let j = curve.jac_at(x, t);
    if !matrix_finite(&j) {
        return Stage::NonFinite;
    }
    let rhs = DVector::from_iterator(curve.n_vars(), f_t.iter().map(|v| -v * t_span));
    match j.lu().solve(&rhs) {
        Some(w) => {
            let w: Vec<C64> = w.iter().copied().collect();
            if all_finite(&w) {
                Stage::Velocity(w)
            } else {
                Stage::NonFinite
            }
        }
        None => Stage::Reject,
    }
}

enum StepOutcome {
    Accept(Vec<C64>),
    Reject,
    Abort(FailureReason),
}

#[allow(clippy::too_many_arguments)]
fn attempt_step(
    curve: &CurveSystem,
    x: &[C64],
    s: f64,
    h: f64,
    s_next: f64,
    t_a: C64,
    t_b: C64,
    cfg: &TrackerConfig,
) -> StepOutcome {
    let t_span = t_b - t_a;
    let t_of = |sigma: f64| if sigma == 1.0 { t_b } else { t_a + sigma * t_span };

    let k1 = match davidenko_velocity(curve, x, t_of(s), t_span) {
        Stage::Velocity(k) => k,
        // The base point is an accepted solution; a non-finite evaluation
        // there cannot be cured by a smaller step.
        Stage::NonFinite => return StepOutcome::Abort(FailureReason::NonFiniteValue),
        Stage::Reject => return StepOutcome::Reject,
    };
    let shift = |base: &[C64], dir: &[C64], a: f64| -> Vec<C64> {
        base.iter().zip(dir).map(|(b, d)| b + a * d).collect()
    };
    let mid = s + 0.5 * h;
    let k2 = match davidenko_velocity(curve, &shift(x, &k1, 0.5 * h), t_of(mid), t_span) {
        Stage::Velocity(k) => k,
        _ => return StepOutcome::Reject,
    };
    let k3 = match davidenko_velocity(curve, &shift(x, &k2, 0.5 * h), t_of(mid), t_span) {
        Stage::Velocity(k) => k,
        _ => return StepOutcome::Reject,
    };
    let k4 = match davidenko_velocity(curve, &shift(x, &k3, h), t_of(s_next), t_span) {
        Stage::Velocity(k) => k,
        _ => return StepOutcome::Reject,
    };

    let sixth = h / 6.0;
    let predicted: Vec<C64> = (0..x.len())
        .map(|i| x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    if !all_finite(&predicted) {
        return StepOutcome::Reject;
    }

    match newton_iterate(
        curve,
        &predicted,
        t_of(s_next),
        cfg.corrector_tol,
        cfg.newton_max_iters,
        true,
    ) {
        NewtonOutcome::Converged(xc) => StepOutcome::Accept(xc),
        _ => StepOutcome::Reject,
    }
}

/// Track one solution of `F(x, t) = 0` from `t_a` to `t_b` along the straight
/// segment between them. The start point is Newton-refined at `t_a` first;
/// on success the endpoint satisfies the corrector tolerance at `t_b`.
pub fn track_segment(
    curve: &CurveSystem,
    x_start: &[C64],
    t_a: C64,
    t_b: C64,
    cfg: &TrackerConfig,
) -> PathResult {
    debug_assert!(cfg.validate().is_ok());
    let fail = |reason, steps| PathResult {
        outcome: PathOutcome::Failure(reason),
        steps_taken: steps,
    };

    let refined = match newton_iterate(
        curve,
        x_start,
        t_a,
        cfg.corrector_tol,
        INITIAL_REFINE_ITERS,
        false,
    ) {
        NewtonOutcome::Converged(x) => x,
        NewtonOutcome::NonFinite => return fail(FailureReason::NonFiniteValue, 0),
        _ => return fail(FailureReason::CorrectorDivergence, 0),
    };
    if t_a == t_b {
        return PathResult {
            outcome: PathOutcome::Success(refined),
            steps_taken: 0,
        };
    }

    let mut x = refined;
    let mut s = 0.0f64;
    let mut h = cfg.initial_step.min(cfg.max_step);
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let mut streak = 0usize;

    loop {
        if attempts >= cfg.max_steps {
            return fail(FailureReason::MaxSteps, accepted);
        }
        attempts += 1;

        let last = h >= 1.0 - s;
        let h_eff = if last { 1.0 - s } else { h };
        let s_next = if last { 1.0 } else { s + h };

        match attempt_step(curve, &x, s, h_eff, s_next, t_a, t_b, cfg) {
            StepOutcome::Accept(xn) => {
                x = xn;
                s = s_next;
                accepted += 1;
                if s == 1.0 {
                    return PathResult {
                        outcome: PathOutcome::Success(x),
                        steps_taken: accepted,
                    };
                }
                streak += 1;
                if streak >= cfg.grow_after {
                    h = (h * cfg.step_grow).min(cfg.max_step);
                    streak = 0;
                }
            }
            StepOutcome::Reject => {
                streak = 0;
                h *= cfg.step_shrink;
                if h < cfg.min_step {
                    return fail(FailureReason::MinStepUnderflow, accepted);
                }
            }
            StepOutcome::Abort(reason) => return fail(reason, accepted),
        }
    }
}

/// Track a batch of start points over the same segment. Paths are independent
/// and may run in parallel; results keep the input order and one failing path
/// does not disturb the others.
pub fn track_batch(
    curve: &CurveSystem,
    points: &[Vec<C64>],
    t_a: C64,
    t_b: C64,
    cfg: &TrackerConfig,
) -> Vec<PathResult> {
    points
        .par_iter()
        .map(|p| track_segment(curve, p, t_a, t_b, cfg))
        .collect()
}
