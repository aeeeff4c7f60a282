//! Greedy evaluation protocols: repeated trials, single rollouts, and the
//! goal-grid error heatmap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{EnvConfig, TrajectoryRow, VineEnv};
use crate::error::{Error, Result};
use crate::kinematics::{PlanarPoint, SegmentedShape};

use super::agent::Policy;

/// Outcome of one greedy rollout.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub goal: PlanarPoint,
    /// Steps taken until termination (goal, or the step limit).
    pub steps: usize,
    /// Plain sum of per-step rewards including the terminal bonus.
    pub accumulated_reward: f64,
    /// Reached the capture radius within the step limit.
    pub success: bool,
    pub final_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Fixed-width binning over `[lo, hi]`; the last bin is closed above.
/// Out-of-range values clamp into the edge bins.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
    assert!(bins > 0 && hi > lo, "histogram needs bins > 0 and hi > lo");
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin { lo: lo + i as f64 * width, hi: lo + (i + 1) as f64 * width, count: 0 })
        .collect();
    for v in values {
        let idx = (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize;
        out[idx].count += 1;
    }
    out
}

/// Aggregate of an evaluation run.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub trials: usize,
    pub successes: usize,
    pub outcomes: Vec<TrialOutcome>,
    pub steps_histogram: Vec<HistogramBin>,
    pub reward_histogram: Vec<HistogramBin>,
}

impl EvalReport {
    /// `None` when no trials ran (the rate is undefined).
    pub fn success_rate(&self) -> Option<f64> {
        if self.trials == 0 {
            None
        } else {
            Some(self.successes as f64 / self.trials as f64)
        }
    }
}

/// Full record of a single greedy episode.
#[derive(Debug, Clone)]
pub struct RolloutRecord {
    pub rows: Vec<TrajectoryRow>,
    /// Resolved backbone after each step, aligned with `rows`.
    pub shapes: Vec<SegmentedShape>,
    pub outcome: TrialOutcome,
}

/// Run one greedy episode on `env` (already reset) up to `step_limit` steps.
pub fn rollout<P: Policy>(policy: &P, env: &mut VineEnv, step_limit: usize) -> Result<RolloutRecord> {
    let actions = env.action_set();
    let mut obs = env.current_observation();
    let mut rows = Vec::new();
    let mut shapes = Vec::new();
    let mut accumulated = 0.0;
    let mut success = false;
    let mut steps = 0usize;
    let mut final_distance = obs.dist;

    while steps < step_limit && !env.is_done() {
        let action_index = policy.act(&obs);
        let step = env.step(&actions[action_index])?;
        steps += 1;
        accumulated += step.reward;
        final_distance = step.observation.dist;
        rows.push(TrajectoryRow {
            step: steps,
            s: step.observation.s,
            kappa: step.observation.kappa,
            s_rate: step.observation.s_rate,
            kappa_rate: step.observation.kappa_rate,
            tip_x: step.info.tip.x,
            tip_y: step.info.tip.y,
            dist: step.observation.dist,
            reward: step.reward,
            action_index,
            collision: step.info.collision,
        });
        shapes.push(step.info.shape.clone());
        obs = step.observation;
        if step.observation.dist <= env.config().d_max {
            success = true;
            break;
        }
        if step.done {
            break;
        }
    }

    Ok(RolloutRecord {
        rows,
        shapes,
        outcome: TrialOutcome {
            goal: env.goal(),
            steps,
            accumulated_reward: accumulated,
            success,
            final_distance,
        },
    })
}

/// Run `trials` independent greedy episodes. Goal redraws follow the
/// environment config (`goal_change_prob`), so fixed-goal configs evaluate
/// the same task every trial while goal-changing configs sample fresh goals.
pub fn evaluate<P: Policy>(
    policy: &P,
    env_cfg: &EnvConfig,
    trials: usize,
    step_limit: usize,
    seed: u64,
) -> Result<EvalReport> {
    let mut cfg = env_cfg.clone();
    cfg.max_steps = step_limit.max(1);
    let mut env = VineEnv::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::with_capacity(trials);
    for _ in 0..trials {
        env.reset(&mut rng);
        let record = rollout(policy, &mut env, step_limit)?;
        outcomes.push(record.outcome);
    }

    let successes = outcomes.iter().filter(|o| o.success).count();
    let steps: Vec<f64> = outcomes.iter().map(|o| o.steps as f64).collect();
    let rewards: Vec<f64> = outcomes.iter().map(|o| o.accumulated_reward).collect();
    let steps_histogram = if outcomes.is_empty() {
        Vec::new()
    } else {
        histogram(&steps, 0.0, step_limit.max(1) as f64, 20.min(step_limit.max(1)))
    };
    let reward_histogram = if outcomes.is_empty() {
        Vec::new()
    } else {
        let lo = rewards.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if (hi - lo).abs() < 1e-9 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        histogram(&rewards, lo, hi, 20)
    };

    Ok(EvalReport { trials, successes, outcomes, steps_histogram, reward_histogram })
}

/// Rectangular goal grid for the error heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub spacing: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: 0.0, x_max: 4.0, y_min: -4.0, y_max: 4.0, spacing: 0.5 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0)
            || self.x_max < self.x_min
            || self.y_max < self.y_min
            || [self.x_min, self.x_max, self.y_min, self.y_max, self.spacing]
                .iter()
                .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(format!("bad grid spec: {self:?}")));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, spacing: f64) -> Vec<f64> {
        let n = ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
        (0..n).map(|i| lo + i as f64 * spacing).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_min, self.x_max, self.spacing)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_min, self.y_max, self.spacing)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HeatmapCell {
    pub goal_x: f64,
    pub goal_y: f64,
    pub final_distance: f64,
    /// `final_distance` divided by the grid maximum (0 when all distances
    /// vanish), so values lie in [0, 1].
    pub normalized: f64,
}

/// Row-major grid of final goal distances (y outer, x inner, both ascending).
#[derive(Debug, Clone)]
pub struct HeatmapGrid {
    pub cells: Vec<HeatmapCell>,
    pub nx: usize,
    pub ny: usize,
    pub max_distance: f64,
}

impl HeatmapGrid {
    /// Mean normalized error over boundary cells vs interior cells.
    pub fn boundary_and_interior_means(&self) -> (f64, f64) {
        let mut boundary = (0.0, 0usize);
        let mut interior = (0.0, 0usize);
        for (idx, cell) in self.cells.iter().enumerate() {
            let ix = idx % self.nx;
            let iy = idx / self.nx;
            let on_boundary = ix == 0 || iy == 0 || ix == self.nx - 1 || iy == self.ny - 1;
            let slot = if on_boundary { &mut boundary } else { &mut interior };
            slot.0 += cell.normalized;
            slot.1 += 1;
        }
        (
            if boundary.1 > 0 { boundary.0 / boundary.1 as f64 } else { 0.0 },
            if interior.1 > 0 { interior.0 / interior.1 as f64 } else { 0.0 },
        )
    }
}

/// Greedy rollout for every goal on the grid; record the final distance and
/// normalize by the grid maximum.
pub fn heatmap<P: Policy>(
    policy: &P,
    env_cfg: &EnvConfig,
    grid: &GridSpec,
    step_limit: usize,
) -> Result<HeatmapGrid> {
    grid.validate()?;
    let xs = grid.xs();
    let ys = grid.ys();
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    let mut rng = ChaCha8Rng::seed_from_u64(0); // reset draws nothing at prob 0
    for &gy in &ys {
        for &gx in &xs {
            let mut cfg = env_cfg.clone();
            cfg.goal = PlanarPoint::new(gx, gy);
            cfg.goal_change_prob = 0.0;
            cfg.max_steps = step_limit.max(1);
            let mut env = VineEnv::new(cfg)?;
            env.reset(&mut rng);
            let record = rollout(policy, &mut env, step_limit)?;
            cells.push(HeatmapCell {
                goal_x: gx,
                goal_y: gy,
                final_distance: record.outcome.final_distance,
                normalized: 0.0,
            });
        }
    }
    let max_distance = cells.iter().map(|c| c.final_distance).fold(0.0f64, f64::max);
    if max_distance > 1e-15 {
        for c in &mut cells {
            c.normalized = c.final_distance / max_distance;
        }
    }
    Ok(HeatmapGrid { cells, nx: xs.len(), ny: ys.len(), max_distance })
}
