//! Episodic goal-reaching environment.
//!
//! The agent drives the robot configuration `(s, kappa)` with discrete rate
//! commands, integrated by explicit Euler at a fixed `dt`. Growth is
//! irreversible: `s` never decreases and saturates at `s_max`; curvature is
//! clamped to `[-kappa_bound, kappa_bound]`. When an obstacle is configured
//! every step resolves the interaction shape and measures the goal distance
//! from the resolved chain tip; otherwise the single-arc tip is used.
//!
//! An environment instance owns mutable episode state and is single-threaded;
//! run independent instances for parallel evaluation.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interaction::{is_colliding, resolve_shape, InteractionWeights, Obstacle};
use crate::kinematics::{planar_tip, Configuration, PlanarPoint, PlanarPose, SegmentedShape};

/// One discrete rate command: curvature rate (1/(m*s)) and growth rate (m/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kappa_rate: f64,
    pub growth_rate: f64,
    /// Position of this action in [`action_set`], 0..6.
    pub index: usize,
}

/// The six discrete actions, in the fixed index order
/// `(kappa_left, 0), (kappa_left, grow), (0, 0), (0, grow), (kappa_right, 0),
/// (kappa_right, grow)`.
pub fn action_set(cfg: &EnvConfig) -> [Action; 6] {
    let rates = [
        (cfg.kappa_rate_left, 0.0),
        (cfg.kappa_rate_left, cfg.growth_rate),
        (0.0, 0.0),
        (0.0, cfg.growth_rate),
        (cfg.kappa_rate_right, 0.0),
        (cfg.kappa_rate_right, cfg.growth_rate),
    ];
    std::array::from_fn(|index| Action {
        kappa_rate: rates[index].0,
        growth_rate: rates[index].1,
        index,
    })
}

/// The 9-dimensional observation `[s, kappa, s_rate, kappa_rate, goal_x,
/// goal_y, obs_x, obs_y, dist]`.
///
/// Without a configured obstacle the obstacle fields read (0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub s: f64,
    pub kappa: f64,
    pub s_rate: f64,
    pub kappa_rate: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub obs_x: f64,
    pub obs_y: f64,
    pub dist: f64,
}

impl Observation {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.s,
            self.kappa,
            self.s_rate,
            self.kappa_rate,
            self.goal_x,
            self.goal_y,
            self.obs_x,
            self.obs_y,
            self.dist,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Axis-aligned rectangle goals are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GoalBounds {
    pub fn validate(&self) -> Result<()> {
        let ok = self.x_min.is_finite()
            && self.x_max.is_finite()
            && self.y_min.is_finite()
            && self.y_max.is_finite()
            && self.x_min <= self.x_max
            && self.y_min <= self.y_max;
        if !ok {
            return Err(Error::InvalidInput(format!("bad goal bounds: {self:?}")));
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> PlanarPoint {
        let x = if self.x_min == self.x_max { self.x_min } else { rng.gen_range(self.x_min..self.x_max) };
        let y = if self.y_min == self.y_max { self.y_min } else { rng.gen_range(self.y_min..self.y_max) };
        PlanarPoint::new(x, y)
    }
}

/// Environment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Integration step, seconds.
    pub dt: f64,
    /// Initial arc length, meters.
    pub s0: f64,
    /// Initial curvature, 1/m.
    pub kappa0: f64,
    /// Growth saturation length, meters.
    pub s_max: f64,
    /// Symmetric curvature clamp, 1/m.
    pub kappa_bound: f64,
    /// Goal-capture radius, meters.
    pub d_max: f64,
    /// Current goal; kept across resets unless redrawn.
    pub goal: PlanarPoint,
    pub goal_bounds: GoalBounds,
    /// Probability of redrawing the goal at each episode start.
    pub goal_change_prob: f64,
    pub obstacle: Option<Obstacle>,
    /// Episode step cap.
    pub max_steps: usize,
    /// Curvature rate of the "bend left" actions (negative by default).
    pub kappa_rate_left: f64,
    /// Curvature rate of the "bend right" actions.
    pub kappa_rate_right: f64,
    /// Growth rate of the elongating actions, m/s.
    pub growth_rate: f64,
    pub interaction: InteractionWeights,
    /// Redraw goals that land inside the obstacle disc. Disable to allow
    /// physically inaccessible goals.
    pub resample_goal_outside_obstacle: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            s0: 1.0,
            kappa0: 0.01,
            s_max: 5.0,
            kappa_bound: 2.0,
            d_max: 0.1,
            goal: PlanarPoint::new(1.0, 3.0),
            goal_bounds: GoalBounds { x_min: 0.0, x_max: 4.0, y_min: -4.0, y_max: 4.0 },
            goal_change_prob: 0.2,
            obstacle: None,
            max_steps: 100,
            kappa_rate_left: -0.5,
            kappa_rate_right: 0.5,
            growth_rate: 0.6,
            interaction: InteractionWeights::default(),
            resample_goal_outside_obstacle: true,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.d_max > 0.0 && self.d_max.is_finite()) {
            return Err(Error::InvalidInput(format!("d_max must be > 0, got {}", self.d_max)));
        }
        if !(self.s0 > 0.0 && self.s0 <= self.s_max) {
            return Err(Error::InvalidInput(format!(
                "need 0 < s0 <= s_max, got s0={} s_max={}",
                self.s0, self.s_max
            )));
        }
        if !(self.kappa_bound > 0.0 && self.kappa0.abs() <= self.kappa_bound) {
            return Err(Error::InvalidInput(format!(
                "need |kappa0| <= kappa_bound and kappa_bound > 0, got kappa0={} bound={}",
                self.kappa0, self.kappa_bound
            )));
        }
        if !(0.0..=1.0).contains(&self.goal_change_prob) {
            return Err(Error::InvalidInput(format!(
                "goal_change_prob must be in [0, 1], got {}",
                self.goal_change_prob
            )));
        }
        if self.growth_rate < 0.0 {
            return Err(Error::InvalidInput("growth is irreversible; growth_rate must be >= 0".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be >= 1".into()));
        }
        self.goal_bounds.validate()?;
        self.interaction.validate()?;
        if let Some(o) = &self.obstacle {
            o.validate()?;
        }
        Ok(())
    }
}

/// Per-step extras alongside the observation.
#[derive(Debug, Clone)]
pub struct StepInfo {
    /// Backbone shape used for the tip (resolved against the obstacle when
    /// one is configured, uniform otherwise).
    pub shape: SegmentedShape,
    /// Tip of `shape`; the point the goal distance is measured from.
    pub tip: PlanarPoint,
    /// True when the commanded uniform shape would violate the clearance,
    /// i.e. the obstacle is actively deforming the robot.
    pub collision: bool,
    pub step_index: usize,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Immediate reward: `+1000` inside the capture radius, otherwise
/// `1 - ln(1 + d) / ln(1 + d_max)` (non-positive, decreasing in `d`).
pub fn reward(d: f64, d_max: f64) -> f64 {
    if d <= d_max {
        1000.0
    } else {
        1.0 - (1.0 + d).ln() / (1.0 + d_max).ln()
    }
}

/// The simulated episode.
#[derive(Debug, Clone)]
pub struct VineEnv {
    cfg: EnvConfig,
    s: f64,
    kappa: f64,
    s_rate: f64,
    kappa_rate: f64,
    goal: PlanarPoint,
    step_index: usize,
    done: bool,
}

impl VineEnv {
    pub fn new(cfg: EnvConfig) -> Result<Self> {
        cfg.validate()?;
        let goal = cfg.goal;
        Ok(Self {
            s: cfg.s0,
            kappa: cfg.kappa0,
            s_rate: 0.0,
            kappa_rate: 0.0,
            goal,
            step_index: 0,
            done: false,
            cfg,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn goal(&self) -> PlanarPoint {
        self.goal
    }

    pub fn action_set(&self) -> [Action; 6] {
        action_set(&self.cfg)
    }

    /// Start a new episode. The goal is redrawn from the bounds with
    /// probability `goal_change_prob`, otherwise kept.
    pub fn reset<R: Rng>(&mut self, rng: &mut R) -> Observation {
        self.s = self.cfg.s0;
        self.kappa = self.cfg.kappa0;
        self.s_rate = 0.0;
        self.kappa_rate = 0.0;
        self.step_index = 0;
        self.done = false;
        if self.cfg.goal_change_prob > 0.0 && rng.gen::<f64>() < self.cfg.goal_change_prob {
            self.goal = self.draw_goal(rng);
        }
        self.observe().0
    }

    fn draw_goal<R: Rng>(&self, rng: &mut R) -> PlanarPoint {
        let mut goal = self.cfg.goal_bounds.sample(rng);
        if self.cfg.resample_goal_outside_obstacle {
            if let Some(obstacle) = &self.cfg.obstacle {
                let mut attempts = 0;
                while obstacle.contains(&goal) && attempts < 1000 {
                    goal = self.cfg.goal_bounds.sample(rng);
                    attempts += 1;
                }
            }
        }
        goal
    }

    /// Resolve the current backbone and assemble the observation.
    fn observe(&self) -> (Observation, StepInfo) {
        let (tip, shape, collision) = self.resolved_tip();
        let dist = tip.distance_to(&self.goal);
        let (obs_x, obs_y) = match &self.cfg.obstacle {
            Some(o) => (o.center.x, o.center.y),
            None => (0.0, 0.0),
        };
        (
            Observation {
                s: self.s,
                kappa: self.kappa,
                s_rate: self.s_rate,
                kappa_rate: self.kappa_rate,
                goal_x: self.goal.x,
                goal_y: self.goal.y,
                obs_x,
                obs_y,
                dist,
            },
            StepInfo { shape, tip, collision, step_index: self.step_index },
        )
    }

    fn resolved_tip(&self) -> (PlanarPoint, SegmentedShape, bool) {
        match &self.cfg.obstacle {
            Some(obstacle) => {
                let report = resolve_shape(
                    self.kappa,
                    self.s,
                    &self.cfg.interaction,
                    obstacle,
                    &PlanarPose::ORIGIN,
                )
                .expect("validated config");
                // Contact means the commanded uniform shape would violate.
                let collision = report.iterations > 0
                    || is_colliding(
                        &SegmentedShape::uniform(self.kappa, self.cfg.interaction.segments, self.s)
                            .expect("validated config"),
                        &PlanarPose::ORIGIN,
                        obstacle,
                        self.cfg.interaction.robot_radius,
                    )
                    .expect("validated config");
                let poses = crate::kinematics::chain_poses(&report.shape, &PlanarPose::ORIGIN)
                    .expect("validated shape");
                (poses.last().unwrap().position, report.shape, collision)
            }
            None => {
                let q = Configuration::planar(self.s, self.kappa).expect("validated config");
                let tip = planar_tip(&q).expect("validated config");
                let shape = SegmentedShape::uniform(self.kappa, self.cfg.interaction.segments, self.s)
                    .expect("validated config");
                (tip, shape, false)
            }
        }
    }

    /// Advance one step. Errors if the episode already terminated.
    pub fn step(&mut self, action: &Action) -> Result<StepResult> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        self.kappa = (self.kappa + action.kappa_rate * self.cfg.dt)
            .clamp(-self.cfg.kappa_bound, self.cfg.kappa_bound);
        self.s = (self.s + action.growth_rate * self.cfg.dt).min(self.cfg.s_max);
        self.s_rate = action.growth_rate;
        self.kappa_rate = action.kappa_rate;
        self.step_index += 1;

        let (observation, info) = self.observe();
        let reached = observation.dist <= self.cfg.d_max;
        let truncated = self.step_index >= self.cfg.max_steps;
        self.done = reached || truncated;
        Ok(StepResult {
            reward: reward(observation.dist, self.cfg.d_max),
            observation,
            done: self.done,
            info,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// Observation of the current state (no state change).
    pub fn current_observation(&self) -> Observation {
        self.observe().0
    }
}

/// One exported trajectory row.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryRow {
    pub step: usize,
    pub s: f64,
    pub kappa: f64,
    pub s_rate: f64,
    pub kappa_rate: f64,
    pub tip_x: f64,
    pub tip_y: f64,
    pub dist: f64,
    pub reward: f64,
    pub action_index: usize,
    pub collision: bool,
}

pub const TRAJECTORY_HEADER: &str = "step,s_m,kappa_1_per_m,s_rate_m_per_s,kappa_rate_1_per_m_s,tip_x_m,tip_y_m,distance_m,reward,action_index,collision";

/// Write trajectory rows as delimited text with a header naming columns and
/// units.
pub fn write_trajectory_csv<W: Write>(mut out: W, rows: &[TrajectoryRow]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.step,
            r.s,
            r.kappa,
            r.s_rate,
            r.kappa_rate,
            r.tip_x,
            r.tip_y,
            r.dist,
            r.reward,
            r.action_index,
            u8::from(r.collision),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
        assert!((a - b).abs() <= tol, "{what}: {a} vs {b}");
    }

    fn fixed_goal_cfg() -> EnvConfig {
        EnvConfig { goal_change_prob: 0.0, ..EnvConfig::default() }
    }

    #[test]
    fn reward_examples() {
        // High-precision evaluation of the log formula at d=1, d_max=0.1
        // gives 1 - ln(2)/ln(1.1) = -6.2725408973417191.
        assert_close(reward(1.0, 0.1), -6.2725408973417191, 1e-5, "log reward");
        assert_eq!(reward(0.05, 0.1), 1000.0);
        assert_eq!(reward(0.1, 0.1), 1000.0); // boundary inclusive
        // Just outside the capture radius the reward is barely below zero
        // and strictly decreasing in d.
        let r_edge = reward(0.1 + 1e-9, 0.1);
        assert!(r_edge < 0.0 && r_edge > -1e-6);
        let mut prev = r_edge;
        for i in 1..100 {
            let r = reward(0.1 + i as f64 * 0.05, 0.1);
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn reset_keeps_or_redraws_goal() {
        let mut env = VineEnv::new(fixed_goal_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let g0 = env.goal();
        for _ in 0..50 {
            env.reset(&mut rng);
            assert_eq!(env.goal(), g0);
        }

        let cfg = EnvConfig { goal_change_prob: 1.0, ..EnvConfig::default() };
        let mut env = VineEnv::new(cfg).unwrap();
        let (mut sx, mut sy) = (0.0, 0.0);
        let n = 10_000;
        for _ in 0..n {
            env.reset(&mut rng);
            sx += env.goal().x;
            sy += env.goal().y;
        }
        // Uniform over x in [0,4], y in [-4,4]: mean (2, 0), sd/sqrt(n) of
        // the mean = range/sqrt(12 n).
        let se_x = 4.0 / (12.0f64 * n as f64).sqrt();
        let se_y = 8.0 / (12.0f64 * n as f64).sqrt();
        assert!((sx / n as f64 - 2.0).abs() < 3.0 * se_x);
        assert!((sy / n as f64 - 0.0).abs() < 3.0 * se_y);
    }

    #[test]
    fn reset_observation_matches_initial_state() {
        let mut env = VineEnv::new(fixed_goal_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let obs = env.reset(&mut rng);
        assert_eq!(obs.s, 1.0);
        assert_eq!(obs.kappa, 0.01);
        assert_eq!(obs.s_rate, 0.0);
        assert_eq!(obs.kappa_rate, 0.0);
        assert_eq!(obs.goal_x, 1.0);
        assert_eq!(obs.goal_y, 3.0);
        assert_eq!(obs.obs_x, 0.0);
        assert_eq!(obs.obs_y, 0.0);
        let tip = planar_tip(&Configuration::planar(1.0, 0.01).unwrap()).unwrap();
        let d = tip.distance_to(&PlanarPoint::new(1.0, 3.0));
        assert_close(obs.dist, d, 1e-12, "initial distance");
        assert_close(obs.dist, 2.2383233865689270, 1e-9, "frozen initial distance");
    }

    #[test]
    fn zero_action_leaves_state_unchanged() {
        let mut env = VineEnv::new(fixed_goal_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let before = env.reset(&mut rng);
        let actions = env.action_set();
        let result = env.step(&actions[2]).unwrap();
        assert_eq!(result.observation.s, before.s);
        assert_eq!(result.observation.kappa, before.kappa);
        assert_eq!(result.observation.dist, before.dist);
    }

    #[test]
    fn explicit_euler_update() {
        let mut env = VineEnv::new(fixed_goal_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        env.reset(&mut rng);
        let result = env
            .step(&Action { kappa_rate: -0.5, growth_rate: 0.6, index: 1 })
            .unwrap();
        assert_close(result.observation.s, 1.06, 1e-12, "s update");
        assert_close(result.observation.kappa, -0.04, 1e-12, "kappa update");
        assert_eq!(result.observation.s_rate, 0.6);
        assert_eq!(result.observation.kappa_rate, -0.5);
    }

    #[test]
    fn growth_is_monotone_and_state_clamped() {
        let mut env = VineEnv::new(fixed_goal_cfg()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let mut obs = env.reset(&mut rng);
        let actions = env.action_set();
        let mut prev_s = obs.s;
        for _ in 0..100 {
            if env.is_done() {
                break;
            }
            let a = actions[rng.gen_range(0..6)];
            obs = env.step(&a).unwrap().observation;
            assert!(obs.s >= prev_s, "growth must not reverse");
            assert!(obs.s <= 5.0 + 1e-12);
            assert!(obs.kappa.abs() <= 2.0 + 1e-12);
            prev_s = obs.s;
        }
    }

    #[test]
    fn observation_distance_consistent() {
        let obstacle = Obstacle::new(PlanarPoint::new(1.0, 2.0), 0.5).unwrap();
        for cfg in [fixed_goal_cfg(), EnvConfig { obstacle: Some(obstacle), goal_change_prob: 0.0, ..EnvConfig::default() }] {
            let with_obstacle = cfg.obstacle.is_some();
            let mut env = VineEnv::new(cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(36);
            env.reset(&mut rng);
            let actions = env.action_set();
            for _ in 0..40 {
                if env.is_done() {
                    break;
                }
                let a = actions[rng.gen_range(0..6)];
                let step = env.step(&a).unwrap();
                let obs = step.observation;
                let tip = if with_obstacle {
                    let poses =
                        crate::kinematics::chain_poses(&step.info.shape, &PlanarPose::ORIGIN).unwrap();
                    poses.last().unwrap().position
                } else {
                    planar_tip(&Configuration::planar(obs.s, obs.kappa).unwrap()).unwrap()
                };
                let d = tip.distance_to(&PlanarPoint::new(obs.goal_x, obs.goal_y));
                assert_close(obs.dist, d, 1e-9, "distance recomputation");
            }
        }
    }

    #[test]
    fn termination_and_finished_episode_error() {
        // A goal close to the start terminates immediately with +1000.
        let cfg = EnvConfig {
            goal: PlanarPoint::new(0.0, 1.05),
            goal_change_prob: 0.0,
            ..EnvConfig::default()
        };
        let mut env = VineEnv::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        env.reset(&mut rng);
        let actions = env.action_set();
        let r = env.step(&actions[2]).unwrap();
        assert!(r.done);
        assert_eq!(r.reward, 1000.0);
        assert!(r.observation.dist <= 0.1);
        assert!(matches!(env.step(&actions[2]), Err(Error::EpisodeFinished)));

        // Step cap terminates too.
        let cfg = EnvConfig { max_steps: 3, goal_change_prob: 0.0, ..EnvConfig::default() };
        let mut env = VineEnv::new(cfg).unwrap();
        env.reset(&mut rng);
        for i in 1..=3 {
            let r = env.step(&actions[2]).unwrap();
            assert_eq!(r.done, i == 3);
            assert_eq!(r.info.step_index, i);
        }
    }

    #[test]
    fn action_set_layout() {
        let cfg = EnvConfig::default();
        let actions = action_set(&cfg);
        assert_eq!(actions.len(), 6);
        for (i, a) in actions.iter().enumerate() {
            assert_eq!(a.index, i);
            assert!(a.growth_rate >= 0.0);
        }
        assert!(actions[0].kappa_rate < 0.0, "first pair bends left (negative)");
        assert!(actions[4].kappa_rate > 0.0, "last pair bends right (positive)");
        assert_eq!(actions[2].kappa_rate, 0.0);
        assert_eq!(actions[2].growth_rate, 0.0);
        assert_eq!(actions[3].growth_rate, cfg.growth_rate);
        // Stable across calls.
        let again = action_set(&cfg);
        for (a, b) in actions.iter().zip(again.iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let cfg = EnvConfig {
            goal_change_prob: 1.0,
            obstacle: Some(Obstacle::new(PlanarPoint::new(1.0, 2.0), 0.5).unwrap()),
            ..EnvConfig::default()
        };
        let run = |seed: u64| -> Vec<[f64; 9]> {
            let mut env = VineEnv::new(cfg.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut trace = vec![env.reset(&mut rng).to_array()];
            let actions = env.action_set();
            for _ in 0..60 {
                if env.is_done() {
                    break;
                }
                let a = actions[rng.gen_range(0..6)];
                trace.push(env.step(&a).unwrap().observation.to_array());
            }
            trace
        };
        let a = run(99);
        let b = run(99);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x, y, "trajectories must be bitwise identical");
        }
        assert_ne!(run(100), a, "different seed should diverge");
    }

    #[test]
    fn goal_resampling_respects_obstacle() {
        let obstacle = Obstacle::new(PlanarPoint::new(2.0, 0.0), 1.5).unwrap();
        let cfg = EnvConfig {
            goal_change_prob: 1.0,
            obstacle: Some(obstacle),
            ..EnvConfig::default()
        };
        let mut env = VineEnv::new(cfg.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..1000 {
            env.reset(&mut rng);
            assert!(!obstacle.contains(&env.goal()));
        }

        let mut inside = 0;
        let cfg = EnvConfig { resample_goal_outside_obstacle: false, ..cfg };
        let mut env = VineEnv::new(cfg).unwrap();
        for _ in 0..1000 {
            env.reset(&mut rng);
            if obstacle.contains(&env.goal()) {
                inside += 1;
            }
        }
        assert!(inside > 0, "disabled resampling must allow goals inside the disc");
    }

    #[test]
    fn obstacle_contact_deflects_tip() {
        // Straight growth into a blocking disc: the resolved tip must differ
        // from the uniform arc tip and stay clear of the obstacle.
        let obstacle = Obstacle::new(PlanarPoint::new(0.0, 2.0), 0.5).unwrap();
        let cfg = EnvConfig {
            obstacle: Some(obstacle),
            goal_change_prob: 0.0,
            kappa0: 0.0,
            ..EnvConfig::default()
        };
        let mut env = VineEnv::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        env.reset(&mut rng);
        let actions = env.action_set();
        let mut saw_contact = false;
        for _ in 0..40 {
            if env.is_done() {
                break;
            }
            let r = env.step(&actions[3]).unwrap(); // grow straight
            if r.info.collision {
                saw_contact = true;
                let uniform_tip =
                    planar_tip(&Configuration::planar(r.observation.s, r.observation.kappa).unwrap())
                        .unwrap();
                let poses =
                    crate::kinematics::chain_poses(&r.info.shape, &PlanarPose::ORIGIN).unwrap();
                let resolved_tip = poses.last().unwrap().position;
                assert!(uniform_tip.distance_to(&resolved_tip) > 1e-3);
                assert!(
                    resolved_tip.distance_to(&obstacle.center)
                        >= obstacle.radius + env.config().interaction.robot_radius - 2e-4
                );
            }
        }
        assert!(saw_contact, "growing straight into the disc must make contact");
    }

    #[test]
    fn trajectory_csv_format() {
        let rows = vec![
            TrajectoryRow {
                step: 0,
                s: 1.0,
                kappa: 0.01,
                s_rate: 0.0,
                kappa_rate: 0.0,
                tip_x: -0.005,
                tip_y: 1.0,
                dist: 2.23,
                reward: -9.7,
                action_index: 2,
                collision: false,
            },
            TrajectoryRow {
                step: 1,
                s: 1.06,
                kappa: -0.04,
                s_rate: 0.6,
                kappa_rate: -0.5,
                tip_x: 0.01,
                tip_y: 1.05,
                dist: 2.1,
                reward: -9.2,
                action_index: 1,
                collision: true,
            },
        ];
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert!(lines[1].starts_with("0,1,0.01,0,0,"));
        assert!(lines[2].ends_with(",1,1"));
    }
}
