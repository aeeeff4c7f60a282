//! Canonical run configurations for the three experiment scenarios, at desk
//! scale (minutes on a laptop) and at full scale.
//!
//! The desk presets keep the full-scale protocol's learning settings but
//! shrink the episode count and stretch the epsilon decay over the first 10%
//! of episodes so exploration survives long enough to matter.

use crate::environment::EnvConfig;
use crate::interaction::Obstacle;
use crate::kinematics::PlanarPoint;
use crate::qlearn::Hyperparameters;

/// Fixed goal (1, 3), no obstacle.
pub fn fixed_goal_desk() -> (EnvConfig, Hyperparameters) {
    let env = EnvConfig {
        goal: PlanarPoint::new(1.0, 3.0),
        goal_change_prob: 0.0,
        obstacle: None,
        ..EnvConfig::default()
    };
    let episodes = 1500;
    let hyper = Hyperparameters {
        episodes,
        epsilon_decrement: decrement_over_tenth(episodes),
        eval_step_limit: 100,
        seed: 7,
        ..Hyperparameters::default()
    };
    (env, hyper)
}

/// Goal redrawn between episodes, no obstacle.
pub fn varying_goal_desk() -> (EnvConfig, Hyperparameters) {
    let env = EnvConfig {
        goal: PlanarPoint::new(1.0, 3.0),
        goal_change_prob: 0.1,
        obstacle: None,
        ..EnvConfig::default()
    };
    let episodes = 6000;
    let hyper = Hyperparameters {
        episodes,
        epsilon_decrement: decrement_over_tenth(episodes),
        eval_step_limit: 200,
        seed: 7,
        ..Hyperparameters::default()
    };
    (env, hyper)
}

/// Goal redrawn between episodes with the disc obstacle at (1, 2), r = 0.5.
pub fn obstacle_aware_desk() -> (EnvConfig, Hyperparameters) {
    let env = EnvConfig {
        goal: PlanarPoint::new(1.0, 3.0),
        goal_change_prob: 0.1,
        obstacle: Some(Obstacle { center: PlanarPoint::new(1.0, 2.0), radius: 0.5 }),
        ..EnvConfig::default()
    };
    // 2000 episodes x <=100 steps keeps the run within 200k environment steps.
    let episodes = 2000;
    let hyper = Hyperparameters {
        episodes,
        epsilon_decrement: decrement_over_tenth(episodes),
        eval_step_limit: 200,
        seed: 7,
        ..Hyperparameters::default()
    };
    (env, hyper)
}

/// Evaluation variant of an environment: a fresh goal every trial and no
/// redraw of goals that land inside the obstacle.
pub fn eval_env(base: &EnvConfig) -> EnvConfig {
    EnvConfig {
        goal_change_prob: 1.0,
        resample_goal_outside_obstacle: false,
        ..base.clone()
    }
}

/// The full-scale obstacle protocol: 200,000 episodes with the verbatim
/// epsilon schedule (zero exploration after 20 episodes). Days of compute;
/// included for completeness.
pub fn obstacle_aware_paper_scale() -> (EnvConfig, Hyperparameters) {
    let (env, _) = obstacle_aware_desk();
    (env, Hyperparameters { seed: 7, ..Hyperparameters::default() })
}

fn decrement_over_tenth(episodes: usize) -> f64 {
    1.0 / (0.1 * episodes as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for (env, hyper) in [fixed_goal_desk(), varying_goal_desk(), obstacle_aware_desk(), obstacle_aware_paper_scale()] {
            env.validate().unwrap();
            hyper.validate().unwrap();
        }
        let (env, _) = obstacle_aware_desk();
        let eval = eval_env(&env);
        assert_eq!(eval.goal_change_prob, 1.0);
        assert!(!eval.resample_goal_outside_obstacle);
        eval.validate().unwrap();
    }

    #[test]
    fn desk_obstacle_run_fits_step_budget() {
        let (_, hyper) = obstacle_aware_desk();
        assert!(hyper.episodes * hyper.max_episode_steps <= 200_000);
    }

    #[test]
    fn desk_epsilon_reaches_zero_after_a_tenth() {
        let (_, hyper) = fixed_goal_desk();
        let tenth = hyper.episodes / 10;
        assert!(hyper.epsilon(tenth) < 1e-9);
        assert!(hyper.epsilon(tenth / 2) > 0.4);
    }
}
