//! Lone patrol: one robot visits the plus-sign's three waypoints in an
//! order that demands a left turn, a straight crossing and a right turn at
//! the central intersection, then returns home.

use crate::controller::AgentPolicy;
use crate::domains::robot::{rangefinders, step_robot, RobotState, SensorConfig, WallContact};
use crate::domains::trace::{RobotSnapshot, TraceRecord};
use crate::domains::{
    normalized_distance, DomainConfig, Environment, EvalResult, FitnessComponents, UsageCounter,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Task id (turn behavior at the center) for each leg of the patrol:
/// 0 = turn left, 1 = go straight, 2 = turn right. The legs are
/// start->west, west->east, east->north, north->home.
pub const LONE_PATROL_TASKS: [usize; 4] = [0, 1, 2, 1];

/// Per-step fitness increment: the normalized distance to the next goal
/// plus one per goal already reached; a flat 4 once everything (three
/// waypoints and home) is done.
pub fn lone_patrol_increment(goals_reached: usize, nd_to_next: f64) -> f64 {
    if goals_reached >= 4 {
        4.0
    } else {
        nd_to_next + goals_reached as f64
    }
}

struct Scorer<'a> {
    env: &'a Environment,
    config: &'a DomainConfig,
    /// Ordered goals: the three waypoints followed by the start point.
    goals: Vec<Vec2>,
    goal_idx: usize,
    total: f64,
}

impl<'a> Scorer<'a> {
    fn new(env: &'a Environment, config: &'a DomainConfig) -> Result<Scorer<'a>> {
        if env.starts.is_empty() {
            return Err(Error::config("lone patrol environment needs a start pose".to_string()));
        }
        let mut goals = env.waypoints.clone();
        goals.push(env.starts[0].position);
        Ok(Scorer {
            env,
            config,
            goals,
            goal_idx: 0,
            total: 0.0,
        })
    }

    fn current_task(&self) -> usize {
        LONE_PATROL_TASKS[self.goal_idx.min(LONE_PATROL_TASKS.len() - 1)]
    }

    fn on_step(&mut self, position: Vec2) {
        while self.goal_idx < self.goals.len()
            && position.distance(self.goals[self.goal_idx]) <= self.config.waypoint_radius
        {
            self.goal_idx += 1;
        }
        let increment = if self.goal_idx >= self.goals.len() {
            lone_patrol_increment(4, 0.0)
        } else {
            let d = position.distance(self.goals[self.goal_idx]);
            lone_patrol_increment(self.goal_idx, normalized_distance(self.env.max_distance, d))
        };
        self.total += increment;
    }

    fn finish(self) -> (f64, FitnessComponents) {
        let visited = self.goal_idx.min(self.env.waypoints.len());
        (
            self.total,
            FitnessComponents {
                waypoints_visited: Some(visited),
                ..FitnessComponents::default()
            },
        )
    }
}

pub fn evaluate_lone_patrol(
    policy: &mut dyn AgentPolicy,
    env: &Environment,
    config: &DomainConfig,
    record_trace: bool,
) -> Result<EvalResult> {
    let sensors = SensorConfig::from_domain(config);
    let mut robot = RobotState::at(env.starts[0].position, env.starts[0].heading);
    let mut scorer = Scorer::new(env, config)?;
    let mut usage = UsageCounter::default();
    let mut trace = Vec::new();
    let mut sensor_buf = Vec::new();

    for step in 0..config.total_steps() {
        let task = scorer.current_task();
        sensor_buf.clear();
        rangefinders(env, &robot, &sensors, &mut sensor_buf);
        let action = policy.act(&sensor_buf, task)?;
        usage.record(action.chosen_brain);
        robot = step_robot(env, config, &robot, action.motor, WallContact::Stop);
        scorer.on_step(robot.position);
        if record_trace {
            trace.push(TraceRecord {
                step,
                task,
                robots: vec![RobotSnapshot {
                    position: robot.position,
                    heading: robot.heading,
                    chosen_brain: action.chosen_brain,
                }],
                cumulative_fitness: scorer.total,
            });
        }
    }

    let (fitness, components) = scorer.finish();
    Ok(EvalResult {
        fitness,
        components,
        trace,
        brains_used: usage.brains_used(),
    })
}

/// Re-score a lone patrol trace; exact against the original evaluation.
pub fn rescore_lone_patrol(
    records: &[TraceRecord],
    env: &Environment,
    config: &DomainConfig,
) -> Result<EvalResult> {
    let mut scorer = Scorer::new(env, config)?;
    let mut usage = UsageCounter::default();
    for record in records {
        let robot = record
            .robots
            .first()
            .ok_or_else(|| Error::config("lone patrol records carry one robot".to_string()))?;
        usage.record(robot.chosen_brain);
        scorer.on_step(robot.position);
    }
    let (fitness, components) = scorer.finish();
    Ok(EvalResult {
        fitness,
        components,
        trace: Vec::new(),
        brains_used: usage.brains_used(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::test_util::{ConstantPolicy, GoalChasePolicy};
    use crate::domains::DomainKind;

    fn setup() -> (Environment, DomainConfig) {
        (
            Environment::lone_patrol(),
            DomainConfig::defaults(DomainKind::LonePatrol),
        )
    }

    #[test]
    fn increment_formula_reference_points() {
        assert_eq!(lone_patrol_increment(0, 0.0), 0.0);
        assert_eq!(lone_patrol_increment(2, 0.3), 2.3);
        assert_eq!(lone_patrol_increment(4, 0.0), 4.0);
        assert_eq!(lone_patrol_increment(3, 1.0), 4.0);
    }

    #[test]
    fn increment_is_monotone_in_reached_goals() {
        for reached in 0..4usize {
            for nd_millis in 0..=1000 {
                let nd = nd_millis as f64 / 1000.0;
                assert!(
                    lone_patrol_increment(reached + 1, nd) >= lone_patrol_increment(reached, nd)
                );
            }
        }
    }

    #[test]
    fn robot_at_start_with_maximal_distance_scores_zero_per_step() {
        // Increment is nd + 0; nd is zero only at distance D, which the
        // formula yields directly.
        assert_eq!(lone_patrol_increment(0, 0.0), 0.0);
    }

    #[test]
    fn scripted_completion_earns_four_per_remaining_step() {
        let (env, config) = setup();
        let mut goals = env.waypoints.clone();
        goals.push(env.starts[0].position);
        let mut policy = GoalChasePolicy::new(
            env.clone(),
            config.clone(),
            env.starts[0].position,
            env.starts[0].heading,
            WallContact::Stop,
            goals,
            Vec::new(),
        );
        let result = evaluate_lone_patrol(&mut policy, &env, &config, true).unwrap();
        assert_eq!(result.components.waypoints_visited, Some(3));

        // Locate the completion step: the first step whose increment is
        // exactly 4 and stays 4 afterwards.
        let increments: Vec<f64> = result
            .trace
            .iter()
            .scan(0.0, |prev, r| {
                let inc = r.cumulative_fitness - *prev;
                *prev = r.cumulative_fitness;
                Some(inc)
            })
            .collect();
        let completion = increments.iter().position(|&i| i == 4.0).expect("route completes");
        assert!(increments[completion..].iter().all(|&i| i == 4.0));

        // Total = accrued through completion + 4 * remaining steps.
        let accrued: f64 = result.trace[completion].cumulative_fitness;
        let remaining = (config.total_steps() as usize - completion - 1) as f64;
        approx::assert_relative_eq!(result.fitness, accrued + 4.0 * remaining, epsilon = 1e-9);
    }

    #[test]
    fn task_follows_the_leg_sequence() {
        let (env, config) = setup();
        let mut goals = env.waypoints.clone();
        goals.push(env.starts[0].position);
        let mut policy = GoalChasePolicy::new(
            env.clone(),
            config.clone(),
            env.starts[0].position,
            env.starts[0].heading,
            WallContact::Stop,
            goals,
            Vec::new(),
        );
        let result = evaluate_lone_patrol(&mut policy, &env, &config, true).unwrap();
        let mut seen = Vec::new();
        for r in &result.trace {
            if seen.last() != Some(&r.task) {
                seen.push(r.task);
            }
        }
        // left, straight, right, straight (the trailing straight leg may
        // collapse into the done state with the same task id).
        assert_eq!(seen, vec![0, 1, 2, 1]);
    }

    #[test]
    fn rescore_matches_exactly_and_spinning_scores_distance_only() {
        let (env, config) = setup();
        let mut policy = ConstantPolicy::left();
        let result = evaluate_lone_patrol(&mut policy, &env, &config, true).unwrap();
        // Spinning at the start: every step earns nd(start -> west
        // waypoint) + 0.
        let d = env.starts[0].position.distance(env.waypoints[0]);
        let per_step = (env.max_distance - d) / env.max_distance;
        approx::assert_relative_eq!(
            result.fitness,
            per_step * config.total_steps() as f64,
            epsilon = 1e-9
        );
        let rescored = rescore_lone_patrol(&result.trace, &env, &config).unwrap();
        assert_eq!(rescored.fitness, result.fitness);
    }
}
