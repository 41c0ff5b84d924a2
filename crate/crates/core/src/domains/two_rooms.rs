//! Two rooms: foraging rooms joined by an S-shaped hallway whose invisible
//! breadcrumbs reward progress. Wall contact ends the evaluation.

use crate::controller::AgentPolicy;
use crate::domains::dual_task::forage_score;
use crate::domains::robot::{
    pie_slices, rangefinders, step_robot, RobotState, SensorConfig, WallContact,
};
use crate::domains::trace::{RobotSnapshot, TraceRecord};
use crate::domains::{
    remaining_fraction, DomainConfig, Environment, EvalResult, FitnessComponents, UsageCounter,
};
use crate::error::{Error, Result};
use crate::geometry::{point_in_polygon, Vec2};

/// The ordered goal sequence: the first half of the waypoint list (lower
/// room), then every breadcrumb, then the second half (upper room).
fn goal_sequence(env: &Environment) -> Vec<Vec2> {
    let split = env.waypoints.len() / 2;
    let mut goals = Vec::with_capacity(env.waypoints.len() + env.breadcrumbs.len());
    goals.extend_from_slice(&env.waypoints[..split]);
    goals.extend_from_slice(&env.breadcrumbs);
    goals.extend_from_slice(&env.waypoints[split..]);
    goals
}

/// Sensed waypoint while the goal index points at `goals[idx]`:
/// breadcrumbs cannot be sensed, so the compass aims at the next true
/// waypoint instead.
fn sense_target(env: &Environment, goals: &[Vec2], idx: usize) -> Vec2 {
    let split = env.waypoints.len() / 2;
    let crumb_range = split..split + env.breadcrumbs.len();
    let idx = idx.min(goals.len() - 1);
    if crumb_range.contains(&idx) {
        env.waypoints[split]
    } else {
        goals[idx]
    }
}

struct Scorer<'a> {
    env: &'a Environment,
    config: &'a DomainConfig,
    goals: Vec<Vec2>,
    visited: usize,
    last_position: Vec2,
}

impl<'a> Scorer<'a> {
    fn new(env: &'a Environment, config: &'a DomainConfig) -> Scorer<'a> {
        Scorer {
            env,
            config,
            goals: goal_sequence(env),
            visited: 0,
            last_position: env.starts[0].position,
        }
    }

    fn on_step(&mut self, position: Vec2) {
        while self.visited < self.goals.len()
            && position.distance(self.goals[self.visited]) <= self.config.waypoint_radius
        {
            self.visited += 1;
        }
        self.last_position = position;
    }

    fn d_f(&self) -> f64 {
        if self.visited >= self.goals.len() {
            0.0
        } else {
            remaining_fraction(
                self.env.max_distance,
                self.last_position.distance(self.goals[self.visited]),
            )
        }
    }

    fn fitness(&self) -> f64 {
        forage_score(self.visited, self.d_f(), self.goals.len())
    }
}

pub fn evaluate_two_rooms(
    policy: &mut dyn AgentPolicy,
    env: &Environment,
    config: &DomainConfig,
    record_trace: bool,
) -> Result<EvalResult> {
    let hallway = env
        .region("hallway")
        .ok_or_else(|| Error::config("two rooms requires a `hallway` region for its task oracle".to_string()))?
        .polygon
        .clone();
    let sensors = SensorConfig::from_domain(config);
    let mut robot = RobotState::at(env.starts[0].position, env.starts[0].heading);
    let mut scorer = Scorer::new(env, config);
    let goals = scorer.goals.clone();
    let mut usage = UsageCounter::default();
    let mut trace = Vec::new();
    let mut sensor_buf = Vec::new();

    for step in 0..config.total_steps() {
        let task = usize::from(!point_in_polygon(robot.position, &hallway));
        sensor_buf.clear();
        rangefinders(env, &robot, &sensors, &mut sensor_buf);
        pie_slices(
            &robot,
            sense_target(env, &goals, scorer.visited),
            &mut sensor_buf,
        );
        let action = policy.act(&sensor_buf, task)?;
        usage.record(action.chosen_brain);
        robot = step_robot(env, config, &robot, action.motor, WallContact::Kill);
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
                cumulative_fitness: scorer.fitness(),
            });
        }
        if !robot.alive {
            break; // collision terminates the evaluation
        }
    }

    let d_f = scorer.d_f();
    let visited = scorer.visited;
    let fitness = scorer.fitness();
    Ok(EvalResult {
        fitness,
        components: FitnessComponents {
            f_nav: None,
            f_food: Some(fitness),
            waypoints_visited: Some(visited),
            d_f: Some(d_f),
        },
        trace,
        brains_used: usage.brains_used(),
    })
}

/// Re-score a two-rooms trace (early-terminated traces simply end early).
pub fn rescore_two_rooms(
    records: &[TraceRecord],
    env: &Environment,
    config: &DomainConfig,
) -> Result<EvalResult> {
    let mut scorer = Scorer::new(env, config);
    let mut usage = UsageCounter::default();
    for record in records {
        let robot = record
            .robots
            .first()
            .ok_or_else(|| Error::config("two-rooms records carry one robot".to_string()))?;
        usage.record(robot.chosen_brain);
        scorer.on_step(robot.position);
    }
    let d_f = scorer.d_f();
    let visited = scorer.visited;
    let fitness = scorer.fitness();
    Ok(EvalResult {
        fitness,
        components: FitnessComponents {
            f_nav: None,
            f_food: Some(fitness),
            waypoints_visited: Some(visited),
            d_f: Some(d_f),
        },
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
            Environment::two_rooms(),
            DomainConfig::defaults(DomainKind::TwoRooms),
        )
    }

    #[test]
    fn fitness_formula_reference_point() {
        approx::assert_relative_eq!(forage_score(7, 0.2, 15), 0.52, epsilon = 1e-12);
        assert_eq!(forage_score(15, 0.0, 15), 1.0);
        assert_eq!(forage_score(14, 0.0, 15), 1.0, "cap engages before the last goal is exact");
    }

    #[test]
    fn goal_sequence_is_fifteen_long_with_crumbs_in_the_middle() {
        let (env, _) = setup();
        let goals = goal_sequence(&env);
        assert_eq!(goals.len(), 15);
        assert_eq!(goals[5..10], env.breadcrumbs[..]);
    }

    #[test]
    fn collision_terminates_with_start_geometry_score() {
        let (env, config) = setup();
        // Charge straight east from (30, 30): death at the x = 150 wall
        // long before any waypoint.
        let mut env2 = env.clone();
        env2.starts[0].heading = -std::f64::consts::FRAC_PI_2; // face the south wall
        let mut policy = ConstantPolicy::forward();
        let result = evaluate_two_rooms(&mut policy, &env2, &config, true).unwrap();
        assert!(result.trace.len() < config.total_steps() as usize, "must die early");
        assert_eq!(result.components.waypoints_visited, Some(0));

        // Fitness = (1 - d_f(final)) / 15.
        let last = result.trace.last().unwrap().robots[0].position;
        let d_f = last.distance(goal_sequence(&env2)[0]) / env2.max_distance;
        approx::assert_relative_eq!(result.fitness, (1.0 - d_f) / 15.0, epsilon = 1e-12);
    }

    #[test]
    fn breadcrumbs_are_never_the_sense_target() {
        let (env, _) = setup();
        let goals = goal_sequence(&env);
        for idx in 5..10 {
            let target = sense_target(&env, &goals, idx);
            assert!(!env.breadcrumbs.contains(&target));
            assert_eq!(target, env.waypoints[5]);
        }
        assert_eq!(sense_target(&env, &goals, 0), env.waypoints[0]);
        assert_eq!(sense_target(&env, &goals, 12), env.waypoints[7]);
    }

    #[test]
    fn scripted_full_route_scores_one_and_rescoring_is_exact() {
        let (env, config) = setup();
        let goals = goal_sequence(&env);
        let mut policy = GoalChasePolicy::new(
            env.clone(),
            config.clone(),
            env.starts[0].position,
            env.starts[0].heading,
            WallContact::Kill,
            goals,
            Vec::new(),
        );
        let result = evaluate_two_rooms(&mut policy, &env, &config, true).unwrap();
        assert_eq!(
            result.trace.len(),
            config.total_steps() as usize,
            "the scripted route must survive"
        );
        assert_eq!(result.components.waypoints_visited, Some(15));
        assert_eq!(result.fitness, 1.0);

        let rescored = rescore_two_rooms(&result.trace, &env, &config).unwrap();
        assert_eq!(rescored.fitness, result.fitness);
        assert_eq!(rescored.components, result.components);
    }

    #[test]
    fn task_oracle_flags_the_hallway() {
        let (env, config) = setup();
        let goals = goal_sequence(&env);
        let mut policy = GoalChasePolicy::new(
            env.clone(),
            config.clone(),
            env.starts[0].position,
            env.starts[0].heading,
            WallContact::Kill,
            goals,
            Vec::new(),
        );
        let result = evaluate_two_rooms(&mut policy, &env, &config, true).unwrap();
        let hallway_steps = result.trace.iter().filter(|r| r.task == 0).count();
        let room_steps = result.trace.iter().filter(|r| r.task == 1).count();
        assert!(hallway_steps > 10, "the route passes through the hallway");
        assert!(room_steps > hallway_steps, "most time is spent foraging");
    }
}
