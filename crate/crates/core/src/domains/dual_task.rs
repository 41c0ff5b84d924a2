//! Dual task: hallway navigation followed by foraging, two isolated
//! sub-evaluations with one controller.

use crate::controller::AgentPolicy;
use crate::domains::robot::{
    pie_slices, rangefinders, step_robot, RobotState, SensorConfig, WallContact,
};
use crate::domains::trace::{RobotSnapshot, TraceRecord};
use crate::domains::{
    normalized_distance, remaining_fraction, DomainConfig, Environment, EvalResult,
    FitnessComponents, UsageCounter,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Foraging-style score: `min(1, (n + (1 - d_f)) / total)` with `n` goals
/// visited in order and `d_f` the normalized remaining distance to the
/// next goal. Shared by the dual-task foraging half and two rooms.
pub fn forage_score(visited: usize, d_f: f64, total_goals: usize) -> f64 {
    ((visited as f64 + (1.0 - d_f)) / total_goals as f64).min(1.0)
}

/// Navigation score: 1 when the robot ends within the waypoint radius of
/// the goal, otherwise the normalized distance at the end.
fn nav_score(env: &Environment, config: &DomainConfig, position: Vec2) -> f64 {
    let d = position.distance(env.waypoints[0]);
    if d <= config.waypoint_radius {
        1.0
    } else {
        normalized_distance(env.max_distance, d)
    }
}

/// In-order waypoint progress tracker for foraging rooms.
struct ForageProgress<'a> {
    goals: &'a [Vec2],
    radius: f64,
    visited: usize,
}

impl<'a> ForageProgress<'a> {
    fn new(goals: &'a [Vec2], radius: f64) -> Self {
        ForageProgress {
            goals,
            radius,
            visited: 0,
        }
    }

    fn on_position(&mut self, position: Vec2) {
        while self.visited < self.goals.len()
            && position.distance(self.goals[self.visited]) <= self.radius
        {
            self.visited += 1;
        }
    }

    /// Normalized remaining distance to the next goal (0 once done).
    fn d_f(&self, position: Vec2, max_distance: f64) -> f64 {
        if self.visited >= self.goals.len() {
            0.0
        } else {
            remaining_fraction(max_distance, position.distance(self.goals[self.visited]))
        }
    }

    /// Aiming point for the pie-slice compass.
    fn sense_target(&self) -> Vec2 {
        let idx = self.visited.min(self.goals.len() - 1);
        self.goals[idx]
    }
}

/// Evaluate one controller on both sub-tasks: `seconds x steps_per_second`
/// steps in the hallway (task id 0), the same in the foraging room (task
/// id 1). Fitness is the average of `f_nav` and `f_food`.
pub fn evaluate_dual_task(
    policy: &mut dyn AgentPolicy,
    hallway: &Environment,
    forage: &Environment,
    config: &DomainConfig,
    record_trace: bool,
) -> Result<EvalResult> {
    if hallway.waypoints.len() != 1 {
        return Err(Error::config(
            "the hallway environment carries exactly one goal waypoint".to_string(),
        ));
    }
    if forage.waypoints.is_empty() {
        return Err(Error::config("the foraging environment needs waypoints".to_string()));
    }
    let sensors = SensorConfig::from_domain(config);
    let steps = config.total_steps();
    let mut usage = UsageCounter::default();
    let mut trace = Vec::new();
    let mut sensor_buf = Vec::new();

    // Hallway navigation.
    let mut robot = RobotState::at(hallway.starts[0].position, hallway.starts[0].heading);
    let forage_start = RobotState::at(forage.starts[0].position, forage.starts[0].heading);
    let initial_food = {
        let progress = ForageProgress::new(&forage.waypoints, config.waypoint_radius);
        forage_score(
            0,
            progress.d_f(forage_start.position, forage.max_distance),
            forage.waypoints.len(),
        )
    };
    for step in 0..steps {
        sensor_buf.clear();
        rangefinders(hallway, &robot, &sensors, &mut sensor_buf);
        pie_slices(&robot, hallway.waypoints[0], &mut sensor_buf);
        let action = policy.act(&sensor_buf, 0)?;
        usage.record(action.chosen_brain);
        robot = step_robot(hallway, config, &robot, action.motor, WallContact::Stop);
        if record_trace {
            trace.push(TraceRecord {
                step,
                task: 0,
                robots: vec![RobotSnapshot {
                    position: robot.position,
                    heading: robot.heading,
                    chosen_brain: action.chosen_brain,
                }],
                cumulative_fitness: (nav_score(hallway, config, robot.position) + initial_food)
                    / 2.0,
            });
        }
    }
    let f_nav = nav_score(hallway, config, robot.position);

    // Foraging.
    let mut robot = forage_start;
    let mut progress = ForageProgress::new(&forage.waypoints, config.waypoint_radius);
    for step in 0..steps {
        sensor_buf.clear();
        rangefinders(forage, &robot, &sensors, &mut sensor_buf);
        pie_slices(&robot, progress.sense_target(), &mut sensor_buf);
        let action = policy.act(&sensor_buf, 1)?;
        usage.record(action.chosen_brain);
        robot = step_robot(forage, config, &robot, action.motor, WallContact::Stop);
        progress.on_position(robot.position);
        if record_trace {
            let food = forage_score(
                progress.visited,
                progress.d_f(robot.position, forage.max_distance),
                forage.waypoints.len(),
            );
            trace.push(TraceRecord {
                step: steps + step,
                task: 1,
                robots: vec![RobotSnapshot {
                    position: robot.position,
                    heading: robot.heading,
                    chosen_brain: action.chosen_brain,
                }],
                cumulative_fitness: (f_nav + food) / 2.0,
            });
        }
    }

    let d_f = progress.d_f(robot.position, forage.max_distance);
    let f_food = forage_score(progress.visited, d_f, forage.waypoints.len());
    Ok(EvalResult {
        fitness: (f_nav + f_food) / 2.0,
        components: FitnessComponents {
            f_nav: Some(f_nav),
            f_food: Some(f_food),
            waypoints_visited: Some(progress.visited),
            d_f: Some(d_f),
        },
        trace,
        brains_used: usage.brains_used(),
    })
}

/// Re-score a dual-task trace (task 0 records = hallway, task 1 =
/// foraging). Exact against the original evaluation.
pub fn rescore_dual_task(
    records: &[TraceRecord],
    hallway: &Environment,
    forage: &Environment,
    config: &DomainConfig,
) -> Result<EvalResult> {
    let mut usage = UsageCounter::default();
    let mut last_nav_position = hallway.starts[0].position;
    let mut progress = ForageProgress::new(&forage.waypoints, config.waypoint_radius);
    let mut last_forage_position = forage.starts[0].position;
    for record in records {
        let robot = record
            .robots
            .first()
            .ok_or_else(|| Error::config("dual-task records carry one robot".to_string()))?;
        usage.record(robot.chosen_brain);
        match record.task {
            0 => last_nav_position = robot.position,
            1 => {
                progress.on_position(robot.position);
                last_forage_position = robot.position;
            }
            other => {
                return Err(Error::config(format!("unexpected dual-task id {other} in trace")))
            }
        }
    }
    let f_nav = nav_score(hallway, config, last_nav_position);
    let d_f = progress.d_f(last_forage_position, forage.max_distance);
    let f_food = forage_score(progress.visited, d_f, forage.waypoints.len());
    Ok(EvalResult {
        fitness: (f_nav + f_food) / 2.0,
        components: FitnessComponents {
            f_nav: Some(f_nav),
            f_food: Some(f_food),
            waypoints_visited: Some(progress.visited),
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

    fn setup() -> (Environment, Environment, DomainConfig) {
        (
            Environment::dual_hallway(),
            Environment::dual_forage(),
            DomainConfig::defaults(DomainKind::DualTask),
        )
    }

    #[test]
    fn food_formula_reference_points() {
        assert_eq!(forage_score(2, 0.5, 4), 0.625);
        assert_eq!(forage_score(4, 0.0, 4), 1.0);
        assert_eq!(forage_score(4, 0.5, 4), 1.0, "capped at 1");
        assert_eq!(forage_score(0, 1.0, 4), 0.0);
    }

    #[test]
    fn motionless_robot_scores_its_start_geometry() {
        let (hallway, forage, config) = setup();
        let mut policy = ConstantPolicy::left();
        let result = evaluate_dual_task(&mut policy, &hallway, &forage, &config, false).unwrap();

        let d_nav = hallway.starts[0].position.distance(hallway.waypoints[0]);
        let f_nav = (hallway.max_distance - d_nav) / hallway.max_distance;
        let d_f = forage.starts[0].position.distance(forage.waypoints[0]) / forage.max_distance;
        let f_food = (1.0 - d_f) / 4.0;
        approx::assert_relative_eq!(result.fitness, (f_nav + f_food) / 2.0, epsilon = 1e-12);
        assert_eq!(result.components.waypoints_visited, Some(0));
    }

    /// A scripted run that completes both tasks reaches the perfect score.
    #[test]
    fn finishing_both_tasks_scores_one() {
        let (hallway, forage, config) = setup();
        let policy = GoalChasePolicy::new(
            hallway.clone(),
            config.clone(),
            hallway.starts[0].position,
            hallway.starts[0].heading,
            WallContact::Stop,
            vec![hallway.waypoints[0]],
            Vec::new(),
        );
        // The policy replica must hop environments between sub-tasks; use
        // the task id to trigger the reset on first foraging step.
        struct DualChase {
            inner: GoalChasePolicy,
            forage: Environment,
            switched: bool,
        }
        impl crate::controller::AgentPolicy for DualChase {
            fn act(&mut self, sensors: &[f64], task: usize) -> Result<crate::controller::Action> {
                if task == 1 && !self.switched {
                    self.switched = true;
                    self.inner.reset(
                        self.forage.clone(),
                        self.forage.starts[0].position,
                        self.forage.starts[0].heading,
                        self.forage.waypoints.clone(),
                    );
                }
                self.inner.act(sensors, task)
            }
        }
        let mut dual = DualChase {
            inner: policy,
            forage: forage.clone(),
            switched: false,
        };
        let result = evaluate_dual_task(&mut dual, &hallway, &forage, &config, true).unwrap();
        assert_eq!(result.components.waypoints_visited, Some(4));
        assert_eq!(result.components.f_food, Some(1.0));
        assert_eq!(result.components.f_nav, Some(1.0));
        assert_eq!(result.fitness, 1.0);

        let rescored = rescore_dual_task(&result.trace, &hallway, &forage, &config).unwrap();
        assert_eq!(rescored.fitness, result.fitness);
        assert_eq!(rescored.components, result.components);
    }

    #[test]
    fn task_ids_partition_the_trace() {
        let (hallway, forage, config) = setup();
        let mut policy = ConstantPolicy::forward();
        let result = evaluate_dual_task(&mut policy, &hallway, &forage, &config, true).unwrap();
        let steps = config.total_steps() as usize;
        assert_eq!(result.trace.len(), 2 * steps);
        assert!(result.trace[..steps].iter().all(|r| r.task == 0));
        assert!(result.trace[steps..].iter().all(|r| r.task == 1));
    }

    #[test]
    fn forward_only_robot_masters_the_hallway_but_not_foraging() {
        let (hallway, forage, config) = setup();
        let mut policy = ConstantPolicy::forward();
        let result = evaluate_dual_task(&mut policy, &hallway, &forage, &config, false).unwrap();
        assert_eq!(result.components.f_nav, Some(1.0));
        assert!(result.components.f_food.unwrap() < 1.0);
    }
}
