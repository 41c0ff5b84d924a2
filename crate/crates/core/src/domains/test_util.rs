//! Scripted policies for domain tests: deterministic steering that tracks
//! its own pose replica through the same kinematics as the evaluator.

use crate::controller::{Action, AgentPolicy, Motor};
use crate::domains::robot::{normalize_angle, step_robot, RobotState, WallContact};
use crate::domains::{DomainConfig, Environment};
use crate::error::Result;
use crate::geometry::Vec2;

/// Always emits the same motor. Useful for motionless / crash scenarios.
pub struct ConstantPolicy {
    motor: Motor,
}

impl ConstantPolicy {
    pub fn forward() -> ConstantPolicy {
        ConstantPolicy {
            motor: Motor::Forward,
        }
    }

    pub fn left() -> ConstantPolicy {
        ConstantPolicy { motor: Motor::Left }
    }
}

impl AgentPolicy for ConstantPolicy {
    fn act(&mut self, _sensors: &[f64], _task: usize) -> Result<Action> {
        Ok(Action {
            motor: self.motor,
            chosen_brain: 0,
        })
    }
}

/// Chases a list of targets in order by dead reckoning: it replays the
/// evaluator's kinematics on an internal pose replica, so its knowledge of
/// the robot pose is exact. Task id 1 (team patrol return phase) switches
/// to the `return_targets` list.
pub struct GoalChasePolicy {
    env: Environment,
    config: DomainConfig,
    replica: RobotState,
    contact: WallContact,
    targets: Vec<Vec2>,
    return_targets: Vec<Vec2>,
    current: usize,
    returning: bool,
}

impl GoalChasePolicy {
    pub fn new(
        env: Environment,
        config: DomainConfig,
        start: Vec2,
        heading: f64,
        contact: WallContact,
        targets: Vec<Vec2>,
        return_targets: Vec<Vec2>,
    ) -> GoalChasePolicy {
        GoalChasePolicy {
            env,
            config,
            replica: RobotState::at(start, heading),
            contact,
            targets,
            return_targets,
            current: 0,
            returning: false,
        }
    }

    /// Move the replica into a new environment, for reuse across
    /// sub-evaluations (dual task).
    pub fn reset(&mut self, env: Environment, start: Vec2, heading: f64, targets: Vec<Vec2>) {
        self.env = env;
        self.replica = RobotState::at(start, heading);
        self.targets = targets;
        self.current = 0;
        self.returning = false;
    }

    fn active_targets(&self) -> &[Vec2] {
        if self.returning {
            &self.return_targets
        } else {
            &self.targets
        }
    }
}

impl AgentPolicy for GoalChasePolicy {
    fn act(&mut self, _sensors: &[f64], task: usize) -> Result<Action> {
        if !self.returning && task == 1 && !self.return_targets.is_empty() {
            self.returning = true;
            self.current = 0;
        }
        let targets = self.active_targets();
        let target = targets
            .get(self.current.min(targets.len().saturating_sub(1)))
            .copied()
            .unwrap_or(self.replica.position);

        // Advance the target index once we are inside the waypoint radius.
        if self.replica.position.distance(target) <= self.config.waypoint_radius * 0.5
            && self.current + 1 < targets.len()
        {
            self.current += 1;
        }
        let targets = self.active_targets();
        let target = targets[self.current.min(targets.len() - 1)];

        let to_target = target - self.replica.position;
        let desired = to_target.y.atan2(to_target.x);
        let diff = normalize_angle(desired - self.replica.heading);
        let motor = if diff.abs() <= self.config.turn_rate * 0.75 {
            Motor::Forward
        } else if diff > 0.0 {
            Motor::Left
        } else {
            Motor::Right
        };
        self.replica = step_robot(&self.env, &self.config, &self.replica, motor, self.contact);
        Ok(Action {
            motor,
            chosen_brain: 0,
        })
    }
}
