//! Deterministic 2D robot-simulation benchmark domains.
//!
//! Four environments share one point-robot kinematics model: team patrol,
//! lone patrol, dual task (hallway navigation + foraging) and two rooms.
//! Evaluations are pure functions of (controller, environment, config);
//! re-running a trace through the same scoring rules reproduces the
//! returned fitness exactly.

mod dual_task;
mod env;
mod lone_patrol;
mod robot;
mod team_patrol;
#[cfg(test)]
pub(crate) mod test_util;
mod trace;
mod two_rooms;

pub use dual_task::{evaluate_dual_task, forage_score, rescore_dual_task};
pub use env::{Environment, Region, StartPose};
pub use lone_patrol::{
    evaluate_lone_patrol, lone_patrol_increment, rescore_lone_patrol, LONE_PATROL_TASKS,
};
pub use robot::{pie_slices, rangefinders, step_robot, RobotState, SensorConfig, WallContact};
pub use team_patrol::{evaluate_team_patrol, rescore_team_patrol, TEAM_COORDS};
pub use trace::{trace_from_text, trace_to_text, RobotSnapshot, TraceRecord};
pub use two_rooms::{evaluate_two_rooms, rescore_two_rooms};

use crate::error::{Error, Result};

/// The four benchmark environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    TeamPatrol,
    LonePatrol,
    DualTask,
    TwoRooms,
}

impl DomainKind {
    pub const ALL: [DomainKind; 4] = [
        DomainKind::TeamPatrol,
        DomainKind::LonePatrol,
        DomainKind::DualTask,
        DomainKind::TwoRooms,
    ];

    pub fn token(self) -> &'static str {
        match self {
            DomainKind::TeamPatrol => "team-patrol",
            DomainKind::LonePatrol => "lone-patrol",
            DomainKind::DualTask => "dual-task",
            DomainKind::TwoRooms => "two-rooms",
        }
    }

    /// Situation values queried by situational policy geometry.
    pub fn spg_situations(self) -> Vec<f64> {
        match self {
            DomainKind::TeamPatrol => vec![-1.0, 1.0],
            DomainKind::LonePatrol => vec![-1.0, 0.0, 1.0],
            DomainKind::DualTask | DomainKind::TwoRooms => vec![0.0, 1.0],
        }
    }

    /// Brain count used by multitask controllers (one per task).
    pub fn multitask_brains(self) -> u32 {
        match self {
            DomainKind::TeamPatrol => 2,
            DomainKind::LonePatrol => 3,
            DomainKind::DualTask | DomainKind::TwoRooms => 2,
        }
    }

    /// Number of distinct task ids the domain's oracle can emit.
    pub fn task_count(self) -> usize {
        self.multitask_brains() as usize
    }

    /// Multi-agent domains feed a team coordinate into the CPPN.
    pub fn uses_team_input(self) -> bool {
        matches!(self, DomainKind::TeamPatrol)
    }

    /// Population size used in the original experiments.
    pub fn default_population(self) -> usize {
        match self {
            DomainKind::TeamPatrol | DomainKind::LonePatrol => 500,
            DomainKind::DualTask | DomainKind::TwoRooms => 300,
        }
    }
}

impl std::str::FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "team-patrol" => Ok(DomainKind::TeamPatrol),
            "lone-patrol" => Ok(DomainKind::LonePatrol),
            "dual-task" => Ok(DomainKind::DualTask),
            "two-rooms" => Ok(DomainKind::TwoRooms),
            other => Err(Error::config(format!("unknown domain `{other}`"))),
        }
    }
}

/// Simulation parameters. Defaults are per-domain; everything is
/// overridable from the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub domain: DomainKind,
    /// Evaluation length. For dual task this is the length of each of the
    /// two sub-evaluations.
    pub seconds: u32,
    pub steps_per_second: u32,
    pub forward_speed: f64,
    /// Radians per step.
    pub turn_rate: f64,
    pub rangefinder_count: usize,
    pub rangefinder_range: f64,
    pub waypoint_radius: f64,
    /// Whether the substrate carries the advance/return signal input
    /// (team patrol, methods without a human task division).
    pub signal_input: bool,
}

impl DomainConfig {
    pub fn defaults(domain: DomainKind) -> DomainConfig {
        let (seconds, steps_per_second, rangefinder_count) = match domain {
            DomainKind::TeamPatrol => (45, 30, 6),
            DomainKind::LonePatrol => (80, 30, 6),
            DomainKind::DualTask => (45, 5, 5),
            DomainKind::TwoRooms => (200, 10, 5),
        };
        DomainConfig {
            domain,
            seconds,
            steps_per_second,
            forward_speed: 2.0,
            turn_rate: 12f64.to_radians(),
            rangefinder_count,
            rangefinder_range: 100.0,
            waypoint_radius: 10.0,
            signal_input: false,
        }
    }

    pub fn total_steps(&self) -> u32 {
        self.seconds * self.steps_per_second
    }
}

/// Fitness components reported alongside the scalar fitness.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitnessComponents {
    pub f_nav: Option<f64>,
    pub f_food: Option<f64>,
    pub waypoints_visited: Option<usize>,
    pub d_f: Option<f64>,
}

/// Outcome of one domain evaluation.
#[derive(Debug, Clone)]
pub struct EvalResult {
    pub fitness: f64,
    pub components: FitnessComponents,
    /// Per-step records; empty unless trace recording was requested.
    pub trace: Vec<TraceRecord>,
    /// Brains acting on at least 1% of steps (max over robots in team
    /// domains).
    pub brains_used: usize,
}

/// The proximity reward unit: `(D - d) / D`. Distances beyond `D` signal a
/// geometry misconfiguration and clamp to zero.
pub fn normalized_distance(max_distance: f64, d: f64) -> f64 {
    debug_assert!(max_distance > 0.0);
    if d > max_distance {
        eprintln!("warning: distance {d} exceeds domain maximum {max_distance}; clamping");
        return 0.0;
    }
    (max_distance - d) / max_distance
}

/// Normalized remaining distance `d / D`, the `d_f` term of the foraging
/// fitness formulas (0 at the goal, 1 at maximal distance).
pub fn remaining_fraction(max_distance: f64, d: f64) -> f64 {
    debug_assert!(max_distance > 0.0);
    (d / max_distance).min(1.0)
}

/// Shared bookkeeping for per-brain usage across an evaluation.
#[derive(Debug, Default, Clone)]
pub(crate) struct UsageCounter {
    counts: Vec<u64>,
    steps: u64,
}

impl UsageCounter {
    pub fn record(&mut self, brain: usize) {
        if self.counts.len() <= brain {
            self.counts.resize(brain + 1, 0);
        }
        self.counts[brain] += 1;
        self.steps += 1;
    }

    pub fn brains_used(&self) -> usize {
        crate::controller::brains_used(&self.counts, self.steps, crate::controller::USED_BRAIN_FRACTION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_distance_examples() {
        assert_eq!(normalized_distance(100.0, 0.0), 1.0);
        assert_eq!(normalized_distance(100.0, 100.0), 0.0);
        assert_eq!(normalized_distance(200.0, 50.0), 0.75);
    }

    #[test]
    fn normalized_distance_clamps_misconfigured_geometry() {
        assert_eq!(normalized_distance(100.0, 150.0), 0.0);
    }

    #[test]
    fn domain_defaults_match_the_experiment_setup() {
        let team = DomainConfig::defaults(DomainKind::TeamPatrol);
        assert_eq!(team.total_steps(), 1350);
        let lone = DomainConfig::defaults(DomainKind::LonePatrol);
        assert_eq!(lone.total_steps(), 2400);
        let dual = DomainConfig::defaults(DomainKind::DualTask);
        assert_eq!(dual.total_steps(), 225);
        let rooms = DomainConfig::defaults(DomainKind::TwoRooms);
        assert_eq!(rooms.total_steps(), 2000);
        assert_eq!(DomainKind::TeamPatrol.default_population(), 500);
        assert_eq!(DomainKind::DualTask.default_population(), 300);
    }

    #[test]
    fn domain_tokens_round_trip() {
        for d in DomainKind::ALL {
            assert_eq!(d.token().parse::<DomainKind>().unwrap(), d);
        }
    }
}
