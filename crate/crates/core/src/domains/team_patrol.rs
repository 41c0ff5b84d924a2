//! Team patrol: three robots spread to the plus-sign's waypoints, then
//! return home after the mid-evaluation signal.

use crate::controller::AgentPolicy;
use crate::domains::robot::{rangefinders, step_robot, RobotState, SensorConfig, WallContact};
use crate::domains::trace::{RobotSnapshot, TraceRecord};
use crate::domains::{
    normalized_distance, DomainConfig, Environment, EvalResult, FitnessComponents, UsageCounter,
};
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Team coordinates fed to the CPPN for robots 0, 1 and 2.
pub const TEAM_COORDS: [f64; 3] = [-1.0, 0.0, 1.0];

/// Robots whose displacement over the return phase stays below this count
/// as "did not move".
const MOVE_EPSILON: f64 = 1.0;

/// Scoring state fed one post-move snapshot per step. Both the live
/// evaluation and trace re-scoring drive this struct, so the two agree
/// bit-for-bit.
struct Scorer<'a> {
    env: &'a Environment,
    config: &'a DomainConfig,
    switch_step: u32,
    advance_score: f64,
    return_score: f64,
    reached_ever: Vec<bool>,
    reached_advance: Vec<bool>,
    positions_at_signal: Option<Vec<Vec2>>,
    last_positions: Vec<Vec2>,
    any_steps: bool,
}

impl<'a> Scorer<'a> {
    fn new(env: &'a Environment, config: &'a DomainConfig) -> Scorer<'a> {
        Scorer {
            env,
            config,
            switch_step: config.total_steps() / 2,
            advance_score: 0.0,
            return_score: 0.0,
            reached_ever: vec![false; env.waypoints.len()],
            reached_advance: vec![false; env.waypoints.len()],
            positions_at_signal: None,
            last_positions: Vec::new(),
            any_steps: false,
        }
    }

    /// Phase of a step: 0 while advancing, 1 after the return signal.
    fn phase(&self, step: u32) -> usize {
        usize::from(step >= self.switch_step)
    }

    /// Greedy nearest-unclaimed-waypoint assignment, robots in index order.
    fn assignment(&self, positions: &[Vec2]) -> Vec<usize> {
        let mut claimed = vec![false; self.env.waypoints.len()];
        let mut out = Vec::with_capacity(positions.len());
        for p in positions {
            let mut best: Option<usize> = None;
            for (w, wp) in self.env.waypoints.iter().enumerate() {
                if claimed[w] {
                    continue;
                }
                if best.is_none_or(|b| p.distance(*wp) < p.distance(self.env.waypoints[b])) {
                    best = Some(w);
                }
            }
            let w = best.expect("more robots than waypoints");
            claimed[w] = true;
            out.push(w);
        }
        out
    }

    fn on_step(&mut self, step: u32, positions: &[Vec2]) {
        self.any_steps = true;
        let phase = self.phase(step);

        for (w, wp) in self.env.waypoints.iter().enumerate() {
            for p in positions {
                if p.distance(*wp) <= self.config.waypoint_radius {
                    self.reached_ever[w] = true;
                    if phase == 0 {
                        self.reached_advance[w] = true;
                    }
                }
            }
        }

        if step + 1 == self.switch_step {
            self.positions_at_signal = Some(positions.to_vec());
        }

        // One scoring event at the end of each second.
        if (step + 1) % self.config.steps_per_second == 0 {
            let goals: Vec<Vec2> = if phase == 0 {
                let assignment = self.assignment(positions);
                assignment.iter().map(|&w| self.env.waypoints[w]).collect()
            } else {
                self.env.starts.iter().map(|s| s.position).collect()
            };
            for (p, goal) in positions.iter().zip(&goals) {
                let d = p.distance(*goal);
                let increment = if d <= self.config.waypoint_radius {
                    1.0
                } else {
                    normalized_distance(self.env.max_distance, d)
                };
                if phase == 0 {
                    self.advance_score += increment;
                } else {
                    self.return_score += increment;
                }
            }
        }

        self.last_positions = positions.to_vec();
    }

    /// Raw accumulated score before end-of-run penalties.
    fn cumulative(&self) -> f64 {
        self.advance_score + self.return_score
    }

    fn finish(self) -> (f64, FitnessComponents) {
        let all_advance = self.reached_advance.iter().all(|&r| r);
        let all_ever = self.reached_ever.iter().all(|&r| r);

        let mut return_score = self.return_score;
        if !all_advance {
            return_score /= 100.0;
        }
        let mut total = self.advance_score + return_score;

        let moved = match (&self.positions_at_signal, self.any_steps) {
            (Some(at_signal), _) => at_signal
                .iter()
                .zip(&self.last_positions)
                .all(|(a, b)| a.distance(*b) >= MOVE_EPSILON),
            // No return phase happened; the movement penalty cannot apply.
            _ => true,
        };
        if !moved || !all_ever {
            total /= 10.0;
        }

        let visited = self.reached_ever.iter().filter(|&&r| r).count();
        (
            total,
            FitnessComponents {
                waypoints_visited: Some(visited),
                ..FitnessComponents::default()
            },
        )
    }
}

/// Evaluate three controllers (decoded with team coordinates -1, 0, 1) on
/// one team patrol episode. Robots sense walls only and never collide with
/// each other.
pub fn evaluate_team_patrol(
    policies: &mut [&mut dyn AgentPolicy],
    env: &Environment,
    config: &DomainConfig,
    record_trace: bool,
) -> Result<EvalResult> {
    if policies.len() != 3 || env.starts.len() != 3 {
        return Err(Error::config(format!(
            "team patrol needs exactly 3 controllers and 3 start poses, got {} and {}",
            policies.len(),
            env.starts.len()
        )));
    }
    let sensors = SensorConfig::from_domain(config);
    let mut robots: Vec<RobotState> = env
        .starts
        .iter()
        .map(|s| RobotState::at(s.position, s.heading))
        .collect();
    let mut scorer = Scorer::new(env, config);
    let mut usage: Vec<UsageCounter> = vec![UsageCounter::default(); 3];
    let mut trace = Vec::new();
    let mut sensor_buf = Vec::new();

    for step in 0..config.total_steps() {
        let phase = scorer.phase(step);
        let mut snapshots = Vec::with_capacity(3);
        for (i, policy) in policies.iter_mut().enumerate() {
            sensor_buf.clear();
            rangefinders(env, &robots[i], &sensors, &mut sensor_buf);
            if config.signal_input {
                sensor_buf.push(phase as f64);
            }
            let action = policy.act(&sensor_buf, phase)?;
            usage[i].record(action.chosen_brain);
            robots[i] = step_robot(env, config, &robots[i], action.motor, WallContact::Stop);
            snapshots.push(RobotSnapshot {
                position: robots[i].position,
                heading: robots[i].heading,
                chosen_brain: action.chosen_brain,
            });
        }
        let positions: Vec<Vec2> = robots.iter().map(|r| r.position).collect();
        scorer.on_step(step, &positions);
        if record_trace {
            trace.push(TraceRecord {
                step,
                task: phase,
                robots: snapshots,
                cumulative_fitness: scorer.cumulative(),
            });
        }
    }

    let (fitness, components) = scorer.finish();
    let brains_used = usage.iter().map(UsageCounter::brains_used).max().unwrap_or(0);
    Ok(EvalResult {
        fitness,
        components,
        trace,
        brains_used,
    })
}

/// Re-score a recorded team patrol trace. Produces exactly the fitness the
/// original evaluation returned, provided env and config are unchanged.
pub fn rescore_team_patrol(
    records: &[TraceRecord],
    env: &Environment,
    config: &DomainConfig,
) -> Result<EvalResult> {
    let mut scorer = Scorer::new(env, config);
    let mut usage: Vec<UsageCounter> = vec![UsageCounter::default(); 3];
    for record in records {
        if record.robots.len() != 3 {
            return Err(Error::config("team patrol traces carry 3 robots per record".to_string()));
        }
        let positions: Vec<Vec2> = record.robots.iter().map(|r| r.position).collect();
        for (i, r) in record.robots.iter().enumerate() {
            usage[i].record(r.chosen_brain);
        }
        scorer.on_step(record.step, &positions);
    }
    let (fitness, components) = scorer.finish();
    let brains_used = usage.iter().map(UsageCounter::brains_used).max().unwrap_or(0);
    Ok(EvalResult {
        fitness,
        components,
        trace: Vec::new(),
        brains_used,
    })
}
