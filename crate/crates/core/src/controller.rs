//! Multi-brain agent controllers and brain arbitration.

use crate::error::{Error, Result};
use crate::substrate::BrainNetwork;

/// The three discrete robot actions. Argmax ties break toward the lower
/// index, i.e. left before forward before right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Motor {
    Left,
    Forward,
    Right,
}

impl Motor {
    pub const ALL: [Motor; 3] = [Motor::Left, Motor::Forward, Motor::Right];

    pub fn index(self) -> usize {
        match self {
            Motor::Left => 0,
            Motor::Forward => 1,
            Motor::Right => 2,
        }
    }
}

/// The action selected on one step and the brain that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Action {
    pub motor: Motor,
    pub chosen_brain: usize,
}

/// How the controller decides which brain acts.
#[derive(Debug, Clone, PartialEq)]
pub enum ArbitrationPolicy {
    /// `map[task id] = brain index`; only the mapped brain is activated.
    /// The map must be total over the domain's task ids.
    HumanTaskDivision(Vec<usize>),
    /// All brains are activated on the same inputs; the brain with the
    /// highest preference output acts (ties: lowest brain index).
    PreferenceArgmax,
}

/// Anything that can drive a robot. Implemented by
/// [`MultiBrainController`]; tests use scripted policies.
pub trait AgentPolicy {
    fn act(&mut self, sensors: &[f64], task: usize) -> Result<Action>;
}

/// One or more decoded brains plus an arbitration policy and per-brain
/// usage counters. A controller instance serves a single evaluation at a
/// time; distinct controllers may run in parallel.
#[derive(Debug, Clone)]
pub struct MultiBrainController {
    brains: Vec<BrainNetwork>,
    policy: ArbitrationPolicy,
    usage: Vec<u64>,
    hidden_scratch: Vec<f64>,
    output_scratch: Vec<f64>,
}

impl MultiBrainController {
    pub fn new(brains: Vec<BrainNetwork>, policy: ArbitrationPolicy) -> Result<Self> {
        if brains.is_empty() {
            return Err(Error::config("a controller needs at least one brain".to_string()));
        }
        if matches!(policy, ArbitrationPolicy::PreferenceArgmax)
            && brains.iter().any(|b| b.preference.is_none())
        {
            return Err(Error::config(
                "preference arbitration requires preference weights on every brain".to_string(),
            ));
        }
        let usage = vec![0; brains.len()];
        Ok(MultiBrainController {
            brains,
            policy,
            usage,
            hidden_scratch: Vec::new(),
            output_scratch: Vec::new(),
        })
    }

    pub fn num_brains(&self) -> usize {
        self.brains.len()
    }

    pub fn brains(&self) -> &[BrainNetwork] {
        &self.brains
    }

    /// Per-brain counts of steps on which each brain acted.
    pub fn usage(&self) -> &[u64] {
        &self.usage
    }

    pub fn reset_usage(&mut self) {
        self.usage.fill(0);
    }

    fn argmax_motor(outputs: &[f64]) -> Motor {
        debug_assert_eq!(outputs.len(), 3);
        let mut best = 0;
        for i in 1..outputs.len() {
            if outputs[i] > outputs[best] {
                best = i;
            }
        }
        Motor::ALL[best]
    }
}

impl AgentPolicy for MultiBrainController {
    /// Run one arbitration step. The sensor vector must match the brains'
    /// substrate input arity (including the signal input when configured).
    fn act(&mut self, sensors: &[f64], task: usize) -> Result<Action> {
        if sensors.len() != self.brains[0].num_inputs {
            return Err(Error::config(format!(
                "controller expects {} sensor values, got {}",
                self.brains[0].num_inputs,
                sensors.len()
            )));
        }
        let chosen = match &self.policy {
            ArbitrationPolicy::HumanTaskDivision(map) => {
                let &brain = map.get(task).ok_or_else(|| {
                    Error::config(format!("task id {task} is missing from the task-division map"))
                })?;
                if brain >= self.brains.len() {
                    return Err(Error::config(format!(
                        "task-division map names brain {brain} but only {} exist",
                        self.brains.len()
                    )));
                }
                brain
            }
            ArbitrationPolicy::PreferenceArgmax => {
                let mut best = 0;
                let mut best_pref = f64::NEG_INFINITY;
                for (i, brain) in self.brains.iter().enumerate() {
                    let pref = brain
                        .activate_into(sensors, &mut self.hidden_scratch, &mut self.output_scratch)
                        .expect("preference checked at construction");
                    if pref > best_pref {
                        best_pref = pref;
                        best = i;
                    }
                }
                best
            }
        };

        let brain = &self.brains[chosen];
        brain.activate_into(sensors, &mut self.hidden_scratch, &mut self.output_scratch);
        let motor = Self::argmax_motor(&self.output_scratch);
        self.usage[chosen] += 1;
        Ok(Action {
            motor,
            chosen_brain: chosen,
        })
    }
}

/// Number of brains that acted on at least `used_fraction` of the recorded
/// steps. The reporting convention for "brains used" is 1%.
pub fn brains_used(usage: &[u64], total_steps: u64, used_fraction: f64) -> usize {
    if total_steps == 0 {
        return 0;
    }
    usage
        .iter()
        .filter(|&&u| u as f64 >= used_fraction * total_steps as f64)
        .count()
}

/// The default used-brain reporting threshold.
pub const USED_BRAIN_FRACTION: f64 = 0.01;
