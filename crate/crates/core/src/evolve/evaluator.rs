//! Wiring from (method, domain) to decoded controllers and evaluations.

use crate::controller::{AgentPolicy, ArbitrationPolicy, MultiBrainController};
use crate::cppn::CompiledCppn;
use crate::domains::{
    evaluate_dual_task, evaluate_lone_patrol, evaluate_team_patrol, evaluate_two_rooms,
    DomainConfig, DomainKind, Environment, EvalResult, TEAM_COORDS,
};
use crate::error::{Error, Result};
use crate::evolve::Method;
use crate::genome::Genome;
use crate::substrate::{decode, DecodeKind, DecodeMode, SubstrateSpec};

/// What the evolution loop needs to know about one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub fitness: f64,
    pub modules: u32,
    pub brains_used: usize,
}

/// Fitness source for the evolution loop. Implementations must be pure:
/// the same genome always maps to the same summary.
pub trait GenomeEvaluator: Sync {
    fn evaluate(&self, genome: &Genome) -> Result<EvalSummary>;
}

/// Evaluates genomes by decoding them for a (method, domain) pair and
/// running the domain simulation.
pub struct DomainEvaluator {
    method: Method,
    config: DomainConfig,
    env: Environment,
    env_b: Option<Environment>,
    spec: SubstrateSpec,
}

impl DomainEvaluator {
    /// `env_b` is the foraging environment and is required (only) by the
    /// dual-task domain. The substrate signal input is derived from the
    /// method: it exists in team patrol for methods without a human task
    /// division.
    pub fn new(
        method: Method,
        mut config: DomainConfig,
        env: Environment,
        env_b: Option<Environment>,
    ) -> Result<DomainEvaluator> {
        config.signal_input = method.signal_input(config.domain);
        if config.domain == DomainKind::DualTask && env_b.is_none() {
            return Err(Error::config("dual task needs a second (foraging) environment".to_string()));
        }
        if config.domain == DomainKind::TeamPatrol && env.starts.len() != 3 {
            return Err(Error::config("team patrol environments carry 3 start poses".to_string()));
        }
        let spec = match config.domain {
            DomainKind::TeamPatrol | DomainKind::LonePatrol => {
                SubstrateSpec::patrol(config.signal_input)
            }
            DomainKind::DualTask | DomainKind::TwoRooms => SubstrateSpec::dual_task(),
        };
        Ok(DomainEvaluator {
            method,
            config,
            env,
            env_b,
            spec,
        })
    }

    pub fn with_defaults(method: Method, domain: DomainKind) -> Result<DomainEvaluator> {
        let (env, env_b) = Environment::for_domain(domain);
        DomainEvaluator::new(method, DomainConfig::defaults(domain), env, env_b)
    }

    pub fn config(&self) -> &DomainConfig {
        &self.config
    }

    pub fn environments(&self) -> (&Environment, Option<&Environment>) {
        (&self.env, self.env_b.as_ref())
    }

    fn arbitration(&self, brains: usize) -> ArbitrationPolicy {
        match self.method {
            Method::OneBrain => {
                ArbitrationPolicy::HumanTaskDivision(vec![0; self.config.domain.task_count()])
            }
            // Situation values and multitask modules are listed in task
            // order, so the task-division map is the identity.
            Method::Spg | Method::Multitask => {
                ArbitrationPolicy::HumanTaskDivision((0..brains).collect())
            }
            _ => ArbitrationPolicy::PreferenceArgmax,
        }
    }

    /// Build the controller for one agent; `team` is the agent's coordinate
    /// in multi-agent domains.
    pub fn controller(&self, cppn: &CompiledCppn, team: Option<f64>) -> Result<MultiBrainController> {
        let kind = self.decode_kind_for(cppn);
        let mode = DecodeMode {
            kind,
            team_coord: team,
        };
        let brains = decode(cppn, &self.spec, &mode)?;
        let policy = self.arbitration(brains.len());
        MultiBrainController::new(brains, policy)
    }

    fn decode_kind_for(&self, cppn: &CompiledCppn) -> DecodeKind {
        match self.method {
            Method::OneBrain => DecodeKind::SingleBrain,
            Method::Spg => DecodeKind::Spg(self.config.domain.spg_situations()),
            Method::Multitask => DecodeKind::Multitask(self.config.domain.multitask_brains()),
            Method::TwoModule => DecodeKind::Preference(2),
            Method::ThreeModule => DecodeKind::Preference(3),
            Method::MmP | Method::MmR | Method::MmD => DecodeKind::Preference(cppn.num_modules()),
        }
    }

    /// Run one full evaluation, optionally recording the trace.
    pub fn evaluate_full(&self, genome: &Genome, record_trace: bool) -> Result<EvalResult> {
        let cppn = CompiledCppn::compile(genome)?;
        match self.config.domain {
            DomainKind::TeamPatrol => {
                let mut controllers = TEAM_COORDS
                    .iter()
                    .map(|&t| self.controller(&cppn, Some(t)))
                    .collect::<Result<Vec<_>>>()?;
                let mut policies: Vec<&mut dyn AgentPolicy> = controllers
                    .iter_mut()
                    .map(|c| c as &mut dyn AgentPolicy)
                    .collect();
                evaluate_team_patrol(&mut policies, &self.env, &self.config, record_trace)
            }
            DomainKind::LonePatrol => {
                let mut controller = self.controller(&cppn, None)?;
                evaluate_lone_patrol(&mut controller, &self.env, &self.config, record_trace)
            }
            DomainKind::DualTask => {
                let mut controller = self.controller(&cppn, None)?;
                let forage = self.env_b.as_ref().expect("validated in new");
                evaluate_dual_task(&mut controller, &self.env, forage, &self.config, record_trace)
            }
            DomainKind::TwoRooms => {
                let mut controller = self.controller(&cppn, None)?;
                evaluate_two_rooms(&mut controller, &self.env, &self.config, record_trace)
            }
        }
    }
}

impl GenomeEvaluator for DomainEvaluator {
    fn evaluate(&self, genome: &Genome) -> Result<EvalSummary> {
        let result = self.evaluate_full(genome, false)?;
        Ok(EvalSummary {
            fitness: result.fitness,
            modules: genome.num_modules,
            brains_used: result.brains_used,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::seed::slot_rng;
    use crate::genome::GenomeLayout;

    fn initial_genome(method: Method, domain: DomainKind, seed: u64) -> Genome {
        let layout = GenomeLayout {
            family: method.family(),
            team_input: domain.uses_team_input(),
            modules: method.initial_modules(domain),
        };
        Genome::initial(layout, &mut slot_rng(seed, 0, 0))
    }

    #[test]
    fn every_method_evaluates_on_every_domain() {
        for domain in DomainKind::ALL {
            for method in Method::ALL {
                let evaluator = DomainEvaluator::with_defaults(method, domain).unwrap();
                let genome = initial_genome(method, domain, 11);
                let summary = evaluator.evaluate(&genome).unwrap_or_else(|e| {
                    panic!("{} on {} failed: {e}", method.token(), domain.token())
                });
                assert!(summary.fitness.is_finite());
                assert!(summary.fitness >= 0.0);
                assert!(summary.brains_used >= 1);
            }
        }
    }

    #[test]
    fn evaluation_is_reproducible() {
        let evaluator = DomainEvaluator::with_defaults(Method::Multitask, DomainKind::DualTask).unwrap();
        let genome = initial_genome(Method::Multitask, DomainKind::DualTask, 5);
        let a = evaluator.evaluate(&genome).unwrap();
        let b = evaluator.evaluate(&genome).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signal_input_is_wired_per_method() {
        let pref = DomainEvaluator::with_defaults(Method::TwoModule, DomainKind::TeamPatrol).unwrap();
        assert!(pref.config().signal_input);
        let single = DomainEvaluator::with_defaults(Method::OneBrain, DomainKind::TeamPatrol).unwrap();
        assert!(single.config().signal_input);
        let mt = DomainEvaluator::with_defaults(Method::Multitask, DomainKind::TeamPatrol).unwrap();
        assert!(!mt.config().signal_input);
        let lone = DomainEvaluator::with_defaults(Method::OneBrain, DomainKind::LonePatrol).unwrap();
        assert!(!lone.config().signal_input);
    }
}
