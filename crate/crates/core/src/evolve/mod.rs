//! Generational evolution: elitism, speciated selection, the reproduction
//! mix and per-method mutation wiring.

mod evaluator;
pub mod seed;
mod species;

pub use evaluator::{DomainEvaluator, EvalSummary, GenomeEvaluator};
pub use species::{Speciation, Species};

use crate::domains::DomainKind;
use crate::error::{Error, Result};
use crate::genome::{
    CompatCoefficients, DecodeFamily, Genome, GenomeLayout, InnovationRegistry, ModuleMutation,
    WeightMutation,
};
use rand::Rng;
use rayon::prelude::*;
use seed::slot_rng;
use std::fmt::Write as _;

/// The eight compared methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Standard single-brain decoding (`1M`).
    OneBrain,
    /// Situational policy geometry (`SPG`).
    Spg,
    /// Multitask modules with a human task division (`MT`).
    Multitask,
    /// Two preference modules (`2M`).
    TwoModule,
    /// Three preference modules (`3M`).
    ThreeModule,
    /// Module mutation, lateral-link variant (`MM(P)`).
    MmP,
    /// Module mutation, random-wiring variant (`MM(R)`).
    MmR,
    /// Module mutation, duplication variant (`MM(D)`).
    MmD,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::OneBrain,
        Method::Spg,
        Method::Multitask,
        Method::TwoModule,
        Method::ThreeModule,
        Method::MmP,
        Method::MmR,
        Method::MmD,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Method::OneBrain => "1M",
            Method::Spg => "SPG",
            Method::Multitask => "MT",
            Method::TwoModule => "2M",
            Method::ThreeModule => "3M",
            Method::MmP => "MM(P)",
            Method::MmR => "MM(R)",
            Method::MmD => "MM(D)",
        }
    }

    pub fn family(self) -> DecodeFamily {
        match self {
            Method::OneBrain => DecodeFamily::Single,
            Method::Spg => DecodeFamily::Spg,
            Method::Multitask => DecodeFamily::Multitask,
            _ => DecodeFamily::Preference,
        }
    }

    /// Module count of generation-zero genomes. Fixed-module methods start
    /// with their full count; module-mutation methods start with one.
    pub fn initial_modules(self, domain: DomainKind) -> u32 {
        match self {
            Method::OneBrain | Method::Spg => 1,
            Method::Multitask => domain.multitask_brains(),
            Method::TwoModule => 2,
            Method::ThreeModule => 3,
            Method::MmP | Method::MmR | Method::MmD => 1,
        }
    }

    pub fn module_mutation(self) -> Option<ModuleMutation> {
        match self {
            Method::MmP => Some(ModuleMutation::Previous),
            Method::MmR => Some(ModuleMutation::Random),
            Method::MmD => Some(ModuleMutation::Duplicate),
            _ => None,
        }
    }

    /// Whether the substrate carries the advance/return signal input:
    /// team patrol only, for methods without a human task division.
    pub fn signal_input(self, domain: DomainKind) -> bool {
        domain == DomainKind::TeamPatrol && !matches!(self, Method::Spg | Method::Multitask)
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1M" => Ok(Method::OneBrain),
            "SPG" => Ok(Method::Spg),
            "MT" => Ok(Method::Multitask),
            "2M" => Ok(Method::TwoModule),
            "3M" => Ok(Method::ThreeModule),
            "MM(P)" => Ok(Method::MmP),
            "MM(R)" => Ok(Method::MmR),
            "MM(D)" => Ok(Method::MmD),
            other => Err(Error::config(format!(
                "unknown method `{other}` (expected 1M, SPG, MT, 2M, 3M, MM(P), MM(R) or MM(D))"
            ))),
        }
    }
}

/// Full configuration of one evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub method: Method,
    pub domain: DomainKind,
    pub population: usize,
    pub generations: u32,
    pub elite_fraction: f64,
    pub crossover_fraction: f64,
    pub mutation_fraction: f64,
    /// Per-offspring chance that the weight-mutation operator fires.
    pub weight_mutation_rate: f64,
    pub add_link_rate: f64,
    pub add_node_rate: f64,
    /// Applies only to the MM(*) methods.
    pub module_mutation_rate: f64,
    /// When true, exactly one operator fires per asexual offspring, chosen
    /// with the rates as (normalized) weights. The default treats the rates
    /// as independent draws, so one offspring can receive several
    /// operators.
    pub exclusive_mutation: bool,
    pub compat: CompatCoefficients,
    pub target_species: usize,
    pub initial_compat_threshold: f64,
    pub seed: u64,
    /// Worker threads for fitness evaluation; results are identical to
    /// sequential evaluation at any setting.
    pub jobs: usize,
    /// Stop early once the champion reaches this fitness.
    pub stop_at_fitness: Option<f64>,
    /// Champion snapshot cadence, in generations.
    pub snapshot_every: u32,
}

impl EvolutionConfig {
    pub fn new(method: Method, domain: DomainKind) -> EvolutionConfig {
        EvolutionConfig {
            method,
            domain,
            population: domain.default_population(),
            generations: 2000,
            elite_fraction: 0.2,
            crossover_fraction: 0.4,
            mutation_fraction: 0.4,
            weight_mutation_rate: 0.96,
            add_link_rate: 0.03,
            add_node_rate: 0.01,
            module_mutation_rate: 0.01,
            exclusive_mutation: false,
            compat: CompatCoefficients::default(),
            target_species: 10,
            initial_compat_threshold: 0.5,
            seed: 0,
            jobs: 1,
            stop_at_fitness: None,
            snapshot_every: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return Err(Error::config("population must be positive".to_string()));
        }
        let sum = self.elite_fraction + self.crossover_fraction + self.mutation_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!(
                "elite, crossover and mutation fractions must sum to 1.0, got {sum}"
            )));
        }
        for (name, rate) in [
            ("elite_fraction", self.elite_fraction),
            ("crossover_fraction", self.crossover_fraction),
            ("mutation_fraction", self.mutation_fraction),
            ("weight_mutation_rate", self.weight_mutation_rate),
            ("add_link_rate", self.add_link_rate),
            ("add_node_rate", self.add_node_rate),
            ("module_mutation_rate", self.module_mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::config(format!("{name} must lie in [0, 1], got {rate}")));
            }
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs must be at least 1".to_string()));
        }
        Ok(())
    }

    pub fn genome_layout(&self) -> GenomeLayout {
        GenomeLayout {
            family: self.method.family(),
            team_input: self.domain.uses_team_input(),
            modules: self.method.initial_modules(self.domain),
        }
    }

    /// Reproduction slot counts: (elites, crossover offspring, mutants).
    pub fn slot_counts(&self) -> (usize, usize, usize) {
        let elites = (self.population as f64 * self.elite_fraction).floor() as usize;
        let crossover = (self.population as f64 * self.crossover_fraction).floor() as usize;
        let mutants = self.population - elites - crossover;
        (elites, crossover, mutants)
    }
}

/// One evaluated population member.
#[derive(Debug, Clone)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: f64,
    pub species: u64,
    pub modules: u32,
    pub brains_used: usize,
}

/// One per-generation log record.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub generation: u32,
    pub champion_fitness: f64,
    pub mean_fitness: f64,
    pub species: usize,
    pub champion_modules: u32,
    pub champion_brains_used: usize,
}

impl RunRecord {
    pub const CSV_HEADER: &'static str =
        "generation,champion_fitness,mean_fitness,species,champion_modules,champion_brains_used";

    pub fn to_csv_line(&self) -> String {
        let mut line = String::new();
        write!(
            line,
            "{},{},{},{},{},{}",
            self.generation,
            self.champion_fitness,
            self.mean_fitness,
            self.species,
            self.champion_modules,
            self.champion_brains_used
        )
        .unwrap();
        line
    }
}

/// Mutable state of a run.
pub struct RunState {
    pub generation: u32,
    pub population: Vec<Individual>,
    pub speciation: Speciation,
    pub records: Vec<RunRecord>,
}

impl RunState {
    /// Index of the champion: best fitness, ties to the lower index.
    pub fn champion_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.population.len() {
            if self.population[i].fitness > self.population[best].fitness {
                best = i;
            }
        }
        best
    }

    pub fn champion(&self) -> &Individual {
        &self.population[self.champion_index()]
    }
}

/// Events emitted during a run. File I/O lives behind this trait so the
/// loop itself stays pure.
pub trait RunObserver {
    fn on_generation(&mut self, _record: &RunRecord) -> Result<()> {
        Ok(())
    }
    fn on_snapshot(&mut self, _generation: u32, _champion: &Genome) -> Result<()> {
        Ok(())
    }
}

/// Observer that discards everything.
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// Final outcome of [`run_experiment`].
pub struct RunResult {
    pub records: Vec<RunRecord>,
    pub champion_genome: Genome,
    pub champion_fitness: f64,
}

fn evaluate_population(
    genomes: &[Genome],
    evaluator: &dyn GenomeEvaluator,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Vec<EvalSummary>> {
    match pool {
        Some(pool) => pool.install(|| {
            genomes
                .par_iter()
                .map(|g| evaluator.evaluate(g))
                .collect::<Result<Vec<_>>>()
        }),
        None => genomes.iter().map(|g| evaluator.evaluate(g)).collect(),
    }
}

fn build_record(state: &RunState) -> RunRecord {
    let champion = state.champion();
    let mean = state.population.iter().map(|i| i.fitness).sum::<f64>()
        / state.population.len() as f64;
    RunRecord {
        generation: state.generation,
        champion_fitness: champion.fitness,
        mean_fitness: mean,
        species: state.speciation.count(),
        champion_modules: champion.modules,
        champion_brains_used: champion.brains_used,
    }
}

/// Build and evaluate the generation-zero population.
pub fn initial_state(
    config: &EvolutionConfig,
    evaluator: &dyn GenomeEvaluator,
    pool: Option<&rayon::ThreadPool>,
) -> Result<RunState> {
    config.validate()?;
    let layout = config.genome_layout();
    let genomes: Vec<Genome> = (0..config.population)
        .map(|slot| Genome::initial(layout, &mut slot_rng(config.seed, 0, slot)))
        .collect();
    let summaries = evaluate_population(&genomes, evaluator, pool)?;

    let mut speciation = Speciation::new(config.initial_compat_threshold);
    let ids = speciation.assign(&genomes, &config.compat);
    speciation.adjust_threshold(config.target_species);

    let population = genomes
        .into_iter()
        .zip(summaries)
        .zip(ids)
        .map(|((genome, summary), species)| Individual {
            genome,
            fitness: summary.fitness,
            species,
            modules: summary.modules,
            brains_used: summary.brains_used,
        })
        .collect();

    let mut state = RunState {
        generation: 0,
        population,
        speciation,
        records: Vec::new(),
    };
    state.records.push(build_record(&state));
    Ok(state)
}

/// Binary tournament within one species' member list.
fn tournament(population: &[Individual], members: &[usize], rng: &mut impl Rng) -> usize {
    let a = members[rng.random_range(0..members.len())];
    let b = members[rng.random_range(0..members.len())];
    // Ties resolve to the lower index for determinism.
    if population[b].fitness > population[a].fitness {
        b
    } else if population[a].fitness > population[b].fitness {
        a
    } else {
        a.min(b)
    }
}

/// Fitness-proportional largest-remainder allocation of `slots` across
/// species. Falls back to uniform weights when total fitness is zero.
fn allocate_slots(species: &[Species], population: &[Individual], slots: usize) -> Vec<usize> {
    let weights: Vec<f64> = species
        .iter()
        .map(|s| s.members.iter().map(|&m| population[m].fitness.max(0.0)).sum::<f64>())
        .collect();
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = if total <= 0.0 {
        vec![1.0; species.len()]
    } else {
        weights
    };
    let total: f64 = weights.iter().sum();

    let shares: Vec<f64> = weights.iter().map(|w| w / total * slots as f64).collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    // Hand out remainders largest-first; ties by species order.
    let mut order: Vec<usize> = (0..species.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for i in 0..slots - assigned {
        counts[order[i % order.len()]] += 1;
    }
    counts
}

/// Produce one asexual offspring by applying the configured mutation
/// operators to `parent`.
pub fn mutate_offspring(
    parent: &Genome,
    config: &EvolutionConfig,
    registry: &InnovationRegistry,
    rng: &mut impl Rng,
) -> Result<Genome> {
    let weight_params = WeightMutation::default();
    let module_variant = config.method.module_mutation();

    if config.exclusive_mutation {
        // Exactly one operator, rates as weights.
        let mm_rate = if module_variant.is_some() {
            config.module_mutation_rate
        } else {
            0.0
        };
        let total =
            config.weight_mutation_rate + config.add_link_rate + config.add_node_rate + mm_rate;
        let mut draw = rng.random::<f64>() * total;
        if draw < config.weight_mutation_rate {
            return Ok(parent.mutate_weights(&weight_params, rng));
        }
        draw -= config.weight_mutation_rate;
        if draw < config.add_link_rate {
            return Ok(parent.mutate_add_link(registry, rng));
        }
        draw -= config.add_link_rate;
        if draw < config.add_node_rate {
            return Ok(parent.mutate_add_node(registry, rng));
        }
        let variant = module_variant.expect("mm branch only reachable with an MM method");
        return parent.module_mutation(registry, rng, variant);
    }

    // Independent draws; an offspring can receive several operators.
    let mut child = parent.clone();
    if rng.random::<f64>() < config.weight_mutation_rate {
        child = child.mutate_weights(&weight_params, rng);
    }
    if rng.random::<f64>() < config.add_link_rate {
        child = child.mutate_add_link(registry, rng);
    }
    if rng.random::<f64>() < config.add_node_rate {
        child = child.mutate_add_node(registry, rng);
    }
    if let Some(variant) = module_variant {
        if rng.random::<f64>() < config.module_mutation_rate {
            child = child.module_mutation(registry, rng, variant)?;
        }
    }
    Ok(child)
}

/// Advance the run by one generation: elitist copy, speciated reproduction,
/// evaluation and re-speciation.
pub fn next_generation(
    state: &mut RunState,
    config: &EvolutionConfig,
    evaluator: &dyn GenomeEvaluator,
    registry: &InnovationRegistry,
    pool: Option<&rayon::ThreadPool>,
) -> Result<()> {
    if state.population.is_empty() {
        return Err(Error::config("cannot evolve an empty population".to_string()));
    }
    let next_gen = state.generation + 1;
    let (elite_count, crossover_count, mutant_count) = config.slot_counts();

    // Elites: top fraction by fitness, ties to lower index.
    let mut order: Vec<usize> = (0..state.population.len()).collect();
    order.sort_by(|&a, &b| {
        state.population[b]
            .fitness
            .partial_cmp(&state.population[a].fitness)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut offspring: Vec<Genome> = order[..elite_count]
        .iter()
        .map(|&i| state.population[i].genome.clone())
        .collect();

    // Species slot allocation for both reproduction pools.
    let species = &state.speciation.species;
    let crossover_alloc = allocate_slots(species, &state.population, crossover_count);
    let mutant_alloc = allocate_slots(species, &state.population, mutant_count);

    // Crossover offspring (sexual, no mutation).
    for (s, &count) in crossover_alloc.iter().enumerate() {
        let members = &species[s].members;
        for _ in 0..count {
            let slot = offspring.len();
            let mut rng = slot_rng(config.seed, next_gen, slot);
            let pa = tournament(&state.population, members, &mut rng);
            let pb = tournament(&state.population, members, &mut rng);
            let child = Genome::crossover(
                &state.population[pa].genome,
                &state.population[pb].genome,
                state.population[pa].fitness,
                state.population[pb].fitness,
                &mut rng,
            )?;
            offspring.push(child);
        }
    }

    // Asexual offspring with the configured mutation rates.
    for (s, &count) in mutant_alloc.iter().enumerate() {
        let members = &species[s].members;
        for _ in 0..count {
            let slot = offspring.len();
            let mut rng = slot_rng(config.seed, next_gen, slot);
            let parent = tournament(&state.population, members, &mut rng);
            let child = mutate_offspring(&state.population[parent].genome, config, registry, &mut rng)?;
            offspring.push(child);
        }
    }

    // Reproduction accounting: elites + crossover + mutants = population.
    assert_eq!(
        offspring.len(),
        config.population,
        "reproduction accounting violated: {} elites + {} crossover + {} mutants != {}",
        elite_count,
        crossover_count,
        mutant_count,
        config.population
    );

    let previous_champion = state.champion().fitness;
    let summaries = evaluate_population(&offspring, evaluator, pool)?;
    let ids = state.speciation.assign(&offspring, &config.compat);
    state.speciation.adjust_threshold(config.target_species);

    state.population = offspring
        .into_iter()
        .zip(summaries)
        .zip(ids)
        .map(|((genome, summary), species)| Individual {
            genome,
            fitness: summary.fitness,
            species,
            modules: summary.modules,
            brains_used: summary.brains_used,
        })
        .collect();
    state.generation = next_gen;

    // Champion monotonicity: deterministic evaluation plus elitism can
    // never lose fitness.
    let champion = state.champion().fitness;
    assert!(
        champion >= previous_champion,
        "champion fitness regressed from {previous_champion} to {champion}"
    );

    state.records.push(build_record(state));
    Ok(())
}

/// Run a full experiment. Per-generation records flow through `observer`
/// as they are produced; the champion genome of the final population is
/// returned.
pub fn run_experiment(
    config: &EvolutionConfig,
    evaluator: &dyn GenomeEvaluator,
    observer: &mut dyn RunObserver,
) -> Result<RunResult> {
    config.validate()?;
    let pool = if config.jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.jobs)
                .build()
                .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?,
        )
    } else {
        None
    };
    let pool = pool.as_ref();

    // The registry is pre-seeded with the shared initial structure so that
    // re-added initial links keep their historical numbers.
    let template = Genome::initial(config.genome_layout(), &mut slot_rng(config.seed, 0, 0));
    let registry = InnovationRegistry::seeded_from(&template);

    let mut state = initial_state(config, evaluator, pool)?;
    observer.on_generation(&state.records[0])?;

    for _ in 0..config.generations {
        if config
            .stop_at_fitness
            .is_some_and(|target| state.champion().fitness >= target)
        {
            break;
        }
        next_generation(&mut state, config, evaluator, &registry, pool)?;
        let record = state.records.last().expect("pushed by next_generation");
        observer.on_generation(record)?;
        if config.snapshot_every > 0 && state.generation % config.snapshot_every == 0 {
            observer.on_snapshot(state.generation, &state.champion().genome)?;
        }
    }

    let champion = state.champion();
    Ok(RunResult {
        champion_fitness: champion.fitness,
        champion_genome: champion.genome.clone(),
        records: state.records,
    })
}
