//! CPPN genotypes and variation operators.
//!
//! A [`Genome`] is an immutable value: every operator returns a new genome
//! and leaves its input untouched. Structural additions are coordinated
//! through an [`InnovationRegistry`] so that identical structural changes
//! receive identical innovation numbers and node ids across a population.

mod ops;
mod registry;
mod serial;

pub use ops::{CompatCoefficients, ModuleMutation, WeightMutation};
pub use registry::InnovationRegistry;

use crate::activation::Activation;
use crate::error::{Error, Result};
use rand::Rng;
use std::collections::{HashMap, HashSet};
use std::fmt;

/// Identifier of a node gene. Unique within a genome; shared across genomes
/// for structurally identical nodes (registry contract).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

/// Historical marker of a link gene, assigned by the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Innovation(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which CPPN output a given output node drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputRole {
    /// Link-weight output (`W`).
    Weight,
    /// Neuron-bias output (`B`).
    Bias,
    /// Preference-link output (`P`); present only in preference-family genomes.
    Preference,
}

impl OutputRole {
    pub fn token(self) -> &'static str {
        match self {
            OutputRole::Weight => "W",
            OutputRole::Bias => "B",
            OutputRole::Preference => "P",
        }
    }
}

/// Structural role of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeRole {
    /// Pass-through input. Inputs are ordered by node id as
    /// `(x1, y1, x2, y2, [S], [T], bias)`.
    Input,
    Hidden {
        activation: Activation,
    },
    Output {
        activation: Activation,
        module: u32,
        role: OutputRole,
    },
}

/// One node gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGene {
    pub id: NodeId,
    pub role: NodeRole,
}

impl NodeGene {
    pub fn is_input(&self) -> bool {
        matches!(self.role, NodeRole::Input)
    }

    pub fn is_output(&self) -> bool {
        matches!(self.role, NodeRole::Output { .. })
    }

    pub fn activation(&self) -> Option<Activation> {
        match self.role {
            NodeRole::Input => None,
            NodeRole::Hidden { activation } | NodeRole::Output { activation, .. } => {
                Some(activation)
            }
        }
    }
}

/// One link gene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGene {
    pub innovation: Innovation,
    pub source: NodeId,
    pub target: NodeId,
    pub weight: f64,
    pub enabled: bool,
}

/// The substrate-decoding family a genome is built for. Determines the CPPN
/// input layout (`Spg` adds the situation input `S`) and whether output
/// modules carry a preference output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeFamily {
    Single,
    Spg,
    Multitask,
    Preference,
}

impl DecodeFamily {
    pub fn uses_preference(self) -> bool {
        matches!(self, DecodeFamily::Preference)
    }

    pub fn uses_situation_input(self) -> bool {
        matches!(self, DecodeFamily::Spg)
    }

    pub fn token(self) -> &'static str {
        match self {
            DecodeFamily::Single => "single",
            DecodeFamily::Spg => "spg",
            DecodeFamily::Multitask => "multitask",
            DecodeFamily::Preference => "preference",
        }
    }
}

impl std::str::FromStr for DecodeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(DecodeFamily::Single),
            "spg" => Ok(DecodeFamily::Spg),
            "multitask" => Ok(DecodeFamily::Multitask),
            "preference" => Ok(DecodeFamily::Preference),
            other => Err(Error::config(format!("unknown decode family `{other}`"))),
        }
    }
}

/// Input layout and module count used to build initial genomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenomeLayout {
    pub family: DecodeFamily,
    /// Whether the CPPN takes a team coordinate `T` (multi-agent domains).
    pub team_input: bool,
    /// Number of output modules at generation zero.
    pub modules: u32,
}

/// A CPPN genotype.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub nodes: Vec<NodeGene>,
    pub links: Vec<LinkGene>,
    pub num_modules: u32,
    pub family: DecodeFamily,
    pub team_input: bool,
}

impl Genome {
    /// Number of CPPN inputs: 4 coordinates + bias, plus optional `S`/`T`.
    pub fn num_inputs(&self) -> usize {
        4 + usize::from(self.family.uses_situation_input()) + usize::from(self.team_input) + 1
    }

    /// Build the canonical initial genome: every output node connected to
    /// every input, weights uniform in [-1, 1], no hidden nodes. Node ids
    /// and link innovations are assigned deterministically so all initial
    /// genomes of one experiment share structure.
    pub fn initial(layout: GenomeLayout, rng: &mut impl Rng) -> Genome {
        assert!(layout.modules >= 1, "a genome needs at least one module");
        let num_inputs =
            4 + usize::from(layout.family.uses_situation_input()) + usize::from(layout.team_input) + 1;

        let mut nodes = Vec::new();
        for i in 0..num_inputs {
            nodes.push(NodeGene {
                id: NodeId(i as u64),
                role: NodeRole::Input,
            });
        }

        let roles: &[OutputRole] = if layout.family.uses_preference() {
            &[OutputRole::Weight, OutputRole::Bias, OutputRole::Preference]
        } else {
            &[OutputRole::Weight, OutputRole::Bias]
        };

        let mut next_id = num_inputs as u64;
        let mut links = Vec::new();
        let mut next_innovation = 0u64;
        for module in 0..layout.modules {
            for &role in roles {
                let id = NodeId(next_id);
                next_id += 1;
                let activation = Activation::ALL[rng.random_range(0..Activation::ALL.len())];
                nodes.push(NodeGene {
                    id,
                    role: NodeRole::Output {
                        activation,
                        module,
                        role,
                    },
                });
                for input in 0..num_inputs {
                    links.push(LinkGene {
                        innovation: Innovation(next_innovation),
                        source: NodeId(input as u64),
                        target: id,
                        weight: rng.random_range(-1.0..=1.0),
                        enabled: true,
                    });
                    next_innovation += 1;
                }
            }
        }

        Genome {
            nodes,
            links,
            num_modules: layout.modules,
            family: layout.family,
            team_input: layout.team_input,
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Input node ids in CPPN input order.
    pub fn input_ids(&self) -> Vec<NodeId> {
        let mut ids: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.is_input())
            .map(|n| n.id)
            .collect();
        ids.sort();
        ids
    }

    /// The output node of `module` with the given role, if present.
    pub fn output_node(&self, module: u32, role: OutputRole) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| {
            matches!(n.role, NodeRole::Output { module: m, role: r, .. } if m == module && r == role)
        })
    }

    /// Enabled incoming links of `target`, in gene-list order.
    pub fn incoming(&self, target: NodeId) -> impl Iterator<Item = &LinkGene> {
        self.links
            .iter()
            .filter(move |l| l.enabled && l.target == target)
    }

    /// Topological order of all nodes over enabled links, or `None` if the
    /// enabled subgraph contains a cycle. Deterministic: ties are broken by
    /// node id.
    pub fn topo_order(&self) -> Option<Vec<NodeId>> {
        let mut ids: Vec<NodeId> = self.nodes.iter().map(|n| n.id).collect();
        ids.sort();
        let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

        let mut indegree = vec![0usize; ids.len()];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
        for link in self.links.iter().filter(|l| l.enabled) {
            let (Some(&s), Some(&t)) = (index.get(&link.source), index.get(&link.target)) else {
                return None;
            };
            indegree[t] += 1;
            out[s].push(t);
        }

        // Kahn's algorithm with an ordered frontier for determinism.
        let mut frontier: Vec<usize> = (0..ids.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(ids.len());
        while let Some(&i) = frontier.first() {
            frontier.remove(0);
            order.push(ids[i]);
            for &t in &out[i] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    let pos = frontier.partition_point(|&f| f < t);
                    frontier.insert(pos, t);
                }
            }
        }
        (order.len() == ids.len()).then_some(order)
    }

    /// Whether adding an enabled link `source -> target` would close a cycle.
    pub fn would_create_cycle(&self, source: NodeId, target: NodeId) -> bool {
        if source == target {
            return true;
        }
        // DFS from `target` along enabled links; a path back to `source`
        // means the new link would close a loop.
        let mut stack = vec![target];
        let mut seen = HashSet::new();
        while let Some(n) = stack.pop() {
            if n == source {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            for l in self.links.iter().filter(|l| l.enabled && l.source == n) {
                stack.push(l.target);
            }
        }
        false
    }

    /// Check every structural invariant; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for n in &self.nodes {
            if !ids.insert(n.id) {
                return Err(Error::validation(format!("duplicate node id {}", n.id)));
            }
        }

        let expected_inputs = self.num_inputs();
        let actual_inputs = self.nodes.iter().filter(|n| n.is_input()).count();
        if actual_inputs != expected_inputs {
            return Err(Error::validation(format!(
                "expected {expected_inputs} input nodes, found {actual_inputs}"
            )));
        }

        // Per-module output coverage: W and B exactly once, P exactly once
        // iff the family uses preference neurons.
        let mut coverage: HashMap<u32, Vec<OutputRole>> = HashMap::new();
        for n in &self.nodes {
            if let NodeRole::Output { module, role, .. } = n.role {
                coverage.entry(module).or_default().push(role);
            }
        }
        if coverage.len() as u32 != self.num_modules {
            return Err(Error::validation(format!(
                "num_modules is {} but output nodes cover {} module indices",
                self.num_modules,
                coverage.len()
            )));
        }
        for module in 0..self.num_modules {
            let Some(roles) = coverage.get(&module) else {
                return Err(Error::validation(format!("module {module} has no output nodes")));
            };
            let count = |r: OutputRole| roles.iter().filter(|&&x| x == r).count();
            if count(OutputRole::Weight) != 1 || count(OutputRole::Bias) != 1 {
                return Err(Error::validation(format!(
                    "module {module} must have exactly one W and one B output"
                )));
            }
            let want_p = usize::from(self.family.uses_preference());
            if count(OutputRole::Preference) != want_p {
                return Err(Error::validation(format!(
                    "module {module} preference output mismatch for family {}",
                    self.family.token()
                )));
            }
        }

        let mut innovations = HashSet::new();
        let mut enabled_pairs = HashSet::new();
        for l in &self.links {
            if !innovations.insert(l.innovation) {
                return Err(Error::validation(format!(
                    "duplicate innovation {}",
                    l.innovation
                )));
            }
            if !ids.contains(&l.source) || !ids.contains(&l.target) {
                return Err(Error::validation(format!(
                    "link {} references a missing node",
                    l.innovation
                )));
            }
            let target = self.node(l.target).expect("checked above");
            if target.is_input() {
                return Err(Error::validation(format!(
                    "link {} targets input node {}",
                    l.innovation, l.target
                )));
            }
            if l.enabled && !enabled_pairs.insert((l.source, l.target)) {
                return Err(Error::validation(format!(
                    "duplicate enabled link {} -> {}",
                    l.source, l.target
                )));
            }
            if !l.weight.is_finite() {
                return Err(Error::validation(format!(
                    "link {} has non-finite weight",
                    l.innovation
                )));
            }
        }

        if self.topo_order().is_none() {
            return Err(Error::validation("enabled link graph contains a cycle".to_string()));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    pub fn layout(family: DecodeFamily, team: bool, modules: u32) -> GenomeLayout {
        GenomeLayout {
            family,
            team_input: team,
            modules,
        }
    }

    /// A genome randomly grown by a handful of structural and weight
    /// mutations, for property-style tests.
    pub fn random_genome(
        family: DecodeFamily,
        team: bool,
        modules: u32,
        steps: usize,
        rng: &mut ChaCha8Rng,
    ) -> Genome {
        let mut g = Genome::initial(layout(family, team, modules), rng);
        let registry = InnovationRegistry::seeded_from(&g);
        for _ in 0..steps {
            g = match rng.random_range(0..4u32) {
                0 => g.mutate_weights(&WeightMutation::default(), rng),
                1 => g.mutate_add_link(&registry, rng),
                2 => g.mutate_add_node(&registry, rng),
                _ if family.uses_preference() => g
                    .module_mutation(&registry, rng, ModuleMutation::Duplicate)
                    .unwrap(),
                _ => g.mutate_weights(&WeightMutation::default(), rng),
            };
        }
        g
    }
}
