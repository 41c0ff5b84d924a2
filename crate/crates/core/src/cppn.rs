//! Compilation of genomes into executable feedforward evaluation plans.

use crate::error::{Error, Result};
use crate::genome::{DecodeFamily, Genome, NodeId, NodeRole, OutputRole};
use crate::Activation;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
struct PlanNode {
    /// `None` for pass-through inputs.
    activation: Option<Activation>,
    /// Range into the flat edge list.
    edges_start: u32,
    edges_len: u32,
}

/// An executable feedforward plan derived from a [`Genome`].
///
/// Immutable and safe to evaluate from many threads; callers provide their
/// own scratch buffer (or use the allocating [`CompiledCppn::evaluate`]).
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCppn {
    num_inputs: usize,
    num_modules: u32,
    family: DecodeFamily,
    team_input: bool,
    /// Nodes in evaluation order: inputs (by id) first, then the remaining
    /// nodes in a deterministic topological order.
    nodes: Vec<PlanNode>,
    /// Flat incoming edge list: (index of source in `nodes`, weight).
    edges: Vec<(u32, f64)>,
    /// Output lookup keyed by `module * 3 + role`, giving a node index.
    output_slots: Vec<Option<u32>>,
}

/// Evaluation results, keyed by (module index, output role).
#[derive(Debug, Clone, PartialEq)]
pub struct CppnOutputs {
    entries: Vec<(u32, OutputRole, f64)>,
}

impl CppnOutputs {
    pub fn get(&self, module: u32, role: OutputRole) -> Option<f64> {
        self.entries
            .iter()
            .find(|(m, r, _)| *m == module && *r == role)
            .map(|&(_, _, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(u32, OutputRole, f64)> {
        self.entries.iter()
    }
}

fn role_slot(role: OutputRole) -> usize {
    match role {
        OutputRole::Weight => 0,
        OutputRole::Bias => 1,
        OutputRole::Preference => 2,
    }
}

impl CompiledCppn {
    /// Build the evaluation plan. Fails if the genome is invalid (including
    /// any cycle among enabled links).
    pub fn compile(genome: &Genome) -> Result<CompiledCppn> {
        genome.validate()?;
        let order = genome
            .topo_order()
            .ok_or_else(|| Error::validation("cannot compile a cyclic genome".to_string()))?;

        // Inputs first (by id), then everything else in topological order.
        let inputs = genome.input_ids();
        let mut eval_order: Vec<NodeId> = inputs.clone();
        eval_order.extend(order.iter().copied().filter(|id| !inputs.contains(id)));
        let position: HashMap<NodeId, u32> = eval_order
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i as u32))
            .collect();

        // Incoming edges bucketed per target, preserving gene-list order so
        // summation order is reproducible across structurally equal genomes.
        let mut incoming: HashMap<NodeId, Vec<(u32, f64)>> = HashMap::new();
        for link in genome.links.iter().filter(|l| l.enabled) {
            incoming
                .entry(link.target)
                .or_default()
                .push((position[&link.source], link.weight));
        }

        let mut nodes = Vec::with_capacity(eval_order.len());
        let mut edges = Vec::new();
        let mut output_slots = vec![None; genome.num_modules as usize * 3];
        for &id in &eval_order {
            let gene = genome.node(id).expect("validated");
            let start = edges.len() as u32;
            if let Some(list) = incoming.get(&id) {
                edges.extend_from_slice(list);
            }
            nodes.push(PlanNode {
                activation: gene.activation(),
                edges_start: start,
                edges_len: edges.len() as u32 - start,
            });
            if let NodeRole::Output { module, role, .. } = gene.role {
                output_slots[module as usize * 3 + role_slot(role)] = Some(position[&id]);
            }
        }

        Ok(CompiledCppn {
            num_inputs: genome.num_inputs(),
            num_modules: genome.num_modules,
            family: genome.family,
            team_input: genome.team_input,
            nodes,
            edges,
            output_slots,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_modules(&self) -> u32 {
        self.num_modules
    }

    pub fn family(&self) -> DecodeFamily {
        self.family
    }

    pub fn team_input(&self) -> bool {
        self.team_input
    }

    /// Node-value index of an output, if that (module, role) exists.
    pub fn output_index(&self, module: u32, role: OutputRole) -> Option<usize> {
        self.output_slots
            .get(module as usize * 3 + role_slot(role))
            .copied()
            .flatten()
            .map(|i| i as usize)
    }

    /// Run the plan into a caller-owned scratch buffer. The last input must
    /// be the constant bias 1.0 (supplied by the caller).
    pub fn evaluate_into(&self, inputs: &[f64], values: &mut Vec<f64>) -> Result<()> {
        if inputs.len() != self.num_inputs {
            return Err(Error::config(format!(
                "cppn expects {} inputs, got {}",
                self.num_inputs,
                inputs.len()
            )));
        }
        values.clear();
        values.extend_from_slice(inputs);
        for node in &self.nodes[self.num_inputs..] {
            let range =
                node.edges_start as usize..(node.edges_start + node.edges_len) as usize;
            let mut sum = 0.0;
            for &(src, weight) in &self.edges[range] {
                sum += weight * values[src as usize];
            }
            let activation = node.activation.expect("non-input nodes carry activations");
            values.push(activation.apply(sum));
        }
        Ok(())
    }

    /// Evaluate and collect every output as a (module, role) map.
    pub fn evaluate(&self, inputs: &[f64]) -> Result<CppnOutputs> {
        let mut values = Vec::with_capacity(self.nodes.len());
        self.evaluate_into(inputs, &mut values)?;
        let mut entries = Vec::new();
        for module in 0..self.num_modules {
            for role in [OutputRole::Weight, OutputRole::Bias, OutputRole::Preference] {
                if let Some(i) = self.output_index(module, role) {
                    entries.push((module, role, values[i]));
                }
            }
        }
        Ok(CppnOutputs { entries })
    }
}
