//! Variation operators and speciation distance.

use super::{
    DecodeFamily, Genome, InnovationRegistry, LinkGene, NodeGene, NodeId, NodeRole, OutputRole,
};
use crate::activation::Activation;
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::collections::HashMap;

/// Per-link weight mutation parameters.
#[derive(Debug, Clone, Copy)]
pub struct WeightMutation {
    /// Probability that a link's weight is perturbed.
    pub perturb_prob: f64,
    /// Standard deviation of the zero-mean Gaussian perturbation.
    pub sigma: f64,
    /// Probability, within the non-perturbed remainder, that the weight is
    /// replaced uniformly in [-1, 1].
    pub replace_prob: f64,
}

impl Default for WeightMutation {
    fn default() -> Self {
        WeightMutation {
            perturb_prob: 0.8,
            sigma: 0.3,
            replace_prob: 0.05,
        }
    }
}

/// Module-mutation variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleMutation {
    /// `MM(P)`: each new output node takes one weight-1.0 lateral link from
    /// the corresponding output node of a randomly chosen existing module.
    Previous,
    /// `MM(R)`: each new output node takes links from random non-output
    /// nodes with random weights; the link count mirrors the corresponding
    /// node of a randomly chosen existing module.
    Random,
    /// `MM(D)`: each new output node takes exact copies of every incoming
    /// link of the corresponding node of a randomly chosen existing module,
    /// so the new brain behaves identically.
    Duplicate,
}

/// Coefficients of the speciation distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompatCoefficients {
    pub nodes: f64,
    pub links: f64,
    pub weights: f64,
}

impl Default for CompatCoefficients {
    fn default() -> Self {
        CompatCoefficients {
            nodes: 1.0,
            links: 1.0,
            weights: 0.1,
        }
    }
}

impl Genome {
    /// Perturb or replace enabled link weights; topology is unchanged.
    ///
    /// Draw order per enabled link, in gene-list order: one uniform gate
    /// draw; if it fires (`< perturb_prob`) one Gaussian sample; otherwise a
    /// second uniform gate draw and, if that fires (`< replace_prob`), one
    /// uniform weight in [-1, 1].
    pub fn mutate_weights(&self, params: &WeightMutation, rng: &mut impl Rng) -> Genome {
        let normal = Normal::new(0.0, params.sigma).expect("sigma must be finite");
        let mut child = self.clone();
        for link in child.links.iter_mut().filter(|l| l.enabled) {
            if rng.random::<f64>() < params.perturb_prob {
                link.weight += normal.sample(rng);
            } else if rng.random::<f64>() < params.replace_prob {
                link.weight = rng.random_range(-1.0..=1.0);
            }
        }
        child
    }

    /// All (source, target) pairs that could legally receive a new link:
    /// source is an input or hidden node, target a hidden or output node,
    /// no gene for the pair exists, and the link would not close a cycle.
    /// Sorted by id for determinism.
    pub fn legal_link_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut sources: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| !n.is_output())
            .map(|n| n.id)
            .collect();
        sources.sort();
        let mut targets: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| !n.is_input())
            .map(|n| n.id)
            .collect();
        targets.sort();

        let existing: std::collections::HashSet<(NodeId, NodeId)> =
            self.links.iter().map(|l| (l.source, l.target)).collect();

        let mut pairs = Vec::new();
        for &s in &sources {
            for &t in &targets {
                if s == t || existing.contains(&(s, t)) {
                    continue;
                }
                if self.would_create_cycle(s, t) {
                    continue;
                }
                pairs.push((s, t));
            }
        }
        pairs
    }

    /// Add one enabled link between a uniformly chosen legal pair, with a
    /// weight uniform in [-1, 1]. A saturated topology (no legal pair)
    /// returns the genome unchanged.
    pub fn mutate_add_link(&self, registry: &InnovationRegistry, rng: &mut impl Rng) -> Genome {
        let pairs = self.legal_link_pairs();
        if pairs.is_empty() {
            return self.clone();
        }
        let (source, target) = pairs[rng.random_range(0..pairs.len())];
        let mut child = self.clone();
        child.links.push(LinkGene {
            innovation: registry.link_innovation(source, target),
            source,
            target,
            weight: rng.random_range(-1.0..=1.0),
            enabled: true,
        });
        child
    }

    /// Split a uniformly chosen enabled link: the link is disabled and a new
    /// hidden node with a uniformly chosen activation is inserted. The link
    /// into the new node gets weight 1.0, the link out inherits the old
    /// weight. With no enabled links the genome is returned unchanged.
    pub fn mutate_add_node(&self, registry: &InnovationRegistry, rng: &mut impl Rng) -> Genome {
        let enabled: Vec<usize> = self
            .links
            .iter()
            .enumerate()
            .filter(|(_, l)| l.enabled)
            .map(|(i, _)| i)
            .collect();
        if enabled.is_empty() {
            return self.clone();
        }
        let idx = enabled[rng.random_range(0..enabled.len())];
        let old = self.links[idx];

        // Find the first occurrence index whose node id is not yet present,
        // so re-splitting the same historical link stays collision-free.
        let mut occurrence = 0;
        let record = loop {
            let record = registry.split_link(old.innovation, occurrence);
            if self.node(record.node).is_none() {
                break record;
            }
            occurrence += 1;
        };

        let activation = Activation::ALL[rng.random_range(0..Activation::ALL.len())];
        let mut child = self.clone();
        child.links[idx].enabled = false;
        child.nodes.push(NodeGene {
            id: record.node,
            role: NodeRole::Hidden { activation },
        });
        child.links.push(LinkGene {
            innovation: record.in_link,
            source: old.source,
            target: record.node,
            weight: 1.0,
            enabled: true,
        });
        child.links.push(LinkGene {
            innovation: record.out_link,
            source: record.node,
            target: old.target,
            weight: old.weight,
            enabled: true,
        });
        child
    }

    /// Add one output module (W, B, P) wired according to `variant`.
    ///
    /// Only preference-family genomes may grow modules; the preference
    /// output is what lets the controller arbitrate the new brain.
    pub fn module_mutation(
        &self,
        registry: &InnovationRegistry,
        rng: &mut impl Rng,
        variant: ModuleMutation,
    ) -> Result<Genome> {
        if self.family != DecodeFamily::Preference {
            return Err(Error::config(format!(
                "module mutation requires the preference decode family, got `{}`",
                self.family.token()
            )));
        }
        let source_module = rng.random_range(0..self.num_modules);
        let new_module = self.num_modules;

        let mut child = self.clone();
        child.num_modules += 1;

        for role in [OutputRole::Weight, OutputRole::Bias, OutputRole::Preference] {
            let counterpart = self
                .output_node(source_module, role)
                .expect("validated genomes carry every output role")
                .id;
            let new_id = registry.module_node(new_module, role);
            let activation = match variant {
                // Duplicate must reproduce the source brain exactly, so the
                // output's activation is copied as well.
                ModuleMutation::Duplicate => self
                    .node(counterpart)
                    .and_then(|n| n.activation())
                    .expect("output nodes always carry an activation"),
                _ => Activation::ALL[rng.random_range(0..Activation::ALL.len())],
            };
            child.nodes.push(NodeGene {
                id: new_id,
                role: NodeRole::Output {
                    activation,
                    module: new_module,
                    role,
                },
            });

            match variant {
                ModuleMutation::Previous => {
                    child.links.push(LinkGene {
                        innovation: registry.link_innovation(counterpart, new_id),
                        source: counterpart,
                        target: new_id,
                        weight: 1.0,
                        enabled: true,
                    });
                }
                ModuleMutation::Random => {
                    let k = self.incoming(counterpart).count();
                    let mut candidates: Vec<NodeId> = self
                        .nodes
                        .iter()
                        .filter(|n| !n.is_output())
                        .map(|n| n.id)
                        .collect();
                    candidates.sort();
                    // Partial Fisher-Yates: k distinct sources.
                    let k = k.min(candidates.len());
                    for i in 0..k {
                        let j = rng.random_range(i..candidates.len());
                        candidates.swap(i, j);
                        let source = candidates[i];
                        child.links.push(LinkGene {
                            innovation: registry.link_innovation(source, new_id),
                            source,
                            target: new_id,
                            weight: rng.random_range(-1.0..=1.0),
                            enabled: true,
                        });
                    }
                }
                ModuleMutation::Duplicate => {
                    for link in self.incoming(counterpart) {
                        child.links.push(LinkGene {
                            innovation: registry.link_innovation(link.source, new_id),
                            source: link.source,
                            target: new_id,
                            weight: link.weight,
                            enabled: true,
                        });
                    }
                }
            }
        }
        Ok(child)
    }

    /// NEAT-style crossover. Link genes are aligned by innovation number;
    /// matching genes come uniformly from either parent, disjoint and excess
    /// genes from the fitter parent (ties favor `parent_a`). Nodes and the
    /// module count follow the fitter parent.
    pub fn crossover(
        parent_a: &Genome,
        parent_b: &Genome,
        fitness_a: f64,
        fitness_b: f64,
        rng: &mut impl Rng,
    ) -> Result<Genome> {
        if parent_a.family != parent_b.family || parent_a.team_input != parent_b.team_input {
            return Err(Error::config(
                "crossover parents have incompatible input layouts".to_string(),
            ));
        }
        let (fitter, other) = if fitness_b > fitness_a {
            (parent_b, parent_a)
        } else {
            (parent_a, parent_b)
        };

        let other_links: HashMap<_, _> = other.links.iter().map(|l| (l.innovation, l)).collect();
        let picks: Vec<bool> = fitter
            .links
            .iter()
            .map(|l| other_links.contains_key(&l.innovation) && rng.random::<bool>())
            .collect();

        let build = |take_other_enabled: bool| -> Genome {
            let mut child = fitter.clone();
            for (link, &from_other) in child.links.iter_mut().zip(&picks) {
                if from_other {
                    let twin = other_links[&link.innovation];
                    link.weight = twin.weight;
                    if take_other_enabled {
                        link.enabled = twin.enabled;
                    }
                }
            }
            child
        };

        let child = build(true);
        if child.topo_order().is_some() {
            Ok(child)
        } else {
            // Mixing enabled flags can in rare cases close a cycle; fall
            // back to the fitter parent's enabled structure.
            Ok(build(false))
        }
    }

    /// Speciation distance:
    /// `c_n * |Δnodes| / max_nodes + c_l * (disjoint + excess) / max_links +
    ///  c_w * mean |Δweight|` over matching links. Symmetric, zero on self.
    pub fn compatibility_distance(&self, other: &Genome, coeffs: &CompatCoefficients) -> f64 {
        let node_term = {
            let (a, b) = (self.nodes.len() as f64, other.nodes.len() as f64);
            (a - b).abs() / a.max(b).max(1.0)
        };

        let mine: HashMap<_, _> = self.links.iter().map(|l| (l.innovation, l.weight)).collect();
        let theirs: HashMap<_, _> = other.links.iter().map(|l| (l.innovation, l.weight)).collect();
        let mut matching = 0usize;
        let mut weight_diff = 0.0;
        for (innovation, w) in &mine {
            if let Some(w2) = theirs.get(innovation) {
                matching += 1;
                weight_diff += (w - w2).abs();
            }
        }
        let unmatched = (mine.len() - matching) + (theirs.len() - matching);
        let max_links = mine.len().max(theirs.len());
        let link_term = if max_links == 0 {
            0.0
        } else {
            unmatched as f64 / max_links as f64
        };
        let weight_term = if matching == 0 {
            0.0
        } else {
            weight_diff / matching as f64
        };

        coeffs.nodes * node_term + coeffs.links * link_term + coeffs.weights * weight_term
    }
}
