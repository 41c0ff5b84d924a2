//! Speciation with a dynamic compatibility threshold.

use crate::genome::{CompatCoefficients, Genome};

#[derive(Debug, Clone)]
pub struct Species {
    pub id: u64,
    pub representative: Genome,
    /// Member indices into the current population.
    pub members: Vec<usize>,
}

/// Species registry. Representatives are carried over from the previous
/// generation; the threshold moves 10% toward the target species count
/// after every assignment.
#[derive(Debug, Clone)]
pub struct Speciation {
    pub species: Vec<Species>,
    pub threshold: f64,
    next_id: u64,
}

impl Speciation {
    pub fn new(initial_threshold: f64) -> Speciation {
        Speciation {
            species: Vec::new(),
            threshold: initial_threshold,
            next_id: 0,
        }
    }

    /// Assign every genome to the first species whose representative is
    /// within the threshold, creating species as needed. Returns per-genome
    /// species ids. Afterwards representatives are refreshed to each
    /// species' first member and empty species retired.
    pub fn assign(&mut self, genomes: &[Genome], coeffs: &CompatCoefficients) -> Vec<u64> {
        for s in &mut self.species {
            s.members.clear();
        }
        let mut ids = Vec::with_capacity(genomes.len());
        for (idx, genome) in genomes.iter().enumerate() {
            let found = self
                .species
                .iter()
                .position(|s| genome.compatibility_distance(&s.representative, coeffs) < self.threshold);
            match found {
                Some(pos) => {
                    self.species[pos].members.push(idx);
                    ids.push(self.species[pos].id);
                }
                None => {
                    let id = self.next_id;
                    self.next_id += 1;
                    self.species.push(Species {
                        id,
                        representative: genome.clone(),
                        members: vec![idx],
                    });
                    ids.push(id);
                }
            }
        }
        self.species.retain(|s| !s.members.is_empty());
        for s in &mut self.species {
            s.representative = genomes[s.members[0]].clone();
        }
        ids
    }

    /// Nudge the threshold 10% toward producing `target` species.
    pub fn adjust_threshold(&mut self, target: usize) {
        if self.species.len() > target {
            self.threshold *= 1.1;
        } else if self.species.len() < target {
            self.threshold *= 0.9;
        }
        self.threshold = self.threshold.max(1e-6);
    }

    pub fn count(&self) -> usize {
        self.species.len()
    }
}
