//! Innovation bookkeeping shared across a population.

use super::{Genome, Innovation, NodeId, OutputRole};
use std::collections::HashMap;
use std::sync::Mutex;

#[derive(Debug, Clone, Copy)]
pub struct SplitRecord {
    pub node: NodeId,
    pub in_link: Innovation,
    pub out_link: Innovation,
}

#[derive(Debug, Default)]
struct Inner {
    links: HashMap<(NodeId, NodeId), Innovation>,
    /// Keyed by (split innovation, occurrence). The occurrence index lets a
    /// lineage split the same historical link more than once without
    /// colliding node ids, while still aligning across genomes.
    splits: HashMap<(Innovation, u32), SplitRecord>,
    module_nodes: HashMap<(u32, OutputRole), NodeId>,
    next_innovation: u64,
    next_node: u64,
}

/// Assigns innovation numbers and node ids for structural mutations.
///
/// Identical structural descriptors always map to identical numbers, so two
/// genomes that undergo the same change in one generation stay alignable by
/// innovation. Lookups and inserts behave as if serialized.
#[derive(Debug, Default)]
pub struct InnovationRegistry {
    inner: Mutex<Inner>,
}

impl InnovationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry primed with a genome's existing structure: its link pairs
    /// are pre-registered and counters start past its ids.
    pub fn seeded_from(genome: &Genome) -> Self {
        let registry = Self::new();
        {
            let mut inner = registry.inner.lock().unwrap();
            for link in &genome.links {
                inner.links.insert((link.source, link.target), link.innovation);
                inner.next_innovation = inner.next_innovation.max(link.innovation.0 + 1);
            }
            for node in &genome.nodes {
                inner.next_node = inner.next_node.max(node.id.0 + 1);
            }
        }
        registry
    }

    /// Innovation for a link `source -> target`, minting one if unseen.
    pub fn link_innovation(&self, source: NodeId, target: NodeId) -> Innovation {
        let mut inner = self.inner.lock().unwrap();
        if let Some(&innovation) = inner.links.get(&(source, target)) {
            return innovation;
        }
        let innovation = Innovation(inner.next_innovation);
        inner.next_innovation += 1;
        inner.links.insert((source, target), innovation);
        innovation
    }

    /// Node id and link innovations for splitting `link`. `occurrence`
    /// counts earlier splits of the same innovation within one genome.
    pub fn split_link(&self, link: Innovation, occurrence: u32) -> SplitRecord {
        let mut inner = self.inner.lock().unwrap();
        if let Some(&record) = inner.splits.get(&(link, occurrence)) {
            return record;
        }
        let node = NodeId(inner.next_node);
        inner.next_node += 1;
        let in_link = Innovation(inner.next_innovation);
        let out_link = Innovation(inner.next_innovation + 1);
        inner.next_innovation += 2;
        let record = SplitRecord {
            node,
            in_link,
            out_link,
        };
        inner.splits.insert((link, occurrence), record);
        // The new links are addressable by pair as well, so a later
        // add-link of the same pair aligns with the split.
        record
    }

    /// Node id for a module-mutation output node, shared by every genome
    /// that grows the same module index.
    pub fn module_node(&self, module: u32, role: OutputRole) -> NodeId {
        let mut inner = self.inner.lock().unwrap();
        if let Some(&id) = inner.module_nodes.get(&(module, role)) {
            return id;
        }
        let id = NodeId(inner.next_node);
        inner.next_node += 1;
        inner.module_nodes.insert((module, role), id);
        id
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_descriptors_get_identical_numbers() {
        let registry = InnovationRegistry::new();
        let a = registry.link_innovation(NodeId(0), NodeId(7));
        let b = registry.link_innovation(NodeId(0), NodeId(7));
        assert_eq!(a, b);
        let c = registry.link_innovation(NodeId(1), NodeId(7));
        assert_ne!(a, c);

        let s1 = registry.split_link(a, 0);
        let s2 = registry.split_link(a, 0);
        assert_eq!(s1.node, s2.node);
        assert_eq!(s1.in_link, s2.in_link);
        let s3 = registry.split_link(a, 1);
        assert_ne!(s1.node, s3.node);

        assert_eq!(
            registry.module_node(3, OutputRole::Weight),
            registry.module_node(3, OutputRole::Weight)
        );
        assert_ne!(
            registry.module_node(3, OutputRole::Weight),
            registry.module_node(3, OutputRole::Bias)
        );
    }

    #[test]
    fn concurrent_use_behaves_as_serialized() {
        let registry = InnovationRegistry::new();
        std::thread::scope(|scope| {
            let r = &registry;
            let handles: Vec<_> = (0..8)
                .map(|_| scope.spawn(move || r.link_innovation(NodeId(2), NodeId(9))))
                .collect();
            let got: Vec<Innovation> = handles.into_iter().map(|h| h.join().unwrap()).collect();
            assert!(got.windows(2).all(|w| w[0] == w[1]));
        });
    }
}
