//! Substrate geometry and CPPN-to-brain decoding.
//!
//! A substrate is a layered arrangement of neuron coordinates in
//! `[-1, 1]^2` (pie-slice inputs sit at y = -1.2). Decoding queries a
//! compiled CPPN once per candidate connection: the source and target
//! coordinates go in, the module's `W` output comes out, and the weight is
//! expressed only when `|W|` clears the link threshold.

use crate::cppn::CompiledCppn;
use crate::error::{Error, Result};
use crate::genome::OutputRole;
use crate::geometry::Vec2;

/// CPPN outputs with magnitude at or below this value express no link.
pub const LINK_THRESHOLD: f64 = 0.2;
/// Expressed link weights are rescaled into `[-WEIGHT_MAX, WEIGHT_MAX]`.
pub const WEIGHT_MAX: f64 = 3.0;
/// Fixed location of the preference neuron in the output layer.
pub const PREFERENCE_COORD: Vec2 = Vec2::new(0.0, 0.8);
/// Fixed location of the signal input neuron, when a domain provides one.
pub const SIGNAL_INPUT_COORD: Vec2 = Vec2::new(0.0, -0.8);

/// Map a raw CPPN `W`/`P` output to an expressed weight, or `None` when the
/// magnitude does not clear [`LINK_THRESHOLD`].
#[inline]
pub fn express_weight(raw: f64) -> Option<f64> {
    let magnitude = raw.abs();
    if magnitude <= LINK_THRESHOLD {
        None
    } else {
        let scaled = (magnitude - LINK_THRESHOLD) / (1.0 - LINK_THRESHOLD) * WEIGHT_MAX;
        Some(raw.signum() * scaled)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerRole {
    Input,
    Hidden,
    Output,
}

/// One substrate layer: a role and the neuron coordinates it contains.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub role: LayerRole,
    pub neurons: Vec<Vec2>,
}

/// Geometric description of a brain: layers plus the (source layer, target
/// layer) pairs the CPPN is queried over.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstrateSpec {
    pub layers: Vec<Layer>,
    pub connectivity: Vec<(usize, usize)>,
    pub preference_coord: Option<Vec2>,
    pub signal_input_coord: Option<Vec2>,
}

/// `n` neurons evenly spaced across x in [-1, 1] at height `y`; a single
/// neuron sits at x = 0.
fn row(n: usize, y: f64) -> Vec<Vec2> {
    if n == 1 {
        return vec![Vec2::new(0.0, y)];
    }
    (0..n)
        .map(|i| Vec2::new(-1.0 + 2.0 * i as f64 / (n - 1) as f64, y))
        .collect()
}

impl SubstrateSpec {
    /// Patrol-domain substrate: 6 rangefinder inputs on y = -1, 9 hidden on
    /// y = 0, 3 action outputs on y = 1. With `signal_input` an extra input
    /// neuron at (0, -0.8) carries the advance/return signal.
    pub fn patrol(signal_input: bool) -> SubstrateSpec {
        let mut layers = vec![Layer {
            role: LayerRole::Input,
            neurons: row(6, -1.0),
        }];
        if signal_input {
            layers.push(Layer {
                role: LayerRole::Input,
                neurons: vec![SIGNAL_INPUT_COORD],
            });
        }
        let hidden = layers.len();
        layers.push(Layer {
            role: LayerRole::Hidden,
            neurons: row(9, 0.0),
        });
        layers.push(Layer {
            role: LayerRole::Output,
            neurons: row(3, 1.0),
        });
        let mut connectivity: Vec<(usize, usize)> = (0..hidden).map(|i| (i, hidden)).collect();
        connectivity.push((hidden, hidden + 1));
        SubstrateSpec {
            layers,
            connectivity,
            preference_coord: Some(PREFERENCE_COORD),
            signal_input_coord: signal_input.then_some(SIGNAL_INPUT_COORD),
        }
    }

    /// Dual-task / two-rooms substrate: 5 rangefinder inputs on y = -1,
    /// 4 pie-slice inputs on y = -1.2, 10 hidden, 3 outputs.
    pub fn dual_task() -> SubstrateSpec {
        SubstrateSpec {
            layers: vec![
                Layer {
                    role: LayerRole::Input,
                    neurons: row(5, -1.0),
                },
                Layer {
                    role: LayerRole::Input,
                    neurons: row(4, -1.2),
                },
                Layer {
                    role: LayerRole::Hidden,
                    neurons: row(10, 0.0),
                },
                Layer {
                    role: LayerRole::Output,
                    neurons: row(3, 1.0),
                },
            ],
            connectivity: vec![(0, 2), (1, 2), (2, 3)],
            preference_coord: Some(PREFERENCE_COORD),
            signal_input_coord: None,
        }
    }

    /// Explicit spec from coordinate lists, for tests and experiments.
    pub fn custom(
        layers: Vec<Layer>,
        connectivity: Vec<(usize, usize)>,
        preference_coord: Option<Vec2>,
    ) -> SubstrateSpec {
        SubstrateSpec {
            layers,
            connectivity,
            preference_coord,
            signal_input_coord: None,
        }
    }

    /// Flattened input coordinates, in layer order.
    pub fn input_coords(&self) -> Vec<Vec2> {
        self.layers
            .iter()
            .filter(|l| l.role == LayerRole::Input)
            .flat_map(|l| l.neurons.iter().copied())
            .collect()
    }

    pub fn num_inputs(&self) -> usize {
        self.layers
            .iter()
            .filter(|l| l.role == LayerRole::Input)
            .map(|l| l.neurons.len())
            .sum()
    }

    fn single_layer(&self, role: LayerRole) -> Result<(usize, &Layer)> {
        let mut found = None;
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.role == role {
                if found.is_some() {
                    return Err(Error::config(format!(
                        "substrate must have exactly one {role:?} layer"
                    )));
                }
                found = Some((i, layer));
            }
        }
        found.ok_or_else(|| Error::config(format!("substrate has no {role:?} layer")))
    }
}

/// How many brains to decode and from which CPPN outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeKind {
    /// One brain from module 0.
    SingleBrain,
    /// One brain per situation value, all from module 0.
    Spg(Vec<f64>),
    /// Brain `i` from module `i`.
    Multitask(u32),
    /// Brain `i` from module `i`, plus preference weights per brain.
    Preference(u32),
}

/// Decode configuration: the kind plus the optional team coordinate that is
/// appended to every CPPN query in multi-agent domains.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeMode {
    pub kind: DecodeKind,
    pub team_coord: Option<f64>,
}

impl DecodeMode {
    pub fn new(kind: DecodeKind) -> Self {
        DecodeMode {
            kind,
            team_coord: None,
        }
    }

    pub fn with_team(kind: DecodeKind, team: f64) -> Self {
        DecodeMode {
            kind,
            team_coord: Some(team),
        }
    }
}

/// Preference-neuron parameters of one brain.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceUnit {
    /// Incoming weights over the flattened `[inputs..., hidden...]` neurons.
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// One decoded brain: a two-layer feedforward network with bipolar-sigmoid
/// neurons. Unexpressed connections hold weight 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainNetwork {
    pub num_inputs: usize,
    /// `[hidden][input]`.
    pub hidden_weights: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    /// `[output][hidden]`.
    pub output_weights: Vec<Vec<f64>>,
    pub output_bias: Vec<f64>,
    pub preference: Option<PreferenceUnit>,
}

impl BrainNetwork {
    pub fn num_hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.output_bias.len()
    }

    /// Feed `inputs` through the network. `hidden` and `outputs` are
    /// caller-owned scratch; returns the preference activation if the brain
    /// carries one.
    pub fn activate_into(
        &self,
        inputs: &[f64],
        hidden: &mut Vec<f64>,
        outputs: &mut Vec<f64>,
    ) -> Option<f64> {
        debug_assert_eq!(inputs.len(), self.num_inputs);
        hidden.clear();
        for (weights, bias) in self.hidden_weights.iter().zip(&self.hidden_bias) {
            let mut sum = *bias;
            for (w, x) in weights.iter().zip(inputs) {
                sum += w * x;
            }
            hidden.push(crate::activation::substrate_sigmoid(sum));
        }
        outputs.clear();
        for (weights, bias) in self.output_weights.iter().zip(&self.output_bias) {
            let mut sum = *bias;
            for (w, h) in weights.iter().zip(hidden.iter()) {
                sum += w * h;
            }
            outputs.push(crate::activation::substrate_sigmoid(sum));
        }
        self.preference.as_ref().map(|p| {
            let mut sum = p.bias;
            for (w, x) in p.weights.iter().zip(inputs.iter().chain(hidden.iter())) {
                sum += w * x;
            }
            crate::activation::substrate_sigmoid(sum)
        })
    }

    /// Convenience wrapper that allocates scratch.
    pub fn activate(&self, inputs: &[f64]) -> (Vec<f64>, Option<f64>) {
        let mut hidden = Vec::new();
        let mut outputs = Vec::new();
        let pref = self.activate_into(inputs, &mut hidden, &mut outputs);
        (outputs, pref)
    }
}

/// Scratch-reusing CPPN query front end.
struct Querier<'a> {
    cppn: &'a CompiledCppn,
    values: Vec<f64>,
    inputs: [f64; 7],
    arity: usize,
    situation_slot: Option<usize>,
}

impl<'a> Querier<'a> {
    fn new(cppn: &'a CompiledCppn, team: Option<f64>) -> Result<Querier<'a>> {
        let has_situation = cppn.family().uses_situation_input();
        match (cppn.team_input(), team) {
            (true, None) => {
                return Err(Error::config(
                    "genome expects a team coordinate but the decode mode provides none".to_string(),
                ))
            }
            (false, Some(_)) => {
                return Err(Error::config(
                    "decode mode provides a team coordinate but the genome has no T input".to_string(),
                ))
            }
            _ => {}
        }
        let arity = 4 + usize::from(has_situation) + usize::from(team.is_some()) + 1;
        debug_assert_eq!(arity, cppn.num_inputs());
        let mut inputs = [0.0; 7];
        let situation_slot = has_situation.then_some(4);
        if let Some(t) = team {
            inputs[4 + usize::from(has_situation)] = t;
        }
        inputs[arity - 1] = 1.0; // bias
        Ok(Querier {
            cppn,
            values: Vec::new(),
            inputs,
            arity,
            situation_slot,
        })
    }

    fn set_situation(&mut self, s: f64) {
        if let Some(slot) = self.situation_slot {
            self.inputs[slot] = s;
        }
    }

    /// Evaluate the CPPN for a (source, target) coordinate query; outputs
    /// are then read per module via `output`.
    fn run(&mut self, src: Vec2, tgt: Vec2) {
        self.inputs[0] = src.x;
        self.inputs[1] = src.y;
        self.inputs[2] = tgt.x;
        self.inputs[3] = tgt.y;
        self.cppn
            .evaluate_into(&self.inputs[..self.arity], &mut self.values)
            .expect("arity checked at construction");
    }

    fn output(&self, module: u32, role: OutputRole) -> f64 {
        let idx = self
            .cppn
            .output_index(module, role)
            .expect("module layout checked before decoding");
        self.values[idx]
    }
}

/// Query the expressed link weight between two substrate coordinates for
/// one module. Inputs are `(x1, y1, x2, y2, [S], [T], bias)`.
pub fn query_link(
    cppn: &CompiledCppn,
    src: Vec2,
    tgt: Vec2,
    module: u32,
    situation: Option<f64>,
    team: Option<f64>,
) -> Result<Option<f64>> {
    let mut q = Querier::new(cppn, team)?;
    if let Some(s) = situation {
        q.set_situation(s);
    }
    q.run(src, tgt);
    Ok(express_weight(q.output(module, OutputRole::Weight)))
}

/// Query a neuron bias: the `B` output on `(0, 0, x_t, y_t, [S], [T], bias)`
/// scaled by [`WEIGHT_MAX`]. No threshold applies.
pub fn query_bias(
    cppn: &CompiledCppn,
    tgt: Vec2,
    module: u32,
    situation: Option<f64>,
    team: Option<f64>,
) -> Result<f64> {
    let mut q = Querier::new(cppn, team)?;
    if let Some(s) = situation {
        q.set_situation(s);
    }
    q.run(Vec2::new(0.0, 0.0), tgt);
    Ok(q.output(module, OutputRole::Bias) * WEIGHT_MAX)
}

/// Query the expressed weight of a link into the preference neuron at
/// [`PREFERENCE_COORD`], using the module's `P` output.
pub fn query_preference_link(
    cppn: &CompiledCppn,
    src: Vec2,
    module: u32,
    situation: Option<f64>,
    team: Option<f64>,
) -> Result<Option<f64>> {
    if !cppn.family().uses_preference() {
        return Err(Error::config(
            "preference link queried on a genome without preference outputs".to_string(),
        ));
    }
    let mut q = Querier::new(cppn, team)?;
    if let Some(s) = situation {
        q.set_situation(s);
    }
    q.run(src, PREFERENCE_COORD);
    Ok(express_weight(q.output(module, OutputRole::Preference)))
}

/// Decode a compiled CPPN into one brain per mode entry. Deterministic; the
/// same (genome, spec, mode) triple always produces bit-identical brains.
pub fn decode(
    cppn: &CompiledCppn,
    spec: &SubstrateSpec,
    mode: &DecodeMode,
) -> Result<Vec<BrainNetwork>> {
    // Mode/layout consistency.
    match &mode.kind {
        DecodeKind::SingleBrain => {
            if cppn.num_modules() != 1 {
                return Err(Error::config(format!(
                    "single-brain decode requires num_modules = 1, genome has {}",
                    cppn.num_modules()
                )));
            }
        }
        DecodeKind::Spg(values) => {
            if !cppn.family().uses_situation_input() {
                return Err(Error::config(
                    "spg decode requires a genome with the situation input S".to_string(),
                ));
            }
            if values.is_empty() {
                return Err(Error::config("spg decode needs at least one situation value".to_string()));
            }
        }
        DecodeKind::Multitask(k) => {
            if cppn.num_modules() != *k {
                return Err(Error::config(format!(
                    "multitask decode of {k} brains requires num_modules = {k}, genome has {}",
                    cppn.num_modules()
                )));
            }
        }
        DecodeKind::Preference(k) => {
            if cppn.num_modules() != *k {
                return Err(Error::config(format!(
                    "preference decode of {k} brains requires num_modules = {k}, genome has {}",
                    cppn.num_modules()
                )));
            }
            if !cppn.family().uses_preference() {
                return Err(Error::config(
                    "preference decode requires preference outputs in every module".to_string(),
                ));
            }
            if spec.preference_coord.is_none() {
                return Err(Error::config(
                    "preference decode requires a substrate preference coordinate".to_string(),
                ));
            }
        }
    }

    let (hidden_idx, hidden_layer) = spec.single_layer(LayerRole::Hidden)?;
    let (output_idx, output_layer) = spec.single_layer(LayerRole::Output)?;
    for &(s, t) in &spec.connectivity {
        let src_role = spec
            .layers
            .get(s)
            .ok_or_else(|| Error::config(format!("connectivity names missing layer {s}")))?
            .role;
        let ok = (src_role == LayerRole::Input && t == hidden_idx)
            || (s == hidden_idx && t == output_idx);
        if !ok {
            return Err(Error::config(format!(
                "unsupported connectivity pair ({s}, {t}): layers connect input -> hidden -> output"
            )));
        }
    }

    let inputs = spec.input_coords();
    let hidden = &hidden_layer.neurons;
    let outputs = &output_layer.neurons;

    // (situation, [(module, brain index)]) passes. Multitask/preference
    // brains share every CPPN evaluation; SPG brains need one pass per
    // situation value.
    let with_preference = matches!(mode.kind, DecodeKind::Preference(_));
    let passes: Vec<(Option<f64>, Vec<(u32, usize)>)> = match &mode.kind {
        DecodeKind::SingleBrain => vec![(None, vec![(0, 0)])],
        DecodeKind::Spg(values) => values
            .iter()
            .enumerate()
            .map(|(i, &s)| (Some(s), vec![(0, i)]))
            .collect(),
        DecodeKind::Multitask(k) | DecodeKind::Preference(k) => {
            vec![(None, (0..*k).map(|m| (m, m as usize)).collect())]
        }
    };
    let num_brains = passes.iter().map(|(_, brains)| brains.len()).sum();

    let mut brains: Vec<BrainNetwork> = (0..num_brains)
        .map(|_| BrainNetwork {
            num_inputs: inputs.len(),
            hidden_weights: vec![vec![0.0; inputs.len()]; hidden.len()],
            hidden_bias: vec![0.0; hidden.len()],
            output_weights: vec![vec![0.0; hidden.len()]; outputs.len()],
            output_bias: vec![0.0; outputs.len()],
            preference: with_preference.then(|| PreferenceUnit {
                weights: vec![0.0; inputs.len() + hidden.len()],
                bias: 0.0,
            }),
        })
        .collect();

    let mut querier = Querier::new(cppn, mode.team_coord)?;

    for (situation, targets) in &passes {
        if let Some(s) = *situation {
            querier.set_situation(s);
        }

        // input -> hidden weights for every connected input layer.
        for &(src_layer, tgt_layer) in &spec.connectivity {
            if tgt_layer != hidden_idx {
                continue;
            }
            let span = flattened_offset(spec, src_layer);
            for (i, &src) in spec.layers[src_layer].neurons.iter().enumerate() {
                for (h, &tgt) in hidden.iter().enumerate() {
                    querier.run(src, tgt);
                    for &(module, brain) in targets {
                        if let Some(w) = express_weight(querier.output(module, OutputRole::Weight)) {
                            brains[brain].hidden_weights[h][span + i] = w;
                        }
                    }
                }
            }
        }

        // hidden -> output weights.
        for (h, &src) in hidden.iter().enumerate() {
            for (o, &tgt) in outputs.iter().enumerate() {
                querier.run(src, tgt);
                for &(module, brain) in targets {
                    if let Some(w) = express_weight(querier.output(module, OutputRole::Weight)) {
                        brains[brain].output_weights[o][h] = w;
                    }
                }
            }
        }

        // Biases: B output queried from (0, 0) to the neuron, scaled.
        for (h, &tgt) in hidden.iter().enumerate() {
            querier.run(Vec2::new(0.0, 0.0), tgt);
            for &(module, brain) in targets {
                brains[brain].hidden_bias[h] =
                    querier.output(module, OutputRole::Bias) * WEIGHT_MAX;
            }
        }
        for (o, &tgt) in outputs.iter().enumerate() {
            querier.run(Vec2::new(0.0, 0.0), tgt);
            for &(module, brain) in targets {
                brains[brain].output_bias[o] =
                    querier.output(module, OutputRole::Bias) * WEIGHT_MAX;
            }
        }

        if with_preference {
            let pref_coord = spec.preference_coord.expect("checked above");
            let sources: Vec<Vec2> = inputs.iter().copied().chain(hidden.iter().copied()).collect();
            for (i, &src) in sources.iter().enumerate() {
                querier.run(src, pref_coord);
                for &(module, brain) in targets {
                    if let Some(w) =
                        express_weight(querier.output(module, OutputRole::Preference))
                    {
                        brains[brain]
                            .preference
                            .as_mut()
                            .expect("preference allocated")
                            .weights[i] = w;
                    }
                }
            }
            querier.run(Vec2::new(0.0, 0.0), pref_coord);
            for &(module, brain) in targets {
                brains[brain].preference.as_mut().expect("preference allocated").bias =
                    querier.output(module, OutputRole::Bias) * WEIGHT_MAX;
            }
        }
    }

    Ok(brains)
}

/// Offset of `layer` within the flattened input vector.
fn flattened_offset(spec: &SubstrateSpec, layer: usize) -> usize {
    spec.layers[..layer]
        .iter()
        .filter(|l| l.role == LayerRole::Input)
        .map(|l| l.neurons.len())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::test_support::{layout, random_genome};
    use crate::genome::{DecodeFamily, Genome, InnovationRegistry, ModuleMutation, NodeId, NodeRole};
    use crate::Activation;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn threshold_boundary_expresses_nothing() {
        assert_eq!(express_weight(0.2), None);
        assert_eq!(express_weight(-0.2), None);
        assert_eq!(express_weight(0.0), None);
        let mut w = -0.2;
        while w <= 0.2 {
            assert_eq!(express_weight(w), None, "|{w}| <= 0.2 must not express");
            w += 0.001953125; // 2^-9 steps keep the loop exact
        }
    }

    #[test]
    fn expressed_weights_follow_the_rescale_formula() {
        assert_relative_eq!(express_weight(1.0).unwrap(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(express_weight(-0.6).unwrap(), -1.5, epsilon = 1e-12);
        assert_relative_eq!(express_weight(-1.0).unwrap(), -3.0, epsilon = 1e-12);
        // Just above threshold: tiny but expressed.
        let w = express_weight(0.2 + 1e-9).unwrap();
        assert!(w > 0.0 && w < 1e-6);
    }

    /// Genome whose W output is `abs(x1)` mapped bipolar; handy for exact
    /// query values.
    fn abs_probe_genome() -> Genome {
        let mut g = Genome::initial(layout(DecodeFamily::Single, false, 1), &mut rng(1));
        let w_id = g.output_node(0, OutputRole::Weight).unwrap().id;
        let b_id = g.output_node(0, OutputRole::Bias).unwrap().id;
        for l in &mut g.links {
            // W reads input0 (x1); B reads the bias input with weight 0.75.
            if l.target == w_id {
                l.enabled = l.source == NodeId(0);
                l.weight = 1.0;
            } else {
                l.enabled = l.source == NodeId(4);
                l.weight = 0.75;
            }
        }
        for n in &mut g.nodes {
            if n.id == w_id {
                n.role = NodeRole::Output {
                    activation: Activation::Abs,
                    module: 0,
                    role: OutputRole::Weight,
                };
            }
            if n.id == b_id {
                n.role = NodeRole::Output {
                    activation: Activation::Abs,
                    module: 0,
                    role: OutputRole::Bias,
                };
            }
        }
        g
    }

    #[test]
    fn query_bias_scales_by_weight_max_without_threshold() {
        // B output is abs-activated bias-input * 0.75 -> 2*0.75 - 1 = 0.5,
        // scaled by 3.0 -> 1.5 exactly.
        let g = abs_probe_genome();
        let cppn = CompiledCppn::compile(&g).unwrap();
        let bias = query_bias(&cppn, Vec2::new(0.3, 1.0), 0, None, None).unwrap();
        assert_eq!(bias, 1.5);
    }

    #[test]
    fn constant_zero_bias_output_gives_zero_biases() {
        let mut g = Genome::initial(layout(DecodeFamily::Single, false, 1), &mut rng(2));
        let b_id = g.output_node(0, OutputRole::Bias).unwrap().id;
        for l in &mut g.links {
            if l.target == b_id {
                l.enabled = false;
            }
        }
        for n in &mut g.nodes {
            if n.id == b_id {
                n.role = NodeRole::Output {
                    activation: Activation::Sine,
                    module: 0,
                    role: OutputRole::Bias,
                };
            }
        }
        let cppn = CompiledCppn::compile(&g).unwrap();
        for y in [-1.0, 0.0, 1.0] {
            assert_eq!(query_bias(&cppn, Vec2::new(0.5, y), 0, None, None).unwrap(), 0.0);
        }
    }

    #[test]
    fn preference_query_rejected_for_non_preference_genomes() {
        let g = Genome::initial(layout(DecodeFamily::Single, false, 1), &mut rng(3));
        let cppn = CompiledCppn::compile(&g).unwrap();
        assert!(query_preference_link(&cppn, Vec2::new(0.0, -1.0), 0, None, None).is_err());
    }

    #[test]
    fn spg_decode_produces_one_brain_per_situation() {
        let g = Genome::initial(layout(DecodeFamily::Spg, false, 1), &mut rng(4));
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::patrol(false);
        let brains = decode(
            &cppn,
            &spec,
            &DecodeMode::new(DecodeKind::Spg(vec![-1.0, 1.0])),
        )
        .unwrap();
        assert_eq!(brains.len(), 2);
    }

    #[test]
    fn spg_brains_differ_only_through_the_situation_input() {
        // No enabled link leaves the S input (node 4), so all situation
        // values decode to identical brains.
        let mut g = Genome::initial(layout(DecodeFamily::Spg, false, 1), &mut rng(5));
        for l in &mut g.links {
            if l.source == NodeId(4) {
                l.enabled = false;
            }
        }
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::patrol(false);
        let brains = decode(
            &cppn,
            &spec,
            &DecodeMode::new(DecodeKind::Spg(vec![-1.0, 0.0, 1.0])),
        )
        .unwrap();
        assert_eq!(brains[0], brains[1]);
        assert_eq!(brains[1], brains[2]);
    }

    #[test]
    fn multitask_modules_are_isolated() {
        let g = Genome::initial(layout(DecodeFamily::Multitask, false, 2), &mut rng(6));
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::dual_task();
        let before = decode(&cppn, &spec, &DecodeMode::new(DecodeKind::Multitask(2))).unwrap();

        // Zero all links into module 1's outputs.
        let mut altered = g.clone();
        let m1_ids: Vec<NodeId> = altered
            .nodes
            .iter()
            .filter(|n| matches!(n.role, NodeRole::Output { module: 1, .. }))
            .map(|n| n.id)
            .collect();
        for l in &mut altered.links {
            if m1_ids.contains(&l.target) {
                l.weight = 0.0;
            }
        }
        let cppn2 = CompiledCppn::compile(&altered).unwrap();
        let after = decode(&cppn2, &spec, &DecodeMode::new(DecodeKind::Multitask(2))).unwrap();

        assert_eq!(before[0], after[0], "module 0's brain must be untouched");
        assert_ne!(before[1], after[1], "module 1's brain must change");
    }

    #[test]
    fn decode_is_deterministic() {
        let g = random_genome(DecodeFamily::Preference, false, 1, 20, &mut rng(7));
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::dual_task();
        let mode = DecodeMode::new(DecodeKind::Preference(g.num_modules));
        assert_eq!(
            decode(&cppn, &spec, &mode).unwrap(),
            decode(&cppn, &spec, &mode).unwrap()
        );
    }

    #[test]
    fn expressed_weights_have_bounded_magnitude() {
        for seed in 0..20 {
            let g = random_genome(DecodeFamily::Preference, false, 1, 15, &mut rng(100 + seed));
            let cppn = CompiledCppn::compile(&g).unwrap();
            let spec = SubstrateSpec::patrol(true);
            let brains = decode(
                &cppn,
                &spec,
                &DecodeMode::new(DecodeKind::Preference(g.num_modules)),
            )
            .unwrap();
            for b in &brains {
                let all = b
                    .hidden_weights
                    .iter()
                    .flatten()
                    .chain(b.output_weights.iter().flatten())
                    .chain(b.preference.as_ref().unwrap().weights.iter());
                for &w in all {
                    assert!(w.abs() <= WEIGHT_MAX);
                    if w != 0.0 {
                        assert!(w.abs() > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn duplicate_module_decodes_to_an_identical_brain() {
        let g = random_genome(DecodeFamily::Preference, false, 1, 12, &mut rng(8));
        let registry = InnovationRegistry::seeded_from(&g);
        let g2 = g
            .module_mutation(&registry, &mut rng(9), ModuleMutation::Duplicate)
            .unwrap();
        let cppn = CompiledCppn::compile(&g2).unwrap();
        let spec = SubstrateSpec::dual_task();
        let brains = decode(&cppn, &spec, &DecodeMode::new(DecodeKind::Preference(2))).unwrap();
        assert_eq!(brains[0], brains[1]);
    }

    #[test]
    fn team_coordinate_must_match_genome_layout() {
        let g = Genome::initial(layout(DecodeFamily::Single, true, 1), &mut rng(10));
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::patrol(true);
        assert!(decode(&cppn, &spec, &DecodeMode::new(DecodeKind::SingleBrain)).is_err());
        assert!(decode(
            &cppn,
            &spec,
            &DecodeMode::with_team(DecodeKind::SingleBrain, -1.0)
        )
        .is_ok());

        let plain = Genome::initial(layout(DecodeFamily::Single, false, 1), &mut rng(11));
        let plain_cppn = CompiledCppn::compile(&plain).unwrap();
        assert!(decode(
            &plain_cppn,
            &spec,
            &DecodeMode::with_team(DecodeKind::SingleBrain, 0.0)
        )
        .is_err());
    }

    #[test]
    fn mode_layout_mismatches_name_the_violated_invariant() {
        let g = Genome::initial(layout(DecodeFamily::Multitask, false, 2), &mut rng(12));
        let cppn = CompiledCppn::compile(&g).unwrap();
        let spec = SubstrateSpec::dual_task();
        let err = decode(&cppn, &spec, &DecodeMode::new(DecodeKind::Multitask(3))).unwrap_err();
        assert!(err.to_string().contains("num_modules"));
        let err = decode(&cppn, &spec, &DecodeMode::new(DecodeKind::SingleBrain)).unwrap_err();
        assert!(err.to_string().contains("num_modules"));
    }

    /// Toy substrate (2 inputs, 1 hidden, 1 output): decode must agree with
    /// a literal query-by-query enumeration.
    #[test]
    fn decode_matches_manual_enumeration_on_toy_substrate() {
        let spec = SubstrateSpec::custom(
            vec![
                Layer {
                    role: LayerRole::Input,
                    neurons: vec![Vec2::new(-1.0, -1.0), Vec2::new(1.0, -1.0)],
                },
                Layer {
                    role: LayerRole::Hidden,
                    neurons: vec![Vec2::new(0.0, 0.0)],
                },
                Layer {
                    role: LayerRole::Output,
                    neurons: vec![Vec2::new(0.0, 1.0)],
                },
            ],
            vec![(0, 1), (1, 2)],
            Some(PREFERENCE_COORD),
        );

        for seed in 0..25 {
            let g = random_genome(DecodeFamily::Preference, false, 1, 10, &mut rng(300 + seed));
            let cppn = CompiledCppn::compile(&g).unwrap();
            let brains =
                decode(&cppn, &spec, &DecodeMode::new(DecodeKind::Preference(g.num_modules)))
                    .unwrap();
            let brain = &brains[0];

            let inputs = spec.input_coords();
            let hidden = Vec2::new(0.0, 0.0);
            let output = Vec2::new(0.0, 1.0);
            for (i, &src) in inputs.iter().enumerate() {
                let expected =
                    query_link(&cppn, src, hidden, 0, None, None).unwrap().unwrap_or(0.0);
                assert_eq!(brain.hidden_weights[0][i], expected);
            }
            let expected = query_link(&cppn, hidden, output, 0, None, None).unwrap().unwrap_or(0.0);
            assert_eq!(brain.output_weights[0][0], expected);
            assert_eq!(
                brain.hidden_bias[0],
                query_bias(&cppn, hidden, 0, None, None).unwrap()
            );
            assert_eq!(
                brain.output_bias[0],
                query_bias(&cppn, output, 0, None, None).unwrap()
            );
            let pref = brain.preference.as_ref().unwrap();
            for (i, &src) in inputs.iter().chain([hidden].iter()).enumerate() {
                let expected =
                    query_preference_link(&cppn, src, 0, None, None).unwrap().unwrap_or(0.0);
                assert_eq!(pref.weights[i], expected);
            }
            assert_eq!(pref.bias, query_bias(&cppn, PREFERENCE_COORD, 0, None, None).unwrap());
        }
    }
}
