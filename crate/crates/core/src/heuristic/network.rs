use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::{node_features, FeatureMode, FeatureScales};
use super::graph::{build_graph, ManipulatorGraph};
use crate::error::{Error, Result};
use crate::kinematics::{joint_positions, JointVector, KinematicModel, DOF};
use crate::rng;
use crate::tensor::{Activation, DropoutMode, Graph, Mlp, MlpSpec, ParamStore, Tensor, Var};
use crate::world::{obstacle_vector, Profile, Workspace};

/// Key of the heuristic configuration inside a weight file's metadata.
pub const WEIGHTS_META_KEY: &str = "heuristic_config";

/// Architecture of the heuristic. Encoder lists hold hidden widths only; input and
/// output widths follow from the node count, feature mode and obstacle slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub feature_mode: FeatureMode,
    /// Per-node embedding width.
    pub hidden: usize,
    /// Query/key width of the cross-attention.
    pub key_width: usize,
    pub obstacle_slots: usize,
    pub config_encoder: Vec<usize>,
    pub obstacle_encoder: Vec<usize>,
    pub edge_update: Vec<usize>,
    pub node_update: Vec<usize>,
    pub head: Vec<usize>,
    pub activation: Activation,
    pub dropout: f64,
}

impl HeuristicConfig {
    pub fn for_profile(profile: Profile, feature_mode: FeatureMode) -> Self {
        Self {
            feature_mode,
            hidden: 32,
            key_width: 64,
            obstacle_slots: profile.capacity(),
            config_encoder: vec![256],
            obstacle_encoder: vec![256],
            edge_update: vec![64],
            node_update: vec![64],
            head: vec![32],
            activation: Activation::Prelu,
            dropout: 0.1,
        }
    }

    /// A tiny network (width-8 nodes) for gradient and unit tests.
    pub fn toy(feature_mode: FeatureMode, obstacle_slots: usize) -> Self {
        Self {
            feature_mode,
            hidden: 8,
            key_width: 4,
            obstacle_slots,
            config_encoder: vec![16],
            obstacle_encoder: vec![12],
            edge_update: vec![8],
            node_update: vec![8],
            head: vec![4],
            activation: Activation::Prelu,
            dropout: 0.1,
        }
    }

    pub fn nodes(&self) -> usize {
        DOF
    }

    /// Width of both the configuration and obstacle embeddings.
    pub fn embed_width(&self) -> usize {
        self.nodes() * self.hidden
    }

    fn spec(&self, input: usize, hidden: &[usize], output: usize, dropout: f64) -> MlpSpec {
        let mut widths = Vec::with_capacity(hidden.len() + 2);
        widths.push(input);
        widths.extend_from_slice(hidden);
        widths.push(output);
        MlpSpec::new(&widths, self.activation).with_dropout(dropout)
    }

    pub fn config_encoder_spec(&self) -> MlpSpec {
        let input = self.nodes() * self.feature_mode.width();
        self.spec(
            input,
            &self.config_encoder,
            self.embed_width(),
            self.dropout,
        )
    }

    pub fn obstacle_encoder_spec(&self) -> MlpSpec {
        self.spec(
            self.obstacle_slots * 6,
            &self.obstacle_encoder,
            self.embed_width(),
            0.0,
        )
    }

    pub fn query_spec(&self) -> MlpSpec {
        self.spec(self.hidden, &[], self.key_width, 0.0)
    }

    pub fn key_spec(&self) -> MlpSpec {
        self.spec(self.hidden, &[], self.key_width, 0.0)
    }

    pub fn value_spec(&self) -> MlpSpec {
        self.spec(self.hidden, &[], self.hidden, 0.0)
    }

    pub fn edge_spec(&self) -> MlpSpec {
        self.spec(
            2 * self.hidden,
            &self.edge_update,
            self.hidden,
            self.dropout,
        )
    }

    pub fn node_spec(&self) -> MlpSpec {
        self.spec(
            2 * self.hidden,
            &self.node_update,
            self.hidden,
            self.dropout,
        )
    }

    pub fn head_spec(&self) -> MlpSpec {
        self.spec(self.hidden, &self.head, 1, self.dropout)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.key_width == 0 || self.obstacle_slots == 0 {
            return Err(Error::invalid(
                "hidden width, key width and obstacle slots must be positive",
            ));
        }
        for spec in [
            self.config_encoder_spec(),
            self.obstacle_encoder_spec(),
            self.edge_spec(),
            self.node_spec(),
            self.head_spec(),
        ] {
            spec.validate()?;
        }
        if self.config_encoder_spec().output_width() != self.obstacle_encoder_spec().output_width()
        {
            return Err(Error::invalid(
                "configuration and obstacle embeddings must match",
            ));
        }
        Ok(())
    }
}

/// The heuristic network: configuration, joint graph and all trainable weights.
#[derive(Debug, Clone)]
pub struct Heuristic {
    config: HeuristicConfig,
    graph: ManipulatorGraph,
    store: ParamStore,
    config_encoder: Mlp,
    obstacle_encoder: Mlp,
    query: Mlp,
    key: Mlp,
    value: Mlp,
    edge: Mlp,
    node: Mlp,
    head: Mlp,
}

impl Heuristic {
    /// Builds the network with freshly initialized weights drawn from `seed`.
    pub fn new(config: HeuristicConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let graph = ManipulatorGraph::chain(config.nodes())?;
        let mut r = rng::seeded(seed);
        let mut store = ParamStore::new();
        let config_encoder = Mlp::new(
            &mut store,
            "config_encoder",
            config.config_encoder_spec(),
            &mut r,
        )?;
        let obstacle_encoder = Mlp::new(
            &mut store,
            "obstacle_encoder",
            config.obstacle_encoder_spec(),
            &mut r,
        )?;
        let query = Mlp::new(&mut store, "attention.query", config.query_spec(), &mut r)?;
        let key = Mlp::new(&mut store, "attention.key", config.key_spec(), &mut r)?;
        let value = Mlp::new(&mut store, "attention.value", config.value_spec(), &mut r)?;
        let edge = Mlp::new(&mut store, "message.edge", config.edge_spec(), &mut r)?;
        let node = Mlp::new(&mut store, "message.node", config.node_spec(), &mut r)?;
        let head = Mlp::new(&mut store, "head", config.head_spec(), &mut r)?;
        Ok(Self {
            config,
            graph,
            store,
            config_encoder,
            obstacle_encoder,
            query,
            key,
            value,
            edge,
            node,
            head,
        })
    }

    /// Builds the network for `model`, checking the joint graph against the arm.
    pub fn for_model(model: &KinematicModel, config: HeuristicConfig, seed: u64) -> Result<Self> {
        let mut h = Self::new(config, seed)?;
        h.graph = build_graph(model)?;
        Ok(h)
    }

    pub fn config(&self) -> &HeuristicConfig {
        &self.config
    }

    pub fn graph(&self) -> &ManipulatorGraph {
        &self.graph
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn value_projection(&self) -> &Mlp {
        &self.value
    }

    pub fn edge_update(&self) -> &Mlp {
        &self.edge
    }

    pub fn node_update(&self) -> &Mlp {
        &self.node
    }

    /// Embeds concatenated node features (`B × nodes·width`) and obstacle
    /// descriptors (`B × slots·6`) into two `B × nodes·hidden` embeddings.
    pub fn encode<R: Rng + ?Sized>(
        &self,
        g: &mut Graph,
        features: Var,
        obstacles: Var,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<(Var, Var)> {
        let batch = g.value(features).rows();
        if g.value(obstacles).rows() != batch {
            return Err(Error::shape(
                "encode",
                "feature and obstacle batch sizes differ",
            ));
        }
        let v = self
            .config_encoder
            .forward(g, &self.store, features, mode, rng)?;
        let o = self
            .obstacle_encoder
            .forward(g, &self.store, obstacles, mode, rng)?;
        Ok((v, o))
    }

    /// Cross-attention of the configuration embedding over the obstacle embedding with a
    /// residual connection. Both embeddings are split into one `hidden`-wide row per node;
    /// the result has `B·nodes` rows of width `hidden`.
    pub fn fuse(&self, g: &mut Graph, v: Var, o: Var) -> Result<Var> {
        let [batch, width] = g.value(v).shape();
        if g.value(o).shape() != [batch, width] || width != self.config.embed_width() {
            return Err(Error::shape(
                "fuse",
                format!(
                    "embeddings {:?} / {:?}",
                    g.value(v).shape(),
                    g.value(o).shape()
                ),
            ));
        }
        let rows = batch * self.config.nodes();
        let h = self.config.hidden;
        let v_rows = g.reshape(v, rows, h)?;
        let o_rows = g.reshape(o, rows, h)?;
        let mut no_rng = rng::seeded(0);
        let q = self
            .query
            .forward(g, &self.store, v_rows, DropoutMode::Off, &mut no_rng)?;
        let k = self
            .key
            .forward(g, &self.store, o_rows, DropoutMode::Off, &mut no_rng)?;
        let val = self
            .value
            .forward(g, &self.store, o_rows, DropoutMode::Off, &mut no_rng)?;
        let attended = g.attention(q, k, val, batch)?;
        g.add(attended, v_rows)
    }

    /// One round of message passing: `f_i ← φv[f_i, Σ_{j∈N(i)} φe[f_i, f_j]]`, with
    /// neighbors summed in ascending index order. `x` holds `B·nodes` rows.
    pub fn message_pass<R: Rng + ?Sized>(
        &self,
        g: &mut Graph,
        graph: &ManipulatorGraph,
        x: Var,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<Var> {
        let [rows, width] = g.value(x).shape();
        let n = graph.nodes();
        if rows % n != 0 || width != self.config.hidden {
            return Err(Error::shape(
                "message_pass",
                format!(
                    "{rows}x{width} for {n} nodes of width {}",
                    self.config.hidden
                ),
            ));
        }
        let batch = rows / n;
        let mut own = Vec::new();
        let mut other = Vec::new();
        for b in 0..batch {
            for i in 0..n {
                for &j in graph.neighbors(i) {
                    own.push(b * n + i);
                    other.push(b * n + j);
                }
            }
        }
        let aggregate = if own.is_empty() {
            g.constant(Tensor::zeros(rows, width))
        } else {
            let fi = g.gather_rows(x, &own)?;
            let fj = g.gather_rows(x, &other)?;
            let pair = g.concat_cols(&[fi, fj])?;
            let messages = self.edge.forward(g, &self.store, pair, mode, rng)?;
            g.scatter_add_rows(messages, &own, rows)?
        };
        let joined = g.concat_cols(&[x, aggregate])?;
        self.node.forward(g, &self.store, joined, mode, rng)
    }

    /// Full forward pass to normalized joint angles, `B × nodes`.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        g: &mut Graph,
        features: Var,
        obstacles: Var,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<Var> {
        let batch = g.value(features).rows();
        let (v, o) = self.encode(g, features, obstacles, mode, rng)?;
        let fused = self.fuse(g, v, o)?;
        let passed = self.message_pass(g, &self.graph, fused, mode, rng)?;
        let out = self.head.forward(g, &self.store, passed, mode, rng)?;
        g.reshape(out, batch, self.config.nodes())
    }

    fn scales(ws: &Workspace, model: &KinematicModel) -> FeatureScales {
        FeatureScales {
            angle_scale: model.angle_scale(),
            center: ws.bounds.center(),
            position_scale: ws.position_scale(),
        }
    }

    /// Flattened network inputs for one `(q_t, q_goal)` query in `ws`.
    pub fn inputs(
        &self,
        q_t: &JointVector,
        q_goal: &JointVector,
        ws: &Workspace,
        model: &KinematicModel,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        if ws.capacity != self.config.obstacle_slots {
            return Err(Error::shape(
                "inputs",
                format!(
                    "workspace has {} obstacle slots, network expects {}",
                    ws.capacity, self.config.obstacle_slots
                ),
            ));
        }
        let mode = self.config.feature_mode;
        let positions = if mode.needs_kinematics() {
            Some((
                joint_positions(model, q_t)?,
                joint_positions(model, q_goal)?,
            ))
        } else {
            None
        };
        let feats = node_features(
            mode,
            q_t,
            q_goal,
            positions.as_ref().map(|(a, b)| (a, b)),
            &Self::scales(ws, model),
        )?;
        Ok((feats.flat().to_vec(), obstacle_vector(ws)))
    }

    /// Proposes the next configuration from `q_t` toward `q_goal`, clamped to the joint limits.
    pub fn propose<R: Rng + ?Sized>(
        &self,
        q_t: &JointVector,
        q_goal: &JointVector,
        ws: &Workspace,
        model: &KinematicModel,
        mode: DropoutMode,
        rng: &mut R,
    ) -> Result<JointVector> {
        let (feats, obs) = self.inputs(q_t, q_goal, ws, model)?;
        let mut g = Graph::new();
        let f = g.constant(Tensor::row(&feats)?);
        let o = g.constant(Tensor::row(&obs)?);
        let out = self.forward(&mut g, f, o, mode, rng)?;
        let scale = model.angle_scale();
        let raw = g.value(out).data();
        let q = JointVector(std::array::from_fn(|i| raw[i] * scale));
        Ok(model.clamp(&q))
    }

    pub fn to_document(&self) -> Result<String> {
        let meta = serde_json::json!({ WEIGHTS_META_KEY: self.config });
        self.store.to_document(meta)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::formats::write_atomic(path, &self.to_document()?)
    }

    pub fn from_document(text: &str, path: Option<&Path>) -> Result<Self> {
        let (store, meta) = ParamStore::from_document(text, path)?;
        let config: HeuristicConfig = serde_json::from_value(meta[WEIGHTS_META_KEY].clone())
            .map_err(|e| {
                Error::MissingWeights(format!("weight file lacks a heuristic config: {e}"))
            })?;
        let mut h = Self::new(config, 0)?;
        h.store.load_values_from(&store)?;
        Ok(h)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_document(&crate::formats::read_text(path)?, Some(path))
    }
}

/// Stochastic next-configuration proposal with dropout active.
pub fn sample_next<R: Rng + ?Sized>(
    q_t: &JointVector,
    q_goal: &JointVector,
    ws: &Workspace,
    model: &KinematicModel,
    heuristic: &Heuristic,
    rng: &mut R,
) -> Result<JointVector> {
    heuristic.propose(q_t, q_goal, ws, model, DropoutMode::Sample, rng)
}
