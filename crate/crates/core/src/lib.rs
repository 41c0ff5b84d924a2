//! Neuroevolution of multi-brain substrate controllers.
//!
//! A CPPN genome ([`Genome`]) is compiled into an executable query plan
//! ([`CompiledCppn`]) and decoded onto a geometric substrate
//! ([`SubstrateSpec`]) to produce one or more [`BrainNetwork`]s. A
//! [`MultiBrainController`] arbitrates between brains while an agent is
//! evaluated in one of four deterministic 2D robot domains. The [`evolve`]
//! module runs the generational loop and the [`stats`] module provides the
//! nonparametric tests used to compare methods across runs.

pub mod activation;
pub mod controller;
pub mod cppn;
pub mod domains;
pub mod error;
pub mod evolve;
pub mod genome;
pub mod geometry;
pub mod stats;
pub mod substrate;

pub use activation::Activation;
pub use controller::{Action, AgentPolicy, ArbitrationPolicy, Motor, MultiBrainController};
pub use cppn::CompiledCppn;
pub use domains::{DomainConfig, DomainKind, Environment, EvalResult, RobotState};
pub use error::Error;
pub use evolve::{EvolutionConfig, Method, RunState};
pub use genome::{DecodeFamily, Genome, InnovationRegistry, LinkGene, NodeGene};
pub use stats::TestResult;
pub use substrate::{BrainNetwork, DecodeMode, SubstrateSpec};
