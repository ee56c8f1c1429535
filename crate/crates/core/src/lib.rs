//! Solver for the path guessing game with wagering.
//!
//! A chooser walks a directed graph while a guesser bets a fraction of their
//! fortune on each next step. This crate computes node values and optimal
//! strategies, the Markov chain that optimal play induces, Monte Carlo
//! simulation of the payoff rule, lying-oracle graph generators, and
//! independent verification oracles.
//!
//! The numerical core is generic over [`Scalar`], so fans, trees and
//! terminating graphs can be solved in `f32`, `f64` or exact rationals.

pub mod error;
pub mod graph;
pub mod linalg;
pub mod markov;
pub mod oracle;
pub mod scalar;
pub mod sim;
pub mod strategy;
pub mod values;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{aperiodicity_gcd, classify, parse_graph, to_dot, GameGraph, GraphBuilder, GraphClass};
pub use linalg::Matrix;
pub use markov::{analyze, fairness_check, invariant_measure, stopping_analysis, MarkovReport};
pub use oracle::{build_forbidden_pattern_game, build_stopping_variant, build_window_game, OracleKind, OracleSpec};
pub use scalar::{Rational, Scalar};
pub use sim::{exploit_search, run as simulate, Side, SimulationConfig, SimulationResult};
pub use strategy::{build_profile, chooser_transition_matrix, guess_distribution, NodeStrategy, StrategyProfile};
pub use values::{
    build_propagation_matrix, solve, solve_fan, solve_strongly_connected, solve_terminating, solve_tree,
    truncated_values, FanSolution, GameSolution, PropagationMatrix, Spectral, TruncationSeries,
};
pub use verify::{
    audit_convergence, brute_force_value, certify_fan, certify_graph, Certificate, ValueBounds, VerificationReport,
};

/// Double-precision solution, the default working type.
pub type Solution = GameSolution<f64>;
/// Solution in exact rational arithmetic.
pub type ExactSolution = GameSolution<Rational>;
pub type Profile = StrategyProfile<f64>;
pub type ExactProfile = StrategyProfile<Rational>;
