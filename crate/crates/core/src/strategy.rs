//! Limiting strategies for both players.
//!
//! At every node the game looks locally like a fan whose leaves carry the
//! successors' values, so the chooser mixes proportionally to the successors'
//! reciprocal values and the guesser picks from the one-parameter family of
//! optimal responses indexed by the risk parameter `beta`.

use indexmap::IndexMap;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::GameGraph;
use crate::linalg::Matrix;
use crate::scalar::{scalar_from_json, scalar_to_json, Scalar};
use crate::values::GameSolution;

/// Probability vectors may drift from the simplex by at most this much
/// before they are treated as inconsistent.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Strategy at one non-terminal node. Vectors are aligned with the node's
/// sorted successor list.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStrategy<S> {
    pub chooser: Vec<S>,
    pub guesser: Vec<S>,
    pub wager: S,
    pub p_min: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile<S> {
    pub beta: S,
    nodes: Vec<Option<NodeStrategy<S>>>,
}

impl<S: Scalar> StrategyProfile<S> {
    /// Assembles a profile from explicit per-node strategies, e.g. a
    /// hand-crafted deviation. Terminal nodes must be `None`.
    pub fn from_parts(graph: &GameGraph, beta: S, nodes: Vec<Option<NodeStrategy<S>>>) -> Result<Self> {
        let profile = Self { beta, nodes };
        profile.check_shape(graph)?;
        for (i, node) in profile.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            let label = graph.label(i);
            check_distribution(&node.chooser, label, "chooser")?;
            check_distribution(&node.guesser, label, "guesser")?;
            if node.wager < S::zero() || node.wager > S::one() {
                return Err(Error::InconsistentStrategy {
                    node: label.to_owned(),
                    detail: format!("wager {} outside [0, 1]", node.wager),
                });
            }
        }
        Ok(profile)
    }

    pub fn node(&self, i: usize) -> Option<&NodeStrategy<S>> {
        self.nodes.get(i).and_then(Option::as_ref)
    }

    pub fn nodes(&self) -> &[Option<NodeStrategy<S>>] {
        &self.nodes
    }

    pub fn node_mut(&mut self, i: usize) -> Option<&mut NodeStrategy<S>> {
        self.nodes.get_mut(i).and_then(Option::as_mut)
    }

    pub fn check_shape(&self, graph: &GameGraph) -> Result<()> {
        if self.nodes.len() != graph.node_count() {
            return Err(Error::ProfileMismatch(format!(
                "profile covers {} nodes, graph has {}",
                self.nodes.len(),
                graph.node_count()
            )));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            let degree = graph.out_degree(i);
            match node {
                None if degree == 0 => {}
                None => {
                    return Err(Error::ProfileMismatch(format!(
                        "no strategy for non-terminal node {:?}",
                        graph.label(i)
                    )))
                }
                Some(_) if degree == 0 => {
                    return Err(Error::ProfileMismatch(format!(
                        "strategy given for terminal node {:?}",
                        graph.label(i)
                    )))
                }
                Some(s) if s.chooser.len() != degree || s.guesser.len() != degree => {
                    return Err(Error::ProfileMismatch(format!(
                        "node {:?} has {} successors but the strategy lists {} chooser and {} guesser entries",
                        graph.label(i),
                        degree,
                        s.chooser.len(),
                        s.guesser.len()
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// `{beta, nodes: {label: {wager, chooser: {succ: p}, guesser: {succ: g}}}}`
    pub fn to_json(&self, graph: &GameGraph) -> Value {
        let mut nodes = IndexMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            let Some(node) = node else { continue };
            let keyed = |probs: &[S]| -> IndexMap<String, Value> {
                graph
                    .successors(i)
                    .iter()
                    .zip(probs)
                    .map(|(&j, p)| (graph.label(j).to_owned(), scalar_to_json(p)))
                    .collect()
            };
            nodes.insert(
                graph.label(i).to_owned(),
                json!({
                    "wager": scalar_to_json(&node.wager),
                    "chooser": keyed(&node.chooser),
                    "guesser": keyed(&node.guesser),
                }),
            );
        }
        json!({ "beta": scalar_to_json(&self.beta), "nodes": nodes })
    }

    /// Reads the document written by [`StrategyProfile::to_json`]. Missing
    /// successor entries count as probability zero; `p_min` is recomputed.
    pub fn from_json(graph: &GameGraph, doc: &Value) -> Result<Self> {
        let bad = |msg: String| Error::ProfileMismatch(msg);
        let beta = doc
            .get("beta")
            .and_then(scalar_from_json::<S>)
            .ok_or_else(|| bad("missing or malformed beta".into()))?;
        let entries = doc
            .get("nodes")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing nodes object".into()))?;
        for label in entries.keys() {
            match graph.index_of(label) {
                Some(i) if !graph.is_terminal(i) => {}
                Some(_) => return Err(bad(format!("strategy given for terminal node {label:?}"))),
                None => return Err(bad(format!("unknown node {label:?}"))),
            }
        }
        let mut nodes = Vec::with_capacity(graph.node_count());
        for i in 0..graph.node_count() {
            if graph.is_terminal(i) {
                nodes.push(None);
                continue;
            }
            let label = graph.label(i);
            let entry = entries
                .get(label)
                .ok_or_else(|| bad(format!("no strategy for non-terminal node {label:?}")))?;
            let probs = |key: &str| -> Result<Vec<S>> {
                let map = entry
                    .get(key)
                    .and_then(Value::as_object)
                    .ok_or_else(|| bad(format!("node {label:?} lacks a {key} object")))?;
                for succ in map.keys() {
                    if graph.index_of(succ).is_none_or(|j| !graph.has_edge(i, j)) {
                        return Err(bad(format!(
                            "{key} at {label:?} names {succ:?}, which is not a successor"
                        )));
                    }
                }
                graph
                    .successors(i)
                    .iter()
                    .map(|&j| match map.get(graph.label(j)) {
                        None => Ok(S::zero()),
                        Some(v) => {
                            scalar_from_json(v).ok_or_else(|| bad(format!("malformed {key} probability at {label:?}")))
                        }
                    })
                    .collect()
            };
            let chooser = probs("chooser")?;
            let guesser = probs("guesser")?;
            let wager = entry
                .get("wager")
                .and_then(scalar_from_json::<S>)
                .ok_or_else(|| bad(format!("node {label:?} lacks a wager")))?;
            let p_min = min_of(&chooser);
            nodes.push(Some(NodeStrategy {
                chooser,
                guesser,
                wager,
                p_min,
            }));
        }
        Self::from_parts(graph, beta, nodes)
    }
}

fn min_of<S: Scalar>(v: &[S]) -> S {
    v.iter().cloned().reduce(S::min_of).unwrap_or_else(S::zero)
}

fn check_distribution<S: Scalar>(probs: &[S], node: &str, side: &str) -> Result<()> {
    let tol = S::tolerance(PROBABILITY_TOL);
    let total = probs.iter().fold(S::zero(), |a, p| a + p.clone());
    if probs.iter().any(|p| *p < -tol.clone()) || (total - S::one()).abs() > tol {
        return Err(Error::InconsistentStrategy {
            node: node.to_owned(),
            detail: format!("{side} probabilities do not form a distribution"),
        });
    }
    Ok(())
}

/// Clamps tiny negative entries to zero and renormalises; anything further
/// than [`PROBABILITY_TOL`] from a distribution is an error.
pub fn clamp_distribution<S: Scalar>(probs: &[S], node: &str) -> Result<Vec<S>> {
    check_distribution(probs, node, "guesser")?;
    let clamped: Vec<S> = probs.iter().map(|p| S::max_of(p.clone(), S::zero())).collect();
    let total = clamped.iter().fold(S::zero(), |a, p| a + p.clone());
    Ok(clamped.into_iter().map(|p| p / total.clone()).collect())
}

/// Optimal guesser response at a fan with chooser mixture `p`.
///
/// Returns `(wager, guess)` with `w = 1 - n beta p_min` and
/// `g_j = (p_j - beta p_min) / w`, which is the same as
/// `(n p_j - 1 + w) / (n w)` but never produces a negative entry. A zero wager
/// gets a uniform guess.
pub fn fan_guess<S: Scalar>(p: &[S], beta: &S) -> (S, Vec<S>) {
    let n = p.len();
    if n == 1 {
        return (S::one(), vec![S::one()]);
    }
    let p_min = min_of(p);
    if beta.is_zero() {
        return (S::one(), p.to_vec());
    }
    let wager = S::max_of(S::one() - S::from_usize(n) * beta.clone() * p_min.clone(), S::zero());
    let weights: Vec<S> = p.iter().map(|pj| pj.clone() - beta.clone() * p_min.clone()).collect();
    let total = weights.iter().fold(S::zero(), |a, x| a + x.clone());
    if wager.is_zero() || total <= S::zero() {
        return (S::zero(), vec![S::from_usize(n).recip(); n]);
    }
    (wager, weights.into_iter().map(|x| x / total.clone()).collect())
}

/// Limiting strategies for every node under risk parameter `beta`.
pub fn build_profile<S: Scalar>(solution: &GameSolution<S>, graph: &GameGraph, beta: S) -> Result<StrategyProfile<S>> {
    if beta < S::zero() || beta > S::one() {
        return Err(Error::InvalidArgument(format!("beta must lie in [0, 1], got {beta}")));
    }
    if solution.node_count() != graph.node_count() {
        return Err(Error::ProfileMismatch(format!(
            "solution covers {} nodes, graph has {}",
            solution.node_count(),
            graph.node_count()
        )));
    }
    let u = &solution.reciprocal_values;
    let nodes = (0..graph.node_count())
        .map(|i| {
            let succ = graph.successors(i);
            if succ.is_empty() {
                return None;
            }
            let total = succ.iter().fold(S::zero(), |a, &j| a + u[j].clone());
            let chooser: Vec<S> = if succ.len() == 1 {
                vec![S::one()]
            } else {
                succ.iter().map(|&j| u[j].clone() / total.clone()).collect()
            };
            let (wager, guesser) = fan_guess(&chooser, &beta);
            let p_min = min_of(&chooser);
            Some(NodeStrategy {
                chooser,
                guesser,
                wager,
                p_min,
            })
        })
        .collect();
    Ok(StrategyProfile { beta, nodes })
}

/// Guesser distribution at `node`, clamped onto the simplex.
pub fn guess_distribution<S: Scalar>(profile: &StrategyProfile<S>, graph: &GameGraph, node: usize) -> Result<Vec<S>> {
    let strategy = profile
        .node(node)
        .ok_or_else(|| Error::InvalidArgument(format!("node {:?} is terminal and has no guess", graph.label(node))))?;
    clamp_distribution(&strategy.guesser, graph.label(node))
}

/// Position chain under optimal play: `P = r^-1 V M V^-1`, with `r = 1` for
/// terminating graphs and unit self-loops on terminal nodes.
///
/// Rows are evaluated as `M_ij u_j / sum_k M_ik u_k`, which is the same matrix
/// when `u` is exact and stays stochastic to rounding when `u` carries the
/// eigenvector tolerance.
pub fn chooser_transition_matrix<S: Scalar>(solution: &GameSolution<S>, graph: &GameGraph) -> Result<Matrix<S>> {
    let n = graph.node_count();
    if solution.node_count() != n {
        return Err(Error::ProfileMismatch("solution does not belong to this graph".into()));
    }
    let u = &solution.reciprocal_values;
    let mut p = Matrix::zeros(n, n);
    for i in 0..n {
        let succ = graph.successors(i);
        if succ.is_empty() {
            p[(i, i)] = S::one();
            continue;
        }
        let total = succ.iter().fold(S::zero(), |a, &j| a + u[j].clone());
        for &j in succ {
            p[(i, j)] = u[j].clone() / total.clone();
        }
    }
    Ok(p)
}

/// Expected fortune multiplier for one round at `node` when the chooser
/// moves to the successor at position `choice` and the guesser follows the
/// profile.
pub fn expected_multiplier<S: Scalar>(
    profile: &StrategyProfile<S>,
    graph: &GameGraph,
    node: usize,
    choice: usize,
) -> Result<S> {
    let s = profile
        .node(node)
        .ok_or_else(|| Error::InvalidArgument(format!("node {:?} is terminal", graph.label(node))))?;
    if choice >= s.chooser.len() {
        return Err(Error::InvalidArgument(format!(
            "node {:?} has no successor at position {choice}",
            graph.label(node)
        )));
    }
    Ok(round_multiplier(s.chooser.len(), &s.wager, &s.guesser[choice]))
}

/// `E[F'/F]` for a round with `n` successors, wager `w`, and probability `g`
/// of guessing the realised choice.
pub fn round_multiplier<S: Scalar>(n: usize, w: &S, g: &S) -> S {
    if n == 1 {
        S::one() + w.clone()
    } else {
        S::one() - w.clone() + S::from_usize(n) * g.clone() * w.clone()
    }
}
