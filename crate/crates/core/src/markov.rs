//! The position chain induced by optimal play.
//!
//! On terminating graphs the chain is absorbing and we report stopping-time
//! moments, the stopping-time law and terminal hit probabilities. On strongly
//! connected graphs it is ergodic and we report the invariant measure and the
//! shape of the steady-state discounted fortunes.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::GameGraph;
use crate::linalg::{self, Matrix};
use crate::scalar::{scalar_to_json, Scalar};
use crate::sim::{MeanEstimate, SimulationResult};
use crate::strategy::chooser_transition_matrix;
use crate::values::GameSolution;

pub const DEFAULT_T_MAX: usize = 500;
pub const FAIRNESS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingAnalysis<S> {
    pub non_terminal: Vec<usize>,
    pub terminal: Vec<usize>,
    /// Expected number of rounds, aligned with `non_terminal`.
    pub tau: Vec<S>,
    /// `stop_dist[t - 1][a]` is `P(T = t | X_0 = non_terminal[a])`.
    pub stop_dist: Vec<Vec<S>>,
    /// `1 - sum_{t <= t_max} q_t` per non-terminal node.
    pub tail_mass: Vec<S>,
    /// Rows over `non_terminal`, columns over `terminal`.
    pub terminal_probs: Matrix<S>,
}

/// Stopping time and absorption law of the optimal-play chain:
/// `tau = V (I - A)^-1 u`, `q_t = V A^(t-1) B u_T`, `rho = V (I - A)^-1 B U_T`.
pub fn stopping_analysis<S: Scalar>(
    solution: &GameSolution<S>,
    graph: &GameGraph,
    t_max: usize,
) -> Result<StoppingAnalysis<S>> {
    if t_max < 1 {
        return Err(Error::InvalidArgument("t_max must be at least 1".into()));
    }
    if !solution.class.is_terminating() {
        return Err(Error::Unsupported(format!(
            "stopping times need a terminating graph, found {}",
            solution.class
        )));
    }
    let pm = crate::values::propagation_matrix_unchecked::<S>(graph);
    let nt = pm.non_terminal.clone();
    let te = pm.terminal.clone();
    let a = pm.a_block();
    let b = pm.b_block();
    let u = &solution.reciprocal_values;
    let v = &solution.values;
    let k = nt.len();

    // one solve with right-hand sides [u_NT | B U_T]
    let mut rhs = Matrix::zeros(k, 1 + te.len());
    for (row, &i) in nt.iter().enumerate() {
        rhs[(row, 0)] = u[i].clone();
        for (col, &t) in te.iter().enumerate() {
            rhs[(row, 1 + col)] = b[(row, col)].clone() * u[t].clone();
        }
    }
    let mut lhs = Matrix::<S>::identity(k);
    for r in 0..k {
        for c in 0..k {
            lhs[(r, c)] = lhs[(r, c)].clone() - a[(r, c)].clone();
        }
    }
    let x = linalg::solve(&lhs, &rhs).map_err(|s| Error::Singular {
        column: s.column,
        detail: "fundamental matrix of the absorbing chain".into(),
    })?;

    let tau: Vec<S> = nt
        .iter()
        .enumerate()
        .map(|(r, &i)| v[i].clone() * x[(r, 0)].clone())
        .collect();
    let mut terminal_probs = Matrix::zeros(k, te.len());
    for (r, &i) in nt.iter().enumerate() {
        for c in 0..te.len() {
            terminal_probs[(r, c)] = v[i].clone() * x[(r, 1 + c)].clone();
        }
    }

    let u_t: Vec<S> = te.iter().map(|&t| u[t].clone()).collect();
    let mut w = b.mul_vec(&u_t);
    let mut stop_dist = Vec::with_capacity(t_max);
    let mut tail_mass = vec![S::one(); k];
    for _ in 0..t_max {
        let q: Vec<S> = nt.iter().zip(&w).map(|(&i, wi)| v[i].clone() * wi.clone()).collect();
        for (m, qi) in tail_mass.iter_mut().zip(&q) {
            *m = m.clone() - qi.clone();
        }
        stop_dist.push(q);
        w = a.mul_vec(&w);
    }
    Ok(StoppingAnalysis {
        non_terminal: nt,
        terminal: te,
        tau,
        stop_dist,
        tail_mass,
        terminal_probs,
    })
}

impl<S: Scalar> StoppingAnalysis<S> {
    /// Position of `node` among the non-terminal rows.
    pub fn row_of(&self, node: usize) -> Option<usize> {
        self.non_terminal.iter().position(|&i| i == node)
    }

    /// `P(X_T = terminal | X_0 = start)`.
    pub fn hit_probability(&self, start: usize, terminal: usize) -> Option<S> {
        let r = self.row_of(start)?;
        let c = self.terminal.iter().position(|&t| t == terminal)?;
        Some(self.terminal_probs[(r, c)].clone())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Fairness {
    /// Verdict from the graph's structure alone.
    pub fair: bool,
    pub reason: String,
    /// Verdict from the computed values (`v = 1`, resp. `r = 1`).
    pub value_verdict: bool,
}

impl Fairness {
    pub fn consistent(&self) -> bool {
        self.fair == self.value_verdict
    }
}

/// A game is fair when every non-terminal node offers at least two moves and,
/// on terminating graphs, every terminal is worth exactly 1.
pub fn fairness_check<S: Scalar>(solution: &GameSolution<S>, graph: &GameGraph) -> Fairness {
    let mut violations = Vec::new();
    if let Some(i) = (0..graph.node_count()).find(|&i| graph.out_degree(i) == 1) {
        violations.push(format!("node {:?} has out-degree 1", graph.label(i)));
    }
    if let Some(t) = graph
        .terminals()
        .into_iter()
        .find(|&t| graph.terminal_value(t).is_some_and(|v| !num_traits::One::is_one(v)))
    {
        violations.push(format!(
            "terminal {:?} has value {} instead of 1",
            graph.label(t),
            crate::scalar::format_rational(graph.terminal_value(t).expect("terminal"))
        ));
    }
    let tol = S::tolerance(FAIRNESS_TOL);
    let value_verdict = match &solution.spectral {
        Some(sp) => (sp.r.clone() - S::one()).abs() <= tol,
        None => solution
            .values
            .iter()
            .all(|v| (v.clone() - S::one()).abs() <= tol.clone()),
    };
    let fair = violations.is_empty();
    let reason = if fair {
        if solution.spectral.is_some() {
            "every node has out-degree at least 2".to_owned()
        } else {
            "every non-terminal node has out-degree at least 2 and every terminal is worth 1".to_owned()
        }
    } else {
        violations.join("; ")
    };
    Fairness {
        fair,
        reason,
        value_verdict,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMeasure {
    pub mu: Vec<f64>,
    /// `‖Pᵀμ - μ‖∞`
    pub residual: f64,
}

/// `mu_i = x_i y_i / (xᵀy)` from the Perron vectors.
pub fn invariant_measure(solution: &GameSolution<f64>, graph: &GameGraph) -> Result<InvariantMeasure> {
    let sp = solution
        .spectral
        .as_ref()
        .ok_or_else(|| Error::Unsupported("the invariant measure needs a strongly connected graph".into()))?;
    let xy: Vec<f64> = sp.right.iter().zip(&sp.left).map(|(x, y)| x * y).collect();
    let total: f64 = xy.iter().sum();
    let mu: Vec<f64> = xy.iter().map(|p| p / total).collect();
    let p = chooser_transition_matrix(solution, graph)?;
    let moved = p.transpose_mul_vec(&mu);
    Ok(InvariantMeasure {
        residual: linalg::sup_norm_diff(&moved, &mu),
        mu,
    })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConstantEstimate {
    pub step: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// What the chain predicts for a fixed start: the start node's value.
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    /// `mu_j / v_j`, normalised to sum 1.
    pub shape: Vec<f64>,
    /// `c` in `eta_j = c mu_j / v_j`, estimated from a simulation.
    pub constant: Option<ConstantEstimate>,
}

/// Shape of the steady-state discounted fortunes, with the constant fitted to
/// a simulation when one is supplied.
///
/// The fit uses the joint means `E[D_t 1{X_t = j}]`, which converge to
/// `v_start mu_j / v_j`, by least squares through the origin against
/// `mu_j / v_j`. The estimate comes from the last checkpoint.
pub fn steady_state_fortunes(
    solution: &GameSolution<f64>,
    graph: &GameGraph,
    simulation: Option<&SimulationResult>,
) -> Result<SteadyState> {
    let mu = invariant_measure(solution, graph)?.mu;
    let raw: Vec<f64> = mu.iter().zip(&solution.values).map(|(m, v)| m / v).collect();
    let total: f64 = raw.iter().sum();
    let shape = raw.iter().map(|s| s / total).collect();

    let constant = match simulation {
        None => None,
        Some(sim) => {
            if sim.terminating || sim.replications.iter().any(|r| r.occupancy.len() != graph.node_count()) {
                return Err(Error::InvalidArgument(
                    "simulation does not belong to this graph".into(),
                ));
            }
            let step = sim
                .replications
                .first()
                .and_then(|r| r.checkpoints.last())
                .map(|c| c.step)
                .ok_or_else(|| Error::InvalidArgument("simulation recorded no checkpoints".into()))?;
            let norm: f64 = raw.iter().map(|s| s * s).sum();
            let samples = sim.replications.iter().map(|r| {
                let c = r.checkpoints.last().expect("every replication shares checkpoints");
                raw[c.node] * c.discounted_fortune / norm
            });
            let m = MeanEstimate::from_samples(samples).expect("at least one replication");
            Some(ConstantEstimate {
                step,
                estimate: m.mean,
                std_error: m.std_error,
                ci_low: m.mean - 1.96 * m.std_error,
                ci_high: m.mean + 1.96 * m.std_error,
                predicted: solution.values[sim.start],
            })
        }
    };
    Ok(SteadyState { shape, constant })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovReport {
    pub transition: Matrix<f64>,
    pub stopping: Option<StoppingAnalysis<f64>>,
    pub fairness: Fairness,
    pub invariant: Option<InvariantMeasure>,
    pub steady: Option<SteadyState>,
}

/// Every analysis that applies to the solution's graph class.
pub fn analyze(solution: &GameSolution<f64>, graph: &GameGraph, t_max: usize) -> Result<MarkovReport> {
    let transition = chooser_transition_matrix(solution, graph)?;
    let fairness = fairness_check(solution, graph);
    if solution.class.is_terminating() {
        Ok(MarkovReport {
            transition,
            stopping: Some(stopping_analysis(solution, graph, t_max)?),
            fairness,
            invariant: None,
            steady: None,
        })
    } else {
        Ok(MarkovReport {
            transition,
            stopping: None,
            fairness,
            invariant: Some(invariant_measure(solution, graph)?),
            steady: Some(steady_state_fortunes(solution, graph, None)?),
        })
    }
}

impl MarkovReport {
    /// JSON with every vector keyed by node label.
    pub fn to_json(&self, graph: &GameGraph) -> Value {
        let label = |i: usize| graph.label(i).to_owned();
        let keyed = |nodes: &[usize], xs: &[f64]| -> serde_json::Map<String, Value> {
            nodes
                .iter()
                .zip(xs)
                .map(|(&i, x)| (label(i), scalar_to_json(x)))
                .collect()
        };
        let all: Vec<usize> = (0..graph.node_count()).collect();
        let transition: serde_json::Map<String, Value> = all
            .iter()
            .map(|&i| {
                let row: serde_json::Map<String, Value> = all
                    .iter()
                    .filter(|&&j| self.transition[(i, j)] != 0.0)
                    .map(|&j| (label(j), scalar_to_json(&self.transition[(i, j)])))
                    .collect();
                (label(i), Value::Object(row))
            })
            .collect();
        let mut doc = json!({
            "transition": transition,
            "fairness": self.fairness,
        });
        if let Some(s) = &self.stopping {
            let rho: serde_json::Map<String, Value> = s
                .non_terminal
                .iter()
                .enumerate()
                .map(|(r, &i)| (label(i), Value::Object(keyed(&s.terminal, s.terminal_probs.row(r)))))
                .collect();
            let stop_dist: serde_json::Map<String, Value> = s
                .non_terminal
                .iter()
                .enumerate()
                .map(|(r, &i)| {
                    let series: Vec<Value> = s.stop_dist.iter().map(|q| scalar_to_json(&q[r])).collect();
                    (label(i), Value::Array(series))
                })
                .collect();
            doc["tau"] = Value::Object(keyed(&s.non_terminal, &s.tau));
            doc["terminal_probs"] = Value::Object(rho);
            doc["t_max"] = json!(s.stop_dist.len());
            doc["tail_mass"] = Value::Object(keyed(&s.non_terminal, &s.tail_mass));
            doc["stop_dist"] = Value::Object(stop_dist);
        }
        if let Some(m) = &self.invariant {
            doc["invariant_measure"] = Value::Object(keyed(&all, &m.mu));
            doc["invariant_residual"] = json!(m.residual);
        }
        if let Some(st) = &self.steady {
            doc["steady_shape"] = Value::Object(keyed(&all, &st.shape));
            if let Some(c) = &st.constant {
                doc["steady_constant"] = json!(c);
            }
        }
        doc
    }
}
