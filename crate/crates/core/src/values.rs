//! Node values for every supported graph class.
//!
//! Values are propagated backwards as reciprocals `u = 1/v`: a node of
//! out-degree one halves its successor's reciprocal, a node of out-degree
//! `n >= 2` averages its successors' reciprocals. The propagation matrix
//! encodes exactly that rule, and the limiting reciprocal vector is its fixed
//! point (terminating graphs) or its Perron vector (strongly connected ones).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GameGraph, GraphClass};
use crate::linalg::{self, sup_norm_diff, Matrix};
use crate::scalar::{scalar_to_json, Scalar};

/// Power iteration stops once successive eigenvalue estimates agree to this
/// relative tolerance.
pub const EIGENVALUE_TOL: f64 = 1e-13;
/// ... and successive normalised iterates agree to this in the 1-norm.
pub const EIGENVECTOR_TOL: f64 = 1e-12;
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FanSolution<S> {
    pub root_value: S,
    pub chooser_probs: Vec<S>,
}

/// Closed-form solution of a single fan: the root value is twice the leaf
/// value for one leaf and the harmonic mean of the leaf values otherwise.
pub fn solve_fan<S: Scalar>(leaf_values: &[S]) -> Result<FanSolution<S>> {
    if leaf_values.is_empty() {
        return Err(Error::InvalidArgument("a fan needs at least one leaf".into()));
    }
    if let Some(bad) = leaf_values.iter().find(|v| **v <= S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "leaf values must be positive, got {bad}"
        )));
    }
    let n = leaf_values.len();
    if n == 1 {
        return Ok(FanSolution {
            root_value: S::from_usize(2) * leaf_values[0].clone(),
            chooser_probs: vec![S::one()],
        });
    }
    let recips: Vec<S> = leaf_values.iter().map(Scalar::recip).collect();
    let total = recips.iter().fold(S::zero(), |a, r| a + r.clone());
    Ok(FanSolution {
        root_value: S::from_usize(n) / total.clone(),
        chooser_probs: recips.into_iter().map(|r| r / total.clone()).collect(),
    })
}

/// Propagation matrix with its terminal / non-terminal partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationMatrix<S> {
    pub matrix: Matrix<S>,
    pub non_terminal: Vec<usize>,
    pub terminal: Vec<usize>,
}

impl<S: Scalar> PropagationMatrix<S> {
    /// Non-terminal to non-terminal block.
    pub fn a_block(&self) -> Matrix<S> {
        self.matrix.select(&self.non_terminal, &self.non_terminal)
    }

    /// Non-terminal to terminal block.
    pub fn b_block(&self) -> Matrix<S> {
        self.matrix.select(&self.non_terminal, &self.terminal)
    }
}

/// Entry for the edge `i -> j`: `1/2` when `i` has a single successor and
/// `1/n_i` otherwise. Terminal rows are the identity.
pub fn build_propagation_matrix<S: Scalar>(graph: &GameGraph) -> Result<PropagationMatrix<S>> {
    if let GraphClass::Unsupported(reason) = graph.classify() {
        return Err(Error::Unsupported(reason));
    }
    Ok(propagation_matrix_unchecked(graph))
}

pub(crate) fn propagation_matrix_unchecked<S: Scalar>(graph: &GameGraph) -> PropagationMatrix<S> {
    let n = graph.node_count();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        let succ = graph.successors(i);
        match succ.len() {
            0 => m[(i, i)] = S::one(),
            1 => m[(i, succ[0])] = S::half(),
            d => {
                let w = S::from_usize(d).recip();
                for &j in succ {
                    m[(i, j)] = w.clone();
                }
            }
        }
    }
    PropagationMatrix {
        matrix: m,
        non_terminal: graph.non_terminals(),
        terminal: graph.terminals(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectral<S> {
    /// Maximal eigenvalue of the propagation matrix.
    pub r: S,
    /// Positive right eigenvector, 1-norm normalised.
    pub right: Vec<S>,
    /// Positive left eigenvector, 1-norm normalised.
    pub left: Vec<S>,
    /// Discount factor that keeps limiting values finite; equal to `r`.
    pub discount: S,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameSolution<S> {
    pub class: GraphClass,
    pub values: Vec<S>,
    pub reciprocal_values: Vec<S>,
    /// Present exactly for strongly connected graphs.
    pub spectral: Option<Spectral<S>>,
}

impl<S: Scalar> GameSolution<S> {
    fn from_reciprocals(class: GraphClass, reciprocal_values: Vec<S>, spectral: Option<Spectral<S>>) -> Self {
        Self {
            class,
            values: reciprocal_values.iter().map(Scalar::recip).collect(),
            reciprocal_values,
            spectral,
        }
    }

    /// Eigenvalue the reciprocal values satisfy: `1` for terminating graphs.
    pub fn growth(&self) -> S {
        self.spectral.as_ref().map_or_else(S::one, |s| s.r.clone())
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    /// `{class, values: {label: v}, r?, discount?, residuals?}`.
    pub fn to_json(&self, graph: &GameGraph, residuals: Option<&[S]>) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (graph.label(i).to_owned(), scalar_to_json(v)))
            .collect();
        let mut doc = serde_json::json!({ "class": self.class, "values": values });
        if let Some(s) = &self.spectral {
            doc["r"] = scalar_to_json(&s.r);
            doc["discount"] = scalar_to_json(&s.discount);
        }
        if let Some(res) = residuals {
            doc["residuals"] = res.iter().map(scalar_to_json).collect();
        }
        doc
    }
}

/// Solves any supported graph with the algorithm suited to its class.
pub fn solve<S: Scalar>(graph: &GameGraph) -> Result<GameSolution<S>> {
    match graph.classify() {
        GraphClass::Fan | GraphClass::Tree => solve_tree(graph),
        GraphClass::Terminating => solve_terminating(graph),
        GraphClass::StronglyConnectedAperiodic => solve_strongly_connected(graph),
        GraphClass::Unsupported(reason) => Err(Error::Unsupported(reason)),
    }
}

/// Bottom-up recursion over a rooted tree; exact in rational arithmetic.
pub fn solve_tree<S: Scalar>(graph: &GameGraph) -> Result<GameSolution<S>> {
    let class = graph.classify();
    if !class.is_tree() {
        return Err(Error::Unsupported(format!(
            "expected a tree, found a {} graph",
            class.name()
        )));
    }
    let n = graph.node_count();
    let root = (0..n).find(|&i| graph.in_degrees()[i] == 0).expect("trees have a root");

    // iterative post-order so deep chains do not exhaust the stack
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![(root, false)];
    while let Some((node, expanded)) = stack.pop() {
        if expanded {
            order.push(node);
        } else {
            stack.push((node, true));
            stack.extend(graph.successors(node).iter().map(|&c| (c, false)));
        }
    }

    let mut u: Vec<Option<S>> = vec![None; n];
    for node in order {
        let succ = graph.successors(node);
        let value = match succ.len() {
            0 => graph.terminal_value_as::<S>(node).expect("validated").recip(),
            1 => u[succ[0]].clone().expect("children first") * S::half(),
            d => {
                let sum = succ
                    .iter()
                    .fold(S::zero(), |acc, &c| acc + u[c].clone().expect("children first"));
                sum / S::from_usize(d)
            }
        };
        u[node] = Some(value);
    }
    let u = u.into_iter().map(|x| x.expect("tree covers every node")).collect();
    Ok(GameSolution::from_reciprocals(class, u, None))
}

/// Absorbing solve `(I - A) u_NT = B u_T` by LU with partial pivoting.
pub fn solve_terminating<S: Scalar>(graph: &GameGraph) -> Result<GameSolution<S>> {
    let class = graph.classify();
    if !class.is_terminating() {
        return Err(Error::Unsupported(format!(
            "expected a terminating graph, found {class}"
        )));
    }
    let pm = propagation_matrix_unchecked::<S>(graph);
    let a = pm.a_block();
    let b = pm.b_block();
    let u_t: Vec<S> = pm
        .terminal
        .iter()
        .map(|&t| graph.terminal_value_as::<S>(t).expect("validated").recip())
        .collect();
    let k = pm.non_terminal.len();
    let lhs = {
        let mut m = Matrix::<S>::identity(k);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = m[(i, j)].clone() - a[(i, j)].clone();
            }
        }
        m
    };
    let rhs = b.mul_vec(&u_t);
    let u_nt = linalg::solve_vec(&lhs, &rhs).map_err(|s| Error::Singular {
        column: s.column,
        detail: format!("{} non-terminal nodes, {} terminal nodes", k, pm.terminal.len()),
    })?;

    let mut u = vec![S::zero(); graph.node_count()];
    for (&i, x) in pm.non_terminal.iter().zip(u_nt) {
        u[i] = x;
    }
    for (&t, x) in pm.terminal.iter().zip(u_t) {
        u[t] = x;
    }
    if let Some(i) = u.iter().position(|x| *x <= S::zero()) {
        return Err(Error::Singular {
            column: i,
            detail: format!("non-positive reciprocal value at node {:?}", graph.label(i)),
        });
    }
    Ok(GameSolution::from_reciprocals(class, u, None))
}

fn normalise_l1<S: Scalar>(v: &mut [S]) -> S {
    let norm = v.iter().fold(S::zero(), |a, x| a + x.abs());
    for x in v.iter_mut() {
        *x = x.clone() / norm.clone();
    }
    norm
}

struct PowerResult<S> {
    vector: Vec<S>,
    iterations: usize,
}

fn power_iteration<S: Scalar>(apply: impl Fn(&[S]) -> Vec<S>, n: usize) -> Result<PowerResult<S>> {
    let mut x = vec![S::from_usize(n).recip(); n];
    let mut previous = S::zero();
    let eig_tol = S::tolerance(EIGENVALUE_TOL);
    let vec_tol = S::tolerance(EIGENVECTOR_TOL);
    for iteration in 1..=MAX_POWER_ITERATIONS {
        let mut y = apply(&x);
        // x is positive with unit 1-norm, so the norm of Mx estimates r
        let estimate = normalise_l1(&mut y);
        let change = y
            .iter()
            .zip(&x)
            .fold(S::zero(), |a, (p, q)| a + (p.clone() - q.clone()).abs());
        let eig_change = (estimate.clone() - previous.clone()).abs();
        x = y;
        if iteration > 1 && eig_change <= eig_tol.clone() * estimate.clone() && change <= vec_tol {
            return Ok(PowerResult {
                vector: x,
                iterations: iteration,
            });
        }
        previous = estimate;
    }
    Err(Error::NoConvergence {
        iterations: MAX_POWER_ITERATIONS,
        residual: 0.0,
    })
}

/// Perron data of the propagation matrix by power iteration on `M` and `Mᵀ`,
/// with reciprocal values normalised to `lim r^-s M^s 1 = x (yᵀ1) / (xᵀy)`.
pub fn solve_strongly_connected<S: Scalar>(graph: &GameGraph) -> Result<GameSolution<S>> {
    if S::EXACT {
        return Err(Error::ExactUnsupported(
            "strongly connected graphs (eigenvalues are irrational in general)",
        ));
    }
    let class = graph.classify();
    if class != GraphClass::StronglyConnectedAperiodic {
        return Err(Error::Unsupported(format!(
            "expected a strongly connected aperiodic graph, found {class}"
        )));
    }
    let pm = propagation_matrix_unchecked::<S>(graph);
    let m = &pm.matrix;
    let n = graph.node_count();
    let right = power_iteration(|x| m.mul_vec(x), n).map_err(|e| with_residual(e, m))?;
    let left = power_iteration(|x| m.transpose_mul_vec(x), n).map_err(|e| with_residual(e, m))?;

    let ones_dot_y = left.vector.iter().fold(S::zero(), |a, y| a + y.clone());
    let x_dot_y = right
        .vector
        .iter()
        .zip(&left.vector)
        .fold(S::zero(), |a, (x, y)| a + x.clone() * y.clone());
    // the two-sided Rayleigh quotient is accurate to second order in the
    // eigenvector errors; r^-s scaling over hundreds of steps needs that
    let mx = m.mul_vec(&right.vector);
    let y_mx = mx
        .iter()
        .zip(&left.vector)
        .fold(S::zero(), |a, (p, y)| a + p.clone() * y.clone());
    let r = y_mx / x_dot_y.clone();
    let scale = ones_dot_y / x_dot_y;
    let u: Vec<S> = right.vector.iter().map(|x| x.clone() * scale.clone()).collect();

    let spectral = Spectral {
        r: r.clone(),
        right: right.vector,
        left: left.vector,
        discount: r,
        iterations: right.iterations.max(left.iterations),
    };
    Ok(GameSolution::from_reciprocals(class, u, Some(spectral)))
}

fn with_residual<S: Scalar>(err: Error, m: &Matrix<S>) -> Error {
    match err {
        Error::NoConvergence { iterations, .. } => {
            // report how far a single step moves the uniform vector
            let n = m.rows();
            let x = vec![S::from_usize(n).recip(); n];
            let y = m.mul_vec(&x);
            Error::NoConvergence {
                iterations,
                residual: sup_norm_diff(&x, &y).to_f64(),
            }
        }
        other => other,
    }
}

/// Iterates of the truncated game together with their distance to the limit.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSeries<S> {
    /// `iterates[s]` is the reciprocal value vector of the `s`-step game.
    pub iterates: Vec<Vec<S>>,
    /// `residuals[s] = ‖iterates[s] - u‖∞`.
    pub residuals: Vec<S>,
}

impl<S: Scalar> TruncationSeries<S> {
    pub fn final_residual(&self) -> &S {
        self.residuals.last().expect("at least the s = 0 entry")
    }
}

/// Reciprocal values of the `s`-step games for `s = 0..=steps`.
///
/// Terminating graphs start from `1` on non-terminal nodes and the terminal
/// reciprocals elsewhere; strongly connected graphs start from all ones and
/// are rescaled by `1/r` per step.
pub fn truncated_values<S: Scalar>(
    graph: &GameGraph,
    solution: &GameSolution<S>,
    steps: usize,
) -> Result<TruncationSeries<S>> {
    if solution.node_count() != graph.node_count() {
        return Err(Error::InvalidArgument("solution does not belong to this graph".into()));
    }
    let pm = propagation_matrix_unchecked::<S>(graph);
    let mut current: Vec<S> = (0..graph.node_count())
        .map(|i| match graph.terminal_value_as::<S>(i) {
            Some(v) => v.recip(),
            None => S::one(),
        })
        .collect();
    let inv_growth = solution.growth().recip();
    let mut iterates = Vec::with_capacity(steps + 1);
    let mut residuals = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        residuals.push(sup_norm_diff(&current, &solution.reciprocal_values));
        if s < steps {
            let next: Vec<S> = pm
                .matrix
                .mul_vec(&current)
                .into_iter()
                .map(|x| x * inv_growth.clone())
                .collect();
            iterates.push(std::mem::replace(&mut current, next));
        }
    }
    iterates.push(current);
    Ok(TruncationSeries { iterates, residuals })
}
