//! Independent checks on solved games.
//!
//! Nothing here trusts the value engine: fan certificates evaluate the
//! saddle-point conditions directly, the brute-force bounds run backward
//! induction with a discretised guesser, and the convergence audit compares
//! matrix powers against limits computed from the graph alone.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GameGraph;
use crate::linalg::{self, Matrix};
use crate::sim::{exploit_search, Side};
use crate::strategy::{build_profile, round_multiplier, NodeStrategy};
use crate::values::{propagation_matrix_unchecked, solve, solve_fan, truncated_values, GameSolution};

pub const GAIN_TOL: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const SUM_IDENTITY_TOL: f64 = 1e-12;
pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_DEPTH: usize = 60;
pub const AUDIT_STEPS: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: impl Into<String>, measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub subject: String,
    pub value: Option<f64>,
    /// How far the chooser can push the fortune below the value.
    pub chooser_gain: Option<f64>,
    /// How far the guesser can push the fortune above the value.
    pub guesser_gain: Option<f64>,
    pub residual: Option<f64>,
    pub checks: Vec<Check>,
}

impl Certificate {
    fn new(subject: impl Into<String>) -> Self {
        Self {
            subject: subject.into(),
            value: None,
            chooser_gain: None,
            guesser_gain: None,
            residual: None,
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn uniform_grid(points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidArgument(
            "the wager grid needs at least two points".into(),
        ));
    }
    Ok((0..points).map(|k| k as f64 / (points - 1) as f64).collect())
}

/// Saddle-point certificate for one fan with `n >= 2` leaves.
///
/// (a) whatever the chooser picks, the guesser's strategy returns `H`;
/// (b) against the chooser's mixture no guess and no wager on the grid beats `H`;
/// (c) `sum_j E[F | C = j] / v_j = n`.
pub fn certify_fan(values: &[f64], strategy: &NodeStrategy<f64>, grid: usize) -> Result<Certificate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "fan certificates need at least two leaves".into(),
        ));
    }
    if strategy.chooser.len() != n || strategy.guesser.len() != n {
        return Err(Error::ProfileMismatch(format!(
            "{n} leaf values but {} chooser and {} guesser probabilities",
            strategy.chooser.len(),
            strategy.guesser.len()
        )));
    }
    let h = solve_fan(values)?.root_value;
    let w = strategy.wager;
    let by_choice: Vec<f64> = values
        .iter()
        .zip(&strategy.guesser)
        .map(|(v, g)| v * round_multiplier(n, &w, g))
        .collect();
    let chooser_gain = by_choice.iter().map(|e| h - e).fold(f64::NEG_INFINITY, f64::max);

    let mean: f64 = values.iter().zip(&strategy.chooser).map(|(v, p)| v * p).sum();
    let mut best = f64::NEG_INFINITY;
    for w in uniform_grid(grid)? {
        for (v, p) in values.iter().zip(&strategy.chooser) {
            best = best.max((1.0 - w) * mean + w * n as f64 * p * v);
        }
    }
    let guesser_gain = best - h;
    let sum_identity: f64 = by_choice.iter().zip(values).map(|(e, v)| e / v).sum();

    let scale = h.abs().max(1.0);
    let mut cert = Certificate::new(format!("fan with leaf values {values:?}"));
    cert.value = Some(h);
    cert.chooser_gain = Some(chooser_gain);
    cert.guesser_gain = Some(guesser_gain);
    cert.checks.push(Check::at_most(
        "chooser deviation",
        chooser_gain / scale,
        GAIN_TOL,
        format!("E[F | choice] = {by_choice:?}, value {h}"),
    ));
    cert.checks.push(Check::at_most(
        "guesser deviation",
        guesser_gain / scale,
        GAIN_TOL,
        format!("best grid response {best}, value {h}"),
    ));
    cert.checks.push(Check::at_most(
        "sum identity",
        (sum_identity - n as f64).abs(),
        SUM_IDENTITY_TOL,
        format!("sum of E[F | choice] / v = {sum_identity}, expected {n}"),
    ));
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Nodes whose upper bound is still infinite: no terminal within `depth`.
    pub censored: Vec<usize>,
    pub depth: usize,
    pub grid: usize,
}

impl ValueBounds {
    pub fn contains(&self, node: usize, value: f64, rel_tol: f64) -> bool {
        let slack = rel_tol * value.abs().max(1.0);
        self.lower[node] <= value + slack && value - slack <= self.upper[node]
    }

    pub fn width(&self, node: usize) -> f64 {
        self.upper[node] - self.lower[node]
    }
}

/// Guesser's best guaranteed multiple of the continuation values `leaf`
/// using only wagers from `grid`: for each wager, the best guess mixture
/// levels `L_j (1 - w + n w g_j)` over the cheapest successors.
fn grid_maximin(leaf: &[f64], grid: &[f64]) -> f64 {
    let n = leaf.len();
    if n == 1 {
        return grid.iter().fold(f64::NEG_INFINITY, |b, w| b.max((1.0 + w) * leaf[0]));
    }
    let mut recips: Vec<f64> = leaf.iter().map(|l| 1.0 / l).collect();
    recips.sort_by(|a, b| b.total_cmp(a));
    let prefix: Vec<f64> = recips
        .iter()
        .scan(0.0, |acc, u| {
            *acc += u;
            Some(*acc)
        })
        .collect();
    grid.iter()
        .map(|&w| {
            (1..=n)
                .map(|k| (n as f64 * w + k as f64 * (1.0 - w)) / prefix[k - 1])
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Bounds on every node's value from `depth` rounds of backward induction.
///
/// The lower bound starts unfinished positions at the smallest terminal value
/// and lets the guesser wager only on the grid; the upper bound starts them at
/// infinity and lets the guesser best-respond to the chooser's closed-form
/// mixture.
pub fn brute_force_value(graph: &GameGraph, grid: usize, depth: usize) -> Result<ValueBounds> {
    if !graph.classify().is_terminating() {
        return Err(Error::Unsupported("brute-force bounds need a terminating graph".into()));
    }
    let wagers = uniform_grid(grid)?;
    let n = graph.node_count();
    let terminal_value = |i: usize| graph.terminal_value_as::<f64>(i);
    let floor = graph
        .terminals()
        .into_iter()
        .filter_map(terminal_value)
        .fold(f64::INFINITY, f64::min);
    let mut lower: Vec<f64> = (0..n).map(|i| terminal_value(i).unwrap_or(floor)).collect();
    let mut upper: Vec<f64> = (0..n).map(|i| terminal_value(i).unwrap_or(f64::INFINITY)).collect();
    for _ in 0..depth {
        let mut next_lower = lower.clone();
        let mut next_upper = upper.clone();
        for i in 0..n {
            let succ = graph.successors(i);
            if succ.is_empty() {
                continue;
            }
            let lo: Vec<f64> = succ.iter().map(|&j| lower[j]).collect();
            next_lower[i] = grid_maximin(&lo, &wagers);
            let up_recip: f64 = succ.iter().map(|&j| 1.0 / upper[j]).sum();
            next_upper[i] = if succ.len() == 1 {
                2.0 * upper[succ[0]]
            } else {
                succ.len() as f64 / up_recip
            };
        }
        lower = next_lower;
        upper = next_upper;
    }
    let censored = (0..n).filter(|&i| upper[i].is_infinite()).collect();
    Ok(ValueBounds {
        lower,
        upper,
        censored,
        depth,
        grid,
    })
}

fn matrix_power(m: &Matrix<f64>, mut exp: usize) -> Matrix<f64> {
    let mut result = Matrix::identity(m.rows());
    let mut base = m.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.matmul(&base);
        }
        base = base.matmul(&base);
        exp >>= 1;
    }
    result
}

/// Compares `M^s` (or `r^-s M^s`) with its limit computed independently of
/// the solution, and the truncated values with the limiting ones.
pub fn audit_convergence(graph: &GameGraph, steps: usize) -> Result<Certificate> {
    let solution = solve::<f64>(graph)?;
    let pm = propagation_matrix_unchecked::<f64>(graph);
    let n = graph.node_count();
    let mut cert = Certificate::new(format!(
        "convergence of the {} graph after {steps} steps",
        solution.class
    ));

    let (power, limit) = match &solution.spectral {
        None => {
            let k = pm.non_terminal.len();
            let mut lhs = Matrix::identity(k);
            let a = pm.a_block();
            for r in 0..k {
                for c in 0..k {
                    lhs[(r, c)] -= a[(r, c)];
                }
            }
            let absorbed = linalg::solve(&lhs, &pm.b_block()).map_err(|s| Error::Singular {
                column: s.column,
                detail: "limit of the propagation matrix".into(),
            })?;
            let mut limit = Matrix::zeros(n, n);
            for (c, &t) in pm.terminal.iter().enumerate() {
                limit[(t, t)] = 1.0;
                for (r, &i) in pm.non_terminal.iter().enumerate() {
                    limit[(i, t)] = absorbed[(r, c)];
                }
            }
            (matrix_power(&pm.matrix, steps), limit)
        }
        Some(sp) => {
            let xy: f64 = sp.right.iter().zip(&sp.left).map(|(x, y)| x * y).sum();
            let mut limit = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    limit[(i, j)] = sp.right[i] * sp.left[j] / xy;
                }
            }
            let min_entry = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|ij| limit[ij])
                .fold(f64::INFINITY, f64::min);
            cert.checks.push(Check {
                name: "limit positivity".into(),
                passed: min_entry > 0.0,
                measured: min_entry,
                tolerance: 0.0,
                detail: "smallest entry of x yᵀ / (xᵀy)".into(),
            });
            (matrix_power(&pm.matrix.scale(&(1.0 / sp.r)), steps), limit)
        }
    };
    let gap = power.max_abs_diff(&limit);
    cert.checks.push(Check::at_most(
        "matrix limit",
        gap,
        RESIDUAL_TOL,
        "largest entrywise gap between the scaled matrix power and its limit",
    ));
    let series = truncated_values(graph, &solution, steps)?;
    let residual = *series.final_residual();
    cert.residual = Some(residual);
    cert.checks.push(Check::at_most(
        "truncated values",
        residual,
        RESIDUAL_TOL,
        "sup-norm distance of the truncated reciprocal values from the limit",
    ));
    Ok(cert)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub class: String,
    pub beta: f64,
    pub nodes: Vec<(String, Certificate)>,
    pub exploit: Option<Certificate>,
    pub bounds: Option<ValueBounds>,
    pub bounds_check: Option<Certificate>,
    pub convergence: Certificate,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.nodes.iter().all(|(_, c)| c.passed())
            && self.exploit.as_ref().is_none_or(Certificate::passed)
            && self.bounds_check.as_ref().is_none_or(Certificate::passed)
            && self.convergence.passed()
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let all = self
            .nodes
            .iter()
            .map(|(l, c)| (format!("node {l:?}"), c))
            .chain(self.exploit.iter().map(|c| ("best responses".to_owned(), c)))
            .chain(self.bounds_check.iter().map(|c| ("brute-force bounds".to_owned(), c)))
            .chain(std::iter::once(("convergence".to_owned(), &self.convergence)));
        for (what, cert) in all {
            for f in cert.failures() {
                out.push(format!("{what}: {} ({} > {})", f.name, f.measured, f.tolerance));
            }
        }
        out
    }
}

/// Every applicable certificate for a graph solved in `f64` with risk
/// parameter `beta`.
pub fn certify_graph(graph: &GameGraph, beta: f64, depth: usize, grid: usize) -> Result<VerificationReport> {
    let solution: GameSolution<f64> = solve(graph)?;
    let profile = build_profile(&solution, graph, beta)?;
    let growth = solution.growth();
    let v = &solution.values;

    let mut nodes = Vec::new();
    for i in 0..graph.node_count() {
        let Some(strategy) = profile.node(i) else { continue };
        let leaf: Vec<f64> = graph.successors(i).iter().map(|&j| growth * v[j]).collect();
        let label = graph.label(i).to_owned();
        let cert = if leaf.len() >= 2 {
            let mut cert = certify_fan(&leaf, strategy, grid)?;
            let h = cert.value.expect("fan value");
            cert.subject = format!("node {label:?}");
            cert.checks.push(Check::at_most(
                "node value",
                (h - v[i]).abs() / v[i].max(1.0),
                GAIN_TOL,
                format!("local fan value {h}, engine value {}", v[i]),
            ));
            cert
        } else {
            let mut cert = Certificate::new(format!("node {label:?}"));
            cert.value = Some(2.0 * leaf[0]);
            cert.checks.push(Check::at_most(
                "forced move wager",
                (1.0 - strategy.wager).abs(),
                0.0,
                "a single successor calls for staking everything",
            ));
            cert.checks.push(Check::at_most(
                "node value",
                (2.0 * leaf[0] - v[i]).abs() / v[i].max(1.0),
                GAIN_TOL,
                format!(
                    "twice the successor's value is {}, engine value {}",
                    2.0 * leaf[0],
                    v[i]
                ),
            ));
            cert
        };
        nodes.push((label, cert));
    }

    let (exploit, bounds, bounds_check) = if solution.class.is_terminating() {
        let mut exploit = Certificate::new("best responses against the limiting strategies");
        let chooser = exploit_search(graph, &solution, &profile, Side::Guesser, grid)?;
        let guesser = exploit_search(graph, &solution, &profile, Side::Chooser, grid)?;
        let scale = |node: usize| v[node].abs().max(1.0);
        exploit.chooser_gain = Some(chooser.gain);
        exploit.guesser_gain = Some(guesser.gain);
        exploit.checks.push(Check::at_most(
            "chooser best response",
            chooser.gain / scale(chooser.gain_node),
            GAIN_TOL,
            format!(
                "at node {:?} after {} iterations",
                graph.label(chooser.gain_node),
                chooser.iterations
            ),
        ));
        exploit.checks.push(Check::at_most(
            "guesser best response",
            guesser.gain / scale(guesser.gain_node),
            GAIN_TOL,
            format!(
                "at node {:?} after {} iterations",
                graph.label(guesser.gain_node),
                guesser.iterations
            ),
        ));

        let bounds = brute_force_value(graph, grid, depth)?;
        let mut check = Certificate::new(format!("backward induction to depth {depth} on a {grid}-point grid"));
        let outside = (0..graph.node_count())
            .filter(|&i| !bounds.contains(i, v[i], GAIN_TOL))
            .map(|i| graph.label(i).to_owned())
            .collect::<Vec<_>>();
        check.checks.push(Check {
            name: "bracket".into(),
            passed: outside.is_empty(),
            measured: outside.len() as f64,
            tolerance: 0.0,
            detail: if outside.is_empty() {
                "every value lies inside its bounds".into()
            } else {
                format!("values outside their bounds at {outside:?}")
            },
        });
        (Some(exploit), Some(bounds), Some(check))
    } else {
        (None, None, None)
    };

    Ok(VerificationReport {
        class: solution.class.to_string(),
        beta,
        nodes,
        exploit,
        bounds,
        bounds_check,
        convergence: audit_convergence(graph, AUDIT_STEPS)?,
    })
}
