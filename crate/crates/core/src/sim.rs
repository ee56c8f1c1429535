//! Monte Carlo play and exact best-response search.
//!
//! Every replication owns a ChaCha8 stream selected by its index, so results
//! do not depend on how rayon schedules the work.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GameGraph;
use crate::strategy::{round_multiplier, StrategyProfile};
use crate::values::GameSolution;

pub const DEFAULT_MAX_STEPS: usize = 100_000;
/// Fraction of censored runs above which a result carries a warning.
pub const CENSORING_WARNING: f64 = 0.01;

/// Fortune multiplier of one round: `1 + (n-1)w` for a correct guess among
/// `n >= 2` successors, `1 + w` for the forced move, `1 - w` for a miss.
pub fn payoff(n: usize, wager: f64, correct: bool) -> f64 {
    match (correct, n) {
        (true, 1) => 1.0 + wager,
        (true, _) => 1.0 + (n as f64 - 1.0) * wager,
        (false, _) => 1.0 - wager,
    }
}

/// The RNG for replication `rep` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub guess: usize,
    pub next: usize,
    pub wager: f64,
    pub correct: bool,
    pub fortune: f64,
}

/// A profile prepared for sampling.
#[derive(Debug, Clone)]
pub struct Engine<'a> {
    graph: &'a GameGraph,
    profile: &'a StrategyProfile<f64>,
    chooser: Vec<Option<WeightedIndex<f64>>>,
    guesser: Vec<Option<WeightedIndex<f64>>>,
}

impl<'a> Engine<'a> {
    pub fn new(graph: &'a GameGraph, profile: &'a StrategyProfile<f64>) -> Result<Self> {
        profile.check_shape(graph)?;
        let table = |pick: fn(&crate::strategy::NodeStrategy<f64>) -> &Vec<f64>, side: &str| {
            (0..graph.node_count())
                .map(|i| {
                    profile
                        .node(i)
                        .map(|s| {
                            WeightedIndex::new(pick(s).iter().map(|p| p.max(0.0))).map_err(|e| {
                                Error::InconsistentStrategy {
                                    node: graph.label(i).to_owned(),
                                    detail: format!("{side} distribution: {e}"),
                                }
                            })
                        })
                        .transpose()
                })
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            graph,
            profile,
            chooser: table(|s| &s.chooser, "chooser")?,
            guesser: table(|s| &s.guesser, "guesser")?,
        })
    }

    pub fn graph(&self) -> &GameGraph {
        self.graph
    }

    /// One round from `node`: the guess and the choice are drawn
    /// independently, then the payoff rule is applied to `fortune`.
    pub fn play_step<R: Rng + ?Sized>(&self, node: usize, fortune: f64, rng: &mut R) -> Step {
        let succ = self.graph.successors(node);
        let strategy = self.profile.node(node).expect("play_step needs a non-terminal node");
        let guess = succ[self.guesser[node].as_ref().expect("non-terminal").sample(rng)];
        let next = succ[self.chooser[node].as_ref().expect("non-terminal").sample(rng)];
        let correct = guess == next;
        let wager = strategy.wager;
        Step {
            guess,
            next,
            wager,
            correct,
            fortune: fortune * payoff(succ.len(), wager, correct),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub start: usize,
    pub replications: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// Per-step discount applied to the recorded fortune; `1` when absent.
    pub discount: Option<f64>,
    /// Steps at which strongly connected runs record the discounted fortune.
    pub checkpoints: Vec<usize>,
}

impl SimulationConfig {
    pub fn new(start: usize, replications: usize, seed: u64) -> Self {
        Self {
            start,
            replications,
            max_steps: DEFAULT_MAX_STEPS,
            seed,
            discount: None,
            checkpoints: Vec::new(),
        }
    }

    pub fn max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn discount(mut self, d: f64) -> Self {
        self.discount = Some(d);
        self
    }

    pub fn checkpoints(mut self, checkpoints: impl IntoIterator<Item = usize>) -> Self {
        self.checkpoints = checkpoints.into_iter().collect();
        self.checkpoints.sort_unstable();
        self.checkpoints.dedup();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoint {
    pub step: usize,
    pub node: usize,
    pub discounted_fortune: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replication {
    /// Fortune after the terminal multiplier; `None` when censored or when
    /// the graph has no terminal nodes.
    pub final_fortune: Option<f64>,
    pub steps: usize,
    pub terminal: Option<usize>,
    pub checkpoints: Vec<Checkpoint>,
    /// Fraction of steps `1..=steps` spent at each node (strongly connected
    /// runs only).
    pub occupancy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Option<Self> {
        let xs: Vec<f64> = xs.into_iter().collect();
        let n = xs.len();
        if n == 0 {
            return None;
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std_error,
            samples: n,
        })
    }

    /// `|mean - target| <= k SE`, with a small absolute slack so that
    /// deterministic samples (zero SE) still compare equal.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error + 1e-9 * target.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub completed: usize,
    pub censored: usize,
    pub mean_fortune: Option<MeanEstimate>,
    pub mean_steps: Option<MeanEstimate>,
    /// Terminal hit frequencies among completed runs, indexed like the graph.
    pub terminal_frequencies: Vec<Option<MeanEstimate>>,
    pub stop_histogram: BTreeMap<usize, usize>,
    pub checkpoint_means: Vec<(usize, MeanEstimate)>,
    pub occupancy: Vec<MeanEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub seed: u64,
    pub start: usize,
    pub discount: f64,
    pub terminating: bool,
    pub replications: Vec<Replication>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

impl SimulationResult {
    pub fn censored_fraction(&self) -> f64 {
        self.summary.censored as f64 / self.replications.len().max(1) as f64
    }
}

/// Plays `config.replications` independent games from `config.start`.
pub fn run(graph: &GameGraph, profile: &StrategyProfile<f64>, config: &SimulationConfig) -> Result<SimulationResult> {
    let engine = Engine::new(graph, profile)?;
    if config.start >= graph.node_count() || graph.is_terminal(config.start) {
        return Err(Error::InvalidArgument(
            "the start node must be a non-terminal node".into(),
        ));
    }
    if config.replications == 0 || config.max_steps == 0 {
        return Err(Error::InvalidArgument(
            "replications and max_steps must be positive".into(),
        ));
    }
    let discount = config.discount.unwrap_or(1.0);
    if !(discount > 0.0 && discount <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "discount must lie in (0, 1], got {discount}"
        )));
    }
    let terminating = !graph.terminals().is_empty();

    let replications: Vec<Replication> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = replication_rng(config.seed, rep as u64);
            if terminating {
                play_to_absorption(&engine, config, discount, &mut rng)
            } else {
                play_horizon(&engine, config, discount, &mut rng)
            }
        })
        .collect();

    let summary = summarise(graph, &replications, terminating);
    let mut warnings = Vec::new();
    if summary.censored as f64 > CENSORING_WARNING * replications.len() as f64 {
        warnings.push(format!(
            "{} of {} runs hit the {}-step cap before absorbing",
            summary.censored,
            replications.len(),
            config.max_steps
        ));
    }
    Ok(SimulationResult {
        seed: config.seed,
        start: config.start,
        discount,
        terminating,
        replications,
        summary,
        warnings,
    })
}

fn play_to_absorption(engine: &Engine, config: &SimulationConfig, discount: f64, rng: &mut ChaCha8Rng) -> Replication {
    let graph = engine.graph();
    let mut node = config.start;
    let mut fortune = 1.0;
    let mut steps = 0;
    while !graph.is_terminal(node) && steps < config.max_steps {
        let step = engine.play_step(node, fortune, rng);
        node = step.next;
        fortune = step.fortune * discount;
        steps += 1;
    }
    let terminal = graph.is_terminal(node).then_some(node);
    Replication {
        final_fortune: terminal
            .map(|t| fortune * graph.terminal_value(t).map_or(f64::NAN, crate::scalar::Scalar::to_f64)),
        steps,
        terminal,
        checkpoints: Vec::new(),
        occupancy: Vec::new(),
    }
}

fn play_horizon(engine: &Engine, config: &SimulationConfig, discount: f64, rng: &mut ChaCha8Rng) -> Replication {
    let n = engine.graph().node_count();
    let mut visits = vec![0usize; n];
    let mut node = config.start;
    let mut fortune = 1.0;
    let mut checkpoints = Vec::with_capacity(config.checkpoints.len());
    let mut pending = config.checkpoints.iter().peekable();
    for t in 1..=config.max_steps {
        let step = engine.play_step(node, fortune, rng);
        node = step.next;
        fortune = step.fortune * discount;
        visits[node] += 1;
        while pending.next_if(|&&c| c <= t).is_some_and(|&c| c == t) {
            checkpoints.push(Checkpoint {
                step: t,
                node,
                discounted_fortune: fortune,
            });
        }
    }
    Replication {
        final_fortune: None,
        steps: config.max_steps,
        terminal: None,
        checkpoints,
        occupancy: visits.iter().map(|&c| c as f64 / config.max_steps as f64).collect(),
    }
}

fn summarise(graph: &GameGraph, reps: &[Replication], terminating: bool) -> Summary {
    let completed: Vec<&Replication> = reps.iter().filter(|r| r.terminal.is_some()).collect();
    let censored = if terminating { reps.len() - completed.len() } else { 0 };
    let mut stop_histogram = BTreeMap::new();
    for r in &completed {
        *stop_histogram.entry(r.steps).or_insert(0) += 1;
    }
    let terminal_frequencies = (0..graph.node_count())
        .map(|t| {
            (terminating && graph.is_terminal(t))
                .then(|| {
                    MeanEstimate::from_samples(completed.iter().map(|r| f64::from(u8::from(r.terminal == Some(t)))))
                })
                .flatten()
        })
        .collect();
    let mut checkpoint_means = Vec::new();
    if let Some(first) = reps.first() {
        for (k, c) in first.checkpoints.iter().enumerate() {
            if let Some(m) = MeanEstimate::from_samples(reps.iter().map(|r| r.checkpoints[k].discounted_fortune)) {
                checkpoint_means.push((c.step, m));
            }
        }
    }
    let occupancy = if terminating {
        Vec::new()
    } else {
        (0..graph.node_count())
            .filter_map(|j| MeanEstimate::from_samples(reps.iter().map(|r| r.occupancy[j])))
            .collect()
    };
    Summary {
        completed: completed.len(),
        censored,
        mean_fortune: MeanEstimate::from_samples(completed.iter().filter_map(|r| r.final_fortune)),
        mean_steps: MeanEstimate::from_samples(completed.iter().map(|r| r.steps as f64)),
        terminal_frequencies,
        stop_histogram,
        checkpoint_means,
        occupancy,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Chooser,
    Guesser,
}

/// Best action found at one node by the deviating side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDeviation {
    /// Position in the successor list of the chosen successor or guess.
    pub action: usize,
    /// Wager of the best guesser deviation; `None` for chooser deviations.
    pub wager: Option<f64>,
    /// Value of each successor action under the converged continuation.
    pub action_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    /// The side held at the supplied profile.
    pub fixed: Side,
    /// Best value the deviating side achieves from each node.
    pub values: Vec<f64>,
    /// Largest improvement over the game value for the deviating side.
    pub gain: f64,
    pub gain_node: usize,
    pub nodes: Vec<Option<NodeDeviation>>,
    pub iterations: usize,
    pub converged: bool,
}

pub const EXPLOIT_MAX_ITERATIONS: usize = 10_000;
pub const EXPLOIT_TOL: f64 = 1e-15;

/// Exact best response of one side against the other held at `profile`.
///
/// With the guesser fixed, the chooser picks a successor at each node to
/// minimise the expected fortune; with the chooser fixed, the guesser picks a
/// guess and a wager from `grid` evenly spaced points in `[0, 1]`. Values
/// come from value iteration started at the solution's values, so positions
/// that never absorb keep their limiting value.
pub fn exploit_search(
    graph: &GameGraph,
    solution: &GameSolution<f64>,
    profile: &StrategyProfile<f64>,
    fixed: Side,
    grid: usize,
) -> Result<Deviation> {
    if !solution.class.is_terminating() {
        return Err(Error::Unsupported(format!(
            "exact best responses need a terminating graph, found {}",
            solution.class
        )));
    }
    profile.check_shape(graph)?;
    if grid < 2 {
        return Err(Error::InvalidArgument(
            "the wager grid needs at least two points".into(),
        ));
    }
    let n = graph.node_count();
    let wagers: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let mut values = solution.values.clone();
    let mut nodes: Vec<Option<NodeDeviation>> = vec![None; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < EXPLOIT_MAX_ITERATIONS {
        iterations += 1;
        let mut next = values.clone();
        for i in 0..n {
            let Some(s) = profile.node(i) else { continue };
            let succ = graph.successors(i);
            let deviation = match fixed {
                Side::Guesser => {
                    let action_values: Vec<f64> = (0..succ.len())
                        .map(|k| round_multiplier(succ.len(), &s.wager, &s.guesser[k]) * values[succ[k]])
                        .collect();
                    let (action, best) = arg_best(&action_values, |a, b| a < b);
                    next[i] = best;
                    NodeDeviation {
                        action,
                        wager: None,
                        action_values,
                    }
                }
                Side::Chooser => {
                    let mean: f64 = succ.iter().zip(&s.chooser).map(|(&j, p)| p * values[j]).sum();
                    let mut action_values = Vec::with_capacity(succ.len());
                    let mut best_wager = Vec::with_capacity(succ.len());
                    for (&j, p) in succ.iter().zip(&s.chooser) {
                        let hit = p * values[j];
                        let by_wager: Vec<f64> = wagers
                            .iter()
                            .map(|&w| {
                                if succ.len() == 1 {
                                    (1.0 + w) * values[j]
                                } else {
                                    (1.0 - w) * mean + w * succ.len() as f64 * hit
                                }
                            })
                            .collect();
                        let (wi, v) = arg_best(&by_wager, |a, b| a > b);
                        action_values.push(v);
                        best_wager.push(wagers[wi]);
                    }
                    let (action, best) = arg_best(&action_values, |a, b| a > b);
                    next[i] = best;
                    NodeDeviation {
                        action,
                        wager: Some(best_wager[action]),
                        action_values,
                    }
                }
            };
            nodes[i] = Some(deviation);
        }
        let change = values
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        values = next;
        if change <= EXPLOIT_TOL || !change.is_finite() {
            converged = change.is_finite();
            break;
        }
    }

    let gains: Vec<f64> = (0..n)
        .map(|i| match fixed {
            Side::Guesser => solution.values[i] - values[i],
            Side::Chooser => values[i] - solution.values[i],
        })
        .collect();
    let (gain_node, gain) =
        gains.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |best, (i, g)| if g > best.1 { (i, g) } else { best },
        );
    Ok(Deviation {
        fixed,
        values,
        gain,
        gain_node,
        nodes,
        iterations,
        converged,
    })
}

/// First index whose value beats every other under `better`.
fn arg_best(xs: &[f64], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    xs.iter()
        .copied()
        .enumerate()
        .fold((0, xs[0]), |best, (i, x)| if better(x, best.1) { (i, x) } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::strategy::build_profile;
    use crate::values::solve;

    fn fan24() -> GameGraph {
        parse_graph(r#"{"nodes":["r","a","b"],"edges":[["r","a"],["r","b"]],"values":{"a":2,"b":4}}"#).unwrap()
    }

    #[test]
    fn payoff_rule() {
        assert_eq!(payoff(1, 1.0, true), 2.0);
        assert_eq!(payoff(3, 0.5, true), 2.0);
        assert_eq!(payoff(3, 0.5, false), 0.5);
        assert_eq!(payoff(2, 0.0, false), 1.0);
    }

    #[test]
    fn forced_move_doubles() {
        let g = parse_graph(r#"{"nodes":["a","t"],"edges":[["a","t"]],"values":{"t":1}}"#).unwrap();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        let e = Engine::new(&g, &p).unwrap();
        let step = e.play_step(0, 3.0, &mut replication_rng(1, 0));
        assert_eq!((step.next, step.fortune), (1, 6.0));
    }

    #[test]
    fn harmonic_mean_is_guaranteed() {
        let g = fan24();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        let r = run(&g, &p, &SimulationConfig::new(0, 500, 7)).unwrap();
        assert!(r
            .replications
            .iter()
            .all(|x| (x.final_fortune.unwrap() - 8.0 / 3.0).abs() < 1e-12));
        assert_eq!(r.summary.completed, 500);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn seeds_reproduce() {
        let g = fan24();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 0.5).unwrap();
        let cfg = SimulationConfig::new(0, 200, 99);
        assert_eq!(run(&g, &p, &cfg).unwrap(), run(&g, &p, &cfg).unwrap());
        let other = run(&g, &p, &SimulationConfig::new(0, 200, 100)).unwrap();
        assert_ne!(run(&g, &p, &cfg).unwrap().replications, other.replications);
    }

    #[test]
    fn censoring_is_flagged() {
        let g = parse_graph(r#"{"nodes":["1","t"],"edges":[["1","1"],["1","t"]],"values":{"t":1}}"#).unwrap();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        let r = run(&g, &p, &SimulationConfig::new(0, 400, 3).max_steps(1)).unwrap();
        assert!(r.summary.censored > 100);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn horizon_checkpoints() {
        let g = parse_graph(r#"{"nodes":["1","2"],"edges":[["1","1"],["1","2"],["2","1"]]}"#).unwrap();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        let cfg = SimulationConfig::new(0, 50, 5)
            .max_steps(20)
            .discount(s.growth())
            .checkpoints([5, 20]);
        let r = run(&g, &p, &cfg).unwrap();
        assert_eq!(r.summary.checkpoint_means.len(), 2);
        assert!(r.replications.iter().all(|x| x.checkpoints.len() == 2));
        assert!(r
            .replications
            .iter()
            .all(|x| (x.occupancy.iter().sum::<f64>() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn start_must_be_playable() {
        let g = fan24();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        assert!(run(&g, &p, &SimulationConfig::new(1, 10, 0)).is_err());
        assert!(run(&g, &p, &SimulationConfig::new(0, 0, 0)).is_err());
    }

    #[test]
    fn no_profitable_deviation_at_equilibrium() {
        let g = fan24();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        let c = exploit_search(&g, &s, &p, Side::Guesser, 101).unwrap();
        let root = c.nodes[0].as_ref().unwrap();
        assert!(root.action_values.iter().all(|v| (v - 8.0 / 3.0).abs() < 1e-12));
        let d = exploit_search(&g, &s, &p, Side::Chooser, 101).unwrap();
        assert!(d.values[0] <= 8.0 / 3.0 + 1e-12);
        assert!(d.gain <= 1e-12);
    }

    #[test]
    fn skewed_chooser_is_exploited() {
        let g = fan24();
        let s = solve::<f64>(&g).unwrap();
        let mut p = build_profile(&s, &g, 1.0).unwrap();
        p.node_mut(0).unwrap().chooser = vec![0.6, 0.4];
        let d = exploit_search(&g, &s, &p, Side::Chooser, 101).unwrap();
        assert!(d.gain > 1e-3, "{}", d.gain);
        assert_eq!(d.gain_node, 0);
    }

    #[test]
    fn exploit_needs_absorption() {
        let g = parse_graph(r#"{"nodes":["1","2"],"edges":[["1","1"],["1","2"],["2","1"]]}"#).unwrap();
        let s = solve::<f64>(&g).unwrap();
        let p = build_profile(&s, &g, 1.0).unwrap();
        assert!(exploit_search(&g, &s, &p, Side::Chooser, 11).is_err());
    }
}
