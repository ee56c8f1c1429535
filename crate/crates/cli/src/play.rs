//! Line-oriented game against the optimal opponent.
//!
//! The guesser's wager is announced before the chooser moves and the guess is
//! revealed only afterwards. A human chooser therefore sees the engine's
//! wager but not its guess; a human guesser commits to a guess and a wager
//! before the engine chooser's move is shown.

use std::io::{BufRead, Write};

use anyhow::{bail, Result};
use clap::ValueEnum;
use pathwager::scalar::format_significant;
use pathwager::sim::{payoff, replication_rng};
use pathwager::{guess_distribution, GameGraph, Profile};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Chooser,
    Guesser,
}

#[derive(Debug, Clone)]
pub struct PlayOptions {
    pub role: Role,
    pub seed: u64,
    pub start: usize,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub node: String,
    pub wager: f64,
    pub guess: String,
    pub choice: String,
    pub correct: bool,
    pub multiplier: f64,
    pub fortune: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub role: Role,
    pub beta: f64,
    pub seed: u64,
    pub start: String,
    pub rounds: Vec<RoundRecord>,
    pub final_node: String,
    /// Fortune before any terminal multiplier.
    pub fortune: f64,
    /// Fortune times the terminal value, once a terminal is reached.
    pub final_fortune: Option<f64>,
    pub finished: bool,
}

fn num(x: f64) -> String {
    format_significant(x, 12)
}

fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> Result<usize> {
    Ok(WeightedIndex::new(weights)?.sample(rng))
}

/// Successor position named by `token`: a node label, an edge label such as
/// `truth`, or a 1-based position in the list.
fn parse_move(graph: &GameGraph, node: usize, token: &str) -> Option<usize> {
    let succ = graph.successors(node);
    succ.iter()
        .position(|&j| graph.label(j) == token)
        .or_else(|| succ.iter().position(|&j| graph.edge_label(node, j) == Some(token)))
        .or_else(|| {
            token
                .parse::<usize>()
                .ok()
                .filter(|k| (1..=succ.len()).contains(k))
                .map(|k| k - 1)
        })
}

fn describe_moves(graph: &GameGraph, node: usize) -> String {
    graph
        .successors(node)
        .iter()
        .enumerate()
        .map(|(k, &j)| match graph.edge_label(node, j) {
            Some(l) => format!("{}) {} ({l})", k + 1, graph.label(j)),
            None => format!("{}) {}", k + 1, graph.label(j)),
        })
        .collect::<Vec<_>>()
        .join("  ")
}

enum Entry<T> {
    Value(T),
    Quit,
}

/// Prompts until `parse` accepts a line. `None` from `read_line` (end of
/// input) and `quit` both end the session.
fn ask<T, R: BufRead, W: Write>(
    input: &mut R,
    output: &mut W,
    prompt: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<Entry<T>> {
    loop {
        write!(output, "{prompt}")?;
        output.flush()?;
        let mut line = String::new();
        if input.read_line(&mut line)? == 0 {
            writeln!(output)?;
            return Ok(Entry::Quit);
        }
        let line = line.trim();
        if matches!(line, "q" | "quit" | "exit") {
            return Ok(Entry::Quit);
        }
        match parse(line) {
            Ok(v) => return Ok(Entry::Value(v)),
            Err(msg) => writeln!(output, "  {msg}; try again")?,
        }
    }
}

fn parse_wager(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(w) if (0.0..=1.0).contains(&w) => Ok(w),
        Ok(w) => Err(format!("wager {w} is outside [0, 1]")),
        Err(_) => Err(format!("{text:?} is not a number")),
    }
}

/// Runs one game. The engine plays `profile` for the side the human does not
/// take, drawing its random moves from `seed`.
pub fn play<R: BufRead, W: Write>(
    graph: &GameGraph,
    profile: &Profile,
    options: &PlayOptions,
    mut input: R,
    mut output: W,
) -> Result<Transcript> {
    if options.start >= graph.node_count() {
        bail!("start node out of range");
    }
    let mut rng = replication_rng(options.seed, 0);
    let mut node = options.start;
    let mut fortune = 1.0;
    let mut rounds = Vec::new();
    let mut final_fortune = None;
    let mut finished = false;
    let side = match options.role {
        Role::Chooser => "chooser",
        Role::Guesser => "guesser",
    };
    writeln!(output, "you are the {side}; fortune starts at 1. Type `quit` to stop.")?;

    loop {
        if let Some(v) = graph.terminal_value_as::<f64>(node) {
            let f = fortune * v;
            writeln!(
                output,
                "reached {} with value {}: final fortune {} x {} = {}",
                graph.label(node),
                num(v),
                num(fortune),
                num(v),
                num(f)
            )?;
            final_fortune = Some(f);
            finished = true;
            break;
        }
        if options.max_rounds.is_some_and(|m| rounds.len() >= m) {
            writeln!(output, "round limit reached")?;
            break;
        }
        let round = rounds.len() + 1;
        let succ = graph.successors(node);
        let n = succ.len();
        let strategy = profile.node(node).expect("non-terminal node has a strategy");
        writeln!(
            output,
            "round {round}: at {} with fortune {}",
            graph.label(node),
            num(fortune)
        )?;
        writeln!(output, "  moves: {}", describe_moves(graph, node))?;

        let (guess, choice, wager) = match options.role {
            Role::Chooser => {
                let wager = strategy.wager;
                let guess = sample(&guess_distribution(profile, graph, node)?, &mut rng)?;
                writeln!(
                    output,
                    "  guesser wagers {} of the fortune ({})",
                    num(wager),
                    num(wager * fortune)
                )?;
                let choice = if n == 1 {
                    writeln!(output, "  only one move: {}", graph.label(succ[0]))?;
                    0
                } else {
                    let parsed = ask(&mut input, &mut output, "  your move: ", |t| {
                        parse_move(graph, node, t)
                            .ok_or_else(|| format!("{t:?} is not a successor of {}", graph.label(node)))
                    })?;
                    match parsed {
                        Entry::Value(k) => k,
                        Entry::Quit => break,
                    }
                };
                writeln!(output, "  guesser had written down {}", graph.label(succ[guess]))?;
                (guess, choice, wager)
            }
            Role::Guesser => {
                let (guess, wager) = if n == 1 {
                    let parsed = ask(&mut input, &mut output, "  wager in [0, 1]: ", |t| {
                        let parts: Vec<&str> = t.split_whitespace().collect();
                        match parts.as_slice() {
                            [w] => parse_wager(w),
                            [g, w] if parse_move(graph, node, g).is_some() => parse_wager(w),
                            _ => Err("enter a wager".to_owned()),
                        }
                    })?;
                    match parsed {
                        Entry::Value(w) => (0, w),
                        Entry::Quit => break,
                    }
                } else {
                    let parsed = ask(&mut input, &mut output, "  guess and wager (e.g. `1 0.5`): ", |t| {
                        let mut parts = t.split_whitespace();
                        let (Some(g), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
                            return Err("enter a successor and a wager".to_owned());
                        };
                        let g = parse_move(graph, node, g)
                            .ok_or_else(|| format!("{g:?} is not a successor of {}", graph.label(node)))?;
                        Ok((g, parse_wager(w)?))
                    })?;
                    match parsed {
                        Entry::Value(v) => v,
                        Entry::Quit => break,
                    }
                };
                let choice = sample(&strategy.chooser, &mut rng)?;
                writeln!(output, "  chooser moved to {}", graph.label(succ[choice]))?;
                (guess, choice, wager)
            }
        };

        let correct = guess == choice;
        let multiplier = payoff(n, wager, correct);
        fortune *= multiplier;
        writeln!(
            output,
            "  guess {}: fortune x{} = {}",
            if correct { "right" } else { "wrong" },
            num(multiplier),
            num(fortune)
        )?;
        rounds.push(RoundRecord {
            round,
            node: graph.label(node).to_owned(),
            wager,
            guess: graph.label(succ[guess]).to_owned(),
            choice: graph.label(succ[choice]).to_owned(),
            correct,
            multiplier,
            fortune,
        });
        node = succ[choice];
    }
    if !finished {
        writeln!(output, "stopped at {} with fortune {}", graph.label(node), num(fortune))?;
    }
    Ok(Transcript {
        role: options.role,
        beta: profile.beta,
        seed: options.seed,
        start: graph.label(options.start).to_owned(),
        rounds,
        final_node: graph.label(node).to_owned(),
        fortune,
        final_fortune,
        finished,
    })
}
