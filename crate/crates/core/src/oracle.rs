//! Lying-oracle games compiled to game graphs.
//!
//! An oracle answers a stream of yes/no questions and may lie, subject to a
//! constraint on the pattern of lies. The set of admissible truth/lie streams
//! is recognised by a finite automaton; playing the guessing game on that
//! automaton is the same as betting on whether the oracle lies next.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{GameGraph, GraphClass};
use crate::scalar::Rational;
use crate::strategy::build_profile;
use crate::values::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Truth,
    Lie,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Truth => "truth",
            Outcome::Lie => "lie",
        }
    }

    fn letter(self) -> char {
        match self {
            Outcome::Truth => 'T',
            Outcome::Lie => 'L',
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses a pattern written as `T`/`L` letters (`LTL`, `L T L`) or as words
/// (`lie truth lie`). Tokens may be separated by whitespace or commas.
pub fn parse_pattern(text: &str) -> Result<Vec<Outcome>> {
    let mut out = Vec::new();
    for token in text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
    {
        match token.to_ascii_lowercase().as_str() {
            "truth" => out.push(Outcome::Truth),
            "lie" => out.push(Outcome::Lie),
            letters => {
                for c in letters.chars() {
                    out.push(match c {
                        't' => Outcome::Truth,
                        'l' => Outcome::Lie,
                        _ => {
                            return Err(Error::InvalidArgument(format!(
                                "pattern token {token:?} is neither T/L letters nor truth/lie"
                            )))
                        }
                    });
                }
            }
        }
    }
    Ok(out)
}

/// One pattern per non-empty line; `#` starts a comment.
pub fn parse_pattern_file(text: &str) -> Result<Vec<Vec<Outcome>>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_pattern)
        .collect()
}

pub fn pattern_string(pattern: &[Outcome]) -> String {
    pattern.iter().map(|o| o.letter()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleKind {
    /// At most `k` lies in any `n` consecutive answers.
    Window { n: usize, k: usize },
    /// No answer stream may contain any of the patterns.
    ForbiddenPatterns { patterns: Vec<Vec<Outcome>> },
    /// A window game where the guesser may also stop after any truthful answer.
    WindowWithStop { n: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSpec {
    pub kind: OracleKind,
    /// Label given to the start node of the compiled graph.
    pub start_label: String,
}

impl OracleSpec {
    pub fn new(kind: OracleKind) -> Self {
        let start_label = match kind {
            OracleKind::ForbiddenPatterns { .. } => "ε".to_owned(),
            _ => "1".to_owned(),
        };
        Self { kind, start_label }
    }

    /// `window:N,K` or `window-stop:N[,K]`. Pattern games are built from
    /// parsed patterns with [`OracleKind::ForbiddenPatterns`].
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unrecognised oracle specification {text:?}"));
        let (kind, args) = text.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> = args
            .split(',')
            .map(|a| a.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let kind = match (kind.trim(), nums.as_slice()) {
            ("window", &[n, k]) => OracleKind::Window { n, k },
            ("window-stop", &[n]) => OracleKind::WindowWithStop { n, k: 1 },
            ("window-stop", &[n, k]) => OracleKind::WindowWithStop { n, k },
            _ => return Err(bad()),
        };
        Ok(Self::new(kind))
    }

    pub fn build(&self) -> Result<GameGraph> {
        let graph = match &self.kind {
            OracleKind::Window { n, k } => build_window_game(*n, *k)?,
            OracleKind::ForbiddenPatterns { patterns } => build_forbidden_pattern_game(patterns)?,
            OracleKind::WindowWithStop { n, k: 1 } => build_stopping_variant(*n)?,
            OracleKind::WindowWithStop { n, k } => build_window_stop_game(*n, *k)?,
        };
        let default = graph.label(0).to_owned();
        if self.start_label == default {
            return Ok(graph);
        }
        rename_node(&graph, &default, &self.start_label)
    }
}

fn rename_node(graph: &GameGraph, from: &str, to: &str) -> Result<GameGraph> {
    if graph.index_of(to).is_some() {
        return Err(Error::InvalidArgument(format!(
            "start label {to:?} collides with an existing node"
        )));
    }
    let name = |i: usize| {
        let l = graph.label(i);
        if l == from {
            to.to_owned()
        } else {
            l.to_owned()
        }
    };
    let mut b = GameGraph::builder().nodes((0..graph.node_count()).map(name));
    for (u, v) in graph.edges() {
        b = match graph.edge_label(u, v) {
            Some(l) => b.labeled_edge(name(u), name(v), l),
            None => b.edge(name(u), name(v)),
        };
    }
    for t in graph.terminals() {
        b = b.value(name(t), graph.terminal_value(t).expect("terminal").clone());
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Move {
    Truth,
    Lie,
    Stop,
}

impl Move {
    fn label(self) -> &'static str {
        match self {
            Move::Truth => "truth",
            Move::Lie => "lie",
            Move::Stop => "stop",
        }
    }
}

/// Current class, terminal flag and successor classes of a state.
type Signature = (Option<usize>, bool, Vec<(Move, Option<usize>)>);

/// Deterministic automaton over truth/lie/stop moves.
#[derive(Debug, Clone)]
struct Automaton {
    start: usize,
    /// Transitions sorted by move.
    delta: Vec<Vec<(Move, usize)>>,
    terminal: Vec<bool>,
    names: Vec<String>,
}

impl Automaton {
    /// Moore partition refinement restricted to the part reachable from the
    /// start. Each class keeps the name of its first reachable member.
    fn minimise(&self) -> Automaton {
        let order = self.bfs_order();
        let mut class: HashMap<usize, usize> = HashMap::new();
        let mut count = 0;
        loop {
            let mut ids: BTreeMap<Signature, usize> = BTreeMap::new();
            let mut next = HashMap::new();
            for &s in &order {
                let sig = (
                    class.get(&s).copied(),
                    self.terminal[s],
                    self.delta[s]
                        .iter()
                        .map(|&(m, t)| (m, class.get(&t).copied()))
                        .collect(),
                );
                let fresh = ids.len();
                next.insert(s, *ids.entry(sig).or_insert(fresh));
            }
            let stable = ids.len() == count;
            count = ids.len();
            class = next;
            if stable {
                break;
            }
        }
        // renumber classes by first appearance in BFS order
        let mut rep: Vec<usize> = Vec::new();
        let mut id_of: HashMap<usize, usize> = HashMap::new();
        for &s in &order {
            id_of.entry(class[&s]).or_insert_with(|| {
                rep.push(s);
                rep.len() - 1
            });
        }
        let delta = rep
            .iter()
            .map(|&s| self.delta[s].iter().map(|&(m, t)| (m, id_of[&class[&t]])).collect())
            .collect();
        Automaton {
            start: id_of[&class[&self.start]],
            delta,
            terminal: rep.iter().map(|&s| self.terminal[s]).collect(),
            names: rep.iter().map(|&s| self.names[s].clone()).collect(),
        }
    }

    fn bfs_order(&self) -> Vec<usize> {
        let mut seen = vec![false; self.delta.len()];
        let mut order = Vec::new();
        let mut queue = VecDeque::from([self.start]);
        seen[self.start] = true;
        while let Some(s) = queue.pop_front() {
            order.push(s);
            for &(_, t) in &self.delta[s] {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        order
    }

    /// Game graph with nodes in BFS order (terminal nodes last). With
    /// `numbered`, non-terminal nodes are named `1..m` and terminals follow;
    /// otherwise the automaton's names are kept.
    fn to_graph(&self, numbered: bool) -> Result<GameGraph> {
        let order = self.bfs_order();
        let (mut live, dead): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&s| !self.terminal[s]);
        live.extend(dead);
        let names: HashMap<usize, String> = live
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                (
                    s,
                    if numbered {
                        (k + 1).to_string()
                    } else {
                        self.names[s].clone()
                    },
                )
            })
            .collect();
        let mut b = GameGraph::builder().nodes(live.iter().map(|s| names[s].clone()));
        for &s in &live {
            let mut targets: HashMap<usize, Move> = HashMap::new();
            for &(m, t) in &self.delta[s] {
                if let Some(prev) = targets.insert(t, m) {
                    return Err(Error::Oracle(format!(
                        "{} and {} lead to equivalent states from {:?}; the guesser could not tell them apart",
                        prev.label(),
                        m.label(),
                        names[&s]
                    )));
                }
                b = b.labeled_edge(names[&s].clone(), names[&t].clone(), m.label());
            }
            if self.terminal[s] {
                b = b.value(names[&s].clone(), Rational::from_integer(1.into()));
            }
        }
        b.build()
    }
}

fn check_window(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("window length must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "a window of {n} answers needs fewer than {n} allowed lies, got {k}"
        )));
    }
    Ok(())
}

/// Histories of the last `n - 1` answers (bit set = lie) reachable from the
/// all-truth history. With `stop`, every history whose latest answer was
/// truthful also gets a move into a single terminal state.
fn window_automaton(n: usize, k: usize, stop: bool) -> Automaton {
    let bits = n - 1;
    let mask: u64 = if bits == 0 { 0 } else { (1u64 << bits) - 1 };
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut histories = vec![0u64];
    index.insert(0, 0);
    let mut delta: Vec<Vec<(Move, usize)>> = Vec::new();
    let mut queue = VecDeque::from([0u64]);
    let mut intern = |h: u64, histories: &mut Vec<u64>, queue: &mut VecDeque<u64>| {
        *index.entry(h).or_insert_with(|| {
            histories.push(h);
            queue.push_back(h);
            histories.len() - 1
        })
    };
    let mut edges: Vec<(usize, Move, usize)> = Vec::new();
    let mut stops: Vec<usize> = Vec::new();
    while let Some(h) = queue.pop_front() {
        let s = intern(h, &mut histories, &mut queue);
        let truth = intern((h << 1) & mask, &mut histories, &mut queue);
        edges.push((s, Move::Truth, truth));
        if (h.count_ones() as usize) < k {
            let lie = intern(((h << 1) | 1) & mask, &mut histories, &mut queue);
            edges.push((s, Move::Lie, lie));
        }
        if stop && h & 1 == 0 {
            stops.push(s);
        }
    }
    let states = histories.len();
    delta.resize(states + usize::from(stop), Vec::new());
    for (s, m, t) in edges {
        delta[s].push((m, t));
    }
    for s in stops {
        delta[s].push((Move::Stop, states));
    }
    for d in &mut delta {
        d.sort();
    }
    let mut names: Vec<String> = histories
        .iter()
        .map(|h| {
            if bits == 0 {
                "-".to_owned()
            } else {
                format!("{h:0width$b}", width = bits)
            }
        })
        .collect();
    let mut terminal = vec![false; states];
    if stop {
        names.push("stop".to_owned());
        terminal.push(true);
    }
    Automaton {
        start: 0,
        delta,
        terminal,
        names,
    }
}

/// At most `k` lies in any `n` consecutive answers. Equivalent histories are
/// merged, so `k = 1` yields the `n`-node cycle with a loop at the start.
pub fn build_window_game(n: usize, k: usize) -> Result<GameGraph> {
    check_window(n, k)?;
    window_automaton(n, k, false).minimise().to_graph(true)
}

fn build_window_stop_game(n: usize, k: usize) -> Result<GameGraph> {
    check_window(n, k)?;
    if n < 2 {
        return Err(Error::InvalidArgument("the stopping variant needs n >= 2".into()));
    }
    window_automaton(n, k, true).minimise().to_graph(true)
}

/// `P(stop | node i)` under optimal play in the stopping variant with one lie
/// per window of `n`, for nodes numbered as in [`build_window_game`].
pub fn stop_probability_closed_form(n: usize, i: usize) -> f64 {
    let p2 = |e: i32| 2f64.powi(e);
    let n = n as i32;
    match i {
        1 => (p2(n) - 1.0) / (3.0 * (p2(n - 1) + p2(n - 2) - 1.0)),
        2 => 0.0,
        _ => (p2(n) - 1.0) / (p2(n + 1) - p2(i as i32 - 2) - 2.0),
    }
}

/// Tolerance for accepting the stopping-variant reconstruction.
pub const STOPPING_CHECK_TOL: f64 = 1e-10;

/// The one-lie window game in which the guesser may also end the game, with
/// value 1, at the start or right after a truthful answer. The graph is solved and
/// rejected unless its stop probabilities match the closed form.
pub fn build_stopping_variant(n: usize) -> Result<GameGraph> {
    let graph = build_window_stop_game(n, 1)?;
    if graph.classify() != GraphClass::Terminating {
        return Err(Error::Oracle(format!(
            "stopping variant classified as {}",
            graph.classify()
        )));
    }
    let solution = solve::<f64>(&graph)?;
    let profile = build_profile(&solution, &graph, 1.0)?;
    let stop = graph.node_count() - 1;
    for i in 0..n {
        let label = (i + 1).to_string();
        let node = graph
            .index_of(&label)
            .ok_or_else(|| Error::Oracle(format!("stopping variant lacks node {label}")))?;
        let strategy = profile.node(node).expect("non-terminal");
        let got = graph
            .successors(node)
            .iter()
            .position(|&j| j == stop)
            .map_or(0.0, |k| strategy.chooser[k]);
        let want = stop_probability_closed_form(n, i + 1);
        if (got - want).abs() > STOPPING_CHECK_TOL {
            return Err(Error::Oracle(format!(
                "stop probability at node {label} is {got}, closed form gives {want}"
            )));
        }
    }
    Ok(graph)
}

fn check_patterns(patterns: &[Vec<Outcome>]) -> Result<()> {
    if patterns.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one forbidden pattern is required".into(),
        ));
    }
    for (a, p) in patterns.iter().enumerate() {
        if p.is_empty() {
            return Err(Error::InvalidArgument("forbidden patterns must be non-empty".into()));
        }
        for (b, q) in patterns.iter().enumerate() {
            if a != b && q.len() <= p.len() && p.windows(q.len()).any(|w| w == q.as_slice()) {
                let what = if p == q {
                    "is repeated"
                } else {
                    "contains another pattern"
                };
                return Err(Error::InvalidArgument(format!(
                    "pattern set is not reduced: {} {what} ({})",
                    pattern_string(p),
                    pattern_string(q)
                )));
            }
        }
    }
    Ok(())
}

/// Answer streams avoiding every pattern, recognised by the pattern-matching
/// automaton with failure links. States that can only lead into a forbidden
/// pattern are removed; the remaining graph must be strongly connected and
/// aperiodic. Node names are the shortest matched prefix (`ε` for none).
pub fn build_forbidden_pattern_game(patterns: &[Vec<Outcome>]) -> Result<GameGraph> {
    check_patterns(patterns)?;
    let alphabet = [Outcome::Truth, Outcome::Lie];
    let letter = |o: Outcome| usize::from(o == Outcome::Lie);

    // trie
    let mut goto: Vec<[Option<usize>; 2]> = vec![[None, None]];
    let mut prefix: Vec<Vec<Outcome>> = vec![Vec::new()];
    let mut accepting = vec![false];
    for p in patterns {
        let mut s = 0;
        for &o in p {
            s = match goto[s][letter(o)] {
                Some(t) => t,
                None => {
                    goto.push([None, None]);
                    let mut pre = prefix[s].clone();
                    pre.push(o);
                    prefix.push(pre);
                    accepting.push(false);
                    let t = goto.len() - 1;
                    goto[s][letter(o)] = Some(t);
                    t
                }
            };
        }
        accepting[s] = true;
    }

    // failure links and the completed transition function, in BFS order
    let states = goto.len();
    let mut fail = vec![0usize; states];
    let mut delta = vec![[0usize; 2]; states];
    let mut dead = accepting.clone();
    let mut queue = VecDeque::new();
    for &o in &alphabet {
        match goto[0][letter(o)] {
            Some(t) => {
                delta[0][letter(o)] = t;
                queue.push_back(t);
            }
            None => delta[0][letter(o)] = 0,
        }
    }
    while let Some(s) = queue.pop_front() {
        dead[s] = dead[s] || dead[fail[s]];
        for &o in &alphabet {
            match goto[s][letter(o)] {
                Some(t) => {
                    fail[t] = delta[fail[s]][letter(o)];
                    delta[s][letter(o)] = t;
                    queue.push_back(t);
                }
                None => delta[s][letter(o)] = delta[fail[s]][letter(o)],
            }
        }
    }

    // repeatedly drop states with no admissible continuation
    let mut alive: Vec<bool> = dead.iter().map(|d| !d).collect();
    loop {
        let mut changed = false;
        for s in 0..states {
            if alive[s] && !alphabet.iter().any(|&o| alive[delta[s][letter(o)]]) {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !alive[0] {
        return Err(Error::Oracle("the patterns forbid every infinite answer stream".into()));
    }

    let automaton = Automaton {
        start: 0,
        delta: (0..states)
            .map(|s| {
                alphabet
                    .iter()
                    .filter(|&&o| alive[s] && alive[delta[s][letter(o)]])
                    .map(|&o| {
                        let m = if o == Outcome::Lie { Move::Lie } else { Move::Truth };
                        (m, delta[s][letter(o)])
                    })
                    .collect()
            })
            .collect(),
        terminal: vec![false; states],
        names: prefix
            .iter()
            .map(|p| {
                if p.is_empty() {
                    "ε".to_owned()
                } else {
                    pattern_string(p)
                }
            })
            .collect(),
    };
    let graph = automaton.minimise().to_graph(false)?;
    match graph.classify() {
        GraphClass::StronglyConnectedAperiodic => Ok(graph),
        other => Err(Error::Unsupported(format!(
            "the pattern game is not a strongly connected aperiodic graph: {other}"
        ))),
    }
}

/// Closed-form spectral data of the one-lie window game on `n` nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gn1Reference {
    pub n: usize,
    /// Largest root of `λ^n - λ^(n-1) - 1`.
    pub lambda: f64,
    pub r: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub oracle_truth_prob: f64,
    pub oracle_lie_prob: f64,
    pub bettor_wager: f64,
    pub mu: Vec<f64>,
}

/// Root of `λ^n - λ^(n-1) - 1` on `[1, 2]` by bisection.
pub fn gn1_lambda(n: usize) -> f64 {
    let f = |l: f64| l.powi(n as i32) - l.powi(n as i32 - 1) - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn gn1_reference(n: usize) -> Result<Gn1Reference> {
    if n < 2 {
        return Err(Error::InvalidArgument("the reference family starts at n = 2".into()));
    }
    let lambda = gn1_lambda(n);
    let pow = |e: usize| lambda.powi(e as i32);
    let mut x = vec![pow(n - 1), 1.0];
    x.extend((1..n - 1).map(pow));
    let y: Vec<f64> = (0..n).map(|i| pow(n - 1 - i)).collect();
    let denom = pow(n) + n as f64 - 1.0;
    let mut mu = vec![1.0 / denom; n];
    mu[0] = pow(n) / denom;
    Ok(Gn1Reference {
        n,
        lambda,
        r: lambda / 2.0,
        x,
        y,
        oracle_truth_prob: 1.0 / lambda,
        oracle_lie_prob: 1.0 / pow(n),
        bettor_wager: 1.0 / lambda - 1.0 / pow(n),
        mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_set(g: &GameGraph) -> Vec<(String, String, String)> {
        g.edges()
            .map(|(u, v)| {
                (
                    g.label(u).to_owned(),
                    g.label(v).to_owned(),
                    g.edge_label(u, v).unwrap_or("").to_owned(),
                )
            })
            .collect()
    }

    fn e(u: &str, v: &str, l: &str) -> (String, String, String) {
        (u.into(), v.into(), l.into())
    }

    #[test]
    fn two_window_matches_figure() {
        let g = build_window_game(2, 1).unwrap();
        assert_eq!(g.labels(), &["1", "2"]);
        assert_eq!(
            edge_set(&g),
            vec![e("1", "1", "truth"), e("1", "2", "lie"), e("2", "1", "truth")]
        );
    }

    #[test]
    fn one_lie_windows_are_cycles_with_a_loop() {
        for n in 2..=8 {
            let g = build_window_game(n, 1).unwrap();
            assert_eq!(g.node_count(), n);
            let mut want = vec![e("1", "1", "truth"), e("1", "2", "lie")];
            for i in 2..=n {
                want.push(e(&i.to_string(), &(i % n + 1).to_string(), "truth"));
            }
            let mut got = edge_set(&g);
            got.sort();
            want.sort();
            assert_eq!(got, want, "n = {n}");
        }
    }

    #[test]
    fn honest_oracle() {
        let g = build_window_game(4, 0).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(edge_set(&g), vec![e("1", "1", "truth")]);
        assert!(build_window_game(3, 3).is_err());
        assert!(build_window_game(0, 0).is_err());
    }

    #[test]
    fn two_lies_in_three_merges_states() {
        let g = build_window_game(3, 2).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.classify(), GraphClass::StronglyConnectedAperiodic);
    }

    #[test]
    fn stopping_variant_shape() {
        let g = build_stopping_variant(3).unwrap();
        assert_eq!(g.labels(), &["1", "2", "3", "4"]);
        let stops: Vec<&str> = g.edges().filter(|&(_, v)| v == 3).map(|(u, _)| g.label(u)).collect();
        assert_eq!(stops, vec!["1", "3"]);
        assert!((stop_probability_closed_form(3, 1) - 7.0 / 15.0).abs() < 1e-15);
        assert!((stop_probability_closed_form(3, 3) - 7.0 / 12.0).abs() < 1e-15);
        assert!((stop_probability_closed_form(2, 1) - 0.5).abs() < 1e-15);
        assert!(build_stopping_variant(1).is_err());
    }

    #[test]
    fn pattern_parsing() {
        use Outcome::*;
        assert_eq!(parse_pattern("LTL").unwrap(), vec![Lie, Truth, Lie]);
        assert_eq!(parse_pattern("lie truth lie").unwrap(), vec![Lie, Truth, Lie]);
        assert_eq!(parse_pattern("L, T").unwrap(), vec![Lie, Truth]);
        assert!(parse_pattern("LXT").is_err());
        let file = parse_pattern_file("# header\nLL\n\nL T L  # second\n").unwrap();
        assert_eq!(file.len(), 2);
    }

    #[test]
    fn pattern_automata() {
        use Outcome::*;
        let g = build_forbidden_pattern_game(&[vec![Lie, Lie], vec![Lie, Truth, Lie]]).unwrap();
        assert_eq!(g.labels(), &["ε", "L", "LT"]);
        assert_eq!(
            edge_set(&g),
            vec![
                e("ε", "ε", "truth"),
                e("ε", "L", "lie"),
                e("L", "LT", "truth"),
                e("LT", "ε", "truth")
            ]
        );

        let g = build_forbidden_pattern_game(&[vec![Lie]]).unwrap();
        assert_eq!(edge_set(&g), vec![e("ε", "ε", "truth")]);
    }

    #[test]
    fn pattern_errors() {
        use Outcome::*;
        assert!(build_forbidden_pattern_game(&[]).is_err());
        assert!(build_forbidden_pattern_game(&[vec![]]).is_err());
        assert!(build_forbidden_pattern_game(&[vec![Lie], vec![Lie, Lie]]).is_err());
        assert!(matches!(
            build_forbidden_pattern_game(&[vec![Lie], vec![Truth]]),
            Err(Error::Oracle(_))
        ));
        // only alternation survives, and the start is left behind
        assert!(matches!(
            build_forbidden_pattern_game(&[vec![Lie, Lie], vec![Truth, Truth]]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn spec_strings() {
        assert_eq!(
            OracleSpec::parse("window:3,1").unwrap().kind,
            OracleKind::Window { n: 3, k: 1 }
        );
        assert_eq!(
            OracleSpec::parse("window-stop:4").unwrap().kind,
            OracleKind::WindowWithStop { n: 4, k: 1 }
        );
        assert!(OracleSpec::parse("window:3").is_err());
        assert!(OracleSpec::parse("nonsense").is_err());
        let mut spec = OracleSpec::parse("window:2,1").unwrap();
        spec.start_label = "start".into();
        assert_eq!(spec.build().unwrap().labels(), &["start", "2"]);
    }

    #[test]
    fn golden_reference() {
        let r = gn1_reference(2).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((r.lambda - phi).abs() < 1e-13);
        assert!((r.oracle_truth_prob + r.oracle_lie_prob - 1.0).abs() < 1e-12);
        assert!((r.mu[0] - 0.7236).abs() < 1e-4);
        assert!((r.mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(gn1_reference(1).is_err());
    }
}
