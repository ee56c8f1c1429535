#![allow(dead_code)]

use pathwager::oracle::{build_forbidden_pattern_game, build_stopping_variant, build_window_game, parse_pattern};
use pathwager::{GameGraph, GraphClass};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub name: String,
    pub graph: GameGraph,
}

impl Case {
    fn new(name: impl Into<String>, graph: GameGraph) -> Self {
        Self {
            name: name.into(),
            graph,
        }
    }

    pub fn class(&self) -> GraphClass {
        self.graph.classify()
    }

    pub fn is_terminating(&self) -> bool {
        self.class().is_terminating()
    }

    pub fn is_fan(&self) -> bool {
        let g = &self.graph;
        g.non_terminals().len() == 1 && g.successors(g.non_terminals()[0]).iter().all(|&j| g.is_terminal(j))
    }
}

pub fn fan(values: &[f64]) -> GameGraph {
    let mut b = GameGraph::builder().node("root");
    for (k, v) in values.iter().enumerate() {
        let leaf = format!("leaf{}", k + 1);
        b = b.node(leaf.clone()).edge("root", leaf.clone()).value_f64(leaf, *v);
    }
    b.build().unwrap()
}

pub fn fans() -> Vec<Case> {
    let sets: &[&[f64]] = &[
        &[2.0, 4.0],
        &[1.0, 1.0],
        &[1.0, 2.0, 3.0],
        &[2.0, 4.0, 4.0, 8.0],
        &[0.5, 3.0],
        &[3.0, 5.0, 7.0, 11.0, 13.0],
        &[1.25, 1.5],
        &[5.0],
    ];
    sets.iter().map(|v| Case::new(format!("fan {v:?}"), fan(v))).collect()
}

pub fn trees() -> Vec<Case> {
    let deep = GameGraph::builder()
        .nodes(["r", "a", "b", "c", "d", "e", "f", "g"])
        .edge("r", "a")
        .edge("r", "b")
        .edge("a", "c")
        .edge("a", "d")
        .edge("a", "e")
        .edge("b", "f")
        .edge("f", "g")
        .value_f64("c", 1.0)
        .value_f64("d", 2.0)
        .value_f64("e", 4.0)
        .value_f64("g", 3.0)
        .build()
        .unwrap();
    let chain = GameGraph::builder()
        .nodes(["a", "b", "t"])
        .edge("a", "b")
        .edge("a", "t")
        .edge("b", "t")
        .value_f64("t", 1.0)
        .build()
        .unwrap();
    vec![
        Case::new("tree with a forced move", deep),
        Case::new("shared terminal chain", chain),
    ]
}

pub fn loop_graph() -> GameGraph {
    GameGraph::builder()
        .nodes(["1", "t"])
        .edge("1", "1")
        .edge("1", "t")
        .value_f64("t", 1.0)
        .build()
        .unwrap()
}

pub fn complete_k3() -> GameGraph {
    let mut b = GameGraph::builder().nodes(["1", "2", "3"]);
    for a in ["1", "2", "3"] {
        for c in ["1", "2", "3"] {
            if a != c {
                b = b.edge(a, c);
            }
        }
    }
    b.build().unwrap()
}

/// A random graph where every non-terminal node has a move to a later node,
/// so the terminals at the end are always reachable.
pub fn random_terminating(rng: &mut ChaCha8Rng, max_nodes: usize) -> GameGraph {
    let n = rng.random_range(3..=max_nodes);
    let terminals = rng.random_range(1..=3.min(n - 1));
    let fair = rng.random_bool(0.3);
    let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut b = GameGraph::builder().nodes(labels.clone());
    let inner = n - terminals;
    for i in 0..inner {
        let forward = rng.random_range(i + 1..n);
        let mut targets = vec![forward];
        let degree = if fair {
            rng.random_range(2..=3)
        } else {
            rng.random_range(1..=3)
        };
        while targets.len() < degree {
            let t = rng.random_range(0..n);
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            b = b.edge(labels[i].clone(), labels[t].clone());
        }
    }
    let choices = [0.5, 1.0, 1.5, 2.0, 3.0, 1.25];
    for label in &labels[inner..] {
        let v = if fair { 1.0 } else { *choices.choose(rng).unwrap() };
        b = b.value_f64(label.clone(), v);
    }
    b.build().unwrap()
}

/// A random strongly connected aperiodic graph: a Hamiltonian cycle plus chords.
pub fn random_strongly_connected(rng: &mut ChaCha8Rng, max_nodes: usize) -> GameGraph {
    loop {
        let g = random_cycle_with_chords(rng, max_nodes);
        if g.classify() == GraphClass::StronglyConnectedAperiodic {
            return g;
        }
    }
}

/// A Hamiltonian cycle plus random chords; may be periodic.
pub fn random_cycle_with_chords(rng: &mut ChaCha8Rng, max_nodes: usize) -> GameGraph {
    let n = rng.random_range(2..=max_nodes);
    let fair = rng.random_bool(0.3);
    let labels: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut b = GameGraph::builder().nodes(labels.clone());
    for i in 0..n {
        let mut targets = vec![(i + 1) % n];
        let degree = if fair {
            rng.random_range(2..=3.min(n.max(2)))
        } else {
            rng.random_range(1..=3)
        };
        let mut attempts = 0;
        while targets.len() < degree && attempts < 20 {
            let t = rng.random_range(0..n);
            if !targets.contains(&t) {
                targets.push(t);
            }
            attempts += 1;
        }
        for t in targets {
            b = b.edge(labels[i].clone(), labels[t].clone());
        }
    }
    b.build().unwrap()
}

pub fn pattern_games() -> Vec<Case> {
    let sets: &[&[&str]] = &[
        &["lie lie"],
        &["lie truth lie"],
        &["lie lie", "lie truth lie"],
        &["lie lie lie"],
    ];
    sets.iter()
        .map(|s| {
            let patterns = s.iter().map(|p| parse_pattern(p).unwrap()).collect::<Vec<_>>();
            Case::new(
                format!("forbidden {s:?}"),
                build_forbidden_pattern_game(&patterns).unwrap(),
            )
        })
        .collect()
}

pub const CORPUS_SEED: u64 = 0x5EED_0001;

pub fn random_cases(count: usize, max_nodes: usize, seed: u64) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            if k.is_multiple_of(2) {
                Case::new(
                    format!("random terminating #{k}"),
                    random_terminating(&mut rng, max_nodes),
                )
            } else {
                Case::new(
                    format!("random strongly connected #{k}"),
                    random_strongly_connected(&mut rng, max_nodes),
                )
            }
        })
        .collect()
}

/// The same graph with nodes inserted in the order `perm` and renamed.
pub fn relabel(graph: &GameGraph, perm: &[usize]) -> GameGraph {
    let name = |i: usize| format!("v{}_{}", perm.iter().position(|&p| p == i).unwrap(), graph.label(i));
    let mut b = GameGraph::builder().nodes(perm.iter().map(|&i| name(i)));
    for (u, v) in graph.edges() {
        b = match graph.edge_label(u, v) {
            Some(l) => b.labeled_edge(name(u), name(v), l),
            None => b.edge(name(u), name(v)),
        };
    }
    for t in graph.terminals() {
        b = b.value(name(t), graph.terminal_value(t).unwrap().clone());
    }
    b.build().unwrap()
}

/// Every hand-built case plus `random` random graphs of at most `max_nodes` nodes.
pub fn corpus(random: usize, max_nodes: usize) -> Vec<Case> {
    let mut cases = fans();
    cases.extend(trees());
    cases.push(Case::new("loop", loop_graph()));
    cases.push(Case::new("complete digraph on 3 nodes", complete_k3()));
    for n in 2..=5 {
        cases.push(Case::new(
            format!("stopping variant n={n}"),
            build_stopping_variant(n).unwrap(),
        ));
    }
    for n in 2..=6 {
        cases.push(Case::new(format!("window {n},1"), build_window_game(n, 1).unwrap()));
    }
    cases.push(Case::new("window 4,2", build_window_game(4, 2).unwrap()));
    cases.extend(pattern_games());
    cases.extend(random_cases(random, max_nodes, CORPUS_SEED));
    cases
}

/// Reciprocal values by plain fixed-point iteration of the backward rule,
/// written without the library's matrices or solvers.
pub fn iterate_reciprocals(graph: &GameGraph, sweeps: usize) -> Vec<f64> {
    let n = graph.node_count();
    let mut u: Vec<f64> = (0..n)
        .map(|i| graph.terminal_value_as::<f64>(i).map_or(1.0, |v| 1.0 / v))
        .collect();
    for _ in 0..sweeps {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let s = graph.successors(i);
                match s.len() {
                    0 => u[i],
                    1 => u[s[0]] / 2.0,
                    k => s.iter().map(|&j| u[j]).sum::<f64>() / k as f64,
                }
            })
            .collect();
        u = next;
    }
    u
}

/// Perron root and eigenvector of the backward rule by normalised iteration.
pub fn iterate_perron(graph: &GameGraph, sweeps: usize) -> (f64, Vec<f64>) {
    let n = graph.node_count();
    let mut u = vec![1.0; n];
    let mut r = 1.0;
    for _ in 0..sweeps {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let s = graph.successors(i);
                if s.len() == 1 {
                    u[s[0]] / 2.0
                } else {
                    s.iter().map(|&j| u[j]).sum::<f64>() / s.len() as f64
                }
            })
            .collect();
        let norm: f64 = next.iter().sum();
        r = norm / u.iter().sum::<f64>();
        u = next.iter().map(|x| x / norm * n as f64).collect();
    }
    (r, u)
}

/// Root of `l^n - l^(n-1) - 1` in `[1, 2]` by bisection.
pub fn lambda_by_bisection(n: usize) -> f64 {
    let f = |l: f64| l.powi(n as i32) - l.powi(n as i32 - 1) - 1.0;
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Edge-label strings of exactly `len` moves realisable from `start`.
pub fn realisable_strings(graph: &GameGraph, start: usize, len: usize) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    let mut stack = vec![(start, String::new(), 0usize)];
    while let Some((node, word, depth)) = stack.pop() {
        if depth == len {
            out.insert(word);
            continue;
        }
        for &j in graph.successors(node) {
            let letter = match graph.edge_label(node, j) {
                Some("truth") => 'T',
                Some("lie") => 'L',
                other => panic!("unexpected edge label {other:?}"),
            };
            let mut w = word.clone();
            w.push(letter);
            stack.push((j, w, depth + 1));
        }
    }
    out
}

/// Every `T`/`L` string of length `len` with at most `k` lies in each window of `n`.
pub fn legal_window_strings(n: usize, k: usize, len: usize) -> std::collections::BTreeSet<String> {
    (0..1u32 << len)
        .filter(|bits| {
            (0..len).all(|start| {
                let end = (start + n).min(len);
                (start..end).filter(|b| bits >> b & 1 == 1).count() <= k
            })
        })
        .map(|bits| (0..len).map(|b| if bits >> b & 1 == 1 { 'L' } else { 'T' }).collect())
        .collect()
}
