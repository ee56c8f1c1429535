//! Game graphs: representation, JSON and DOT I/O, validation and structural
//! classification.
//!
//! Nodes carry string labels in files and dense indices internally; the
//! mapping follows insertion order. A node is terminal exactly when it has no
//! outgoing edges, and every terminal node carries a strictly positive value.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use indexmap::IndexMap;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, format_significant, parse_decimal, parse_rational, Rational, Scalar};
use crate::strategy::StrategyProfile;

/// Structural class of a game graph, most specific first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GraphClass {
    /// Rooted tree of height one.
    Fan,
    Tree,
    /// Every node has a path to a terminal node; cycles are allowed.
    Terminating,
    StronglyConnectedAperiodic,
    Unsupported(String),
}

impl GraphClass {
    pub fn name(&self) -> &'static str {
        match self {
            GraphClass::Fan => "fan",
            GraphClass::Tree => "tree",
            GraphClass::Terminating => "terminating",
            GraphClass::StronglyConnectedAperiodic => "strongly-connected-aperiodic",
            GraphClass::Unsupported(_) => "unsupported",
        }
    }

    /// Fans, trees and general terminating graphs.
    pub fn is_terminating(&self) -> bool {
        matches!(self, GraphClass::Fan | GraphClass::Tree | GraphClass::Terminating)
    }

    pub fn is_tree(&self) -> bool {
        matches!(self, GraphClass::Fan | GraphClass::Tree)
    }

    pub fn is_supported(&self) -> bool {
        !matches!(self, GraphClass::Unsupported(_))
    }
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphClass::Unsupported(reason) => write!(f, "unsupported ({reason})"),
            other => f.write_str(other.name()),
        }
    }
}

impl Serialize for GraphClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameGraph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    successors: Vec<Vec<usize>>,
    edge_labels: BTreeMap<(usize, usize), String>,
    values: Vec<Option<Rational>>,
}

impl GameGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    /// Successors of `node`, sorted by index.
    pub fn successors(&self, node: usize) -> &[usize] {
        &self.successors[node]
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.successors[node].len()
    }

    pub fn is_terminal(&self, node: usize) -> bool {
        self.successors[node].is_empty()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].binary_search(&to).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.iter().map(move |&j| (i, j)))
    }

    pub fn edge_label(&self, from: usize, to: usize) -> Option<&str> {
        self.edge_labels.get(&(from, to)).map(String::as_str)
    }

    pub fn terminal_value(&self, node: usize) -> Option<&Rational> {
        self.values[node].as_ref()
    }

    pub fn terminal_value_as<S: Scalar>(&self, node: usize) -> Option<S> {
        self.values[node].as_ref().map(S::from_rational)
    }

    pub fn terminals(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| self.is_terminal(i)).collect()
    }

    pub fn non_terminals(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&i| !self.is_terminal(i)).collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for (_, j) in self.edges() {
            deg[j] += 1;
        }
        deg
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.node_count()];
        for (i, j) in self.edges() {
            pred[j].push(i);
        }
        pred
    }

    /// Where play starts by default: the first non-terminal node without
    /// incoming edges, else the first non-terminal node.
    pub fn default_start(&self) -> Option<usize> {
        let indeg = self.in_degrees();
        (0..self.node_count())
            .find(|&i| !self.is_terminal(i) && indeg[i] == 0)
            .or_else(|| (0..self.node_count()).find(|&i| !self.is_terminal(i)))
    }

    /// Same graph with every terminal value multiplied by `factor`.
    pub fn scale_values(&self, factor: &Rational) -> Result<GameGraph> {
        if !factor.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let mut out = self.clone();
        for v in out.values.iter_mut().flatten() {
            *v = v.clone() * factor.clone();
        }
        Ok(out)
    }

    /// Index mapping emitted alongside reports.
    pub fn node_index(&self) -> IndexMap<String, usize> {
        self.labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect()
    }

    pub fn classify(&self) -> GraphClass {
        classify(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("graph documents always serialize")
    }

    fn to_document(&self) -> GraphDocument {
        let edges = self
            .edges()
            .map(|(i, j)| {
                let (from, to) = (self.labels[i].clone(), self.labels[j].clone());
                match self.edge_label(i, j) {
                    Some(l) => EdgeEntry::Labeled(from, to, l.to_string()),
                    None => EdgeEntry::Plain(from, to),
                }
            })
            .collect();
        let values = (0..self.node_count())
            .filter_map(|i| {
                self.values[i]
                    .as_ref()
                    .map(|v| (self.labels[i].clone(), value_to_json(v)))
            })
            .collect();
        GraphDocument {
            nodes: self.labels.clone(),
            edges,
            values,
        }
    }
}

/// Incremental constructor; all validation happens in [`GraphBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct GraphBuilder {
    labels: Vec<String>,
    edges: Vec<(String, String, Option<String>)>,
    values: Vec<(String, Rational)>,
}

impl GraphBuilder {
    pub fn node(mut self, label: impl Into<String>) -> Self {
        self.labels.push(label.into());
        self
    }

    pub fn nodes<I, L>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        self.labels.extend(labels.into_iter().map(Into::into));
        self
    }

    pub fn edge(mut self, from: impl Into<String>, to: impl Into<String>) -> Self {
        self.edges.push((from.into(), to.into(), None));
        self
    }

    pub fn labeled_edge(mut self, from: impl Into<String>, to: impl Into<String>, label: impl Into<String>) -> Self {
        self.edges.push((from.into(), to.into(), Some(label.into())));
        self
    }

    pub fn value(mut self, label: impl Into<String>, value: Rational) -> Self {
        self.values.push((label.into(), value));
        self
    }

    /// Terminal value given as a float; stored as the decimal it prints as.
    pub fn value_f64(self, label: impl Into<String>, value: f64) -> Self {
        let exact = parse_decimal(&format!("{value}")).unwrap_or_else(|| Rational::from_integer((-1).into()));
        self.value(label, exact)
    }

    pub fn build(self) -> Result<GameGraph> {
        if self.labels.is_empty() {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        let mut index = HashMap::with_capacity(self.labels.len());
        for (i, label) in self.labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate node label {label:?}")));
            }
        }
        let lookup = |label: &str, what: &str| {
            index
                .get(label)
                .copied()
                .ok_or_else(|| Error::InvalidGraph(format!("{what} refers to unknown node {label:?}")))
        };

        let n = self.labels.len();
        let mut successors = vec![Vec::new(); n];
        let mut edge_labels = BTreeMap::new();
        for (from, to, label) in &self.edges {
            let i = lookup(from, "edge")?;
            let j = lookup(to, "edge")?;
            if successors[i].contains(&j) {
                return Err(Error::InvalidGraph(format!("duplicate edge {from:?} -> {to:?}")));
            }
            successors[i].push(j);
            if let Some(l) = label {
                edge_labels.insert((i, j), l.clone());
            }
        }
        for succ in &mut successors {
            succ.sort_unstable();
        }

        let mut values: Vec<Option<Rational>> = vec![None; n];
        for (label, value) in &self.values {
            let i = lookup(label, "value entry")?;
            if values[i].is_some() {
                return Err(Error::InvalidGraph(format!("duplicate value for node {label:?}")));
            }
            if !value.is_positive() {
                return Err(Error::InvalidGraph(format!(
                    "terminal value for {label:?} must be positive, got {}",
                    format_rational(value)
                )));
            }
            if !successors[i].is_empty() {
                return Err(Error::InvalidGraph(format!(
                    "node {label:?} has outgoing edges and a terminal value; only terminal nodes carry values"
                )));
            }
            values[i] = Some(value.clone());
        }
        for i in 0..n {
            if successors[i].is_empty() && values[i].is_none() {
                return Err(Error::InvalidGraph(format!(
                    "terminal node {:?} lacks a value",
                    self.labels[i]
                )));
            }
        }

        Ok(GameGraph {
            labels: self.labels,
            index,
            successors,
            edge_labels,
            values,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    nodes: Vec<String>,
    #[serde(default)]
    edges: Vec<EdgeEntry>,
    #[serde(default)]
    values: IndexMap<String, ValueEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeEntry {
    Plain(String, String),
    Labeled(String, String, String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ValueEntry {
    Number(serde_json::Number),
    Text(String),
    Pair(serde_json::Value, serde_json::Value),
}

fn integer_text(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => Some(n.to_string()),
        serde_json::Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn value_from_json(label: &str, entry: &ValueEntry) -> Result<Rational> {
    let parsed = match entry {
        ValueEntry::Number(n) => parse_decimal(&n.to_string()),
        ValueEntry::Text(s) => parse_rational(s),
        ValueEntry::Pair(p, q) => match (integer_text(p), integer_text(q)) {
            (Some(p), Some(q)) => parse_rational(&format!("{p}/{q}")),
            _ => None,
        },
    };
    parsed.ok_or_else(|| Error::InvalidGraph(format!("unreadable value for node {label:?}")))
}

fn value_to_json(value: &Rational) -> ValueEntry {
    if value.denom().is_one() {
        if let Some(i) = value.numer().to_i64() {
            return ValueEntry::Number(i.into());
        }
    }
    if let Some(f) = ToPrimitive::to_f64(value) {
        if parse_decimal(&format!("{f}")).as_ref() == Some(value) {
            if let Some(n) = serde_json::Number::from_f64(f) {
                return ValueEntry::Number(n);
            }
        }
    }
    ValueEntry::Text(format_rational(value))
}

/// Parses a graph document:
/// `{"nodes":[..], "edges":[[from,to],..], "values":{label:number,..}}`.
///
/// Edges may carry a third element naming the move (`"truth"`, `"lie"`, ..).
/// Values may be JSON numbers, `"p/q"` strings, or `[p, q]` integer pairs.
pub fn parse_graph(text: &str) -> Result<GameGraph> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    let mut builder = GameGraph::builder().nodes(doc.nodes);
    for edge in doc.edges {
        builder = match edge {
            EdgeEntry::Plain(a, b) => builder.edge(a, b),
            EdgeEntry::Labeled(a, b, l) => builder.labeled_edge(a, b, l),
        };
    }
    for (label, entry) in &doc.values {
        let v = value_from_json(label, entry)?;
        builder = builder.value(label.clone(), v);
    }
    builder.build()
}

fn bfs(adj: &[Vec<usize>], sources: &[usize]) -> Vec<Option<usize>> {
    let mut level = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if level[s].is_none() {
            level[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let next = level[u].map(|l| l + 1);
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = next;
                queue.push_back(v);
            }
        }
    }
    level
}

fn is_strongly_connected(graph: &GameGraph) -> bool {
    let forward = bfs(&graph.successors, &[0]);
    let backward = bfs(&graph.predecessors(), &[0]);
    forward.iter().chain(&backward).all(Option::is_some)
}

fn tree_root(graph: &GameGraph) -> Option<usize> {
    let n = graph.node_count();
    if graph.edge_count() + 1 != n {
        return None;
    }
    let indeg = graph.in_degrees();
    let mut roots = (0..n).filter(|&i| indeg[i] == 0);
    let root = roots.next()?;
    if roots.next().is_some() || indeg.iter().any(|&d| d > 1) {
        return None;
    }
    bfs(&graph.successors, &[root])
        .iter()
        .all(Option::is_some)
        .then_some(root)
}

fn list_labels(graph: &GameGraph, nodes: impl Iterator<Item = usize>) -> String {
    let mut names: Vec<String> = nodes.map(|i| format!("{:?}", graph.label(i))).collect();
    if names.len() > 8 {
        let extra = names.len() - 8;
        names.truncate(8);
        names.push(format!("and {extra} more"));
    }
    names.join(", ")
}

/// Reports the most specific supported class, or `Unsupported` with a reason.
pub fn classify(graph: &GameGraph) -> GraphClass {
    let terminals = graph.terminals();
    if !terminals.is_empty() {
        let reach = bfs(&graph.predecessors(), &terminals);
        if reach.iter().any(Option::is_none) {
            let stuck = (0..graph.node_count()).filter(|&i| reach[i].is_none());
            return GraphClass::Unsupported(format!(
                "nodes {} have no path to a terminal node",
                list_labels(graph, stuck)
            ));
        }
        return match tree_root(graph) {
            Some(root) if graph.successors(root).iter().all(|&j| graph.is_terminal(j)) && graph.node_count() > 1 => {
                GraphClass::Fan
            }
            Some(_) => GraphClass::Tree,
            None => GraphClass::Terminating,
        };
    }
    if !is_strongly_connected(graph) {
        return GraphClass::Unsupported("graph has no terminal nodes and is not strongly connected".into());
    }
    match aperiodicity_gcd(graph) {
        Ok(1) => GraphClass::StronglyConnectedAperiodic,
        Ok(period) => GraphClass::Unsupported(format!("periodic: cycle lengths share the factor {period}")),
        Err(e) => GraphClass::Unsupported(e.to_string()),
    }
}

/// Greatest common divisor of all cycle lengths of a strongly connected graph.
///
/// Uses BFS levels from node 0: the period divides `level(u) + 1 - level(v)`
/// for every edge `u -> v`, and the gcd of those differences is the period.
pub fn aperiodicity_gcd(graph: &GameGraph) -> Result<usize> {
    if !graph.terminals().is_empty() || !is_strongly_connected(graph) {
        return Err(Error::InvalidArgument(
            "cycle-length gcd needs a strongly connected graph without terminal nodes".into(),
        ));
    }
    let level = bfs(&graph.successors, &[0]);
    let period = graph.edges().fold(0usize, |g, (u, v)| {
        let lu = level[u].expect("strongly connected") as i64;
        let lv = level[v].expect("strongly connected") as i64;
        g.gcd(&((lu + 1 - lv).unsigned_abs() as usize))
    });
    Ok(period)
}

fn dot_quote(text: &str) -> String {
    let escaped = text.replace('\\', "\\\\").replace('"', "\\\"");
    format!("\"{escaped}\"")
}

/// Graphviz rendering; with a profile, edges show chooser probabilities and
/// nodes show wagers.
pub fn to_dot<S: Scalar>(graph: &GameGraph, profile: Option<&StrategyProfile<S>>) -> Result<String> {
    if let Some(p) = profile {
        p.check_shape(graph)?;
    }
    let fmt = |x: &S| format_significant(x.to_f64(), 12);
    let mut out = String::from("digraph game {\n  rankdir=LR;\n  node [shape=circle];\n");
    for i in 0..graph.node_count() {
        let label = graph.label(i);
        let line = match (graph.terminal_value(i), profile.and_then(|p| p.node(i))) {
            (Some(v), _) => format!(
                "  {} [shape=doublecircle, style=filled, fillcolor=lightgrey, label={}];\n",
                dot_quote(label),
                dot_quote(&format!("{label}\nv={}", format_rational(v)))
            ),
            (None, Some(node)) => format!(
                "  {} [label={}];\n",
                dot_quote(label),
                dot_quote(&format!("{label}\nw={}", fmt(&node.wager)))
            ),
            (None, None) => format!("  {} [label={}];\n", dot_quote(label), dot_quote(label)),
        };
        out.push_str(&line);
    }
    for i in 0..graph.node_count() {
        for (k, &j) in graph.successors(i).iter().enumerate() {
            let mut parts = Vec::new();
            if let Some(l) = graph.edge_label(i, j) {
                parts.push(l.to_string());
            }
            let mut extra = String::new();
            if let Some(node) = profile.and_then(|p| p.node(i)) {
                parts.push(format!("p={}", fmt(&node.chooser[k])));
                extra = format!(", tooltip={}", dot_quote(&format!("g={}", fmt(&node.guesser[k]))));
            }
            let attrs = if parts.is_empty() {
                String::new()
            } else {
                format!(" [label={}{extra}]", dot_quote(&parts.join(" ")))
            };
            out.push_str(&format!(
                "  {} -> {}{attrs};\n",
                dot_quote(graph.label(i)),
                dot_quote(graph.label(j))
            ));
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FAN: &str = r#"{"nodes":["root","a","b"],"edges":[["root","a"],["root","b"]],"values":{"a":1,"b":1}}"#;

    fn cycle(n: usize, extra: &[(usize, usize)]) -> GameGraph {
        let mut b = GameGraph::builder().nodes((1..=n).map(|i| i.to_string()));
        for i in 1..=n {
            b = b.edge(i.to_string(), (i % n + 1).to_string());
        }
        for &(u, v) in extra {
            b = b.edge(u.to_string(), v.to_string());
        }
        b.build().unwrap()
    }

    #[test]
    fn parses_minimal_fan() {
        let g = parse_graph(FAN).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.successors(0), &[1, 2]);
        assert_eq!(g.classify(), GraphClass::Fan);
        assert_eq!(g.index_of("b"), Some(2));
    }

    #[test]
    fn rejects_terminal_without_value() {
        let err = parse_graph(r#"{"nodes":["x"],"edges":[],"values":{}}"#).unwrap_err();
        assert!(err.to_string().contains("terminal node \"x\" lacks a value"), "{err}");
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            (
                r#"{"nodes":["r","a"],"edges":[["r","a"]],"values":{"a":0}}"#,
                "positive",
            ),
            (
                r#"{"nodes":["r","a"],"edges":[["r","a"]],"values":{"a":1,"r":2}}"#,
                "outgoing edges",
            ),
            (
                r#"{"nodes":["r","a"],"edges":[["r","z"]],"values":{"a":1}}"#,
                "unknown node",
            ),
            (
                r#"{"nodes":["r","a"],"edges":[["r","a"],["r","a"]],"values":{"a":1}}"#,
                "duplicate edge",
            ),
            (
                r#"{"nodes":["r","a"],"edges":[["r","a"]],"values":{"q":1}}"#,
                "unknown node",
            ),
            (r#"{"nodes":["r","r"],"edges":[],"values":{}}"#, "duplicate node"),
            (r#"{"nodes":[],"edges":[],"values":{}}"#, "no nodes"),
            (
                r#"{"nodes":["r","a"],"edges":[["r","a"]],"values":{"a":-2}}"#,
                "positive",
            ),
        ];
        for (doc, needle) in cases {
            let err = parse_graph(doc).unwrap_err().to_string();
            assert!(err.contains(needle), "{doc}: {err}");
        }
        assert!(matches!(parse_graph("{nodes"), Err(Error::Json(_))));
    }

    #[test]
    fn exact_values_in_documents() {
        let g = parse_graph(r#"{"nodes":["r","a","b"],"edges":[["r","a"],["r","b"]],"values":{"a":"1/3","b":[5,2]}}"#)
            .unwrap();
        assert_eq!(format_rational(g.terminal_value(1).unwrap()), "1/3");
        assert_eq!(format_rational(g.terminal_value(2).unwrap()), "5/2");
        assert_eq!(parse_graph(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(cycle(2, &[]).classify().name(), "unsupported");
        assert!(cycle(2, &[]).classify().to_string().contains("periodic"));
        assert_eq!(cycle(2, &[(1, 1)]).classify(), GraphClass::StronglyConnectedAperiodic);
        assert_eq!(cycle(3, &[(1, 1)]).classify(), GraphClass::StronglyConnectedAperiodic);

        let chain = GameGraph::builder()
            .nodes(["root", "mid", "leaf"])
            .edge("root", "mid")
            .edge("mid", "leaf")
            .value_f64("leaf", 1.0)
            .build()
            .unwrap();
        assert_eq!(chain.classify(), GraphClass::Tree);

        let looped = GameGraph::builder()
            .nodes(["1", "t"])
            .edge("1", "1")
            .edge("1", "t")
            .value_f64("t", 1.0)
            .build()
            .unwrap();
        assert_eq!(looped.classify(), GraphClass::Terminating);

        let trap = GameGraph::builder()
            .nodes(["a", "b", "t"])
            .edge("a", "b")
            .edge("b", "a")
            .edge("a", "t")
            .edge("b", "b")
            .nodes(["c"])
            .edge("c", "c")
            .edge("a", "c")
            .value_f64("t", 1.0)
            .build()
            .unwrap();
        let class = trap.classify();
        assert!(class.to_string().contains("\"c\""), "{class}");

        let single = GameGraph::builder().node("t").value_f64("t", 2.0).build().unwrap();
        assert_eq!(single.classify(), GraphClass::Tree);
    }

    #[test]
    fn cycle_gcd_examples() {
        assert_eq!(aperiodicity_gcd(&cycle(2, &[])).unwrap(), 2);
        assert_eq!(aperiodicity_gcd(&cycle(3, &[])).unwrap(), 3);
        assert_eq!(aperiodicity_gcd(&cycle(3, &[(1, 1)])).unwrap(), 1);
        assert_eq!(aperiodicity_gcd(&cycle(6, &[(1, 4)])).unwrap(), 2);
        let fan = parse_graph(FAN).unwrap();
        assert!(aperiodicity_gcd(&fan).is_err());
    }

    #[test]
    fn dot_export_without_profile() {
        let g = parse_graph(FAN).unwrap();
        let dot = to_dot::<f64>(&g, None).unwrap();
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("doublecircle"));
        assert!(dot.starts_with("digraph"));
    }

    #[test]
    fn dot_escapes_labels() {
        let g = GameGraph::builder()
            .nodes(["say \"hi\"", "t"])
            .edge("say \"hi\"", "t")
            .value_f64("t", 1.0)
            .build()
            .unwrap();
        let dot = to_dot::<f64>(&g, None).unwrap();
        assert!(dot.contains(r#""say \"hi\"""#), "{dot}");
    }
}
