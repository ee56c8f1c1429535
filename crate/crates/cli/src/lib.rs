//! Command-line front end: solve, strategy, analyze, simulate, generate,
//! verify, play and export-dot.
//!
//! Exit codes: 0 on success, 1 on any input or validation error, 2 when
//! `verify` finds a failing certificate.

pub mod manifest;
pub mod play;

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pathwager::oracle::parse_pattern_file;
use pathwager::scalar::format_significant;
use pathwager::sim::{MeanEstimate, SimulationResult};
use pathwager::verify::{DEFAULT_DEPTH, DEFAULT_GRID};
use pathwager::{
    analyze, build_profile, certify_graph, parse_graph, simulate, solve, to_dot, truncated_values, GameGraph,
    OracleKind, OracleSpec, Rational, SimulationConfig, Solution,
};
use serde::Serialize;
use serde_json::{json, Map, Value};

pub use manifest::RunManifest;
pub use play::{play, PlayOptions, Role, Transcript};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;

/// Default horizon for simulations on strongly connected graphs, which never
/// end on their own.
pub const DEFAULT_HORIZON: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "pathwager",
    version,
    about = "Path guessing game with wagering: values, strategies and play"
)]
pub struct Cli {
    /// Game graph document.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Random seed for simulate and play.
    #[arg(long, global = true, env = "PATHWAGER_SEED")]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Node values, and r for strongly connected graphs.
    Solve(SolveArgs),
    /// Optimal chooser and guesser strategies.
    Strategy(StrategyArgs),
    /// Markov chain of optimal play: stopping times, invariant measure, fairness.
    Analyze(AnalyzeArgs),
    /// Monte Carlo play under the optimal profile.
    Simulate(SimulateArgs),
    /// Build a lying-oracle game graph.
    Generate(GenerateArgs),
    /// Check equilibrium certificates; exits with 2 if any fails.
    Verify(VerifyArgs),
    /// Play against the optimal opponent.
    Play(PlayArgs),
    /// Graphviz rendering, annotated with the optimal profile.
    ExportDot(ExportDotArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Strategy(_) => "strategy",
            Command::Analyze(_) => "analyze",
            Command::Simulate(_) => "simulate",
            Command::Generate(_) => "generate",
            Command::Verify(_) => "verify",
            Command::Play(_) => "play",
            Command::ExportDot(_) => "export-dot",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Solve in exact rational arithmetic (fans, trees and terminating graphs).
    #[arg(long)]
    pub exact: bool,
    /// Also report the distance of the S-step truncated game from the limit, for S = 0..=S.
    #[arg(long, value_name = "S")]
    pub truncate: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct StrategyArgs {
    /// Risk parameter in [0, 1]; 1 gives the minimum-risk guesser.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Length of the stopping-time distribution.
    #[arg(long, default_value_t = 200)]
    pub tmax: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// Step limit: a censoring bound on terminating graphs, the run length on
    /// strongly connected ones.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Start node label; defaults to the graph's start node.
    #[arg(long)]
    pub start: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    /// `window:N,K`, `window-stop:N[,K]` or `patterns:FILE`.
    #[arg(long)]
    pub oracle: String,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Backward-induction depth for the brute-force bounds.
    #[arg(long, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Number of wager grid points in [0, 1].
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PlayArgs {
    /// The side you play.
    #[arg(long = "as", value_enum)]
    pub role: Role,
    /// Risk parameter of the engine guesser.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub start: Option<String>,
    /// Stop after this many rounds.
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportDotArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Leave out the strategy annotations.
    #[arg(long)]
    pub plain: bool,
}

/// Text written by a subcommand and its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub code: i32,
    /// Already written to `--out`; `text` goes to standard output.
    pub wrote_out: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self {
            text,
            code: EXIT_OK,
            wrote_out: false,
        }
    }
}

fn num(x: f64) -> String {
    format_significant(x, 12)
}

fn pretty(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values serialise");
    s.push('\n');
    s
}

fn csv_text(manifest: &RunManifest, header: &[String], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    Ok(manifest.comment("#") + &body)
}

fn resolved_config(cli: &Cli) -> Value {
    let mut config = serde_json::to_value(&cli.command).expect("arguments serialise");
    let globals = json!({
        "graph": cli.graph.as_ref().map(|p| p.display().to_string()),
        "out": cli.out.as_ref().map(|p| p.display().to_string()),
        "format": cli.format,
    });
    if let Value::Object(map) = &mut config {
        map.insert("global".into(), globals);
    }
    config
}

fn load_graph(cli: &Cli, manifest: &mut RunManifest) -> Result<GameGraph> {
    let path = cli
        .graph
        .as_ref()
        .ok_or_else(|| anyhow!("--graph is required for {}", cli.command.name()))?;
    let text = manifest.read_input(path)?;
    parse_graph(&text).with_context(|| format!("cannot load {}", path.display()))
}

fn node_by_label(graph: &GameGraph, label: Option<&str>) -> Result<usize> {
    match label {
        Some(l) => graph.index_of(l).ok_or_else(|| anyhow!("no node labelled {l:?}")),
        None => graph
            .default_start()
            .ok_or_else(|| anyhow!("the graph has no start node")),
    }
}

fn solve_checked(graph: &GameGraph) -> Result<Solution> {
    let class = graph.classify();
    if !class.is_supported() {
        bail!("unsupported graph: {class}");
    }
    Ok(solve::<f64>(graph)?)
}

fn require_json(cli: &Cli) -> Result<()> {
    if cli.format == Format::Csv {
        bail!("{} has no CSV form", cli.command.name());
    }
    Ok(())
}

/// Parses `argv` and runs the subcommand, reading standard input for `play`.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    match execute(&cli, stdin.lock(), stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

/// Runs a parsed command; `input` and `output` are the REPL's streams and
/// receive reports when no `--out` is given.
pub fn execute<R: BufRead, W: Write>(cli: &Cli, input: R, mut output: W) -> Result<i32> {
    let out = match &cli.command {
        Command::Play(args) => return run_play(cli, args, input, output),
        _ => dispatch(cli)?,
    };
    let target = if out.wrote_out { None } else { cli.out.as_deref() };
    emit(target, &out.text, &mut output)?;
    Ok(out.code)
}

fn emit<W: Write>(path: Option<&Path>, text: &str, output: &mut W) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            output.write_all(text.as_bytes())?;
            output.flush()?;
            Ok(())
        }
    }
}

/// Every subcommand except `play`.
pub fn dispatch(cli: &Cli) -> Result<Output> {
    let config = resolved_config(cli);
    let name = cli.command.name();
    match &cli.command {
        Command::Solve(args) => cmd_solve(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::Strategy(args) => cmd_strategy(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::Analyze(args) => cmd_analyze(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::Simulate(args) => {
            let seed = cli.seed.unwrap_or(0);
            cmd_simulate(cli, args, seed, RunManifest::new(name, config, Some(seed)))
        }
        Command::Generate(args) => cmd_generate(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::Verify(args) => cmd_verify(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::ExportDot(args) => cmd_export_dot(cli, args, RunManifest::new(name, config, cli.seed)),
        Command::Play(_) => bail!("play needs an interactive session; use execute"),
    }
}

fn cmd_solve(cli: &Cli, args: &SolveArgs, mut manifest: RunManifest) -> Result<Output> {
    let graph = load_graph(cli, &mut manifest)?;
    let class = graph.classify();
    if !class.is_supported() {
        bail!("unsupported graph: {class}");
    }
    let (doc, values): (Value, Vec<String>) = if args.exact {
        let sol = solve::<Rational>(&graph)?;
        let residuals = args.truncate.map(|s| truncated_values(&graph, &sol, s)).transpose()?;
        let doc = sol.to_json(&graph, residuals.as_ref().map(|r| r.residuals.as_slice()));
        (doc, sol.values.iter().map(|v| v.to_string()).collect())
    } else {
        let sol = solve::<f64>(&graph)?;
        let residuals = args.truncate.map(|s| truncated_values(&graph, &sol, s)).transpose()?;
        let doc = sol.to_json(&graph, residuals.as_ref().map(|r| r.residuals.as_slice()));
        (doc, sol.values.iter().map(|&v| num(v)).collect())
    };
    let text = match cli.format {
        Format::Json => pretty(&manifest.embed(doc)),
        Format::Csv => {
            let rows = values
                .into_iter()
                .enumerate()
                .map(|(i, v)| vec![graph.label(i).to_owned(), v])
                .collect();
            csv_text(&manifest, &["node".into(), "value".into()], rows)?
        }
    };
    Ok(Output::ok(text))
}

fn cmd_strategy(cli: &Cli, args: &StrategyArgs, mut manifest: RunManifest) -> Result<Output> {
    let graph = load_graph(cli, &mut manifest)?;
    let sol = solve_checked(&graph)?;
    let profile = build_profile(&sol, &graph, args.beta)?;
    let text = match cli.format {
        Format::Json => pretty(&manifest.embed(profile.to_json(&graph))),
        Format::Csv => {
            let mut rows = Vec::new();
            for i in graph.non_terminals() {
                let s = profile.node(i).expect("non-terminal");
                for (k, &j) in graph.successors(i).iter().enumerate() {
                    rows.push(vec![
                        graph.label(i).to_owned(),
                        graph.label(j).to_owned(),
                        num(s.chooser[k]),
                        num(s.guesser[k]),
                        num(s.wager),
                    ]);
                }
            }
            let header = ["node", "successor", "chooser", "guesser", "wager"].map(String::from);
            csv_text(&manifest, &header, rows)?
        }
    };
    Ok(Output::ok(text))
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs, mut manifest: RunManifest) -> Result<Output> {
    let graph = load_graph(cli, &mut manifest)?;
    let sol = solve_checked(&graph)?;
    let report = analyze(&sol, &graph, args.tmax)?;
    let text = match cli.format {
        Format::Json => pretty(&manifest.embed(report.to_json(&graph))),
        Format::Csv => match (&report.stopping, &report.invariant, &report.steady) {
            (Some(st), _, _) => {
                // one column of P(T = t) per non-terminal start node
                let mut header = vec!["t".to_owned()];
                header.extend(st.non_terminal.iter().map(|&i| graph.label(i).to_owned()));
                let rows = st
                    .stop_dist
                    .iter()
                    .enumerate()
                    .map(|(t, q)| {
                        std::iter::once((t + 1).to_string())
                            .chain(q.iter().map(|&x| num(x)))
                            .collect()
                    })
                    .collect();
                csv_text(&manifest, &header, rows)?
            }
            (None, Some(inv), Some(steady)) => {
                let rows = (0..graph.node_count())
                    .map(|i| vec![graph.label(i).to_owned(), num(inv.mu[i]), num(steady.shape[i])])
                    .collect();
                let header = ["node", "invariant_measure", "steady_shape"].map(String::from);
                csv_text(&manifest, &header, rows)?
            }
            _ => bail!("no tabular analysis for this graph"),
        },
    };
    Ok(Output::ok(text))
}

fn estimate_json(e: &Option<MeanEstimate>) -> Value {
    serde_json::to_value(e).expect("estimates serialise")
}

fn simulation_summary(graph: &GameGraph, sol: &Solution, result: &SimulationResult) -> Value {
    let s = &result.summary;
    let terminal_frequencies: Map<String, Value> = s
        .terminal_frequencies
        .iter()
        .enumerate()
        .filter(|(_, e)| e.is_some())
        .map(|(i, e)| (graph.label(i).to_owned(), estimate_json(e)))
        .collect();
    let occupancy: Map<String, Value> = s
        .occupancy
        .iter()
        .enumerate()
        .map(|(i, e)| (graph.label(i).to_owned(), serde_json::to_value(e).expect("estimate")))
        .collect();
    let checkpoints: Map<String, Value> = s
        .checkpoint_means
        .iter()
        .map(|(t, e)| (t.to_string(), serde_json::to_value(e).expect("estimate")))
        .collect();
    let histogram: Map<String, Value> = s
        .stop_histogram
        .iter()
        .map(|(t, c)| (t.to_string(), json!(c)))
        .collect();
    json!({
        "start": graph.label(result.start),
        "value_at_start": sol.values[result.start],
        "seed": result.seed,
        "replications": result.replications.len(),
        "terminating": result.terminating,
        "discount": result.discount,
        "completed": s.completed,
        "censored": s.censored,
        "mean_fortune": estimate_json(&s.mean_fortune),
        "mean_steps": estimate_json(&s.mean_steps),
        "terminal_frequencies": terminal_frequencies,
        "stop_histogram": histogram,
        "checkpoint_means": checkpoints,
        "occupancy": occupancy,
        "warnings": result.warnings,
    })
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, seed: u64, mut manifest: RunManifest) -> Result<Output> {
    let graph = load_graph(cli, &mut manifest)?;
    let sol = solve_checked(&graph)?;
    let profile = build_profile(&sol, &graph, args.beta)?;
    let start = node_by_label(&graph, args.start.as_deref())?;
    let mut config = SimulationConfig::new(start, args.reps, seed);
    if sol.class.is_terminating() {
        if let Some(h) = args.horizon {
            config = config.max_steps(h);
        }
    } else {
        let h = args.horizon.unwrap_or(DEFAULT_HORIZON);
        config = config.max_steps(h).discount(sol.growth()).checkpoints([h]);
    }
    let result = simulate(&graph, &profile, &config)?;
    let text = match cli.format {
        Format::Json => pretty(&manifest.embed(simulation_summary(&graph, &sol, &result))),
        Format::Csv => {
            let header = [
                "replication",
                "final_fortune",
                "steps",
                "terminal",
                "last_checkpoint",
                "discounted_fortune",
            ]
            .map(String::from);
            let rows = result
                .replications
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let last = r.checkpoints.last();
                    vec![
                        k.to_string(),
                        r.final_fortune.map(num).unwrap_or_default(),
                        r.steps.to_string(),
                        r.terminal.map(|t| graph.label(t).to_owned()).unwrap_or_default(),
                        last.map(|c| c.step.to_string()).unwrap_or_default(),
                        last.map(|c| num(c.discounted_fortune)).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_text(&manifest, &header, rows)?
        }
    };
    Ok(Output::ok(text))
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs, mut manifest: RunManifest) -> Result<Output> {
    require_json(cli)?;
    let spec = match args.oracle.split_once(':') {
        Some(("patterns", file)) => {
            let text = manifest.read_input(Path::new(file))?;
            OracleSpec::new(OracleKind::ForbiddenPatterns {
                patterns: parse_pattern_file(&text)?,
            })
        }
        _ => OracleSpec::parse(&args.oracle)?,
    };
    let graph = spec.build()?;
    let document = graph.to_json();
    // the graph itself goes to --out; a summary carrying the manifest goes to stdout
    let text = match &cli.out {
        Some(path) => {
            std::fs::write(path, &document).with_context(|| format!("cannot write {}", path.display()))?;
            pretty(&manifest.embed(json!({
                "written": path.display().to_string(),
                "class": graph.classify(),
                "nodes": graph.node_count(),
                "edges": graph.edge_count(),
            })))
        }
        None => document + "\n",
    };
    Ok(Output {
        text,
        code: EXIT_OK,
        wrote_out: cli.out.is_some(),
    })
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, mut manifest: RunManifest) -> Result<Output> {
    let graph = load_graph(cli, &mut manifest)?;
    let class = graph.classify();
    if !class.is_supported() {
        bail!("unsupported graph: {class}");
    }
    let report = certify_graph(&graph, args.beta, args.depth, args.grid)?;
    let passed = report.passed();
    let text = match cli.format {
        Format::Json => pretty(&manifest.embed(json!({
            "passed": passed,
            "failures": report.failures(),
            "report": report,
        }))),
        Format::Csv => {
            let certs = report
                .nodes
                .iter()
                .map(|(_, c)| c)
                .chain(&report.exploit)
                .chain(&report.bounds_check)
                .chain(std::iter::once(&report.convergence));
            let mut rows = Vec::new();
            for cert in certs {
                for check in &cert.checks {
                    rows.push(vec![
                        cert.subject.clone(),
                        check.name.clone(),
                        check.passed.to_string(),
                        num(check.measured),
                        num(check.tolerance),
                    ]);
                }
            }
            let header = ["subject", "check", "passed", "measured", "tolerance"].map(String::from);
            csv_text(&manifest, &header, rows)?
        }
    };
    Ok(Output {
        text,
        code: if passed { EXIT_OK } else { EXIT_VERIFY_FAILED },
        wrote_out: false,
    })
}

fn cmd_export_dot(cli: &Cli, args: &ExportDotArgs, mut manifest: RunManifest) -> Result<Output> {
    require_json(cli)?;
    let graph = load_graph(cli, &mut manifest)?;
    let dot = if args.plain {
        to_dot::<f64>(&graph, None)?
    } else {
        let sol = solve_checked(&graph)?;
        let profile = build_profile(&sol, &graph, args.beta)?;
        to_dot(&graph, Some(&profile))?
    };
    Ok(Output::ok(manifest.comment("//") + &dot))
}

fn run_play<R: BufRead, W: Write>(cli: &Cli, args: &PlayArgs, input: R, mut output: W) -> Result<i32> {
    require_json(cli)?;
    let seed = cli.seed.unwrap_or(0);
    let mut manifest = RunManifest::new("play", resolved_config(cli), Some(seed));
    let graph = load_graph(cli, &mut manifest)?;
    let sol = solve_checked(&graph)?;
    let profile = build_profile(&sol, &graph, args.beta)?;
    let options = PlayOptions {
        role: args.role,
        seed,
        start: node_by_label(&graph, args.start.as_deref())?,
        max_rounds: args.rounds,
    };
    let transcript = play(&graph, &profile, &options, input, &mut output)?;
    let doc = pretty(&manifest.embed(serde_json::to_value(&transcript)?));
    match &cli.out {
        Some(path) => {
            std::fs::write(path, doc).with_context(|| format!("cannot write {}", path.display()))?;
            writeln!(output, "transcript saved to {}", path.display())?;
        }
        None => {
            writeln!(output, "transcript:")?;
            output.write_all(doc.as_bytes())?;
        }
    }
    Ok(EXIT_OK)
}
