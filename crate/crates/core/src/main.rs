//! Command line interface: graph construction and stats, exploration,
//! summarization, search, patch resolution, and an end-to-end `run`
//! pipeline chaining all stages through files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rexplore::experience::{self, Experience};
use rexplore::graph::{self, BuildConfig};
use rexplore::llm::{ChatClient, LiveClient, RecordingClient, ReplayClient};
use rexplore::mcts::{ExplorationConfig, ExplorationReport};
use rexplore::relevance::RelevanceConfig;
use rexplore::resolver::{self, ResolverConfig};
use rexplore::reward::{ChatOracle, LexicalOracle, RewardOracle};
use rexplore::search::{search_class, search_code, search_method, SearchResult};

#[derive(Parser)]
#[command(
    name = "rexplore",
    version,
    about = "Repository exploration and issue resolution over a code knowledge graph"
)]
struct Cli {
    /// Print the effective default configuration as key=value lines, then
    /// exit.
    #[arg(long)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Build or inspect knowledge graphs.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Run Monte Carlo tree search over a graph for one issue.
    Explore(ExploreArgs),
    /// Condense an exploration report into locations, summary and plan.
    Summarize(SummarizeArgs),
    /// Query a graph: classes, methods, or verbatim code fragments.
    Search {
        #[command(subcommand)]
        command: SearchCommand,
    },
    /// Run the patch-generation agent loop.
    Resolve(ResolveArgs),
    /// Full pipeline: graph build, explore, summarize, resolve.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Parse a source tree into a graph file.
    Build {
        /// Root of the source tree.
        root: PathBuf,
        /// Output path for the graph file.
        #[arg(long, default_value = "graph.json")]
        out: PathBuf,
        /// Comma-separated list of file extensions to index.
        #[arg(long, value_delimiter = ',')]
        ext: Vec<String>,
        /// Exclusion glob; may repeat.
        #[arg(long)]
        exclude: Vec<String>,
    },
    /// Print node and edge counts for a graph file.
    Stats {
        /// Graph file produced by `graph build`.
        file: PathBuf,
    },
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    graph: PathBuf,
    /// File holding the issue text.
    #[arg(long)]
    issue: PathBuf,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<u64>,
    /// Time budget in seconds.
    #[arg(long)]
    seconds: Option<f64>,
    /// Reward oracle: lexical (offline) or chat (needs --client).
    #[arg(long, default_value = "lexical")]
    oracle: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Chat client spec: replay:FILE, record:FILE, or live.
    /// Live mode reads REXPLORE_CHAT_BASE_URL, REXPLORE_CHAT_API_KEY and
    /// REXPLORE_CHAT_MODEL from the environment.
    #[arg(long)]
    client: Option<String>,
    /// Optional key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[arg(long)]
    issue: PathBuf,
    /// Chat client spec: replay:FILE, record:FILE, or live.
    #[arg(long)]
    client: String,
    /// Maximum collected snippets included in the summary prompt.
    #[arg(long)]
    max_snippets: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum SearchCommand {
    /// Search class names.
    Class {
        #[arg(long)]
        graph: PathBuf,
        query: String,
    },
    /// Search function and method names.
    Method {
        #[arg(long)]
        graph: PathBuf,
        query: String,
        /// Restrict to an enclosing class name or file.
        #[arg(long)]
        scope: Option<String>,
    },
    /// Search for a verbatim code fragment.
    Code {
        #[arg(long)]
        graph: PathBuf,
        query: String,
    },
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    issue: PathBuf,
    #[arg(long)]
    experience: PathBuf,
    /// Checked-out source tree the graph was built from.
    #[arg(long)]
    workspace: PathBuf,
    /// Chat client spec: replay:FILE, record:FILE, or live.
    #[arg(long)]
    client: String,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path for the unified diff; the run log lands beside it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Root of the source tree.
    root: PathBuf,
    #[arg(long)]
    issue: PathBuf,
    /// Chat client spec: replay:FILE, record:FILE, or live.
    #[arg(long)]
    client: String,
    /// Directory for all pipeline artifacts.
    #[arg(long, default_value = "rexplore-out")]
    out_dir: PathBuf,
    /// Optional key=value config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iters: Option<u64>,
    #[arg(long)]
    seconds: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reward oracle for exploration: lexical (default, offline) or chat.
    #[arg(long, default_value = "lexical")]
    oracle: String,
    #[arg(long)]
    snippets: Option<usize>,
    #[arg(long)]
    retries: Option<u32>,
    /// Comma-separated list of file extensions to index.
    #[arg(long, value_delimiter = ',')]
    ext: Vec<String>,
    /// Exclusion glob; may repeat.
    #[arg(long)]
    exclude: Vec<String>,
}

/// All tunables with their shipped defaults.
#[derive(Debug, Clone)]
struct PipelineConfig {
    mcts: ExplorationConfig,
    bm25: RelevanceConfig,
    max_snippets: usize,
    resolver: ResolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mcts: ExplorationConfig::default(),
            bm25: RelevanceConfig::default(),
            max_snippets: experience::DEFAULT_MAX_SNIPPETS,
            resolver: ResolverConfig::default(),
        }
    }
}

impl PipelineConfig {
    fn print(&self) {
        println!("mcts.max_iterations={}", self.mcts.max_iterations);
        println!("mcts.max_seconds={}", self.mcts.max_seconds);
        println!("mcts.exploration_c={}", self.mcts.c);
        println!("mcts.reward_threshold={}", self.mcts.reward_threshold);
        println!("mcts.rng_seed={}", self.mcts.rng_seed);
        println!("summary.max_snippets={}", self.max_snippets);
        println!("resolver.max_tool_rounds={}", self.resolver.max_tool_rounds);
        println!("resolver.max_retries={}", self.resolver.max_retries);
        println!("bm25.k1={}", self.bm25.k1);
        println!("bm25.b={}", self.bm25.b);
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key=value", lineno + 1))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| format!("config line {}: {e}", lineno + 1))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |e: &dyn std::fmt::Display| format!("invalid value for {key}: {e}");
        match key {
            "mcts.max_iterations" => {
                self.mcts.max_iterations = value.parse().map_err(|e| bad(&e))?
            }
            "mcts.max_seconds" => self.mcts.max_seconds = value.parse().map_err(|e| bad(&e))?,
            "mcts.exploration_c" => self.mcts.c = value.parse().map_err(|e| bad(&e))?,
            "mcts.reward_threshold" => {
                self.mcts.reward_threshold = value.parse().map_err(|e| bad(&e))?
            }
            "mcts.rng_seed" => self.mcts.rng_seed = value.parse().map_err(|e| bad(&e))?,
            "summary.max_snippets" => self.max_snippets = value.parse().map_err(|e| bad(&e))?,
            "resolver.max_tool_rounds" => {
                self.resolver.max_tool_rounds = value.parse().map_err(|e| bad(&e))?
            }
            "resolver.max_retries" => {
                self.resolver.max_retries = value.parse().map_err(|e| bad(&e))?
            }
            "bm25.k1" => self.bm25.k1 = value.parse().map_err(|e| bad(&e))?,
            "bm25.b" => self.bm25.b = value.parse().map_err(|e| bad(&e))?,
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    // Die quietly when stdout is a closed pipe (e.g. `rexplore ... | head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    if cli.print_config {
        PipelineConfig::default().print();
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (try --help)");
        return ExitCode::from(1);
    };
    match dispatch(command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Graph { command } => run_graph(command).map(|_| ExitCode::SUCCESS),
        Command::Explore(args) => run_explore(args).map(|_| ExitCode::SUCCESS),
        Command::Summarize(args) => run_summarize(args).map(|_| ExitCode::SUCCESS),
        Command::Search { command } => run_search(command).map(|_| ExitCode::SUCCESS),
        Command::Resolve(args) => run_resolve(args),
        Command::Run(args) => run_pipeline(args),
    }
}

fn load_pipeline_config(path: Option<&Path>) -> Result<PipelineConfig, String> {
    let mut config = PipelineConfig::default();
    if let Some(path) = path {
        config.apply_file(path)?;
    }
    Ok(config)
}

fn read_issue(path: &Path) -> Result<String, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read issue file {}: {e}", path.display()))?;
    if text.trim().is_empty() {
        return Err(format!("issue file {} is empty", path.display()));
    }
    Ok(text)
}

fn make_client(spec: &str) -> Result<Box<dyn ChatClient>, String> {
    if let Some(path) = spec.strip_prefix("replay:") {
        let client =
            ReplayClient::from_path(Path::new(path)).map_err(|e| format!("replay client: {e}"))?;
        return Ok(Box::new(client));
    }
    if let Some(path) = spec.strip_prefix("record:") {
        let live = LiveClient::from_env().map_err(|e| format!("live client: {e}"))?;
        let client =
            RecordingClient::create(live, path).map_err(|e| format!("recording client: {e}"))?;
        return Ok(Box::new(client));
    }
    if spec == "live" {
        let live = LiveClient::from_env().map_err(|e| format!("live client: {e}"))?;
        return Ok(Box::new(live));
    }
    Err(format!(
        "unknown client spec {spec:?} (expected replay:FILE, record:FILE, or live)"
    ))
}

fn run_graph(command: GraphCommand) -> Result<(), String> {
    match command {
        GraphCommand::Build {
            root,
            out,
            ext,
            exclude,
        } => {
            let mut config = BuildConfig::default();
            if !ext.is_empty() {
                config.extensions = ext;
            }
            config.exclude = exclude;
            let graph =
                graph::build_graph(&root, &config).map_err(|e| format!("graph build: {e}"))?;
            graph::save_graph(&graph, &out).map_err(|e| format!("graph save: {e}"))?;
            println!(
                "graph: {} nodes, {} containment edges, {} call edges -> {}",
                graph.node_count(),
                graph.contains_edge_count(),
                graph.call_edge_count(),
                out.display()
            );
            Ok(())
        }
        GraphCommand::Stats { file } => {
            let graph = graph::load_graph(&file).map_err(|e| format!("graph load: {e}"))?;
            print_stats(&graph);
            Ok(())
        }
    }
}

fn print_stats(graph: &rexplore::KnowledgeGraph) {
    use rexplore::NodeKind;
    let count = |kind: NodeKind| {
        graph
            .nodes_sorted()
            .iter()
            .filter(|n| n.kind == kind)
            .count()
    };
    println!("root: {}", graph.root_path());
    println!("nodes: {}", graph.node_count());
    println!("  files: {}", count(NodeKind::File));
    println!("  classes: {}", count(NodeKind::Class));
    println!("  functions: {}", count(NodeKind::Function));
    println!("containment edges: {}", graph.contains_edge_count());
    println!("call edges: {}", graph.call_edge_count());
    let d = graph.diagnostics();
    println!("parse failures: {}", d.parse_failures);
    println!("unresolved calls: {}", d.unresolved_calls);
    println!("ambiguous calls: {}", d.ambiguous_calls);
}

/// Builds the oracle and runs exploration. The chat oracle shares the
/// provided client.
fn explore_stage(
    graph: &rexplore::KnowledgeGraph,
    issue: &str,
    oracle_kind: &str,
    client: Option<&mut Box<dyn ChatClient>>,
    config: &PipelineConfig,
) -> Result<ExplorationReport, String> {
    let run = |oracle: &mut dyn RewardOracle| -> Result<ExplorationReport, String> {
        let mut explorer = rexplore::mcts::Explorer::new(graph, issue, oracle, config.mcts.clone())
            .map_err(|e| format!("explore: {e}"))?
            .with_relevance(config.bm25);
        explorer.run();
        Ok(explorer.report())
    };
    match oracle_kind {
        "lexical" => run(&mut LexicalOracle),
        "chat" => {
            let client = client.ok_or_else(|| "the chat oracle requires --client".to_string())?;
            let mut oracle = ChatOracle::new(client);
            run(&mut oracle)
        }
        other => Err(format!(
            "unknown oracle {other:?} (expected lexical or chat)"
        )),
    }
}

fn run_explore(args: ExploreArgs) -> Result<(), String> {
    let mut config = load_pipeline_config(args.config.as_deref())?;
    if let Some(iters) = args.iters {
        config.mcts.max_iterations = iters;
    }
    if let Some(seconds) = args.seconds {
        config.mcts.max_seconds = seconds;
    }
    if let Some(seed) = args.seed {
        config.mcts.rng_seed = seed;
    }
    let graph = graph::load_graph(&args.graph).map_err(|e| format!("graph load: {e}"))?;
    let issue = read_issue(&args.issue)?;
    let mut client = match &args.client {
        Some(spec) => Some(make_client(spec)?),
        None => None,
    };
    let report = explore_stage(&graph, &issue, &args.oracle, client.as_mut(), &config)?;
    report
        .save(&args.out)
        .map_err(|e| format!("report save: {e}"))?;
    println!(
        "explored {} iterations, collected {} nodes -> {}",
        report.iterations_run,
        report.collected.len(),
        args.out.display()
    );
    Ok(())
}

fn run_summarize(args: SummarizeArgs) -> Result<(), String> {
    let mut config = load_pipeline_config(args.config.as_deref())?;
    if let Some(snippets) = args.max_snippets {
        config.max_snippets = snippets;
    }
    let graph = graph::load_graph(&args.graph).map_err(|e| format!("graph load: {e}"))?;
    let issue = read_issue(&args.issue)?;
    let report = ExplorationReport::load(&args.report).map_err(|e| format!("report load: {e}"))?;
    let mut client = make_client(&args.client)?;
    let summarized =
        experience::summarize(&issue, &report, &graph, &mut client, config.max_snippets)
            .map_err(|e| format!("summarize: {e}"))?;
    if summarized.malformed_reply {
        eprintln!("warning: summarize reply had no SUMMARY:/PLAN: headings; stored raw");
    }
    summarized
        .experience
        .save(&args.out)
        .map_err(|e| format!("experience save: {e}"))?;
    println!(
        "experience with {} locations -> {}",
        summarized.experience.locations.len(),
        args.out.display()
    );
    Ok(())
}

fn run_search(command: SearchCommand) -> Result<(), String> {
    let results = match &command {
        SearchCommand::Class { graph, query } => {
            let g = graph::load_graph(graph).map_err(|e| format!("graph load: {e}"))?;
            search_class(&g, query).map_err(|e| e.to_string())?
        }
        SearchCommand::Method {
            graph,
            query,
            scope,
        } => {
            let g = graph::load_graph(graph).map_err(|e| format!("graph load: {e}"))?;
            search_method(&g, query, scope.as_deref()).map_err(|e| e.to_string())?
        }
        SearchCommand::Code { graph, query } => {
            let g = graph::load_graph(graph).map_err(|e| format!("graph load: {e}"))?;
            search_code(&g, query).map_err(|e| e.to_string())?
        }
    };
    print_results(&results);
    Ok(())
}

fn print_results(results: &[SearchResult]) {
    if results.is_empty() {
        println!("no results");
        return;
    }
    for (i, result) in results.iter().enumerate() {
        println!(
            "{}. [{:?}] {}  {}",
            i + 1,
            result.match_kind,
            result.qualified_name,
            result.location
        );
        for line in result.snippet.lines().take(3) {
            println!("     {line}");
        }
        if result.snippet.lines().count() > 3 {
            println!("     ...");
        }
    }
}

fn run_resolve(args: ResolveArgs) -> Result<ExitCode, String> {
    let config = load_pipeline_config(args.config.as_deref())?;
    let graph = graph::load_graph(&args.graph).map_err(|e| format!("graph load: {e}"))?;
    let issue = read_issue(&args.issue)?;
    let experience =
        Experience::load(&args.experience).map_err(|e| format!("experience load: {e}"))?;
    let mut client = make_client(&args.client)?;
    let log_path = run_log_path(&args.out);
    match resolver::resolve(
        &issue,
        &graph,
        &experience,
        &mut client,
        &args.workspace,
        &config.resolver,
    ) {
        Ok(resolution) => {
            std::fs::write(&args.out, &resolution.patch.diff)
                .map_err(|e| format!("cannot write {}: {e}", args.out.display()))?;
            write_json(&log_path, &resolution.log)?;
            println!(
                "attempts: {}, applied: {} -> {}",
                resolution.patch.attempts,
                resolution.patch.applied,
                args.out.display()
            );
            Ok(if resolution.patch.applied {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Err(resolver::ResolverError::Transport { source, log }) => {
            write_json(&log_path, &log)?;
            Err(format!(
                "resolve: {source} (partial conversation saved to {})",
                log_path.display()
            ))
        }
        Err(e) => Err(format!("resolve: {e}")),
    }
}

fn run_log_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "resolve".to_string());
    out.with_file_name(format!("{stem}.log.json"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| format!("serialize {}: {e}", path.display()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

#[derive(Serialize)]
struct RunManifest {
    format: &'static str,
    version: u32,
    root: String,
    issue_file: String,
    out_dir: String,
    artifacts: ManifestArtifacts,
    config: ManifestConfig,
    timings_ms: ManifestTimings,
    applied: bool,
    attempts: u32,
    fault_locations: Vec<String>,
}

#[derive(Serialize)]
struct ManifestArtifacts {
    graph: String,
    report: String,
    experience: String,
    diff: String,
    run_log: String,
}

#[derive(Serialize)]
struct ManifestConfig {
    mcts: ExplorationConfig,
    bm25: RelevanceConfig,
    max_snippets: usize,
    resolver: ResolverConfig,
}

#[derive(Serialize, Default)]
struct ManifestTimings {
    graph_build: u128,
    explore: u128,
    summarize: u128,
    resolve: u128,
}

fn run_pipeline(args: RunArgs) -> Result<ExitCode, String> {
    let mut config = load_pipeline_config(args.config.as_deref())?;
    if let Some(iters) = args.iters {
        config.mcts.max_iterations = iters;
    }
    if let Some(seconds) = args.seconds {
        config.mcts.max_seconds = seconds;
    }
    if let Some(seed) = args.seed {
        config.mcts.rng_seed = seed;
    }
    if let Some(snippets) = args.snippets {
        config.max_snippets = snippets;
    }
    if let Some(retries) = args.retries {
        config.resolver.max_retries = retries;
    }

    let issue = read_issue(&args.issue)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.out_dir.display()))?;

    let graph_path = args.out_dir.join("graph.json");
    let report_path = args.out_dir.join("report.json");
    let experience_path = args.out_dir.join("experience.json");
    let diff_path = args.out_dir.join("patch.diff");
    let log_path = args.out_dir.join("run_log.json");
    let manifest_path = args.out_dir.join("manifest.json");

    let mut timings = ManifestTimings::default();

    // Stage 1: graph construction.
    let started = Instant::now();
    let mut build_config = BuildConfig::default();
    if !args.ext.is_empty() {
        build_config.extensions = args.ext.clone();
    }
    build_config.exclude = args.exclude.clone();
    let graph =
        graph::build_graph(&args.root, &build_config).map_err(|e| format!("graph build: {e}"))?;
    graph::save_graph(&graph, &graph_path).map_err(|e| format!("graph save: {e}"))?;
    timings.graph_build = started.elapsed().as_millis();

    let mut client = make_client(&args.client)?;

    // Stage 2: exploration.
    let started = Instant::now();
    let report = explore_stage(&graph, &issue, &args.oracle, Some(&mut client), &config)?;
    report
        .save(&report_path)
        .map_err(|e| format!("report save: {e}"))?;
    timings.explore = started.elapsed().as_millis();

    // Stage 3: summary.
    let started = Instant::now();
    let summarized =
        experience::summarize(&issue, &report, &graph, &mut client, config.max_snippets)
            .map_err(|e| format!("summarize: {e}"))?;
    summarized
        .experience
        .save(&experience_path)
        .map_err(|e| format!("experience save: {e}"))?;
    timings.summarize = started.elapsed().as_millis();

    // Stage 4: resolution.
    let started = Instant::now();
    let resolution = match resolver::resolve(
        &issue,
        &graph,
        &summarized.experience,
        &mut client,
        &args.root,
        &config.resolver,
    ) {
        Ok(resolution) => resolution,
        Err(resolver::ResolverError::Transport { source, log }) => {
            write_json(&log_path, &log)?;
            return Err(format!(
                "resolve: {source} (partial conversation saved to {})",
                log_path.display()
            ));
        }
        Err(e) => return Err(format!("resolve: {e}")),
    };
    timings.resolve = started.elapsed().as_millis();

    std::fs::write(&diff_path, &resolution.patch.diff)
        .map_err(|e| format!("cannot write {}: {e}", diff_path.display()))?;
    write_json(&log_path, &resolution.log)?;

    let manifest = RunManifest {
        format: "rexplore-run-manifest",
        version: 1,
        root: args.root.display().to_string(),
        issue_file: args.issue.display().to_string(),
        out_dir: args.out_dir.display().to_string(),
        artifacts: ManifestArtifacts {
            graph: graph_path.display().to_string(),
            report: report_path.display().to_string(),
            experience: experience_path.display().to_string(),
            diff: diff_path.display().to_string(),
            run_log: log_path.display().to_string(),
        },
        config: ManifestConfig {
            mcts: config.mcts.clone(),
            bm25: config.bm25,
            max_snippets: config.max_snippets,
            resolver: config.resolver.clone(),
        },
        timings_ms: timings,
        applied: resolution.patch.applied,
        attempts: resolution.patch.attempts,
        fault_locations: resolution.patch.fault_locations.clone(),
    };
    write_json(&manifest_path, &manifest)?;

    println!(
        "run complete: applied={} attempts={} (artifacts in {})",
        resolution.patch.applied,
        resolution.patch.attempts,
        args.out_dir.display()
    );
    Ok(if resolution.patch.applied {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
