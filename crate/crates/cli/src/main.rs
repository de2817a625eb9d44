use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kbm_igs::bench::{run_experiment, to_csv, BenchConfig, ExperimentReport};
use kbm_igs::dp_plus::{precompute_first_round, FirstRoundCache};
use kbm_igs::fixtures::{toy10, verify_fixtures, FixtureOptions};
use kbm_igs::oracle::{parse_target_file, write_target_file};
use kbm_igs::session::export_log_jsonl;
use kbm_igs::synth::{gen_random_tree, sample_objects};
use kbm_igs::{
    set_penalty, Algorithm, Answer, Hierarchy, NoisyOracle, NoisyOracleConfig, Oracle, Searcher, TargetSet,
    TruthfulOracle,
};
use kbm_igs_service::Store;

#[derive(Parser)]
#[command(name = "kbm-igs", version, about = "Budget-constrained interactive search over label hierarchies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random tree and query objects.
    Gen(GenArgs),
    /// Run one simulated session and print every question.
    Simulate(SimulateArgs),
    /// Answer the questions yourself at the terminal.
    Interactive(InteractiveArgs),
    /// Sweep algorithms, budgets and k over many query objects.
    Bench(BenchArgs),
    /// Recompute the worked gain tables on the ten-vertex example.
    VerifyFixtures(VerifyArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct GenArgs {
    /// Number of vertices.
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 6)]
    max_degree: usize,
    /// Number of query objects to sample into --targets.
    #[arg(long, default_value_t = 200)]
    objects: usize,
    #[arg(long, default_value_t = 1)]
    min_targets: usize,
    #[arg(long, default_value_t = 3)]
    max_targets: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tree output; `.json` selects the JSON format, anything else an edge list.
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long)]
    targets: Option<PathBuf>,
}

#[derive(Args)]
struct SessionArgs {
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long, default_value = "kbm-dp-plus")]
    algo: String,
    #[arg(long, default_value_t = 50)]
    budget: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// kBM-DP+ first-round cache; read if present and matching, written otherwise.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    targets: PathBuf,
    /// Which query object of the target file to search for.
    #[arg(long, default_value_t = 0)]
    object: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fraction of difficult objects; with one object, any positive value makes it difficult.
    #[arg(long)]
    noise_frac: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    noise_p: f64,
    /// Write the question log as JSON lines.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InteractiveArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    hierarchy: PathBuf,
    #[arg(long)]
    targets: PathBuf,
    /// Comma-separated algorithms.
    #[arg(long, default_value = "stbis,bing-single,kbm-dp-plus,kbm-topk,bing-multi", value_delimiter = ',')]
    algo: Vec<String>,
    #[arg(long, default_value = "5,10,20,50", value_delimiter = ',')]
    budget: Vec<usize>,
    #[arg(long, default_value = "3", value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    noise_frac: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    noise_p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write zero time columns so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Defaults to the built-in copy of the example.
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    /// Override the uniform starting prior, as a negative control.
    #[arg(long)]
    prior: Option<f64>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Trees to register at startup.
    #[arg(long)]
    hierarchy: Vec<PathBuf>,
    /// Persist sessions here and restore them on startup.
    #[arg(long)]
    data: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(a) => gen(a),
        Command::Simulate(a) => simulate(a),
        Command::Interactive(a) => interactive(a),
        Command::Bench(a) => bench(a),
        Command::VerifyFixtures(a) => verify(a),
        Command::Serve(a) => serve(a),
    }
}

fn load_hierarchy(path: &Path) -> Result<Hierarchy> {
    Hierarchy::load_path(path).with_context(|| format!("loading {}", path.display()))
}

fn load_targets(h: &Hierarchy, path: &Path) -> Result<Vec<TargetSet>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_target_file(h, &text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let h = gen_random_tree(a.n, a.max_degree, a.seed)?;
    let is_json = a.hierarchy.extension().is_some_and(|e| e == "json");
    let text = if is_json { h.to_json() } else { h.to_edge_list() };
    fs::write(&a.hierarchy, text).with_context(|| format!("writing {}", a.hierarchy.display()))?;
    println!("wrote {} vertices, height {}, to {}", h.len(), h.height(), a.hierarchy.display());
    if let Some(path) = a.targets {
        let objects = sample_objects(&h, a.objects, a.min_targets..=a.max_targets, a.seed.wrapping_add(1))?;
        fs::write(&path, write_target_file(&h, &objects)).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {} query objects to {}", objects.len(), path.display());
    }
    Ok(())
}

fn searcher(h: &Arc<Hierarchy>, a: &SessionArgs) -> Result<Searcher> {
    let algo = Algorithm::parse_with_k(&a.algo, a.k).map_err(anyhow::Error::msg)?;
    if algo != Algorithm::KbmDpPlus {
        return Ok(Searcher::new(h.clone(), algo, a.budget, a.k)?);
    }
    let Some(path) = &a.cache else {
        return Ok(Searcher::new(h.clone(), algo, a.budget, a.k)?);
    };
    let cache = match FirstRoundCache::load(path) {
        Ok(c) if c.check(h, a.k).is_ok() => c,
        _ => {
            let c = precompute_first_round(h, a.k)?;
            c.save(path)?;
            eprintln!("wrote first-round cache to {}", path.display());
            c
        }
    };
    Ok(Searcher::with_cache(h.clone(), a.budget, a.k, &cache)?)
}

fn path_of(h: &Hierarchy, v: kbm_igs::VertexId) -> String {
    h.root_path(v).into_iter().map(|u| h.label(u)).collect::<Vec<_>>().join(" > ")
}

fn report_selection(h: &Hierarchy, s: &Searcher) {
    let sel = s.finalize();
    println!("selection after {} question(s):", s.state().questions_asked());
    if sel.is_empty() {
        println!("  {} (root)", h.label(h.root()));
    }
    for &v in sel.members() {
        println!("  {}  [{}]", h.label(v), path_of(h, v));
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let h = Arc::new(load_hierarchy(&a.session.hierarchy)?);
    let objects = load_targets(&h, &a.targets)?;
    let Some(targets) = objects.get(a.object).cloned() else {
        bail!("object {} not in {} ({} objects)", a.object, a.targets.display(), objects.len());
    };
    let mut oracle: Box<dyn Oracle> = match a.noise_frac {
        Some(frac) => {
            let cfg = NoisyOracleConfig::new(frac, a.noise_p, a.seed).map_err(anyhow::Error::msg)?;
            Box::new(NoisyOracle::new(targets.clone(), cfg, frac > 0.0, a.object as u64))
        }
        None => Box::new(TruthfulOracle::new(targets.clone())),
    };
    let mut s = searcher(&h, &a.session)?;
    println!("{} on {} vertices, b = {}, k = {}", s.algorithm(), h.len(), a.session.budget, s.state().k());
    while let Some(q) = s.next_question()? {
        let ans = oracle.reach(&h, q);
        s.answer(ans)?;
        let st = s.state();
        println!(
            "q{:<3} {:<12} {:<3}  |P| = {:<6} |Y| = {}",
            st.questions_asked(),
            h.key(q),
            ans,
            st.p_count(),
            st.y_count()
        );
    }
    report_selection(&h, &s);
    let pen = set_penalty(&h, s.finalize().members(), targets.members());
    let names: Vec<&str> = targets.members().iter().map(|&t| h.key(t)).collect();
    println!("targets {names:?}, penalty {pen}");
    if let Some(out) = &a.out {
        write_out(Some(out), &export_log_jsonl(&h, s.state()))?;
    }
    Ok(())
}

fn interactive(a: InteractiveArgs) -> Result<()> {
    let h = Arc::new(load_hierarchy(&a.session.hierarchy)?);
    let mut s = searcher(&h, &a.session)?;
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    while let Some(q) = s.next_question()? {
        let ans = loop {
            print!(
                "[{} left] Does the object belong under '{}'? ({})  [y/n] ",
                s.state().budget_remaining(),
                h.label(q),
                path_of(&h, q)
            );
            io::stdout().flush()?;
            let Some(line) = lines.next() else {
                bail!("input ended before the session finished");
            };
            match line?.parse::<Answer>() {
                Ok(ans) => break ans,
                Err(e) => println!("{e}"),
            }
        };
        s.answer(ans)?;
    }
    report_selection(&h, &s);
    if let Some(out) = &a.out {
        write_out(Some(out), &export_log_jsonl(&h, s.state()))?;
    }
    Ok(())
}

fn bench(a: BenchArgs) -> Result<()> {
    let h = Arc::new(load_hierarchy(&a.hierarchy)?);
    let objects = load_targets(&h, &a.targets)?;
    let algorithms = a
        .algo
        .iter()
        .map(|s| s.parse::<Algorithm>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(anyhow::Error::msg)?;
    let noise = match a.noise_frac {
        Some(frac) => Some(NoisyOracleConfig::new(frac, a.noise_p, a.seed).map_err(anyhow::Error::msg)?),
        None => None,
    };
    let cfg = BenchConfig {
        algorithms,
        budgets: a.budget,
        ks: a.k,
        noise,
        timing: !a.no_timing,
    };
    let rows = run_experiment(&h, &objects, &cfg)?;
    let text = match a.format {
        OutputFormat::Csv => to_csv(&rows),
        OutputFormat::Json => {
            let summary = ExperimentReport::from_rows(&rows);
            let doc = serde_json::json!({ "summary": summary.rows, "rows": rows });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    write_out(a.out.as_deref(), &text)
}

fn verify(a: VerifyArgs) -> Result<()> {
    let h = match &a.hierarchy {
        Some(p) => load_hierarchy(p)?,
        None => toy10(),
    };
    let report = verify_fixtures(&h, &FixtureOptions { prior: a.prior })?;
    print!("{report}");
    if !report.passed() {
        bail!("{} cell(s) differ", report.failures().count());
    }
    println!("all cells match");
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let store = match &a.data {
        Some(dir) => Store::open(dir)?,
        None => Store::in_memory(),
    };
    for path in &a.hierarchy {
        let created = store.add_hierarchy(load_hierarchy(path)?)?;
        println!("{} -> {}", path.display(), created.hierarchy_id);
    }
    println!("listening on http://{}", a.addr);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(kbm_igs_service::serve(a.addr, Arc::new(store)))?;
    Ok(())
}
