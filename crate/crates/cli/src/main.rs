//! `cesna`: overlapping community detection on attributed networks.
//!
//! Exit codes: 0 success, 2 usage or input error, 1 internal error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use cesna::experiments::{robustness, scaling};
use cesna::io::{
    assemble_graph, format_communities, format_weights, parse_attributes, parse_cover, parse_edges,
    AttributeList, Manifest,
};
use cesna::selection::choose_num_communities;
use cesna::synthetic::{
    bernoulli_attributes, forest_fire, planted_instance, ForestFireParams, PlantedSpec,
};
use cesna::{
    match_score, threshold_memberships, AttributedGraph, FitConfig, SimilarityKind, Solver,
};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(
    name = "cesna",
    version,
    about = "Overlapping communities from edges and node attributes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model and write communities, weights and a run manifest.
    Detect(DetectArgs),
    /// Pick the number of communities by held-out likelihood.
    SelectC(SelectArgs),
    /// Score a detected cover against ground truth.
    Eval(EvalArgs),
    /// Generate synthetic inputs.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Edge-removal sweep on planted instances (TSV on stdout).
    Robustness(RobustnessArgs),
    /// Per-iteration timings on Forest Fire graphs (TSV on stdout).
    Scaling(ScalingArgs),
}

#[derive(Args, Clone)]
struct FitArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Membership threshold; defaults to sqrt(-ln(1 - 1/N)).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            alpha: self.alpha,
            lambda: self.lambda,
            max_outer_iters: self.max_iters,
            rel_improvement_tol: self.tol,
            rng_seed: self.seed,
            num_workers: self.threads,
            delta: self.delta,
            ..FitConfig::default()
        }
    }
}

#[derive(Args)]
struct InputArgs {
    #[arg(short = 'i', long)]
    edges: PathBuf,
    #[arg(short = 'a', long)]
    attrs: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Community count, or "auto" to select among --candidates.
    #[arg(short = 'c', long)]
    communities: String,
    /// Comma-separated candidates for -c auto [default: 2,4,8,16,32].
    #[arg(long)]
    candidates: Option<String>,
    #[command(flatten)]
    fit: FitArgs,
    /// Output prefix.
    #[arg(short = 'o', long, default_value = "cesna")]
    out: String,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "2,4,8,16,32")]
    candidates: String,
    #[command(flatten)]
    fit: FitArgs,
    /// Also write a run manifest here.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    detected: PathBuf,
    #[arg(long, default_value = "f1")]
    metric: String,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Forest Fire graph, optionally with Bernoulli attributes.
    ForestFire(ForestFireArgs),
    /// Instance drawn from the model with planted communities.
    Planted(PlantedArgs),
}

#[derive(Args)]
struct ForestFireArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.36)]
    p_forward: f64,
    #[arg(long, default_value_t = 0.32)]
    p_backward: f64,
    /// Number of Bernoulli attributes (none if 0).
    #[arg(long, default_value_t = 0)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    attr_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long, default_value = "forest-fire")]
    out: String,
}

#[derive(Args, Clone)]
struct PlantedParams {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    c: usize,
    #[arg(long, default_value_t = 40)]
    k: usize,
    #[arg(long, default_value_t = 0.5)]
    membership_prob: f64,
    #[arg(long, default_value_t = 0.9)]
    strength: f64,
    #[arg(long, default_value_t = 6.0)]
    weight_scale: f64,
    #[arg(long, default_value_t = -2.5, allow_hyphen_values = true)]
    bias: f64,
}

impl PlantedParams {
    fn spec(&self, seed: u64) -> PlantedSpec {
        PlantedSpec {
            n: self.n,
            c: self.c,
            k: self.k,
            membership_prob: self.membership_prob,
            strength: self.strength,
            weight_scale: self.weight_scale,
            bias: self.bias,
            seed,
        }
    }
}

#[derive(Args)]
struct PlantedArgs {
    #[command(flatten)]
    params: PlantedParams,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long, default_value = "planted")]
    out: String,
}

#[derive(Args)]
struct RobustnessArgs {
    #[command(flatten)]
    params: PlantedParams,
    #[arg(long, default_value = "0,0.2,0.4,0.6")]
    gammas: String,
    #[arg(long, default_value = "0,0.5")]
    alphas: String,
    /// Number of instance seeds (0..seeds).
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[command(flatten)]
    fit: FitArgs,
    /// Instances processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, default_value = "10000,30000,100000")]
    sizes: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(short = 'c', long, default_value_t = 10)]
    communities: usize,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Bad input or flags; reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    let items: Vec<T> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| usage(format!("bad {what} value '{t}'")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(usage(format!("empty {what} list")));
    }
    Ok(items)
}

fn write_file(path: &str, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {path}"))
}

fn push_config(m: &mut Manifest, cfg: &FitConfig) {
    m.push("alpha", cfg.alpha)
        .push("lambda", cfg.lambda)
        .push(
            "delta",
            cfg.delta.map_or("auto".to_string(), |d| d.to_string()),
        )
        .push("max_iters", cfg.max_outer_iters)
        .push("tol", cfg.rel_improvement_tol)
        .push("threads", cfg.num_workers)
        .push("seed", cfg.rng_seed)
        .push("min_dot_guard", cfg.min_dot_guard)
        .push("max_f", cfg.max_f);
}

/// Loads the graph and records input digests.
fn load(input: &InputArgs, m: &mut Manifest) -> Result<AttributedGraph> {
    let edge_text = read_input(&input.edges)?;
    m.push("edges_file", input.edges.display())
        .push("edges_sha256", sha256_hex(edge_text.as_bytes()));
    let edges = parse_edges(&edge_text).with_context(|| format!("in {}", input.edges.display()))?;
    let attrs = match &input.attrs {
        Some(path) => {
            let text = read_input(path)?;
            m.push("attrs_file", path.display())
                .push("attrs_sha256", sha256_hex(text.as_bytes()));
            parse_attributes(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => AttributeList::default(),
    };
    let (g, report) = assemble_graph(&edges, &attrs)?;
    if !report.is_clean() {
        warn!(
            "dropped {} self-loops, {} duplicate edges, {} duplicate attribute entries",
            report.self_loops, report.duplicate_edges, report.duplicate_attrs
        );
    }
    m.push("nodes", g.num_nodes())
        .push("edges", g.num_edges())
        .push("attrs", g.num_attrs());
    Ok(g)
}

fn detect(args: &DetectArgs) -> Result<()> {
    let mut m = Manifest::new();
    m.push("command", "detect");
    let cfg = args.fit.config();
    cfg.validate()?;
    let auto = args.communities.eq_ignore_ascii_case("auto");
    if args.candidates.is_some() && !auto {
        return Err(usage("--candidates requires --communities auto"));
    }
    let fixed = if auto {
        None
    } else {
        let c: usize = args
            .communities
            .parse()
            .map_err(|_| usage("--communities must be a count or 'auto'"))?;
        if c == 0 {
            return Err(usage("--communities must be at least 1"));
        }
        Some(c)
    };
    push_config(&mut m, &cfg);

    let t = Instant::now();
    let g = load(&args.input, &mut m)?;
    m.push("time_load_s", format!("{:.6}", t.elapsed().as_secs_f64()));

    let c = match fixed {
        Some(c) => c,
        None => {
            let candidates: Vec<usize> = parse_list(
                args.candidates.as_deref().unwrap_or("2,4,8,16,32"),
                "candidate",
            )?;
            let t = Instant::now();
            let sel = choose_num_communities(&g, &candidates, &cfg)?;
            m.push("time_select_s", format!("{:.6}", t.elapsed().as_secs_f64()));
            let scores: Vec<String> = sel.scores.iter().map(|(c, s)| format!("{c}:{s}")).collect();
            m.push("candidates", scores.join(","));
            sel.best
        }
    };
    m.push("communities", c);

    let t = Instant::now();
    let result = Solver::<f64>::new(&g, c, &cfg, None)?.run();
    m.push("time_fit_s", format!("{:.6}", t.elapsed().as_secs_f64()));
    let obj = result.final_objective();
    m.push("iterations", result.iterations_run)
        .push("converged", result.converged)
        .push("objective", obj.scaled_total)
        .push("log_lik_graph", obj.l_graph)
        .push("log_lik_attr", obj.l_attr)
        .push("l1_penalty", obj.l1_penalty)
        .push(
            "attribute_likelihood",
            if cfg.alpha == 0.0 {
                "excluded"
            } else {
                "included"
            },
        );
    if !result.converged {
        warn!(
            "no convergence within {} iterations; writing the last iterate",
            cfg.max_outer_iters
        );
    }

    let cover = threshold_memberships(&result.f, cfg.delta)?;
    m.push("detected", cover.len());
    let (cpath, wpath, mpath) = (
        format!("{}.communities.txt", args.out),
        format!("{}.weights.txt", args.out),
        format!("{}.manifest.txt", args.out),
    );
    let t = Instant::now();
    write_file(&cpath, &format_communities(&cover))?;
    write_file(&wpath, &format_weights(&result.w))?;
    m.push("time_write_s", format!("{:.6}", t.elapsed().as_secs_f64()));
    m.push("communities_file", &cpath)
        .push("weights_file", &wpath);
    write_file(&mpath, &m.to_string())?;
    info!("wrote {cpath}, {wpath}, {mpath}");
    Ok(())
}

fn select_c(args: &SelectArgs) -> Result<()> {
    let mut m = Manifest::new();
    m.push("command", "select-c");
    let cfg = args.fit.config();
    cfg.validate()?;
    push_config(&mut m, &cfg);
    let candidates: Vec<usize> = parse_list(&args.candidates, "candidate")?;
    let g = load(&args.input, &mut m)?;
    let t = Instant::now();
    let sel = choose_num_communities(&g, &candidates, &cfg)?;
    m.push("time_select_s", format!("{:.6}", t.elapsed().as_secs_f64()))
        .push("best", sel.best);
    let mut out = String::from("candidate\theldout_loglik\n");
    for (c, s) in &sel.scores {
        out.push_str(&format!("{c}\t{s:.6}\n"));
    }
    out.push_str(&format!("best\t{}\n", sel.best));
    print!("{out}");
    if let Some(path) = &args.manifest {
        fs::write(path, m.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn eval(args: &EvalArgs) -> Result<()> {
    let kind: SimilarityKind = args.metric.parse()?;
    let mut m = Manifest::new();
    m.push("command", "eval").push("metric", kind);
    let mut load_cover = |path: &Path, key: &str| -> Result<cesna::CommunityCover> {
        let text = read_input(path)?;
        m.push(&format!("{key}_file"), path.display())
            .push(&format!("{key}_sha256"), sha256_hex(text.as_bytes()));
        let cover = parse_cover(&text).with_context(|| format!("in {}", path.display()))?;
        if cover.is_empty() {
            return Err(usage(format!("{} holds no communities", path.display())));
        }
        Ok(cover)
    };
    let truth = load_cover(&args.truth, "truth")?;
    let detected = load_cover(&args.detected, "detected")?;
    let score = match_score(&truth, &detected, kind)?;
    println!("{score:.6}");
    m.push("score", score);
    if let Some(path) = &args.manifest {
        fs::write(path, m.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn edge_text(g: &AttributedGraph) -> String {
    g.edges().map(|(u, v)| format!("{u}\t{v}\n")).collect()
}

fn attr_text(g: &AttributedGraph) -> String {
    let mut s = format!("#{}\t{}\n", g.num_nodes(), g.num_attrs());
    for (u, k) in g.attr_pairs() {
        let _ = writeln!(s, "{u}\t{k}");
    }
    s
}

fn gen(cmd: &GenCommand) -> Result<()> {
    let mut m = Manifest::new();
    let t = Instant::now();
    let prefix = match cmd {
        GenCommand::ForestFire(a) => {
            m.push("command", "gen forest-fire")
                .push("n", a.n)
                .push("p_forward", a.p_forward)
                .push("p_backward", a.p_backward)
                .push("seed", a.seed);
            let params = ForestFireParams {
                n: a.n,
                p_forward: a.p_forward,
                p_backward: a.p_backward,
                seed: a.seed,
            };
            let mut g = forest_fire(&params)?;
            write_file(&format!("{}.edges.txt", a.out), &edge_text(&g))?;
            if a.k > 0 {
                g = bernoulli_attributes(&g, a.k, a.attr_prob, a.seed.wrapping_add(1))?;
                m.push("k", a.k).push("attr_prob", a.attr_prob);
                write_file(&format!("{}.attrs.txt", a.out), &attr_text(&g))?;
            }
            m.push("edges", g.num_edges());
            &a.out
        }
        GenCommand::Planted(a) => {
            let spec = a.params.spec(a.seed);
            m.push("command", "gen planted")
                .push("n", spec.n)
                .push("c", spec.c)
                .push("k", spec.k)
                .push("membership_prob", spec.membership_prob)
                .push("strength", spec.strength)
                .push("weight_scale", spec.weight_scale)
                .push("bias", spec.bias)
                .push("seed", spec.seed);
            let inst = planted_instance::<f64>(&spec)?;
            write_file(&format!("{}.edges.txt", a.out), &edge_text(&inst.graph))?;
            write_file(&format!("{}.attrs.txt", a.out), &attr_text(&inst.graph))?;
            write_file(
                &format!("{}.truth.txt", a.out),
                &format_communities(&inst.truth),
            )?;
            m.push("edges", inst.graph.num_edges())
                .push("truth_communities", inst.truth.len());
            &a.out
        }
    };
    m.push("time_gen_s", format!("{:.6}", t.elapsed().as_secs_f64()));
    write_file(&format!("{prefix}.manifest.txt"), &m.to_string())
}

fn robustness_cmd(args: &RobustnessArgs) -> Result<()> {
    let gammas: Vec<f64> = parse_list(&args.gammas, "gamma")?;
    let alphas: Vec<f64> = parse_list(&args.alphas, "alpha")?;
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let cfg = args.fit.config();
    cfg.validate()?;
    let seeds: Vec<u64> = (0..args.seeds).collect();
    let t = Instant::now();
    let table = robustness(
        &args.params.spec(0),
        &gammas,
        &alphas,
        &seeds,
        &cfg,
        args.jobs,
    )?;
    print!("{}", table.to_tsv());
    if let Some(path) = &args.manifest {
        let mut m = Manifest::new();
        m.push("command", "robustness")
            .push("gammas", &args.gammas)
            .push("alphas", &args.alphas)
            .push("seeds", args.seeds);
        push_config(&mut m, &cfg);
        m.push("time_total_s", format!("{:.6}", t.elapsed().as_secs_f64()));
        fs::write(path, m.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn scaling_cmd(args: &ScalingArgs) -> Result<()> {
    let sizes: Vec<usize> = parse_list(&args.sizes, "size")?;
    let cfg = args.fit.config();
    cfg.validate()?;
    let t = Instant::now();
    let points = scaling(
        &sizes,
        args.k,
        args.communities,
        args.iters,
        &cfg,
        args.fit.seed,
    )?;
    println!("nodes\tedges\tattr_ones\twork\tsecs_per_iter");
    for p in &points {
        println!(
            "{}\t{}\t{}\t{}\t{:.6}",
            p.nodes, p.edges, p.attr_ones, p.work, p.secs_per_iter
        );
    }
    if let Some(path) = &args.manifest {
        let mut m = Manifest::new();
        m.push("command", "scaling")
            .push("sizes", &args.sizes)
            .push("k", args.k)
            .push("communities", args.communities);
        push_config(&mut m, &cfg);
        m.push("time_total_s", format!("{:.6}", t.elapsed().as_secs_f64()));
        fs::write(path, m.to_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Detect(a) => detect(a),
        Command::SelectC(a) => select_c(a),
        Command::Eval(a) => eval(a),
        Command::Gen(c) => gen(c),
        Command::Robustness(a) => robustness_cmd(a),
        Command::Scaling(a) => scaling_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // anything the library rejects came from the inputs or flags
            let bad_input =
                e.downcast_ref::<Usage>().is_some() || e.downcast_ref::<cesna::Error>().is_some();
            ExitCode::from(if bad_input { 2 } else { 1 })
        }
    }
}
