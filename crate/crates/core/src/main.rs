use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nfr::bench::{
    self, bundled_scenarios, curve_csv, report_text, run_sweep, scenario_profile,
    synthetic_relevance, tradeoff_curve, write_atomic, SweepPlan, SweepResult,
};
use nfr::catalog::{load_relevance, synth_relevance, RelevanceMatrix, ScenarioConfig};
use nfr::demand::{
    session_cost, simulate_sessions, simulate_traces, stationary_demand, trace_csv, ChoiceMode,
    RecommendationPolicy, SimulationConfig,
};
use nfr::lp::{solve, write_mps, MpsFormat, SolveOptions};
use nfr::optimizer::{
    build_diverse_lp, build_fair_diverse_lp, build_fair_lp, build_nfr_lp, make_cuts, recover,
    validate_solution, CutMode, FairnessKind, FairnessSpec,
};
use nfr::{Error, Result};

#[derive(Parser)]
#[command(name = "nfr", version, about = "Network-friendly recommendation programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a relevance CSV (dense or `i,j,u` triplets) and write it dense.
    Ingest {
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Baseline recommender profile: `i,q_max,p_bs` and summary.
    Bsr {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Solve one program and validate the recovered policy.
    Optimize(OptimizeArgs),
    /// Monte-Carlo sessions under the baseline policy, compared with the
    /// closed-form demand.
    Simulate {
        #[command(flatten)]
        instance: Instance,
        #[arg(long, default_value_t = 10_000)]
        sessions: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Materialize recommendation lists instead of sampling marginals.
        #[arg(long)]
        listed: bool,
        /// Write per-step traces of the first 100 sessions here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run scenarios over lists of `b` and fairness bounds.
    Sweep(SweepArgs),
    /// Turn a sweep CSV into report tables and trade-off curve data.
    Report {
        input: PathBuf,
        #[arg(long)]
        table: Option<PathBuf>,
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Instance {
    /// Scenario file with `key=value` lines.
    #[arg(long)]
    scenario: PathBuf,
    /// Relevance CSV; a synthetic matrix from the scenario seed otherwise.
    #[arg(long)]
    relevance: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Density of the synthetic relevance matrix.
    #[arg(long)]
    density: Option<f64>,
}

impl Instance {
    fn load(&self) -> Result<(ScenarioConfig, RelevanceMatrix)> {
        let cfg = ScenarioConfig::load(&self.scenario)?;
        let u = relevance_for(&cfg, self.relevance.as_deref(), self.threshold, self.density)?;
        Ok((cfg, u))
    }
}

fn relevance_for(
    cfg: &ScenarioConfig,
    path: Option<&Path>,
    threshold: f64,
    density: Option<f64>,
) -> Result<RelevanceMatrix> {
    match (path, density) {
        (Some(p), _) => load_relevance(p, threshold),
        (None, Some(d)) => synth_relevance(cfg.k, d, cfg.seed),
        (None, None) => synthetic_relevance(cfg),
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    instance: Instance,
    /// Entropy floor as a fraction of the baseline entropy; 0 solves plain NFR.
    #[arg(long)]
    b: Option<f64>,
    /// `none`, `max`, `tv` or `kl`.
    #[arg(long)]
    fairness: Option<String>,
    #[arg(long)]
    cf: Option<f64>,
    /// Number of entropy cuts.
    #[arg(long)]
    cuts: Option<usize>,
    /// `tangent`, `tangent_exponential[:step]` or `secant`.
    #[arg(long)]
    cut_mode: Option<CutMode>,
    /// Also write the program in MPS format.
    #[arg(long)]
    mps_out: Option<PathBuf>,
    /// Use free MPS instead of fixed columns.
    #[arg(long)]
    free_mps: bool,
    /// Write the solution tables here.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario files.
    scenarios: Vec<PathBuf>,
    /// Run the bundled synthetic scenarios as well.
    #[arg(long)]
    bundled: bool,
    #[arg(long)]
    relevance: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    b_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    cf_list: Vec<f64>,
    /// Fairness kinds to pair with `--cf-list`.
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<FairnessKind>,
    /// Combine every `b` with every fairness bound.
    #[arg(long)]
    fair_diverse: bool,
    #[arg(long, short)]
    output: PathBuf,
    /// Also write a copy with solve times.
    #[arg(long)]
    timings: Option<PathBuf>,
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let (mut cfg, u) = args.instance.load()?;
    if let Some(b) = args.b {
        cfg.b = b;
    }
    if let Some(f) = &args.fairness {
        cfg.fairness = match f.as_str() {
            "none" => None,
            k => Some(k.parse().map_err(|e| Error::Config(format!("{e}")))?),
        };
    }
    if let Some(cf) = args.cf {
        cfg.cf = cf;
    }
    if let Some(m) = args.cuts {
        cfg.m_cuts = m;
    }
    if let Some(mode) = args.cut_mode {
        cfg.cut_mode = mode;
    }
    cfg.validate()?;
    let profile = scenario_profile(&cfg, &u)?;
    let cuts = (cfg.b > 0.0)
        .then(|| make_cuts(cfg.cut_mode, cfg.m_cuts))
        .transpose()?;
    let fair = cfg.fairness.map(|k| FairnessSpec::new(k, cfg.cf)).transpose()?;
    let lp = match (&cuts, &fair) {
        (None, None) => build_nfr_lp(&profile, &cfg)?,
        (Some(c), None) => build_diverse_lp(&profile, &cfg, c)?,
        (None, Some(f)) => build_fair_lp(&profile, &cfg, f)?,
        (Some(c), Some(f)) => build_fair_diverse_lp(&profile, &cfg, c, f)?,
    };
    if let Some(path) = &args.mps_out {
        let format = if args.free_mps {
            MpsFormat::Free
        } else {
            MpsFormat::Fixed
        };
        write_mps(&lp, path, format)?;
    }
    let report = solve(&lp, &SolveOptions::default());
    eprintln!(
        "{} variables, {} rows: {} after {} iterations",
        lp.num_vars(),
        lp.num_constraints(),
        report.status,
        report.iterations
    );
    let sol = recover(&lp, &report, &profile, cuts.as_ref())?;
    let check = validate_solution(&sol, &profile, &cfg, fair.as_ref())?;
    emit(args.output.as_deref(), &sol.to_csv())?;
    eprintln!(
        "cost {:.6} ({:.1}% of baseline), entropy {:.6} ({:.1}% of baseline)",
        sol.cost,
        bench::pct(sol.cost, profile.cost_bs),
        sol.realized_entropy,
        bench::pct(sol.realized_entropy, profile.entropy_bs)
    );
    if let Some(gap) = sol.entropy_gap {
        eprintln!("entropy gap {gap:.3e}");
    }
    eprintln!(
        "fairness: max {:.6}, tv {:.6}, kl {:.6}",
        check.fairness.max, check.fairness.tv, check.fairness.kl
    );
    if !sol.fallback_rows.is_empty() {
        eprintln!("rows using baseline recommendations: {:?}", sol.fallback_rows);
    }
    for v in &check.violations {
        eprintln!("validation: {v}");
    }
    Ok(())
}

fn simulate(
    instance: &Instance,
    sessions: usize,
    seed: Option<u64>,
    listed: bool,
    trace: Option<&Path>,
) -> Result<()> {
    let (cfg, u) = instance.load()?;
    let profile = scenario_profile(&cfg, &u)?;
    let policy: &RecommendationPolicy = &profile.policy;
    let sim = SimulationConfig {
        alpha: cfg.alpha,
        length: cfg.l,
        sessions,
        seed: seed.unwrap_or(cfg.seed),
        mode: if listed {
            ChoiceMode::Listed
        } else {
            ChoiceMode::Marginal
        },
    };
    let res = simulate_sessions(&profile.p0, policy, &profile.costs, &sim)?;
    let closed = stationary_demand(&profile.p0, policy, cfg.alpha)?;
    println!("steps,{}", res.steps);
    println!("tv_distance,{}", res.demand.total_variation(&closed));
    println!("mean_cost,{}", res.mean_cost);
    println!("closed_form_cost,{}", profile.cost_bs);
    println!(
        "session_cost,{}",
        session_cost(&profile.p0, policy, cfg.alpha, &profile.costs)?
    );
    if let Some(path) = trace {
        let few = SimulationConfig {
            sessions: sessions.min(100),
            ..sim
        };
        let traces = simulate_traces(&profile.p0, policy, &few)?;
        write_atomic(path, &trace_csv(&traces, &profile.costs))?;
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut named: Vec<(String, ScenarioConfig)> = Vec::new();
    if args.bundled {
        named.extend(bundled_scenarios()?);
    }
    for path in &args.scenarios {
        let name = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        named.push((name, ScenarioConfig::load(path)?));
    }
    if named.is_empty() {
        return Err(Error::Config("no scenarios given".into()));
    }
    let scenarios = named
        .into_iter()
        .map(|(name, cfg)| {
            let u = relevance_for(&cfg, args.relevance.as_deref(), args.threshold, args.density)?;
            Ok((name, cfg, u))
        })
        .collect::<Result<Vec<_>>>()?;
    let plan = SweepPlan {
        b_list: args.b_list.clone().unwrap_or_else(bench::default_b_list),
        cf_list: args.cf_list.clone(),
        kinds: args.kinds.clone(),
        fair_diverse: args.fair_diverse,
        ..SweepPlan::default()
    };
    let result = run_sweep(&scenarios, &plan)?;
    write_atomic(&args.output, &result.to_csv(false))?;
    if let Some(t) = &args.timings {
        write_atomic(t, &result.to_csv(true))?;
    }
    let failed = result
        .rows
        .iter()
        .filter(|r| !r.is_optimal() || !r.valid)
        .count();
    eprintln!("{} rows, {failed} not optimal or not valid", result.rows.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            input,
            threshold,
            output,
        } => {
            let u = load_relevance(&input, threshold)?;
            eprintln!("K={}, {} relevant pairs", u.k(), u.nonzeros());
            emit(output.as_deref(), &u.to_dense_csv())
        }
        Command::Bsr { instance, output } => {
            let (cfg, u) = instance.load()?;
            let profile = scenario_profile(&cfg, &u)?;
            emit(output.as_deref(), &profile.to_csv())
        }
        Command::Optimize(args) => optimize(&args),
        Command::Simulate {
            instance,
            sessions,
            seed,
            listed,
            trace,
        } => simulate(&instance, sessions, seed, listed, trace.as_deref()),
        Command::Sweep(args) => sweep(&args),
        Command::Report {
            input,
            table,
            curve,
        } => {
            let result = SweepResult::from_csv(&read_text(&input)?)?;
            emit(table.as_deref(), &report_text(&result))?;
            if let Some(path) = curve {
                write_atomic(path, &curve_csv(&tradeoff_curve(&result)))?;
            }
            Ok(())
        }
    }
}

/// 2: no optimal solution, 3: bad input or configuration, 4: I/O.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotOptimal { .. } => 2,
        Error::Io { .. } => 4,
        Error::Numerical(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
