//! Scenario sweeps, trade-off curves and report tables.
//!
//! Every sweep row carries its cost and entropy both raw and as a
//! percentage of the baseline's. When the baseline value is 0 the
//! percentage is reported as 100.

mod report;

use std::fmt;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use report::{curve_csv, report_text, tradeoff_curve, CurvePoint};

use crate::baseline::{profile_with_cache, BaselineProfile};
use crate::catalog::{synth_relevance, zipf_direct_demand, RelevanceMatrix, ScenarioConfig};
use crate::error::{Error, Result};
use crate::lp::{solve, SolveOptions};
use crate::optimizer::{
    build_diverse_lp, build_fair_diverse_lp, build_fair_lp, build_nfr_lp, make_cuts, recover,
    validate_solution, CutFamily, FairnessKind, FairnessSpec,
};

/// Share of nonzero relevance scores in the bundled synthetic catalogs.
pub const SYNTH_DENSITY: f64 = 0.3;

/// The bundled synthetic scenarios, by file stem.
pub const BUNDLED: [(&str, &str); 4] = [
    ("k30-a08-pop1", include_str!("../../scenarios/k30-a08-pop1.scn")),
    ("k30-a05-pop0", include_str!("../../scenarios/k30-a05-pop0.scn")),
    ("k10-a08-c2", include_str!("../../scenarios/k10-a08-c2.scn")),
    ("k30-a09-n3", include_str!("../../scenarios/k30-a09-n3.scn")),
];

pub fn bundled_scenarios() -> Result<Vec<(String, ScenarioConfig)>> {
    BUNDLED
        .iter()
        .map(|(name, text)| Ok((name.to_string(), ScenarioConfig::parse(text)?)))
        .collect()
}

/// The synthetic relevance matrix a scenario's seed stands for.
pub fn synthetic_relevance(cfg: &ScenarioConfig) -> Result<RelevanceMatrix> {
    synth_relevance(cfg.k, SYNTH_DENSITY, cfg.seed)
}

/// `0.1, 0.2, ..., 1.0`.
pub fn default_b_list() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    Bsr,
    Nfr,
    Diverse { b: f64 },
    Fair { kind: FairnessKind, cf: f64 },
    FairDiverse { b: f64, kind: FairnessKind, cf: f64 },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bsr => "BSR",
            Algorithm::Nfr => "NFR",
            Algorithm::Diverse { .. } => "Diverse",
            Algorithm::Fair { .. } => "Fair",
            Algorithm::FairDiverse { .. } => "FairDiverse",
        }
    }

    pub fn b(&self) -> Option<f64> {
        match *self {
            Algorithm::Diverse { b } | Algorithm::FairDiverse { b, .. } => Some(b),
            _ => None,
        }
    }

    pub fn fairness(&self) -> Option<(FairnessKind, f64)> {
        match *self {
            Algorithm::Fair { kind, cf } | Algorithm::FairDiverse { kind, cf, .. } => {
                Some((kind, cf))
            }
            _ => None,
        }
    }

    fn from_parts(name: &str, b: Option<f64>, fair: Option<(FairnessKind, f64)>) -> Option<Self> {
        Some(match (name, b, fair) {
            ("BSR", None, None) => Algorithm::Bsr,
            ("NFR", None, None) => Algorithm::Nfr,
            ("Diverse", Some(b), None) => Algorithm::Diverse { b },
            ("Fair", None, Some((kind, cf))) => Algorithm::Fair { kind, cf },
            ("FairDiverse", Some(b), Some((kind, cf))) => Algorithm::FairDiverse { b, kind, cf },
            _ => return None,
        })
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Bsr | Algorithm::Nfr => f.write_str(self.name()),
            Algorithm::Diverse { b } => write!(f, "Diverse(b={b})"),
            Algorithm::Fair { kind, cf } => write!(f, "Fair({kind},cf={cf})"),
            Algorithm::FairDiverse { b, kind, cf } => {
                write!(f, "FairDiverse(b={b},{kind},cf={cf})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: String,
    pub algorithm: Algorithm,
    /// Solver status; `optimal` for the baseline.
    pub status: String,
    pub cost: Option<f64>,
    pub cost_pct: Option<f64>,
    pub entropy: Option<f64>,
    pub entropy_pct: Option<f64>,
    pub entropy_gap: Option<f64>,
    pub iterations: usize,
    /// Whether the recovered policy passed validation.
    pub valid: bool,
    /// Wall-clock seconds; not part of the CSV unless asked for.
    pub solve_time: f64,
}

impl SweepRow {
    pub fn is_optimal(&self) -> bool {
        self.status == "optimal"
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// `100 · value / base`, or 100 when the base is 0.
pub fn pct(value: f64, base: f64) -> f64 {
    if base == 0.0 {
        100.0
    } else {
        100.0 * value / base
    }
}

const CSV_HEADER: [&str; 13] = [
    "scenario",
    "algorithm",
    "b",
    "fairness",
    "cf",
    "status",
    "cost",
    "cost_pct",
    "entropy",
    "entropy_pct",
    "entropy_gap",
    "iterations",
    "valid",
];

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

impl SweepResult {
    pub fn scenarios(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.scenario.as_str()) {
                out.push(&r.scenario);
            }
        }
        out
    }

    pub fn rows_for<'a>(&'a self, scenario: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.scenario == scenario)
    }

    /// One line per row. Timings are appended only when `timings` is set,
    /// so that default output is reproducible byte for byte.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        if timings {
            header.push("solve_time");
        }
        w.write_record(&header).expect("in-memory write");
        for r in &self.rows {
            let fair = r.algorithm.fairness();
            let mut rec = vec![
                r.scenario.clone(),
                r.algorithm.name().to_string(),
                opt(r.algorithm.b()),
                fair.map_or(String::new(), |(k, _)| k.to_string()),
                opt(fair.map(|(_, cf)| cf)),
                r.status.clone(),
                opt(r.cost),
                opt(r.cost_pct),
                opt(r.entropy),
                opt(r.entropy_pct),
                opt(r.entropy_gap),
                r.iterations.to_string(),
                r.valid.to_string(),
            ];
            if timings {
                rec.push(r.solve_time.to_string());
            }
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let headers = rd
            .headers()
            .map_err(|e| Error::parse(1, e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::parse(1, format!("missing column {name:?}")))
        };
        let idx: Vec<usize> = CSV_HEADER.iter().map(|h| col(h)).collect::<Result<_>>()?;
        let time_col = headers.iter().position(|h| h == "solve_time");
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| Error::parse(0, e.to_string()))?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize| rec.get(idx[i]).unwrap_or("");
            let num = |i: usize| -> Result<Option<f64>> {
                let v = field(i);
                if v.is_empty() {
                    return Ok(None);
                }
                v.parse()
                    .map(Some)
                    .map_err(|_| Error::parse(line, format!("bad {} value {v:?}", CSV_HEADER[i])))
            };
            let fair = match field(3) {
                "" => None,
                k => Some((
                    k.parse::<FairnessKind>().map_err(|e| Error::parse(line, e.to_string()))?,
                    num(4)?.ok_or_else(|| Error::parse(line, "fairness without cf"))?,
                )),
            };
            let algorithm = Algorithm::from_parts(field(1), num(2)?, fair)
                .ok_or_else(|| Error::parse(line, format!("bad algorithm {:?}", field(1))))?;
            rows.push(SweepRow {
                scenario: field(0).to_string(),
                algorithm,
                status: field(5).to_string(),
                cost: num(6)?,
                cost_pct: num(7)?,
                entropy: num(8)?,
                entropy_pct: num(9)?,
                entropy_gap: num(10)?,
                iterations: field(11)
                    .parse()
                    .map_err(|_| Error::parse(line, "bad iterations"))?,
                valid: field(12) == "true",
                solve_time: time_col
                    .and_then(|c| rec.get(c))
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0.0),
            });
        }
        Ok(SweepResult { rows })
    }
}

/// What to run on top of the baseline and plain NFR.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    pub b_list: Vec<f64>,
    pub cf_list: Vec<f64>,
    pub kinds: Vec<FairnessKind>,
    /// Also combine every `b` with every fairness bound.
    pub fair_diverse: bool,
    pub solve_options: SolveOptions,
}

impl Default for SweepPlan {
    fn default() -> Self {
        SweepPlan {
            b_list: default_b_list(),
            cf_list: Vec::new(),
            kinds: Vec::new(),
            fair_diverse: false,
            solve_options: SolveOptions::default(),
        }
    }
}

impl SweepPlan {
    fn algorithms(&self) -> Vec<Algorithm> {
        let mut out = vec![Algorithm::Nfr];
        out.extend(self.b_list.iter().map(|&b| Algorithm::Diverse { b }));
        for &kind in &self.kinds {
            for &cf in &self.cf_list {
                out.push(Algorithm::Fair { kind, cf });
            }
        }
        if self.fair_diverse {
            for &kind in &self.kinds {
                for &cf in &self.cf_list {
                    for &b in &self.b_list {
                        out.push(Algorithm::FairDiverse { b, kind, cf });
                    }
                }
            }
        }
        out
    }
}

/// Baseline profile for a scenario: Zipf direct demand and a binary cache
/// holding the `C` items the baseline requests most.
pub fn scenario_profile(cfg: &ScenarioConfig, u: &RelevanceMatrix) -> Result<BaselineProfile> {
    cfg.validate()?;
    if u.k() != cfg.k {
        return Err(Error::Config(format!(
            "relevance matrix has K={}, scenario has K={}",
            u.k(),
            cfg.k
        )));
    }
    let p0 = zipf_direct_demand(cfg.k, cfg.pop)?;
    profile_with_cache(u, cfg.n, &p0, cfg.alpha, cfg.c)
}

struct Context<'a> {
    cfg: &'a ScenarioConfig,
    profile: &'a BaselineProfile,
    cuts: &'a CutFamily,
    label: &'a str,
    opts: &'a SolveOptions,
}

impl Context<'_> {
    fn run(&self, alg: Algorithm) -> Result<SweepRow> {
        let prof = self.profile;
        let mut cfg = self.cfg.clone();
        let fair = alg
            .fairness()
            .map(|(kind, cf)| FairnessSpec::new(kind, cf))
            .transpose()?;
        if let Some(b) = alg.b() {
            cfg.b = b;
        }
        let cuts = alg.b().map(|_| self.cuts);
        let lp = match (cuts, fair.as_ref()) {
            (None, None) => build_nfr_lp(prof, &cfg)?,
            (Some(c), None) => build_diverse_lp(prof, &cfg, c)?,
            (None, Some(f)) => build_fair_lp(prof, &cfg, f)?,
            (Some(c), Some(f)) => build_fair_diverse_lp(prof, &cfg, c, f)?,
        };
        let start = Instant::now();
        let report = solve(&lp, self.opts);
        let solve_time = start.elapsed().as_secs_f64();
        let mut row = SweepRow {
            scenario: self.label.to_string(),
            algorithm: alg,
            status: report.status.to_string(),
            cost: None,
            cost_pct: None,
            entropy: None,
            entropy_pct: None,
            entropy_gap: None,
            iterations: report.iterations,
            valid: false,
            solve_time,
        };
        if !report.is_optimal() {
            return Ok(row);
        }
        let sol = recover(&lp, &report, prof, cuts)?;
        let check = validate_solution(&sol, prof, &cfg, fair.as_ref())?;
        row.cost = Some(sol.cost);
        row.cost_pct = Some(pct(sol.cost, prof.cost_bs));
        row.entropy = Some(sol.realized_entropy);
        row.entropy_pct = Some(pct(sol.realized_entropy, prof.entropy_bs));
        row.entropy_gap = sol.entropy_gap;
        row.valid = check.is_valid();
        Ok(row)
    }
}

/// Baseline row, plain NFR, then everything the plan asks for. A program
/// that does not solve to optimality yields a row with that status and no
/// values; the sweep continues.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    u: &RelevanceMatrix,
    plan: &SweepPlan,
) -> Result<SweepResult> {
    run_labeled(&cfg.label(), cfg, u, plan)
}

pub fn run_labeled(
    label: &str,
    cfg: &ScenarioConfig,
    u: &RelevanceMatrix,
    plan: &SweepPlan,
) -> Result<SweepResult> {
    let profile = scenario_profile(cfg, u)?;
    let cuts = make_cuts(cfg.cut_mode, cfg.m_cuts)?;
    let ctx = Context {
        cfg,
        profile: &profile,
        cuts: &cuts,
        label,
        opts: &plan.solve_options,
    };
    let mut rows = vec![SweepRow {
        scenario: label.to_string(),
        algorithm: Algorithm::Bsr,
        status: "optimal".into(),
        cost: Some(profile.cost_bs),
        cost_pct: Some(100.0),
        entropy: Some(profile.entropy_bs),
        entropy_pct: Some(100.0),
        entropy_gap: None,
        iterations: 0,
        valid: true,
        solve_time: 0.0,
    }];
    let solved: Vec<SweepRow> = plan
        .algorithms()
        .into_par_iter()
        .map(|alg| ctx.run(alg))
        .collect::<Result<_>>()?;
    rows.extend(solved);
    Ok(SweepResult { rows })
}

/// Run many scenarios; rows come back in input order.
pub fn run_sweep(
    scenarios: &[(String, ScenarioConfig, RelevanceMatrix)],
    plan: &SweepPlan,
) -> Result<SweepResult> {
    let parts: Vec<SweepResult> = scenarios
        .par_iter()
        .map(|(label, cfg, u)| run_labeled(label, cfg, u, plan))
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        rows: parts.into_iter().flat_map(|p| p.rows).collect(),
    })
}

/// Fair, Diverse and Fair-Diverse curves for one scenario.
pub fn compare_fairness(
    cfg: &ScenarioConfig,
    u: &RelevanceMatrix,
    b_list: &[f64],
    cf_list: &[f64],
    kinds: &[FairnessKind],
) -> Result<SweepResult> {
    run_scenario(
        cfg,
        u,
        &SweepPlan {
            b_list: b_list.to_vec(),
            cf_list: cf_list.to_vec(),
            kinds: kinds.to_vec(),
            fair_diverse: true,
            ..SweepPlan::default()
        },
    )
}

/// Write through a temporary file in the same directory, then rename, so
/// readers never see a partial file.
pub fn write_atomic(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
