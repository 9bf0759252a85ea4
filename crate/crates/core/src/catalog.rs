//! Content catalogs: relevance matrices, direct demand, cache costs and
//! scenario configuration.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::demand::DemandDistribution;
use crate::error::{Error, Result};
use crate::optimizer::{CutMode, FairnessKind};

/// Scores below this are treated as irrelevant.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Dense `K x K` relevance scores with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMatrix {
    k: usize,
    scores: Vec<f64>,
}

impl RelevanceMatrix {
    /// Build from row-major scores. Entries must lie in `[0,1]`; the
    /// diagonal is forced to zero.
    pub fn from_dense(k: usize, mut scores: Vec<f64>) -> Result<Self> {
        if k == 0 || scores.len() != k * k {
            return Err(Error::Shape(format!(
                "expected {k}x{k} scores, got {} values",
                scores.len()
            )));
        }
        if let Some((idx, v)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::Domain(format!(
                "score {v} at ({}, {}) is outside [0,1]",
                idx / k + 1,
                idx % k + 1
            )));
        }
        for i in 0..k {
            scores[i * k + i] = 0.0;
        }
        Ok(RelevanceMatrix { k, scores })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Shape("relevance rows must form a square matrix".into()));
        }
        Self::from_dense(k, rows.concat())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i * self.k..(i + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    /// Zero every score strictly below `threshold`.
    pub fn thresholded(&self, threshold: f64) -> Self {
        let scores = self
            .scores
            .iter()
            .map(|&u| if u < threshold { 0.0 } else { u })
            .collect();
        RelevanceMatrix { k: self.k, scores }
    }

    pub fn nonzeros(&self) -> usize {
        self.scores.iter().filter(|&&u| u > 0.0).count()
    }

    /// Headerless dense CSV, one row per line.
    pub fn to_dense_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.k {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// Read a relevance matrix from a dense or triplet (`i,j,u`) CSV and apply
/// the relevance threshold.
pub fn load_relevance(path: impl AsRef<Path>, threshold: f64) -> Result<RelevanceMatrix> {
    let text =
        std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
    parse_relevance(&text, threshold)
}

pub fn parse_relevance(text: &str, threshold: f64) -> Result<RelevanceMatrix> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Config(format!("threshold {threshold} outside [0,1]")));
    }
    let first = text.lines().map(str::trim).find(|l| !l.is_empty());
    let raw = match first {
        Some(h) if h.replace(' ', "") == "i,j,u" => parse_triplets(text)?,
        Some(_) => parse_dense(text)?,
        None => return Err(Error::Shape("empty relevance file".into())),
    };
    Ok(raw.thresholded(threshold))
}

fn csv_reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map_or(0, |p| p.line() as usize)
}

fn parse_dense(text: &str) -> Result<RelevanceMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in csv_reader(text, false).records() {
        let rec = rec.map_err(|e| Error::parse(0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Shape(format!(
                    "line {line}: {} columns, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.first().map_or(0, Vec::len) != rows.len() {
        return Err(Error::Shape(format!(
            "dense relevance matrix is {}x{}, not square",
            rows.len(),
            rows.first().map_or(0, Vec::len)
        )));
    }
    RelevanceMatrix::from_rows(&rows)
}

fn parse_triplets(text: &str) -> Result<RelevanceMatrix> {
    let mut entries: HashMap<(usize, usize), f64> = HashMap::new();
    let mut order = Vec::new();
    let mut k = 0;
    for rec in csv_reader(text, true).records() {
        let rec = rec.map_err(|e| Error::parse(0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::parse(line, format!("expected 3 fields, got {}", rec.len())));
        }
        let index = |f: &str| -> Result<usize> {
            match f.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::parse(line, format!("bad 1-based index {f:?}"))),
            }
        };
        let i = index(&rec[0])?;
        let j = index(&rec[1])?;
        let u: f64 = rec[2]
            .parse()
            .map_err(|_| Error::parse(line, format!("not a number: {:?}", &rec[2])))?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("line {line}: score {u} outside [0,1]")));
        }
        if entries.insert((i - 1, j - 1), u).is_some() {
            return Err(Error::parse(line, format!("duplicate entry ({i}, {j})")));
        }
        order.push((i - 1, j - 1));
        k = k.max(i).max(j);
    }
    let mut scores = vec![0.0; k * k];
    for (i, j) in order {
        scores[i * k + j] = entries[&(i, j)];
    }
    RelevanceMatrix::from_dense(k, scores)
}

/// Random sparse relevance matrix: each off-diagonal score is zero with
/// probability `1 - density`, otherwise uniform in `[0.5, 1]`. Rows with no
/// relevant item are redrawn.
pub fn synth_relevance(k: usize, density: f64, seed: u64) -> Result<RelevanceMatrix> {
    if k < 2 {
        return Err(Error::Config(format!("catalog size {k} must be at least 2")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} outside (0,1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scores = vec![0.0; k * k];
    for i in 0..k {
        loop {
            let row = &mut scores[i * k..(i + 1) * k];
            for (j, u) in row.iter_mut().enumerate() {
                *u = if j != i && rng.gen::<f64>() < density {
                    rng.gen_range(0.5..=1.0)
                } else {
                    0.0
                };
            }
            if row.iter().any(|&u| u > 0.0) {
                break;
            }
        }
    }
    RelevanceMatrix::from_dense(k, scores)
}

/// Zipf direct demand: `p0_i ∝ i^(-pop)` for `i = 1..K`.
pub fn zipf_direct_demand(k: usize, pop: f64) -> Result<DemandDistribution> {
    if k == 0 {
        return Err(Error::Config("catalog size must be positive".into()));
    }
    if !(pop >= 0.0) || !pop.is_finite() {
        return Err(Error::Config(format!("zipf exponent {pop} must be >= 0")));
    }
    let weights: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-pop)).collect();
    DemandDistribution::normalized(weights)
}

/// Per-item delivery cost in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if let Some(c) = costs.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::Domain(format!("cost {c} outside [0,1]")));
        }
        Ok(CostVector(costs))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Items with zero cost.
    pub fn cached(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] == 0.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostMode {
    /// Cache the `C` items with the largest BSR demand at cost 0, the rest cost 1.
    Binary,
    /// Use a caller-supplied cost vector.
    Custom,
}

pub fn build_costs(
    demand_bs: &DemandDistribution,
    cache_size: usize,
    mode: CostMode,
    custom: Option<&[f64]>,
) -> Result<CostVector> {
    let k = demand_bs.len();
    match mode {
        CostMode::Binary => {
            if cache_size > k {
                return Err(Error::Config(format!(
                    "cache size {cache_size} exceeds catalog size {k}"
                )));
            }
            let p = demand_bs.as_slice();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
            let mut costs = vec![1.0; k];
            for &i in &order[..cache_size] {
                costs[i] = 0.0;
            }
            CostVector::new(costs)
        }
        CostMode::Custom => {
            let v = custom.ok_or_else(|| {
                Error::Config("custom cost mode needs a cost vector".into())
            })?;
            if v.len() != k {
                return Err(Error::Config(format!(
                    "custom cost vector has {} entries, catalog has {k}",
                    v.len()
                )));
            }
            CostVector::new(v.to_vec())
        }
    }
}

/// One simulation scenario. Field names follow the scenario-file keys.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub k: usize,
    pub n: usize,
    pub c: usize,
    pub l: usize,
    pub alpha: f64,
    pub pop: f64,
    pub q: f64,
    pub b: f64,
    pub cf: f64,
    pub fairness: Option<FairnessKind>,
    pub seed: u64,
    pub m_cuts: usize,
    pub cut_mode: CutMode,
}

const SCENARIO_KEYS: [&str; 13] = [
    "K", "N", "C", "L", "alpha", "pop", "q", "b", "cf", "fairness", "seed", "M", "cut_mode",
];

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            k: 30,
            n: 2,
            c: 5,
            l: 40,
            alpha: 0.8,
            pop: 1.0,
            q: 0.8,
            b: 0.8,
            cf: 0.1,
            fairness: None,
            seed: 1,
            m_cuts: 100,
            cut_mode: CutMode::TangentLinear,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k < 2 || self.n == 0 || self.l == 0 || self.m_cuts == 0 {
            return fail("K >= 2 and N, L, M >= 1 are required".into());
        }
        if self.n >= self.k {
            return fail(format!("N = {} must be smaller than K = {}", self.n, self.k));
        }
        if self.c > self.k {
            return fail(format!("C = {} exceeds K = {}", self.c, self.k));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("alpha = {} outside (0,1)", self.alpha));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return fail(format!("q = {} outside (0,1]", self.q));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return fail(format!("b = {} outside [0,1]", self.b));
        }
        if !(self.cf >= 0.0) || !self.pop.is_finite() || self.pop < 0.0 {
            return fail("cf and pop must be non-negative".into());
        }
        Ok(())
    }

    /// Parse `key=value` lines; `#` starts a comment. Every key must appear exactly once.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: HashMap<&str, (usize, &str)> = HashMap::new();
        for (ln, raw) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(ln, format!("expected key=value, got {line:?}")))?;
            let key = key.trim();
            let Some(&canonical) = SCENARIO_KEYS.iter().find(|k| **k == key) else {
                return Err(Error::parse(ln, format!("unknown key {key:?}")));
            };
            if values.insert(canonical, (ln, value.trim())).is_some() {
                return Err(Error::parse(ln, format!("duplicate key {key:?}")));
            }
        }
        if let Some(missing) = SCENARIO_KEYS.iter().find(|k| !values.contains_key(*k)) {
            return Err(Error::Config(format!("scenario is missing key {missing:?}")));
        }
        fn get<T: FromStr>(values: &HashMap<&str, (usize, &str)>, key: &str) -> Result<T> {
            let (ln, v) = values[key];
            v.parse()
                .map_err(|_| Error::parse(ln, format!("invalid value {v:?} for {key}")))
        }
        let fairness = {
            let (ln, v) = values["fairness"];
            if v == "none" {
                None
            } else {
                Some(v.parse::<FairnessKind>().map_err(|e| Error::parse(ln, e.to_string()))?)
            }
        };
        let cut_mode = {
            let (ln, v) = values["cut_mode"];
            v.parse::<CutMode>().map_err(|e| Error::parse(ln, e.to_string()))?
        };
        let cfg = ScenarioConfig {
            k: get(&values, "K")?,
            n: get(&values, "N")?,
            c: get(&values, "C")?,
            l: get(&values, "L")?,
            alpha: get(&values, "alpha")?,
            pop: get(&values, "pop")?,
            q: get(&values, "q")?,
            b: get(&values, "b")?,
            cf: get(&values, "cf")?,
            fairness,
            seed: get(&values, "seed")?,
            m_cuts: get(&values, "M")?,
            cut_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::parse(&text)
    }

    /// Short label in the style `K30 pop1 a0.8 N2 C5 q0.8`.
    pub fn label(&self) -> String {
        format!(
            "K{} pop{} a{} N{} C{} q{}",
            self.k, self.pop, self.alpha, self.n, self.c, self.q
        )
    }
}

impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fairness = self.fairness.map_or("none".to_string(), |k| k.to_string());
        writeln!(f, "K={}", self.k)?;
        writeln!(f, "N={}", self.n)?;
        writeln!(f, "C={}", self.c)?;
        writeln!(f, "L={}", self.l)?;
        writeln!(f, "alpha={}", self.alpha)?;
        writeln!(f, "pop={}", self.pop)?;
        writeln!(f, "q={}", self.q)?;
        writeln!(f, "b={}", self.b)?;
        writeln!(f, "cf={}", self.cf)?;
        writeln!(f, "fairness={fairness}")?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "M={}", self.m_cuts)?;
        writeln!(f, "cut_mode={}", self.cut_mode)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_threshold_zeroes_small_scores() {
        let u = parse_relevance("0,0.6\n0.4,0\n", 0.5).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 0.6, 0.0, 0.0]);
    }

    #[test]
    fn dense_without_small_scores_is_unchanged() {
        let u = parse_relevance("0,0.9,0.9\n0.9,0,0.9\n0.9,0.9,0\n", 0.5).unwrap();
        assert_eq!(u.nonzeros(), 6);
        assert!(u.as_slice().iter().all(|&v| v == 0.0 || v == 0.9));
    }

    #[test]
    fn triplets_are_one_based_and_thresholded() {
        let u = parse_relevance("i,j,u\n1,2,0.7\n2,1,0.55\n1,3,0.49\n", 0.5).unwrap();
        assert_eq!(u.k(), 3);
        assert_eq!(u.get(0, 1), 0.7);
        assert_eq!(u.get(1, 0), 0.55);
        assert_eq!(u.get(0, 2), 0.0);
        assert_eq!(u.nonzeros(), 2);
    }

    #[test]
    fn diagonal_is_forced_to_zero() {
        let u = parse_relevance("0.8,0.6\n0.7,0.9\n", 0.5).unwrap();
        assert_eq!(u.get(0, 0), 0.0);
        assert_eq!(u.get(1, 1), 0.0);
    }

    #[test]
    fn malformed_input_reports_line() {
        match parse_relevance("0,0.5\n0.5,abc\n", 0.5) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_relevance("i,j,u\n1,2,0.7\n2,x,0.5\n", 0.5) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_square_and_out_of_range() {
        assert!(matches!(parse_relevance("0,0.5,0.5\n0.5,0,0.5\n", 0.5), Err(Error::Shape(_))));
        assert!(matches!(parse_relevance("0,0.5\n0.5\n", 0.5), Err(Error::Shape(_))));
        assert!(matches!(parse_relevance("0,1.5\n0.5,0\n", 0.5), Err(Error::Domain(_))));
        assert!(matches!(parse_relevance("0,1\n1,0\n", 1.5), Err(Error::Config(_))));
    }

    #[test]
    fn synthetic_full_density() {
        let u = synth_relevance(5, 1.0, 7).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let v = u.get(i, j);
                if i == j {
                    assert_eq!(v, 0.0);
                } else {
                    assert!((0.5..=1.0).contains(&v));
                }
            }
        }
        assert_eq!(u, synth_relevance(5, 1.0, 7).unwrap());
    }

    #[test]
    fn synthetic_rows_never_empty() {
        let u = synth_relevance(40, 0.02, 3).unwrap();
        for i in 0..40 {
            assert!(u.row(i).iter().any(|&v| v > 0.0));
        }
    }

    #[test]
    fn zipf_examples() {
        assert_eq!(zipf_direct_demand(4, 0.0).unwrap().as_slice(), &[0.25; 4]);
        let p = zipf_direct_demand(2, 1.0).unwrap();
        assert!((p.as_slice()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.as_slice()[1] - 1.0 / 3.0).abs() < 1e-15);
        let p = zipf_direct_demand(3, 1.0).unwrap();
        for (a, b) in p.as_slice().iter().zip([6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn binary_costs_cache_top_demand() {
        let d = |v: &[f64]| DemandDistribution::new(v.to_vec()).unwrap();
        let c = build_costs(&d(&[0.5, 0.3, 0.2]), 1, CostMode::Binary, None).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 1.0, 1.0]);
        let c = build_costs(&d(&[0.25; 4]), 2, CostMode::Binary, None).unwrap();
        assert_eq!(c.as_slice(), &[0.0, 0.0, 1.0, 1.0]);
        let c = build_costs(&d(&[0.1, 0.4, 0.15, 0.35]), 2, CostMode::Binary, None).unwrap();
        assert_eq!(c.as_slice(), &[1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn custom_costs_need_a_vector() {
        let p = DemandDistribution::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(build_costs(&p, 1, CostMode::Custom, None), Err(Error::Config(_))));
        let c = build_costs(&p, 1, CostMode::Custom, Some(&[0.2, 0.7])).unwrap();
        assert_eq!(c.as_slice(), &[0.2, 0.7]);
        assert!(build_costs(&p, 1, CostMode::Custom, Some(&[0.2, 1.7])).is_err());
    }

    const SAMPLE: &str = "# bundled\nK=30\nN=2\nC=5\nL=40\nalpha=0.8\npop=1\nq=0.8\nb=0.8\ncf=0.1\nfairness=max\nseed=11\nM=100\ncut_mode=tangent\n";

    #[test]
    fn scenario_round_trips_through_text() {
        let cfg = ScenarioConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.k, 30);
        assert_eq!(cfg.fairness, Some(FairnessKind::Max));
        assert_eq!(cfg.cut_mode, CutMode::TangentLinear);
        assert_eq!(ScenarioConfig::parse(&cfg.to_string()).unwrap(), cfg);
    }

    #[test]
    fn scenario_rejects_unknown_missing_and_invalid() {
        assert!(matches!(
            ScenarioConfig::parse(&format!("{SAMPLE}extra=1\n")),
            Err(Error::Parse { line: 15, .. })
        ));
        assert!(matches!(
            ScenarioConfig::parse(&SAMPLE.replace("q=0.8\n", "")),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse(&SAMPLE.replace("alpha=0.8", "alpha=1.2")),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse(&SAMPLE.replace("N=2", "N=30")),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ScenarioConfig::parse(&SAMPLE.replace("N=2", "N=two")),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
