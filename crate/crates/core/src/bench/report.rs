use std::fmt::Write as _;

use super::{Algorithm, SweepResult, SweepRow};

/// One point of a cost/entropy trade-off curve, in percent of the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub scenario: String,
    /// `diverse`, `fair-<kind>` or `fair-diverse-<kind>-cf<c_f>`.
    pub series: String,
    pub tag: String,
    pub cost_pct: f64,
    pub entropy_pct: f64,
}

impl CurvePoint {
    fn from_row(series: &str, r: &SweepRow) -> Option<Self> {
        Some(CurvePoint {
            scenario: r.scenario.clone(),
            series: series.to_string(),
            tag: r.algorithm.to_string(),
            cost_pct: r.cost_pct?,
            entropy_pct: r.entropy_pct?,
        })
    }
}

/// Curves per scenario. The Diverse series runs from plain NFR through
/// increasing `b` to the baseline at (100, 100); Fair series run from the
/// loosest bound to the baseline; Fair-Diverse series follow `b` at a fixed
/// bound. Rows without values are skipped.
pub fn tradeoff_curve(result: &SweepResult) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for sc in result.scenarios() {
        let rows: Vec<&SweepRow> = result.rows_for(sc).filter(|r| r.cost_pct.is_some()).collect();
        let find = |a: Algorithm| rows.iter().copied().find(|r| r.algorithm == a);
        let bsr = find(Algorithm::Bsr);
        let nfr = find(Algorithm::Nfr);
        let mut push = |series: &str, body: Vec<&SweepRow>, lead: Option<&SweepRow>| {
            if body.is_empty() {
                return;
            }
            out.extend(
                lead.into_iter()
                    .chain(body)
                    .chain(bsr)
                    .filter_map(|r| CurvePoint::from_row(series, r)),
            );
        };

        let mut diverse: Vec<&SweepRow> =
            rows.iter().copied().filter(|r| matches!(r.algorithm, Algorithm::Diverse { .. })).collect();
        diverse.sort_by(|a, b| a.algorithm.b().unwrap().total_cmp(&b.algorithm.b().unwrap()));
        push("diverse", diverse, nfr);

        let mut kinds = Vec::new();
        for r in &rows {
            if let Some((k, _)) = r.algorithm.fairness() {
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
        }
        for kind in kinds {
            let mut fair: Vec<&SweepRow> = rows
                .iter()
                .copied()
                .filter(|r| matches!(r.algorithm, Algorithm::Fair { kind: k, .. } if k == kind))
                .collect();
            let cf = |r: &SweepRow| r.algorithm.fairness().unwrap().1;
            fair.sort_by(|a, b| cf(b).total_cmp(&cf(a)));
            push(&format!("fair-{kind}"), fair, None);

            let mut cfs: Vec<f64> = Vec::new();
            for r in &rows {
                if let Algorithm::FairDiverse { kind: k, cf, .. } = r.algorithm {
                    if k == kind && !cfs.contains(&cf) {
                        cfs.push(cf);
                    }
                }
            }
            for c in cfs {
                let mut fd: Vec<&SweepRow> = rows
                    .iter()
                    .copied()
                    .filter(|r| {
                        matches!(r.algorithm, Algorithm::FairDiverse { kind: k, cf, .. } if k == kind && cf == c)
                    })
                    .collect();
                fd.sort_by(|a, b| a.algorithm.b().unwrap().total_cmp(&b.algorithm.b().unwrap()));
                push(&format!("fair-diverse-{kind}-cf{c}"), fd, None);
            }
        }
    }
    out
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "series", "tag", "cost_pct", "entropy_pct"])
        .expect("in-memory write");
    for p in points {
        w.write_record([
            p.scenario.as_str(),
            p.series.as_str(),
            p.tag.as_str(),
            &p.cost_pct.to_string(),
            &p.entropy_pct.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn row_label(a: &Algorithm) -> String {
    match a {
        Algorithm::Bsr | Algorithm::Nfr => a.name().to_string(),
        Algorithm::Diverse { b } => format!("b = {b:.2}"),
        Algorithm::Fair { kind, cf } => format!("{kind} cf = {cf:.2}"),
        Algorithm::FairDiverse { b, kind, cf } => format!("b = {b:.2}, {kind} cf = {cf:.2}"),
    }
}

/// Plain-text table per scenario: cost and entropy with their percentage
/// of the baseline, plain NFR first and the baseline last.
pub fn report_text(result: &SweepResult) -> String {
    let mut out = String::new();
    for sc in result.scenarios() {
        let mut rows: Vec<&SweepRow> = result.rows_for(sc).collect();
        let rank = |r: &SweepRow| match r.algorithm {
            Algorithm::Nfr => 0,
            Algorithm::Diverse { .. } => 1,
            Algorithm::Fair { .. } => 2,
            Algorithm::FairDiverse { .. } => 3,
            Algorithm::Bsr => 4,
        };
        rows.sort_by(|a, b| {
            let key = |r: &SweepRow| {
                let (_, cf) = r.algorithm.fairness().unwrap_or((crate::optimizer::FairnessKind::Max, 0.0));
                (rank(r), r.algorithm.b().unwrap_or(0.0), -cf)
            };
            let (ka, kb) = (key(a), key(b));
            ka.0.cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        });
        let _ = writeln!(out, "{sc}");
        let _ = writeln!(
            out,
            "{:<28} {:>9} {:>10} {:>9} {:>10}",
            "Algorithm", "c", "% of c_BS", "H", "% of H_BS"
        );
        for r in rows {
            let label = row_label(&r.algorithm);
            match (r.cost, r.cost_pct, r.entropy, r.entropy_pct) {
                (Some(c), Some(cp), Some(h), Some(hp)) => {
                    let flag = if r.valid { "" } else { "  (validation failed)" };
                    let _ = writeln!(
                        out,
                        "{label:<28} {c:>9.5} {:>10} {h:>9.5} {:>10}{flag}",
                        format!("{cp:.0}%"),
                        format!("{hp:.0}%"),
                    );
                }
                _ => {
                    let _ = writeln!(out, "{label:<28} {:>9}", r.status);
                }
            }
        }
        out.push('\n');
    }
    out
}
