//! MPS export (fixed or free format) and a matching reader.
//!
//! Column names are `<block prefix><offset>` padded to eight characters,
//! e.g. `F0000042` is offset 42 of block `f`. Rows are `R0000000`,
//! `R0000001`, ... in insertion order and the objective row is `COST`.
//! Reading a file written here gives back the same bounds, objective and
//! rows in the same order; block names come back as the lower-cased
//! prefix. Fixed format rounds coefficients to twelve characters, free
//! format writes shortest round-trip decimals and is exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Bounds, LinearProgram, Relation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpsFormat {
    #[default]
    Fixed,
    Free,
}

const OBJ_ROW: &str = "COST";
const NAME_WIDTH: usize = 8;

pub fn write_mps(lp: &LinearProgram, path: impl AsRef<Path>, format: MpsFormat) -> Result<()> {
    let text = write_mps_string(lp, format)?;
    std::fs::write(path.as_ref(), text).map_err(|e| Error::io(path.as_ref(), e))
}

fn block_prefixes(lp: &LinearProgram) -> Vec<String> {
    let mut used: Vec<String> = Vec::new();
    for b in lp.blocks() {
        let first = b
            .name
            .chars()
            .next()
            .filter(|c| c.is_ascii_alphabetic())
            .map(|c| c.to_ascii_uppercase())
            .unwrap_or('V');
        let mut prefix = first.to_string();
        let mut extra = b'A';
        while used.contains(&prefix) {
            prefix = format!("{first}{}", extra as char);
            extra += 1;
        }
        used.push(prefix);
    }
    used
}

fn column_names(lp: &LinearProgram) -> Result<Vec<String>> {
    let prefixes = block_prefixes(lp);
    let mut names = Vec::with_capacity(lp.num_vars());
    for (b, prefix) in lp.blocks().iter().zip(&prefixes) {
        let digits = NAME_WIDTH - prefix.len();
        if b.len > 10usize.pow(digits as u32) {
            return Err(Error::InvalidProgram(format!(
                "block {} has {} variables, too many for 8-character MPS names",
                b.name, b.len
            )));
        }
        for k in 0..b.len {
            names.push(format!("{prefix}{k:0digits$}"));
        }
    }
    Ok(names)
}

fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

/// Shortest rendering of `v` that fits a 12-character fixed-format field.
fn fixed_number(v: f64) -> String {
    let plain = format!("{v}");
    if plain.len() <= 12 {
        return plain;
    }
    let mut best = String::new();
    let mut best_err = f64::INFINITY;
    let candidates = (0..=11)
        .map(|p| format!("{v:.p$e}"))
        .chain((0..=11).map(|p| format!("{v:.p$}")));
    for s in candidates {
        if s.len() > 12 {
            continue;
        }
        let err = (s.parse::<f64>().unwrap_or(f64::INFINITY) - v).abs();
        if err < best_err {
            best_err = err;
            best = s;
        }
    }
    best
}

struct Emitter {
    out: String,
    format: MpsFormat,
}

impl Emitter {
    fn line(&mut self, kind: &str, name: &str, name2: &str, value: Option<f64>) {
        match self.format {
            MpsFormat::Fixed => {
                let mut s = format!(" {kind:<2} {name:<8}");
                if !name2.is_empty() || value.is_some() {
                    let _ = write!(s, "  {name2:<8}");
                }
                if let Some(v) = value {
                    let _ = write!(s, "  {:>12}", fixed_number(v));
                }
                self.out.push_str(s.trim_end());
            }
            MpsFormat::Free => {
                let mut parts: Vec<String> = Vec::new();
                if !kind.is_empty() {
                    parts.push(kind.to_string());
                }
                parts.push(name.to_string());
                if !name2.is_empty() {
                    parts.push(name2.to_string());
                }
                if let Some(v) = value {
                    parts.push(format!("{v:?}"));
                }
                self.out.push(' ');
                self.out.push_str(&parts.join(" "));
            }
        }
        self.out.push('\n');
    }
}

pub fn write_mps_string(lp: &LinearProgram, format: MpsFormat) -> Result<String> {
    let cols = column_names(lp)?;
    let mut e = Emitter {
        out: String::new(),
        format,
    };
    e.out.push_str("NAME          NFR\n");

    e.out.push_str("ROWS\n");
    e.line("N", OBJ_ROW, "", None);
    for (i, c) in lp.constraints().iter().enumerate() {
        let kind = match c.relation {
            Relation::LessEq => "L",
            Relation::GreaterEq => "G",
            Relation::Eq => "E",
        };
        e.line(kind, &row_name(i), "", None);
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, c) in lp.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_col[j].push((i, a));
        }
    }
    e.out.push_str("COLUMNS\n");
    for (j, entries) in by_col.iter().enumerate() {
        let cost = lp.objective()[j];
        if cost != 0.0 || entries.is_empty() {
            e.line("", &cols[j], OBJ_ROW, Some(cost));
        }
        for &(i, a) in entries {
            e.line("", &cols[j], &row_name(i), Some(a));
        }
    }

    e.out.push_str("RHS\n");
    for (i, c) in lp.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            e.line("", "RHS", &row_name(i), Some(c.rhs));
        }
    }

    e.out.push_str("RANGES\n");

    e.out.push_str("BOUNDS\n");
    for (j, b) in lp.bounds().iter().enumerate() {
        let name = &cols[j];
        match (b.lower.is_finite(), b.upper.is_finite()) {
            (false, false) => e.line("FR", "BND", name, None),
            _ if b.lower == b.upper => e.line("FX", "BND", name, Some(b.lower)),
            (false, true) => {
                e.line("MI", "BND", name, None);
                e.line("UP", "BND", name, Some(b.upper));
            }
            (true, up_finite) => {
                if b.lower != 0.0 {
                    e.line("LO", "BND", name, Some(b.lower));
                }
                if up_finite {
                    e.line("UP", "BND", name, Some(b.upper));
                }
            }
        }
    }
    e.out.push_str("ENDATA\n");
    Ok(e.out)
}

/// Read an MPS file (fixed or free; names must not contain spaces).
pub fn read_mps(text: &str) -> Result<LinearProgram> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Ranges,
        Bounds,
    }
    let mut section = Section::None;
    let mut objective_row: Option<String> = None;
    let mut rows: Vec<(String, Relation)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut costs: Vec<f64> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut bounds: Vec<Bounds> = Vec::new();

    let number = |line: usize, s: &str| {
        s.parse::<f64>()
            .map_err(|_| Error::parse(line, format!("bad number {s:?}")))
    };

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let head = raw.split_whitespace().next().unwrap_or("");
            section = match head {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(Error::parse(ln, format!("unknown section {other}"))),
            };
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::Rows => {
                let [kind, name] = f[..] else {
                    return Err(Error::parse(ln, "ROWS entry needs type and name"));
                };
                let rel = match kind {
                    "N" => {
                        objective_row.get_or_insert_with(|| name.to_string());
                        continue;
                    }
                    "L" => Relation::LessEq,
                    "G" => Relation::GreaterEq,
                    "E" => Relation::Eq,
                    _ => return Err(Error::parse(ln, format!("unknown row type {kind}"))),
                };
                row_index.insert(name.to_string(), rows.len());
                rows.push((name.to_string(), rel));
                rhs.push(0.0);
            }
            Section::Columns => {
                if f.len() < 3 || f.len().is_multiple_of(2) {
                    return Err(Error::parse(ln, "COLUMNS entry needs name and row/value pairs"));
                }
                let col = *col_index.entry(f[0].to_string()).or_insert_with(|| {
                    col_names.push(f[0].to_string());
                    entries.push(Vec::new());
                    costs.push(0.0);
                    bounds.push(Bounds::NONNEG);
                    col_names.len() - 1
                });
                for pair in f[1..].chunks(2) {
                    let v = number(ln, pair[1])?;
                    if Some(pair[0]) == objective_row.as_deref() {
                        costs[col] = v;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| Error::parse(ln, format!("unknown row {}", pair[0])))?;
                        entries[col].push((r, v));
                    }
                }
            }
            Section::Rhs => {
                let start = if f.len() % 2 == 1 { 1 } else { 0 };
                for pair in f[start..].chunks(2) {
                    if pair.len() != 2 {
                        return Err(Error::parse(ln, "RHS entry needs row/value pairs"));
                    }
                    if Some(pair[0]) == objective_row.as_deref() {
                        continue;
                    }
                    let r = *row_index
                        .get(pair[0])
                        .ok_or_else(|| Error::parse(ln, format!("unknown row {}", pair[0])))?;
                    rhs[r] = number(ln, pair[1])?;
                }
            }
            Section::Ranges => {
                return Err(Error::parse(ln, "RANGES entries are not supported"));
            }
            Section::Bounds => {
                if f.len() < 3 {
                    return Err(Error::parse(ln, "BOUNDS entry too short"));
                }
                let col = *col_index
                    .get(f[2])
                    .ok_or_else(|| Error::parse(ln, format!("unknown column {}", f[2])))?;
                let value = f.get(3).map(|s| number(ln, s)).transpose()?;
                let need = || value.ok_or_else(|| Error::parse(ln, "bound needs a value"));
                let b = &mut bounds[col];
                match f[0] {
                    "FR" => *b = Bounds::FREE,
                    "MI" => b.lower = f64::NEG_INFINITY,
                    "PL" => b.upper = f64::INFINITY,
                    "FX" => *b = Bounds::fixed(need()?),
                    "LO" => b.lower = need()?,
                    "UP" => b.upper = need()?,
                    other => return Err(Error::parse(ln, format!("unknown bound type {other}"))),
                }
            }
            Section::None => {}
        }
    }

    // group consecutive columns sharing a prefix back into blocks
    let mut lp = LinearProgram::new();
    let mut start = 0;
    while start < col_names.len() {
        let prefix = col_names[start].trim_end_matches(|c: char| c.is_ascii_digit());
        let mut end = start + 1;
        while end < col_names.len()
            && col_names[end].trim_end_matches(|c: char| c.is_ascii_digit()) == prefix
        {
            end += 1;
        }
        let name = if prefix.is_empty() {
            format!("v{start}")
        } else {
            prefix.to_ascii_lowercase()
        };
        let name = if lp.block(&name).is_some() {
            format!("{name}{start}")
        } else {
            name
        };
        lp.add_block(&name, end - start, Bounds::NONNEG)?;
        start = end;
    }
    for (j, b) in bounds.into_iter().enumerate() {
        lp.set_bounds(j, b)?;
        lp.set_objective(j, costs[j])?;
    }
    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows.len()];
    for (j, col) in entries.into_iter().enumerate() {
        for (r, v) in col {
            by_row[r].push((j, v));
        }
    }
    for (r, ((name, rel), coeffs)) in rows.into_iter().zip(by_row).enumerate() {
        lp.add_constraint(name, coeffs, rel, rhs[r])?;
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var() -> LinearProgram {
        let mut lp = LinearProgram::new();
        let x = lp.add_block("x", 2, Bounds::NONNEG).unwrap();
        lp.set_objective(x.index(0), -1.0).unwrap();
        lp.set_objective(x.index(1), -1.0).unwrap();
        lp.add_constraint("cap", vec![(0, 1.0), (1, 1.0)], Relation::LessEq, 1.0)
            .unwrap();
        lp
    }

    fn section<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
        text.lines()
            .skip_while(|l| *l != name)
            .skip(1)
            .take_while(|l| l.starts_with(' '))
            .collect()
    }

    #[test]
    fn columns_section_lists_every_nonzero() {
        let text = write_mps_string(&two_var(), MpsFormat::Fixed).unwrap();
        assert_eq!(section(&text, "COLUMNS").len(), 4);
        assert!(text.contains("\n L  R0000000\n"));
        assert!(text.ends_with("ENDATA\n"));
    }

    #[test]
    fn fixed_format_field_positions() {
        let text = write_mps_string(&two_var(), MpsFormat::Fixed).unwrap();
        let line = section(&text, "COLUMNS")[0];
        assert_eq!(&line[4..12], "X0000000");
        assert_eq!(&line[14..18], "COST");
        assert_eq!(line[24..36].trim(), "-1");
    }

    #[test]
    fn free_variable_gets_fr_bound() {
        let mut lp = two_var();
        lp.add_block("d", 1, Bounds::FREE).unwrap();
        let text = write_mps_string(&lp, MpsFormat::Fixed).unwrap();
        assert!(section(&text, "BOUNDS").iter().any(|l| l.starts_with(" FR BND") && l.ends_with("D0000000")));
    }

    #[test]
    fn fixed_numbers_fit_twelve_chars() {
        for v in [0.1 + 0.2, -1.0 / 3.0, 1e-13 / 7.0, 123456789.123, -0.000123456789] {
            let s = fixed_number(v);
            assert!(s.len() <= 12, "{s}");
            let back: f64 = s.parse().unwrap();
            assert!((back - v).abs() <= 1e-6 * v.abs(), "{v} -> {s}");
        }
    }

    #[test]
    fn free_format_round_trip_is_exact() {
        let mut lp = two_var();
        let d = lp.add_block("d", 2, Bounds::FREE).unwrap();
        lp.set_bounds(d.index(1), Bounds::new(f64::NEG_INFINITY, 0.25)).unwrap();
        lp.add_constraint("g", vec![(d.index(0), 1.0 / 3.0), (0, 2.0)], Relation::GreaterEq, -0.7)
            .unwrap();
        let text = write_mps_string(&lp, MpsFormat::Free).unwrap();
        let back = read_mps(&text).unwrap();
        assert_eq!(back.bounds(), lp.bounds());
        assert_eq!(back.objective(), lp.objective());
        assert_eq!(back.num_constraints(), lp.num_constraints());
        for (a, b) in back.constraints().iter().zip(lp.constraints()) {
            let mut ac = a.coeffs.clone();
            let mut bc = b.coeffs.clone();
            ac.sort_by_key(|e| e.0);
            bc.sort_by_key(|e| e.0);
            assert_eq!(ac, bc);
            assert_eq!((a.relation, a.rhs), (b.relation, b.rhs));
        }
        let names: Vec<&str> = back.blocks().iter().map(|b| b.name.as_str()).collect();
        assert_eq!(names, ["x", "d"]);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_mps(&two_var(), "/nonexistent-dir/x.mps", MpsFormat::Fixed).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }
}
