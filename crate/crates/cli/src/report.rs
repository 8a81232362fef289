//! Result CSV, fig3 ratio CSV and the summary table.
//!
//! The result CSV starts with `#` comment lines carrying the run provenance,
//! followed by the header
//! `experiment,algorithm,Nstar,Ms,Mc,trials,MR,AHE,mean_time_s` and one row per
//! `(algorithm, sweep point)`. Floats have 9 significant digits. `AHE` is
//! empty when every target of every trial was missed; `Nstar` is empty for
//! non-square grids.

use std::fmt::Write as _;

use fcomp_core::{AggregateResult, Algorithm};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const CSV_HEADER: [&str; 9] = [
    "experiment",
    "algorithm",
    "Nstar",
    "Ms",
    "Mc",
    "trials",
    "MR",
    "AHE",
    "mean_time_s",
];

pub const RATIO_HEADER: [&str; 5] = ["Ms", "Mc", "time_ratio", "MR_ratio", "AHE_ratio"];

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub algorithm: Algorithm,
    pub nstar: Option<usize>,
    pub ms: usize,
    pub mc: usize,
    pub trials: usize,
    pub mr: f64,
    pub ahe: Option<f64>,
    pub mean_time_s: f64,
}

/// Provenance written as CSV comment lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub experiment: String,
    pub config_digest: String,
    pub base_seed: u64,
    pub version: String,
}

pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn fmt_opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn rows_from(experiment: &str, result: &AggregateResult) -> Vec<ResultRow> {
    result
        .entries
        .iter()
        .map(|e| ResultRow {
            experiment: experiment.to_string(),
            algorithm: e.algorithm,
            nstar: e.point.nstar(),
            ms: e.point.ms,
            mc: e.point.mc,
            trials: e.trials,
            mr: e.mean_mr,
            ahe: e.mean_ahe,
            mean_time_s: e.mean_time,
        })
        .collect()
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::invalid(format!("csv: {e}"))
}

pub fn format_csv(prov: &Provenance, rows: &[ResultRow]) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# experiment={}", prov.experiment).unwrap();
    writeln!(out, "# config_sha256={}", prov.config_digest).unwrap();
    writeln!(out, "# base_seed={}", prov.base_seed).unwrap();
    writeln!(out, "# version={}", prov.version).unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.algorithm.label().to_string(),
            fmt_opt(r.nstar),
            r.ms.to_string(),
            r.mc.to_string(),
            r.trials.to_string(),
            fmt_float(r.mr),
            fmt_opt(r.ahe.map(fmt_float)),
            fmt_float(r.mean_time_s),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    out.push_str(std::str::from_utf8(&bytes).map_err(csv_err)?);
    Ok(out)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| csv_err(format!("missing column {}", CSV_HEADER[i])))?;
    raw.parse()
        .map_err(|_| csv_err(format!("bad {} value '{raw}'", CSV_HEADER[i])))
}

fn opt_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<Option<T>> {
    match rec.get(i) {
        Some("") => Ok(None),
        _ => field(rec, i).map(Some),
    }
}

/// Parses the provenance comments and rows back.
pub fn parse_csv(text: &str) -> Result<(Provenance, Vec<ResultRow>)> {
    let mut kv = std::collections::HashMap::new();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') {
            kv.insert(k.to_string(), v.to_string());
        }
    }
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| csv_err(format!("missing '# {k}=' line")));
    let prov = Provenance {
        experiment: get("experiment")?,
        config_digest: get("config_sha256")?,
        base_seed: get("base_seed")?.parse().map_err(csv_err)?,
        version: get("version")?,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(csv_err(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(ResultRow {
            experiment: field(&rec, 0)?,
            algorithm: field::<String>(&rec, 1)?.parse().map_err(csv_err)?,
            nstar: opt_field(&rec, 2)?,
            ms: field(&rec, 3)?,
            mc: field(&rec, 4)?,
            trials: field(&rec, 5)?,
            mr: field(&rec, 6)?,
            ahe: opt_field(&rec, 7)?,
            mean_time_s: field(&rec, 8)?,
        });
    }
    Ok((prov, rows))
}

/// F-COMP over F-OMP ratios at one `(Ms, Mc)` point. A ratio is `None` when
/// its denominator is zero or an AHE is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub ms: usize,
    pub mc: usize,
    pub time_ratio: Option<f64>,
    pub mr_ratio: Option<f64>,
    pub ahe_ratio: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

pub fn ratio_rows(result: &AggregateResult) -> Vec<RatioRow> {
    let mut points: Vec<usize> = result.entries.iter().map(|e| e.point_index).collect();
    points.dedup();
    points
        .into_iter()
        .filter_map(|pi| {
            let c = result.get(Algorithm::FComp, pi)?;
            let o = result.get(Algorithm::FOmp, pi)?;
            Some(RatioRow {
                ms: c.point.ms,
                mc: c.point.mc,
                time_ratio: ratio(c.mean_time, o.mean_time),
                mr_ratio: ratio(c.mean_mr, o.mean_mr),
                ahe_ratio: c.mean_ahe.zip(o.mean_ahe).and_then(|(a, b)| ratio(a, b)),
            })
        })
        .collect()
}

pub fn format_ratio_csv(prov: &Provenance, rows: &[RatioRow]) -> Result<String> {
    let mut out = format!(
        "# experiment={}\n# config_sha256={}\n# base_seed={}\n# version={}\n",
        prov.experiment, prov.config_digest, prov.base_seed, prov.version
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RATIO_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.ms.to_string(),
            r.mc.to_string(),
            fmt_opt(r.time_ratio.map(fmt_float)),
            fmt_opt(r.mr_ratio.map(fmt_float)),
            fmt_opt(r.ahe_ratio.map(fmt_float)),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(csv_err)?;
    out.push_str(std::str::from_utf8(&bytes).map_err(csv_err)?);
    Ok(out)
}

pub fn parse_ratio_csv(text: &str) -> Result<Vec<RatioRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_err)?;
        let opt = |i: usize| -> Result<Option<f64>> {
            match rec.get(i) {
                Some("") | None => Ok(None),
                Some(s) => s.parse().map(Some).map_err(csv_err),
            }
        };
        rows.push(RatioRow {
            ms: rec.get(0).unwrap_or("").parse().map_err(csv_err)?,
            mc: rec.get(1).unwrap_or("").parse().map_err(csv_err)?,
            time_ratio: opt(2)?,
            mr_ratio: opt(3)?,
            ahe_ratio: opt(4)?,
        });
    }
    Ok(rows)
}

/// A named yes/no trend check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub claim: String,
    pub holds: bool,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.claim, if self.holds { "yes" } else { "no" })
    }
}

fn point_indices(result: &AggregateResult) -> Vec<usize> {
    let mut p: Vec<usize> = result.entries.iter().map(|e| e.point_index).collect();
    p.sort_unstable();
    p.dedup();
    p
}

/// Trend checks that apply to whatever algorithms and points are present.
pub fn verdicts(result: &AggregateResult) -> Vec<Verdict> {
    let points = point_indices(result);
    let has = |a| result.entries.iter().any(|e| e.algorithm == a);
    let mut out = Vec::new();
    for (cont, grid) in [(Algorithm::Comp, Algorithm::Omp), (Algorithm::FComp, Algorithm::FOmp)] {
        if !(has(cont) && has(grid)) {
            continue;
        }
        let better = points.iter().all(|&pi| {
            let (c, g) = (result.get(cont, pi), result.get(grid, pi));
            matches!((c.and_then(|e| e.mean_ahe), g.and_then(|e| e.mean_ahe)), (Some(x), Some(y)) if x < y)
        });
        out.push(Verdict {
            claim: format!("AHE({cont}) < AHE({grid}) at all points"),
            holds: better,
        });
    }

    let first = result.entries.first().map(|e| e.point);
    let nstar_sweep = points.len() > 1
        && result.entries.iter().all(|e| {
            e.point.nstar().is_some() && first.is_some_and(|p| (p.ms, p.mc) == (e.point.ms, e.point.mc))
        });
    if nstar_sweep {
        for alg in Algorithm::ALL.into_iter().filter(|&a| has(a)) {
            let mut series: Vec<(usize, f64)> = result
                .entries
                .iter()
                .filter(|e| e.algorithm == alg)
                .map(|e| (e.point.nr, e.mean_mr))
                .collect();
            series.sort_by_key(|s| s.0);
            out.push(Verdict {
                claim: format!("MR({alg}) non-increasing in N*"),
                holds: series.windows(2).all(|w| w[1].1 <= w[0].1),
            });
        }
        if has(Algorithm::Comp) && has(Algorithm::FComp) {
            let last = result
                .entries
                .iter()
                .max_by_key(|e| e.point.nr)
                .map(|e| e.point_index)
                .unwrap_or(0);
            let slower = matches!(
                (result.get(Algorithm::Comp, last), result.get(Algorithm::FComp, last)),
                (Some(c), Some(f)) if c.mean_time > f.mean_time
            );
            out.push(Verdict {
                claim: "time(COMP) > time(F-COMP) at the largest N*".into(),
                holds: slower,
            });
        }
    }
    out
}

pub fn ratio_verdicts(rows: &[RatioRow]) -> Vec<Verdict> {
    let below_one = |f: fn(&RatioRow) -> Option<f64>| rows.iter().all(|r| f(r).is_some_and(|x| x < 1.0));
    vec![
        Verdict {
            claim: "MR(F-COMP)/MR(F-OMP) < 1 at all points".into(),
            holds: below_one(|r| r.mr_ratio),
        },
        Verdict {
            claim: "AHE(F-COMP)/AHE(F-OMP) < 1 at all points".into(),
            holds: below_one(|r| r.ahe_ratio),
        },
    ]
}

fn cell(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Human-readable table plus verdict lines.
pub fn summary(rows: &[ResultRow], ratios: &[RatioRow], verdicts: &[Verdict]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{:<8} {:>6} {:>5} {:>5} {:>6} {:>8} {:>8} {:>12}",
        "alg", "N*", "Ms", "Mc", "trials", "MR", "AHE", "time_s"
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            "{:<8} {:>6} {:>5} {:>5} {:>6} {:>8.4} {:>8} {:>12.4e}",
            r.algorithm.label(),
            r.nstar.map_or_else(|| "-".to_string(), |n| n.to_string()),
            r.ms,
            r.mc,
            r.trials,
            r.mr,
            cell(r.ahe),
            r.mean_time_s
        )
        .unwrap();
    }
    if !ratios.is_empty() {
        writeln!(s, "\n{:>5} {:>5} {:>10} {:>10} {:>10}", "Ms", "Mc", "time", "MR", "AHE").unwrap();
        for r in ratios {
            writeln!(
                s,
                "{:>5} {:>5} {:>10} {:>10} {:>10}",
                r.ms,
                r.mc,
                cell(r.time_ratio),
                cell(r.mr_ratio),
                cell(r.ahe_ratio)
            )
            .unwrap();
        }
    }
    if !verdicts.is_empty() {
        s.push('\n');
        for v in verdicts {
            writeln!(s, "{v}").unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: Algorithm, ahe: Option<f64>) -> ResultRow {
        ResultRow {
            experiment: "custom".into(),
            algorithm: alg,
            nstar: Some(16),
            ms: 16,
            mc: 16,
            trials: 3,
            mr: 1.0 / 3.0,
            ahe,
            mean_time_s: 1.234_567_890_123e-4,
        }
    }

    fn prov() -> Provenance {
        Provenance {
            experiment: "custom".into(),
            config_digest: "ab".repeat(32),
            base_seed: u64::MAX,
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_float(1.0 / 3.0), "3.33333333e-1");
        assert_eq!(fmt_float(0.0), "0.00000000e0");
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(Algorithm::Comp, Some(0.25)), row(Algorithm::FOmp, None)];
        let text = format_csv(&prov(), &rows).unwrap();
        assert!(text.lines().nth(4).unwrap().starts_with("experiment,algorithm,Nstar"));
        let (p, back) = parse_csv(&text).unwrap();
        assert_eq!(p, prov());
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].ahe, None);
        assert!((back[0].mr - rows[0].mr).abs() < 1e-8 * rows[0].mr);
        assert!((back[0].mean_time_s - rows[0].mean_time_s).abs() < 1e-8 * rows[0].mean_time_s);
    }

    #[test]
    fn wrong_header_is_rejected() {
        let text = format_csv(&prov(), &[]).unwrap().replace("Nstar", "N");
        assert!(parse_csv(&text).is_err());
    }

    #[test]
    fn ratio_round_trip() {
        let rows = vec![RatioRow {
            ms: 8,
            mc: 16,
            time_ratio: Some(1.25),
            mr_ratio: None,
            ahe_ratio: Some(0.5),
        }];
        let back = parse_ratio_csv(&format_ratio_csv(&prov(), &rows).unwrap()).unwrap();
        assert_eq!(back, rows);
        let v = ratio_verdicts(&rows);
        assert!(!v[0].holds && v[1].holds);
    }
}
