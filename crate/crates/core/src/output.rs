//! Result rows, CSV files and summaries.

use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::coexistence::Strategy;
use crate::error::{Result, SimError};
use crate::precoder::PrecoderScheme;
use crate::scenario::ServiceClass;
use crate::stats::{ecdf, quantile_sorted};
use crate::urllc::availability;

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const ECDF_FILE: &str = "ecdf.csv";
pub const CONFIG_FILE: &str = "config.json";

pub const RESULTS_HEADER: [&str; 9] = ["drop", "ue", "class", "strategy", "precoder", "policy", "metric", "value", "seed"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    /// Per-UE eMBB spectral efficiency, averaged over blocks.
    Se,
    /// eMBB sum spectral efficiency, averaged over blocks.
    SumSe,
    /// Fraction of blocks whose eMBB sum SE is zero.
    Outage,
    /// Per-UE URLLC error probability, averaged over active slots.
    Eps,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Se => "se",
            Metric::SumSe => "sum_se",
            Metric::Outage => "outage",
            Metric::Eps => "eps",
        }
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "se" => Ok(Metric::Se),
            "sum_se" => Ok(Metric::SumSe),
            "outage" => Ok(Metric::Outage),
            "eps" => Ok(Metric::Eps),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of `results.csv`. `ue = None` marks network-wide metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub drop: u64,
    pub ue: Option<usize>,
    pub class: ServiceClass,
    pub strategy: Strategy,
    pub precoder: PrecoderScheme,
    pub policy: String,
    pub metric: Metric,
    pub value: f64,
    pub seed: String,
}

/// Nine significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_HEADER)?;
    for r in rows {
        let ue = r.ue.map_or_else(|| "all".to_string(), |k| k.to_string());
        w.write_record([
            r.drop.to_string().as_str(),
            &ue,
            r.class.as_str(),
            r.strategy.as_str(),
            r.precoder.as_str(),
            &r.policy,
            r.metric.as_str(),
            &format_value(r.value),
            &r.seed,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(SimError::Results(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let bad = |line: usize, what: &str| SimError::Results(format!("row {line}: bad {what}"));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let class = match &rec[2] {
            "embb" => ServiceClass::Embb,
            "urllc" => ServiceClass::Urllc,
            _ => return Err(bad(line, "class")),
        };
        rows.push(ResultRow {
            drop: rec[0].parse().map_err(|_| bad(line, "drop"))?,
            ue: match &rec[1] {
                "all" => None,
                k => Some(k.parse().map_err(|_| bad(line, "ue"))?),
            },
            class,
            strategy: rec[3].parse().map_err(|_| bad(line, "strategy"))?,
            precoder: rec[4].parse().map_err(|_| bad(line, "precoder"))?,
            policy: rec[5].to_string(),
            metric: rec[6].parse().map_err(|_| bad(line, "metric"))?,
            value: rec[7].parse().map_err(|_| bad(line, "value"))?,
            seed: rec[8].to_string(),
        });
    }
    Ok(rows)
}

/// Grouping key of summaries: (metric, strategy, precoder, policy).
pub type GroupKey = (Metric, Strategy, PrecoderScheme, String);

/// Values of `metric` per (strategy, precoder, policy), in row order.
pub fn group_values(rows: &[ResultRow], metric: Metric) -> BTreeMap<GroupKey, Vec<f64>> {
    let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        groups
            .entry((r.metric, r.strategy, r.precoder, r.policy.clone()))
            .or_default()
            .push(r.value);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub metric: String,
    pub strategy: String,
    pub precoder: String,
    pub policy: String,
    pub stat: String,
    pub value: f64,
}

/// Empirical-CDF points per group.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfRow {
    pub key: GroupKey,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    pub ecdf: Vec<EcdfRow>,
}

impl Summary {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, metric: &str, strategy: Strategy, precoder: PrecoderScheme, policy: &str, stat: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.metric == metric
                    && r.strategy == strategy.as_str()
                    && r.precoder == precoder.as_str()
                    && r.policy == policy
                    && r.stat == stat
            })
            .map(|r| r.value)
    }
}

/// Quantiles of `sum_se`, `se` and `eps`, mean outage and URLLC
/// availability at `eps_target` per (strategy, precoder, policy).
pub fn summarize(rows: &[ResultRow], eps_target: f64) -> Summary {
    let mut out = Vec::new();
    let mut curves = Vec::new();
    for metric in [Metric::Se, Metric::SumSe, Metric::Outage, Metric::Eps] {
        for (key, mut values) in group_values(rows, metric) {
            let push = |out: &mut Vec<SummaryRow>, stat: &str, value: f64| {
                out.push(SummaryRow {
                    metric: key.0.as_str().into(),
                    strategy: key.1.as_str().into(),
                    precoder: key.2.as_str().into(),
                    policy: key.3.clone(),
                    stat: stat.into(),
                    value,
                })
            };
            push(&mut out, "count", values.len() as f64);
            push(&mut out, "mean", values.iter().sum::<f64>() / values.len() as f64);
            if metric == Metric::Eps {
                push(&mut out, "availability", availability(&values, eps_target).unwrap_or(f64::NAN));
            }
            values.sort_by(f64::total_cmp);
            for (stat, q) in [("min", 0.0), ("q25", 0.25), ("median", 0.5), ("q75", 0.75), ("max", 1.0)] {
                push(&mut out, stat, quantile_sorted(&values, q));
            }
            if matches!(metric, Metric::SumSe | Metric::Eps) {
                for (x, p) in ecdf(&values) {
                    curves.push(EcdfRow { key: key.clone(), x, p });
                }
            }
        }
    }
    Summary { rows: out, ecdf: curves }
}

/// Writes `summary.csv` and `ecdf.csv` into `dir`. An empty summary is
/// written as a single `empty` marker row.
pub fn write_summary(dir: &Path, summary: &Summary) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(SUMMARY_FILE))?;
    w.write_record(["metric", "strategy", "precoder", "policy", "stat", "value"])?;
    if summary.is_empty() {
        w.write_record(["none", "", "", "", "empty", "0"])?;
    }
    for r in &summary.rows {
        w.write_record([&r.metric, &r.strategy, &r.precoder, &r.policy, &r.stat, &format_value(r.value)])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join(ECDF_FILE))?;
    w.write_record(["metric", "strategy", "precoder", "policy", "x", "p"])?;
    for r in &summary.ecdf {
        w.write_record([
            r.key.0.as_str(),
            r.key.1.as_str(),
            r.key.2.as_str(),
            &r.key.3,
            &format_value(r.x),
            &format_value(r.p),
        ])?;
    }
    w.flush()?;
    Ok(())
}
