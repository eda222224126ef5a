//! Report shapes built from one or more [`MetricsReport`]s: top-k biased
//! subject/attribute rows and cross-model subject sentiment ranks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MetricsReport;
use crate::template::ProbeConfig;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("k must be at least 1")]
    InvalidK,
    #[error("metric report has no subject/attribute rows")]
    EmptyReport,
    #[error("at least one metric report is required")]
    NoReports,
    #[error("subject {0:?} has no class label; pass the probe configuration")]
    MissingClass(String),
    #[error(
        "subject sets differ between {first} and {other}; symmetric difference: {difference:?}"
    )]
    SubjectMismatch {
        first: String,
        other: String,
        difference: Vec<String>,
    },
    #[error("metric versions differ: {0:?}")]
    VersionMismatch(Vec<String>),
    #[error("failed to write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to write csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    /// One global ranking over (subject, attribute) rows.
    None,
    /// Per subject class, attributes ranked by class-mean gamma.
    Class,
}

/// Subject classes and attribute categories taken from a probe configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub classes: BTreeMap<String, String>,
    pub categories: BTreeMap<String, String>,
}

impl Labels {
    pub fn from_config(config: &ProbeConfig) -> Self {
        Labels {
            classes: config
                .subjects
                .iter()
                .map(|s| (s.id.clone(), s.class_label.clone()))
                .collect(),
            categories: config
                .attributes
                .iter()
                .map(|a| (a.id.clone(), a.category.clone()))
                .collect(),
        }
    }

    fn attribute_label(&self, attribute: &str, anonymize: bool) -> String {
        if anonymize {
            if let Some(c) = self.categories.get(attribute).filter(|c| !c.is_empty()) {
                return c.clone();
            }
        }
        attribute.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    /// Subject class when grouping by class.
    pub group: Option<String>,
    /// Absent when rows are aggregated over a class.
    pub subject_id: Option<String>,
    pub attribute_id: String,
    /// Attribute id, or its category when anonymized.
    pub attribute: String,
    pub gamma: f64,
    pub eta: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRows {
    pub model_id: String,
    pub metric_version: String,
    pub theta: f64,
    pub rows: Vec<RankedRow>,
}

fn by_gamma_desc(a: &(f64, String, String), b: &(f64, String, String)) -> std::cmp::Ordering {
    b.0.total_cmp(&a.0)
        .then_with(|| a.1.cmp(&b.1))
        .then_with(|| a.2.cmp(&b.2))
}

/// The `k` highest-gamma rows, globally or per subject class. Ties are broken
/// by subject id, then attribute id.
pub fn top_k(
    report: &MetricsReport,
    group_by: GroupBy,
    k: usize,
    labels: &Labels,
    anonymize: bool,
) -> Result<RankedRows, ReportError> {
    if k == 0 {
        return Err(ReportError::InvalidK);
    }
    if report.rows.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    let mut rows = Vec::new();
    match group_by {
        GroupBy::None => {
            let eta: BTreeMap<(&str, &str), f64> = report
                .rows
                .iter()
                .map(|r| ((r.subject_id.as_str(), r.attribute_id.as_str()), r.eta))
                .collect();
            let mut keyed: Vec<(f64, String, String)> = report
                .rows
                .iter()
                .map(|r| (r.gamma, r.subject_id.clone(), r.attribute_id.clone()))
                .collect();
            keyed.sort_by(by_gamma_desc);
            for (i, (gamma, subject, attribute)) in keyed.into_iter().take(k).enumerate() {
                rows.push(RankedRow {
                    group: None,
                    eta: eta[&(subject.as_str(), attribute.as_str())],
                    attribute: labels.attribute_label(&attribute, anonymize),
                    subject_id: Some(subject),
                    attribute_id: attribute,
                    gamma,
                    rank: i + 1,
                });
            }
        }
        GroupBy::Class => {
            // class -> attribute -> (sum gamma, sum eta, subjects)
            let mut cells: BTreeMap<String, BTreeMap<String, (f64, f64, usize)>> = BTreeMap::new();
            for r in &report.rows {
                let class = labels
                    .classes
                    .get(&r.subject_id)
                    .ok_or_else(|| ReportError::MissingClass(r.subject_id.clone()))?;
                let cell = cells
                    .entry(class.clone())
                    .or_default()
                    .entry(r.attribute_id.clone())
                    .or_insert((0.0, 0.0, 0));
                cell.0 += r.gamma;
                cell.1 += r.eta;
                cell.2 += 1;
            }
            for (class, attributes) in cells {
                let eta: BTreeMap<&str, f64> = attributes
                    .iter()
                    .map(|(a, (_, e, n))| (a.as_str(), e / *n as f64))
                    .collect();
                let mut keyed: Vec<(f64, String, String)> = attributes
                    .iter()
                    .map(|(a, (g, _, n))| (g / *n as f64, String::new(), a.clone()))
                    .collect();
                keyed.sort_by(by_gamma_desc);
                for (i, (gamma, _, attribute)) in keyed.into_iter().take(k).enumerate() {
                    rows.push(RankedRow {
                        group: Some(class.clone()),
                        subject_id: None,
                        eta: eta[attribute.as_str()],
                        attribute: labels.attribute_label(&attribute, anonymize),
                        attribute_id: attribute,
                        gamma,
                        rank: i + 1,
                    });
                }
            }
        }
    }
    Ok(RankedRows {
        model_id: report.summary.model_id.clone(),
        metric_version: report.metric_version.clone(),
        theta: report.theta,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossModelRank {
    pub subject_id: String,
    pub mean_rank: f64,
    /// Population standard deviation of `per_model_ranks`.
    pub stddev_rank: f64,
    /// Rank in each model, in the order of [`CrossModelRanks::models`].
    pub per_model_ranks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossModelRanks {
    pub metric_version: String,
    /// Distinct thresholds used by the input reports.
    pub thetas: Vec<f64>,
    pub models: Vec<String>,
    /// Sorted by mean rank, ties by subject id.
    pub ranks: Vec<CrossModelRank>,
}

/// Ranks subjects by gamma(x) descending within each model (rank 1 = largest
/// gamma, ties by subject id) and summarizes each subject's ranks.
pub fn sentiment_ranking(reports: &[MetricsReport]) -> Result<CrossModelRanks, ReportError> {
    let first = reports.first().ok_or(ReportError::NoReports)?;
    let versions: BTreeSet<&str> = reports.iter().map(|r| r.metric_version.as_str()).collect();
    if versions.len() > 1 {
        return Err(ReportError::VersionMismatch(
            versions.into_iter().map(String::from).collect(),
        ));
    }
    let subjects = |r: &MetricsReport| -> BTreeSet<String> {
        r.subjects.iter().map(|s| s.subject_id.clone()).collect()
    };
    let reference = subjects(first);
    if reference.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    for other in &reports[1..] {
        let theirs = subjects(other);
        if theirs != reference {
            return Err(ReportError::SubjectMismatch {
                first: first.summary.model_id.clone(),
                other: other.summary.model_id.clone(),
                difference: reference.symmetric_difference(&theirs).cloned().collect(),
            });
        }
    }

    let mut per_subject: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for report in reports {
        let mut order: Vec<(f64, &str)> = report
            .subjects
            .iter()
            .map(|s| (s.gamma, s.subject_id.as_str()))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        for (i, (_, subject)) in order.into_iter().enumerate() {
            per_subject
                .entry(subject.to_string())
                .or_default()
                .push(i + 1);
        }
    }
    let n = reports.len() as f64;
    let mut ranks: Vec<CrossModelRank> = per_subject
        .into_iter()
        .map(|(subject_id, per_model_ranks)| {
            let mean = per_model_ranks.iter().map(|&r| r as f64).sum::<f64>() / n;
            let var = per_model_ranks
                .iter()
                .map(|&r| (r as f64 - mean).powi(2))
                .sum::<f64>()
                / n;
            CrossModelRank {
                subject_id,
                mean_rank: mean,
                stddev_rank: var.sqrt(),
                per_model_ranks,
            }
        })
        .collect();
    ranks.sort_by(|a, b| {
        a.mean_rank
            .total_cmp(&b.mean_rank)
            .then_with(|| a.subject_id.cmp(&b.subject_id))
    });

    let mut thetas: Vec<f64> = Vec::new();
    for r in reports {
        if !thetas.contains(&r.theta) {
            thetas.push(r.theta);
        }
    }
    Ok(CrossModelRanks {
        metric_version: first.metric_version.clone(),
        thetas,
        models: reports.iter().map(|r| r.summary.model_id.clone()).collect(),
        ranks,
    })
}

impl CrossModelRanks {
    /// Keeps only the `n` best and `n` worst mean ranks; `n = 0` keeps all.
    pub fn trimmed(mut self, n: usize) -> Self {
        if n > 0 && self.ranks.len() > 2 * n {
            let tail = self.ranks.split_off(self.ranks.len() - n);
            self.ranks.truncate(n);
            self.ranks.extend(tail);
        }
        self
    }

    fn theta_label(&self) -> String {
        self.thetas
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            "subject_id".to_string(),
            "mean_rank".into(),
            "stddev_rank".into(),
        ];
        header.extend(self.models.iter().map(|m| format!("rank:{m}")));
        header.extend(["metric_version".to_string(), "theta".into()]);
        w.write_record(&header)?;
        let theta = self.theta_label();
        for r in &self.ranks {
            let mut record = vec![
                r.subject_id.clone(),
                r.mean_rank.to_string(),
                r.stddev_rank.to_string(),
            ];
            record.extend(r.per_model_ranks.iter().map(usize::to_string));
            record.extend([self.metric_version.clone(), theta.clone()]);
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl RankedRows {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ReportError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "group",
            "rank",
            "subject_id",
            "attribute",
            "gamma",
            "eta",
            "model_id",
            "metric_version",
            "theta",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.group.clone().unwrap_or_default(),
                r.rank.to_string(),
                r.subject_id.clone().unwrap_or_default(),
                r.attribute.clone(),
                r.gamma.to_string(),
                r.eta.to_string(),
                self.model_id.clone(),
                self.metric_version.clone(),
                self.theta.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Left-aligned text table with a one-line caption.
fn write_table(
    f: &mut fmt::Formatter<'_>,
    caption: &str,
    header: &[String],
    rows: &[Vec<String>],
) -> fmt::Result {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    writeln!(f, "{caption}")?;
    let line = |f: &mut fmt::Formatter<'_>, cells: &[String]| {
        let text: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        writeln!(f, "{}", text.join("  ").trim_end())
    };
    line(f, header)?;
    line(
        f,
        &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>(),
    )?;
    for row in rows {
        line(f, row)?;
    }
    Ok(())
}

impl fmt::Display for RankedRows {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let caption = format!(
            "model {} | {} | theta {}",
            self.model_id, self.metric_version, self.theta
        );
        let header: Vec<String> = ["group", "rank", "subject", "attribute", "gamma", "eta"]
            .map(String::from)
            .to_vec();
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.group.clone().unwrap_or_else(|| "-".into()),
                    r.rank.to_string(),
                    r.subject_id.clone().unwrap_or_else(|| "-".into()),
                    r.attribute.clone(),
                    format!("{:.4}", r.gamma),
                    format!("{:.4}", r.eta),
                ]
            })
            .collect();
        write_table(f, &caption, &header, &rows)
    }
}

impl fmt::Display for CrossModelRanks {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let caption = format!(
            "{} models | {} | theta {}",
            self.models.len(),
            self.metric_version,
            self.theta_label()
        );
        let mut header: Vec<String> = ["subject", "mean rank", "stddev"]
            .map(String::from)
            .to_vec();
        header.extend(self.models.iter().cloned());
        let rows: Vec<Vec<String>> = self
            .ranks
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.subject_id.clone(),
                    format!("{:.2}", r.mean_rank),
                    format!("{:.2}", r.stddev_rank),
                ];
                row.extend(r.per_model_ranks.iter().map(usize::to_string));
                row
            })
            .collect();
        write_table(f, &caption, &header, &rows)
    }
}
