//! Derived views: daily series, per-region tables, turnout adjustment and
//! contention-by-importance points.

use chrono::NaiveDate;
use serde::Serialize;

use crate::contention::{contention_exclusive_with, ContentionResult, Normalization};
use crate::error::AnalyticsError;
use crate::ingest::{DailySeries, PollTopic, RegionTable, ALL_REGIONS};
use crate::model::StanceCounts;

/// One day of a contention time series. `*_all` values cover the whole day
/// sample including the no-stance group; `*_stanced` only stance holders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub date: NaiveDate,
    pub n_all: Option<u64>,
    pub n_stanced: u64,
    pub k: usize,
    pub raw_all: Option<f64>,
    pub contention_all: Option<f64>,
    pub raw_stanced: Option<f64>,
    pub contention_stanced: Option<f64>,
}

pub fn timeseries(series: &DailySeries, mode: Normalization) -> Vec<SeriesPoint> {
    series
        .days()
        .keys()
        .map(|&date| {
            let all_counts = series.counts_all(date);
            let all = all_counts.as_ref().and_then(|c| contention_exclusive_with(c, mode).ok());
            let stanced_counts = series.counts_stanced(date).expect("date from series");
            let stanced = contention_exclusive_with(&stanced_counts, mode).ok();
            SeriesPoint {
                date,
                n_all: all_counts.as_ref().map(StanceCounts::population),
                n_stanced: stanced_counts.population(),
                k: series.space().k(),
                raw_all: all.as_ref().map(|r| r.raw),
                contention_all: all.as_ref().map(|r| r.normalized),
                raw_stanced: stanced.as_ref().map(|r| r.raw),
                contention_stanced: stanced.as_ref().map(|r| r.normalized),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionContention {
    pub region: String,
    pub result: ContentionResult,
}

/// Contention for every non-empty region, sorted by region id, followed by
/// the all-regions aggregate.
pub fn region_contention(table: &RegionTable, mode: Normalization) -> Vec<RegionContention> {
    let aggregate = table.aggregate();
    table
        .rows()
        .iter()
        .chain(std::iter::once(&aggregate))
        .filter_map(|row| {
            contention_exclusive_with(&row.counts, mode).ok().map(|result| RegionContention {
                region: row.region.clone(),
                result,
            })
        })
        .collect()
}

/// Replace the no-stance group with everyone eligible who holds no
/// explicit stance.
pub fn turnout_adjust(counts: &StanceCounts, eligible: u64) -> Result<StanceCounts, AnalyticsError> {
    let cast = counts.population();
    if eligible < cast {
        return Err(AnalyticsError::EligibleLessThanVotes { eligible, cast });
    }
    Ok(counts.with_no_stance(eligible - counts.stanced()))
}

/// Apply [`turnout_adjust`] to every row of a table that has an eligible
/// population. Rows without one are kept unchanged.
pub fn turnout_adjust_table(table: &RegionTable) -> Result<RegionTable, AnalyticsError> {
    let rows = table
        .rows()
        .iter()
        .map(|row| {
            let counts = match row.eligible {
                Some(e) => turnout_adjust(&row.counts, e)?,
                None => row.counts.clone(),
            };
            Ok(crate::ingest::RegionRow {
                counts,
                ..row.clone()
            })
        })
        .collect::<Result<Vec<_>, AnalyticsError>>()?;
    Ok(RegionTable::new(table.topic(), table.space().clone(), rows).expect("rows already validated"))
}

/// Declared bounds of an importance rating scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImportanceScale {
    min: f64,
    max: f64,
}

impl ImportanceScale {
    pub fn new(min: f64, max: f64) -> Result<Self, AnalyticsError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(AnalyticsError::InvalidScale { min, max });
        }
        Ok(Self { min, max })
    }

    pub fn rescale(&self, topic: &str, value: f64) -> Result<f64, AnalyticsError> {
        if !(self.min..=self.max).contains(&value) {
            return Err(AnalyticsError::ImportanceOutOfDeclaredRange {
                topic: topic.to_string(),
                value,
                min: self.min,
                max: self.max,
            });
        }
        Ok((value - self.min) / (self.max - self.min))
    }
}

/// A topic's stance counts with its importance rating on the source scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RatedTopic {
    pub topic: String,
    pub counts: StanceCounts,
    pub importance: Option<f64>,
    pub source: Option<String>,
}

impl From<PollTopic> for RatedTopic {
    fn from(t: PollTopic) -> Self {
        RatedTopic {
            topic: t.topic,
            counts: t.counts,
            importance: t.importance,
            source: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantPoint {
    pub topic: String,
    pub contention: f64,
    pub importance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantReject {
    pub topic: String,
    pub kind: &'static str,
    pub message: String,
}

/// Every input topic lands in exactly one of `points` or `rejects`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QuadrantReport {
    pub points: Vec<QuadrantPoint>,
    pub rejects: Vec<QuadrantReject>,
}

pub fn quadrant_points(topics: &[RatedTopic], scale: ImportanceScale, mode: Normalization) -> QuadrantReport {
    let mut report = QuadrantReport::default();
    for t in topics {
        let point = (|| {
            let raw = t.importance.ok_or_else(|| AnalyticsError::MissingImportance(t.topic.clone()))?;
            let importance = scale.rescale(&t.topic, raw)?;
            let contention = contention_exclusive_with(&t.counts, mode)?.normalized;
            Ok::<_, AnalyticsError>(QuadrantPoint {
                topic: t.topic.clone(),
                contention,
                importance,
                source: t.source.clone(),
            })
        })();
        match point {
            Ok(p) => report.points.push(p),
            Err(e) => report.rejects.push(QuadrantReject {
                topic: t.topic.clone(),
                kind: e.kind(),
                message: e.to_string(),
            }),
        }
    }
    report
}

/// True when `region` is the aggregate row id.
pub fn is_aggregate(region: &str) -> bool {
    region == ALL_REGIONS
}
