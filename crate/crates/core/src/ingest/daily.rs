//! Date-keyed stance counts.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use chrono::NaiveDate;

use super::poll::parse_count;
use crate::error::IngestError;
use crate::model::{StanceCounts, StanceSpace};

/// Tagged counts for one UTC day. `total` is the day's full sample size,
/// when known; the no-stance group is `total - Σ stanced`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayCounts {
    pub stanced: Vec<u64>,
    pub total: Option<u64>,
}

impl DayCounts {
    pub fn tagged(&self) -> u64 {
        self.stanced.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DailySeries {
    topic: String,
    space: Arc<StanceSpace>,
    days: BTreeMap<NaiveDate, DayCounts>,
}

impl DailySeries {
    pub fn new(topic: impl Into<String>, space: Arc<StanceSpace>) -> Self {
        Self {
            topic: topic.into(),
            space,
            days: BTreeMap::new(),
        }
    }

    /// Insert or replace a day, checking the partition invariant.
    pub fn insert(&mut self, date: NaiveDate, day: DayCounts) -> Result<(), IngestError> {
        if day.stanced.len() != self.space.k() {
            return Err(crate::error::ModelError::CountsLength {
                expected: self.space.k(),
                got: day.stanced.len(),
            }
            .into());
        }
        if let Some(total) = day.total {
            let tagged = day.tagged();
            if total < tagged {
                return Err(IngestError::TotalLessThanStanceCounts { date, total, tagged });
            }
        }
        self.days.insert(date, day);
        Ok(())
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn space(&self) -> &Arc<StanceSpace> {
        &self.space
    }

    pub fn days(&self) -> &BTreeMap<NaiveDate, DayCounts> {
        &self.days
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Counts over the whole day sample (g_0 estimated); `None` without a total.
    pub fn counts_all(&self, date: NaiveDate) -> Option<StanceCounts> {
        let day = self.days.get(&date)?;
        let total = day.total?;
        Some(self.counts(total - day.tagged(), &day.stanced))
    }

    /// Counts over the stance holders only.
    pub fn counts_stanced(&self, date: NaiveDate) -> Option<StanceCounts> {
        self.days.get(&date).map(|day| self.counts(0, &day.stanced))
    }

    fn counts(&self, no_stance: u64, stanced: &[u64]) -> StanceCounts {
        StanceCounts::from_parts(self.space.clone(), no_stance, stanced).expect("length checked on insert")
    }

    /// Write as CSV `date,total,<stance ids...>`; an unknown total is empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IngestError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string(), "total".to_string()];
        header.extend(self.space.stances().iter().map(|s| s.id.clone()));
        wtr.write_record(&header)?;
        for (date, day) in &self.days {
            let mut row = vec![date.to_string(), day.total.map_or_else(String::new, |t| t.to_string())];
            row.extend(day.stanced.iter().map(u64::to_string));
            wtr.write_record(&row)?;
        }
        wtr.flush().map_err(|e| IngestError::io(Path::new("<output>"), e))?;
        Ok(())
    }

    /// Read the layout produced by [`DailySeries::write_csv`].
    pub fn read_csv<R: Read>(reader: R, topic: &str) -> Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("date") || headers.get(1) != Some("total") {
            return Err(IngestError::MissingColumn("date,total".into()));
        }
        let space = Arc::new(StanceSpace::exclusive(headers.iter().skip(2))?);
        let mut series = DailySeries::new(topic, space);
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let date = parse_date(record.get(0).unwrap_or(""), line)?;
            let total = match record.get(1).unwrap_or("") {
                "" => None,
                t => Some(parse_count(t, line)?),
            };
            let stanced = record.iter().skip(2).map(|c| parse_count(c, line)).collect::<Result<Vec<_>, _>>()?;
            if series.days.contains_key(&date) {
                return Err(IngestError::DuplicateStanceRow {
                    line,
                    key: date.to_string(),
                });
            }
            series.insert(date, DayCounts { stanced, total })?;
        }
        Ok(series)
    }
}

fn parse_date(s: &str, line: u64) -> Result<NaiveDate, IngestError> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("bad date {s:?}"),
    })
}

/// Daily sample sizes from CSV `date,total`.
pub type DailyTotals = BTreeMap<NaiveDate, u64>;

pub fn load_daily_totals(path: &Path) -> Result<DailyTotals, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_daily_totals(file)
}

pub fn read_daily_totals<R: Read>(reader: R) -> Result<DailyTotals, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let (date_col, total_col) = (column("date")?, column("total")?);
    let mut totals = DailyTotals::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let date = parse_date(record.get(date_col).unwrap_or(""), line)?;
        let total = parse_count(record.get(total_col).unwrap_or(""), line)?;
        if totals.insert(date, total).is_some() {
            return Err(IngestError::DuplicateStanceRow {
                line,
                key: date.to_string(),
            });
        }
    }
    Ok(totals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn date(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn series() -> DailySeries {
        let space = Arc::new(StanceSpace::exclusive(["a", "b"]).unwrap());
        let mut s = DailySeries::new("t", space);
        s.insert(date("2016-06-23"), DayCounts { stanced: vec![30, 20], total: Some(1000) }).unwrap();
        s.insert(date("2016-06-24"), DayCounts { stanced: vec![5, 0], total: None }).unwrap();
        s
    }

    #[test]
    fn partition() {
        let s = series();
        let all = s.counts_all(date("2016-06-23")).unwrap();
        assert_eq!(all.as_slice(), &[950, 30, 20]);
        assert_eq!(all.population(), 1000);
        assert!(s.counts_all(date("2016-06-24")).is_none());
        assert_eq!(s.counts_stanced(date("2016-06-24")).unwrap().as_slice(), &[0, 5, 0]);
    }

    #[test]
    fn total_below_tagged() {
        let mut s = series();
        let err = s.insert(date("2016-06-25"), DayCounts { stanced: vec![20, 10], total: Some(10) }).unwrap_err();
        assert!(matches!(err, IngestError::TotalLessThanStanceCounts { total: 10, tagged: 30, .. }));
    }

    #[test]
    fn csv_round_trip() {
        let s = series();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "date,total,a,b\n2016-06-23,1000,30,20\n2016-06-24,,5,0\n");
        assert_eq!(DailySeries::read_csv(buf.as_slice(), "t").unwrap(), s);
    }

    #[test]
    fn totals_file() {
        let totals = read_daily_totals("date,total\n2016-06-23,1000\n2016-06-24,900\n".as_bytes()).unwrap();
        assert_eq!(totals[&date("2016-06-24")], 900);
        assert!(read_daily_totals("date,total\n2016-06-23,1\n2016-06-23,2\n".as_bytes()).is_err());
        assert!(read_daily_totals("date,total\n06/23/2016,1\n".as_bytes()).is_err());
    }
}
