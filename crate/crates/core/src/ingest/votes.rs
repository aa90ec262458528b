//! Regional vote records and the region table they produce.
//!
//! CSV header `region,option,count`. Two option literals are reserved:
//! `__eligible__` gives the region's eligible population and `__rejected__`
//! its rejected ballots. Both abstainers and rejected ballots hold no stance.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::poll::parse_count;
use crate::error::{IngestError, ModelError};
use crate::filter::{Restrict, SubpopulationFilter, STANCE_ATTRIBUTE};
use crate::model::{StanceCounts, StanceSpace, NO_STANCE};

pub const ELIGIBLE_OPTION: &str = "__eligible__";
pub const REJECTED_OPTION: &str = "__rejected__";
/// Region id of the all-regions aggregate.
pub const ALL_REGIONS: &str = "__all__";
pub const REGION_ATTRIBUTE: &str = "region";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnoutMode {
    /// No-stance group is the rejected ballots only.
    #[default]
    BallotsOnly,
    /// No-stance group is everyone eligible who did not cast a valid vote.
    EligiblePopulation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionRow {
    pub region: String,
    pub counts: StanceCounts,
    pub eligible: Option<u64>,
    pub importance: Option<f64>,
}

/// Per-region stance counts for one topic, sorted by region id.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionTable {
    topic: String,
    space: Arc<StanceSpace>,
    rows: Vec<RegionRow>,
}

impl RegionTable {
    pub fn new(topic: impl Into<String>, space: Arc<StanceSpace>, mut rows: Vec<RegionRow>) -> Result<Self, IngestError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if row.region == ALL_REGIONS {
                return Err(IngestError::ReservedRegion(row.region.clone()));
            }
            if !seen.insert(row.region.as_str()) {
                return Err(IngestError::DuplicateStanceRow {
                    line: 0,
                    key: row.region.clone(),
                });
            }
            if *row.counts.space() != space {
                return Err(ModelError::SpaceMismatch.into());
            }
            if let Some(eligible) = row.eligible {
                let cast = row.counts.stanced();
                if eligible < cast {
                    return Err(IngestError::EligibleLessThanVotes {
                        region: row.region.clone(),
                        eligible,
                        cast,
                    });
                }
            }
        }
        rows.sort_by(|a, b| a.region.cmp(&b.region));
        Ok(Self {
            topic: topic.into(),
            space,
            rows,
        })
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn space(&self) -> &Arc<StanceSpace> {
        &self.space
    }

    pub fn rows(&self) -> &[RegionRow] {
        &self.rows
    }

    pub fn get(&self, region: &str) -> Option<&RegionRow> {
        self.rows.iter().find(|r| r.region == region)
    }

    /// Keep only the listed options as explicit stances; votes for every
    /// other option join the no-stance group.
    pub fn collapse_options<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self, ModelError> {
        let indices = keep
            .iter()
            .map(|id| {
                let id = id.as_ref();
                match self.space.index_of(id) {
                    Some(i) if i != NO_STANCE => Ok(i),
                    _ => Err(ModelError::UnknownStance(id.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let space = Arc::new(StanceSpace::exclusive(indices.iter().map(|&i| self.space.stances()[i - 1].clone()))?);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let explicit: Vec<u64> = indices.iter().map(|&i| row.counts.get(i)).collect();
                let moved = row.counts.population() - explicit.iter().sum::<u64>();
                Ok(RegionRow {
                    counts: StanceCounts::from_parts(space.clone(), moved, &explicit)?,
                    ..row.clone()
                })
            })
            .collect::<Result<Vec<_>, ModelError>>()?;
        Ok(Self {
            topic: self.topic.clone(),
            space,
            rows,
        })
    }

    /// Element-wise sum of every region, labelled [`ALL_REGIONS`].
    pub fn aggregate(&self) -> RegionRow {
        let mut counts = StanceCounts::zeros(self.space.clone());
        for row in &self.rows {
            counts = counts.checked_add(&row.counts).expect("rows share the table space");
        }
        let eligible = self
            .rows
            .iter()
            .map(|r| r.eligible)
            .sum::<Option<u64>>();
        RegionRow {
            region: ALL_REGIONS.to_string(),
            counts,
            eligible,
            importance: None,
        }
    }
}

impl Restrict for RegionTable {
    /// Understands `region` (row selection) and `stance` (group selection).
    fn restrict(&self, filter: &SubpopulationFilter) -> Result<Self, ModelError> {
        filter.check_attributes([REGION_ATTRIBUTE])?;
        let stance_only = match filter.allowed(STANCE_ATTRIBUTE) {
            Some(ids) => SubpopulationFilter::all().with(STANCE_ATTRIBUTE, ids.iter().cloned()),
            None => SubpopulationFilter::all(),
        };
        let mut rows = Vec::new();
        for row in &self.rows {
            if filter.matches_record(|k| (k == REGION_ATTRIBUTE).then_some(row.region.as_str())) {
                rows.push(RegionRow {
                    counts: row.counts.restrict(&stance_only)?,
                    ..row.clone()
                });
            }
        }
        Ok(Self { rows, ..self.clone() })
    }
}

#[derive(Default)]
struct RegionAccum {
    votes: HashMap<usize, u64>,
    eligible: Option<u64>,
    rejected: Option<u64>,
}

pub fn load_vote_records(path: &Path, mode: TurnoutMode) -> Result<RegionTable, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    let topic = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    read_vote_records(file, &topic, mode)
}

pub fn read_vote_records<R: Read>(reader: R, topic: &str, mode: TurnoutMode) -> Result<RegionTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let (region_col, option_col, count_col) = (column("region")?, column("option")?, column("count")?);

    let mut options: Vec<String> = Vec::new();
    let mut regions: Vec<String> = Vec::new();
    let mut accum: HashMap<String, RegionAccum> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let region = record.get(region_col).unwrap_or("");
        let option = record.get(option_col).unwrap_or("");
        if region.is_empty() || option.is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                reason: "empty region or option".into(),
            });
        }
        if region == ALL_REGIONS {
            return Err(IngestError::ReservedRegion(region.into()));
        }
        let count = parse_count(record.get(count_col).unwrap_or(""), line)?;
        let acc = accum.entry(region.to_string()).or_insert_with(|| {
            regions.push(region.to_string());
            RegionAccum::default()
        });
        let duplicate = || IngestError::DuplicateStanceRow {
            line,
            key: format!("{region}/{option}"),
        };
        let slot = match option {
            ELIGIBLE_OPTION => &mut acc.eligible,
            REJECTED_OPTION => &mut acc.rejected,
            _ => {
                let index = match options.iter().position(|o| o == option) {
                    Some(i) => i,
                    None => {
                        options.push(option.to_string());
                        options.len() - 1
                    }
                };
                if acc.votes.insert(index, count).is_some() {
                    return Err(duplicate());
                }
                continue;
            }
        };
        if slot.replace(count).is_some() {
            return Err(duplicate());
        }
    }
    if regions.is_empty() {
        return Err(IngestError::EmptyInput);
    }

    let space = Arc::new(StanceSpace::exclusive(options.iter().map(String::as_str))?);
    let mut rows = Vec::with_capacity(regions.len());
    for region in regions {
        let acc = &accum[&region];
        let explicit: Vec<u64> = (0..options.len()).map(|i| acc.votes.get(&i).copied().unwrap_or(0)).collect();
        let valid: u64 = explicit.iter().sum();
        let rejected = acc.rejected.unwrap_or(0);
        if let Some(eligible) = acc.eligible {
            if eligible < valid + rejected {
                return Err(IngestError::EligibleLessThanVotes {
                    region,
                    eligible,
                    cast: valid + rejected,
                });
            }
        }
        let no_stance = match mode {
            TurnoutMode::BallotsOnly => rejected,
            TurnoutMode::EligiblePopulation => {
                let eligible = acc.eligible.ok_or_else(|| IngestError::MissingEligible(region.clone()))?;
                eligible - valid
            }
        };
        rows.push(RegionRow {
            counts: StanceCounts::from_parts(space.clone(), no_stance, &explicit)?,
            eligible: acc.eligible,
            importance: None,
            region,
        });
    }
    RegionTable::new(topic, space, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::contention_exclusive;

    const CSV: &str = "region,option,count
Gibraltar,Remain,19322
Gibraltar,Leave,823
Gibraltar,__rejected__,27
Gibraltar,__eligible__,24119
Sunderland,Leave,82394
Sunderland,Remain,51930
Sunderland,__eligible__,134324
";

    #[test]
    fn ballots_only() {
        let table = read_vote_records(CSV.as_bytes(), "brexit", TurnoutMode::BallotsOnly).unwrap();
        assert_eq!(table.rows()[0].region, "Gibraltar");
        assert_eq!(table.rows()[0].counts.as_slice(), &[27, 19322, 823]);
        assert_eq!(table.get("Sunderland").unwrap().counts.as_slice(), &[0, 51930, 82394]);
        let all = table.aggregate();
        assert_eq!(all.counts.as_slice(), &[27, 71252, 83217]);
        assert_eq!(all.eligible, Some(24119 + 134324));
    }

    #[test]
    fn eligible_population() {
        let table = read_vote_records(CSV.as_bytes(), "brexit", TurnoutMode::EligiblePopulation).unwrap();
        let g = table.get("Gibraltar").unwrap();
        assert_eq!(g.counts.no_stance(), 24119 - 19322 - 823);
        assert_eq!(g.counts.population(), 24119);
        let s = table.get("Sunderland").unwrap();
        assert_eq!(s.counts.no_stance(), 0);
    }

    #[test]
    fn eligible_below_votes() {
        let csv = "region,option,count\nX,a,10\nX,b,10\nX,__eligible__,15\n";
        assert!(matches!(
            read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly),
            Err(IngestError::EligibleLessThanVotes { eligible: 15, cast: 20, .. })
        ));
    }

    #[test]
    fn missing_eligible() {
        let csv = "region,option,count\nX,a,10\nY,a,3\nY,__eligible__,5\n";
        assert!(matches!(
            read_vote_records(csv.as_bytes(), "t", TurnoutMode::EligiblePopulation),
            Err(IngestError::MissingEligible(r)) if r == "X"
        ));
        assert!(read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly).is_ok());
    }

    #[test]
    fn reserved_and_duplicate_rows() {
        let csv = "region,option,count\n__all__,a,1\n";
        assert!(matches!(
            read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly),
            Err(IngestError::ReservedRegion(_))
        ));
        let csv = "region,option,count\nX,a,1\nX,a,2\n";
        assert!(matches!(
            read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly),
            Err(IngestError::DuplicateStanceRow { .. })
        ));
    }

    #[test]
    fn unanimous_region() {
        let csv = "region,option,count\nX,a,10\nY,b,4\n";
        let table = read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly).unwrap();
        assert_eq!(table.get("X").unwrap().counts.as_slice(), &[0, 10, 0]);
        assert_eq!(contention_exclusive(&table.get("X").unwrap().counts).unwrap().raw, 0.0);
    }

    #[test]
    fn collapse_moves_other_options_to_no_stance() {
        let csv = "region,option,count\nX,a,10\nX,b,20\nX,c,5\nX,__rejected__,1\n";
        let table = read_vote_records(csv.as_bytes(), "t", TurnoutMode::BallotsOnly).unwrap();
        let two = table.collapse_options(&["b", "a"]).unwrap();
        assert_eq!(two.space().k(), 2);
        assert_eq!(two.rows()[0].counts.as_slice(), &[6, 20, 10]);
        assert!(matches!(table.collapse_options(&["z"]), Err(ModelError::UnknownStance(_))));
    }

    #[test]
    fn restrict_regions() {
        let table = read_vote_records(CSV.as_bytes(), "brexit", TurnoutMode::BallotsOnly).unwrap();
        let f = SubpopulationFilter::all().with(REGION_ATTRIBUTE, ["Sunderland"]);
        let only = table.restrict(&f).unwrap();
        assert_eq!(only.rows().len(), 1);
        let f = f.with(STANCE_ATTRIBUTE, ["Leave"]);
        let leave = table.restrict(&f).unwrap();
        assert_eq!(leave.rows()[0].counts.as_slice(), &[0, 0, 82394]);
        assert_eq!(table.restrict(&SubpopulationFilter::all()).unwrap(), table);
        assert!(table.restrict(&SubpopulationFilter::all().with("age", ["x"])).is_err());
    }
}
