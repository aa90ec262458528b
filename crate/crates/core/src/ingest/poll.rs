//! Poll topline CSV.
//!
//! Header `topic,stance,count`, or `topic,stance,percent` with the respondent
//! total in a `total` column or supplied by the caller. An optional
//! `importance` column carries a per-topic rating. The stance literal
//! `__none__` is the no-answer group.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use crate::error::IngestError;
use crate::model::{StanceCounts, StanceSpace, NO_STANCE_ID};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PollSchema {
    /// Respondent total for percentage rows lacking a `total` column.
    pub respondents: Option<u64>,
    /// Fail unless an `importance` column is present.
    pub require_importance: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PollTopic {
    pub topic: String,
    pub counts: StanceCounts,
    pub importance: Option<f64>,
}

#[derive(Default)]
struct TopicRows {
    stances: Vec<String>,
    values: Vec<Value>,
    none: Option<Value>,
    total: Option<u64>,
    importance: Option<f64>,
}

#[derive(Clone, Copy)]
enum Value {
    Count(u64),
    Percent(f64),
}

pub fn load_poll_topline(path: &Path, schema: PollSchema) -> Result<Vec<PollTopic>, IngestError> {
    let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_poll_topline(file, schema)
}

pub fn read_poll_topline<R: Read>(reader: R, schema: PollSchema) -> Result<Vec<PollTopic>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let topic_col = column("topic").ok_or_else(|| IngestError::MissingColumn("topic".into()))?;
    let stance_col = column("stance").ok_or_else(|| IngestError::MissingColumn("stance".into()))?;
    let count_col = column("count");
    let percent_col = column("percent");
    if count_col.is_none() && percent_col.is_none() {
        return Err(IngestError::MissingColumn("count".into()));
    }
    let total_col = column("total");
    let importance_col = column("importance");
    if schema.require_importance && importance_col.is_none() {
        return Err(IngestError::MissingColumn("importance".into()));
    }

    let mut order: Vec<String> = Vec::new();
    let mut topics: HashMap<String, TopicRows> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let topic = field(topic_col);
        let stance = field(stance_col);
        if topic.is_empty() || stance.is_empty() {
            return Err(IngestError::MalformedRow {
                line,
                reason: "empty topic or stance".into(),
            });
        }
        let value = match (count_col, percent_col) {
            (Some(c), _) if !field(c).is_empty() || percent_col.is_none() => Value::Count(parse_count(field(c), line)?),
            (_, Some(p)) => Value::Percent(parse_percent(field(p), line)?),
            _ => unreachable!(),
        };

        let rows = topics.entry(topic.to_string()).or_insert_with(|| {
            order.push(topic.to_string());
            TopicRows::default()
        });
        if let Some(t) = total_col.map(field).filter(|s| !s.is_empty()) {
            let t = parse_count(t, line)?;
            if rows.total.is_some_and(|prev| prev != t) {
                return Err(IngestError::MalformedRow {
                    line,
                    reason: format!("conflicting respondent totals for topic {topic:?}"),
                });
            }
            rows.total = Some(t);
        }
        if let Some(imp) = importance_col.map(field).filter(|s| !s.is_empty()) {
            let imp: f64 = imp.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| IngestError::MalformedRow {
                line,
                reason: format!("bad importance {imp:?}"),
            })?;
            if rows.importance.is_some_and(|prev| prev != imp) {
                return Err(IngestError::MalformedRow {
                    line,
                    reason: format!("conflicting importance for topic {topic:?}"),
                });
            }
            rows.importance = Some(imp);
        }

        let duplicate = || IngestError::DuplicateStanceRow {
            line,
            key: format!("{topic}/{stance}"),
        };
        if stance == NO_STANCE_ID {
            if rows.none.is_some() {
                return Err(duplicate());
            }
            rows.none = Some(value);
        } else {
            if rows.stances.iter().any(|s| s == stance) {
                return Err(duplicate());
            }
            rows.stances.push(stance.to_string());
            rows.values.push(value);
        }
    }
    if order.is_empty() {
        return Err(IngestError::EmptyInput);
    }

    order
        .into_iter()
        .map(|topic| {
            let rows = topics.remove(&topic).expect("topic recorded");
            let total = rows.total.or(schema.respondents);
            let to_count = |v: Value| -> Result<u64, IngestError> {
                match v {
                    Value::Count(c) => Ok(c),
                    Value::Percent(p) => {
                        let total = total.ok_or_else(|| IngestError::MissingTotal { topic: topic.clone() })?;
                        Ok((p / 100.0 * total as f64).round_ties_even() as u64)
                    }
                }
            };
            let none = rows.none.map(to_count).transpose()?.unwrap_or(0);
            let explicit = rows.values.into_iter().map(to_count).collect::<Result<Vec<_>, _>>()?;
            let space = Arc::new(StanceSpace::exclusive(rows.stances)?);
            Ok(PollTopic {
                counts: StanceCounts::from_parts(space, none, &explicit)?,
                topic,
                importance: rows.importance,
            })
        })
        .collect()
}

pub(crate) fn parse_count(s: &str, line: u64) -> Result<u64, IngestError> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<i64>() {
        Ok(v) if v < 0 => Err(IngestError::NegativeCount {
            line,
            value: s.to_string(),
        }),
        _ => Err(IngestError::MalformedRow {
            line,
            reason: format!("bad count {s:?}"),
        }),
    }
}

fn parse_percent(s: &str, line: u64) -> Result<f64, IngestError> {
    let s = s.trim_end_matches('%');
    match s.parse::<f64>() {
        Ok(v) if v < 0.0 => Err(IngestError::NegativeCount {
            line,
            value: s.to_string(),
        }),
        Ok(v) if v.is_finite() && v <= 100.0 => Ok(v),
        _ => Err(IngestError::MalformedRow {
            line,
            reason: format!("bad percentage {s:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contention::contention_exclusive;

    fn read(s: &str) -> Result<Vec<PollTopic>, IngestError> {
        read_poll_topline(s.as_bytes(), PollSchema::default())
    }

    #[test]
    fn evolution_topline() {
        let topics = read("topic,stance,count\nevolution,evolved,98\nevolution,present_form,2\nevolution,__none__,0\n").unwrap();
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].counts.as_slice(), &[0, 98, 2]);
        let r = contention_exclusive(&topics[0].counts).unwrap();
        assert!((r.normalized - 0.0784).abs() < 1e-12);
    }

    #[test]
    fn single_stance_topic() {
        let topics = read("topic,stance,count\nparks,yes,10\nparks,__none__,3\n").unwrap();
        assert_eq!(contention_exclusive(&topics[0].counts).unwrap().raw, 0.0);
    }

    #[test]
    fn topics_keep_file_order() {
        let topics = read("topic,stance,count\nb,x,1\na,x,1\nb,y,2\n").unwrap();
        let names: Vec<_> = topics.iter().map(|t| t.topic.as_str()).collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(topics[0].counts.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn contract_violations() {
        assert!(matches!(
            read("topic,stance,count\nt,a,-5\n"),
            Err(IngestError::NegativeCount { line: 2, .. })
        ));
        assert!(matches!(read("topic,stance,count\nt,a,x\n"), Err(IngestError::MalformedRow { .. })));
        assert!(matches!(
            read("topic,stance,count\nt,a,1\nt,a,2\n"),
            Err(IngestError::DuplicateStanceRow { line: 3, .. })
        ));
        assert!(matches!(read("topic,stance,count\n"), Err(IngestError::EmptyInput)));
        assert!(matches!(read("topic,count\nt,1\n"), Err(IngestError::MissingColumn(_))));
        assert!(matches!(
            read("topic,stance,percent\nt,a,60\nt,b,40\n"),
            Err(IngestError::MissingTotal { .. })
        ));
    }

    #[test]
    fn percentages_round_half_to_even() {
        // 12.5% and 37.5% of 4 respondents land exactly on .5.
        let topics = read("topic,stance,percent,total\nt,a,12.5,4\nt,b,37.5,4\nt,__none__,50,4\n").unwrap();
        assert_eq!(topics[0].counts.as_slice(), &[2, 0, 2]);
        let topics = read_poll_topline(
            "topic,stance,percent\nt,a,51.9\nt,b,48.1\n".as_bytes(),
            PollSchema {
                respondents: Some(1000),
                ..PollSchema::default()
            },
        )
        .unwrap();
        assert_eq!(topics[0].counts.as_slice(), &[0, 519, 481]);
    }

    #[test]
    fn importance_column() {
        let topics = read("topic,stance,count,importance\nt,a,1,7\nt,b,1,7\nu,a,1,\nu,b,2,\n").unwrap();
        assert_eq!(topics[0].importance, Some(7.0));
        assert_eq!(topics[1].importance, None);
        assert!(read("topic,stance,count,importance\nt,a,1,7\nt,b,1,8\n").is_err());
        let strict = PollSchema {
            require_importance: true,
            ..PollSchema::default()
        };
        let err = read_poll_topline("topic,stance,count\nt,a,1\n".as_bytes(), strict).unwrap_err();
        assert_eq!(err.kind(), "MissingImportance");
    }
}
