//! JSON-lines tweet streams bucketed into daily stance counts.
//!
//! Each line is `{"id": "...", "ts": "<ISO-8601 with offset>", "user": "...",
//! "hashtags": ["..."]}`. Lines are read in batches and each batch is split
//! into shards counted in parallel; shard results merge by addition, so the
//! output does not depend on thread count or shard order.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, FixedOffset, NaiveDate, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::daily::{DailySeries, DailyTotals, DayCounts};
use super::lexicon::{StanceLexicon, StanceTag};
use crate::error::IngestError;

const BATCH_LINES: usize = 1 << 16;
const SHARD_LINES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetRecord {
    pub id: String,
    pub ts: DateTime<Utc>,
    pub user: String,
    pub hashtags: Vec<String>,
}

#[derive(Deserialize)]
struct RawTweet<'a> {
    #[serde(borrow)]
    id: Cow<'a, str>,
    #[serde(borrow)]
    ts: Cow<'a, str>,
    #[serde(borrow)]
    user: Cow<'a, str>,
    #[serde(borrow, default)]
    hashtags: Vec<Cow<'a, str>>,
}

/// Parse an ISO-8601 instant carrying a UTC offset.
pub fn parse_timestamp(s: &str) -> Result<DateTime<Utc>, IngestError> {
    DateTime::parse_from_rfc3339(s)
        .or_else(|_| DateTime::<FixedOffset>::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f%z"))
        .or_else(|_| DateTime::<FixedOffset>::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f%z"))
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| IngestError::UnparseableTimestamp(s.to_string()))
}

impl TweetRecord {
    pub fn parse(line: &str) -> Result<Self, IngestError> {
        let raw: RawTweet = serde_json::from_str(line)?;
        Ok(Self {
            ts: parse_timestamp(&raw.ts)?,
            id: raw.id.into_owned(),
            user: raw.user.into_owned(),
            hashtags: raw.hashtags.into_iter().map(Cow::into_owned).collect(),
        })
    }

    /// UTC calendar day of the tweet.
    pub fn date(&self) -> NaiveDate {
        self.ts.date_naive()
    }
}

pub fn tag_tweet_stance(tweet: &TweetRecord, lexicon: &StanceLexicon) -> StanceTag {
    lexicon.tag(&tweet.hashtags)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingMode {
    /// Each tagged tweet counts once.
    #[default]
    Tweets,
    /// Each user counts once per day; users who used conflicting stances
    /// anywhere in the input hold no stance.
    Users,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbiguityPolicy {
    /// Cross-stance tweets are treated as holding no stance.
    #[default]
    Abstain,
    /// Cross-stance tweets abort the build.
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub counting: CountingMode,
    pub ambiguity: AmbiguityPolicy,
    /// Largest tolerated fraction of unparseable lines.
    pub error_budget: f64,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            counting: CountingMode::Tweets,
            ambiguity: AmbiguityPolicy::Abstain,
            error_budget: 0.001,
            threads: 0,
        }
    }
}

/// What happened while reading the stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IngestSummary {
    pub lines: u64,
    pub parse_errors: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_error: Option<String>,
    /// Tagged tweets per stance id, in stance order.
    pub tagged: Vec<(String, u64)>,
    pub untagged: u64,
    pub ambiguous: u64,
    /// Users excluded for posting conflicting stances (user counting only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixed_users: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyBuild {
    pub series: DailySeries,
    pub summary: IngestSummary,
}

// (source index, 1-based line) orders events deterministically across shards.
type Position = (usize, u64);

#[derive(Debug, Clone)]
struct UserState {
    stance: usize,
    mixed: bool,
    days: BTreeSet<NaiveDate>,
}

#[derive(Debug, Default)]
struct Partial {
    lines: u64,
    parse_errors: u64,
    first_error: Option<(Position, String)>,
    untagged: u64,
    ambiguous: u64,
    first_ambiguous: Option<(Position, String)>,
    // Indexed by stance, slot 0 unused.
    tagged: Vec<u64>,
    days: BTreeMap<NaiveDate, Vec<u64>>,
    seen_days: BTreeSet<NaiveDate>,
    users: HashMap<String, UserState>,
}

fn earliest(a: Option<(Position, String)>, b: Option<(Position, String)>) -> Option<(Position, String)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
        (x, y) => x.or(y),
    }
}

impl Partial {
    fn new(k: usize) -> Self {
        Self {
            tagged: vec![0; k + 1],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Partial) -> Partial {
        self.lines += other.lines;
        self.parse_errors += other.parse_errors;
        self.first_error = earliest(self.first_error, other.first_error);
        self.untagged += other.untagged;
        self.ambiguous += other.ambiguous;
        self.first_ambiguous = earliest(self.first_ambiguous, other.first_ambiguous);
        for (a, b) in self.tagged.iter_mut().zip(other.tagged) {
            *a += b;
        }
        for (date, counts) in other.days {
            let slot = self.days.entry(date).or_insert_with(|| vec![0; counts.len()]);
            for (a, b) in slot.iter_mut().zip(counts) {
                *a += b;
            }
        }
        self.seen_days.extend(other.seen_days);
        for (user, state) in other.users {
            match self.users.get_mut(&user) {
                Some(mine) => {
                    mine.mixed |= state.mixed || mine.stance != state.stance;
                    mine.days.extend(state.days);
                }
                None => {
                    self.users.insert(user, state);
                }
            }
        }
        self
    }

    fn record_error(&mut self, pos: Position, err: IngestError) {
        self.parse_errors += 1;
        if self.first_error.as_ref().is_none_or(|(p, _)| pos < *p) {
            let message = match err {
                IngestError::MalformedRow { .. } => err.to_string(),
                _ => format!("line {}: {err}", pos.1),
            };
            self.first_error = Some((pos, message));
        }
    }

    fn process(&mut self, pos: Position, line: &[u8], lexicon: &StanceLexicon, counting: CountingMode) {
        let text = match std::str::from_utf8(line) {
            Ok(t) => t.trim(),
            Err(_) => {
                self.lines += 1;
                return self.record_error(
                    pos,
                    IngestError::MalformedRow {
                        line: pos.1,
                        reason: "invalid UTF-8".into(),
                    },
                );
            }
        };
        if text.is_empty() {
            return;
        }
        self.lines += 1;
        let raw: RawTweet = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => return self.record_error(pos, e.into()),
        };
        let date = match parse_timestamp(&raw.ts) {
            Ok(ts) => ts.date_naive(),
            Err(e) => return self.record_error(pos, e),
        };
        self.seen_days.insert(date);
        let k = self.tagged.len() - 1;
        match lexicon.tag(&raw.hashtags) {
            StanceTag::NoStance => self.untagged += 1,
            StanceTag::Ambiguous => {
                self.ambiguous += 1;
                if self.first_ambiguous.as_ref().is_none_or(|(p, _)| pos < *p) {
                    self.first_ambiguous = Some((pos, raw.id.into_owned()));
                }
            }
            StanceTag::Stance(s) => {
                self.tagged[s] += 1;
                match counting {
                    CountingMode::Tweets => self.days.entry(date).or_insert_with(|| vec![0; k])[s - 1] += 1,
                    CountingMode::Users => match self.users.get_mut(raw.user.as_ref()) {
                        Some(state) => {
                            state.mixed |= state.stance != s;
                            state.days.insert(date);
                        }
                        None => {
                            self.users.insert(
                                raw.user.into_owned(),
                                UserState {
                                    stance: s,
                                    mixed: false,
                                    days: BTreeSet::from([date]),
                                },
                            );
                        }
                    },
                }
            }
        }
    }
}

/// Streaming daily-count builder. Feed any number of sources, then finish.
pub struct DailyCountBuilder<'a> {
    lexicon: &'a StanceLexicon,
    options: BuildOptions,
    pool: rayon::ThreadPool,
    acc: Partial,
    sources: usize,
}

impl<'a> DailyCountBuilder<'a> {
    pub fn new(lexicon: &'a StanceLexicon, options: BuildOptions) -> Result<Self, IngestError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.threads)
            .build()
            .map_err(|e| IngestError::io(Path::new("<thread pool>"), std::io::Error::other(e)))?;
        Ok(Self {
            lexicon,
            options,
            pool,
            acc: Partial::new(lexicon.space().k()),
            sources: 0,
        })
    }

    pub fn feed<R: BufRead>(&mut self, mut reader: R) -> Result<(), IngestError> {
        let source = self.sources;
        self.sources += 1;
        let mut line_no: u64 = 0;
        loop {
            let mut batch: Vec<Vec<u8>> = Vec::with_capacity(BATCH_LINES);
            while batch.len() < BATCH_LINES {
                let mut buf = Vec::new();
                let n = reader
                    .read_until(b'\n', &mut buf)
                    .map_err(|e| IngestError::io(Path::new("<tweet stream>"), e))?;
                if n == 0 {
                    break;
                }
                batch.push(buf);
            }
            if batch.is_empty() {
                return Ok(());
            }
            let first = line_no + 1;
            line_no += batch.len() as u64;
            let (lexicon, counting, k) = (self.lexicon, self.options.counting, self.lexicon.space().k());
            let partial = self.pool.install(|| {
                batch
                    .par_chunks(SHARD_LINES)
                    .enumerate()
                    .map(|(shard, lines)| {
                        let mut p = Partial::new(k);
                        let base = first + (shard * SHARD_LINES) as u64;
                        for (i, line) in lines.iter().enumerate() {
                            p.process((source, base + i as u64), line, lexicon, counting);
                        }
                        p
                    })
                    .reduce(|| Partial::new(k), Partial::merge)
            });
            let acc = std::mem::replace(&mut self.acc, Partial::new(k));
            self.acc = acc.merge(partial);
        }
    }

    pub fn feed_path(&mut self, path: &Path) -> Result<(), IngestError> {
        let file = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
        self.feed(std::io::BufReader::with_capacity(1 << 20, file))
    }

    /// Apply the error budget and ambiguity policy and assemble the series.
    /// Days come from the stream and from `totals`; a day without a total
    /// has an unknown no-stance group.
    pub fn finish(self, totals: Option<&DailyTotals>) -> Result<DailyBuild, IngestError> {
        let acc = self.acc;
        if acc.lines > 0 && acc.parse_errors as f64 > self.options.error_budget * acc.lines as f64 {
            return Err(IngestError::ParseBudgetExceeded {
                errors: acc.parse_errors,
                lines: acc.lines,
                budget: self.options.error_budget,
                first: acc.first_error.map(|(_, e)| e).unwrap_or_default(),
            });
        }
        if self.options.ambiguity == AmbiguityPolicy::Error {
            if let Some((_, id)) = acc.first_ambiguous {
                return Err(IngestError::AmbiguousTweet { id });
            }
        }

        let space = self.lexicon.space().clone();
        let k = space.k();
        let mut days = acc.days;
        let mut mixed_users = None;
        if self.options.counting == CountingMode::Users {
            let mut mixed = 0;
            for state in acc.users.values() {
                if state.mixed {
                    mixed += 1;
                    continue;
                }
                for date in &state.days {
                    days.entry(*date).or_insert_with(|| vec![0; k])[state.stance - 1] += 1;
                }
            }
            mixed_users = Some(mixed);
        }

        let mut dates: BTreeSet<NaiveDate> = acc.seen_days;
        dates.extend(days.keys().copied());
        if let Some(totals) = totals {
            dates.extend(totals.keys().copied());
        }
        let mut series = DailySeries::new(self.lexicon.topic(), space.clone());
        for date in dates {
            let stanced = days.remove(&date).unwrap_or_else(|| vec![0; k]);
            let total = totals.and_then(|t| t.get(&date).copied());
            series.insert(date, DayCounts { stanced, total })?;
        }

        let tagged = space
            .stances()
            .iter()
            .zip(&acc.tagged[1..])
            .map(|(s, &c)| (s.id.clone(), c))
            .collect();
        Ok(DailyBuild {
            series,
            summary: IngestSummary {
                lines: acc.lines,
                parse_errors: acc.parse_errors,
                first_error: acc.first_error.map(|(_, e)| e),
                tagged,
                untagged: acc.untagged,
                ambiguous: acc.ambiguous,
                mixed_users,
            },
        })
    }
}

/// One-shot helper over a single reader.
pub fn build_daily_counts<R: BufRead>(
    reader: R,
    lexicon: &StanceLexicon,
    totals: Option<&DailyTotals>,
    options: BuildOptions,
) -> Result<DailyBuild, IngestError> {
    let mut builder = DailyCountBuilder::new(lexicon, options)?;
    builder.feed(reader)?;
    builder.finish(totals)
}
