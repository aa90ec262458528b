//! Readers for poll toplines, regional vote records and tweet streams.

pub mod daily;
pub mod lexicon;
pub mod poll;
pub mod tweets;
pub mod votes;

pub use daily::{load_daily_totals, read_daily_totals, DailySeries, DailyTotals, DayCounts};
pub use lexicon::{normalize_hashtag, LexiconFile, LexiconStance, StanceLexicon, StanceTag};
pub use poll::{load_poll_topline, read_poll_topline, PollSchema, PollTopic};
pub use tweets::{
    build_daily_counts, parse_timestamp, tag_tweet_stance, AmbiguityPolicy, BuildOptions, CountingMode,
    DailyBuild, DailyCountBuilder, IngestSummary, TweetRecord,
};
pub use votes::{
    load_vote_records, read_vote_records, RegionRow, RegionTable, TurnoutMode, ALL_REGIONS, ELIGIBLE_OPTION,
    REGION_ATTRIBUTE, REJECTED_OPTION,
};
