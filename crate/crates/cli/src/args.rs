use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

const AFTER_HELP: &str = "\
Exit status: 0 on success, 2 when an input violates its file contract, 64 on usage errors.
Errors are reported on stderr as one JSON object: {\"error\": <kind>, \"message\": <text>}.
Output never contains color codes, so NO_COLOR is always honored.

Config file (--config, TOML) mirrors the flags: top-level keys for the shared flags
(out, json, precision, threads, normalize) and one table per subcommand, e.g.
    precision = 2
    [votes]
    turnout = \"eligible\"
Flags given on the command line win over config values.";

#[derive(Debug, Parser)]
#[command(name = "contention", version, about = "Contention analytics over polls, vote records and tweet streams")]
#[command(after_help = AFTER_HELP)]
pub struct Cli {
    /// TOML config file providing defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-topic contention from poll toplines.
    #[command(after_help = "\
Input CSV (UTF-8, RFC 4180), one row per topic and answer:
    topic,stance,count
or with shares:
    topic,stance,percent[,total]
The stance literal __none__ is the no-answer group. Percentages are converted to counts
against the row's total (or --respondents), rounding half to even.

Output: topic,n,k,raw,normalized")]
    Poll(PollArgs),

    /// Per-region contention from vote records, with the all-regions aggregate.
    #[command(after_help = "\
Input CSV: region,option,count
Option literals: __eligible__ (eligible population), __rejected__ (rejected ballots).
--turnout ballots: no-stance group = rejected ballots.
--turnout eligible: no-stance group = eligible - valid votes; every region needs __eligible__.
--options a,b: keep only these options as stances; other options' votes join the no-stance group.

Output: region,n,k,raw,normalized  (last row is region __all__)")]
    Votes(VotesArgs),

    /// Daily contention series from a hashtag-tagged tweet stream.
    #[command(after_help = "\
Input: JSON lines {\"id\": str, \"ts\": ISO-8601 with offset, \"user\": str, \"hashtags\": [str]}.
Lexicon JSON: {\"topic\": str, \"stances\": [{\"id\": str, \"label\": str, \"hashtags\": [str]}]}.
Daily totals CSV: date,total  (dates YYYY-MM-DD, UTC); total - tagged = no-stance group.
Days without a total report the all-tweets columns as empty.

Output: date,n_all,n_stanced,k,raw_all,norm_all,raw_stanced,norm_stanced
--counts-out writes date,total,<stance ids...>. A summary is printed on stderr.")]
    Tweets(TweetsArgs),

    /// Contention and rescaled importance per topic.
    #[command(after_help = "\
Input: poll topline CSV with an importance column (one rating per topic):
    topic,stance,count,importance
Importance is rescaled linearly from [--importance-min, --importance-max] to [0, 1].
Topics without a rating or outside the scale are listed on stderr and exit status is 2.

Output: topic,contention,importance")]
    Quadrant(QuadrantArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizeArg {
    Declared,
    Observed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurnoutArg {
    Ballots,
    Eligible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingArg {
    Tweet,
    User,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbiguityArg {
    Abstain,
    Error,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SharedArgs {
    /// Write results here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Emit JSON lines instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Decimal places for reported values [default: 6].
    #[arg(long, value_name = "N")]
    pub precision: Option<usize>,
    /// Worker threads for ingestion [default: all cores].
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Normalize by declared stances or only those observed [default: declared].
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeArg>,
}

#[derive(Debug, Args)]
pub struct PollArgs {
    /// Poll topline CSV.
    pub input: PathBuf,
    /// Respondent total for percentage rows without a total column.
    #[arg(long, value_name = "N")]
    pub respondents: Option<u64>,
    /// Estimate by sampling this many pairs instead of the closed form.
    #[arg(long, value_name = "N")]
    pub samples: Option<u64>,
    /// Seed for --samples [default: 0].
    #[arg(long, value_name = "N", requires = "samples")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Args)]
pub struct VotesArgs {
    /// Vote records CSV.
    pub input: PathBuf,
    /// No-stance group definition [default: ballots].
    #[arg(long, value_enum)]
    pub turnout: Option<TurnoutArg>,
    /// Keep only these options as stances; votes for any other option hold no stance.
    #[arg(long, value_delimiter = ',')]
    pub options: Option<Vec<String>>,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Args)]
pub struct TweetsArgs {
    /// Tweet JSON-lines files (shards are merged).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Stance lexicon JSON.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Daily totals CSV.
    #[arg(long, value_name = "PATH")]
    pub totals: Option<PathBuf>,
    /// Count tagged tweets or distinct users [default: tweet].
    #[arg(long, value_enum, conflicts_with = "by_user")]
    pub counting: Option<CountingArg>,
    /// Shorthand for --counting user.
    #[arg(long)]
    pub by_user: bool,
    /// Tweets matching several stances: treat as no stance, or fail [default: abstain].
    #[arg(long, value_enum)]
    pub ambiguous: Option<AmbiguityArg>,
    /// Tolerated fraction of unparseable lines [default: 0.001].
    #[arg(long, value_name = "FRACTION")]
    pub error_budget: Option<f64>,
    /// Also write per-day stance counts as CSV.
    #[arg(long, value_name = "PATH")]
    pub counts_out: Option<PathBuf>,
    #[command(flatten)]
    pub shared: SharedArgs,
}

#[derive(Debug, Args)]
pub struct QuadrantArgs {
    /// Poll topline CSV with an importance column.
    pub input: PathBuf,
    /// Lower bound of the importance scale.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub importance_min: Option<f64>,
    /// Upper bound of the importance scale.
    #[arg(long, value_name = "X", allow_negative_numbers = true)]
    pub importance_max: Option<f64>,
    #[command(flatten)]
    pub shared: SharedArgs,
}

/// Flag defaults loaded from `--config`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub json: Option<bool>,
    pub precision: Option<usize>,
    pub threads: Option<usize>,
    pub normalize: Option<NormalizeArg>,
    #[serde(default)]
    pub poll: PollConfig,
    #[serde(default)]
    pub votes: VotesConfig,
    #[serde(default)]
    pub tweets: TweetsConfig,
    #[serde(default)]
    pub quadrant: QuadrantConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PollConfig {
    pub respondents: Option<u64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VotesConfig {
    pub turnout: Option<TurnoutArg>,
    pub options: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweetsConfig {
    pub lexicon: Option<PathBuf>,
    pub totals: Option<PathBuf>,
    pub counting: Option<CountingArg>,
    pub ambiguous: Option<AmbiguityArg>,
    pub error_budget: Option<f64>,
    pub counts_out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadrantConfig {
    pub importance_min: Option<f64>,
    pub importance_max: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Shared settings after merging flags over the config file.
#[derive(Debug, Clone)]
pub struct Shared {
    pub out: Option<PathBuf>,
    pub json: bool,
    pub precision: usize,
    pub threads: usize,
    pub normalize: NormalizeArg,
}

impl SharedArgs {
    pub fn resolve(&self, file: &FileConfig) -> Shared {
        Shared {
            out: self.out.clone().or_else(|| file.out.clone()),
            json: self.json || file.json.unwrap_or(false),
            precision: self.precision.or(file.precision).unwrap_or(6),
            threads: self.threads.or(file.threads).unwrap_or(0),
            normalize: self.normalize.or(file.normalize).unwrap_or(NormalizeArg::Declared),
        }
    }
}
