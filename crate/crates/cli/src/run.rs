use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use contention::analytics::{quadrant_points, region_contention, timeseries, ImportanceScale, RatedTopic};
use contention::ingest::{
    load_daily_totals, load_poll_topline, load_vote_records, AmbiguityPolicy, BuildOptions, CountingMode,
    DailyCountBuilder, IngestSummary, PollSchema, StanceLexicon, TurnoutMode,
};
use contention::model::AssignmentSet;
use contention::output::{write_quadrant, write_regions, write_timeseries, write_topics, Format, OutputOptions};
use contention::{contention_exclusive_with, contention_sampled_with, AnalyticsError, IngestError, ModelError, Normalization};

use crate::args::{
    AmbiguityArg, Command, CountingArg, FileConfig, NormalizeArg, PollArgs, QuadrantArgs, Shared, TurnoutArg,
    TweetsArgs, VotesArgs,
};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data { kind: &'static str, message: String },
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Data {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Data {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<AnalyticsError> for Failure {
    fn from(e: AnalyticsError) -> Self {
        Failure::Data {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data {
            kind: "Io",
            message: e.to_string(),
        }
    }
}

pub fn execute(command: Command, config: &FileConfig) -> Result<(), Failure> {
    match command {
        Command::Poll(args) => poll(args, config),
        Command::Votes(args) => votes(args, config),
        Command::Tweets(args) => tweets(args, config),
        Command::Quadrant(args) => quadrant(args, config),
    }
}

fn normalization(shared: &Shared) -> Normalization {
    match shared.normalize {
        NormalizeArg::Declared => Normalization::Declared,
        NormalizeArg::Observed => Normalization::Observed,
    }
}

fn output_options(shared: &Shared) -> OutputOptions {
    OutputOptions {
        format: if shared.json { Format::JsonLines } else { Format::Csv },
        precision: shared.precision,
    }
}

fn with_output<F>(shared: &Shared, write: F) -> Result<(), Failure>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match &shared.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            let mut out = BufWriter::new(file);
            write(&mut out)?;
            out.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn poll(args: PollArgs, config: &FileConfig) -> Result<(), Failure> {
    let shared = args.shared.resolve(config);
    let schema = PollSchema {
        respondents: args.respondents.or(config.poll.respondents),
        require_importance: false,
    };
    let samples = args.samples.or(config.poll.samples);
    let seed = args.seed.or(config.poll.seed).unwrap_or(0);
    let mode = normalization(&shared);

    let topics = load_poll_topline(&args.input, schema)?;
    let mut results = Vec::with_capacity(topics.len());
    for topic in topics {
        let result = match samples {
            Some(n) => contention_sampled_with(&AssignmentSet::from_counts(&topic.counts), n, seed, mode)?,
            None => contention_exclusive_with(&topic.counts, mode)?,
        };
        results.push((topic.topic, result));
    }
    let opts = output_options(&shared);
    with_output(&shared, |out| write_topics(out, &results, opts))
}

fn votes(args: VotesArgs, config: &FileConfig) -> Result<(), Failure> {
    let shared = args.shared.resolve(config);
    let turnout = match args.turnout.or(config.votes.turnout).unwrap_or(TurnoutArg::Ballots) {
        TurnoutArg::Ballots => TurnoutMode::BallotsOnly,
        TurnoutArg::Eligible => TurnoutMode::EligiblePopulation,
    };
    let mut table = load_vote_records(&args.input, turnout)?;
    if let Some(keep) = args.options.as_ref().or(config.votes.options.as_ref()) {
        table = table.collapse_options(keep)?;
    }
    let regions = region_contention(&table, normalization(&shared));
    let opts = output_options(&shared);
    with_output(&shared, |out| write_regions(out, &regions, opts))
}

fn tweets(args: TweetsArgs, config: &FileConfig) -> Result<(), Failure> {
    let shared = args.shared.resolve(config);
    let cfg = &config.tweets;
    let lexicon_path = args
        .lexicon
        .as_ref()
        .or(cfg.lexicon.as_ref())
        .ok_or_else(|| Failure::Usage("tweets needs --lexicon".into()))?;
    let counting = if args.by_user {
        CountingArg::User
    } else {
        args.counting.or(cfg.counting).unwrap_or(CountingArg::Tweet)
    };
    let error_budget = args.error_budget.or(cfg.error_budget).unwrap_or(0.001);
    if !(0.0..=1.0).contains(&error_budget) {
        return Err(Failure::Usage(format!("--error-budget {error_budget} is not a fraction")));
    }
    let options = BuildOptions {
        counting: match counting {
            CountingArg::Tweet => CountingMode::Tweets,
            CountingArg::User => CountingMode::Users,
        },
        ambiguity: match args.ambiguous.or(cfg.ambiguous).unwrap_or(AmbiguityArg::Abstain) {
            AmbiguityArg::Abstain => AmbiguityPolicy::Abstain,
            AmbiguityArg::Error => AmbiguityPolicy::Error,
        },
        error_budget,
        threads: shared.threads,
    };

    let lexicon = StanceLexicon::load(lexicon_path)?;
    let totals = args
        .totals
        .as_ref()
        .or(cfg.totals.as_ref())
        .map(|p| load_daily_totals(p))
        .transpose()?;
    let mut builder = DailyCountBuilder::new(&lexicon, options)?;
    for input in &args.inputs {
        builder.feed_path(input)?;
    }
    let build = builder.finish(totals.as_ref())?;
    print_summary(&build.summary);

    if let Some(path) = args.counts_out.as_ref().or(cfg.counts_out.as_ref()) {
        write_counts(path, &build.series)?;
    }
    let points = timeseries(&build.series, normalization(&shared));
    let opts = output_options(&shared);
    with_output(&shared, |out| write_timeseries(out, &points, opts))
}

fn write_counts(path: &Path, series: &contention::ingest::DailySeries) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    series.write_csv(BufWriter::new(file))?;
    Ok(())
}

fn print_summary(summary: &IngestSummary) {
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "lines: {}", summary.lines);
    let _ = writeln!(err, "parse errors: {}", summary.parse_errors);
    if let Some(first) = &summary.first_error {
        let _ = writeln!(err, "first parse error: {first}");
    }
    for (stance, count) in &summary.tagged {
        let _ = writeln!(err, "tagged {stance}: {count}");
    }
    let _ = writeln!(err, "untagged: {}", summary.untagged);
    let _ = writeln!(err, "ambiguous: {}", summary.ambiguous);
    if let Some(mixed) = summary.mixed_users {
        let _ = writeln!(err, "users with conflicting stances: {mixed}");
    }
}

fn quadrant(args: QuadrantArgs, config: &FileConfig) -> Result<(), Failure> {
    let shared = args.shared.resolve(config);
    let (min, max) = match (
        args.importance_min.or(config.quadrant.importance_min),
        args.importance_max.or(config.quadrant.importance_max),
    ) {
        (Some(min), Some(max)) => (min, max),
        _ => return Err(Failure::Usage("quadrant needs --importance-min and --importance-max".into())),
    };
    let scale = ImportanceScale::new(min, max).map_err(|e| Failure::Usage(e.to_string()))?;
    let schema = PollSchema {
        require_importance: true,
        ..PollSchema::default()
    };
    let topics: Vec<RatedTopic> = load_poll_topline(&args.input, schema)?.into_iter().map(Into::into).collect();
    let report = quadrant_points(&topics, scale, normalization(&shared));
    let opts = output_options(&shared);
    with_output(&shared, |out| write_quadrant(out, &report.points, opts))?;
    if report.rejects.is_empty() {
        return Ok(());
    }
    for reject in &report.rejects {
        eprintln!("{}", serde_json::json!({ "topic": reject.topic, "error": reject.kind, "message": reject.message }));
    }
    Err(Failure::Data {
        kind: report.rejects[0].kind,
        message: format!("{} of {} topics rejected", report.rejects.len(), topics.len()),
    })
}
