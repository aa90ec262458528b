mod common;

use std::io::BufRead;

use chrono::NaiveDate;
use contention::analytics::timeseries;
use contention::ingest::{
    build_daily_counts, load_daily_totals, BuildOptions, CountingMode, DailyBuild, DailyCountBuilder, DailySeries,
    StanceLexicon,
};
use contention::output::{write_timeseries, OutputOptions};
use contention::Normalization;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, pairwise_raw};

fn lexicon() -> StanceLexicon {
    StanceLexicon::load(&fixture("dress_lexicon.json")).unwrap()
}

fn fixture_lines() -> Vec<String> {
    let text = std::fs::read_to_string(fixture("dress_tweets.jsonl")).unwrap();
    text.lines().map(str::to_string).collect()
}

fn build(lines: &[String], options: BuildOptions) -> DailyBuild {
    let input = lines.join("\n");
    let totals = load_daily_totals(&fixture("dress_totals.csv")).unwrap();
    build_daily_counts(input.as_bytes(), &lexicon(), Some(&totals), options).unwrap()
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn csv_bytes(series: &DailySeries) -> Vec<u8> {
    let mut buf = Vec::new();
    write_timeseries(&mut buf, &timeseries(series, Normalization::Declared), OutputOptions::default()).unwrap();
    buf
}

/// Random stream over three days with both stances, ambiguous and untagged
/// tweets, offsets that cross midnight, and repeat users.
fn synthetic_stream(lines: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tags = [
        "\"#WhiteAndGold\"",
        "\"#whitegold\"",
        "\"#blackandblue\"",
        "\"#BlueAndBlack\"",
        "\"#thedress\"",
    ];
    let mut out = String::new();
    for i in 0..lines {
        let day = 26 + rng.gen_range(0..3);
        let hour = rng.gen_range(0..24);
        let offset = ["Z", "+05:00", "-08:00"][rng.gen_range(0..3)];
        let n_tags = rng.gen_range(0..3);
        let picked: Vec<&str> = (0..n_tags).map(|_| tags[rng.gen_range(0..tags.len())]).collect();
        out.push_str(&format!(
            "{{\"id\":\"g{i}\",\"ts\":\"2015-02-{day:02}T{hour:02}:17:00{offset}\",\"user\":\"u{}\",\"hashtags\":[{}]}}\n",
            rng.gen_range(0..300),
            picked.join(",")
        ));
    }
    out
}

#[test]
fn fixture_days_match_hand_counts() {
    let b = build(&fixture_lines(), BuildOptions::default());
    let days = b.series.days();
    let expect = [("2015-02-26", 40, [6, 4]), ("2015-02-27", 100, [10, 10]), ("2015-02-28", 10, [3, 0])];
    assert_eq!(days.len(), 3);
    for (d, total, stanced) in expect {
        let day = &days[&date(d)];
        assert_eq!(day.total, Some(total), "{d}");
        assert_eq!(day.stanced, stanced, "{d}");
        let all = b.series.counts_all(date(d)).unwrap();
        assert_eq!(all.no_stance() + all.stanced(), total, "partition on {d}");
    }
    let points = timeseries(&b.series, Normalization::Declared);
    let first = &points[0];
    assert!((first.raw_all.unwrap() - pairwise_raw(30, &[6, 4])).abs() < 1e-12);
    assert!((first.contention_all.unwrap() - 0.06).abs() < 1e-12);
    assert!((first.contention_stanced.unwrap() - 0.96).abs() < 1e-12);
    assert_eq!(points[2].contention_stanced, Some(0.0));
    assert_eq!(b.summary.lines, 37);
    assert_eq!(b.summary.ambiguous, 1);
    assert_eq!(b.summary.untagged, 3);
}

#[test]
fn user_counting_drops_mixed_users() {
    let b = build(
        &fixture_lines(),
        BuildOptions {
            counting: CountingMode::Users,
            ..BuildOptions::default()
        },
    );
    let days = b.series.days();
    assert_eq!(days[&date("2015-02-26")].stanced, [4, 4]);
    assert_eq!(days[&date("2015-02-27")].stanced, [10, 7]);
    assert_eq!(days[&date("2015-02-28")].stanced, [3, 0]);
    assert_eq!(b.summary.mixed_users, Some(1));
}

#[test]
fn thread_count_does_not_change_output() {
    let stream = synthetic_stream(30_000, 11);
    let lex = lexicon();
    let run = |threads| {
        let options = BuildOptions {
            threads,
            ..BuildOptions::default()
        };
        build_daily_counts(stream.as_bytes(), &lex, None, options).unwrap()
    };
    let reference = run(1);
    let bytes = csv_bytes(&reference.series);
    for threads in [2, 3, 8] {
        let other = run(threads);
        assert_eq!(other, reference, "threads={threads}");
        assert_eq!(csv_bytes(&other.series), bytes, "threads={threads}");
    }
}

#[test]
fn split_feeds_equal_one_feed() {
    let stream = synthetic_stream(9_000, 5);
    let lex = lexicon();
    let whole = build_daily_counts(stream.as_bytes(), &lex, None, BuildOptions::default()).unwrap();
    let lines: Vec<String> = stream.as_bytes().lines().map(Result::unwrap).collect();
    let mut builder = DailyCountBuilder::new(&lex, BuildOptions::default()).unwrap();
    for part in lines.chunks(2_500) {
        builder.feed(part.join("\n").as_bytes()).unwrap();
    }
    assert_eq!(builder.finish(None).unwrap(), whole);
}

#[test]
fn daily_counts_round_trip() {
    let b = build(&fixture_lines(), BuildOptions::default());
    let mut buf = Vec::new();
    b.series.write_csv(&mut buf).unwrap();
    let back = DailySeries::read_csv(buf.as_slice(), "dress").unwrap();
    assert_eq!(back.days(), b.series.days());
    // The CSV carries stance ids only; labels are not part of the schema.
    let ids = |s: &DailySeries| s.space().stances().iter().map(|x| x.id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&back), ids(&b.series));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn line_order_does_not_matter(lines in Just(fixture_lines()).prop_shuffle()) {
        let reference = build(&fixture_lines(), BuildOptions::default());
        for counting in [CountingMode::Tweets, CountingMode::Users] {
            let options = BuildOptions { counting, ..BuildOptions::default() };
            let expected = build(&fixture_lines(), options);
            let got = build(&lines, options);
            prop_assert_eq!(&got.series, &expected.series);
            prop_assert_eq!(&got.summary.tagged, &expected.summary.tagged);
        }
        prop_assert_eq!(csv_bytes(&build(&lines, BuildOptions::default()).series), csv_bytes(&reference.series));
    }

    #[test]
    fn tagged_plus_no_stance_is_the_day_total(seed in any::<u64>()) {
        let stream = synthetic_stream(2_000, seed);
        let lex = lexicon();
        let bare = build_daily_counts(stream.as_bytes(), &lex, None, BuildOptions::default()).unwrap();
        // Totals equal to the line count of each UTC day.
        let mut totals = contention::ingest::DailyTotals::new();
        for line in stream.lines() {
            let t = contention::ingest::TweetRecord::parse(line).unwrap();
            *totals.entry(t.date()).or_insert(0) += 1;
        }
        let b = build_daily_counts(stream.as_bytes(), &lex, Some(&totals), BuildOptions::default()).unwrap();
        prop_assert_eq!(b.series.days().len(), totals.len());
        for (d, total) in &totals {
            let all = b.series.counts_all(*d).unwrap();
            prop_assert_eq!(all.no_stance() + all.stanced(), *total);
            prop_assert_eq!(all.explicit(), bare.series.days()[d].stanced.as_slice());
        }
        let tagged: u64 = b.summary.tagged.iter().map(|(_, c)| c).sum();
        prop_assert_eq!(tagged + b.summary.untagged + b.summary.ambiguous, 2_000);
    }
}
