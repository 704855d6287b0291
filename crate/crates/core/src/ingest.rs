//! Parsing of raw retweet event files and routing into per-hashtag streams.
//!
//! Two line formats are accepted. JSONL carries one object per line:
//!
//! ```text
//! {"tweet_id":"1","author":"a","retweeted_author":"b","hashtags":["#afd"],"timestamp":"2020-05-28T00:00:00Z"}
//! ```
//!
//! CSV has the fixed column order `tweet_id, author, retweeted_author,
//! hashtags, timestamp`, with hashtags separated by `|`, an empty
//! `retweeted_author` for original tweets and RFC 3339 timestamps. A leading
//! header row is skipped when present.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CSV_COLUMNS: [&str; 5] = [
    "tweet_id",
    "author",
    "retweeted_author",
    "hashtags",
    "timestamp",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: input is not valid UTF-8")]
    Encoding { line: usize },
    #[error("{rejected} of {total} lines rejected (more than half)")]
    TooManyRejects { rejected: usize, total: usize },
    #[error("tracked hashtag set is empty")]
    NoTrackedHashtags,
    #[error("invalid hashtag {0:?}")]
    InvalidHashtag(String),
    #[error("unknown input format {0:?} (expected jsonl or csv)")]
    UnknownFormat(String),
    #[error("failed to write records: {0}")]
    Write(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Csv,
}

impl FromStr for Format {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(Format::Jsonl),
            "csv" => Ok(Format::Csv),
            other => Err(IngestError::UnknownFormat(other.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Jsonl => "jsonl",
            Format::Csv => "csv",
        })
    }
}

/// Lowercases a hashtag and prefixes it with `#`.
///
/// The result must match `#[a-z0-9_]+`.
pub fn normalize_hashtag(raw: &str) -> Result<String, IngestError> {
    let trimmed = raw.trim();
    let body = trimmed.strip_prefix('#').unwrap_or(trimmed).to_lowercase();
    if body.is_empty()
        || !body
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
    {
        return Err(IngestError::InvalidHashtag(raw.to_string()));
    }
    Ok(format!("#{body}"))
}

/// Parses a comma-separated hashtag list such as `"#afd,#CoronaVirusDE"`.
pub fn parse_hashtag_list(list: &str) -> Result<BTreeSet<String>, IngestError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(normalize_hashtag)
        .collect()
}

/// One ingested tweet or retweet event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_author: Option<String>,
    pub hashtags: BTreeSet<String>,
    pub timestamp: DateTime<Utc>,
}

impl TweetRecord {
    pub fn is_retweet(&self) -> bool {
        self.retweeted_author.is_some()
    }

    /// Checks the record invariants, normalizing hashtags in place.
    fn validate(mut self) -> Result<Self, RejectReason> {
        if self.tweet_id.is_empty() {
            return Err(RejectReason::MissingField("tweet_id"));
        }
        if self.author.is_empty() {
            return Err(RejectReason::MissingField("author"));
        }
        if self.retweeted_author.as_deref() == Some("") {
            self.retweeted_author = None;
        }
        if self.retweeted_author.as_deref() == Some(self.author.as_str()) {
            return Err(RejectReason::SelfRetweet);
        }
        let mut tags = BTreeSet::new();
        for tag in &self.hashtags {
            match normalize_hashtag(tag) {
                Ok(t) => {
                    tags.insert(t);
                }
                Err(_) => return Err(RejectReason::InvalidHashtag(tag.clone())),
            }
        }
        if tags.is_empty() {
            return Err(RejectReason::NoHashtags);
        }
        self.hashtags = tags;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    Malformed(String),
    MissingField(&'static str),
    SelfRetweet,
    NoHashtags,
    InvalidHashtag(String),
    InvalidTimestamp(String),
    DuplicateTweetId(String),
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Malformed(msg) => write!(f, "malformed line: {msg}"),
            RejectReason::MissingField(field) => write!(f, "missing field {field}"),
            RejectReason::SelfRetweet => f.write_str("self-retweet"),
            RejectReason::NoHashtags => f.write_str("no hashtags"),
            RejectReason::InvalidHashtag(tag) => write!(f, "invalid hashtag {tag:?}"),
            RejectReason::InvalidTimestamp(ts) => write!(f, "invalid timestamp {ts:?}"),
            RejectReason::DuplicateTweetId(id) => write!(f, "duplicate tweet_id {id:?}"),
        }
    }
}

/// A line that could not be turned into a [`TweetRecord`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    /// 1-based line number in the source.
    pub line: usize,
    pub reason: RejectReason,
    pub raw: String,
}

impl Serialize for Reject {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Reject", 3)?;
        st.serialize_field("line", &self.line)?;
        st.serialize_field("reason", &self.reason.to_string())?;
        st.serialize_field("raw", &self.raw)?;
        st.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseOutcome {
    pub records: Vec<TweetRecord>,
    pub rejects: Vec<Reject>,
    /// Lines that were considered (blank lines and a CSV header excluded).
    pub lines_seen: usize,
}

impl ParseOutcome {
    pub fn duplicate_count(&self) -> usize {
        self.rejects
            .iter()
            .filter(|r| matches!(r.reason, RejectReason::DuplicateTweetId(_)))
            .count()
    }

    /// More than half of the considered lines were rejected.
    pub fn mostly_rejected(&self) -> bool {
        self.lines_seen > 0 && self.rejects.len() * 2 > self.lines_seen
    }

    /// Escalates a high reject ratio to an error when `strict` is set.
    pub fn check_reject_ratio(&self, strict: bool) -> Result<(), IngestError> {
        if strict && self.mostly_rejected() {
            return Err(IngestError::TooManyRejects {
                rejected: self.rejects.len(),
                total: self.lines_seen,
            });
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct JsonLine {
    tweet_id: Option<serde_json::Value>,
    author: Option<String>,
    #[serde(default)]
    retweeted_author: Option<String>,
    #[serde(default)]
    hashtags: Vec<String>,
    timestamp: Option<String>,
}

fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, RejectReason> {
    DateTime::parse_from_rfc3339(raw.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| RejectReason::InvalidTimestamp(raw.to_string()))
}

fn parse_json_line(line: &str) -> Result<TweetRecord, RejectReason> {
    let raw: JsonLine =
        serde_json::from_str(line).map_err(|e| RejectReason::Malformed(e.to_string()))?;
    let tweet_id = match raw.tweet_id {
        Some(serde_json::Value::String(s)) => s,
        Some(serde_json::Value::Number(n)) => n.to_string(),
        Some(_) => return Err(RejectReason::Malformed("tweet_id must be a string".into())),
        None => return Err(RejectReason::MissingField("tweet_id")),
    };
    let author = raw.author.ok_or(RejectReason::MissingField("author"))?;
    let timestamp = raw.timestamp.ok_or(RejectReason::MissingField("timestamp"))?;
    TweetRecord {
        tweet_id,
        author,
        retweeted_author: raw.retweeted_author,
        hashtags: raw.hashtags.into_iter().collect(),
        timestamp: parse_timestamp(&timestamp)?,
    }
    .validate()
}

fn parse_csv_line(line: &str) -> Result<TweetRecord, RejectReason> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(line.as_bytes());
    let row = reader
        .records()
        .next()
        .ok_or_else(|| RejectReason::Malformed("empty row".into()))?
        .map_err(|e| RejectReason::Malformed(e.to_string()))?;
    if row.len() != CSV_COLUMNS.len() {
        return Err(RejectReason::Malformed(format!(
            "expected {} columns, found {}",
            CSV_COLUMNS.len(),
            row.len()
        )));
    }
    let retweeted = row[2].trim();
    TweetRecord {
        tweet_id: row[0].trim().to_string(),
        author: row[1].trim().to_string(),
        retweeted_author: (!retweeted.is_empty()).then(|| retweeted.to_string()),
        hashtags: row[3]
            .split('|')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().to_string())
            .collect(),
        timestamp: parse_timestamp(&row[4])?,
    }
    .validate()
}

fn is_csv_header(line: &str) -> bool {
    line.split(',')
        .next()
        .is_some_and(|first| first.trim().trim_matches('"') == CSV_COLUMNS[0])
}

/// Parses a line-oriented source into records, preserving input order.
///
/// Malformed lines, self-retweets and repeated tweet ids are collected as
/// rejects; the first occurrence of a tweet id wins.
pub fn parse_records<R: BufRead>(source: R, format: Format) -> Result<ParseOutcome, IngestError> {
    parse_records_from(source, format, 0)
}

/// Like [`parse_records`], for a shard whose first line is line
/// `line_offset + 1` of the complete input.
pub fn parse_records_from<R: BufRead>(
    source: R,
    format: Format,
    line_offset: usize,
) -> Result<ParseOutcome, IngestError> {
    let mut outcome = ParseOutcome::default();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut buf = Vec::new();
    let mut reader = source;
    let mut line_no = line_offset;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf)
            .map_err(|_| IngestError::Encoding { line: line_no })?
            .trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        if format == Format::Csv && line_no == 1 && is_csv_header(line) {
            continue;
        }
        outcome.lines_seen += 1;
        let parsed = match format {
            Format::Jsonl => parse_json_line(line),
            Format::Csv => parse_csv_line(line),
        }
        .and_then(|rec| {
            if seen_ids.insert(rec.tweet_id.clone()) {
                Ok(rec)
            } else {
                Err(RejectReason::DuplicateTweetId(rec.tweet_id))
            }
        });
        match parsed {
            Ok(rec) => outcome.records.push(rec),
            Err(reason) => outcome.rejects.push(Reject {
                line: line_no,
                reason,
                raw: line.to_string(),
            }),
        }
    }
    Ok(outcome)
}

fn timestamp_string(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

/// Serializes records in the given format. CSV output starts with a header.
pub fn write_records<W: Write>(
    out: W,
    records: &[TweetRecord],
    format: Format,
) -> Result<(), IngestError> {
    match format {
        Format::Jsonl => {
            let mut out = out;
            for rec in records {
                serde_json::to_writer(&mut out, rec)
                    .map_err(|e| IngestError::Write(e.to_string()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_COLUMNS)
                .map_err(|e| IngestError::Write(e.to_string()))?;
            for rec in records {
                let tags = rec.hashtags.iter().cloned().collect::<Vec<_>>().join("|");
                w.write_record([
                    rec.tweet_id.as_str(),
                    rec.author.as_str(),
                    rec.retweeted_author.as_deref().unwrap_or(""),
                    tags.as_str(),
                    timestamp_string(&rec.timestamp).as_str(),
                ])
                .map_err(|e| IngestError::Write(e.to_string()))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StreamSplit {
    pub streams: BTreeMap<String, Vec<TweetRecord>>,
    /// Records that carried no tracked hashtag.
    pub dropped: usize,
}

impl StreamSplit {
    pub fn total_routed(&self) -> usize {
        self.streams.values().map(Vec::len).sum()
    }
}

/// Routes each record into the stream of every tracked hashtag it carries.
///
/// A record with several tracked hashtags is copied into each of their
/// streams. Every tracked hashtag gets a (possibly empty) stream.
pub fn split_streams(
    records: &[TweetRecord],
    tracked: &BTreeSet<String>,
) -> Result<StreamSplit, IngestError> {
    if tracked.is_empty() {
        return Err(IngestError::NoTrackedHashtags);
    }
    let mut split = StreamSplit {
        streams: tracked.iter().map(|t| (t.clone(), Vec::new())).collect(),
        dropped: 0,
    };
    for rec in records {
        let mut routed = false;
        for tag in rec.hashtags.intersection(tracked) {
            if let Some(stream) = split.streams.get_mut(tag) {
                stream.push(rec.clone());
                routed = true;
            }
        }
        if !routed {
            split.dropped += 1;
        }
    }
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HashtagCounts {
    pub tweets: usize,
    pub retweets: usize,
    pub unique_accounts: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub record_count: usize,
    /// Distinct accounts appearing as author or retweeted author.
    pub account_count: usize,
    pub per_hashtag_counts: BTreeMap<String, HashtagCounts>,
    pub window: Option<(DateTime<Utc>, DateTime<Utc>)>,
}

impl CorpusStats {
    pub fn compute(records: &[TweetRecord]) -> Self {
        let mut accounts: HashSet<&str> = HashSet::new();
        let mut per_tag: BTreeMap<&str, (usize, usize, HashSet<&str>)> = BTreeMap::new();
        let mut window: Option<(DateTime<Utc>, DateTime<Utc>)> = None;
        for rec in records {
            accounts.insert(&rec.author);
            if let Some(rt) = &rec.retweeted_author {
                accounts.insert(rt);
            }
            for tag in &rec.hashtags {
                let entry = per_tag.entry(tag).or_default();
                if rec.is_retweet() {
                    entry.1 += 1;
                } else {
                    entry.0 += 1;
                }
                entry.2.insert(&rec.author);
                if let Some(rt) = &rec.retweeted_author {
                    entry.2.insert(rt);
                }
            }
            window = Some(match window {
                None => (rec.timestamp, rec.timestamp),
                Some((lo, hi)) => (lo.min(rec.timestamp), hi.max(rec.timestamp)),
            });
        }
        CorpusStats {
            record_count: records.len(),
            account_count: accounts.len(),
            per_hashtag_counts: per_tag
                .into_iter()
                .map(|(tag, (tweets, retweets, accts))| {
                    (
                        tag.to_string(),
                        HashtagCounts {
                            tweets,
                            retweets,
                            unique_accounts: accts.len(),
                        },
                    )
                })
                .collect(),
            window,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r##"{"tweet_id":"1","author":"a","retweeted_author":"b","hashtags":["#afd"],"timestamp":"2020-05-28T00:00:00Z"}"##;

    fn rec(id: &str, tags: &[&str]) -> TweetRecord {
        TweetRecord {
            tweet_id: id.into(),
            author: "a".into(),
            retweeted_author: Some("b".into()),
            hashtags: tags.iter().map(|t| t.to_string()).collect(),
            timestamp: "2020-05-28T00:00:00Z".parse().unwrap(),
        }
    }

    #[test]
    fn minimal_json_line() {
        let out = parse_records(MINIMAL.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.rejects.is_empty());
        let r = &out.records[0];
        assert_eq!(r.author, "a");
        assert_eq!(r.retweeted_author.as_deref(), Some("b"));
        assert!(r.hashtags.contains("#afd"));
    }

    #[test]
    fn self_retweet_rejected() {
        let line = MINIMAL.replace(r#""retweeted_author":"b""#, r#""retweeted_author":"a""#);
        let out = parse_records(line.as_bytes(), Format::Jsonl).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].reason, RejectReason::SelfRetweet);
        assert_eq!(out.rejects[0].line, 1);
    }

    #[test]
    fn hashtags_normalized() {
        let line = MINIMAL.replace(r##"["#afd"]"##, r##"["AfD","#CoronaVirusDE"]"##);
        let out = parse_records(line.as_bytes(), Format::Jsonl).unwrap();
        let tags: Vec<_> = out.records[0].hashtags.iter().cloned().collect();
        assert_eq!(tags, vec!["#afd", "#coronavirusde"]);
        assert!(normalize_hashtag("#über").is_err());
        assert!(normalize_hashtag("#").is_err());
    }

    #[test]
    fn reject_line_numbers_and_order() {
        let input = format!("{MINIMAL}\nnot json\n\n{}\n", MINIMAL.replace("\"1\"", "\"2\""));
        let out = parse_records(input.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].tweet_id, "1");
        assert_eq!(out.records[1].tweet_id, "2");
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].line, 2);
        assert_eq!(out.lines_seen, 3);
    }

    #[test]
    fn duplicates_first_wins() {
        let input = format!("{MINIMAL}\n{}\n", MINIMAL.replace("\"a\"", "\"c\""));
        let out = parse_records(input.as_bytes(), Format::Jsonl).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].author, "a");
        assert_eq!(out.duplicate_count(), 1);
    }

    #[test]
    fn shard_offsets_line_numbers() {
        let out = parse_records_from("garbage\n".as_bytes(), Format::Jsonl, 100).unwrap();
        assert_eq!(out.rejects[0].line, 101);
    }

    #[test]
    fn strict_escalates_majority_rejects() {
        let input = format!("{MINIMAL}\nx\ny\n");
        let out = parse_records(input.as_bytes(), Format::Jsonl).unwrap();
        assert!(out.mostly_rejected());
        assert!(out.check_reject_ratio(false).is_ok());
        assert!(matches!(
            out.check_reject_ratio(true),
            Err(IngestError::TooManyRejects { rejected: 2, total: 3 })
        ));
    }

    #[test]
    fn invalid_utf8_is_fatal() {
        let bytes: &[u8] = b"\xff\xfe\n";
        assert!(matches!(
            parse_records(bytes, Format::Jsonl),
            Err(IngestError::Encoding { line: 1 })
        ));
    }

    #[test]
    fn csv_with_header_and_original_tweet() {
        let input = "tweet_id,author,retweeted_author,hashtags,timestamp\n\
                     1,a,b,#AfD|#cdu,2020-05-28T00:00:00Z\n\
                     2,c,,#spd,2020-05-28T01:00:00+02:00\n";
        let out = parse_records(input.as_bytes(), Format::Csv).unwrap();
        assert!(out.rejects.is_empty(), "{:?}", out.rejects);
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.records[0].hashtags.len(), 2);
        assert!(out.records[1].retweeted_author.is_none());
        assert_eq!(
            out.records[1].timestamp,
            "2020-05-27T23:00:00Z".parse::<DateTime<Utc>>().unwrap()
        );
    }

    #[test]
    fn csv_wrong_arity_rejected() {
        let out = parse_records("1,a,b\n".as_bytes(), Format::Csv).unwrap();
        assert_eq!(out.rejects.len(), 1);
    }

    #[test]
    fn multi_tag_record_lands_in_both_streams() {
        let records = vec![rec("1", &["#afd", "#coronavirusde"])];
        let tracked: BTreeSet<String> = ["#afd", "#coronavirusde"].map(String::from).into();
        let split = split_streams(&records, &tracked).unwrap();
        assert_eq!(split.streams["#afd"].len(), 1);
        assert_eq!(split.streams["#coronavirusde"].len(), 1);
        assert_eq!(split.dropped, 0);
    }

    #[test]
    fn untracked_record_dropped() {
        let records = vec![rec("1", &["#cats"])];
        let tracked: BTreeSet<String> = ["#afd".to_string()].into();
        let split = split_streams(&records, &tracked).unwrap();
        assert!(split.streams["#afd"].is_empty());
        assert_eq!(split.dropped, 1);
    }

    #[test]
    fn empty_tracked_is_error() {
        assert!(matches!(
            split_streams(&[], &BTreeSet::new()),
            Err(IngestError::NoTrackedHashtags)
        ));
    }

    #[test]
    fn corpus_stats_counts() {
        let mut original = rec("2", &["#afd"]);
        original.author = "c".into();
        original.retweeted_author = None;
        let stats = CorpusStats::compute(&[rec("1", &["#afd", "#spd"]), original]);
        assert_eq!(stats.record_count, 2);
        assert_eq!(stats.account_count, 3);
        let afd = stats.per_hashtag_counts["#afd"];
        assert_eq!((afd.tweets, afd.retweets, afd.unique_accounts), (1, 1, 3));
        assert_eq!(stats.per_hashtag_counts["#spd"].unique_accounts, 2);
    }
}
