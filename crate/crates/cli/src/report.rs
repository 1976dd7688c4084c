//! Run reports and their JSON and text renderings.
//!
//! Every floating-point value is written with 17 significant digits so a
//! report round-trips to the exact doubles that produced it.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    /// Position of the stanza in its file, or of the dims item in a sweep.
    pub index: usize,
    pub kind: String,
    pub label: String,
    pub verdict: Verdict,
    pub max_deviation: f64,
    pub tol: f64,
    /// Seed of the worst trial, present only when a sweep entry fails.
    pub failing_seed: Option<u64>,
    pub elapsed_ms: f64,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub overall: Verdict,
    pub entries: Vec<EntryReport>,
}

impl RunReport {
    /// The overall verdict is the conjunction of the entry verdicts.
    pub fn new(seed: Option<u64>, mut entries: Vec<EntryReport>) -> Self {
        entries.sort_by_key(|e| e.index);
        let overall = Verdict::from_pass(entries.iter().all(|e| e.verdict.is_pass()));
        Self {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            seed,
            overall,
            entries,
        }
    }

    /// 0 when every entry passes, 1 when a physics check failed.
    pub fn exit_code(&self) -> u8 {
        if self.overall.is_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(
            &mut out,
            SigFigFormatter(PrettyFormatter::new()),
        );
        self.serialize(&mut ser).expect("report values serialize");
        out.push(b'\n');
        String::from_utf8(out).expect("serde_json writes UTF-8")
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "nosig {}  seed={}  overall={}\n",
            self.toolkit_version,
            self.seed.map_or("-".to_string(), |v| v.to_string()),
            verdict_word(self.overall)
        );
        for e in &self.entries {
            s.push_str(&format!(
                "  #{:<3} {:<9} {:<4}  max_dev={}  tol={}  {:>10.3} ms  {}",
                e.index,
                e.kind,
                verdict_word(e.verdict),
                sig17(e.max_deviation),
                sig17(e.tol),
                e.elapsed_ms,
                e.label
            ));
            if let Some(seed) = e.failing_seed {
                s.push_str(&format!("  failing_seed={seed}"));
            }
            s.push('\n');
        }
        s
    }

    /// Copy with every `elapsed_ms` zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Self {
        let mut r = self.clone();
        for e in r.entries.iter_mut() {
            e.elapsed_ms = 0.0;
        }
        r
    }
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    }
}

/// Scientific notation with 17 significant digits.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

struct SigFigFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for SigFigFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(sig17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(index: usize, verdict: Verdict, dev: f64) -> EntryReport {
        EntryReport {
            index,
            kind: "box".into(),
            label: "test".into(),
            verdict,
            max_deviation: dev,
            tol: 1e-10,
            failing_seed: None,
            elapsed_ms: 1.5,
            detail: serde_json::json!({ "chsh": 0.1 }),
        }
    }

    #[test]
    fn overall_is_conjunction() {
        let r = RunReport::new(
            None,
            vec![entry(1, Verdict::Pass, 0.0), entry(0, Verdict::Fail, 0.2)],
        );
        assert_eq!(r.overall, Verdict::Fail);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.entries[0].index, 0);
        assert_eq!(
            RunReport::new(Some(3), vec![entry(0, Verdict::Pass, 0.0)]).exit_code(),
            0
        );
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(sig17(0.1), "1.0000000000000001e-1");
        assert_eq!(sig17(1e-10), "1.0000000000000000e-10");
        for v in [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI * 1e-12,
            2f64.sqrt() * 2.0,
        ] {
            assert_eq!(sig17(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_round_trips_doubles() {
        let r = RunReport::new(Some(7), vec![entry(0, Verdict::Pass, 1.0 / 3.0)]);
        let text = r.to_json();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            back["entries"][0]["max_deviation"].as_f64().unwrap(),
            1.0 / 3.0
        );
        assert_eq!(back["entries"][0]["detail"]["chsh"].as_f64().unwrap(), 0.1);
        assert_eq!(back["overall"], "pass");
    }

    #[test]
    fn text_lists_each_entry() {
        let r = RunReport::new(
            Some(7),
            vec![entry(0, Verdict::Pass, 0.0), entry(1, Verdict::Fail, 0.5)],
        );
        let text = r.to_text();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with(&format!("nosig {TOOLKIT_VERSION}  seed=7  overall=FAIL")));
    }
}
