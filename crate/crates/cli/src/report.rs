use std::fmt::Write as _;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Undetermined,
}

/// One line of the structured report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub id: String,
    pub kind: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub certificate: Option<serde_json::Value>,
    pub millis: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub records: Vec<Record>,
}

pub const EXIT_FAILS: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_UNDETERMINED: u8 = 3;

impl Report {
    pub fn count(&self, v: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == v).count()
    }

    /// 0 when nothing fails or is undetermined, [`EXIT_FAILS`] if anything
    /// fails, else [`EXIT_UNDETERMINED`].
    pub fn exit_code(&self) -> u8 {
        if self.count(Verdict::Fails) > 0 {
            EXIT_FAILS
        } else if self.count(Verdict::Undetermined) > 0 {
            EXIT_UNDETERMINED
        } else {
            0
        }
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            let verdict = match r.verdict {
                Verdict::Holds => "holds",
                Verdict::Fails => "FAILS",
                Verdict::Undetermined => "undetermined",
            };
            let _ = write!(out, "{:<9} {:<12} {:<16}", r.id, verdict, r.kind);
            if let Some(w) = &r.witness {
                let _ = write!(out, " {w}");
            }
            let _ = writeln!(out, " [{} ms]", r.millis);
        }
        let _ = writeln!(
            out,
            "{} holds, {} fails, {} undetermined",
            self.count(Verdict::Holds),
            self.count(Verdict::Fails),
            self.count(Verdict::Undetermined)
        );
        out
    }

    /// Line-delimited JSON, one record per line.
    pub fn jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("plain data") + "\n")
            .collect()
    }
}
