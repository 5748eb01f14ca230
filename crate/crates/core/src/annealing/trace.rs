use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::moves::MoveKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub elapsed: f64,
    pub current: f64,
    pub best: f64,
    pub temperature: f64,
    #[serde(rename = "move")]
    pub kind: MoveKind,
    pub accepted: bool,
}

/// Sampled history of an annealing run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Delimited table with a header line, one row per sample.
    pub fn to_delimited(&self, sep: char) -> String {
        let mut out = String::new();
        let header = ["iteration", "elapsed", "current", "best", "temperature", "move", "accepted"];
        out.push_str(&header.join(&sep.to_string()));
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{it}{sep}{el:.6}{sep}{cur}{sep}{best}{sep}{t}{sep}{kind}{sep}{acc}",
                it = r.iteration,
                el = r.elapsed,
                cur = r.current,
                best = r.best,
                t = r.temperature,
                kind = r.kind.number(),
                acc = u8::from(r.accepted),
            );
        }
        out
    }
}
