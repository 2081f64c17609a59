use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::pair::Pair;
use crate::error::{Error, Result};
use crate::metrics::GroundTruth;

/// How the admission score of an iteration is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scoring {
    /// Marks gathered in this iteration (plain percolation).
    Current,
    /// `max(current, previous iteration final)` (repairing iterations).
    MaxWithPrevious,
    /// Previous iteration's final marks only (parallel repair).
    PreviousOnly,
    /// Admitted the moment the threshold is crossed; no argmax.
    Immediate,
}

impl Scoring {
    fn tag(self) -> &'static str {
        match self {
            Scoring::Current => "current",
            Scoring::MaxWithPrevious => "max-prev",
            Scoring::PreviousOnly => "prev-only",
            Scoring::Immediate => "immediate",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "current" => Scoring::Current,
            "max-prev" => Scoring::MaxWithPrevious,
            "prev-only" => Scoring::PreviousOnly,
            "immediate" => Scoring::Immediate,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// Starts an iteration. The mark table resets; the previous iteration's
    /// final table becomes the reference for `MaxWithPrevious` and
    /// `PreviousOnly`.
    Begin {
        iteration: u32,
        threshold: u32,
        scoring: Scoring,
    },
    /// Seed pair placed in the matching without a threshold check.
    Seed(Pair),
    /// Pair spread one mark to each neighboring pair.
    Spread(Pair),
    /// Pair admitted with the given score.
    Insert {
        pair: Pair,
        marks: u32,
        degree_gap: u32,
    },
}

/// Ordered log of engine events, sufficient to replay mark bookkeeping.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

const HEADER: &str = "step\titeration\tevent\tpair\tmarks\tdegree_gap\tcorrect";

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, event: TraceEvent) {
        self.events.push(event);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn extend(&mut self, other: Trace) {
        self.events.extend(other.events);
    }

    /// Writes the trace as TSV. The `correct` column is filled when ground
    /// truth is given; for `begin` rows the `marks` column holds the
    /// iteration's threshold.
    pub fn write_tsv<W: Write>(&self, mut out: W, truth: Option<&GroundTruth>) -> Result<()> {
        writeln!(out, "{HEADER}")?;
        let mut iteration = 0;
        let correct = |p: Pair| match truth {
            Some(t) => (if t.contains(p) { "1" } else { "0" }).to_string(),
            None => "-".to_string(),
        };
        for (step, event) in self.events.iter().enumerate() {
            match *event {
                TraceEvent::Begin {
                    iteration: it,
                    threshold,
                    scoring,
                } => {
                    iteration = it;
                    writeln!(
                        out,
                        "{step}\t{iteration}\tbegin:{}\t-\t{threshold}\t-\t-",
                        scoring.tag()
                    )?;
                }
                TraceEvent::Seed(p) => {
                    writeln!(out, "{step}\t{iteration}\tseed\t{p}\t-\t-\t{}", correct(p))?
                }
                TraceEvent::Spread(p) => {
                    writeln!(out, "{step}\t{iteration}\tspread\t{p}\t-\t-\t{}", correct(p))?
                }
                TraceEvent::Insert {
                    pair,
                    marks,
                    degree_gap,
                } => writeln!(
                    out,
                    "{step}\t{iteration}\tinsert\t{pair}\t{marks}\t{degree_gap}\t{}",
                    correct(pair)
                )?,
            }
        }
        Ok(())
    }

    pub fn to_tsv(&self, truth: Option<&GroundTruth>) -> String {
        let mut buf = Vec::new();
        self.write_tsv(&mut buf, truth).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace output is ASCII")
    }

    /// Parses the output of [`Trace::write_tsv`].
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Trace> {
        let mut trace = Trace::new();
        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            if index == 0 {
                if line.trim_end() != HEADER {
                    return Err(malformed(0, "missing header"));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 7 {
                return Err(malformed(index, "expected 7 columns"));
            }
            let number = |s: &str, what: &str| -> Result<u32> {
                s.parse().map_err(|_| malformed(index, &format!("bad {what} {s:?}")))
            };
            let event = if let Some(tag) = cols[2].strip_prefix("begin:") {
                let scoring = Scoring::from_tag(tag)
                    .ok_or_else(|| malformed(index, &format!("unknown scoring {tag:?}")))?;
                TraceEvent::Begin {
                    iteration: number(cols[1], "iteration")?,
                    threshold: number(cols[4], "threshold")?,
                    scoring,
                }
            } else {
                let pair = parse_pair(cols[3]).ok_or_else(|| malformed(index, "bad pair"))?;
                match cols[2] {
                    "seed" => TraceEvent::Seed(pair),
                    "spread" => TraceEvent::Spread(pair),
                    "insert" => TraceEvent::Insert {
                        pair,
                        marks: number(cols[4], "marks")?,
                        degree_gap: number(cols[5], "degree gap")?,
                    },
                    other => return Err(malformed(index, &format!("unknown event {other:?}"))),
                }
            };
            trace.push(event);
        }
        Ok(trace)
    }
}

fn parse_pair(s: &str) -> Option<Pair> {
    let (u, v) = s.split_once(':')?;
    Some(Pair::new(u.parse().ok()?, v.parse().ok()?))
}

fn malformed(index: usize, reason: &str) -> Error {
    Error::MalformedTrace {
        index,
        reason: reason.to_owned(),
    }
}
