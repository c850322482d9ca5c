//! Anytime traces and the area-under-the-curve metric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub time_s: f64,
    pub cost: usize,
}

/// Best-cost-so-far over time: one entry per accepted solution, optionally
/// closed by a marker entry at budget expiry that repeats the last cost.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    entries: Vec<TraceEntry>,
    closed: bool,
}

impl RunTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an accepted solution. Times must strictly increase and costs
    /// must not increase.
    pub fn record(&mut self, time_s: f64, cost: usize) -> Result<()> {
        if self.closed {
            return Err(Error::InvalidInput("trace is already closed".into()));
        }
        if !time_s.is_finite() || time_s < 0.0 {
            return Err(Error::InvalidInput(format!("invalid trace time {time_s}")));
        }
        if let Some(last) = self.entries.last() {
            if time_s <= last.time_s {
                return Err(Error::InvalidInput(format!(
                    "trace time {time_s} does not follow {}",
                    last.time_s
                )));
            }
            if cost > last.cost {
                return Err(Error::InvalidInput(format!(
                    "trace cost {cost} exceeds previous {}",
                    last.cost
                )));
            }
        }
        self.entries.push(TraceEntry { time_s, cost });
        Ok(())
    }

    /// Adds the end-of-run marker at `time_s` unless it would not advance time.
    pub fn close(&mut self, time_s: f64) {
        if self.closed {
            return;
        }
        if let Some(last) = self.entries.last().copied() {
            if time_s > last.time_s {
                self.entries.push(TraceEntry {
                    time_s,
                    cost: last.cost,
                });
                self.closed = true;
            }
        }
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Entries for accepted solutions, without the closing marker.
    pub fn accepted(&self) -> &[TraceEntry] {
        if self.closed {
            &self.entries[..self.entries.len() - 1]
        } else {
            &self.entries
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first(&self) -> Option<TraceEntry> {
        self.entries.first().copied()
    }

    pub fn last(&self) -> Option<TraceEntry> {
        self.entries.last().copied()
    }

    pub fn final_cost(&self) -> Option<usize> {
        self.last().map(|e| e.cost)
    }

    pub fn min_cost(&self) -> Option<usize> {
        self.entries.iter().map(|e| e.cost).min()
    }
}

/// Integral of the best-cost-so-far step function over `[t_first, budget_s]`,
/// in cost-seconds.
pub fn auc(trace: &RunTrace, budget_s: f64) -> Result<f64> {
    let entries = trace.entries();
    let last = entries
        .last()
        .ok_or_else(|| Error::InvalidInput("AUC of an empty trace".into()))?;
    if !(budget_s >= last.time_s) {
        return Err(Error::InvalidInput(format!(
            "budget {budget_s} precedes the last trace entry at {}",
            last.time_s
        )));
    }
    let mut area = 0.0;
    for (i, e) in entries.iter().enumerate() {
        let end = entries.get(i + 1).map_or(budget_s, |n| n.time_s);
        area += e.cost as f64 * (end - e.time_s);
    }
    Ok(area)
}
