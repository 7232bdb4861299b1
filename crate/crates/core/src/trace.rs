//! Finite traces of observed events.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// A finite sequence of events, each a set of atom names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace {
    pub events: Vec<BTreeSet<String>>,
}

impl Trace {
    pub fn new(events: Vec<BTreeSet<String>>) -> Self {
        Self { events }
    }

    pub fn from_events<I, E, S>(events: I) -> Self
    where
        I: IntoIterator<Item = E>,
        E: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { events: events.into_iter().map(|e| e.into_iter().map(Into::into).collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Parses the line format: one event per line, atoms separated by commas,
    /// an empty line is an empty event.
    pub fn parse_text(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() && text.is_empty() {
            return Ok(Self::default());
        }
        let events =
            body.split('\n').map(|line| parse_event_line(line.trim_end_matches('\r'))).collect::<Result<Vec<_>>>()?;
        Ok(Self { events })
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Accepts either format, picking JSON when the content starts with `[`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::parse_json(&text)
        } else {
            Self::parse(&text)
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.iter().cloned().collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("traces always serialize")
    }

    /// Fails on the first atom not contained in `atoms`.
    pub fn check_atoms<'a, I>(&self, atoms: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a String>,
    {
        let known: BTreeSet<&String> = atoms.into_iter().collect();
        for (i, e) in self.events.iter().enumerate() {
            if let Some(bad) = e.iter().find(|q| !known.contains(q)) {
                return Err(input(format!("event {i} mentions unknown atom `{bad}`")));
            }
        }
        Ok(())
    }
}

/// Parses one comma-separated event.
pub fn parse_event_line(line: &str) -> Result<BTreeSet<String>> {
    let mut event = BTreeSet::new();
    if line.trim().is_empty() {
        return Ok(event);
    }
    for part in line.split(',') {
        let atom = part.trim();
        if atom.is_empty() || !atom.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(input(format!("malformed atom `{atom}` in event `{line}`")));
        }
        event.insert(atom.to_string());
    }
    Ok(event)
}
