use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{input, Result};
use crate::graphmodel::Network;
use crate::io::check_header;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Exposure,
    Adoption,
}

impl EventKind {
    fn as_str(self) -> &'static str {
        match self {
            EventKind::Exposure => "exposure",
            EventKind::Adoption => "adoption",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub time: u32,
    pub kind: EventKind,
    pub subject: usize,
    /// Exposing neighbor; `None` for adoptions.
    pub source: Option<usize>,
}

/// Time-ordered events of one cascade. Seeds appear as adoptions at time 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    /// Checks ordering, edge membership and single adoption per node.
    pub fn validate(&self, net: &Network) -> Result<()> {
        let mut last = 0;
        let mut adopted = BTreeSet::new();
        for (i, e) in self.events.iter().enumerate() {
            if e.time < last {
                return Err(input(format!("event {i}: time {} decreases", e.time)));
            }
            last = e.time;
            if e.subject >= net.n() {
                return Err(input(format!("event {i}: node {} not in network", e.subject)));
            }
            match (e.kind, e.source) {
                (EventKind::Exposure, Some(src)) => {
                    if !net.has_edge(e.subject, src) {
                        return Err(input(format!("event {i}: no edge between {} and {src}", e.subject)));
                    }
                }
                (EventKind::Exposure, None) => {
                    return Err(input(format!("event {i}: exposure without source")));
                }
                (EventKind::Adoption, Some(_)) => {
                    return Err(input(format!("event {i}: adoption with a source")));
                }
                (EventKind::Adoption, None) => {
                    if !adopted.insert(e.subject) {
                        return Err(input(format!("event {i}: node {} adopts twice", e.subject)));
                    }
                }
            }
        }
        Ok(())
    }
}

const HEADER: [&str; 4] = ["time", "kind", "subject", "source"];

/// Reads `time,kind,subject,source` rows.
pub fn read_event_log<R: Read>(reader: R) -> Result<EventLog> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(r.headers()?, &HEADER)?;
    let mut events = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let time = field(0)
            .parse()
            .map_err(|_| input(format!("line {line}: bad time '{}'", field(0))))?;
        let kind = match field(1) {
            "exposure" => EventKind::Exposure,
            "adoption" => EventKind::Adoption,
            other => return Err(input(format!("line {line}: unknown kind '{other}'"))),
        };
        let subject = field(2)
            .parse()
            .map_err(|_| input(format!("line {line}: bad subject '{}'", field(2))))?;
        let source = match field(3) {
            "" => None,
            s => Some(
                s.parse()
                    .map_err(|_| input(format!("line {line}: bad source '{s}'")))?,
            ),
        };
        events.push(Event {
            time,
            kind,
            subject,
            source,
        });
    }
    Ok(EventLog { events })
}

pub fn write_event_log<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(HEADER)?;
    for e in &log.events {
        let source = e.source.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            e.time.to_string().as_str(),
            e.kind.as_str(),
            e.subject.to_string().as_str(),
            source.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
