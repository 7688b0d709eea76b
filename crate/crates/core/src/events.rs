use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::network::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Node fell below the death threshold.
    Death,
    /// `nodes = [dead, replacement]`: a stand-by neighbour took over.
    Replacement,
    /// A dead active node had no stand-by neighbour to take over.
    Unreplaced,
    /// `nodes = [outgoing, incoming]`: active/stand-by swap on timer expiry.
    Rotation,
    /// `nodes = [new head]` for `cluster`.
    NewHead,
    /// Spiral propagation hit its step limit without a cost crossover.
    NoCrossover,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub round: u64,
    pub kind: EventKind,
    pub nodes: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<usize>,
}

impl Event {
    pub fn new(round: u64, kind: EventKind, nodes: Vec<NodeId>) -> Self {
        Self {
            round,
            kind,
            nodes,
            cluster: None,
        }
    }

    pub fn in_cluster(mut self, cluster: usize) -> Self {
        self.cluster = Some(cluster);
        self
    }
}

/// Writes one JSON object per line.
pub fn write_events_jsonl<W: Write>(events: &[Event], mut out: W) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_layout() {
        let events = vec![
            Event::new(3, EventKind::Death, vec![7]),
            Event::new(3, EventKind::NewHead, vec![9]).in_cluster(1),
        ];
        let mut buf = Vec::new();
        write_events_jsonl(&events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "{\"round\":3,\"kind\":\"death\",\"nodes\":[7]}\n\
             {\"round\":3,\"kind\":\"new_head\",\"nodes\":[9],\"cluster\":1}\n"
        );
        let back: Vec<Event> = text
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(back, events);
    }
}
