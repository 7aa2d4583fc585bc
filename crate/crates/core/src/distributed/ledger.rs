use std::collections::BTreeMap;
use std::io::Write;

/// A communicating party in a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Central,
    Node(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RoundComm {
    pub round: usize,
    pub messages: u64,
    pub scalars: u64,
}

/// Message accounting. Round 0 is initialization.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CommLedger {
    rounds: Vec<RoundComm>,
    links: BTreeMap<(Party, Party), u64>,
    hops: u64,
}

impl CommLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one message of `scalars` numbers sent in `round`.
    pub fn send(&mut self, round: usize, from: Party, to: Party, scalars: usize) {
        if self.rounds.last().is_none_or(|r| r.round != round) {
            self.rounds.push(RoundComm {
                round,
                ..Default::default()
            });
        }
        let entry = self.rounds.last_mut().unwrap();
        entry.messages += 1;
        entry.scalars += scalars as u64;
        *self.links.entry((from, to)).or_default() += 1;
    }

    /// Token move; counted as a message as well.
    pub fn hop(&mut self, round: usize, from: usize, to: usize, scalars: usize) {
        self.hops += 1;
        self.send(round, Party::Node(from), Party::Node(to), scalars);
    }

    pub fn rounds(&self) -> &[RoundComm] {
        &self.rounds
    }

    pub fn round(&self, round: usize) -> Option<&RoundComm> {
        self.rounds.iter().find(|r| r.round == round)
    }

    pub fn link_count(&self, from: Party, to: Party) -> u64 {
        self.links.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn links(&self) -> &BTreeMap<(Party, Party), u64> {
        &self.links
    }

    pub fn total_messages(&self) -> u64 {
        self.rounds.iter().map(|r| r.messages).sum()
    }

    pub fn total_scalars(&self) -> u64 {
        self.rounds.iter().map(|r| r.scalars).sum()
    }

    pub fn hops(&self) -> u64 {
        self.hops
    }

    /// `round,messages,scalars` with a header row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "round,messages,scalars")?;
        for r in &self.rounds {
            writeln!(out, "{},{},{}", r.round, r.messages, r.scalars)?;
        }
        Ok(())
    }
}
