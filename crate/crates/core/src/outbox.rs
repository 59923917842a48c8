// SPDX-License-Identifier: Apache-2.0

//! Side effects produced by node state transitions. Handlers never touch the
//! engine directly; they push into an [`Outbox`] which the engine drains,
//! stamping time and node id onto trace records.

use crate::net_model::{Ipv6Address, NdMessage};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TimerKind {
    DadDeadline(Ipv6Address),
    Lifetime,
    PeriodicRa,
    Playbook,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub kind: &'static str,
    pub attrs: Vec<(&'static str, String)>,
}

#[derive(Debug, Default)]
pub struct Outbox {
    pub sends: Vec<NdMessage>,
    pub timers: Vec<(SimTime, TimerKind)>,
    pub trace: Vec<TraceEvent>,
}

impl Outbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(&mut self, msg: NdMessage) {
        self.sends.push(msg);
    }

    pub fn timer(&mut self, at: SimTime, kind: TimerKind) {
        self.timers.push((at, kind));
    }

    pub fn trace(&mut self, kind: &'static str, attrs: Vec<(&'static str, String)>) {
        self.trace.push(TraceEvent { kind, attrs });
    }

    pub fn has_trace(&self, kind: &str) -> bool {
        self.trace.iter().any(|t| t.kind == kind)
    }

    pub fn is_empty(&self) -> bool {
        self.sends.is_empty() && self.timers.is_empty() && self.trace.is_empty()
    }
}
