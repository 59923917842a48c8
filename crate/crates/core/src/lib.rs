// SPDX-License-Identifier: Apache-2.0

//! Deterministic simulation of IPv6 stateless address autoconfiguration on a
//! single switched link, the router-advertisement spoofing attacks that
//! abuse it, and the first-hop defenses against them.
//!
//! * [`net_model`]: addresses, EUI-64, ND messages.
//! * [`host`], [`router`], [`attacker`]: per-node state machines.
//! * [`defense`]: RA Guard / ACL port filtering, RA signing, CGAs.
//! * [`sim`]: the event engine, trace and metrics.
//! * [`scenario`] and [`cli`]: the scenario file format and the `run`
//!   command.

pub mod attacker;
pub mod cli;
pub mod defense;
pub mod host;
pub mod net_model;
pub mod outbox;
pub mod router;
pub mod scenario;
pub mod sim;
pub mod time;

pub use sim::{Engine, RunMetrics, SimError};
pub use time::SimTime;
