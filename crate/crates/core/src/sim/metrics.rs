// SPDX-License-Identifier: Apache-2.0

//! Snapshot of the link taken at a measurement point.

use std::collections::BTreeMap;
use std::fmt;

use crate::net_model::{AddressFamily, InterfaceId, Ipv6Address, NodeId, Seconds};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    Delivered,
    Blackholed,
    Unreachable,
}

impl fmt::Display for ProbeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Delivered => "delivered",
            Self::Blackholed => "blackholed",
            Self::Unreachable => "unreachable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostMetrics {
    pub node: NodeId,
    pub default_router: Option<NodeId>,
    pub assigned_addresses: Vec<Ipv6Address>,
    pub link_local: Option<Ipv6Address>,
    pub global: Option<Ipv6Address>,
    /// Valid lifetime left on `global`.
    pub valid_remaining: Option<Seconds>,
    pub family_in_use: Option<AddressFamily>,
    pub iid: Option<InterfaceId>,
    /// Probe path from the host, ending in `sink` or `drop` when it left the
    /// host at all.
    pub path: Vec<String>,
    pub outcome: ProbeOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunMetrics {
    pub time: SimTime,
    pub hosts: Vec<HostMetrics>,
    pub dos_success: bool,
    pub mitm_success: bool,
    pub dualstack_success: bool,
    /// RAs accepted by hosts since the previous measurement.
    pub ra_processed: usize,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "none".to_owned(), ToString::to_string)
}

impl HostMetrics {
    pub fn path_string(&self) -> String {
        if self.path.is_empty() {
            "none".to_owned()
        } else {
            self.path.join(">")
        }
    }

    /// Value of a per-host metric by name, as used by `expect` lines.
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "default_router" => opt(&self.default_router),
            "family" => opt(&self.family_in_use),
            "global" => opt(&self.global),
            "link_local" => opt(&self.link_local),
            "valid_remaining" => opt(&self.valid_remaining),
            "iid" => opt(&self.iid),
            "path" => self.path_string(),
            "outcome" => self.outcome.to_string(),
            "addresses" => self.assigned_addresses.len().to_string(),
            _ => return None,
        })
    }
}

impl RunMetrics {
    pub fn host(&self, node: &str) -> Option<&HostMetrics> {
        self.hosts.iter().find(|h| h.node.as_str() == node)
    }

    /// Host id → interface identifier in use, the device-tracking handle.
    pub fn privacy(&self) -> BTreeMap<NodeId, InterfaceId> {
        self.hosts
            .iter()
            .filter_map(|h| h.iid.map(|i| (h.node.clone(), i)))
            .collect()
    }

    pub fn get(&self, key: &str) -> Option<String> {
        match key {
            "dos_success" => Some(self.dos_success.to_string()),
            "mitm_success" => Some(self.mitm_success.to_string()),
            "dualstack_success" => Some(self.dualstack_success.to_string()),
            "ra_processed" => Some(self.ra_processed.to_string()),
            _ => {
                let (host, field) = key.split_once('.')?;
                self.host(host)?.get(field)
            }
        }
    }

    pub fn attack_flags(&self) -> [(&'static str, bool); 3] {
        [
            ("dos_success", self.dos_success),
            ("mitm_success", self.mitm_success),
            ("dualstack_success", self.dualstack_success),
        ]
    }
}

impl fmt::Display for RunMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "measure t={} ra_processed={}",
            self.time.millis(),
            self.ra_processed
        )?;
        for h in &self.hosts {
            let assigned: Vec<String> = h
                .assigned_addresses
                .iter()
                .map(ToString::to_string)
                .collect();
            writeln!(
                f,
                "host node={} default_router={} family={} outcome={} path={} global={} link_local={} valid_remaining={} iid={} assigned={}",
                h.node,
                opt(&h.default_router),
                opt(&h.family_in_use),
                h.outcome,
                h.path_string(),
                opt(&h.global),
                opt(&h.link_local),
                opt(&h.valid_remaining),
                opt(&h.iid),
                if assigned.is_empty() { "none".to_owned() } else { assigned.join(",") },
            )?;
        }
        for (name, value) in self.attack_flags() {
            writeln!(f, "attack {name}={value}")?;
        }
        Ok(())
    }
}
