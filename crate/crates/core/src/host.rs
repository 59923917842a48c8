// SPDX-License-Identifier: Apache-2.0

//! Host-side SLAAC.
//!
//! A host first forms a link-local address from its interface identifier and
//! probes it with a single neighbor solicitation. If nothing objects within
//! [`DAD_TIMEOUT_MS`] the address is assigned and a router solicitation goes
//! out. Router advertisements then populate the default-router list and, for
//! autonomous /64 prefixes, produce global addresses which go through the
//! same duplicate-address check.
//!
//! Every handler is a pure transition over `HostState`: inputs are the
//! message, the sending node as seen by the engine and the current time;
//! outputs go to an [`Outbox`].

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::defense::{verify_ra, TrustAnchorRegistry};
use crate::net_model::{
    derive_eui64, global_from, link_local_from, AddressFamily, Endpoint, InterfaceId, Ipv4Address,
    Ipv6Address, KeyId, MacAddress, NdMessage, NodeId, Prefix, RouterAdvertisement,
    RouterPreference, Seconds,
};
use crate::outbox::{Outbox, TimerKind};
use crate::time::SimTime;

/// One probe, one second.
pub const DAD_TIMEOUT_MS: u64 = 1000;

pub const TWO_HOURS: Seconds = 7200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddressState {
    Tentative,
    Assigned,
    Abandoned,
}

impl fmt::Display for AddressState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tentative => "tentative",
            Self::Assigned => "assigned",
            Self::Abandoned => "abandoned",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AbandonReason {
    DadFailed,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AddressOrigin {
    LinkLocal,
    Slaac {
        prefix: Prefix,
        learned_from: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressEntry {
    pub address: Ipv6Address,
    pub state: AddressState,
    /// `None` is an infinite lifetime (link-local addresses).
    pub valid_until: Option<SimTime>,
    pub preferred_until: Option<SimTime>,
    pub origin: AddressOrigin,
    pub abandoned: Option<AbandonReason>,
}

impl AddressEntry {
    pub fn valid_remaining(&self, now: SimTime) -> Option<Seconds> {
        self.valid_until.map(|t| now.secs_until(t))
    }

    pub fn preferred_remaining(&self, now: SimTime) -> Option<Seconds> {
        self.preferred_until.map(|t| now.secs_until(t))
    }

    pub fn is_link_local(&self) -> bool {
        self.origin == AddressOrigin::LinkLocal
    }

    fn slaac_prefix(&self) -> Option<Prefix> {
        match &self.origin {
            AddressOrigin::Slaac { prefix, .. } => Some(*prefix),
            AddressOrigin::LinkLocal => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefaultRouterEntry {
    pub router_ip: Ipv6Address,
    pub router_mac: MacAddress,
    /// The node that owns `router_mac` on the link, i.e. where frames sent
    /// to this router actually land.
    pub router_node: NodeId,
    pub expires_at: SimTime,
    pub preference: RouterPreference,
    pub refreshed_at: SimTime,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SendMode {
    #[default]
    Open,
    /// Accept only RAs carrying a valid token for one of these keys.
    SendOnly(BTreeSet<KeyId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NextHop {
    Via(AddressFamily),
    Unreachable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ipv4Config {
    pub address: Ipv4Address,
    pub gateway: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostConfig {
    pub node_id: NodeId,
    pub mac: MacAddress,
    /// Replaces the EUI-64 identifier when set.
    pub iid_override: Option<InterfaceId>,
    pub ipv6_enabled: bool,
    pub ipv4: Option<Ipv4Config>,
    pub family_preference: [AddressFamily; 2],
    pub send_mode: SendMode,
    pub two_hour_rule: bool,
}

impl HostConfig {
    pub fn new(node_id: NodeId, mac: MacAddress) -> Self {
        Self {
            node_id,
            mac,
            iid_override: None,
            ipv6_enabled: true,
            ipv4: None,
            family_preference: [AddressFamily::Ipv6, AddressFamily::Ipv4],
            send_mode: SendMode::Open,
            two_hour_rule: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HostState {
    pub node_id: NodeId,
    pub mac: MacAddress,
    pub iid: InterfaceId,
    pub addresses: Vec<AddressEntry>,
    pub router_list: Vec<DefaultRouterEntry>,
    pub ipv6_enabled: bool,
    pub ipv4: Option<Ipv4Config>,
    pub family_preference: [AddressFamily; 2],
    pub dad_pending: BTreeMap<Ipv6Address, SimTime>,
    pub send_mode: SendMode,
    pub two_hour_rule: bool,
}

/// Valid-lifetime update for an existing SLAAC address: a received lifetime
/// is taken as-is if it exceeds two hours or extends the address; otherwise
/// the address keeps at least `min(remaining, two hours)`.
pub fn apply_two_hour_rule(remaining: Seconds, received: Seconds) -> Seconds {
    if received > TWO_HOURS || received > remaining {
        received
    } else if remaining <= TWO_HOURS {
        remaining
    } else {
        TWO_HOURS
    }
}

fn addr_attr(a: Ipv6Address) -> String {
    a.to_string()
}

impl HostState {
    pub fn new(config: HostConfig) -> Self {
        let iid = config
            .iid_override
            .unwrap_or_else(|| derive_eui64(config.mac));
        Self {
            node_id: config.node_id,
            mac: config.mac,
            iid,
            addresses: Vec::new(),
            router_list: Vec::new(),
            ipv6_enabled: config.ipv6_enabled,
            ipv4: config.ipv4,
            family_preference: config.family_preference,
            dad_pending: BTreeMap::new(),
            send_mode: config.send_mode,
            two_hour_rule: config.two_hour_rule,
        }
    }

    pub fn link_local(&self) -> Option<&AddressEntry> {
        self.addresses.iter().find(|e| e.is_link_local())
    }

    /// First assigned global address, which is also the v6 source address.
    pub fn global_address(&self) -> Option<&AddressEntry> {
        self.addresses
            .iter()
            .find(|e| !e.is_link_local() && e.state == AddressState::Assigned)
    }

    pub fn assigned(&self) -> impl Iterator<Item = &AddressEntry> {
        self.addresses
            .iter()
            .filter(|e| e.state == AddressState::Assigned)
    }

    fn entry_mut(&mut self, address: Ipv6Address) -> Option<&mut AddressEntry> {
        self.addresses
            .iter_mut()
            .find(|e| e.address == address && e.state != AddressState::Abandoned)
    }

    fn link_local_ready(&self) -> bool {
        self.link_local()
            .is_some_and(|e| e.state == AddressState::Assigned)
    }

    fn start_dad(&mut self, entry: AddressEntry, now: SimTime, out: &mut Outbox) {
        let target = entry.address;
        let deadline = now + DAD_TIMEOUT_MS;
        out.trace("addr-tentative", vec![("addr", addr_attr(target))]);
        self.addresses.push(entry);
        self.dad_pending.insert(target, deadline);
        out.send(NdMessage::NeighborSolicitation {
            src_mac: self.mac,
            src_ip: Ipv6Address::UNSPECIFIED,
            target,
        });
        out.trace("ns-sent", vec![("target", addr_attr(target))]);
        out.timer(deadline, TimerKind::DadDeadline(target));
    }

    /// Phase 1 entry point: form the link-local address and probe it.
    pub fn begin_autoconf(&mut self, now: SimTime, out: &mut Outbox) {
        if !self.ipv6_enabled || self.link_local().is_some() {
            return;
        }
        let entry = AddressEntry {
            address: link_local_from(self.iid),
            state: AddressState::Tentative,
            valid_until: None,
            preferred_until: None,
            origin: AddressOrigin::LinkLocal,
            abandoned: None,
        };
        self.start_dad(entry, now, out);
    }

    fn abandon(&mut self, address: Ipv6Address, reason: &'static str, out: &mut Outbox) {
        if let Some(e) = self.entry_mut(address) {
            e.state = AddressState::Abandoned;
            e.abandoned = Some(AbandonReason::DadFailed);
            self.dad_pending.remove(&address);
            out.trace(
                "dad-failed",
                vec![("addr", addr_attr(address)), ("reason", reason.into())],
            );
        }
    }

    /// Answers a solicitation for one of our addresses. A solicitation from
    /// another node for an address we are still probing is a simultaneous
    /// DAD: the lexicographically smaller node id defends, the other yields.
    pub fn on_neighbor_solicitation(
        &mut self,
        from: &NodeId,
        src_ip: Ipv6Address,
        target: Ipv6Address,
        out: &mut Outbox,
    ) {
        if !self.ipv6_enabled || from == &self.node_id {
            return;
        }
        let Some(entry) = self
            .addresses
            .iter()
            .find(|e| e.address == target && e.state != AddressState::Abandoned)
        else {
            return;
        };
        let defend = match entry.state {
            AddressState::Assigned => true,
            AddressState::Tentative if src_ip.is_unspecified() => self.node_id < *from,
            _ => return,
        };
        if defend {
            out.send(NdMessage::NeighborAdvertisement {
                src_mac: self.mac,
                src_ip: target,
                target,
            });
            out.trace(
                "na-sent",
                vec![("target", addr_attr(target)), ("to", from.to_string())],
            );
        } else {
            self.abandon(target, "simultaneous-dad", out);
        }
    }

    pub fn on_neighbor_advertisement(&mut self, target: Ipv6Address, out: &mut Outbox) {
        if !self.ipv6_enabled {
            return;
        }
        if self
            .entry_mut(target)
            .is_some_and(|e| e.state == AddressState::Tentative)
        {
            self.abandon(target, "neighbor-advertisement", out);
        }
    }

    /// DAD timer expiry. A stale timer (address abandoned, or deadline moved)
    /// is ignored.
    pub fn dad_deadline(&mut self, address: Ipv6Address, now: SimTime, out: &mut Outbox) {
        match self.dad_pending.get(&address) {
            Some(deadline) if *deadline <= now => {}
            _ => return,
        }
        self.dad_pending.remove(&address);
        let mac = self.mac;
        let Some(entry) = self.entry_mut(address) else {
            return;
        };
        if entry.state != AddressState::Tentative {
            return;
        }
        entry.state = AddressState::Assigned;
        let link_local = entry.is_link_local();
        let valid_until = entry.valid_until;
        out.trace("addr-assigned", vec![("addr", addr_attr(address))]);
        if link_local {
            out.send(NdMessage::RouterSolicitation {
                src_mac: mac,
                src_ip: address,
            });
            out.trace("rs-sent", vec![("src", addr_attr(address))]);
        } else if let Some(t) = valid_until {
            out.timer(t, TimerKind::Lifetime);
        }
    }

    /// Applies a router advertisement. `sender` is the node owning the RA's
    /// source MAC on the link.
    pub fn process_ra(
        &mut self,
        ra: &RouterAdvertisement,
        sender: &NodeId,
        registry: &TrustAnchorRegistry,
        now: SimTime,
        out: &mut Outbox,
    ) {
        if !self.ipv6_enabled {
            return;
        }
        if !self.link_local_ready() {
            out.trace(
                "ra-ignored",
                vec![
                    ("src", addr_attr(ra.src_ip)),
                    ("reason", "no-link-local".into()),
                ],
            );
            return;
        }
        if let SendMode::SendOnly(anchors) = &self.send_mode {
            let trusted = ra
                .auth
                .as_ref()
                .is_some_and(|t| anchors.contains(&t.key_id));
            if !trusted || !verify_ra(ra, registry) {
                out.trace(
                    "ra-rejected-send",
                    vec![
                        ("src", addr_attr(ra.src_ip)),
                        ("mac", ra.src_mac.to_string()),
                    ],
                );
                return;
            }
        }
        out.trace(
            "ra-accepted",
            vec![
                ("src", addr_attr(ra.src_ip)),
                ("mac", ra.src_mac.to_string()),
                ("lifetime", ra.router_lifetime.to_string()),
                ("preference", ra.preference.to_string()),
            ],
        );
        // Under SendOnly every accepted RA has been verified.
        let authenticated = matches!(self.send_mode, SendMode::SendOnly(_));
        self.update_router_list(ra, sender, now, out);
        for info in &ra.prefixes {
            let prefix = info.prefix();
            if !info.autonomous() {
                out.trace(
                    "prefix-ignored",
                    vec![
                        ("prefix", prefix.to_string()),
                        ("reason", "not-autonomous".into()),
                    ],
                );
                continue;
            }
            if prefix.length() != 64 {
                out.trace(
                    "prefix-ignored",
                    vec![("prefix", prefix.to_string()), ("reason", "length".into())],
                );
                continue;
            }
            let existing = self.addresses.iter().position(|e| {
                e.slaac_prefix() == Some(prefix) && e.abandoned != Some(AbandonReason::Expired)
            });
            match existing {
                Some(i) if self.addresses[i].state == AddressState::Abandoned => {}
                Some(i) => self.update_lifetimes(
                    i,
                    info.valid_lifetime(),
                    info.preferred_lifetime(),
                    authenticated,
                    now,
                    out,
                ),
                None if info.valid_lifetime() == 0 => {
                    out.trace(
                        "prefix-ignored",
                        vec![
                            ("prefix", prefix.to_string()),
                            ("reason", "zero-lifetime".into()),
                        ],
                    );
                }
                None => {
                    let address = global_from(prefix, self.iid).expect("length checked above");
                    let entry = AddressEntry {
                        address,
                        state: AddressState::Tentative,
                        valid_until: Some(now.after_secs(info.valid_lifetime())),
                        preferred_until: Some(now.after_secs(info.preferred_lifetime())),
                        origin: AddressOrigin::Slaac {
                            prefix,
                            learned_from: sender.clone(),
                        },
                        abandoned: None,
                    };
                    self.start_dad(entry, now, out);
                }
            }
        }
    }

    fn update_router_list(
        &mut self,
        ra: &RouterAdvertisement,
        sender: &NodeId,
        now: SimTime,
        out: &mut Outbox,
    ) {
        let existing = self
            .router_list
            .iter()
            .position(|r| r.router_ip == ra.src_ip);
        if ra.router_lifetime == 0 {
            if let Some(i) = existing {
                let removed = self.router_list.remove(i);
                out.trace(
                    "router-removed",
                    vec![
                        ("router", addr_attr(removed.router_ip)),
                        ("reason", "zero-lifetime".into()),
                    ],
                );
            }
            return;
        }
        let entry = DefaultRouterEntry {
            router_ip: ra.src_ip,
            router_mac: ra.src_mac,
            router_node: sender.clone(),
            expires_at: now.after_secs(Seconds::from(ra.router_lifetime)),
            preference: ra.preference,
            refreshed_at: now,
        };
        let kind = match existing {
            Some(i) => {
                self.router_list[i] = entry;
                "router-refreshed"
            }
            None => {
                self.router_list.push(entry);
                "router-added"
            }
        };
        out.trace(
            kind,
            vec![
                ("router", addr_attr(ra.src_ip)),
                ("node", sender.to_string()),
                ("lifetime", ra.router_lifetime.to_string()),
                ("preference", ra.preference.to_string()),
            ],
        );
        out.timer(
            now.after_secs(Seconds::from(ra.router_lifetime)),
            TimerKind::Lifetime,
        );
    }

    fn update_lifetimes(
        &mut self,
        i: usize,
        valid: Seconds,
        preferred: Seconds,
        authenticated: bool,
        now: SimTime,
        out: &mut Outbox,
    ) {
        let two_hour_rule = self.two_hour_rule && !authenticated;
        let entry = &mut self.addresses[i];
        let remaining = entry.valid_remaining(now).unwrap_or(Seconds::MAX);
        let new_valid = if two_hour_rule {
            apply_two_hour_rule(remaining, valid)
        } else {
            valid
        };
        entry.valid_until = Some(now.after_secs(new_valid));
        entry.preferred_until = Some(now.after_secs(preferred.min(new_valid)));
        out.trace(
            "lifetime-updated",
            vec![
                ("addr", addr_attr(entry.address)),
                ("remaining", remaining.to_string()),
                ("received", valid.to_string()),
                ("valid", new_valid.to_string()),
            ],
        );
        out.timer(now.after_secs(new_valid), TimerKind::Lifetime);
    }

    /// Highest preference wins, then the most recently refreshed, then the
    /// lowest router address.
    pub fn select_default_router(&self, now: SimTime) -> Option<&DefaultRouterEntry> {
        self.router_list
            .iter()
            .filter(|r| r.expires_at > now)
            .max_by_key(|r| (r.preference, r.refreshed_at, Reverse(r.router_ip)))
    }

    /// Picks the first usable family in preference order. `hint` restricts
    /// the choice to one family.
    pub fn resolve_next_hop(
        &self,
        now: SimTime,
        hint: Option<AddressFamily>,
    ) -> (NextHop, Option<NodeId>) {
        for family in self.family_preference {
            if hint.is_some_and(|h| h != family) {
                continue;
            }
            match family {
                AddressFamily::Ipv6 => {
                    if !self.ipv6_enabled || self.global_address().is_none() {
                        continue;
                    }
                    if let Some(r) = self.select_default_router(now) {
                        return (
                            NextHop::Via(AddressFamily::Ipv6),
                            Some(r.router_node.clone()),
                        );
                    }
                }
                AddressFamily::Ipv4 => {
                    if let Some(v4) = &self.ipv4 {
                        return (NextHop::Via(AddressFamily::Ipv4), Some(v4.gateway.clone()));
                    }
                }
            }
        }
        (NextHop::Unreachable, None)
    }

    /// Source endpoint for traffic of `family`. Only assigned addresses are
    /// ever returned.
    pub fn source_for(&self, family: AddressFamily) -> Option<Endpoint> {
        match family {
            AddressFamily::Ipv6 => self.global_address().map(|e| Endpoint::V6(e.address)),
            AddressFamily::Ipv4 => self.ipv4.as_ref().map(|v| Endpoint::V4(v.address)),
        }
    }

    pub fn tick_lifetimes(&mut self, now: SimTime, out: &mut Outbox) {
        let mut removed = Vec::new();
        self.router_list.retain(|r| {
            let keep = r.expires_at > now;
            if !keep {
                removed.push(r.router_ip);
            }
            keep
        });
        for ip in removed {
            out.trace(
                "router-removed",
                vec![("router", addr_attr(ip)), ("reason", "expired".into())],
            );
        }
        for e in &mut self.addresses {
            if e.state == AddressState::Abandoned {
                continue;
            }
            if e.valid_until.is_some_and(|t| t <= now) {
                e.state = AddressState::Abandoned;
                e.abandoned = Some(AbandonReason::Expired);
                self.dad_pending.remove(&e.address);
                out.trace("addr-expired", vec![("addr", addr_attr(e.address))]);
            }
        }
    }

    /// Structural invariants; the engine treats a violation as fatal.
    pub fn check_invariants(&self, now: SimTime) -> Result<(), String> {
        if !self.ipv6_enabled && (!self.addresses.is_empty() || !self.router_list.is_empty()) {
            return Err(format!(
                "{}: IPv6 disabled but holds v6 state",
                self.node_id
            ));
        }
        if self.addresses.iter().filter(|e| e.is_link_local()).count() > 1 {
            return Err(format!(
                "{}: more than one link-local address",
                self.node_id
            ));
        }
        for e in &self.addresses {
            if let (Some(v), Some(p)) = (e.valid_remaining(now), e.preferred_remaining(now)) {
                if p > v {
                    return Err(format!(
                        "{}: {} preferred {p}s exceeds valid {v}s",
                        self.node_id, e.address
                    ));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defense::sign_ra;
    use crate::net_model::PrefixInfo;

    const MAC: &str = "00:1a:2b:3c:4d:5e";

    fn host(id: &str) -> HostState {
        HostState::new(HostConfig::new(id.into(), MAC.parse().unwrap()))
    }

    fn t(ms: u64) -> SimTime {
        SimTime(ms)
    }

    fn ra(
        src: &str,
        lifetime: u16,
        pref: RouterPreference,
        prefixes: &[(&str, bool)],
    ) -> RouterAdvertisement {
        RouterAdvertisement {
            src_mac: "00:00:5e:00:53:01".parse().unwrap(),
            src_ip: src.parse().unwrap(),
            router_lifetime: lifetime,
            preference: pref,
            prefixes: prefixes
                .iter()
                .map(|(p, a)| PrefixInfo::new(p.parse().unwrap(), *a, 86400, 14400).unwrap())
                .collect(),
            auth: None,
        }
    }

    /// Host with an assigned link-local, ready for phase 2.
    fn ready_host() -> HostState {
        let mut h = host("H1");
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        let ll = h.link_local().unwrap().address;
        h.dad_deadline(ll, t(1000), &mut out);
        h
    }

    // Independent oracle: RFC 4862 5.5.3(e) written as a decision table over
    // the three predicates, evaluated separately from the implementation.
    fn two_hour_oracle(remaining: u32, received: u32) -> u32 {
        let over_two_hours = received > 7200;
        let extends = received > remaining;
        let remaining_short = remaining <= 7200;
        match (over_two_hours, extends, remaining_short) {
            (true, _, _) | (_, true, _) => received,
            (false, false, true) => remaining,
            (false, false, false) => 7200,
        }
    }

    #[test]
    fn two_hour_rule_examples() {
        assert_eq!(two_hour_oracle(10000, 100), 7200);
        assert_eq!(two_hour_oracle(5000, 100), 5000);
        assert_eq!(two_hour_oracle(5000, 9000), 9000);
        assert_eq!(apply_two_hour_rule(10000, 100), 7200);
        assert_eq!(apply_two_hour_rule(5000, 100), 5000);
        assert_eq!(apply_two_hour_rule(5000, 9000), 9000);
    }

    #[test]
    fn two_hour_rule_matches_oracle_on_boundaries() {
        let points = [
            0,
            1,
            99,
            100,
            7199,
            7200,
            7201,
            9000,
            10000,
            u32::MAX - 1,
            u32::MAX,
        ];
        for &r in &points {
            for &x in &points {
                assert_eq!(
                    apply_two_hour_rule(r, x),
                    two_hour_oracle(r, x),
                    "remaining={r} received={x}"
                );
            }
        }
    }

    #[test]
    fn begin_autoconf_emits_ns_for_eui64_link_local() {
        let mut h = host("H1");
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        let target: Ipv6Address = "fe80::21a:2bff:fe3c:4d5e".parse().unwrap();
        assert!(
            matches!(out.sends[0], NdMessage::NeighborSolicitation { target: t, .. } if t == target)
        );
        assert_eq!(out.timers, vec![(t(1000), TimerKind::DadDeadline(target))]);
        assert_eq!(h.addresses[0].state, AddressState::Tentative);
    }

    #[test]
    fn begin_autoconf_disabled_ipv6() {
        let mut cfg = HostConfig::new("H1".into(), MAC.parse().unwrap());
        cfg.ipv6_enabled = false;
        let mut h = HostState::new(cfg);
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        assert!(out.is_empty());
        assert!(h.addresses.is_empty());
    }

    #[test]
    fn begin_autoconf_iid_override_zero() {
        let mut cfg = HostConfig::new("H1".into(), MAC.parse().unwrap());
        cfg.iid_override = Some(InterfaceId(0));
        let mut h = HostState::new(cfg);
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        assert!(
            matches!(out.sends[0], NdMessage::NeighborSolicitation { target, .. } if target.to_string() == "fe80::")
        );
    }

    #[test]
    fn ns_for_assigned_address_is_answered() {
        let mut h = ready_host();
        let ll = h.link_local().unwrap().address;
        let mut out = Outbox::new();
        h.on_neighbor_solicitation(&"H2".into(), Ipv6Address::UNSPECIFIED, ll, &mut out);
        assert!(
            matches!(out.sends[0], NdMessage::NeighborAdvertisement { target, .. } if target == ll)
        );
        let mut out = Outbox::new();
        h.on_neighbor_solicitation(
            &"H2".into(),
            Ipv6Address::UNSPECIFIED,
            "fe80::99".parse().unwrap(),
            &mut out,
        );
        assert!(out.is_empty());
    }

    #[test]
    fn simultaneous_dad_smaller_id_wins() {
        let (mut a, mut b) = (host("H1"), host("H2"));
        let (mut oa, mut ob) = (Outbox::new(), Outbox::new());
        a.begin_autoconf(t(0), &mut oa);
        b.begin_autoconf(t(0), &mut ob);
        let target = a.link_local().unwrap().address;
        let (mut ra_out, mut rb_out) = (Outbox::new(), Outbox::new());
        a.on_neighbor_solicitation(&"H2".into(), Ipv6Address::UNSPECIFIED, target, &mut ra_out);
        b.on_neighbor_solicitation(&"H1".into(), Ipv6Address::UNSPECIFIED, target, &mut rb_out);
        assert_eq!(ra_out.sends.len(), 1, "H1 defends");
        assert!(rb_out.has_trace("dad-failed"));
        assert_eq!(b.addresses[0].state, AddressState::Abandoned);
        // H1's NA reaching H2 changes nothing further.
        let mut late = Outbox::new();
        b.on_neighbor_advertisement(target, &mut late);
        assert!(late.is_empty());
        a.dad_deadline(target, t(1000), &mut oa);
        b.dad_deadline(target, t(1000), &mut ob);
        assert_eq!(a.addresses[0].state, AddressState::Assigned);
        assert_eq!(b.addresses[0].state, AddressState::Abandoned);
    }

    #[test]
    fn na_abandons_tentative_and_cancels_deadline() {
        let mut h = host("H1");
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        let ll = h.link_local().unwrap().address;
        let mut out = Outbox::new();
        h.on_neighbor_advertisement(ll, &mut out);
        assert!(out.has_trace("dad-failed"));
        assert!(h.dad_pending.is_empty());
        let mut out = Outbox::new();
        h.dad_deadline(ll, t(1000), &mut out);
        assert!(out.is_empty());
        assert_eq!(h.addresses[0].state, AddressState::Abandoned);
    }

    #[test]
    fn na_after_assignment_is_ignored() {
        let mut h = ready_host();
        let ll = h.link_local().unwrap().address;
        let mut out = Outbox::new();
        h.on_neighbor_advertisement(ll, &mut out);
        assert!(out.is_empty());
        assert_eq!(h.link_local().unwrap().state, AddressState::Assigned);
        h.on_neighbor_advertisement("fe80::5".parse().unwrap(), &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn link_local_dad_success_sends_rs() {
        let mut h = host("H1");
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        let ll = h.link_local().unwrap().address;
        let mut out = Outbox::new();
        h.dad_deadline(ll, t(1000), &mut out);
        assert!(
            matches!(out.sends[..], [NdMessage::RouterSolicitation { src_ip, .. }] if src_ip == ll)
        );
    }

    #[test]
    fn ra_creates_router_and_tentative_global() {
        let mut h = ready_host();
        let mut out = Outbox::new();
        let reg = TrustAnchorRegistry::new();
        let adv = ra(
            "fe80::1",
            1800,
            RouterPreference::Medium,
            &[("2001:db8:1::/64", true)],
        );
        h.process_ra(&adv, &"R1".into(), &reg, t(1002), &mut out);
        assert_eq!(
            h.select_default_router(t(1002))
                .unwrap()
                .router_node
                .as_str(),
            "R1"
        );
        let global: Ipv6Address = "2001:db8:1:0:21a:2bff:fe3c:4d5e".parse().unwrap();
        let e = h.addresses.iter().find(|e| e.address == global).unwrap();
        assert_eq!(e.state, AddressState::Tentative);
        assert!(
            matches!(out.sends[..], [NdMessage::NeighborSolicitation { target, .. }] if target == global)
        );
        let mut out = Outbox::new();
        h.dad_deadline(global, t(2002), &mut out);
        assert!(out.sends.is_empty(), "no RS for a global address");
        assert_eq!(h.global_address().unwrap().address, global);
    }

    #[test]
    fn ra_zero_lifetime_removes_router() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        h.process_ra(
            &ra("fe80::1", 1800, RouterPreference::Medium, &[]),
            &"R1".into(),
            &reg,
            t(1002),
            &mut out,
        );
        h.process_ra(
            &ra("fe80::1", 0, RouterPreference::Medium, &[]),
            &"R1".into(),
            &reg,
            t(5000),
            &mut out,
        );
        assert!(h.select_default_router(t(5000)).is_none());
        assert!(out.has_trace("router-removed"));
    }

    #[test]
    fn ra_without_autonomous_flag_only_updates_routers() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        h.process_ra(
            &ra(
                "fe80::1",
                1800,
                RouterPreference::Medium,
                &[("2001:db8:1::/64", false)],
            ),
            &"R1".into(),
            &reg,
            t(1002),
            &mut out,
        );
        assert_eq!(h.addresses.len(), 1);
        assert_eq!(h.router_list.len(), 1);
    }

    #[test]
    fn non_64_prefix_is_ignored() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        h.process_ra(
            &ra(
                "fe80::1",
                1800,
                RouterPreference::Medium,
                &[("2001:db8::/48", true)],
            ),
            &"R1".into(),
            &reg,
            t(1002),
            &mut out,
        );
        assert_eq!(h.addresses.len(), 1);
        assert!(out
            .trace
            .iter()
            .any(|t| t.kind == "prefix-ignored" && t.attrs.contains(&("reason", "length".into()))));
    }

    #[test]
    fn send_only_rejects_unsigned_and_accepts_signed() {
        let mut h = ready_host();
        h.send_mode = SendMode::SendOnly([KeyId::new("k1")].into_iter().collect());
        let mut reg = TrustAnchorRegistry::new();
        reg.insert_derived(KeyId::new("k1"), 0);
        reg.insert_derived(KeyId::new("k2"), 0);
        let adv = ra("fe80::1", 1800, RouterPreference::Medium, &[]);
        let mut out = Outbox::new();
        h.process_ra(&adv, &"R1".into(), &reg, t(1002), &mut out);
        assert!(out.has_trace("ra-rejected-send"));
        assert!(h.router_list.is_empty());
        // Valid signature but for a key this host does not trust.
        let other = sign_ra(&adv, &KeyId::new("k2"), &reg).unwrap();
        h.process_ra(&other, &"R1".into(), &reg, t(1002), &mut out);
        assert!(h.router_list.is_empty());
        let signed = sign_ra(&adv, &KeyId::new("k1"), &reg).unwrap();
        h.process_ra(&signed, &"R1".into(), &reg, t(1002), &mut out);
        assert_eq!(h.router_list.len(), 1);
    }

    #[test]
    fn router_selection() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        h.process_ra(
            &ra("fe80::1", 1800, RouterPreference::High, &[]),
            &"R1".into(),
            &reg,
            t(2000),
            &mut out,
        );
        h.process_ra(
            &ra("fe80::a", 1800, RouterPreference::Medium, &[]),
            &"A1".into(),
            &reg,
            t(3000),
            &mut out,
        );
        assert_eq!(
            h.select_default_router(t(3000))
                .unwrap()
                .router_node
                .as_str(),
            "R1"
        );

        let mut h = ready_host();
        h.process_ra(
            &ra("fe80::1", 1800, RouterPreference::Medium, &[]),
            &"R1".into(),
            &reg,
            t(10_000),
            &mut out,
        );
        h.process_ra(
            &ra("fe80::2", 1800, RouterPreference::Medium, &[]),
            &"R2".into(),
            &reg,
            t(20_000),
            &mut out,
        );
        assert_eq!(
            h.select_default_router(t(20_000))
                .unwrap()
                .router_node
                .as_str(),
            "R2"
        );

        assert!(ready_host().select_default_router(t(0)).is_none());
    }

    #[test]
    fn expired_router_never_selected() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        h.process_ra(
            &ra("fe80::1", 99, RouterPreference::High, &[]),
            &"R1".into(),
            &reg,
            t(1000),
            &mut out,
        );
        assert!(h.select_default_router(t(100_000)).is_none());
        let mut out = Outbox::new();
        h.tick_lifetimes(t(101_000), &mut out);
        assert!(h.router_list.is_empty());
        assert!(out.has_trace("router-removed"));
        let mut out = Outbox::new();
        h.tick_lifetimes(t(102_000), &mut out);
        assert!(out.is_empty());
    }

    #[test]
    fn address_expires_to_abandoned() {
        let mut h = ready_host();
        let reg = TrustAnchorRegistry::new();
        let mut out = Outbox::new();
        let mut adv = ra("fe80::1", 1800, RouterPreference::Medium, &[]);
        adv.prefixes
            .push(PrefixInfo::new("2001:db8:1::/64".parse().unwrap(), true, 60, 30).unwrap());
        h.process_ra(&adv, &"R1".into(), &reg, t(1000), &mut out);
        let global = h.addresses[1].address;
        h.dad_deadline(global, t(2000), &mut out);
        let mut out = Outbox::new();
        h.tick_lifetimes(t(61_000), &mut out);
        assert_eq!(h.addresses[1].state, AddressState::Abandoned);
        assert!(out.has_trace("addr-expired"));
    }

    #[test]
    fn next_hop_resolution() {
        let reg = TrustAnchorRegistry::new();
        let mut cfg = HostConfig::new("H1".into(), MAC.parse().unwrap());
        cfg.ipv4 = Some(Ipv4Config {
            address: "10.0.0.2".parse().unwrap(),
            gateway: "GW1".into(),
        });
        let mut h = HostState::new(cfg.clone());
        let mut out = Outbox::new();
        h.begin_autoconf(t(0), &mut out);
        let ll = h.link_local().unwrap().address;
        h.dad_deadline(ll, t(1000), &mut out);
        assert_eq!(
            h.resolve_next_hop(t(1000), None),
            (NextHop::Via(AddressFamily::Ipv4), Some("GW1".into()))
        );
        h.process_ra(
            &ra(
                "fe80::1",
                1800,
                RouterPreference::Medium,
                &[("2001:db8:1::/64", true)],
            ),
            &"R1".into(),
            &reg,
            t(1002),
            &mut out,
        );
        let global = h.addresses[1].address;
        h.dad_deadline(global, t(2002), &mut out);
        assert_eq!(
            h.resolve_next_hop(t(2002), None),
            (NextHop::Via(AddressFamily::Ipv6), Some("R1".into()))
        );
        assert_eq!(
            h.resolve_next_hop(t(2002), Some(AddressFamily::Ipv4)).1,
            Some("GW1".into())
        );

        cfg.ipv6_enabled = false;
        let h4 = HostState::new(cfg);
        assert_eq!(
            h4.resolve_next_hop(t(0), None),
            (NextHop::Via(AddressFamily::Ipv4), Some("GW1".into()))
        );
        assert_eq!(
            host("H9").resolve_next_hop(t(0), None),
            (NextHop::Unreachable, None)
        );
    }

    #[test]
    fn two_hour_rule_policy_toggle() {
        for (rule, expected) in [(true, 7200), (false, 100)] {
            let mut h = ready_host();
            h.two_hour_rule = rule;
            let reg = TrustAnchorRegistry::new();
            let mut out = Outbox::new();
            let mut adv = ra("fe80::1", 1800, RouterPreference::Medium, &[]);
            adv.prefixes.push(
                PrefixInfo::new("2001:db8:1::/64".parse().unwrap(), true, 10_000, 10_000).unwrap(),
            );
            h.process_ra(&adv, &"R1".into(), &reg, t(1000), &mut out);
            adv.prefixes[0] =
                PrefixInfo::new("2001:db8:1::/64".parse().unwrap(), true, 100, 100).unwrap();
            h.process_ra(&adv, &"A1".into(), &reg, t(5000), &mut out);
            assert_eq!(h.addresses[1].valid_remaining(t(5000)), Some(expected));
            h.check_invariants(t(5000)).unwrap();
        }
    }

    #[test]
    fn authenticated_ra_is_exempt_from_two_hour_rule() {
        let mut h = ready_host();
        h.two_hour_rule = true;
        h.send_mode = SendMode::SendOnly([KeyId::new("k1")].into_iter().collect());
        let mut reg = TrustAnchorRegistry::new();
        reg.insert_derived(KeyId::new("k1"), 0);
        let key = KeyId::new("k1");
        let mut out = Outbox::new();
        let mut adv = ra("fe80::1", 1800, RouterPreference::Medium, &[]);
        adv.prefixes.push(
            PrefixInfo::new("2001:db8:1::/64".parse().unwrap(), true, 10_000, 10_000).unwrap(),
        );
        let first = sign_ra(&adv, &key, &reg).unwrap();
        h.process_ra(&first, &"R1".into(), &reg, t(1000), &mut out);
        adv.prefixes[0] =
            PrefixInfo::new("2001:db8:1::/64".parse().unwrap(), true, 100, 100).unwrap();
        let second = sign_ra(&adv, &key, &reg).unwrap();
        h.process_ra(&second, &"R1".into(), &reg, t(5000), &mut out);
        assert_eq!(h.addresses[1].valid_remaining(t(5000)), Some(100));
    }
}
