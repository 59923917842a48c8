// SPDX-License-Identifier: Apache-2.0

//! Deterministic discrete-event engine for one switched IPv6 link.
//!
//! Events are ordered by `(time, seq)`; `seq` is a global insertion counter
//! so ties resolve in the order events were scheduled. Every frame passes
//! through [`filter_ingress`] on the sender's switch port before it is
//! queued for delivery, and every copy is later counted as delivered or
//! dropped.

mod metrics;
mod trace;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use metrics::{HostMetrics, ProbeOutcome, RunMetrics};
pub use trace::{render as render_trace, TraceRecord};

use crate::attacker::{AttackError, AttackMode, AttackerState};
use crate::defense::{
    cga_generate, filter_ingress, DefenseError, PortClass, PortPolicy, SwitchPort,
    TrustAnchorRegistry, Verdict,
};
use crate::host::{HostConfig, HostState, Ipv4Config, NextHop, SendMode};
use crate::net_model::{
    derive_eui64, link_local_from, AddressFamily, DataPacket, Endpoint, Ipv4Address, Ipv6Address,
    KeyId, MacAddress, NdMessage, NodeId, PrefixInfo,
};
use crate::outbox::{Outbox, TimerKind};
use crate::router::{Forwarded, RouterConfig, RouterState};
use crate::scenario::{Directive, IidMode, NodeDecl, PortPolicyKind, PrefixDecl, Scenario};
use crate::time::SimTime;

/// Destination used for probe traffic; reachable only through a router that
/// can forward.
pub const SINK_V6: Ipv6Address = Ipv6Address(0x2001_0db8_ffff_0000_0000_0000_0000_0001);
pub const SINK_V4: Ipv4Address = Ipv4Address([198, 51, 100, 1]);
pub const SINK: &str = "sink";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invariant violated at t={time}ms: {message}")]
    Invariant { time: u64, message: String },
    #[error("scenario cannot be instantiated: {0}")]
    Setup(String),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Defense(#[from] DefenseError),
}

#[derive(Debug, Clone)]
pub enum Node {
    Host(HostState),
    Router(RouterState),
    Attacker(AttackerState),
}

#[derive(Debug, Clone)]
enum Action {
    Boot(NodeId),
    Deliver {
        msg: NdMessage,
        from: NodeId,
        to: NodeId,
    },
    Timer {
        node: NodeId,
        kind: TimerKind,
    },
    Script(Directive),
}

#[derive(Debug, Clone)]
struct Event {
    time: SimTime,
    seq: u64,
    action: Action,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.time, self.seq).cmp(&(other.time, other.seq))
    }
}

/// Per-copy message accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Conservation {
    pub emitted: u64,
    pub delivered: u64,
    pub dropped: u64,
}

impl Conservation {
    pub fn balanced(&self) -> bool {
        self.emitted == self.delivered + self.dropped
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    now: SimTime,
    seq: u64,
    queue: BinaryHeap<Reverse<Event>>,
    order: Vec<NodeId>,
    nodes: BTreeMap<NodeId, Node>,
    ports: BTreeMap<NodeId, SwitchPort>,
    mac_owner: BTreeMap<MacAddress, NodeId>,
    registry: TrustAnchorRegistry,
    key_holders: BTreeMap<KeyId, NodeId>,
    jitter: BTreeMap<NodeId, u64>,
    rng: ChaCha8Rng,
    latency_ms: u64,
    end: SimTime,
    trace: Vec<TraceRecord>,
    conservation: Conservation,
    measurements: Vec<RunMetrics>,
    trace_mark: usize,
    payload_seq: u64,
    finished: bool,
}

fn prefix_info(p: &PrefixDecl) -> PrefixInfo {
    PrefixInfo::new(p.prefix, p.autonomous, p.valid, p.preferred).expect("validated at parse time")
}

impl Engine {
    /// Empty engine: no nodes, nothing scheduled.
    pub fn empty(seed: u64) -> Self {
        Self {
            now: SimTime::ZERO,
            seq: 0,
            queue: BinaryHeap::new(),
            order: Vec::new(),
            nodes: BTreeMap::new(),
            ports: BTreeMap::new(),
            mac_owner: BTreeMap::new(),
            registry: TrustAnchorRegistry::new(),
            key_holders: BTreeMap::new(),
            jitter: BTreeMap::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            latency_ms: crate::scenario::DEFAULT_LATENCY_MS,
            end: SimTime::ZERO,
            trace: Vec::new(),
            conservation: Conservation::default(),
            measurements: Vec::new(),
            trace_mark: 0,
            payload_seq: 0,
            finished: false,
        }
    }

    /// Builds nodes, ports and keys from `scenario` and schedules boot
    /// events and script directives. `seed` overrides the scenario seed.
    pub fn from_scenario(scenario: &Scenario, seed: Option<u64>) -> Result<Self, SimError> {
        let seed = seed.unwrap_or(scenario.seed);
        let mut e = Self::empty(seed);
        e.latency_ms = scenario.latency_ms;
        e.end = scenario.duration;

        let trusted: BTreeSet<KeyId> = scenario.trust.iter().cloned().collect();
        let mut router_keys: BTreeMap<&NodeId, KeyId> = BTreeMap::new();
        for (node, key) in &scenario.keys {
            e.registry.insert_derived(key.clone(), seed);
            e.key_holders.insert(key.clone(), node.clone());
            router_keys.insert(node, key.clone());
        }

        for decl in &scenario.nodes {
            let id = decl.id().clone();
            e.mac_owner.entry(decl.mac()).or_insert_with(|| id.clone());
            let node = match decl {
                NodeDecl::Router(r) => {
                    if r.jitter_ms > 0 {
                        e.jitter.insert(id.clone(), r.jitter_ms);
                    }
                    Node::Router(RouterState::new(RouterConfig {
                        node_id: id.clone(),
                        mac: r.mac,
                        link_local: r
                            .link_local
                            .unwrap_or_else(|| link_local_from(derive_eui64(r.mac))),
                        advertised_prefixes: r.prefixes.iter().map(prefix_info).collect(),
                        router_lifetime: r.lifetime,
                        preference: r.preference,
                        ra_interval: r.interval,
                        jitter_ms: r.jitter_ms,
                        can_route: r.routes,
                        send_key: router_keys.get(&id).cloned(),
                        ipv6_enabled: r.ipv6,
                        ipv4: r.ipv4,
                    }))
                }
                NodeDecl::Host(h) => {
                    let mut cfg = HostConfig::new(id.clone(), h.mac);
                    cfg.ipv6_enabled = h.ipv6;
                    cfg.ipv4 = h.ipv4.as_ref().map(|(a, gw)| Ipv4Config {
                        address: *a,
                        gateway: gw.clone(),
                    });
                    cfg.iid_override = match &h.iid {
                        IidMode::Eui64 => None,
                        IidMode::Explicit(i) => Some(*i),
                        IidMode::Cga { key, modifier } => {
                            Some(cga_generate(key.as_bytes(), *modifier))
                        }
                    };
                    if h.prefer_v4 {
                        cfg.family_preference = [AddressFamily::Ipv4, AddressFamily::Ipv6];
                    }
                    if h.send {
                        cfg.send_mode = SendMode::SendOnly(trusted.clone());
                    }
                    cfg.two_hour_rule = scenario.two_hour_rule;
                    Node::Host(HostState::new(cfg))
                }
                NodeDecl::Attacker(a) => {
                    let persona = a.persona.as_ref().map(|p| RouterConfig {
                        node_id: id.clone(),
                        mac: a.mac,
                        link_local: link_local_from(derive_eui64(a.mac)),
                        advertised_prefixes: p.prefix.iter().map(prefix_info).collect(),
                        router_lifetime: p.lifetime,
                        preference: p.preference,
                        ra_interval: p.interval,
                        jitter_ms: 0,
                        can_route: p.routes,
                        send_key: None,
                        ipv6_enabled: true,
                        ipv4: None,
                    });
                    Node::Attacker(AttackerState::new(id.clone(), a.mac, persona))
                }
            };
            e.add_node(node, None);
        }

        for a in &scenario.attachments {
            let mut policy = PortPolicy::default();
            for p in scenario
                .port_policies
                .iter()
                .filter(|p| p.switch == a.switch && p.port == a.port)
            {
                match &p.kind {
                    PortPolicyKind::RaGuard => policy.ra_guard = true,
                    PortPolicyKind::Acl(macs) => {
                        policy
                            .acl_allowed_ra_sources
                            .get_or_insert_with(BTreeSet::new)
                            .extend(macs.iter().copied());
                    }
                }
            }
            e.ports.insert(
                a.node.clone(),
                SwitchPort {
                    port_id: format!("{}.p{}", a.switch, a.port),
                    attached_node: a.node.clone(),
                    port_class: a.class,
                    policy,
                },
            );
        }

        for id in e.order.clone() {
            e.schedule(SimTime::ZERO, Action::Boot(id));
        }
        for (at, d) in &scenario.directives {
            e.schedule(*at, Action::Script(d.clone()));
        }
        Ok(e)
    }

    /// Adds a node on an unpoliced port (or `port`, if given).
    pub fn add_node(&mut self, node: Node, port: Option<SwitchPort>) {
        let (id, class) = match &node {
            Node::Host(h) => (h.node_id.clone(), PortClass::HostFacing),
            Node::Router(r) => (r.config.node_id.clone(), PortClass::RouterFacing),
            Node::Attacker(a) => (a.node_id.clone(), PortClass::HostFacing),
        };
        let port = port.unwrap_or_else(|| SwitchPort {
            port_id: "link".into(),
            attached_node: id.clone(),
            port_class: class,
            policy: PortPolicy::default(),
        });
        self.ports.insert(id.clone(), port);
        self.order.push(id.clone());
        self.nodes.insert(id, node);
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn end(&self) -> SimTime {
        self.end
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn trace_text(&self) -> String {
        trace::render(&self.trace)
    }

    pub fn measurements(&self) -> &[RunMetrics] {
        &self.measurements
    }

    pub fn conservation(&self) -> Conservation {
        self.conservation
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(&NodeId::from(id))
    }

    pub fn host(&self, id: &str) -> Option<&HostState> {
        match self.node(id)? {
            Node::Host(h) => Some(h),
            _ => None,
        }
    }

    pub fn registry(&self) -> &TrustAnchorRegistry {
        &self.registry
    }

    pub fn key_holder(&self, key: &KeyId) -> Option<&NodeId> {
        self.key_holders.get(key)
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    fn schedule(&mut self, time: SimTime, action: Action) {
        self.seq += 1;
        self.queue.push(Reverse(Event {
            time,
            seq: self.seq,
            action,
        }));
    }

    /// Schedules a script directive from outside the scenario.
    pub fn schedule_directive(&mut self, at: SimTime, directive: Directive) {
        self.schedule(at.max(self.now), Action::Script(directive));
    }

    fn record(&mut self, node: &str, kind: &'static str, attrs: Vec<(&'static str, String)>) {
        self.trace.push(TraceRecord {
            time: self.now,
            node: node.to_owned(),
            kind,
            attrs,
        });
    }

    fn invariant(&self, message: impl Into<String>) -> SimError {
        SimError::Invariant {
            time: self.now.millis(),
            message: message.into(),
        }
    }

    /// Processes every event with `time <= t_end` in `(time, seq)` order.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<(), SimError> {
        while let Some(Reverse(ev)) = self.queue.peek() {
            if ev.time > t_end {
                break;
            }
            let Reverse(ev) = self.queue.pop().expect("peeked");
            if ev.time < self.now {
                return Err(self.invariant(format!(
                    "event at {} scheduled in the past",
                    ev.time.millis()
                )));
            }
            self.now = ev.time;
            self.dispatch(ev.action)?;
        }
        self.now = self.now.max(t_end);
        Ok(())
    }

    /// Runs to the scenario end, then closes the books: frames still in
    /// flight are dropped with reason `run-end`, a final measurement is
    /// taken if the script had none, and conservation is checked.
    pub fn run(&mut self) -> Result<(), SimError> {
        self.run_until(self.end)?;
        self.finish()
    }

    pub fn finish(&mut self) -> Result<(), SimError> {
        if self.finished {
            return Ok(());
        }
        self.finished = true;
        let mut rest: Vec<Event> = std::mem::take(&mut self.queue)
            .into_iter()
            .map(|Reverse(e)| e)
            .collect();
        rest.sort();
        for ev in rest {
            if let Action::Deliver { msg, from, to } = ev.action {
                self.conservation.dropped += 1;
                self.record(
                    from.as_str(),
                    "msg-dropped",
                    vec![
                        ("msg", msg.kind().into()),
                        ("to", to.to_string()),
                        ("reason", "run-end".into()),
                    ],
                );
            }
        }
        if self.measurements.is_empty() {
            self.measure()?;
        }
        if !self.conservation.balanced() {
            let c = self.conservation;
            return Err(self.invariant(format!(
                "message accounting: emitted {} != delivered {} + dropped {}",
                c.emitted, c.delivered, c.dropped
            )));
        }
        Ok(())
    }

    fn dispatch(&mut self, action: Action) -> Result<(), SimError> {
        match action {
            Action::Boot(id) => self.boot(&id),
            Action::Deliver { msg, from, to } => {
                self.conservation.delivered += 1;
                self.deliver(&msg, &from, &to)
            }
            Action::Timer { node, kind } => self.fire_timer(&node, kind),
            Action::Script(d) => self.script(d),
        }
    }

    fn with_node<T>(
        &mut self,
        id: &NodeId,
        f: impl FnOnce(&mut Node, &TrustAnchorRegistry, &mut Outbox) -> Result<T, SimError>,
    ) -> Result<T, SimError> {
        let mut out = Outbox::new();
        let mut node = self
            .nodes
            .remove(id)
            .ok_or_else(|| SimError::Setup(format!("unknown node {id}")))?;
        let result = f(&mut node, &self.registry, &mut out);
        let check = match &node {
            Node::Host(h) => h.check_invariants(self.now),
            _ => Ok(()),
        };
        self.nodes.insert(id.clone(), node);
        let value = result?;
        check.map_err(|m| self.invariant(m))?;
        self.apply(id, out)?;
        Ok(value)
    }

    fn apply(&mut self, id: &NodeId, out: Outbox) -> Result<(), SimError> {
        for t in out.trace {
            self.record(id.as_str(), t.kind, t.attrs);
        }
        for msg in out.sends {
            self.broadcast(id, msg)?;
        }
        for (at, kind) in out.timers {
            if at < self.now {
                return Err(self.invariant(format!("{id} set a timer in the past")));
            }
            self.schedule(
                at,
                Action::Timer {
                    node: id.clone(),
                    kind,
                },
            );
        }
        Ok(())
    }

    fn draw_jitter(&mut self, id: &NodeId) -> u64 {
        match self.jitter.get(id) {
            Some(&j) => self.rng.next_u64() % (j + 1),
            None => 0,
        }
    }

    fn boot(&mut self, id: &NodeId) -> Result<(), SimError> {
        let jitter = self.draw_jitter(id);
        let now = self.now;
        self.with_node(id, |node, reg, out| {
            match node {
                Node::Host(h) => h.begin_autoconf(now, out),
                Node::Router(r) => {
                    if jitter > 0 {
                        out.timer(now + jitter, TimerKind::PeriodicRa);
                    } else {
                        r.emit_periodic_ra(now, 0, reg, out)?;
                    }
                }
                Node::Attacker(_) => {}
            }
            Ok(())
        })
    }

    fn fire_timer(&mut self, id: &NodeId, kind: TimerKind) -> Result<(), SimError> {
        let jitter = if kind == TimerKind::PeriodicRa {
            self.draw_jitter(id)
        } else {
            0
        };
        let now = self.now;
        self.with_node(id, |node, reg, out| {
            match (node, kind) {
                (Node::Host(h), TimerKind::DadDeadline(addr)) => h.dad_deadline(addr, now, out),
                (Node::Host(h), TimerKind::Lifetime) => h.tick_lifetimes(now, out),
                (Node::Router(r), TimerKind::PeriodicRa) => {
                    r.emit_periodic_ra(now, jitter, reg, out)?;
                }
                (Node::Attacker(a), TimerKind::Playbook) => a.on_playbook_timer(now, out)?,
                _ => {}
            }
            Ok(())
        })
    }

    /// Owner of the frame's source MAC, falling back to the sending node.
    fn l2_sender(&self, msg: &NdMessage, from: &NodeId) -> NodeId {
        msg.src_mac()
            .and_then(|m| self.mac_owner.get(&m).cloned())
            .unwrap_or_else(|| from.clone())
    }

    fn deliver(&mut self, msg: &NdMessage, from: &NodeId, to: &NodeId) -> Result<(), SimError> {
        let sender = self.l2_sender(msg, from);
        let now = self.now;
        self.with_node(to, |node, reg, out| {
            match (node, msg) {
                (Node::Host(h), NdMessage::RouterAdvertisement(ra)) => {
                    h.process_ra(ra, &sender, reg, now, out)
                }
                (Node::Host(h), NdMessage::NeighborSolicitation { src_ip, target, .. }) => {
                    h.on_neighbor_solicitation(from, *src_ip, *target, out)
                }
                (Node::Host(h), NdMessage::NeighborAdvertisement { target, .. }) => {
                    h.on_neighbor_advertisement(*target, out)
                }
                (Node::Router(r), NdMessage::RouterSolicitation { .. }) => {
                    r.on_router_solicitation(reg, out)?;
                }
                (Node::Attacker(a), m @ NdMessage::RouterAdvertisement(_)) => {
                    a.capture_ra(m, from, now, out)
                }
                _ => {}
            }
            Ok(())
        })
    }

    /// Queues one copy of `msg` for every other node, subject to ingress
    /// filtering on the sender's port.
    fn broadcast(&mut self, src: &NodeId, msg: NdMessage) -> Result<(), SimError> {
        let port = self
            .ports
            .get(src)
            .cloned()
            .ok_or_else(|| SimError::Setup(format!("{src} has no port")))?;
        if let (Some(ra), Node::Attacker(_)) = (msg.as_ra(), &self.nodes[src]) {
            if ra.auth.is_some() {
                return Err(self.invariant(format!("{src} emitted an authenticated RA")));
            }
        }
        let verdict = filter_ingress(&port, &msg);
        let at = self.now + self.latency_ms;
        for to in self.order.clone() {
            if &to == src {
                continue;
            }
            self.conservation.emitted += 1;
            match verdict {
                Verdict::Forward => self.schedule(
                    at,
                    Action::Deliver {
                        msg: msg.clone(),
                        from: src.clone(),
                        to,
                    },
                ),
                Verdict::Drop(reason) => {
                    self.conservation.dropped += 1;
                    let switch = port
                        .port_id
                        .split('.')
                        .next()
                        .unwrap_or("switch")
                        .to_owned();
                    self.record(
                        &switch,
                        "ra-dropped",
                        vec![
                            ("reason", reason.to_string()),
                            ("port", port.port_id.clone()),
                            ("from", src.to_string()),
                            ("to", to.to_string()),
                            (
                                "src_mac",
                                msg.src_mac().map(|m| m.to_string()).unwrap_or_default(),
                            ),
                        ],
                    );
                }
            }
        }
        Ok(())
    }

    fn script(&mut self, d: Directive) -> Result<(), SimError> {
        let now = self.now;
        match d {
            Directive::Measure => self.measure().map(|_| ()),
            Directive::Attack { attacker, mode } => {
                self.with_node(&attacker, |node, _, out| match node {
                    Node::Attacker(a) => a.run_playbook(mode, now, out).map_err(SimError::from),
                    _ => Err(SimError::Setup(format!("{attacker} is not an attacker"))),
                })
            }
            Directive::Disable(id) => self.set_enabled(&id, false),
            Directive::Enable(id) => self.set_enabled(&id, true),
        }
    }

    fn set_enabled(&mut self, id: &NodeId, enabled: bool) -> Result<(), SimError> {
        match self.nodes.get_mut(id) {
            Some(Node::Router(r)) => r.enabled = enabled,
            _ => return Err(SimError::Setup(format!("{id} is not a router"))),
        }
        self.record(
            id.as_str(),
            if enabled {
                "router-enabled"
            } else {
                "router-disabled"
            },
            vec![],
        );
        Ok(())
    }

    fn attack_active(&self) -> bool {
        self.nodes
            .values()
            .any(|n| matches!(n, Node::Attacker(a) if a.mode != AttackMode::Passive))
    }

    fn is_attacker(&self, id: &str) -> bool {
        matches!(self.nodes.get(&NodeId::from(id)), Some(Node::Attacker(_)))
    }

    /// Sends one probe per host toward the sink (hop by hop, without link
    /// delay) and snapshots host state.
    pub fn measure(&mut self) -> Result<RunMetrics, SimError> {
        let now = self.now;
        self.record("engine", "measure", vec![]);
        let mut hosts = Vec::new();
        for id in self.order.clone() {
            let Some(Node::Host(h)) = self.nodes.get(&id) else {
                continue;
            };
            let h = h.clone();
            let (hop, via) = h.resolve_next_hop(now, None);
            let mut path = vec![id.to_string()];
            let (family, outcome) = match (hop, via) {
                (NextHop::Via(family), Some(via)) => {
                    let src = h.source_for(family).ok_or_else(|| {
                        self.invariant(format!("{id} has no assigned {family} source"))
                    })?;
                    if let Endpoint::V6(a) = src {
                        if !h.assigned().any(|e| e.address == a) {
                            return Err(self
                                .invariant(format!("{id} would source data from unassigned {a}")));
                        }
                    }
                    self.payload_seq += 1;
                    let dst = match family {
                        AddressFamily::Ipv6 => Endpoint::V6(SINK_V6),
                        AddressFamily::Ipv4 => Endpoint::V4(SINK_V4),
                    };
                    let data = DataPacket {
                        src,
                        dst,
                        payload_id: self.payload_seq,
                    };
                    self.record(
                        id.as_str(),
                        "probe-sent",
                        vec![
                            ("payload", data.payload_id.to_string()),
                            ("family", family.to_string()),
                            ("src", src.to_string()),
                            ("via", via.to_string()),
                        ],
                    );
                    path.push(via.to_string());
                    let outcome = self.probe_hop(&via, &data)?;
                    path.push(if outcome == ProbeOutcome::Delivered {
                        SINK.into()
                    } else {
                        "drop".into()
                    });
                    (Some(family), outcome)
                }
                _ => {
                    self.record(id.as_str(), "probe-unreachable", vec![]);
                    (None, ProbeOutcome::Unreachable)
                }
            };
            let path_str = path.join(">");
            self.record(
                id.as_str(),
                "path-resolved",
                vec![("outcome", outcome.to_string()), ("path", path_str)],
            );
            let global = h.global_address();
            hosts.push(HostMetrics {
                node: id.clone(),
                default_router: h.select_default_router(now).map(|r| r.router_node.clone()),
                assigned_addresses: h.assigned().map(|e| e.address).collect(),
                link_local: h
                    .link_local()
                    .filter(|e| e.state == crate::host::AddressState::Assigned)
                    .map(|e| e.address),
                global: global.map(|e| e.address),
                valid_remaining: global.and_then(|e| e.valid_remaining(now)),
                family_in_use: family,
                iid: h.ipv6_enabled.then_some(h.iid),
                path: if outcome == ProbeOutcome::Unreachable {
                    Vec::new()
                } else {
                    path
                },
                outcome,
            });
        }
        let active = self.attack_active();
        let mitm = hosts
            .iter()
            .any(|h| h.path.iter().any(|n| self.is_attacker(n)));
        let dos = active && hosts.iter().any(|h| h.outcome != ProbeOutcome::Delivered);
        let dualstack = hosts.iter().any(|h| {
            let dual = matches!(self.nodes.get(&h.node), Some(Node::Host(s)) if s.ipv4.is_some());
            dual && h.family_in_use == Some(AddressFamily::Ipv6)
                && h.path.iter().any(|n| self.is_attacker(n))
        });
        let ra_processed = self.trace[self.trace_mark..]
            .iter()
            .filter(|r| r.kind == "ra-accepted")
            .count();
        self.trace_mark = self.trace.len();
        let m = RunMetrics {
            time: now,
            hosts,
            dos_success: dos,
            mitm_success: mitm,
            dualstack_success: dualstack,
            ra_processed,
        };
        for (name, value) in m.attack_flags() {
            self.record(
                "engine",
                "attack-flag",
                vec![("flag", name.into()), ("value", value.to_string())],
            );
        }
        self.measurements.push(m.clone());
        Ok(m)
    }

    fn probe_hop(&mut self, via: &NodeId, data: &DataPacket) -> Result<ProbeOutcome, SimError> {
        self.conservation.emitted += 1;
        let forwarded = self.with_node(via, |node, _, out| {
            Ok(match node {
                Node::Router(r) => r.forward(data, out),
                Node::Attacker(a) => a.forward(data, out),
                Node::Host(_) => Forwarded::Dropped,
            })
        })?;
        Ok(match forwarded {
            Forwarded::Delivered => {
                self.conservation.delivered += 1;
                ProbeOutcome::Delivered
            }
            Forwarded::Dropped => {
                self.conservation.dropped += 1;
                ProbeOutcome::Blackholed
            }
        })
    }
}
