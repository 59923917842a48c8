// SPDX-License-Identifier: Apache-2.0

//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! latency 1                       # link latency in ms (default 1)
//! allow-dup-mac
//! node router R1 mac=00:00:5e:00:53:01 prefix=2001:db8:1::/64 lifetime=1800 preference=high interval=10
//! node host H1 mac=00:1a:2b:3c:4d:5e ipv4=10.0.0.2 gw4=GW1 ipv6=on send=on
//! node attacker A1 mac=00:00:5e:00:53:aa persona-prefix=2001:db8:bad::/64 persona-routes=yes
//! switch SW1 ports=3
//! attach R1 SW1.p1 class=router
//! policy SW1.p2 ra-guard
//! policy SW1.p2 acl=00:00:5e:00:53:01
//! policy global two-hour-rule
//! key R1 k1
//! trust k1
//! at 20 attack A1 kill-router target=R1
//! at 25 measure
//! expect dos_success=true
//! run 30 seed=1
//! ```
//!
//! [`print_scenario`] writes the canonical form, with every default made
//! explicit; parsing it yields the same [`Scenario`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::attacker::AttackMode;
use crate::defense::PortClass;
use crate::net_model::{
    InterfaceId, Ipv4Address, Ipv6Address, KeyId, MacAddress, NodeId, Prefix, RouterPreference,
    Seconds,
};
use crate::router::{DEFAULT_RA_INTERVAL, DEFAULT_ROUTER_LIFETIME};
use crate::time::SimTime;

pub const DEFAULT_LATENCY_MS: u64 = 1;
pub const DEFAULT_VALID_LIFETIME: Seconds = 86_400;
pub const DEFAULT_PREFERRED_LIFETIME: Seconds = 14_400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

fn perr(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixDecl {
    pub prefix: Prefix,
    pub autonomous: bool,
    pub valid: Seconds,
    pub preferred: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterDecl {
    pub id: NodeId,
    pub mac: MacAddress,
    pub link_local: Option<Ipv6Address>,
    pub prefixes: Vec<PrefixDecl>,
    pub lifetime: u16,
    pub preference: RouterPreference,
    pub interval: Seconds,
    pub jitter_ms: u64,
    pub routes: bool,
    pub ipv6: bool,
    pub ipv4: Option<Ipv4Address>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IidMode {
    Eui64,
    Explicit(InterfaceId),
    Cga { key: String, modifier: u128 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostDecl {
    pub id: NodeId,
    pub mac: MacAddress,
    pub ipv6: bool,
    pub ipv4: Option<(Ipv4Address, NodeId)>,
    pub send: bool,
    pub iid: IidMode,
    pub prefer_v4: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonaDecl {
    pub prefix: Option<PrefixDecl>,
    pub routes: bool,
    pub preference: RouterPreference,
    pub lifetime: u16,
    pub interval: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackerDecl {
    pub id: NodeId,
    pub mac: MacAddress,
    pub persona: Option<PersonaDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeDecl {
    Router(RouterDecl),
    Host(HostDecl),
    Attacker(AttackerDecl),
}

impl NodeDecl {
    pub fn id(&self) -> &NodeId {
        match self {
            Self::Router(r) => &r.id,
            Self::Host(h) => &h.id,
            Self::Attacker(a) => &a.id,
        }
    }

    pub fn mac(&self) -> MacAddress {
        match self {
            Self::Router(r) => r.mac,
            Self::Host(h) => h.mac,
            Self::Attacker(a) => a.mac,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwitchDecl {
    pub id: String,
    pub ports: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub node: NodeId,
    pub switch: String,
    pub port: u32,
    pub class: PortClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PortPolicyKind {
    RaGuard,
    Acl(BTreeSet<MacAddress>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortPolicyDecl {
    pub switch: String,
    pub port: u32,
    pub kind: PortPolicyKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Attack { attacker: NodeId, mode: AttackMode },
    Measure,
    Disable(NodeId),
    Enable(NodeId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Ge,
    Le,
    Gt,
    Lt,
}

impl CmpOp {
    fn as_str(self) -> &'static str {
        match self {
            Self::Eq => "=",
            Self::Ne => "!=",
            Self::Ge => ">=",
            Self::Le => "<=",
            Self::Gt => ">",
            Self::Lt => "<",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub metric: String,
    pub op: CmpOp,
    pub value: String,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.metric, self.op.as_str(), self.value)
    }
}

impl Expectation {
    /// Numeric comparison when both sides are integers, string equality
    /// otherwise.
    pub fn holds(&self, actual: &str) -> bool {
        match (actual.parse::<i128>(), self.value.parse::<i128>()) {
            (Ok(a), Ok(e)) => match self.op {
                CmpOp::Eq => a == e,
                CmpOp::Ne => a != e,
                CmpOp::Ge => a >= e,
                CmpOp::Le => a <= e,
                CmpOp::Gt => a > e,
                CmpOp::Lt => a < e,
            },
            _ => match self.op {
                CmpOp::Eq => actual == self.value,
                CmpOp::Ne => actual != self.value,
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Scenario {
    pub latency_ms: u64,
    pub allow_dup_mac: bool,
    pub two_hour_rule: bool,
    pub nodes: Vec<NodeDecl>,
    pub switches: Vec<SwitchDecl>,
    pub attachments: Vec<Attachment>,
    pub port_policies: Vec<PortPolicyDecl>,
    pub keys: Vec<(NodeId, KeyId)>,
    pub trust: Vec<KeyId>,
    pub directives: Vec<(SimTime, Directive)>,
    pub expectations: Vec<Expectation>,
    pub duration: SimTime,
    pub seed: u64,
}

impl Scenario {
    pub fn node(&self, id: &NodeId) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.id() == id)
    }
}

struct Fields<'a> {
    line: usize,
    map: BTreeMap<&'a str, &'a str>,
    flags: BTreeSet<&'a str>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, tokens: &[&'a str]) -> Result<Self, ScenarioError> {
        let mut map = BTreeMap::new();
        let mut flags = BTreeSet::new();
        for t in tokens {
            match t.split_once('=') {
                Some((k, v)) => {
                    if map.insert(k, v).is_some() {
                        return Err(perr(line, format!("duplicate key {k:?}")));
                    }
                }
                None => {
                    flags.insert(*t);
                }
            }
        }
        Ok(Self { line, map, flags })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ScenarioError>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| perr(self.line, format!("{key}={v}: {e}"))),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ScenarioError>
    where
        T::Err: fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| perr(self.line, format!("missing {key}=")))
    }

    fn switch(&mut self, key: &str, default: bool) -> Result<bool, ScenarioError> {
        match self.take(key) {
            None => Ok(default),
            Some("on" | "yes" | "true") => Ok(true),
            Some("off" | "no" | "false") => Ok(false),
            Some(v) => Err(perr(
                self.line,
                format!("{key}={v}: expected on/off or yes/no"),
            )),
        }
    }

    fn finish(self) -> Result<(), ScenarioError> {
        if let Some(k) = self.map.keys().next() {
            return Err(perr(self.line, format!("unknown key {k:?}")));
        }
        if let Some(f) = self.flags.iter().next() {
            return Err(perr(self.line, format!("unexpected token {f:?}")));
        }
        Ok(())
    }
}

fn parse_prefix_list(
    f: &mut Fields<'_>,
    key: &str,
    autonomous: bool,
    valid: Seconds,
    preferred: Seconds,
) -> Result<Vec<PrefixDecl>, ScenarioError> {
    let Some(list) = f.take(key) else {
        return Ok(Vec::new());
    };
    if preferred > valid {
        return Err(perr(
            f.line,
            format!("preferred lifetime {preferred} exceeds valid {valid}"),
        ));
    }
    list.split(',')
        .map(|p| {
            let prefix = p
                .parse::<Prefix>()
                .map_err(|e| perr(f.line, format!("{key}={p}: {e}")))?;
            Ok(PrefixDecl {
                prefix,
                autonomous,
                valid,
                preferred,
            })
        })
        .collect()
}

fn parse_router(line: usize, id: NodeId, tokens: &[&str]) -> Result<RouterDecl, ScenarioError> {
    let mut f = Fields::new(line, tokens)?;
    let mac = f.require("mac")?;
    let link_local = f.parse("ll")?;
    let lifetime = f.parse("lifetime")?.unwrap_or(DEFAULT_ROUTER_LIFETIME);
    let preference = f.parse("preference")?.unwrap_or_default();
    let interval = f.parse("interval")?.unwrap_or(DEFAULT_RA_INTERVAL);
    if interval == 0 {
        return Err(perr(line, "interval must be positive"));
    }
    let jitter_ms = f.parse("jitter")?.unwrap_or(0);
    let valid = f.parse("valid")?.unwrap_or(DEFAULT_VALID_LIFETIME);
    let preferred = f
        .parse("preferred")?
        .unwrap_or(DEFAULT_PREFERRED_LIFETIME.min(valid));
    let autonomous = f.switch("autonomous", true)?;
    let prefixes = parse_prefix_list(&mut f, "prefix", autonomous, valid, preferred)?;
    let routes = f.switch("routes", true)?;
    let ipv6 = f.switch("ipv6", true)?;
    let ipv4 = f.parse("ipv4")?;
    f.finish()?;
    Ok(RouterDecl {
        id,
        mac,
        link_local,
        prefixes,
        lifetime,
        preference,
        interval,
        jitter_ms,
        routes,
        ipv6,
        ipv4,
    })
}

fn parse_host(line: usize, id: NodeId, tokens: &[&str]) -> Result<HostDecl, ScenarioError> {
    let mut f = Fields::new(line, tokens)?;
    let mac = f.require("mac")?;
    let ipv6 = f.switch("ipv6", true)?;
    let send = f.switch("send", false)?;
    let v4: Option<Ipv4Address> = f.parse("ipv4")?;
    let gw4 = f.take("gw4").map(NodeId::from);
    let ipv4 = match (v4, gw4) {
        (Some(a), Some(g)) => Some((a, g)),
        (None, None) => None,
        _ => return Err(perr(line, "ipv4= and gw4= must be given together")),
    };
    let explicit: Option<InterfaceId> = f.parse("iid")?;
    let cga = f.take("cga");
    let modifier: Option<u128> = f.parse("modifier")?;
    let iid = match (explicit, cga) {
        (Some(_), Some(_)) => return Err(perr(line, "iid= and cga= are exclusive")),
        (Some(i), None) => IidMode::Explicit(i),
        (None, Some(key)) => IidMode::Cga {
            key: key.to_owned(),
            modifier: modifier.unwrap_or(0),
        },
        (None, None) => IidMode::Eui64,
    };
    if modifier.is_some() && !matches!(iid, IidMode::Cga { .. }) {
        return Err(perr(line, "modifier= requires cga="));
    }
    let prefer_v4 = match f.take("prefer") {
        None | Some("ipv6") => false,
        Some("ipv4") => true,
        Some(v) => return Err(perr(line, format!("prefer={v}: expected ipv6 or ipv4"))),
    };
    f.finish()?;
    Ok(HostDecl {
        id,
        mac,
        ipv6,
        ipv4,
        send,
        iid,
        prefer_v4,
    })
}

fn parse_attacker(line: usize, id: NodeId, tokens: &[&str]) -> Result<AttackerDecl, ScenarioError> {
    let mut f = Fields::new(line, tokens)?;
    let mac = f.require("mac")?;
    let has_persona = f.map.keys().any(|k| k.starts_with("persona-"));
    let persona = if has_persona {
        let lifetime = f
            .parse("persona-lifetime")?
            .unwrap_or(DEFAULT_ROUTER_LIFETIME);
        let valid = f.parse("persona-valid")?.unwrap_or(DEFAULT_VALID_LIFETIME);
        let preferred = f
            .parse("persona-preferred")?
            .unwrap_or(DEFAULT_PREFERRED_LIFETIME.min(valid));
        let mut prefixes = parse_prefix_list(&mut f, "persona-prefix", true, valid, preferred)?;
        if prefixes.len() > 1 {
            return Err(perr(line, "persona takes a single prefix"));
        }
        let interval = f.parse("persona-interval")?.unwrap_or(DEFAULT_RA_INTERVAL);
        if interval == 0 {
            return Err(perr(line, "persona-interval must be positive"));
        }
        Some(PersonaDecl {
            prefix: prefixes.pop(),
            routes: f.switch("persona-routes", true)?,
            preference: f
                .parse("persona-preference")?
                .unwrap_or(RouterPreference::High),
            lifetime,
            interval,
        })
    } else {
        None
    };
    f.finish()?;
    Ok(AttackerDecl { id, mac, persona })
}

fn parse_port_ref(line: usize, s: &str) -> Result<(String, u32), ScenarioError> {
    let (sw, port) = s
        .split_once('.')
        .ok_or_else(|| perr(line, format!("expected SWITCH.pN, got {s:?}")))?;
    let n = port
        .strip_prefix('p')
        .and_then(|n| n.parse::<u32>().ok())
        .filter(|n| *n > 0)
        .ok_or_else(|| perr(line, format!("bad port {port:?} (expected p1, p2, ...)")))?;
    Ok((sw.to_owned(), n))
}

fn parse_attack(line: usize, tokens: &[&str]) -> Result<Directive, ScenarioError> {
    let [attacker, kind, rest @ ..] = tokens else {
        return Err(perr(
            line,
            "usage: at <sec> attack <attacker> <mode> [target=NODE]",
        ));
    };
    let mut f = Fields::new(line, rest)?;
    let mode = match *kind {
        "kill-router" => AttackMode::KillRouter {
            target: NodeId::from(
                f.take("target")
                    .ok_or_else(|| perr(line, "kill-router needs target="))?,
            ),
        },
        "fake-router" => AttackMode::FakeRouterMitm,
        "blackhole" => AttackMode::BlackholeGateway,
        "dual-stack" => AttackMode::DualStackRogue,
        "passive" => AttackMode::Passive,
        other => return Err(perr(line, format!("unknown attack {other:?}"))),
    };
    f.finish()?;
    Ok(Directive::Attack {
        attacker: NodeId::from(*attacker),
        mode,
    })
}

fn parse_expectation(line: usize, s: &str) -> Result<Expectation, ScenarioError> {
    let pos = s
        .find(['=', '!', '<', '>'])
        .ok_or_else(|| perr(line, "expectation needs an operator"))?;
    let (metric, rest) = s.split_at(pos);
    let (op, value) = [
        (">=", CmpOp::Ge),
        ("<=", CmpOp::Le),
        ("!=", CmpOp::Ne),
        ("=", CmpOp::Eq),
        (">", CmpOp::Gt),
        ("<", CmpOp::Lt),
    ]
    .iter()
    .find_map(|(tok, op)| rest.strip_prefix(tok).map(|v| (*op, v)))
    .ok_or_else(|| perr(line, format!("bad operator in {s:?}")))?;
    if metric.is_empty() || value.is_empty() {
        return Err(perr(line, format!("malformed expectation {s:?}")));
    }
    Ok(Expectation {
        metric: metric.to_owned(),
        op,
        value: value.to_owned(),
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut s = Scenario {
        latency_ms: DEFAULT_LATENCY_MS,
        ..Default::default()
    };
    let mut run_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            ["latency", ms] => {
                s.latency_ms = ms
                    .parse()
                    .map_err(|_| perr(line, format!("bad latency {ms:?}")))?;
            }
            ["allow-dup-mac"] => s.allow_dup_mac = true,
            ["node", "router", id, rest @ ..] => s.nodes.push(NodeDecl::Router(parse_router(
                line,
                NodeId::from(*id),
                rest,
            )?)),
            ["node", "host", id, rest @ ..] => {
                s.nodes
                    .push(NodeDecl::Host(parse_host(line, NodeId::from(*id), rest)?))
            }
            ["node", "attacker", id, rest @ ..] => s.nodes.push(NodeDecl::Attacker(
                parse_attacker(line, NodeId::from(*id), rest)?,
            )),
            ["node", kind, ..] => return Err(perr(line, format!("unknown node kind {kind:?}"))),
            ["switch", id, rest @ ..] => {
                let mut f = Fields::new(line, rest)?;
                let ports = f.require("ports")?;
                f.finish()?;
                s.switches.push(SwitchDecl {
                    id: (*id).to_owned(),
                    ports,
                });
            }
            ["attach", node, port, rest @ ..] => {
                let (switch, port) = parse_port_ref(line, port)?;
                let mut f = Fields::new(line, rest)?;
                let class = match f.take("class") {
                    Some("router") => PortClass::RouterFacing,
                    Some("host") | None => PortClass::HostFacing,
                    Some(v) => {
                        return Err(perr(line, format!("class={v}: expected router or host")))
                    }
                };
                f.finish()?;
                s.attachments.push(Attachment {
                    node: NodeId::from(*node),
                    switch,
                    port,
                    class,
                });
            }
            ["policy", "global", "two-hour-rule"] => s.two_hour_rule = true,
            ["policy", "global", other] => {
                return Err(perr(line, format!("unknown global policy {other:?}")))
            }
            ["policy", port, rule] => {
                let (switch, port) = parse_port_ref(line, port)?;
                let kind = if *rule == "ra-guard" {
                    PortPolicyKind::RaGuard
                } else if let Some(list) = rule.strip_prefix("acl=") {
                    let macs = if list.is_empty() {
                        BTreeSet::new()
                    } else {
                        list.split(',')
                            .map(|m| {
                                m.parse::<MacAddress>()
                                    .map_err(|e| perr(line, format!("acl entry {m:?}: {e}")))
                            })
                            .collect::<Result<_, _>>()?
                    };
                    PortPolicyKind::Acl(macs)
                } else {
                    return Err(perr(line, format!("unknown port policy {rule:?}")));
                };
                s.port_policies.push(PortPolicyDecl { switch, port, kind });
            }
            ["key", node, key] => s.keys.push((NodeId::from(*node), KeyId::new(*key))),
            ["trust", key] => s.trust.push(KeyId::new(*key)),
            ["at", time, rest @ ..] => {
                let at: SimTime = time.parse().map_err(|e| perr(line, format!("{e}")))?;
                let directive = match rest {
                    ["attack", args @ ..] => parse_attack(line, args)?,
                    ["measure"] => Directive::Measure,
                    ["disable", node] => Directive::Disable(NodeId::from(*node)),
                    ["enable", node] => Directive::Enable(NodeId::from(*node)),
                    _ => {
                        return Err(perr(
                            line,
                            "unknown directive (attack, measure, disable, enable)",
                        ))
                    }
                };
                s.directives.push((at, directive));
            }
            ["expect", e] => s.expectations.push(parse_expectation(line, e)?),
            ["run", duration, rest @ ..] => {
                if run_seen {
                    return Err(perr(line, "duplicate run line"));
                }
                run_seen = true;
                s.duration = duration.parse().map_err(|e| perr(line, format!("{e}")))?;
                let mut f = Fields::new(line, rest)?;
                s.seed = f.parse("seed")?.unwrap_or(0);
                f.finish()?;
            }
            _ => return Err(perr(line, format!("unrecognized line {content:?}"))),
        }
    }
    if !run_seen {
        return Err(perr(text.lines().count().max(1), "missing run line"));
    }
    validate(&s)?;
    Ok(s)
}

fn verr(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation(message.into())
}

pub fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    let mut ids = BTreeSet::new();
    let mut macs = BTreeMap::new();
    for n in &s.nodes {
        if !ids.insert(n.id().clone()) {
            return Err(verr(format!("duplicate node id {}", n.id())));
        }
        if let Some(prev) = macs.insert(n.mac(), n.id().clone()) {
            if !s.allow_dup_mac {
                return Err(verr(format!(
                    "duplicate MAC {} on {} and {}",
                    n.mac(),
                    prev,
                    n.id()
                )));
            }
        }
    }
    let need = |id: &NodeId, what: &str| -> Result<&NodeDecl, ScenarioError> {
        s.node(id)
            .ok_or_else(|| verr(format!("{what} references undeclared node {id}")))
    };
    for n in &s.nodes {
        if let NodeDecl::Host(h) = n {
            if let Some((_, gw)) = &h.ipv4 {
                if !matches!(need(gw, "gw4")?, NodeDecl::Router(_)) {
                    return Err(verr(format!("gw4 of {} must be a router", h.id)));
                }
            }
        }
    }
    let mut switch_ids = BTreeMap::new();
    for sw in &s.switches {
        if switch_ids.insert(sw.id.clone(), sw.ports).is_some() {
            return Err(verr(format!("duplicate switch {}", sw.id)));
        }
    }
    let port_ok = |sw: &str, port: u32| -> Result<(), ScenarioError> {
        match switch_ids.get(sw) {
            None => Err(verr(format!("undeclared switch {sw}"))),
            Some(n) if port > *n => Err(verr(format!("{sw}.p{port} exceeds ports={n}"))),
            Some(_) => Ok(()),
        }
    };
    let mut attached = BTreeSet::new();
    let mut used_ports = BTreeSet::new();
    for a in &s.attachments {
        need(&a.node, "attach")?;
        port_ok(&a.switch, a.port)?;
        if !attached.insert(a.node.clone()) {
            return Err(verr(format!("{} attached more than once", a.node)));
        }
        if !used_ports.insert((a.switch.clone(), a.port)) {
            return Err(verr(format!("{}.p{} has two nodes", a.switch, a.port)));
        }
    }
    if !s.switches.is_empty() {
        if let Some(n) = s.nodes.iter().find(|n| !attached.contains(n.id())) {
            return Err(verr(format!(
                "{} is not attached to any switch port",
                n.id()
            )));
        }
    }
    for p in &s.port_policies {
        port_ok(&p.switch, p.port)?;
    }
    for (node, _) in &s.keys {
        need(node, "key")?;
    }
    for (at, d) in &s.directives {
        if *at > s.duration {
            return Err(verr(format!(
                "directive at {at} is after the end of the run ({})",
                s.duration
            )));
        }
        match d {
            Directive::Attack { attacker, mode } => {
                let NodeDecl::Attacker(a) = need(attacker, "attack")? else {
                    return Err(verr(format!("{attacker} is not an attacker")));
                };
                match mode {
                    AttackMode::KillRouter { target } => {
                        if !matches!(need(target, "kill-router target")?, NodeDecl::Router(_)) {
                            return Err(verr(format!(
                                "kill-router target {target} is not a router"
                            )));
                        }
                    }
                    AttackMode::FakeRouterMitm
                    | AttackMode::BlackholeGateway
                    | AttackMode::DualStackRogue => {
                        if a.persona.is_none() {
                            return Err(verr(format!(
                                "{attacker} needs persona-* settings for {mode}"
                            )));
                        }
                    }
                    AttackMode::Passive => {}
                }
            }
            Directive::Disable(n) | Directive::Enable(n) => {
                if !matches!(need(n, "disable/enable")?, NodeDecl::Router(_)) {
                    return Err(verr(format!(
                        "only routers can be disabled, {n} is not one"
                    )));
                }
            }
            Directive::Measure => {}
        }
    }
    for e in &s.expectations {
        if let Some((host, _)) = e.metric.split_once('.') {
            if host != "trace" && s.node(&NodeId::from(host)).is_none() {
                return Err(verr(format!(
                    "expectation references undeclared node {host}"
                )));
            }
        }
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

/// Canonical text form. Every default is written out.
pub fn print_scenario(s: &Scenario) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "latency {}", s.latency_ms);
    if s.allow_dup_mac {
        o.push_str("allow-dup-mac\n");
    }
    for n in &s.nodes {
        match n {
            NodeDecl::Router(r) => {
                let _ = write!(o, "node router {} mac={}", r.id, r.mac);
                if let Some(ll) = r.link_local {
                    let _ = write!(o, " ll={ll}");
                }
                if let Some(first) = r.prefixes.first() {
                    let list: Vec<String> =
                        r.prefixes.iter().map(|p| p.prefix.to_string()).collect();
                    let _ = write!(
                        o,
                        " prefix={} valid={} preferred={} autonomous={}",
                        list.join(","),
                        first.valid,
                        first.preferred,
                        yes_no(first.autonomous)
                    );
                }
                let _ = write!(
                    o,
                    " lifetime={} preference={} interval={} jitter={} routes={} ipv6={}",
                    r.lifetime,
                    r.preference,
                    r.interval,
                    r.jitter_ms,
                    yes_no(r.routes),
                    on_off(r.ipv6)
                );
                if let Some(v4) = r.ipv4 {
                    let _ = write!(o, " ipv4={v4}");
                }
            }
            NodeDecl::Host(h) => {
                let _ = write!(
                    o,
                    "node host {} mac={} ipv6={} send={}",
                    h.id,
                    h.mac,
                    on_off(h.ipv6),
                    on_off(h.send)
                );
                if let Some((a, gw)) = &h.ipv4 {
                    let _ = write!(o, " ipv4={a} gw4={gw}");
                }
                match &h.iid {
                    IidMode::Eui64 => {}
                    IidMode::Explicit(i) => {
                        let _ = write!(o, " iid={i}");
                    }
                    IidMode::Cga { key, modifier } => {
                        let _ = write!(o, " cga={key} modifier={modifier}");
                    }
                }
                let _ = write!(o, " prefer={}", if h.prefer_v4 { "ipv4" } else { "ipv6" });
            }
            NodeDecl::Attacker(a) => {
                let _ = write!(o, "node attacker {} mac={}", a.id, a.mac);
                if let Some(p) = &a.persona {
                    if let Some(pd) = &p.prefix {
                        let _ = write!(
                            o,
                            " persona-prefix={} persona-valid={} persona-preferred={}",
                            pd.prefix, pd.valid, pd.preferred
                        );
                    }
                    let _ = write!(
                        o,
                        " persona-routes={} persona-preference={} persona-lifetime={} persona-interval={}",
                        yes_no(p.routes),
                        p.preference,
                        p.lifetime,
                        p.interval
                    );
                }
            }
        }
        o.push('\n');
    }
    for sw in &s.switches {
        let _ = writeln!(o, "switch {} ports={}", sw.id, sw.ports);
    }
    for a in &s.attachments {
        let class = match a.class {
            PortClass::RouterFacing => "router",
            PortClass::HostFacing => "host",
        };
        let _ = writeln!(
            o,
            "attach {} {}.p{} class={class}",
            a.node, a.switch, a.port
        );
    }
    for p in &s.port_policies {
        match &p.kind {
            PortPolicyKind::RaGuard => {
                let _ = writeln!(o, "policy {}.p{} ra-guard", p.switch, p.port);
            }
            PortPolicyKind::Acl(macs) => {
                let list: Vec<String> = macs.iter().map(ToString::to_string).collect();
                let _ = writeln!(o, "policy {}.p{} acl={}", p.switch, p.port, list.join(","));
            }
        }
    }
    if s.two_hour_rule {
        o.push_str("policy global two-hour-rule\n");
    }
    for (node, key) in &s.keys {
        let _ = writeln!(o, "key {node} {key}");
    }
    for key in &s.trust {
        let _ = writeln!(o, "trust {key}");
    }
    for (at, d) in &s.directives {
        match d {
            Directive::Attack { attacker, mode } => {
                let _ = writeln!(o, "at {at} attack {attacker} {mode}");
            }
            Directive::Measure => {
                let _ = writeln!(o, "at {at} measure");
            }
            Directive::Disable(n) => {
                let _ = writeln!(o, "at {at} disable {n}");
            }
            Directive::Enable(n) => {
                let _ = writeln!(o, "at {at} enable {n}");
            }
        }
    }
    for e in &s.expectations {
        let _ = writeln!(o, "expect {e}");
    }
    let _ = writeln!(o, "run {} seed={}", s.duration, s.seed);
    o
}
