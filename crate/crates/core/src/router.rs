// SPDX-License-Identifier: Apache-2.0

//! Legitimate router behaviour: periodic and solicited RAs, and forwarding
//! off-link traffic to the external sink.

use thiserror::Error;

use crate::defense::{sign_ra, DefenseError, TrustAnchorRegistry};
use crate::net_model::{
    DataPacket, Ipv4Address, Ipv6Address, KeyId, MacAddress, NdMessage, NodeId, PrefixInfo,
    RouterAdvertisement, RouterPreference, Seconds,
};
use crate::outbox::{Outbox, TimerKind};
use crate::time::SimTime;

pub const DEFAULT_RA_INTERVAL: Seconds = 10;
pub const DEFAULT_ROUTER_LIFETIME: u16 = 1800;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouterConfigError {
    #[error("ra interval must be positive")]
    ZeroInterval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouterConfig {
    pub node_id: NodeId,
    pub mac: MacAddress,
    pub link_local: Ipv6Address,
    pub advertised_prefixes: Vec<PrefixInfo>,
    pub router_lifetime: u16,
    pub preference: RouterPreference,
    pub ra_interval: Seconds,
    /// Upper bound of a uniform delay added to each periodic RA.
    pub jitter_ms: u64,
    pub can_route: bool,
    pub send_key: Option<KeyId>,
    /// An IPv4-only gateway never advertises.
    pub ipv6_enabled: bool,
    pub ipv4: Option<Ipv4Address>,
}

impl RouterConfig {
    pub fn validate(&self) -> Result<(), RouterConfigError> {
        if self.ra_interval == 0 {
            return Err(RouterConfigError::ZeroInterval);
        }
        Ok(())
    }

    /// The RA this configuration describes, without authentication.
    pub fn advertisement(&self) -> RouterAdvertisement {
        RouterAdvertisement {
            src_mac: self.mac,
            src_ip: self.link_local,
            router_lifetime: self.router_lifetime,
            preference: self.preference,
            prefixes: self.advertised_prefixes.clone(),
            auth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Forwarded {
    Delivered,
    Dropped,
}

#[derive(Debug, Clone)]
pub struct RouterState {
    pub config: RouterConfig,
    pub enabled: bool,
    pub periodic_sent: u64,
}

impl RouterState {
    pub fn new(config: RouterConfig) -> Self {
        Self {
            config,
            enabled: true,
            periodic_sent: 0,
        }
    }

    fn build_ra(
        &self,
        registry: &TrustAnchorRegistry,
    ) -> Result<RouterAdvertisement, DefenseError> {
        let ra = self.config.advertisement();
        match &self.config.send_key {
            Some(key) => sign_ra(&ra, key, registry),
            None => Ok(ra),
        }
    }

    fn send_ra(&self, ra: RouterAdvertisement, solicited: bool, out: &mut Outbox) {
        out.trace(
            "ra-sent",
            vec![
                ("src", ra.src_ip.to_string()),
                ("lifetime", ra.router_lifetime.to_string()),
                ("preference", ra.preference.to_string()),
                ("prefixes", ra.prefixes.len().to_string()),
                (
                    "signed",
                    if ra.auth.is_some() { "yes" } else { "no" }.into(),
                ),
                ("solicited", if solicited { "yes" } else { "no" }.into()),
            ],
        );
        out.send(NdMessage::RouterAdvertisement(ra));
    }

    /// Emits the periodic RA and schedules the next one `ra_interval` later
    /// (plus `jitter_ms` of extra delay, drawn by the engine).
    pub fn emit_periodic_ra(
        &mut self,
        now: SimTime,
        jitter_ms: u64,
        registry: &TrustAnchorRegistry,
        out: &mut Outbox,
    ) -> Result<Option<RouterAdvertisement>, DefenseError> {
        if !self.config.ipv6_enabled {
            return Ok(None);
        }
        out.timer(
            now.after_secs(self.config.ra_interval) + jitter_ms,
            TimerKind::PeriodicRa,
        );
        if !self.enabled {
            return Ok(None);
        }
        let ra = self.build_ra(registry)?;
        self.periodic_sent += 1;
        self.send_ra(ra.clone(), false, out);
        Ok(Some(ra))
    }

    pub fn on_router_solicitation(
        &mut self,
        registry: &TrustAnchorRegistry,
        out: &mut Outbox,
    ) -> Result<Option<RouterAdvertisement>, DefenseError> {
        if !self.enabled || !self.config.ipv6_enabled {
            return Ok(None);
        }
        let ra = self.build_ra(registry)?;
        self.send_ra(ra.clone(), true, out);
        Ok(Some(ra))
    }

    pub fn forward(&self, data: &DataPacket, out: &mut Outbox) -> Forwarded {
        forward_via(&self.config.node_id, self.config.can_route, data, out)
    }
}

/// Shared by routers and attacker personas.
pub(crate) fn forward_via(
    node: &NodeId,
    can_route: bool,
    data: &DataPacket,
    out: &mut Outbox,
) -> Forwarded {
    if can_route {
        out.trace(
            "forwarded",
            vec![
                ("payload", data.payload_id.to_string()),
                ("dst", data.dst.to_string()),
            ],
        );
        Forwarded::Delivered
    } else {
        out.trace(
            "blackhole-drop",
            vec![
                ("payload", data.payload_id.to_string()),
                ("via", node.to_string()),
            ],
        );
        Forwarded::Dropped
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defense::verify_ra;
    use crate::net_model::{derive_eui64, link_local_from, Endpoint};

    fn config() -> RouterConfig {
        let mac: MacAddress = "00:00:5e:00:53:01".parse().unwrap();
        RouterConfig {
            node_id: "R1".into(),
            mac,
            link_local: link_local_from(derive_eui64(mac)),
            advertised_prefixes: vec![PrefixInfo::new(
                "2001:db8:1::/64".parse().unwrap(),
                true,
                86400,
                14400,
            )
            .unwrap()],
            router_lifetime: 1800,
            preference: RouterPreference::High,
            ra_interval: 10,
            jitter_ms: 0,
            can_route: true,
            send_key: None,
            ipv6_enabled: true,
            ipv4: None,
        }
    }

    #[test]
    fn periodic_ra_mirrors_config() {
        let mut r = RouterState::new(config());
        let mut out = Outbox::new();
        let ra = r
            .emit_periodic_ra(SimTime(0), 0, &TrustAnchorRegistry::new(), &mut out)
            .unwrap()
            .unwrap();
        assert_eq!(ra, r.config.advertisement());
        assert_eq!(ra.router_lifetime, 1800);
        assert_eq!(ra.preference, RouterPreference::High);
        assert_eq!(out.timers, vec![(SimTime(10_000), TimerKind::PeriodicRa)]);
    }

    #[test]
    fn empty_prefix_list_advertises_router_only() {
        let mut c = config();
        c.advertised_prefixes.clear();
        let mut r = RouterState::new(c);
        let ra = r
            .emit_periodic_ra(
                SimTime(0),
                0,
                &TrustAnchorRegistry::new(),
                &mut Outbox::new(),
            )
            .unwrap()
            .unwrap();
        assert!(ra.prefixes.is_empty());
        assert_eq!(ra.router_lifetime, 1800);
    }

    #[test]
    fn signed_ra_verifies() {
        let mut c = config();
        c.send_key = Some(KeyId::new("k1"));
        let mut reg = TrustAnchorRegistry::new();
        reg.insert_derived(KeyId::new("k1"), 3);
        let mut r = RouterState::new(c);
        let ra = r
            .emit_periodic_ra(SimTime(0), 0, &reg, &mut Outbox::new())
            .unwrap()
            .unwrap();
        assert!(verify_ra(&ra, &reg));
        let missing = r.emit_periodic_ra(
            SimTime(0),
            0,
            &TrustAnchorRegistry::new(),
            &mut Outbox::new(),
        );
        assert!(missing.is_err());
    }

    #[test]
    fn solicitation_answers_unless_disabled() {
        let reg = TrustAnchorRegistry::new();
        let mut r = RouterState::new(config());
        let mut out = Outbox::new();
        assert!(r.on_router_solicitation(&reg, &mut out).unwrap().is_some());
        assert!(r.on_router_solicitation(&reg, &mut out).unwrap().is_some());
        assert_eq!(out.sends.len(), 2);
        r.enabled = false;
        assert!(r.on_router_solicitation(&reg, &mut out).unwrap().is_none());
    }

    #[test]
    fn forwarding_depends_on_can_route() {
        let data = DataPacket {
            src: Endpoint::V6("2001:db8:1::1".parse().unwrap()),
            dst: Endpoint::V6("2001:db8:ffff::1".parse().unwrap()),
            payload_id: 1,
        };
        let mut out = Outbox::new();
        assert_eq!(
            RouterState::new(config()).forward(&data, &mut out),
            Forwarded::Delivered
        );
        let mut c = config();
        c.can_route = false;
        assert_eq!(
            RouterState::new(c).forward(&data, &mut out),
            Forwarded::Dropped
        );
        assert!(out.has_trace("blackhole-drop"));
    }
}
