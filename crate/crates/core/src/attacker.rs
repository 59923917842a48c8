// SPDX-License-Identifier: Apache-2.0

//! The on-link adversary. It sniffs RAs, replays them with a zero router
//! lifetime to evict the real router, and advertises itself as a router
//! (optionally one that cannot forward, or on an IPv4-only link).

use std::fmt;

use thiserror::Error;

use crate::net_model::{DataPacket, MacAddress, NdMessage, NodeId, RouterAdvertisement};
use crate::outbox::{Outbox, TimerKind};
use crate::router::{forward_via, Forwarded, RouterConfig};
use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("no RA captured from {0}")]
    NoCapturedRa(NodeId),
    #[error("attacker {0} has no fake-router persona")]
    PersonaMissing(NodeId),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum AttackMode {
    #[default]
    Passive,
    KillRouter {
        target: NodeId,
    },
    FakeRouterMitm,
    BlackholeGateway,
    DualStackRogue,
}

impl fmt::Display for AttackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Passive => f.write_str("passive"),
            Self::KillRouter { target } => write!(f, "kill-router target={target}"),
            Self::FakeRouterMitm => f.write_str("fake-router"),
            Self::BlackholeGateway => f.write_str("blackhole"),
            Self::DualStackRogue => f.write_str("dual-stack"),
        }
    }
}

impl AttackMode {
    fn is_periodic(&self) -> bool {
        matches!(
            self,
            Self::FakeRouterMitm | Self::BlackholeGateway | Self::DualStackRogue
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapturedRa {
    pub ra: RouterAdvertisement,
    pub from: NodeId,
    pub at: SimTime,
}

#[derive(Debug, Clone)]
pub struct AttackerState {
    pub node_id: NodeId,
    pub mac: MacAddress,
    pub captured_ras: Vec<CapturedRa>,
    pub persona: Option<RouterConfig>,
    pub mode: AttackMode,
}

impl AttackerState {
    pub fn new(node_id: NodeId, mac: MacAddress, persona: Option<RouterConfig>) -> Self {
        Self {
            node_id,
            mac,
            captured_ras: Vec::new(),
            persona,
            mode: AttackMode::Passive,
        }
    }

    /// Records RAs seen on the link; other messages are ignored.
    pub fn capture_ra(&mut self, msg: &NdMessage, from: &NodeId, now: SimTime, out: &mut Outbox) {
        let Some(ra) = msg.as_ra() else {
            return;
        };
        out.trace(
            "ra-captured",
            vec![
                ("from", from.to_string()),
                ("lifetime", ra.router_lifetime.to_string()),
            ],
        );
        self.captured_ras.push(CapturedRa {
            ra: ra.clone(),
            from: from.clone(),
            at: now,
        });
    }

    /// Latest captured RA from `target`, replayed with a zero router
    /// lifetime. Source identifiers are kept; any auth token is dropped since
    /// the attacker cannot re-sign the modified message.
    pub fn spoof_kill_ra(&self, target: &NodeId) -> Result<RouterAdvertisement, AttackError> {
        let captured = self
            .captured_ras
            .iter()
            .rev()
            .find(|c| &c.from == target)
            .ok_or_else(|| AttackError::NoCapturedRa(target.clone()))?;
        let mut spoof = captured.ra.clone();
        spoof.router_lifetime = 0;
        spoof.auth = None;
        Ok(spoof)
    }

    /// An RA announcing the attacker itself as a router.
    pub fn forge_fake_router_ra(&self) -> Result<RouterAdvertisement, AttackError> {
        let persona = self
            .persona
            .as_ref()
            .ok_or_else(|| AttackError::PersonaMissing(self.node_id.clone()))?;
        let mut ra = persona.advertisement();
        ra.src_mac = self.mac;
        ra.auth = None;
        Ok(ra)
    }

    /// Whether traffic handed to the attacker reaches the sink.
    pub fn can_route(&self) -> bool {
        match self.mode {
            AttackMode::BlackholeGateway => false,
            _ => self.persona.as_ref().is_some_and(|p| p.can_route),
        }
    }

    pub fn forward(&self, data: &DataPacket, out: &mut Outbox) -> Forwarded {
        forward_via(&self.node_id, self.can_route(), data, out)
    }

    fn send_kill(&self, target: &NodeId, out: &mut Outbox) -> Result<(), AttackError> {
        let spoof = self.spoof_kill_ra(target)?;
        out.trace(
            "spoof-sent",
            vec![
                ("target", target.to_string()),
                ("src", spoof.src_ip.to_string()),
            ],
        );
        out.send(NdMessage::RouterAdvertisement(spoof));
        Ok(())
    }

    fn send_forged(&self, now: SimTime, out: &mut Outbox) -> Result<(), AttackError> {
        let ra = self.forge_fake_router_ra()?;
        out.trace(
            "forge-sent",
            vec![
                ("src", ra.src_ip.to_string()),
                ("lifetime", ra.router_lifetime.to_string()),
                ("preference", ra.preference.to_string()),
                ("routes", if self.can_route() { "yes" } else { "no" }.into()),
            ],
        );
        out.send(NdMessage::RouterAdvertisement(ra));
        let interval = self.persona.as_ref().map_or(10, |p| p.ra_interval);
        out.timer(now.after_secs(interval), TimerKind::Playbook);
        Ok(())
    }

    /// Switches to `mode` and performs its first move. Periodic modes keep
    /// going through [`AttackerState::on_playbook_timer`].
    pub fn run_playbook(
        &mut self,
        mode: AttackMode,
        now: SimTime,
        out: &mut Outbox,
    ) -> Result<(), AttackError> {
        self.mode = mode.clone();
        out.trace("attack-start", vec![("mode", mode.to_string())]);
        match &mode {
            AttackMode::Passive => Ok(()),
            AttackMode::KillRouter { target } => self.send_kill(target, out),
            AttackMode::FakeRouterMitm => {
                if self.persona.is_none() {
                    return Err(AttackError::PersonaMissing(self.node_id.clone()));
                }
                let mut victims: Vec<NodeId> =
                    self.captured_ras.iter().map(|c| c.from.clone()).collect();
                victims.sort();
                victims.dedup();
                for v in &victims {
                    self.send_kill(v, out)?;
                }
                self.send_forged(now, out)
            }
            AttackMode::BlackholeGateway | AttackMode::DualStackRogue => self.send_forged(now, out),
        }
    }

    pub fn on_playbook_timer(&mut self, now: SimTime, out: &mut Outbox) -> Result<(), AttackError> {
        if self.mode.is_periodic() {
            self.send_forged(now, out)?;
        }
        Ok(())
    }
}
