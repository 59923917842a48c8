// SPDX-License-Identifier: Apache-2.0

//! The neighbor-discovery vocabulary exchanged on the simulated link.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::addr::{Ipv4Address, Ipv6Address, MacAddress, Prefix};

/// Lifetimes carried in RAs and prefix options, in whole seconds.
pub type Seconds = u32;

/// Scenario-assigned node name. Ordering is lexicographic and is used as the
/// simultaneous-DAD tie-break.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown router preference {0:?} (expected low, medium or high)")]
pub struct PreferenceParseError(String);

/// Default router preference. `Low < Medium < High`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum RouterPreference {
    Low,
    #[default]
    Medium,
    High,
}

impl fmt::Display for RouterPreference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Low => "low",
            Self::Medium => "medium",
            Self::High => "high",
        })
    }
}

impl FromStr for RouterPreference {
    type Err = PreferenceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low" => Ok(Self::Low),
            "medium" => Ok(Self::Medium),
            "high" => Ok(Self::High),
            other => Err(PreferenceParseError(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("preferred lifetime {preferred} exceeds valid lifetime {valid}")]
pub struct LifetimeOrderError {
    pub valid: Seconds,
    pub preferred: Seconds,
}

/// A prefix information option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrefixInfo {
    prefix: Prefix,
    autonomous: bool,
    valid_lifetime: Seconds,
    preferred_lifetime: Seconds,
}

impl PrefixInfo {
    pub fn new(
        prefix: Prefix,
        autonomous: bool,
        valid_lifetime: Seconds,
        preferred_lifetime: Seconds,
    ) -> Result<Self, LifetimeOrderError> {
        if preferred_lifetime > valid_lifetime {
            return Err(LifetimeOrderError {
                valid: valid_lifetime,
                preferred: preferred_lifetime,
            });
        }
        Ok(Self {
            prefix,
            autonomous,
            valid_lifetime,
            preferred_lifetime,
        })
    }

    pub fn prefix(&self) -> Prefix {
        self.prefix
    }

    pub fn autonomous(&self) -> bool {
        self.autonomous
    }

    pub fn valid_lifetime(&self) -> Seconds {
        self.valid_lifetime
    }

    pub fn preferred_lifetime(&self) -> Seconds {
        self.preferred_lifetime
    }
}

/// Names a signing key in the trust-anchor registry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyId(String);

impl KeyId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Authentication attached to a signed RA.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuthToken {
    pub key_id: KeyId,
    pub tag: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RouterAdvertisement {
    pub src_mac: MacAddress,
    pub src_ip: Ipv6Address,
    /// Zero means "not a default router".
    pub router_lifetime: u16,
    pub preference: RouterPreference,
    pub prefixes: Vec<PrefixInfo>,
    pub auth: Option<AuthToken>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AddressFamily {
    Ipv6,
    Ipv4,
}

impl fmt::Display for AddressFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ipv6 => "ipv6",
            Self::Ipv4 => "ipv4",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    V6(Ipv6Address),
    V4(Ipv4Address),
}

impl Endpoint {
    pub fn family(&self) -> AddressFamily {
        match self {
            Self::V6(_) => AddressFamily::Ipv6,
            Self::V4(_) => AddressFamily::Ipv4,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::V6(a) => a.fmt(f),
            Self::V4(a) => a.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DataPacket {
    pub src: Endpoint,
    pub dst: Endpoint,
    pub payload_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NdMessage {
    RouterAdvertisement(RouterAdvertisement),
    RouterSolicitation {
        src_mac: MacAddress,
        src_ip: Ipv6Address,
    },
    NeighborSolicitation {
        src_mac: MacAddress,
        src_ip: Ipv6Address,
        target: Ipv6Address,
    },
    NeighborAdvertisement {
        src_mac: MacAddress,
        src_ip: Ipv6Address,
        target: Ipv6Address,
    },
    Data(DataPacket),
}

impl NdMessage {
    /// Short name used in trace records.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::RouterAdvertisement(_) => "ra",
            Self::RouterSolicitation { .. } => "rs",
            Self::NeighborSolicitation { .. } => "ns",
            Self::NeighborAdvertisement { .. } => "na",
            Self::Data(_) => "data",
        }
    }

    pub fn is_nd(&self) -> bool {
        !matches!(self, Self::Data(_))
    }

    pub fn src_mac(&self) -> Option<MacAddress> {
        match self {
            Self::RouterAdvertisement(ra) => Some(ra.src_mac),
            Self::RouterSolicitation { src_mac, .. }
            | Self::NeighborSolicitation { src_mac, .. }
            | Self::NeighborAdvertisement { src_mac, .. } => Some(*src_mac),
            Self::Data(_) => None,
        }
    }

    pub fn as_ra(&self) -> Option<&RouterAdvertisement> {
        match self {
            Self::RouterAdvertisement(ra) => Some(ra),
            _ => None,
        }
    }
}
