// SPDX-License-Identifier: Apache-2.0

//! Addresses, prefixes, interface identifiers and ND messages.

mod addr;
mod message;

pub use addr::{
    derive_eui64, global_from, link_local_from, parse_address, print_address, AddrParseError,
    InterfaceId, Ipv4Address, Ipv6Address, MacAddress, Prefix, PrefixError,
};
pub use message::{
    AddressFamily, AuthToken, DataPacket, Endpoint, KeyId, LifetimeOrderError, NdMessage, NodeId,
    PreferenceParseError, PrefixInfo, RouterAdvertisement, RouterPreference, Seconds,
};
