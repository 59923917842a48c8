// SPDX-License-Identifier: Apache-2.0

//! Link-layer and network-layer identifiers.
//!
//! Every address computation in the simulator goes through these types. Text
//! forms are canonical (lowercase, compressed for IPv6) because traces and
//! metrics are compared byte for byte.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Failure to parse an address-like token. `offset` is the byte offset into
/// the input where parsing stopped making sense.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{reason} at byte {offset}")]
pub struct AddrParseError {
    pub offset: usize,
    pub reason: &'static str,
}

impl AddrParseError {
    fn at(offset: usize, reason: &'static str) -> Self {
        Self { offset, reason }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error("prefix length {0} exceeds 128")]
    LengthOutOfRange(u8),
    #[error("prefix {0} has bits set beyond /{1}")]
    HostBitsSet(Ipv6Address, u8),
    #[error("only /64 prefixes can form SLAAC addresses, got /{0}")]
    PrefixLengthUnsupported(u8),
    #[error(transparent)]
    Parse(#[from] AddrParseError),
}

/// A 48-bit Ethernet MAC address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MacAddress(pub [u8; 6]);

impl MacAddress {
    pub const fn new(octets: [u8; 6]) -> Self {
        Self(octets)
    }

    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d, e, g] = self.0;
        write!(f, "{a:02x}:{b:02x}:{c:02x}:{d:02x}:{e:02x}:{g:02x}")
    }
}

impl FromStr for MacAddress {
    type Err = AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut octets = [0u8; 6];
        let mut offset = 0;
        let mut parts = s.split(':');
        for octet in octets.iter_mut() {
            let part = parts
                .next()
                .ok_or(AddrParseError::at(s.len(), "too few octets"))?;
            if part.len() != 2 {
                return Err(AddrParseError::at(offset, "octet must be two hex digits"));
            }
            *octet = u8::from_str_radix(part, 16)
                .map_err(|_| AddrParseError::at(offset, "invalid hex digit"))?;
            offset += part.len() + 1;
        }
        if parts.next().is_some() {
            return Err(AddrParseError::at(offset - 1, "too many octets"));
        }
        Ok(Self(octets))
    }
}

/// The low 64 bits of an IPv6 unicast address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterfaceId(pub u64);

impl InterfaceId {
    pub const fn bits(&self) -> u64 {
        self.0
    }

    pub const fn octets(&self) -> [u8; 8] {
        self.0.to_be_bytes()
    }
}

/// Four colon-separated groups of four hex digits, e.g. `021a:2bff:fe3c:4d5e`.
impl fmt::Display for InterfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        write!(
            f,
            "{:04x}:{:04x}:{:04x}:{:04x}",
            (v >> 48) & 0xffff,
            (v >> 32) & 0xffff,
            (v >> 16) & 0xffff,
            v & 0xffff
        )
    }
}

/// Accepts the four-group form produced by `Display` or a bare hex number of
/// up to sixteen digits.
impl FromStr for InterfaceId {
    type Err = AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(AddrParseError::at(0, "empty interface identifier"));
        }
        if s.contains(':') {
            let mut value = 0u64;
            let mut offset = 0;
            let mut count = 0;
            for group in s.split(':') {
                if group.is_empty() || group.len() > 4 {
                    return Err(AddrParseError::at(offset, "group must be 1-4 hex digits"));
                }
                let g = u16::from_str_radix(group, 16)
                    .map_err(|_| AddrParseError::at(offset, "invalid hex digit"))?;
                value = (value << 16) | u64::from(g);
                offset += group.len() + 1;
                count += 1;
                if count > 4 {
                    return Err(AddrParseError::at(
                        offset - group.len() - 1,
                        "too many groups",
                    ));
                }
            }
            if count != 4 {
                return Err(AddrParseError::at(s.len(), "expected four groups"));
            }
            return Ok(Self(value));
        }
        let digits = s.strip_prefix("0x").unwrap_or(s);
        let base = s.len() - digits.len();
        if digits.is_empty() || digits.len() > 16 {
            return Err(AddrParseError::at(base, "expected 1-16 hex digits"));
        }
        if let Some(pos) = digits.bytes().position(|b| !b.is_ascii_hexdigit()) {
            return Err(AddrParseError::at(base + pos, "invalid hex digit"));
        }
        Ok(Self(
            u64::from_str_radix(digits, 16).expect("validated hex"),
        ))
    }
}

/// A 128-bit IPv6 address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Ipv6Address(pub u128);

impl Ipv6Address {
    pub const UNSPECIFIED: Self = Self(0);

    pub const fn bits(&self) -> u128 {
        self.0
    }

    pub const fn high64(&self) -> u64 {
        (self.0 >> 64) as u64
    }

    pub const fn interface_id(&self) -> InterfaceId {
        InterfaceId(self.0 as u64)
    }

    pub const fn is_link_local(&self) -> bool {
        (self.0 >> 118) == (0xfe80u128 >> 6)
    }

    pub const fn is_unspecified(&self) -> bool {
        self.0 == 0
    }
}

impl From<std::net::Ipv6Addr> for Ipv6Address {
    fn from(a: std::net::Ipv6Addr) -> Self {
        Self(a.to_bits())
    }
}

impl From<Ipv6Address> for std::net::Ipv6Addr {
    fn from(a: Ipv6Address) -> Self {
        std::net::Ipv6Addr::from_bits(a.0)
    }
}

impl fmt::Display for Ipv6Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_address(*self))
    }
}

impl FromStr for Ipv6Address {
    type Err = AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_address(s)
    }
}

/// A 32-bit IPv4 address, used only for the dual-stack gateway path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ipv4Address(pub [u8; 4]);

impl fmt::Display for Ipv4Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        std::net::Ipv4Addr::from(self.0).fmt(f)
    }
}

impl FromStr for Ipv4Address {
    type Err = AddrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<std::net::Ipv4Addr>()
            .map(|a| Self(a.octets()))
            .map_err(|_| AddrParseError::at(0, "invalid IPv4 address"))
    }
}

/// An IPv6 prefix. Bits of `address` past `length` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    address: Ipv6Address,
    length: u8,
}

impl Prefix {
    pub fn new(address: Ipv6Address, length: u8) -> Result<Self, PrefixError> {
        if length > 128 {
            return Err(PrefixError::LengthOutOfRange(length));
        }
        if address.0 & !Self::mask(length) != 0 {
            return Err(PrefixError::HostBitsSet(address, length));
        }
        Ok(Self { address, length })
    }

    /// Builds a prefix by zeroing the host bits of `address`.
    pub fn truncating(address: Ipv6Address, length: u8) -> Result<Self, PrefixError> {
        if length > 128 {
            return Err(PrefixError::LengthOutOfRange(length));
        }
        Ok(Self {
            address: Ipv6Address(address.0 & Self::mask(length)),
            length,
        })
    }

    fn mask(length: u8) -> u128 {
        match length {
            0 => 0,
            l => u128::MAX << (128 - u32::from(l)),
        }
    }

    pub const fn address(&self) -> Ipv6Address {
        self.address
    }

    pub const fn length(&self) -> u8 {
        self.length
    }

    pub fn contains(&self, addr: Ipv6Address) -> bool {
        addr.0 & Self::mask(self.length) == self.address.0
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.address, self.length)
    }
}

impl FromStr for Prefix {
    type Err = PrefixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let slash = s
            .find('/')
            .ok_or(AddrParseError::at(s.len(), "missing '/'"))?;
        let address = parse_address(&s[..slash])?;
        let length = s[slash + 1..]
            .parse::<u8>()
            .map_err(|_| AddrParseError::at(slash + 1, "invalid prefix length"))?;
        Self::new(address, length)
    }
}

/// Modified EUI-64: flip the universal/local bit of the first octet and
/// splice `ff:fe` between the OUI and the NIC-specific half.
pub fn derive_eui64(mac: MacAddress) -> InterfaceId {
    let m = mac.0;
    InterfaceId(u64::from_be_bytes([
        m[0] ^ 0x02,
        m[1],
        m[2],
        0xff,
        0xfe,
        m[3],
        m[4],
        m[5],
    ]))
}

const LINK_LOCAL_HIGH: u128 = 0xfe80u128 << 112;

/// `fe80::/64` with `iid` in the low 64 bits.
pub fn link_local_from(iid: InterfaceId) -> Ipv6Address {
    Ipv6Address(LINK_LOCAL_HIGH | u128::from(iid.0))
}

/// Concatenates a /64 prefix with an interface identifier.
pub fn global_from(prefix: Prefix, iid: InterfaceId) -> Result<Ipv6Address, PrefixError> {
    if prefix.length() != 64 {
        return Err(PrefixError::PrefixLengthUnsupported(prefix.length()));
    }
    Ok(Ipv6Address(prefix.address().0 | u128::from(iid.0)))
}

/// Canonical text form: lowercase, longest zero run compressed.
pub fn print_address(addr: Ipv6Address) -> String {
    std::net::Ipv6Addr::from(addr).to_string()
}

/// Parses standard IPv6 text notation, including `::` compression and a
/// trailing dotted-quad.
pub fn parse_address(text: &str) -> Result<Ipv6Address, AddrParseError> {
    if text.is_empty() {
        return Err(AddrParseError::at(0, "empty address"));
    }
    let groups = match text.find("::") {
        Some(gap) => {
            if let Some(again) = text[gap + 2..].find("::") {
                return Err(AddrParseError::at(
                    gap + 2 + again,
                    "'::' may appear only once",
                ));
            }
            let head = parse_groups(&text[..gap], 0, false)?;
            let tail = parse_groups(&text[gap + 2..], gap + 2, true)?;
            if head.len() + tail.len() > 7 {
                return Err(AddrParseError::at(gap, "too many groups around '::'"));
            }
            let mut groups = head;
            groups.resize(8 - tail.len(), 0);
            groups.extend(tail);
            groups
        }
        None => {
            let groups = parse_groups(text, 0, true)?;
            if groups.len() != 8 {
                return Err(AddrParseError::at(text.len(), "expected eight groups"));
            }
            groups
        }
    };
    Ok(Ipv6Address(
        groups
            .iter()
            .fold(0u128, |acc, g| (acc << 16) | u128::from(*g)),
    ))
}

fn parse_groups(s: &str, base: usize, dotted_tail: bool) -> Result<Vec<u16>, AddrParseError> {
    let mut groups = Vec::new();
    if s.is_empty() {
        return Ok(groups);
    }
    let pieces: Vec<&str> = s.split(':').collect();
    let mut offset = base;
    for (i, piece) in pieces.iter().enumerate() {
        if piece.is_empty() {
            return Err(AddrParseError::at(offset, "empty group"));
        }
        if piece.contains('.') {
            if !(dotted_tail && i == pieces.len() - 1) {
                return Err(AddrParseError::at(
                    offset,
                    "embedded IPv4 only allowed at the end",
                ));
            }
            let v4: std::net::Ipv4Addr = piece
                .parse()
                .map_err(|_| AddrParseError::at(offset, "invalid embedded IPv4"))?;
            let o = v4.octets();
            groups.push(u16::from_be_bytes([o[0], o[1]]));
            groups.push(u16::from_be_bytes([o[2], o[3]]));
        } else {
            if let Some(pos) = piece.bytes().position(|b| !b.is_ascii_hexdigit()) {
                return Err(AddrParseError::at(offset + pos, "invalid hex digit"));
            }
            if piece.len() > 4 {
                return Err(AddrParseError::at(
                    offset + 4,
                    "group longer than four digits",
                ));
            }
            groups.push(u16::from_str_radix(piece, 16).expect("validated hex"));
        }
        if groups.len() > 8 {
            return Err(AddrParseError::at(offset, "too many groups"));
        }
        offset += piece.len() + 1;
    }
    Ok(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mac(s: &str) -> MacAddress {
        s.parse().unwrap()
    }

    // Hand-assembled expectations: octet0 ^ 0x02, then ff:fe spliced after octet 2.
    #[test]
    fn eui64_worked_examples() {
        assert_eq!(
            derive_eui64(mac("00:1a:2b:3c:4d:5e")),
            InterfaceId(0x021a_2bff_fe3c_4d5e)
        );
        assert_eq!(
            derive_eui64(mac("00:00:00:00:00:00")),
            InterfaceId(0x0200_00ff_fe00_0000)
        );
        assert_eq!(
            derive_eui64(mac("02:00:00:00:00:00")),
            InterfaceId(0x0000_00ff_fe00_0000)
        );
        assert_eq!(
            derive_eui64(mac("00:1a:2b:3c:4d:5e")).to_string(),
            "021a:2bff:fe3c:4d5e"
        );
    }

    #[test]
    fn link_local_examples() {
        assert_eq!(link_local_from(InterfaceId(0)).to_string(), "fe80::");
        assert_eq!(
            link_local_from(InterfaceId(0x021a_2bff_fe3c_4d5e)).to_string(),
            "fe80::21a:2bff:fe3c:4d5e"
        );
        assert_eq!(
            link_local_from(InterfaceId(u64::MAX)).to_string(),
            "fe80::ffff:ffff:ffff:ffff"
        );
        assert!(link_local_from(InterfaceId(7)).is_link_local());
    }

    #[test]
    fn global_examples() {
        let p: Prefix = "2001:db8:1::/64".parse().unwrap();
        let a = global_from(p, InterfaceId(0x021a_2bff_fe3c_4d5e)).unwrap();
        assert_eq!(a.to_string(), "2001:db8:1:0:21a:2bff:fe3c:4d5e");
        assert_eq!(
            global_from(p, InterfaceId(0)).unwrap().to_string(),
            "2001:db8:1::"
        );
        let zero: Prefix = "::/64".parse().unwrap();
        let a = global_from(zero, InterfaceId(0xdead_beef)).unwrap();
        assert_eq!(a.high64(), 0);
        assert_eq!(a.interface_id(), InterfaceId(0xdead_beef));
    }

    #[test]
    fn global_rejects_non_64() {
        let p: Prefix = "2001:db8::/48".parse().unwrap();
        assert_eq!(
            global_from(p, InterfaceId(1)),
            Err(PrefixError::PrefixLengthUnsupported(48))
        );
    }

    #[test]
    fn parse_examples() {
        let a = parse_address("fe80::1").unwrap();
        assert_eq!(a.0 >> 112, 0xfe80);
        assert_eq!(a.0 & 0xffff, 1);
        assert_eq!(parse_address("::").unwrap(), Ipv6Address(0));
        assert_eq!(
            print_address(parse_address("2001:0db8:0:0:0:0:0:1").unwrap()),
            "2001:db8::1"
        );
        assert_eq!(
            parse_address("::ffff:10.0.0.1").unwrap().0,
            0xffff_0a00_0001
        );
    }

    #[test]
    fn parse_error_offsets() {
        assert_eq!(parse_address("").unwrap_err().offset, 0);
        assert_eq!(parse_address("fe80::1::2").unwrap_err().offset, 7);
        assert_eq!(parse_address("fe80::g").unwrap_err().offset, 6);
        assert_eq!(parse_address("12345::").unwrap_err().offset, 4);
        assert_eq!(parse_address("1:2:3:4:5:6:7").unwrap_err().offset, 13);
        assert_eq!(parse_address("1:2:3:4:5:6:7:8:9").unwrap_err().offset, 16);
        assert_eq!(parse_address("1::2:").unwrap_err().offset, 5);
        assert!(parse_address("1:2:3:4:5:6:7::8").is_err());
    }

    #[test]
    fn mac_text_form() {
        let m = mac("00:1A:2b:3c:4d:5e");
        assert_eq!(m.to_string(), "00:1a:2b:3c:4d:5e");
        assert_eq!("00:1a:2b".parse::<MacAddress>().unwrap_err().offset, 8);
        assert_eq!(
            "00:1a:2b:3c:4d:5e:6f"
                .parse::<MacAddress>()
                .unwrap_err()
                .offset,
            17
        );
        assert_eq!(
            "00:1a:zz:3c:4d:5e"
                .parse::<MacAddress>()
                .unwrap_err()
                .offset,
            6
        );
    }

    #[test]
    fn prefix_invariant() {
        assert!(matches!(
            "2001:db8::1/64".parse::<Prefix>(),
            Err(PrefixError::HostBitsSet(_, 64))
        ));
        assert_eq!(
            "::/129".parse::<Prefix>(),
            Err(PrefixError::LengthOutOfRange(129))
        );
        assert!(matches!(
            "::/x".parse::<Prefix>(),
            Err(PrefixError::Parse(_))
        ));
        let p = Prefix::truncating("2001:db8::1".parse().unwrap(), 64).unwrap();
        assert_eq!(p.to_string(), "2001:db8::/64");
        assert!(p.contains("2001:db8::abcd".parse().unwrap()));
        assert!(!p.contains("2001:db9::".parse().unwrap()));
        assert_eq!(Prefix::new(Ipv6Address(0), 0).unwrap().length(), 0);
    }

    #[test]
    fn iid_text_forms() {
        assert_eq!(
            "021a:2bff:fe3c:4d5e".parse::<InterfaceId>().unwrap(),
            InterfaceId(0x021a_2bff_fe3c_4d5e)
        );
        assert_eq!("0".parse::<InterfaceId>().unwrap(), InterfaceId(0));
        assert_eq!("0xff".parse::<InterfaceId>().unwrap(), InterfaceId(255));
        assert!("1:2:3".parse::<InterfaceId>().is_err());
        assert!("1:2:3:4:5".parse::<InterfaceId>().is_err());
    }
}
