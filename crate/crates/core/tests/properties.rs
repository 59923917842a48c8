// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::net::Ipv6Addr;

use proptest::prelude::*;
use slaac_sim::defense::{cga_generate, cga_verify, TrustAnchorRegistry};
use slaac_sim::host::{apply_two_hour_rule, HostConfig, HostState, TWO_HOURS};
use slaac_sim::net_model::{
    derive_eui64, global_from, link_local_from, parse_address, print_address, InterfaceId,
    Ipv6Address, MacAddress, NodeId, Prefix, RouterAdvertisement, RouterPreference,
};
use slaac_sim::outbox::Outbox;
use slaac_sim::scenario::{parse_scenario, print_scenario};
use slaac_sim::SimTime;

fn eui64_oracle(m: [u8; 6]) -> u64 {
    let bytes = [m[0] ^ 0b0000_0010, m[1], m[2], 0xff, 0xfe, m[3], m[4], m[5]];
    bytes.iter().fold(0u64, |acc, b| (acc << 8) | u64::from(*b))
}

fn pref() -> impl Strategy<Value = RouterPreference> {
    prop_oneof![
        Just(RouterPreference::Low),
        Just(RouterPreference::Medium),
        Just(RouterPreference::High)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn print_matches_std_and_parses_back(bits: u128) {
        let a = Ipv6Address(bits);
        let text = print_address(a);
        prop_assert_eq!(&text, &Ipv6Addr::from(bits).to_string());
        prop_assert_eq!(parse_address(&text).unwrap(), a);
    }

    #[test]
    fn parses_uncompressed_form(bits: u128) {
        let groups: Vec<String> = (0..8).rev().map(|i| format!("{:x}", (bits >> (16 * i)) & 0xffff)).collect();
        prop_assert_eq!(parse_address(&groups.join(":")).unwrap(), Ipv6Address(bits));
    }

    #[test]
    fn eui64_matches_bit_oracle(m: [u8; 6]) {
        let iid = derive_eui64(MacAddress(m));
        prop_assert_eq!(iid.0, eui64_oracle(m));
        let b = iid.0.to_be_bytes();
        prop_assert_eq!((b[3], b[4]), (0xff, 0xfe));
        prop_assert_eq!(b[0] ^ m[0], 0x02);
    }

    #[test]
    fn link_local_layout(iid: u64) {
        let a = link_local_from(InterfaceId(iid));
        prop_assert_eq!(a.0 as u64, iid);
        prop_assert_eq!((a.0 >> 64) as u64, 0xfe80_0000_0000_0000);
    }

    #[test]
    fn global_from_is_a_bijection(high: u64, iid: u64) {
        let prefix = Prefix::new(Ipv6Address(u128::from(high) << 64), 64).unwrap();
        let a = global_from(prefix, InterfaceId(iid)).unwrap();
        prop_assert_eq!((a.0 >> 64) as u64, high);
        prop_assert_eq!(a.0 as u64, iid);
    }

    #[test]
    fn two_hour_rule_never_cuts_below_floor(remaining in 0u32..200_000, received in 0u32..200_000) {
        let r = apply_two_hour_rule(remaining, received);
        prop_assert!(r == received || r == remaining || r == TWO_HOURS);
        if received <= TWO_HOURS {
            prop_assert!(r >= remaining.min(TWO_HOURS));
        }
        // A repeated advertisement changes nothing further.
        prop_assert_eq!(apply_two_hour_rule(r, received), r);
    }

    #[test]
    fn cga_binds_key_and_modifier(key in proptest::collection::vec(any::<u8>(), 1..40), m1: u128, m2: u128) {
        let iid = cga_generate(&key, m1);
        prop_assert!(cga_verify(iid, &key, m1));
        prop_assume!(m1 != m2);
        prop_assert_ne!(iid, cga_generate(&key, m2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The selected default router always maximises (preference, recency)
    /// over the live entries, checked against a separate list model.
    #[test]
    fn default_router_is_argmax(ras in proptest::collection::vec((0usize..3, pref(), prop_oneof![Just(0u16), 100u16..9000]), 1..20)) {
        let mut host = HostState::new(HostConfig::new(NodeId::from("H1"), MacAddress([0, 0x1a, 0x2b, 0x3c, 0x4d, 0x5e])));
        let mut out = Outbox::new();
        host.begin_autoconf(SimTime::ZERO, &mut out);
        let ll = host.link_local().unwrap().address;
        host.dad_deadline(ll, SimTime::from_millis(1000), &mut out);
        let registry = TrustAnchorRegistry::new();
        let mut model: BTreeMap<usize, (RouterPreference, u64)> = BTreeMap::new();
        for (i, (r, p, lifetime)) in ras.iter().enumerate() {
            let now = SimTime::from_millis(2000 + 10 * i as u64);
            let ra = RouterAdvertisement {
                src_mac: MacAddress([0, 0, 0x5e, 0, 0x53, *r as u8 + 1]),
                src_ip: link_local_from(InterfaceId(*r as u64 + 1)),
                router_lifetime: *lifetime,
                preference: *p,
                prefixes: Vec::new(),
                auth: None,
            };
            host.process_ra(&ra, &NodeId::new(format!("R{r}")), &registry, now, &mut out);
            if *lifetime == 0 {
                model.remove(r);
            } else {
                model.insert(*r, (*p, now.millis()));
            }
            let now = SimTime::from_millis(2000 + 10 * i as u64 + 5);
            let expected = model.iter().max_by_key(|(_, (p, at))| (*p, *at)).map(|(r, _)| link_local_from(InterfaceId(*r as u64 + 1)));
            prop_assert_eq!(host.select_default_router(now).map(|e| e.router_ip), expected);
        }
    }

    #[test]
    fn generated_scenarios_round_trip(
        lifetime in 0u16..9000,
        p in pref(),
        interval in 1u32..600,
        valid in 1u32..100_000,
        frac in 0u32..=100,
        latency in 1u64..50,
        ipv6 in any::<bool>(),
        ra_guard in any::<bool>(),
        two_hour in any::<bool>(),
        seed: u64,
        at_ms in 0u64..5000,
    ) {
        let preferred = valid / 100 * frac.min(100);
        let mut text = format!("latency {latency}\n");
        if two_hour {
            text.push_str("policy global two-hour-rule\n");
        }
        text.push_str(&format!(
            "node router R1 mac=00:00:5e:00:53:01 prefix=2001:db8:1::/64 valid={valid} preferred={preferred} lifetime={lifetime} preference={p} interval={interval}\n"
        ));
        text.push_str(&format!("node host H1 mac=00:1a:2b:3c:4d:5e ipv6={}\n", if ipv6 { "on" } else { "off" }));
        text.push_str("node attacker A1 mac=00:00:5e:00:53:aa persona-prefix=2001:db8:bad::/64\n");
        text.push_str("switch SW1 ports=3\nattach R1 SW1.p1 class=router\nattach H1 SW1.p2\nattach A1 SW1.p3\n");
        if ra_guard {
            text.push_str("policy SW1.p3 ra-guard\n");
        }
        let at = SimTime::from_millis(at_ms);
        text.push_str(&format!("at {at} attack A1 fake-router\nat {at} measure\nexpect H1.default_router!=A1\nrun 6 seed={seed}\n"));
        let s = parse_scenario(&text).unwrap();
        let printed = print_scenario(&s);
        prop_assert_eq!(parse_scenario(&printed).unwrap(), s);
    }
}
