// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::path::PathBuf;

use slaac_sim::scenario::{parse_scenario, Scenario};
use slaac_sim::Engine;

pub fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn scenario_path(name: &str) -> PathBuf {
    scenario_dir().join(format!("{name}.scn"))
}

/// Every shipped scenario, sorted by file name.
pub fn corpus() -> Vec<PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    v.sort();
    v
}

pub fn load(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).unwrap();
    parse_scenario(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn run(name: &str) -> Engine {
    let s = load(name);
    slaac_sim::cli::run_scenario(&s, None).unwrap_or_else(|e| panic!("{name}: {e}"))
}
