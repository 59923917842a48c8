// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::time::SimTime;

/// One line of the run trace:
/// `t=<ms> node=<id> kind=<kind> <k>=<v> ...`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub time: SimTime,
    pub node: String,
    pub kind: &'static str,
    pub attrs: Vec<(&'static str, String)>,
}

impl TraceRecord {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} node={} kind={}",
            self.time.millis(),
            self.node,
            self.kind
        )?;
        for (k, v) in &self.attrs {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Renders a whole trace, one newline-terminated record per line.
pub fn render(records: &[TraceRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 64);
    for r in records {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_format() {
        let r = TraceRecord {
            time: SimTime(1500),
            node: "H1".into(),
            kind: "addr-assigned",
            attrs: vec![("addr", "fe80::1".into())],
        };
        assert_eq!(
            r.to_string(),
            "t=1500 node=H1 kind=addr-assigned addr=fe80::1"
        );
        assert_eq!(render(&[r.clone(), r]).lines().count(), 2);
    }
}
