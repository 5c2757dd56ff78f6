//! Number rendering and the small `key=value` formats shared by the CLI.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// 17 significant digits in scientific notation, e.g. `1.0000000000000000e0`.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value, got `{raw}`", i + 1))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Record of one CLI invocation, written as `key=value` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        config: BTreeMap<String, String>,
        seed: Option<u64>,
    ) -> Self {
        Self {
            command: command.into(),
            config,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "tool_version={}", self.tool_version);
        let _ = writeln!(s, "timestamp={}", self.timestamp);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed={seed}");
        }
        for (k, v) in &self.config {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_has_17_digits() {
        assert_eq!(sci(0.1), "1.0000000000000001e-1");
        assert_eq!(sci(-2.0), "-2.0000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 6.02214076e23, -1e-300] {
            assert_eq!(sci(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("# c\ntol = 1e-8\n\nscheme=2x2 # trailing\n").unwrap();
        assert_eq!(kv["tol"], "1e-8");
        assert_eq!(kv["scheme"], "2x2");
        assert!(parse_key_values("novalue\n").is_err());
    }

    #[test]
    fn manifest_lines() {
        let mut cfg = BTreeMap::new();
        cfg.insert("eps".to_string(), "1".to_string());
        let m = RunManifest::new("solve", cfg, Some(3));
        let kv = parse_key_values(&m.to_text()).unwrap();
        assert_eq!(kv["command"], "solve");
        assert_eq!(kv["seed"], "3");
        assert_eq!(kv["eps"], "1");
        assert!(kv["timestamp"].ends_with('Z'));
    }
}
