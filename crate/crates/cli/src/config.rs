//! Flat `key = value` scenario configuration.
//!
//! Values are resolved in layers, later ones winning: built-in defaults, the
//! `--config` file, `EMLAB_*` environment variables, then command-line flags.
//! Every key a scenario reads is declared up front; anything else is an error.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::failure::{invalid, Outcome};

/// A configuration key and its default value.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
}

pub const fn key(name: &'static str, default: &'static str) -> Key {
    Key { name, default }
}

/// Keys every scenario accepts.
pub const COMMON: &[Key] = &[key("run.seed", "0"), key("out.dir", "emlab-out")];

/// Keys left out of the config hash: they choose where results go, not what they are.
const UNHASHED: &[&str] = &["out.dir"];

/// `grid.n` → `EMLAB_GRID_N`.
pub fn env_name(key: &str) -> String {
    format!("EMLAB_{}", key.to_ascii_uppercase().replace('.', "_"))
}

/// Parses config-file text into ordered `(line, key, value)` entries.
pub fn parse_text(text: &str) -> Outcome<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(invalid(format!("config line {}: expected `key = value`, got `{}`", i + 1, raw.trim())));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            return Err(invalid(format!("config line {}: malformed key `{k}`", i + 1)));
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Resolved configuration of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    scenario: String,
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn resolve(
        scenario: &str,
        keys: &[Key],
        file: Option<&str>,
        env: impl Fn(&str) -> Option<String>,
        flags: &[(String, String)],
    ) -> Outcome<Self> {
        let mut values: BTreeMap<String, String> = COMMON
            .iter()
            .chain(keys)
            .map(|k| (k.name.to_string(), k.default.to_string()))
            .collect();
        if let Some(text) = file {
            let mut seen = BTreeMap::new();
            for (line, k, v) in parse_text(text)? {
                if let Some(first) = seen.insert(k.clone(), line) {
                    return Err(invalid(format!("config line {line}: `{k}` already set on line {first}")));
                }
                if k == "scenario" {
                    if v != scenario {
                        return Err(invalid(format!("config is for scenario `{v}`, not `{scenario}`")));
                    }
                    continue;
                }
                match values.get_mut(&k) {
                    Some(slot) => *slot = v,
                    None => return Err(unknown(scenario, &k, &values)),
                }
            }
        }
        for (k, slot) in values.iter_mut() {
            if let Some(v) = env(&env_name(k)) {
                *slot = v.trim().to_string();
            }
        }
        for (k, v) in flags {
            match values.get_mut(k) {
                Some(slot) => *slot = v.trim().to_string(),
                None => return Err(unknown(scenario, k, &values)),
            }
        }
        Ok(Self {
            scenario: scenario.to_string(),
            values,
        })
    }

    pub fn scenario(&self) -> &str {
        &self.scenario
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// SHA-256 over the scenario name and the sorted `key=value` lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("scenario={}\n", self.scenario));
        for (k, v) in self.entries().filter(|(k, _)| !UNHASHED.contains(k)) {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn str(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("scenario reads undeclared key {key}"))
    }

    fn bad(&self, key: &str, want: &str) -> crate::failure::Failure {
        invalid(format!("{key} = `{}`: expected {want}", self.str(key)))
    }

    pub fn f64(&self, key: &str) -> Outcome<f64> {
        match self.str(key).parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.bad(key, "a finite number")),
        }
    }

    pub fn positive(&self, key: &str) -> Outcome<f64> {
        match self.f64(key)? {
            v if v > 0.0 => Ok(v),
            _ => Err(self.bad(key, "a positive number")),
        }
    }

    pub fn usize(&self, key: &str) -> Outcome<usize> {
        self.str(key).parse().map_err(|_| self.bad(key, "a non-negative integer"))
    }

    pub fn u64(&self, key: &str) -> Outcome<u64> {
        self.str(key).parse().map_err(|_| self.bad(key, "a 64-bit unsigned integer"))
    }

    pub fn bool(&self, key: &str) -> Outcome<bool> {
        match self.str(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            _ => Err(self.bad(key, "true or false")),
        }
    }

    pub fn f64_list(&self, key: &str) -> Outcome<Vec<f64>> {
        let parts: Vec<&str> = self.str(key).split(',').map(str::trim).collect();
        parts
            .iter()
            .map(|p| p.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| self.bad(key, "a comma-separated list of numbers"))
    }

    pub fn vec3(&self, key: &str) -> Outcome<[f64; 3]> {
        let v = self.f64_list(key)?;
        v.try_into().map_err(|_| self.bad(key, "three comma-separated numbers"))
    }

    /// `auto` yields `fallback`; anything else must be three numbers.
    pub fn vec3_or(&self, key: &str, fallback: [f64; 3]) -> Outcome<[f64; 3]> {
        if self.str(key) == "auto" {
            Ok(fallback)
        } else {
            self.vec3(key)
        }
    }

    pub fn int3(&self, key: &str) -> Outcome<[i64; 3]> {
        let parts: Option<Vec<i64>> = self.str(key).split(',').map(|p| p.trim().parse().ok()).collect();
        parts
            .and_then(|v| v.try_into().ok())
            .ok_or_else(|| self.bad(key, "three comma-separated integers"))
    }

    /// One of `choices`, returned as its index.
    pub fn choice(&self, key: &str, choices: &[&str]) -> Outcome<usize> {
        let v = self.str(key);
        choices
            .iter()
            .position(|c| *c == v)
            .ok_or_else(|| invalid(format!("{key}: unknown value `{v}`; expected one of {}", choices.join(", "))))
    }
}

fn unknown(scenario: &str, key: &str, values: &BTreeMap<String, String>) -> crate::failure::Failure {
    let known: Vec<&str> = values.keys().map(String::as_str).collect();
    invalid(format!("unknown key `{key}` for `{scenario}`; known keys: {}", known.join(", ")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[Key] = &[key("grid.n", "16"), key("run.dt", "0.01")];

    fn no_env(_: &str) -> Option<String> {
        None
    }

    #[test]
    fn layers_apply_in_order() {
        let file = "# comment\ngrid.n = 8   # trailing\nrun.dt=0.02\n";
        let env = |k: &str| (k == "EMLAB_GRID_N").then(|| "12".to_string());
        let flags = vec![("run.dt".to_string(), "0.03".to_string())];
        let c = Config::resolve("x", KEYS, Some(file), env, &flags).unwrap();
        assert_eq!(c.str("grid.n"), "12");
        assert_eq!(c.str("run.dt"), "0.03");
        assert_eq!(c.str("run.seed"), "0");
        let d = Config::resolve("x", KEYS, Some(file), no_env, &[]).unwrap();
        assert_eq!(d.usize("grid.n").unwrap(), 8);
    }

    #[test]
    fn malformed_or_unknown_entries_are_rejected() {
        for bad in ["grid.n 8", "nope = 1", "grid.n = 1\ngrid.n = 2", "= 3", "scenario = other"] {
            assert!(Config::resolve("x", KEYS, Some(bad), no_env, &[]).is_err(), "{bad}");
        }
        let flags = vec![("nope".to_string(), "1".to_string())];
        assert!(Config::resolve("x", KEYS, None, no_env, &flags).is_err());
        assert!(Config::resolve("x", KEYS, Some("scenario = x"), no_env, &[]).is_ok());
    }

    #[test]
    fn hash_ignores_output_dir_but_not_values() {
        let a = Config::resolve("x", KEYS, None, no_env, &[]).unwrap();
        let b = Config::resolve("x", KEYS, Some("out.dir = elsewhere"), no_env, &[]).unwrap();
        let c = Config::resolve("x", KEYS, Some("grid.n = 9"), no_env, &[]).unwrap();
        let d = Config::resolve("y", KEYS, None, no_env, &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_ne!(a.hash(), d.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn typed_getters_validate() {
        let c = Config::resolve("x", KEYS, Some("grid.n = -3\nrun.dt = nan"), no_env, &[]).unwrap();
        assert!(c.usize("grid.n").is_err());
        assert!(c.f64("run.dt").is_err());
        assert_eq!(env_name("init.max_mode"), "EMLAB_INIT_MAX_MODE");
    }
}
