//! Layered configuration: built-in defaults, then an optional TOML file,
//! then `--seed` and `--set key.path=value` flags.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use toml::{Table, Value};
use vaprompt_core::pipeline::PipelineConfig;

fn merge(base: &mut Table, over: &Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

/// Every key the user wrote must survive a round trip through the typed config.
fn check_known(user: &Table, resolved: &Table, prefix: &str) -> Result<()> {
    for (k, v) in user {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (resolved.get(k), v) {
            (None, _) => bail!("unknown config key `{path}`"),
            (Some(Value::Table(r)), Value::Table(u)) => check_known(u, r, &path)?,
            _ => {}
        }
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(table: &mut Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| anyhow!("--set expects key.path=value, got `{assignment}`"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one item");
    let mut cur = table;
    for k in parents {
        cur = match cur.entry(k.to_string()).or_insert_with(|| Value::Table(Table::new())) {
            Value::Table(t) => t,
            _ => bail!("`{path}`: `{k}` is not a table"),
        };
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}

pub fn load(file: Option<&Path>, seed: Option<u64>, sets: &[String]) -> Result<PipelineConfig> {
    let mut table = Table::try_from(PipelineConfig::default()).context("serializing default config")?;
    let mut user = Table::new();
    if let Some(path) = file {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let parsed: Table = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        merge(&mut user, &parsed);
    }
    for s in sets {
        set_path(&mut user, s)?;
    }
    if let Some(seed) = seed {
        user.insert("seed".into(), Value::Integer(i64::try_from(seed).context("seed must fit in i64")?));
    }
    merge(&mut table, &user);
    let config: PipelineConfig = table.try_into().context("config does not match the expected schema")?;
    let resolved = Table::try_from(&config)?;
    check_known(&user, &resolved, "")?;
    Ok(config.seeded())
}

pub fn dump(config: &PipelineConfig) -> Result<String> {
    Ok(toml::to_string_pretty(config)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = load(None, None, &[]).unwrap();
        assert_eq!(c, PipelineConfig::default().seeded());
        let back: PipelineConfig = toml::from_str(&dump(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn file_then_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        fs::write(&p, "seed = 3\n[filter]\nmedian_threshold = 5.0\n[hoi.tracker]\ngap_limit = 4\n").unwrap();
        let c = load(Some(&p), Some(9), &["filter.median_threshold=6.5".into(), "metrics.boundary_width=3.0".into()]).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.rectify.ransac.seed, 9);
        assert_eq!(c.filter.median_threshold, 6.5);
        assert_eq!(c.hoi.tracker.gap_limit, 4);
        assert_eq!(c.metrics.boundary_width, Some(3.0));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load(None, None, &["filter.median_treshold=1.0".into()]).is_err());
        assert!(load(None, None, &["nonsense=1".into()]).is_err());
        assert!(load(None, None, &["filter.median_threshold=\"x\"".into()]).is_err());
    }
}
