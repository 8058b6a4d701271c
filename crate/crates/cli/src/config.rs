//! Run configuration: a flat map of dotted keys checked against a fixed
//! schema.
//!
//! Layers, lowest first: schema defaults, a config file (TOML, or the
//! `config` object of a previous run's manifest), `STOCHMLS_*` environment
//! variables, then command-line overrides. Every layer rejects keys the
//! schema does not know.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::CliError;

/// Environment variables with this prefix override config keys; `__`
/// separates key segments, so `STOCHMLS_MLS__DEGREE` sets `mls.degree`.
pub const ENV_PREFIX: &str = "STOCHMLS_";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    Bool,
    Str,
    Choice(&'static [&'static str]),
    IntList,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    IntList(Vec<i64>),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "{}", toml::Value::String(s.clone())),
            Value::IntList(v) => {
                let items: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "[{}]", items.join(", "))
            }
        }
    }
}

impl Value {
    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => (*v).into(),
            Value::Float(v) => (*v).into(),
            Value::Bool(v) => (*v).into(),
            Value::Str(s) => s.clone().into(),
            Value::IntList(v) => v.clone().into(),
        }
    }
}

struct Key {
    name: &'static str,
    kind: Kind,
    default: fn() -> Value,
    help: &'static str,
}

const DOMAINS: &[&str] = &["cube", "ball", "torus"];
const DENSITIES: &[&str] = &["uniform", "ripple"];
const SOURCES: &[&str] = &["domain", "manifold"];
const PROFILES: &[&str] = &["smooth-bump", "wendland-like", "indicator"];
const BANDWIDTHS: &[&str] = &["rate", "fixed"];
const NORMALIZATIONS: &[&str] = &["per-count", "raw"];
const TARGETS: &[&str] = &["fill", "separation", "neighbor-count", "lambda-min", "error-rate", "smoothness"];
const MANIFOLDS: &[&str] = &["circle", "sphere", "graph"];

macro_rules! key {
    ($name:literal, $kind:expr, $default:expr, $help:literal) => {
        Key { name: $name, kind: $kind, default: || $default, help: $help }
    };
}

static SCHEMA: &[Key] = &[
    key!("master_seed", Kind::Int, Value::Int(2024), "seed every random stream derives from"),
    key!("output", Kind::Str, Value::Str("stochmls-out".into()), "output directory"),
    key!("geometry.domain", Kind::Choice(DOMAINS), Value::Str("cube".into()), "sampling domain"),
    key!("geometry.dim", Kind::Int, Value::Int(1), "domain dimension"),
    key!("geometry.radius", Kind::Float, Value::Float(1.0), "ball radius"),
    key!("geometry.resolution", Kind::Int, Value::Int(64), "minimum fill-distance grid points per axis"),
    key!(
        "geometry.resolution_factor",
        Kind::Float,
        Value::Float(0.0),
        "fill grid points per axis per n^(1/d); 0 picks 32 for d=1 and 6 otherwise"
    ),
    key!("sampling.source", Kind::Choice(SOURCES), Value::Str("domain".into()), "what `sample` draws from"),
    key!("sampling.n", Kind::Int, Value::Int(1000), "sample size"),
    key!("sampling.density", Kind::Choice(DENSITIES), Value::Str("uniform".into()), "sampling density"),
    key!("sampling.amplitude", Kind::Float, Value::Float(0.5), "ripple amplitude"),
    key!("sampling.c_lower", Kind::Float, Value::Float(0.5), "lower density ratio bound"),
    key!("sampling.c_upper", Kind::Float, Value::Float(1.5), "upper density ratio bound"),
    key!("mls.degree", Kind::Int, Value::Int(2), "local polynomial degree"),
    key!("mls.weight.profile", Kind::Choice(PROFILES), Value::Str("smooth-bump".into()), "weight profile"),
    key!("mls.weight.support_scale", Kind::Float, Value::Float(1.0), "support radius in units of h"),
    key!("mls.bandwidth", Kind::Choice(BANDWIDTHS), Value::Str("rate".into()), "bandwidth rule"),
    key!("mls.c_d", Kind::Float, Value::Float(1.5), "constant of the rate rule h = c_d (ln n / n)^(1/d)"),
    key!("mls.h", Kind::Float, Value::Float(0.1), "fixed bandwidth"),
    key!("mls.normalization", Kind::Choice(NORMALIZATIONS), Value::Str("per-count".into()), "Gram scaling"),
    key!("mls.ridge", Kind::Float, Value::Float(0.0), "ridge added below the floor"),
    key!("mls.lambda_floor", Kind::Float, Value::Float(1e-10), "smallest accepted Gram eigenvalue"),
    key!("lab.target", Kind::Choice(TARGETS), Value::Str("fill".into()), "statistic measured by `rates`"),
    key!("lab.n_grid", Kind::IntList, Value::IntList((7..=14).map(|k| 1i64 << k).collect()), "increasing sample sizes"),
    key!("lab.trials", Kind::Int, Value::Int(20), "trials per sample size"),
    key!(
        "lab.probe_resolution",
        Kind::Int,
        Value::Int(0),
        "interior probes per axis; 0 picks 50 for d=1 and 7 otherwise"
    ),
    key!("lab.boundary_probes", Kind::Bool, Value::Bool(true), "also probe the boundary"),
    key!("lab.max_failure_fraction", Kind::Float, Value::Float(0.01), "allowed share of failed local fits"),
    key!("lab.frequency", Kind::Float, Value::Float(1.0), "frequency k of the test function prod sin(2 pi k x_j)"),
    key!("lab.operator", Kind::Str, Value::Str("identity".into()), "identity, laplacian or partial:<axis>"),
    key!("lab.plot", Kind::Bool, Value::Bool(true), "write plot.svg next to summary.csv"),
    key!("lab.smoothness.max_order", Kind::Int, Value::Int(2), "derivative orders probed"),
    key!("lab.smoothness.grid_step", Kind::Float, Value::Float(1e-4), "probe grid step"),
    key!("lab.smoothness.length", Kind::Float, Value::Float(0.5), "probe segment length"),
    key!("fit.data", Kind::Str, Value::Str(String::new()), "CSV with x0.. columns and a value column"),
    key!("fit.values", Kind::Str, Value::Str("f".into()), "name of the value column"),
    key!("fit.probes", Kind::Str, Value::Str(String::new()), "CSV of evaluation points; empty uses the data points"),
    key!("eval.operator", Kind::Str, Value::Str("identity".into()), "identity, laplacian or partial:<axis>"),
    key!("mmls.manifold", Kind::Choice(MANIFOLDS), Value::Str("circle".into()), "reference manifold"),
    key!("mmls.radius", Kind::Float, Value::Float(1.0), "circle or sphere radius"),
    key!("mmls.intrinsic_dim", Kind::Int, Value::Int(1), "graph manifold dimension"),
    key!("mmls.ambient_dim", Kind::Int, Value::Int(2), "graph manifold ambient dimension"),
    key!("mmls.amplitude", Kind::Float, Value::Float(0.1), "graph height amplitude"),
    key!("mmls.n", Kind::Int, Value::Int(1024), "manifold sample size"),
    key!("mmls.probes", Kind::Int, Value::Int(0), "probes on the manifold; 0 projects the samples themselves"),
    key!("mmls.degree", Kind::Int, Value::Int(2), "local polynomial degree"),
    key!("mmls.c_d", Kind::Float, Value::Float(6.0), "bandwidth constant, h = c_d (ln n / n)^(1/d)"),
    key!("mmls.mu_factor", Kind::Float, Value::Float(3.0), "mu = mu_factor h"),
    key!("mmls.tolerance", Kind::Float, Value::Float(1e-10), "frame iteration tolerance in units of h"),
    key!("mmls.max_iterations", Kind::Int, Value::Int(100), "frame iteration cap"),
    key!("mmls.max_failure_fraction", Kind::Float, Value::Float(0.01), "allowed share of failed projections"),
    key!("report.input", Kind::Str, Value::Str(String::new()), "directory holding a summary.csv"),
];

fn schema_key(name: &str) -> Result<&'static Key, CliError> {
    SCHEMA.iter().find(|k| k.name == name).ok_or_else(|| CliError::Config(format!("unknown key `{name}`")))
}

fn type_error(key: &Key, got: &str) -> CliError {
    let want = match key.kind {
        Kind::Int => "an integer".to_string(),
        Kind::Float => "a number".to_string(),
        Kind::Bool => "true or false".to_string(),
        Kind::Str => "a string".to_string(),
        Kind::Choice(c) => format!("one of {}", c.join(", ")),
        Kind::IntList => "a list of integers".to_string(),
    };
    CliError::Config(format!("key `{}` expects {want}, got {got}", key.name))
}

fn check_choice(key: &Key, s: &str) -> Result<(), CliError> {
    match key.kind {
        Kind::Choice(c) if !c.contains(&s) => Err(type_error(key, &format!("{s:?}"))),
        _ => Ok(()),
    }
}

/// Parses a command-line or environment string for `key`.
fn parse_text(key: &Key, raw: &str) -> Result<Value, CliError> {
    let s = raw.trim();
    let bad = || type_error(key, &format!("{raw:?}"));
    Ok(match key.kind {
        Kind::Int => Value::Int(s.parse().map_err(|_| bad())?),
        Kind::Float => Value::Float(s.parse().map_err(|_| bad())?),
        Kind::Bool => Value::Bool(s.parse().map_err(|_| bad())?),
        Kind::Str | Kind::Choice(_) => {
            check_choice(key, s)?;
            Value::Str(s.to_string())
        }
        Kind::IntList => {
            let inner = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')).unwrap_or(s);
            let items = inner
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<i64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            Value::IntList(items)
        }
    })
}

fn from_toml(key: &Key, v: &toml::Value) -> Result<Value, CliError> {
    let bad = || type_error(key, &v.to_string());
    Ok(match (key.kind, v) {
        (Kind::Int, toml::Value::Integer(i)) => Value::Int(*i),
        (Kind::Float, toml::Value::Float(x)) => Value::Float(*x),
        (Kind::Float, toml::Value::Integer(i)) => Value::Float(*i as f64),
        (Kind::Bool, toml::Value::Boolean(b)) => Value::Bool(*b),
        (Kind::Str | Kind::Choice(_), toml::Value::String(s)) => {
            check_choice(key, s)?;
            Value::Str(s.clone())
        }
        (Kind::IntList, toml::Value::Array(a)) => {
            Value::IntList(a.iter().map(|x| x.as_integer().ok_or_else(bad)).collect::<Result<_, _>>()?)
        }
        _ => return Err(bad()),
    })
}

fn from_json(key: &Key, v: &serde_json::Value) -> Result<Value, CliError> {
    let bad = || type_error(key, &v.to_string());
    Ok(match key.kind {
        Kind::Int => Value::Int(v.as_i64().ok_or_else(bad)?),
        Kind::Float => Value::Float(v.as_f64().ok_or_else(bad)?),
        Kind::Bool => Value::Bool(v.as_bool().ok_or_else(bad)?),
        Kind::Str | Kind::Choice(_) => {
            let s = v.as_str().ok_or_else(bad)?;
            check_choice(key, s)?;
            Value::Str(s.to_string())
        }
        Kind::IntList => Value::IntList(
            v.as_array().ok_or_else(bad)?.iter().map(|x| x.as_i64().ok_or_else(bad)).collect::<Result<_, _>>()?,
        ),
    })
}

/// Flattens nested TOML tables into dotted keys.
fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (k, v) in table {
        let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&name, t, out),
            other => out.push((name, other.clone())),
        }
    }
}

/// The fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { values: SCHEMA.iter().map(|k| (k.name, (k.default)())).collect() }
    }
}

impl RunConfig {
    pub fn set(&mut self, name: &str, raw: &str) -> Result<(), CliError> {
        let key = schema_key(name)?;
        self.values.insert(key.name, parse_text(key, raw)?);
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<(), CliError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{pair}` is not of the form key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn merge_toml(&mut self, text: &str) -> Result<(), CliError> {
        let table: toml::Table = text.parse().map_err(|e| CliError::Config(format!("config file: {e}")))?;
        let mut flat = Vec::new();
        flatten("", &table, &mut flat);
        for (name, v) in flat {
            let key = schema_key(&name)?;
            self.values.insert(key.name, from_toml(key, &v)?);
        }
        Ok(())
    }

    /// Takes the `config` object of a run manifest.
    pub fn merge_manifest(&mut self, text: &str) -> Result<(), CliError> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
        let obj = doc
            .get("config")
            .and_then(|c| c.as_object())
            .ok_or_else(|| CliError::Config("manifest has no `config` object".into()))?;
        for (name, v) in obj {
            let key = schema_key(name)?;
            self.values.insert(key.name, from_json(key, v)?);
        }
        Ok(())
    }

    pub fn merge_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            self.merge_manifest(&text)
        } else {
            self.merge_toml(&text)
        }
    }

    /// Applies `STOCHMLS_*` variables from `vars`.
    pub fn merge_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<(), CliError> {
        let mut found: Vec<(String, String, String)> = vars
            .into_iter()
            .filter_map(|(k, v)| {
                let rest = k.strip_prefix(ENV_PREFIX)?;
                Some((rest.to_lowercase().replace("__", "."), k, v))
            })
            .collect();
        found.sort();
        for (name, var, v) in found {
            self.set(&name, &v)
                .map_err(|e| CliError::Config(format!("environment variable {var}: {}", e.message())))?;
        }
        Ok(())
    }

    fn get(&self, name: &str) -> &Value {
        self.values.get(name).unwrap_or_else(|| panic!("`{name}` is not a schema key"))
    }

    pub fn int(&self, name: &str) -> i64 {
        match self.get(name) {
            Value::Int(v) => *v,
            other => panic!("`{name}` holds {other}, not an integer"),
        }
    }

    /// A nonnegative integer key as usize.
    pub fn count(&self, name: &str) -> Result<usize, CliError> {
        usize::try_from(self.int(name)).map_err(|_| CliError::Config(format!("key `{name}` must be nonnegative")))
    }

    pub fn float(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Float(v) => *v,
            other => panic!("`{name}` holds {other}, not a number"),
        }
    }

    pub fn flag(&self, name: &str) -> bool {
        match self.get(name) {
            Value::Bool(v) => *v,
            other => panic!("`{name}` holds {other}, not a bool"),
        }
    }

    pub fn str(&self, name: &str) -> &str {
        match self.get(name) {
            Value::Str(s) => s,
            other => panic!("`{name}` holds {other}, not a string"),
        }
    }

    pub fn counts(&self, name: &str) -> Result<Vec<usize>, CliError> {
        match self.get(name) {
            Value::IntList(v) => v
                .iter()
                .map(|&x| usize::try_from(x).map_err(|_| CliError::Config(format!("key `{name}` must be nonnegative"))))
                .collect(),
            other => panic!("`{name}` holds {other}, not a list"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.int("master_seed") as u64
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(self.values.iter().map(|(k, v)| (k.to_string(), v.to_json())).collect())
    }

    /// The resolved config as flat TOML, one `key = value` per line.
    pub fn to_toml(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `key  default  help` for every schema key.
pub fn describe_schema() -> String {
    SCHEMA.iter().map(|k| format!("{:<28} {:<22} {}\n", k.name, (k.default)().to_string(), k.help)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_the_schema() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.int("mls.degree"), 2);
        assert_eq!(cfg.counts("lab.n_grid").unwrap().len(), 8);
        assert_eq!(cfg.str("mls.weight.profile"), "smooth-bump");
    }

    #[test]
    fn nested_and_dotted_toml_agree() {
        let mut a = RunConfig::default();
        a.merge_toml("[mls]\ndegree = 3\nweight.profile = \"indicator\"\n").unwrap();
        let mut b = RunConfig::default();
        b.merge_toml("mls.degree = 3\nmls.weight.profile = \"indicator\"\n").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_keys_name_the_key() {
        let err = RunConfig::default().merge_toml("[mls]\ndegre = 3\n").unwrap_err();
        assert!(err.message().contains("mls.degre"));
        let err = RunConfig::default().set_pair("lab.trails=3").unwrap_err();
        assert!(err.message().contains("lab.trails"));
    }

    #[test]
    fn type_and_choice_errors() {
        let mut cfg = RunConfig::default();
        assert!(cfg.merge_toml("mls.degree = \"two\"").is_err());
        assert!(cfg.set("mls.weight.profile", "gaussian").is_err());
        assert!(cfg.set("lab.n_grid", "1,x").is_err());
        cfg.set("lab.n_grid", "[128, 256]").unwrap();
        assert_eq!(cfg.counts("lab.n_grid").unwrap(), vec![128, 256]);
        cfg.merge_toml("mls.c_d = 2").unwrap();
        assert_eq!(cfg.float("mls.c_d"), 2.0);
    }

    #[test]
    fn env_overrides() {
        let mut cfg = RunConfig::default();
        let vars = vec![("STOCHMLS_MLS__DEGREE".to_string(), "1".to_string()), ("HOME".into(), "/x".into())];
        cfg.merge_env(vars).unwrap();
        assert_eq!(cfg.int("mls.degree"), 1);
        let err = cfg.merge_env(vec![("STOCHMLS_MLS__DEGRE".to_string(), "1".to_string())]).unwrap_err();
        assert!(err.message().contains("mls.degre"));
    }

    #[test]
    fn json_and_toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.set("mls.h", "0.125").unwrap();
        cfg.set("output", "a \"quoted\" dir").unwrap();
        let manifest = serde_json::json!({ "config": cfg.to_json() }).to_string();
        let mut back = RunConfig::default();
        back.merge_manifest(&manifest).unwrap();
        assert_eq!(back, cfg);
        let mut again = RunConfig::default();
        again.merge_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
    }
}
