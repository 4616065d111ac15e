//! Run configuration: a flat `key = value` file with dotted sections,
//! overridden key by key from the command line.

use std::collections::BTreeMap;
use std::path::Path;

use toml::Value;

use crate::error::CliError;

/// Every key the configuration understands, with a one-line description.
pub const KNOWN_KEYS: &[(&str, &str)] = &[
    ("model.d", "lattice dimension"),
    ("model.kappa", "reactant diffusion constant"),
    ("model.rho", "catalyst jump rate"),
    ("model.gamma", "coupling constant"),
    ("model.p", "moment order"),
    ("grid.t", "list of times"),
    ("grid.lambda", "list of Laplace variables"),
    ("grid.a", "list of ratios kappa / rho"),
    ("site.x", "lattice site, one integer per coordinate"),
    ("kernel.kind", "transition | resolvent | green"),
    ("trap.regime", "decay_d1 | decay_d2 | limit_transient | limit_homog_d1 | limit_homog_high_d"),
    ("mc.kind", "localized | homogeneous | catalyst"),
    ("mc.n", "number of replicas"),
    ("evolve.kind", "localized | homogeneous | catalyst | field"),
    ("spectrum.route", "power | root | duality"),
    ("box.radius", "half side of the truncation box"),
    ("accuracy.tol", "target tolerance"),
    ("accuracy.maxiter", "iteration cap of the power method"),
    ("accuracy.quadrature_nodes", "initial Fourier nodes per axis"),
    ("accuracy.series_cutoff", "Bessel series cutoff"),
    ("run.seed", "random seed"),
    ("verify.suite", "all, or a comma list of criterion ids"),
    ("output.format", "csv | json | bin"),
    ("output.path", "output file (stdout when absent)"),
];

fn is_known(key: &str) -> bool {
    KNOWN_KEYS.iter().any(|(k, _)| *k == key)
}

/// Resolved key-value pairs, sorted by key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, Value>,
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) -> Result<(), CliError> {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out)?,
            _ => {
                if !is_known(&key) {
                    return Err(CliError::Usage(format!("unknown configuration key '{key}'")));
                }
                out.insert(key, v.clone());
            }
        }
    }
    Ok(())
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: toml::Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("bad configuration file: {e}")))?;
        let mut values = BTreeMap::new();
        flatten("", &table, &mut values)?;
        Ok(Self { values })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Command-line values win over the file.
    pub fn set(&mut self, key: &str, value: Value) {
        debug_assert!(is_known(key), "{key}");
        self.values.insert(key.to_string(), value);
    }
}

fn type_err(key: &str, want: &str, v: &Value) -> CliError {
    CliError::Usage(format!("'{key}' must be {want}, got {v}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_err(key, "a number", v)),
    }
}

/// Reads typed values and records what was used (defaults included), so the
/// resolved configuration can be echoed into the output.
pub struct Resolver<'a> {
    settings: &'a Settings,
    pub used: BTreeMap<String, Value>,
}

impl<'a> Resolver<'a> {
    pub fn new(settings: &'a Settings) -> Self {
        Self {
            settings,
            used: BTreeMap::new(),
        }
    }

    fn raw(&mut self, key: &str, default: Option<Value>) -> Result<Option<Value>, CliError> {
        debug_assert!(is_known(key), "{key}");
        let v = self.settings.values.get(key).cloned().or(default);
        if let Some(v) = &v {
            self.used.insert(key.to_string(), v.clone());
        }
        Ok(v)
    }

    fn required(&mut self, key: &str, default: Option<Value>) -> Result<Value, CliError> {
        self.raw(key, default)?
            .ok_or_else(|| CliError::Usage(format!("missing required setting '{key}'")))
    }

    pub fn f64(&mut self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = self.required(key, default.map(Value::Float))?;
        as_f64(key, &v)
    }

    pub fn usize(&mut self, key: &str, default: Option<usize>) -> Result<usize, CliError> {
        let v = self.required(key, default.map(|d| Value::Integer(d as i64)))?;
        match v {
            Value::Integer(i) if i >= 0 => Ok(i as usize),
            _ => Err(type_err(key, "a nonnegative integer", &v)),
        }
    }

    pub fn u64_opt(&mut self, key: &str) -> Result<Option<u64>, CliError> {
        match self.raw(key, None)? {
            None => Ok(None),
            Some(Value::Integer(i)) if i >= 0 => Ok(Some(i as u64)),
            Some(v) => Err(type_err(key, "a nonnegative integer", &v)),
        }
    }

    pub fn string(&mut self, key: &str, default: Option<&str>) -> Result<String, CliError> {
        let v = self.required(key, default.map(|s| Value::String(s.into())))?;
        match v {
            Value::String(s) => Ok(s),
            _ => Err(type_err(key, "a string", &v)),
        }
    }

    pub fn string_opt(&mut self, key: &str) -> Result<Option<String>, CliError> {
        match self.raw(key, None)? {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(type_err(key, "a string", &v)),
        }
    }

    /// A list of numbers; a single number counts as a one-element list.
    pub fn f64_list(&mut self, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
        let v = self.required(key, default.map(|d| Value::Array(d.into_iter().map(Value::Float).collect())))?;
        match &v {
            Value::Array(items) => items.iter().map(|x| as_f64(key, x)).collect(),
            _ => Ok(vec![as_f64(key, &v)?]),
        }
    }

    pub fn i64_list(&mut self, key: &str, default: Option<Vec<i64>>) -> Result<Vec<i64>, CliError> {
        let v = self.required(key, default.map(|d| Value::Array(d.into_iter().map(Value::Integer).collect())))?;
        let one = |x: &Value| match x {
            Value::Integer(i) => Ok(*i),
            _ => Err(type_err(key, "a list of integers", &v)),
        };
        match &v {
            Value::Array(items) => items.iter().map(one).collect(),
            _ => Ok(vec![one(&v)?]),
        }
    }
}

/// `key = value` lines of the resolved configuration.
pub fn echo_lines(used: &BTreeMap<String, Value>) -> Vec<String> {
    used.iter().map(|(k, v)| format!("{k} = {v}")).collect()
}

/// The resolved configuration as a JSON object in key order.
pub fn echo_json(used: &BTreeMap<String, Value>) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in used {
        map.insert(k.clone(), serde_json::to_value(v).expect("toml values serialize"));
    }
    serde_json::Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_dotted_keys_flatten() {
        let s = Settings::parse("model.d = 2\nmodel.kappa = 0.5\n[grid]\nt = [1, 2.5]\n").unwrap();
        let mut r = Resolver::new(&s);
        assert_eq!(r.usize("model.d", None).unwrap(), 2);
        assert_eq!(r.f64("model.kappa", None).unwrap(), 0.5);
        assert_eq!(r.f64_list("grid.t", None).unwrap(), vec![1.0, 2.5]);
        assert_eq!(r.f64("model.rho", Some(1.0)).unwrap(), 1.0);
        assert_eq!(echo_lines(&r.used)[0], "grid.t = [1, 2.5]");
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        assert!(matches!(Settings::parse("model.dd = 1"), Err(CliError::Usage(_))));
        assert!(matches!(Settings::parse("[spam]\nx = 1"), Err(CliError::Usage(_))));
        let s = Settings::parse("model.d = \"two\"").unwrap();
        assert!(Resolver::new(&s).usize("model.d", None).is_err());
        let s = Settings::parse("").unwrap();
        assert!(Resolver::new(&s).f64("model.gamma", None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let mut s = Settings::parse("model.gamma = -1").unwrap();
        s.set("model.gamma", Value::Float(3.0));
        assert_eq!(Resolver::new(&s).f64("model.gamma", None).unwrap(), 3.0);
    }
}
