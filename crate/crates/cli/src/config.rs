use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::{CliError, Result};

/// Experiment family selected by the `mode` key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Certify,
    Decay,
    Regularize,
    Entropy,
    Oseen,
    Vfp,
    Tensor,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Certify => "certify",
            Mode::Decay => "decay",
            Mode::Regularize => "regularize",
            Mode::Entropy => "entropy",
            Mode::Oseen => "oseen",
            Mode::Vfp => "vfp",
            Mode::Tensor => "tensor",
        }
    }
}

/// A flat JSON object with dotted keys. Every getter marks its key as read, and
/// [`Config::finish`] rejects keys that no getter asked for.
#[derive(Debug)]
pub struct Config {
    values: BTreeMap<String, Value>,
    read: RefCell<BTreeSet<String>>,
    /// Directory that relative paths inside the config resolve against.
    pub base_dir: PathBuf,
}

impl Clone for Config {
    fn clone(&self) -> Self {
        Config { values: self.values.clone(), read: RefCell::new(BTreeSet::new()), base_dir: self.base_dir.clone() }
    }
}

fn field(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: key.to_string(), message: message.into() }
}

impl Config {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| field("<document>", format!("not valid JSON: {e}")))?;
        let Value::Object(map) = doc else {
            return Err(field("<document>", "expected a JSON object"));
        };
        let mut values = BTreeMap::new();
        for (k, v) in map {
            if v.is_object() {
                return Err(field(&k, "nested objects are not allowed; use dotted keys"));
            }
            values.insert(k, v);
        }
        Ok(Config { values, read: RefCell::new(BTreeSet::new()), base_dir: base_dir.to_path_buf() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.values
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.values.insert(key.to_string(), value);
    }

    pub fn remove_prefix(&mut self, prefix: &str) -> BTreeMap<String, Value> {
        let keys: Vec<String> = self.values.keys().filter(|k| k.starts_with(prefix)).cloned().collect();
        keys.into_iter().map(|k| { let v = self.values.remove(&k).unwrap(); (k, v) }).collect()
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.read.borrow_mut().insert(key.to_string());
        self.values.get(key)
    }

    fn missing(key: &str) -> CliError {
        field(key, "missing required field")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.raw(key).ok_or_else(|| Self::missing(key))?;
        let x = v.as_f64().ok_or_else(|| field(key, format!("expected a number, got {v}")))?;
        if !x.is_finite() {
            return Err(field(key, "must be finite"));
        }
        Ok(x)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.has(key) {
            self.f64(key)
        } else {
            self.raw(key);
            Ok(default)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key).ok_or_else(|| Self::missing(key))?;
        v.as_u64().map(|x| x as usize).ok_or_else(|| field(key, format!("expected a nonnegative integer, got {v}")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        if self.has(key) {
            self.usize(key)
        } else {
            self.raw(key);
            Ok(default)
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        if self.has(key) {
            let v = self.raw(key).unwrap();
            v.as_u64().ok_or_else(|| field(key, format!("expected a nonnegative integer, got {v}")))
        } else {
            self.raw(key);
            Ok(default)
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.as_bool().ok_or_else(|| field(key, format!("expected true or false, got {v}"))),
        }
    }

    pub fn string(&self, key: &str) -> Result<String> {
        let v = self.raw(key).ok_or_else(|| Self::missing(key))?;
        v.as_str().map(str::to_string).ok_or_else(|| field(key, format!("expected a string, got {v}")))
    }

    pub fn string_or(&self, key: &str, default: &str) -> Result<String> {
        if self.has(key) {
            self.string(key)
        } else {
            self.raw(key);
            Ok(default.to_string())
        }
    }

    /// A string restricted to `choices`.
    pub fn choice(&self, key: &str, default: Option<&str>, choices: &[&str]) -> Result<String> {
        let s = match default {
            Some(d) => self.string_or(key, d)?,
            None => self.string(key)?,
        };
        if choices.contains(&s.as_str()) {
            Ok(s)
        } else {
            Err(field(key, format!("`{s}` is not one of {}", choices.join(", "))))
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let v = self.raw(key).ok_or_else(|| Self::missing(key))?;
        let arr = v.as_array().ok_or_else(|| field(key, format!("expected an array of numbers, got {v}")))?;
        if arr.is_empty() {
            return Err(field(key, "list must not be empty"));
        }
        arr.iter()
            .map(|x| x.as_f64().filter(|y| y.is_finite()).ok_or_else(|| field(key, format!("entry {x} is not a finite number"))))
            .collect()
    }

    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        if self.has(key) {
            self.f64_list(key)
        } else {
            self.raw(key);
            Ok(default.to_vec())
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        if !self.has(key) {
            self.raw(key);
            return Ok(default.to_vec());
        }
        let v = self.raw(key).unwrap();
        let arr = v.as_array().filter(|a| !a.is_empty()).ok_or_else(|| field(key, format!("expected a nonempty array of integers, got {v}")))?;
        arr.iter()
            .map(|x| x.as_u64().map(|y| y as usize).ok_or_else(|| field(key, format!("entry {x} is not a nonnegative integer"))))
            .collect()
    }

    pub fn path(&self, key: &str) -> Result<PathBuf> {
        let p = PathBuf::from(self.string(key)?);
        Ok(if p.is_absolute() { p } else { self.base_dir.join(p) })
    }

    pub fn mode(&self) -> Result<Mode> {
        let m = self.choice("mode", None, &["certify", "decay", "regularize", "entropy", "oseen", "vfp", "tensor"])?;
        Ok(match m.as_str() {
            "certify" => Mode::Certify,
            "decay" => Mode::Decay,
            "regularize" => Mode::Regularize,
            "entropy" => Mode::Entropy,
            "oseen" => Mode::Oseen,
            "vfp" => Mode::Vfp,
            _ => Mode::Tensor,
        })
    }

    /// Errors on the first key (in sorted order) that no getter read.
    pub fn finish(&self) -> Result<()> {
        let read = self.read.borrow();
        match self.values.keys().find(|k| !read.contains(*k)) {
            Some(k) => Err(field(k, "unknown key for this mode")),
            None => Ok(()),
        }
    }
}

/// Checks `lo < x ≤ hi`-style preconditions with a field-named error.
pub fn require(key: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(field(key, message))
    }
}
