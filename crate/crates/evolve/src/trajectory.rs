use std::fmt::Write as _;

use crate::{EvolveError, Result};

/// Sampled functionals of `e^{-tL}h₀`, one column per functional.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() || times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(EvolveError::Invalid("times must be finite and strictly increasing".into()));
        }
        Ok(Trajectory { times, columns: Vec::new() })
    }

    /// Adds or replaces a column.
    pub fn insert(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(EvolveError::Invalid(format!(
                "`{name}` has {} samples for {} times",
                values.len(),
                self.times.len()
            )));
        }
        match self.columns.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = values,
            None => self.columns.push((name.to_string(), values)),
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn require(&self, name: &str) -> Result<&[f64]> {
        self.get(name).ok_or_else(|| EvolveError::Missing(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest increase `max(0, v_{i+1} − v_i)` of a column.
    pub fn max_increase(&self, name: &str) -> Result<f64> {
        let v = self.require(name)?;
        Ok(v.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max))
    }

    /// Header `t,<names>`, then one row per time; values in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t");
        for (n, _) in &self.columns {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            let _ = write!(s, "{t:e}");
            for (_, v) in &self.columns {
                let _ = write!(s, ",{:e}", v[i]);
            }
            s.push('\n');
        }
        s
    }
}
