use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Named parameter values, serialized as `name=value` pairs separated by
/// `;` (or newlines). Values print with shortest round-trip formatting.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamMap(BTreeMap<String, f64>);

impl ParamMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.0.insert(name.into(), value);
        self
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.insert(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Result<f64> {
        self.0.get(name).copied().ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    /// A parameter that must lie in [0, 1].
    pub fn get_unit(&self, name: &str) -> Result<f64> {
        let v = self.get(name)?;
        if (0.0..=1.0).contains(&v) {
            Ok(v)
        } else {
            Err(Error::ParameterOutOfRange { name: name.to_string(), value: v })
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(s: &str) -> Result<Self> {
        s.split([';', '\n'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                let (k, v) = t
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("`{t}` is not name=value")))?;
                let v: f64 =
                    v.trim().parse().map_err(|_| Error::Parse(format!("bad value in `{t}`")))?;
                Ok((k.trim().to_string(), v))
            })
            .collect()
    }
}

impl fmt::Display for ParamMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromIterator<(String, f64)> for ParamMap {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl std::str::FromStr for ParamMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_text(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let p = ParamMap::new().with("alpha_0?", 0.1 + 0.2).with("beta", 1.0 / 3.0);
        let s = p.to_text();
        assert_eq!(s, "alpha_0?=0.30000000000000004;beta=0.3333333333333333");
        assert_eq!(ParamMap::from_text(&s).unwrap(), p);
        assert_eq!(ParamMap::from_text("a = 0.5\nb=0.25\n").unwrap().get("b").unwrap(), 0.25);
        assert!(ParamMap::from_text("a0.5").is_err());
    }
}
