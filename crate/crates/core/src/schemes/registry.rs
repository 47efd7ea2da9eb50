use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bb84_scheme, haar_scheme, uniform_haar_scheme, RankDistribution, SchemeRef};
use crate::error::{Error, Result};

/// One `(t, p)` entry of a rank distribution; serialized as `[[t0, t1, …], p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankWeight(pub Vec<usize>, pub f64);

/// JSON description of a scheme, e.g. `{"type": "uniform_haar", "M": 2, "L": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<RankWeight>>,
}

impl SchemeDescriptor {
    fn bare(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            messages: None,
            d: None,
            l: None,
            n: None,
            ranks: None,
        }
    }

    pub fn bb84(n: usize) -> Self {
        Self {
            n: Some(n),
            ..Self::bare("bb84")
        }
    }

    pub fn uniform_haar(messages: usize, l: usize) -> Self {
        Self {
            messages: Some(messages),
            l: Some(l),
            ..Self::bare("uniform_haar")
        }
    }

    pub fn haar(messages: usize, d: usize, ranks: Vec<RankWeight>) -> Self {
        Self {
            messages: Some(messages),
            d: Some(d),
            ranks: Some(ranks),
            ..Self::bare("haar")
        }
    }

    fn require(&self, field: &'static str, v: Option<usize>) -> Result<usize> {
        v.ok_or_else(|| Error::invalid(format!("scheme {:?} needs field {field}", self.kind)))
    }
}

pub type SchemeFactory = fn(&SchemeDescriptor) -> Result<SchemeRef>;

/// Name-keyed table of scheme constructors.
#[derive(Debug, Clone)]
pub struct SchemeRegistry {
    factories: BTreeMap<String, SchemeFactory>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("haar", build_haar);
        r.register("uniform_haar", build_uniform_haar);
        r.register("bb84", build_bb84);
        r
    }

    pub fn register(&mut self, name: &str, factory: SchemeFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }

    pub fn build(&self, desc: &SchemeDescriptor) -> Result<SchemeRef> {
        let factory = self
            .factories
            .get(&desc.kind)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "scheme",
                name: desc.kind.clone(),
            })?;
        factory(desc)
    }
}

fn build_haar(desc: &SchemeDescriptor) -> Result<SchemeRef> {
    let m = desc.require("M", desc.messages)?;
    let d = desc.require("d", desc.d)?;
    let tdist = match &desc.ranks {
        Some(ranks) => RankDistribution::new(
            ranks.iter().map(|w| w.0.clone()).collect(),
            ranks.iter().map(|w| w.1).collect(),
        )?,
        None if d % m == 0 => RankDistribution::deterministic(vec![d / m; m]),
        None => {
            return Err(Error::InvalidRanks(format!(
                "M = {m} does not divide d = {d}"
            )))
        }
    };
    Ok(Arc::new(haar_scheme(m, d, tdist)?))
}

fn build_uniform_haar(desc: &SchemeDescriptor) -> Result<SchemeRef> {
    let m = desc.require("M", desc.messages)?;
    let l = match (desc.l, desc.d) {
        (Some(l), _) => l,
        (None, Some(d)) if d % m == 0 => d / m,
        _ => return Err(Error::invalid("uniform_haar needs L (or d divisible by M)")),
    };
    Ok(Arc::new(uniform_haar_scheme(m, l)?))
}

fn build_bb84(desc: &SchemeDescriptor) -> Result<SchemeRef> {
    Ok(Arc::new(bb84_scheme(desc.require("n", desc.n)?)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_from_json() {
        let reg = SchemeRegistry::with_defaults();
        let d: SchemeDescriptor =
            serde_json::from_str(r#"{"type":"uniform_haar","M":2,"L":2}"#).unwrap();
        let e = reg.build(&d).unwrap();
        assert_eq!((e.message_count(), e.cipher_dim()), (2, 4));

        let d: SchemeDescriptor = serde_json::from_str(
            r#"{"type":"haar","M":3,"d":4,"ranks":[[[1,1,2],0.5],[[2,1,1],0.5]]}"#,
        )
        .unwrap();
        let e = reg.build(&d).unwrap();
        assert_eq!(e.cipher_dim(), 4);

        let e = reg.build(&SchemeDescriptor::bb84(2)).unwrap();
        assert_eq!(e.message_count(), 4);
    }

    #[test]
    fn descriptor_roundtrip() {
        let d = SchemeDescriptor::haar(2, 3, vec![RankWeight(vec![1, 2], 1.0)]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"type":"haar","M":2,"d":3,"ranks":[[[1,2],1.0]]}"#);
        assert_eq!(serde_json::from_str::<SchemeDescriptor>(&s).unwrap(), d);
    }

    #[test]
    fn unknown_and_incomplete() {
        let reg = SchemeRegistry::with_defaults();
        let mut d = SchemeDescriptor::bb84(1);
        d.kind = "otp".into();
        assert!(matches!(reg.build(&d), Err(Error::UnknownStrategy { .. })));
        let d = SchemeDescriptor {
            n: None,
            ..SchemeDescriptor::bb84(1)
        };
        assert!(reg.build(&d).is_err());
        assert_eq!(
            reg.names().collect::<Vec<_>>(),
            vec!["bb84", "haar", "uniform_haar"]
        );
    }
}
