use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{JetMap, MultiIndex};
use crate::error::{Error, Result};

/// Complex number as an `{"re", "im"}` object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex {
    fn from(c: Complex64) -> Self {
        Complex { re: c.re, im: c.im }
    }
}

impl From<Complex> for Complex64 {
    fn from(c: Complex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialJson {
    pub index: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub monomials: Vec<MonomialJson>,
}

/// Wire form of a [`JetMap`]; only non-zero coefficients are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetJson {
    pub dim: usize,
    pub degree: usize,
    pub components: Vec<ComponentJson>,
}

impl From<&JetMap> for JetJson {
    fn from(j: &JetMap) -> Self {
        let mut components: Vec<ComponentJson> = (0..j.dim())
            .map(|_| ComponentJson { monomials: vec![] })
            .collect();
        for (c, idx, v) in j.terms() {
            components[c].monomials.push(MonomialJson {
                index: idx.entries().to_vec(),
                re: v.re,
                im: v.im,
            });
        }
        JetJson {
            dim: j.dim(),
            degree: j.degree(),
            components,
        }
    }
}

impl TryFrom<&JetJson> for JetMap {
    type Error = Error;

    fn try_from(w: &JetJson) -> Result<JetMap> {
        if w.dim == 0 || w.degree == 0 {
            return Err(Error::Parse("jet needs dim >= 1 and degree >= 1".into()));
        }
        if w.components.len() != w.dim {
            return Err(Error::Parse(format!(
                "expected {} components, found {}",
                w.dim,
                w.components.len()
            )));
        }
        let mut j = JetMap::zero(w.dim, w.degree);
        for (c, comp) in w.components.iter().enumerate() {
            for m in &comp.monomials {
                if m.index.len() != w.dim {
                    return Err(Error::Parse(format!("index {:?} has wrong length", m.index)));
                }
                let idx = MultiIndex::new(m.index.clone());
                j.add_to(c, &idx, Complex64::new(m.re, m.im))
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
        }
        Ok(j)
    }
}

impl Serialize for JetMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        JetJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for JetMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = JetJson::deserialize(d)?;
        JetMap::try_from(&w).map_err(serde::de::Error::custom)
    }
}
