//! Harmonic index sets and the signature / right-hand-side coefficient
//! vectors attached to them.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Largest harmonic index accepted anywhere (sanity bound).
pub const MAX_HARMONIC: usize = 64;

/// A non-empty sorted set of distinct harmonic indices `{k_1 < ... < k_m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicSet {
    indices: Vec<usize>,
}

impl HarmonicSet {
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.is_empty() {
            return Err(Error::InvalidHarmonics("harmonic set is empty".into()));
        }
        if indices[0] == 0 {
            return Err(Error::InvalidHarmonics("harmonic indices start at 1".into()));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidHarmonics("duplicate harmonic index".into()));
        }
        if *indices.last().unwrap() > MAX_HARMONIC {
            return Err(Error::InvalidHarmonics(format!(
                "harmonic index exceeds the sanity bound {MAX_HARMONIC}"
            )));
        }
        Ok(HarmonicSet { indices })
    }

    pub fn single(k: usize) -> Result<Self> {
        Self::new(vec![k])
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k: usize) -> bool {
        self.indices.binary_search(&k).is_ok()
    }

    pub fn min_index(&self) -> usize {
        self.indices[0]
    }

    pub fn max_index(&self) -> usize {
        *self.indices.last().unwrap()
    }

    /// Whether the set is a contiguous range `{i, i+1, ..., n}`.
    pub fn is_contiguous(&self) -> bool {
        self.max_index() - self.min_index() + 1 == self.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }
}

/// Map `k -> value` whose keys form a harmonic set; shared representation
/// for prescribed projections and computed right-hand-side coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicVector {
    entries: BTreeMap<usize, f64>,
}

impl HarmonicVector {
    fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, v) in pairs {
            if k == 0 || k > MAX_HARMONIC {
                return Err(Error::InvalidHarmonics(format!(
                    "harmonic index {k} out of range 1..={MAX_HARMONIC}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("value for harmonic {k}"),
                });
            }
            if entries.insert(k, v).is_some() {
                return Err(Error::InvalidHarmonics(format!(
                    "duplicate harmonic index {k}"
                )));
            }
        }
        Ok(HarmonicVector { entries })
    }

    fn empty() -> Self {
        HarmonicVector {
            entries: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.entries.get(&k).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn harmonics(&self) -> Result<HarmonicSet> {
        HarmonicSet::new(self.entries.keys().copied().collect())
    }

    /// Whether the keys are exactly the given set.
    pub fn matches(&self, h: &HarmonicSet) -> bool {
        self.entries.len() == h.len() && h.iter().all(|k| self.entries.contains_key(&k))
    }

    /// Values in increasing harmonic order.
    pub fn values_in_order(&self) -> Vec<f64> {
        self.entries.values().copied().collect()
    }

    fn with_component(&self, k: usize, value: f64) -> Self {
        let mut entries = self.entries.clone();
        entries.insert(k, value);
        HarmonicVector { entries }
    }
}

/// Prescribed projections `xi_k = integral of u phi_k dx` for `k` in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature(HarmonicVector);

/// Right-hand-side coefficients `mu_k` of `phi_k` for `k` in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct MuVector(HarmonicVector);

macro_rules! harmonic_vector_impl {
    ($name:ident) => {
        impl $name {
            pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
                Ok($name(HarmonicVector::from_pairs(pairs)?))
            }

            pub fn single(k: usize, value: f64) -> Result<Self> {
                Self::from_pairs([(k, value)])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn get(&self, k: usize) -> Option<f64> {
                self.0.get(k)
            }

            pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
                self.0.iter()
            }

            pub fn harmonics(&self) -> Result<HarmonicSet> {
                self.0.harmonics()
            }

            pub fn matches(&self, h: &HarmonicSet) -> bool {
                self.0.matches(h)
            }

            pub fn values_in_order(&self) -> Vec<f64> {
                self.0.values_in_order()
            }

            /// Copy with component `k` set to `value`.
            pub fn with_component(&self, k: usize, value: f64) -> Self {
                $name(self.0.with_component(k, value))
            }
        }
    };
}

harmonic_vector_impl!(Signature);
harmonic_vector_impl!(MuVector);

impl MuVector {
    /// No harmonics at all (plain forced IVP).
    pub fn empty() -> Self {
        MuVector(HarmonicVector::empty())
    }
}

impl Signature {
    /// Zero signature on the given set.
    pub fn zeros(h: &HarmonicSet) -> Self {
        Signature(HarmonicVector {
            entries: h.iter().map(|k| (k, 0.0)).collect(),
        })
    }

    /// Signature on `h` from values in increasing harmonic order.
    pub fn from_ordered_values(h: &HarmonicSet, values: &[f64]) -> Result<Self> {
        if values.len() != h.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} signature values, got {}",
                h.len(),
                values.len()
            )));
        }
        Self::from_pairs(h.iter().zip(values.iter().copied()))
    }
}
