use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::AtomId;
use crate::num::splitmix64;

/// One stored object. An `Answer` holds a query's answer together with its derivation
/// content; an `Atom` holds a single intermediate fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "atom")]
pub enum StoredItem {
    Answer(AtomId),
    Atom(AtomId),
}

impl StoredItem {
    pub fn atom(self) -> AtomId {
        match self {
            StoredItem::Answer(a) | StoredItem::Atom(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capacity {
    Entries(usize),
    Bits(f64),
    Unbounded,
}

impl Capacity {
    fn admits(self, entries: usize, bits: f64) -> bool {
        match self {
            Capacity::Entries(n) => entries <= n,
            Capacity::Bits(b) => bits <= b + 1e-9 * b.max(1.0),
            Capacity::Unbounded => true,
        }
    }
}

/// Selected storage set `S` with bit accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoragePlan {
    entries: BTreeMap<StoredItem, f64>,
    capacity: Capacity,
    total_bits: f64,
}

impl StoragePlan {
    pub fn new(capacity: Capacity) -> Self {
        StoragePlan {
            entries: BTreeMap::new(),
            capacity,
            total_bits: 0.0,
        }
    }

    pub fn empty() -> Self {
        Self::new(Capacity::Unbounded)
    }

    pub fn capacity(&self) -> Capacity {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_bits(&self) -> f64 {
        self.total_bits
    }

    /// Whether `item` of size `bits` would still fit.
    pub fn fits(&self, item: StoredItem, bits: f64) -> bool {
        if self.entries.contains_key(&item) {
            return true;
        }
        self.capacity.admits(self.entries.len() + 1, self.total_bits + bits)
    }

    /// Adds `item`. Returns `false` if it was already present.
    pub fn insert(&mut self, item: StoredItem, bits: f64) -> Result<bool> {
        if !(bits.is_finite() && bits >= 0.0) {
            return Err(Error::invalid(format!("entry size {bits} bits")));
        }
        if self.entries.contains_key(&item) {
            return Ok(false);
        }
        if !self.fits(item, bits) {
            return Err(Error::invalid(format!(
                "{item:?} ({bits} bits) exceeds plan capacity {:?}",
                self.capacity
            )));
        }
        self.entries.insert(item, bits);
        self.total_bits += bits;
        Ok(true)
    }

    pub fn remove(&mut self, item: StoredItem) -> bool {
        match self.entries.remove(&item) {
            Some(bits) => {
                self.total_bits -= bits;
                if self.entries.is_empty() {
                    self.total_bits = 0.0;
                }
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, item: StoredItem) -> bool {
        self.entries.contains_key(&item)
    }

    /// The answer for `target` is stored.
    pub fn has_answer(&self, target: AtomId) -> bool {
        self.contains(StoredItem::Answer(target))
    }

    /// The fact `atom` is available from storage, either on its own or as a stored answer.
    pub fn covers_atom(&self, atom: AtomId) -> bool {
        self.contains(StoredItem::Atom(atom)) || self.contains(StoredItem::Answer(atom))
    }

    pub fn iter(&self) -> impl Iterator<Item = (StoredItem, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Order-independent content hash; equal entry sets give equal fingerprints.
    pub fn fingerprint(&self) -> u64 {
        self.entries.keys().fold(0x5157_4F52_4147_4550, |acc, item| {
            let (tag, atom) = match item {
                StoredItem::Answer(a) => (1u64, a.0),
                StoredItem::Atom(a) => (2u64, a.0),
            };
            splitmix64(acc ^ splitmix64((tag << 32) | u64::from(atom)))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_accounting_and_capacity() {
        let mut p = StoragePlan::new(Capacity::Entries(2));
        assert!(p.insert(StoredItem::Answer(AtomId(1)), 30.0).unwrap());
        assert!(!p.insert(StoredItem::Answer(AtomId(1)), 30.0).unwrap());
        assert!(p.insert(StoredItem::Atom(AtomId(2)), 10.0).unwrap());
        assert_eq!(p.total_bits(), 40.0);
        assert!(p.insert(StoredItem::Atom(AtomId(3)), 10.0).is_err());
        assert!(p.remove(StoredItem::Atom(AtomId(2))));
        assert_eq!(p.total_bits(), 30.0);
        assert!(p.covers_atom(AtomId(1)));
        assert!(p.has_answer(AtomId(1)));
        assert!(!p.has_answer(AtomId(2)));

        let mut b = StoragePlan::new(Capacity::Bits(25.0));
        assert!(b.insert(StoredItem::Atom(AtomId(0)), 20.0).is_ok());
        assert!(!b.fits(StoredItem::Atom(AtomId(1)), 10.0));
    }

    #[test]
    fn fingerprint_depends_on_contents_only() {
        let mut a = StoragePlan::empty();
        let mut b = StoragePlan::new(Capacity::Entries(5));
        a.insert(StoredItem::Atom(AtomId(1)), 1.0).unwrap();
        a.insert(StoredItem::Answer(AtomId(2)), 1.0).unwrap();
        b.insert(StoredItem::Answer(AtomId(2)), 1.0).unwrap();
        b.insert(StoredItem::Atom(AtomId(1)), 1.0).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        b.remove(StoredItem::Atom(AtomId(1)));
        assert_ne!(a.fingerprint(), b.fingerprint());
        let mut c = StoragePlan::empty();
        c.insert(StoredItem::Answer(AtomId(1)), 1.0).unwrap();
        c.insert(StoredItem::Answer(AtomId(2)), 1.0).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }
}
