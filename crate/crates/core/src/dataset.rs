use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One offline observation `(s_i, a_i, r_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub context: usize,
    pub arm: usize,
    pub reward: f64,
}

/// An offline dataset. `n` is the record count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    records: Vec<Record>,
}

impl Dataset {
    pub fn new(records: Vec<Record>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks every index against the instance dimensions.
    pub fn check_indices(&self, num_contexts: usize, num_arms: usize) -> Result<()> {
        for r in &self.records {
            if r.context >= num_contexts {
                return Err(Error::IndexOutOfRange { what: "context", index: r.context, bound: num_contexts });
            }
            if r.arm >= num_arms {
                return Err(Error::IndexOutOfRange { what: "arm", index: r.arm, bound: num_arms });
            }
        }
        Ok(())
    }
}

impl FromIterator<Record> for Dataset {
    fn from_iter<I: IntoIterator<Item = Record>>(iter: I) -> Self {
        Self { records: iter.into_iter().collect() }
    }
}
