use crate::error::{Error, Result};

/// Zero-based cluster or class assignments for `N` samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
}

impl LabelVector {
    /// Labels drawn from `0..k`. Classes may be empty (predictions).
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidLabels(format!("label {bad} outside 0..{k}")));
        }
        Ok(LabelVector { labels, k })
    }

    /// Ground-truth labels: `k` is inferred and every class in `0..k` must be used.
    pub fn from_truth(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; k];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLabels(format!("class {missing} has no samples")));
        }
        Ok(LabelVector { labels, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.labels
    }
}

impl AsRef<[usize]> for LabelVector {
    fn as_ref(&self) -> &[usize] {
        &self.labels
    }
}
