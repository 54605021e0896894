//! Strictly increasing multi-indices and the sign rule for permuted access.

use crate::error::{LyhError, Result};
use serde::{Deserialize, Serialize};

/// Strictly increasing tuple of 0-based indices in `0..m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    m: usize,
    idx: Vec<usize>,
}

impl MultiIndex {
    pub fn new(m: usize, idx: Vec<usize>) -> Result<Self> {
        if idx.len() > m {
            return Err(LyhError::Dimension(format!(
                "length {} exceeds m = {m}",
                idx.len()
            )));
        }
        if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= m) {
            return Err(LyhError::Invariant(format!(
                "{idx:?} is not strictly increasing in 0..{m}"
            )));
        }
        Ok(Self { m, idx })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.idx
    }

    pub fn mask(&self) -> u32 {
        self.idx.iter().fold(0, |acc, &i| acc | (1 << i))
    }

    pub fn from_mask(m: usize, mask: u32) -> Self {
        Self {
            m,
            idx: (0..m).filter(|&i| mask & (1 << i) != 0).collect(),
        }
    }
}

/// Sorts `idx`, returning the sorted tuple and the permutation sign,
/// or `None` when an index repeats (the coefficient vanishes).
pub fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Sign of the permutation sorting an index list given as a bitmask-ordered
/// merge: number of pairs `(a in A, b in B)` with `a > b`.
#[inline]
pub fn merge_sign(a: u32, b: u32) -> i32 {
    let mut count = 0u32;
    let mut rest = b;
    while rest != 0 {
        let bit = rest.trailing_zeros();
        count += (a >> (bit + 1)).count_ones();
        rest &= rest - 1;
    }
    if count % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Lexicographic table of all `p`-subsets of `0..m`, with mask lookup.
#[derive(Clone, Debug)]
pub struct SubsetTable {
    m: usize,
    p: usize,
    masks: Vec<u32>,
    rank: Vec<u32>,
}

const NO_RANK: u32 = u32::MAX;

impl SubsetTable {
    pub fn new(m: usize, p: usize) -> Self {
        assert!(m <= 16, "subset table limited to m <= 16");
        let mut masks: Vec<u32> = (0u32..(1 << m))
            .filter(|s| s.count_ones() as usize == p)
            .collect();
        masks.sort_by_key(|&s| MultiIndex::from_mask(m, s).idx);
        let mut rank = vec![NO_RANK; 1 << m];
        for (r, &s) in masks.iter().enumerate() {
            rank[s as usize] = r as u32;
        }
        Self { m, p, masks, rank }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, r: usize) -> u32 {
        self.masks[r]
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn indices(&self, r: usize) -> Vec<usize> {
        MultiIndex::from_mask(self.m, self.masks[r]).idx
    }

    pub fn rank_of_mask(&self, mask: u32) -> Option<usize> {
        match self.rank.get(mask as usize) {
            Some(&r) if r != NO_RANK => Some(r as usize),
            _ => None,
        }
    }

    /// Rank and sign of an arbitrary ordered index list; `None` if it has a repeat.
    pub fn locate(&self, idx: &[usize]) -> Option<(usize, i32)> {
        if idx.len() != self.p {
            return None;
        }
        let (sorted, sign) = sort_with_sign(idx)?;
        let mask = sorted.iter().fold(0u32, |acc, &i| acc | (1 << i));
        self.rank_of_mask(mask).map(|r| (r, sign))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}
