//! Greedy Gilbert-Varshamov codes.
//!
//! Both constructions scan the ambient space in lexicographic order (most
//! significant position first) and keep a word iff it is at distance at
//! least the target from every word kept so far.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Desk-scale bounds on code construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeLimits {
    /// Largest ambient space a scan may walk.
    pub max_scan: u128,
    /// Cap on the default outer-code size `ceil(|U|^(S/8))`.
    pub max_outer_words: usize,
}

impl Default for CodeLimits {
    fn default() -> Self {
        Self { max_scan: 1 << 24, max_outer_words: 64 }
    }
}

/// A set of equal-length words over `{0, .., alphabet_size - 1}` with a
/// verified minimum pairwise Hamming distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBook {
    alphabet_size: usize,
    length: usize,
    words: Vec<Vec<usize>>,
    min_distance: usize,
}

pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

impl CodeBook {
    /// Checks lengths, symbols, distinctness and the pairwise distance bound
    /// exhaustively.
    pub fn new(alphabet_size: usize, length: usize, words: Vec<Vec<usize>>, min_distance: usize) -> Result<Self> {
        for (i, w) in words.iter().enumerate() {
            if w.len() != length {
                return Err(Error::InvalidCode(format!("word {i} has length {}, expected {length}", w.len())));
            }
            if let Some(&sym) = w.iter().find(|&&x| x >= alphabet_size) {
                return Err(Error::InvalidCode(format!("word {i} uses symbol {sym} outside alphabet {alphabet_size}")));
            }
        }
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let d = hamming(&words[i], &words[j]);
                if d == 0 || d < min_distance {
                    return Err(Error::InvalidCode(format!("words {i} and {j} are at distance {d} < {min_distance}")));
                }
            }
        }
        Ok(Self { alphabet_size, length, words, min_distance })
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The guaranteed distance the book was built for.
    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    /// Smallest distance actually achieved, `None` with fewer than two words.
    pub fn achieved_min_distance(&self) -> Option<usize> {
        let mut best = None;
        for i in 0..self.words.len() {
            for j in i + 1..self.words.len() {
                let d = hamming(&self.words[i], &self.words[j]);
                best = Some(best.map_or(d, |b: usize| b.min(d)));
            }
        }
        best
    }

    /// Binary word `i` as signs: symbol 0 is `-1`, symbol 1 is `+1`.
    pub fn signs(&self, i: usize) -> Vec<f64> {
        debug_assert_eq!(self.alphabet_size, 2);
        self.words[i].iter().map(|&x| if x == 0 { -1.0 } else { 1.0 }).collect()
    }
}

/// `ceil(e^(len/8))`, the default size target of a binary code.
pub fn default_inner_count(length: usize) -> usize {
    math::ceil(math::exp(length as f64 / 8.0)) as usize
}

/// `min(ceil(q^(len/8)), cap)`.
pub fn default_outer_count(inner_size: usize, length: usize, cap: usize) -> usize {
    let raw = math::ceil(libm::pow(inner_size as f64, length as f64 / 8.0));
    if raw >= cap as f64 {
        cap
    } else {
        raw as usize
    }
}

fn space_size(q: usize, length: usize) -> Option<u128> {
    let mut total: u128 = 1;
    for _ in 0..length {
        total = total.checked_mul(q as u128)?;
    }
    Some(total)
}

fn greedy(q: usize, length: usize, target: usize, min_count: usize, limits: CodeLimits) -> Result<CodeBook> {
    if q == 0 || length == 0 {
        return Err(Error::BadFamilySpec(format!("code needs a nonempty alphabet and length, got q={q}, N={length}")));
    }
    let space = space_size(q, length);
    let mut kept: Vec<Vec<usize>> = Vec::new();
    let mut word = vec![0usize; length];
    let mut scanned: u128 = 0;
    loop {
        if kept.len() >= min_count.max(1) {
            break;
        }
        if scanned >= limits.max_scan {
            return Err(Error::BudgetExceeded {
                what: "code scan",
                requested: space.unwrap_or(u128::MAX),
                cap: limits.max_scan,
            });
        }
        scanned += 1;
        if kept.iter().all(|k| hamming(k, &word) >= target) {
            kept.push(word.clone());
        }
        // Odometer increment, last position fastest.
        let mut pos = length;
        loop {
            if pos == 0 {
                return finish(q, length, kept, target, min_count);
            }
            pos -= 1;
            word[pos] += 1;
            if word[pos] < q {
                break;
            }
            word[pos] = 0;
        }
    }
    finish(q, length, kept, target, min_count)
}

fn finish(q: usize, length: usize, kept: Vec<Vec<usize>>, target: usize, min_count: usize) -> Result<CodeBook> {
    if kept.len() < min_count {
        return Err(Error::CodeTooSmall { found: kept.len(), needed: min_count });
    }
    CodeBook::new(q, length, kept, target)
}

/// Binary code of the given length with pairwise Hamming distance at least
/// `target_hamming`, stopping once `min_count` words are kept.
pub fn gv_inner_code(length: usize, target_hamming: usize, min_count: usize) -> Result<CodeBook> {
    gv_inner_code_with(length, target_hamming, min_count, CodeLimits::default())
}

pub fn gv_inner_code_with(length: usize, target_hamming: usize, min_count: usize, limits: CodeLimits) -> Result<CodeBook> {
    if target_hamming > length {
        return Err(Error::CodeTooSmall { found: 1, needed: min_count.max(2) });
    }
    greedy(2, length, target_hamming.max(1), min_count, limits)
}

/// Code of length `length` over the words of `inner`; symbols index
/// `inner.words()`.
pub fn gv_outer_code(inner: &CodeBook, length: usize, target_hamming: usize, min_count: usize) -> Result<CodeBook> {
    gv_outer_code_with(inner, length, target_hamming, min_count, CodeLimits::default())
}

pub fn gv_outer_code_with(
    inner: &CodeBook,
    length: usize,
    target_hamming: usize,
    min_count: usize,
    limits: CodeLimits,
) -> Result<CodeBook> {
    if inner.is_empty() {
        return Err(Error::BadFamilySpec("outer code needs a nonempty inner code".into()));
    }
    if target_hamming > length {
        return Err(Error::CodeTooSmall { found: 1, needed: min_count.max(2) });
    }
    greedy(inner.len(), length, target_hamming.max(1), min_count, limits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_binary_code() {
        let book = gv_inner_code(2, 1, 2).unwrap();
        assert!(book.len() >= 2);
        assert_eq!(book.words()[0], vec![0, 0]);
        assert_eq!(book.signs(0), vec![-1.0, -1.0]);
    }

    #[test]
    fn distance_above_length_fails() {
        assert_eq!(gv_inner_code(4, 5, 2).unwrap_err().kind(), "CodeTooSmall");
    }

    #[test]
    fn greedy_order_is_lexicographic() {
        // Distance 2 over length 3: 000, 011, 101, 110.
        let book = gv_inner_code(3, 2, 4).unwrap();
        assert_eq!(book.words(), &[vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(gv_inner_code(3, 2, 5).unwrap_err(), Error::CodeTooSmall { found: 4, needed: 5 });
    }

    #[test]
    fn outer_code_examples() {
        let inner = gv_inner_code(4, 1, 3).unwrap();
        assert_eq!(inner.len(), 3);
        assert_eq!(gv_outer_code(&inner, 1, 1, 3).unwrap().len(), 3);
        assert_eq!(gv_outer_code(&inner, 2, 1, 3).unwrap().len(), 3);
        let book = gv_outer_code(&inner, 4, 2, 3).unwrap();
        assert!(book.achieved_min_distance().unwrap() >= 2);
        assert_eq!(book.alphabet_size(), 3);
    }

    #[test]
    fn construction_rejects_bad_books() {
        assert_eq!(CodeBook::new(2, 2, vec![vec![0, 1], vec![0, 1]], 1).unwrap_err().kind(), "InvalidCode");
        assert_eq!(CodeBook::new(2, 2, vec![vec![0, 1], vec![1, 1]], 2).unwrap_err().kind(), "InvalidCode");
        assert_eq!(CodeBook::new(2, 2, vec![vec![0, 2]], 1).unwrap_err().kind(), "InvalidCode");
    }

    #[test]
    fn scan_cap_trips() {
        let limits = CodeLimits { max_scan: 10, max_outer_words: 4 };
        let err = gv_inner_code_with(8, 8, 3, limits).unwrap_err();
        assert_eq!(err.kind(), "BudgetExceeded");
    }

    #[test]
    fn default_counts() {
        assert_eq!(default_inner_count(8), 3);
        assert_eq!(default_inner_count(16), 8);
        assert_eq!(default_outer_count(3, 2, 64), 2);
        assert_eq!(default_outer_count(1000, 80, 64), 64);
    }
}
