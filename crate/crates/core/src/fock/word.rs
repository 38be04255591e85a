//! Multi-indices over the basis `e_1, .., e_d` and their lexicographic ranks.

use std::fmt;

use crate::error::{Error, Result};

/// A word `(i_1, .., i_n)` with letters in `1..=d`, labelling the basis
/// tensor `e_{i_1} ⊗ .. ⊗ e_{i_n}`. The empty word labels the vacuum.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>, d: usize) -> Result<Self> {
        if let Some(&bad) = letters.iter().find(|&&l| l == 0 || l > d) {
            return Err(Error::invalid(format!("letter {bad} outside 1..={d}")));
        }
        Ok(Self { letters })
    }

    pub fn vacuum() -> Self {
        Self {
            letters: Vec::new(),
        }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            f.write_str("Ω")
        } else {
            write!(f, "e{:?}", self.letters)
        }
    }
}

/// Zero-based lexicographic rank of `w` within `{1..d}^n`.
pub fn word_index(w: &Word, d: usize) -> Result<usize> {
    if let Some(&bad) = w.letters.iter().find(|&&l| l == 0 || l > d) {
        return Err(Error::invalid(format!("letter {bad} outside 1..={d}")));
    }
    Ok(w.letters.iter().fold(0, |acc, &l| acc * d + (l - 1)))
}

/// Inverse of [`word_index`].
pub fn index_word(index: usize, n: usize, d: usize) -> Word {
    let mut digits = vec![0; n];
    unrank(index, d, &mut digits);
    Word {
        letters: digits.into_iter().map(|x| x + 1).collect(),
    }
}

/// `d^n`, or `None` on overflow.
pub fn level_dim(d: usize, n: usize) -> Option<usize> {
    d.checked_pow(u32::try_from(n).ok()?)
}

/// Rank of zero-based digits.
#[inline]
pub(crate) fn rank(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Fills `digits` (zero-based, most significant first) from a rank.
#[inline]
pub(crate) fn unrank(mut index: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_examples() {
        assert_eq!(word_index(&Word::vacuum(), 3).unwrap(), 0);
        assert_eq!(
            word_index(&Word::new(vec![1, 1], 2).unwrap(), 2).unwrap(),
            0
        );
        // (2,1,2) -> digits (1,0,1) in base 2.
        assert_eq!(
            word_index(&Word::new(vec![2, 1, 2], 2).unwrap(), 2).unwrap(),
            5
        );
    }

    #[test]
    fn out_of_range_letters() {
        assert!(matches!(
            Word::new(vec![1, 3], 2),
            Err(Error::InvalidInput(_))
        ));
        assert!(Word::new(vec![0], 2).is_err());
        let w = Word::new(vec![3], 3).unwrap();
        assert!(word_index(&w, 2).is_err());
    }

    #[test]
    fn round_trip_all_words() {
        for d in 1..=3 {
            for n in 0..=4 {
                for idx in 0..level_dim(d, n).unwrap() {
                    let w = index_word(idx, n, d);
                    assert_eq!(w.len(), n);
                    assert_eq!(word_index(&w, d).unwrap(), idx);
                }
            }
        }
    }
}
