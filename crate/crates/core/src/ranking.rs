//! Strict rankings, profiles, and the pairwise ±1 encodings of a profile.
//!
//! Alternatives are 0-based integers. A ranking is indexed by the
//! lexicographic rank of its one-line notation read top to bottom, so for
//! k = 3 index 0 is `0 > 1 > 2` and index 5 is `2 > 1 > 0`. Unordered pairs
//! are canonicalized as `(a, b)` with `a < b` and listed lexicographically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported alternative count (45 canonical pairs fit one `u64`).
pub const MAX_ALTERNATIVES: usize = 10;

pub fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// The canonical pairs `(a, b)`, `a < b`, in lexicographic order.
pub fn canonical_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for a in 0..k {
        for b in a + 1..k {
            out.push((a, b));
        }
    }
    out
}

/// Position of the canonical pair `{a, b}` in [`canonical_pairs`].
pub fn pair_index(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    // Pairs starting with x < a come first: sum_{x<a} (k - 1 - x).
    a * (2 * k - a - 1) / 2 + (b - a - 1)
}

/// A strict total order on `k` alternatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ranking {
    /// `ranks[a]` is the position of alternative `a`, 0 being the top.
    ranks: Vec<u8>,
}

impl Ranking {
    /// Builds a ranking from its one-line notation, best alternative first.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        let k = order.len();
        if k == 0 || k > MAX_ALTERNATIVES {
            return Err(Error::InvalidRanking(format!("k = {k} not in 1..={MAX_ALTERNATIVES}")));
        }
        let mut ranks = vec![u8::MAX; k];
        for (pos, &alt) in order.iter().enumerate() {
            if alt >= k || ranks[alt] != u8::MAX {
                return Err(Error::InvalidRanking(format!("{order:?} is not a permutation")));
            }
            ranks[alt] = pos as u8;
        }
        Ok(Ranking { ranks })
    }

    pub fn from_ranks(ranks: &[usize]) -> Result<Self> {
        let k = ranks.len();
        let mut order = vec![usize::MAX; k];
        for (alt, &r) in ranks.iter().enumerate() {
            if r >= k || order[r] != usize::MAX {
                return Err(Error::InvalidRanking(format!("{ranks:?} is not a bijection")));
            }
            order[r] = alt;
        }
        Self::from_order(&order)
    }

    /// The ranking with the given lexicographic index among all `k!` rankings.
    pub fn from_index(k: usize, mut index: usize) -> Result<Self> {
        if k == 0 || k > MAX_ALTERNATIVES || index >= factorial(k) {
            return Err(Error::InvalidRanking(format!("index {index} out of range for k = {k}")));
        }
        let mut pool: Vec<usize> = (0..k).collect();
        let mut order = Vec::with_capacity(k);
        for remaining in (1..=k).rev() {
            let block = factorial(remaining - 1);
            order.push(pool.remove(index / block));
            index %= block;
        }
        Self::from_order(&order)
    }

    pub fn k(&self) -> usize {
        self.ranks.len()
    }

    pub fn rank(&self, alt: usize) -> usize {
        self.ranks[alt] as usize
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.ranks.iter().map(|&r| r as usize).collect()
    }

    /// Alternatives from top to bottom.
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.k()];
        for (alt, &r) in self.ranks.iter().enumerate() {
            order[r as usize] = alt;
        }
        order
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.ranks[a] < self.ranks[b]
    }

    /// The reversed ranking (bottom becomes top).
    pub fn reversal(&self) -> Self {
        let top = self.k() as u8 - 1;
        Ranking { ranks: self.ranks.iter().map(|&r| top - r).collect() }
    }

    /// Lexicographic index of the one-line notation.
    pub fn index(&self) -> usize {
        let order = self.order();
        let k = order.len();
        let mut used = vec![false; k];
        let mut index = 0;
        for (pos, &alt) in order.iter().enumerate() {
            let smaller_unused = (0..alt).filter(|&x| !used[x]).count();
            index += smaller_unused * factorial(k - 1 - pos);
            used[alt] = true;
        }
        index
    }

    /// Restriction to a subset of alternatives, re-indexed by the subset's
    /// sorted order.
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let mut sorted = subset.to_vec();
        sorted.sort_unstable();
        let order: Vec<usize> = self
            .order()
            .into_iter()
            .filter_map(|alt| sorted.binary_search(&alt).ok())
            .collect();
        Self::from_order(&order)
    }
}

/// All `k!` rankings in index order.
pub fn all_rankings(k: usize) -> Vec<Ranking> {
    (0..factorial(k)).map(|i| Ranking::from_index(k, i).expect("index in range")).collect()
}

/// One ranking per voter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    voters: Vec<Ranking>,
}

impl Profile {
    pub fn new(voters: Vec<Ranking>) -> Result<Self> {
        if let Some(first) = voters.first() {
            if voters.iter().any(|r| r.k() != first.k()) {
                return Err(Error::ShapeMismatch("rankings in a profile must share k".into()));
            }
        }
        Ok(Profile { voters })
    }

    pub fn from_indices(k: usize, indices: &[usize]) -> Result<Self> {
        let voters = indices.iter().map(|&i| Ranking::from_index(k, i)).collect::<Result<_>>()?;
        Self::new(voters)
    }

    pub fn voters(&self) -> &[Ranking] {
        &self.voters
    }

    pub fn n(&self) -> usize {
        self.voters.len()
    }

    /// Alternative count, or `None` for the empty profile.
    pub fn k(&self) -> Option<usize> {
        self.voters.first().map(Ranking::k)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.voters.iter().map(Ranking::index).collect()
    }
}

/// The voters' signs on one ordered pair: `bits[i] = +1` iff voter `i`
/// ranks `pair.0` above `pair.1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEncoding {
    pub pair: (usize, usize),
    pub bits: Vec<i8>,
}

impl PairEncoding {
    /// Table index with bit `i` set exactly when `bits[i] = +1`.
    pub fn table_index(&self) -> usize {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b > 0)
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }
}

pub fn encode_pair(profile: &Profile, a: usize, b: usize) -> Result<PairEncoding> {
    if a == b {
        return Err(Error::IdenticalAlternatives(a));
    }
    let k = profile.k().unwrap_or(0);
    for alt in [a, b] {
        if alt >= k {
            return Err(Error::AlternativeOutOfRange { alt, k });
        }
    }
    let bits = profile
        .voters()
        .iter()
        .map(|r| if r.prefers(a, b) { 1 } else { -1 })
        .collect();
    Ok(PairEncoding { pair: (a, b), bits })
}

/// Per-ranking pair signs, precomputed once per `k` for the hot loops.
#[derive(Clone, Debug)]
pub struct RankingTable {
    k: usize,
    pairs: Vec<(usize, usize)>,
    /// `masks[r]` has bit `p` set iff ranking `r` puts the lower alternative
    /// of canonical pair `p` on top.
    masks: Vec<u64>,
}

impl RankingTable {
    pub fn new(k: usize) -> Self {
        let pairs = canonical_pairs(k);
        let masks = all_rankings(k)
            .iter()
            .map(|r| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(_, &(a, b))| r.prefers(a, b))
                    .fold(0u64, |m, (p, _)| m | (1 << p))
            })
            .collect();
        RankingTable { k, pairs, masks }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair_mask(&self, ranking: usize) -> u64 {
        self.masks[ranking]
    }

    /// The ranking whose canonical pair signs are `mask`, if any.
    pub fn ranking_for_mask(&self, mask: u64) -> Option<usize> {
        self.masks.iter().position(|&m| m == mask)
    }
}
