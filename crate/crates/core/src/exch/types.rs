//! Method-of-types bookkeeping: type vectors, their multiplicities, and the
//! lexicographic enumeration every law is indexed by.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};

/// Longest sequence for which multiplicities are computed exactly (30! < 2^128).
pub const MAX_LEN: usize = 30;

/// A finite alphabet `{0, .., size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(invalid_arg("alphabet size must be at least 1"));
        }
        Ok(Self { size })
    }

    pub fn binary() -> Self {
        Self { size: 2 }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of sequences in `A^len`.
    pub fn sequence_count(&self, len: usize) -> Result<usize> {
        let mut total: usize = 1;
        for _ in 0..len {
            total = total.checked_mul(self.size).ok_or(Error::Range {
                what: "sequence count",
                value: u128::MAX,
                limit: usize::MAX as u128,
            })?;
        }
        Ok(total)
    }
}

/// Symbol counts of a sequence. The length of the sequence is the sum.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeVector(Vec<u32>);

impl TypeVector {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    /// The empty type of length zero.
    pub fn empty(alphabet: Alphabet) -> Self {
        Self(vec![0; alphabet.size()])
    }

    /// Type of the single-letter sequence `(a)`.
    pub fn unit(alphabet: Alphabet, a: usize) -> Self {
        let mut c = vec![0; alphabet.size()];
        c[a] = 1;
        Self(c)
    }

    pub fn of_sequence(alphabet: Alphabet, seq: &[usize]) -> Self {
        let mut c = vec![0u32; alphabet.size()];
        for &x in seq {
            c[x] += 1;
        }
        Self(c)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn alphabet_size(&self) -> usize {
        self.0.len()
    }

    /// Sequence length `L`.
    pub fn len(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Type of the concatenation of two sequences.
    pub fn plus(&self, other: &TypeVector) -> TypeVector {
        debug_assert_eq!(self.0.len(), other.0.len());
        TypeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` if some count would go negative.
    pub fn minus(&self, other: &TypeVector) -> Option<TypeVector> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(TypeVector)
    }

    /// `L! / prod_a counts_a!`, exact.
    pub fn multiplicity(&self) -> Result<u128> {
        multiplicity(self)
    }
}

/// Exact multinomial coefficient of a type.
pub fn multiplicity(t: &TypeVector) -> Result<u128> {
    let len = t.len();
    if len > MAX_LEN {
        return Err(Error::Range {
            what: "type length",
            value: len as u128,
            limit: MAX_LEN as u128,
        });
    }
    let mut total: u128 = 1;
    let mut partial: u128 = 0;
    for &c in t.counts() {
        partial += c as u128;
        total *= binomial(partial, c as u128);
    }
    Ok(total)
}

/// Exact binomial coefficient; callers keep `n <= MAX_LEN`.
pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        acc = acc * (n - k + j) / j;
    }
    acc
}

/// Number of compositions of `total` into `parts` nonnegative parts.
fn compositions(total: usize, parts: usize) -> usize {
    if parts == 0 {
        return usize::from(total == 0);
    }
    binomial((total + parts - 1) as u128, (parts - 1) as u128) as usize
}

/// All type vectors of length `len` over `alphabet`, lexicographic by counts.
pub fn enumerate_types(alphabet: Alphabet, len: usize) -> Vec<TypeVector> {
    let m = alphabet.size();
    let mut out = Vec::with_capacity(compositions(len, m));
    let mut cur = vec![0u32; m];
    fill(&mut cur, 0, len, &mut out);
    out
}

fn fill(cur: &mut Vec<u32>, pos: usize, rem: usize, out: &mut Vec<TypeVector>) {
    if pos + 1 == cur.len() {
        cur[pos] = rem as u32;
        out.push(TypeVector(cur.clone()));
        return;
    }
    for v in 0..=rem {
        cur[pos] = v as u32;
        fill(cur, pos + 1, rem - v, out);
    }
}

/// The set of types of a fixed length, with ranks and exact multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSpace {
    alphabet: Alphabet,
    len: usize,
    types: Vec<TypeVector>,
    mult: Vec<u128>,
}

impl TypeSpace {
    pub fn new(alphabet: Alphabet, len: usize) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::Range {
                what: "sequence length",
                value: len as u128,
                limit: MAX_LEN as u128,
            });
        }
        let types = enumerate_types(alphabet, len);
        let mult = types
            .iter()
            .map(multiplicity)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alphabet,
            len,
            types,
            mult,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of types (never zero).
    pub fn count(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[TypeVector] {
        &self.types
    }

    pub fn get(&self, idx: usize) -> &TypeVector {
        &self.types[idx]
    }

    pub fn multiplicity(&self, idx: usize) -> u128 {
        self.mult[idx]
    }

    pub fn multiplicities(&self) -> &[u128] {
        &self.mult
    }

    /// Position of `counts` in the lexicographic enumeration.
    pub fn rank(&self, counts: &[u32]) -> usize {
        debug_assert_eq!(counts.len(), self.alphabet.size());
        let m = counts.len();
        let mut rank = 0;
        let mut rem = self.len;
        for (i, &c) in counts.iter().enumerate().take(m - 1) {
            for v in 0..c as usize {
                rank += compositions(rem - v, m - 1 - i);
            }
            rem -= c as usize;
        }
        rank
    }

    /// Checked rank: `None` if `t` is not a type of this space.
    pub fn index_of(&self, t: &TypeVector) -> Option<usize> {
        if t.alphabet_size() != self.alphabet.size() || t.len() != self.len {
            return None;
        }
        Some(self.rank(t.counts()))
    }
}
