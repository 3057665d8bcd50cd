//! Dense distributions: arbitrary joints on `A^L` and single-letter laws.

use crate::error::{invalid_arg, Result};
use crate::exch::types::{Alphabet, TypeVector};
use crate::scalar::{csum, Real};

/// A probability mass function on the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct LetterDist<F> {
    p: Vec<F>,
}

impl<F: Real> LetterDist<F> {
    pub fn new(p: Vec<F>) -> Result<Self> {
        check_distribution(&p, "letter distribution")?;
        Ok(Self { p })
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let m = alphabet.size();
        Self {
            p: vec![F::one() / F::from_count(m as u128); m],
        }
    }

    pub fn point(alphabet: Alphabet, a: usize) -> Self {
        let mut p = vec![F::zero(); alphabet.size()];
        p[a] = F::one();
        Self { p }
    }

    /// Bernoulli law `(1-p, p)` on `{0, 1}`.
    pub fn bernoulli(p: F) -> Result<Self> {
        Self::new(vec![F::one() - p, p])
    }

    pub(crate) fn from_vec_unchecked(p: Vec<F>) -> Self {
        Self { p }
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.p.len()).expect("nonempty")
    }

    pub fn probs(&self) -> &[F] {
        &self.p
    }

    pub fn prob(&self, a: usize) -> F {
        self.p[a]
    }

    /// Probability of any one sequence of type `t` under the i.i.d. law.
    pub fn sequence_prob(&self, t: &TypeVector) -> F {
        self.p
            .iter()
            .zip(t.counts())
            .fold(F::one(), |acc, (&q, &c)| acc * q.powi(c as i32))
    }
}

/// A distribution on `A^L`, stored densely. Sequence `x` lives at index
/// `sum_t x_t * m^(L-1-t)`, so the first coordinate is most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericJoint<F> {
    alphabet: Alphabet,
    len: usize,
    prob: Vec<F>,
}

impl<F: Real> GenericJoint<F> {
    pub fn new(alphabet: Alphabet, len: usize, prob: Vec<F>) -> Result<Self> {
        let size = alphabet.sequence_count(len)?;
        if prob.len() != size {
            return Err(invalid_arg(format!(
                "joint on A^{len} with |A| = {} needs {size} entries, got {}",
                alphabet.size(),
                prob.len()
            )));
        }
        check_distribution(&prob, "joint distribution")?;
        Ok(Self {
            alphabet,
            len,
            prob,
        })
    }

    pub(crate) fn from_vec_unchecked(alphabet: Alphabet, len: usize, prob: Vec<F>) -> Self {
        Self {
            alphabet,
            len,
            prob,
        }
    }

    /// Builds a joint by evaluating `f` on every sequence, then validates it.
    pub fn from_fn(alphabet: Alphabet, len: usize, mut f: impl FnMut(&[usize]) -> F) -> Result<Self> {
        let size = alphabet.sequence_count(len)?;
        let mut seq = vec![0usize; len];
        let mut prob = Vec::with_capacity(size);
        for idx in 0..size {
            decode_into(alphabet.size(), idx, &mut seq);
            prob.push(f(&seq));
        }
        Self::new(alphabet, len, prob)
    }

    pub fn point_mass(alphabet: Alphabet, seq: &[usize]) -> Result<Self> {
        if seq.iter().any(|&x| x >= alphabet.size()) {
            return Err(invalid_arg("symbol outside the alphabet"));
        }
        let size = alphabet.sequence_count(seq.len())?;
        let mut prob = vec![F::zero(); size];
        prob[encode(alphabet.size(), seq)] = F::one();
        Ok(Self {
            alphabet,
            len: seq.len(),
            prob,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn probs(&self) -> &[F] {
        &self.prob
    }

    pub fn prob(&self, seq: &[usize]) -> F {
        self.prob[encode(self.alphabet.size(), seq)]
    }

    /// The sequence stored at `idx`.
    pub fn sequence(&self, idx: usize) -> Vec<usize> {
        let mut seq = vec![0; self.len];
        decode_into(self.alphabet.size(), idx, &mut seq);
        seq
    }

    /// Law of the first `len` coordinates.
    pub fn prefix_marginal(&self, len: usize) -> GenericJoint<F> {
        assert!(len <= self.len, "prefix longer than the joint");
        let block = self.alphabet.size().pow((self.len - len) as u32);
        let prob = self
            .prob
            .chunks(block)
            .map(|c| csum(c.iter().copied()))
            .collect();
        GenericJoint::from_vec_unchecked(self.alphabet, len, prob)
    }

    /// Law of coordinate `i` (zero-based).
    pub fn coordinate_marginal(&self, i: usize) -> LetterDist<F> {
        assert!(i < self.len, "coordinate out of range");
        let m = self.alphabet.size();
        let stride = m.pow((self.len - 1 - i) as u32);
        let mut p = vec![F::zero(); m];
        for (idx, &q) in self.prob.iter().enumerate() {
            let a = (idx / stride) % m;
            p[a] = p[a] + q;
        }
        LetterDist::from_vec_unchecked(p)
    }

    /// Product of the coordinate marginals.
    pub fn product_of_marginals(&self) -> GenericJoint<F> {
        let margins: Vec<_> = (0..self.len).map(|i| self.coordinate_marginal(i)).collect();
        let size = self.prob.len();
        let mut seq = vec![0; self.len];
        let mut prob = Vec::with_capacity(size);
        for idx in 0..size {
            decode_into(self.alphabet.size(), idx, &mut seq);
            prob.push(
                seq.iter()
                    .zip(&margins)
                    .fold(F::one(), |acc, (&x, d)| acc * d.prob(x)),
            );
        }
        GenericJoint::from_vec_unchecked(self.alphabet, self.len, prob)
    }
}

pub(crate) fn encode(m: usize, seq: &[usize]) -> usize {
    seq.iter().fold(0, |acc, &x| acc * m + x)
}

pub(crate) fn decode_into(m: usize, mut idx: usize, seq: &mut [usize]) {
    for slot in seq.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
}

pub(crate) fn check_distribution<F: Real>(p: &[F], what: &str) -> Result<()> {
    if p.is_empty() {
        return Err(invalid_arg(format!("{what} is empty")));
    }
    if let Some(x) = p.iter().find(|x| !x.is_finite() || **x < F::zero()) {
        return Err(invalid_arg(format!("{what} has invalid entry {x}")));
    }
    let total = csum(p.iter().copied());
    if (total - F::one()).abs() > F::norm_tol() {
        return Err(invalid_arg(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_is_big_endian() {
        let a = Alphabet::new(3).unwrap();
        let j = GenericJoint::<f64>::point_mass(a, &[1, 0, 2]).unwrap();
        assert_eq!(j.probs()[9 + 2], 1.0);
        assert_eq!(j.sequence(11), vec![1, 0, 2]);
    }

    #[test]
    fn marginals_of_point_mass() {
        let a = Alphabet::binary();
        let j = GenericJoint::<f64>::point_mass(a, &[0, 1, 1]).unwrap();
        assert_eq!(j.prefix_marginal(2).prob(&[0, 1]), 1.0);
        assert_eq!(j.coordinate_marginal(0).probs(), &[1.0, 0.0]);
        assert_eq!(j.coordinate_marginal(2).probs(), &[0.0, 1.0]);
        assert_eq!(j.prefix_marginal(0).probs(), &[1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let a = Alphabet::binary();
        assert!(GenericJoint::new(a, 1, vec![0.5f64, 0.6]).is_err());
        assert!(GenericJoint::new(a, 1, vec![1.5f64, -0.5]).is_err());
        assert!(GenericJoint::new(a, 2, vec![0.5f64, 0.5]).is_err());
        assert!(LetterDist::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn iid_sequence_prob() {
        let q = LetterDist::new(vec![0.25f64, 0.75]).unwrap();
        let t = TypeVector::new(vec![1, 2]);
        assert!((q.sequence_prob(&t) - 0.25 * 0.75 * 0.75).abs() < 1e-16);
    }
}
