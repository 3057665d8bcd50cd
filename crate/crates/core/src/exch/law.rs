//! Exchangeable laws stored as one per-sequence probability per type class.

use crate::error::{invalid_arg, Error, Result};
use crate::exch::block::BlockJoint;
use crate::exch::joint::{decode_into, GenericJoint, LetterDist};
use crate::exch::types::{Alphabet, TypeSpace, TypeVector};
use crate::scalar::{csum, Real};

/// An exchangeable distribution on `A^n`.
///
/// Every sequence of type `T` has probability `seq_prob(T)`, so
/// exchangeability holds by construction. Probabilities are per sequence,
/// not per class; the mass of a class is `multiplicity(T) * seq_prob(T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableLaw<F> {
    space: TypeSpace,
    q: Vec<F>,
}

impl<F: Real> ExchangeableLaw<F> {
    /// Validates nonnegativity and `sum_T mult(T) q(T) = 1`.
    pub fn new(space: TypeSpace, q: Vec<F>) -> Result<Self> {
        Self::with_tolerance(space, q, F::norm_tol())
    }

    /// As [`ExchangeableLaw::new`] with a caller-chosen normalization tolerance.
    pub fn with_tolerance(space: TypeSpace, q: Vec<F>, tol: F) -> Result<Self> {
        if q.len() != space.count() {
            return Err(Error::InvalidLaw(format!(
                "expected {} type probabilities, got {}",
                space.count(),
                q.len()
            )));
        }
        if let Some(x) = q.iter().find(|x| !x.is_finite() || **x < F::zero()) {
            return Err(Error::InvalidLaw(format!("invalid sequence probability {x}")));
        }
        let law = Self { space, q };
        let total = law.total_mass();
        if (total - F::one()).abs() > tol {
            return Err(Error::InvalidLaw(format!(
                "type-class masses sum to {total}, not 1"
            )));
        }
        Ok(law)
    }

    pub(crate) fn from_parts_unchecked(space: TypeSpace, q: Vec<F>) -> Self {
        Self { space, q }
    }

    /// Evaluates a per-sequence probability on every type.
    pub fn from_seq_fn(
        alphabet: Alphabet,
        n: usize,
        f: impl FnMut(&TypeVector) -> F,
    ) -> Result<Self> {
        let space = TypeSpace::new(alphabet, n)?;
        let q = space.types().iter().map(f).collect();
        Self::new(space, q)
    }

    /// Builds a law from type-class masses (one per type, lexicographic order).
    pub fn from_class_masses(alphabet: Alphabet, n: usize, masses: &[F]) -> Result<Self> {
        let space = TypeSpace::new(alphabet, n)?;
        if masses.len() != space.count() {
            return Err(invalid_arg(format!(
                "expected {} class masses, got {}",
                space.count(),
                masses.len()
            )));
        }
        let q = masses
            .iter()
            .zip(space.multiplicities())
            .map(|(&g, &mu)| g / F::from_count(mu))
            .collect();
        Self::new(space, q)
    }

    /// Product law `Q^n`.
    pub fn iid(dist: &LetterDist<F>, n: usize) -> Result<Self> {
        Self::from_seq_fn(dist.alphabet(), n, |t| dist.sequence_prob(t))
    }

    pub fn alphabet(&self) -> Alphabet {
        self.space.alphabet()
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    /// Per-sequence probabilities, indexed like `space().types()`.
    pub fn seq_probs(&self) -> &[F] {
        &self.q
    }

    /// Per-sequence probability of type `t`; zero for types of another shape.
    pub fn seq_prob(&self, t: &TypeVector) -> F {
        self.space
            .index_of(t)
            .map_or(F::zero(), |i| self.q[i])
    }

    pub(crate) fn seq_prob_counts(&self, counts: &[u32]) -> F {
        self.q[self.space.rank(counts)]
    }

    /// Mass of the type class at index `idx`.
    pub fn class_mass(&self, idx: usize) -> F {
        F::from_count(self.space.multiplicity(idx)) * self.q[idx]
    }

    pub fn class_masses(&self) -> Vec<F> {
        (0..self.space.count()).map(|i| self.class_mass(i)).collect()
    }

    pub fn total_mass(&self) -> F {
        csum((0..self.space.count()).map(|i| self.class_mass(i)))
    }

    /// Law of the first `k` coordinates:
    /// `q_k(S) = sum_R mult(R) q(S + R)` over types `R` of length `n - k`.
    pub fn marginal(&self, k: usize) -> Result<Self> {
        let n = self.n();
        if k > n {
            return Err(invalid_arg(format!("marginal length {k} exceeds n = {n}")));
        }
        if k == n {
            return Ok(self.clone());
        }
        let head = TypeSpace::new(self.alphabet(), k)?;
        let tail = TypeSpace::new(self.alphabet(), n - k)?;
        let q = head
            .types()
            .iter()
            .map(|s| {
                csum(tail.types().iter().enumerate().map(|(ri, r)| {
                    F::from_count(tail.multiplicity(ri)) * self.seq_prob_counts(s.plus(r).counts())
                }))
            })
            .collect();
        Ok(Self::from_parts_unchecked(head, q))
    }

    /// All marginals, `levels[L]` being the law of the first `L` coordinates.
    /// Built by dropping one coordinate at a time.
    pub fn tower(&self) -> Result<Tower<F>> {
        let n = self.n();
        let mut levels = Vec::with_capacity(n + 1);
        levels.push(self.clone());
        for len in (0..n).rev() {
            let upper: &ExchangeableLaw<F> = levels.last().expect("nonempty");
            let space = TypeSpace::new(self.alphabet(), len)?;
            let m = self.alphabet().size();
            let q = space
                .types()
                .iter()
                .map(|s| {
                    let mut ext = s.counts().to_vec();
                    csum((0..m).map(|a| {
                        ext[a] += 1;
                        let v = upper.seq_prob_counts(&ext);
                        ext[a] -= 1;
                        v
                    }))
                })
                .collect();
            levels.push(Self::from_parts_unchecked(space, q));
        }
        levels.reverse();
        Ok(Tower { levels })
    }

    /// Law of a single coordinate.
    pub fn single_letter(&self) -> Result<LetterDist<F>> {
        let one = self.marginal(1)?;
        Ok(single_letter_of(&one))
    }

    /// The same law written out on every sequence of `A^n`.
    pub fn densify(&self) -> Result<GenericJoint<F>> {
        let a = self.alphabet();
        let n = self.n();
        let size = a.sequence_count(n)?;
        let mut seq = vec![0usize; n];
        let mut prob = Vec::with_capacity(size);
        for idx in 0..size {
            decode_into(a.size(), idx, &mut seq);
            prob.push(self.seq_prob_counts(TypeVector::of_sequence(a, &seq).counts()));
        }
        Ok(GenericJoint::from_vec_unchecked(a, n, prob))
    }

    /// Joint law of two disjoint coordinate blocks of sizes `a` and `b`.
    pub fn block_joint(&self, a: usize, b: usize) -> Result<BlockJoint<F>> {
        if a + b > self.n() {
            return Err(invalid_arg(format!(
                "blocks of sizes {a} + {b} exceed n = {}",
                self.n()
            )));
        }
        BlockJoint::split(&self.marginal(a + b)?, a)
    }

    /// `P(X_1 = . | a block of length b has type w)`.
    pub fn conditional_component(&self, b: usize, w: &TypeVector) -> Result<LetterDist<F>> {
        if b + 1 > self.n() {
            return Err(invalid_arg(format!(
                "conditioning block of length {b} leaves no free coordinate in n = {}",
                self.n()
            )));
        }
        check_block_type(self.alphabet(), b, w)?;
        conditional_component_from(&self.marginal(b + 1)?, &self.marginal(b)?, w)
    }

    /// Exact law of `X_1^k` given that a disjoint block of length `b` has type `w`.
    pub fn conditional_block(&self, k: usize, b: usize, w: &TypeVector) -> Result<GenericJoint<F>> {
        if k + b > self.n() {
            return Err(invalid_arg(format!(
                "k + b = {} exceeds n = {}",
                k + b,
                self.n()
            )));
        }
        check_block_type(self.alphabet(), b, w)?;
        let upper = self.marginal(k + b)?;
        let denom = self.marginal(b)?.seq_prob(w);
        if denom <= F::zero() {
            return Err(Error::UndefinedConditional {
                counts: w.counts().to_vec(),
            });
        }
        let a = self.alphabet();
        let size = a.sequence_count(k)?;
        let mut seq = vec![0usize; k];
        let mut prob = Vec::with_capacity(size);
        for idx in 0..size {
            decode_into(a.size(), idx, &mut seq);
            let t = TypeVector::of_sequence(a, &seq).plus(w);
            prob.push(upper.seq_prob_counts(t.counts()) / denom);
        }
        Ok(GenericJoint::from_vec_unchecked(a, k, prob))
    }
}

/// Every marginal of one law, indexed by length.
#[derive(Debug, Clone)]
pub struct Tower<F> {
    levels: Vec<ExchangeableLaw<F>>,
}

impl<F: Real> Tower<F> {
    pub fn n(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, len: usize) -> &ExchangeableLaw<F> {
        &self.levels[len]
    }

    pub fn full(&self) -> &ExchangeableLaw<F> {
        &self.levels[self.n()]
    }
}

pub(crate) fn single_letter_of<F: Real>(one: &ExchangeableLaw<F>) -> LetterDist<F> {
    let m = one.alphabet().size();
    let p = (0..m)
        .map(|a| one.seq_prob(&TypeVector::unit(one.alphabet(), a)))
        .collect();
    LetterDist::from_vec_unchecked(p)
}

fn check_block_type(alphabet: Alphabet, b: usize, w: &TypeVector) -> Result<()> {
    if w.alphabet_size() != alphabet.size() || w.len() != b {
        return Err(invalid_arg(format!(
            "conditioning type {:?} is not a type of length {b} over |A| = {}",
            w.counts(),
            alphabet.size()
        )));
    }
    Ok(())
}

/// Conditional letter law from the `(b+1)`- and `b`-marginals.
pub(crate) fn conditional_component_from<F: Real>(
    upper: &ExchangeableLaw<F>,
    lower: &ExchangeableLaw<F>,
    w: &TypeVector,
) -> Result<LetterDist<F>> {
    let denom = lower.seq_prob(w);
    if denom <= F::zero() {
        return Err(Error::UndefinedConditional {
            counts: w.counts().to_vec(),
        });
    }
    let mut ext = w.counts().to_vec();
    let p = (0..ext.len())
        .map(|a| {
            ext[a] += 1;
            let v = upper.seq_prob_counts(&ext) / denom;
            ext[a] -= 1;
            v
        })
        .collect();
    Ok(LetterDist::from_vec_unchecked(p))
}

/// Orbit-averages a joint: `q(T) = (mass of class T) / mult(T)`.
pub fn symmetrize<F: Real>(j: &GenericJoint<F>) -> Result<ExchangeableLaw<F>> {
    let a = j.alphabet();
    let space = TypeSpace::new(a, j.len())?;
    let mut mass = vec![Vec::new(); space.count()];
    for (idx, &p) in j.probs().iter().enumerate() {
        let t = TypeVector::of_sequence(a, &j.sequence(idx));
        mass[space.rank(t.counts())].push(p);
    }
    let q = mass
        .into_iter()
        .zip(space.multiplicities())
        .map(|(ps, &mu)| csum(ps) / F::from_count(mu))
        .collect();
    Ok(ExchangeableLaw::from_parts_unchecked(space, q))
}

/// True iff every sequence is within `tol` of its orbit average.
pub fn is_exchangeable<F: Real>(j: &GenericJoint<F>, tol: F) -> Result<bool> {
    let sym = symmetrize(j)?;
    let a = j.alphabet();
    Ok(j.probs().iter().enumerate().all(|(idx, &p)| {
        let t = TypeVector::of_sequence(a, &j.sequence(idx));
        (p - sym.seq_prob_counts(t.counts())).abs() <= tol
    }))
}
