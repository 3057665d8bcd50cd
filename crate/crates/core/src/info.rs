//! Entropy, relative entropy, total variation and (conditional) mutual
//! information, all in natural-log units.
//!
//! Zero handling is exact: `0 log 0 = 0`, and a relative entropy is `+inf`
//! precisely when some `P(x) > 0` meets `Q(x) == 0`. No probability is ever
//! thresholded. Sums are accumulated in index order with compensation.

use std::fmt;
use std::ops::Add;

use crate::error::{invalid_arg, Result};
use crate::exch::{BlockJoint, ExchangeableLaw, GenericJoint, Tower, TypeSpace};
use crate::scalar::{csum, Real};

/// An information quantity in nats. Either a finite nonnegative value or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Nats<F>(F);

impl<F: Real> Nats<F> {
    /// Wraps a computed value. Negative rounding residue is clamped to zero.
    ///
    /// Panics on NaN.
    pub fn new(value: F) -> Self {
        assert!(!value.is_nan(), "information quantity is NaN");
        Self(value.max(F::zero()))
    }

    pub fn zero() -> Self {
        Self(F::zero())
    }

    pub fn infinity() -> Self {
        Self(F::infinity())
    }

    pub fn value(self) -> F {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn to_bits(self) -> F {
        self.0 / F::lit(std::f64::consts::LN_2)
    }
}

impl<F: Real> Add for Nats<F> {
    type Output = Nats<F>;

    fn add(self, rhs: Self) -> Self {
        Nats(self.0 + rhs.0)
    }
}

impl<F: Real> std::iter::Sum for Nats<F> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Nats::new(csum(iter.map(|x| x.0)))
    }
}

impl<F: Real> fmt::Display for Nats<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Shannon entropy `-sum p log p`.
pub fn entropy<F: Real>(p: &[F]) -> Nats<F> {
    Nats::new(-csum(p.iter().filter(|&&x| x > F::zero()).map(|&x| x * x.ln())))
}

/// `D(P || Q)`; `+inf` iff `P` is not absolutely continuous w.r.t. `Q`.
pub fn relative_entropy<F: Real>(p: &[F], q: &[F]) -> Nats<F> {
    assert_eq!(p.len(), q.len(), "distributions on different index sets");
    let mut terms = Vec::with_capacity(p.len());
    for (&x, &y) in p.iter().zip(q) {
        if x > F::zero() {
            if y == F::zero() {
                return Nats::infinity();
            }
            terms.push(x * (x / y).ln());
        }
    }
    Nats::new(csum(terms))
}

/// Half the L1 distance, equal to `sup_B |P(B) - Q(B)|`.
pub fn total_variation<F: Real>(p: &[F], q: &[F]) -> F {
    assert_eq!(p.len(), q.len(), "distributions on different index sets");
    csum(p.iter().zip(q).map(|(&x, &y)| (x - y).abs())) / F::lit(2.0)
}

/// Relative entropy of two exchangeable laws given per-sequence probabilities
/// over the same type space.
pub(crate) fn relative_entropy_types<F: Real>(space: &TypeSpace, p: &[F], q: &[F]) -> Nats<F> {
    let mut terms = Vec::with_capacity(p.len());
    for (i, (&x, &y)) in p.iter().zip(q).enumerate() {
        if x > F::zero() {
            if y == F::zero() {
                return Nats::infinity();
            }
            terms.push(F::from_count(space.multiplicity(i)) * x * (x / y).ln());
        }
    }
    Nats::new(csum(terms))
}

pub(crate) fn total_variation_types<F: Real>(space: &TypeSpace, p: &[F], q: &[F]) -> F {
    csum(
        p.iter()
            .zip(q)
            .enumerate()
            .map(|(i, (&x, &y))| F::from_count(space.multiplicity(i)) * (x - y).abs()),
    ) / F::lit(2.0)
}

/// `I(X; Y) = D(P_XY || P_X x P_Y)` for the two blocks of `bj`.
pub fn mutual_information<F: Real>(bj: &BlockJoint<F>) -> Nats<F> {
    let pa = bj.first_marginal();
    let pb = bj.second_marginal();
    let (na, nb) = (bj.first().count(), bj.second().count());
    let mut terms = Vec::with_capacity(na * nb);
    for ia in 0..na {
        for ib in 0..nb {
            let j = bj.get(ia, ib);
            if j > F::zero() {
                terms.push(bj.pair_mass(ia, ib) * (j / (pa[ia] * pb[ib])).ln());
            }
        }
    }
    Nats::new(csum(terms))
}

/// `I(X_1^{i-1}; X_i | Z)` where `Z` is a disjoint block of length `c`.
pub fn conditional_mutual_information<F: Real>(
    law: &ExchangeableLaw<F>,
    i: usize,
    c: usize,
) -> Result<Nats<F>> {
    if i == 0 || i + c > law.n() {
        return Err(invalid_arg(format!(
            "need 1 <= i and i + c <= n, got i = {i}, c = {c}, n = {}",
            law.n()
        )));
    }
    Ok(cmi_from_tower(&law.marginal(i + c)?.tower()?, i, c))
}

/// Conditional mutual information computed from a tower of marginals that
/// reaches at least length `i + c`.
pub(crate) fn cmi_from_tower<F: Real>(tower: &Tower<F>, i: usize, c: usize) -> Nats<F> {
    if i == 1 {
        return Nats::zero();
    }
    let joint = tower.level(i + c);
    let cond = tower.level(c);
    let alphabet = joint.alphabet();
    let first = TypeSpace::new(alphabet, i - 1).expect("length within range");
    let second = TypeSpace::new(alphabet, 1).expect("length within range");
    let mut terms = Vec::with_capacity(cond.space().count());
    for (iw, w) in cond.space().types().iter().enumerate() {
        let pw = cond.seq_probs()[iw];
        if pw <= F::zero() {
            continue;
        }
        let mut inner = Vec::with_capacity(first.count() * second.count());
        for ta in first.types() {
            let base = ta.plus(w);
            for y in second.types() {
                inner.push(joint.seq_prob(&base.plus(y)) / pw);
            }
        }
        let bj = BlockJoint::from_parts_unchecked(first.clone(), second.clone(), inner);
        terms.push(cond.class_mass(iw) * mutual_information(&bj).value());
    }
    Nats::new(csum(terms))
}

/// `I(first block of length a; disjoint block of length b)`.
pub(crate) fn block_mi_from_tower<F: Real>(tower: &Tower<F>, a: usize, b: usize) -> Nats<F> {
    if a == 0 || b == 0 {
        return Nats::zero();
    }
    let bj = BlockJoint::split(tower.level(a + b), a).expect("block sizes within n");
    mutual_information(&bj)
}

/// Chain-rule decomposition of the total correlation of an arbitrary joint:
/// returns `D(P || prod_i P_i)` and the terms `I(Z_1^{i-1}; Z_i)`, `i = 1..L`.
pub fn chain_rule_decomposition<F: Real>(j: &GenericJoint<F>) -> (Nats<F>, Vec<Nats<F>>) {
    let m = j.alphabet().size();
    let total = relative_entropy(j.probs(), j.product_of_marginals().probs());
    let mut terms = Vec::with_capacity(j.len());
    for i in 1..=j.len() {
        let cur = j.prefix_marginal(i);
        let prev = j.prefix_marginal(i - 1);
        let letter = j.coordinate_marginal(i - 1);
        let mut acc = Vec::with_capacity(cur.probs().len());
        for (idx, &p) in cur.probs().iter().enumerate() {
            if p > F::zero() {
                acc.push(p * (p / (prev.probs()[idx / m] * letter.prob(idx % m))).ln());
            }
        }
        terms.push(Nats::new(csum(acc)));
    }
    (total, terms)
}

/// Both sides of the tail chain rule for `1 <= i <= k <= n-1`:
/// `sum_{m=k}^{n} I(X_1^{i-1}; X_i | X_{k+1}^m)` and `I(X_1^{i-1}; X_k^n)`.
/// For exchangeable laws the two agree.
pub fn tail_chain_rule<F: Real>(
    law: &ExchangeableLaw<F>,
    i: usize,
    k: usize,
) -> Result<(Nats<F>, Nats<F>)> {
    let n = law.n();
    if !(1 <= i && i <= k && k < n) {
        return Err(invalid_arg(format!(
            "need 1 <= i <= k <= n-1, got i = {i}, k = {k}, n = {n}"
        )));
    }
    Ok(tail_chain_from_tower(&law.tower()?, i, k))
}

pub(crate) fn tail_chain_from_tower<F: Real>(tower: &Tower<F>, i: usize, k: usize) -> (Nats<F>, Nats<F>) {
    let n = tower.n();
    let lhs = (k..=n).map(|m| cmi_from_tower(tower, i, m - k)).sum();
    let rhs = block_mi_from_tower(tower, i - 1, n - k + 1);
    (lhs, rhs)
}

/// Entropy of the first block of a [`BlockJoint`].
pub fn first_block_entropy<F: Real>(bj: &BlockJoint<F>) -> Nats<F> {
    let pa = bj.first_marginal();
    let s = bj.first();
    Nats::new(-csum(pa.iter().enumerate().filter(|(_, &p)| p > F::zero()).map(
        |(i, &p)| F::from_count(s.multiplicity(i)) * p * p.ln(),
    )))
}

/// Entropy of an exchangeable law.
pub fn law_entropy<F: Real>(law: &ExchangeableLaw<F>) -> Nats<F> {
    let s = law.space();
    Nats::new(-csum(
        law.seq_probs()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > F::zero())
            .map(|(i, &p)| F::from_count(s.multiplicity(i)) * p * p.ln()),
    ))
}
