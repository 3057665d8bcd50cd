use crate::error::{invalid_arg, Result};
use crate::exch::law::ExchangeableLaw;
use crate::exch::types::TypeSpace;
use crate::scalar::{csum, Real};

/// Joint law of two disjoint coordinate blocks, indexed by the type of each
/// block. Entries are per sequence pair: the pair of classes `(Ta, Tb)`
/// carries mass `mult(Ta) * mult(Tb) * joint(Ta, Tb)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJoint<F> {
    first: TypeSpace,
    second: TypeSpace,
    joint: Vec<F>,
}

impl<F: Real> BlockJoint<F> {
    pub fn new(first: TypeSpace, second: TypeSpace, joint: Vec<F>) -> Result<Self> {
        if first.alphabet() != second.alphabet() {
            return Err(invalid_arg("blocks over different alphabets"));
        }
        if joint.len() != first.count() * second.count() {
            return Err(invalid_arg(format!(
                "block joint needs {} entries, got {}",
                first.count() * second.count(),
                joint.len()
            )));
        }
        if joint.iter().any(|x| !x.is_finite() || *x < F::zero()) {
            return Err(invalid_arg("block joint has a negative or non-finite entry"));
        }
        let bj = Self {
            first,
            second,
            joint,
        };
        let total = bj.total_mass();
        if (total - F::one()).abs() > F::norm_tol() {
            return Err(invalid_arg(format!("block joint sums to {total}, not 1")));
        }
        Ok(bj)
    }

    /// Splits a law on `A^(a+b)` into its first `a` and last `b` coordinates.
    /// By exchangeability the result is the joint of any two disjoint blocks
    /// of those sizes.
    pub fn split(law: &ExchangeableLaw<F>, a: usize) -> Result<Self> {
        let total = law.n();
        if a > total {
            return Err(invalid_arg(format!("block of size {a} exceeds n = {total}")));
        }
        let first = TypeSpace::new(law.alphabet(), a)?;
        let second = TypeSpace::new(law.alphabet(), total - a)?;
        let mut joint = Vec::with_capacity(first.count() * second.count());
        for ta in first.types() {
            for tb in second.types() {
                joint.push(law.seq_prob_counts(ta.plus(tb).counts()));
            }
        }
        Ok(Self {
            first,
            second,
            joint,
        })
    }

    pub(crate) fn from_parts_unchecked(first: TypeSpace, second: TypeSpace, joint: Vec<F>) -> Self {
        Self {
            first,
            second,
            joint,
        }
    }

    pub fn first(&self) -> &TypeSpace {
        &self.first
    }

    pub fn second(&self) -> &TypeSpace {
        &self.second
    }

    /// Per-sequence-pair probability for type indices `(ia, ib)`.
    pub fn get(&self, ia: usize, ib: usize) -> F {
        self.joint[ia * self.second.count() + ib]
    }

    pub fn entries(&self) -> &[F] {
        &self.joint
    }

    /// Class mass of the pair `(ia, ib)`.
    pub fn pair_mass(&self, ia: usize, ib: usize) -> F {
        F::from_count(self.first.multiplicity(ia))
            * F::from_count(self.second.multiplicity(ib))
            * self.get(ia, ib)
    }

    pub fn total_mass(&self) -> F {
        csum(
            (0..self.first.count())
                .flat_map(|ia| (0..self.second.count()).map(move |ib| (ia, ib)))
                .map(|(ia, ib)| self.pair_mass(ia, ib)),
        )
    }

    /// Per-sequence law of the first block.
    pub fn first_marginal(&self) -> Vec<F> {
        (0..self.first.count())
            .map(|ia| {
                csum((0..self.second.count()).map(|ib| {
                    F::from_count(self.second.multiplicity(ib)) * self.get(ia, ib)
                }))
            })
            .collect()
    }

    /// Per-sequence law of the second block.
    pub fn second_marginal(&self) -> Vec<F> {
        (0..self.second.count())
            .map(|ib| {
                csum((0..self.first.count()).map(|ia| {
                    F::from_count(self.first.multiplicity(ia)) * self.get(ia, ib)
                }))
            })
            .collect()
    }

    /// The same joint with the blocks swapped.
    pub fn transpose(&self) -> Self {
        let (na, nb) = (self.first.count(), self.second.count());
        let mut joint = Vec::with_capacity(na * nb);
        for ib in 0..nb {
            for ia in 0..na {
                joint.push(self.get(ia, ib));
            }
        }
        Self {
            first: self.second.clone(),
            second: self.first.clone(),
            joint,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exch::joint::LetterDist;
    use crate::exch::types::{Alphabet, TypeVector};

    #[test]
    fn iid_block_joint_is_product() {
        let q = LetterDist::new(vec![0.2f64, 0.8]).unwrap();
        let law = ExchangeableLaw::iid(&q, 5).unwrap();
        let bj = law.block_joint(2, 3).unwrap();
        let pa = bj.first_marginal();
        let pb = bj.second_marginal();
        for ia in 0..bj.first().count() {
            for ib in 0..bj.second().count() {
                assert!((bj.get(ia, ib) - pa[ia] * pb[ib]).abs() < 1e-15);
            }
        }
        let direct = law.marginal(2).unwrap();
        for (x, y) in pa.iter().zip(direct.seq_probs()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_first_block_reduces_to_marginal() {
        let law = ExchangeableLaw::from_class_masses(Alphabet::binary(), 3, &[0.1f64, 0.2, 0.3, 0.4])
            .unwrap();
        let bj = law.block_joint(0, 2).unwrap();
        assert_eq!(bj.first().count(), 1);
        let m2 = law.marginal(2).unwrap();
        assert_eq!(bj.entries(), m2.seq_probs());
    }

    #[test]
    fn transpose_round_trip() {
        let law = ExchangeableLaw::from_class_masses(Alphabet::binary(), 3, &[0.1f64, 0.2, 0.3, 0.4])
            .unwrap();
        let bj = law.block_joint(1, 2).unwrap();
        assert_eq!(bj.transpose().transpose(), bj);
        let t = bj.transpose();
        let ia = bj.first().rank(TypeVector::unit(Alphabet::binary(), 0).counts());
        let ib = bj.second().rank(&[1, 1]);
        assert_eq!(bj.get(ia, ib), t.get(ib, ia));
    }

    #[test]
    fn validation() {
        let a = Alphabet::binary();
        let s1 = TypeSpace::new(a, 1).unwrap();
        assert!(BlockJoint::new(s1.clone(), s1.clone(), vec![0.25f64; 4]).is_ok());
        assert!(BlockJoint::new(s1.clone(), s1.clone(), vec![0.3f64; 4]).is_err());
        assert!(BlockJoint::new(s1.clone(), s1, vec![0.25f64; 3]).is_err());
    }
}
