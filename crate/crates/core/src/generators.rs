//! Canonical exchangeable families.
//!
//! Random laws use `ChaCha8Rng` seeded with `seed_from_u64`, which is
//! specified independently of platform and word size, and draw Gamma
//! variates with `rand_distr`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};
use crate::exch::{Alphabet, ExchangeableLaw, LetterDist, TypeSpace};
use crate::scalar::{csum, Real};

/// Product law `Q^n`.
pub fn iid<F: Real>(dist: &LetterDist<F>, n: usize) -> Result<ExchangeableLaw<F>> {
    ExchangeableLaw::iid(dist, n)
}

/// `q(T) = sum_j w_j prod_a Q_j(a)^{T_a}`.
pub fn iid_mixture<F: Real>(
    components: &[(F, LetterDist<F>)],
    n: usize,
) -> Result<ExchangeableLaw<F>> {
    let first = components
        .first()
        .ok_or_else(|| invalid_arg("mixture needs at least one component"))?;
    let alphabet = first.1.alphabet();
    if components.iter().any(|(_, c)| c.alphabet() != alphabet) {
        return Err(invalid_arg("mixture components over different alphabets"));
    }
    if components.iter().any(|(w, _)| !w.is_finite() || *w < F::zero()) {
        return Err(invalid_arg("mixture weights must be nonnegative"));
    }
    let total = csum(components.iter().map(|(w, _)| *w));
    if (total - F::one()).abs() > F::norm_tol() {
        return Err(invalid_arg(format!("mixture weights sum to {total}, not 1")));
    }
    ExchangeableLaw::from_seq_fn(alphabet, n, |t| {
        csum(components.iter().map(|(w, c)| *w * c.sequence_prob(t)))
    })
}

/// Pólya urn started from `initial` balls of each colour, drawing `n` times
/// with one extra ball of the drawn colour returned each time.
pub fn polya<F: Real>(initial: &[u32], n: usize) -> Result<ExchangeableLaw<F>> {
    if initial.is_empty() || initial.contains(&0) {
        return Err(invalid_arg("Pólya urn needs positive initial counts"));
    }
    let alphabet = Alphabet::new(initial.len())?;
    let total: u32 = initial.iter().sum();
    let denom = rising::<F>(total, n as u32);
    ExchangeableLaw::from_seq_fn(alphabet, n, |t| {
        initial
            .iter()
            .zip(t.counts())
            .fold(F::one(), |acc, (&a, &c)| acc * rising::<F>(a, c))
            / denom
    })
}

/// Draws `n` balls without replacement from an urn holding `counts[a]` balls
/// of colour `a`.
pub fn urn_without_replacement<F: Real>(counts: &[u32], n: usize) -> Result<ExchangeableLaw<F>> {
    if counts.is_empty() {
        return Err(invalid_arg("urn needs at least one colour"));
    }
    let total: u32 = counts.iter().sum();
    if n as u128 > total as u128 {
        return Err(Error::Range {
            what: "draws without replacement",
            value: n as u128,
            limit: total as u128,
        });
    }
    let alphabet = Alphabet::new(counts.len())?;
    let denom = falling::<F>(total, n as u32);
    ExchangeableLaw::from_seq_fn(alphabet, n, |t| {
        counts
            .iter()
            .zip(t.counts())
            .fold(F::one(), |acc, (&a, &c)| acc * falling::<F>(a, c))
            / denom
    })
}

/// The exchangeable pair `P(1,0) = P(0,1) = 1/2`, which is not a mixture of
/// i.i.d. pairs.
pub fn diaconis_pair<F: Real>() -> ExchangeableLaw<F> {
    urn_without_replacement(&[1, 1], 2).expect("valid urn")
}

/// Random law with type-class masses drawn from a symmetric Dirichlet(`alpha`)
/// over the classes, so `q(T) = g_T / mult(T)`.
pub fn random_dirichlet<F: Real>(
    seed: u64,
    alphabet_size: usize,
    n: usize,
    alpha: f64,
) -> Result<ExchangeableLaw<F>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(invalid_arg(format!("concentration must be positive, got {alpha}")));
    }
    let alphabet = Alphabet::new(alphabet_size)?;
    let space = TypeSpace::new(alphabet, n)?;
    let gamma = Gamma::new(alpha, 1.0).map_err(|e| invalid_arg(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<f64> = (0..space.count()).map(|_| gamma.sample(&mut rng)).collect();
    let total = csum(draws.iter().copied());
    if !(total > 0.0) {
        return Err(invalid_arg(format!(
            "all Dirichlet draws underflowed for alpha = {alpha}"
        )));
    }
    let masses: Vec<F> = draws.iter().map(|g| F::lit(g / total)).collect();
    ExchangeableLaw::from_class_masses(alphabet, n, &masses)
}

fn rising<F: Real>(a: u32, c: u32) -> F {
    (0..c).fold(F::one(), |acc, j| acc * F::from_count((a + j) as u128))
}

fn falling<F: Real>(a: u32, c: u32) -> F {
    if c > a {
        return F::zero();
    }
    (0..c).fold(F::one(), |acc, j| acc * F::from_count((a - j) as u128))
}

/// Serializable description of a generated law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Iid {
        component: Vec<f64>,
    },
    IidMixture {
        components: Vec<Vec<f64>>,
        weights: Vec<f64>,
    },
    Polya {
        counts: Vec<u32>,
    },
    Urn {
        counts: Vec<u32>,
    },
    DiaconisPair,
    RandomDirichlet {
        alphabet_size: usize,
        concentration: f64,
        seed: u64,
    },
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Self {
        Self { kind, n }
    }

    /// The same family at another length.
    pub fn with_n(&self, n: usize) -> Self {
        Self {
            kind: self.kind.clone(),
            n,
        }
    }

    pub fn build<F: Real>(&self) -> Result<ExchangeableLaw<F>> {
        let n = self.n;
        match &self.kind {
            GeneratorKind::Iid { component } => iid(&letter(component)?, n),
            GeneratorKind::IidMixture {
                components,
                weights,
            } => {
                if components.len() != weights.len() {
                    return Err(invalid_arg(format!(
                        "{} components but {} weights",
                        components.len(),
                        weights.len()
                    )));
                }
                let parts = components
                    .iter()
                    .zip(weights)
                    .map(|(c, &w)| Ok((F::lit(w), letter(c)?)))
                    .collect::<Result<Vec<_>>>()?;
                iid_mixture(&parts, n)
            }
            GeneratorKind::Polya { counts } => polya(counts, n),
            GeneratorKind::Urn { counts } => urn_without_replacement(counts, n),
            GeneratorKind::DiaconisPair => {
                if n != 2 {
                    return Err(invalid_arg("the Diaconis pair has n = 2"));
                }
                Ok(diaconis_pair())
            }
            GeneratorKind::RandomDirichlet {
                alphabet_size,
                concentration,
                seed,
            } => random_dirichlet(*seed, *alphabet_size, n, *concentration),
        }
    }
}

fn letter<F: Real>(p: &[f64]) -> Result<LetterDist<F>> {
    LetterDist::new(p.iter().map(|&x| F::lit(x)).collect())
}
