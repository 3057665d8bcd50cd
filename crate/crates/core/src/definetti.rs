//! Constructive finite de Finetti approximation.
//!
//! For an exchangeable law on `A^n` and `1 <= k <= n-1`, the mixing measure
//! is the law of the conditional distribution of `X_1` given a block
//! `X_{k+1}^{m*}`, with the block end `m*` picked so that the summed
//! conditional informations
//! `sum_{i=1}^k I(X_1^{i-1}; X_i | X_{k+1}^{m*})` is minimal over
//! `m* in {k, .., n}`. The relative entropy between the `k`-marginal and
//! the resulting mixture of i.i.d. laws is then bounded by
//!
//! ```text
//! D <= (1/(n-k+1)) sum_{i=1}^k I(X_1^{i-1}; X_k^n)
//!   <= k(k-1) / (2(n-k+1)) * H(X_1)
//!   <= k(k-1) / (2(n-k+1)) * log |A|
//! ```
//!
//! [`certify`] evaluates every quantity in this chain and fails loudly if
//! any link is violated beyond tolerance.

use crate::error::{invalid_arg, Error, Result};
use crate::exch::{
    conditional_component_from, single_letter_of, ExchangeableLaw, GenericJoint, LetterDist,
    Tower, TypeSpace, TypeVector,
};
use crate::info::{
    block_mi_from_tower, cmi_from_tower, entropy, relative_entropy_types, total_variation_types,
    Nats,
};
use crate::scalar::{csum, Real};

/// Default slack for every certified inequality.
pub const CERTIFY_SLACK: f64 = 1e-9;

/// One atom of a finite mixing measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom<F> {
    pub weight: F,
    pub component: LetterDist<F>,
    /// Type of the conditioning block that produced this atom, if any.
    pub conditioning: Option<TypeVector>,
}

/// A finitely supported probability measure on single-letter laws.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMeasure<F> {
    atoms: Vec<Atom<F>>,
    /// `(k, m*)` when built from a law.
    provenance: Option<(usize, usize)>,
}

impl<F: Real> MixingMeasure<F> {
    /// A measure from explicit `(weight, component)` pairs.
    pub fn new(atoms: Vec<(F, LetterDist<F>)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid_arg("mixing measure needs at least one atom"));
        }
        let m = atoms[0].1.probs().len();
        if atoms.iter().any(|(_, c)| c.probs().len() != m) {
            return Err(invalid_arg("mixture components over different alphabets"));
        }
        if atoms.iter().any(|(w, _)| !w.is_finite() || *w < F::zero()) {
            return Err(invalid_arg("mixing weights must be nonnegative"));
        }
        let total = csum(atoms.iter().map(|(w, _)| *w));
        if (total - F::one()).abs() > F::norm_tol() {
            return Err(invalid_arg(format!("mixing weights sum to {total}, not 1")));
        }
        Ok(Self {
            atoms: atoms
                .into_iter()
                .map(|(weight, component)| Atom {
                    weight,
                    component,
                    conditioning: None,
                })
                .collect(),
            provenance: None,
        })
    }

    pub fn atoms(&self) -> &[Atom<F>] {
        &self.atoms
    }

    pub fn weights(&self) -> Vec<F> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn components(&self) -> Vec<LetterDist<F>> {
        self.atoms.iter().map(|a| a.component.clone()).collect()
    }

    pub fn provenance(&self) -> Option<(usize, usize)> {
        self.provenance
    }

    /// The mixture `M_k = sum_j w_j Q_j^k` as an exchangeable law.
    pub fn mixture_law(&self, k: usize) -> Result<ExchangeableLaw<F>> {
        let alphabet = self.atoms[0].component.alphabet();
        let space = TypeSpace::new(alphabet, k)?;
        let q = space
            .types()
            .iter()
            .map(|t| csum(self.atoms.iter().map(|a| a.weight * a.component.sequence_prob(t))))
            .collect();
        Ok(ExchangeableLaw::from_parts_unchecked(space, q))
    }
}

/// `M_k(x) = sum_atoms weight * prod_j component(x_j)` on `A^k`.
pub fn mixture_dist<F: Real>(mu: &MixingMeasure<F>, k: usize) -> Result<GenericJoint<F>> {
    mu.mixture_law(k)?.densify()
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(invalid_arg(format!(
            "k must satisfy 1 <= k <= n-1 (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

/// `I(X_1^{i-1}; X_k^n)` for `1 <= i <= k <= n-1`.
pub fn tail_mi<F: Real>(law: &ExchangeableLaw<F>, i: usize, k: usize) -> Result<Nats<F>> {
    check_k(law.n(), k)?;
    if i == 0 || i > k {
        return Err(invalid_arg(format!("i must satisfy 1 <= i <= k (i = {i}, k = {k})")));
    }
    Ok(block_mi_from_tower(&law.tower()?, i - 1, law.n() - k + 1))
}

/// `sum_{i=1}^k I(X_1^{i-1}; X_i | X_{k+1}^m)` for `k <= m <= n`.
pub fn cond_mi_sum<F: Real>(law: &ExchangeableLaw<F>, k: usize, m: usize) -> Result<Nats<F>> {
    if k == 0 || m < k || m > law.n() {
        return Err(invalid_arg(format!(
            "need 1 <= k <= m <= n (k = {k}, m = {m}, n = {})",
            law.n()
        )));
    }
    Ok(cond_mi_sum_tower(&law.tower()?, k, m))
}

pub(crate) fn cond_mi_sum_tower<F: Real>(tower: &Tower<F>, k: usize, m: usize) -> Nats<F> {
    (1..=k).map(|i| cmi_from_tower(tower, i, m - k)).sum()
}

/// The block end `m*` minimizing [`cond_mi_sum`] over `{k, .., n}` (smallest
/// index on ties), with the minimal value.
pub fn select_mstar<F: Real>(law: &ExchangeableLaw<F>, k: usize) -> Result<(usize, Nats<F>)> {
    check_k(law.n(), k)?;
    let values = cond_mi_profile(&law.tower()?, k);
    Ok(argmin(k, &values))
}

fn cond_mi_profile<F: Real>(tower: &Tower<F>, k: usize) -> Vec<Nats<F>> {
    (k..=tower.n()).map(|m| cond_mi_sum_tower(tower, k, m)).collect()
}

/// Smallest index whose value is within rounding of the minimum. Values that
/// differ by less than `64 * epsilon` (absolute) count as ties.
fn argmin<F: Real>(k: usize, values: &[Nats<F>]) -> (usize, Nats<F>) {
    let min = values
        .iter()
        .map(|v| v.value())
        .fold(F::infinity(), F::min);
    let tie = F::epsilon() * F::lit(64.0);
    let best = values
        .iter()
        .position(|v| v.value() <= min + tie)
        .expect("nonempty profile");
    (k + best, values[best])
}

/// Mixing measure given by the law of `P(X_1 = . | X_{k+1}^{m*})`, one atom
/// per conditioning type of positive probability.
pub fn build_mixing_measure<F: Real>(
    law: &ExchangeableLaw<F>,
    k: usize,
    m_star: usize,
) -> Result<MixingMeasure<F>> {
    if k == 0 || m_star < k || m_star > law.n() {
        return Err(invalid_arg(format!(
            "need 1 <= k <= m* <= n (k = {k}, m* = {m_star}, n = {})",
            law.n()
        )));
    }
    build_from_tower(&law.tower()?, k, m_star)
}

fn build_from_tower<F: Real>(tower: &Tower<F>, k: usize, m_star: usize) -> Result<MixingMeasure<F>> {
    let b = m_star - k;
    let lower = tower.level(b);
    let upper = tower.level(b + 1);
    let mut atoms = Vec::new();
    for (iw, w) in lower.space().types().iter().enumerate() {
        if lower.seq_probs()[iw] <= F::zero() {
            continue;
        }
        atoms.push(Atom {
            weight: lower.class_mass(iw),
            component: conditional_component_from(upper, lower, w)?,
            conditioning: Some(w.clone()),
        });
    }
    Ok(MixingMeasure {
        atoms,
        provenance: Some((k, m_star)),
    })
}

/// Every certified quantity for one `(law, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<F> {
    pub n: usize,
    pub k: usize,
    pub alphabet_size: usize,
    pub m_star: usize,
    /// `D(P_{X_1^k} || M_{k,mu})` for the constructed measure.
    pub d: F,
    /// `(1/(n-k+1)) sum_i I(X_1^{i-1}; X_k^n)`.
    pub thm_bound: F,
    pub cor_bound_h: F,
    pub cor_bound_log_a: F,
    pub tv: F,
    pub pinsker_tv: F,
    /// Classical total variation rate `k(k-1)/(2n)`, for reference.
    pub df_tv_ref: F,
    /// `5 k^2 log n / (n-k)`, binary alphabets only.
    pub first_bound: Option<F>,
    /// `(k / sqrt n)^(1/2) log(n/k)`: a rate with unit constant, not a bound.
    pub second_rate: F,
    pub atom_count: usize,
    /// `H(X_1)`.
    pub entropy_x1: F,
    /// Summed conditional informations at `m*`.
    pub mstar_value: F,
    /// Average of the summed conditional informations over `m in {k, .., n}`.
    pub cond_mi_average: F,
}

impl<F: Real> Certificate<F> {
    pub fn to_f64(&self) -> Certificate<f64> {
        Certificate {
            n: self.n,
            k: self.k,
            alphabet_size: self.alphabet_size,
            m_star: self.m_star,
            d: self.d.as_f64(),
            thm_bound: self.thm_bound.as_f64(),
            cor_bound_h: self.cor_bound_h.as_f64(),
            cor_bound_log_a: self.cor_bound_log_a.as_f64(),
            tv: self.tv.as_f64(),
            pinsker_tv: self.pinsker_tv.as_f64(),
            df_tv_ref: self.df_tv_ref.as_f64(),
            first_bound: self.first_bound.map(Real::as_f64),
            second_rate: self.second_rate.as_f64(),
            atom_count: self.atom_count,
            entropy_x1: self.entropy_x1.as_f64(),
            mstar_value: self.mstar_value.as_f64(),
            cond_mi_average: self.cond_mi_average.as_f64(),
        }
    }

    /// First violated inequality of the certified chain, if any.
    pub fn violation(&self, slack: F) -> Option<String> {
        let checks = [
            ("D <= sum of conditional informations at m*", self.d, self.mstar_value),
            ("value at m* <= tail MI bound", self.mstar_value, self.thm_bound),
            ("D <= tail MI bound", self.d, self.thm_bound),
            ("tail MI bound <= entropy bound", self.thm_bound, self.cor_bound_h),
            ("entropy bound <= log|A| bound", self.cor_bound_h, self.cor_bound_log_a),
            ("TV <= Pinsker bound", self.tv, self.pinsker_tv),
        ];
        checks.iter().find_map(|(name, lo, hi)| {
            let ok = lo.is_finite() && hi.is_finite() && *lo <= *hi + slack;
            (!ok).then(|| format!("{name}: {lo} > {hi} + {slack}"))
        })
    }
}

/// Constructed measure plus its certificate.
#[derive(Debug, Clone)]
pub struct Certified<F> {
    pub certificate: Certificate<F>,
    pub measure: MixingMeasure<F>,
    /// The `k`-marginal of the input law.
    pub marginal: ExchangeableLaw<F>,
    /// The mixture law on `A^k`.
    pub mixture: ExchangeableLaw<F>,
}

/// Runs the full construction with the default slack.
pub fn certify<F: Real>(law: &ExchangeableLaw<F>, k: usize) -> Result<Certificate<F>> {
    certify_with(law, k, F::lit(CERTIFY_SLACK)).map(|c| c.certificate)
}

/// Runs the full construction and checks every inequality with `slack`.
pub fn certify_with<F: Real>(law: &ExchangeableLaw<F>, k: usize, slack: F) -> Result<Certified<F>> {
    let n = law.n();
    check_k(n, k)?;
    let tower = law.tower()?;
    let run = evaluate(&tower, k)?;
    if let Some(violation) = run.certificate.violation(slack) {
        return Err(Error::CertificationFailure {
            violation,
            certificate: Box::new(run.certificate.to_f64()),
        });
    }
    Ok(run)
}

/// The construction without the final checks.
fn evaluate<F: Real>(tower: &Tower<F>, k: usize) -> Result<Certified<F>> {
    let n = tower.n();
    let alphabet = tower.full().alphabet();
    let m = alphabet.size();
    let tail_len = n - k + 1;
    let denom = F::from_count(tail_len as u128);

    let tail_sum: Nats<F> = (1..=k).map(|i| block_mi_from_tower(tower, i - 1, tail_len)).sum();
    let thm_bound = tail_sum.value() / denom;

    let profile = cond_mi_profile(tower, k);
    let cond_mi_average = csum(profile.iter().map(|v| v.value())) / denom;
    let (m_star, mstar_value) = argmin(k, &profile);

    let measure = build_from_tower(tower, k, m_star)?;
    let marginal = tower.level(k).clone();
    let mixture = measure.mixture_law(k)?;
    let d = relative_entropy_types(marginal.space(), marginal.seq_probs(), mixture.seq_probs());
    let tv = total_variation_types(marginal.space(), marginal.seq_probs(), mixture.seq_probs());

    let entropy_x1 = entropy(single_letter_of(tower.level(1)).probs()).value();
    let kf = F::from_count(k as u128);
    let nf = F::from_count(n as u128);
    let two = F::lit(2.0);
    let pair_factor = kf * (kf - F::one()) / (two * denom);
    let certificate = Certificate {
        n,
        k,
        alphabet_size: m,
        m_star,
        d: d.value(),
        thm_bound,
        cor_bound_h: pair_factor * entropy_x1,
        cor_bound_log_a: pair_factor * F::from_count(m as u128).ln(),
        tv,
        pinsker_tv: (thm_bound / two).sqrt(),
        df_tv_ref: kf * (kf - F::one()) / (two * nf),
        first_bound: (m == 2)
            .then(|| F::lit(5.0) * kf * kf * nf.ln() / F::from_count((n - k) as u128)),
        second_rate: (kf / nf.sqrt()).sqrt() * (nf / kf).ln(),
        atom_count: measure.atoms().len(),
        entropy_x1,
        mstar_value: mstar_value.value(),
        cond_mi_average,
    };
    Ok(Certified {
        certificate,
        measure,
        marginal,
        mixture,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exch::Alphabet;

    fn polya11(n: usize) -> ExchangeableLaw<f64> {
        // Per-sequence probability with j ones out of n: j!(n-j)!/(n+1)!
        ExchangeableLaw::from_seq_fn(Alphabet::binary(), n, |t| {
            let fact = |x: u32| (1..=x).map(f64::from).product::<f64>();
            fact(t.counts()[0]) * fact(t.counts()[1]) / fact(n as u32 + 1)
        })
        .unwrap()
    }

    #[test]
    fn iid_law_certifies_with_zero_gap() {
        let q = LetterDist::new(vec![0.2f64, 0.5, 0.3]).unwrap();
        let law = ExchangeableLaw::iid(&q, 6).unwrap();
        for k in 1..6 {
            let c = certify(&law, k).unwrap();
            assert!(c.d <= 1e-12 && c.thm_bound <= 1e-12, "{c:?}");
            assert_eq!(c.m_star, k);
        }
        let mu = build_mixing_measure(&law, 2, 4).unwrap();
        for atom in mu.atoms() {
            for (x, y) in atom.component.probs().iter().zip(q.probs()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k_one_is_exact() {
        let c = certify(&polya11(5), 1).unwrap();
        assert!(c.d <= 1e-12);
        assert_eq!(c.mstar_value, 0.0);
        assert_eq!(c.cor_bound_log_a, 0.0);
    }

    #[test]
    fn alphabet_bound_formula_values() {
        let law = polya11(10);
        let c = certify(&law, 3).unwrap();
        // 3*2/(2*8) * ln 2 = 0.375 ln 2
        assert!((c.cor_bound_log_a - 0.375 * 2f64.ln()).abs() < 1e-15);
        assert!((c.cor_bound_log_a - 0.259930).abs() < 1e-6);
        let c2 = certify(&law, 2).unwrap();
        // 5 * 4 * ln 10 / 8
        assert!((c2.first_bound.unwrap() - 5.756463).abs() < 1e-6);
        assert!((c2.df_tv_ref - 0.1).abs() < 1e-15);
    }

    #[test]
    fn empty_conditioning_gives_single_atom() {
        let law = polya11(4);
        let mu = build_mixing_measure(&law, 2, 2).unwrap();
        assert_eq!(mu.atoms().len(), 1);
        assert_eq!(mu.atoms()[0].weight, 1.0);
        assert!((mu.atoms()[0].component.prob(1) - 0.5).abs() < 1e-15);
        assert_eq!(mu.provenance(), Some((2, 2)));
    }

    #[test]
    fn mixture_of_two_symmetric_atoms_is_exchangeable() {
        let mu = MixingMeasure::new(vec![
            (0.5f64, LetterDist::bernoulli(0.2).unwrap()),
            (0.5, LetterDist::bernoulli(0.9).unwrap()),
        ])
        .unwrap();
        let j = mixture_dist(&mu, 2).unwrap();
        assert_eq!(j.prob(&[0, 1]), j.prob(&[1, 0]));
        assert!(crate::exch::is_exchangeable(&j, 1e-12).unwrap());
        let single = mixture_dist(&mu, 1).unwrap();
        assert!((single.prob(&[1]) - 0.55).abs() < 1e-15);
    }

    #[test]
    fn precondition_errors() {
        let law = polya11(4);
        assert!(certify(&law, 0).is_err());
        assert!(certify(&law, 4).is_err());
        assert!(tail_mi(&law, 3, 2).is_err());
        assert!(cond_mi_sum(&law, 2, 5).is_err());
        assert!(build_mixing_measure(&law, 2, 1).is_err());
        assert!(MixingMeasure::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn violation_reports_first_broken_link() {
        let mut c = certify(&polya11(6), 2).unwrap();
        assert!(c.violation(1e-9).is_none());
        c.d = c.thm_bound + 1.0;
        assert!(c.violation(1e-9).unwrap().starts_with("D <="));
    }

    #[test]
    fn f32_instantiation() {
        let law = ExchangeableLaw::from_seq_fn(Alphabet::binary(), 5, |t| {
            let fact = |x: u32| (1..=x).map(|v| v as f32).product::<f32>();
            fact(t.counts()[0]) * fact(t.counts()[1]) / fact(6)
        })
        .unwrap();
        let run = certify_with(&law, 2, 1e-5f32).unwrap();
        let c64 = certify(&polya11(5), 2).unwrap();
        assert!((run.certificate.d as f64 - c64.d).abs() < 1e-5);
        assert_eq!(run.certificate.m_star, c64.m_star);
    }
}
