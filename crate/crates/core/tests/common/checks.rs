//! Library-versus-oracle comparison shared by the equivalence tests and the
//! acceptance suite.

use definetti::definetti::{certify_with, cond_mi_sum, tail_mi, CERTIFY_SLACK};
use definetti::exch::ExchangeableLaw;
use definetti::info::{conditional_mutual_information, mutual_information};

use super::oracle::{index, representative, tv, Dense};

/// Largest absolute deviation seen, with a label for where it occurred.
#[derive(Debug, Default)]
pub struct Deviation {
    pub worst: f64,
    pub label: String,
    pub count: usize,
    pub failures: Vec<String>,
}

impl Deviation {
    fn see(&mut self, label: impl FnOnce() -> String, got: f64, want: f64) {
        self.count += 1;
        let err = if got == want { 0.0 } else { (got - want).abs() };
        if !(err <= self.worst) {
            self.worst = err;
            self.label = label();
        }
    }

    fn fail(&mut self, msg: String) {
        self.failures.push(msg);
    }
}

/// Compares marginals, block joints, conditionals, every MI and CMI value,
/// `m*`, `D`, the bound and the mixture values against the dense oracle.
pub fn compare(name: &str, law: &ExchangeableLaw<f64>, dev: &mut Deviation, tol: f64) {
    let dense = Dense::from_law(law);
    let m = dense.m;
    let n = law.n();

    for k in 1..=n {
        let lib = law.marginal(k).unwrap();
        let prefix = dense.prefix(k);
        for t in lib.space().types() {
            dev.see(|| format!("{name}: marginal k={k} {t:?}"), lib.seq_prob(t), prefix[index(&representative(t.counts()), m)]);
        }
    }

    for a in 1..n {
        for b in 1..=n - a {
            let bj = law.block_joint(a, b).unwrap();
            let prefix = dense.prefix(a + b);
            for (ia, ta) in bj.first().types().iter().enumerate() {
                for (ib, tb) in bj.second().types().iter().enumerate() {
                    let mut seq = representative(ta.counts());
                    seq.extend(representative(tb.counts()));
                    dev.see(|| format!("{name}: block ({a},{b})"), bj.get(ia, ib), prefix[index(&seq, m)]);
                }
            }
            let first: Vec<usize> = (0..a).collect();
            let second: Vec<usize> = (a..a + b).collect();
            dev.see(|| format!("{name}: I(block {a}; block {b})"), mutual_information(&bj).value(), dense.mi(&first, &second));
        }
    }

    for b in 0..n {
        let lower = law.marginal(b).unwrap();
        for (iw, w) in lower.space().types().iter().enumerate() {
            if lower.seq_probs()[iw] <= 0.0 {
                if law.conditional_component(b, w).is_ok() {
                    dev.fail(format!("{name}: conditional on null type {w:?} accepted"));
                }
                continue;
            }
            let lib = law.conditional_component(b, w).unwrap();
            let want = dense.conditional_first(&representative(w.counts()));
            for (a, (&x, &y)) in lib.probs().iter().zip(&want).enumerate() {
                dev.see(|| format!("{name}: P(X1={a} | {w:?})"), x, y);
            }
        }
    }

    for i in 1..=n {
        for c in 0..=n - i {
            let cond: Vec<usize> = (i..i + c).collect();
            let want = dense.cmi(&(0..i - 1).collect::<Vec<_>>(), &[i - 1], &cond);
            dev.see(|| format!("{name}: cmi i={i} c={c}"), conditional_mutual_information(law, i, c).unwrap().value(), want);
        }
    }

    for k in 1..n {
        for i in 1..=k {
            dev.see(|| format!("{name}: tail_mi i={i} k={k}"), tail_mi(law, i, k).unwrap().value(), dense.tail_mi(i, k));
        }
        let profile = dense.profile(k);
        for mm in k..=n {
            dev.see(|| format!("{name}: cond_mi_sum k={k} m={mm}"), cond_mi_sum(law, k, mm).unwrap().value(), profile[mm - k]);
        }

        let run = certify_with(law, k, CERTIFY_SLACK).unwrap();
        let c = &run.certificate;
        let min = profile.iter().copied().fold(f64::INFINITY, f64::min);
        let first_min = k + profile.iter().position(|&v| v <= min + tol).unwrap();
        if profile[c.m_star - k] > min + tol {
            dev.fail(format!("{name} k={k}: m* = {} is not a minimizer", c.m_star));
        }
        let separated = profile
            .iter()
            .enumerate()
            .filter(|&(j, _)| j + k != first_min)
            .all(|(_, &v)| v > min + 1e-9);
        if separated && c.m_star != first_min {
            dev.fail(format!("{name} k={k}: m* = {}, oracle {first_min}", c.m_star));
        }
        dev.see(|| format!("{name}: mstar_value k={k}"), c.mstar_value, profile[c.m_star - k]);
        dev.see(|| format!("{name}: D k={k}"), c.d, dense.d(k, c.m_star));
        dev.see(|| format!("{name}: thm_bound k={k}"), c.thm_bound, dense.thm_bound(k));
        dev.see(|| format!("{name}: H(X1)"), c.entropy_x1, dense.h(&[0]));
        let mix = dense.mixture(k, c.m_star);
        for t in run.mixture.space().types() {
            dev.see(|| format!("{name}: mixture k={k} {t:?}"), run.mixture.seq_prob(t), mix[index(&representative(t.counts()), m)]);
        }
        dev.see(|| format!("{name}: tv k={k}"), c.tv, tv(&dense.prefix(k), &mix));
    }
}
