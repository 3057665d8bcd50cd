//! Dense brute-force reference. Enumerates every sequence of `A^n` and works
//! with coordinate positions only; shares nothing with the type-class code
//! beyond reading the input law's per-sequence probabilities.

use definetti::exch::{ExchangeableLaw, TypeVector};

pub struct Dense {
    pub m: usize,
    pub n: usize,
    pub p: Vec<f64>,
}

pub fn digits(mut idx: usize, m: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    out
}

pub fn index(seq: &[usize], m: usize) -> usize {
    seq.iter().fold(0, |acc, &a| acc * m + a)
}

pub fn counts(seq: &[usize], m: usize) -> Vec<u32> {
    let mut c = vec![0u32; m];
    for &a in seq {
        c[a] += 1;
    }
    c
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            s += a * (a / b).ln();
        }
    }
    s
}

pub fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

impl Dense {
    pub fn from_law(law: &ExchangeableLaw<f64>) -> Self {
        let m = law.alphabet().size();
        let n = law.n();
        let total = m.pow(n as u32);
        let p = (0..total)
            .map(|i| law.seq_prob(&TypeVector::new(counts(&digits(i, m, n), m))))
            .collect();
        Self { m, n, p }
    }

    pub fn from_probs(m: usize, n: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), m.pow(n as u32));
        Self { m, n, p }
    }

    /// Law of the coordinates at `positions`, in that order.
    pub fn marg(&self, positions: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.m.pow(positions.len() as u32)];
        for (i, &x) in self.p.iter().enumerate() {
            let seq = digits(i, self.m, self.n);
            let sub: Vec<usize> = positions.iter().map(|&j| seq[j]).collect();
            out[index(&sub, self.m)] += x;
        }
        out
    }

    pub fn h(&self, positions: &[usize]) -> f64 {
        entropy(&self.marg(positions))
    }

    /// `I(A; B)`.
    pub fn mi(&self, a: &[usize], b: &[usize]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let ab: Vec<usize> = a.iter().chain(b).copied().collect();
        self.h(a) + self.h(b) - self.h(&ab)
    }

    /// `I(A; B | C)`.
    pub fn cmi(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let cat = |xs: &[&[usize]]| -> Vec<usize> { xs.iter().flat_map(|x| x.iter().copied()).collect() };
        self.h(&cat(&[a, c])) + self.h(&cat(&[b, c])) - self.h(&cat(&[a, b, c])) - self.h(c)
    }

    /// Prefix marginal on `A^k`.
    pub fn prefix(&self, k: usize) -> Vec<f64> {
        self.marg(&(0..k).collect::<Vec<_>>())
    }

    /// `sum_{i=1}^{k} I(X_1^{i-1}; X_i | X_{k+1}^m)` (1-based coordinates).
    pub fn cond_mi_sum(&self, k: usize, m: usize) -> f64 {
        let c: Vec<usize> = (k..m).collect();
        (1..=k)
            .map(|i| self.cmi(&(0..i - 1).collect::<Vec<_>>(), &[i - 1], &c))
            .sum()
    }

    /// `I(X_1^{i-1}; X_k^n)`.
    pub fn tail_mi(&self, i: usize, k: usize) -> f64 {
        self.mi(&(0..i - 1).collect::<Vec<_>>(), &(k - 1..self.n).collect::<Vec<_>>())
    }

    pub fn thm_bound(&self, k: usize) -> f64 {
        (1..=k).map(|i| self.tail_mi(i, k)).sum::<f64>() / (self.n - k + 1) as f64
    }

    /// Values of the conditional MI sum for `m = k..=n`.
    pub fn profile(&self, k: usize) -> Vec<f64> {
        (k..=self.n).map(|m| self.cond_mi_sum(k, m)).collect()
    }

    /// Mixture on `A^k` whose atoms are `P(X_1 = . | X_{k+1}^m = y)`, one per
    /// suffix sequence `y` of positive probability, weighted by `P(y)`.
    pub fn mixture(&self, k: usize, m: usize) -> Vec<f64> {
        let suffix: Vec<usize> = (k..m).collect();
        let py = self.marg(&suffix);
        let mut with_first = vec![0usize];
        with_first.extend(&suffix);
        let pxy = self.marg(&with_first);
        let mut out = vec![0.0; self.m.pow(k as u32)];
        for (iy, &w) in py.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let q: Vec<f64> = (0..self.m)
                .map(|a| pxy[a * self.m.pow(suffix.len() as u32) + iy] / w)
                .collect();
            for (ix, slot) in out.iter_mut().enumerate() {
                let x = digits(ix, self.m, k);
                *slot += w * x.iter().map(|&a| q[a]).product::<f64>();
            }
        }
        out
    }

    /// `P(X_1 = . | X_2^{b+1} = y)`.
    pub fn conditional_first(&self, y: &[usize]) -> Vec<f64> {
        let b = y.len();
        let py = self.marg(&(1..=b).collect::<Vec<_>>())[index(y, self.m)];
        let joint = self.marg(&(0..=b).collect::<Vec<_>>());
        (0..self.m)
            .map(|a| {
                let mut s = vec![a];
                s.extend_from_slice(y);
                joint[index(&s, self.m)] / py
            })
            .collect()
    }

    /// Divergence of the prefix marginal from [`Dense::mixture`].
    pub fn d(&self, k: usize, m: usize) -> f64 {
        kl(&self.prefix(k), &self.mixture(k, m))
    }

    /// Total correlation `D(P || prod P_i)` and the chain terms
    /// `I(Z_1^{i-1}; Z_i)`.
    pub fn total_correlation(&self) -> (f64, Vec<f64>) {
        let singles: Vec<Vec<f64>> = (0..self.n).map(|i| self.marg(&[i])).collect();
        let prod: Vec<f64> = (0..self.p.len())
            .map(|idx| {
                digits(idx, self.m, self.n)
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| singles[i][a])
                    .product()
            })
            .collect();
        let terms = (1..=self.n)
            .map(|i| self.mi(&(0..i - 1).collect::<Vec<_>>(), &[i - 1]))
            .collect();
        (kl(&self.p, &prod), terms)
    }
}

/// Representative sequence of a type: symbols in increasing order.
pub fn representative(t: &[u32]) -> Vec<usize> {
    t.iter()
        .enumerate()
        .flat_map(|(a, &c)| std::iter::repeat(a).take(c as usize))
        .collect()
}
