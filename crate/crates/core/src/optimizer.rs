//! Reweighting mixtures of i.i.d. laws and probing the tightness of the
//! certified bounds.
//!
//! [`fit_mixture_weights`] minimizes `D(target || sum_j w_j C_j^k)` over the
//! simplex of weights with the components `C_j` held fixed. The objective is
//! convex in `w` and the multiplicative update
//! `w_j <- w_j * sum_x target(x) C_j^k(x) / M_w(x)` never increases it.
//! Because every mixture of i.i.d. laws is exchangeable, a target only
//! enters through its type-class masses plus a constant offset
//! `D(target || symmetrize(target))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::definetti::{certify_with, Certificate, CERTIFY_SLACK};
use crate::error::{invalid_arg, Error, Result};
use crate::exch::{enumerate_types, symmetrize, Alphabet, ExchangeableLaw, GenericJoint, LetterDist};
use crate::info::{relative_entropy, Nats};
use crate::scalar::{csum, Real};

#[derive(Debug, Clone, Copy)]
pub struct FitOptions<F> {
    pub max_iter: usize,
    /// Stop once one update lowers the objective by less than this.
    pub tol: F,
    /// Use squared extrapolation between multiplicative updates.
    pub accelerate: bool,
}

impl<F: Real> Default for FitOptions<F> {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: F::lit(1e-12),
            accelerate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<F> {
    pub weights: Vec<F>,
    /// Final relative entropy, possibly `+inf`.
    pub d: Nats<F>,
    pub iterations: usize,
    /// Objective before the first update and after each one.
    pub trace: Vec<F>,
    pub converged: bool,
    /// `log max_j g_j` at the final weights, an upper bound on `d - min D`.
    pub gap_bound: F,
}

/// Target reduced to what the mixture objective depends on.
struct Reduced<F> {
    mass: Vec<F>,
    /// Per-sequence target probability on each type (orbit average).
    q: Vec<F>,
    /// `D(target || symmetrize(target))`.
    offset: F,
    /// `C_j(T)`, per sequence, component-major.
    comp: Vec<Vec<F>>,
}

impl<F: Real> Reduced<F> {
    fn new(law: &ExchangeableLaw<F>, offset: F, components: &[LetterDist<F>]) -> Self {
        let comp = components
            .iter()
            .map(|c| {
                law.space()
                    .types()
                    .iter()
                    .map(|t| c.sequence_prob(t))
                    .collect()
            })
            .collect();
        Self {
            mass: law.class_masses(),
            q: law.seq_probs().to_vec(),
            offset,
            comp,
        }
    }

    fn mixture(&self, w: &[F]) -> Vec<F> {
        (0..self.q.len())
            .map(|t| csum(w.iter().zip(&self.comp).map(|(&wj, c)| wj * c[t])))
            .collect()
    }

    fn objective(&self, mix: &[F]) -> F {
        let mut terms = Vec::with_capacity(mix.len() + 1);
        terms.push(self.offset);
        for ((&g, &q), &mt) in self.mass.iter().zip(&self.q).zip(mix) {
            if g > F::zero() {
                if mt <= F::zero() {
                    return F::infinity();
                }
                terms.push(g * (q / mt).ln());
            }
        }
        csum(terms).max(F::zero())
    }

    /// `g_j = sum_T mass_T C_j(T) / M(T)`.
    fn ratios(&self, mix: &[F]) -> Vec<F> {
        self.comp
            .iter()
            .map(|c| {
                csum(
                    self.mass
                        .iter()
                        .zip(c)
                        .zip(mix)
                        .filter(|((&g, _), _)| g > F::zero())
                        .map(|((&g, &ct), &mt)| g * ct / mt),
                )
            })
            .collect()
    }

    fn em_step(&self, w: &[F], mix: &[F]) -> (Vec<F>, Vec<F>, F) {
        let g = self.ratios(mix);
        let mut next: Vec<F> = w.iter().zip(&g).map(|(&wj, &gj)| wj * gj).collect();
        let s = csum(next.iter().copied());
        for x in next.iter_mut() {
            *x = *x / s;
        }
        let next_mix = self.mixture(&next);
        let d = self.objective(&next_mix);
        (next, next_mix, d)
    }

    /// Squared-extrapolation step built from two multiplicative updates,
    /// followed by one more update. Falls back to the second plain update
    /// whenever the extrapolated point does not do better, so the objective
    /// never increases.
    fn squarem_step(&self, w0: &[F], mix0: &[F], d0: F) -> (Vec<F>, Vec<F>, F) {
        let (w1, mix1, d1) = self.em_step(w0, mix0);
        if !(d1 < d0) {
            return (w1, mix1, d1);
        }
        let (w2, mix2, d2) = self.em_step(&w1, &mix1);
        let r: Vec<F> = w1.iter().zip(w0).map(|(&a, &b)| a - b).collect();
        let v: Vec<F> = w2
            .iter()
            .zip(&w1)
            .zip(&r)
            .map(|((&c, &b), &rj)| c - b - rj)
            .collect();
        let rn = csum(r.iter().map(|&x| x * x)).sqrt();
        let vn = csum(v.iter().map(|&x| x * x)).sqrt();
        if !(vn > F::zero()) {
            return (w2, mix2, d2);
        }
        let two = F::lit(2.0);
        let mut alpha = -(rn / vn).max(F::one());
        let mut cand = Vec::new();
        for _ in 0..30 {
            cand = w0
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((&a, &rj), &vj)| a - two * alpha * rj + alpha * alpha * vj)
                .collect();
            if cand.iter().all(|&x| x >= F::zero()) {
                break;
            }
            alpha = (alpha - F::one()) / two;
        }
        if cand.iter().any(|&x| x < F::zero()) {
            return (w2, mix2, d2);
        }
        let s = csum(cand.iter().copied());
        for x in cand.iter_mut() {
            *x = *x / s;
        }
        let cmix = self.mixture(&cand);
        if !self.objective(&cmix).is_finite() {
            return (w2, mix2, d2);
        }
        let (w3, mix3, d3) = self.em_step(&cand, &cmix);
        if d3 < d2 {
            (w3, mix3, d3)
        } else {
            (w2, mix2, d2)
        }
    }

    /// Every target type is charged by some component.
    fn receivable(&self) -> bool {
        self.mass
            .iter()
            .enumerate()
            .all(|(t, &g)| g <= F::zero() || self.comp.iter().any(|c| c[t] > F::zero()))
    }
}

/// Fits mixture weights for an arbitrary target on `A^k`, starting from
/// uniform weights.
pub fn fit_mixture_weights<F: Real>(
    target: &GenericJoint<F>,
    components: &[LetterDist<F>],
    opts: &FitOptions<F>,
) -> Result<FitResult<F>> {
    let init = uniform(components.len());
    fit_mixture_weights_from(target, components, &init, opts)
}

/// As [`fit_mixture_weights`] from caller-supplied initial weights.
pub fn fit_mixture_weights_from<F: Real>(
    target: &GenericJoint<F>,
    components: &[LetterDist<F>],
    init: &[F],
    opts: &FitOptions<F>,
) -> Result<FitResult<F>> {
    let sym = symmetrize(target)?;
    let offset = relative_entropy(target.probs(), sym.densify()?.probs()).value();
    fit_reduced(&sym, offset, components, init, opts)
}

/// Fits mixture weights for an exchangeable target.
pub fn fit_law_weights<F: Real>(
    target: &ExchangeableLaw<F>,
    components: &[LetterDist<F>],
    init: &[F],
    opts: &FitOptions<F>,
) -> Result<FitResult<F>> {
    fit_reduced(target, F::zero(), components, init, opts)
}

fn fit_reduced<F: Real>(
    target: &ExchangeableLaw<F>,
    offset: F,
    components: &[LetterDist<F>],
    init: &[F],
    opts: &FitOptions<F>,
) -> Result<FitResult<F>> {
    if components.is_empty() {
        return Err(invalid_arg("component list is empty"));
    }
    if components.iter().any(|c| c.alphabet() != target.alphabet()) {
        return Err(invalid_arg("components and target over different alphabets"));
    }
    if init.len() != components.len() {
        return Err(invalid_arg(format!(
            "{} initial weights for {} components",
            init.len(),
            components.len()
        )));
    }
    if init.iter().any(|w| !w.is_finite() || *w < F::zero()) {
        return Err(invalid_arg("initial weights must be nonnegative"));
    }
    let total = csum(init.iter().copied());
    if !(total > F::zero()) {
        return Err(invalid_arg("initial weights sum to zero"));
    }
    let red = Reduced::new(target, offset, components);
    let mut w: Vec<F> = init.iter().map(|&x| x / total).collect();

    if !red.receivable() {
        return Ok(FitResult {
            weights: w,
            d: Nats::infinity(),
            iterations: 0,
            trace: vec![F::infinity()],
            converged: false,
            gap_bound: F::infinity(),
        });
    }

    let mut mix = red.mixture(&w);
    let mut d = red.objective(&mix);
    if !d.is_finite() {
        // The start leaves some target type uncovered; pull it inside.
        let n = F::from_count(w.len() as u128);
        for x in w.iter_mut() {
            *x = (*x + F::one() / n) / F::lit(2.0);
        }
        mix = red.mixture(&w);
        d = red.objective(&mix);
    }
    let mut trace = vec![d];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let (next, next_mix, next_d) = if opts.accelerate {
            red.squarem_step(&w, &mix, d)
        } else {
            red.em_step(&w, &mix)
        };
        iterations += 1;
        if next_d > d {
            // Rounding-level increase at the optimum: keep the better point.
            trace.push(d);
            converged = true;
            break;
        }
        let decrease = d - next_d;
        w = next;
        mix = next_mix;
        d = next_d;
        trace.push(d);
        if decrease < opts.tol {
            converged = true;
            break;
        }
    }
    let gap_bound = red
        .ratios(&mix)
        .into_iter()
        .fold(F::neg_infinity(), F::max)
        .ln()
        .max(F::zero());
    Ok(FitResult {
        weights: w,
        d: Nats::new(d),
        iterations,
        trace,
        converged,
        gap_bound,
    })
}

fn uniform<F: Real>(n: usize) -> Vec<F> {
    vec![F::one() / F::from_count(n.max(1) as u128); n]
}

/// Every letter law whose coordinates are multiples of `1/resolution`, in
/// lexicographic order of the numerators.
pub fn component_grid<F: Real>(alphabet_size: usize, resolution: usize) -> Result<Vec<LetterDist<F>>> {
    if resolution == 0 {
        return Err(invalid_arg("grid resolution must be at least 1"));
    }
    let alphabet = Alphabet::new(alphabet_size)?;
    let r = F::from_count(resolution as u128);
    Ok(enumerate_types(alphabet, resolution)
        .into_iter()
        .map(|t| {
            LetterDist::from_vec_unchecked(
                t.counts()
                    .iter()
                    .map(|&c| F::from_count(c as u128) / r)
                    .collect(),
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy)]
pub struct ImproveOptions<F> {
    /// `None` keeps only the constructed atoms.
    pub grid_resolution: Option<usize>,
    pub fit: FitOptions<F>,
    pub slack: F,
}

impl<F: Real> Default for ImproveOptions<F> {
    fn default() -> Self {
        Self {
            grid_resolution: Some(20),
            fit: FitOptions::default(),
            slack: F::lit(CERTIFY_SLACK),
        }
    }
}

/// A certificate together with the best reweighting found.
#[derive(Debug, Clone)]
pub struct Improvement<F> {
    pub certificate: Certificate<F>,
    pub fit: FitResult<F>,
    /// Constructed atoms first, then the grid.
    pub components: Vec<LetterDist<F>>,
    pub constructed_atoms: usize,
}

/// Certifies `(law, k)` and then refits the mixing weights over the
/// constructed atoms together with a grid of letter laws.
///
/// Two runs are made: one from the constructed weights, whose descent keeps
/// it at or below the certified `D`, and one from an interior point that can
/// reach grid components. The better final objective is returned, the first
/// run on ties.
pub fn improve_certificate<F: Real>(
    law: &ExchangeableLaw<F>,
    k: usize,
    opts: &ImproveOptions<F>,
) -> Result<Improvement<F>> {
    let run = certify_with(law, k, opts.slack)?;
    let mut components = run.measure.components();
    let constructed_atoms = components.len();
    if let Some(res) = opts.grid_resolution {
        components.extend(component_grid(law.alphabet().size(), res)?);
    }
    let mut start: Vec<F> = run.measure.weights();
    start.resize(components.len(), F::zero());
    let mut best = fit_law_weights(&run.marginal, &components, &start, &opts.fit)?;

    if components.len() > constructed_atoms {
        let n = F::from_count(components.len() as u128);
        let interior: Vec<F> = start
            .iter()
            .map(|&w| (w + F::one() / n) / F::lit(2.0))
            .collect();
        let alt = fit_law_weights(&run.marginal, &components, &interior, &opts.fit)?;
        if alt.d.value() < best.d.value() {
            best = alt;
        }
    }

    let cert = run.certificate;
    if !(best.d.value() <= cert.d + opts.slack) {
        return Err(Error::CertificationFailure {
            violation: format!(
                "refit D = {} exceeds constructed D = {}",
                best.d.value(),
                cert.d
            ),
            certificate: Box::new(cert.to_f64()),
        });
    }
    Ok(Improvement {
        certificate: cert,
        fit: best,
        components,
        constructed_atoms,
    })
}

/// `D / (k(k-1)/(2(n-k+1)) log|A|)` for one certified pair; zero when the
/// bound itself is zero.
pub fn tightness_ratio<F: Real>(law: &ExchangeableLaw<F>, k: usize, slack: F) -> Result<F> {
    let c = certify_with(law, k, slack)?.certificate;
    Ok(ratio_of(&c))
}

fn ratio_of<F: Real>(c: &Certificate<F>) -> F {
    if c.cor_bound_log_a > F::zero() {
        c.d / c.cor_bound_log_a
    } else {
        F::zero()
    }
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub restarts: usize,
    pub steps: usize,
    /// Initial perturbation size on the class-mass simplex.
    pub initial_step: f64,
    pub slack: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            steps: 200,
            initial_step: 0.5,
            slack: CERTIFY_SLACK,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport<F> {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    /// Largest `D / log|A|-bound` found. A lower bound on the worst case only.
    pub best_ratio: F,
    pub best_restart: usize,
    pub best_law: ExchangeableLaw<F>,
    pub certificate: Certificate<F>,
    /// Best ratio reached by each restart, in restart order.
    pub restart_ratios: Vec<F>,
    /// Number of laws certified along the way.
    pub laws_visited: usize,
}

/// Random-restart coordinate ascent over the type-class masses of
/// exchangeable laws on `A^n`, maximizing the ratio of the certified `D` to
/// the `log|A|` bound.
///
/// Restart `r` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `r`,
/// so the result does not depend on how restarts are scheduled.
pub fn adversarial_search<F: Real>(
    alphabet_size: usize,
    n: usize,
    k: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchReport<F>> {
    if k == 0 || k >= n {
        return Err(invalid_arg(format!(
            "k must satisfy 1 <= k <= n-1 (k = {k}, n = {n})"
        )));
    }
    if opts.restarts == 0 {
        return Err(invalid_arg("at least one restart is required"));
    }
    let alphabet = Alphabet::new(alphabet_size)?;
    let runs: Vec<Result<Restart<F>>> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| search_restart(alphabet, n, k, seed, r, opts))
        .collect();
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.ratio > runs[best].ratio {
            best = r;
        }
    }
    let restart_ratios = runs.iter().map(|r| r.ratio).collect();
    let laws_visited = runs.iter().map(|r| r.visited).sum();
    let winner = runs.into_iter().nth(best).expect("nonempty");
    Ok(SearchReport {
        seed,
        restarts: opts.restarts,
        steps: opts.steps,
        best_ratio: winner.ratio,
        best_restart: best,
        best_law: winner.law,
        certificate: winner.certificate,
        restart_ratios,
        laws_visited,
    })
}

struct Restart<F> {
    ratio: F,
    law: ExchangeableLaw<F>,
    certificate: Certificate<F>,
    visited: usize,
}

fn search_restart<F: Real>(
    alphabet: Alphabet,
    n: usize,
    k: usize,
    seed: u64,
    restart: usize,
    opts: &SearchOptions,
) -> Result<Restart<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let slack = F::lit(opts.slack);
    let classes = crate::exch::TypeSpace::new(alphabet, n)?.count();

    // Flat Dirichlet start via normalized exponentials.
    let mut masses: Vec<f64> = (0..classes).map(|_| Exp1.sample(&mut rng)).collect();
    normalize(&mut masses);
    let evaluate = |m: &[f64]| -> Result<(F, ExchangeableLaw<F>, Certificate<F>)> {
        let g: Vec<F> = m.iter().map(|&x| F::lit(x)).collect();
        let law = ExchangeableLaw::from_class_masses(alphabet, n, &g)?;
        let c = certify_with(&law, k, slack)?.certificate;
        Ok((ratio_of(&c), law, c))
    };
    let (mut ratio, mut law, mut certificate) = evaluate(&masses)?;
    let mut visited = 1;
    for step in 0..opts.steps {
        let size = opts.initial_step / (1.0 + step as f64).sqrt();
        let coord = rng.gen_range(0..classes);
        let delta = size * (2.0 * rng.gen::<f64>() - 1.0);
        let mut cand = masses.clone();
        cand[coord] = (cand[coord] + delta).max(0.0);
        if cand.iter().sum::<f64>() <= 0.0 {
            continue;
        }
        normalize(&mut cand);
        let (r, l, c) = evaluate(&cand)?;
        visited += 1;
        if r > ratio {
            ratio = r;
            law = l;
            certificate = c;
            masses = cand;
        }
    }
    Ok(Restart {
        ratio,
        law,
        certificate,
        visited,
    })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    for x in v.iter_mut() {
        *x /= s;
    }
}
