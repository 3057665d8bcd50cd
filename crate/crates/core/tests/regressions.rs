use definetti::definetti::certify;
use definetti::generators::polya;
use definetti::optimizer::{adversarial_search, fit_law_weights, improve_certificate, FitOptions, ImproveOptions, SearchOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn polya_refit_improves_strictly() {
    let law = polya::<f64>(&[1, 1], 6).unwrap();
    let imp = improve_certificate(&law, 2, &ImproveOptions::default()).unwrap();
    assert!((imp.certificate.d - 6.6240247173338096e-3).abs() < 1e-15);
    // The grid holds 0, 1/2 and 1, which match the first two moments of the
    // uniform mixing law, so the 2-marginal is representable exactly.
    assert!(imp.fit.d.value() < 1e-10);
    assert!(imp.fit.d.value() < imp.certificate.d);

    let target = law.marginal(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let raw: Vec<f64> = (0..imp.components.len()).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        let init: Vec<f64> = raw.iter().map(|x| x / s).collect();
        let fit = fit_law_weights(&target, &imp.components, &init, &FitOptions::default()).unwrap();
        assert!(fit.d.value() < 1e-8);
    }
}

#[test]
fn search_floor_binary_n4_k2() {
    let opts = SearchOptions {
        restarts: 50,
        ..SearchOptions::default()
    };
    let rep = adversarial_search::<f64>(2, 4, 2, 0, &opts).unwrap();
    assert!(rep.best_ratio >= 0.6297369386107144 - 1e-12);
    assert!(rep.best_ratio <= 1.0 + 1e-9);
    assert!(rep.restart_ratios.iter().all(|&r| r <= rep.best_ratio));
    let c = certify(&rep.best_law, 2).unwrap();
    assert!((c.d / c.cor_bound_log_a - rep.best_ratio).abs() < 1e-12);
}
