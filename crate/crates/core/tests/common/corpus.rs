//! Laws shared by the integration tests.

use definetti::exch::{ExchangeableLaw, LetterDist};
use definetti::generators::{diaconis_pair, iid, iid_mixture, polya, random_dirichlet, urn_without_replacement};

pub type Named = (String, ExchangeableLaw<f64>);

/// Pólya, urn, mixture and i.i.d. fixtures with `n <= max_n`.
pub fn fixtures(max_n: usize) -> Vec<Named> {
    let mut out: Vec<Named> = vec![("diaconis_pair".into(), diaconis_pair())];
    for n in 2..=max_n {
        for c in [&[1u32, 1][..], &[1, 2], &[2, 3], &[1, 1, 1], &[1, 2, 3]] {
            out.push((format!("polya{c:?} n={n}"), polya(c, n).unwrap()));
        }
        for c in [&[1u32, 1][..], &[2, 2], &[3, 2], &[4, 4], &[2, 2, 2], &[3, 1, 2], &[6, 0, 1]] {
            if n as u32 <= c.iter().sum::<u32>() {
                out.push((format!("urn{c:?} n={n}"), urn_without_replacement(c, n).unwrap()));
            }
        }
        let bern = |p: f64| LetterDist::bernoulli(p).unwrap();
        out.push((
            format!("mix(.3,.7) n={n}"),
            iid_mixture(&[(0.5, bern(0.3)), (0.5, bern(0.7))], n).unwrap(),
        ));
        out.push((
            format!("mix3 n={n}"),
            iid_mixture(
                &[
                    (0.2, LetterDist::new(vec![0.7, 0.2, 0.1]).unwrap()),
                    (0.5, LetterDist::new(vec![0.1, 0.1, 0.8]).unwrap()),
                    (0.3, LetterDist::new(vec![1.0 / 3.0; 3]).unwrap()),
                ],
                n,
            )
            .unwrap(),
        ));
        out.push((format!("point-mix n={n}"), iid_mixture(&[(0.5, bern(0.0)), (0.5, bern(1.0))], n).unwrap()));
        out.push((format!("iid(.2) n={n}"), iid(&bern(0.2), n).unwrap()));
        out.push((
            format!("iid3 n={n}"),
            iid(&LetterDist::new(vec![0.5, 0.3, 0.2]).unwrap(), n).unwrap(),
        ));
    }
    out
}

/// Random Dirichlet laws over `seeds x alphabets x lengths`.
pub fn dirichlet(seeds: std::ops::Range<u64>, alphabets: &[usize], lengths: std::ops::RangeInclusive<usize>) -> Vec<Named> {
    let mut out = Vec::new();
    for seed in seeds {
        for &m in alphabets {
            for n in lengths.clone() {
                let alpha = [1.0, 0.3, 3.0][(seed % 3) as usize];
                out.push((
                    format!("dirichlet seed={seed} m={m} n={n}"),
                    random_dirichlet(seed, m, n, alpha).unwrap(),
                ));
            }
        }
    }
    out
}
