use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;

use super::entropy::walk_distributions;
use super::{compensated_sum, stream_rng, ConfidenceInterval, EstimateReport};
use crate::cayley::{bfs_ball, ln_big};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

/// Monte Carlo estimate of `E|x_n| / n`. Uses the group's word length when it
/// has one, otherwise walks on the enumerated radius-`n` ball.
pub fn speed_monte_carlo(
    g: &dyn MarkedGroup,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<EstimateReport, ResourceError> {
    assert!(
        n >= 1 && samples >= 1,
        "speed needs n >= 1 and samples >= 1"
    );
    let k = g.rank();
    let has_length = g.word_length(&g.identity()).is_some();
    let ball = if has_length {
        None
    } else {
        Some(bfs_ball(g, n)?)
    };
    let gens: Vec<_> = (0..k).map(|i| g.generator(i)).collect();
    let distances: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            match &ball {
                Some(b) => {
                    let mut v = 0usize;
                    for _ in 0..n {
                        v = b
                            .neighbor(v, rng.gen_range(0..k))
                            .expect("walk of n steps stays in the radius-n ball");
                    }
                    b.distance(v) as f64
                }
                None => {
                    let mut x = g.identity();
                    for _ in 0..n {
                        x = g.mul(&x, &gens[rng.gen_range(0..k)]);
                    }
                    g.word_length(&x).unwrap() as f64
                }
            }
        })
        .collect();
    let nf = n as f64;
    let mean = compensated_sum(distances.iter().copied()) / samples as f64;
    let var = if samples > 1 {
        compensated_sum(distances.iter().map(|d| (d - mean).powi(2))) / (samples - 1) as f64
    } else {
        0.0
    };
    let half = 1.959_963_984_540_054 * (var / samples as f64).sqrt() / nf;
    let mut report = EstimateReport::new("speed", g)
        .param("n", n)
        .param("samples", samples)
        .param("seed", seed);
    report.estimate = Some(mean / nf);
    report.ci = Some(ConfidenceInterval {
        level: 0.95,
        lo: mean / nf - half,
        hi: mean / nf + half,
    });
    report.params.insert(
        "distance".into(),
        (if has_length { "word_length" } else { "ball" }).into(),
    );
    Ok(report)
}

/// Exact `E|x_n| / n`: the distance chain on a regular tree, or the walk distribution on the ball.
pub fn speed_exact(g: &dyn MarkedGroup, n: usize) -> Result<EstimateReport, ResourceError> {
    assert!(n >= 1, "speed needs n >= 1");
    let mean = match g.tree_degree() {
        Some(q) if q == g.rank() => radial_mean_distance(q, n),
        _ => {
            let ball = bfs_ball(g, n)?;
            walk_distributions(&ball, n)
                .last()
                .unwrap()
                .mean_distance(&ball)
        }
    };
    let mut report = EstimateReport::new("speed", g)
        .param("n", n)
        .param("mode", "exact");
    report.estimate = Some(mean / n as f64);
    Ok(report)
}

fn radial_mean_distance(q: usize, n: usize) -> f64 {
    let mut f = vec![BigUint::one()];
    let mut den = BigUint::one();
    for _ in 0..n {
        let mut g = vec![BigUint::zero(); f.len() + 1];
        for (j, v) in f.iter().enumerate() {
            if j == 0 {
                g[1] += v * q;
            } else {
                g[j + 1] += v * (q - 1);
                g[j - 1] += v;
            }
        }
        den *= q;
        f = g;
    }
    let ln_den = ln_big(&den);
    compensated_sum(
        f.iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(j, v)| j as f64 * (ln_big(v) - ln_den).exp()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeGroup, GammaFree, GridGroup};
    use crate::tree::grigorchuk_quotient;
    use crate::word::OmegaWord;

    /// `E|S_n|` for the simple walk on Z, from the binomial distribution.
    fn binomial_mean_abs(n: u64) -> f64 {
        let mut total = 0f64;
        let mut c = 1f64;
        for k in 0..=n {
            total += c * (2.0 * k as f64 - n as f64).abs();
            c = c * (n - k) as f64 / (k + 1) as f64;
        }
        total / 2f64.powi(n as i32)
    }

    #[test]
    fn free_group_speed() {
        let exact = speed_exact(&FreeGroup::new(2).unwrap(), 400)
            .unwrap()
            .estimate
            .unwrap();
        assert!((exact - 0.5).abs() < 0.01, "{exact}");
        let mc = speed_monte_carlo(&FreeGroup::new(2).unwrap(), 200, 2000, 1).unwrap();
        let ci = mc.ci.unwrap();
        assert!(ci.lo < 0.5 + 0.01 && ci.hi > 0.5 - 0.01 + 0.005, "{ci:?}");
    }

    #[test]
    fn integer_line() {
        for n in [10usize, 40] {
            let exact = speed_exact(&GridGroup::new(1).unwrap(), n)
                .unwrap()
                .estimate
                .unwrap();
            assert!((exact - binomial_mean_abs(n as u64) / n as f64).abs() < 1e-12);
        }
        let small = speed_exact(&GridGroup::new(1).unwrap(), 400)
            .unwrap()
            .estimate
            .unwrap();
        assert!(small < 0.05);
    }

    #[test]
    fn ball_walk_matches_exact() {
        let g = grigorchuk_quotient(&OmegaWord::first_grigorchuk(), 3);
        let mc = speed_monte_carlo(g.as_ref(), 12, 4000, 5).unwrap();
        let ex = speed_exact(g.as_ref(), 12).unwrap().estimate.unwrap();
        let ci = mc.ci.unwrap();
        assert!(ci.lo - 0.01 <= ex && ex <= ci.hi + 0.01);
        assert_eq!(mc.params["distance"], "ball");
        let gf = speed_exact(&GammaFree, 8).unwrap().estimate.unwrap();
        let gm = speed_monte_carlo(&GammaFree, 8, 4000, 2)
            .unwrap()
            .ci
            .unwrap();
        assert!(gm.lo - 0.01 <= gf && gf <= gm.hi + 0.01);
    }

    #[test]
    fn finite_group_speed_vanishes() {
        let g = grigorchuk_quotient(&OmegaWord::first_grigorchuk(), 2);
        let r = speed_monte_carlo(g.as_ref(), 60, 200, 3).unwrap();
        assert!(r.estimate.unwrap() < 0.1);
    }
}
