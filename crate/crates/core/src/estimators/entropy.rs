use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{compensated_sum, CertifiedBound, Direction, EstimateReport, SequencePoint};
use crate::cayley::{bfs_ball, ln_big, walk_step, CayleyBall};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

/// `μ_n` on a ball: `μ_n(v) = counts[v] / k^n`, exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkDistribution {
    pub step: usize,
    pub counts: Vec<BigUint>,
    pub denominator: BigUint,
}

impl WalkDistribution {
    pub fn probability(&self, v: usize) -> f64 {
        if self.counts[v].is_zero() {
            return 0.0;
        }
        (ln_big(&self.counts[v]) - ln_big(&self.denominator)).exp()
    }

    /// Exact normalization check.
    pub fn is_normalized(&self) -> bool {
        self.counts.iter().sum::<BigUint>() == self.denominator
    }

    /// `H(μ) = -Σ μ log μ`; only the final accumulation is floating point.
    pub fn entropy(&self) -> f64 {
        let ln_den = ln_big(&self.denominator);
        compensated_sum(self.counts.iter().filter(|c| !c.is_zero()).map(|c| {
            let l = ln_big(c) - ln_den;
            -l.exp() * l
        }))
    }

    /// `E|x_n|` given the ball the counts are indexed by.
    pub fn mean_distance(&self, ball: &CayleyBall) -> f64 {
        let ln_den = ln_big(&self.denominator);
        compensated_sum(
            self.counts
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| ball.distance(v) as f64 * (ln_big(c) - ln_den).exp()),
        )
    }
}

/// `μ_1, ..., μ_{n_max}` on a ball of radius at least `n_max`.
pub fn walk_distributions(ball: &CayleyBall, n_max: usize) -> Vec<WalkDistribution> {
    assert!(ball.radius() >= n_max, "ball too small for {n_max} steps");
    let k = BigUint::from(ball.rank());
    let mut cur: Vec<BigUint> = vec![BigUint::zero(); ball.len()];
    cur[0] = BigUint::one();
    let mut den = BigUint::one();
    let mut out = Vec::with_capacity(n_max);
    for t in 1..=n_max {
        let mut next = walk_step(ball, &cur, ball.ball_prefix(t));
        next.resize(ball.len(), BigUint::zero());
        den *= &k;
        out.push(WalkDistribution {
            step: t,
            counts: next.clone(),
            denominator: den.clone(),
        });
        cur = next;
    }
    out
}

/// `H(μ_1..=n_max)` from exact walk counts on the ball.
pub fn entropy_ball(g: &dyn MarkedGroup, n_max: usize) -> Result<Vec<f64>, ResourceError> {
    let ball = bfs_ball(g, n_max)?;
    Ok(walk_distributions(&ball, n_max)
        .iter()
        .map(WalkDistribution::entropy)
        .collect())
}

/// `H(μ_1..=n_max)` on the `q`-regular tree: `N(n, j)` walks end at distance
/// `j`, spread uniformly over the `q(q-1)^{j-1}` vertices of that sphere.
pub fn entropy_radial(q: usize, n_max: usize) -> Vec<f64> {
    assert!(q >= 2, "tree degree must be at least 2");
    let mut f = vec![BigUint::one()];
    let mut den = BigUint::one();
    let ln_sphere = |j: usize| -> f64 {
        if j == 0 {
            0.0
        } else {
            (q as f64).ln() + (j - 1) as f64 * ((q - 1) as f64).ln()
        }
    };
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        let mut g = vec![BigUint::zero(); f.len() + 1];
        for (j, v) in f.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            if j == 0 {
                g[1] += v * q;
            } else {
                g[j + 1] += v * (q - 1);
                g[j - 1] += v;
            }
        }
        den *= q;
        let ln_den = ln_big(&den);
        let h = compensated_sum(g.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(
            |(j, v)| {
                let ln_mass = ln_big(v) - ln_den;
                // sphere mass times -log of the per-vertex probability
                -ln_mass.exp() * (ln_mass - ln_sphere(j))
            },
        ));
        out.push(h);
        f = g;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    Ball,
    Radial,
}

/// Entropy report. Radial mode applies when the Cayley graph is a tree whose
/// degree equals the generator count; otherwise the exact ball convolution runs.
pub fn entropy(g: &dyn MarkedGroup, n_max: usize) -> Result<EstimateReport, ResourceError> {
    let (mode, hs) = match g.tree_degree() {
        Some(q) if q == g.rank() => (EntropyMode::Radial, entropy_radial(q, n_max)),
        _ => (EntropyMode::Ball, entropy_ball(g, n_max)?),
    };
    let mut report = EstimateReport::new("entropy", g)
        .param("n", n_max)
        .param("mode", serde_json::to_value(mode).unwrap());
    let mut best = f64::INFINITY;
    for (i, h) in hs.iter().enumerate() {
        let value = h / (i + 1) as f64;
        best = best.min(value);
        report.sequence.push(SequencePoint { n: i + 1, value });
    }
    if n_max == 0 {
        return Ok(report);
    }
    report.certified = Some(CertifiedBound {
        value: best,
        direction: Direction::Upper,
    });
    // increments H(μ_n) - H(μ_{n-1}) decrease to h much faster than H(μ_n)/n
    report.estimate = Some(if n_max >= 2 {
        hs[n_max - 1] - hs[n_max - 2]
    } else {
        hs[0]
    });
    report
        .params
        .insert("h_over_n".into(), (hs[n_max - 1] / n_max as f64).into());
    report.notes.push("sequence: H(mu_n)/n (each an upper bound by subadditivity); estimate: H(mu_n) - H(mu_{n-1})".into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{CyclicGroup, FreeGroup, GammaFree, GridGroup};
    use crate::tree::grigorchuk_quotient;
    use crate::word::OmegaWord;

    #[test]
    fn first_step_is_uniform() {
        let hs = entropy_ball(&GammaFree, 3).unwrap();
        assert!((hs[0] - 4f64.ln()).abs() < 1e-12);
        let hs = entropy_ball(&FreeGroup::new(2).unwrap(), 1).unwrap();
        assert!((hs[0] - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn distributions_are_exact() {
        let ball = bfs_ball(&GridGroup::new(2).unwrap(), 6).unwrap();
        let ds = walk_distributions(&ball, 6);
        assert!(ds.iter().all(WalkDistribution::is_normalized));
        // P[x_2 = e] = 4/16
        assert!((ds[1].probability(0) - 0.25).abs() < 1e-15);
        assert_eq!(ds[5].denominator, BigUint::from(4096u32));
    }

    #[test]
    fn radial_matches_ball() {
        let ball = entropy_ball(&FreeGroup::new(2).unwrap(), 8).unwrap();
        let radial = entropy_radial(4, 8);
        for (a, b) in ball.iter().zip(&radial) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let z = entropy_ball(&GridGroup::new(1).unwrap(), 10).unwrap();
        let zr = entropy_radial(2, 10);
        for (a, b) in z.iter().zip(&zr) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn subadditive_and_decreasing() {
        for hs in [
            entropy_ball(&GammaFree, 10).unwrap(),
            entropy_radial(4, 40),
            entropy_ball(&GridGroup::new(2).unwrap(), 12).unwrap(),
        ] {
            for n in 1..=hs.len() {
                for m in 1..=hs.len() - n {
                    assert!(hs[n + m - 1] <= hs[n - 1] + hs[m - 1] + 1e-9);
                }
            }
            assert!(hs
                .iter()
                .enumerate()
                .map(|(i, h)| h / (i + 1) as f64)
                .collect::<Vec<_>>()
                .windows(2)
                .all(|w| w[1] <= w[0] + 1e-12));
        }
    }

    #[test]
    fn free_group_report() {
        let r = entropy(&FreeGroup::new(2).unwrap(), 50).unwrap();
        assert_eq!(r.params["mode"], "radial");
        let h = 3f64.ln() / 2.0;
        let cert = r.certified.unwrap().value;
        assert!(cert > h);
        assert!((r.sequence[49].value - cert).abs() < 1e-15);
        let est = r.estimate.unwrap();
        assert!(est > h && est - h < 0.02, "{est}");
    }

    #[test]
    fn finite_groups_go_to_zero() {
        let g = grigorchuk_quotient(&OmegaWord::first_grigorchuk(), 2);
        let r = entropy(g.as_ref(), 30).unwrap();
        assert!(r.sequence.last().unwrap().value < 8f64.ln() / 30.0 + 1e-12);
        let c = entropy(&CyclicGroup::new(3).unwrap(), 20).unwrap();
        assert!(c.estimate.unwrap().abs() < 1e-6);
    }
}
