use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{stream_rng, ConfidenceInterval, EstimateReport};
use crate::cayley::{bfs_ball, CayleyBall, OUTSIDE};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PercolationMode {
    Site,
    Bond,
}

#[derive(Debug, Clone)]
pub struct PercolationConfig {
    pub mode: PercolationMode,
    pub radius: usize,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub bootstrap: usize,
}

impl PercolationConfig {
    /// Grid `0, 0.01, ..., 1` and 200 bootstrap resamples.
    pub fn new(
        mode: PercolationMode,
        radius: usize,
        trials: usize,
        seed: u64,
    ) -> PercolationConfig {
        PercolationConfig {
            mode,
            radius,
            p_grid: (0..=100).map(|i| i as f64 / 100.0).collect(),
            trials,
            seed,
            bootstrap: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPoint {
    pub p: f64,
    pub theta_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone)]
pub struct PercolationResult {
    pub report: EstimateReport,
    pub curve: Vec<ThetaPoint>,
    /// Per-trial threshold `p*`: the root reaches the boundary sphere iff `p > p*`.
    pub thresholds: Vec<f64>,
}

/// Undirected edge numbering: `(v, s)` and its reverse `(v·s, s^{-1})` share an id.
struct EdgeIndex {
    ids: Vec<u32>,
    count: usize,
}

impl EdgeIndex {
    fn new(ball: &CayleyBall) -> EdgeIndex {
        let k = ball.rank();
        let mut ids = vec![u32::MAX; ball.len() * k];
        let mut count = 0;
        for v in 0..ball.len() {
            for s in 0..k {
                let Some(t) = ball.neighbor(v, s) else {
                    continue;
                };
                if t == v || ids[v * k + s] != u32::MAX {
                    continue;
                }
                ids[v * k + s] = count as u32;
                let back = ball.inverse_generator(s);
                if ball.neighbor(t, back) == Some(v) && ids[t * k + back] == u32::MAX {
                    ids[t * k + back] = count as u32;
                }
                count += 1;
            }
        }
        EdgeIndex { ids, count }
    }
}

fn draw_variates(len: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, trial);
    (0..len).map(|_| rng.gen::<f64>()).collect()
}

fn bottleneck_with(ball: &CayleyBall, edges: Option<&EdgeIndex>, variates: &[f64]) -> f64 {
    let k = ball.rank();
    let target = ball.sphere(ball.radius());
    if target.is_empty() {
        return f64::INFINITY;
    }
    let mut best = vec![f64::INFINITY; ball.len()];
    best[0] = if edges.is_some() { 0.0 } else { variates[0] };
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((OrdF64(best[0]), 0u32)));
    while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
        let v = v as usize;
        if d > best[v] {
            continue;
        }
        if target.contains(&v) {
            return d;
        }
        for s in 0..k {
            let t = ball.raw_neighbor(v, s);
            if t == OUTSIDE || t as usize == v {
                continue;
            }
            let t = t as usize;
            let cost = match edges {
                Some(e) => variates[e.ids[v * k + s] as usize],
                None => variates[t],
            };
            let nd = d.max(cost);
            if nd < best[t] {
                best[t] = nd;
                heap.push(Reverse((OrdF64(nd), t as u32)));
            }
        }
    }
    f64::INFINITY
}

#[derive(Clone, Copy)]
struct OrdF64(f64);
impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Threshold `p*` of one trial: the root connects to the sphere of radius
/// `ball.radius()` exactly when `p > p*` (`+inf` if the sphere is empty).
pub fn bottleneck(ball: &CayleyBall, mode: PercolationMode, seed: u64, trial: u64) -> f64 {
    match mode {
        PercolationMode::Site => {
            bottleneck_with(ball, None, &draw_variates(ball.len(), seed, trial))
        }
        PercolationMode::Bond => {
            let e = EdgeIndex::new(ball);
            bottleneck_with(ball, Some(&e), &draw_variates(e.count, seed, trial))
        }
    }
}

/// Direct check for one `p`: breadth-first search over open sites/bonds,
/// using the same variates as [`bottleneck`].
pub fn direct_connection(
    ball: &CayleyBall,
    mode: PercolationMode,
    seed: u64,
    trial: u64,
    p: f64,
) -> bool {
    let k = ball.rank();
    let edges = (mode == PercolationMode::Bond).then(|| EdgeIndex::new(ball));
    let variates = draw_variates(edges.as_ref().map_or(ball.len(), |e| e.count), seed, trial);
    let target = ball.sphere(ball.radius());
    if mode == PercolationMode::Site && variates[0] >= p {
        return false;
    }
    let mut seen = vec![false; ball.len()];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(v) = queue.pop_front() {
        if target.contains(&v) {
            return true;
        }
        for s in 0..k {
            let Some(t) = ball.neighbor(v, s) else {
                continue;
            };
            let open = match &edges {
                Some(e) => t != v && variates[e.ids[v * k + s] as usize] < p,
                None => variates[t] < p,
            };
            if open && !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    false
}

pub fn percolation(
    g: &dyn MarkedGroup,
    cfg: &PercolationConfig,
) -> Result<PercolationResult, ResourceError> {
    let ball = bfs_ball(g, cfg.radius)?;
    Ok(percolation_on_ball(&ball, cfg, g.name()))
}

/// Monte Carlo `θ̂_R(p)` on a precomputed ball and the 0.5-crossing estimate of `p_c`.
pub fn percolation_on_ball(
    ball: &CayleyBall,
    cfg: &PercolationConfig,
    group: String,
) -> PercolationResult {
    assert!(
        cfg.radius >= 1 && cfg.trials >= 1,
        "percolation needs radius >= 1 and trials >= 1"
    );
    let param = match cfg.mode {
        PercolationMode::Site => "pc-site",
        PercolationMode::Bond => "pc-bond",
    };
    let mut report = EstimateReport::named(param, group)
        .param("radius", cfg.radius)
        .param("trials", cfg.trials)
        .param("seed", cfg.seed)
        .param("bootstrap", cfg.bootstrap)
        .param("grid_points", cfg.p_grid.len());
    let edges = (cfg.mode == PercolationMode::Bond).then(|| EdgeIndex::new(ball));
    let n_var = edges.as_ref().map_or(ball.len(), |e| e.count);
    let thresholds: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| bottleneck_with(ball, edges.as_ref(), &draw_variates(n_var, cfg.seed, t)))
        .collect();
    let mut sorted = thresholds.clone();
    sorted.sort_by(f64::total_cmp);

    let curve: Vec<ThetaPoint> = cfg
        .p_grid
        .iter()
        .map(|&p| {
            let hits = sorted.partition_point(|&x| x < p);
            let (lo, hi) = wilson(hits, cfg.trials);
            ThetaPoint {
                p,
                theta_hat: hits as f64 / cfg.trials as f64,
                ci_lo: lo,
                ci_hi: hi,
            }
        })
        .collect();

    if ball.sphere(cfg.radius).is_empty() {
        report.estimate = Some(1.0);
        report
            .notes
            .push("boundary sphere is empty (finite group): p_c undefined, reported as 1".into());
        return PercolationResult {
            report,
            curve,
            thresholds,
        };
    }
    report.notes.push(format!(
        "finite-size proxy: root-to-sphere connection at radius {} crossing theta = 0.5",
        cfg.radius
    ));
    let thetas: Vec<f64> = curve.iter().map(|c| c.theta_hat).collect();
    report.estimate = crossing(&cfg.p_grid, &thetas, 0.5);
    if cfg.bootstrap > 0 {
        let mut boots: Vec<f64> = (0..cfg.bootstrap as u64)
            .into_par_iter()
            .filter_map(|b| {
                let mut rng = stream_rng(cfg.seed ^ 0x9e37_79b9_7f4a_7c15, b);
                let mut sample: Vec<f64> = (0..cfg.trials)
                    .map(|_| thresholds[rng.gen_range(0..cfg.trials)])
                    .collect();
                sample.sort_by(f64::total_cmp);
                let th: Vec<f64> = cfg
                    .p_grid
                    .iter()
                    .map(|&p| sample.partition_point(|&x| x < p) as f64 / cfg.trials as f64)
                    .collect();
                crossing(&cfg.p_grid, &th, 0.5)
            })
            .collect();
        boots.sort_by(f64::total_cmp);
        if !boots.is_empty() {
            let q = |f: f64| boots[((boots.len() - 1) as f64 * f).round() as usize];
            report.ci = Some(ConfidenceInterval {
                level: 0.95,
                lo: q(0.025),
                hi: q(0.975),
            });
        }
    }
    PercolationResult {
        report,
        curve,
        thresholds,
    }
}

/// Linear interpolation of the first grid crossing of `level` by a nondecreasing curve.
fn crossing(grid: &[f64], theta: &[f64], level: f64) -> Option<f64> {
    let i = theta.iter().position(|&t| t >= level)?;
    if i == 0 {
        return Some(grid[0]);
    }
    let (p0, p1, t0, t1) = (grid[i - 1], grid[i], theta[i - 1], theta[i]);
    Some(p0 + (p1 - p0) * (level - t0) / (t1 - t0))
}

/// 95% Wilson score interval.
fn wilson(hits: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054f64;
    let nf = n as f64;
    let phat = hits as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (phat + z * z / (2.0 * nf)) / denom;
    let half = z * (phat * (1.0 - phat) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// `p,theta_hat,ci_lo,ci_hi` rows.
pub fn curve_csv(curve: &[ThetaPoint]) -> String {
    let mut out = String::from("p,theta_hat,ci_lo,ci_hi\n");
    for c in curve {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6}",
            c.p, c.theta_hat, c.ci_lo, c.ci_hi
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{FreeGroup, GridGroup};
    use crate::tree::grigorchuk_quotient;
    use crate::word::OmegaWord;

    #[test]
    fn endpoints_and_monotone_coupling() {
        let g = GridGroup::new(2).unwrap();
        let ball = bfs_ball(&g, 8).unwrap();
        for mode in [PercolationMode::Site, PercolationMode::Bond] {
            let cfg = PercolationConfig::new(mode, 8, 60, 11);
            let res = percolation_on_ball(&ball, &cfg, g.name());
            assert_eq!(res.curve.first().unwrap().theta_hat, 0.0);
            assert_eq!(res.curve.last().unwrap().theta_hat, 1.0);
            assert!(res
                .curve
                .windows(2)
                .all(|w| w[0].theta_hat <= w[1].theta_hat));
            // the bottleneck agrees with a direct search at every grid point, for each trial
            for trial in 0..20u64 {
                let pstar = res.thresholds[trial as usize];
                assert_eq!(pstar, bottleneck(&ball, mode, 11, trial));
                let mut prev = false;
                for &p in cfg.p_grid.iter().step_by(5) {
                    let direct = direct_connection(&ball, mode, 11, trial, p);
                    assert_eq!(direct, pstar < p, "mode {mode:?} trial {trial} p {p}");
                    assert!(!prev || direct);
                    prev = direct;
                }
            }
        }
    }

    #[test]
    fn edge_ids_pair_both_directions() {
        let ball = bfs_ball(&FreeGroup::new(2).unwrap(), 3).unwrap();
        let e = EdgeIndex::new(&ball);
        // a tree ball has |V| - 1 edges
        assert_eq!(e.count, ball.len() - 1);
        let g = GridGroup::new(2).unwrap();
        let b = bfs_ball(&g, 2).unwrap();
        let e = EdgeIndex::new(&b);
        // 13 diamond vertices, 16 internal edges
        assert_eq!(e.count, 16);
    }

    #[test]
    fn tree_site_threshold_near_one_third() {
        // 4-regular tree: p_c = 1/3 for site and bond
        let g = FreeGroup::new(2).unwrap();
        let cfg = PercolationConfig::new(PercolationMode::Bond, 9, 400, 3);
        let res = percolation(&g, &cfg).unwrap();
        let est = res.report.estimate.unwrap();
        assert!(est > 0.3 && est < 0.55, "{est}");
    }

    #[test]
    fn site_below_bond() {
        let g = GridGroup::new(2).unwrap();
        let ball = bfs_ball(&g, 12).unwrap();
        let site = percolation_on_ball(
            &ball,
            &PercolationConfig::new(PercolationMode::Site, 12, 300, 5),
            g.name(),
        );
        let bond = percolation_on_ball(
            &ball,
            &PercolationConfig::new(PercolationMode::Bond, 12, 300, 6),
            g.name(),
        );
        for (s, b) in site.curve.iter().zip(&bond.curve) {
            assert!(s.ci_lo <= b.ci_hi, "p = {}", s.p);
        }
        assert!(site.report.estimate.unwrap() > bond.report.estimate.unwrap());
    }

    #[test]
    fn finite_group_is_degenerate() {
        let g = grigorchuk_quotient(&OmegaWord::first_grigorchuk(), 2);
        let res = percolation(
            g.as_ref(),
            &PercolationConfig::new(PercolationMode::Site, 10, 10, 1),
        )
        .unwrap();
        assert_eq!(res.report.estimate, Some(1.0));
        assert!(res.thresholds.iter().all(|t| t.is_infinite()));
    }

    #[test]
    fn deterministic_across_pools() {
        let g = GridGroup::new(2).unwrap();
        let cfg = PercolationConfig::new(PercolationMode::Bond, 6, 50, 9);
        let a = percolation(&g, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| percolation(&g, &cfg).unwrap());
        assert_eq!(a.thresholds, b.thresholds);
        assert_eq!(
            serde_json::to_string(&a.report).unwrap(),
            serde_json::to_string(&b.report).unwrap()
        );
    }

    #[test]
    fn crossing_interpolates() {
        assert_eq!(crossing(&[0.0, 1.0], &[0.0, 1.0], 0.5), Some(0.5));
        assert_eq!(crossing(&[0.0, 0.5, 1.0], &[0.0, 0.0, 0.0], 0.5), None);
        let csv = curve_csv(&[ThetaPoint {
            p: 0.5,
            theta_hat: 0.25,
            ci_lo: 0.1,
            ci_hi: 0.4,
        }]);
        assert_eq!(
            csv,
            "p,theta_hat,ci_lo,ci_hi\n0.500000,0.250000,0.100000,0.400000\n"
        );
    }
}
