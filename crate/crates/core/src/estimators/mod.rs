//! Estimators for ρ, p_c, h, σ and μ, plus report wrappers for the exact
//! growth and Cheeger computations. Certified bounds come from exact counts;
//! Monte Carlo quantities carry confidence intervals.

mod connective;
mod entropy;
mod percolation;
mod spectral;
mod speed;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::cayley::{cheeger_upper, growth, CheegerStrategy};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

pub use connective::{connective_constant, connective_from_saw};
pub use entropy::{
    entropy, entropy_ball, entropy_radial, walk_distributions, EntropyMode, WalkDistribution,
};
pub use percolation::{
    bottleneck, curve_csv, direct_connection, percolation, percolation_on_ball, PercolationConfig,
    PercolationMode, PercolationResult, ThetaPoint,
};
pub use spectral::{spectral_from_cogrowth, spectral_radius};
pub use speed::{speed_exact, speed_monte_carlo};

/// Version tag carried by every serialized report.
pub const REPORT_SCHEMA: &str = "gjlab.estimate/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedBound {
    pub value: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequencePoint {
    pub n: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub schema: &'static str,
    pub parameter: String,
    pub group: String,
    pub estimate: Option<f64>,
    pub certified: Option<CertifiedBound>,
    pub ci: Option<ConfidenceInterval>,
    pub params: BTreeMap<String, Value>,
    /// The bound sequence the certificate is taken from, when there is one.
    pub sequence: Vec<SequencePoint>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_seconds: Option<f64>,
}

impl EstimateReport {
    pub fn new(parameter: &str, group: &dyn MarkedGroup) -> EstimateReport {
        EstimateReport::named(parameter, group.name())
    }

    pub fn named(parameter: &str, group: String) -> EstimateReport {
        EstimateReport {
            schema: REPORT_SCHEMA,
            parameter: parameter.into(),
            group,
            estimate: None,
            certified: None,
            ci: None,
            params: BTreeMap::new(),
            sequence: Vec::new(),
            notes: Vec::new(),
            runtime_seconds: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }

    pub fn with_runtime(mut self, seconds: f64) -> Self {
        self.runtime_seconds = Some(seconds);
        self
    }

    /// `n,value` rows of the bound sequence.
    pub fn sequence_csv(&self) -> String {
        let mut out = String::from("n,value\n");
        for p in &self.sequence {
            out.push_str(&format!("{},{:.12}\n", p.n, p.value));
        }
        out
    }
}

/// Independent stream per (seed, index): results never depend on scheduling.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Growth rate `γ = lim log b(n) / (n k)`; each term is an upper bound since `b` is submultiplicative.
pub fn growth_rate(
    g: &dyn MarkedGroup,
    n_max: usize,
) -> Result<(EstimateReport, crate::cayley::CountSeries), ResourceError> {
    let b = growth(g, n_max)?;
    let mut report = EstimateReport::new("growth", g).param("n", n_max);
    let mut best = f64::INFINITY;
    for n in 1..=n_max {
        if let Some(v) = b.normalized(n) {
            best = best.min(v);
            report.sequence.push(SequencePoint { n, value: v });
        }
    }
    if best.is_finite() {
        report.certified = Some(CertifiedBound {
            value: best,
            direction: Direction::Upper,
        });
        report.estimate = report.sequence.last().map(|p| p.value);
    }
    report.params.insert(
        "ball_size".into(),
        Value::from(b.values.last().map(|v| v.to_string()).unwrap_or_default()),
    );
    Ok((report, b))
}

/// Best Cheeger upper bound over the strategy's candidates.
pub fn cheeger_report(
    g: &dyn MarkedGroup,
    strategy: &CheegerStrategy,
    n_max: usize,
) -> Result<EstimateReport, ResourceError> {
    let bounds = cheeger_upper(g, strategy, n_max)?;
    let mut report = EstimateReport::new("cheeger", g).param("n", n_max);
    report.params.insert(
        "strategy".into(),
        Value::from(match strategy {
            CheegerStrategy::Balls => "balls",
            CheegerStrategy::GreedyLocalSearch { .. } => "greedy",
            CheegerStrategy::Sets(_) => "sets",
        }),
    );
    for (n, b) in bounds.iter().enumerate() {
        report.sequence.push(SequencePoint {
            n,
            value: ratio_f64(&b.upper_bound),
        });
    }
    if let Some(last) = bounds.last() {
        let v = ratio_f64(&last.upper_bound);
        report.estimate = Some(v);
        report.certified = Some(CertifiedBound {
            value: v,
            direction: Direction::Upper,
        });
        report.notes.push(format!(
            "best candidate ratio {}/{} (|X| = {})",
            last.upper_bound.numer(),
            last.upper_bound.denom(),
            bounds
                .iter()
                .find(|b| b.ratio == last.upper_bound)
                .map_or(0, |b| b.size)
        ));
    }
    Ok(report)
}

fn ratio_f64(r: &num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
