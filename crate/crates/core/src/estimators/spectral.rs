use num_traits::{ToPrimitive, Zero};

use super::{CertifiedBound, Direction, EstimateReport, SequencePoint};
use crate::cayley::{cogrowth, ln_big, CountSeries};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

/// Spectral radius from exact cogrowth up to `n_max`.
pub fn spectral_radius(g: &dyn MarkedGroup, n_max: usize) -> Result<EstimateReport, ResourceError> {
    let c = cogrowth(g, n_max)?;
    Ok(spectral_from_cogrowth(&c, g.name()))
}

/// Certified lower bound `max_{even n} c(n)^{1/n}/k` (Fekete, since `c` is
/// supermultiplicative) and a point estimate from the model
/// `c(2n) ~ A n^{-3/2} (kρ)^{2n}` with one Richardson step.
pub fn spectral_from_cogrowth(c: &CountSeries, group: String) -> EstimateReport {
    let k = c.rank as f64;
    let n_max = c.values.len() - 1;
    let mut report = EstimateReport::named("rho", group).param("n", n_max);
    let mut best = 0f64;
    for n in (2..=n_max).step_by(2) {
        if c.values[n].is_zero() {
            continue;
        }
        best = best.max((ln_big(&c.values[n]) / n as f64).exp() / k);
        report.sequence.push(SequencePoint { n, value: best });
    }
    if report.sequence.is_empty() {
        report
            .notes
            .push("no closed walks of even length observed".into());
        return report;
    }
    report.certified = Some(CertifiedBound {
        value: best,
        direction: Direction::Lower,
    });

    // R²_m = c(2m)/c(2m-2) · (m/(m-1))^{3/2}, then remove the O(1/m²) term
    let r2 = |m: usize| -> Option<f64> {
        if m < 2 || c.values[2 * m - 2].is_zero() {
            return None;
        }
        let ratio = (ln_big(&c.values[2 * m]) - ln_big(&c.values[2 * m - 2])).exp();
        Some(ratio * (m as f64 / (m as f64 - 1.0)).powf(1.5))
    };
    let m = n_max / 2;
    let extrapolated = match (r2(m), r2(m.saturating_sub(1))) {
        (Some(a), Some(b)) if m >= 3 => {
            let (mf, pf) = (m as f64, (m - 1) as f64);
            Some((mf * mf * a - pf * pf * b) / (mf * mf - pf * pf))
        }
        (Some(a), _) => Some(a),
        _ => None,
    };
    if let Some(r2) = extrapolated {
        let rho = (r2.max(0.0).sqrt() / k).clamp(best, 1.0);
        report.estimate = Some(rho);
        report.notes.push(
            "estimate assumes c(2n) ~ A n^(-3/2) (k rho)^(2n); only the lower bound is certified"
                .into(),
        );
    } else {
        report.estimate = Some(best);
    }
    if let Some(v) = c.values.get(2).and_then(|v| v.to_f64()) {
        report.params.insert("c2".into(), v.into());
    }
    report
}
