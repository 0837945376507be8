use num_traits::Zero;

use super::{CertifiedBound, Direction, EstimateReport, SequencePoint};
use crate::cayley::{ln_big, saw_count, CountSeries};
use crate::error::ResourceError;
use crate::group::MarkedGroup;

pub fn connective_constant(
    g: &dyn MarkedGroup,
    n_max: usize,
) -> Result<EstimateReport, ResourceError> {
    let u = saw_count(g, n_max)?;
    Ok(connective_from_saw(&u, g.name()))
}

/// `υ(n)^{1/n}` upper bounds (submultiplicativity) and the ratio estimate `υ(n)/υ(n-1)`.
pub fn connective_from_saw(u: &CountSeries, group: String) -> EstimateReport {
    let n_max = u.values.len() - 1;
    let mut report = EstimateReport::named("mu", group).param("n", n_max);
    let mut best = f64::INFINITY;
    for n in 1..=n_max {
        let value = if u.values[n].is_zero() {
            0.0
        } else {
            (ln_big(&u.values[n]) / n as f64).exp()
        };
        best = best.min(value);
        report.sequence.push(SequencePoint { n, value: best });
    }
    if n_max == 0 {
        return report;
    }
    report.certified = Some(CertifiedBound {
        value: best,
        direction: Direction::Upper,
    });
    if u.values[n_max].is_zero() {
        report.notes.push(
            "degenerate: no self-avoiding walks of maximal length (finite group), mu = 0".into(),
        );
        return report;
    }
    report.estimate = Some(if n_max >= 2 {
        (ln_big(&u.values[n_max]) - ln_big(&u.values[n_max - 1])).exp()
    } else {
        best
    });
    report
}
