//! The family `G_J = ⊗_{i∈J} F^i_ω(ℋ) ⊗ ⊗_{i∉J} G_{ω,i} ⊗ G_ω`, truncated to
//! finitely many components for ball queries of bounded radius, and the
//! separation witnesses `η_{ω,i}`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cayley::{bfs_ball, CayleyBall};
use crate::error::{GroupError, ResourceError};
use crate::group::{product, Element, Group, ProductGroup};
use crate::matrix::generator_matrices;
use crate::tree::{grigorchuk_quotient, iterate_functor};
use crate::word::{eta_word, OmegaWord};

/// `N(n)`: smallest `m` with `2^m - 1 >= 2n`. Components `Γ_{i,J}` with
/// `i > N(n)` do not change radius-`n` balls.
pub fn truncation_level(n: usize) -> usize {
    (0..).find(|&m| (1usize << m) > 2 * n).unwrap()
}

/// `M(n)`: level of the finite stand-in `G_{ω,M}` for `G_ω` at radius `n`.
/// `G_{ω,M}` is exact up to radius `2^{M-1} - 1` only from `M = 3` on (level 2
/// already kills `d`), hence the floor.
pub fn tail_level(n: usize) -> usize {
    truncation_level(n).max(3)
}

/// Optional arithmetic membership rule for `J`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JRule {
    /// `{start, start·ratio, start·ratio², ...}`
    Geometric { start: usize, ratio: usize },
}

impl JRule {
    fn members(&self, limit: usize) -> Vec<usize> {
        match *self {
            JRule::Geometric { start, ratio } => {
                let mut out = Vec::new();
                let mut x = start;
                while x >= 1 && x <= limit {
                    out.push(x);
                    if ratio <= 1 {
                        break;
                    }
                    x *= ratio;
                }
                out
            }
        }
    }
}

/// `{"omega": {"pre": "", "period": "012"}, "J": [1, 3, 9], "radius": 8}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GjSpecRaw", into = "GjSpecRaw")]
pub struct GjSpec {
    pub omega: OmegaWord,
    pub j: BTreeSet<usize>,
    pub rule: Option<JRule>,
    pub radius: usize,
}

#[derive(Serialize, Deserialize)]
struct OmegaRaw {
    pre: String,
    period: String,
}

#[derive(Serialize, Deserialize)]
struct GjSpecRaw {
    omega: OmegaRaw,
    #[serde(rename = "J")]
    j: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rule: Option<JRule>,
    radius: usize,
}

fn digits(v: &[u8]) -> String {
    v.iter().map(|d| char::from(b'0' + d)).collect()
}

impl TryFrom<GjSpecRaw> for GjSpec {
    type Error = String;

    fn try_from(raw: GjSpecRaw) -> Result<Self, Self::Error> {
        let omega = OmegaWord::parse(&format!("{}|{}", raw.omega.pre, raw.omega.period))
            .map_err(|e| e.to_string())?;
        if raw.j.contains(&0) {
            return Err("J must contain positive integers only".into());
        }
        Ok(GjSpec {
            omega,
            j: raw.j.into_iter().collect(),
            rule: raw.rule,
            radius: raw.radius,
        })
    }
}

impl From<GjSpec> for GjSpecRaw {
    fn from(s: GjSpec) -> Self {
        GjSpecRaw {
            omega: OmegaRaw {
                pre: digits(s.omega.preperiod()),
                period: digits(s.omega.period()),
            },
            j: s.j.into_iter().collect(),
            rule: s.rule,
            radius: s.radius,
        }
    }
}

impl GjSpec {
    pub fn new(omega: OmegaWord, j: impl IntoIterator<Item = usize>, radius: usize) -> GjSpec {
        GjSpec {
            omega,
            j: j.into_iter().collect(),
            rule: None,
            radius,
        }
    }

    /// Members of `J` (explicit and rule-generated) up to `limit`.
    pub fn members(&self, limit: usize) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self.j.range(1..=limit).copied().collect();
        if let Some(rule) = &self.rule {
            out.extend(rule.members(limit));
        }
        out
    }
}

/// `Γ_{i,J}`: `F^i_ω(ℋ)` if `i ∈ J`, else `G_{ω,i}`.
pub fn family_component(omega: &OmegaWord, i: usize, in_j: bool) -> Result<Group, GroupError> {
    if in_j {
        iterate_functor(omega, i, Arc::new(generator_matrices()))
    } else {
        Ok(grigorchuk_quotient(omega, i))
    }
}

/// Truncation of `G_J` faithful for balls of radius `spec.radius`: components
/// `1..=N(n)` and the tail `G_{ω,M(n)}` as the last component.
pub fn build_gj(spec: &GjSpec) -> Result<ProductGroup, GroupError> {
    let levels = truncation_level(spec.radius);
    build_gj_with_levels(
        &spec.omega,
        &spec.members(levels),
        levels,
        tail_level(spec.radius),
    )
}

/// `⊗_{i ≤ levels} Γ_{i,J} ⊗ G_{ω,tail}`; members of `J` above `levels` are ignored.
pub fn build_gj_with_levels(
    omega: &OmegaWord,
    j: &BTreeSet<usize>,
    levels: usize,
    tail: usize,
) -> Result<ProductGroup, GroupError> {
    if j.contains(&0) {
        return Err(GroupError::InvalidArgument(
            "J must contain positive integers only".into(),
        ));
    }
    let mut comps = (1..=levels)
        .map(|i| family_component(omega, i, j.contains(&i)))
        .collect::<Result<Vec<_>, _>>()?;
    comps.push(grigorchuk_quotient(omega, tail));
    product(comps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Requirement {
    Trivial,
    Nontrivial,
    /// Not constrained; reported for information.
    Any,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentCheck {
    pub level: usize,
    /// `"functor"` for `F^i_ω(ℋ)`, `"quotient"` for `G_{ω,i}`, `"tail"` for the stand-in of `G_ω`.
    pub kind: &'static str,
    pub trivial: bool,
    pub required: Requirement,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub omega: String,
    #[serde(rename = "J")]
    pub j: Vec<usize>,
    #[serde(rename = "J_prime")]
    pub jp: Vec<usize>,
    pub i: usize,
    pub word_length: usize,
    pub components: Vec<ComponentCheck>,
    /// Leaf index (left to right) of the first nontrivial decoration in the `F^i_ω(ℋ)` component.
    pub witness_leaf_index: Option<usize>,
    pub witness_leaf: Option<Value>,
    pub success: bool,
}

/// Checks that `η_{ω,i}` is trivial in every component of `G_{J'}` above level
/// `i` and in every `G_{ω,j}`, and nontrivial in `F^i_ω(ℋ)`; so
/// `G_{J'} ↠ G_J` has a nontrivial kernel.
pub fn separation_witness(
    omega: &OmegaWord,
    j: &BTreeSet<usize>,
    jp: &BTreeSet<usize>,
    i: usize,
) -> Result<SeparationReport, GroupError> {
    if !j.is_subset(jp) {
        return Err(GroupError::InvalidArgument(
            "J must be a subset of J'".into(),
        ));
    }
    if !jp.contains(&i) || j.contains(&i) {
        return Err(GroupError::InvalidArgument(format!(
            "level {i} must lie in J' \\ J"
        )));
    }
    let eta = eta_word(omega, i).indices();
    let top = jp.iter().copied().max().unwrap_or(0).max(i + 1);
    let mut components = Vec::new();
    let mut witness = None;
    for level in 1..=top {
        let in_jp = jp.contains(&level);
        let g = family_component(omega, level, in_jp)?;
        let value = g.evaluate(&eta);
        let trivial = value == g.identity();
        let required = if !in_jp || level > i {
            Requirement::Trivial
        } else if level == i {
            Requirement::Nontrivial
        } else {
            Requirement::Any
        };
        if level == i {
            witness = first_nontrivial_leaf(&value);
        }
        let ok = match required {
            Requirement::Trivial => trivial,
            Requirement::Nontrivial => !trivial,
            Requirement::Any => true,
        };
        components.push(ComponentCheck {
            level,
            kind: if in_jp { "functor" } else { "quotient" },
            trivial,
            required,
            ok,
        });
    }
    let tail = grigorchuk_quotient(omega, (top + 1).max(3));
    let tail_trivial = tail.evaluate(&eta) == tail.identity();
    components.push(ComponentCheck {
        level: (top + 1).max(3),
        kind: "tail",
        trivial: tail_trivial,
        required: Requirement::Trivial,
        ok: tail_trivial,
    });
    let success = components.iter().all(|c| c.ok);
    Ok(SeparationReport {
        omega: omega.to_string(),
        j: j.iter().copied().collect(),
        jp: jp.iter().copied().collect(),
        i,
        word_length: eta.len(),
        components,
        witness_leaf_index: witness.as_ref().map(|w| w.0),
        witness_leaf: witness.map(|w| w.1),
        success,
    })
}

fn first_nontrivial_leaf(x: &Element) -> Option<(usize, Value)> {
    match x {
        Element::Tree(t) => t
            .leaves()
            .iter()
            .enumerate()
            .find(|(_, l)| l.as_matrix().is_some_and(|m| !m.is_identity()))
            .map(|(idx, l)| (idx, l.to_json())),
        Element::Matrix(m) if !m.is_identity() => Some((0, x.to_json())),
        _ => None,
    }
}

/// Whether `x` maps trivially to the last (tail) component of `gamma` but not to some other.
pub fn in_kernel_section(gamma: &ProductGroup, x: &Element) -> bool {
    let comps = gamma.components();
    let last = comps.len() - 1;
    gamma.project(x, last) == &comps[last].identity()
        && (0..last).any(|i| gamma.project(x, i) != &comps[i].identity())
}

/// Ball-level snapshot of `ker(Γ ↠ tail)`: elements of the radius-`n` ball
/// with trivial tail component and some nontrivial finite component.
pub fn finite_kernel_section(
    gamma: &ProductGroup,
    n: usize,
) -> Result<Vec<Element>, ResourceError> {
    let ball: CayleyBall = bfs_ball(gamma, n)?;
    Ok(ball
        .vertices()
        .filter(|x| in_kernel_section(gamma, x))
        .cloned()
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{MarkedGroup, TrivialGroup};
    use crate::tree::ball_agreement_radius;

    fn om() -> OmegaWord {
        OmegaWord::first_grigorchuk()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn truncation_levels() {
        assert_eq!(truncation_level(0), 0);
        assert_eq!(truncation_level(1), 2);
        assert_eq!(truncation_level(3), 3);
        assert_eq!(truncation_level(4), 4);
        assert_eq!(truncation_level(7), 4);
        assert_eq!(truncation_level(8), 5);
        assert_eq!(tail_level(1), 3);
        assert_eq!(tail_level(7), 4);
    }

    #[test]
    fn tail_is_faithful() {
        // G_{ω,M(n)} against a much deeper quotient
        let reference = grigorchuk_quotient(&om(), 7);
        for n in 1..=7 {
            let tail = grigorchuk_quotient(&om(), tail_level(n));
            assert!(
                ball_agreement_radius(tail.as_ref(), reference.as_ref(), n) >= n,
                "n={n}"
            );
        }
    }

    #[test]
    fn spec_json_roundtrip() {
        let raw = r#"{"omega": {"pre": "", "period": "012"}, "J": [1, 3, 9], "radius": 8}"#;
        let spec: GjSpec = serde_json::from_str(raw).unwrap();
        assert_eq!(spec.omega, om());
        assert_eq!(spec.j, set(&[1, 3, 9]));
        assert_eq!(spec.radius, 8);
        let back = serde_json::to_value(&spec).unwrap();
        assert_eq!(back, serde_json::from_str::<Value>(raw).unwrap());
        assert!(serde_json::from_str::<GjSpec>(
            r#"{"omega": {"pre": "", "period": "013"}, "J": [], "radius": 1}"#
        )
        .is_err());
        assert!(serde_json::from_str::<GjSpec>(
            r#"{"omega": {"pre": "", "period": "01"}, "J": [0], "radius": 1}"#
        )
        .is_err());
    }

    #[test]
    fn geometric_rule() {
        let mut spec = GjSpec::new(om(), [], 8);
        spec.rule = Some(JRule::Geometric { start: 1, ratio: 3 });
        assert_eq!(spec.members(20), set(&[1, 3, 9]));
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains(r#""rule":{"geometric":{"start":1,"ratio":3}}"#));
        assert_eq!(serde_json::from_str::<GjSpec>(&json).unwrap(), spec);
    }

    #[test]
    fn empty_j_is_grigorchuk() {
        for n in [2, 3, 5] {
            let g = build_gj(&GjSpec::new(om(), [], n)).unwrap();
            let reference = grigorchuk_quotient(&om(), 7);
            assert_eq!(ball_agreement_radius(&g, reference.as_ref(), n), n);
        }
    }

    #[test]
    fn continuity_of_truncation() {
        let n = 3;
        let levels = truncation_level(n);
        for (j, jp) in [
            (vec![1], vec![1, 4]),
            (vec![], vec![5]),
            (vec![2], vec![2, 4, 5]),
        ] {
            let g = build_gj(&GjSpec::new(om(), j.clone(), n)).unwrap();
            // untruncated enough to include every member of J'
            let h = build_gj_with_levels(&om(), &set(&jp), levels + 2, tail_level(n) + 2).unwrap();
            assert_eq!(ball_agreement_radius(&g, &h, n), n, "J={j:?} J'={jp:?}");
        }
    }

    #[test]
    fn eta_separates_j2_from_empty() {
        let eta = eta_word(&om(), 2).indices();
        let g2 = build_gj_with_levels(&om(), &set(&[2]), 3, 4).unwrap();
        let g0 = build_gj_with_levels(&om(), &set(&[]), 3, 4).unwrap();
        assert_ne!(g2.evaluate(&eta), g2.identity());
        assert_eq!(g0.evaluate(&eta), g0.identity());
        assert!(in_kernel_section(&g2, &g2.evaluate(&eta)));
    }

    #[test]
    fn witnesses() {
        let r = separation_witness(&om(), &set(&[]), &set(&[1]), 1).unwrap();
        assert!(r.success);
        assert_eq!(r.witness_leaf_index, Some(1));
        let r = separation_witness(&om(), &set(&[]), &set(&[2]), 2).unwrap();
        assert!(r.success);
        // trivial one level deeper
        assert!(r.components.iter().any(|c| c.level == 3 && c.trivial));
        let r = separation_witness(&om(), &set(&[1]), &set(&[1, 2]), 2).unwrap();
        assert!(r.success);
        assert_eq!(r.components[0].required, Requirement::Any);
        assert_eq!(r.witness_leaf_index, Some(3));
    }

    #[test]
    fn witness_preconditions() {
        assert!(separation_witness(&om(), &set(&[1]), &set(&[2]), 2).is_err());
        assert!(separation_witness(&om(), &set(&[]), &set(&[2]), 1).is_err());
        assert!(separation_witness(&om(), &set(&[2]), &set(&[2]), 2).is_err());
    }

    #[test]
    fn kernel_sections() {
        let g2 = grigorchuk_quotient(&om(), 2);
        let with_trivial_tail =
            product(vec![g2.clone(), Arc::new(TrivialGroup::new(4)) as Group]).unwrap();
        let ks = finite_kernel_section(&with_trivial_tail, 4).unwrap();
        assert_eq!(ks.len(), 7);
        let empty = build_gj(&GjSpec::new(om(), [], 4)).unwrap();
        assert!(finite_kernel_section(&empty, 4).unwrap().is_empty());
    }

    #[test]
    fn quotient_direction_monotone() {
        // every relation of G_{J'} holds in G_J for J ⊂ J'
        let big = build_gj_with_levels(&om(), &set(&[1, 2, 3]), 3, 4).unwrap();
        let small = build_gj_with_levels(&om(), &set(&[2]), 3, 4).unwrap();
        let mut checked = 0;
        for code in 0..4usize.pow(6) {
            let w: Vec<usize> = (0..6).map(|p| code / 4usize.pow(p) % 4).collect();
            if big.evaluate(&w) == big.identity() {
                assert_eq!(small.evaluate(&w), small.identity(), "{w:?}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }
}
