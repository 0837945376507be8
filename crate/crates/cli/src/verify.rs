use std::sync::Arc;

use serde::Serialize;

use gjlab_core::family::tail_level;
use gjlab_core::group::GammaFree;
use gjlab_core::word::{base_relator, eta_word};
use gjlab_core::{
    apply_functor, ball_agreement_radius, generator_matrices, grigorchuk_quotient, iterate_functor,
    product, Element, Group, OmegaWord, ProjectiveMat, Word,
};

pub const VERIFY_SCHEMA: &str = "gjlab.verify/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    MatrixRelations,
    Contraction,
    Eta,
    ProductCompat,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub omega: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,name,pass,detail\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},\"{}\"\n",
                c.suite,
                c.name,
                c.pass,
                c.detail.replace('"', "'")
            ));
        }
        out
    }
}

fn check(
    suite: &'static str,
    name: impl Into<String>,
    pass: bool,
    detail: impl Into<String>,
) -> Check {
    Check {
        suite,
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn h_group() -> Group {
    Arc::new(generator_matrices())
}

fn matrix_relations() -> Vec<Check> {
    let hm = generator_matrices();
    let mut out: Vec<Check> = hm
        .verify_relations()
        .checks
        .into_iter()
        .map(|c| check("matrix-relations", c.relation, c.holds, ""))
        .collect();
    let ad4 = hm.word_to_matrix(&"adadadad".parse::<Word>().expect("valid word"));
    let want = ProjectiveMat::from_ints(1, -1, 0, 1).expect("unimodular");
    out.push(check(
        "matrix-relations",
        "(ad)^4",
        ad4 == want,
        ad4.to_string(),
    ));
    let h = hm.word_to_matrix(&base_relator());
    let want = ProjectiveMat::from_ints(-1, 2, 2, -5).expect("unimodular");
    out.push(check("matrix-relations", "h", h == want, h.to_string()));
    out
}

fn contraction(omega: &OmegaWord, m_max: usize) -> Vec<Check> {
    let h = h_group();
    (1..=m_max)
        .map(|m| {
            let n = (1usize << m) - 1;
            let big_m = tail_level(n);
            let r = match iterate_functor(omega, m, h.clone()) {
                Ok(f) => {
                    ball_agreement_radius(f.as_ref(), grigorchuk_quotient(omega, big_m).as_ref(), n)
                }
                Err(e) => return check("contraction", format!("m={m}"), false, e.to_string()),
            };
            check(
                "contraction",
                format!("m={m}"),
                r == n,
                format!("agreement radius {r} of {n} against level {big_m}"),
            )
        })
        .collect()
}

fn nontrivial_identity_portrait(x: &Element) -> bool {
    match x {
        Element::Tree(t) => {
            t.portrait().is_identity()
                && t.leaves()
                    .iter()
                    .any(|l| !l.as_matrix().is_some_and(ProjectiveMat::is_identity))
        }
        Element::Matrix(m) => !m.is_identity(),
        _ => false,
    }
}

fn eta(omega: &OmegaWord, k_max: usize) -> Vec<Check> {
    let h = h_group();
    let mut out = Vec::new();
    for k in 0..=k_max {
        let word = eta_word(omega, k);
        let letters = word.indices();
        let built = iterate_functor(omega, k + 1, h.clone())
            .and_then(|d| Ok((d, iterate_functor(omega, k, h.clone())?)));
        let (deeper, level) = match built {
            Ok(pair) => pair,
            Err(e) => {
                out.push(check("eta", format!("k={k}"), false, e.to_string()));
                continue;
            }
        };
        let quotient = grigorchuk_quotient(omega, k);
        let t1 = deeper.evaluate(&letters) == deeper.identity();
        let t2 = quotient.evaluate(&letters) == quotient.identity();
        let nt = nontrivial_identity_portrait(&level.evaluate(&letters));
        out.push(check(
            "eta",
            format!("k={k}"),
            t1 && t2 && nt,
            format!(
                "|eta| = {}; trivial at functor level {}: {t1}; trivial in quotient level {k}: {t2}; nontrivial with identity portrait at functor level {k}: {nt}",
                word.len(),
                k + 1
            ),
        ));
    }
    out
}

fn product_compat(omega: &OmegaWord) -> Vec<Check> {
    let h = h_group();
    let gamma: Group = Arc::new(GammaFree);
    let mut out = Vec::new();
    let pairs: [(&str, Group, Group); 2] = [
        (
            "H x G_2",
            h.clone(),
            grigorchuk_quotient(&omega.shift(1), 2),
        ),
        ("H x Gamma", h, gamma),
    ];
    for (label, left, right) in pairs {
        for x in 0..3u8 {
            let name = format!("F_{x}({label})");
            let built = product(vec![left.clone(), right.clone()]).and_then(|prod| {
                let lhs = apply_functor(x, Arc::new(prod))?;
                let rhs = product(vec![
                    Arc::new(apply_functor(x, left.clone())?) as Group,
                    Arc::new(apply_functor(x, right.clone())?) as Group,
                ])?;
                Ok(ball_agreement_radius(&lhs, &rhs, 5))
            });
            out.push(match built {
                Ok(r) => check(
                    "product-compat",
                    name,
                    r == 5,
                    format!("balls agree to radius {r} of 5"),
                ),
                Err(e) => check("product-compat", name, false, e.to_string()),
            });
        }
    }
    out
}

pub fn run(suite: Suite, omega: &OmegaWord, m: usize, k: usize) -> VerifyReport {
    let mut checks = Vec::new();
    if matches!(suite, Suite::MatrixRelations | Suite::All) {
        checks.extend(matrix_relations());
    }
    if matches!(suite, Suite::Contraction | Suite::All) {
        checks.extend(contraction(omega, m));
    }
    if matches!(suite, Suite::Eta | Suite::All) {
        checks.extend(eta(omega, k));
    }
    if matches!(suite, Suite::ProductCompat | Suite::All) {
        checks.extend(product_compat(omega));
    }
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        schema: VERIFY_SCHEMA,
        omega: omega.to_string(),
        checks,
        pass,
    }
}
