//! Exact arithmetic in `PSL(2, Z[i, 1/2])` and the four-generated matrix group
//! used as leaf decoration for the decorated Grigorchuk groups.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::GroupError;
use crate::group::{Element, MarkedGroup};
use crate::word::{GenSymbol, Word};

/// `(re + im·i) / 2^exp`, normalized so that `exp == 0` or one of `re, im` is odd.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianDyadic {
    re: BigInt,
    im: BigInt,
    exp: u32,
}

impl GaussianDyadic {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>, exp: u32) -> GaussianDyadic {
        let mut x = GaussianDyadic {
            re: re.into(),
            im: im.into(),
            exp,
        };
        x.normalize();
        x
    }

    pub fn zero() -> GaussianDyadic {
        GaussianDyadic::new(0, 0, 0)
    }

    pub fn one() -> GaussianDyadic {
        GaussianDyadic::new(1, 0, 0)
    }

    pub fn re_num(&self) -> &BigInt {
        &self.re
    }

    pub fn im_num(&self) -> &BigInt {
        &self.im
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn is_normalized(&self) -> bool {
        self.exp == 0 || self.re.bit(0) || self.im.bit(0)
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = match (self.re.trailing_zeros(), self.im.trailing_zeros()) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!(),
        };
        let shift = tz.min(self.exp as u64);
        if shift > 0 {
            self.re >>= shift;
            self.im >>= shift;
            self.exp -= shift as u32;
        }
    }

    /// Positive real part, or zero real part and positive imaginary part.
    fn leans_positive(&self) -> bool {
        self.re.is_positive() || (self.re.is_zero() && self.im.is_positive())
    }

    fn to_json(&self) -> Value {
        let num = |x: &BigInt| match x.to_i64() {
            Some(v) => json!(v),
            None => json!(x.to_string()),
        };
        json!([num(&self.re), num(&self.im), self.exp])
    }
}

impl Add for &GaussianDyadic {
    type Output = GaussianDyadic;
    fn add(self, rhs: &GaussianDyadic) -> GaussianDyadic {
        let exp = self.exp.max(rhs.exp);
        let (ls, rs) = (exp - self.exp, exp - rhs.exp);
        GaussianDyadic::new(
            (&self.re << ls) + (&rhs.re << rs),
            (&self.im << ls) + (&rhs.im << rs),
            exp,
        )
    }
}

impl Neg for &GaussianDyadic {
    type Output = GaussianDyadic;
    fn neg(self) -> GaussianDyadic {
        GaussianDyadic {
            re: -&self.re,
            im: -&self.im,
            exp: self.exp,
        }
    }
}

impl Sub for &GaussianDyadic {
    type Output = GaussianDyadic;
    fn sub(self, rhs: &GaussianDyadic) -> GaussianDyadic {
        self + &(-rhs)
    }
}

impl Mul for &GaussianDyadic {
    type Output = GaussianDyadic;
    fn mul(self, rhs: &GaussianDyadic) -> GaussianDyadic {
        if self.is_zero() || rhs.is_zero() {
            return GaussianDyadic::zero();
        }
        let re = &self.re * &rhs.re - &self.im * &rhs.im;
        let im = &self.re * &rhs.im + &self.im * &rhs.re;
        GaussianDyadic::new(re, im, self.exp + rhs.exp)
    }
}

impl fmt::Display for GaussianDyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => "0".to_string(),
            (false, true) => self.re.to_string(),
            (true, false) => format!("{}i", self.im),
            (false, false) => format!("({}{:+}i)", self.re, self.im),
        };
        if self.exp == 0 {
            f.write_str(&body)
        } else {
            write!(f, "{body}/{}", BigInt::one() << self.exp)
        }
    }
}

/// A 2×2 determinant-one matrix up to global sign, stored in canonical sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjectiveMat {
    m: [GaussianDyadic; 4],
}

impl ProjectiveMat {
    /// Row-major entries; fails unless the determinant is exactly 1.
    pub fn new(entries: [GaussianDyadic; 4]) -> Result<ProjectiveMat, GroupError> {
        let det = &(&entries[0] * &entries[3]) - &(&entries[1] * &entries[2]);
        if det != GaussianDyadic::one() {
            return Err(GroupError::NotUnimodular);
        }
        Ok(ProjectiveMat::canonical(entries))
    }

    /// Integer matrix shorthand.
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<ProjectiveMat, GroupError> {
        let g = |x: i64| GaussianDyadic::new(x, 0, 0);
        ProjectiveMat::new([g(a), g(b), g(c), g(d)])
    }

    fn canonical(mut m: [GaussianDyadic; 4]) -> ProjectiveMat {
        let lead = m.iter().find(|x| !x.is_zero()).expect("determinant one");
        if !lead.leans_positive() {
            for x in m.iter_mut() {
                *x = -&*x;
            }
        }
        ProjectiveMat { m }
    }

    pub fn identity() -> ProjectiveMat {
        ProjectiveMat {
            m: [
                GaussianDyadic::one(),
                GaussianDyadic::zero(),
                GaussianDyadic::zero(),
                GaussianDyadic::one(),
            ],
        }
    }

    pub fn is_identity(&self) -> bool {
        let [a, b, c, d] = &self.m;
        b.is_zero()
            && c.is_zero()
            && a.exp == 0
            && d.exp == 0
            && a.im.is_zero()
            && a.re.is_one()
            && d == a
    }

    pub fn entries(&self) -> &[GaussianDyadic; 4] {
        &self.m
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(GaussianDyadic::is_real)
    }

    pub fn mul(&self, other: &ProjectiveMat) -> ProjectiveMat {
        if self.is_identity() {
            return other.clone();
        }
        if other.is_identity() {
            return self.clone();
        }
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &other.m;
        ProjectiveMat::canonical([
            &(a * e) + &(b * g),
            &(a * f) + &(b * h),
            &(c * e) + &(d * g),
            &(c * f) + &(d * h),
        ])
    }

    pub fn inverse(&self) -> ProjectiveMat {
        let [a, b, c, d] = &self.m;
        ProjectiveMat::canonical([d.clone(), -b, -c, a.clone()])
    }

    pub fn pow(&self, n: u32) -> ProjectiveMat {
        (0..n).fold(ProjectiveMat::identity(), |acc, _| acc.mul(self))
    }

    pub fn is_normalized(&self) -> bool {
        self.m.iter().all(GaussianDyadic::is_normalized)
    }

    /// `{"m": [[[re, im, exp], ...], ...]}`
    pub fn to_json(&self) -> Value {
        json!({
            "m": [
                [self.m[0].to_json(), self.m[1].to_json()],
                [self.m[2].to_json(), self.m[3].to_json()],
            ]
        })
    }
}

impl fmt::Display for ProjectiveMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "±(({}, {}), ({}, {}))",
            self.m[0], self.m[1], self.m[2], self.m[3]
        )
    }
}

/// The marked group generated by the images of `a, b, c, d` in `PSL(2, Z[i,1/2])`.
#[derive(Debug, Clone)]
pub struct HGroup {
    generators: [ProjectiveMat; 4],
}

/// Builds the four generator matrices
/// `a = ((i, i/4), (0, -i))`, `b = ((0, i), (i, 0))`, `c = ((0, 1), (-1, 0))`, `d = ((i, 0), (0, -i))`.
pub fn generator_matrices() -> HGroup {
    let z = GaussianDyadic::zero;
    let i = || GaussianDyadic::new(0, 1, 0);
    let mi = || GaussianDyadic::new(0, -1, 0);
    let a = ProjectiveMat::new([i(), GaussianDyadic::new(0, 1, 2), z(), mi()]);
    let b = ProjectiveMat::new([z(), i(), i(), z()]);
    let c = ProjectiveMat::from_ints(0, 1, -1, 0);
    let d = ProjectiveMat::new([i(), z(), z(), mi()]);
    HGroup {
        generators: [a.unwrap(), b.unwrap(), c.unwrap(), d.unwrap()],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub checks: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

impl HGroup {
    /// A group with arbitrary generator matrices, unchecked against the relations.
    pub fn with_generators(generators: [ProjectiveMat; 4]) -> HGroup {
        HGroup { generators }
    }

    pub fn generator(&self, s: GenSymbol) -> &ProjectiveMat {
        &self.generators[s.index()]
    }

    pub fn word_to_matrix(&self, w: &Word) -> ProjectiveMat {
        w.letters()
            .iter()
            .fold(ProjectiveMat::identity(), |acc, &s| {
                acc.mul(self.generator(s))
            })
    }

    /// Checks `a² = b² = c² = d² = bcd = 1` projectively.
    pub fn verify_relations(&self) -> RelationReport {
        let mut checks: Vec<RelationCheck> = GenSymbol::ALL
            .iter()
            .map(|&s| RelationCheck {
                relation: format!("{}^2 = 1", s.as_char()),
                holds: self.generator(s).mul(self.generator(s)).is_identity(),
            })
            .collect();
        let bcd = self
            .generator(GenSymbol::B)
            .mul(self.generator(GenSymbol::C))
            .mul(self.generator(GenSymbol::D));
        checks.push(RelationCheck {
            relation: "bcd = 1".into(),
            holds: bcd.is_identity(),
        });
        RelationReport { checks }
    }
}

/// Evaluates `w` with the standard generator matrices.
pub fn word_to_matrix(w: &Word) -> ProjectiveMat {
    generator_matrices().word_to_matrix(w)
}

impl MarkedGroup for HGroup {
    fn name(&self) -> String {
        "matrix_h()".into()
    }

    fn rank(&self) -> usize {
        4
    }

    fn identity(&self) -> Element {
        Element::Matrix(Box::new(ProjectiveMat::identity()))
    }

    fn generator(&self, i: usize) -> Element {
        Element::Matrix(Box::new(self.generators[i].clone()))
    }

    fn mul(&self, x: &Element, y: &Element) -> Element {
        match (x, y) {
            (Element::Matrix(p), Element::Matrix(q)) => Element::Matrix(Box::new(p.mul(q))),
            _ => panic!("HGroup::mul on non-matrix elements"),
        }
    }

    fn inverse(&self, x: &Element) -> Element {
        match x {
            Element::Matrix(p) => Element::Matrix(Box::new(p.inverse())),
            _ => panic!("HGroup::inverse on non-matrix element"),
        }
    }
}
