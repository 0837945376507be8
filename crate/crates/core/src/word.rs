//! Words over the free Grigorchuk group `Z2 * Z2^2 = <a,b,c,d | a²=b²=c²=d²=bcd=1>`,
//! the order-three twist cycling `b -> c -> d -> b`, the substitutions used to
//! build separating words, and the separating words themselves.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenSymbol {
    A,
    B,
    C,
    D,
}

impl GenSymbol {
    pub const ALL: [GenSymbol; 4] = [GenSymbol::A, GenSymbol::B, GenSymbol::C, GenSymbol::D];

    /// Generator index in the ordered marking `(a, b, c, d)`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> GenSymbol {
        Self::ALL[i]
    }

    pub fn as_char(self) -> char {
        match self {
            GenSymbol::A => 'a',
            GenSymbol::B => 'b',
            GenSymbol::C => 'c',
            GenSymbol::D => 'd',
        }
    }

    pub fn from_char(ch: char) -> Option<GenSymbol> {
        match ch {
            'a' => Some(GenSymbol::A),
            'b' => Some(GenSymbol::B),
            'c' => Some(GenSymbol::C),
            'd' => Some(GenSymbol::D),
            _ => None,
        }
    }

    fn is_klein(self) -> bool {
        self != GenSymbol::A
    }

    /// Product of two distinct letters of the Klein four-group `{1,b,c,d}`.
    fn klein_product(x: GenSymbol, y: GenSymbol) -> Option<GenSymbol> {
        use GenSymbol::*;
        match (x, y) {
            (B, C) | (C, B) => Some(D),
            (B, D) | (D, B) => Some(C),
            (C, D) | (D, C) => Some(B),
            _ if x == y => None,
            _ => unreachable!("klein_product called with a"),
        }
    }

    /// `b -> c -> d -> b`, `a` fixed, applied `times` (mod 3) times.
    pub fn twist(self, times: i64) -> GenSymbol {
        use GenSymbol::*;
        let mut s = self;
        for _ in 0..times.rem_euclid(3) {
            s = match s {
                A => A,
                B => C,
                C => D,
                D => B,
            };
        }
        s
    }
}

/// A finite word in `a, b, c, d`. Not necessarily reduced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(pub Vec<GenSymbol>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[GenSymbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.0.iter().map(|s| s.index()).collect()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn power(&self, n: usize) -> Word {
        Word(self.0.repeat(n))
    }

    /// Formal inverse. Every generator is an involution, so this is the reversal.
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| {
            let (x, y) = (w[0], w[1]);
            x != y && !(x.is_klein() && y.is_klein())
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("e");
        }
        for s in &self.0 {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = ParseError;

    /// Accepts letters `a-d`; `e` and the empty string denote the identity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "e" {
            return Ok(Word::empty());
        }
        s.chars()
            .enumerate()
            .map(|(pos, ch)| {
                GenSymbol::from_char(ch).ok_or_else(|| {
                    ParseError::new(pos, format!("unexpected letter {ch:?} in word"))
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// Normal form in `Z2 * Z2^2`: `a` alternates with single letters from `{b,c,d}`.
pub fn reduce(w: &Word) -> Word {
    let mut out: Vec<GenSymbol> = Vec::with_capacity(w.len());
    for &s in &w.0 {
        match out.last().copied() {
            Some(top) if top == s => {
                out.pop();
            }
            Some(top) if top.is_klein() && s.is_klein() => {
                let prod = GenSymbol::klein_product(top, s).expect("distinct klein letters");
                *out.last_mut().unwrap() = prod;
            }
            _ => out.push(s),
        }
    }
    Word(out)
}

/// Reduced product `u·v`.
pub fn multiply(u: &Word, v: &Word) -> Word {
    reduce(&u.concat(v))
}

/// Applies the twist `x` times letterwise and reduces.
pub fn phi_twist(w: &Word, x: i64) -> Word {
    reduce(&Word(w.0.iter().map(|s| s.twist(x)).collect()))
}

fn substitute(w: &Word, image: impl Fn(GenSymbol) -> &'static [GenSymbol]) -> Word {
    let mut v = Vec::with_capacity(w.len() * 2);
    for &s in &w.0 {
        v.extend_from_slice(image(s));
    }
    reduce(&Word(v))
}

/// `a -> aca`, `b, c, d` fixed.
pub fn sigma_sub(w: &Word) -> Word {
    use GenSymbol::*;
    substitute(w, |s| match s {
        A => &[A, C, A],
        B => &[B],
        C => &[C],
        D => &[D],
    })
}

/// `a -> c`, `b -> a`, `c -> a`, `d -> 1`.
pub fn tau_sub(w: &Word) -> Word {
    use GenSymbol::*;
    substitute(w, |s| match s {
        A => &[C],
        B => &[A],
        C => &[A],
        D => &[],
    })
}

/// Conjugate of `sigma_sub` by the twist: `φ^x ∘ σ ∘ φ^{-x}`.
pub fn sigma_twisted(w: &Word, x: i64) -> Word {
    phi_twist(&sigma_sub(&phi_twist(w, -x)), x)
}

/// Conjugate of `tau_sub` by the twist: `φ^x ∘ τ ∘ φ^{-x}`.
///
/// On the wreath level, `sigma_twisted(η, x)` evaluates in `F_{-x}(G)` to
/// `(1; tau_twisted(η, x), η)`.
pub fn tau_twisted(w: &Word, x: i64) -> Word {
    phi_twist(&tau_sub(&phi_twist(w, -x)), x)
}

/// `x y x⁻¹ y⁻¹`, reduced.
pub fn commutator(x: &Word, y: &Word) -> Word {
    reduce(&x.concat(y).concat(&x.inverse()).concat(&y.inverse()))
}

/// The relator `r = [c,[d,[b,(ad)^4]]]` whose image in the matrix group is
/// `((-1, 2), (2, -5))`.
pub fn base_relator() -> Word {
    use GenSymbol::*;
    let ad4 = Word(vec![A, D]).power(4);
    let inner = commutator(&Word(vec![B]), &ad4);
    let mid = commutator(&Word(vec![D]), &inner);
    commutator(&Word(vec![C]), &mid)
}

/// An eventually periodic infinite word over `{0,1,2}`, indexed from 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OmegaWord {
    pre: Vec<u8>,
    period: Vec<u8>,
}

impl OmegaWord {
    pub fn new(pre: Vec<u8>, period: Vec<u8>) -> Result<OmegaWord, ParseError> {
        if period.is_empty() {
            return Err(ParseError::new(0, "omega period must be nonempty"));
        }
        if let Some(pos) = pre.iter().chain(period.iter()).position(|&x| x > 2) {
            return Err(ParseError::new(pos, "omega letters must be 0, 1 or 2"));
        }
        Ok(OmegaWord { pre, period })
    }

    /// The word `(012)^∞` of the first Grigorchuk group.
    pub fn first_grigorchuk() -> OmegaWord {
        OmegaWord {
            pre: vec![],
            period: vec![0, 1, 2],
        }
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.pre
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// The `i`-th letter, `i >= 1`.
    pub fn letter_at(&self, i: usize) -> u8 {
        assert!(i >= 1, "omega words are indexed from 1");
        let j = i - 1;
        if j < self.pre.len() {
            self.pre[j]
        } else {
            self.period[(j - self.pre.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Vec<u8> {
        (1..=len).map(|i| self.letter_at(i)).collect()
    }

    /// The word with its first `n` letters removed.
    pub fn shift(&self, n: usize) -> OmegaWord {
        if n <= self.pre.len() {
            return OmegaWord {
                pre: self.pre[n..].to_vec(),
                period: self.period.clone(),
            };
        }
        let k = (n - self.pre.len()) % self.period.len();
        let mut period = self.period[k..].to_vec();
        period.extend_from_slice(&self.period[..k]);
        OmegaWord {
            pre: vec![],
            period,
        }
    }

    /// Parses `"(012)*"` or the general form `"pre|period"`.
    pub fn parse(s: &str) -> Result<OmegaWord, ParseError> {
        let s = s.trim();
        let digits = |part: &str, offset: usize| -> Result<Vec<u8>, ParseError> {
            part.chars()
                .enumerate()
                .map(|(i, ch)| match ch {
                    '0'..='2' => Ok(ch as u8 - b'0'),
                    _ => Err(ParseError::new(
                        offset + i,
                        format!("bad omega letter {ch:?}"),
                    )),
                })
                .collect()
        };
        if let Some(rest) = s.strip_prefix('(') {
            let close = rest
                .find(')')
                .ok_or_else(|| ParseError::new(s.len(), "missing ')' in omega word"))?;
            let tail = &rest[close + 1..];
            if tail != "*" {
                return Err(ParseError::new(
                    close + 2,
                    "expected '*' after periodic block",
                ));
            }
            return OmegaWord::new(vec![], digits(&rest[..close], 1)?);
        }
        match s.split_once('|') {
            Some((pre, period)) => OmegaWord::new(digits(pre, 0)?, digits(period, pre.len() + 1)?),
            None => Err(ParseError::new(
                0,
                "omega word must look like (012)* or pre|period",
            )),
        }
    }
}

impl fmt::Display for OmegaWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = |v: &[u8]| v.iter().map(|d| char::from(b'0' + d)).collect::<String>();
        if self.pre.is_empty() {
            write!(f, "({})*", digits(&self.period))
        } else {
            write!(f, "{}|{}", digits(&self.pre), digits(&self.period))
        }
    }
}

/// The separating word `η_{ω,k}`.
///
/// Built as `w_0 = r_{x_{k+1}}`, `w_{i+1} = σ_{x_{k-i}}(w_i)` where the twist
/// attached to the letter `x` is `φ^{-x}`: that is the twist under which the
/// functor `F_x` sends `σ_{(x)}(w)` to `(1; τ_{(x)}(w), w)` and kills
/// `(a·φ^{-x}(d))^4`. The result is trivial in `F^{k+1}_ω(H)` for every `H`.
pub fn eta_word(omega: &OmegaWord, k: usize) -> Word {
    let twist = |x: u8| -(x as i64);
    let mut w = phi_twist(&base_relator(), twist(omega.letter_at(k + 1)));
    for i in 0..k {
        w = sigma_twisted(&w, twist(omega.letter_at(k - i)));
    }
    w
}

/// Maximal `|η_{ω,k}| / 2^k` over `k = 0..=10` for `ω = (012)^∞`, measured
/// (the ratio is exactly 64 at every level).
pub const ETA_LENGTH_RATIO_BOUND: f64 = 64.0;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn arb_word(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0usize..4, 0..max)
            .prop_map(|v| Word(v.into_iter().map(GenSymbol::from_index).collect()))
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&w("bcd")), Word::empty());
        assert_eq!(reduce(&w("aa")), Word::empty());
        assert_eq!(reduce(&w("bc")), w("d"));
        assert_eq!(reduce(&w("abba")), Word::empty());
        assert_eq!(reduce(&w("abcab")), w("adab"));
        assert_eq!(Word::empty().to_string(), "e");
        assert_eq!(w("e"), Word::empty());
    }

    #[test]
    fn twist_examples() {
        assert_eq!(phi_twist(&w("b"), 1), w("c"));
        assert_eq!(phi_twist(&w("d"), 1), w("b"));
        assert_eq!(phi_twist(&w("abab"), 0), w("abab"));
        assert_eq!(phi_twist(&w("abcab"), 3), reduce(&w("abcab")));
        assert_eq!(phi_twist(&w("c"), -1), w("b"));
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(sigma_sub(&w("a")), w("aca"));
        assert_eq!(tau_sub(&w("d")), Word::empty());
        assert_eq!(sigma_sub(&w("ab")), w("acab"));
        assert_eq!(tau_sub(&w("abcd")), reduce(&w("caa")));
    }

    #[test]
    fn sigma_twisted_examples() {
        for s in ["a", "abac", "dadacb"] {
            assert_eq!(sigma_twisted(&w(s), 0), sigma_sub(&w(s)));
        }
        assert_eq!(sigma_twisted(&w("b"), 1), w("b"));
        assert_eq!(sigma_twisted(&w("a"), 1), w("ada"));
        // independent composition: φ(σ(φ^{-1}(a))) = φ(aca) = ada
        let by_hand = phi_twist(&sigma_sub(&phi_twist(&w("a"), 2)), 1);
        assert_eq!(by_hand, w("ada"));
    }

    #[test]
    fn base_relator_shape() {
        let r = base_relator();
        assert!(!r.is_empty());
        assert!(r.is_reduced());
        assert_eq!(tau_sub(&r), Word::empty());
        for x in 0..3 {
            assert_eq!(tau_twisted(&phi_twist(&r, -x), -x), Word::empty());
        }
    }

    #[test]
    fn generator_images_satisfy_relations() {
        let maps: Vec<Box<dyn Fn(&Word) -> Word>> = vec![
            Box::new(sigma_sub),
            Box::new(tau_sub),
            Box::new(|u: &Word| phi_twist(u, 1)),
            Box::new(|u: &Word| phi_twist(u, 2)),
            Box::new(|u: &Word| sigma_twisted(u, 1)),
            Box::new(|u: &Word| tau_twisted(u, 2)),
        ];
        for f in &maps {
            for s in GenSymbol::ALL {
                let img = f(&Word(vec![s]));
                assert_eq!(multiply(&img, &img), Word::empty());
            }
            let bcd = f(&w("b")).concat(&f(&w("c"))).concat(&f(&w("d")));
            assert_eq!(reduce(&bcd), Word::empty());
        }
    }

    #[test]
    fn omega_indexing() {
        let om = OmegaWord::first_grigorchuk();
        assert_eq!(om.prefix(5), vec![0, 1, 2, 0, 1]);
        assert_eq!(om.shift(1).prefix(3), vec![1, 2, 0]);
        let om2 = OmegaWord::parse("21|0").unwrap();
        assert_eq!(om2.prefix(4), vec![2, 1, 0, 0]);
        assert_eq!(om2.shift(3).prefix(2), vec![0, 0]);
        assert_eq!(OmegaWord::parse("(012)*").unwrap(), om);
        assert_eq!(om.to_string(), "(012)*");
        assert!(OmegaWord::parse("(013)*").is_err());
        assert!(OmegaWord::parse("()*").is_err());
        assert!(OmegaWord::parse("012").is_err());
    }

    #[test]
    fn eta_zero_is_twisted_relator() {
        let om = OmegaWord::first_grigorchuk();
        assert_eq!(eta_word(&om, 0), phi_twist(&base_relator(), 0));
        let om = OmegaWord::parse("|1").unwrap();
        assert_eq!(eta_word(&om, 0), phi_twist(&base_relator(), -1));
    }

    #[test]
    fn eta_length_bound() {
        let om = OmegaWord::first_grigorchuk();
        for k in 0..=10 {
            let len = eta_word(&om, k).len() as f64;
            assert!(
                len / 2f64.powi(k as i32) <= ETA_LENGTH_RATIO_BOUND,
                "k={k} len={len}"
            );
        }
    }

    #[test]
    fn eta_words_have_nested_commutator_shape() {
        // η_{ω,k} = σ_{x_1}(η_{shift ω, k-1}) and the inner word is killed by τ_{x_1}
        let om = OmegaWord::first_grigorchuk();
        for k in 1..6 {
            let x = -(om.letter_at(1) as i64);
            let inner = eta_word(&om.shift(1), k - 1);
            assert_eq!(sigma_twisted(&inner, x), eta_word(&om, k));
            assert_eq!(tau_twisted(&inner, x), Word::empty());
        }
    }

    proptest! {
        #[test]
        fn reduce_idempotent(u in arb_word(40)) {
            let r = reduce(&u);
            prop_assert!(r.is_reduced());
            prop_assert_eq!(reduce(&r), r);
        }

        #[test]
        fn reduce_congruence(u in arb_word(30), v in arb_word(30)) {
            prop_assert_eq!(reduce(&u.concat(&v)), multiply(&reduce(&u), &reduce(&v)));
        }

        #[test]
        fn inverse_cancels(u in arb_word(30)) {
            prop_assert_eq!(multiply(&u, &u.inverse()), Word::empty());
        }

        #[test]
        fn twist_has_order_three(u in arb_word(30)) {
            prop_assert_eq!(phi_twist(&phi_twist(&phi_twist(&u, 1), 1), 1), reduce(&u));
            prop_assert_eq!(phi_twist(&phi_twist(&u, 1), -1), reduce(&u));
        }

        #[test]
        fn parse_display_roundtrip(u in arb_word(30)) {
            prop_assert_eq!(u.to_string().parse::<Word>().unwrap(), u);
        }
    }
}
