//! The group mini-language:
//!
//! ```text
//! free(2)  cycle(5)  grid(2)  gamma_free()  matrix_h()
//! grig((012)*, 4)  functor(0|12, 2, matrix_h())  gj((012)*, {1,3}, 8)
//! product(grid(1), cycle(3))
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use gjlab_core::family::{build_gj, GjSpec};
use gjlab_core::group::{CyclicGroup, FreeGroup, GammaFree, GridGroup};
use gjlab_core::{
    generator_matrices, grigorchuk_quotient, iterate_functor, product, Group, GroupError,
    OmegaWord, ParseError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupExpr {
    Free(usize),
    Cycle(usize),
    Grid(usize),
    GammaFree,
    MatrixH,
    Grig(OmegaWord, usize),
    Functor(OmegaWord, usize, Box<GroupExpr>),
    Gj(OmegaWord, BTreeSet<usize>, usize),
    Product(Vec<GroupExpr>),
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Free(r) => write!(f, "free({r})"),
            GroupExpr::Cycle(n) => write!(f, "cycle({n})"),
            GroupExpr::Grid(d) => write!(f, "grid({d})"),
            GroupExpr::GammaFree => write!(f, "gamma_free()"),
            GroupExpr::MatrixH => write!(f, "matrix_h()"),
            GroupExpr::Grig(om, k) => write!(f, "grig({om}, {k})"),
            GroupExpr::Functor(om, k, base) => write!(f, "functor({om}, {k}, {base})"),
            GroupExpr::Gj(om, j, n) => {
                let j: Vec<String> = j.iter().map(|x| x.to_string()).collect();
                write!(f, "gj({om}, {{{}}}, {n})", j.join(","))
            }
            GroupExpr::Product(parts) => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "product({})", parts.join(", "))
            }
        }
    }
}

impl GroupExpr {
    pub fn build(&self) -> Result<Group, GroupError> {
        Ok(match self {
            GroupExpr::Free(r) => Arc::new(FreeGroup::new(*r)?),
            GroupExpr::Cycle(n) => Arc::new(CyclicGroup::new(*n)?),
            GroupExpr::Grid(d) => Arc::new(GridGroup::new(*d)?),
            GroupExpr::GammaFree => Arc::new(GammaFree),
            GroupExpr::MatrixH => Arc::new(generator_matrices()),
            GroupExpr::Grig(om, k) => grigorchuk_quotient(om, *k),
            GroupExpr::Functor(om, k, base) => iterate_functor(om, *k, base.build()?)?,
            GroupExpr::Gj(om, j, n) => {
                Arc::new(build_gj(&GjSpec::new(om.clone(), j.iter().copied(), *n))?)
            }
            GroupExpr::Product(parts) => Arc::new(product(
                parts
                    .iter()
                    .map(GroupExpr::build)
                    .collect::<Result<_, _>>()?,
            )?),
        })
    }
}

pub fn parse(src: &str) -> Result<GroupExpr, ParseError> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.pos, msg)
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected '{ch}'")))
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        let hit = self.rest().starts_with(ch);
        if hit {
            self.pos += ch.len_utf8();
        }
        hit
    }

    fn ident(&mut self) -> Result<&str, ParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a group name"));
        }
        let start = self.pos;
        self.pos += len;
        Ok(&self.src[start..self.pos])
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a nonnegative integer"));
        }
        let v = self.rest()[..len]
            .parse()
            .map_err(|_| self.err("integer out of range"))?;
        self.pos += len;
        Ok(v)
    }

    fn omega(&mut self) -> Result<OmegaWord, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = if self.rest().starts_with('(') {
            match self.rest().find(')') {
                Some(close) if self.rest()[close + 1..].starts_with('*') => close + 2,
                _ => return Err(self.err("periodic omega must look like (012)*")),
            }
        } else {
            self.rest()
                .find(|c: char| !(c.is_ascii_digit() || c == '|'))
                .unwrap_or(self.rest().len())
        };
        self.pos += len;
        OmegaWord::parse(&self.src[start..self.pos])
            .map_err(|e| ParseError::new(start + e.position, e.message))
    }

    fn set(&mut self) -> Result<BTreeSet<usize>, ParseError> {
        self.expect('{')?;
        let mut out = BTreeSet::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            let at = self.pos;
            let v = self.int()?;
            if v == 0 {
                return Err(ParseError::new(at, "levels in J start at 1"));
            }
            out.insert(v);
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    fn positive(&mut self, what: &str) -> Result<usize, ParseError> {
        let at = self.pos;
        let v = self.int()?;
        if v == 0 {
            return Err(ParseError::new(at, format!("{what} must be positive")));
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<GroupExpr, ParseError> {
        self.skip_ws();
        let at = self.pos;
        let name = self.ident()?.to_string();
        self.expect('(')?;
        let e = match name.as_str() {
            "free" => GroupExpr::Free(self.positive("rank")?),
            "cycle" => GroupExpr::Cycle(self.positive("order")?),
            "grid" => GroupExpr::Grid(self.positive("dimension")?),
            "gamma_free" => GroupExpr::GammaFree,
            "matrix_h" => GroupExpr::MatrixH,
            "grig" => {
                let om = self.omega()?;
                self.expect(',')?;
                GroupExpr::Grig(om, self.int()?)
            }
            "functor" => {
                let om = self.omega()?;
                self.expect(',')?;
                let k = self.int()?;
                self.expect(',')?;
                GroupExpr::Functor(om, k, Box::new(self.expr()?))
            }
            "gj" => {
                let om = self.omega()?;
                self.expect(',')?;
                let j = self.set()?;
                self.expect(',')?;
                GroupExpr::Gj(om, j, self.int()?)
            }
            "product" => {
                let mut parts = vec![self.expr()?];
                while self.eat(',') {
                    parts.push(self.expr()?);
                }
                GroupExpr::Product(parts)
            }
            other => return Err(ParseError::new(at, format!("unknown group {other:?}"))),
        };
        self.expect(')')?;
        Ok(e)
    }
}
