//! Sparse integer polynomials.
//!
//! [`SparsePoly`] is the general container (constants allowed, may be zero);
//! it is what differentiation produces. [`Polynomial`] wraps it with the
//! invariants every analysis entry point relies on: at least one term and no
//! constant term.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modarith::mul_mod;

const NAMED_VARS: [char; 6] = ['x', 'y', 'z', 'u', 'v', 'w'];

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        ExponentVector(entries)
    }

    pub fn zero(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&e| e as i64).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsePoly {
    n: usize,
    terms: BTreeMap<ExponentVector, BigInt>,
}

impl SparsePoly {
    pub fn zero(n: usize) -> Self {
        SparsePoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, combining
    /// like terms and dropping zeros.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut p = SparsePoly::zero(n);
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(Error::InvalidInput(format!(
                    "exponent vector of length {} in a {}-variable polynomial",
                    exps.len(),
                    n
                )));
            }
            p.add_term(ExponentVector(exps), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: ExponentVector, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> Option<&BigInt> {
        self.terms.get(e)
    }

    pub fn support(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.keys()
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&ExponentVector::zero(self.n))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Largest exponent of variable `j` over the support.
    pub fn max_exponent(&self, j: usize) -> u32 {
        self.terms.keys().map(|e| e.0[j]).max().unwrap_or(0)
    }

    /// Partial derivatives with respect to every variable.
    pub fn gradient(&self) -> Vec<SparsePoly> {
        (0..self.n)
            .map(|j| {
                let mut d = SparsePoly::zero(self.n);
                for (e, c) in &self.terms {
                    let ej = e.0[j];
                    if ej == 0 {
                        continue;
                    }
                    let mut shifted = e.0.clone();
                    shifted[j] -= 1;
                    d.add_term(ExponentVector(shifted), c * BigInt::from(ej));
                }
                d
            })
            .collect()
    }

    /// Subpolynomial keeping the terms whose exponents satisfy `keep`.
    pub fn restrict_by<F>(&self, mut keep: F) -> SparsePoly
    where
        F: FnMut(&ExponentVector) -> bool,
    {
        SparsePoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Common total degree of the support, if there is one.
    pub fn homogeneity(&self) -> Option<u64> {
        let mut degrees = self.terms.keys().map(ExponentVector::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Exact evaluation over the integers.
    pub fn eval_big(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.n);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.0.iter()
                    .zip(point)
                    .fold(c.clone(), |acc, (&ej, x)| acc * num_traits::pow(x.clone(), ej as usize))
            })
            .sum()
    }

    /// Multiplies every coefficient by `k`.
    pub fn scaled(&self, k: &BigInt) -> SparsePoly {
        let mut out = SparsePoly::zero(self.n);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    /// Reorders variables: variable `j` of the result is variable `perm[j]`
    /// of `self`.
    pub fn permuted(&self, perm: &[usize]) -> SparsePoly {
        assert_eq!(perm.len(), self.n);
        let mut out = SparsePoly::zero(self.n);
        for (e, c) in &self.terms {
            let exps = perm.iter().map(|&src| e.0[src]).collect();
            out.add_term(ExponentVector(exps), c.clone());
        }
        out
    }

    /// Coefficients reduced into `[0, modulus)`, paired with their exponents.
    pub fn residues(&self, modulus: u64) -> Vec<(ExponentVector, u64)> {
        let m = BigInt::from(modulus);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut r = c % &m;
                if r.is_negative() {
                    r += &m;
                }
                (e.clone(), r.to_u64().expect("residue fits modulus"))
            })
            .filter(|(_, r)| *r != 0)
            .collect()
    }

    fn var_name(&self, j: usize) -> String {
        if self.n <= NAMED_VARS.len() {
            NAMED_VARS[j].to_string()
        } else {
            format!("x{}", j + 1)
        }
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Graded order reads more naturally than the raw map order.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            let mag = c.abs();
            let mut factors = Vec::new();
            for (j, &ej) in e.0.iter().enumerate() {
                match ej {
                    0 => {}
                    1 => factors.push(self.var_name(j)),
                    _ => factors.push(format!("{}^{}", self.var_name(j), ej)),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", mag, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// A nonzero polynomial with `f(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial(SparsePoly);

impl Polynomial {
    pub fn new(p: SparsePoly) -> Result<Self> {
        if p.n == 0 {
            return Err(Error::InvalidInput("polynomial needs at least one variable".into()));
        }
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !p.constant_term().is_zero() {
            return Err(Error::ConstantTermNonzero);
        }
        Ok(Polynomial(p))
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_polynomial(text, None)
    }

    pub fn as_sparse(&self) -> &SparsePoly {
        &self.0
    }

    /// Terms of `f` whose exponents lie in `set`; `None` when nothing is left.
    pub fn face_restriction(&self, set: &BTreeSet<ExponentVector>) -> Option<Polynomial> {
        self.restrict_where(|e| set.contains(e))
    }

    pub fn restrict_where<F>(&self, keep: F) -> Option<Polynomial>
    where
        F: FnMut(&ExponentVector) -> bool,
    {
        let r = self.0.restrict_by(keep);
        (!r.is_zero()).then_some(Polynomial(r))
    }
}

impl Deref for Polynomial {
    type Target = SparsePoly;

    fn deref(&self) -> &SparsePoly {
        &self.0
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Parses `text` into a [`Polynomial`].
///
/// Grammar (whitespace ignored):
///
/// ```text
/// poly   := term (('+'|'-') term)*
/// term   := [sign] [integer] ('*'? factor)*
/// factor := var ('^' natural)?
/// var    := 'x' natural | 'x' | 'y' | 'z' | 'u' | 'v' | 'w'
/// ```
///
/// `x, y, z, u, v, w` are `x1 .. x6`. Without a hint the dimension is the
/// highest variable index that appears.
pub fn parse_polynomial(text: &str, dimension_hint: Option<usize>) -> Result<Polynomial> {
    Polynomial::new(parse_sparse(text, dimension_hint)?)
}

/// Like [`parse_polynomial`] but without the `f(0) = 0` / nonzero checks.
pub fn parse_sparse(text: &str, dimension_hint: Option<usize>) -> Result<SparsePoly> {
    let raw = Parser::new(text).parse()?;
    let used = raw
        .iter()
        .flat_map(|(_, factors)| factors.iter().map(|&(v, _)| v))
        .max()
        .unwrap_or(0);
    let n = match dimension_hint {
        Some(0) => return Err(Error::InvalidInput("dimension must be positive".into())),
        Some(d) if used > d => return Err(Error::DimensionMismatch { declared: d, used }),
        Some(d) => d,
        None => used.max(1),
    };
    let mut p = SparsePoly::zero(n);
    for (coef, factors) in raw {
        let mut exps = vec![0u32; n];
        for (var, e) in factors {
            exps[var - 1] = exps[var - 1]
                .checked_add(e)
                .ok_or_else(|| Error::Overflow("exponent".into()))?;
        }
        p.add_term(ExponentVector(exps), coef);
    }
    Ok(p)
}

type RawTerm = (BigInt, Vec<(usize, u32)>);

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        let chars: Vec<_> = text.char_indices().filter(|(_, c)| !c.is_whitespace()).collect();
        Parser {
            chars,
            pos: 0,
            end: text.len(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map(|&(i, _)| i).unwrap_or(self.end)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.offset(),
            message: message.into(),
        })
    }

    fn parse(mut self) -> Result<Vec<RawTerm>> {
        if self.chars.is_empty() {
            return self.error("empty input");
        }
        let mut terms = vec![self.term(false)?];
        while let Some(c) = self.peek() {
            match c {
                '+' | '-' => {
                    self.pos += 1;
                    let (coef, factors) = self.term(c == '-')?;
                    terms.push((coef, factors));
                }
                _ => return self.error(format!("unexpected '{c}'")),
            }
        }
        Ok(terms)
    }

    fn term(&mut self, mut negate: bool) -> Result<RawTerm> {
        match self.peek() {
            Some('+') => self.pos += 1,
            Some('-') => {
                self.pos += 1;
                negate = !negate;
            }
            _ => {}
        }
        let coef = self.integer();
        let mut factors = Vec::new();
        loop {
            match self.peek() {
                Some('*') => {
                    if coef.is_none() && factors.is_empty() {
                        return self.error("'*' must follow a coefficient or factor");
                    }
                    self.pos += 1;
                    if !self.at_var() {
                        return self.error("expected a variable after '*'");
                    }
                    factors.push(self.factor()?);
                }
                Some(_) if self.at_var() => factors.push(self.factor()?),
                _ => break,
            }
        }
        if coef.is_none() && factors.is_empty() {
            return self.error("expected a term");
        }
        let mut coef = coef.unwrap_or_else(BigInt::one);
        if negate {
            coef = -coef;
        }
        Ok((coef, factors))
    }

    fn at_var(&self) -> bool {
        matches!(self.peek(), Some(c) if NAMED_VARS.contains(&c))
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
    }

    fn integer(&mut self) -> Option<BigInt> {
        self.digits().map(|s| s.parse().expect("ascii digits"))
    }

    fn natural(&mut self) -> Result<Option<u64>> {
        let start = self.offset();
        match self.digits() {
            None => Ok(None),
            Some(s) => s.parse().map(Some).map_err(|_| Error::Syntax {
                position: start,
                message: format!("number {s} is too large"),
            }),
        }
    }

    fn factor(&mut self) -> Result<(usize, u32)> {
        let name = self.peek().expect("caller checked a variable");
        let start = self.offset();
        self.pos += 1;
        let var = if name == 'x' {
            match self.natural()? {
                Some(0) => {
                    return Err(Error::Syntax {
                        position: start,
                        message: "variable indices start at 1".into(),
                    })
                }
                Some(i) => usize::try_from(i).map_err(|_| Error::Overflow("variable index".into()))?,
                None => 1,
            }
        } else {
            NAMED_VARS.iter().position(|&c| c == name).expect("named variable") + 1
        };
        let exp = if self.peek() == Some('^') {
            self.pos += 1;
            match self.natural()? {
                Some(e) => u32::try_from(e).map_err(|_| Error::Overflow("exponent".into()))?,
                None => return self.error("expected an exponent after '^'"),
            }
        } else {
            1
        };
        Ok((var, exp))
    }
}

/// Evaluates a polynomial modulo a fixed modulus using per-variable power
/// tables. Setup is `O(modulus * distinct exponents)` per variable; each
/// evaluation is `O(#terms * n)` table lookups.
#[derive(Clone, Debug)]
pub struct ModularEvaluator {
    modulus: u64,
    n: usize,
    // tables[j][t] holds x^(exps[j][t]) mod modulus for x in [0, modulus)
    tables: Vec<Vec<Vec<u64>>>,
    terms: Vec<(u64, Vec<(usize, usize)>)>,
}

impl ModularEvaluator {
    pub fn new(f: &SparsePoly, modulus: u64) -> Self {
        assert!(modulus >= 2, "modulus must be at least 2");
        let n = f.n();
        let mut exps: Vec<Vec<u32>> = vec![Vec::new(); n];
        let residues = f.residues(modulus);
        for (e, _) in &residues {
            for (j, &ej) in e.entries().iter().enumerate() {
                if ej > 0 && !exps[j].contains(&ej) {
                    exps[j].push(ej);
                }
            }
        }
        let size = usize::try_from(modulus).expect("modulus fits in memory");
        let tables = exps
            .iter()
            .map(|list| {
                list.iter()
                    .map(|&e| (0..size as u64).map(|x| crate::modarith::pow_mod(x, e as u64, modulus)).collect())
                    .collect()
            })
            .collect();
        let terms = residues
            .into_iter()
            .map(|(e, c)| {
                let lookups = e
                    .entries()
                    .iter()
                    .enumerate()
                    .filter(|(_, &ej)| ej > 0)
                    .map(|(j, ej)| (j, exps[j].iter().position(|x| x == ej).expect("exponent indexed")))
                    .collect();
                (c, lookups)
            })
            .collect();
        ModularEvaluator {
            modulus,
            n,
            tables,
            terms,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `true` when every coefficient vanishes modulo the modulus.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, point: &[u64]) -> u64 {
        debug_assert_eq!(point.len(), self.n);
        let q = self.modulus;
        let mut acc = 0u64;
        for (c, lookups) in &self.terms {
            let mut t = *c;
            for &(j, slot) in lookups {
                t = mul_mod(t, self.tables[j][slot][point[j] as usize], q);
            }
            acc += t;
            if acc >= q {
                acc -= q;
            }
        }
        acc
    }
}

/// `f(point) mod modulus` at a single point. Use a [`ModularEvaluator`] when
/// evaluating many points.
pub fn eval_mod(f: &SparsePoly, point: &[u64], modulus: u64) -> u64 {
    assert!(modulus >= 2, "modulus must be at least 2");
    assert_eq!(point.len(), f.n());
    f.residues(modulus).iter().fold(0u64, |acc, (e, c)| {
        let term = e
            .entries()
            .iter()
            .zip(point)
            .fold(*c, |t, (&ej, &x)| mul_mod(t, crate::modarith::pow_mod(x % modulus, ej as u64, modulus), modulus));
        ((acc as u128 + term as u128) % modulus as u128) as u64
    })
}
