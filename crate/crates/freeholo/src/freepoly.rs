//! Words and free polynomials over d non-commuting variables.
//!
//! A [`Word`] is a finite product of variables, stored as 1-based indices;
//! the empty word is the unit. A [`FreePoly`] maps words to complex
//! coefficients with graded-lexicographic term order, which makes printing
//! and serialization canonical. Multiplication concatenates words — nothing
//! commutes, and no numerical cleanup happens here: zero coefficients are
//! dropped only when exactly zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{matmul, CMatrix, MatrixTuple};
use crate::Scalar;

/// A monomial: ordered list of 1-based variable indices. Empty = unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn unit() -> Self {
        Word(Vec::new())
    }

    pub fn var(r: u32) -> Self {
        Word(vec![r])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Concatenation: the non-commutative product of monomials.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

/// Graded-lexicographic order: shorter words first, then lexicographic.
impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A free polynomial: complex linear combination of words.
#[derive(Debug, Clone, PartialEq)]
pub struct FreePoly {
    nvars: usize,
    terms: BTreeMap<Word, Scalar>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    word: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    nvars: usize,
    terms: Vec<TermJson>,
}

impl Serialize for FreePoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson {
                    word: w.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FreePoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let mut p = FreePoly::zero(raw.nvars);
        for t in raw.terms {
            let w = Word(t.word);
            if w.max_index() as usize > raw.nvars {
                return Err(serde::de::Error::custom(format!(
                    "word uses variable x{} but nvars = {}",
                    w.max_index(),
                    raw.nvars
                )));
            }
            p.add_term(w, Complex::new(t.re, t.im));
        }
        Ok(p)
    }
}

impl FreePoly {
    pub fn zero(nvars: usize) -> Self {
        FreePoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Scalar) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Word::unit(), c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Scalar::ONE)
    }

    /// The variable `x_r` (1-based). Panics if r is 0 or exceeds nvars.
    pub fn var(nvars: usize, r: u32) -> Self {
        assert!(r >= 1 && (r as usize) <= nvars, "variable index {r}");
        let mut p = Self::zero(nvars);
        p.add_term(Word::var(r), Scalar::ONE);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Word, Scalar)>) -> Self {
        let mut p = Self::zero(nvars);
        for (w, c) in terms {
            debug_assert!(w.max_index() as usize <= nvars);
            p.add_term(w, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Promote to a larger variable count without changing terms.
    pub fn with_nvars(&self, nvars: usize) -> FreePoly {
        assert!(nvars >= self.min_nvars());
        FreePoly {
            nvars,
            terms: self.terms.clone(),
        }
    }

    fn min_nvars(&self) -> usize {
        self.terms
            .keys()
            .map(|w| w.max_index() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, w: &Word) -> Scalar {
        self.terms.get(w).copied().unwrap_or(Scalar::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant term (coefficient of the unit word).
    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Word::unit())
    }

    /// Largest word degree present; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.degree()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self, k: usize) -> bool {
        self.terms.keys().all(|w| w.degree() == k)
    }

    fn add_term(&mut self, w: Word, c: Scalar) {
        if c == Scalar::ZERO {
            return;
        }
        let entry = self.terms.entry(w);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = *o.get() + c;
                if s == Scalar::ZERO {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &FreePoly) -> FreePoly {
        let nvars = self.nvars.max(other.nvars);
        let mut out = FreePoly {
            nvars,
            terms: self.terms.clone(),
        };
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &FreePoly) -> FreePoly {
        self.add(&other.scale(-Scalar::ONE))
    }

    pub fn scale(&self, a: Scalar) -> FreePoly {
        if a == Scalar::ZERO {
            return FreePoly::zero(self.nvars);
        }
        FreePoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c * a)).collect(),
        }
    }

    /// Non-commutative product: words concatenate.
    pub fn mul(&self, other: &FreePoly) -> FreePoly {
        let nvars = self.nvars.max(other.nvars);
        let mut out = FreePoly::zero(nvars);
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                out.add_term(wa.concat(wb), ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> FreePoly {
        let mut acc = FreePoly::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Drop every term of degree above `k`.
    pub fn truncate_degree(&self, k: usize) -> FreePoly {
        FreePoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.degree() <= k)
                .map(|(w, c)| (w.clone(), *c))
                .collect(),
        }
    }

    /// Split into homogeneous components indexed by degree. Component `k`
    /// holds exactly the degree-k terms; the components sum back to `self`.
    /// The zero polynomial yields an empty list.
    pub fn homogeneous_split(&self) -> Vec<FreePoly> {
        if self.is_zero() {
            return Vec::new();
        }
        let deg = self.degree();
        let mut out = vec![FreePoly::zero(self.nvars); deg + 1];
        for (w, c) in &self.terms {
            out[w.degree()].add_term(w.clone(), *c);
        }
        out
    }

    /// Evaluate on a matrix tuple: words become ordered products of the
    /// parts, the unit word becomes the identity. Requires `nvars <= x.len()`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMatrix> {
        let mut cache = EvalCache::new(x);
        self.eval_cached(&mut cache)
    }

    /// Evaluate through a shared word-product cache. Outputs are identical to
    /// [`FreePoly::eval`]; repeated words and shared prefixes across many
    /// polynomials at a fixed point are computed once.
    pub fn eval_cached(&self, cache: &mut EvalCache<'_>) -> Result<CMatrix> {
        if self.min_nvars() > cache.x.len() {
            return Err(Error::Dim(format!(
                "polynomial uses {} variables, point has {}",
                self.min_nvars(),
                cache.x.len()
            )));
        }
        let n = cache.x.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (w, c) in &self.terms {
            let prod = cache.word_product(w)?;
            acc = acc.add(&prod.scale(*c))?;
        }
        Ok(acc)
    }
}

/// Memoized word-product evaluation at a fixed point. Confined to one
/// evaluation session; not shared across threads.
pub struct EvalCache<'a> {
    x: &'a MatrixTuple,
    products: HashMap<Word, CMatrix>,
    hits: usize,
}

impl<'a> EvalCache<'a> {
    pub fn new(x: &'a MatrixTuple) -> Self {
        EvalCache {
            x,
            products: HashMap::new(),
            hits: 0,
        }
    }

    pub fn point(&self) -> &MatrixTuple {
        self.x
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    /// `x^w`, extending cached prefixes letter by letter.
    pub fn word_product(&mut self, w: &Word) -> Result<CMatrix> {
        if w.0.is_empty() {
            return Ok(CMatrix::identity(self.x.dim()));
        }
        if let Some(m) = self.products.get(w) {
            self.hits += 1;
            return Ok(m.clone());
        }
        let mut acc: Option<CMatrix> = None;
        for k in 1..=w.0.len() {
            let prefix = Word(w.0[..k].to_vec());
            if let Some(m) = self.products.get(&prefix) {
                acc = Some(m.clone());
                continue;
            }
            let last = w.0[k - 1] as usize;
            if last == 0 || last > self.x.len() {
                return Err(Error::Dim(format!(
                    "word uses variable x{last}, point has {}",
                    self.x.len()
                )));
            }
            let head = match acc {
                Some(m) => m,
                None => CMatrix::identity(self.x.dim()),
            };
            let next = matmul(&head, self.x.part(last))?;
            self.products.insert(prefix, next.clone());
            acc = Some(next);
        }
        Ok(acc.expect("word is non-empty"))
    }
}
