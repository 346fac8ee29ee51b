//! Exact carriers: prime fields, extension fields `F_{p^n}`, residue rings
//! `Z/p^N` and the rationals, with additive-subgroup utilities.
//!
//! Elements of finite carriers are encoded as a single integer code. For
//! `F_p` and `Z/p^N` this is the residue itself; for `F_{p^n}` it is
//! `a_0 + a_1 p + ... + a_{n-1} p^{n-1}` where `a_i` is the coefficient of
//! `t^i`. Enumeration order is the order of these codes, so every set or
//! map keyed by [`Element`] iterates deterministically.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{checked_pow, inv_mod, is_prime, mul_mod};

/// Largest finite carrier the crate will build.
pub const MAX_CARDINALITY: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("element is not a unit")]
    NotAUnit,
    #[error("element does not belong to carrier {0}")]
    SpecMismatch(String),
    #[error("carrier has characteristic 2")]
    CharTwo,
    #[error("operation needs a finite carrier")]
    InfiniteCarrier,
    #[error("empty set")]
    EmptySet,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid carrier: {0}")]
    InvalidCarrier(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

type Result<T> = std::result::Result<T, AlgebraError>;

/// Which kind of carrier a [`RingSpec`] describes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Carrier {
    PrimeField {
        p: u64,
    },
    /// `modulus` holds the coefficients of a monic irreducible polynomial of
    /// degree `degree`, lowest degree first (length `degree + 1`).
    ExtensionField {
        p: u64,
        degree: u32,
        modulus: Vec<u64>,
    },
    ModularRing {
        p: u64,
        level: u32,
    },
    RationalField,
}

/// A validated carrier description.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingSpec {
    carrier: Carrier,
    // p, p^n or p^N; 0 for the rationals
    order: u64,
}

/// A canonical element encoding. Equality of elements is equality of
/// encodings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    Finite(u64),
    Rational(BigRational),
}

impl Element {
    pub fn rational(num: i64, den: i64) -> Element {
        Element::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn code(&self) -> Option<u64> {
        match self {
            Element::Finite(c) => Some(*c),
            Element::Rational(_) => None,
        }
    }
}

impl RingSpec {
    pub fn prime_field(p: u64) -> Result<RingSpec> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        Ok(RingSpec {
            carrier: Carrier::PrimeField { p },
            order: p,
        })
    }

    /// `F_{p^n}` built on [`irreducible_modulus`]`(p, n)`; `n = 1` gives `F_p`.
    pub fn extension_field(p: u64, degree: u32) -> Result<RingSpec> {
        if degree == 1 {
            return RingSpec::prime_field(p);
        }
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if degree == 0 {
            return Err(AlgebraError::InvalidCarrier(
                "degree must be at least 1".into(),
            ));
        }
        let modulus = irreducible_modulus(p, degree)?;
        RingSpec::extension_field_with_modulus(p, modulus)
    }

    /// `F_{p^n}` with an explicit modulus (monic, lowest degree first).
    pub fn extension_field_with_modulus(p: u64, modulus: Vec<u64>) -> Result<RingSpec> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if modulus.len() < 3 {
            return Err(AlgebraError::InvalidCarrier(
                "extension degree must be at least 2".into(),
            ));
        }
        let degree = (modulus.len() - 1) as u32;
        if *modulus.last().unwrap() != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(AlgebraError::InvalidCarrier(
                "modulus must be monic with coefficients in [0, p)".into(),
            ));
        }
        if !is_irreducible(p, &modulus) {
            return Err(AlgebraError::InvalidCarrier(format!(
                "modulus {} is reducible over F_{p}",
                poly_to_string(&modulus)
            )));
        }
        let order = checked_pow(p, degree)
            .filter(|&q| q <= MAX_CARDINALITY)
            .ok_or_else(|| AlgebraError::InvalidCarrier("field too large".into()))?;
        Ok(RingSpec {
            carrier: Carrier::ExtensionField { p, degree, modulus },
            order,
        })
    }

    pub fn modular_ring(p: u64, level: u32) -> Result<RingSpec> {
        if !is_prime(p) {
            return Err(AlgebraError::NotPrime(p));
        }
        if level == 0 {
            return Err(AlgebraError::InvalidCarrier(
                "level must be at least 1".into(),
            ));
        }
        let order = checked_pow(p, level)
            .filter(|&q| q <= MAX_CARDINALITY)
            .ok_or_else(|| AlgebraError::InvalidCarrier("ring too large".into()))?;
        Ok(RingSpec {
            carrier: Carrier::ModularRing { p, level },
            order,
        })
    }

    pub fn rationals() -> RingSpec {
        RingSpec {
            carrier: Carrier::RationalField,
            order: 0,
        }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    /// `p` for the finite carriers, 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        match &self.carrier {
            Carrier::PrimeField { p }
            | Carrier::ExtensionField { p, .. }
            | Carrier::ModularRing { p, .. } => *p,
            Carrier::RationalField => 0,
        }
    }

    pub fn cardinality(&self) -> Option<u64> {
        match self.carrier {
            Carrier::RationalField => None,
            _ => Some(self.order),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.cardinality().is_some()
    }

    pub fn is_field(&self) -> bool {
        !matches!(self.carrier, Carrier::ModularRing { level, .. } if level > 1)
    }

    pub fn contains(&self, a: &Element) -> bool {
        match (a, &self.carrier) {
            (Element::Rational(_), Carrier::RationalField) => true,
            (Element::Finite(_), Carrier::RationalField) => false,
            (Element::Finite(c), _) => *c < self.order,
            (Element::Rational(_), _) => false,
        }
    }

    fn check(&self, a: &Element) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(AlgebraError::SpecMismatch(self.to_string()))
        }
    }

    pub fn zero(&self) -> Element {
        match self.carrier {
            Carrier::RationalField => Element::Rational(BigRational::zero()),
            _ => Element::Finite(0),
        }
    }

    pub fn one(&self) -> Element {
        match self.carrier {
            Carrier::RationalField => Element::Rational(BigRational::one()),
            _ => Element::Finite(1),
        }
    }

    /// Image of an integer under `Z -> carrier`.
    pub fn from_int(&self, n: i64) -> Element {
        match &self.carrier {
            Carrier::RationalField => Element::Rational(BigRational::from_integer(n.into())),
            Carrier::PrimeField { p } | Carrier::ExtensionField { p, .. } => {
                Element::Finite(n.rem_euclid(*p as i64) as u64)
            }
            Carrier::ModularRing { .. } => {
                Element::Finite((n as i128).rem_euclid(self.order as i128) as u64)
            }
        }
    }

    pub fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add_unchecked(a, b))
    }

    pub fn neg(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub fn sub(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.sub_unchecked(a, b))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub fn inv(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        match (&self.carrier, a) {
            (Carrier::RationalField, Element::Rational(r)) => {
                if r.is_zero() {
                    Err(AlgebraError::NotAUnit)
                } else {
                    Ok(Element::Rational(r.recip()))
                }
            }
            (Carrier::PrimeField { .. } | Carrier::ModularRing { .. }, Element::Finite(c)) => {
                inv_mod(*c, self.order)
                    .map(Element::Finite)
                    .ok_or(AlgebraError::NotAUnit)
            }
            (Carrier::ExtensionField { .. }, Element::Finite(c)) => {
                if *c == 0 {
                    return Err(AlgebraError::NotAUnit);
                }
                // a^(q-2) in the multiplicative group of order q-1
                Ok(self.pow_unchecked(a, self.order - 2))
            }
            _ => unreachable!("checked above"),
        }
    }

    /// The unique `y` with `y + y = a`.
    pub fn halve(&self, a: &Element) -> Result<Element> {
        self.check(a)?;
        self.halve_unchecked(a)
    }

    pub(crate) fn halve_unchecked(&self, a: &Element) -> Result<Element> {
        match (&self.carrier, a) {
            (Carrier::RationalField, Element::Rational(r)) => {
                Ok(Element::Rational(r / BigInt::from(2)))
            }
            (_, Element::Finite(_)) => {
                if self.characteristic() == 2 {
                    return Err(AlgebraError::CharTwo);
                }
                let p = self.characteristic();
                let half = match self.carrier {
                    Carrier::ModularRing { .. } => inv_mod(2, self.order).expect("p is odd"),
                    _ => p.div_ceil(2),
                };
                Ok(self.mul_unchecked(a, &Element::Finite(half)))
            }
            _ => Err(AlgebraError::SpecMismatch(self.to_string())),
        }
    }

    pub(crate) fn add_unchecked(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Finite(x), Element::Finite(y)) => Element::Finite(match &self.carrier {
                Carrier::ExtensionField { p, degree, .. } => {
                    let (xa, ya) = (decode(*x, *p, *degree), decode(*y, *p, *degree));
                    let sum: Vec<u64> = xa.iter().zip(&ya).map(|(u, v)| (u + v) % p).collect();
                    encode(&sum, *p)
                }
                _ => ((*x as u128 + *y as u128) % self.order as u128) as u64,
            }),
            (Element::Rational(x), Element::Rational(y)) => Element::Rational(x + y),
            _ => panic!("mixed element encodings"),
        }
    }

    pub(crate) fn neg_unchecked(&self, a: &Element) -> Element {
        match a {
            Element::Finite(x) => Element::Finite(match &self.carrier {
                Carrier::ExtensionField { p, degree, .. } => {
                    let xa = decode(*x, *p, *degree);
                    let neg: Vec<u64> = xa.iter().map(|u| (p - u) % p).collect();
                    encode(&neg, *p)
                }
                _ => (self.order - x) % self.order,
            }),
            Element::Rational(x) => Element::Rational(-x),
        }
    }

    pub(crate) fn sub_unchecked(&self, a: &Element, b: &Element) -> Element {
        self.add_unchecked(a, &self.neg_unchecked(b))
    }

    pub(crate) fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        match (a, b) {
            (Element::Finite(x), Element::Finite(y)) => Element::Finite(match &self.carrier {
                Carrier::ExtensionField { p, degree, modulus } => {
                    ext_mul(*p, *degree, modulus, *x, *y)
                }
                _ => mul_mod(*x, *y, self.order),
            }),
            (Element::Rational(x), Element::Rational(y)) => Element::Rational(x * y),
            _ => panic!("mixed element encodings"),
        }
    }

    pub(crate) fn square_unchecked(&self, a: &Element) -> Element {
        self.mul_unchecked(a, a)
    }

    fn pow_unchecked(&self, a: &Element, mut e: u64) -> Element {
        let mut acc = self.one();
        let mut base = a.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            base = self.mul_unchecked(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// Every element exactly once, in code order.
    pub fn enumerate(&self) -> Result<Vec<Element>> {
        let q = self.cardinality().ok_or(AlgebraError::InfiniteCarrier)?;
        Ok((0..q).map(Element::Finite).collect())
    }

    /// Smallest additive subgroup containing `generators`.
    pub fn additive_closure(&self, generators: &[Element]) -> Result<SubgroupSpec> {
        if !self.is_finite() {
            return Err(AlgebraError::InfiniteCarrier);
        }
        for g in generators {
            self.check(g)?;
        }
        let mut elements = BTreeSet::new();
        elements.insert(self.zero());
        let mut queue: VecDeque<Element> = VecDeque::from([self.zero()]);
        while let Some(x) = queue.pop_front() {
            for g in generators {
                for y in [self.add_unchecked(&x, g), self.sub_unchecked(&x, g)] {
                    if elements.insert(y.clone()) {
                        queue.push_back(y);
                    }
                }
            }
        }
        Ok(SubgroupSpec {
            ambient: self.clone(),
            generators: generators.to_vec(),
            elements,
        })
    }

    /// If `s = x + K` for an additive subgroup `K`, returns `(K, x)` with `x`
    /// the first element of `s` in enumeration order.
    pub fn coset_test(&self, s: &BTreeSet<Element>) -> Result<Option<(SubgroupSpec, Element)>> {
        if !self.is_finite() {
            return Err(AlgebraError::InfiniteCarrier);
        }
        let shift = s.iter().next().ok_or(AlgebraError::EmptySet)?.clone();
        for a in s {
            self.check(a)?;
        }
        let k: BTreeSet<Element> = s.iter().map(|a| self.sub_unchecked(a, &shift)).collect();
        // a nonempty finite subset closed under addition is a subgroup
        for a in &k {
            for b in &k {
                if !k.contains(&self.add_unchecked(a, b)) {
                    return Ok(None);
                }
            }
        }
        let generators = greedy_generators(self, &k);
        Ok(Some((
            SubgroupSpec {
                ambient: self.clone(),
                generators,
                elements: k,
            },
            shift,
        )))
    }

    /// `{t^2 : t in a}`.
    pub fn squares_of_set<'a, I>(&self, a: I) -> Result<BTreeSet<Element>>
    where
        I: IntoIterator<Item = &'a Element>,
    {
        a.into_iter()
            .map(|t| {
                self.check(t)?;
                Ok(self.square_unchecked(t))
            })
            .collect()
    }

    /// All additive subgroups of a finite carrier, ordered by cardinality and
    /// then by element list.
    pub fn all_subgroups(&self) -> Result<Vec<SubgroupSpec>> {
        let elems = self.enumerate()?;
        let mut seen: BTreeSet<Vec<Element>> = BTreeSet::new();
        let mut out = Vec::new();
        let mut queue = VecDeque::from([self.additive_closure(&[])?]);
        while let Some(k) = queue.pop_front() {
            let key: Vec<Element> = k.elements.iter().cloned().collect();
            if !seen.insert(key) {
                continue;
            }
            for x in &elems {
                if !k.elements.contains(x) {
                    let mut gens = k.generators.clone();
                    gens.push(x.clone());
                    queue.push_back(self.additive_closure(&gens)?);
                }
            }
            out.push(k);
        }
        out.sort_by(|a, b| {
            a.cardinality()
                .cmp(&b.cardinality())
                .then_with(|| a.elements.iter().cmp(b.elements.iter()))
        });
        Ok(out)
    }

    /// Roots of `t^2 = v` in a finite carrier, in enumeration order.
    pub fn square_roots(&self, v: &Element) -> Result<Vec<Element>> {
        self.check(v)?;
        Ok(self
            .enumerate()?
            .into_iter()
            .filter(|t| &self.square_unchecked(t) == v)
            .collect())
    }

    pub fn parse_element(&self, s: &str) -> Result<Element> {
        let err = |reason: &str| AlgebraError::Parse {
            input: s.to_string(),
            reason: reason.into(),
        };
        let s = s.trim();
        let el = match &self.carrier {
            Carrier::RationalField => {
                let r = parse_rational(s).ok_or_else(|| err("expected num/den"))?;
                Element::Rational(r)
            }
            Carrier::ExtensionField { p, degree, .. } => {
                if let Ok(c) = s.parse::<u64>() {
                    Element::Finite(c)
                } else {
                    let coeffs = parse_poly(s, *p, *degree).ok_or_else(|| err("bad polynomial"))?;
                    Element::Finite(encode(&coeffs, *p))
                }
            }
            _ => {
                let n: i64 = s.parse().map_err(|_| err("expected an integer"))?;
                self.from_int(n)
            }
        };
        self.check(&el)?;
        Ok(el)
    }

    /// Textual encoding: residues and extension-field codes as integers,
    /// rationals as `num/den`.
    pub fn format_element(&self, a: &Element) -> String {
        match a {
            Element::Finite(c) => c.to_string(),
            Element::Rational(r) => format_rational(r),
        }
    }

    /// Coefficients (lowest degree first) of an extension-field element.
    pub fn coefficients(&self, a: &Element) -> Option<Vec<u64>> {
        match (&self.carrier, a) {
            (Carrier::ExtensionField { p, degree, .. }, Element::Finite(c)) => {
                Some(decode(*c, *p, *degree))
            }
            (Carrier::PrimeField { .. }, Element::Finite(c)) => Some(vec![*c]),
            _ => None,
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.carrier {
            Carrier::PrimeField { p } => write!(f, "fp:{p}"),
            Carrier::ExtensionField { p, degree, .. } => write!(f, "fpn:{p},{degree}"),
            Carrier::ModularRing { p, level } => write!(f, "zmod:{p},{level}"),
            Carrier::RationalField => write!(f, "q"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = AlgebraError;

    /// `fp:p`, `fpn:p,n`, `zmod:p,N` or `q`.
    fn from_str(s: &str) -> Result<RingSpec> {
        let err = |reason: &str| AlgebraError::Parse {
            input: s.to_string(),
            reason: reason.into(),
        };
        let s = s.trim();
        if s == "q" {
            return Ok(RingSpec::rationals());
        }
        let (kind, args) = s.split_once(':').ok_or_else(|| err("expected kind:args"))?;
        let nums: Vec<u64> = args
            .split(',')
            .map(|a| a.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err("arguments must be integers"))?;
        match (kind, nums.as_slice()) {
            ("fp", [p]) => RingSpec::prime_field(*p),
            ("fpn", [p, n]) => RingSpec::extension_field(*p, *n as u32),
            ("zmod", [p, n]) => RingSpec::modular_ring(*p, *n as u32),
            _ => Err(err("unknown carrier")),
        }
    }
}

/// An additive subgroup of a finite carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupSpec {
    ambient: RingSpec,
    generators: Vec<Element>,
    elements: BTreeSet<Element>,
}

impl SubgroupSpec {
    pub fn ambient(&self) -> &RingSpec {
        &self.ambient
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn elements(&self) -> &BTreeSet<Element> {
        &self.elements
    }

    pub fn cardinality(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, a: &Element) -> bool {
        self.elements.contains(a)
    }

    /// `x + K`.
    pub fn coset(&self, x: &Element) -> BTreeSet<Element> {
        self.elements
            .iter()
            .map(|k| self.ambient.add_unchecked(x, k))
            .collect()
    }

    /// One representative per coset, each the smallest element of its coset.
    pub fn coset_representatives(&self) -> Result<Vec<Element>> {
        let mut covered = BTreeSet::new();
        let mut reps = Vec::new();
        for x in self.ambient.enumerate()? {
            if covered.contains(&x) {
                continue;
            }
            covered.extend(self.coset(&x));
            reps.push(x);
        }
        Ok(reps)
    }
}

fn greedy_generators(spec: &RingSpec, k: &BTreeSet<Element>) -> Vec<Element> {
    let mut gens: Vec<Element> = Vec::new();
    let mut span: BTreeSet<Element> = BTreeSet::from([spec.zero()]);
    for x in k {
        if !span.contains(x) {
            gens.push(x.clone());
            span = spec
                .additive_closure(&gens)
                .expect("finite carrier")
                .elements;
        }
    }
    gens
}

fn decode(mut code: u64, p: u64, degree: u32) -> Vec<u64> {
    (0..degree)
        .map(|_| {
            let d = code % p;
            code /= p;
            d
        })
        .collect()
}

fn encode(coeffs: &[u64], p: u64) -> u64 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn ext_mul(p: u64, degree: u32, modulus: &[u64], x: u64, y: u64) -> u64 {
    let n = degree as usize;
    let (a, b) = (decode(x, p, degree), decode(y, p, degree));
    let mut prod = vec![0u64; 2 * n - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    for d in (n..prod.len()).rev() {
        let c = prod[d];
        if c == 0 {
            continue;
        }
        for (i, &mi) in modulus.iter().enumerate() {
            let idx = d - n + i;
            prod[idx] = (prod[idx] + p * p - c * mi % p) % p;
        }
    }
    encode(&prod[..n], p)
}

/// Remainder of `f` by the monic polynomial `g` over `F_p` (lowest degree
/// first, trailing zeros allowed in `f`).
fn poly_rem(f: &[u64], g: &[u64], p: u64) -> Vec<u64> {
    let mut r = f.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dg;
        if lead != 0 {
            for (i, &gi) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - lead * gi % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let n = (f.len() - 1) as u32;
    for d in 1..=n / 2 {
        let count = p.pow(d);
        for code in 0..count {
            let mut g = decode(code, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// The first monic irreducible polynomial of degree `n` over `F_p`, scanning
/// candidates `t^n + c_{n-1} t^{n-1} + ... + c_0` in increasing order of the
/// integer `c_0 + c_1 p + ... + c_{n-1} p^{n-1}`. Coefficients are returned
/// lowest degree first, including the leading 1.
pub fn irreducible_modulus(p: u64, n: u32) -> Result<Vec<u64>> {
    if !is_prime(p) {
        return Err(AlgebraError::NotPrime(p));
    }
    if n < 2 {
        return Err(AlgebraError::InvalidCarrier(
            "degree must be at least 2".into(),
        ));
    }
    let count = checked_pow(p, n)
        .filter(|&q| q <= MAX_CARDINALITY)
        .ok_or_else(|| AlgebraError::InvalidCarrier("field too large".into()))?;
    for code in 0..count {
        let mut f = decode(code, p, n);
        f.push(1);
        if is_irreducible(p, &f) {
            return Ok(f);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

pub fn poly_to_string(coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| match (i, c) {
            (0, c) => c.to_string(),
            (1, 1) => "t".to_string(),
            (1, c) => format!("{c}*t"),
            (i, 1) => format!("t^{i}"),
            (i, c) => format!("{c}*t^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

fn parse_poly(s: &str, p: u64, degree: u32) -> Option<Vec<u64>> {
    let mut coeffs = vec![0u64; degree as usize];
    for term in s.split('+') {
        let term = term.trim();
        let (c, power) = match term.split_once('t') {
            None => (term.parse::<u64>().ok()?, 0usize),
            Some((pre, post)) => {
                let c = match pre.trim().trim_end_matches('*').trim() {
                    "" => 1,
                    c => c.parse::<u64>().ok()?,
                };
                let power = match post.trim() {
                    "" => 1,
                    e => e.strip_prefix('^')?.trim().parse::<usize>().ok()?,
                };
                (c, power)
            }
        };
        if power >= coeffs.len() {
            return None;
        }
        coeffs[power] = (coeffs[power] + c) % p;
    }
    Some(coeffs)
}

/// Parses `num/den` or an integer into a reduced rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// `num/den` in lowest terms with a positive denominator (integers as `n/1`).
pub fn format_rational(r: &BigRational) -> String {
    debug_assert!(r.denom().is_positive());
    format!("{}/{}", r.numer(), r.denom())
}
