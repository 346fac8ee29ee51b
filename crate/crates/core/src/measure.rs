//! Finite-support distributions with exact rational masses, the push-forward
//! under `T(x, y) = (x + y, (x - y)^2)`, independence tests and locally
//! constant densities on `Z_p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{
    format_rational, parse_rational, AlgebraError, Carrier, Element, RingSpec, SubgroupSpec,
};
use crate::arith::{big_pow, checked_pow};
use crate::padic::{
    is_square, norm, padd, phalf, psub, sqrt_hensel, BranchTable, PAdic, PadicError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("masses must be positive, got {0}")]
    NonPositiveMass(String),
    #[error("masses sum to {0}, not 1")]
    NotNormalized(String),
    #[error("empty distribution")]
    Empty,
    #[error("distributions live on different carriers ({0} and {1})")]
    CarrierMismatch(String, String),
    #[error("carrier has characteristic 2")]
    CharTwo,
    #[error("operation needs a finite field, got {0}")]
    NotAField(String),
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),
    #[error("scale error: {0}")]
    ScaleError(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

type Result<T> = std::result::Result<T, MeasureError>;

/// A probability distribution with finite support and exact masses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dist {
    carrier: RingSpec,
    pmf: BTreeMap<Element, BigRational>,
}

impl Dist {
    /// Validates membership, positivity and total mass 1. Explicit zero
    /// masses are dropped.
    pub fn new(carrier: RingSpec, pmf: BTreeMap<Element, BigRational>) -> Result<Dist> {
        let mut total = BigRational::zero();
        let mut clean = BTreeMap::new();
        for (x, m) in pmf {
            if !carrier.contains(&x) {
                return Err(AlgebraError::SpecMismatch(carrier.to_string()).into());
            }
            if m.is_negative() {
                return Err(MeasureError::NonPositiveMass(format_rational(&m)));
            }
            if m.is_zero() {
                continue;
            }
            total += &m;
            clean.insert(x, m);
        }
        if clean.is_empty() {
            return Err(MeasureError::Empty);
        }
        if !total.is_one() {
            return Err(MeasureError::NotNormalized(format_rational(&total)));
        }
        Ok(Dist {
            carrier,
            pmf: clean,
        })
    }

    /// Normalizes nonnegative integer weights.
    pub fn from_weights(carrier: RingSpec, weights: BTreeMap<Element, u64>) -> Result<Dist> {
        let total: u64 = weights.values().sum();
        if total == 0 {
            return Err(MeasureError::Empty);
        }
        let pmf = weights
            .into_iter()
            .map(|(x, w)| (x, BigRational::new(BigInt::from(w), BigInt::from(total))))
            .collect();
        Dist::new(carrier, pmf)
    }

    /// Uniform on a nonempty set.
    pub fn uniform(carrier: RingSpec, support: &BTreeSet<Element>) -> Result<Dist> {
        Dist::from_weights(carrier, support.iter().map(|x| (x.clone(), 1)).collect())
    }

    pub fn carrier(&self) -> &RingSpec {
        &self.carrier
    }

    pub fn pmf(&self) -> &BTreeMap<Element, BigRational> {
        &self.pmf
    }

    pub fn mass(&self, x: &Element) -> BigRational {
        self.pmf.get(x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> BTreeSet<Element> {
        self.pmf.keys().cloned().collect()
    }

    /// `elem:num/den,...` in element order.
    pub fn to_literal(&self) -> String {
        self.pmf
            .iter()
            .map(|(x, m)| format!("{}:{}", self.carrier.format_element(x), format_rational(m)))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse(carrier: &RingSpec, literal: &str) -> Result<Dist> {
        let bad = |reason: &str| MeasureError::Parse {
            input: literal.to_string(),
            reason: reason.to_string(),
        };
        let mut pmf: BTreeMap<Element, BigRational> = BTreeMap::new();
        for item in literal.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (x, m) = item
                .split_once(':')
                .ok_or_else(|| bad("expected elem:mass"))?;
            let x = carrier.parse_element(x.trim())?;
            let m = parse_rational(m).ok_or_else(|| bad("mass is not a rational"))?;
            *pmf.entry(x).or_insert_with(BigRational::zero) += m;
        }
        Dist::new(carrier.clone(), pmf)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl Serialize for Dist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.pmf.len()))?;
        for (x, m) in &self.pmf {
            seq.serialize_element(&(self.carrier.format_element(x), format_rational(m)))?;
        }
        seq.end()
    }
}

/// The point mass `E_x`.
pub fn degenerate(carrier: &RingSpec, x: Element) -> Result<Dist> {
    Dist::new(carrier.clone(), BTreeMap::from([(x, BigRational::one())]))
}

/// The uniform distribution on a finite subgroup.
pub fn haar(k: &SubgroupSpec) -> Result<Dist> {
    Dist::uniform(k.ambient().clone(), k.elements())
}

/// The distribution of `ξ + x`.
pub fn shift(mu: &Dist, x: &Element) -> Result<Dist> {
    let c = &mu.carrier;
    c.add(&c.zero(), x)?;
    let pmf = mu
        .pmf
        .iter()
        .map(|(y, m)| (c.add_unchecked(y, x), m.clone()))
        .collect();
    Ok(Dist {
        carrier: c.clone(),
        pmf,
    })
}

/// A distribution on pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDist {
    carrier: RingSpec,
    pmf: BTreeMap<(Element, Element), BigRational>,
}

impl JointDist {
    pub fn carrier(&self) -> &RingSpec {
        &self.carrier
    }

    pub fn pmf(&self) -> &BTreeMap<(Element, Element), BigRational> {
        &self.pmf
    }

    pub fn mass(&self, u: &Element, v: &Element) -> BigRational {
        self.pmf
            .get(&(u.clone(), v.clone()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn total(&self) -> BigRational {
        self.pmf
            .values()
            .fold(BigRational::zero(), |acc, m| acc + m)
    }

    fn from_raw(carrier: RingSpec, raw: BTreeMap<(Element, Element), BigRational>) -> JointDist {
        let pmf = raw.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        JointDist { carrier, pmf }
    }
}

/// Serialized as the sorted list of `[u, v, "num/den"]` triples.
impl Serialize for JointDist {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.pmf.len()))?;
        for ((u, v), m) in &self.pmf {
            let c = &self.carrier;
            seq.serialize_element(&(c.format_element(u), c.format_element(v), format_rational(m)))?;
        }
        seq.end()
    }
}

fn same_carrier(a: &RingSpec, b: &RingSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(MeasureError::CarrierMismatch(a.to_string(), b.to_string()))
    }
}

/// The law of `T(ξ, η)` for independent `ξ ~ μ`, `η ~ ν`.
pub fn push_t(mu: &Dist, nu: &Dist) -> Result<JointDist> {
    same_carrier(&mu.carrier, &nu.carrier)?;
    let c = &mu.carrier;
    let mut raw: BTreeMap<(Element, Element), BigRational> = BTreeMap::new();
    for (x, mx) in &mu.pmf {
        for (y, my) in &nu.pmf {
            let s = c.add_unchecked(x, y);
            let d = c.square_unchecked(&c.sub_unchecked(x, y));
            *raw.entry((s, d)).or_insert_with(BigRational::zero) += mx * my;
        }
    }
    Ok(JointDist::from_raw(c.clone(), raw))
}

/// The law of `(S, D)` for an i.i.d. pair from the closed form
/// `(u, 0) -> μ(u/2)^2` and `(u, t^2) -> 2 μ((u+t)/2) μ((u-t)/2)`.
pub fn closed_form_sd(mu: &Dist) -> Result<JointDist> {
    let c = &mu.carrier;
    match c.carrier() {
        Carrier::PrimeField { .. } | Carrier::ExtensionField { .. } => {}
        _ => return Err(MeasureError::NotAField(c.to_string())),
    }
    if c.characteristic() == 2 {
        return Err(MeasureError::CharTwo);
    }
    let elements = c.enumerate()?;
    // one root t per nonzero square t^2
    let mut roots: BTreeMap<Element, Element> = BTreeMap::new();
    for t in elements.iter().filter(|t| **t != c.zero()) {
        roots
            .entry(c.square_unchecked(t))
            .or_insert_with(|| t.clone());
    }
    let two = BigRational::from_integer(BigInt::from(2));
    let mut raw = BTreeMap::new();
    for u in &elements {
        let h = c.halve_unchecked(u)?;
        let m = mu.mass(&h);
        raw.insert((u.clone(), c.zero()), &m * &m);
        for (v, t) in &roots {
            let a = c.halve_unchecked(&c.add_unchecked(u, t))?;
            let b = c.halve_unchecked(&c.sub_unchecked(u, t))?;
            raw.insert((u.clone(), v.clone()), &two * mu.mass(&a) * mu.mass(&b));
        }
    }
    Ok(JointDist::from_raw(c.clone(), raw))
}

/// Row and column sums.
pub fn marginals(j: &JointDist) -> (Dist, Dist) {
    let mut s: BTreeMap<Element, BigRational> = BTreeMap::new();
    let mut d: BTreeMap<Element, BigRational> = BTreeMap::new();
    for ((u, v), m) in &j.pmf {
        *s.entry(u.clone()).or_insert_with(BigRational::zero) += m;
        *d.entry(v.clone()).or_insert_with(BigRational::zero) += m;
    }
    (
        Dist {
            carrier: j.carrier.clone(),
            pmf: s,
        },
        Dist {
            carrier: j.carrier.clone(),
            pmf: d,
        },
    )
}

/// A pair `(u, v)` where the joint mass differs from the product of the
/// marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceWitness {
    pub u: Element,
    pub v: Element,
    pub joint: BigRational,
    pub product: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndependenceVerdict {
    pub witness: Option<IndependenceWitness>,
}

impl IndependenceVerdict {
    pub fn independent(&self) -> bool {
        self.witness.is_none()
    }
}

/// Exact factorization test over the product of the marginal supports,
/// scanned in element order.
pub fn is_independent(j: &JointDist) -> IndependenceVerdict {
    let (s, d) = marginals(j);
    for (u, mu) in &s.pmf {
        for (v, mv) in &d.pmf {
            let joint = j.mass(u, v);
            let product = mu * mv;
            if joint != product {
                let witness = IndependenceWitness {
                    u: u.clone(),
                    v: v.clone(),
                    joint,
                    product,
                };
                return IndependenceVerdict {
                    witness: Some(witness),
                };
            }
        }
    }
    IndependenceVerdict { witness: None }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    Degenerate(Element),
    HaarShift {
        subgroup: SubgroupSpec,
        shift: Element,
    },
    Other,
}

impl Classification {
    pub fn is_idempotent(&self) -> bool {
        !matches!(self, Classification::Other)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::Degenerate(_) => "degenerate",
            Classification::HaarShift { .. } => "haar_shift",
            Classification::Other => "other",
        }
    }
}

/// Membership in the idempotent family. On the rationals only point masses
/// are idempotent.
pub fn classify(mu: &Dist) -> Result<Classification> {
    if mu.pmf.len() == 1 {
        let x = mu.pmf.keys().next().expect("nonempty").clone();
        return Ok(Classification::Degenerate(x));
    }
    if !mu.carrier.is_finite() {
        return Ok(Classification::Other);
    }
    let first = mu.pmf.values().next().expect("nonempty");
    if mu.pmf.values().any(|m| m != first) {
        return Ok(Classification::Other);
    }
    Ok(match mu.carrier.coset_test(&mu.support())? {
        Some((subgroup, shift)) => Classification::HaarShift { subgroup, shift },
        None => Classification::Other,
    })
}

/// A density on `Z_p` constant on the classes mod `p^level`, with respect
/// to the Haar measure of mass 1 on `Z_p`. It vanishes outside `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDensity {
    p: u64,
    level: u32,
    values: BTreeMap<u64, BigRational>,
}

impl StepDensity {
    /// Zero values may be omitted. Requires `Σ value · p^-level = 1`.
    pub fn new(p: u64, level: u32, values: BTreeMap<u64, BigRational>) -> Result<StepDensity> {
        if !crate::arith::is_prime(p) {
            return Err(PadicError::NotPrime(p).into());
        }
        let classes = checked_pow(p, level)
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| MeasureError::InvalidDensity(format!("level {level} is too fine")))?;
        let mut total = BigRational::zero();
        let mut clean = BTreeMap::new();
        for (r, v) in values {
            if r >= classes {
                return Err(MeasureError::InvalidDensity(format!(
                    "class {r} is not below {classes}"
                )));
            }
            if v.is_negative() {
                return Err(MeasureError::NonPositiveMass(format_rational(&v)));
            }
            if !v.is_zero() {
                total += &v;
                clean.insert(r, v);
            }
        }
        let total = total / BigRational::from_integer(BigInt::from(classes));
        if !total.is_one() {
            return Err(MeasureError::NotNormalized(format_rational(&total)));
        }
        Ok(StepDensity {
            p,
            level,
            values: clean,
        })
    }

    /// `p^m` on `p^m Z_p`, resolved at `level >= m`.
    pub fn haar(p: u64, m: u32, level: u32) -> Result<StepDensity> {
        if m > level {
            return Err(MeasureError::InvalidDensity(format!(
                "m = {m} exceeds level {level}"
            )));
        }
        let pm = checked_pow(p, m)
            .ok_or_else(|| MeasureError::InvalidDensity("p^m overflows".into()))?;
        let classes = checked_pow(p, level)
            .ok_or_else(|| MeasureError::InvalidDensity("p^level overflows".into()))?;
        let value = BigRational::from_integer(BigInt::from(pm));
        let values = (0..classes)
            .step_by(pm as usize)
            .map(|r| (r, value.clone()))
            .collect();
        StepDensity::new(p, level, values)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &BTreeMap<u64, BigRational> {
        &self.values
    }

    pub fn value(&self, class: u64) -> BigRational {
        self.values
            .get(&class)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// The same density resolved at another level: finer levels split each
    /// class, coarser levels average.
    pub fn at_level(&self, level: u32) -> Result<StepDensity> {
        let p = self.p;
        let coarse = checked_pow(p, level.min(self.level)).expect("checked at construction");
        let mut values: BTreeMap<u64, BigRational> = BTreeMap::new();
        if level >= self.level {
            let fine = checked_pow(p, level)
                .ok_or_else(|| MeasureError::InvalidDensity("level too fine".into()))?;
            for (&r, v) in &self.values {
                for q in (r..fine).step_by(coarse as usize) {
                    values.insert(q, v.clone());
                }
            }
        } else {
            let ratio = BigRational::from_integer(BigInt::from(p).pow(self.level - level));
            for (&r, v) in &self.values {
                *values.entry(r % coarse).or_insert_with(BigRational::zero) += v / &ratio;
            }
        }
        StepDensity::new(p, level, values)
    }

    /// The induced distribution on `Z/p^level`.
    pub fn to_pmf(&self) -> Result<Dist> {
        let carrier = RingSpec::modular_ring(self.p, self.level.max(1))?;
        let d = if self.level == 0 {
            self.at_level(1)?
        } else {
            self.clone()
        };
        let classes = BigRational::from_integer(BigInt::from(big_pow(d.p, d.level)));
        let pmf = d
            .values
            .iter()
            .map(|(&r, v)| (Element::Finite(r), v / &classes))
            .collect();
        Dist::new(carrier, pmf)
    }

    /// `ρ(x)`; zero outside `Z_p`.
    pub fn eval(&self, x: &PAdic) -> Result<BigRational> {
        if x.p() != self.p {
            return Err(PadicError::PrimeMismatch(x.p(), self.p).into());
        }
        if x.valuation().is_some_and(|v| v < 0) {
            return Ok(BigRational::zero());
        }
        let r = x.residue_u64(self.level)?;
        Ok(self.value(r))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let values: serde_json::Map<String, serde_json::Value> = self
            .values
            .iter()
            .map(|(r, v)| (r.to_string(), serde_json::Value::String(format_rational(v))))
            .collect();
        serde_json::json!({ "p": self.p, "level": self.level, "values": values })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<StepDensity> {
        let bad = |reason: &str| MeasureError::Parse {
            input: v.to_string(),
            reason: reason.into(),
        };
        let p = v["p"].as_u64().ok_or_else(|| bad("missing p"))?;
        let level = v["level"].as_u64().ok_or_else(|| bad("missing level"))? as u32;
        let obj = v["values"]
            .as_object()
            .ok_or_else(|| bad("missing values"))?;
        let mut values = BTreeMap::new();
        for (k, val) in obj {
            let r: u64 = k.parse().map_err(|_| bad("class is not an integer"))?;
            let q = val
                .as_str()
                .and_then(parse_rational)
                .ok_or_else(|| bad("value is not a rational string"))?;
            values.insert(r, q);
        }
        StepDensity::new(p, level, values)
    }
}

/// The joint density of `(S, D)` at `(u, v)` with respect to Haar measure
/// on `Q_p × Q_p`: `2 ρ((u + s(v))/2) ρ((u - s(v))/2) |s(v)|^-1` on nonzero
/// squares and zero elsewhere.
pub fn density_sd(
    rho: &StepDensity,
    table: &BranchTable,
    u: &PAdic,
    v: &PAdic,
) -> Result<BigRational> {
    if rho.p == 2 {
        return Err(MeasureError::UnsupportedPrime(2));
    }
    if v.is_zero() || !is_square(v)? {
        return Ok(BigRational::zero());
    }
    let s = sqrt_hensel(v, table)?;
    let a = phalf(&cancelling(padd(u, &s), u, &s)?);
    let b = phalf(&cancelling(psub(u, &s), u, &s)?);
    let ra = rho.eval(&a)?;
    if ra.is_zero() {
        return Ok(BigRational::zero());
    }
    let rb = rho.eval(&b)?;
    Ok(BigRational::from_integer(BigInt::from(2)) * ra * rb / norm(&s))
}

// full cancellation only says the sum lies in p^k Z_p
fn cancelling(r: std::result::Result<PAdic, PadicError>, a: &PAdic, b: &PAdic) -> Result<PAdic> {
    match r {
        Err(PadicError::PrecisionExhausted) => Ok(PAdic::zero(
            a.p(),
            a.abs_precision().min(b.abs_precision()),
        )?),
        r => Ok(r?),
    }
}

/// A cell of the `(u, v)` grid on which the joint density is constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityCell {
    pub u: u64,
    pub v: u64,
    pub value: BigRational,
}

/// The joint density on `u mod p^level(ρ)` and the nonzero classes
/// `v mod p^v_level`. Classes on which the value is not determined at
/// this resolution are skipped.
pub fn density_sd_grid(
    rho: &StepDensity,
    table: &BranchTable,
    v_level: u32,
) -> Result<Vec<DensityCell>> {
    let p = rho.p;
    if p == 2 {
        return Err(MeasureError::UnsupportedPrime(2));
    }
    let n = rho.level;
    let u_classes = checked_pow(p, n).expect("checked at construction");
    let v_classes = checked_pow(p, v_level)
        .filter(|&c| c.saturating_mul(u_classes) <= 1 << 22)
        .ok_or_else(|| MeasureError::InvalidDensity("grid too large".into()))?;
    let mut cells = Vec::new();
    for v in 1..v_classes {
        let vp = PAdic::from_residue(p, v, v_level)?;
        let val = vp.valuation().expect("nonzero residue") as u32;
        let resolvable = if val % 2 == 1 || !is_square(&vp)? {
            true
        } else {
            // s(v) is known modulo p^(v_level - val/2)
            v_level - val / 2 >= n
        };
        if !resolvable {
            continue;
        }
        for u in 0..u_classes {
            let up = PAdic::from_residue(p, u, v_level.max(n))?;
            let value = density_sd(rho, table, &up, &vp)?;
            cells.push(DensityCell { u, v, value });
        }
    }
    Ok(cells)
}

/// Independence of `(S, D)` for the pmf induced by `ρ` on `Z/p^level`.
/// Dependence at any level certifies dependence over `Q_p`.
pub fn residue_sd_test(rho: &StepDensity, level: u32) -> Result<IndependenceVerdict> {
    if level == 0 {
        return Err(MeasureError::ScaleError("level must be at least 1".into()));
    }
    let mu = rho.at_level(level)?.to_pmf()?;
    Ok(is_independent(&push_t(&mu, &mu)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::branch_table;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn f(n: u64) -> Element {
        Element::Finite(n)
    }

    fn fp(p: u64) -> RingSpec {
        RingSpec::prime_field(p).unwrap()
    }

    fn uniform_field(c: &RingSpec) -> Dist {
        Dist::uniform(c.clone(), &c.enumerate().unwrap().into_iter().collect()).unwrap()
    }

    #[test]
    fn constructors() {
        let f5 = fp(5);
        assert_eq!(degenerate(&f5, f(2)).unwrap().to_literal(), "2:1/1");
        let q = RingSpec::rationals();
        let half = degenerate(&q, Element::rational(1, 2)).unwrap();
        assert_eq!(half.to_literal(), "1/2:1/1");
        let f9 = RingSpec::extension_field(3, 2).unwrap();
        let k = f9.additive_closure(&[f(3)]).unwrap();
        let h = haar(&k).unwrap();
        assert_eq!(
            h.pmf().values().cloned().collect::<Vec<_>>(),
            vec![rat(1, 3); 3]
        );
        let triv = f5.additive_closure(&[]).unwrap();
        assert_eq!(
            shift(&haar(&triv).unwrap(), &f(2)).unwrap(),
            degenerate(&f5, f(2)).unwrap()
        );
        assert!(matches!(
            Dist::parse(&f5, "0:1/2,1:1/3"),
            Err(MeasureError::NotNormalized(_))
        ));
        assert_eq!(
            Dist::parse(&f5, "1:1/2, 4:1/2").unwrap().to_literal(),
            "1:1/2,4:1/2"
        );
    }

    #[test]
    fn pushforward_examples() {
        let f3 = fp(3);
        let u = uniform_field(&f3);
        let j = push_t(&u, &u).unwrap();
        assert_eq!(j.mass(&f(0), &f(0)), rat(1, 9));
        assert_eq!(j.total(), BigRational::one());
        let e0 = degenerate(&f3, f(0)).unwrap();
        assert_eq!(push_t(&e0, &e0).unwrap().pmf().len(), 1);

        let f5 = fp(5);
        let mu = Dist::parse(&f5, "1:1/2,4:1/2").unwrap();
        let nu = degenerate(&f5, f(0)).unwrap();
        let j = push_t(&mu, &nu).unwrap();
        let expect: BTreeMap<_, _> = [((f(1), f(1)), rat(1, 2)), ((f(4), f(1)), rat(1, 2))]
            .into_iter()
            .collect();
        assert_eq!(j.pmf(), &expect);
        let (s, d) = marginals(&j);
        assert_eq!(s, mu);
        assert_eq!(d, degenerate(&f5, f(1)).unwrap());
        assert!(is_independent(&j).independent());
    }

    #[test]
    fn closed_form_examples() {
        let f3 = fp(3);
        let u = uniform_field(&f3);
        let c = closed_form_sd(&u).unwrap();
        assert_eq!(c.mass(&f(0), &f(0)), rat(1, 9));
        assert_eq!(c.mass(&f(0), &f(1)), rat(2, 9));
        assert_eq!(c, push_t(&u, &u).unwrap());
        let e0 = degenerate(&f3, f(0)).unwrap();
        assert_eq!(
            closed_form_sd(&e0).unwrap().mass(&f(0), &f(0)),
            BigRational::one()
        );
        let f4 = RingSpec::extension_field(2, 2).unwrap();
        assert_eq!(
            closed_form_sd(&uniform_field(&f4)),
            Err(MeasureError::CharTwo)
        );
    }

    #[test]
    fn marginals_of_uniform() {
        let f3 = fp(3);
        let u = uniform_field(&f3);
        let (s, d) = marginals(&push_t(&u, &u).unwrap());
        assert_eq!(s, u);
        assert_eq!(d.to_literal(), "0:1/3,1:2/3");
    }

    #[test]
    fn independence_examples() {
        let f3 = fp(3);
        let u = uniform_field(&f3);
        assert!(is_independent(&push_t(&u, &u).unwrap()).independent());
        let mu = Dist::parse(&f3, "0:1/2,1:1/2").unwrap();
        assert!(!is_independent(&push_t(&mu, &mu).unwrap()).independent());
    }

    #[test]
    fn classification() {
        let f5 = fp(5);
        assert!(matches!(
            classify(&degenerate(&f5, f(2)).unwrap()).unwrap(),
            Classification::Degenerate(_)
        ));
        let pm = Dist::parse(&f5, "1:1/2,4:1/2").unwrap();
        assert_eq!(classify(&pm).unwrap(), Classification::Other);
        let f9 = RingSpec::extension_field(3, 2).unwrap();
        // the prime subfield {0, 1, 2} shifted by t
        let k = f9.additive_closure(&[f(1)]).unwrap();
        let mu = shift(&haar(&k).unwrap(), &f(3)).unwrap();
        match classify(&mu).unwrap() {
            Classification::HaarShift { subgroup, shift } => {
                assert_eq!(subgroup.elements(), k.elements());
                assert_eq!(shift, f(3));
            }
            other => panic!("{other:?}"),
        }
        let q = RingSpec::rationals();
        let two = Dist::parse(&q, "0:1/2,1:1/2").unwrap();
        assert_eq!(classify(&two).unwrap(), Classification::Other);
    }

    #[test]
    fn step_densities() {
        let h = StepDensity::haar(3, 1, 2).unwrap();
        assert_eq!(h.values().len(), 3);
        assert_eq!(h.value(3), rat(3, 1));
        assert_eq!(h.at_level(1).unwrap(), StepDensity::haar(3, 1, 1).unwrap());
        assert_eq!(h.at_level(3).unwrap(), StepDensity::haar(3, 1, 3).unwrap());
        let bad = StepDensity::new(3, 1, BTreeMap::from([(0, rat(1, 1))]));
        assert!(matches!(bad, Err(MeasureError::NotNormalized(_))));
        let j = StepDensity::from_json(&h.to_json()).unwrap();
        assert_eq!(j, h);
    }

    #[test]
    fn joint_density_examples() {
        let t3 = branch_table(3).unwrap();
        let ind = StepDensity::haar(3, 0, 0).unwrap();
        let zero = PAdic::zero(3, 8).unwrap();
        let one = PAdic::from_int(3, 1, 8).unwrap();
        let three = PAdic::from_int(3, 3, 8).unwrap();
        assert_eq!(density_sd(&ind, &t3, &zero, &one).unwrap(), rat(2, 1));
        assert_eq!(
            density_sd(&ind, &t3, &zero, &three).unwrap(),
            BigRational::zero()
        );
        let sub = StepDensity::haar(3, 1, 1).unwrap();
        assert_eq!(
            density_sd(&sub, &t3, &zero, &one).unwrap(),
            BigRational::zero()
        );
        let t2 = branch_table(2).unwrap();
        let h2 = StepDensity::haar(2, 0, 1).unwrap();
        let one2 = PAdic::from_int(2, 1, 8).unwrap();
        assert_eq!(
            density_sd(&h2, &t2, &one2, &one2),
            Err(MeasureError::UnsupportedPrime(2))
        );
    }

    #[test]
    fn density_grid_integrates_to_one() {
        // integrating over unit v gives P(ξ - η is a unit) = 2/3
        let t3 = branch_table(3).unwrap();
        let rho = StepDensity::haar(3, 0, 1).unwrap();
        let cells = density_sd_grid(&rho, &t3, 3).unwrap();
        let cell_mass = rat(1, 3 * 27);
        let mass: BigRational = cells
            .iter()
            .filter(|c| c.v % 3 != 0)
            .fold(BigRational::zero(), |acc, c| acc + &c.value * &cell_mass);
        assert_eq!(mass, rat(2, 3));
    }

    #[test]
    fn residue_tests() {
        let h = StepDensity::haar(3, 0, 3).unwrap();
        assert!(residue_sd_test(&h, 3).unwrap().independent());
        let h2 = StepDensity::haar(2, 0, 2).unwrap();
        let w = residue_sd_test(&h2, 2).unwrap().witness.unwrap();
        assert_eq!((w.u, w.v), (f(0), f(0)));
        assert_eq!((w.joint, w.product), (rat(1, 4), rat(1, 8)));
        let values = BTreeMap::from([(0, rat(3, 2)), (1, rat(3, 4)), (2, rat(3, 4))]);
        let r = StepDensity::new(3, 1, values).unwrap();
        assert!(!residue_sd_test(&r, 1).unwrap().independent());
    }
}
