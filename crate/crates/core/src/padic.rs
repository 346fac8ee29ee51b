//! Precision-tracked p-adic numbers, the canonical square root and residue
//! models of balls.
//!
//! A nonzero [`PAdic`] is `p^val * (d_0 + d_1 p + ... + d_{N-1} p^{N-1}) +
//! O(p^(val+N))` with `d_0 != 0`; the unit part is stored as the integer
//! `d_0 + d_1 p + ...` in `[0, p^N)`. A zero-flagged value `O(p^k)` is known
//! only to lie in `p^k Z_p`.
//!
//! Precision is propagated conservatively: sums keep the smaller absolute
//! precision, products and quotients the smaller relative precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    big_inv_mod, big_mod, big_pow, checked_pow, inv_mod, is_prime, is_qr_mod_prime, mul_mod,
    pow_mod, smallest_primitive_root, split_valuation, valuation_u64,
};

/// Relative precision used when none is given.
pub const DEFAULT_PRECISION: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cancellation consumed every known digit")]
    PrecisionExhausted,
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("not a square")]
    NotASquare,
    #[error("unsupported prime {0}")]
    UnsupportedPrime(u64),
    #[error("scale error: {0}")]
    ScaleError(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("operands live in different fields (p = {0} and p = {1})")]
    PrimeMismatch(u64, u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid p-adic number: {0}")]
    Invalid(String),
}

type Result<T> = std::result::Result<T, PadicError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Zero { abs_prec: i64 },
    Nonzero { val: i64, unit: BigUint, prec: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdic {
    p: u64,
    repr: Repr,
}

impl PAdic {
    fn check_prime(p: u64) -> Result<()> {
        if is_prime(p) {
            Ok(())
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    /// `O(p^abs_prec)`.
    pub fn zero(p: u64, abs_prec: i64) -> Result<PAdic> {
        Self::check_prime(p)?;
        Ok(PAdic {
            p,
            repr: Repr::Zero { abs_prec },
        })
    }

    /// An integer at relative precision `prec`; the integer 0 becomes
    /// `O(p^prec)`.
    pub fn from_bigint(p: u64, n: &BigInt, prec: u32) -> Result<PAdic> {
        Self::check_prime(p)?;
        if prec == 0 {
            return Err(PadicError::Invalid(
                "relative precision must be at least 1".into(),
            ));
        }
        if n.is_zero() {
            return Ok(PAdic {
                p,
                repr: Repr::Zero {
                    abs_prec: prec as i64,
                },
            });
        }
        let (val, c) = split_valuation(n, p);
        let unit = big_mod(&c, &big_pow(p, prec));
        Ok(PAdic {
            p,
            repr: Repr::Nonzero { val, unit, prec },
        })
    }

    pub fn from_int(p: u64, n: i64, prec: u32) -> Result<PAdic> {
        PAdic::from_bigint(p, &BigInt::from(n), prec)
    }

    pub fn from_rational(p: u64, r: &BigRational, prec: u32) -> Result<PAdic> {
        Self::check_prime(p)?;
        if prec == 0 {
            return Err(PadicError::Invalid(
                "relative precision must be at least 1".into(),
            ));
        }
        if r.is_zero() {
            return Ok(PAdic {
                p,
                repr: Repr::Zero {
                    abs_prec: prec as i64,
                },
            });
        }
        let (vn, cn) = split_valuation(r.numer(), p);
        let (vd, cd) = split_valuation(r.denom(), p);
        let m = big_pow(p, prec);
        let inv = big_inv_mod(&cd, &m).expect("cofactor is prime to p");
        let unit = (big_mod(&cn, &m) * inv) % &m;
        Ok(PAdic {
            p,
            repr: Repr::Nonzero {
                val: vn - vd,
                unit,
                prec,
            },
        })
    }

    /// `p^val * sum d_i p^i` from explicit digits (`d_0 != 0`).
    pub fn from_digits(p: u64, val: i64, digits: &[u64]) -> Result<PAdic> {
        Self::check_prime(p)?;
        if digits.is_empty() || digits[0] == 0 || digits.iter().any(|&d| d >= p) {
            return Err(PadicError::Invalid(
                "digits must be nonempty, in [0, p), with a nonzero leading digit".into(),
            ));
        }
        let unit = digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * p + d);
        Ok(PAdic {
            p,
            repr: Repr::Nonzero {
                val,
                unit,
                prec: digits.len() as u32,
            },
        })
    }

    /// The class `r + p^level Z_p`.
    pub fn from_residue(p: u64, r: u64, level: u32) -> Result<PAdic> {
        Self::check_prime(p)?;
        let m =
            checked_pow(p, level).ok_or_else(|| PadicError::Invalid("level too large".into()))?;
        let r = r % m;
        if r == 0 {
            return Ok(PAdic {
                p,
                repr: Repr::Zero {
                    abs_prec: level as i64,
                },
            });
        }
        let v = valuation_u64(r, p);
        let unit = BigUint::from(r / p.pow(v));
        Ok(PAdic {
            p,
            repr: Repr::Nonzero {
                val: v as i64,
                unit,
                prec: level - v,
            },
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { val, .. } => Some(*val),
        }
    }

    /// Number of known digits; 0 for a zero-flagged value.
    pub fn precision(&self) -> u32 {
        match &self.repr {
            Repr::Zero { .. } => 0,
            Repr::Nonzero { prec, .. } => *prec,
        }
    }

    /// `k` such that the value is known modulo `p^k`.
    pub fn abs_precision(&self) -> i64 {
        match &self.repr {
            Repr::Zero { abs_prec } => *abs_prec,
            Repr::Nonzero { val, prec, .. } => val + *prec as i64,
        }
    }

    /// Unit part as an integer in `[0, p^N)`.
    pub fn unit(&self) -> Option<&BigUint> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Nonzero { unit, .. } => Some(unit),
        }
    }

    pub fn digits(&self) -> Vec<u64> {
        match &self.repr {
            Repr::Zero { .. } => Vec::new(),
            Repr::Nonzero { unit, prec, .. } => {
                let pb = BigUint::from(self.p);
                let mut u = unit.clone();
                (0..*prec)
                    .map(|_| {
                        let (q, r) = u.div_rem(&pb);
                        u = q;
                        r.to_u64().expect("digit below p")
                    })
                    .collect()
            }
        }
    }

    /// Leading digit of the unit part.
    pub fn unit_residue(&self) -> Option<u64> {
        self.unit().map(|u| (u % self.p).to_u64().expect("below p"))
    }

    /// The value modulo `p^level`, for values in `Z_p` known to at least
    /// that absolute precision.
    pub fn residue(&self, level: u32) -> Result<BigUint> {
        if self.abs_precision() < level as i64 {
            return Err(PadicError::InsufficientPrecision(format!(
                "need the value modulo p^{level}, known modulo p^{}",
                self.abs_precision()
            )));
        }
        match &self.repr {
            Repr::Zero { .. } => Ok(BigUint::zero()),
            Repr::Nonzero { val, unit, .. } => {
                if *val < 0 {
                    return Err(PadicError::ScaleError("value is not in Z_p".into()));
                }
                if *val >= level as i64 {
                    return Ok(BigUint::zero());
                }
                Ok((unit * big_pow(self.p, *val as u32)) % big_pow(self.p, level))
            }
        }
    }

    pub fn residue_u64(&self, level: u32) -> Result<u64> {
        self.residue(level)?
            .to_u64()
            .ok_or_else(|| PadicError::Invalid("residue does not fit in u64".into()))
    }

    /// Drops digits so that the relative precision is at most `prec`.
    pub fn truncate(&self, prec: u32) -> PAdic {
        match &self.repr {
            Repr::Nonzero { val, unit, prec: n } if prec < *n && prec > 0 => PAdic {
                p: self.p,
                repr: Repr::Nonzero {
                    val: *val,
                    unit: unit % big_pow(self.p, prec),
                    prec,
                },
            },
            _ => self.clone(),
        }
    }

    /// Multiplication by `p^k`, exact.
    pub fn shift(&self, k: i64) -> PAdic {
        let repr = match &self.repr {
            Repr::Zero { abs_prec } => Repr::Zero {
                abs_prec: abs_prec + k,
            },
            Repr::Nonzero { val, unit, prec } => Repr::Nonzero {
                val: val + k,
                unit: unit.clone(),
                prec: *prec,
            },
        };
        PAdic { p: self.p, repr }
    }

    fn same_prime(&self, other: &PAdic) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch(self.p, other.p))
        }
    }

    /// Restriction of a value to absolute precision `abs`.
    fn cap_abs(&self, abs: i64) -> PAdic {
        match &self.repr {
            Repr::Zero { abs_prec } => PAdic {
                p: self.p,
                repr: Repr::Zero {
                    abs_prec: (*abs_prec).min(abs),
                },
            },
            Repr::Nonzero { val, .. } => {
                if *val >= abs {
                    PAdic {
                        p: self.p,
                        repr: Repr::Zero { abs_prec: abs },
                    }
                } else {
                    self.truncate((abs - val) as u32)
                }
            }
        }
    }

    /// Renders the JSON form `{p, zero, val, digits, prec}`.
    pub fn to_json(&self) -> PAdicJson {
        match &self.repr {
            Repr::Zero { abs_prec } => PAdicJson {
                p: self.p,
                zero: true,
                val: *abs_prec,
                digits: Vec::new(),
                prec: 0,
            },
            Repr::Nonzero { val, prec, .. } => PAdicJson {
                p: self.p,
                zero: false,
                val: *val,
                digits: self.digits(),
                prec: *prec,
            },
        }
    }
}

/// JSON form of a [`PAdic`]. For a zero-flagged value `val` carries the
/// absolute precision exponent and `digits` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicJson {
    pub p: u64,
    pub zero: bool,
    pub val: i64,
    pub digits: Vec<u64>,
    pub prec: u32,
}

impl TryFrom<PAdicJson> for PAdic {
    type Error = PadicError;

    fn try_from(j: PAdicJson) -> Result<PAdic> {
        if j.zero {
            PAdic::zero(j.p, j.val)
        } else {
            if j.prec as usize != j.digits.len() {
                return Err(PadicError::Invalid(
                    "prec must equal the digit count".into(),
                ));
            }
            PAdic::from_digits(j.p, j.val, &j.digits)
        }
    }
}

impl Serialize for PAdic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<PAdic, D::Error> {
        let j = PAdicJson::deserialize(d)?;
        PAdic::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PAdic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.p;
        match &self.repr {
            Repr::Zero { abs_prec } => write!(f, "O({p}^{abs_prec})"),
            Repr::Nonzero { val, prec, .. } => {
                let terms: Vec<String> = self
                    .digits()
                    .iter()
                    .enumerate()
                    .map(|(i, d)| match i {
                        0 => d.to_string(),
                        1 => format!("{d}*{p}"),
                        i => format!("{d}*{p}^{i}"),
                    })
                    .collect();
                write!(
                    f,
                    "{p}^{val} * ({}) + O({p}^{})",
                    terms.join(" + "),
                    val + *prec as i64
                )
            }
        }
    }
}

pub fn pneg(a: &PAdic) -> PAdic {
    match &a.repr {
        Repr::Zero { .. } => a.clone(),
        Repr::Nonzero { val, unit, prec } => {
            let m = big_pow(a.p, *prec);
            PAdic {
                p: a.p,
                repr: Repr::Nonzero {
                    val: *val,
                    unit: &m - unit,
                    prec: *prec,
                },
            }
        }
    }
}

pub fn padd(a: &PAdic, b: &PAdic) -> Result<PAdic> {
    a.same_prime(b)?;
    let p = a.p;
    let abs = a.abs_precision().min(b.abs_precision());
    match (&a.repr, &b.repr) {
        (Repr::Zero { .. }, _) => Ok(b.cap_abs(abs)),
        (_, Repr::Zero { .. }) => Ok(a.cap_abs(abs)),
        (
            Repr::Nonzero {
                val: va, unit: ua, ..
            },
            Repr::Nonzero {
                val: vb, unit: ub, ..
            },
        ) => {
            let vmin = (*va).min(*vb);
            let width = (abs - vmin) as u32;
            let m = big_pow(p, width);
            let s =
                (ua * big_pow(p, (va - vmin) as u32) + ub * big_pow(p, (vb - vmin) as u32)) % &m;
            if s.is_zero() {
                return Err(PadicError::PrecisionExhausted);
            }
            let (v, c) = split_valuation(&BigInt::from(s), p);
            let val = vmin + v;
            Ok(PAdic {
                p,
                repr: Repr::Nonzero {
                    val,
                    unit: c.to_biguint().expect("positive"),
                    prec: (abs - val) as u32,
                },
            })
        }
    }
}

pub fn psub(a: &PAdic, b: &PAdic) -> Result<PAdic> {
    padd(a, &pneg(b))
}

pub fn pmul(a: &PAdic, b: &PAdic) -> Result<PAdic> {
    a.same_prime(b)?;
    let p = a.p;
    match (&a.repr, &b.repr) {
        (Repr::Zero { abs_prec: x }, Repr::Zero { abs_prec: y }) => PAdic::zero(p, x + y),
        (Repr::Zero { abs_prec }, Repr::Nonzero { val, .. })
        | (Repr::Nonzero { val, .. }, Repr::Zero { abs_prec }) => PAdic::zero(p, abs_prec + val),
        (
            Repr::Nonzero {
                val: va,
                unit: ua,
                prec: na,
            },
            Repr::Nonzero {
                val: vb,
                unit: ub,
                prec: nb,
            },
        ) => {
            let prec = (*na).min(*nb);
            let unit = (ua * ub) % big_pow(p, prec);
            Ok(PAdic {
                p,
                repr: Repr::Nonzero {
                    val: va + vb,
                    unit,
                    prec,
                },
            })
        }
    }
}

pub fn pdiv(a: &PAdic, b: &PAdic) -> Result<PAdic> {
    a.same_prime(b)?;
    let p = a.p;
    match (&a.repr, &b.repr) {
        (_, Repr::Zero { .. }) => Err(PadicError::DivisionByZero),
        (Repr::Zero { abs_prec }, Repr::Nonzero { val, .. }) => PAdic::zero(p, abs_prec - val),
        (
            Repr::Nonzero {
                val: va,
                unit: ua,
                prec: na,
            },
            Repr::Nonzero {
                val: vb,
                unit: ub,
                prec: nb,
            },
        ) => {
            let prec = (*na).min(*nb);
            let m = big_pow(p, prec);
            let inv = big_inv_mod(&BigInt::from(ub.clone()), &m).expect("unit");
            let unit = (ua * inv) % &m;
            Ok(PAdic {
                p,
                repr: Repr::Nonzero {
                    val: va - vb,
                    unit,
                    prec,
                },
            })
        }
    }
}

/// Whether `a` and `b` agree to their common absolute precision.
pub fn agree(a: &PAdic, b: &PAdic) -> Result<bool> {
    match psub(a, b) {
        Ok(d) => Ok(d.is_zero()),
        Err(PadicError::PrecisionExhausted) => Ok(true),
        Err(e) => Err(e),
    }
}

/// `a / 2`; exact (no precision loss) for every `p`.
pub fn phalf(a: &PAdic) -> PAdic {
    if a.p == 2 {
        return a.shift(-1);
    }
    let two = PAdic::from_int(a.p, 2, a.precision().max(1)).expect("valid prime");
    pdiv(a, &two).expect("2 is a unit")
}

/// `|a|_p = p^{-v}`, and `|0|_p = 0`.
pub fn norm(a: &PAdic) -> BigRational {
    match a.valuation() {
        None => BigRational::zero(),
        Some(v) => {
            let pv = BigInt::from(big_pow(a.p, v.unsigned_abs() as u32));
            if v >= 0 {
                BigRational::new(BigInt::one(), pv)
            } else {
                BigRational::from_integer(pv)
            }
        }
    }
}

/// Square test: even valuation and a square unit part (quadratic residue
/// mod `p` for odd `p`, `1 mod 8` for `p = 2`).
pub fn is_square(a: &PAdic) -> Result<bool> {
    let (val, prec) = match &a.repr {
        Repr::Zero { .. } => return Ok(true),
        Repr::Nonzero { val, prec, .. } => (*val, *prec),
    };
    if val.rem_euclid(2) == 1 {
        return Ok(false);
    }
    let u = a.unit().expect("nonzero");
    if a.p == 2 {
        if prec < 3 {
            return Err(PadicError::InsufficientPrecision(
                "2-adic square test needs 3 digits".into(),
            ));
        }
        Ok((u % 8u32).is_one())
    } else {
        Ok(is_qr_mod_prime(a.unit_residue().expect("nonzero"), a.p))
    }
}

/// How the canonical square root picks one of `±t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchRule {
    /// Odd `p`: the root's unit residue lies in `{g^k mod p : 1 <= k <= (p-1)/2}`.
    Residues {
        primitive_root: u64,
        residues: Vec<u64>,
    },
    /// `p = 2`: the root's unit part is `1 mod 4`.
    UnitOneModFour,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchTable {
    p: u64,
    rule: BranchRule,
}

impl BranchTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rule(&self) -> &BranchRule {
        &self.rule
    }

    pub fn primitive_root(&self) -> Option<u64> {
        match &self.rule {
            BranchRule::Residues { primitive_root, .. } => Some(*primitive_root),
            BranchRule::UnitOneModFour => None,
        }
    }

    /// Branch residues in the order `g^1, g^2, ..., g^((p-1)/2)`.
    pub fn branch_residues(&self) -> &[u64] {
        match &self.rule {
            BranchRule::Residues { residues, .. } => residues,
            BranchRule::UnitOneModFour => &[],
        }
    }

    /// Whether a root with this unit part (mod p, or mod 4 for p = 2) is
    /// the selected one.
    pub fn selects(&self, unit_residue: u64) -> bool {
        match &self.rule {
            BranchRule::Residues { residues, .. } => residues.contains(&(unit_residue % self.p)),
            BranchRule::UnitOneModFour => unit_residue % 4 == 1,
        }
    }

    /// For a nonzero square residue `r` mod odd `p`, the `k` in
    /// `1..=(p-1)/2` with `g^(2k) = r`.
    fn half_index(&self, r: u64) -> Option<u64> {
        let g = self.primitive_root()?;
        (1..=(self.p - 1) / 2).find(|&k| pow_mod(g, 2 * k, self.p) == r % self.p)
    }
}

pub fn branch_table(p: u64) -> Result<BranchTable> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p));
    }
    if p == 2 {
        return Ok(BranchTable {
            p,
            rule: BranchRule::UnitOneModFour,
        });
    }
    let g = smallest_primitive_root(p);
    let residues = (1..=(p - 1) / 2).map(|k| pow_mod(g, k, p)).collect();
    Ok(BranchTable {
        p,
        rule: BranchRule::Residues {
            primitive_root: g,
            residues,
        },
    })
}

fn check_table(a: &PAdic, table: &BranchTable) -> Result<()> {
    if a.p != table.p {
        Err(PadicError::PrimeMismatch(a.p, table.p))
    } else {
        Ok(())
    }
}

/// Square root of a zero-flagged `O(p^k)`: `O(p^ceil(k/2))`.
fn sqrt_of_zero(a: &PAdic) -> PAdic {
    let k = a.abs_precision();
    PAdic {
        p: a.p,
        repr: Repr::Zero {
            abs_prec: Integer::div_ceil(&k, &2),
        },
    }
}

/// The canonical square root by Newton iteration `t <- (t + a/t) / 2`,
/// started from the branch-selected root mod `p` (odd `p`) or mod 4 (`p = 2`).
///
/// Odd `p` keeps the relative precision of `a`; `p = 2` loses one digit.
pub fn sqrt_hensel(a: &PAdic, table: &BranchTable) -> Result<PAdic> {
    check_table(a, table)?;
    if a.is_zero() {
        return Ok(sqrt_of_zero(a));
    }
    if !is_square(a)? {
        return Err(PadicError::NotASquare);
    }
    let p = a.p;
    let val = a.valuation().expect("nonzero");
    let n = a.precision();
    let c = a.unit().expect("nonzero").clone();
    if p == 2 {
        // t is determined mod 2^(n-1); the division by 2 needs one extra bit
        let work = big_pow(2, n + 1);
        let keep = big_pow(2, n - 1);
        let check = big_pow(2, n);
        let mut t = BigUint::one();
        for _ in 0..2 * n + 8 {
            let inv = big_inv_mod(&BigInt::from(t.clone()), &work).expect("odd");
            let sum = (&t + &c * inv) % &work;
            let next = (sum >> 1u32) % &keep;
            let done = next == t && (&t * &t) % &check == &c % &check;
            t = next;
            if done {
                break;
            }
        }
        if (&t * &t) % &check != &c % &check {
            return Err(PadicError::PreconditionViolated(
                "2-adic Newton iteration stalled".into(),
            ));
        }
        if (&t % 4u32).to_u64() != Some(1) {
            t = (&keep - &t) % &keep;
        }
        return Ok(PAdic {
            p,
            repr: Repr::Nonzero {
                val: val / 2,
                unit: t,
                prec: n - 1,
            },
        });
    }
    let m = big_pow(p, n);
    let c_mod_p = a.unit_residue().expect("nonzero");
    let r0 = table
        .branch_residues()
        .iter()
        .copied()
        .find(|&r| mul_mod(r, r, p) == c_mod_p)
        .ok_or(PadicError::NotASquare)?;
    let half = big_inv_mod(&BigInt::from(2), &m).expect("odd p");
    let mut t = BigUint::from(r0);
    for _ in 0..64 {
        let inv = big_inv_mod(&BigInt::from(t.clone()), &m).expect("unit");
        let next = ((&t + (&c * inv) % &m) * &half) % &m;
        if next == t {
            break;
        }
        t = next;
    }
    debug_assert_eq!((&t * &t) % &m, c % &m);
    Ok(PAdic {
        p,
        repr: Repr::Nonzero {
            val: val / 2,
            unit: t,
            prec: n,
        },
    })
}

/// Teichmüller representative of a nonzero residue mod `p`, modulo `p^prec`:
/// the fixed point of `x -> x^p`.
pub fn teichmuller(p: u64, residue: u64, prec: u32) -> BigUint {
    let m = big_pow(p, prec);
    let mut x = BigUint::from(residue % p);
    let e = BigUint::from(p);
    for _ in 0..=prec + 1 {
        let next = x.modpow(&e, &m);
        if next == x {
            break;
        }
        x = next;
    }
    x
}

/// `C(1/2, n)` exactly: `1, 1/2`, then `(-1)^(n-1) (2n-3)!! / (2n)!!`.
pub fn half_binomial(n: u32) -> BigRational {
    let mut c = BigRational::one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for i in 1..=n {
        c = c * (&half - BigRational::from_integer(BigInt::from(i - 1)))
            / BigRational::from_integer(BigInt::from(i));
    }
    c
}

/// The canonical square root from the power series around the Teichmüller
/// center `ε^(2k)` of the ball containing the unit part:
/// `ε^k (1 + z)^(1/2)` with `z = ε^(-2k) (x - ε^(2k))`, truncated once the
/// term valuation reaches the working precision. Odd `p` only.
pub fn sqrt_series(a: &PAdic, table: &BranchTable) -> Result<PAdic> {
    check_table(a, table)?;
    let p = a.p;
    if p == 2 {
        return Err(PadicError::UnsupportedPrime(2));
    }
    if a.is_zero() {
        return Ok(sqrt_of_zero(a));
    }
    if !is_square(a)? {
        return Err(PadicError::NotASquare);
    }
    let val = a.valuation().expect("nonzero");
    let n = a.precision();
    let m = big_pow(p, n);
    let x = a.unit().expect("nonzero");
    let k = table
        .half_index(a.unit_residue().expect("nonzero"))
        .ok_or(PadicError::NotASquare)?;
    let g = table.primitive_root().expect("odd p");
    let eps_k = teichmuller(p, pow_mod(g, k, p), n);
    let eps_2k = teichmuller(p, pow_mod(g, 2 * k, p), n);
    let eps_2k_inv = big_inv_mod(&BigInt::from(eps_2k.clone()), &m).expect("unit");
    let diff = big_mod(&(BigInt::from(x.clone()) - BigInt::from(eps_2k)), &m);
    let z = (diff * eps_2k_inv) % &m;
    // z is divisible by p since x and ε^(2k) agree mod p
    let vz = if z.is_zero() {
        n as u64
    } else {
        big_valuation(&z, p)
    };
    debug_assert!(vz >= 1);
    let mut sum = BigUint::zero();
    let mut z_pow = BigUint::one();
    let mut term = 0u32;
    // terms with n * v(z) >= precision vanish modulo p^n
    while (term as u64) * vz < n as u64 {
        let coef = half_binomial(term);
        let den_inv = big_inv_mod(coef.denom(), &m).expect("C(1/2, n) is p-integral for odd p");
        let coef_mod = (big_mod(coef.numer(), &m) * den_inv) % &m;
        sum = (sum + coef_mod * &z_pow) % &m;
        z_pow = (z_pow * &z) % &m;
        term += 1;
    }
    let unit = (eps_k * sum) % &m;
    Ok(PAdic {
        p,
        repr: Repr::Nonzero {
            val: val / 2,
            unit,
            prec: n,
        },
    })
}

fn big_valuation(x: &BigUint, p: u64) -> u64 {
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut y = x.clone();
    while !y.is_zero() {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        y = q;
        v += 1;
    }
    v
}

/// The set `center + p^radius_exp Z_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ball {
    pub center: PAdic,
    pub radius_exp: i64,
}

impl Ball {
    pub fn new(center: PAdic, radius_exp: i64) -> Ball {
        Ball { center, radius_exp }
    }

    /// `|y - center|_p <= p^(-radius_exp)`.
    pub fn contains(&self, y: &PAdic) -> Result<bool> {
        let k = self.radius_exp;
        if self.center.abs_precision() < k || y.abs_precision() < k {
            return Err(PadicError::InsufficientPrecision(format!(
                "membership in a ball of radius p^-{k} needs absolute precision {k}"
            )));
        }
        match psub(y, &self.center) {
            Ok(d) => Ok(d.valuation().is_none_or(|v| v >= k)),
            Err(PadicError::PrecisionExhausted) => Ok(true),
            Err(e) => Err(e),
        }
    }
}

/// `first × second`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallRect {
    pub first: Ball,
    pub second: Ball,
}

impl BallRect {
    pub fn contains(&self, x: &PAdic, y: &PAdic) -> Result<bool> {
        Ok(self.first.contains(x)? && self.second.contains(y)?)
    }

    pub fn residues(&self, level: u32) -> Result<Vec<(u64, u64)>> {
        let a = ball_residues(&self.first, level)?;
        let b = ball_residues(&self.second, level)?;
        Ok(a.iter()
            .flat_map(|&x| b.iter().map(move |&y| (x, y)))
            .collect())
    }
}

fn modulus_u64(p: u64, level: u32) -> Result<u64> {
    checked_pow(p, level)
        .ok_or_else(|| PadicError::PreconditionViolated(format!("{p}^{level} overflows")))
}

/// The image of a ball inside `Z/p^level`: `{c + p^k t : 0 <= t < p^(level-k)}`.
///
/// The ball must lie in `Z_p` as given (no rescaling is applied).
pub fn ball_residues(b: &Ball, level: u32) -> Result<BTreeSet<u64>> {
    let p = b.center.p;
    let k = b.radius_exp;
    if k < 0 || b.center.valuation().is_some_and(|v| v < 0) {
        return Err(PadicError::ScaleError(format!(
            "ball {} + {p}^{k} Z_{p} is not contained in Z_{p}",
            b.center
        )));
    }
    if k > level as i64 {
        return Err(PadicError::PreconditionViolated(format!(
            "radius exponent {k} exceeds level {level}"
        )));
    }
    let k = k as u32;
    let step = modulus_u64(p, k)?;
    let count = modulus_u64(p, level - k)?;
    let c = b.center.residue_u64(k)?;
    Ok((0..count).map(|t| c + step * t).collect())
}

/// Residue-level check that `T` maps `(x0, y0) + (p^k Z_p)^2` onto
/// `(x0 + y0, (x0 - y0)^2) + p^k Z_p × p^(k+l) Z_p` where `|x0 - y0|_p = p^-l`.
///
/// For `p = 2` the second radius is taken as `k + l + 1` with `k >= l + 2`;
/// the image is then an index-2 subset of that rectangle and the check
/// reports `false`.
pub fn lemma4_check(x0: &PAdic, y0: &PAdic, k: i64, level: u32) -> Result<bool> {
    x0.same_prime(y0)?;
    let p = x0.p;
    let diff = match psub(x0, y0) {
        Ok(d) if !d.is_zero() => d,
        _ => {
            return Err(PadicError::PreconditionViolated(
                "x0 and y0 must differ".into(),
            ))
        }
    };
    let l = diff.valuation().expect("nonzero");
    let extra = if p == 2 { 1 } else { 0 };
    if k < l + 1 + extra {
        return Err(PadicError::PreconditionViolated(format!(
            "k = {k} must be at least l + {} = {}",
            1 + extra,
            l + 1 + extra
        )));
    }
    if l < 0 || x0.valuation().is_some_and(|v| v < 0) || y0.valuation().is_some_and(|v| v < 0) {
        return Err(PadicError::ScaleError("x0 and y0 must lie in Z_p".into()));
    }
    let d_radius = k + l + extra;
    if (level as i64) < d_radius + 1 - extra {
        return Err(PadicError::PreconditionViolated(format!(
            "level {level} must be at least k + l + 1 = {}",
            k + l + 1
        )));
    }
    let modulus = modulus_u64(p, level)?;
    let xs = ball_residues(&Ball::new(x0.clone(), k), level)?;
    let ys = ball_residues(&Ball::new(y0.clone(), k), level)?;
    let mut image: Vec<(u64, u64)> = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let s = (x + y) % modulus;
            let w = (x + modulus - y) % modulus;
            image.push((s, mul_mod(w, w, modulus)));
        }
    }
    image.sort_unstable();
    image.dedup();

    let pk = modulus_u64(p, k as u32)?;
    let (x0r, y0r) = (x0.residue_u64(k as u32)?, y0.residue_u64(k as u32)?);
    let s_center = (x0r + y0r) % pk;
    let w0 = (x0r + pk - y0r) % pk;
    let d_mod = modulus_u64(p, d_radius as u32)?;
    let d_center = mul_mod(w0, w0, d_mod);
    let target = BallRect {
        first: Ball::new(PAdic::from_residue(p, s_center, k as u32)?, k),
        second: Ball::new(PAdic::from_residue(p, d_center, d_radius as u32)?, d_radius),
    };
    let expected = target.residues(level)?;
    Ok(image == expected)
}

/// `{2ct + p^m t^2 mod p^N : t in Z/p^N}` is all of `Z/p^N`.
pub fn eq12_check(p: u64, c: u64, m: u32, level: u32) -> Result<bool> {
    if p == 2 || !is_prime(p) {
        return Err(PadicError::UnsupportedPrime(p));
    }
    if c.is_multiple_of(p) {
        return Err(PadicError::PreconditionViolated(format!(
            "{c} is not a unit mod {p}"
        )));
    }
    let modulus = modulus_u64(p, level)?;
    let pm = pow_mod(p, m as u64, modulus);
    let c2 = mul_mod(2, c % modulus, modulus);
    let mut hit = vec![false; modulus as usize];
    for t in 0..modulus {
        let v = (mul_mod(c2, t, modulus) + mul_mod(pm, mul_mod(t, t, modulus), modulus)) % modulus;
        hit[v as usize] = true;
    }
    Ok(hit.into_iter().all(|h| h))
}

/// `S_1(u, v)` and `S_2(u, v)`: the two preimages of `(u, v)` under `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPair {
    pub s1: (PAdic, PAdic),
    pub s2: (PAdic, PAdic),
}

pub fn s_maps(u: &PAdic, v: &PAdic, table: &BranchTable) -> Result<SPair> {
    u.same_prime(v)?;
    check_table(v, table)?;
    if u.p == 2 {
        return Err(PadicError::UnsupportedPrime(2));
    }
    if v.is_zero() || !is_square(v)? {
        return Err(PadicError::NotASquare);
    }
    let s = sqrt_hensel(v, table)?;
    let x = phalf(&padd(u, &s)?);
    let y = phalf(&psub(u, &s)?);
    Ok(SPair {
        s1: (x.clone(), y.clone()),
        s2: (y, x),
    })
}

/// Outcome of the residue-level check on `E_k = (u0, v0) + p^k Z_p × p^(k+l) Z_p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma5Outcome {
    /// Residue images of `S_1(E_k)` and `S_2(E_k)` do not meet.
    pub disjoint: bool,
    /// Haar mass of `S_j(E_k)` equals the mass of `E_k` weighted by
    /// `|s(v)|_p^{-1}`, the weight is constant on `E_k`, and every image
    /// class has the same number of preimages.
    pub jacobian_ok: bool,
    /// `S_1(E_k)` is exactly the ball `S_1(u0, v0) + (p^k Z_p)^2`.
    pub image_is_ball: bool,
    pub l: i64,
    /// Level at which images are resolved (`level - l`).
    pub image_level: u32,
    pub domain_classes: u64,
    pub image_classes: u64,
}

/// Residue-level verification of disjointness and of the change of
/// variables for the two inverse branches of `T`.
///
/// `E_k` is modelled at `level`; since `s(v)` is only known modulo
/// `p^(level - l)` there, images are compared at that level.
pub fn lemma5_check(u0: &PAdic, v0: &PAdic, k: i64, level: u32) -> Result<Lemma5Outcome> {
    u0.same_prime(v0)?;
    let p = u0.p;
    if p == 2 {
        return Err(PadicError::UnsupportedPrime(2));
    }
    let table = branch_table(p)?;
    if v0.is_zero() || !is_square(v0)? {
        return Err(PadicError::PreconditionViolated(
            "v0 must be a nonzero square".into(),
        ));
    }
    let l = v0.valuation().expect("nonzero") / 2;
    if l < 0 || u0.valuation().is_some_and(|v| v < 0) {
        return Err(PadicError::PreconditionViolated(
            "u0 and v0 must lie in Z_p".into(),
        ));
    }
    if k < l + 1 {
        return Err(PadicError::PreconditionViolated(format!(
            "k = {k} must be at least l + 1"
        )));
    }
    if (level as i64) < k + l {
        return Err(PadicError::PreconditionViolated(format!(
            "level {level} must be at least k + l = {}",
            k + l
        )));
    }
    let image_level = level - l as u32;
    let m_img = modulus_u64(p, image_level)?;
    let half = inv_mod(2, m_img).expect("odd p");
    let us = ball_residues(&Ball::new(u0.clone(), k), level)?;
    let vs = ball_residues(&Ball::new(v0.clone(), k + l), level)?;

    let mut weight_constant = true;
    let mut roots = Vec::with_capacity(vs.len());
    for &v in &vs {
        let s = sqrt_hensel(&PAdic::from_residue(p, v, level)?, &table)?;
        weight_constant &= s.valuation() == Some(l);
        debug_assert!(s.abs_precision() >= image_level as i64);
        roots.push(s.residue_u64(image_level)?);
    }

    let mut img1: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    let mut img2: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for &u in &us {
        let u = u % m_img;
        for &s in &roots {
            let x = mul_mod((u + s) % m_img, half, m_img);
            let y = mul_mod((u + m_img - s) % m_img, half, m_img);
            *img1.entry((x, y)).or_default() += 1;
            *img2.entry((y, x)).or_default() += 1;
        }
    }
    let disjoint = img1.keys().all(|k| !img2.contains_key(k));

    let domain_classes = (us.len() * vs.len()) as u64;
    let p_big = BigInt::from(p);
    let pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(num_traits::pow(p_big.clone(), e as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(p_big.clone(), (-e) as usize))
        }
    };
    let domain_mass = BigRational::from_integer(domain_classes.into()) * pow(-2 * level as i64);
    let weighted = &domain_mass * pow(l);
    let mass_ok = |img: &BTreeMap<(u64, u64), u64>| {
        BigRational::from_integer((img.len() as u64).into()) * pow(-2 * image_level as i64)
            == weighted
    };
    let uniform = |img: &BTreeMap<(u64, u64), u64>| {
        let first = img.values().next().copied();
        img.values().all(|&c| Some(c) == first)
    };
    let jacobian_ok =
        weight_constant && mass_ok(&img1) && mass_ok(&img2) && uniform(&img1) && uniform(&img2);

    let s0 = roots_of_center(u0, v0, &table, image_level)?;
    let x0 = Ball::new(PAdic::from_residue(p, s0.0, image_level)?, k);
    let y0 = Ball::new(PAdic::from_residue(p, s0.1, image_level)?, k);
    let ball: BTreeSet<(u64, u64)> = BallRect {
        first: x0,
        second: y0,
    }
    .residues(image_level)?
    .into_iter()
    .collect();
    let image_is_ball = img1.keys().copied().collect::<BTreeSet<_>>() == ball;

    Ok(Lemma5Outcome {
        disjoint,
        jacobian_ok,
        image_is_ball,
        l,
        image_level,
        domain_classes,
        image_classes: img1.len() as u64,
    })
}

fn roots_of_center(u0: &PAdic, v0: &PAdic, table: &BranchTable, level: u32) -> Result<(u64, u64)> {
    let m = modulus_u64(u0.p, level)?;
    let half = inv_mod(2, m).expect("odd p");
    let s = sqrt_hensel(v0, table)?.residue_u64(level)?;
    let u = u0.residue_u64(level)?;
    Ok((
        mul_mod((u + s) % m, half, m),
        mul_mod((u + m - s) % m, half, m),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pa(p: u64, n: i64) -> PAdic {
        PAdic::from_int(p, n, DEFAULT_PRECISION).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(pmul(&pa(7, 2), &pa(7, 3)).unwrap(), pa(7, 6));
        let one = PAdic::from_int(7, 1, 2).unwrap();
        let three = PAdic::from_int(7, 3, 2).unwrap();
        let q = pdiv(&one, &three).unwrap();
        assert_eq!(q.digits(), vec![5, 4]);
        assert_eq!(q.valuation(), Some(0));
        let s = padd(&pa(7, 1), &pa(7, 6)).unwrap();
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.digits()[0], 1);
        assert_eq!(s.abs_precision(), 8);
    }

    #[test]
    fn cancellation_and_division_errors() {
        assert_eq!(
            psub(&pa(5, 3), &pa(5, 3)),
            Err(PadicError::PrecisionExhausted)
        );
        let z = PAdic::zero(5, 4).unwrap();
        assert_eq!(pdiv(&pa(5, 1), &z), Err(PadicError::DivisionByZero));
        assert!(matches!(
            padd(&pa(5, 1), &pa(7, 1)),
            Err(PadicError::PrimeMismatch(5, 7))
        ));
        // O(5^4) + 5^5 is still O(5^4)
        assert!(padd(&z, &pa(5, 3125)).unwrap().is_zero());
    }

    #[test]
    fn norms() {
        assert_eq!(norm(&pa(7, 7)), BigRational::new(1.into(), 7.into()));
        assert_eq!(norm(&PAdic::zero(7, 8).unwrap()), BigRational::zero());
        let third = PAdic::from_rational(7, &BigRational::new(1.into(), 3.into()), 8).unwrap();
        assert_eq!(norm(&third), BigRational::one());
        let r = PAdic::from_rational(7, &BigRational::new(1.into(), 49.into()), 8).unwrap();
        assert_eq!(norm(&r), BigRational::from_integer(49.into()));
    }

    #[test]
    fn squares() {
        assert!(is_square(&pa(7, 2)).unwrap());
        assert!(!is_square(&pa(7, 7)).unwrap());
        assert!(!is_square(&pa(7, 3)).unwrap());
        assert!(is_square(&pa(2, 17)).unwrap());
        assert!(!is_square(&pa(2, 5)).unwrap());
        let short = PAdic::from_int(2, 1, 2).unwrap();
        assert!(matches!(
            is_square(&short),
            Err(PadicError::InsufficientPrecision(_))
        ));
        // 17 = 9^2 mod 64
        assert_eq!((9 * 9) % 64, 17);
    }

    #[test]
    fn branch_tables() {
        let t7 = branch_table(7).unwrap();
        assert_eq!(t7.primitive_root(), Some(3));
        assert_eq!(t7.branch_residues(), &[3, 2, 6]);
        let t5 = branch_table(5).unwrap();
        assert_eq!(t5.primitive_root(), Some(2));
        assert_eq!(t5.branch_residues(), &[2, 4]);
        assert_eq!(branch_table(2).unwrap().rule(), &BranchRule::UnitOneModFour);
        for p in [3u64, 5, 7, 11, 13] {
            let t = branch_table(p).unwrap();
            let mut all: Vec<u64> = t
                .branch_residues()
                .iter()
                .flat_map(|&r| [r, p - r])
                .collect();
            all.sort();
            assert_eq!(all, (1..p).collect::<Vec<_>>());
        }
    }

    #[test]
    fn hensel_examples() {
        let t7 = branch_table(7).unwrap();
        assert_eq!(sqrt_hensel(&pa(7, 4), &t7).unwrap(), pa(7, 2));
        let r = sqrt_hensel(&pa(7, 2), &t7).unwrap();
        assert_eq!(&r.digits()[..2], &[3, 1]);
        assert_eq!(sqrt_hensel(&pa(7, 1), &t7).unwrap(), pa(7, -1));
        assert_eq!(sqrt_hensel(&pa(7, 3), &t7), Err(PadicError::NotASquare));
        let t2 = branch_table(2).unwrap();
        let r9 = sqrt_hensel(&pa(2, 9), &t2).unwrap();
        assert_eq!(r9, PAdic::from_int(2, -3, DEFAULT_PRECISION - 1).unwrap());
        let r25 = sqrt_hensel(&pa(2, 25), &t2).unwrap();
        assert_eq!(r25, PAdic::from_int(2, 5, DEFAULT_PRECISION - 1).unwrap());
        let z = sqrt_hensel(&PAdic::zero(7, 5).unwrap(), &t7).unwrap();
        assert_eq!(z, PAdic::zero(7, 3).unwrap());
    }

    #[test]
    fn series_examples() {
        let t7 = branch_table(7).unwrap();
        let two = PAdic::from_int(7, 2, 6).unwrap();
        assert_eq!(
            sqrt_series(&two, &t7).unwrap(),
            sqrt_hensel(&two, &t7).unwrap()
        );
        let eps = teichmuller(7, 3, 8);
        let eps2 = (&eps * &eps) % big_pow(7, 8);
        let center = PAdic::from_bigint(7, &BigInt::from(eps2), 8).unwrap();
        let root = sqrt_series(&center, &t7).unwrap();
        assert_eq!(root.unit(), Some(&eps));
        let t5 = branch_table(5).unwrap();
        let x = pa(5, 100);
        let expect = sqrt_hensel(&pa(5, 4), &t5).unwrap().shift(1);
        assert_eq!(sqrt_series(&x, &t5).unwrap(), expect);
        assert_eq!(
            sqrt_series(&pa(2, 9), &branch_table(2).unwrap()),
            Err(PadicError::UnsupportedPrime(2))
        );
    }

    #[test]
    fn half_binomials() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(half_binomial(0), r(1, 1));
        assert_eq!(half_binomial(1), r(1, 2));
        assert_eq!(half_binomial(2), r(-1, 8));
        assert_eq!(half_binomial(3), r(1, 16));
        assert_eq!(half_binomial(4), r(-5, 128));
    }

    #[test]
    fn teichmuller_is_root_of_unity() {
        for (p, r) in [(5u64, 2u64), (7, 3), (11, 2)] {
            let e = teichmuller(p, r, 10);
            let m = big_pow(p, 10);
            assert_eq!(e.modpow(&BigUint::from(p - 1), &m), BigUint::one());
            assert_eq!((&e % p).to_u64(), Some(r));
        }
    }

    #[test]
    fn balls() {
        let ball = |p, c, k| Ball::new(PAdic::from_int(p, c, 8).unwrap(), k);
        assert_eq!(
            ball_residues(&ball(3, 1, 1), 2).unwrap(),
            BTreeSet::from([1, 4, 7])
        );
        assert_eq!(
            ball_residues(&ball(3, 0, 2), 2).unwrap(),
            BTreeSet::from([0])
        );
        assert_eq!(
            ball_residues(&ball(5, 2, 1), 2).unwrap(),
            BTreeSet::from([2, 7, 12, 17, 22])
        );
        let out = Ball::new(
            PAdic::from_rational(3, &BigRational::new(1.into(), 3.into()), 4).unwrap(),
            1,
        );
        assert!(matches!(
            ball_residues(&out, 2),
            Err(PadicError::ScaleError(_))
        ));
        let b = ball(7, 3, 2);
        assert!(b.contains(&pa(7, 52)).unwrap());
        assert!(!b.contains(&pa(7, 10)).unwrap());
        assert!(b.contains(&pa(7, 3)).unwrap());
    }

    #[test]
    fn lemma4_examples() {
        assert!(lemma4_check(&pa(3, 0), &pa(3, 1), 1, 4).unwrap());
        assert!(lemma4_check(&pa(5, 0), &pa(5, 5), 2, 5).unwrap());
        assert!(matches!(
            lemma4_check(&pa(3, 0), &pa(3, 1), 0, 4),
            Err(PadicError::PreconditionViolated(_))
        ));
        // over Z_2 the parity of a - b is tied to that of a + b, so the image
        // only fills half of the rectangle with second radius k + l + 1
        assert!(!lemma4_check(&pa(2, 0), &pa(2, 1), 2, 5).unwrap());
        assert!(!lemma4_check(&pa(2, 0), &pa(2, 2), 3, 7).unwrap());
    }

    #[test]
    fn eq12_examples() {
        assert!(eq12_check(3, 1, 1, 3).unwrap());
        assert!(eq12_check(5, 2, 1, 3).unwrap());
        assert!(!eq12_check(3, 1, 0, 1).unwrap());
    }

    #[test]
    fn s_map_examples() {
        let t7 = branch_table(7).unwrap();
        let zero = PAdic::zero(7, 8).unwrap();
        let pair = s_maps(&zero, &pa(7, 1), &t7).unwrap();
        assert_eq!(pair.s1.0.digits()[0], 3);
        assert_eq!(pair.s1.1.digits()[0], 4);
        let pair = s_maps(&zero, &pa(7, 4), &t7).unwrap();
        assert_eq!(pair.s1, (pa(7, 1), pa(7, -1)));
        assert_eq!(pair.s2, (pair.s1.1.clone(), pair.s1.0.clone()));
        assert_eq!(s_maps(&zero, &pa(7, 3), &t7), Err(PadicError::NotASquare));
    }

    #[test]
    fn lemma5_examples() {
        for (p, v0, k, n) in [(7u64, 1i64, 1i64, 3u32), (3, 1, 1, 4), (7, 49, 2, 5)] {
            let out = lemma5_check(&pa(p, 0), &pa(p, v0), k, n).unwrap();
            assert!(
                out.disjoint && out.jacobian_ok && out.image_is_ball,
                "{p} {v0}: {out:?}"
            );
        }
        assert!(matches!(
            lemma5_check(&pa(7, 0), &pa(7, 49), 1, 5),
            Err(PadicError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn display_and_json() {
        let x = PAdic::from_int(7, 10, 3).unwrap();
        assert_eq!(x.to_string(), "7^0 * (3 + 1*7 + 0*7^2) + O(7^3)");
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(
            j,
            r#"{"p":7,"zero":false,"val":0,"digits":[3,1,0],"prec":3}"#
        );
        let back: PAdic = serde_json::from_str(&j).unwrap();
        assert_eq!(back, x);
        assert_eq!(PAdic::zero(7, 4).unwrap().to_string(), "O(7^4)");
    }
}
