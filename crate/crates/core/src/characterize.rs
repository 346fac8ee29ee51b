//! The functional equation `f(u)^2 f(v) f(-v) = f(0)^2 f(u+v) f(u-v)`,
//! support and finite-difference tools, and the verifiers run by the
//! harness.
//!
//! Randomized verifiers derive one generator per trial from
//! `ChaCha8Rng::seed_from_u64(seed)` with the stream set to the trial index,
//! so results do not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{format_rational, AlgebraError, Element, RingSpec};
use crate::arith::{checked_pow, is_prime};
use crate::measure::{
    classify, closed_form_sd, degenerate, haar, is_independent, push_t, residue_sd_test, shift,
    Classification, Dist, MeasureError, StepDensity,
};
use crate::padic::{
    agree, branch_table, eq12_check, lemma4_check, lemma5_check, pmul, sqrt_hensel, sqrt_series,
    PAdic, PadicError,
};

/// Largest integer weight drawn by the random samplers.
pub const MAX_MASS: u64 = 8;

/// Largest support drawn on the rationals.
pub const MAX_RATIONAL_SUPPORT: usize = 6;

/// Largest field on which every uniform-on-subset law is swept.
pub const SUBSET_SWEEP_LIMIT: u64 = 16;

const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterizeError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("support is not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("zero value at {0}")]
    ZeroValue(String),
}

type Result<T> = std::result::Result<T, CharacterizeError>;

/// A function on a carrier with finite support; absent points are zero.
pub type PointMap = BTreeMap<Element, BigRational>;

fn value(f: &PointMap, x: &Element) -> BigRational {
    f.get(x).cloned().unwrap_or_else(BigRational::zero)
}

fn precondition(msg: impl Into<String>) -> CharacterizeError {
    CharacterizeError::PreconditionViolated(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeqVerdict {
    pub witness: Option<(Element, Element)>,
    pub lhs: Option<BigRational>,
    pub rhs: Option<BigRational>,
}

impl FeqVerdict {
    pub fn pass(&self) -> bool {
        self.witness.is_none()
    }

    fn passed() -> FeqVerdict {
        FeqVerdict {
            witness: None,
            lhs: None,
            rhs: None,
        }
    }

    fn failed(f: &PointMap, c: &RingSpec, u: Element, v: Element) -> FeqVerdict {
        let (lhs, rhs) = feq_sides(f, c, &u, &v);
        FeqVerdict {
            witness: Some((u, v)),
            lhs: Some(lhs),
            rhs: Some(rhs),
        }
    }

    pub fn to_json(&self, c: &RingSpec) -> Value {
        match &self.witness {
            None => json!({ "pass": true }),
            Some((u, v)) => json!({
                "pass": false,
                "u": c.format_element(u),
                "v": c.format_element(v),
                "lhs": format_rational(self.lhs.as_ref().expect("set with witness")),
                "rhs": format_rational(self.rhs.as_ref().expect("set with witness")),
            }),
        }
    }
}

/// Both sides of the equation at `(u, v)`.
pub fn feq_sides(
    f: &PointMap,
    c: &RingSpec,
    u: &Element,
    v: &Element,
) -> (BigRational, BigRational) {
    let fu = value(f, u);
    let lhs = &fu * &fu * value(f, v) * value(f, &c.neg_unchecked(v));
    let f0 = value(f, &c.zero());
    let rhs = &f0 * &f0 * value(f, &c.add_unchecked(u, v)) * value(f, &c.sub_unchecked(u, v));
    (lhs, rhs)
}

/// Checks the functional equation at every pair `(u, v)`.
///
/// Finite carriers are scanned exhaustively in enumeration order. On the
/// rationals only `u` in `supp ∪ (supp + supp)/2` and `v` in
/// `supp ∪ (supp - supp)/2` can make a side nonzero, so the scan covers
/// the pairs from that set.
pub fn feq_check(f: &PointMap, carrier: &RingSpec) -> Result<FeqVerdict> {
    for (x, m) in f {
        if !carrier.contains(x) {
            return Err(AlgebraError::SpecMismatch(carrier.to_string()).into());
        }
        if m.is_negative() {
            return Err(MeasureError::NonPositiveMass(format_rational(m)).into());
        }
    }
    if carrier.is_finite() {
        feq_finite(f, carrier)
    } else {
        Ok(feq_rational(f, carrier))
    }
}

fn feq_finite(f: &PointMap, c: &RingSpec) -> Result<FeqVerdict> {
    let q = c.cardinality().expect("finite") as usize;
    let lcm = f.values().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let scaled: Vec<BigInt> = (0..q as u64)
        .map(|i| {
            f.get(&Element::Finite(i))
                .map(|r| (r * &lcm).to_integer())
                .unwrap_or_default()
        })
        .collect();
    let code = |e: Element| e.code().expect("finite carrier") as usize;
    let neg: Vec<usize> = (0..q as u64)
        .map(|x| code(c.neg_unchecked(&Element::Finite(x))))
        .collect();
    // the equation is homogeneous of degree 4, so integer numerators suffice
    let small: Option<Vec<u128>> = scaled
        .iter()
        .map(|n| n.to_u64().filter(|&x| x < 1 << 31).map(u128::from))
        .collect();
    let holds: Box<dyn Fn(usize, usize, usize, usize) -> bool> = match &small {
        Some(n) => {
            Box::new(move |u, v, s, d| n[u] * n[u] * n[v] * n[neg[v]] == n[0] * n[0] * n[s] * n[d])
        }
        None => {
            let n = &scaled;
            let neg = neg.clone();
            Box::new(move |u, v, s, d| {
                &n[u] * &n[u] * &n[v] * &n[neg[v]] == &n[0] * &n[0] * &n[s] * &n[d]
            })
        }
    };
    for u in 0..q {
        let eu = Element::Finite(u as u64);
        for v in 0..q {
            let ev = Element::Finite(v as u64);
            let s = code(c.add_unchecked(&eu, &ev));
            let d = code(c.sub_unchecked(&eu, &ev));
            if !holds(u, v, s, d) {
                return Ok(FeqVerdict::failed(f, c, eu, ev));
            }
        }
    }
    Ok(FeqVerdict::passed())
}

fn feq_rational(f: &PointMap, c: &RingSpec) -> FeqVerdict {
    let supp: Vec<&Element> = f
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(x, _)| x)
        .collect();
    let mut domain: BTreeSet<Element> = supp.iter().map(|x| (*x).clone()).collect();
    for a in &supp {
        for b in &supp {
            for x in [c.add_unchecked(a, b), c.sub_unchecked(a, b)] {
                domain.insert(c.halve_unchecked(&x).expect("characteristic 0"));
            }
        }
    }
    for u in &domain {
        for v in &domain {
            let (lhs, rhs) = feq_sides(f, c, u, v);
            if lhs != rhs {
                return FeqVerdict {
                    witness: Some((u.clone(), v.clone())),
                    lhs: Some(lhs),
                    rhs: Some(rhs),
                };
            }
        }
    }
    FeqVerdict::passed()
}

fn require_odd_finite_field(c: &RingSpec) -> Result<()> {
    if !(c.is_finite() && c.is_field()) {
        return Err(precondition(format!("{c} is not a finite field")));
    }
    if c.characteristic() == 2 {
        return Err(precondition(format!("{c} has characteristic 2")));
    }
    Ok(())
}

/// Independence of `(S, D)` next to the functional equation for one law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma1Outcome {
    pub independent: bool,
    pub feq: FeqVerdict,
}

impl Lemma1Outcome {
    pub fn agree(&self) -> bool {
        self.independent == self.feq.pass()
    }
}

pub fn lemma1_roundtrip(mu: &Dist) -> Result<Lemma1Outcome> {
    let c = mu.carrier();
    require_odd_finite_field(c)?;
    if mu.mass(&c.zero()).is_zero() {
        return Err(precondition("the law must charge 0"));
    }
    let independent = is_independent(&push_t(mu, mu)?).independent();
    let feq = feq_check(mu.pmf(), c)?;
    Ok(Lemma1Outcome { independent, feq })
}

/// The support of a solution with `f(0) > 0`, checked to be a subgroup.
pub fn support_subgroup(f: &PointMap, carrier: &RingSpec) -> Result<crate::algebra::SubgroupSpec> {
    if !carrier.is_finite() {
        return Err(precondition("support extraction needs a finite carrier"));
    }
    if carrier.characteristic() == 2 {
        return Err(precondition(format!("{carrier} has characteristic 2")));
    }
    if !value(f, &carrier.zero()).is_positive() {
        return Err(precondition("f(0) must be positive"));
    }
    if !feq_check(f, carrier)?.pass() {
        return Err(precondition("f does not satisfy the functional equation"));
    }
    let support: BTreeSet<Element> = f
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(x, _)| x.clone())
        .collect();
    match carrier.coset_test(&support)? {
        Some((k, _)) if k.elements() == &support => Ok(k),
        _ => Err(CharacterizeError::NotASubgroup(
            support
                .iter()
                .map(|x| carrier.format_element(x))
                .collect::<Vec<_>>()
                .join(","),
        )),
    }
}

/// `x -> f(x + h) / f(x)` on the points where both values are defined.
pub fn mdiff(f: &PointMap, carrier: &RingSpec, h: &Element) -> Result<PointMap> {
    let mut out = PointMap::new();
    for (x, fx) in f {
        let y = carrier.add(x, h)?;
        if let Some(fy) = f.get(&y) {
            if fx.is_zero() {
                return Err(CharacterizeError::ZeroValue(carrier.format_element(x)));
            }
            out.insert(x.clone(), fy / fx);
        }
    }
    Ok(out)
}

/// `mdiff` applied `order` times with step `u`.
pub fn mdiff_iter(f: &PointMap, carrier: &RingSpec, u: &Element, order: u32) -> Result<PointMap> {
    let mut g = f.clone();
    for _ in 0..order {
        g = mdiff(&g, carrier, u)?;
    }
    Ok(g)
}

/// Machine-readable outcome of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    pub params: BTreeMap<String, Value>,
    pub seed: u64,
    pub pass: bool,
    /// Counterexamples, one per failed check.
    pub witnesses: Vec<Value>,
    /// Informational values that do not affect the verdict.
    pub evidence: Vec<Value>,
    pub counts: BTreeMap<String, u64>,
    pub runtime_ms: Option<u64>,
}

impl Report {
    pub fn new(scenario: &str, seed: u64) -> Report {
        let counts = ["trials", "passes", "fails"]
            .iter()
            .map(|k| (k.to_string(), 0))
            .collect();
        Report {
            scenario: scenario.to_string(),
            params: BTreeMap::new(),
            seed,
            pass: true,
            witnesses: Vec::new(),
            evidence: Vec::new(),
            counts,
            runtime_ms: None,
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    /// Records one check; failing checks keep their witness.
    pub fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.bump("trials", 1);
        if ok {
            self.bump("passes", 1);
        } else {
            self.bump("fails", 1);
            self.witnesses.push(witness());
        }
        self.pass = self.count("fails") == 0;
    }

    pub fn bump(&mut self, key: &str, by: u64) {
        *self.counts.entry(key.to_string()).or_default() += by;
    }

    pub fn note(&mut self, v: Value) {
        self.evidence.push(v);
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// JSON with keys sorted at every level.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report is plain data")
    }

    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_trials<T: Send>(trials: u64, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..trials).into_par_iter().map(f).collect()
}

/// A uniformly random `size`-subset of `pool`, containing `anchor` if given.
pub fn random_subset<R: Rng>(
    rng: &mut R,
    pool: &[Element],
    size: usize,
    anchor: Option<&Element>,
) -> BTreeSet<Element> {
    match anchor {
        None => sample(rng, pool.len(), size)
            .into_iter()
            .map(|i| pool[i].clone())
            .collect(),
        Some(a) => {
            let rest: Vec<&Element> = pool.iter().filter(|x| *x != a).collect();
            let mut s: BTreeSet<Element> = sample(rng, rest.len(), size - 1)
                .into_iter()
                .map(|i| rest[i].clone())
                .collect();
            s.insert(a.clone());
            s
        }
    }
}

/// Integer weights in `[1, MAX_MASS]` on a random support whose size is
/// uniform in `sizes`, normalized exactly.
pub fn random_dist<R: Rng>(
    rng: &mut R,
    carrier: &RingSpec,
    pool: &[Element],
    sizes: RangeInclusive<usize>,
    anchor: Option<&Element>,
) -> Result<Dist> {
    let size = rng.gen_range(sizes);
    let support = random_subset(rng, pool, size, anchor);
    let weights = support
        .into_iter()
        .map(|x| (x, rng.gen_range(1..=MAX_MASS)))
        .collect();
    Ok(Dist::from_weights(carrier.clone(), weights)?)
}

fn dist_json(mu: &Dist) -> Value {
    Value::String(mu.to_literal())
}

/// Agreement of independence and the functional equation on random laws
/// charging 0. Trials cycle through random weights, uniform laws on random
/// subsets and Haar laws of random subgroups.
pub fn lemma1_verify(spec: &RingSpec, trials: u64, seed: u64) -> Result<Report> {
    require_odd_finite_field(spec)?;
    let elems = spec.enumerate()?;
    let subgroups = spec.all_subgroups()?;
    let zero = spec.zero();
    let q = elems.len();
    let outcomes = run_trials(trials, |i| -> Result<(Dist, Lemma1Outcome)> {
        let mut rng = trial_rng(seed, i);
        let mu = match i % 3 {
            0 => random_dist(&mut rng, spec, &elems, 1..=q, Some(&zero))?,
            1 => {
                let size = rng.gen_range(1..=q);
                Dist::uniform(
                    spec.clone(),
                    &random_subset(&mut rng, &elems, size, Some(&zero)),
                )?
            }
            _ => haar(&subgroups[rng.gen_range(0..subgroups.len())])?,
        };
        let out = lemma1_roundtrip(&mu)?;
        Ok((mu, out))
    });
    let mut report = Report::new("lemma1", seed);
    report.param("field", spec.to_string());
    report.param("trials", trials);
    for (i, o) in outcomes.into_iter().enumerate() {
        let (mu, out) = o?;
        report.bump("independent", out.independent as u64);
        report.bump("feq_pass", out.feq.pass() as u64);
        report.record(out.agree(), || {
            json!({ "trial": i, "mu": dist_json(&mu), "independent": out.independent,
                    "feq": out.feq.to_json(spec) })
        });
    }
    Ok(report)
}

/// The closed form of the `(S, D)` law against the direct push-forward.
pub fn closed_form_verify(spec: &RingSpec, trials: u64, seed: u64) -> Result<Report> {
    require_odd_finite_field(spec)?;
    let elems = spec.enumerate()?;
    let q = elems.len();
    let outcomes = run_trials(trials, |i| -> Result<(Dist, bool)> {
        let mut rng = trial_rng(seed, i);
        let mu = random_dist(&mut rng, spec, &elems, 1..=q, None)?;
        let same = closed_form_sd(&mu)? == push_t(&mu, &mu)?;
        Ok((mu, same))
    });
    let mut report = Report::new("closed_form", seed);
    report.param("field", spec.to_string());
    report.param("trials", trials);
    for (i, o) in outcomes.into_iter().enumerate() {
        let (mu, same) = o?;
        report.record(same, || json!({ "trial": i, "mu": dist_json(&mu) }));
    }
    Ok(report)
}

fn random_other<R: Rng>(rng: &mut R, spec: &RingSpec, elems: &[Element]) -> Result<Dist> {
    for _ in 0..MAX_REJECTIONS {
        let mu = random_dist(rng, spec, elems, 1..=elems.len(), None)?;
        if classify(&mu)? == Classification::Other {
            return Ok(mu);
        }
    }
    Err(precondition(format!(
        "no non-idempotent law found on {spec}"
    )))
}

/// Idempotent laws give independence and nothing else does: every shift of
/// every Haar law, `trials` random non-idempotent laws, and (on fields with
/// at most 16 elements) every uniform law on a subset.
pub fn theorem1_verify(spec: &RingSpec, trials: u64, seed: u64) -> Result<Report> {
    require_odd_finite_field(spec)?;
    let elems = spec.enumerate()?;
    let q = elems.len() as u64;
    let mut report = Report::new("theorem1", seed);
    report.param("field", spec.to_string());
    report.param("trials", trials);

    let subgroups = spec.all_subgroups()?;
    report.bump("subgroups", subgroups.len() as u64);
    for k in &subgroups {
        let h = haar(k)?;
        for x in &elems {
            let mu = shift(&h, x)?;
            let ok = is_independent(&push_t(&mu, &mu)?).independent();
            report.bump("haar_shifts", 1);
            report.record(ok, || json!({ "part": "haar_shift", "mu": dist_json(&mu) }));
        }
    }

    let outcomes = run_trials(trials, |i| -> Result<(Dist, bool)> {
        let mut rng = trial_rng(seed, i);
        let mu = random_other(&mut rng, spec, &elems)?;
        let independent = is_independent(&push_t(&mu, &mu)?).independent();
        Ok((mu, independent))
    });
    for (i, o) in outcomes.into_iter().enumerate() {
        let (mu, independent) = o?;
        report.bump("random_other", 1);
        report.record(
            !independent,
            || json!({ "part": "random_other", "trial": i, "mu": dist_json(&mu) }),
        );
    }

    if q <= SUBSET_SWEEP_LIMIT {
        let sweep: Vec<Result<(BTreeSet<Element>, bool, bool)>> = (1u64..1 << q)
            .into_par_iter()
            .map(|mask| {
                let subset: BTreeSet<Element> = (0..q)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| elems[b as usize].clone())
                    .collect();
                let mu = Dist::uniform(spec.clone(), &subset)?;
                let independent = is_independent(&push_t(&mu, &mu)?).independent();
                let coset = spec.coset_test(&subset)?.is_some();
                Ok((subset, independent, coset))
            })
            .collect();
        for s in sweep {
            let (subset, independent, coset) = s?;
            report.bump("subsets", 1);
            report.bump("independent_subsets", independent as u64);
            report.record(independent == coset, || {
                let set: Vec<String> = subset.iter().map(|x| spec.format_element(x)).collect();
                json!({ "part": "subset_sweep", "subset": set, "independent": independent,
                        "coset": coset })
            });
        }
    }
    Ok(report)
}

/// The grid `{a/d : 1 <= d <= denom_bound, |a/d| <= radius}`.
pub fn rational_grid(radius: u64, denom_bound: u64) -> Vec<Element> {
    let mut grid = BTreeSet::new();
    for d in 1..=denom_bound as i64 {
        let r = radius as i64 * d;
        for a in -r..=r {
            grid.insert(Element::rational(a, d));
        }
    }
    grid.into_iter().collect()
}

/// Random search for a nondegenerate law on the rationals with independent
/// `S` and `D`; every hit is a counterexample.
pub fn theorem2_search(radius: u64, denom_bound: u64, trials: u64, seed: u64) -> Result<Report> {
    if denom_bound == 0 {
        return Err(precondition("denominator bound must be at least 1"));
    }
    let q = RingSpec::rationals();
    let pool = rational_grid(radius, denom_bound);
    if pool.len() < 2 {
        return Err(precondition("the grid must hold at least two points"));
    }
    let max = pool.len().min(MAX_RATIONAL_SUPPORT);
    let outcomes = run_trials(trials, |i| -> Result<(Dist, bool)> {
        let mut rng = trial_rng(seed, i);
        let mu = random_dist(&mut rng, &q, &pool, 2..=max, None)?;
        Ok((mu.clone(), is_independent(&push_t(&mu, &mu)?).independent()))
    });
    let mut report = Report::new("theorem2", seed);
    report.param("field", q.to_string());
    report.param("radius", radius);
    report.param("denom_bound", denom_bound);
    report.param("max_support", max as u64);
    report.param("trials", trials);
    for (i, o) in outcomes.into_iter().enumerate() {
        let (mu, independent) = o?;
        report.record(!independent, || json!({ "trial": i, "mu": dist_json(&mu) }));
    }
    Ok(report)
}

/// Every law on a `q`-element carrier with masses in `(1/d) Z`, `d <= max_den`.
fn grid_laws(spec: &RingSpec, max_den: u64) -> Result<Vec<Dist>> {
    fn compositions(n: u64, parts: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in 0..=n {
            prefix.push(a);
            compositions(n - a, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let elems = spec.enumerate()?;
    let mut seen = BTreeSet::new();
    let mut laws = Vec::new();
    for d in 1..=max_den {
        let mut comps = Vec::new();
        compositions(d, elems.len(), &mut Vec::new(), &mut comps);
        for c in comps {
            let w = elems
                .iter()
                .cloned()
                .zip(c)
                .filter(|(_, w)| *w > 0)
                .collect();
            let mu = Dist::from_weights(spec.clone(), w)?;
            if seen.insert(mu.to_literal()) {
                laws.push(mu);
            }
        }
    }
    Ok(laws)
}

/// In characteristic 2, `D = S^2`, so only pairs of point masses give
/// independence. Carriers with at most 4 elements are also swept over all
/// laws with denominators up to 4.
pub fn remark1_verify(spec: &RingSpec, trials: u64, seed: u64) -> Result<Report> {
    if !(spec.is_finite() && spec.is_field() && spec.characteristic() == 2) {
        return Err(precondition(format!(
            "{spec} is not a finite field of characteristic 2"
        )));
    }
    let elems = spec.enumerate()?;
    let mut report = Report::new("remark1", seed);
    report.param("field", spec.to_string());
    report.param("trials", trials);
    let pair_json = |mu: &Dist, nu: &Dist| json!({ "mu": dist_json(mu), "nu": dist_json(nu) });

    for x in &elems {
        for y in &elems {
            let (mu, nu) = (degenerate(spec, x.clone())?, degenerate(spec, y.clone())?);
            let ok = is_independent(&push_t(&mu, &nu)?).independent();
            report.bump("degenerate_pairs", 1);
            report.record(ok, || pair_json(&mu, &nu));
        }
    }

    if elems.len() <= 4 {
        let laws = grid_laws(spec, 4)?;
        for mu in &laws {
            for nu in &laws {
                if mu.pmf().len() == 1 && nu.pmf().len() == 1 {
                    continue;
                }
                let independent = is_independent(&push_t(mu, nu)?).independent();
                report.bump("grid_pairs", 1);
                report.record(!independent, || pair_json(mu, nu));
            }
        }
    }

    let q = elems.len();
    let outcomes = run_trials(trials, |i| -> Result<(Dist, Dist, bool)> {
        let mut rng = trial_rng(seed, i);
        for _ in 0..MAX_REJECTIONS {
            let mu = random_dist(&mut rng, spec, &elems, 1..=q, None)?;
            let nu = random_dist(&mut rng, spec, &elems, 1..=q, None)?;
            if mu.pmf().len() > 1 || nu.pmf().len() > 1 {
                let independent = is_independent(&push_t(&mu, &nu)?).independent();
                return Ok((mu, nu, independent));
            }
        }
        Err(precondition("no nondegenerate pair found"))
    });
    for o in outcomes {
        let (mu, nu, independent) = o?;
        report.bump("random_pairs", 1);
        report.record(!independent, || pair_json(&mu, &nu));
    }
    Ok(report)
}

/// `μ = (E_{-e} + E_e)/2` and `ν = E_0` give independent `S` and `D`
/// although `μ` is not idempotent.
pub fn remark2_counterexample(spec: &RingSpec) -> Result<Report> {
    require_odd_finite_field(spec)?;
    let e = spec.one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mu = Dist::new(
        spec.clone(),
        PointMap::from([(spec.neg(&e)?, half.clone()), (e, half)]),
    )?;
    let nu = degenerate(spec, spec.zero())?;
    let joint = push_t(&mu, &nu)?;
    let verdict = is_independent(&joint);
    let class = classify(&mu)?;
    let mut report = Report::new("remark2", 0);
    report.param("field", spec.to_string());
    report.record(verdict.independent(), || json!({ "check": "independent" }));
    report.record(
        class == Classification::Other,
        || json!({ "check": "classification", "got": class.label() }),
    );
    report.note(json!({
        "mu": dist_json(&mu),
        "nu": dist_json(&nu),
        "joint": serde_json::to_value(&joint).expect("plain data"),
        "classification": class.label(),
    }));
    Ok(report)
}

fn density_json(rho: &StepDensity) -> Value {
    rho.to_json()
}

fn random_density<R: Rng>(rng: &mut R, ring: &RingSpec, p: u64, level: u32) -> Result<StepDensity> {
    let elems = ring.enumerate()?;
    let zero = ring.zero();
    let classes = elems.len() as u64;
    for _ in 0..MAX_REJECTIONS {
        let mu = random_dist(rng, ring, &elems, 2..=elems.len(), Some(&zero))?;
        if classify(&mu)? != Classification::Other {
            continue;
        }
        let scale = BigRational::from_integer(BigInt::from(classes));
        let values = mu
            .pmf()
            .iter()
            .map(|(x, m)| (x.code().expect("finite"), m * &scale))
            .collect();
        return Ok(StepDensity::new(p, level, values)?);
    }
    Err(precondition("no non-Haar density found"))
}

/// Haar densities of `p^m Z_p` against random non-Haar step densities at
/// level `N`, through the functional equation on `Z/p^N` and the residue
/// independence test at levels `1..=N`.
pub fn theorem3_verify(p: u64, m: u32, level: u32, trials: u64, seed: u64) -> Result<Report> {
    if p == 2 || !is_prime(p) {
        return Err(precondition(format!("p = {p} must be an odd prime")));
    }
    if level <= m {
        return Err(precondition(format!("level {level} must exceed m = {m}")));
    }
    let ring = RingSpec::modular_ring(p, level)?;
    let mut report = Report::new("theorem3", seed);
    report.param("p", p);
    report.param("m", m);
    report.param("level", level);
    report.param("trials", trials);

    let rho = StepDensity::haar(p, m, level)?;
    let feq = feq_check(rho.to_pmf()?.pmf(), &ring)?;
    report.record(
        feq.pass(),
        || json!({ "part": "haar_feq", "feq": feq.to_json(&ring) }),
    );
    let res = residue_sd_test(&rho, level)?;
    report.record(res.independent(), || json!({ "part": "haar_residue" }));

    let outcomes = run_trials(trials, |i| -> Result<(StepDensity, bool, Option<u32>)> {
        let mut rng = trial_rng(seed, i);
        let rho = random_density(&mut rng, &ring, p, level)?;
        let feq_pass = feq_check(rho.to_pmf()?.pmf(), &ring)?.pass();
        let mut dependent_at = None;
        for n in 1..=level {
            if !residue_sd_test(&rho, n)?.independent() {
                dependent_at = Some(n);
                break;
            }
        }
        Ok((rho, feq_pass, dependent_at))
    });
    for (i, o) in outcomes.into_iter().enumerate() {
        let (rho, feq_pass, dependent_at) = o?;
        report.bump("random_densities", 1);
        report.record(!feq_pass && dependent_at.is_some(), || {
            json!({ "part": "random_density", "trial": i, "density": density_json(&rho),
                    "feq_pass": feq_pass, "dependent_at": dependent_at })
        });
    }
    Ok(report)
}

/// The 2-adic Haar density of `2^m Z_2` breaks the equation at
/// `u = v = 2^(m-1)`, and the induced law on `Z/2^N` gives dependent
/// `S` and `D`.
pub fn remark3_verify(m: u32, level: u32) -> Result<Report> {
    if level <= m + 1 {
        return Err(precondition(format!(
            "level {level} must exceed m + 1 = {}",
            m + 1
        )));
    }
    let mut report = Report::new("remark3", 0);
    report.param("m", m);
    report.param("level", level);
    let rho = StepDensity::haar(2, m, level)?;
    let prec = level + 2;
    let pt = |r: BigRational| PAdic::from_rational(2, &r, prec);
    let u = BigRational::new(BigInt::one(), BigInt::from(2))
        * BigRational::from_integer(BigInt::from(2).pow(m));
    let ev = |r: BigRational| -> Result<BigRational> { Ok(rho.eval(&pt(r)?)?) };
    let zero = BigRational::zero();
    let lhs = ev(u.clone())?.pow(2) * ev(u.clone())? * ev(-u.clone())?;
    let rhs = ev(zero.clone())?.pow(2) * ev(&u + &u)? * ev(zero)?;
    let expected = BigRational::from_integer(BigInt::from(2).pow(4 * m));
    report.record(lhs.is_zero() && rhs == expected, || {
        json!({ "part": "equation", "lhs": format_rational(&lhs), "rhs": format_rational(&rhs) })
    });
    report.note(json!({
        "u": format_rational(&u),
        "v": format_rational(&u),
        "lhs": format_rational(&lhs),
        "rhs": format_rational(&rhs),
    }));

    let verdict = residue_sd_test(&rho, level)?;
    report.record(!verdict.independent(), || json!({ "part": "residue" }));
    if let Some(w) = verdict.witness {
        let ring = RingSpec::modular_ring(2, level)?;
        report.note(json!({
            "u": ring.format_element(&w.u),
            "v": ring.format_element(&w.v),
            "joint": format_rational(&w.joint),
            "product": format_rational(&w.product),
        }));
    }
    Ok(report)
}

fn random_unit<R: Rng>(rng: &mut R, p: u64, digits: u32) -> Vec<u64> {
    let mut d = vec![rng.gen_range(1..p)];
    d.extend((1..digits).map(|_| rng.gen_range(0..p)));
    d
}

/// Canonical square roots of random squares: the square, the valuation,
/// agreement of the Newton and series constructions, the branch residue and
/// `s(p^2 x) = p s(x)`. For `p = 2` also `s(9) = -3` and `s(25) = 5`.
pub fn lemma3_verify(p: u64, prec: u32, trials: u64, seed: u64) -> Result<Report> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p).into());
    }
    if prec < 4 {
        return Err(precondition("precision must be at least 4"));
    }
    let table = branch_table(p)?;
    let mut report = Report::new("lemma3", seed);
    report.param("p", p);
    report.param("prec", prec);
    report.param("trials", trials);
    if p == 2 {
        for (x, r) in [(9i64, -3i64), (25, 5)] {
            let got = sqrt_hensel(&PAdic::from_int(2, x, prec)?, &table)?;
            let want = PAdic::from_int(2, r, prec - 1)?;
            report.record(got == want, || json!({ "x": x, "got": got.to_string() }));
        }
    }
    let outcomes = run_trials(trials, |i| -> Result<(PAdic, Vec<&'static str>)> {
        let mut rng = trial_rng(seed, i);
        let l: i64 = rng.gen_range(-2..=2);
        let mut w = PAdic::from_digits(p, 0, &random_unit(&mut rng, p, prec))?;
        if p == 2 {
            // keep 2-adic roots determined to the full width
            w = PAdic::from_digits(2, 0, &random_unit(&mut rng, 2, prec + 1))?;
        }
        let x = pmul(&w, &w)?.shift(2 * l).truncate(prec);
        let mut failed = Vec::new();
        let r = sqrt_hensel(&x, &table)?;
        if !agree(&pmul(&r, &r)?, &x)? {
            failed.push("square");
        }
        if r.valuation() != Some(l) {
            failed.push("valuation");
        }
        let branch = if p == 2 {
            (r.unit().expect("nonzero") % 4u32).to_u64().expect("small")
        } else {
            r.unit_residue().expect("nonzero")
        };
        if !table.selects(branch) {
            failed.push("branch");
        }
        if p != 2 && !agree(&r, &sqrt_series(&x, &table)?)? {
            failed.push("series");
        }
        if sqrt_hensel(&x.shift(2), &table)? != r.shift(1) {
            failed.push("scaling");
        }
        Ok((x, failed))
    });
    for (i, o) in outcomes.into_iter().enumerate() {
        let (x, failed) = o?;
        report.record(
            failed.is_empty(),
            || json!({ "trial": i, "x": x.to_string(), "failed": failed }),
        );
    }
    Ok(report)
}

fn pair_params(p: u64, level: u32, lo: i64) -> Vec<(i64, i64)> {
    let extra = if p == 2 { 1 } else { 0 };
    let mut out = Vec::new();
    for l in 0..=1i64 {
        for k in [l + 1, l + 2] {
            if k >= l + lo + extra && k + l < level as i64 {
                out.push((l, k));
            }
        }
    }
    out
}

/// Ball images under `T` on random centers with `|x0 - y0| = p^-l`,
/// `l in {0, 1}`, `k in {l + 1, l + 2}`.
pub fn lemma4_verify(p: u64, level: u32, trials: u64, seed: u64) -> Result<Report> {
    if !is_prime(p) {
        return Err(PadicError::NotPrime(p).into());
    }
    let modulus = checked_pow(p, level).ok_or_else(|| precondition("level too large"))?;
    let combos = pair_params(p, level, 1);
    if combos.is_empty() {
        return Err(precondition(format!(
            "level {level} leaves no admissible (l, k)"
        )));
    }
    let mut report = Report::new("lemma4", seed);
    report.param("p", p);
    report.param("level", level);
    report.param("trials", trials);
    for (l, k) in combos {
        let outcomes = run_trials(trials, |i| -> Result<(u64, u64, bool)> {
            let mut rng = trial_rng(seed, (l as u64) << 40 | (k as u64) << 32 | i);
            let x0 = rng.gen_range(0..modulus);
            let unit = loop {
                let w = rng.gen_range(1..modulus);
                if w % p != 0 {
                    break w;
                }
            };
            let y0 = (x0 + unit * p.pow(l as u32)) % modulus;
            let a = PAdic::from_residue(p, x0, level)?;
            let b = PAdic::from_residue(p, y0, level)?;
            Ok((x0, y0, lemma4_check(&a, &b, k, level)?))
        });
        for o in outcomes {
            let (x0, y0, ok) = o?;
            report.bump(&format!("l{l}_k{k}"), 1);
            report.record(ok, || json!({ "x0": x0, "y0": y0, "l": l, "k": k }));
        }
    }
    Ok(report)
}

/// `{2ct + p^m t^2}` covers `Z/p^N` for every unit `c mod p` and `m in {1, 2}`.
pub fn eq12_verify(p: u64, level: u32) -> Result<Report> {
    let mut report = Report::new("eq12", 0);
    report.param("p", p);
    report.param("level", level);
    for m in 1..=2 {
        for c in 1..p {
            let ok = eq12_check(p, c, m, level)?;
            report.record(ok, || json!({ "c": c, "m": m }));
        }
    }
    Ok(report)
}

/// Disjointness of the two inverse branches and the change of variables on
/// random `E_k` with `l in {0, 1}` and `k >= l + 1`.
pub fn lemma5_verify(p: u64, level: u32, trials: u64, seed: u64) -> Result<Report> {
    if p == 2 || !is_prime(p) {
        return Err(precondition(format!("p = {p} must be an odd prime")));
    }
    let modulus = checked_pow(p, level).ok_or_else(|| precondition("level too large"))?;
    let mut combos = Vec::new();
    for l in 0..=1i64 {
        for k in [l + 1, l + 2] {
            if k + l <= level as i64 {
                combos.push((l, k));
            }
        }
    }
    if combos.is_empty() {
        return Err(precondition(format!(
            "level {level} leaves no admissible (l, k)"
        )));
    }
    let mut report = Report::new("lemma5", seed);
    report.param("p", p);
    report.param("level", level);
    report.param("trials", trials);
    for (l, k) in combos {
        let outcomes = run_trials(
            trials,
            |i| -> Result<(u64, BigInt, crate::padic::Lemma5Outcome)> {
                let mut rng = trial_rng(seed, (l as u64) << 40 | (k as u64) << 32 | i);
                let u0 = rng.gen_range(0..modulus);
                let w = loop {
                    let w = rng.gen_range(1..modulus);
                    if w % p != 0 {
                        break w;
                    }
                };
                let v0 = BigInt::from(w).pow(2) * BigInt::from(p).pow(2 * l as u32);
                let a = PAdic::from_residue(p, u0, level)?;
                let b = PAdic::from_bigint(p, &v0, level + 2)?;
                Ok((u0, v0, lemma5_check(&a, &b, k, level)?))
            },
        );
        for o in outcomes {
            let (u0, v0, out) = o?;
            report.bump("image_is_ball", out.image_is_ball as u64);
            report.record(out.disjoint && out.jacobian_ok, || {
                json!({ "u0": u0, "v0": v0.to_string(), "l": l, "k": k,
                        "disjoint": out.disjoint, "jacobian_ok": out.jacobian_ok })
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(n: u64) -> Element {
        Element::Finite(n)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn fp(p: u64) -> RingSpec {
        RingSpec::prime_field(p).unwrap()
    }

    #[test]
    fn feq_examples() {
        let f5 = fp(5);
        let e0 = PointMap::from([(f(0), rat(1, 1))]);
        assert!(feq_check(&e0, &f5).unwrap().pass());
        let f3 = fp(3);
        let u: PointMap = (0..3).map(|x| (f(x), rat(1, 3))).collect();
        assert!(feq_check(&u, &f3).unwrap().pass());
        let half = PointMap::from([(f(0), rat(1, 2)), (f(1), rat(1, 2))]);
        let v = feq_check(&half, &f3).unwrap();
        assert_eq!(v.witness, Some((f(2), f(1))));
        assert_eq!(v.lhs, Some(BigRational::zero()));
        assert_eq!(v.rhs, Some(rat(1, 16)));
    }

    fn brute_feq(f: &PointMap, c: &RingSpec) -> Option<(Element, Element)> {
        let elems = c.enumerate().unwrap();
        for u in &elems {
            for v in &elems {
                let (lhs, rhs) = feq_sides(f, c, u, v);
                if lhs != rhs {
                    return Some((u.clone(), v.clone()));
                }
            }
        }
        None
    }

    #[test]
    fn feq_matches_brute_force() {
        let f7 = fp(7);
        let tiny = BigRational::new(BigInt::one(), BigInt::from(2).pow(40));
        // numerators beyond the u128 fast path
        let big = PointMap::from([
            (f(0), BigRational::one() - &tiny - &tiny),
            (f(3), tiny.clone()),
            (f(4), tiny),
        ]);
        let small = PointMap::from([(f(0), rat(1, 2)), (f(3), rat(1, 4)), (f(4), rat(1, 4))]);
        let f9 = RingSpec::extension_field(3, 2).unwrap();
        let ext = PointMap::from([(f(0), rat(1, 3)), (f(3), rat(1, 3)), (f(6), rat(1, 3))]);
        for (map, c) in [(&big, &f7), (&small, &f7), (&ext, &f9)] {
            assert_eq!(feq_check(map, c).unwrap().witness, brute_feq(map, c));
        }
        assert!(brute_feq(&ext, &f9).is_none());
        assert!(brute_feq(&big, &f7).is_some());
    }

    #[test]
    fn feq_on_rationals() {
        let q = RingSpec::rationals();
        let two = PointMap::from([
            (Element::rational(0, 1), rat(1, 2)),
            (Element::rational(1, 1), rat(1, 2)),
        ]);
        let v = feq_check(&two, &q).unwrap();
        assert!(!v.pass());
        let (lhs, rhs) = feq_sides(
            &two,
            &q,
            &v.witness.clone().unwrap().0,
            &v.witness.unwrap().1,
        );
        assert_ne!(lhs, rhs);
        let point = PointMap::from([(Element::rational(0, 1), rat(1, 1))]);
        assert!(feq_check(&point, &q).unwrap().pass());
    }

    #[test]
    fn lemma1_examples() {
        let f3 = fp(3);
        let u = Dist::parse(&f3, "0:1/3,1:1/3,2:1/3").unwrap();
        let o = lemma1_roundtrip(&u).unwrap();
        assert!(o.independent && o.feq.pass());
        let h = Dist::parse(&f3, "0:1/2,1:1/2").unwrap();
        let o = lemma1_roundtrip(&h).unwrap();
        assert!(!o.independent && !o.feq.pass());
        let no_zero = Dist::parse(&f3, "1:1/1").unwrap();
        assert!(matches!(
            lemma1_roundtrip(&no_zero),
            Err(CharacterizeError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn support_subgroups() {
        let f3 = fp(3);
        let u: PointMap = (0..3).map(|x| (f(x), rat(1, 3))).collect();
        assert_eq!(support_subgroup(&u, &f3).unwrap().cardinality(), 3);
        let e0 = PointMap::from([(f(0), rat(1, 1))]);
        assert_eq!(support_subgroup(&e0, &f3).unwrap().cardinality(), 1);
        let f9 = RingSpec::extension_field(3, 2).unwrap();
        let k: PointMap = [0, 3, 6].iter().map(|&x| (f(x), rat(1, 3))).collect();
        let s = support_subgroup(&k, &f9).unwrap();
        assert_eq!(s.elements(), &[f(0), f(3), f(6)].into_iter().collect());
    }

    #[test]
    fn multiplicative_differences() {
        let q = RingSpec::rationals();
        let one = Element::rational(1, 1);
        let base = rat(3, 2);
        let grid = |e: u32| -> PointMap {
            (-6i64..=6)
                .map(|x| (Element::rational(x, 1), base.pow(x.pow(e) as i32)))
                .collect()
        };
        let quad = mdiff_iter(&grid(2), &q, &one, 3).unwrap();
        assert_eq!(quad.len(), 10);
        assert!(quad.values().all(|v| v.is_one()));
        let cubic = mdiff_iter(&grid(3), &q, &one, 3).unwrap();
        assert!(cubic.values().all(|v| *v == base.pow(6)));
        let flat: PointMap = (0..4)
            .map(|x| (Element::rational(x, 1), rat(2, 1)))
            .collect();
        assert!(mdiff(&flat, &q, &one).unwrap().values().all(|v| v.is_one()));
        let holes = PointMap::from([
            (Element::rational(0, 1), rat(0, 1)),
            (one.clone(), rat(1, 1)),
        ]);
        assert!(matches!(
            mdiff(&holes, &q, &one),
            Err(CharacterizeError::ZeroValue(_))
        ));
    }

    #[test]
    fn theorem1_on_f5() {
        let r = theorem1_verify(&fp(5), 50, 7).unwrap();
        assert!(r.pass, "{:?}", r.witnesses);
        assert_eq!(r.count("subsets"), 31);
        assert_eq!(r.count("independent_subsets"), 6);
    }

    #[test]
    fn theorem2_examples() {
        let q = RingSpec::rationals();
        let mu = Dist::parse(&q, "0:1/2,1:1/2").unwrap();
        let j = push_t(&mu, &mu).unwrap();
        let w = is_independent(&j);
        assert!(!w.independent());
        let two = Element::rational(2, 1);
        let zero = Element::rational(0, 1);
        assert_eq!(j.mass(&two, &zero), rat(1, 4));
        let r = theorem2_search(3, 2, 40, 1).unwrap();
        assert!(r.pass);
        assert_eq!(r.count("trials"), 40);
    }

    #[test]
    fn remark1_examples() {
        let f2 = RingSpec::prime_field(2).unwrap();
        let u = Dist::parse(&f2, "0:1/2,1:1/2").unwrap();
        let w = is_independent(&push_t(&u, &u).unwrap()).witness.unwrap();
        assert_eq!((w.joint, w.product), (rat(1, 2), rat(1, 4)));
        let f4 = RingSpec::extension_field(2, 2).unwrap();
        let t = degenerate(&f4, f(2)).unwrap();
        let z = degenerate(&f4, f(0)).unwrap();
        assert!(is_independent(&push_t(&t, &z).unwrap()).independent());
        assert!(remark1_verify(&f2, 20, 3).unwrap().pass);
        assert!(matches!(
            remark1_verify(&fp(3), 1, 1),
            Err(CharacterizeError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn remark2_examples() {
        for p in [3, 5, 7] {
            let r = remark2_counterexample(&fp(p)).unwrap();
            assert!(r.pass, "p = {p}");
        }
    }

    #[test]
    fn theorem3_examples() {
        assert!(theorem3_verify(3, 0, 3, 5, 2).unwrap().pass);
        assert!(theorem3_verify(3, 1, 3, 5, 2).unwrap().pass);
        assert!(matches!(
            theorem3_verify(3, 3, 3, 1, 1),
            Err(CharacterizeError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn remark3_examples() {
        let r = remark3_verify(0, 2).unwrap();
        assert!(r.pass);
        assert_eq!(r.evidence[0]["lhs"], "0/1");
        assert_eq!(r.evidence[0]["rhs"], "1/1");
        assert_eq!(r.evidence[1]["joint"], "1/4");
        assert_eq!(r.evidence[1]["product"], "1/8");
        let r = remark3_verify(1, 3).unwrap();
        assert!(r.pass);
        assert_eq!(r.evidence[0]["rhs"], "16/1");
        assert!(remark3_verify(0, 3).unwrap().pass);
    }

    #[test]
    fn padic_verifiers() {
        assert!(lemma3_verify(7, 8, 20, 5).unwrap().pass);
        assert!(lemma3_verify(2, 8, 20, 5).unwrap().pass);
        assert!(lemma4_verify(3, 4, 3, 5).unwrap().pass);
        assert!(eq12_verify(3, 3).unwrap().pass);
        assert!(lemma5_verify(3, 4, 2, 5).unwrap().pass);
    }

    #[test]
    fn reports_are_thread_independent() {
        let a = lemma1_verify(&fp(5), 30, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| lemma1_verify(&fp(5), 30, 9)).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
    }
}
