use std::collections::BTreeMap;

use charfield::algebra::{Element, RingSpec};
use charfield::characterize::{feq_check, lemma1_roundtrip, support_subgroup};
use charfield::measure::{
    classify, closed_form_sd, haar, is_independent, marginals, push_t, shift, Dist, StepDensity,
};
use charfield::padic::{
    agree, branch_table, padd, pdiv, pmul, psub, sqrt_hensel, sqrt_series, PAdic,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn odd_field(i: usize) -> RingSpec {
    match i % 4 {
        0 => RingSpec::prime_field(3).unwrap(),
        1 => RingSpec::prime_field(5).unwrap(),
        2 => RingSpec::prime_field(7).unwrap(),
        _ => RingSpec::extension_field(3, 2).unwrap(),
    }
}

/// A law from raw weights; index `i` of the carrier gets `w[i]`.
fn law(c: &RingSpec, w: &[u64], charge_zero: bool) -> Dist {
    let elems = c.enumerate().unwrap();
    let mut weights: BTreeMap<Element, u64> = elems
        .iter()
        .cloned()
        .zip(w.iter().copied())
        .filter(|(_, w)| *w > 0)
        .collect();
    if charge_zero || weights.is_empty() {
        *weights.entry(c.zero()).or_insert(0) += 1;
    }
    Dist::from_weights(c.clone(), weights).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(prop_oneof![3 => Just(0u64), 2 => 1u64..4], 9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn halving_inverts_doubling(fi in 0usize..4, code in 0u64..9, n in -50i64..50, d in 1i64..20) {
        let c = odd_field(fi);
        let a = c.enumerate().unwrap()[code as usize % c.enumerate().unwrap().len()].clone();
        let h = c.halve(&a).unwrap();
        prop_assert_eq!(c.add(&h, &h).unwrap(), a);
        let q = RingSpec::rationals();
        let r = Element::rational(n, d);
        let h = q.halve(&r).unwrap();
        prop_assert_eq!(q.add(&h, &h).unwrap(), r);
    }

    #[test]
    fn push_forward_conserves_mass(fi in 0usize..4, w in weights(), v in weights()) {
        let c = odd_field(fi);
        let (mu, nu) = (law(&c, &w, false), law(&c, &v, false));
        let j = push_t(&mu, &nu).unwrap();
        prop_assert!(j.total().is_one());
        let (s, d) = marginals(&j);
        let total = |x: &Dist| x.pmf().values().cloned().sum::<BigRational>();
        prop_assert!(total(&s).is_one() && total(&d).is_one());
    }

    #[test]
    fn closed_form_matches_push_forward(fi in 0usize..4, w in weights()) {
        let c = odd_field(fi);
        let mu = law(&c, &w, false);
        prop_assert_eq!(closed_form_sd(&mu).unwrap(), push_t(&mu, &mu).unwrap());
    }

    #[test]
    fn haar_shifts_are_independent(fi in 0usize..4, k in 0usize..16, x in 0usize..9) {
        let c = odd_field(fi);
        let subgroups = c.all_subgroups().unwrap();
        let elems = c.enumerate().unwrap();
        let mu = shift(&haar(&subgroups[k % subgroups.len()]).unwrap(), &elems[x % elems.len()]).unwrap();
        prop_assert!(classify(&mu).unwrap().is_idempotent());
        prop_assert!(is_independent(&push_t(&mu, &mu).unwrap()).independent());
    }

    #[test]
    fn independence_iff_functional_equation(fi in 0usize..4, w in weights()) {
        let c = odd_field(fi);
        let mu = law(&c, &w, true);
        let out = lemma1_roundtrip(&mu).unwrap();
        prop_assert!(out.agree());
        // solutions are exactly the idempotent laws charging 0
        prop_assert_eq!(out.independent, classify(&mu).unwrap().is_idempotent());
        if out.feq.pass() {
            let k = support_subgroup(mu.pmf(), &c).unwrap();
            prop_assert_eq!(k.elements(), &mu.support());
        }
    }

    #[test]
    fn feq_is_scale_invariant(fi in 0usize..4, w in weights(), s in 1i64..7) {
        let c = odd_field(fi);
        let mu = law(&c, &w, true);
        let scale = BigRational::from_integer(BigInt::from(s));
        let scaled = mu.pmf().iter().map(|(x, m)| (x.clone(), m * &scale)).collect();
        prop_assert_eq!(feq_check(mu.pmf(), &c).unwrap().pass(), feq_check(&scaled, &c).unwrap().pass());
    }

    #[test]
    fn dist_literal_round_trips(fi in 0usize..4, w in weights()) {
        let c = odd_field(fi);
        let mu = law(&c, &w, false);
        prop_assert_eq!(Dist::parse(&c, &mu.to_literal()).unwrap(), mu);
    }

    #[test]
    fn padic_ring_identities(
        pi in 0usize..4,
        a in -100_000i64..100_000,
        b in -100_000i64..100_000,
        num in 1i64..500,
        den in 1i64..500,
    ) {
        let p = [2u64, 3, 5, 7][pi];
        let prec = 8;
        let x = PAdic::from_int(p, a, prec).unwrap();
        let y = PAdic::from_rational(p, &BigRational::new(BigInt::from(num), BigInt::from(den)), prec).unwrap();
        let s = padd(&x, &y).unwrap();
        prop_assert!(agree(&psub(&s, &y).unwrap(), &x).unwrap());
        let prod = pmul(&x, &y).unwrap();
        if !x.is_zero() {
            prop_assert!(agree(&pdiv(&prod, &x).unwrap(), &y).unwrap());
        }
        prop_assert_eq!(prod.valuation().zip(x.valuation()).map(|(v, w)| v - w), y.valuation().filter(|_| !x.is_zero()));
        let z = PAdic::from_int(p, b, prec).unwrap();
        prop_assert!(agree(&padd(&x, &z).unwrap(), &padd(&z, &x).unwrap()).unwrap());
    }

    #[test]
    fn canonical_root_of_odd_squares(
        pi in 0usize..3,
        l in -2i64..=2,
        seed in prop::collection::vec(0u64..1000, 8),
    ) {
        let p = [3u64, 5, 7][pi];
        let mut d: Vec<u64> = seed.iter().map(|s| s % p).collect();
        d[0] = 1 + seed[0] % (p - 1);
        let w = PAdic::from_digits(p, 0, &d).unwrap();
        let x = pmul(&w, &w).unwrap().shift(2 * l);
        let table = branch_table(p).unwrap();
        let r = sqrt_hensel(&x, &table).unwrap();
        prop_assert!(agree(&pmul(&r, &r).unwrap(), &x).unwrap());
        prop_assert_eq!(r.valuation(), Some(l));
        prop_assert!(table.selects(r.unit_residue().unwrap()));
        prop_assert!(agree(&r, &sqrt_series(&x, &table).unwrap()).unwrap());
        prop_assert_eq!(sqrt_hensel(&x.shift(2), &table).unwrap(), r.shift(1));
        // the root is w or -w
        let neg = psub(&PAdic::zero(p, 20).unwrap(), &w.shift(l)).unwrap();
        prop_assert!(agree(&r, &w.shift(l)).unwrap() || agree(&r, &neg).unwrap());
    }

    #[test]
    fn squaring_is_well_defined_on_residues(
        pi in 0usize..3,
        n in 1u32..5,
        x in 0u64..10_000,
        lift in 0u64..10_000,
    ) {
        let p = [3u64, 5, 7][pi];
        let m = p.pow(n);
        let (x, y) = (x % m, x % m + m * lift);
        let sq = |v: u64| {
            let a = PAdic::from_int(p, v as i64, 2 * n + 8).unwrap();
            pmul(&a, &a).unwrap().residue_u64(n).unwrap()
        };
        prop_assert_eq!(sq(x), sq(y));
        prop_assert_eq!(sq(x), x * x % m);
    }

    #[test]
    fn step_density_json_round_trips(pi in 0usize..2, m in 0u32..3, extra in 0u32..2) {
        let p = [3u64, 5][pi];
        let rho = StepDensity::haar(p, m, m + 1 + extra).unwrap();
        prop_assert_eq!(StepDensity::from_json(&rho.to_json()).unwrap(), rho.clone());
        let mass: BigRational = rho.to_pmf().unwrap().pmf().values().cloned().sum();
        prop_assert!(mass.is_one());
    }
}
