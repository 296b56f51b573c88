//! Acceptance suite: every criterion runs at its stated tolerance and
//! prints one pass/fail line.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use sadic::balance::{incidence, perron};
use sadic::complexity::{
    calibrate_c, limsup_estimate, predicted_increment, sample_language, special_length_complexity,
};
use sadic::fixtures::{example_1_2, example_1_3, example_1_4, repeated_tau};
use sadic::mef::{factor_orbit_check, mef};
use sadic::rat::{rational_to_f64, RatInterval};
use sadic::realize::{realize, verify_realization, ExpTarget, OdoSpec, TargetSpec};
use sadic::spectrum::{
    alpha_enclosure, alpha_k_enclosure, convergents, eigenvalue_offsets, gcd_chain,
    group_exponents, valuation, Exponent,
};
use sadic::structure::{check_constraints, derive_ab, dvu_bound, mean_ap_report};
use sadic::word::{build_tau, expand_level, hamming_concat, SadicSystem, TauParams, TauSource};
use std::collections::BTreeMap;
use std::time::Instant;

const BUDGET: usize = 1 << 26;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn fixtures_with_names() -> Vec<(&'static str, SadicSystem)> {
    vec![
        ("example 1.2", example_1_2()),
        ("example 1.3", example_1_3()),
        ("tau(2,3,0)", repeated_tau(2, 3, 0)),
        ("tau(4,5,0)", repeated_tau(4, 5, 0)),
    ]
}

/// Bisection enclosure of the positive root of x^2 + 3x - 2 (= sqrt17 - 3 over 2).
fn quadratic_tail_root(iterations: usize) -> RatInterval {
    let mut lo = BigRational::zero();
    let mut hi = BigRational::one();
    let three = BigRational::from_integer(3.into());
    let two = BigRational::from_integer(2.into());
    for _ in 0..iterations {
        let mid = (&lo + &hi) / &two;
        if &mid * &mid + &three * &mid - &two < BigRational::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RatInterval::new(lo, hi)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let sys = example_1_2();
    let mut ok = true;
    let mut notes = Vec::new();

    // Perron enclosure of [[2,4],[1,1]] contains (3 + sqrt17)/2 within 1e-9.
    let m = incidence(&build_tau(&sys.tau(0).unwrap()).unwrap(), 2);
    let tol = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(10));
    let iv = perron(&m, &tol).unwrap();
    // Oracle: x = (3 + sqrt17)/2 solves x^2 - 3x - 2 = 0; bisect.
    let mut lo = BigRational::from_integer(3.into());
    let mut hi = BigRational::from_integer(4.into());
    for _ in 0..80 {
        let mid = (&lo + &hi) / BigRational::from_integer(2.into());
        if &mid * &mid - BigRational::from_integer(3.into()) * &mid
            - BigRational::from_integer(2.into())
            < BigRational::zero()
        {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let oracle = RatInterval::new(lo, hi);
    let eps = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(9));
    let close = iv.intersects(&oracle) && iv.width() < eps;
    ok &= close;
    notes.push(format!("perron {} (width {:.2e})", if close { "ok" } else { "BAD" }, rational_to_f64(&iv.width())));

    // limsup at K = 12 within 1e-3 of (105 + sqrt17)/86.
    let sample = sample_language(&sys, 60, BUDGET).unwrap();
    let c = calibrate_c(&sys, &sample).unwrap();
    let limsup = limsup_estimate(&sys, 12, &c).unwrap();
    let est = rational_to_f64(&limsup.limit_estimate);
    let target = (105.0 + 17f64.sqrt()) / 86.0;
    let limsup_ok = (est - target).abs() < 1e-3;
    ok &= limsup_ok;
    notes.push(format!("limsup {est:.6} vs {target:.6}"));

    // gcd(|v_k|, |v_{k+1}|) = 1 for k <= 20.
    let chain = gcd_chain(&sys, 20).unwrap();
    let gcd_ok = chain.iter().all(BigUint::is_one);
    ok &= gcd_ok;
    notes.push(format!("gcd chain {}", if gcd_ok { "ok" } else { "BAD" }));

    let elapsed = start.elapsed();
    ok &= elapsed.as_secs_f64() < 10.0;
    notes.push(format!("{:.2}s", elapsed.as_secs_f64()));
    Outcome {
        name: "1: example 1.2 golden values",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_2() -> Outcome {
    let sys = example_1_3();
    let seqs = derive_ab(&sys, 21).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();

    let a_ok = (1..=20).all(|k| seqs.a[k] == BigUint::from(4u32));
    ok &= a_ok;
    notes.push(format!("a_k = 4 {}", if a_ok { "ok" } else { "BAD" }));

    // Exact gcd laws for k <= 20: gcd(|v_k|, |u_k|) = 2^k, and the v/v
    // gcd has 2-valuation 2 ceil(k/2) (k >= 1).
    let mut uv_ok = true;
    let mut vv_ok = true;
    for k in 0..=20usize {
        if seqs.v_lens[k].gcd(&seqs.u_lens[k]) != (BigUint::one() << k) {
            uv_ok = false;
        }
        let g = seqs.v_lens[k].gcd(&seqs.v_lens[k + 1]);
        let expect = if k == 0 { 0 } else { 2 * k.div_ceil(2) };
        if g != (BigUint::one() << expect) {
            vv_ok = false;
        }
    }
    ok &= uv_ok && vv_ok;
    notes.push(format!(
        "gcd(|v_k|,|u_k|) = 2^k {}; v/v chain = 2^(2 ceil(k/2)) {}",
        if uv_ok { "ok" } else { "BAD" },
        if vv_ok { "ok" } else { "BAD" }
    ));

    let d = mef(&sys, 25).unwrap();
    let binary = !d.odometer.finite
        && d.odometer
            .moduli
            .iter()
            .all(|m| m == &(BigUint::one() << valuation(m, 2) as usize))
        && valuation(d.odometer.moduli.last().unwrap(), 2) >= 20;
    let l_inf = d.nilmanifold.exponents.get(&2) == Some(&Exponent::Infinite);
    ok &= binary && l_inf;
    notes.push(format!(
        "mef binary odometer {} x L(2)=inf {}",
        if binary { "ok" } else { "BAD" },
        if l_inf { "ok" } else { "BAD" }
    ));

    Outcome {
        name: "2: example 1.3 exact big-integer checks",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_3() -> Outcome {
    let sys = example_1_4();
    let mut ok = true;
    let mut notes = Vec::new();

    let rule_ok = sys.tau(0).unwrap() == TauParams::from_u64(5, 7, 0).unwrap()
        && sys.tau(1).unwrap() == TauParams::from_u64(3, 5, 0).unwrap();
    ok &= rule_ok;
    notes.push(format!("rule rho_0 = omega_2, rho_1 = omega_1 {}", if rule_ok { "ok" } else { "BAD" }));

    let chain = gcd_chain(&sys, 15).unwrap();
    let chain_ok = chain
        .iter()
        .enumerate()
        .all(|(k, g)| *g == (BigUint::one() << k));
    ok &= chain_ok;
    notes.push(format!("gcd = 2^k for k <= 15 {}", if chain_ok { "ok" } else { "BAD" }));

    let maps = group_exponents(&sys, 20).unwrap();
    let l_ok = maps.l.is_empty();
    ok &= l_ok;
    notes.push(format!("L identically 0 {}", if l_ok { "ok" } else { "BAD" }));

    Outcome {
        name: "3: example 1.4 rule-driven system",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, sys) in fixtures_with_names() {
        let sample = sample_language(&sys, 201, BUDGET).unwrap();
        // Increments: formula vs brute force for every applicable q <= 200.
        let mut inc_ok = true;
        for q in 1..=199usize {
            let brute = sample.p(q + 1) - sample.p(q);
            let pred = predicted_increment(&sys, &BigUint::from(q)).unwrap();
            if pred != BigUint::from(brute) {
                inc_ok = false;
                notes.push(format!("{name}: increment mismatch at q = {q}"));
                break;
            }
        }
        ok &= inc_ok;
        // Special lengths <= 200: formula vs brute force.
        let c = calibrate_c(&sys, &sample).unwrap();
        let mut checked = 0usize;
        for k in 0..6usize {
            let sl = special_length_complexity(&sys, k, &c).unwrap();
            let mut targets = vec![sl.main.clone()];
            if let Some(rc) = sl.r_case {
                targets.push(rc);
            }
            for (q, p) in targets {
                if let Some(qu) = q.to_usize() {
                    if qu <= 200 && qu >= 1 {
                        checked += 1;
                        if BigInt::from(sample.p(qu)) != p {
                            ok = false;
                            notes.push(format!("{name}: special length {qu} mismatch"));
                        }
                    }
                }
            }
        }
        if inc_ok {
            notes.push(format!("{name}: increments + {checked} special lengths ok"));
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    ok &= elapsed < 60.0;
    notes.push(format!("{elapsed:.1}s"));
    Outcome {
        name: "4: complexity oracle equivalence (q <= 200)",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let mut all: Vec<(&'static str, SadicSystem)> = fixtures_with_names();
    all.push(("example 1.4", example_1_4()));

    for (name, sys) in &all {
        // Determinant identity to depth 30 (asserted inside convergents).
        for k0 in [0usize, 1, 3] {
            let _ = convergents(sys, k0, 30).unwrap();
        }
        // Beta-product identity at depth 30.
        let seqs = derive_ab(sys, 30).unwrap();
        let mut anum = BigUint::one();
        for k in 1..=30usize {
            anum *= &seqs.a[k];
            let expect = BigRational::new(
                BigInt::from(&anum * &seqs.v_lens[0]),
                BigInt::from(seqs.v_lens[k].clone()),
            );
            if seqs.beta_products[k - 1] != expect {
                ok = false;
                notes.push(format!("{name}: beta product mismatch at {k}"));
            }
        }
        // gcd divisibility chains, both directions, depth 30.
        let mut aprod = seqs.v_lens[0].clone();
        let mut prev_g: Option<BigUint> = None;
        let mut prev_q: Option<BigUint> = None;
        for k in 0..30usize {
            aprod *= &seqs.a[k];
            let g = seqs.v_lens[k].gcd(&seqs.v_lens[k + 1]);
            if !(&aprod % &g).is_zero() {
                ok = false;
                notes.push(format!("{name}: gcd does not divide a-product at {k}"));
            }
            let quot = &aprod / &g;
            if let (Some(pg), Some(pq)) = (&prev_g, &prev_q) {
                if !(&g % pg).is_zero() || !(&quot % pq).is_zero() {
                    ok = false;
                    notes.push(format!("{name}: divisibility chain broke at {k}"));
                }
            }
            prev_g = Some(g);
            prev_q = Some(quot);
        }
    }
    notes.push("determinant, beta-product, gcd chains at depth 30 ok".into());

    // Hamming bound for k <= 8 on materialized words. The strict bound
    // assumes the canonical-seed hypothesis |v_0| < |u_0|; the identity
    // seeds violate it (d = 2|u_0| exactly at k = 0, propagating when
    // n - m = 1), so strictness is checked on each fixture's detected
    // canonical seed and the naive systems get the non-strict bound.
    for (name, sys) in &all {
        for k in 0..=8usize {
            let (v, u) = match expand_level(sys, k, BUDGET) {
                Ok(x) => x,
                Err(_) => break,
            };
            let d = BigUint::from(hamming_concat(&v, &u, &u, &v).unwrap());
            let bound = dvu_bound(sys, k).unwrap();
            if d > bound {
                ok = false;
                notes.push(format!("{name}: non-strict Hamming bound failed at k = {k}"));
            }
        }
    }
    for (name, sys) in fixtures_with_names() {
        let sample = sample_language(&sys, 40, BUDGET).unwrap();
        let prefix = sadic::word::expand_prefix(&sys, 20_000).unwrap();
        let (seed, params) = sadic::complexity::infer_system(&sample, &prefix, 4).unwrap();
        let canonical = sadic::complexity::system_from_seed(
            &seed.v,
            &seed.u,
            params,
            sadic::word::Alphabet::binary(),
        )
        .unwrap();
        if canonical.v0().len() >= canonical.u0().len() {
            ok = false;
            notes.push(format!("{name}: canonical seed not length-increasing"));
            continue;
        }
        for k in 0..=8usize {
            let (v, u) = match expand_level(&canonical, k, BUDGET) {
                Ok(x) => x,
                Err(_) => break,
            };
            let d = BigUint::from(hamming_concat(&v, &u, &u, &v).unwrap());
            let bound = dvu_bound(&canonical, k).unwrap();
            if d >= bound {
                ok = false;
                notes.push(format!("{name}: strict Hamming bound failed at k = {k} on the canonical seed"));
            }
        }
    }
    notes.push("Hamming bound: non-strict on naive seeds, strict on canonical seeds, k <= 8".into());

    Outcome {
        name: "5: exact identities at depth 30",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_6() -> Outcome {
    let sys = example_1_2();
    let iv = alpha_enclosure(&sys, 25).unwrap();
    // alpha = root/2 where root solves x^2 + 3x - 2 = 0.
    let root = quadratic_tail_root(220);
    let two = BigRational::from_integer(2.into());
    let oracle = RatInterval::new(root.lo / &two, root.hi / &two);
    let eps = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(15));
    let width_ok = iv.width() < eps;
    // The oracle interval is far narrower; containment of its midpoint is
    // the literal reading of "contains (sqrt17 - 3)/4".
    let contains = iv.contains(&oracle.midpoint());
    Outcome {
        name: "6: alpha enclosure at K = 25",
        pass: width_ok && contains,
        detail: format!(
            "width {:.2e} (< 1e-15 {}), contains (sqrt17-3)/4 {}",
            rational_to_f64(&iv.width()),
            if width_ok { "ok" } else { "BAD" },
            if contains { "ok" } else { "BAD" }
        ),
    }
}

fn criterion_7() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, sys) in fixtures_with_names() {
        let offsets = eigenvalue_offsets(&sys, 15).unwrap();
        // Use a deep alpha so the mapped interval is far narrower than the
        // target enclosure; then interval containment is meaningful.
        let alpha = alpha_enclosure(&sys, 60).unwrap();
        let mut fixture_ok = true;
        for o in &offsets {
            let image = alpha.scale(&o.q).shift(&o.rho);
            let target = alpha_k_enclosure(&sys, o.k + 1, 20).unwrap();
            if !target.contains_interval(&image) {
                fixture_ok = false;
                notes.push(format!("{name}: offset k = {} not contained", o.k));
            }
        }
        ok &= fixture_ok;
    }
    if ok {
        notes.push("q_k alpha + rho_k inside alpha_(k+1) enclosure, k <= 15, all fixtures".into());
    }
    Outcome {
        name: "7: offset consistency",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_8() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let tol = BigRational::new(1.into(), 20.into());

    let mut nil_a = BTreeMap::new();
    nil_a.insert(2u64, ExpTarget::Inf);
    let targets = vec![
        (
            "binary odometer x S^1, delta 1/4",
            TargetSpec {
                odometer: OdoSpec::Repeat(vec![2]),
                nil_exponents: BTreeMap::new(),
                delta: BigRational::new(1.into(), 4.into()),
            },
        ),
        (
            "trivial odometer x M_2, delta 1/4",
            TargetSpec {
                odometer: OdoSpec::trivial(),
                nil_exponents: nil_a,
                delta: BigRational::new(1.into(), 4.into()),
            },
        ),
        (
            "Z/3 x S^1, delta 0",
            TargetSpec {
                odometer: OdoSpec::Finite(vec![3]),
                nil_exponents: BTreeMap::new(),
                delta: BigRational::zero(),
            },
        ),
    ];

    let mut first_system = None;
    for (name, target) in &targets {
        match realize(target, 8) {
            Ok((sys, log)) => match verify_realization(&sys, &log, target, 8, &tol) {
                Ok(rep) => {
                    for c in &rep.checks {
                        if !c.pass {
                            ok = false;
                            notes.push(format!("{name}: {} failed ({})", c.name, c.detail));
                        }
                    }
                    if rep.pass {
                        notes.push(format!("{name}: 4/4 checks"));
                    }
                    if first_system.is_none() {
                        first_system = Some((sys, log, target.clone()));
                    }
                }
                Err(e) => {
                    ok = false;
                    notes.push(format!("{name}: verify error {e}"));
                }
            },
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: realize error {e}"));
            }
        }
    }

    // Negative control: perturb one n_k.
    if let Some((sys, log, target)) = first_system {
        let mut list = match sys.tau_source() {
            TauSource::Explicit { list, .. } => list.clone(),
            _ => unreachable!(),
        };
        let t = &list[4];
        list[4] = TauParams::new(t.m().clone(), t.n() + 1u32, t.r().clone()).unwrap();
        let corrupted = SadicSystem::new(
            sys.pi().clone(),
            TauSource::Explicit {
                list,
                repeat_last: false,
            },
            sys.alphabet().clone(),
        )
        .unwrap();
        match verify_realization(&corrupted, &log, &target, 8, &tol) {
            Ok(rep) => {
                if rep.pass {
                    ok = false;
                    notes.push("negative control passed (should fail)".into());
                } else {
                    notes.push("negative control fails as expected".into());
                }
            }
            Err(_) => notes.push("negative control errors out (counts as failing)".into()),
        }
    }

    Outcome {
        name: "8: realizer end-to-end",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, sys) in fixtures_with_names() {
        let sample = sample_language(&sys, 201, BUDGET).unwrap();
        let mh = (1..=200usize).all(|q| sample.p(q) >= q + 1);
        if !mh {
            ok = false;
            notes.push(format!("{name}: Morse-Hedlund floor violated"));
        }
    }
    notes.push("p(q) >= q + 1 for q <= 200 on all aperiodic fixtures".into());

    let rep = check_constraints(&repeated_tau(1, 3, 0), 10).unwrap();
    if rep.pass {
        ok = false;
        notes.push("tau(1,3,0) not flagged".into());
    } else {
        notes.push("tau(1,3,0) flagged".into());
    }
    let rep = check_constraints(&repeated_tau(7, 9, 1), 10).unwrap();
    if !rep.pass {
        ok = false;
        notes.push("tau(7,9,1) spuriously flagged".into());
    } else {
        notes.push("tau(7,9,1) passes".into());
    }

    Outcome {
        name: "9: Morse-Hedlund and constraint sanity",
        pass: ok,
        detail: notes.join("; "),
    }
}

fn criterion_10() -> Outcome {
    let sys = example_1_2();
    let mut ok = true;
    let mut notes = Vec::new();

    for k in 0..=5usize {
        let rep = mean_ap_report(&sys, k, 100_000).unwrap();
        if !rep.within {
            ok = false;
            notes.push(format!(
                "mean-ap density {} above bound {} at k = {k}",
                rep.density, rep.bound
            ));
        }
    }
    notes.push("mean-ap densities below the proof bound for k <= 5".into());

    let rep = factor_orbit_check(&sys, 1, 100_000, 6).unwrap();
    if !rep.pass || !rep.boundary_cross_check_ok {
        ok = false;
        notes.push("orbit check failed".into());
    } else {
        let transitions: usize = rep.levels.iter().map(|l| l.transitions).sum();
        notes.push(format!(
            "orbit check: {transitions} transitions decompose, Cauchy bounds hold"
        ));
    }

    Outcome {
        name: "10: discrete-spectrum property substitutes",
        pass: ok,
        detail: notes.join("; "),
    }
}

#[test]
fn acceptance() {
    let criteria: Vec<fn() -> Outcome> = vec![
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut all = true;
    for c in criteria {
        let outcome = c();
        println!(
            "criterion {}: {} — {}",
            outcome.name,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
        all &= outcome.pass;
    }
    assert!(all, "one or more acceptance criteria failed");
}
