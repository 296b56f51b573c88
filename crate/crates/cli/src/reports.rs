//! Report assembly: JSON/CSV bodies for each subcommand and the golden
//! example suite. Rationals serialize as "num/den" strings; maps are sorted
//! so output is byte-identical across runs.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use sadic::balance::{balance_series, empirical_balance, incidence, letter_frequency, perron};
use sadic::complexity::{
    calibrate_c, complexity_table, limsup_estimate, sample_language,
};
use sadic::mef::{compare_eigenvalue_groups, mef, GroupComparison};
use sadic::rat::{rational_to_f64, rational_to_string, RatInterval};
use sadic::realize::{realize, verify_realization, TargetSpec};
use sadic::spectrum::{eigenvalue_group, gcd_chain, group_exponents, Exponent};
use sadic::structure::{check_constraints, decay_report, derive_ab, mean_ap_report, CaseResult};
use sadic::word::{expand_prefix, words_uk_vk, SadicSystem, TauSource};
use sadic::Result;
use serde_json::{json, Value};

fn interval_json(iv: &RatInterval) -> Value {
    json!([rational_to_string(&iv.lo), rational_to_string(&iv.hi)])
}

fn exponent_json(e: &Exponent) -> Value {
    match e {
        Exponent::Finite(x) => json!(x),
        Exponent::Infinite => json!("inf"),
        Exponent::Growing(x) => json!(format!("growing({x})")),
    }
}

pub fn gen_report(
    sys: &SadicSystem,
    depth: usize,
    prefix_len: usize,
    budget: usize,
    schema: &str,
) -> Result<String> {
    let (v, u) = words_uk_vk(sys, depth, budget.min(1 << 16))?;
    let alphabet = sys.alphabet();
    let lens = sys.length_pairs(depth)?;
    let prefix = expand_prefix(sys, prefix_len.min(budget))?;
    let word_json = |w: &sadic::word::MaybeWord| match w.word() {
        Some(word) => json!({ "word": alphabet.render(word), "len": w.len().to_string() }),
        None => json!({ "len": w.len().to_string() }),
    };
    let report = json!({
        "schema": schema,
        "command": "gen",
        "depth": depth,
        "v_k": word_json(&v),
        "u_k": word_json(&u),
        "lengths": lens.iter().map(|(a, b)| json!([a.to_string(), b.to_string()])).collect::<Vec<_>>(),
        "prefix": alphabet.render(&prefix),
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

pub fn complexity_csv(sys: &SadicSystem, q_max: usize, budget: usize) -> Result<String> {
    let sample = sample_language(sys, q_max, budget)?;
    let rows = complexity_table(sys, &sample, q_max)?;
    let mut out = String::from("q,p,predicted_increment,brute_increment\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.q,
            r.p,
            r.predicted_increment
                .map(|x| x.to_string())
                .unwrap_or_else(|| "-".into()),
            r.brute_increment
        ));
    }
    Ok(out)
}

pub fn complexity_json(
    sys: &SadicSystem,
    q_max: usize,
    budget: usize,
    schema: &str,
) -> Result<String> {
    let sample = sample_language(sys, q_max, budget)?;
    let rows = complexity_table(sys, &sample, q_max)?;
    let all_match = rows.iter().all(|r| {
        r.predicted_increment
            .as_ref()
            .map(|p| *p == BigUint::from(r.brute_increment))
            .unwrap_or(true)
    });
    let c = calibrate_c(sys, &sample)?;
    let limsup = limsup_estimate(sys, 12, &c)?;
    let report = json!({
        "schema": schema,
        "command": "complexity",
        "q_max": q_max,
        "stabilized": sample.stabilized,
        "source_depth": sample.source_depth,
        "calibrated_c": c.to_string(),
        "formula_matches_brute_force": all_match,
        "limsup_estimate": rational_to_string(&limsup.limit_estimate),
        "limsup_estimate_f64": rational_to_f64(&limsup.limit_estimate),
        "rows": rows.iter().map(|r| json!({
            "q": r.q,
            "p": r.p,
            "predicted_increment": r.predicted_increment.as_ref().map(|x| x.to_string()),
            "brute_increment": r.brute_increment,
        })).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

fn case_json(c: &CaseResult) -> Value {
    match c {
        CaseResult::NotApplicable => json!("n/a"),
        CaseResult::Pass(l) => json!({ "pass": l }),
        CaseResult::Violation(l) => json!({ "violation": l }),
        CaseResult::Unchecked(l) => json!({ "unchecked": l }),
    }
}

pub fn structure_report(
    sys: &SadicSystem,
    depth: usize,
    _q_max: usize,
    _budget: usize,
    schema: &str,
) -> Result<(String, bool)> {
    let seqs = derive_ab(sys, depth)?;
    let constraints = check_constraints(sys, depth)?;
    let decay = decay_report(&seqs);
    let mean_ap = if seqs.v_lens[depth.min(4)].to_usize().map(|x| x < 20_000).unwrap_or(false) {
        mean_ap_report(sys, 3.min(depth.saturating_sub(1)), 100_000).ok()
    } else {
        None
    };
    let report = json!({
        "schema": schema,
        "command": "structure",
        "depth": depth,
        "a": seqs.a.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "b": seqs.b.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "v_lengths": seqs.v_lens.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "betas": seqs.betas.iter().map(rational_to_string).collect::<Vec<_>>(),
        "constraints_pass": constraints.pass,
        "verdicts": constraints.verdicts.iter().map(|v| json!({
            "k": v.k,
            "svp": case_json(&v.svp),
            "rk": case_json(&v.rk),
            "a2": case_json(&v.a2),
        })).collect::<Vec<_>>(),
        "decay": {
            "kappa_fit": decay.kappa_fit,
            "summable": decay.summable,
            "eps_ratios": decay.eps_ratios,
        },
        "mean_almost_periodicity": mean_ap.map(|m| json!({
            "level": m.level,
            "prefix_len": m.prefix_len,
            "density": rational_to_string(&m.density),
            "bound": rational_to_string(&m.bound),
            "within": m.within,
        })),
    });
    let pass = constraints.pass;
    Ok((serde_json::to_string_pretty(&report).unwrap(), pass))
}

pub fn spectrum_report(sys: &SadicSystem, depth: usize, schema: &str) -> Result<String> {
    let desc = eigenvalue_group(sys, depth)?;
    let map_json = |m: &std::collections::BTreeMap<u64, Exponent>| {
        m.iter()
            .map(|(p, e)| json!([p, exponent_json(e)]))
            .collect::<Vec<_>>()
    };
    let report = json!({
        "schema": schema,
        "command": "spectrum",
        "depth": depth,
        "alpha": interval_json(&desc.alpha),
        "alpha_f64": desc.alpha.to_f64(),
        "periodic_certified": desc.exponents.periodic_certified,
        "L": map_json(&desc.exponents.l),
        "R": map_json(&desc.exponents.r),
        "offsets": desc.offsets.iter().map(|o| json!({
            "k": o.k,
            "q": rational_to_string(&o.q),
            "rho": rational_to_string(&o.rho),
        })).collect::<Vec<_>>(),
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

pub fn mef_report(sys: &SadicSystem, depth: usize, schema: &str) -> Result<String> {
    let d = mef(sys, depth)?;
    let mut odometer: Vec<Value> = d
        .odometer
        .moduli
        .iter()
        .map(|m| json!(m.to_string()))
        .collect();
    odometer.push(json!(if d.odometer.finite { "periodic" } else { "truncated" }));
    let report = json!({
        "schema": schema,
        "command": "mef",
        "odometer": odometer,
        "nilmanifold": {
            "exponents": d.nilmanifold.exponents.iter()
                .map(|(p, e)| json!([p, exponent_json(e)])).collect::<Vec<_>>(),
            "alpha": interval_json(&d.nilmanifold.alpha),
        },
        "depth": d.depth,
        "certified": d.certified,
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

pub fn balance_report(
    sys: &SadicSystem,
    depth: usize,
    q_max: usize,
    _budget: usize,
    schema: &str,
) -> Result<String> {
    let series = balance_series(sys, depth.min(24))?;
    let freq = letter_frequency(sys, depth.min(30))?;
    let window = q_max.max(64);
    let empirical = empirical_balance(
        sys,
        &sadic::word::Word::new(vec![1]),
        window,
        (window * 40).max(50_000),
    )?;
    let report = json!({
        "schema": schema,
        "command": "balance",
        "alpha_star": interval_json(&freq.alpha_star),
        "alpha_star_f64": freq.alpha_star.to_f64(),
        "terms": series.terms.iter().map(|t| json!({
            "k": t.k,
            "term_hi": rational_to_string(&t.term.hi),
            "bound_8c_eps": rational_to_string(&t.bound),
            "within": t.within,
        })).collect::<Vec<_>>(),
        "det_identity_ok": series.det_identity_ok,
        "all_within": series.all_within,
        "empirical": {
            "window": empirical.window,
            "prefix_len": empirical.prefix_len,
            "max_count": empirical.max_count,
            "min_count": empirical.min_count,
            "discrepancy": empirical.discrepancy(),
        },
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

pub fn dimension_report(sys: &SadicSystem, depth: usize, schema: &str) -> Result<String> {
    let desc = sadic::balance::dimension_group(sys, depth)?;
    let comparisons: Vec<Value> = ["1.2", "1.3", "1.4"]
        .iter()
        .map(|name| {
            let other = sadic::fixtures::by_name(name).unwrap();
            let other_desc = eigenvalue_group(&other, depth.min(25)).unwrap();
            let verdict = match compare_eigenvalue_groups(&desc.eigen, &other_desc) {
                GroupComparison::Equal => "equal".to_string(),
                GroupComparison::Different(r) => format!("different ({r})"),
                GroupComparison::UnknownAtDepth => "unknown-at-depth".to_string(),
            };
            json!({ "against": name, "verdict": verdict })
        })
        .collect();
    let report = json!({
        "schema": schema,
        "command": "dimension",
        "unit": "1",
        "positive_cone": "E_X intersect R+",
        "alpha": interval_json(&desc.eigen.alpha),
        "L": desc.eigen.exponents.l.iter().map(|(p, e)| json!([p, exponent_json(e)])).collect::<Vec<_>>(),
        "R": desc.eigen.exponents.r.iter().map(|(p, e)| json!([p, exponent_json(e)])).collect::<Vec<_>>(),
        "comparisons": comparisons,
    });
    Ok(serde_json::to_string_pretty(&report).unwrap())
}

pub fn realize_report(
    target: &TargetSpec,
    stages: usize,
    depth: usize,
    tol: &BigRational,
    schema: &str,
) -> Result<(String, bool)> {
    let (sys, log) = realize(target, stages)?;
    let report = verify_realization(&sys, &log, target, depth, tol)?;
    let taus: Vec<Value> = match sys.tau_source() {
        TauSource::Explicit { list, .. } => list
            .iter()
            .map(|t| json!([t.m().to_string(), t.n().to_string(), t.r().to_string()]))
            .collect(),
        _ => unreachable!("realize emits explicit parameter lists"),
    };
    let alphabet = sys.alphabet();
    let body = json!({
        "schema": schema,
        "command": "realize",
        "regime": format!("{:?}", log.regime),
        "pi": [alphabet.render(sys.v0()), alphabet.render(sys.u0())],
        "taus": taus,
        "expected_gcds": log.expected_gcds.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "pass": c.pass,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
        "pass": report.pass,
    });
    Ok((serde_json::to_string_pretty(&body).unwrap(), report.pass))
}

struct Golden {
    lines: Vec<String>,
    pass: bool,
}

impl Golden {
    fn new() -> Self {
        Golden {
            lines: Vec::new(),
            pass: true,
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.pass &= ok;
        self.lines
            .push(format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" }));
    }
}

/// The golden suite over the builtin examples.
pub fn verify_examples(which: Option<&str>, depth: usize, budget: usize) -> Result<(String, bool)> {
    let mut g = Golden::new();
    let run_12 = which.map(|w| w == "1.2").unwrap_or(true);
    let run_13 = which.map(|w| w == "1.3").unwrap_or(true);
    let run_14 = which.map(|w| w == "1.4").unwrap_or(true);
    let depth = depth.max(12);

    if run_12 {
        let sys = sadic::fixtures::example_1_2();
        // Perron enclosure of [[2,4],[1,1]] around (3 + sqrt 17)/2.
        let m = incidence(&sadic::word::build_tau(&sys.tau(0)?)?, 2);
        let tol = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(10));
        let iv = perron(&m, &tol)?;
        let target = (3.0 + 17f64.sqrt()) / 2.0;
        g.check(
            "1.2 perron",
            (iv.to_f64() - target).abs() < 1e-9,
            format!("enclosure midpoint {:.12} vs (3+sqrt17)/2 = {target:.12}", iv.to_f64()),
        );
        // limsup at K = 12 within 1e-3 of (105 + sqrt 17)/86.
        let sample = sample_language(&sys, 60, budget)?;
        let c = calibrate_c(&sys, &sample)?;
        let limsup = limsup_estimate(&sys, 12, &c)?;
        let est = rational_to_f64(&limsup.limit_estimate);
        let target = (105.0 + 17f64.sqrt()) / 86.0;
        g.check(
            "1.2 limsup",
            (est - target).abs() < 1e-3,
            format!("estimate {est:.6} vs (105+sqrt17)/86 = {target:.6}"),
        );
        // gcd(|v_k|, |v_{k+1}|) = 1 for k <= 20.
        let chain = gcd_chain(&sys, 20)?;
        g.check(
            "1.2 gcd chain",
            chain.iter().all(BigUint::is_one),
            "gcd(|v_k|, |v_k+1|) = 1 for k <= 20".into(),
        );
        let maps = group_exponents(&sys, depth.max(25))?;
        g.check(
            "1.2 exponents",
            maps.l_of(2) == Exponent::Infinite && maps.r.is_empty(),
            format!("L = {:?}, R = {:?}", maps.l, maps.r),
        );
    }

    if run_13 {
        let sys = sadic::fixtures::example_1_3();
        let seqs = derive_ab(&sys, 21)?;
        let a_ok = (1..=20).all(|k| seqs.a[k] == BigUint::from(4u32));
        g.check("1.3 a_k", a_ok, "a_k = 4 for 1 <= k <= 20".into());
        // gcd(|v_k|, |u_k|) = 2^k exactly; the v/v gcd valuations are
        // 2 ceil(k/2) (both checked as exact big-integer laws).
        let mut uv_ok = true;
        let mut vv_ok = true;
        for k in 0..=20usize {
            let gu = num_integer::Integer::gcd(&seqs.v_lens[k], &seqs.u_lens[k]);
            if gu != (BigUint::one() << k) {
                uv_ok = false;
            }
            let gv = num_integer::Integer::gcd(&seqs.v_lens[k], &seqs.v_lens[k + 1]);
            let expect = if k == 0 { 0 } else { 2 * k.div_ceil(2) };
            if gv != (BigUint::one() << expect) {
                vv_ok = false;
            }
        }
        g.check("1.3 gcd(|v_k|,|u_k|) = 2^k", uv_ok, "exact for k <= 20".into());
        g.check(
            "1.3 gcd(|v_k|,|v_k+1|) = 2^(2 ceil(k/2))",
            vv_ok,
            "exact for k <= 20".into(),
        );
        let d = mef(&sys, 25)?;
        let binary_odo = !d.odometer.finite
            && d.odometer
                .moduli
                .iter()
                .all(|m| m == &(BigUint::one() << sadic::spectrum::valuation(m, 2) as usize));
        g.check(
            "1.3 mef",
            binary_odo && d.nilmanifold.exponents.get(&2) == Some(&Exponent::Infinite),
            "binary odometer x L(2)=inf nilmanifold".into(),
        );
    }

    if run_14 {
        let sys = sadic::fixtures::example_1_4();
        g.check(
            "1.4 rule",
            sys.tau(0)? == sadic::word::TauParams::from_u64(5, 7, 0).unwrap()
                && sys.tau(1)? == sadic::word::TauParams::from_u64(3, 5, 0).unwrap(),
            "rho_0 = omega_2, rho_1 = omega_1".into(),
        );
        let chain = gcd_chain(&sys, 15)?;
        let ok = chain
            .iter()
            .enumerate()
            .all(|(k, v)| *v == (BigUint::one() << k));
        g.check("1.4 gcd chain", ok, "gcd = 2^k for k <= 15".into());
        let maps = group_exponents(&sys, 20)?;
        g.check(
            "1.4 exponents",
            maps.l.is_empty(),
            format!("L = {:?} (must be empty)", maps.l),
        );
    }

    let pass = g.pass;
    Ok((g.lines.join("\n"), pass))
}
