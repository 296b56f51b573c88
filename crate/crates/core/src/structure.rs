//! Derived integer sequences, parameter constraints, decay certification,
//! and the mean-almost-periodicity check.
//!
//! The sequences are
//!
//! ```text
//! a_0 = 2^{1_{r_0}},  a_{k+1} = 2^{1_{r_{k+1}}} (n_k - m_k),  b_k = m_k + r_k,
//! |v_{k+1}| = b_k |v_k| + a_k |v_{k-1}|   with |v_{-1}| = |u_0| - |v_0|,
//! beta_k = a_{k+1} |v_k| / |v_{k+1}|.
//! ```

use crate::error::Error;
use crate::rat::{big_to_rational, ratio};
use crate::word::{expand_prefix, SadicSystem};
use crate::Result;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

/// Exact derived data of a system up to depth `K`.
#[derive(Debug, Clone)]
pub struct DerivedSeqs {
    pub depth: usize,
    /// `a_0 ..= a_K`.
    pub a: Vec<BigUint>,
    /// `b_0 ..= b_K`.
    pub b: Vec<BigUint>,
    /// `|v_{-1}| = |u_0| - |v_0|`.
    pub v_neg1: BigUint,
    /// `|v_0| ..= |v_K|`.
    pub v_lens: Vec<BigUint>,
    /// `|u_0| ..= |u_K|`.
    pub u_lens: Vec<BigUint>,
    /// `beta_0 ..= beta_{K-1}`.
    pub betas: Vec<BigRational>,
    /// `prod_{j<=k} beta_j` for `k = 0 ..= K-1`.
    pub beta_products: Vec<BigRational>,
}

/// Compute the exact sequences to depth `K`, cross-checking the length
/// recursion against direct image-length expansion at every level.
pub fn derive_ab(sys: &SadicSystem, depth: usize) -> Result<DerivedSeqs> {
    let pairs = sys.length_pairs(depth + 1)?;
    let lv0 = &pairs[0].0;
    let lu0 = &pairs[0].1;
    if lu0 < lv0 {
        return Err(Error::InvalidInput(
            "seed requires |pi(1)| >= |pi(0)|".into(),
        ));
    }
    let v_neg1 = lu0 - lv0;

    let mut a = Vec::with_capacity(depth + 1);
    let mut b = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let t = sys.tau(k)?;
        b.push(t.b());
        if k == 0 {
            a.push(if t.has_r() {
                BigUint::from(2u32)
            } else {
                BigUint::one()
            });
        } else {
            let prev = sys.tau(k - 1)?;
            let base = prev.n_minus_m();
            a.push(if t.has_r() { base << 1 } else { base });
        }
    }

    let v_lens: Vec<BigUint> = pairs.iter().take(depth + 1).map(|(v, _)| v.clone()).collect();
    let u_lens: Vec<BigUint> = pairs.iter().take(depth + 1).map(|(_, u)| u.clone()).collect();

    // |v_{k+1}| = b_k |v_k| + a_k |v_{k-1}| must agree with the direct
    // expansion lengths at every level, including k = 0 via the seed.
    for k in 0..depth {
        let prev = if k == 0 { &v_neg1 } else { &v_lens[k - 1] };
        let rec = &b[k] * &v_lens[k] + &a[k] * prev;
        assert_eq!(rec, v_lens[k + 1], "length recursion mismatch at level {k}");
    }

    let mut betas = Vec::with_capacity(depth);
    let mut beta_products = Vec::with_capacity(depth);
    let mut prod = BigRational::one();
    for k in 0..depth {
        let beta = ratio(&(&a[k + 1] * &v_lens[k]), &v_lens[k + 1]);
        prod *= &beta;
        betas.push(beta);
        beta_products.push(prod.clone());
    }

    Ok(DerivedSeqs {
        depth,
        a,
        b,
        v_neg1,
        v_lens,
        u_lens,
        betas,
        beta_products,
    })
}

/// `|v_0| ..= |v_K|` via the recursion (cross-checked in `derive_ab`).
pub fn lengths(sys: &SadicSystem, depth: usize) -> Result<Vec<BigUint>> {
    Ok(derive_ab(sys, depth)?.v_lens)
}

/// `beta_k` computed both as `a_{k+1}|v_k| / |v_{k+1}|` and through the
/// continued-fraction recursion `a_{k+1} / (b_k + beta_{k-1})`; the two
/// routes must agree exactly.
pub fn beta(seqs: &DerivedSeqs, k: usize) -> Result<BigRational> {
    if k >= seqs.betas.len() {
        return Err(Error::OutOfRange {
            index: k.to_string(),
            max: seqs.betas.len().saturating_sub(1).to_string(),
        });
    }
    let direct = seqs.betas[k].clone();
    if k >= 1 {
        let rec =
            big_to_rational(&seqs.a[k + 1]) / (big_to_rational(&seqs.b[k]) + &seqs.betas[k - 1]);
        assert_eq!(direct, rec, "beta recursion mismatch at {k}");
    }
    Ok(direct)
}

/// Decay data: `eps_k = a_0 ... a_k / |v_k|` exactly, a geometric fit of the
/// beta products, and a summability verdict over the computed range.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub epsilons: Vec<BigRational>,
    /// Ratios `eps_{k+1} / eps_k` as floats, for display.
    pub eps_ratios: Vec<f64>,
    /// Least-squares geometric rate of `prod beta_j`.
    pub kappa_fit: f64,
    /// Whether a geometric envelope `< 1` fits the computed range.
    pub summable: bool,
}

pub fn decay_report(seqs: &DerivedSeqs) -> DecayReport {
    let mut epsilons = Vec::with_capacity(seqs.depth + 1);
    let mut prod = BigUint::one();
    for k in 0..=seqs.depth {
        prod *= &seqs.a[k];
        epsilons.push(ratio(&prod, &seqs.v_lens[k]));
    }
    let eps_ratios: Vec<f64> = epsilons
        .windows(2)
        .map(|w| crate::rat::rational_to_f64(&(&w[1] / &w[0])))
        .collect();

    // Fit log(prod beta) ~ c + k log kappa.
    let logs: Vec<f64> = seqs
        .beta_products
        .iter()
        .map(|p| crate::rat::rational_to_f64(p).ln())
        .collect();
    let kappa_fit = if logs.len() >= 2 {
        let n = logs.len() as f64;
        let sx: f64 = (0..logs.len()).map(|i| i as f64).sum();
        let sy: f64 = logs.iter().sum();
        let sxx: f64 = (0..logs.len()).map(|i| (i as f64) * (i as f64)).sum();
        let sxy: f64 = logs.iter().enumerate().map(|(i, y)| i as f64 * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        slope.exp()
    } else {
        f64::NAN
    };

    // Envelope test on the second half of the range.
    let summable = if seqs.beta_products.len() >= 4 {
        let mid = seqs.beta_products.len() / 2;
        let last = seqs.beta_products.len() - 1;
        kappa_fit < 0.999 && seqs.beta_products[last] < seqs.beta_products[mid]
    } else {
        kappa_fit < 0.999
    };

    DecayReport {
        epsilons,
        eps_ratios,
        kappa_fit,
        summable,
    }
}

/// Outcome of one constraint at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaseResult {
    /// The constraint's guard did not fire.
    NotApplicable,
    /// Passed, with the case label that matched.
    Pass(String),
    /// Failed, with the exact inequality that broke.
    Violation(String),
    /// Below the theory's range (k < 2) or parameters unavailable.
    Unchecked(String),
}

impl CaseResult {
    pub fn is_violation(&self) -> bool {
        matches!(self, CaseResult::Violation(_))
    }
}

/// Verdicts for one level.
#[derive(Debug, Clone)]
pub struct LevelVerdict {
    pub k: usize,
    pub svp: CaseResult,
    pub rk: CaseResult,
    pub a2: CaseResult,
}

/// Per-level verdicts plus the overall flag.
#[derive(Debug, Clone)]
pub struct ConstraintReport {
    pub verdicts: Vec<LevelVerdict>,
    pub pass: bool,
}

/// Evaluate the parameter constraint tables for `2 <= k <= K`.
///
/// Violations are data, not errors. Levels below 2 are reported as
/// unchecked-by-theory.
pub fn check_constraints(sys: &SadicSystem, depth: usize) -> Result<ConstraintReport> {
    let mut verdicts = Vec::new();
    let mut pass = true;
    for k in 0..=depth {
        if k < 2 {
            verdicts.push(LevelVerdict {
                k,
                svp: CaseResult::Unchecked("unchecked-by-theory (k < 2)".into()),
                rk: CaseResult::Unchecked("unchecked-by-theory (k < 2)".into()),
                a2: CaseResult::Unchecked("unchecked-by-theory (k < 2)".into()),
            });
            continue;
        }
        let t_k = sys.tau(k)?;
        let t_k1 = sys.tau(k - 1)?;
        let t_k2 = sys.tau(k - 2)?;
        let next = sys.tau(k + 1).ok();

        let svp = svp_case(&t_k, &t_k1, &t_k2);
        let rk = match &next {
            Some(nx) if nx.has_r() => rk_case(&t_k, &t_k1, &t_k2),
            Some(_) => CaseResult::NotApplicable,
            None => CaseResult::Unchecked("r_(k+1) unavailable".into()),
        };
        let a2 = match &next {
            Some(nx) => a2_case(&t_k, nx),
            None => CaseResult::Unchecked("a_(k+1) unavailable".into()),
        };
        pass &= !svp.is_violation() && !rk.is_violation() && !a2.is_violation();
        verdicts.push(LevelVerdict { k, svp, rk, a2 });
    }
    Ok(ConstraintReport { verdicts, pass })
}

fn svp_case(
    t_k: &crate::word::TauParams,
    t_k1: &crate::word::TauParams,
    t_k2: &crate::word::TauParams,
) -> CaseResult {
    let (m, n) = (t_k.m(), t_k.n());
    if *n <= 2u32 * m {
        return CaseResult::NotApplicable;
    }
    let case_i = *n == 2u32 * m + 2u32
        && *t_k1.n() == t_k1.m() + 1u32
        && 3u32 * t_k2.n() <= 4u32 * t_k2.m() + 3u32
        && !t_k.has_r()
        && !t_k1.has_r();
    let case_ii = *n == 2u32 * m + 1u32 && *t_k1.n() <= 2u32 * t_k1.m() && !t_k.has_r();
    let case_iii = *n == 2u32 * m + 1u32
        && t_k1.m().is_one()
        && *t_k1.n() == BigUint::from(3u32)
        && *t_k2.n() == t_k2.m() + 1u32
        && !t_k.has_r()
        && !t_k1.has_r()
        && !t_k2.has_r();
    match (case_i, case_ii, case_iii) {
        (true, false, false) => CaseResult::Pass("svp(i): n = 2m+2 chain".into()),
        (false, true, false) => CaseResult::Pass("svp(ii): n = 2m+1, n' <= 2m'".into()),
        (false, false, true) => CaseResult::Pass("svp(iii): n = 2m+1 after tau_{1,3,0}".into()),
        (false, false, false) => CaseResult::Violation(format!(
            "n_k = {n} > 2 m_k = {m2} but no svp case holds",
            m2 = 2u32 * m
        )),
        _ => CaseResult::Violation("svp cases not mutually exclusive".into()),
    }
}

fn rk_case(
    t_k: &crate::word::TauParams,
    t_k1: &crate::word::TauParams,
    t_k2: &crate::word::TauParams,
) -> CaseResult {
    let (m, n) = (t_k.m(), t_k.n());
    if 3u32 * n > 4u32 * m + 3u32 {
        return CaseResult::Violation(format!(
            "r_(k+1) > 0 requires 3 n_k <= 4 m_k + 3, got 3*{n} > 4*{m}+3"
        ));
    }
    let two = BigUint::from(2u32);
    let three = BigUint::from(3u32);
    let five = BigUint::from(5u32);
    let case_i = 2u32 * n <= 3u32 * m;
    let case_ii = *m == three
        && *n == five
        && *t_k1.n() == t_k1.m() + 1u32
        && !t_k.has_r()
        && !t_k1.has_r();
    let case_iii = m.is_one() && *n == two && *t_k1.n() <= 2u32 * t_k1.m() && !t_k.has_r();
    let case_iv = m.is_one()
        && *n == two
        && t_k1.m().is_one()
        && *t_k1.n() == three
        && *t_k2.n() == t_k2.m() + 1u32
        && !t_k.has_r()
        && !t_k1.has_r();
    match (case_i, case_ii, case_iii, case_iv) {
        (true, false, false, false) => CaseResult::Pass("rk(i): 2n <= 3m".into()),
        (false, true, false, false) => CaseResult::Pass("rk(ii): (m,n) = (3,5)".into()),
        (false, false, true, false) => CaseResult::Pass("rk(iii): (m,n) = (1,2)".into()),
        (false, false, false, true) => {
            CaseResult::Pass("rk(iv): (m,n) = (1,2) after tau_{1,3,0}".into())
        }
        (false, false, false, false) => CaseResult::Violation(format!(
            "r_(k+1) > 0 but none of the rk cases hold at (m,n) = ({m},{n})"
        )),
        _ => CaseResult::Violation("rk cases not mutually exclusive".into()),
    }
}

fn a2_case(t_k: &crate::word::TauParams, t_next: &crate::word::TauParams) -> CaseResult {
    // a_{k+1} = 2^{1_{r_{k+1}}} (n_k - m_k) <= b_k + 2
    let a_next = if t_next.has_r() {
        t_k.n_minus_m() << 1
    } else {
        t_k.n_minus_m()
    };
    let bound = t_k.b() + 2u32;
    if a_next > bound {
        return CaseResult::Violation(format!("a_(k+1) = {a_next} > b_k + 2 = {bound}"));
    }
    if a_next == bound && (t_next.has_r() || *t_k.n() != 2u32 * t_k.m() + 2u32) {
        return CaseResult::Violation(
            "a_(k+1) = b_k + 2 requires r_(k+1) = 0 and n_k = 2 m_k + 2".into(),
        );
    }
    CaseResult::Pass(if a_next == bound {
        "a2: equality case n = 2m+2".into()
    } else {
        "a2: a_(k+1) <= b_k + 1".into()
    })
}

/// Empirical mean-almost-periodicity data at one level.
#[derive(Debug, Clone)]
pub struct MeanApReport {
    pub level: usize,
    pub prefix_len: usize,
    pub differing: usize,
    /// Empirical density of positions `t` with `x_t != x_{t+|v_k|}`.
    pub density: BigRational,
    /// `8 |u_0| 2^{sum 1_{r_j}} prod (n_j - m_j) / |v_{k+1}|`.
    pub bound: BigRational,
    pub within: bool,
}

/// Count positions of the generated prefix moved by `sigma^{|v_k|}`.
pub fn mean_ap_report(sys: &SadicSystem, k: usize, prefix_len: usize) -> Result<MeanApReport> {
    let seqs = derive_ab(sys, k + 1)?;
    let shift = seqs.v_lens[k].to_usize().ok_or(Error::BudgetExceeded {
        budget: usize::MAX,
        needed: seqs.v_lens[k].to_string(),
    })?;
    let need = BigUint::from(2u32) * &seqs.v_lens[k + 1];
    if BigUint::from(prefix_len) < need {
        return Err(Error::PrefixTooShort {
            needed: need.to_string(),
            got: prefix_len.to_string(),
        });
    }
    let prefix = expand_prefix(sys, prefix_len + shift)?;
    let s = prefix.symbols();
    let differing = (0..prefix_len).filter(|&t| s[t] != s[t + shift]).count();
    let density = ratio(&BigUint::from(differing), &BigUint::from(prefix_len));
    let bound = ratio(
        &(8u32 * BigUint::from(sys.u0().len()) * dvu_product(sys, k)?),
        &seqs.v_lens[k + 1],
    );
    let within = density <= bound;
    Ok(MeanApReport {
        level: k,
        prefix_len,
        differing,
        density,
        bound,
        within,
    })
}

/// `2^{#{j < k : r_j > 0}} prod_{j<k} (n_j - m_j)`, the growth factor in the
/// Hamming bound for `d(v_k u_k, u_k v_k)`.
pub fn dvu_product(sys: &SadicSystem, k: usize) -> Result<BigUint> {
    let mut prod = BigUint::one();
    for j in 0..k {
        let t = sys.tau(j)?;
        prod *= t.n_minus_m();
        if t.has_r() {
            prod <<= 1;
        }
    }
    Ok(prod)
}

/// Strict upper bound `2 |u_0| * dvu_product` for `d(v_k u_k, u_k v_k)`.
pub fn dvu_bound(sys: &SadicSystem, k: usize) -> Result<BigUint> {
    Ok(2u32 * BigUint::from(sys.u0().len()) * dvu_product(sys, k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_1_2, example_1_3, repeated_tau};
    use crate::word::{expand_level, hamming_concat};
    use num_traits::{ToPrimitive, Zero};

    #[test]
    fn derived_sequences_example_1_2() {
        let seqs = derive_ab(&example_1_2(), 8).unwrap();
        assert_eq!(seqs.a[0], BigUint::one());
        for k in 1..=8 {
            assert_eq!(seqs.a[k], BigUint::from(2u32));
        }
        for k in 0..=8 {
            assert_eq!(seqs.b[k], BigUint::from(3u32));
        }
        let v: Vec<u64> = seqs.v_lens.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(&v[..5], &[1, 3, 11, 39, 139]);
    }

    #[test]
    fn derived_sequences_example_1_3() {
        let seqs = derive_ab(&example_1_3(), 8).unwrap();
        assert_eq!(seqs.a[0], BigUint::from(2u32));
        for k in 1..=8 {
            assert_eq!(seqs.a[k], BigUint::from(4u32));
        }
        for k in 0..=8 {
            assert_eq!(seqs.b[k], BigUint::from(8u32));
        }
        // Lengths agree with direct expansion (|v_2| = 8*8 + 4*1 = 68).
        let v: Vec<u64> = seqs.v_lens.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(&v[..4], &[1, 8, 68, 576]);
    }

    #[test]
    fn fibonacci_lengths_for_tau_120() {
        let seqs = derive_ab(&repeated_tau(1, 2, 0), 10).unwrap();
        for k in 0..=10 {
            assert_eq!(seqs.a[k], BigUint::one());
            assert_eq!(seqs.b[k], BigUint::one());
        }
        let v: Vec<u64> = seqs.v_lens.iter().map(|x| x.to_u64().unwrap()).collect();
        assert_eq!(&v[..8], &[1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn beta_values_and_recursion() {
        let seqs = derive_ab(&example_1_2(), 10).unwrap();
        let b0 = beta(&seqs, 0).unwrap();
        assert_eq!(b0, BigRational::new(2.into(), 3.into()));
        let b1 = beta(&seqs, 1).unwrap();
        assert_eq!(b1, BigRational::new(6.into(), 11.into()));
        // Telescoping product identity prod beta_j = (a_1...a_k) |v_0| / |v_k|.
        for k in 1..=10usize {
            let mut anum = BigUint::one();
            for j in 1..=k {
                anum *= &seqs.a[j];
            }
            let expect = ratio(&(anum * &seqs.v_lens[0]), &seqs.v_lens[k]);
            assert_eq!(seqs.beta_products[k - 1], expect, "k = {k}");
        }
    }

    #[test]
    fn decay_report_rates() {
        let seqs = derive_ab(&example_1_2(), 25).unwrap();
        let rep = decay_report(&seqs);
        assert!(rep.summable);
        // eps ratios approach 2/kappa with kappa = (3+sqrt(17))/2.
        let target = 2.0 / ((3.0 + 17f64.sqrt()) / 2.0);
        let last = *rep.eps_ratios.last().unwrap();
        assert!((last - target).abs() < 1e-6, "{last} vs {target}");

        // Golden-ratio decay for tau_{1,2,0}.
        let seqs = derive_ab(&repeated_tau(1, 2, 0), 25).unwrap();
        let rep = decay_report(&seqs);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let last = *rep.eps_ratios.last().unwrap();
        assert!((last - 1.0 / phi).abs() < 1e-6);

        // Constraint-violating tau_{1,3,0} is computable but not summable.
        let seqs = derive_ab(&repeated_tau(1, 3, 0), 40).unwrap();
        let rep = decay_report(&seqs);
        assert!(!rep.summable);
    }

    #[test]
    fn constraint_verdicts() {
        assert!(check_constraints(&example_1_2(), 8).unwrap().pass);
        assert!(check_constraints(&example_1_3(), 8).unwrap().pass);
        let rep = check_constraints(&repeated_tau(1, 3, 0), 8).unwrap();
        assert!(!rep.pass);
        for v in &rep.verdicts[2..] {
            assert!(v.svp.is_violation(), "level {}", v.k);
        }
        // tau_{7,9,1}: rk fires via r_{k+1} = 1 and passes case (i).
        let rep = check_constraints(&example_1_3(), 4).unwrap();
        for v in &rep.verdicts[2..] {
            assert!(matches!(&v.rk, CaseResult::Pass(l) if l.starts_with("rk(i)")));
        }
    }

    #[test]
    fn gcd_chain_divisibility() {
        use num_integer::Integer;
        for sys in [example_1_2(), example_1_3(), repeated_tau(2, 3, 0)] {
            let seqs = derive_ab(&sys, 20).unwrap();
            let mut aprod = seqs.v_lens[0].clone();
            let mut prev_gcd: Option<BigUint> = None;
            for k in 0..20usize {
                aprod *= &seqs.a[k];
                let g = seqs.v_lens[k].gcd(&seqs.v_lens[k + 1]);
                // gcd(|v_k|, |v_{k+1}|) divides |v_0| a_0 ... a_k
                assert!((&aprod % &g).is_zero(), "k = {k}");
                if let Some(p) = prev_gcd {
                    assert!((&g % &p).is_zero(), "chain divisibility at {k}");
                }
                prev_gcd = Some(g);
            }
        }
    }

    #[test]
    fn hamming_bound_strict() {
        // Strictness needs |v_0| < |u_0|; the identity seed has equal
        // lengths, so k = 0 only satisfies the non-strict bound there.
        for sys in [example_1_2(), example_1_3()] {
            let (v0, u0) = expand_level(&sys, 0, 1 << 22).unwrap();
            let d0 = hamming_concat(&v0, &u0, &u0, &v0).unwrap();
            assert!(BigUint::from(d0) <= dvu_bound(&sys, 0).unwrap());
            for k in 1..=4usize {
                let (v, u) = expand_level(&sys, k, 1 << 22).unwrap();
                let d = hamming_concat(&v, &u, &u, &v).unwrap();
                let bound = dvu_bound(&sys, k).unwrap();
                assert!(BigUint::from(d) < bound, "k = {k}: d = {d}, bound = {bound}");
            }
        }
    }

    #[test]
    fn mean_ap_below_bound() {
        let sys = example_1_2();
        let rep = mean_ap_report(&sys, 3, 100_000).unwrap();
        assert!(rep.within, "density {} bound {}", rep.density, rep.bound);
        // A periodic block shifted by its period moves nothing.
        let w = crate::word::Word::from_bits("0101010101010101");
        let shifted = crate::word::Word::new(w.symbols()[2..].to_vec());
        let head = crate::word::Word::new(w.symbols()[..w.len() - 2].to_vec());
        assert_eq!(crate::word::hamming(&head, &shifted).unwrap(), 0);
    }
}
