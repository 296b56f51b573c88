//! Maximal-equicontinuous-factor descriptors: odometer moduli from the gcd
//! chain, nilmanifold exponents from the `L` map, rotation data from the
//! spectrum, finite-precision character evaluation, the approximate
//! eigenfunction orbit check, and the orbit-equivalence comparator.

use crate::error::Error;
use crate::rat::{big_to_rational, RatInterval};
use crate::spectrum::{
    self, alpha_k_enclosure, eigenvalue_group, valuation, EigenvalueGroupDescriptor, Exponent,
    ExponentMaps,
};
use crate::structure::derive_ab;
use crate::word::SadicSystem;
use crate::Result;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Inverse-limit moduli `gcd(|v_k|, |v_{k+1}|)` with a finite/truncated tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdometerDescriptor {
    pub moduli: Vec<BigUint>,
    /// True when the chain stabilized in periodic-tail exact mode, so the
    /// odometer is the finite cyclic group of the last modulus.
    pub finite: bool,
}

impl OdometerDescriptor {
    pub fn is_trivial(&self) -> bool {
        self.finite && self.moduli.iter().all(|m| m.is_one())
    }
}

/// Exponent map plus rotation data standing in for the adele.
#[derive(Debug, Clone)]
pub struct NilmanifoldDescriptor {
    pub exponents: BTreeMap<u64, Exponent>,
    pub alpha: RatInterval,
    pub offsets: Vec<spectrum::Offset>,
}

/// The product descriptor of the maximal equicontinuous factor.
#[derive(Debug, Clone)]
pub struct MEFDescriptor {
    pub odometer: OdometerDescriptor,
    pub nilmanifold: NilmanifoldDescriptor,
    pub depth: usize,
    /// Parameter constraints pass, so the structure theory applies.
    pub certified: bool,
}

/// Assemble the MEF descriptor at a depth.
pub fn mef(sys: &SadicSystem, depth: usize) -> Result<MEFDescriptor> {
    let eig = eigenvalue_group(sys, depth)?;
    let moduli = spectrum::gcd_chain(sys, depth)?;
    let finite = eig.exponents.periodic_certified
        && moduli.len() >= 2
        && !eig
            .exponents
            .r
            .values()
            .any(|e| matches!(e, Exponent::Infinite | Exponent::Growing(_)));
    let constraints = crate::structure::check_constraints(sys, depth.min(12))?;
    Ok(MEFDescriptor {
        odometer: OdometerDescriptor { moduli, finite },
        nilmanifold: NilmanifoldDescriptor {
            exponents: eig.exponents.l.clone(),
            alpha: eig.alpha.clone(),
            offsets: eig.offsets.clone(),
        },
        depth,
        certified: constraints.pass,
    })
}

/// A point of the truncated odometer: residues coherent along the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdometerPoint {
    pub residues: Vec<BigUint>,
}

impl OdometerPoint {
    pub fn zero(moduli: &[BigUint]) -> Self {
        OdometerPoint {
            residues: vec![BigUint::zero(); moduli.len()],
        }
    }

    /// Coherence: `x_{k+1} = x_k (mod g_k)` along the divisibility chain.
    pub fn is_coherent(&self, moduli: &[BigUint]) -> bool {
        self.residues.len() == moduli.len()
            && self
                .residues
                .iter()
                .zip(moduli)
                .all(|(x, m)| m.is_zero() || x < m || m.is_one())
            && self
                .residues
                .windows(2)
                .zip(moduli.windows(2))
                .all(|(x, m)| (&x[1] % &m[0]) == (&x[0] % &m[0]))
    }
}

/// Coordinatewise `+ n` on the truncation.
pub fn odometer_step(pt: &OdometerPoint, n: &BigInt, moduli: &[BigUint]) -> OdometerPoint {
    let residues = pt
        .residues
        .iter()
        .zip(moduli)
        .map(|(x, m)| {
            if m.is_one() {
                BigUint::zero()
            } else {
                let m_int = BigInt::from(m.clone());
                let val = (BigInt::from(x.clone()) + n) % &m_int;
                let val = if val.is_negative() { val + &m_int } else { val };
                val.to_biguint().unwrap()
            }
        })
        .collect();
    OdometerPoint { residues }
}

/// A truncated p-adic residue: a value mod `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicResidue {
    pub residue: BigUint,
    pub precision: u32,
}

/// An angle on the unit circle as an exact rational interval (not reduced
/// mod 1; use `reduced` for a canonical representative).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleEnclosure(pub RatInterval);

impl AngleEnclosure {
    /// Representative with the midpoint in `[0, 1)`.
    pub fn reduced(&self) -> RatInterval {
        let shift = self.0.midpoint().floor();
        self.0.shift(&-shift)
    }

    /// Exact equality mod 1 for point enclosures.
    pub fn equals_mod1(&self, other: &AngleEnclosure) -> bool {
        let d = &self.0.midpoint() - &other.0.midpoint();
        self.0.width().is_zero() && other.0.width().is_zero() && d.is_integer()
    }
}

/// Evaluate the character indexed by `(theta, (z_p))` at the rational `q`:
/// the angle `q theta + sum_p {q z_p}_p (mod 1)`.
///
/// Residues absent from `z` are treated as 0. A denominator valuation
/// beyond a stored residue's precision is an error.
pub fn character_eval(
    theta: &RatInterval,
    z: &BTreeMap<u64, PadicResidue>,
    q: &BigRational,
) -> Result<AngleEnclosure> {
    let den = q.denom().to_biguint().unwrap();
    let mut frac_sum = BigRational::zero();
    for (p, e) in spectrum::factorize(&den)? {
        if let Some(res) = z.get(&p) {
            if res.precision < e {
                return Err(Error::PrecisionInsufficient {
                    prime: p,
                    needed: e,
                    stored: res.precision,
                });
            }
            let zq = q * BigRational::from_integer(BigInt::from(res.residue.clone()));
            frac_sum += spectrum::p_adic_frac(&zq, p);
        }
    }
    Ok(AngleEnclosure(theta.scale(q).shift(&frac_sum)))
}

/// Per-level outcome of the approximate-eigenfunction orbit check.
#[derive(Debug, Clone)]
pub struct LevelOrbitCheck {
    pub k: usize,
    /// Number of level-k block starts examined.
    pub transitions: usize,
    /// Every `j(x,k+1) - j(x,k)` decomposed as `p |v_k| + p' |v_{k-1}|`.
    pub decomposition_ok: bool,
    /// Max Cauchy-bound slack `2 pi (<a p |v_k|> + <a p' |v_{k-1}|>) - |f_k - f_{k+1}|`.
    pub cauchy_ok: bool,
    pub max_lhs: f64,
    pub max_rhs: f64,
}

#[derive(Debug, Clone)]
pub struct OrbitCheckReport {
    pub k0: usize,
    pub levels: Vec<LevelOrbitCheck>,
    pub boundary_cross_check_ok: bool,
    pub pass: bool,
}

/// Verify the block-offset decomposition and the Cauchy bound of the
/// approximate eigenfunctions along a generated prefix.
pub fn factor_orbit_check(
    sys: &SadicSystem,
    k0: usize,
    prefix_len: usize,
    depth: usize,
) -> Result<OrbitCheckReport> {
    let seqs = derive_ab(sys, depth + 2)?;
    let alpha_k0 = alpha_k_enclosure(sys, k0, (depth + 40).min(80))?;

    // Block start positions per level, covering the prefix.
    let mut starts: Vec<Vec<usize>> = Vec::new();
    for k in 0..=depth + 1 {
        let lv = seqs.v_lens[k].to_usize().ok_or(Error::BudgetExceeded {
            budget: prefix_len,
            needed: seqs.v_lens[k].to_string(),
        })?;
        let lu = seqs.u_lens[k].to_usize().unwrap_or(usize::MAX);
        let blocks = crate::complexity::level_block_stream(sys, k, prefix_len / lv + 2)?;
        let mut pos = 0usize;
        let mut row = vec![0usize];
        for b in blocks {
            pos += match b {
                crate::word::Block::V => lv,
                crate::word::Block::U => lu,
            };
            row.push(pos);
            if pos > prefix_len {
                break;
            }
        }
        starts.push(row);
    }

    // Independent cross-check of boundaries via the interior block parse.
    let mut boundary_cross_check_ok = true;
    {
        let budget = 1 << 22;
        #[allow(clippy::needless_range_loop)]
        for k in 1..=depth.min(4) {
            if seqs.u_lens[k].to_usize().map(|x| x * 8 > prefix_len).unwrap_or(true) {
                break;
            }
            let (v, u) = crate::word::expand_level(sys, k, budget)?;
            let window_len = (4 * (v.len() + u.len())).min(prefix_len);
            let prefix = crate::word::expand_prefix(sys, window_len)?;
            match crate::word::decompose_with(&prefix, &v, &u) {
                Ok(d) => {
                    // Boundaries from the parse must be a subset of the
                    // generated starts (offset 0 here: x starts on a block).
                    let mut pos = d.offset;
                    for b in &d.blocks {
                        if starts[k].binary_search(&pos).is_err() {
                            boundary_cross_check_ok = false;
                        }
                        pos += match b {
                            crate::word::Block::V => v.len(),
                            crate::word::Block::U => u.len(),
                        };
                    }
                }
                Err(_) => boundary_cross_check_ok = false,
            }
        }
    }

    // Distance to the nearest integer of `alpha * mult`; the multipliers
    // repeat across transitions, so memoize.
    let alpha_mid = alpha_k0.midpoint();
    let half = BigRational::new(1.into(), 2.into());
    let mut dist_cache: BTreeMap<BigUint, BigRational> = BTreeMap::new();
    let mut circle_dist = |mult: &BigUint| -> BigRational {
        if let Some(d) = dist_cache.get(mult) {
            return d.clone();
        }
        let mid = &alpha_mid * big_to_rational(mult);
        let nearest = (&mid + &half).floor();
        let d = (mid - nearest).abs();
        dist_cache.insert(mult.clone(), d.clone());
        d
    };

    let mut levels = Vec::new();
    let mut pass = boundary_cross_check_ok;
    for k in 1..=depth {
        let t_k = sys.tau(k)?;
        let nm_prev = sys.tau(k - 1)?.n_minus_m();
        let p_cap = t_k.n() + t_k.r();
        let lv_k = &seqs.v_lens[k];
        let lv_prev = &seqs.v_lens[k - 1];

        let mut decomposition_ok = true;
        let mut cauchy_ok = true;
        let mut max_lhs = 0f64;
        let mut max_rhs = 0f64;
        let mut transitions = 0usize;

        // For each level-k block start b within the prefix, find the
        // containing level-(k+1) block start s and decompose b - s.
        let upper = &starts[k + 1];
        let mut ui = 0usize;
        for &b in &starts[k] {
            if b >= prefix_len {
                break;
            }
            while ui + 1 < upper.len() && upper[ui + 1] <= b {
                ui += 1;
            }
            let s = upper[ui];
            if s > b {
                continue;
            }
            transitions += 1;
            let diff = BigUint::from(b - s);

            let mut found = None;
            for p_prime in [BigUint::zero(), nm_prev.clone()] {
                let sub = &p_prime * lv_prev;
                if sub > diff {
                    continue;
                }
                let rem = &diff - &sub;
                if (&rem % lv_k).is_zero() {
                    let p = &rem / lv_k;
                    if p <= p_cap {
                        found = Some((p, p_prime));
                        break;
                    }
                }
            }
            match found {
                Some((p, p_prime)) => {
                    // Cauchy bound: |1 - e^(2 pi i alpha diff)| <=
                    // 2 pi (<alpha p |v_k|> + <alpha p' |v_{k-1}|>).
                    let lhs_angle = circle_dist(&diff);
                    let lhs = 2.0
                        * (std::f64::consts::PI * crate::rat::rational_to_f64(&lhs_angle))
                            .sin()
                            .abs();
                    let rhs_angle = circle_dist(&(&p * lv_k))
                        + circle_dist(&(&p_prime * lv_prev));
                    let rhs = 2.0 * std::f64::consts::PI * crate::rat::rational_to_f64(&rhs_angle);
                    max_lhs = max_lhs.max(lhs);
                    max_rhs = max_rhs.max(rhs);
                    if lhs > rhs + 1e-12 {
                        cauchy_ok = false;
                    }
                    // Exact triangle inequality on the circle distances.
                    if lhs_angle > rhs_angle {
                        cauchy_ok = false;
                    }
                }
                None => decomposition_ok = false,
            }
        }
        pass &= decomposition_ok && cauchy_ok;
        levels.push(LevelOrbitCheck {
            k,
            transitions,
            decomposition_ok,
            cauchy_ok,
            max_lhs,
            max_rhs,
        });
    }

    Ok(OrbitCheckReport {
        k0,
        levels,
        boundary_cross_check_ok,
        pass,
    })
}

/// Verdict of the group comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupComparison {
    Equal,
    Different(String),
    UnknownAtDepth,
}

fn exponents_certified_distinct(
    a: &ExponentMaps,
    b: &ExponentMaps,
    side: &str,
    pick: fn(&ExponentMaps, u64) -> Exponent,
) -> Option<String> {
    let mut primes: Vec<u64> = Vec::new();
    match side {
        "L" => {
            primes.extend(a.l.keys());
            primes.extend(b.l.keys());
        }
        _ => {
            primes.extend(a.r.keys());
            primes.extend(b.r.keys());
        }
    }
    primes.sort_unstable();
    primes.dedup();
    for p in primes {
        let ea = pick(a, p);
        let eb = pick(b, p);
        let verdict = match (ea, eb) {
            // Certified infinity against a value that stopped growing.
            (Exponent::Infinite, Exponent::Finite(e)) if a.periodic_certified => {
                Some(format!("{side}({p}): inf vs {e}"))
            }
            (Exponent::Finite(e), Exponent::Infinite) if b.periodic_certified => {
                Some(format!("{side}({p}): {e} vs inf"))
            }
            (Exponent::Finite(x), Exponent::Finite(y))
                if a.periodic_certified && b.periodic_certified && x != y =>
            {
                Some(format!("{side}({p}): {x} vs {y}"))
            }
            _ => None,
        };
        if verdict.is_some() {
            return verdict;
        }
    }
    None
}

/// Compare two eigenvalue-group descriptors.
///
/// `Different` needs a certified witness prime; `Equal` is only emitted in
/// periodic-tail exact mode with matching closed-form data (maps, alpha
/// enclosure overlap, and identical offset generators).
pub fn compare_eigenvalue_groups(
    d1: &EigenvalueGroupDescriptor,
    d2: &EigenvalueGroupDescriptor,
) -> GroupComparison {
    if let Some(reason) =
        exponents_certified_distinct(&d1.exponents, &d2.exponents, "R", |m, p| m.r_of(p))
    {
        return GroupComparison::Different(reason);
    }
    if let Some(reason) =
        exponents_certified_distinct(&d1.exponents, &d2.exponents, "L", |m, p| m.l_of(p))
    {
        return GroupComparison::Different(reason);
    }
    if d1.exponents.periodic_certified
        && d2.exponents.periodic_certified
        && d1.exponents.l == d2.exponents.l
        && d1.exponents.r == d2.exponents.r
        && d1.alpha.intersects(&d2.alpha)
    {
        let n = d1.offsets.len().min(d2.offsets.len());
        if n > 0 && d1.offsets[..n] == d2.offsets[..n] {
            return GroupComparison::Equal;
        }
    }
    GroupComparison::UnknownAtDepth
}

/// gcd-chain valuation helper used by reports.
pub fn odometer_valuations(desc: &OdometerDescriptor, p: u64) -> Vec<u32> {
    desc.moduli.iter().map(|m| valuation(m, p)).collect()
}
