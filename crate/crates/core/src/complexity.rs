//! Exact language sampling and word-complexity analysis.
//!
//! Brute-force factor sets come from suffix-automaton scans of expanded
//! tower words, declared exact once two consecutive expansion depths agree
//! (every bounded-length factor appears in all sufficiently deep `v_k` by
//! minimality). On top of that sit the closed-form complexity-increment
//! and special-length formulas, right-special/Rauzy analysis, limsup
//! estimation, and structure inference (seed detection, level inference).

use crate::error::Error;
use crate::rat::ratio;
use crate::word::{
    expand_level, pk_sk_lengths, Block, SadicSystem, Substitution, Symbol, TauParams, TauSource,
    Word,
};
use crate::Result;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Suffix automaton over a small alphabet; recognizes exactly the set of
/// substrings of the built word.
struct Sam {
    len: Vec<u32>,
    link: Vec<i32>,
    next: Vec<Vec<(Symbol, u32)>>,
    last: usize,
}

impl Sam {
    fn new() -> Self {
        Sam {
            len: vec![0],
            link: vec![-1],
            next: vec![Vec::new()],
            last: 0,
        }
    }

    fn build(word: &[Symbol]) -> Self {
        let mut sam = Sam::new();
        for &c in word {
            sam.extend(c);
        }
        sam
    }

    fn get(&self, state: usize, c: Symbol) -> Option<u32> {
        self.next[state]
            .iter()
            .find(|(s, _)| *s == c)
            .map(|(_, t)| *t)
    }

    fn set(&mut self, state: usize, c: Symbol, to: u32) {
        if let Some(e) = self.next[state].iter_mut().find(|(s, _)| *s == c) {
            e.1 = to;
        } else {
            self.next[state].push((c, to));
        }
    }

    fn extend(&mut self, c: Symbol) {
        let cur = self.len.len();
        self.len.push(self.len[self.last] + 1);
        self.link.push(-1);
        self.next.push(Vec::new());
        let mut p = self.last as i32;
        while p >= 0 && self.get(p as usize, c).is_none() {
            self.set(p as usize, c, cur as u32);
            p = self.link[p as usize];
        }
        if p < 0 {
            self.link[cur] = 0;
        } else {
            let q = self.get(p as usize, c).unwrap() as usize;
            if self.len[p as usize] + 1 == self.len[q] {
                self.link[cur] = q as i32;
            } else {
                let clone = self.len.len();
                self.len.push(self.len[p as usize] + 1);
                self.link.push(self.link[q]);
                self.next.push(self.next[q].clone());
                while p >= 0 && self.get(p as usize, c) == Some(q as u32) {
                    self.set(p as usize, c, clone as u32);
                    p = self.link[p as usize];
                }
                self.link[q] = clone as i32;
                self.link[cur] = clone as i32;
            }
        }
        self.last = cur;
    }

    /// All distinct substrings of length `<= q_max`, grouped by length.
    fn factor_table(&self, q_max: usize) -> Vec<Vec<Word>> {
        let mut out: Vec<Vec<Word>> = vec![Vec::new(); q_max + 1];
        out[0].push(Word::empty());
        // Walk the DAG; each distinct substring is a unique path from root.
        let mut stack: Vec<(usize, Vec<Symbol>)> = vec![(0, Vec::new())];
        while let Some((state, w)) = stack.pop() {
            if w.len() == q_max {
                continue;
            }
            let mut edges: Vec<(Symbol, u32)> = self.next[state].clone();
            edges.sort_unstable();
            for (c, to) in edges {
                let mut nw = w.clone();
                nw.push(c);
                out[nw.len()].push(Word::new(nw.clone()));
                stack.push((to as usize, nw));
            }
        }
        for level in out.iter_mut() {
            level.sort_unstable();
        }
        out
    }
}

/// Exact factor sets of a system up to a cutoff, with the expansion depth
/// that produced them and the stabilization certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LanguageSample {
    pub q_max: usize,
    /// `factors[q]` is the sorted set of length-`q` factors; `factors[0] = {eps}`.
    pub factors: Vec<Vec<Word>>,
    pub source_depth: usize,
    pub stabilized: bool,
    pub witness_len: usize,
}

impl LanguageSample {
    pub fn contains(&self, w: &Word) -> bool {
        w.len() <= self.q_max && self.factors[w.len()].binary_search(w).is_ok()
    }

    pub fn p(&self, q: usize) -> usize {
        self.factors[q].len()
    }
}

/// Factor table of one materialized word (no stabilization semantics).
pub fn factors_of_word(w: &Word, q_max: usize) -> Vec<Vec<Word>> {
    Sam::build(w.symbols()).factor_table(q_max.min(w.len()))
}

/// Exact `L_q(X)` for all `q <= q_max`.
///
/// Expands `v_k` for increasing `k` and declares the sets exact when two
/// consecutive depths produce identical tables.
pub fn sample_language(sys: &SadicSystem, q_max: usize, budget: usize) -> Result<LanguageSample> {
    if q_max < 1 {
        return Err(Error::InvalidInput("q_max must be >= 1".into()));
    }
    let mut prev: Option<(usize, usize, Vec<Vec<Word>>)> = None;
    let mut k = 0usize;
    loop {
        let lens = sys.length_pairs(k)?;
        let lv = lens[k].0.to_usize().unwrap_or(usize::MAX);
        if lv > budget {
            return Err(Error::BudgetExceeded {
                budget,
                needed: lens[k].0.to_string(),
            });
        }
        if lv >= 2 * (q_max + 1) {
            let (v, _) = expand_level(sys, k, budget)?;
            let table = factors_of_word(&v, q_max);
            if let Some((_, _, prev_table)) = &prev {
                if *prev_table == table {
                    return Ok(LanguageSample {
                        q_max,
                        factors: table,
                        source_depth: k,
                        stabilized: true,
                        witness_len: lv,
                    });
                }
            }
            prev = Some((k, lv, table));
        }
        k += 1;
        if let Some(max) = sys.max_level() {
            if k > max {
                // Finite tower: return the deepest table, not stabilized.
                if let Some((depth, wl, table)) = prev {
                    return Ok(LanguageSample {
                        q_max,
                        factors: table,
                        source_depth: depth,
                        stabilized: false,
                        witness_len: wl,
                    });
                }
                return Err(Error::InsufficientDepth(
                    "finite tau list too short to reach q_max".into(),
                ));
            }
        }
    }
}

/// `p(q) = |L_q|` with the `p(0) = 1` convention.
pub fn complexity(sample: &LanguageSample, q: usize) -> Result<usize> {
    if q > sample.q_max {
        return Err(Error::OutOfRange {
            index: q.to_string(),
            max: sample.q_max.to_string(),
        });
    }
    Ok(sample.p(q))
}

/// A special word with its extension set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecialWord {
    pub word: Word,
    pub extensions: Vec<Symbol>,
}

/// Words of length `q` with at least two right extensions in the sample.
pub fn right_special(sample: &LanguageSample, q: usize) -> Result<Vec<SpecialWord>> {
    if q + 1 > sample.q_max {
        return Err(Error::OutOfRange {
            index: (q + 1).to_string(),
            max: sample.q_max.to_string(),
        });
    }
    let mut out = Vec::new();
    for w in &sample.factors[q] {
        let mut ext = Vec::new();
        for a in 0..=8u8 {
            let mut syms = w.symbols().to_vec();
            syms.push(a);
            if sample.contains(&Word::new(syms)) {
                ext.push(a);
            }
        }
        if ext.len() >= 2 {
            out.push(SpecialWord {
                word: w.clone(),
                extensions: ext,
            });
        }
    }
    Ok(out)
}

/// Words of length `q` with at least two left extensions.
pub fn left_special(sample: &LanguageSample, q: usize) -> Result<Vec<SpecialWord>> {
    if q + 1 > sample.q_max {
        return Err(Error::OutOfRange {
            index: (q + 1).to_string(),
            max: sample.q_max.to_string(),
        });
    }
    let mut out = Vec::new();
    for w in &sample.factors[q] {
        let mut ext = Vec::new();
        for a in 0..=8u8 {
            let mut syms = vec![a];
            syms.extend_from_slice(w.symbols());
            if sample.contains(&Word::new(syms)) {
                ext.push(a);
            }
        }
        if ext.len() >= 2 {
            out.push(SpecialWord {
                word: w.clone(),
                extensions: ext,
            });
        }
    }
    Ok(out)
}

/// The directed graph on `L_n` with one edge per element of `L_{n+1}`.
#[derive(Debug, Clone)]
pub struct RauzyGraph {
    pub n: usize,
    pub vertices: Vec<Word>,
    /// `(from, to, appended symbol)` indices into `vertices`.
    pub edges: Vec<(usize, usize, Symbol)>,
}

pub fn rauzy_graph(sample: &LanguageSample, n: usize) -> Result<RauzyGraph> {
    if n + 1 > sample.q_max {
        return Err(Error::OutOfRange {
            index: (n + 1).to_string(),
            max: sample.q_max.to_string(),
        });
    }
    let vertices = sample.factors[n].clone();
    let mut edges = Vec::new();
    for w in &sample.factors[n + 1] {
        let from = Word::new(w.symbols()[..n].to_vec());
        let to = Word::new(w.symbols()[1..].to_vec());
        let fi = vertices.binary_search(&from).expect("prefix closure");
        let ti = vertices.binary_search(&to).expect("suffix closure");
        edges.push((fi, ti, *w.symbols().last().unwrap()));
    }
    Ok(RauzyGraph { n, vertices, edges })
}

/// Interval data of the increment formula at one level.
struct LevelIntervals {
    /// `(|s_k v_k^(m_k-1) p_k|, |s_k v_k^(n_k-2) p_k|]`
    main: (BigUint, BigUint),
    /// `(|s_k v_k^(r_k-1) p_k|, |s_k v_k^(r_k-1) u_k v_k^(r_k-1) p_k|]` when `r_k > 0`
    r_case: Option<(BigUint, BigUint)>,
}

fn level_intervals(sys: &SadicSystem, k: usize) -> Result<LevelIntervals> {
    let lens = sys.length_pairs(k + 1)?;
    let ps = pk_sk_lengths(sys, k)?;
    let (lp, ls) = &ps[k];
    let (lv, lu) = &lens[k];
    let t = sys.tau(k)?;
    let base = ls + lp;
    let main = (&base + (t.m() - 1u32) * lv, &base + (t.n() - 2u32) * lv);
    let r_case = if t.has_r() {
        let left = &base + (t.r() - 1u32) * lv;
        let right = &left + lu + (t.r() - 1u32) * lv;
        Some((left, right))
    } else {
        None
    };
    Ok(LevelIntervals { main, r_case })
}

/// Closed-form `p(q+1) - p(q)` via the right-special interval formula.
///
/// Valid for `q > |s_0|`; smaller `q` must fall back to brute force.
pub fn predicted_increment(sys: &SadicSystem, q: &BigUint) -> Result<BigUint> {
    let s0 = pk_sk_lengths(sys, 0)?[0].1.clone();
    if *q <= s0 {
        return Err(Error::InvalidInput(format!(
            "increment formula needs q > |s_0| = {s0}"
        )));
    }
    let mut inc = BigUint::one();
    let mut k = 0usize;
    loop {
        let ps = pk_sk_lengths(sys, k)?;
        let (lp, ls) = &ps[k];
        if ls + lp > *q {
            break;
        }
        let iv = level_intervals(sys, k)?;
        if iv.main.0 < *q && *q <= iv.main.1 {
            inc += 1u32;
        }
        if let Some((lo, hi)) = iv.r_case {
            if lo < *q && *q <= hi {
                inc += 1u32;
            }
        }
        k += 1;
        if sys.tau(k).is_err() {
            break;
        }
    }
    Ok(inc)
}

/// Special lengths and formula values at one level.
#[derive(Debug, Clone)]
pub struct SpecialLengths {
    pub k: usize,
    /// `(q_k, p(q_k))` at `q_k = |s_k v_k^(n_k-2) p_k|`.
    pub main: (BigUint, BigInt),
    /// The same at `q = |s_k v_k^(r_k-1) u_k v_k^(r_k-1) p_k|` when `r_k > 0`.
    pub r_case: Option<(BigUint, BigInt)>,
}

/// Evaluate the special-length complexity formulas exactly; `c` is the
/// calibration constant obtained from one brute-force evaluation.
pub fn special_length_complexity(
    sys: &SadicSystem,
    k: usize,
    c: &BigInt,
) -> Result<SpecialLengths> {
    let lens = sys.length_pairs(k + 1)?;
    let iv = level_intervals(sys, k)?;
    let t = sys.tau(k)?;

    // sum_{j<=k} (n_j - m_j - 1)|v_j| and sum 1_{r_j} ((r_j - 1)|v_j| + |u_j|)
    let mut sum_main = BigUint::zero();
    let mut sum_r_below = BigUint::zero();
    let mut sum_r_incl = BigUint::zero();
    let mut sum_main_below = BigUint::zero();
    #[allow(clippy::needless_range_loop)]
    for j in 0..=k {
        let tj = sys.tau(j)?;
        let (lvj, luj) = &lens[j];
        let main_term = (tj.n() - tj.m() - 1u32) * lvj;
        sum_main += &main_term;
        if j < k {
            sum_main_below += &main_term;
        }
        if tj.has_r() {
            let term = (tj.r() - 1u32) * lvj + luj;
            sum_r_incl += &term;
            if j < k {
                sum_r_below += &term;
            }
        }
    }

    let q_main = iv.main.1.clone();
    let ell = if t.has_r() {
        let a = (t.n() - t.r() - 1u32) * &lens[k].0;
        let b = (t.r() - 1u32) * &lens[k].0 + &lens[k].1;
        a.min(b)
    } else {
        BigUint::zero()
    };
    let main_val = BigInt::from(&q_main + &ell + &sum_main + &sum_r_below) + c;

    let r_case = if let Some((_, q_r)) = iv.r_case {
        // Count of the main interval's points that are <= q_r.
        let overlap = if q_r <= iv.main.0 {
            BigUint::zero()
        } else {
            q_r.clone().min(iv.main.1.clone()) - &iv.main.0
        };
        let val = BigInt::from(&q_r + &sum_main_below + &sum_r_incl + &overlap) + c;
        Some((q_r, val))
    } else {
        None
    };

    Ok(SpecialLengths {
        k,
        main: (q_main, main_val),
        r_case,
    })
}

/// Calibrate the additive constant of the special-length formula with one
/// brute-force complexity evaluation at the smallest special length.
pub fn calibrate_c(sys: &SadicSystem, sample: &LanguageSample) -> Result<BigInt> {
    let zero = BigInt::zero();
    let sl = special_length_complexity(sys, 0, &zero)?;
    let mut candidates = vec![sl.main.clone()];
    if let Some(rc) = &sl.r_case {
        candidates.push(rc.clone());
    }
    candidates.sort_by(|a, b| a.0.cmp(&b.0));
    let s0 = pk_sk_lengths(sys, 0)?[0].1.clone();
    for (q, formula_val) in candidates {
        if q <= s0 {
            continue;
        }
        let qu = q.to_usize().ok_or(Error::InsufficientDepth(
            "smallest special length beyond usize".into(),
        ))?;
        if qu > sample.q_max {
            return Err(Error::InsufficientDepth(format!(
                "calibration needs brute force at q = {qu} > q_max = {}",
                sample.q_max
            )));
        }
        let brute = BigInt::from(sample.p(qu));
        return Ok(brute - formula_val);
    }
    Err(Error::InsufficientDepth(
        "no special length above |s_0| at level 0".into(),
    ))
}

/// Finite-depth limsup data: every special-length ratio plus the tail value.
#[derive(Debug, Clone)]
pub struct LimsupReport {
    /// `(q_k, p(q_k), ratio)` for main and r-case lengths merged.
    pub ratios: Vec<(BigUint, BigInt, BigRational)>,
    /// Max over all computed ratios (early levels can exceed the limit).
    pub max_ratio: BigRational,
    /// Ratio at the deepest level: the limsup estimate.
    pub limit_estimate: BigRational,
    /// `|ratio_K - ratio_(K-1)|`, a Cauchy certificate for the tail.
    pub cauchy_gap: BigRational,
}

/// Ratios `p(q_k)/q_k` along the special lengths up to depth `K`.
pub fn limsup_estimate(sys: &SadicSystem, depth: usize, c: &BigInt) -> Result<LimsupReport> {
    let mut ratios = Vec::new();
    let mut per_level_best: Vec<BigRational> = Vec::new();
    for k in 0..=depth {
        let sl = special_length_complexity(sys, k, c)?;
        let mut best: Option<BigRational> = None;
        let mut push = |q: &BigUint, p: &BigInt, best: &mut Option<BigRational>| {
            let r = BigRational::new(p.clone(), BigInt::from(q.clone()));
            if best.as_ref().map(|b| r > *b).unwrap_or(true) {
                *best = Some(r.clone());
            }
            ratios.push((q.clone(), p.clone(), r));
        };
        push(&sl.main.0, &sl.main.1, &mut best);
        if let Some((q, p)) = &sl.r_case {
            push(q, p, &mut best);
        }
        per_level_best.push(best.unwrap());
    }
    let max_ratio = ratios
        .iter()
        .map(|(_, _, r)| r.clone())
        .max()
        .expect("nonempty");
    let limit_estimate = per_level_best.last().unwrap().clone();
    let cauchy_gap = if per_level_best.len() >= 2 {
        let prev = &per_level_best[per_level_best.len() - 2];
        (&limit_estimate - prev).abs()
    } else {
        BigRational::zero()
    };
    Ok(LimsupReport {
        ratios,
        max_ratio,
        limit_estimate,
        cauchy_gap,
    })
}

/// A detected seed pair with its bispecial witness.
#[derive(Debug, Clone)]
pub struct SeedDetection {
    pub v: Word,
    pub u: Word,
    pub witness: Word,
}

/// Find a canonical seed: locate a length where a single word is both the
/// unique right-special and unique left-special factor with two successors,
/// then read the two Rauzy return loops off that witness.
pub fn detect_seed(sample: &LanguageSample) -> Result<SeedDetection> {
    // A periodic language stops growing; no infinite minimal structure.
    for q in 0..sample.q_max {
        if sample.p(q + 1) == sample.p(q) {
            return Err(Error::Periodic);
        }
        if q >= 1 && sample.p(q) <= q {
            return Err(Error::Periodic);
        }
    }

    for q in 1..sample.q_max.saturating_sub(1) {
        let rs = right_special(sample, q)?;
        let ls = left_special(sample, q)?;
        if rs.len() != 1 || ls.len() != 1 {
            continue;
        }
        if rs[0].word != ls[0].word || rs[0].extensions.len() != 2 {
            continue;
        }
        let witness = rs[0].word.clone();
        let graph = rauzy_graph(sample, q)?;
        let w_idx = graph.vertices.binary_search(&witness).unwrap();
        // Follow each of the two outgoing edges until returning to w.
        let mut labels: Vec<Word> = Vec::new();
        let mut ok = true;
        for (_, to, sym) in graph.edges.iter().filter(|(f, _, _)| *f == w_idx) {
            let mut label = vec![*sym];
            let mut cur = *to;
            let mut steps = 0usize;
            while cur != w_idx {
                let mut outs = graph.edges.iter().filter(|(f, _, _)| *f == cur);
                match (outs.next(), outs.next()) {
                    (Some((_, t2, s2)), None) => {
                        label.push(*s2);
                        cur = *t2;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
                steps += 1;
                if steps > graph.edges.len() + 2 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
            labels.push(Word::new(label));
        }
        if !ok || labels.len() != 2 {
            continue;
        }
        labels.sort_by_key(Word::len);
        let (v, u) = (labels[0].clone(), labels[1].clone());
        if v.len() == u.len() || v.symbols()[0] == u.symbols()[0] {
            continue;
        }
        // v must be a proper suffix of u.
        if &u.symbols()[u.len() - v.len()..] != v.symbols() {
            continue;
        }
        return Ok(SeedDetection { v, u, witness });
    }
    Err(Error::InsufficientDepth(
        "no qualifying unique bispecial length within the sample".into(),
    ))
}

/// Greedy parse of a word into blocks over seed words with distinct first
/// letters; the trailing partial block is dropped.
pub fn parse_blocks_greedy(w: &Word, v: &Word, u: &Word) -> Result<Vec<Block>> {
    if v.is_empty() || u.is_empty() || v.symbols()[0] == u.symbols()[0] {
        return Err(Error::InvalidInput(
            "greedy parse needs nonempty blocks with distinct first letters".into(),
        ));
    }
    let mut blocks = Vec::new();
    let mut pos = 0usize;
    let ws = w.symbols();
    while pos < ws.len() {
        let (block, word) = if ws[pos] == v.symbols()[0] {
            (Block::V, v)
        } else if ws[pos] == u.symbols()[0] {
            (Block::U, u)
        } else {
            return Err(Error::NotAFactor);
        };
        if pos + word.len() > ws.len() {
            break; // trailing fragment
        }
        if &ws[pos..pos + word.len()] != word.symbols() {
            return Err(Error::NotAFactor);
        }
        blocks.push(block);
        pos += word.len();
    }
    Ok(blocks)
}

/// Infer `(m, n, r)` from a level block stream by scanning the set
/// `S = {t : U V^t U occurs}`, and re-parse the stream one level up.
pub fn infer_level(blocks: &[Block]) -> Result<(TauParams, Vec<Block>)> {
    // Gaps between consecutive U's (interior only).
    let u_positions: Vec<usize> = blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == Block::U)
        .map(|(i, _)| i)
        .collect();
    if u_positions.len() < 4 {
        return Err(Error::InsufficientDepth(
            "block stream too short to infer parameters".into(),
        ));
    }
    let gaps: Vec<usize> = u_positions.windows(2).map(|w| w[1] - w[0] - 1).collect();
    let mut s: Vec<usize> = gaps.clone();
    s.sort_unstable();
    s.dedup();

    match s.len() {
        0 | 1 => Err(Error::Periodic),
        2 => {
            let (m, n) = (s[0] + 1, s[1] + 1);
            let params = TauParams::from_u64(m as u64, n as u64, 0)?;
            // Each gap g followed by its U forms one next-level block.
            let next = gaps
                .iter()
                .map(|&g| {
                    if g == m - 1 {
                        Ok(Block::V)
                    } else if g == n - 1 {
                        Ok(Block::U)
                    } else {
                        Err(Error::NotLowComplexity(format!("unexpected gap {g}")))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((params, next))
        }
        3 => {
            let (r, m, n) = (s[0] + 1, s[1] + 1, s[2] + 1);
            let params = TauParams::from_u64(m as u64, n as u64, r as u64)?;
            // Gaps alternate (m-1 | n-1), r-1, (m-1 | n-1), r-1, ...
            let mut next = Vec::new();
            let mut i = if gaps[0] == r - 1 { 1 } else { 0 };
            while i + 1 < gaps.len() {
                let g = gaps[i];
                let sep = gaps[i + 1];
                if sep != r - 1 {
                    return Err(Error::NotLowComplexity(format!(
                        "expected separator gap {} at {}, got {sep}",
                        r - 1,
                        i + 1
                    )));
                }
                if g == m - 1 {
                    next.push(Block::V);
                } else if g == n - 1 {
                    next.push(Block::U);
                } else {
                    return Err(Error::NotLowComplexity(format!("unexpected main gap {g}")));
                }
                i += 2;
            }
            if next.len() < 2 {
                return Err(Error::InsufficientDepth(
                    "not enough full blocks at the next level".into(),
                ));
            }
            Ok((params, next))
        }
        _ => Err(Error::NotLowComplexity(format!(
            "gap set has {} distinct values: {:?}",
            s.len(),
            s
        ))),
    }
}

/// The level-`k` block stream of the generating one-sided point, i.e. the
/// symbol stream whose expansion under `pi . tau_0 ... tau_{k-1}` is `x`.
pub fn level_block_stream(sys: &SadicSystem, k: usize, count: usize) -> Result<Vec<Block>> {
    // Pick the top level by length arithmetic: one level-`top` symbol spans
    // at least |v_top| / |u_k| level-k blocks.
    let mut top = k + 1;
    loop {
        let pairs = sys.length_pairs(top)?;
        let spans = &pairs[top].0 / &pairs[k].1;
        if spans >= BigUint::from(count + 2) {
            break;
        }
        if sys.max_level().map(|m| top >= m).unwrap_or(false) {
            break;
        }
        top += 1;
    }
    let mut stream: Vec<Symbol> = vec![0];
    for j in (k..top).rev() {
        let t = sys.tau(j)?;
        let triple = (
            t.m().to_usize().ok_or(Error::BudgetExceeded {
                budget: count,
                needed: t.m().to_string(),
            })?,
            t.n().to_usize().unwrap_or(usize::MAX),
            t.r().to_usize().unwrap_or(usize::MAX),
        );
        stream = expand_block_stream(&stream, &triple, count + 1);
    }
    stream.truncate(count);
    Ok(stream
        .into_iter()
        .map(|s| if s == 0 { Block::V } else { Block::U })
        .collect())
}

fn expand_block_stream(stream: &[Symbol], p: &(usize, usize, usize), cap: usize) -> Vec<Symbol> {
    let (m, n, r) = *p;
    let mut out: Vec<Symbol> = Vec::new();
    for &s in stream {
        if out.len() >= cap {
            break;
        }
        let reps = if s == 1 { n - 1 } else { m - 1 };
        out.extend(std::iter::repeat_n(0, reps.min(cap.saturating_sub(out.len()))));
        if out.len() < cap {
            out.push(1);
        }
        if r > 0 {
            out.extend(std::iter::repeat_n(0, (r - 1).min(cap.saturating_sub(out.len()))));
            if out.len() < cap {
                out.push(1);
            }
        }
    }
    out
}

/// Rebuild a system from a detected seed by repeatedly inferring levels from
/// the parsed block stream of a generated prefix.
pub fn infer_system(
    sample: &LanguageSample,
    prefix: &Word,
    levels: usize,
) -> Result<(SeedDetection, Vec<TauParams>)> {
    let seed = detect_seed(sample)?;
    let mut blocks = parse_blocks_greedy(prefix, &seed.v, &seed.u)?;
    let mut params = Vec::new();
    for _ in 0..levels {
        match infer_level(&blocks) {
            Ok((p, next)) => {
                params.push(p);
                blocks = next;
            }
            Err(Error::InsufficientDepth(_)) => break,
            Err(e) => return Err(e),
        }
    }
    if params.is_empty() {
        return Err(Error::InsufficientDepth(
            "prefix too short to infer any level".into(),
        ));
    }
    Ok((seed, params))
}

/// One row of the q,p,predicted,brute table.
#[derive(Debug, Clone)]
pub struct ComplexityRow {
    pub q: usize,
    pub p: usize,
    pub predicted_increment: Option<BigUint>,
    pub brute_increment: usize,
}

pub fn complexity_table(
    sys: &SadicSystem,
    sample: &LanguageSample,
    q_max: usize,
) -> Result<Vec<ComplexityRow>> {
    let mut rows = Vec::new();
    for q in 1..q_max {
        let p = complexity(sample, q)?;
        let brute_inc = complexity(sample, q + 1)? - p;
        let pred = predicted_increment(sys, &BigUint::from(q)).ok();
        rows.push(ComplexityRow {
            q,
            p,
            predicted_increment: pred,
            brute_increment: brute_inc,
        });
    }
    Ok(rows)
}

/// Ratio helper for reports.
pub fn ratio_of(p: usize, q: usize) -> BigRational {
    ratio(&BigUint::from(p), &BigUint::from(q))
}

/// Build an explicit system from a seed substitution and a parameter list.
pub fn system_from_seed(
    v: &Word,
    u: &Word,
    params: Vec<TauParams>,
    alphabet: crate::word::Alphabet,
) -> Result<SadicSystem> {
    let pi = Substitution::new(vec![v.clone(), u.clone()])?;
    SadicSystem::new(
        pi,
        TauSource::Explicit {
            list: params,
            repeat_last: true,
        },
        alphabet,
    )
}
