//! Exact word and substitution algebra.
//!
//! Words are finite sequences of small integer symbols with an optional
//! display alphabet. Substitutions map symbols to nonempty words and are
//! composed as monoid homomorphisms. The `tau_{m,n,r}` family and the
//! S-adic tower `v_k = (pi . tau_0 ... tau_{k-1})(0)`, `u_k = ...(1)` are
//! built here, together with the block-parsing machinery (unique interior
//! decomposition of a factor into `v_k`/`u_k` blocks).

use crate::error::Error;
use crate::Result;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;

/// Interned symbol: an index into the system's display alphabet.
pub type Symbol = u8;

/// Display map from symbol indices to characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn new(chars: Vec<char>) -> Self {
        Alphabet { chars }
    }

    /// The binary alphabet rendered as '0', '1'.
    pub fn binary() -> Self {
        Alphabet {
            chars: vec!['0', '1'],
        }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn char_of(&self, s: Symbol) -> char {
        self.chars[s as usize]
    }

    pub fn symbol_of(&self, c: char) -> Option<Symbol> {
        self.chars.iter().position(|&x| x == c).map(|i| i as Symbol)
    }

    pub fn render(&self, w: &Word) -> String {
        w.symbols().iter().map(|&s| self.char_of(s)).collect()
    }

    pub fn parse(&self, s: &str) -> Result<Word> {
        let mut syms = Vec::with_capacity(s.len());
        for c in s.chars() {
            let sym = self
                .symbol_of(c)
                .ok_or_else(|| Error::InvalidInput(format!("character {c:?} not in alphabet")))?;
            syms.push(sym);
        }
        Ok(Word::new(syms))
    }
}

/// A finite word over a small integer alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parse a word over the binary alphabet '0'/'1'.
    pub fn from_bits(s: &str) -> Self {
        Word(
            s.chars()
                .map(|c| match c {
                    '0' => 0,
                    '1' => 1,
                    _ => panic!("from_bits: expected '0'/'1', got {c:?}"),
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn repeat(&self, times: usize) -> Word {
        let mut v = Vec::with_capacity(self.0.len() * times);
        for _ in 0..times {
            v.extend_from_slice(&self.0);
        }
        Word(v)
    }

    pub fn max_symbol(&self) -> Option<Symbol> {
        self.0.iter().copied().max()
    }

    /// Number of occurrences of `sym` as a letter.
    pub fn count_symbol(&self, sym: Symbol) -> usize {
        self.0.iter().filter(|&&s| s == sym).count()
    }
}

impl fmt::Display for Word {
    /// Debug rendering assuming symbols < 10.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

/// Overlapping occurrence count `|w|_v`.
pub fn occurrences(w: &Word, v: &Word) -> usize {
    if v.is_empty() || v.len() > w.len() {
        return 0;
    }
    let (w, v) = (w.symbols(), v.symbols());
    (0..=w.len() - v.len()).filter(|&i| &w[i..i + v.len()] == v).count()
}

/// Hamming distance between equal-length words.
pub fn hamming(w1: &Word, w2: &Word) -> Result<usize> {
    if w1.len() != w2.len() {
        return Err(Error::LengthMismatch {
            left: w1.len(),
            right: w2.len(),
        });
    }
    Ok(w1
        .symbols()
        .iter()
        .zip(w2.symbols())
        .filter(|(a, b)| a != b)
        .count())
}

/// Hamming distance between the concatenations `a.b` and `c.d` without
/// materializing them. Requires `|a|+|b| = |c|+|d|`.
pub fn hamming_concat(a: &Word, b: &Word, c: &Word, d: &Word) -> Result<usize> {
    let n = a.len() + b.len();
    if n != c.len() + d.len() {
        return Err(Error::LengthMismatch {
            left: n,
            right: c.len() + d.len(),
        });
    }
    let left = |i: usize| {
        if i < a.len() {
            a.symbols()[i]
        } else {
            b.symbols()[i - a.len()]
        }
    };
    let right = |i: usize| {
        if i < c.len() {
            c.symbols()[i]
        } else {
            d.symbols()[i - c.len()]
        }
    };
    Ok((0..n).filter(|&i| left(i) != right(i)).count())
}

/// True iff `|v| <= |w|` and `w` is a suffix of the left-infinite word `v^inf`.
pub fn is_root(v: &Word, w: &Word) -> bool {
    if v.is_empty() || v.len() > w.len() {
        return false;
    }
    let (v, w) = (v.symbols(), w.symbols());
    (0..w.len()).all(|i| {
        // Position i from the right end.
        w[w.len() - 1 - i] == v[v.len() - 1 - (i % v.len())]
    })
}

/// Maximal common suffix of `v^inf` and `v^inf u`.
///
/// Comparison stops after `|v| + |u|` agreeing symbols: by the root lemma
/// that many forces `v` and `u` to be multiples of one word, reported as
/// `Error::CommonRoot`.
pub fn periodic_suffix(v: &Word, u: &Word) -> Result<Word> {
    if v.is_empty() || u.is_empty() {
        return Err(Error::InvalidInput("periodic_suffix needs nonempty words".into()));
    }
    let limit = v.len() + u.len();
    let vs = v.symbols();
    let us = u.symbols();
    let tail_a = |i: usize| vs[vs.len() - 1 - (i % vs.len())];
    let tail_b = |i: usize| {
        if i < us.len() {
            us[us.len() - 1 - i]
        } else {
            let j = i - us.len();
            vs[vs.len() - 1 - (j % vs.len())]
        }
    };
    let mut agree = 0usize;
    while agree < limit && tail_a(agree) == tail_b(agree) {
        agree += 1;
    }
    if agree >= limit {
        return Err(Error::CommonRoot);
    }
    let mut syms: Vec<Symbol> = (0..agree).map(tail_b).collect();
    syms.reverse();
    Ok(Word::new(syms))
}

/// Maximal common prefix.
pub fn common_prefix(a: &Word, b: &Word) -> Word {
    let n = a
        .symbols()
        .iter()
        .zip(b.symbols())
        .take_while(|(x, y)| x == y)
        .count();
    Word::new(a.symbols()[..n].to_vec())
}

/// A substitution: a map from each source symbol to a nonempty word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    images: Vec<Word>,
}

impl Substitution {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        for (i, w) in images.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::EmptyImage { symbol: i as u8 });
            }
        }
        Ok(Substitution { images })
    }

    pub fn identity(symbols: usize) -> Self {
        Substitution {
            images: (0..symbols).map(|i| Word::new(vec![i as Symbol])).collect(),
        }
    }

    pub fn source_size(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, sym: Symbol) -> &Word {
        &self.images[sym as usize]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Apply letterwise and concatenate.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let mut out = Vec::new();
        for &s in w.symbols() {
            let img = self
                .images
                .get(s as usize)
                .ok_or(Error::AlphabetMismatch {
                    symbol: s,
                    outer_symbols: self.images.len(),
                })?;
            out.extend_from_slice(img.symbols());
        }
        Ok(Word::new(out))
    }

    /// `(outer . inner)(a) = outer(inner(a))` applied letterwise.
    pub fn compose(outer: &Substitution, inner: &Substitution) -> Result<Substitution> {
        let images = inner
            .images
            .iter()
            .map(|w| outer.apply(w))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(images)
    }
}

/// Parameters `(m, n, r)` of a `tau_{m,n,r}` substitution, `0 <= r < m < n`.
///
/// Arbitrary-precision: the realizer emits parameters far beyond machine
/// words. Materialization guards check representability where needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauParams {
    m: BigUint,
    n: BigUint,
    r: BigUint,
}

impl TauParams {
    pub fn new(m: BigUint, n: BigUint, r: BigUint) -> Result<Self> {
        Self::new_at(m, n, r, 0)
    }

    /// Like `new` but reports `position` (index in a parameter file) on error.
    pub fn new_at(m: BigUint, n: BigUint, r: BigUint, position: usize) -> Result<Self> {
        if r < m && m < n {
            Ok(TauParams { m, n, r })
        } else {
            Err(Error::InvalidTau {
                position,
                m: m.to_string(),
                n: n.to_string(),
                r: r.to_string(),
            })
        }
    }

    pub fn from_u64(m: u64, n: u64, r: u64) -> Result<Self> {
        Self::new(BigUint::from(m), BigUint::from(n), BigUint::from(r))
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn r(&self) -> &BigUint {
        &self.r
    }

    /// The indicator `1_{r > 0}`.
    pub fn has_r(&self) -> bool {
        !self.r.is_zero()
    }

    /// `b = m + r`.
    pub fn b(&self) -> BigUint {
        &self.m + &self.r
    }

    /// `n - m` (always positive).
    pub fn n_minus_m(&self) -> BigUint {
        &self.n - &self.m
    }

    /// `a`-multiplier contributed one level up: `2^{1_{r>0}} (n - m)`.
    pub fn a_next(&self) -> BigUint {
        let base = self.n_minus_m();
        if self.has_r() {
            base << 1
        } else {
            base
        }
    }

    fn usize_triple(&self) -> Option<(usize, usize, usize)> {
        Some((self.m.to_usize()?, self.n.to_usize()?, self.r.to_usize()?))
    }
}

impl fmt::Display for TauParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau_({},{},{})", self.m, self.n, self.r)
    }
}

/// Materialize `tau_{m,n,r}` as a substitution on `{0,1}`.
pub fn build_tau(p: &TauParams) -> Result<Substitution> {
    let (m, n, r) = p.usize_triple().ok_or_else(|| {
        Error::BudgetExceeded {
            budget: usize::MAX,
            needed: p.n().to_string(),
        }
    })?;
    let mut zero = vec![0u8; m - 1];
    zero.push(1);
    if r > 0 {
        zero.extend(std::iter::repeat_n(0, r - 1));
        zero.push(1);
    }
    let mut one = vec![0u8; n - m];
    one.extend_from_slice(&zero);
    Substitution::new(vec![Word::new(zero), Word::new(one)])
}

/// Append the image of `sym` under `tau_{m,n,r}` to `out`, stopping at `cap`.
fn push_tau_image(p: &(usize, usize, usize), sym: Symbol, out: &mut Vec<Symbol>, cap: usize) {
    let (m, n, r) = *p;
    let push_run = |zeros: usize, out: &mut Vec<Symbol>| {
        let take = zeros.min(cap.saturating_sub(out.len()));
        out.extend(std::iter::repeat_n(0u8, take));
        if out.len() < cap {
            out.push(1);
        }
    };
    if sym == 1 {
        // 0^(n-m) prefix, then the image of 0.
        let take = (n - m).min(cap.saturating_sub(out.len()));
        out.extend(std::iter::repeat_n(0u8, take));
        if out.len() >= cap {
            return;
        }
    }
    push_run(m - 1, out);
    if r > 0 && out.len() < cap {
        push_run(r - 1, out);
    }
}

/// How the `tau` parameter sequence of a system is specified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TauSource {
    /// Explicit list; with `repeat_last` the final triple extends forever.
    Explicit {
        list: Vec<TauParams>,
        repeat_last: bool,
    },
    /// Divisibility-driven choice: level `k` uses `omega1` when
    /// `2^(k+2)` divides `|u_k|`, else `omega2`.
    Rule { omega1: TauParams, omega2: TauParams },
}

/// Seed substitution plus the `tau` parameter sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SadicSystem {
    pi: Substitution,
    taus: TauSource,
    alphabet: Alphabet,
}

impl SadicSystem {
    pub fn new(pi: Substitution, taus: TauSource, alphabet: Alphabet) -> Result<Self> {
        if pi.source_size() != 2 {
            return Err(Error::InvalidInput(
                "seed substitution must be defined on {0,1}".into(),
            ));
        }
        for img in pi.images() {
            if let Some(max) = img.max_symbol() {
                if (max as usize) >= alphabet.len() {
                    return Err(Error::InvalidInput(
                        "seed image uses a symbol outside the display alphabet".into(),
                    ));
                }
            }
        }
        if let TauSource::Explicit { list, .. } = &taus {
            if list.is_empty() {
                return Err(Error::InvalidInput("tau list must be nonempty".into()));
            }
        }
        Ok(SadicSystem { pi, taus, alphabet })
    }

    pub fn pi(&self) -> &Substitution {
        &self.pi
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn tau_source(&self) -> &TauSource {
        &self.taus
    }

    /// `v_0 = pi(0)`.
    pub fn v0(&self) -> &Word {
        self.pi.image(0)
    }

    /// `u_0 = pi(1)`.
    pub fn u0(&self) -> &Word {
        self.pi.image(1)
    }

    /// Whether the parameter sequence extends to every level.
    pub fn is_infinite(&self) -> bool {
        match &self.taus {
            TauSource::Explicit { repeat_last, .. } => *repeat_last,
            TauSource::Rule { .. } => true,
        }
    }

    /// Largest level with defined parameters, if finite.
    pub fn max_level(&self) -> Option<usize> {
        match &self.taus {
            TauSource::Explicit {
                list,
                repeat_last: false,
            } => Some(list.len()),
            _ => None,
        }
    }

    /// When the parameter sequence has a declared eventually-periodic tail,
    /// returns `(start, period)`.
    pub fn periodic_tail(&self) -> Option<(usize, usize)> {
        match &self.taus {
            TauSource::Explicit {
                list,
                repeat_last: true,
            } => {
                // Fold a longer declared period back if the list itself repeats.
                let mut start = list.len() - 1;
                while start > 0 && list[start - 1] == list[list.len() - 1] {
                    start -= 1;
                }
                Some((start, 1))
            }
            _ => None,
        }
    }

    /// The parameter triple at level `k`.
    pub fn tau(&self, k: usize) -> Result<TauParams> {
        match &self.taus {
            TauSource::Explicit { list, repeat_last } => {
                if k < list.len() {
                    Ok(list[k].clone())
                } else if *repeat_last {
                    Ok(list[list.len() - 1].clone())
                } else {
                    Err(Error::OutOfRange {
                        index: k.to_string(),
                        max: (list.len() - 1).to_string(),
                    })
                }
            }
            TauSource::Rule { omega1, omega2 } => {
                // Recompute |u_j| through the length recursion; the rule at
                // level j needs only lengths below j, so this terminates.
                let mut lv = BigUint::from(self.v0().len());
                let mut lu = BigUint::from(self.u0().len());
                let mut chosen = None;
                for j in 0..=k {
                    let modulus = BigUint::one() << (j + 2);
                    let pick = if (&lu % &modulus).is_zero() {
                        omega1.clone()
                    } else {
                        omega2.clone()
                    };
                    if j == k {
                        chosen = Some(pick);
                        break;
                    }
                    let (nlv, nlu) = step_lengths(&lv, &lu, &pick);
                    lv = nlv;
                    lu = nlu;
                }
                Ok(chosen.unwrap())
            }
        }
    }

    /// Exact `(|v_k|, |u_k|)` for `0 <= k <= depth`.
    pub fn length_pairs(&self, depth: usize) -> Result<Vec<(BigUint, BigUint)>> {
        let mut out = Vec::with_capacity(depth + 1);
        let mut lv = BigUint::from(self.v0().len());
        let mut lu = BigUint::from(self.u0().len());
        out.push((lv.clone(), lu.clone()));
        for k in 0..depth {
            let p = self.tau(k)?;
            let (nlv, nlu) = step_lengths(&lv, &lu, &p);
            lv = nlv;
            lu = nlu;
            out.push((lv.clone(), lu.clone()));
        }
        Ok(out)
    }
}

/// One level of the length recursion:
/// `|v_{k+1}| = (m-1)|v| + |u| (+ (r-1)|v| + |u| when r > 0)`, same for `u`
/// with `n` in place of `m`.
fn step_lengths(lv: &BigUint, lu: &BigUint, p: &TauParams) -> (BigUint, BigUint) {
    let mut nv = (p.m() - 1u32) * lv + lu;
    let mut nu = (p.n() - 1u32) * lv + lu;
    if p.has_r() {
        let extra = (p.r() - 1u32) * lv + lu;
        nv += &extra;
        nu += &extra;
    }
    (nv, nu)
}

/// A word of the tower, either materialized or represented by its exact length.
#[derive(Debug, Clone)]
pub enum MaybeWord {
    Materialized(Word),
    LengthOnly(BigUint),
}

impl MaybeWord {
    pub fn len(&self) -> BigUint {
        match self {
            MaybeWord::Materialized(w) => BigUint::from(w.len()),
            MaybeWord::LengthOnly(l) => l.clone(),
        }
    }

    pub fn word(&self) -> Option<&Word> {
        match self {
            MaybeWord::Materialized(w) => Some(w),
            MaybeWord::LengthOnly(_) => None,
        }
    }
}

/// `(v_k, u_k)`, materialized when both fit within `materialize_limit` bytes.
pub fn words_uk_vk(
    sys: &SadicSystem,
    k: usize,
    materialize_limit: usize,
) -> Result<(MaybeWord, MaybeWord)> {
    let lens = sys.length_pairs(k)?;
    let (lv, lu) = &lens[k];
    let fits = |l: &BigUint| l.to_usize().map(|x| x <= materialize_limit).unwrap_or(false);
    if fits(lv) && fits(lu) {
        let (v, u) = expand_level(sys, k, usize::MAX)?;
        Ok((MaybeWord::Materialized(v), MaybeWord::Materialized(u)))
    } else {
        Ok((
            MaybeWord::LengthOnly(lv.clone()),
            MaybeWord::LengthOnly(lu.clone()),
        ))
    }
}

/// Materialize `(v_k, u_k)` exactly, truncating nothing; errors if the
/// symbol count exceeds `budget`.
pub fn expand_level(sys: &SadicSystem, k: usize, budget: usize) -> Result<(Word, Word)> {
    let lens = sys.length_pairs(k)?;
    let need = &lens[k].1;
    if need.to_usize().map(|x| x > budget).unwrap_or(true) {
        return Err(Error::BudgetExceeded {
            budget,
            needed: need.to_string(),
        });
    }
    let mut v: Vec<Symbol> = vec![0];
    let mut u: Vec<Symbol> = vec![1];
    for j in (0..k).rev() {
        let p = sys.tau(j)?;
        let triple = p
            .usize_triple()
            .ok_or_else(|| Error::BudgetExceeded {
                budget,
                needed: p.n().to_string(),
            })?;
        v = expand_stream(&v, &triple, usize::MAX);
        u = expand_stream(&u, &triple, usize::MAX);
    }
    let v = sys.pi().apply(&Word::new(v))?;
    let u = sys.pi().apply(&Word::new(u))?;
    Ok((v, u))
}

fn expand_stream(stream: &[Symbol], p: &(usize, usize, usize), cap: usize) -> Vec<Symbol> {
    let mut out = Vec::new();
    for &s in stream {
        if out.len() >= cap {
            break;
        }
        push_tau_image(p, s, &mut out, cap);
    }
    out
}

/// First `n` symbols of the one-sided point `lim (pi . tau_0 ... tau_k)(0)`.
pub fn expand_prefix(sys: &SadicSystem, n: usize) -> Result<Word> {
    // Find a level whose v-word covers n symbols.
    let mut k = 0usize;
    loop {
        let lens = sys.length_pairs(k)?;
        if lens[k].0.to_usize().map(|x| x >= n).unwrap_or(true) {
            break;
        }
        k += 1;
        if !sys.is_infinite() {
            if let Some(max) = sys.max_level() {
                if k > max {
                    return Err(Error::InsufficientDepth(format!(
                        "finite tau list cannot generate a prefix of length {n}"
                    )));
                }
            }
        }
    }
    // The inner stream only needs enough symbols for pi to cover n.
    let inner_cap = n + 2;
    let mut stream: Vec<Symbol> = vec![0];
    for j in (0..k).rev() {
        let p = sys.tau(j)?;
        let triple = p
            .usize_triple()
            .ok_or_else(|| Error::BudgetExceeded {
                budget: n,
                needed: p.n().to_string(),
            })?;
        stream = expand_stream(&stream, &triple, inner_cap.max(n));
    }
    let word = sys.pi().apply(&Word::new(stream))?;
    let mut syms = word.0;
    if syms.len() < n {
        return Err(Error::InsufficientDepth(format!(
            "expanded prefix shorter than requested: {} < {n}",
            syms.len()
        )));
    }
    syms.truncate(n);
    Ok(Word::new(syms))
}

/// Random access into `v_level` / `u_level` without materializing them:
/// the symbols at `[start, start + len)` via block-tree descent.
pub fn symbol_range(
    sys: &SadicSystem,
    level: usize,
    which: Block,
    start: &BigUint,
    len: usize,
) -> Result<Word> {
    let lens = sys.length_pairs(level)?;
    let total = match which {
        Block::V => &lens[level].0,
        Block::U => &lens[level].1,
    };
    if (start + BigUint::from(len)) > total.clone() {
        return Err(Error::OutOfRange {
            index: (start + BigUint::from(len)).to_string(),
            max: total.to_string(),
        });
    }
    let mut out = Vec::with_capacity(len);
    fill_range(sys, &lens, level, which, start.clone(), len, &mut out)?;
    Ok(Word::new(out))
}

/// Run-length structure of a level-`j` word over level-`j-1` blocks:
/// `v = V^(m-1) U [V^(r-1) U]`, `u = V^(n-1) U [V^(r-1) U]`.
fn block_runs(t: &TauParams, which: Block) -> Vec<(Block, BigUint)> {
    let lead = match which {
        Block::V => t.m() - 1u32,
        Block::U => t.n() - 1u32,
    };
    let mut runs = vec![(Block::V, lead), (Block::U, BigUint::one())];
    if t.has_r() {
        runs.push((Block::V, t.r() - 1u32));
        runs.push((Block::U, BigUint::one()));
    }
    runs
}

fn fill_range(
    sys: &SadicSystem,
    lens: &[(BigUint, BigUint)],
    level: usize,
    which: Block,
    start: BigUint,
    len: usize,
    out: &mut Vec<Symbol>,
) -> Result<()> {
    if len == 0 {
        return Ok(());
    }
    if level == 0 {
        let word = match which {
            Block::V => sys.v0(),
            Block::U => sys.u0(),
        };
        let s = start.to_usize().expect("level-0 words are materialized");
        out.extend_from_slice(&word.symbols()[s..s + len]);
        return Ok(());
    }
    let t = sys.tau(level - 1)?;
    let (lv, lu) = &lens[level - 1];
    let mut remaining = len;
    let mut offset = start;
    for (block, count) in block_runs(&t, which) {
        if remaining == 0 {
            break;
        }
        let block_len = match block {
            Block::V => lv,
            Block::U => lu,
        };
        let run_len = &count * block_len;
        if offset >= run_len {
            offset -= run_len;
            continue;
        }
        // Index of the first touched block within the run and the offset
        // into it.
        let mut idx = &offset / block_len;
        let mut inner = &offset % block_len;
        while idx < count && remaining > 0 {
            let avail = block_len - &inner;
            let take = avail
                .to_usize()
                .map(|a| a.min(remaining))
                .unwrap_or(remaining);
            fill_range(sys, lens, level - 1, block, inner.clone(), take, out)?;
            remaining -= take;
            inner = BigUint::zero();
            idx += 1u32;
        }
        offset = BigUint::zero();
    }
    if remaining > 0 {
        return Err(Error::OutOfRange {
            index: "range past the end of the word".into(),
            max: "".into(),
        });
    }
    Ok(())
}

/// Exact `(|p_k|, |s_k|)` for `0 <= k <= depth` via the prefix/suffix
/// recursions `p_{k+1} = v_k^{m_k - 1} p_k`, `s_{k+1} = s_k v_{k+1}`.
pub fn pk_sk_lengths(sys: &SadicSystem, depth: usize) -> Result<Vec<(BigUint, BigUint)>> {
    let (p0, s0) = pk_sk_seed(sys)?;
    let lens = sys.length_pairs(depth + 1)?;
    let mut out = Vec::with_capacity(depth + 1);
    let mut lp = BigUint::from(p0.len());
    let mut ls = BigUint::from(s0.len());
    out.push((lp.clone(), ls.clone()));
    for k in 0..depth {
        let t = sys.tau(k)?;
        lp = (t.m() - 1u32) * &lens[k].0 + &lp;
        ls = &ls + &lens[k + 1].0;
        out.push((lp.clone(), ls.clone()));
    }
    Ok(out)
}

fn pk_sk_seed(sys: &SadicSystem) -> Result<(Word, Word)> {
    let v0 = sys.v0();
    let u0 = sys.u0();
    // Reject seeds that generate a periodic orbit.
    if v0.concat(u0) == u0.concat(v0) {
        return Err(Error::CommonRoot);
    }
    let p0 = common_prefix(v0, u0);
    let s0 = periodic_suffix(v0, u0)?;
    Ok((p0, s0))
}

/// Materialized `(p_k, s_k)`; `budget` caps the produced word lengths.
pub fn pk_sk(sys: &SadicSystem, k: usize, budget: usize) -> Result<(Word, Word)> {
    let (mut p, s0) = pk_sk_seed(sys)?;
    let mut s = s0;
    for j in 0..k {
        let t = sys.tau(j)?;
        let (vj, _) = expand_level(sys, j, budget)?;
        let (vj1, _) = expand_level(sys, j + 1, budget)?;
        let reps = (t.m() - 1u32).to_usize().ok_or(Error::BudgetExceeded {
            budget,
            needed: t.m().to_string(),
        })?;
        let mut np = vj.repeat(reps);
        np = np.concat(&p);
        if np.len() > budget || s.len() + vj1.len() > budget {
            return Err(Error::BudgetExceeded {
                budget,
                needed: np.len().max(s.len() + vj1.len()).to_string(),
            });
        }
        p = np;
        s = s.concat(&vj1);
    }
    Ok((p, s))
}

/// A block label in a level-`k` parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    V,
    U,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::V => write!(f, "V"),
            Block::U => write!(f, "U"),
        }
    }
}

/// Result of parsing a factor into level blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    /// Length of the trimmed prefix fragment (a proper suffix of a block).
    pub offset: usize,
    /// Interior blocks, left to right.
    pub blocks: Vec<Block>,
    /// Length of the trimmed suffix fragment (a proper prefix of a block).
    pub trailing: usize,
}

/// Parse a factor `w` into `v_level`/`u_level` blocks.
///
/// The interior parse is unique; fragments shorter than one block at either
/// edge are trimmed and reported via `offset`/`trailing`.
pub fn decompose(w: &Word, sys: &SadicSystem, level: usize, budget: usize) -> Result<Decomposition> {
    let (v, u) = expand_level(sys, level, budget)?;
    decompose_with(w, &v, &u)
}

/// `decompose` against explicit block words.
pub fn decompose_with(w: &Word, v: &Word, u: &Word) -> Result<Decomposition> {
    let n = w.len();
    let ws = w.symbols();
    let (lv, lu) = (v.len(), u.len());
    let matches_at = |block: &Word, i: usize| {
        i + block.len() <= n && &ws[i..i + block.len()] == block.symbols()
    };

    // forward[i]: position i is reachable as a block boundary from a valid start.
    let mut forward = vec![false; n + 1];
    // Valid starts: offset o where w[0..o) is a proper suffix of v or u (o = 0 included).
    let is_proper_suffix_of = |frag: &[Symbol], of: &Word| {
        !frag.is_empty()
            && frag.len() < of.len()
            && &of.symbols()[of.len() - frag.len()..] == frag
    };
    forward[0] = true;
    for o in 1..n.min(lu.max(lv)) {
        let frag = &ws[..o];
        if is_proper_suffix_of(frag, v) || is_proper_suffix_of(frag, u) {
            forward[o] = true;
        }
    }
    for i in 0..=n {
        if !forward[i] {
            continue;
        }
        if matches_at(v, i) {
            forward[i + lv] = true;
        }
        if matches_at(u, i) {
            forward[i + lu] = true;
        }
    }

    // backward[i]: from position i a valid end is reachable.
    let mut backward = vec![false; n + 1];
    let is_proper_prefix_of =
        |frag: &[Symbol], of: &Word| !frag.is_empty() && frag.len() < of.len() && &of.symbols()[..frag.len()] == frag;
    backward[n] = true;
    for j in (0..n).rev() {
        let frag = &ws[j..];
        if frag.len() < lu.max(lv) && (is_proper_prefix_of(frag, v) || is_proper_prefix_of(frag, u)) {
            backward[j] = true;
        }
        if matches_at(v, j) && backward[j + lv] {
            backward[j] = true;
        }
        if matches_at(u, j) && backward[j + lu] {
            backward[j] = true;
        }
    }

    let boundaries: Vec<usize> = (0..=n).filter(|&i| forward[i] && backward[i]).collect();
    if boundaries.is_empty() {
        return Err(Error::NotAFactor);
    }

    // Walk the boundary chain from the first boundary that can anchor a block.
    let margin = lu + lv;
    let interior_lo = margin.min(n);
    let interior_hi = n.saturating_sub(margin);
    let mut start = None;
    for &b in &boundaries {
        if b >= interior_lo || (matches_at(v, b) || matches_at(u, b)) {
            start = Some(b);
            break;
        }
    }
    let mut pos = match start {
        Some(p) => p,
        None => return Err(Error::NotAFactor),
    };
    let offset = pos;
    let mut blocks = Vec::new();
    loop {
        let step_v = matches_at(v, pos) && forward[pos] && backward[pos + lv] && forward[pos + lv];
        let step_u = matches_at(u, pos) && forward[pos] && backward[pos + lu] && forward[pos + lu];
        // Interior uniqueness: both stepping being live inside the safe
        // window would contradict the unique-decomposition theorem.
        let in_interior = pos >= interior_lo && pos + lu <= interior_hi + margin;
        match (step_v, step_u) {
            (true, true) if in_interior => {
                // Prefer the continuation that stays on the boundary chain
                // the farthest; if both survive to the end the parse is
                // genuinely ambiguous in the interior.
                let v_ok = chain_survives(pos + lv, n, &forward, &backward, v, u, ws);
                let u_ok = chain_survives(pos + lu, n, &forward, &backward, v, u, ws);
                match (v_ok, u_ok) {
                    (true, false) => {
                        blocks.push(Block::V);
                        pos += lv;
                    }
                    (false, true) => {
                        blocks.push(Block::U);
                        pos += lu;
                    }
                    _ => return Err(Error::AmbiguousEdges),
                }
            }
            (true, true) => {
                // Near an edge both may locally match; stop the parse here.
                break;
            }
            (true, false) => {
                blocks.push(Block::V);
                pos += lv;
            }
            (false, true) => {
                blocks.push(Block::U);
                pos += lu;
            }
            (false, false) => break,
        }
    }
    if blocks.is_empty() {
        return Err(Error::NotAFactor);
    }
    Ok(Decomposition {
        offset,
        blocks,
        trailing: n - pos,
    })
}

fn chain_survives(
    mut pos: usize,
    n: usize,
    forward: &[bool],
    backward: &[bool],
    v: &Word,
    u: &Word,
    ws: &[Symbol],
) -> bool {
    let (lv, lu) = (v.len(), u.len());
    let matches_at =
        |block: &Word, i: usize| i + block.len() <= n && &ws[i..i + block.len()] == block.symbols();
    loop {
        if !(forward[pos] && backward[pos]) {
            return false;
        }
        let sv = matches_at(v, pos) && backward[pos + lv];
        let su = matches_at(u, pos) && backward[pos + lu];
        match (sv, su) {
            (false, false) => return n - pos < lu.max(lv),
            (true, false) => pos += lv,
            (false, true) => pos += lu,
            (true, true) => return true, // merged back into an unambiguous chain
        }
    }
}
