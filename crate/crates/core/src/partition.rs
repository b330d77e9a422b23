//! Prime partitions with prescribed relative densities and Mertens-product
//! targets.
//!
//! The pipeline peels one prime class at a time: a greedy pass selects a
//! subset tracking the density target, block pairs `(r_k, s_k)` provide a
//! summable series `q_k` of exchange corrections, a sign function steers
//! the series to the exact Mertens offset, and finitely many drops or
//! additions close the remaining gap. Every infinite limit of the
//! underlying argument becomes a cutoff evaluation with a recorded tail.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bits::KahanSum;
use crate::error::{Error, Result};
use crate::primes::{ln_p_ratio, mertens_statistic, sieve_primes, PrimeSubset, PrimeTable};

/// Target vector for a partition: `sum tau_i = 1`, `prod a_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    h: usize,
    tau: Vec<f64>,
    a: Vec<f64>,
}

const SPEC_TOLERANCE: f64 = 1e-12;

impl PartitionSpec {
    pub fn new(tau: Vec<f64>, a: Vec<f64>) -> Result<Self> {
        if tau.is_empty() || tau.len() != a.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching nonempty tau and a vectors, got lengths {} and {}",
                tau.len(),
                a.len()
            )));
        }
        if tau.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::InvalidArgument(
                "every tau_i must lie in (0, 1]".into(),
            ));
        }
        if a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("every a_i must be positive".into()));
        }
        let tau_sum: f64 = tau.iter().sum();
        if (tau_sum - 1.0).abs() > SPEC_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "sum of tau must be 1, got {tau_sum}"
            )));
        }
        let a_prod: f64 = a.iter().product();
        if (a_prod - 1.0).abs() > SPEC_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "product of a must be 1, got {a_prod}"
            )));
        }
        Ok(PartitionSpec {
            h: tau.len(),
            tau,
            a,
        })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }
}

/// Greedy selection of `R` inside `Q`: processing the primes of `Q` in
/// increasing order, `p` joins `R` exactly when the running count
/// `R(p-1)` is below `(tau/kappa) * Q(p)`. The output tracks
/// `(tau/kappa) Q(x)` within 2 at every `x`.
pub fn greedy_select(q: &PrimeSubset, tau: f64, kappa: f64, cutoff: u64) -> Result<PrimeSubset> {
    if !(tau > 0.0 && tau < kappa && kappa <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < tau < kappa <= 1, got tau = {tau}, kappa = {kappa}"
        )));
    }
    let ratio = tau / kappa;
    let mut r = PrimeSubset::empty(Arc::clone(q.table()));
    let mut r_count = 0u64;
    let mut q_count = 0u64;
    let mut any = false;
    let table = q.table();
    for rank in 0..table.prime_count(cutoff.min(table.limit()))? {
        if !q.contains_rank(rank) {
            continue;
        }
        any = true;
        q_count += 1;
        if (r_count as f64) < ratio * q_count as f64 {
            r.insert(table.primes()[rank])?;
            r_count += 1;
        }
    }
    if !any {
        return Err(Error::InvalidArgument(
            "Q has no primes below the cutoff".into(),
        ));
    }
    Ok(r)
}

/// Measured maximum of `|R(x) - (tau/kappa) Q(x)|` over `x <= cutoff`,
/// independent of how `R` was built.
pub fn tracking_deviation(
    r: &PrimeSubset,
    q: &PrimeSubset,
    tau: f64,
    kappa: f64,
    cutoff: u64,
) -> Result<f64> {
    let ratio = tau / kappa;
    let table = q.table();
    let mut r_count = 0u64;
    let mut q_count = 0u64;
    let mut max_dev = 0.0f64;
    for rank in 0..table.prime_count(cutoff.min(table.limit()))? {
        if q.contains_rank(rank) {
            q_count += 1;
        }
        if r.contains_rank(rank) {
            r_count += 1;
        }
        max_dev = max_dev.max((r_count as f64 - ratio * q_count as f64).abs());
    }
    Ok(max_dev)
}

/// A selected pair `(r_k, s_k)` inside block `k` of `N` consecutive primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPair {
    /// 1-based block index.
    pub block: usize,
    pub r: u64,
    pub s: u64,
}

/// Pairs chosen per block of `N` consecutive primes (by global prime
/// index), with skipped blocks recorded.
#[derive(Debug, Clone)]
pub struct PairSequence {
    pub block_size: usize,
    pub pairs: Vec<BlockPair>,
    pub skipped_blocks: Vec<usize>,
}

/// For each complete block of `N` consecutive primes below the cutoff,
/// pick `r_k` as the least element of `R` in the block and `s_k` as the
/// least element of `Q \ R` in the block exceeding `r_k`. Blocks admitting
/// no such pair are skipped, not fatal.
pub fn block_pairs(
    r: &PrimeSubset,
    q: &PrimeSubset,
    block_size: usize,
    cutoff: u64,
) -> Result<PairSequence> {
    if block_size == 0 {
        return Err(Error::InvalidArgument("block size must be >= 1".into()));
    }
    if !r.difference(q).is_empty() {
        return Err(Error::InvalidArgument("R must be a subset of Q".into()));
    }
    let table = q.table();
    let n_ranks = table.prime_count(cutoff.min(table.limit()))?;
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    let mut block = 0usize;
    while (block + 1) * block_size <= n_ranks {
        let lo = block * block_size;
        let hi = lo + block_size;
        let r_rank = (lo..hi).find(|&i| r.contains_rank(i));
        let pair = r_rank.and_then(|ri| {
            (ri + 1..hi)
                .find(|&i| q.contains_rank(i) && !r.contains_rank(i))
                .map(|si| BlockPair {
                    block: block + 1,
                    r: table.primes()[ri],
                    s: table.primes()[si],
                })
        });
        match pair {
            Some(p) => pairs.push(p),
            None => skipped.push(block + 1),
        }
        block += 1;
    }
    Ok(PairSequence {
        block_size,
        pairs,
        skipped_blocks: skipped,
    })
}

/// Smallest block size `N <= max_n` such that every complete block below
/// the cutoff holds at least two elements of `R`, at least two of `Q \ R`,
/// and admits a pair `r < s` under the `block_pairs` selection rule.
pub fn choose_block_size(
    r: &PrimeSubset,
    q: &PrimeSubset,
    cutoff: u64,
    max_n: usize,
) -> Result<usize> {
    let table = q.table();
    let n_ranks = table.prime_count(cutoff.min(table.limit()))?;
    'candidate: for n in 2..=max_n {
        let mut block_start = 0usize;
        while block_start + n <= n_ranks {
            let hi = block_start + n;
            let mut r_count = 0usize;
            let mut s_count = 0usize;
            let mut first_r: Option<usize> = None;
            let mut pair_ok = false;
            for i in block_start..hi {
                if r.contains_rank(i) {
                    r_count += 1;
                    first_r.get_or_insert(i);
                } else if q.contains_rank(i) {
                    s_count += 1;
                    if first_r.is_some() {
                        pair_ok = true;
                    }
                }
            }
            if r_count < 2 || s_count < 2 || !pair_ok {
                continue 'candidate;
            }
            block_start = hi;
        }
        return Ok(n);
    }
    Err(Error::BlockSizeNotFound { max_tried: max_n })
}

/// The correction series of a pair sequence:
/// `q_k = log(r_k/(r_k-1)) - log(s_k/(s_k-1))` and `q'_k = 1/r_k - 1/s_k`.
#[derive(Debug, Clone)]
pub struct QSeries {
    pub q: Vec<f64>,
    pub q_prime: Vec<f64>,
}

/// Compute the series and assert its shape: every `q_k > 0`, and
/// `0.5 q_k < q'_k < 1.5 q_k` from `ratio_check_from` (0-based) on.
pub fn q_series(pairs: &PairSequence, ratio_check_from: usize) -> Result<QSeries> {
    if pairs.pairs.is_empty() {
        return Err(Error::InvalidArgument("pair sequence is empty".into()));
    }
    let mut q = Vec::with_capacity(pairs.pairs.len());
    let mut q_prime = Vec::with_capacity(pairs.pairs.len());
    for (k, pair) in pairs.pairs.iter().enumerate() {
        if pair.r >= pair.s {
            return Err(Error::InvariantViolation(format!(
                "pair {k} has r = {} >= s = {}",
                pair.r, pair.s
            )));
        }
        let qk = ln_p_ratio(pair.r) - ln_p_ratio(pair.s);
        let qpk = (pair.s - pair.r) as f64 / (pair.r as f64 * pair.s as f64);
        if !(qk > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "q_{k} = {qk} is not positive for pair ({}, {})",
                pair.r, pair.s
            )));
        }
        if k >= ratio_check_from && !(0.5 * qk < qpk && qpk < 1.5 * qk) {
            return Err(Error::InvariantViolation(format!(
                "q'_{k} = {qpk} outside (0.5 q_{k}, 1.5 q_{k}) with q_{k} = {qk}"
            )));
        }
        q.push(qk);
        q_prime.push(qpk);
    }
    Ok(QSeries { q, q_prime })
}

/// Analytic tail bound `sum_{k > K} q_k <= 2N / (1.4 K^0.4)`, from the
/// blockwise bound `q_k <= 2N / k^1.4`.
pub fn q_tail_bound(block_size: usize, last_index: usize) -> f64 {
    2.0 * block_size as f64 / (1.4 * (last_index as f64).powf(0.4))
}

/// Smallest index `M` such that `q_n <= sum_{k > n} q_k + allowance`
/// holds for every `n >= M`. The allowance stands in for the uncomputed
/// tail of the underlying infinite series; pair sequences pass their
/// analytic tail bound.
pub fn dominance_start(q: &[f64], allowance: f64) -> usize {
    let mut tail = 0.0f64;
    let mut start = 0usize;
    // Scan backwards: a violation at n pushes the start past n.
    for n in (0..q.len()).rev() {
        if q[n] > tail + allowance && start <= n {
            start = n + 1;
        }
        tail += q[n];
    }
    start
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// A sign assignment steering `sum f(k) q_k` to a target.
#[derive(Debug, Clone)]
pub struct SignSolution {
    pub signs: Vec<Sign>,
    pub achieved: f64,
    pub residual: f64,
    /// Unconditional residual bound: `max(q_last, max_n(q_n - tail_n))`.
    pub residual_bound: f64,
}

/// Greedy sign assignment: scan ascending with the running remainder
/// `e = target - sum_{j <= k} f(j) q_j`, choosing `f(k) = +1` when
/// `e >= 0`. The dominance condition `q_n <= sum_{k > n} q_k` is verified
/// against the finite tails plus `tail_allowance` (the analytic bound for
/// the uncomputed part of the series), not assumed; the residual is then
/// guaranteed to stay within `max(q_last, largest dominance gap)`.
pub fn sign_solve(q: &[f64], target: f64, tail_allowance: f64) -> Result<SignSolution> {
    if q.is_empty() {
        return Err(Error::InvalidArgument("sign series is empty".into()));
    }
    if q.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "sign series terms must be positive and finite".into(),
        ));
    }
    let mut total_sum = KahanSum::default();
    for &v in q {
        total_sum.add(v);
    }
    let total = total_sum.value();
    if target.abs() > total * (1.0 + 1e-12) {
        return Err(Error::InfeasibleTarget {
            target,
            lo: -total,
            hi: total,
        });
    }

    // Verify dominance rather than assuming it, and record the largest
    // gap against the finite tails.
    let mut tail = 0.0f64;
    let mut max_gap = 0.0f64;
    let mut violation: Option<(usize, f64, f64)> = None;
    for n in (0..q.len()).rev() {
        if q[n] > tail + tail_allowance {
            violation = Some((n, q[n], tail + tail_allowance));
        }
        max_gap = max_gap.max(q[n] - tail);
        tail += q[n];
    }
    if let Some((index, term, tail)) = violation {
        return Err(Error::DominanceViolated { index, term, tail });
    }

    let mut signs = Vec::with_capacity(q.len());
    let mut e = target;
    for &v in q {
        if e >= 0.0 {
            signs.push(Sign::Plus);
            e -= v;
        } else {
            signs.push(Sign::Minus);
            e += v;
        }
    }
    let mut achieved_sum = KahanSum::default();
    for (&v, &f) in q.iter().zip(&signs) {
        achieved_sum.add(f.value() * v);
    }
    let achieved = achieved_sum.value();
    Ok(SignSolution {
        signs,
        achieved,
        residual: achieved - target,
        residual_bound: q.last().unwrap().max(max_gap),
    })
}

/// Result of the Mertens adjustment: the corrected subset `R''` plus the
/// exact bookkeeping of how far it moved from `R`.
#[derive(Debug, Clone)]
pub struct Adjusted {
    pub subset: PrimeSubset,
    /// Start index of the sign-corrected tail (0-based into the pairs).
    pub m_start: usize,
    /// Residual target for the sign function: `d = log(a) - c'`.
    pub d: f64,
    pub drops: u64,
    pub adds: u64,
    pub swaps: u64,
    pub sign_residual: f64,
    /// `log` of the achieved Mertens statistic at the cutoff.
    pub achieved_log: f64,
    pub target_log: f64,
    /// `N_1 + 1` where `N_1` counts drops and additions.
    pub count_bound: u64,
    /// Measured `max_x |R''(x) - R(x)|`.
    pub max_count_dev: u64,
    /// Measured `max_x |R''(x) - R'(x)|` (swap locality; at most 1).
    pub max_swap_dev: u64,
}

fn log_mertens(subset: &PrimeSubset, tau: f64, cutoff: u64) -> Result<f64> {
    let table = subset.table();
    let n = table.prime_count(cutoff.min(table.limit()))?;
    let mut member = KahanSum::default();
    let mut all = KahanSum::default();
    for (rank, &p) in table.primes()[..n].iter().enumerate() {
        let t = ln_p_ratio(p);
        all.add(t);
        if subset.contains_rank(rank) {
            member.add(t);
        }
    }
    Ok(member.value() - tau * all.value())
}

fn max_count_deviation(a: &PrimeSubset, b: &PrimeSubset, cutoff: u64) -> Result<u64> {
    let table = a.table();
    let mut ca = 0i64;
    let mut cb = 0i64;
    let mut max_dev = 0i64;
    for rank in 0..table.prime_count(cutoff.min(table.limit()))? {
        if a.contains_rank(rank) {
            ca += 1;
        }
        if b.contains_rank(rank) {
            cb += 1;
        }
        max_dev = max_dev.max((ca - cb).abs());
    }
    Ok(max_dev as u64)
}

/// Adjust `R` toward the Mertens target `a`: drop or add finitely many
/// non-pair elements (largest first, so low-range counts are untouched)
/// until the sign series can bridge the remaining gap, then swap
/// `r_k <-> s_k` where the solved sign function is -1.
///
/// A swap at index `k` lowers the log-Mertens sum by `q_k`, so the sign
/// tail can shift it anywhere in `[-sum q, 0]`. The drop/add walk
/// therefore lands `m(R')` in `[log a, log a + sum_{k>=M} q_k]`, leaving a
/// residual `d` within reach of the sign function.
///
/// `M` starts where dominance holds (verified against the analytic
/// q-tail) and advances further while the non-pair elements alone cannot
/// reach the window: each released head pair frees `r_k` for dropping and
/// `s_k` for adding at the price of `q_k` of window width, which is a
/// strict gain in reach (`q_k < log-term of r_k`).
pub fn adjust(
    r: &PrimeSubset,
    q: &PrimeSubset,
    pairs: &PairSequence,
    series: &QSeries,
    a_target: f64,
    tau: f64,
    cutoff: u64,
) -> Result<Adjusted> {
    if !(a_target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Mertens target must be positive, got {a_target}"
        )));
    }
    let target_log = a_target.ln();
    let tail_allowance = q_tail_bound(pairs.block_size, pairs.pairs.len());
    let dominance_from = dominance_start(&series.q, tail_allowance);
    if dominance_from >= series.q.len() {
        return Err(Error::InvariantViolation(
            "dominance condition never holds in the tabled q range".into(),
        ));
    }

    let m0 = log_mertens(r, tau, cutoff)?;

    // Reach with the sign tail starting at index m: the walk may lower
    // m(R) by every non-pair log term plus the released head pairs, and
    // the final window is [log a, log a + width(m)].
    let mut base_drop_cap = KahanSum::default();
    let mut base_add_cap = KahanSum::default();
    {
        let mut protected = PrimeSubset::empty(Arc::clone(r.table()));
        for pair in &pairs.pairs[dominance_from..] {
            protected.insert(pair.r)?;
            protected.insert(pair.s)?;
        }
        for p in r.difference(&protected).iter_primes() {
            base_drop_cap.add(ln_p_ratio(p));
        }
        for p in q.difference(r).difference(&protected).iter_primes() {
            base_add_cap.add(ln_p_ratio(p));
        }
    }
    let mut width: f64 = {
        let mut w = KahanSum::default();
        for &v in &series.q[dominance_from..] {
            w.add(v);
        }
        w.value()
    };
    let mut drop_cap = base_drop_cap.value();
    let mut add_cap = base_add_cap.value();
    let mut m_start = dominance_from;
    let reachable = |width: f64, drop_cap: f64, add_cap: f64| {
        target_log >= m0 - drop_cap - width && target_log <= m0 + add_cap
    };
    while m_start + 1 < series.q.len() && !reachable(width, drop_cap, add_cap) {
        let pair = &pairs.pairs[m_start];
        drop_cap += ln_p_ratio(pair.r);
        add_cap += ln_p_ratio(pair.s);
        width -= series.q[m_start];
        m_start += 1;
    }
    if !reachable(width, drop_cap, add_cap) {
        return Err(Error::AdjustUnreachable {
            target: a_target,
            lo: (m0 - drop_cap - width).exp(),
            hi: (m0 + add_cap).exp(),
        });
    }
    let half_width = width / 2.0;

    let mut protected = PrimeSubset::empty(Arc::clone(r.table()));
    for pair in &pairs.pairs[m_start..] {
        protected.insert(pair.r)?;
        protected.insert(pair.s)?;
    }
    let droppable: Vec<u64> = r.difference(&protected).iter_primes().collect();
    let addable: Vec<u64> = q
        .difference(r)
        .difference(&protected)
        .iter_primes()
        .collect();

    // Shrink the window a hair so the fresh recomputation below cannot
    // drift outside it.
    let margin = (1e-9f64).min(width / 4.0);
    let lo = target_log + margin;
    let hi = target_log + width - margin;
    let mut m = m0;
    let mut adjusted = r.clone();
    let mut drop_iter = droppable.iter().rev();
    let mut add_iter = addable.iter().rev();
    let mut drops = 0u64;
    let mut adds = 0u64;
    while m < lo || m > hi {
        let step = if m > hi {
            match drop_iter.next() {
                Some(&p) => {
                    adjusted.remove(p)?;
                    drops += 1;
                    -ln_p_ratio(p)
                }
                None => 0.0,
            }
        } else {
            match add_iter.next() {
                Some(&p) => {
                    adjusted.insert(p)?;
                    adds += 1;
                    ln_p_ratio(p)
                }
                None => 0.0,
            }
        };
        if step == 0.0 {
            return Err(Error::AdjustUnreachable {
                target: a_target,
                lo: (m - width).exp(),
                hi: m.exp(),
            });
        }
        m += step;
    }

    // Recompute from scratch: the incremental m only steered the walk.
    let r_prime = adjusted.clone();
    let c_prime = log_mertens(&r_prime, tau, cutoff)? - half_width;
    let d = (target_log - c_prime).clamp(-half_width, half_width);
    let solution = sign_solve(&series.q[m_start..], 2.0 * d, tail_allowance)?;
    let mut swaps = 0u64;
    for (offset, sign) in solution.signs.iter().enumerate() {
        if *sign == Sign::Minus {
            let pair = &pairs.pairs[m_start + offset];
            adjusted.remove(pair.r)?;
            adjusted.insert(pair.s)?;
            swaps += 1;
        }
    }

    let achieved_log = log_mertens(&adjusted, tau, cutoff)?;
    let n1 = drops + adds;
    Ok(Adjusted {
        max_count_dev: max_count_deviation(&adjusted, r, cutoff)?,
        max_swap_dev: max_count_deviation(&adjusted, &r_prime, cutoff)?,
        subset: adjusted,
        m_start,
        d,
        drops,
        adds,
        swaps,
        sign_residual: solution.residual,
        achieved_log,
        target_log,
        count_bound: n1 + 1,
    })
}

/// Knobs for the partition builder.
#[derive(Debug, Clone)]
pub struct PartitionOptions {
    /// Smallest accepted cutoff.
    pub min_cutoff: u64,
    /// Search bound for the adaptive block size.
    pub max_block_size: usize,
    /// First index required to satisfy the `q'/q` ratio window.
    pub ratio_check_from: usize,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            min_cutoff: 100_000,
            max_block_size: 10_000,
            ratio_check_from: 0,
        }
    }
}

/// Diagnostics for one peeled level.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    pub tau_target: f64,
    pub a_target: f64,
    pub kappa: f64,
    pub block_size: usize,
    pub pairs: usize,
    pub skipped_blocks: usize,
    pub greedy_max_dev: f64,
    pub m_start: usize,
    pub drops: u64,
    pub adds: u64,
    pub swaps: u64,
    pub sign_residual: f64,
    pub q_tail_bound: f64,
    pub achieved_mertens_log: f64,
    pub count_bound: u64,
    pub max_count_dev: u64,
}

/// Achieved statistics of one part at the cutoff.
#[derive(Debug, Clone, Copy)]
pub struct PartStats {
    pub count: usize,
    /// `P_i(cutoff) * log(cutoff) / cutoff`, to compare against `tau_i`.
    pub density: f64,
    /// Mertens statistic at the cutoff, to compare against `a_i`.
    pub mertens: f64,
}

/// Disjoint prime classes covering all primes up to the cutoff.
#[derive(Debug, Clone)]
pub struct PrimePartition {
    spec: PartitionSpec,
    cutoff: u64,
    parts: Vec<PrimeSubset>,
    levels: Vec<LevelReport>,
    achieved: Vec<PartStats>,
}

impl PrimePartition {
    pub fn spec(&self) -> &PartitionSpec {
        &self.spec
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn parts(&self) -> &[PrimeSubset] {
        &self.parts
    }

    pub fn levels(&self) -> &[LevelReport] {
        &self.levels
    }

    pub fn achieved(&self) -> &[PartStats] {
        &self.achieved
    }

    /// Exact disjoint cover: pairwise intersections empty and the union of
    /// the parts is every prime `<= cutoff`.
    pub fn verify_exact_cover(&self) -> Result<()> {
        for i in 0..self.parts.len() {
            for j in i + 1..self.parts.len() {
                if !self.parts[i].is_disjoint(&self.parts[j]) {
                    return Err(Error::InvariantViolation(format!(
                        "parts {i} and {j} intersect"
                    )));
                }
            }
        }
        let table = self.parts[0].table();
        let n = table.prime_count(self.cutoff)?;
        for rank in 0..n {
            let covered: usize = self
                .parts
                .iter()
                .map(|p| p.contains_rank(rank) as usize)
                .sum();
            if covered != 1 {
                return Err(Error::InvariantViolation(format!(
                    "prime {} is covered {covered} times",
                    table.primes()[rank]
                )));
            }
        }
        Ok(())
    }

    /// Serialize as one header line `h tau... a... cutoff` followed by one
    /// `p part_index` line per prime (1-based part indices).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.spec.h.to_string());
        for t in &self.spec.tau {
            let _ = write!(out, " {t}");
        }
        for v in &self.spec.a {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " {}", self.cutoff);
        let table = self.parts[0].table();
        let n = table.prime_count(self.cutoff).expect("cutoff within table");
        for rank in 0..n {
            let idx = self
                .parts
                .iter()
                .position(|p| p.contains_rank(rank))
                .expect("exact cover");
            let _ = writeln!(out, "{} {}", table.primes()[rank], idx + 1);
        }
        out
    }

    /// Parse the `to_text` format, resieving the base table and recomputing
    /// the achieved statistics.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty partition file".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.into(),
        };
        let h: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| parse_err(1, "missing h"))?;
        if fields.len() != 2 * h + 2 {
            return Err(parse_err(1, "header must be `h tau.. a.. cutoff`"));
        }
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| parse_err(1, &format!("bad float {s}")))
        };
        let tau: Vec<f64> = fields[1..=h]
            .iter()
            .map(|s| parse_f64(s))
            .collect::<Result<_>>()?;
        let a: Vec<f64> = fields[h + 1..=2 * h]
            .iter()
            .map(|s| parse_f64(s))
            .collect::<Result<_>>()?;
        let cutoff: u64 = fields[2 * h + 1]
            .parse()
            .map_err(|_| parse_err(1, "bad cutoff"))?;
        let spec = PartitionSpec::new(tau, a)?;

        let table = Arc::new(sieve_primes(cutoff)?);
        let mut parts: Vec<PrimeSubset> = (0..h)
            .map(|_| PrimeSubset::empty(Arc::clone(&table)))
            .collect();
        let mut expected_rank = 0usize;
        for (i, line) in lines {
            let line_no = i + 1;
            let mut it = line.split_whitespace();
            let p: u64 = it
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| parse_err(line_no, "missing prime"))?;
            let idx: usize = it
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| parse_err(line_no, "missing part index"))?;
            if it.next().is_some() {
                return Err(parse_err(line_no, "trailing fields"));
            }
            if idx == 0 || idx > h {
                return Err(parse_err(line_no, "part index out of range"));
            }
            if table.primes().get(expected_rank) != Some(&p) {
                return Err(parse_err(line_no, "primes must appear in order, complete"));
            }
            parts[idx - 1].insert(p)?;
            expected_rank += 1;
        }
        if expected_rank != table.prime_count(cutoff)? {
            return Err(Error::Parse {
                line: expected_rank + 2,
                msg: "file ends before covering every prime".into(),
            });
        }

        let achieved = achieved_stats(&spec, &parts, cutoff)?;
        let partition = PrimePartition {
            spec,
            cutoff,
            parts,
            levels: Vec::new(),
            achieved,
        };
        partition.verify_exact_cover()?;
        Ok(partition)
    }
}

fn achieved_stats(
    spec: &PartitionSpec,
    parts: &[PrimeSubset],
    cutoff: u64,
) -> Result<Vec<PartStats>> {
    parts
        .iter()
        .zip(spec.tau())
        .map(|(part, &tau)| {
            let count = part.count_leq(cutoff)?;
            Ok(PartStats {
                count,
                density: count as f64 * (cutoff as f64).ln() / cutoff as f64,
                mertens: mertens_statistic(part, tau, cutoff)?,
            })
        })
        .collect()
}

/// Build the partition by peeling classes recursively: level `j` selects
/// `Q_{j+1}` inside `Q_j` with the residual density and Mertens targets,
/// and `P_{j+1} = Q_j \ Q_{j+1}`; the final class is the residue.
pub fn build_partition(
    spec: &PartitionSpec,
    table: Arc<PrimeTable>,
    cutoff: u64,
) -> Result<PrimePartition> {
    build_partition_with(spec, table, cutoff, &PartitionOptions::default())
}

pub fn build_partition_with(
    spec: &PartitionSpec,
    table: Arc<PrimeTable>,
    cutoff: u64,
    options: &PartitionOptions,
) -> Result<PrimePartition> {
    if cutoff < options.min_cutoff {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff} below the configured minimum {}",
            options.min_cutoff
        )));
    }
    if cutoff > table.limit() {
        return Err(Error::OutOfRange {
            what: "cutoff",
            value: cutoff,
            limit: table.limit(),
        });
    }

    let mut q_current = PrimeSubset::all(Arc::clone(&table));
    let mut kappa = 1.0f64;
    let mut parts = Vec::with_capacity(spec.h());
    let mut levels = Vec::new();

    for level in 0..spec.h() - 1 {
        let tau_target: f64 = spec.tau()[level + 1..].iter().sum();
        let a_target: f64 = spec.a()[level + 1..].iter().product();

        let r = greedy_select(&q_current, tau_target, kappa, cutoff)?;
        let greedy_max_dev = tracking_deviation(&r, &q_current, tau_target, kappa, cutoff)?;
        let block_size = choose_block_size(&r, &q_current, cutoff, options.max_block_size)?;
        let pairs = block_pairs(&r, &q_current, block_size, cutoff)?;
        let series = q_series(&pairs, options.ratio_check_from)?;
        let adjusted = adjust(&r, &q_current, &pairs, &series, a_target, tau_target, cutoff)?;

        levels.push(LevelReport {
            level,
            tau_target,
            a_target,
            kappa,
            block_size,
            pairs: pairs.pairs.len(),
            skipped_blocks: pairs.skipped_blocks.len(),
            greedy_max_dev,
            m_start: adjusted.m_start,
            drops: adjusted.drops,
            adds: adjusted.adds,
            swaps: adjusted.swaps,
            sign_residual: adjusted.sign_residual,
            q_tail_bound: q_tail_bound(block_size, pairs.pairs.len()),
            achieved_mertens_log: adjusted.achieved_log,
            count_bound: adjusted.count_bound,
            max_count_dev: adjusted.max_count_dev,
        });

        parts.push(q_current.difference(&adjusted.subset));
        q_current = adjusted.subset;
        kappa = tau_target;
    }
    parts.push(q_current);

    let achieved = achieved_stats(spec, &parts, cutoff)?;
    let partition = PrimePartition {
        spec: spec.clone(),
        cutoff,
        parts,
        levels,
        achieved,
    };
    partition.verify_exact_cover()?;
    Ok(partition)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(limit: u64) -> Arc<PrimeTable> {
        Arc::new(sieve_primes(limit).unwrap())
    }

    #[test]
    fn greedy_alternating_pattern() {
        // Simulating the rule by hand on the 25 primes below 100 takes
        // every other prime of Q starting with 2.
        let t = table(100);
        let q = PrimeSubset::all(Arc::clone(&t));
        let r = greedy_select(&q, 0.5, 1.0, 100).unwrap();
        assert_eq!(
            r.iter_primes().collect::<Vec<_>>(),
            vec![2, 5, 11, 17, 23, 31, 41, 47, 59, 67, 73, 83, 97]
        );
        assert!(tracking_deviation(&r, &q, 0.5, 1.0, 100).unwrap() <= 2.0);
    }

    #[test]
    fn greedy_single_prime_and_precondition() {
        let t = table(10);
        let q = PrimeSubset::from_primes(Arc::clone(&t), [2]).unwrap();
        let r = greedy_select(&q, 0.3, 0.6, 10).unwrap();
        assert_eq!(r.iter_primes().collect::<Vec<_>>(), vec![2]);
        assert!(greedy_select(&q, 0.6, 0.6, 10).is_err());
        assert!(greedy_select(&q, 0.7, 0.6, 10).is_err());
    }

    #[test]
    fn greedy_tracks_within_two_for_uneven_ratio() {
        let t = table(100_000);
        let q = PrimeSubset::all(Arc::clone(&t));
        for (tau, kappa) in [(0.3, 1.0), (0.7, 1.0), (0.2, 0.9)] {
            let r = greedy_select(&q, tau, kappa, 100_000).unwrap();
            let dev = tracking_deviation(&r, &q, tau, kappa, 100_000).unwrap();
            assert!(dev <= 2.0, "tau={tau} kappa={kappa}: dev {dev}");
        }
    }

    #[test]
    fn block_pair_selection() {
        let t = table(7);
        let q = PrimeSubset::all(Arc::clone(&t));
        let r = PrimeSubset::from_primes(Arc::clone(&t), [2, 5]).unwrap();
        let seq = block_pairs(&r, &q, 4, 7).unwrap();
        assert_eq!(seq.pairs, vec![BlockPair { block: 1, r: 2, s: 3 }]);
        assert!(seq.skipped_blocks.is_empty());
    }

    #[test]
    fn block_with_no_usable_pair_is_skipped() {
        // R sits above every Q \ R element in the single block.
        let t = table(7);
        let q = PrimeSubset::all(Arc::clone(&t));
        let r = PrimeSubset::from_primes(Arc::clone(&t), [5, 7]).unwrap();
        let seq = block_pairs(&r, &q, 4, 7).unwrap();
        assert!(seq.pairs.is_empty());
        assert_eq!(seq.skipped_blocks, vec![1]);
    }

    #[test]
    fn block_pairs_requires_subset() {
        let t = table(20);
        let q = PrimeSubset::from_primes(Arc::clone(&t), [2, 3]).unwrap();
        let r = PrimeSubset::from_primes(Arc::clone(&t), [5]).unwrap();
        assert!(block_pairs(&r, &q, 2, 20).is_err());
    }

    #[test]
    fn alternating_membership_pairs_every_block() {
        let t = table(1000);
        let q = PrimeSubset::all(Arc::clone(&t));
        let r = greedy_select(&q, 0.5, 1.0, 1000).unwrap();
        let seq = block_pairs(&r, &q, 4, 1000).unwrap();
        assert!(seq.skipped_blocks.is_empty());
        let series = q_series(&seq, 0).unwrap();
        assert!(series.q.iter().all(|&v| v > 0.0));
        assert_eq!(series.q.len(), seq.pairs.len());
        // Summability proxy: partial sums increase and stay below the
        // tabled total plus the analytic tail bound.
        let total: f64 = series.q.iter().sum();
        let ceiling = total + q_tail_bound(seq.block_size, seq.pairs.len());
        let mut partial = 0.0;
        for &v in &series.q {
            let next = partial + v;
            assert!(next > partial && next <= ceiling);
            partial = next;
        }
    }

    #[test]
    fn q_series_values() {
        let seq = PairSequence {
            block_size: 4,
            pairs: vec![BlockPair { block: 1, r: 2, s: 3 }],
            skipped_blocks: vec![],
        };
        let series = q_series(&seq, 0).unwrap();
        assert!((series.q[0] - (4f64 / 3.0).ln()).abs() < 1e-15);
        assert!((series.q_prime[0] - (0.5 - 1.0 / 3.0)).abs() < 1e-15);

        // Far pairs: q and q' agree to 1% relative.
        let seq = PairSequence {
            block_size: 4,
            pairs: vec![BlockPair {
                block: 1,
                r: 1_000_003,
                s: 1_000_033,
            }],
            skipped_blocks: vec![],
        };
        let series = q_series(&seq, 0).unwrap();
        assert!(((series.q[0] - series.q_prime[0]) / series.q[0]).abs() < 0.01);

        // r >= s is an invariant violation.
        let bad = PairSequence {
            block_size: 4,
            pairs: vec![BlockPair { block: 1, r: 5, s: 5 }],
            skipped_blocks: vec![],
        };
        assert!(q_series(&bad, 0).is_err());
    }

    /// The exact tail of the infinite binary series beyond 2^-20.
    const BINARY_TAIL: f64 = 9.5367431640625e-7; // 2^-20

    #[test]
    fn dominance_start_examples() {
        let binary: Vec<f64> = (1..=20).map(|k| 2f64.powi(-k)).collect();
        assert_eq!(dominance_start(&binary, BINARY_TAIL), 0);
        // Without any allowance the head violates up to the truncation.
        assert_eq!(dominance_start(&[5.0, 1.0, 0.5], 0.5), 1);
        assert_eq!(dominance_start(&[1.0], 1.0), 0);
        assert_eq!(dominance_start(&[1.0], 0.0), 1);
    }

    #[test]
    fn sign_solve_binary_expansion() {
        let q: Vec<f64> = (1..=20).map(|k| 2f64.powi(-k)).collect();
        let sol = sign_solve(&q, 0.0, BINARY_TAIL).unwrap();
        // Each term equals its infinite tail: the canonical +,-,-,...,-.
        assert_eq!(sol.signs[0], Sign::Plus);
        assert!(sol.signs[1..].iter().all(|&s| s == Sign::Minus));
        assert!((sol.residual.abs() - 2f64.powi(-20)).abs() < 1e-18);

        let total: f64 = q.iter().sum();
        let sol = sign_solve(&q, total, BINARY_TAIL).unwrap();
        assert!(sol.signs.iter().all(|&s| s == Sign::Plus));
        assert_eq!(sol.residual, 0.0);

        let sol = sign_solve(&q, -total, BINARY_TAIL).unwrap();
        assert!(sol.signs.iter().all(|&s| s == Sign::Minus));
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn sign_solve_residual_bound_over_many_targets() {
        let q: Vec<f64> = (1..=20).map(|k| 2f64.powi(-k)).collect();
        let total: f64 = q.iter().sum();
        for i in 0..=200 {
            let target = -total + 2.0 * total * i as f64 / 200.0;
            let sol = sign_solve(&q, target, BINARY_TAIL).unwrap();
            assert!(
                sol.residual.abs() <= sol.residual_bound + 1e-18,
                "target {target}: residual {}",
                sol.residual
            );
            assert!(sol.residual_bound <= 2f64.powi(-20) + 1e-18);
        }
    }

    #[test]
    fn sign_solve_matches_exhaustive_search_scale() {
        // Greedy residual is within the guaranteed bound and never beats
        // the exhaustive optimum.
        let q: Vec<f64> = (1..=16).map(|k| 1.0 / (k as f64).powf(1.4) / 10.0).collect();
        let target = 0.01;
        let sol = sign_solve(&q, target, 0.05).unwrap();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << 16) {
            let mut sum = 0.0;
            for (k, &v) in q.iter().enumerate() {
                sum += if mask >> k & 1 == 1 { v } else { -v };
            }
            best = best.min((sum - target).abs());
        }
        assert!(sol.residual.abs() + 1e-15 >= best);
        assert!(sol.residual.abs() <= sol.residual_bound + 1e-15);
    }

    #[test]
    fn sign_solve_errors() {
        let q = [0.5, 0.25];
        match sign_solve(&q, 1.0, 0.25) {
            Err(Error::InfeasibleTarget { hi, .. }) => assert!((hi - 0.75).abs() < 1e-15),
            other => panic!("expected infeasible target, got {other:?}"),
        }
        match sign_solve(&[1.0, 0.1], 0.0, 0.0) {
            Err(Error::DominanceViolated { index, .. }) => assert_eq!(index, 0),
            other => panic!("expected dominance violation, got {other:?}"),
        }
        assert!(sign_solve(&[], 0.0, 0.0).is_err());
        assert!(sign_solve(&[0.0, 0.1], 0.0, 0.0).is_err());
    }

    #[test]
    fn adjust_reaches_mertens_target() {
        let t = table(100_000);
        let q = PrimeSubset::all(Arc::clone(&t));
        let tau = 0.4;
        let cutoff = 100_000;
        let r = greedy_select(&q, tau, 1.0, cutoff).unwrap();
        let n = choose_block_size(&r, &q, cutoff, 10_000).unwrap();
        let pairs = block_pairs(&r, &q, n, cutoff).unwrap();
        let series = q_series(&pairs, 0).unwrap();
        for a_target in [1.0, 1.3, 0.7] {
            let adj = adjust(&r, &q, &pairs, &series, a_target, tau, cutoff).unwrap();
            // Achieved log equals the target up to half the sign residual.
            let gap = (adj.achieved_log - a_target.ln()).abs();
            assert!(
                gap <= adj.sign_residual.abs() / 2.0 + 1e-9,
                "a={a_target}: gap {gap}, residual {}",
                adj.sign_residual
            );
            // Swap locality and the recorded count bound.
            assert!(adj.max_swap_dev <= 1);
            assert!(adj.max_count_dev <= adj.count_bound);
            // The realized Mertens statistic matches exp(achieved_log).
            let stat = mertens_statistic(&adj.subset, tau, cutoff).unwrap();
            assert!((stat.ln() - adj.achieved_log).abs() < 1e-12);
        }
    }

    #[test]
    fn adjust_unreachable_target_reports_interval() {
        let t = table(2000);
        let q = PrimeSubset::all(Arc::clone(&t));
        let r = greedy_select(&q, 0.5, 1.0, 2000).unwrap();
        let n = choose_block_size(&r, &q, 2000, 10_000).unwrap();
        let pairs = block_pairs(&r, &q, n, 2000).unwrap();
        let series = q_series(&pairs, 0).unwrap();
        match adjust(&r, &q, &pairs, &series, 1e9, 0.5, 2000) {
            Err(Error::AdjustUnreachable { lo, hi, .. }) => {
                assert!(lo < hi && hi < 1e9);
            }
            other => panic!("expected unreachable target, got {other:?}"),
        }
    }

    #[test]
    fn partition_spec_validation() {
        assert!(PartitionSpec::new(vec![0.5, 0.5], vec![1.0, 1.0]).is_ok());
        assert!(PartitionSpec::new(vec![1.0], vec![1.0]).is_ok());
        assert!(PartitionSpec::new(vec![0.5, 0.4], vec![1.0, 1.0]).is_err());
        assert!(PartitionSpec::new(vec![0.5, 0.5], vec![2.0, 1.0]).is_err());
        assert!(PartitionSpec::new(vec![0.5, 0.5], vec![2.0]).is_err());
        assert!(PartitionSpec::new(vec![1.5, -0.5], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn h1_partition_is_all_primes() {
        let t = table(100_000);
        let spec = PartitionSpec::new(vec![1.0], vec![1.0]).unwrap();
        let partition = build_partition(&spec, Arc::clone(&t), 100_000).unwrap();
        assert_eq!(partition.parts().len(), 1);
        assert_eq!(partition.parts()[0].len(), t.len());
        let stats = &partition.achieved()[0];
        assert_eq!(stats.count, t.len());
        // tau = 1, a = 1: the Mertens statistic cancels exactly.
        assert!((stats.mertens - 1.0).abs() <= 1e-12);
        partition.verify_exact_cover().unwrap();
    }

    #[test]
    fn balanced_h2_partition_exact_cover() {
        let t = table(100_000);
        let spec = PartitionSpec::new(vec![0.5, 0.5], vec![1.0, 1.0]).unwrap();
        let partition = build_partition(&spec, Arc::clone(&t), 100_000).unwrap();
        partition.verify_exact_cover().unwrap();
        // Counts sum to pi(x) at every prime x.
        let mut counts = vec![0usize; 2];
        for rank in 0..t.len() {
            for (i, part) in partition.parts().iter().enumerate() {
                if part.contains_rank(rank) {
                    counts[i] += 1;
                }
            }
            assert_eq!(counts.iter().sum::<usize>(), rank + 1);
        }
        // Both Mertens statistics sit near 1: log-gap bounded by the sign
        // residual plus the analytic q-tail.
        let level = &partition.levels()[0];
        let tol = level.sign_residual.abs() / 2.0 + 1e-9;
        assert!(
            partition.achieved()[1].mertens.ln().abs() <= tol,
            "part 2 mertens {} tolerance {tol}",
            partition.achieved()[1].mertens
        );
        assert!(level.greedy_max_dev <= 2.0);
    }

    #[test]
    fn h3_partition_disjoint_and_complete() {
        let t = table(100_000);
        let spec = PartitionSpec::new(vec![0.2, 0.3, 0.5], vec![2.0, 1.0, 0.5]).unwrap();
        let partition = build_partition(&spec, Arc::clone(&t), 100_000).unwrap();
        partition.verify_exact_cover().unwrap();
        let total: usize = partition.achieved().iter().map(|s| s.count).sum();
        assert_eq!(total, 9592); // pi(1e5)
    }

    #[test]
    fn partition_text_roundtrip_is_byte_identical() {
        let t = table(2000);
        let spec = PartitionSpec::new(vec![0.4, 0.6], vec![1.25, 0.8]).unwrap();
        let options = PartitionOptions {
            min_cutoff: 1000,
            ..PartitionOptions::default()
        };
        let partition = build_partition_with(&spec, t, 2000, &options).unwrap();
        let text = partition.to_text();
        let parsed = PrimePartition::from_text(&text).unwrap();
        assert_eq!(parsed.to_text(), text);
        parsed.verify_exact_cover().unwrap();
        assert_eq!(parsed.cutoff(), 2000);
    }

    #[test]
    fn partition_parse_rejects_gaps() {
        let bad = "2 0.5 0.5 1 1 10\n2 1\n5 2\n7 1\n";
        assert!(PrimePartition::from_text(bad).is_err());
        let bad_index = "2 0.5 0.5 1 1 10\n2 1\n3 3\n5 2\n7 1\n";
        assert!(PrimePartition::from_text(bad_index).is_err());
    }
}
