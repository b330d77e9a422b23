//! Sieving, factorization, prime counting, and Mertens-type products over
//! prime subsets.

use std::sync::Arc;

use crate::bits::{isqrt, BitSet, KahanSum};
use crate::error::{Error, Result};

/// Largest limit `sieve_primes` accepts (the prime vector alone is ~800 MB
/// near this point).
pub const PRIME_TABLE_BUDGET: u64 = 4_000_000_000;

/// Largest limit `FactorSieve::new` accepts (4 bytes per candidate).
pub const FACTOR_SIEVE_BUDGET: u64 = 268_435_456;

/// Default number of candidates sieved per segment.
pub const DEFAULT_SEGMENT: u64 = 100_000_000;

/// All primes up to a fixed limit, in increasing order.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// `pi(x)`: number of primes `<= x`.
    pub fn prime_count(&self, x: u64) -> Result<usize> {
        if x > self.limit {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                limit: self.limit,
            });
        }
        Ok(self.primes.partition_point(|&p| p <= x))
    }

    /// Rank of `p` among the tabled primes (0-based), if `p` is prime.
    pub fn rank_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    pub fn contains(&self, p: u64) -> bool {
        self.rank_of(p).is_some()
    }
}

/// Sieve all primes `<= limit` with the default segment size.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    sieve_primes_segmented(limit, DEFAULT_SEGMENT)
}

/// Segmented sieve of Eratosthenes. Base primes up to `sqrt(limit)` are
/// sieved in one pass; the rest of the range is processed in segments of
/// `segment` candidates so memory stays bounded for limits up to 1e9.
pub fn sieve_primes_segmented(limit: u64, segment: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return Err(Error::InvalidArgument(format!(
            "sieve limit must be >= 2, got {limit}"
        )));
    }
    if limit > PRIME_TABLE_BUDGET {
        return Err(Error::ResourceBudget {
            what: "prime table",
            requested: limit,
            budget: PRIME_TABLE_BUDGET,
        });
    }
    let segment = segment.max(64);
    let root = isqrt(limit);

    // Plain sieve for the base range [2, sqrt(limit)].
    let mut base = vec![true; (root + 1) as usize];
    base[0] = false;
    if root >= 1 {
        base[1] = false;
    }
    let mut i = 2u64;
    while i * i <= root {
        if base[i as usize] {
            let mut j = i * i;
            while j <= root {
                base[j as usize] = false;
                j += i;
            }
        }
        i += 1;
    }
    let base_primes: Vec<u64> = (2..=root).filter(|&p| base[p as usize]).collect();

    let approx = if limit > 16 {
        (limit as f64 / (limit as f64).ln() * 1.15) as usize
    } else {
        8
    };
    let mut primes = Vec::with_capacity(approx);
    primes.extend_from_slice(&base_primes);

    let mut lo = root + 1;
    let mut mark = vec![false; segment as usize];
    while lo <= limit {
        let hi = (lo + segment - 1).min(limit);
        let width = (hi - lo + 1) as usize;
        mark[..width].fill(false);
        for &p in &base_primes {
            if p * p > hi {
                break;
            }
            let mut j = lo.div_ceil(p) * p;
            if j < p * p {
                j = p * p;
            }
            while j <= hi {
                mark[(j - lo) as usize] = true;
                j += p;
            }
        }
        for (off, &composite) in mark[..width].iter().enumerate() {
            if !composite {
                primes.push(lo + off as u64);
            }
        }
        lo = hi + 1;
    }

    Ok(PrimeTable { limit, primes })
}

/// Smallest-prime-factor table for `[2, limit]`, backing fast factorization
/// and smooth-number scans.
#[derive(Debug, Clone)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 1 {
            return Err(Error::InvalidArgument(
                "factor sieve limit must be >= 1".into(),
            ));
        }
        if limit > FACTOR_SIEVE_BUDGET {
            return Err(Error::ResourceBudget {
                what: "factor sieve",
                requested: limit,
                budget: FACTOR_SIEVE_BUDGET,
            });
        }
        let mut spf = vec![0u32; (limit + 1) as usize];
        let mut i = 2u64;
        while i <= limit {
            if spf[i as usize] == 0 {
                spf[i as usize] = i as u32;
                if let Some(start) = i.checked_mul(i) {
                    let mut j = start;
                    while j <= limit {
                        if spf[j as usize] == 0 {
                            spf[j as usize] = i as u32;
                        }
                        j += i;
                    }
                }
            }
            i += 1;
        }
        Ok(FactorSieve { limit, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.limit {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                limit: self.limit,
            });
        }
        Ok(())
    }

    /// Smallest prime factor of `n >= 2`.
    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        if n == 1 {
            return Err(Error::InvalidArgument("1 has no prime factor".into()));
        }
        Ok(self.spf[n as usize] as u64)
    }

    /// Prime factorization of `n` with multiplicity, ascending. `n = 1`
    /// yields the empty product.
    pub fn factorize(&self, n: u64) -> Result<Vec<u64>> {
        self.check(n)?;
        let mut out = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            out.push(p);
            m /= p;
        }
        Ok(out)
    }

    /// Distinct prime factors with exponents, ascending by prime.
    pub fn factor_powers(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        let flat = self.factorize(n)?;
        let mut out: Vec<(u64, u32)> = Vec::new();
        for p in flat {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        Ok(out)
    }

    /// All divisors of `n`, sorted ascending.
    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        let powers = self.factor_powers(n)?;
        let mut divs = vec![1u64];
        for (p, e) in powers {
            let prev = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..prev {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        Ok(divs)
    }
}

/// `log(p / (p-1))`, accurate for large `p`.
#[inline]
pub fn ln_p_ratio(p: u64) -> f64 {
    (1.0 / (p as f64 - 1.0)).ln_1p()
}

/// A subset of the primes of a [`PrimeTable`], stored as a bitset indexed
/// by prime rank so set algebra is exact and cheap.
#[derive(Debug, Clone)]
pub struct PrimeSubset {
    table: Arc<PrimeTable>,
    bits: BitSet,
}

impl PrimeSubset {
    pub fn empty(table: Arc<PrimeTable>) -> Self {
        let bits = BitSet::new(table.len());
        PrimeSubset { table, bits }
    }

    pub fn all(table: Arc<PrimeTable>) -> Self {
        let bits = BitSet::filled(table.len());
        PrimeSubset { table, bits }
    }

    pub fn from_primes<I: IntoIterator<Item = u64>>(
        table: Arc<PrimeTable>,
        primes: I,
    ) -> Result<Self> {
        let mut s = PrimeSubset::empty(table);
        for p in primes {
            s.insert(p)?;
        }
        Ok(s)
    }

    pub fn table(&self) -> &Arc<PrimeTable> {
        &self.table
    }

    fn rank_checked(&self, p: u64) -> Result<usize> {
        self.table.rank_of(p).ok_or_else(|| {
            Error::InvalidArgument(format!("{p} is not a prime of the base table"))
        })
    }

    pub fn insert(&mut self, p: u64) -> Result<()> {
        let r = self.rank_checked(p)?;
        self.bits.set(r, true);
        Ok(())
    }

    pub fn remove(&mut self, p: u64) -> Result<()> {
        let r = self.rank_checked(p)?;
        self.bits.set(r, false);
        Ok(())
    }

    pub fn contains(&self, p: u64) -> bool {
        self.table.rank_of(p).is_some_and(|r| self.bits.get(r))
    }

    #[inline]
    pub fn contains_rank(&self, rank: usize) -> bool {
        self.bits.get(rank)
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Counting function of the subset: number of member primes `<= x`.
    pub fn count_leq(&self, x: u64) -> Result<usize> {
        Ok(self.bits.count_below(self.table.prime_count(x)?))
    }

    /// Member primes in increasing order.
    pub fn iter_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter_ones().map(|r| self.table.primes()[r])
    }

    fn compatible(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.table, &other.table) || self.table.limit() == other.table.limit()
    }

    pub fn union(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "prime subsets over different tables");
        PrimeSubset {
            table: Arc::clone(&self.table),
            bits: self.bits.union(&other.bits),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "prime subsets over different tables");
        PrimeSubset {
            table: Arc::clone(&self.table),
            bits: self.bits.difference(&other.bits),
        }
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "prime subsets over different tables");
        PrimeSubset {
            table: Arc::clone(&self.table),
            bits: self.bits.symmetric_difference(&other.bits),
        }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

/// Mertens-type statistic
/// `(prod_{p<=x, p in subset} p/(p-1)) * (prod_{p<=x} (p-1)/p)^tau`,
/// accumulated in log space and exponentiated only at the end.
pub fn mertens_statistic(subset: &PrimeSubset, tau: f64, x: u64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::Domain(format!("tau must be in (0, 1], got {tau}")));
    }
    let table = subset.table();
    if x > table.limit() {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            limit: table.limit(),
        });
    }
    let n = table.prime_count(x)?;
    let mut member = KahanSum::default();
    let mut all = KahanSum::default();
    for (rank, &p) in table.primes()[..n].iter().enumerate() {
        let t = ln_p_ratio(p);
        all.add(t);
        if subset.contains_rank(rank) {
            member.add(t);
        }
    }
    Ok((member.value() - tau * all.value()).exp())
}
