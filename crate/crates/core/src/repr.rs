//! Representation functions, counting functions, and exact brute-force
//! verification of the basis/complement property.

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::primes::FactorSieve;

/// Finite sorted set of positive integers, complete on `[1, limit]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSet {
    elements: Vec<u64>,
    limit: u64,
}

impl IntegerSet {
    /// Build from a strictly increasing vector of elements in `[1, limit]`.
    pub fn new(elements: Vec<u64>, limit: u64) -> Result<Self> {
        if let Some(&first) = elements.first() {
            if first < 1 {
                return Err(Error::InvalidArgument("elements must be >= 1".into()));
            }
        }
        if !elements.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "elements must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = elements.last() {
            if last > limit {
                return Err(Error::InvalidArgument(format!(
                    "element {last} exceeds the set limit {limit}"
                )));
            }
        }
        Ok(IntegerSet { elements, limit })
    }

    /// The full interval `[1, limit]`.
    pub fn range(limit: u64) -> Self {
        IntegerSet {
            elements: (1..=limit).collect(),
            limit,
        }
    }

    pub fn empty(limit: u64) -> Self {
        IntegerSet {
            elements: Vec::new(),
            limit,
        }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// Counting function `A(x)`: rank query on the sorted elements.
    pub fn counting(&self, x: u64) -> Result<usize> {
        if x > self.limit {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                limit: self.limit,
            });
        }
        Ok(self.rank(x))
    }

    #[inline]
    fn rank(&self, x: u64) -> usize {
        self.elements.partition_point(|&a| a <= x)
    }

    /// `A(x) * (log x)^(1 - tau) / x` with the natural logarithm.
    pub fn density_statistic(&self, tau: f64, x: u64) -> Result<f64> {
        if x < 2 {
            return Err(Error::Domain(format!(
                "density statistic needs x >= 2, got {x}"
            )));
        }
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Domain(format!("tau must be in (0, 1], got {tau}")));
        }
        let count = self.counting(x)? as f64;
        let x = x as f64;
        Ok(count * x.ln().powf(1.0 - tau) / x)
    }

    /// Membership bitset over `[0, x]` for fast divisor probing.
    fn membership(&self, x: u64) -> BitSet {
        let mut bits = BitSet::new(x as usize + 1);
        for &a in &self.elements {
            if a > x {
                break;
            }
            bits.set(a as usize, true);
        }
        bits
    }
}

/// `x` values on a geometric grid from 2 to `x_max` (always including
/// `x_max`), deduplicated after rounding down to integers.
pub fn geometric_grid(x_max: u64, ratio: f64) -> Vec<u64> {
    assert!(ratio > 1.0, "grid ratio must exceed 1");
    let mut grid = Vec::new();
    let mut x = 2f64;
    while (x as u64) < x_max {
        if grid.last() != Some(&(x as u64)) {
            grid.push(x as u64);
        }
        x *= ratio;
    }
    if x_max >= 2 && grid.last() != Some(&x_max) {
        grid.push(x_max);
    }
    grid
}

fn check_range(sets: &[&IntegerSet], n: u64, sieve: &FactorSieve) -> Result<()> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("family must be nonempty".into()));
    }
    for s in sets {
        if n > s.limit() {
            return Err(Error::OutOfRange {
                what: "n",
                value: n,
                limit: s.limit(),
            });
        }
    }
    if n > sieve.limit() {
        return Err(Error::OutOfRange {
            what: "n",
            value: n,
            limit: sieve.limit(),
        });
    }
    Ok(())
}

/// `S_{A_1,...,A_h}(n)`: ordered tuples with `a_i` in `A_i` and product `n`,
/// counted by dynamic programming over the divisor lattice of `n`.
pub fn joint_repr_count(sets: &[&IntegerSet], n: u64, sieve: &FactorSieve) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    check_range(sets, n, sieve)?;
    let divs = sieve.divisors(n)?;
    let pos = |d: u64| divs.binary_search(&d).expect("divisor closure");
    // ways[i] = number of tuples over the levels processed so far with
    // product divs[i].
    let mut ways = vec![0u64; divs.len()];
    ways[0] = 1;
    for set in sets {
        let member: Vec<bool> = divs.iter().map(|&d| set.contains(d)).collect();
        let mut next = vec![0u64; divs.len()];
        for (i, &d) in divs.iter().enumerate() {
            let mut total = 0u64;
            for (j, &e) in divs[..=i].iter().enumerate() {
                if member[j] && d % e == 0 {
                    total += ways[pos(d / e)];
                }
            }
            next[i] = total;
        }
        ways = next;
    }
    Ok(ways[divs.len() - 1])
}

/// `S_{A,h}(n)`: ordered `h`-tuples from a single set with product `n`.
pub fn repr_count(set: &IntegerSet, h: usize, n: u64, sieve: &FactorSieve) -> Result<u64> {
    if h == 0 {
        return Err(Error::InvalidArgument("order h must be >= 1".into()));
    }
    let family: Vec<&IntegerSet> = std::iter::repeat_n(set, h).collect();
    joint_repr_count(&family, n, sieve)
}

/// `sum_{n <= x} S_{A_1,...,A_h}(n)`, computed in a single pass enumerating
/// tuples with product `<= x` (rank query on the innermost set) rather than
/// divisor-enumerating each `n`.
pub fn summatory_repr(sets: &[&IntegerSet], x: u64) -> Result<u64> {
    if sets.is_empty() {
        return Err(Error::InvalidArgument("family must be nonempty".into()));
    }
    if x == 0 {
        return Err(Error::InvalidArgument("x must be positive".into()));
    }
    for s in sets {
        if x > s.limit() {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                limit: s.limit(),
            });
        }
    }

    fn rec(sets: &[&IntegerSet], level: usize, budget: u64, total: &mut u64) {
        if level + 1 == sets.len() {
            *total += sets[level].rank(budget) as u64;
            return;
        }
        let set = sets[level];
        for &a in &set.elements[..set.rank(budget)] {
            rec(sets, level + 1, budget / a, total);
        }
    }

    let mut total = 0u64;
    rec(sets, 0, x, &mut total);
    Ok(total)
}

/// Outcome of an exact verification scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verification {
    Verified,
    FirstFailure(u64),
}

impl Verification {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verification::Verified)
    }

    pub fn first_failure(&self) -> Option<u64> {
        match self {
            Verification::Verified => None,
            Verification::FirstFailure(n) => Some(*n),
        }
    }
}

/// Scan `n = 1, 2, ..., x` in increasing order and report the least `n`
/// with no representation `n = a_1 * ... * a_h`, `a_i` in `A_i`. Each `n`
/// short-circuits at the first witness tuple, so the cost of a verified
/// range is dominated by cheap witnesses.
pub fn verify_complement(
    sets: &[&IntegerSet],
    x: u64,
    sieve: &FactorSieve,
) -> Result<Verification> {
    if x == 0 {
        return Err(Error::InvalidArgument("x must be positive".into()));
    }
    check_range(sets, x, sieve)?;

    let bits: Vec<BitSet> = sets.iter().map(|s| s.membership(x)).collect();

    fn witness(bits: &[BitSet], level: usize, m: u64, divs: &[u64]) -> bool {
        if level + 1 == bits.len() {
            return bits[level].get(m as usize);
        }
        for &d in divs {
            if d > m {
                break;
            }
            if m.is_multiple_of(d) && bits[level].get(d as usize) && witness(bits, level + 1, m / d, divs) {
                return true;
            }
        }
        false
    }

    for n in 1..=x {
        // Cheap probes first: 1 * ... * 1 * n in each arrangement of the
        // outer levels is by far the most common witness.
        let h = bits.len();
        let mut found = h == 1 && bits[0].get(n as usize);
        if !found && h >= 2 {
            let ones_prefix = |k: usize| bits[..k].iter().all(|b| b.get(1));
            let ones_suffix = |k: usize| bits[k + 1..].iter().all(|b| b.get(1));
            found = (bits[h - 1].get(n as usize) && ones_prefix(h - 1))
                || (bits[0].get(n as usize) && ones_suffix(0));
        }
        if !found {
            let divs = sieve.divisors(n)?;
            found = witness(&bits, 0, n, &divs);
        }
        if !found {
            return Ok(Verification::FirstFailure(n));
        }
    }
    Ok(Verification::Verified)
}

/// Basis verification: all `h` factors drawn from the same set.
pub fn verify_basis(set: &IntegerSet, h: usize, x: u64, sieve: &FactorSieve) -> Result<Verification> {
    if h == 0 {
        return Err(Error::InvalidArgument("order h must be >= 1".into()));
    }
    let family: Vec<&IntegerSet> = std::iter::repeat_n(set, h).collect();
    verify_complement(&family, x, sieve)
}

/// A family of sets frozen at an increasing sequence of checkpoints, as
/// produced by the constructive builders.
#[derive(Debug, Clone)]
pub struct ComplementFamily {
    sets: Vec<IntegerSet>,
    checkpoints: Vec<u64>,
    epsilon: f64,
    n_start: u64,
    n_overridden: bool,
}

impl ComplementFamily {
    pub fn new(
        sets: Vec<IntegerSet>,
        checkpoints: Vec<u64>,
        epsilon: f64,
        n_start: u64,
        n_overridden: bool,
    ) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::InvalidArgument("family must be nonempty".into()));
        }
        if checkpoints.is_empty() {
            return Err(Error::InvalidArgument(
                "checkpoint sequence must be nonempty".into(),
            ));
        }
        if !checkpoints.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "checkpoints must be strictly increasing".into(),
            ));
        }
        let last = *checkpoints.last().unwrap();
        for s in &sets {
            if s.limit() < last {
                return Err(Error::InvalidArgument(format!(
                    "set limit {} below the last checkpoint {last}",
                    s.limit()
                )));
            }
        }
        Ok(ComplementFamily {
            sets,
            checkpoints,
            epsilon,
            n_start,
            n_overridden,
        })
    }

    pub fn h(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[IntegerSet] {
        &self.sets
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn limit(&self) -> u64 {
        *self.checkpoints.last().unwrap()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_start(&self) -> u64 {
        self.n_start
    }

    pub fn n_overridden(&self) -> bool {
        self.n_overridden
    }

    /// Exact verification over `[1, x]`.
    pub fn verify(&self, x: u64, sieve: &FactorSieve) -> Result<Verification> {
        let refs: Vec<&IntegerSet> = self.sets.iter().collect();
        verify_complement(&refs, x, sieve)
    }
}
