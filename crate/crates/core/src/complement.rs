//! Constructive multiplicative complements: smooth-number families over a
//! prime partition, and the checkpointed recursive construction that grows
//! all `h` sets in lockstep while keeping every checkpoint exactly
//! verified.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use crate::analytic::gamma;
use crate::bits::{floor_mul_y23, isqrt};
use crate::error::{Error, Result};
use crate::primes::{FactorSieve, PrimeSubset, PrimeTable};
use crate::repr::{verify_complement, ComplementFamily, IntegerSet, Verification};

/// All `n <= x` whose prime factors lie in `part`; 1 is always included
/// as the empty product. Walks the factor sieve once: `n` is smooth iff
/// its smallest prime factor is in the part and `n / spf(n)` is smooth.
pub fn smooth_numbers(part: &PrimeSubset, x: u64, sieve: &FactorSieve) -> Result<IntegerSet> {
    if x > sieve.limit() {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            limit: sieve.limit(),
        });
    }
    let mut in_part = vec![false; (x + 1) as usize];
    for p in part.iter_primes() {
        if p > x {
            break;
        }
        in_part[p as usize] = true;
    }
    let mut smooth = vec![false; (x + 1) as usize];
    let mut elements = Vec::new();
    if x >= 1 {
        smooth[1] = true;
        elements.push(1);
    }
    for n in 2..=x {
        let p = sieve.spf(n)?;
        if in_part[p as usize] && smooth[(n / p) as usize] {
            smooth[n as usize] = true;
            elements.push(n);
        }
    }
    IntegerSet::new(elements, x)
}

/// Prediction of the count of a multiplicatively-structured set from its
/// prime density `tau` and Mertens constant `a`.
#[derive(Debug, Clone, Copy)]
pub struct WirsingOdoniPrediction {
    pub tau: f64,
    pub a: f64,
    /// `C = a / gamma(tau)`.
    pub constant: f64,
    /// `C * x / (log x)^(1 - tau)`.
    pub predicted_count: f64,
}

pub fn wirsing_odoni_predict(tau: f64, a: f64, x: f64) -> Result<WirsingOdoniPrediction> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::Domain(format!("tau must be in (0, 1), got {tau}")));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("a must be positive, got {a}")));
    }
    if !(x >= 2.0) {
        return Err(Error::Domain(format!("x must be >= 2, got {x}")));
    }
    let constant = a / gamma(tau)?;
    Ok(WirsingOdoniPrediction {
        tau,
        a,
        constant,
        predicted_count: constant * x / x.ln().powf(1.0 - tau),
    })
}

/// Achieved-versus-predicted figures for one smooth family member.
#[derive(Debug, Clone, Copy)]
pub struct SmoothSetReport {
    pub index: usize,
    pub tau: f64,
    pub a: f64,
    pub count: usize,
    /// `A_i(x) (log x)^(1 - tau_i) / x`.
    pub density_statistic: f64,
    pub prediction: WirsingOdoniPrediction,
    /// `count / predicted_count`.
    pub ratio: f64,
}

/// A built smooth family with its per-set report.
#[derive(Debug, Clone)]
pub struct SmoothFamily {
    pub family: ComplementFamily,
    pub reports: Vec<SmoothSetReport>,
}

/// The smooth-number family of a partition: `A_i` collects the integers
/// whose prime factors all lie in `P_i`. Unique factorization makes this
/// an exact complement on `[1, x]`, and the builder verifies that by
/// brute force; a failure is an internal error, not a data error.
pub fn build_smooth_family(
    partition: &crate::partition::PrimePartition,
    x: u64,
    sieve: &FactorSieve,
) -> Result<SmoothFamily> {
    if x > partition.cutoff() {
        return Err(Error::OutOfRange {
            what: "x",
            value: x,
            limit: partition.cutoff(),
        });
    }
    let sets: Vec<IntegerSet> = partition
        .parts()
        .iter()
        .map(|part| smooth_numbers(part, x, sieve))
        .collect::<Result<_>>()?;
    {
        let refs: Vec<&IntegerSet> = sets.iter().collect();
        if let Verification::FirstFailure(n) = verify_complement(&refs, x, sieve)? {
            return Err(Error::InvariantViolation(format!(
                "smooth family over an exact partition failed verification at n = {n}"
            )));
        }
    }
    let reports = sets
        .iter()
        .enumerate()
        .map(|(i, set)| {
            let tau = partition.spec().tau()[i];
            let a = partition.spec().a()[i];
            let count = set.len();
            // tau = 1 only occurs for h = 1 where the prediction
            // degenerates; report the exact density statistic either way.
            let prediction = if tau < 1.0 {
                wirsing_odoni_predict(tau, a, x as f64)?
            } else {
                WirsingOdoniPrediction {
                    tau,
                    a,
                    constant: a,
                    predicted_count: x as f64,
                }
            };
            Ok(SmoothSetReport {
                index: i,
                tau,
                a,
                count,
                density_statistic: set.density_statistic(tau, x)?,
                prediction,
                ratio: count as f64 / prediction.predicted_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let family = ComplementFamily::new(sets, vec![x], 0.0, 0, false)?;
    Ok(SmoothFamily { family, reports })
}

/// The four fresh-element classes of one growth step from `x` to `y`.
#[derive(Debug, Clone)]
pub struct FSets {
    pub x: u64,
    pub y: u64,
    pub n_param: u64,
    pub f0: IntegerSet,
    pub f1: IntegerSet,
    pub f2: IntegerSet,
    /// One class per residue of the prime-counting function mod `h`;
    /// index `j - 1` holds the class `pi(p) = j (mod h)`, residue 0
    /// mapping to `j = h`.
    pub f3: Vec<IntegerSet>,
}

/// Construct the F-sets for a step `x -> y`. Requires `y > x^2`, which
/// makes every element exceed `x` (so checkpoint states are preserved),
/// and `y` within the prime table.
pub fn f_sets(x: u64, y: u64, n_param: u64, h: usize, table: &PrimeTable) -> Result<FSets> {
    if x == 0 || y <= x.saturating_mul(x) {
        return Err(Error::InvalidArgument(format!(
            "F-set construction needs y > x^2, got x = {x}, y = {y}"
        )));
    }
    f_sets_raw(x, y, n_param, h, table)
}

/// The defining inequalities without the freshness precondition; the
/// checkpointed builder filters the result to `(x, y]` instead.
fn f_sets_raw(x: u64, y: u64, n_param: u64, h: usize, table: &PrimeTable) -> Result<FSets> {
    if h == 0 {
        return Err(Error::InvalidArgument("order h must be >= 1".into()));
    }
    if n_param == 0 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    if y > table.limit() {
        return Err(Error::OutOfRange {
            what: "y",
            value: y,
            limit: table.limit(),
        });
    }

    // F0: integers in (x, x * y^(2/3)], capped at y.
    let f0_hi = floor_mul_y23(x, y).min(y);
    let f0: Vec<u64> = (x + 1..=f0_hi).collect();

    let primes = table.primes();
    let above = |bound_cubed: u128| primes.partition_point(|&p| (p as u128).pow(3) <= bound_cubed);

    // F1: p * v with y^(2/3) < p < y/x and v <= sqrt(x).
    let mut f1 = Vec::new();
    let v_max = isqrt(x);
    let start = above((y as u128).pow(2));
    for &p in &primes[start..] {
        if p * x >= y {
            break;
        }
        for v in 1..=v_max {
            let pv = p * v;
            if pv <= y {
                f1.push(pv);
            }
        }
    }

    // F2: p * v with y/x < p <= y/N and v <= sqrt(y/p).
    let mut f2 = Vec::new();
    let f2_start = primes.partition_point(|&p| p * x <= y);
    for &p in &primes[f2_start..] {
        if p * n_param > y {
            break;
        }
        let mut v = 1u64;
        while v * v * p <= y {
            f2.push(p * v);
            v += 1;
        }
    }

    // F3^j: primes in (y/N, y] split by pi(p) mod h.
    let mut f3: Vec<Vec<u64>> = vec![Vec::new(); h];
    let f3_start = primes.partition_point(|&p| p * n_param <= y);
    let f3_end = primes.partition_point(|&p| p <= y);
    for (rank, &p) in primes.iter().enumerate().take(f3_end).skip(f3_start) {
        let residue = (rank + 1) % h; // pi(p) = rank + 1
        let j = if residue == 0 { h } else { residue };
        f3[j - 1].push(p);
    }

    let finish = |mut v: Vec<u64>| -> Result<IntegerSet> {
        v.sort_unstable();
        v.dedup();
        IntegerSet::new(v, y)
    };
    Ok(FSets {
        x,
        y,
        n_param,
        f0: finish(f0)?,
        f1: finish(f1)?,
        f2: finish(f2)?,
        f3: f3.into_iter().map(finish).collect::<Result<_>>()?,
    })
}

/// Checkpoint growth policy for the recursive construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthPolicy {
    /// `y = x^3`.
    Cubed,
    /// `y = max(x^3 + 1, 10x)`: keeps `y > x^2` strictly so the F-sets
    /// stay fresh without filtering.
    CubedPlusOne,
}

impl GrowthPolicy {
    fn next(self, x: u64) -> u64 {
        let cube = x.saturating_mul(x).saturating_mul(x);
        match self {
            GrowthPolicy::Cubed => cube,
            GrowthPolicy::CubedPlusOne => cube.saturating_add(1).max(x.saturating_mul(10)),
        }
    }
}

/// Parameters of the checkpointed construction.
#[derive(Debug, Clone)]
pub struct CheckpointConfig {
    pub h: usize,
    pub epsilon: f64,
    pub steps: usize,
    /// Override for the start size `N` (the formula `ceil(256/eps^2) + 1`
    /// explodes for small eps); recorded in the result.
    pub n_override: Option<u64>,
    pub growth: GrowthPolicy,
}

/// `N = ceil(256 / eps^2) + 1`.
pub fn start_size(epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok((256.0 / (epsilon * epsilon)).ceil() as u64 + 1)
}

/// Diagnostics for one growth step `x -> y`.
#[derive(Debug, Clone)]
pub struct CheckpointRecord {
    pub index: usize,
    pub x: u64,
    pub y: u64,
    /// Whether the capped `y` fell to `x^2` or below; fresh elements are
    /// filtered to `(x, y]` either way, so checkpoint states survive.
    pub degenerate: bool,
    pub f0_size: u64,
    pub f1_size: u64,
    pub f2_size: u64,
    pub f3_sizes: Vec<u64>,
    pub added_per_set: Vec<u64>,
    pub sizes: Vec<u64>,
    /// Exact check that each set restricted to `[x]` equals its previous
    /// checkpoint state.
    pub prefix_consistent: bool,
    /// `max_j |A_j| * log y / y`.
    pub density_statistic: f64,
    /// `1/h + epsilon`, the comparison value; not asserted at this scale.
    pub density_bound: f64,
    pub density_ok: bool,
}

/// A built checkpoint family with per-step records.
#[derive(Debug, Clone)]
pub struct CheckpointFamily {
    pub family: ComplementFamily,
    pub steps: Vec<CheckpointRecord>,
    pub truncated: bool,
}

/// Grow `h` sets from `[N]` through `steps` checkpoints, unioning the
/// F-sets at each step (F3 split by residue class), verifying the
/// complement property exactly at every checkpoint, and recording the
/// density condition rather than asserting it. Growth is capped at the
/// sieve/table limit; a capped step keeps correctness because fresh
/// elements are filtered to `(x, y]` and the capped range lands inside
/// F0, so representability is preserved.
pub fn build_checkpoint_family(
    config: &CheckpointConfig,
    table: &Arc<PrimeTable>,
    sieve: &FactorSieve,
) -> Result<CheckpointFamily> {
    if config.h == 0 {
        return Err(Error::InvalidArgument("order h must be >= 1".into()));
    }
    let n_start = match config.n_override {
        Some(n) => {
            if n < 2 {
                return Err(Error::InvalidArgument("N override must be >= 2".into()));
            }
            n
        }
        None => start_size(config.epsilon)?,
    };
    let cap = table.limit().min(sieve.limit());
    if n_start > cap {
        return Err(Error::OutOfRange {
            what: "N",
            value: n_start,
            limit: cap,
        });
    }

    let mut sets: Vec<Vec<u64>> = vec![(1..=n_start).collect(); config.h];
    let mut checkpoints = vec![n_start];
    let mut records = Vec::new();
    let mut truncated = false;

    for index in 1..=config.steps {
        let x = *checkpoints.last().unwrap();
        let y = config.growth.next(x).min(cap);
        if y <= x {
            truncated = true;
            break;
        }
        let degenerate = y <= x.saturating_mul(x);
        let fs = f_sets_raw(x, y, n_start, config.h, table)?;

        // Shared fresh elements, filtered to (x, y] so condition (3)
        // holds structurally.
        let mut shared: Vec<u64> = Vec::new();
        for set in [&fs.f0, &fs.f1, &fs.f2] {
            shared.extend(set.elements().iter().copied().filter(|&v| v > x));
        }
        shared.sort_unstable();
        shared.dedup();

        let mut added = Vec::with_capacity(config.h);
        let mut sizes = Vec::with_capacity(config.h);
        let mut prefix_consistent = true;
        for (j, set) in sets.iter_mut().enumerate() {
            let before = set.len();
            let mut fresh = shared.clone();
            fresh.extend(
                fs.f3[j]
                    .elements()
                    .iter()
                    .copied()
                    .filter(|&v| v > x),
            );
            fresh.sort_unstable();
            fresh.dedup();
            // All fresh elements exceed x and the set was complete on
            // [1, x], so appending keeps it sorted; dedup against the old
            // tail is unnecessary but checked in debug builds.
            debug_assert!(set.last().is_none_or(|&last| {
                fresh.first().is_none_or(|&first| first > last.min(x))
            }));
            let mut merged: Vec<u64> = Vec::with_capacity(before + fresh.len());
            merged.extend(set.iter().copied());
            merged.extend(fresh.iter().copied().filter(|&v| v > *set.last().unwrap_or(&0)));
            let prefix_len = merged.partition_point(|&v| v <= x);
            prefix_consistent &= merged[..prefix_len] == set[..];
            *set = merged;
            added.push((set.len() - before) as u64);
            sizes.push(set.len() as u64);
        }
        if !prefix_consistent {
            return Err(Error::InvariantViolation(
                "a checkpoint step modified the frozen prefix".into(),
            ));
        }

        let integer_sets: Vec<IntegerSet> = sets
            .iter()
            .map(|v| IntegerSet::new(v.clone(), y))
            .collect::<Result<_>>()?;
        {
            let refs: Vec<&IntegerSet> = integer_sets.iter().collect();
            if let Verification::FirstFailure(n) = verify_complement(&refs, y, sieve)? {
                return Err(Error::InvariantViolation(format!(
                    "checkpoint family failed verification at n = {n} (step {index})"
                )));
            }
        }

        let max_size = *sizes.iter().max().unwrap() as f64;
        let density_statistic = max_size * (y as f64).ln() / y as f64;
        let density_bound = 1.0 / config.h as f64 + config.epsilon;
        records.push(CheckpointRecord {
            index,
            x,
            y,
            degenerate,
            f0_size: fs.f0.len() as u64,
            f1_size: fs.f1.len() as u64,
            f2_size: fs.f2.len() as u64,
            f3_sizes: fs.f3.iter().map(|s| s.len() as u64).collect(),
            added_per_set: added,
            sizes,
            prefix_consistent,
            density_statistic,
            density_bound,
            density_ok: density_statistic <= density_bound,
        });
        checkpoints.push(y);
    }

    let limit = *checkpoints.last().unwrap();
    let integer_sets: Vec<IntegerSet> = sets
        .into_iter()
        .map(|v| IntegerSet::new(v, limit))
        .collect::<Result<_>>()?;
    let family = ComplementFamily::new(
        integer_sets,
        checkpoints,
        config.epsilon,
        n_start,
        config.n_override.is_some(),
    )?;
    Ok(CheckpointFamily {
        family,
        steps: records,
        truncated,
    })
}

/// Serialize a family: header `h epsilon N checkpoints...`, then one line
/// per set holding the element count followed by the ascending elements.
pub fn write_family<W: Write>(family: &ComplementFamily, mut w: W) -> Result<()> {
    write!(w, "{} {} {}", family.h(), family.epsilon(), family.n_start())?;
    for c in family.checkpoints() {
        write!(w, " {c}")?;
    }
    writeln!(w)?;
    for set in family.sets() {
        write!(w, "{}", set.len())?;
        for &a in set.elements() {
            write!(w, " {a}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn family_to_text(family: &ComplementFamily) -> String {
    let mut buf = Vec::new();
    write_family(family, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("family text is ascii")
}

pub fn write_family_file(family: &ComplementFamily, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    write_family(family, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Parse the `write_family` format.
pub fn parse_family(text: &str) -> Result<ComplementFamily> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty family file".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 4 {
        return Err(Error::Parse {
            line: 1,
            msg: "header must be `h epsilon N checkpoints...`".into(),
        });
    }
    let h: usize = fields[0].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: "bad h".into(),
    })?;
    let epsilon: f64 = fields[1].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: "bad epsilon".into(),
    })?;
    let n_start: u64 = fields[2].parse().map_err(|_| Error::Parse {
        line: 1,
        msg: "bad N".into(),
    })?;
    let checkpoints: Vec<u64> = fields[3..]
        .iter()
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad checkpoint {f}"),
            })
        })
        .collect::<Result<_>>()?;
    let limit = *checkpoints.last().ok_or(Error::Parse {
        line: 1,
        msg: "no checkpoints".into(),
    })?;

    let mut sets = Vec::with_capacity(h);
    for _ in 0..h {
        let (i, line) = lines.next().ok_or(Error::Parse {
            line: h + 2,
            msg: format!("expected {h} set lines"),
        })?;
        let line_no = i + 1;
        let mut it = line.split_whitespace();
        let count: usize = it
            .next()
            .and_then(|f| f.parse().ok())
            .ok_or(Error::Parse {
                line: line_no,
                msg: "missing element count".into(),
            })?;
        let elements: Vec<u64> = it
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad element {f}"),
                })
            })
            .collect::<Result<_>>()?;
        if elements.len() != count {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("declared {count} elements, found {}", elements.len()),
            });
        }
        sets.push(IntegerSet::new(elements, limit)?);
    }
    if let Some((i, _)) = lines.next() {
        return Err(Error::Parse {
            line: i + 1,
            msg: "trailing lines after the last set".into(),
        });
    }
    ComplementFamily::new(sets, checkpoints, epsilon, n_start, false)
}
