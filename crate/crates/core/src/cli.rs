//! Command-line front end: builds partitions and families, runs
//! verifications and density sweeps, and emits CSV and serialized
//! artifacts. Identical configurations produce byte-identical outputs;
//! nothing here consults the clock or any randomness.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::analytic::{constants_table, default_s_grid, scaled_dirichlet_probe};
use crate::complement::{
    build_checkpoint_family, build_smooth_family, family_to_text, parse_family, write_family_file,
    CheckpointConfig, GrowthPolicy,
};
use crate::error::{Error, Result};
use crate::partition::{build_partition, PartitionSpec, PrimePartition};
use crate::primes::{sieve_primes, FactorSieve};
use crate::repr::{geometric_grid, IntegerSet, Verification};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "multcomp",
    version,
    about = "Multiplicative bases and complements: constructions, verification, density statistics",
    after_help = "CSV outputs start with a `#` comment line echoing the tool version and the \
full resolved parameters. All commands are deterministic: the same configuration produces \
byte-identical files."
)]
pub struct Cli {
    /// Key=value config file supplying defaults; explicit flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density constants per order h.
    ///
    /// CSV columns: h,raikov_constant,upper_constant
    Constants {
        /// Largest order to tabulate.
        #[arg(long)]
        h_max: Option<u32>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a prime partition with prescribed tau and a targets.
    ///
    /// Partition file: header `h tau.. a.. cutoff`, then `p part` lines.
    /// Stats CSV columns: part,tau,a,count,density_statistic,mertens_statistic
    Partition {
        /// Comma-separated density targets (must sum to 1).
        #[arg(long)]
        tau: Option<String>,
        /// Comma-separated Mertens targets (must multiply to 1).
        #[arg(long)]
        a: Option<String>,
        /// Sieve cutoff.
        #[arg(long)]
        limit: Option<u64>,
        /// Partition artifact path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-part statistics CSV path (stdout when omitted).
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Smooth-number complement family over a partition.
    ///
    /// Stats CSV columns:
    /// set,tau,a,count,density_statistic,predicted_constant,predicted_count,ratio
    Complement5 {
        /// Partition artifact to load; omit to build one from --tau/--a.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        a: Option<String>,
        /// Range bound for the family.
        #[arg(long)]
        limit: Option<u64>,
        /// Family artifact path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Checkpointed recursive complement family.
    ///
    /// Stats CSV columns: step,x,y,degenerate,f0_size,f1_size,f2_size,
    /// max_set_size,density_statistic,density_bound,density_ok
    Complement8 {
        #[arg(long)]
        h: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
        /// Number of growth steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Override the start size N (recorded in the artifact header).
        #[arg(long)]
        n_override: Option<u64>,
        /// Growth policy: `cubed` (y = x^3) or `cubed-plus-one`.
        #[arg(long)]
        growth: Option<String>,
        /// Sieve cap; growth is clamped here.
        #[arg(long)]
        limit: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Exact verification of a family file: exit 0 when every n is
    /// representable, exit 1 printing the least counterexample.
    Verify {
        #[arg(long)]
        family: Option<PathBuf>,
        /// Verify on [1, limit] (defaults to the family limit).
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Density statistics of a family's sets on a geometric x-grid.
    ///
    /// CSV columns: set,x,count,density_statistic
    Density {
        #[arg(long)]
        family: Option<PathBuf>,
        /// Comma-separated tau per set (single value broadcasts).
        #[arg(long)]
        tau: Option<String>,
        #[arg(long)]
        limit: Option<u64>,
        /// Grid ratio (> 1).
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaled truncated Dirichlet sums of a family's sets over an s-grid.
    ///
    /// CSV columns: set,s,value,scaled,bound,flagged
    Dirichlet {
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        tau: Option<String>,
        /// Truncation cutoff (defaults to the family limit).
        #[arg(long)]
        cutoff: Option<u64>,
        /// Comma-separated s values (default: 1 + 2^-k, k = 1..20).
        #[arg(long)]
        s_grid: Option<String>,
        /// Flag slack factor.
        #[arg(long)]
        slack: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Key=value defaults loaded from `--config`; flags win on conflict.
#[derive(Debug, Default)]
struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or(Error::Parse {
                    line: i + 1,
                    msg: format!("expected key=value, got `{line}`"),
                })?;
                values.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigFile { values })
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key `{key}` has unparsable value `{raw}`"))
            }),
        }
    }
}

fn require<T>(flag: Option<T>, cfg: Result<Option<T>>, name: &str) -> Result<T> {
    flag.map(Ok)
        .or_else(|| cfg.transpose())
        .transpose()?
        .ok_or_else(|| Error::InvalidArgument(format!("missing required parameter --{name}")))
}

fn optional<T>(flag: Option<T>, cfg: Result<Option<T>>) -> Result<Option<T>> {
    Ok(match flag {
        Some(v) => Some(v),
        None => cfg?,
    })
}

fn parse_f64_list(raw: &str, name: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{s}` in --{name}")))
        })
        .collect()
}

/// Write the output to a file, or stdout when no path is given.
fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn csv_header(params: &str) -> String {
    format!("# multcomp {} | {params}\n", crate::VERSION)
}

/// Execute the parsed command. Returns the process exit code.
pub fn run(cli: Cli) -> Result<i32> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::Constants { h_max, out } => {
            let h_max = require(h_max, cfg.get("h-max"), "h-max")?;
            let out = optional(out, cfg.get("out"))?;
            let mut csv = csv_header(&format!("constants h-max={h_max}"));
            csv.push_str("h,raikov_constant,upper_constant\n");
            for row in constants_table(h_max)? {
                let _ = writeln!(csv, "{},{},{}", row.h, row.lower_raikov, row.upper);
            }
            emit(out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }

        Command::Partition {
            tau,
            a,
            limit,
            out,
            stats,
        } => {
            let tau = parse_f64_list(&require(tau, cfg.get("tau"), "tau")?, "tau")?;
            let a = parse_f64_list(&require(a, cfg.get("a"), "a")?, "a")?;
            let limit = require(limit, cfg.get("limit"), "limit")?;
            let out = require(out, cfg.get("out"), "out")?;
            let stats = optional(stats, cfg.get("stats"))?;

            let spec = PartitionSpec::new(tau, a)?;
            let table = Arc::new(sieve_primes(limit)?);
            let partition = build_partition(&spec, table, limit)?;
            std::fs::write(&out, partition.to_text())?;

            let params = format!(
                "partition tau={} a={} limit={limit} out={}",
                join_f64(spec.tau()),
                join_f64(spec.a()),
                out.display()
            );
            let mut csv = csv_header(&params);
            csv.push_str("part,tau,a,count,density_statistic,mertens_statistic\n");
            for (i, st) in partition.achieved().iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    i + 1,
                    spec.tau()[i],
                    spec.a()[i],
                    st.count,
                    st.density,
                    st.mertens
                );
            }
            emit(stats.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }

        Command::Complement5 {
            partition,
            tau,
            a,
            limit,
            out,
            stats,
        } => {
            let partition_path = optional(partition, cfg.get("partition"))?;
            let limit = require(limit, cfg.get("limit"), "limit")?;
            let out = require(out, cfg.get("out"), "out")?;
            let stats = optional(stats, cfg.get("stats"))?;

            let partition: PrimePartition = match &partition_path {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    PrimePartition::from_text(&text)?
                }
                None => {
                    let tau = parse_f64_list(&require(tau, cfg.get("tau"), "tau")?, "tau")?;
                    let a = parse_f64_list(&require(a, cfg.get("a"), "a")?, "a")?;
                    let spec = PartitionSpec::new(tau, a)?;
                    let table = Arc::new(sieve_primes(limit)?);
                    build_partition(&spec, table, limit)?
                }
            };
            let sieve = FactorSieve::new(limit)?;
            let family = build_smooth_family(&partition, limit, &sieve)?;
            write_family_file(&family.family, &out)?;

            let params = format!(
                "complement5 partition={} tau={} a={} limit={limit} out={}",
                partition_path
                    .as_deref()
                    .map_or_else(|| "-".into(), |p| p.display().to_string()),
                join_f64(partition.spec().tau()),
                join_f64(partition.spec().a()),
                out.display()
            );
            let mut csv = csv_header(&params);
            csv.push_str(
                "set,tau,a,count,density_statistic,predicted_constant,predicted_count,ratio\n",
            );
            for r in &family.reports {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    r.index + 1,
                    r.tau,
                    r.a,
                    r.count,
                    r.density_statistic,
                    r.prediction.constant,
                    r.prediction.predicted_count,
                    r.ratio
                );
            }
            emit(stats.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }

        Command::Complement8 {
            h,
            epsilon,
            steps,
            n_override,
            growth,
            limit,
            out,
            stats,
        } => {
            let h = require(h, cfg.get("h"), "h")?;
            let epsilon = require(epsilon, cfg.get("epsilon"), "epsilon")?;
            let steps = require(steps, cfg.get("steps"), "steps")?;
            let n_override = optional(n_override, cfg.get("n-override"))?;
            let growth_raw: Option<String> = optional(growth, cfg.get("growth"))?;
            let growth = match growth_raw.as_deref() {
                None | Some("cubed-plus-one") => GrowthPolicy::CubedPlusOne,
                Some("cubed") => GrowthPolicy::Cubed,
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown growth policy `{other}` (use cubed or cubed-plus-one)"
                    )))
                }
            };
            let limit = require(limit, cfg.get("limit"), "limit")?;
            let out = require(out, cfg.get("out"), "out")?;
            let stats = optional(stats, cfg.get("stats"))?;

            let table = Arc::new(sieve_primes(limit)?);
            let sieve = FactorSieve::new(limit)?;
            let config = CheckpointConfig {
                h,
                epsilon,
                steps,
                n_override,
                growth,
            };
            let built = build_checkpoint_family(&config, &table, &sieve)?;
            write_family_file(&built.family, &out)?;

            let params = format!(
                "complement8 h={h} epsilon={epsilon} steps={steps} n-override={} growth={} limit={limit} out={}",
                n_override.map_or_else(|| "-".into(), |n| n.to_string()),
                match growth {
                    GrowthPolicy::Cubed => "cubed",
                    GrowthPolicy::CubedPlusOne => "cubed-plus-one",
                },
                out.display()
            );
            let mut csv = csv_header(&params);
            csv.push_str(
                "step,x,y,degenerate,f0_size,f1_size,f2_size,max_set_size,density_statistic,density_bound,density_ok\n",
            );
            for s in &built.steps {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    s.index,
                    s.x,
                    s.y,
                    s.degenerate,
                    s.f0_size,
                    s.f1_size,
                    s.f2_size,
                    s.sizes.iter().max().unwrap(),
                    s.density_statistic,
                    s.density_bound,
                    s.density_ok
                );
            }
            emit(stats.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }

        Command::Verify { family, limit } => {
            let family_path = require(family, cfg.get("family"), "family")?;
            let text = std::fs::read_to_string(&family_path)?;
            let family = parse_family(&text)?;
            let limit = optional(limit, cfg.get("limit"))?.unwrap_or_else(|| family.limit());
            if limit > family.limit() {
                return Err(Error::OutOfRange {
                    what: "limit",
                    value: limit,
                    limit: family.limit(),
                });
            }
            let sieve = FactorSieve::new(limit)?;
            match family.verify(limit, &sieve)? {
                Verification::Verified => {
                    println!("verified: every n in [1, {limit}] is representable");
                    Ok(EXIT_OK)
                }
                Verification::FirstFailure(n) => {
                    println!("counterexample: n = {n} has no representation");
                    Ok(EXIT_COUNTEREXAMPLE)
                }
            }
        }

        Command::Density {
            family,
            tau,
            limit,
            ratio,
            out,
        } => {
            let family_path = require(family, cfg.get("family"), "family")?;
            let text = std::fs::read_to_string(&family_path)?;
            let family = parse_family(&text)?;
            let limit = optional(limit, cfg.get("limit"))?.unwrap_or_else(|| family.limit());
            let ratio = optional(ratio, cfg.get("ratio"))?.unwrap_or(1.25);
            if !(ratio > 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "grid ratio must exceed 1, got {ratio}"
                )));
            }
            let taus = resolve_taus(tau, &cfg, family.h())?;
            let out = optional(out, cfg.get("out"))?;

            let params = format!(
                "density family={} tau={} limit={limit} ratio={ratio}",
                family_path.display(),
                join_f64(&taus)
            );
            let mut csv = csv_header(&params);
            csv.push_str("set,x,count,density_statistic\n");
            for (i, set) in family.sets().iter().enumerate() {
                for x in geometric_grid(limit, ratio) {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{}",
                        i + 1,
                        x,
                        set.counting(x)?,
                        set.density_statistic(taus[i], x)?
                    );
                }
            }
            emit(out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }

        Command::Dirichlet {
            family,
            tau,
            cutoff,
            s_grid,
            slack,
            out,
        } => {
            let family_path = require(family, cfg.get("family"), "family")?;
            let text = std::fs::read_to_string(&family_path)?;
            let family = parse_family(&text)?;
            let cutoff = optional(cutoff, cfg.get("cutoff"))?.unwrap_or_else(|| family.limit());
            let slack = optional(slack, cfg.get("slack"))?.unwrap_or(0.5);
            let s_raw: Option<String> = optional(s_grid, cfg.get("s-grid"))?;
            let s_values = match s_raw {
                Some(raw) => parse_f64_list(&raw, "s-grid")?,
                None => default_s_grid(),
            };
            let taus = resolve_taus(tau, &cfg, family.h())?;
            let out = optional(out, cfg.get("out"))?;

            let params = format!(
                "dirichlet family={} tau={} cutoff={cutoff} slack={slack} s-grid={}",
                family_path.display(),
                join_f64(&taus),
                join_f64(&s_values)
            );
            let mut csv = csv_header(&params);
            csv.push_str("set,s,value,scaled,bound,flagged\n");
            for (i, set) in family.sets().iter().enumerate() {
                let report = scaled_dirichlet_probe(set, taus[i], &s_values, cutoff, slack)?;
                for row in &report.rows {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        i + 1,
                        row.s,
                        row.value,
                        row.scaled,
                        report.bound,
                        row.flagged
                    );
                }
            }
            emit(out.as_deref(), &csv)?;
            Ok(EXIT_OK)
        }
    }
}

fn resolve_taus(flag: Option<String>, cfg: &ConfigFile, h: usize) -> Result<Vec<f64>> {
    let raw = require(flag, cfg.get("tau"), "tau")?;
    let taus = parse_f64_list(&raw, "tau")?;
    if taus.len() == 1 {
        Ok(vec![taus[0]; h])
    } else if taus.len() == h {
        Ok(taus)
    } else {
        Err(Error::InvalidArgument(format!(
            "--tau needs 1 or {h} values, got {}",
            taus.len()
        )))
    }
}

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Convenience used by tests and the family fixtures: a family file for
/// an explicit list of sets.
pub fn family_fixture(sets: &[Vec<u64>], limit: u64) -> Result<String> {
    let sets: Vec<IntegerSet> = sets
        .iter()
        .map(|v| IntegerSet::new(v.clone(), limit))
        .collect::<Result<_>>()?;
    let family = crate::repr::ComplementFamily::new(sets, vec![limit], 0.0, 0, false)?;
    Ok(family_to_text(&family))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let dir = std::env::temp_dir().join("multcomp-cli-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("config.txt");
        std::fs::write(&path, "# comment\nlimit = 500\ntau=0.5,0.5\n").unwrap();
        let cfg = ConfigFile::load(Some(&path)).unwrap();
        assert_eq!(cfg.get::<u64>("limit").unwrap(), Some(500));
        assert_eq!(cfg.get::<String>("tau").unwrap().as_deref(), Some("0.5,0.5"));
        assert_eq!(cfg.get::<u64>("missing").unwrap(), None);

        std::fs::write(&path, "not a pair\n").unwrap();
        assert!(ConfigFile::load(Some(&path)).is_err());
    }

    #[test]
    fn flags_win_over_config() {
        let cfg = ConfigFile {
            values: [("limit".to_string(), "100".to_string())].into(),
        };
        assert_eq!(require(Some(7u64), cfg.get("limit"), "limit").unwrap(), 7);
        assert_eq!(require(None::<u64>, cfg.get("limit"), "limit").unwrap(), 100);
        assert!(require(None::<u64>, cfg.get::<u64>("absent"), "absent").is_err());
    }

    #[test]
    fn f64_list_parsing() {
        assert_eq!(parse_f64_list("0.5, 0.5", "tau").unwrap(), vec![0.5, 0.5]);
        assert!(parse_f64_list("0.5,x", "tau").is_err());
    }

    #[test]
    fn family_fixture_roundtrips() {
        let text = family_fixture(&[vec![1, 2, 4, 8], vec![1, 3, 5, 7, 9]], 9).unwrap();
        let parsed = parse_family(&text).unwrap();
        assert_eq!(parsed.h(), 2);
        assert_eq!(parsed.sets()[0].elements(), &[1, 2, 4, 8]);
    }
}
