//! Domain types and rank-file ingestion.
//!
//! Ranks are 1-based everywhere: a user's relevant item has global rank
//! `R` in `[1, N]` and sampled rank `r` in `[1, n]`. No 0-based rank
//! crosses a module boundary.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::{Error, Result};

/// Catalog size `N` plus the sample-set size `n` (the target item and
/// `n - 1` sampled negatives).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogSpec {
    total_items: usize,
    sample_size: usize,
}

impl CatalogSpec {
    pub fn new(total_items: usize, sample_size: usize) -> Result<Self> {
        if total_items < 2 {
            return Err(Error::Domain(format!(
                "catalog must contain at least 2 items, got {total_items}"
            )));
        }
        if sample_size < 2 || sample_size > total_items {
            return Err(Error::Domain(format!(
                "sample size must satisfy 2 <= n <= N, got n={sample_size}, N={total_items}"
            )));
        }
        Ok(CatalogSpec {
            total_items,
            sample_size,
        })
    }

    /// `N`, the number of items the global ranking runs over.
    pub fn total_items(&self) -> usize {
        self.total_items
    }

    /// `n`, the size of the sampled item set including the target.
    pub fn sample_size(&self) -> usize {
        self.sample_size
    }
}

/// Per-user global ranks `R_u` over a catalog of `total_items` items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    ranks: Vec<u32>,
    total_items: usize,
}

impl RankProfile {
    pub fn new(ranks: Vec<u32>, total_items: usize) -> Result<Self> {
        if total_items < 2 {
            return Err(Error::Domain(format!(
                "catalog must contain at least 2 items, got {total_items}"
            )));
        }
        if ranks.is_empty() {
            return Err(Error::Domain("rank profile contains no users".into()));
        }
        for (i, &r) in ranks.iter().enumerate() {
            if r < 1 || r as usize > total_items {
                return Err(Error::Domain(format!(
                    "rank {r} of user index {i} outside [1, {total_items}]"
                )));
            }
        }
        Ok(RankProfile { ranks, total_items })
    }

    /// `M`, the number of users.
    pub fn user_count(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn total_items(&self) -> usize {
        self.total_items
    }
}

/// Empirical rank mass `W_R`: the fraction of users whose relevant item
/// sits at global rank `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankHistogram {
    mass: Vec<f64>,
}

impl RankHistogram {
    /// Validates that every weight lies in `[0, 1]` and the total mass
    /// is 1 within 1e-12.
    pub fn from_mass(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::Domain("histogram has no bins".into()));
        }
        let mut sum = KahanSum::default();
        for (i, &w) in mass.iter().enumerate() {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Domain(format!(
                    "mass {w} at rank {} outside [0, 1]",
                    i + 1
                )));
            }
            sum.add(w);
        }
        if (sum.value() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "histogram mass sums to {}, expected 1 within 1e-12",
                sum.value()
            )));
        }
        Ok(RankHistogram { mass })
    }

    pub fn total_items(&self) -> usize {
        self.mass.len()
    }

    /// `W_R` for a 1-based rank.
    pub fn weight_at(&self, rank: usize) -> f64 {
        self.mass[rank - 1]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
}

/// Normalized rank frequencies of a profile: `W_R = #{u : R_u = R} / M`.
pub fn histogram(profile: &RankProfile) -> RankHistogram {
    let mut counts = vec![0u64; profile.total_items()];
    for &r in profile.ranks() {
        counts[r as usize - 1] += 1;
    }
    let m = profile.user_count() as f64;
    let mass = counts.iter().map(|&c| c as f64 / m).collect();
    RankHistogram { mass }
}

/// Per-user sampled ranks `r_u` within a sample set of size `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledRankRecord {
    sampled_ranks: Vec<u32>,
    sample_size: usize,
}

impl SampledRankRecord {
    pub fn new(sampled_ranks: Vec<u32>, sample_size: usize) -> Result<Self> {
        if sampled_ranks.is_empty() {
            return Err(Error::Domain("sampled rank record contains no users".into()));
        }
        for (i, &r) in sampled_ranks.iter().enumerate() {
            if r < 1 || r as usize > sample_size {
                return Err(Error::Domain(format!(
                    "sampled rank {r} of user index {i} outside [1, {sample_size}]"
                )));
            }
        }
        Ok(SampledRankRecord {
            sampled_ranks,
            sample_size,
        })
    }

    pub fn user_count(&self) -> usize {
        self.sampled_ranks.len()
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn sampled_ranks(&self) -> &[u32] {
        &self.sampled_ranks
    }

    /// Hit indicator `Z_u = 1` iff the user's sampled rank is within `k`.
    pub fn hit(&self, user: usize, k: usize) -> bool {
        self.sampled_ranks[user] as usize <= k
    }

    /// Number of users with a sampled rank within `k`.
    pub fn hits(&self, k: usize) -> usize {
        self.sampled_ranks
            .iter()
            .filter(|&&r| r as usize <= k)
            .count()
    }
}

/// A monotone hit-ratio curve indexed by cutoff `1..=k_max`, covering
/// both global `HR@K` (`k_max = N`) and sampled `SHR@k` (`k_max = n`).
#[derive(Debug, Clone, PartialEq)]
pub struct HitRatioCurve {
    values: Vec<f64>,
}

impl HitRatioCurve {
    /// Validates that values lie in `[0, 1]` and never decrease.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("curve has no cutoffs".into()));
        }
        let mut prev = 0.0f64;
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!(
                    "curve value {v} at cutoff {} outside [0, 1]",
                    i + 1
                )));
            }
            if v < prev {
                return Err(Error::Domain(format!(
                    "curve decreases at cutoff {}: {prev} -> {v}",
                    i + 1
                )));
            }
            prev = v;
        }
        Ok(HitRatioCurve { values })
    }

    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    /// Curve value at a 1-based cutoff.
    pub fn value_at(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Compensated (Kahan) accumulator for long sums of small terms.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

const RANK_HEADER: [&str; 2] = ["user_id", "rank"];
const EXTENDED_HEADER: [&str; 3] = ["user_id", "rank", "effective_N"];

struct ParsedRankFile {
    ranks: Vec<u32>,
    effective: Option<Vec<u32>>,
}

/// Shared CSV walk for plain and extended rank files. Lines starting
/// with `#` are treated as comments (our own outputs carry a manifest
/// header).
fn parse_rank_file(path: &Path, total_items: usize) -> Result<ParsedRankFile> {
    let raw = std::fs::read_to_string(path)?;
    if raw.trim().is_empty() {
        return Err(Error::Domain(format!(
            "empty rank file: {}",
            path.display()
        )));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(raw.as_bytes());

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: format!("cannot read header: {e}"),
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();
    let extended = if headers == RANK_HEADER {
        false
    } else if headers == EXTENDED_HEADER {
        true
    } else {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `user_id,rank` or `user_id,rank,effective_N`, got `{}`",
                headers.join(",")
            ),
        });
    };

    let mut ranks = Vec::new();
    let mut effective = if extended { Some(Vec::new()) } else { None };
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(ranks.len() + 2),
            message: format!("malformed row: {e}"),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(ranks.len() + 2);
        if record.len() != headers.len() {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {} fields, got {}",
                    headers.len(),
                    record.len()
                ),
            });
        }
        let user = record[0].to_string();
        if user.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty user_id".into(),
            });
        }
        if !seen.insert(user.clone()) {
            return Err(Error::Domain(format!(
                "duplicate user_id `{user}` at line {line}"
            )));
        }
        let rank: u32 = record[1].parse().map_err(|e| Error::Parse {
            line,
            message: format!("rank `{}` is not an integer: {e}", &record[1]),
        })?;
        if rank < 1 || rank as usize > total_items {
            return Err(Error::Domain(format!(
                "rank {rank} at line {line} outside [1, {total_items}]"
            )));
        }
        if let Some(ref mut eff) = effective {
            let n_u: u32 = record[2].parse().map_err(|e| Error::Parse {
                line,
                message: format!("effective_N `{}` is not an integer: {e}", &record[2]),
            })?;
            if n_u < rank || n_u as usize > total_items {
                return Err(Error::Domain(format!(
                    "effective_N {n_u} at line {line} outside [rank, {total_items}]"
                )));
            }
            eff.push(n_u);
        }
        ranks.push(rank);
    }
    if ranks.is_empty() {
        return Err(Error::Domain(format!(
            "rank file has no data rows: {}",
            path.display()
        )));
    }
    Ok(ParsedRankFile { ranks, effective })
}

/// Loads a rank file (`user_id,rank`, one row per user). An extended
/// file with an `effective_N` column is accepted; the extra column is
/// ignored here.
pub fn load_rank_profile(path: &Path, total_items: usize) -> Result<RankProfile> {
    let parsed = parse_rank_file(path, total_items)?;
    RankProfile::new(parsed.ranks, total_items)
}

/// Loads an extended rank file (`user_id,rank,effective_N`), returning
/// the profile together with each user's effective catalog size.
pub fn load_extended_rank_profile(
    path: &Path,
    total_items: usize,
) -> Result<(RankProfile, Vec<u32>)> {
    let parsed = parse_rank_file(path, total_items)?;
    let effective = parsed.effective.ok_or_else(|| {
        Error::Config(format!(
            "{} has no effective_N column (required for the `actual` scheme)",
            path.display()
        ))
    })?;
    let profile = RankProfile::new(parsed.ranks, total_items)?;
    Ok((profile, effective))
}

/// Loads a file of sampled ranks (`user_id,rank` with ranks in `[1, n]`).
pub fn load_sampled_ranks(path: &Path, sample_size: usize) -> Result<SampledRankRecord> {
    let parsed = parse_rank_file(path, sample_size)?;
    SampledRankRecord::new(parsed.ranks, sample_size)
}

#[derive(Deserialize)]
struct Sidecar {
    #[serde(rename = "N")]
    n: usize,
}

/// Reads the catalog size from a `<rank-file>.json` sidecar of the form
/// `{"N": 3706}`, if one exists.
pub fn read_catalog_sidecar(rank_path: &Path) -> Result<Option<usize>> {
    let mut sidecar = rank_path.as_os_str().to_owned();
    sidecar.push(".json");
    let sidecar = Path::new(&sidecar);
    if !sidecar.exists() {
        return Ok(None);
    }
    let mut buf = String::new();
    File::open(sidecar)?.read_to_string(&mut buf)?;
    let parsed: Sidecar = serde_json::from_str(&buf).map_err(|e| Error::Parse {
        line: 1,
        message: format!("invalid sidecar {}: {e}", sidecar.display()),
    })?;
    Ok(Some(parsed.n))
}
