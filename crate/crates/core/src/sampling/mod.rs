//! Seeded Monte Carlo runs drawn from a scheme's outcome distribution.
//!
//! Generator: counter-based SplitMix64. Draw number `i` (0-based, global over
//! the whole run) uses
//!
//! ```text
//! z = seed + (i + 1) * 0x9E3779B97F4A7C15        (wrapping)
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! x = z ^ (z >> 31)
//! u = (x >> 11) * 2^-53                          in [0, 1)
//! ```
//!
//! which is the `(i + 1)`-th output of a SplitMix64 stream seeded with `seed`.
//! A chunk `k` of size `c` starts its counter at `k * c`, so chunks can be
//! drawn in any order or in parallel and merge to the sequential tally.
//!
//! Each `u` selects a cell by inverse CDF over the order `EE, EF, FE, FF`, then
//! radiation labels in lexicographic order: the first cell whose cumulative
//! probability exceeds `u`. If rounding leaves `u` above the final cumulative
//! sum the last cell with nonzero probability is chosen, so zero-probability
//! cells are never drawn.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, SerializeStruct, Serializer};

use crate::circuit::Scheme;
use crate::error::{Error, Result};
use crate::evolution::{evolve, outcome_distribution, OutcomeDistribution};
use crate::scalar::Scalar;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Default chunk length for parallel sampling.
pub const DEFAULT_CHUNK: u64 = 1 << 16;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Raw 64-bit output for draw `index`.
pub fn draw_u64(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Uniform in `[0, 1)` for draw `index`.
pub fn draw_unit(seed: u64, index: u64) -> f64 {
    (draw_u64(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A joint outcome of one run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OutcomeCell {
    EE,
    EF,
    FE,
    FF,
    Gamma(String),
}

impl OutcomeCell {
    pub fn key(&self) -> String {
        match self {
            OutcomeCell::EE => "EE".into(),
            OutcomeCell::EF => "EF".into(),
            OutcomeCell::FE => "FE".into(),
            OutcomeCell::FF => "FF".into(),
            OutcomeCell::Gamma(l) => format!("gamma:{l}"),
        }
    }
}

impl fmt::Display for OutcomeCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// Cells in sampling order with their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    cells: Vec<(OutcomeCell, f64)>,
    cumulative: Vec<f64>,
    fallback: usize,
}

impl CellTable {
    pub fn new<T: Scalar>(d: &OutcomeDistribution<T>) -> Self {
        let f = |x: T| x.to_f64().unwrap_or(0.0).max(0.0);
        let mut cells = vec![
            (OutcomeCell::EE, f(d.p_ee)),
            (OutcomeCell::EF, f(d.p_ef)),
            (OutcomeCell::FE, f(d.p_fe)),
            (OutcomeCell::FF, f(d.p_ff)),
        ];
        cells.extend(
            d.p_gamma
                .iter()
                .map(|(l, &p)| (OutcomeCell::Gamma(l.clone()), f(p))),
        );
        let mut acc = 0.0;
        let cumulative = cells
            .iter()
            .map(|(_, p)| {
                acc += p;
                acc
            })
            .collect();
        let fallback = cells.iter().rposition(|(_, p)| *p > 0.0).unwrap_or(0);
        CellTable {
            cells,
            cumulative,
            fallback,
        }
    }

    pub fn cells(&self) -> &[(OutcomeCell, f64)] {
        &self.cells
    }

    pub fn probability(&self, cell: &OutcomeCell) -> f64 {
        self.cells
            .iter()
            .find(|(c, _)| c == cell)
            .map_or(0.0, |(_, p)| *p)
    }

    fn pick(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.fallback)
    }
}

/// Counts of sampled outcomes. Only drawn cells are stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunTally {
    pub counts: BTreeMap<OutcomeCell, u64>,
    pub n: u64,
    pub seed: u64,
}

impl RunTally {
    pub fn empty(seed: u64) -> Self {
        RunTally {
            counts: BTreeMap::new(),
            n: 0,
            seed,
        }
    }

    pub fn count(&self, cell: &OutcomeCell) -> u64 {
        self.counts.get(cell).copied().unwrap_or(0)
    }

    pub fn gamma_count(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(c, _)| matches!(c, OutcomeCell::Gamma(_)))
            .map(|(_, &k)| k)
            .sum()
    }

    /// Cells to report: the four detector pairs, then every recorded label.
    pub fn report_cells(&self) -> Vec<OutcomeCell> {
        let mut cells = vec![
            OutcomeCell::EE,
            OutcomeCell::EF,
            OutcomeCell::FE,
            OutcomeCell::FF,
        ];
        cells.extend(
            self.counts
                .keys()
                .filter(|c| matches!(c, OutcomeCell::Gamma(_)))
                .cloned(),
        );
        cells
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

struct CellCounts<'a>(&'a RunTally);

impl Serialize for CellCounts<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells = self.0.report_cells();
        let mut map = s.serialize_map(Some(cells.len()))?;
        for c in &cells {
            map.serialize_entry(&c.key(), &self.0.count(c))?;
        }
        map.end()
    }
}

impl Serialize for RunTally {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("RunTally", 3)?;
        st.serialize_field("cells", &CellCounts(self))?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

/// Draws `count` runs starting at global draw index `start`.
pub fn sample_range(table: &CellTable, seed: u64, start: u64, count: u64) -> RunTally {
    let mut hits = vec![0u64; table.cells.len()];
    for i in start..start + count {
        hits[table.pick(draw_unit(seed, i))] += 1;
    }
    let counts = table
        .cells
        .iter()
        .zip(hits)
        .filter(|(_, k)| *k > 0)
        .map(|((c, _), k)| (c.clone(), k))
        .collect();
    RunTally {
        counts,
        n: count,
        seed,
    }
}

/// `n` runs of a scheme, drawn sequentially.
pub fn sample<T: Scalar>(scheme: &Scheme<T>, n: u64, seed: u64) -> Result<RunTally> {
    let table = CellTable::new(&outcome_distribution(&evolve(scheme)?)?);
    Ok(sample_range(&table, seed, 0, n))
}

/// Same tally as [`sample`], drawn in parallel chunks of `chunk` runs.
pub fn sample_chunked<T: Scalar>(
    scheme: &Scheme<T>,
    n: u64,
    seed: u64,
    chunk: u64,
) -> Result<RunTally> {
    let table = CellTable::new(&outcome_distribution(&evolve(scheme)?)?);
    Ok(sample_table_chunked(&table, n, seed, chunk))
}

pub fn sample_table_chunked(table: &CellTable, n: u64, seed: u64, chunk: u64) -> RunTally {
    let chunk = chunk.max(1);
    let chunks = n.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let start = k * chunk;
            sample_range(table, seed, start, chunk.min(n - start))
        })
        .reduce(|| RunTally::empty(seed), |a, b| merge(&a, &b))
}

/// Estimate and standard error for one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub estimate: f64,
    pub standard_error: f64,
}

/// `count / n` and `sqrt(p(1-p)/n)` for every reported cell.
pub fn frequencies(t: &RunTally) -> Result<BTreeMap<OutcomeCell, Frequency>> {
    if t.n == 0 {
        return Err(Error::EmptyTally);
    }
    let n = t.n as f64;
    Ok(t.report_cells()
        .into_iter()
        .map(|c| {
            let p = t.count(&c) as f64 / n;
            let se = (p * (1.0 - p) / n).sqrt();
            (
                c,
                Frequency {
                    estimate: p,
                    standard_error: se,
                },
            )
        })
        .collect())
}

/// Cell-wise sum. Seeds: an empty side is ignored, equal seeds are kept,
/// distinct seeds combine to `mix64(s1 ^ s2)`.
pub fn merge(t1: &RunTally, t2: &RunTally) -> RunTally {
    if t2.n == 0 && t2.counts.is_empty() {
        return t1.clone();
    }
    if t1.n == 0 && t1.counts.is_empty() {
        return t2.clone();
    }
    let mut counts = t1.counts.clone();
    for (c, k) in &t2.counts {
        *counts.entry(c.clone()).or_insert(0) += k;
    }
    let seed = if t1.seed == t2.seed {
        t1.seed
    } else {
        mix64(t1.seed ^ t2.seed)
    };
    RunTally {
        counts,
        n: t1.n + t2.n,
        seed,
    }
}
