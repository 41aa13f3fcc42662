// SPDX-License-Identifier: Apache-2.0

//! Bound sweeps and partial-compliance simulation.
//!
//! Each replication either reuses a fixed instance or generates a fresh one
//! from a profile. Every row owns a `ChaCha8Rng` stream selected by its
//! canonical row index under the master seed, so rows come out identical
//! however rayon schedules them. Raw rows of a group are followed by one
//! `mean` row carrying a normal-approximation 95% confidence half-width of
//! the matched fraction.

use std::io::{Read, Write};
use std::time::Instant;

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, GeneratorProfile};
use crate::matching::{guaranteed_agents, maximum_matching_size, GuaranteedSet};
use crate::model::{Aggregation, Bound, Guarantee, Instance, Relaxation, Shape};
use crate::rational::to_f64;
use crate::solver::{solve_allocation, Expansion, ExpansionSide, SearchMode, SolveError, SolverConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    Fixed(Instance),
    /// A fresh instance per replication; the profile seed is replaced by one
    /// derived from the master seed and the replication index.
    Generated(GeneratorProfile),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub guarantees: Vec<Guarantee>,
    pub aggregation: Aggregation,
    /// Grid for [`sweep_bound`].
    pub bounds: Vec<Bound>,
    /// Grid of complying-agent counts for [`simulate_compliance`].
    pub compliance: Vec<usize>,
    /// Bound used to compute the advice that agents then follow or not.
    pub compliance_bound: Bound,
    pub replications: usize,
    pub seed: u64,
    pub search: SearchMode,
    /// Record wall-clock solve times. Off by default so that output files
    /// are reproducible byte for byte.
    pub timing: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            guarantees: Guarantee::ALL.to_vec(),
            aggregation: Aggregation::TotalCost,
            bounds: Vec::new(),
            compliance: Vec::new(),
            compliance_bound: Bound::Unbounded,
            replications: 10,
            seed: 0,
            search: SearchMode::Binary,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(&'static str),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// `replication` column: a run index or the aggregate over runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replication {
    Run(usize),
    Mean,
}

impl Serialize for Replication {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Replication::Run(i) => s.serialize_str(&i.to_string()),
            Replication::Mean => s.serialize_str("mean"),
        }
    }
}

impl<'de> Deserialize<'de> for Replication {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        match text.as_str() {
            "mean" => Ok(Replication::Mean),
            n => n.parse().map(Replication::Run).map_err(serde::de::Error::custom),
        }
    }
}

/// One CSV row; columns follow field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub guarantee: Guarantee,
    pub aggregation: Aggregation,
    pub bound: Bound,
    pub replication: Replication,
    pub complying_count: f64,
    pub matched_count: f64,
    pub matched_fraction: f64,
    pub relax_cost: f64,
    pub k_min: f64,
    pub runtime_ms: Option<f64>,
    pub ci_half_width: Option<f64>,
    /// Runs where some agent of `Γ(E)` lost its guarantee.
    pub harm_violations: usize,
}

impl SweepRow {
    pub fn is_mean(&self) -> bool {
        self.replication == Replication::Mean
    }
}

/// What the platform sees: the instance, unit-expanded when multi-unit.
struct Platform {
    inst: Instance,
    expansion: Option<Expansion>,
    base_gamma: GuaranteedSet,
}

impl Platform {
    fn new(inst: Instance) -> Self {
        let expansion = match inst.shape() {
            Shape::OneToOne => None,
            Shape::ManyToOne => Some(Expansion::new(&inst, ExpansionSide::Agents)),
            Shape::OneToMany => Some(Expansion::new(&inst, ExpansionSide::Resources)),
        };
        let base_gamma = match &expansion {
            Some(e) => guaranteed_agents(&e.expanded.compatible_graph()),
            None => guaranteed_agents(&inst.compatible_graph()),
        };
        Platform {
            inst,
            expansion,
            base_gamma,
        }
    }

    /// `(μ, harmed)` after relaxing `rel`.
    fn outcome(&self, rel: &Relaxation) -> (usize, bool) {
        let graph = match &self.expansion {
            Some(e) => e.expanded.graph_with(&e.lift(rel)),
            None => self.inst.graph_with(rel),
        };
        let gamma = guaranteed_agents(&graph);
        (maximum_matching_size(&graph), !self.base_gamma.is_subset(&gamma))
    }

    fn capacity(&self) -> usize {
        self.inst.total_demand()
    }
}

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Streams above this offset seed generated instances, one per replication.
const INSTANCE_STREAMS: u64 = 1 << 48;

fn instances(source: &InstanceSource, spec: &SweepSpec) -> Vec<Platform> {
    match source {
        InstanceSource::Fixed(inst) => vec![Platform::new(inst.clone())],
        InstanceSource::Generated(profile) => (0..spec.replications)
            .into_par_iter()
            .map(|rep| {
                let mut p = profile.clone();
                p.seed = stream(spec.seed, INSTANCE_STREAMS + rep as u64).next_u64();
                Platform::new(generate(&p))
            })
            .collect(),
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, on.then(|| start.elapsed().as_secs_f64() * 1e3))
}

fn check(spec: &SweepSpec, grid_len: usize) -> Result<(), SweepError> {
    if spec.guarantees.is_empty() {
        return Err(SweepError::Spec("no guarantees given"));
    }
    if grid_len == 0 {
        return Err(SweepError::Spec("grid is empty"));
    }
    if spec.replications == 0 {
        return Err(SweepError::Spec("replications must be at least 1"));
    }
    Ok(())
}

/// Full-compliance matched fraction per bound and guarantee.
pub fn sweep_bound(source: &InstanceSource, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    check(spec, spec.bounds.len())?;
    let platforms = instances(source, spec);
    let runs = platforms.len();
    // Canonical row order: guarantee, bound, replication.
    let jobs: Vec<(Guarantee, usize, usize)> = spec
        .guarantees
        .iter()
        .flat_map(|&g| (0..spec.bounds.len()).flat_map(move |b| (0..runs).map(move |r| (g, b, r))))
        .collect();

    let raw: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(g, b, rep)| {
            let p = &platforms[rep];
            let cfg = SolverConfig::new(g, spec.aggregation, spec.bounds[b].clone()).with_search(spec.search);
            let (res, ms) = timed(spec.timing, || solve_allocation(&p.inst, &cfg));
            let res = res?;
            let (_, harmed) = p.outcome(&res.relaxation);
            Ok(SweepRow {
                guarantee: g,
                aggregation: spec.aggregation,
                bound: cfg.bound,
                replication: Replication::Run(rep),
                complying_count: res.relaxation.agents(&p.inst).len() as f64,
                matched_count: res.allocation_size as f64,
                matched_fraction: fraction(res.allocation_size, p.capacity()),
                relax_cost: to_f64(&res.aggregate_cost),
                k_min: res.k_min as f64,
                runtime_ms: ms,
                ci_half_width: None,
                harm_violations: usize::from(harmed),
            })
        })
        .collect::<Result<_, SweepError>>()?;
    Ok(with_means(raw, runs))
}

fn fraction(matched: usize, capacity: usize) -> f64 {
    if capacity == 0 {
        0.0
    } else {
        matched as f64 / capacity as f64
    }
}

/// Matched count under partial compliance with the full-compliance advice.
pub fn simulate_compliance(source: &InstanceSource, spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    check(spec, spec.compliance.len())?;
    let platforms = instances(source, spec);
    let reps = spec.replications;
    let grid = &spec.compliance;

    // Advice per (guarantee, instance).
    let advice_jobs: Vec<(usize, usize)> = (0..spec.guarantees.len())
        .flat_map(|g| (0..platforms.len()).map(move |i| (g, i)))
        .collect();
    let advice: Vec<_> = advice_jobs
        .par_iter()
        .map(|&(g, i)| {
            let cfg = SolverConfig::new(spec.guarantees[g], spec.aggregation, spec.compliance_bound.clone())
                .with_search(spec.search);
            let (res, ms) = timed(spec.timing, || solve_allocation(&platforms[i].inst, &cfg));
            res.map(|r| (r, ms))
        })
        .collect::<Result<_, SolveError>>()?;

    // Canonical row order: guarantee, compliance level, replication.
    let jobs: Vec<(usize, usize, usize)> = (0..spec.guarantees.len())
        .flat_map(|g| (0..grid.len()).flat_map(move |c| (0..reps).map(move |r| (g, c, r))))
        .collect();
    let raw: Vec<SweepRow> = jobs
        .par_iter()
        .enumerate()
        .map(|(row, &(g, c, rep))| {
            let inst_index = if platforms.len() == 1 { 0 } else { rep };
            let p = &platforms[inst_index];
            let (res, ms) = &advice[g * platforms.len() + inst_index];
            let relaxers: Vec<usize> = res.relaxation.agents(&p.inst).into_iter().collect();
            let count = grid[c].min(relaxers.len());
            let mut rng = stream(spec.seed, row as u64);
            let complying: Vec<usize> = sample(&mut rng, relaxers.len(), count)
                .into_iter()
                .map(|i| relaxers[i])
                .collect();
            let applied = Relaxation::from_indices(
                res.relaxation
                    .indices()
                    .iter()
                    .copied()
                    .filter(|&i| complying.contains(&p.inst.relaxable()[i].edge.agent)),
            );
            let (matched, harmed) = p.outcome(&applied);
            SweepRow {
                guarantee: spec.guarantees[g],
                aggregation: spec.aggregation,
                bound: spec.compliance_bound.clone(),
                replication: Replication::Run(rep),
                complying_count: count as f64,
                matched_count: matched as f64,
                matched_fraction: fraction(matched, p.capacity()),
                relax_cost: to_f64(&crate::model::aggregate_cost(&p.inst, &applied, spec.aggregation)),
                k_min: res.k_min as f64,
                runtime_ms: *ms,
                ci_half_width: None,
                harm_violations: usize::from(harmed),
            }
        })
        .collect();
    Ok(with_means(raw, reps))
}

/// Appends a mean row after every `group` consecutive raw rows.
fn with_means(raw: Vec<SweepRow>, group: usize) -> Vec<SweepRow> {
    let mut out = Vec::with_capacity(raw.len() + raw.len() / group.max(1));
    for chunk in raw.chunks(group.max(1)) {
        out.extend_from_slice(chunk);
        out.push(mean_row(chunk));
    }
    out
}

fn mean(values: impl Iterator<Item = f64>, n: f64) -> f64 {
    values.sum::<f64>() / n
}

fn mean_row(rows: &[SweepRow]) -> SweepRow {
    let n = rows.len() as f64;
    let fractions: Vec<f64> = rows.iter().map(|r| r.matched_fraction).collect();
    let mf = mean(fractions.iter().copied(), n);
    let ci = (rows.len() > 1).then(|| {
        let var = fractions.iter().map(|f| (f - mf).powi(2)).sum::<f64>() / (n - 1.0);
        1.96 * var.sqrt() / n.sqrt()
    });
    let first = &rows[0];
    SweepRow {
        guarantee: first.guarantee,
        aggregation: first.aggregation,
        bound: first.bound.clone(),
        replication: Replication::Mean,
        complying_count: mean(rows.iter().map(|r| r.complying_count), n),
        matched_count: mean(rows.iter().map(|r| r.matched_count), n),
        matched_fraction: mf,
        relax_cost: mean(rows.iter().map(|r| r.relax_cost), n),
        k_min: mean(rows.iter().map(|r| r.k_min), n),
        runtime_ms: rows
            .iter()
            .map(|r| r.runtime_ms)
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean(v.into_iter(), n)),
        ci_half_width: ci,
        harm_violations: rows.iter().map(|r| r.harm_violations).sum(),
    }
}

pub fn write_csv(rows: &[SweepRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl Read) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub const CSV_HEADER: [&str; 12] = [
    "guarantee",
    "aggregation",
    "bound",
    "replication",
    "complying_count",
    "matched_count",
    "matched_fraction",
    "relax_cost",
    "k_min",
    "runtime_ms",
    "ci_half_width",
    "harm_violations",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::Profile;
    use crate::model::fixtures::{rat, strictness};

    fn spec() -> SweepSpec {
        SweepSpec {
            guarantees: vec![Guarantee::WnhWb, Guarantee::SnhSb],
            bounds: vec![Bound::zero(), Bound::Finite(rat(10))],
            compliance: vec![0, 1, 2],
            replications: 4,
            seed: 11,
            ..SweepSpec::default()
        }
    }

    fn runs(rows: &[SweepRow]) -> Vec<&SweepRow> {
        rows.iter().filter(|r| !r.is_mean()).collect()
    }

    #[test]
    fn strictness_bound_sweep() {
        let rows = sweep_bound(&InstanceSource::Fixed(strictness()), &spec()).unwrap();
        let fr: Vec<(Guarantee, f64)> = runs(&rows).iter().map(|r| (r.guarantee, r.matched_fraction)).collect();
        assert_eq!(
            fr,
            vec![
                (Guarantee::WnhWb, 0.5),
                (Guarantee::WnhWb, 1.0),
                (Guarantee::SnhSb, 0.5),
                (Guarantee::SnhSb, 0.5)
            ]
        );
        // One mean row per (guarantee, bound), no CI from a single run.
        assert_eq!(rows.len(), 8);
        assert!(rows[1].is_mean() && rows[1].ci_half_width.is_none());
    }

    #[test]
    fn compliance_endpoints() {
        let rows = simulate_compliance(&InstanceSource::Fixed(strictness()), &spec()).unwrap();
        for r in runs(&rows) {
            match (r.guarantee, r.complying_count as usize) {
                (_, 0) => assert_eq!(r.matched_count, 1.0),
                (Guarantee::WnhWb, 2) => assert_eq!(r.matched_count, 2.0),
                (Guarantee::SnhSb, _) => assert_eq!(r.harm_violations, 0),
                _ => {}
            }
        }
    }

    #[test]
    fn lone_x2_compliance_harms_x1() {
        // Only x2 relaxing gives {(x1,y1),(x2,y1)}: μ = 1 and x1 loses its
        // guarantee.
        let inst = strictness();
        let p = Platform::new(inst.clone());
        let x2_edge = Relaxation::from_ids(&inst, [("x2", "y1")]).unwrap();
        assert_eq!(p.outcome(&x2_edge), (1, true));
        let rows = simulate_compliance(&InstanceSource::Fixed(inst), &spec()).unwrap();
        let wnh_partial: Vec<_> = runs(&rows)
            .into_iter()
            .filter(|r| r.guarantee == Guarantee::WnhWb && r.complying_count == 1.0)
            .collect();
        assert!(wnh_partial.iter().any(|r| r.harm_violations == 1));
    }

    #[test]
    fn csv_round_trip_and_determinism() {
        let source = InstanceSource::Generated(GeneratorProfile::new(Profile::Lab, 0).with_shape(8, 5));
        let mut s = spec();
        s.bounds = vec![Bound::zero(), Bound::from_integer(3), Bound::Unbounded];
        let rows = sweep_bound(&source, &s).unwrap();
        let mut a = Vec::new();
        write_csv(&rows, &mut a).unwrap();
        let mut b = Vec::new();
        write_csv(&sweep_bound(&source, &s).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(read_csv(a.as_slice()).unwrap(), rows);
        // Generated replications yield CIs.
        assert!(rows.iter().filter(|r| r.is_mean()).all(|r| r.ci_half_width.is_some()));
    }

    #[test]
    fn bound_monotone_fractions() {
        let source = InstanceSource::Generated(GeneratorProfile::new(Profile::Lab, 0).with_shape(10, 6));
        let mut s = spec();
        s.guarantees = Guarantee::ALL.to_vec();
        s.bounds = (0..6).map(Bound::from_integer).collect();
        let rows = sweep_bound(&source, &s).unwrap();
        for g in Guarantee::ALL {
            for rep in 0..s.replications {
                let series: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.guarantee == g && r.replication == Replication::Run(rep))
                    .map(|r| r.matched_fraction)
                    .collect();
                assert!(series.windows(2).all(|w| w[0] <= w[1]), "{g} rep {rep}: {series:?}");
            }
        }
    }

    #[test]
    fn empty_grid_rejected() {
        let mut s = spec();
        s.bounds.clear();
        assert!(matches!(
            sweep_bound(&InstanceSource::Fixed(strictness()), &s),
            Err(SweepError::Spec(_))
        ));
    }
}
