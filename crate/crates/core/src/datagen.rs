// SPDX-License-Identifier: Apache-2.0

//! Synthetic instance generators with the scale and discomfort structure of
//! three allocation settings:
//!
//! * **lab**: students rate rooms 1..=5 on a few attributes. Rating 1 costs
//!   nothing, ratings 2..=5 cost 1..=4, and a pair costs the sum over its
//!   attributes. Cost 0 is compatible, cost above a threshold is impossible.
//! * **course**: courses and classrooms with capacity, location and two
//!   accessibility attributes.
//! * **child**: children and activities with an age window and priorities.
//!
//! All numeric constants live in the `*Params` structs; they shape the
//! instances and carry no claim about any real dataset. Every draw comes from
//! one `ChaCha8Rng` seeded by the profile seed, in a fixed order.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, RawAgent, RawInstance, RawRelaxable, RawResource};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Course,
    Lab,
    Child,
}

impl Profile {
    /// Default `(agents, resources)`.
    pub fn default_shape(self) -> (usize, usize) {
        match self {
            Profile::Course => (154, 144),
            Profile::Lab => (31, 14),
            Profile::Child => (653, 249),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Course => "course",
            Profile::Lab => "lab",
            Profile::Child => "child",
        })
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "course" => Ok(Profile::Course),
            "lab" => Ok(Profile::Lab),
            "child" => Ok(Profile::Child),
            other => Err(format!("unknown profile {other:?} (expected course|lab|child)")),
        }
    }
}

/// Optional multi-unit structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplicity {
    #[default]
    Unit,
    /// Agent demands uniform in `1..=max`.
    Demands { max: u32 },
    /// Resource capacities uniform in `1..=max`.
    Capacities { max: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorProfile {
    pub profile: Profile,
    pub seed: u64,
    pub agents: Option<usize>,
    pub resources: Option<usize>,
    pub multiplicity: Multiplicity,
}

impl GeneratorProfile {
    pub fn new(profile: Profile, seed: u64) -> Self {
        GeneratorProfile {
            profile,
            seed,
            agents: None,
            resources: None,
            multiplicity: Multiplicity::Unit,
        }
    }

    pub fn with_shape(mut self, agents: usize, resources: usize) -> Self {
        self.agents = Some(agents);
        self.resources = Some(resources);
        self
    }

    pub fn shape(&self) -> (usize, usize) {
        let (a, r) = self.profile.default_shape();
        (self.agents.unwrap_or(a).max(1), self.resources.unwrap_or(r).max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabParams {
    pub attributes: usize,
    /// Probability that a single attribute is rated 1.
    pub p_fine: f64,
    /// Pairs costing more than this are impossible.
    pub threshold: u32,
}

impl Default for LabParams {
    fn default() -> Self {
        LabParams {
            attributes: 3,
            p_fine: 0.55,
            threshold: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CourseParams {
    pub p_needs_physical: f64,
    pub p_needs_hearing: f64,
    pub p_room_physical: f64,
    pub p_room_hearing: f64,
    /// Probability that a missing accessibility feature rules a room out.
    pub p_access_blocks: f64,
    pub physical_cost: u32,
    pub hearing_cost: u32,
    /// Locations lie on a `grid × grid` campus.
    pub grid: u32,
    /// Rooms further than this (Manhattan) are impossible.
    pub max_distance: u32,
    /// Rooms holding less than this fraction of the course are impossible.
    pub min_capacity_ratio: f64,
}

impl Default for CourseParams {
    fn default() -> Self {
        CourseParams {
            p_needs_physical: 0.1,
            p_needs_hearing: 0.08,
            p_room_physical: 0.6,
            p_room_hearing: 0.5,
            p_access_blocks: 0.7,
            physical_cost: 5,
            hearing_cost: 4,
            grid: 6,
            max_distance: 4,
            min_capacity_ratio: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChildParams {
    pub min_age: u32,
    pub max_age: u32,
    /// Activities each child rates, uniform in this range.
    pub rated: (usize, usize),
    /// Priority levels; level 1 is a first choice.
    pub priority_levels: u32,
    /// Pairs costing more than this are impossible.
    pub threshold: u32,
}

impl Default for ChildParams {
    fn default() -> Self {
        ChildParams {
            min_age: 4,
            max_age: 15,
            rated: (4, 12),
            priority_levels: 5,
            threshold: 5,
        }
    }
}

/// Where a generated pair ends up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairClass {
    Compatible,
    Relaxable(Rational),
    Impossible,
}

/// Classifies a lab pair from its per-attribute ratings.
pub fn classify_lab_ratings(ratings: &[u32], threshold: u32) -> PairClass {
    let cost: u32 = ratings.iter().map(|r| r.saturating_sub(1)).sum();
    classify(int(cost), int(threshold))
}

fn classify(cost: Rational, threshold: Rational) -> PairClass {
    use num_traits::Zero;
    if cost.is_zero() {
        PairClass::Compatible
    } else if cost > threshold {
        PairClass::Impossible
    } else {
        PairClass::Relaxable(cost)
    }
}

fn int(v: u32) -> Rational {
    Rational::from_integer(v.into())
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.saturating_sub(1).to_string().len();
    (0..n).map(|i| format!("{prefix}{i:0width$}")).collect()
}

struct Builder {
    raw: RawInstance,
    agents: Vec<String>,
    resources: Vec<String>,
}

impl Builder {
    fn new(agent_prefix: &str, agents: usize, resource_prefix: &str, resources: usize) -> Self {
        let agents = ids(agent_prefix, agents);
        let resources = ids(resource_prefix, resources);
        let raw = RawInstance {
            agents: agents.iter().map(|a| RawAgent::new(a.clone(), 1)).collect(),
            resources: resources.iter().map(|r| RawResource::new(r.clone(), 1)).collect(),
            ..RawInstance::default()
        };
        Builder { raw, agents, resources }
    }

    fn add(&mut self, a: usize, r: usize, class: PairClass) {
        let (agent, resource) = (self.agents[a].clone(), self.resources[r].clone());
        match class {
            PairClass::Compatible => self.raw.compatible.push((agent, resource)),
            PairClass::Relaxable(discomfort) => self.raw.relaxable.push(RawRelaxable {
                agent,
                resource,
                discomfort,
            }),
            PairClass::Impossible => {}
        }
    }

    fn finish(mut self, rng: &mut ChaCha8Rng, multiplicity: Multiplicity) -> Instance {
        match multiplicity {
            Multiplicity::Unit => {}
            Multiplicity::Demands { max } => {
                for a in &mut self.raw.agents {
                    a.demand = rng.gen_range(1..=max.max(1));
                }
            }
            Multiplicity::Capacities { max } => {
                for r in &mut self.raw.resources {
                    r.capacity = rng.gen_range(1..=max.max(1));
                }
            }
        }
        Instance::validate(self.raw).expect("generated instances are valid by construction")
    }
}

pub fn generate(profile: &GeneratorProfile) -> Instance {
    match profile.profile {
        Profile::Lab => generate_lab(profile, &LabParams::default()),
        Profile::Course => generate_course(profile, &CourseParams::default()),
        Profile::Child => generate_child(profile, &ChildParams::default()),
    }
}

pub fn generate_lab(profile: &GeneratorProfile, p: &LabParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let (na, nr) = profile.shape();
    let mut b = Builder::new("s", na, "room", nr);
    let mut ratings = vec![0u32; p.attributes];
    for a in 0..na {
        for r in 0..nr {
            for rating in ratings.iter_mut() {
                *rating = if rng.gen_bool(p.p_fine) { 1 } else { rng.gen_range(2..=5) };
            }
            b.add(a, r, classify_lab_ratings(&ratings, p.threshold));
        }
    }
    b.finish(&mut rng, profile.multiplicity)
}

pub fn generate_course(profile: &GeneratorProfile, p: &CourseParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let (na, nr) = profile.shape();
    struct Course {
        size: u32,
        at: (u32, u32),
        physical: bool,
        hearing: bool,
    }
    struct Room {
        capacity: u32,
        at: (u32, u32),
        physical: bool,
        hearing: bool,
    }
    let grid = p.grid.max(1);
    let courses: Vec<Course> = (0..na)
        .map(|_| Course {
            size: rng.gen_range(10..=200),
            at: (rng.gen_range(0..grid), rng.gen_range(0..grid)),
            physical: rng.gen_bool(p.p_needs_physical),
            hearing: rng.gen_bool(p.p_needs_hearing),
        })
        .collect();
    let rooms: Vec<Room> = (0..nr)
        .map(|_| Room {
            capacity: rng.gen_range(20..=250),
            at: (rng.gen_range(0..grid), rng.gen_range(0..grid)),
            physical: rng.gen_bool(p.p_room_physical),
            hearing: rng.gen_bool(p.p_room_hearing),
        })
        .collect();

    let mut b = Builder::new("c", na, "r", nr);
    for (a, c) in courses.iter().enumerate() {
        for (r, room) in rooms.iter().enumerate() {
            let distance = c.at.0.abs_diff(room.at.0) + c.at.1.abs_diff(room.at.1);
            let mut blocked = distance > p.max_distance
                || f64::from(room.capacity) < p.min_capacity_ratio * f64::from(c.size);
            let mut cost = Rational::from_integer(0.into());
            if c.physical && !room.physical {
                blocked |= rng.gen_bool(p.p_access_blocks);
                cost += int(p.physical_cost);
            }
            if c.hearing && !room.hearing {
                blocked |= rng.gen_bool(p.p_access_blocks);
                cost += int(p.hearing_cost);
            }
            if room.capacity < c.size {
                // Shortfall as a fraction of the course, in tenths.
                let tenths = (10 * (c.size - room.capacity)).div_ceil(c.size);
                cost += Rational::new(tenths.into(), 10.into()) * int(4);
            }
            cost += int(distance.saturating_sub(1));
            let class = if blocked {
                PairClass::Impossible
            } else {
                classify(cost, Rational::from_integer(1_000_000.into()))
            };
            b.add(a, r, class);
        }
    }
    b.finish(&mut rng, profile.multiplicity)
}

pub fn generate_child(profile: &GeneratorProfile, p: &ChildParams) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let (na, nr) = profile.shape();
    let windows: Vec<(u32, u32)> = (0..nr)
        .map(|_| {
            let lo = rng.gen_range(p.min_age..=p.max_age.saturating_sub(2).max(p.min_age));
            let hi = (lo + rng.gen_range(2..=5)).min(p.max_age);
            (lo, hi)
        })
        .collect();
    let mut b = Builder::new("k", na, "act", nr);
    for a in 0..na {
        let age = rng.gen_range(p.min_age..=p.max_age);
        let count = rng.gen_range(p.rated.0..=p.rated.1).min(nr);
        let mut chosen: Vec<usize> = sample(&mut rng, nr, count).into_vec();
        chosen.sort_unstable();
        for r in chosen {
            let priority = rng.gen_range(1..=p.priority_levels.max(1));
            let (lo, hi) = windows[r];
            let age_gap = if age < lo {
                lo - age
            } else {
                age.saturating_sub(hi)
            };
            let cost = (priority - 1) + age_gap;
            b.add(a, r, classify(int(cost), int(p.threshold)));
        }
    }
    b.finish(&mut rng, profile.multiplicity)
}
