//! Stream-faithful coupling of the mutation process with the single-birth
//! restricted process on the homogeneous tree.
//!
//! Both processes read the same per-type death clocks, per-edge birth clocks
//! and per-attempt mutation marks from one [`RandomnessSource`]. Events are
//! drawn from a heap holding at most one pending arrival per relevant stream
//! and ordered by `(time, stream key)`.

use super::config::{Configuration, TypeId};
use super::occupancy::Occupancy;
use super::randomness::{RandomnessSource, StreamKey};
use super::trajectory::{CensorReason, Event, EventKind, Termination, Trajectory};
use super::{DynamicsError, ProcessKind, ProcessParams, StopRule};
use crate::graph::{GraphSpec, SiteAddress, SiteArena, SiteId};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

const FULL_CHECK_EVERY: u64 = 1024;

/// A containment failure: a site of the restricted process that is not
/// occupied by the same positive type in the mutation process.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub time: f64,
    pub site: SiteAddress,
    pub restricted_type: TypeId,
    pub mutation_type: Option<TypeId>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.mutation_type {
            Some(a) => write!(
                f,
                "t={}: site {} has type {} in the restricted process but {} in the mutation process",
                self.time, self.site, self.restricted_type, a
            ),
            None => write!(
                f,
                "t={}: site {} (type {}) is occupied only in the restricted process",
                self.time, self.site, self.restricted_type
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    /// Mutation process `A`.
    pub mutation: Trajectory,
    /// Single-birth restricted process `B`.
    pub restricted: Trajectory,
    pub violations: Vec<Violation>,
    /// Largest number of restricted sites carrying a negative label at once.
    pub max_negative_in_restricted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Pending {
    Death(i64),
    Birth(SiteId, SiteId),
}

#[derive(Debug, Clone, Copy)]
struct Item {
    time: f64,
    key: StreamKey,
    index: u64,
    what: Pending,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Item {
    // Reversed: BinaryHeap is a max-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.key.cmp(&self.key))
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Cursor {
    next_index: u64,
    scheduled: bool,
}

struct Side {
    occ: Occupancy,
    log: Vec<Event>,
    done: Option<Termination>,
}

impl Side {
    fn new() -> Self {
        Side {
            occ: Occupancy::default(),
            log: Vec::new(),
            done: None,
        }
    }

    fn record(&mut self, time: f64, kind: EventKind) {
        self.log.push(Event {
            time,
            kind,
            population: self.occ.population() as u32,
            types: self.occ.type_count() as u32,
        });
        if self.occ.population() == 0 && self.done.is_none() {
            self.done = Some(Termination::Extinct { time });
        }
    }
}

struct Coupler {
    arena: SiteArena,
    src: RandomnessSource,
    heap: BinaryHeap<Item>,
    edges: HashMap<(u32, u32), Cursor>,
    deaths: HashMap<i64, Cursor>,
    site_keys: Vec<Option<u64>>,
    a: Side,
    b: Side,
    ever_b: Vec<bool>,
    next_shared: i64,
    next_solo: i64,
    time: f64,
    events: u64,
    violations: Vec<Violation>,
    max_negative: usize,
}

impl Coupler {
    fn site_key(&mut self, id: SiteId) -> u64 {
        if self.site_keys.len() <= id.idx() {
            self.site_keys.resize(id.idx() + 1, None);
        }
        if let Some(k) = self.site_keys[id.idx()] {
            return k;
        }
        let k = RandomnessSource::site_key(&self.arena.address(id));
        self.site_keys[id.idx()] = Some(k);
        k
    }

    fn ever(&self, id: SiteId) -> bool {
        self.ever_b.get(id.idx()).copied().unwrap_or(false)
    }

    fn set_ever(&mut self, id: SiteId) {
        if self.ever_b.len() <= id.idx() {
            self.ever_b.resize(id.idx() + 1, false);
        }
        self.ever_b[id.idx()] = true;
    }

    fn schedule_death(&mut self, ty: i64) {
        let cursor = self.deaths.entry(ty).or_default();
        if cursor.scheduled {
            return;
        }
        let key = StreamKey::DeathClock(ty);
        let (index, time) = self
            .src
            .next_arrival_after(key, self.time, cursor.next_index);
        cursor.scheduled = true;
        cursor.next_index = index;
        self.heap.push(Item {
            time,
            key,
            index,
            what: Pending::Death(ty),
        });
    }

    fn schedule_edges(&mut self, v: SiteId) {
        let deg = self.arena.degree(v);
        for j in 0..deg {
            let w = self.arena.neighbor(v, j).expect("j < degree");
            let cursor = *self.edges.entry((v.0, w.0)).or_default();
            if cursor.scheduled {
                continue;
            }
            let key = StreamKey::BirthClock {
                from: self.site_key(v),
                to: self.site_key(w),
            };
            let (index, time) = self
                .src
                .next_arrival_after(key, self.time, cursor.next_index);
            self.edges.insert(
                (v.0, w.0),
                Cursor {
                    next_index: index,
                    scheduled: true,
                },
            );
            self.heap.push(Item {
                time,
                key,
                index,
                what: Pending::Birth(v, w),
            });
        }
    }

    fn reschedule(&mut self, item: Item) {
        let next = item.index + 1;
        let time = self.src.arrival(item.key, next);
        let cursor = match item.what {
            Pending::Death(ty) => self.deaths.get_mut(&ty),
            Pending::Birth(v, w) => self.edges.get_mut(&(v.0, w.0)),
        }
        .expect("scheduled stream has a cursor");
        cursor.next_index = next;
        self.heap.push(Item {
            time,
            index: next,
            ..item
        });
    }

    fn unschedule(&mut self, item: Item) {
        let cursor = match item.what {
            Pending::Death(ty) => self.deaths.get_mut(&ty),
            Pending::Birth(v, w) => self.edges.get_mut(&(v.0, w.0)),
        }
        .expect("scheduled stream has a cursor");
        cursor.scheduled = false;
        cursor.next_index = item.index + 1;
    }

    fn death(&mut self, item: Item, ty: i64) {
        let in_a = self.a.occ.has_type(ty);
        let in_b = self.b.occ.has_type(ty);
        if !in_a && !in_b {
            self.unschedule(item);
            return;
        }
        self.events += 1;
        let mut touched = Vec::new();
        if in_a {
            touched.extend(self.a.occ.remove_block(ty));
            self.a
                .record(item.time, EventKind::TypeDeath { ty: TypeId(ty) });
        }
        if in_b {
            touched.extend(self.b.occ.remove_block(ty));
            self.b
                .record(item.time, EventKind::TypeDeath { ty: TypeId(ty) });
        }
        self.reschedule(item);
        for u in touched {
            self.check_site(SiteId(u));
        }
    }

    fn birth(&mut self, item: Item, v: SiteId, w: SiteId) {
        let active = self.a.occ.is_occupied(v.0) || self.b.occ.is_occupied(v.0);
        if !active {
            self.unschedule(item);
            return;
        }
        let births_a = self.a.occ.is_occupied(v.0) && !self.a.occ.is_occupied(w.0);
        let births_b = self.b.occ.is_occupied(v.0)
            && !self.b.occ.is_occupied(w.0)
            && !self.ever(w)
            && self.arena.level(w).is_some_and(|l| l >= 0);
        if births_a || births_b {
            self.events += 1;
            let (from, to) = match item.key {
                StreamKey::BirthClock { from, to } => (from, to),
                _ => unreachable!("birth item carries a birth key"),
            };
            let mutated = self.src.mark(from, to, item.index);
            let fresh = if !mutated {
                None
            } else if births_a && births_b {
                self.next_shared += 1;
                Some(self.next_shared - 1)
            } else {
                self.next_solo += 1;
                Some(-(self.next_solo - 1))
            };
            for (side, births) in [(&mut self.a, births_a), (&mut self.b, births_b)] {
                if !births {
                    continue;
                }
                let parent = side.occ.type_of(v.0).expect("occupied parent");
                let child = fresh.unwrap_or(parent);
                side.occ.insert(w.0, child);
                side.record(
                    item.time,
                    EventKind::Birth {
                        from: Some(v),
                        to: Some(w),
                        parent_type: TypeId(parent),
                        child_type: TypeId(child),
                        mutated,
                    },
                );
            }
            if births_b {
                self.set_ever(w);
            }
            if let Some(ty) = fresh {
                self.schedule_death(ty);
            }
            self.schedule_edges(w);
            self.check_site(w);
        }
        self.reschedule(item);
    }

    fn check_site(&mut self, u: SiteId) {
        let Some(tb) = self.b.occ.type_of(u.0) else {
            return;
        };
        let ta = self.a.occ.type_of(u.0);
        if tb < 0 || ta != Some(tb) {
            self.violations.push(Violation {
                time: self.time,
                site: self.arena.address(u),
                restricted_type: TypeId(tb),
                mutation_type: ta.map(TypeId),
            });
        }
    }

    fn full_check(&mut self) {
        let units = self.b.occ.units().to_vec();
        let mut negative = 0;
        for u in units {
            if self.b.occ.type_of(u).is_some_and(|t| t < 0) {
                negative += 1;
            }
            self.check_site(SiteId(u));
        }
        self.max_negative = self.max_negative.max(negative);
    }

    fn note_negative(&mut self) {
        if self.next_solo > 1 {
            let n = self
                .b
                .occ
                .live_types()
                .iter()
                .filter(|&&t| t < 0)
                .map(|&t| self.b.occ.block(t).len())
                .sum();
            self.max_negative = self.max_negative.max(n);
        }
    }

    fn finish(self, stop_reason: Option<CensorReason>, init_types: Vec<TypeId>) -> CoupledRun {
        let time = self.time;
        let build = |side: Side, arena: &SiteArena, next: i64| -> Trajectory {
            let mut cfg = Configuration::empty();
            for &u in side.occ.units() {
                let ty = TypeId(side.occ.type_of(u).expect("occupied"));
                cfg.insert_any(arena.address(SiteId(u)), ty)
                    .expect("distinct sites");
            }
            cfg.set_next_type(next);
            let termination = side.done.unwrap_or(Termination::Censored {
                time,
                reason: stop_reason.unwrap_or(CensorReason::TimeHorizon),
            });
            let event_count = side.log.len() as u64;
            Trajectory {
                final_population: side.occ.population(),
                final_types: side.occ.type_count(),
                events: side.log,
                termination,
                initial_types: init_types.clone(),
                initial_population: 1,
                final_config: Some(cfg),
                event_count,
                sites: Some(arena.clone()),
            }
        };
        let next = self.next_shared;
        CoupledRun {
            mutation: build(self.a, &self.arena, next),
            restricted: build(self.b, &self.arena, next),
            violations: self.violations,
            max_negative_in_restricted: self.max_negative,
        }
    }
}

/// Runs the mutation process and the single-birth restricted process on
/// `HomTree(d)` from one type-1 pathogen at the root, driven by shared
/// streams, and records every containment failure. `n_max` applies to the
/// mutation process.
pub fn simulate_coupled(
    d: u32,
    lambda: f64,
    r: f64,
    stop: &StopRule,
    seed: u64,
) -> Result<CoupledRun, DynamicsError> {
    ProcessParams::new(ProcessKind::Mutation, lambda, r)?;
    let g = GraphSpec::hom_tree(d)?;
    let arena = SiteArena::new(&g)?;
    let mut c = Coupler {
        arena,
        src: RandomnessSource::new(seed, lambda, r),
        heap: BinaryHeap::new(),
        edges: HashMap::new(),
        deaths: HashMap::new(),
        site_keys: Vec::new(),
        a: Side::new(),
        b: Side::new(),
        ever_b: Vec::new(),
        next_shared: 2,
        next_solo: 1,
        time: 0.0,
        events: 0,
        violations: Vec::new(),
        max_negative: 0,
    };
    let root = c.arena.root();
    c.a.occ.insert(root.0, 1);
    c.b.occ.insert(root.0, 1);
    c.set_ever(root);
    c.schedule_death(1);
    c.schedule_edges(root);

    let mut reason = None;
    while let Some(item) = c.heap.pop() {
        if c.a.occ.population() == 0 && c.b.occ.population() == 0 {
            break;
        }
        if c.a.occ.population() >= stop.n_max {
            reason = Some(CensorReason::PopulationCap);
            break;
        }
        if item.time > stop.t_max {
            c.time = stop.t_max;
            reason = Some(CensorReason::TimeHorizon);
            break;
        }
        c.time = item.time;
        match item.what {
            Pending::Death(ty) => c.death(item, ty),
            Pending::Birth(v, w) => c.birth(item, v, w),
        }
        c.note_negative();
        if c.events.is_multiple_of(FULL_CHECK_EVERY) {
            c.full_check();
        }
    }
    c.full_check();
    Ok(c.finish(reason, vec![TypeId(1)]))
}
