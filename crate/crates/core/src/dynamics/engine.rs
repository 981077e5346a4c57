//! Aggregate next-event (Gillespie) engine.
//!
//! The total event rate is `Q(A) = D(A) + lambda * P(A)`, where `D(A)` is the
//! number of types (block deaths) or of individuals (individual deaths) and
//! `P(A)` counts directed pairs `(x, y)` with `x` occupied and `y` able to
//! receive a birth. `P(A)` is maintained incrementally. A birth pair is drawn
//! by rejection from `(occupied site, neighbor slot)` pairs, which is uniform
//! over receivable pairs; after repeated rejections the pairs are enumerated.

use super::config::{Configuration, TypeId};
use super::occupancy::Occupancy;
use super::trajectory::{CensorReason, Event, EventKind, Termination, Trajectory};
use super::{DynamicsError, ProcessKind, ProcessParams, StopRule};
use crate::graph::{GraphSpec, SiteAddress, SiteArena, SiteId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use std::collections::VecDeque;

const MAX_REJECTIONS: u32 = 64;

/// Outcome of [`Engine::advance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Progress {
    /// The requested horizon was reached with the run still going.
    Reached,
    Stopped(Termination),
}

/// One run of a process, advanced event by event.
#[derive(Debug, Clone)]
pub struct Engine {
    kind: ProcessKind,
    lambda: f64,
    r: f64,
    arena: Option<SiteArena>,
    free_units: Vec<u32>,
    next_unit: u32,
    occ: Occupancy,
    rng: ChaCha8Rng,
    time: f64,
    pending: Option<f64>,
    /// Receivable birth pairs `P(A)`; spatial kinds only.
    pairs: u64,
    /// Ever-occupied flags for the single-birth restricted process.
    ever: Vec<bool>,
    level_guard: bool,
    next_type: i64,
    initial_types: Vec<TypeId>,
    initial_population: usize,
    log: Option<Vec<Event>>,
    event_count: u64,
    done: Option<Termination>,
}

impl Engine {
    pub fn new(
        g: &GraphSpec,
        params: &ProcessParams,
        init: &Configuration,
        seed: u64,
    ) -> Result<Self, DynamicsError> {
        // A zero birth rate is allowed here for pure-death baselines.
        if !(params.lambda >= 0.0 && params.lambda.is_finite()) || !(0.0..=1.0).contains(&params.r)
        {
            return Err(DynamicsError::InvalidParameter(format!(
                "need lambda >= 0 and r in [0, 1], got {} and {}",
                params.lambda, params.r
            )));
        }
        if init.is_empty() {
            return Err(DynamicsError::InvalidParameter(
                "initial configuration must be nonempty".into(),
            ));
        }
        let mut e = Engine {
            kind: params.kind,
            lambda: params.lambda,
            r: params.r,
            arena: None,
            free_units: Vec::new(),
            next_unit: 0,
            occ: Occupancy::default(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            time: 0.0,
            pending: None,
            pairs: 0,
            ever: Vec::new(),
            level_guard: false,
            next_type: init.next_type(),
            initial_types: init.blocks().keys().copied().collect(),
            initial_population: init.population(),
            log: None,
            event_count: 0,
            done: None,
        };
        if params.kind == ProcessKind::NonSpatial {
            for (ty, block) in init.blocks() {
                for _ in block {
                    e.occ.insert(e.next_unit, ty.0);
                    e.next_unit += 1;
                }
            }
        } else {
            let mut arena = SiteArena::new(g)?;
            for (site, ty) in init.occupied() {
                let id = arena.intern(g, site)?;
                e.occ.insert(id.0, ty.0);
                if params.kind == ProcessKind::SingleBirthRestricted {
                    e.mark_ever(id);
                }
            }
            e.level_guard = params.kind == ProcessKind::SingleBirthRestricted && g.is_tree();
            e.arena = Some(arena);
            e.pairs = e.count_pairs();
        }
        Ok(e)
    }

    /// Keep a full event log.
    pub fn recording(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// `|A|`
    pub fn population(&self) -> usize {
        self.occ.population()
    }

    /// `N(A)`
    pub fn type_count(&self) -> usize {
        self.occ.type_count()
    }

    pub fn has_type(&self, ty: TypeId) -> bool {
        self.occ.has_type(ty.0)
    }

    pub fn event_count(&self) -> u64 {
        self.event_count
    }

    pub fn termination(&self) -> Option<Termination> {
        self.done
    }

    pub fn arena(&self) -> Option<&SiteArena> {
        self.arena.as_ref()
    }

    pub fn occupied_sites(&self) -> impl Iterator<Item = SiteId> + '_ {
        self.occ.units().iter().map(|&u| SiteId(u))
    }

    pub fn type_of(&self, site: SiteId) -> Option<TypeId> {
        self.arena.as_ref()?;
        self.occ.type_of(site.0).map(TypeId)
    }

    /// Maintained count of receivable birth pairs (boundary pairs for the
    /// unrestricted spatial processes, `|A|` for the non-spatial model).
    /// Whether `site` is occupied; materializes the address if needed.
    pub fn occupies(&mut self, g: &GraphSpec, site: &SiteAddress) -> Result<bool, DynamicsError> {
        let Some(arena) = self.arena.as_mut() else {
            return Ok(false);
        };
        let id = arena.intern(g, site)?;
        Ok(self.occ.is_occupied(id.0))
    }

    pub fn birth_pairs(&self) -> u64 {
        match self.arena {
            Some(_) => self.pairs,
            None => self.occ.population() as u64,
        }
    }

    fn death_rate(&self) -> f64 {
        match self.kind {
            ProcessKind::IndividualDeath => self.occ.population() as f64,
            _ => self.occ.type_count() as f64,
        }
    }

    /// Current aggregate event rate `Q(A)`.
    pub fn total_rate(&self) -> f64 {
        self.death_rate() + self.lambda * self.birth_pairs() as f64
    }

    /// `sum_{x in A} rho^level(x)`; requires a tree graph.
    pub fn weight(&self, rho: f64) -> Option<f64> {
        let arena = self.arena.as_ref()?;
        self.occ
            .units()
            .iter()
            .map(|&u| arena.level(SiteId(u)).map(|l| rho.powi(l)))
            .sum()
    }

    /// Connected components of the occupied set, each sorted by site id.
    pub fn components(&mut self) -> Vec<Vec<SiteId>> {
        let Some(arena) = self.arena.as_mut() else {
            return Vec::new();
        };
        let mut seen = std::collections::HashSet::new();
        let mut units: Vec<u32> = self.occ.units().to_vec();
        units.sort_unstable();
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in units {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![SiteId(start)];
            queue.push_back(SiteId(start));
            while let Some(x) = queue.pop_front() {
                for y in arena.neighbors(x) {
                    if self.occ.is_occupied(y.0) && seen.insert(y.0) {
                        comp.push(y);
                        queue.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Snapshot of the current configuration; `None` for the non-spatial model.
    pub fn snapshot(&self) -> Option<Configuration> {
        let arena = self.arena.as_ref()?;
        let mut c = Configuration::empty();
        for &u in self.occ.units() {
            let ty = TypeId(self.occ.type_of(u).expect("occupied"));
            c.insert(arena.address(SiteId(u)), ty)
                .expect("distinct sites");
        }
        c.set_next_type(self.next_type);
        Some(c)
    }

    fn mark_ever(&mut self, id: SiteId) {
        if self.ever.len() <= id.idx() {
            self.ever
                .resize((id.idx() + 1).max(2 * self.ever.len()), false);
        }
        self.ever[id.idx()] = true;
    }

    #[inline]
    fn receivable(&self, y: SiteId) -> bool {
        if self.occ.is_occupied(y.0) {
            return false;
        }
        if self.kind != ProcessKind::SingleBirthRestricted {
            return true;
        }
        if self.ever.get(y.idx()).copied().unwrap_or(false) {
            return false;
        }
        !self.level_guard
            || self
                .arena
                .as_ref()
                .and_then(|a| a.level(y))
                .is_none_or(|l| l >= 0)
    }

    /// (receivable neighbors, occupied neighbors) of `y`.
    fn neighbor_counts(&mut self, y: SiteId) -> (u64, u64) {
        let arena = self.arena.as_mut().expect("spatial");
        let deg = arena.degree(y);
        let (mut recv, mut occd) = (0, 0);
        for j in 0..deg {
            let z = self
                .arena
                .as_mut()
                .expect("spatial")
                .neighbor(y, j)
                .expect("j < degree");
            if self.occ.is_occupied(z.0) {
                occd += 1;
            } else if self.receivable(z) {
                recv += 1;
            }
        }
        (recv, occd)
    }

    /// Direct enumeration of receivable pairs.
    pub fn count_pairs(&mut self) -> u64 {
        if self.arena.is_none() {
            return self.occ.population() as u64;
        }
        let units = self.occ.units().to_vec();
        units
            .into_iter()
            .map(|u| self.neighbor_counts(SiteId(u)).0)
            .sum()
    }

    fn next_event_time(&mut self) -> f64 {
        if let Some(t) = self.pending {
            return t;
        }
        let q = self.total_rate();
        let t = if q > 0.0 {
            let wait: f64 = self.rng.sample(Exp1);
            self.time + wait / q
        } else {
            f64::INFINITY
        };
        self.pending = Some(t);
        t
    }

    fn check_stop(&self, stop: &StopRule) -> Option<Termination> {
        let censor = |reason| {
            Some(Termination::Censored {
                time: self.time,
                reason,
            })
        };
        if self.occ.population() == 0 {
            return Some(Termination::Extinct { time: self.time });
        }
        if self.occ.population() >= stop.n_max {
            return censor(CensorReason::PopulationCap);
        }
        if stop.k_max.is_some_and(|k| (self.next_type - 1) as u64 >= k) {
            return censor(CensorReason::TypeCap);
        }
        if stop.watch_type.is_some_and(|w| !self.occ.has_type(w.0)) {
            return censor(CensorReason::WatchedTypeDied);
        }
        None
    }

    /// Processes every event up to `horizon` unless the stopping rule fires
    /// first. The pending next event survives across calls, so observing at
    /// intermediate horizons never changes the trajectory.
    pub fn advance(&mut self, horizon: f64, stop: &StopRule) -> Progress {
        if let Some(t) = self.done {
            return Progress::Stopped(t);
        }
        loop {
            if let Some(t) = self.check_stop(stop) {
                self.done = Some(t);
                return Progress::Stopped(t);
            }
            let next = self.next_event_time();
            if next > horizon.min(stop.t_max) {
                if stop.t_max <= horizon {
                    self.time = stop.t_max;
                    let t = Termination::Censored {
                        time: stop.t_max,
                        reason: CensorReason::TimeHorizon,
                    };
                    self.done = Some(t);
                    return Progress::Stopped(t);
                }
                self.time = horizon;
                return Progress::Reached;
            }
            self.execute(next);
        }
    }

    /// Runs to termination.
    pub fn run(mut self, stop: &StopRule) -> Trajectory {
        self.advance(f64::INFINITY, stop);
        self.into_trajectory()
    }

    pub fn into_trajectory(self) -> Trajectory {
        let final_config = self.snapshot();
        Trajectory {
            events: self.log.unwrap_or_default(),
            termination: self.done.unwrap_or(Termination::Censored {
                time: self.time,
                reason: CensorReason::TimeHorizon,
            }),
            initial_types: self.initial_types,
            initial_population: self.initial_population,
            final_config,
            final_population: self.occ.population(),
            final_types: self.occ.type_count(),
            event_count: self.event_count,
            sites: self.arena,
        }
    }

    fn execute(&mut self, t: f64) {
        self.pending = None;
        self.time = t;
        self.event_count += 1;
        let death = self.death_rate();
        let u: f64 = self.rng.random::<f64>() * (death + self.lambda * self.birth_pairs() as f64);
        let kind = if u < death {
            self.death_event()
        } else {
            self.birth_event()
        };
        if let Some(log) = self.log.as_mut() {
            log.push(Event {
                time: t,
                kind,
                population: self.occ.population() as u32,
                types: self.occ.type_count() as u32,
            });
        }
        if cfg!(debug_assertions)
            && (self.event_count.is_multiple_of(512) || self.occ.population() <= 16)
        {
            self.debug_validate();
        }
    }

    fn debug_validate(&mut self) {
        self.occ.validate().expect("occupancy invariants");
        let recount = self.count_pairs();
        assert_eq!(
            recount,
            self.birth_pairs(),
            "maintained birth-pair count drifted"
        );
    }

    fn remove_site(&mut self, y: SiteId) -> i64 {
        let (ty, _) = self.occ.remove(y.0);
        let (recv, occd) = self.neighbor_counts(y);
        self.pairs -= recv;
        if self.receivable(y) {
            self.pairs += occd;
        }
        ty
    }

    fn death_event(&mut self) -> EventKind {
        match (self.kind, self.arena.is_some()) {
            (ProcessKind::IndividualDeath, _) => {
                let u = self.occ.random_unit(&mut self.rng);
                let ty = if self.arena.is_some() {
                    self.remove_site(SiteId(u))
                } else {
                    self.occ.remove(u).0
                };
                EventKind::IndividualDeath {
                    site: self.arena.is_some().then_some(SiteId(u)),
                    ty: TypeId(ty),
                }
            }
            (_, true) => {
                let ty = self.occ.random_type(&mut self.rng);
                let members = self.occ.block(ty).to_vec();
                for u in members {
                    self.remove_site(SiteId(u));
                }
                EventKind::TypeDeath { ty: TypeId(ty) }
            }
            (_, false) => {
                let ty = self.occ.random_type(&mut self.rng);
                let units = self.occ.remove_block(ty);
                self.free_units.extend(units);
                EventKind::TypeDeath { ty: TypeId(ty) }
            }
        }
    }

    fn pick_pair(&mut self) -> (SiteId, SiteId) {
        let max_deg = self.arena.as_ref().expect("spatial").max_degree();
        for _ in 0..MAX_REJECTIONS {
            let x = SiteId(self.occ.random_unit(&mut self.rng));
            let j = self.rng.random_range(0..max_deg);
            if let Some(y) = self.arena.as_mut().expect("spatial").neighbor(x, j) {
                if self.receivable(y) {
                    return (x, y);
                }
            }
        }
        let mut pairs = Vec::new();
        for &u in self.occ.units() {
            let x = SiteId(u);
            let deg = self.arena.as_mut().expect("spatial").degree(x);
            for j in 0..deg {
                let y = self
                    .arena
                    .as_mut()
                    .expect("spatial")
                    .neighbor(x, j)
                    .expect("j < degree");
                if self.receivable(y) {
                    pairs.push((x, y));
                }
            }
        }
        debug_assert_eq!(pairs.len() as u64, self.pairs);
        pairs[self.rng.random_range(0..pairs.len())]
    }

    fn birth_event(&mut self) -> EventKind {
        let mutated = self.rng.random_bool(self.r);
        if self.arena.is_none() {
            let parent = self.occ.random_unit(&mut self.rng);
            let parent_type = self.occ.type_of(parent).expect("occupied");
            let child_type = self.child_type(parent_type, mutated);
            let unit = self.free_units.pop().unwrap_or_else(|| {
                self.next_unit += 1;
                self.next_unit - 1
            });
            self.occ.insert(unit, child_type);
            return EventKind::Birth {
                from: None,
                to: None,
                parent_type: TypeId(parent_type),
                child_type: TypeId(child_type),
                mutated,
            };
        }
        let (x, y) = self.pick_pair();
        let parent_type = self.occ.type_of(x.0).expect("occupied");
        let child_type = self.child_type(parent_type, mutated);
        let (recv, occd) = self.neighbor_counts(y);
        self.pairs = self.pairs + recv - occd;
        self.occ.insert(y.0, child_type);
        if self.kind == ProcessKind::SingleBirthRestricted {
            self.mark_ever(y);
        }
        EventKind::Birth {
            from: Some(x),
            to: Some(y),
            parent_type: TypeId(parent_type),
            child_type: TypeId(child_type),
            mutated,
        }
    }

    fn child_type(&mut self, parent: i64, mutated: bool) -> i64 {
        if mutated {
            self.next_type += 1;
            self.next_type - 1
        } else {
            parent
        }
    }
}
