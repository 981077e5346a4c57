//! Event logs and their line-oriented export.
//!
//! Export format (one record per line, tab separated):
//!
//! ```text
//! # mutacp trajectory v1
//! # time    event    site    type    population    types
//! 0.4173    M    /1    2    2    2
//! 1.0342    D    -    1    1    1
//! # end    censored-time    200
//! ```
//!
//! * `time`: shortest decimal that round-trips the `f64` event time;
//! * `event`: `B` birth of the parent's type, `M` birth of a new type, `D`
//!   death of a whole type block, `I` death of a single individual;
//! * `site`: target of a birth or the dying individual's site, `-` when the
//!   event has no single site (type deaths, non-spatial runs); tree sites are
//!   written as `/`-joined labels with `/` for the root;
//! * `type`: newborn's type for births, dying type for deaths;
//! * `population`, `types`: `|A|` and `N(A)` after the event.
//!
//! The trailer records the termination: `extinct`, `censored-time`,
//! `censored-population`, `censored-types` or `watched-type-died`, followed
//! by the termination time.

use super::config::{Configuration, TypeId};
use crate::graph::{SiteAddress, SiteArena, SiteId};
use std::io::{self, Write};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Birth {
        from: Option<SiteId>,
        to: Option<SiteId>,
        parent_type: TypeId,
        child_type: TypeId,
        mutated: bool,
    },
    TypeDeath {
        ty: TypeId,
    },
    IndividualDeath {
        site: Option<SiteId>,
        ty: TypeId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    /// `|A|` after the event.
    pub population: u32,
    /// `N(A)` after the event.
    pub types: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CensorReason {
    TimeHorizon,
    PopulationCap,
    TypeCap,
    /// The stopping rule watched a type and that type died out.
    WatchedTypeDied,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Extinct { time: f64 },
    Censored { time: f64, reason: CensorReason },
}

impl Termination {
    pub fn time(&self) -> f64 {
        match self {
            Termination::Extinct { time } | Termination::Censored { time, .. } => *time,
        }
    }

    pub fn is_extinct(&self) -> bool {
        matches!(self, Termination::Extinct { .. })
    }

    /// Trailer code used in the event log.
    pub fn code(&self) -> &'static str {
        match self {
            Termination::Extinct { .. } => "extinct",
            Termination::Censored {
                reason: CensorReason::TimeHorizon,
                ..
            } => "censored-time",
            Termination::Censored {
                reason: CensorReason::PopulationCap,
                ..
            } => "censored-population",
            Termination::Censored {
                reason: CensorReason::TypeCap,
                ..
            } => "censored-types",
            Termination::Censored {
                reason: CensorReason::WatchedTypeDied,
                ..
            } => "watched-type-died",
        }
    }
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub events: Vec<Event>,
    pub termination: Termination,
    /// Types present at time 0.
    pub initial_types: Vec<TypeId>,
    pub initial_population: usize,
    /// Final configuration; `None` for the non-spatial model.
    pub final_config: Option<Configuration>,
    pub final_population: usize,
    pub final_types: usize,
    /// Total number of events, including those not logged.
    pub event_count: u64,
    pub(crate) sites: Option<SiteArena>,
}

impl Trajectory {
    pub fn address(&self, id: SiteId) -> Option<SiteAddress> {
        self.sites.as_ref().map(|a| a.address(id))
    }

    fn site_field(&self, id: Option<SiteId>) -> String {
        match id.and_then(|i| self.address(i)) {
            Some(a) => a.to_string(),
            None => "-".into(),
        }
    }

    pub fn write_log<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# mutacp trajectory v1")?;
        writeln!(w, "# time\tevent\tsite\ttype\tpopulation\ttypes")?;
        for e in &self.events {
            let (code, site, ty) = match e.kind {
                EventKind::Birth {
                    to,
                    child_type,
                    mutated,
                    ..
                } => (
                    if mutated { "M" } else { "B" },
                    self.site_field(to),
                    child_type,
                ),
                EventKind::TypeDeath { ty } => ("D", "-".to_string(), ty),
                EventKind::IndividualDeath { site, ty } => ("I", self.site_field(site), ty),
            };
            writeln!(
                w,
                "{}\t{code}\t{site}\t{ty}\t{}\t{}",
                e.time, e.population, e.types
            )?;
        }
        writeln!(
            w,
            "# end\t{}\t{}",
            self.termination.code(),
            self.termination.time()
        )
    }

    pub fn log_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_log(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii log")
    }
}
