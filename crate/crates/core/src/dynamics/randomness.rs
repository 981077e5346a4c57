//! Keyed random streams for the coupled construction.
//!
//! Every stream is seeded from the master seed and its key alone, so a key
//! replays the same values no matter which process reads it or in what order.

use crate::graph::SiteAddress;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use std::collections::HashMap;

/// Identity of one stream. Sites are identified by [`RandomnessSource::site_key`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StreamKey {
    /// Rate-1 clock killing every individual of a type.
    DeathClock(i64),
    /// Rate-`lambda` birth attempts along a directed edge.
    BirthClock { from: u64, to: u64 },
    /// Bernoulli(`r`) mark of the `index`-th attempt along a directed edge.
    MutationMark { from: u64, to: u64, index: u64 },
}

const TAG_DEATH: u64 = 0x6465_6174_6800_0001;
const TAG_BIRTH: u64 = 0x6269_7274_6800_0002;
const TAG_MARK: u64 = 0x6d61_726b_0000_0003;
const TAG_SITE: u64 = 0x7369_7465_0000_0004;

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn mix(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |h, &p| splitmix64(h ^ splitmix64(p)))
}

#[derive(Debug, Clone)]
struct Clock {
    rng: ChaCha8Rng,
    arrivals: Vec<f64>,
}

/// Lazily materialized exponential clocks and Bernoulli marks.
#[derive(Debug, Clone)]
pub struct RandomnessSource {
    master: u64,
    lambda: f64,
    r: f64,
    clocks: HashMap<StreamKey, Clock>,
}

impl RandomnessSource {
    pub fn new(master: u64, lambda: f64, r: f64) -> Self {
        RandomnessSource {
            master,
            lambda,
            r,
            clocks: HashMap::new(),
        }
    }

    /// Canonical 64-bit identity of a site, independent of materialization order.
    pub fn site_key(site: &SiteAddress) -> u64 {
        match site {
            SiteAddress::Tree(labels) => labels
                .iter()
                .fold(mix(&[TAG_SITE, 0]), |h, &l| mix(&[h, u64::from(l)])),
            SiteAddress::Lattice(coords) => {
                let mut parts = vec![TAG_SITE, 1];
                parts.extend(coords.iter().map(|&c| c as u64));
                mix(&parts)
            }
            SiteAddress::Index(i) => mix(&[TAG_SITE, 2, *i as u64]),
        }
    }

    fn stream_seed(&self, key: StreamKey) -> u64 {
        match key {
            StreamKey::DeathClock(k) => mix(&[self.master, TAG_DEATH, k as u64]),
            StreamKey::BirthClock { from, to } => mix(&[self.master, TAG_BIRTH, from, to]),
            StreamKey::MutationMark { from, to, index } => {
                mix(&[self.master, TAG_MARK, from, to, index])
            }
        }
    }

    /// Time of arrival number `index` (0-based) of a clock stream.
    ///
    /// # Panics
    /// On a mark key.
    pub fn arrival(&mut self, key: StreamKey, index: u64) -> f64 {
        let rate = match key {
            StreamKey::DeathClock(_) => 1.0,
            StreamKey::BirthClock { .. } => self.lambda,
            StreamKey::MutationMark { .. } => panic!("mark streams carry no arrival times"),
        };
        let seed = self.stream_seed(key);
        let clock = self.clocks.entry(key).or_insert_with(|| Clock {
            rng: ChaCha8Rng::seed_from_u64(seed),
            arrivals: Vec::new(),
        });
        while clock.arrivals.len() as u64 <= index {
            let gap: f64 = clock.rng.sample(Exp1);
            let last = clock.arrivals.last().copied().unwrap_or(0.0);
            clock.arrivals.push(last + gap / rate);
        }
        clock.arrivals[index as usize]
    }

    /// First arrival strictly after `t`, searching from `from_index`.
    pub fn next_arrival_after(&mut self, key: StreamKey, t: f64, from_index: u64) -> (u64, f64) {
        let mut i = from_index;
        loop {
            let a = self.arrival(key, i);
            if a > t {
                return (i, a);
            }
            i += 1;
        }
    }

    /// Mutation mark for attempt `index` along `from -> to`.
    pub fn mark(&self, from: u64, to: u64, index: u64) -> bool {
        let seed = self.stream_seed(StreamKey::MutationMark { from, to, index });
        ChaCha8Rng::seed_from_u64(seed).random_bool(self.r)
    }
}
