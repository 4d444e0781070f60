use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::{MarketMeta, Zone};

/// Source delay τ relative to the target's next observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lag {
    /// τ = 0: the source's same-day return is already known to the target.
    SameDay,
    /// τ = 1: only the source's previous-day return is available.
    PreviousDay,
}

impl Lag {
    pub fn tau(self) -> usize {
        match self {
            Lag::SameDay => 0,
            Lag::PreviousDay => 1,
        }
    }

    pub fn from_tau(tau: usize) -> Result<Self> {
        match tau {
            0 => Ok(Lag::SameDay),
            1 => Ok(Lag::PreviousDay),
            other => Err(Error::Config(format!("lag τ must be 0 or 1, got {other}"))),
        }
    }
}

impl fmt::Display for Lag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tau())
    }
}

/// (source zone, target zone) → τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "LagPolicyRepr", into = "LagPolicyRepr")]
pub struct LagPolicy {
    table: [[Lag; 3]; 3],
}

impl Default for LagPolicy {
    fn default() -> Self {
        Self::time_zone()
    }
}

impl LagPolicy {
    /// A source whose session group opens earlier in the day than the
    /// target's is seen the same day (τ=0); every other direction, including
    /// pairs inside one group, uses τ=1.
    pub fn time_zone() -> Self {
        let mut table = [[Lag::PreviousDay; 3]; 3];
        for s in Zone::ALL {
            for t in Zone::ALL {
                if s < t {
                    table[s.index()][t.index()] = Lag::SameDay;
                }
            }
        }
        Self { table }
    }

    pub fn uniform(lag: Lag) -> Self {
        Self {
            table: [[lag; 3]; 3],
        }
    }

    /// τ=0 for the listed (source, target) directions, τ=1 elsewhere.
    pub fn from_same_day(pairs: &[(Zone, Zone)]) -> Self {
        let mut p = Self::uniform(Lag::PreviousDay);
        for &(s, t) in pairs {
            p.table[s.index()][t.index()] = Lag::SameDay;
        }
        p
    }

    pub fn lag(&self, source: Zone, target: Zone) -> Lag {
        self.table[source.index()][target.index()]
    }

    pub fn same_day_pairs(&self) -> Vec<(Zone, Zone)> {
        Zone::ALL
            .iter()
            .flat_map(|&s| Zone::ALL.iter().map(move |&t| (s, t)))
            .filter(|&(s, t)| self.lag(s, t) == Lag::SameDay)
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct LagPolicyRepr {
    same_day: Vec<(Zone, Zone)>,
}

impl From<LagPolicyRepr> for LagPolicy {
    fn from(r: LagPolicyRepr) -> Self {
        LagPolicy::from_same_day(&r.same_day)
    }
}

impl From<LagPolicy> for LagPolicyRepr {
    fn from(p: LagPolicy) -> Self {
        LagPolicyRepr {
            same_day: p.same_day_pairs(),
        }
    }
}

pub fn lag_for_pair(source: &MarketMeta, target: &MarketMeta, policy: &LagPolicy) -> Lag {
    policy.lag(source.zone, target.zone)
}
