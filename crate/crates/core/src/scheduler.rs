//! Six-round parallel CPHASE schedule for the layered 3D cluster.
//!
//! Rounds 1–4 take the intra-layer edges split by lattice direction and the
//! parity of the source coordinate along that direction: `(U, even)`,
//! `(U, odd)`, `(V, even)`, `(V, odd)`. Rounds 5–6 take the interlayer edges
//! from odd and from even source layers; the closure edge from the last
//! layer back to the first has an even source layer and lands in round 6.
//! Every round is a matching, so all gates of a round run in parallel.

use serde::{Deserialize, Serialize};

use crate::edges::EdgeSet;
use crate::error::{Error, Result};
use crate::lattice::{Direction, LayerAssignment};

/// Worst-case shuttle time per round (50–100 μs reported for junction moves).
pub const DEFAULT_SHUTTLE_TIME: f64 = 100e-6;
/// Two-qubit gate time per round.
pub const DEFAULT_GATE_TIME: f64 = 10e-6;

pub const SCHEDULE_ROUNDS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub pairs: EdgeSet,
    pub shuttle_time: f64,
    pub gate_time: f64,
}

impl Round {
    pub fn duration(&self) -> f64 {
        self.shuttle_time + self.gate_time
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateSchedule {
    pub rounds: Vec<Round>,
}

pub fn build_schedule(assign: &LayerAssignment, periodic: bool) -> Result<GateSchedule> {
    if periodic && assign.layer_count() % 2 == 1 {
        return Err(Error::ScheduleInfeasible(format!(
            "periodic closure over {} layers is an odd cycle",
            assign.layer_count()
        )));
    }
    let mut rounds = vec![EdgeSet::new(); SCHEDULE_ROUNDS];
    for e in assign.intralayer_edges_tagged() {
        let k = match e.direction {
            Direction::U => 0,
            Direction::V => 2,
        } + e.parity as usize;
        rounds[k].insert(e.from, e.to)?;
    }
    for e in assign.interlayer_edges_tagged(periodic) {
        let k = if e.layer % 2 == 1 { 4 } else { 5 };
        rounds[k].insert(e.from, e.to)?;
    }
    Ok(GateSchedule {
        rounds: rounds
            .into_iter()
            .map(|pairs| Round { pairs, shuttle_time: DEFAULT_SHUTTLE_TIME, gate_time: DEFAULT_GATE_TIME })
            .collect(),
    })
}

fn check_time(name: &str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be a nonnegative time, got {t}")))
    }
}

/// Rounds run back to back, gates inside a round in parallel.
pub fn prep_time(schedule: &GateSchedule, t_gate: f64, t_shuttle: f64) -> Result<f64> {
    check_time("t_gate", t_gate)?;
    check_time("t_shuttle", t_shuttle)?;
    Ok(schedule.rounds.len() as f64 * (t_shuttle + t_gate))
}

impl GateSchedule {
    pub fn with_timing(mut self, t_gate: f64, t_shuttle: f64) -> Result<Self> {
        check_time("t_gate", t_gate)?;
        check_time("t_shuttle", t_shuttle)?;
        for r in &mut self.rounds {
            r.gate_time = t_gate;
            r.shuttle_time = t_shuttle;
        }
        Ok(self)
    }

    pub fn total_time(&self) -> f64 {
        self.rounds.iter().map(Round::duration).sum()
    }

    pub fn all_edges(&self) -> EdgeSet {
        self.rounds.iter().fold(EdgeSet::new(), |acc, r| acc.union(&r.pairs))
    }

    pub fn gate_count(&self) -> usize {
        self.rounds.iter().map(|r| r.pairs.len()).sum()
    }

    /// Every round a matching, rounds pairwise disjoint.
    pub fn is_well_formed(&self) -> bool {
        self.rounds.iter().all(|r| r.pairs.is_matching())
            && self.rounds.iter().enumerate().all(|(i, r)| {
                self.rounds[i + 1..].iter().all(|s| r.pairs.is_disjoint(&s.pairs))
            })
    }

    /// `round,pair_count,duration` rows, duration in seconds.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("round,pair_count,duration\n");
        for (k, r) in self.rounds.iter().enumerate() {
            out.push_str(&format!("{},{},{:e}\n", k + 1, r.pairs.len(), r.duration()));
        }
        out
    }
}

pub const SCHEDULE_SCHEMA_VERSION: u32 = 1;

/// Geometry the schedule was built for, so a consumer can rebuild the target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub rows: usize,
    pub cols: usize,
    pub d: f64,
    pub n: usize,
    pub periodic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub pairs: Vec<[usize; 2]>,
    pub shuttle_time: f64,
    pub gate_time: f64,
}

/// JSON form of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub schema_version: u32,
    pub lattice: LatticeParams,
    pub site_count: usize,
    pub rounds: Vec<RoundRecord>,
    pub prep_time: f64,
}

impl ScheduleReport {
    pub fn new(schedule: &GateSchedule, lattice: LatticeParams, site_count: usize) -> Self {
        let rounds = schedule
            .rounds
            .iter()
            .enumerate()
            .map(|(k, r)| RoundRecord {
                round: k + 1,
                pairs: r.pairs.iter().map(|(a, b)| [a, b]).collect(),
                shuttle_time: r.shuttle_time,
                gate_time: r.gate_time,
            })
            .collect();
        Self {
            schema_version: SCHEDULE_SCHEMA_VERSION,
            lattice,
            site_count,
            rounds,
            prep_time: schedule.total_time(),
        }
    }

    pub fn to_schedule(&self) -> Result<GateSchedule> {
        let rounds = self
            .rounds
            .iter()
            .map(|r| {
                Ok(Round {
                    pairs: EdgeSet::from_pairs(r.pairs.iter().map(|p| (p[0], p[1])))?,
                    shuttle_time: r.shuttle_time,
                    gate_time: r.gate_time,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GateSchedule { rounds })
    }
}
