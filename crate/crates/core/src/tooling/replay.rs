//! Line-delimited replay files.
//!
//! Line 1 is the header; every further line is one record tagged by `kind`.
//! Orders and chance outcomes are both stored, so a replay can be checked
//! without reproducing the generator.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{
    ChanceEvent, ChanceMode, GameState, GlobalAction, Hex, ReplayFeed, ScoreVector, Side, UnitId, UnitOrder, Waypoints,
};
use crate::scenario::{parse_scenario, serialize_scenario, ScenarioDoc};

pub const REPLAY_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplayHeader {
    pub version: u32,
    pub scenario_sha256: String,
    pub seed: u64,
    pub blue: String,
    pub red: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrderEntry {
    pub unit_id: u16,
    pub order_kind: String,
    /// Move: q, r per waypoint. Attack: target id. Scout: q, r, radius.
    pub order_args: Vec<i64>,
}

impl OrderEntry {
    pub fn new(id: UnitId, order: &UnitOrder) -> Self {
        let order_args = match order {
            UnitOrder::Move(w) => w.iter().flat_map(|h| [h.q as i64, h.r as i64]).collect(),
            UnitOrder::Attack(t) => vec![t.0 as i64],
            UnitOrder::Hold => Vec::new(),
            UnitOrder::Scout { anchor, radius } => vec![anchor.q as i64, anchor.r as i64, *radius as i64],
        };
        OrderEntry {
            unit_id: id.0,
            order_kind: order.kind_name().to_string(),
            order_args,
        }
    }

    pub fn to_order(&self) -> Option<(UnitId, UnitOrder)> {
        let a = &self.order_args;
        let int = |v: i64| i32::try_from(v).ok();
        let order = match (self.order_kind.as_str(), a.len()) {
            ("hold", 0) => UnitOrder::Hold,
            ("attack", 1) => UnitOrder::Attack(UnitId(u16::try_from(a[0]).ok()?)),
            ("scout", 3) => UnitOrder::Scout {
                anchor: Hex::new(int(a[0])?, int(a[1])?),
                radius: u32::try_from(a[2]).ok()?,
            },
            ("move", n) if n % 2 == 0 => {
                let hexes: Option<Vec<Hex>> = a.chunks(2).map(|c| Some(Hex::new(int(c[0])?, int(c[1])?))).collect();
                UnitOrder::Move(Waypoints::new(&hexes?)?)
            }
            _ => return None,
        };
        Some((UnitId(self.unit_id), order))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum ReplayRecord {
    Orders {
        tick: u64,
        side: Side,
        orders: Vec<OrderEntry>,
    },
    Chance(ChanceEvent),
    #[serde(rename_all = "camelCase")]
    Terminal {
        tick: u64,
        reason: String,
        final_hash: String,
        score: ScoreVector,
        vp: [f64; 2],
    },
}

impl ReplayRecord {
    pub fn orders(tick: u64, side: Side, action: &GlobalAction) -> Self {
        ReplayRecord::Orders {
            tick,
            side,
            orders: action.iter().map(|(id, o)| OrderEntry::new(id, o)).collect(),
        }
    }

    /// The closing record of a run that stopped at `state`.
    pub fn terminal(state: &GameState, reason: &str) -> Self {
        let (score, vp) = state.score_state();
        ReplayRecord::Terminal {
            tick: state.tick(),
            reason: reason.to_string(),
            final_hash: format!("{:016x}", state.state_hash()),
            score,
            vp,
        }
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt replay at line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("replay was recorded for scenario {expected}, got {found}")]
    ScenarioMismatch { expected: String, found: String },
    #[error("scenario: {0}")]
    Scenario(String),
}

/// SHA-256 (hex) of the canonical text of `doc`.
pub fn scenario_digest(doc: &ScenarioDoc) -> String {
    Sha256::digest(serialize_scenario(doc).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes one JSON record per line and flushes after each.
pub struct ReplayWriter<W: Write> {
    out: W,
}

impl ReplayWriter<BufWriter<File>> {
    pub fn create(path: &Path, header: &ReplayHeader) -> io::Result<Self> {
        ReplayWriter::new(BufWriter::new(File::create(path)?), header)
    }
}

impl<W: Write> ReplayWriter<W> {
    pub fn new(out: W, header: &ReplayHeader) -> io::Result<Self> {
        let mut w = ReplayWriter { out };
        w.line(header)?;
        Ok(w)
    }

    fn line<T: Serialize>(&mut self, value: &T) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, value)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }

    pub fn write(&mut self, record: &ReplayRecord) -> io::Result<()> {
        self.line(record)
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Parse a replay. The last record must be terminal.
pub fn read_replay(text: &str) -> Result<(ReplayHeader, Vec<ReplayRecord>), ReplayError> {
    let corrupt = |line: usize, message: String| ReplayError::Corrupt { line, message };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, first) = lines.next().ok_or_else(|| corrupt(1, "empty file".into()))?;
    let header: ReplayHeader = serde_json::from_str(first).map_err(|e| corrupt(1, e.to_string()))?;
    if header.version != REPLAY_VERSION {
        return Err(corrupt(1, format!("unsupported version {}", header.version)));
    }
    let mut records = Vec::new();
    for (i, l) in lines {
        records.push(serde_json::from_str(l).map_err(|e| corrupt(i + 1, e.to_string()))?);
    }
    if !matches!(records.last(), Some(ReplayRecord::Terminal { .. })) {
        return Err(corrupt(text.lines().count(), "missing terminal record".into()));
    }
    Ok((header, records))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub ok: bool,
    /// Tick of the first divergence.
    pub mismatch_at: Option<u64>,
    pub expected_hash: String,
    pub final_hash: String,
}

/// Re-run a replay against `scenario_text`, feeding recorded chance
/// outcomes instead of the generator, and compare the final state hash.
pub fn replay_verify(replay_text: &str, scenario_text: &str) -> Result<VerifyReport, ReplayError> {
    let (header, records) = read_replay(replay_text)?;
    let doc = parse_scenario(scenario_text).map_err(|e| ReplayError::Scenario(e.to_string()))?;
    let found = scenario_digest(&doc);
    if found != header.scenario_sha256 {
        return Err(ReplayError::ScenarioMismatch {
            expected: header.scenario_sha256,
            found,
        });
    }
    let mut state = GameState::instantiate(&doc, header.seed).map_err(|e| ReplayError::Scenario(e.to_string()))?;
    let mut chance = Vec::new();
    let mut orders = VecDeque::new();
    let mut end = None;
    for (i, r) in records.iter().enumerate() {
        match r {
            ReplayRecord::Chance(ev) => chance.push(*ev),
            ReplayRecord::Orders {
                tick,
                side,
                orders: list,
            } => {
                let mut a = GlobalAction::new();
                for o in list {
                    let (id, order) = o.to_order().ok_or_else(|| ReplayError::Corrupt {
                        line: i + 2,
                        message: format!("bad order {o:?}"),
                    })?;
                    a.set(id, order);
                }
                orders.push_back((*tick, *side, a));
            }
            ReplayRecord::Terminal { tick, final_hash, .. } => end = Some((*tick, final_hash.clone())),
        }
    }
    let (end_tick, expected_hash) = end.expect("read_replay checks the terminal record");
    state.set_chance_mode(ChanceMode::Replay(ReplayFeed::new(chance)));
    let mut mismatch = None;
    loop {
        while let Some((t, side, a)) = orders.front() {
            if *t > state.tick() {
                break;
            }
            if *t < state.tick() || state.apply_orders(*side, a).is_err() {
                mismatch.get_or_insert(state.tick());
            }
            orders.pop_front();
        }
        if state.tick() >= end_tick || state.terminal().is_some() {
            break;
        }
        if state.step().is_err() {
            mismatch.get_or_insert(state.tick());
            break;
        }
    }
    if let ChanceMode::Replay(feed) = state.chance_mode() {
        if let Some(t) = feed.first_mismatch() {
            mismatch = Some(mismatch.map_or(t, |m| m.min(t)));
        }
        if feed.remaining() > 0 {
            mismatch.get_or_insert(state.tick());
        }
    }
    if !orders.is_empty() || state.tick() != end_tick {
        mismatch.get_or_insert(state.tick());
    }
    let final_hash = format!("{:016x}", state.state_hash());
    if final_hash != expected_hash {
        mismatch.get_or_insert(end_tick);
    }
    Ok(VerifyReport {
        ok: mismatch.is_none(),
        mismatch_at: mismatch,
        expected_hash,
        final_hash,
    })
}
