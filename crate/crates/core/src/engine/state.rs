//! The forward model: a self-contained, cheaply copyable game state.

use std::cell::Cell;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::chance::{raw_from_uniform, ChanceEvent, ChanceMode, ChancePurpose, MEDIAN_DRAW};
use super::combat::{casualties, hit_probability, spot_probability};
use super::error::EngineError;
use super::hex::Hex;
use super::map::{MapError, MAX_MOVE_COST};
use super::rng::{self, GOLDEN_GAMMA};
use super::rules::Rules;
use super::score::ScoreVector;
use super::unit::{GlobalAction, Route, Side, Stance, Unit, UnitId, UnitOrder};
use crate::scenario::ScenarioDoc;

thread_local! {
    static FORWARD_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of `step` and `fork` calls made on this thread so far. Planners'
/// budgets are stated in these units; the counter lets callers audit them.
pub fn forward_calls() -> u64 {
    FORWARD_CALLS.with(|c| c.get())
}

const NO_UNIT: u16 = u16::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TerminationReason {
    TickLimit,
    EliminationBlue,
    EliminationRed,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::TickLimit => "tickLimit",
            TerminationReason::EliminationBlue => "eliminationBlue",
            TerminationReason::EliminationRed => "eliminationRed",
        }
    }
}

/// What a side last saw of an enemy unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContactRecord {
    pub pos: Hex,
    pub tick: u64,
    pub strength: u8,
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub(crate) rules: Arc<Rules>,
    pub(crate) tick: u64,
    /// Indexed by `UnitId`; destroyed units keep their slot with strength 0.
    pub(crate) units: Vec<Unit>,
    pub(crate) score: ScoreVector,
    pub(crate) rng: u64,
    /// Per side, indexed by enemy `UnitId`.
    pub(crate) contacts: [Vec<Option<ContactRecord>>; 2],
    /// Per side, enemy units this side has destroyed (ascending).
    pub(crate) kills: [Vec<UnitId>; 2],
    pub(crate) terminal: Option<TerminationReason>,
    pub(crate) chance_mode: ChanceMode,
    pub(crate) chance_log: Vec<ChanceEvent>,
    pub(crate) chance_seq: u64,
}

impl GameState {
    /// Build the tick-0 state of a scenario. The generator state is the seed
    /// passed through one SplitMix64 round.
    pub fn instantiate(doc: &ScenarioDoc, seed: u64) -> Result<GameState, EngineError> {
        Ok(Self::from_rules(Arc::new(Rules::from_doc(doc)?), seed))
    }

    pub fn from_rules(rules: Arc<Rules>, seed: u64) -> GameState {
        let units = rules
            .roster
            .iter()
            .enumerate()
            .map(|(i, r)| Unit {
                id: UnitId(i as u16),
                side: r.side,
                kind: r.kind,
                pos: r.start,
                strength: r.strength,
                mp: 0,
                order: None,
                stance: Stance::Engage,
                leg: 0,
                route: None,
            })
            .collect::<Vec<_>>();
        let n = units.len();
        let mut s = GameState {
            rules,
            tick: 0,
            units,
            score: ScoreVector::default(),
            rng: rng::next_raw(seed).0,
            contacts: [vec![None; n], vec![None; n]],
            kills: [Vec::new(), Vec::new()],
            terminal: None,
            chance_mode: ChanceMode::Live,
            chance_log: Vec::new(),
            chance_seq: 0,
        };
        s.terminal = s.is_terminal();
        s
    }

    // ---- accessors -------------------------------------------------------

    pub fn rules(&self) -> &Arc<Rules> {
        &self.rules
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn score(&self) -> &ScoreVector {
        &self.score
    }

    pub fn rng_state(&self) -> u64 {
        self.rng
    }

    /// Replace the generator state, e.g. to give a planning copy fresh chance.
    pub fn reseed(&mut self, state: u64) {
        self.rng = state;
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn unit(&self, id: UnitId) -> Option<&Unit> {
        self.units.get(id.index())
    }

    pub fn live_unit(&self, id: UnitId) -> Result<&Unit, EngineError> {
        let u = self.unit(id).ok_or(EngineError::UnknownUnit(id))?;
        if !u.alive() {
            return Err(EngineError::DeadUnit(id));
        }
        Ok(u)
    }

    pub fn live_units(&self, side: Side) -> impl Iterator<Item = &Unit> {
        self.rules
            .side_units(side)
            .iter()
            .map(move |id| &self.units[id.index()])
            .filter(|u| u.alive())
    }

    pub fn total_strength(&self, side: Side) -> u32 {
        self.live_units(side).map(|u| u.strength as u32).sum()
    }

    pub fn contact(&self, side: Side, enemy: UnitId) -> Option<&ContactRecord> {
        self.contacts[side.index()].get(enemy.index()).and_then(Option::as_ref)
    }

    /// The side's contact table, ascending by enemy id.
    pub fn contacts(&self, side: Side) -> impl Iterator<Item = (UnitId, &ContactRecord)> {
        self.contacts[side.index()]
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (UnitId(i as u16), c)))
    }

    pub fn known_kills(&self, side: Side) -> &[UnitId] {
        &self.kills[side.index()]
    }

    pub fn terminal(&self) -> Option<TerminationReason> {
        self.terminal
    }

    pub fn is_command_phase(&self) -> bool {
        self.tick.is_multiple_of(self.rules.ticks_per_command as u64)
    }

    pub fn chance_log(&self) -> &[ChanceEvent] {
        &self.chance_log
    }

    pub fn take_chance_log(&mut self) -> Vec<ChanceEvent> {
        std::mem::take(&mut self.chance_log)
    }

    pub fn chance_mode(&self) -> &ChanceMode {
        &self.chance_mode
    }

    pub fn set_chance_mode(&mut self, mode: ChanceMode) {
        self.chance_mode = mode;
    }

    /// A copy for planning: identical simulation state, no chance log, live draws.
    pub fn fork(&self) -> GameState {
        FORWARD_CALLS.with(|c| c.set(c.get() + 1));
        GameState {
            rules: self.rules.clone(),
            tick: self.tick,
            units: self.units.clone(),
            score: self.score,
            rng: self.rng,
            contacts: self.contacts.clone(),
            kills: self.kills.clone(),
            terminal: self.terminal,
            chance_mode: ChanceMode::Live,
            chance_log: Vec::new(),
            chance_seq: self.chance_seq,
        }
    }

    // ---- chance ----------------------------------------------------------

    /// One uniform from the in-state generator.
    pub fn draw_uniform(&mut self) -> f64 {
        let (u, s) = rng::draw_uniform(self.rng);
        self.rng = s;
        u
    }

    fn record(&mut self, purpose: ChancePurpose, subjects: [UnitId; 2], drawn: u64, outcome: u32) {
        let seq = self.chance_seq;
        self.chance_seq += 1;
        if matches!(self.chance_mode, ChanceMode::Record) {
            self.chance_log.push(ChanceEvent {
                tick: self.tick,
                seq,
                purpose,
                subjects,
                drawn,
                outcome,
            });
        }
    }

    /// Resolve one stochastic event through the chance player.
    fn chance(&mut self, purpose: ChancePurpose, subjects: [UnitId; 2], resolve: impl Fn(f64) -> u32) -> u32 {
        let det = self.rules.deterministic_combat;
        let tick = self.tick;
        if let ChanceMode::Replay(feed) = &mut self.chance_mode {
            if !det {
                self.rng = self.rng.wrapping_add(GOLDEN_GAMMA);
            }
            self.chance_seq += 1;
            return match feed.events.get(feed.cursor) {
                Some(ev) => {
                    feed.cursor += 1;
                    let same_event = ev.purpose == purpose && ev.subjects == subjects && ev.tick == tick;
                    let recomputed = resolve(rng::to_unit(ev.drawn));
                    if (!same_event || recomputed != ev.outcome) && feed.first_mismatch.is_none() {
                        feed.first_mismatch = Some(tick);
                    }
                    if same_event {
                        ev.outcome
                    } else {
                        recomputed
                    }
                }
                None => {
                    if feed.first_mismatch.is_none() {
                        feed.first_mismatch = Some(tick);
                    }
                    resolve(0.5)
                }
            };
        }
        let drawn = if det {
            MEDIAN_DRAW
        } else {
            let (raw, s) = rng::next_raw(self.rng);
            self.rng = s;
            raw
        };
        let outcome = resolve(rng::to_unit(drawn));
        self.record(purpose, subjects, drawn, outcome);
        outcome
    }

    // ---- orders ----------------------------------------------------------

    /// Whether `order` may be issued to `id` by `side` right now.
    pub fn check_order(&self, side: Side, id: UnitId, order: &UnitOrder) -> Result<(), EngineError> {
        let u = self.live_unit(id)?;
        if u.side != side {
            return Err(EngineError::WrongSide { unit: id, side });
        }
        let illegal = |reason: String| EngineError::IllegalOrder { unit: id, reason };
        let map = &self.rules.map;
        match *order {
            UnitOrder::Hold => Ok(()),
            UnitOrder::Move(wps) => {
                for h in wps.iter() {
                    if !map.passable(*h) {
                        return Err(illegal(format!("waypoint {h} is not an in-bounds passable hex")));
                    }
                }
                Ok(())
            }
            UnitOrder::Attack(t) => {
                let target = self.unit(t).ok_or(EngineError::UnknownUnit(t))?;
                if target.side == side {
                    return Err(illegal("cannot attack a friendly unit".into()));
                }
                if !target.alive() || self.contact(side, t).is_none() {
                    return Err(illegal(format!("target {t:?} is not a current contact")));
                }
                Ok(())
            }
            UnitOrder::Scout { anchor, radius } => {
                if radius < 1 {
                    return Err(illegal("scout radius must be at least 1".into()));
                }
                if !map.in_bounds(anchor) {
                    return Err(illegal(format!("scout anchor {anchor} is out of bounds")));
                }
                Ok(())
            }
        }
    }

    /// Replace the orders of the referenced units. All-or-nothing.
    pub fn apply_orders(&mut self, side: Side, action: &GlobalAction) -> Result<(), EngineError> {
        if !self.is_command_phase() {
            return Err(EngineError::NotCommandPhase {
                tick: self.tick,
                cycle: self.rules.ticks_per_command,
            });
        }
        if self.terminal.is_some() {
            return Err(EngineError::Terminal);
        }
        for (id, order) in action.iter() {
            self.check_order(side, id, order)?;
        }
        for (id, order) in action.iter() {
            let u = &mut self.units[id.index()];
            if u.order.as_ref() != Some(order) {
                u.order = Some(*order);
                u.leg = 0;
                u.route = None;
            }
        }
        Ok(())
    }

    /// Change a unit's stance. Like orders, only in a command phase.
    pub fn set_stance(&mut self, side: Side, id: UnitId, stance: Stance) -> Result<(), EngineError> {
        if !self.is_command_phase() {
            return Err(EngineError::NotCommandPhase {
                tick: self.tick,
                cycle: self.rules.ticks_per_command,
            });
        }
        let u = self.live_unit(id)?;
        if u.side != side {
            return Err(EngineError::WrongSide { unit: id, side });
        }
        self.units[id.index()].stance = stance;
        Ok(())
    }

    /// The discretised order set of one unit: Hold, Attack on each contact in
    /// weapon range, Move to each adjacent passable hex and each own
    /// objective, and Scout around the current position.
    pub fn legal_orders(&self, id: UnitId) -> Result<Vec<UnitOrder>, EngineError> {
        let u = self.live_unit(id)?;
        let ty = self.rules.unit_type(u.kind);
        let mut out = vec![UnitOrder::Hold];
        for (eid, c) in self.contacts(u.side) {
            if u.pos.distance(c.pos) <= ty.range && self.units[eid.index()].alive() {
                out.push(UnitOrder::Attack(eid));
            }
        }
        let map = &self.rules.map;
        let mut targets: Vec<Hex> = map.passable_neighbors(u.pos).collect();
        for o in self.rules.objectives_of(u.side) {
            if o.hex != u.pos && !targets.contains(&o.hex) {
                targets.push(o.hex);
            }
        }
        out.extend(targets.into_iter().map(UnitOrder::move_to));
        out.push(UnitOrder::Scout {
            anchor: u.pos,
            radius: 2,
        });
        Ok(out)
    }

    // ---- direct stochastic operations ------------------------------------

    /// Resolve one attack with an externally supplied uniform and apply it.
    pub fn resolve_combat(&mut self, attacker: UnitId, defender: UnitId, u: f64) -> Result<u8, EngineError> {
        let a = self.unit(attacker).ok_or(EngineError::UnknownUnit(attacker))?;
        let d = self.unit(defender).ok_or(EngineError::UnknownUnit(defender))?;
        if !a.alive() {
            return Err(EngineError::Precondition("attacker has zero strength".into()));
        }
        if !d.alive() || d.side == a.side {
            return Err(EngineError::Precondition("defender must be a live enemy".into()));
        }
        if self.contact(a.side, defender).is_none() {
            return Err(EngineError::Precondition(
                "defender has not been spotted by the attacker's side".into(),
            ));
        }
        let ty = self.rules.unit_type(a.kind);
        if a.pos.distance(d.pos) > ty.range {
            return Err(EngineError::Precondition("defender out of weapon range".into()));
        }
        if !(0.0..1.0).contains(&u) {
            return Err(EngineError::Precondition("uniform draw outside [0, 1)".into()));
        }
        let dt = self.rules.unit_type(d.kind);
        let p = hit_probability(
            ty.attack,
            dt.defense,
            self.rules.map.terrain_unchecked(d.pos).combat_mod(),
        );
        let cas = casualties(a.strength, d.strength, p, u);
        self.record(
            ChancePurpose::Combat,
            [attacker, defender],
            raw_from_uniform(u),
            cas as u32,
        );
        self.apply_casualties(attacker, defender, cas);
        Ok(cas)
    }

    /// Resolve one spotting attempt with an externally supplied uniform.
    pub fn spot_attempt(&mut self, observer: UnitId, target: UnitId, u: f64) -> Result<bool, EngineError> {
        let o = self.live_unit(observer)?;
        let t = self.live_unit(target)?;
        if o.side == t.side {
            return Err(EngineError::Precondition("target must be an enemy".into()));
        }
        let sight = self.rules.unit_type(o.kind).sight;
        let d = o.pos.distance(t.pos);
        if d > sight {
            return Err(EngineError::Precondition(format!(
                "target at distance {d} beyond sight range {sight}"
            )));
        }
        if !self.rules.map.line_of_sight(o.pos, t.pos) {
            return Err(EngineError::Precondition("line of sight is blocked".into()));
        }
        if !(0.0..1.0).contains(&u) {
            return Err(EngineError::Precondition("uniform draw outside [0, 1)".into()));
        }
        let p = spot_probability(d, sight, self.rules.map.terrain_unchecked(t.pos).concealment());
        let spotted = u < p;
        let side = o.side;
        self.record(
            ChancePurpose::Spotting,
            [observer, target],
            raw_from_uniform(u),
            spotted as u32,
        );
        if spotted {
            self.refresh_contact(side, target);
        }
        Ok(spotted)
    }

    fn refresh_contact(&mut self, side: Side, target: UnitId) {
        let t = &self.units[target.index()];
        self.contacts[side.index()][target.index()] = Some(ContactRecord {
            pos: t.pos,
            tick: self.tick,
            strength: t.strength,
        });
    }

    fn apply_casualties(&mut self, attacker: UnitId, defender: UnitId, cas: u8) {
        let att_side = self.units[attacker.index()].side;
        let d = &mut self.units[defender.index()];
        let applied = cas.min(d.strength);
        d.strength -= applied;
        let def_side = d.side;
        let destroyed = d.strength == 0;
        let remaining = d.strength;
        if destroyed {
            d.remove();
        }
        self.score.strength_inflicted[att_side.index()] += applied as u32;
        self.score.strength_suffered[def_side.index()] += applied as u32;
        let slot = &mut self.contacts[att_side.index()][defender.index()];
        if destroyed {
            *slot = None;
            let kills = &mut self.kills[att_side.index()];
            if let Err(i) = kills.binary_search(&defender) {
                kills.insert(i, defender);
            }
            // Nobody keeps tracking a destroyed unit.
            self.contacts[def_side.opponent().index()][defender.index()] = None;
        } else if let Some(c) = slot {
            c.strength = remaining;
        }
    }

    // ---- the tick ----------------------------------------------------------

    /// Advance one tick: movement, spotting, simultaneous combat, scoring,
    /// termination.
    pub fn step(&mut self) -> Result<(), EngineError> {
        FORWARD_CALLS.with(|c| c.set(c.get() + 1));
        if self.terminal.is_some() {
            return Err(EngineError::Terminal);
        }
        self.tick += 1;
        self.movement_phase();
        self.spotting_phase();
        self.combat_phase();
        self.scoring_phase();
        self.terminal = self.is_terminal();
        Ok(())
    }

    fn movement_phase(&mut self) {
        let map_len = self.rules.map.len();
        let mut occ = vec![NO_UNIT; map_len];
        for u in self.units.iter().filter(|u| u.alive()) {
            occ[self.rules.map.index(u.pos).unwrap()] = u.id.0;
        }
        for i in 0..self.units.len() {
            if !self.units[i].alive() {
                continue;
            }
            let mpt = self.rules.unit_type(self.units[i].kind).mp_per_tick;
            let cap = (2 * mpt).max(MAX_MOVE_COST);
            let u = &mut self.units[i];
            u.mp = (u.mp + mpt).min(cap);
            self.move_unit(i, &mut occ);
        }
    }

    /// Where the unit's standing order wants it to go next, if anywhere.
    fn destination(&mut self, i: usize) -> Option<Hex> {
        let rules = self.rules.clone();
        let u = &mut self.units[i];
        match u.order? {
            UnitOrder::Hold => None,
            UnitOrder::Move(wps) => {
                let mut leg = u.leg as usize;
                while leg < wps.len() && wps[leg] == u.pos {
                    leg += 1;
                }
                u.leg = leg as u8;
                if leg >= wps.len() {
                    u.order = Some(UnitOrder::Hold);
                    u.route = None;
                    u.leg = 0;
                    None
                } else {
                    Some(wps[leg])
                }
            }
            UnitOrder::Attack(t) => {
                let side = u.side;
                let range = rules.unit_type(u.kind).range;
                let pos = u.pos;
                let target_alive = self.units[t.index()].alive();
                match self.contacts[side.index()][t.index()] {
                    Some(c) if target_alive => (pos.distance(c.pos) > range).then_some(c.pos),
                    _ => {
                        let u = &mut self.units[i];
                        u.order = Some(UnitOrder::Hold);
                        u.route = None;
                        None
                    }
                }
            }
            UnitOrder::Scout { anchor, radius } => {
                for _ in 0..6 {
                    let corner = anchor.offset(u.leg as usize, radius as i32);
                    if corner != u.pos && rules.map.passable(corner) {
                        return Some(corner);
                    }
                    u.leg = (u.leg + 1) % 6;
                }
                None
            }
        }
    }

    /// Next hex on the cached route to `dest`, recomputing when stale.
    fn next_hop(&mut self, i: usize, dest: Hex) -> Option<Hex> {
        let u = &self.units[i];
        if let Some(r) = &u.route {
            if r.target == dest {
                if let Some(h) = r.peek() {
                    if h.distance(u.pos) == 1 {
                        return Some(h);
                    }
                }
            }
        }
        match self.rules.map.find_path(u.pos, dest) {
            Ok(path) if !path.is_empty() => {
                let first = path[0];
                self.units[i].route = Some(Route {
                    target: dest,
                    hexes: path.into(),
                    next: 0,
                });
                Some(first)
            }
            Ok(_) => None,
            Err(MapError::NoPath(..)) | Err(_) => {
                // Unreachable destination: give up on the order.
                let u = &mut self.units[i];
                u.route = None;
                if let Some(UnitOrder::Move(_) | UnitOrder::Scout { .. }) = u.order {
                    u.order = Some(UnitOrder::Hold);
                    u.leg = 0;
                }
                None
            }
        }
    }

    fn move_unit(&mut self, i: usize, occ: &mut [u16]) {
        let side = self.units[i].side;
        // Bounded by the movement cap; the loop guard is belt and braces
        // against orders that keep re-targeting.
        for _ in 0..64 {
            let Some(dest) = self.destination(i) else { return };
            if dest == self.units[i].pos {
                return;
            }
            let Some(next) = self.next_hop(i, dest) else { return };
            let cost = self.rules.map.terrain_unchecked(next).move_cost().unwrap();
            if self.units[i].mp < cost {
                return;
            }
            let ni = self.rules.map.index(next).unwrap();
            if occ[ni] != NO_UNIT {
                return;
            }
            let u = &mut self.units[i];
            occ[self.rules.map.index(u.pos).unwrap()] = NO_UNIT;
            occ[ni] = u.id.0;
            u.pos = next;
            u.mp -= cost;
            if let Some(r) = &mut u.route {
                r.next += 1;
            }
            self.score.mp_expended[side.index()] += cost as u64;
        }
    }

    fn spotting_phase(&mut self) {
        let n = self.units.len();
        for o in 0..n {
            let obs = &self.units[o];
            if !obs.alive() {
                continue;
            }
            let (oside, opos, oid) = (obs.side, obs.pos, obs.id);
            let sight = self.rules.unit_type(obs.kind).sight;
            let rules = self.rules.clone();
            for &tid in rules.side_units(oside.opponent()) {
                let t = &self.units[tid.index()];
                if !t.alive() {
                    continue;
                }
                let tpos = t.pos;
                let d = opos.distance(tpos);
                if d > sight || !rules.map.line_of_sight(opos, tpos) {
                    continue;
                }
                let p = spot_probability(d, sight, rules.map.terrain_unchecked(tpos).concealment());
                let spotted = self.chance(ChancePurpose::Spotting, [oid, tid], |u| (u < p) as u32);
                if spotted == 1 {
                    self.refresh_contact(oside, tid);
                }
            }
        }
    }

    /// Target of unit `i` this tick, if it fires.
    fn engagement_target(&self, i: usize) -> Option<UnitId> {
        let u = &self.units[i];
        let range = self.rules.unit_type(u.kind).range;
        let side = u.side.index();
        let can_fire_at = |t: UnitId| {
            let tu = &self.units[t.index()];
            tu.alive()
                && self.contacts[side][t.index()].is_some_and(|c| c.tick == self.tick)
                && u.pos.distance(tu.pos) <= range
        };
        if let Some(UnitOrder::Attack(t)) = u.order {
            if can_fire_at(t) {
                return Some(t);
            }
        }
        if u.stance == Stance::HoldFire {
            return None;
        }
        self.rules
            .side_units(u.side.opponent())
            .iter()
            .copied()
            .filter(|t| can_fire_at(*t))
            .min_by_key(|t| (u.pos.distance(self.units[t.index()].pos), *t))
    }

    fn combat_phase(&mut self) {
        // Targets and strengths are fixed before any casualty is applied.
        let mut engagements = Vec::new();
        for i in 0..self.units.len() {
            if !self.units[i].alive() {
                continue;
            }
            if let Some(t) = self.engagement_target(i) {
                engagements.push((
                    self.units[i].id,
                    t,
                    self.units[i].strength,
                    self.units[t.index()].strength,
                ));
            }
        }
        let mut results = Vec::with_capacity(engagements.len());
        for &(a, d, sa, sd) in &engagements {
            let au = &self.units[a.index()];
            let du = &self.units[d.index()];
            let p = hit_probability(
                self.rules.unit_type(au.kind).attack,
                self.rules.unit_type(du.kind).defense,
                self.rules.map.terrain_unchecked(du.pos).combat_mod(),
            );
            let cas = self.chance(ChancePurpose::Combat, [a, d], |u| casualties(sa, sd, p, u) as u32);
            results.push((a, d, cas as u8));
        }
        for (a, d, cas) in results {
            self.apply_casualties(a, d, cas);
        }
    }

    fn scoring_phase(&mut self) {
        let rules = self.rules.clone();
        for o in &rules.objectives {
            let held = self.live_units(o.side).any(|u| u.pos == o.hex);
            if held {
                self.score.objectives_held[o.side.index()] += o.weight;
            }
        }
    }

    // ---- evaluation --------------------------------------------------------

    /// Score components and per-side scalar victory points.
    pub fn score_state(&self) -> (ScoreVector, [f64; 2]) {
        let vp = [Side::Blue, Side::Red].map(|s| self.score.victory_points(s, &self.rules.victory[s.index()]));
        (self.score, vp)
    }

    pub fn victory_points(&self, side: Side) -> f64 {
        self.score.victory_points(side, &self.rules.victory[side.index()])
    }

    pub fn is_terminal(&self) -> Option<TerminationReason> {
        if self.total_strength(Side::Blue) == 0 {
            Some(TerminationReason::EliminationBlue)
        } else if self.total_strength(Side::Red) == 0 {
            Some(TerminationReason::EliminationRed)
        } else if self.tick >= self.rules.max_ticks as u64 {
            Some(TerminationReason::TickLimit)
        } else {
            None
        }
    }

    // ---- canonical form ------------------------------------------------------

    /// Canonical little-endian serialization: live units by id, score,
    /// tick, generator state, then contacts, kills, termination and terrain.
    pub fn canonical_bytes(&self, include_rng: bool) -> Vec<u8> {
        let mut b = Vec::with_capacity(64 + self.units.len() * 48 + self.rules.map.len());
        for u in self.units.iter().filter(|u| u.alive()) {
            b.extend_from_slice(&u.id.0.to_le_bytes());
            b.push(u.side as u8);
            b.extend_from_slice(&u.kind.to_le_bytes());
            b.extend_from_slice(&u.pos.q.to_le_bytes());
            b.extend_from_slice(&u.pos.r.to_le_bytes());
            b.push(u.strength);
            b.extend_from_slice(&u.mp.to_le_bytes());
            encode_order(&mut b, u.order.as_ref());
            b.push(u.stance as u8);
            b.push(u.leg);
            match &u.route {
                None => b.push(0),
                Some(r) => {
                    b.push(1);
                    b.extend_from_slice(&r.target.q.to_le_bytes());
                    b.extend_from_slice(&r.target.r.to_le_bytes());
                    let rest = &r.hexes[r.next.min(r.hexes.len())..];
                    b.extend_from_slice(&(rest.len() as u32).to_le_bytes());
                    for h in rest {
                        b.extend_from_slice(&h.q.to_le_bytes());
                        b.extend_from_slice(&h.r.to_le_bytes());
                    }
                }
            }
        }
        let s = &self.score;
        for v in s.objectives_held {
            b.extend_from_slice(&v.to_bits().to_le_bytes());
        }
        for v in s.strength_inflicted {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for v in s.strength_suffered {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for v in s.mp_expended {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&self.tick.to_le_bytes());
        if include_rng {
            b.extend_from_slice(&self.rng.to_le_bytes());
        }
        for side in Side::BOTH {
            let n = self.contacts[side.index()].iter().flatten().count() as u32;
            b.extend_from_slice(&n.to_le_bytes());
            for (id, c) in self.contacts(side) {
                b.extend_from_slice(&id.0.to_le_bytes());
                b.extend_from_slice(&c.pos.q.to_le_bytes());
                b.extend_from_slice(&c.pos.r.to_le_bytes());
                b.extend_from_slice(&c.tick.to_le_bytes());
                b.push(c.strength);
            }
            let kills = &self.kills[side.index()];
            b.extend_from_slice(&(kills.len() as u32).to_le_bytes());
            for k in kills {
                b.extend_from_slice(&k.0.to_le_bytes());
            }
        }
        b.push(match self.terminal {
            None => 0,
            Some(TerminationReason::TickLimit) => 1,
            Some(TerminationReason::EliminationBlue) => 2,
            Some(TerminationReason::EliminationRed) => 3,
        });
        let map = &self.rules.map;
        b.extend_from_slice(&map.width().to_le_bytes());
        b.extend_from_slice(&map.height().to_le_bytes());
        b.extend(map.terrain_cells().iter().map(|t| t.code()));
        b
    }

    /// FNV-1a 64 over the canonical serialization. The chance log is excluded.
    pub fn state_hash(&self) -> u64 {
        fnv1a64(&self.canonical_bytes(true))
    }
}

fn encode_order(b: &mut Vec<u8>, order: Option<&UnitOrder>) {
    let Some(o) = order else {
        b.push(0xFF);
        return;
    };
    b.push(o.kind_code());
    match *o {
        UnitOrder::Hold => {}
        UnitOrder::Move(wps) => {
            b.push(wps.len() as u8);
            for h in wps.iter() {
                b.extend_from_slice(&h.q.to_le_bytes());
                b.extend_from_slice(&h.r.to_le_bytes());
            }
        }
        UnitOrder::Attack(t) => b.extend_from_slice(&t.0.to_le_bytes()),
        UnitOrder::Scout { anchor, radius } => {
            b.extend_from_slice(&anchor.q.to_le_bytes());
            b.extend_from_slice(&anchor.r.to_le_bytes());
            b.extend_from_slice(&radius.to_le_bytes());
        }
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}
