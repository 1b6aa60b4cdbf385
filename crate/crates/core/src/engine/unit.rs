//! Sides, unit types, units and their orders.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::hex::Hex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Blue,
    Red,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Blue, Side::Red];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn opponent(self) -> Side {
        match self {
            Side::Blue => Side::Red,
            Side::Red => Side::Blue,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Blue => "blue",
            Side::Red => "red",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blue" => Ok(Side::Blue),
            "red" => Ok(Side::Red),
            _ => Err(format!("unknown side `{s}` (expected blue or red)")),
        }
    }
}

/// Index of a unit in the scenario roster. Rosters are sorted by the textual
/// id, so ordering by `UnitId` is ordering by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitId(pub u16);

impl UnitId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitType {
    pub name: String,
    pub attack: u8,
    pub defense: u8,
    pub range: u32,
    pub sight: u32,
    pub mp_per_tick: u32,
    pub max_strength: u8,
}

impl UnitType {
    pub fn validate(&self) -> Result<(), String> {
        if self.attack > 10 {
            return Err(format!("attack {} outside 0..=10", self.attack));
        }
        if self.defense > 10 {
            return Err(format!("defense {} outside 0..=10", self.defense));
        }
        if self.sight < 1 {
            return Err("sight range must be at least 1".into());
        }
        if self.mp_per_tick < 1 {
            return Err("movement points per tick must be at least 1".into());
        }
        if !(1..=10).contains(&self.max_strength) {
            return Err(format!("max strength {} outside 1..=10", self.max_strength));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Stance {
    Engage,
    HoldFire,
}

/// One to three Move waypoints, stored inline.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Waypoints {
    len: u8,
    hexes: [Hex; Waypoints::MAX],
}

impl Waypoints {
    pub const MAX: usize = 3;

    /// `None` unless `1 <= hexes.len() <= 3`.
    pub fn new(hexes: &[Hex]) -> Option<Self> {
        if hexes.is_empty() || hexes.len() > Self::MAX {
            return None;
        }
        let mut buf = [Hex::new(0, 0); Self::MAX];
        buf[..hexes.len()].copy_from_slice(hexes);
        Some(Waypoints {
            len: hexes.len() as u8,
            hexes: buf,
        })
    }

    pub fn single(h: Hex) -> Self {
        Waypoints::new(&[h]).unwrap()
    }
}

impl Deref for Waypoints {
    type Target = [Hex];

    fn deref(&self) -> &[Hex] {
        &self.hexes[..self.len as usize]
    }
}

impl fmt::Debug for Waypoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitOrder {
    Move(Waypoints),
    Attack(UnitId),
    Hold,
    Scout { anchor: Hex, radius: u32 },
}

impl UnitOrder {
    pub fn move_to(h: Hex) -> Self {
        UnitOrder::Move(Waypoints::single(h))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            UnitOrder::Move(_) => "move",
            UnitOrder::Attack(_) => "attack",
            UnitOrder::Hold => "hold",
            UnitOrder::Scout { .. } => "scout",
        }
    }

    pub(crate) fn kind_code(&self) -> u8 {
        match self {
            UnitOrder::Hold => 0,
            UnitOrder::Move(_) => 1,
            UnitOrder::Attack(_) => 2,
            UnitOrder::Scout { .. } => 3,
        }
    }
}

/// A cached hex route towards `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Route {
    pub target: Hex,
    pub hexes: Arc<[Hex]>,
    pub next: usize,
}

impl Route {
    pub fn peek(&self) -> Option<Hex> {
        self.hexes.get(self.next).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Unit {
    pub id: UnitId,
    pub side: Side,
    /// Index into the scenario's unit types.
    pub kind: u16,
    pub pos: Hex,
    pub strength: u8,
    pub mp: u32,
    pub order: Option<UnitOrder>,
    pub stance: Stance,
    /// Index of the next Move waypoint / Scout patrol corner.
    pub(crate) leg: u8,
    pub(crate) route: Option<Route>,
}

impl Unit {
    #[inline]
    pub fn alive(&self) -> bool {
        self.strength > 0
    }

    /// Take the unit out of play.
    pub(crate) fn remove(&mut self) {
        self.strength = 0;
        self.order = None;
        self.route = None;
        self.mp = 0;
        self.leg = 0;
    }
}

/// A command-phase order set for one side: unit id to order, sorted by id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GlobalAction {
    orders: Vec<(UnitId, UnitOrder)>,
}

impl GlobalAction {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert or replace the order for `id`.
    pub fn set(&mut self, id: UnitId, order: UnitOrder) {
        match self.orders.binary_search_by_key(&id, |(u, _)| *u) {
            Ok(i) => self.orders[i].1 = order,
            Err(i) => self.orders.insert(i, (id, order)),
        }
    }

    pub fn get(&self, id: UnitId) -> Option<&UnitOrder> {
        self.orders
            .binary_search_by_key(&id, |(u, _)| *u)
            .ok()
            .map(|i| &self.orders[i].1)
    }

    pub fn remove(&mut self, id: UnitId) -> Option<UnitOrder> {
        self.orders
            .binary_search_by_key(&id, |(u, _)| *u)
            .ok()
            .map(|i| self.orders.remove(i).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (UnitId, &UnitOrder)> {
        self.orders.iter().map(|(u, o)| (*u, o))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (UnitId, &mut UnitOrder)> {
        self.orders.iter_mut().map(|(u, o)| (*u, o))
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// Orders of `other` override ours.
    pub fn merge(&mut self, other: &GlobalAction) {
        for (id, o) in other.iter() {
            self.set(id, *o);
        }
    }
}

impl FromIterator<(UnitId, UnitOrder)> for GlobalAction {
    fn from_iter<T: IntoIterator<Item = (UnitId, UnitOrder)>>(iter: T) -> Self {
        let mut a = GlobalAction::new();
        for (id, o) in iter {
            a.set(id, o);
        }
        a
    }
}
