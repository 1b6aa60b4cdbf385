//! Axial hex coordinates.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Axial offsets of the six neighbours, in a fixed order.
pub const DIRECTIONS: [Hex; 6] = [
    Hex { q: 1, r: 0 },
    Hex { q: 1, r: -1 },
    Hex { q: 0, r: -1 },
    Hex { q: -1, r: 0 },
    Hex { q: -1, r: 1 },
    Hex { q: 0, r: 1 },
];

/// A hex in axial coordinates. The implied cube coordinate is `s = -q - r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Hex {
    pub q: i32,
    pub r: i32,
}

impl Hex {
    pub const fn new(q: i32, r: i32) -> Self {
        Hex { q, r }
    }

    #[inline]
    pub fn s(self) -> i32 {
        -self.q - self.r
    }

    /// Hex distance: `(|dq| + |dr| + |ds|) / 2`.
    #[inline]
    pub fn distance(self, other: Hex) -> u32 {
        let dq = (self.q - other.q).unsigned_abs();
        let dr = (self.r - other.r).unsigned_abs();
        let ds = (self.s() - other.s()).unsigned_abs();
        (dq + dr + ds) / 2
    }

    pub fn neighbor(self, dir: usize) -> Hex {
        let d = DIRECTIONS[dir % 6];
        Hex::new(self.q + d.q, self.r + d.r)
    }

    pub fn neighbors(self) -> impl Iterator<Item = Hex> {
        DIRECTIONS.iter().map(move |d| Hex::new(self.q + d.q, self.r + d.r))
    }

    /// `self + dir * k`.
    pub fn offset(self, dir: usize, k: i32) -> Hex {
        let d = DIRECTIONS[dir % 6];
        Hex::new(self.q + d.q * k, self.r + d.r * k)
    }

    /// Hexes strictly between `self` and `other` on the straight hex line.
    ///
    /// Uses cube linear interpolation with a small nudge so that lines running
    /// exactly along hex edges resolve consistently to one side.
    pub fn line_interior(self, other: Hex) -> Vec<Hex> {
        let mut out = Vec::new();
        self.for_each_interior(other, |h| out.push(h));
        out
    }

    /// Allocation-free form of [`Hex::line_interior`].
    pub fn for_each_interior(self, other: Hex, mut f: impl FnMut(Hex)) {
        let n = self.distance(other);
        if n <= 1 {
            return;
        }
        let (aq, ar, as_) = (self.q as f64 + 1e-6, self.r as f64 + 2e-6, self.s() as f64 - 3e-6);
        let (bq, br, bs) = (other.q as f64 + 1e-6, other.r as f64 + 2e-6, other.s() as f64 - 3e-6);
        for i in 1..n {
            let t = i as f64 / n as f64;
            f(cube_round(aq + (bq - aq) * t, ar + (br - ar) * t, as_ + (bs - as_) * t));
        }
    }
}

fn cube_round(q: f64, r: f64, s: f64) -> Hex {
    let (mut rq, mut rr, rs) = (q.round(), r.round(), s.round());
    let (dq, dr, ds) = ((rq - q).abs(), (rr - r).abs(), (rs - s).abs());
    if dq > dr && dq > ds {
        rq = -rr - rs;
    } else if dr > ds {
        rr = -rq - rs;
    }
    Hex::new(rq as i32, rr as i32)
}

impl fmt::Display for Hex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.q, self.r)
    }
}
