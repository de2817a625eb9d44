//! Expected-gain rows and the shared argmax rule.

use serde::{Deserialize, Serialize};

use crate::hierarchy::{Hierarchy, VertexId};

/// Gains of asking `reach(vertex)` against the current state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub vertex: VertexId,
    pub p_yes: f64,
    pub p_no: f64,
    pub g_yes: i64,
    pub g_no: i64,
    pub gain: f64,
}

impl GainRow {
    pub fn new(vertex: VertexId, p_yes: f64, p_no: f64, g_yes: i64, g_no: i64) -> Self {
        GainRow {
            vertex,
            p_yes,
            p_no,
            g_yes,
            g_no,
            gain: expected_gain(p_yes, p_no, g_yes, g_no),
        }
    }
}

#[inline]
pub fn expected_gain(p_yes: f64, p_no: f64, g_yes: i64, g_no: i64) -> f64 {
    g_yes as f64 * p_yes + g_no as f64 * p_no
}

/// Gains closer than this relative margin count as a tie.
#[inline]
pub fn gains_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// True when `(a, gain_a)` should be asked instead of `(b, gain_b)`: larger
/// gain first, then the deeper vertex, then the smaller id.
pub fn prefer(h: &Hierarchy, a: VertexId, gain_a: f64, b: VertexId, gain_b: f64) -> bool {
    if !gains_tie(gain_a, gain_b) {
        return gain_a > gain_b;
    }
    let (da, db) = (h.depth(a), h.depth(b));
    if da != db {
        return da > db;
    }
    a < b
}

/// Argmax over `(vertex, score)` pairs under [`prefer`].
pub fn best_of<I>(h: &Hierarchy, scored: I) -> Option<VertexId>
where
    I: IntoIterator<Item = (VertexId, f64)>,
{
    let mut best: Option<(VertexId, f64)> = None;
    for (v, g) in scored {
        match best {
            Some((bv, bg)) if !prefer(h, v, g, bv, bg) => {}
            _ => best = Some((v, g)),
        }
    }
    best.map(|(v, _)| v)
}

pub fn best_row(h: &Hierarchy, rows: &[GainRow]) -> Option<VertexId> {
    best_of(h, rows.iter().map(|r| (r.vertex, r.gain)))
}
