//! Crossing events on the block layout.
//!
//! All crossings are "left-to-right", i.e. along axis 0, except the strip
//! events `G_rowcol`, which cross a full row (axis 0) or column (axis 1) of
//! blocks along its long side.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{Block, Region};

use super::clusters::{crossing_clusters, label_clusters, label_region, ClusterLabeling};
use super::sample::PercolationSample;

/// Renormalized side length `l`, block parameter `k` and dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLayout {
    pub l: usize,
    pub k: usize,
    pub d: usize,
}

impl BlockLayout {
    pub fn new(l: usize, k: usize, d: usize) -> Result<Self> {
        if l == 0 || k == 0 || d < 2 {
            return domain(format!("invalid block layout L={l}, k={k}, d={d}"));
        }
        Ok(BlockLayout { l, k, d })
    }

    pub fn slab(&self) -> Region {
        crate::lattice::slab(self.l, self.k, self.d)
    }

    /// Even A-block for renormalized site `x ∈ [1, L]²`.
    pub fn site_block(&self, x: [usize; 2]) -> Block {
        Block::a([2 * x[0] as i64, 2 * x[1] as i64], self.k, self.d)
    }

    pub(crate) fn check(&self, sample: &PercolationSample) -> Result<()> {
        let u = self.slab();
        let b = sample.lattice().bounds();
        if u.ndim() != b.ndim() || u.intersect(&b) != u {
            return domain(format!(
                "layout slab {:?}..{:?} does not fit the lattice {:?}..{:?}",
                u.lo, u.hi, b.lo, b.hi
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "A_cross")]
    ACross,
    #[serde(rename = "B_atMostOne")]
    BAtMostOne,
    #[serde(rename = "D_joint")]
    DJoint,
    #[serde(rename = "E_atMostOneC")]
    EAtMostOneC,
    #[serde(rename = "F_jointC")]
    FJointC,
    #[serde(rename = "U_full")]
    UFull,
    #[serde(rename = "G_rowcol")]
    GRowCol,
    #[serde(rename = "H_pairConnect")]
    HPairConnect,
}

impl EventKind {
    pub const ALL: [EventKind; 8] = [
        EventKind::ACross,
        EventKind::BAtMostOne,
        EventKind::DJoint,
        EventKind::EAtMostOneC,
        EventKind::FJointC,
        EventKind::UFull,
        EventKind::GRowCol,
        EventKind::HPairConnect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventKind::ACross => "A_cross",
            EventKind::BAtMostOne => "B_atMostOne",
            EventKind::DJoint => "D_joint",
            EventKind::EAtMostOneC => "E_atMostOneC",
            EventKind::FJointC => "F_jointC",
            EventKind::UFull => "U_full",
            EventKind::GRowCol => "G_rowcol",
            EventKind::HPairConnect => "H_pairConnect",
        }
    }

    /// Increasing events can only switch from false to true as p grows.
    pub fn is_increasing(self) -> bool {
        matches!(
            self,
            EventKind::ACross
                | EventKind::DJoint
                | EventKind::UFull
                | EventKind::GRowCol
                | EventKind::HPairConnect
        )
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown event `{s}`")))
    }
}

/// An event together with its block indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum Event {
    /// `A_y` has an open crossing cluster.
    #[serde(rename = "A_cross")]
    ACross { y: [i64; 2] },
    /// `B_y` has at most one crossing cluster.
    #[serde(rename = "B_atMostOne")]
    BAtMostOne { y: [i64; 2] },
    /// `A_(z1−1, z2)` and `A_(z1+1, z2)` are crossed and their crossing
    /// clusters are joined inside the union of the two blocks. `z1` odd.
    #[serde(rename = "D_joint")]
    DJoint { z: [i64; 2] },
    /// `C_z` has at most one crossing cluster.
    #[serde(rename = "E_atMostOneC")]
    EAtMostOneC { z: [i64; 2] },
    /// `A_z` and `A_(z1, z2+2)` are crossed and `C_z` has at most one
    /// crossing cluster.
    #[serde(rename = "F_jointC")]
    FJointC { z: [i64; 2] },
    /// The whole renormalized lattice: all D and F events for `d ≥ 3`, all
    /// row and column crossings for `d = 2`.
    #[serde(rename = "U_full")]
    UFull,
    /// Strip `i ∈ [1, L]` of blocks along axis `r ∈ {0, 1}` is crossed along
    /// that axis.
    #[serde(rename = "G_rowcol")]
    GRowCol { i: usize, r: usize },
    /// Sites `a` and `b` are connected anywhere in the lattice.
    #[serde(rename = "H_pairConnect")]
    HPairConnect { a: Vec<i64>, b: Vec<i64> },
}

impl Event {
    pub fn kind(&self) -> EventKind {
        match self {
            Event::ACross { .. } => EventKind::ACross,
            Event::BAtMostOne { .. } => EventKind::BAtMostOne,
            Event::DJoint { .. } => EventKind::DJoint,
            Event::EAtMostOneC { .. } => EventKind::EAtMostOneC,
            Event::FJointC { .. } => EventKind::FJointC,
            Event::UFull => EventKind::UFull,
            Event::GRowCol { .. } => EventKind::GRowCol,
            Event::HPairConnect { .. } => EventKind::HPairConnect,
        }
    }

    /// Builds an event from its name and a block index (ignored where unused).
    pub fn named(name: &str, index: [i64; 2]) -> Result<Event> {
        Ok(match name.parse::<EventKind>()? {
            EventKind::ACross => Event::ACross { y: index },
            EventKind::BAtMostOne => Event::BAtMostOne { y: index },
            EventKind::DJoint => Event::DJoint { z: index },
            EventKind::EAtMostOneC => Event::EAtMostOneC { z: index },
            EventKind::FJointC => Event::FJointC { z: index },
            EventKind::UFull => Event::UFull,
            EventKind::GRowCol => Event::GRowCol { i: index[0].max(0) as usize, r: index[1].max(0) as usize },
            EventKind::HPairConnect => {
                return domain("H_pairConnect needs explicit site coordinates")
            }
        })
    }
}

fn crossed(sample: &PercolationSample, region: &Region) -> (ClusterLabeling, Vec<u32>) {
    let lab = label_region(sample, region);
    let cross = crossing_clusters(&lab, 0);
    (lab, cross)
}

/// Evaluates `event` on `sample` for the given block layout.
pub fn evaluate_event(sample: &PercolationSample, event: &Event, layout: &BlockLayout) -> Result<bool> {
    layout.check(sample)?;
    let (k, d, l) = (layout.k, layout.d, layout.l as i64);
    let in_range = |v: i64, lo: i64, hi: i64, even: bool| v >= lo && v <= hi && (!even || v % 2 == 0);
    match event {
        Event::ACross { y } => {
            if !in_range(y[0], 2, 2 * l, false) || !in_range(y[1], 2, 2 * l, false) {
                return domain(format!("A-block index {y:?} outside the layout"));
            }
            Ok(!crossed(sample, &Block::a(*y, k, d).region).1.is_empty())
        }
        Event::BAtMostOne { y } => {
            if !in_range(y[0], 2, 2 * l - 1, false) || !in_range(y[1], 2, 2 * l, false) {
                return domain(format!("B-block index {y:?} outside the layout"));
            }
            Ok(crossed(sample, &Block::b(*y, k, d).region).1.len() <= 1)
        }
        Event::DJoint { z } => {
            if !in_range(z[0], 3, 2 * l - 1, false) || z[0] % 2 == 0 || !in_range(z[1], 2, 2 * l, true) {
                return domain(format!("D index {z:?} outside the layout"));
            }
            let mut cache = HashMap::new();
            Ok(d_joint(sample, *z, layout, &mut cache))
        }
        Event::EAtMostOneC { z } | Event::FJointC { z } => {
            if !in_range(z[0], 2, 2 * l, true) || !in_range(z[1], 2, 2 * l - 2, true) {
                return domain(format!("C index {z:?} outside the layout"));
            }
            let mut cache = HashMap::new();
            Ok(match event {
                Event::EAtMostOneC { .. } => e_at_most_one(sample, *z, layout),
                _ => f_joint(sample, *z, layout, &mut cache),
            })
        }
        Event::UFull => Ok(u_full(sample, layout)),
        Event::GRowCol { i, r } => {
            if *i < 1 || *i > layout.l || *r > 1 {
                return domain(format!("strip ({i}, {r}) outside the layout"));
            }
            Ok(g_rowcol(sample, *i, *r, layout))
        }
        Event::HPairConnect { a, b } => {
            let lat = sample.lattice();
            let sa = lat.site_at(a).ok_or_else(|| Error::Domain(format!("no site at {a:?}")))?;
            let sb = lat.site_at(b).ok_or_else(|| Error::Domain(format!("no site at {b:?}")))?;
            Ok(label_clusters(sample).connected(sa, sb))
        }
    }
}

type Cache = HashMap<[i64; 2], (ClusterLabeling, Vec<u32>)>;

fn a_crossed<'c>(sample: &PercolationSample, y: [i64; 2], layout: &BlockLayout, cache: &'c mut Cache) -> &'c (ClusterLabeling, Vec<u32>) {
    cache
        .entry(y)
        .or_insert_with(|| crossed(sample, &Block::a(y, layout.k, layout.d).region))
}

/// Union-labeling ids of the crossing clusters of a block.
fn lifted(block: &(ClusterLabeling, Vec<u32>), union: &ClusterLabeling) -> Vec<u32> {
    let (lab, cross) = block;
    let mut first = vec![None; cross.len()];
    for &s in lab.sites() {
        if let Some(c) = lab.label(s) {
            if let Ok(i) = cross.binary_search(&c) {
                if first[i].is_none() {
                    first[i] = Some(s);
                }
            }
        }
    }
    first
        .into_iter()
        .flatten()
        .filter_map(|s| union.label(s))
        .collect()
}

fn d_joint(sample: &PercolationSample, z: [i64; 2], layout: &BlockLayout, cache: &mut Cache) -> bool {
    let (yl, yr) = ([z[0] - 1, z[1]], [z[0] + 1, z[1]]);
    if a_crossed(sample, yl, layout, cache).1.is_empty() || a_crossed(sample, yr, layout, cache).1.is_empty() {
        return false;
    }
    let ra = Block::a(yl, layout.k, layout.d).region;
    let rb = Block::a(yr, layout.k, layout.d).region;
    let union = label_region(sample, &ra.hull(&rb));
    let left = lifted(&cache[&yl], &union);
    let right = lifted(&cache[&yr], &union);
    left.iter().any(|c| right.contains(c))
}

fn e_at_most_one(sample: &PercolationSample, z: [i64; 2], layout: &BlockLayout) -> bool {
    crossed(sample, &Block::c(z, layout.k, layout.d).region).1.len() <= 1
}

fn f_joint(sample: &PercolationSample, z: [i64; 2], layout: &BlockLayout, cache: &mut Cache) -> bool {
    !a_crossed(sample, z, layout, cache).1.is_empty()
        && !a_crossed(sample, [z[0], z[1] + 2], layout, cache).1.is_empty()
        && e_at_most_one(sample, z, layout)
}

fn g_rowcol(sample: &PercolationSample, i: usize, r: usize, layout: &BlockLayout) -> bool {
    let l = layout.l;
    let mut x = [i, i];
    x[r] = 1;
    let first = layout.site_block(x).region;
    x[r] = l;
    let last = layout.site_block(x).region;
    let lab = label_region(sample, &first.hull(&last));
    !crossing_clusters(&lab, r).is_empty()
}

fn u_full(sample: &PercolationSample, layout: &BlockLayout) -> bool {
    let l = layout.l as i64;
    if layout.d == 2 {
        return (1..=layout.l).all(|i| (0..2).all(|r| g_rowcol(sample, i, r, layout)));
    }
    let mut cache = HashMap::new();
    // cheap necessary condition first: every site block crossed
    for x2 in 1..=l {
        for x1 in 1..=l {
            if a_crossed(sample, [2 * x1, 2 * x2], layout, &mut cache).1.is_empty() {
                return false;
            }
        }
    }
    for z2 in (2..=2 * l).step_by(2) {
        for z1 in (3..2 * l).step_by(2) {
            if !d_joint(sample, [z1, z2], layout, &mut cache) {
                return false;
            }
        }
    }
    for z2 in (2..2 * l).step_by(2) {
        for z1 in (2..=2 * l).step_by(2) {
            if !f_joint(sample, [z1, z2], layout, &mut cache) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lattice::Lattice;
    use crate::percolation::sample::sample;

    fn lattice(layout: &BlockLayout) -> Arc<Lattice> {
        Arc::new(Lattice::square(&crate::lattice::slab_dims(layout.l, layout.k, layout.d)))
    }

    fn all_events(l: i64) -> Vec<Event> {
        vec![
            Event::ACross { y: [2, 2] },
            Event::BAtMostOne { y: [2, 2] },
            Event::DJoint { z: [3, 2] },
            Event::EAtMostOneC { z: [2, 2] },
            Event::FJointC { z: [2, 2] },
            Event::UFull,
            Event::GRowCol { i: 1, r: 1 },
            Event::HPairConnect { a: vec![1, 1], b: vec![2 * l, 2 * l] },
        ]
    }

    #[test]
    fn extremes() {
        for d in [2, 3] {
            let layout = BlockLayout::new(2, 2, d).unwrap();
            let lat = lattice(&layout);
            let mut ev = all_events(4);
            if d == 3 {
                ev[7] = Event::HPairConnect { a: vec![1, 1, 1], b: vec![8, 8, 4] };
            }
            let full = sample(&lat, 1.0, 1.0, 0, 0).unwrap();
            let empty = sample(&lat, 0.0, 1.0, 0, 0).unwrap();
            for e in &ev {
                assert!(evaluate_event(&full, e, &layout).unwrap(), "{e:?} at p=1");
                let at_zero = evaluate_event(&empty, e, &layout).unwrap();
                let expect = matches!(e.kind(), EventKind::BAtMostOne | EventKind::EAtMostOneC);
                assert_eq!(at_zero, expect, "{e:?} at p=0");
            }
        }
    }

    #[test]
    fn unknown_event_is_domain_error() {
        assert!(matches!("Z_bogus".parse::<EventKind>(), Err(Error::Domain(_))));
        assert!(Event::named("nope", [2, 2]).is_err());
        assert_eq!(Event::named("a_cross", [2, 4]).unwrap(), Event::ACross { y: [2, 4] });
    }

    #[test]
    fn out_of_layout_indices_rejected() {
        let layout = BlockLayout::new(2, 1, 2).unwrap();
        let s = sample(&lattice(&layout), 1.0, 1.0, 0, 0).unwrap();
        assert!(evaluate_event(&s, &Event::DJoint { z: [2, 2] }, &layout).is_err());
        assert!(evaluate_event(&s, &Event::ACross { y: [6, 2] }, &layout).is_err());
        let big = BlockLayout::new(3, 1, 2).unwrap();
        assert!(evaluate_event(&s, &Event::UFull, &big).is_err());
    }

    #[test]
    fn d_requires_connection_in_the_union() {
        // two crossed blocks whose crossing rows are different and only the
        // lower one continues across the interface
        let layout = BlockLayout::new(2, 1, 2).unwrap();
        let lat = lattice(&layout);
        let at = |x, y| lat.site_at(&[x, y]).unwrap();
        let mut s = sample(&lat, 0.0, 1.0, 0, 0).unwrap();
        s.open_path(&[at(1, 1), at(2, 1)]).unwrap();
        s.open_path(&[at(3, 2), at(4, 2)]).unwrap();
        let d = Event::DJoint { z: [3, 2] };
        assert!(!evaluate_event(&s, &d, &layout).unwrap());
        s.open_path(&[at(2, 1), at(2, 2), at(3, 2)]).unwrap();
        assert!(evaluate_event(&s, &d, &layout).unwrap());
    }

    #[test]
    fn serde_tags() {
        let e: Event = serde_json::from_str(r#"{"event":"D_joint","z":[3,2]}"#).unwrap();
        assert_eq!(e, Event::DJoint { z: [3, 2] });
        let u: Event = serde_json::from_str(r#"{"event":"U_full"}"#).unwrap();
        assert_eq!(u, Event::UFull);
    }
}
