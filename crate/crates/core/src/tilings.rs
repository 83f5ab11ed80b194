//! Equal-area dyadic tilings of the unit square, HV-trees, and their
//! isomorphism with valid configurations of a bitonic block.
//!
//! Geometry is exact: a rank-`l` tiling lives on the integer grid of side
//! `N = 2^l`, and segment midpoints use the doubled grid of side `2N`.
//!
//! Child order is fixed throughout: an H node cuts horizontally and its first
//! child (the odd-indexed sub-block) is the lower half; a V node cuts
//! vertically and its first child (the top-half qubits) is the left half.

use crate::architecture::Slot;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `[a 2^-s, (a+1) 2^-s] × [b 2^-t, (b+1) 2^-t]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicRectangle {
    pub a: u64,
    pub b: u64,
    pub s: u32,
    pub t: u32,
}

impl DyadicRectangle {
    /// Grid box `(x0, y0, x1, y1)` on the side-`2^l` grid.
    pub fn grid(&self, l: u32) -> (u64, u64, u64, u64) {
        let w = 1u64 << (l - self.s);
        let h = 1u64 << (l - self.t);
        (self.a * w, self.b * h, (self.a + 1) * w, (self.b + 1) * h)
    }

    fn from_grid(l: u32, x0: u64, y0: u64, w: u64, h: u64) -> Self {
        let s = l - w.trailing_zeros();
        let t = l - h.trailing_zeros();
        Self {
            a: x0 / w,
            b: y0 / h,
            s,
            t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicTiling {
    pub l: u32,
    /// Sorted, so equal tilings compare equal.
    pub rects: Vec<DyadicRectangle>,
}

impl DyadicTiling {
    /// Checks the rectangle set is an exact equal-area dyadic tiling.
    pub fn new(l: u32, mut rects: Vec<DyadicRectangle>) -> Result<Self> {
        rects.sort_unstable();
        let t = Self { l, rects };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.l;
        if self.rects.len() != 1usize << l {
            return Err(Error::InvalidTiling(format!(
                "expected {} rectangles, got {}",
                1u64 << l,
                self.rects.len()
            )));
        }
        for r in &self.rects {
            if r.s + r.t != l || r.a >= 1u64 << r.s || r.b >= 1u64 << r.t {
                return Err(Error::InvalidTiling(format!("bad rectangle {r:?}")));
            }
        }
        // equal areas summing to one; pairwise disjoint interiors closes it
        for (i, p) in self.rects.iter().enumerate() {
            let (px0, py0, px1, py1) = p.grid(l);
            for q in &self.rects[i + 1..] {
                let (qx0, qy0, qx1, qy1) = q.grid(l);
                if px0 < qx1 && qx0 < px1 && py0 < qy1 && qy0 < py1 {
                    return Err(Error::InvalidTiling(format!("{p:?} overlaps {q:?}")));
                }
            }
        }
        Ok(())
    }

    /// All-horizontal tiling of `2^l` stacked strips.
    pub fn strips(l: u32) -> Self {
        let rects = (0..1u64 << l)
            .map(|b| DyadicRectangle { a: 0, b, s: 0, t: l })
            .collect();
        Self { l, rects }
    }

    pub fn to_svg(&self, size: f64) -> String {
        let n = (1u64 << self.l) as f64;
        let k = size / n;
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
        );
        for r in &self.rects {
            let (x0, y0, x1, y1) = r.grid(self.l);
            // SVG y grows downwards
            out.push_str(&format!(
                "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
                x0 as f64 * k,
                size - y1 as f64 * k,
                (x1 - x0) as f64 * k,
                (y1 - y0) as f64 * k
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cut {
    H,
    V,
}

/// Complete binary tree of cut labels in heap order (root 0, children
/// `2i+1`, `2i+2`), `2^l - 1` labels for rank `l`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HvTree {
    pub l: u32,
    pub labels: Vec<Cut>,
}

impl HvTree {
    pub fn new(l: u32, labels: Vec<Cut>) -> Result<Self> {
        let t = Self { l, labels };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let internal = (1usize << self.l) - 1;
        if self.labels.len() != internal {
            return Err(Error::InvalidTree(format!(
                "expected {internal} labels, got {}",
                self.labels.len()
            )));
        }
        for i in 0..internal {
            let (c0, c1) = (2 * i + 1, 2 * i + 2);
            if c1 < internal
                && self.labels[i] == Cut::H
                && self.labels[c0] == Cut::V
                && self.labels[c1] == Cut::V
            {
                return Err(Error::InvalidTree(format!(
                    "H node {i} has two V children"
                )));
            }
        }
        Ok(())
    }
}

fn collect_tree(j: u32, t: &[usize], node: usize, labels: &mut [Cut]) {
    if j == 0 {
        return;
    }
    if t.iter().all(|&x| x >= 1) {
        labels[node] = Cut::V;
        let half = t.len() / 2;
        let top: Vec<_> = t[..half].iter().map(|x| x - 1).collect();
        let bot: Vec<_> = t[half..].iter().map(|x| x - 1).collect();
        collect_tree(j - 1, &top, 2 * node + 1, labels);
        collect_tree(j - 1, &bot, 2 * node + 2, labels);
    } else {
        labels[node] = Cut::H;
        let odd: Vec<_> = t.iter().step_by(2).copied().collect();
        let even: Vec<_> = t.iter().skip(1).step_by(2).copied().collect();
        collect_tree(j - 1, &odd, 2 * node + 1, labels);
        collect_tree(j - 1, &even, 2 * node + 2, labels);
    }
}

fn check_block_config(l: u32, tau: &[usize]) -> Result<()> {
    let arch = crate::architecture::build_bitonic_block(l as usize)?;
    if !crate::configurations::is_valid(&arch, tau)? {
        return Err(Error::InvalidConfiguration(format!("{tau:?}")));
    }
    Ok(())
}

/// Root is V iff the first layer is fully applied; V recurses on the top and
/// bottom halves (last `l-1` layers), H on the odd and even qubits (first `l-1`).
pub fn config_to_hvtree(l: u32, tau: &[usize]) -> Result<HvTree> {
    check_block_config(l, tau)?;
    let mut labels = vec![Cut::H; (1usize << l) - 1];
    collect_tree(l, tau, 0, &mut labels);
    Ok(HvTree { l, labels })
}

fn tree_config(j: u32, labels: &[Cut], node: usize) -> Vec<usize> {
    if j == 0 {
        return vec![0];
    }
    let a = tree_config(j - 1, labels, 2 * node + 1);
    let b = tree_config(j - 1, labels, 2 * node + 2);
    match labels[node] {
        Cut::V => a.iter().chain(&b).map(|x| x + 1).collect(),
        Cut::H => a.iter().zip(&b).flat_map(|(&x, &y)| [x, y]).collect(),
    }
}

pub fn hvtree_to_config(t: &HvTree) -> Result<Vec<usize>> {
    t.validate()?;
    Ok(tree_config(t.l, &t.labels, 0))
}

fn draw(j: u32, labels: &[Cut], node: usize, bx: (u64, u64, u64, u64), l: u32, out: &mut Vec<DyadicRectangle>) {
    let (x0, y0, w, h) = bx;
    if j == 0 {
        out.push(DyadicRectangle::from_grid(l, x0, y0, w, h));
        return;
    }
    match labels[node] {
        Cut::H => {
            draw(j - 1, labels, 2 * node + 1, (x0, y0, w, h / 2), l, out);
            draw(j - 1, labels, 2 * node + 2, (x0, y0 + h / 2, w, h / 2), l, out);
        }
        Cut::V => {
            draw(j - 1, labels, 2 * node + 1, (x0, y0, w / 2, h), l, out);
            draw(j - 1, labels, 2 * node + 2, (x0 + w / 2, y0, w / 2, h), l, out);
        }
    }
}

pub fn hvtree_to_tiling(t: &HvTree) -> Result<DyadicTiling> {
    t.validate()?;
    let n = 1u64 << t.l;
    let mut rects = Vec::with_capacity(n as usize);
    draw(t.l, &t.labels, 0, (0, 0, n, n), t.l, &mut rects);
    rects.sort_unstable();
    Ok(DyadicTiling { l: t.l, rects })
}

fn read_tree(
    j: u32,
    rects: &[(u64, u64, u64, u64)],
    bx: (u64, u64, u64, u64),
    node: usize,
    labels: &mut [Cut],
) -> Result<()> {
    let (x0, y0, w, h) = bx;
    if j == 0 {
        return match rects {
            [r] if *r == (x0, y0, x0 + w, y0 + h) => Ok(()),
            _ => Err(Error::InvalidTiling("region does not resolve to one tile".into())),
        };
    }
    let (xm, ym) = (x0 + w / 2, y0 + h / 2);
    // prefer the V cut when both exist
    let cut = if w >= 2 && rects.iter().all(|r| r.2 <= xm || r.0 >= xm) {
        Cut::V
    } else if h >= 2 && rects.iter().all(|r| r.3 <= ym || r.1 >= ym) {
        Cut::H
    } else {
        return Err(Error::InvalidTiling("no bisecting cut".into()));
    };
    labels[node] = cut;
    let (first, second): (Vec<_>, Vec<_>) = match cut {
        Cut::V => rects.iter().partition(|r| r.2 <= xm),
        Cut::H => rects.iter().partition(|r| r.3 <= ym),
    };
    let (b0, b1) = match cut {
        Cut::V => ((x0, y0, w / 2, h), (xm, y0, w / 2, h)),
        Cut::H => ((x0, y0, w, h / 2), (x0, ym, w, h / 2)),
    };
    read_tree(j - 1, &first, b0, 2 * node + 1, labels)?;
    read_tree(j - 1, &second, b1, 2 * node + 2, labels)
}

pub fn tiling_to_hvtree(d: &DyadicTiling) -> Result<HvTree> {
    d.validate()?;
    let n = 1u64 << d.l;
    let rects: Vec<_> = d.rects.iter().map(|r| r.grid(d.l)).collect();
    let mut labels = vec![Cut::H; (1usize << d.l) - 1];
    read_tree(d.l, &rects, (0, 0, n, n), 0, &mut labels)?;
    Ok(HvTree { l: d.l, labels })
}

pub fn config_to_tiling(l: u32, tau: &[usize]) -> Result<DyadicTiling> {
    hvtree_to_tiling(&config_to_hvtree(l, tau)?)
}

pub fn tiling_to_config(d: &DyadicTiling) -> Result<Vec<usize>> {
    hvtree_to_config(&tiling_to_hvtree(d)?)
}

/// A c-segment, identified by its level `c` and its midpoint on the doubled
/// grid (side `2^(l+1)`). `vertical` gives its current orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Segment {
    pub c: u32,
    pub mx: u64,
    pub my: u64,
    pub vertical: bool,
}

impl Segment {
    /// Same segment in the other orientation.
    pub fn rotated(&self) -> Self {
        Self {
            vertical: !self.vertical,
            ..*self
        }
    }

    /// Endpoints on the doubled grid. A horizontal c-segment has length
    /// `2^-(c-1)`, a vertical one `2^-(l-c)`.
    pub fn endpoints(&self, l: u32) -> ((u64, u64), (u64, u64)) {
        if self.vertical {
            let half = 1u64 << self.c; // half of 2^(c+1) on the doubled grid
            ((self.mx, self.my - half), (self.mx, self.my + half))
        } else {
            let half = 1u64 << (l + 1 - self.c);
            ((self.mx - half, self.my), (self.mx + half, self.my))
        }
    }
}

/// Pairs of tiles sharing a full side whose union is a dyadic rectangle.
/// Returns `(segment, lower/left tile index, upper/right tile index)`.
fn flippable_pairs(d: &DyadicTiling) -> Vec<(Segment, usize, usize)> {
    let l = d.l;
    let boxes: Vec<_> = d.rects.iter().map(|r| r.grid(l)).collect();
    let mut out = Vec::new();
    for (i, p) in boxes.iter().enumerate() {
        for (j, q) in boxes.iter().enumerate() {
            // q directly above p with the same x-range
            if p.0 == q.0 && p.2 == q.2 && p.3 == q.1 {
                let h = p.3 - p.1;
                if p.1 % (2 * h) == 0 {
                    let w = p.2 - p.0;
                    out.push((
                        Segment {
                            c: l + 1 - w.trailing_zeros(),
                            mx: p.0 + p.2,
                            my: 2 * p.3,
                            vertical: false,
                        },
                        i,
                        j,
                    ));
                }
            }
            // q directly right of p with the same y-range
            if p.1 == q.1 && p.3 == q.3 && p.2 == q.0 {
                let w = p.2 - p.0;
                if p.0 % (2 * w) == 0 {
                    let h = p.3 - p.1;
                    out.push((
                        Segment {
                            c: h.trailing_zeros(),
                            mx: 2 * p.2,
                            my: p.1 + p.3,
                            vertical: true,
                        },
                        i,
                        j,
                    ));
                }
            }
        }
    }
    out.sort_by_key(|x| x.0);
    out
}

pub fn flippable_edges(d: &DyadicTiling) -> Vec<Segment> {
    flippable_pairs(d).into_iter().map(|x| x.0).collect()
}

/// Replaces the two tiles bordering `seg` by the perpendicular halves of
/// their union.
pub fn flip_edge(d: &DyadicTiling, seg: &Segment) -> Result<DyadicTiling> {
    let (_, i, j) = flippable_pairs(d)
        .into_iter()
        .find(|x| x.0 == *seg)
        .ok_or(Error::RejectedFlip)?;
    let l = d.l;
    let p = d.rects[i].grid(l);
    let q = d.rects[j].grid(l);
    let (x0, y0, x1, y1) = (p.0.min(q.0), p.1.min(q.1), p.2.max(q.2), p.3.max(q.3));
    let halves = if seg.vertical {
        let ym = (y0 + y1) / 2;
        [(x0, y0, x1 - x0, ym - y0), (x0, ym, x1 - x0, y1 - ym)]
    } else {
        let xm = (x0 + x1) / 2;
        [(x0, y0, xm - x0, y1 - y0), (xm, y0, x1 - xm, y1 - y0)]
    };
    let mut rects: Vec<_> = d
        .rects
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i && *k != j)
        .map(|(_, r)| *r)
        .collect();
    for (x, y, w, h) in halves {
        rects.push(DyadicRectangle::from_grid(l, x, y, w, h));
    }
    rects.sort_unstable();
    Ok(DyadicTiling { l, rects })
}

/// True if the segment lies on tile boundaries (no tile interior crosses it).
pub fn segment_present(d: &DyadicTiling, seg: &Segment) -> bool {
    let ((ax, ay), (bx, by)) = seg.endpoints(d.l);
    d.rects.iter().all(|r| {
        let (x0, y0, x1, y1) = r.grid(d.l);
        let (x0, y0, x1, y1) = (2 * x0, 2 * y0, 2 * x1, 2 * y1);
        if seg.vertical {
            !(x0 < ax && ax < x1 && y0 < by && ay < y1)
        } else {
            !(y0 < ay && ay < y1 && x0 < bx && ax < x1)
        }
    })
}

/// Gate slot ↔ horizontal c-segment of the all-strips tiling, built by the
/// light-cone recursion: layer-`l` gates take the `l`-segments from left to
/// right; a gate's predecessor on its lower qubit takes the nearest segment
/// below, the predecessor on its upper qubit the nearest one above.
pub fn segment_gate_map(l: u32) -> Result<Vec<(Segment, Slot)>> {
    let arch = crate::architecture::build_bitonic_block(l as usize)?;
    let partners = arch.partners();
    let lu = l as usize;
    let mut map: BTreeMap<Slot, Segment> = BTreeMap::new();
    let n2 = 1u64 << (l + 1); // doubled grid side
    for (k, &(p, q)) in arch.layers[lu - 1].iter().enumerate() {
        let w = n2 >> (l - 1); // horizontal l-segment length on the doubled grid
        map.insert(
            Slot { layer: lu, p, q },
            Segment {
                c: l,
                mx: k as u64 * w + w / 2,
                my: n2 / 2,
                vertical: false,
            },
        );
    }
    for c in (1..lu).rev() {
        let upper: Vec<(Slot, Segment)> = map
            .iter()
            .filter(|(s, _)| s.layer == c + 1)
            .map(|(s, g)| (*s, *g))
            .collect();
        // spacing of the level-c cuts on the doubled grid
        let dy = n2 >> (l as usize - c + 1);
        let w = n2 >> (c - 1);
        for (slot, seg) in upper {
            for (qubit, dir) in [(slot.p, -1i64), (slot.q, 1)] {
                let r = partners[c - 1][qubit - 1];
                let pred = Slot {
                    layer: c,
                    p: qubit.min(r),
                    q: qubit.max(r),
                };
                let my = (seg.my as i64 + dir * dy as i64) as u64;
                let mx = (seg.mx / w) * w + w / 2;
                let s = Segment {
                    c: c as u32,
                    mx,
                    my,
                    vertical: false,
                };
                if let Some(prev) = map.insert(pred, s) {
                    if prev != s {
                        return Err(Error::InvalidParameter(format!(
                            "inconsistent segment assignment for {pred:?}"
                        )));
                    }
                }
            }
        }
    }
    Ok(map.into_iter().map(|(s, g)| (g, s)).collect())
}
