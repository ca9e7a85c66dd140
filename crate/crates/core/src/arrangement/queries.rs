use std::collections::BTreeMap;

use super::{get_bit, key_words, set_bit, ArrangementError, CellComplex, SignKey, ON_PLANE_TOL, SNAP_TOL};
use crate::geom::{Point3, Segment3};

/// Where a fragment of a segment lies in the complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    /// On exactly one arrangement plane, inside `face`.
    Face { plane: usize, face: usize },
    /// On the line shared by two or more planes, along `edge`.
    Edge { planes: Vec<usize>, edge: usize },
    /// Strictly inside `cell`.
    Cell { cell: usize },
}

/// Piece `[t0, t1]` of a segment (parameters along the segment).
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub t0: f64,
    pub t1: f64,
    pub carrier: Carrier,
}

impl Fragment {
    pub fn length(&self, seg: &Segment3) -> f64 {
        (self.t1 - self.t0) * seg.length()
    }
}

/// Face crossed by sightlines from a viewpoint to a segment, with the
/// length of segment whose sightlines cross it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub face: usize,
    pub length: f64,
}

/// Roots of affine `f(t) = a + (b - a) t` strictly inside `(lo, hi)`.
fn affine_root(a: f64, b: f64, lo: f64, hi: f64) -> Option<f64> {
    if (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) {
        let t = a / (a - b);
        (t > lo && t < hi).then_some(t)
    } else {
        None
    }
}

/// Merges sorted parameters closer than `1e-12`.
fn dedup_params(ts: &mut Vec<f64>) {
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
}

impl CellComplex {
    fn key_of(&self, p: &Point3, skip: &[usize]) -> Result<SignKey, ArrangementError> {
        let mut key = vec![0u64; key_words(self.scene_planes)];
        for q in 0..self.scene_planes {
            if skip.contains(&q) {
                continue;
            }
            let d = self.planes[q].signed_distance(p);
            if d.abs() <= SNAP_TOL {
                return Err(ArrangementError::OnBoundary(q));
            }
            set_bit(&mut key, q, d > 0.0);
        }
        Ok(key)
    }

    /// Cell strictly containing `p`.
    pub fn locate(&self, p: &Point3) -> Result<usize, ArrangementError> {
        if !self.bbox.contains(p, 0.0) {
            return Err(ArrangementError::OutsideBox);
        }
        for axis in 0..3 {
            if (p[axis] - self.bbox.min[axis]).abs() <= SNAP_TOL || (p[axis] - self.bbox.max[axis]).abs() <= SNAP_TOL {
                return Err(ArrangementError::OnBoundary(self.scene_planes + 2 * axis));
            }
        }
        let key = self.key_of(p, &[])?;
        self.cell_by_signs.get(&key).copied().ok_or(ArrangementError::OutsideBox)
    }

    /// Scene planes containing the whole segment.
    pub fn carrier_planes(&self, seg: &Segment3) -> Vec<usize> {
        (0..self.scene_planes)
            .filter(|&q| {
                let pl = &self.planes[q];
                pl.signed_distance(&seg.p0).abs() <= ON_PLANE_TOL && pl.signed_distance(&seg.p1).abs() <= ON_PLANE_TOL
            })
            .collect()
    }

    /// Cuts the segment where it crosses arrangement planes and classifies
    /// each piece as lying on a face, along an edge or inside a cell.
    pub fn split_segment(&self, seg: &Segment3) -> Result<Vec<Fragment>, ArrangementError> {
        if !self.bbox.contains(&seg.p0, SNAP_TOL) || !self.bbox.contains(&seg.p1, SNAP_TOL) {
            return Err(ArrangementError::OutsideBox);
        }
        let carriers = self.carrier_planes(seg);
        let mut ts = vec![0.0, 1.0];
        for q in 0..self.scene_planes {
            if carriers.contains(&q) {
                continue;
            }
            let d0 = self.planes[q].signed_distance(&seg.p0);
            let d1 = self.planes[q].signed_distance(&seg.p1);
            if let Some(t) = affine_root(d0, d1, 0.0, 1.0) {
                ts.push(t);
            }
        }
        dedup_params(&mut ts);
        let mut out = Vec::with_capacity(ts.len() - 1);
        for w in ts.windows(2) {
            let (t0, t1) = (w[0], w[1]);
            let mid = seg.point_at(0.5 * (t0 + t1));
            let carrier = self.classify(&mid, &carriers)?;
            out.push(Fragment { t0, t1, carrier });
        }
        Ok(out)
    }

    fn classify(&self, p: &Point3, carriers: &[usize]) -> Result<Carrier, ArrangementError> {
        let key = self.key_of(p, carriers)?;
        let lookup = |k: &SignKey| self.cell_by_signs.get(k).copied().ok_or(ArrangementError::OutsideBox);
        match carriers {
            [] => Ok(Carrier::Cell { cell: lookup(&key)? }),
            [plane] => {
                let mut kp = key.clone();
                set_bit(&mut kp, *plane, true);
                let mut kn = key;
                set_bit(&mut kn, *plane, false);
                let (a, b) = (lookup(&kp)?, lookup(&kn)?);
                let face = self.face_between(a, b).ok_or(ArrangementError::OutsideBox)?;
                Ok(Carrier::Face { plane: *plane, face })
            }
            [a, b, ..] => {
                let edges = self.line_edges.get(&(*a, *b)).ok_or(ArrangementError::OutsideBox)?;
                let edge = edges
                    .iter()
                    .copied()
                    .find(|&e| {
                        let [a, b] = self.edges[e].vertices;
                        let pa = self.vertices[a].position;
                        let d = self.vertices[b].position - pa;
                        let t = (p - pa).dot(&d) / d.norm_squared();
                        t > 0.0 && t < 1.0
                    })
                    .ok_or(ArrangementError::OutsideBox)?;
                Ok(Carrier::Edge { planes: carriers.to_vec(), edge })
            }
        }
    }

    /// Cells just behind a fragment as seen from `viewpoint`: the cell on the
    /// far side of a face, or every cell around an edge except the wedge
    /// facing the viewpoint. Empty for fragments inside a cell.
    pub fn behind_cells(&self, carrier: &Carrier, viewpoint: &Point3) -> Result<Vec<usize>, ArrangementError> {
        match carrier {
            Carrier::Cell { .. } => Ok(Vec::new()),
            Carrier::Face { plane, face } => {
                let d = self.planes[*plane].signed_distance(viewpoint);
                if d.abs() <= SNAP_TOL {
                    return Err(ArrangementError::GrazingViewpoint(*plane));
                }
                let f = &self.faces[*face];
                Ok(if d > 0.0 { f.negative } else { f.positive }.into_iter().collect())
            }
            Carrier::Edge { planes, edge } => {
                let mut sides = Vec::with_capacity(planes.len());
                for &p in planes {
                    let d = self.planes[p].signed_distance(viewpoint);
                    if d.abs() <= SNAP_TOL {
                        return Err(ArrangementError::GrazingViewpoint(p));
                    }
                    sides.push((p, d > 0.0));
                }
                let mut cells: Vec<usize> = self.edges[*edge]
                    .ring
                    .iter()
                    .copied()
                    .filter(|&c| !sides.iter().all(|&(p, s)| get_bit(&self.cells[c].signs, p) == s))
                    .collect();
                cells.sort_unstable();
                Ok(cells)
            }
        }
    }

    /// Faces crossed strictly between their endpoints by sightlines from
    /// `viewpoint` to the visible parts of `seg`, with the covered segment
    /// length per face, sorted by face id.
    pub fn sight_crossings(
        &self,
        viewpoint: &Point3,
        seg: &Segment3,
        intervals: &[[f64; 2]],
    ) -> Result<Vec<Crossing>, ArrangementError> {
        let n = self.scene_planes;
        let dv: Vec<f64> = (0..n).map(|q| self.planes[q].signed_distance(viewpoint)).collect();
        let d0: Vec<f64> = (0..n).map(|q| self.planes[q].signed_distance(&seg.p0)).collect();
        let d1: Vec<f64> = (0..n).map(|q| self.planes[q].signed_distance(&seg.p1)).collect();
        let on_seg = |q: usize| d0[q].abs() <= ON_PLANE_TOL && d1[q].abs() <= ON_PLANE_TOL;
        for q in 0..n {
            if on_seg(q) && dv[q].abs() <= SNAP_TOL {
                return Err(ArrangementError::GrazingViewpoint(q));
            }
        }
        let len = seg.length();
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        let mut key = vec![0u64; key_words(n)];
        for p in 0..n {
            if dv[p].abs() <= SNAP_TOL || on_seg(p) {
                continue;
            }
            let (a, b) = (d0[p], d1[p]);
            // parameters where the segment is strictly on the far side of p
            let root = affine_root(a, b, f64::NEG_INFINITY, f64::INFINITY);
            let far = |t: f64| (a + (b - a) * t) * dv[p] < 0.0;
            for &[lo, hi] in intervals {
                let (mut lo, mut hi) = (lo, hi);
                if let Some(r) = root {
                    if far(r - 1.0) {
                        hi = hi.min(r);
                    } else {
                        lo = lo.max(r);
                    }
                } else if !far(0.5) {
                    continue;
                }
                if !(hi > lo) {
                    continue;
                }
                // sign of plane q at the crossing point is the sign of
                // g_q(t) / (dv_p - d_p(t)) with g_q affine in t
                let g = |q: usize, t: f64| {
                    let dq = d0[q] + (d1[q] - d0[q]) * t;
                    let dp = a + (b - a) * t;
                    dv[p] * dq - dv[q] * dp
                };
                let mut ts = vec![lo, hi];
                for q in 0..n {
                    if q != p {
                        if let Some(t) = affine_root(g(q, 0.0), g(q, 1.0), lo, hi) {
                            ts.push(t);
                        }
                    }
                }
                dedup_params(&mut ts);
                for w in ts.windows(2) {
                    let tm = 0.5 * (w[0] + w[1]);
                    let den = dv[p] - (a + (b - a) * tm);
                    let mut degenerate = false;
                    for q in 0..n {
                        if q == p {
                            continue;
                        }
                        let e = g(q, tm) / den;
                        if e.abs() <= 1e-12 {
                            degenerate = true;
                            break;
                        }
                        set_bit(&mut key, q, e > 0.0);
                    }
                    if degenerate {
                        continue;
                    }
                    set_bit(&mut key, p, true);
                    let Some(&cp) = self.cell_by_signs.get(&key) else { continue };
                    set_bit(&mut key, p, false);
                    let Some(&cn) = self.cell_by_signs.get(&key) else { continue };
                    if let Some(f) = self.face_between(cp, cn) {
                        *acc.entry(f).or_insert(0.0) += (w[1] - w[0]) * len;
                    }
                }
            }
        }
        Ok(acc.into_iter().map(|(face, length)| Crossing { face, length }).collect())
    }
}
