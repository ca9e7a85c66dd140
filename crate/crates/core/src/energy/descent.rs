use std::collections::BTreeSet;

use super::{ring_crease_count, EnergyModel};

/// Terms touching each cell, for energy changes of single flips.
struct Incidence {
    primitive: Vec<Vec<usize>>,
    visibility: Vec<Vec<usize>>,
    edges: Vec<Vec<usize>>,
    /// Corners per edge term.
    corners_of_edge: Vec<Vec<usize>>,
}

impl Incidence {
    fn new(model: &EnergyModel) -> Self {
        let n = model.cell_count;
        let mut inc = Incidence {
            primitive: vec![Vec::new(); n],
            visibility: vec![Vec::new(); n],
            edges: vec![Vec::new(); n],
            corners_of_edge: vec![Vec::new(); model.edges.len()],
        };
        for (i, g) in model.primitive.iter().enumerate() {
            for &c in g.cells.iter().collect::<BTreeSet<_>>() {
                inc.primitive[c].push(i);
            }
        }
        for (i, p) in model.visibility.iter().enumerate() {
            inc.visibility[p.a].push(i);
            if p.b != p.a {
                inc.visibility[p.b].push(i);
            }
        }
        for (i, e) in model.edges.iter().enumerate() {
            for &c in e.ring.iter().collect::<BTreeSet<_>>() {
                inc.edges[c].push(i);
            }
        }
        for (i, k) in model.corners.iter().enumerate() {
            for &e in k.pairs.iter().flat_map(|(a, b)| [a, b]).collect::<BTreeSet<_>>() {
                inc.corners_of_edge[e].push(i);
            }
        }
        inc
    }

    /// Energy of the terms touching `c` under the current labeling.
    fn local(&self, model: &EnergyModel, x: &[bool], c: usize, creased: &[bool]) -> f64 {
        let mut e = 0.0;
        for &i in &self.primitive[c] {
            let g = &model.primitive[i];
            if !g.cells.iter().any(|&k| x[k]) {
                e += g.weight;
            }
        }
        for &i in &self.visibility[c] {
            let p = &model.visibility[i];
            if x[p.a] != x[p.b] {
                e += p.weight;
            }
        }
        let mut corners = BTreeSet::new();
        for &i in &self.edges[c] {
            let t = &model.edges[i];
            e += t.weight * ring_crease_count(&t.ring, x) as f64;
            corners.extend(self.corners_of_edge[i].iter().copied());
        }
        for k in corners {
            let corner = &model.corners[k];
            if corner.pairs.iter().any(|&(a, b)| creased[a] && creased[b]) {
                e += corner.weight;
            }
        }
        e
    }
}

/// Flips single cells while that lowers the energy. Cells are visited in
/// index order, sweep after sweep, until a sweep changes nothing or
/// `max_sweeps` is reached. Hard-empty cells are never filled. Returns the
/// flipped cells in order.
pub fn descend(model: &EnergyModel, x: &mut [bool], max_sweeps: usize) -> Vec<usize> {
    let inc = Incidence::new(model);
    let mut creased: Vec<bool> = model.edges.iter().map(|e| ring_crease_count(&e.ring, x) > 0).collect();
    let mut flipped = Vec::new();
    for _ in 0..max_sweeps {
        let mut changed = false;
        for c in 0..model.cell_count {
            if !x[c] && model.hard_empty.contains(&c) {
                continue;
            }
            let before = inc.local(model, x, c, &creased);
            x[c] = !x[c];
            for &i in &inc.edges[c] {
                creased[i] = ring_crease_count(&model.edges[i].ring, x) > 0;
            }
            let after = inc.local(model, x, c, &creased);
            // a relative margin keeps rounding noise from cycling
            if after < before - 1e-12 * (1.0 + before.abs()) {
                flipped.push(c);
                changed = true;
            } else {
                x[c] = !x[c];
                for &i in &inc.edges[c] {
                    creased[i] = ring_crease_count(&model.edges[i].ring, x) > 0;
                }
            }
        }
        if !changed {
            break;
        }
    }
    flipped
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{CornerTerm, EdgeTerm, PrimitiveGroup, VisibilityPair};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_model(rng: &mut ChaCha8Rng, n: usize) -> EnergyModel {
        let cells = |rng: &mut ChaCha8Rng, k: usize| -> Vec<usize> { (0..k).map(|_| rng.gen_range(0..n)).collect() };
        let edges: Vec<EdgeTerm> = (0..6)
            .map(|i| EdgeTerm { edge: i, ring: cells(rng, 4), weight: rng.gen() })
            .collect();
        EnergyModel {
            cell_count: n,
            primitive: (0..8)
                .map(|_| {
                    let k = rng.gen_range(1..4);
                    PrimitiveGroup { cells: cells(rng, k), weight: rng.gen() }
                })
                .collect(),
            visibility: (0..10)
                .map(|f| VisibilityPair { face: f, a: rng.gen_range(0..n), b: rng.gen_range(0..n), weight: rng.gen() })
                .collect(),
            corners: (0..3)
                .map(|v| CornerTerm { vertex: v, pairs: vec![(rng.gen_range(0..6), rng.gen_range(0..6))], weight: rng.gen() })
                .collect(),
            edges,
            hard_empty: [0].into_iter().collect(),
        }
    }

    #[test]
    fn local_changes_match_full_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = 7;
            let model = random_model(&mut rng, n);
            let inc = Incidence::new(&model);
            let mut x: Vec<bool> = (0..n).map(|c| c != 0 && rng.gen()).collect();
            let c = rng.gen_range(1..n);
            let crease = |x: &[bool]| -> Vec<bool> { model.edges.iter().map(|e| ring_crease_count(&e.ring, x) > 0).collect() };
            let total0 = model.evaluate(&x).unwrap().total;
            let local0 = inc.local(&model, &x, c, &crease(&x));
            x[c] = !x[c];
            let total1 = model.evaluate(&x).unwrap().total;
            let local1 = inc.local(&model, &x, c, &crease(&x));
            assert!(((total1 - total0) - (local1 - local0)).abs() < 1e-12);
        }
    }

    #[test]
    fn descent_reaches_a_single_flip_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let model = random_model(&mut rng, 8);
            let mut x: Vec<bool> = (0..8).map(|c| c != 0 && rng.gen()).collect();
            let start = model.evaluate(&x).unwrap().total;
            descend(&model, &mut x, 100);
            let end = model.evaluate(&x).unwrap().total;
            assert!(end <= start);
            for c in 1..8 {
                let mut y = x.clone();
                y[c] = !y[c];
                assert!(model.evaluate(&y).unwrap().total >= end - 1e-9);
            }
            assert!(!x[0]);
        }
    }
}
