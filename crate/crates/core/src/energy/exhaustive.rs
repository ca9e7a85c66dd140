use super::{EnergyError, EnergyModel};

pub const MAX_EXHAUSTIVE_CELLS: usize = 22;

/// Exact minimizer by enumeration of every labeling of the free cells.
/// Ties go to the labeling with fewest full cells, then to the
/// lexicographically smallest (`false < true`, cell 0 first).
pub fn exhaustive_min(model: &EnergyModel) -> Result<Vec<bool>, EnergyError> {
    let free: Vec<usize> = (0..model.cell_count).filter(|c| !model.hard_empty.contains(c)).collect();
    if free.len() > MAX_EXHAUSTIVE_CELLS {
        return Err(EnergyError::TooLarge(free.len()));
    }
    let mut x = vec![false; model.cell_count];
    let mut best: Option<(f64, u32, Vec<bool>)> = None;
    for mask in 0u32..(1u32 << free.len()) {
        for (i, &c) in free.iter().enumerate() {
            x[c] = mask >> i & 1 == 1;
        }
        let e = model.evaluate_unchecked(&x).total;
        let full = mask.count_ones();
        let better = match &best {
            None => true,
            Some((be, bf, bx)) => e < *be || (e == *be && (full < *bf || (full == *bf && x < *bx))),
        };
        if better {
            best = Some((e, full, x.clone()));
        }
    }
    Ok(best.expect("at least one labeling").2)
}
