use alloc::vec::Vec;

use crate::series::EnergySeries;

/// Fills every isolated missing reading with the mean of its two neighbours.
///
/// Runs of two or more missing readings are left alone. Returns the filled
/// series and the indices that were filled; later stages treat those
/// readings as measured.
pub fn interpolate_singles(es: &EnergySeries) -> (EnergySeries, Vec<usize>) {
    let mut values = es.values().to_vec();
    let mut filled = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        if values[i].is_some() {
            continue;
        }
        // Neighbours are read from the original so a filled value never
        // counts as a neighbour of the next candidate.
        if let (Some(a), Some(b)) = (es.values()[i - 1], es.values()[i + 1]) {
            values[i] = Some(0.5 * (a + b));
            filled.push(i);
        }
    }
    (es.with_values_unchecked(values), filled)
}
