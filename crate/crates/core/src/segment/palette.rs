/// Fixed 64-color palette. Every channel value is a 3-bit bucket midpoint, so
/// re-quantizing a rendered frame at 3 bits leaves palette colors unchanged.
pub const PALETTE: [[u8; 3]; 64] = [
    [15, 15, 15], [15, 15, 79], [15, 15, 175], [15, 15, 239],
    [15, 79, 15], [15, 79, 79], [15, 79, 175], [15, 79, 239],
    [15, 175, 15], [15, 175, 79], [15, 175, 175], [15, 175, 239],
    [15, 239, 15], [15, 239, 79], [15, 239, 175], [15, 239, 239],
    [79, 15, 15], [79, 15, 79], [79, 15, 175], [79, 15, 239],
    [79, 79, 15], [79, 79, 79], [79, 79, 175], [79, 79, 239],
    [79, 175, 15], [79, 175, 79], [79, 175, 175], [79, 175, 239],
    [79, 239, 15], [79, 239, 79], [79, 239, 175], [79, 239, 239],
    [175, 15, 15], [175, 15, 79], [175, 15, 175], [175, 15, 239],
    [175, 79, 15], [175, 79, 79], [175, 79, 175], [175, 79, 239],
    [175, 175, 15], [175, 175, 79], [175, 175, 175], [175, 175, 239],
    [175, 239, 15], [175, 239, 79], [175, 239, 175], [175, 239, 239],
    [239, 15, 15], [239, 15, 79], [239, 15, 175], [239, 15, 239],
    [239, 79, 15], [239, 79, 79], [239, 79, 175], [239, 79, 239],
    [239, 175, 15], [239, 175, 79], [239, 175, 175], [239, 175, 239],
    [239, 239, 15], [239, 239, 79], [239, 239, 175], [239, 239, 239],
];

/// Fibonacci hash of the label, top 6 bits. Labels 1..=35 map to distinct entries.
pub fn palette_index(label: u32) -> usize {
    (label.wrapping_mul(0x9E37_79B1) >> 26) as usize
}

pub fn palette_color(label: u32) -> [u8; 3] {
    PALETTE[palette_index(label)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn palette_entries_are_unique() {
        let set: HashSet<_> = PALETTE.iter().collect();
        assert_eq!(set.len(), 64);
    }

    #[test]
    fn small_labels_get_distinct_colors() {
        let set: HashSet<_> = (1..=35).map(palette_index).collect();
        assert_eq!(set.len(), 35);
        assert_eq!(palette_index(1), 39);
    }
}
