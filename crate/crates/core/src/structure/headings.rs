use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FontStyle;
use crate::region::RegionId;

/// Raw heading level as found in a document or chosen by a user. `0` stands
/// for the level-less `H` tag.
pub type RawLevel = u8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineEntry {
    pub region: RegionId,
    pub level: u8,
}

/// Headings of a document in reading order with valid levels.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HeadingOutline {
    pub entries: Vec<OutlineEntry>,
}

impl HeadingOutline {
    pub fn levels(&self) -> Vec<u8> {
        self.entries.iter().map(|e| e.level).collect()
    }

    pub fn level_of(&self, region: RegionId) -> Option<u8> {
        self.entries.iter().find(|e| e.region == region).map(|e| e.level)
    }

    pub fn is_valid(&self) -> bool {
        levels_are_valid(&self.levels())
    }
}

/// Starts at 1, every level in 1..=6, and no step down the hierarchy skips
/// a level.
pub fn levels_are_valid(levels: &[u8]) -> bool {
    let mut prev = 0u8;
    for &l in levels {
        if !(1..=6).contains(&l) || l > prev + 1 {
            return false;
        }
        prev = l;
    }
    true
}

/// Level-wise repair: `H` becomes 1, the first heading becomes 1, and every
/// later heading is capped at one below its predecessor.
pub fn repair_levels(raw: &[RawLevel]) -> Vec<u8> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev = 0u8;
    for &r in raw {
        let wanted = r.clamp(1, 6);
        let level = wanted.min(prev + 1);
        out.push(level);
        prev = level;
    }
    out
}

pub fn repair_headings(raw: &[(RegionId, RawLevel)]) -> HeadingOutline {
    let levels = repair_levels(&raw.iter().map(|(_, l)| *l).collect::<Vec<_>>());
    HeadingOutline {
        entries: raw.iter().zip(levels).map(|((region, _), level)| OutlineEntry { region: *region, level }).collect(),
    }
}

/// Font sizes closer than this count as the same heading style.
pub const SIZE_QUANTUM: f64 = 0.5;

fn size_key(size: f64) -> i64 {
    (size / SIZE_QUANTUM).round() as i64
}

/// Ranks distinct (size, bold) styles by size, larger first and bold before
/// regular at equal size, then repairs the resulting sequence.
pub fn detect_heading_levels(headings: &[(RegionId, f64, FontStyle)]) -> Result<HeadingOutline> {
    let mut keys: Vec<(i64, bool)> = headings.iter().map(|(_, size, style)| (size_key(*size), style.bold)).collect();
    keys.sort_by(|a, b| b.cmp(a));
    keys.dedup();
    if keys.len() > 6 {
        return Err(Error::TooManyLevels(keys.len()));
    }
    let raw: Vec<(RegionId, RawLevel)> = headings
        .iter()
        .map(|(region, size, style)| {
            let rank = keys.iter().position(|k| *k == (size_key(*size), style.bold)).expect("key collected above");
            (*region, rank as u8 + 1)
        })
        .collect();
    Ok(repair_headings(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(levels: &[u8]) -> Vec<(RegionId, RawLevel)> {
        levels.iter().enumerate().map(|(i, l)| (RegionId(i as u32), *l)).collect()
    }

    #[test]
    fn levels_up_skips() {
        assert_eq!(repair_headings(&ids(&[1, 3])).levels(), vec![1, 2]);
    }

    #[test]
    fn unnumbered_becomes_first_level() {
        assert_eq!(repair_headings(&ids(&[0, 2])).levels(), vec![1, 2]);
    }

    #[test]
    fn valid_sequence_unchanged() {
        assert_eq!(repair_headings(&ids(&[1, 2, 2, 1, 2])).levels(), vec![1, 2, 2, 1, 2]);
    }

    #[test]
    fn document_starting_deep_is_lifted() {
        assert_eq!(repair_levels(&[3, 4, 2]), vec![1, 2, 2]);
    }

    #[test]
    fn detection_ranks_by_size() {
        let hs: Vec<_> = [18.0, 14.0, 14.0, 12.0].iter().enumerate().map(|(i, s)| (RegionId(i as u32), *s, FontStyle::default())).collect();
        assert_eq!(detect_heading_levels(&hs).unwrap().levels(), vec![1, 2, 2, 3]);
    }

    #[test]
    fn detection_same_style_is_flat() {
        let hs: Vec<_> = (0..4).map(|i| (RegionId(i), 12.0, FontStyle::default())).collect();
        assert_eq!(detect_heading_levels(&hs).unwrap().levels(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn detection_then_repair() {
        let hs = vec![(RegionId(0), 12.0, FontStyle::default()), (RegionId(1), 18.0, FontStyle::default())];
        assert_eq!(detect_heading_levels(&hs).unwrap().levels(), vec![1, 1]);
    }

    #[test]
    fn bold_outranks_regular_at_same_size() {
        let bold = FontStyle { bold: true, italic: false };
        let hs = vec![(RegionId(0), 12.0, bold), (RegionId(1), 12.0, FontStyle::default())];
        assert_eq!(detect_heading_levels(&hs).unwrap().levels(), vec![1, 2]);
    }

    #[test]
    fn too_many_styles() {
        let hs: Vec<_> = (0..7).map(|i| (RegionId(i), 10.0 + f64::from(i) * 2.0, FontStyle::default())).collect();
        assert!(matches!(detect_heading_levels(&hs), Err(Error::TooManyLevels(7))));
    }
}
