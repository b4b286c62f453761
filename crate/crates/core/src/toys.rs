//! Toy sequence-masking tasks. Labels are computed while the sample is built.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Literal that stands in for a masked value.
pub const MASK_VALUE: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ToyKind {
    Grid4th,
    IndexN,
    CountMasks,
}

/// What the index task asks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexLabel {
    /// Value found `N` positions before the mask.
    #[default]
    ValueBefore,
    /// Position of the mask itself.
    MaskIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToySample {
    pub kind: ToyKind,
    pub seed: u64,
    pub params: BTreeMap<String, u64>,
    pub text: String,
    pub label: String,
}

/// Largest data value; values are drawn from `0..=alphabet_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet(pub u32);

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet(9)
    }
}

impl Alphabet {
    fn check(self) -> Result<()> {
        if self.0 >= MASK_VALUE {
            return Err(Error::config(format!(
                "alphabet max {} collides with mask literal {MASK_VALUE}",
                self.0
            )));
        }
        Ok(())
    }
}

/// Renders a grid as `r,c:v;` cells, writing the mask literal at `mask`.
pub fn render_grid(grid: &[Vec<u32>], mask: Option<(usize, usize)>) -> String {
    let mut out = String::new();
    for (r, row) in grid.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let v = if mask == Some((r, c)) { MASK_VALUE } else { *v };
            out.push_str(&format!("{r},{c}:{v};"));
        }
    }
    out
}

fn render_seq(values: &[u32]) -> String {
    values.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

pub fn gen_grid_task(rows: usize, cols: usize, seed: u64, alphabet: Alphabet) -> Result<ToySample> {
    alphabet.check()?;
    if rows < 2 || cols < 4 {
        return Err(Error::config(format!(
            "grid task needs at least 2 rows and 4 columns, got {rows}x{cols}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let grid: Vec<Vec<u32>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..=alphabet.0)).collect())
        .collect();
    let mask = (rng.gen_range(1..rows), rng.gen_range(0..cols));
    let label = grid[mask.0 - 1][3];

    Ok(ToySample {
        kind: ToyKind::Grid4th,
        seed,
        params: BTreeMap::from([("rows".to_string(), rows as u64), ("cols".to_string(), cols as u64)]),
        text: render_grid(&grid, Some(mask)),
        label: label.to_string(),
    })
}

pub fn gen_index_before_mask(
    n: usize,
    len: usize,
    seed: u64,
    alphabet: Alphabet,
    mode: IndexLabel,
) -> Result<ToySample> {
    alphabet.check()?;
    if len < n + 1 {
        return Err(Error::config(format!(
            "sequence of length {len} cannot hold a mask {n} positions after its start"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut values: Vec<u32> = (0..len).map(|_| rng.gen_range(0..=alphabet.0)).collect();
    let pos = rng.gen_range(n..len);
    let label = match mode {
        IndexLabel::ValueBefore => values[pos - n],
        IndexLabel::MaskIndex => pos as u32,
    };
    values[pos] = MASK_VALUE;

    let mut params = BTreeMap::from([("n".to_string(), n as u64), ("len".to_string(), len as u64)]);
    if mode == IndexLabel::MaskIndex {
        params.insert("mask_index_mode".to_string(), 1);
    }
    Ok(ToySample {
        kind: ToyKind::IndexN,
        seed,
        params,
        text: render_seq(&values),
        label: label.to_string(),
    })
}

pub fn gen_count_masks(len: usize, seed: u64, alphabet: Alphabet) -> Result<ToySample> {
    alphabet.check()?;
    if len < 1 {
        return Err(Error::config("count task needs a non-empty sequence"));
    }
    let mut rng = rng::seeded(seed);
    let mut values: Vec<u32> = (0..len).map(|_| rng.gen_range(0..=alphabet.0)).collect();
    let k = rng.gen_range(0..=len);
    for i in sample(&mut rng, len, k) {
        values[i] = MASK_VALUE;
    }
    Ok(ToySample {
        kind: ToyKind::CountMasks,
        seed,
        params: BTreeMap::from([("len".to_string(), len as u64)]),
        text: render_seq(&values),
        label: k.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_label(text: &str) -> usize {
        text.split(',').filter(|t| *t == "100").count()
    }

    #[test]
    fn grid_render_prefix() {
        let grid = vec![vec![9, 1, 0, 0, 4], vec![5, 9, 3, 3, 7]];
        let text = render_grid(&grid, None);
        assert!(text.starts_with("0,0:9;0,1:1;0,2:0;0,3:0;0,4:4;1,0:5;1,1:9;1,2:3;1,3:3;1,"));
    }

    #[test]
    fn minimal_grid_label_is_row0_col3() {
        for seed in 0..50 {
            let s = gen_grid_task(2, 4, seed, Alphabet::default()).unwrap();
            let cells: Vec<&str> = s.text.trim_end_matches(';').split(';').collect();
            let v03 = cells[3].split(':').nth(1).unwrap();
            assert_eq!(s.label, v03);
            assert!(cells[4..].iter().any(|c| c.ends_with(":100")));
        }
    }

    #[test]
    fn grid_too_small() {
        assert!(gen_grid_task(1, 4, 0, Alphabet::default()).is_err());
        assert!(gen_grid_task(3, 3, 0, Alphabet::default()).is_err());
    }

    #[test]
    fn index_degenerate_n0() {
        for seed in 0..20 {
            let s = gen_index_before_mask(0, 10, seed, Alphabet::default(), IndexLabel::ValueBefore).unwrap();
            let label: u32 = s.label.parse().unwrap();
            assert!(label <= 9);
            assert_eq!(count_label(&s.text), 1);
        }
    }

    #[test]
    fn index_mask_index_mode() {
        let s = gen_index_before_mask(3, 10, 4, Alphabet::default(), IndexLabel::MaskIndex).unwrap();
        let pos = s.text.split(',').position(|t| t == "100").unwrap();
        assert_eq!(s.label, pos.to_string());
        assert!(pos >= 3);
    }

    #[test]
    fn index_impossible() {
        assert!(gen_index_before_mask(10, 10, 0, Alphabet::default(), IndexLabel::ValueBefore).is_err());
    }

    #[test]
    fn count_labels() {
        assert_eq!(count_label("100,4,100,100,100,0,5,100,100,100"), 7);
        for seed in 0..100 {
            let s = gen_count_masks(10, seed, Alphabet::default()).unwrap();
            assert_eq!(s.label, count_label(&s.text).to_string());
        }
        // Boundaries are reachable: with len 1 both 0 and 1 masks appear.
        let labels: std::collections::BTreeSet<_> = (0..64)
            .map(|s| gen_count_masks(1, s, Alphabet::default()).unwrap().label)
            .collect();
        assert_eq!(labels.into_iter().collect::<Vec<_>>(), ["0", "1"]);
    }

    #[test]
    fn alphabet_collision_rejected() {
        assert!(gen_count_masks(5, 0, Alphabet(100)).is_err());
    }
}
