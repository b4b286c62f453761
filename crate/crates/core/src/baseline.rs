//! Deterministic reference placers.
//!
//! [`column_stack_place`] stacks each type into its own column, bottom-up:
//! `cy = cursor + h/2; cursor += h + v_gap`. [`mirror_pair_place`] pairs
//! identical specs and mirrors them about a vertical axis; the v3 dataset
//! generator uses it for ground truth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::PlacedTransistor;
use crate::layoutgen::TransistorSpec;

/// Size tolerance when deciding whether two specs can be mirror partners.
const SIZE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnConfig {
    pub v_gap: f64,
    pub col_gap: f64,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        ColumnConfig {
            v_gap: 0.1,
            col_gap: 1.0,
        }
    }
}

fn check_specs(specs: &[TransistorSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::EmptyLayout);
    }
    for s in specs {
        if !(s.width.is_finite() && s.height.is_finite()) || s.width <= 0.0 || s.height <= 0.0 {
            return Err(Error::InvalidSpec {
                id: s.id.clone(),
                reason: format!("size {}x{} must be positive", s.width, s.height),
            });
        }
    }
    Ok(())
}

/// Type keys in first-appearance order, each with the indices of its specs.
fn buckets_by_type(specs: &[TransistorSpec]) -> Vec<(&str, Vec<usize>)> {
    let mut buckets: Vec<(&str, Vec<usize>)> = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        match buckets.iter_mut().find(|(t, _)| *t == s.ttype) {
            Some((_, idx)) => idx.push(i),
            None => buckets.push((&s.ttype, vec![i])),
        }
    }
    buckets
}

fn placed(spec: &TransistorSpec, cx: f64, cy: f64) -> PlacedTransistor {
    PlacedTransistor {
        id: spec.id.clone(),
        ttype: spec.ttype.clone(),
        width: spec.width,
        height: spec.height,
        cx,
        cy,
    }
}

pub fn column_stack_place(specs: &[TransistorSpec], cfg: &ColumnConfig) -> Result<Vec<PlacedTransistor>> {
    check_specs(specs)?;
    if cfg.v_gap < 0.0 || cfg.col_gap < 0.0 {
        return Err(Error::config("column gaps must be non-negative"));
    }
    let mut centers = vec![(0.0, 0.0); specs.len()];
    let mut column_x = 0.0;
    for (_, members) in buckets_by_type(specs) {
        let mut cursor = 0.0;
        let mut column_width: f64 = 0.0;
        for &i in &members {
            let s = &specs[i];
            centers[i] = (column_x + s.width / 2.0, cursor + s.height / 2.0);
            cursor += s.height + cfg.v_gap;
            column_width = column_width.max(s.width);
        }
        column_x += column_width + cfg.col_gap;
    }
    Ok(specs
        .iter()
        .zip(centers)
        .map(|(s, (cx, cy))| placed(s, cx, cy))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MirrorConfig {
    pub h_gap: f64,
    pub v_gap: f64,
    /// Round coordinates to this many decimals (left partners first, then
    /// mirrored, so pairs stay exact).
    pub decimals: Option<u32>,
}

impl Default for MirrorConfig {
    fn default() -> Self {
        MirrorConfig {
            h_gap: 0.1,
            v_gap: 0.1,
            decimals: None,
        }
    }
}

impl MirrorConfig {
    fn quantize(&self, v: f64) -> f64 {
        match self.decimals {
            Some(d) => {
                let scale = 10f64.powi(d as i32);
                (v * scale).round() / scale
            }
            None => v,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h_gap < 0.0 || self.v_gap < 0.0 {
            return Err(Error::config("mirror gaps must be non-negative"));
        }
        if let Some(d) = self.decimals {
            let step = 10f64.powi(-(d as i32));
            if step >= self.h_gap || step >= self.v_gap {
                return Err(Error::config(format!(
                    "rounding step {step} must be smaller than both gaps"
                )));
            }
        }
        Ok(())
    }
}

enum Item {
    Pair(usize, usize),
    Single(usize),
}

#[derive(Default)]
struct Row {
    single: Option<usize>,
    pairs: Vec<(usize, usize)>,
}

/// Pairs same-type, same-size specs and mirrors each pair about `axis`.
/// Leftover specs sit centered on the axis. Each type occupies its own band
/// of rows, bands stacked bottom-up in first-appearance order.
pub fn mirror_pair_place(specs: &[TransistorSpec], axis: f64, cfg: &MirrorConfig) -> Result<Vec<PlacedTransistor>> {
    check_specs(specs)?;
    cfg.validate()?;
    if !axis.is_finite() {
        return Err(Error::config("axis must be finite"));
    }

    let mut taken = vec![false; specs.len()];
    let mut items = Vec::new();
    for i in 0..specs.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let partner = (i + 1..specs.len()).find(|&j| {
            !taken[j]
                && specs[j].ttype == specs[i].ttype
                && (specs[j].width - specs[i].width).abs() <= SIZE_EPS
                && (specs[j].height - specs[i].height).abs() <= SIZE_EPS
        });
        match partner {
            Some(j) => {
                taken[j] = true;
                items.push(Item::Pair(i, j));
            }
            None => items.push(Item::Single(i)),
        }
    }

    let total_area: f64 = specs.iter().map(|s| s.width * s.height).sum();
    let widest_pair = items
        .iter()
        .map(|it| match it {
            Item::Pair(i, _) => specs[*i].width + cfg.h_gap / 2.0,
            Item::Single(i) => specs[*i].width / 2.0,
        })
        .fold(0.0, f64::max);
    let row_half_width = (total_area.sqrt() / 2.0).max(widest_pair);

    let mut rows: Vec<Row> = Vec::new();
    for (ttype, _) in buckets_by_type(specs) {
        let of_type = |i: &usize| specs[*i].ttype == ttype;
        let mut band: Vec<Row> = Vec::new();
        for it in &items {
            if let Item::Single(i) = it {
                if of_type(i) {
                    band.push(Row {
                        single: Some(*i),
                        pairs: vec![],
                    });
                }
            }
        }
        let mut row_idx = 0;
        for it in &items {
            let Item::Pair(i, j) = it else { continue };
            if !of_type(i) {
                continue;
            }
            loop {
                if row_idx == band.len() {
                    band.push(Row::default());
                }
                let row = &band[row_idx];
                let inner = match row.single {
                    Some(s) => specs[s].width / 2.0 + cfg.h_gap,
                    None => cfg.h_gap / 2.0,
                };
                let used: f64 = row.pairs.iter().map(|(a, _)| specs[*a].width + cfg.h_gap).sum();
                if row.pairs.is_empty() || inner + used + specs[*i].width <= row_half_width {
                    band[row_idx].pairs.push((*i, *j));
                    break;
                }
                row_idx += 1;
            }
        }
        rows.extend(band);
    }

    let mut centers = vec![(0.0, 0.0); specs.len()];
    let mut cursor = 0.0;
    for row in &rows {
        let members = row.single.into_iter().chain(row.pairs.iter().map(|(a, _)| *a));
        let row_height = members.map(|i| specs[i].height).fold(0.0, f64::max);
        let cy = cfg.quantize(cursor + row_height / 2.0);
        cursor += row_height + cfg.v_gap;

        let mut inner = match row.single {
            Some(s) => {
                centers[s] = (axis, cy);
                specs[s].width / 2.0 + cfg.h_gap
            }
            None => cfg.h_gap / 2.0,
        };
        for &(a, b) in &row.pairs {
            let w = specs[a].width;
            let left = cfg.quantize(axis - inner - w / 2.0);
            let right = cfg.quantize(2.0 * axis - left);
            centers[a] = (left, cy);
            centers[b] = (right, cy);
            inner = axis - (left - w / 2.0) + cfg.h_gap;
        }
    }

    Ok(specs
        .iter()
        .zip(centers)
        .map(|(s, (cx, cy))| placed(s, cx, cy))
        .collect())
}
