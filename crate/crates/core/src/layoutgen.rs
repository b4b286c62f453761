//! Ground-truth layout datasets.
//!
//! * v1: unit-square groups on an integer grid, written as sb-records.
//! * v2: integer-sized transistors placed row by row, consumed one step at a
//!   time (see [`episode`]).
//! * v3: continuous two-decimal sizes, placed all at once; a configurable
//!   fraction of samples is deliberately made asymmetric.
//!
//! Every generator builds the left half and mirrors it, so zero overlap and
//! (for symmetric samples) exact mirror symmetry hold by construction.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::baseline::{mirror_pair_place, MirrorConfig};
use crate::error::{Error, Result};
use crate::geometry::{bounding_box, overlap_area, rect_from_grid, PlacedRect};
use crate::promptio::SbRecord;
use crate::rng::{self, round2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransistorSpec {
    pub id: String,
    #[serde(rename = "type")]
    pub ttype: String,
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Version {
    V1,
    V2,
    V3,
}

/// How an asymmetric v3 sample was perturbed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// One mirror partner was pushed outward.
    Jitter,
    /// An extra component without a partner was added.
    Unpaired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutSample {
    pub version: Version,
    pub seed: u64,
    pub axis: f64,
    pub symmetric: bool,
    pub specs: Vec<TransistorSpec>,
    pub placements: Vec<PlacedRect>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<(u32, u32)>,
    /// v1 only: the grid records the placements were derived from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<SbRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

impl LayoutSample {
    pub fn placed(&self) -> Vec<crate::extract::PlacedTransistor> {
        self.specs
            .iter()
            .zip(&self.placements)
            .map(|(s, r)| crate::extract::PlacedTransistor {
                id: s.id.clone(),
                ttype: s.ttype.clone(),
                width: s.width,
                height: s.height,
                cx: r.cx,
                cy: r.cy,
            })
            .collect()
    }
}

// ---------------------------------------------------------------- v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V1Config {
    pub grid: (u32, u32),
    pub n_groups: usize,
    /// Largest number of unit squares in one group.
    pub max_m: u32,
    pub max_attempts: u32,
}

impl Default for V1Config {
    fn default() -> Self {
        V1Config {
            grid: (20, 20),
            n_groups: 6,
            max_m: 4,
            max_attempts: 32,
        }
    }
}

impl V1Config {
    fn validate(&self) -> Result<()> {
        let (w, h) = self.grid;
        if w < 8 || h < 8 {
            return Err(Error::config(format!("grid {w}x{h} is smaller than 8x8")));
        }
        if self.n_groups < 2 {
            return Err(Error::config("v1 needs at least 2 groups"));
        }
        if self.max_m < 1 || self.max_m > w / 2 || self.max_m > h {
            return Err(Error::config(format!(
                "max_m {} must lie in 1..={}",
                self.max_m,
                (w / 2).min(h)
            )));
        }
        if self.n_groups % 2 == 1 && w % 2 == 0 && self.max_m < 2 {
            return Err(Error::config(
                "an odd group count on an even-width grid needs max_m >= 2 for the centered group",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct GridGroup {
    ttype: &'static str,
    m: u32,
    rotated: bool,
}

impl GridGroup {
    fn extent(&self) -> (u32, u32) {
        if self.rotated {
            (1, self.m)
        } else {
            (self.m, 1)
        }
    }
}

fn random_type(rng: &mut rng::Rng) -> &'static str {
    if rng.gen_bool(0.5) {
        "P"
    } else {
        "N"
    }
}

pub fn gen_v1(cfg: &V1Config, seed: u64) -> Result<LayoutSample> {
    cfg.validate()?;
    let mut rng = rng::seeded(seed);
    for _ in 0..cfg.max_attempts {
        if let Some(sample) = try_v1(cfg, seed, &mut rng) {
            return Ok(sample);
        }
    }
    Err(Error::GenerationExhausted {
        seed,
        attempts: cfg.max_attempts,
    })
}

fn try_v1(cfg: &V1Config, seed: u64, rng: &mut rng::Rng) -> Option<LayoutSample> {
    let (gw, gh) = cfg.grid;
    let half = gw / 2;
    let n_pairs = cfg.n_groups / 2;

    let pairs: Vec<GridGroup> = (0..n_pairs)
        .map(|_| GridGroup {
            ttype: random_type(rng),
            m: rng.gen_range(1..=cfg.max_m),
            rotated: rng.gen_bool(0.5),
        })
        .collect();
    let centered = (cfg.n_groups % 2 == 1).then(|| {
        let rotated = gw % 2 == 1 && rng.gen_bool(0.5);
        let m = if rotated {
            rng.gen_range(1..=cfg.max_m)
        } else {
            // Horizontal groups straddle the centerline only when m and the
            // grid width share parity.
            let choices: Vec<u32> = (1..=cfg.max_m.min(gw)).filter(|m| m % 2 == gw % 2).collect();
            *choices.choose(rng).expect("validated: a centered length exists")
        };
        GridGroup {
            ttype: random_type(rng),
            m,
            rotated,
        }
    });

    // Shelf-pack the left half in random order.
    let mut order: Vec<usize> = (0..n_pairs).collect();
    order.shuffle(rng);
    let mut origin = vec![(0u32, 0u32); n_pairs];
    let (mut shelf_y, mut shelf_h, mut cursor_x) = (0u32, 0u32, 0u32);
    for &k in &order {
        let (w, h) = pairs[k].extent();
        let mut x = cursor_x + rng.gen_range(0..=1);
        if x + w > half {
            shelf_y += shelf_h + rng.gen_range(0..=1);
            shelf_h = 0;
            x = if w < half { rng.gen_range(0..=1) } else { 0 };
        }
        origin[k] = (x, shelf_y);
        cursor_x = x + w;
        shelf_h = shelf_h.max(h);
    }
    let mut used_h = if n_pairs > 0 { shelf_y + shelf_h } else { 0 };

    let mut centered_origin = None;
    if let Some(c) = &centered {
        let (w, h) = c.extent();
        let x = (gw - w) / 2;
        if rng.gen_bool(0.5) || n_pairs == 0 {
            let y = if n_pairs == 0 { 0 } else { used_h + rng.gen_range(0..=1) };
            centered_origin = Some((x, y));
            used_h = y + h;
        } else {
            // Centered group first; shift the shelves below it.
            let shift = h + rng.gen_range(0..=1);
            for o in &mut origin {
                o.1 += shift;
            }
            centered_origin = Some((x, 0));
            used_h += shift;
        }
    }
    if used_h > gh {
        return None;
    }
    let dy = rng.gen_range(0..=gh - used_h);

    // Emission order: left member, then its mirror; the centered group is
    // slotted in at a random pair boundary.
    let centered_slot = rng.gen_range(0..=n_pairs);
    let mut emitted: Vec<(&GridGroup, u32, u32)> = Vec::with_capacity(cfg.n_groups);
    for k in 0..=n_pairs {
        if k == centered_slot {
            if let (Some(c), Some((x, y))) = (&centered, centered_origin) {
                emitted.push((c, x, y + dy));
            }
        }
        if k < n_pairs {
            let g = &pairs[k];
            let (x, y) = origin[k];
            let (w, _) = g.extent();
            emitted.push((g, x, y + dy));
            emitted.push((g, gw - x - w, y + dy));
        }
    }

    let mut records = Vec::with_capacity(emitted.len());
    let mut specs = Vec::with_capacity(emitted.len());
    let mut placements = Vec::with_capacity(emitted.len());
    for (i, (g, x, y)) in emitted.into_iter().enumerate() {
        let rec = SbRecord {
            index: i as u32 + 1,
            ttype: g.ttype.to_string(),
            x: i64::from(x),
            y: i64::from(y),
            m: g.m,
            rotated: g.rotated,
        };
        let rect = rect_from_grid(rec.x, rec.y, rec.m, rec.rotated).ok()?;
        specs.push(TransistorSpec {
            id: format!("sb{}", rec.index),
            ttype: rec.ttype.clone(),
            width: rect.width,
            height: rect.height,
        });
        placements.push(rect);
        records.push(rec);
    }

    Some(LayoutSample {
        version: Version::V1,
        seed,
        axis: f64::from(gw) / 2.0,
        symmetric: true,
        specs,
        placements,
        grid: Some(cfg.grid),
        records: Some(records),
        perturbation: None,
    })
}

// ---------------------------------------------------------------- v2

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V2Config {
    pub n_pairs: usize,
    /// Inclusive integer width bounds.
    pub width_range: (u32, u32),
    /// Inclusive integer height bounds.
    pub height_range: (u32, u32),
    pub axis: f64,
    pub max_pairs_per_row: usize,
}

impl Default for V2Config {
    fn default() -> Self {
        V2Config {
            n_pairs: 4,
            width_range: (2, 9),
            height_range: (1, 2),
            axis: 10.0,
            max_pairs_per_row: 2,
        }
    }
}

impl V2Config {
    fn validate(&self) -> Result<()> {
        if self.n_pairs < 1 {
            return Err(Error::config("v2 needs at least one pair"));
        }
        for (name, (lo, hi)) in [("width_range", self.width_range), ("height_range", self.height_range)] {
            if lo < 1 || lo > hi {
                return Err(Error::config(format!("{name} {lo}..={hi} is empty")));
            }
        }
        if self.max_pairs_per_row < 1 {
            return Err(Error::config("max_pairs_per_row must be at least 1"));
        }
        if !self.axis.is_finite() || self.axis.fract() != 0.0 {
            return Err(Error::config("v2 axis must be an integer coordinate"));
        }
        Ok(())
    }
}

pub fn gen_v2(cfg: &V2Config, seed: u64) -> Result<LayoutSample> {
    cfg.validate()?;
    let mut rng = rng::seeded(seed);
    let axis = cfg.axis;

    let mut pairs: Vec<(&'static str, u32, u32)> = (0..cfg.n_pairs)
        .map(|_| {
            (
                random_type(&mut rng),
                rng.gen_range(cfg.width_range.0..=cfg.width_range.1),
                rng.gen_range(cfg.height_range.0..=cfg.height_range.1),
            )
        })
        .collect();
    // P pairs come first and sit in the upper rows.
    pairs.sort_by_key(|p| p.0 != "P");

    // Split into rows, never mixing types within a row.
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (i, p) in pairs.iter().enumerate() {
        let fits = rows
            .last()
            .is_some_and(|r: &Vec<usize>| r.len() < cfg.max_pairs_per_row && pairs[r[0]].0 == p.0 && rng.gen_bool(0.5));
        if fits {
            rows.last_mut().unwrap().push(i);
        } else {
            rows.push(vec![i]);
        }
    }

    // Rows are stacked bottom-up starting from the last (N) row.
    let row_h = |r: &Vec<usize>| r.iter().map(|&i| pairs[i].2).max().unwrap_or(1);
    let mut row_cy = vec![0.0; rows.len()];
    let mut cy = (f64::from(row_h(&rows[rows.len() - 1])) / 2.0).ceil() + f64::from(rng.gen_range(0..=8u32));
    for (k, r) in rows.iter().enumerate().rev() {
        if k + 1 < rows.len() {
            let below = row_h(&rows[k + 1]);
            let pitch = (f64::from(below + row_h(r)) / 2.0).ceil() + f64::from(rng.gen_range(0..=1u32));
            cy += pitch;
        }
        row_cy[k] = cy;
    }

    let mut centers = vec![(0.0, 0.0); pairs.len()];
    for (k, r) in rows.iter().enumerate() {
        // Innermost pair's left member ends at or before the axis.
        let mut edge = axis;
        for &i in r {
            let w = f64::from(pairs[i].1);
            let cx = (edge - w / 2.0).floor() - f64::from(rng.gen_range(0..=1u32));
            centers[i] = (cx, row_cy[k]);
            edge = cx - w / 2.0;
        }
    }

    let mut specs = Vec::with_capacity(2 * pairs.len());
    let mut placements = Vec::with_capacity(2 * pairs.len());
    for (i, (t, w, h)) in pairs.iter().enumerate() {
        let (cx, cy) = centers[i];
        let left = PlacedRect::new(cx, cy, f64::from(*w), f64::from(*h))?;
        for rect in [left, crate::geometry::mirror_x(&left, axis)] {
            specs.push(TransistorSpec {
                id: format!("sb{}", specs.len() + 1),
                ttype: t.to_string(),
                width: rect.width,
                height: rect.height,
            });
            placements.push(rect);
        }
    }

    Ok(LayoutSample {
        version: Version::V2,
        seed,
        axis,
        symmetric: true,
        specs,
        placements,
        grid: None,
        records: None,
        perturbation: None,
    })
}

/// One step of a sequential placement episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStep {
    pub step: usize,
    pub placed: Vec<(TransistorSpec, PlacedRect)>,
    pub next: TransistorSpec,
    pub answer: (f64, f64),
}

pub fn episode(sample: &LayoutSample) -> Vec<EpisodeStep> {
    (0..sample.specs.len())
        .map(|t| EpisodeStep {
            step: t,
            placed: sample.specs[..t]
                .iter()
                .cloned()
                .zip(sample.placements[..t].iter().copied())
                .collect(),
            next: sample.specs[t].clone(),
            answer: (sample.placements[t].cx, sample.placements[t].cy),
        })
        .collect()
}

// ---------------------------------------------------------------- v3

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct V3Config {
    pub n_transistors: usize,
    pub type_pool: Vec<String>,
    pub width_range: (f64, f64),
    pub height_range: (f64, f64),
    pub asym_prob: f64,
    pub axis: f64,
    pub h_gap: f64,
    pub v_gap: f64,
}

impl Default for V3Config {
    fn default() -> Self {
        V3Config {
            n_transistors: 8,
            type_pool: vec!["P".into(), "N".into()],
            width_range: (0.4, 4.5),
            height_range: (0.5, 8.5),
            asym_prob: 0.2,
            axis: 10.0,
            h_gap: 0.1,
            v_gap: 0.1,
        }
    }
}

impl V3Config {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.asym_prob) {
            return Err(Error::config("asym_prob must lie in [0, 1]"));
        }
        if self.n_transistors < 1 {
            return Err(Error::config("v3 needs at least one transistor"));
        }
        if self.type_pool.is_empty() {
            return Err(Error::config("type_pool must not be empty"));
        }
        for (name, (lo, hi)) in [("width_range", self.width_range), ("height_range", self.height_range)] {
            if !(lo >= 0.01 && lo <= hi && hi.is_finite()) {
                return Err(Error::config(format!("{name} {lo}..{hi} is invalid")));
            }
        }
        Ok(())
    }
}

fn size2(rng: &mut rng::Rng, (lo, hi): (f64, f64)) -> f64 {
    round2(rng.gen_range(lo..=hi)).max(0.01)
}

pub fn gen_v3(cfg: &V3Config, seed: u64) -> Result<LayoutSample> {
    cfg.validate()?;
    let mut rng = rng::seeded(seed);
    let pick_type = |rng: &mut rng::Rng| cfg.type_pool[rng.gen_range(0..cfg.type_pool.len())].clone();

    let mut specs = Vec::with_capacity(cfg.n_transistors + 1);
    for _ in 0..cfg.n_transistors / 2 {
        let (t, w, h) = (
            pick_type(&mut rng),
            size2(&mut rng, cfg.width_range),
            size2(&mut rng, cfg.height_range),
        );
        for _ in 0..2 {
            specs.push(TransistorSpec {
                id: format!("sb{}", specs.len()),
                ttype: t.clone(),
                width: w,
                height: h,
            });
        }
    }
    if cfg.n_transistors % 2 == 1 {
        specs.push(TransistorSpec {
            id: format!("sb{}", specs.len()),
            ttype: pick_type(&mut rng),
            width: size2(&mut rng, cfg.width_range),
            height: size2(&mut rng, cfg.height_range),
        });
    }
    specs.shuffle(&mut rng);

    let mirror_cfg = MirrorConfig {
        h_gap: cfg.h_gap,
        v_gap: cfg.v_gap,
        decimals: Some(2),
    };
    let mut placements: Vec<PlacedRect> = mirror_pair_place(&specs, cfg.axis, &mirror_cfg)?
        .iter()
        .map(|p| p.rect())
        .collect();

    let mut perturbation = None;
    if rng.gen_bool(cfg.asym_prob) {
        let candidates = outermost_right(&placements, cfg.axis);
        let kind = if candidates.is_empty() || rng.gen_bool(0.5) {
            Perturbation::Unpaired
        } else {
            Perturbation::Jitter
        };
        match kind {
            Perturbation::Jitter => {
                let i = candidates[rng.gen_range(0..candidates.len())];
                let shift = round2(rng.gen_range(0.2..=1.0));
                placements[i].cx = round2(placements[i].cx + shift);
            }
            Perturbation::Unpaired => {
                let bb = bounding_box(&placements)?;
                let (w, h) = (size2(&mut rng, cfg.width_range), size2(&mut rng, cfg.height_range));
                let offset = round2(rng.gen_range(0.5..=2.0));
                let rect = PlacedRect::new(
                    round2(cfg.axis + w / 2.0 + offset),
                    round2(bb.max_y + cfg.v_gap + h / 2.0 + 0.01),
                    w,
                    h,
                )?;
                let at = rng.gen_range(0..=specs.len());
                specs.insert(
                    at,
                    TransistorSpec {
                        id: format!("sb{}", cfg.n_transistors),
                        ttype: pick_type(&mut rng),
                        width: w,
                        height: h,
                    },
                );
                placements.insert(at, rect);
            }
        }
        perturbation = Some(kind);
    }

    Ok(LayoutSample {
        version: Version::V3,
        seed,
        axis: cfg.axis,
        symmetric: perturbation.is_none(),
        specs,
        placements,
        grid: None,
        records: None,
        perturbation,
    })
}

/// Right-of-axis rectangles with nothing further right in their row band.
fn outermost_right(placements: &[PlacedRect], axis: f64) -> Vec<usize> {
    (0..placements.len())
        .filter(|&i| {
            let r = &placements[i];
            r.cx > axis + 1e-9
                && !placements
                    .iter()
                    .enumerate()
                    .any(|(j, o)| j != i && o.min_y() < r.max_y() && o.max_y() > r.min_y() && o.max_x() > r.max_x())
        })
        .collect()
}

// ---------------------------------------------------------- masking/splits

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedLayoutRecord {
    /// Rendered sb-records of every group except the masked one.
    pub fixed: Vec<String>,
    /// Position in `fixed` where the MASK placeholder is shown; `None`
    /// omits the placeholder.
    pub mask_index: Option<usize>,
    /// Type and square count of the masked group.
    pub hint: (String, u32),
    pub answer: String,
    #[serde(default)]
    pub sample_seed: u64,
}

pub fn mask_placement(s: &LayoutSample, seed: u64) -> Result<MaskedLayoutRecord> {
    let records = s
        .records
        .as_ref()
        .ok_or_else(|| Error::config("layout masking needs a v1 sample with grid records"))?;
    if records.len() < 2 {
        return Err(Error::config("layout masking needs at least 2 groups"));
    }
    let mut rng = rng::seeded(seed);
    let k = rng.gen_range(0..records.len());
    let masked = &records[k];
    Ok(MaskedLayoutRecord {
        fixed: records
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, r)| r.to_string())
            .collect(),
        mask_index: Some(k),
        hint: (masked.ttype.clone(), masked.m),
        answer: masked.to_string(),
        sample_seed: s.seed,
    })
}

/// Deterministic shuffled partition into train/validation/test.
pub fn split_dataset<T>(samples: Vec<T>, ratios: (f64, f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let (a, b, c) = ratios;
    if [a, b, c].iter().any(|r| !(0.0..=1.0).contains(r)) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!(
            "split ratios {a}/{b}/{c} must be in [0,1] and sum to 1"
        )));
    }
    let n = samples.len();
    let n_train = ((n as f64) * a).round() as usize;
    let n_val = (((n as f64) * b).round() as usize).min(n - n_train.min(n));
    let n_train = n_train.min(n);

    let mut samples = samples;
    samples.shuffle(&mut rng::seeded(seed));
    let test = samples.split_off(n_train + n_val);
    let val = samples.split_off(n_train);
    Ok((samples, val, test))
}

/// Overlap between a candidate rectangle and a set of fixed ones.
pub fn overlap_with(candidate: &PlacedRect, fixed: &[PlacedRect]) -> f64 {
    fixed.iter().map(|f| overlap_area(candidate, f)).sum()
}
