//! DRC-lite scoring of placed layouts and dataset-level accuracies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::PlacedTransistor;
use crate::geometry::{bounding_box, gap_distance, overlap_area, PlacedRect};

/// Overlap areas at or below this are treated as touching.
pub const OVERLAP_EPS: f64 = 1e-9;
/// Size tolerance when deciding whether two rects can be mirror partners.
pub const SIZE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rules {
    pub min_spacing: f64,
    pub axis: Option<f64>,
    pub symmetry_eps: f64,
    /// Same-type rects closer than this belong to one cluster.
    pub group_distance: f64,
    pub min_width: Option<f64>,
    pub min_area: Option<f64>,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            min_spacing: 0.0,
            axis: None,
            symmetry_eps: 1e-6,
            group_distance: 1.0,
            min_width: None,
            min_area: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Legal,
    Illegal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub overlap_total: f64,
    pub overlap_free: bool,
    pub symmetry: f64,
    pub axis_used: f64,
    pub bbox_area: f64,
    pub compactness: f64,
    pub grouping: f64,
    pub spacing_violations: usize,
    pub width_violations: usize,
    pub area_violations: usize,
    pub verdict: Verdict,
}

fn canonical_order(ps: &[PlacedTransistor]) -> Vec<&PlacedTransistor> {
    let mut v: Vec<&PlacedTransistor> = ps.iter().collect();
    v.sort_by(|a, b| {
        a.ttype
            .cmp(&b.ttype)
            .then(a.width.total_cmp(&b.width))
            .then(a.height.total_cmp(&b.height))
            .then(a.cx.total_cmp(&b.cx))
            .then(a.cy.total_cmp(&b.cy))
            .then(a.id.cmp(&b.id))
    });
    v
}

fn same_shape(a: &PlacedTransistor, b: &PlacedTransistor) -> bool {
    a.ttype == b.ttype && (a.width - b.width).abs() <= SIZE_EPS && (a.height - b.height).abs() <= SIZE_EPS
}

/// Fraction of rects that are either on the axis or matched with a mirror
/// partner of the same type and size. Empty input scores 1.0.
pub fn symmetry_score(placements: &[PlacedTransistor], axis: f64, eps: f64) -> f64 {
    if placements.is_empty() {
        return 1.0;
    }
    let ps = canonical_order(placements);
    let mut matched = vec![false; ps.len()];
    let mut count = 0usize;
    for i in 0..ps.len() {
        if matched[i] {
            continue;
        }
        let a = ps[i];
        if (a.cx - axis).abs() <= eps {
            matched[i] = true;
            count += 1;
            continue;
        }
        let partner = (0..ps.len()).find(|&j| {
            j != i
                && !matched[j]
                && same_shape(a, ps[j])
                && (2.0 * axis - ps[j].cx - a.cx).abs() <= eps
                && (ps[j].cy - a.cy).abs() <= eps
        });
        if let Some(j) = partner {
            matched[i] = true;
            matched[j] = true;
            count += 2;
        }
    }
    count as f64 / ps.len() as f64
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// `1 − (clusters − types)/(n − types)`, clamped to [0, 1].
pub fn grouping_score(placements: &[PlacedTransistor], group_distance: f64) -> f64 {
    let n = placements.len();
    let rects: Vec<PlacedRect> = placements.iter().map(PlacedTransistor::rect).collect();
    let mut dsu = Dsu((0..n).collect());
    for i in 0..n {
        for j in i + 1..n {
            if placements[i].ttype == placements[j].ttype && gap_distance(&rects[i], &rects[j]) <= group_distance {
                dsu.union(i, j);
            }
        }
    }
    let clusters = (0..n).filter(|&i| dsu.find(i) == i).count();
    let mut types: Vec<&str> = placements.iter().map(|p| p.ttype.as_str()).collect();
    types.sort_unstable();
    types.dedup();
    let t = types.len();
    if n <= t {
        return 1.0;
    }
    (1.0 - (clusters - t) as f64 / (n - t) as f64).clamp(0.0, 1.0)
}

pub fn score_layout(placements: &[PlacedTransistor], rules: &Rules) -> Result<ScoreReport> {
    if placements.is_empty() {
        return Err(Error::EmptyLayout);
    }
    let rects: Vec<PlacedRect> = placements
        .iter()
        .map(|p| {
            let r = p.rect();
            r.validate().map(|_| r)
        })
        .collect::<Result<_>>()?;
    let bbox = bounding_box(&rects)?;

    let mut overlap_total = 0.0;
    let mut spacing_violations = 0;
    for i in 0..rects.len() {
        for j in i + 1..rects.len() {
            overlap_total += overlap_area(&rects[i], &rects[j]);
            if rules.min_spacing > 0.0 && gap_distance(&rects[i], &rects[j]) < rules.min_spacing {
                spacing_violations += 1;
            }
        }
    }
    let overlap_free = overlap_total <= OVERLAP_EPS;
    if overlap_free {
        overlap_total = 0.0;
    }
    let width_violations = rules
        .min_width
        .map_or(0, |m| rects.iter().filter(|r| r.width.min(r.height) < m).count());
    let area_violations = rules
        .min_area
        .map_or(0, |m| rects.iter().filter(|r| r.area() < m).count());

    let axis_used = rules.axis.unwrap_or((bbox.min_x + bbox.max_x) / 2.0);
    let bbox_area = bbox.area();
    let area_sum: f64 = rects.iter().map(PlacedRect::area).sum();
    let compactness = (area_sum / bbox_area).min(1.0);
    let legal = overlap_free && spacing_violations == 0 && width_violations == 0 && area_violations == 0;

    Ok(ScoreReport {
        overlap_total,
        overlap_free,
        symmetry: symmetry_score(placements, axis_used, rules.symmetry_eps),
        axis_used,
        bbox_area,
        compactness,
        grouping: grouping_score(placements, rules.group_distance),
        spacing_violations,
        width_violations,
        area_violations,
        verdict: if legal { Verdict::Legal } else { Verdict::Illegal },
    })
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Fraction of predictions equal to their gold string, ignoring case and
/// all whitespace.
pub fn exact_match_accuracy<P: AsRef<str>, G: AsRef<str>>(predictions: &[P], golds: &[G]) -> Result<f64> {
    if predictions.len() != golds.len() {
        return Err(Error::config(format!(
            "{} predictions but {} golds",
            predictions.len(),
            golds.len()
        )));
    }
    if golds.is_empty() {
        return Err(Error::config("no predictions to score"));
    }
    let hits = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| normalize(p.as_ref()) == normalize(g.as_ref()))
        .count();
    Ok(hits as f64 / golds.len() as f64)
}

pub fn non_overlap_accuracy(reports: &[ScoreReport]) -> Result<f64> {
    if reports.is_empty() {
        return Err(Error::config("no reports to summarize"));
    }
    Ok(reports.iter().filter(|r| r.overlap_free).count() as f64 / reports.len() as f64)
}

/// Aggregate over a batch of reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub count: usize,
    pub non_overlap_accuracy: f64,
    pub legal_fraction: f64,
    pub mean_symmetry: f64,
    pub mean_compactness: f64,
    pub mean_grouping: f64,
}

pub fn summarize(reports: &[ScoreReport]) -> Result<ScoreSummary> {
    let n = reports.len() as f64;
    let mean = |f: fn(&ScoreReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Ok(ScoreSummary {
        count: reports.len(),
        non_overlap_accuracy: non_overlap_accuracy(reports)?,
        legal_fraction: reports.iter().filter(|r| r.verdict == Verdict::Legal).count() as f64 / n,
        mean_symmetry: mean(|r| r.symmetry),
        mean_compactness: mean(|r| r.compactness),
        mean_grouping: mean(|r| r.grouping),
    })
}
