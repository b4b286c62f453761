//! Prompt rendering and the sb-record grammar.
//!
//! An sb-record is `sb{index}({T}, ({x}, {y}), {m}, {True|False})`. The
//! parser tolerates extra whitespace and surrounding quotes; the renderer
//! always emits the canonical single-space form.
//!
//! Prompt wording lives in `assets/templates/`. Renderers substitute
//! `@@NAME@@` markers and nothing else.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layoutgen::{EpisodeStep, LayoutSample, MaskedLayoutRecord, TransistorSpec};

/// Bumped whenever any template asset changes bytes.
pub const TEMPLATE_VERSION: u32 = 1;

const GRID_SEQUENCE: &str = include_str!("../assets/templates/grid_sequence.txt");
const CENTERPOINT_SEQUENCE: &str = include_str!("../assets/templates/centerpoint_sequence.txt");
const ALL_AT_ONCE: &str = include_str!("../assets/templates/all_at_once.txt");

pub(crate) fn template(raw: &'static str) -> &'static str {
    raw.strip_suffix('\n').unwrap_or(raw)
}

pub const MASK_SLOT: &str = "MASK";
pub const ARROW: &str = "\u{2192}";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SbRecord {
    pub index: u32,
    #[serde(rename = "type")]
    pub ttype: String,
    pub x: i64,
    pub y: i64,
    pub m: u32,
    pub rotated: bool,
}

impl fmt::Display for SbRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sb{}({}, ({}, {}), {}, {})",
            self.index,
            self.ttype,
            self.x,
            self.y,
            self.m,
            if self.rotated { "True" } else { "False" }
        )
    }
}

pub fn render_sb(rec: &SbRecord) -> String {
    rec.to_string()
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            record: 0,
            offset: self.pos,
            message: message.into(),
        }
    }

    fn ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, lit: &str) -> Result<()> {
        self.ws();
        if self.src[self.pos..].starts_with(lit) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn span(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = &self.src[self.pos..];
        let n = rest.find(|c: char| !f(c)).unwrap_or(rest.len());
        self.pos += n;
        &rest[..n]
    }

    fn int(&mut self) -> Result<i64> {
        self.ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        self.span(|c| c.is_ascii_digit());
        self.src[start..self.pos].parse().map_err(|_| {
            self.pos = start;
            self.err("expected integer")
        })
    }

    fn uint(&mut self) -> Result<u32> {
        self.ws();
        let start = self.pos;
        self.span(|c| c.is_ascii_digit()).parse().map_err(|_| {
            self.pos = start;
            self.err("expected unsigned integer")
        })
    }
}

/// Parses one sb-record, optionally wrapped in whitespace and matching quotes.
pub fn parse_sb(text: &str) -> Result<SbRecord> {
    let mut s = Scanner { src: text, pos: 0 };
    s.ws();
    let quote = match s.peek() {
        Some(q @ ('\'' | '"')) => {
            s.pos += 1;
            Some(q)
        }
        _ => None,
    };
    let rec = parse_sb_body(&mut s)?;
    s.ws();
    if let Some(q) = quote {
        s.eat(&q.to_string())?;
        s.ws();
    }
    if s.pos != text.len() {
        return Err(s.err("unexpected trailing input"));
    }
    Ok(rec)
}

fn parse_sb_body(s: &mut Scanner<'_>) -> Result<SbRecord> {
    s.eat("sb")?;
    let index = s.uint()?;
    s.eat("(")?;
    s.ws();
    let start = s.pos;
    let ttype = s.span(|c| c.is_ascii_alphanumeric() || c == '_');
    if ttype.is_empty() || !ttype.starts_with(|c: char| c.is_ascii_alphabetic()) {
        s.pos = start;
        return Err(s.err("expected transistor type"));
    }
    s.eat(",")?;
    s.eat("(")?;
    let x = s.int()?;
    s.eat(",")?;
    let y = s.int()?;
    s.eat(")")?;
    s.eat(",")?;
    let m = s.uint()?;
    if m < 1 {
        return Err(s.err("replication must be at least 1"));
    }
    s.eat(",")?;
    s.ws();
    let start = s.pos;
    let flag = s.span(|c| c.is_ascii_alphabetic());
    let rotated = match flag.to_ascii_lowercase().as_str() {
        "true" => true,
        "false" => false,
        _ => {
            s.pos = start;
            return Err(s.err("expected True or False"));
        }
    };
    s.eat(")")?;
    Ok(SbRecord {
        index,
        ttype: ttype.to_string(),
        x,
        y,
        m,
        rotated,
    })
}

/// A rendered prompt and the completion a model should produce for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptPair {
    pub prompt: String,
    pub answer: String,
}

impl PromptPair {
    /// Prompt followed by its answer, the form used for fine-tuning text.
    pub fn full_text(&self) -> String {
        format!("{}{}", self.prompt, self.answer)
    }
}

fn quoted_list<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    items
        .into_iter()
        .map(|i| format!("'{i}'"))
        .collect::<Vec<_>>()
        .join(", ")
}

// ------------------------------------------------------------ masking

/// Renders a masked-layout record:
///
/// ```text
/// fixed components: ['sb1(P, (0, 16), 4, False)', MASK , 'sb3(N, (4, 16), 3, False)'],
///
/// next component:'P','4', 'sb2(P, (16, 16), 4, False)'
/// ```
pub fn render_prompt_masking(rec: &MaskedLayoutRecord) -> PromptPair {
    let mut items: Vec<String> = rec.fixed.iter().map(|r| format!("'{r}'")).collect();
    if let Some(k) = rec.mask_index {
        items.insert(k.min(items.len()), format!("{MASK_SLOT} "));
    }
    PromptPair {
        prompt: format!(
            "fixed components: [{}],\n\nnext component:'{}','{}', ",
            items.join(", "),
            rec.hint.0,
            rec.hint.1
        ),
        answer: format!("'{}'", rec.answer),
    }
}

/// Inverse of [`render_prompt_masking`] applied to the full text.
pub fn parse_prompt_masking(text: &str) -> Result<MaskedLayoutRecord> {
    let perr = |offset: usize, message: &str| Error::Parse {
        record: 0,
        offset,
        message: message.to_string(),
    };
    let head = "fixed components: [";
    let body = text
        .strip_prefix(head)
        .ok_or_else(|| perr(0, "expected `fixed components: [`"))?;
    let close = body
        .find("],\n\nnext component:")
        .ok_or_else(|| perr(head.len(), "unterminated fixed list"))?;
    let list = &body[..close];

    let mut fixed = Vec::new();
    let mut mask_index = None;
    let mut rest = list.trim_start();
    while !rest.is_empty() {
        let at = head.len() + list.len() - rest.len();
        if let Some(after) = rest.strip_prefix(MASK_SLOT) {
            if mask_index.is_some() {
                return Err(perr(at, "more than one MASK slot"));
            }
            mask_index = Some(fixed.len());
            rest = after;
        } else if let Some(body) = rest.strip_prefix('\'') {
            let end = body.find('\'').ok_or_else(|| perr(at, "unterminated record"))?;
            fixed.push(parse_sb(&body[..end])?.to_string());
            rest = &body[end + 1..];
        } else {
            return Err(perr(at, "expected a quoted record or MASK"));
        }
        rest = rest.trim_start();
        rest = rest.strip_prefix(',').unwrap_or(rest).trim_start();
    }

    let tail_start = head.len() + close + "],\n\nnext component:".len();
    let tail = &text[tail_start..];
    let parts: Vec<&str> = tail.splitn(3, ',').collect();
    if parts.len() != 3 {
        return Err(perr(tail_start, "expected `'T','m', 'record'`"));
    }
    let unq = |s: &str| s.trim().trim_matches('\'').to_string();
    let m: u32 = unq(parts[1])
        .parse()
        .map_err(|_| perr(tail_start, "hint size is not an integer"))?;
    let answer = parse_sb(parts[2])?.to_string();
    Ok(MaskedLayoutRecord {
        fixed,
        mask_index,
        hint: (unq(parts[0]), m),
        answer,
        sample_seed: 0,
    })
}

// ------------------------------------------------------------ v1

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridPromptConfig {
    pub n_examples: usize,
    /// Group count quoted in the task description.
    pub approx_groups: usize,
}

impl Default for GridPromptConfig {
    fn default() -> Self {
        GridPromptConfig {
            n_examples: 3,
            approx_groups: 40,
        }
    }
}

pub fn number_word(n: usize) -> String {
    const WORDS: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn sample_records(s: &LayoutSample) -> Result<&[SbRecord]> {
    s.records
        .as_deref()
        .ok_or_else(|| Error::config(format!("sample {} has no grid records", s.seed)))
}

/// Few-shot grid prompt. The query line lists `query_prefix` and stops
/// after its last record.
pub fn render_prompt_v1(
    examples: &[LayoutSample],
    query_prefix: &[SbRecord],
    cfg: &GridPromptConfig,
) -> Result<String> {
    if examples.len() < cfg.n_examples {
        return Err(Error::config(format!(
            "{} examples configured but only {} supplied",
            cfg.n_examples,
            examples.len()
        )));
    }
    let mut blocks = String::new();
    for (k, ex) in examples[..cfg.n_examples].iter().enumerate() {
        let recs: Vec<String> = sample_records(ex)?.iter().map(ToString::to_string).collect();
        blocks.push_str(&format!(
            "****Example {} ****: \n\n[{}]\n\n",
            k + 1,
            quoted_list(recs.iter().map(String::as_str))
        ));
    }
    let query: Vec<String> = query_prefix.iter().map(ToString::to_string).collect();
    Ok(template(GRID_SEQUENCE)
        .replace("@@N_GROUPS@@", &cfg.approx_groups.to_string())
        .replace("@@N_EXAMPLES@@", &number_word(cfg.n_examples))
        .replace("@@EXAMPLES@@", &blocks)
        .replace("@@QUERY@@", &quoted_list(query.iter().map(String::as_str))))
}

/// Grid prompt for predicting record `step` of `sample` from its prefix.
pub fn grid_step_pair(
    examples: &[LayoutSample],
    sample: &LayoutSample,
    step: usize,
    cfg: &GridPromptConfig,
) -> Result<PromptPair> {
    let recs = sample_records(sample)?;
    if step == 0 || step >= recs.len() {
        return Err(Error::config(format!(
            "step {step} outside 1..{} for sample {}",
            recs.len(),
            sample.seed
        )));
    }
    Ok(PromptPair {
        prompt: render_prompt_v1(examples, &recs[..step], cfg)?,
        answer: format!("'{}'", recs[step]),
    })
}

// ------------------------------------------------------------ v2

/// Formats a coordinate or size: integers without a fractional part,
/// everything else in shortest round-trip form.
pub fn fmt_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn placed_list(step: &EpisodeStep) -> String {
    step.placed
        .iter()
        .map(|(s, r)| {
            format!(
                "{}, {}, ({},{}), {}, {}",
                s.id,
                s.ttype,
                fmt_num(r.cx),
                fmt_num(r.cy),
                fmt_num(s.width),
                fmt_num(s.height)
            )
        })
        .collect::<Vec<_>>()
        .join(", ")
}

/// `Placed transistors: [...] , Now place: [sbK, T, (?,?), w, h]→ output: `
pub fn render_step_query(step: &EpisodeStep) -> String {
    let n = &step.next;
    format!(
        "Placed transistors: [{}] , Now place: [{}, {}, (?,?), {}, {}]{ARROW} output: ",
        placed_list(step),
        n.id,
        n.ttype,
        fmt_num(n.width),
        fmt_num(n.height)
    )
}

pub fn render_step_answer(step: &EpisodeStep) -> String {
    format!("({},{})", fmt_num(step.answer.0), fmt_num(step.answer.1))
}

/// Sequential centerpoint prompt for one episode step, preceded by every
/// step of each few-shot episode.
pub fn render_prompt_v2(step: &EpisodeStep, shots: &[LayoutSample]) -> PromptPair {
    let mut blocks = String::new();
    for (k, shot) in shots.iter().enumerate() {
        blocks.push_str(&format!("**** Example {} ****\n\n", number_word(k + 1)));
        for s in crate::layoutgen::episode(shot) {
            blocks.push_str(&render_step_query(&s));
            blocks.push_str(&render_step_answer(&s));
            blocks.push_str("\n\n");
        }
    }
    PromptPair {
        prompt: template(CENTERPOINT_SEQUENCE)
            .replace("@@EXAMPLES@@", &blocks)
            .replace("@@QUERY@@", &render_step_query(step)),
        answer: render_step_answer(step),
    }
}

// ------------------------------------------------------------ v3

/// Input list in the `{"x": w, "y": h, "id": .., "type": ..}` form.
pub fn render_spec_list(specs: &[TransistorSpec]) -> String {
    let rows: Vec<String> = specs
        .iter()
        .map(|s| {
            format!(
                "  {{\"x\": {:.2}, \"y\": {:.2}, \"id\": {}, \"type\": {}}}",
                s.width,
                s.height,
                serde_json::Value::from(s.id.as_str()),
                serde_json::Value::from(s.ttype.as_str())
            )
        })
        .collect();
    format!("[\n{}\n]", rows.join(",\n"))
}

pub fn render_prompt_v3(specs: &[TransistorSpec]) -> String {
    template(ALL_AT_ONCE).replace("@@INPUT@@", &render_spec_list(specs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PlacedRect;

    fn rec(index: u32, t: &str, x: i64, y: i64, m: u32, rotated: bool) -> SbRecord {
        SbRecord {
            index,
            ttype: t.into(),
            x,
            y,
            m,
            rotated,
        }
    }

    #[test]
    fn parse_documented_records() {
        assert_eq!(parse_sb("sb1(N, (2, 3), 4, True)").unwrap(), rec(1, "N", 2, 3, 4, true));
        assert_eq!(
            parse_sb("sb3(N, (4, 16), 3, False)").unwrap(),
            rec(3, "N", 4, 16, 3, false)
        );
        assert_eq!(
            parse_sb("  'sb2(P,(16,16),4,false)' ").unwrap().to_string(),
            "sb2(P, (16, 16), 4, False)"
        );
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match parse_sb("sb1(N, (2 3), 4, True)") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("{other:?}"),
        }
        assert!(parse_sb("sb1(N, (2, 3), 4, Maybe)").is_err());
        assert!(parse_sb("sb1(N, (2, 3), 0, True)").is_err());
        assert!(parse_sb("'sb1(N, (2, 3), 4, True)").is_err());
        assert!(parse_sb("sb1(N, (2, 3), 4, True) x").is_err());
    }

    fn sample_record() -> MaskedLayoutRecord {
        MaskedLayoutRecord {
            fixed: vec!["sb1(P, (0, 16), 4, False)".into(), "sb3(N, (4, 16), 3, False)".into()],
            mask_index: Some(1),
            hint: ("P".into(), 4),
            answer: "sb2(P, (16, 16), 4, False)".into(),
            sample_seed: 0,
        }
    }

    #[test]
    fn masking_prompt_shape() {
        let pair = render_prompt_masking(&sample_record());
        assert!(pair
            .prompt
            .starts_with("fixed components: ['sb1(P, (0, 16), 4, False)', MASK ,"));
        assert_eq!(
            pair.full_text(),
            "fixed components: ['sb1(P, (0, 16), 4, False)', MASK , 'sb3(N, (4, 16), 3, False)'],\n\n\
             next component:'P','4', 'sb2(P, (16, 16), 4, False)'"
        );
        assert_eq!(parse_prompt_masking(&pair.full_text()).unwrap(), sample_record());
    }

    #[test]
    fn masking_prompt_empty_fixed() {
        let r = MaskedLayoutRecord {
            fixed: vec![],
            mask_index: None,
            hint: ("N".into(), 2),
            answer: "sb1(N, (0, 0), 2, False)".into(),
            sample_seed: 0,
        };
        let pair = render_prompt_masking(&r);
        assert!(pair.prompt.starts_with("fixed components: []"));
        assert_eq!(parse_prompt_masking(&pair.full_text()).unwrap(), r);
    }

    #[test]
    fn v1_requires_enough_examples() {
        let cfg = GridPromptConfig::default();
        assert!(matches!(render_prompt_v1(&[], &[], &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn v1_zero_example_variant() {
        let cfg = GridPromptConfig {
            n_examples: 0,
            ..GridPromptConfig::default()
        };
        let text = render_prompt_v1(&[], &[rec(1, "P", 4, 19, 1, true)], &cfg).unwrap();
        assert!(text.contains("we are giving you zero examples"));
        assert!(text.ends_with(
            "Now, given these examples, here are the real datapoints that you need to learn:\n\n'sb1(P, (4, 19), 1, True)'"
        ));
        assert!(!text.contains("@@"));
    }

    fn step(placed: Vec<(TransistorSpec, PlacedRect)>, next: TransistorSpec, answer: (f64, f64)) -> EpisodeStep {
        EpisodeStep {
            step: placed.len(),
            placed,
            next,
            answer,
        }
    }

    fn spec(id: &str, t: &str, w: f64, h: f64) -> TransistorSpec {
        TransistorSpec {
            id: id.into(),
            ttype: t.into(),
            width: w,
            height: h,
        }
    }

    #[test]
    fn v2_step_lines() {
        let s0 = step(vec![], spec("sb1", "P", 8.0, 1.0), (5.0, 11.0));
        assert_eq!(
            format!("{}{}", render_step_query(&s0), render_step_answer(&s0)),
            "Placed transistors: [] , Now place: [sb1, P, (?,?), 8, 1]\u{2192} output: (5,11)"
        );
        let s2 = step(
            vec![
                (
                    spec("sb1", "P", 8.0, 1.0),
                    PlacedRect::new(5.0, 11.0, 8.0, 1.0).unwrap(),
                ),
                (
                    spec("sb2", "P", 8.0, 1.0),
                    PlacedRect::new(15.0, 11.0, 8.0, 1.0).unwrap(),
                ),
            ],
            spec("sb3", "N", 6.0, 1.0),
            (7.0, 9.0),
        );
        assert_eq!(
            format!("{}{}", render_step_query(&s2), render_step_answer(&s2)),
            "Placed transistors: [sb1, P, (5,11), 8, 1, sb2, P, (15,11), 8, 1] , Now place: [sb3, N, (?,?), 6, 1]\u{2192} output: (7,9)"
        );
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn v3_input_block() {
        let specs = [
            spec("sb2", "P", 3.92, 8.36),
            spec("sb1", "P", 3.14, 8.36),
            spec("sb0", "P", 2.75, 8.36),
        ];
        let text = render_prompt_v3(&specs);
        assert!(text.ends_with(
            "Now here is the input:\n[\n  {\"x\": 3.92, \"y\": 8.36, \"id\": \"sb2\", \"type\": \"P\"},\n  \
             {\"x\": 3.14, \"y\": 8.36, \"id\": \"sb1\", \"type\": \"P\"},\n  \
             {\"x\": 2.75, \"y\": 8.36, \"id\": \"sb0\", \"type\": \"P\"}\n]"
        ));
        let single = render_spec_list(&specs[..1]);
        assert_eq!(
            single,
            "[\n  {\"x\": 3.92, \"y\": 8.36, \"id\": \"sb2\", \"type\": \"P\"}\n]"
        );
    }

    #[test]
    fn fmt_num_forms() {
        assert_eq!(fmt_num(5.0), "5");
        assert_eq!(fmt_num(-3.0), "-3");
        assert_eq!(fmt_num(2.5), "2.5");
        assert_eq!(fmt_num(0.1 + 0.2), "0.30000000000000004");
    }
}
