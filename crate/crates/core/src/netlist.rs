//! Synthetic SPICE-style netlists with group/subgroup labels.
//!
//! Text form, one record per line:
//!
//! ```text
//! [next] n12,n13,n14,n15,pshort(g0,s0)
//! [next] n16,n17,n12,n15,pshort(g0,s0)
//! ```
//!
//! Fields are drain, gate, source, bulk, then `type(group,subgroup)`.
//! Within a subgroup each component's source is the previous component's
//! drain; every component of a group shares one bulk net.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const RECORD_TOKEN: &str = "[next]";
pub const MASK_TOKEN: &str = "<MASK>";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub drain: String,
    pub gate: String,
    pub source: String,
    pub bulk: String,
    pub ctype: String,
    pub group: u32,
    pub subgroup: u32,
}

impl Component {
    pub fn group_id(&self) -> String {
        format!("g{}", self.group)
    }

    pub fn subgroup_id(&self) -> String {
        format!("s{}", self.subgroup)
    }

    fn label(&self) -> String {
        format!("({},{})", self.group_id(), self.subgroup_id())
    }

    fn pins(&self) -> String {
        format!("{},{},{},{}", self.drain, self.gate, self.source, self.bulk)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{RECORD_TOKEN} {},{}{}", self.pins(), self.ctype, self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub components: Vec<Component>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetlistConfig {
    pub n_groups: usize,
    /// Inclusive bounds on subgroups per group.
    pub subgroups_per_group: (usize, usize),
    /// Inclusive bounds on components per subgroup.
    pub chain_len: (usize, usize),
    pub type_pool: Vec<String>,
    /// Probability of extending the current chain past `chain_len.0`
    /// instead of closing the subgroup.
    pub share_prob: f64,
    /// Probability that a gate reuses an earlier gate net of its group.
    pub gate_reuse_prob: f64,
}

impl Default for NetlistConfig {
    fn default() -> Self {
        NetlistConfig {
            n_groups: 3,
            subgroups_per_group: (1, 3),
            chain_len: (1, 5),
            type_pool: vec!["pshort".into(), "nshort".into()],
            share_prob: 0.7,
            gate_reuse_prob: 0.3,
        }
    }
}

impl NetlistConfig {
    pub fn validate(&self) -> Result<()> {
        if self.type_pool.is_empty() {
            return Err(Error::config("type_pool must not be empty"));
        }
        if let Some(bad) = self.type_pool.iter().find(|t| !is_type_name(t)) {
            return Err(Error::config(format!(
                "type `{bad}` must be alphanumeric/underscore and start with a letter"
            )));
        }
        if self.n_groups < 1 {
            return Err(Error::config("n_groups must be at least 1"));
        }
        for (name, (lo, hi)) in [
            ("subgroups_per_group", self.subgroups_per_group),
            ("chain_len", self.chain_len),
        ] {
            if lo < 1 || lo > hi {
                return Err(Error::config(format!("{name} range {lo}..={hi} is empty")));
            }
        }
        for (name, p) in [
            ("share_prob", self.share_prob),
            ("gate_reuse_prob", self.gate_reuse_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }
}

fn is_type_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_pin_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, ',' | '(' | ')' | '[' | ']' | '<' | '>'))
}

struct NetNamer {
    next: u64,
}

impl NetNamer {
    fn fresh(&mut self) -> String {
        let id = format!("n{}", self.next);
        self.next += 1;
        id
    }
}

pub fn generate_netlist(cfg: &NetlistConfig, seed: u64) -> Result<Netlist> {
    cfg.validate()?;
    let mut rng = rng::seeded(seed);
    // Seeded offset keeps net names from being identical across netlists.
    let mut nets = NetNamer {
        next: rng.gen_range(0..1000),
    };
    let mut components = Vec::new();

    for group in 0..cfg.n_groups {
        let ctype = cfg.type_pool[rng.gen_range(0..cfg.type_pool.len())].clone();
        let bulk = nets.fresh();
        let mut gates: Vec<String> = Vec::new();
        let n_sub = rng.gen_range(cfg.subgroups_per_group.0..=cfg.subgroups_per_group.1);

        for subgroup in 0..n_sub {
            let mut len = cfg.chain_len.0;
            while len < cfg.chain_len.1 && rng.gen_bool(cfg.share_prob) {
                len += 1;
            }
            let mut source = nets.fresh();
            for _ in 0..len {
                let gate = if !gates.is_empty() && rng.gen_bool(cfg.gate_reuse_prob) {
                    gates[rng.gen_range(0..gates.len())].clone()
                } else {
                    let g = nets.fresh();
                    gates.push(g.clone());
                    g
                };
                let drain = nets.fresh();
                components.push(Component {
                    drain: drain.clone(),
                    gate,
                    source,
                    bulk: bulk.clone(),
                    ctype: ctype.clone(),
                    group: group as u32,
                    subgroup: subgroup as u32,
                });
                source = drain;
            }
        }
    }
    Ok(Netlist { components, seed })
}

pub fn serialize_netlist(n: &Netlist) -> String {
    let mut out = String::new();
    for c in &n.components {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Parses the text form. The seed is not part of the text and comes back as 0.
pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut components = Vec::new();
    let starts: Vec<usize> = text.match_indices(RECORD_TOKEN).map(|(i, _)| i).collect();

    let head_end = starts.first().copied().unwrap_or(text.len());
    if let Some(off) = text[..head_end].find(|c: char| !c.is_whitespace()) {
        return Err(Error::Parse {
            record: 0,
            offset: off,
            message: format!("expected `{RECORD_TOKEN}`"),
        });
    }

    for (record, &start) in starts.iter().enumerate() {
        let end = starts.get(record + 1).copied().unwrap_or(text.len());
        let body_start = start + RECORD_TOKEN.len();
        components.push(parse_record(&text[body_start..end], body_start, record)?);
    }
    Ok(Netlist { components, seed: 0 })
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
    record: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            record: self.record,
            offset: self.base + self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = &self.src[self.pos..];
        let n = rest.find(|c: char| !f(c)).unwrap_or(rest.len());
        self.pos += n;
        &rest[..n]
    }

    fn expect(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn label(&mut self, prefix: char) -> Result<u32> {
        self.skip_ws();
        if !self.src[self.pos..].starts_with(prefix) {
            return Err(self.err(format!("expected `{prefix}<digits>` label")));
        }
        self.pos += 1;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map_err(|_| self.err(format!("expected digits after `{prefix}`")))
    }
}

fn parse_record(body: &str, base: usize, record: usize) -> Result<Component> {
    let mut cur = Cursor {
        src: body,
        pos: 0,
        base,
        record,
    };
    let mut pins = Vec::with_capacity(4);
    for i in 0..4 {
        cur.skip_ws();
        let pin = cur.take_while(is_pin_char);
        if pin.is_empty() {
            return Err(cur.err(format!("empty pin field {i}")));
        }
        pins.push(pin.to_string());
        cur.expect(',')?;
    }
    cur.skip_ws();
    let ctype = cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
    if !is_type_name(ctype) {
        return Err(cur.err("expected component type"));
    }
    cur.expect('(')?;
    let group = cur.label('g')?;
    cur.expect(',')?;
    let subgroup = cur.label('s')?;
    cur.expect(')')?;
    cur.skip_ws();
    if cur.pos != body.len() {
        return Err(cur.err("unexpected trailing input"));
    }
    let mut pins = pins.into_iter();
    let mut next = || pins.next().unwrap_or_default();
    Ok(Component {
        drain: next(),
        gate: next(),
        source: next(),
        bulk: next(),
        ctype: ctype.to_string(),
        group,
        subgroup,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedNetlist {
    pub masked_text: String,
    /// Removed `(group, subgroup)` labels in record order.
    pub answers: Vec<(String, String)>,
}

/// Replaces the `(group,subgroup)` suffix of `k` seeded-random components
/// with [`MASK_TOKEN`].
pub fn mask_groups(n: &Netlist, k: usize, seed: u64) -> Result<MaskedNetlist> {
    let total = n.components.len();
    if k < 1 || k > total {
        return Err(Error::config(format!(
            "k = {k} must lie in 1..={total} (number of components)"
        )));
    }
    let mut rng = rng::seeded(seed);
    let chosen: BTreeSet<usize> = sample(&mut rng, total, k).into_iter().collect();

    let mut masked_text = String::new();
    let mut answers = Vec::with_capacity(k);
    for (i, c) in n.components.iter().enumerate() {
        masked_text.push_str(RECORD_TOKEN);
        masked_text.push(' ');
        masked_text.push_str(&c.pins());
        masked_text.push(',');
        masked_text.push_str(&c.ctype);
        if chosen.contains(&i) {
            masked_text.push_str(MASK_TOKEN);
            answers.push((c.group_id(), c.subgroup_id()));
        } else {
            masked_text.push_str(&c.label());
        }
        masked_text.push('\n');
    }
    Ok(MaskedNetlist { masked_text, answers })
}

/// One line of a netlist dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetlistRecord {
    pub seed: u64,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masked_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<(String, String)>>,
}
