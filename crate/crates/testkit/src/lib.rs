//! Reference checkers for the placebench test suites.
//!
//! Nothing here calls into the library under test. Checkers work on plain
//! text and tuples so a bug in the library cannot hide itself.

pub mod netlist {
    use std::collections::{HashMap, HashSet};

    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct Line {
        pub drain: String,
        pub gate: String,
        pub source: String,
        pub bulk: String,
        pub ctype: String,
        pub group: u32,
        pub subgroup: u32,
    }

    fn net(s: &str) -> bool {
        s.len() > 1 && s.starts_with('n') && s[1..].bytes().all(|b| b.is_ascii_digit())
    }

    fn id(s: &str, prefix: char) -> Option<u32> {
        s.strip_prefix(prefix)?
            .parse()
            .ok()
            .filter(|_| s[1..].bytes().all(|b| b.is_ascii_digit()))
    }

    /// Splits one `[next] d,g,s,b,type(gN,sM)` line.
    pub fn split_line(line: &str) -> Result<Line, String> {
        let rest = line.strip_prefix("[next] ").ok_or("missing [next] prefix")?;
        let fields: Vec<&str> = rest.splitn(5, ',').collect();
        if fields.len() != 5 {
            return Err(format!("expected 5 comma fields in {line:?}"));
        }
        for f in &fields[..4] {
            if !net(f) {
                return Err(format!("bad net id {f:?}"));
            }
        }
        let tail = fields[4];
        let open = tail.find('(').ok_or("missing (")?;
        let inner = tail[open + 1..].strip_suffix(')').ok_or("missing )")?;
        let (g, s) = inner.split_once(',').ok_or("missing , in label")?;
        let ctype = &tail[..open];
        if ctype.is_empty() || !ctype.bytes().all(|b| b.is_ascii_alphanumeric()) {
            return Err(format!("bad type {ctype:?}"));
        }
        Ok(Line {
            drain: fields[0].into(),
            gate: fields[1].into(),
            source: fields[2].into(),
            bulk: fields[3].into(),
            ctype: ctype.into(),
            group: id(g, 'g').ok_or(format!("bad group {g:?}"))?,
            subgroup: id(s, 's').ok_or(format!("bad subgroup {s:?}"))?,
        })
    }

    /// Returns every structural violation found in a serialized netlist.
    pub fn scan(text: &str) -> Vec<String> {
        let mut bad = Vec::new();
        if !text.is_empty() && !text.ends_with('\n') {
            bad.push("text does not end with a newline".into());
        }
        let mut lines = Vec::new();
        for (i, l) in text.lines().enumerate() {
            match split_line(l) {
                Ok(x) => lines.push(x),
                Err(e) => bad.push(format!("line {i}: {e}")),
            }
        }
        let mut bulk_of: HashMap<u32, &str> = HashMap::new();
        let mut type_of: HashMap<u32, &str> = HashMap::new();
        let mut drains = HashSet::new();
        for (i, l) in lines.iter().enumerate() {
            if *bulk_of.entry(l.group).or_insert(&l.bulk) != l.bulk {
                bad.push(format!("line {i}: bulk differs within g{}", l.group));
            }
            if *type_of.entry(l.group).or_insert(&l.ctype) != l.ctype {
                bad.push(format!("line {i}: type differs within g{}", l.group));
            }
            if !drains.insert(l.drain.clone()) {
                bad.push(format!("line {i}: drain {} reused", l.drain));
            }
            let prev = i.checked_sub(1).map(|p| &lines[p]);
            let same_sub = prev.is_some_and(|p| p.group == l.group && p.subgroup == l.subgroup);
            if same_sub {
                if prev.unwrap().drain != l.source {
                    bad.push(format!("line {i}: chain broken"));
                }
            } else {
                // A subgroup head must not hang off any other component's drain.
                if lines.iter().any(|o| o.drain == l.source) {
                    bad.push(format!("line {i}: subgroup head chains to another drain"));
                }
                let ok_order = match prev {
                    None => l.group == 0 && l.subgroup == 0,
                    Some(p) if p.group == l.group => l.subgroup == p.subgroup + 1,
                    Some(p) => l.group == p.group + 1 && l.subgroup == 0,
                };
                if !ok_order {
                    bad.push(format!("line {i}: g{}/s{} out of order", l.group, l.subgroup));
                }
            }
        }
        bad
    }

    /// Puts `(g, s)` answers back in place of each `<MASK>` token.
    pub fn reinsert(masked: &str, answers: &[(String, String)]) -> Option<String> {
        let parts: Vec<&str> = masked.split("<MASK>").collect();
        if parts.len() != answers.len() + 1 {
            return None;
        }
        let mut out = parts[0].to_string();
        for (p, (g, s)) in parts[1..].iter().zip(answers) {
            out.push_str(&format!("({g},{s})"));
            out.push_str(p);
        }
        Some(out)
    }
}

pub mod toys {
    const MASK: &str = "100";

    /// Value in column 3 of the row above the masked cell.
    pub fn grid_label(text: &str) -> Option<String> {
        let mut cells = std::collections::HashMap::new();
        let mut mask = None;
        for cell in text.split(';').filter(|c| !c.is_empty()) {
            let (rc, v) = cell.split_once(':')?;
            let (r, c) = rc.split_once(',')?;
            let (r, c): (usize, usize) = (r.parse().ok()?, c.parse().ok()?);
            if v == MASK {
                if mask.is_some() {
                    return None;
                }
                mask = Some(r);
            }
            cells.insert((r, c), v.to_string());
        }
        cells.get(&(mask?.checked_sub(1)?, 3)).cloned()
    }

    fn values(text: &str) -> Vec<&str> {
        text.split(',').map(str::trim).collect()
    }

    pub fn mask_position(text: &str) -> Option<usize> {
        let v = values(text);
        let pos = v.iter().position(|t| *t == MASK)?;
        (v.iter().filter(|t| **t == MASK).count() == 1).then_some(pos)
    }

    /// Value `n` positions before the single mask.
    pub fn index_label(text: &str, n: usize) -> Option<String> {
        let pos = mask_position(text)?;
        values(text).get(pos.checked_sub(n)?).map(|s| s.to_string())
    }

    pub fn count_label(text: &str) -> String {
        values(text).iter().filter(|t| **t == MASK).count().to_string()
    }
}

pub mod geom {
    /// `(cx, cy, w, h)`.
    pub type Rect = (f64, f64, f64, f64);

    /// Cells covered by a rect whose corners sit on integers.
    pub fn cells(r: Rect) -> Vec<(i64, i64)> {
        let x0 = (r.0 - r.2 / 2.0).round() as i64;
        let y0 = (r.1 - r.3 / 2.0).round() as i64;
        let (w, h) = (r.2.round() as i64, r.3.round() as i64);
        (x0..x0 + w).flat_map(|x| (y0..y0 + h).map(move |y| (x, y))).collect()
    }

    /// Pairwise shared-cell count: each cell covered k times adds k(k-1)/2.
    pub fn raster_pair_overlap(rects: &[Rect]) -> u64 {
        let mut count = std::collections::HashMap::<(i64, i64), u64>::new();
        for r in rects {
            for c in cells(*r) {
                *count.entry(c).or_default() += 1;
            }
        }
        count.values().map(|k| k * (k.saturating_sub(1)) / 2).sum()
    }
}

pub mod symmetry {
    /// `(type, w, h, cx, cy)`.
    pub type Item<'a> = (&'a str, f64, f64, f64, f64);

    fn partners(a: &Item, b: &Item, axis: f64, eps: f64) -> bool {
        a.0 == b.0
            && (a.1 - b.1).abs() <= 1e-6
            && (a.2 - b.2).abs() <= 1e-6
            && (2.0 * axis - a.3 - b.3).abs() <= eps
            && (a.4 - b.4).abs() <= eps
    }

    fn best(items: &[Item], used: &mut [bool], axis: f64, eps: f64) -> usize {
        let Some(i) = used.iter().position(|u| !u) else {
            return 0;
        };
        used[i] = true;
        // Leave item i unmatched.
        let mut top = best(items, used, axis, eps);
        if (items[i].3 - axis).abs() <= eps {
            top = top.max(1 + best(items, used, axis, eps));
        }
        for j in i + 1..items.len() {
            if !used[j] && partners(&items[i], &items[j], axis, eps) {
                used[j] = true;
                top = top.max(2 + best(items, used, axis, eps));
                used[j] = false;
            }
        }
        used[i] = false;
        top
    }

    /// Largest number of items coverable by self-matches and mirror pairs.
    pub fn exhaustive_matched(items: &[Item], axis: f64, eps: f64) -> usize {
        best(items, &mut vec![false; items.len()], axis, eps)
    }
}

pub mod fuzz {
    use rand::seq::SliceRandom;
    use rand::Rng;

    /// `(id, type, w, h, cx, cy)`.
    pub type Entry = (String, String, f64, f64, f64, f64);

    fn ws<R: Rng>(rng: &mut R) -> &'static str {
        ["", " ", "  ", "\n", "\n  ", "\t"].choose(rng).unwrap()
    }

    fn key(name: &str, style: u8) -> String {
        match style {
            0 => format!("\"{name}\""),
            1 => format!("'{name}'"),
            _ => name.to_string(),
        }
    }

    fn string(v: &str, style: u8) -> String {
        if style == 1 {
            format!("'{v}'")
        } else {
            format!("\"{v}\"")
        }
    }

    /// A list of placement objects with random layout, key order and,
    /// unless `strict`, JSON-adjacent syntax.
    pub fn list<R: Rng>(rng: &mut R, entries: &[Entry], strict: bool) -> String {
        let style = if strict { 0 } else { rng.gen_range(0..3u8) };
        let trailing = !strict && rng.gen_bool(0.5);
        let mut out = String::from("[");
        for (k, e) in entries.iter().enumerate() {
            let mut fields = [
                (key("id", style), string(&e.0, style)),
                (key("type", style), string(&e.1, style)),
                (key("x", style), format!("{}", e.2)),
                (key("y", style), format!("{}", e.3)),
                (key("c_x", style), format!("{}", e.4)),
                (key("c_y", style), format!("{}", e.5)),
            ];
            fields.shuffle(rng);
            out.push_str(ws(rng));
            out.push('{');
            for (i, (k, v)) in fields.iter().enumerate() {
                out.push_str(ws(rng));
                out.push_str(k);
                out.push(':');
                out.push_str(ws(rng));
                out.push_str(v);
                if i + 1 < fields.len() || trailing {
                    out.push(',');
                }
            }
            out.push_str(ws(rng));
            out.push('}');
            if k + 1 < entries.len() || trailing {
                out.push(',');
            }
        }
        out.push_str(ws(rng));
        out.push(']');
        out
    }

    const PROSE: [&str; 6] = [
        "Here is the final placement:",
        "Let's place them column by column. Each column's height is summed up.",
        "I'll keep symmetry where possible (it's not always feasible).",
        "Result",
        "Note: values are in microns, don't rescale.",
        "Sure!",
    ];

    /// Surrounds `list` with prose, code fences, and optionally an earlier
    /// draft list that must not be picked.
    pub fn wrap<R: Rng>(rng: &mut R, list: &str, draft: Option<&str>) -> String {
        let mut out = String::new();
        if rng.gen_bool(0.7) {
            out.push_str(PROSE.choose(rng).unwrap());
            out.push_str(ws(rng));
            out.push('\n');
        }
        if let Some(d) = draft {
            out.push_str("First attempt: ");
            out.push_str(d);
            out.push_str("\nThat overlaps, fixing.\n");
        }
        let fence = rng.gen_range(0..3);
        match fence {
            0 => out.push_str("```json\n"),
            1 => out.push_str("```\n"),
            _ => {}
        }
        out.push_str(list);
        if fence < 2 {
            out.push_str("\n```");
        }
        if rng.gen_bool(0.5) {
            out.push('\n');
            out.push_str(PROSE.choose(rng).unwrap());
        }
        out
    }
}
