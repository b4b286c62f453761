use std::collections::HashMap;
use std::path::Path;

use placebench::baseline::{column_stack_place, mirror_pair_place};
use placebench::extract::{extract_with_fallback, validate_against_input, ExtractionMethod};
use placebench::geometry::{rect_from_grid, PlacedRect};
use placebench::layoutgen::{
    episode, gen_v1, gen_v2, gen_v3, mask_placement, LayoutSample, MaskedLayoutRecord, Version,
};
use placebench::metrics::{exact_match_accuracy, score_layout, summarize, Rules, ScoreReport, ScoreSummary};
use placebench::modelclient::{
    CompletionClient, CompletionRequest, HttpClient, RecordingClient, ReplayClient, TransportError,
};
use placebench::netlist::{generate_netlist, mask_groups, parse_netlist, serialize_netlist, NetlistRecord};
use placebench::promptio::{
    grid_step_pair, parse_sb, render_prompt_masking, render_prompt_v2, render_prompt_v3, GridPromptConfig,
};
use placebench::render::{render_svg_with, Layer, RenderOptions, PLACED_COLOR, PREDICTED_COLOR, TRUTH_COLOR};
use placebench::rng::derive_seed;
use placebench::toys::{gen_count_masks, gen_grid_task, gen_index_before_mask, Alphabet, ToyKind};
use placebench::PlacedTransistor;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, Config};
use crate::io::{read_jsonl, read_text, read_values, write_jsonl, write_text};
use crate::records::{AnyRecord, PlacementRecord, PromptRecord, RawRecord};
use crate::{
    AccuracyArgs, Algo, BaselineArgs, Cli, CliError, Command, EvalArgs, ExtractArgs, GenArgs, GenKind, MaskArgs,
    MaskKind, PromptArgs, PromptKind, RenderArgs, ScoreArgs, ToyKindArg,
};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = config::load(cli.config.as_deref())?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::data(e.to_string()))?;
    pool.install(|| match cli.command {
        Command::Gen(a) => gen(&cfg, a),
        Command::Mask(a) => mask(a),
        Command::Prompt(a) => prompt(&cfg, a),
        Command::Eval(a) => eval(&cfg, a),
        Command::Extract(a) => extract(&cfg, a),
        Command::Score(a) => score(&cfg, a),
        Command::Accuracy(a) => accuracy(a),
        Command::Baseline(a) => baseline(&cfg, a),
        Command::Render(a) => render(a),
    })
}

fn report(what: &str, done: usize, skipped: usize) {
    eprintln!("{what}: {done} written, {skipped} skipped");
}

/// Maps in parallel, keeping input order.
fn par_map<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(usize, &T) -> Result<U, CliError> + Sync + Send,
) -> Result<Vec<U>, CliError> {
    items
        .par_iter()
        .enumerate()
        .map(|(i, t)| f(i, t))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

// ------------------------------------------------------------ gen

fn gen(cfg: &Config, a: GenArgs) -> Result<(), CliError> {
    let idx: Vec<usize> = (0..a.count).collect();
    let out = a.out.as_deref();
    let seed = |i: usize| derive_seed(a.seed, i as u64);
    match a.kind {
        GenKind::Netlist => {
            let rows = par_map(&idx, |_, &i| {
                let n = generate_netlist(&cfg.netlist, seed(i))?;
                Ok(NetlistRecord {
                    seed: seed(i),
                    text: serialize_netlist(&n),
                    masked_text: None,
                    answers: None,
                })
            })?;
            write_jsonl(out, &rows)?;
        }
        GenKind::Toy => {
            let t = &cfg.toy;
            let kind = match a.toy_kind {
                Some(ToyKindArg::Grid4th) => ToyKind::Grid4th,
                Some(ToyKindArg::IndexN) => ToyKind::IndexN,
                Some(ToyKindArg::CountMasks) => ToyKind::CountMasks,
                None => t.kind,
            };
            let alpha = Alphabet(t.alphabet_max);
            let rows = par_map(&idx, |_, &i| {
                Ok(match kind {
                    ToyKind::Grid4th => gen_grid_task(t.rows, t.cols, seed(i), alpha)?,
                    ToyKind::IndexN => gen_index_before_mask(t.n, t.len, seed(i), alpha, t.label)?,
                    ToyKind::CountMasks => gen_count_masks(t.len, seed(i), alpha)?,
                })
            })?;
            write_jsonl(out, &rows)?;
        }
        GenKind::V1 => write_jsonl(out, &par_map(&idx, |_, &i| Ok(gen_v1(&cfg.v1, seed(i))?))?)?,
        GenKind::V2 => write_jsonl(out, &par_map(&idx, |_, &i| Ok(gen_v2(&cfg.v2, seed(i))?))?)?,
        GenKind::V3 => write_jsonl(out, &par_map(&idx, |_, &i| Ok(gen_v3(&cfg.v3, seed(i))?))?)?,
    }
    report("gen", a.count, 0);
    Ok(())
}

// ------------------------------------------------------------ mask

fn mask(a: MaskArgs) -> Result<(), CliError> {
    let out = a.out.as_deref();
    match a.kind {
        MaskKind::Subgroup => {
            let input: Vec<NetlistRecord> = read_jsonl(&a.input)?;
            let rows = par_map(&input, |i, r| {
                let n = parse_netlist(&r.text).map_err(|e| CliError::data(format!("record {i}: {e}")))?;
                let m = mask_groups(&n, a.k, derive_seed(a.seed, i as u64))
                    .map_err(|e| CliError::data(format!("record {i}: {e}")))?;
                Ok(NetlistRecord {
                    seed: r.seed,
                    text: r.text.clone(),
                    masked_text: Some(m.masked_text),
                    answers: Some(m.answers),
                })
            })?;
            write_jsonl(out, &rows)?;
            report("mask", rows.len(), 0);
        }
        MaskKind::Layout => {
            let input: Vec<LayoutSample> = read_jsonl(&a.input)?;
            let rows = par_map(&input, |i, s| {
                mask_placement(s, derive_seed(a.seed, i as u64)).map_err(|e| CliError::data(format!("record {i}: {e}")))
            })?;
            write_jsonl(out, &rows)?;
            report("mask", rows.len(), 0);
        }
    }
    Ok(())
}

// ------------------------------------------------------------ prompt

/// The first `n` examples, skipping `own` when examples come from the input.
fn shots_for<'a>(examples: &'a [LayoutSample], n: usize, own: Option<usize>) -> Result<Vec<LayoutSample>, CliError> {
    let picked: Vec<&'a LayoutSample> = examples
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != own)
        .map(|(_, s)| s)
        .take(n)
        .collect();
    if picked.len() < n {
        return Err(CliError::data(format!(
            "{n} examples requested but only {} available",
            picked.len()
        )));
    }
    Ok(picked.into_iter().cloned().collect())
}

fn expect_version(s: &LayoutSample, v: Version, i: usize) -> Result<(), CliError> {
    if s.version != v {
        return Err(CliError::data(format!(
            "record {i}: expected a {v:?} sample, found {:?}",
            s.version
        )));
    }
    Ok(())
}

fn prompt(cfg: &Config, a: PromptArgs) -> Result<(), CliError> {
    let out = a.out.as_deref();
    if a.kind == PromptKind::Masking {
        let input: Vec<MaskedLayoutRecord> = read_jsonl(&a.input)?;
        let rows: Vec<PromptRecord> = input
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let p = render_prompt_masking(r);
                PromptRecord {
                    id: i.to_string(),
                    sample_seed: r.sample_seed,
                    step: None,
                    prompt: p.prompt,
                    answer: p.answer,
                }
            })
            .collect();
        write_jsonl(out, &rows)?;
        report("prompt", rows.len(), 0);
        return Ok(());
    }

    let input: Vec<LayoutSample> = read_jsonl(&a.input)?;
    let separate = a.examples.is_some();
    let examples: Vec<LayoutSample> = match &a.examples {
        Some(p) => read_jsonl(p)?,
        None => input.clone(),
    };
    let own = |i: usize| (!separate).then_some(i);

    let nested: Vec<Vec<PromptRecord>> = match a.kind {
        PromptKind::V1 => {
            let pcfg = GridPromptConfig {
                n_examples: a.shots.unwrap_or(cfg.prompt.n_examples),
                ..cfg.prompt.clone()
            };
            par_map(&input, |i, s| {
                expect_version(s, Version::V1, i)?;
                let shots = shots_for(&examples, pcfg.n_examples, own(i))?;
                let n = s.records.as_ref().map_or(0, Vec::len);
                let step = a.prefix_len.unwrap_or(n.saturating_sub(1));
                let p =
                    grid_step_pair(&shots, s, step, &pcfg).map_err(|e| CliError::data(format!("record {i}: {e}")))?;
                Ok(vec![PromptRecord {
                    id: i.to_string(),
                    sample_seed: s.seed,
                    step: Some(step),
                    prompt: p.prompt,
                    answer: p.answer,
                }])
            })?
        }
        PromptKind::V2 => par_map(&input, |i, s| {
            expect_version(s, Version::V2, i)?;
            let shots = shots_for(&examples, a.shots.unwrap_or(1), own(i))?;
            Ok(episode(s)
                .iter()
                .map(|st| {
                    let p = render_prompt_v2(st, &shots);
                    PromptRecord {
                        id: format!("{i}:{}", st.step),
                        sample_seed: s.seed,
                        step: Some(st.step),
                        prompt: p.prompt,
                        answer: p.answer,
                    }
                })
                .collect())
        })?,
        PromptKind::V3 => par_map(&input, |i, s| {
            let answer = serde_json::to_string(&s.placed()).map_err(|e| CliError::data(e.to_string()))?;
            Ok(vec![PromptRecord {
                id: i.to_string(),
                sample_seed: s.seed,
                step: None,
                prompt: render_prompt_v3(&s.specs),
                answer,
            }])
        })?,
        PromptKind::Masking => unreachable!(),
    };
    let rows: Vec<PromptRecord> = nested.into_iter().flatten().collect();
    write_jsonl(out, &rows)?;
    report("prompt", rows.len(), 0);
    Ok(())
}

// ------------------------------------------------------------ eval / extract

fn http_client(cfg: &Config, endpoint: Option<String>) -> Result<HttpClient, CliError> {
    let mut http = cfg.model.http.clone();
    http.endpoint = endpoint
        .ok_or_else(|| CliError::Usage("no endpoint: pass --endpoint, set MODEL_ENDPOINT, or use --replay".into()))?;
    if let Some(k) = config::pick(None, "MODEL_API_KEY", http.api_key.as_deref().unwrap_or("")) {
        http.api_key = Some(k);
    }
    HttpClient::new(http).map_err(CliError::from)
}

fn client(
    cfg: &Config,
    replay: Option<&Path>,
    record: Option<&Path>,
    endpoint: Option<String>,
) -> Result<Box<dyn CompletionClient>, CliError> {
    if let Some(dir) = replay {
        return Ok(Box::new(ReplayClient::new(dir)));
    }
    let http = http_client(cfg, endpoint)?;
    Ok(match record {
        Some(dir) => Box::new(RecordingClient::new(http, dir)),
        None => Box::new(http),
    })
}

fn model_name(cfg: &Config, flag: Option<&str>) -> String {
    config::pick(flag, "MODEL_NAME", &cfg.model.name).unwrap_or_else(|| "default".into())
}

fn request(cfg: &Config, model: &str, prompt: &str) -> CompletionRequest {
    CompletionRequest {
        max_tokens: cfg.model.max_tokens,
        temperature: cfg.model.temperature,
        ..CompletionRequest::new(model, prompt)
    }
}

fn eval(cfg: &Config, a: EvalArgs) -> Result<(), CliError> {
    let prompts: Vec<PromptRecord> = read_jsonl(&a.prompts)?;
    let endpoint = config::pick(a.endpoint.as_deref(), &a.endpoint_env, &cfg.model.http.endpoint);
    let client = client(cfg, a.replay.as_deref(), a.record.as_deref(), endpoint)?;
    let model = model_name(cfg, a.model.as_deref());
    let results: Vec<Result<RawRecord, (String, TransportError)>> = prompts
        .par_iter()
        .map(|p| {
            client
                .complete(&request(cfg, &model, &p.prompt))
                .map(|output| RawRecord {
                    id: p.id.clone(),
                    sample_seed: p.sample_seed,
                    step: p.step,
                    output,
                })
                .map_err(|e| (p.id.clone(), e))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err((id, e)) => {
                eprintln!("eval: record {id}: {e}");
                failed.push(id);
            }
        }
    }
    write_jsonl(a.out.as_deref(), &rows)?;
    report("eval", rows.len(), failed.len());
    if !failed.is_empty() {
        return Err(CliError::Transport(format!(
            "{} of {} requests failed",
            failed.len(),
            prompts.len()
        )));
    }
    Ok(())
}

fn extract(cfg: &Config, a: ExtractArgs) -> Result<(), CliError> {
    let raws: Vec<RawRecord> = read_jsonl(&a.input)?;
    let judge = if a.judge {
        let endpoint = config::pick(a.endpoint.as_deref(), "MODEL_ENDPOINT", &cfg.model.http.endpoint);
        Some(client(cfg, a.replay.as_deref(), a.record.as_deref(), endpoint)?)
    } else {
        None
    };
    let model = model_name(cfg, a.model.as_deref());
    let rows: Vec<PlacementRecord> = raws
        .par_iter()
        .map(|r| {
            let res = extract_with_fallback(&r.output, judge.as_deref(), &model);
            match res {
                Ok(x) => PlacementRecord {
                    id: r.id.clone(),
                    sample_seed: r.sample_seed,
                    method: method_name(x.method).into(),
                    placements: x.placements,
                    diagnostics: x.diagnostics,
                    error: None,
                },
                Err(e) => PlacementRecord {
                    id: r.id.clone(),
                    sample_seed: r.sample_seed,
                    method: "failed".into(),
                    placements: Vec::new(),
                    diagnostics: match &e {
                        placebench::Error::ExtractionFailed { diagnostics } => diagnostics.clone(),
                        _ => Vec::new(),
                    },
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    write_jsonl(a.out.as_deref(), &rows)?;
    eprintln!(
        "extract: {} records, {} recovered, {failed} failed extraction",
        rows.len(),
        rows.len() - failed
    );
    Ok(())
}

fn method_name(m: ExtractionMethod) -> &'static str {
    match m {
        ExtractionMethod::DirectJson => "direct_json",
        ExtractionMethod::ScanRepair => "scan_repair",
        ExtractionMethod::Judge => "judge",
    }
}

// ------------------------------------------------------------ score

#[derive(Debug, Serialize)]
struct ScoreRow {
    id: String,
    sample_seed: u64,
    status: &'static str,
    input_valid: Option<bool>,
    overlap_total: Option<f64>,
    overlap_free: Option<bool>,
    symmetry: Option<f64>,
    axis_used: Option<f64>,
    bbox_area: Option<f64>,
    compactness: Option<f64>,
    grouping: Option<f64>,
    spacing_violations: Option<usize>,
    width_violations: Option<usize>,
    area_violations: Option<usize>,
    verdict: Option<String>,
}

impl ScoreRow {
    fn failed(id: String, sample_seed: u64) -> Self {
        ScoreRow {
            id,
            sample_seed,
            status: "extraction_failed",
            input_valid: None,
            overlap_total: None,
            overlap_free: None,
            symmetry: None,
            axis_used: None,
            bbox_area: None,
            compactness: None,
            grouping: None,
            spacing_violations: None,
            width_violations: None,
            area_violations: None,
            verdict: None,
        }
    }

    fn scored(id: String, sample_seed: u64, valid: Option<bool>, r: &ScoreReport) -> Self {
        ScoreRow {
            status: "scored",
            input_valid: valid,
            overlap_total: Some(r.overlap_total),
            overlap_free: Some(r.overlap_free),
            symmetry: Some(r.symmetry),
            axis_used: Some(r.axis_used),
            bbox_area: Some(r.bbox_area),
            compactness: Some(r.compactness),
            grouping: Some(r.grouping),
            spacing_violations: Some(r.spacing_violations),
            width_violations: Some(r.width_violations),
            area_violations: Some(r.area_violations),
            verdict: Some(serde_json::to_value(r.verdict).unwrap().as_str().unwrap().to_string()),
            ..ScoreRow::failed(id, sample_seed)
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    total: usize,
    scored: usize,
    extraction_failures: usize,
    input_mismatches: usize,
    /// Overlap-free fraction counting failed extractions as failures.
    non_overlap_accuracy_all: f64,
    metrics: Option<ScoreSummary>,
}

#[derive(Debug, Serialize)]
struct ReportLine<'a> {
    id: &'a str,
    sample_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn score(cfg: &Config, a: ScoreArgs) -> Result<(), CliError> {
    let rules: Rules = match &a.rules {
        Some(p) => toml::from_str(&read_text(p)?).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?,
        None => cfg.rules.clone(),
    };
    let gold: Vec<LayoutSample> = read_jsonl(&a.gold)?;
    let by_seed: HashMap<u64, &LayoutSample> = gold.iter().map(|s| (s.seed, s)).collect();

    struct Pred {
        id: String,
        seed: u64,
        placements: Option<Vec<PlacedTransistor>>,
        from_model: bool,
        error: Option<String>,
    }
    let mut preds = Vec::new();
    for (i, v) in read_values(&a.pred)?.into_iter().enumerate() {
        preds.push(match AnyRecord::from_value(v, i + 1)? {
            AnyRecord::Sample(s) => Pred {
                id: i.to_string(),
                seed: s.seed,
                placements: Some(s.placed()),
                from_model: false,
                error: None,
            },
            AnyRecord::Placement(p) => Pred {
                id: p.id,
                seed: p.sample_seed,
                placements: p.error.is_none().then_some(p.placements),
                from_model: true,
                error: p.error,
            },
            _ => return Err(CliError::data(format!("record {}: not a placement record", i + 1))),
        });
    }

    let scored: Vec<(Option<ScoreReport>, Option<bool>)> = par_map(&preds, |i, p| {
        let g = by_seed
            .get(&p.seed)
            .ok_or_else(|| CliError::data(format!("record {}: no gold sample with seed {}", i + 1, p.seed)))?;
        let Some(pl) = &p.placements else {
            return Ok((None, None));
        };
        let r = Rules {
            axis: rules.axis.or(Some(g.axis)),
            ..rules.clone()
        };
        let report = score_layout(pl, &r).map_err(|e| CliError::data(format!("record {}: {e}", i + 1)))?;
        let valid = p.from_model.then(|| validate_against_input(pl, &g.specs).ok);
        Ok((Some(report), valid))
    })?;

    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (p, (rep, valid)) in preds.iter().zip(&scored) {
        rows.push(match rep {
            Some(r) => ScoreRow::scored(p.id.clone(), p.seed, *valid, r),
            None => ScoreRow::failed(p.id.clone(), p.seed),
        });
        lines.push(ReportLine {
            id: &p.id,
            sample_seed: p.seed,
            report: rep.as_ref(),
            error: p.error.as_deref(),
        });
    }
    let reports: Vec<ScoreReport> = scored.iter().filter_map(|(r, _)| r.clone()).collect();
    let summary = Summary {
        total: preds.len(),
        scored: reports.len(),
        extraction_failures: preds.len() - reports.len(),
        input_mismatches: scored.iter().filter(|(_, v)| *v == Some(false)).count(),
        non_overlap_accuracy_all: if preds.is_empty() {
            0.0
        } else {
            reports.iter().filter(|r| r.overlap_free).count() as f64 / preds.len() as f64
        },
        metrics: if reports.is_empty() {
            None
        } else {
            Some(summarize(&reports)?)
        },
    };

    let mut w = csv::Writer::from_writer(crate::io::writer(a.out.as_deref())?);
    for r in &rows {
        w.serialize(r).map_err(|e| CliError::data(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::data(e.to_string()))?;
    drop(w);
    if let Some(p) = &a.reports {
        write_jsonl(Some(p), &lines)?;
    }
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::data(e.to_string()))? + "\n";
    if let Some(p) = &a.summary {
        write_text(Some(p), &text)?;
    }
    eprint!("{text}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct AccuracyReport {
    count: usize,
    exact_match_accuracy: f64,
}

fn accuracy(a: AccuracyArgs) -> Result<(), CliError> {
    let preds: Vec<RawRecord> = read_jsonl(&a.pred)?;
    let gold: Vec<PromptRecord> = read_jsonl(&a.gold)?;
    let answers: HashMap<&str, &str> = gold.iter().map(|g| (g.id.as_str(), g.answer.as_str())).collect();
    let mut p = Vec::new();
    let mut g = Vec::new();
    for r in &preds {
        let ans = answers
            .get(r.id.as_str())
            .ok_or_else(|| CliError::data(format!("prediction {} has no gold prompt", r.id)))?;
        p.push(r.output.as_str());
        g.push(*ans);
    }
    if preds.len() != gold.len() {
        eprintln!(
            "accuracy: {} gold prompts have no prediction",
            gold.len() - preds.len().min(gold.len())
        );
    }
    let rep = AccuracyReport {
        count: p.len(),
        exact_match_accuracy: exact_match_accuracy(&p, &g)?,
    };
    let text = serde_json::to_string(&rep).map_err(|e| CliError::data(e.to_string()))? + "\n";
    write_text(a.out.as_deref(), &text)
}

// ------------------------------------------------------------ baseline / render

fn baseline(cfg: &Config, a: BaselineArgs) -> Result<(), CliError> {
    let input: Vec<LayoutSample> = read_jsonl(&a.input)?;
    let rows = par_map(&input, |i, s| {
        let placements = match a.algo {
            Algo::Column => column_stack_place(&s.specs, &cfg.baseline.column),
            Algo::Mirror => mirror_pair_place(&s.specs, cfg.baseline.axis.unwrap_or(s.axis), &cfg.baseline.mirror),
        }
        .map_err(|e| CliError::data(format!("record {i}: {e}")))?;
        Ok(PlacementRecord {
            id: i.to_string(),
            sample_seed: s.seed,
            method: match a.algo {
                Algo::Column => "column".into(),
                Algo::Mirror => "mirror".into(),
            },
            placements,
            diagnostics: Vec::new(),
            error: None,
        })
    })?;
    write_jsonl(a.out.as_deref(), &rows)?;
    report("baseline", rows.len(), 0);
    Ok(())
}

fn nth_record(path: &Path, index: usize) -> Result<AnyRecord, CliError> {
    let values = read_values(path)?;
    let n = values.len();
    let v = values
        .into_iter()
        .nth(index)
        .ok_or_else(|| CliError::data(format!("{}: index {index} out of range ({n} records)", path.display())))?;
    AnyRecord::from_value(v, index + 1)
}

fn sb_rect(text: &str) -> Result<PlacedRect, CliError> {
    let r = parse_sb(text)?;
    Ok(rect_from_grid(r.x, r.y, r.m, r.rotated)?)
}

fn rects(ps: &[PlacedTransistor]) -> Vec<PlacedRect> {
    ps.iter().map(PlacedTransistor::rect).collect()
}

fn pred_rects(rec: AnyRecord) -> Result<Vec<PlacedRect>, CliError> {
    match rec {
        AnyRecord::Sample(s) => Ok(s.placements.clone()),
        AnyRecord::Placement(p) => Ok(rects(&p.placements)),
        AnyRecord::Raw(r) => Ok(vec![sb_rect(&r.output)?]),
        AnyRecord::Masked(_) => Err(CliError::data("a masked record cannot be a prediction")),
    }
}

fn render(a: RenderArgs) -> Result<(), CliError> {
    let rec = nth_record(&a.input, a.index)?;
    let pred = match &a.pred {
        Some(p) => Some(pred_rects(nth_record(p, a.index)?)?),
        None => None,
    };
    let mut opts = RenderOptions::default();
    let mut layers = Vec::new();
    match rec {
        AnyRecord::Sample(s) => {
            opts.grid = if a.no_grid { None } else { s.grid };
            opts.y_up = s.grid.is_none();
            let label = if pred.is_some() { "truth" } else { "layout" };
            let color = if pred.is_some() { TRUTH_COLOR } else { PLACED_COLOR };
            layers.push(Layer::new(label, s.placements.clone(), color));
        }
        AnyRecord::Masked(m) => {
            opts.grid = if a.no_grid { None } else { Some((20, 20)) };
            let fixed = m.fixed.iter().map(|t| sb_rect(t)).collect::<Result<Vec<_>, _>>()?;
            layers.push(Layer::new("placed", fixed, PLACED_COLOR));
            layers.push(Layer::new("truth", vec![sb_rect(&m.answer)?], TRUTH_COLOR));
        }
        AnyRecord::Placement(p) => {
            opts.y_up = true;
            layers.push(Layer::new("predicted", rects(&p.placements), PREDICTED_COLOR));
        }
        AnyRecord::Raw(_) => return Err(CliError::data("raw model output cannot be rendered on its own")),
    }
    if let Some(p) = pred {
        layers.push(Layer::new("predicted", p, PREDICTED_COLOR));
    }
    let svg = render_svg_with(&layers, &opts)?;
    write_text(a.out.as_deref(), &svg)
}
