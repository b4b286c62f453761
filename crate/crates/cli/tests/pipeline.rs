mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;

use common::*;
use placebench::modelclient::{write_fixture, CompletionRequest};
use placebench::promptio::render_prompt_v3;
use serde_json::Value;

fn lines(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn gen_v1_count_one_is_one_line() {
    let d = tempfile::tempdir().unwrap();
    let r = ok(d.path(), &["gen", "v1", "--count", "1"]);
    let text = r.text();
    assert_eq!(text.lines().count(), 1);
    assert!(text.ends_with('\n'));
    let v: Value = serde_json::from_str(text.trim_end()).unwrap();
    assert_eq!(v["version"], "v1");
}

#[test]
fn golden_files_are_stable() {
    let bad = golden_mismatches();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn jobs_do_not_change_output() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "--jobs", "1", "gen", "v3", "--count", "50", "--seed", "9", "--out", "a.jsonl",
        ],
    );
    ok(
        d.path(),
        &[
            "--jobs", "4", "gen", "v3", "--count", "50", "--seed", "9", "--out", "b.jsonl",
        ],
    );
    assert_eq!(
        std::fs::read(d.path().join("a.jsonl")).unwrap(),
        std::fs::read(d.path().join("b.jsonl")).unwrap()
    );
}

#[test]
fn self_score_is_legal() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &["gen", "v3", "--count", "40", "--seed", "1", "--out", "v3.jsonl"],
    );
    ok(
        d.path(),
        &["gen", "v1", "--count", "20", "--seed", "1", "--out", "v1.jsonl"],
    );
    for data in ["v3.jsonl", "v1.jsonl"] {
        let r = ok(d.path(), &["score", "--pred", data, "--gold", data, "--out", "s.csv"]);
        let gold = lines(&d.path().join(data));
        let mut rd = csv::Reader::from_path(d.path().join("s.csv")).unwrap();
        let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
        let head = rd.headers().unwrap().clone();
        let col = |name: &str| head.iter().position(|h| h == name).unwrap();
        assert_eq!(rows.len(), gold.len());
        for (row, g) in rows.iter().zip(&gold) {
            assert_eq!(&row[col("verdict")], "legal", "{data}");
            assert_eq!(&row[col("overlap_free")], "true");
            if g["symmetric"] == Value::Bool(true) {
                assert_eq!(
                    row[col("symmetry")].parse::<f64>().unwrap(),
                    1.0,
                    "{data} {}",
                    g["seed"]
                );
            }
        }
        let summary: Value = serde_json::from_str(&r.stderr[r.stderr.find('{').unwrap()..]).unwrap();
        assert_eq!(summary["metrics"]["legal_fraction"], 1.0);
    }
}

#[test]
fn three_transistor_pipeline_with_replay() {
    let d = tempfile::tempdir().unwrap();
    three_p_setup(d.path(), "default");
    run_pipeline(d.path(), "2");

    let prompt = &lines(&d.path().join("prompts.jsonl"))[0]["prompt"];
    assert!(prompt.as_str().unwrap().ends_with(
        "Now here is the input:\n[\n  {\"x\": 3.92, \"y\": 8.36, \"id\": \"sb2\", \"type\": \"P\"},\n  {\"x\": 3.14, \"y\": 8.36, \"id\": \"sb1\", \"type\": \"P\"},\n  {\"x\": 2.75, \"y\": 8.36, \"id\": \"sb0\", \"type\": \"P\"}\n]"
    ));

    let placed = &lines(&d.path().join("placements.jsonl"))[0];
    assert_eq!(placed["method"], "scan_repair");
    assert_eq!(placed["placements"][2]["c_x"], 3.335);

    let reports = lines(&d.path().join("reports.jsonl"));
    assert_eq!(reports.len(), 1);
    let rep = &reports[0]["report"];
    assert_eq!(rep["overlap_free"], true);
    assert_eq!(rep["overlap_total"], 0.0);
    let csv = std::fs::read_to_string(d.path().join("report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",scored,true,"), "{csv}");

    let svg = std::fs::read_to_string(d.path().join("layout.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 6);

    let again = tempfile::tempdir().unwrap();
    three_p_setup(again.path(), "default");
    run_pipeline(again.path(), "1");
    for f in PIPELINE_OUTPUTS {
        assert_eq!(
            std::fs::read(d.path().join(f)).unwrap(),
            std::fs::read(again.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn extraction_failures_are_counted_not_dropped() {
    let d = tempfile::tempdir().unwrap();
    let gold = three_p_gold();
    std::fs::write(
        d.path().join("gold.jsonl"),
        serde_json::to_string(&gold).unwrap() + "\n",
    )
    .unwrap();
    let raw = [
        serde_json::json!({"id": "0", "sample_seed": 42, "output": "I could not decide."}),
        serde_json::json!({"id": "1", "sample_seed": 42, "output": THREE_P_ANSWER}),
    ];
    let text: String = raw.iter().map(|v| v.to_string() + "\n").collect();
    std::fs::write(d.path().join("raw.jsonl"), text).unwrap();
    let r = ok(d.path(), &["extract", "--in", "raw.jsonl", "--out", "p.jsonl"]);
    assert!(r.stderr.contains("1 failed"), "{}", r.stderr);
    let p = lines(&d.path().join("p.jsonl"));
    assert_eq!(p.len(), 2);
    assert_eq!(p[0]["method"], "failed");
    assert!(p[0]["error"].is_string());

    let r = ok(
        d.path(),
        &["score", "--pred", "p.jsonl", "--gold", "gold.jsonl", "--out", "s.csv"],
    );
    let csv = std::fs::read_to_string(d.path().join("s.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains("extraction_failed"));
    let summary: Value = serde_json::from_str(&r.stderr[r.stderr.find('{').unwrap()..]).unwrap();
    assert_eq!(summary["extraction_failures"], 1);
    assert_eq!(summary["non_overlap_accuracy_all"], 0.5);
}

#[test]
fn accuracy_command_counts_matches() {
    let d = tempfile::tempdir().unwrap();
    let gold: String = (0..4)
        .map(|i| {
            serde_json::json!({"id": i.to_string(), "sample_seed": 0, "prompt": "p", "answer": format!("a{i}")})
                .to_string()
                + "\n"
        })
        .collect();
    let pred: String = (0..4)
        .map(|i| {
            let out = if i % 2 == 0 { format!("a{i}") } else { "wrong".into() };
            serde_json::json!({"id": i.to_string(), "sample_seed": 0, "output": out}).to_string() + "\n"
        })
        .collect();
    std::fs::write(d.path().join("g.jsonl"), gold).unwrap();
    std::fs::write(d.path().join("p.jsonl"), pred).unwrap();
    let r = ok(d.path(), &["accuracy", "--pred", "p.jsonl", "--gold", "g.jsonl"]);
    let v: Value = serde_json::from_str(&r.text()).unwrap();
    assert_eq!(v["exact_match_accuracy"], 0.5);
    assert_eq!(v["count"], 4);
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(run_in(p, &["--help"], &[]).code, 0);
    assert_eq!(run_in(p, &["gen", "v9"], &[]).code, 1);
    assert_eq!(run_in(p, &["frobnicate"], &[]).code, 1);
    assert_eq!(run_in(p, &["--jobs", "0", "gen", "v1"], &[]).code, 1);

    std::fs::write(p.join("bad.jsonl"), "{\"seed\": 1, \"text\": \"[next] nope\"}\n{oops\n").unwrap();
    let r = run_in(p, &["mask", "subgroup", "--in", "bad.jsonl"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("bad.jsonl:2"), "{}", r.stderr);
    std::fs::write(p.join("bad.jsonl"), "{\"seed\": 1, \"text\": \"[next] nope\"}\n").unwrap();
    let r = run_in(p, &["mask", "subgroup", "--in", "bad.jsonl"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("record 0"), "{}", r.stderr);
    assert_eq!(run_in(p, &["render", "--in", "missing.jsonl"], &[]).code, 2);

    ok(p, &["gen", "v3", "--count", "2", "--out", "a.jsonl"]);
    ok(p, &["gen", "v3", "--count", "2", "--seed", "1", "--out", "b.jsonl"]);
    let r = run_in(p, &["score", "--pred", "a.jsonl", "--gold", "b.jsonl"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("no gold sample"));

    ok(p, &["prompt", "v3", "--in", "a.jsonl", "--out", "pr.jsonl"]);
    let r = run_in(p, &["eval", "--prompts", "pr.jsonl"], &[]);
    assert_eq!(r.code, 1);
    let dead = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    std::fs::write(
        p.join("c.toml"),
        "[model]\nmax_attempts = 2\ninitial_backoff_ms = 1\ntimeout_ms = 2000\n",
    )
    .unwrap();
    let r = run_in(
        p,
        &[
            "--config",
            "c.toml",
            "eval",
            "--prompts",
            "pr.jsonl",
            "--endpoint",
            &format!("http://{dead}"),
        ],
        &[],
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
    let r = run_in(p, &["eval", "--prompts", "pr.jsonl", "--replay", "nowhere"], &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

/// Serves `{name}|{authorization}` as the completion text for every request.
fn stub(name: &'static str) -> String {
    let l = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = l.local_addr().unwrap();
    std::thread::spawn(move || {
        for s in l.incoming() {
            let Ok(mut s) = s else { continue };
            let mut rd = BufReader::new(s.try_clone().unwrap());
            let mut len = 0;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                if rd.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line["authorization:".len()..].trim().to_string();
                }
            }
            let mut body = vec![0; len];
            let _ = rd.read_exact(&mut body);
            let text = format!("{name}|{auth}");
            let out = serde_json::json!({"choices": [{"text": text}]}).to_string();
            let _ = write!(
                s,
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{out}",
                out.len()
            );
        }
    });
    format!("http://{addr}")
}

fn eval_output(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> String {
    let mut full = vec!["--config", "c.toml", "eval", "--prompts", "pr.jsonl"];
    full.extend_from_slice(args);
    let r = run_in(dir, &full, env);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(r.text().lines().next().unwrap()).unwrap();
    v["output"].as_str().unwrap().to_string()
}

#[test]
fn flags_override_env_override_config() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let (file_ep, env_ep, flag_ep) = (stub("file"), stub("env"), stub("flag"));
    std::fs::write(
        p.join("c.toml"),
        format!("[model]\nendpoint = \"{file_ep}\"\napi_key = \"k-file\"\nname = \"m-file\"\n"),
    )
    .unwrap();
    std::fs::write(
        p.join("pr.jsonl"),
        serde_json::json!({"id": "0", "sample_seed": 0, "prompt": "hi", "answer": ""}).to_string() + "\n",
    )
    .unwrap();

    assert_eq!(eval_output(p, &[], &[]), "file|Bearer k-file");
    assert_eq!(
        eval_output(p, &[], &[("MODEL_ENDPOINT", &env_ep), ("MODEL_API_KEY", "k-env")]),
        "env|Bearer k-env"
    );
    assert_eq!(
        eval_output(
            p,
            &["--endpoint", &flag_ep],
            &[("MODEL_ENDPOINT", &env_ep), ("MODEL_API_KEY", "k-env")]
        ),
        "flag|Bearer k-env"
    );
    assert_eq!(
        eval_output(p, &["--endpoint-env", "OTHER_EP"], &[("OTHER_EP", &env_ep)]),
        "env|Bearer k-file"
    );
    assert_eq!(eval_output(p, &[], &[("MODEL_ENDPOINT", "")]), "file|Bearer k-file");

    // Model names select replay fixtures.
    for (model, answer) in [("m-file", "from file"), ("m-env", "from env"), ("m-flag", "from flag")] {
        write_fixture(&p.join("fx"), &CompletionRequest::new(model, "hi"), answer).unwrap();
    }
    let replay = ["--replay", "fx"];
    assert_eq!(eval_output(p, &replay, &[]), "from file");
    assert_eq!(eval_output(p, &replay, &[("MODEL_NAME", "m-env")]), "from env");
    assert_eq!(
        eval_output(
            p,
            &[&replay[..], &["--model", "m-flag"]].concat(),
            &[("MODEL_NAME", "m-env")]
        ),
        "from flag"
    );
}

#[test]
fn config_sections_drive_generators() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(
        p.join("c.toml"),
        "[v3]\nn_transistors = 5\n\n[toy]\nkind = \"countMasks\"\nlen = 6\n",
    )
    .unwrap();
    let r = ok(p, &["--config", "c.toml", "gen", "v3", "--count", "3"]);
    for l in r.text().lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        assert_eq!(v["specs"].as_array().unwrap().len(), 5);
    }
    let r = ok(p, &["--config", "c.toml", "gen", "toy"]);
    let v: Value = serde_json::from_str(r.text().trim()).unwrap();
    assert_eq!(v["kind"], "countMasks");
    assert_eq!(v["text"].as_str().unwrap().split(',').count(), 6);
    let r = ok(p, &["--config", "c.toml", "gen", "toy", "--kind", "grid4th"]);
    assert!(r.text().contains("\"grid4th\""));

    std::fs::write(p.join("bad.toml"), "[v3]\nbogus = 1\n").unwrap();
    assert_eq!(run_in(p, &["--config", "bad.toml", "gen", "v3"], &[]).code, 2);
}

#[test]
fn masking_prompt_round_trip_through_render() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "v1", "--count", "3", "--seed", "2", "--out", "v1.jsonl"]);
    ok(p, &["mask", "layout", "--in", "v1.jsonl", "--out", "m.jsonl"]);
    ok(p, &["prompt", "masking", "--in", "m.jsonl", "--out", "pm.jsonl"]);
    let prompts = lines(&p.join("pm.jsonl"));
    let masked = lines(&p.join("m.jsonl"));
    for (pr, m) in prompts.iter().zip(&masked) {
        assert_eq!(pr["answer"], format!("'{}'", m["answer"].as_str().unwrap()));
    }
    let raw: String = masked
        .iter()
        .enumerate()
        .map(|(i, m)| {
            serde_json::json!({"id": i.to_string(), "sample_seed": m["sample_seed"], "output": m["answer"]}).to_string()
                + "\n"
        })
        .collect();
    std::fs::write(p.join("raw.jsonl"), raw).unwrap();
    let r = ok(p, &["render", "--in", "m.jsonl", "--pred", "raw.jsonl", "--index", "1"]);
    let svg = r.text();
    let fixed = masked[1]["fixed"].as_array().unwrap().len();
    assert_eq!(svg.matches("<rect").count(), fixed + 2);
    assert!(svg.contains("fill=\"red\""));
}

#[test]
fn v3_prompt_matches_library_renderer() {
    let d = tempfile::tempdir().unwrap();
    three_p_setup(d.path(), "default");
    ok(d.path(), &["prompt", "v3", "--in", "gold.jsonl", "--out", "p.jsonl"]);
    let v = &lines(&d.path().join("p.jsonl"))[0];
    assert_eq!(v["prompt"], render_prompt_v3(&three_p_specs()));
}
