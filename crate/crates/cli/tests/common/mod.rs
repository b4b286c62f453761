#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use placebench::baseline::{column_stack_place, ColumnConfig};
use placebench::layoutgen::{LayoutSample, Version};
use placebench::modelclient::{write_fixture, CompletionRequest};
use placebench::TransistorSpec;

pub const BIN: &str = env!("CARGO_BIN_EXE_placebench");

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Run {
    pub fn text(&self) -> String {
        String::from_utf8(self.stdout.clone()).unwrap()
    }
}

/// Runs the binary in `dir` with a clean model environment.
pub fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut c = Command::new(BIN);
    c.current_dir(dir).args(args);
    for k in ["MODEL_ENDPOINT", "MODEL_API_KEY", "MODEL_NAME"] {
        c.env_remove(k);
    }
    for (k, v) in env {
        c.env(k, v);
    }
    let Output { status, stdout, stderr } = c.output().expect("spawn placebench");
    Run {
        code: status.code().unwrap_or(-1),
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

pub fn ok(dir: &Path, args: &[&str]) -> Run {
    let r = run_in(dir, args, &[]);
    assert_eq!(r.code, 0, "placebench {args:?} failed: {}", r.stderr);
    r
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Commands whose outputs are pinned byte for byte. Each writes `out`.
pub const GOLDEN: &[(&str, &[&str])] = &[
    (
        "netlist.jsonl",
        &[
            "gen",
            "netlist",
            "--seed",
            "3",
            "--count",
            "2",
            "--out",
            "netlist.jsonl",
        ],
    ),
    (
        "toy_grid.jsonl",
        &[
            "gen",
            "toy",
            "--kind",
            "grid4th",
            "--seed",
            "3",
            "--count",
            "3",
            "--out",
            "toy_grid.jsonl",
        ],
    ),
    (
        "toy_index.jsonl",
        &[
            "gen",
            "toy",
            "--kind",
            "index-n",
            "--seed",
            "3",
            "--count",
            "3",
            "--out",
            "toy_index.jsonl",
        ],
    ),
    (
        "toy_count.jsonl",
        &[
            "gen",
            "toy",
            "--kind",
            "count-masks",
            "--seed",
            "3",
            "--count",
            "3",
            "--out",
            "toy_count.jsonl",
        ],
    ),
    (
        "v1.jsonl",
        &["gen", "v1", "--seed", "3", "--count", "4", "--out", "v1.jsonl"],
    ),
    (
        "v2.jsonl",
        &["gen", "v2", "--seed", "3", "--count", "2", "--out", "v2.jsonl"],
    ),
    (
        "v3.jsonl",
        &["gen", "v3", "--seed", "3", "--count", "3", "--out", "v3.jsonl"],
    ),
    (
        "netlist_masked.jsonl",
        &[
            "mask",
            "subgroup",
            "--in",
            "netlist.jsonl",
            "--k",
            "2",
            "--seed",
            "5",
            "--out",
            "netlist_masked.jsonl",
        ],
    ),
    (
        "v1_masked.jsonl",
        &[
            "mask",
            "layout",
            "--in",
            "v1.jsonl",
            "--seed",
            "5",
            "--out",
            "v1_masked.jsonl",
        ],
    ),
    (
        "prompt_v1.jsonl",
        &[
            "prompt",
            "v1",
            "--in",
            "v1.jsonl",
            "--shots",
            "2",
            "--out",
            "prompt_v1.jsonl",
        ],
    ),
    (
        "prompt_v2.jsonl",
        &["prompt", "v2", "--in", "v2.jsonl", "--out", "prompt_v2.jsonl"],
    ),
    (
        "prompt_v3.jsonl",
        &["prompt", "v3", "--in", "v3.jsonl", "--out", "prompt_v3.jsonl"],
    ),
    (
        "prompt_masking.jsonl",
        &[
            "prompt",
            "masking",
            "--in",
            "v1_masked.jsonl",
            "--out",
            "prompt_masking.jsonl",
        ],
    ),
    (
        "baseline_v3.jsonl",
        &[
            "baseline",
            "--in",
            "v3.jsonl",
            "--algo",
            "mirror",
            "--out",
            "baseline_v3.jsonl",
        ],
    ),
    (
        "render_v1.svg",
        &["render", "--in", "v1.jsonl", "--index", "1", "--out", "render_v1.svg"],
    ),
    (
        "render_masked.svg",
        &["render", "--in", "v1_masked.jsonl", "--out", "render_masked.svg"],
    ),
    (
        "render_v3.svg",
        &[
            "render",
            "--in",
            "v3.jsonl",
            "--pred",
            "baseline_v3.jsonl",
            "--index",
            "2",
            "--out",
            "render_v3.svg",
        ],
    ),
];

/// Runs the golden suite twice in fresh directories. Returns mismatch messages.
pub fn golden_mismatches() -> Vec<String> {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    for (name, args) in GOLDEN {
        for dir in [a.path(), b.path()] {
            let r = run_in(dir, args, &[]);
            if r.code != 0 {
                bad.push(format!("{name}: exit {} ({})", r.code, r.stderr.trim()));
            }
        }
        let first = std::fs::read(a.path().join(name)).unwrap_or_default();
        let second = std::fs::read(b.path().join(name)).unwrap_or_default();
        if first != second {
            bad.push(format!("{name}: differs between runs"));
        }
        let pinned = golden_dir().join(name);
        if update {
            std::fs::create_dir_all(golden_dir()).unwrap();
            std::fs::write(&pinned, &first).unwrap();
        } else {
            match std::fs::read(&pinned) {
                Ok(g) if g == first => {}
                Ok(_) => bad.push(format!("{name}: differs from golden file")),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
    }
    bad
}

/// Three P transistors from the all-at-once prompt example, in prompt order.
#[allow(clippy::approx_constant)]
pub fn three_p_specs() -> Vec<TransistorSpec> {
    [("sb2", 3.92), ("sb1", 3.14), ("sb0", 2.75)]
        .into_iter()
        .map(|(id, w)| TransistorSpec {
            id: id.into(),
            ttype: "P".into(),
            width: w,
            height: 8.36,
        })
        .collect()
}

pub fn three_p_gold() -> LayoutSample {
    let specs = three_p_specs();
    let placements = column_stack_place(&specs, &ColumnConfig::default()).unwrap();
    LayoutSample {
        version: Version::V3,
        seed: 42,
        axis: 0.0,
        symmetric: false,
        specs,
        placements: placements.iter().map(|p| p.rect()).collect(),
        grid: None,
        records: None,
        perturbation: None,
    }
}

/// A chatty model answer for the three-transistor prompt.
pub const THREE_P_ANSWER: &str = "Sure. Placing the widest device on the axis and the others beside it:\n\n```json\n[\n  {\"id\": \"sb2\", \"type\": \"P\", \"x\": 3.92, \"y\": 8.36, \"c_x\": 0.0, \"c_y\": 4.18},\n  {\"id\": \"sb1\", \"type\": \"P\", \"x\": 3.14, \"y\": 8.36, \"c_x\": -3.53, \"c_y\": 4.18},\n  {\"id\": \"sb0\", \"type\": \"P\", \"x\": 2.75, \"y\": 8.36, \"c_x\": 3.335, \"c_y\": 4.18},\n]\n```\n";

/// Writes the gold file and a replay fixture for the three-transistor prompt.
pub fn three_p_setup(dir: &Path, model: &str) {
    let gold = three_p_gold();
    std::fs::write(dir.join("gold.jsonl"), serde_json::to_string(&gold).unwrap() + "\n").unwrap();
    let prompt = placebench::promptio::render_prompt_v3(&gold.specs);
    write_fixture(
        &dir.join("fixtures"),
        &CompletionRequest::new(model, prompt),
        THREE_P_ANSWER,
    )
    .unwrap();
}

pub const PIPELINE: &[&[&str]] = &[
    &["prompt", "v3", "--in", "gold.jsonl", "--out", "prompts.jsonl"],
    &[
        "eval",
        "--prompts",
        "prompts.jsonl",
        "--replay",
        "fixtures",
        "--out",
        "raw.jsonl",
    ],
    &["extract", "--in", "raw.jsonl", "--out", "placements.jsonl"],
    &[
        "score",
        "--pred",
        "placements.jsonl",
        "--gold",
        "gold.jsonl",
        "--out",
        "report.csv",
        "--reports",
        "reports.jsonl",
        "--summary",
        "summary.json",
    ],
    &[
        "render",
        "--in",
        "gold.jsonl",
        "--pred",
        "placements.jsonl",
        "--out",
        "layout.svg",
    ],
];

pub const PIPELINE_OUTPUTS: &[&str] = &[
    "prompts.jsonl",
    "raw.jsonl",
    "placements.jsonl",
    "report.csv",
    "reports.jsonl",
    "summary.json",
    "layout.svg",
];

pub fn run_pipeline(dir: &Path, jobs: &str) {
    for step in PIPELINE {
        let mut args = vec!["--jobs", jobs];
        args.extend_from_slice(step);
        ok(dir, &args);
    }
}
