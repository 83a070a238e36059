mod support;

use adsched_core::{Manifest, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use support::{code, fixture, p, run, sha256_file, stderr};

fn small() -> support::Fixture {
    fixture(&support::five_task_counts(600), 8, 1)
}

fn codebook(fx: &support::Fixture) -> std::path::PathBuf {
    let out = fx.path("cb.bin");
    let o = run(&[
        "build-codebook", "--manifest", p(&fx.manifest), "--embeddings", p(&fx.embeddings),
        "--k", "10", "--subset-fraction", "0.1", "--seed", "3", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn build_codebook_reports_fit() {
    let fx = small();
    let out = fx.path("cb.bin");
    let o = run(&[
        "build-codebook", "--manifest", p(&fx.manifest), "--embeddings", p(&fx.embeddings),
        "--k", "10", "--subset-fraction", "0.1", "--out", p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("K = 10") && err.contains("subset size = 60") && err.contains("inertia"), "{err}");
    let cb = adsched_core::Codebook::load(&out).unwrap();
    assert_eq!((cb.k(), cb.dim(), cb.assignment().len()), (10, 8, 600));
}

#[test]
fn build_codebook_defaults_to_500_and_three_percent() {
    let fx = small();
    let o = run(&[
        "build-codebook", "--manifest", p(&fx.manifest), "--embeddings", p(&fx.embeddings),
        "--out", p(&fx.path("cb.bin")),
    ]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("18 samples") && err.contains("K = 500"), "{err}");
    assert!(!fx.path("cb.bin").exists());
}

#[test]
fn build_codebook_missing_embeddings_is_a_runtime_error() {
    let fx = small();
    std::fs::remove_file(fx.embeddings.join("asr/asr-00000.emb")).unwrap();
    let o = run(&[
        "build-codebook", "--manifest", p(&fx.manifest), "--embeddings", p(&fx.embeddings),
        "--k", "5", "--subset-fraction", "0.1", "--out", p(&fx.path("cb.bin")),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = run(&[
        "build-codebook", "--manifest", p(&fx.manifest), "--embeddings", p(&fx.path("nowhere")),
        "--k", "5", "--out", p(&fx.path("cb.bin")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn plan_batches_regimes_and_errors() {
    let fx = small();
    let cfg = fx.write("sm.toml", "regime = \"sm\"\nbatch_size = 16\ntotal_steps = 20\nseed = 4\n");
    let out = fx.path("plan.jsonl");
    let o = run(&["plan-batches", "--manifest", p(&fx.manifest), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["provenance"]["seed"], 4);
    assert_eq!(first["provenance"]["tool"], "adsched");
    assert_eq!(first["provenance"]["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(text.lines().count(), 21);
    assert!(stderr(&o).contains("items"));

    let ads = fx.write("ads.toml", "regime = \"ads\"\nbatch_size = 64\ntotal_steps = 5\n");
    let o = run(&["plan-batches", "--manifest", p(&fx.manifest), "--config", p(&ads), "--out", p(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--codebook"), "{}", stderr(&o));

    let bad = fx.write("bad.toml", "regime = \"hybrid\"\nbatch_size = 64\ntotal_steps = 5\nswitch_step = 9\n");
    let o = run(&["plan-batches", "--manifest", p(&fx.manifest), "--config", p(&bad), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    let unknown = fx.write("unk.toml", "regime = \"sm\"\nbatch_size = 4\ntotal_steps = 5\nbogus = 1\n");
    let o = run(&["plan-batches", "--manifest", p(&fx.manifest), "--config", p(&unknown), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));
}

#[test]
fn plans_are_byte_identical_and_flags_override() {
    let fx = small();
    let cb = codebook(&fx);
    let mut hashes = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let out = fx.path(name);
        let o = run(&[
            "plan-batches", "--manifest", p(&fx.manifest), "--codebook", p(&cb), "--regime", "hybrid",
            "--batch-size", "128", "--total-steps", "30", "--switch-step", "12", "--seed", "8",
            "--replay-fraction", "0.3", "--emit-lr", "--out", p(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        hashes.push(sha256_file(&out));
    }
    assert_eq!(hashes[0], hashes[1]);
    let text = std::fs::read_to_string(fx.path("a.jsonl")).unwrap();
    let batches: Vec<Value> = text.lines().skip(1).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(batches[11]["regime"], "tpc");
    assert_eq!(batches[12]["regime"], "ads");
    assert!(batches.iter().all(|b| b["lr"].as_f64().unwrap() > 0.0));

    let o = run(&[
        "validate-plan", "--plan", p(&fx.path("a.jsonl")), "--manifest", p(&fx.manifest), "--codebook", p(&cb),
        "--regime", "hybrid", "--batch-size", "128", "--total-steps", "30", "--switch-step", "12",
        "--seed", "8", "--replay-fraction", "0.3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn plan_and_validate(fx: &support::Fixture, cfg_text: &str, cb: Option<&std::path::Path>) -> (std::path::PathBuf, std::path::PathBuf) {
    let cfg = fx.write("cfg.toml", cfg_text);
    let out = fx.path("plan.jsonl");
    let mut args = vec!["plan-batches", "--manifest", p(&fx.manifest), "--config", p(&cfg), "--out", p(&out)];
    if let Some(c) = cb {
        args.extend(["--codebook", p(c)]);
    }
    let o = run(&args);
    assert_eq!(code(&o), 0, "{cfg_text}\n{}", stderr(&o));
    (cfg, out)
}

fn validate(fx: &support::Fixture, plan: &std::path::Path, cfg: &std::path::Path, cb: Option<&std::path::Path>) -> std::process::Output {
    let mut args = vec!["validate-plan", "--plan", p(plan), "--manifest", p(&fx.manifest), "--config", p(cfg)];
    if let Some(c) = cb {
        args.extend(["--codebook", p(c)]);
    }
    run(&args)
}

#[test]
fn validate_plan_catches_mutations() {
    let fx = small();
    let (cfg, plan) = plan_and_validate(&fx, "regime = \"tpc\"\nbatch_size = 16\ntotal_steps = 40\nseed = 2\n", None);
    assert_eq!(code(&validate(&fx, &plan, &cfg, None)), 0);

    let text = std::fs::read_to_string(&plan).unwrap();
    let mut lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();

    let mut deleted = lines.clone();
    deleted[5]["items"].as_array_mut().unwrap().pop();
    let path = fx.write("deleted.jsonl", &to_lines(&deleted));
    let o = validate(&fx, &path, &cfg, None);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("batch size violation"), "{}", stderr(&o));

    let m = Manifest::load(&fx.manifest).unwrap();
    let ssum = m.samples().iter().find(|s| s.task == Task::Ssum).unwrap();
    lines[1]["items"][0] = serde_json::json!({
        "id": ssum.id, "task": "ssum", "label": ssum.group_label(), "cluster": null
    });
    let path = fx.write("injected.jsonl", &to_lines(&lines));
    let o = validate(&fx, &path, &cfg, None);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("stage containment violation"), "{}", stderr(&o));

    let path = fx.write("garbage.jsonl", "{\"step\": 0, \"items\": ");
    assert_eq!(code(&validate(&fx, &path, &cfg, None)), 1);
}

fn to_lines(v: &[Value]) -> String {
    v.iter().map(|x| format!("{x}\n")).collect()
}

#[test]
fn validate_accepts_random_emitted_plans() {
    let fx = small();
    let cb = codebook(&fx);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..100 {
        let regime = ["sm", "tpc", "ads", "hybrid"][case % 4];
        let batch = rng.random_range(128..400);
        let total = rng.random_range(1..40);
        let seed: u64 = rng.random();
        let mut text = format!("regime = \"{regime}\"\nbatch_size = {batch}\ntotal_steps = {total}\nseed = {seed}\n");
        if regime == "hybrid" {
            text.push_str(&format!("switch_step = {}\n", rng.random_range(0..=total)));
        }
        if rng.random_bool(0.5) {
            text.push_str(&format!("replay_fraction = {}\n", rng.random_range(0.0..0.9)));
        }
        let needs = matches!(regime, "ads" | "hybrid");
        let (cfg, plan) = plan_and_validate(&fx, &text, needs.then_some(cb.as_path()));
        let o = validate(&fx, &plan, &cfg, needs.then_some(cb.as_path()));
        assert_eq!(code(&o), 0, "{text}\n{}", stderr(&o));
    }
}

fn pairs_file(fx: &support::Fixture, name: &str, rows: &[Value]) -> std::path::PathBuf {
    fx.write(name, &to_lines(rows))
}

#[test]
fn eval_metrics() {
    let fx = small();
    let same = pairs_file(&fx, "same.jsonl", &[
        serde_json::json!({"id":"1","reference":"the cat sat","hypothesis":"the cat sat","task":"asr","lang":"en"}),
        serde_json::json!({"id":"2","reference":"ذَهَبَ أحمد","hypothesis":"ذهب احمد","task":"asr","lang":"ar"}),
    ]);
    for (metric, want) in [("wer", 0.0), ("rouge", 1.0)] {
        let out = fx.path(&format!("{metric}.json"));
        let o = run(&["eval", metric, "--pairs", p(&same), "--out", p(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_eq!(r["reports"][0]["score"].as_f64().unwrap(), want);
    }

    let cls = pairs_file(&fx, "cls.jsonl", &[
        serde_json::json!({"id":"1","reference":"Saudi Arabia","hypothesis":"KSA","task":"did","lang":"ar"}),
        serde_json::json!({"id":"2","reference":"Egypt","hypothesis":"The dialect is Egyptian.","task":"did","lang":"ar"}),
    ]);
    let out = fx.path("f1.json");
    let items = fx.path("items.jsonl");
    let o = run(&["eval", "f1", "--pairs", p(&cls), "--out", p(&out), "--per-item", p(&items)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["reports"][0]["task"], "did");
    let first: Value = serde_json::from_str(std::fs::read_to_string(&items).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(first["predicted"], "Saudi Arabia");

    let empty = fx.write("empty.jsonl", "");
    assert_eq!(code(&run(&["eval", "wer", "--pairs", p(&empty)])), 1);
    let broken = fx.write("broken.jsonl", "{\"id\":\"1\"}\n");
    assert_eq!(code(&run(&["eval", "wer", "--pairs", p(&broken)])), 1);
    assert_eq!(code(&run(&["eval", "wer", "--pairs", p(&fx.path("missing.jsonl"))])), 2);
}

#[test]
fn eval_wer_runs_the_quality_gate() {
    let fx = small();
    // group g1: candidates at WER 0.1 and 0.2; group g2: only 0.2
    let ten = "a b c d e f g h i j";
    let rows = [
        serde_json::json!({"id":"c1","reference":ten,"hypothesis":"a b c d e f g h i x","task":"asr","lang":"en","group":"g1"}),
        serde_json::json!({"id":"c2","reference":ten,"hypothesis":"a b c d e f g h x x","task":"asr","lang":"en","group":"g1"}),
        serde_json::json!({"id":"c3","reference":ten,"hypothesis":"a b c d e f g h x x","task":"asr","lang":"en","group":"g2"}),
    ];
    let pairs = pairs_file(&fx, "gate.jsonl", &rows);
    let o = run(&["eval", "wer", "--pairs", p(&pairs)]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let sel = r["gate"]["selected"].as_array().unwrap();
    assert_eq!(sel.len(), 1);
    assert_eq!(sel[0]["id"], "c1");
    assert_eq!(r["gate"]["threshold"], 0.15);
    let o = run(&["eval", "wer", "--pairs", p(&pairs), "--threshold", "0.25"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["gate"]["selected"].as_array().unwrap().len(), 2);
}

#[test]
fn stats_counts_hours_and_labels() {
    let fx = fixture(&[(Task::Asr, 40), (Task::Did, 25)], 4, 5);
    let out = fx.path("stats.json");
    let o = run(&["stats", "--manifest", p(&fx.manifest), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let tasks = r["tasks"].as_object().unwrap();
    assert_eq!(tasks.len(), 2);
    assert_eq!(tasks["asr"]["samples"], 40);
    assert_eq!(tasks["did"]["samples"], 25);

    let m = Manifest::load(&fx.manifest).unwrap();
    let mut secs = 0.0;
    for s in m.samples().iter().filter(|s| s.task == Task::Did) {
        secs += s.duration_s;
    }
    assert!((tasks["did"]["hours"].as_f64().unwrap() - secs / 3600.0).abs() < 1e-12);
    let present: std::collections::BTreeSet<&str> =
        m.samples().iter().filter_map(|s| s.label.as_deref()).collect();
    let hist: std::collections::BTreeSet<&str> =
        tasks["did"]["labels"].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(hist, present);
    assert!(tasks["asr"].get("labels").is_none());

    let bad = fx.write("bad.jsonl", "{\"id\":\"x\",\"task\":\"did\",\"label\":\"Mars\",\"lang\":\"ar\",\"duration_s\":1,\"embedding_ref\":\"x\",\"text\":null}\n");
    assert_eq!(code(&run(&["stats", "--manifest", p(&bad)])), 1);
}

#[test]
fn judge_requests() {
    let fx = small();
    let rows = [
        serde_json::json!({"id":"s1","reference":"ملخص {x}","hypothesis":"ملخص آخر","task":"ssum","lang":"ar"}),
        serde_json::json!({"id":"s2","reference":"a summary","hypothesis":"another","task":"tsum","lang":"en"}),
    ];
    let pairs = pairs_file(&fx, "pairs.jsonl", &rows);
    let out = fx.path("req.jsonl");
    let o = run(&["emit-judge-requests", "--pairs", p(&pairs), "--kind", "summary", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reqs: Vec<Value> = std::fs::read_to_string(&out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(reqs.len(), 2);
    let user = reqs[0]["messages"][1]["content"].as_str().unwrap();
    assert!(user.starts_with("Language: ar\nReference summary: ملخص {x}\n"), "{user}");
    assert!(reqs[0]["messages"][0]["content"].as_str().unwrap().starts_with("You are a reference-grounded"));

    let o = run(&["emit-judge-requests", "--pairs", p(&pairs), "--kind", "translation", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let req: Value = serde_json::from_str(std::fs::read_to_string(&out).unwrap().lines().next().unwrap()).unwrap();
    assert!(req["messages"][0]["content"].as_str().unwrap().contains("Ignore all anonymization tokens in English."));
    assert!(req["messages"][1]["content"].as_str().unwrap().starts_with("Arabic translation:\nملخص آخر\n"));

    let empty = pairs_file(&fx, "e.jsonl", &[serde_json::json!({"id":"x","reference":"r","hypothesis":"  ","task":"ssum","lang":"en"})]);
    let o = run(&["emit-judge-requests", "--pairs", p(&empty), "--kind", "summary", "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    let missing = fx.write("m.jsonl", "{\"id\":\"x\",\"reference\":\"r\",\"task\":\"ssum\",\"lang\":\"en\"}\n");
    let o = run(&["emit-judge-requests", "--pairs", p(&missing), "--kind", "summary", "--out", p(&out)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_and_version() {
    assert_eq!(code(&run(&["plan-batches"])), 2);
    let o = run(&["--version"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("adsched"));
}
