//! Exit-code and reproducibility contract of the qrainbow binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qrainbow::dictgen::SmartDictionary;
use qrainbow::rainbow::{full_hash, HashAlgorithm, RainbowTable};

const DICT_TEXT: &str = "\
# integration-test dictionary (N = 64 * 2 * 32 = 4096)
[words]
";

fn dict_text() -> String {
    let mut text = String::from(DICT_TEXT);
    for i in 0..64 {
        text.push_str(&format!("w{i:02}\n"));
    }
    text.push_str("[numbers]\n");
    for i in 0..32 {
        text.push_str(&format!("{i}\n"));
    }
    text.push_str("[pattern]\nWN\n[rules]\ncaseshift W 2\n");
    text
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qrainbow"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

struct Workspace {
    _dir: tempfile::TempDir,
    dict: PathBuf,
    table: PathBuf,
}

fn setup() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let dict = dir.path().join("demo.dict");
    std::fs::write(&dict, dict_text()).unwrap();
    let table = dir.path().join("demo.rtbl");
    Workspace {
        _dir: dir,
        dict,
        table,
    }
}

fn gen_table(ws: &Workspace, extra: &[&str]) -> Output {
    let mut args = vec![
        "table",
        "gen",
        "--dict",
        ws.dict.to_str().unwrap(),
        "--out",
        ws.table.to_str().unwrap(),
        "--t",
        "12",
        "--m",
        "48",
        "--seed",
        "9",
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn dict_check_contract() {
    let ws = setup();
    let out = run(&["dict", "check", ws.dict.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("N: 4096"), "{stdout}");

    let bad = ws.dict.with_extension("broken");
    std::fs::write(&bad, "[words]\npass\npass\n[pattern]\nW\n").unwrap();
    let out = run(&["dict", "check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("twice"));
}

#[test]
fn table_gen_determinism_and_limits() {
    let ws = setup();
    let out = gen_table(&ws, &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("hash_evals=576"), "{summary}");
    let first = std::fs::read(&ws.table).unwrap();

    // same seed, byte-identical file
    let out = gen_table(&ws, &[]);
    assert_eq!(code(&out), 0);
    assert_eq!(first, std::fs::read(&ws.table).unwrap());

    // different seed, different bytes
    let other = ws.table.with_extension("other");
    let out = run(&[
        "table", "gen", "--dict", ws.dict.to_str().unwrap(), "--out",
        other.to_str().unwrap(), "--t", "12", "--m", "48", "--seed", "10",
    ]);
    assert_eq!(code(&out), 0);
    assert_ne!(first, std::fs::read(&other).unwrap());

    // m > N is a parameter error
    let out = run(&[
        "table", "gen", "--dict", ws.dict.to_str().unwrap(), "--out",
        ws.table.to_str().unwrap(), "--t", "12", "--m", "5000", "--seed", "9",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn config_file_merging() {
    let ws = setup();
    let cfg = ws.dict.with_extension("conf");
    std::fs::write(
        &cfg,
        format!(
            "dict={}\nout={}\nt=12\nm=48\nseed=9\n",
            ws.dict.display(),
            ws.table.display()
        ),
    )
    .unwrap();
    let out = run(&["table", "gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let from_config = std::fs::read(&ws.table).unwrap();
    let direct = gen_table(&ws, &[]);
    assert_eq!(code(&direct), 0);
    assert_eq!(from_config, std::fs::read(&ws.table).unwrap());

    // flags override the file: a different seed changes the output
    let out = run(&[
        "table", "gen", "--config", cfg.to_str().unwrap(), "--seed", "10",
    ]);
    assert_eq!(code(&out), 0);
    assert_ne!(from_config, std::fs::read(&ws.table).unwrap());

    // unknown keys are rejected
    std::fs::write(&cfg, "t=12\nwhatever=1\n").unwrap();
    let out = run(&["table", "gen", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

/// Hash of a mid-chain plaintext, computed through the library.
fn known_column_hash(ws: &Workspace) -> String {
    let dict = SmartDictionary::from_file(Path::new(&ws.dict)).unwrap();
    let table = RainbowTable::load(&ws.table, dict.clone()).unwrap();
    let row = &table.rows()[7];
    let mut index = row.start_index;
    let mut digest = full_hash(HashAlgorithm::Sha1, &dict.index_to_plain(index).unwrap());
    for step in 1..=5u64 {
        let plaintext = dict.index_to_plain(index).unwrap();
        digest = full_hash(HashAlgorithm::Sha1, &plaintext);
        index = qrainbow::rainbow::hash_to_index(&digest, dict.space_size(), step);
    }
    digest.to_hex()
}

#[test]
fn crack_contract() {
    let ws = setup();
    assert_eq!(code(&gen_table(&ws, &[])), 0);
    let target = known_column_hash(&ws);
    let dict = ws.dict.to_str().unwrap().to_string();
    let table = ws.table.to_str().unwrap().to_string();

    // bucket sidecar via the CLI
    let out = run(&["table", "buckets", "--table", &table]);
    assert_eq!(code(&out), 0);
    let sidecar = format!("{table}.buckets");
    assert!(Path::new(&sidecar).exists());

    // dega engine finds the plaintext
    let out = run(&[
        "crack", &target, "--dict", &dict, "--table", &table, "--buckets", &sidecar,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let plaintext = stdout.lines().next().unwrap().to_string();
    assert!(stdout.lines().nth(1).unwrap().starts_with("counters:"));

    // classical engine agrees
    let out = run(&[
        "crack", &target, "--dict", &dict, "--table", &table, "--engine", "classical",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().next().unwrap(),
        plaintext
    );

    // a foreign hash is NOT_FOUND with exit 1
    let foreign = full_hash(HashAlgorithm::Sha1, "@@nowhere@@").to_hex();
    let out = run(&["crack", &foreign, "--dict", &dict, "--table", &table]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("NOT_FOUND"));

    // malformed hex is exit 2
    let out = run(&["crack", "zz-not-hex", "--dict", &dict, "--table", &table]);
    assert_eq!(code(&out), 2);

    // wrong digest length is exit 2
    let out = run(&["crack", "deadbeef", "--dict", &dict, "--table", &table]);
    assert_eq!(code(&out), 2);

    // a dictionary with a different space is a mismatch, exit 4
    let other_dict = ws.dict.with_extension("small");
    std::fs::write(&other_dict, "[words]\npass\nadmin\n[pattern]\nW\n").unwrap();
    let out = run(&[
        "crack", &target, "--dict", other_dict.to_str().unwrap(), "--table", &table,
    ]);
    assert_eq!(code(&out), 4);

    // a sidecar from a different table is a mismatch, exit 4
    let other_table = ws.table.with_extension("alt");
    let out = run(&[
        "table", "gen", "--dict", &dict, "--out", other_table.to_str().unwrap(),
        "--t", "12", "--m", "40", "--seed", "77",
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "table", "buckets", "--table", other_table.to_str().unwrap(),
        "--out", &sidecar,
    ]);
    assert_eq!(code(&out), 0);
    let out = run(&[
        "crack", &target, "--dict", &dict, "--table", &table, "--buckets", &sidecar,
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn sha256_tables_work_end_to_end() {
    let ws = setup();
    let out = gen_table(&ws, &["--hash", "sha256"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let dict = SmartDictionary::from_file(Path::new(&ws.dict)).unwrap();
    let table = RainbowTable::load(&ws.table, dict.clone()).unwrap();
    let target = full_hash(HashAlgorithm::Sha256, &table.rows()[0].end_plaintext).to_hex();
    let out = run(&[
        "crack", &target, "--dict", ws.dict.to_str().unwrap(),
        "--table", ws.table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // a sha1-length target against a sha256 table is malformed input
    let short = full_hash(HashAlgorithm::Sha1, "x").to_hex();
    let out = run(&[
        "crack", &short, "--dict", ws.dict.to_str().unwrap(),
        "--table", ws.table.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_noise_csv() {
    let ws = setup();
    let csv_path = ws.dict.with_extension("noise.csv");
    let out = run(&[
        "bench", "noise", "--p-grid", "0:0.02:0.01", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,variant,success_probability");
    assert_eq!(lines.len(), 1 + 3 * 3);
    // p = 0 rows: dega exactly 1, original at the closed-form value
    assert_eq!(lines[1], "0.0000,original,0.961318970");
    assert_eq!(lines[3], "0.0000,dega,1.000000000");

    // byte-identical rerun
    let first = std::fs::read(&csv_path).unwrap();
    let out = run(&[
        "bench", "noise", "--p-grid", "0:0.02:0.01", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(first, std::fs::read(&csv_path).unwrap());
}

#[test]
fn bench_success_csv() {
    let ws = setup();
    let csv_path = ws.dict.with_extension("success.csv");
    let out = run(&["bench", "success", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,tau,variant,success_probability");
    assert_eq!(lines.len(), 1 + 4 * 3);
    assert!(text.contains("5,01011,dega,1.000000000"), "{text}");
    assert!(text.contains("2,11,original,1.000000000"), "{text}");
    assert!(text.contains("3,001,original,0.945312500"), "{text}");

    // exhaustive sweep covers every target of n = 2..5
    let out = run(&["bench", "success", "--exhaustive", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().count(), 1 + (4 + 8 + 16 + 32) * 3);
}

#[test]
fn bench_shots_sampling_is_seeded() {
    let ws = setup();
    let csv_path = ws.dict.with_extension("shots.csv");
    let args = [
        "bench", "noise", "--p-grid", "0:0.01:0.01", "--shots", "200",
        "--seed", "3", "--out", csv_path.to_str().unwrap(),
    ];
    assert_eq!(code(&run(&args)), 0);
    let first = std::fs::read(&csv_path).unwrap();
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(first, std::fs::read(&csv_path).unwrap());
    // noiseless dega still hits every shot
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("0.0000,dega,1.000000000"), "{text}");
}
