use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SAMPLE: &str =
    "a:1 c:2 c:3\nb:5 c:2 e:8 b:6\na:2 c:2 f:10\na:2 a:1 a:2 b:6 c:3 a:3\nd:1 a:1 b:4\n";
const SAMPLE_SPMF: &str = "a[1] -1 c[2] -1 c[3] -1 -2 SUtility:6\n\
b[5] -1 c[2] -1 e[8] -1 b[6] -1 -2 SUtility:21\n\
a[2] -1 c[2] -1 f[10] -1 -2 SUtility:14\n\
a[2] -1 a[1] -1 a[2] -1 b[6] -1 c[3] -1 a[3] -1 -2 SUtility:17\n\
d[1] -1 a[1] -1 b[4] -1 -2 SUtility:6\n";

fn seqrule(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_seqrule"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn mine_sample_emits_four_rules() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let out = seqrule(&[
        "mine",
        s(&input),
        "--delta",
        "0.1",
        "--minconf",
        "0.6",
        "--sort",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "b ==> c #UTIL: 16 #SUP: 2 #CONF: 0.6667\n\
         c,e ==> b #UTIL: 16 #SUP: 1 #CONF: 1.0000\n\
         e ==> b #UTIL: 14 #SUP: 1 #CONF: 1.0000\n\
         a ==> c #UTIL: 13 #SUP: 3 #CONF: 0.7500\n"
    );
    let err = stderr(&out);
    assert!(err.contains("# minutil=64/10"));
    assert!(err.contains("rules=4"));
}

#[test]
fn spmf_input_matches_native() {
    let dir = TempDir::new().unwrap();
    let native = fixture(&dir, "t1.db", SAMPLE);
    let spmf = fixture(&dir, "t1.txt", SAMPLE_SPMF);
    let a = seqrule(&["mine", s(&native), "--minutil", "6.4"]);
    let b = seqrule(&["mine", s(&spmf), "--minutil", "6.4"]);
    assert_eq!(b.status.code(), Some(0), "{}", stderr(&b));
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn threshold_above_total_gives_no_rules() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let out = seqrule(&["mine", s(&input), "--minutil", "64.01"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "");
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let both = seqrule(&["mine", s(&input), "--delta", "0.1", "--minutil", "3"]);
    assert_eq!(both.status.code(), Some(2));
    assert!(stderr(&both).contains("mutually exclusive flags"));
    assert_eq!(seqrule(&["mine", s(&input)]).status.code(), Some(2));
    assert_eq!(
        seqrule(&["mine", s(&input), "--delta", "0.1", "--minconf", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        seqrule(&["mine", s(&input), "--delta", "0.1", "--minconf", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        seqrule(&["mine", s(&dir.path().join("missing.db")), "--delta", "0.1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn parse_errors_exit_2_with_line_number() {
    let dir = TempDir::new().unwrap();
    let bad = fixture(&dir, "bad.db", "a:1 b:2\nc:x\n");
    let out = seqrule(&["mine", s(&bad), "--minutil", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    let itemset = fixture(&dir, "bad.spmf", "a[1] b[2] -1 -2\n");
    let out = seqrule(&["mine", s(&itemset), "--minutil", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("simultaneous events unsupported"));
}

#[test]
fn stats_and_files() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let out = seqrule(&["stats", s(&input)]);
    let text = stdout(&out);
    for line in [
        "sequences=5",
        "distinct_items=6",
        "avg_length=3.80",
        "max_length=6",
        "total_utility=64",
    ] {
        assert!(
            text.lines().any(|l| l == line),
            "{line} missing from {text}"
        );
    }
    let rules = dir.path().join("rules.txt");
    let stats = dir.path().join("stats.txt");
    let out = seqrule(&[
        "mine",
        s(&input),
        "--delta",
        "0.1",
        "--out",
        s(&rules),
        "--stats",
        s(&stats),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&rules).unwrap().lines().count(), 4);
    let stats = fs::read_to_string(&stats).unwrap();
    let keys: Vec<&str> = stats
        .lines()
        .map(|l| l.split('=').next().unwrap())
        .collect();
    assert_eq!(
        keys,
        [
            "sequences",
            "distinct_items",
            "items_after_pruning",
            "minutil_num",
            "minutil_den",
            "candidates",
            "rules",
            "srtgrowth_calls",
            "rrs_prunes",
            "runtime_ms"
        ]
    );
}

#[test]
fn gen_is_deterministic_and_threads_do_not_change_output() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.db");
    let b = dir.path().join("b.db");
    let gen = |p: &Path| {
        seqrule(&[
            "gen",
            "--sequences",
            "500",
            "--alphabet",
            "60",
            "--avg-length",
            "8",
            "--max-length",
            "30",
            "--seed",
            "5",
            "--out",
            s(p),
        ])
    };
    assert_eq!(gen(&a).status.code(), Some(0));
    assert_eq!(gen(&b).status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let r1 = dir.path().join("r1.txt");
    let r4 = dir.path().join("r4.txt");
    let run = |threads: &str, out: &Path| {
        seqrule(&[
            "mine",
            s(&a),
            "--delta",
            "0.01",
            "--minconf",
            "0.4",
            "--threads",
            threads,
            "--out",
            s(out),
        ])
    };
    assert_eq!(run("1", &r1).status.code(), Some(0));
    assert_eq!(run("4", &r4).status.code(), Some(0));
    let serial = fs::read(&r1).unwrap();
    assert!(!serial.is_empty());
    assert_eq!(serial, fs::read(&r4).unwrap());
}

#[test]
fn gen_rejects_bad_params() {
    let out = seqrule(&["gen", "--alphabet", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = seqrule(&["gen", "--avg-length", "80", "--max-length", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_agrees_and_detects_corruption() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let ok = seqrule(&["verify", s(&input), "--delta", "0.1"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("verify: ok (4 rules)"));
    let bad = seqrule(&["verify", s(&input), "--delta", "0.1", "--corrupt-miner"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("oracle only"));
    let capped = seqrule(&["verify", s(&input), "--minutil", "1", "--max-len", "2"]);
    assert_eq!(capped.status.code(), Some(3));
}

#[test]
fn oracle_command_matches_mine() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let oracle = seqrule(&["oracle", s(&input), "--delta", "0.1"]);
    assert_eq!(oracle.status.code(), Some(0));
    let mut a: Vec<String> = stdout(&oracle).lines().map(str::to_owned).collect();
    let mine = seqrule(&["mine", s(&input), "--delta", "0.1"]);
    let mut b: Vec<String> = stdout(&mine).lines().map(str::to_owned).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn bench_reports_every_variant() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "t1.db", SAMPLE);
    let out = seqrule(&["bench", s(&input), "--delta", "0.1", "--repeat", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for v in ["rsc", "rscn", "rscp", "rscr"] {
        assert!(text.contains(&format!("variant={v}\n")));
    }
    assert_eq!(text.matches("rules=4\n").count(), 4);
    let out = seqrule(&[
        "bench",
        s(&input),
        "--delta",
        "0.1",
        "--variants",
        "rsc,nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_seeded_random_db() {
    let dir = TempDir::new().unwrap();
    let db = dir.path().join("r.db");
    let out = seqrule(&[
        "gen",
        "--sequences",
        "6",
        "--alphabet",
        "5",
        "--avg-length",
        "4",
        "--max-length",
        "8",
        "--seed",
        "42",
        "--out",
        s(&db),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for delta in ["0.01", "0.1", "0.3"] {
        let out = seqrule(&["verify", s(&db), "--delta", delta, "--minconf", "0.5"]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    }
}

#[test]
fn bench_on_empty_db_reports_zero_counters() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "empty.db", "");
    let out = seqrule(&["bench", s(&input), "--minutil", "1", "--repeat", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for key in ["candidates", "srtgrowth_calls", "rrs_prunes", "rules"] {
        assert_eq!(text.matches(&format!("{key}=0\n")).count(), 4, "{text}");
    }
}
