use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_flutetype"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn flutetype")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn structured(args: &[&str]) -> serde_json::Value {
    let mut a = args.to_vec();
    a.extend(["--format", "structured"]);
    let o = run(&a);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    serde_json::from_str(&stdout(&o)).expect("structured output is JSON")
}

#[test]
fn analyze_zero_twist_rows() {
    for (p, want) in [
        ("1", "Parabolic"),
        ("2", "Parabolic"),
        ("3", "NotParabolic"),
    ] {
        let o = run(&[
            "analyze",
            "--generator",
            &format!("plog:{p}"),
            "--truncate",
            "4000",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(
            stdout(&o).contains(&format!("verdict: {want}\n")),
            "p = {p}: {}",
            stdout(&o)
        );
    }
}

#[test]
fn analyze_structured_is_json_with_config() {
    let v = structured(&[
        "analyze",
        "--generator",
        "pairs-of:plog:8",
        "--pattern",
        "all",
        "--truncate",
        "600",
    ]);
    assert_eq!(v["config"]["command"], "analyze");
    assert_eq!(v["config"]["precision_bits"], 256);
    let text = v.to_string();
    assert!(text.contains("parabolic"), "{text}");
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "analyze",
        "--generator",
        "plog:2.5",
        "--truncate",
        "3000",
        "--seed",
        "9",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let outs: Vec<String> = (0..2)
        .map(|_| {
            let o = run(&[
                "develop",
                "--generator",
                "pairs-of:plog:8",
                "--pattern",
                "all",
                "--truncate",
                "200",
                "--format",
                "structured",
                "--out",
                path.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            std::fs::read_to_string(&path).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);
}

#[test]
fn develop_writes_svg_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("chain.svg");
    let trace = dir.path().join("gaps.csv");
    let o = run(&[
        "develop",
        "--generator",
        "pairs-of:plog:8",
        "--pattern",
        "all",
        "--truncate",
        "300",
        "--svg-out",
        svg.to_str().unwrap(),
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("gaps nonincreasing: true"));
    let svg = std::fs::read_to_string(svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("class=\"geodesic\"").count() > 10);
    let trace = std::fs::read_to_string(trace).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("n,gap,log_gap"));
    let gaps: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(gaps.len(), 599);
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn develop_zero_shears_exhausts_precision_after_writing_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("gaps.csv");
    let o = run(&[
        "develop",
        "--shears",
        "zeros",
        "--truncate",
        "300",
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("precision exhausted"), "{}", stderr(&o));
    assert!(stdout(&o).contains("stopped: precision exhausted"));
    assert!(std::fs::read_to_string(trace).unwrap().lines().count() > 100);

    let o = run(&["develop", "--shears", "zeros", "--truncate", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn synthesize_raise_flattens_windows() {
    let dir = tempfile::tempdir().unwrap();
    let lengths = dir.path().join("l.txt");
    let o = run(&[
        "synthesize",
        "--generator",
        "plog:1",
        "--pattern",
        "list:1,2,5,9",
        "--declare-infinite",
        "true",
        "--truncate",
        "20",
        "--lengths-out",
        lengths.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("mode: raise") && out.contains("pairs flattened: 2"),
        "{out}"
    );
    assert!(out.contains("verdict: Parabolic"), "{out}");
    let l: Vec<f64> = std::fs::read_to_string(lengths)
        .unwrap()
        .lines()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(l.len(), 20);
    assert_eq!(l[0], l[1]);
    assert!(l[4..9].iter().all(|&x| x == l[8]));

    let v = structured(&[
        "synthesize",
        "--mode",
        "lower",
        "--generator",
        "plog:1",
        "--pattern",
        "list:1,2,5,9",
        "--declare-infinite",
        "true",
        "--truncate",
        "20",
    ]);
    assert_eq!(v["config"]["mode"], "lower");
}

#[test]
fn endtree_documents() {
    let o = run(&[
        "endtree",
        "--input",
        data("three_ends.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stdout(&o).starts_with("aggregate: Parabolic"),
        "{}",
        stdout(&o)
    );

    let o = run(&[
        "endtree",
        "--input",
        data("depth_three.toml").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("aggregate: NotParabolic"), "{out}");
    for id in ["top [", "top.1 [", "top.1.1 ["] {
        assert!(out.contains(id), "{id} missing: {out}");
    }

    let o = run(&[
        "endtree",
        "--input",
        data("refused_border.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(
        stderr(&o).contains("beta_11") && stderr(&o).contains("root.1"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn analyze_reads_flute_documents() {
    let o = run(&[
        "analyze",
        "--input",
        data("paired_flute.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict: Parabolic"), "{}", stdout(&o));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["analyze", "--generator", "3*log(n)"],
        vec!["analyze", "--generator", "plog:1", "--precision-bits", "32"],
        vec!["analyze", "--generator", "plog:1", "--truncate", "1"],
        vec!["analyze", "--input", "/nonexistent/surface.toml"],
        vec!["develop", "--shears", "bogus"],
        vec!["synthesize", "--mode", "sideways", "--generator", "plog:1"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn undeclared_half_twists_are_refused() {
    let o = run(&[
        "synthesize",
        "--input",
        data("paired_flute.json").to_str().unwrap(),
        "--pattern",
        "list:1,2,5,9",
    ]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("not declared infinite"));
}

#[test]
fn version_and_help() {
    let o = run(&["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(env!("CARGO_PKG_VERSION")));
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["analyze", "develop", "synthesize", "endtree"] {
        assert!(stdout(&o).contains(sub));
    }
}
