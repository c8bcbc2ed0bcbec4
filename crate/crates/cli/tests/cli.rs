use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bmatch_cli::{execute, Algorithm, Input, RunConfig};
use bmatch_core::synth::SynthSpec;

fn bmatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bmatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_spec(dir: &Path) -> std::path::PathBuf {
    let spec = SynthSpec {
        items: 30,
        consumers: 30,
        vocab: 40,
        tags_per_doc: 4,
        sigma: 0.5,
        ..SynthSpec::default()
    };
    let p = dir.join("spec.txt");
    fs::write(&p, spec.to_text()).unwrap();
    p
}

#[test]
fn greedymr_writes_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    let out = dir.path().join("out");
    let r = bmatch(&[
        "--algorithm",
        "greedymr",
        "--synth",
        path(&spec),
        "--out",
        path(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["summary.csv", "trace.csv", "matching.tsv", "timing.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "# schema=1");
    assert!(lines[1].starts_with("# config: algorithm=greedymr"));
    assert!(lines[2].starts_with("schema,algorithm,sigma,epsilon,alpha,seed,edges,matching_value"));
    assert!(lines[3].starts_with("1,greedymr,0.5,"));
    assert!(lines[3].contains("greedy:"));

    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let last = trace.lines().last().unwrap();
    assert_eq!(last.split(',').nth(2), Some("1"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path());
    for alg in ["greedymr", "stackmr", "stackmr-feasible"] {
        let runs: Vec<Vec<Vec<u8>>> = ["1", "1", "4"]
            .iter()
            .enumerate()
            .map(|(i, parts)| {
                let out = dir.path().join(format!("{alg}{i}"));
                let r = bmatch(&[
                    "--algorithm",
                    alg,
                    "--synth",
                    path(&spec),
                    "--seed",
                    "5",
                    "--partitions",
                    parts,
                    "--out",
                    path(&out),
                ]);
                assert!(r.status.success());
                ["summary.csv", "matching.tsv"]
                    .iter()
                    .map(|f| fs::read(out.join(f)).unwrap())
                    .collect()
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{alg}");
        assert_eq!(runs[0], runs[2], "{alg}");
    }
}

#[test]
fn lower_threshold_means_more_edges_and_value() {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = [0.0; 3];
    let mut values = [0.0; 3];
    let seeds = 10;
    for seed in 0..seeds {
        let spec = dir.path().join(format!("spec{seed}.txt"));
        fs::write(
            &spec,
            SynthSpec {
                items: 40,
                consumers: 40,
                vocab: 60,
                ..SynthSpec::default()
            }
            .to_text(),
        )
        .unwrap();
        for (i, sigma) in [4.0, 2.0, 0.5].into_iter().enumerate() {
            let config = RunConfig {
                algorithm: Algorithm::GreedyMr,
                input: Input::Synth { spec: spec.clone() },
                activity: None,
                sigma: Some(sigma),
                epsilon: 1.0,
                alpha: None,
                capacity_model: None,
                seed,
                partitions: 1,
                max_rounds: 100_000,
                out: dir.path().join("out"),
            };
            let r = execute(&config).unwrap();
            edges[i] += r.edges as f64;
            values[i] += r.value;
        }
    }
    assert!(edges[0] <= edges[1] && edges[1] <= edges[2], "{edges:?}");
    assert!(
        values[0] <= values[1] && values[1] <= values[2],
        "{values:?}"
    );
}

#[test]
fn edge_list_with_capacities() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("e.tsv");
    let caps = dir.path().join("c.tsv");
    fs::write(&edges, "p1\talice\t3\np1\tbob\t2\np2\talice\t1\n").unwrap();
    fs::write(&caps, "p1\titem\t2\nalice\tconsumer\t1\n").unwrap();
    let out = dir.path().join("out");
    let r = bmatch(&[
        "--algorithm",
        "exact",
        "--edges",
        path(&edges),
        "--capacities",
        path(&caps),
        "--out",
        path(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let m = fs::read_to_string(out.join("matching.tsv")).unwrap();
    assert_eq!(m, "p1\talice\t3\np1\tbob\t2\n");
    assert!(!out.join("trace.csv").exists());
}

#[test]
fn raw_text_input() {
    let dir = tempfile::tempdir().unwrap();
    let items = dir.path().join("items.txt");
    let consumers = dir.path().join("consumers.txt");
    fs::write(
        &items,
        "sunset\tSunset over the beach\nmountain\tSnowy mountains at dawn\n",
    )
    .unwrap();
    fs::write(
        &consumers,
        "ann\tI love beaches and sunsets\nbo\tMountain hiking, snow\ncy\tcats\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = bmatch(&[
        "--algorithm",
        "greedy-centralized",
        "--items",
        path(&items),
        "--consumers",
        path(&consumers),
        "--sigma",
        "0.1",
        "--out",
        path(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let m = fs::read_to_string(out.join("matching.tsv")).unwrap();
    let pairs: Vec<(&str, &str)> = m
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0], f[1])
        })
        .collect();
    assert_eq!(pairs, [("sunset", "ann"), ("mountain", "bo")]);
}

#[test]
fn activity_file_sets_capacities() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.tsv");
    let activity = dir.path().join("activity.tsv");
    fs::write(
        &corpus,
        "a\titem\tx:1 y:1\nb\titem\tx:1 z:1\nu\tconsumer\tx:1 q:1\nv\tconsumer\ty:1 z:1\n",
    )
    .unwrap();
    fs::write(&activity, "u\tconsumer\t3\nv\tconsumer\t0\n").unwrap();
    let out = dir.path().join("out");
    let r = bmatch(&[
        "--algorithm",
        "maximal",
        "--corpus",
        path(&corpus),
        "--activity",
        path(&activity),
        "--sigma",
        "0.01",
        "--alpha",
        "1",
        "--out",
        path(&out),
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("activity="));
}

#[test]
fn exit_codes() {
    let r = bmatch(&["--algorithm", "greedymr"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("exactly one input"));

    let dir = tempfile::tempdir().unwrap();
    let r = bmatch(&[
        "--algorithm",
        "greedymr",
        "--edges",
        path(&dir.path().join("missing.tsv")),
    ]);
    assert_eq!(r.status.code(), Some(2));

    // The oracle refuses instances this large.
    let spec = small_spec(dir.path());
    let r = bmatch(&[
        "--algorithm",
        "exact",
        "--synth",
        path(&spec),
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(3));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("config: algorithm=exact"), "{err}");

    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tb\t1\nbroken line\n").unwrap();
    let r = bmatch(&[
        "--algorithm",
        "greedymr",
        "--edges",
        path(&bad),
        "--out",
        path(&dir.path().join("o")),
    ]);
    assert_eq!(r.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}
