use std::path::Path;
use std::process::{Command, Output};

fn armplan(data: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_armplan"))
        .env("ARMPLAN_DATA", data)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn full_pipeline_and_bundle_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");
    let p = |x: &str| d.join(x).to_str().unwrap().to_string();

    ok(&armplan(
        &data,
        &[
            "--seed",
            "4",
            "gen-worlds",
            "--suite",
            "train",
            "--profile",
            "simple",
            "--count",
            "1",
        ],
    ));
    assert!(data.join("worlds/train/train-00.json").is_file());
    let out = ok(&armplan(
        &data,
        &["--seed", "4", "collect", "--suite", "train", "--paths", "8"],
    ));
    assert!(out.contains("training pairs"));
    assert!(data.join("pairs/train.json").is_file());

    let weights = p("w.json");
    ok(&armplan(
        &data,
        &[
            "--seed", "4", "train", "--suite", "train", "--out", &weights, "--epochs", "2",
        ],
    ));
    ok(&armplan(
        &data,
        &[
            "--seed", "4", "train", "--suite", "train", "--out", &weights, "--epochs", "3",
            "--resume",
        ],
    ));
    assert!(Path::new(&format!("{weights}.report.json")).is_file());

    let world = data.join("worlds/train/train-00.json");
    let plan = armplan(
        &data,
        &[
            "--seed",
            "9",
            "plan",
            "--world",
            world.to_str().unwrap(),
            "--planner",
            "birrt",
            "--out",
            &p("path.json"),
        ],
    );
    let text = ok(&plan);
    assert!(text.contains("success    true"), "{text}");
    assert!(d.join("path.json").is_file());

    let cfg = d.join("bench.toml");
    std::fs::write(
        &cfg,
        "[bench]\nqueries_per_world = 3\n\n[bench.budget]\nrule = \"match_neural_time\"\ncalibration_iterations = 30\nmax_iterations = 2000\n",
    )
    .unwrap();
    let out1 = p("out1");
    let table = ok(&armplan(
        &data,
        &[
            "--seed",
            "5",
            "--config",
            cfg.to_str().unwrap(),
            "bench",
            "--suite",
            "train",
            "--weights",
            &weights,
            "--out",
            &out1,
        ],
    ));
    assert_eq!(table.lines().filter(|l| l.contains(" train ")).count(), 3);
    let bundle = d.join("out1/bundle.json");
    let out2 = p("out2");
    ok(&armplan(
        &data,
        &[
            "bench",
            "--bundle",
            bundle.to_str().unwrap(),
            "--out",
            &out2,
        ],
    ));
    for f in ["metrics.csv", "queries.csv"] {
        let a = std::fs::read(d.join("out1").join(f)).unwrap();
        let b = std::fs::read(d.join("out2").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs after re-run");
    }
    let metrics = std::fs::read_to_string(d.join("out1/metrics.csv")).unwrap();
    assert!(metrics.starts_with("# schema: armplan.bench.metrics/1\n"));
    let report = ok(&armplan(&data, &["report", "--dir", &out2]));
    assert!(report.contains("informed_rrt_star") && report.contains("5.37"));
}

#[test]
fn exit_codes_describe_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let data = d.join("data");

    assert_eq!(code(&armplan(&data, &["frobnicate"])), 2);
    assert_eq!(code(&armplan(&data, &["collect", "--suite", "missing"])), 3);

    let bad = d.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        code(&armplan(
            &data,
            &["plan", "--world", bad.to_str().unwrap(), "--planner", "rrt"]
        )),
        4
    );

    ok(&armplan(
        &data,
        &[
            "gen-worlds",
            "--suite",
            "s",
            "--profile",
            "simple",
            "--count",
            "1",
        ],
    ));
    let world = data.join("worlds/s/s-00.json");
    let w = world.to_str().unwrap();
    assert_eq!(
        code(&armplan(
            &data,
            &[
                "plan",
                "--world",
                w,
                "--start",
                "1,2,3",
                "--goal",
                "0,0,0,0,0,0",
                "--planner",
                "rrt"
            ]
        )),
        5
    );
    assert_eq!(code(&armplan(&data, &["plan", "--world", w])), 7);

    let cfg = d.join("c.toml");
    std::fs::write(&cfg, "[planner]\nmax_iterations = 1\n").unwrap();
    let out = armplan(
        &data,
        &[
            "--config",
            cfg.to_str().unwrap(),
            "plan",
            "--world",
            w,
            "--planner",
            "rrt",
        ],
    );
    assert_eq!(code(&out), 8, "{}", String::from_utf8_lossy(&out.stderr));

    std::fs::write(&cfg, "[planner]\nno_such_key = 1\n").unwrap();
    assert_eq!(
        code(&armplan(
            &data,
            &["--config", cfg.to_str().unwrap(), "plan", "--world", w]
        )),
        4
    );
}

#[test]
fn documented_config_example_loads() {
    let doc = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../docs/formats.md"
    ))
    .unwrap();
    let start = doc.find("```toml\n").expect("toml example") + "```toml\n".len();
    let example = &doc[start..start + doc[start..].find("```").unwrap()];
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("example.toml");
    std::fs::write(&cfg, example).unwrap();
    let data = dir.path().join("data");
    ok(&armplan(
        &data,
        &[
            "--config",
            cfg.to_str().unwrap(),
            "gen-worlds",
            "--suite",
            "s",
            "--profile",
            "simple",
            "--count",
            "1",
        ],
    ));
}
