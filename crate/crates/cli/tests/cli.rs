use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hopper_core::io;
use hopper_core::synth::{random_instance, SynthConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hopperplan"));
    c.env_remove("HOPPERPLAN_CONFIG");
    c
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/coop5.json")
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let p = std::env::temp_dir().join(format!("hopperplan-cli-{tag}-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&p);
        std::fs::create_dir_all(&p).unwrap();
        Self(p)
    }
    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn exact_on_golden_instance() {
    let dir = TempDir::new("exact");
    let out = run(bin().arg("exact").arg(golden()).arg("-o").arg(dir.path("p.json")));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc = io::parse_plan(&std::fs::read_to_string(dir.path("p.json")).unwrap()).unwrap();
    assert_eq!(doc.summary.unwrap().distance_km, 221.0);
}

#[test]
fn exact_refuses_large_instance_with_limit_code() {
    let dir = TempDir::new("limits");
    let inst = random_instance(&SynthConfig { customers: 20, ..Default::default() }, 4);
    std::fs::write(dir.path("big.json"), io::instance_to_json(inst.data())).unwrap();
    let out = run(bin().arg("exact").arg(dir.path("big.json")));
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("at most 7"));
}

#[test]
fn invalid_instance_exits_with_validation_code() {
    let dir = TempDir::new("invalid");
    let text = std::fs::read_to_string(golden()).unwrap().replace("\"quantity\": 3.3", "\"quantity\": -3.3");
    std::fs::write(dir.path("bad.json"), text).unwrap();
    let out = run(bin().arg("construct").arg(dir.path("bad.json")));
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("orders[0]"), "{}", stderr(&out));

    let out = run(bin().arg("plan").arg(dir.path("missing.json")));
    assert_eq!(code(&out), 1);
    let out = run(bin().arg("plan"));
    assert_eq!(code(&out), 1);
}

#[test]
fn infeasible_plan_rejected_by_check_and_improve() {
    let dir = TempDir::new("infeasible");
    let out = run(bin().arg("construct").arg(golden()).arg("-o").arg(dir.path("p.json")));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path("p.json")).unwrap();
    let mut doc = io::parse_plan(&text).unwrap();
    doc.days[0].journeys.pop();
    doc.summary = None;
    std::fs::write(dir.path("cut.json"), serde_json::to_string(&doc).unwrap()).unwrap();

    let out = run(bin().arg("check").arg(golden()).arg(dir.path("cut.json")));
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("deadline-shortfall"));

    let out = run(bin().arg("improve").arg(golden()).arg(dir.path("cut.json")).args(["--iterations", "10"]));
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn config_from_environment_and_trace_export() {
    let dir = TempDir::new("config");
    std::fs::write(
        dir.path("cfg.json"),
        r#"{ "anneal": { "max_iterations": 3000, "rng_seed": 5, "trace_stride": 100 }, "insertion": { "seed_strategy": "farthest" } }"#,
    )
    .unwrap();
    let out = run(bin()
        .env("HOPPERPLAN_CONFIG", dir.path("cfg.json"))
        .arg("plan")
        .arg(golden())
        .arg("-o")
        .arg(dir.path("p.json"))
        .arg("--run-out")
        .arg(dir.path("run.json")));
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("seed strategy farthest"), "{err}");
    assert!(err.contains("seeds [5], 3000 iterations"), "{err}");

    let run_doc = io::parse_run(&std::fs::read_to_string(dir.path("run.json")).unwrap()).unwrap();
    assert_eq!(run_doc.summary.iterations, 3000);
    assert_eq!(run_doc.plan_file.as_deref(), Some(dir.path("p.json").to_str().unwrap()));

    let out = run(bin().arg("trace-export").arg(dir.path("run.json")).args(["--separator", ";"]));
    assert_eq!(code(&out), 0);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("iteration;elapsed;current;best;temperature;move;accepted\n"));
    assert_eq!(csv.lines().count(), run_doc.trace.rows.len() + 1);
    assert!(run_doc.trace.rows.len() >= 30);
}

#[test]
fn unknown_config_field_rejected() {
    let dir = TempDir::new("badcfg");
    std::fs::write(dir.path("cfg.json"), r#"{ "anneal": { "iters": 5 } }"#).unwrap();
    let out = run(bin().arg("--config").arg(dir.path("cfg.json")).arg("construct").arg(golden()));
    assert_eq!(code(&out), 1);
}

#[test]
fn writes_leave_no_temporary_files() {
    let dir = TempDir::new("atomic");
    let target = dir.path("plan.json");
    std::fs::write(&target, "old").unwrap();
    let out = run(bin().arg("construct").arg(golden()).arg("-o").arg(&target));
    assert_eq!(code(&out), 0);
    let names: Vec<_> = std::fs::read_dir(&dir.0).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1);
    assert!(io::parse_plan(&std::fs::read_to_string(Path::new(&target)).unwrap()).is_ok());
}
