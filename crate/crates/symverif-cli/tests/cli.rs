use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_symverif"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_on(args: &[&str], file: &Path) -> Output {
    let mut a: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    a.insert(1, file.display().to_string());
    bin().args(&a).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{}: {}", e, stdout(o)))
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// Drops timing fields so two reports can be compared.
fn untimed(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(m) => {
            m.retain(|k, _| !k.ends_with("seconds") && !k.ends_with("_ms"));
            m.values_mut().for_each(untimed);
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(untimed),
        _ => {}
    }
}

const MAX: &str = "vars { var x, y, m: real; }
program { m := x > y ? x : y }
group S2 = cyclic(2, g);
group E = trivial;
action swap : S2 on x, y { g: x -> y, y -> x; }
action fixed : E on m { }
triple swap -> fixed by e*;
";

#[test]
fn car_translation_is_valid_with_five_assignments_under_for() {
    let o = run_on(&["verify", "--json"], &corpus("car_translation.sym"));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&o);
    assert_eq!(r["status"], "valid");
    assert_eq!(r["totals"]["rules"]["ASSGN"], 5);
    assert_eq!(r["totals"]["rules"]["FOR"], 1);
}

#[test]
fn buggy_aac_is_invalid_at_the_z_update() {
    let o = run_on(&["verify"], &corpus("aac_buggy.sym"));
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("Invalid"), "{}", text);
    assert!(text.contains("[body.2]") && text.contains("z :="), "{}", text);
}

#[test]
fn text_report_lists_proof_and_totals() {
    let o = run_on(&["verify"], &corpus("gravity.sym"));
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("verify "), "{}", text);
    assert!(text.contains("SEM-ASSGN [body.0]"), "{}", text);
    assert!(text.contains("obligations:"));
    assert!(text.contains("totals: "));
}

#[test]
fn json_report_is_deterministic() {
    let mut a = json(&run_on(&["verify", "--json"], &corpus("lorenz.sym")));
    let mut b = json(&run_on(&["verify", "--json"], &corpus("lorenz.sym")));
    untimed(&mut a);
    untimed(&mut b);
    assert_eq!(a, b);
    let keys: Vec<&String> = a.as_object().unwrap().keys().collect();
    assert_eq!(keys[0], "command");
}

#[test]
fn missing_solver_gives_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "max.sym", MAX);
    let o = run_on(&["verify"], &p);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run_on(&["verify", "--solver", "/nonexistent/solver"], &p);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("Unknown"));
}

#[test]
fn solver_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "max.sym", MAX);
    let o = bin().args(["verify", p.to_str().unwrap()]).env("SYMVERIF_SOLVER", "/nonexistent/solver").output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn kept_scripts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "max.sym", MAX);
    let keep = dir.path().join("smt");
    let o = run_on(&["verify", "--keep-smt", keep.to_str().unwrap()], &p);
    assert_eq!(o.status.code(), Some(0));
    let scripts: Vec<_> = std::fs::read_dir(&keep).unwrap().collect();
    assert!(!scripts.is_empty());
}

#[test]
fn parse_errors_exit_three_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "bad.sym", "vars { var x: real; }\nprogram { x := x + }\n");
    let o = run_on(&["verify"], &p);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("bad.sym:2:"), "{}", err);
}

#[test]
fn unresolved_names_and_missing_files_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "x.sym", "vars { var x: real; }\nprogram { skip }\ngroup Z = free(g);\naction a : Z on x { g: x -> x + 1; }\ntriple a -> b by eq;\n");
    assert_eq!(run_on(&["verify"], &p).status.code(), Some(3));
    assert_eq!(run(&["verify", "/nonexistent/file.sym"]).status.code(), Some(3));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(run(&["verify"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn enumerate_reports_dihedral_sizes() {
    for (g, n) in [("D4", 8), ("D8", 16), ("D32", 64), ("D512", 1024), ("D1024", 2048)] {
        let o = run_on(&["enumerate", g, "--json"], &corpus("groups.sym"));
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(json(&o)["data"]["size"], n);
    }
    let o = run_on(&["enumerate", "S3", "--json"], &corpus("groups.sym"));
    assert_eq!(json(&o)["data"]["elements"].as_array().unwrap().len(), 6);
}

#[test]
fn enumerate_beyond_the_bound_is_unknown() {
    let o = run_on(&["enumerate", "S20"], &corpus("voting_20.sym"));
    assert_eq!(o.status.code(), Some(2));
    let o = run_on(&["enumerate", "D1024", "--bound", "100"], &corpus("groups.sym"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_action_accepts_and_rejects() {
    let o = run_on(&["check-action", "turn"], &corpus("d4_car.sym"));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "bad.sym",
        "vars { var x: real; }\ngroup S2 = cyclic(2, g);\naction shift : S2 on x { g: x -> x + 1; }\n",
    );
    let o = run_on(&["check-action", "shift"], &p);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn declared_non_homomorphism_is_invalid() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "hom.sym",
        "vars { var x, y: real; }
program { skip }
group D4 = dihedral(4);
action turn : D4 on x, y { r: x -> -y, y -> x; s: y -> -y; }
hom bad : D4 -> D4 { r -> r, s -> r }
triple turn -> turn by bad;
",
    );
    let o = run_on(&["verify"], &p);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn fuzz_command_separates_correct_and_buggy_flows() {
    let o = run_on(&["fuzz", "-n", "100"], &corpus("aac.sym"));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run_on(&["fuzz", "-n", "100"], &corpus("aac_buggy.sym"));
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("discrepancy"));
}

#[test]
fn verify_with_fuzz_flag_attaches_fuzz_summary() {
    let o = run_on(&["verify", "--fuzz", "50", "--seed", "3", "--json"], &corpus("abc.sym"));
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["fuzz"]["trials"], 50);
    assert!(r["fuzz"]["first_discrepancy"].is_null());
}

#[test]
fn synth_recovers_the_car_translation() {
    let o = run_on(&["synth", "--json"], &corpus("synth_car_translation.sym"));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let r = json(&o);
    let targets = r["data"]["targets"].as_array().unwrap();
    assert_eq!(targets.len(), 5);
    for t in targets {
        assert_eq!(t["outcome"], "valid");
        assert_eq!(t["pre"]["g"]["x"], "x + 1");
        assert_eq!(t["pre"]["g"]["y"], "y + 1");
    }
}

#[test]
fn synth_exhaustion_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        &dir,
        "s.sym",
        "vars { var x: int; }\nprogram { x := 0 }\ngroup Z = free(g);\naction shift : Z on x { g: x -> x + 1; }\nsynth against shift;\n",
    );
    let o = run_on(&["synth", "--depth", "2"], &p);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn templates_round_trip_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, n) in [("voting", "5"), ("dihedral-car", "8")] {
        let o = run(&["template", kind, n]);
        assert_eq!(o.status.code(), Some(0));
        let p = write(&dir, &format!("{}.sym", kind), &stdout(&o));
        let v = run_on(&["verify"], &p);
        assert_eq!(v.status.code(), Some(0), "{}", stdout(&v));
    }
    assert_eq!(run(&["template", "voting", "1"]).status.code(), Some(3));
}

#[test]
fn corpus_templates_are_current() {
    for (kind, n, file) in [("voting", "2", "voting_2.sym"), ("voting", "20", "voting_20.sym"), ("dihedral-car", "4", "d4_car.sym"), ("dihedral-car", "6", "d6_car.sym")] {
        let o = run(&["template", kind, n]);
        assert_eq!(stdout(&o), std::fs::read_to_string(corpus(file)).unwrap(), "{}", file);
    }
}
