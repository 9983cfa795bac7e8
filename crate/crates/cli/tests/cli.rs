use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whittaker")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn value(report: &Value) -> (f64, f64) {
    (report["value"]["re"].as_f64().unwrap(), report["value"]["im"].as_f64().unwrap())
}

#[test]
fn coeffs_table_starts_at_one() {
    let out = run(&["coeffs", "--nu", "0.3+0.2i,0.1-0.1i", "--box", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["job"]["command"], "coeffs");
    let entries = doc["results"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 16);
    let c0 = entries.iter().find(|e| e["m"] == serde_json::json!([0, 0])).unwrap();
    assert_eq!((c0["re"].as_f64().unwrap(), c0["im"].as_f64().unwrap()), (1.0, 0.0));
}

#[test]
fn coeffs_routes_agree() {
    let a = json(&run(&["coeffs", "--nu", "0.21,-0.13+0.4i", "--box", "4"]));
    let b = json(&run(&["coeffs", "--nu", "0.21,-0.13+0.4i", "--box", "4", "--route", "closed-form"]));
    let (ea, eb) = (a["results"]["entries"].as_array().unwrap(), b["results"]["entries"].as_array().unwrap());
    assert_eq!(ea.len(), eb.len());
    for (x, y) in ea.iter().zip(eb) {
        assert_eq!(x["m"], y["m"]);
        let d = (x["re"].as_f64().unwrap() - y["re"].as_f64().unwrap()).hypot(x["im"].as_f64().unwrap() - y["im"].as_f64().unwrap());
        let s = x["re"].as_f64().unwrap().hypot(x["im"].as_f64().unwrap());
        assert!(d <= 1e-9 * s.max(1e-300), "{x} vs {y}");
    }
}

#[test]
fn rank_one_series_matches_closed_form() {
    let a = json(&run(&["eval", "--nu", "0.25", "--y", "1"]));
    let b = json(&run(&["eval", "--nu", "0.25", "--y", "1", "--route", "bessel-base"]));
    let (x, y) = (value(&a["results"][0]), value(&b["results"][0]));
    assert_eq!(b["results"][0]["route"], "bessel-base");
    assert!(((x.0 - y.0).hypot(x.1 - y.1)) / y.0.abs() <= 1e-9, "{x:?} vs {y:?}");
}

#[test]
fn eval_csv_layout() {
    let out = run(&["eval", "--nu", "0.3+0.2i,0.1-0.1i", "--grid", "0.5:1:2", "--grid", "1:1.5:3", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "y_1,y_2,re,im,error_estimate");
    assert_eq!(lines.len(), 1 + 6);
    // first axis slowest
    assert!(lines[1].starts_with("0.5,1.0,") && lines[2].starts_with("0.5,1.25,") && lines[4].starts_with("1.0,1.0,"));
}

#[test]
fn mellin_csv_layout_and_value() {
    let out = run(&["mellin", "--nu", "0.2,0.1", "--s", "1.5,1.5", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s_1_re,s_1_im,s_2_re,s_2_im,re,im,error_estimate");
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[4] - 0.0529330109644564694051624820103).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    // usage: malformed input, unknown setting, out-of-domain coordinates
    assert_eq!(run(&["eval", "--nu", "0.3+", "--y", "1"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--nu", "0.3", "--y", "1", "--set", "nope=1"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--nu", "0.3", "--y", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--nu", "0.3,0.1", "--y", "1"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "--nu", "0.3", "--y", "1", "--format", "text"]).status.code(), Some(1));
    // numerical: the contour cannot be placed, and the document says why
    let out = run(&["mellin", "--nu", "0.2,0.1", "--s", "0.1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["name"], "InvalidContour");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("w.conf");
    std::fs::write(&cfg, "# settings\nrel_tol = 1e-4\nu_cutoff = 14\n").unwrap();
    let c = cfg.to_str().unwrap();
    let a = json(&run(&["--config", c, "eval", "--nu", "0.3,0.1", "--y", "1,1", "--route", "bessel"]));
    assert_eq!(a["job"]["settings"]["rel_tol"], "1e-4");
    assert_eq!(a["job"]["settings"]["u_cutoff"], "14");
    let b = json(&run(&["--config", c, "eval", "--nu", "0.3,0.1", "--y", "1,1", "--route", "bessel", "--rel-tol", "1e-7"]));
    assert_eq!(b["job"]["settings"]["rel_tol"], "1e-7");
    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(run(&["--config", c, "eval", "--nu", "0.3", "--y", "1"]).status.code(), Some(1));
}

#[test]
fn replay_reproduces_document() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let out = run(&[
        "--threads", "1", "-o", first.to_str().unwrap(),
        "eval", "--nu", "0.3+0.2i,0.1-0.1i", "--y", "0.7,1.1", "--y", "1,1", "--route", "bessel",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let original = std::fs::read_to_string(&first).unwrap();

    // the echo block re-serializes byte for byte
    let doc: Value = serde_json::from_str(&original).unwrap();
    let echo = serde_json::to_string_pretty(&doc["job"]).unwrap();
    assert!(original.contains(&echo.replace('\n', "\n  ")));

    let replay = run(&["--threads", "1", "replay", first.to_str().unwrap()]);
    assert_eq!(replay.status.code(), Some(0));
    assert_eq!(String::from_utf8(replay.stdout).unwrap(), original);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["eval", "--nu", "0.21+0.1i,-0.05", "--grid", "0.6:1.2:3", "--grid", "0.8:1:2"];
    let one = run(&[&["--threads", "1"][..], &args[..]].concat());
    let two = run(&[&["--threads", "2"][..], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn verify_n2_cross_matrix() {
    let out = run(&["verify", "--suite", "n2-cross"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    for (line, id) in lines.iter().zip([" 3 ", " 4 ", " 5 "]) {
        assert!(line.starts_with("[PASS]") && line.contains(id), "{line}");
    }
    assert_eq!(lines[3], "3/3 checks passed");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_json_and_csv() {
    let doc = json(&run(&["verify", "--check", "9,10", "--format", "json"]));
    assert_eq!(doc["all_passed"], true);
    assert_eq!(doc["results"].as_array().unwrap().len(), 2);
    let csv = run(&["verify", "--check", "2", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("id,name,passed,residual,tolerance,elapsed_s,time_limit_s,detail\n2,"));
    assert_eq!(run(&["verify", "--check", "42"]).status.code(), Some(1));
}

#[test]
fn regularity_report() {
    let doc = json(&run(&["regularity", "--nu", "0.3,0.1"]));
    assert_eq!(doc["results"]["regular"], true);
    let doc = json(&run(&["regularity", "--nu", "0.5,0"]));
    assert_eq!(doc["results"]["regular"], false);
}
