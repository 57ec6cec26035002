use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nurse-bnp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nurse-bnp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_solve_validate_agree() {
    let inst = scratch("inst.txt");
    let roster = scratch("roster.txt");
    let inst_s = inst.to_str().unwrap();
    let roster_s = roster.to_str().unwrap();

    let g = bin(&["generate", "--nurses", "4", "--weeks", "1", "--units", "2", "--seed", "3", "-o", inst_s]);
    assert!(g.status.success());

    let s = bin(&["solve", inst_s, "--roster-out", roster_s]);
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let out = stdout(&s);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("instance,mode,LB,UB,proved,nodes,timeMs,globalLB"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "full");
    assert_eq!(row[4], "true");
    let ub = row[3];

    let v = bin(&["validate", inst_s, roster_s]);
    assert!(v.status.success());
    let csv = stdout(&v);
    assert!(csv.starts_with("constraint,nurse,violationCount,penalty\n"));
    let total = csv.lines().last().unwrap();
    assert_eq!(total, format!("total,-,0,{ub}"));
}

#[test]
fn price_reports_every_variant() {
    let p = bin(&["price", "--suite-id", "1", "--nurse", "N1", "--duals", "random:7"]);
    assert!(p.status.success(), "{}", String::from_utf8_lossy(&p.stderr));
    let out = stdout(&p);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let rc: Vec<&str> = rows.iter().map(|r| r.rsplit(',').next().unwrap()).collect();
    assert!(rc.windows(2).all(|w| w[0] == w[1]), "{out}");
}

#[test]
fn bad_input_exits_with_input_code() {
    let missing = bin(&["validate", "/nonexistent/instance", "/nonexistent/roster"]);
    assert_eq!(missing.status.code(), Some(2));
    let zero = bin(&["generate", "--nurses", "0", "--weeks", "1", "--units", "1"]);
    assert_eq!(zero.status.code(), Some(2));
}
