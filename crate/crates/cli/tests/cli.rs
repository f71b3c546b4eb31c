use std::path::PathBuf;
use std::process::{Command, Output};

use pfk_core::network::Network;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn pfk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfk")).args(args).output().expect("pfk runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no `{key}` in {text}"));
    line.trim().parse().unwrap()
}

fn example_nets() -> Vec<PathBuf> {
    let mut nets: Vec<PathBuf> = std::fs::read_dir(example(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "net"))
        .collect();
    nets.sort();
    nets
}

#[test]
fn eval_both_on_two_sat() {
    let o = pfk(&["eval", "--method", "both", example("two_sat.net").to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!((field(&text, "brute ") - 4.0).abs() < 1e-9, "{text}");
    assert!((field(&text, "pfaffian ") - 4.0).abs() < 1e-9, "{text}");
    assert!(field(&text, "diff ") < 1e-9);
}

#[test]
fn eval_both_agrees_on_certified_examples() {
    let mut checked = 0;
    for path in example_nets() {
        let net = Network::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        if net.certified().is_err() || !net.dangling().is_empty() {
            continue;
        }
        let o = pfk(&["eval", "--method", "both", path.to_str().unwrap()]);
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        assert!(field(&stdout(&o), "diff ") < 1e-9);
        checked += 1;
    }
    assert!(checked >= 2);
}

#[test]
fn brute_force_on_uncertified_example() {
    let o = pfk(&["eval", "--method", "brute", example("tangled.net").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "brute "), 0.0);
}

#[test]
fn examples_round_trip() {
    let nets = example_nets();
    assert!(nets.len() >= 4);
    for path in nets {
        let net = Network::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(Network::parse(&net.to_string()).unwrap(), net, "{}", path.display());
    }
}

#[test]
fn order_is_printed() {
    let o = pfk(&["order", example("two_sat.net").to_str().unwrap()]);
    let mut sigma: Vec<u32> = stdout(&o).split_whitespace().map(|t| t.parse().unwrap()).collect();
    sigma.sort();
    assert_eq!(sigma, [1, 2, 3, 4, 5, 6]);
}

#[test]
fn census_arity_three_lists_fifteen() {
    let o = pfk(&["census", "--arity", "3", "--basis", "hadamard", "--jobs", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('|')).count(), 15);
    assert_eq!(text.lines().last(), Some("15 gates"));
}

#[test]
fn census_reads_basis_file() {
    let o = pfk(&["census", "--arity", "2", "--basis", example("tree_b.basis").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("2 gates\n"));
}

#[test]
fn census_size_limit_is_a_budget_exit() {
    assert_eq!(pfk(&["census", "--arity", "5"]).status.code(), Some(3));
}

#[test]
fn or_gate_ideal_is_nontrivial() {
    let dir = std::env::temp_dir().join(format!("pfk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ideal = dir.join("or_gate.ideal");
    let o = pfk(&["ideal", "--gate", "|01> + |10> + |11>", "--mode", "het", "--format", "neutral", "-o", ideal.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = pfk(&["gb", "--order", "degrevlex", ideal.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("NONTRIVIAL"));
    assert!(field(&text, "basis size ") >= 1.0);
    let o = pfk(&["gb", "--max-pairs", "1", ideal.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o).lines().next(), Some("BUDGET"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn singular_export_to_stdout() {
    let o = pfk(&["ideal", "--cogate", "<00| + <11|", "--mode", "hom", "--format", "singular"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("ring r = 0, ("));
    assert!(text.contains("ideal i ="));
    assert!(text.trim_end().ends_with("std(i);"));
}

#[test]
fn certify_suite_passes() {
    let o = pfk(&["certify", "--suite", "paper"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn decomposition_example_holds() {
    let args = |rule: &'static str| {
        vec![
            "decompose".to_string(),
            "--target".into(),
            "|0000> + |1111>".into(),
            "--cert".into(),
            example("eq4_target.cert").to_string_lossy().into_owned(),
            "--fragment".into(),
            example("eq4_fragment.net").to_string_lossy().into_owned(),
            "--order-file".into(),
            example("eq4.order").to_string_lossy().into_owned(),
            "--rule".into(),
            rule.into(),
        ]
    };
    let run = |rule| Command::new(env!("CARGO_BIN_EXE_pfk")).args(args(rule)).output().unwrap();
    let paper = run("checkerboard");
    assert!(paper.status.success());
    assert!(stdout(&paper).lines().last().unwrap().starts_with("HOLDS"));
    assert_eq!(run("exact").status.code(), Some(1));
}

#[test]
fn parse_errors_report_position() {
    let dir = std::env::temp_dir().join(format!("pfk-cli-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.net");
    std::fs::write(&bad, "edges 2\ngate G on 1 2 { |00> + |1x> }\n").unwrap();
    let o = pfk(&["eval", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2, column"));
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(pfk(&["eval", "--method", "nope", "x.net"]).status.code(), Some(2));
}
