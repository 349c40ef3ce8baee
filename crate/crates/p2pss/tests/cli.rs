//! End-to-end checks of the `p2pss` binary: determinism of the emitted CSV,
//! planner output, config layering, and the documented exit codes.

use std::process::{Command, Output};

fn p2pss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p2pss"))
        .args(args)
        .output()
        .expect("binary runs")
}

const TINY: &[&str] = &[
    "run",
    "--peers",
    "4",
    "--n",
    "2000",
    "--universe",
    "500",
    "--k",
    "32",
    "--rounds",
    "30",
    "--repetitions",
    "2",
    "--seed",
    "5",
    "--topology",
    "er:1.0",
];

#[test]
fn run_emits_deterministic_csv() {
    let a = p2pss(TINY);
    let b = p2pss(TINY);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "run_id,seed,peer_id,param_name,param_value,recall,precision,are,eps_star,p_est,rounds,k,online_peers"
    );
    // 2 repetitions x 4 peers + aggregate.
    assert_eq!(text.lines().count(), 1 + 8 + 1);
    assert!(text.lines().last().unwrap().starts_with("aggregate,5,"));
}

#[test]
fn sweep_blocks_carry_the_parameter() {
    let mut args = vec!["sweep", "--param", "k", "--values", "16,32"];
    args.extend_from_slice(&TINY[1..]);
    let out = p2pss(&args);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains(",k,16,")));
    assert!(text.lines().any(|l| l.contains(",k,32,")));
    assert_eq!(text.lines().filter(|l| l.starts_with("aggregate")).count(), 2);
}

#[test]
fn plan_time_dominant_reference() {
    let out = p2pss(&[
        "plan",
        "--phi",
        "0.02",
        "--eps",
        "0.01",
        "--delta",
        "0.05",
        "--p-star",
        "10000",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // Fewest rounds is 21, which requires 1805 counters.
    assert!(
        text.lines().any(|l| l.starts_with("time-dominant,1805,21,")),
        "unexpected plan output:\n{text}"
    );
}

#[test]
fn plan_space_dominant_minimal_counters() {
    let out = p2pss(&[
        "plan",
        "--phi",
        "0.02",
        "--eps",
        "0.001",
        "--p-star",
        "1000",
        "--strategy",
        "space-dominant",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("space-dominant,1001,")),
        "unexpected plan output:\n{text}"
    );
}

#[test]
fn config_file_layers_under_flags() {
    let dir = std::env::temp_dir().join("p2pss-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.conf");
    std::fs::write(
        &path,
        "peers = 4\nn = 2000\nuniverse = 500\nk = 32\nrounds = 30\nrepetitions = 2\nseed = 5\ntopology = er:1.0\n",
    )
    .unwrap();
    let from_file = p2pss(&["run", "--config", path.to_str().unwrap()]);
    assert!(from_file.status.success());
    let from_flags = p2pss(TINY);
    assert_eq!(from_file.stdout, from_flags.stdout);

    // A flag overrides the file: a different seed changes the rows.
    let overridden = p2pss(&["run", "--config", path.to_str().unwrap(), "--seed", "6"]);
    assert!(overridden.status.success());
    assert_ne!(overridden.stdout, from_file.stdout);
}

#[test]
fn trace_out_writes_per_round_rows() {
    let dir = std::env::temp_dir().join("p2pss-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("trace.csv");
    let mut args = TINY.to_vec();
    args.extend_from_slice(&["--trace-out", path.to_str().unwrap()]);
    let out = p2pss(&args);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "run_id,round,sum_n_est,sum_q_est,var_n_est,online"
    );
    // 2 repetitions x (initial row + 30 rounds).
    assert_eq!(text.lines().count(), 1 + 2 * 31);
}

#[test]
fn exit_codes_match_error_classes() {
    // Config error: out-of-range threshold.
    let bad_config = p2pss(&["run", "--phi", "2.0", "--peers", "4", "--n", "100"]);
    assert_eq!(bad_config.status.code(), Some(1));

    // Unknown flag is a usage error, also exit 1.
    let bad_flag = p2pss(&["run", "--no-such-flag"]);
    assert_eq!(bad_flag.status.code(), Some(1));

    // Infeasible: the confidence radius never drops below 1 in 0 rounds.
    let mut args = TINY.to_vec();
    let idx = args.iter().position(|a| *a == "--rounds").unwrap();
    args[idx + 1] = "0";
    let infeasible = p2pss(&args);
    assert_eq!(infeasible.status.code(), Some(2));

    // Infeasible plan: rounds below the feasibility boundary.
    let plan = p2pss(&[
        "plan",
        "--phi",
        "0.02",
        "--eps",
        "0.01",
        "--p-star",
        "10000",
        "--rounds",
        "20",
    ]);
    assert_eq!(plan.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = p2pss(&["--help"]);
    assert!(out.status.success());
}
