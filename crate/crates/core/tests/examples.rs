//! Every example builds and runs to completion.

use std::process::Command;

fn run(name: &str) {
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let out = Command::new(cargo)
        .args(["run", "--quiet", "--profile", "test", "--example", name])
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("spawn cargo");
    assert!(
        out.status.success(),
        "example {name} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!out.stdout.is_empty(), "example {name} printed nothing");
}

#[test]
fn attitude_error() {
    run("attitude_error");
}

#[test]
fn passive_dynamics() {
    run("passive_dynamics");
}

#[test]
fn reward_profile() {
    run("reward_profile");
}

#[test]
fn energy_swing_up() {
    run("energy_swing_up");
}

#[test]
fn short_training() {
    run("short_training");
}

#[test]
fn baseline_grid() {
    run("baseline_grid");
}

#[test]
fn deploy_policy() {
    run("deploy_policy");
}
