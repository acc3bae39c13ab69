use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/relaycache.h");
    std::fs::read_to_string(path).expect("header generated by build script")
}

#[test]
fn header_declares_every_export() {
    let h = header();
    for name in [
        "rc_last_error",
        "rc_version",
        "rc_topology_random",
        "rc_topology_combination",
        "rc_topology_from_lists",
        "rc_topology_load",
        "rc_topology_save",
        "rc_topology_set_capacities",
        "rc_topology_free",
        "rc_topology_num_relays",
        "rc_topology_num_users",
        "rc_topology_user_degree",
        "rc_solve_maxlink",
        "rc_solve_delivery_time",
        "rc_solve_dynamic",
        "rc_baseline_maxlink",
        "rc_verify",
    ] {
        assert!(h.contains(&format!("{name}(")), "missing {name}");
    }
    assert!(h.contains("typedef struct RcTopology RcTopology;"));
    assert!(h.contains("RC_STATUS_OK = 0"));
    assert!(h.contains("RC_STATUS_BUFFER_TOO_SMALL = 8"));
    assert!(h.contains("#ifndef RELAYCACHE_H"));
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include "relaycache.h"

int main(void) {
    RcTopology *t = NULL;
    if (rc_topology_random(5, 5, 5, 0, &t) != RC_STATUS_OK) return 1;
    double z = 0.0, loads[5];
    if (rc_solve_maxlink(t, 2, &z, loads, 5) != RC_STATUS_OK) return 2;
    if (z < 1.999999 || z > 2.000001) return 3;
    RcTopology *bad = NULL;
    if (rc_topology_random(2, 2, 3, 0, &bad) != RC_STATUS_INVALID_ARGUMENT) return 4;
    if (rc_last_error() == NULL) return 5;
    rc_topology_free(t);
    printf("%.6f\n", z);
    return 0;
}
"#;

/// `cargo test` links the rlib only, so build the static library explicitly.
fn static_library() -> PathBuf {
    // .../target/<profile>/deps/header-<hash>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let mut cmd = Command::new(env!("CARGO"));
    cmd.args(["build", "--quiet", "-p", "relaycache-ffi", "--lib"])
        .current_dir(env!("CARGO_MANIFEST_DIR"));
    if profile_dir.file_name().is_some_and(|n| n == "release") {
        cmd.arg("--release");
    }
    assert!(cmd.status().unwrap().success(), "cargo build failed");
    profile_dir.join("librelaycache_ffi.a")
}

#[test]
fn c_program_links_against_static_library() {
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&compiler).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler `{compiler}`");
        return;
    }
    let lib = static_library();
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("c-smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let exe = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&compiler)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2.000000");
}
