use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "replica_portfolio.h"

int main(void) {
    RpMoments m = {3.0, 1.0, 1.0, 1.0};
    RpMaxSharpe ms;
    if (rp_max_sharpe(&m, &ms) != RP_STATUS_OK) return 1;
    RpMarketParams p = {6, 12, 1.0, 1.0, 1.0, RP_DISTRIBUTION_GAUSSIAN, RP_DISTRIBUTION_GAUSSIAN, 7};
    RpSample *s = NULL;
    if (rp_sample_generate(&p, 0, &s) != RP_STATUS_OK) return 2;
    double w[6];
    RpPrimalSolution sol;
    if (rp_solve_primal(s, 1.0, &sol, w, 6) != RP_STATUS_OK) return 3;
    rp_sample_free(s);
    p.n_scenarios = 3;
    if (rp_sample_generate(&p, 0, &s) != RP_STATUS_INVALID_ARGUMENT) return 4;
    char msg[128];
    rp_last_error_message(msg, sizeof msg);
    printf("%s %.6f %.6f\n", rp_version(), ms.s_max, sol.epsilon);
    return 0;
}
"#;

fn find_cc() -> Option<String> {
    let candidates = [std::env::var("CC").ok(), Some("cc".into()), Some("gcc".into()), Some("clang".into())];
    candidates.into_iter().flatten().find(|c| {
        Command::new(c).arg("--version").output().map(|o| o.status.success()).unwrap_or(false)
    })
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_is_generated() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/replica_portfolio.h");
    let text = std::fs::read_to_string(header).unwrap();
    for sym in ["rp_sample_generate", "rp_solve_dual", "rp_sweep_run", "RP_STATUS_BUFFER_TOO_SMALL", "typedef struct RpSample RpSample"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
}

#[test]
fn c_program_links_against_static_library() {
    let Some(cc) = find_cc() else {
        eprintln!("no C compiler found, skipping");
        return;
    };
    let lib = target_dir().join("libreplica_portfolio_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
    assert!(stdout.contains(" 1.000000 "), "{stdout}");
}
