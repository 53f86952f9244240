//! Runs the twelve acceptance criteria and prints one line per criterion.

use embezzle_lab::suite::{run_suite, SuiteOptions};

fn main() {
    // `cargo test -- --list` and filtered runs should not trigger the suite
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    if args.iter().any(|a| !a.starts_with('-') && !"acceptance".contains(a.as_str())) {
        return;
    }
    let outcomes = match run_suite(&SuiteOptions::default()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("acceptance suite could not run: {e}");
            std::process::exit(2);
        }
    };
    for o in &outcomes {
        println!(
            "criterion {:>2} {:<26} {}  ({:.2}s) {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.runtime.as_secs_f64(),
            o.detail
        );
        for c in o.checks.iter().filter(|c| !c.holds) {
            println!("    violated: {}: {} (lhs {} rhs {}) [{}]", c.name, c.inequality, c.lhs, c.rhs, c.inputs);
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
