use std::process::ExitCode;
use std::time::Instant;

use inclab::verify::{run_criterion, CRITERIA, DEFAULT_SEED};

fn main() -> ExitCode {
    let mut failed = 0;
    for (id, _) in CRITERIA {
        let start = Instant::now();
        let out = run_criterion(id, DEFAULT_SEED).expect("known criterion");
        println!(
            "criterion {:>2} {}  {:<38} {:>9.2?}  {}",
            out.id,
            if out.passed { "PASS" } else { "FAIL" },
            out.name,
            start.elapsed(),
            out.detail
        );
        failed += usize::from(!out.passed);
    }
    println!("acceptance: {} passed, {failed} failed", CRITERIA.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
