//! Acceptance run over the default grid: one PASS/FAIL line per criterion,
//! non-zero exit if any fails.

use std::process::ExitCode;

use phaselab::grid::default_grid;
use phaselab::verify::{verify, VerifyConfig};

fn main() -> ExitCode {
    let report = verify(&default_grid(), &VerifyConfig::default());
    print!("{}", report.render());
    let failed: Vec<u8> = report
        .criteria
        .iter()
        .filter(|c| !c.pass())
        .map(|c| c.id)
        .collect();
    if report.criteria.len() == 11 && failed.is_empty() {
        println!("acceptance: 11/11 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
