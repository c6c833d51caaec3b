//! Driving the scenario runner programmatically: list the bundled
//! scenarios, run one with a fixed seed and clock, and print its JSON
//! report. The same reports are produced by the `ultrachan` binary
//! (`ultrachan run <id>` / `ultrachan verify-all`).

use ultrachan::scenario::{bundled, bundled_scenarios, Verdict};

fn main() {
    println!("bundled scenarios:");
    for (id, description, _) in bundled_scenarios() {
        println!("  {id:<24} {description}");
    }

    let scenario = bundled("sigma-additivity").expect("bundled scenario");
    let report = scenario.run(0, true).expect("runs cleanly");

    println!("\nper-check verdicts:");
    for record in &report.records {
        let mark = match record.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "????",
        };
        println!("  [{mark}] {}", record.id);
    }
    println!("scenario pass: {}", report.pass);

    println!("\nJSON report:\n{}", report.to_json());
}
