//! Runs the bundled configurations through the batch front end, as
//! `psidyn run <config>` would, and prints each task's status.

use psidyn::cli::{describe, run, RunOptions};
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let out = std::env::temp_dir().join("psidyn-example-runs");
    for name in ["heat.toml", "sign_changing.toml", "log_laplacian.toml"] {
        let config = dir.join(name);
        print!("{}", describe(&config).expect("valid config"));
        let opts = RunOptions { output_dir: Some(out.join(name.trim_end_matches(".toml"))), ..RunOptions::default() };
        let summary = run(&config, &opts).expect("valid config");
        for t in summary.manifest["tasks"].as_array().unwrap() {
            println!("  -> {} {}", t["kind"].as_str().unwrap(), t["status"].as_str().unwrap());
        }
        println!("exit code {}, artifacts in {}\n", summary.exit_code, summary.output_dir.display());
    }
}
