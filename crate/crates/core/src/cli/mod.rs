//! Command-line pipeline. Exit codes: 0 success, 1 data error, 2 usage error.

mod args;
mod commands;
pub mod plot;

use std::ffi::OsString;

pub use args::{parse_args, Command, RunConfig};
pub use commands::truths;
pub use plot::emit_plot_data;

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Structured diagnostic printed on stderr for data errors.
pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({
        "error": e.code(),
        "message": e.to_string(),
        "record": e.record_id(),
    })
}

fn dispatch(command: &Command) -> crate::Result<()> {
    match command {
        Command::Align(a) => commands::align(a),
        Command::Covariates(a) => commands::covariates(a),
        Command::Discretize(a) => commands::discretize(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Ace(a) => commands::ace_cmd(a),
        Command::Cmi(a) => commands::cmi(a),
        Command::Report(a) => commands::report(a),
        Command::Synth(a) => commands::synth(a),
    }
}

/// Runs a parsed configuration on a pool of `jobs` threads.
pub fn run(config: &RunConfig) -> i32 {
    let jobs = config
        .jobs
        .map(|j| j as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", serde_json::json!({"error": "E_IO", "message": e.to_string(), "record": null}));
            return EXIT_DATA;
        }
    };
    match pool.install(|| dispatch(&config.command)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            EXIT_DATA
        }
    }
}

/// Parses and runs; usage errors print to stderr and return 2.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(argv) {
        Ok(config) => run(&config),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
