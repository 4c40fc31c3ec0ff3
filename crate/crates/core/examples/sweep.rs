//! Drive the command-line front end from code: a small sweep of three
//! selectors written as CSV to stdout.
//!
//! Run with `cargo run --release --example sweep`.

fn main() {
    let args = [
        "dualcap", "sweep", "--selector", "thm2.1,thm2.2,achievable", "--start", "0", "--stop", "1", "--points", "6",
        "--n", "20000", "--seed", "7",
    ];
    let code = dualcap::cli::run(args.iter().map(|s| s.to_string()).collect());
    std::process::exit(code);
}
