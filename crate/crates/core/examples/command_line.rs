//! Drives the command-line interface in-process and captures its output.

use poisson_sharp::cli::run_with;

fn main() {
    let commands: [&[&str]; 3] = [
        &["poisson-sharp", "kappa", "--n", "3", "--alpha", "0.5"],
        &[
            "poisson-sharp",
            "--format",
            "csv",
            "sweep",
            "--n-range",
            "2:3",
            "--alpha-range",
            "0.5:2:4",
            "--p-range",
            "1,2,inf",
        ],
        &[
            "poisson-sharp",
            "--format",
            "json",
            "--no-timing",
            "constant",
            "--n",
            "2",
            "--alpha",
            "1",
            "--p",
            "3",
            "--gamma",
            "0.5",
            "--height",
            "2",
        ],
    ];
    for argv in commands {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(argv.iter().copied(), &mut out, &mut err);
        println!("$ {}  (exit {code})", argv[1..].join(" "));
        print!("{}", String::from_utf8_lossy(&out));
        eprint!("{}", String::from_utf8_lossy(&err));
    }
}
