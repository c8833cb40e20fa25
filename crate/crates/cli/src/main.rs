mod args;
mod commands;
mod manifest;

use std::time::Instant;

use clap::Parser;

use args::{Cli, Command, IncidenceCmd, OracleCmd, ReportCmd};
use commands::Outcome;
use lattice_cover::error::Error;
use manifest::RunManifest;

fn main() {
    init_thread_pool();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(execute(&argv, 0));
}

/// Thread count from LATTICE_COVER_THREADS (0 or unset = automatic).
/// Results never depend on it; only wall time does.
fn init_thread_pool() {
    if let Ok(v) = std::env::var("LATTICE_COVER_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn execute(argv: &[String], depth: u32) -> i32 {
    let with_binary: Vec<String> =
        std::iter::once("lattice-cover".to_string()).chain(argv.iter().cloned()).collect();
    let cli = match Cli::try_parse_from(&with_binary) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprint!("{e}");
            return 4;
        }
    };

    if let Command::Replay(replay) = &cli.command {
        if depth > 0 {
            eprintln!("error: a manifest may not replay another replay");
            return 4;
        }
        let m = match RunManifest::load(&replay.manifest) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        };
        if m.command.first().map(String::as_str) == Some("replay") {
            eprintln!("error: recorded command is itself a replay");
            return 4;
        }
        return execute(&m.command, depth + 1);
    }

    let started = Instant::now();
    let result = dispatch(&cli);
    let elapsed = started.elapsed().as_millis();
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if let Some(path) = &cli.manifest {
                let mut m = RunManifest::new(argv.to_vec(), cli.seed);
                m.parameters = outcome.parameters.clone();
                m.derived = outcome.derived.clone();
                m.timings_ms.insert("total".into(), elapsed);
                if let Err(e) = m.write(path) {
                    eprintln!("error: cannot write manifest: {e}");
                    return 3;
                }
            }
            outcome.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Minima(a) => commands::minima(a),
        Command::Cover(a) => commands::cover(a),
        Command::Evasive(a) => commands::evasive(a, cli.seed),
        Command::Incidence(IncidenceCmd::Build(a)) => commands::incidence_build(a, cli.seed),
        Command::Incidence(IncidenceCmd::Check(a)) => commands::incidence_check(a),
        Command::Incidence(IncidenceCmd::Exponents { d_max }) => {
            commands::incidence_exponents(*d_max)
        }
        Command::Oracle(OracleCmd::Cover(a)) => commands::oracle_cover(a),
        Command::Oracle(OracleCmd::Evasive(a)) => commands::oracle_evasive(a),
        Command::Report(ReportCmd::CoverSweep(a)) => commands::report_cover_sweep(a, cli.csv),
        Command::Replay(_) => unreachable!("handled in execute"),
    }
}
