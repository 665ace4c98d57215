//! Command-line front end: `rplsim run` and `rplsim validate`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dump::{dump_tables, DumpOptions};
use crate::scenario::{LoadError, Scenario};
use crate::simulator::Simulation;
use crate::trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rplsim",
    version,
    about = "Deterministic RPL simulator for modes of operation 0, 1 and 2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write metrics.csv (plus optional trace and tables) to the output directory.
    Run {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// RNG seed. Overrides RPL_SIM_SEED and the scenario's `seed`.
        #[arg(long, env = "RPL_SIM_SEED")]
        seed: Option<u64>,
        /// Write trace.log with one line per protocol event.
        #[arg(long)]
        trace: bool,
        /// Write tables.txt with every node's final routing and source routing tables.
        #[arg(long)]
        dump_tables: bool,
        /// Include parent-table rows in tables.txt.
        #[arg(long, requires = "dump_tables")]
        dump_parents: bool,
    },
    /// Check a scenario file and report every problem found.
    Validate {
        /// Scenario JSON file.
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn load(path: &Path, err: &mut dyn Write) -> Result<Scenario, i32> {
    match Scenario::load(path) {
        Ok(s) => Ok(s),
        Err(e @ LoadError::Io { .. }) => {
            let _ = writeln!(err, "error: {e}");
            Err(EXIT_IO)
        }
        Err(e @ LoadError::Invalid(_)) => {
            let _ = writeln!(err, "error: {e}");
            Err(EXIT_INVALID)
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str, err: &mut dyn Write) -> Result<(), i32> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| {
        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
        EXIT_IO
    })
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cli.command {
        Command::Validate { scenario } => match load(&scenario, err) {
            Ok(_) => {
                let _ = writeln!(out, "ok");
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run {
            scenario,
            out: dir,
            seed,
            trace: want_trace,
            dump_tables: want_tables,
            dump_parents,
        } => {
            let mut scenario = match load(&scenario, err) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            if let Err(e) = fs::create_dir_all(&dir) {
                let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
                return EXIT_IO;
            }
            let mut sim = Simulation::new(&scenario, want_trace);
            if !sim.is_connected() {
                let _ = writeln!(
                    err,
                    "warning: topology is not connected; some nodes cannot join"
                );
            }
            sim.run();
            let result = sim.finish();
            let mut files = vec![("metrics.csv", result.metrics.to_csv())];
            if want_trace {
                files.push(("trace.log", trace::render(&result.trace)));
            }
            if want_tables {
                let opts = DumpOptions {
                    parents: dump_parents,
                };
                files.push(("tables.txt", dump_tables(&result.nodes, opts)));
            }
            for (name, contents) in files {
                if let Err(code) = write_file(&dir, name, &contents, err) {
                    return code;
                }
            }
            EXIT_OK
        }
    }
}

/// Parse `args` and run. Argument errors exit with clap's own status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    execute(cli, &mut std::io::stdout(), &mut std::io::stderr())
}
