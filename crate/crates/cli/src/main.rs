use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use spectral_witness_cli::args::ReportFormat;
use spectral_witness_cli::{commands, report, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.config;
    let outcome = match commands::run(&cli.command, cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(path) = &cfg.trace_out {
        if let Err(e) = report::write_trace(path, &outcome.trace) {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let rendered = match cfg.report {
        ReportFormat::Json => outcome.render_json(),
        ReportFormat::Text => outcome.render_text(),
    };
    let _ = writeln!(std::io::stdout().lock(), "{rendered}");
    ExitCode::from(outcome.status.exit_code() as u8)
}
