use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use wgloc::cli::config::{read_config_file, resolve, Cli, CliCommand, Command, OUT_DIR_ENV};
use wgloc::cli::output::MANIFEST_NAME;
use wgloc::cli::run;
use wgloc::Result;

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn set_threads(threads: Option<usize>) {
    if let Some(k) = threads {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
}

fn main_inner(cli: Cli) -> Result<()> {
    let (command, flags) = match cli.command {
        CliCommand::Evolve(p) => (Command::Evolve, p),
        CliCommand::Modes(p) => (Command::Modes, p),
        CliCommand::ScanSpacing(p) => (Command::ScanSpacing, p),
        CliCommand::ScanGeometry(p) => (Command::ScanGeometry, p),
        CliCommand::ScanDisorder(p) => (Command::ScanDisorder, p),
        CliCommand::ScanSize(p) => (Command::ScanSize, p),
        CliCommand::Rerun {
            manifest,
            out_dir,
            threads,
        } => {
            set_threads(threads);
            let dir = out_dir
                .or_else(env_out_dir)
                .unwrap_or_else(|| PathBuf::from("out"));
            let fresh = run::rerun(&manifest, &dir)?;
            println!(
                "reproduced {} files in {}",
                fresh.files.len(),
                dir.display()
            );
            return Ok(());
        }
    };
    let file = cli.config.as_deref().map(read_config_file).transpose()?;
    let (job, runtime) = resolve(command, flags, file, env_out_dir())?;
    set_threads(runtime.threads);
    let (manifest, summary) = run::run(&job, &runtime.out_dir)?;
    for line in summary {
        println!("{line}");
    }
    for name in manifest.files.keys() {
        println!("wrote {}", runtime.out_dir.join(name).display());
    }
    println!("wrote {}", runtime.out_dir.join(MANIFEST_NAME).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgloc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
