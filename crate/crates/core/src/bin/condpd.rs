use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use condpd::pipeline::{self, AnalysisRequest, GALLERY};
use condpd::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Conditional positive definiteness analyses for sequences and operators.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// JSON request file (`-` for stdin).
    #[arg(long, conflicts_with = "gallery", required_unless_present_any = ["gallery", "list_gallery"])]
    input: Option<PathBuf>,
    /// Named built-in fixture.
    #[arg(long)]
    gallery: Option<String>,
    /// Print the fixture names and exit.
    #[arg(long)]
    list_gallery: bool,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    tol_psd: Option<f64>,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn load(args: &Args) -> condpd::Result<AnalysisRequest> {
    let mut req = match (&args.input, &args.gallery) {
        (Some(path), _) => {
            let text = if path.as_os_str() == "-" {
                std::io::read_to_string(std::io::stdin())
            } else {
                std::fs::read_to_string(path)
            }
            .map_err(|e| Error::Parse {
                location: path.display().to_string(),
                message: e.to_string(),
            })?;
            AnalysisRequest::from_json(&text)?
        }
        (None, Some(name)) => pipeline::gallery(name)?,
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(n) = args.truncation {
        req.truncation = n;
    }
    if let Some(w) = args.window {
        req.window = Some(w);
    }
    if let Some(t) = args.tol_psd {
        req.tolerances.psd_tol = t;
    }
    if let Some(t) = args.tol_rank {
        req.tolerances.rank_tol = t;
    }
    if let Some(s) = args.seed {
        req.seed = s;
    }
    Ok(req)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_gallery {
        for name in GALLERY {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    let report = load(&args).and_then(|req| pipeline::run(&req));
    match report {
        Ok(r) => {
            let text = match args.format {
                Format::Json => r.to_json() + "\n",
                Format::Text => r.to_text(),
            };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 2 } else { 3 })
        }
    }
}
