//! Command-line front end: synthesis, recovery runs, sweeps, the scalar
//! convergence table and preset batches.

pub mod config;
pub mod experiments;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::cli::config::{preset, ExperimentConfig, PRESET_NAMES};
use crate::cli::experiments::{
    curves_report, run_experiment, sweep_report, thread_count, ExperimentOutput,
};
use crate::convlab::{default_case_table, find_alpha_star};
use crate::error::{Error, Result};
use crate::metrics::{ms_ssim, psnr_db, ssim, QualityReport};
use crate::signal::{Shape, Signal};
use crate::signals::{
    gen_lp_signal, gen_sparse_signal, gen_texture_image, save_pgm, RandomStream, SparseSpec,
    SparsityDomain,
};

#[derive(Parser)]
#[command(
    name = "nlaccel",
    version,
    about = "Nonlinear acceleration for iterative signal recovery"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for independent trials; overrides NLACCEL_THREADS.
    /// Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthKind {
    /// Band-limited noise at unit RMS (CSV).
    Lp,
    /// Signal with a sparse Fourier spectrum (CSV of samples and
    /// coefficients).
    Sparse,
    /// Procedural grayscale texture (PGM).
    Texture,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reproducible test signal or image.
    Synth {
        kind: SynthKind,
        /// Output file: CSV for 1-D kinds, PGM for images.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        len: usize,
        #[arg(long, default_value_t = 8)]
        oversampling: usize,
        #[arg(long, default_value_t = 0.05)]
        p_nz: f64,
        #[arg(long, default_value_t = 256)]
        rows: usize,
        #[arg(long, default_value_t = 256)]
        cols: usize,
    },
    /// Run one experiment config; write quality curves and, for images,
    /// the recovered pictures.
    Recover {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// PGM image overriding whatever the config names.
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Run one experiment config and write per-trial final metrics.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[arg(long)]
        image: Option<PathBuf>,
    },
    /// Cross-check the scalar error-recursion table and write it as CSV.
    Convlab {
        #[arg(long, default_value = "convlab-table.csv")]
        out: PathBuf,
    },
    /// Run a named preset batch of experiments.
    Figures {
        /// One of the built-in preset names.
        #[arg(long)]
        preset: String,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        image: Option<PathBuf>,
    },
}

fn write_numeric_csv(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn write_report(path: &Path, report: &QualityReport) -> Result<()> {
    let mut file = fs::File::create(path)?;
    report.write_csv(&mut file)?;
    file.flush()?;
    Ok(())
}

fn final_image_quality(out: &ExperimentOutput) -> Result<Option<QualityReport>> {
    let Some(images) = &out.images else {
        return Ok(None);
    };
    let with_ms = match images.truth.shape() {
        Shape::TwoD { rows, cols } => (rows >> 4) >= 11 && (cols >> 4) >= 11,
        Shape::OneD(_) => false,
    };
    let mut columns = vec!["plain_psnr_db".to_string(), "plain_ssim".to_string()];
    if with_ms {
        columns.push("plain_ms_ssim".into());
    }
    if images.accelerated_final.is_some() {
        columns.push("mnl_psnr_db".into());
        columns.push("mnl_ssim".into());
        if with_ms {
            columns.push("mnl_ms_ssim".into());
        }
    }
    let mut report = QualityReport::new(columns)?;
    let mut row = Vec::new();
    let push_arm = |final_img: &Signal, row: &mut Vec<f64>| -> Result<()> {
        row.push(psnr_db(&images.truth, final_img, 255.0)?);
        row.push(ssim(&images.truth, final_img)?);
        if with_ms {
            row.push(ms_ssim(&images.truth, final_img)?);
        }
        Ok(())
    };
    push_arm(&images.plain_final, &mut row)?;
    if let Some(a) = &images.accelerated_final {
        push_arm(a, &mut row)?;
    }
    report.push_row(row)?;
    Ok(Some(report))
}

fn emit_experiment(
    cfg: &ExperimentConfig,
    threads: usize,
    image_override: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let out = run_experiment(cfg, threads, image_override)?;
    fs::create_dir_all(out_dir)?;
    let curves_path = out_dir.join(format!("{}-curves.csv", cfg.name));
    write_report(&curves_path, &curves_report(&out.curves)?)?;
    println!("{}: wrote {}", cfg.name, curves_path.display());

    if let Some(images) = &out.images {
        if images.used_procedural {
            println!(
                "{}: no input image configured, recovered a procedural texture \
                 (pass --image <file.pgm> to use your own)",
                cfg.name
            );
        }
        let save = |tag: &str, img: &Signal| -> Result<()> {
            let path = out_dir.join(format!("{}-{tag}.pgm", cfg.name));
            save_pgm(&path, img)?;
            println!("{}: wrote {}", cfg.name, path.display());
            Ok(())
        };
        save("truth", &images.truth)?;
        save("observed", &images.observed)?;
        save("plain", &images.plain_final)?;
        if let Some(a) = &images.accelerated_final {
            save("mnl", a)?;
        }
        if let Some(report) = final_image_quality(&out)? {
            let path = out_dir.join(format!("{}-final-quality.csv", cfg.name));
            write_report(&path, &report)?;
            println!("{}: wrote {}", cfg.name, path.display());
        }
    }

    let metric = out.curves.metric;
    let plain_last = *out.curves.plain.mean.last().expect("curves are non-empty");
    match &out.curves.accelerated {
        Some(a) => {
            let mnl_last = *a.mean.last().expect("curves are non-empty");
            println!(
                "{}: final mean {metric}: plain {plain_last:.3}, mnl {mnl_last:.3}",
                cfg.name
            );
        }
        None => println!("{}: final mean {metric}: plain {plain_last:.3}", cfg.name),
    }
    Ok(())
}

fn run_synth(
    kind: SynthKind,
    out: &Path,
    seed: u64,
    len: usize,
    oversampling: usize,
    p_nz: f64,
    rows: usize,
    cols: usize,
) -> Result<()> {
    let stream = RandomStream::new(seed, 0);
    match kind {
        SynthKind::Lp => {
            let sig = gen_lp_signal(len, oversampling, &stream)?;
            write_numeric_csv(
                out,
                &["sample"],
                sig.data().iter().map(|&v| vec![v]),
            )?;
        }
        SynthKind::Sparse => {
            let spec = SparseSpec {
                len,
                p_nz,
                sigma_off: 0.0,
                domain: SparsityDomain::RealFourier,
            };
            let sparse = gen_sparse_signal(&spec, &stream)?;
            write_numeric_csv(
                out,
                &["sample", "coefficient"],
                sparse
                    .time
                    .data()
                    .iter()
                    .zip(&sparse.coeffs)
                    .map(|(&t, &c)| vec![t, c]),
            )?;
        }
        SynthKind::Texture => {
            let img = gen_texture_image(rows, cols, &stream)?;
            save_pgm(out, &img)?;
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run_convlab(out: &Path) -> Result<()> {
    let table = default_case_table()?;
    write_numeric_csv(
        out,
        &[
            "family", "variant", "alpha", "delta", "e2", "direct", "closed", "abs_diff",
        ],
        table.iter().map(|row| {
            vec![
                row.case.family() as f64,
                row.case.variant() as f64,
                row.alpha,
                row.delta,
                row.e2,
                row.direct,
                row.closed,
                row.abs_diff(),
            ]
        }),
    )?;
    let worst = table
        .iter()
        .map(|r| {
            let scale = r.closed.abs().max(1.0);
            r.abs_diff() / scale
        })
        .fold(0.0, f64::max);
    println!("wrote {} ({} rows)", out.display(), table.len());
    println!("largest relative gap between direct and closed form: {worst:.3e}");
    println!("universal contraction threshold alpha* = {:.5}", find_alpha_star());
    Ok(())
}

/// Executes a parsed invocation.
pub fn run(cli: Cli) -> Result<()> {
    let threads = thread_count(cli.threads);
    match cli.command {
        Command::Synth {
            kind,
            out,
            seed,
            len,
            oversampling,
            p_nz,
            rows,
            cols,
        } => run_synth(kind, &out, seed, len, oversampling, p_nz, rows, cols),
        Command::Recover {
            config,
            out_dir,
            image,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            emit_experiment(&cfg, threads, image.as_deref(), &out_dir)
        }
        Command::Sweep { config, out, image } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = sweep_report(&cfg, threads, image.as_deref())?;
            write_report(&out, &report)?;
            println!("wrote {} ({} trials)", out.display(), report.rows().len());
            Ok(())
        }
        Command::Convlab { out } => run_convlab(&out),
        Command::Figures {
            preset: name,
            out_dir,
            image,
        } => {
            let configs = preset(&name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset '{name}'; available: {}",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            for cfg in &configs {
                emit_experiment(cfg, threads, image.as_deref(), &out_dir)?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argument_grammar_parses_the_documented_forms() {
        let cli = Cli::try_parse_from([
            "nlaccel", "synth", "texture", "--out", "t.pgm", "--rows", "64", "--cols", "48",
        ])
        .unwrap();
        match cli.command {
            Command::Synth {
                kind: SynthKind::Texture,
                rows: 64,
                cols: 48,
                ..
            } => {}
            _ => panic!("parsed into the wrong command"),
        }
        assert!(Cli::try_parse_from(["nlaccel", "recover"]).is_err());
        let cli = Cli::try_parse_from([
            "nlaccel",
            "--threads",
            "4",
            "figures",
            "--preset",
            "fig2",
        ])
        .unwrap();
        assert_eq!(cli.threads, Some(4));
    }
}
