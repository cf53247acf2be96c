use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chemofv::io::{read_snapshot_csv, write_snapshot_csv, write_vtk_structured_points};
use chemofv::sim::{self, extract_contour};
use chemofv::Error;

use crate::config::{parse_kind, resolve, ConfigFile, OutputFormat, Resolved, Sources};
use crate::error::CliError;
use crate::{ConfigArgs, OUTPUT_DIR_ENV};

const DEFAULT_OUTPUT_DIR: &str = "chemofv-output";

fn load(args: &ConfigArgs) -> Result<Resolved, CliError> {
    resolve(&Sources {
        config_path: args.config.as_deref(),
        preset: args.preset.as_deref(),
        overrides: &args.overrides,
    })
}

/// `--out`, then `[output] directory`, then the environment, then a fixed
/// default.
fn output_dir(args: &ConfigArgs, file: &ConfigFile) -> PathBuf {
    args.out
        .clone()
        .or_else(|| file.output.directory.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("cannot create `{}`: {e}", path.display())))
}

fn write_manifest(dir: &Path, resolved: &Resolved, file: &ConfigFile, command: &str) -> Result<PathBuf, CliError> {
    let manifest = file.manifest(command, resolved.preset_name.as_deref(), dir);
    let path = dir.join("manifest.toml");
    let mut w = create(&path)?;
    w.write_all(manifest.to_toml()?.as_bytes())?;
    w.flush()?;
    Ok(path)
}

pub fn run(args: &ConfigArgs, strict: bool) -> Result<(), CliError> {
    let resolved = load(args)?;
    let file = &resolved.file;
    let mut config = file.to_run_config()?;
    config.strict = strict;
    let dir = output_dir(args, file);
    fs::create_dir_all(&dir)?;

    let out = sim::run(&config)?;

    let mut w = create(&dir.join("diagnostics.csv"))?;
    out.diagnostics.write_csv(&mut w)?;
    w.flush()?;
    for snap in &out.snapshots {
        let mut w = create(&dir.join(format!("snapshot_{:06}.csv", snap.step)))?;
        write_snapshot_csv(&mut w, &out.mesh, &snap.u, &snap.c)?;
        w.flush()?;
        if file.output.format == OutputFormat::CsvVtk {
            for (name, field) in [("u", &snap.u), ("c", &snap.c)] {
                let mut w = create(&dir.join(format!("{name}_{:06}.vtk", snap.step)))?;
                write_vtk_structured_points(&mut w, &out.mesh, name, field)?;
                w.flush()?;
            }
        }
    }
    let manifest = write_manifest(&dir, &resolved, file, "run")?;

    let last = out.diagnostics.records.last().expect("final record");
    println!(
        "{} steps of the {} scheme to t = {}: mass {:.12e}, u in [{:.6e}, {:.6e}], c in [{:.6e}, {:.6e}]",
        last.step,
        config.variant.kind.name(),
        last.time,
        last.mass,
        last.min_u,
        last.max_u,
        last.min_c,
        last.max_c
    );
    println!("wrote {} snapshot(s) and {}", out.snapshots.len(), manifest.display());
    Ok(())
}

pub fn study(
    args: &ConfigArgs,
    dts: Option<Vec<f64>>,
    variants: Option<Vec<String>>,
    reference_dt: Option<f64>,
) -> Result<(), CliError> {
    let resolved = load(args)?;
    let mut file = resolved.file.clone();
    if let Some(d) = dts {
        file.study.dt_list = Some(d);
    }
    if let Some(v) = variants {
        file.study.variants = Some(v);
    }
    if let Some(r) = reference_dt {
        file.study.reference_dt = Some(r);
    }
    let dt_list = file.study.dt_list.clone().unwrap_or_default();
    if dt_list.len() < 2 {
        return Err(CliError::Usage(format!(
            "a convergence study needs at least two time steps, got {}",
            dt_list.len()
        )));
    }
    let reference = file
        .study
        .reference_dt
        .ok_or_else(|| CliError::Usage("study.reference_dt is not set (use --reference-dt)".into()))?;
    let names = file.study.variants.clone().unwrap_or_else(|| vec!["corrected".into(), "plain".into()]);
    let kinds = names.iter().map(|n| parse_kind(n)).collect::<Result<Vec<_>, _>>()?;
    if kinds.is_empty() {
        return Err(CliError::Usage("no scheme variants given".into()));
    }
    let base = file.to_run_config()?;
    let dir = output_dir(args, &file);
    fs::create_dir_all(&dir)?;

    let (report, failure) = match sim::convergence_study(&base, reference, &dt_list, &kinds) {
        Ok(r) => (r, None),
        Err(Error::StudyAborted { message, partial }) => (*partial, Some(message)),
        Err(e) => return Err(e.into()),
    };
    let mut w = create(&dir.join("study.csv"))?;
    report.write_csv(&mut w)?;
    w.flush()?;
    let mut text = Vec::new();
    report.write_text(&mut text)?;
    fs::write(dir.join("study.txt"), &text)?;
    write_manifest(&dir, &resolved, &file, "study")?;
    print!("{}", String::from_utf8_lossy(&text));
    match failure {
        None => Ok(()),
        Some(message) => Err(CliError::Runtime(format!("study incomplete: {message}"))),
    }
}

pub fn oracle_check(args: &ConfigArgs, warmup: usize) -> Result<(), CliError> {
    let resolved = load(args)?;
    let config = resolved.file.to_run_config()?;
    let cmp = sim::oracle_check(&config, warmup)?;
    println!("dt {}", cmp.dt);
    println!("distance(corrected, oracle) = {:.6e}", cmp.corrected_distance);
    println!("distance(plain, oracle)     = {:.6e}", cmp.plain_distance);
    println!("oracle fixed-point iterations: {}", cmp.oracle_iterations);
    if cmp.corrected_wins() {
        println!("corrected <= plain: ok");
        Ok(())
    } else {
        Err(CliError::Runtime("the corrected step is farther from the oracle than the plain step".into()))
    }
}

pub fn contour(snapshot: &Path, x0: f64, out: Option<&Path>) -> Result<(), CliError> {
    let input = File::open(snapshot)
        .map_err(|e| CliError::Usage(format!("cannot open snapshot `{}`: {e}", snapshot.display())))?;
    let data = read_snapshot_csv(input)?;
    let mesh = data.infer_mesh()?;
    let profile = extract_contour(&data.u, &mesh, x0)?;
    let mut w: Box<dyn Write> = match out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    writeln!(w, "y,u")?;
    for (y, u) in profile {
        writeln!(w, "{y},{u}")?;
    }
    w.flush()?;
    Ok(())
}
