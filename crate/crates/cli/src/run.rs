use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use regvort::dynamics::{self, ConvergenceSetup, Reference, Trajectory};
use regvort::kernels::{self, SampleSpec};
use regvort::measures;
use regvort::{build_shape, io, picard, GridSpec, KernelProfile, ShapeTable, Vec2, VortexSystem};
use serde::Serialize;

use crate::config::{InitialData, PatchLayout, RunConfig};

fn vec2(p: [f64; 2]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

fn profile(config: &RunConfig) -> anyhow::Result<KernelProfile> {
    let name = config.kernel.name.as_str();
    match name {
        "blob" | "alpha" => Ok(KernelProfile::by_name(name)?),
        _ => KernelProfile::from_csv_path(name).with_context(|| format!("kernel.name: loading profile `{name}`")),
    }
}

fn shape(config: &RunConfig) -> anyhow::Result<ShapeTable> {
    if config.kernel.name == "exact" {
        return Ok(ShapeTable::exact());
    }
    Ok(build_shape(&profile(config)?, &GridSpec::default(), config.kernel.epsilon)?)
}

pub fn initial_system(config: &RunConfig) -> anyhow::Result<VortexSystem> {
    let sys = match &config.initial_data {
        InitialData::Points {
            positions,
            circulations,
        } => VortexSystem::new(positions.iter().copied().map(vec2).collect(), circulations.clone(), "points")?,
        InitialData::File { path } => {
            let f = File::open(path).with_context(|| format!("initial_data.path: opening {}", path.display()))?;
            io::read_system(BufReader::new(f), "file")?
        }
        InitialData::Patch {
            center,
            radius,
            omega,
            layout: PatchLayout::Lattice,
            spacing,
            ..
        } => measures::rankine_patch(vec2(*center), *radius, *omega, *spacing)?,
        InitialData::Patch {
            center,
            radius,
            omega,
            layout: PatchLayout::Polar,
            rings,
            per_ring,
            ..
        } => measures::polar_rankine_patch(vec2(*center), *radius, *omega, *rings, *per_ring)?,
        InitialData::Sheet {
            start,
            end,
            strength,
            n,
            elliptic,
        } => {
            let (a, b) = (vec2(*start), vec2(*end));
            let elliptic = *elliptic;
            let strength = *strength;
            measures::discretize_sheet(
                |s| a + (0.5 * (s + 1.0)) * (b - a),
                |s| if elliptic { strength * (1.0 - s * s).max(0.0).sqrt() } else { strength },
                -1.0,
                1.0,
                *n,
            )?
        }
    };
    Ok(sys)
}

fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a RunConfig,
}

/// Run `command` and write its outputs plus `manifest.json` into
/// `config.output`. Returns the names of the files written.
pub fn run(command: &str, config: &RunConfig) -> anyhow::Result<Vec<String>> {
    let dir = config.output.as_path();
    std::fs::create_dir_all(dir).with_context(|| format!("output: creating {}", dir.display()))?;
    let mut files = match command {
        "kernel-verify" => kernel_verify(config, dir)?,
        "l1-distance" => l1_distance(config, dir)?,
        "simulate" => simulate(config, dir)?,
        "converge" => converge(config, dir)?,
        "picard" => run_picard(config, dir)?,
        other => bail!("unknown command `{other}`"),
    };
    write_json(
        dir,
        "manifest.json",
        &Manifest {
            version: regvort::VERSION,
            command,
            config,
        },
    )?;
    files.push("manifest.json".into());
    Ok(files)
}

fn kernel_verify(config: &RunConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    let shape = shape(config)?;
    let spec = SampleSpec {
        radial_samples: config.experiment.radial_samples,
        pairs: config.experiment.pairs,
        seed: config.seed,
        ..SampleSpec::default()
    };
    let report = kernels::verify_kernel_lemmas(&shape, &spec)?;
    write_json(dir, "kernel_report.json", &report)?;
    Ok(vec!["kernel_report.json".into()])
}

fn l1_distance(config: &RunConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    let shape = shape(config)?;
    let mut eps = vec![config.kernel.epsilon];
    for &e in &config.experiment.eps_list {
        if !eps.contains(&e) {
            eps.push(e);
        }
    }
    let reports = eps
        .iter()
        .map(|&e| kernels::l1_kernel_distance(&shape, e))
        .collect::<regvort::Result<Vec<_>>>()?;
    write_json(dir, "l1_report.json", &reports)?;
    Ok(vec!["l1_report.json".into()])
}

fn write_trajectory(dir: &Path, name: &str, tr: &Trajectory) -> anyhow::Result<()> {
    let mut w = create(dir, name)?;
    io::write_trajectory(&mut w, tr)?;
    w.flush()?;
    Ok(())
}

fn simulate(config: &RunConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    let system = initial_system(config)?;
    let shape = shape(config)?;
    let t = &config.time;
    let tr = dynamics::evolve(&system, &shape, t.t_end, t.dt, t.sample_every)?;

    let mut w = create(dir, "initial.csv")?;
    io::write_system(&mut w, &system)?;
    w.flush()?;
    write_trajectory(dir, "trajectory.csv", &tr)?;
    let mut w = create(dir, "diagnostics.jsonl")?;
    io::write_diagnostics(&mut w, &tr.diagnostics)?;
    w.flush()?;
    Ok(vec!["initial.csv".into(), "trajectory.csv".into(), "diagnostics.jsonl".into()])
}

fn converge(config: &RunConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    let e = &config.experiment;
    let reference = match e.reference.as_str() {
        "analytic_radial" => Reference::AnalyticRadial,
        "exact_kernel" => Reference::ExactKernel,
        _ => Reference::SmallestEpsilon,
    };
    let setup = ConvergenceSetup {
        system: initial_system(config)?,
        tracers: dynamics::tracer_ring(vec2(e.tracers.center), e.tracers.radius, e.tracers.count),
        profile: profile(config)?,
        grid: GridSpec::default(),
        eps_list: e.eps_list.clone(),
        t_end: config.time.t_end,
        dt: config.time.dt,
        sample_every: config.time.sample_every,
        reference,
        check_dt: e.check_dt,
    };
    let report = dynamics::convergence_experiment(&setup)?;
    write_json(dir, "convergence.json", &report)?;

    let mut w = create(dir, "convergence.csv")?;
    writeln!(w, "epsilon,error,error_half_dt,dt_sensitivity")?;
    let opt = |v: Option<f64>| v.map(io::fmt_f64).unwrap_or_default();
    for r in &report.rows {
        writeln!(
            w,
            "{},{},{},{}",
            io::fmt_f64(r.epsilon),
            io::fmt_f64(r.error),
            opt(r.error_half_dt),
            opt(r.dt_sensitivity)
        )?;
    }
    w.flush()?;
    Ok(vec!["convergence.json".into(), "convergence.csv".into()])
}

fn run_picard(config: &RunConfig, dir: &Path) -> anyhow::Result<Vec<String>> {
    let system = initial_system(config)?;
    let shape = shape(config)?;
    let e = &config.experiment;
    let store = picard::picard_iterate(&system, &shape, config.time.t_end, config.time.dt, e.n_max, e.tol)?;
    write_json(dir, "picard.json", &picard::cauchy_report(&store))?;

    let every = config.time.sample_every;
    let last = store.times.len() - 1;
    let keep: Vec<usize> = (0..=last).filter(|i| i % every == 0 || *i == last).collect();
    let final_iterate = Trajectory {
        times: keep.iter().map(|&i| store.times[i]).collect(),
        states: keep.iter().map(|&i| store.last()[i].clone()).collect(),
        system: store.system.clone(),
        diagnostics: Vec::new(),
    };
    write_trajectory(dir, "picard_trajectory.csv", &final_iterate)?;
    Ok(vec!["picard.json".into(), "picard_trajectory.csv".into()])
}
