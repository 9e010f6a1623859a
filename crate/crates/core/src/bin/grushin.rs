use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use grushin::config::{Config, RunManifest};
use grushin::family::{random_field, FamilyKind, FamilySpec};
use grushin::field::synthesize;
use grushin::geometry::control_distance;
use grushin::grid::{fmt_f64, make_grid, Grid};
use grushin::io::{write_binary, write_csv};
use grushin::probe::ProbeReport;
use grushin::reduce::{with_workers, workers_from_env};
use grushin::riesz::{bilinear_apply_direct, bilinear_apply_separated, dilation_covariance_check, FourierSeriesExpansion, RieszParams};
use grushin::suite::{run_suite, SUITES};
use grushin::thresholds::{table_csv, threshold_table, Variant};
use grushin::verify::{
    coefficient_decay_probe, dyadic_decay_probe, kernel_samples, kernel_table, mixed_norm_decay_probe,
    pointwise_kernel_probe, weighted_plancherel_probe, DecayProbeSpec, KernelSampleSpec, PlancherelKind,
    PlancherelParams, VolumeVariant,
};
use grushin::{Dims, SpectralField, Symbol2D};
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "grushin", version, about = "Grushin spectral calculus and bilinear Bochner-Riesz experiments")]
struct Cli {
    /// key=value config file; without it the default grid is used.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads; overrides GRUSHIN_WORKERS and the `workers` key.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write the grid nodes and resolvable degrees.
    Grid,
    /// Synthesize a field from a named family.
    Field,
    /// Apply a bilinear Riesz mean or dyadic piece to two family fields.
    Riesz,
    /// Bilinear kernel values of the dyadic pieces on sampled triples.
    Kernel,
    /// Run a named probe suite.
    Verify {
        #[arg(long)]
        suite: Option<String>,
    },
    /// Threshold table over the exponent square.
    Thresholds,
    /// Run one probe.
    Probe {
        /// decay, mixed, coefficients, plancherel, kernel or dilation.
        #[arg(long)]
        kind: String,
    },
}

struct Run {
    cfg: Config,
    out: PathBuf,
    argv: Vec<String>,
    start: Instant,
}

impl Run {
    fn default_key(&mut self, key: &str, value: &str) {
        if self.cfg.get(key).is_none() {
            self.cfg.set(key, value);
        }
    }

    fn hash(&self) -> String {
        self.cfg.hash()
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let p = self.out.join(name);
        fs::write(&p, contents).with_context(|| format!("writing {}", p.display()))
    }

    fn manifest(&self, verdicts: Vec<String>) -> Result<()> {
        let m = RunManifest {
            command_line: self.argv.clone(),
            config: self.cfg.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_secs: self.start.elapsed().as_secs_f64(),
            verdicts,
        };
        self.write("manifest.txt", m.render())
    }

    fn grid(&self) -> Result<Grid> {
        Ok(make_grid(&self.cfg.grid_spec()?)?)
    }
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => Config::with_default_grid(),
    };
    for s in &cli.set {
        cfg.set_pair(s)?;
    }
    Ok(cfg)
}

/// Config key < `GRUSHIN_WORKERS` < `--workers`.
fn worker_count(cli: &Cli, cfg: &Config) -> Result<Option<usize>> {
    if cli.workers.is_some() {
        return Ok(cli.workers);
    }
    if let Some(n) = workers_from_env() {
        return Ok(Some(n));
    }
    Ok(match cfg.get("workers") {
        Some(_) => Some(cfg.parse_key::<usize>("workers")?),
        None => None,
    })
}

fn family_field(run: &mut Run, grid: &Grid, seed_offset: u64) -> Result<SpectralField> {
    run.default_key("family", "random");
    run.default_key("seed", "1");
    run.default_key("degree", "4");
    let seed: u64 = run.cfg.parse_key("seed")?;
    let degree: usize = run.cfg.parse_key("degree")?;
    let seed = seed.wrapping_add(seed_offset);
    let family = run.cfg.require("family")?.to_string();
    if family == "random" {
        let support = grid.resolvable_support(degree);
        if support.is_empty() {
            bail!("no λ-node of this grid resolves degree {degree}");
        }
        return Ok(random_field(grid, support, degree, seed)?);
    }
    run.default_key("band_lo", "0.125");
    run.default_key("offset", "20");
    let spec = FamilySpec {
        kind: FamilyKind::parse(&family)?,
        seed,
        band_lo: run.cfg.parse_f64("band_lo")?,
        degree,
        offset: run.cfg.parse_f64("offset")?,
    };
    Ok(spec.build(grid)?)
}

fn cmd_grid(run: &mut Run) -> Result<Vec<String>> {
    let grid = run.grid()?;
    let mut s = format!("# config_hash={}\naxis,index,coordinate,weight,max_degree\n", run.hash());
    for i in 0..grid.n1() {
        let p = grid.x1.point(i);
        let _ = writeln!(s, "x1,{i},{},{},", p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "), fmt_f64(grid.x1.weight(i)));
    }
    for j in 0..grid.n2() {
        let p = grid.x2_point(j);
        let _ = writeln!(s, "x2,{j},{},{},", p.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "), fmt_f64(grid.x2_weight(j)));
    }
    for (k, n) in grid.all_lambda().iter().enumerate() {
        let lam = grid.lambda_vec(n);
        let deg = grid.max_resolvable_degree(grid.lambda_abs(n)).map_or("none".to_string(), |d| d.to_string());
        let _ = writeln!(
            s,
            "lambda,{k},{},{},{deg}",
            lam.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" "),
            fmt_f64(grid.lambda_weight())
        );
    }
    run.write("grid.csv", s)?;
    Ok(vec![format!("grid nodes={} period={}", grid.len(), fmt_f64(grid.period()))])
}

fn cmd_field(run: &mut Run) -> Result<Vec<String>> {
    let grid = run.grid()?;
    let f = family_field(run, &grid, 0)?;
    let h = synthesize(&f, &grid)?;
    let mut bin = Vec::new();
    write_binary(&h, &mut bin)?;
    run.write("field.bin", bin)?;
    let mut csv = Vec::new();
    write_csv(&h, Some(&run.hash()), &mut csv)?;
    run.write("field.csv", csv)?;
    Ok(vec![format!("field modes={} nodes={}", f.coeffs.len(), f.support.len())])
}

fn cmd_riesz(run: &mut Run) -> Result<Vec<String>> {
    let grid = run.grid()?;
    run.default_key("alpha", "1");
    run.default_key("tail_tol", "1e-9");
    let alpha = run.cfg.parse_f64("alpha")?;
    let tol = run.cfg.parse_f64("tail_tol")?;
    let f = family_field(run, &grid, 0)?;
    let g = family_field(run, &grid, 1)?;
    let mut body = String::new();
    let out = match run.cfg.get("j") {
        Some(_) => {
            let j: u32 = run.cfg.parse_key("j")?;
            let direct = bilinear_apply_direct(&Symbol2D::dyadic(j, alpha), &f, &g, &grid)?;
            let (sep, info) = bilinear_apply_separated(&FourierSeriesExpansion::new(j, alpha), &f, &g, &grid, Some(tol))?;
            let dev = sep.rel_l2_distance(&direct);
            let _ = writeln!(body, "deviation,{dev:?}\ntruncation,{}\ntail,{:?}", info.truncation, info.tail);
            direct
        }
        None => {
            run.default_key("R", "1");
            let p = RieszParams::new(alpha, run.cfg.parse_f64("R")?, grid.dims)?;
            bilinear_apply_direct(&Symbol2D::riesz(p.alpha, p.r), &f, &g, &grid)?
        }
    };
    let mut bin = Vec::new();
    write_binary(&out, &mut bin)?;
    run.write("riesz.bin", bin)?;
    let mut csv = Vec::new();
    write_csv(&out, Some(&run.hash()), &mut csv)?;
    run.write("riesz.csv", csv)?;
    run.write("riesz_summary.csv", format!("# config_hash={}\nkey,value\n{body}", run.hash()))?;
    Ok(body.lines().map(str::to_string).collect())
}

fn kernel_spec(run: &mut Run) -> Result<(KernelSampleSpec, std::ops::RangeInclusive<u32>, f64)> {
    run.default_key("alpha", "1");
    run.default_key("seed", "7");
    run.default_key("per_decade", "4");
    run.default_key("j_min", "1");
    run.default_key("j_max", "6");
    let spec = KernelSampleSpec {
        seed: run.cfg.parse_key("seed")?,
        per_decade: run.cfg.parse_key("per_decade")?,
        grid: run.cfg.grid_spec()?,
    };
    let js = run.cfg.parse_key("j_min")?..=run.cfg.parse_key("j_max")?;
    Ok((spec, js, run.cfg.parse_f64("alpha")?))
}

fn cmd_kernel(run: &mut Run) -> Result<Vec<String>> {
    let (spec, js, alpha) = kernel_spec(run)?;
    let grid = make_grid(&spec.grid)?;
    let samples = kernel_samples(&spec, &grid)?;
    let table = kernel_table(alpha, &js, &samples, &grid);
    let mut s = format!("# config_hash={}\nsample,j,rho_xy,rho_xz,abs_kernel\n", run.hash());
    for (i, ((x, y, z), row)) in samples.iter().zip(&table).enumerate() {
        for (j, v) in js.clone().zip(row) {
            let _ = writeln!(s, "{i},{j},{:?},{:?},{v:?}", control_distance(x, y), control_distance(x, z));
        }
    }
    run.write("kernel.csv", s)?;
    Ok(vec![format!("kernel samples={}", samples.len())])
}

fn write_reports(run: &Run, prefix: &str, reports: &[ProbeReport]) -> Result<Vec<String>> {
    let hash = run.hash();
    let mut lines = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        run.write(&format!("{prefix}_{i:02}.csv"), r.to_csv(Some(&hash)))?;
        lines.push(r.verdict_line());
    }
    Ok(lines)
}

fn cmd_verify(run: &mut Run, suite: Option<String>) -> Result<(Vec<String>, bool)> {
    let name = match suite {
        Some(s) => {
            run.cfg.set("suite", s.as_str());
            s
        }
        None => run.cfg.get("suite").map(str::to_string).with_context(|| format!("no suite given; available: {}", SUITES.join(", ")))?,
    };
    let outcome = run_suite(&name, &run.cfg)?;
    let mut lines = write_reports(run, "report", &outcome.reports)?;
    lines.push(outcome.aggregate_line());
    let mut csv = format!("# config_hash={}\n", run.hash());
    for l in &lines {
        csv.push_str(l);
        csv.push('\n');
    }
    run.write("verify.csv", csv)?;
    Ok((lines, outcome.passed()))
}

fn cmd_thresholds(run: &mut Run) -> Result<Vec<String>> {
    run.default_key("variant", "general");
    run.default_key("resolution", "20");
    let dims = Dims::new(run.cfg.parse_key("d1")?, run.cfg.parse_key("d2")?)?;
    let variant = Variant::parse(run.cfg.require("variant")?)?;
    let rows = threshold_table(dims, variant, run.cfg.parse_key("resolution")?)?;
    run.write("thresholds.csv", format!("# config_hash={}\n{}", run.hash(), table_csv(&rows)))?;
    Ok(vec![format!("thresholds rows={}", rows.len())])
}

fn cmd_probe(run: &mut Run, kind: &str) -> Result<(Vec<String>, bool)> {
    run.cfg.set("probe", kind);
    let j = |run: &mut Run, lo: &str, hi: &str| -> Result<std::ops::RangeInclusive<u32>> {
        run.default_key("j_min", lo);
        run.default_key("j_max", hi);
        Ok(run.cfg.parse_key("j_min")?..=run.cfg.parse_key("j_max")?)
    };
    let reports: Vec<ProbeReport> = match kind {
        "decay" => {
            run.default_key("alpha", "0.5");
            run.default_key("p1", "2");
            run.default_key("p2", "2");
            run.default_key("seed", "1");
            run.default_key("band_lo", "0.125");
            let js = j(run, "1", "6")?;
            let mut spec =
                DecayProbeSpec::new(run.cfg.parse_f64("alpha")?, run.cfg.parse_f64("p1")?, run.cfg.parse_f64("p2")?, js)?;
            spec.family = FamilySpec::hermite_bump(run.cfg.parse_key("seed")?, run.cfg.parse_f64("band_lo")?);
            vec![dyadic_decay_probe(&spec)?]
        }
        "mixed" => {
            run.default_key("alpha", "1.6");
            run.default_key("seed", "1");
            let js = j(run, "1", "6")?;
            let fam = FamilySpec::hermite_bump(run.cfg.parse_key("seed")?, 0.125);
            vec![mixed_norm_decay_probe(run.cfg.parse_f64("alpha")?, js, fam)?]
        }
        "coefficients" => {
            run.default_key("alpha", "1");
            run.default_key("beta", "0.05");
            run.default_key("l_max", "1024");
            let js = j(run, "2", "8")?;
            vec![coefficient_decay_probe(run.cfg.parse_f64("alpha")?, run.cfg.parse_f64("beta")?, js, run.cfg.parse_key("l_max")?)?]
        }
        "plancherel" => {
            run.default_key("plancherel_kind", "linear_first_layer");
            let k = PlancherelKind::parse(run.cfg.require("plancherel_kind")?)?;
            vec![weighted_plancherel_probe(k, &PlancherelParams::for_kind(k))?]
        }
        "kernel" => {
            run.default_key("beta1", "0");
            run.default_key("beta2", "0");
            let (b1, b2) = (run.cfg.parse_f64("beta1")?, run.cfg.parse_f64("beta2")?);
            let (spec, js, alpha) = kernel_spec(run)?;
            VolumeVariant::ALL.iter().map(|&v| pointwise_kernel_probe(alpha, b1, b2, js.clone(), &spec, v)).collect::<Result<_, _>>()?
        }
        "dilation" => {
            run.default_key("alpha", "1");
            run.default_key("t", "2");
            let grid = run.grid()?;
            let f = family_field(run, &grid, 0)?;
            let g = family_field(run, &grid, 1)?;
            let p = RieszParams::new(run.cfg.parse_f64("alpha")?, 1.0, grid.dims)?;
            vec![dilation_covariance_check(&p, &f, &g, run.cfg.parse_f64("t")?, &grid)?]
        }
        other => bail!("unknown probe {other:?}; available: decay, mixed, coefficients, plancherel, kernel, dilation"),
    };
    let ok = reports.iter().all(|r| r.no_guarantee || r.verdict.passed());
    Ok((write_reports(run, "probe", &reports)?, ok))
}

fn execute(cli: Cli) -> Result<bool> {
    let cfg = load_config(&cli)?;
    let workers = worker_count(&cli, &cfg)?;
    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut run = Run { cfg, out: cli.out.clone(), argv: std::env::args().collect(), start: Instant::now() };
    let (lines, ok) = with_workers(workers, || -> Result<(Vec<String>, bool)> {
        Ok(match &cli.cmd {
            Cmd::Grid => (cmd_grid(&mut run)?, true),
            Cmd::Field => (cmd_field(&mut run)?, true),
            Cmd::Riesz => (cmd_riesz(&mut run)?, true),
            Cmd::Kernel => (cmd_kernel(&mut run)?, true),
            Cmd::Verify { suite } => cmd_verify(&mut run, suite.clone())?,
            Cmd::Thresholds => (cmd_thresholds(&mut run)?, true),
            Cmd::Probe { kind } => cmd_probe(&mut run, kind)?,
        })
    })?;
    for l in &lines {
        println!("{l}");
    }
    run.manifest(lines)?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
