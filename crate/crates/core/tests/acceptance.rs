//! Acceptance criteria. Each test prints one `ACCEPTANCE <n> PASS|FAIL` line
//! with the measured quantities, then asserts. Tolerances are pinned here.

use grushin::config::Config;
use grushin::dims::Dims;
use grushin::family::{random_field, FamilySpec};
use grushin::field::{analyze_on, synthesize, SpectralField};
use grushin::grid::{make_grid, Grid, GridSpec};
use grushin::probe::ProbeReport;
use grushin::reduce::with_workers;
use grushin::riesz::{bilinear_apply_direct, bilinear_apply_separated, dilation_covariance_check, FourierSeriesExpansion, RieszParams};
use grushin::suite::{eigen_residuals, hermite_orthonormality, kernel_reports, partition_defect, round_trip};
use grushin::symbol::Symbol2D;
use grushin::thresholds::{threshold_inv, Variant};
use grushin::verify::{
    coefficient_decay_probe, dyadic_decay_probe, dyadic_decay_probe_on, kernel_grid, mixed_norm_decay_probe, weighted_plancherel_probe,
    DecayProbeSpec, KernelSampleSpec, PlancherelKind, PlancherelParams,
};

fn verdict(n: u32, ok: bool, detail: &str) {
    println!("ACCEPTANCE {n} {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "acceptance {n} failed: {detail}");
}

fn default_grid() -> Grid {
    make_grid(&GridSpec::default()).unwrap()
}

fn random_pair(grid: &Grid, degree: usize, seed: u64) -> (SpectralField, SpectralField) {
    let support = grid.resolvable_support(degree);
    let f = random_field(grid, support.clone(), degree, seed).unwrap();
    let g = random_field(grid, support, degree, seed + 1).unwrap();
    (f, g)
}

#[test]
fn acceptance_01_hermite_orthonormality() {
    let (gram, rec) = hermite_orthonormality(32);
    verdict(1, gram <= 1e-8 && rec <= 1e-12, &format!("gram={gram:.3e} (tol 1e-8) recurrence={rec:.3e} (tol 1e-12)"));
}

#[test]
fn acceptance_02_eigenrelation() {
    let mut worst = (0.0f64, 0.0f64);
    for d1 in [1, 2] {
        let (s, f) = eigen_residuals(d1, 8, &[0.25, 1.0, 4.0]);
        worst = (worst.0.max(s), worst.1.max(f));
    }
    verdict(
        2,
        worst.0 <= 1e-10 && worst.1 <= 1e-5,
        &format!("spectral={:.3e} (tol 1e-10) fd={:.3e} (tol 1e-5) d1=1,2", worst.0, worst.1),
    );
}

#[test]
fn acceptance_03_round_trip_and_plancherel() {
    let grid = default_grid();
    let mut worst = (0.0f64, 0.0f64);
    let mut covered = 0;
    for l in 0..=16 {
        let (rt, pl, n) = round_trip(&grid, l, 100 + l as u64).unwrap();
        worst = (worst.0.max(rt), worst.1.max(pl));
        covered += usize::from(n > 0);
    }
    let spec21 = GridSpec { d1: 2, x1_count: 48, ..GridSpec::default() };
    let grid21 = make_grid(&spec21).unwrap();
    for l in [0, 3, 6] {
        let (rt, pl, n) = round_trip(&grid21, l, 200 + l as u64).unwrap();
        assert!(n > 0, "(2,1) grid resolves nothing at l={l}");
        worst = (worst.0.max(rt), worst.1.max(pl));
    }
    verdict(
        3,
        worst.0 <= 1e-6 && worst.1 <= 1e-6 && covered == 17,
        &format!("round_trip={:.3e} plancherel={:.3e} (tol 1e-6) degrees_covered={covered}/17", worst.0, worst.1),
    );
}

#[test]
fn acceptance_04_partition() {
    let defects: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|&a| partition_defect(a)).collect();
    let worst = defects.iter().copied().fold(0.0, f64::max);
    verdict(4, worst <= 1e-10, &format!("defects(alpha=0.5,1,2)={:.3e} {:.3e} {:.3e} (tol 1e-10)", defects[0], defects[1], defects[2]));
}

#[test]
fn acceptance_05_separated_vs_direct() {
    let grid = default_grid();
    let (f, g) = random_pair(&grid, 4, 11);
    let mut worst = 0.0f64;
    let mut parts = vec![];
    for alpha in [1.0, 2.0] {
        for j in [2, 3, 4] {
            let direct = bilinear_apply_direct(&Symbol2D::dyadic(j, alpha), &f, &g, &grid).unwrap();
            let (sep, info) = bilinear_apply_separated(&FourierSeriesExpansion::new(j, alpha), &f, &g, &grid, None).unwrap();
            let dev = sep.rel_l2_distance(&direct);
            worst = worst.max(dev);
            parts.push(format!("a{alpha}j{j}:L={}:{dev:.1e}", info.truncation));
        }
    }
    verdict(5, worst <= 1e-6, &format!("max_rel_l2={worst:.3e} (tol 1e-6) {}", parts.join(" ")));
}

#[test]
fn acceptance_06_coefficient_decay() {
    let mut ok = true;
    let mut parts = vec![];
    for alpha in [1.0, 2.0] {
        let rep = coefficient_decay_probe(alpha, 0.05, 2..=8, 1024).unwrap();
        ok &= (rep.slope + alpha).abs() <= 0.15;
        parts.push(format!("alpha={alpha} slope={:.4}", rep.slope));
    }
    verdict(6, ok, &format!("{} (tol |slope+alpha|<=0.15)", parts.join(" ")));
}

#[test]
fn acceptance_07_dilation() {
    let grid = default_grid();
    let (f, g) = random_pair(&grid, 4, 21);
    let p = RieszParams::new(1.0, 1.0, grid.dims).unwrap();
    let mut worst = 0.0f64;
    for t in [0.5, 2.0] {
        worst = worst.max(dilation_covariance_check(&p, &f, &g, t, &grid).unwrap().max_ratio);
    }
    verdict(7, worst <= 1e-4, &format!("max_rel_dev={worst:.3e} (tol 1e-4) t=1/2,2"));
}

#[test]
fn acceptance_08_weighted_plancherel() {
    let mut ok = true;
    let mut parts = vec![];
    for kind in PlancherelKind::ALL {
        let rep = weighted_plancherel_probe(kind, &PlancherelParams::for_kind(kind)).unwrap();
        let growth = rep.growth().unwrap_or(f64::NAN);
        ok &= rep.verdict.passed() && rep.max_ratio.is_finite() && growth < 0.05;
        if kind == PlancherelKind::Truncated {
            ok &= (rep.slope - 1.0).abs() <= 0.15;
            parts.push(format!("{}:ratio={:.3e},growth={growth:.2e},slope={:.3}", kind.name(), rep.max_ratio, rep.slope));
        } else {
            parts.push(format!("{}:ratio={:.3e},growth={growth:.2e}", kind.name(), rep.max_ratio));
        }
    }
    verdict(8, ok, &parts.join(" "));
}

#[test]
fn acceptance_09_pointwise_kernel() {
    let spec = KernelSampleSpec { seed: 7, per_decade: 4, grid: kernel_grid() };
    let reps = kernel_reports(1.0, 1..=6, &spec).unwrap();
    assert_eq!(reps.len(), 12);
    let betas = [0.0, 1.0, 2.0];
    let mut ok = true;
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, r) in reps.iter().enumerate() {
        let bound = betas[i / 4] + 0.5 + 0.15;
        ok &= r.slope_bound.is_some_and(|b| (b - bound).abs() < 1e-12) && r.slope <= bound && r.verdict.passed();
        worst_margin = worst_margin.max(r.slope - bound);
    }
    verdict(9, ok, &format!("reports=12 max(slope-bound)={worst_margin:.4}"));
}

#[test]
fn acceptance_10_dyadic_decay() {
    let inf = f64::INFINITY;
    let cases = [(2.0, 2.0, 0.5, 0.0), (inf, inf, 2.0, 1.5), (1.0, inf, 1.7, 1.5), (2.0, inf, 0.7, 0.5)];
    let mut ok = true;
    let mut parts = vec![];
    for (p1, p2, alpha, thr) in cases {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let table = threshold_inv(inv(p1), inv(p2), Dims::default(), Variant::General).unwrap().threshold;
        let rep = dyadic_decay_probe(&DecayProbeSpec::new(alpha, p1, p2, 1..=6).unwrap()).unwrap();
        ok &= table == Some(thr) && !rep.no_guarantee && rep.slope <= -0.1;
        parts.push(format!("({p1},{p2},a={alpha}):thr={table:?},slope={:.3}", rep.slope));
    }
    verdict(10, ok, &parts.join(" "));
}

#[test]
fn acceptance_11_mixed_norm() {
    let rep = mixed_norm_decay_probe(1.6, 1..=6, FamilySpec::hermite_bump(1, 0.125)).unwrap();
    verdict(11, rep.slope < 0.0 && rep.verdict.passed() && !rep.no_guarantee, &format!("alpha=1.6 slope={:.4}", rep.slope));
}

#[test]
fn acceptance_12_threshold_tables() {
    let dims = Dims::default();
    let general = [
        ((0.0, 0.0), 1.5),
        ((0.5, 0.0), 0.5),
        ((0.0, 0.5), 0.5),
        ((0.5, 0.5), 0.0),
        ((1.0, 0.0), 1.5),
        ((0.0, 1.0), 1.5),
        ((1.0, 0.5), 1.0),
        ((0.5, 1.0), 1.0),
        ((1.0, 1.0), 2.0),
    ];
    let restricted = [
        ((0.0, 0.0), 1.5),
        ((0.5, 0.0), 0.5),
        ((0.0, 0.5), 0.5),
        ((0.5, 0.5), 0.0),
        ((1.0, 0.0), 1.0),
        ((0.0, 1.0), 1.0),
        ((1.0, 0.5), 1.0),
        ((0.5, 1.0), 1.0),
        ((1.0, 1.0), 2.0),
    ];
    let mut bad = vec![];
    for (variant, table) in [(Variant::General, general), (Variant::Restricted, restricted)] {
        for ((u1, u2), want) in table {
            let got = threshold_inv(u1, u2, dims, variant).unwrap().threshold;
            if got != Some(want) {
                bad.push(format!("{variant}({u1},{u2})={got:?}!={want}"));
            }
        }
        for i in 0..=20 {
            for j in 0..=20 {
                let (u1, u2) = (i as f64 / 20.0, j as f64 / 20.0);
                let a = threshold_inv(u1, u2, dims, variant).unwrap().threshold;
                let b = threshold_inv(u2, u1, dims, variant).unwrap().threshold;
                if a != b {
                    bad.push(format!("{variant} asymmetric at ({u1},{u2})"));
                }
            }
        }
    }
    verdict(12, bad.is_empty(), &format!("corners=18 lattice=21x21x2 mismatches={} {}", bad.len(), bad.join(" ")));
}

fn fingerprint_field(out: &mut Vec<u64>, values: &[grushin::Complex64]) {
    out.extend(values.iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()]));
}

fn fingerprint_report(out: &mut Vec<u64>, r: &ProbeReport) {
    out.extend(r.abscissa.iter().chain(&r.ordinate).map(|v| v.to_bits()));
    out.extend([r.slope.to_bits(), r.intercept.to_bits(), r.max_ratio.to_bits()]);
    out.push(r.refined_max_ratio.map_or(0, f64::to_bits));
    out.push(u64::from(r.verdict.passed()));
}

/// Every operator and a cheap instance of every probe, reduced to raw bits.
fn determinism_run() -> Vec<u64> {
    let mut out = vec![];
    let grid = default_grid();
    let (f, g) = random_pair(&grid, 4, 5);
    let h = synthesize(&f, &grid).unwrap();
    fingerprint_field(&mut out, &h.values);
    let back = analyze_on(&h, 4, f.support.clone()).unwrap();
    fingerprint_field(&mut out, &back.coeffs);
    let direct = bilinear_apply_direct(&Symbol2D::dyadic(2, 1.0), &f, &g, &grid).unwrap();
    fingerprint_field(&mut out, &direct.values);
    let (sep, _) = bilinear_apply_separated(&FourierSeriesExpansion::new(2, 1.0), &f, &g, &grid, None).unwrap();
    fingerprint_field(&mut out, &sep.values);
    let riesz = bilinear_apply_direct(&Symbol2D::riesz(1.0, 1.0), &f, &g, &grid).unwrap();
    fingerprint_field(&mut out, &riesz.values);

    let p = RieszParams::new(1.0, 1.0, grid.dims).unwrap();
    fingerprint_report(&mut out, &dilation_covariance_check(&p, &f, &g, 2.0, &grid).unwrap());
    let spec = DecayProbeSpec { grid: GridSpec::default(), ..DecayProbeSpec::new(1.0, 2.0, 2.0, 1..=3).unwrap() };
    fingerprint_report(&mut out, &dyadic_decay_probe_on(&spec, &f, &g, &grid).unwrap());
    fingerprint_report(&mut out, &coefficient_decay_probe(1.0, 0.05, 2..=4, 256).unwrap());
    let mut pp = PlancherelParams::for_kind(PlancherelKind::LinearFirstLayer);
    pp.refine = false;
    fingerprint_report(&mut out, &weighted_plancherel_probe(PlancherelKind::LinearFirstLayer, &pp).unwrap());
    let ks = KernelSampleSpec { seed: 3, per_decade: 1, grid: kernel_grid() };
    for r in kernel_reports(1.0, 1..=2, &ks).unwrap() {
        fingerprint_report(&mut out, &r);
    }
    let core = grushin::suite::run_suite("core", &Config::new()).unwrap();
    for r in &core.reports {
        fingerprint_report(&mut out, r);
    }
    out
}

#[test]
fn acceptance_13_determinism() {
    let reference = with_workers(Some(1), determinism_run);
    let mut runs = 0;
    let mut identical = true;
    for workers in [1, 2, 8] {
        for _ in 0..2 {
            identical &= with_workers(Some(workers), determinism_run) == reference;
            runs += 1;
        }
    }
    verdict(13, identical, &format!("words={} runs={runs} workers=1,2,8", reference.len()));
}
