//! Acceptance gate. Each test prints one PASS/FAIL line with the measured
//! quantity, the pinned tolerance and the wall-clock time.

use std::time::{Duration, Instant};

use esqpt_core::analysis::{
    centrifugal_scan, gap_vs_n, level_density_critical_energy, meanfield_critical_energy,
    pair_gap, qpt_location, FitForm, PairSpec,
};
use esqpt_core::eigensolver::{eig_values, PrecisionConfig};
use esqpt_core::fock::{build_basis, oracle_spectrum};
use esqpt_core::models::{analytic_limit_spectrum, build_block, sector_list, ControlParameter};
use esqpt_core::otoc::{
    diagonalize_sectors, eigen_operator, motoc_scan, motoc_stationary, standard_setup, Averaging,
};
use esqpt_core::{Model, ModelInstance, SectorLabel};

fn report(id: u32, name: &str, pass: bool, detail: &str, elapsed: Duration, limit_s: f64) -> bool {
    let within = elapsed.as_secs_f64() < limit_s;
    let ok = pass && within;
    println!(
        "[acceptance] criterion {id:>2} {:<4} {name}: {detail}; runtime {:.2}s (limit {limit_s}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty(), "median of an empty set");
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn block_union(inst: &ModelInstance) -> Vec<f64> {
    let mut all = Vec::new();
    for label in sector_list(inst) {
        let block = build_block::<f64>(inst, &label, 53).unwrap();
        let s = eig_values(&block, &PrecisionConfig::double()).unwrap();
        for e in s.eigenvalues {
            for _ in 0..label.multiplicity() {
                all.push(e);
            }
        }
    }
    all.sort_by(f64::total_cmp);
    all
}

#[test]
fn criterion_01_oracle_equivalence() {
    const TOL: f64 = 1e-9;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut mismatched = Vec::new();
    for model in Model::ALL {
        let nmax = if model == Model::Ibm { 4 } else { 6 };
        for n in 1..=nmax {
            let basis = build_basis(model, n).unwrap();
            for xi in [0.0, 0.2, 0.5, 0.8, 1.0] {
                let inst = ModelInstance::new(model, n, xi).unwrap();
                let oracle = oracle_spectrum(&basis, &inst.xi).unwrap();
                let blocks = block_union(&inst);
                cases += 1;
                if oracle.len() != blocks.len() {
                    mismatched.push(format!("{model} N={n} xi={xi}: dim {} vs {}", blocks.len(), oracle.len()));
                    continue;
                }
                let dev = oracle
                    .iter()
                    .zip(&blocks)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst = worst.max(dev);
            }
        }
    }
    let pass = mismatched.is_empty() && worst < TOL;
    let detail = format!("{cases} instances, max |block - oracle| = {worst:.3e} (tol {TOL:e}) {mismatched:?}");
    assert!(report(1, "oracle equivalence", pass, &detail, start.elapsed(), 120.0));
}

#[test]
fn criterion_02_analytic_limits() {
    const TOL: f64 = 1e-10;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut blocks = 0;
    for model in Model::ALL {
        for n in 1..=50 {
            for xi in [0.0, 1.0] {
                let inst = ModelInstance::new(model, n, xi).unwrap();
                for label in sector_list(&inst) {
                    let block = build_block::<f64>(&inst, &label, 53).unwrap();
                    let s = eig_values(&block, &PrecisionConfig::double()).unwrap();
                    let exact: Vec<f64> = analytic_limit_spectrum(&inst, &label, 53).unwrap();
                    assert_eq!(exact.len(), s.eigenvalues.len());
                    for (a, b) in s.eigenvalues.iter().zip(&exact) {
                        worst = worst.max((a - b).abs());
                    }
                    blocks += 1;
                }
            }
        }
    }
    let detail = format!("{blocks} blocks, max deviation {worst:.3e} (tol {TOL:e})");
    assert!(report(2, "analytic limits", worst < TOL, &detail, start.elapsed(), 60.0));
}

#[test]
fn criterion_03_qpt_location() {
    const TOL: f64 = 0.02;
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for model in [Model::Lmg, Model::Vm2d] {
        let scan = qpt_location(model, 1000, 0.1, 0.4, 1e-3).unwrap();
        let dev = (scan.peak_xi - 0.2).abs();
        pass &= dev <= TOL;
        parts.push(format!("{model} peak at xi = {:.4} (|dev| {dev:.4})", scan.peak_xi));
    }
    let detail = format!("{} (tol {TOL})", parts.join(", "));
    assert!(report(3, "QPT location", pass, &detail, start.elapsed(), 120.0));
}

#[test]
fn criterion_04_gap_scaling_forms() {
    let start = Instant::now();
    let half = ControlParameter::parse("0.5").unwrap();

    let lmg_sizes: Vec<u32> = (20..=120).step_by(10).collect();
    let lmg = gap_vs_n(
        Model::Lmg,
        &half,
        &PairSpec::head(Model::Lmg, 0),
        &lmg_sizes,
        &PrecisionConfig::arbitrary(256).unwrap(),
        true,
    )
    .unwrap();
    let lmg_exp = lmg.fit(FitForm::Exponential).unwrap();
    let lmg_pow = lmg.fit(FitForm::Power).unwrap();

    let vm_sizes: Vec<u32> = (20..=400).step_by(20).collect();
    let vm = gap_vs_n(
        Model::Vm2d,
        &half,
        &PairSpec::head(Model::Vm2d, 0),
        &vm_sizes,
        &PrecisionConfig::double(),
        false,
    )
    .unwrap();
    let vm_pow = vm.fit(FitForm::Power).unwrap();
    let vm_exp = vm.fit(FitForm::Exponential).unwrap();

    let pass = lmg_exp.r2 >= 0.999
        && lmg_exp.r2 > lmg_pow.r2
        && vm_pow.r2 >= 0.99
        && vm_pow.r2 > vm_exp.r2;
    let detail = format!(
        "LMG r2 exp {:.6} vs pow {:.6} (need exp >= 0.999, exp > pow); 2DVM r2 pow {:.6} vs exp {:.6} (need pow >= 0.99, pow > exp)",
        lmg_exp.r2, lmg_pow.r2, vm_pow.r2, vm_exp.r2
    );
    assert!(report(4, "gap scaling forms", pass, &detail, start.elapsed(), 600.0));
}

#[test]
fn criterion_05_finite_size_gaps() {
    let start = Instant::now();
    let vm = ModelInstance::new(Model::Vm2d, 50, 0.5).unwrap();
    let vm_gap = pair_gap(&vm, &PairSpec::head(Model::Vm2d, 0), &PrecisionConfig::double()).unwrap();
    let lmg = ModelInstance::new(Model::Lmg, 50, 0.5).unwrap();
    let lmg_gap = pair_gap(&lmg, &PairSpec::head(Model::Lmg, 0), &PrecisionConfig::arbitrary(256).unwrap()).unwrap();
    let vm_ok = vm_gap.certified && (1e-4..=1e-1).contains(&vm_gap.gap_f64);
    let lmg_ok = lmg_gap.certified && lmg_gap.gap_f64 > 0.0 && lmg_gap.gap_f64 < 1e-8;
    let detail = format!(
        "2DVM gap {:.4e} in [1e-4, 1e-1]; LMG gap {:.4e} < 1e-8, certified positive {} (resolution {:.2e})",
        vm_gap.gap_f64, lmg_gap.gap_f64, lmg_gap.certified, lmg_gap.resolution_f64
    );
    assert!(report(5, "finite-size gaps", vm_ok && lmg_ok, &detail, start.elapsed(), 60.0));
}

#[test]
fn criterion_06_centrifugal_normalization() {
    const TOL: f64 = 1e-10;
    let start = Instant::now();
    let grid = vec![ControlParameter::parse("0").unwrap(), ControlParameter::parse("1").unwrap()];
    let curves = centrifugal_scan(50, &[1, 14, 30], &grid).unwrap();
    let mut worst0 = 0.0f64;
    let mut worst1 = 0.0f64;
    for c in &curves {
        worst0 = worst0.max((c.points[0].1 - 1.0).abs());
        worst1 = worst1.max(c.points[1].1.abs());
    }
    let detail = format!("max |g(0) - 1| = {worst0:.3e}, max |g(1)| = {worst1:.3e} (tol {TOL:e})");
    assert!(report(6, "centrifugal normalization", worst0 < TOL && worst1 < TOL, &detail, start.elapsed(), 60.0));
}

#[test]
fn criterion_07_lmg_motoc_order_parameter() {
    let start = Instant::now();
    let inst = ModelInstance::new(Model::Lmg, 300, 0.6).unwrap();
    let eps_c = meanfield_critical_energy(Model::Lmg, 0.6).unwrap();
    let (labels, sector, v_op, w_op) = standard_setup(&inst).unwrap();
    let sys = diagonalize_sectors(&inst, &labels).unwrap();
    let v = eigen_operator(&sys, v_op).unwrap();
    let w = eigen_operator(&sys, w_op).unwrap();
    let scan = motoc_scan(&sys, &sector, &v, &w, Averaging::Stationary, 1e-10).unwrap();
    assert!(scan.failures.is_empty(), "{:?}", scan.failures);
    let below: Vec<f64> = scan.results.iter().filter(|r| r.scaled_energy < 0.9 * eps_c).map(|r| r.value).collect();
    let above: Vec<f64> = scan.results.iter().filter(|r| r.scaled_energy > 1.1 * eps_c).map(|r| r.value).collect();
    let (mb, ma) = (median(below.clone()), median(above.clone()));
    let pass = mb > 100.0 * ma && mb > 0.0;
    let detail = format!(
        "eps_c = {eps_c:.5}; median below {mb:.4e} ({} states), above {ma:.4e} ({} states); need below > 100 x above",
        below.len(),
        above.len()
    );
    assert!(report(7, "LMG mOTOC order parameter", pass, &detail, start.elapsed(), 600.0));
}

#[test]
fn criterion_08_vm2d_motoc_null_and_slow_decay() {
    let start = Instant::now();
    let inst = ModelInstance::new(Model::Vm2d, 300, 0.6).unwrap();
    let eps_c = meanfield_critical_energy(Model::Vm2d, 0.6).unwrap();
    let (labels, sector, v_op, w_op) = standard_setup(&inst).unwrap();
    let sys = diagonalize_sectors(&inst, &labels).unwrap();
    let v = eigen_operator(&sys, v_op).unwrap();
    let w = eigen_operator(&sys, w_op).unwrap();
    let tol_deg = 2.0 * sys.relative_resolution();
    let stat = motoc_scan(&sys, &sector, &v, &w, Averaging::Stationary, tol_deg).unwrap();
    assert!(stat.failures.is_empty());
    let max_abs = stat.results.iter().map(|r| r.value.abs()).fold(0.0, f64::max);

    let fin = motoc_scan(&sys, &sector, &v, &w, Averaging::Finite(10.0), tol_deg).unwrap();
    assert!(fin.failures.is_empty());
    let below = median(fin.results.iter().filter(|r| r.scaled_energy < eps_c).map(|r| r.value).collect());
    let above = median(fin.results.iter().filter(|r| r.scaled_energy > eps_c).map(|r| r.value).collect());
    let pass = max_abs < 1e-8 && below >= 10.0 * above && below > 0.0;
    let detail = format!(
        "tol_deg {tol_deg:.2e}: stationary max |value| {max_abs:.3e} (< 1e-8); T = 10 median below eps_c {below:.4e} vs above {above:.4e} (ratio {:.1}, need >= 10)",
        below / above
    );
    assert!(report(8, "2DVM mOTOC null and slow decay", pass, &detail, start.elapsed(), 900.0));
}

#[test]
fn criterion_09_small_instance_closed_form() {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let inst = ModelInstance::new(Model::Lmg, 2, 0.0).unwrap();
    let sys = diagonalize_sectors(&inst, &[SectorLabel::even(), SectorLabel::odd()]).unwrap();
    let jx = eigen_operator(&sys, esqpt_core::otoc::OtocOperator::Jx).unwrap();
    let r = motoc_stationary(&sys, 0, 0, &jx, &jx, 1e-10).unwrap();
    let dev = (r.value - 0.25).abs();
    let detail = format!("value {:.15} vs 0.25, |dev| {dev:.2e} (tol {TOL:e})", r.value);
    assert!(report(9, "small-instance closed form", dev < TOL, &detail, start.elapsed(), 1.0));
}

#[test]
fn criterion_10_critical_energy_cross_check() {
    const TOL: f64 = 0.02;
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for model in [Model::Lmg, Model::Vm2d] {
        for xi in [0.4, 0.6, 0.8] {
            let mf = meanfield_critical_energy(model, xi).unwrap();
            let ld = level_density_critical_energy(model, xi, &[300, 600, 1200]).unwrap();
            let rel = (ld.extrapolated - mf).abs() / mf;
            pass &= rel < TOL;
            parts.push(format!("{model} xi={xi}: mf {mf:.5} ld {:.5} rel {rel:.4}", ld.extrapolated));
        }
    }
    let detail = format!("{} (tol {TOL})", parts.join("; "));
    assert!(report(10, "critical-energy cross-check", pass, &detail, start.elapsed(), 600.0));
}
