//! The subcommand drivers. Each computes its datasets, hands every table
//! and figure to [`Output`], and records per-task status there.

use rayon::prelude::*;
use serde_json::{json, Value};

use esqpt_core::analysis::{
    centrifugal_scan, correlation_diagram, level_density_critical_energy, meanfield_critical_energy, pair_gap,
    pair_gap_escalating, gap_vs_n, FitForm, GapSample, PairSpec,
};
use esqpt_core::eigensolver::{eig_values, PrecisionConfig};
use esqpt_core::fock::{build_basis, oracle_spectrum};
use esqpt_core::models::{build_block, sector_list, ControlParameter};
use esqpt_core::otoc::{diagonalize_sectors, eigen_operator, motoc_scan, standard_setup, Averaging};
use esqpt_core::{Model, ModelInstance};

use crate::config::{RunConfig, Subcommand};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Output, Table};
use crate::plot::{Dash, Figure, Scale, Series, VLine, PALETTE};

pub fn execute(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    match cfg.subcommand {
        Subcommand::Ced => ced(cfg, out),
        Subcommand::GapsXi => gaps_xi(cfg, out),
        Subcommand::GapsN => gaps_n(cfg, out),
        Subcommand::Centrifugal => centrifugal(cfg, out),
        Subcommand::OtocScan => otoc_scan(cfg, out),
        Subcommand::CriticalEnergy => critical_energy(cfg, out),
        Subcommand::OracleCheck => oracle_check(cfg, out),
    }
}

/// `stem.ext` for a single size, `stem_N<n>.ext` when several are run.
fn file_name(cfg: &RunConfig, stem: &str, n: u32, ext: &str) -> String {
    if cfg.sizes.len() == 1 {
        format!("{stem}.{ext}")
    } else {
        format!("{stem}_N{n}.{ext}")
    }
}

fn pair_name(p: &PairSpec) -> String {
    format!("{}/{}#{}", p.a, p.b, p.index)
}

fn emit_figure(out: &mut Output, name: &str, figure: &Figure, description: &str) -> CliResult<()> {
    out.text(name, "svg", &figure.render(), description)
}

/// Groups `(key, x, y)` triples into series in order of first appearance.
fn group<K: PartialEq + Clone>(rows: impl Iterator<Item = (K, f64, f64)>) -> Vec<(K, Vec<(f64, f64)>)> {
    let mut groups: Vec<(K, Vec<(f64, f64)>)> = Vec::new();
    for (k, x, y) in rows {
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, pts)) => pts.push((x, y)),
            None => groups.push((k, vec![(x, y)])),
        }
    }
    groups
}

// ---------------------------------------------------------------- ced

pub fn ced_figure(table: &Table, title: &str) -> CliResult<Figure> {
    let xi = table.floats("xi")?;
    let sector = table.texts("sector")?;
    let level = table.floats("level")?;
    let energy = table.floats("energy")?;
    let mut sectors: Vec<String> = Vec::new();
    for s in &sector {
        if !sectors.contains(s) {
            sectors.push(s.clone());
        }
    }
    let keyed = (0..xi.len()).map(|i| ((sector[i].clone(), level[i] as i64), xi[i], energy[i]));
    let mut fig = Figure::new(title, "xi", "(E - E_0)/N", Scale::Linear, Scale::Linear);
    for ((s, _), pts) in group(keyed) {
        let k = sectors.iter().position(|x| *x == s).unwrap_or(0);
        fig.series.push(Series::line(Some(s), pts, PALETTE[k % PALETTE.len()], Dash::CYCLE[k % 4]));
    }
    Ok(fig)
}

fn ced(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let model = cfg.model();
    for &n in &cfg.sizes {
        let d = correlation_diagram(model, n, &cfg.xi, &cfg.sectors)?;
        let mut t = Table::new(&["xi", "sector", "level", "energy"]);
        let mut failed = 0;
        for p in &d.points {
            if let Some(e) = &p.error {
                out.task_failed(format!("ced N={n} xi={}", p.xi), e.clone());
                failed += 1;
                continue;
            }
            for s in &p.sectors {
                for (k, e) in s.levels.iter().enumerate() {
                    t.push(vec![Cell::Text(p.xi.text().into()), s.label.to_string().into(), k.into(), (*e).into()]);
                }
            }
        }
        if failed == 0 {
            out.task_ok(format!("ced N={n}: {} grid points", d.points.len()));
        }
        let csv = file_name(cfg, "ced", n, "csv");
        out.table(&csv, &t, &format!("{model} N={n}: scaled excitation energies (E - E_0)/N per sector"))?;
        if cfg.plots {
            let fig = ced_figure(&t, &format!("{model}, N = {n}"))?;
            emit_figure(out, &file_name(cfg, "ced", n, "svg"), &fig, "correlation energy diagram")?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- gaps

const GAP_COLUMNS: [&str; 9] = [
    "N", "xi", "pair", "gap", "gap_decimal", "abs_gap", "resolution", "certified", "mantissa_bits",
];

fn gap_row(pair: &PairSpec, s: &GapSample) -> Vec<Cell> {
    vec![
        s.n_bosons.into(),
        Cell::Text(s.xi.clone()),
        pair_name(pair).into(),
        s.gap_f64.into(),
        s.gap.clone().into(),
        s.magnitude().into(),
        s.resolution_f64.into(),
        s.certified.into(),
        s.mantissa_bits.into(),
    ]
}

fn gap_at(inst: &ModelInstance, pair: &PairSpec, precision: &PrecisionConfig, escalate: bool) -> esqpt_core::Result<GapSample> {
    if escalate {
        pair_gap_escalating(inst, pair, precision)
    } else {
        pair_gap(inst, pair, precision)
    }
}

fn note_unresolved(out: &mut Output, rows: &[(PairSpec, GapSample)], what: &str) {
    let unresolved: Vec<&GapSample> = rows.iter().map(|(_, s)| s).filter(|s| !s.certified).collect();
    if let Some(worst) = unresolved.iter().map(|s| s.resolution_f64).reduce(f64::max) {
        out.note(format!(
            "{what}: {} gaps are below the certified resolution (largest resolution {worst:.3e}); their gap column holds the resolution and certified = false",
            unresolved.len()
        ));
    }
}

/// `|gap|` against `x_column`, certified points as lines and unresolved
/// ones as markers.
pub fn gap_figure(table: &Table, x_column: &str, title: &str, x_scale: Scale) -> CliResult<Figure> {
    let x = table.floats(x_column)?;
    let gap = table.floats("abs_gap")?;
    let pair = table.texts("pair")?;
    let certified = table.texts("certified")?;
    let mut fig = Figure::new(title, x_column, "|Delta E|", x_scale, Scale::Log);
    let lines = group((0..x.len()).filter(|&i| certified[i] == "true").map(|i| (pair[i].clone(), x[i], gap[i])));
    for (k, (p, pts)) in lines.into_iter().enumerate() {
        fig.series
            .push(Series::line(Some(p), pts, PALETTE[k % PALETTE.len()], Dash::Solid).with_markers());
    }
    let bounds: Vec<(f64, f64)> = (0..x.len()).filter(|&i| certified[i] != "true").map(|i| (x[i], gap[i])).collect();
    if !bounds.is_empty() {
        let mut s = Series::line(Some("below resolution (bound)".into()), bounds, "#7f7f7f", Dash::Dotted).with_markers();
        s.dash = Dash::Dotted;
        fig.series.push(s);
    }
    Ok(fig)
}

fn gaps_xi(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let model = cfg.model();
    for &n in &cfg.sizes {
        let mut t = Table::new(&GAP_COLUMNS);
        let mut rows = Vec::new();
        for pair in &cfg.pairs {
            let results: Vec<(ControlParameter, esqpt_core::Result<GapSample>)> = cfg
                .xi
                .par_iter()
                .map(|xi| {
                    let r = ModelInstance::with_parameter(model, n, xi.clone())
                        .and_then(|inst| gap_at(&inst, pair, &cfg.precision, cfg.escalate));
                    (xi.clone(), r)
                })
                .collect();
            let mut failed = 0;
            for (xi, r) in results {
                match r {
                    Ok(s) => rows.push((*pair, s)),
                    Err(e) => {
                        out.task_failed(format!("gaps-xi N={n} {} xi={xi}", pair_name(pair)), e.to_string());
                        failed += 1;
                    }
                }
            }
            if failed == 0 {
                out.task_ok(format!("gaps-xi N={n} {}", pair_name(pair)));
            }
        }
        for (p, s) in &rows {
            t.push(gap_row(p, s));
        }
        note_unresolved(out, &rows, &format!("gaps-xi N={n}"));
        let csv = file_name(cfg, "gaps_xi", n, "csv");
        out.table(&csv, &t, &format!("{model} N={n}: inter-sector gaps E_b - E_a against xi"))?;
        if cfg.plots {
            let fig = gap_figure(&t, "xi", &format!("{model}, N = {n}"), Scale::Linear)?;
            emit_figure(out, &file_name(cfg, "gaps_xi", n, "svg"), &fig, "gap against xi, log scale")?;
        }
    }
    Ok(())
}

/// Lin-log axes for the one-dimensional LMG model, log-log otherwise.
pub fn gaps_n_scales(model: Model) -> (Scale, FitForm) {
    if model == Model::Lmg {
        (Scale::Linear, FitForm::Exponential)
    } else {
        (Scale::Log, FitForm::Power)
    }
}

fn gaps_n(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let model = cfg.model();
    let xi = &cfg.xi[0];
    let mut t = Table::new(&GAP_COLUMNS);
    let mut fits = Table::new(&["pair", "form", "a", "b", "r2", "status"]);
    let mut rows = Vec::new();
    let mut overlays = Vec::new();
    let (x_scale, drawn_form) = gaps_n_scales(model);
    let mut fit_summary = Vec::new();
    for pair in &cfg.pairs {
        let series = match gap_vs_n(model, xi, pair, &cfg.sizes, &cfg.precision, cfg.escalate) {
            Ok(s) => s,
            Err(e) => {
                out.task_failed(format!("gaps-n {}", pair_name(pair)), e.to_string());
                continue;
            }
        };
        out.task_ok(format!("gaps-n {}", pair_name(pair)));
        for s in &series.samples {
            rows.push((*pair, s.clone()));
        }
        for &form in &cfg.fits {
            let task = format!("fit {} {}", form.name(), pair_name(pair));
            match series.fit(form) {
                Ok(f) => {
                    fits.push(vec![pair_name(pair).into(), form.name().into(), f.a.into(), f.b.into(), f.r2.into(), "ok".into()]);
                    fit_summary.push(json!({"pair": pair_name(pair), "form": form.name(), "a": f.a, "b": f.b, "r2": f.r2}));
                    if form == drawn_form {
                        let (lo, hi) = (cfg.sizes[0] as f64, *cfg.sizes.last().unwrap() as f64);
                        let pts = (0..=64).map(|k| lo + (hi - lo) * k as f64 / 64.0).map(|n| (n, f.predict(n))).collect();
                        overlays.push(pts);
                    }
                    out.task_ok(task);
                }
                Err(e) => {
                    fits.push(vec![
                        pair_name(pair).into(),
                        form.name().into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        format!("failed: {e}").into(),
                    ]);
                    out.task_failed(task, e.to_string());
                }
            }
        }
    }
    for (p, s) in &rows {
        t.push(gap_row(p, s));
    }
    note_unresolved(out, &rows, "gaps-n");
    out.summary.insert("fits".into(), Value::Array(fit_summary));
    out.table("gaps_n.csv", &t, &format!("{model} xi={xi}: inter-sector gaps against N"))?;
    out.table("fits.csv", &fits, "least-squares fits |gap| = a exp(-b N) or a N^(-b)")?;
    if cfg.plots {
        let mut fig = gap_figure(&t, "N", &format!("{model}, xi = {xi}"), x_scale)?;
        for (k, pts) in overlays.into_iter().enumerate() {
            let label = (k == 0).then(|| format!("{} fit", drawn_form.name()));
            fig.series.push(Series::line(label, pts, "#000000", Dash::Dashed));
        }
        emit_figure(out, "gaps_n.svg", &fig, "gap against N with fitted law")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- centrifugal

pub fn centrifugal_figure(table: &Table, title: &str) -> CliResult<Figure> {
    let xi = table.floats("xi")?;
    let l = table.floats("l")?;
    let g = table.floats("scaled_gap")?;
    let mut fig = Figure::new(title, "xi", "(E_head(l) - E_0)/l", Scale::Linear, Scale::Log);
    for (k, (l, pts)) in group((0..xi.len()).map(|i| (l[i] as i64, xi[i], g[i]))).into_iter().enumerate() {
        fig.series.push(Series::line(Some(format!("l = {l}")), pts, PALETTE[k % PALETTE.len()], Dash::CYCLE[k % 4]));
    }
    Ok(fig)
}

fn centrifugal(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    for &n in &cfg.sizes {
        let curves = centrifugal_scan(n, &cfg.ls, &cfg.xi)?;
        let mut t = Table::new(&["xi", "l", "scaled_gap"]);
        for c in &curves {
            for (xi, g) in &c.points {
                t.push(vec![Cell::Text(xi.text().into()), c.l.into(), (*g).into()]);
            }
        }
        out.task_ok(format!("centrifugal N={n}"));
        let csv = file_name(cfg, "centrifugal", n, "csv");
        out.table(&csv, &t, &format!("VM2D N={n}: band-head excitation divided by l"))?;
        if cfg.plots {
            let fig = centrifugal_figure(&t, &format!("VM2D, N = {n}"))?;
            emit_figure(out, &file_name(cfg, "centrifugal", n, "svg"), &fig, "scaled band-head gaps, log scale")?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- otoc

fn t_text(t: Option<f64>) -> String {
    match t {
        None => "inf".into(),
        Some(t) => format!("{t}"),
    }
}

pub fn otoc_figure(table: &Table, title: &str, critical: Option<f64>) -> CliResult<Figure> {
    let e = table.floats("scaled_energy")?;
    let v = table.floats("value")?;
    let n = table.floats("N")?;
    let t = table.texts("T")?;
    let mut fig = Figure::new(title, "(E - E_gs)/N", "Re F (time averaged)", Scale::Linear, Scale::Linear);
    let groups = group((0..e.len()).map(|i| ((n[i] as i64, t[i].clone()), e[i], v[i])));
    for (k, ((n, t), pts)) in groups.into_iter().enumerate() {
        let (color, dash) = if t == "inf" {
            (PALETTE[(1 + k) % PALETTE.len()], Dash::Solid)
        } else {
            (PALETTE[(2 + k) % PALETTE.len()], Dash::Dashed)
        };
        let label = if t == "inf" { format!("N = {n}, stationary") } else { format!("N = {n}, T = {t}") };
        fig.series.push(Series::line(Some(label), pts, color, dash));
    }
    if let Some(x) = critical {
        fig.vlines.push(VLine {
            x,
            label: "mean-field eps_c".into(),
            color: PALETTE[7].into(),
        });
    }
    Ok(fig)
}

fn otoc_scan(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let model = cfg.model();
    let xi = &cfg.xi[0];
    let settings = cfg.otoc.as_ref().expect("validated otoc settings");
    let critical = if xi.value() > model.critical_xi() {
        Some(meanfield_critical_energy(model, xi.value())?)
    } else {
        None
    };
    out.summary.insert("meanfield_critical_energy".into(), json!(critical));
    let mut t = Table::new(&[
        "N", "j", "E_j", "scaled_energy", "value", "abs_F", "imag_F", "T", "tol_deg", "accidental_resonances",
    ]);
    for &n in &cfg.sizes {
        let inst = ModelInstance::with_parameter(model, n, xi.clone())?;
        let (labels, default_sector, _, _) = standard_setup(&inst)?;
        let sector = settings.sector.unwrap_or(default_sector);
        let sys = diagonalize_sectors(&inst, &labels)?;
        let v = eigen_operator(&sys, settings.v)?;
        let w = eigen_operator(&sys, settings.w)?;
        let floor = 2.0 * sys.relative_resolution();
        if settings.tol_deg < floor {
            out.note(format!(
                "otoc-scan N={n}: tol_deg {:e} is below twice the certified relative resolution {floor:.3e}; near-resonant triples may be misclassified",
                settings.tol_deg
            ));
        }
        for &time in &settings.t_list {
            let averaging = match time {
                None => Averaging::Stationary,
                Some(t) => Averaging::Finite(t),
            };
            let scan = motoc_scan(&sys, &sector, &v, &w, averaging, settings.tol_deg)?;
            for (j, msg) in &scan.failures {
                out.task_failed(format!("otoc-scan N={n} T={} j={j}", t_text(time)), msg.clone());
            }
            if scan.failures.is_empty() {
                out.task_ok(format!("otoc-scan N={n} T={} ({} states)", t_text(time), scan.results.len()));
            }
            let accidental: usize = scan.results.iter().map(|r| r.accidental_resonances).sum();
            if accidental > 0 {
                out.note(format!("otoc-scan N={n} T={}: {accidental} accidental resonant triples", t_text(time)));
            }
            for r in &scan.results {
                t.push(vec![
                    n.into(),
                    r.j.into(),
                    r.energy.into(),
                    r.scaled_energy.into(),
                    r.value.into(),
                    r.modulus.into(),
                    r.imag.into(),
                    match time {
                        None => Cell::Text("inf".into()),
                        Some(t) => Cell::Float(t),
                    },
                    settings.tol_deg.into(),
                    r.accidental_resonances.into(),
                ]);
            }
        }
    }
    out.table(
        "otoc.csv",
        &t,
        &format!("{model} xi={xi}: microcanonical OTOC, V = {}, W = {}", settings.v.name(), settings.w.name()),
    )?;
    if cfg.plots {
        let fig = otoc_figure(&t, &format!("{model}, xi = {xi}"), critical)?;
        emit_figure(out, "otoc.svg", &fig, "time-averaged OTOC against scaled energy")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- critical energy

pub fn critical_figure(table: &Table, title: &str) -> CliResult<Figure> {
    let xi = table.floats("xi")?;
    let mf = table.floats("eps_meanfield")?;
    let ld = table.floats("eps_level_density")?;
    let mut fig = Figure::new(title, "xi", "eps_c", Scale::Linear, Scale::Linear);
    fig.series.push(Series::line(Some("mean field".into()), xi.iter().copied().zip(mf).collect(), PALETTE[0], Dash::Solid));
    fig.series.push(
        Series::line(Some("level density, N -> inf".into()), xi.iter().copied().zip(ld).collect(), PALETTE[1], Dash::Dashed)
            .with_markers(),
    );
    Ok(fig)
}

fn critical_energy(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let model = cfg.model();
    let mut t = Table::new(&["xi", "eps_meanfield", "eps_level_density", "relative_difference"]);
    let mut peaks = Table::new(&["xi", "N", "peak"]);
    for xi in &cfg.xi {
        let task = format!("critical-energy xi={xi}");
        let mf = meanfield_critical_energy(model, xi.value());
        let ld = level_density_critical_energy(model, xi.value(), &cfg.sizes);
        match (mf, ld) {
            (Ok(mf), Ok(ld)) => {
                t.push(vec![
                    Cell::Text(xi.text().into()),
                    mf.into(),
                    ld.extrapolated.into(),
                    ((ld.extrapolated - mf) / mf).abs().into(),
                ]);
                for (n, p) in &ld.peaks {
                    peaks.push(vec![Cell::Text(xi.text().into()), (*n).into(), (*p).into()]);
                }
                out.task_ok(task);
            }
            (Err(e), _) | (_, Err(e)) => out.task_failed(task, e.to_string()),
        }
    }
    out.table("critical_energy.csv", &t, &format!("{model}: mean-field and level-density ESQPT energies"))?;
    out.table("level_density_peaks.csv", &peaks, "level-density peak (E - E_0)/N per size")?;
    if cfg.plots {
        let fig = critical_figure(&t, &format!("{model} critical excitation energy"))?;
        emit_figure(out, "critical_energy.svg", &fig, "critical energy against xi")?;
    }
    Ok(())
}

// ---------------------------------------------------------------- oracle

fn block_union(inst: &ModelInstance) -> esqpt_core::Result<Vec<f64>> {
    let mut all = Vec::new();
    for label in sector_list(inst) {
        let block = build_block::<f64>(inst, &label, 53)?;
        let s = eig_values(&block, &PrecisionConfig::double())?;
        for e in s.eigenvalues {
            all.extend(std::iter::repeat_n(e, label.multiplicity() as usize));
        }
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

fn oracle_case(model: Model, n: u32, xi: &ControlParameter) -> esqpt_core::Result<(usize, f64)> {
    let inst = ModelInstance::with_parameter(model, n, xi.clone())?;
    let basis = build_basis(model, n)?;
    let full = oracle_spectrum(&basis, xi)?;
    let blocks = block_union(&inst)?;
    if full.len() != blocks.len() {
        return Ok((full.len(), f64::INFINITY));
    }
    let dev = full.iter().zip(&blocks).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok((full.len(), dev))
}

fn oracle_check(cfg: &RunConfig, out: &mut Output) -> CliResult<()> {
    let cases: Vec<(Model, u32, ControlParameter)> = cfg
        .models
        .iter()
        .flat_map(|&m| cfg.sizes.iter().flat_map(move |&n| cfg.xi.iter().map(move |x| (m, n, x.clone()))))
        .collect();
    let results: Vec<_> = cases
        .par_iter()
        .map(|(m, n, xi)| oracle_case(*m, *n, xi))
        .collect();
    let mut t = Table::new(&["model", "N", "xi", "dimension", "max_abs_dev", "pass"]);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for ((m, n, xi), r) in cases.iter().zip(results) {
        let task = format!("oracle {m} N={n} xi={xi}");
        match r {
            Ok((dim, dev)) => {
                let pass = dev <= cfg.tolerance;
                worst = worst.max(dev);
                t.push(vec![m.id().into(), (*n).into(), Cell::Text(xi.text().into()), dim.into(), dev.into(), pass.into()]);
                if pass {
                    out.task_ok(task);
                } else {
                    failures.push(format!("{m} N={n} xi={xi}: deviation {dev:.3e}"));
                    out.task_failed(task, format!("deviation {dev:.3e} exceeds {:e}", cfg.tolerance));
                }
            }
            Err(e) => {
                failures.push(format!("{m} N={n} xi={xi}: {e}"));
                out.task_failed(task, e.to_string());
            }
        }
    }
    out.table("oracle_check.csv", &t, "block spectra against the full Fock-space spectrum")?;
    out.summary.insert("max_abs_dev".into(), json!(worst));
    out.summary.insert("cases".into(), json!(cases.len()));
    if failures.is_empty() {
        let msg = format!("all blocks match oracle within {:e}", cfg.tolerance);
        out.summary.insert("report".into(), json!(msg));
        out.note(msg);
        Ok(())
    } else {
        Err(CliError::OracleMismatch(failures.join("; ")))
    }
}
