//! Experiment pipelines.
//!
//! Per-N work runs on a rayon pool; results are assembled in N order and every number is
//! formatted before anything touches the disk, so an unchanged config reproduces its CSV bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::cache::Cache;
use super::config::{ExperimentConfig, ExperimentKind};
use super::output::{num, opt, write_atomic, Table};
use super::plot::{power_line, Plot, Series};
use crate::algebra::{normalized_trace_pairing, weyl_quantize, FourierObservable};
use crate::classical::{fit_decay_exponent, fit_logarithmic, CorrelationSeries, TorusMap, Window};
use crate::error::{Error, Result};
use crate::propagators::{egorov_defects, fit_egorov_growth, Propagator, UNITARITY_TOL};
use crate::spectral::{
    diagonalize, offdiagonal_window_sum, quantum_autocorrelations, quantum_variance, windowed_variance_bound, EigenSystem,
    MatrixElementTable,
};
use crate::C64;

/// What to compute from a config. The experiment kinds plus two inspection tasks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Experiment(ExperimentKind),
    Quantize,
    Spectrum,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Experiment(k) => k.as_str(),
            Task::Quantize => "quantize",
            Task::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads for per-N tasks; 0 uses the rayon default.
    pub jobs: usize,
    /// Compute only; write nothing.
    pub dry_run: bool,
}

/// One fitted rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FitRecord {
    pub observable: String,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub constant: f64,
    pub residual: f64,
    pub points: usize,
}

/// Solver and cache diagnostics for one dimension. Timing lives here, never in a CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Diagnostic {
    pub n: usize,
    pub unitarity_defect: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_clusters: Option<usize>,
    pub propagator_cached: bool,
    pub eigensystem_cached: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct ResultRecord {
    pub name: String,
    pub task: Task,
    pub config_hash: String,
    pub config_toml: String,
    pub tables: Vec<Table>,
    pub fits: Vec<FitRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub plots: Vec<(String, Plot)>,
    pub wall_clock: f64,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl ResultRecord {
    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn fit(&self, observable: &str, quantity: &str, n: Option<usize>, model: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.observable == observable && f.quantity == quantity && f.n == n && f.model == model)
    }

    fn fits_table(&self) -> Table {
        let mut t = Table::new("fits.csv", &["observable", "quantity", "N", "model", "rate", "constant", "residual", "points", "config_hash"]);
        for f in &self.fits {
            t.push(vec![
                f.observable.clone(),
                f.quantity.clone(),
                f.n.map(|n| n.to_string()).unwrap_or_default(),
                f.model.clone(),
                opt(f.rate),
                num(f.constant),
                num(f.residual),
                f.points.to_string(),
                self.config_hash.clone(),
            ]);
        }
        t
    }
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
struct Manifest<'a> {
    name: &'a str,
    task: &'a str,
    config_hash: &'a str,
    wall_clock_seconds: f64,
    files: Vec<String>,
    fits: &'a [FitRecord],
    diagnostics: &'a [Diagnostic],
}

/// Run the experiment the config names and write its outputs.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord> {
    run_task(config, Task::Experiment(config.kind), &RunOptions::default())
}

pub fn run_task(config: &ExperimentConfig, task: Task, opts: &RunOptions) -> Result<ResultRecord> {
    config.validate()?;
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let start = Instant::now();
    let mut ctx = Context::new(config);
    let outcome = pool.install(|| match task {
        Task::Quantize => ctx.quantize(),
        Task::Spectrum => ctx.spectrum(),
        Task::Experiment(ExperimentKind::VarianceSweep | ExperimentKind::Offdiagonal) => ctx.variance(),
        Task::Experiment(ExperimentKind::EgorovGrowth) => ctx.egorov(),
        Task::Experiment(ExperimentKind::ClassicalRate) => ctx.classical_rate(),
        Task::Experiment(ExperimentKind::InequalityAudit) => ctx.audit(),
    });
    // a failed audit still leaves its table on disk; anything else aborts before output
    let deferred = match outcome {
        Ok(()) => None,
        Err(e @ Error::At { .. }) if task == Task::Experiment(ExperimentKind::InequalityAudit) && !ctx.tables.is_empty() => Some(e),
        Err(e) => return Err(e),
    };
    let mut record = ResultRecord {
        name: config.name.clone(),
        task,
        config_hash: ctx.hash.clone(),
        config_toml: config.to_toml(),
        tables: std::mem::take(&mut ctx.tables),
        fits: std::mem::take(&mut ctx.fits),
        diagnostics: std::mem::take(&mut ctx.diagnostics),
        plots: std::mem::take(&mut ctx.plots),
        wall_clock: 0.0,
        out_dir: config.output.dir.join(&config.name),
        files: Vec::new(),
    };
    if !record.fits.is_empty() {
        let fits = record.fits_table();
        record.tables.push(fits);
    }
    record.wall_clock = start.elapsed().as_secs_f64();
    if !opts.dry_run {
        write_outputs(&mut record, config.output.plots)?;
    }
    match deferred {
        Some(e) => Err(e),
        None => Ok(record),
    }
}

fn write_outputs(record: &mut ResultRecord, plots: bool) -> Result<()> {
    let dir = record.out_dir.clone();
    let mut files = Vec::new();
    let put = |files: &mut Vec<PathBuf>, name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        write_atomic(&path, bytes)?;
        files.push(path);
        Ok(())
    };
    put(&mut files, "config.toml", record.config_toml.as_bytes())?;
    for t in &record.tables {
        put(&mut files, &t.file, &t.to_csv()?)?;
    }
    if plots {
        for (name, p) in &record.plots {
            put(&mut files, name, p.render().as_bytes())?;
        }
    }
    let manifest = Manifest {
        name: &record.name,
        task: record.task.as_str(),
        config_hash: &record.config_hash,
        wall_clock_seconds: record.wall_clock,
        files: files.iter().filter_map(|p| p.file_name()).map(|f| f.to_string_lossy().into_owned()).collect(),
        fits: &record.fits,
        diagnostics: &record.diagnostics,
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Config(format!("manifest: {e}")))?;
    put(&mut files, "manifest.toml", text.as_bytes())?;
    record.files = files;
    Ok(())
}

fn at_n<T>(n: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at(format!("N = {n}")))
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    cache: Cache,
    cache_lock: Mutex<()>,
    observables: Vec<(String, FourierObservable<f64>)>,
    tables: Vec<Table>,
    fits: Vec<FitRecord>,
    diagnostics: Vec<Diagnostic>,
    plots: Vec<(String, Plot)>,
}

/// Propagator, optional eigensystem and diagnostics for one dimension.
struct Prepared {
    prop: Propagator,
    es: Option<EigenSystem>,
    diag: Diagnostic,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        let observables = cfg.observables.iter().map(|o| (o.name.clone(), o.build().expect("validated"))).collect();
        Context {
            cfg,
            hash: cfg.hash(),
            cache: Cache::new(&cfg.cache.dir, cfg.cache.enabled),
            cache_lock: Mutex::new(()),
            observables,
            tables: Vec::new(),
            fits: Vec::new(),
            diagnostics: Vec::new(),
            plots: Vec::new(),
        }
    }

    fn with_cache<T>(&self, f: impl FnOnce(&Cache) -> T) -> T {
        let _guard = self.cache_lock.lock().unwrap_or_else(|p| p.into_inner());
        f(&self.cache)
    }

    fn prepare(&self, n: usize, spectrum: bool) -> Result<Prepared> {
        let t0 = Instant::now();
        let map = &self.cfg.map;
        let (prop, prop_hit) = match self.with_cache(|c| c.get_propagator(map, n)) {
            Some(p) => (p, true),
            None => {
                let p = map.propagator(n)?;
                self.with_cache(|c| c.put_propagator(map, n, &p))?;
                (p, false)
            }
        };
        let unitarity = prop.op.unitarity_defect();
        if !(unitarity <= UNITARITY_TOL) {
            return Err(Error::invariant("propagator unitarity defect", unitarity, UNITARITY_TOL));
        }
        let mut diag = Diagnostic {
            n,
            unitarity_defect: unitarity,
            max_residual: None,
            gram_defect: None,
            n_clusters: None,
            propagator_cached: prop_hit,
            eigensystem_cached: false,
            seconds: 0.0,
        };
        let es = if spectrum {
            let (es, hit) = match self.with_cache(|c| c.get_eigensystem(map, n, &prop.op)) {
                Some(es) => (es, true),
                None => {
                    let es = diagonalize(&prop.op)?;
                    self.with_cache(|c| c.put_eigensystem(map, n, &es))?;
                    (es, false)
                }
            };
            let tol = self.cfg.tolerances.residual;
            if !(es.max_residual() <= tol) {
                return Err(Error::invariant("eigenpair residual", es.max_residual(), tol));
            }
            diag.max_residual = Some(es.max_residual());
            diag.gram_defect = Some(es.gram_defect());
            diag.n_clusters = Some(es.clusters().len());
            diag.eigensystem_cached = hit;
            Some(es)
        } else {
            None
        };
        diag.seconds = t0.elapsed().as_secs_f64();
        Ok(Prepared { prop, es, diag })
    }

    /// Run `f` for every N on the pool; results come back in N order.
    fn per_n<T: Send>(&self, spectrum: bool, f: impl Fn(usize, &Prepared) -> Result<T> + Sync) -> Result<Vec<(Diagnostic, T)>> {
        let out: Vec<Result<(Diagnostic, T)>> = self
            .cfg
            .n_list
            .par_iter()
            .map(|&n| {
                at_n(n, (|| {
                    let p = self.prepare(n, spectrum)?;
                    log::info!("N = {n}: prepared in {:.2}s", p.diag.seconds);
                    let v = f(n, &p)?;
                    Ok((p.diag, v))
                })())
            })
            .collect();
        out.into_iter().collect()
    }

    fn push_power_fit(&mut self, observable: &str, quantity: &str, points: &[(f64, f64)]) -> Option<(f64, f64)> {
        let pts: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0 && p.1.is_finite()).collect();
        match fit_decay_exponent(&pts) {
            Ok(f) => {
                self.fits.push(FitRecord {
                    observable: observable.into(),
                    quantity: quantity.into(),
                    n: None,
                    model: "power".into(),
                    rate: Some(f.exponent),
                    constant: f.intercept.exp(),
                    residual: f.residual,
                    points: pts.len(),
                });
                Some((f.exponent, f.intercept))
            }
            Err(e) => {
                log::warn!("{observable}: no power fit for {quantity}: {e}");
                None
            }
        }
    }

    fn quantize(&mut self) -> Result<()> {
        let rows = self.per_n(false, |n, p| {
            let mut rows = Vec::new();
            for (name, a) in &self.observables {
                let op = weyl_quantize(n, a);
                let pairing = normalized_trace_pairing(&op, &op)?;
                let classical: f64 = a.iter().map(|(_, c)| c.norm_sqr()).sum();
                rows.push(vec![
                    n.to_string(),
                    p.prop.construction.as_str().into(),
                    num(p.diag.unitarity_defect),
                    name.clone(),
                    num(op.hermiticity_defect()),
                    num((pairing - C64::new(classical, 0.0)).norm()),
                    self.hash.clone(),
                ]);
            }
            Ok(rows)
        })?;
        let mut t = Table::new(
            "quantize.csv",
            &["N", "construction", "unitarity_defect", "observable", "hermiticity_defect", "trace_pairing_defect", "config_hash"],
        );
        for (d, rs) in rows {
            self.diagnostics.push(d);
            rs.into_iter().for_each(|r| t.push(r));
        }
        self.tables.push(t);
        Ok(())
    }

    fn spectrum(&mut self) -> Result<()> {
        let out = self.per_n(true, |_, p| Ok(p.es.clone().expect("spectrum requested")))?;
        let mut summary = Table::new("spectrum.csv", &["N", "max_residual", "gram_defect", "n_clusters", "largest_cluster", "config_hash"]);
        for (d, es) in out {
            let mut t = Table::new(format!("spectrum-N{}.csv", d.n), &["j", "theta", "residual", "config_hash"]);
            for (j, (th, r)) in es.phases().iter().zip(es.residuals()).enumerate() {
                t.push(vec![j.to_string(), num(*th), num(*r), self.hash.clone()]);
            }
            summary.push(vec![
                d.n.to_string(),
                num(es.max_residual()),
                num(es.gram_defect()),
                es.clusters().len().to_string(),
                es.largest_cluster().to_string(),
                self.hash.clone(),
            ]);
            self.tables.push(t);
            self.diagnostics.push(d);
        }
        self.tables.insert(0, summary);
        Ok(())
    }

    fn variance(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let label = cfg.map.label();
        let variant = cfg.map.variant();
        let out = self.per_n(true, |n, p| {
            let es = p.es.as_ref().expect("spectrum requested");
            let mut rows = Vec::new();
            for (name, a) in &self.observables {
                let rep = quantum_variance(es, a).map_err(|e| e.at(format!("observable {name}")))?;
                if !(rep.value >= 0.0) {
                    return Err(Error::invariant("S2 nonnegative", rep.value, 0.0));
                }
                let (eps, value) = match cfg.offdiag_shift(n) {
                    Some(shift) => {
                        let table = MatrixElementTable::new(es, a, name.clone())?;
                        let width = cfg.offdiag.as_ref().and_then(|o| o.width);
                        (Some(shift), Some(offdiagonal_window_sum(es, &table, shift, width)?))
                    }
                    None => (None, None),
                };
                rows.push((name.clone(), rep, eps, value));
            }
            Ok(rows)
        })?;

        let mut stats = Table::new(
            "stats.csv",
            &["N", "map", "variant", "observable", "S2", "S2_lnN", "offdiag_eps", "offdiag_value", "max_residual", "n_clusters"],
        );
        let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        let mut offdiag: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for (d, rows) in out {
            let n = d.n;
            for (name, rep, eps, value) in rows {
                stats.push(vec![
                    n.to_string(),
                    label.into(),
                    variant.into(),
                    name.clone(),
                    num(rep.value),
                    num(rep.value * (n as f64).ln()),
                    opt(eps),
                    opt(value),
                    opt(d.max_residual),
                    rep.n_clusters.to_string(),
                ]);
                series.entry(name.clone()).or_default().push((n as f64, rep.value));
                if let Some(v) = value {
                    offdiag.entry(name).or_default().push((n as f64, v));
                }
            }
            self.diagnostics.push(d);
        }
        self.tables.push(stats);

        let mut plot = Plot { title: format!("{}: S2(N)", cfg.name), x_label: "N".into(), y_label: "S2".into(), x_log: true, series: vec![] };
        for (name, pts) in &series {
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let fit = self.push_power_fit(name, "S2", pts);
            let logs: Vec<(f64, f64)> = pts.iter().filter(|p| p.1 > 0.0).copied().collect();
            if logs.len() >= 3 {
                match fit_logarithmic(&logs) {
                    Ok(l) => self.fits.push(FitRecord {
                        observable: name.clone(),
                        quantity: "S2".into(),
                        n: None,
                        model: "inverse-log".into(),
                        rate: None,
                        constant: l.constant,
                        residual: l.residual,
                        points: logs.len(),
                    }),
                    Err(e) => log::warn!("{name}: no logarithmic fit: {e}"),
                }
            }
            plot.series.push(Series::markers(name.clone(), pts.clone()));
            if let Some((k, c)) = fit {
                plot.series.push(Series::line(format!("{name} slope {k:.3}"), power_line(&xs, k, c)));
            }
        }
        self.plots.push(("variance.svg".into(), plot));
        if !offdiag.is_empty() {
            let plot = Plot {
                title: format!("{}: off-diagonal window sum", cfg.name),
                x_label: "N".into(),
                y_label: "window sum".into(),
                x_log: true,
                series: offdiag.into_iter().map(|(k, v)| Series::markers(k, v)).collect(),
            };
            self.plots.push(("offdiag.svg".into(), plot));
        }
        Ok(())
    }

    /// Classical correlation series `C[a](t)` for `t ∈ [t_min, t_max]`, exact where possible.
    fn classical_series(&self, map: &TorusMap<f64>, a: &FourierObservable<f64>, t_min: i64, t_max: i64) -> Result<CorrelationSeries> {
        if map.is_exact() {
            let mut s = CorrelationSeries::exact(map, a, t_max.max(-t_min))?;
            s.values.retain(|t, _| (t_min..=t_max).contains(t));
            Ok(s)
        } else {
            CorrelationSeries::sampled(map, a, t_min, t_max, self.cfg.classical.grid)
        }
    }

    fn egorov(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let t_max = cfg.egorov.t_max;
        let times: Vec<i64> = (0..=t_max).collect();
        let map = cfg.map.classical()?;
        let classical: Vec<CorrelationSeries> =
            self.observables.iter().map(|(_, a)| self.classical_series(&map, a, 0, t_max)).collect::<Result<_>>()?;

        let out = self.per_n(false, |_, p| {
            let mut per_obs = Vec::new();
            for (name, a) in &self.observables {
                let defects = egorov_defects(&p.prop, a, &map, &times).map_err(|e| e.at(format!("observable {name}")))?;
                for r in &defects {
                    if !(r.value >= 0.0 && r.value.is_finite()) {
                        return Err(Error::invariant("Egorov defect finite", r.value, 0.0).at(format!("t = {}", r.t)));
                    }
                }
                let quantum = quantum_autocorrelations(&p.prop.op, a, &times)?;
                per_obs.push((defects, quantum));
            }
            Ok(per_obs)
        })?;

        let mut dt = Table::new("egorov.csv", &["N", "observable", "t", "defect", "radius", "band_edge_energy", "config_hash"]);
        let mut ct = Table::new(
            "autocorrelation.csv",
            &["N", "observable", "t", "quantum_re", "quantum_im", "classical", "classical_error", "abs_diff", "bound", "config_hash"],
        );
        let mut by_obs: Vec<BTreeMap<usize, BTreeMap<i64, f64>>> = vec![BTreeMap::new(); self.observables.len()];
        let mut plot =
            Plot { title: format!("{}: Egorov defect", cfg.name), x_label: "t".into(), y_label: "defect".into(), x_log: false, series: vec![] };
        for (d, per_obs) in out {
            let n = d.n;
            for (k, (defects, quantum)) in per_obs.into_iter().enumerate() {
                let name = self.observables[k].0.clone();
                let map_d: BTreeMap<i64, f64> = defects.iter().map(|r| (r.t, r.value)).collect();
                for r in &defects {
                    dt.push(vec![n.to_string(), name.clone(), r.t.to_string(), num(r.value), r.radius.to_string(), num(r.band_edge_energy), self.hash.clone()]);
                }
                let fit = fit_egorov_growth(&map_d, n).map_err(|e| e.at(format!("N = {n}, observable {name}")))?;
                let bound = |t: i64| -> Option<f64> {
                    let g = fit.exponential?;
                    Some(g.constant * (g.rate * t as f64).exp() / n as f64)
                };
                for (t, q) in times.iter().zip(&quantum) {
                    let c = classical[k].get(*t).ok_or(Error::MissingSeries(*t))?;
                    ct.push(vec![
                        n.to_string(),
                        name.clone(),
                        t.to_string(),
                        num(q.re),
                        num(q.im),
                        num(c.re),
                        num(classical[k].error),
                        num((q - c).norm()),
                        opt(bound(*t)),
                        self.hash.clone(),
                    ]);
                }
                for (model, g) in [("exponential", fit.exponential), ("power", fit.power)] {
                    if let Some(g) = g {
                        self.fits.push(FitRecord {
                            observable: name.clone(),
                            quantity: "egorov_defect".into(),
                            n: Some(n),
                            model: model.into(),
                            rate: Some(g.rate),
                            constant: g.constant,
                            residual: g.residual,
                            points: map_d.keys().filter(|&&t| t > 0).count(),
                        });
                    }
                }
                let pts: Vec<(f64, f64)> = map_d.iter().filter(|(&t, _)| t > 0).map(|(&t, &v)| (t as f64, v)).collect();
                plot.series.push(Series::markers(format!("{name} N={n}"), pts.clone()));
                if let Some(g) = fit.exponential {
                    let line = pts.iter().map(|&(t, _)| (t, g.constant * (g.rate * t).exp() / n as f64)).collect();
                    plot.series.push(Series::line(format!("N={n} rate {:.3}", g.rate), line));
                }
                by_obs[k].insert(n, map_d);
            }
            self.diagnostics.push(d);
        }

        let mut ht = Table::new("halving.csv", &["observable", "t", "N", "N2", "ratio", "config_hash"]);
        for (k, per_n) in by_obs.iter().enumerate() {
            for (&n, d1) in per_n {
                let Some(d2) = per_n.get(&(2 * n)) else { continue };
                for (&t, &v1) in d1.iter().filter(|(&t, _)| t > 0) {
                    if let Some(&v2) = d2.get(&t) {
                        ht.push(vec![self.observables[k].0.clone(), t.to_string(), n.to_string(), (2 * n).to_string(), num(v1 / v2), self.hash.clone()]);
                    }
                }
            }
        }
        self.tables.extend([dt, ct, ht]);
        self.plots.push(("egorov.svg".into(), plot));
        Ok(())
    }

    fn classical_rate(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let map = cfg.map.classical()?;
        let windows: Vec<Window> = cfg.window.scales.iter().map(|&t| Window::new(t, cfg.window.kind)).collect::<Result<_>>()?;
        for w in &windows {
            w.check_properties()?;
        }
        let support = windows.iter().map(|w| w.support()).max().unwrap_or(0);
        let kind = format!("{:?}", cfg.window.kind).to_lowercase();
        let mut table = Table::new("classical.csv", &["observable", "T", "window", "value", "abs_sum", "config_hash"]);
        let mut plot =
            Plot { title: format!("{}: windowed sums", cfg.name), x_label: "T".into(), y_label: "|sum|".into(), x_log: true, series: vec![] };
        let observables = self.observables.clone();
        for (name, a) in &observables {
            let series = self.classical_series(&map, a, -support, support).map_err(|e| e.at(format!("observable {name}")))?;
            let mut pts = Vec::new();
            for w in &windows {
                let v = crate::classical::windowed_ergodicity_sum(&series, w, 0.0)?.norm();
                let abs = crate::classical::windowed_absolute_sum(&series, w)?;
                if !(v <= abs * (1.0 + 1e-12) + 1e-300) {
                    return Err(Error::invariant("windowed sum exceeds its absolute bound", v - abs, 0.0).at(format!("T = {}", w.scale())));
                }
                table.push(vec![name.clone(), num(w.scale()), kind.clone(), num(v), num(abs), self.hash.clone()]);
                pts.push((w.scale(), v));
            }
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let fit = self.push_power_fit(name, "windowed_sum", &pts);
            plot.series.push(Series::markers(name.clone(), pts));
            if let Some((k, c)) = fit {
                plot.series.push(Series::line(format!("{name} slope {k:.2}"), power_line(&xs, k, c)));
            }
            let csv = series.to_csv(Some(windows.iter().map(|w| w.scale()).fold(0.0, f64::max)));
            self.tables.push(Table::from_csv(format!("correlation-{name}.csv"), csv.as_bytes())?);
        }
        self.tables.insert(0, table);
        self.plots.push(("classical.svg".into(), plot));
        Ok(())
    }

    fn audit(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let tol = cfg.tolerances.inequality;
        let out = self.per_n(true, |n, p| {
            let es = p.es.as_ref().expect("spectrum requested");
            let mut scales = cfg.window.scales.clone();
            scales.extend(cfg.window.n_powers.iter().map(|&k| (n as f64).powf(k)));
            let mut rows = Vec::new();
            for (name, a) in &self.observables {
                for &t in &scales {
                    let w = Window::new(t, cfg.window.kind)?;
                    let b = windowed_variance_bound(&p.prop.op, es, a, &w).map_err(|e| e.at(format!("observable {name}, T = {t}")))?;
                    rows.push((name.clone(), t, b));
                }
            }
            Ok(rows)
        })?;
        let mut table = Table::new("audit.csv", &["N", "observable", "T", "lhs", "rhs", "margin", "holds", "config_hash"]);
        let mut first_violation = None;
        for (d, rows) in out {
            for (name, t, b) in rows {
                let holds = b.holds(tol);
                if !holds && first_violation.is_none() {
                    first_violation = Some(
                        Error::invariant("windowed variance bound lhs - rhs", b.lhs - b.rhs, tol)
                            .at(format!("N = {}, observable {name}, T = {t}", d.n)),
                    );
                }
                table.push(vec![d.n.to_string(), name, num(t), num(b.lhs), num(b.rhs), num(b.rhs - b.lhs), holds.to_string(), self.hash.clone()]);
            }
            self.diagnostics.push(d);
        }
        self.tables.push(table);
        match first_violation {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Load a previously written table from an output directory.
pub fn read_table(dir: &Path, file: &str) -> Result<Table> {
    Table::from_csv(file, &std::fs::read(dir.join(file))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::preset;

    fn small(name: &str, n_list: Vec<usize>, root: &Path) -> ExperimentConfig {
        let mut cfg = preset(name).unwrap();
        cfg.n_list = n_list;
        cfg.output.dir = root.join("out");
        cfg.cache.dir = root.join("cache");
        cfg
    }

    #[test]
    fn variance_rows_carry_the_fixed_header_and_fits() {
        let dir = tempfile::tempdir().unwrap();
        let rec = run(&small("parabolic-variance", vec![21, 34, 55], dir.path())).unwrap();
        let stats = rec.table("stats.csv").unwrap();
        assert_eq!(stats.header.join(","), "N,map,variant,observable,S2,S2_lnN,offdiag_eps,offdiag_value,max_residual,n_clusters");
        assert_eq!(stats.rows.len(), 6);
        assert!(rec.fit("generic", "S2", None, "power").is_some());
        let fits = read_table(&rec.out_dir, "fits.csv").unwrap();
        let h = fits.column("config_hash").unwrap();
        assert!(fits.rows.iter().all(|r| r[h] == rec.config_hash));
        for f in ["config.toml", "manifest.toml", "variance.svg"] {
            assert!(rec.out_dir.join(f).exists(), "{f}");
        }
        // the written config reproduces the hash
        let again = ExperimentConfig::load(rec.out_dir.join("config.toml")).unwrap();
        assert_eq!(again.hash(), rec.config_hash);
    }

    #[test]
    fn hot_and_cold_runs_agree_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small("parabolic-offdiag", vec![21, 34], dir.path());
        let cold = run(&cfg).unwrap();
        let bytes = std::fs::read(cold.out_dir.join("stats.csv")).unwrap();
        let hot = run(&cfg).unwrap();
        assert!(hot.diagnostics.iter().all(|d| d.propagator_cached && d.eigensystem_cached));
        assert_eq!(std::fs::read(hot.out_dir.join("stats.csv")).unwrap(), bytes);
        cfg.cache.enabled = false;
        let uncached = run(&cfg).unwrap();
        assert!(uncached.diagnostics.iter().all(|d| !d.eigensystem_cached));
        assert_eq!(std::fs::read(uncached.out_dir.join("stats.csv")).unwrap(), bytes);
    }

    #[test]
    fn audit_holds_on_small_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let rec = run(&small("audit-perturbed-cat", vec![16], dir.path())).unwrap();
        let t = rec.table("audit.csv").unwrap();
        let c = t.column("holds").unwrap();
        assert!(!t.rows.is_empty() && t.rows.iter().all(|r| r[c] == "true"));
    }

    #[test]
    fn audit_violation_aborts_with_coordinates_and_keeps_the_table() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small("audit-parabolic", vec![13], dir.path());
        cfg.tolerances.inequality = -1e3;
        let err = run(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains("N = 13"), "{err}");
        assert!(cfg.output.dir.join(&cfg.name).join("audit.csv").exists());
    }

    #[test]
    fn quantize_and_spectrum_tasks() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small("perturbed-cat-egorov", vec![16], dir.path());
        let q = run_task(&cfg, Task::Quantize, &RunOptions::default()).unwrap();
        let t = q.table("quantize.csv").unwrap();
        let c = t.column("trace_pairing_defect").unwrap();
        assert!(t.rows.iter().all(|r| r[c].parse::<f64>().unwrap() < 1e-12));
        let s = run_task(&cfg, Task::Spectrum, &RunOptions { jobs: 1, dry_run: true }).unwrap();
        assert_eq!(s.table("spectrum-N16.csv").unwrap().rows.len(), 16);
        assert!(s.files.is_empty());
    }
}
