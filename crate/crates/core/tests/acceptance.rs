//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero if any fails.
//!
//! Run all: `cargo test --release --test acceptance`. Pass criterion numbers after `--` to
//! select a subset, e.g. `cargo test --release --test acceptance -- 1 3 7`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, ensure, Result};
use torus_lab::algebra::{classical_pairing, normalized_trace_pairing, translation_operator, weyl_quantize, FourierObservable, LatticeVector, TorusOperator};
use torus_lab::classical::{fit_decay_exponent, CatMatrix};
use torus_lab::harness::{preset, read_table, run, ExperimentConfig, ResultRecord, Table};
use torus_lab::phase::{e, e_frac};
use torus_lab::propagators::{exact_egorov_defect, metaplectic};
use torus_lab::{Observable, C64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// Preset runs shared between criteria, all cold (cache disabled).
struct Runs {
    root: PathBuf,
    done: BTreeMap<String, PathBuf>,
}

impl Runs {
    fn config(&self, name: &str, tag: &str) -> Result<ExperimentConfig> {
        let mut cfg = preset(name)?;
        cfg.output.dir = self.root.join(tag);
        cfg.cache.enabled = false;
        Ok(cfg)
    }

    fn get(&mut self, name: &str) -> Result<PathBuf> {
        if let Some(dir) = self.done.get(name) {
            return Ok(dir.clone());
        }
        let rec = run(&self.config(name, "first")?)?;
        self.done.insert(name.into(), rec.out_dir.clone());
        Ok(rec.out_dir)
    }

    fn table(&mut self, name: &str, file: &str) -> Result<Table> {
        let dir = self.get(name)?;
        Ok(read_table(&dir, file)?)
    }
}

fn column(t: &Table, name: &str) -> Result<Vec<f64>> {
    t.floats(name)
        .ok_or_else(|| anyhow!("{}: no column {name}", t.file))?
        .into_iter()
        .map(|v| v.ok_or_else(|| anyhow!("{}: empty cell in {name}", t.file)))
        .collect()
}

fn strings(t: &Table, name: &str) -> Result<Vec<String>> {
    let c = t.column(name).ok_or_else(|| anyhow!("{}: no column {name}", t.file))?;
    Ok(t.rows.iter().map(|r| r[c].clone()).collect())
}

fn max_abs(a: &TorusOperator, b: &TorusOperator) -> f64 {
    (a - b).max_abs()
}

fn c1_operator_algebra(_: &mut Runs) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for n in [3usize, 4, 5, 8, 13, 16, 32, 64] {
        let vs: Vec<LatticeVector> = (-4..=4).flat_map(|a| (-4..=4).map(move |b| LatticeVector::new(a, b))).collect();
        let ops: BTreeMap<(i64, i64), TorusOperator> =
            (-8..=8).flat_map(|a| (-8..=8).map(move |b| (a, b))).map(|(a, b)| ((a, b), translation_operator(n, LatticeVector::new(a, b)))).collect();
        let id = TorusOperator::identity(n);
        for &m in &vs {
            let tm = &ops[&(m.n1, m.n2)];
            worst = worst.max(max_abs(&(tm * &tm.adjoint()), &id));
            let expected = if m.is_zero_mod(n) { e_frac((m.n1 * m.n2) as i128, 2 * n as u64) * n as f64 } else { C64::new(0.0, 0.0) };
            worst = worst.max((tm.trace() - expected).norm());
            for &v in &vs {
                let s = m + v;
                let rhs = ops[&(s.n1, s.n2)].scale(e_frac(m.omega(v) as i128, 2 * n as u64));
                worst = worst.max(max_abs(&(tm * &ops[&(v.n1, v.n2)]), &rhs));
            }
        }
    }
    outcome(worst <= 1e-12, format!("max deviation {worst:.2e} (tol 1e-12)"))
}

fn smooth(radius: i64, shift: (f64, f64)) -> Observable {
    let mut modes = Vec::new();
    for a in -radius..=radius {
        for b in -radius..=radius {
            let w = (1.0 + (a * a + b * b) as f64).powi(-3);
            modes.push((LatticeVector::new(a, b), e(shift.0 * a as f64 + shift.1 * b as f64) * w));
        }
    }
    FourierObservable::from_coefficients(modes)
}

fn c2_trace_pairing(_: &mut Runs) -> Result<Outcome> {
    let mut exact: f64 = 0.0;
    for n in [8usize, 16, 32, 64] {
        let r = (n as i64 - 1) / 2;
        let a = smooth(r, (0.13, 0.71));
        let b = smooth(r, (0.37, -0.29));
        let q = normalized_trace_pairing(&weyl_quantize(n, &a), &weyl_quantize(n, &b))?;
        exact = exact.max((q - classical_pairing(&a, &b)).norm());
    }
    let (a, b) = (smooth(128, (0.13, 0.71)), smooth(128, (0.37, -0.29)));
    let classical = classical_pairing(&a, &b);
    let mut pts = Vec::new();
    for n in [16usize, 32, 64, 128, 256] {
        let q = normalized_trace_pairing(&weyl_quantize(n, &a), &weyl_quantize(n, &b))?;
        pts.push((n as f64, (q - classical).norm()));
    }
    let fit = fit_decay_exponent(&pts)?;
    let defects: Vec<String> = pts.iter().map(|p| format!("{:.1e}", p.1)).collect();
    outcome(
        exact <= 1e-12 && fit.exponent <= -3.0,
        format!("band-limited max error {exact:.2e}; aliasing defects [{}] slope {:.2} (need <= -3)", defects.join(", "), fit.exponent),
    )
}

fn cat(a: i64, b: i64, c: i64, d: i64) -> CatMatrix {
    CatMatrix::new(a, b, c, d).expect("determinant one")
}

fn c3_exact_egorov(_: &mut Runs) -> Result<Outcome> {
    let mats = [cat(2, 1, 3, 2), cat(2, 3, 1, 2), cat(1, 0, 2, 1), cat(1, 2, 0, 1), cat(0, 1, -1, 0), cat(5, 2, 12, 5), cat(3, 2, 4, 3)];
    let mut worst: f64 = 0.0;
    for n in [8usize, 13, 21, 32, 64] {
        for &a in &mats {
            let u = metaplectic(n, a)?;
            let r = exact_egorov_defect(&u.op, a, 3)?;
            worst = worst.max(r.max_defect).max(r.max_phase_error).max(u.op.unitarity_defect());
        }
    }
    outcome(worst <= 1e-10, format!("{} matrices x 5 dimensions, max defect {worst:.2e} (tol 1e-10)", mats.len()))
}

/// Per-N defects for t > 0 from the Egorov preset.
fn egorov_defects(runs: &mut Runs) -> Result<BTreeMap<usize, BTreeMap<i64, f64>>> {
    let t = runs.table("perturbed-cat-egorov", "egorov.csv")?;
    let (ns, ts, ds) = (column(&t, "N")?, column(&t, "t")?, column(&t, "defect")?);
    let mut out: BTreeMap<usize, BTreeMap<i64, f64>> = BTreeMap::new();
    for ((n, t), d) in ns.into_iter().zip(ts).zip(ds) {
        if t > 0.0 {
            out.entry(n as usize).or_default().insert(t as i64, d);
        }
    }
    Ok(out)
}

fn c4_egorov_growth(runs: &mut Runs) -> Result<Outcome> {
    let defects = egorov_defects(runs)?;
    let fits = runs.table("perturbed-cat-egorov", "fits.csv")?;
    let (ns, models, rates, resid) = (column(&fits, "N")?, strings(&fits, "model")?, column(&fits, "rate")?, column(&fits, "residual")?);
    let mut pass = true;
    let mut parts = Vec::new();
    for &n in defects.keys() {
        let get = |m: &str| (0..ns.len()).find(|&i| ns[i] as usize == n && models[i] == m).map(|i| (rates[i], resid[i]));
        let (Some((gamma, re)), Some((_, rp))) = (get("exponential"), get("power")) else {
            pass = false;
            parts.push(format!("N={n}: no fit"));
            continue;
        };
        let ratio = rp / re;
        pass &= ratio >= 2.0;
        parts.push(format!("N={n}: Gamma {gamma:.3}, power/exp residual {ratio:.2}"));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&n, d1) in &defects {
        if let Some(d2) = defects.get(&(2 * n)) {
            for (t, v1) in d1 {
                let r = v1 / d2[t];
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
    }
    pass &= lo >= 1.5 && hi <= 2.5;
    parts.push(format!("halving ratios in [{lo:.2}, {hi:.2}] (need within [1.5, 2.5])"));
    outcome(pass, parts.join("; "))
}

fn c5_autocorrelation_match(runs: &mut Runs) -> Result<Outcome> {
    let t = runs.table("perturbed-cat-egorov", "autocorrelation.csv")?;
    let (ns, ts, diff) = (column(&t, "N")?, column(&t, "t")?, column(&t, "abs_diff")?);
    let bound: Vec<Option<f64>> = t.floats("bound").ok_or_else(|| anyhow!("no bound column"))?;
    let mut worst = (0.0f64, 0usize, 0i64);
    let mut violations = 0;
    for i in 0..ns.len() {
        if ts[i] < 1.0 || ts[i] > 8.0 {
            continue;
        }
        let b = bound[i].ok_or_else(|| anyhow!("missing bound at N={} t={}", ns[i], ts[i]))?;
        let r = diff[i] / b;
        if r > 1.0 {
            violations += 1;
        }
        if r > worst.0 {
            worst = (r, ns[i] as usize, ts[i] as i64);
        }
    }
    outcome(
        violations == 0,
        format!("{violations} pointwise violations; worst |Q - C| / bound = {:.2} at N={}, t={}", worst.0, worst.1, worst.2),
    )
}

fn c6_inequality_audit(runs: &mut Runs) -> Result<Outcome> {
    let mut rows = 0;
    let mut violations = 0;
    let mut min_margin = f64::INFINITY;
    for name in ["audit-parabolic", "audit-perturbed-cat"] {
        let t = runs.table(name, "audit.csv")?;
        let margin = column(&t, "margin")?;
        rows += margin.len();
        violations += margin.iter().filter(|&&m| m < -1e-9).count();
        min_margin = margin.iter().copied().fold(min_margin, f64::min);
    }
    outcome(violations == 0 && rows > 0, format!("{rows} (map, N, observable, T) checks, {violations} violations, smallest rhs - lhs {min_margin:.3e}"))
}

fn fit_of(t: &Table, observable: &str) -> Result<f64> {
    let (obs, rates) = (strings(t, "observable")?, t.floats("rate").ok_or_else(|| anyhow!("no rate column"))?);
    let q = strings(t, "quantity")?;
    let m = strings(t, "model")?;
    (0..obs.len())
        .find(|&i| obs[i] == observable && m[i] == "power" && (q[i] == "S2" || q[i] == "windowed_sum"))
        .and_then(|i| rates[i])
        .ok_or_else(|| anyhow!("no power fit for {observable}"))
}

fn c7_classical_rate(runs: &mut Runs) -> Result<Outcome> {
    let generic = fit_of(&runs.table("parabolic-classical-rate", "fits.csv")?, "generic")?;
    let t = runs.table("parabolic-classical-rate-p-only", "classical.csv")?;
    let (scales, values, abs) = (column(&t, "T")?, column(&t, "value")?, column(&t, "abs_sum")?);
    let p_only = fit_of(&runs.table("parabolic-classical-rate-p-only", "fits.csv")?, "p-only")?;
    // each doubling of T must divide the sum by more than 8, until it reaches rounding level
    let mut steps_ok = true;
    for i in 1..scales.len() {
        let floor = 1e-12 * abs[i];
        steps_ok &= values[i] <= values[i - 1] / 8.0 || values[i] <= floor;
    }
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.1e}")).collect();
    outcome(
        generic <= -0.8 && p_only <= -3.0 && steps_ok,
        format!("generic slope {generic:.3} (need <= -0.8); p-only sums [{}] slope {p_only:.2}, every doubling below 1/8 or at rounding: {steps_ok}", shown.join(", ")),
    )
}

fn stats_series(t: &Table, observable: &str, value: &str) -> Result<Vec<(f64, f64)>> {
    let (obs, ns, vs) = (strings(t, "observable")?, column(t, "N")?, t.floats(value).ok_or_else(|| anyhow!("no column {value}"))?);
    Ok((0..obs.len()).filter(|&i| obs[i] == observable).filter_map(|i| vs[i].map(|v| (ns[i], v))).collect())
}

fn c8_parabolic_rate(runs: &mut Runs) -> Result<Outcome> {
    let stats = runs.table("parabolic-variance", "stats.csv")?;
    let generic = stats_series(&stats, "generic", "S2")?;
    let slope = fit_decay_exponent(&generic)?.exponent;
    let p_only = fit_decay_exponent(&stats_series(&stats, "p-only", "S2")?)?.exponent;
    let clusters = column(&stats, "n_clusters")?.into_iter().fold(0.0, f64::max);
    let shown: Vec<String> = generic.iter().map(|(n, v)| format!("{n}:{v:.2e}")).collect();
    outcome(
        (-0.65..=-0.35).contains(&slope) && slope >= -0.75,
        format!("generic S2 [{}] slope {slope:.3} (need in [-0.65, -0.35]); p-only slope {p_only:.3}; max clusters {clusters}", shown.join(", ")),
    )
}

fn c9_perturbed_cat_variance(runs: &mut Runs) -> Result<Outcome> {
    let stats = runs.table("perturbed-cat-variance", "stats.csv")?;
    let s2 = stats_series(&stats, "generic", "S2")?;
    let scaled = stats_series(&stats, "generic", "S2_lnN")?;
    let slope = fit_decay_exponent(&s2)?.exponent;
    let mut sorted: Vec<f64> = scaled.iter().map(|p| p.1).collect();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    // no growth: past the middle of the N-list, S2·ln N stays within 1.2 times its median
    let tail = &scaled[scaled.len() / 2..];
    let worst = tail.iter().map(|p| p.1 / median).fold(0.0, f64::max);
    let shown: Vec<String> = scaled.iter().map(|(n, v)| format!("{n}:{v:.2e}")).collect();
    outcome(
        worst <= 1.2,
        format!("S2 ln N [{}]; upper-half max / median {worst:.2} (need <= 1.2); S2 slope {slope:.3}", shown.join(", ")),
    )
}

fn c10_offdiagonal(runs: &mut Runs) -> Result<Outcome> {
    let stats = runs.table("parabolic-offdiag", "stats.csv")?;
    let series = stats_series(&stats, "p-only", "offdiag_value")?;
    let target = 1.0;
    let at987 = series.iter().find(|p| p.0 == 987.0).map(|p| p.1).ok_or_else(|| anyhow!("N = 987 missing"))?;
    let last: Vec<f64> = series[series.len() - 3..].iter().map(|p| (p.1 - target).abs()).collect();
    let monotone = last.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let shown: Vec<String> = series.iter().map(|(n, v)| format!("{n}:{v:.3}")).collect();
    outcome(
        (at987 - target).abs() <= 0.2 && monotone,
        format!("window sums [{}]; |value - 1| at 987 = {:.3} (need <= 0.2), last three monotone: {monotone}", shown.join(", "), (at987 - target).abs()),
    )
}

fn csv_files(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let p = entry?.path();
        if p.extension().is_some_and(|e| e == "csv") {
            out.insert(p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p)?);
        }
    }
    Ok(out)
}

fn c11_determinism(runs: &mut Runs) -> Result<Outcome> {
    let names = ["parabolic-offdiag", "parabolic-classical-rate", "audit-perturbed-cat", "perturbed-cat-egorov"];
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for name in names {
        let first = csv_files(&runs.get(name)?)?;
        let rec: ResultRecord = run(&runs.config(name, "second")?)?;
        let second = csv_files(&rec.out_dir)?;
        ensure!(first.keys().eq(second.keys()), "{name}: different CSV sets");
        for (file, bytes) in &first {
            compared += 1;
            if second[file] != *bytes {
                mismatched.push(format!("{name}/{file}"));
            }
        }
    }
    // cache transparency: a hot run reproduces the cold bytes
    let mut cfg = runs.config("parabolic-offdiag", "cached")?;
    cfg.cache.enabled = true;
    cfg.cache.dir = runs.root.join("cache");
    run(&cfg)?;
    let hot = run(&cfg)?;
    ensure!(hot.diagnostics.iter().all(|d| d.eigensystem_cached), "second cached run did not hit the cache");
    let cold = csv_files(&runs.get("parabolic-offdiag")?)?;
    for (file, bytes) in csv_files(&hot.out_dir)? {
        compared += 1;
        if cold[&file] != bytes {
            mismatched.push(format!("cached/{file}"));
        }
    }
    outcome(mismatched.is_empty(), format!("{compared} CSV files compared byte for byte, mismatches: {mismatched:?}"))
}

type Criterion = fn(&mut Runs) -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("operator algebra", c1_operator_algebra),
        ("trace pairing", c2_trace_pairing),
        ("exact Egorov, linear maps", c3_exact_egorov),
        ("perturbed cat Egorov growth", c4_egorov_growth),
        ("quantum/classical autocorrelation", c5_autocorrelation_match),
        ("windowed inequality audit", c6_inequality_audit),
        ("classical rate lemma", c7_classical_rate),
        ("parabolic ergodicity rate", c8_parabolic_rate),
        ("perturbed cat ergodicity", c9_perturbed_cat_variance),
        ("off-diagonal concentration", c10_offdiagonal),
        ("determinism", c11_determinism),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut runs = Runs { root: dir.path().to_path_buf(), done: BTreeMap::new() };
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let k = k + 1;
        if !selected.is_empty() && !selected.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let (status, detail) = match f(&mut runs) {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => ("FAIL", format!("error: {e:#}")),
        };
        if status == "FAIL" {
            failed.push(k);
        }
        println!("criterion {k:>2} {status} {name}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
