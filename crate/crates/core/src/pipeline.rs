//! End-to-end runs: enumerate, fit, construct, verify and write reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::ball::{load_or_build, BallTable, EnumOptions};
use crate::certified::rational_from_f64;
use crate::config::Config;
use crate::construct::{
    decreasing_target_contexts, properness_threshold, select_parameters, Combination,
    ConstructionParams, LengthContext,
};
use crate::error::{Error, Result};
use crate::group::{make_group, Element};
use crate::growth::{
    alpha_sequence, certifies, classify_indices, decidable_depth, density_report,
    fit_growth_exponent, GrowthFit,
};
use crate::rng::SplitMix64;
use crate::spectral::{spectral_report, SpectralReport};
use crate::verify::{
    check_lemma_bounds, check_negative_definite_ell, default_levels, fit_sublevel_exponent,
    omega_gram, properness_scan, sample_ball, LevelSets, PsdReport, ProperReport, SublevelPoint,
    PSD_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Growth,
    Construct,
    Verify,
    Spectral,
    Report,
}

impl Stage {
    fn includes(self, other: Stage) -> bool {
        self == other || self == Stage::Report
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    /// Overrides the configured thread count.
    pub threads: Option<usize>,
    /// Overrides the configured seed.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub verdicts: BTreeMap<String, bool>,
    pub files: Vec<PathBuf>,
    pub summary: Option<Value>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

/// Runs `stage` (and everything it depends on), writing into `opts.out_dir`.
pub fn run(cfg: &Config, stage: Stage, opts: &RunOptions) -> Result<Outcome> {
    let threads = opts.threads.or(cfg.threads);
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        return pool.install(|| run_inner(cfg, stage, opts, threads));
    }
    run_inner(cfg, stage, opts, threads)
}

fn run_inner(cfg: &Config, stage: Stage, opts: &RunOptions, threads: Option<usize>) -> Result<Outcome> {
    let started = Instant::now();
    let seed = opts.seed.unwrap_or(cfg.seed);
    fs::create_dir_all(&opts.out_dir)?;
    let cache = opts.cache_dir.clone().or_else(|| cfg.cache_dir.clone());
    if let Some(dir) = &cache {
        fs::create_dir_all(dir)?;
    }
    let mut run = Run {
        cfg,
        seed,
        out: opts.out_dir.clone(),
        outcome: Outcome::default(),
    };

    let g = make_group(cfg.group.clone())?;
    let table = Arc::new(load_or_build(
        cache.as_deref(),
        &g,
        cfg.radius,
        &EnumOptions {
            budget: cfg.budget,
            threads: None,
        },
    )?);
    let growth = run.growth(&table)?;
    if stage == Stage::Growth {
        run.write_meta(started, threads)?;
        return Ok(run.outcome);
    }

    let params = ConstructionParams {
        d_target: cfg.d_target,
        ..ConstructionParams::new(growth.beta, growth.gamma, cfg.depth)?
    };
    let ctx = LengthContext::build(Arc::clone(&table), params)?;
    if stage.includes(Stage::Construct) {
        run.write_ell(&ctx)?;
    }
    let verify = if stage.includes(Stage::Verify) {
        Some(run.verify(&ctx, &growth)?)
    } else {
        None
    };
    let spectral = if stage.includes(Stage::Spectral) {
        Some(run.spectral(&ctx, &growth.fit)?)
    } else {
        None
    };
    if stage == Stage::Report {
        run.summary(&ctx, &growth, verify.as_ref(), spectral.as_ref())?;
    }
    run.write_meta(started, threads)?;
    Ok(run.outcome)
}

struct Growth {
    fit: GrowthFit,
    beta: f64,
    gamma: f64,
    /// Whether `(β, γ)` came from the configured target.
    derived: bool,
    certified: bool,
    density_ok: bool,
}

struct VerifySummary {
    properness: ProperReport,
}

struct Run<'a> {
    cfg: &'a Config,
    seed: u64,
    out: PathBuf,
    outcome: Outcome,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

impl Run<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.outcome.files.push(p.clone());
        p
    }

    fn verdict(&mut self, name: &str, ok: bool) {
        self.outcome.verdicts.insert(name.to_string(), ok);
    }

    fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let p = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(p, text)?;
        Ok(())
    }

    fn growth(&mut self, table: &BallTable) -> Result<Growth> {
        let cfg = self.cfg;
        let fit = fit_growth_exponent(table, cfg.fit_window())?;
        let alphas = alpha_sequence(table);
        let (beta, gamma, derived) = match (cfg.beta, cfg.gamma) {
            (Some(b), Some(g)) => (b, g, false),
            _ => {
                let target = cfg.d_target.ok_or_else(|| Error::Config("d_target missing".into()))?;
                let (b, g) = select_parameters(target, &fit)?;
                (b, g, true)
            }
        };
        let depth = decidable_depth(table.radius() as u64, gamma);
        let classes = classify_indices(&alphas, beta, gamma, depth)?;

        let mut w = csv_writer(&self.path("balls.csv"))?;
        w.write_record(["n", "mu_n"])?;
        for (n, m) in table.sizes().iter().enumerate() {
            w.write_record([n.to_string(), m.to_string()])?;
        }
        w.flush()?;

        let mut w = csv_writer(&self.path("growth.csv"))?;
        w.write_record(["n", "mu_n", "alpha_num", "alpha_den", "in_E", "in_F"])?;
        for (n, a) in alphas.iter() {
            let f = if n <= classes.depth() {
                classes.f(n).to_string()
            } else {
                String::new()
            };
            w.write_record([
                n.to_string(),
                table.mu(n as u32).to_string(),
                a.numer().to_string(),
                a.denom().to_string(),
                classes.e(n).to_string(),
                f,
            ])?;
        }
        w.flush()?;

        let certified = certifies(table.sizes(), &rational_from_f64(fit.c), &rational_from_f64(fit.d));
        let density = density_report(&classes.in_e, &fit, beta);
        let density_ok = density.iter().all(|r| r.ok);
        self.verdict("growth_certified", certified);
        self.verdict("density", density_ok);
        Ok(Growth {
            fit,
            beta,
            gamma,
            derived,
            certified,
            density_ok,
        })
    }

    fn write_ell(&mut self, ctx: &LengthContext) -> Result<()> {
        let (two_m, _) = properness_threshold(ctx);
        let table = ctx.table();
        let radius = self.cfg.ell_radius.unwrap_or(two_m).min(table.radius());
        let values = ctx.values_on_ball(radius)?;
        let mut w = csv_writer(&self.path("ell.csv"))?;
        w.write_record(["element", "word_length", "ell_num", "ell_den", "tail_bound", "n_terms"])?;
        let n_terms = ctx.terms().len().to_string();
        for (i, v) in values.iter().enumerate() {
            let p = table.length_of_index(i);
            w.write_record([
                table.element(i).to_string(),
                p.to_string(),
                v.numer().to_string(),
                v.denom().to_string(),
                ctx.tail_bound(p).to_string(),
                n_terms.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    fn samples(&self, ctx: &LengthContext, step: &str, count: usize) -> Vec<Vec<Element>> {
        let mut rng = SplitMix64::for_step(self.seed, step);
        (0..count)
            .map(|_| sample_ball(ctx, self.cfg.sample_radius(), self.cfg.sample_size, &mut rng))
            .collect()
    }

    fn levels(&self, ctx: &LengthContext) -> Vec<f64> {
        match &self.cfg.x_grid {
            Some(xs) => xs.clone(),
            None => default_levels(properness_threshold(ctx).1, self.cfg.x_points),
        }
    }

    fn verify(&mut self, ctx: &LengthContext, growth: &Growth) -> Result<VerifySummary> {
        let cfg = self.cfg;
        let mut checks = serde_json::Map::new();

        // Overlap functions are positive definite.
        let mut omega = Vec::new();
        let mut omega_ok = true;
        for t in ctx.terms() {
            let mut worst: Option<PsdReport> = None;
            for sample in self.samples(ctx, &format!("omega-{}", t.n), cfg.psd_samples) {
                let rep = omega_gram(ctx, t.k, &sample)?;
                let margin = |r: &PsdReport| r.min_eig / r.scale.max(f64::MIN_POSITIVE);
                if worst.as_ref().is_none_or(|w| margin(&rep) < margin(w)) {
                    worst = Some(rep);
                }
            }
            let pass = worst.as_ref().is_none_or(|w| w.pass);
            omega_ok &= pass;
            omega.push(json!({"n": t.n, "k": t.k, "samples": cfg.psd_samples, "worst": worst, "pass": pass}));
        }
        checks.insert("omega_psd".into(), json!({"tolerance": PSD_TOL, "terms": omega, "pass": omega_ok}));
        self.verdict("omega_psd", omega_ok);

        // ℓ_N is conditionally negative definite.
        let mut rng = SplitMix64::for_step(self.seed, "cnd-vectors");
        let mut cnd = Vec::new();
        let (mut exact, mut kernel, mut schoen) = (true, true, true);
        let mut vectors = 0;
        let samples = self.samples(ctx, "cnd-samples", cfg.samples);
        for sample in &samples {
            let rep = check_negative_definite_ell(ctx, sample, &cfg.t_grid, cfg.trials, &mut rng)?;
            vectors += rep.forms.len();
            exact &= rep.exact_pass;
            kernel &= rep.kernel.pass;
            schoen &= rep.schoenberg.iter().all(|s| s.pass);
            cnd.push(rep);
        }
        let max_form = cnd.iter().map(|r| r.max_form).fold(f64::NEG_INFINITY, f64::max);
        checks.insert(
            "cnd".into(),
            json!({
                "samples": cnd.len(),
                "vectors": vectors,
                "max_form": if cnd.is_empty() { 0.0 } else { max_form },
                "exact_pass": exact,
                "kernel_pass": kernel,
                "schoenberg_pass": schoen,
                "reports": cnd,
            }),
        );
        self.verdict("cnd_exact", exact);
        self.verdict("cnd_kernel", kernel);
        self.verdict("cnd_schoenberg", schoen);

        // Per-term decay.
        let p_max = cfg.p_max.min(ctx.table().radius());
        let mut rng = SplitMix64::for_step(self.seed, "lemma");
        let lemma = check_lemma_bounds(ctx, p_max, &mut rng)?;
        self.verdict("term_bounds", lemma.pass);
        checks.insert("term_bounds".into(), serde_json::to_value(&lemma)?);

        // Properness.
        let properness = properness_scan(ctx)?;
        let proper_ok = properness.pass && properness.horizon >= properness.radius;
        self.verdict("properness", proper_ok);
        checks.insert("properness".into(), serde_json::to_value(&properness)?);

        // Sublevel growth.
        let levels = LevelSets::compute(ctx)?;
        let points: Vec<SublevelPoint> = self.levels(ctx).iter().map(|&x| levels.point(x)).collect();
        let limit = ctx.params().gamma * (growth.fit.d_hat + 0.5);
        let (exponent, err) = match fit_sublevel_exponent(&points) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let sub_ok = exponent.is_some_and(|e| e <= limit);
        self.verdict("sublevel_growth", sub_ok);
        checks.insert(
            "sublevel_growth".into(),
            json!({"points": points, "exponent": exponent, "error": err, "limit": limit, "pass": sub_ok}),
        );

        // Combination over decreasing targets.
        if cfg.combine > 0 {
            let table = ctx.shared_table();
            let (parts, notes) = decreasing_target_contexts(&table, &growth.fit, cfg.combine, cfg.depth);
            let comb_value = if parts.is_empty() {
                json!({"contexts": [], "notes": notes, "pass": Value::Null})
            } else {
                let comb = Combination::new(parts.iter().map(|(m, c)| (*m, c)).collect())?;
                let sample = samples.first().cloned().unwrap_or_default();
                let g = table.group();
                let n = sample.len();
                let mut m = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in i..n {
                        let v = comb.eval(&g.left_quotient(&sample[i], &sample[j])?)?;
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                let diag: Vec<f64> = sample.iter().map(|s| comb.eval(s)).collect::<Result<_>>()?;
                let kernel: Vec<Vec<f64>> = (0..n)
                    .map(|i| (0..n).map(|j| diag[i] + diag[j] - m[i][j]).collect())
                    .collect();
                let rep = if n > 0 { Some(PsdReport::from_matrix(&kernel)?) } else { None };
                let pass = rep.as_ref().is_none_or(|r| r.pass);
                self.verdict("combined_cnd", pass);
                let contexts: Vec<Value> = parts
                    .iter()
                    .zip(comb.sigmas())
                    .map(|((m, c), s)| {
                        json!({"m": m, "params": c.params(), "terms": c.terms(), "sigma": s})
                    })
                    .collect();
                json!({"contexts": contexts, "notes": notes, "diagnostics": comb.diagnostics, "kernel": rep, "pass": pass})
            };
            checks.insert("combination".into(), comb_value);
        }

        let doc = json!({
            "seed": self.seed,
            "params": ctx.params(),
            "derived_params": growth.derived,
            "terms": ctx.terms(),
            "skipped": ctx.skipped(),
            "growth": {"fit": growth.fit, "certified": growth.certified, "density_ok": growth.density_ok},
            "checks": checks,
            "verdicts": self.outcome.verdicts,
        });
        self.write_json("verify.json", &doc)?;
        Ok(VerifySummary { properness })
    }

    fn spectral(&mut self, ctx: &LengthContext, fit: &GrowthFit) -> Result<SpectralReport> {
        let xs = self.levels(ctx);
        let rep = spectral_report(ctx, fit, &xs, &self.cfg.heat_t)?;
        let mut w = csv_writer(&self.path("spectral.csv"))?;
        w.write_record(["x", "count", "certified"])?;
        for p in &rep.counting {
            w.write_record([p.x.to_string(), p.count.to_string(), p.certified.to_string()])?;
        }
        w.flush()?;
        let limit = self
            .cfg
            .d_target
            .unwrap_or(ctx.params().gamma * fit.d_hat)
            + 0.5;
        let ok = rep.d_s_estimate.is_some_and(|d| d <= limit);
        self.verdict("spectral_dimension", ok);
        let doc = json!({"report": rep, "limit": limit, "pass": ok});
        self.write_json("spectral.json", &doc)?;
        Ok(rep)
    }

    fn summary(
        &mut self,
        ctx: &LengthContext,
        growth: &Growth,
        verify: Option<&VerifySummary>,
        spectral: Option<&SpectralReport>,
    ) -> Result<()> {
        let table = ctx.table();
        let g = table.group();
        let proper = verify.map(|v| &v.properness);
        let doc = json!({
            "group": {"name": g.spec().short_name(), "id": g.id(), "spec": g.spec(), "radius": table.radius()},
            "mu": table.sizes(),
            "d_hat": growth.fit.d_hat,
            "params": {
                "beta": ctx.params().beta,
                "gamma": ctx.params().gamma,
                "depth": ctx.params().depth,
                "d_target": ctx.params().d_target,
                "derived": growth.derived,
                "c": growth.fit.c,
                "d": growth.fit.d,
                "d_prime": growth.fit.d_prime,
                "terms": ctx.terms(),
                "skipped": ctx.skipped(),
            },
            "properness": proper,
            "verdicts": self.outcome.verdicts,
            "d_s_estimate": spectral.and_then(|s| s.d_s_estimate),
        });
        self.outcome.summary = Some(doc.clone());
        self.write_json("summary.json", &doc)
    }

    fn write_meta(&mut self, started: Instant, threads: Option<usize>) -> Result<()> {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let doc = json!({
            "finished_unix": now,
            "elapsed_ms": started.elapsed().as_millis() as u64,
            "threads": threads,
            "version": env!("CARGO_PKG_VERSION"),
        });
        let p = self.out.join("meta.json");
        fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z1_config() -> Config {
        Config::from_toml(
            "radius = 30\nd_target = 1.5\ndepth = 4\nsamples = 3\ntrials = 5\npsd_samples = 4\ncombine = 0\n\
             [group]\nkind = \"free_abelian\"\nrank = 1\n",
        )
        .unwrap()
    }

    #[test]
    fn growth_stage_files() {
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let out = run(&z1_config(), Stage::Growth, &opts).unwrap();
        assert!(out.passed());
        let balls = fs::read_to_string(dir.path().join("balls.csv")).unwrap();
        assert!(balls.starts_with("n,mu_n\n0,1\n1,3\n2,5\n"));
        let growth = fs::read_to_string(dir.path().join("growth.csv")).unwrap();
        assert!(growth.starts_with("n,mu_n,alpha_num,alpha_den,in_E,in_F\n1,3,0,1,false,false\n2,5,2,3,true,"));
    }

    #[test]
    fn horizon_error_is_actionable() {
        let mut cfg = z1_config();
        cfg.depth = 40;
        let dir = tempfile::tempdir().unwrap();
        let opts = RunOptions {
            out_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let e = run(&cfg, Stage::Construct, &opts).unwrap_err();
        assert!(e.to_string().contains("increase R to"), "{e}");
    }
}
