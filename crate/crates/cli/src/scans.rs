//! The `scan` suites. Each returns a table, the checks it asserts and the
//! fitted constants for the manifest.

use std::collections::BTreeMap;

use grushin::bounds::{plancherel_check, riesz_check, scaling_probe};
use grushin::config::RunConfig;
use grushin::geometry::{ball_volume, volume_model, weighted_decay_integral, CylPoint};
use grushin::kernels::{l1_operator_norm, MultiplierSpec};
use grushin::numeric::{sphere_area, spread};
use grushin::spectrum::Regime;
use grushin::verify::{growth_ratios, Check, BR_CENTERS};
use grushin::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::Table;

pub struct ScanOutcome {
    pub table: Table,
    pub checks: Vec<Check>,
    pub tolerances: BTreeMap<String, f64>,
    pub fitted: BTreeMap<String, f64>,
}

impl ScanOutcome {
    fn new(table: Table) -> Self {
        ScanOutcome {
            table,
            checks: vec![],
            tolerances: BTreeMap::new(),
            fitted: BTreeMap::new(),
        }
    }

    fn at_most(&mut self, label: &str, measured: f64, bound: f64) {
        self.tolerances.insert(label.into(), bound);
        self.checks.push(Check::at_most(label, measured, bound));
    }

    fn at_least(&mut self, label: &str, measured: f64, bound: f64) {
        self.tolerances.insert(label.into(), bound);
        self.checks.push(Check::at_least(label, measured, bound));
    }
}

fn meridian(cfg: &RunConfig, psi_norm: f64) -> Result<CylPoint> {
    let mut psi = vec![0.0; (cfg.d - cfg.k) as usize];
    psi[0] = psi_norm;
    CylPoint::on_meridian(cfg.k, psi)
}

/// Cluster sums over `i_range × x_norms` for every configured `α`.
pub fn cluster(cfg: &RunConfig, regime: Regime, x_norms: &[f64]) -> Result<ScanOutcome> {
    let is: Vec<u32> = (cfg.i_range.0.max(2)..=cfg.i_range.1).collect();
    let mut out = ScanOutcome::new(Table::new(&[
        "d", "k", "alpha", "i", "x_norm", "sum", "predicted", "ratio",
    ]));
    let alphas: Vec<f64> = if regime == Regime::Elliptic { vec![0.0] } else { cfg.alphas.clone() };
    for &alpha in &alphas {
        let scan = scaling_probe(cfg.d, cfg.k, alpha, regime, cfg.epsilon(), &is, x_norms)?;
        for r in &scan.rows {
            out.table.push(vec![
                json!(cfg.d),
                json!(cfg.k),
                json!(alpha),
                json!(r.i),
                json!(r.x_norm),
                json!(r.sum),
                json!(r.predicted),
                json!(r.ratio),
            ]);
        }
        if let Some(s) = scan.slope_at_zero() {
            out.fitted.insert(format!("slope_at_zero(alpha={alpha})"), s);
            out.at_most(
                &format!("slope_dev(alpha={alpha})"),
                (s - (cfg.d as f64 - 1.0)).abs(),
                0.15,
            );
        }
        let mid = is[is.len() / 2];
        if let Some(g) = scan.x_exponent(mid) {
            out.fitted.insert(format!("x_exponent(alpha={alpha}, i={mid})"), g);
        }
        out.fitted.insert(format!("ratio_spread(alpha={alpha})"), scan.ratio_spread());
    }
    Ok(out)
}

pub fn plancherel(cfg: &RunConfig, ns: &[u32], centers: &[f64]) -> Result<ScanOutcome> {
    let pts: Vec<CylPoint> = centers.iter().map(|&p| meridian(cfg, p)).collect::<Result<_>>()?;
    let family = |n: u32| MultiplierSpec::Indicator {
        lo: n as f64 / 4.0,
        hi: 3.0 * n as f64 / 4.0,
    };
    let mut out = ScanOutcome::new(Table::new(&[
        "alpha", "n", "psi_norm", "lhs", "volume", "volume_rel_err", "f_norm", "rhs", "ratio",
    ]));
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let mut ratios = vec![];
    for &alpha in &cfg.alphas {
        for r in plancherel_check(alpha, ns, family, &pts, &cfg.mc, seed)? {
            ratios.push(r.ratio);
            out.table.push(vec![
                json!(alpha),
                json!(r.n),
                json!(r.psi_norm),
                json!(r.lhs),
                json!(r.volume),
                json!(r.volume_rel_err),
                json!(r.f_norm),
                json!(r.rhs),
                json!(r.ratio),
            ]);
        }
    }
    out.at_most("ratio_spread", spread(&ratios), 10.0);
    Ok(out)
}

pub fn riesz(cfg: &RunConfig, ns: &[u32]) -> Result<ScanOutcome> {
    let mut out = ScanOutcome::new(Table::new(&["n", "seed", "ell_max", "ratio"]));
    let levels = [cfg.ell_max / 2.0, cfg.ell_max];
    for &n in ns {
        let mut maxima = [0.0f64; 2];
        for &seed in &cfg.seeds {
            for (slot, &ell) in levels.iter().enumerate() {
                let r = riesz_check(cfg.d, cfg.k, n, seed, ell)?;
                maxima[slot] = maxima[slot].max(r);
                out.table.push(vec![json!(n), json!(seed), json!(ell), json!(r)]);
            }
        }
        out.fitted.insert(format!("max_ratio(N={n}, ell_max={})", levels[1]), maxima[1]);
        out.at_most(&format!("rel_change(N={n})"), (maxima[1] / maxima[0] - 1.0).abs(), 0.2);
    }
    Ok(out)
}

fn radii() -> Vec<f64> {
    (1..=7).map(|j| 2f64.powi(-j)).collect()
}

pub fn volume(cfg: &RunConfig, psi_norms: &[f64]) -> Result<ScanOutcome> {
    let mut out = ScanOutcome::new(Table::new(&[
        "r", "psi_norm", "volume", "stderr", "model", "ratio",
    ]));
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let (mut ratios, mut worst) = (vec![], 0.0f64);
    for (n, (&p, r)) in psi_norms
        .iter()
        .flat_map(|p| radii().into_iter().map(move |r| (p, r)))
        .enumerate()
    {
        let v = ball_volume(&meridian(cfg, p)?, r, &cfg.mc, seed.wrapping_add(n as u64))?;
        let model = sphere_area(cfg.d) * volume_model(cfg.d, cfg.k, r, p);
        ratios.push(v.value / model);
        worst = worst.max(v.rel_err());
        out.table.push(vec![
            json!(r),
            json!(p),
            json!(v.value),
            json!(v.stderr),
            json!(model),
            json!(v.value / model),
        ]);
    }
    out.at_most("ratio_spread", spread(&ratios), 20.0);
    out.at_most("max_mc_rel_err", worst, 0.03);
    Ok(out)
}

pub fn weights(cfg: &RunConfig, psi_norms: &[f64], pairs: usize) -> Result<ScanOutcome> {
    let (d, k) = (cfg.d, cfg.k);
    let alpha = 0.5 * (d - k).min(k) as f64;
    let beta = (d + k + 1) as f64 - alpha + 0.5;
    let mut out = ScanOutcome::new(Table::new(&[
        "r", "psi_norm", "alpha", "beta", "integral", "volume", "ratio",
    ]));
    let seed = cfg.seeds.first().copied().unwrap_or(0);
    let mut ratios = vec![];
    for (n, (&p, r)) in psi_norms
        .iter()
        .flat_map(|p| radii().into_iter().map(move |r| (p, r)))
        .enumerate()
    {
        let c = meridian(cfg, p)?;
        let s = seed.wrapping_add(n as u64);
        let integral = weighted_decay_integral(&c, r, alpha, beta, &cfg.mc, s)?;
        let vol = ball_volume(&c, r, &cfg.mc, s ^ 0x5555)?;
        ratios.push(integral.value / vol.value);
        out.table.push(vec![
            json!(r),
            json!(p),
            json!(alpha),
            json!(beta),
            json!(integral.value),
            json!(vol.value),
            json!(integral.value / vol.value),
        ]);
    }
    out.at_most("integrability_ratio_spread", spread(&ratios), 20.0);
    let mut fit = ChaCha8Rng::seed_from_u64(seed);
    let mut held = ChaCha8Rng::seed_from_u64(seed ^ 0xdead_beef);
    let fitted = growth_ratios(&mut fit, pairs)?.into_iter().fold(0.0, f64::max);
    let held_out = growth_ratios(&mut held, pairs)?.into_iter().fold(0.0, f64::max);
    out.fitted.insert("growth_constant".into(), fitted);
    out.fitted.insert("growth_held_out_max".into(), held_out);
    out.at_most("held_out_growth_over_fitted", held_out / fitted, 1.5);
    Ok(out)
}

pub fn bochner_riesz(cfg: &RunConfig, lambdas: &[f64], deltas: &[f64]) -> Result<ScanOutcome> {
    let centers: Vec<CylPoint> = BR_CENTERS.iter().map(|&p| meridian(cfg, p)).collect::<Result<_>>()?;
    let mut out = ScanOutcome::new(Table::new(&["delta", "lambda_max", "psi_norm", "l1_norm"]));
    for &delta in deltas {
        let mut maxima = vec![];
        for &lm in lambdas {
            let f = MultiplierSpec::BochnerRiesz {
                t: 1.0 / (lm * lm),
                delta,
            };
            let (mx, per) = l1_operator_norm(&f, lm, &centers)?;
            for (c, v) in centers.iter().zip(per) {
                out.table.push(vec![json!(delta), json!(lm), json!(c.psi_norm()), json!(v)]);
            }
            maxima.push(mx);
        }
        let growth = maxima.last().copied().unwrap_or(f64::NAN) / maxima[0];
        out.fitted.insert(format!("growth(delta={delta})"), growth);
        if delta == 0.0 {
            out.at_least("growth_delta0", growth, 3.0);
        } else if delta >= 1.0 {
            out.at_most(&format!("variation(delta={delta})"), spread(&maxima), 2.0);
        }
    }
    Ok(out)
}
