//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Set CALLRATE_HISTORICAL_CSV to a monthly `YYYY-MM,percent` file of the
//! nominal call rate to also run the conditional half of criterion 4.

use std::process::{Command, ExitCode};
use std::time::Instant;

use callrate::csv_io::load_csv;
use callrate::parallel::mc_zero_profit_check_par;
use callrate_core::arbitrage::{bs_call, hedge_delta, implied_ltv, implied_term, CallLoanTerms};
use callrate_core::autoregress::{forecast_ar1, forecast_ar2, impulse_response, Ar1Fit, Ar2Fit, CharacteristicRoots};
use callrate_core::margin::{
    derive_leverage_sde, derive_margin_sde, kelly_bet, monopoly_margin_rate, MarketIndexParams,
};
use callrate_core::ou::{calibrate_from_ar1, simulate_ou};
use callrate_core::series::Units;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn reference_ar1() -> Ar1Fit {
    Ar1Fit::from_mean_form(3.943, 0.597, 2.362).unwrap()
}

fn reference_ar2() -> Ar2Fit {
    Ar2Fit::from_coefficients(1.215, 0.456, 0.235, 2.297).unwrap()
}

/// Collects failed checks; `Ok` carries a one-line summary of the values.
struct Checks {
    shown: Vec<String>,
    failed: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            shown: Vec::new(),
            failed: Vec::new(),
        }
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.shown.push(format!("{what}={got:.6}"));
        if (got - want).abs() > tol || got.is_nan() {
            self.failed.push(format!("{what}={got} not within {tol} of {want}"));
        }
    }

    fn holds(&mut self, what: &str, ok: bool, detail: String) {
        self.shown.push(format!("{what}: {detail}"));
        if !ok {
            self.failed.push(format!("{what} failed: {detail}"));
        }
    }

    fn finish(self) -> Outcome {
        if self.failed.is_empty() {
            Ok(self.shown.join(", "))
        } else {
            Err(self.failed.join("; "))
        }
    }
}

fn c1_calibration() -> Outcome {
    let mut c = Checks::new();
    let p = calibrate_from_ar1(&reference_ar1()).map_err(|e| e.to_string())?;
    c.near("theta_bar", p.theta_bar, 0.516, 0.001);
    c.near("sigma_bar", p.sigma_bar, 2.99, 0.01);
    c.near("stationary_std", p.stationary_std(), 2.944, 0.005);
    c.finish()
}

fn c2_forecast() -> Outcome {
    let mut c = Checks::new();
    let f = reference_ar1();
    c.near("E[y1|4.25]", forecast_ar1(&f, 4.25, 1).unwrap()[0].point, 4.13, 0.01);
    c.near("E[y12|3.5]", forecast_ar1(&f, 3.5, 12).unwrap()[11].point, 3.94, 0.01);
    // The band formula with the fit's own s and rho^2 (printed as 2.944 and 0.356).
    let (s, r2) = (f.s(), f.rho * f.rho);
    let fc = forecast_ar1(&f, 4.25, 120).unwrap();
    let exact = fc
        .iter()
        .map(|x| (x.rmse - s * (1.0 - r2.powi(x.horizon as i32)).sqrt()).abs())
        .fold(0.0, f64::max);
    c.holds(
        "rmse band vs s*sqrt(1-rho^(2t))",
        exact < 1e-6,
        format!("max dev {exact:.1e}"),
    );
    let printed = fc
        .iter()
        .map(|x| (x.rmse - 2.944 * (1.0 - 0.356f64.powi(x.horizon as i32)).sqrt()).abs())
        .fold(0.0, f64::max);
    c.holds(
        "vs rounded 2.944*sqrt(1-0.356^t)",
        printed < 1e-3,
        format!("max dev {printed:.1e}"),
    );
    c.finish()
}

fn c3_ar2() -> Outcome {
    let mut c = Checks::new();
    let f = reference_ar2();
    match f.roots() {
        CharacteristicRoots::Real { first, second } => {
            c.near("lambda1", first, 0.764, 0.001);
            c.near("lambda2", second, -0.308, 0.001);
        }
        other => return Err(format!("expected real roots, got {other:?}")),
    }
    let ir = impulse_response(&f, 12).unwrap();
    c.near("impulse t=6 (bp)", ir[6].1, 14.0, 1.0);
    c.near("impulse t=12 (bp)", ir[12].1, 3.0, 1.0);
    let fc = forecast_ar2(&f, 4.25, 4.25, 60).map_err(|e| e.to_string())?;
    let (mut prev, mut last, mut worst) = (4.25, 4.25, 0.0f64);
    for x in &fc {
        let next = f.c + f.phi1 * last + f.phi2 * prev;
        worst = worst.max((x.point - next).abs());
        (prev, last) = (last, next);
    }
    c.holds(
        "closed form vs recursion h=1..60",
        worst < 1e-9,
        format!("max dev {worst:.1e}"),
    );
    c.finish()
}

fn simulate_ar(c0: f64, phi1: f64, phi2: f64, sigma: f64, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mu = c0 / (1.0 - phi1 - phi2);
    let (mut prev, mut last) = (mu, mu);
    let mut out = Vec::with_capacity(n);
    for i in 0..n + 300 {
        let z: f64 = rng.sample(StandardNormal);
        let next = c0 + phi1 * last + phi2 * prev + sigma * z;
        (prev, last) = (last, next);
        if i >= 300 {
            out.push(next);
        }
    }
    out
}

fn coverage(hits: &[usize], n: usize) -> Vec<f64> {
    hits.iter().map(|h| *h as f64 / n as f64).collect()
}

fn c4_recovery() -> Outcome {
    let mut c = Checks::new();
    let (reps, len) = (500, 1367);
    let a1 = reference_ar1();
    let a2 = reference_ar2();
    let mut hits1 = [0usize; 2];
    let mut hits2 = [0usize; 3];
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(10_000 + rep as u64);
        let y = simulate_ar(a1.alpha, a1.rho, 0.0, a1.sigma, len, &mut rng);
        let f = Ar1Fit::estimate(&y).map_err(|e| e.to_string())?;
        let st = f.stats.as_ref().unwrap();
        for (i, (est, truth)) in [(f.alpha, a1.alpha), (f.rho, a1.rho)].into_iter().enumerate() {
            let (lo, hi) = st.conf_interval(i, est);
            hits1[i] += usize::from(lo <= truth && truth <= hi);
        }
        let y = simulate_ar(a2.c, a2.phi1, a2.phi2, a2.sigma, len, &mut rng);
        let f = Ar2Fit::estimate(&y).map_err(|e| e.to_string())?;
        let st = f.stats.as_ref().unwrap();
        for (i, (est, truth)) in [(f.c, a2.c), (f.phi1, a2.phi1), (f.phi2, a2.phi2)]
            .into_iter()
            .enumerate()
        {
            let (lo, hi) = st.conf_interval(i, est);
            hits2[i] += usize::from(lo <= truth && truth <= hi);
        }
    }
    let cov: Vec<f64> = coverage(&hits1, reps)
        .into_iter()
        .chain(coverage(&hits2, reps))
        .collect();
    let ok = cov.iter().all(|x| (0.90..=0.99).contains(x));
    c.holds(
        "95% CI coverage (alpha, rho | c, phi1, phi2)",
        ok,
        cov.iter()
            .map(|x| format!("{:.1}%", 100.0 * x))
            .collect::<Vec<_>>()
            .join(" "),
    );

    match std::env::var_os("CALLRATE_HISTORICAL_CSV") {
        None => c
            .shown
            .push("historical half not evaluated (CALLRATE_HISTORICAL_CSV unset)".into()),
        Some(path) => {
            let series = load_csv(path.as_ref(), Units::NominalPercent)
                .map_err(|e| e.to_string())?
                .to_continuous()
                .map_err(|e| e.to_string())?;
            let f = callrate_core::autoregress::fit_ar1(&series).map_err(|e| e.to_string())?;
            c.near("hist alpha", f.alpha, 1.587, 0.02);
            c.near("hist rho", f.rho, 0.597, 0.005);
            c.near("hist sigma", f.sigma, 2.362, 0.02);
            c.near("hist R2", f.stats.as_ref().unwrap().r_squared, 0.36, 0.02);
            let g = callrate_core::autoregress::fit_ar2(&series).map_err(|e| e.to_string())?;
            c.near("hist c", g.c, 1.215, 0.02);
            c.near("hist phi1", g.phi1, 0.456, 0.005);
            c.near("hist phi2", g.phi2, 0.235, 0.005);
            c.near("hist sigma2", g.sigma, 2.297, 0.02);
            c.near("hist R2 (AR2)", g.stats.as_ref().unwrap().r_squared, 0.39, 0.02);
        }
    }
    c.finish()
}

fn c5_margin() -> Outcome {
    let mut c = Checks::new();
    let ou = calibrate_from_ar1(&reference_ar1()).unwrap();
    let m = MarketIndexParams::new(0.09, 0.15).unwrap();
    let margin = derive_margin_sde(&ou, &m);
    c.near("margin theta", margin.theta, 0.516, 0.0005);
    c.near("margin mean", margin.long_run_mean, 0.05909, 0.0005);
    c.near("margin diffusion", margin.diffusion, 0.01495, 0.0005);
    let lev = derive_leverage_sde(&ou, &m);
    c.near("|leverage diffusion|", lev.diffusion.abs(), 0.6644, 0.0005);
    c.near("leverage stationary std", lev.stationary_std(), 0.654, 0.001);
    let direct = kelly_bet(monopoly_margin_rate(ou.mu_bar / 100.0, &m).unwrap(), &m)
        .unwrap()
        .b;
    let gap = (lev.long_run_mean - direct).abs();
    c.holds(
        "long-run leverage = kelly(monopoly(mu_bar))",
        gap < 1e-12,
        format!("|diff| {gap:.1e}"),
    );
    c.finish()
}

const R: f64 = 0.02088;
const CALL: f64 = 0.0425;
const TERM: f64 = 90.0 / 365.0;
const SIGMA: f64 = 0.40;

fn c6_solvers() -> Outcome {
    let mut c = Checks::new();
    let l = implied_ltv(CALL - R, TERM, SIGMA).map_err(|e| e.to_string())?;
    c.near("implied ltv", l.ltv, 0.723, 0.005);
    c.near("delta", l.delta, 0.044, 0.005);
    c.holds("ltv residual", l.residual.abs() < 1e-10, format!("{:.1e}", l.residual));
    let t = implied_term(CALL - R, 0.50, SIGMA).map_err(|e| e.to_string())?;
    c.near("implied term", t.term, 1.75, 0.05);
    c.near("delta", t.delta, 0.066, 0.005);
    c.holds("term residual", t.residual.abs() < 1e-10, format!("{:.1e}", t.residual));
    c.finish()
}

fn c7_martingale() -> Outcome {
    let mut c = Checks::new();
    let l = implied_ltv(CALL - R, TERM, SIGMA).map_err(|e| e.to_string())?;
    let fair = CallLoanTerms::from_call_rate(R, CALL, l.ltv, TERM, SIGMA).unwrap();
    let est = mc_zero_profit_check_par(&fair, 1_000_000, 2024).map_err(|e| e.to_string())?;
    c.holds(
        "solved ltv: |mean| < 3 se",
        est.within(3.0),
        format!("mean {:.2e}, se {:.2e}", est.mean, est.std_error),
    );
    let safer = CallLoanTerms::from_call_rate(R, CALL, l.ltv - 0.12, TERM, SIGMA).unwrap();
    let est = mc_zero_profit_check_par(&safer, 1_000_000, 2024).map_err(|e| e.to_string())?;
    c.holds(
        "ltv - 0.12: mean > 3 se",
        est.mean > 3.0 * est.std_error,
        format!("mean {:.2e}, se {:.2e}", est.mean, est.std_error),
    );
    c.finish()
}

fn c8_simulation() -> Outcome {
    let mut c = Checks::new();
    let ou = calibrate_from_ar1(&reference_ar1()).unwrap();
    let n = 10_000;
    let ends: Vec<f64> = (0..n)
        .map(|s| simulate_ou(&ou, 4.25, 1.0 / 30.0, 30, s).unwrap().values[30])
        .collect();
    let mean = ends.iter().sum::<f64>() / n as f64;
    let sd = (ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
    let (want_mean, want_sd) = ou.forecast(4.25, 1.0).unwrap();
    let se_mean = want_sd / (n as f64).sqrt();
    let se_sd = want_sd / (2.0 * (n as f64 - 1.0)).sqrt();
    c.holds(
        "1-month mean within 2 se",
        (mean - want_mean).abs() < 2.0 * se_mean,
        format!("{mean:.5} vs {want_mean:.5} (se {se_mean:.4})"),
    );
    c.holds(
        "1-month std within 2 se",
        (sd - want_sd).abs() < 2.0 * se_sd,
        format!("{sd:.4} vs {want_sd:.4} (se {se_sd:.4})"),
    );
    let path = simulate_ou(&ou, ou.mu_bar, 1.0, 1_000_000, 42).unwrap();
    let m = path.values.iter().sum::<f64>() / path.values.len() as f64;
    let v = path.values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (path.values.len() as f64 - 1.0);
    c.near("ergodic std (10^6 steps)", v.sqrt(), 2.944, 0.05);
    c.finish()
}

fn position_value(terms: &CallLoanTerms, s: f64, t: f64) -> f64 {
    s - terms.loan_amount() * (terms.risk_free * t).exp()
        - bs_call(s, t, terms.strike(), terms.risk_free, terms.sigma, terms.term).unwrap()
}

fn c9_hedge_delta() -> Outcome {
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let r = rng.random_range(-0.01..0.08);
        let call = r + rng.random_range(0.001..0.05);
        let terms = CallLoanTerms::from_call_rate(
            r,
            call,
            rng.random_range(0.05..0.95),
            rng.random_range(0.05..3.0),
            rng.random_range(0.05..0.8),
        )
        .unwrap();
        let t = rng.random_range(0.0..0.9) * terms.term;
        let s = rng.random_range(0.3..2.0);
        let h = 1e-5 * s;
        let fd = (position_value(&terms, s + h, t) - position_value(&terms, s - h, t)) / (2.0 * h);
        worst = worst.max((fd - hedge_delta(&terms, s, t).unwrap()).abs());
    }
    c.holds(
        "max |delta - central FD| over 100 draws",
        worst < 1e-6,
        format!("{worst:.1e}"),
    );
    c.finish()
}

fn c10_determinism() -> Outcome {
    let mut c = Checks::new();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs: [&[&str]; 3] = [
        &[
            "simulate", "ou", "--paths", "8", "--steps", "240", "--step", "0.5", "--seed", "7",
        ],
        &["simulate", "leverage", "--paths", "4", "--steps", "120", "--per-year"],
        &["simulate", "--euler", "--paths", "3", "--format", "json"],
    ];
    for (k, args) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("cfg{k}_run{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_callrate"))
                .args(*args)
                .arg("--output")
                .arg(&out)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("config {k} exited with {status}"));
            }
            outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        c.holds(
            &format!("config {k} byte-identical"),
            outputs[0] == outputs[1] && !outputs[0].is_empty(),
            format!("{} bytes", outputs[0].len()),
        );
    }
    c.finish()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form calibration chain", c1_calibration),
        ("forecast reproduction", c2_forecast),
        ("AR(2) machinery", c3_ar2),
        ("parameter recovery", c4_recovery),
        ("margin-pricing chain", c5_margin),
        ("arbitrage solvers", c6_solvers),
        ("martingale oracle", c7_martingale),
        ("simulation statistics", c8_simulation),
        ("hedge-delta derivative check", c9_hedge_delta),
        ("determinism", c10_determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name} ({ms} ms): {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{:>2}] {name} ({ms} ms): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
