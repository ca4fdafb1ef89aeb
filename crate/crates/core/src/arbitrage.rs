//! No-arbitrage pricing of call loans.
//!
//! A bank lends `d` to a broker at the call rate `R` against a client
//! portfolio worth `S_0`, funded at the risk-free rate `r`. Nobody checks
//! solvency before the term `T`, so at maturity the bank receives
//! `min(S_T, d e^{RT})`. That payoff is a covered call: long the collateral,
//! short `d` in cash, short a call struck at `K = d e^{RT}`. Setting its
//! risk-neutral value to zero gives
//!
//! ```text
//! d/S_0 = N(-d1) / (1 - N(d2) e^{rho T}),
//! -d1 = (ln(d/S_0) + (rho - sigma^2/2) T) / (sigma sqrt T),   d2 = d1 - sigma sqrt T,
//! ```
//!
//! which involves only the premium `rho = R - r`, the loan-to-value `d/S_0`,
//! the term and the collateral volatility. [`implied_ltv`] and
//! [`implied_term`] solve it for one unknown; [`hedge_delta`] is the bank's
//! net exposure `N(-d1)`; [`mc_zero_profit_check`] prices the payoff by
//! simulation as an independent check.
//!
//! Rates are continuously compounded, on the unit interval, per annum.

use alloc::vec::Vec;

use crate::error::{check_open, Error, Result};
use crate::normal::norm_cdf;
use crate::rng::NormalStream;

/// Regulation-T cap on retail loan-to-value.
pub const REG_T_MAX_LTV: f64 = 0.5;

/// The loan-to-value search runs over `[LTV_EPS, 1 - LTV_EPS]`.
pub const LTV_EPS: f64 = 1e-8;

/// Implied-term search interval, years.
pub const TERM_MIN: f64 = 1e-6;
pub const TERM_MAX: f64 = 50.0;

/// Grid points used to bracket sign changes before bisecting.
pub const SCAN_POINTS: usize = 2000;

/// Paths per Monte-Carlo block; block `i` draws from stream `i` of the seed.
pub const MC_BLOCK_SIZE: usize = 1 << 16;

fn d1(spot: f64, strike: f64, r: f64, sigma: f64, tau: f64) -> f64 {
    (libm::log(spot / strike) + (r + 0.5 * sigma * sigma) * tau) / (sigma * libm::sqrt(tau))
}

/// Black-Scholes value at time `t` of a European call on `s` struck at
/// `strike`, expiring at `maturity`.
pub fn bs_call(s: f64, t: f64, strike: f64, r: f64, sigma: f64, maturity: f64) -> Result<f64> {
    check_open("S", s, 0.0, f64::INFINITY, "positive")?;
    check_open("K", strike, 0.0, f64::INFINITY, "positive")?;
    check_open("sigma", sigma, 0.0, f64::INFINITY, "positive")?;
    check_open("r", r, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
    let tau = maturity - t;
    check_open("T - t", tau, 0.0, f64::INFINITY, "positive")?;
    let d1 = d1(s, strike, r, sigma, tau);
    let d2 = d1 - sigma * libm::sqrt(tau);
    Ok(s * norm_cdf(d1) - strike * libm::exp(-r * tau) * norm_cdf(d2))
}

/// Currency amounts needed for payoff work.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Collateral {
    /// Initial portfolio value.
    pub s0: f64,
    /// Call loan, `ltv * s0`.
    pub d: f64,
    /// Client's margin loan.
    pub big_d: f64,
    /// Rate the broker charges the client.
    pub margin_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CallLoanTerms {
    pub risk_free: f64,
    pub call_rate: f64,
    /// `d / S_0`.
    pub ltv: f64,
    /// Years.
    pub term: f64,
    pub sigma: f64,
    pub collateral: Option<Collateral>,
}

impl CallLoanTerms {
    pub fn from_call_rate(risk_free: f64, call_rate: f64, ltv: f64, term: f64, sigma: f64) -> Result<Self> {
        check_open("r", risk_free, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_open("call rate", call_rate, f64::NEG_INFINITY, f64::INFINITY, "finite")?;
        check_open("ltv", ltv, 0.0, 1.0, "inside (0, 1)")?;
        check_open("term", term, 0.0, f64::INFINITY, "positive")?;
        check_open("sigma", sigma, 0.0, f64::INFINITY, "positive")?;
        Ok(Self {
            risk_free,
            call_rate,
            ltv,
            term,
            sigma,
            collateral: None,
        })
    }

    pub fn from_risk_premium(risk_free: f64, premium: f64, ltv: f64, term: f64, sigma: f64) -> Result<Self> {
        Self::from_call_rate(risk_free, risk_free + premium, ltv, term, sigma)
    }

    /// Attaches currency amounts; `d = ltv * s0`. Requires `d < D < S_0`
    /// and a margin rate above the call rate.
    pub fn with_collateral(mut self, s0: f64, big_d: f64, margin_rate: f64) -> Result<Self> {
        check_open("S0", s0, 0.0, f64::INFINITY, "positive")?;
        let d = self.ltv * s0;
        check_open("D", big_d, d, s0, "between d and S0")?;
        check_open(
            "margin rate",
            margin_rate,
            self.call_rate,
            f64::INFINITY,
            "above the call rate",
        )?;
        self.collateral = Some(Collateral {
            s0,
            d,
            big_d,
            margin_rate,
        });
        Ok(self)
    }

    /// `rho = R - r`.
    pub fn premium(&self) -> f64 {
        self.call_rate - self.risk_free
    }

    pub fn initial_value(&self) -> f64 {
        self.collateral.map_or(1.0, |c| c.s0)
    }

    /// `d`, with `S_0 = 1` when no collateral is attached.
    pub fn loan_amount(&self) -> f64 {
        self.collateral.map_or(self.ltv, |c| c.d)
    }

    /// What the broker owes the bank at maturity, `K = d e^{RT}`.
    pub fn strike(&self) -> f64 {
        self.loan_amount() * libm::exp(self.call_rate * self.term)
    }

    pub fn exceeds_reg_t(&self) -> bool {
        self.ltv > REG_T_MAX_LTV
    }
}

/// Outcome for the call lender at maturity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CreditEvent {
    /// `S_T >= D e^{R_bar T}`.
    NoDefault,
    /// `d e^{RT} <= S_T < D e^{R_bar T}`: the client walks away, the broker pays.
    ClientDefaultsOnly,
    /// `S_T < d e^{RT}`: client and broker both default.
    CascadedDefault,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BankPayoff {
    /// `min(S_T, K) - d e^{rT}`.
    pub payoff: f64,
    /// Same quantity as `S_T - d e^{rT} - max(S_T - K, 0)`.
    pub covered_call_form: f64,
    pub event: CreditEvent,
}

pub fn bank_payoff(terms: &CallLoanTerms, s_t: f64) -> Result<BankPayoff> {
    let c = terms.collateral.ok_or(Error::MissingCollateral)?;
    if !(s_t >= 0.0 && s_t.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "S_T",
            value: s_t,
            constraint: "finite and non-negative",
        });
    }
    let k = terms.strike();
    let funding = c.d * libm::exp(terms.risk_free * terms.term);
    let client_debt = c.big_d * libm::exp(c.margin_rate * terms.term);
    let event = if s_t >= client_debt {
        CreditEvent::NoDefault
    } else if s_t >= k {
        CreditEvent::ClientDefaultsOnly
    } else {
        CreditEvent::CascadedDefault
    };
    Ok(BankPayoff {
        payoff: libm::fmin(s_t, k) - funding,
        covered_call_form: s_t - funding - libm::fmax(s_t - k, 0.0),
        event,
    })
}

/// `(ln x + (rho - sigma^2/2) T) / (sigma sqrt T)`, i.e. `-d1` at loan-to-value `x`.
fn minus_d1(ltv: f64, premium: f64, term: f64, sigma: f64) -> f64 {
    (libm::log(ltv) + (premium - 0.5 * sigma * sigma) * term) / (sigma * libm::sqrt(term))
}

/// Hedge ratio `N(-d1)` at inception for loan-to-value `ltv`.
pub fn hedge_ratio(ltv: f64, premium: f64, term: f64, sigma: f64) -> f64 {
    norm_cdf(minus_d1(ltv, premium, term, sigma))
}

/// Numerator and denominator of the characterization:
/// `(N(-d1), 1 - N(d2) e^{rho T})`.
fn characterization_parts(ltv: f64, premium: f64, term: f64, sigma: f64) -> (f64, f64) {
    let m = minus_d1(ltv, premium, term, sigma);
    let d2 = -m - sigma * libm::sqrt(term);
    (norm_cdf(m), 1.0 - norm_cdf(d2) * libm::exp(premium * term))
}

/// Zero-profit condition in pole-free form, `x (1 - N(d2) e^{rho T}) - N(-d1)`.
fn zero_profit_gap(ltv: f64, premium: f64, term: f64, sigma: f64) -> f64 {
    let (num, den) = characterization_parts(ltv, premium, term, sigma);
    ltv * den - num
}

/// `x - N(-d1) / (1 - N(d2) e^{rho T})`.
pub fn characterization_residual(ltv: f64, premium: f64, term: f64, sigma: f64) -> f64 {
    let (num, den) = characterization_parts(ltv, premium, term, sigma);
    ltv - num / den
}

/// Every root of `f` on `grid`, each located by bisection inside a bracket
/// where `f` changes sign.
fn scan_and_bisect(grid: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            roots.push(grid[i]);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, grid[i], grid[i + 1], fa));
        }
    }
    if values[grid.len() - 1] == 0.0 {
        roots.push(grid[grid.len() - 1]);
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_solver_inputs(premium: f64, sigma: f64) -> Result<()> {
    check_open(
        "risk premium",
        premium,
        0.0,
        f64::INFINITY,
        "positive (call rate above the risk-free rate)",
    )?;
    check_open("sigma", sigma, 0.0, f64::INFINITY, "positive")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ImpliedLtv {
    /// Smallest root.
    pub ltv: f64,
    /// `N(-d1)` at the root.
    pub delta: f64,
    /// [`characterization_residual`] at the root.
    pub residual: f64,
    /// All roots found, ascending. More than one means the answer is ambiguous.
    pub roots: Vec<f64>,
}

impl ImpliedLtv {
    pub fn has_multiple_roots(&self) -> bool {
        self.roots.len() > 1
    }

    pub fn exceeds_reg_t(&self) -> bool {
        self.ltv > REG_T_MAX_LTV
    }
}

/// Loan-to-value at which a call loan with premium `rho`, term `T` (years)
/// and collateral volatility `sigma` has zero risk-neutral value to the bank.
pub fn implied_ltv(premium: f64, term: f64, sigma: f64) -> Result<ImpliedLtv> {
    check_solver_inputs(premium, sigma)?;
    check_open("term", term, 0.0, f64::INFINITY, "positive")?;
    let span = 1.0 - 2.0 * LTV_EPS;
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| LTV_EPS + span * i as f64 / SCAN_POINTS as f64)
        .collect();
    let roots = scan_and_bisect(&grid, |x| zero_profit_gap(x, premium, term, sigma));
    let &ltv = roots.first().ok_or(Error::NoSolution("loan-to-value"))?;
    let (_, den) = characterization_parts(ltv, premium, term, sigma);
    if !(den > 0.0) {
        return Err(Error::NoSolution("loan-to-value"));
    }
    Ok(ImpliedLtv {
        ltv,
        delta: hedge_ratio(ltv, premium, term, sigma),
        residual: characterization_residual(ltv, premium, term, sigma),
        roots,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ImpliedTerm {
    /// Smallest root, years.
    pub term: f64,
    pub delta: f64,
    pub residual: f64,
    pub roots: Vec<f64>,
}

/// Loan term (years) that makes a loan at `ltv` with premium `rho` and
/// volatility `sigma` worth zero to the bank. Searched on `[1e-6, 50]`.
pub fn implied_term(premium: f64, ltv: f64, sigma: f64) -> Result<ImpliedTerm> {
    check_solver_inputs(premium, sigma)?;
    check_open("ltv", ltv, 0.0, 1.0, "inside (0, 1)")?;
    let (lmin, lmax) = (libm::log(TERM_MIN), libm::log(TERM_MAX));
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|i| match i {
            0 => TERM_MIN,
            SCAN_POINTS => TERM_MAX,
            _ => libm::exp(lmin + (lmax - lmin) * i as f64 / SCAN_POINTS as f64),
        })
        .collect();
    let roots = scan_and_bisect(&grid, |t| zero_profit_gap(ltv, premium, t, sigma));
    let &term = roots.first().ok_or(Error::NoSolution("loan term"))?;
    Ok(ImpliedTerm {
        term,
        delta: hedge_ratio(ltv, premium, term, sigma),
        residual: characterization_residual(ltv, premium, term, sigma),
        roots,
    })
}

/// Bank's net exposure to the collateral at `(S_t, t)`:
/// `d/dS [S - d e^{rt} - BSCall(S, t, K, r, sigma, T)] = N(-d1)` with the
/// strike `K = d e^{RT}` fixed at inception.
pub fn hedge_delta(terms: &CallLoanTerms, s_t: f64, t: f64) -> Result<f64> {
    check_open("S_t", s_t, 0.0, f64::INFINITY, "positive")?;
    let tau = terms.term - t;
    check_open("T - t", tau, 0.0, f64::INFINITY, "positive")?;
    Ok(1.0 - norm_cdf(d1(s_t, terms.strike(), terms.risk_free, terms.sigma, tau)))
}

/// Running sums for one block of Monte-Carlo paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McBlock {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct McEstimate {
    /// Mean discounted bank profit.
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
}

impl McEstimate {
    /// `|mean| < k * std_error`.
    pub fn within(&self, k: f64) -> bool {
        libm::fabs(self.mean) < k * self.std_error
    }
}

/// Discounted bank profit `e^{-rT} (min(S_T, K) - d e^{rT})` over `n` paths
/// of the risk-neutral GBM, shocks from stream `block` of `seed`.
pub fn mc_block(terms: &CallLoanTerms, block: u64, n: usize, seed: u64) -> McBlock {
    let (r, sigma, term) = (terms.risk_free, terms.sigma, terms.term);
    let s0 = terms.initial_value();
    let k = terms.strike();
    let funding = terms.loan_amount() * libm::exp(r * term);
    let discount = libm::exp(-r * term);
    let drift = (r - 0.5 * sigma * sigma) * term;
    let vol = sigma * libm::sqrt(term);
    let mut shocks = NormalStream::with_stream(seed, block);
    let mut acc = McBlock::default();
    for _ in 0..n {
        let s_t = s0 * libm::exp(drift + vol * shocks.next_normal());
        let pv = discount * (libm::fmin(s_t, k) - funding);
        acc.n += 1;
        acc.sum += pv;
        acc.sum_sq += pv * pv;
    }
    acc
}

/// Sizes of the blocks `mc_zero_profit_check` splits `n_paths` into.
pub fn mc_block_sizes(n_paths: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..n_paths.div_ceil(MC_BLOCK_SIZE)).map(move |i| (i as u64, MC_BLOCK_SIZE.min(n_paths - i * MC_BLOCK_SIZE)))
}

/// Folds blocks in the order given.
pub fn combine_blocks(blocks: impl IntoIterator<Item = McBlock>) -> McEstimate {
    let total = blocks.into_iter().fold(McBlock::default(), |a, b| McBlock {
        n: a.n + b.n,
        sum: a.sum + b.sum,
        sum_sq: a.sum_sq + b.sum_sq,
    });
    let n = total.n as f64;
    let mean = total.sum / n;
    let var = (total.sum_sq / n - mean * mean) * n / (n - 1.0);
    McEstimate {
        mean,
        std_error: libm::sqrt(libm::fmax(var, 0.0) / n),
        n_paths: total.n,
    }
}

/// Risk-neutral Monte-Carlo value of the bank's position. At a loan-to-value
/// solving the characterization the mean should be within a few standard
/// errors of zero. Blocks of [`MC_BLOCK_SIZE`] paths are reduced in index
/// order, so any parallel driver that preserves the order reproduces this
/// result exactly.
pub fn mc_zero_profit_check(terms: &CallLoanTerms, n_paths: usize, seed: u64) -> Result<McEstimate> {
    if n_paths < 2 {
        return Err(Error::InvalidParameter {
            name: "n_paths",
            value: n_paths as f64,
            constraint: "at least 2",
        });
    }
    Ok(combine_blocks(
        mc_block_sizes(n_paths).map(|(b, n)| mc_block(terms, b, n, seed)),
    ))
}
