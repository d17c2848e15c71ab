//! Convergence-rate bounds checked on synthetic quadratics, and the
//! worst-case function of the optimized gradient method.

use std::fmt;
use std::str::FromStr;

use anyhow::anyhow;
use ffmin_core::linesearch::LineSearch;
use ffmin_core::optimizers::{
    cg, gradient_descent_fixed, ofgm, ofgm_schedule, CgConfig, CgVariant, GradientTolerance,
    Minimization, OfgmStep, StopCriteria,
};
use ffmin_core::oracle::Oracle;
use ffmin_core::synthetic::{QuadraticInstance, Spectrum, WorstCaseFunction};

use crate::exit::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMethod {
    Gd,
    Cg,
    Ofgm,
}

impl BenchMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BenchMethod::Gd => "gd",
            BenchMethod::Cg => "cg",
            BenchMethod::Ofgm => "ofgm",
        }
    }
}

impl FromStr for BenchMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gd" => Ok(BenchMethod::Gd),
            "cg" => Ok(BenchMethod::Cg),
            "ofgm" => Ok(BenchMethod::Ofgm),
            _ => Err(format!("unknown bench method '{s}' (expected gd|cg|ofgm)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Uniform,
    Geometric,
}

impl FromStr for SpectrumKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(SpectrumKind::Uniform),
            "geometric" => Ok(SpectrumKind::Geometric),
            _ => Err(format!(
                "unknown spectrum '{s}' (expected uniform|geometric)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub n: usize,
    pub spectrum: SpectrumKind,
    pub mu: f64,
    pub l: f64,
    pub seeds: Vec<u64>,
    /// GD and CG are checked at every `N` up to the largest horizon; OFGM
    /// runs once per horizon.
    pub horizons: Vec<usize>,
    pub methods: Vec<BenchMethod>,
    pub cg_variant: CgVariant,
    /// Multiplicative allowance on every bound.
    pub slack: f64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            n: 50,
            spectrum: SpectrumKind::Uniform,
            mu: 1e-3,
            l: 1.0,
            seeds: (0..20).collect(),
            horizons: vec![8, 16, 32, 64, 100, 200],
            methods: vec![BenchMethod::Gd, BenchMethod::Cg, BenchMethod::Ofgm],
            cg_variant: CgVariant::PolakRibierePolyak,
            slack: 1.05,
        }
    }
}

/// `(L R^2 / 2) min(1/N, exp(-N/chi))`.
pub fn gd_bound(l: f64, r: f64, chi: f64, n: usize) -> f64 {
    let n = n as f64;
    0.5 * l * r * r * (1.0 / n).min((-n / chi).exp())
}

/// `L R^2 / (2 (2N + 1)^2)`, valid for `N <= n`.
pub fn cg_bound(l: f64, r: f64, n: usize) -> f64 {
    let m = 2.0 * n as f64 + 1.0;
    l * r * r / (2.0 * m * m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub method: BenchMethod,
    pub seed: u64,
    pub iterations: usize,
    pub gap: f64,
    pub bound: f64,
    pub pass: bool,
}

impl BoundRow {
    pub fn ratio(&self) -> f64 {
        self.gap / self.bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub options: BenchOptions,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn worst(&self, method: BenchMethod) -> Option<&BoundRow> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .max_by(|a, b| a.ratio().total_cmp(&b.ratio()))
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = &self.options;
        writeln!(
            f,
            "n={} spectrum={:?} mu={} L={} seeds={} slack={}",
            o.n,
            o.spectrum,
            o.mu,
            o.l,
            o.seeds.len(),
            o.slack
        )?;
        writeln!(f, "method,seed,N,gap,bound,ratio,pass")?;
        for r in &self.rows {
            writeln!(
                f,
                "{},{},{},{:.6e},{:.6e},{:.4},{}",
                r.method.as_str(),
                r.seed,
                r.iterations,
                r.gap,
                r.bound,
                r.ratio(),
                r.pass
            )?;
        }
        for m in &o.methods {
            if let Some(w) = self.worst(*m) {
                writeln!(
                    f,
                    "# worst {}: ratio {:.4} at seed {} N {}",
                    m.as_str(),
                    w.ratio(),
                    w.seed,
                    w.iterations
                )?;
            }
        }
        write!(f, "# all bounds hold: {}", self.all_pass())
    }
}

fn exhaustive(max_iterations: usize) -> StopCriteria {
    StopCriteria::iterations(max_iterations).with_gradient_tol(GradientTolerance::Absolute(0.0))
}

fn runtime(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Runtime(e.into())
}

pub fn bench_quadratic(options: &BenchOptions) -> Result<BoundReport, CliError> {
    if options.n == 0 || options.horizons.is_empty() || options.horizons.contains(&0) {
        return Err(CliError::input("need n >= 1 and positive horizons"));
    }
    if !(options.l > 0.0 && options.mu >= 0.0 && options.mu <= options.l) {
        return Err(CliError::input(format!(
            "need 0 <= mu <= L, got mu={} L={}",
            options.mu, options.l
        )));
    }
    let max_n = *options.horizons.iter().max().unwrap();
    let mut rows = Vec::new();
    for &seed in &options.seeds {
        let spectrum = match options.spectrum {
            SpectrumKind::Uniform => Spectrum::Uniform {
                mu: options.mu,
                l: options.l,
            },
            SpectrumKind::Geometric => Spectrum::Geometric {
                mu: options.mu,
                l: options.l,
            },
        };
        let q = QuadraticInstance::random(options.n, spectrum, seed);
        let (l, r) = (q.l(), q.r);
        let mut push = |method, iterations, gap: f64, bound: f64| {
            rows.push(BoundRow {
                method,
                seed,
                iterations,
                gap,
                bound,
                pass: gap <= bound * options.slack,
            })
        };
        for &method in &options.methods {
            match method {
                BenchMethod::Gd => {
                    let oracle = Oracle::new(&q);
                    let res = gradient_descent_fixed(&oracle, &q.x0, l, &exhaustive(max_n))
                        .map_err(runtime)?;
                    for rec in res.trace.records.iter().filter(|r| r.iteration >= 1) {
                        push(
                            method,
                            rec.iteration,
                            rec.f - q.f_star,
                            gd_bound(l, r, q.chi, rec.iteration),
                        );
                    }
                }
                BenchMethod::Cg => {
                    let oracle = Oracle::new(&q);
                    let config = CgConfig {
                        variant: options.cg_variant,
                        restart: options.n.max(1) + 1,
                    };
                    let cap = max_n.min(options.n);
                    let res: Minimization<f64> =
                        cg(&oracle, &q.x0, config, LineSearch::Exact, &exhaustive(cap))
                            .map_err(runtime)?;
                    for rec in res.trace.records.iter().filter(|r| r.iteration >= 1) {
                        push(
                            method,
                            rec.iteration,
                            rec.f - q.f_star,
                            cg_bound(l, r, rec.iteration),
                        );
                    }
                }
                BenchMethod::Ofgm => {
                    for &n in &options.horizons {
                        let oracle = Oracle::new(&q);
                        let res = ofgm(&oracle, &q.x0, OfgmStep::FixedL(l), n, &exhaustive(n))
                            .map_err(runtime)?;
                        push(method, n, res.f - q.f_star, ofgm_schedule(n).bound(l, r));
                    }
                }
            }
        }
    }
    Ok(BoundReport {
        options: options.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseReport {
    pub n: usize,
    pub horizon: usize,
    pub l: f64,
    pub r: f64,
    pub theta_n: f64,
    pub gap: f64,
    /// `2 L R^2 / theta_N^2`.
    pub bound: f64,
}

impl WorstCaseReport {
    pub fn ratio(&self) -> f64 {
        self.gap / self.bound
    }

    /// Gap over `L R^2 / (2 theta_N^2)`.
    pub fn ratio_to_quarter_bound(&self) -> f64 {
        self.gap / (0.25 * self.bound)
    }
}

impl fmt::Display for WorstCaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "n={} N={} L={} R={} theta_N={:.10}",
            self.n, self.horizon, self.l, self.r, self.theta_n
        )?;
        writeln!(f, "gap                      {:.10e}", self.gap)?;
        writeln!(f, "bound 2LR^2/theta_N^2    {:.10e}", self.bound)?;
        writeln!(f, "gap / bound              {:.6}", self.ratio())?;
        write!(
            f,
            "gap / (LR^2/(2theta_N^2)) {:.6}",
            self.ratio_to_quarter_bound()
        )
    }
}

pub fn worstcase(n: usize, horizon: usize, l: f64, r: f64) -> Result<WorstCaseReport, CliError> {
    if n == 0 || horizon == 0 || !(l > 0.0) || !(r > 0.0) {
        return Err(CliError::Input(anyhow!("need n, N, L, R positive")));
    }
    let w = WorstCaseFunction::new(n, l, r, horizon);
    let oracle = Oracle::new(&w);
    let res = ofgm(
        &oracle,
        &w.start_point(),
        OfgmStep::FixedL(l),
        horizon,
        &exhaustive(horizon),
    )
    .map_err(runtime)?;
    Ok(WorstCaseReport {
        n,
        horizon,
        l,
        r,
        theta_n: w.theta_n,
        gap: res.f,
        bound: ofgm_schedule(horizon).bound(l, r),
    })
}
