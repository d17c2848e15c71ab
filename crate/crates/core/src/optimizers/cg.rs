//! Nonlinear conjugate gradients with periodic and safeguard restarts.

use std::fmt;
use std::str::FromStr;

use super::{
    normalized, run_search, start_point, Driver, Minimization, OptimizerError, Status, StopCriteria,
};
use crate::linesearch::{LineSearch, LineSearcher};
use crate::oracle::Oracle;
use crate::real::{dot, norm, offset, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgVariant {
    FletcherReeves,
    PolakRibierePolyak,
    PolakRibierePlus,
    HestenesStiefel,
    ConjugateDescent,
    LiuStorey,
    DaiYuan,
}

impl CgVariant {
    pub const ALL: [CgVariant; 7] = [
        CgVariant::FletcherReeves,
        CgVariant::PolakRibierePolyak,
        CgVariant::PolakRibierePlus,
        CgVariant::HestenesStiefel,
        CgVariant::ConjugateDescent,
        CgVariant::LiuStorey,
        CgVariant::DaiYuan,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CgVariant::FletcherReeves => "fr",
            CgVariant::PolakRibierePolyak => "prp",
            CgVariant::PolakRibierePlus => "prp+",
            CgVariant::HestenesStiefel => "hs",
            CgVariant::ConjugateDescent => "cd",
            CgVariant::LiuStorey => "ls",
            CgVariant::DaiYuan => "dy",
        }
    }

    /// Coefficient for `r_new = -g_new + beta r`, where `r` is the previous
    /// (unnormalized) direction and `y = g_new - g`.
    fn beta<T: Real>(&self, g_new: &[T], g: &[T], r: &[T], y: &[T]) -> T {
        let gg_new = || dot(g_new, g_new);
        let gg = || dot(g, g);
        let g_new_y = || dot(g_new, y);
        let r_y = || dot(r, y);
        let minus_r_g = || -dot(r, g);
        match self {
            CgVariant::FletcherReeves => gg_new() / gg(),
            CgVariant::PolakRibierePolyak => g_new_y() / gg(),
            CgVariant::PolakRibierePlus => (g_new_y() / gg()).max(T::zero()),
            CgVariant::HestenesStiefel => g_new_y() / r_y(),
            CgVariant::ConjugateDescent => gg_new() / minus_r_g(),
            CgVariant::LiuStorey => g_new_y() / minus_r_g(),
            CgVariant::DaiYuan => gg_new() / r_y(),
        }
    }
}

impl fmt::Display for CgVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CgVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CgVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown CG variant '{s}' (expected fr|prp|prp+|hs|cd|ls|dy)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CgConfig {
    pub variant: CgVariant,
    /// Restart to the antigradient every this many iterations.
    pub restart: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            variant: CgVariant::PolakRibierePolyak,
            restart: 100,
        }
    }
}

pub fn cg<T: Real>(
    oracle: &Oracle<'_, T>,
    x0: &[T],
    config: CgConfig,
    linesearch: LineSearch,
    stop: &StopCriteria,
) -> Result<Minimization<T>, OptimizerError> {
    if config.restart == 0 {
        return Err(OptimizerError::Config(
            "restart period must be at least 1".into(),
        ));
    }
    let mut searcher = LineSearcher::new(linesearch)?;
    let (mut f, mut g) = start_point(oracle, x0)?;
    let desc = format!(
        "variant={} restart={} {}",
        config.variant,
        config.restart,
        linesearch.describe()
    );
    let mut driver = Driver::new(oracle, stop, "cg", desc, x0, f, norm(&g));
    let mut x = x0.to_vec();
    let mut r: Vec<T> = g.iter().map(|&v| -v).collect();
    let mut since_restart = 0;
    let mut failed_last = false;
    let mut k = 0;
    loop {
        let gnorm = norm(&g);
        if let Some(status) = driver.check(k, gnorm) {
            return Ok(driver.finish(status, None));
        }
        let Some(rt) = normalized(&r) else {
            return Ok(driver.finish(Status::Converged, None));
        };
        let res = match run_search(&mut searcher, oracle, &x, &rt, f, &g)? {
            Ok(res) => res,
            Err(e) => return Ok(driver.fail(e)),
        };
        if !res.is_found() {
            if failed_last {
                k += 1;
                driver.record(k, f, gnorm, T::zero(), None);
                if driver.stop_on_linesearch_failure() {
                    return Ok(driver.finish(Status::LinesearchFailure, None));
                }
            }
            failed_last = true;
            r = g.iter().map(|&v| -v).collect();
            since_restart = 0;
            continue;
        }
        failed_last = false;
        let x_new = offset(&x, res.step, &rt);
        let g_new = match oracle.gradient(&x_new) {
            Ok(g) => g,
            Err(e) => return Ok(driver.fail(e)),
        };
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        since_restart += 1;
        let mut beta = None;
        if since_restart < config.restart {
            let b = config.variant.beta(&g_new, &g, &r, &y);
            if b.is_finite() {
                let candidate: Vec<T> = g_new
                    .iter()
                    .zip(&r)
                    .map(|(&gi, &ri)| -gi + b * ri)
                    .collect();
                // keep only descent directions
                if -dot(&candidate, &g_new) > T::zero() {
                    r = candidate;
                    beta = Some(b);
                }
            }
        }
        if beta.is_none() {
            r = g_new.iter().map(|&v| -v).collect();
            since_restart = 0;
        }
        x = x_new;
        f = res.f;
        g = g_new;
        k += 1;
        driver.offer(&x, f);
        driver.record(k, f, norm(&g), res.step, beta);
    }
}
