use crate::error::{Error, Result};

/// Backtracking line-search constants shared by the `F` and `W` updates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub init_step: f64,
    pub shrink_factor: f64,
    pub armijo_const: f64,
    pub max_trials: usize,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            init_step: 1.0,
            shrink_factor: 0.3,
            armijo_const: 1e-4,
            max_trials: 16,
        }
    }
}

/// Hyperparameters and numerical guards for fitting.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Weight of the attribute likelihood; the graph likelihood gets `1 - alpha`.
    pub alpha: f64,
    /// l1 strength on the non-bias logistic weights.
    pub lambda: f64,
    pub max_outer_iters: usize,
    /// Stop once an outer iteration improves the objective by less than this
    /// fraction of its magnitude.
    pub rel_improvement_tol: f64,
    pub line_search: LineSearch,
    /// Floor on `F_u . F_v` inside `log(1 - exp(-x))` for observed edges.
    pub min_dot_guard: f64,
    /// Upper bound on every membership strength.
    pub max_f: f64,
    pub rng_seed: u64,
    pub num_workers: usize,
    /// Membership threshold override; `None` uses `sqrt(-ln(1 - 1/N))`.
    pub delta: Option<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            lambda: 1.0,
            max_outer_iters: 1000,
            rel_improvement_tol: 1e-5,
            line_search: LineSearch::default(),
            min_dot_guard: 1e-10,
            max_f: 1000.0,
            rng_seed: 0,
            num_workers: 1,
            delta: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda = {} must be finite and >= 0", self.lambda));
        }
        let ls = &self.line_search;
        if !(ls.shrink_factor > 0.0 && ls.shrink_factor < 1.0) {
            return bad(format!(
                "shrink_factor = {} must lie in (0, 1)",
                ls.shrink_factor
            ));
        }
        if !(ls.init_step > 0.0 && ls.init_step.is_finite()) {
            return bad(format!("init_step = {} must be positive", ls.init_step));
        }
        if !(ls.armijo_const >= 0.0 && ls.armijo_const < 1.0) {
            return bad(format!(
                "armijo_const = {} must lie in [0, 1)",
                ls.armijo_const
            ));
        }
        if ls.max_trials == 0 {
            return bad("max_trials must be at least 1".into());
        }
        if self.min_dot_guard.is_nan() || self.min_dot_guard <= 0.0 {
            return bad(format!(
                "min_dot_guard = {} must be > 0",
                self.min_dot_guard
            ));
        }
        if !(self.max_f > 0.0 && self.max_f.is_finite()) {
            return bad(format!(
                "max_f = {} must be positive and finite",
                self.max_f
            ));
        }
        if self.rel_improvement_tol.is_nan() || self.rel_improvement_tol < 0.0 {
            return bad(format!(
                "rel_improvement_tol = {} must be >= 0",
                self.rel_improvement_tol
            ));
        }
        if self.num_workers == 0 {
            return bad("num_workers must be at least 1".into());
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("delta = {d} must be positive"));
            }
        }
        Ok(())
    }
}
