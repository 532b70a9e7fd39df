//! Limited-memory BFGS with a strong Wolfe line search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    AnalyticAdjoint,
    FiniteDifference,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub memory: usize,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    /// Armijo constant c₁.
    pub sufficient_decrease: f64,
    /// Curvature constant c₂.
    pub curvature: f64,
    pub gradient_mode: GradientMode,
    /// Central-difference step, used only in finite-difference mode.
    pub finite_difference_step: f64,
    /// Upper bound on the length of a single step, if any.
    pub max_step_length: Option<f64>,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            gradient_tolerance: 1e-10,
            max_iterations: 2000,
            sufficient_decrease: 1e-4,
            curvature: 0.9,
            gradient_mode: GradientMode::AnalyticAdjoint,
            finite_difference_step: 1e-5,
            max_step_length: None,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let (c1, c2) = (self.sufficient_decrease, self.curvature);
        if !(0.0 < c1 && c1 < c2 && c2 < 1.0) {
            return Err(Error::Domain(format!("line-search constants must satisfy 0 < c1 < c2 < 1, got c1 = {c1}, c2 = {c2}")));
        }
        if self.memory == 0 {
            return Err(Error::Domain("L-BFGS memory must be at least 1".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::Domain(format!("gradient tolerance must be positive, got {}", self.gradient_tolerance)));
        }
        if !(self.finite_difference_step > 0.0) {
            return Err(Error::Domain("finite-difference step must be positive".into()));
        }
        if self.max_step_length.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::Domain("maximum step length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "reason", content = "detail")]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailure(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct LbfgsReport {
    /// Best point seen.
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
    /// Objective at the start and after every accepted step.
    pub values: Vec<f64>,
}

impl LbfgsReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::GradientTolerance
    }
}

/// Accepted iterate handed to an observer.
pub struct Iterate<'a> {
    pub iteration: usize,
    pub x: &'a [f64],
    pub value: f64,
    pub gradient_norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

struct Memory {
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    rho: Vec<f64>,
    depth: usize,
}

impl Memory {
    fn new(depth: usize) -> Self {
        Self {
            s: Vec::new(),
            y: Vec::new(),
            rho: Vec::new(),
            depth,
        }
    }

    fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.rho.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        if !(sy > f64::EPSILON * norm(&s) * norm(&y)) {
            return;
        }
        if self.s.len() == self.depth {
            self.s.remove(0);
            self.y.remove(0);
            self.rho.remove(0);
        }
        self.rho.push(1.0 / sy);
        self.s.push(s);
        self.y.push(y);
    }

    /// −H·g by the two-loop recursion.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let k = self.s.len();
        let mut q = g.to_vec();
        let mut alpha = vec![0.0; k];
        for i in (0..k).rev() {
            alpha[i] = self.rho[i] * dot(&self.s[i], &q);
            for (qj, yj) in q.iter_mut().zip(&self.y[i]) {
                *qj -= alpha[i] * yj;
            }
        }
        if k > 0 {
            let gamma = dot(&self.s[k - 1], &self.y[k - 1]) / dot(&self.y[k - 1], &self.y[k - 1]);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..k {
            let beta = self.rho[i] * dot(&self.y[i], &q);
            for (qj, sj) in q.iter_mut().zip(&self.s[i]) {
                *qj += (alpha[i] - beta) * sj;
            }
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

struct Sample {
    alpha: f64,
    x: Vec<f64>,
    value: f64,
    grad: Vec<f64>,
    slope: f64,
}

struct LineSearch<'a, F> {
    f: &'a mut F,
    x: &'a [f64],
    d: &'a [f64],
    phi0: f64,
    dphi0: f64,
    c1: f64,
    c2: f64,
    alpha_max: f64,
    evaluations: usize,
}

const MAX_LINE_SEARCH_EVALUATIONS: usize = 60;
const MAX_STEP: f64 = 1e10;

impl<F> LineSearch<'_, F>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn sample(&mut self, alpha: f64) -> Result<Sample> {
        let x = axpy(self.x, alpha, self.d);
        let (value, grad) = (self.f)(&x)?;
        self.evaluations += 1;
        let slope = dot(&grad, self.d);
        Ok(Sample { alpha, x, value, grad, slope })
    }

    fn armijo_fails(&self, s: &Sample) -> bool {
        !(s.value <= self.phi0 + self.c1 * s.alpha * self.dphi0) || !s.value.is_finite()
    }

    fn curvature_holds(&self, s: &Sample) -> bool {
        s.slope.abs() <= -self.c2 * self.dphi0
    }

    /// Returns an accepted sample, or the best sufficient-decrease sample with a failure message.
    fn run(&mut self, alpha0: f64) -> Result<std::result::Result<Sample, (Option<Sample>, String)>> {
        let mut prev: Option<Sample> = None;
        let mut alpha = alpha0;
        loop {
            if self.evaluations >= MAX_LINE_SEARCH_EVALUATIONS {
                return Ok(Err((prev, "bracketing phase exhausted its evaluation budget".into())));
            }
            let cur = self.sample(alpha)?;
            let rises = prev.as_ref().is_some_and(|p| cur.value >= p.value);
            if self.armijo_fails(&cur) || rises {
                return match prev {
                    Some(p) => self.zoom(p, cur),
                    None => self.zoom(
                        Sample {
                            alpha: 0.0,
                            x: self.x.to_vec(),
                            value: self.phi0,
                            grad: Vec::new(),
                            slope: self.dphi0,
                        },
                        cur,
                    ),
                };
            }
            if self.curvature_holds(&cur) {
                return Ok(Ok(cur));
            }
            if cur.slope >= 0.0 {
                let hi = prev.unwrap_or(Sample {
                    alpha: 0.0,
                    x: self.x.to_vec(),
                    value: self.phi0,
                    grad: Vec::new(),
                    slope: self.dphi0,
                });
                return self.zoom(cur, hi);
            }
            if alpha >= self.alpha_max {
                // a capped step with sufficient decrease is accepted as is
                return Ok(Ok(cur));
            }
            alpha = (2.0 * alpha).min(self.alpha_max);
            prev = Some(cur);
        }
    }

    fn zoom(&mut self, mut lo: Sample, mut hi: Sample) -> Result<std::result::Result<Sample, (Option<Sample>, String)>> {
        loop {
            if self.evaluations >= MAX_LINE_SEARCH_EVALUATIONS {
                return Ok(Err((partial(lo), "zoom phase exhausted its evaluation budget".into())));
            }
            let width = (hi.alpha - lo.alpha).abs();
            if width <= f64::EPSILON * lo.alpha.abs().max(hi.alpha.abs()) {
                let message = format!("bracket collapsed near step {:.3e}", lo.alpha);
                return Ok(Err((partial(lo), message)));
            }
            let alpha = cubic_minimizer(&lo, &hi)
                .filter(|a| {
                    let (a0, a1) = (lo.alpha.min(hi.alpha), lo.alpha.max(hi.alpha));
                    *a > a0 + 0.1 * width && *a < a1 - 0.1 * width
                })
                .unwrap_or(0.5 * (lo.alpha + hi.alpha));
            let cur = self.sample(alpha)?;
            if self.armijo_fails(&cur) || cur.value >= lo.value {
                hi = cur;
            } else {
                if self.curvature_holds(&cur) {
                    return Ok(Ok(cur));
                }
                if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
    }
}

fn partial(lo: Sample) -> Option<Sample> {
    (lo.alpha > 0.0).then_some(lo)
}

/// Minimizer of the cubic matching values and slopes at both samples.
fn cubic_minimizer(a: &Sample, b: &Sample) -> Option<f64> {
    let d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.slope * b.slope;
    if !(disc >= 0.0) {
        return None;
    }
    let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
    let denom = b.slope - a.slope + 2.0 * d2;
    if denom == 0.0 {
        return None;
    }
    let t = b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / denom;
    t.is_finite().then_some(t)
}

pub fn lbfgs_minimize<F>(f: F, x0: &[f64], opts: &OptimizerOptions) -> Result<LbfgsReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    lbfgs_minimize_observed(f, x0, opts, |_| {})
}

/// [`lbfgs_minimize`] calling `observer` on the start point and every accepted iterate.
pub fn lbfgs_minimize_observed<F, O>(mut f: F, x0: &[f64], opts: &OptimizerOptions, mut observer: O) -> Result<LbfgsReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    O: FnMut(&Iterate<'_>),
{
    opts.validate()?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("starting point has non-finite entries".into()));
    }
    let mut x = x0.to_vec();
    let (mut value, mut grad) = f(&x)?;
    if !value.is_finite() {
        return Err(Error::Domain("objective is not finite at the starting point".into()));
    }
    let mut evaluations = 1;
    let mut gnorm = norm(&grad);
    let mut values = vec![value];
    let mut memory = Memory::new(opts.memory);
    observer(&Iterate {
        iteration: 0,
        x: &x,
        value,
        gradient_norm: gnorm,
    });

    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;
    let mut restarted = false;
    while iterations < opts.max_iterations {
        if gnorm < opts.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        let mut d = memory.direction(&grad);
        let mut dphi0 = dot(&grad, &d);
        if !(dphi0 < 0.0) {
            memory.clear();
            d = grad.iter().map(|g| -g).collect();
            dphi0 = -gnorm * gnorm;
        }
        let alpha_max = opts.max_step_length.map_or(MAX_STEP, |m| (m / norm(&d)).min(MAX_STEP));
        let alpha0 = (if memory.s.is_empty() { (1.0 / gnorm).min(1.0) } else { 1.0 }).min(alpha_max);
        let mut search = LineSearch {
            f: &mut f,
            x: &x,
            d: &d,
            phi0: value,
            dphi0,
            c1: opts.sufficient_decrease,
            c2: opts.curvature,
            alpha_max,
            evaluations: 0,
        };
        let outcome = search.run(alpha0)?;
        evaluations += search.evaluations;
        let accepted = match outcome {
            Ok(sample) => {
                restarted = false;
                sample
            }
            Err((partial, message)) => match partial {
                // sufficient decrease without curvature: take the step but drop the memory
                Some(sample) if sample.value < value && !sample.grad.is_empty() => {
                    memory.clear();
                    sample
                }
                _ if !restarted && !memory.s.is_empty() => {
                    memory.clear();
                    restarted = true;
                    continue;
                }
                _ => {
                    termination = Termination::LineSearchFailure(message);
                    break;
                }
            },
        };
        let s: Vec<f64> = accepted.x.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = accepted.grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        memory.push(s, y);
        x = accepted.x;
        value = accepted.value;
        grad = accepted.grad;
        gnorm = norm(&grad);
        iterations += 1;
        values.push(value);
        observer(&Iterate {
            iteration: iterations,
            x: &x,
            value,
            gradient_norm: gnorm,
        });
    }
    if termination == Termination::MaxIterations && gnorm < opts.gradient_tolerance {
        termination = Termination::GradientTolerance;
    }
    Ok(LbfgsReport {
        x,
        value,
        gradient_norm: gnorm,
        iterations,
        evaluations,
        termination,
        values,
    })
}

/// Central differences, parallel over coordinates.
pub fn central_difference_gradient<F>(f: F, x: &[f64], step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut xp = x.to_vec();
            xp[i] = x[i] + step;
            let fp = f(&xp)?;
            xp[i] = x[i] - step;
            let fm = f(&xp)?;
            Ok((fp - fm) / (2.0 * step))
        })
        .collect()
}
