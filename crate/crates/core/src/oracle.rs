//! Brute-force references used to check the closed forms: product integration of
//! the Riemann–Liouville kernel, Grünwald–Letnikov differences, Riemann–Stieltjes
//! sums, Picard iteration and the two analytic benchmark solutions.

use statrs::function::gamma::ln_gamma;

use crate::dyadic::{pow2, HolderExpansion};
use crate::error::{domain, input, Error, Result};
use crate::fraccalc::gamma;
use crate::solvers::VolterraProblem;

/// Samples `f(j / 2^q)`, `j = 0..=2^q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    level: u32,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        if level > 30 || values.len() != (1usize << level) + 1 {
            return Err(input(format!(
                "level {level} needs {} samples, got {}",
                (1usize << level.min(30)) + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(input("non-finite grid value"));
        }
        Ok(Self { level, values })
    }

    pub fn from_fn(level: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = pow2(-(level as i32));
        Self::new(level, (0..=1usize << level).map(|j| f(j as f64 * h)).collect())
    }

    pub fn from_expansion(x: &HolderExpansion, level: u32) -> Result<Self> {
        Self::new(level, x.sample(level))
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        pow2(-(self.level as i32))
    }

    pub fn time(&self, j: usize) -> f64 {
        j as f64 * self.step()
    }

    /// Grid index of `t`, which must be a node.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t * (1u64 << self.level) as f64;
        if !(0.0..=1.0).contains(&t) || x.fract() != 0.0 {
            return Err(domain(format!("t = {t} is not a node of the level-{} grid", self.level)));
        }
        Ok(x as usize)
    }

    /// Piecewise-linear interpolant of the level-`coarse` nodes, sampled on this grid.
    pub fn interpolate_from(&self, coarse: u32) -> Result<Self> {
        if coarse > self.level {
            return Err(domain("coarse level above grid level"));
        }
        let stride = 1usize << (self.level - coarse);
        let values = (0..self.values.len())
            .map(|j| {
                let i = j / stride * stride;
                if i == j {
                    self.values[j]
                } else {
                    let w = (j - i) as f64 / stride as f64;
                    (1.0 - w) * self.values[i] + w * self.values[i + stride]
                }
            })
            .collect();
        Self::new(self.level, values)
    }

    /// `max_j |self_j - other(t_j)|`.
    pub fn sup_distance(&self, other: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(j, v)| (v - other(self.time(j))).abs())
            .fold(0.0, f64::max)
    }
}

/// `∫_d^{d+L} s^{α-1} ds` and `∫_d^{d+L} s^{α-1} (d + L - s) ds`.
fn cell_moments(d: f64, len: f64, alpha: f64) -> (f64, f64) {
    if d == 0.0 {
        return (len.powf(alpha) / alpha, len.powf(alpha + 1.0) / (alpha * (alpha + 1.0)));
    }
    let r = len / d;
    let j0 = d.powf(alpha) * (alpha * r.ln_1p()).exp_m1() / alpha;
    let j1 = if r < 0.125 {
        // d^{α-1} Σ_j binom(α-1, j) d^{-j} L^{j+2} / ((j+1)(j+2))
        let mut binom = 1.0;
        let mut power = len * len;
        let mut sum = 0.0;
        for j in 0..40 {
            let term = binom * power / ((j + 1) * (j + 2)) as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
            binom *= (alpha - 1.0 - j as f64) / (j + 1) as f64;
            power *= r;
        }
        d.powf(alpha - 1.0) * sum
    } else {
        let phi = |x: f64| x.powf(alpha + 1.0) / (alpha * (alpha + 1.0));
        phi(d + len) - phi(d) - len * d.powf(alpha) / alpha
    };
    (j0, j1)
}

fn check_positive(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("order must be positive, got {alpha}")))
    }
}

/// `I_{0+}^α f(t)` with `f` linear between nodes; exact moments of `(t - u)^{α-1}` per cell.
pub fn rl_integral_pl(f: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    check_positive(alpha)?;
    let j = f.index_of(t)?;
    let h = f.step();
    let v = &f.values;
    let mut total = 0.0;
    for i in 0..j {
        let (j0, j1) = cell_moments((j - 1 - i) as f64 * h, h, alpha);
        total += v[i] * (h * j0 - j1) / h + v[i + 1] * j1 / h;
    }
    Ok(total / gamma(alpha))
}

/// `I_{T-}^α f(t)` with `f` linear between nodes.
pub fn rl_integral_pl_right(f: &GridFunction, alpha: f64, t: f64, end: f64) -> Result<f64> {
    check_positive(alpha)?;
    let (j, e) = (f.index_of(t)?, f.index_of(end)?);
    if j > e {
        return Err(domain("need t <= T"));
    }
    let h = f.step();
    let v = &f.values;
    let mut total = 0.0;
    for i in j..e {
        let (j0, j1) = cell_moments((i - j) as f64 * h, h, alpha);
        total += v[i] * j1 / h + v[i + 1] * (h * j0 - j1) / h;
    }
    Ok(total / gamma(alpha))
}

/// `I_{0+}^α f(t)` with `f` constant on each cell `(t_i, t_{i+1}]`, equal to `f(t_{i+1})`.
pub fn rl_integral_step(f: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    check_positive(alpha)?;
    let j = f.index_of(t)?;
    let h = f.step();
    let total: f64 = (0..j)
        .map(|i| f.values[i + 1] * cell_moments((j - 1 - i) as f64 * h, h, alpha).0)
        .sum();
    Ok(total / gamma(alpha))
}

/// `I_{T-}^α f(t)` with `f` constant on each cell `(t_i, t_{i+1}]`, equal to `f(t_{i+1})`.
pub fn rl_integral_step_right(f: &GridFunction, alpha: f64, t: f64, end: f64) -> Result<f64> {
    check_positive(alpha)?;
    let (j, e) = (f.index_of(t)?, f.index_of(end)?);
    if j > e {
        return Err(domain("need t <= T"));
    }
    let h = f.step();
    let total: f64 = (j..e)
        .map(|i| f.values[i + 1] * cell_moments((i - j) as f64 * h, h, alpha).0)
        .sum();
    Ok(total / gamma(alpha))
}

/// Grünwald–Letnikov weights `w_0 = 1`, `w_j = w_{j-1} (1 - (α + 1) / j)`.
fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    for j in 1..=n {
        let prev = w[j - 1];
        w.push(prev * (1.0 - (alpha + 1.0) / j as f64));
    }
    w
}

/// First-order Grünwald–Letnikov approximation of `D_{0+}^α f(t)`, applied to
/// `f - f(0)` with the exact derivative of the constant added back.
pub fn gl_derivative(f: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("order must lie in (0, 1), got {alpha}")));
    }
    let j = f.index_of(t)?;
    let f0 = f.values[0];
    if j == 0 {
        return if f0 == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Pole("derivative at t = 0 with f(0) != 0".into()))
        };
    }
    let w = gl_weights(alpha, j);
    let sum: f64 = (0..=j).map(|i| w[i] * (f.values[j - i] - f0)).sum();
    Ok(sum * f.step().powf(-alpha) + f0 * t.powf(-alpha) / gamma(1.0 - alpha))
}

/// Two-level extrapolation `2 D_h - D_{2h}` of [`gl_derivative`].
pub fn gl_derivative_extrapolated(f: &GridFunction, alpha: f64, t: f64) -> Result<f64> {
    let fine = gl_derivative(f, alpha, t)?;
    let coarse_values: Vec<f64> = f.values.iter().step_by(2).copied().collect();
    let coarse = GridFunction::new(f.level - 1, coarse_values)?;
    let rough = gl_derivative(&coarse, alpha, t)?;
    Ok(2.0 * fine - rough)
}

/// `u -> T - u` applied to the samples on `[0, T]`, padded with `f(0)`, and the
/// reflected time of `t`.
fn reflect(f: &GridFunction, t: f64, end: f64) -> Result<(GridFunction, f64)> {
    let (j, e) = (f.index_of(t)?, f.index_of(end)?);
    if j > e {
        return Err(domain("need t <= T"));
    }
    let mut reflected: Vec<f64> = f.values[..=e].iter().rev().copied().collect();
    reflected.resize(f.values.len(), *reflected.last().expect("non-empty"));
    let g = GridFunction::new(f.level, reflected)?;
    let s = g.time(e - j);
    Ok((g, s))
}

/// `D_{T-}^α f(t)` by reflection and [`gl_derivative`]; `T` must be a node.
pub fn gl_derivative_right(f: &GridFunction, alpha: f64, t: f64, end: f64) -> Result<f64> {
    let (g, s) = reflect(f, t, end)?;
    gl_derivative(&g, alpha, s)
}

/// `D_{T-}^α f(t)` by reflection and [`gl_derivative_extrapolated`]; `t` and `T` must be
/// nodes of the coarse grid.
pub fn gl_derivative_right_extrapolated(f: &GridFunction, alpha: f64, t: f64, end: f64) -> Result<f64> {
    let (g, s) = reflect(f, t, end)?;
    gl_derivative_extrapolated(&g, alpha, s)
}

/// Left-point Riemann–Stieltjes sums on the grid and on the grid of half resolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsSum {
    pub value: f64,
    pub coarse: f64,
    /// `2 value - coarse`, exact when `f` and `g` are linear on the coarse cells.
    pub extrapolated: f64,
}

/// `Σ f(t_i) (g(t_{i+1}) - g(t_i))` over the nodes up to `t`.
pub fn rs_sum(f: &GridFunction, g: &GridFunction, t: f64) -> Result<RsSum> {
    if f.level != g.level {
        return Err(input("grids of f and g differ"));
    }
    if f.level < 1 {
        return Err(input("need grid level >= 1"));
    }
    let j = f.index_of(t)?;
    let sum = |stride: usize| -> f64 {
        (0..j / stride)
            .map(|i| f.values[i * stride] * (g.values[(i + 1) * stride] - g.values[i * stride]))
            .sum()
    };
    let value = sum(1);
    let coarse = if j % 2 == 0 { sum(2) } else { value };
    Ok(RsSum {
        value,
        coarse,
        extrapolated: 2.0 * value - coarse,
    })
}

/// Iterations needed so that `|θ|^n / Γ(αn + 1) < 1e-14`, at least one.
pub fn picard_iterations(theta: f64, alpha: f64) -> usize {
    if theta == 0.0 {
        return 1;
    }
    let target = (1e-14f64).ln();
    (1..100_000)
        .find(|&n| n as f64 * theta.abs().ln() - ln_gamma(alpha * n as f64 + 1.0) < target)
        .unwrap_or(100_000)
}

/// Picard iteration `X_{j+1} = x_0 + θ I^α S_p X_j + g` on the grid of level `q >= p + 1`,
/// starting from `X_0 = x_0 + g`.
pub fn volterra_picard(prob: &VolterraProblem, p: u32, iters: usize, q: u32) -> Result<GridFunction> {
    if q < p + 1 {
        return Err(domain(format!("grid level {q} must be at least p + 1 = {}", p + 1)));
    }
    let g = GridFunction::from_expansion(prob.driver(), q)?;
    let n = g.values.len();
    let h = g.step();
    let alpha = prob.alpha();
    // Weights of the piecewise-linear product rule depend only on j - i.
    let scale = 1.0 / gamma(alpha);
    let cells: Vec<(f64, f64)> = (0..n).map(|i| cell_moments(i as f64 * h, h, alpha)).collect();
    let base: Vec<f64> = g.values.iter().map(|v| prob.x0() + v).collect();
    let mut x = GridFunction::new(q, base.clone())?;
    for _ in 0..iters {
        let s = x.interpolate_from(p + 1)?;
        let next = (0..n)
            .map(|j| {
                let integral: f64 = (0..j)
                    .map(|i| {
                        let (j0, j1) = cells[j - 1 - i];
                        s.values[i] * (h * j0 - j1) / h + s.values[i + 1] * j1 / h
                    })
                    .sum();
                base[j] + prob.theta() * scale * integral
            })
            .collect();
        x = GridFunction::new(q, next)?;
    }
    Ok(x)
}

/// Benchmark with exact solution `X(t) = t^H`: `g(t) = t^H (1 - t^α)`, `θ = Γ(α+H+1) / Γ(H+1)`.
#[derive(Debug, Clone)]
pub struct LangevinBenchmark {
    pub hurst: f64,
    pub alpha: f64,
    pub theta: f64,
    pub driver: HolderExpansion,
}

impl LangevinBenchmark {
    pub fn exact(&self, t: f64) -> f64 {
        t.powf(self.hurst)
    }

    pub fn driver_fn(&self, t: f64) -> f64 {
        t.powf(self.hurst) * (1.0 - t.powf(self.alpha))
    }

    pub fn problem(&self) -> Result<VolterraProblem> {
        VolterraProblem::new(0.0, self.theta, self.alpha, self.driver.clone())
    }
}

/// The Langevin benchmark with its driver expanded to level `depth`.
pub fn exact_langevin(hurst: f64, alpha: f64, depth: u32) -> Result<LangevinBenchmark> {
    if !(hurst > 0.0 && hurst < alpha && alpha < 1.0) {
        return Err(domain(format!("need 0 < H < alpha < 1, got H = {hurst}, alpha = {alpha}")));
    }
    let driver = HolderExpansion::expand(|t| t.powf(hurst) * (1.0 - t.powf(alpha)), hurst, depth)?;
    Ok(LangevinBenchmark {
        hurst,
        alpha,
        theta: gamma(alpha + hurst + 1.0) / gamma(hurst + 1.0),
        driver,
    })
}

/// `t -> x_0 exp(βt + γ g(t))`, the solution of `X = x_0 + β ∫ X ds + γ ∫ X dg` when `g(0) = 0`.
pub fn exact_linear(x0: f64, beta: f64, gamma: f64, g: impl Fn(f64) -> f64) -> impl Fn(f64) -> f64 {
    move |t| x0 * (beta * t + gamma * g(t)).exp()
}
