//! Riemann–Stieltjes integrals `∫_0^t f dg` of Hölder functions with exponents
//! summing above one, written as series over pairs of Schauder coefficients.
//!
//! The basic block is the second difference of a `τ` kernel over another cell,
//!
//! ```text
//! Δ^a(outer, inner; t) = τ¹_outer(t∧l) - 2 τ¹_outer(t∧c) + τ¹_outer(t∧r),  (l, c, r) = inner cell
//! ```
//!
//! and `∫_0^t H_inner e_outer du = -2^{(m+n)/2} Δ²(outer, inner; t)`.

use crate::dyadic::{exp2, pow2, schauder, DyadicIndex, HolderExpansion};
use crate::error::{input, precondition, Result};
use crate::fraccalc::{frac_integral_expansion, Tau};

#[inline]
pub(crate) fn delta_with(tau: &Tau, outer: DyadicIndex, inner: DyadicIndex, t: f64) -> f64 {
    let [l, c, r] = inner.points();
    if t <= l || r <= outer.left() {
        return 0.0;
    }
    tau.left(outer, t.min(l)) - 2.0 * tau.left(outer, t.min(c)) + tau.left(outer, t.min(r))
}

/// `Δ^a(outer, inner; t)` for an arbitrary exponent `a > 0`.
pub fn delta(order: f64, outer: DyadicIndex, inner: DyadicIndex, t: f64) -> Result<f64> {
    Ok(delta_with(&Tau::new(order)?, outer, inner, t))
}

/// `Δ²(outer, inner; t)`.
pub fn delta2(outer: DyadicIndex, inner: DyadicIndex, t: f64) -> f64 {
    delta_with(&quadratic(), outer, inner, t)
}

pub(crate) fn quadratic() -> Tau {
    Tau::new(2.0).expect("positive exponent")
}

/// `D(tent, cell) = 2^{-m} [e_tent(c) - e_tent(r)] + 2^{n/2} Δ²(tent, cell; 1)`, where
/// `(l, c, r)` is the cell of level `m` and `n` is the level of the tent.
///
/// These constants are the Schauder coefficients (up to `2^{mH}`) of `∫_0^t s de_tent(s)`
/// minus `k/2^m` times those of `e_tent`.
pub fn d_constant(tent: DyadicIndex, cell: DyadicIndex) -> f64 {
    let [_, c, r] = cell.points();
    cell.width() * (schauder(tent, c) - schauder(tent, r))
        + exp2(0.5 * tent.level() as f64) * delta2(tent, cell, 1.0)
}

/// Which of the equivalent series to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RsForm {
    /// Double series over both coefficient sets.
    #[default]
    Double,
    /// Single series over the driver's coefficients: `Σ ∫ H · f`.
    DriverSeries,
    /// Single series over the integrand's coefficients: `Σ ∫ H · (g(t) - g)`.
    IntegrandSeries,
}

fn check_young(f: &HolderExpansion, g: &HolderExpansion) -> Result<()> {
    if f.hurst() + g.hurst() <= 1.0 {
        return Err(precondition(format!(
            "Hurst exponents {} + {} must exceed 1",
            f.hurst(),
            g.hurst()
        )));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(input(format!("t = {t} outside [0, 1]")))
    }
}

/// `∫_0^t f dg` with `f` truncated at level `pf` and `g` at level `pg`.
pub fn rs_integral(f: &HolderExpansion, g: &HolderExpansion, t: f64, pf: u32, pg: u32) -> Result<f64> {
    rs_integral_with(RsForm::Double, f, g, t, pf, pg)
}

/// [`rs_integral`] at the default truncation `min(depth f, depth g)`.
pub fn rs_integral_default(f: &HolderExpansion, g: &HolderExpansion, t: f64) -> Result<f64> {
    let p = f.max_level().min(g.max_level());
    rs_integral(f, g, t, p, p)
}

/// [`rs_integral`] through the chosen series.
pub fn rs_integral_with(
    form: RsForm,
    f: &HolderExpansion,
    g: &HolderExpansion,
    t: f64,
    pf: u32,
    pg: u32,
) -> Result<f64> {
    check_young(f, g)?;
    check_time(t)?;
    let pf = pf.min(f.max_level());
    let pg = pg.min(g.max_level());
    let g_t = g.eval_to(t, pg);
    let g_0 = g.f0();
    let yf = f.without_affine();
    let yg = g.without_affine();
    let int_g = frac_integral_expansion(g, 1.0, t, pg)?;
    let int_yf = frac_integral_expansion(&yf, 1.0, t, pf)?;
    let affine = f.f0() * (g_t - g_0) + (f.f1() - f.f0()) * (t * g_t - int_g) + (g.f1() - g.f0()) * int_yf;
    let rough = match form {
        RsForm::Double => double_series(&yf, &yg, t, pf, pg),
        RsForm::DriverSeries => driver_series(&yf, &yg, t, pf, pg)?,
        RsForm::IntegrandSeries => integrand_series(&yf, &yg, t, pf, pg)?,
    };
    Ok(affine + rough)
}

/// `Σ_{inner <= up_to} 2^{n(1-H)} c_inner Δ²(outer, inner; t)` over the coefficients of `g`,
/// visiting only cells that overlap `outer` and start before `t`.
pub(crate) fn tent_against(tau: &Tau, outer: DyadicIndex, g: &HolderExpansion, up_to: u32, t: f64) -> f64 {
    let (m, k) = (outer.level(), outer.shift());
    let mut total = 0.0;
    for n in 0..=up_to.min(g.max_level()) {
        let coeffs = g.level(n);
        let (first, last) = if n <= m {
            let l = k >> (m - n);
            (l, l + 1)
        } else {
            let s = k << (n - m);
            (s, s + (1u64 << (n - m)))
        };
        let mut level_total = 0.0;
        for l in first..last {
            let c = coeffs[l as usize];
            if c == 0.0 {
                continue;
            }
            let inner = DyadicIndex::new_unchecked(n, l);
            if inner.left() >= t {
                break;
            }
            level_total += c * delta_with(tau, outer, inner, t);
        }
        total += exp2(n as f64 * (1.0 - g.hurst())) * level_total;
    }
    total
}

/// `∫_0^t y_f dy_g = -Σ 2^{m(1-H_1) + n(1-H_2)} c_f c_g Δ²(f cell, g cell; t)`.
fn double_series(yf: &HolderExpansion, yg: &HolderExpansion, t: f64, pf: u32, pg: u32) -> f64 {
    let tau = quadratic();
    let mut total = 0.0;
    for m in 0..=pf {
        let mut level_total = 0.0;
        for (k, &c) in yf.level(m).iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let outer = DyadicIndex::new_unchecked(m, k as u64);
            if outer.left() >= t {
                break;
            }
            level_total += c * tent_against(&tau, outer, yg, pg, t);
        }
        total += exp2(m as f64 * (1.0 - yf.hurst())) * level_total;
    }
    -total
}

/// `∫_0^t H y du = 2^{n/2} [2 Y(t∧c) - Y(t∧l) - Y(t∧r)]` with `Y = I¹ y`.
fn haar_moment(y: &HolderExpansion, cell: DyadicIndex, t: f64, up_to: u32) -> Result<f64> {
    let [l, c, r] = cell.points();
    let int = |s: f64| frac_integral_expansion(y, 1.0, s, up_to);
    Ok(exp2(0.5 * cell.level() as f64) * (2.0 * int(t.min(c))? - int(t.min(l))? - int(t.min(r))?))
}

fn driver_series(yf: &HolderExpansion, yg: &HolderExpansion, t: f64, pf: u32, pg: u32) -> Result<f64> {
    let mut total = 0.0;
    for (cell, c) in yg.truncated(pg).coefficients() {
        if c == 0.0 || cell.left() >= t {
            continue;
        }
        total += yg.weight(cell.level()) * c * haar_moment(yf, cell, t, pf)?;
    }
    Ok(total)
}

fn integrand_series(yf: &HolderExpansion, yg: &HolderExpansion, t: f64, pf: u32, pg: u32) -> Result<f64> {
    let yg_t = yg.eval_to(t, pg);
    let mut total = 0.0;
    for (cell, c) in yf.truncated(pf).coefficients() {
        if c == 0.0 || cell.left() >= t {
            continue;
        }
        let moment = yg_t * schauder(cell, t) - haar_moment(yg, cell, t, pg)?;
        total += yf.weight(cell.level()) * c * moment;
    }
    Ok(total)
}

/// Expansion of `R(t) = ∫_0^t f dg` up to level `p`, with the Hurst exponent of `g`.
///
/// The coefficients are second differences of `R` on the level-`p + 1` grid.
pub fn rs_integral_coeffs(f: &HolderExpansion, g: &HolderExpansion, p: u32) -> Result<HolderExpansion> {
    check_young(f, g)?;
    let q = p + 1;
    let trunc = f.max_level().min(g.max_level());
    let h = pow2(-(q as i32));
    let samples = (0..=1usize << q)
        .map(|j| rs_integral(f, g, j as f64 * h, trunc, trunc))
        .collect::<Result<Vec<_>>>()?;
    HolderExpansion::from_dyadic_samples(&samples, g.hurst())
}

/// Coefficients of `∫_0^t f dg` for `f`, `g` without affine part, from the closed form
/// `c^R_{m,k} = 2^{mH_2} Σ 2^{n_1(1-H_1) + n_2(1-H_2)} c_f c_g [Δ²(l) - 2Δ²(c) + Δ²(r)]`.
///
/// Quadratic in the number of coefficients per output cell; meant for cross-checks at
/// small depth.
pub fn rs_integral_coeffs_slow(f: &HolderExpansion, g: &HolderExpansion, p: u32) -> Result<HolderExpansion> {
    check_young(f, g)?;
    if f.f0() != 0.0 || f.f1() != 0.0 || g.f0() != 0.0 || g.f1() != 0.0 {
        return Err(input("closed-form coefficients need zero boundary values"));
    }
    let tau = quadratic();
    let trunc = f.max_level().min(g.max_level());
    let f = f.truncated(trunc);
    let g = g.truncated(trunc);
    let pairs: Vec<(DyadicIndex, DyadicIndex, f64)> = f
        .coefficients()
        .flat_map(|(a, ca)| {
            let f = &f;
            let g = &g;
            g.coefficients().filter_map(move |(b, cb)| {
                let w = exp2(a.level() as f64 * (1.0 - f.hurst()) + b.level() as f64 * (1.0 - g.hurst()));
                (ca * cb != 0.0).then_some((a, b, w * ca * cb))
            })
        })
        .collect();
    let second = |cell: DyadicIndex| {
        let [l, c, r] = cell.points();
        pairs
            .iter()
            .map(|&(a, b, w)| {
                w * (delta_with(&tau, a, b, l) - 2.0 * delta_with(&tau, a, b, c) + delta_with(&tau, a, b, r))
            })
            .sum::<f64>()
    };
    let levels = (0..=p)
        .map(|m| {
            let scale = exp2(m as f64 * g.hurst());
            (0..1u64 << m)
                .map(|k| scale * second(DyadicIndex::new_unchecked(m, k)))
                .collect()
        })
        .collect();
    let x1 = -pairs.iter().map(|&(a, b, w)| w * delta_with(&tau, a, b, 1.0)).sum::<f64>();
    HolderExpansion::new(g.hurst(), 0.0, x1, levels)
}
