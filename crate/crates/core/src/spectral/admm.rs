//! ADMM solver for the two-parameter harmonic Huber regression behind each
//! robust periodogram bin.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmConfig {
    /// Huber threshold.
    pub zeta: f64,
    /// Augmented-Lagrangian penalty.
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            zeta: 1.0,
            rho: 1.0,
            eps_abs: 1e-4,
            eps_rel: 1e-4,
            max_iter: 50,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zeta", self.zeta),
            ("rho", self.rho),
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(invalid(name, "must be > 0"));
            }
        }
        if self.max_iter == 0 {
            return Err(invalid("max_iter", "must be >= 1"));
        }
        Ok(())
    }
}

/// Result of one harmonic Huber fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmFit {
    /// Cosine and sine amplitudes.
    pub beta: [f64; 2],
    pub iterations: usize,
    pub converged: bool,
}

impl AdmmFit {
    pub fn norm_sqr(&self) -> f64 {
        self.beta[0] * self.beta[0] + self.beta[1] * self.beta[1]
    }
}

/// `S_κ(v)`: zero inside `[-κ, κ]`, shrunk toward zero by `κ` outside.
pub fn soft_threshold(v: f64, kappa: f64) -> f64 {
    if v.abs() <= kappa {
        0.0
    } else {
        v - kappa * v.signum()
    }
}

/// Huber loss with threshold `zeta`.
pub fn huber_loss(r: f64, zeta: f64) -> f64 {
    let a = r.abs();
    if a <= zeta {
        0.5 * r * r
    } else {
        zeta * a - 0.5 * zeta * zeta
    }
}

/// `cos(2π m / len)` and `sin(2π m / len)` for `m = 0..len`, so the regressor
/// at frequency `k` and time `t` is read at `(k t) mod len` without trig calls.
#[derive(Debug, Clone)]
pub(crate) struct HarmonicTable {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl HarmonicTable {
    pub(crate) fn new(len: usize) -> Self {
        let step = 2.0 * std::f64::consts::PI / len as f64;
        let (cos, sin) = (0..len)
            .map(|m| {
                let a = step * m as f64;
                (a.cos(), a.sin())
            })
            .unzip();
        Self { cos, sin }
    }

    fn len(&self) -> usize {
        self.cos.len()
    }

    fn columns(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut c = Vec::with_capacity(n);
        let mut s = Vec::with_capacity(n);
        let mut m = 0usize;
        for _ in 0..n {
            c.push(self.cos[m]);
            s.push(self.sin[m]);
            m += k;
            if m >= n {
                m -= n;
            }
        }
        (c, s)
    }
}

/// Fits `x ≈ β₀ cos(2πkt/N') + β₁ sin(2πkt/N')` under Huber loss by ADMM,
/// starting from `z = u = 0`.
pub fn admm_huber_fit(x: &[f64], k: usize, cfg: &AdmmConfig) -> Result<AdmmFit> {
    cfg.validate()?;
    check_frequency(x.len(), k)?;
    let table = HarmonicTable::new(x.len());
    Ok(fit_with_table(x, k, cfg, &table, None))
}

/// As [`admm_huber_fit`], also returning the Huber objective of `φβ - x`
/// after every iteration.
pub fn admm_huber_fit_traced(x: &[f64], k: usize, cfg: &AdmmConfig) -> Result<(AdmmFit, Vec<f64>)> {
    cfg.validate()?;
    check_frequency(x.len(), k)?;
    let table = HarmonicTable::new(x.len());
    let mut trace = Vec::new();
    let fit = fit_with_table(
        x,
        k,
        cfg,
        &table,
        Some(&mut |obj, _: &[f64], _: &[f64]| trace.push(obj)),
    );
    Ok((fit, trace))
}

fn check_frequency(len: usize, k: usize) -> Result<()> {
    if k == 0 || 2 * k >= len {
        return Err(Error::DegenerateFrequency { k, len });
    }
    Ok(())
}

/// Receives the objective, `z` and `u` after every iteration.
pub(crate) type Observer<'a> = &'a mut dyn FnMut(f64, &[f64], &[f64]);

pub(crate) fn fit_with_table(
    x: &[f64],
    k: usize,
    cfg: &AdmmConfig,
    table: &HarmonicTable,
    mut observer: Option<Observer<'_>>,
) -> AdmmFit {
    let n = x.len();
    let (c, s) = table.columns(k);

    // (φᵀφ)⁻¹ as an exact 2×2 inverse
    let scc: f64 = c.iter().map(|v| v * v).sum();
    let sss: f64 = s.iter().map(|v| v * v).sum();
    let scs: f64 = c.iter().zip(&s).map(|(a, b)| a * b).sum();
    let det = scc * sss - scs * scs;
    let inv = [sss / det, -scs / det, scc / det];

    let rho = cfg.rho;
    let kappa = cfg.zeta * (1.0 + rho) / rho;
    let w_lin = rho / (1.0 + rho);
    let w_thr = 1.0 / (1.0 + rho);
    let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sqrt_n = (n as f64).sqrt();

    let mut z = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut beta = [0.0; 2];
    let mut converged = false;
    let mut iterations = 0;

    // φᵀ(z + x - u), carried over from the previous sweep
    let (mut a, mut b) = (0.0, 0.0);
    for t in 0..n {
        a += c[t] * x[t];
        b += s[t] * x[t];
    }

    for it in 1..=cfg.max_iter {
        iterations = it;
        beta = [inv[0] * a + inv[1] * b, inv[1] * a + inv[2] * b];
        (a, b) = (0.0, 0.0);

        let (mut dz_c, mut dz_s) = (0.0, 0.0);
        let (mut u_c, mut u_s) = (0.0, 0.0);
        let (mut r2, mut fit2, mut z2) = (0.0, 0.0, 0.0);
        let mut objective = 0.0;
        let track = observer.is_some();
        let cols = c.iter().zip(&s);
        for (((&ct, &st), &xt), (zt, ut)) in cols.zip(x).zip(z.iter_mut().zip(u.iter_mut())) {
            let fit = ct * beta[0] + st * beta[1];
            let v = fit + *ut - xt;
            let z_new = w_lin * v + w_thr * soft_threshold(v, kappa);
            let dz = z_new - *zt;
            dz_c += ct * dz;
            dz_s += st * dz;
            *zt = z_new;
            let r = fit - z_new - xt;
            *ut += r;
            u_c += ct * *ut;
            u_s += st * *ut;
            let next = z_new + xt - *ut;
            a += ct * next;
            b += st * next;
            r2 += r * r;
            fit2 += fit * fit;
            z2 += z_new * z_new;
            if track {
                objective += huber_loss(fit - xt, cfg.zeta);
            }
        }
        // observer sees (objective at β^{k+1}, z^{k+1}, u^{k+1})
        if let Some(obs) = observer.as_deref_mut() {
            obs(objective, &z, &u);
        }

        let primal = r2.sqrt();
        let dual = rho * (dz_c * dz_c + dz_s * dz_s).sqrt();
        let eps_pri = sqrt_n * cfg.eps_abs + cfg.eps_rel * fit2.sqrt().max(z2.sqrt()).max(x_norm);
        let eps_dual = std::f64::consts::SQRT_2 * cfg.eps_abs
            + cfg.eps_rel * rho * (u_c * u_c + u_s * u_s).sqrt();
        if primal <= eps_pri && dual <= eps_dual {
            converged = true;
            break;
        }
    }

    AdmmFit {
        beta,
        iterations,
        converged,
    }
}
