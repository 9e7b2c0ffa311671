//! Reference computations that share no code with the library: double-double
//! Bessel series, Gauss-Legendre nodes by Newton iteration, the Lommel form of
//! the stored spin norm, and a Fourier-space evaluation of the sinc kernel.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        quick_two_sum(s, e + self.lo + o.lo)
    }

    pub fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi;
        quick_two_sum(p, e)
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = q1 * b;
        let pe = q1.mul_add(b, -p);
        let (r, re) = two_sum(self.hi, -p);
        let r = r + (re - pe + self.lo);
        quick_two_sum(q1, r / b)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `J0` and `J1` from their power series in double-double arithmetic.
pub fn bessel_series(x: f64) -> (f64, f64) {
    let q = Dd {
        hi: -x * x,
        lo: -x.mul_add(x, -x * x),
    }
    .mul(Dd::new(0.25));
    let (mut t0, mut t1) = (Dd::new(1.0), Dd::new(1.0));
    let (mut s0, mut s1) = (t0, t1);
    let mut k = 1.0;
    loop {
        t0 = t0.mul(q).div_f64(k * k);
        t1 = t1.mul(q).div_f64(k * (k + 1.0));
        s0 = s0.add(t0);
        s1 = s1.add(t1);
        if k > x.abs() && t0.hi.abs() < 1e-34 && t1.hi.abs() < 1e-34 {
            break;
        }
        k += 1.0;
    }
    (s0.to_f64(), s1.mul(Dd::new(0.5 * x)).to_f64())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Composite rule on `[a, b]` with `panels` equal panels of `n` nodes.
pub fn composite(a: f64, b: f64, panels: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x0, w0) = gauss_legendre(n);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * n);
    let mut ws = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in x0.iter().zip(&w0) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Difference-of-Gaussians boundary pulse with `tau_p = 1`, centred at 3.
pub fn pulse0(t: f64, nu0: f64, beta: f64, detuned: bool) -> Complex64 {
    if t <= 0.0 {
        return Complex64::default();
    }
    let env = (-(t - 3.0).powi(2)).exp() - (-(t + 3.0).powi(2)).exp();
    if detuned {
        Complex64::from_polar(env, nu0 * beta.cos().powi(2) * t)
    } else {
        Complex64::new(env, 0.0)
    }
}

/// Last time at which the pulse is non-negligible.
pub const PULSE_END: f64 = 9.0;

pub fn pulse_energy() -> f64 {
    let (xs, ws) = composite(0.0, PULSE_END, 36, 16);
    xs.iter().zip(&ws).map(|(&t, &w)| w * pulse0(t, 0.0, 0.0, false).norm_sqr()).sum()
}

/// `∫_0^{zeta_L} |Upsilon(zeta, tau)|^2 dzeta` from the Lommel integral of a
/// product of two `J0`, as a double integral over the pulse.
pub fn lommel_norm(nu0: f64, beta: f64, zeta_l: f64, tau: f64, detuned: bool) -> f64 {
    let (s, c) = beta.sin_cos();
    let a = nu0 * s * c;
    let hi = tau.min(PULSE_END);
    if hi <= 0.0 || a == 0.0 {
        return 0.0;
    }
    let panels = ((hi * (1.0 + a.abs() * (zeta_l / tau.max(1e-300)).sqrt() + nu0.abs())).ceil() as usize).max(8) * 2;
    let (xs, ws) = composite(0.0, hi, panels, 16);
    let n = xs.len();
    let g: Vec<Complex64> = xs
        .iter()
        .zip(&ws)
        .map(|(&t, &w)| pulse0(t, nu0, beta, detuned) * Complex64::from_polar(w, -nu0 * c * c * t))
        .collect();
    let su: Vec<f64> = xs.iter().map(|&t| (tau - t).sqrt()).collect();
    let jj: Vec<(f64, f64)> = su.iter().map(|&r| bessel_series(2.0 * a * zeta_l.sqrt() * r)).collect();
    let pre = a * zeta_l.sqrt();
    let mut total = 0.0;
    for p in 0..n {
        let (j0p, j1p) = jj[p];
        total += g[p].norm_sqr() * pre * pre * (j0p * j0p + j1p * j1p);
        for q in 0..p {
            let (j0q, j1q) = jj[q];
            let k = pre * (su[q] * j0p * j1q - su[p] * j0q * j1p) / (xs[p] - xs[q]);
            total += 2.0 * (g[p] * g[q].conj()).re * k;
        }
    }
    total
}

/// Sinc-kernel double integral evaluated in frequency space,
/// `(1/2pi) ∫_{-k}^{k} |∫ g(t) e^{i w t} dt|^2 dw`.
pub fn sinc_norm_fourier(nu0: f64, beta: f64, zeta_l: f64, tau: f64, detuned: bool) -> f64 {
    let c2 = beta.cos().powi(2);
    let k = (nu0 * beta.sin() * beta.cos()).abs() * (zeta_l / tau).sqrt();
    let hi = tau.min(PULSE_END);
    let (ts, wt) = composite(0.0, hi, 96, 20);
    let g: Vec<Complex64> = ts
        .iter()
        .zip(&wt)
        .map(|(&t, &w)| pulse0(t, nu0, beta, detuned) * Complex64::from_polar(w, -nu0 * c2 * t))
        .collect();
    let panels = ((8.0 * k * hi).ceil() as usize).max(16);
    let (om, wo) = composite(-k, k, panels, 16);
    let mut total = 0.0;
    for (&w, &ww) in om.iter().zip(&wo) {
        let gw: Complex64 = ts.iter().zip(&g).map(|(&t, &v)| v * Complex64::from_polar(1.0, w * t)).sum();
        total += ww * gw.norm_sqr();
    }
    total / (2.0 * PI)
}
