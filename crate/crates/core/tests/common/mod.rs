//! Exact `F_2` at finite `n` by a Hermite-type recursion, used only as a
//! test oracle.
//!
//! `F_2 = Σ_k n! / ((n-2k)! k!) (2 a_2)^k G_{n-2k}(λ1, λ2)` with
//! `G_N = N σ² G_{N-1} + π_N(λ1) π_N(λ2)`, `σ² = 1/n`, and the monic
//! Hermite recursion `π_{k+1} = x π_k - k σ² π_{k-1}`.
#![allow(dead_code)]

/// `m · 2^e` with `0.5 <= |m| < 1`.
#[derive(Debug, Clone, Copy)]
pub struct Ext {
    m: f64,
    e: i64,
}

impl Ext {
    pub const ZERO: Ext = Ext { m: 0.0, e: 0 };

    pub fn new(m: f64, e: i64) -> Ext {
        if m == 0.0 || !m.is_finite() {
            return Ext { m, e: 0 };
        }
        let k = m.abs().log2().floor() as i64 + 1;
        Ext { m: m * 2f64.powi(-k as i32), e: e + k }
    }

    pub fn from(x: f64) -> Ext {
        Ext::new(x, 0)
    }

    pub fn mul(self, o: Ext) -> Ext {
        Ext::new(self.m * o.m, self.e + o.e)
    }

    pub fn scale(self, s: f64) -> Ext {
        Ext::new(self.m * s, self.e)
    }

    pub fn add(self, o: Ext) -> Ext {
        if self.m == 0.0 {
            return o;
        }
        if o.m == 0.0 {
            return self;
        }
        let (a, b) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = a.e - b.e;
        if d > 1100 {
            return a;
        }
        Ext::new(a.m + b.m * 2f64.powi(-d as i32), a.e)
    }

    pub fn sign(self) -> f64 {
        self.m.signum()
    }

    pub fn ln_abs(self) -> f64 {
        self.m.abs().ln() + self.e as f64 * std::f64::consts::LN_2
    }
}

fn hermite_g(n: usize, l1: f64, l2: f64, upto: usize) -> Vec<Ext> {
    let s2 = 1.0 / n as f64;
    let mut p1 = (Ext::from(1.0), Ext::ZERO);
    let mut p2 = (Ext::from(1.0), Ext::ZERO);
    let mut g = vec![Ext::from(1.0)];
    for k in 0..upto {
        let next = |p: (Ext, Ext), x: f64| p.0.scale(x).add(p.1.scale(-(k as f64) * s2));
        let n1 = next(p1, l1);
        let n2 = next(p2, l2);
        p1 = (n1, p1.0);
        p2 = (n2, p2.0);
        let nn = (k + 1) as f64;
        let gk = g[k].scale(nn * s2).add(n1.mul(n2));
        g.push(gk);
    }
    g
}

/// Exact `F_2(λ1, λ2)` as `(sign, ln |F_2|)`.
pub fn exact_f2(n: usize, p: f64, l1: f64, l2: f64) -> (f64, f64) {
    let nf = n as f64;
    let two_a2 = 1.0 / (p * nf) - 1.0 / (nf * nf);
    let g = hermite_g(n, l1, l2, n);
    let mut coef = Ext::from(1.0);
    let mut total = Ext::ZERO;
    for k in 0..=n / 2 {
        total = total.add(coef.mul(g[n - 2 * k]));
        if 2 * (k + 1) <= n {
            coef = coef.scale(((n - 2 * k) * (n - 2 * k - 1)) as f64 / (k + 1) as f64 * two_a2);
        }
    }
    (total.sign(), total.ln_abs())
}

/// `F_2` in the window `λ_j = λ0 + x_j / n`.
pub fn exact_f2_window(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64) -> (f64, f64) {
    exact_f2(n, p, lambda0 + x1 / n as f64, lambda0 + x2 / n as f64)
}

/// Exact `D_2` in the window.
pub fn exact_d2(n: usize, p: f64, lambda0: f64, x1: f64, x2: f64) -> f64 {
    let (s, l) = exact_f2_window(n, p, lambda0, x1, x2);
    let (_, a) = exact_f2_window(n, p, lambda0, x1, x1);
    let (_, b) = exact_f2_window(n, p, lambda0, x2, x2);
    s * (l - 0.5 * (a + b)).exp()
}

/// Second-moment expansion at `n = 2`, valid for `p <= 2`.
pub fn wick_n2(p: f64, l1: f64, l2: f64) -> f64 {
    (0.5 + l1 * l2).powi(2) - (l1 * l1 + l2 * l2) / 2.0 + 1.0 / p
}
