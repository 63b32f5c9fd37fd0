//! Closed-form pieces `p(tau) + sum_j c_j exp(r_j tau)` on a local time axis.
//!
//! Every control segment, its angle trajectory, their squares and the
//! difference of two segments fall in this class, so integrals and sign
//! changes can be computed without sampling.

/// `poly[0] + poly[1] tau + ... + sum c exp(r tau)`. Exponential rates are
/// nonzero and pairwise distinct.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Piece {
    pub poly: Vec<f64>,
    pub exps: Vec<(f64, f64)>,
}

impl Piece {
    pub fn poly(coeffs: &[f64]) -> Self {
        Piece {
            poly: coeffs.to_vec(),
            exps: Vec::new(),
        }
        .normalized()
    }

    pub fn exp(coeff: f64, rate: f64) -> Self {
        Piece {
            poly: Vec::new(),
            exps: vec![(coeff, rate)],
        }
        .normalized()
    }

    fn normalized(mut self) -> Self {
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.exps.len());
        for &(c, r) in &self.exps {
            if r == 0.0 {
                if self.poly.is_empty() {
                    self.poly.push(0.0);
                }
                self.poly[0] += c;
            } else if let Some(slot) = merged.iter_mut().find(|(_, r2)| *r2 == r) {
                slot.0 += c;
            } else {
                merged.push((c, r));
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        self.exps = merged;
        while self.poly.len() > 1 && *self.poly.last().unwrap() == 0.0 {
            self.poly.pop();
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    pub fn eval(&self, tau: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, &c| acc * tau + c);
        p + self.exps.iter().map(|&(c, r)| c * (r * tau).exp()).sum::<f64>()
    }

    pub fn derivative(&self) -> Piece {
        let poly: Vec<f64> = self
            .poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Piece {
            poly,
            exps: self.exps.iter().map(|&(c, r)| (c * r, r)).collect(),
        }
        .normalized()
    }

    /// Antiderivative vanishing at `tau = 0`, plus `constant`.
    pub fn antiderivative(&self, constant: f64) -> Piece {
        let mut poly = Vec::with_capacity(self.poly.len() + 1);
        poly.push(constant);
        for (i, &c) in self.poly.iter().enumerate() {
            poly.push(c / (i + 1) as f64);
        }
        let mut exps = Vec::with_capacity(self.exps.len());
        for &(c, r) in &self.exps {
            poly[0] -= c / r;
            exps.push((c / r, r));
        }
        Piece { poly, exps }.normalized()
    }

    /// `int_0^d f`, evaluated with `expm1` for the exponential terms.
    pub fn integral(&self, d: f64) -> f64 {
        let p: f64 = self
            .poly
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * d + c / (i + 1) as f64)
            * d;
        p + self
            .exps
            .iter()
            .map(|&(c, r)| c * (r * d).exp_m1() / r)
            .sum::<f64>()
    }

    /// `g(tau) = f(tau + delta)`.
    pub fn shifted(&self, delta: f64) -> Piece {
        // Taylor shift by repeated synthetic division.
        let mut poly = self.poly.clone();
        let n = poly.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                poly[j] += delta * poly[j + 1];
            }
        }
        Piece {
            poly,
            exps: self.exps.iter().map(|&(c, r)| (c * (r * delta).exp(), r)).collect(),
        }
        .normalized()
    }

    pub fn sub(&self, other: &Piece) -> Piece {
        let n = self.poly.len().max(other.poly.len());
        let poly = (0..n)
            .map(|i| self.poly.get(i).copied().unwrap_or(0.0) - other.poly.get(i).copied().unwrap_or(0.0))
            .collect();
        let mut exps = self.exps.clone();
        exps.extend(other.exps.iter().map(|&(c, r)| (-c, r)));
        Piece { poly, exps }.normalized()
    }

    /// Square of the piece. Products of a non-constant polynomial with an
    /// exponential never arise from control segments and are rejected.
    pub fn square(&self) -> Piece {
        assert!(
            self.exps.is_empty() || self.degree() == 0,
            "square of polynomial-times-exponential is outside the supported class"
        );
        let n = self.poly.len();
        let mut poly = vec![0.0; (2 * n).saturating_sub(1)];
        for i in 0..n {
            for j in 0..n {
                poly[i + j] += self.poly[i] * self.poly[j];
            }
        }
        let c0 = self.poly.first().copied().unwrap_or(0.0);
        let mut exps = Vec::new();
        for &(c, r) in &self.exps {
            exps.push((2.0 * c0 * c, r));
        }
        for &(c1, r1) in &self.exps {
            for &(c2, r2) in &self.exps {
                exps.push((c1 * c2, r1 + r2));
            }
        }
        Piece { poly, exps }.normalized()
    }

    /// Interior points of `(0, len)` splitting the piece into monotone parts.
    fn critical_points(&self, len: f64) -> Vec<f64> {
        let d = self.derivative();
        let mut out = Vec::new();
        match (d.degree(), d.exps.len()) {
            (_, 0) if d.poly.len() <= 2 => {
                if d.poly.len() == 2 && d.poly[1] != 0.0 {
                    out.push(-d.poly[0] / d.poly[1]);
                }
            }
            (0, 1) => {
                // b + c exp(r tau) = 0
                let b = d.poly.first().copied().unwrap_or(0.0);
                let (c, r) = d.exps[0];
                let ratio = -b / c;
                if ratio > 0.0 {
                    out.push(ratio.ln() / r);
                }
            }
            (0, 2) if d.poly.first().copied().unwrap_or(0.0) == 0.0 => {
                let (c1, r1) = d.exps[0];
                let (c2, r2) = d.exps[1];
                let ratio = -c2 / c1;
                if ratio > 0.0 {
                    out.push(ratio.ln() / (r1 - r2));
                }
            }
            _ => {
                // Outside the closed-form cases: sample densely for sign changes of f'.
                let n = 512;
                let mut prev = d.eval(0.0);
                for i in 1..=n {
                    let t = len * i as f64 / n as f64;
                    let cur = d.eval(t);
                    if prev.signum() != cur.signum() {
                        out.push(bisect(&d, len * (i - 1) as f64 / n as f64, t));
                    }
                    prev = cur;
                }
            }
        }
        out.retain(|t| t.is_finite() && *t > 0.0 && *t < len);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// `int_0^len |f|`, splitting at every sign change.
    pub fn abs_integral(&self, len: f64) -> f64 {
        let mut cuts = vec![0.0];
        let crit = self.critical_points(len);
        let mut knots = vec![0.0];
        knots.extend(crit);
        knots.push(len);
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                cuts.push(bisect(self, a, b));
            }
            cuts.push(b);
        }
        let anti = self.antiderivative(0.0);
        cuts.windows(2)
            .map(|w| (anti.eval(w[1]) - anti.eval(w[0])).abs())
            .sum()
    }
}

/// Root of a monotone piece with a sign change on `[a, b]`.
fn bisect(f: &Piece, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f.eval(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f.eval(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_matches_evaluation() {
        let p = Piece {
            poly: vec![1.0, -2.0, 0.5],
            exps: vec![(0.3, -1.2)],
        };
        let s = p.shifted(0.7);
        for t in [0.0, 0.3, 1.9] {
            assert!((s.eval(t) - p.eval(t + 0.7)).abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_and_integral_agree() {
        let p = Piece {
            poly: vec![0.2, 1.0],
            exps: vec![(2.0, 0.5), (-1.0, -3.0)],
        };
        let a = p.antiderivative(0.0);
        assert!((a.eval(1.3) - a.eval(0.0) - p.integral(1.3)).abs() < 1e-13);
    }

    #[test]
    fn abs_integral_of_line_crossing_zero() {
        // |tau - 1| on [0, 3] = 0.5 + 2
        let p = Piece::poly(&[-1.0, 1.0]);
        assert!((p.abs_integral(3.0) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn abs_integral_with_two_exponential_roots() {
        // exp(tau) - 2.5 tau - 0.2 has two roots on [0, 3]
        let p = Piece {
            poly: vec![-0.2, -2.5],
            exps: vec![(1.0, 1.0)],
        };
        let n = 2_000_000;
        let h = 3.0 / n as f64;
        let brute: f64 = (0..n).map(|i| p.eval((i as f64 + 0.5) * h).abs() * h).sum();
        assert!((p.abs_integral(3.0) - brute).abs() < 1e-9);
    }

    #[test]
    fn square_of_exponential_with_offset() {
        let p = Piece {
            poly: vec![0.4],
            exps: vec![(-0.3, -0.8)],
        };
        let sq = p.square();
        for t in [0.0, 0.5, 2.0] {
            assert!((sq.eval(t) - p.eval(t).powi(2)).abs() < 1e-14);
        }
    }
}
