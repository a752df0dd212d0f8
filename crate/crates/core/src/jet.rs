//! Truncated Taylor expansions ("jets") of smooth functions on a chart.
//!
//! A jet of dimension `m` and depth `d` records all coefficients of a power
//! series in the `2m` formal variables `z_1..z_m, zb_1..zb_m` up to total
//! degree `d`, centered at some chart point. The holomorphic and
//! anti-holomorphic coordinates are treated as independent variables; nothing
//! in this module assumes `zb_k` is the conjugate of `z_k`.
//!
//! Arithmetic is exact truncation arithmetic: a product of two depth-`d` jets
//! is the true product with every term of degree `> d` discarded, and a
//! derivative of a depth-`d` jet is a depth-`d-1` jet. There is no iteration
//! or tolerance anywhere in this module.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JetError {
    #[error("jet dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("jet depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("cannot differentiate a jet of depth 0")]
    DepthExhausted,
    #[error("variable index {index} out of range for dimension {m}")]
    VariableOutOfRange { index: usize, m: usize },
    #[error("singular constant term")]
    SingularConstantTerm,
}

/// Direction of a single partial derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    /// d/dz_p, zero-based coordinate index.
    Holo(usize),
    /// d/dzb_q, zero-based coordinate index.
    AntiHolo(usize),
}

/// Monomial basis shared by all jets of one dimension and depth.
///
/// Exponent vectors have length `2m`: entries `0..m` are holomorphic
/// exponents, entries `m..2m` anti-holomorphic. Monomials are ordered by
/// total degree and then lexicographically, so the monomials of degree
/// `<= d'` form a prefix for every `d' <= d`.
pub struct JetSpace {
    m: usize,
    depth: usize,
    exps: Vec<Box<[u8]>>,
    index: HashMap<Box<[u8]>, u32>,
}

impl JetSpace {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    fn position(&self, exp: &[u8]) -> Option<usize> {
        self.index.get(exp).map(|&i| i as usize)
    }
}

fn enumerate_degree(vars: usize, degree: usize, out: &mut Vec<Box<[u8]>>) {
    fn rec(prefix: &mut Vec<u8>, remaining_vars: usize, remaining_deg: usize, out: &mut Vec<Box<[u8]>>) {
        if remaining_vars == 1 {
            prefix.push(remaining_deg as u8);
            out.push(prefix.clone().into_boxed_slice());
            prefix.pop();
            return;
        }
        for d in (0..=remaining_deg).rev() {
            prefix.push(d as u8);
            rec(prefix, remaining_vars - 1, remaining_deg - d, out);
            prefix.pop();
        }
    }
    if vars == 0 {
        if degree == 0 {
            out.push(Vec::new().into_boxed_slice());
        }
        return;
    }
    rec(&mut Vec::with_capacity(vars), vars, degree, out);
}

static SPACES: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();

/// Shared basis for jets of dimension `m` and depth `depth`.
pub fn jet_space(m: usize, depth: usize) -> Arc<JetSpace> {
    let cache = SPACES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().unwrap();
    cache
        .entry((m, depth))
        .or_insert_with(|| {
            let mut exps = Vec::new();
            for deg in 0..=depth {
                enumerate_degree(2 * m, deg, &mut exps);
            }
            let index = exps
                .iter()
                .enumerate()
                .map(|(i, e)| (e.clone(), i as u32))
                .collect();
            Arc::new(JetSpace { m, depth, exps, index })
        })
        .clone()
}

/// Truncated power series in `z_1..z_m, zb_1..zb_m` with complex
/// coefficients, exact through total degree `depth`.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn zero(m: usize, depth: usize) -> Jet {
        let space = jet_space(m, depth);
        let n = space.len();
        Jet { space, coeffs: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn constant(m: usize, depth: usize, value: Complex64) -> Jet {
        let mut jet = Jet::zero(m, depth);
        jet.coeffs[0] = value;
        jet
    }

    /// The coordinate function `z_p` (or `zb_p`) expanded at a point with the
    /// given center value: `value + (variable - center)`.
    pub fn coordinate(m: usize, depth: usize, dir: Dir, value: Complex64) -> Result<Jet, JetError> {
        let var = match dir {
            Dir::Holo(p) if p < m => p,
            Dir::AntiHolo(q) if q < m => m + q,
            Dir::Holo(p) => return Err(JetError::VariableOutOfRange { index: p, m }),
            Dir::AntiHolo(q) => return Err(JetError::VariableOutOfRange { index: q, m }),
        };
        let mut jet = Jet::zero(m, depth);
        jet.coeffs[0] = value;
        if depth >= 1 {
            let mut exp = vec![0u8; 2 * m];
            exp[var] = 1;
            let i = jet.space.position(&exp).expect("degree-1 monomial present");
            jet.coeffs[i] = Complex64::new(1.0, 0.0);
        }
        Ok(jet)
    }

    pub fn m(&self) -> usize {
        self.space.m
    }

    pub fn depth(&self) -> usize {
        self.space.depth
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of the monomial with holomorphic exponents `alpha` and
    /// anti-holomorphic exponents `beta`.
    pub fn coefficient(&self, alpha: &[u8], beta: &[u8]) -> Option<Complex64> {
        if alpha.len() != self.m() || beta.len() != self.m() {
            return None;
        }
        let mut exp = Vec::with_capacity(2 * self.m());
        exp.extend_from_slice(alpha);
        exp.extend_from_slice(beta);
        self.space.position(&exp).map(|i| self.coeffs[i])
    }

    /// Value at the center of expansion.
    pub fn eval_center(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.m() != other.m() {
            return Err(JetError::DimensionMismatch(self.m(), other.m()));
        }
        if self.depth() != other.depth() {
            return Err(JetError::DepthMismatch(self.depth(), other.depth()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Jet { space: self.space.clone(), coeffs })
    }

    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.compatible(other)?;
        let depth = self.depth();
        let mut out = vec![Complex64::new(0.0, 0.0); self.space.len()];
        let mut exp = vec![0u8; 2 * self.m()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let ea = self.space.exponents(i);
            let da: usize = ea.iter().map(|&x| x as usize).sum();
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                let eb = self.space.exponents(j);
                let db: usize = eb.iter().map(|&x| x as usize).sum();
                if da + db > depth {
                    // other's monomials are graded; all later j are no smaller in degree
                    // only within one degree block, so we cannot break early here.
                    continue;
                }
                for (k, slot) in exp.iter_mut().enumerate() {
                    *slot = ea[k] + eb[k];
                }
                let pos = self.space.position(&exp).expect("sum of exponents within depth");
                out[pos] += a * b;
            }
        }
        Ok(Jet { space: self.space.clone(), coeffs: out })
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Jet { space: self.space.clone(), coeffs }
    }

    /// Partial derivative. The result is one depth shallower: the discarded
    /// top-degree coefficients of `self` would be needed to know the top
    /// degree of the derivative.
    pub fn derive(&self, dir: Dir) -> Result<Jet, JetError> {
        if self.depth() == 0 {
            return Err(JetError::DepthExhausted);
        }
        let m = self.m();
        let var = match dir {
            Dir::Holo(p) if p < m => p,
            Dir::AntiHolo(q) if q < m => m + q,
            Dir::Holo(p) => return Err(JetError::VariableOutOfRange { index: p, m }),
            Dir::AntiHolo(q) => return Err(JetError::VariableOutOfRange { index: q, m }),
        };
        let target = jet_space(m, self.depth() - 1);
        let mut out = vec![Complex64::new(0.0, 0.0); target.len()];
        let mut exp = vec![0u8; 2 * m];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let e = self.space.exponents(i);
            if e[var] == 0 {
                continue;
            }
            exp.copy_from_slice(e);
            exp[var] -= 1;
            let pos = target.position(&exp).expect("lowered exponent within depth-1");
            out[pos] += c * (e[var] as f64);
        }
        Ok(Jet { space: target, coeffs: out })
    }

    /// Iterated derivative: `alpha` holomorphic orders then `beta`
    /// anti-holomorphic orders, one multi-index entry per coordinate.
    pub fn derive_multi(&self, alpha: &[u32], beta: &[u32]) -> Result<Jet, JetError> {
        let mut jet = self.clone();
        for (p, &count) in alpha.iter().enumerate() {
            for _ in 0..count {
                jet = jet.derive(Dir::Holo(p))?;
            }
        }
        for (q, &count) in beta.iter().enumerate() {
            for _ in 0..count {
                jet = jet.derive(Dir::AntiHolo(q))?;
            }
        }
        Ok(jet)
    }

    /// Restriction to a smaller depth; monomials of degree `<= d` are a
    /// prefix of the basis, so this is a truncating copy.
    pub fn truncate(&self, d: usize) -> Jet {
        assert!(d <= self.depth(), "truncate cannot deepen a jet");
        if d == self.depth() {
            return self.clone();
        }
        let space = jet_space(self.m(), d);
        let coeffs = self.coeffs[..space.len()].to_vec();
        Jet { space, coeffs }
    }

    /// Positive part: `self` minus its constant term. Nilpotent to order
    /// `depth + 1` in truncation arithmetic.
    fn nilpotent_part(&self) -> Jet {
        let mut jet = self.clone();
        jet.coeffs[0] = Complex64::new(0.0, 0.0);
        jet
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Result<Jet, JetError> {
        let c = self.coeffs[0];
        if c.norm() == 0.0 {
            return Err(JetError::SingularConstantTerm);
        }
        let x = self.nilpotent_part().scale(c.inv());
        // 1/(c(1+x)) = (1/c) sum (-x)^j
        let mut sum = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        let mut power = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        for _ in 1..=self.depth() {
            power = power.checked_mul(&x)?.scale(Complex64::new(-1.0, 0.0));
            sum = sum.checked_add(&power)?;
        }
        Ok(sum.scale(c.inv()))
    }

    /// Principal-branch logarithm; requires a nonzero constant term.
    pub fn ln(&self) -> Result<Jet, JetError> {
        let c = self.coeffs[0];
        if c.norm() == 0.0 {
            return Err(JetError::SingularConstantTerm);
        }
        let x = self.nilpotent_part().scale(c.inv());
        // ln(c(1+x)) = ln c + sum_{j>=1} (-1)^{j+1} x^j / j
        let mut sum = Jet::constant(self.m(), self.depth(), c.ln());
        let mut power = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        let mut sign = 1.0;
        for j in 1..=self.depth() {
            power = power.checked_mul(&x)?;
            sum = sum.checked_add(&power.scale(Complex64::new(sign / j as f64, 0.0)))?;
            sign = -sign;
        }
        Ok(sum)
    }

    pub fn exp(&self) -> Result<Jet, JetError> {
        let c = self.coeffs[0];
        let x = self.nilpotent_part();
        let mut sum = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        let mut power = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        let mut factorial = 1.0;
        for j in 1..=self.depth() {
            power = power.checked_mul(&x)?;
            factorial *= j as f64;
            sum = sum.checked_add(&power.scale(Complex64::new(1.0 / factorial, 0.0)))?;
        }
        Ok(sum.scale(c.exp()))
    }

    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut result = Jet::constant(self.m(), self.depth(), Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut n = n as u64;
        while n > 0 {
            if n & 1 == 1 {
                result = result.checked_mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(result)
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.m() == other.m() && self.depth() == other.depth() && self.coeffs == other.coeffs
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(m={}, depth={};", self.m(), self.depth())?;
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let sep = if first { " " } else { " + " };
            first = false;
            write!(f, "{sep}({:.6}{:+.6}i)*{:?}", c.re, c.im, self.space.exponents(i))?;
        }
        if first {
            write!(f, " 0")?;
        }
        write!(f, ")")
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet addition shape mismatch")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs).expect("jet subtraction shape mismatch")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet multiplication shape mismatch")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

/// Square matrix of jets sharing one space; used for the metric and its
/// inverse.
#[derive(Clone, PartialEq)]
#[derive(Debug)]
pub struct JetMatrix {
    m: usize,
    entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_entries(m: usize, entries: Vec<Jet>) -> Result<JetMatrix, JetError> {
        assert_eq!(entries.len(), m * m, "matrix must have m*m entries");
        for e in &entries {
            entries[0].compatible(e)?;
        }
        Ok(JetMatrix { m, entries })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn depth(&self) -> usize {
        self.entries[0].depth()
    }

    pub fn entry(&self, row: usize, col: usize) -> &Jet {
        &self.entries[row * self.m + col]
    }

    pub fn identity(m: usize, jet_dim: usize, depth: usize) -> JetMatrix {
        let mut entries = Vec::with_capacity(m * m);
        for r in 0..m {
            for c in 0..m {
                let v = if r == c { 1.0 } else { 0.0 };
                entries.push(Jet::constant(jet_dim, depth, Complex64::new(v, 0.0)));
            }
        }
        JetMatrix { m, entries }
    }

    pub fn mul(&self, other: &JetMatrix) -> Result<JetMatrix, JetError> {
        assert_eq!(self.m, other.m, "matrix size mismatch");
        let mut entries = Vec::with_capacity(self.m * self.m);
        for r in 0..self.m {
            for c in 0..self.m {
                let mut acc = self.entry(r, 0).checked_mul(other.entry(0, c))?;
                for t in 1..self.m {
                    acc = acc.checked_add(&self.entry(r, t).checked_mul(other.entry(t, c))?)?;
                }
                entries.push(acc);
            }
        }
        Ok(JetMatrix { m: self.m, entries })
    }

    /// Inverse in truncation arithmetic, solved degree by degree: the
    /// constant-term matrix is LU-factored once, then each monomial's
    /// coefficient matrix is obtained by forward substitution over the graded
    /// basis. Exact truncation semantics, no iteration tolerance.
    pub fn inverse(&self) -> Result<JetMatrix, JetError> {
        let m = self.m;
        let space = self.entries[0].space().clone();
        let lu = Lu::factor(m, |r, c| self.entry(r, c).coeffs[0])?;

        // x[pos] is the m*m coefficient matrix of monomial `pos` of the inverse.
        let n_mon = space.len();
        let mut x: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); m * m]; n_mon];
        let mut scratch_exp = vec![0u8; 2 * m];
        for pos in 0..n_mon {
            // rhs = [pos == constant] * I - sum_{nu + rho = pos, nu != 0} G[nu] * X[rho]
            let mut rhs = vec![Complex64::new(0.0, 0.0); m * m];
            if pos == 0 {
                for d in 0..m {
                    rhs[d * m + d] = Complex64::new(1.0, 0.0);
                }
            }
            let target = space.exponents(pos).to_vec();
            for nu in 1..n_mon {
                let enu = space.exponents(nu);
                if !exp_le(enu, &target) {
                    continue;
                }
                for (k, slot) in scratch_exp.iter_mut().enumerate() {
                    *slot = target[k] - enu[k];
                }
                let rho = space.position(&scratch_exp).expect("difference exponent in basis");
                for r in 0..m {
                    for c in 0..m {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for t in 0..m {
                            acc += self.entry(r, t).coeffs[nu] * x[rho][t * m + c];
                        }
                        rhs[r * m + c] -= acc;
                    }
                }
            }
            for c in 0..m {
                let col: Vec<Complex64> = (0..m).map(|r| rhs[r * m + c]).collect();
                let solved = lu.solve(&col);
                for r in 0..m {
                    x[pos][r * m + c] = solved[r];
                }
            }
        }

        let mut entries = Vec::with_capacity(m * m);
        for r in 0..m {
            for c in 0..m {
                let coeffs = (0..n_mon).map(|pos| x[pos][r * m + c]).collect();
                entries.push(Jet { space: space.clone(), coeffs });
            }
        }
        Ok(JetMatrix { m, entries })
    }
}

fn exp_le(a: &[u8], b: &[u8]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// LU factorization with partial pivoting for the constant-term matrix.
struct Lu {
    m: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(m: usize, entry: impl Fn(usize, usize) -> Complex64) -> Result<Lu, JetError> {
        let mut a: Vec<Complex64> = (0..m * m).map(|i| entry(i / m, i % m)).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let (pivot_row, pivot_norm) = (k..m)
                .map(|r| (r, a[r * m + k].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if pivot_norm < 1e-14 {
                return Err(JetError::SingularConstantTerm);
            }
            if pivot_row != k {
                for c in 0..m {
                    a.swap(k * m + c, pivot_row * m + c);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = a[k * m + k];
            for r in k + 1..m {
                let factor = a[r * m + k] / pivot;
                a[r * m + k] = factor;
                for c in k + 1..m {
                    let sub = factor * a[k * m + c];
                    a[r * m + c] -= sub;
                }
            }
        }
        Ok(Lu { m, lu: a, perm })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let m = self.m;
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 1..m {
            for c in 0..r {
                let sub = self.lu[r * m + c] * y[c];
                y[r] -= sub;
            }
        }
        for r in (0..m).rev() {
            for c in r + 1..m {
                let sub = self.lu[r * m + c] * y[c];
                y[r] -= sub;
            }
            y[r] /= self.lu[r * m + r];
        }
        y
    }
}
