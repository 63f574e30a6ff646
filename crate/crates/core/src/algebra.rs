//! Sparse complex polynomials, parameterized systems, and restriction of the
//! parameters to a general line.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Scalar used throughout: double-precision complex.
pub type C64 = Complex64;

/// Infinity norm of a complex vector.
pub fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// True when every component has finite real and imaginary parts.
pub fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// One term of a sparse polynomial: a coefficient and one exponent per
/// indeterminate of the ambient ring.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: C64,
    pub exponents: Vec<u32>,
}

fn cmp_exponents(a: &[u32], b: &[u32]) -> Ordering {
    // Lexicographic, descending when used as the sort key below.
    a.iter().cmp(b.iter())
}

/// Sparse multivariate polynomial over a fixed ordered list of indeterminate
/// names. Terms are held in canonical form: sorted, duplicate exponent tuples
/// merged, zero coefficients dropped. `PartialEq` is therefore structural.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    names: Vec<String>,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(names: Vec<String>, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != names.len() {
                return Err(Error::DimensionMismatch {
                    expected: names.len(),
                    got: t.exponents.len(),
                });
            }
            if !t.coeff.re.is_finite() || !t.coeff.im.is_finite() {
                return Err(Error::NonFinite("polynomial coefficient"));
            }
        }
        Ok(Self {
            names,
            terms: Self::normalize(terms),
        })
    }

    /// Convenience constructor from `(coefficient, exponents)` pairs.
    pub fn from_terms(names: &[&str], terms: &[(C64, &[u32])]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let terms = terms
            .iter()
            .map(|(c, e)| Monomial {
                coeff: *c,
                exponents: e.to_vec(),
            })
            .collect();
        Self::new(names, terms)
    }

    pub fn zero(names: Vec<String>) -> Self {
        Self {
            names,
            terms: Vec::new(),
        }
    }

    pub fn constant(names: Vec<String>, c: C64) -> Self {
        let n = names.len();
        let terms = if c == C64::new(0.0, 0.0) {
            Vec::new()
        } else {
            vec![Monomial {
                coeff: c,
                exponents: vec![0; n],
            }]
        };
        Self { names, terms }
    }

    pub fn one(names: Vec<String>) -> Self {
        Self::constant(names, C64::new(1.0, 0.0))
    }

    /// The `idx`-th indeterminate as a polynomial.
    pub fn variable(names: Vec<String>, idx: usize) -> Result<Self> {
        if idx >= names.len() {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                got: idx,
            });
        }
        let mut exps = vec![0; names.len()];
        exps[idx] = 1;
        Ok(Self {
            names,
            terms: vec![Monomial {
                coeff: C64::new(1.0, 0.0),
                exponents: exps,
            }],
        })
    }

    fn normalize(mut terms: Vec<Monomial>) -> Vec<Monomial> {
        terms.sort_by(|a, b| cmp_exponents(&b.exponents, &a.exponents));
        let mut out: Vec<Monomial> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.exponents == t.exponents => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != C64::new(0.0, 0.0));
        out
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|t| t.exponents.iter().sum())
            .max()
            .unwrap_or(0)
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownIndeterminate(name.to_string()))
    }

    /// Evaluate at a full assignment, one value per indeterminate in order.
    pub fn evaluate(&self, values: &[C64]) -> Result<C64> {
        if values.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                got: values.len(),
            });
        }
        Ok(self.eval(values))
    }

    pub(crate) fn eval(&self, values: &[C64]) -> C64 {
        debug_assert_eq!(values.len(), self.names.len());
        let mut acc = C64::new(0.0, 0.0);
        for t in &self.terms {
            let mut prod = t.coeff;
            for (v, &e) in values.iter().zip(&t.exponents) {
                match e {
                    0 => {}
                    1 => prod *= v,
                    _ => prod *= v.powu(e),
                }
            }
            acc += prod;
        }
        acc
    }

    /// Formal partial derivative with respect to a named indeterminate.
    pub fn differentiate(&self, name: &str) -> Result<Polynomial> {
        Ok(self.differentiate_index(self.index_of(name)?))
    }

    pub fn differentiate_index(&self, idx: usize) -> Polynomial {
        assert!(idx < self.names.len(), "indeterminate index out of range");
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[idx] > 0)
            .map(|t| {
                let e = t.exponents[idx];
                let mut exps = t.exponents.clone();
                exps[idx] = e - 1;
                Monomial {
                    coeff: t.coeff * (e as f64),
                    exponents: exps,
                }
            })
            .collect();
        Polynomial {
            names: self.names.clone(),
            terms: Polynomial::normalize(terms),
        }
    }

    /// Substitute one polynomial per indeterminate. All images must live in a
    /// common ring, which becomes the ring of the result.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial> {
        if images.len() != self.names.len() {
            return Err(Error::DimensionMismatch {
                expected: self.names.len(),
                got: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.names.clone(),
            None => Vec::new(),
        };
        for p in images {
            if p.names != target {
                return Err(Error::InvalidInput(
                    "substitution images live in different rings".into(),
                ));
            }
        }
        let mut acc = Polynomial::zero(target.clone());
        for t in &self.terms {
            let mut prod = Polynomial::constant(target.clone(), t.coeff);
            for (img, &e) in images.iter().zip(&t.exponents) {
                if e > 0 {
                    prod = &prod * &img.pow(e);
                }
            }
            acc = &acc + &prod;
        }
        Ok(acc)
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut result = Polynomial::one(self.names.clone());
        if e == 0 {
            return result;
        }
        let mut base = self.clone();
        loop {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e == 0 {
                return result;
            }
            base = &base * &base;
        }
    }

    pub fn scaled(&self, c: C64) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial {
                coeff: t.coeff * c,
                exponents: t.exponents.clone(),
            })
            .collect();
        Polynomial {
            names: self.names.clone(),
            terms: Polynomial::normalize(terms),
        }
    }

    fn assert_same_ring(&self, other: &Polynomial) {
        assert_eq!(
            self.names, other.names,
            "polynomial arithmetic requires a common ring"
        );
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.assert_same_ring(rhs);
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&rhs.terms);
        Polynomial {
            names: self.names.clone(),
            terms: Polynomial::normalize(terms),
        }
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scaled(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.assert_same_ring(rhs);
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let exps = a
                    .exponents
                    .iter()
                    .zip(&b.exponents)
                    .map(|(x, y)| x + y)
                    .collect();
                terms.push(Monomial {
                    coeff: a.coeff * b.coeff,
                    exponents: exps,
                });
            }
        }
        Polynomial {
            names: self.names.clone(),
            terms: Polynomial::normalize(terms),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let unit_coeff = t.coeff == C64::new(1.0, 0.0);
            let constant = t.exponents.iter().all(|&e| e == 0);
            if !unit_coeff || constant {
                if t.coeff.im == 0.0 {
                    write!(f, "{}", t.coeff.re)?;
                } else {
                    write!(f, "({}{:+}i)", t.coeff.re, t.coeff.im)?;
                }
                if !constant {
                    write!(f, "*")?;
                }
            }
            let mut first = true;
            for (name, &e) in self.names.iter().zip(&t.exponents) {
                if e == 0 {
                    continue;
                }
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                if e == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

fn check_unique(names: &[String]) -> Result<()> {
    for (i, a) in names.iter().enumerate() {
        if names[i + 1..].contains(a) {
            return Err(Error::DuplicateIndeterminate(a.clone()));
        }
    }
    Ok(())
}

/// Square polynomial system `F(x; u) = 0` in variables `x` and parameters `u`.
/// Equation polynomials live in the ring `variables ++ parameters`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedSystem {
    variables: Vec<String>,
    parameters: Vec<String>,
    equations: Vec<Polynomial>,
}

impl ParameterizedSystem {
    pub fn new(
        variables: Vec<String>,
        parameters: Vec<String>,
        equations: Vec<Polynomial>,
    ) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidInput("system has no variables".into()));
        }
        let mut all = variables.clone();
        all.extend_from_slice(&parameters);
        check_unique(&all)?;
        if equations.len() != variables.len() {
            return Err(Error::NonSquare {
                equations: equations.len(),
                variables: variables.len(),
            });
        }
        for eq in &equations {
            if eq.names() != all.as_slice() {
                return Err(Error::InvalidInput(
                    "equation ring must be variables followed by parameters".into(),
                ));
            }
        }
        Ok(Self {
            variables,
            parameters,
            equations,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    /// Evaluate all equations at a variable point and a parameter point.
    pub fn evaluate(&self, x: &[C64], u: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        if u.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                expected: self.n_params(),
                got: u.len(),
            });
        }
        let mut vals = Vec::with_capacity(x.len() + u.len());
        vals.extend_from_slice(x);
        vals.extend_from_slice(u);
        Ok(self.equations.iter().map(|p| p.eval(&vals)).collect())
    }

    /// Substitute `u = base + t * direction`, producing a one-parameter curve
    /// system in the ring `variables ++ ["t"]`.
    pub fn restrict_to_line(&self, base: &[C64], direction: &[C64]) -> Result<CurveSystem> {
        CurveSystem::new(self.clone(), base.to_vec(), direction.to_vec())
    }
}

/// Deterministic unit-modulus sample points for the restriction self-check.
fn spot_point(k: usize, len: usize) -> Vec<C64> {
    (0..len)
        .map(|i| {
            let phase = 2.0 * std::f64::consts::PI * (0.618_033_988_75 * ((k * 7 + i + 1) as f64));
            C64::new(phase.cos(), phase.sin())
        })
        .collect()
}

/// The restriction of a [`ParameterizedSystem`] to a line in parameter space.
/// Equations are polynomials in `variables ++ ["t"]`; partial derivatives in
/// the variables and in `t` are formed once at construction.
#[derive(Debug, Clone)]
pub struct CurveSystem {
    parent: ParameterizedSystem,
    line_base: Vec<C64>,
    line_direction: Vec<C64>,
    equations: Vec<Polynomial>,
    jac: Vec<Vec<Polynomial>>,
    dt: Vec<Polynomial>,
}

impl CurveSystem {
    fn new(parent: ParameterizedSystem, base: Vec<C64>, dir: Vec<C64>) -> Result<Self> {
        let m = parent.n_params();
        if base.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: base.len(),
            });
        }
        if dir.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: dir.len(),
            });
        }
        if !all_finite(&base) || !all_finite(&dir) {
            return Err(Error::NonFinite("line"));
        }
        if m > 0 && dir.iter().all(|z| z.norm() == 0.0) {
            return Err(Error::ZeroDirection);
        }
        if parent.variables.iter().any(|v| v == "t") {
            return Err(Error::DuplicateIndeterminate("t".into()));
        }

        let mut names: Vec<String> = parent.variables.clone();
        names.push("t".into());
        let n = parent.n_vars();

        let mut images = Vec::with_capacity(n + m);
        for i in 0..n {
            images.push(Polynomial::variable(names.clone(), i)?);
        }
        let t_poly = Polynomial::variable(names.clone(), n)?;
        for j in 0..m {
            let line = &Polynomial::constant(names.clone(), base[j]) + &t_poly.scaled(dir[j]);
            images.push(line);
        }

        let equations: Vec<Polynomial> = parent
            .equations
            .iter()
            .map(|eq| eq.substitute(&images))
            .collect::<Result<_>>()?;

        let jac = equations
            .iter()
            .map(|eq| (0..n).map(|j| eq.differentiate_index(j)).collect())
            .collect();
        let dt = equations.iter().map(|eq| eq.differentiate_index(n)).collect();

        let curve = Self {
            parent,
            line_base: base,
            line_direction: dir,
            equations,
            jac,
            dt,
        };
        curve.self_check()?;
        Ok(curve)
    }

    // Substituted equations must agree with evaluating the parent on the line.
    fn self_check(&self) -> Result<()> {
        for k in 0..3 {
            let x = spot_point(k, self.n_vars());
            let t = spot_point(k + 3, 1)[0];
            let u: Vec<C64> = self
                .line_base
                .iter()
                .zip(&self.line_direction)
                .map(|(b, v)| b + t * v)
                .collect();
            let direct = self.parent.evaluate(&x, &u)?;
            let restricted = self.residual(&x, t);
            for (a, b) in direct.iter().zip(&restricted) {
                let scale = f64::max(1.0, f64::max(a.norm(), b.norm()));
                if (a - b).norm() > 1e-10 * scale {
                    return Err(Error::InvalidInput(
                        "restricted equations disagree with the parent system on the line".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn parent(&self) -> &ParameterizedSystem {
        &self.parent
    }

    pub fn line_base(&self) -> &[C64] {
        &self.line_base
    }

    pub fn line_direction(&self) -> &[C64] {
        &self.line_direction
    }

    pub fn equations(&self) -> &[Polynomial] {
        &self.equations
    }

    pub fn n_vars(&self) -> usize {
        self.parent.n_vars()
    }

    /// Parameter point on the line at `t`.
    pub fn parameters_at(&self, t: C64) -> Vec<C64> {
        self.line_base
            .iter()
            .zip(&self.line_direction)
            .map(|(b, v)| b + t * v)
            .collect()
    }

    pub fn evaluate(&self, x: &[C64], t: C64) -> Result<Vec<C64>> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        Ok(self.residual(x, t))
    }

    pub(crate) fn residual(&self, x: &[C64], t: C64) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.n_vars());
        let mut vals = Vec::with_capacity(x.len() + 1);
        vals.extend_from_slice(x);
        vals.push(t);
        self.equations.iter().map(|p| p.eval(&vals)).collect()
    }

    pub fn residual_norm(&self, x: &[C64], t: C64) -> f64 {
        inf_norm(&self.residual(x, t))
    }

    /// Jacobian with respect to the variables, as an `n x n` complex matrix.
    pub fn jacobian_x(&self, x: &[C64], t: C64) -> Result<DMatrix<C64>> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        Ok(self.jac_at(x, t))
    }

    pub(crate) fn jac_at(&self, x: &[C64], t: C64) -> DMatrix<C64> {
        let n = self.n_vars();
        let mut vals = Vec::with_capacity(n + 1);
        vals.extend_from_slice(x);
        vals.push(t);
        DMatrix::from_fn(n, n, |i, j| self.jac[i][j].eval(&vals))
    }

    /// Derivative of every equation with respect to the line parameter `t`.
    pub fn df_dt(&self, x: &[C64], t: C64) -> Result<Vec<C64>> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        Ok(self.dt_at(x, t))
    }

    pub(crate) fn dt_at(&self, x: &[C64], t: C64) -> Vec<C64> {
        let mut vals = Vec::with_capacity(x.len() + 1);
        vals.extend_from_slice(x);
        vals.push(t);
        self.dt.iter().map(|p| p.eval(&vals)).collect()
    }
}
