//! Built-in parameterized systems with seed solutions, symmetry-adapted
//! intermediate maps via the Reynolds operator, and closed-form oracles for
//! the families that have them.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{C64, CurveSystem, Monomial, ParameterizedSystem, Polynomial};
use crate::error::{Error, Result};
use crate::monodromy::{MonodromyOptions, PointFilter};
use crate::witness::{decomposition_degrees, AlphaMap, WitnessSet};

const SEED_RESIDUAL_TOL: f64 = 1e-9;

fn gauss<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// A ready-to-solve system: parameterized equations, the chosen parameter
/// line, a verified seed solution on that line, and (when known) the
/// intermediate map and expected counts.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub system: ParameterizedSystem,
    pub line_base: Vec<C64>,
    pub line_direction: Vec<C64>,
    pub curve: CurveSystem,
    pub seed_x: Vec<C64>,
    pub seed_t: C64,
    pub alpha: Option<AlphaMap>,
    pub known_degree: Option<usize>,
    pub known_classes: Option<usize>,
    /// Disk radius for random loops; built-ins pin a radius that reaches
    /// their branch points.
    pub loop_radius: f64,
    pub filter: PointFilter,
}

impl ProblemInstance {
    /// Restricts the system to the line, verifies the seed's residual and
    /// the map's ring, and fills in default collection settings.
    pub fn new(
        name: impl Into<String>,
        system: ParameterizedSystem,
        line_base: Vec<C64>,
        line_direction: Vec<C64>,
        seed_x: Vec<C64>,
        seed_t: C64,
        alpha: Option<AlphaMap>,
    ) -> Result<Self> {
        let curve = system.restrict_to_line(&line_base, &line_direction)?;
        let r = curve.residual_norm(&seed_x, seed_t);
        if !(r < SEED_RESIDUAL_TOL) {
            return Err(Error::SeedResidual(r));
        }
        if let Some(a) = &alpha {
            if a.arity() != system.n_vars() {
                return Err(Error::DimensionMismatch {
                    expected: system.n_vars(),
                    got: a.arity(),
                });
            }
            let ring = a.components()[0].names();
            if ring != system.variables() {
                return Err(Error::InvalidInput(
                    "alpha map must live in the system's variable ring".into(),
                ));
            }
        }
        let loop_radius = f64::max(1.0, seed_t.norm());
        Ok(Self {
            name: name.into(),
            system,
            line_base,
            line_direction,
            curve,
            seed_x,
            seed_t,
            alpha,
            known_degree: None,
            known_classes: None,
            loop_radius,
            filter: PointFilter::All,
        })
    }

    pub fn with_known(mut self, degree: Option<usize>, classes: Option<usize>) -> Self {
        self.known_degree = degree;
        self.known_classes = classes;
        self
    }

    pub fn with_loop_radius(mut self, radius: f64) -> Self {
        self.loop_radius = radius;
        self
    }

    pub fn with_filter(mut self, filter: PointFilter) -> Self {
        self.filter = filter;
        self
    }

    /// Collection defaults carrying this problem's loop radius and filter.
    pub fn monodromy_options(&self) -> MonodromyOptions {
        MonodromyOptions {
            loop_radius: self.loop_radius,
            filter: self.filter,
            ..MonodromyOptions::default()
        }
    }
}

/// The curve `x^(2n) - 2x^n + t` with the exponent map `x -> x^n`. Its
/// branch points sit at t = 0 and t = 1; the seed is the positive real root
/// over t = -3. Loops of radius 8 reach both branch points comfortably.
pub fn power_curve(n: u32) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "power curve needs exponent at least 2, got {n}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    let f = Polynomial::from_terms(
        &["x", "u0"],
        &[
            (one, &[2 * n, 0]),
            (C64::new(-2.0, 0.0), &[n, 0]),
            (one, &[0, 1]),
        ],
    )?;
    let system = ParameterizedSystem::new(vec!["x".into()], vec!["u0".into()], vec![f])?;
    let alpha = AlphaMap::new(vec![Polynomial::from_terms(&["x"], &[(one, &[n])])?])?;
    let seed_x = vec![C64::new(3.0f64.powf(1.0 / n as f64), 0.0)];
    ProblemInstance::new(
        format!("power{n}"),
        system,
        vec![C64::new(0.0, 0.0)],
        vec![one],
        seed_x,
        C64::new(-3.0, 0.0),
        Some(alpha),
    )
    .map(|p| {
        p.with_known(Some(2 * n as usize), Some(2))
            .with_loop_radius(8.0)
    })
}

/// All `2n` roots of `x^(2n) - 2x^n + t` in closed form via
/// `x^n = 1 ± sqrt(1 - t)`. Fails at the branch points t = 0 and t = 1
/// where roots collide.
pub fn power_curve_roots(n: u32, t: C64) -> Result<Vec<Vec<C64>>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "power curve needs exponent at least 2, got {n}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    for (bad, label) in [(C64::new(0.0, 0.0), "0"), (one, "1")] {
        if (t - bad).norm() < 1e-12 {
            return Err(Error::BranchPoint(format!(
                "fiber degenerates at t = {label}"
            )));
        }
    }
    let s = (one - t).sqrt();
    let mut roots = Vec::with_capacity(2 * n as usize);
    for w in [one + s, one - s] {
        let r = w.norm().powf(1.0 / n as f64);
        let theta = w.arg();
        for k in 0..n {
            let ang = (theta + 2.0 * std::f64::consts::PI * k as f64) / n as f64;
            roots.push(vec![C64::from_polar(r, ang)]);
        }
    }
    Ok(roots)
}

/// The parameterized cyclic n-roots family: for j < n-1 the sum of all
/// cyclically consecutive products of length j+1 plus a parameter, and the
/// full product plus a parameter as the last equation. Supported for
/// 3 <= n <= 7, where the generic root counts are established.
pub fn cyclic_system<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ProblemInstance> {
    if !(3..=7).contains(&n) {
        return Err(Error::Unsupported(format!(
            "cyclic system supports n in 3..=7, got {n}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    let vars = names("x", n);
    let params = names("u", n);
    let ring: Vec<String> = vars.iter().chain(params.iter()).cloned().collect();

    let x_part = |j: usize| -> Polynomial {
        let mut terms = Vec::with_capacity(n);
        for i in 0..n {
            let mut exps = vec![0u32; 2 * n];
            for k in 0..=j {
                exps[(i + k) % n] += 1;
            }
            terms.push(Monomial {
                coeff: one,
                exponents: exps,
            });
        }
        Polynomial::new(ring.clone(), terms).expect("cyclic term construction")
    };

    let mut equations = Vec::with_capacity(n);
    let mut x_parts = Vec::with_capacity(n);
    for j in 0..n - 1 {
        x_parts.push(x_part(j));
    }
    {
        // Full product: the length-n "consecutive" runs all coincide.
        let mut exps = vec![0u32; 2 * n];
        for e in exps.iter_mut().take(n) {
            *e = 1;
        }
        x_parts.push(
            Polynomial::new(
                ring.clone(),
                vec![Monomial {
                    coeff: one,
                    exponents: exps,
                }],
            )
            .expect("cyclic product construction"),
        );
    }
    for (j, xp) in x_parts.iter().enumerate() {
        let mut exps = vec![0u32; 2 * n];
        exps[n + j] = 1;
        let u_term = Polynomial::new(
            ring.clone(),
            vec![Monomial {
                coeff: one,
                exponents: exps,
            }],
        )?;
        equations.push(xp + &u_term);
    }

    let system = ParameterizedSystem::new(vars.clone(), params, equations)?;

    // Parameters enter linearly, so a random point becomes a seed by
    // solving each u_j against the x-part's value.
    let seed_x: Vec<C64> = (0..n).map(|_| gauss(rng)).collect();
    let mut eval_point: Vec<C64> = seed_x.clone();
    eval_point.extend(std::iter::repeat(C64::new(0.0, 0.0)).take(n));
    let line_base: Vec<C64> = x_parts
        .iter()
        .map(|xp| xp.evaluate(&eval_point).map(|v| -v))
        .collect::<Result<Vec<_>>>()?;
    let line_direction: Vec<C64> = (0..n).map(|_| gauss(rng)).collect();

    let seed_monomial = {
        let mut exps = vec![0u32; n];
        exps[0] += 1;
        exps[2 % n] += 1;
        Polynomial::new(
            vars.clone(),
            vec![Monomial {
                coeff: one,
                exponents: exps,
            }],
        )?
    };
    let alpha = AlphaMap::new(vec![reynolds_invariant(
        &dihedral_group(n)?,
        &seed_monomial,
    )?])?;

    let (degree, classes) = match n {
        5 => (Some(70), Some(7)),
        6 => (Some(156), Some(13)),
        7 => (Some(924), Some(66)),
        _ => (None, None),
    };
    ProblemInstance::new(
        format!("cyclic{n}"),
        system,
        line_base,
        line_direction,
        seed_x,
        C64::new(0.0, 0.0),
        Some(alpha),
    )
    .map(|p| p.with_known(degree, classes).with_loop_radius(5.0))
}

/// Label action on the first `degree` variables: variable i is sent to
/// `sign_i` times variable `perm_i`; variables past the action's degree
/// (parameters, the line coordinate) pass through untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    perm: Vec<usize>,
    signs: Vec<f64>,
}

impl GroupElement {
    pub fn new(perm: Vec<usize>, signs: Vec<f64>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: signs.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in &perm {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput("label map is not a bijection".into()));
            }
            seen[i] = true;
        }
        if signs.iter().any(|s| s.abs() != 1.0) {
            return Err(Error::InvalidInput("signs must be +1 or -1".into()));
        }
        Ok(Self { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            signs: vec![1.0; n],
        }
    }

    /// Cyclic shift by k: label i goes to label i+k.
    pub fn rotation(n: usize, k: usize) -> Self {
        Self {
            perm: (0..n).map(|i| (i + k) % n).collect(),
            signs: vec![1.0; n],
        }
    }

    /// Order reversal composed with a shift by k.
    pub fn reflection(n: usize, k: usize) -> Self {
        Self {
            perm: (0..n).map(|i| (n - 1 - i + k) % n).collect(),
            signs: vec![1.0; n],
        }
    }

    pub fn degree(&self) -> usize {
        self.perm.len()
    }

    /// `self` first, then `other`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.degree() != other.degree() {
            return Err(Error::DimensionMismatch {
                expected: self.degree(),
                got: other.degree(),
            });
        }
        let perm = self.perm.iter().map(|&i| other.perm[i]).collect();
        let signs = (0..self.degree())
            .map(|i| self.signs[i] * other.signs[self.perm[i]])
            .collect();
        GroupElement::new(perm, signs)
    }

    /// Push the label action through a polynomial. The polynomial's ring may
    /// extend past the action's degree; extra indeterminates are fixed.
    pub fn apply(&self, p: &Polynomial) -> Result<Polynomial> {
        let n = self.degree();
        if p.arity() < n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.arity(),
            });
        }
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let mut exps = t.exponents.clone();
                let mut coeff = t.coeff;
                for i in 0..n {
                    exps[self.perm[i]] = t.exponents[i];
                    if self.signs[i] < 0.0 && t.exponents[i] % 2 == 1 {
                        coeff = -coeff;
                    }
                }
                Monomial {
                    coeff,
                    exponents: exps,
                }
            })
            .collect();
        Polynomial::new(p.names().to_vec(), terms)
    }
}

/// The 2n symmetries of a cycle of n labels: n rotations and n reflections.
pub fn dihedral_group(n: usize) -> Result<Vec<GroupElement>> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "dihedral group needs at least 3 labels, got {n}"
        )));
    }
    let mut elements = Vec::with_capacity(2 * n);
    for k in 0..n {
        elements.push(GroupElement::rotation(n, k));
    }
    for k in 0..n {
        elements.push(GroupElement::reflection(n, k));
    }
    Ok(elements)
}

/// Symmetrize a polynomial over a finite label group and rescale so the
/// leading coefficient is exactly one. The rescaled form matches the orbit
/// sum when every orbit monomial is hit equally often.
pub fn reynolds_invariant(group: &[GroupElement], seed: &Polynomial) -> Result<Polynomial> {
    if group.is_empty() {
        return Err(Error::InvalidInput("empty symmetry group".into()));
    }
    let mut sum = Polynomial::zero(seed.names().to_vec());
    for g in group {
        sum = &sum + &g.apply(seed)?;
    }
    match sum.terms().first() {
        None => Ok(sum),
        Some(lead) => {
            let inv = C64::new(1.0, 0.0) / lead.coeff;
            Ok(sum.scaled(inv))
        }
    }
}

/// How an intermediate map sits over a complete fiber, keyed to the observed
/// factor degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantClass {
    /// Both factors have degree at least two: the map genuinely decomposes
    /// the projection.
    NontrivialDecomposition { alpha_degree: usize, beta_degree: usize },
    /// The map separates every fiber point (class size one).
    FiberFixed,
    /// The map collapses the whole fiber to one image.
    AlphaConstantOnFiber,
}

/// Classify a candidate map by its decomposition degrees on a complete
/// witness set.
pub fn classify_invariant_alpha(
    w: &WitnessSet,
    alpha: &AlphaMap,
    eps: f64,
) -> Result<InvariantClass> {
    let (a, b) = decomposition_degrees(w, alpha, eps)?;
    Ok(if a == w.len() {
        InvariantClass::AlphaConstantOnFiber
    } else if a == 1 {
        InvariantClass::FiberFixed
    } else {
        InvariantClass::NontrivialDecomposition {
            alpha_degree: a,
            beta_degree: b,
        }
    })
}

fn binomial(p: u32, q: u32) -> u64 {
    let mut acc = 1u64;
    for i in 0..q as u64 {
        acc = acc * (p as u64 - i) / (i + 1);
    }
    acc
}

fn odd_double_factorial(i: u32) -> u64 {
    // (2i - 1)!! with the empty product equal to one.
    (0..i as u64).map(|j| 2 * j + 1).product::<u64>().max(1)
}

/// Raw moment of one Gaussian component as a polynomial identity:
/// E[X^p] for X ~ N(mu, s), expressed in (mu, s) exponents with the
/// binomial times double-factorial coefficients.
fn moment_terms(p: u32) -> Vec<(f64, u32, u32)> {
    (0..=p / 2)
        .map(|i| {
            let coeff = binomial(p, 2 * i) * odd_double_factorial(i);
            (coeff as f64, p - 2 * i, i)
        })
        .collect()
}

/// Moment equations for a mixture of k univariate Gaussians: the mixing
/// weights sum to one and the first 3k-1 raw moments match the parameters.
/// Variables are (a_1..a_k, mu_1..mu_k, s_1..s_k) with s the variance.
pub fn gaussian_moment_system<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<ProblemInstance> {
    if !(2..=3).contains(&k) {
        return Err(Error::Unsupported(format!(
            "gaussian mixture supports k = 2 or 3, got {k}"
        )));
    }
    let one = C64::new(1.0, 0.0);
    let n_moments = 3 * k - 1;
    let mut vars = Vec::with_capacity(3 * k);
    for prefix in ["a", "mu", "s"] {
        for j in 1..=k {
            vars.push(format!("{prefix}{j}"));
        }
    }
    let params: Vec<String> = (1..=n_moments).map(|p| format!("m{p}")).collect();
    let ring: Vec<String> = vars.iter().chain(params.iter()).cloned().collect();
    let width = 3 * k + n_moments;
    let a_idx = |j: usize| j;
    let mu_idx = |j: usize| k + j;
    let s_idx = |j: usize| 2 * k + j;

    let mut equations = Vec::with_capacity(3 * k);
    {
        let mut terms: Vec<Monomial> = (0..k)
            .map(|j| {
                let mut exps = vec![0u32; width];
                exps[a_idx(j)] = 1;
                Monomial {
                    coeff: one,
                    exponents: exps,
                }
            })
            .collect();
        terms.push(Monomial {
            coeff: -one,
            exponents: vec![0; width],
        });
        equations.push(Polynomial::new(ring.clone(), terms)?);
    }
    for p in 1..=n_moments as u32 {
        let mut terms = Vec::new();
        for j in 0..k {
            for (coeff, mu_e, s_e) in moment_terms(p) {
                let mut exps = vec![0u32; width];
                exps[a_idx(j)] = 1;
                exps[mu_idx(j)] = mu_e;
                exps[s_idx(j)] = s_e;
                terms.push(Monomial {
                    coeff: C64::new(coeff, 0.0),
                    exponents: exps,
                });
            }
        }
        let mut exps = vec![0u32; width];
        exps[3 * k + (p as usize - 1)] = 1;
        terms.push(Monomial {
            coeff: -one,
            exponents: exps,
        });
        equations.push(Polynomial::new(ring.clone(), terms)?);
    }
    let system = ParameterizedSystem::new(vars.clone(), params, equations)?;

    // Seed: a random mixture with weights summing to one; its moments give
    // the parameter point the line passes through.
    let mut seed_x = vec![C64::new(0.0, 0.0); 3 * k];
    let mut weight_sum = C64::new(0.0, 0.0);
    for j in 0..k - 1 {
        let a = gauss(rng);
        weight_sum += a;
        seed_x[a_idx(j)] = a;
    }
    seed_x[a_idx(k - 1)] = one - weight_sum;
    for j in 0..k {
        seed_x[mu_idx(j)] = gauss(rng);
        seed_x[s_idx(j)] = gauss(rng);
    }
    let mut line_base = Vec::with_capacity(n_moments);
    for p in 1..=n_moments as u32 {
        let mut m = C64::new(0.0, 0.0);
        for j in 0..k {
            let (a, mu, s) = (seed_x[a_idx(j)], seed_x[mu_idx(j)], seed_x[s_idx(j)]);
            for (coeff, mu_e, s_e) in moment_terms(p) {
                m += a * C64::new(coeff, 0.0) * mu.powu(mu_e) * s.powu(s_e);
            }
        }
        line_base.push(m);
    }
    let line_direction: Vec<C64> = (0..n_moments).map(|_| gauss(rng)).collect();

    let alpha_poly = {
        let terms = (0..k)
            .map(|j| {
                let mut exps = vec![0u32; 3 * k];
                exps[mu_idx(j)] = 1;
                Monomial {
                    coeff: one,
                    exponents: exps,
                }
            })
            .collect();
        Polynomial::new(vars.clone(), terms)?
    };
    let alpha = AlphaMap::new(vec![alpha_poly])?;

    let (degree, classes) = match k {
        2 => (Some(18), Some(9)),
        _ => (None, Some(225)),
    };
    ProblemInstance::new(
        format!("gaussian{k}"),
        system,
        line_base,
        line_direction,
        seed_x,
        C64::new(0.0, 0.0),
        Some(alpha),
    )
    .map(|p| p.with_known(degree, classes).with_loop_radius(8.0))
}

/// Two sparse equations in two torus variables whose incidence variety picks
/// up an extraneous component on the coordinate hyperplanes; collection
/// discards endpoints with |x1 x2| below 1e-8 instead of saturating.
pub fn mixed_volume_example<R: Rng + ?Sized>(rng: &mut R) -> Result<ProblemInstance> {
    let one = C64::new(1.0, 0.0);
    let ring = ["x1", "x2", "u1", "u2", "u4", "u5", "u6"];
    // (u1 + u2 (x1 x2^2 + x1^2 x2)) x1 x2, expanded.
    let f1 = Polynomial::from_terms(
        &ring,
        &[
            (one, &[1, 1, 1, 0, 0, 0, 0]),
            (one, &[2, 3, 0, 1, 0, 0, 0]),
            (one, &[3, 2, 0, 1, 0, 0, 0]),
        ],
    )?;
    let f2 = Polynomial::from_terms(
        &ring,
        &[
            (one, &[0, 0, 0, 0, 1, 0, 0]),
            (one, &[1, 0, 0, 0, 0, 1, 0]),
            (one, &[0, 1, 0, 0, 0, 1, 0]),
            (one, &[1, 1, 0, 0, 0, 0, 1]),
        ],
    )?;
    let system = ParameterizedSystem::new(
        vec!["x1".into(), "x2".into()],
        vec!["u1".into(), "u2".into(), "u4".into(), "u5".into(), "u6".into()],
        vec![f1, f2],
    )?;

    // Seed away from the coordinate hyperplanes; u1 and u4 close the two
    // equations at the seed.
    let (x1, x2) = loop {
        let (a, b) = (gauss(rng), gauss(rng));
        if (a * b).norm() > 0.1 {
            break (a, b);
        }
    };
    let (u2, u5, u6) = (gauss(rng), gauss(rng), gauss(rng));
    let e1 = x1 + x2;
    let e2 = x1 * x2;
    let u1 = -u2 * e2 * e1;
    let u4 = -u5 * e1 - u6 * e2;
    let line_base = vec![u1, u2, u4, u5, u6];
    let line_direction: Vec<C64> = (0..5).map(|_| gauss(rng)).collect();

    let alpha = AlphaMap::new(vec![Polynomial::from_terms(
        &["x1", "x2"],
        &[(one, &[1, 0]), (one, &[0, 1])],
    )?])?;

    ProblemInstance::new(
        "mixedvol",
        system,
        line_base,
        line_direction,
        vec![x1, x2],
        C64::new(0.0, 0.0),
        Some(alpha),
    )
    .map(|p| {
        p.with_known(Some(4), Some(2))
            .with_loop_radius(3.0)
            .with_filter(PointFilter::Torus { min_product: 1e-8 })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::{partition_by_alpha, points_equal};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn power_instance_is_verified() {
        let p = power_curve(10).unwrap();
        assert_eq!(p.name, "power10");
        assert_eq!(p.known_degree, Some(20));
        assert_eq!(p.known_classes, Some(2));
        assert!(p.curve.residual_norm(&p.seed_x, p.seed_t) < 1e-12);
        // The seed's image under the exponent map is 1 + sqrt(1 - (-3)) = 3.
        let img = p.alpha.as_ref().unwrap().image(&p.seed_x).unwrap();
        assert!((img[0] - c(3.0, 0.0)).norm() < 1e-12);
        assert!(power_curve(1).is_err());
    }

    #[test]
    fn power_roots_match_the_closed_form_fiber() {
        let expected = [
            c(3.0f64.sqrt(), 0.0),
            c(-(3.0f64.sqrt()), 0.0),
            c(0.0, 1.0),
            c(0.0, -1.0),
        ];
        let roots = power_curve_roots(2, c(-3.0, 0.0)).unwrap();
        assert_eq!(roots.len(), 4);
        for e in &expected {
            assert!(roots.iter().any(|r| points_equal(r, &[*e], 1e-9)));
        }
    }

    #[test]
    fn power_roots_satisfy_the_curve_and_split_in_two() {
        let p = power_curve(3).unwrap();
        let t = c(0.5, 0.0);
        let roots = power_curve_roots(3, t).unwrap();
        assert_eq!(roots.len(), 6);
        let mut images: Vec<C64> = Vec::new();
        for r in &roots {
            assert!(p.curve.residual_norm(r, t) < 1e-10);
            let img = r[0].powu(3);
            if !images.iter().any(|i| (i - img).norm() < 1e-9) {
                images.push(img);
            }
        }
        assert_eq!(images.len(), 2);
    }

    #[test]
    fn power_roots_reject_branch_points() {
        assert!(matches!(
            power_curve_roots(2, c(0.0, 0.0)),
            Err(Error::BranchPoint(_))
        ));
        assert!(matches!(
            power_curve_roots(2, c(1.0, 0.0)),
            Err(Error::BranchPoint(_))
        ));
    }

    #[test]
    fn cyclic_instances_verify_their_seeds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in 3..=7 {
            let p = cyclic_system(n, &mut rng).unwrap();
            assert_eq!(p.system.equations().len(), n);
            assert!(p.curve.residual_norm(&p.seed_x, p.seed_t) < 1e-9);
            assert_eq!(p.seed_t, c(0.0, 0.0));
        }
        assert!(cyclic_system(2, &mut rng).is_err());
        assert!(cyclic_system(8, &mut rng).is_err());
    }

    #[test]
    fn cyclic_equations_are_dihedral_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 3..=7usize {
            let p = cyclic_system(n, &mut rng).unwrap();
            let group = dihedral_group(n).unwrap();
            for g in &group {
                for f in p.system.equations() {
                    // Each cyclic sum is fixed by every label symmetry.
                    assert_eq!(&g.apply(f).unwrap(), f);
                }
                let alpha_poly = &p.alpha.as_ref().unwrap().components()[0];
                assert_eq!(&g.apply(alpha_poly).unwrap(), alpha_poly);
            }
        }
    }

    #[test]
    fn cyclic_five_alpha_is_the_distance_two_orbit_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = cyclic_system(5, &mut rng).unwrap();
        let one = c(1.0, 0.0);
        let expected = Polynomial::from_terms(
            &["x0", "x1", "x2", "x3", "x4"],
            &[
                (one, &[1, 0, 1, 0, 0]),
                (one, &[0, 1, 0, 1, 0]),
                (one, &[0, 0, 1, 0, 1]),
                (one, &[1, 0, 0, 1, 0]),
                (one, &[0, 1, 0, 0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(p.alpha.as_ref().unwrap().components(), &[expected]);
        assert_eq!(p.known_degree, Some(70));
        assert_eq!(p.known_classes, Some(7));
    }

    #[test]
    fn dihedral_group_structure() {
        for n in 3..=7usize {
            let group = dihedral_group(n).unwrap();
            assert_eq!(group.len(), 2 * n);
            // Closure: composing any two elements lands in the group.
            for g in &group {
                for h in &group {
                    let gh = g.compose(h).unwrap();
                    assert!(group.contains(&gh));
                }
            }
        }
        assert!(dihedral_group(2).is_err());
    }

    #[test]
    fn label_actions_on_polynomials() {
        let one = c(1.0, 0.0);
        let x0 = Polynomial::from_terms(&["x0", "x1", "x2", "x3", "x4"], &[(one, &[1, 0, 0, 0, 0])])
            .unwrap();
        let x1 = Polynomial::from_terms(&["x0", "x1", "x2", "x3", "x4"], &[(one, &[0, 1, 0, 0, 0])])
            .unwrap();
        let r = GroupElement::rotation(5, 1);
        assert_eq!(r.apply(&x0).unwrap(), x1);

        let s = GroupElement::reflection(5, 0);
        assert_eq!(s.compose(&s).unwrap(), GroupElement::identity(5));

        // Sign actions flip odd powers and fix even ones.
        let flip = GroupElement::new(vec![0], vec![-1.0]).unwrap();
        let x = Polynomial::from_terms(&["x"], &[(one, &[1])]).unwrap();
        let x2 = Polynomial::from_terms(&["x"], &[(one, &[2])]).unwrap();
        assert_eq!(flip.apply(&x).unwrap(), x.scaled(-one));
        assert_eq!(flip.apply(&x2).unwrap(), x2);
    }

    #[test]
    fn reynolds_on_the_pentagon_matches_the_orbit_sums() {
        let one = c(1.0, 0.0);
        let names = &["x0", "x1", "x2", "x3", "x4"];
        let group = dihedral_group(5).unwrap();

        let x0x2 = Polynomial::from_terms(names, &[(one, &[1, 0, 1, 0, 0])]).unwrap();
        let inv = reynolds_invariant(&group, &x0x2).unwrap();
        let expected = Polynomial::from_terms(
            names,
            &[
                (one, &[1, 0, 1, 0, 0]),
                (one, &[0, 1, 0, 1, 0]),
                (one, &[0, 0, 1, 0, 1]),
                (one, &[1, 0, 0, 1, 0]),
                (one, &[0, 1, 0, 0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(inv, expected);

        let x0 = Polynomial::from_terms(names, &[(one, &[1, 0, 0, 0, 0])]).unwrap();
        let inv = reynolds_invariant(&group, &x0).unwrap();
        let all_ones = Polynomial::from_terms(
            names,
            &[
                (one, &[1, 0, 0, 0, 0]),
                (one, &[0, 1, 0, 0, 0]),
                (one, &[0, 0, 1, 0, 0]),
                (one, &[0, 0, 0, 1, 0]),
                (one, &[0, 0, 0, 0, 1]),
            ],
        )
        .unwrap();
        assert_eq!(inv, all_ones);

        let unit = Polynomial::one(names.iter().map(|s| s.to_string()).collect());
        assert_eq!(reynolds_invariant(&group, &unit).unwrap(), unit);

        // Averaging an odd function over a sign flip cancels exactly.
        let flip_group = vec![
            GroupElement::identity(1),
            GroupElement::new(vec![0], vec![-1.0]).unwrap(),
        ];
        let x = Polynomial::from_terms(&["x"], &[(one, &[1])]).unwrap();
        let zero = reynolds_invariant(&flip_group, &x).unwrap();
        assert!(zero.terms().is_empty());
    }

    #[test]
    fn gaussian_mixture_moment_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let p = gaussian_moment_system(2, &mut rng).unwrap();
        assert_eq!(p.system.n_vars(), 6);
        assert_eq!(p.system.equations().len(), 6);
        assert_eq!(p.system.parameters().len(), 5);
        assert!(p.curve.residual_norm(&p.seed_x, p.seed_t) < 1e-9);

        // One pure component with mean 2 and variance 3 pins every moment
        // equation: E[X^p] follows the binomial/double-factorial expansion.
        let x = [c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), c(0.0, 0.0)];
        let m = [c(2.0, 0.0), c(7.0, 0.0), c(26.0, 0.0), c(115.0, 0.0), c(542.0, 0.0)];
        let vals = p.system.evaluate(&x, &m).unwrap();
        for v in vals {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn gaussian_label_swap_maps_solutions_to_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let p = gaussian_moment_system(2, &mut rng).unwrap();
        let s = &p.seed_x;
        let swapped = vec![s[1], s[0], s[3], s[2], s[5], s[4]];
        assert!(p.curve.residual_norm(&swapped, p.seed_t) < 1e-9);
    }

    #[test]
    fn gaussian_three_component_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = gaussian_moment_system(3, &mut rng).unwrap();
        assert_eq!(p.system.n_vars(), 9);
        assert_eq!(p.system.equations().len(), 9);
        assert_eq!(p.system.parameters().len(), 8);
        assert!(p.curve.residual_norm(&p.seed_x, p.seed_t) < 1e-9);
        assert_eq!(p.known_classes, Some(225));
        assert!(gaussian_moment_system(4, &mut rng).is_err());
    }

    // Closed-form fiber of the mixed-volume system on the torus: e1 solves
    // u5 u2 e1^2 + u4 u2 e1 - u6 u1 = 0, e2 = -u1/(u2 e1), and x1, x2 are
    // the two roots of z^2 - e1 z + e2.
    fn mixed_volume_fiber(p: &ProblemInstance, t: C64) -> Vec<Vec<C64>> {
        let u: Vec<C64> = p
            .line_base
            .iter()
            .zip(&p.line_direction)
            .map(|(b, d)| b + d * t)
            .collect();
        let (u1, u2, u4, u5, u6) = (u[0], u[1], u[2], u[3], u[4]);
        let disc = (u4 * u2) * (u4 * u2) + 4.0 * u5 * u2 * u6 * u1;
        let sq = disc.sqrt();
        let mut out = Vec::new();
        for sign in [1.0, -1.0] {
            let e1 = (-u4 * u2 + sq * sign) / (2.0 * u5 * u2);
            let e2 = -u1 / (u2 * e1);
            let d = (e1 * e1 - 4.0 * e2).sqrt();
            out.push(vec![(e1 + d) / 2.0, (e1 - d) / 2.0]);
            out.push(vec![(e1 - d) / 2.0, (e1 + d) / 2.0]);
        }
        out
    }

    #[test]
    fn mixed_volume_instance_and_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let p = mixed_volume_example(&mut rng).unwrap();
        assert_eq!(p.known_degree, Some(4));
        assert_eq!(p.known_classes, Some(2));
        assert!(matches!(p.filter, PointFilter::Torus { .. }));
        assert!(p.curve.residual_norm(&p.seed_x, p.seed_t) < 1e-9);
        assert!((p.seed_x[0] * p.seed_x[1]).norm() > 1e-8);

        let t = c(0.3, 0.4);
        let fiber = mixed_volume_fiber(&p, t);
        assert_eq!(fiber.len(), 4);
        let mut e1_values: Vec<C64> = Vec::new();
        for pt in &fiber {
            assert!(p.curve.residual_norm(pt, t) < 1e-8);
            let e1 = pt[0] + pt[1];
            if !e1_values.iter().any(|v| (v - e1).norm() < 1e-8) {
                e1_values.push(e1);
            }
        }
        assert_eq!(e1_values.len(), 2);
    }

    #[test]
    fn classification_follows_observed_degrees() {
        let p = power_curve(2).unwrap();
        let q = c(-3.0, 0.0);
        let fiber = power_curve_roots(2, q).unwrap();
        let w = WitnessSet::new(p.curve.clone(), q, fiber, 1e-9, 1e-6).unwrap();
        let one = c(1.0, 0.0);

        let square = p.alpha.as_ref().unwrap();
        assert_eq!(
            classify_invariant_alpha(&w, square, 1e-6).unwrap(),
            InvariantClass::NontrivialDecomposition {
                alpha_degree: 2,
                beta_degree: 2
            }
        );

        let identity =
            AlphaMap::new(vec![Polynomial::from_terms(&["x"], &[(one, &[1])]).unwrap()]).unwrap();
        assert_eq!(
            classify_invariant_alpha(&w, &identity, 1e-6).unwrap(),
            InvariantClass::FiberFixed
        );

        let constant =
            AlphaMap::new(vec![Polynomial::constant(vec!["x".into()], one)]).unwrap();
        assert_eq!(
            classify_invariant_alpha(&w, &constant, 1e-6).unwrap(),
            InvariantClass::AlphaConstantOnFiber
        );
    }

    #[test]
    fn alpha_partition_on_oracle_fiber_matches_known_classes() {
        let p = power_curve(5).unwrap();
        let q = c(-3.0, 0.0);
        let fiber = power_curve_roots(5, q).unwrap();
        let w = WitnessSet::new(p.curve.clone(), q, fiber, 1e-9, 1e-6).unwrap();
        let classes = partition_by_alpha(&w, p.alpha.as_ref().unwrap(), 1e-6).unwrap();
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.len() == 5));
    }

    #[test]
    fn instance_rejects_bad_seeds() {
        let one = c(1.0, 0.0);
        let f = Polynomial::from_terms(&["x", "u0"], &[(one, &[2, 0]), (one, &[0, 1])]).unwrap();
        let system =
            ParameterizedSystem::new(vec!["x".into()], vec!["u0".into()], vec![f]).unwrap();
        let err = ProblemInstance::new(
            "bad",
            system,
            vec![c(0.0, 0.0)],
            vec![one],
            vec![c(5.0, 0.0)],
            c(-4.0, 0.0),
            None,
        );
        assert!(matches!(err, Err(Error::SeedResidual(_))));
    }
}
