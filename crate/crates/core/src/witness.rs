//! Witness sets, intermediate coordinate maps, and the bookkeeping used to
//! collect fiber points up to symmetry: point registries with a general
//! linear prefilter, endpoint classification, and factor partitions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::algebra::{all_finite, C64, CurveSystem, Polynomial};
use crate::error::{Error, Result};

/// Coordinatewise closeness: relative tolerance for large coordinates,
/// absolute below magnitude one.
pub fn points_equal(a: &[C64], b: &[C64], eps: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).norm() <= eps * f64::max(1.0, f64::max(x.norm(), y.norm())))
}

fn scale_of(p: &[C64]) -> f64 {
    f64::max(1.0, p.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Deduplicating store of fiber points. Membership tests first compare the
/// image under a random linear functional drawn at construction, so that a
/// full coordinatewise comparison runs only for near-collisions; a point in
/// general position is decided by one complex number.
#[derive(Debug, Clone)]
pub struct PointRegistry {
    eps: f64,
    functional: Vec<C64>,
    functional_l1: f64,
    points: Vec<Vec<C64>>,
    keys: Vec<C64>,
    scales: Vec<f64>,
}

impl PointRegistry {
    pub fn new<R: Rng + ?Sized>(dim: usize, eps: f64, rng: &mut R) -> Self {
        let functional: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let functional_l1 = functional.iter().map(|z| z.norm()).sum();
        Self {
            eps,
            functional,
            functional_l1,
            points: Vec::new(),
            keys: Vec::new(),
            scales: Vec::new(),
        }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    fn key(&self, p: &[C64]) -> C64 {
        self.functional
            .iter()
            .zip(p)
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Index of a stored point equal to `p` under the registry tolerance.
    pub fn find(&self, p: &[C64]) -> Option<usize> {
        let key = self.key(p);
        let scale = scale_of(p);
        for i in 0..self.points.len() {
            // Safe over-approximation of how far keys of equal points can sit.
            let bound = 2.0 * self.eps * self.functional_l1 * f64::max(self.scales[i], scale);
            if (key - self.keys[i]).norm() <= bound && points_equal(&self.points[i], p, self.eps) {
                return Some(i);
            }
        }
        None
    }

    pub fn contains(&self, p: &[C64]) -> bool {
        self.find(p).is_some()
    }

    /// Store `p` unless an equal point is already present. Returns the index
    /// and whether the point was new.
    pub fn insert(&mut self, p: Vec<C64>) -> Result<(usize, bool)> {
        if p.len() != self.functional.len() {
            return Err(Error::DimensionMismatch {
                expected: self.functional.len(),
                got: p.len(),
            });
        }
        if !all_finite(&p) {
            return Err(Error::NonFinite("registry point"));
        }
        if let Some(i) = self.find(&p) {
            return Ok((i, false));
        }
        self.keys.push(self.key(&p));
        self.scales.push(scale_of(&p));
        self.points.push(p);
        Ok((self.points.len() - 1, true))
    }
}

/// Polynomial map in the system variables; the line coordinate `t` is passed
/// through implicitly, so a map with components `g_1..g_l` models
/// `(x, t) -> (g_1(x), .., g_l(x), t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMap {
    arity: usize,
    components: Vec<Polynomial>,
}

impl AlphaMap {
    pub fn new(components: Vec<Polynomial>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::InvalidInput("alpha map needs at least one component".into()))?;
        let arity = first.arity();
        for c in &components {
            if c.arity() != arity || c.names() != first.names() {
                return Err(Error::InvalidInput(
                    "alpha map components live in different rings".into(),
                ));
            }
        }
        Ok(Self { arity, components })
    }

    /// The map that forgets all variables and keeps only `t`.
    pub fn projection(arity: usize) -> Self {
        Self {
            arity,
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn image(&self, p: &[C64]) -> Result<Vec<C64>> {
        if p.len() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: p.len(),
            });
        }
        self.components.iter().map(|c| c.evaluate(p)).collect()
    }

    /// Compose `self` after `inner`: components of `self` read the components
    /// of `inner` as their inputs. The result reads `inner`'s variables.
    pub fn after(&self, inner: &AlphaMap) -> Result<AlphaMap> {
        if self.arity != inner.n_components() {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: inner.n_components(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| c.substitute(&inner.components))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlphaMap {
            arity: inner.arity,
            components,
        })
    }

    /// Identity map on `names`, the starting point for composing a chain.
    pub fn identity(names: &[String]) -> Result<AlphaMap> {
        let components = (0..names.len())
            .map(|i| Polynomial::variable(names.to_vec(), i))
            .collect::<Result<Vec<_>>>()?;
        AlphaMap::new(components)
    }
}

/// Image of a point under an intermediate map.
pub fn alpha_image(alpha: &AlphaMap, p: &[C64]) -> Result<Vec<C64>> {
    alpha.image(p)
}

/// Whether two fiber points lie over the same intermediate image, compared
/// coordinatewise within `eps`.
pub fn alpha_equivalent(alpha: &AlphaMap, p: &[C64], q: &[C64], eps: f64) -> Result<bool> {
    Ok(points_equal(&alpha.image(p)?, &alpha.image(q)?, eps))
}

/// Points of one fiber sharing a single intermediate image.
#[derive(Debug, Clone, Default)]
pub struct AlphaFactor {
    pub points: Vec<Vec<C64>>,
}

/// Points of one fiber with pairwise distinct intermediate images: one
/// representative per symmetry class.
#[derive(Debug, Clone, Default)]
pub struct BetaFactor {
    pub points: Vec<Vec<C64>>,
}

impl AlphaFactor {
    pub fn new(points: Vec<Vec<C64>>) -> Self {
        Self { points }
    }

    pub fn contains(&self, p: &[C64], eps: f64) -> bool {
        self.points.iter().any(|q| points_equal(q, p, eps))
    }

    /// All members must share one image under `alpha`.
    pub fn verify(&self, alpha: &AlphaMap, eps: f64) -> Result<()> {
        if let Some(first) = self.points.first() {
            for p in &self.points[1..] {
                if !alpha_equivalent(alpha, first, p, eps)? {
                    return Err(Error::InvalidInput(
                        "alpha factor contains points with distinct images".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl BetaFactor {
    pub fn new(points: Vec<Vec<C64>>) -> Self {
        Self { points }
    }

    /// Members must have pairwise distinct images under `alpha`.
    pub fn verify(&self, alpha: &AlphaMap, eps: f64) -> Result<()> {
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                if alpha_equivalent(alpha, p, q, eps)? {
                    return Err(Error::InvalidInput(
                        "beta factor contains two points in one class".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// What to do with one tracked loop endpoint, following the collection rule
/// of the decomposable algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointAction {
    AppendToA,
    AppendToB,
    AppendToBoth,
    Discard,
}

/// Decide membership updates for an endpoint `e`: it joins the alpha factor
/// when it is new there and shares the fixed representative's image, and
/// joins the beta factor when its image is new among the representatives.
pub fn classify_endpoint(
    e: &[C64],
    a: &AlphaFactor,
    b: &BetaFactor,
    a_rep: Option<&[C64]>,
    alpha: &AlphaMap,
    eps: f64,
) -> Result<EndpointAction> {
    if a.points.is_empty() != a_rep.is_none() {
        return Err(Error::InvalidInput(
            "alpha-factor representative must be present exactly when the factor is nonempty"
                .into(),
        ));
    }
    let to_a = match a_rep {
        Some(rep) => !a.contains(e, eps) && alpha_equivalent(alpha, e, rep, eps)?,
        None => false,
    };
    let mut to_b = !b.points.is_empty();
    for p in &b.points {
        if alpha_equivalent(alpha, e, p, eps)? {
            to_b = false;
            break;
        }
    }
    Ok(match (to_a, to_b) {
        (true, true) => EndpointAction::AppendToBoth,
        (true, false) => EndpointAction::AppendToA,
        (false, true) => EndpointAction::AppendToB,
        (false, false) => EndpointAction::Discard,
    })
}

/// A fiber over one base point of the restricted curve system: the equations,
/// the base `q`, and the fiber points found so far.
#[derive(Debug, Clone)]
pub struct WitnessSet {
    curve: CurveSystem,
    base: C64,
    points: Vec<Vec<C64>>,
}

impl WitnessSet {
    /// Checks every point against the equations at `q` and rejects duplicate
    /// points under `point_eps`.
    pub fn new(
        curve: CurveSystem,
        base: C64,
        points: Vec<Vec<C64>>,
        residual_tol: f64,
        point_eps: f64,
    ) -> Result<Self> {
        for p in &points {
            if p.len() != curve.n_vars() {
                return Err(Error::DimensionMismatch {
                    expected: curve.n_vars(),
                    got: p.len(),
                });
            }
            if !all_finite(p) {
                return Err(Error::NonFinite("witness point"));
            }
            let r = curve.residual_norm(p, base);
            if r > residual_tol {
                return Err(Error::SeedResidual(r));
            }
        }
        for (i, p) in points.iter().enumerate() {
            for q in &points[i + 1..] {
                if points_equal(p, q, point_eps) {
                    return Err(Error::InvalidInput(
                        "witness set contains duplicate points".into(),
                    ));
                }
            }
        }
        Ok(Self {
            curve,
            base,
            points,
        })
    }

    pub fn curve(&self) -> &CurveSystem {
        &self.curve
    }

    pub fn base(&self) -> C64 {
        self.base
    }

    pub fn points(&self) -> &[Vec<C64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn partition_points_by_images(images: &[Vec<C64>], eps: f64) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    'outer: for (i, img) in images.iter().enumerate() {
        for (k, &rep) in reps.iter().enumerate() {
            if points_equal(img, &images[rep], eps) {
                classes[k].push(i);
                continue 'outer;
            }
        }
        reps.push(i);
        classes.push(vec![i]);
    }
    classes
}

/// Group witness points into classes sharing an image under `alpha`.
/// Classes are listed in order of first appearance, as index lists.
pub fn partition_by_alpha(
    w: &WitnessSet,
    alpha: &AlphaMap,
    eps: f64,
) -> Result<Vec<Vec<usize>>> {
    let images = w
        .points()
        .iter()
        .map(|p| alpha.image(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(partition_points_by_images(&images, eps))
}

/// Degrees `(a, b)` of the two factors cut out by `alpha` on a complete
/// fiber: `a` is the common class size, `b` the class count, `a * b = |W|`.
pub fn decomposition_degrees(
    w: &WitnessSet,
    alpha: &AlphaMap,
    eps: f64,
) -> Result<(usize, usize)> {
    let classes = partition_by_alpha(w, alpha, eps)?;
    let sizes: Vec<usize> = classes.iter().map(|c| c.len()).collect();
    let a = sizes[0];
    if sizes.iter().any(|&s| s != a) {
        return Err(Error::NonUniformPartition(sizes));
    }
    Ok((a, sizes.len()))
}

/// One level of a composed decomposition: the partition of the fiber by the
/// composed prefix map, and the degree this level contributes.
#[derive(Debug, Clone)]
pub struct FactorLevel {
    pub partition: Vec<Vec<usize>>,
    pub degree: usize,
}

/// Partition a complete fiber along a chain of intermediate maps. The first
/// map reads the system variables and each later map reads the previous
/// image's coordinates. The final projection onto `t` is implied (or may be
/// passed explicitly as a map with no components); level degrees multiply to
/// the fiber size.
pub fn multi_factor_classify(
    w: &WitnessSet,
    chain: &[AlphaMap],
    eps: f64,
) -> Result<Vec<FactorLevel>> {
    if chain.is_empty() {
        return Err(Error::InvalidInput("empty decomposition chain".into()));
    }
    let mut levels = Vec::new();
    let mut composed: Option<AlphaMap> = None;
    let mut prev_size = 1usize;

    let implied_projection = chain
        .last()
        .map(|m| m.n_components() > 0)
        .unwrap_or(false);

    for (idx, map) in chain.iter().enumerate() {
        let gamma = match &composed {
            None => map.clone(),
            Some(inner) => map.after(inner)?,
        };
        let partition = if gamma.n_components() == 0 {
            if idx + 1 != chain.len() {
                return Err(Error::InvalidInput(
                    "projection map is only allowed as the last chain entry".into(),
                ));
            }
            vec![(0..w.len()).collect::<Vec<usize>>()]
        } else {
            let images = w
                .points()
                .iter()
                .map(|p| gamma.image(p))
                .collect::<Result<Vec<_>>>()?;
            partition_points_by_images(&images, eps)
        };
        let sizes: Vec<usize> = partition.iter().map(|c| c.len()).collect();
        let size = sizes[0];
        if sizes.iter().any(|&s| s != size) {
            return Err(Error::NonUniformPartition(sizes));
        }
        if prev_size == 0 || size % prev_size != 0 {
            return Err(Error::NonUniformPartition(sizes));
        }
        levels.push(FactorLevel {
            partition,
            degree: size / prev_size,
        });
        prev_size = size;
        composed = Some(gamma);
    }

    if implied_projection {
        if w.len() % prev_size != 0 {
            return Err(Error::NonUniformPartition(vec![prev_size, w.len()]));
        }
        levels.push(FactorLevel {
            partition: vec![(0..w.len()).collect()],
            degree: w.len() / prev_size,
        });
    }
    Ok(levels)
}
