//! Exact rational arithmetic and finite graded cohomology rings.
//!
//! A [`BaseRing`] is a finite-dimensional graded commutative ring given by an
//! explicit multiplication table over a fixed monomial basis, together with
//! the integration functional (top-class coefficient), a distinguished list
//! of degree-2 basis monomials spanning the divisor classes of interest, and
//! the intersection pairings of those divisors against a fixed set of
//! Mori-cone generators.
//!
//! Invariants checked at construction:
//! - the table is commutative and associative (exhaustively on the basis);
//! - multiplication respects the cohomological grading;
//! - `integrate` vanishes outside the top degree;
//! - every divisor-basis class is nilpotent.
//!
//! All values are immutable after construction and safe to share across
//! threads (ring handles are `Arc`s).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar. Arbitrary-precision, always in lowest terms with a
/// positive denominator (enforced by the backing implementation).
pub type Rational = num_rational::BigRational;

/// `p/q` as a [`Rational`]. Panics on `q == 0`; intended for literals.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Integer `n` as a [`Rational`].
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Fractional part `⟨x⟩ ∈ [0,1)` of a rational.
pub fn fractional_part(x: &Rational) -> Rational {
    let f = x - x.floor();
    debug_assert!(!f.is_negative() && f < Rational::one());
    f
}

/// Parse a rational from `"p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Config(format!("bad integer {t:?}: {e}")))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::Config(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(p)?, den))
        }
    }
}

/// Render a rational as `"p"` or `"p/q"` (lowest terms, `q > 0`).
pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A named basis monomial with its cohomological (real) degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisMonomial {
    pub name: String,
    pub degree: u32,
}

/// A finite graded cohomology ring presented by a multiplication table.
#[derive(Debug)]
pub struct BaseRing {
    basis: Vec<BasisMonomial>,
    /// `table[i * n + j]` = coefficient vector of `b_i · b_j` on the basis.
    table: Vec<Vec<Rational>>,
    top_degree: u32,
    /// `integrals[i]` = ∫ b_i; zero outside top degree.
    integrals: Vec<Rational>,
    /// Indices of the degree-2 basis monomials forming the divisor basis.
    divisor_basis: Vec<usize>,
    /// `curve_pairings[i][j]` = ⟨divisor_basis[i], Mori generator j⟩.
    curve_pairings: Vec<Vec<i64>>,
}

/// An effective curve class in coordinates on the chosen Mori-cone
/// generators. All coordinates are nonnegative by construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveClass {
    pub coords: Vec<u64>,
}

impl CurveClass {
    pub fn new(coords: Vec<u64>) -> Self {
        Self { coords }
    }

    /// The zero class in `m` coordinates.
    pub fn zero(m: usize) -> Self {
        Self { coords: vec![0; m] }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Coordinatewise sum (classes add in the Mori cone).
    pub fn add(&self, other: &CurveClass) -> CurveClass {
        assert_eq!(self.coords.len(), other.coords.len());
        CurveClass {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.coords.iter().sum()
    }
}

impl BaseRing {
    /// Build a ring from raw table data, validating every invariant.
    ///
    /// `table[i][j]` must be the coefficient vector of `b_i · b_j`.
    pub fn from_table(
        basis: Vec<BasisMonomial>,
        table: Vec<Vec<Vec<Rational>>>,
        integrals: Vec<Rational>,
        divisor_basis: Vec<usize>,
        curve_pairings: Vec<Vec<i64>>,
    ) -> Result<Arc<BaseRing>> {
        let n = basis.len();
        if n == 0 {
            return Err(Error::RingConstruction("empty basis".into()));
        }
        if basis[0].degree != 0 {
            return Err(Error::RingConstruction(
                "first basis monomial must be the unit (degree 0)".into(),
            ));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::RingConstruction("table shape mismatch".into()));
        }
        if integrals.len() != n {
            return Err(Error::RingConstruction("integrals length mismatch".into()));
        }
        let mut flat = Vec::with_capacity(n * n);
        for row in &table {
            for cell in row {
                if cell.len() != n {
                    return Err(Error::RingConstruction("table cell length mismatch".into()));
                }
                flat.push(cell.clone());
            }
        }
        let top_degree = basis.iter().map(|b| b.degree).max().unwrap();
        for idx in &divisor_basis {
            let deg = basis
                .get(*idx)
                .ok_or_else(|| Error::RingConstruction(format!("divisor index {idx} out of range")))?
                .degree;
            if deg != 2 {
                return Err(Error::RingConstruction(format!(
                    "divisor basis monomial {} has degree {deg}, expected 2",
                    basis[*idx].name
                )));
            }
        }
        if curve_pairings.len() != divisor_basis.len() {
            return Err(Error::RingConstruction(
                "curve_pairings rows must match divisor basis".into(),
            ));
        }
        let gens = curve_pairings.first().map_or(0, |r| r.len());
        if curve_pairings.iter().any(|r| r.len() != gens) {
            return Err(Error::RingConstruction("ragged curve_pairings".into()));
        }
        let ring = Arc::new(BaseRing {
            basis,
            table: flat,
            top_degree,
            integrals,
            divisor_basis,
            curve_pairings,
        });
        ring.validate()?;
        Ok(ring)
    }

    fn validate(self: &Arc<Self>) -> Result<()> {
        let n = self.basis.len();
        // Unit row/column.
        for i in 0..n {
            let prod = self.table_cell(0, i);
            let mut expected = vec![Rational::zero(); n];
            expected[i] = Rational::one();
            if prod != &expected[..] {
                return Err(Error::RingConstruction(format!(
                    "unit law fails at basis monomial {}",
                    self.basis[i].name
                )));
            }
        }
        // Grading and commutativity.
        for i in 0..n {
            for j in 0..n {
                let deg = self.basis[i].degree + self.basis[j].degree;
                for (k, c) in self.table_cell(i, j).iter().enumerate() {
                    if !c.is_zero() && self.basis[k].degree != deg {
                        return Err(Error::RingConstruction(format!(
                            "grading violation: {}·{} hits {}",
                            self.basis[i].name, self.basis[j].name, self.basis[k].name
                        )));
                    }
                }
                if self.table_cell(i, j) != self.table_cell(j, i) {
                    return Err(Error::RingConstruction(format!(
                        "not commutative at ({}, {})",
                        self.basis[i].name, self.basis[j].name
                    )));
                }
            }
        }
        // Associativity, exhaustively on basis triples.
        for i in 0..n {
            for j in 0..n {
                let ij = self.table_cell(i, j).to_vec();
                for k in 0..n {
                    let left = self.mul_vec_by_basis(&ij, k);
                    let jk = self.table_cell(j, k).to_vec();
                    let right = self.mul_basis_by_vec(i, &jk);
                    if left != right {
                        return Err(Error::RingConstruction(format!(
                            "not associative at ({}, {}, {})",
                            self.basis[i].name, self.basis[j].name, self.basis[k].name
                        )));
                    }
                }
            }
        }
        // Integration supported in top degree only.
        for (k, v) in self.integrals.iter().enumerate() {
            if !v.is_zero() && self.basis[k].degree != self.top_degree {
                return Err(Error::RingConstruction(format!(
                    "integrate is nonzero on {} of degree {}",
                    self.basis[k].name, self.basis[k].degree
                )));
            }
        }
        // Divisor nilpotency by repeated squaring.
        for &idx in &self.divisor_basis {
            let mut pow = Self::unit_vec(n, idx);
            let mut steps = 0u32;
            while pow.iter().any(|c| !c.is_zero()) {
                pow = self.mul_vec_by_basis(&pow, idx);
                steps += 1;
                if steps > self.top_degree / 2 + 1 {
                    return Err(Error::RingConstruction(format!(
                        "divisor {} is not nilpotent",
                        self.basis[idx].name
                    )));
                }
            }
        }
        Ok(())
    }

    fn unit_vec(n: usize, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        v[i] = Rational::one();
        v
    }

    fn table_cell(&self, i: usize, j: usize) -> &[Rational] {
        &self.table[i * self.basis.len() + j]
    }

    fn mul_vec_by_basis(&self, v: &[Rational], j: usize) -> Vec<Rational> {
        let n = self.basis.len();
        let mut out = vec![Rational::zero(); n];
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, t) in self.table_cell(i, j).iter().enumerate() {
                if !t.is_zero() {
                    out[k] += c * t;
                }
            }
        }
        out
    }

    fn mul_basis_by_vec(&self, i: usize, v: &[Rational]) -> Vec<Rational> {
        self.mul_vec_by_basis(v, i)
    }

    fn mul_vecs(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let n = self.basis.len();
        let mut out = vec![Rational::zero(); n];
        for (j, c) in b.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (k, t) in self.mul_vec_by_basis(a, j).into_iter().enumerate() {
                if !t.is_zero() {
                    out[k] += c * t;
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisMonomial] {
        &self.basis
    }

    pub fn top_degree(&self) -> u32 {
        self.top_degree
    }

    /// Indices of the degree-2 basis monomials forming the divisor basis.
    pub fn divisor_basis(&self) -> &[usize] {
        &self.divisor_basis
    }

    /// Number of Mori-cone generators (Novikov variables).
    pub fn num_curve_generators(&self) -> usize {
        self.curve_pairings.first().map_or(0, |r| r.len())
    }

    /// Nilpotency exponent bound: any positive-degree class to this power is 0.
    pub fn nilpotency_bound(&self) -> u32 {
        self.top_degree / 2 + 1
    }

    /// The cohomology ring of projective space: ℚ[H]/(H^{n+1}).
    pub fn projective_space(n: u32) -> Result<Arc<BaseRing>> {
        if n == 0 {
            return Err(Error::InvalidDimension(
                "projective space dimension must be >= 1".into(),
            ));
        }
        let n = n as usize;
        let basis: Vec<BasisMonomial> = (0..=n)
            .map(|k| BasisMonomial {
                name: match k {
                    0 => "1".to_string(),
                    1 => "H".to_string(),
                    _ => format!("H^{k}"),
                },
                degree: 2 * k as u32,
            })
            .collect();
        let dim = n + 1;
        let mut table = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                if i + j < dim {
                    table[i][j][i + j] = Rational::one();
                }
            }
        }
        let mut integrals = vec![Rational::zero(); dim];
        integrals[n] = Rational::one();
        Self::from_table(basis, table, integrals, vec![1], vec![vec![1]])
    }

    /// Tensor product of rings (Künneth). Basis monomials are pairs, divisor
    /// bases and Mori generators are concatenated.
    pub fn product(factors: &[Arc<BaseRing>]) -> Result<Arc<BaseRing>> {
        if factors.is_empty() {
            return Err(Error::RingConstruction("empty product".into()));
        }
        if factors.len() == 1 {
            return Ok(factors[0].clone());
        }
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = Self::product_pair(&acc, f)?;
        }
        Ok(acc)
    }

    fn product_pair(a: &Arc<BaseRing>, b: &Arc<BaseRing>) -> Result<Arc<BaseRing>> {
        let (na, nb) = (a.dim(), b.dim());
        let n = na * nb;
        let idx = |i: usize, j: usize| i * nb + j;
        let mut basis = Vec::with_capacity(n);
        for i in 0..na {
            for j in 0..nb {
                let name = match (a.basis[i].name.as_str(), b.basis[j].name.as_str()) {
                    ("1", "1") => "1".to_string(),
                    (x, "1") => x.to_string(),
                    ("1", y) => y.to_string(),
                    (x, y) => format!("{x}*{y}"),
                };
                basis.push(BasisMonomial {
                    name,
                    degree: a.basis[i].degree + b.basis[j].degree,
                });
            }
        }
        let mut table = vec![vec![vec![Rational::zero(); n]; n]; n];
        for i1 in 0..na {
            for j1 in 0..nb {
                for i2 in 0..na {
                    for j2 in 0..nb {
                        let pa = a.table_cell(i1, i2);
                        let pb = b.table_cell(j1, j2);
                        let cell = &mut table[idx(i1, j1)][idx(i2, j2)];
                        for (ka, ca) in pa.iter().enumerate() {
                            if ca.is_zero() {
                                continue;
                            }
                            for (kb, cb) in pb.iter().enumerate() {
                                if !cb.is_zero() {
                                    cell[idx(ka, kb)] += ca * cb;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut integrals = vec![Rational::zero(); n];
        for i in 0..na {
            for j in 0..nb {
                integrals[idx(i, j)] = &a.integrals[i] * &b.integrals[j];
            }
        }
        let (ga, gb) = (a.num_curve_generators(), b.num_curve_generators());
        let mut divisor_basis = Vec::new();
        let mut curve_pairings = Vec::new();
        for (row, &di) in a.curve_pairings.iter().zip(&a.divisor_basis) {
            divisor_basis.push(idx(di, 0));
            let mut r = row.clone();
            r.extend(std::iter::repeat(0).take(gb));
            curve_pairings.push(r);
        }
        for (row, &dj) in b.curve_pairings.iter().zip(&b.divisor_basis) {
            divisor_basis.push(idx(0, dj));
            let mut r = vec![0; ga];
            r.extend(row.iter().copied());
            curve_pairings.push(r);
        }
        Self::from_table(basis, table, integrals, divisor_basis, curve_pairings)
    }

    /// The truncated polynomial ring ℚ[x]/(x^order) on a degree-2 nilpotent
    /// generator, with zero integration and no Mori generators. Used as a
    /// formal equivariant-parameter extension (tensor with the base ring).
    pub fn nilpotent_line(name: &str, order: u32) -> Result<Arc<BaseRing>> {
        if order == 0 {
            return Err(Error::InvalidDimension("nilpotency order must be >= 1".into()));
        }
        let dim = order as usize;
        let basis: Vec<BasisMonomial> = (0..dim)
            .map(|k| BasisMonomial {
                name: match k {
                    0 => "1".to_string(),
                    1 => name.to_string(),
                    _ => format!("{name}^{k}"),
                },
                degree: 2 * k as u32,
            })
            .collect();
        let mut table = vec![vec![vec![Rational::zero(); dim]; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                if i + j < dim {
                    table[i][j][i + j] = Rational::one();
                }
            }
        }
        let integrals = vec![Rational::zero(); dim];
        let divisor_basis = if order > 1 { vec![1] } else { vec![] };
        let curve_pairings = if order > 1 { vec![vec![]] } else { vec![] };
        Self::from_table(basis, table, integrals, divisor_basis, curve_pairings)
    }

    /// The zero element.
    pub fn zero(self: &Arc<Self>) -> RingElement {
        RingElement {
            ring: self.clone(),
            coeffs: vec![Rational::zero(); self.dim()],
        }
    }

    /// The unit element.
    pub fn one(self: &Arc<Self>) -> RingElement {
        self.basis_element(0)
    }

    /// The `i`-th basis monomial as an element.
    pub fn basis_element(self: &Arc<Self>, i: usize) -> RingElement {
        let mut coeffs = vec![Rational::zero(); self.dim()];
        coeffs[i] = Rational::one();
        RingElement {
            ring: self.clone(),
            coeffs,
        }
    }

    /// Look up a basis monomial by name.
    pub fn basis_element_by_name(self: &Arc<Self>, name: &str) -> Result<RingElement> {
        let i = self
            .basis
            .iter()
            .position(|b| b.name == name)
            .ok_or_else(|| Error::MissingData(format!("no basis monomial named {name:?}")))?;
        Ok(self.basis_element(i))
    }

    /// Element from a full coefficient vector.
    pub fn element(self: &Arc<Self>, coeffs: Vec<Rational>) -> Result<RingElement> {
        if coeffs.len() != self.dim() {
            return Err(Error::RingConstruction(format!(
                "coefficient vector length {} != ring dimension {}",
                coeffs.len(),
                self.dim()
            )));
        }
        Ok(RingElement {
            ring: self.clone(),
            coeffs,
        })
    }

    /// ⟨divisor class, curve class⟩ via the supplied pairing matrix.
    ///
    /// `class` must be homogeneous of degree 2 and supported on the divisor
    /// basis; the result must be an integer.
    pub fn intersect(&self, class: &RingElement, d: &CurveClass) -> Result<i64> {
        if d.coords.len() != self.num_curve_generators() {
            return Err(Error::Domain(format!(
                "curve class has {} coordinates, ring has {} Mori generators",
                d.coords.len(),
                self.num_curve_generators()
            )));
        }
        let mut acc = Rational::zero();
        for (k, c) in class.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if self.basis[k].degree != 2 {
                return Err(Error::Grading(format!(
                    "intersect requires a degree-2 class; found component {}",
                    self.basis[k].name
                )));
            }
            let pos = self
                .divisor_basis
                .iter()
                .position(|&i| i == k)
                .ok_or_else(|| {
                    Error::Domain(format!(
                        "degree-2 monomial {} has no curve pairings",
                        self.basis[k].name
                    ))
                })?;
            for (j, &coord) in d.coords.iter().enumerate() {
                if coord != 0 {
                    acc += c * rat_int(self.curve_pairings[pos][j] * coord as i64);
                }
            }
        }
        if !acc.denom().is_one() {
            return Err(Error::Domain(format!(
                "intersection number {} is not an integer",
                format_rational(&acc)
            )));
        }
        let num = acc.numer();
        i64::try_from(num.clone()).map_err(|_| Error::Domain("intersection overflows i64".into()))
    }
}

/// An element of a [`BaseRing`]: a dense exact-rational coefficient vector
/// over the monomial basis, carrying a shared handle to its ring.
#[derive(Clone)]
pub struct RingElement {
    ring: Arc<BaseRing>,
    coeffs: Vec<Rational>,
}

impl RingElement {
    pub fn ring(&self) -> &Arc<BaseRing> {
        &self.ring
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &Rational {
        &self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn assert_same_ring(&self, other: &RingElement) {
        assert!(
            Arc::ptr_eq(&self.ring, &other.ring),
            "ring elements belong to different rings"
        );
    }

    pub fn add(&self, other: &RingElement) -> RingElement {
        self.assert_same_ring(other);
        RingElement {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &RingElement) -> RingElement {
        self.assert_same_ring(other);
        RingElement {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &RingElement) -> RingElement {
        self.assert_same_ring(other);
        RingElement {
            ring: self.ring.clone(),
            coeffs: self.ring.mul_vecs(&self.coeffs, &other.coeffs),
        }
    }

    /// `self^k` by repeated multiplication (small exponents only).
    pub fn pow(&self, k: u32) -> RingElement {
        let mut acc = self.ring.one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// ∫ of the element: the integration functional of the ring.
    pub fn integrate(&self) -> Rational {
        self.coeffs
            .iter()
            .zip(&self.ring.integrals)
            .map(|(c, w)| c * w)
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// The degree-`deg` homogeneous component.
    pub fn degree_component(&self, deg: u32) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    if self.ring.basis[k].degree == deg {
                        c.clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
        }
    }

    /// `Some(deg)` if homogeneous (zero counts as any degree → `Some(0)`).
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut deg = None;
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                match deg {
                    None => deg = Some(self.ring.basis[k].degree),
                    Some(d) if d != self.ring.basis[k].degree => return None,
                    _ => {}
                }
            }
        }
        Some(deg.unwrap_or(0))
    }
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) && self.coeffs == other.coeffs
    }
}

impl Eq for RingElement {}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl RingElement {
    /// Human-readable form like `2 + 3*H - 6*H^2`.
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let name = &self.ring.basis[k].name;
            let cs = format_rational(c);
            parts.push(if name == "1" {
                cs
            } else if c.is_one() {
                name.clone()
            } else {
                format!("{cs}*{name}")
            });
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2() -> Arc<BaseRing> {
        BaseRing::projective_space(2).unwrap()
    }

    #[test]
    fn projective_plane_relations() {
        let ring = p2();
        let h = ring.basis_element(1);
        let h2 = h.mul(&h);
        assert_eq!(h2, ring.basis_element(2));
        assert!(h2.mul(&h).is_zero());
        assert_eq!(h2.integrate(), rat_int(1));
    }

    #[test]
    fn projective_three_space() {
        let ring = BaseRing::projective_space(3).unwrap();
        let h = ring.basis_element(1);
        let h3 = h.pow(3);
        assert!(h3.mul(&h).is_zero());
        assert_eq!(h3.integrate(), rat_int(1));
    }

    #[test]
    fn invalid_dimension_rejected() {
        assert!(matches!(
            BaseRing::projective_space(0),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn cubic_intersection_number() {
        let ring = p2();
        let d = ring.basis_element(1).scale(&rat_int(3));
        assert_eq!(ring.intersect(&d, &CurveClass::new(vec![2])).unwrap(), 6);
        assert_eq!(ring.intersect(&d, &CurveClass::new(vec![1])).unwrap(), 3);
    }

    #[test]
    fn intersect_rejects_wrong_degree() {
        let ring = p2();
        let h2 = ring.basis_element(2);
        assert!(matches!(
            ring.intersect(&h2, &CurveClass::new(vec![1])),
            Err(Error::Grading(_))
        ));
    }

    #[test]
    fn integrate_is_linear() {
        let ring = p2();
        let h2 = ring.basis_element(2);
        assert_eq!(h2.scale(&rat_int(6)).integrate(), rat_int(6));
        assert_eq!(ring.one().integrate(), rat_int(0));
    }

    #[test]
    fn product_of_lines_kunneth() {
        let p1 = BaseRing::projective_space(1).unwrap();
        let ring = BaseRing::product(&[p1.clone(), p1]).unwrap();
        assert_eq!(ring.dim(), 4);
        assert_eq!(ring.top_degree(), 4);
        let h1 = ring.basis_element_by_name("H").unwrap();
        // H1^2 = 0, H2^2 = 0, and the mixed product integrates to 1.
        assert!(h1.mul(&h1).is_zero());
        let names: Vec<_> = ring.basis().iter().map(|b| b.name.clone()).collect();
        assert!(names.iter().any(|n| n == "H*H"));
        let h2 = ring.basis_element_by_name("H*H").unwrap();
        assert_eq!(h2.integrate(), rat_int(1));
        assert_eq!(ring.num_curve_generators(), 2);
    }

    #[test]
    fn product_intersections() {
        let p1 = BaseRing::projective_space(1).unwrap();
        let ring = BaseRing::product(&[p1.clone(), p1]).unwrap();
        let divisors = ring.divisor_basis().to_vec();
        let h1 = ring.basis_element(divisors[0]);
        let h2 = ring.basis_element(divisors[1]);
        // D = H1 against d = (0,1) is 0; D = H1 + H2 against (1,1) is 2.
        assert_eq!(ring.intersect(&h1, &CurveClass::new(vec![0, 1])).unwrap(), 0);
        let d = h1.add(&h2);
        assert_eq!(ring.intersect(&d, &CurveClass::new(vec![1, 1])).unwrap(), 2);
    }

    #[test]
    fn rational_round_trip() {
        for s in ["3", "-7/4", "0", "135/4"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational("6/4").unwrap(), rat(3, 2));
    }

    #[test]
    fn fractional_parts() {
        assert_eq!(fractional_part(&rat(7, 3)), rat(1, 3));
        assert_eq!(fractional_part(&rat(-2, 5)), rat(3, 5));
        assert_eq!(fractional_part(&rat_int(4)), rat_int(0));
    }

    #[test]
    fn nilpotent_line_extension() {
        let ring = BaseRing::nilpotent_line("t", 3).unwrap();
        let t = ring.basis_element(1);
        assert!(t.pow(3).is_zero());
        assert!(!t.pow(2).is_zero());
    }
}
