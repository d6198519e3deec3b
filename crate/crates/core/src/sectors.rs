//! State spaces for the orbifold and relative theories.
//!
//! The root-stack side uses Chen–Ruan sectors labelled by ages in `[0,1)`;
//! the relative side uses integer contact orders. A [`StateVector`] is a
//! finite sum of (sector label, ambient class) pairs. Classes in twisted or
//! nonzero-contact sectors are ambient restrictions to D; they are only ever
//! paired through `∫_D α = ∫_X D∪α`, and can be canonicalized modulo the
//! radical of that form (the ambient classes killed by restriction to D).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{fractional_part, rat_int, BaseRing, CurveClass, Rational, RingElement};

/// Which state space a label belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelKind {
    Age,
    Contact,
}

/// A sector label: `Age(f)` with `0 ≤ f < 1` on the orbifold side, or
/// `Contact(i)` with `i ∈ ℤ` on the relative side. `Age(0)` and `Contact(0)`
/// are the untwisted sectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SectorLabel {
    Age(Rational),
    Contact(i64),
}

impl SectorLabel {
    /// Age label, normalized to the fractional part.
    pub fn age(f: Rational) -> SectorLabel {
        SectorLabel::Age(fractional_part(&f))
    }

    pub fn contact(i: i64) -> SectorLabel {
        SectorLabel::Contact(i)
    }

    pub fn kind(&self) -> LabelKind {
        match self {
            SectorLabel::Age(_) => LabelKind::Age,
            SectorLabel::Contact(_) => LabelKind::Contact,
        }
    }

    pub fn is_untwisted(&self) -> bool {
        match self {
            SectorLabel::Age(f) => f.is_zero(),
            SectorLabel::Contact(i) => *i == 0,
        }
    }

    /// The untwisted label of the given kind.
    pub fn untwisted(kind: LabelKind) -> SectorLabel {
        match kind {
            LabelKind::Age => SectorLabel::Age(Rational::zero()),
            LabelKind::Contact => SectorLabel::Contact(0),
        }
    }

    pub fn render(&self) -> String {
        match self {
            SectorLabel::Age(f) => format!("age {}", crate::exactalg::format_rational(f)),
            SectorLabel::Contact(i) => format!("contact {i}"),
        }
    }
}

/// A finite sum of (sector label, ambient class) terms, all labels of the
/// same kind. Zero classes are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct StateVector {
    terms: BTreeMap<SectorLabel, RingElement>,
}

impl StateVector {
    pub fn zero() -> StateVector {
        StateVector::default()
    }

    pub fn from_term(label: SectorLabel, class: RingElement) -> StateVector {
        let mut v = StateVector::zero();
        v.add_term(label, class);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The label kind, or `None` for the zero vector (compatible with both).
    pub fn kind(&self) -> Option<LabelKind> {
        self.terms.keys().next().map(SectorLabel::kind)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SectorLabel, &RingElement)> {
        self.terms.iter()
    }

    pub fn get(&self, label: &SectorLabel) -> Option<&RingElement> {
        self.terms.get(label)
    }

    pub fn add_term(&mut self, label: SectorLabel, class: RingElement) {
        if class.is_zero() {
            return;
        }
        if let Some(kind) = self.kind() {
            assert_eq!(kind, label.kind(), "mixed sector label kinds in StateVector");
        }
        match self.terms.entry(label) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(class);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&class);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &StateVector) -> StateVector {
        let mut out = self.clone();
        for (l, c) in other.iter() {
            out.add_term(l.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> StateVector {
        if s.is_zero() {
            return StateVector::zero();
        }
        StateVector {
            terms: self
                .terms
                .iter()
                .map(|(l, c)| (l.clone(), c.scale(s)))
                .collect(),
        }
    }

    /// Sectorwise cup product with an untwisted (ambient) class.
    pub fn cup(&self, class: &RingElement) -> StateVector {
        let mut out = StateVector::zero();
        for (l, c) in self.iter() {
            out.add_term(l.clone(), c.mul(class));
        }
        out
    }

    /// Product of state vectors. Only defined when at least one side is
    /// supported on the untwisted sector (the only case the pipeline needs:
    /// exponential prefactors are untwisted).
    pub fn mul(&self, other: &StateVector) -> Result<StateVector> {
        let untw = |v: &StateVector| {
            v.terms.keys().all(SectorLabel::is_untwisted)
        };
        let (scalar_side, general_side) = if untw(self) {
            (self, other)
        } else if untw(other) {
            (other, self)
        } else {
            return Err(Error::IncompatibleSectors(
                "product of two twisted state vectors is out of scope".into(),
            ));
        };
        match scalar_side.terms.values().next() {
            None => Ok(StateVector::zero()),
            Some(class) => Ok(general_side.cup(class)),
        }
    }
}

/// How the divisor direction is rooted: a finite root index `r`, or the
/// relative (r → ∞) theory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootIndex {
    Root(u64),
    Relative,
}

/// Context for the sector pairings: the ambient ring, the divisor D, the
/// root index, and the precomputed radical of the restriction form
/// `(γ, δ) ↦ ∫_X D·γ·δ` used to canonicalize restricted classes.
#[derive(Debug)]
pub struct SectorPairingContext {
    ring: Arc<BaseRing>,
    divisor: RingElement,
    r: RootIndex,
    /// Kernel of the Gram matrix of the restriction form, in reduced row
    /// echelon form; `radical_pivots[k]` is the pivot column of row `k`.
    radical_kernel: Vec<Vec<Rational>>,
    radical_pivots: Vec<usize>,
}

impl SectorPairingContext {
    pub fn new(ring: Arc<BaseRing>, divisor: RingElement, r: RootIndex) -> Result<SectorPairingContext> {
        if divisor.homogeneous_degree() != Some(2) && !divisor.is_zero() {
            return Err(Error::Grading("divisor must be homogeneous of degree 2".into()));
        }
        if let RootIndex::Root(0) = r {
            return Err(Error::Config("root index must be positive".into()));
        }
        let n = ring.dim();
        // Gram matrix of (γ, δ) ↦ ∫_X D·γ·δ on the monomial basis.
        let mut gram = Vec::with_capacity(n);
        for i in 0..n {
            let bi = ring.basis_element(i);
            let dbi = bi.mul(&divisor);
            let row: Vec<Rational> = (0..n)
                .map(|j| dbi.mul(&ring.basis_element(j)).integrate())
                .collect();
            gram.push(row);
        }
        let (radical_kernel, radical_pivots) = kernel_rref(gram);
        Ok(SectorPairingContext {
            ring,
            divisor,
            r,
            radical_kernel,
            radical_pivots,
        })
    }

    pub fn ring(&self) -> &Arc<BaseRing> {
        &self.ring
    }

    pub fn divisor(&self) -> &RingElement {
        &self.divisor
    }

    pub fn root_index(&self) -> RootIndex {
        self.r
    }

    fn r_value(&self) -> Result<u64> {
        match self.r {
            RootIndex::Root(r) => Ok(r),
            RootIndex::Relative => Err(Error::LabelKind(
                "age-labelled operation on a relative (r = ∞) context".into(),
            )),
        }
    }

    /// ∫_D of an ambient class, computed as ∫_X D∪α.
    pub fn integrate_on_divisor(&self, class: &RingElement) -> Rational {
        class.mul(&self.divisor).integrate()
    }

    /// Canonical representative of an ambient class modulo the radical of
    /// the restriction form (classes killed by restriction to D).
    pub fn canonicalize_restriction(&self, class: &RingElement) -> RingElement {
        let mut out = class.clone();
        for (row, &piv) in self.radical_kernel.iter().zip(&self.radical_pivots) {
            let c = out.coeff(piv).clone();
            if !c.is_zero() {
                let correction = self
                    .ring
                    .element(row.iter().map(|x| x * &c).collect())
                    .expect("kernel vector has ring dimension");
                out = out.sub(&correction);
            }
        }
        out
    }

    /// Canonicalize every twisted / nonzero-contact term of a state vector.
    pub fn canonicalize_vector(&self, v: &StateVector) -> StateVector {
        let mut out = StateVector::zero();
        for (l, c) in v.iter() {
            if l.is_untwisted() {
                out.add_term(l.clone(), c.clone());
            } else {
                out.add_term(l.clone(), self.canonicalize_restriction(c));
            }
        }
        out
    }
}

/// Exact kernel of a rational matrix, returned in reduced row echelon form
/// together with the pivot column of each kernel basis vector.
fn kernel_rref(mut m: Vec<Vec<Rational>>) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_cols = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = m[rank][col].clone();
        for x in &mut m[rank] {
            *x /= &inv;
        }
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    let t = &m[rank][c] * &f;
                    m[r][c] -= t;
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == rows {
            break;
        }
    }
    // Free columns parametrize the kernel; each kernel vector has a 1 at its
    // free column and zeros at the other free columns — already RREF.
    let mut kernel = Vec::new();
    let mut kernel_pivots = Vec::new();
    for col in 0..cols {
        if pivot_cols.contains(&col) {
            continue;
        }
        let mut v = vec![Rational::zero(); cols];
        v[col] = Rational::one();
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[r][col].clone();
        }
        kernel.push(v);
        kernel_pivots.push(col);
    }
    (kernel, kernel_pivots)
}

/// The relative pairing of Eq.-style block form: zero unless contact orders
/// are opposite; `∫_X γδ` on the untwisted block; `∫_D γδ = ∫_X D·γ·δ` on the
/// nonzero blocks.
pub fn pair_relative(u: &StateVector, v: &StateVector, ctx: &SectorPairingContext) -> Result<Rational> {
    check_kind(u, LabelKind::Contact)?;
    check_kind(v, LabelKind::Contact)?;
    let mut acc = Rational::zero();
    for (lu, cu) in u.iter() {
        let SectorLabel::Contact(i) = lu else { unreachable!() };
        if let Some(cv) = v.get(&SectorLabel::Contact(-i)) {
            if *i == 0 {
                acc += cu.mul(cv).integrate();
            } else {
                acc += ctx.integrate_on_divisor(&cu.mul(cv));
            }
        }
    }
    Ok(acc)
}

/// The Chen–Ruan pairing of the root stack: zero unless the ages sum to an
/// integer; `∫_X` on the untwisted block; `(1/r)∫_D` on twisted blocks.
pub fn pair_root_stack(u: &StateVector, v: &StateVector, ctx: &SectorPairingContext) -> Result<Rational> {
    check_kind(u, LabelKind::Age)?;
    check_kind(v, LabelKind::Age)?;
    let r = ctx.r_value()?;
    for w in [u, v] {
        for (l, _) in w.iter() {
            let SectorLabel::Age(f) = l else { unreachable!() };
            if !(f * rat_int(r as i64)).denom().is_one() {
                return Err(Error::LabelKind(format!(
                    "age {} has denominator not dividing r = {r}",
                    crate::exactalg::format_rational(f)
                )));
            }
        }
    }
    let mut acc = Rational::zero();
    for (lu, cu) in u.iter() {
        let SectorLabel::Age(f) = lu else { unreachable!() };
        let opposite = SectorLabel::age(-f.clone());
        if let Some(cv) = v.get(&opposite) {
            if f.is_zero() {
                acc += cu.mul(cv).integrate();
            } else {
                acc += ctx.integrate_on_divisor(&cu.mul(cv)) / rat_int(r as i64);
            }
        }
    }
    Ok(acc)
}

fn check_kind(v: &StateVector, kind: LabelKind) -> Result<()> {
    match v.kind() {
        None => Ok(()),
        Some(k) if k == kind => Ok(()),
        Some(k) => Err(Error::LabelKind(format!(
            "expected {kind:?} labels, found {k:?}"
        ))),
    }
}

/// The §4.2-style identification of an I-function coefficient on the root
/// stack with its relative counterpart: the sector `Age(⟨(−D·d + ext)/r⟩)`
/// is relabelled `Contact(−D·d + ext)`, and the coefficient loses its `r`
/// factor (the `r·𝟏 ↦ [𝟏]` identification) exactly when the target contact
/// order is nonzero. The output is canonicalized modulo restriction to D.
pub fn root_to_relative(
    v: &StateVector,
    ctx: &SectorPairingContext,
    d: &CurveClass,
    extension_contribution: i64,
) -> Result<StateVector> {
    check_kind(v, LabelKind::Age)?;
    let r = ctx.r_value()?;
    let contact = -ctx.ring.intersect(&ctx.divisor, d)? + extension_contribution;
    let expected = SectorLabel::age(rat_int(contact) / rat_int(r as i64));
    let mut out = StateVector::zero();
    for (l, c) in v.iter() {
        if *l != expected {
            return Err(Error::Identification(format!(
                "sector {} is not the declared (d, extension) sector {}",
                l.render(),
                expected.render()
            )));
        }
        if contact < 0 {
            // I₊ branch: the diverging factor r of 1/(D/r + (…)z) is absorbed
            // into the identification, so the class is divided by r.
            out.add_term(
                SectorLabel::contact(contact),
                ctx.canonicalize_restriction(&c.scale(&Rational::new(1.into(), r.into()))),
            );
        } else if contact > 0 {
            // I₋ branch: the gamma factor is already 1; identify the class
            // as-is (restricted to D).
            out.add_term(SectorLabel::contact(contact), ctx.canonicalize_restriction(c));
        } else {
            out.add_term(SectorLabel::contact(0), c.clone());
        }
    }
    Ok(out)
}

/// The `r^{ρ_-}` multiplier of the orbifold/relative correspondence, applied
/// to invariant tables at extraction time.
pub fn rho_minus_scale(r: u64, rho_minus: u32) -> Rational {
    rat_int(r as i64).pow(rho_minus as i32)
}
