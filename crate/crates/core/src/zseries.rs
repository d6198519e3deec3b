//! The series kernel.
//!
//! - [`FactoredZFunction`]: a product of linear factors `(class + a·z)^{±1}`
//!   times `scalar · prefactor · z^{z_power}`, kept factored and expanded
//!   exactly at z = ∞ (inverse factors terminate by nilpotency).
//! - [`LaurentBlock`]: a finite Laurent polynomial in z with
//!   [`StateVector`] coefficients and an explicit exactness window.
//! - [`GradedSeries`]: a truncated series indexed by (curve class, extension
//!   multi-index, log-Novikov powers) with `LaurentBlock` values.
//! - [`MirrorMap`] / [`InversionPlan`]: the z⁰ slice of an I-function,
//!   classified by direction, and its order-by-order formal inverse.
//!
//! Everything is exact; truncation shows up only as explicit index bounds
//! and Laurent windows.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{
    fractional_part, format_rational, rat_int, BaseRing, CurveClass, Rational, RingElement,
};
use crate::sectors::{LabelKind, SectorLabel, StateVector};

// ---------------------------------------------------------------------------
// FactoredZFunction
// ---------------------------------------------------------------------------

/// One linear factor `(class + a·z)^{±1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFactor {
    pub class: RingElement,
    pub a: Rational,
    pub inverted: bool,
}

/// `scalar · prefactor · z^{z_power} · ∏ (class_i + a_i z)^{±1}`, kept
/// factored until a single final expansion.
#[derive(Clone, Debug)]
pub struct FactoredZFunction {
    ring: Arc<BaseRing>,
    pub z_power: i64,
    pub scalar: Rational,
    pub prefactor: RingElement,
    pub factors: Vec<LinearFactor>,
}

impl PartialEq for FactoredZFunction {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring)
            && self.z_power == other.z_power
            && self.scalar == other.scalar
            && self.prefactor == other.prefactor
            && self.factors == other.factors
    }
}

impl FactoredZFunction {
    /// The constant 1.
    pub fn one(ring: &Arc<BaseRing>) -> FactoredZFunction {
        FactoredZFunction {
            ring: ring.clone(),
            z_power: 0,
            scalar: Rational::one(),
            prefactor: ring.one(),
            factors: Vec::new(),
        }
    }

    /// The monomial `z^p`.
    pub fn z_monomial(ring: &Arc<BaseRing>, p: i64) -> FactoredZFunction {
        let mut f = Self::one(ring);
        f.z_power = p;
        f
    }

    pub fn ring(&self) -> &Arc<BaseRing> {
        &self.ring
    }

    pub fn scale(mut self, s: &Rational) -> FactoredZFunction {
        self.scalar *= s;
        self
    }

    pub fn mul_class(mut self, c: &RingElement) -> FactoredZFunction {
        self.prefactor = self.prefactor.mul(c);
        self
    }

    pub fn mul_z_power(mut self, p: i64) -> FactoredZFunction {
        self.z_power += p;
        self
    }

    pub fn push_factor(mut self, class: RingElement, a: Rational, inverted: bool) -> FactoredZFunction {
        self.factors.push(LinearFactor { class, a, inverted });
        self
    }

    pub fn mul(mut self, other: &FactoredZFunction) -> FactoredZFunction {
        assert!(Arc::ptr_eq(&self.ring, &other.ring));
        self.z_power += other.z_power;
        self.scalar *= &other.scalar;
        self.prefactor = self.prefactor.mul(&other.prefactor);
        self.factors.extend(other.factors.iter().cloned());
        self
    }

    /// Exact Laurent expansion at z = ∞ with plain ring coefficients.
    pub fn expand_ring(&self) -> Result<BTreeMap<i64, RingElement>> {
        let start = self.prefactor.scale(&self.scalar);
        let mut acc: BTreeMap<i64, RingElement> = BTreeMap::new();
        if !start.is_zero() {
            acc.insert(self.z_power, start);
        }
        for f in &self.factors {
            acc = if f.inverted {
                if f.a.is_zero() {
                    return Err(Error::NilpotentDivision(format!(
                        "cannot invert ({} + 0·z)",
                        f.class.render()
                    )));
                }
                if !f.class.degree_component(0).is_zero() {
                    return Err(Error::NilpotentDivision(format!(
                        "inverse factor class {} has a scalar part",
                        f.class.render()
                    )));
                }
                // (c + az)^{-1} = Σ_j (−1)^j c^j a^{−j−1} z^{−j−1},
                // finite by nilpotency of c.
                let mut out: BTreeMap<i64, RingElement> = BTreeMap::new();
                let mut cpow = self.ring.one();
                let mut apow = Rational::one() / &f.a;
                let mut sign = Rational::one();
                for j in 0..self.ring.nilpotency_bound() + 1 {
                    if cpow.is_zero() {
                        break;
                    }
                    let coeff = cpow.scale(&(&sign * &apow));
                    for (e, v) in &acc {
                        merge_ring(&mut out, e - 1 - j as i64, v.mul(&coeff));
                    }
                    cpow = cpow.mul(&f.class);
                    apow /= &f.a;
                    sign = -sign;
                }
                out
            } else {
                let mut out: BTreeMap<i64, RingElement> = BTreeMap::new();
                for (e, v) in &acc {
                    if !f.class.is_zero() {
                        merge_ring(&mut out, *e, v.mul(&f.class));
                    }
                    if !f.a.is_zero() {
                        merge_ring(&mut out, e + 1, v.scale(&f.a));
                    }
                }
                out
            };
        }
        Ok(acc)
    }

    /// Factored rendering, e.g. `z^1 · 2 · (3*H + 1z)(H + 1z)^-3`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if self.z_power != 0 {
            s.push_str(&format!("z^{} · ", self.z_power));
        }
        if !self.scalar.is_one() {
            s.push_str(&format!("{} · ", format_rational(&self.scalar)));
        }
        if self.prefactor != self.ring.one() {
            s.push_str(&format!("[{}] · ", self.prefactor.render()));
        }
        if self.factors.is_empty() {
            s.push('1');
        } else {
            for f in &self.factors {
                s.push_str(&format!(
                    "({} + {}z){}",
                    f.class.render(),
                    format_rational(&f.a),
                    if f.inverted { "^-1" } else { "" }
                ));
            }
        }
        s
    }
}

fn merge_ring(map: &mut BTreeMap<i64, RingElement>, e: i64, v: RingElement) {
    if v.is_zero() {
        return;
    }
    match map.entry(e) {
        std::collections::btree_map::Entry::Vacant(slot) => {
            slot.insert(v);
        }
        std::collections::btree_map::Entry::Occupied(mut slot) => {
            let sum = slot.get().add(&v);
            if sum.is_zero() {
                slot.remove();
            } else {
                *slot.get_mut() = sum;
            }
        }
    }
}

/// `∏_{⟨a⟩=⟨c⟩, a≤0}(cls+az) / ∏_{⟨a⟩=⟨c⟩, a≤c}(cls+az)`, evaluated as the
/// finite product `1/∏_{0<a≤c}(cls+az)` for `c ≥ 0` and `∏_{c<a≤0}(cls+az)`
/// for `c < 0`, with `a` ranging over `⟨c⟩ + ℤ`.
pub fn gamma_ratio(cls: &RingElement, c: &Rational) -> FactoredZFunction {
    let ring = cls.ring().clone();
    let mut f = FactoredZFunction::one(&ring);
    let frac = fractional_part(c);
    if c >= &Rational::zero() {
        let mut a = if frac.is_zero() { Rational::one() } else { frac };
        while &a <= c {
            f = f.push_factor(cls.clone(), a.clone(), true);
            a += Rational::one();
        }
    } else {
        let mut a = c + Rational::one();
        while a <= Rational::zero() {
            f = f.push_factor(cls.clone(), a.clone(), false);
            a += Rational::one();
        }
    }
    f
}

/// `∏_{a=1}^{n}(cls + a·z)`; the empty product for `n = 0`.
pub fn ascending_product(cls: &RingElement, n: i64) -> Result<FactoredZFunction> {
    if n < 0 {
        return Err(Error::Domain(format!("ascending_product with negative n = {n}")));
    }
    let ring = cls.ring().clone();
    let mut f = FactoredZFunction::one(&ring);
    for a in 1..=n {
        f = f.push_factor(cls.clone(), rat_int(a), false);
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// LaurentBlock
// ---------------------------------------------------------------------------

/// A finite Laurent polynomial in z with [`StateVector`] coefficients.
///
/// `window_min = None` means the block is exact at every exponent;
/// `Some(m)` means coefficients are only guaranteed for exponents `≥ m`
/// (truncation loss is explicit).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LaurentBlock {
    coeffs: BTreeMap<i64, StateVector>,
    window_min: Option<i64>,
}

impl LaurentBlock {
    pub fn zero() -> LaurentBlock {
        LaurentBlock::default()
    }

    pub fn from_term(z_exp: i64, v: StateVector) -> LaurentBlock {
        let mut b = LaurentBlock::zero();
        b.add_term(z_exp, v);
        b
    }

    /// Wrap a factored expansion on a single sector.
    pub fn from_expansion(f: &FactoredZFunction, sector: SectorLabel) -> Result<LaurentBlock> {
        let mut b = LaurentBlock::zero();
        for (e, v) in f.expand_ring()? {
            b.add_term(e, StateVector::from_term(sector.clone(), v));
        }
        Ok(b)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn window_min(&self) -> Option<i64> {
        self.window_min
    }

    /// Smallest stored exponent.
    pub fn z_min(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Largest stored exponent.
    pub fn z_max(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &StateVector)> {
        self.coeffs.iter()
    }

    pub fn add_term(&mut self, z_exp: i64, v: StateVector) {
        if v.is_zero() {
            return;
        }
        if let Some(m) = self.window_min {
            if z_exp < m {
                return;
            }
        }
        match self.coeffs.entry(z_exp) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&v);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Coefficient at `z_exp`; errors below the exactness window.
    pub fn coeff(&self, z_exp: i64) -> Result<StateVector> {
        if let Some(m) = self.window_min {
            if z_exp < m {
                return Err(Error::Window(format!(
                    "coefficient at z^{z_exp} requested, block exact only down to z^{m}"
                )));
            }
        }
        Ok(self.coeffs.get(&z_exp).cloned().unwrap_or_default())
    }

    pub fn add(&self, other: &LaurentBlock) -> LaurentBlock {
        let window_min = match (self.window_min, other.window_min) {
            (None, w) | (w, None) => w,
            (Some(a), Some(b)) => Some(a.max(b)),
        };
        let mut out = LaurentBlock {
            coeffs: BTreeMap::new(),
            window_min,
        };
        for (e, v) in self.iter().chain(other.iter()) {
            out.add_term(*e, v.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> LaurentBlock {
        if s.is_zero() {
            return LaurentBlock {
                coeffs: BTreeMap::new(),
                window_min: self.window_min,
            };
        }
        LaurentBlock {
            coeffs: self.coeffs.iter().map(|(e, v)| (*e, v.scale(s))).collect(),
            window_min: self.window_min,
        }
    }

    /// Sectorwise cup with an ambient class.
    pub fn cup(&self, class: &RingElement) -> LaurentBlock {
        let mut out = LaurentBlock {
            coeffs: BTreeMap::new(),
            window_min: self.window_min,
        };
        for (e, v) in self.iter() {
            out.add_term(*e, v.cup(class));
        }
        out
    }

    pub fn shift_z(&self, p: i64) -> LaurentBlock {
        LaurentBlock {
            coeffs: self.coeffs.iter().map(|(e, v)| (e + p, v.clone())).collect(),
            window_min: self.window_min.map(|m| m + p),
        }
    }

    /// Product of blocks. The exactness window is propagated conservatively:
    /// terms dropped below one window could have contributed up to the other
    /// factor's top exponent.
    pub fn mul(&self, other: &LaurentBlock) -> Result<LaurentBlock> {
        let bound = |wa: Option<i64>, b: &LaurentBlock| -> Option<i64> {
            match (wa, b.z_max()) {
                (Some(m), Some(t)) => Some(m + t),
                (Some(m), None) => Some(m),
                (None, _) => None,
            }
        };
        let window_min = match (bound(self.window_min, other), bound(other.window_min, self)) {
            (None, w) | (w, None) => w,
            (Some(a), Some(b)) => Some(a.max(b)),
        };
        let mut out = LaurentBlock {
            coeffs: BTreeMap::new(),
            window_min,
        };
        for (e1, v1) in self.iter() {
            for (e2, v2) in other.iter() {
                out.add_term(e1 + e2, v1.mul(v2)?);
            }
        }
        Ok(out)
    }

    /// Drop coefficients below `z_min` and record the tightened window.
    pub fn truncate(&self, z_min: i64) -> LaurentBlock {
        let window_min = Some(self.window_min.map_or(z_min, |m| m.max(z_min)));
        LaurentBlock {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(e, _)| **e >= z_min)
                .map(|(e, v)| (*e, v.clone()))
                .collect(),
            window_min,
        }
    }

    /// Relabel every sector through `f`, merging collisions.
    pub fn map_sectors(
        &self,
        mut f: impl FnMut(&SectorLabel, &RingElement) -> Result<(SectorLabel, RingElement)>,
    ) -> Result<LaurentBlock> {
        let mut out = LaurentBlock {
            coeffs: BTreeMap::new(),
            window_min: self.window_min,
        };
        for (e, v) in self.iter() {
            let mut nv = StateVector::zero();
            for (l, c) in v.iter() {
                let (nl, nc) = f(l, c)?;
                nv.add_term(nl, nc);
            }
            out.add_term(*e, nv);
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// GradedSeries
// ---------------------------------------------------------------------------

/// Index of a graded-series entry: curve class `d`, extension multi-index
/// `k`, and log-Novikov powers (one per divisor-basis element).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeriesIndex {
    pub d: CurveClass,
    pub k: Vec<u64>,
    pub logs: Vec<u32>,
}

impl SeriesIndex {
    pub fn origin(num_gens: usize, num_ext: usize, num_logs: usize) -> SeriesIndex {
        SeriesIndex {
            d: CurveClass::zero(num_gens),
            k: vec![0; num_ext],
            logs: vec![0; num_logs],
        }
    }

    pub fn add(&self, other: &SeriesIndex) -> SeriesIndex {
        SeriesIndex {
            d: self.d.add(&other.d),
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            logs: self.logs.iter().zip(&other.logs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Total (d, k)-order (logs excluded: they are capped by nilpotency).
    pub fn total_order(&self) -> u64 {
        self.d.total() + self.k.iter().sum::<u64>()
    }

    pub fn is_log_free(&self) -> bool {
        self.logs.iter().all(|&m| m == 0)
    }
}

/// Truncation bounds for a [`GradedSeries`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Per-Mori-generator cap on the curve degree.
    pub d_max: Vec<u64>,
    /// Cap on the total extension order |k|.
    pub k_total_max: u64,
    /// Laurent window floor applied when blocks are truncated.
    pub z_min: i64,
}

impl Bounds {
    pub fn contains(&self, idx: &SeriesIndex) -> bool {
        idx.d.coords.iter().zip(&self.d_max).all(|(c, m)| c <= m)
            && idx.k.iter().sum::<u64>() <= self.k_total_max
    }
}

/// A truncated formal series with [`LaurentBlock`] coefficients, indexed by
/// (curve class, extension multi-index, log powers). Absent entries are zero.
#[derive(Clone, Debug)]
pub struct GradedSeries {
    ring: Arc<BaseRing>,
    kind: LabelKind,
    num_ext: usize,
    num_logs: usize,
    bounds: Bounds,
    entries: BTreeMap<SeriesIndex, LaurentBlock>,
}

impl GradedSeries {
    pub fn new(
        ring: Arc<BaseRing>,
        kind: LabelKind,
        num_ext: usize,
        num_logs: usize,
        bounds: Bounds,
    ) -> GradedSeries {
        assert_eq!(bounds.d_max.len(), ring.num_curve_generators());
        GradedSeries {
            ring,
            kind,
            num_ext,
            num_logs,
            bounds,
            entries: BTreeMap::new(),
        }
    }

    pub fn ring(&self) -> &Arc<BaseRing> {
        &self.ring
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn num_ext(&self) -> usize {
        self.num_ext
    }

    pub fn num_logs(&self) -> usize {
        self.num_logs
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn entries(&self) -> impl Iterator<Item = (&SeriesIndex, &LaurentBlock)> {
        self.entries.iter()
    }

    pub fn origin_index(&self) -> SeriesIndex {
        SeriesIndex::origin(self.ring.num_curve_generators(), self.num_ext, self.num_logs)
    }

    pub fn get(&self, idx: &SeriesIndex) -> Option<&LaurentBlock> {
        self.entries.get(idx)
    }

    pub fn block_or_zero(&self, idx: &SeriesIndex) -> LaurentBlock {
        self.entries.get(idx).cloned().unwrap_or_default()
    }

    pub fn insert(&mut self, idx: SeriesIndex, block: LaurentBlock) {
        self.check_index(&idx);
        if !self.bounds.contains(&idx) || block.is_zero() {
            return;
        }
        match self.entries.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(block);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&block);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_index(&self, idx: &SeriesIndex) {
        assert_eq!(idx.d.coords.len(), self.ring.num_curve_generators());
        assert_eq!(idx.k.len(), self.num_ext);
        assert_eq!(idx.logs.len(), self.num_logs);
    }

    pub fn add(&self, other: &GradedSeries) -> GradedSeries {
        let mut out = self.clone();
        for (idx, b) in other.entries() {
            out.insert(idx.clone(), b.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> GradedSeries {
        let mut out = GradedSeries::new(
            self.ring.clone(),
            self.kind,
            self.num_ext,
            self.num_logs,
            self.bounds.clone(),
        );
        for (idx, b) in self.entries() {
            out.insert(idx.clone(), b.scale(s));
        }
        out
    }

    /// Graded Cauchy product; entries landing outside the bounds are dropped
    /// (the truncation contract).
    pub fn mul(&self, other: &GradedSeries) -> Result<GradedSeries> {
        if self.kind != other.kind {
            return Err(Error::IncompatibleSectors(
                "cannot multiply series over different state spaces".into(),
            ));
        }
        let mut out = GradedSeries::new(
            self.ring.clone(),
            self.kind,
            self.num_ext,
            self.num_logs,
            self.bounds.clone(),
        );
        for (i1, b1) in self.entries() {
            for (i2, b2) in other.entries() {
                let idx = i1.add(i2);
                if out.bounds.contains(&idx) {
                    out.insert(idx, b1.mul(b2)?);
                }
            }
        }
        Ok(out)
    }

    /// Truncate to new bounds, dropping entries and tightening windows.
    pub fn truncate(&self, bounds: Bounds) -> GradedSeries {
        let mut out = GradedSeries::new(
            self.ring.clone(),
            self.kind,
            self.num_ext,
            self.num_logs,
            bounds,
        );
        for (idx, b) in self.entries() {
            if out.bounds.contains(idx) {
                out.insert(idx.clone(), b.truncate(out.bounds.z_min));
            }
        }
        out
    }

    /// Exact coefficient comparison on the union of supports (windows are
    /// not compared; both series must be exact wherever the other has data).
    pub fn coefficients_equal(&self, other: &GradedSeries) -> bool {
        if self.kind != other.kind {
            return false;
        }
        let keys: std::collections::BTreeSet<_> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .cloned()
            .collect();
        for idx in keys {
            let a = self.block_or_zero(&idx);
            let b = other.block_or_zero(&idx);
            let exps: std::collections::BTreeSet<i64> =
                a.iter().map(|(e, _)| *e).chain(b.iter().map(|(e, _)| *e)).collect();
            for e in exps {
                match (a.coeff(e), b.coeff(e)) {
                    (Ok(x), Ok(y)) => {
                        if x != y {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
        true
    }

    /// First index/exponent where the two series differ, for diagnostics.
    pub fn first_difference(&self, other: &GradedSeries) -> Option<(SeriesIndex, i64)> {
        let keys: std::collections::BTreeSet<_> = self
            .entries
            .keys()
            .chain(other.entries.keys())
            .cloned()
            .collect();
        for idx in keys {
            let a = self.block_or_zero(&idx);
            let b = other.block_or_zero(&idx);
            let exps: std::collections::BTreeSet<i64> =
                a.iter().map(|(e, _)| *e).chain(b.iter().map(|(e, _)| *e)).collect();
            for e in exps {
                let same = matches!((a.coeff(e), b.coeff(e)), (Ok(x), Ok(y)) if x == y);
                if !same {
                    return Some((idx, e));
                }
            }
        }
        None
    }

    /// Map every block (index-preserving).
    pub fn map_blocks(
        &self,
        mut f: impl FnMut(&SeriesIndex, &LaurentBlock) -> Result<LaurentBlock>,
    ) -> Result<GradedSeries> {
        let mut out = GradedSeries::new(
            self.ring.clone(),
            self.kind,
            self.num_ext,
            self.num_logs,
            self.bounds.clone(),
        );
        for (idx, b) in self.entries() {
            out.insert(idx.clone(), f(idx, b)?);
        }
        Ok(out)
    }
}

/// The finite polynomial `Σ_m cls^m·L^m/(m! z^m)` on the `log_index`-th
/// log-Novikov variable — exact because `cls` is nilpotent. The untwisted
/// sector of the series' label kind carries the coefficients.
pub fn exp_divisor_over_z(
    cls: &RingElement,
    log_index: usize,
    template: &GradedSeries,
) -> GradedSeries {
    let ring = template.ring().clone();
    let mut out = GradedSeries::new(
        ring.clone(),
        template.kind(),
        template.num_ext(),
        template.num_logs(),
        template.bounds().clone(),
    );
    let untw = SectorLabel::untwisted(template.kind());
    let mut pow = ring.one();
    let mut fact = Rational::one();
    let mut m = 0u32;
    while !pow.is_zero() {
        let mut idx = out.origin_index();
        idx.logs[log_index] = m;
        out.insert(
            idx,
            LaurentBlock::from_term(
                -(m as i64),
                StateVector::from_term(untw.clone(), pow.scale(&(Rational::one() / &fact))),
            ),
        );
        m += 1;
        fact *= rat_int(m as i64);
        pow = pow.mul(cls);
    }
    out
}

// ---------------------------------------------------------------------------
// Scalar parameter series (used by the mirror map and its inversion)
// ---------------------------------------------------------------------------

/// Index of a parameter monomial `Q^d x^k`.
pub type ParamIndex = (CurveClass, Vec<u64>);

fn param_order(idx: &ParamIndex) -> u64 {
    idx.0.total() + idx.1.iter().sum::<u64>()
}

/// A truncated scalar series in the Novikov and extension variables.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScalarSeries {
    pub terms: BTreeMap<ParamIndex, Rational>,
}

impl ScalarSeries {
    pub fn zero() -> ScalarSeries {
        ScalarSeries::default()
    }

    pub fn constant(c: Rational, num_gens: usize, num_ext: usize) -> ScalarSeries {
        ScalarSeries::monomial((CurveClass::zero(num_gens), vec![0; num_ext]), c)
    }

    pub fn monomial(idx: ParamIndex, c: Rational) -> ScalarSeries {
        let mut s = ScalarSeries::zero();
        s.add_term(idx, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, idx: ParamIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &ScalarSeries) -> ScalarSeries {
        let mut out = self.clone();
        for (i, c) in &other.terms {
            out.add_term(i.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> ScalarSeries {
        ScalarSeries {
            terms: self.terms.iter().map(|(i, c)| (i.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rational) -> ScalarSeries {
        if s.is_zero() {
            return ScalarSeries::zero();
        }
        ScalarSeries {
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &ScalarSeries, order: u64) -> ScalarSeries {
        let mut out = ScalarSeries::zero();
        for (i1, c1) in &self.terms {
            for (i2, c2) in &other.terms {
                let idx = (i1.0.add(&i2.0), i1.1.iter().zip(&i2.1).map(|(a, b)| a + b).collect());
                if param_order(&idx) <= order {
                    out.add_term(idx, c1 * c2);
                }
            }
        }
        out
    }

    /// `exp(self)`; requires vanishing constant term.
    pub fn exp(&self, order: u64) -> ScalarSeries {
        let num_gens = self
            .terms
            .keys()
            .next()
            .map(|(d, _)| d.coords.len())
            .unwrap_or(0);
        let num_ext = self.terms.keys().next().map(|(_, k)| k.len()).unwrap_or(0);
        assert!(
            self.terms.keys().all(|i| param_order(i) > 0),
            "exp of a series with a constant term"
        );
        let mut out = ScalarSeries::constant(Rational::one(), num_gens, num_ext);
        let mut term = out.clone();
        for n in 1..=order {
            term = term.mul(self, order).scale(&(Rational::one() / rat_int(n as i64)));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    }

    /// Substitute `Q_i ↦ Q'_i·exp(Σ_l pairing[l][i]·log_shifts[l])` and
    /// `x_j ↦ x'_j + var_shifts[j]`, truncated at `order`.
    ///
    /// `pairing[l][i]` is the intersection of the `l`-th divisor-basis class
    /// with the `i`-th Mori generator.
    pub fn substitute(
        &self,
        log_shifts: &[ScalarSeries],
        var_shifts: &[ScalarSeries],
        pairing: &[Vec<i64>],
        order: u64,
    ) -> ScalarSeries {
        let mut out = ScalarSeries::zero();
        for ((d, k), c) in &self.terms {
            if param_order(&(d.clone(), k.clone())) > order {
                continue;
            }
            // exponent series Σ_l (Σ_i pairing[l][i]·d_i)·u_l
            let mut expo = ScalarSeries::zero();
            for (l, u) in log_shifts.iter().enumerate() {
                let weight: i64 = d
                    .coords
                    .iter()
                    .enumerate()
                    .map(|(i, &di)| pairing[l][i] * di as i64)
                    .sum();
                if weight != 0 {
                    expo = expo.add(&u.scale(&rat_int(weight)));
                }
            }
            let mut term = ScalarSeries::monomial((d.clone(), vec![0; k.len()]), c.clone());
            if !expo.is_zero() {
                term = term.mul(&expo.exp(order), order);
            }
            for (j, &kj) in k.iter().enumerate() {
                if kj == 0 {
                    continue;
                }
                let mut unit = vec![0u64; k.len()];
                unit[j] = 1;
                let var = ScalarSeries::monomial((CurveClass::zero(d.coords.len()), unit), Rational::one())
                    .add(&var_shifts[j]);
                for _ in 0..kj {
                    term = term.mul(&var, order);
                }
            }
            out = out.add(&term);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// MirrorMap and inversion
// ---------------------------------------------------------------------------

/// Higher-order terms of an extension variable's mirror-map component.
#[derive(Clone, Debug)]
pub struct VariableDirection {
    pub label: SectorLabel,
    /// τ_j − x_j as a scalar series.
    pub higher: ScalarSeries,
}

/// The z⁰ slice of an I-function, classified by parameter direction.
///
/// The constant term is the declared base parameter (divisor logs and the
/// linear extension variables); everything else vanishes at `Q = x = 0`.
#[derive(Clone, Debug)]
pub struct MirrorMap {
    pub ring: Arc<BaseRing>,
    pub kind: LabelKind,
    pub num_ext: usize,
    /// Divisor-valued corrections (degree-2 untwisted components).
    pub divisor: BTreeMap<ParamIndex, RingElement>,
    /// Untwisted-identity (string-direction) corrections.
    pub identity: ScalarSeries,
    /// Corrections along twisted/nonzero-contact identity directions.
    pub sector_identity: BTreeMap<SectorLabel, ScalarSeries>,
    /// One entry per extension variable.
    pub variables: Vec<VariableDirection>,
    /// The components series restricted to z⁰, kept for audit/rendering.
    pub components: GradedSeries,
}

/// The order-by-order formal inverse of a [`MirrorMap`]: how old parameter
/// monomials expand in the new (flat) parameters, plus the residual string
/// correction. Negative-contact identity directions enter through the
/// divisor shifts of their local avatar (the `(−1)^k·D` transport); the plan
/// records every step for audit.
#[derive(Clone, Debug)]
pub struct InversionPlan {
    pub order: u64,
    /// Old log variable in new terms: `L_l = L'_l + log_shifts[l](Q', x')`.
    pub log_shifts: Vec<ScalarSeries>,
    /// Old extension variable in new terms: `x_j = x'_j + var_shifts[j]`.
    pub var_shifts: Vec<ScalarSeries>,
    /// Forward shifts in old variables: `L'_l = L_l + forward_log[l](Q, x)`.
    pub forward_log: Vec<ScalarSeries>,
    /// Forward shifts in old variables: `x'_j = x_j + forward_var[j](Q, x)`.
    pub forward_var: Vec<ScalarSeries>,
    /// String correction expressed in the new variables.
    pub identity_in_new: ScalarSeries,
    /// Divisor-basis/Mori-generator pairing matrix used for Novikov weights.
    pub pairing: Vec<Vec<i64>>,
    /// Human-readable record of every inversion step.
    pub steps: Vec<String>,
}

impl InversionPlan {
    /// Expansion of the old monomial `Q^d x^k` in the new variables.
    pub fn monomial_series(&self, d: &CurveClass, k: &[u64]) -> ScalarSeries {
        ScalarSeries::monomial((d.clone(), k.to_vec()), Rational::one()).substitute(
            &self.log_shifts,
            &self.var_shifts,
            &self.pairing,
            self.order,
        )
    }

    /// Expansion of the new monomial `Q'^d x'^k` in the old variables.
    pub fn forward_monomial_series(&self, d: &CurveClass, k: &[u64]) -> ScalarSeries {
        ScalarSeries::monomial((d.clone(), k.to_vec()), Rational::one()).substitute(
            &self.forward_log,
            &self.forward_var,
            &self.pairing,
            self.order,
        )
    }

    /// `inverse ∘ forward` on the monomial `Q^d x^k`, which must return the
    /// monomial itself up to the plan's order. Returns the defect.
    pub fn round_trip_defect(&self, d: &CurveClass, k: &[u64]) -> ScalarSeries {
        let forward = self.forward_monomial_series(d, k);
        let mut back = ScalarSeries::zero();
        for ((fd, fk), c) in &forward.terms {
            back = back.add(&self.monomial_series(fd, fk).scale(c));
        }
        back.add(&ScalarSeries::monomial((d.clone(), k.to_vec()), Rational::one()).neg())
    }
}

/// Invert a mirror map order by order (Newton-free fixed point over the
/// finite parameter lattice).
///
/// Divisor-valued corrections act through the divisor equation (Novikov
/// reparametrization). Negative-contact identity corrections are transported
/// to divisor corrections via the local avatar rule `c·[𝟏]_{−m} ↦ (−1)^m·c·D`
/// (the sign bookkeeping of the relative/local correspondence); this is the
/// defined formal rule for those directions and every step is logged.
/// Positive-contact or age-labelled identity corrections are out of contract.
pub fn invert_map(tau: &MirrorMap, divisor: &RingElement, order: u64) -> Result<InversionPlan> {
    let ring = &tau.ring;
    let num_gens = ring.num_curve_generators();
    let num_logs = ring.divisor_basis().len();
    let mut steps = Vec::new();

    // Pairing matrix rows follow the divisor basis.
    let mut pairing = Vec::with_capacity(num_logs);
    for &db in ring.divisor_basis() {
        let mut row = Vec::with_capacity(num_gens);
        for g in 0..num_gens {
            let mut coords = vec![0u64; num_gens];
            coords[g] = 1;
            row.push(ring.intersect(&ring.basis_element(db), &CurveClass::new(coords))?);
        }
        pairing.push(row);
    }

    // Effective divisor shift per log variable, in the old variables.
    let mut forward_log = vec![ScalarSeries::zero(); num_logs];
    let decompose = |class: &RingElement| -> Result<Vec<Rational>> {
        let mut comps = vec![Rational::zero(); num_logs];
        let mut residue = class.clone();
        for (l, &db) in ring.divisor_basis().iter().enumerate() {
            comps[l] = class.coeff(db).clone();
            residue = residue.sub(&ring.basis_element(db).scale(&comps[l]));
        }
        if !residue.is_zero() {
            return Err(Error::NotInvertible(format!(
                "mirror-map correction {} is not in the divisor-basis span",
                class.render()
            )));
        }
        Ok(comps)
    };
    for (idx, class) in &tau.divisor {
        let comps = decompose(class)?;
        for (l, c) in comps.into_iter().enumerate() {
            forward_log[l].add_term(idx.clone(), c);
        }
        steps.push(format!(
            "divisor correction at {:?}: {} absorbed into the log-Novikov shift",
            idx,
            class.render()
        ));
    }
    for (label, series) in &tau.sector_identity {
        let m = match label {
            SectorLabel::Contact(m) if *m < 0 => (-m) as u32,
            SectorLabel::Contact(_) => {
                return Err(Error::NotInvertible(format!(
                    "identity correction at {} — only negative contact orders have a defined rule",
                    label.render()
                )))
            }
            SectorLabel::Age(_) => {
                return Err(Error::NotInvertible(format!(
                    "identity correction at {} — identify age sectors with contact orders first",
                    label.render()
                )))
            }
        };
        let sign = if m % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        let avatar = divisor.scale(&sign);
        let comps = decompose(&avatar)?;
        for (idx, c) in &series.terms {
            for (l, comp) in comps.iter().enumerate() {
                forward_log[l].add_term(idx.clone(), c * comp);
            }
        }
        steps.push(format!(
            "negative-contact correction at {}: transported to divisor shift {} per unit (local avatar rule)",
            label.render(),
            avatar.render()
        ));
    }

    let forward_var: Vec<ScalarSeries> = tau.variables.iter().map(|v| v.higher.clone()).collect();

    // Fixed point: u = −forward_log(old→new), w = −forward_var(old→new).
    let mut log_shifts = vec![ScalarSeries::zero(); num_logs];
    let mut var_shifts = vec![ScalarSeries::zero(); tau.num_ext];
    for _ in 0..=order {
        let new_logs: Vec<ScalarSeries> = forward_log
            .iter()
            .map(|f| f.substitute(&log_shifts, &var_shifts, &pairing, order).neg())
            .collect();
        let new_vars: Vec<ScalarSeries> = forward_var
            .iter()
            .map(|h| h.substitute(&log_shifts, &var_shifts, &pairing, order).neg())
            .collect();
        log_shifts = new_logs;
        var_shifts = new_vars;
    }
    steps.push(format!(
        "fixed point solved to total order {order}: log shifts {:?}, variable shifts {:?}",
        log_shifts, var_shifts
    ));

    let identity_in_new = tau
        .identity
        .substitute(&log_shifts, &var_shifts, &pairing, order);
    if !identity_in_new.is_zero() {
        steps.push("string-direction correction stripped via e^{-c/z}".into());
    }

    Ok(InversionPlan {
        order,
        log_shifts,
        var_shifts,
        forward_log,
        forward_var,
        identity_in_new,
        pairing,
        steps,
    })
}

/// Apply an [`InversionPlan`] to a series: substitute the Novikov/extension
/// monomials, shift the log variables (`L_l ↦ L'_l + u_l`, which transports
/// the `e^{divisor·L/z}` prefactor), and strip the string direction.
pub fn apply_inversion(series: &GradedSeries, plan: &InversionPlan) -> Result<GradedSeries> {
    let ring = series.ring().clone();
    let mut out = GradedSeries::new(
        ring.clone(),
        series.kind(),
        series.num_ext(),
        series.num_logs(),
        series.bounds().clone(),
    );
    let num_logs = series.num_logs();
    for (idx, block) in series.entries() {
        if idx.total_order() > plan.order {
            continue;
        }
        // Scalar multiplier from Q^d x^k, then from each log power
        // L_l^{m_l} = Σ_t C(m_l,t)·L'^{m_l−t}·u_l^t (each u_l carries z⁰;
        // the 1/z weights of the prefactor are already in the block).
        //
        // A log power expands into (new log power, scalar series, z-shift 0)
        // triples; the binomial re-weighting of the 1/(m! z^m) prefactor is
        // handled by treating L and u symmetrically: the block was built
        // with coefficient cls^m L^m/(m! z^m), so substituting L ↦ L' + u
        // needs the multinomial split of L^m with the same 1/(m! z^m)
        // weight. We therefore expand (L' + u)^m / m! = Σ L'^{m'} u^{m−m'} /
        // (m'!(m−m')!), i.e. re-scale by m!/(m'!(m−m')!) = C(m, m').
        let base = plan.monomial_series(&idx.d, &idx.k);
        // Enumerate splittings of the log multi-exponent.
        let mut splits: Vec<(Vec<u32>, ScalarSeries)> =
            vec![(vec![0; num_logs], base)];
        for l in 0..num_logs {
            let m = idx.logs[l];
            let mut next = Vec::new();
            for (logs_new, ser) in splits {
                let mut upow = ScalarSeries::constant(
                    Rational::one(),
                    ring.num_curve_generators(),
                    series.num_ext(),
                );
                for t in 0..=m {
                    let binom = binomial(m, t);
                    let mut logs2 = logs_new.clone();
                    logs2[l] = m - t;
                    let contrib = ser.mul(&upow, plan.order).scale(&binom);
                    if !contrib.is_zero() {
                        next.push((logs2, contrib));
                    }
                    if t < m {
                        upow = upow.mul(&plan.log_shifts[l], plan.order);
                    }
                }
            }
            splits = next;
        }
        for (logs_new, ser) in splits {
            for ((d2, k2), c) in &ser.terms {
                let new_idx = SeriesIndex {
                    d: d2.clone(),
                    k: k2.clone(),
                    logs: logs_new.clone(),
                };
                if new_idx.total_order() <= plan.order {
                    out.insert(new_idx, block.scale(c));
                }
            }
        }
    }
    // Strip the string direction: multiply by e^{−c(Q')/z}.
    if !plan.identity_in_new.is_zero() {
        let untw = SectorLabel::untwisted(series.kind());
        let mut expfactor = GradedSeries::new(
            ring.clone(),
            series.kind(),
            series.num_ext(),
            series.num_logs(),
            series.bounds().clone(),
        );
        // e^{−c/z} = Σ (−c)^n / (n! z^n)
        let mut cpow = ScalarSeries::constant(
            Rational::one(),
            ring.num_curve_generators(),
            series.num_ext(),
        );
        let mut fact = Rational::one();
        for n in 0..=plan.order {
            for ((d2, k2), coeff) in &cpow.terms {
                let idx = SeriesIndex {
                    d: d2.clone(),
                    k: k2.clone(),
                    logs: vec![0; num_logs],
                };
                expfactor.insert(
                    idx,
                    LaurentBlock::from_term(
                        -(n as i64),
                        StateVector::from_term(untw.clone(), ring.one().scale(&(coeff / &fact))),
                    ),
                );
            }
            cpow = cpow.mul(&plan.identity_in_new.neg(), plan.order);
            fact *= rat_int(n as i64 + 1);
            if cpow.is_zero() {
                break;
            }
        }
        out = out.mul(&expfactor)?;
    }
    Ok(out)
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut num = Rational::one();
    for i in 0..k {
        num *= rat_int((n - i) as i64);
        num /= rat_int((i + 1) as i64);
    }
    num
}
