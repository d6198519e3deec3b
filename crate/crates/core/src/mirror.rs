//! I-function → J-function assembly and one-point invariant extraction.
//!
//! `split` slices an I-function at z⁰ into a [`MirrorMap`]; `assemble_j`
//! inverts that map ([`crate::zseries::invert_map`]) and applies the inverse
//! to the whole series, checking afterwards that the z⁰ slice is exactly the
//! flat parameter. Extraction then reads one-point descendant invariants off
//! the `z^{−k−1}` coefficients.
//!
//! No Birkhoff factorization is performed: any `z^{≥1}` term beyond the
//! leading `z·𝟏` raises [`Error::ConeSliceOutOfContract`].
//!
//! The relative and root-stack theories are extracted through the contact
//! state space: root-stack coefficients are first identified with relative
//! ones ([`crate::sectors::root_to_relative`]), and the negative-contact
//! mirror corrections act through their local avatar `c·[𝟏]_{−m} ↦ (−1)^m·c·D`
//! inside the inversion.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{format_rational, rat_int, CurveClass, Rational, RingElement};
use crate::ifactory::{
    enumerate_curve_classes, i_absolute, i_local, i_relative, i_root_stack, GeometryConfig,
};
use crate::sectors::{
    rho_minus_scale, root_to_relative, LabelKind, RootIndex, SectorLabel, SectorPairingContext,
};
use crate::zseries::{
    apply_inversion, invert_map, GradedSeries, InversionPlan, MirrorMap, ScalarSeries, SeriesIndex,
    VariableDirection,
};

/// Which theory a J-function/invariant belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theory {
    Absolute,
    RootStack,
    Relative,
    Local,
}

impl Theory {
    pub fn render(&self) -> &'static str {
        match self {
            Theory::Absolute => "absolute",
            Theory::RootStack => "root-stack",
            Theory::Relative => "relative",
            Theory::Local => "local",
        }
    }
}

/// One extracted one-point descendant invariant.
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantRecord {
    pub theory: Theory,
    pub d: CurveClass,
    /// Sector of the insertion.
    pub insertion: SectorLabel,
    /// Cohomology class of the insertion.
    pub insertion_class: RingElement,
    pub psi_power: u32,
    pub value: Rational,
}

impl InvariantRecord {
    pub fn render(&self) -> String {
        format!(
            "<{}{} psi^{}>_{{d={:?}}}^{{{}}} = {}",
            self.insertion_class.render(),
            if self.insertion.is_untwisted() {
                String::new()
            } else {
                format!(" @ {}", self.insertion.render())
            },
            self.psi_power,
            self.d.coords,
            self.theory.render(),
            format_rational(&self.value),
        )
    }
}

/// An assembled J-function: the inverted series, the inversion plan that
/// produced it, and the names of the flat parameters.
#[derive(Clone, Debug)]
pub struct JFunction {
    pub series: GradedSeries,
    pub plan: InversionPlan,
    pub parameter_names: Vec<String>,
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

/// Slice an I-function at z⁰ into a [`MirrorMap`], returning also the
/// strictly-negative-z tail. `ext_labels` declares the sector of each
/// extension variable (its coefficient at the linear index must be exactly
/// `1·𝟏` on that sector).
///
/// Any `z^{≥1}` term other than the leading `z·𝟏` at the origin is out of
/// contract (Birkhoff factorization is not implemented).
pub fn split(
    i: &GradedSeries,
    ext_labels: &[SectorLabel],
) -> Result<(MirrorMap, GradedSeries)> {
    if ext_labels.len() != i.num_ext() {
        return Err(Error::Config(format!(
            "{} extension labels declared for a series with {} extension variables",
            ext_labels.len(),
            i.num_ext()
        )));
    }
    let ring = i.ring().clone();
    let origin = i.origin_index();
    let untw = SectorLabel::untwisted(i.kind());

    // z^{≥1} contract.
    for (idx, block) in i.entries() {
        if let Some(top) = block.z_max() {
            for e in 1..=top {
                let c = block.coeff(e)?;
                if c.is_zero() {
                    continue;
                }
                let leading_ok = *idx == origin
                    && e == 1
                    && c.iter().count() == 1
                    && c.get(&untw).map(|v| *v == ring.one()).unwrap_or(false);
                if !leading_ok {
                    return Err(Error::ConeSliceOutOfContract(format!(
                        "z^{e} term at index {:?} — cannot slice this cone point without \
                         Birkhoff factorization",
                        (idx.d.coords.clone(), idx.k.clone(), idx.logs.clone())
                    )));
                }
            }
        }
    }

    let mut divisor: BTreeMap<(CurveClass, Vec<u64>), RingElement> = BTreeMap::new();
    let mut identity = ScalarSeries::zero();
    let mut sector_identity: BTreeMap<SectorLabel, ScalarSeries> = BTreeMap::new();
    let mut variables: Vec<VariableDirection> = ext_labels
        .iter()
        .map(|l| VariableDirection { label: l.clone(), higher: ScalarSeries::zero() })
        .collect();

    let ext_unit = |j: usize| -> SeriesIndex {
        let mut idx = origin.clone();
        idx.k[j] = 1;
        idx
    };
    let log_unit = |l: usize| -> SeriesIndex {
        let mut idx = origin.clone();
        idx.logs[l] = 1;
        idx
    };

    for (idx, block) in i.entries() {
        let mut z0 = block.coeff(0)?;
        if z0.is_zero() {
            continue;
        }
        // Declared flat parameters are skipped, not classified.
        if !idx.is_log_free() {
            let declared = (0..ring.divisor_basis().len()).any(|l| {
                *idx == log_unit(l)
                    && z0
                        == crate::sectors::StateVector::from_term(
                            untw.clone(),
                            ring.basis_element(ring.divisor_basis()[l]),
                        )
            });
            if declared {
                continue;
            }
            return Err(Error::NotInvertible(format!(
                "z⁰ correction on a log-Novikov stratum {:?}",
                idx.logs
            )));
        }
        for (j, label) in ext_labels.iter().enumerate() {
            if *idx == ext_unit(j) {
                // Strip the declared linear term x_j·[𝟏]_{label}.
                let lin = z0.get(label).cloned().unwrap_or_else(|| ring.zero());
                if lin != ring.one() {
                    return Err(Error::NotInvertible(format!(
                        "extension variable {j} has linear coefficient {} at {}, expected 1·unit",
                        lin.render(),
                        label.render()
                    )));
                }
                z0 = z0.add(&crate::sectors::StateVector::from_term(
                    label.clone(),
                    ring.one().scale(&rat_int(-1)),
                ));
            }
        }
        let param = (idx.d.clone(), idx.k.clone());
        for (label, class) in z0.iter() {
            if label.is_untwisted() {
                let c0 = class.degree_component(0);
                let c2 = class.degree_component(2);
                let rest = class.sub(&c0).sub(&c2);
                if !rest.is_zero() {
                    return Err(Error::NotInvertible(format!(
                        "z⁰ correction {} at {:?} has components beyond degree 2",
                        class.render(),
                        param
                    )));
                }
                if !c0.is_zero() {
                    if param == (origin.d.clone(), origin.k.clone()) {
                        return Err(Error::NotInvertible(
                            "nonzero constant parameter in the string direction".into(),
                        ));
                    }
                    identity.add_term(param.clone(), c0.coeff(0).clone());
                }
                if !c2.is_zero() {
                    match divisor.entry(param.clone()) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(c2);
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let s = e.get().add(&c2);
                            *e.get_mut() = s;
                        }
                    }
                }
            } else {
                // Twisted directions: only identity multiples are in contract.
                let c0 = class.degree_component(0);
                if *class != c0 {
                    return Err(Error::NotInvertible(format!(
                        "z⁰ correction {} at twisted sector {} is not an identity multiple",
                        class.render(),
                        label.render()
                    )));
                }
                let coeff = c0.coeff(0).clone();
                if let Some(j) = ext_labels.iter().position(|l| l == label) {
                    variables[j].higher.add_term(param.clone(), coeff);
                } else {
                    sector_identity
                        .entry(label.clone())
                        .or_default()
                        .add_term(param.clone(), coeff);
                }
            }
        }
    }

    let tail = i.map_blocks(|_, b| {
        Ok(b.iter()
            .filter(|(e, _)| **e < 0)
            .fold(crate::zseries::LaurentBlock::zero(), |mut acc, (e, v)| {
                acc.add_term(*e, v.clone());
                acc
            }))
    })?;

    let tau = MirrorMap {
        ring,
        kind: i.kind(),
        num_ext: i.num_ext(),
        divisor,
        identity,
        sector_identity,
        variables,
        components: i.map_blocks(|_, b| {
            let mut out = crate::zseries::LaurentBlock::zero();
            out.add_term(0, b.coeff(0)?);
            Ok(out)
        })?,
    };
    Ok((tau, tail))
}

// ---------------------------------------------------------------------------
// assemble_j
// ---------------------------------------------------------------------------

/// Invert the mirror map of `i` to total order `order` and apply the inverse
/// to the whole series. The result is checked to have z⁰ slice exactly equal
/// to the flat parameter.
pub fn assemble_j(
    i: &GradedSeries,
    divisor: &RingElement,
    ext_labels: &[SectorLabel],
    order: u64,
) -> Result<JFunction> {
    let (tau, _tail) = split(i, ext_labels)?;
    let plan = invert_map(&tau, divisor, order)?;
    let series = apply_inversion(i, &plan)?;
    let ring = i.ring();
    let mut parameter_names: Vec<String> = ring
        .divisor_basis()
        .iter()
        .map(|&b| format!("log Q along {}", ring.basis()[b].name))
        .collect();
    for l in ext_labels {
        parameter_names.push(format!("x at {}", l.render()));
    }
    let j = JFunction { series, plan, parameter_names };
    check_flat_parameter(&j, ext_labels)?;
    Ok(j)
}

/// Verify that the z⁰ (and z^{≥1}) slice of an assembled J-function is
/// exactly `z·𝟏 + Σ_l p_l L_l + Σ_j x_j·[𝟏]_{label_j}`.
pub fn check_flat_parameter(j: &JFunction, ext_labels: &[SectorLabel]) -> Result<()> {
    let series = &j.series;
    let ring = series.ring();
    let origin = series.origin_index();
    let untw = SectorLabel::untwisted(series.kind());
    for (idx, block) in series.entries() {
        if idx.total_order() > j.plan.order {
            continue;
        }
        let top = block.z_max().unwrap_or(0);
        for e in 0..=top.max(1) {
            let c = block.coeff(e)?;
            let expected = if *idx == origin && e == 1 {
                crate::sectors::StateVector::from_term(untw.clone(), ring.one())
            } else if e == 0 {
                let mut exp = crate::sectors::StateVector::zero();
                for (l, &b) in ring.divisor_basis().iter().enumerate() {
                    let mut li = origin.clone();
                    li.logs[l] = 1;
                    if *idx == li {
                        exp = exp.add(&crate::sectors::StateVector::from_term(
                            untw.clone(),
                            ring.basis_element(b),
                        ));
                    }
                }
                for (jx, label) in ext_labels.iter().enumerate() {
                    let mut ei = origin.clone();
                    ei.k[jx] = 1;
                    if *idx == ei {
                        exp = exp.add(&crate::sectors::StateVector::from_term(
                            label.clone(),
                            ring.one(),
                        ));
                    }
                }
                exp
            } else {
                crate::sectors::StateVector::zero()
            };
            if c != expected {
                return Err(Error::Identification(format!(
                    "assembled J-function is not flat: z^{e} coefficient at {:?} is {:?}",
                    (idx.d.coords.clone(), idx.k.clone(), idx.logs.clone()),
                    c
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Root-stack → relative transfer
// ---------------------------------------------------------------------------

/// Largest divisor degree D·d over the enumerated curve classes.
pub fn max_divisor_degree(cfg: &GeometryConfig) -> Result<i64> {
    let mut m = 0;
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        m = m.max(cfg.dd(&d)?);
    }
    Ok(m)
}

/// Identify an age-indexed root-stack series with a contact-indexed relative
/// series, sector by sector. Requires `r` strictly larger than every contact
/// order in range, so the age labels determine the contacts unambiguously.
pub fn root_transfer(series: &GradedSeries, cfg: &GeometryConfig) -> Result<GradedSeries> {
    let max_dd = max_divisor_degree(cfg)?;
    let ext_bound: i64 = cfg
        .s
        .iter()
        .map(|&a| a.unsigned_abs() as i64)
        .sum::<i64>()
        * cfg.bounds.k_total_max as i64;
    // Contact orders in range are −D·d + σ with 0 ≤ σ ≤ ext_bound, so their
    // magnitude never exceeds max(D·d_max, ext_bound).
    let max_contact = max_dd.max(ext_bound);
    if (cfg.r as i64) <= max_contact {
        return Err(Error::RootIndexTooSmall(format!(
            "r = {} but contact orders of magnitude up to {} occur; the identification needs \
             r > {}",
            cfg.r, max_contact, max_contact
        )));
    }
    let ctx = SectorPairingContext::new(
        cfg.ring.clone(),
        cfg.divisor.clone(),
        RootIndex::Root(cfg.r),
    )?;
    let mut out = GradedSeries::new(
        cfg.ring.clone(),
        LabelKind::Contact,
        series.num_ext(),
        series.num_logs(),
        series.bounds().clone(),
    );
    for (idx, block) in series.entries() {
        let sigma: i64 = idx
            .k
            .iter()
            .zip(&cfg.s)
            .map(|(&ki, &ai)| ki as i64 * ai)
            .sum();
        let mut nb = crate::zseries::LaurentBlock::zero();
        for (e, v) in block.iter() {
            nb.add_term(*e, root_to_relative(v, &ctx, &idx.d, sigma)?);
        }
        if let Some(w) = block.window_min() {
            nb = nb.truncate(w);
        }
        out.insert(idx.clone(), nb);
    }
    Ok(out)
}

/// The local avatar of a contact-indexed series:
/// `Φ([γ]_{−k}) = (−1)^k · D∪γ`, landing in the untwisted state space. This
/// is the faithful image through which relative invariants are extracted —
/// the `[𝟏]_{−m}` directions themselves admit no flat coordinate, so the
/// relative mirror map is inverted on the avatar side.
pub fn local_avatar(series: &GradedSeries, divisor: &RingElement) -> Result<GradedSeries> {
    series.map_blocks(|_, b| {
        b.map_sectors(|l, c| match l {
            SectorLabel::Contact(0) => Ok((SectorLabel::contact(0), c.clone())),
            SectorLabel::Contact(m) if *m < 0 => {
                let sign = if m % 2 == 0 { rat_int(1) } else { rat_int(-1) };
                Ok((SectorLabel::contact(0), divisor.mul(c).scale(&sign)))
            }
            _ => Err(Error::Identification(format!(
                "no local avatar for sector {}",
                l.render()
            ))),
        })
    })
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// Absolute theory: for every degree d ≠ 0, basis insertion φ_α and
/// ψ-power k ≤ `psi_max`, read `⟨φ_α ψ̄^k⟩_d = ∫_X C_{z^{−k−1}}·φ_α` off the
/// log-free stratum. Nonzero values only. Errors if `psi_max` reaches below a
/// truncated window.
pub fn extract_absolute(j: &JFunction, psi_max: u32) -> Result<Vec<InvariantRecord>> {
    let series = &j.series;
    let ring = series.ring();
    let untw = SectorLabel::untwisted(series.kind());
    let mut out = Vec::new();
    for (idx, block) in series.entries() {
        if idx.d.is_zero() || !idx.is_log_free() || idx.k.iter().any(|&k| k != 0) {
            continue;
        }
        for k in 0..=psi_max {
            let coeff = block.coeff(-(k as i64) - 1)?;
            let class = match coeff.get(&untw) {
                Some(c) => c.clone(),
                None => continue,
            };
            for alpha in 0..ring.dim() {
                let value = class.mul(&ring.basis_element(alpha)).integrate();
                if !value.is_zero() {
                    out.push(InvariantRecord {
                        theory: Theory::Absolute,
                        d: idx.d.clone(),
                        insertion: untw.clone(),
                        insertion_class: ring.basis_element(alpha),
                        psi_power: k,
                        value,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Local theory of 𝒪_X(−D): for every degree with D·d > 0 the unmarked
/// genus-zero local invariant, obtained from the `z^{−1}` string coefficient
/// by the divisor equation: `K_d = −(∫_X J_d|_{z^{−1}})/(D·d)`.
pub fn extract_local(j: &JFunction, cfg: &GeometryConfig) -> Result<Vec<InvariantRecord>> {
    let series = &j.series;
    let ring = series.ring();
    let untw = SectorLabel::untwisted(series.kind());
    let mut out = Vec::new();
    for (idx, block) in series.entries() {
        if idx.d.is_zero() || !idx.is_log_free() {
            continue;
        }
        let dd = cfg.dd(&idx.d)?;
        if dd == 0 {
            continue;
        }
        let v = match block.coeff(-1)?.get(&untw) {
            Some(c) => c.integrate(),
            None => continue,
        };
        if v.is_zero() {
            continue;
        }
        out.push(InvariantRecord {
            theory: Theory::Local,
            d: idx.d.clone(),
            insertion: untw.clone(),
            insertion_class: ring.one(),
            psi_power: 0,
            value: -v / rat_int(dd),
        });
    }
    out.sort_by(|a, b| a.d.cmp(&b.d));
    Ok(out)
}

/// Relative theory (maximal tangency): for every degree with D·d > 0 the
/// one-point invariant `N_d = ⟨[𝟏]_{D·d}⟩_d`, read off the local-avatar
/// J-function as `N_d = (−1)^{D·d}·v_d` with `v_d = ∫_X J_d|_{z^{−1}}`.
///
/// `theory`/`scale` let the root-stack pipeline reuse this: orbifold values
/// are the relative ones divided by `r^{ρ_-}` (here ρ_- = 0: the single
/// insertion has positive contact).
fn extract_max_tangency(
    j: &JFunction,
    cfg: &GeometryConfig,
    theory: Theory,
    scale: &Rational,
) -> Result<Vec<InvariantRecord>> {
    let series = &j.series;
    let ring = series.ring();
    let untw = SectorLabel::untwisted(series.kind());
    let mut out = Vec::new();
    for (idx, block) in series.entries() {
        if idx.d.is_zero() || !idx.is_log_free() {
            continue;
        }
        let dd = cfg.dd(&idx.d)?;
        if dd == 0 {
            continue;
        }
        let v = match block.coeff(-1)?.get(&untw) {
            Some(c) => c.integrate(),
            None => continue,
        };
        let sign = if dd % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        let value = v * sign * scale;
        if value.is_zero() {
            continue;
        }
        out.push(InvariantRecord {
            theory,
            d: idx.d.clone(),
            insertion: SectorLabel::contact(dd),
            insertion_class: ring.one(),
            psi_power: 0,
            value,
        });
    }
    out.sort_by(|a, b| a.d.cmp(&b.d));
    Ok(out)
}

pub fn extract_relative(j: &JFunction, cfg: &GeometryConfig) -> Result<Vec<InvariantRecord>> {
    extract_max_tangency(j, cfg, Theory::Relative, &Rational::one())
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// Run the full I → mirror inverse → J → invariants pipeline for one theory.
pub fn run_pipeline(
    cfg: &GeometryConfig,
    theory: Theory,
    order: u64,
    psi_max: u32,
) -> Result<(JFunction, Vec<InvariantRecord>)> {
    match theory {
        Theory::Absolute => {
            let j = assemble_j(&i_absolute(cfg)?, &cfg.divisor, &[], order)?;
            let records = extract_absolute(&j, psi_max)?;
            Ok((j, records))
        }
        Theory::Local => {
            let j = assemble_j(&i_local(cfg)?, &cfg.divisor, &[], order)?;
            let records = extract_local(&j, cfg)?;
            Ok((j, records))
        }
        Theory::Relative => {
            let avatar = local_avatar(&i_relative(cfg)?, &cfg.divisor)?;
            let j = assemble_j(&avatar, &cfg.divisor, &[], order)?;
            let records = extract_relative(&j, cfg)?;
            Ok((j, records))
        }
        Theory::RootStack => {
            let transferred = root_transfer(&i_root_stack(cfg)?, cfg)?;
            let avatar = local_avatar(&transferred, &cfg.divisor)?;
            let j = assemble_j(&avatar, &cfg.divisor, &[], order)?;
            // The single insertion has positive contact, so ρ_- = 0 and the
            // orbifold values equal the relative ones divided by r⁰ = 1.
            let scale = Rational::one() / rho_minus_scale(cfg.r, 0);
            let records = extract_max_tangency(&j, cfg, Theory::RootStack, &scale)?;
            Ok((j, records))
        }
    }
}

/// One row of the root-stack/relative correspondence check.
#[derive(Clone, Debug)]
pub struct CorrespondenceRow {
    pub r: u64,
    pub series_agree: bool,
    pub first_series_difference: Option<String>,
    pub invariants_agree: bool,
    pub records_root: Vec<InvariantRecord>,
    pub records_relative: Vec<InvariantRecord>,
}

/// For each r in `r_list`, identify the root-stack series with the relative
/// one and compare both the coefficients and the extracted invariants
/// (orbifold values scaled by r^{ρ_-}). Refuses with
/// [`Error::RootIndexTooSmall`] if any r does not exceed the largest contact
/// order in range.
pub fn correspondence_table(
    cfg: &GeometryConfig,
    r_list: &[u64],
    order: u64,
) -> Result<Vec<CorrespondenceRow>> {
    let relative = i_relative(cfg)?;
    let (_, records_relative) = run_pipeline(cfg, Theory::Relative, order, 0)?;
    let mut rows = Vec::new();
    for &r in r_list {
        let cfg_r = GeometryConfig { r, ..cfg.clone() };
        let transferred = root_transfer(&i_root_stack(&cfg_r)?, &cfg_r)?;
        let series_agree = transferred.coefficients_equal(&relative);
        let first_series_difference = transferred
            .first_difference(&relative)
            .map(|(idx, e)| format!("index {:?}, z^{e}", (idx.d.coords, idx.k, idx.logs)));
        let (_, records_root) = run_pipeline(&cfg_r, Theory::RootStack, order, 0)?;
        let scaled: Vec<Rational> = records_root
            .iter()
            .map(|rec| {
                let rho_minus = u32::from(matches!(rec.insertion, SectorLabel::Contact(c) if c < 0));
                &rec.value * rho_minus_scale(r, rho_minus)
            })
            .collect();
        let invariants_agree = scaled.len() == records_relative.len()
            && scaled
                .iter()
                .zip(&records_relative)
                .all(|(v, rec)| *v == rec.value);
        rows.push(CorrespondenceRow {
            r,
            series_agree,
            first_series_difference,
            invariants_agree,
            records_root,
            records_relative: records_relative.clone(),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{rat, BaseRing};
    use crate::ifactory::BaseJProvider;
    use crate::sectors::StateVector;
    use crate::zseries::{Bounds, LaurentBlock};

    fn p2_cubic(r: u64, d_max: u64) -> GeometryConfig {
        let ring = BaseRing::projective_space(2).unwrap();
        let divisor = ring.basis_element(1).scale(&rat_int(3));
        GeometryConfig::new(
            ring,
            divisor,
            r,
            vec![],
            Bounds { d_max: vec![d_max], k_total_max: 0, z_min: -40 },
            BaseJProvider::ProjectiveSpace { n: 2 },
        )
        .unwrap()
    }

    #[test]
    fn absolute_p2_descendants() {
        // ⟨pt ψ^{3d−2}⟩_d = 1/(d!)³ for ℙ²; the mirror map is trivial.
        let cfg = p2_cubic(1, 3);
        let (j, records) = run_pipeline(&cfg, Theory::Absolute, 3, 8).unwrap();
        assert!(j.plan.log_shifts.iter().all(ScalarSeries::is_zero));
        let pt = cfg.ring.basis_element(2);
        for d in 1..=3u64 {
            let expected = {
                let mut f = Rational::one();
                for t in 1..=d {
                    f *= rat_int(t as i64);
                }
                Rational::one() / (&f * &f * &f)
            };
            let rec = records
                .iter()
                .find(|r| {
                    r.d == CurveClass::new(vec![d])
                        && r.psi_power == (3 * d - 2) as u32
                        && r.insertion_class == pt
                })
                .unwrap_or_else(|| panic!("missing <pt psi^{}> at d={d}", 3 * d - 2));
            assert_eq!(rec.value, expected, "d={d}");
        }
    }

    #[test]
    fn local_pipeline_oracle() {
        // Mirror map f_d and string reading v_d for K_{ℙ²}, then the local
        // invariants K_d = −v_d/(3d).
        let cfg = p2_cubic(1, 3);
        let (j, records) = run_pipeline(&cfg, Theory::Local, 3, 0).unwrap();
        let f = [rat_int(-6), rat_int(45), rat_int(-560)];
        for (d, fd) in f.iter().enumerate() {
            let key = (CurveClass::new(vec![d as u64 + 1]), vec![]);
            assert_eq!(j.plan.forward_log[0].terms.get(&key), Some(fd), "f_{}", d + 1);
        }
        let expected_k = [rat_int(3), rat(-45, 8), rat(244, 9)];
        assert_eq!(records.len(), 3);
        for (d, kd) in expected_k.iter().enumerate() {
            assert_eq!(&records[d].value, kd, "K_{}", d + 1);
            assert_eq!(records[d].d, CurveClass::new(vec![d as u64 + 1]));
        }
    }

    #[test]
    fn relative_pipeline_oracle() {
        // Maximal-tangency invariants N_d of (ℙ², E).
        let cfg = p2_cubic(1, 3);
        let (j, records) = run_pipeline(&cfg, Theory::Relative, 3, 0).unwrap();
        // The negative-contact corrections transport to the same divisor
        // shift as the local theory.
        let f = [rat_int(-6), rat_int(45), rat_int(-560)];
        for (d, fd) in f.iter().enumerate() {
            let key = (CurveClass::new(vec![d as u64 + 1]), vec![]);
            assert_eq!(j.plan.forward_log[0].terms.get(&key), Some(fd), "f_{}", d + 1);
        }
        let expected_n = [rat_int(9), rat(135, 4), rat_int(244)];
        assert_eq!(records.len(), 3);
        for (d, nd) in expected_n.iter().enumerate() {
            assert_eq!(&records[d].value, nd, "N_{}", d + 1);
            assert_eq!(records[d].insertion, SectorLabel::contact(3 * (d as i64 + 1)));
        }
    }

    #[test]
    fn root_stack_pipeline_matches_relative() {
        let cfg = p2_cubic(17, 3);
        let (_, root_records) = run_pipeline(&cfg, Theory::RootStack, 3, 0).unwrap();
        let rel_cfg = GeometryConfig { r: 1, ..cfg.clone() };
        let (_, rel_records) = run_pipeline(&rel_cfg, Theory::Relative, 3, 0).unwrap();
        assert_eq!(root_records.len(), rel_records.len());
        for (a, b) in root_records.iter().zip(&rel_records) {
            assert_eq!(a.value, b.value);
            assert_eq!(a.insertion, b.insertion);
            assert_eq!(a.theory, Theory::RootStack);
        }
    }

    #[test]
    fn correspondence_table_and_root_index_guard() {
        let cfg = p2_cubic(1, 2);
        let rows = correspondence_table(&cfg, &[7, 11], 2).unwrap();
        for row in &rows {
            assert!(row.series_agree, "r={}: {:?}", row.r, row.first_series_difference);
            assert!(row.invariants_agree, "r={}", row.r);
        }
        // D·d reaches 6 at d_max = 2, so r = 6 must be refused.
        assert!(matches!(
            correspondence_table(&cfg, &[6], 2),
            Err(Error::RootIndexTooSmall(_))
        ));
    }

    #[test]
    fn split_rejects_z_tail() {
        let cfg = p2_cubic(1, 2);
        let mut i = i_absolute(&cfg).unwrap();
        i.insert(
            SeriesIndex { d: CurveClass::new(vec![1]), k: vec![], logs: vec![0] },
            LaurentBlock::from_term(
                2,
                StateVector::from_term(SectorLabel::contact(0), cfg.ring.one()),
            ),
        );
        assert!(matches!(split(&i, &[]), Err(Error::ConeSliceOutOfContract(_))));
    }

    #[test]
    fn assembled_j_is_flat() {
        let cfg = p2_cubic(1, 3);
        for theory in [Theory::Absolute, Theory::Local, Theory::Relative] {
            let (j, _) = run_pipeline(&cfg, theory, 3, 0).unwrap();
            check_flat_parameter(&j, &[]).unwrap();
        }
    }

    #[test]
    fn split_classifies_relative_corrections() {
        // z⁰ of the relative I-function at d: g_d·[𝟏]_{−3d} with
        // g = [2, 15, 560/3].
        let cfg = p2_cubic(1, 3);
        let (tau, tail) = split(&i_relative(&cfg).unwrap(), &[]).unwrap();
        let g = [rat_int(2), rat_int(15), rat(560, 3)];
        for (d, gd) in g.iter().enumerate() {
            let label = SectorLabel::contact(-3 * (d as i64 + 1));
            let key = (CurveClass::new(vec![d as u64 + 1]), vec![]);
            assert_eq!(
                tau.sector_identity.get(&label).and_then(|s| s.terms.get(&key)),
                Some(gd),
                "g_{}",
                d + 1
            );
        }
        assert!(tau.identity.is_zero());
        assert!(tau.divisor.is_empty());
        // The tail holds only negative powers.
        for (_, b) in tail.entries() {
            assert!(b.z_max().map_or(true, |t| t < 0));
        }
    }
}
