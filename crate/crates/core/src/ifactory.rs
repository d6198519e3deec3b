//! Constructors for every I-function of the theory, as [`GradedSeries`].
//!
//! The per-degree base coefficient `J_{X,d}` carries the overall `z`; the
//! `e^{Σ p_i L_i / z}` prefactor is attached at series assembly as log-Novikov
//! strata, so the log-free stratum of every series is the displayed kernel.
//!
//! Supported bases: projective spaces, products of projective spaces /
//! user-supplied toric rings (hypergeometric mode), or an external J-table.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactalg::{rat_int, BaseRing, CurveClass, Rational, RingElement};
use crate::sectors::{LabelKind, RootIndex, SectorLabel, SectorPairingContext, StateVector};
use crate::zseries::{
    ascending_product, exp_divisor_over_z, gamma_ratio, Bounds, FactoredZFunction, GradedSeries,
    LaurentBlock, SeriesIndex,
};

/// Whether the formal equivariant parameter λ is available.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaMode {
    Off,
    Formal,
}

/// How the base J-function is supplied.
#[derive(Clone, Debug)]
pub enum BaseJProvider {
    /// ℙⁿ: the hypergeometric kernel with n+1 copies of the hyperplane class.
    ProjectiveSpace { n: u32 },
    /// General hypergeometric-toric mode: the full list of toric divisor
    /// classes (with multiplicity).
    Toric { divisors: Vec<RingElement> },
    /// Externally supplied per-degree Laurent coefficients (log-free stratum,
    /// overall z included).
    ExternalTable { table: BTreeMap<CurveClass, BTreeMap<i64, RingElement>> },
}

/// Full geometric input: base ring, divisor, root index, extension data, and
/// truncation bounds.
#[derive(Clone, Debug)]
pub struct GeometryConfig {
    pub ring: Arc<BaseRing>,
    pub divisor: RingElement,
    pub r: u64,
    /// Extension integers a_1..a_m.
    pub s: Vec<i64>,
    pub bounds: Bounds,
    pub lambda_mode: LambdaMode,
    /// Truncation order of the formal λ variable (λ^order = 0).
    pub lambda_order: u32,
    /// Hypothesis flags asserted by the user and recorded verbatim.
    pub d_nef_asserted: bool,
    pub log_anticanonical_nef_asserted: bool,
    /// Extra n-range beyond D·d_max for the ambient series, in units of r.
    pub ambient_slack: u64,
    pub provider: BaseJProvider,
}

impl GeometryConfig {
    pub fn new(
        ring: Arc<BaseRing>,
        divisor: RingElement,
        r: u64,
        s: Vec<i64>,
        bounds: Bounds,
        provider: BaseJProvider,
    ) -> Result<GeometryConfig> {
        if r == 0 {
            return Err(Error::Config("root index r must be positive".into()));
        }
        if divisor.is_zero() || divisor.homogeneous_degree() != Some(2) {
            return Err(Error::Config("divisor must be a nonzero degree-2 class".into()));
        }
        if bounds.d_max.len() != ring.num_curve_generators() {
            return Err(Error::Config(format!(
                "bounds give {} degree caps, ring has {} Mori generators",
                bounds.d_max.len(),
                ring.num_curve_generators()
            )));
        }
        // Nef check against the Mori generators.
        for g in 0..ring.num_curve_generators() {
            let mut coords = vec![0u64; ring.num_curve_generators()];
            coords[g] = 1;
            let pairing = ring.intersect(&divisor, &CurveClass::new(coords))?;
            if pairing < 0 {
                return Err(Error::Config(format!(
                    "divisor is not nef: pairing {pairing} with Mori generator {g}"
                )));
            }
        }
        if let BaseJProvider::Toric { divisors } = &provider {
            for t in divisors {
                if t.homogeneous_degree() != Some(2) {
                    return Err(Error::Config("toric divisor classes must have degree 2".into()));
                }
            }
        }
        Ok(GeometryConfig {
            ring,
            divisor,
            r,
            s,
            bounds,
            lambda_mode: LambdaMode::Off,
            lambda_order: 3,
            d_nef_asserted: true,
            log_anticanonical_nef_asserted: true,
            ambient_slack: 2,
            provider,
        })
    }

    /// D·d.
    pub fn dd(&self, d: &CurveClass) -> Result<i64> {
        self.ring.intersect(&self.divisor, d)
    }

    fn check_s_root(&self) -> Result<()> {
        for &a in &self.s {
            if a < 0 || a as u64 >= self.r {
                return Err(Error::Config(format!(
                    "extension datum {a} outside {{0,…,{}}}",
                    self.r - 1
                )));
            }
        }
        Ok(())
    }

    fn check_s_relative(&self) -> Result<()> {
        for &a in &self.s {
            if a <= 0 {
                return Err(Error::Config(format!(
                    "relative extension datum {a} must be a positive integer"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// One series coefficient before sector labelling: either a factored
/// z-function or a pre-expanded Laurent table.
#[derive(Clone, Debug)]
pub enum Kernel {
    Factored(FactoredZFunction),
    Expanded(BTreeMap<i64, RingElement>),
}

impl Kernel {
    pub fn mul_factored(self, f: &FactoredZFunction) -> Result<Kernel> {
        match self {
            Kernel::Factored(g) => Ok(Kernel::Factored(g.mul(f))),
            Kernel::Expanded(m) => Ok(Kernel::Expanded(laurent_mul(&m, &f.expand_ring()?))),
        }
    }

    pub fn expand(&self) -> Result<BTreeMap<i64, RingElement>> {
        match self {
            Kernel::Factored(f) => f.expand_ring(),
            Kernel::Expanded(m) => Ok(m.clone()),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Kernel::Factored(f) => f.render(),
            Kernel::Expanded(m) => render_laurent(m),
        }
    }
}

fn laurent_mul(
    a: &BTreeMap<i64, RingElement>,
    b: &BTreeMap<i64, RingElement>,
) -> BTreeMap<i64, RingElement> {
    let mut out: BTreeMap<i64, RingElement> = BTreeMap::new();
    for (e1, v1) in a {
        for (e2, v2) in b {
            let p = v1.mul(v2);
            if p.is_zero() {
                continue;
            }
            match out.entry(e1 + e2) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(p);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let s = slot.get().add(&p);
                    if s.is_zero() {
                        slot.remove();
                    } else {
                        *slot.get_mut() = s;
                    }
                }
            }
        }
    }
    out
}

/// Render a ring-valued Laurent polynomial, highest power first.
pub fn render_laurent(m: &BTreeMap<i64, RingElement>) -> String {
    if m.is_empty() {
        return "0".to_string();
    }
    m.iter()
        .rev()
        .map(|(e, v)| match e {
            0 => format!("({})", v.render()),
            1 => format!("({})·z", v.render()),
            _ => format!("({})·z^{}", v.render(), e),
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn toric_divisor_list(cfg: &GeometryConfig) -> Result<Vec<RingElement>> {
    match &cfg.provider {
        BaseJProvider::ProjectiveSpace { n } => {
            let h = cfg.ring.basis_element_by_name("H")?;
            Ok(vec![h; *n as usize + 1])
        }
        BaseJProvider::Toric { divisors } => Ok(divisors.clone()),
        BaseJProvider::ExternalTable { .. } => Err(Error::MissingData(
            "hypergeometric kernel requested in external-table mode".into(),
        )),
    }
}

/// The base coefficient J_{X,d} (log-free stratum, overall z included),
/// factored when the provider is hypergeometric.
pub fn j_base_kernel(cfg: &GeometryConfig, d: &CurveClass) -> Result<Kernel> {
    match &cfg.provider {
        BaseJProvider::ExternalTable { table } => table
            .get(d)
            .cloned()
            .map(Kernel::Expanded)
            .ok_or_else(|| Error::MissingData(format!("external J-table has no degree {:?}", d.coords))),
        _ => {
            let divisors = toric_divisor_list(cfg)?;
            Ok(Kernel::Factored(kernel_from_divisors(&cfg.ring, &divisors, d)?))
        }
    }
}

fn kernel_from_divisors(
    ring: &Arc<BaseRing>,
    divisors: &[RingElement],
    d: &CurveClass,
) -> Result<FactoredZFunction> {
    let mut f = FactoredZFunction::z_monomial(ring, 1);
    for di in divisors {
        let c = ring.intersect(di, d)?;
        f = f.mul(&gamma_ratio(di, &rat_int(c)));
    }
    Ok(f)
}

/// J_{X,d} expanded on the untwisted contact sector.
pub fn j_base(cfg: &GeometryConfig, d: &CurveClass) -> Result<LaurentBlock> {
    let kernel = j_base_kernel(cfg, d)?;
    block_from_kernel(&kernel, SectorLabel::contact(0))
}

fn block_from_kernel(kernel: &Kernel, sector: SectorLabel) -> Result<LaurentBlock> {
    let mut b = LaurentBlock::zero();
    for (e, v) in kernel.expand()? {
        b.add_term(e, StateVector::from_term(sector.clone(), v));
    }
    Ok(b)
}

// ---------------------------------------------------------------------------
// Enumeration and assembly
// ---------------------------------------------------------------------------

/// All curve classes with coordinates bounded componentwise by `d_max`.
pub fn enumerate_curve_classes(d_max: &[u64]) -> Vec<CurveClass> {
    let mut out = vec![Vec::new()];
    for &m in d_max {
        let mut next = Vec::new();
        for prefix in &out {
            for c in 0..=m {
                let mut p = prefix.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter().map(CurveClass::new).collect()
}

/// All extension multi-indices of length `m` with total ≤ `k_total_max`.
pub fn enumerate_ext_indices(m: usize, k_total_max: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        let mut next = Vec::new();
        for prefix in &out {
            let used: u64 = prefix.iter().sum();
            for c in 0..=(k_total_max - used) {
                let mut p = prefix.clone();
                p.push(c);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

struct EntrySpec {
    d: CurveClass,
    k: Vec<u64>,
    sector: SectorLabel,
    kernel: Kernel,
}

/// Assemble entries into a series: expand each kernel on its sector (in
/// parallel), attach the `e^{Σ class_i L_i / z}` prefactor, optionally
/// canonicalize twisted coefficients, and truncate to the bounds.
fn build_series(
    ring: &Arc<BaseRing>,
    kind: LabelKind,
    num_ext: usize,
    bounds: &Bounds,
    prefactor_classes: &[RingElement],
    entries: Vec<EntrySpec>,
    canonicalize: Option<&SectorPairingContext>,
) -> Result<GradedSeries> {
    let num_logs = prefactor_classes.len();
    let mut series = GradedSeries::new(ring.clone(), kind, num_ext, num_logs, bounds.clone());
    let expanded = parallel_map(entries, |e| -> Result<(SeriesIndex, LaurentBlock)> {
        let block = block_from_kernel(&e.kernel, e.sector.clone())?;
        Ok((
            SeriesIndex { d: e.d, k: e.k, logs: vec![0; num_logs] },
            block,
        ))
    });
    for item in expanded {
        let (idx, block) = item?;
        series.insert(idx, block);
    }
    let mut prefactor = GradedSeries::new(ring.clone(), kind, num_ext, num_logs, bounds.clone());
    prefactor.insert(
        prefactor.origin_index(),
        LaurentBlock::from_term(0, StateVector::from_term(SectorLabel::untwisted(kind), ring.one())),
    );
    for (i, cls) in prefactor_classes.iter().enumerate() {
        prefactor = prefactor.mul(&exp_divisor_over_z(cls, i, &prefactor))?;
    }
    let mut out = series.mul(&prefactor)?.truncate(bounds.clone());
    // Twisted coefficients live in H*(D): canonicalize after the prefactor
    // so every stored class is a canonical representative.
    if let Some(ctx) = canonicalize {
        out = out.map_blocks(|_, b| {
            b.map_sectors(|l, c| {
                if l.is_untwisted() {
                    Ok((l.clone(), c.clone()))
                } else {
                    Ok((l.clone(), ctx.canonicalize_restriction(c)))
                }
            })
        })?;
    }
    Ok(out)
}

fn divisor_basis_classes(ring: &Arc<BaseRing>) -> Vec<RingElement> {
    ring.divisor_basis()
        .iter()
        .map(|&i| ring.basis_element(i))
        .collect()
}

// ---------------------------------------------------------------------------
// The I-functions
// ---------------------------------------------------------------------------

/// Kernel and sector of the absolute coefficient at degree d.
pub fn kernel_absolute(cfg: &GeometryConfig, d: &CurveClass) -> Result<(Kernel, SectorLabel)> {
    Ok((j_base_kernel(cfg, d)?, SectorLabel::contact(0)))
}

/// The base series z·e^{Σp_iL_i/z}·Σ J_{X,d}Q^d on the untwisted contact
/// sector (the absolute theory input).
pub fn i_absolute(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let (kernel, sector) = kernel_absolute(cfg, &d)?;
            Ok(EntrySpec { kernel, d, k: vec![], sector })
        })
        .collect::<Result<Vec<_>>>()?;
    build_series(
        &cfg.ring,
        LabelKind::Contact,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// The root-stack I-function: per degree, `J_{X,d}Q^d · ∏_{0<a≤D·d}(D+az) ·
/// gamma_ratio(D/r, (D·d)/r)` on the sector of age ⟨−(D·d)/r⟩.
pub fn kernel_root_stack(cfg: &GeometryConfig, d: &CurveClass) -> Result<(Kernel, SectorLabel)> {
    let r = rat_int(cfg.r as i64);
    let d_r = cfg.divisor.scale(&(Rational::one() / &r));
    let dd = cfg.dd(d)?;
    let kernel = j_base_kernel(cfg, d)?
        .mul_factored(&ascending_product(&cfg.divisor, dd)?)?
        .mul_factored(&gamma_ratio(&d_r, &(rat_int(dd) / &r)))?;
    Ok((kernel, SectorLabel::age(rat_int(-dd) / &r)))
}

pub fn i_root_stack(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let (kernel, sector) = kernel_root_stack(cfg, &d)?;
            Ok(EntrySpec { kernel, sector, d, k: vec![] })
        })
        .collect::<Result<Vec<_>>>()?;
    build_series(
        &cfg.ring,
        LabelKind::Age,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// x^k/(z^{|k|}∏k_i!) as a factored kernel multiplier.
fn ext_variable_factor(cfg: &GeometryConfig, k: &[u64]) -> FactoredZFunction {
    let ktot: i64 = k.iter().sum::<u64>() as i64;
    let mut scalar = Rational::one();
    for &ki in k {
        for t in 1..=ki {
            scalar /= rat_int(t as i64);
        }
    }
    FactoredZFunction::z_monomial(&cfg.ring, -ktot).scale(&scalar)
}

pub fn kernel_root_stack_extended(
    cfg: &GeometryConfig,
    d: &CurveClass,
    k: &[u64],
) -> Result<(Kernel, SectorLabel)> {
    cfg.check_s_root()?;
    let r = rat_int(cfg.r as i64);
    let d_r = cfg.divisor.scale(&(Rational::one() / &r));
    let dd = cfg.dd(d)?;
    let sigma: i64 = k.iter().zip(&cfg.s).map(|(&ki, &ai)| ki as i64 * ai).sum();
    let c = (rat_int(dd) - rat_int(sigma)) / &r;
    let kernel = j_base_kernel(cfg, d)?
        .mul_factored(&ext_variable_factor(cfg, k))?
        .mul_factored(&ascending_product(&cfg.divisor, dd)?)?
        .mul_factored(&gamma_ratio(&d_r, &c))?;
    Ok((kernel, SectorLabel::age((rat_int(-dd) + rat_int(sigma)) / &r)))
}

/// The S-extended root-stack I-function.
pub fn i_root_stack_extended(cfg: &GeometryConfig) -> Result<GradedSeries> {
    cfg.check_s_root()?;
    let m = cfg.s.len();
    let mut entries = Vec::new();
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        for k in enumerate_ext_indices(m, cfg.bounds.k_total_max) {
            let (kernel, sector) = kernel_root_stack_extended(cfg, &d, &k)?;
            entries.push(EntrySpec { kernel, sector, d: d.clone(), k });
        }
    }
    build_series(
        &cfg.ring,
        LabelKind::Age,
        m,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// The non-extended relative I-function: `J_{X,d}Q^d·∏_{0<a≤D·d−1}(D+az)` on
/// the contact sector [𝟏]_{−D·d}, with twisted coefficients canonicalized
/// modulo restriction to D.
pub fn kernel_relative(cfg: &GeometryConfig, d: &CurveClass) -> Result<(Kernel, SectorLabel)> {
    let dd = cfg.dd(d)?;
    let kernel = j_base_kernel(cfg, d)?
        .mul_factored(&ascending_product(&cfg.divisor, (dd - 1).max(0))?)?;
    Ok((kernel, SectorLabel::contact(-dd)))
}

pub fn i_relative(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let ctx = SectorPairingContext::new(cfg.ring.clone(), cfg.divisor.clone(), RootIndex::Relative)?;
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let (kernel, sector) = kernel_relative(cfg, &d)?;
            Ok(EntrySpec { kernel, sector, d, k: vec![] })
        })
        .collect::<Result<Vec<_>>>()?;
    build_series(
        &cfg.ring,
        LabelKind::Contact,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        Some(&ctx),
    )
}

/// The S-extended relative I-function (a_i ∈ ℤ_{>0}): the I₊ branch
/// (Σk_ia_i < D·d) divides the ascending product by `(D + (D·d − Σk_ia_i)z)`;
/// the I₋ branch (Σk_ia_i ≥ D·d) keeps the full ascending product.
pub fn kernel_relative_extended(
    cfg: &GeometryConfig,
    d: &CurveClass,
    k: &[u64],
) -> Result<(Kernel, SectorLabel)> {
    cfg.check_s_relative()?;
    let dd = cfg.dd(d)?;
    let sigma: i64 = k.iter().zip(&cfg.s).map(|(&ki, &ai)| ki as i64 * ai).sum();
    let mut kernel = j_base_kernel(cfg, d)?
        .mul_factored(&ext_variable_factor(cfg, k))?
        .mul_factored(&ascending_product(&cfg.divisor, dd)?)?;
    if sigma < dd {
        kernel = kernel.mul_factored(&FactoredZFunction::one(&cfg.ring).push_factor(
            cfg.divisor.clone(),
            rat_int(dd - sigma),
            true,
        ))?;
    }
    Ok((kernel, SectorLabel::contact(-dd + sigma)))
}

pub fn i_relative_extended(cfg: &GeometryConfig) -> Result<GradedSeries> {
    cfg.check_s_relative()?;
    let ctx = SectorPairingContext::new(cfg.ring.clone(), cfg.divisor.clone(), RootIndex::Relative)?;
    let m = cfg.s.len();
    let mut entries = Vec::new();
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        for k in enumerate_ext_indices(m, cfg.bounds.k_total_max) {
            let (kernel, sector) = kernel_relative_extended(cfg, &d, &k)?;
            entries.push(EntrySpec { kernel, sector, d: d.clone(), k });
        }
    }
    build_series(
        &cfg.ring,
        LabelKind::Contact,
        m,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        Some(&ctx),
    )
}

/// The ambient (weighted-projective-bundle) I-function with the extra
/// Novikov variable q. The q-exponent n is stored as the single extension
/// index; the extra log variable L_q (class D) is the last log slot.
/// Coefficients vanish for n < D·d.
pub fn kernel_ambient(
    cfg: &GeometryConfig,
    d: &CurveClass,
    n: i64,
) -> Result<Option<(Kernel, SectorLabel)>> {
    let dd = cfg.dd(d)?;
    if n < dd {
        return Ok(None);
    }
    let r = rat_int(cfg.r as i64);
    let d_r = cfg.divisor.scale(&(Rational::one() / &r));
    let mut scalar = Rational::one();
    for t in 1..=(n - dd) {
        scalar /= rat_int(t);
    }
    let kernel = j_base_kernel(cfg, d)?
        .mul_factored(&FactoredZFunction::z_monomial(&cfg.ring, -(n - dd)).scale(&scalar))?
        .mul_factored(&ascending_product(&cfg.divisor, n)?)?
        .mul_factored(&gamma_ratio(&d_r, &(rat_int(n) / &r)))?;
    Ok(Some((kernel, SectorLabel::age(rat_int(-n) / &r))))
}

pub fn i_ambient_tilde(cfg: &GeometryConfig) -> Result<GradedSeries> {
    if cfg.lambda_mode != LambdaMode::Off {
        return Err(Error::Config("ambient series is nonequivariant (lambda_mode off)".into()));
    }
    let dd_max: i64 = enumerate_curve_classes(&cfg.bounds.d_max)
        .iter()
        .map(|d| cfg.dd(d).unwrap_or(0))
        .max()
        .unwrap_or(0);
    let n_max = dd_max as u64 + cfg.r * cfg.ambient_slack;
    let bounds = Bounds {
        d_max: cfg.bounds.d_max.clone(),
        k_total_max: n_max,
        z_min: cfg.bounds.z_min,
    };
    let mut entries = Vec::new();
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        let dd = cfg.dd(&d)?;
        for n in dd..=(n_max as i64) {
            if let Some((kernel, sector)) = kernel_ambient(cfg, &d, n)? {
                entries.push(EntrySpec { kernel, sector, d: d.clone(), k: vec![n as u64] });
            }
        }
    }
    let mut prefactor_classes = divisor_basis_classes(&cfg.ring);
    prefactor_classes.push(cfg.divisor.clone());
    build_series(&cfg.ring, LabelKind::Age, 1, &bounds, &prefactor_classes, entries, None)
}

/// The direct toric formula for the root stack: the gamma quotient over all
/// toric divisors of X_{D,r}, i.e. one copy of the D-factor replaced by
/// `gamma_ratio(D/r, (D·d)/r)`.
pub fn kernel_toric_direct(
    cfg: &GeometryConfig,
    d: &CurveClass,
) -> Result<(Kernel, SectorLabel)> {
    let divisors = toric_divisor_list(cfg)?;
    let pos = divisors
        .iter()
        .position(|t| *t == cfg.divisor)
        .ok_or_else(|| Error::MissingData("D is not among the supplied toric divisors".into()))?;
    let r = rat_int(cfg.r as i64);
    let d_r = cfg.divisor.scale(&(Rational::one() / &r));
    let dd = cfg.dd(d)?;
    let mut f = FactoredZFunction::z_monomial(&cfg.ring, 1);
    for (i, di) in divisors.iter().enumerate() {
        if i == pos {
            f = f.mul(&gamma_ratio(&d_r, &(rat_int(dd) / &r)));
        } else {
            f = f.mul(&gamma_ratio(di, &rat_int(cfg.ring.intersect(di, d)?)));
        }
    }
    Ok((Kernel::Factored(f), SectorLabel::age(rat_int(-dd) / &r)))
}

pub fn i_toric_direct(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let (kernel, sector) = kernel_toric_direct(cfg, &d)?;
            Ok(EntrySpec { kernel, sector, d, k: vec![] })
        })
        .collect::<Result<Vec<_>>>()?;
    build_series(
        &cfg.ring,
        LabelKind::Age,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// The local I-function for 𝒪_X(−D): `J_{X,d}Q^d·∏_{a=0}^{D·d−1}(−D−az)`,
/// untwisted contact sector throughout.
pub fn kernel_local(cfg: &GeometryConfig, d: &CurveClass) -> Result<(Kernel, SectorLabel)> {
    let dd = cfg.dd(d)?;
    let mut f = FactoredZFunction::one(&cfg.ring);
    for a in 0..dd {
        f = f.push_factor(cfg.divisor.scale(&rat_int(-1)), rat_int(-a), false);
    }
    Ok((j_base_kernel(cfg, d)?.mul_factored(&f)?, SectorLabel::contact(0)))
}

pub fn i_local(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let (kernel, sector) = kernel_local(cfg, &d)?;
            Ok(EntrySpec { kernel, sector, d, k: vec![] })
        })
        .collect::<Result<Vec<_>>>()?;
    build_series(
        &cfg.ring,
        LabelKind::Contact,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// The J-function of the r-th root gerbe 𝔛_r: the r-sector average
/// `r^{-1} Σ_j (ι_j)_* J_X`.
pub fn i_gerbe_j(cfg: &GeometryConfig) -> Result<GradedSeries> {
    let r = cfg.r;
    let inv_r = Rational::one() / rat_int(r as i64);
    let mut entries = Vec::new();
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        for j in 0..r {
            let kernel = match j_base_kernel(cfg, &d)? {
                Kernel::Factored(f) => Kernel::Factored(f.scale(&inv_r)),
                Kernel::Expanded(m) => Kernel::Expanded(
                    m.into_iter().map(|(e, v)| (e, v.scale(&inv_r))).collect(),
                ),
            };
            entries.push(EntrySpec {
                kernel,
                sector: SectorLabel::age(rat_int(j as i64) / rat_int(r as i64)),
                d: d.clone(),
                k: vec![],
            });
        }
    }
    build_series(
        &cfg.ring,
        LabelKind::Age,
        0,
        &cfg.bounds,
        &divisor_basis_classes(&cfg.ring),
        entries,
        None,
    )
}

/// The double-twisted gerbe I-function with λ a formal nilpotent variable
/// (λ^{lambda_order} = 0), on the selection-rule sector ⟨−(D·d)/r⟩. The λ=0
/// specialization reproduces `i_root_stack` coefficientwise.
///
/// Returns the series over the extended ring `H*(X) ⊗ ℚ[λ]/(λ^N)` together
/// with that ring (use [`specialize_lambda_zero`] to come back).
pub fn i_gerbe_twisted(cfg: &GeometryConfig) -> Result<(GradedSeries, Arc<BaseRing>)> {
    if cfg.lambda_mode != LambdaMode::Formal {
        return Err(Error::Config(
            "i_gerbe_twisted needs lambda_mode = formal".into(),
        ));
    }
    let n_lambda = cfg.lambda_order as usize;
    let lambda_ring = BaseRing::nilpotent_line("λ", cfg.lambda_order)?;
    let big = BaseRing::product(&[cfg.ring.clone(), lambda_ring])?;
    let embed = |v: &RingElement| embed_class(v, &big, n_lambda);
    let lambda = big.basis_element(1);
    let divisors = toric_divisor_list(cfg)?
        .into_iter()
        .map(|t| embed(&t))
        .collect::<Vec<_>>();
    let d_big = embed(&cfg.divisor);
    // ℂ*-weight on 𝒪(D) is 1 and on 𝒪(D/r) is 1/r (the only admissible choice).
    let d_lambda = d_big.add(&lambda);
    let r = rat_int(cfg.r as i64);
    let d_lambda_r = d_lambda.scale(&(Rational::one() / &r));
    let entries = enumerate_curve_classes(&cfg.bounds.d_max)
        .into_iter()
        .map(|d| {
            let dd = cfg.dd(&d)?;
            let kernel = Kernel::Factored(
                kernel_from_divisors(&big, &divisors, &d)?
                    .mul(&ascending_product(&d_lambda, dd)?)
                    .mul(&gamma_ratio(&d_lambda_r, &(rat_int(dd) / &r))),
            );
            Ok(EntrySpec {
                kernel,
                sector: SectorLabel::age(rat_int(-dd) / &r),
                d,
                k: vec![],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let prefactor_classes: Vec<RingElement> = divisor_basis_classes(&cfg.ring)
        .iter()
        .map(embed)
        .collect();
    let series = build_series(
        &big,
        LabelKind::Age,
        0,
        &cfg.bounds,
        &prefactor_classes,
        entries,
        None,
    )?;
    Ok((series, big))
}

fn embed_class(v: &RingElement, big: &Arc<BaseRing>, n_lambda: usize) -> RingElement {
    let mut coeffs = vec![Rational::zero(); big.dim()];
    for (i, c) in v.coeffs().iter().enumerate() {
        coeffs[i * n_lambda] = c.clone();
    }
    big.element(coeffs).expect("embedded coefficient vector has the product dimension")
}

/// Specialize a series over `H*(X) ⊗ ℚ[λ]/(λ^N)` at λ = 0, landing back in
/// the base ring.
pub fn specialize_lambda_zero(
    series: &GradedSeries,
    base: &Arc<BaseRing>,
    n_lambda: usize,
) -> Result<GradedSeries> {
    if series.ring().dim() != base.dim() * n_lambda {
        return Err(Error::Domain(format!(
            "ring of dimension {} is not {} ⊗ ℚ[λ]/(λ^{})",
            series.ring().dim(),
            base.dim(),
            n_lambda
        )));
    }
    let mut out = GradedSeries::new(
        base.clone(),
        series.kind(),
        series.num_ext(),
        series.num_logs(),
        series.bounds().clone(),
    );
    for (idx, block) in series.entries() {
        let mut nb = LaurentBlock::zero();
        for (e, v) in block.iter() {
            let mut nv = StateVector::zero();
            for (l, c) in v.iter() {
                let coeffs: Vec<Rational> =
                    (0..base.dim()).map(|i| c.coeff(i * n_lambda).clone()).collect();
                nv.add_term(l.clone(), base.element(coeffs)?);
            }
            nb.add_term(*e, nv);
        }
        if let Some(w) = block.window_min() {
            nb = nb.truncate(w);
        }
        out.insert(idx.clone(), nb);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parallel map
// ---------------------------------------------------------------------------

fn thread_cap() -> usize {
    std::env::var("ROOTMIRROR_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Order-preserving parallel map over independent work items; parallelism is
/// capped by ROOTMIRROR_THREADS.
pub(crate) fn parallel_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync,
{
    let threads = thread_cap().min(items.len().max(1));
    if threads <= 1 {
        return items.into_iter().map(f).collect();
    }
    let indexed: Vec<(usize, T)> = items.into_iter().enumerate().collect();
    let chunk_size = indexed.len().div_ceil(threads);
    let mut chunks: Vec<Vec<(usize, T)>> = Vec::new();
    let mut it = indexed.into_iter();
    loop {
        let chunk: Vec<(usize, T)> = it.by_ref().take(chunk_size).collect();
        if chunk.is_empty() {
            break;
        }
        chunks.push(chunk);
    }
    let f = &f;
    let mut results: Vec<Vec<(usize, U)>> = std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                s.spawn(move || chunk.into_iter().map(|(i, t)| (i, f(t))).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let total: usize = results.iter().map(Vec::len).sum();
    let mut slots: Vec<Option<U>> = (0..total).map(|_| None).collect();
    for batch in results.drain(..) {
        for (i, u) in batch {
            slots[i] = Some(u);
        }
    }
    slots.into_iter().map(|u| u.expect("missing parallel result")).collect()
}

/// Render one graded-series coefficient with its factored kernel (when the
/// provider is hypergeometric), for the CLI `expand` command.
pub fn describe_coefficient(kernel: &Kernel, sector: &SectorLabel) -> Result<(String, String)> {
    let factored = kernel.render();
    let expanded = format!("({}) on {}", render_laurent(&kernel.expand()?), sector.render());
    Ok((factored, expanded))
}
