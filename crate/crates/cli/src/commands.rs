//! Command implementations: ifun, invariants, verify, expand.

use num_traits::Zero;

use rootmirror_core::exactalg::{format_rational, rat, rat_int, CurveClass, Rational};
use rootmirror_core::ifactory::{
    describe_coefficient, enumerate_curve_classes, enumerate_ext_indices, i_absolute,
    i_ambient_tilde, i_gerbe_j, i_gerbe_twisted, i_local, i_relative, i_relative_extended,
    i_root_stack, i_root_stack_extended, i_toric_direct, kernel_absolute, kernel_ambient,
    kernel_local, kernel_relative, kernel_relative_extended, kernel_root_stack,
    kernel_root_stack_extended, kernel_toric_direct, specialize_lambda_zero, GeometryConfig,
    Kernel, LambdaMode,
};
use rootmirror_core::mirror::{
    correspondence_table, max_divisor_degree, run_pipeline, InvariantRecord, Theory,
};
use rootmirror_core::sectors::{
    pair_relative, pair_root_stack, RootIndex, SectorLabel, SectorPairingContext,
};
use rootmirror_core::zseries::{Bounds, GradedSeries, SeriesIndex};
use rootmirror_core::Error as CoreError;

use crate::report::{CheckVerdict, Table};
use crate::CliError;

/// Which I-function family a run addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TheoryChoice {
    Absolute,
    RootStack,
    RootStackExtended,
    Relative,
    RelativeExtended,
    Ambient,
    Local,
    Toric,
    GerbeJ,
    GerbeTwisted,
}

impl TheoryChoice {
    pub fn parse(s: &str) -> Result<TheoryChoice, CliError> {
        Ok(match s {
            "absolute" => TheoryChoice::Absolute,
            "root-stack" => TheoryChoice::RootStack,
            "extended" | "root-stack-extended" => TheoryChoice::RootStackExtended,
            "relative" => TheoryChoice::Relative,
            "relative-extended" => TheoryChoice::RelativeExtended,
            "ambient" => TheoryChoice::Ambient,
            "local" => TheoryChoice::Local,
            "toric" => TheoryChoice::Toric,
            "gerbe" => TheoryChoice::GerbeJ,
            "gerbe-twisted" => TheoryChoice::GerbeTwisted,
            other => {
                return Err(CliError::config(format!(
                    "unknown theory '{other}' (expected one of: absolute, root-stack, \
                     root-stack-extended, relative, relative-extended, ambient, local, \
                     toric, gerbe, gerbe-twisted)"
                )))
            }
        })
    }

    pub fn render(self) -> &'static str {
        match self {
            TheoryChoice::Absolute => "absolute",
            TheoryChoice::RootStack => "root-stack",
            TheoryChoice::RootStackExtended => "root-stack-extended",
            TheoryChoice::Relative => "relative",
            TheoryChoice::RelativeExtended => "relative-extended",
            TheoryChoice::Ambient => "ambient",
            TheoryChoice::Local => "local",
            TheoryChoice::Toric => "toric",
            TheoryChoice::GerbeJ => "gerbe",
            TheoryChoice::GerbeTwisted => "gerbe-twisted",
        }
    }

    fn uses_root_side_s(self) -> bool {
        matches!(
            self,
            TheoryChoice::RootStack
                | TheoryChoice::RootStackExtended
                | TheoryChoice::Ambient
                | TheoryChoice::Toric
                | TheoryChoice::GerbeJ
                | TheoryChoice::GerbeTwisted
        )
    }
}

/// Field-level S-range validation for the selected theory.
pub fn validate_s(cfg: &GeometryConfig, theory: TheoryChoice) -> Result<(), CliError> {
    if cfg.s.is_empty() {
        return Ok(());
    }
    if theory.uses_root_side_s() {
        for &a in &cfg.s {
            if a < 0 || a as u64 >= cfg.r {
                return Err(CliError::config(format!(
                    "s: extension datum {a} outside {{0,…,{}}} for r = {} in {} mode",
                    cfg.r - 1,
                    cfg.r,
                    theory.render()
                )));
            }
        }
    }
    if matches!(theory, TheoryChoice::Relative | TheoryChoice::RelativeExtended) {
        for &a in &cfg.s {
            if a <= 0 {
                return Err(CliError::config(format!(
                    "s: extension datum {a} must be a positive contact order in {} mode",
                    theory.render()
                )));
            }
        }
    }
    Ok(())
}

/// Compute the selected I-function series.
pub fn build_series(cfg: &GeometryConfig, theory: TheoryChoice) -> Result<GradedSeries, CliError> {
    Ok(match theory {
        TheoryChoice::Absolute => i_absolute(cfg)?,
        TheoryChoice::RootStack => i_root_stack(cfg)?,
        TheoryChoice::RootStackExtended => i_root_stack_extended(cfg)?,
        TheoryChoice::Relative => i_relative(cfg)?,
        TheoryChoice::RelativeExtended => i_relative_extended(cfg)?,
        TheoryChoice::Ambient => i_ambient_tilde(cfg)?,
        TheoryChoice::Local => i_local(cfg)?,
        TheoryChoice::Toric => i_toric_direct(cfg)?,
        TheoryChoice::GerbeJ => i_gerbe_j(cfg)?,
        TheoryChoice::GerbeTwisted => {
            let mut c = cfg.clone();
            c.lambda_mode = LambdaMode::Formal;
            i_gerbe_twisted(&c)?.0
        }
    })
}

/// Coefficient table of a graded series, one row per (index, z-power, sector).
pub fn series_table(title: String, series: &GradedSeries) -> Table {
    let mut rows = Vec::new();
    for (idx, block) in series.entries() {
        for (e, v) in block.iter() {
            for (label, class) in v.iter() {
                rows.push(vec![
                    format!("{:?}", idx.d.coords),
                    format!("{:?}", idx.k),
                    format!("{:?}", idx.logs),
                    format!("z^{e}"),
                    label.render(),
                    class.render(),
                ]);
            }
        }
    }
    Table {
        title,
        columns: ["d", "k", "logs", "z", "sector", "class"].map(String::from).to_vec(),
        rows,
    }
}

/// All per-coefficient kernels of the selected theory at degree `d`, with a
/// short description of the extra index (extension/fiber exponent) if any.
pub fn kernels_for(
    cfg: &GeometryConfig,
    theory: TheoryChoice,
    d: &CurveClass,
) -> Result<Vec<(String, Kernel, SectorLabel)>, CliError> {
    let m = cfg.s.len();
    let mut out = Vec::new();
    match theory {
        TheoryChoice::Absolute => {
            let (k, s) = kernel_absolute(cfg, d)?;
            out.push((String::new(), k, s));
        }
        TheoryChoice::RootStack => {
            let (k, s) = kernel_root_stack(cfg, d)?;
            out.push((String::new(), k, s));
        }
        TheoryChoice::RootStackExtended => {
            for k in enumerate_ext_indices(m, cfg.bounds.k_total_max) {
                let (ker, s) = kernel_root_stack_extended(cfg, d, &k)?;
                out.push((format!("k={k:?}"), ker, s));
            }
        }
        TheoryChoice::Relative => {
            let (k, s) = kernel_relative(cfg, d)?;
            out.push((String::new(), k, s));
        }
        TheoryChoice::RelativeExtended => {
            for k in enumerate_ext_indices(m, cfg.bounds.k_total_max) {
                let (ker, s) = kernel_relative_extended(cfg, d, &k)?;
                out.push((format!("k={k:?}"), ker, s));
            }
        }
        TheoryChoice::Ambient => {
            let dd = cfg.dd(d)?;
            let n_max = dd + (cfg.r * cfg.ambient_slack) as i64;
            for n in dd..=n_max {
                if let Some((ker, s)) = kernel_ambient(cfg, d, n)? {
                    out.push((format!("n={n}"), ker, s));
                }
            }
        }
        TheoryChoice::Local => {
            let (k, s) = kernel_local(cfg, d)?;
            out.push((String::new(), k, s));
        }
        TheoryChoice::Toric => {
            let (k, s) = kernel_toric_direct(cfg, d)?;
            out.push((String::new(), k, s));
        }
        TheoryChoice::GerbeJ | TheoryChoice::GerbeTwisted => {
            return Err(CliError::config(format!(
                "theory {} has no per-coefficient factored form; use ifun",
                theory.render()
            )));
        }
    }
    Ok(out)
}

/// Factored + expanded forms of every kernel at degree `d`.
pub fn kernel_table(
    cfg: &GeometryConfig,
    theory: TheoryChoice,
    d: &CurveClass,
) -> Result<Table, CliError> {
    let mut rows = Vec::new();
    for (desc, kernel, sector) in kernels_for(cfg, theory, d)? {
        let (factored, expanded) = describe_coefficient(&kernel, &sector)?;
        rows.push(vec![format!("{:?}", d.coords), desc, factored, expanded]);
    }
    Ok(Table {
        title: format!("factored coefficients, theory {}", theory.render()),
        columns: ["d", "index", "factored", "expanded"].map(String::from).to_vec(),
        rows,
    })
}

pub fn pipeline_theory(theory: TheoryChoice) -> Result<Theory, CliError> {
    Ok(match theory {
        TheoryChoice::Absolute => Theory::Absolute,
        TheoryChoice::RootStack => Theory::RootStack,
        TheoryChoice::Relative => Theory::Relative,
        TheoryChoice::Local => Theory::Local,
        other => {
            return Err(CliError::config(format!(
                "invariant extraction supports absolute, root-stack, relative, and local \
                 theories; got {}",
                other.render()
            )))
        }
    })
}

pub fn invariants_table(title: String, records: &[InvariantRecord]) -> Table {
    let rows = records
        .iter()
        .map(|rec| {
            vec![
                format!("{:?}", rec.d.coords),
                rec.insertion.render(),
                rec.insertion_class.render(),
                format!("{}", rec.psi_power),
                format_rational(&rec.value),
                rec.render(),
            ]
        })
        .collect();
    Table {
        title,
        columns: ["d", "insertion", "class", "psi", "value", "invariant"]
            .map(String::from)
            .to_vec(),
        rows,
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn equality_check(name: String, got: &GradedSeries, expected: &GradedSeries) -> CheckVerdict {
    if got.coefficients_equal(expected) {
        CheckVerdict::pass(name)
    } else {
        let witness = got
            .first_difference(expected)
            .map(|(idx, e)| {
                format!("first difference at d={:?} k={:?} logs={:?} z^{e}", idx.d.coords, idx.k, idx.logs)
            })
            .unwrap_or_else(|| "series differ".into());
        CheckVerdict::fail(name, witness)
    }
}

/// The full property suite. Checks that do not apply to the configured
/// geometry are reported as skips; failures carry first-failure witnesses.
pub fn verify(
    cfg: &GeometryConfig,
    r_list: &[u64],
    order: u64,
) -> Result<(Vec<Table>, Vec<CheckVerdict>), CliError> {
    // Both sides of the correspondence are exercised, so S must be a set of
    // positive contact orders that stays in range for every listed root index.
    for &a in &cfg.s {
        if a <= 0 {
            return Err(CliError::config(format!(
                "s: extension datum {a} must be a positive contact order"
            )));
        }
        for &r in r_list {
            if a as u64 >= r {
                return Err(CliError::config(format!(
                    "s: extension datum {a} outside {{0,…,{}}} for listed root index r = {r}",
                    r - 1
                )));
            }
        }
    }

    let mut tables = Vec::new();
    let mut checks = Vec::new();

    // 1. Root-stack/relative correspondence (series and invariants), per r.
    // An r below the stabilization threshold is a config refusal, not a
    // property failure.
    let rows = correspondence_table(cfg, r_list, order)?;
    {
        let mut trows = Vec::new();
        for row in &rows {
            let name = format!("correspondence r={}", row.r);
            if row.series_agree && row.invariants_agree {
                checks.push(CheckVerdict::pass(name));
            } else {
                let witness = row
                    .first_series_difference
                    .clone()
                    .unwrap_or_else(|| "invariant tables differ".into());
                checks.push(CheckVerdict::fail(name, witness));
            }
            for (root_rec, rel_rec) in row.records_root.iter().zip(&row.records_relative) {
                trows.push(vec![
                    format!("{}", row.r),
                    format!("{:?}", root_rec.d.coords),
                    format_rational(&root_rec.value),
                    format_rational(&rel_rec.value),
                ]);
            }
        }
        tables.push(Table {
            title: "root-stack vs relative maximal-tangency invariants".into(),
            columns: ["r", "d", "root-stack", "relative"].map(String::from).to_vec(),
            rows: trows,
        });
    }

    // 2. Extended correspondence on the S-extended pair, per r.
    if !cfg.s.is_empty() {
        let relative_ext = i_relative_extended(cfg)?;
        for &r in r_list {
            let name = format!("extended-correspondence r={r}");
            let cfg_r = GeometryConfig { r, ..cfg.clone() };
            match i_root_stack_extended(&cfg_r)
                .and_then(|s| rootmirror_core::mirror::root_transfer(&s, &cfg_r))
            {
                Ok(transferred) => checks.push(equality_check(name, &transferred, &relative_ext)),
                Err(e) => checks.push(CheckVerdict::fail(name, e.to_string())),
            }
        }
    }

    // 3. Local sign relation: i_local_d = (−1)^{D·d}·D ∪ i_relative_d on the
    // log-free stratum, labels dropped.
    checks.push(local_sign_check(cfg));

    // 4. Toric cross-check (only when D is itself a toric divisor class).
    match i_toric_direct(cfg) {
        Ok(direct) => {
            let root = i_root_stack(cfg)?;
            checks.push(equality_check("toric-cross-check".into(), &direct, &root));
        }
        Err(CoreError::MissingData(msg)) => {
            checks.push(CheckVerdict::skip("toric-cross-check", msg));
        }
        Err(e) => checks.push(CheckVerdict::fail("toric-cross-check", e.to_string())),
    }

    // 5. Ambient restriction: the fiber series vanishes for n < D·d and
    // restricts to the root-stack series at n = D·d.
    checks.push(ambient_restriction_check(cfg));

    // 6. Gerbe λ-limit.
    checks.push(gerbe_limit_check(cfg));

    // 7. x = 0 reductions of the extended series.
    if !cfg.s.is_empty() {
        let cfg0 = GeometryConfig {
            s: vec![],
            bounds: Bounds { k_total_max: 0, ..cfg.bounds.clone() },
            ..cfg.clone()
        };
        // The root-stack side needs a root index with S in range; use the
        // largest listed one.
        let r_big = r_list.iter().copied().max().unwrap_or(cfg.r);
        let cfg_r = GeometryConfig { r: r_big, ..cfg.clone() };
        let cfg0_r = GeometryConfig { r: r_big, ..cfg0.clone() };
        match (i_root_stack_extended(&cfg_r), i_root_stack(&cfg0_r)) {
            (Ok(ext), Ok(plain)) => {
                checks.push(x_zero_check("x0-reduction-root-stack".into(), &ext, &plain))
            }
            (Err(e), _) | (_, Err(e)) => {
                checks.push(CheckVerdict::fail("x0-reduction-root-stack", e.to_string()))
            }
        }
        match (i_relative_extended(cfg), i_relative(&cfg0)) {
            (Ok(ext), Ok(plain)) => {
                checks.push(x_zero_check("x0-reduction-relative".into(), &ext, &plain))
            }
            (Err(e), _) | (_, Err(e)) => {
                checks.push(CheckVerdict::fail("x0-reduction-relative", e.to_string()))
            }
        }
    }

    // 8. Flat parameter + mirror round-trip on the relative pipeline.
    match run_pipeline(cfg, Theory::Relative, order, 0) {
        Ok((j, _)) => {
            checks.push(CheckVerdict::pass("flat-parameter"));
            let mut defect = None;
            for d in enumerate_curve_classes(&cfg.bounds.d_max) {
                let def = j.plan.round_trip_defect(&d, &[]);
                if !def.is_zero() {
                    defect = Some(format!("round-trip defect at d={:?}", d.coords));
                    break;
                }
            }
            checks.push(match defect {
                None => CheckVerdict::pass("mirror-round-trip"),
                Some(w) => CheckVerdict::fail("mirror-round-trip", w),
            });
        }
        Err(e) => {
            checks.push(CheckVerdict::fail("flat-parameter", e.to_string()));
            checks.push(CheckVerdict::skip("mirror-round-trip", "pipeline failed"));
        }
    }

    // 9. Pairing symmetry and block structure on both state spaces.
    let r_pair = r_list.iter().copied().max().unwrap_or(cfg.r).max(2);
    checks.push(pairing_check(cfg, r_pair));

    Ok((tables, checks))
}

fn local_sign_check(cfg: &GeometryConfig) -> CheckVerdict {
    let name = "local-sign-relation";
    let (local, relative) = match (i_local(cfg), i_relative(cfg)) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => return CheckVerdict::fail(name, e.to_string()),
    };
    let num_logs = local.num_logs();
    for d in enumerate_curve_classes(&cfg.bounds.d_max) {
        if d.is_zero() {
            continue; // no local factors at degree zero; the relation starts at D·d > 0
        }
        let dd = match cfg.dd(&d) {
            Ok(v) => v,
            Err(e) => return CheckVerdict::fail(name, e.to_string()),
        };
        let sign = if dd % 2 == 0 { rat_int(1) } else { rat_int(-1) };
        let idx = SeriesIndex { d: d.clone(), k: vec![], logs: vec![0; num_logs] };
        let loc = local.block_or_zero(&idx);
        let rel = relative.block_or_zero(&idx);
        let transported = match rel
            .map_sectors(|_, c| Ok((SectorLabel::contact(0), c.clone())))
            .map(|b| b.cup(&cfg.divisor).scale(&sign))
        {
            Ok(b) => b,
            Err(e) => return CheckVerdict::fail(name, e.to_string()),
        };
        for (e, v) in loc.iter().chain(transported.iter()) {
            let (a, b) = match (loc.coeff(*e), transported.coeff(*e)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue, // below one side's exactness window
            };
            if a != b {
                let _ = v;
                return CheckVerdict::fail(
                    name,
                    format!("d={:?} z^{e}: local and signed relative coefficients differ", d.coords),
                );
            }
        }
    }
    CheckVerdict::pass(name)
}

fn ambient_restriction_check(cfg: &GeometryConfig) -> CheckVerdict {
    let name = "ambient-restriction";
    let (ambient, root) = match (i_ambient_tilde(cfg), i_root_stack(cfg)) {
        (Ok(a), Ok(r)) => (a, r),
        (Err(CoreError::MissingData(msg)), _) => return CheckVerdict::skip(name, msg),
        (Err(e), _) | (_, Err(e)) => return CheckVerdict::fail(name, e.to_string()),
    };
    // Vanishing below the fiber degree n = D·d.
    for (idx, _) in ambient.entries() {
        let dd = match cfg.dd(&idx.d) {
            Ok(v) => v,
            Err(e) => return CheckVerdict::fail(name, e.to_string()),
        };
        if (idx.k[0] as i64) < dd {
            return CheckVerdict::fail(
                name,
                format!("nonzero coefficient at d={:?}, n={} < D·d={dd}", idx.d.coords, idx.k[0]),
            );
        }
    }
    // Restriction at n = D·d, every log stratum, L_q-free.
    for (ridx, rblock) in root.entries() {
        let dd = match cfg.dd(&ridx.d) {
            Ok(v) => v,
            Err(e) => return CheckVerdict::fail(name, e.to_string()),
        };
        let mut logs = ridx.logs.clone();
        logs.push(0);
        let aidx = SeriesIndex { d: ridx.d.clone(), k: vec![dd as u64], logs };
        let ablock = ambient.block_or_zero(&aidx);
        for (e, v) in rblock.iter() {
            match ablock.coeff(*e) {
                Ok(a) if &a == v => {}
                Ok(_) => {
                    return CheckVerdict::fail(
                        name,
                        format!(
                            "d={:?} logs={:?} z^{e}: ambient n=D·d and root-stack differ",
                            ridx.d.coords, ridx.logs
                        ),
                    )
                }
                Err(_) => continue,
            }
        }
        for (e, v) in ablock.iter() {
            match rblock.coeff(*e) {
                Ok(a) if &a == v => {}
                Ok(_) => {
                    return CheckVerdict::fail(
                        name,
                        format!(
                            "d={:?} logs={:?} z^{e}: ambient n=D·d and root-stack differ",
                            ridx.d.coords, ridx.logs
                        ),
                    )
                }
                Err(_) => continue,
            }
        }
    }
    CheckVerdict::pass(name)
}

fn gerbe_limit_check(cfg: &GeometryConfig) -> CheckVerdict {
    let name = "gerbe-lambda-limit";
    let mut c = cfg.clone();
    c.lambda_mode = LambdaMode::Formal;
    let (tw, _) = match i_gerbe_twisted(&c) {
        Ok(v) => v,
        Err(CoreError::MissingData(msg)) => return CheckVerdict::skip(name, msg),
        Err(e) => return CheckVerdict::fail(name, e.to_string()),
    };
    let at_zero = match specialize_lambda_zero(&tw, &cfg.ring, cfg.lambda_order as usize) {
        Ok(v) => v,
        Err(e) => return CheckVerdict::fail(name, e.to_string()),
    };
    match i_root_stack(cfg) {
        Ok(root) => equality_check(name.into(), &at_zero, &root),
        Err(e) => CheckVerdict::fail(name, e.to_string()),
    }
}

/// Compare the k = 0 slice of an extended series with the unextended one.
fn x_zero_check(name: String, ext: &GradedSeries, plain: &GradedSeries) -> CheckVerdict {
    let m = ext.num_ext();
    for (idx, block) in plain.entries() {
        let eidx = SeriesIndex { d: idx.d.clone(), k: vec![0; m], logs: idx.logs.clone() };
        let eblock = ext.block_or_zero(&eidx);
        for (e, v) in block.iter().chain(eblock.iter()) {
            let (a, b) = match (block.coeff(*e), eblock.coeff(*e)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            if a != b {
                let _ = v;
                return CheckVerdict::fail(
                    name,
                    format!("d={:?} logs={:?} z^{e}: x=0 slice differs", idx.d.coords, idx.logs),
                );
            }
        }
    }
    CheckVerdict::pass(name)
}

fn pairing_check(cfg: &GeometryConfig, r: u64) -> CheckVerdict {
    let name = "pairing-symmetry-and-blocks";
    let ring = &cfg.ring;
    let contact_range = max_divisor_degree(cfg).unwrap_or(1).max(1);

    // Relative state space: contacts −C..C, full ambient basis.
    let ctx_rel = match SectorPairingContext::new(ring.clone(), cfg.divisor.clone(), RootIndex::Relative)
    {
        Ok(c) => c,
        Err(e) => return CheckVerdict::fail(name, e.to_string()),
    };
    let rel_labels: Vec<SectorLabel> =
        (-contact_range..=contact_range).map(SectorLabel::contact).collect();
    if let Some(w) = pairing_suite(ring, &rel_labels, &ctx_rel, pair_relative, |a, b| match (a, b)
    {
        (SectorLabel::Contact(i), SectorLabel::Contact(j)) => i + j == 0,
        _ => false,
    }) {
        return CheckVerdict::fail(name, format!("relative pairing: {w}"));
    }

    // Root-stack state space: ages j/r, full ambient basis.
    let ctx_root =
        match SectorPairingContext::new(ring.clone(), cfg.divisor.clone(), RootIndex::Root(r)) {
            Ok(c) => c,
            Err(e) => return CheckVerdict::fail(name, e.to_string()),
        };
    let root_labels: Vec<SectorLabel> =
        (0..r).map(|j| SectorLabel::age(rat(j as i64, r as i64))).collect();
    if let Some(w) = pairing_suite(ring, &root_labels, &ctx_root, pair_root_stack, |a, b| {
        match (a, b) {
            (SectorLabel::Age(f), SectorLabel::Age(g)) => (f + g).is_integer(),
            _ => false,
        }
    }) {
        return CheckVerdict::fail(name, format!("root-stack pairing: {w}"));
    }
    CheckVerdict::pass(name)
}

/// Symmetry and block-structure on a full basis; returns a witness on failure.
fn pairing_suite(
    ring: &std::sync::Arc<rootmirror_core::BaseRing>,
    labels: &[SectorLabel],
    ctx: &SectorPairingContext,
    pair: impl Fn(
        &rootmirror_core::StateVector,
        &rootmirror_core::StateVector,
        &SectorPairingContext,
    ) -> rootmirror_core::Result<Rational>,
    dual: impl Fn(&SectorLabel, &SectorLabel) -> bool,
) -> Option<String> {
    use rootmirror_core::StateVector;
    for la in labels {
        for lb in labels {
            for i in 0..ring.dim() {
                for j in 0..ring.dim() {
                    let u = StateVector::from_term(la.clone(), ring.basis_element(i));
                    let v = StateVector::from_term(lb.clone(), ring.basis_element(j));
                    let uv = match pair(&u, &v, ctx) {
                        Ok(x) => x,
                        Err(e) => return Some(e.to_string()),
                    };
                    let vu = match pair(&v, &u, ctx) {
                        Ok(x) => x,
                        Err(e) => return Some(e.to_string()),
                    };
                    if uv != vu {
                        return Some(format!(
                            "asymmetric at ({}, basis {i}) vs ({}, basis {j})",
                            la.render(),
                            lb.render()
                        ));
                    }
                    if !dual(la, lb) && !uv.is_zero() {
                        return Some(format!(
                            "off-block value at ({}, basis {i}) vs ({}, basis {j})",
                            la.render(),
                            lb.render()
                        ));
                    }
                }
            }
        }
    }
    None
}

/// Default extraction depth: enough for ψ^{3d−2}-style descendants, capped by
/// the exactness window.
pub fn default_psi_max(cfg: &GeometryConfig) -> u32 {
    let max_dd = enumerate_curve_classes(&cfg.bounds.d_max)
        .iter()
        .filter_map(|d| cfg.dd(d).ok())
        .max()
        .unwrap_or(0)
        .max(0) as u32;
    let window = (-cfg.bounds.z_min - 2).max(0) as u32;
    (max_dd + 2).min(window)
}

/// Default inversion order: the total Novikov + extension order in bounds.
pub fn default_order(cfg: &GeometryConfig) -> u64 {
    cfg.bounds.d_max.iter().sum::<u64>() + cfg.bounds.k_total_max
}

/// Default r-list for verify: two values just above the stabilization
/// threshold `D·d_max + Σ|a_i|·k_total_max`.
pub fn default_r_list(cfg: &GeometryConfig) -> Result<Vec<u64>, CliError> {
    let max_dd = max_divisor_degree(cfg)?;
    let s_bound: i64 = cfg.s.iter().map(|a| a.abs()).sum::<i64>() * cfg.bounds.k_total_max as i64;
    let threshold = (max_dd + s_bound).max(0) as u64;
    Ok(vec![threshold + 1, threshold + 2])
}
