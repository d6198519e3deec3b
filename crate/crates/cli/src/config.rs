//! Configuration ingestion: JSON schema, builtin aliases, overrides, and
//! conversion into a validated [`GeometryConfig`].

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use rootmirror_core::exactalg::{parse_rational, BaseRing, CurveClass, RingElement};
use rootmirror_core::ifactory::{BaseJProvider, GeometryConfig, LambdaMode};
use rootmirror_core::zseries::Bounds;

use crate::CliError;

/// On-disk configuration. All rationals are "p/q" strings; all keys are
/// kebab-case.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub base: BaseSpec,
    /// Coefficient vector of the divisor class D over the ring basis.
    pub divisor: Vec<String>,
    #[serde(default = "default_r")]
    pub r: u64,
    /// Extension integers a_1..a_m of the S-extended theories.
    #[serde(default)]
    pub s: Vec<i64>,
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub flags: FlagsSpec,
}

fn default_r() -> u64 {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseSpec {
    /// ℙⁿ with its hypergeometric kernel.
    ProjectiveSpace { n: u32 },
    /// ℙⁿ cohomology with an explicit list of toric divisor classes, each a
    /// coefficient vector over the basis.
    Toric { n: u32, factors: Vec<Vec<String>> },
    /// ℙⁿ cohomology with an externally tabulated base J-function:
    /// degree (comma-joined coordinates) → z-exponent → coefficient vector.
    ExternalTable { n: u32, table: BTreeMap<String, BTreeMap<String, Vec<String>>> },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BoundsSpec {
    pub d_max: Vec<u64>,
    #[serde(default)]
    pub k_total_max: u64,
    #[serde(default = "default_z_min")]
    pub z_min: i64,
}

fn default_z_min() -> i64 {
    -40
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FlagsSpec {
    /// "off" (default) or "formal".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_slack: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_nef: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_anticanonical_nef: Option<bool>,
}

/// Command-line overrides applied on top of the file/alias values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub r: Option<u64>,
    pub dmax: Option<u64>,
    pub kmax: Option<u64>,
}

/// Builtin alias: (ℙ², D = 3H), the plane with a smooth cubic curve.
pub fn alias_p2_cubic() -> ConfigFile {
    ConfigFile {
        base: BaseSpec::ProjectiveSpace { n: 2 },
        divisor: vec!["0".into(), "3".into(), "0".into()],
        r: 1,
        s: vec![],
        bounds: BoundsSpec { d_max: vec![3], k_total_max: 0, z_min: -40 },
        flags: FlagsSpec::default(),
    }
}

/// Builtin alias: (ℙ³, D = 3H), projective space with a cubic surface.
pub fn alias_p3_cubic_surface() -> ConfigFile {
    ConfigFile {
        base: BaseSpec::ProjectiveSpace { n: 3 },
        divisor: vec!["0".into(), "3".into(), "0".into(), "0".into()],
        r: 1,
        s: vec![],
        bounds: BoundsSpec { d_max: vec![2], k_total_max: 0, z_min: -40 },
        flags: FlagsSpec::default(),
    }
}

/// Resolve a `<config|alias>` argument: an existing file path wins, then the
/// builtin alias table.
pub fn resolve(arg: &str) -> Result<ConfigFile, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {arg}: {e}")))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{arg}: schema violation: {e}")));
    }
    match arg {
        "p2-cubic" => Ok(alias_p2_cubic()),
        "p3-cubic-surface" => Ok(alias_p3_cubic_surface()),
        _ => Err(CliError::config(format!(
            "'{arg}' is neither an existing config file nor a builtin alias \
             (known aliases: p2-cubic, p3-cubic-surface)"
        ))),
    }
}

/// The effective configuration after overrides, used for digests and reports.
pub fn apply_overrides(cf: &ConfigFile, ov: &Overrides) -> ConfigFile {
    let mut out = cf.clone();
    if let Some(r) = ov.r {
        out.r = r;
    }
    if let Some(dm) = ov.dmax {
        out.bounds.d_max = vec![dm; out.bounds.d_max.len()];
    }
    if let Some(km) = ov.kmax {
        out.bounds.k_total_max = km;
    }
    out
}

fn parse_class(
    ring: &Arc<BaseRing>,
    coeffs: &[String],
    field: &str,
) -> Result<RingElement, CliError> {
    if coeffs.len() != ring.dim() {
        return Err(CliError::config(format!(
            "{field}: expected {} coefficients over the ring basis, got {}",
            ring.dim(),
            coeffs.len()
        )));
    }
    let parsed = coeffs
        .iter()
        .map(|s| parse_rational(s).map_err(|e| CliError::config(format!("{field}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    ring.element(parsed).map_err(|e| CliError::config(format!("{field}: {e}")))
}

fn parse_curve_key(key: &str, num_gens: usize) -> Result<CurveClass, CliError> {
    let coords = key
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| CliError::config(format!("degree key '{key}': {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != num_gens {
        return Err(CliError::config(format!(
            "degree key '{key}': expected {num_gens} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(CurveClass::new(coords))
}

/// Build the validated geometry from an effective (override-applied) config.
pub fn to_geometry(cf: &ConfigFile) -> Result<GeometryConfig, CliError> {
    let (ring, provider) = match &cf.base {
        BaseSpec::ProjectiveSpace { n } => {
            let ring = BaseRing::projective_space(*n)
                .map_err(|e| CliError::config(format!("base: {e}")))?;
            (ring, BaseJProvider::ProjectiveSpace { n: *n })
        }
        BaseSpec::Toric { n, factors } => {
            let ring = BaseRing::projective_space(*n)
                .map_err(|e| CliError::config(format!("base: {e}")))?;
            let divisors = factors
                .iter()
                .enumerate()
                .map(|(i, f)| parse_class(&ring, f, &format!("base.factors[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            (ring, BaseJProvider::Toric { divisors })
        }
        BaseSpec::ExternalTable { n, table } => {
            let ring = BaseRing::projective_space(*n)
                .map_err(|e| CliError::config(format!("base: {e}")))?;
            let num_gens = ring.num_curve_generators();
            let mut out = BTreeMap::new();
            for (dk, row) in table {
                let d = parse_curve_key(dk, num_gens)?;
                let mut laurent = BTreeMap::new();
                for (ek, coeffs) in row {
                    let e: i64 = ek.trim().parse().map_err(|err| {
                        CliError::config(format!("base.table[{dk}]: z-exponent '{ek}': {err}"))
                    })?;
                    laurent
                        .insert(e, parse_class(&ring, coeffs, &format!("base.table[{dk}][{ek}]"))?);
                }
                out.insert(d, laurent);
            }
            (ring, BaseJProvider::ExternalTable { table: out })
        }
    };
    let divisor = parse_class(&ring, &cf.divisor, "divisor")?;
    let bounds = Bounds {
        d_max: cf.bounds.d_max.clone(),
        k_total_max: cf.bounds.k_total_max,
        z_min: cf.bounds.z_min,
    };
    let mut cfg = GeometryConfig::new(ring, divisor, cf.r, cf.s.clone(), bounds, provider)
        .map_err(|e| CliError::config(e.to_string()))?;
    if let Some(mode) = &cf.flags.lambda_mode {
        cfg.lambda_mode = match mode.as_str() {
            "off" => LambdaMode::Off,
            "formal" => LambdaMode::Formal,
            other => {
                return Err(CliError::config(format!(
                    "flags.lambda-mode: expected \"off\" or \"formal\", got \"{other}\""
                )))
            }
        };
    }
    if let Some(o) = cf.flags.lambda_order {
        if o == 0 {
            return Err(CliError::config("flags.lambda-order must be positive".into()));
        }
        cfg.lambda_order = o;
    }
    if let Some(s) = cf.flags.ambient_slack {
        cfg.ambient_slack = s;
    }
    if let Some(b) = cf.flags.d_nef {
        cfg.d_nef_asserted = b;
    }
    if let Some(b) = cf.flags.log_anticanonical_nef {
        cfg.log_anticanonical_nef_asserted = b;
    }
    Ok(cfg)
}

/// FNV-1a 64-bit digest of the canonical JSON serialization of the effective
/// config; stable across runs and platforms.
pub fn digest(cf: &ConfigFile) -> String {
    let json = serde_json::to_string(cf).expect("config serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in json.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}
