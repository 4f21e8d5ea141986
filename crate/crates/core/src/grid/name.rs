//! Grid-name grammar and the registry of classic reduced Gaussian PL tables.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use super::spec::{GridSpec, GridType};
use crate::error::{invalid_spec, Error, Result};

/// Gaussian numbers for which classic reduced grids exist.
pub const CLASSIC_N: [usize; 23] = [
    16, 24, 32, 48, 64, 80, 96, 128, 160, 200, 256, 320, 400, 512, 576, 640, 800, 1024, 1280, 1600,
    2000, 4000, 8000,
];

fn tables() -> &'static RwLock<BTreeMap<usize, Vec<usize>>> {
    static TABLES: OnceLock<RwLock<BTreeMap<usize, Vec<usize>>>> = OnceLock::new();
    TABLES.get_or_init(Default::default)
}

/// Register the per-parallel point counts of the classic grid `N<n>`.
///
/// `pl` holds either all `2n` parallels or the `n` northern ones, which are
/// mirrored.
pub fn register_classic_pl(n: usize, pl: &[usize]) -> Result<()> {
    if n == 0 {
        return Err(invalid_spec("classic grid N must be positive"));
    }
    let full = if pl.len() == 2 * n {
        pl.to_vec()
    } else if pl.len() == n {
        pl.iter().chain(pl.iter().rev()).copied().collect()
    } else {
        return Err(invalid_spec(format!(
            "pl table for N{n} has {} entries, expected {n} or {}",
            pl.len(),
            2 * n
        )));
    };
    if full.contains(&0) {
        return Err(invalid_spec(format!("pl table for N{n} has a zero entry")));
    }
    tables().write().unwrap().insert(n, full);
    Ok(())
}

/// Load a JSON table file `{"<N>": [pl...], ...}` and register every entry.
pub fn load_classic_tables(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    let map: BTreeMap<String, Vec<usize>> =
        serde_json::from_str(&text).map_err(|e| invalid_spec(format!("pl table file: {e}")))?;
    for (key, pl) in &map {
        let n: usize = key
            .parse()
            .map_err(|_| invalid_spec(format!("pl table key `{key}` is not a Gaussian number")))?;
        register_classic_pl(n, pl)?;
    }
    Ok(map.len())
}

pub fn classic_pl(n: usize) -> Option<Vec<usize>> {
    tables().read().unwrap().get(&n).cloned()
}

fn parse_error(token: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        token: token.to_string(),
        message: message.into(),
    }
}

fn parse_number(token: &str) -> Result<usize> {
    if token.is_empty() || !token.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(token, "expected a positive base-10 integer"));
    }
    match token.parse::<usize>() {
        Ok(0) => Err(parse_error(token, "number must be positive")),
        Ok(v) => Ok(v),
        Err(_) => Err(parse_error(token, "number out of range")),
    }
}

/// Parse `F<N>`, `N<N>`, `O<N>`, `L<NLON>x<NLAT>`, `L<N>`, and the shifted
/// `S`, `SLON`, `SLAT` variants. Case-sensitive.
pub fn parse_grid_name(name: &str) -> Result<GridSpec> {
    const PREFIXES: [(&str, GridType); 7] = [
        ("SLON", GridType::ShiftedLon),
        ("SLAT", GridType::ShiftedLat),
        ("S", GridType::ShiftedLonlat),
        ("L", GridType::RegularLonlat),
        ("F", GridType::RegularGaussian),
        ("O", GridType::OctahedralGaussian),
        ("N", GridType::ClassicGaussian),
    ];
    let Some((prefix, kind)) = PREFIXES.iter().find(|(p, _)| name.starts_with(p)) else {
        let token: String = name.chars().take_while(|c| !c.is_ascii_digit()).collect();
        let token = if token.is_empty() { name } else { &token };
        return Err(parse_error(token, "unknown grid name prefix"));
    };
    let rest = &name[prefix.len()..];
    if kind.is_lonlat_family() {
        if let Some((lon, lat)) = rest.split_once('x') {
            return Ok(GridSpec::with_nx_ny(
                *kind,
                parse_number(lon)?,
                parse_number(lat)?,
            ));
        }
        return Ok(GridSpec::with_n(*kind, parse_number(rest)?));
    }
    let n = parse_number(rest)?;
    if *kind != GridType::ClassicGaussian {
        return Ok(GridSpec::with_n(*kind, n));
    }
    match classic_pl(n) {
        Some(pl) => Ok(GridSpec {
            pl: Some(pl),
            ..GridSpec::with_n(GridType::ClassicGaussian, n)
        }),
        None if CLASSIC_N.contains(&n) => Err(Error::UnsupportedGrid(format!(
            "{name}: no pl table registered for classic grid N{n}"
        ))),
        None => Err(Error::UnsupportedGrid(format!(
            "{name}: N{n} is not a classic reduced Gaussian grid (valid N: {CLASSIC_N:?})"
        ))),
    }
}
