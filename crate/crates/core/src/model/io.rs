//! TOML system files.
//!
//! ```toml
//! format_version = 1
//! atoms = [ { id = 0, label = "C1", q = -0.18, sigma = 3.5, epsilon = 0.276 } ]
//! coords = [ [0.0, 0.0, 0.0] ]
//! bonds = [ { i = 0, j = 1, K = 1121.3, r0 = 1.529 } ]
//! angles = [ { i = 0, j = 1, k = 2, Ktheta = 488.3, theta0_deg = 112.7 } ]
//! dihedrals = [ { i = 0, j = 1, k = 2, l = 3, V1 = 5.4, V2 = -0.2, V3 = 0.8, V4 = 0.0 } ]
//!
//! [nonbonded]
//! mode = "auto"        # auto | explicit | none
//! s14 = 0.5
//! cutoff = "none"      # or a radius in Å
//! excluded = [[0, 1]]  # explicit mode only
//! scaled14 = [[0, 3]]  # explicit mode only
//! ```
//!
//! Term indices are 0-based positions in `atoms`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Deserialize;

use super::{
    build_default_exclusions, canonical, AngleTerm, AtomSpec, BondTerm, DihedralTerm,
    ExclusionMode, MolecularSystem, NonbondedPolicy, ValidationError, Vec3,
};

pub const FORMAT_VERSION: i64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(i64),
    #[error("validation error: {0}")]
    Validation(#[from] ValidationError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSystem {
    format_version: i64,
    #[serde(default)]
    atoms: Vec<FileAtom>,
    #[serde(default)]
    coords: Vec<[f64; 3]>,
    #[serde(default)]
    bonds: Vec<FileBond>,
    #[serde(default)]
    angles: Vec<FileAngle>,
    #[serde(default)]
    dihedrals: Vec<FileDihedral>,
    #[serde(default)]
    nonbonded: Option<FileNonbonded>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAtom {
    id: i64,
    #[serde(default)]
    label: String,
    q: f64,
    sigma: f64,
    epsilon: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileBond {
    i: usize,
    j: usize,
    #[serde(rename = "K")]
    k: f64,
    r0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAngle {
    i: usize,
    j: usize,
    k: usize,
    #[serde(rename = "Ktheta")]
    k_theta: f64,
    theta0_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDihedral {
    i: usize,
    j: usize,
    k: usize,
    l: usize,
    #[serde(rename = "V1")]
    v1: f64,
    #[serde(rename = "V2")]
    v2: f64,
    #[serde(rename = "V3")]
    v3: f64,
    #[serde(rename = "V4")]
    v4: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FileCutoff {
    Radius(f64),
    Keyword(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileNonbonded {
    #[serde(default = "default_mode")]
    mode: String,
    #[serde(default = "default_s14")]
    s14: f64,
    #[serde(default)]
    cutoff: Option<FileCutoff>,
    #[serde(default)]
    excluded: Vec<[usize; 2]>,
    #[serde(default)]
    scaled14: Vec<[usize; 2]>,
}

fn default_mode() -> String {
    "auto".into()
}

fn default_s14() -> f64 {
    NonbondedPolicy::DEFAULT_S14
}

/// Reads and validates a system file.
pub fn load_system(path: impl AsRef<Path>) -> Result<MolecularSystem, LoadError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_system(&text)
}

/// Parses and validates system file contents.
pub fn parse_system(text: &str) -> Result<MolecularSystem, LoadError> {
    let file: FileSystem = toml::from_str(text).map_err(|e| LoadError::Parse(e.to_string()))?;
    if file.format_version != FORMAT_VERSION {
        return Err(LoadError::Version(file.format_version));
    }

    let atoms = file
        .atoms
        .into_iter()
        .map(|a| AtomSpec {
            id: a.id,
            label: a.label,
            charge: a.q,
            sigma: a.sigma,
            epsilon: a.epsilon,
        })
        .collect();
    let mut system = MolecularSystem {
        atoms,
        coords: file.coords.into_iter().map(Vec3::from).collect(),
        bonds: file
            .bonds
            .into_iter()
            .map(|b| BondTerm {
                atoms: [b.i, b.j],
                k: b.k,
                r0: b.r0,
            })
            .collect(),
        angles: file
            .angles
            .into_iter()
            .map(|a| AngleTerm {
                atoms: [a.i, a.j, a.k],
                k_theta: a.k_theta,
                theta0: a.theta0_deg.to_radians(),
            })
            .collect(),
        dihedrals: file
            .dihedrals
            .into_iter()
            .map(|d| DihedralTerm {
                atoms: [d.i, d.j, d.k, d.l],
                v: [d.v1, d.v2, d.v3, d.v4],
            })
            .collect(),
        nonbonded: NonbondedPolicy::no_exclusions(),
    };

    let nb = file.nonbonded.unwrap_or(FileNonbonded {
        mode: default_mode(),
        s14: default_s14(),
        cutoff: None,
        excluded: Vec::new(),
        scaled14: Vec::new(),
    });
    let cutoff = match nb.cutoff {
        None => None,
        Some(FileCutoff::Radius(r)) => Some(r),
        Some(FileCutoff::Keyword(k)) if k == "none" => None,
        Some(FileCutoff::Keyword(k)) => {
            return Err(LoadError::Parse(format!(
                "nonbonded.cutoff: expected a radius or \"none\", got {k:?}"
            )))
        }
    };
    let mode = match nb.mode.as_str() {
        "auto" => ExclusionMode::Auto,
        "explicit" => ExclusionMode::Explicit,
        "none" => ExclusionMode::None,
        other => {
            return Err(LoadError::Parse(format!(
                "nonbonded.mode: expected auto|explicit|none, got {other:?}"
            )))
        }
    };
    if mode != ExclusionMode::Explicit && (!nb.excluded.is_empty() || !nb.scaled14.is_empty()) {
        return Err(LoadError::Parse(
            "nonbonded.excluded/scaled14 are only allowed with mode = \"explicit\"".into(),
        ));
    }
    system.nonbonded = NonbondedPolicy {
        mode: ExclusionMode::None,
        excluded_pairs: BTreeSet::new(),
        scaled14_pairs: BTreeSet::new(),
        s14: nb.s14,
        cutoff,
    };

    // terms are validated before the bond graph is walked
    system.validate()?;

    match mode {
        ExclusionMode::None => {}
        ExclusionMode::Auto => system.nonbonded = build_default_exclusions(&system, nb.s14),
        ExclusionMode::Explicit => {
            let n = system.n_atoms();
            let pairs = |list: Vec<[usize; 2]>| -> Result<BTreeSet<_>, LoadError> {
                let mut set = BTreeSet::new();
                for [i, j] in list {
                    if i == j || i >= n || j >= n {
                        return Err(ValidationError::Policy(format!(
                            "pair ({i}, {j}): index out of range or self pair"
                        ))
                        .into());
                    }
                    set.insert(canonical(i, j));
                }
                Ok(set)
            };
            system.nonbonded.excluded_pairs = pairs(nb.excluded)?;
            system.nonbonded.scaled14_pairs = pairs(nb.scaled14)?;
            system.nonbonded.mode = ExclusionMode::Explicit;
        }
    }
    system.validate()?;
    Ok(system)
}

/// Writes `system` to `path`. Exclusions are always written explicitly so
/// the file reproduces the policy exactly.
pub fn save_system(system: &MolecularSystem, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, write_system(system))
}

/// Serializes a system to the TOML text format.
pub fn write_system(system: &MolecularSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    out.push('\n');

    out.push_str("atoms = [\n");
    for a in &system.atoms {
        let label = toml::Value::String(a.label.clone()).to_string();
        let _ = writeln!(
            out,
            "  {{ id = {}, label = {label}, q = {}, sigma = {}, epsilon = {} }},",
            a.id,
            num(a.charge),
            num(a.sigma),
            num(a.epsilon)
        );
    }
    out.push_str("]\n\n");

    out.push_str("coords = [\n");
    for c in &system.coords {
        let _ = writeln!(out, "  [{:.16e}, {:.16e}, {:.16e}],", c.x, c.y, c.z);
    }
    out.push_str("]\n\n");

    out.push_str("bonds = [\n");
    for b in &system.bonds {
        let _ = writeln!(
            out,
            "  {{ i = {}, j = {}, K = {}, r0 = {} }},",
            b.atoms[0],
            b.atoms[1],
            num(b.k),
            num(b.r0)
        );
    }
    out.push_str("]\n\n");

    out.push_str("angles = [\n");
    for a in &system.angles {
        let _ = writeln!(
            out,
            "  {{ i = {}, j = {}, k = {}, Ktheta = {}, theta0_deg = {} }},",
            a.atoms[0],
            a.atoms[1],
            a.atoms[2],
            num(a.k_theta),
            num(a.theta0.to_degrees())
        );
    }
    out.push_str("]\n\n");

    out.push_str("dihedrals = [\n");
    for d in &system.dihedrals {
        let _ = writeln!(
            out,
            "  {{ i = {}, j = {}, k = {}, l = {}, V1 = {}, V2 = {}, V3 = {}, V4 = {} }},",
            d.atoms[0],
            d.atoms[1],
            d.atoms[2],
            d.atoms[3],
            num(d.v[0]),
            num(d.v[1]),
            num(d.v[2]),
            num(d.v[3])
        );
    }
    out.push_str("]\n\n");

    let nb = &system.nonbonded;
    out.push_str("[nonbonded]\n");
    let mode = match nb.mode {
        ExclusionMode::None => "none",
        _ => "explicit",
    };
    let _ = writeln!(out, "mode = \"{mode}\"");
    let _ = writeln!(out, "s14 = {}", num(nb.s14));
    match nb.cutoff {
        Some(c) => {
            let _ = writeln!(out, "cutoff = {}", num(c));
        }
        None => out.push_str("cutoff = \"none\"\n"),
    }
    if nb.mode != ExclusionMode::None {
        let _ = writeln!(out, "excluded = {}", pair_list(&nb.excluded_pairs));
        let _ = writeln!(out, "scaled14 = {}", pair_list(&nb.scaled14_pairs));
    }
    out
}

/// Shortest representation that round-trips, always a TOML float.
fn num(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn pair_list(pairs: &BTreeSet<(usize, usize)>) -> String {
    let items: Vec<String> = pairs.iter().map(|(i, j)| format!("[{i}, {j}]")).collect();
    format!("[{}]", items.join(", "))
}
