//! The JSON workspace format and its validated in-memory form.
//!
//! Numbers are exact: integers, or rationals written as `"p/q"` strings.
//! Floats are rejected on load. Writing goes through [`to_canonical_json`],
//! which sorts keys, so a written workspace reloads byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use tatetrace_core::cgm::{CgmError, GroupDatum};
use tatetrace_core::diagram::{DiagramError, VertexSet};
use tatetrace_core::equiv::{EquivError, TitsTable};
use tatetrace_core::motive::{AtomCatalog, ExtensionLattice, FormalMotive, GenericPoint, LatticeNode, MotiveError, NodeId};
use tatetrace_core::qform::{
    add_quadric_motive, check_recipes, parse_rational, quadric_witt_table, NodeRecipe, QformError, QuadraticForm,
    Rational, WittIndexTable,
};
use tatetrace_core::{DynkinDiagram, LaurentPoly, StarAction};

pub const FORMAT_VERSION: &str = "tatetrace/1";

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("floating-point number at {0}: use an integer or a \"p/q\" string")]
    Float(String),
    #[error("unsupported version {0:?}, expected {FORMAT_VERSION:?}")]
    Version(String),
    #[error("{0}")]
    Invalid(String),
    #[error("the workspace has no lattice")]
    NoLattice,
    #[error("no {kind} named {name:?}")]
    Unknown { kind: &'static str, name: String },
    #[error("group {group:?}: {source}")]
    Group { group: String, source: CgmError },
    #[error("tits table {table:?}: {source}")]
    Tits { table: String, source: EquivError },
    #[error("witt table {table:?}: {source}")]
    Witt { table: String, source: QformError },
    #[error("form {form:?}: {source}")]
    Form { form: String, source: QformError },
    #[error("motive {motive:?}: {source}")]
    Motive { motive: String, source: MotiveError },
    #[error(transparent)]
    Lattice(#[from] MotiveError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Qform(#[from] QformError),
}

/// An exact rational; serialized as an integer when it is one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if *self.0.denom() == 1 {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_str(&format!("{}/{}", self.0.numer(), self.0.denom()))
        }
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => {
                n.as_i64().map(|v| Rat(Rational::from_integer(v))).ok_or_else(|| serde::de::Error::custom("not an integer"))
            }
            Value::String(s) => parse_rational(&s)
                .map(Rat)
                .ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))),
            _ => Err(serde::de::Error::custom("expected an integer or a \"p/q\" string")),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkspaceFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub atoms: BTreeMap<String, AtomSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub motives: BTreeMap<String, MotiveSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tits_tables: BTreeMap<String, TitsSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub witt_tables: BTreeMap<String, WittSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub forms: BTreeMap<String, Vec<Rat>>,
    /// Nodes over which a group is split by a prime-to-p extension.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub split_tables: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub diagram: String,
    /// Generators of the `*`-action as label maps.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub star: Vec<BTreeMap<u32, u32>>,
    pub distinguished: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub prime: u32,
    pub base: String,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    #[serde(default)]
    pub p_special: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_closure: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub generic_point_of: Vec<GenericSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenericSpec {
    pub atom: String,
    pub over: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecipeSpec {
    /// `Q(√d₁, …)`.
    Adjoin(Vec<Rat>),
    Asserted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub rank: u64,
    /// Derived from the traces; checked against them when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isotropic_at: Option<BTreeSet<String>>,
    /// Node ↦ (twist ↦ multiplicity). Missing nodes have trace zero.
    #[serde(default)]
    pub traces: BTreeMap<String, BTreeMap<i32, u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotiveSpec {
    /// `[[atom, twist], …]`.
    Sum(Vec<(String, i32)>),
    /// The motive of the quadric with the named Witt table.
    Quadric { quadric: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TitsSpec {
    pub group: String,
    pub distinguished: BTreeMap<String, Vec<u32>>,
}

/// Either explicit values at every node, or a form whose values are computed
/// from the node recipes; `values` then supplies the asserted nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WittSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<u32>,
    #[serde(default)]
    pub values: BTreeMap<String, u32>,
}

fn reject_floats(v: &Value, path: &mut String) -> Result<(), WorkspaceError> {
    match v {
        Value::Number(n) if n.is_f64() => Err(WorkspaceError::Float(if path.is_empty() { "$".into() } else { path.clone() })),
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                let len = path.len();
                path.push_str(&format!("[{i}]"));
                reject_floats(item, path)?;
                path.truncate(len);
            }
            Ok(())
        }
        Value::Object(map) => {
            for (k, item) in map {
                let len = path.len();
                path.push('.');
                path.push_str(k);
                reject_floats(item, path)?;
                path.truncate(len);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

impl WorkspaceFile {
    pub fn parse(text: &str) -> Result<Self, WorkspaceError> {
        let value: Value = serde_json::from_str(text)?;
        reject_floats(&value, &mut String::new())?;
        let file: WorkspaceFile = serde_json::from_value(value)?;
        if file.version != FORMAT_VERSION {
            return Err(WorkspaceError::Version(file.version));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self, WorkspaceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| WorkspaceError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }
}

/// Sorted keys, two-space indentation, trailing newline.
pub fn to_canonical_json(file: &WorkspaceFile) -> String {
    let value = serde_json::to_value(file).expect("workspace values serialize");
    let mut out = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    out.push('\n');
    out
}

pub fn parse_labels(text: &str) -> Result<VertexSet, WorkspaceError> {
    let inner = text.trim().trim_start_matches('{').trim_end_matches('}');
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| WorkspaceError::Invalid(format!("bad vertex label {s:?}"))))
        .collect()
}

pub fn star_action(diagram: &str, generators: &[BTreeMap<u32, u32>]) -> Result<StarAction, WorkspaceError> {
    let d = DynkinDiagram::parse(diagram)?;
    Ok(StarAction::from_label_maps(d, generators)?)
}

/// A workspace with every cross-reference resolved and validated.
#[derive(Debug)]
pub struct Workspace {
    pub file: WorkspaceFile,
    pub groups: BTreeMap<String, GroupDatum>,
    pub lattice: Option<ExtensionLattice>,
    pub recipes: BTreeMap<NodeId, NodeRecipe>,
    pub forms: BTreeMap<String, QuadraticForm>,
    pub witt: BTreeMap<String, WittIndexTable>,
    pub catalog: Option<AtomCatalog>,
    pub motives: BTreeMap<String, FormalMotive>,
    pub tits: BTreeMap<String, TitsTable>,
    pub split_tables: BTreeMap<String, Vec<bool>>,
}

fn node_id(lattice: &ExtensionLattice, name: &str) -> Result<NodeId, WorkspaceError> {
    Ok(lattice.node_by_name(name)?)
}

fn build_lattice(spec: &LatticeSpec) -> Result<(ExtensionLattice, BTreeMap<NodeId, NodeRecipe>), WorkspaceError> {
    let index: BTreeMap<&str, NodeId> = spec.nodes.iter().enumerate().map(|(i, n)| (n.name.as_str(), i)).collect();
    if index.len() != spec.nodes.len() {
        let mut seen = BTreeSet::new();
        let dup = spec.nodes.iter().find(|n| !seen.insert(&n.name)).expect("duplicate exists");
        return Err(MotiveError::DuplicateNode(dup.name.clone()).into());
    }
    let lookup = |name: &str| index.get(name).copied().ok_or_else(|| MotiveError::UnknownNode(name.to_string()));
    let mut nodes = Vec::new();
    let mut recipes = BTreeMap::new();
    for (i, n) in spec.nodes.iter().enumerate() {
        let mut node = LatticeNode::new(n.name.clone());
        node.p_special = n.p_special;
        node.p_closure = n.p_closure.as_deref().map(lookup).transpose()?;
        for g in &n.generic_point_of {
            node.generic_points.push(GenericPoint { atom: g.atom.clone(), over: lookup(&g.over)? });
        }
        match &n.recipe {
            Some(RecipeSpec::Adjoin(ds)) => {
                recipes.insert(i, NodeRecipe::Adjoin(ds.iter().map(|d| d.0).collect()));
            }
            Some(RecipeSpec::Asserted) => {
                recipes.insert(i, NodeRecipe::Asserted);
            }
            None => {}
        }
        nodes.push(node);
    }
    let edges = spec.edges.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect::<Result<Vec<_>, MotiveError>>()?;
    let lattice = ExtensionLattice::new(spec.prime, nodes, edges, lookup(&spec.base)?)?;
    check_recipes(&lattice, &recipes)?;
    Ok((lattice, recipes))
}

/// One value per node from a name-keyed map; every node must appear.
fn per_node<T: Clone>(
    lattice: &ExtensionLattice,
    map: &BTreeMap<String, T>,
    what: &str,
) -> Result<Vec<T>, WorkspaceError> {
    for name in map.keys() {
        node_id(lattice, name)?;
    }
    lattice
        .node_ids()
        .map(|e| {
            map.get(lattice.name(e))
                .cloned()
                .ok_or_else(|| WorkspaceError::Invalid(format!("{what} has no entry for node {:?}", lattice.name(e))))
        })
        .collect()
}

impl Workspace {
    pub fn load(path: &Path) -> Result<Self, WorkspaceError> {
        Self::from_file(WorkspaceFile::read(path)?)
    }

    pub fn from_file(file: WorkspaceFile) -> Result<Self, WorkspaceError> {
        let mut groups = BTreeMap::new();
        for (name, g) in &file.groups {
            let wrap = |source: CgmError| WorkspaceError::Group { group: name.clone(), source };
            let star = star_action(&g.diagram, &g.star)?;
            let datum = GroupDatum::new(star, g.distinguished.iter().copied().collect()).map_err(wrap)?;
            groups.insert(name.clone(), datum);
        }

        let (lattice, recipes) = match &file.lattice {
            Some(spec) => {
                let (l, r) = build_lattice(spec)?;
                (Some(l), r)
            }
            None => (None, BTreeMap::new()),
        };
        let need_lattice = || lattice.as_ref().ok_or(WorkspaceError::NoLattice);

        let mut forms = BTreeMap::new();
        for (name, coeffs) in &file.forms {
            let q = QuadraticForm::new(coeffs.iter().map(|c| c.0).collect())
                .map_err(|source| WorkspaceError::Form { form: name.clone(), source })?;
            forms.insert(name.clone(), q);
        }

        let mut witt = BTreeMap::new();
        for (name, spec) in &file.witt_tables {
            let lat = need_lattice()?;
            let wrap = |source: QformError| WorkspaceError::Witt { table: name.clone(), source };
            for node in spec.values.keys() {
                node_id(lat, node)?;
            }
            let table = match &spec.form {
                Some(form) => {
                    let q = forms.get(form).ok_or_else(|| WorkspaceError::Unknown { kind: "form", name: form.clone() })?;
                    if spec.dim.is_some_and(|d| d != q.dim()) {
                        return Err(WorkspaceError::Invalid(format!("witt table {name:?}: dim differs from form {form:?}")));
                    }
                    let asserted: BTreeMap<NodeId, u32> =
                        spec.values.iter().map(|(n, &v)| Ok((node_id(lat, n)?, v))).collect::<Result<_, WorkspaceError>>()?;
                    let table = quadric_witt_table(q, lat, &recipes, &asserted).map_err(wrap)?;
                    for (&e, &v) in &asserted {
                        if table.get(e) != v {
                            return Err(WorkspaceError::Invalid(format!(
                                "witt table {name:?}: value {v} at node {:?} contradicts the computed index {}",
                                lat.name(e),
                                table.get(e)
                            )));
                        }
                    }
                    table
                }
                None => {
                    let dim = spec
                        .dim
                        .ok_or_else(|| WorkspaceError::Invalid(format!("witt table {name:?} needs a dim or a form")))?;
                    let values = per_node(lat, &spec.values, &format!("witt table {name:?}"))?;
                    WittIndexTable::new(lat, dim, values).map_err(wrap)?
                }
            };
            witt.insert(name.clone(), table);
        }

        let mut catalog = None;
        let mut motives = BTreeMap::new();
        if !file.atoms.is_empty() || !file.motives.is_empty() {
            let lat = need_lattice()?;
            let mut c = AtomCatalog::new(lat.clone());
            for (name, atom) in &file.atoms {
                let mut traces = BTreeMap::new();
                for (node, poly) in &atom.traces {
                    let p: LaurentPoly = poly.iter().map(|(&e, &k)| (e, k)).collect();
                    traces.insert(node_id(lat, node)?, p);
                }
                let id = c.add_atom(name, atom.rank, traces)?;
                if let Some(claimed) = &atom.isotropic_at {
                    let actual: BTreeSet<String> =
                        c.atom(id).isotropy_set().into_iter().map(|e| lat.name(e).to_string()).collect();
                    if *claimed != actual {
                        return Err(WorkspaceError::Invalid(format!(
                            "atom {name:?}: isotropic_at {claimed:?} disagrees with the traces, which give {actual:?}"
                        )));
                    }
                }
            }
            // Quadric motives add their atoms before the consistency check.
            for (name, spec) in &file.motives {
                if let MotiveSpec::Quadric { quadric } = spec {
                    let table =
                        witt.get(quadric).ok_or_else(|| WorkspaceError::Unknown { kind: "witt table", name: quadric.clone() })?;
                    let m = add_quadric_motive(&mut c, quadric, table)
                        .map_err(|source| WorkspaceError::Witt { table: quadric.clone(), source })?;
                    motives.insert(name.clone(), m);
                }
            }
            c.check_consistency()?;
            for (name, spec) in &file.motives {
                if let MotiveSpec::Sum(terms) = spec {
                    let m = c
                        .motive_by_names(terms.iter().map(|(a, k)| (a.as_str(), *k)))
                        .map_err(|source| WorkspaceError::Motive { motive: name.clone(), source })?;
                    motives.insert(name.clone(), m);
                }
            }
            catalog = Some(c);
        }

        let mut tits = BTreeMap::new();
        for (name, spec) in &file.tits_tables {
            let lat = need_lattice()?;
            let group = groups
                .get(&spec.group)
                .ok_or_else(|| WorkspaceError::Unknown { kind: "group", name: spec.group.clone() })?;
            let sets = per_node(lat, &spec.distinguished, &format!("tits table {name:?}"))?
                .into_iter()
                .map(|v| v.into_iter().collect())
                .collect();
            let t = TitsTable::new(group.star().clone(), lat, sets)
                .map_err(|source| WorkspaceError::Tits { table: name.clone(), source })?;
            tits.insert(name.clone(), t);
        }

        let mut split_tables = BTreeMap::new();
        for (name, nodes) in &file.split_tables {
            let lat = need_lattice()?;
            let mut flags = vec![false; lat.len()];
            for n in nodes {
                flags[node_id(lat, n)?] = true;
            }
            split_tables.insert(name.clone(), flags);
        }

        Ok(Self { file, groups, lattice, recipes, forms, witt, catalog, motives, tits, split_tables })
    }

    pub fn lattice(&self) -> Result<&ExtensionLattice, WorkspaceError> {
        self.lattice.as_ref().ok_or(WorkspaceError::NoLattice)
    }

    pub fn catalog(&self) -> Result<&AtomCatalog, WorkspaceError> {
        self.catalog.as_ref().ok_or_else(|| WorkspaceError::Invalid("the workspace defines no atoms or motives".into()))
    }

    pub fn motive(&self, name: &str) -> Result<&FormalMotive, WorkspaceError> {
        self.motives.get(name).ok_or_else(|| WorkspaceError::Unknown { kind: "motive", name: name.to_string() })
    }

    pub fn group(&self, name: &str) -> Option<&GroupDatum> {
        self.groups.get(name)
    }

    pub fn tits_table(&self, name: &str) -> Result<&TitsTable, WorkspaceError> {
        self.tits.get(name).ok_or_else(|| WorkspaceError::Unknown { kind: "tits table", name: name.to_string() })
    }

    pub fn witt_table(&self, name: &str) -> Result<&WittIndexTable, WorkspaceError> {
        self.witt.get(name).ok_or_else(|| WorkspaceError::Unknown { kind: "witt table", name: name.to_string() })
    }

    pub fn split_table(&self, name: &str) -> Result<&[bool], WorkspaceError> {
        self.split_tables
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| WorkspaceError::Unknown { kind: "split table", name: name.to_string() })
    }

    pub fn form(&self, name: &str) -> Option<&QuadraticForm> {
        self.forms.get(name)
    }
}
