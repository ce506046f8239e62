//! Model files, built-in benchmark fixtures and results persistence.
//!
//! Models are TOML documents with an explicit `[units]` block; every value
//! is converted to SI (N, m, Pa) at parse time. See `docs/model-format.md`
//! for the grammar.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::element::{Element, ElementOptions, Formulation, GaussRecord};
use crate::error::{FsdbError, Result};
use crate::kernel::LoadDistribution;
use crate::materials::{ConcreteParams, SteelParams};
use crate::section::{elastic_rectangle, BarRow, FibreSection, RcRectangle};
use crate::solver::{
    cyclic_history, monotonic_history, run_displacement_history, run_load_ramp, AnalysisResult,
    ControlDof, Model, Solver, SolverSettings, StepRecord,
};

pub const SCHEMA_VERSION: u32 = 1;

const BENCHMARKS: [(&str, &str); 3] = [
    ("benchmark1", include_str!("../fixtures/benchmark1.toml")),
    ("benchmark2", include_str!("../fixtures/benchmark2.toml")),
    ("benchmark3", include_str!("../fixtures/benchmark3.toml")),
];

/// Names of the embedded fixtures.
pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BENCHMARKS.iter().map(|(n, _)| *n)
}

/// Source text of an embedded fixture.
pub fn builtin_source(name: &str) -> Option<&'static str> {
    BENCHMARKS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin(name: &str) -> Result<ModelSpec> {
    let text = builtin_source(name).ok_or_else(|| {
        FsdbError::InvalidInput(format!(
            "no built-in model '{name}' (available: {})",
            builtin_names().collect::<Vec<_>>().join(", ")
        ))
    })?;
    parse_model(text)
}

/// Load a built-in fixture by name, or a model file by path.
pub fn load_model(name_or_path: &str) -> Result<ModelSpec> {
    if let Some(text) = builtin_source(name_or_path) {
        return parse_model(text);
    }
    let text = fs::read_to_string(name_or_path).map_err(|e| FsdbError::io(name_or_path, e))?;
    parse_model(&text)
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRoot {
    schema: u32,
    name: Option<String>,
    description: Option<String>,
    units: UnitsDecl,
    #[serde(default)]
    materials: BTreeMap<String, MaterialDecl>,
    #[serde(default)]
    sections: BTreeMap<String, SectionDecl>,
    nodes: Vec<[f64; 2]>,
    #[serde(default)]
    members: Vec<MemberDecl>,
    #[serde(default)]
    supports: Vec<SupportDecl>,
    #[serde(default)]
    loads: Vec<LoadDecl>,
    #[serde(default)]
    protocols: BTreeMap<String, ProtocolDecl>,
    #[serde(default)]
    solver: SolverDecl,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsDecl {
    length: LengthUnit,
    force: ForceUnit,
    stress: StressUnit,
}

#[derive(Deserialize, Clone, Copy)]
enum LengthUnit {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "cm")]
    Cm,
    #[serde(rename = "mm")]
    Mm,
}

#[derive(Deserialize, Clone, Copy)]
enum ForceUnit {
    N,
    #[serde(rename = "kN")]
    KN,
    #[serde(rename = "MN")]
    MN,
}

#[derive(Deserialize, Clone, Copy)]
enum StressUnit {
    Pa,
    #[serde(rename = "kPa")]
    KPa,
    #[serde(rename = "MPa")]
    MPa,
    #[serde(rename = "GPa")]
    GPa,
}

#[derive(Clone, Copy)]
struct Units {
    length: f64,
    force: f64,
    stress: f64,
}

impl From<&UnitsDecl> for Units {
    fn from(u: &UnitsDecl) -> Self {
        Units {
            length: match u.length {
                LengthUnit::M => 1.0,
                LengthUnit::Cm => 1e-2,
                LengthUnit::Mm => 1e-3,
            },
            force: match u.force {
                ForceUnit::N => 1.0,
                ForceUnit::KN => 1e3,
                ForceUnit::MN => 1e6,
            },
            stress: match u.stress {
                StressUnit::Pa => 1.0,
                StressUnit::KPa => 1e3,
                StressUnit::MPa => 1e6,
                StressUnit::GPa => 1e9,
            },
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum MaterialDecl {
    Concrete {
        fc: f64,
        eps_c: f64,
        fcu: f64,
        eps_cu: f64,
        ec: f64,
        ft: f64,
        /// Defaults to 2/3 of `ec`.
        et_soft: Option<f64>,
        #[serde(default = "default_unload_ratio")]
        unload_ratio: f64,
    },
    Steel {
        es: f64,
        fy: f64,
        b: f64,
        #[serde(default = "default_r0")]
        r0: f64,
        #[serde(default = "default_cr1")]
        cr1: f64,
        #[serde(default = "default_cr2")]
        cr2: f64,
    },
    Elastic {
        modulus: f64,
    },
}

fn default_unload_ratio() -> f64 {
    0.1
}
fn default_r0() -> f64 {
    15.0
}
fn default_cr1() -> f64 {
    0.925
}
fn default_cr2() -> f64 {
    0.15
}
fn default_stripes() -> usize {
    40
}
fn default_fraction() -> f64 {
    1.0
}
fn default_ips() -> usize {
    10
}
fn default_true() -> bool {
    true
}
fn default_one() -> usize {
    1
}
fn default_preload() -> usize {
    5
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SectionDecl {
    RcRectangle {
        width: f64,
        depth: f64,
        cover: f64,
        side_cover: Option<f64>,
        #[serde(default = "default_stripes")]
        stripes: usize,
        cover_concrete: String,
        core_concrete: String,
        steel: String,
        #[serde(default)]
        bars: Vec<BarDecl>,
    },
    ElasticRectangle {
        width: f64,
        depth: f64,
        material: String,
        #[serde(default = "default_stripes")]
        stripes: usize,
    },
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Face {
    Top,
    Bottom,
}

/// A bar row either at an explicit `z`, or on a face: centre at
/// `fraction * (depth/2 - cover - diameter/2)` on that side.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BarDecl {
    count: usize,
    diameter: f64,
    z: Option<f64>,
    face: Option<Face>,
    cover: Option<f64>,
    #[serde(default = "default_fraction")]
    fraction: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MemberDecl {
    nodes: [usize; 2],
    section: String,
    #[serde(default = "default_formulation")]
    formulation: Formulation,
    #[serde(default = "default_ips")]
    integration_points: usize,
    #[serde(default = "default_true")]
    axial_equilibration: bool,
    #[serde(default = "default_one")]
    divisions: usize,
    /// Uniform distributed loads in member axes, force per length.
    #[serde(default)]
    px: f64,
    #[serde(default)]
    pz: f64,
}

fn default_formulation() -> Formulation {
    Formulation::Fsdb
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "lowercase")]
enum Dof {
    Ux,
    Uz,
    Ry,
}

impl Dof {
    fn index(self) -> usize {
        match self {
            Dof::Ux => 0,
            Dof::Uz => 1,
            Dof::Ry => 2,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SupportDecl {
    node: usize,
    dofs: Vec<Dof>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadDecl {
    node: usize,
    dof: Dof,
    value: f64,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ProtocolDecl {
    Pushover {
        node: usize,
        dof: Dof,
        target: f64,
        steps: usize,
        #[serde(default = "default_preload")]
        preload_steps: usize,
        tol_r: Option<f64>,
        tol_u: Option<f64>,
        max_iter: Option<usize>,
    },
    Cyclic {
        node: usize,
        dof: Dof,
        amplitudes: Vec<f64>,
        increment: f64,
        #[serde(default = "default_preload")]
        preload_steps: usize,
        tol_r: Option<f64>,
        tol_u: Option<f64>,
        max_iter: Option<usize>,
    },
    Load {
        #[serde(default = "default_factor")]
        factor: f64,
        steps: usize,
        tol_r: Option<f64>,
        tol_u: Option<f64>,
        max_iter: Option<usize>,
    },
}

fn default_factor() -> f64 {
    1.0
}

#[derive(Clone, Copy)]
struct ConvergenceDecl {
    tol_r: Option<f64>,
    tol_u: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SolverDecl {
    tol_r: Option<f64>,
    tol_u: Option<f64>,
    max_iter: Option<usize>,
    max_halvings: Option<usize>,
    line_search: Option<usize>,
}

// ---------------------------------------------------------------------------
// Validated model

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum SectionSpec {
    Rc(RcRectangle),
    Elastic {
        width: f64,
        depth: f64,
        modulus: f64,
        stripes: usize,
    },
}

impl SectionSpec {
    pub fn build(&self) -> Result<FibreSection> {
        match self {
            SectionSpec::Rc(rc) => rc.build(),
            SectionSpec::Elastic {
                width,
                depth,
                modulus,
                stripes,
            } => elastic_rectangle(*width, *depth, *modulus, *stripes),
        }
    }
}

/// A straight member, meshed into `divisions` equal elements.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberSpec {
    pub nodes: [usize; 2],
    pub section: String,
    pub options: ElementOptions,
    pub divisions: usize,
    pub px: f64,
    pub pz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Ramp {
        target: f64,
        steps: usize,
    },
    Cyclic {
        amplitudes: Vec<f64>,
        increment: f64,
    },
    Load {
        factor: f64,
        steps: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    /// Control DOF; `None` for load-controlled protocols.
    pub control: Option<ControlDof>,
    pub schedule: Schedule,
    pub preload_steps: usize,
    pub settings: SolverSettings,
}

impl Protocol {
    pub fn is_cyclic(&self) -> bool {
        matches!(self.schedule, Schedule::Cyclic { .. })
    }
}

/// Nodal load in global axes, SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalLoad {
    pub node: usize,
    pub dof: usize,
    pub value: f64,
}

/// Parsed and validated model, all quantities in SI.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub description: String,
    pub nodes: Vec<[f64; 2]>,
    pub sections: BTreeMap<String, SectionSpec>,
    pub members: Vec<MemberSpec>,
    pub supports: Vec<(usize, [bool; 3])>,
    pub loads: Vec<NodalLoad>,
    pub protocols: BTreeMap<String, Protocol>,
    /// SHA-256 of the source text.
    pub source_hash: String,
}

/// Command-line style overrides applied when a model is built.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub formulation: Option<Formulation>,
    pub integration_points: Option<usize>,
    /// Elements per member.
    pub elements: Option<usize>,
    pub axial_eq: Option<bool>,
    /// Step count of ramp protocols.
    pub steps: Option<usize>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_model(text: &str) -> Result<ModelSpec> {
    let root: FileRoot = toml::from_str(text).map_err(|e| FsdbError::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut errs = Vec::new();
    let spec = convert(root, &mut errs);
    if !errs.is_empty() {
        return Err(FsdbError::Validation(errs));
    }
    let mut spec = spec;
    spec.source_hash = hex_digest(text.as_bytes());
    // fibre layouts are generated here so that geometry errors surface at
    // parse time
    for (name, s) in &spec.sections {
        if let Err(e) = s.build() {
            errs.push(format!("section '{name}': {e}"));
        }
    }
    if errs.is_empty() {
        if let Err(e) = spec.build(&Overrides::default()) {
            errs.push(e.to_string());
        }
    }
    if errs.is_empty() {
        Ok(spec)
    } else {
        Err(FsdbError::Validation(errs))
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn convert(root: FileRoot, errs: &mut Vec<String>) -> ModelSpec {
    let u = Units::from(&root.units);
    if root.schema != SCHEMA_VERSION {
        errs.push(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            root.schema
        ));
    }
    let (len, force, stress) = (u.length, u.force, u.stress);

    let mut concretes = BTreeMap::new();
    let mut steels = BTreeMap::new();
    let mut elastics = BTreeMap::new();
    for (name, m) in &root.materials {
        match *m {
            MaterialDecl::Concrete {
                fc,
                eps_c,
                fcu,
                eps_cu,
                ec,
                ft,
                et_soft,
                unload_ratio,
            } => {
                let p = ConcreteParams {
                    fc: fc * stress,
                    eps_c,
                    fcu: fcu * stress,
                    eps_cu,
                    ec: ec * stress,
                    ft: ft * stress,
                    et_soft: et_soft.unwrap_or(2.0 / 3.0 * ec) * stress,
                    unload_ratio,
                };
                errs.extend(
                    p.validate()
                        .into_iter()
                        .map(|e| format!("material '{name}': {e}")),
                );
                concretes.insert(name.clone(), p);
            }
            MaterialDecl::Steel {
                es,
                fy,
                b,
                r0,
                cr1,
                cr2,
            } => {
                let p = SteelParams {
                    es: es * stress,
                    fy: fy * stress,
                    b,
                    r0,
                    cr1,
                    cr2,
                };
                errs.extend(
                    p.validate()
                        .into_iter()
                        .map(|e| format!("material '{name}': {e}")),
                );
                steels.insert(name.clone(), p);
            }
            MaterialDecl::Elastic { modulus } => {
                if !(modulus > 0.0) {
                    errs.push(format!("material '{name}': modulus must be positive"));
                }
                elastics.insert(name.clone(), modulus * stress);
            }
        }
    }

    let mut sections = BTreeMap::new();
    let mut section_names = Vec::new();
    for (name, s) in root.sections {
        let mut lookup = |found: bool, key: &str, what: &str| {
            if !found {
                errs.push(format!(
                    "section '{name}': {what} material '{key}' is not defined"
                ));
            }
        };
        match s {
            SectionDecl::RcRectangle {
                width,
                depth,
                cover,
                side_cover,
                stripes,
                cover_concrete,
                core_concrete,
                steel,
                bars,
            } => {
                let cover_p = concretes.get(&cover_concrete).copied();
                let core_p = concretes.get(&core_concrete).copied();
                let steel_p = steels.get(&steel).copied();
                lookup(cover_p.is_some(), &cover_concrete, "cover concrete");
                lookup(core_p.is_some(), &core_concrete, "core concrete");
                lookup(steel_p.is_some(), &steel, "steel");
                let mut rows = Vec::with_capacity(bars.len());
                for (i, b) in bars.iter().enumerate() {
                    let z = match (b.z, b.face) {
                        (Some(z), None) => z * len,
                        (None, Some(face)) => {
                            let c = b.cover.unwrap_or(cover);
                            let d = b.fraction * (0.5 * depth - c - 0.5 * b.diameter);
                            let s = if face == Face::Top { 1.0 } else { -1.0 };
                            s * d * len
                        }
                        _ => {
                            errs.push(format!(
                                "section '{name}': bar row {i} needs exactly one of 'z' or 'face'"
                            ));
                            0.0
                        }
                    };
                    rows.push(BarRow {
                        z,
                        count: b.count,
                        diameter: b.diameter * len,
                    });
                }
                let (Some(cover_p), Some(core_p), Some(steel_p)) = (cover_p, core_p, steel_p)
                else {
                    section_names.push(name);
                    continue;
                };
                let rc = RcRectangle {
                    width: width * len,
                    depth: depth * len,
                    cover: cover * len,
                    side_cover: side_cover.unwrap_or(cover) * len,
                    stripes,
                    cover_concrete: cover_p,
                    core_concrete: core_p,
                    steel: steel_p,
                    bars: rows,
                };
                errs.extend(
                    rc.validate()
                        .into_iter()
                        .map(|e| format!("section '{name}': {e}")),
                );
                section_names.push(name.clone());
                sections.insert(name, SectionSpec::Rc(rc));
            }
            SectionDecl::ElasticRectangle {
                width,
                depth,
                material,
                stripes,
            } => {
                lookup(elastics.contains_key(&material), &material, "elastic");
                section_names.push(name.clone());
                if !(width > 0.0 && depth > 0.0) || stripes == 0 {
                    errs.push(format!(
                        "section '{name}': needs positive dimensions and at least one stripe"
                    ));
                }
                sections.insert(
                    name,
                    SectionSpec::Elastic {
                        width: width * len,
                        depth: depth * len,
                        modulus: elastics.get(&material).copied().unwrap_or(1.0),
                        stripes,
                    },
                );
            }
        }
    }

    let n_nodes = root.nodes.len();
    let nodes: Vec<[f64; 2]> = root
        .nodes
        .iter()
        .map(|p| [p[0] * len, p[1] * len])
        .collect();
    if nodes.len() < 2 {
        errs.push("a model needs at least two nodes".into());
    }

    if root.members.is_empty() {
        errs.push("a model needs at least one member".into());
    }
    let mut members = Vec::with_capacity(root.members.len());
    for (i, m) in root.members.into_iter().enumerate() {
        if m.nodes.iter().any(|&n| n >= n_nodes) {
            errs.push(format!(
                "member {i}: node reference {:?} out of range (0..{n_nodes})",
                m.nodes
            ));
        } else if m.nodes[0] == m.nodes[1] || nodes[m.nodes[0]] == nodes[m.nodes[1]] {
            errs.push(format!("member {i}: zero length"));
        }
        if !section_names.contains(&m.section) {
            errs.push(format!(
                "member {i}: section '{}' is not defined",
                m.section
            ));
        }
        if m.integration_points < 2 {
            errs.push(format!(
                "member {i}: at least 2 integration points are required"
            ));
        }
        if m.divisions == 0 {
            errs.push(format!("member {i}: divisions must be at least 1"));
        }
        let mut options = ElementOptions::for_formulation(m.formulation);
        options.integration_points = m.integration_points;
        options.axial.enabled = m.axial_equilibration && m.formulation == Formulation::Fsdb;
        members.push(MemberSpec {
            nodes: m.nodes,
            section: m.section,
            options,
            divisions: m.divisions,
            px: m.px * force / len,
            pz: m.pz * force / len,
        });
    }

    let mut fixed = vec![false; 3 * n_nodes];
    let mut supports = Vec::new();
    for (i, s) in root.supports.iter().enumerate() {
        if s.node >= n_nodes {
            errs.push(format!("support {i}: node {} does not exist", s.node));
            continue;
        }
        let mut dofs = [false; 3];
        for d in &s.dofs {
            dofs[d.index()] = true;
            fixed[3 * s.node + d.index()] = true;
        }
        supports.push((s.node, dofs));
    }
    let n_fixed = fixed.iter().filter(|&&f| f).count();
    let fixed_dir = |d: usize| fixed.iter().skip(d).step_by(3).any(|&f| f);
    if n_fixed < 3 || !fixed_dir(0) || !fixed_dir(1) {
        errs.push(format!(
            "supports restrain {n_fixed} DOFs; the model is not at least statically determinate"
        ));
    }

    let mut loads = Vec::with_capacity(root.loads.len());
    for (i, l) in root.loads.iter().enumerate() {
        if l.node >= n_nodes {
            errs.push(format!("load {i}: node {} does not exist", l.node));
            continue;
        }
        if fixed[3 * l.node + l.dof.index()] && l.value != 0.0 {
            errs.push(format!(
                "load {i}: DOF {:?} of node {} is restrained",
                l.dof, l.node
            ));
        }
        let scale = if l.dof == Dof::Ry { force * len } else { force };
        loads.push(NodalLoad {
            node: l.node,
            dof: l.dof.index(),
            value: l.value * scale,
        });
    }

    let base = SolverSettings {
        tol_r: root.solver.tol_r.unwrap_or(SolverSettings::default().tol_r),
        tol_u: root.solver.tol_u.unwrap_or(SolverSettings::default().tol_u),
        max_iter: root
            .solver
            .max_iter
            .unwrap_or(SolverSettings::default().max_iter),
        max_halvings: root
            .solver
            .max_halvings
            .unwrap_or(SolverSettings::default().max_halvings),
        line_search: root
            .solver
            .line_search
            .unwrap_or(SolverSettings::default().line_search),
    };
    let mut protocols = BTreeMap::new();
    for (name, p) in root.protocols {
        let mut control = |node: usize, dof: Dof| {
            if node >= n_nodes {
                errs.push(format!(
                    "protocol '{name}': control node {node} does not exist"
                ));
            } else if fixed[3 * node + dof.index()] {
                errs.push(format!(
                    "protocol '{name}': control DOF {dof:?} of node {node} is restrained"
                ));
            }
            Some(ControlDof {
                node,
                dof: dof.index(),
            })
        };
        let (control, schedule, preload_steps, conv) = match p {
            ProtocolDecl::Pushover {
                node,
                dof,
                target,
                steps,
                preload_steps,
                tol_r,
                tol_u,
                max_iter,
            } => {
                let scale = if dof == Dof::Ry { 1.0 } else { len };
                (
                    control(node, dof),
                    Schedule::Ramp {
                        target: target * scale,
                        steps,
                    },
                    preload_steps,
                    ConvergenceDecl {
                        tol_r,
                        tol_u,
                        max_iter,
                    },
                )
            }
            ProtocolDecl::Cyclic {
                node,
                dof,
                amplitudes,
                increment,
                preload_steps,
                tol_r,
                tol_u,
                max_iter,
            } => {
                let scale = if dof == Dof::Ry { 1.0 } else { len };
                (
                    control(node, dof),
                    Schedule::Cyclic {
                        amplitudes: amplitudes.iter().map(|a| a * scale).collect(),
                        increment: increment * scale,
                    },
                    preload_steps,
                    ConvergenceDecl {
                        tol_r,
                        tol_u,
                        max_iter,
                    },
                )
            }
            ProtocolDecl::Load {
                factor,
                steps,
                tol_r,
                tol_u,
                max_iter,
            } => (
                None,
                Schedule::Load { factor, steps },
                0,
                ConvergenceDecl {
                    tol_r,
                    tol_u,
                    max_iter,
                },
            ),
        };
        match &schedule {
            Schedule::Ramp { steps, .. } | Schedule::Load { steps, .. } if *steps == 0 => {
                errs.push(format!("protocol '{name}': step schedule is empty"));
            }
            Schedule::Cyclic {
                amplitudes,
                increment,
            } => {
                if amplitudes.is_empty() {
                    errs.push(format!("protocol '{name}': step schedule is empty"));
                }
                if !(*increment > 0.0) {
                    errs.push(format!("protocol '{name}': increment must be positive"));
                }
            }
            _ => {}
        }
        if matches!(schedule, Schedule::Load { .. }) && root.loads.iter().all(|l| l.value == 0.0) {
            errs.push(format!("protocol '{name}': load control without any load"));
        }
        let settings = SolverSettings {
            tol_r: conv.tol_r.unwrap_or(base.tol_r),
            tol_u: conv.tol_u.unwrap_or(base.tol_u),
            max_iter: conv.max_iter.unwrap_or(base.max_iter),
            ..base
        };
        if !(settings.tol_r > 0.0 && settings.tol_u > 0.0) || settings.max_iter == 0 {
            errs.push(format!(
                "protocol '{name}': tolerances and max_iter must be positive"
            ));
        }
        protocols.insert(
            name,
            Protocol {
                control,
                schedule,
                preload_steps,
                settings,
            },
        );
    }

    ModelSpec {
        name: root.name.unwrap_or_else(|| "model".into()),
        description: root.description.unwrap_or_default(),
        nodes,
        sections,
        members,
        supports,
        loads,
        protocols,
        source_hash: String::new(),
    }
}

impl ModelSpec {
    /// Assemble a solver model, members meshed and overrides applied.
    ///
    /// Interior mesh nodes are numbered after the declared nodes, so
    /// declared node indices stay valid.
    pub fn build(&self, ov: &Overrides) -> Result<Model> {
        let mut nodes = self.nodes.clone();
        let mut elements = Vec::new();
        let mut built: BTreeMap<&str, FibreSection> = BTreeMap::new();
        for (name, s) in &self.sections {
            built.insert(name, s.build()?);
        }
        for m in &self.members {
            let section = &built[m.section.as_str()];
            let opts = self.member_options(m, ov);
            let n = ov.elements.unwrap_or(m.divisions).max(1);
            let (a, b) = (self.nodes[m.nodes[0]], self.nodes[m.nodes[1]]);
            let mut ids = vec![m.nodes[0]];
            for k in 1..n {
                let t = k as f64 / n as f64;
                nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                ids.push(nodes.len() - 1);
            }
            ids.push(m.nodes[1]);
            for w in ids.windows(2) {
                let mut e = Element::new([w[0], w[1]], nodes[w[0]], nodes[w[1]], section, opts)?;
                if m.px != 0.0 {
                    e.px = LoadDistribution::uniform(m.px);
                }
                if m.pz != 0.0 {
                    e.pz = LoadDistribution::uniform(m.pz);
                }
                elements.push(e);
            }
        }
        let mut model = Model::new(nodes, elements)?;
        for (node, dofs) in &self.supports {
            model.fix(*node, *dofs)?;
        }
        for l in &self.loads {
            model.add_load(l.node, l.dof, l.value)?;
        }
        Ok(model)
    }

    fn member_options(&self, m: &MemberSpec, ov: &Overrides) -> ElementOptions {
        let f = ov.formulation.unwrap_or(m.options.formulation);
        let mut opts = if f == m.options.formulation {
            m.options
        } else {
            ElementOptions {
                integration_points: m.options.integration_points,
                ..ElementOptions::for_formulation(f)
            }
        };
        if let Some(n) = ov.integration_points {
            opts.integration_points = n;
        }
        if let Some(on) = ov.axial_eq {
            opts.axial.enabled = on && f == Formulation::Fsdb;
        }
        opts
    }

    pub fn protocol(&self, name: &str) -> Result<&Protocol> {
        self.protocols.get(name).ok_or_else(|| {
            FsdbError::InvalidInput(format!(
                "model '{}' has no protocol '{name}' (available: {})",
                self.name,
                self.protocols
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
    }

    /// Set the total nodal load on `dof` of `node`, replacing declared
    /// loads on that DOF.
    pub fn set_load(&mut self, node: usize, dof: usize, value: f64) {
        self.loads.retain(|l| !(l.node == node && l.dof == dof));
        self.loads.push(NodalLoad { node, dof, value });
    }

    /// Build the model and run the named protocol.
    pub fn run(&self, protocol: &str, ov: &Overrides) -> Result<RunOutput> {
        let p = self.protocol(protocol)?;
        let mut model = self.build(ov)?;
        let solver = Solver::new(p.settings);
        let result = match (&p.schedule, p.control) {
            (Schedule::Ramp { target, steps }, Some(c)) => {
                let history = monotonic_history(*target, ov.steps.unwrap_or(*steps));
                run_displacement_history(&mut model, &solver, c, &history, p.preload_steps)?
            }
            (
                Schedule::Cyclic {
                    amplitudes,
                    increment,
                },
                Some(c),
            ) => {
                let history = cyclic_history(amplitudes, *increment);
                run_displacement_history(&mut model, &solver, c, &history, p.preload_steps)?
            }
            (Schedule::Load { factor, steps }, _) => {
                run_load_ramp(&mut model, &solver, *factor, ov.steps.unwrap_or(*steps))?
            }
            _ => {
                return Err(FsdbError::InvalidInput(format!(
                    "protocol '{protocol}' has no control DOF"
                )))
            }
        };
        let first = model.elements.first().map(|e| *e.options());
        let metadata = RunMetadata {
            model: self.name.clone(),
            model_hash: self.source_hash.clone(),
            protocol: protocol.to_string(),
            formulation: first.map_or_else(String::new, |o| o.formulation.to_string()),
            integration_points: first.map_or(0, |o| o.integration_points),
            elements: model.elements.len(),
            axial_equilibration: first.is_some_and(|o| o.axial.enabled),
            tol_r: p.settings.tol_r,
            tol_u: p.settings.tol_u,
            max_iter: p.settings.max_iter,
            max_halvings: p.settings.max_halvings,
            converged: result.converged(),
            failure: result.failure.clone(),
        };
        Ok(RunOutput {
            metadata,
            result,
            model,
        })
    }
}

/// Results of one run together with the final model state.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metadata: RunMetadata,
    pub result: AnalysisResult,
    pub model: Model,
}

impl RunOutput {
    pub fn bundle(&self) -> ResultsBundle {
        ResultsBundle {
            metadata: self.metadata.clone(),
            steps: self.result.steps.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Results

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetadata {
    pub model: String,
    pub model_hash: String,
    pub protocol: String,
    pub formulation: String,
    pub integration_points: usize,
    pub elements: usize,
    pub axial_equilibration: bool,
    pub tol_r: f64,
    pub tol_u: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub converged: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsBundle {
    pub metadata: RunMetadata,
    pub steps: Vec<StepRecord>,
}

pub const CAPACITY_FILE: &str = "capacity.csv";
pub const FIELDS_FILE: &str = "fields.csv";
pub const METADATA_FILE: &str = "metadata.toml";

const CAPACITY_HEADER: &str =
    "step,converged,control_disp_m,reaction_kN,axial_disp_m,iterations,halvings";
const FIELDS_HEADER: &str = "step,converged,element,gauss,x_over_l,eps0,chi,N,M,beta_x,beta_z";

/// Shortest text that parses back to exactly `v`.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn capacity_table(steps: &[StepRecord]) -> String {
    let mut s = String::from(CAPACITY_HEADER);
    s.push('\n');
    for r in steps {
        let _ = writeln!(
            s,
            "{},true,{},{},{},{},{}",
            r.step,
            num(r.control_disp),
            num(r.reaction / 1e3),
            num(r.axial_disp),
            r.iterations,
            r.halvings
        );
    }
    s
}

pub fn field_table(steps: &[StepRecord]) -> String {
    let mut s = String::from(FIELDS_HEADER);
    s.push('\n');
    for r in steps {
        for (e, recs) in r.fields.iter().enumerate() {
            for (g, f) in recs.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{},true,{e},{g},{},{},{},{},{},{},{}",
                    r.step,
                    num(f.x_over_l),
                    num(f.eps0),
                    num(f.chi),
                    num(f.n),
                    num(f.m),
                    num(f.beta_x),
                    num(f.beta_z)
                );
            }
        }
    }
    s
}

/// Write the capacity table, the field table and the run metadata into
/// `dir`, creating it if needed. Returns the written paths.
pub fn write_results(bundle: &ResultsBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| FsdbError::io(dir, e))?;
    let meta = toml::to_string(&bundle.metadata)
        .map_err(|e| FsdbError::InvalidInput(format!("metadata serialization: {e}")))?;
    let files = [
        (CAPACITY_FILE, capacity_table(&bundle.steps)),
        (FIELDS_FILE, field_table(&bundle.steps)),
        (METADATA_FILE, meta),
    ];
    let mut out = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| FsdbError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}

fn malformed(path: &Path, message: String) -> FsdbError {
    FsdbError::MalformedResults {
        path: path.to_path_buf(),
        message,
    }
}

/// Data rows of a table with the expected header, split into fields.
fn table_rows(path: &Path, text: &str, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let expected: Vec<&str> = header.split(',').collect();
    match rdr.headers() {
        Ok(h) if h.iter().eq(expected.iter().copied()) => {}
        _ => return Err(malformed(path, format!("expected header '{header}'"))),
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| malformed(path, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        rows.push((line, rec.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| malformed(path, format!("line {line}: cannot parse '{s}'")))
}

/// Read a results directory written by [`write_results`].
pub fn read_results(dir: &Path) -> Result<ResultsBundle> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| FsdbError::io(&p, e))
    };
    let meta_path = dir.join(METADATA_FILE);
    let metadata: RunMetadata =
        toml::from_str(&read(METADATA_FILE)?).map_err(|e| malformed(&meta_path, e.to_string()))?;

    let cap_path = dir.join(CAPACITY_FILE);
    let cap_text = read(CAPACITY_FILE)?;
    let mut steps = Vec::new();
    for (line, c) in table_rows(&cap_path, &cap_text, CAPACITY_HEADER)? {
        if c[1] != "true" {
            return Err(malformed(
                &cap_path,
                format!("line {line}: unconverged record"),
            ));
        }
        steps.push(StepRecord {
            step: field(&cap_path, line, &c[0])?,
            control_disp: field(&cap_path, line, &c[2])?,
            reaction: field::<f64>(&cap_path, line, &c[3])? * 1e3,
            axial_disp: field(&cap_path, line, &c[4])?,
            iterations: field(&cap_path, line, &c[5])?,
            halvings: field(&cap_path, line, &c[6])?,
            fields: Vec::new(),
        });
    }

    let f_path = dir.join(FIELDS_FILE);
    let f_text = read(FIELDS_FILE)?;
    let index: BTreeMap<usize, usize> =
        steps.iter().enumerate().map(|(i, s)| (s.step, i)).collect();
    for (line, c) in table_rows(&f_path, &f_text, FIELDS_HEADER)? {
        let step: usize = field(&f_path, line, &c[0])?;
        let e: usize = field(&f_path, line, &c[2])?;
        let g: usize = field(&f_path, line, &c[3])?;
        let Some(&i) = index.get(&step) else {
            return Err(malformed(
                &f_path,
                format!("line {line}: unknown step {step}"),
            ));
        };
        let rec = GaussRecord {
            x_over_l: field(&f_path, line, &c[4])?,
            eps0: field(&f_path, line, &c[5])?,
            chi: field(&f_path, line, &c[6])?,
            n: field(&f_path, line, &c[7])?,
            m: field(&f_path, line, &c[8])?,
            beta_x: field(&f_path, line, &c[9])?,
            beta_z: field(&f_path, line, &c[10])?,
        };
        let fields = &mut steps[i].fields;
        if fields.len() <= e {
            fields.resize(e + 1, Vec::new());
        }
        if fields[e].len() != g {
            return Err(malformed(
                &f_path,
                format!("line {line}: Gauss rows out of order"),
            ));
        }
        fields[e].push(rec);
    }
    Ok(ResultsBundle { metadata, steps })
}
