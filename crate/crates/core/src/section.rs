//! Fibre cross sections.

use nalgebra::{Matrix2, Vector2};

use crate::error::{FsdbError, Result};
use crate::kernel::clamp_beta;
use crate::materials::{Concrete, ConcreteParams, Material, Steel, SteelParams, UniaxialMaterial};

/// Generalized section strains `(eps_0, chi)`.
pub type SectionStrain = Vector2<f64>;
/// Section resultants `(N, M)`.
pub type SectionForce = Vector2<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct Fibre {
    pub z: f64,
    pub area: f64,
    pub material: Material,
}

/// Plane-section strain at offset `z`.
pub fn fibre_strain(d: &SectionStrain, z: f64) -> f64 {
    d[0] + d[1] * z
}

#[derive(Debug, Clone, PartialEq)]
pub struct FibreSection {
    fibres: Vec<Fibre>,
    height: f64,
    ea_ref: f64,
    ei_ref: f64,
    strain: SectionStrain,
    force: SectionForce,
    tangent: Matrix2<f64>,
    committed_strain: SectionStrain,
    committed_force: SectionForce,
    committed_tangent: Matrix2<f64>,
}

impl FibreSection {
    pub fn new(fibres: Vec<Fibre>) -> Result<Self> {
        if fibres.is_empty() {
            return Err(FsdbError::InvalidInput("section has no fibres".into()));
        }
        if let Some(f) = fibres.iter().find(|f| !(f.area > 0.0) || !f.z.is_finite()) {
            return Err(FsdbError::InvalidInput(format!(
                "fibre at z = {} has invalid area {}",
                f.z, f.area
            )));
        }
        let zmin = fibres.iter().map(|f| f.z).fold(f64::INFINITY, f64::min);
        let zmax = fibres.iter().map(|f| f.z).fold(f64::NEG_INFINITY, f64::max);
        let k0 = tangent_sum(
            fibres
                .iter()
                .map(|f| (f.z, f.area, f.material.initial_tangent())),
        );
        if !(k0[(0, 0)] > 0.0 && k0[(1, 1)] > 0.0) {
            return Err(FsdbError::InvalidInput(
                "section has no initial axial or flexural stiffness".into(),
            ));
        }
        Ok(Self {
            fibres,
            height: (zmax - zmin).max(f64::EPSILON),
            ea_ref: k0[(0, 0)],
            ei_ref: k0[(1, 1)],
            strain: SectionStrain::zeros(),
            force: SectionForce::zeros(),
            tangent: k0,
            committed_strain: SectionStrain::zeros(),
            committed_force: SectionForce::zeros(),
            committed_tangent: k0,
        })
    }

    pub fn fibres(&self) -> &[Fibre] {
        &self.fibres
    }

    /// Distance between the extreme fibres.
    pub fn height(&self) -> f64 {
        self.height
    }

    /// Axial stiffness of the virgin section.
    pub fn ea_ref(&self) -> f64 {
        self.ea_ref
    }

    /// Flexural stiffness of the virgin section.
    pub fn ei_ref(&self) -> f64 {
        self.ei_ref
    }

    /// Evaluate every fibre at the plane-section strain field `d`.
    pub fn set_trial(&mut self, d: &SectionStrain) -> (SectionForce, Matrix2<f64>) {
        let mut force = SectionForce::zeros();
        let mut k = Matrix2::zeros();
        for f in &mut self.fibres {
            let (s, e) = f.material.set_trial_strain(fibre_strain(d, f.z));
            force[0] += s * f.area;
            force[1] += s * f.area * f.z;
            accumulate(&mut k, f.z, f.area, e);
        }
        self.strain = *d;
        self.force = force;
        self.tangent = k;
        (force, k)
    }

    pub fn strain(&self) -> SectionStrain {
        self.strain
    }

    pub fn resultants(&self) -> SectionForce {
        self.force
    }

    pub fn tangent(&self) -> Matrix2<f64> {
        self.tangent
    }

    pub fn committed_strain(&self) -> SectionStrain {
        self.committed_strain
    }

    pub fn commit(&mut self) {
        for f in &mut self.fibres {
            f.material.commit();
        }
        self.committed_strain = self.strain;
        self.committed_force = self.force;
        self.committed_tangent = self.tangent;
    }

    pub fn revert(&mut self) {
        for f in &mut self.fibres {
            f.material.revert();
        }
        self.strain = self.committed_strain;
        self.force = self.committed_force;
        self.tangent = self.committed_tangent;
    }
}

fn accumulate(k: &mut Matrix2<f64>, z: f64, area: f64, e: f64) {
    let ea = e * area;
    k[(0, 0)] += ea;
    k[(0, 1)] += ea * z;
    k[(1, 0)] += ea * z;
    k[(1, 1)] += ea * z * z;
}

fn tangent_sum(it: impl Iterator<Item = (f64, f64, f64)>) -> Matrix2<f64> {
    let mut k = Matrix2::zeros();
    for (z, a, e) in it {
        accumulate(&mut k, z, a, e);
    }
    k
}

/// Stiffness-loss parameters of a section from its tangent.
///
/// `increment` is the last converged step increment `(d_eps, d_chi)`; when
/// it is `None` (or one component is negligible against the other) the
/// coupling term is dropped. The coupling term of the flexural parameter is
/// only used with `flexural_coupling`. A softening (negative) stiffness
/// enters with its magnitude, so a segment with a falling branch is as
/// flexible as a hardening one of the same slope.
pub fn update_betas(
    k: &Matrix2<f64>,
    ea_ref: f64,
    ei_ref: f64,
    increment: Option<(f64, f64)>,
    height: f64,
    flexural_coupling: bool,
) -> (f64, f64) {
    let (mut kx, mut kz) = (k[(0, 0)], k[(1, 1)]);
    if let Some((de, dc)) = increment {
        let de_s = de.abs();
        let dc_s = dc.abs() * height;
        if de_s >= 1e-12 + 1e-6 * dc_s {
            kx += k[(0, 1)] * dc / de;
        }
        if flexural_coupling && dc_s >= 1e-12 + 1e-6 * de_s {
            kz += k[(1, 0)] * de / dc;
        }
    }
    (
        clamp_beta(1.0 - kx.abs() / ea_ref),
        clamp_beta(1.0 - kz.abs() / ei_ref),
    )
}

/// A row of identical bars at offset `z` from the section centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarRow {
    pub z: f64,
    pub count: usize,
    pub diameter: f64,
}

impl BarRow {
    pub fn area(&self) -> f64 {
        self.count as f64 * std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }
}

/// Rectangular reinforced-concrete section: a confined core inside the
/// cover, unconfined cover concrete outside it, bars as point fibres.
#[derive(Debug, Clone, PartialEq)]
pub struct RcRectangle {
    pub width: f64,
    pub depth: f64,
    /// Cover measured from the top and bottom faces to the core edge.
    pub cover: f64,
    /// Cover measured from the lateral faces to the core edge.
    pub side_cover: f64,
    pub stripes: usize,
    pub cover_concrete: ConcreteParams,
    pub core_concrete: ConcreteParams,
    pub steel: SteelParams,
    pub bars: Vec<BarRow>,
}

impl RcRectangle {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.width > 0.0 && self.depth > 0.0) {
            errs.push(format!(
                "section dimensions must be positive, got {} x {}",
                self.width, self.depth
            ));
        }
        if !(self.cover >= 0.0 && 2.0 * self.cover < self.depth) {
            errs.push(format!(
                "cover {} incompatible with depth {}",
                self.cover, self.depth
            ));
        }
        if !(self.side_cover >= 0.0 && 2.0 * self.side_cover < self.width) {
            errs.push(format!(
                "side cover {} incompatible with width {}",
                self.side_cover, self.width
            ));
        }
        if self.stripes == 0 {
            errs.push("at least one concrete stripe is required".into());
        }
        for (i, r) in self.bars.iter().enumerate() {
            if !(r.diameter > 0.0) || r.count == 0 {
                errs.push(format!("bar row {i} needs a positive count and diameter"));
            }
            if r.z.abs() >= 0.5 * self.depth {
                errs.push(format!(
                    "bar row {i} at z = {} lies outside the section",
                    r.z
                ));
            }
        }
        for (name, p) in [
            ("cover concrete", &self.cover_concrete),
            ("core concrete", &self.core_concrete),
        ] {
            errs.extend(p.validate().into_iter().map(|e| format!("{name}: {e}")));
        }
        errs.extend(
            self.steel
                .validate()
                .into_iter()
                .map(|e| format!("steel: {e}")),
        );
        errs
    }

    pub fn build(&self) -> Result<FibreSection> {
        let errs = self.validate();
        if !errs.is_empty() {
            return Err(FsdbError::Validation(errs));
        }
        let cover_mat: Material = Concrete::new(self.cover_concrete)?.into();
        let core_mat: Material = Concrete::new(self.core_concrete)?.into();
        let steel_mat: Material = Steel::new(self.steel)?.into();
        let h = self.depth / self.stripes as f64;
        let core_lo = -0.5 * self.depth + self.cover;
        let core_hi = 0.5 * self.depth - self.cover;
        let core_width = self.width - 2.0 * self.side_cover;
        let mut fibres = Vec::with_capacity(2 * self.stripes + self.bars.len());
        for s in 0..self.stripes {
            let lo = -0.5 * self.depth + s as f64 * h;
            let hi = lo + h;
            let z = 0.5 * (lo + hi);
            let inside = (hi.min(core_hi) - lo.max(core_lo)).max(0.0);
            let core_area = inside * core_width;
            let cover_area = h * self.width - core_area;
            if core_area > 0.0 {
                fibres.push(Fibre {
                    z,
                    area: core_area,
                    material: core_mat.clone(),
                });
            }
            if cover_area > 1e-14 * h * self.width {
                fibres.push(Fibre {
                    z,
                    area: cover_area,
                    material: cover_mat.clone(),
                });
            }
        }
        for r in &self.bars {
            fibres.push(Fibre {
                z: r.z,
                area: r.area(),
                material: steel_mat.clone(),
            });
        }
        FibreSection::new(fibres)
    }

    pub fn steel_area(&self) -> f64 {
        self.bars.iter().map(BarRow::area).sum()
    }
}

/// Elastic rectangle split into `stripes` equal stripes.
pub fn elastic_rectangle(
    width: f64,
    depth: f64,
    modulus: f64,
    stripes: usize,
) -> Result<FibreSection> {
    if stripes == 0 || !(width > 0.0 && depth > 0.0) {
        return Err(FsdbError::InvalidInput(
            "elastic rectangle needs positive size and stripe count".into(),
        ));
    }
    let mat: Material = crate::materials::Elastic::new(modulus)?.into();
    let h = depth / stripes as f64;
    let fibres = (0..stripes)
        .map(|s| Fibre {
            z: -0.5 * depth + (s as f64 + 0.5) * h,
            area: width * h,
            material: mat.clone(),
        })
        .collect();
    FibreSection::new(fibres)
}
