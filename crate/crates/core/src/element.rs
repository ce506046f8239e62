//! Fibre beam element with adaptive (FSDB) or classical (DB) shape
//! functions.

use nalgebra::Matrix2;

use crate::error::{FsdbError, Result};
use crate::kernel::{
    beta_from_stiffness, eval_g2, eval_g2_prime, eval_g3, eval_g3_prime, LoadDistribution,
    LoadPrimitives, Mat2x6, Mat6, ShapeFunctions, StiffnessProfile, Vec6, BETA_MAX,
};
use crate::quadrature::QuadratureRule;
use crate::section::{update_betas, FibreSection, SectionStrain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    /// Adaptive stepped-beam shape functions.
    Fsdb,
    /// Linear axial and Hermite cubic transverse shape functions.
    Db,
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Formulation::Fsdb => "fsdb",
            Formulation::Db => "db",
        })
    }
}

impl std::str::FromStr for Formulation {
    type Err = FsdbError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsdb" => Ok(Formulation::Fsdb),
            "db" => Ok(Formulation::Db),
            other => Err(FsdbError::InvalidInput(format!(
                "unknown formulation '{other}' (expected fsdb or db)"
            ))),
        }
    }
}

/// Inner axial-equilibration loop settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxialEquilibration {
    pub enabled: bool,
    /// Relative tolerance on the spread of the Gauss-point axial forces.
    pub tol: f64,
    /// Absolute floor of the tolerance reference, as a fraction of `EA_ref`.
    pub floor_factor: f64,
    pub max_inner: usize,
}

impl Default for AxialEquilibration {
    fn default() -> Self {
        Self {
            enabled: true,
            tol: 1e-6,
            floor_factor: 1e-9,
            max_inner: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementOptions {
    pub formulation: Formulation,
    pub integration_points: usize,
    pub axial: AxialEquilibration,
    /// Refresh the shape functions at every state determination instead of
    /// once per converged step.
    pub update_per_iteration: bool,
    /// Include the axial-flexural coupling term in the flexural
    /// stiffness-loss parameter.
    pub flexural_coupling: bool,
}

impl Default for ElementOptions {
    fn default() -> Self {
        Self::fsdb()
    }
}

impl ElementOptions {
    pub fn fsdb() -> Self {
        Self {
            formulation: Formulation::Fsdb,
            integration_points: 10,
            axial: AxialEquilibration::default(),
            update_per_iteration: false,
            flexural_coupling: false,
        }
    }

    pub fn for_formulation(f: Formulation) -> Self {
        match f {
            Formulation::Fsdb => Self::fsdb(),
            Formulation::Db => Self::db(),
        }
    }

    pub fn db() -> Self {
        Self {
            formulation: Formulation::Db,
            axial: AxialEquilibration {
                enabled: false,
                ..AxialEquilibration::default()
            },
            ..Self::fsdb()
        }
    }
}

const MAX_BACKTRACKS: usize = 8;

/// Per-Gauss-point output record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussRecord {
    pub x_over_l: f64,
    pub eps0: f64,
    pub chi: f64,
    pub n: f64,
    pub m: f64,
    pub beta_x: f64,
    pub beta_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Snapshot {
    q: Vec6,
    fict: Vec<f64>,
    k: Mat6,
    f: Vec6,
    shapes: ShapeFunctions,
    b: Vec<Mat2x6>,
    inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub nodes: [usize; 2],
    length: f64,
    cos: f64,
    sin: f64,
    options: ElementOptions,
    rule: QuadratureRule,
    sections: Vec<FibreSection>,
    shapes: ShapeFunctions,
    b: Vec<Mat2x6>,
    /// Element loads in local axes (per unit length and concentrated).
    pub px: LoadDistribution,
    pub pz: LoadDistribution,
    q: Vec6,
    fict: Vec<f64>,
    k: Mat6,
    f: Vec6,
    /// Strain increments of the last converged step, per Gauss point.
    last_increment: Vec<Option<(f64, f64)>>,
    inner_iterations: usize,
    committed: Snapshot,
}

impl Element {
    /// Element between nodes at `xi` and `xj`, every Gauss point carrying a
    /// copy of `section`.
    pub fn new(
        nodes: [usize; 2],
        xi: [f64; 2],
        xj: [f64; 2],
        section: &FibreSection,
        options: ElementOptions,
    ) -> Result<Self> {
        let (dx, dz) = (xj[0] - xi[0], xj[1] - xi[1]);
        let length = dx.hypot(dz);
        if !(length > 0.0) {
            return Err(FsdbError::InvalidInput(format!(
                "element {:?} has zero length",
                nodes
            )));
        }
        let rule = QuadratureRule::gauss_lobatto(options.integration_points)?;
        let profile =
            StiffnessProfile::from_quadrature(&rule, length, section.ea_ref(), section.ei_ref())?;
        let shapes = ShapeFunctions::new(profile)?;
        let n = rule.len();
        let b = strain_matrices(&shapes, &rule);
        let k = integrate_stiffness(&b, &rule, length, &vec![section.tangent(); n]);
        let snapshot = Snapshot {
            q: Vec6::zeros(),
            fict: vec![0.0; n],
            k,
            f: Vec6::zeros(),
            shapes: shapes.clone(),
            b: b.clone(),
            inner_iterations: 0,
        };
        Ok(Self {
            nodes,
            length,
            cos: dx / length,
            sin: dz / length,
            options,
            sections: vec![section.clone(); n],
            rule,
            shapes,
            b,
            px: LoadDistribution::zero(),
            pz: LoadDistribution::zero(),
            q: Vec6::zeros(),
            fict: vec![0.0; n],
            k,
            f: Vec6::zeros(),
            last_increment: vec![None; n],
            inner_iterations: 0,
            committed: snapshot,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn options(&self) -> &ElementOptions {
        &self.options
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.rule
    }

    pub fn sections(&self) -> &[FibreSection] {
        &self.sections
    }

    pub fn profile(&self) -> &StiffnessProfile {
        &self.shapes.profile
    }

    pub fn shape_functions(&self) -> &ShapeFunctions {
        &self.shapes
    }

    /// Local displacements of the current trial state.
    pub fn local_displacements(&self) -> &Vec6 {
        &self.q
    }

    /// Tangent stiffness in local axes.
    pub fn local_stiffness(&self) -> &Mat6 {
        &self.k
    }

    /// Resisting forces in local axes.
    pub fn local_forces(&self) -> &Vec6 {
        &self.f
    }

    /// Inner axial-equilibration iterations used by the last state
    /// determination.
    pub fn inner_iterations(&self) -> usize {
        self.inner_iterations
    }

    /// Rotation from global to local DOFs.
    pub fn transform(&self) -> Mat6 {
        let (c, s) = (self.cos, self.sin);
        let mut t = Mat6::zeros();
        for o in [0, 3] {
            t[(o, o)] = c;
            t[(o, o + 1)] = s;
            t[(o + 1, o)] = -s;
            t[(o + 1, o + 1)] = c;
            t[(o + 2, o + 2)] = 1.0;
        }
        t
    }

    pub fn global_stiffness(&self) -> Mat6 {
        let t = self.transform();
        t.transpose() * self.k * t
    }

    pub fn global_forces(&self) -> Vec6 {
        self.transform().transpose() * self.f
    }

    /// Equivalent nodal forces of the element loads, in global axes.
    pub fn global_load_vector(&self) -> Result<Vec6> {
        Ok(self.transform().transpose() * self.external_load_vector()?)
    }

    /// Equivalent nodal forces of the element loads in local axes:
    /// quadrature of `N^T p` for the distributed part, `N^T(x_c) P` for the
    /// concentrated loads.
    pub fn external_load_vector(&self) -> Result<Vec6> {
        let mut p = Vec6::zeros();
        if self.px.is_zero() && self.pz.is_zero() {
            return Ok(p);
        }
        for (&xi, &w) in self.rule.points.iter().zip(&self.rule.weights) {
            let x = xi * self.length;
            let n = self.shapes.n(x)?;
            let load = nalgebra::Vector2::new(self.px.density(x), self.pz.density(x));
            p += n.transpose() * load * (w * self.length);
        }
        for (dist, row) in [(&self.px, 0), (&self.pz, 1)] {
            for &(xc, mag) in &dist.point_loads {
                let n = self.shapes.n(xc)?;
                p += n.row(row).transpose() * mag;
            }
        }
        Ok(p)
    }

    /// State determination for global nodal displacements `q_global`.
    pub fn set_trial_displacements(&mut self, q_global: &Vec6) -> Result<()> {
        self.q = self.transform() * q_global;
        if self.options.update_per_iteration && self.options.formulation == Formulation::Fsdb {
            // tangents of the previous evaluation drive the new profile
            self.update_profile(false)?;
        }
        // the state is a function of the committed state and `q` alone
        self.fict.clone_from(&self.committed.fict);
        for r in 0..self.rule.len() {
            let d = self.section_strain(r);
            self.sections[r].set_trial(&d);
        }
        self.inner_iterations = 0;
        if self.options.axial.enabled {
            self.equilibrate_axial()?;
        }
        let tangents: Vec<Matrix2<f64>> = self.sections.iter().map(FibreSection::tangent).collect();
        self.k = integrate_stiffness(&self.b, &self.rule, self.length, &tangents);
        if self.options.axial.enabled {
            if let Some(kc) = condense_axial(&self.k, &self.b, &self.rule, self.length, &tangents) {
                self.k = kc;
            }
        }
        self.f = Vec6::zeros();
        for (r, (&w, b)) in self.rule.weights.iter().zip(&self.b).enumerate() {
            self.f += b.transpose() * self.sections[r].resultants() * (w * self.length);
        }
        Ok(())
    }

    /// Committed section strain plus the strain of the displacement
    /// increment under the current shape functions.
    fn section_strain(&self, r: usize) -> SectionStrain {
        let mut d = self.sections[r].committed_strain() + self.b[r] * (self.q - self.committed.q);
        d[0] += self.fict[r];
        d
    }

    /// Current spread `max |N_r - mean|` and the allowed tolerance.
    pub fn axial_spread(&self) -> (f64, f64) {
        let ns: Vec<f64> = self.sections.iter().map(|s| s.resultants()[0]).collect();
        let mean = ns.iter().sum::<f64>() / ns.len() as f64;
        let spread = ns.iter().map(|n| (n - mean).abs()).fold(0.0, f64::max);
        let floor = self.options.axial.floor_factor * self.shapes.profile.ea_ref();
        (spread, self.options.axial.tol * mean.abs().max(floor))
    }

    fn equilibrate_axial(&mut self) -> Result<()> {
        let opts = self.options.axial;
        let n = self.rule.len();
        let profile = self.shapes.profile.clone();
        for it in 0..=opts.max_inner {
            let (spread, tol) = self.axial_spread();
            if spread <= tol {
                self.inner_iterations = it;
                return Ok(());
            }
            if it == opts.max_inner {
                return Err(FsdbError::AxialEquilibrium {
                    iterations: it,
                    spread,
                });
            }
            let de = self.axial_corrections(&profile)?;
            // backtrack when the full correction overshoots on softening or
            // nearly rigid-plastic sections
            let base = self.fict.clone();
            let mut alpha = 1.0;
            for _ in 0..=MAX_BACKTRACKS {
                for r in 0..n {
                    self.fict[r] = base[r] + alpha * de[r];
                    let d = self.section_strain(r);
                    self.sections[r].set_trial(&d);
                }
                if self.axial_spread().0 < spread {
                    break;
                }
                alpha *= 0.5;
            }
        }
        unreachable!("loop returns on its last iteration")
    }

    /// Axial strain corrections that level the Gauss-point axial forces:
    /// displacement field of the element as a bar clamped at both ends,
    /// stepped by the axial tangents and loaded by the force jumps at the
    /// segment boundaries.
    fn axial_corrections(&self, profile: &StiffnessProfile) -> Result<Vec<f64>> {
        let ea_ref = profile.ea_ref();
        let kxx: Vec<f64> = self.sections.iter().map(|s| s.tangent()[(0, 0)]).collect();
        let ns: Vec<f64> = self.sections.iter().map(|s| s.resultants()[0]).collect();
        if kxx.iter().any(|&k| k < (1.0 - BETA_MAX) * ea_ref) {
            // a softening or nearly rigid-plastic segment is outside the
            // stepped-bar parametrization; the same clamped bar solved
            // segment by segment keeps the sign of its stiffness
            if let Some(de) = segmentwise_corrections(&self.rule.weights, &kxx, &ns) {
                return Ok(de);
            }
        }
        stepped_bar_corrections(&self.rule.points, self.length, profile, &kxx, &ns)
    }

    /// Recompute the stiffness-loss parameters from the section tangents.
    fn update_profile(&mut self, use_increments: bool) -> Result<()> {
        if self.options.formulation == Formulation::Db {
            return Ok(());
        }
        let profile = &self.shapes.profile;
        let (ea, ei) = (profile.ea_ref(), profile.ei_ref());
        let mut bx = Vec::with_capacity(self.sections.len());
        let mut bz = Vec::with_capacity(self.sections.len());
        for (s, inc) in self.sections.iter().zip(&self.last_increment) {
            let inc = if use_increments { *inc } else { None };
            let (x, z) = update_betas(
                &s.tangent(),
                ea,
                ei,
                inc,
                s.height(),
                self.options.flexural_coupling,
            );
            bx.push(x);
            bz.push(z);
        }
        if bx == profile.beta_x() && bz == profile.beta_z() {
            return Ok(());
        }
        let new_profile = profile.clone().with_betas(&bx, &bz)?;
        self.shapes = ShapeFunctions::new(new_profile)?;
        self.b = strain_matrices(&self.shapes, &self.rule);
        Ok(())
    }

    /// Accept the current trial state and, for FSDB elements, adapt the
    /// shape functions to the converged tangents.
    pub fn commit(&mut self) -> Result<()> {
        for (s, inc) in self.sections.iter_mut().zip(self.last_increment.iter_mut()) {
            let d = s.strain() - s.committed_strain();
            *inc = Some((d[0], d[1]));
            s.commit();
        }
        if !self.options.update_per_iteration {
            self.update_profile(true)?;
        }
        // the committed strains already contain the axial correction
        self.fict.iter_mut().for_each(|e| *e = 0.0);
        self.committed = Snapshot {
            q: self.q,
            fict: self.fict.clone(),
            k: self.k,
            f: self.f,
            shapes: self.shapes.clone(),
            b: self.b.clone(),
            inner_iterations: self.inner_iterations,
        };
        Ok(())
    }

    /// Discard the trial state.
    pub fn revert(&mut self) {
        for s in &mut self.sections {
            s.revert();
        }
        let c = &self.committed;
        self.q = c.q;
        self.fict.clone_from(&c.fict);
        self.k = c.k;
        self.f = c.f;
        self.shapes.clone_from(&c.shapes);
        self.b.clone_from(&c.b);
        self.inner_iterations = c.inner_iterations;
    }

    pub fn gauss_records(&self) -> Vec<GaussRecord> {
        let p = &self.shapes.profile;
        self.sections
            .iter()
            .enumerate()
            .map(|(r, s)| {
                let d = s.strain();
                let f = s.resultants();
                GaussRecord {
                    x_over_l: self.rule.points[r],
                    eps0: d[0],
                    chi: d[1],
                    n: f[0],
                    m: f[1],
                    beta_x: p.beta_x()[r],
                    beta_z: p.beta_z()[r],
                }
            })
            .collect()
    }

    /// Transverse shear at each Gauss point from the free-body equilibrium
    /// of the part between the section and node `j`.
    pub fn shear_forces(&self) -> Vec<f64> {
        let l = self.length;
        let total = self.pz.primitive(1, l);
        self.rule
            .points
            .iter()
            .map(|&xi| self.f[4] + total - self.pz.primitive(1, xi * l))
            .collect()
    }
}

/// Axial strain corrections from a stepped bar with segment stiffnesses `kxx`
/// loaded by the jumps of the section forces `ns`.
fn stepped_bar_corrections(
    points: &[f64],
    l: f64,
    profile: &StiffnessProfile,
    kxx: &[f64],
    ns: &[f64],
) -> Result<Vec<f64>> {
    let n = points.len();
    let ea_ref = profile.ea_ref();
    let bx: Vec<f64> = kxx
        .iter()
        .map(|&k| beta_from_stiffness(k, ea_ref))
        .collect();
    let inner = profile.clone().with_betas(&bx, &vec![0.0; n])?;
    let x_disc = inner.x_disc();
    let loads = LoadDistribution {
        polynomial: Vec::new(),
        point_loads: (0..n - 1)
            .map(|i| (x_disc[i + 1], ns[i + 1] - ns[i]))
            .collect(),
    };
    let ratio = eval_g3(l, &inner, &loads) / eval_g2(l, &inner);
    Ok(points
        .iter()
        .map(|&p| {
            let x = p * l;
            -ratio * eval_g2_prime(x, &inner) + eval_g3_prime(x, &inner, &loads)
        })
        .collect())
}

/// Clamped stepped bar with one uniform segment per Gauss point: the force
/// in segment `r` is `target - ns[r]`, and `target` makes the elongations
/// sum to zero.
fn segmentwise_corrections(w: &[f64], kxx: &[f64], ns: &[f64]) -> Option<Vec<f64>> {
    let flex: f64 = w.iter().zip(kxx).map(|(w, k)| w / k).sum();
    let scale: f64 = w.iter().zip(kxx).map(|(w, k)| w / k.abs()).sum();
    if !(flex.abs() > 1e-8 * scale) {
        return None;
    }
    let target = w
        .iter()
        .zip(kxx)
        .zip(ns)
        .map(|((w, k), n)| w * n / k)
        .sum::<f64>()
        / flex;
    Some(kxx.iter().zip(ns).map(|(k, n)| (target - n) / k).collect())
}

fn strain_matrices(shapes: &ShapeFunctions, rule: &QuadratureRule) -> Vec<Mat2x6> {
    let l = shapes.profile.length();
    rule.points
        .iter()
        .enumerate()
        .map(|(r, &xi)| shapes.b_in_segment(xi * l, r))
        .collect()
}

/// Tangent of the axially equilibrated element: the zero-mean axial strain
/// corrections are internal unknowns, eliminated by static condensation.
fn condense_axial(
    k: &Mat6,
    b: &[Mat2x6],
    rule: &QuadratureRule,
    length: f64,
    kt: &[Matrix2<f64>],
) -> Option<Mat6> {
    let n = b.len();
    let w = &rule.weights;
    // K_qe column r and diagonal K_ee
    let kqe: Vec<Vec6> = (0..n)
        .map(|r| b[r].transpose() * kt[r].column(0) * (w[r] * length))
        .collect();
    let kee: Vec<f64> = (0..n).map(|r| kt[r][(0, 0)] * w[r] * length).collect();
    // basis of zero-mean corrections: e_i - (w_i / w_n) e_n
    let m = n - 1;
    let last = n - 1;
    let mut kcc = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut kqc = nalgebra::DMatrix::<f64>::zeros(6, m);
    for i in 0..m {
        let ai = w[i] / w[last];
        for j in 0..m {
            let aj = w[j] / w[last];
            kcc[(i, j)] = ai * aj * kee[last] + if i == j { kee[i] } else { 0.0 };
        }
        let col = kqe[i] - kqe[last] * ai;
        kqc.set_column(i, &col);
    }
    let x = kcc.lu().solve(&kqc.transpose())?;
    let corr = &kqc * x;
    let mut out = *k;
    for a in 0..6 {
        for c in 0..6 {
            out[(a, c)] -= corr[(a, c)];
        }
    }
    let out = (out + out.transpose()) * 0.5;
    out.iter().all(|v| v.is_finite()).then_some(out)
}

fn integrate_stiffness(
    b: &[Mat2x6],
    rule: &QuadratureRule,
    length: f64,
    k: &[Matrix2<f64>],
) -> Mat6 {
    let mut ke = Mat6::zeros();
    for ((bm, km), &w) in b.iter().zip(k).zip(&rule.weights) {
        ke += bm.transpose() * km * bm * (w * length);
    }
    // exact symmetry regardless of summation order
    (ke + ke.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::elastic_rectangle;

    const E: f64 = 30e9;

    fn elastic_element(opts: ElementOptions) -> Element {
        let s = elastic_rectangle(0.3, 0.4, E, 40).unwrap();
        Element::new([0, 1], [0.0, 0.0], [3.0, 0.0], &s, opts).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn segmentwise_and_stepped_bar_corrections_agree() {
        let el = elastic_element(ElementOptions {
            integration_points: 5,
            ..ElementOptions::fsdb()
        });
        let profile = &el.shapes.profile;
        let ea = profile.ea_ref();
        let kxx = [1.0, 0.4, 0.05, 0.7, 0.9].map(|f| f * ea);
        let ns = [1.0e5, 2.5e5, -0.8e5, 0.3e5, 1.2e5];
        let a = stepped_bar_corrections(&el.rule.points, el.length, profile, &kxx, &ns).unwrap();
        let b = segmentwise_corrections(&el.rule.weights, &kxx, &ns).unwrap();
        let scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * scale, "{x} vs {y}");
        }
        // equal forces after correction
        let n0 = ns[0] + kxx[0] * b[0];
        for r in 1..5 {
            assert!(rel(ns[r] + kxx[r] * b[r], n0) < 1e-10);
        }
    }

    #[test]
    fn elastic_stiffness_is_euler_bernoulli() {
        for n in [3, 5, 10] {
            let el = elastic_element(ElementOptions {
                integration_points: n,
                ..ElementOptions::fsdb()
            });
            let s = &el.sections()[0];
            let (ea, ei, l) = (s.ea_ref(), s.ei_ref(), 3.0);
            let k = el.local_stiffness();
            assert!(rel(k[(0, 0)], ea / l) < 1e-10);
            assert!(rel(k[(1, 1)], 12.0 * ei / l.powi(3)) < 1e-10, "n={n}");
            assert!(rel(k[(2, 2)], 4.0 * ei / l) < 1e-10);
            assert!(rel(k[(2, 5)], 2.0 * ei / l) < 1e-10);
            assert_eq!(*k, k.transpose());
            let rigid = [
                Vec6::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
                Vec6::new(0.0, 1.0, 0.0, 0.0, 1.0, 0.0),
                Vec6::new(0.0, 0.0, 1.0, 0.0, -l, 1.0),
            ];
            for q in rigid {
                assert!((k * q).norm() <= 1e-9 * k.norm());
            }
        }
    }

    #[test]
    fn zero_displacement_gives_zero_forces() {
        let mut el = elastic_element(ElementOptions::fsdb());
        el.set_trial_displacements(&Vec6::zeros()).unwrap();
        assert_eq!(*el.local_forces(), Vec6::zeros());
    }

    #[test]
    fn elastic_forces_equal_stiffness_times_displacement() {
        let mut el = elastic_element(ElementOptions::fsdb());
        let ea = el.sections()[0].ea_ref();
        let delta = 1e-4;
        el.set_trial_displacements(&Vec6::new(0.0, 0.0, 0.0, delta, 0.0, 0.0))
            .unwrap();
        let f = el.local_forces();
        assert!(rel(f[3], ea * delta / 3.0) < 1e-10 && rel(-f[0], ea * delta / 3.0) < 1e-10);
        let q = Vec6::new(1e-4, -2e-3, 1e-3, 3e-4, 5e-3, -2e-3);
        el.set_trial_displacements(&q).unwrap();
        let kq = el.local_stiffness() * q;
        assert!((el.local_forces() - kq).norm() <= 1e-10 * kq.norm());
        // discrete virtual work
        let w: f64 = el
            .sections()
            .iter()
            .zip(&el.quadrature().weights)
            .map(|(s, &w)| s.strain().dot(&s.resultants()) * w * 3.0)
            .sum();
        assert!(rel(q.dot(el.local_forces()), w) < 1e-10);
    }

    #[test]
    fn db_and_fsdb_agree_elastically() {
        let mut a = elastic_element(ElementOptions::fsdb());
        let mut b = elastic_element(ElementOptions::db());
        let q = Vec6::new(1e-4, -2e-3, 1e-3, 3e-4, 5e-3, -2e-3);
        a.set_trial_displacements(&q).unwrap();
        b.set_trial_displacements(&q).unwrap();
        assert!((a.local_forces() - b.local_forces()).norm() <= 1e-10 * a.local_forces().norm());
        a.commit().unwrap();
        assert!(a.profile().is_homogeneous());
    }

    #[test]
    fn rotated_element_transforms_consistently() {
        let s = elastic_rectangle(0.3, 0.4, E, 40).unwrap();
        let a = Element::new([0, 1], [0.0, 0.0], [3.0, 0.0], &s, ElementOptions::fsdb()).unwrap();
        let b = Element::new([0, 1], [1.0, 2.0], [1.0, 5.0], &s, ElementOptions::fsdb()).unwrap();
        let t = b.transform();
        assert!((t.transpose() * t - Mat6::identity()).norm() < 1e-15);
        let kg = b.global_stiffness();
        assert!((t * kg * t.transpose() - a.local_stiffness()).norm() <= 1e-9 * kg.norm());
    }

    #[test]
    fn halved_section_sets_its_beta() {
        let mut el = elastic_element(ElementOptions::fsdb());
        let half = elastic_rectangle(0.3, 0.4, 0.5 * E, 40).unwrap();
        el.sections[3] = half;
        el.set_trial_displacements(&Vec6::zeros()).unwrap();
        el.commit().unwrap();
        for (r, (&bx, &bz)) in el
            .profile()
            .beta_x()
            .iter()
            .zip(el.profile().beta_z())
            .enumerate()
        {
            let expect = if r == 3 { 0.5 } else { 0.0 };
            assert!((bx - expect).abs() < 1e-12 && (bz - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn axial_loop_removes_spread() {
        // one softer section: bending makes N vary along the element
        let mut el = elastic_element(ElementOptions::fsdb());
        let s = elastic_rectangle(0.3, 0.4, E, 40).unwrap();
        let mut fibres = s.fibres().to_vec();
        fibres.truncate(30); // asymmetric: top fibres removed
        el.sections[0] = FibreSection::new(fibres).unwrap();
        let q = Vec6::new(0.0, 0.0, 2e-3, 0.0, 0.0, 0.0);
        let mut off = el.clone();
        off.options.axial.enabled = false;
        off.set_trial_displacements(&q).unwrap();
        let (spread_off, tol) = off.axial_spread();
        assert!(spread_off > 1e3 * tol);
        el.set_trial_displacements(&q).unwrap();
        let (spread, tol) = el.axial_spread();
        assert!(spread <= tol, "{spread} > {tol}");
        assert!(el.inner_iterations() >= 1);
        // correction keeps the element ends fixed: its integral vanishes
        let int: f64 = el
            .fict
            .iter()
            .zip(&el.rule.weights)
            .map(|(e, w)| e * w)
            .sum();
        assert!(int.abs() < 1e-12);
    }

    #[test]
    fn axial_correction_matches_clamped_bar() {
        // single jump P: correction is the clamped-bar strain field
        let el = elastic_element(ElementOptions::fsdb());
        let l = 3.0;
        let ea = el.profile().ea_ref();
        let xc = el.profile().x_disc()[5];
        let loads = LoadDistribution::point(xc, 1e5);
        let p = el.profile();
        let ratio = eval_g3(l, p, &loads) / eval_g2(l, p);
        for x in [0.2, 1.0, 2.5] {
            let de = -ratio * eval_g2_prime(x, p) + eval_g3_prime(x, p, &loads);
            let expect = if x < xc {
                1e5 * (l - xc) / (l * ea)
            } else {
                -1e5 * xc / (l * ea)
            };
            assert!(rel(de, expect) < 1e-12);
        }
    }

    #[test]
    fn external_loads() {
        let mut el = elastic_element(ElementOptions::fsdb());
        assert_eq!(el.external_load_vector().unwrap(), Vec6::zeros());
        let (q, p, l) = (2e3, 5e2, 3.0);
        el.pz = LoadDistribution::uniform(q);
        el.px = LoadDistribution::uniform(p);
        let v = el.external_load_vector().unwrap();
        assert!(rel(v[0], p * l / 2.0) < 1e-12 && rel(v[3], p * l / 2.0) < 1e-12);
        assert!(rel(v[1], q * l / 2.0) < 1e-12 && rel(v[4], q * l / 2.0) < 1e-12);
        // rotation DOFs are -u_z', so the moment entries flip sign
        assert!(rel(-v[2], q * l * l / 12.0) < 1e-12 && rel(v[5], q * l * l / 12.0) < 1e-12);
    }

    #[test]
    fn shear_from_end_forces() {
        let mut el = elastic_element(ElementOptions::fsdb());
        el.set_trial_displacements(&Vec6::zeros()).unwrap();
        assert!(el.shear_forces().iter().all(|&t| t == 0.0));
        // cantilever clamped at i, tip displacement from a tip force
        let ei = el.profile().ei_ref();
        let f = 1e4;
        let l: f64 = 3.0;
        let uz = f * l.powi(3) / (3.0 * ei);
        let phi = -f * l * l / (2.0 * ei);
        el.set_trial_displacements(&Vec6::new(0.0, 0.0, 0.0, 0.0, uz, phi))
            .unwrap();
        for t in el.shear_forces() {
            assert!(rel(t, f) < 1e-9);
        }
        // end rotations only
        el.set_trial_displacements(&Vec6::new(0.0, 0.0, 1e-3, 0.0, 0.0, 4e-4))
            .unwrap();
        let q = el.local_forces();
        for t in el.shear_forces() {
            assert!(rel(t, (q[2] + q[5]) / l) < 1e-9);
        }
    }

    #[test]
    fn revert_restores_committed_state() {
        let mut el = elastic_element(ElementOptions::fsdb());
        el.set_trial_displacements(&Vec6::new(0.0, 0.0, 0.0, 1e-4, 1e-3, 0.0))
            .unwrap();
        el.commit().unwrap();
        let snap = el.clone();
        el.set_trial_displacements(&Vec6::new(0.0, 0.0, 0.0, 5e-4, 1e-2, 1e-3))
            .unwrap();
        el.revert();
        assert_eq!(el, snap);
    }
}
