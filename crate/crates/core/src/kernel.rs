//! Closed-form stepped-beam solution and the adaptive shape functions built
//! on top of it.
//!
//! A stepped beam has piecewise-constant axial and flexural stiffness with
//! jumps at `x_disc[i]`. Writing the stiffness loss of segment `i` as `beta_i`
//! and its compact transform as
//! `beta*_i = beta_i/(1-beta_i) - beta_{i-1}/(1-beta_{i-1})` (with
//! `beta_0 = 0`), the homogeneous solution of the stepped Euler-Bernoulli
//! beam is spanned by
//!
//! ```text
//! g2(x) = -x - sum beta*_x,i (x - x_i) U(x - x_i)
//! f3(x) =  x^2 + sum beta*_z,j (x - x_j)^2 U(x - x_j)
//! f4(x) =  x^3 + sum beta*_z,j (x^3 - 3 x_j^2 x + 2 x_j^3) U(x - x_j)
//! ```
//!
//! and imposing the six end displacements gives the shape functions. All
//! functions take the physical abscissa `x` in `[0, L]`. Wherever a
//! function is discontinuous (strain matrix, second derivatives) the value
//! returned at `x = x_i` is the right limit, i.e. segment `i`.

use nalgebra::{SMatrix, SVector};

use crate::error::{FsdbError, Result};
use crate::quadrature::QuadratureRule;

pub type Mat2x6 = SMatrix<f64, 2, 6>;
pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Vec6 = SVector<f64, 6>;

/// Upper bound for the stiffness-loss parameters used by the shape
/// functions; `beta*` diverges as `beta -> 1`.
pub const BETA_MAX: f64 = 0.9999;
/// Tangent stiffness floor relative to the reference stiffness.
pub const STIFFNESS_FLOOR: f64 = 1e-6;
/// Relative threshold on `|kappa| / L^4`.
pub const KAPPA_TOL: f64 = 1e-12;

/// Clamp a raw stiffness-loss value into the admissible range.
pub fn clamp_beta(beta: f64) -> f64 {
    if beta.is_nan() {
        return BETA_MAX;
    }
    beta.clamp(0.0, BETA_MAX.min(1.0 - STIFFNESS_FLOOR))
}

/// Stiffness-loss parameter for a tangent `stiffness` against `reference`.
pub fn beta_from_stiffness(stiffness: f64, reference: f64) -> f64 {
    let floored = stiffness.max(STIFFNESS_FLOOR * reference);
    clamp_beta(1.0 - floored / reference)
}

/// Piecewise-constant axial/flexural stiffness description of one element.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessProfile {
    length: f64,
    x_disc: Vec<f64>,
    beta_x: Vec<f64>,
    beta_z: Vec<f64>,
    beta_x_star: Vec<f64>,
    beta_z_star: Vec<f64>,
    ea_ref: f64,
    ei_ref: f64,
}

impl StiffnessProfile {
    /// Homogeneous profile (`beta = 0` everywhere) with the given step
    /// abscissae.
    pub fn new(length: f64, x_disc: Vec<f64>, ea_ref: f64, ei_ref: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(FsdbError::InvalidInput(format!(
                "element length must be positive, got {length}"
            )));
        }
        if !(ea_ref > 0.0 && ei_ref > 0.0) {
            return Err(FsdbError::InvalidInput(format!(
                "reference stiffnesses must be positive (EA = {ea_ref}, EI = {ei_ref})"
            )));
        }
        if x_disc.is_empty() || x_disc[0] != 0.0 {
            return Err(FsdbError::InvalidInput(
                "first step abscissa must be 0".into(),
            ));
        }
        if x_disc.windows(2).any(|w| w[1] <= w[0]) || x_disc.iter().any(|&x| x >= length) {
            return Err(FsdbError::InvalidInput(
                "step abscissae must be strictly ascending and below the element length".into(),
            ));
        }
        let n = x_disc.len();
        Ok(Self {
            length,
            x_disc,
            beta_x: vec![0.0; n],
            beta_z: vec![0.0; n],
            beta_x_star: vec![0.0; n],
            beta_z_star: vec![0.0; n],
            ea_ref,
            ei_ref,
        })
    }

    /// Homogeneous profile whose steps follow the cumulative weights of `rule`.
    pub fn from_quadrature(
        rule: &QuadratureRule,
        length: f64,
        ea_ref: f64,
        ei_ref: f64,
    ) -> Result<Self> {
        Self::new(length, rule.step_abscissae(length), ea_ref, ei_ref)
    }

    /// Replace the stiffness-loss parameters. Values are clamped to
    /// `[0, BETA_MAX]` before the compact transform is taken.
    pub fn set_betas(&mut self, beta_x: &[f64], beta_z: &[f64]) -> Result<()> {
        let n = self.x_disc.len();
        if beta_x.len() != n || beta_z.len() != n {
            return Err(FsdbError::InvalidInput(format!(
                "expected {n} stiffness-loss values per direction, got {} and {}",
                beta_x.len(),
                beta_z.len()
            )));
        }
        self.beta_x = beta_x.iter().map(|&b| clamp_beta(b)).collect();
        self.beta_z = beta_z.iter().map(|&b| clamp_beta(b)).collect();
        self.beta_x_star = compact_transform(&self.beta_x);
        self.beta_z_star = compact_transform(&self.beta_z);
        Ok(())
    }

    pub fn with_betas(mut self, beta_x: &[f64], beta_z: &[f64]) -> Result<Self> {
        self.set_betas(beta_x, beta_z)?;
        Ok(self)
    }

    pub fn reset(&mut self) {
        let n = self.x_disc.len();
        self.beta_x = vec![0.0; n];
        self.beta_z = vec![0.0; n];
        self.beta_x_star = vec![0.0; n];
        self.beta_z_star = vec![0.0; n];
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn x_disc(&self) -> &[f64] {
        &self.x_disc
    }
    pub fn beta_x(&self) -> &[f64] {
        &self.beta_x
    }
    pub fn beta_z(&self) -> &[f64] {
        &self.beta_z
    }
    pub fn beta_x_star(&self) -> &[f64] {
        &self.beta_x_star
    }
    pub fn beta_z_star(&self) -> &[f64] {
        &self.beta_z_star
    }
    pub fn ea_ref(&self) -> f64 {
        self.ea_ref
    }
    pub fn ei_ref(&self) -> f64 {
        self.ei_ref
    }
    pub fn n_segments(&self) -> usize {
        self.x_disc.len()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.beta_x_star
            .iter()
            .chain(&self.beta_z_star)
            .all(|&b| b == 0.0)
    }

    /// Segment containing `x`, taking the right limit at a step.
    pub fn segment(&self, x: f64) -> usize {
        self.x_disc.partition_point(|&xi| xi <= x).saturating_sub(1)
    }

    /// End abscissa of segment `seg`.
    pub fn segment_end(&self, seg: usize) -> f64 {
        self.x_disc.get(seg + 1).copied().unwrap_or(self.length)
    }

    /// `1 + sum_{i <= seg} beta*_x,i`, the axial compliance amplification of
    /// segment `seg`.
    pub fn axial_factor(&self, seg: usize) -> f64 {
        1.0 + self.beta_x_star[..=seg].iter().sum::<f64>()
    }

    /// `1 + sum_{j <= seg} beta*_z,j`.
    pub fn flexural_factor(&self, seg: usize) -> f64 {
        1.0 + self.beta_z_star[..=seg].iter().sum::<f64>()
    }

    /// Axial stiffness of segment `seg`.
    pub fn segment_ea(&self, seg: usize) -> f64 {
        self.ea_ref * (1.0 - self.beta_x[seg])
    }

    /// Flexural stiffness of segment `seg`.
    pub fn segment_ei(&self, seg: usize) -> f64 {
        self.ei_ref * (1.0 - self.beta_z[seg])
    }

    fn check_abscissa(&self, x: f64) -> Result<()> {
        let tol = 1e-12 * self.length;
        if x < -tol || x > self.length + tol || x.is_nan() {
            return Err(FsdbError::InvalidInput(format!(
                "abscissa {x} outside [0, {}]",
                self.length
            )));
        }
        Ok(())
    }
}

fn compact_transform(beta: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    beta.iter()
        .map(|&b| {
            let cur = b / (1.0 - b);
            let star = cur - prev;
            prev = cur;
            star
        })
        .collect()
}

fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Homogeneous axial solution `g2(x)`.
pub fn eval_g2(x: f64, profile: &StiffnessProfile) -> f64 {
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_x_star)
        .map(|(&xi, &b)| b * (x - xi) * heaviside(x - xi))
        .sum();
    -x - steps
}

/// `g2'(x)` on segment `seg`.
fn g2_prime_seg(profile: &StiffnessProfile, seg: usize) -> f64 {
    -profile.axial_factor(seg)
}

pub fn eval_g2_prime(x: f64, profile: &StiffnessProfile) -> f64 {
    g2_prime_seg(profile, profile.segment(x))
}

/// Homogeneous flexural solution `f3(x)`.
pub fn eval_f3(x: f64, profile: &StiffnessProfile) -> f64 {
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xj, &b)| b * (x - xj).powi(2) * heaviside(x - xj))
        .sum();
    x * x + steps
}

pub fn eval_f3_prime(x: f64, profile: &StiffnessProfile) -> f64 {
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xj, &b)| 2.0 * b * (x - xj) * heaviside(x - xj))
        .sum();
    2.0 * x + steps
}

fn f3_second_seg(profile: &StiffnessProfile, seg: usize) -> f64 {
    2.0 * profile.flexural_factor(seg)
}

/// Homogeneous flexural solution `f4(x)`.
pub fn eval_f4(x: f64, profile: &StiffnessProfile) -> f64 {
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xj, &b)| b * (x.powi(3) - 3.0 * xj * xj * x + 2.0 * xj.powi(3)) * heaviside(x - xj))
        .sum();
    x.powi(3) + steps
}

pub fn eval_f4_prime(x: f64, profile: &StiffnessProfile) -> f64 {
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xj, &b)| b * (3.0 * x * x - 3.0 * xj * xj) * heaviside(x - xj))
        .sum();
    3.0 * x * x + steps
}

fn f4_second_seg(x: f64, profile: &StiffnessProfile, seg: usize) -> f64 {
    6.0 * x * profile.flexural_factor(seg)
}

/// Source of the successive primitives of a load distribution. Primitives
/// of every order vanish at `x = 0`.
pub trait LoadPrimitives {
    /// `order`-th primitive at `x` (`order >= 1`).
    fn primitive(&self, order: u32, x: f64) -> f64;
}

/// Polynomial distributed load plus concentrated (Dirac) loads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadDistribution {
    /// `p(x) = sum c_k x^k`.
    pub polynomial: Vec<f64>,
    /// `(position, magnitude)` pairs; positions strictly inside the element.
    pub point_loads: Vec<(f64, f64)>,
}

impl LoadDistribution {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn uniform(q: f64) -> Self {
        Self {
            polynomial: vec![q],
            point_loads: Vec::new(),
        }
    }

    pub fn point(position: f64, magnitude: f64) -> Self {
        Self {
            polynomial: Vec::new(),
            point_loads: vec![(position, magnitude)],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.polynomial.iter().all(|&c| c == 0.0) && self.point_loads.iter().all(|&(_, p)| p == 0.0)
    }

    /// Value of the distributed (polynomial) part.
    pub fn density(&self, x: f64) -> f64 {
        self.polynomial
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

impl LoadPrimitives for LoadDistribution {
    fn primitive(&self, order: u32, x: f64) -> f64 {
        debug_assert!(order >= 1);
        let poly: f64 = self
            .polynomial
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let m = m as u32;
                c * x.powi((m + order) as i32) * factorial(m) / factorial(m + order)
            })
            .sum();
        let points: f64 = self
            .point_loads
            .iter()
            .map(|&(xc, p)| {
                p * (x - xc).powi(order as i32 - 1) / factorial(order - 1) * heaviside(x - xc)
            })
            .sum();
        poly + points
    }
}

/// Axial particular solution `g3(x)` for the load `px`.
pub fn eval_g3<P: LoadPrimitives + ?Sized>(x: f64, profile: &StiffnessProfile, px: &P) -> f64 {
    let p2 = px.primitive(2, x);
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_x_star)
        .map(|(&xi, &b)| b * (p2 - px.primitive(2, xi)) * heaviside(x - xi))
        .sum();
    -(p2 + steps) / profile.ea_ref
}

pub fn eval_g3_prime<P: LoadPrimitives + ?Sized>(
    x: f64,
    profile: &StiffnessProfile,
    px: &P,
) -> f64 {
    let seg = profile.segment(x);
    -profile.axial_factor(seg) * px.primitive(1, x) / profile.ea_ref
}

/// Flexural particular solution `f5(x)` for the load `pz`.
pub fn eval_f5<P: LoadPrimitives + ?Sized>(x: f64, profile: &StiffnessProfile, pz: &P) -> f64 {
    let p4 = pz.primitive(4, x);
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xi, &b)| {
            b * (p4 - pz.primitive(4, xi) - pz.primitive(3, xi) * (x - xi)) * heaviside(x - xi)
        })
        .sum();
    (p4 + steps) / profile.ei_ref
}

pub fn eval_f5_prime<P: LoadPrimitives + ?Sized>(
    x: f64,
    profile: &StiffnessProfile,
    pz: &P,
) -> f64 {
    let p3 = pz.primitive(3, x);
    let steps: f64 = profile
        .x_disc
        .iter()
        .zip(&profile.beta_z_star)
        .map(|(&xi, &b)| b * (p3 - pz.primitive(3, xi)) * heaviside(x - xi))
        .sum();
    (p3 + steps) / profile.ei_ref
}

pub fn eval_f5_second<P: LoadPrimitives + ?Sized>(
    x: f64,
    profile: &StiffnessProfile,
    pz: &P,
) -> f64 {
    let seg = profile.segment(x);
    profile.flexural_factor(seg) * pz.primitive(2, x) / profile.ei_ref
}

/// Coefficients of the adaptive shape functions
/// `N_x,k = A_k1 + A_k2 g2(x)` and
/// `N_z,j = C_j1 + C_j2 x + C_j3 f3(x) + C_j4 f4(x)`.
///
/// DOF order is `(u_x^i, u_z^i, phi^i, u_x^j, u_z^j, phi^j)` with the
/// rotation `phi = -u_z'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeCoeffs {
    pub axial: [[f64; 2]; 2],
    pub transverse: [[f64; 4]; 4],
    pub kappa: f64,
    g2_l: f64,
    f3_l: f64,
    f3p_l: f64,
    f4_l: f64,
    f4p_l: f64,
}

impl ShapeCoeffs {
    /// Constants `(C3, C4)` of `c3 f3 + c4 f4` matching a residual end
    /// displacement `r_disp` and slope `r_slope` at `x = L` (both vanish
    /// at `x = 0`).
    fn end_match(&self, r_disp: f64, r_slope: f64) -> (f64, f64) {
        (
            (r_disp * self.f4p_l - r_slope * self.f4_l) / self.kappa,
            (r_slope * self.f3_l - r_disp * self.f3p_l) / self.kappa,
        )
    }
}

/// Solve the end conditions for the current profile.
pub fn shape_coeffs(profile: &StiffnessProfile) -> Result<ShapeCoeffs> {
    let l = profile.length;
    let g2_l = eval_g2(l, profile);
    let f3_l = eval_f3(l, profile);
    let f3p_l = eval_f3_prime(l, profile);
    let f4_l = eval_f4(l, profile);
    let f4p_l = eval_f4_prime(l, profile);
    let kappa = f3_l * f4p_l - f4_l * f3p_l;
    let threshold = KAPPA_TOL * l.powi(4);
    if !(kappa.abs() >= threshold) {
        return Err(FsdbError::DegenerateKappa {
            kappa: kappa.abs(),
            threshold,
        });
    }
    let mut c = ShapeCoeffs {
        axial: [[1.0, -1.0 / g2_l], [0.0, 1.0 / g2_l]],
        transverse: [[0.0; 4]; 4],
        kappa,
        g2_l,
        f3_l,
        f3p_l,
        f4_l,
        f4p_l,
    };
    // (u(0), u'(0), u(L), u'(L)) for each transverse DOF; u'(0) = -phi_i.
    let targets = [
        (1.0, 0.0, 0.0, 0.0),
        (0.0, -1.0, 0.0, 0.0),
        (0.0, 0.0, 1.0, 0.0),
        (0.0, 0.0, 0.0, -1.0),
    ];
    for (j, &(u0, s0, ul, sl)) in targets.iter().enumerate() {
        let (c3, c4) = c.end_match(ul - u0 - s0 * l, sl - s0);
        c.transverse[j] = [u0, s0, c3, c4];
    }
    Ok(c)
}

/// Shape functions of one element, bundling the profile with its
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunctions {
    pub profile: StiffnessProfile,
    pub coeffs: ShapeCoeffs,
}

impl ShapeFunctions {
    pub fn new(profile: StiffnessProfile) -> Result<Self> {
        let coeffs = shape_coeffs(&profile)?;
        Ok(Self { profile, coeffs })
    }

    pub fn n(&self, x: f64) -> Result<Mat2x6> {
        eval_n(x, &self.profile, &self.coeffs)
    }

    pub fn b(&self, x: f64) -> Result<Mat2x6> {
        eval_b(x, &self.profile, &self.coeffs)
    }

    /// Strain matrix on segment `seg` at `x` (one-sided evaluation).
    pub fn b_in_segment(&self, x: f64, seg: usize) -> Mat2x6 {
        b_in_segment(x, seg, &self.profile, &self.coeffs)
    }
}

/// Shape-function matrix `N(x)`; row 0 interpolates `u_x`, row 1 `u_z`.
pub fn eval_n(x: f64, profile: &StiffnessProfile, coeffs: &ShapeCoeffs) -> Result<Mat2x6> {
    profile.check_abscissa(x)?;
    let g2 = eval_g2(x, profile);
    let f3 = eval_f3(x, profile);
    let f4 = eval_f4(x, profile);
    let mut n = Mat2x6::zeros();
    n[(0, 0)] = coeffs.axial[0][0] + coeffs.axial[0][1] * g2;
    n[(0, 3)] = coeffs.axial[1][0] + coeffs.axial[1][1] * g2;
    for (j, col) in [1, 2, 4, 5].into_iter().enumerate() {
        let c = coeffs.transverse[j];
        n[(1, col)] = c[0] + c[1] * x + c[2] * f3 + c[3] * f4;
    }
    Ok(n)
}

/// Slopes `N_z,j'(x)` of the transverse shape functions, in DOF order
/// `(q2, q3, q5, q6)`.
pub fn eval_n_slopes(x: f64, profile: &StiffnessProfile, coeffs: &ShapeCoeffs) -> Result<[f64; 4]> {
    profile.check_abscissa(x)?;
    let f3p = eval_f3_prime(x, profile);
    let f4p = eval_f4_prime(x, profile);
    Ok(std::array::from_fn(|j| {
        let c = coeffs.transverse[j];
        c[1] + c[2] * f3p + c[3] * f4p
    }))
}

/// Strain matrix `B(x)`: row 0 gives the axis strain, row 1 the curvature
/// `chi = -u_z''`. Right limit at steps.
pub fn eval_b(x: f64, profile: &StiffnessProfile, coeffs: &ShapeCoeffs) -> Result<Mat2x6> {
    profile.check_abscissa(x)?;
    Ok(b_in_segment(x, profile.segment(x), profile, coeffs))
}

fn b_in_segment(x: f64, seg: usize, profile: &StiffnessProfile, coeffs: &ShapeCoeffs) -> Mat2x6 {
    let g2p = g2_prime_seg(profile, seg);
    let f3pp = f3_second_seg(profile, seg);
    let f4pp = f4_second_seg(x, profile, seg);
    let mut b = Mat2x6::zeros();
    b[(0, 0)] = coeffs.axial[0][1] * g2p;
    b[(0, 3)] = coeffs.axial[1][1] * g2p;
    for (j, col) in [1, 2, 4, 5].into_iter().enumerate() {
        let c = coeffs.transverse[j];
        b[(1, col)] = -(c[2] * f3pp + c[3] * f4pp);
    }
    b
}

/// Clamped-clamped particular solution for element loads.
#[derive(Debug, Clone)]
pub struct LoadField<'a> {
    profile: &'a StiffnessProfile,
    px: &'a LoadDistribution,
    pz: &'a LoadDistribution,
    axial_ratio: f64,
    c3: f64,
    c4: f64,
}

/// Displacement field produced by the element loads with both ends
/// clamped; added to `N q` it gives the full displacement field.
pub fn load_displacement_field<'a>(
    profile: &'a StiffnessProfile,
    coeffs: &ShapeCoeffs,
    px: &'a LoadDistribution,
    pz: &'a LoadDistribution,
) -> LoadField<'a> {
    let l = profile.length;
    let axial_ratio = if px.is_zero() {
        0.0
    } else {
        eval_g3(l, profile, px) / coeffs.g2_l
    };
    let (c3, c4) = if pz.is_zero() {
        (0.0, 0.0)
    } else {
        coeffs.end_match(-eval_f5(l, profile, pz), -eval_f5_prime(l, profile, pz))
    };
    LoadField {
        profile,
        px,
        pz,
        axial_ratio,
        c3,
        c4,
    }
}

impl LoadField<'_> {
    /// `(u_px(x), u_pz(x))`.
    pub fn displacement(&self, x: f64) -> (f64, f64) {
        let p = self.profile;
        let ux = if self.px.is_zero() {
            0.0
        } else {
            -self.axial_ratio * eval_g2(x, p) + eval_g3(x, p, self.px)
        };
        let uz = if self.pz.is_zero() {
            0.0
        } else {
            self.c3 * eval_f3(x, p) + self.c4 * eval_f4(x, p) + eval_f5(x, p, self.pz)
        };
        (ux, uz)
    }

    /// Generalized strains `(u_px', -u_pz'')` of the load field.
    pub fn strain(&self, x: f64) -> (f64, f64) {
        let p = self.profile;
        let seg = p.segment(x);
        let eps = if self.px.is_zero() {
            0.0
        } else {
            -self.axial_ratio * g2_prime_seg(p, seg) + eval_g3_prime(x, p, self.px)
        };
        let chi = if self.pz.is_zero() {
            0.0
        } else {
            -(self.c3 * f3_second_seg(p, seg)
                + self.c4 * f4_second_seg(x, p, seg)
                + eval_f5_second(x, p, self.pz))
        };
        (eps, chi)
    }
}

/// Stiffness of the stepped beam described by `profile`, integrating
/// `B^T diag(EA_i, EI_i) B` exactly on each segment.
pub fn stepped_beam_stiffness(shape: &ShapeFunctions) -> Mat6 {
    // two Gauss-Legendre points per segment are exact: B is linear there
    let g = 0.5 / 3f64.sqrt();
    let profile = &shape.profile;
    let mut k = Mat6::zeros();
    for seg in 0..profile.n_segments() {
        let a = profile.x_disc[seg];
        let b = profile.segment_end(seg);
        let h = b - a;
        let mid = 0.5 * (a + b);
        let ks =
            SMatrix::<f64, 2, 2>::new(profile.segment_ea(seg), 0.0, 0.0, profile.segment_ei(seg));
        for x in [mid - g * h, mid + g * h] {
            let bm = shape.b_in_segment(x, seg);
            k += bm.transpose() * ks * bm * (0.5 * h);
        }
    }
    k
}
