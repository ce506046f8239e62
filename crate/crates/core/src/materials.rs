//! Uniaxial hysteretic laws for the section fibres.
//!
//! Tension is positive. Every law keeps a committed history and evaluates a
//! trial strain against it, so `set_trial_strain` is a pure function of the
//! committed state and the strain; only `commit` moves the history forward.

use crate::error::{FsdbError, Result};

/// Common interface of the fibre materials.
pub trait UniaxialMaterial {
    /// Evaluate `strain` against the committed history; returns
    /// `(stress, tangent)`.
    fn set_trial_strain(&mut self, strain: f64) -> (f64, f64);
    fn strain(&self) -> f64;
    fn stress(&self) -> f64;
    fn tangent(&self) -> f64;
    /// Tangent of the virgin material at zero strain.
    fn initial_tangent(&self) -> f64;
    fn commit(&mut self);
    fn revert(&mut self);
}

/// Linear elastic law, used for verification models.
#[derive(Debug, Clone, PartialEq)]
pub struct Elastic {
    pub modulus: f64,
    strain: f64,
    committed_strain: f64,
}

impl Elastic {
    pub fn new(modulus: f64) -> Result<Self> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(FsdbError::InvalidInput(format!(
                "elastic modulus must be positive, got {modulus}"
            )));
        }
        Ok(Self {
            modulus,
            strain: 0.0,
            committed_strain: 0.0,
        })
    }
}

impl UniaxialMaterial for Elastic {
    fn set_trial_strain(&mut self, strain: f64) -> (f64, f64) {
        self.strain = strain;
        (self.modulus * strain, self.modulus)
    }
    fn strain(&self) -> f64 {
        self.strain
    }
    fn stress(&self) -> f64 {
        self.modulus * self.strain
    }
    fn tangent(&self) -> f64 {
        self.modulus
    }
    fn initial_tangent(&self) -> f64 {
        self.modulus
    }
    fn commit(&mut self) {
        self.committed_strain = self.strain;
    }
    fn revert(&mut self) {
        self.strain = self.committed_strain;
    }
}

/// Modified Kent-Park concrete. Stresses and strains in compression are
/// negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcreteParams {
    /// Peak compressive stress (negative).
    pub fc: f64,
    /// Strain at peak stress (negative).
    pub eps_c: f64,
    /// Residual stress beyond the ultimate strain (negative or zero).
    pub fcu: f64,
    /// Ultimate strain (negative, beyond `eps_c`).
    pub eps_cu: f64,
    /// Initial modulus used for tension and unloading.
    pub ec: f64,
    /// Tensile strength (>= 0).
    pub ft: f64,
    /// Tension softening slope (positive magnitude).
    pub et_soft: f64,
    /// Ratio between the unloading slope at `eps_cu` and the initial slope.
    pub unload_ratio: f64,
}

impl ConcreteParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.fc < 0.0) {
            errs.push(format!(
                "fc must be negative (compression), got {}",
                self.fc
            ));
        }
        if !(self.eps_cu < self.eps_c && self.eps_c < 0.0) {
            errs.push(format!(
                "strains must satisfy eps_cu < eps_c < 0, got eps_c = {}, eps_cu = {}",
                self.eps_c, self.eps_cu
            ));
        }
        if self.fcu > 0.0 || self.fcu < self.fc {
            errs.push(format!("fcu must lie in [fc, 0], got {}", self.fcu));
        }
        if !(self.ec > 0.0) {
            errs.push(format!("ec must be positive, got {}", self.ec));
        }
        if !(self.ft >= 0.0) {
            errs.push(format!("ft must be non-negative, got {}", self.ft));
        }
        if self.ft > 0.0 && !(self.et_soft > 0.0) {
            errs.push(format!(
                "et_soft must be positive when ft > 0, got {}",
                self.et_soft
            ));
        }
        if !(0.0..1.0).contains(&self.unload_ratio) {
            errs.push(format!(
                "unload_ratio must lie in [0, 1), got {}",
                self.unload_ratio
            ));
        }
        errs
    }

    /// Monotonic compression envelope: parabola to the peak, linear
    /// descent to the ultimate point, then a flat residual branch.
    pub fn compression_envelope(&self, eps: f64) -> (f64, f64) {
        if eps >= self.eps_c {
            let r = eps / self.eps_c;
            let e0 = 2.0 * self.fc / self.eps_c;
            (self.fc * r * (2.0 - r), e0 * (1.0 - r))
        } else if eps > self.eps_cu {
            let slope = (self.fcu - self.fc) / (self.eps_cu - self.eps_c);
            (self.fc + slope * (eps - self.eps_c), slope)
        } else {
            (self.fcu, RESIDUAL_TANGENT)
        }
    }

    /// Tension envelope: linear to `ft`, linear softening to zero.
    pub fn tension_envelope(&self, eps: f64) -> (f64, f64) {
        let eps_t = self.ft / self.ec;
        let eps_tu = if self.ft > 0.0 {
            self.ft * (1.0 / self.et_soft + 1.0 / self.ec)
        } else {
            0.0
        };
        if eps <= eps_t && self.ft > 0.0 {
            (self.ec * eps, self.ec)
        } else if eps <= eps_tu {
            (self.ft - self.et_soft * (eps - eps_t), -self.et_soft)
        } else {
            (0.0, RESIDUAL_TANGENT)
        }
    }
}

const RESIDUAL_TANGENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
struct ConcreteHistory {
    /// Most compressive strain reached.
    ecmin: f64,
    /// Largest tensile strain excursion past the crack-closure point.
    dept: f64,
    strain: f64,
    stress: f64,
    tangent: f64,
}

/// Kent-Park envelope with linear unloading/reloading rules through a
/// common focal point and degrading tension.
#[derive(Debug, Clone, PartialEq)]
pub struct Concrete {
    pub params: ConcreteParams,
    committed: ConcreteHistory,
    trial: ConcreteHistory,
}

impl Concrete {
    pub fn new(params: ConcreteParams) -> Result<Self> {
        let errs = params.validate();
        if !errs.is_empty() {
            return Err(FsdbError::InvalidInput(errs.join("; ")));
        }
        let h = ConcreteHistory {
            ecmin: 0.0,
            dept: 0.0,
            strain: 0.0,
            stress: 0.0,
            tangent: params.ec,
        };
        Ok(Self {
            params,
            committed: h,
            trial: h,
        })
    }
}

impl UniaxialMaterial for Concrete {
    fn set_trial_strain(&mut self, eps: f64) -> (f64, f64) {
        let p = &self.params;
        let c = self.committed;
        let mut t = ConcreteHistory { strain: eps, ..c };
        let deps = eps - c.strain;
        if deps.abs() < f64::EPSILON {
            self.trial = c;
            return (c.stress, c.tangent);
        }
        let ec0 = p.ec;
        if eps < c.ecmin {
            let (s, e) = p.compression_envelope(eps);
            t.stress = s;
            t.tangent = e;
            t.ecmin = eps;
        } else {
            // focal point R of the reloading lines
            let eps_r = (p.fcu - p.unload_ratio * ec0 * p.eps_cu) / (ec0 * (1.0 - p.unload_ratio));
            let sig_r = ec0 * eps_r;
            let sig_m = p.compression_envelope(c.ecmin).0;
            let er = (sig_m - sig_r) / (c.ecmin - eps_r);
            let ept = c.ecmin - sig_m / er;
            if eps <= ept {
                let sig_min = sig_m + er * (eps - c.ecmin);
                let sig_max = 0.5 * er * (eps - ept);
                let mut s = c.stress + ec0 * deps;
                let mut e = ec0;
                if s <= sig_min {
                    s = sig_min;
                    e = er;
                }
                if s >= sig_max {
                    s = sig_max;
                    e = 0.5 * er;
                }
                t.stress = s;
                t.tangent = e;
            } else {
                let epn = ept + c.dept;
                if eps <= epn {
                    let sicn = p.tension_envelope(c.dept).0;
                    let e = if c.dept != 0.0 { sicn / c.dept } else { ec0 };
                    t.stress = e * (eps - ept);
                    t.tangent = e;
                } else {
                    let (s, e) = p.tension_envelope(eps - ept);
                    t.stress = s;
                    t.tangent = e;
                    t.dept = eps - ept;
                }
            }
        }
        self.trial = t;
        (t.stress, t.tangent)
    }
    fn strain(&self) -> f64 {
        self.trial.strain
    }
    fn stress(&self) -> f64 {
        self.trial.stress
    }
    fn tangent(&self) -> f64 {
        self.trial.tangent
    }
    fn initial_tangent(&self) -> f64 {
        self.params.ec
    }
    fn commit(&mut self) {
        self.committed = self.trial;
    }
    fn revert(&mut self) {
        self.trial = self.committed;
    }
}

/// Menegotto-Pinto steel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteelParams {
    pub es: f64,
    pub fy: f64,
    /// Hardening ratio `E_sh / E_s`.
    pub b: f64,
    pub r0: f64,
    pub cr1: f64,
    pub cr2: f64,
}

impl SteelParams {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.es > 0.0) {
            errs.push(format!("es must be positive, got {}", self.es));
        }
        if !(self.fy > 0.0) {
            errs.push(format!("fy must be positive, got {}", self.fy));
        }
        if !(0.0..1.0).contains(&self.b) {
            errs.push(format!(
                "hardening ratio b must lie in [0, 1), got {}",
                self.b
            ));
        }
        if !(self.r0 > 0.0) {
            errs.push(format!("r0 must be positive, got {}", self.r0));
        }
        if !(self.cr2 > 0.0) || !(self.cr1 >= 0.0 && self.cr1 < 1.0) {
            errs.push(format!(
                "curvature degradation needs 0 <= cr1 < 1 and cr2 > 0, got {} and {}",
                self.cr1, self.cr2
            ));
        }
        errs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SteelHistory {
    /// 0 virgin, 1 loading toward tension, 2 loading toward compression.
    branch: u8,
    eps_max: f64,
    eps_min: f64,
    eps_pl: f64,
    eps_0: f64,
    sig_0: f64,
    eps_r: f64,
    sig_r: f64,
    strain: f64,
    stress: f64,
    tangent: f64,
}

/// Menegotto-Pinto law with curvature degradation and kinematic hardening
/// (no isotropic shift of the asymptotes).
#[derive(Debug, Clone, PartialEq)]
pub struct Steel {
    pub params: SteelParams,
    committed: SteelHistory,
    trial: SteelHistory,
}

impl Steel {
    pub fn new(params: SteelParams) -> Result<Self> {
        let errs = params.validate();
        if !errs.is_empty() {
            return Err(FsdbError::InvalidInput(errs.join("; ")));
        }
        let h = SteelHistory {
            branch: 0,
            eps_max: 0.0,
            eps_min: 0.0,
            eps_pl: 0.0,
            eps_0: 0.0,
            sig_0: 0.0,
            eps_r: 0.0,
            sig_r: 0.0,
            strain: 0.0,
            stress: 0.0,
            tangent: params.es,
        };
        Ok(Self {
            params,
            committed: h,
            trial: h,
        })
    }
}

impl UniaxialMaterial for Steel {
    fn set_trial_strain(&mut self, eps: f64) -> (f64, f64) {
        let p = &self.params;
        let c = self.committed;
        let mut t = SteelHistory { strain: eps, ..c };
        let esh = p.b * p.es;
        let eps_y = p.fy / p.es;
        let deps = eps - c.strain;

        if t.branch == 0 {
            if deps.abs() < 10.0 * f64::EPSILON {
                t.stress = 0.0;
                t.tangent = p.es;
                self.trial = t;
                return (0.0, p.es);
            }
            t.eps_max = eps_y;
            t.eps_min = -eps_y;
            if deps < 0.0 {
                t.branch = 2;
                t.eps_0 = -eps_y;
                t.sig_0 = -p.fy;
                t.eps_pl = -eps_y;
            } else {
                t.branch = 1;
                t.eps_0 = eps_y;
                t.sig_0 = p.fy;
                t.eps_pl = eps_y;
            }
        }

        if t.branch == 2 && deps > 0.0 {
            t.branch = 1;
            t.eps_r = c.strain;
            t.sig_r = c.stress;
            t.eps_min = t.eps_min.min(c.strain);
            t.eps_0 = (p.fy - esh * eps_y - t.sig_r + p.es * t.eps_r) / (p.es - esh);
            t.sig_0 = p.fy + esh * (t.eps_0 - eps_y);
            t.eps_pl = t.eps_max;
        } else if t.branch == 1 && deps < 0.0 {
            t.branch = 2;
            t.eps_r = c.strain;
            t.sig_r = c.stress;
            t.eps_max = t.eps_max.max(c.strain);
            t.eps_0 = (-p.fy + esh * eps_y - t.sig_r + p.es * t.eps_r) / (p.es - esh);
            t.sig_0 = -p.fy + esh * (t.eps_0 + eps_y);
            t.eps_pl = t.eps_min;
        }

        let xi = ((t.eps_pl - t.eps_0) / eps_y).abs();
        let r = p.r0 * (1.0 - p.cr1 * xi / (p.cr2 + xi));
        let (s, e) = menegotto_pinto(eps, t.eps_r, t.sig_r, t.eps_0, t.sig_0, p.b, r);
        t.stress = s;
        t.tangent = e;
        self.trial = t;
        (s, e)
    }
    fn strain(&self) -> f64 {
        self.trial.strain
    }
    fn stress(&self) -> f64 {
        self.trial.stress
    }
    fn tangent(&self) -> f64 {
        self.trial.tangent
    }
    fn initial_tangent(&self) -> f64 {
        self.params.es
    }
    fn commit(&mut self) {
        self.committed = self.trial;
    }
    fn revert(&mut self) {
        self.trial = self.committed;
    }
}

/// Menegotto-Pinto transition between the asymptotes meeting at
/// `(eps_0, sig_0)`, starting from the reversal point `(eps_r, sig_r)`.
pub fn menegotto_pinto(
    eps: f64,
    eps_r: f64,
    sig_r: f64,
    eps_0: f64,
    sig_0: f64,
    b: f64,
    r: f64,
) -> (f64, f64) {
    let ratio = (eps - eps_r) / (eps_0 - eps_r);
    let d1 = 1.0 + ratio.abs().powf(r);
    let d2 = d1.powf(1.0 / r);
    let s = (b * ratio + (1.0 - b) * ratio / d2) * (sig_0 - sig_r) + sig_r;
    let e = (b + (1.0 - b) / (d1 * d2)) * (sig_0 - sig_r) / (eps_0 - eps_r);
    (s, e)
}

/// Fibre material: one of the supported uniaxial laws with its state.
#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Elastic(Elastic),
    Concrete(Concrete),
    Steel(Steel),
}

macro_rules! dispatch {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            Material::Elastic($m) => $e,
            Material::Concrete($m) => $e,
            Material::Steel($m) => $e,
        }
    };
}

impl UniaxialMaterial for Material {
    fn set_trial_strain(&mut self, strain: f64) -> (f64, f64) {
        dispatch!(self, m => m.set_trial_strain(strain))
    }
    fn strain(&self) -> f64 {
        dispatch!(self, m => m.strain())
    }
    fn stress(&self) -> f64 {
        dispatch!(self, m => m.stress())
    }
    fn tangent(&self) -> f64 {
        dispatch!(self, m => m.tangent())
    }
    fn initial_tangent(&self) -> f64 {
        dispatch!(self, m => m.initial_tangent())
    }
    fn commit(&mut self) {
        dispatch!(self, m => m.commit())
    }
    fn revert(&mut self) {
        dispatch!(self, m => m.revert())
    }
}

impl From<Elastic> for Material {
    fn from(m: Elastic) -> Self {
        Material::Elastic(m)
    }
}
impl From<Concrete> for Material {
    fn from(m: Concrete) -> Self {
        Material::Concrete(m)
    }
}
impl From<Steel> for Material {
    fn from(m: Steel) -> Self {
        Material::Steel(m)
    }
}
