//! Assembly and incremental Newton-Raphson analysis.

use nalgebra::{DMatrix, DVector};

use crate::element::{Element, GaussRecord};
use crate::error::{FsdbError, Result};

pub const DOFS_PER_NODE: usize = 3;

/// Global DOF index of `dof` (0 = x, 1 = z, 2 = rotation) at `node`.
pub fn dof_index(node: usize, dof: usize) -> usize {
    node * DOFS_PER_NODE + dof
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Residual tolerance relative to the force scale of the step.
    pub tol_r: f64,
    /// Correction tolerance relative to the displacement norm.
    pub tol_u: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Maximum number of step bisections in the Newton line search.
    pub line_search: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol_r: 1e-5,
            tol_u: 1e-8,
            max_iter: 50,
            max_halvings: 8,
            line_search: 4,
        }
    }
}

/// Structural model with its committed and trial displacement state.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    /// Restrained DOFs, indexed by global DOF.
    pub fixed: Vec<bool>,
    /// Constant nodal loads (global axes).
    pub loads: DVector<f64>,
    u: DVector<f64>,
    u_trial: DVector<f64>,
    /// Load factor applied to `loads` in the committed state.
    load_factor: f64,
}

impl Model {
    pub fn new(nodes: Vec<[f64; 2]>, elements: Vec<Element>) -> Result<Self> {
        let ndof = nodes.len() * DOFS_PER_NODE;
        for (i, e) in elements.iter().enumerate() {
            if e.nodes.iter().any(|&n| n >= nodes.len()) {
                return Err(FsdbError::Validation(vec![format!(
                    "element {i} references missing node in {:?}",
                    e.nodes
                )]));
            }
        }
        Ok(Self {
            nodes,
            elements,
            fixed: vec![false; ndof],
            loads: DVector::zeros(ndof),
            u: DVector::zeros(ndof),
            u_trial: DVector::zeros(ndof),
            load_factor: 0.0,
        })
    }

    pub fn ndof(&self) -> usize {
        self.fixed.len()
    }

    pub fn fix(&mut self, node: usize, dofs: [bool; 3]) -> Result<()> {
        if node >= self.nodes.len() {
            return Err(FsdbError::Validation(vec![format!(
                "support on missing node {node}"
            )]));
        }
        for (d, &f) in dofs.iter().enumerate() {
            if f {
                self.fixed[dof_index(node, d)] = true;
            }
        }
        Ok(())
    }

    pub fn add_load(&mut self, node: usize, dof: usize, value: f64) -> Result<()> {
        if node >= self.nodes.len() || dof >= DOFS_PER_NODE {
            return Err(FsdbError::Validation(vec![format!(
                "load on missing node/DOF {node}/{dof}"
            )]));
        }
        self.loads[dof_index(node, dof)] += value;
        Ok(())
    }

    /// Committed displacements.
    pub fn displacements(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn load_factor(&self) -> f64 {
        self.load_factor
    }

    fn element_dofs(e: &Element) -> [usize; 6] {
        let [i, j] = e.nodes;
        [
            dof_index(i, 0),
            dof_index(i, 1),
            dof_index(i, 2),
            dof_index(j, 0),
            dof_index(j, 1),
            dof_index(j, 2),
        ]
    }

    /// State determination of every element at the trial displacements;
    /// returns the global tangent and resisting-force vector.
    pub fn assemble(&mut self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let n = self.ndof();
        let mut k = DMatrix::zeros(n, n);
        let mut f = DVector::zeros(n);
        for e in &mut self.elements {
            let dofs = Self::element_dofs(e);
            let qe = nalgebra::Vector6::from_fn(|a, _| self.u_trial[dofs[a]]);
            e.set_trial_displacements(&qe)?;
            let ke = e.global_stiffness();
            let fe = e.global_forces();
            for a in 0..6 {
                f[dofs[a]] += fe[a];
                for b in 0..6 {
                    k[(dofs[a], dofs[b])] += ke[(a, b)];
                }
            }
        }
        Ok((k, f))
    }

    /// External load vector at `factor` times the nodal loads, plus the
    /// element loads.
    pub fn external_forces(&self, factor: f64) -> Result<DVector<f64>> {
        let mut p = &self.loads * factor;
        for e in &self.elements {
            let dofs = Self::element_dofs(e);
            let pe = e.global_load_vector()?;
            for a in 0..6 {
                p[dofs[a]] += factor * pe[a];
            }
        }
        Ok(p)
    }

    fn commit(&mut self) -> Result<()> {
        for e in &mut self.elements {
            e.commit()?;
        }
        self.u.copy_from(&self.u_trial);
        Ok(())
    }

    fn revert(&mut self) {
        for e in &mut self.elements {
            e.revert();
        }
        self.u_trial.copy_from(&self.u);
    }
}

/// Displacement-controlled DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlDof {
    pub node: usize,
    pub dof: usize,
}

impl ControlDof {
    pub fn index(&self) -> usize {
        dof_index(self.node, self.dof)
    }
}

/// Target of one analysis step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepTarget {
    /// Load factor on the model's nodal loads.
    Load(f64),
    /// Prescribed value of the control DOF with the loads held constant.
    Displacement { control: ControlDof, value: f64 },
}

/// Outcome of one converged step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub residual: f64,
    pub halvings: usize,
}

fn solve_dense(k: DMatrix<f64>, r: DVector<f64>) -> Result<DVector<f64>> {
    if k.nrows() == 0 {
        return Ok(r);
    }
    let scale = k.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = k.lu();
    let pivots = lu.u().diagonal();
    let min_pivot = pivots.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(scale > 0.0) || min_pivot <= 1e-13 * scale {
        return Err(FsdbError::SingularSystem(format!(
            "tangent pivot {min_pivot:e} against diagonal scale {scale:e}"
        )));
    }
    lu.solve(&r)
        .ok_or_else(|| FsdbError::SingularSystem("LU solve failed".into()))
}

/// Newton-Raphson solver with step halving.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Solver {
    pub settings: SolverSettings,
}

impl Solver {
    pub fn new(settings: SolverSettings) -> Self {
        Self { settings }
    }

    /// One Newton solve from the committed state to `target`. On failure
    /// the model is reverted to the committed state.
    pub fn solve_step(&self, model: &mut Model, target: StepTarget) -> Result<StepStats> {
        match self.newton(model, target) {
            Ok(stats) => {
                if let Err(e) = model.commit() {
                    model.revert();
                    return Err(e);
                }
                if let StepTarget::Load(lf) = target {
                    model.load_factor = lf;
                }
                Ok(stats)
            }
            Err(e) => {
                model.revert();
                Err(e)
            }
        }
    }

    fn newton(&self, model: &mut Model, target: StepTarget) -> Result<StepStats> {
        let s = self.settings;
        let (factor, control) = match target {
            StepTarget::Load(lf) => (lf, None),
            StepTarget::Displacement { control, value } => {
                (model.load_factor, Some((control.index(), value)))
            }
        };
        if let Some((c, _)) = control {
            if c >= model.ndof() || model.fixed[c] {
                return Err(FsdbError::InvalidInput(format!(
                    "control DOF {c} is missing or restrained"
                )));
            }
        }
        let free: Vec<usize> = (0..model.ndof())
            .filter(|&d| !model.fixed[d] && control.is_none_or(|(c, _)| c != d))
            .collect();
        let p_ext = model.external_forces(factor)?;

        // tangent predictor from the committed state
        model.u_trial.copy_from(&model.u);
        let (k0, f0) = model.assemble()?;
        let f0_norm = f0.norm();
        let mut rhs = DVector::from_iterator(free.len(), free.iter().map(|&d| p_ext[d] - f0[d]));
        if let Some((c, value)) = control {
            let du_c = value - model.u[c];
            for (a, &d) in free.iter().enumerate() {
                rhs[a] -= k0[(d, c)] * du_c;
            }
            model.u_trial[c] = value;
        }
        let du = solve_dense(k0.select_rows(&free).select_columns(&free), rhs)?;

        let residual_of = |f: &DVector<f64>| {
            let r = DVector::from_iterator(free.len(), free.iter().map(|&d| p_ext[d] - f[d]));
            let scale = p_ext
                .norm()
                .max(f.norm())
                .max(f0_norm)
                .max(f64::MIN_POSITIVE);
            let norm = r.norm() / scale;
            (r, norm)
        };
        let (mut k, mut f) = self.line_search(model, &free, &du, None, &|f| residual_of(f).1)?;
        for it in 1..=s.max_iter {
            let (r, residual) = residual_of(&f);
            let du = solve_dense(k.select_rows(&free).select_columns(&free), r)?;
            // reference displacement size, also meaningful when the trial
            // state passes through zero
            let unorm = model.u_trial.norm().max(model.u.norm());
            if residual <= s.tol_r && du.norm() <= s.tol_u * unorm.max(f64::MIN_POSITIVE) {
                return Ok(StepStats {
                    iterations: it,
                    residual,
                    halvings: 0,
                });
            }
            (k, f) = self.line_search(model, &free, &du, Some(residual), &|f| residual_of(f).1)?;
        }
        Err(FsdbError::StepFailure {
            step: 0,
            halvings: 0,
        })
    }

    /// Apply `alpha * du` to the free DOFs of the current trial, halving
    /// `alpha` while the state determination fails or (given `current`) the
    /// residual does not drop. The best trial found is kept.
    fn line_search(
        &self,
        model: &mut Model,
        free: &[usize],
        du: &DVector<f64>,
        current: Option<f64>,
        residual: &dyn Fn(&DVector<f64>) -> f64,
    ) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let failed = FsdbError::StepFailure {
            step: 0,
            halvings: 0,
        };
        let base = model.u_trial.clone();
        let set = |model: &mut Model, alpha: f64| {
            model.u_trial.copy_from(&base);
            for (a, &d) in free.iter().enumerate() {
                model.u_trial[d] += alpha * du[a];
            }
        };
        let mut alpha = 1.0;
        let mut best: Option<(f64, f64)> = None;
        let mut last = None;
        for _ in 0..=self.settings.line_search {
            set(model, alpha);
            if !model.u_trial.iter().all(|v| v.is_finite()) {
                return Err(failed);
            }
            match model.assemble() {
                Ok((k, f)) => {
                    let norm = residual(&f);
                    if best.is_none_or(|(_, b)| norm < b) {
                        best = Some((alpha, norm));
                        last = Some((k, f));
                        if current.is_none_or(|c| norm < c) {
                            break;
                        }
                    }
                }
                Err(FsdbError::AxialEquilibrium { .. }) => {}
                Err(e) => return Err(e),
            }
            alpha *= 0.5;
        }
        let (best_alpha, _) = best.ok_or(failed)?;
        if best_alpha == alpha {
            if let Some(kf) = last {
                return Ok(kf);
            }
        }
        // element states must match the accepted trial
        set(model, best_alpha);
        model.assemble()
    }

    /// Reach `target` from the committed state, halving the increment
    /// after a failure up to `max_halvings` times.
    pub fn solve_increment(
        &self,
        model: &mut Model,
        target: StepTarget,
        step: usize,
    ) -> Result<StepStats> {
        let (start, end) = match target {
            StepTarget::Load(lf) => (model.load_factor, lf),
            StepTarget::Displacement { control, value } => (model.u[control.index()], value),
        };
        let with = |v: f64| match target {
            StepTarget::Load(_) => StepTarget::Load(v),
            StepTarget::Displacement { control, .. } => {
                StepTarget::Displacement { control, value: v }
            }
        };
        let mut acc = StepStats {
            iterations: 0,
            residual: 0.0,
            halvings: 0,
        };
        self.reach(model, &with, start, end, 0, step, &mut acc)?;
        Ok(acc)
    }

    #[allow(clippy::too_many_arguments)]
    fn reach(
        &self,
        model: &mut Model,
        with: &dyn Fn(f64) -> StepTarget,
        from: f64,
        to: f64,
        depth: usize,
        step: usize,
        acc: &mut StepStats,
    ) -> Result<()> {
        match self.solve_step(model, with(to)) {
            Ok(st) => {
                acc.iterations += st.iterations;
                acc.residual = st.residual;
                Ok(())
            }
            Err(e @ FsdbError::InvalidInput(_)) => Err(e),
            Err(_) if depth == self.settings.max_halvings => Err(FsdbError::StepFailure {
                step,
                halvings: depth,
            }),
            Err(_) => {
                acc.halvings = acc.halvings.max(depth + 1);
                let mid = 0.5 * (from + to);
                self.reach(model, with, from, mid, depth + 1, step, acc)?;
                self.reach(model, with, mid, to, depth + 1, step, acc)
            }
        }
    }
}

/// Record of one converged analysis step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub control_disp: f64,
    /// Force conjugate to the control DOF (applied load in load control).
    pub reaction: f64,
    /// Axial displacement of the control node.
    pub axial_disp: f64,
    pub iterations: usize,
    pub halvings: usize,
    pub fields: Vec<Vec<GaussRecord>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnalysisResult {
    pub steps: Vec<StepRecord>,
    /// Reason the analysis stopped early, if it did.
    pub failure: Option<String>,
}

impl AnalysisResult {
    pub fn peak_positive(&self) -> f64 {
        self.steps.iter().map(|s| s.reaction).fold(0.0, f64::max)
    }

    pub fn peak_negative(&self) -> f64 {
        self.steps.iter().map(|s| s.reaction).fold(0.0, f64::min)
    }

    pub fn converged(&self) -> bool {
        self.failure.is_none()
    }
}

/// Displacement history of a cyclic protocol: symmetric cycles to each
/// amplitude, discretized at `increment`.
pub fn cyclic_history(amplitudes: &[f64], increment: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut pos = 0.0f64;
    let mut go = |target: f64, out: &mut Vec<f64>| {
        let n = ((target - pos).abs() / increment).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(pos + (target - pos) * k as f64 / n as f64);
        }
        pos = target;
    };
    for &a in amplitudes {
        go(a, &mut out);
        go(-a, &mut out);
        go(0.0, &mut out);
    }
    out
}

/// Monotonic ramp of the control DOF in `steps` equal increments.
pub fn monotonic_history(target: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|k| target * k as f64 / steps as f64)
        .collect()
}

/// Two-phase analysis: the nodal loads are applied in `preload_steps`
/// load-controlled steps (skipped when there are none), then the control
/// DOF follows `history`.
pub fn run_displacement_history(
    model: &mut Model,
    solver: &Solver,
    control: ControlDof,
    history: &[f64],
    preload_steps: usize,
) -> Result<AnalysisResult> {
    let c = control.index();
    if c >= model.ndof() || model.fixed[c] {
        return Err(FsdbError::InvalidInput(format!(
            "control DOF {} of node {} is missing or restrained",
            control.dof, control.node
        )));
    }
    let mut result = AnalysisResult::default();
    let has_loads = model.loads.iter().any(|&v| v != 0.0)
        || model
            .elements
            .iter()
            .any(|e| !e.px.is_zero() || !e.pz.is_zero());
    let mut step = 0;
    let record = |model: &Model, step: usize, st: StepStats, reaction: f64| StepRecord {
        step,
        control_disp: model.u[c],
        reaction,
        axial_disp: model.u[dof_index(control.node, 0)],
        iterations: st.iterations,
        halvings: st.halvings,
        fields: model.elements.iter().map(Element::gauss_records).collect(),
    };
    if has_loads {
        let n = preload_steps.max(1);
        for k in 1..=n {
            step += 1;
            match solver.solve_increment(model, StepTarget::Load(k as f64 / n as f64), step) {
                Ok(st) => {
                    let p = model.external_forces(model.load_factor)?;
                    result.steps.push(record(model, step, st, p[c]));
                }
                Err(e) => {
                    result.failure = Some(e.to_string());
                    return Ok(result);
                }
            }
        }
    }
    for &value in history {
        step += 1;
        match solver.solve_increment(model, StepTarget::Displacement { control, value }, step) {
            Ok(st) => {
                let reaction = control_reaction(model, c)?;
                result.steps.push(record(model, step, st, reaction));
            }
            Err(e) => {
                result.failure = Some(e.to_string());
                return Ok(result);
            }
        }
    }
    Ok(result)
}

/// Net force the control DOF carries in the committed state.
fn control_reaction(model: &Model, c: usize) -> Result<f64> {
    let mut f = 0.0;
    for e in &model.elements {
        let dofs = Model::element_dofs(e);
        let fe = e.global_forces();
        for a in 0..6 {
            if dofs[a] == c {
                f += fe[a];
            }
        }
    }
    Ok(f - model.external_forces(model.load_factor)?[c])
}

/// Load-controlled ramp of the nodal loads to `factor` in `steps` steps.
pub fn run_load_ramp(
    model: &mut Model,
    solver: &Solver,
    factor: f64,
    steps: usize,
) -> Result<AnalysisResult> {
    let mut result = AnalysisResult::default();
    for k in 1..=steps.max(1) {
        match solver.solve_increment(
            model,
            StepTarget::Load(factor * k as f64 / steps.max(1) as f64),
            k,
        ) {
            Ok(st) => result.steps.push(StepRecord {
                step: k,
                control_disp: 0.0,
                reaction: model.load_factor,
                axial_disp: 0.0,
                iterations: st.iterations,
                halvings: st.halvings,
                fields: model.elements.iter().map(Element::gauss_records).collect(),
            }),
            Err(e) => {
                result.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(result)
}
