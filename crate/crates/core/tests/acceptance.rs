//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so that the report lines
//! show up in `cargo test` output. Exits non-zero when any check fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{rngs::StdRng, Rng, SeedableRng};

use fsdb::bench;
use fsdb::element::{Element, ElementOptions, Formulation};
use fsdb::kernel::{stepped_beam_stiffness, ShapeFunctions, StiffnessProfile};
use fsdb::materials::{Concrete, ConcreteParams, Steel, SteelParams, UniaxialMaterial};
use fsdb::model_io::{builtin, Overrides};
use fsdb::quadrature::QuadratureRule;
use fsdb::reference::*;
use fsdb::section::elastic_rectangle;
use fsdb::solver::{
    run_load_ramp, ControlDof, Model, Solver, SolverSettings, StepRecord, StepTarget,
};

struct Report {
    lines: Vec<(Status, String, String)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.emit(status, id, detail);
    }

    fn skip(&mut self, id: &str, detail: String) {
        self.emit(Status::Skip, id, detail);
    }

    fn emit(&mut self, status: Status, id: &str, detail: String) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        println!("{tag}  {id}: {detail}");
        self.lines.push((status, id.to_string(), detail));
    }

    fn failures(&self) -> usize {
        self.lines.iter().filter(|l| l.0 == Status::Fail).count()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(measured: f64, target: f64, tol: f64) -> bool {
    rel(measured, target) <= tol
}

fn run(model: &str, protocol: &str, ov: Overrides) -> (fsdb::model_io::RunOutput, f64) {
    let t = Instant::now();
    let out = builtin(model)
        .and_then(|m| m.run(protocol, &ov))
        .unwrap_or_else(|e| panic!("{model}/{protocol}: {e}"));
    (out, t.elapsed().as_secs_f64())
}

fn with(f: Formulation) -> Overrides {
    Overrides {
        formulation: Some(f),
        ..Overrides::default()
    }
}

fn stopped(out: &fsdb::model_io::RunOutput) -> String {
    match &out.result.failure {
        None => String::new(),
        Some(f) => format!(" [stopped after {} steps: {f}]", out.result.steps.len()),
    }
}

// 1 ------------------------------------------------------------------------

fn elastic_patch(r: &mut Report) {
    let t = Instant::now();
    let s = elastic_rectangle(0.3, 0.4, 30e9, 40).unwrap();
    let l = 3.0;
    let el = Element::new([0, 1], [0.0, 0.0], [l, 0.0], &s, ElementOptions::fsdb()).unwrap();
    let mut m = Model::new(vec![[0.0, 0.0], [l, 0.0]], vec![el]).unwrap();
    m.fix(0, [true; 3]).unwrap();
    let (f, n) = (10e3, 250e3);
    m.add_load(1, 1, f).unwrap();
    m.add_load(1, 0, n).unwrap();
    let res = run_load_ramp(&mut m, &Solver::default(), 1.0, 1).unwrap();
    let u = m.displacements();
    let (ei, ea) = (s.ei_ref(), s.ea_ref());
    let bx = m.elements[0]
        .profile()
        .beta_x()
        .iter()
        .chain(m.elements[0].profile().beta_z())
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let e_w = rel(u[4], f * l.powi(3) / (3.0 * ei));
    let e_u = rel(u[3], n * l / ea);
    let secs = t.elapsed().as_secs_f64();
    r.check(
        "1 elastic patch",
        res.converged() && bx == 0.0 && e_w < 1e-10 && e_u < 1e-10 && secs < 1.0,
        format!(
            "tip deflection rel err {e_w:.1e}, axial extension rel err {e_u:.1e} (tol 1e-10), max beta {bx}, {secs:.3} s (limit 1 s)"
        ),
    );
}

// 2 ------------------------------------------------------------------------

fn hermite_reduction(r: &mut Report) {
    let l = 3.0;
    let rule = QuadratureRule::gauss_lobatto(10).unwrap();
    let p = StiffnessProfile::from_quadrature(&rule, l, 3.6e9, 4.8e7).unwrap();
    let s = ShapeFunctions::new(p).unwrap();
    let mut rng = StdRng::seed_from_u64(2);
    let (mut dn, mut db) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(0.0..=l);
        let t = x / l;
        let n = s.n(x).unwrap();
        let b = s.b(x).unwrap();
        let nw = [
            1.0 - 3.0 * t * t + 2.0 * t.powi(3),
            -x * (1.0 - t).powi(2),
            3.0 * t * t - 2.0 * t.powi(3),
            -x * (t * t - t),
        ];
        // curvature = -w''
        let bw = [
            6.0 / (l * l) - 12.0 * x / l.powi(3),
            -4.0 / l + 6.0 * x / (l * l),
            -6.0 / (l * l) + 12.0 * x / l.powi(3),
            -2.0 / l + 6.0 * x / (l * l),
        ];
        dn = dn
            .max((n[(0, 0)] - (1.0 - t)).abs())
            .max((n[(0, 3)] - t).abs());
        db = db
            .max((b[(0, 0)] + 1.0 / l).abs())
            .max((b[(0, 3)] - 1.0 / l).abs());
        for (j, col) in [1, 2, 4, 5].into_iter().enumerate() {
            dn = dn.max((n[(1, col)] - nw[j]).abs());
            db = db.max((b[(1, col)] - bw[j]).abs());
        }
        for col in [1, 2, 4, 5] {
            dn = dn.max(n[(0, col)].abs());
            db = db.max(b[(0, col)].abs());
        }
        for col in [0, 3] {
            dn = dn.max(n[(1, col)].abs());
            db = db.max(b[(1, col)].abs());
        }
    }
    r.check(
        "2 Hermite/linear reduction",
        dn < 1e-12 && db < 1e-12,
        format!("1000 random x: max |dN| = {dn:.1e}, max |dB| = {db:.1e} (tol 1e-12)"),
    );
}

// 3 ------------------------------------------------------------------------

fn stepped_beam_oracle(r: &mut Report) {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let l: f64 = rng.random_range(1.0..5.0);
        let mut cuts = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
        cuts.sort_by(f64::total_cmp);
        let x = vec![0.0, cuts[0] * l, cuts[1] * l];
        let bz: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=0.9)).collect();
        let bx: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=0.9)).collect();
        let p = StiffnessProfile::new(l, x.clone(), 2.0e9, 3.0e7)
            .unwrap()
            .with_betas(&bx, &bz)
            .unwrap();
        let force = 1e3;
        let mut ends = x[1..].to_vec();
        ends.push(l);
        let oracle: f64 = (0..3)
            .map(|s| {
                let (a, b) = (x[s], ends[s]);
                force * ((l - a).powi(3) - (l - b).powi(3)) / (3.0 * p.segment_ei(s))
            })
            .sum();
        let k = stepped_beam_stiffness(&ShapeFunctions::new(p).unwrap());
        let kff = k.fixed_view::<3, 3>(3, 3).into_owned();
        let u = kff.lu().solve(&Vector3::new(0.0, force, 0.0)).unwrap();
        worst = worst.max(rel(u[1], oracle));
    }
    r.check(
        "3 stepped-beam oracle",
        worst < 1e-9,
        format!("20 random 3-step profiles: max tip deflection rel err {worst:.1e} (tol 1e-9)"),
    );
}

// 4 ------------------------------------------------------------------------

/// Max `|N_r - mean|` and the mean over the Gauss points of element 0.
fn spread(s: &StepRecord) -> (f64, f64) {
    let ns: Vec<f64> = s.fields[0].iter().map(|g| g.n).collect();
    let mean = ns.iter().sum::<f64>() / ns.len() as f64;
    (
        ns.iter().map(|n| (n - mean).abs()).fold(0.0, f64::max),
        mean,
    )
}

fn axial_equilibrium(r: &mut Report) {
    let (on, _) = run("benchmark1", "pushover", with(Formulation::Fsdb));
    let first = &on.model.elements[0];
    let floor = first.options().axial.floor_factor * first.profile().ea_ref();
    let mut worst = 0.0f64;
    let mut ok = on.result.converged();
    for s in &on.result.steps {
        let (sp, mean) = spread(s);
        let tol = 1e-6 * mean.abs().max(floor);
        worst = worst.max(sp / mean.abs().max(floor));
        ok &= sp <= tol;
    }
    r.check(
        "4a axial equilibrium (on)",
        ok,
        format!(
            "{} converged steps, max spread / max(|N|, floor) = {worst:.1e} (tol 1e-6){}",
            on.result.steps.len(),
            stopped(&on)
        ),
    );

    let (off, _) = run(
        "benchmark1",
        "pushover",
        Overrides {
            axial_eq: Some(false),
            ..with(Formulation::Fsdb)
        },
    );
    // first cracking: first step with a noticeable stiffness loss anywhere
    let cracked = off
        .result
        .steps
        .iter()
        .position(|s| s.fields[0].iter().any(|g| g.beta_z > 0.01));
    let (max_rel, steps_after) = match cracked {
        Some(i) => (
            off.result.steps[i..]
                .iter()
                .map(|s| {
                    let (sp, mean) = spread(s);
                    sp / mean.abs()
                })
                .fold(0.0, f64::max),
            off.result.steps.len() - i,
        ),
        None => (0.0, 0),
    };
    r.check(
        "4b axial spread without equilibration",
        cracked.is_some() && max_rel > 1e-3,
        format!(
            "after first cracking (control step {}): max spread / |N| = {max_rel:.3} over {steps_after} steps (must be clearly nonzero){}",
            cracked.map_or(0, |i| off.result.steps[i].step),
            stopped(&off)
        ),
    );
}

// 5 ------------------------------------------------------------------------

fn benchmark1_monotonic(r: &mut Report) {
    let (db, t_db) = run("benchmark1", "pushover", with(Formulation::Db));
    let p_db = db.result.peak_positive() / 1e3;
    r.check(
        "5a benchmark 1 DB peak",
        db.result.converged() && within(p_db, B1_DB_PEAK_KN, 0.08) && t_db < 30.0,
        format!(
            "{p_db:.2} kN vs {B1_DB_PEAK_KN} kN ({:+.1} %, tol 8 %), {t_db:.2} s (limit 30 s){}",
            deviation_pct(p_db, B1_DB_PEAK_KN),
            stopped(&db)
        ),
    );
    let (fs, t_fs) = run("benchmark1", "pushover", with(Formulation::Fsdb));
    let p_fs = fs.result.peak_positive() / 1e3;
    let target = b1_fsdb_peak_kn();
    r.check(
        "5b benchmark 1 FSDB peak",
        fs.result.converged() && within(p_fs, target, 0.10) && t_fs < 30.0,
        format!(
            "{p_fs:.2} kN vs {target:.2} kN ({:+.1} %, tol 10 %), {t_fs:.2} s (limit 30 s){}",
            deviation_pct(p_fs, target),
            stopped(&fs)
        ),
    );
}

// 6 ------------------------------------------------------------------------

fn table1(r: &mut Report) {
    let t = Instant::now();
    let cases = bench::table1(&Overrides::default());
    let secs = t.elapsed().as_secs_f64();
    let mut ok = secs < 300.0;
    let mut worst = (0.0f64, String::new());
    for c in &cases {
        match c.deviation_pct() {
            Some(d) => {
                ok &= d.abs() <= 10.0;
                if d.abs() > worst.0.abs() {
                    worst = (d, format!("{} {}", c.formulation, c.label));
                }
            }
            None => ok = false,
        }
    }
    let failed: Vec<String> = cases
        .iter()
        .filter_map(|c| {
            c.measured
                .as_ref()
                .err()
                .map(|e| format!("{} {}: {e}", c.formulation, c.label))
        })
        .collect();
    r.check(
        "6a Table 1 peaks",
        ok,
        format!(
            "12 cases within 10 %: worst {:+.1} % ({}), {secs:.1} s (limit 300 s){}",
            worst.0,
            worst.1,
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join("; "))
            }
        ),
    );
    let mut order_ok = true;
    let mut detail = Vec::new();
    for (i, n) in TABLE1_AXIAL_KN.iter().enumerate() {
        let db = cases[2 * i].measured.clone().unwrap_or(f64::NAN);
        let fsdb = cases[2 * i + 1].measured.clone().unwrap_or(f64::NAN);
        let fb = TABLE1_FB_KN[i];
        let good = fb < fsdb && fsdb < db;
        order_ok &= good;
        detail.push(format!("N={n:.0}: {fb:.2} < {fsdb:.2} < {db:.2}"));
    }
    r.check(
        "6b Table 1 ordering FB < FSDB < DB",
        order_ok,
        detail.join(", "),
    );
    println!(
        "{}",
        bench::format_table(&cases)
            .trim_end()
            .lines()
            .map(|l| format!("      {l}"))
            .collect::<Vec<_>>()
            .join("\n")
    );
}

// 7 ------------------------------------------------------------------------

/// Force at control displacement `u` on the monotone branch `steps`.
fn force_at(steps: &[StepRecord], u: f64) -> Option<f64> {
    steps.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        let (lo, hi) = (
            a.control_disp.min(b.control_disp),
            a.control_disp.max(b.control_disp),
        );
        if (lo..=hi).contains(&u) && hi > lo {
            let t = (u - a.control_disp) / (b.control_disp - a.control_disp);
            Some(a.reaction + t * (b.reaction - a.reaction))
        } else {
            None
        }
    })
}

/// Reloading secant stiffness through zero displacement on the branch
/// from the negative peak of the `amplitude` cycle towards the next
/// positive peak, and the initial secant stiffness of the first lateral
/// step.
fn pinching_ratio(steps: &[StepRecord], amplitude: f64, half_width: f64) -> Option<(f64, f64)> {
    let lateral: Vec<&StepRecord> = steps
        .iter()
        .filter(|s| s.control_disp != 0.0 || s.reaction != 0.0)
        .collect();
    let first = steps.iter().find(|s| s.control_disp.abs() > 1e-12)?;
    let k0 = first.reaction / first.control_disp;
    let start = lateral
        .iter()
        .position(|s| (s.control_disp + amplitude).abs() < 1e-9)?;
    let end = start
        + lateral[start..]
            .iter()
            .position(|s| s.control_disp > amplitude - 1e-9)?;
    let branch: Vec<StepRecord> = lateral[start..=end].iter().map(|s| (*s).clone()).collect();
    let fp = force_at(&branch, half_width)?;
    let fm = force_at(&branch, -half_width)?;
    Some(((fp - fm) / (2.0 * half_width), k0))
}

fn benchmark1_cyclic(r: &mut Report) {
    for (f, (pos, neg)) in [
        (Formulation::Fsdb, B1_CYCLIC_FSDB_KN),
        (Formulation::Db, B1_CYCLIC_DB_KN),
    ] {
        let (out, secs) = run("benchmark1", "cyclic", with(f));
        let (p, n) = (
            out.result.peak_positive() / 1e3,
            out.result.peak_negative() / 1e3,
        );
        r.check(
            &format!("7{} benchmark 1 cyclic {f} peaks", if f == Formulation::Fsdb { 'a' } else { 'b' }),
            out.result.converged() && within(p, pos, 0.10) && within(n, neg, 0.10),
            format!(
                "{p:.2} / {n:.2} kN vs {pos} / {neg} kN ({:+.1} % / {:+.1} %, tol 10 %), {secs:.1} s{}",
                deviation_pct(p, pos),
                deviation_pct(n, neg),
                stopped(&out)
            ),
        );
        if f == Formulation::Fsdb {
            match pinching_ratio(&out.result.steps, 0.12, 0.01) {
                Some((k, k0)) => r.check(
                    "7c FSDB pinching",
                    k < 0.5 * k0,
                    format!(
                        "reloading secant at u = 0 after the 120 mm cycle {:.3} kN/mm, initial {:.3} kN/mm, ratio {:.3} (limit 0.5)",
                        k / 1e6,
                        k0 / 1e6,
                        k / k0
                    ),
                ),
                None => r.check("7c FSDB pinching", false, "reloading branch not found".into()),
            }
        }
    }
}

// 8 ------------------------------------------------------------------------

fn mesh_convergence(r: &mut Report) {
    let peaks: Vec<(usize, f64, String)> = [1, 2, 4]
        .iter()
        .map(|&n| {
            let (out, _) = run(
                "benchmark1",
                "pushover",
                Overrides {
                    elements: Some(n),
                    ..with(Formulation::Fsdb)
                },
            );
            (n, out.result.peak_positive() / 1e3, stopped(&out))
        })
        .collect();
    let monotone = peaks[1].1 <= peaks[0].1 && peaks[2].1 <= peaks[1].1;
    let p4 = peaks[2].1;
    r.check(
        "8a mesh convergence",
        monotone && within(p4, B1_FB_PEAK_KN, 0.10),
        format!(
            "1/2/4 elements: {:.2} / {:.2} / {:.2} kN (non-increasing), 4 el vs FB {B1_FB_PEAK_KN} kN {:+.1} % (tol 10 %){}{}{}",
            peaks[0].1,
            peaks[1].1,
            p4,
            deviation_pct(p4, B1_FB_PEAK_KN),
            peaks[0].2,
            peaks[1].2,
            peaks[2].2
        ),
    );
    let ips: Vec<f64> = [5, 10, 20]
        .iter()
        .map(|&n| {
            let (out, _) = run(
                "benchmark1",
                "pushover",
                Overrides {
                    integration_points: Some(n),
                    ..with(Formulation::Fsdb)
                },
            );
            out.result.peak_positive() / 1e3
        })
        .collect();
    let change = rel(ips[2], ips[0]);
    r.check(
        "8b integration-point sweep",
        change < 0.05,
        format!(
            "5/10/20 IPs: {:.2} / {:.2} / {:.2} kN, 5 -> 20 change {:.2} % (limit 5 %)",
            ips[0],
            ips[1],
            ips[2],
            100.0 * change
        ),
    );
}

// 9 ------------------------------------------------------------------------

fn concrete_b1() -> ConcreteParams {
    ConcreteParams {
        fc: -42e6,
        eps_c: -0.0028,
        fcu: -8.4e6,
        eps_cu: -0.02,
        ec: 30e9,
        ft: 4.2e6,
        et_soft: 20e9,
        unload_ratio: 0.1,
    }
}

fn steel_b1() -> SteelParams {
    SteelParams {
        es: 200e9,
        fy: 480e6,
        b: 0.005,
        r0: 15.0,
        cr1: 0.925,
        cr2: 0.15,
    }
}

fn drive<M: UniaxialMaterial>(m: &mut M, path: &[f64]) {
    for &e in path {
        m.set_trial_strain(e);
        m.commit();
    }
}

/// Worst relative tangent error over random committed states, skipping
/// points whose neighbourhood spans a branch switch.
fn tangent_error<M: UniaxialMaterial + Clone>(
    fresh: impl Fn() -> M,
    range: (f64, f64),
    scale: f64,
    rng: &mut StdRng,
) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut used = 0;
    for _ in 0..500 {
        let mut m = fresh();
        let n = rng.random_range(0..6);
        let path: Vec<f64> = (0..n).map(|_| rng.random_range(range.0..range.1)).collect();
        drive(&mut m, &path);
        let eps = rng.random_range(range.0..range.1);
        let h = 1e-8 * eps.abs().max(1.0) * 1e-2;
        let (mut a, mut b, mut c) = (m.clone(), m.clone(), m);
        let (sp, ep) = a.set_trial_strain(eps + h);
        let (sm, em) = b.set_trial_strain(eps - h);
        let (_, e) = c.set_trial_strain(eps);
        let tol = 1e-6 * e.abs().max(1.0);
        if (ep - e).abs() > tol || (em - e).abs() > tol {
            continue;
        }
        used += 1;
        let fd = (sp - sm) / (2.0 * h);
        worst = worst.max((fd - e).abs() / e.abs().max(scale));
    }
    (worst, used)
}

fn cycle_work<M: UniaxialMaterial>(mut m: M, path: &[f64]) -> f64 {
    let mut pts = vec![0.0];
    pts.extend_from_slice(path);
    pts.push(0.0);
    let (mut work, mut e0, mut s0) = (0.0, 0.0, 0.0);
    for w in pts.windows(2) {
        for k in 1..=200 {
            let e = w[0] + (w[1] - w[0]) * k as f64 / 200.0;
            let (s, _) = m.set_trial_strain(e);
            m.commit();
            work += 0.5 * (s + s0) * (e - e0);
            e0 = e;
            s0 = s;
        }
    }
    work
}

fn materials(r: &mut Report) {
    let mut rng = StdRng::seed_from_u64(9);
    let cp = concrete_b1();
    let sp = steel_b1();
    let (ec, nc) = tangent_error(
        || Concrete::new(cp).unwrap(),
        (-0.01, 0.004),
        1e-3 * cp.ec,
        &mut rng,
    );
    let (es, ns) = tangent_error(
        || Steel::new(sp).unwrap(),
        (-0.03, 0.03),
        1e-3 * sp.es,
        &mut rng,
    );
    r.check(
        "9a material tangents",
        ec < 1e-4 && es < 1e-4 && nc > 100 && ns > 100,
        format!("finite-difference rel err: concrete {ec:.1e} ({nc} pts), steel {es:.1e} ({ns} pts) (tol 1e-4)"),
    );

    let mut c = Concrete::new(cp).unwrap();
    let (s_apex, e_apex) = c.set_trial_strain(cp.eps_c);
    let (s_half, _) = c.set_trial_strain(0.5 * cp.eps_c);
    let mut st = Steel::new(sp).unwrap();
    let eps = 0.1;
    let (sig, _) = st.set_trial_strain(eps);
    let asym = sp.fy + sp.b * sp.es * (eps - sp.fy / sp.es);
    let ok = (s_apex - cp.fc).abs() < 1e-6 * cp.fc.abs()
        && e_apex.abs() < 1e-6 * cp.ec
        && (s_half + 31.5e6).abs() < 1.0
        && rel(sig, asym) < 1e-6;
    r.check(
        "9b envelope checks",
        ok,
        format!(
            "concrete apex {:.3} MPa (tangent {e_apex:.1e}), half-strain {:.3} MPa (expect -31.5), steel at 10 % strain {:.2} vs asymptote {:.2} MPa",
            s_apex / 1e6,
            s_half / 1e6,
            sig / 1e6,
            asym / 1e6
        ),
    );

    let mut min_work = f64::INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(1..8);
        let pc: Vec<f64> = (0..n).map(|_| rng.random_range(-0.008..0.003)).collect();
        let ps: Vec<f64> = (0..n).map(|_| rng.random_range(-0.03..0.03)).collect();
        min_work = min_work
            .min(cycle_work(Concrete::new(cp).unwrap(), &pc))
            .min(cycle_work(Steel::new(sp).unwrap(), &ps));
    }
    r.check(
        "9c cyclic energy",
        min_work >= -1e-6,
        format!("50 random closed histories per material: min enclosed work {min_work:.3e} J/m3 (must be >= 0)"),
    );
}

// 10 -----------------------------------------------------------------------

fn solver_integrity(r: &mut Report) {
    let spec = builtin("benchmark1").unwrap();
    let mut m = spec.build(&Overrides::default()).unwrap();
    let good = Solver::default();
    let bad = Solver::new(SolverSettings {
        tol_r: 0.0,
        tol_u: 0.0,
        max_iter: 2,
        max_halvings: 2,
        line_search: 1,
    });
    let control = ControlDof { node: 1, dof: 1 };
    let mut step = 0;
    for k in 1..=5 {
        step += 1;
        good.solve_increment(&mut m, StepTarget::Load(k as f64 / 5.0), step)
            .unwrap();
    }
    let mut injected = 0;
    let mut intact = 0;
    for i in 1..=60 {
        let value = 0.001 * i as f64;
        if i % 10 == 0 {
            let snap = m.clone();
            injected += 1;
            let failed = bad
                .solve_increment(
                    &mut m,
                    StepTarget::Displacement { control, value },
                    step + 1,
                )
                .is_err();
            if failed && m == snap {
                intact += 1;
            }
        }
        step += 1;
        good.solve_increment(&mut m, StepTarget::Displacement { control, value }, step)
            .unwrap();
    }
    r.check(
        "10a commit/rollback",
        injected > 0 && intact == injected,
        format!("{intact}/{injected} fault-injected steps left the model bit-identical to the last commit"),
    );

    let s = elastic_rectangle(0.3, 0.4, 30e9, 40).unwrap();
    let tip = |n: usize| {
        let l = 3.0;
        let nodes: Vec<[f64; 2]> = (0..=n).map(|i| [l * i as f64 / n as f64, 0.0]).collect();
        let els = (0..n)
            .map(|i| {
                Element::new(
                    [i, i + 1],
                    nodes[i],
                    nodes[i + 1],
                    &s,
                    ElementOptions::fsdb(),
                )
                .unwrap()
            })
            .collect();
        let mut m = Model::new(nodes, els).unwrap();
        m.fix(0, [true; 3]).unwrap();
        m.add_load(n, 1, 10e3).unwrap();
        m.add_load(n, 2, 3e3).unwrap();
        run_load_ramp(&mut m, &Solver::default(), 1.0, 1).unwrap();
        let u = m.displacements();
        [u[3 * n], u[3 * n + 1], u[3 * n + 2]]
    };
    let (a, b) = (tip(1), tip(2));
    let err = (1..3).map(|k| rel(b[k], a[k])).fold(0.0, f64::max);
    r.check(
        "10b one vs two elastic elements",
        err < 1e-10,
        format!("tip deflection and rotation rel diff {err:.1e} (tol 1e-10)"),
    );
}

// Benchmark 2 (qualitative) --------------------------------------------------

fn benchmark2(r: &mut Report) {
    r.skip(
        "B2 initial stiffness",
        "no experimental stiffness value is available to compare against; not evaluated".into(),
    );
    let (out, secs) = run("benchmark2", "cyclic", with(Formulation::Fsdb));
    // elongation at the positive peaks of the last three cycles
    let steps = &out.result.steps;
    let amp = 0.021;
    let mut peaks: Vec<f64> = steps
        .iter()
        .filter(|s| {
            [0.015, 0.018, 0.021]
                .iter()
                .any(|a| (s.control_disp - a).abs() < 1e-9)
        })
        .map(|s| s.axial_disp)
        .collect();
    peaks.dedup();
    let min = peaks.iter().copied().fold(f64::INFINITY, f64::min);
    let last = steps.last().map_or(f64::NAN, |s| s.axial_disp);
    r.check(
        "B2 free-end elongation",
        out.result.converged() && !peaks.is_empty() && min > 0.0,
        format!(
            "axial displacement at the 15/18/21 mm peaks min {:.3} mm, after the last cycle {:.3} mm (must be > 0), amplitude {:.0} mm, {secs:.1} s{}",
            min * 1e3,
            last * 1e3,
            amp * 1e3,
            stopped(&out)
        ),
    );
}

fn main() -> ExitCode {
    let t = Instant::now();
    let mut r = Report { lines: Vec::new() };
    elastic_patch(&mut r);
    hermite_reduction(&mut r);
    stepped_beam_oracle(&mut r);
    axial_equilibrium(&mut r);
    benchmark1_monotonic(&mut r);
    table1(&mut r);
    benchmark1_cyclic(&mut r);
    mesh_convergence(&mut r);
    materials(&mut r);
    solver_integrity(&mut r);
    benchmark2(&mut r);
    let failed = r.failures();
    println!(
        "acceptance: {} checks, {} failed, {} skipped, {:.1} s",
        r.lines.len(),
        failed,
        r.lines.iter().filter(|l| l.0 == Status::Skip).count(),
        t.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
