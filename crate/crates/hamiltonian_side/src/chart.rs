use crate::HamiltonianError;
use expr_core::jet::{lift, max_depth, reals};
use expr_core::{parse, Expr, Jet, ScalarField, SymbolTable, VectorField};
use jet_geometry::LagrangianSystem;
use nalgebra::DMatrix;
use precosym::frame::{self, FrozenPivots, JetMat};
use precosym::{linalg, sampling};
use std::sync::Arc;

/// Number of random Lagrangian points used to confirm the image description.
pub const IMAGE_SAMPLES: usize = 100;
const IMAGE_SEED: u64 = 0x494d_4147;
const IMAGE_TOL: f64 = 1e-9;
const NEWTON_ITERS: usize = 100;

/// How the primary constraints are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum PrimaryMode {
    /// Eliminate the pivot velocities from `p_P = ∂L/∂v^P` by Newton's method.
    AutoEliminate,
    /// Constraint expressions over `(t, q, p)`, optionally with `h₀` for `𝒴_E = ∂/∂t`.
    UserSupplied {
        constraints: Vec<String>,
        h0: Option<String>,
    },
}

/// Newton solve of `∂L/∂v^P(t, q, v) = p_P` for the pivot velocities, with the
/// remaining velocities held at their seed values.
#[derive(Clone, Debug)]
struct VelocitySolver {
    sys: Arc<LagrangianSystem>,
    pivots: Vec<usize>,
    fixed: Vec<(usize, f64)>,
    guess: Vec<f64>,
}

impl VelocitySolver {
    fn point(&self, tq: &[Jet], vp: &[Jet]) -> Vec<Jet> {
        let n = self.sys.n;
        let mut x: Vec<Jet> = tq[..=n].to_vec();
        let mut v = vec![Jet::constant(0.0); n];
        for (k, &i) in self.pivots.iter().enumerate() {
            v[i] = vp[k].clone();
        }
        for &(i, val) in &self.fixed {
            v[i] = Jet::constant(val);
        }
        x.extend(v);
        x
    }

    fn residual(&self, x: &[Jet], p: &[Jet]) -> Vec<Jet> {
        self.pivots
            .iter()
            .zip(p)
            .map(|(&i, pi)| &self.sys.dv[i].eval(x) - pi)
            .collect()
    }

    fn jacobian(&self, x: &[Jet]) -> JetMat {
        JetMat::from_rows(
            self.pivots
                .iter()
                .map(|&r| self.pivots.iter().map(|&c| self.sys.hess[r][c].eval(x)).collect())
                .collect(),
        )
    }

    /// Full velocity vector at `(t, q, p_P)`; non-finite when Newton fails.
    fn solve(&self, tq: &[Jet], p: &[Jet]) -> Vec<Jet> {
        let k = self.pivots.len();
        let tq_re = reals(&tq[..=self.sys.n]);
        let p_re = reals(p);
        let tq0 = lift(&tq_re);
        let p0 = lift(&p_re);
        let mut z = self.guess.clone();
        let mut ok = k == 0;
        let scale = 1.0 + p_re.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for _ in 0..NEWTON_ITERS {
            let x = self.point(&tq0, &lift(&z));
            let r = reals(&self.residual(&x, &p0));
            let rn = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !rn.is_finite() {
                break;
            }
            if rn <= 1e-13 * scale {
                ok = true;
                break;
            }
            let j = self.jacobian(&x).real();
            let step = match j.lu().solve(&nalgebra::DVector::from_vec(r)) {
                Some(s) => s,
                None => break,
            };
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a - t * b).collect();
                let xr = self.point(&tq0, &lift(&trial));
                let rr = reals(&self.residual(&xr, &p0));
                let rt = rr.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                if rt.is_finite() && rt < rn {
                    z = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if !ok {
            let x = self.point(&tq0, &lift(&z));
            let r = reals(&self.residual(&x, &p0));
            ok = r.iter().fold(0.0f64, |a, v| a.max(v.abs())) <= 1e-10 * scale;
        }
        let depth = max_depth(tq).max(max_depth(p));
        if !ok {
            return vec![Jet::constant(f64::NAN).promote(depth); self.sys.n];
        }
        let mut zj: Vec<Jet> = lift(&z);
        if depth > 0 && k > 0 {
            for _ in 0..depth + 2 {
                let x = self.point(tq, &zj);
                let r = self.residual(&x, p);
                match frame::solve_vec(&self.jacobian(&x), &r) {
                    Ok(step) => {
                        for (a, s) in zj.iter_mut().zip(&step) {
                            *a -= s;
                        }
                    }
                    Err(_) => return vec![Jet::constant(f64::NAN).promote(depth); self.sys.n],
                }
            }
        }
        self.point(tq, &zj)[1 + self.sys.n..].to_vec()
    }
}

/// Chart data of the image `𝒫 = FL(J¹E) ⊂ J¹*E`.
///
/// `𝒫` carries coordinates `y = (t, q, p_K)` where `K` are the kept momenta
/// (the Hessian pivots in automatic mode); `embedding` maps `y` into
/// `J¹*E = (t, q, p)` and `projection` forgets the eliminated momenta.
#[derive(Clone, Debug)]
pub struct MomentumChart {
    pub n: usize,
    pub system: Arc<LagrangianSystem>,
    pub table: SymbolTable,
    pub kept: Vec<usize>,
    pub eliminated: Vec<usize>,
    pub primaries: Vec<ScalarField>,
    pub primary_labels: Vec<String>,
    pub embedding: VectorField,
    pub projection: VectorField,
    /// `FL₀ : J¹E → 𝒫` in the chart `y`.
    pub fl0: VectorField,
    /// `FL : J¹E → J¹*E`.
    pub fl: VectorField,
    /// `h₀` for `𝒴_E = ∂/∂t` (the projected energy) as a function of `y`.
    pub energy: ScalarField,
    pub seed_p: Vec<f64>,
    pub seed: Vec<f64>,
    pub names_p: Vec<String>,
    pub mode: PrimaryMode,
}

impl MomentumChart {
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn dim_p(&self) -> usize {
        1 + self.n + self.kept.len()
    }

    /// Pulls a function on `𝒫` back to `J¹*E` through the projection.
    pub fn lift_to_dual(&self, f: &ScalarField) -> ScalarField {
        f.pullback(self.dim(), &self.projection)
    }

    /// `h₀^∇ = h₀ − 𝒴^i p_i` on `𝒫`, extended to `J¹*E` as constant along the eliminated momenta.
    pub fn hamiltonian_on_dual(&self, connection: &crate::cosym::BaseConnection) -> ScalarField {
        let n = self.n;
        let (energy, emb, proj, c) = (
            self.energy.clone(),
            self.embedding.clone(),
            self.projection.clone(),
            connection.clone(),
        );
        ScalarField::composed(self.dim(), move |x| {
            let y = proj.eval_jet(x);
            let on_p = emb.eval_jet(&y);
            let yp = expr_core::field::dot(&c.eval_jet(x), &on_p[n + 1..]);
            &energy.eval_jet(&y) - &yp
        })
    }

    /// Pulls a function on `𝒫` back to `J¹E` through `FL₀`.
    pub fn pull_to_lagrangian(&self, f: &ScalarField) -> ScalarField {
        f.pullback(self.system.dim(), &self.fl0)
    }
}

fn dual_point(n: usize, tq: &[Jet], p: &[Jet]) -> Vec<Jet> {
    let mut x = tq[..=n].to_vec();
    x.extend_from_slice(p);
    x
}

pub fn build_primary_chart(sys: &LagrangianSystem, mode: PrimaryMode) -> Result<MomentumChart, HamiltonianError> {
    let n = sys.n;
    let dim = sys.dim();
    let sys_arc = Arc::new(sys.clone());
    let table = SymbolTable::momentum(n);
    let maps = jet_geometry::legendre::legendre_map(sys);
    let h = sys.hessian_at(&sys.seed);
    let hp = FrozenPivots::select_symmetric(&h);
    let mut vp: Vec<usize> = hp.rows.clone();
    vp.sort_unstable();
    let vf: Vec<usize> = (0..n).filter(|i| !vp.contains(i)).collect();
    let solver = VelocitySolver {
        sys: sys_arc.clone(),
        pivots: vp.clone(),
        fixed: vf.iter().map(|&i| (i, sys.seed[sys.v_slot(i)])).collect(),
        guess: vp.iter().map(|&i| sys.seed[sys.v_slot(i)]).collect(),
    };
    let seed = maps.fl.eval(&sys.seed);

    let chart = match &mode {
        PrimaryMode::AutoEliminate => auto_chart(sys, sys_arc.clone(), &table, solver, &vp, &vf, seed.clone(), &maps)?,
        PrimaryMode::UserSupplied { constraints, h0 } => user_chart(
            sys,
            sys_arc.clone(),
            &table,
            solver,
            &vp,
            constraints,
            h0.as_deref(),
            seed.clone(),
            &maps,
        )?,
    };
    let chart = MomentumChart { mode, ..chart };
    verify_image(&chart, dim)?;
    Ok(chart)
}

#[allow(clippy::too_many_arguments)]
fn auto_chart(
    sys: &LagrangianSystem,
    sys_arc: Arc<LagrangianSystem>,
    table: &SymbolTable,
    solver: VelocitySolver,
    vp: &[usize],
    vf: &[usize],
    seed: Vec<f64>,
    maps: &jet_geometry::legendre::LegendreMaps,
) -> Result<MomentumChart, HamiltonianError> {
    let n = sys.n;
    let dim = sys.dim();
    let kept = vp.to_vec();
    let eliminated = vf.to_vec();
    let dim_p = 1 + n + kept.len();
    let solver = Arc::new(solver);

    let (s1, k1, e1) = (solver.clone(), kept.clone(), eliminated.clone());
    let sys1 = sys_arc.clone();
    let embedding = VectorField::new(dim_p, dim, move |y| {
        let v = s1.solve(&y[..=n], &y[n + 1..]);
        let mut x: Vec<Jet> = y[..=n].to_vec();
        x.extend(v);
        let mut p = vec![Jet::constant(0.0); n];
        for (k, &i) in k1.iter().enumerate() {
            p[i] = y[n + 1 + k].clone();
        }
        for &i in &e1 {
            p[i] = sys1.dv[i].eval(&x);
        }
        dual_point(n, y, &p)
    });

    let mut primaries = Vec::new();
    let mut labels = Vec::new();
    for &f in &eliminated {
        let s = solver.clone();
        let k2 = kept.clone();
        let sys2 = sys_arc.clone();
        primaries.push(ScalarField::composed(dim, move |x| {
            let pk: Vec<Jet> = k2.iter().map(|&i| x[n + 1 + i].clone()).collect();
            let v = s.solve(&x[..=n], &pk);
            let mut lx: Vec<Jet> = x[..=n].to_vec();
            lx.extend(v);
            &x[n + 1 + f] - &sys2.dv[f].eval(&lx)
        }));
        labels.push(format!(
            "{} - dL/d{}",
            table.name(n + 1 + f),
            sys.table.name(sys.v_slot(f))
        ));
    }

    let s3 = solver.clone();
    let energy_expr = Arc::new(sys.energy());
    let energy = ScalarField::composed(dim_p, move |y| {
        let v = s3.solve(&y[..=n], &y[n + 1..]);
        let mut x: Vec<Jet> = y[..=n].to_vec();
        x.extend(v);
        energy_expr.eval(&x)
    });

    let common = common_maps(sys, &kept, maps);
    let seed_p = common.1.eval(&sys.seed);
    Ok(MomentumChart {
        n,
        system: sys_arc,
        table: table.clone(),
        names_p: names_p(table, n, &kept),
        kept,
        eliminated,
        primaries,
        primary_labels: labels,
        embedding,
        projection: common.0,
        fl0: common.1,
        fl: maps.fl.clone(),
        energy,
        seed_p,
        seed,
        mode: PrimaryMode::AutoEliminate,
    })
}

fn names_p(table: &SymbolTable, n: usize, kept: &[usize]) -> Vec<String> {
    let mut names: Vec<String> = table.names()[..=n].to_vec();
    names.extend(kept.iter().map(|&i| table.name(n + 1 + i).to_string()));
    names
}

/// Projection `J¹*E → 𝒫` and `FL₀ : J¹E → 𝒫` for a given set of kept momenta.
fn common_maps(
    sys: &LagrangianSystem,
    kept: &[usize],
    maps: &jet_geometry::legendre::LegendreMaps,
) -> (VectorField, VectorField) {
    let n = sys.n;
    let dim = sys.dim();
    let dim_p = 1 + n + kept.len();
    let k1 = kept.to_vec();
    let projection = VectorField::new(dim, dim_p, move |x| {
        let mut y: Vec<Jet> = x[..=n].to_vec();
        y.extend(k1.iter().map(|&i| x[n + 1 + i].clone()));
        y
    });
    let fl = maps.fl.clone();
    let proj = projection.clone();
    let fl0 = VectorField::new(dim, dim_p, move |x| proj.eval_jet(&fl.eval_jet(x)));
    (projection, fl0)
}

#[allow(clippy::too_many_arguments)]
fn user_chart(
    sys: &LagrangianSystem,
    sys_arc: Arc<LagrangianSystem>,
    table: &SymbolTable,
    solver: VelocitySolver,
    vp: &[usize],
    sources: &[String],
    h0: Option<&str>,
    seed: Vec<f64>,
    maps: &jet_geometry::legendre::LegendreMaps,
) -> Result<MomentumChart, HamiltonianError> {
    let n = sys.n;
    let dim = sys.dim();
    let exprs: Vec<Expr> = sources.iter().map(|s| parse(s, table)).collect::<Result<_, _>>()?;
    let m = exprs.len();
    let grads: Vec<Vec<Expr>> = exprs
        .iter()
        .map(|e| (0..n).map(|j| expr_core::diff(e, n + 1 + j)).collect())
        .collect();
    let jp = DMatrix::from_fn(m, n, |a, j| grads[a][j].eval(&seed));
    let piv = FrozenPivots::select(&jp);
    if piv.rank() != m {
        return Err(HamiltonianError::ParametrizationFailure(format!(
            "constraint Jacobian in the momenta has rank {} < {m}",
            piv.rank()
        )));
    }
    let rows = piv.rows.clone();
    let mut eliminated: Vec<usize> = piv.cols.clone();
    eliminated.sort_unstable();
    let kept: Vec<usize> = (0..n).filter(|i| !eliminated.contains(i)).collect();
    let dim_p = 1 + n + kept.len();
    let guess: Vec<f64> = eliminated.iter().map(|&i| seed[n + 1 + i]).collect();

    let ex = Arc::new(exprs.clone());
    let gr = Arc::new(grads);
    let (k1, e1) = (kept.clone(), eliminated.clone());
    let rows1 = rows.clone();
    let embedding = VectorField::new(dim_p, dim, move |y| {
        let assemble = |pe: &[Jet]| {
            let mut p = vec![Jet::constant(0.0); n];
            for (k, &i) in k1.iter().enumerate() {
                p[i] = y[n + 1 + k].clone();
            }
            for (k, &i) in e1.iter().enumerate() {
                p[i] = pe[k].clone();
            }
            dual_point(n, y, &p)
        };
        let depth = max_depth(y);
        let yr = lift(&reals(y));
        let mut z = guess.clone();
        let mut ok = false;
        for _ in 0..NEWTON_ITERS {
            let x = reals(&{
                let mut p = vec![Jet::constant(0.0); n];
                for (k, &i) in k1.iter().enumerate() {
                    p[i] = yr[n + 1 + k].clone();
                }
                for (k, &i) in e1.iter().enumerate() {
                    p[i] = Jet::constant(z[k]);
                }
                dual_point(n, &yr, &p)
            });
            let r: Vec<f64> = rows1.iter().map(|&a| ex[a].eval(&x)).collect();
            let rn = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if !rn.is_finite() {
                break;
            }
            if rn <= 1e-13 * (1.0 + z.iter().fold(0.0f64, |a, v| a.max(v.abs()))) {
                ok = true;
                break;
            }
            let j = DMatrix::from_fn(rows1.len(), e1.len(), |a, b| gr[rows1[a]][e1[b]].eval(&x));
            match j.lu().solve(&nalgebra::DVector::from_vec(r)) {
                Some(s) => z.iter_mut().zip(s.iter()).for_each(|(a, b)| *a -= b),
                None => break,
            }
        }
        if !ok {
            return vec![Jet::constant(f64::NAN).promote(depth); 2 * n + 1];
        }
        let mut zj = lift(&z);
        if depth > 0 {
            for _ in 0..depth + 2 {
                let x = assemble(&zj);
                let r: Vec<Jet> = rows1.iter().map(|&a| ex[a].eval(&x)).collect();
                let j = JetMat::from_rows(
                    rows1
                        .iter()
                        .map(|&a| e1.iter().map(|&b| gr[a][b].eval(&x)).collect())
                        .collect(),
                );
                match frame::solve_vec(&j, &r) {
                    Ok(s) => zj.iter_mut().zip(&s).for_each(|(a, b)| *a -= b),
                    Err(_) => return vec![Jet::constant(f64::NAN).promote(depth); 2 * n + 1],
                }
            }
        }
        assemble(&zj)
    });

    let primaries: Vec<ScalarField> = exprs.iter().map(|e| ScalarField::symbolic(e.clone(), dim)).collect();
    let labels: Vec<String> = exprs.iter().map(|e| e.to_text(table)).collect();

    let energy = match h0 {
        Some(src) => {
            let e = ScalarField::symbolic(parse(src, table)?, dim);
            e.pullback(dim_p, &embedding)
        }
        None => {
            let solver = Arc::new(solver);
            let emb = embedding.clone();
            let vp1 = vp.to_vec();
            let energy_expr = Arc::new(sys.energy());
            ScalarField::composed(dim_p, move |y| {
                let x = emb.eval_jet(y);
                let pp: Vec<Jet> = vp1.iter().map(|&i| x[n + 1 + i].clone()).collect();
                let v = solver.solve(&x[..=n], &pp);
                let mut lx: Vec<Jet> = x[..=n].to_vec();
                lx.extend(v);
                energy_expr.eval(&lx)
            })
        }
    };

    let common = common_maps(sys, &kept, maps);
    let seed_p = common.1.eval(&sys.seed);
    Ok(MomentumChart {
        n,
        system: sys_arc,
        table: table.clone(),
        names_p: names_p(table, n, &kept),
        kept,
        eliminated,
        primaries,
        primary_labels: labels,
        embedding,
        projection: common.0,
        fl0: common.1,
        fl: maps.fl.clone(),
        energy,
        seed_p,
        seed,
        mode: PrimaryMode::AutoEliminate,
    })
}

/// Confirms that the primaries vanish on `FL(J¹E)`, that the embedding
/// reproduces `FL`, and that the energy is `FL₀`-projectable, at random
/// Lagrangian points around the seed.
fn verify_image(chart: &MomentumChart, dim: usize) -> Result<(), HamiltonianError> {
    let sys = &chart.system;
    let energy = sys.energy();
    let mut pts = vec![sys.seed.clone()];
    pts.extend(sampling::gaussian_cloud(&sys.seed, IMAGE_SAMPLES, 1.0, IMAGE_SEED));
    let auto = chart.mode == PrimaryMode::AutoEliminate;
    for x in pts {
        let fx = chart.fl.eval(&x);
        let scale = 1.0 + fx.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut worst: f64 = 0.0;
        for c in &chart.primaries {
            worst = worst.max(c.eval(&fx).abs());
        }
        let y = chart.fl0.eval(&x);
        let back = chart.embedding.eval(&y);
        for i in 0..dim {
            worst = worst.max((back[i] - fx[i]).abs());
        }
        let e_err = (chart.energy.eval(&y) - energy.eval(&x)).abs();
        worst = worst.max(e_err);
        if !(worst <= IMAGE_TOL * scale) {
            if auto {
                return Err(HamiltonianError::AutoEliminateUnsupported(format!(
                    "momentum relations depend on the eliminated velocities (residual {worst:e} at {x:?})"
                )));
            }
            return Err(HamiltonianError::ImageMismatch {
                residual: worst,
                point: x,
            });
        }
    }
    Ok(())
}

/// Rank of the Jacobian of the primaries in the momenta at `x`.
pub fn primary_rank(chart: &MomentumChart, x: &[f64]) -> usize {
    let n = chart.n;
    let rows: Vec<Vec<f64>> = chart
        .primaries
        .iter()
        .map(|c| c.gradient(x)[n + 1..].to_vec())
        .collect();
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), n, |a, j| rows[a][j]);
    linalg::rank(&m)
}
