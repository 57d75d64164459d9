//! Randomized verification of the linear-algebra lemmas on precosymplectic
//! and cosymplectic spaces.

use crate::{
    dirac_split, dirac_split_from_differentials, hamiltonian_and_evolution, linalg, orthogonal_complement,
    poisson_sharp, reeb, PrecoPoint, Subspace, SUBSPACE_TOL,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Worst residual of one lemma over the sampled points.
#[derive(Clone, Debug)]
pub struct LemmaOutcome {
    pub name: &'static str,
    pub points: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Canonical data transported by a random change of basis `M`.
pub struct Transported {
    pub point: PrecoPoint,
    pub m: DMatrix<f64>,
    pub m_inv: DMatrix<f64>,
    pub omega_canonical: DMatrix<f64>,
}

impl Transported {
    pub fn vector(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.m_inv * v
    }
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    loop {
        let m = DMatrix::identity(n, n) + gaussian_matrix(rng, n, n) * 0.4;
        if linalg::rcond(&m) > 1e-2 {
            let inv = m.clone().try_inverse().expect("well conditioned");
            return (m, inv);
        }
    }
}

/// Precosymplectic triple of dimension `2N+1` with `rank ω = 2r`.
pub fn random_precosymplectic(rng: &mut ChaCha8Rng, n_half: usize, r: usize) -> Transported {
    let n = 2 * n_half + 1;
    let mut w = DMatrix::zeros(n, n);
    for k in 0..r.min(n_half) {
        w[(2 * k + 1, 2 * k + 2)] = 1.0;
        w[(2 * k + 2, 2 * k + 1)] = -1.0;
    }
    let mut eta = DVector::zeros(n);
    eta[0] = 1.0;
    let mut r0 = DVector::zeros(n);
    r0[0] = 1.0;
    let (m, m_inv) = well_conditioned(rng, n);
    let omega = m.transpose() * &w * &m;
    let eta_t = m.transpose() * eta;
    let r_t = &m_inv * r0;
    let point = PrecoPoint::new(eta_t, omega)
        .and_then(|p| p.with_reeb(r_t))
        .expect("transported triple");
    Transported {
        point,
        m,
        m_inv,
        omega_canonical: w,
    }
}

pub fn random_cosymplectic(rng: &mut ChaCha8Rng, n_half: usize) -> Transported {
    random_precosymplectic(rng, n_half, n_half)
}

fn random_subspace(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Subspace {
    if k == 0 {
        return Subspace::zero(n);
    }
    Subspace::from_matrix(&gaussian_matrix(rng, n, k))
}

/// Subspace containing part of `V⊥` so the dimension formula is exercised
/// with a nontrivial intersection.
fn mixed_subspace(rng: &mut ChaCha8Rng, p: &PrecoPoint, k: usize) -> Subspace {
    let vperp = p.characteristic();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    if vperp.dim() > 0 && rng.random_bool(0.5) {
        let take = rng.random_range(1..=vperp.dim());
        for j in 0..take {
            cols.push(vperp.orthonormal().column(j).into_owned());
        }
    }
    while cols.len() < k {
        cols.push(gaussian_vector(rng, p.dim()));
    }
    Subspace::span(p.dim(), &cols)
}

struct Acc {
    name: &'static str,
    tol: f64,
    worst: f64,
    points: usize,
    ok: bool,
}

impl Acc {
    fn new(name: &'static str, tol: f64) -> Acc {
        Acc {
            name,
            tol,
            worst: 0.0,
            points: 0,
            ok: true,
        }
    }
    fn residual(&mut self, r: f64) {
        self.worst = self.worst.max(r);
        if !(r <= self.tol) {
            self.ok = false;
        }
    }
    fn exact(&mut self, cond: bool) {
        if !cond {
            self.ok = false;
            self.worst = f64::INFINITY;
        }
    }
    fn done(self) -> LemmaOutcome {
        LemmaOutcome {
            name: self.name,
            points: self.points,
            worst: self.worst,
            tolerance: self.tol,
            passed: self.ok,
        }
    }
}

fn mat_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Smallest singular value of a sampled second-class bracket matrix, relative
/// to `‖Λ‖ max‖dX‖²`.
const CBAR_RCOND: f64 = 1e-3;

/// `Λ` with `Λ_ij = (♯e_i)_j`.
fn poisson_matrix(p: &PrecoPoint) -> DMatrix<f64> {
    let n = p.dim();
    DMatrix::from_fn(n, n, |i, j| {
        let mut ei = DVector::zeros(n);
        ei[i] = 1.0;
        poisson_sharp(p, &ei).expect("cosymplectic")[j]
    })
}

/// Runs every lemma on `points` random spaces per lemma.
///
/// Residuals of identities that pass through a solve with `♭` are divided by
/// its condition number, and projector residuals by the projector size times the
/// relative size of the constraint bracket matrix and the condition of `♭`.
pub fn lemma_suite(seed: u64, points: usize) -> Vec<LemmaOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut a = Acc::new("complement of the whole space is ker omega and ker eta", SUBSPACE_TOL);
    let mut b = Acc::new("dimension formula for complements", 0.0);
    let mut c = Acc::new("complements reverse inclusion", SUBSPACE_TOL);
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let r = rng.random_range(0..=nh);
        let t = random_precosymplectic(&mut rng, nh, r);
        let p = &t.point;
        let n = p.dim();
        let vp = orthogonal_complement(p, &Subspace::full(n));
        a.residual(
            vp.containment_residual(&p.characteristic())
                .max(p.characteristic().containment_residual(&vp)),
        );
        a.exact(vp.dim() == p.characteristic().dim());
        let k = rng.random_range(0..=n);
        let ks = mixed_subspace(&mut rng, p, k);
        let kp = orthogonal_complement(p, &ks);
        let inter = p.characteristic().intersection(&ks);
        b.exact(kp.dim() == n - ks.dim() + inter.dim());
        let sub_k = rng.random_range(0..=ks.dim());
        let kprime = Subspace::span(n, &ks.vectors()[..sub_k]);
        c.residual(kp.containment_residual(&orthogonal_complement(p, &kprime)));
        a.points += 1;
        b.points += 1;
        c.points += 1;
    }
    out.extend([a.done(), b.done(), c.done()]);

    let mut d = Acc::new("complements independent of the chosen Reeb-type vector", SUBSPACE_TOL);
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let n = 2 * nh + 1;
        let big = {
            let g = gaussian_matrix(&mut rng, n, n);
            let mut w = &g - g.transpose();
            if rng.random_bool(0.5) {
                let v = gaussian_vector(&mut rng, n);
                w = &w - (&w * &v) * v.transpose() - &v * (v.transpose() * &w);
            }
            w
        };
        let eta = gaussian_vector(&mut rng, n);
        let base = PrecoPoint::new(eta.clone(), big).expect("square");
        let norm = |rng: &mut ChaCha8Rng| loop {
            let v = gaussian_vector(rng, n);
            let s = eta.dot(&v);
            if s.abs() >= 0.25 * eta.norm() * v.norm() {
                break v / s;
            }
        };
        let (r1, r2) = (norm(&mut rng), norm(&mut rng));
        let p1 = base.split_along(&r1);
        let p2 = base.split_along(&r2);
        let v1 = orthogonal_complement(&p1, &Subspace::full(n));
        let v2 = orthogonal_complement(&p2, &Subspace::full(n));
        d.residual(v1.containment_residual(&v2).max(v2.containment_residual(&v1)));
        d.exact(v1.dim() == v2.dim());
        let kd = rng.random_range(0..=n);
        let ks = random_subspace(&mut rng, n, kd);
        d.exact(orthogonal_complement(&p1, &ks).dim() == orthogonal_complement(&p2, &ks).dim());
        d.points += 1;
    }
    out.push(d.done());

    let mut e = Acc::new("complements in cosymplectic spaces", SUBSPACE_TOL);
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let t = random_cosymplectic(&mut rng, nh);
        let p = &t.point;
        let n = p.dim();
        e.exact(orthogonal_complement(p, &Subspace::full(n)).dim() == 0);
        let kd = rng.random_range(0..=n);
        let ks = random_subspace(&mut rng, n, kd);
        let kp = orthogonal_complement(p, &ks);
        e.exact(kp.dim() == n - ks.dim());
        if ks.intersection(&kp).dim() == 0 {
            let mut cols = ks.vectors();
            cols.extend(kp.vectors());
            let sum = Subspace::span(n, &cols);
            e.exact(sum.dim() == n);
        }
        e.points += 1;
    }
    out.push(e.done());

    let mut f = Acc::new("restricted structure and its Reeb vector", 1e-9);
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let t = random_cosymplectic(&mut rng, nh);
        let n = 2 * nh + 1;
        let pairs = rng.random_range(0..=nh);
        let mut w = DVector::zeros(n);
        for k in pairs..nh {
            w[2 * k + 1] = rng.sample(StandardNormal);
            w[2 * k + 2] = rng.sample(StandardNormal);
        }
        let mut r_k = w.clone();
        r_k[0] = 1.0;
        let mut cols = vec![t.vector(&r_k)];
        for k in 0..pairs {
            for s in [2 * k + 1, 2 * k + 2] {
                let mut e = DVector::zeros(n);
                e[s] = 1.0;
                cols.push(t.vector(&e));
            }
        }
        let ks = Subspace::span(n, &cols);
        let p = &t.point;
        if ks.intersection(&orthogonal_complement(p, &ks)).dim() != 0 {
            f.exact(false);
            continue;
        }
        let basis = DMatrix::from_columns(&cols);
        let wk = basis.transpose() * p.omega() * &basis;
        let ek = basis.transpose() * p.eta();
        let pk = PrecoPoint::new(ek, wk).expect("square");
        f.exact(pk.is_cosymplectic());
        f.exact(pk.dim() % 2 == 1);
        if let Ok(rk) = reeb(&pk) {
            let mut expect = DVector::zeros(cols.len());
            expect[0] = 1.0;
            f.residual((rk - expect).abs().max());
        }
        f.points += 1;
    }
    out.push(f.done());

    let mut g = Acc::new(
        "complement equals sharp of the annihilator when R lies in K",
        SUBSPACE_TOL,
    );
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let t = random_cosymplectic(&mut rng, nh);
        let n = 2 * nh + 1;
        let mut r0 = DVector::zeros(n);
        r0[0] = 1.0;
        let mut cols = vec![t.vector(&r0)];
        let extra = rng.random_range(0..n - 1);
        for _ in 0..extra {
            cols.push(gaussian_vector(&mut rng, n));
        }
        let ks = Subspace::span(n, &cols);
        let p = &t.point;
        let kp = orthogonal_complement(p, &ks);
        let ann = ks.annihilator();
        let sharp: Vec<DVector<f64>> = ann.iter().map(|a| poisson_sharp(p, a).expect("cosymplectic")).collect();
        let sp = Subspace::span(n, &sharp);
        g.residual(kp.containment_residual(&sp).max(sp.containment_residual(&kp)));
        g.exact(kp.dim() == sp.dim());
        g.points += 1;
    }
    out.push(g.done());

    let mut h = Acc::new("shifted structure keeps sharp and Hamiltonian vectors", 1e-12);
    for _ in 0..points {
        let nh = rng.random_range(1..=3);
        let t = random_cosymplectic(&mut rng, nh);
        let p = &t.point;
        let n = p.dim();
        let alpha = gaussian_vector(&mut rng, n);
        let shifted_omega = p.omega() + (&alpha * p.eta().transpose() - p.eta() * alpha.transpose());
        let q = PrecoPoint::new(p.eta().clone(), shifted_omega).expect("square");
        let (_, e_alpha) = hamiltonian_and_evolution(p, &alpha).expect("cosymplectic");
        let rq = reeb(&q).expect("shift stays cosymplectic");
        let kappa = 1.0 / linalg::rcond(&p.flat_matrix()).min(linalg::rcond(&q.flat_matrix()));
        let scale = e_alpha.norm().max(1.0);
        h.residual((rq - &e_alpha).norm() / scale / kappa);
        let beta = gaussian_vector(&mut rng, n);
        let (xb, _) = hamiltonian_and_evolution(p, &beta).expect("cosymplectic");
        let (xq, _) = hamiltonian_and_evolution(&q, &beta).expect("cosymplectic");
        h.residual((&xb - &xq).norm() / xb.norm().max(1.0) / kappa);
        let (l1, l2) = (poisson_matrix(p), poisson_matrix(&q));
        h.residual(mat_diff(&l1, &l2) / linalg::max_abs(&l1).max(1.0) / kappa);
        h.points += 1;
    }
    out.push(h.done());

    let mut s = Acc::new("projectors from the splitting and from differentials agree", 1e-12);
    let mut attempts = 0;
    while s.points < points && attempts < 20 * points {
        attempts += 1;
        let nh = rng.random_range(1..=3);
        let t = random_cosymplectic(&mut rng, nh);
        let p = &t.point;
        let n = p.dim();
        let kcodim = 2 * rng.random_range(1..=nh);
        let dx: Vec<DVector<f64>> = (0..kcodim).map(|_| gaussian_vector(&mut rng, n)).collect();
        let lam = poisson_matrix(p);
        let cbar = DMatrix::from_fn(kcodim, kcodim, |i, j| dx[i].dot(&(&lam * &dx[j])));
        let size = linalg::singular_values(&lam)[0] * dx.iter().map(|v| v.norm_squared()).fold(0.0, f64::max);
        let rc = linalg::singular_values(&cbar).last().copied().unwrap_or(0.0) / size;
        if rc < CBAR_RCOND {
            continue;
        }
        let dmat = DMatrix::from_fn(kcodim, n, |i, j| dx[i][j]);
        let d = Subspace::from_matrix(&linalg::null_space(&dmat));
        let (Ok((pp, qq)), Ok((p2, q2))) = (dirac_split(p, &d), dirac_split_from_differentials(p, &dx)) else {
            s.exact(false);
            continue;
        };
        let scale = linalg::max_abs(&pp).max(linalg::max_abs(&qq)).max(1.0) / rc / linalg::rcond(&p.flat_matrix());
        s.residual(mat_diff(&pp, &p2).max(mat_diff(&qq, &q2)) / scale);
        s.residual(mat_diff(&(&pp * &pp), &pp) / scale);
        s.residual(mat_diff(&(&pp + &qq), &DMatrix::identity(n, n)) / scale);
        s.residual(linalg::max_abs(&(&pp * &qq)) / scale);
        s.points += 1;
    }
    out.push(s.done());
    out
}
