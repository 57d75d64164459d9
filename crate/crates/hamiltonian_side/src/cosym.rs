//! Cosymplectic structure `(ω̃, dt)` on `J¹*E` induced by a vector field
//! `𝒴_E = ∂/∂t + 𝒴^i ∂/∂q^i` on `E`, with the coordinate formulas for the
//! Liouville-type forms, the Hamiltonian section and the Reeb fields.
//!
//! Every coordinate formula is kept as a field of its own, and
//! [`CosymplecticStructure::formula_checks`] tests each one against the
//! defining relations (pullbacks, `Ω = −dΘ`, `♭`-equations). Computations
//! downstream use the defining relations.

use expr_core::field::{contract_jet, dot};
use expr_core::jet::lift;
use expr_core::{
    diff, parse, CovectorField, Expr, Jet, ParseError, ScalarField, SymbolTable, TwoFormField, VectorField,
};
use precosym::frame::{self, JetMat};

/// Components `𝒴^i(t, q)` of a connection field on `E` and their `q`-derivatives.
#[derive(Clone, Debug)]
pub struct BaseConnection {
    pub n: usize,
    pub components: Vec<Expr>,
    /// `derivatives[i][j] = ∂𝒴^i/∂q^j`.
    pub derivatives: Vec<Vec<Expr>>,
    pub sources: Vec<String>,
}

impl BaseConnection {
    pub fn time(n: usize) -> BaseConnection {
        BaseConnection::from_exprs(n, vec![Expr::c(0.0); n], vec!["0".to_string(); n])
    }

    /// Parses `𝒴^i` over `(t, q1..qn)`.
    pub fn parse<S: AsRef<str>>(n: usize, sources: &[S]) -> Result<BaseConnection, ParseError> {
        let table = SymbolTable::base(n);
        let exprs = sources
            .iter()
            .map(|s| parse(s.as_ref(), &table))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BaseConnection::from_exprs(
            n,
            exprs,
            sources.iter().map(|s| s.as_ref().to_string()).collect(),
        ))
    }

    fn from_exprs(n: usize, components: Vec<Expr>, sources: Vec<String>) -> BaseConnection {
        assert_eq!(components.len(), n, "one component per configuration coordinate");
        let derivatives = components
            .iter()
            .map(|c| (0..n).map(|j| diff(c, 1 + j)).collect())
            .collect();
        BaseConnection {
            n,
            components,
            derivatives,
            sources,
        }
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Vec<Jet> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    pub fn derivatives_jet(&self, x: &[Jet]) -> Vec<Vec<Jet>> {
        self.derivatives
            .iter()
            .map(|row| row.iter().map(|c| c.eval(x)).collect())
            .collect()
    }

    /// `Σ 𝒴^i p_i` on `J¹*E`.
    pub fn pairing_jet(&self, x: &[Jet]) -> Jet {
        let y = self.eval_jet(x);
        dot(&y, &x[self.n + 1..2 * self.n + 1])
    }
}

/// Outcome of one coordinate-formula consistency test.
#[derive(Clone, Debug, PartialEq)]
pub struct FormulaCheck {
    pub name: String,
    pub residual: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct CosymplecticStructure {
    pub n: usize,
    pub dim: usize,
    pub connection: BaseConnection,
    /// `h^∇` on `J¹*E`.
    pub h: ScalarField,
    pub eta: CovectorField,
    pub theta_tilde: CovectorField,
    pub omega_tilde: TwoFormField,
    pub reeb_tilde: VectorField,
    /// `J¹*E → T*E`, `(t, q, p_i) ↦ (t, q, −𝒴^j p_j, p_i)`.
    pub transpose_vertical: VectorField,
    /// `T*E → T*E`, `(t, q, p, p_i) ↦ (t, q, −h − 𝒴^i p_i, p_i)`.
    pub hamiltonian_projection: VectorField,
    /// `J¹*E → T*E`, `(t, q, p_i) ↦ (t, q, −h − 𝒴^i p_i, p_i)`.
    pub hamiltonian_section: VectorField,
    pub theta_h_coordinate: CovectorField,
    /// Pullback of the Liouville form of `T*E` by the Hamiltonian section.
    pub theta_h: CovectorField,
    pub omega_h: TwoFormField,
    pub x_h_coordinate: VectorField,
    pub reeb_h: VectorField,
}

fn unit(dim: usize, slot: usize) -> Vec<Jet> {
    let mut v = vec![Jet::constant(0.0); dim];
    v[slot] = Jet::constant(1.0);
    v
}

/// Liouville form `p dt + p_i dq^i` of `T*E` in the slots `(t, q, p, p_i)`.
fn liouville(n: usize) -> CovectorField {
    let d = 2 * n + 2;
    CovectorField::new(d, move |x| {
        let mut out = vec![Jet::constant(0.0); d];
        out[0] = x[n + 1].clone();
        for i in 0..n {
            out[1 + i] = x[n + 2 + i].clone();
        }
        out
    })
}

/// `(φ*θ)_a = θ_b(φ(x)) ∂_a φ^b`.
pub fn pullback_covector(theta: &CovectorField, map: &VectorField) -> CovectorField {
    let th = theta.clone();
    let m = map.clone();
    let arity = map.arity();
    CovectorField::new(arity, move |x| {
        let at = th.eval_jet(&m.eval_jet(x));
        (0..arity)
            .map(|a| dot(&at, &m.directional_jet(x, &unit(arity, a))))
            .collect()
    })
}

pub fn build_cosymplectic(connection: BaseConnection, h: ScalarField) -> CosymplecticStructure {
    let n = connection.n;
    let dim = 2 * n + 1;
    assert_eq!(h.arity(), dim, "Hamiltonian must live on J1*E");
    let qs = |i: usize| 1 + i;
    let ps = move |i: usize| 1 + n + i;
    let mut e0 = vec![0.0; dim];
    e0[0] = 1.0;
    let eta = CovectorField::constant(e0);

    let c = connection.clone();
    let theta_tilde = CovectorField::new(dim, move |x| {
        let mut out = vec![Jet::constant(0.0); dim];
        out[0] = -c.pairing_jet(x);
        for i in 0..n {
            out[qs(i)] = x[ps(i)].clone();
        }
        out
    });

    // dq^i∧dp_i − dt∧(𝒴^i dp_i + p_i ∂_j𝒴^i dq^j)
    let c = connection.clone();
    let omega_tilde_fn = move |x: &[Jet]| {
        let y = c.eval_jet(x);
        let dy = c.derivatives_jet(x);
        let mut m = vec![Jet::constant(0.0); dim * dim];
        for i in 0..n {
            m[qs(i) * dim + ps(i)] = Jet::constant(1.0);
            m[ps(i) * dim + qs(i)] = Jet::constant(-1.0);
        }
        let mut beta = vec![Jet::constant(0.0); dim];
        for i in 0..n {
            beta[ps(i)] = y[i].clone();
            for j in 0..n {
                beta[qs(j)] += &(&x[ps(i)] * &dy[i][j]);
            }
        }
        for b in 0..dim {
            m[b] -= &beta[b];
            m[b * dim] += &beta[b];
        }
        m
    };
    let omega_tilde = TwoFormField::new(dim, omega_tilde_fn.clone());

    let c = connection.clone();
    let reeb_tilde = VectorField::new(dim, dim, move |x| {
        let y = c.eval_jet(x);
        let dy = c.derivatives_jet(x);
        let mut out = vec![Jet::constant(0.0); dim];
        out[0] = Jet::constant(1.0);
        for i in 0..n {
            out[qs(i)] = y[i].clone();
            for j in 0..n {
                out[ps(j)] -= &(&x[ps(i)] * &dy[i][j]);
            }
        }
        out
    });

    let c = connection.clone();
    let transpose_vertical = VectorField::new(dim, dim + 1, move |x| {
        let mut out: Vec<Jet> = x[..=n].to_vec();
        out.push(-c.pairing_jet(x));
        out.extend_from_slice(&x[n + 1..]);
        out
    });

    let (c, hh) = (connection.clone(), h.clone());
    let hamiltonian_section = VectorField::new(dim, dim + 1, move |x| {
        let mut out: Vec<Jet> = x[..=n].to_vec();
        out.push(-(&hh.eval_jet(x) + &c.pairing_jet(x)));
        out.extend_from_slice(&x[n + 1..]);
        out
    });

    let sec = hamiltonian_section.clone();
    let hamiltonian_projection = VectorField::new(dim + 1, dim + 1, move |z| {
        let mut x: Vec<Jet> = z[..=n].to_vec();
        x.extend_from_slice(&z[n + 2..]);
        sec.eval_jet(&x)
    });

    let (c, hh) = (connection.clone(), h.clone());
    let theta_h_coordinate = CovectorField::new(dim, move |x| {
        let mut out = vec![Jet::constant(0.0); dim];
        out[0] = &hh.eval_jet(x) - &c.pairing_jet(x);
        for i in 0..n {
            out[qs(i)] = x[ps(i)].clone();
        }
        out
    });
    let theta_h = pullback_covector(&liouville(n), &hamiltonian_section);

    // ω̃ + dh∧dt
    let hh = h.clone();
    let omega_h = TwoFormField::new(dim, move |x| {
        let mut m = omega_tilde_fn(x);
        let dh = hh.gradient_jet(x);
        for b in 0..dim {
            m[b * dim] += &dh[b];
            m[b] -= &dh[b];
        }
        m
    });

    let hh = h.clone();
    let x_h_coordinate = VectorField::new(dim, dim, move |x| {
        let dh = hh.gradient_jet(x);
        let mut out = vec![Jet::constant(0.0); dim];
        for i in 0..n {
            out[qs(i)] = dh[ps(i)].clone();
            out[ps(i)] = dh[qs(i)].clone();
        }
        out
    });

    let (c, hh) = (connection.clone(), h.clone());
    let reeb_h = VectorField::new(dim, dim, move |x| {
        let y = c.eval_jet(x);
        let dy = c.derivatives_jet(x);
        let dh = hh.gradient_jet(x);
        let mut out = vec![Jet::constant(0.0); dim];
        out[0] = Jet::constant(1.0);
        for j in 0..n {
            out[qs(j)] = &y[j] + &dh[ps(j)];
            let mut acc = dh[qs(j)].clone();
            for i in 0..n {
                acc += &(&x[ps(i)] * &dy[i][j]);
            }
            out[ps(j)] = -acc;
        }
        out
    });

    CosymplecticStructure {
        n,
        dim,
        connection,
        h,
        eta,
        theta_tilde,
        omega_tilde,
        reeb_tilde,
        transpose_vertical,
        hamiltonian_projection,
        hamiltonian_section,
        theta_h_coordinate,
        theta_h,
        omega_h,
        x_h_coordinate,
        reeb_h,
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl CosymplecticStructure {
    /// Same structure for another Hamiltonian function.
    pub fn with_hamiltonian(&self, h: ScalarField) -> CosymplecticStructure {
        build_cosymplectic(self.connection.clone(), h)
    }

    /// Matrix `Λ` of `#`, so that `{F, G} = dFᵀ Λ dG`.
    pub fn poisson_jet(&self, x: &[Jet]) -> JetMat {
        let dim = self.dim;
        let b = precosym::flat_matrix_jet(&self.eta.eval_jet(x), &self.omega_tilde.eval_jet(x));
        let r = self.reeb_tilde.eval_jet(x);
        let inv = match frame::inverse(&b) {
            Ok(m) => m,
            Err(_) => return JetMat::from_flat(dim, dim, vec![Jet::constant(f64::NAN); dim * dim]),
        };
        let mut out = JetMat::zeros(dim, dim);
        for a in 0..dim {
            for c in 0..dim {
                out.set(a, c, inv.get(a, c) - &(inv.get(a, 0) * &r[c]));
            }
        }
        out
    }

    pub fn poisson_at(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        self.poisson_jet(&lift(x)).real()
    }

    /// `{F, G} = ⟨dF, #dG⟩`.
    pub fn bracket(&self, f: &ScalarField, g: &ScalarField) -> ScalarField {
        let (s, f, g) = (self.clone(), f.clone(), g.clone());
        ScalarField::composed(self.dim, move |x| {
            let l = s.poisson_jet(x);
            dot(&f.gradient_jet(x), &l.mul_vec(&g.gradient_jet(x)))
        })
    }

    /// `X_F = #dF`.
    pub fn hamiltonian_field(&self, f: &ScalarField) -> VectorField {
        let (s, f) = (self.clone(), f.clone());
        VectorField::new(self.dim, self.dim, move |x| {
            s.poisson_jet(x).mul_vec(&f.gradient_jet(x))
        })
    }

    /// `E_h = R̃ + #dh`.
    pub fn evolution_field(&self) -> VectorField {
        self.reeb_tilde.add(&self.hamiltonian_field(&self.h))
    }

    /// Tests each coordinate formula against its defining relation.
    pub fn formula_checks(&self, points: &[Vec<f64>]) -> Vec<FormulaCheck> {
        let n = self.n;
        let dim = self.dim;
        let mut res = vec![0.0f64; 12];
        let liou = liouville(n);
        let vert_pull = pullback_covector(&liou, &self.transpose_vertical);
        let d_theta_tilde = self.theta_tilde.exterior_derivative();
        let d_theta_h_coordinate = self.theta_h_coordinate.exterior_derivative();
        let d_theta_h = self.theta_h.exterior_derivative();
        let sharp_dh = self.hamiltonian_field(&self.h);
        let mut scale: f64 = 1.0;
        for x in points {
            let xs = lift(x);
            scale = scale.max(max_abs(x));
            res[0] = res[0].max(max_diff(&self.theta_tilde.eval(x), &vert_pull.eval(x)));
            let neg: Vec<f64> = d_theta_tilde.eval(x).iter().map(|v| -v).collect();
            res[1] = res[1].max(max_diff(&self.omega_tilde.eval(x), &neg));
            let r = self.reeb_tilde.eval_jet(&xs);
            let ir = contract_jet(&self.omega_tilde.eval_jet(&xs), &r, dim);
            res[2] = res[2]
                .max(ir.iter().fold(0.0, |m, v| m.max(v.re().abs())))
                .max((r[0].re() - 1.0).abs());
            let mut z = x[..=n].to_vec();
            z.push(0.37 - x[0]);
            z.extend_from_slice(&x[n + 1..]);
            let hz = self.hamiltonian_projection.eval(&z);
            res[3] = res[3].max(max_diff(&hz, &self.hamiltonian_section.eval(x)));
            let again = self.hamiltonian_projection.eval(&hz);
            res[3] = res[3].max(max_diff(&again, &hz));
            res[4] = res[4].max(max_diff(&self.theta_h_coordinate.eval(x), &self.theta_h.eval(x)));
            let neg: Vec<f64> = d_theta_h_coordinate.eval(x).iter().map(|v| -v).collect();
            res[5] = res[5].max(max_diff(&self.omega_h.eval(x), &neg));
            let neg: Vec<f64> = d_theta_h.eval(x).iter().map(|v| -v).collect();
            res[6] = res[6].max(max_diff(&self.omega_h.eval(x), &neg));
            let sh = sharp_dh.eval(x);
            res[7] = res[7].max(max_diff(&self.x_h_coordinate.eval(x), &sh));
            let rh = self.reeb_h.eval_jet(&xs);
            let irh = contract_jet(&self.omega_h.eval_jet(&xs), &rh, dim);
            res[8] = res[8]
                .max(irh.iter().fold(0.0, |m, v| m.max(v.re().abs())))
                .max((rh[0].re() - 1.0).abs());
            let rt = self.reeb_tilde.eval(x);
            let xp = self.x_h_coordinate.eval(x);
            let rh = self.reeb_h.eval(x);
            let sum_coordinate: Vec<f64> = rt.iter().zip(&xp).map(|(a, b)| a + b).collect();
            let sum_sharp: Vec<f64> = rt.iter().zip(&sh).map(|(a, b)| a + b).collect();
            res[9] = res[9].max(max_diff(&rh, &sum_coordinate));
            res[10] = res[10].max(max_diff(&rh, &sum_sharp));
            res[11] = res[11].max(max_diff(&self.evolution_field().eval(x), &rh));
        }
        let tol = 1e-9 * scale;
        let names = [
            "tilde Theta equals the pullback of the Liouville form by the transposed vertical map",
            "tilde omega equals -d(tilde Theta)",
            "tilde R satisfies i(R)omega = 0 and eta(R) = 1",
            "H is the Hamiltonian section composed with the projection and is idempotent",
            "Theta_h = p dq + (h - Y p) dt equals the pullback of the Liouville form by the Hamiltonian section",
            "Omega_h = tilde omega + dh^dt equals -d(p dq + (h - Y p) dt)",
            "Omega_h = tilde omega + dh^dt equals -d(pullback of the Liouville form by the Hamiltonian section)",
            "X_h = h_p d/dq + h_q d/dp equals #dh",
            "R_h satisfies i(R_h)Omega_h = 0 and eta(R_h) = 1",
            "R_h equals tilde R + h_p d/dq + h_q d/dp",
            "R_h equals tilde R + #dh",
            "evolution field tilde R + #dh equals R_h",
        ];
        names
            .iter()
            .zip(res)
            .map(|(name, r)| FormulaCheck {
                name: name.to_string(),
                residual: r,
                consistent: r <= tol,
            })
            .collect()
    }
}
