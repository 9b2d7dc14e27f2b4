use faer::{c64, Mat};

use super::{ConstraintKind, Mesh, GAUSS};
use crate::error::Result;
use crate::linalg::{self, cx, CMat, RMat};
use crate::system::{CirclePoint, MorseSturmSystem};

/// Index form and per-element pairing integrals on one mesh.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub n: usize,
    pub m: usize,
    pub n_iter: usize,
    pub rho: CirclePoint,
    /// Matrix of `I_N`, so that `I_N(V, W) = W^H H V`.
    pub h: CMat,
    /// Row `e` is the functional `V -> int_e g(V', Y_N) - g(V, Y_N')`.
    pub pairing: CMat,
    /// `1 + max |N^2 R_N|_F` over the quadrature points.
    pub scale: f64,
}

fn add_block(h: &mut CMat, n: usize, row: usize, col: usize, blk: &CMat) {
    for i in 0..n {
        for j in 0..n {
            h[(row * n + i, col * n + j)] += blk[(i, j)];
        }
    }
}

/// Assembles the index form and the pairing integrals of the `N`-th iterate on `H^rho(N)`.
pub fn assemble(system: &MorseSturmSystem, n_iter: usize, rho: CirclePoint, mesh: Mesh) -> Result<Assembled> {
    let it = system.iterate(n_iter)?;
    let n = system.n();
    let m = mesh.m();
    let h = mesh.h();
    let dim = n * m;
    let g = system.g().matrix();
    let gc = linalg::complexify(g);
    let b = it.boundary_map(rho);
    let nn = (n_iter * n_iter) as f64;
    let per = (m % n_iter == 0).then(|| m / n_iter);
    let point = |e: usize, xi: f64| match per {
        Some(p) => it.eval_split(e / p, ((e % p) as f64 + xi) / p as f64),
        None => it.eval((e as f64 + xi) / m as f64),
    };

    let mut hmat = CMat::zeros(dim, dim);
    let mut pairing = CMat::zeros(m, dim);
    let mut scale = 0.0f64;
    let stiff = &gc * faer::Scale(cx(1.0 / h));
    for e in 0..m {
        let mut mass = [[RMat::zeros(n, n), RMat::zeros(n, n)], [RMat::zeros(n, n), RMat::zeros(n, n)]];
        let mut row = [vec![0.0; n], vec![0.0; n]];
        for &(xi, w) in &GAUSS {
            let p = point(e, xi);
            let r = &p.r * nn;
            scale = scale.max(r.norm_l2());
            let gr = g * &r;
            let phi = [1.0 - xi, xi];
            for a in 0..2 {
                for c in 0..2 {
                    mass[a][c] += &gr * (w * h * phi[a] * phi[c]);
                }
            }
            let gy = linalg::mat_vec(g, &p.y);
            let gdy = linalg::mat_vec(g, &p.dy);
            for k in 0..n {
                row[0][k] += w * (-gy[k] - h * phi[0] * gdy[k]);
                row[1][k] += w * (gy[k] - h * phi[1] * gdy[k]);
            }
        }
        let wrap = e + 1 == m;
        let idx = [e, (e + 1) % m];
        for a in 0..2 {
            for c in 0..2 {
                let sign = if a == c { 1.0 } else { -1.0 };
                let mut blk = linalg::complexify(mass[a][c].as_ref()) + &stiff * faer::Scale(cx(sign));
                if wrap && a == 1 {
                    blk = b.adjoint() * &blk;
                }
                if wrap && c == 1 {
                    blk = &blk * &b;
                }
                add_block(&mut hmat, n, idx[a], idx[c], &blk);
            }
        }
        for k in 0..n {
            pairing[(e, idx[0] * n + k)] += cx(row[0][k]);
        }
        if wrap {
            for k in 0..n {
                let s: c64 = (0..n).map(|j| b[(j, k)] * row[1][j]).sum();
                pairing[(e, k)] += s;
            }
        } else {
            for k in 0..n {
                pairing[(e, idx[1] * n + k)] += cx(row[1][k]);
            }
        }
    }
    Ok(Assembled { n, m, n_iter, rho, h: linalg::hermitian_part(hmat.as_ref()), pairing, scale: 1.0 + scale })
}

impl Assembled {
    /// Constraint rows: all pairing integrals vanish (`zero`) or are all equal (`star`).
    /// The pairing of a field in `H^rho(N)` picks up `rho^N` over a period, so for `rho^N != 1`
    /// the `star` rows also carry `c_{m-1} = rho^N c_0`, which forces the common value to vanish.
    pub fn constraints(&self, kind: ConstraintKind) -> CMat {
        match kind {
            ConstraintKind::Zero => self.pairing.clone(),
            ConstraintKind::Star => {
                let p = &self.pairing;
                let rn = self.rho.pow(self.n_iter);
                let rows = if rn.is_one() { self.m - 1 } else { self.m };
                let z = rn.rho();
                Mat::from_fn(rows, p.ncols(), |e, j| {
                    if e + 1 < self.m {
                        p[(e, j)] - p[(e + 1, j)]
                    } else {
                        p[(e, j)] - z * p[(0, j)]
                    }
                })
            }
        }
    }
}

/// Matrix of `I_N` on the discrete `H^rho(N)`.
pub fn assemble_form(system: &MorseSturmSystem, n_iter: usize, rho: CirclePoint, mesh: Mesh) -> Result<CMat> {
    Ok(assemble(system, n_iter, rho, mesh)?.h)
}

/// Constraint matrix whose null space is the discrete `H_*^rho(N)` or `H_0^rho(N)`.
pub fn assemble_constraints(
    system: &MorseSturmSystem,
    n_iter: usize,
    rho: CirclePoint,
    mesh: Mesh,
    kind: ConstraintKind,
) -> Result<CMat> {
    Ok(assemble(system, n_iter, rho, mesh)?.constraints(kind))
}

/// Index form restricted to the null space of the constraints.
#[derive(Clone, Debug)]
pub struct ConstrainedForm {
    pub kind: ConstraintKind,
    pub m: usize,
    pub scale: f64,
    pub h: CMat,
    pub c: CMat,
    /// Orthonormal basis of `Ker c`.
    pub z: CMat,
    pub h_reduced: CMat,
    pub rank: usize,
    /// The constraint rows were numerically dependent.
    pub rank_deficient: bool,
}

/// `H Z` using the block-banded (cyclic) structure of `H`.
fn banded_product(h: &CMat, n: usize, m: usize, z: &CMat) -> CMat {
    let k = z.ncols();
    let mut out = CMat::zeros(h.nrows(), k);
    for bi in 0..m {
        let mut neighbours = vec![(bi + m - 1) % m, bi, (bi + 1) % m];
        neighbours.sort_unstable();
        neighbours.dedup();
        for i in bi * n..(bi + 1) * n {
            for &bj in &neighbours {
                for j in bj * n..(bj + 1) * n {
                    let hij = h[(i, j)];
                    if hij == c64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in 0..k {
                        out[(i, c)] += hij * z[(j, c)];
                    }
                }
            }
        }
    }
    out
}

impl ConstrainedForm {
    pub fn new(asm: &Assembled, kind: ConstraintKind) -> Self {
        let c = asm.constraints(kind);
        let (z, rank) = linalg::null_space(c.as_ref(), 1e-10);
        let hz = banded_product(&asm.h, asm.n, asm.m, &z);
        let h_reduced = linalg::hermitian_part((z.adjoint() * &hz).as_ref());
        Self {
            kind,
            m: asm.m,
            scale: asm.scale,
            h: asm.h.clone(),
            rank_deficient: rank < c.nrows(),
            c,
            z,
            h_reduced,
            rank,
        }
    }

    pub fn build(system: &MorseSturmSystem, n_iter: usize, rho: CirclePoint, mesh: Mesh, kind: ConstraintKind) -> Result<Self> {
        Ok(Self::new(&assemble(system, n_iter, rho, mesh)?, kind))
    }
}
