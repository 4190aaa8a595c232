use std::collections::HashMap;

use super::{Christoffel, MetricField, MixedTensor, OneFormField, SymTensorField, Tensor3, VectorField};
use crate::error::{Error, Result};
use crate::expr::{sum, Differentiator, Expr};

/// Symbolic inverse `g^{ij}`. Diagonal metrics invert entrywise; otherwise
/// adjugate over determinant with memoized minors.
pub fn inverse_metric(g: &MetricField) -> &SymTensorField {
    g.cache_inverse(|| symbolic_inverse(g.components()))
}

pub fn symbolic_inverse(m: &SymTensorField) -> SymTensorField {
    let n = m.dim();
    if m.is_diagonal() {
        return SymTensorField::from_fn(n, |i, j| if i == j { 1.0 / m.get(i, i) } else { Expr::zero() });
    }
    let mut memo = HashMap::new();
    let full = (1u32 << n) - 1;
    let det = minor_det(m, full, full, &mut memo);
    SymTensorField::from_fn(n, |i, j| {
        // (i, j) cofactor, equal to the (j, i) one by symmetry
        let minor = minor_det(m, full & !(1 << i), full & !(1 << j), &mut memo);
        let signed = if (i + j) % 2 == 0 { minor } else { -minor };
        signed / &det
    })
}

/// Determinant of `m`, symbolic.
pub fn symbolic_det(m: &SymTensorField) -> Expr {
    let full = (1u32 << m.dim()) - 1;
    minor_det(m, full, full, &mut HashMap::new())
}

fn minor_det(m: &SymTensorField, rows: u32, cols: u32, memo: &mut HashMap<(u32, u32), Expr>) -> Expr {
    if rows == 0 {
        return Expr::one();
    }
    if let Some(d) = memo.get(&(rows, cols)) {
        return d.clone();
    }
    let r = rows.trailing_zeros() as usize;
    let mut terms = Vec::new();
    let mut sign = 1.0;
    for c in 0..m.dim() {
        if cols & (1 << c) == 0 {
            continue;
        }
        let a = m.get(r, c);
        if !a.is_zero() {
            let sub = minor_det(m, rows & !(1 << r), cols & !(1 << c), memo);
            let t = a * sub;
            terms.push(if sign > 0.0 { t } else { -t });
        }
        sign = -sign;
    }
    let d = sum(terms);
    memo.insert((rows, cols), d.clone());
    d
}

/// Levi-Civita coefficients `Γ^k_ij = ½ g^{kl}(∂_i g_lj + ∂_j g_li − ∂_l g_ij)`.
pub fn christoffel(g: &MetricField) -> &Christoffel {
    g.cache_christoffel(|| {
        let n = g.dim();
        let ginv = inverse_metric(g);
        // dg[(l*n + i)*n + j] = ∂_l g_ij
        let mut dg = Vec::with_capacity(n * n * n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    dg.push(g.partial(g.get(i, j), l));
                }
            }
        }
        let d = |l: usize, i: usize, j: usize| &dg[(l * n + i) * n + j];
        let mut first = vec![Expr::zero(); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5 * (d(i, l, j) + d(j, l, i) - d(l, i, j));
                    first[(l * n + i) * n + j] = v.clone();
                    first[(l * n + j) * n + i] = v;
                }
            }
        }
        let mut comps = vec![Expr::zero(); n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = sum((0..n).map(|l| ginv.get(k, l) * &first[(l * n + i) * n + j]));
                    comps[(k * n + i) * n + j] = v.clone();
                    comps[(k * n + j) * n + i] = v;
                }
            }
        }
        Christoffel { n, comps }
    })
}

/// `Ric_jk = ∂_iΓ^i_jk − ∂_jΓ^i_ik + Γ^i_ipΓ^p_jk − Γ^i_jpΓ^p_ik`.
pub fn ricci(g: &MetricField) -> &SymTensorField {
    g.cache_ricci(|| {
        let n = g.dim();
        let gam = christoffel(g);
        let contracted: Vec<Expr> = (0..n).map(|k| sum((0..n).map(|i| gam.get(i, i, k).clone()))).collect();
        SymTensorField::from_fn(n, |j, k| {
            let div = sum((0..n).map(|i| g.partial(gam.get(i, j, k), i)));
            let grad = g.partial(&contracted[k], j);
            let quad1 = sum((0..n).map(|p| &contracted[p] * gam.get(p, j, k)));
            let quad2 = sum((0..n)
                .flat_map(|i| (0..n).map(move |p| (i, p)))
                .map(|(i, p)| gam.get(i, j, p) * gam.get(p, i, k)));
            div - grad + quad1 - quad2
        })
    })
}

/// `R = g^{jk} Ric_jk`.
pub fn scalar_curvature(g: &MetricField) -> &Expr {
    g.cache_scalar(|| trace(g, ricci(g)))
}

/// Fully covariant Riemann tensor `R_{ασμν} = g_{αρ} R^ρ_{σμν}` with
/// `R(∂_μ, ∂_ν)∂_σ = R^ρ_{σμν} ∂_ρ`, flattened as `[α][σ][μ][ν]`.
pub fn riemann_lowered(g: &MetricField) -> &[Expr] {
    g.cache_riemann(|| {
        let n = g.dim();
        let gam = christoffel(g);
        let mut up = vec![Expr::zero(); n * n * n * n];
        let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        for rho in 0..n {
            for sigma in 0..n {
                for mu in 0..n {
                    for nu in (mu + 1)..n {
                        let v = g.partial(gam.get(rho, nu, sigma), mu) - g.partial(gam.get(rho, mu, sigma), nu)
                            + sum((0..n).map(|l| gam.get(rho, mu, l) * gam.get(l, nu, sigma)))
                            - sum((0..n).map(|l| gam.get(rho, nu, l) * gam.get(l, mu, sigma)));
                        up[idx(rho, sigma, nu, mu)] = -v.clone();
                        up[idx(rho, sigma, mu, nu)] = v;
                    }
                }
            }
        }
        let mut low = Vec::with_capacity(n * n * n * n);
        for a in 0..n {
            for s in 0..n {
                for mu in 0..n {
                    for nu in 0..n {
                        low.push(sum((0..n).map(|r| g.get(a, r) * &up[idx(r, s, mu, nu)])));
                    }
                }
            }
        }
        low
    })
}

/// `tr_g T = g^{ij} T_ij`.
pub fn trace(g: &MetricField, t: &SymTensorField) -> Expr {
    let ginv = inverse_metric(g);
    let n = g.dim();
    sum((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| ginv.get(i, j) * t.get(i, j)))
}

/// Exterior derivative of a scalar: component-wise partials.
pub fn d_scalar(phi: &Expr, dim: usize) -> OneFormField {
    OneFormField((0..dim).map(|i| Differentiator::new(i).diff(phi)).collect())
}

/// `d_scalar` sharing the metric's derivative memo.
pub fn d_scalar_on(g: &MetricField, phi: &Expr) -> OneFormField {
    OneFormField((0..g.dim()).map(|i| g.partial(phi, i)).collect())
}

/// `(∇φ)^i = g^{ij} ∂_j φ`.
pub fn gradient(g: &MetricField, phi: &Expr) -> VectorField {
    raise(g, &d_scalar_on(g, phi))
}

/// `∇²φ_ij = ∂_i∂_jφ − Γ^k_ij ∂_kφ`.
pub fn hessian(g: &MetricField, phi: &Expr) -> SymTensorField {
    let n = g.dim();
    let gam = christoffel(g);
    let d = d_scalar_on(g, phi);
    SymTensorField::from_fn(n, |i, j| {
        g.partial(&d.0[j], i) - sum((0..n).map(|k| gam.get(k, i, j) * &d.0[k]))
    })
}

/// `Δφ = g^{ij} ∇²φ_ij`.
pub fn laplacian(g: &MetricField, phi: &Expr) -> Expr {
    trace(g, &hessian(g, phi))
}

/// `(L_X g)_ij = X^k ∂_k g_ij + g_kj ∂_i X^k + g_ik ∂_j X^k`.
pub fn lie_derivative_metric(g: &MetricField, x: &VectorField) -> Result<SymTensorField> {
    let n = g.dim();
    check(x.dim(), n)?;
    Ok(SymTensorField::from_fn(n, |i, j| {
        sum((0..n).map(|k| {
            &x.0[k] * g.partial(g.get(i, j), k)
                + g.get(k, j) * g.partial(&x.0[k], i)
                + g.get(i, k) * g.partial(&x.0[k], j)
        }))
    }))
}

/// `div X = ∂_i X^i + Γ^i_ik X^k`.
pub fn divergence_vector(g: &MetricField, x: &VectorField) -> Result<Expr> {
    let n = g.dim();
    check(x.dim(), n)?;
    let gam = christoffel(g);
    Ok(sum((0..n).map(|i| g.partial(&x.0[i], i)))
        + sum((0..n)
            .flat_map(|i| (0..n).map(move |k| (i, k)))
            .map(|(i, k)| gam.get(i, i, k) * &x.0[k])))
}

/// `(∇_i T)_jk = ∂_i T_jk − Γ^p_ij T_pk − Γ^p_ik T_jp`, stored `[i][j][k]`.
pub fn covariant_derivative_sym2(g: &MetricField, t: &SymTensorField) -> Result<Tensor3> {
    let n = g.dim();
    check(t.dim(), n)?;
    let gam = christoffel(g);
    let mut comps = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                comps.push(
                    g.partial(t.get(j, k), i)
                        - sum((0..n).map(|p| gam.get(p, i, j) * t.get(p, k)))
                        - sum((0..n).map(|p| gam.get(p, i, k) * t.get(j, p))),
                );
            }
        }
    }
    Ok(Tensor3 { n, comps })
}

/// `(div T)_j = g^{ik} (∇_i T)_kj`.
pub fn divergence_sym2(g: &MetricField, t: &SymTensorField) -> Result<OneFormField> {
    let n = g.dim();
    let nabla = covariant_derivative_sym2(g, t)?;
    let ginv = inverse_metric(g);
    Ok(OneFormField(
        (0..n)
            .map(|j| {
                sum((0..n)
                    .flat_map(|i| (0..n).map(move |k| (i, k)))
                    .map(|(i, k)| ginv.get(i, k) * nabla.get(i, k, j)))
            })
            .collect(),
    ))
}

/// `∇_i Z^k = ∂_i Z^k + Γ^k_ip Z^p`.
pub fn covariant_derivative_vector(g: &MetricField, z: &VectorField) -> Result<MixedTensor> {
    let n = g.dim();
    check(z.dim(), n)?;
    let gam = christoffel(g);
    let mut comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            comps.push(g.partial(&z.0[k], i) + sum((0..n).map(|p| gam.get(k, i, p) * &z.0[p])));
        }
    }
    Ok(MixedTensor { n, comps })
}

/// `T̊ = T − (tr_g T / n) g`.
pub fn traceless(g: &MetricField, t: &SymTensorField) -> SymTensorField {
    let n = g.dim();
    let tr = trace(g, t) / n as f64;
    SymTensorField::from_fn(n, |i, j| t.get(i, j) - &tr * g.get(i, j))
}

/// `T^{ij} = g^{ik} g^{jl} T_kl`.
pub fn raise_both(g: &MetricField, t: &SymTensorField) -> SymTensorField {
    let n = g.dim();
    let ginv = inverse_metric(g);
    // mixed[i][l] = g^{ik} T_kl
    let mixed: Vec<Expr> = (0..n)
        .flat_map(|i| (0..n).map(move |l| (i, l)))
        .map(|(i, l)| sum((0..n).map(|k| ginv.get(i, k) * t.get(k, l))))
        .collect();
    SymTensorField::from_fn(n, |i, j| sum((0..n).map(|l| &mixed[i * n + l] * ginv.get(l, j))))
}

/// `⟨A, B⟩ = g^{ik} g^{jl} A_ij B_kl`.
pub fn tensor_inner(g: &MetricField, a: &SymTensorField, b: &SymTensorField) -> Expr {
    let n = g.dim();
    let up = raise_both(g, a);
    sum((0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| up.get(i, j) * b.get(i, j)))
}

/// `⟨∇Z, T⟩ = g^{ik} g^{jl} (∇Z)_ij T_kl` with `(∇Z)_ij = g_jk ∇_i Z^k`,
/// which reduces to `∇_i Z^l g^{ik} T_kl`.
pub fn inner_nabla_vector_sym(g: &MetricField, z: &VectorField, t: &SymTensorField) -> Result<Expr> {
    let n = g.dim();
    let nz = covariant_derivative_vector(g, z)?;
    let ginv = inverse_metric(g);
    Ok(sum((0..n).flat_map(|i| (0..n).map(move |l| (i, l))).map(|(i, l)| {
        nz.get(i, l) * sum((0..n).map(|k| ginv.get(i, k) * t.get(k, l)))
    })))
}

/// `X_i = g_ij X^j`.
pub fn lower(g: &MetricField, x: &VectorField) -> OneFormField {
    let n = g.dim();
    OneFormField((0..n).map(|i| sum((0..n).map(|j| g.get(i, j) * &x.0[j]))).collect())
}

/// `ω^i = g^{ij} ω_j`.
pub fn raise(g: &MetricField, w: &OneFormField) -> VectorField {
    let n = g.dim();
    let ginv = inverse_metric(g);
    VectorField((0..n).map(|i| sum((0..n).map(|j| ginv.get(i, j) * &w.0[j]))).collect())
}

/// `ω(X) = ω_i X^i`.
pub fn pair(w: &OneFormField, x: &VectorField) -> Expr {
    sum(w.0.iter().zip(&x.0).map(|(a, b)| a * b))
}

/// `T(X, ·)_j = T_ij X^i`.
pub fn sym_apply(t: &SymTensorField, x: &VectorField) -> OneFormField {
    let n = t.dim();
    OneFormField((0..n).map(|j| sum((0..n).map(|i| t.get(i, j) * &x.0[i]))).collect())
}

/// `T(X, Y) = T_ij X^i Y^j`.
pub fn sym_bilinear(t: &SymTensorField, x: &VectorField, y: &VectorField) -> Expr {
    pair(&sym_apply(t, x), y)
}

/// The vector field `T(Z)` defined by `g(T(Z), Y) = T(Z, Y)`.
pub fn sym_endomorphism(g: &MetricField, t: &SymTensorField, z: &VectorField) -> VectorField {
    raise(g, &sym_apply(t, z))
}

/// `g(X, Y)`.
pub fn vector_inner(g: &MetricField, x: &VectorField, y: &VectorField) -> Expr {
    pair(&lower(g, x), y)
}

/// `ω ⊗ η` symmetrized: `(ω_i η_j + ω_j η_i) / 2`; for `ω = η` this is `ω ⊗ ω`.
pub fn sym_product(w: &OneFormField, v: &OneFormField) -> SymTensorField {
    SymTensorField::from_fn(w.dim(), |i, j| {
        if w == v {
            &w.0[i] * &w.0[j]
        } else {
            0.5 * (&w.0[i] * &v.0[j] + &w.0[j] * &v.0[i])
        }
    })
}

fn check(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!(
            "field has {got} components on a {want}-dimensional chart"
        )));
    }
    Ok(())
}
