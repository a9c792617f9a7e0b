//! Pointwise operators: the generator L_ε and the pairing of ν_ε with a
//! test function.

use crate::error::{invalid, Error, Result};
use crate::fields::{Field, Regularity};
use crate::kernels::RadialKernel;
use crate::quad::{try_integrate_with_breaks, Tolerance};
use crate::scalar::Real;
use crate::special::gamma;

fn angular_tol<F: Real>() -> Tolerance<F> {
    Tolerance::new(1e-14, 1e-12).with_max_panels(400)
}

/// ∫_{S^{d-1}} [f(rω) + f(-rω)] / 2 dω, d ∈ {1, 2, 3}. Pairing ω with -ω
/// makes the result vanish exactly for odd f.
fn symmetric_sphere_integral<F, G>(dim: usize, r: F, f: G) -> Result<F>
where
    F: Real,
    G: Fn(&[F]) -> F,
{
    let both = |w: &[F]| {
        let neg: Vec<F> = w.iter().map(|&v| -v).collect();
        f(w) + f(&neg)
    };
    match dim {
        1 => Ok(both(&[r])),
        2 => Ok(try_integrate_with_breaks(
            |t: F| Ok(both(&[r * t.cos(), r * t.sin()])),
            F::zero(),
            F::PI(),
            &[],
            &angular_tol(),
        )?
        .value),
        3 => Ok(try_integrate_with_breaks(
            |phi: F| {
                let (s, c) = phi.sin_cos();
                let ring = try_integrate_with_breaks(
                    |t: F| Ok(both(&[r * s * t.cos(), r * s * t.sin(), r * c])),
                    F::zero(),
                    F::TAU(),
                    &[],
                    &angular_tol(),
                )?;
                Ok(s * ring.value)
            },
            F::zero(),
            F::FRAC_PI_2(),
            &[],
            &angular_tol(),
        )?
        .value),
        d => Err(Error::Unsupported(format!("angular quadrature in d = {d}"))),
    }
}

fn require_smooth<F: Real>(field: &Field<F>, what: &str) -> Result<()> {
    if field.regularity() != Regularity::Smooth {
        return invalid(format!("{what} needs a smooth field, got `{}`", field.id()));
    }
    Ok(())
}

/// Radii where the integrand seen from `x` may kink.
fn kink_distances<F: Real>(field: &Field<F>, x: &[F]) -> Vec<F> {
    let nx = x.iter().map(|&v| v * v).sum::<F>().sqrt();
    field
        .kink_radii()
        .into_iter()
        .flat_map(|rho| [(rho - nx).abs(), rho + nx])
        .filter(|r| *r > F::zero())
        .collect()
}

/// L_ε u(x) = -(1/2) ∫ (u(x+h) + u(x-h) - 2u(x)) ν(h) dh for p = 2.
pub fn generator<F: Real>(field: &Field<F>, x: &[F], kernel: &RadialKernel<F>) -> Result<F> {
    if kernel.p_exp() != F::of(2.0) {
        return invalid(format!("the generator needs p = 2, got p = {}", kernel.p_exp()));
    }
    if x.len() != kernel.dim() {
        return invalid("point and kernel disagree on the dimension");
    }
    require_smooth(field, "the generator")?;
    let dim = kernel.dim();
    let power = F::of_usize(dim + 1);
    // the symmetric difference is O(r²); below the floor it is frozen
    let floor = F::of(1e-4);
    let inner = kernel.integrate_radial(
        F::zero(),
        F::infinity(),
        power,
        floor,
        &kink_distances(field, x),
        |r| {
            let a = symmetric_sphere_integral(dim, r, |w| field.second_difference(x, w))?;
            Ok(a / (r * r))
        },
    )?;
    Ok(-F::of(0.5) * inner)
}

/// Generator of the stable kernel on the Gaussian at the origin:
/// Γ(1 + ε/2), for any d.
pub fn stable_gaussian_generator<F: Real>(eps: F) -> F {
    gamma(F::one() + eps * F::of(0.5))
}

fn check_pairing<F: Real>(phi: &Field<F>, kernel: &RadialKernel<F>) -> Result<()> {
    if kernel.p_exp() != F::one() {
        return invalid(format!("the Dirac pairing needs p = 1, got p = {}", kernel.p_exp()));
    }
    require_smooth(phi, "the Dirac pairing")
}

/// ∫ φ(h) (1 ∧ |h|) ν(h) dh, which tends to φ(0) for a concentrating
/// p = 1 family.
pub fn dirac_pairing<F: Real>(phi: &Field<F>, kernel: &RadialKernel<F>) -> Result<F> {
    check_pairing(phi, kernel)?;
    let dim = kernel.dim();
    let d = F::of_usize(dim);
    let origin = vec![F::zero(); dim];
    let breaks = kink_distances(phi, &origin);
    let g = |r: F| symmetric_sphere_integral(dim, r, |w| phi.eval(w));
    let near = kernel.integrate_radial(F::zero(), F::one(), d, F::zero(), &breaks, g)?;
    let far = kernel.integrate_radial(F::one(), F::infinity(), d - F::one(), F::zero(), &breaks, g)?;
    Ok(near + far)
}

/// ∫ φ(h) ν(h) dh without the (1 ∧ |h|) weight. Fails with
/// `NonConvergence` when ν is not integrable at the origin.
pub fn dirac_pairing_raw<F: Real>(phi: &Field<F>, kernel: &RadialKernel<F>) -> Result<F> {
    check_pairing(phi, kernel)?;
    let dim = kernel.dim();
    let origin = vec![F::zero(); dim];
    kernel.integrate_radial(
        F::zero(),
        F::infinity(),
        F::of_usize(dim - 1),
        F::zero(),
        &kink_distances(phi, &origin),
        |r| symmetric_sphere_integral(dim, r, |w| phi.eval(w)),
    )
}
