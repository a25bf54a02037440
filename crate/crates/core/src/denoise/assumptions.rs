use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Denoiser;
use crate::error::{Error, Result};
use crate::image::Image;

/// `‖f(c·x) − c·f(x)‖ / (‖f(x)‖ + ε)`, which vanishes for locally homogeneous
/// denoisers.
pub fn homogeneity_residual(d: &Denoiser, x: &Image, c: f64) -> Result<f64> {
    if !(0.99..=1.01).contains(&c) {
        return Err(Error::invalid(format!("homogeneity scale {c} outside [0.99, 1.01]")));
    }
    let fx = d.denoise(x)?;
    let fcx = d.denoise(&x.scaled(c))?;
    Ok(fcx.lin_comb(1.0, &fx, -c).norm() / (fx.norm() + f64::EPSILON))
}

/// Finite-difference step scaled to the intensity range of `x`.
pub fn default_fd_step(x: &Image) -> f64 {
    1e-3 * (1.0 + x.norm_inf())
}

/// Power iteration on the central-difference Jacobian-vector product of `f`
/// at `x`. Costs `2·probes` denoiser evaluations.
pub fn jacobian_spectral_radius_estimate(
    d: &Denoiser,
    x: &Image,
    probes: usize,
    fd_step: f64,
    seed: u64,
) -> Result<f64> {
    if probes == 0 {
        return Err(Error::invalid("at least one probe is required"));
    }
    if !(fd_step > 0.0) {
        return Err(Error::invalid(format!("finite-difference step must be positive, got {fd_step}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = x.map(|_| StandardNormal.sample(&mut rng));
    v = v.scaled(1.0 / v.norm());

    let mut rayleigh = 0.0;
    for _ in 0..probes {
        let plus = d.denoise(&x.lin_comb(1.0, &v, fd_step))?;
        let minus = d.denoise(&x.lin_comb(1.0, &v, -fd_step))?;
        let jv = plus.lin_comb(1.0, &minus, -1.0).scaled(0.5 / fd_step);
        rayleigh = v.dot(&jv);
        let n = jv.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        v = jv.scaled(1.0 / n);
    }
    Ok(rayleigh.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Dims;

    fn noisy(dims: Dims, seed: u64) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(dims, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            128.0 + 40.0 * z
        })
        .unwrap()
    }

    #[test]
    fn unit_scale_gives_zero() {
        let d = Denoiser::from_fn("odd", |x| x.map(|v| v.sin() * 3.0 + 1.0));
        assert_eq!(homogeneity_residual(&d, &noisy(Dims::new(4, 4), 0), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_is_homogeneous() {
        let d = Denoiser::gaussian(5, 1.0).unwrap();
        let x = noisy(Dims::new(16, 16), 1);
        for c in [0.99, 0.999, 1.001, 1.01] {
            assert!(homogeneity_residual(&d, &x, c).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn affine_plugin_violates_homogeneity() {
        let d = Denoiser::from_fn("plus-one", |x| x.map(|v| v + 1.0));
        let x = Image::filled(Dims::new(2, 2), 1.0);
        let r = homogeneity_residual(&d, &x, 1.001).unwrap();
        assert!((r - 5e-4).abs() < 1e-12, "{r}");
    }

    #[test]
    fn out_of_range_scale_is_rejected() {
        let d = Denoiser::gaussian(3, 1.0).unwrap();
        assert!(homogeneity_residual(&d, &Image::zeros(Dims::new(3, 3)), 1.5).is_err());
    }

    #[test]
    fn identity_has_unit_radius() {
        let d = Denoiser::from_fn("identity", Image::clone);
        let x = noisy(Dims::new(8, 8), 2);
        let rho = jacobian_spectral_radius_estimate(&d, &x, 5, default_fd_step(&x), 3).unwrap();
        assert!((rho - 1.0).abs() < 1e-8, "{rho}");
        assert_eq!(d.eval_count(), 10);
    }

    #[test]
    fn half_scaling_has_half_radius() {
        let d = Denoiser::from_fn("half", |x| x.scaled(0.5));
        let x = noisy(Dims::new(8, 8), 4);
        let rho = jacobian_spectral_radius_estimate(&d, &x, 3, default_fd_step(&x), 5).unwrap();
        assert!((rho - 0.5).abs() < 1e-8, "{rho}");
    }

    #[test]
    fn gaussian_radius_bounded_by_kernel_spectrum() {
        let d = Denoiser::gaussian(3, 1.0).unwrap();
        let x = noisy(Dims::new(32, 32), 6);
        let rho = jacobian_spectral_radius_estimate(&d, &x, 30, default_fd_step(&x), 7).unwrap();
        assert!(rho <= 1.0 + 1e-6, "{rho}");
        assert!(rho > 0.5);
    }
}
