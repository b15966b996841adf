"""Sign-balance laboratory for band-limited random waves on the sphere."""

try:
    from . import _core as _c
except ImportError:  # running against a build tree with _core on sys.path
    import _core as _c

KernelSpec = _c.KernelSpec
band_count = _c.band_count
barrier_constants = _c.barrier_constants
bessel_j = _c.bessel_j
bessel_j1_zero = _c.bessel_j1_zero
critical_radii = _c.critical_radii
euclidean_kernel = _c.euclidean_kernel
gaussian_cdf = _c.gaussian_cdf
gegenbauer_normalized = _c.gegenbauer_normalized
hex_defect = _c.hex_defect
hex_defect_derivatives = _c.hex_defect_derivatives
inclusion_norm = _c.inclusion_norm
jacobi = _c.jacobi
kernel_asymptotic = _c.kernel_asymptotic
kernel_band = _c.kernel_band
kernel_full_band = _c.kernel_full_band
legendre = _c.legendre
level_barrier_limit_bias = _c.level_barrier_limit_bias
n_dim = _c.n_dim
sample_band_values = _c.sample_band_values
sphere_sign_barrier = _c.sphere_sign_barrier
tau = _c.tau
volume_bias = _c.volume_bias
xi_integral = _c.xi_integral
xi_profile = _c.xi_profile

__version__ = _c.__version__

__all__ = [
    "KernelSpec", "band_count", "barrier_constants", "bessel_j", "bessel_j1_zero",
    "critical_radii", "euclidean_kernel", "gaussian_cdf", "gegenbauer_normalized",
    "hex_defect", "hex_defect_derivatives", "inclusion_norm", "jacobi",
    "kernel_asymptotic", "kernel_band", "kernel_full_band", "legendre",
    "level_barrier_limit_bias", "n_dim", "sample_band_values", "sphere_sign_barrier",
    "tau", "volume_bias", "xi_integral", "xi_profile",
]
