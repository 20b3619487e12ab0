"""Multiscale differential-equation laboratory.

Three model families share the kernels in :mod:`multiscale_lab.numerics`:

* :mod:`multiscale_lab.oscillator` -- damped oscillator regimes, the overdamped
  limit and the stiff-spring pendulum;
* :mod:`multiscale_lab.sorption1d` / :mod:`multiscale_lab.sorption2d` --
  drift-diffusion with a trapping potential and its reduced model with a
  dynamic adsorption boundary condition;
* :mod:`multiscale_lab.shallow_water` / :mod:`multiscale_lab.network` --
  shallow-water channels coupled through single 2D junction elements.
"""

__version__ = "0.1.0"
