"""Plane-wave ultrasound speckle simulation and mean-reverting diffusion despeckling.

The package is organized as a small library plus a batch CLI:

- :mod:`sonodiff.rng` -- counter-based seeded randomness
- :mod:`sonodiff.core` -- image helpers, per-sample normalization, paired samples
- :mod:`sonodiff.tensorio` -- binary tensor files, manifests, PGM export
- :mod:`sonodiff.probes` / :mod:`sonodiff.phantoms` / :mod:`sonodiff.speckle`
  -- synthetic phantoms and the plane-wave speckle simulator
- :mod:`sonodiff.sde` -- the mean-reverting diffusion engine
- :mod:`sonodiff.nn` -- the trainable noise predictor and its optimizer
- :mod:`sonodiff.metrics` -- full-reference and reference-less image metrics
- :mod:`sonodiff.uncertainty` -- ensemble prediction and variance/error analysis
- :mod:`sonodiff.cli` -- `sonodiff simulate|train|despeckle|evaluate|uncertainty`
"""

__version__ = "0.1.0"
