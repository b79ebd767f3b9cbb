"""Two-hop buffer-aided relaying under an interference-limited power constraint.

Subpackages:
  specfun   special functions and named integrals
  channel   geometry -> link statistics, marginal CCDF/PDF, SNR sampling
  analytic  joint selection CCDFs, rates, error probabilities, delay bound
  queueing  finite-buffer threshold-protocol chain and design schemes
  sim       slot-level Monte Carlo engine
  cli       experiment runner with figure presets
"""

__version__ = "0.1.0"
