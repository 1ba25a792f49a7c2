"""Sample-mean / fluctuation decomposition of i.i.d. potentials and Monte Carlo checks
of conditional concentration and Wegner-type bounds."""

__version__ = "0.1.0"
