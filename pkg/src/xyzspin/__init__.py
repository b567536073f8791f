"""Exact and mean-field analysis of the dissipative all-to-all XYZ model.

The package computes steady states, Liouvillian spectra, and observables of
N spin-1/2 particles with anisotropic infinite-range exchange, local spin
loss at rate gamma, and collective spin loss at rate Gamma/(N-1):

    d rho/dt = -i [H, rho] + gamma sum_j D[sigma^-_j] rho
               + Gamma/(N-1) D[S^-] rho,
    H = [Jx (S^x)^2 + Jy (S^y)^2 + Jz (S^z)^2] / (2 (N-1)).

Permutation symmetry reduces the relevant operator space from 4^N to
O(N^3), which keeps exact steady states and spectra tractable up to
N ~ 95; with purely local dissipation the Liouvillian spectrum is
reflection-symmetric about Re(lambda) = -N gamma / 2, which the spectral
routines exploit (and certify) when extracting asymptotic decay rates.

Modules
-------
model        parameter containers, validation, config (de)serialization
meanfield    single-site mean-field equations, phases, closed forms
dicke        the permutation-symmetric (Dicke block) operator algebra
liouvillian  superoperator assembly in both bases; steady-state solver
spectral     spectra, reflection-symmetry detection, gap extraction
observables  correlators, entropies, bimodality, susceptibility
harness      sweeps, checkpointing, fits, crossings, extrapolation
plotting     PNG report figures for the command-line interface
"""

__version__ = "0.1.0"

from .model import ModelParams, SweepSpec, parse_config, serialize_config  # noqa: F401
