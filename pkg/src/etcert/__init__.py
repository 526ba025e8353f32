"""etcert: certify entanglement of target subsystems from given marginals.

The package splits into:

- linalg: dense multipartite operations (partial trace/transpose,
  realignment, Hermitian eigensolving) and the DensityMatrix container,
- sdp: a self-contained dense SDP solver (operator splitting + KKT polish),
- states: Werner/isotropic families, the noisy-W family, Bell-diagonal
  chains, UPB bound-entangled states, fixed examples, Haar sampling,
- certify: marginal-constrained certification (PPT lambda*, linear
  witnesses, CCNR, the M/N genuine-multipartite criterion, uniqueness
  fidelity) and (meta)transitivity verdicts,
- regions: closed-form compatibility and transitivity geometry for
  Werner/isotropic marginal pairs,
- campaign: seeded, resumable Monte Carlo runs over Haar-random states.
"""

from .config import EPS_CERT, TOL_HERM, TOL_PSD
from .linalg import (
    DensityMatrix,
    dm,
    eigh,
    embed_op,
    ket,
    kron,
    min_eig,
    ptrace,
    ptranspose,
    pure_fidelity,
    realign,
    trace_norm,
)
from .sdp import SdpBuilder, SdpProblem, SdpSolution, psd_project, solve
from .certify import (
    Certificate,
    InfeasibleSpec,
    MarginalSpec,
    SolverFailure,
    TransitivityVerdict,
    gme_minmax,
    lambda_star,
    marginal_flag,
    min_ccnr,
    min_fidelity,
    spec_from_state,
    verdict,
    witness_opt,
)
from .states import (
    bell_diagonal,
    haar_pure,
    isotropic_state,
    named_example,
    rho_n_gamma,
    selfcomp_choi,
    selfcomp_extension,
    upb_state,
    w_noisy_global,
    werner_state,
)
from .regions import (
    RegionVerdict,
    isotropic_classify,
    isotropic_max_vbc,
    isotropic_pair_compatible,
    werner_classify,
    werner_max_vbc,
    werner_pair_compatible,
    werner_triple_compatible,
)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
